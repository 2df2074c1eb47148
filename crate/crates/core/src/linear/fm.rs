//! Fourier–Motzkin elimination with derivation certificates.
//!
//! Eliminating a coordinate combines every positive-coefficient row with
//! every negative-coefficient row (division-free: each pair is merged with
//! the two opposite pivot magnitudes as multipliers), so unpruned runs grow
//! doubly exponentially.  Three pruning layers run after *every* single
//! coordinate:
//!
//! 1. syntactic: canonical scaling, tautology removal, exact duplicates,
//!    and domination (equal direction, weaker constant);
//! 2. ancestral: after `k` eliminations, any row combining more than
//!    `k + 1` of the original rows is redundant (Imbert's acceleration
//!    theorem) and is dropped without a feasibility solve;
//! 3. certified: when the caller supplies the vertex set of the input
//!    polytope, a facet test — a row survives exactly when its tight
//!    vertices span an affine hyperplane of the current projection — which
//!    needs only rank computations; otherwise an exact-LP redundancy pass
//!    with violation-witness caching, identical in spirit to
//!    [`remove_redundant`](super::remove_redundant).
//!
//! Every surviving row carries a certificate: the nonnegative rational
//! combination of input rows that produces it, exactly.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::{lp, LinIneq, LinSystem};
use crate::linalg::{dot, rank};
use crate::ratio::{normalize_primitive, primitive_integers, Rat};

/// Tuning knobs for [`fm_eliminate`].
#[derive(Clone, Debug)]
pub struct FmOptions {
    /// Run the exact-LP redundancy pass after each elimination step.
    pub lp_prune: bool,
    /// Drop rows whose ancestor sets exceed the Imbert bound.
    pub imbert: bool,
    /// Abort when a step would materialize more candidate rows than this.
    pub row_limit: usize,
    /// Vertices of the input system's feasible set (same width, coordinate
    /// 0 equal to one).  Valid only when the input system describes exactly
    /// the convex hull of these points; the redundancy pass then keeps
    /// precisely the facet rows of every intermediate projection by a rank
    /// test on each row's tight vertices, with no linear programs at all.
    pub hull_vertices: Option<Vec<Vec<Rat>>>,
}

impl Default for FmOptions {
    fn default() -> Self {
        FmOptions {
            lp_prune: true,
            imbert: true,
            row_limit: 200_000,
            hull_vertices: None,
        }
    }
}

/// Elimination failure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FmError {
    /// A step exceeded [`FmOptions::row_limit`].
    RowLimit {
        /// Coordinate whose elimination blew up.
        coordinate: usize,
        /// Number of candidate rows the step would have produced.
        candidate_rows: usize,
    },
}

impl core::fmt::Display for FmError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FmError::RowLimit {
                coordinate,
                candidate_rows,
            } => write!(
                f,
                "eliminating coordinate {coordinate} would materialize {candidate_rows} rows, \
                 over the configured limit"
            ),
        }
    }
}

/// Result of a Fourier–Motzkin projection.
#[derive(Clone, Debug)]
pub struct FmResult {
    /// The projected system: same width, eliminated coordinates zeroed.
    pub system: LinSystem,
    /// Per output row, the nonnegative combination of input rows that
    /// derives it: `sum_j mult * input_row_j = output_row` exactly.
    pub certificates: Vec<Vec<(usize, Rat)>>,
    /// Total rows discarded by the redundancy passes.
    pub removed_redundant: usize,
}

#[derive(Clone, Debug)]
struct FmRow {
    ineq: LinIneq,
    ancestors: BTreeSet<usize>,
    cert: Vec<(usize, Rat)>,
}

impl FmRow {
    fn canonicalize(&mut self) {
        let mult = normalize_primitive(&mut self.ineq.coeffs);
        for (_, m) in &mut self.cert {
            *m = &*m * &mult;
        }
    }
}

fn merge_certs(a: &[(usize, Rat)], wa: &Rat, b: &[(usize, Rat)], wb: &Rat) -> Vec<(usize, Rat)> {
    let mut merged: BTreeMap<usize, Rat> = BTreeMap::new();
    for (idx, m) in a {
        let entry = merged.entry(*idx).or_insert_with(Rat::zero);
        *entry = &*entry + &(m * wa);
    }
    for (idx, m) in b {
        let entry = merged.entry(*idx).or_insert_with(Rat::zero);
        *entry = &*entry + &(m * wb);
    }
    merged.into_iter().filter(|(_, m)| !m.is_zero()).collect()
}

/// Projects a system by eliminating the given coordinates (unit coordinate
/// 0 is not eliminable).  The output system lives in the same width with
/// the eliminated coordinates structurally zero, and describes exactly the
/// shadow of the input polyhedron on the remaining coordinates.
///
/// Coordinates are processed in a greedy order that minimizes the
/// positive×negative row-pair product at each step.
///
/// # Errors
/// Fails with [`FmError::RowLimit`] when a step would exceed the limit.
///
/// # Panics
/// Panics if asked to eliminate coordinate 0.
pub fn fm_eliminate(
    system: &LinSystem,
    eliminate: &[usize],
    options: &FmOptions,
) -> Result<FmResult, FmError> {
    assert!(
        !eliminate.contains(&0),
        "the unit coordinate cannot be eliminated"
    );
    let width = system.width;
    let mut rows: Vec<FmRow> = system
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = FmRow {
                ineq: r.clone(),
                ancestors: BTreeSet::from([i]),
                cert: vec![(i, Rat::from_integer(1.into()))],
            };
            row.canonicalize();
            row
        })
        .collect();
    let mut remaining: BTreeSet<usize> = eliminate.iter().copied().collect();
    let mut eliminated: BTreeSet<usize> = BTreeSet::new();
    let mut eliminated_count = 0usize;
    let mut removed = 0usize;

    while !remaining.is_empty() {
        // Greedy: the coordinate with the fewest positive×negative pairs.
        let coord = *remaining
            .iter()
            .min_by_key(|&&c| {
                let pos = rows.iter().filter(|r| r.ineq.coeffs[c].is_positive()).count();
                let neg = rows.iter().filter(|r| r.ineq.coeffs[c].is_negative()).count();
                (pos * neg, c)
            })
            .expect("nonempty remaining set");
        remaining.remove(&coord);
        eliminated.insert(coord);
        eliminated_count += 1;

        let mut zeros = Vec::new();
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for row in rows {
            if row.ineq.coeffs[coord].is_positive() {
                pos.push(row);
            } else if row.ineq.coeffs[coord].is_negative() {
                neg.push(row);
            } else {
                zeros.push(row);
            }
        }
        let candidate_count = zeros.len() + pos.len() * neg.len();
        if candidate_count > options.row_limit {
            return Err(FmError::RowLimit {
                coordinate: coord,
                candidate_rows: candidate_count,
            });
        }

        let mut candidates = zeros;
        for p in &pos {
            for n in &neg {
                let wp = -n.ineq.coeffs[coord].clone(); // = |pivot of n| > 0
                let wn = p.ineq.coeffs[coord].clone(); // = pivot of p > 0
                let coeffs: Vec<Rat> = (0..width)
                    .map(|c| &(&p.ineq.coeffs[c] * &wp) + &(&n.ineq.coeffs[c] * &wn))
                    .collect();
                debug_assert!(coeffs[coord].is_zero());
                let mut row = FmRow {
                    ineq: LinIneq::new(coeffs),
                    ancestors: p.ancestors.union(&n.ancestors).copied().collect(),
                    cert: merge_certs(&p.cert, &wp, &n.cert, &wn),
                };
                row.canonicalize();
                candidates.push(row);
            }
        }

        // Syntactic pruning: tautologies, duplicates, domination.
        let mut by_direction: BTreeMap<Vec<BigInt>, FmRow> = BTreeMap::new();
        let before = candidates.len();
        for row in candidates {
            if row.ineq.is_tautology() {
                continue;
            }
            let mut direction = row.ineq.coeffs.clone();
            direction[0] = Rat::zero();
            let mult = normalize_primitive(&mut direction);
            let key = primitive_integers(&direction);
            let scaled_const = row.ineq.constant() * &mult;
            match by_direction.get_mut(&key) {
                Some(existing) => {
                    let mut existing_dir = existing.ineq.coeffs.clone();
                    existing_dir[0] = Rat::zero();
                    let existing_mult = normalize_primitive(&mut existing_dir);
                    let existing_const = existing.ineq.constant() * &existing_mult;
                    let replace = scaled_const < existing_const
                        || (scaled_const == existing_const
                            && row.ancestors.len() < existing.ancestors.len());
                    if replace {
                        *existing = row;
                    }
                }
                None => {
                    by_direction.insert(key, row);
                }
            }
        }
        let mut pruned: Vec<FmRow> = by_direction.into_values().collect();

        // Imbert's ancestral bound.
        if options.imbert {
            pruned.retain(|r| r.ancestors.len() <= eliminated_count + 1);
        }
        removed += before - pruned.len();

        // Certified redundancy pass: facet test against the vertex set when
        // available, exact LP otherwise.
        if let Some(vertices) = &options.hull_vertices {
            let live: Vec<usize> = (1..width).filter(|c| !eliminated.contains(c)).collect();
            removed += facet_filter(&mut pruned, vertices, &live);
        } else if options.lp_prune {
            removed += lp_prune_rows(&mut pruned, width);
        }
        pruned.sort_by(|a, b| a.ineq.cmp(&b.ineq));
        rows = pruned;
    }

    let mut system_rows = Vec::with_capacity(rows.len());
    let mut certificates = Vec::with_capacity(rows.len());
    for row in rows {
        system_rows.push(row.ineq);
        certificates.push(row.cert);
    }
    Ok(FmResult {
        system: LinSystem::new(width, system_rows),
        certificates,
        removed_redundant: removed,
    })
}

/// Facet-only redundancy filter.  With `vertices` spanning the feasible
/// set, a row of an intermediate projection is irredundant exactly when it
/// is an implicit equality (tight on every vertex) or a facet — its tight
/// vertices span an affine subspace of dimension one below the projection's
/// own.  `live` lists the coordinates not yet eliminated (without the unit
/// coordinate), which is the space those dimensions are measured in.
/// Returns the number of rows removed.
fn facet_filter(rows: &mut Vec<FmRow>, vertices: &[Vec<Rat>], live: &[usize]) -> usize {
    assert!(!vertices.is_empty(), "facet filter needs a nonempty hull");
    let restricted: Vec<Vec<Rat>> = vertices
        .iter()
        .map(|v| live.iter().map(|&c| v[c].clone()).collect())
        .collect();
    let hull_dim = affine_dim(&restricted);
    let before = rows.len();
    rows.retain(|row| {
        let mut tight: Vec<Vec<Rat>> = Vec::new();
        for (v, rv) in vertices.iter().zip(&restricted) {
            let value = dot(&row.ineq.coeffs, v);
            debug_assert!(
                !value.is_negative(),
                "vertex escapes a derived halfspace: the hull precondition is broken"
            );
            if value.is_zero() {
                tight.push(rv.clone());
            }
        }
        if tight.len() == vertices.len() {
            return true; // implicit equality, needed to pin the affine hull
        }
        !tight.is_empty() && affine_dim(&tight) + 1 == hull_dim
    });
    before - rows.len()
}

/// Dimension of the affine hull of a nonempty point set (zero for a single
/// point).
fn affine_dim(points: &[Vec<Rat>]) -> usize {
    let base = &points[0];
    let diffs: Vec<Vec<Rat>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    rank(&diffs)
}

/// Exact-LP redundancy removal over working rows, preserving certificates.
/// Returns the number of rows removed.
fn lp_prune_rows(rows: &mut Vec<FmRow>, width: usize) -> usize {
    let columns: Vec<usize> = (1..width)
        .filter(|&c| rows.iter().any(|r| !r.ineq.coeffs[c].is_zero()))
        .collect();
    let to_lp = |r: &LinIneq| -> (Vec<Rat>, Rat) {
        (
            columns.iter().map(|&c| r.coeffs[c].clone()).collect(),
            r.constant().clone(),
        )
    };
    let mut witnesses: Vec<Vec<Rat>> = Vec::new();
    let mut removed = 0usize;
    let mut i = 0;
    while i < rows.len() {
        let (cand_coeffs, cand_const) = to_lp(&rows[i].ineq);
        let others: Vec<(Vec<Rat>, Rat)> = rows
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, r)| to_lp(&r.ineq))
            .collect();
        let witness_hit = witnesses.iter().any(|w| {
            (dot(&cand_coeffs, w) + cand_const.clone()).is_negative()
                && others
                    .iter()
                    .all(|(a, b)| !(dot(a, w) + b.clone()).is_negative())
        });
        if witness_hit {
            i += 1;
            continue;
        }
        match lp::minimize(&others, &cand_coeffs) {
            lp::LpOutcome::Optimal { value, point } => {
                if (&value + &cand_const).is_negative() {
                    witnesses.push(point);
                    i += 1;
                } else {
                    rows.remove(i);
                    removed += 1;
                }
            }
            lp::LpOutcome::Unbounded => {
                i += 1;
            }
            lp::LpOutcome::Infeasible => {
                rows.remove(i);
                removed += 1;
            }
        }
    }
    removed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::simplex_system;
    use crate::ratio::rat;

    fn ineq(coeffs: &[i64]) -> LinIneq {
        LinIneq::new(coeffs.iter().map(|&c| rat(c)).collect())
    }

    #[test]
    fn eliminates_a_middle_variable() {
        // 0 <= y <= x and x <= 1 project onto x in [0, 1]... eliminate y:
        // rows: y >= 0, x - y >= 0, 1 - x >= 0.
        let sys = LinSystem::new(
            3,
            vec![ineq(&[0, 0, 1]), ineq(&[0, 1, -1]), ineq(&[1, -1, 0])],
        );
        let got = fm_eliminate(&sys, &[2], &FmOptions::default()).unwrap();
        let keys = got.system.canonical_set();
        assert_eq!(keys.len(), 2);
        assert!(keys.contains(&ineq(&[0, 1, 0]).canonical_key())); // x >= 0
        assert!(keys.contains(&ineq(&[1, -1, 0]).canonical_key())); // x <= 1
    }

    #[test]
    fn certificates_replay_exactly() {
        let sys = LinSystem::new(
            3,
            vec![ineq(&[0, 2, 3]), ineq(&[1, 1, -2]), ineq(&[2, -1, 0])],
        );
        let got = fm_eliminate(&sys, &[2], &FmOptions::default()).unwrap();
        for (out_row, cert) in got.system.rows.iter().zip(&got.certificates) {
            let mut rebuilt = vec![rat(0); 3];
            for (idx, mult) in cert {
                assert!(!mult.is_negative(), "certificate multiplier negative");
                for c in 0..3 {
                    let add = mult * &sys.rows[*idx].coeffs[c];
                    rebuilt[c] = &rebuilt[c] + &add;
                }
            }
            assert_eq!(rebuilt, out_row.coeffs, "certificate mismatch");
        }
    }

    #[test]
    fn projection_of_a_square_to_a_segment() {
        // Unit square 0 <= x, y <= 1: eliminate y.
        let sys = LinSystem::new(
            3,
            vec![
                ineq(&[0, 1, 0]),
                ineq(&[1, -1, 0]),
                ineq(&[0, 0, 1]),
                ineq(&[1, 0, -1]),
            ],
        );
        let got = fm_eliminate(&sys, &[2], &FmOptions::default()).unwrap();
        let keys = got.system.canonical_set();
        assert_eq!(keys.len(), 2);
    }

    #[test]
    fn two_variable_simplex_projects_to_crossing_pairs() {
        // Eliminating one coordinate from the 2-variable outcome simplex
        // leaves the shadow of a 3-simplex: every crossing pair is a facet.
        let sys = simplex_system(2);
        // Eliminate the last correlator coordinate (the two-variable one).
        let got = fm_eliminate(&sys, &[3], &FmOptions::default()).unwrap();
        assert_eq!(got.system.rows.len(), 4);
        // The shadow in the (E_1, E_2) square is the full square: check the
        // four corner points satisfy the system.
        for (a, b) in [(1i64, 1i64), (1, -1), (-1, 1), (-1, -1)] {
            let m = vec![rat(1), rat(a), rat(b), rat(0)];
            assert!(got.system.contains(&m));
        }
    }

    #[test]
    fn vertex_backed_pruning_matches_the_lp_route() {
        use crate::moment::deterministic_moments;
        let sys = simplex_system(3);
        let vertices: Vec<Vec<Rat>> = (0..8).map(|o| deterministic_moments(3, o)).collect();
        let eliminate = [3usize, 5, 6];
        let lp_route = fm_eliminate(&sys, &eliminate, &FmOptions::default()).unwrap();
        let vertex_route = fm_eliminate(
            &sys,
            &eliminate,
            &FmOptions {
                hull_vertices: Some(vertices),
                ..FmOptions::default()
            },
        )
        .unwrap();
        assert_eq!(
            lp_route.system.canonical_set(),
            vertex_route.system.canonical_set()
        );
        assert!(!vertex_route.system.rows.is_empty());
    }

    #[test]
    fn row_limit_reports_the_offending_coordinate() {
        let sys = simplex_system(3);
        let err = fm_eliminate(
            &sys,
            &[7],
            &FmOptions {
                row_limit: 3,
                ..FmOptions::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, FmError::RowLimit { coordinate: 7, .. }));
    }

    #[test]
    fn eliminating_everything_leaves_nothing_or_tautologies() {
        let sys = LinSystem::new(2, vec![ineq(&[1, -1]), ineq(&[1, 1])]);
        let got = fm_eliminate(&sys, &[1], &FmOptions::default()).unwrap();
        // x <= 1 and x >= -1 combine to the tautology 2 >= 0, dropped.
        assert!(got.system.rows.is_empty());
    }

    #[test]
    fn infeasible_input_leaves_a_contradiction() {
        // x >= 1 and x <= 0.
        let sys = LinSystem::new(2, vec![ineq(&[-1, 1]), ineq(&[0, -1])]);
        let got = fm_eliminate(&sys, &[1], &FmOptions::default()).unwrap();
        assert_eq!(got.system.rows.len(), 1);
        assert!(got.system.rows[0].is_contradiction());
    }
}
