//! Exact linear inequality systems over moment coordinates.
//!
//! An inequality is stored as one dense coefficient row `c` with the fixed
//! sense `c . m >= 0`, where `m` is a moment vector whose coordinate 0 is
//! the unit (pinned to 1) — so `c[0]` is the constant term and no separate
//! right-hand side exists.  Canonical form scales every row by the unique
//! positive rational making the entries integers with collective gcd 1,
//! which makes syntactic deduplication exact.
//!
//! Submodules provide the exact LP solver ([`lp`]), Fourier–Motzkin
//! elimination with derivation certificates ([`fm`]), the double
//! description method for ray/vertex/facet enumeration ([`dd`]), and the
//! vertex-route projection ([`project`]).

pub mod dd;
pub mod fm;
pub mod lp;
pub mod project;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::moment::{deterministic_moments, Basis};
use crate::ratio::{normalize_primitive, primitive_integers, render_rat, Rat};
use crate::scenario::Scenario;

/// One linear inequality `coeffs . m >= 0` over a moment space whose
/// coordinate 0 is the unit.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct LinIneq {
    /// Dense coefficient row; index 0 is the constant term.
    pub coeffs: Vec<Rat>,
}

impl LinIneq {
    /// Builds an inequality from a dense coefficient row.
    #[must_use]
    pub fn new(coeffs: Vec<Rat>) -> Self {
        LinIneq { coeffs }
    }

    /// The constant term (coefficient of the unit coordinate).
    #[must_use]
    pub fn constant(&self) -> &Rat {
        &self.coeffs[0]
    }

    /// Evaluates the left-hand side at a moment vector (`m[0]` must be 1).
    #[must_use]
    pub fn value_at(&self, m: &[Rat]) -> Rat {
        crate::linalg::dot(&self.coeffs, m)
    }

    /// Scales to canonical primitive-integer form in place.
    pub fn canonicalize(&mut self) {
        let _ = normalize_primitive(&mut self.coeffs);
    }

    /// Canonical integer key used for syntactic deduplication.
    #[must_use]
    pub fn canonical_key(&self) -> Vec<BigInt> {
        primitive_integers(&self.coeffs)
    }

    /// Whether every non-constant coefficient vanishes.
    #[must_use]
    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().skip(1).all(Zero::is_zero)
    }

    /// Whether the row is a tautology (`c >= 0` with `c >= 0`).
    #[must_use]
    pub fn is_tautology(&self) -> bool {
        self.is_constant() && !self.constant().is_negative()
    }

    /// Whether the row is unsatisfiable on its own (`c >= 0` with `c < 0`).
    #[must_use]
    pub fn is_contradiction(&self) -> bool {
        self.is_constant() && self.constant().is_negative()
    }

    /// Renders as e.g. `1 - E[A0 B0] + 2*E[A1 B1] >= 0`.
    #[must_use]
    pub fn render(&self, basis: &Basis, scenario: &Scenario) -> String {
        let mut out = String::new();
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let magnitude = c.abs();
            if first {
                if c.is_negative() {
                    out.push('-');
                }
                first = false;
            } else {
                out.push_str(if c.is_negative() { " - " } else { " + " });
            }
            let is_one = magnitude == Rat::from_integer(1.into());
            if i == 0 {
                out.push_str(&render_rat(&magnitude));
            } else {
                if !is_one {
                    out.push_str(&render_rat(&magnitude));
                    out.push('*');
                }
                out.push_str(&basis.correlator(i).render(scenario));
            }
        }
        if first {
            out.push('0');
        }
        out.push_str(" >= 0");
        out
    }
}

/// A finite system of [`LinIneq`] rows sharing one width.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinSystem {
    /// Common coefficient-row length (moment-space dimension).
    pub width: usize,
    /// The rows.
    pub rows: Vec<LinIneq>,
}

impl LinSystem {
    /// Builds a system, checking row widths.
    ///
    /// # Panics
    /// Panics if any row's width disagrees.
    #[must_use]
    pub fn new(width: usize, rows: Vec<LinIneq>) -> Self {
        for r in &rows {
            assert_eq!(r.coeffs.len(), width, "system width mismatch");
        }
        LinSystem { width, rows }
    }

    /// Whether a moment vector satisfies every row.
    #[must_use]
    pub fn contains(&self, m: &[Rat]) -> bool {
        self.rows.iter().all(|r| !r.value_at(m).is_negative())
    }

    /// The canonical key set of the rows (for exact set comparison).
    #[must_use]
    pub fn canonical_set(&self) -> BTreeSet<Vec<BigInt>> {
        self.rows.iter().map(LinIneq::canonical_key).collect()
    }

    /// Columns (excluding the unit) carrying a nonzero coefficient in some
    /// row.
    #[must_use]
    pub fn live_columns(&self) -> Vec<usize> {
        (1..self.width)
            .filter(|&c| self.rows.iter().any(|r| !r.coeffs[c].is_zero()))
            .collect()
    }

    /// Converts a row into LP form over the given columns:
    /// `(coefficients, constant)`.
    #[must_use]
    pub fn lp_row(&self, row: &LinIneq, columns: &[usize]) -> (Vec<Rat>, Rat) {
        (
            columns.iter().map(|&c| row.coeffs[c].clone()).collect(),
            row.constant().clone(),
        )
    }
}

/// The outcome-simplex system for `n_vars` binary measurement variables
/// over the full correlator basis (width `2^n_vars`).
///
/// Row `o` expresses `2^n p(o) >= 0` in correlator coordinates, i.e.
/// `sum_S chi_S(o) E_S >= 0` with the unit coordinate carrying the
/// constant 1.  Every row of the system is the moment vector of the
/// deterministic assignment `o` itself (the Walsh character), and a
/// deterministic moment vector saturates every row except its own, where
/// the value is `2^n`.
#[must_use]
pub fn simplex_system(n_vars: usize) -> LinSystem {
    let width = 1usize << n_vars;
    let rows = (0..width)
        .map(|o| LinIneq::new(deterministic_moments(n_vars, o)))
        .collect();
    LinSystem::new(width, rows)
}

/// Result of certified redundancy removal.
#[derive(Clone, Debug)]
pub struct RemoveRedundantResult {
    /// The minimal equivalent subsystem, rows in canonical form.
    pub system: LinSystem,
    /// How many input rows were discarded.
    pub removed: usize,
}

/// Removes redundant rows, certifying each removal by an exact-rational
/// feasibility subproblem: a row `r` is dropped exactly when the minimum of
/// its left-hand side over the remaining rows' solution set is nonnegative
/// (or that set is empty).  The result is irredundant, so a second
/// application is the identity.
///
/// Cheap passes run first: canonical scaling, removal of tautologies and
/// exact duplicates, and domination (equal direction, weaker constant).
/// Violation witnesses from LP solves are cached to skip later solves.
#[must_use]
pub fn remove_redundant(system: &LinSystem) -> RemoveRedundantResult {
    let width = system.width;
    let mut canonical: Vec<LinIneq> = Vec::new();
    let mut removed = 0usize;

    // Dominance: group rows by the primitive form of their non-constant
    // part and keep only the strongest constant in each group.
    let mut strongest: BTreeMap<Vec<BigInt>, LinIneq> = BTreeMap::new();
    for row in &system.rows {
        let mut row = row.clone();
        row.canonicalize();
        if row.is_tautology() {
            removed += 1;
            continue;
        }
        let mut direction = row.coeffs.clone();
        direction[0] = Rat::zero();
        let mult = normalize_primitive(&mut direction);
        let key = primitive_integers(&direction);
        // Comparable constant under a common positive scaling of the
        // direction part.
        let scaled_const = row.constant() * &mult;
        match strongest.get_mut(&key) {
            Some(existing) => {
                let mut existing_dir = existing.coeffs.clone();
                existing_dir[0] = Rat::zero();
                let existing_mult = normalize_primitive(&mut existing_dir);
                let existing_const = existing.constant() * &existing_mult;
                if scaled_const < existing_const {
                    *existing = row;
                }
                removed += 1;
            }
            None => {
                strongest.insert(key, row);
            }
        }
    }
    canonical.extend(strongest.into_values());
    canonical.sort();

    // LP pass with witness caching.
    let columns: Vec<usize> = {
        let probe = LinSystem::new(width, canonical.clone());
        probe.live_columns()
    };
    let mut kept: Vec<LinIneq> = canonical;
    let mut witnesses: Vec<Vec<Rat>> = Vec::new();
    let mut i = 0;
    while i < kept.len() {
        let candidate = kept[i].clone();
        let (cand_coeffs, cand_const) = {
            let sys = LinSystem::new(width, vec![candidate.clone()]);
            sys.lp_row(&candidate, &columns)
        };
        let value_of = |point: &[Rat]| -> Rat {
            crate::linalg::dot(&cand_coeffs, point) + cand_const.clone()
        };
        // A cached witness proves irredundancy if it satisfies every other
        // kept row but violates the candidate.
        let other_rows: Vec<(Vec<Rat>, Rat)> = kept
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, r)| {
                let sys = LinSystem::new(width, vec![r.clone()]);
                sys.lp_row(r, &columns)
            })
            .collect();
        let witness_hit = witnesses.iter().any(|w| {
            value_of(w).is_negative()
                && other_rows
                    .iter()
                    .all(|(a, b)| !(crate::linalg::dot(a, w) + b.clone()).is_negative())
        });
        if witness_hit {
            i += 1;
            continue;
        }
        match lp::minimize(&other_rows, &cand_coeffs) {
            lp::LpOutcome::Optimal { value, point } => {
                if (&value + &cand_const).is_negative() {
                    witnesses.push(point);
                    i += 1;
                } else {
                    kept.remove(i);
                    removed += 1;
                }
            }
            lp::LpOutcome::Unbounded => {
                // The candidate's direction is unbounded below over the
                // others: certainly irredundant.
                i += 1;
            }
            lp::LpOutcome::Infeasible => {
                // The other rows alone are already unsatisfiable, so the
                // candidate is vacuously implied.
                kept.remove(i);
                removed += 1;
            }
        }
    }

    RemoveRedundantResult {
        system: LinSystem::new(width, kept),
        removed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::{rat, ratio};

    fn ineq(coeffs: &[i64]) -> LinIneq {
        LinIneq::new(coeffs.iter().map(|&c| rat(c)).collect())
    }

    #[test]
    fn simplex_system_rows_are_characters() {
        let sys = simplex_system(2);
        assert_eq!(sys.rows.len(), 4);
        assert_eq!(sys.width, 4);
        // Every deterministic vertex saturates all rows but its own.
        for o in 0..4usize {
            let vertex = deterministic_moments(2, o);
            for (i, row) in sys.rows.iter().enumerate() {
                let v = row.value_at(&vertex);
                if i == o {
                    assert_eq!(v, rat(4));
                } else {
                    assert_eq!(v, rat(0));
                }
            }
        }
    }

    #[test]
    fn canonical_form_scales_to_primitive_integers() {
        let mut r = LinIneq::new(vec![ratio(1, 2), ratio(-3, 2), rat(0)]);
        r.canonicalize();
        assert_eq!(r.coeffs, vec![rat(1), rat(-3), rat(0)]);
    }

    #[test]
    fn dominated_rows_are_dropped_without_lp() {
        // x <= 1 and x <= 2 (as -x + c >= 0) plus scaled duplicate.
        let sys = LinSystem::new(
            2,
            vec![ineq(&[1, -1]), ineq(&[2, -1]), ineq(&[4, -2]), ineq(&[1, 1])],
        );
        let got = remove_redundant(&sys);
        assert_eq!(got.system.rows.len(), 2);
        assert_eq!(got.removed, 2);
        assert!(got.system.canonical_set().contains(&ineq(&[1, -1]).canonical_key()));
    }

    #[test]
    fn lp_certifies_sum_implication() {
        // x <= 1, y <= 1 imply x + y <= 2.
        let sys = LinSystem::new(
            3,
            vec![
                ineq(&[1, -1, 0]),
                ineq(&[1, 0, -1]),
                ineq(&[2, -1, -1]),
            ],
        );
        let got = remove_redundant(&sys);
        assert_eq!(got.system.rows.len(), 2);
        // And the pair alone is irredundant: nothing more to remove.
        let again = remove_redundant(&got.system);
        assert_eq!(again.removed, 0);
        assert_eq!(again.system.canonical_set(), got.system.canonical_set());
    }

    #[test]
    fn equality_pairs_survive() {
        // x >= 0 and x <= 0 describe a point; both sides are needed.
        let sys = LinSystem::new(2, vec![ineq(&[0, 1]), ineq(&[0, -1])]);
        let got = remove_redundant(&sys);
        assert_eq!(got.system.rows.len(), 2);
    }

    #[test]
    fn tautologies_vanish() {
        let sys = LinSystem::new(2, vec![ineq(&[3, 0]), ineq(&[0, 1])]);
        let got = remove_redundant(&sys);
        assert_eq!(got.system.rows.len(), 1);
    }

    #[test]
    fn simplex_system_is_irredundant() {
        let sys = simplex_system(2);
        let got = remove_redundant(&sys);
        assert_eq!(got.removed, 0);
        assert_eq!(got.system.canonical_set(), sys.canonical_set());
    }

    #[test]
    fn rendering_reads_naturally() {
        use crate::moment::{build_basis, Restriction};
        use crate::scenario::parse_scenario;
        let s = parse_scenario("[parties]\nA settings=2\nB settings=2\n[sources]\nL -> A,B\n")
            .unwrap();
        let basis = build_basis(&s, &Restriction::Full).unwrap();
        // width 16; put a constant and two correlator terms.
        let mut coeffs = vec![rat(0); 16];
        coeffs[0] = rat(2);
        let a0b0 = basis
            .position(&crate::moment::Correlator::parse("E[A0 B0]", &s).unwrap())
            .unwrap();
        let a1b1 = basis
            .position(&crate::moment::Correlator::parse("E[A1 B1]", &s).unwrap())
            .unwrap();
        coeffs[a0b0] = rat(-1);
        coeffs[a1b1] = ratio(1, 2);
        let r = LinIneq::new(coeffs);
        assert_eq!(
            r.render(&basis, &s),
            "2 - E[A0 B0] + 1/2*E[A1 B1] >= 0"
        );
    }
}
