//! The double description method: exact enumeration of extreme rays,
//! vertices, and facets.
//!
//! Everything reduces to one engine: given a cone `{x : A x >= 0}`, find
//! its lineality space and the extreme rays of the pointed quotient.  Rows
//! are inserted incrementally; at each insertion, rays on the violating
//! side are replaced by combinations of adjacent ray pairs, with adjacency
//! decided combinatorially from tight-row sets.  Vertex enumeration treats
//! the unit coordinate as the homogenization variable, and facet
//! enumeration runs the engine on the polar side (rows = points).

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use super::{LinIneq, LinSystem};
use crate::linalg::{kernel_basis, rank, rref, solve_linear};
use crate::ratio::{normalize_primitive, Rat};

/// Extreme-ray enumeration result.
#[derive(Clone, Debug)]
pub struct DdResult {
    /// Extreme rays of the pointed quotient, in primitive-integer scale,
    /// sorted.  Together with `lineality` they generate the cone.
    pub rays: Vec<Vec<Rat>>,
    /// Basis of the lineality space `{x : A x = 0}`.
    pub lineality: Vec<Vec<Rat>>,
}

/// Dense bitset over processed row indices.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(capacity: usize) -> Self {
        Bits(vec![0; capacity.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn intersect(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }
    fn is_superset(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & b == *b)
    }
}

struct Ray {
    vec: Vec<Rat>,
    tight: Bits,
}

/// Enumerates the extreme rays and lineality space of `{x : rows . x >= 0}`.
///
/// # Panics
/// Panics if any row's width disagrees with `width`.
#[must_use]
pub fn extreme_rays(rows: &[Vec<Rat>], width: usize) -> DdResult {
    for r in rows {
        assert_eq!(r.len(), width, "dd: row width mismatch");
    }
    // Lineality space and quotient reduction.
    let lineality = kernel_basis(rows, width);
    if !lineality.is_empty() {
        let mut kernel_rref: Vec<Vec<Rat>> = lineality.clone();
        let pivots = rref(&mut kernel_rref);
        let pivot_set: BTreeSet<usize> = pivots.into_iter().collect();
        let keep: Vec<usize> = (0..width).filter(|c| !pivot_set.contains(c)).collect();
        let reduced_rows: Vec<Vec<Rat>> = rows
            .iter()
            .map(|r| keep.iter().map(|&c| r[c].clone()).collect())
            .collect();
        let reduced = extreme_rays(&reduced_rows, keep.len());
        debug_assert!(reduced.lineality.is_empty());
        let rays = reduced
            .rays
            .into_iter()
            .map(|ray| {
                let mut full = vec![Rat::zero(); width];
                for (j, &c) in keep.iter().enumerate() {
                    full[c] = ray[j].clone();
                }
                full
            })
            .collect();
        return DdResult { rays, lineality };
    }

    if width == 0 {
        return DdResult {
            rays: Vec::new(),
            lineality: Vec::new(),
        };
    }

    // Pointed cone: pick `width` independent rows as the initial simplicial
    // cone, then insert the rest.
    let mut chosen: Vec<usize> = Vec::new();
    let mut chosen_rows: Vec<Vec<Rat>> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        if chosen.len() == width {
            break;
        }
        chosen_rows.push(row.clone());
        if rank(&chosen_rows) == chosen_rows.len() {
            chosen.push(i);
        } else {
            chosen_rows.pop();
        }
    }
    assert_eq!(
        chosen.len(),
        width,
        "trivial lineality implies full row rank"
    );

    let n_rows = rows.len();
    let mut rays: Vec<Ray> = Vec::with_capacity(width);
    for j in 0..width {
        let mut e = vec![Rat::zero(); width];
        e[j] = Rat::from_integer(1.into());
        let v = solve_linear(&chosen_rows, &e).expect("independent rows are solvable");
        let mut tight = Bits::new(n_rows);
        for (k, &row_idx) in chosen.iter().enumerate() {
            if k != j {
                tight.set(row_idx);
            }
        }
        let mut vec = v;
        let _ = normalize_primitive(&mut vec);
        rays.push(Ray { vec, tight });
    }

    let chosen_set: BTreeSet<usize> = chosen.iter().copied().collect();
    for (i, row) in rows.iter().enumerate() {
        if chosen_set.contains(&i) {
            continue;
        }
        let values: Vec<Rat> = rays.iter().map(|r| crate::linalg::dot(row, &r.vec)).collect();
        let mut keep: Vec<Ray> = Vec::new();
        let mut pos_idx = Vec::new();
        let mut neg_idx = Vec::new();
        for (k, v) in values.iter().enumerate() {
            if v.is_positive() {
                pos_idx.push(k);
            } else if v.is_negative() {
                neg_idx.push(k);
            }
        }
        // Combinations of adjacent (positive, negative) pairs.
        let mut newcomers: Vec<Ray> = Vec::new();
        for &p in &pos_idx {
            for &n in &neg_idx {
                let common = rays[p].tight.intersect(&rays[n].tight);
                let adjacent = !rays.iter().enumerate().any(|(k, other)| {
                    k != p && k != n && other.tight.is_superset(&common)
                });
                if !adjacent {
                    continue;
                }
                let wp = -values[n].clone();
                let wn = values[p].clone();
                let mut vec: Vec<Rat> = (0..width)
                    .map(|c| &(&rays[p].vec[c] * &wp) + &(&rays[n].vec[c] * &wn))
                    .collect();
                let _ = normalize_primitive(&mut vec);
                let mut tight = common.clone();
                tight.set(i);
                newcomers.push(Ray { vec, tight });
            }
        }
        for (k, ray) in rays.into_iter().enumerate() {
            if values[k].is_negative() {
                continue;
            }
            let mut ray = ray;
            if values[k].is_zero() {
                ray.tight.set(i);
            }
            keep.push(ray);
        }
        keep.extend(newcomers);
        rays = keep;
    }

    let mut out: Vec<Vec<Rat>> = rays.into_iter().map(|r| r.vec).collect();
    out.sort();
    out.dedup();
    DdResult {
        rays: out,
        lineality,
    }
}

/// Vertex enumeration result for a polyhedron `{m : rows . m >= 0, m0 = 1}`.
#[derive(Clone, Debug)]
pub struct VertexEnumeration {
    /// Vertices, as full moment vectors with unit coordinate 1.
    pub vertices: Vec<Vec<Rat>>,
    /// Extreme recession rays (unit coordinate 0); empty for polytopes.
    pub recession_rays: Vec<Vec<Rat>>,
    /// Recession lines (unit coordinate 0); empty for pointed polyhedra.
    pub recession_lines: Vec<Vec<Rat>>,
}

/// Enumerates the vertices of the polyhedron described by a system, treating
/// coordinate 0 as the homogenization variable.
#[must_use]
pub fn enumerate_vertices(system: &LinSystem) -> VertexEnumeration {
    let width = system.width;
    let mut rows: Vec<Vec<Rat>> = system.rows.iter().map(|r| r.coeffs.clone()).collect();
    let mut t_row = vec![Rat::zero(); width];
    t_row[0] = Rat::from_integer(1.into());
    rows.push(t_row);
    let dd = extreme_rays(&rows, width);
    let mut vertices = Vec::new();
    let mut recession_rays = Vec::new();
    for ray in dd.rays {
        if ray[0].is_zero() {
            recession_rays.push(ray);
        } else {
            let scale = ray[0].recip();
            vertices.push(ray.iter().map(|x| x * &scale).collect());
        }
    }
    vertices.sort();
    VertexEnumeration {
        vertices,
        recession_rays,
        recession_lines: dd.lineality,
    }
}

/// Facet enumeration result for a point set.
#[derive(Clone, Debug)]
pub struct FacetEnumeration {
    /// Facet inequalities of the convex hull (relative to its affine hull).
    pub facets: Vec<LinIneq>,
    /// Affine-hull equalities: rows `e` with `e . p = 0` for every point.
    pub equalities: Vec<LinIneq>,
}

/// Enumerates the facets of the convex hull of `points` (each given as a
/// full moment vector with unit coordinate 1).
///
/// The polar-side cone `{y : p . y >= 0 for all p}` has the facet rows of
/// the hull as its extreme rays and the affine-hull equalities as its
/// lineality space.
#[must_use]
pub fn facets_of_points(points: &[Vec<Rat>], width: usize) -> FacetEnumeration {
    let dd = extreme_rays(points, width);
    FacetEnumeration {
        facets: dd.rays.into_iter().map(LinIneq::new).collect(),
        equalities: dd.lineality.into_iter().map(LinIneq::new).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::simplex_system;
    use crate::moment::deterministic_moments;
    use crate::ratio::rat;

    fn rows_of(entries: &[&[i64]]) -> Vec<Vec<Rat>> {
        entries
            .iter()
            .map(|r| r.iter().map(|&x| rat(x)).collect())
            .collect()
    }

    #[test]
    fn quadrant_rays_are_the_axes() {
        let rows = rows_of(&[&[1, 0], &[0, 1]]);
        let got = extreme_rays(&rows, 2);
        assert!(got.lineality.is_empty());
        assert_eq!(got.rays, rows_of(&[&[0, 1], &[1, 0]]));
    }

    #[test]
    fn halfplane_has_lineality() {
        let rows = rows_of(&[&[1, 0]]);
        let got = extreme_rays(&rows, 2);
        assert_eq!(got.lineality.len(), 1);
        assert!(got.lineality[0][0].is_zero());
        // Quotient is a half-line: one ray (x direction).
        assert_eq!(got.rays.len(), 1);
        assert!(got.rays[0][0].is_positive());
    }

    #[test]
    fn ice_cream_cone_cross_section() {
        // x >= 0, x >= y, x >= -y: pointed cone with rays (1, 1), (1, -1).
        let rows = rows_of(&[&[1, 0], &[1, -1], &[1, 1]]);
        let got = extreme_rays(&rows, 2);
        assert_eq!(got.rays, rows_of(&[&[1, -1], &[1, 1]]));
    }

    #[test]
    fn vertex_enumeration_of_a_square() {
        // |x| <= 1, |y| <= 1 over width 3 with unit coordinate.
        let sys = LinSystem::new(
            3,
            vec![
                LinIneq::new(vec![rat(1), rat(1), rat(0)]),
                LinIneq::new(vec![rat(1), rat(-1), rat(0)]),
                LinIneq::new(vec![rat(1), rat(0), rat(1)]),
                LinIneq::new(vec![rat(1), rat(0), rat(-1)]),
            ],
        );
        let got = enumerate_vertices(&sys);
        assert!(got.recession_rays.is_empty());
        assert!(got.recession_lines.is_empty());
        assert_eq!(got.vertices.len(), 4);
        assert!(got.vertices.contains(&vec![rat(1), rat(-1), rat(1)]));
    }

    #[test]
    fn unbounded_polyhedra_report_recession() {
        // x >= 0 in one variable: vertex at 0, recession ray +x.
        let sys = LinSystem::new(2, vec![LinIneq::new(vec![rat(0), rat(1)])]);
        let got = enumerate_vertices(&sys);
        assert_eq!(got.vertices.len(), 1);
        assert_eq!(got.recession_rays.len(), 1);
    }

    #[test]
    fn facets_of_a_triangle() {
        let points = rows_of(&[&[1, 0, 0], &[1, 1, 0], &[1, 0, 1]]);
        let got = facets_of_points(&points, 3);
        assert!(got.equalities.is_empty());
        assert_eq!(got.facets.len(), 3);
        for f in &got.facets {
            // Every facet must be tight at exactly two of the three points.
            let tight = points
                .iter()
                .filter(|p| f.value_at(p).is_zero())
                .count();
            assert_eq!(tight, 2);
            for p in &points {
                assert!(!f.value_at(p).is_negative());
            }
        }
    }

    #[test]
    fn facets_of_a_lower_dimensional_segment() {
        // Two points in the plane: hull is a segment with one equality.
        let points = rows_of(&[&[1, 0, 0], &[1, 1, 1]]);
        let got = facets_of_points(&points, 3);
        assert_eq!(got.equalities.len(), 1);
        assert_eq!(got.facets.len(), 2);
    }

    #[test]
    fn simplex_system_vertices_are_the_characters() {
        let sys = simplex_system(2);
        let got = enumerate_vertices(&sys);
        assert_eq!(got.vertices.len(), 4);
        for o in 0..4 {
            assert!(got.vertices.contains(&deterministic_moments(2, o)));
        }
        assert!(got.recession_rays.is_empty());
    }

    #[test]
    fn round_trip_hull_of_simplex_vertices() {
        // Facets of the deterministic characters recover the simplex rows.
        let points: Vec<Vec<Rat>> = (0..8).map(|o| deterministic_moments(3, o)).collect();
        let got = facets_of_points(&points, 8);
        assert!(got.equalities.is_empty());
        let expected = simplex_system(3).canonical_set();
        let produced: BTreeSet<_> = got
            .facets
            .iter()
            .map(super::super::LinIneq::canonical_key)
            .collect();
        assert_eq!(produced, expected);
    }
}
