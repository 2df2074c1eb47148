//! Projection through extremal points (the vertex route).
//!
//! A projection of a polytope is the convex hull of its projected vertices,
//! so when the extremal points of the input are available — as they are for
//! the outcome simplex, whose vertices are the deterministic assignments —
//! projecting points and re-enumerating facets is often far cheaper than
//! eliminating coordinates one at a time.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use super::dd::facets_of_points;
use super::{LinIneq, LinSystem};
use crate::moment::Basis;
use crate::ratio::{rat, Rat};
use crate::scenario::Scenario;

/// Moment vectors of all deterministic assignments, restricted to a basis,
/// deduplicated and sorted.
///
/// Assignment `o` (one bit per measurement variable, in
/// [`crate::moment::measurement_variables`] order) has
/// `E_S = (-1)^{|S ∩ o|}` for every basis correlator `S`.
#[must_use]
pub fn scenario_vertices(scenario: &Scenario, basis: &Basis) -> Vec<Vec<Rat>> {
    let vars = crate::moment::measurement_variables(scenario);
    let var_index = |v: (usize, u8)| vars.iter().position(|&w| w == v).expect("known variable");
    let mut points: BTreeSet<Vec<Rat>> = BTreeSet::new();
    for o in 0..1usize << vars.len() {
        let point: Vec<Rat> = basis
            .correlators()
            .iter()
            .map(|c| {
                let parity = c
                    .vars()
                    .iter()
                    .filter(|&&v| o >> var_index(v) & 1 == 1)
                    .count();
                if parity % 2 == 0 {
                    rat(1)
                } else {
                    rat(-1)
                }
            })
            .collect();
        points.insert(point);
    }
    points.into_iter().collect()
}

/// Result of a vertex-route projection.
#[derive(Clone, Debug)]
pub struct ProjectionResult {
    /// Facet inequalities of the projected hull, re-embedded in the full
    /// width (non-kept coordinates are structurally zero).
    pub inequalities: LinSystem,
    /// Affine-hull equalities of the projected hull, same embedding.
    pub equalities: Vec<LinIneq>,
}

/// Projects a point set onto the kept coordinates and enumerates the facets
/// of the projected convex hull.
///
/// `keep` must contain coordinate 0 (the unit).  The output is re-embedded
/// into the original width so that downstream passes keep stable indices.
///
/// # Panics
/// Panics if `keep` omits the unit coordinate or points disagree in width.
#[must_use]
pub fn project_via_vertices(
    points: &[Vec<Rat>],
    keep: &[usize],
    width: usize,
) -> ProjectionResult {
    assert!(keep.contains(&0), "projection must keep the unit coordinate");
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    let compressed: Vec<Vec<Rat>> = {
        let mut set: BTreeSet<Vec<Rat>> = BTreeSet::new();
        for p in points {
            assert_eq!(p.len(), width, "projection point width mismatch");
            set.insert(keep.iter().map(|&c| p[c].clone()).collect());
        }
        set.into_iter().collect()
    };
    let enumeration = facets_of_points(&compressed, keep.len());
    let embed = |row: &LinIneq| -> LinIneq {
        let mut coeffs = vec![Rat::zero(); width];
        for (j, &c) in keep.iter().enumerate() {
            coeffs[c] = row.coeffs[j].clone();
        }
        LinIneq::new(coeffs)
    };
    ProjectionResult {
        inequalities: LinSystem::new(
            width,
            enumeration.facets.iter().map(embed).collect(),
        ),
        equalities: enumeration.equalities.iter().map(embed).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moment::{build_basis, deterministic_moments, Restriction};
    use crate::scenario::parse_scenario;

    #[test]
    fn square_projection_of_the_two_variable_simplex() {
        // Project the 2-variable outcome simplex onto the single-variable
        // coordinates: the shadow is the square |E_1| <= 1, |E_2| <= 1.
        let points: Vec<Vec<Rat>> = (0..4).map(|o| deterministic_moments(2, o)).collect();
        let got = project_via_vertices(&points, &[0, 1, 2], 4);
        assert!(got.equalities.is_empty());
        assert_eq!(got.inequalities.rows.len(), 4);
        for row in &got.inequalities.rows {
            assert!(row.coeffs[3].is_zero());
        }
    }

    #[test]
    fn deterministic_vertices_match_walsh_characters_on_full_basis() {
        let s = parse_scenario("[parties]\nA settings=2\nB settings=2\n[sources]\nL -> A,B\n")
            .unwrap();
        let basis = build_basis(&s, &Restriction::Full).unwrap();
        let verts = scenario_vertices(&s, &basis);
        assert_eq!(verts.len(), 16);
        for o in 0..16 {
            assert!(verts.contains(&deterministic_moments(4, o)));
        }
    }

    #[test]
    fn restricted_basis_vertices_deduplicate() {
        // On the restricted basis of the three-party line, distinct global
        // assignments can project to the same moment vector.
        let s = parse_scenario(
            "[parties]\nA settings=2\nB settings=2\nC settings=2\n\
             [sources]\nL1 -> A,B\nL2 -> B,C\n",
        )
        .unwrap();
        let basis = build_basis(&s, &Restriction::FullCorrelatorsOnly).unwrap();
        let verts = scenario_vertices(&s, &basis);
        assert_eq!(basis.len(), 12);
        // 64 assignments fold into fewer distinct restricted vectors.
        assert!(verts.len() < 64);
        for v in &verts {
            assert_eq!(v[0], rat(1));
        }
    }
}
