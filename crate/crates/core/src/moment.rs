//! Correlator bases, moment vectors, and coordinate classification.
//!
//! For a scenario with binary-outcome measurements, every classical model
//! assigns a definite value to each measurement variable once the hidden
//! variables are fixed, so *every* product of distinct measurement
//! variables — including products that mix several settings of one party —
//! has a well-defined expectation.  With outcomes written as signs
//! (outcome `o ∈ {0,1}` enters products as `(-1)^o`), the expectation of
//! the product over a variable set `S` is the correlator `E_S`.
//!
//! The *full basis* indexes all `2^n` subsets of the `n` measurement
//! variables; deterministic assignments then correspond to the Walsh
//! characters, and the linear map between outcome probabilities and
//! correlators is the Hadamard transform implemented here.  Restricted
//! bases keep the unit, the full-length correlators (one setting per
//! party), and the block products needed to express independence
//! constraints.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::ratio::{rat, ratio, Rat};
use crate::scenario::Scenario;

/// A product of distinct measurement variables, sorted ascending.
///
/// Each variable is a `(party index, setting)` pair; the empty product is
/// the unit correlator with constant value 1.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Correlator(Vec<(usize, u8)>);

impl Correlator {
    /// The unit correlator.
    #[must_use]
    pub fn unit() -> Self {
        Correlator(Vec::new())
    }

    /// Builds a correlator from measurement variables.
    ///
    /// # Panics
    /// Panics if a variable repeats (a squared sign is the unit and must be
    /// simplified by the caller).
    #[must_use]
    pub fn new(mut vars: Vec<(usize, u8)>) -> Self {
        vars.sort_unstable();
        let len = vars.len();
        vars.dedup();
        assert_eq!(len, vars.len(), "repeated measurement variable");
        Correlator(vars)
    }

    /// The measurement variables of this correlator.
    #[must_use]
    pub fn vars(&self) -> &[(usize, u8)] {
        &self.0
    }

    /// Whether this is the unit correlator.
    #[must_use]
    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    /// The set of parties whose variables appear.
    #[must_use]
    pub fn parties(&self) -> BTreeSet<usize> {
        self.0.iter().map(|&(p, _)| p).collect()
    }

    /// Whether the correlator uses exactly one setting of every party.
    #[must_use]
    pub fn is_full_length(&self, scenario: &Scenario) -> bool {
        self.0.len() == scenario.parties.len()
            && self.parties().len() == scenario.parties.len()
    }

    /// Union with a disjoint correlator.
    ///
    /// # Panics
    /// Panics if the variable sets overlap.
    #[must_use]
    pub fn union(&self, other: &Correlator) -> Correlator {
        let mut vars = self.0.clone();
        vars.extend_from_slice(&other.0);
        Correlator::new(vars)
    }

    /// Renders as `E[A0 B1]` (the unit renders as `E[]`).
    #[must_use]
    pub fn render(&self, scenario: &Scenario) -> String {
        let mut inner = String::new();
        for (i, &(party, setting)) in self.0.iter().enumerate() {
            if i > 0 {
                inner.push(' ');
            }
            inner.push_str(&scenario.parties[party].label);
            inner.push_str(&format!("{setting}"));
        }
        format!("E[{inner}]")
    }

    /// Parses `E[A0 B1]` against a scenario (inverse of [`Self::render`]).
    #[must_use]
    pub fn parse(text: &str, scenario: &Scenario) -> Option<Correlator> {
        let inner = text.trim().strip_prefix("E[")?.strip_suffix(']')?;
        let mut vars = Vec::new();
        for token in inner.split_whitespace() {
            let split = token.find(|c: char| c.is_ascii_digit())?;
            let (label, digits) = token.split_at(split);
            let party = scenario.party_index(label)?;
            let setting: u8 = digits.parse().ok()?;
            if setting >= scenario.parties[party].settings {
                return None;
            }
            vars.push((party, setting));
        }
        vars.sort_unstable();
        let mut deduped = vars.clone();
        deduped.dedup();
        if deduped.len() != vars.len() {
            return None;
        }
        Some(Correlator(vars))
    }
}

/// An ordered correlator basis with constant-time index lookup.
///
/// Index 0 is always the unit correlator; a moment vector over the basis
/// stores the unit coordinate explicitly, pinned to 1, so that inequality
/// rows can treat the constant term as just another coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    correlators: Vec<Correlator>,
    index: BTreeMap<Correlator, usize>,
}

impl Basis {
    /// Builds a basis from a list whose first element must be the unit.
    ///
    /// # Panics
    /// Panics on duplicates or if the unit is missing from position 0.
    #[must_use]
    pub fn from_correlators(correlators: Vec<Correlator>) -> Self {
        assert!(
            correlators.first().is_some_and(Correlator::is_unit),
            "basis must start with the unit correlator"
        );
        let mut index = BTreeMap::new();
        for (i, c) in correlators.iter().enumerate() {
            let previous = index.insert(c.clone(), i);
            assert!(previous.is_none(), "duplicate correlator in basis");
        }
        Basis { correlators, index }
    }

    /// Number of basis correlators (the moment-space dimension, unit
    /// included).
    #[must_use]
    pub fn len(&self) -> usize {
        self.correlators.len()
    }

    /// Whether the basis is empty (never true for a valid basis).
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.correlators.is_empty()
    }

    /// The correlator at a basis index.
    #[must_use]
    pub fn correlator(&self, i: usize) -> &Correlator {
        &self.correlators[i]
    }

    /// All correlators in basis order.
    #[must_use]
    pub fn correlators(&self) -> &[Correlator] {
        &self.correlators
    }

    /// Index of a correlator, if present.
    #[must_use]
    pub fn position(&self, c: &Correlator) -> Option<usize> {
        self.index.get(c).copied()
    }
}

/// Basis restriction policies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Restriction {
    /// All `2^n` correlators over the scenario's measurement variables.
    Full,
    /// Unit, full-length correlators, and the block products required by
    /// the independence constraints.
    FullCorrelatorsOnly,
    /// An explicit correlator list (the unit is added if absent).
    Custom(Vec<Correlator>),
}

/// Moment-space construction failure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MomentError {
    /// The scenario's measurement-variable count exceeds what full-basis
    /// enumeration supports.
    TooManyVariables(usize),
    /// A referenced correlator is absent from the basis.
    MissingCorrelator(String),
    /// The scenario admits no joint-level conditional independence, so no
    /// factorization constraints exist.
    NoJointLevelIndependence,
}

impl core::fmt::Display for MomentError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            MomentError::TooManyVariables(n) => {
                write!(f, "scenario has {n} measurement variables; full-basis work is limited to 20")
            }
            MomentError::MissingCorrelator(c) => {
                write!(f, "constraint references correlator outside basis: {c}")
            }
            MomentError::NoJointLevelIndependence => {
                write!(f, "no joint-level conditional independence in this scenario")
            }
        }
    }
}

/// Global index of each measurement variable: party-major, then setting.
#[must_use]
pub fn measurement_variables(scenario: &Scenario) -> Vec<(usize, u8)> {
    let mut vars = Vec::new();
    for (p, party) in scenario.parties.iter().enumerate() {
        for s in 0..party.settings {
            vars.push((p, s));
        }
    }
    vars
}

/// Builds the correlator corresponding to a bitmask over
/// [`measurement_variables`].
#[must_use]
fn correlator_of_mask(vars: &[(usize, u8)], mask: usize) -> Correlator {
    let chosen: Vec<(usize, u8)> = vars
        .iter()
        .enumerate()
        .filter(|&(i, _)| mask >> i & 1 == 1)
        .map(|(_, &v)| v)
        .collect();
    Correlator::new(chosen)
}

/// Builds a moment basis for the scenario under the given restriction.
///
/// For [`Restriction::Full`] the basis is ordered by variable-subset
/// bitmask (so index 0 is the unit and transforms can index directly).
/// For [`Restriction::FullCorrelatorsOnly`] the basis is the unit, all
/// full-length correlators, and for every maximal d-separated bipartition
/// `(S, T)` the pairwise block products: `E_U`, `E_V`, and `E_{U∪V}` for
/// every 2-subset `U` of the measurement variables on the `S` side and
/// 2-subset `V` on the `T` side.  (When a block carries exactly two
/// variables this coincides with the product over the whole block.)
///
/// # Errors
/// Fails if the full basis would exceed `2^20` entries.
pub fn build_basis(scenario: &Scenario, restriction: &Restriction) -> Result<Basis, MomentError> {
    let vars = measurement_variables(scenario);
    match restriction {
        Restriction::Full => {
            if vars.len() > 20 {
                return Err(MomentError::TooManyVariables(vars.len()));
            }
            let correlators = (0..1usize << vars.len())
                .map(|mask| correlator_of_mask(&vars, mask))
                .collect();
            Ok(Basis::from_correlators(correlators))
        }
        Restriction::FullCorrelatorsOnly => {
            let mut list = vec![Correlator::unit()];
            let mut seen: BTreeSet<Correlator> = list.iter().cloned().collect();
            // Full-length correlators: one setting per party, in mixed-radix
            // order over settings.
            let mut push = |c: Correlator, list: &mut Vec<Correlator>| {
                if seen.insert(c.clone()) {
                    list.push(c);
                }
            };
            let counts: Vec<u8> = scenario.parties.iter().map(|p| p.settings).collect();
            let total: usize = counts.iter().map(|&k| k as usize).product();
            for code in 0..total {
                let mut c = code;
                let mut chosen = Vec::new();
                for (party, &k) in counts.iter().enumerate() {
                    chosen.push((party, (c % k as usize) as u8));
                    c /= k as usize;
                }
                push(Correlator::new(chosen), &mut list);
            }
            // Block products for every maximal bipartition.
            for (s_side, t_side) in scenario.derive_independencies() {
                let u_subsets = block_pair_subsets(scenario, &s_side);
                let v_subsets = block_pair_subsets(scenario, &t_side);
                for u in &u_subsets {
                    push(u.clone(), &mut list);
                }
                for v in &v_subsets {
                    push(v.clone(), &mut list);
                }
                for u in &u_subsets {
                    for v in &v_subsets {
                        push(u.union(v), &mut list);
                    }
                }
            }
            Ok(Basis::from_correlators(list))
        }
        Restriction::Custom(correlators) => {
            let mut list = vec![Correlator::unit()];
            let mut seen: BTreeSet<Correlator> = list.iter().cloned().collect();
            for c in correlators {
                if seen.insert(c.clone()) {
                    list.push(c.clone());
                }
            }
            Ok(Basis::from_correlators(list))
        }
    }
}

/// All 2-subsets of the measurement variables on one side of a bipartition
/// (or the single 1-subset if the side carries only one variable).
fn block_pair_subsets(scenario: &Scenario, side: &BTreeSet<usize>) -> Vec<Correlator> {
    let vars: Vec<(usize, u8)> = measurement_variables(scenario)
        .into_iter()
        .filter(|(p, _)| side.contains(p))
        .collect();
    if vars.len() == 1 {
        return vec![Correlator::new(vars)];
    }
    let mut out = Vec::new();
    for i in 0..vars.len() {
        for j in (i + 1)..vars.len() {
            out.push(Correlator::new(vec![vars[i], vars[j]]));
        }
    }
    out
}

/// In-place Walsh–Hadamard transform (the self-inverse-up-to-`2^n` kernel
/// shared by both coordinate changes).
fn walsh_in_place(data: &mut [Rat]) {
    let n = data.len();
    assert!(n.is_power_of_two(), "walsh transform needs a power of two");
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(h * 2) {
            for i in block..block + h {
                let a = data[i].clone();
                let b = data[i + h].clone();
                data[i] = &a + &b;
                data[i + h] = &a - &b;
            }
        }
        h *= 2;
    }
}

/// Converts outcome probabilities to full-basis correlators.
///
/// `probabilities[o]` is the probability of the joint outcome bitstring `o`
/// over all measurement variables (bit `i` = outcome of variable `i`), and
/// the result is indexed by variable-subset bitmask: `E_S = Σ_o (-1)^{|S∩o|} p(o)`.
#[must_use]
pub fn prob_to_corr(probabilities: &[Rat]) -> Vec<Rat> {
    let mut data = probabilities.to_vec();
    walsh_in_place(&mut data);
    data
}

/// Converts full-basis correlators to outcome probabilities:
/// `p(o) = 2^{-n} Σ_S (-1)^{|S∩o|} E_S`.
#[must_use]
pub fn corr_to_prob(correlators: &[Rat]) -> Vec<Rat> {
    let mut data = correlators.to_vec();
    walsh_in_place(&mut data);
    let scale = ratio(1, data.len() as i64);
    for x in &mut data {
        *x = &*x * &scale;
    }
    data
}

/// The full-basis moment vector of the deterministic assignment `outcome`
/// (bit `i` = outcome of measurement variable `i`): `E_S = (-1)^{|S∩o|}`.
#[must_use]
pub fn deterministic_moments(n_vars: usize, outcome: usize) -> Vec<Rat> {
    (0..1usize << n_vars)
        .map(|mask| {
            if (mask & outcome).count_ones() % 2 == 0 {
                rat(1)
            } else {
                rat(-1)
            }
        })
        .collect()
}

/// One independence constraint in correlator form:
/// `E[left] = E[factor1] * E[factor2]` (indices into a basis).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorConstraint {
    /// Basis index of the joint product correlator.
    pub left: usize,
    /// Basis index of the first factor (side `S` of the bipartition).
    pub factor1: usize,
    /// Basis index of the second factor (side `T`).
    pub factor2: usize,
    /// Which bipartition (index into `derive_independencies`) it came from.
    pub bipartition: usize,
}

/// Builds the correlator-form independence constraints for every maximal
/// bipartition, at the pairwise block-product level matching
/// [`build_basis`].
///
/// # Errors
/// Fails with [`MomentError::NoJointLevelIndependence`] when the scenario
/// has no d-separated bipartition, and with
/// [`MomentError::MissingCorrelator`] when the basis lacks a required
/// product (e.g. a custom basis that omits a block product).
pub fn independence_constraints(
    scenario: &Scenario,
    basis: &Basis,
) -> Result<Vec<FactorConstraint>, MomentError> {
    let bipartitions = scenario.derive_independencies();
    if bipartitions.is_empty() {
        return Err(MomentError::NoJointLevelIndependence);
    }
    let mut out = Vec::new();
    for (bi, (s_side, t_side)) in bipartitions.iter().enumerate() {
        for u in block_pair_subsets(scenario, s_side) {
            for v in block_pair_subsets(scenario, t_side) {
                let joint = u.union(&v);
                let left = lookup(basis, &joint, scenario)?;
                let factor1 = lookup(basis, &u, scenario)?;
                let factor2 = lookup(basis, &v, scenario)?;
                out.push(FactorConstraint {
                    left,
                    factor1,
                    factor2,
                    bipartition: bi,
                });
            }
        }
    }
    Ok(out)
}

fn lookup(basis: &Basis, c: &Correlator, scenario: &Scenario) -> Result<usize, MomentError> {
    basis
        .position(c)
        .ok_or_else(|| MomentError::MissingCorrelator(c.render(scenario)))
}

/// How each basis coordinate participates in the derivation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentPartition {
    /// Unit plus every full-length correlator: the reported observables.
    pub observables: Vec<usize>,
    /// Constraint factor coordinates promoted to symbolic parameters (the
    /// smaller factor side of each bipartition, ties broken toward the
    /// lexicographically first block).  These coordinates disappear from
    /// the linear system and reappear as polynomial symbols.
    pub parameters: Vec<usize>,
    /// Joint product coordinates replaced by `parameter * factor`
    /// substitutions before elimination.
    pub substituted: Vec<usize>,
    /// Non-parameter constraint factors that stay as coordinates for the
    /// parametric elimination stage.
    pub parametric_coords: Vec<usize>,
    /// Everything else apart from observables: eliminated by plain linear
    /// Fourier–Motzkin before any parameter enters.
    pub eliminable_linear: Vec<usize>,
}

/// Classifies basis coordinates against a constraint set.
///
/// Coordinates appearing in constraint products (factors and joint
/// products) are "observable-with-no-outcome" quantities that need
/// nonlinear treatment; among them the parameters are chosen per
/// bipartition as the factor side with *fewer* distinct factor
/// coordinates, ties broken toward the side whose sorted party-index
/// sequence is lexicographically smaller.  The remaining non-observable
/// coordinates are eliminable by plain linear projection.
#[must_use]
pub fn classify_components(
    scenario: &Scenario,
    basis: &Basis,
    constraints: &[FactorConstraint],
) -> ComponentPartition {
    let mut observables = Vec::new();
    for (i, c) in basis.correlators().iter().enumerate() {
        if c.is_unit() || c.is_full_length(scenario) {
            observables.push(i);
        }
    }
    let obs_set: BTreeSet<usize> = observables.iter().copied().collect();

    let mut parameters: BTreeSet<usize> = BTreeSet::new();
    let mut substituted: BTreeSet<usize> = BTreeSet::new();
    let mut factors: BTreeSet<usize> = BTreeSet::new();
    let n_bipartitions = constraints
        .iter()
        .map(|c| c.bipartition + 1)
        .max()
        .unwrap_or(0);
    for bi in 0..n_bipartitions {
        let mut side1: BTreeSet<usize> = BTreeSet::new();
        let mut side2: BTreeSet<usize> = BTreeSet::new();
        for c in constraints.iter().filter(|c| c.bipartition == bi) {
            substituted.insert(c.left);
            side1.insert(c.factor1);
            side2.insert(c.factor2);
        }
        // Restrict to non-observable factors when deciding the parameter
        // side: observables never become parameters.
        let free1: BTreeSet<usize> = side1.difference(&obs_set).copied().collect();
        let free2: BTreeSet<usize> = side2.difference(&obs_set).copied().collect();
        let pick_first = match free1.len().cmp(&free2.len()) {
            core::cmp::Ordering::Less => true,
            core::cmp::Ordering::Greater => false,
            core::cmp::Ordering::Equal => {
                // Tie: lexicographically first block.  Factor1 always comes
                // from side S, which `derive_independencies` orders first.
                true
            }
        };
        let chosen = if pick_first { &free1 } else { &free2 };
        parameters.extend(chosen.iter().copied());
        factors.extend(free1.iter().copied());
        factors.extend(free2.iter().copied());
    }

    let parametric_coords: Vec<usize> = factors
        .difference(&parameters)
        .copied()
        .filter(|i| !substituted.contains(i))
        .collect();
    let mut eliminable_linear = Vec::new();
    for i in 0..basis.len() {
        if !obs_set.contains(&i)
            && !parameters.contains(&i)
            && !substituted.contains(&i)
            && !parametric_coords.contains(&i)
        {
            eliminable_linear.push(i);
        }
    }
    ComponentPartition {
        observables,
        parameters: parameters.into_iter().collect(),
        substituted: substituted.into_iter().collect(),
        parametric_coords,
        eliminable_linear,
    }
}

/// Resolves a declared functional to basis coefficients (constant first).
///
/// # Errors
/// Fails when a referenced correlator is outside the basis.
pub fn functional_coefficients(
    scenario: &Scenario,
    basis: &Basis,
    name: &str,
) -> Result<Vec<Rat>, MomentError> {
    let functional = scenario
        .functional(name)
        .ok_or_else(|| MomentError::MissingCorrelator(name.to_string()))?;
    let mut coeffs = vec![Rat::zero(); basis.len()];
    for term in &functional.terms {
        let c = Correlator::new(term.vars.clone());
        let idx = lookup(basis, &c, scenario)?;
        coeffs[idx] = &coeffs[idx] + &term.coeff;
    }
    Ok(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    fn chsh() -> Scenario {
        parse_scenario(
            "[parties]\nA settings=2\nB settings=2\n[sources]\nL -> A,B\n",
        )
        .unwrap()
    }

    fn line_three() -> Scenario {
        parse_scenario(
            "[parties]\nA settings=2\nB settings=2\nC settings=2\n\
             [sources]\nL1 -> A,B\nL2 -> B,C\n",
        )
        .unwrap()
    }

    fn line_three_wide() -> Scenario {
        parse_scenario(
            "[parties]\nA settings=3\nB settings=2\nC settings=3\n\
             [sources]\nL1 -> A,B\nL2 -> B,C\n",
        )
        .unwrap()
    }

    fn four_party() -> Scenario {
        parse_scenario(
            "[parties]\nA settings=2\nB settings=2\nC settings=2\nD settings=2\n\
             [sources]\nL1 -> A,B,C\nL2 -> A,C,D\n",
        )
        .unwrap()
    }

    #[test]
    fn full_basis_dimension_is_two_to_the_variables() {
        let s = line_three();
        let basis = build_basis(&s, &Restriction::Full).unwrap();
        assert_eq!(basis.len(), 64);
        assert!(basis.correlator(0).is_unit());
        // The basis is bitmask-ordered: index 1 = first variable alone.
        assert_eq!(basis.correlator(1).vars(), &[(0, 0)]);
        assert_eq!(basis.correlator(3).vars(), &[(0, 0), (0, 1)]);
    }

    #[test]
    fn restricted_basis_sizes_match_the_three_networks() {
        // Line of three parties, two settings each: unit + 8 full
        // correlators + A-pair + C-pair + their product.
        let basis = build_basis(&line_three(), &Restriction::FullCorrelatorsOnly).unwrap();
        assert_eq!(basis.len(), 12);

        // Wide line (3,2,3 settings): unit + 18 full correlators + 3
        // A-pairs + 3 C-pairs + 9 products.
        let basis = build_basis(&line_three_wide(), &Restriction::FullCorrelatorsOnly).unwrap();
        assert_eq!(basis.len(), 34);

        // Four parties, ends separated: unit + 16 full correlators +
        // B-pair + D-pair + product.
        let basis = build_basis(&four_party(), &Restriction::FullCorrelatorsOnly).unwrap();
        assert_eq!(basis.len(), 20);
    }

    #[test]
    fn walsh_transforms_are_mutually_inverse() {
        // The uniform distribution on 2 variables has only the unit moment.
        let p = vec![ratio(1, 4), ratio(1, 4), ratio(1, 4), ratio(1, 4)];
        let e = prob_to_corr(&p);
        assert_eq!(e, vec![rat(1), rat(0), rat(0), rat(0)]);
        assert_eq!(corr_to_prob(&e), p);

        // A deterministic assignment round-trips too.
        let e = deterministic_moments(3, 0b101);
        let p = corr_to_prob(&e);
        for (o, prob) in p.iter().enumerate() {
            assert_eq!(*prob, if o == 0b101 { rat(1) } else { rat(0) });
        }
        assert_eq!(prob_to_corr(&p), e);
    }

    #[test]
    fn deterministic_moments_are_walsh_characters() {
        let e = deterministic_moments(2, 0b01);
        // E_{} = 1, E_{v0} = -1, E_{v1} = +1, E_{v0 v1} = -1.
        assert_eq!(e, vec![rat(1), rat(-1), rat(1), rat(-1)]);
    }

    #[test]
    fn constraints_for_the_line_network() {
        let s = line_three();
        let basis = build_basis(&s, &Restriction::FullCorrelatorsOnly).unwrap();
        let cons = independence_constraints(&s, &basis).unwrap();
        assert_eq!(cons.len(), 1);
        let c = &cons[0];
        assert_eq!(basis.correlator(c.factor1).vars(), &[(0, 0), (0, 1)]);
        assert_eq!(basis.correlator(c.factor2).vars(), &[(2, 0), (2, 1)]);
        assert_eq!(
            basis.correlator(c.left).vars(),
            &[(0, 0), (0, 1), (2, 0), (2, 1)]
        );
    }

    #[test]
    fn constraint_count_scales_with_block_pairs() {
        let s = line_three_wide();
        let basis = build_basis(&s, &Restriction::FullCorrelatorsOnly).unwrap();
        let cons = independence_constraints(&s, &basis).unwrap();
        assert_eq!(cons.len(), 9);
    }

    #[test]
    fn no_constraints_without_independence() {
        let s = chsh();
        let basis = build_basis(&s, &Restriction::Full).unwrap();
        assert_eq!(
            independence_constraints(&s, &basis),
            Err(MomentError::NoJointLevelIndependence)
        );
    }

    #[test]
    fn classification_splits_line_network_coordinates() {
        let s = line_three();
        let basis = build_basis(&s, &Restriction::FullCorrelatorsOnly).unwrap();
        let cons = independence_constraints(&s, &basis).unwrap();
        let parts = classify_components(&s, &basis, &cons);
        assert_eq!(parts.observables.len(), 9); // unit + 8 triples
        assert_eq!(parts.parameters.len(), 1);
        assert_eq!(
            basis.correlator(parts.parameters[0]).vars(),
            &[(0, 0), (0, 1)]
        );
        assert_eq!(parts.substituted.len(), 1);
        assert_eq!(parts.parametric_coords.len(), 1);
        assert_eq!(
            basis.correlator(parts.parametric_coords[0]).vars(),
            &[(2, 0), (2, 1)]
        );
        assert!(parts.eliminable_linear.is_empty());
    }

    #[test]
    fn classification_of_the_wide_line_picks_first_block_pairs() {
        let s = line_three_wide();
        let basis = build_basis(&s, &Restriction::FullCorrelatorsOnly).unwrap();
        let cons = independence_constraints(&s, &basis).unwrap();
        let parts = classify_components(&s, &basis, &cons);
        assert_eq!(parts.parameters.len(), 3);
        for &p in &parts.parameters {
            // All three parameters are products of two first-party settings.
            let parties = basis.correlator(p).parties();
            assert_eq!(parties.len(), 1);
            assert!(parties.contains(&0));
        }
        assert_eq!(parts.parametric_coords.len(), 3);
        assert_eq!(parts.substituted.len(), 9);
    }

    #[test]
    fn classification_on_the_full_basis_marks_linear_eliminables() {
        let s = line_three();
        let basis = build_basis(&s, &Restriction::Full).unwrap();
        let cons = independence_constraints(&s, &basis).unwrap();
        let parts = classify_components(&s, &basis, &cons);
        assert_eq!(parts.observables.len(), 9);
        assert_eq!(parts.parameters.len(), 1);
        assert_eq!(parts.substituted.len(), 1);
        assert_eq!(parts.parametric_coords.len(), 1);
        // Everything else among the 64 coordinates is linear-eliminable.
        assert_eq!(parts.eliminable_linear.len(), 64 - 9 - 3);
    }

    #[test]
    fn functional_resolution_builds_coefficient_rows() {
        let s = parse_scenario(
            "[parties]\nA settings=2\nB settings=2\n[sources]\nL -> A,B\n\
             [functionals]\nS = E[A0 B0] + E[A0 B1] + E[A1 B0] - E[A1 B1]\n",
        )
        .unwrap();
        let basis = build_basis(&s, &Restriction::Full).unwrap();
        let coeffs = functional_coefficients(&s, &basis, "S").unwrap();
        let idx = |text: &str| basis.position(&Correlator::parse(text, &s).unwrap()).unwrap();
        assert_eq!(coeffs[idx("E[A0 B0]")], rat(1));
        assert_eq!(coeffs[idx("E[A1 B1]")], rat(-1));
        assert_eq!(coeffs[0], rat(0));
    }

    #[test]
    fn correlator_rendering_round_trips() {
        let s = line_three();
        let c = Correlator::new(vec![(0, 1), (2, 0)]);
        assert_eq!(c.render(&s), "E[A1 C0]");
        assert_eq!(Correlator::parse("E[A1 C0]", &s).unwrap(), c);
        assert_eq!(Correlator::unit().render(&s), "E[]");
        assert_eq!(Correlator::parse("E[]", &s).unwrap(), Correlator::unit());
        assert!(Correlator::parse("E[A5]", &s).is_none());
    }
}
