//! Observable-level nonsignalling analysis: constraint generation for the
//! nonsignalling polytope, factorization checks for the network's
//! conditional independencies, and exact vertex enumeration of the
//! generalized nonsignalling set once fixed marginals make its nonlinear
//! constraints affine.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::{vec, vec::Vec};

use num_traits::{One, Signed, Zero};

use crate::linalg::{kernel_basis, rank, solve_linear};
use crate::linear::dd::enumerate_vertices;
use crate::linear::{LinIneq, LinSystem};
use crate::ratio::{rat, render_rat, Rat};
use crate::scenario::Scenario;

/// A full observable behavior: one exact probability per joint outcome,
/// conditioned on each joint setting choice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservableDistribution {
    /// `probs[s][o]` where `s` is the mixed-radix settings index (party 0
    /// most significant) and `o` packs the binary outcomes (party 0 in the
    /// highest bit).
    pub probs: Vec<Vec<Rat>>,
}

/// Failure modes of the nonsignalling layer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NsError {
    /// The distribution's shape disagrees with the scenario.
    BadShape(String),
    /// The scenario or request exceeds the exact-enumeration size limit.
    SizeLimit(usize),
    /// The scenario's wiring implies no conditional independence to check.
    NoIndependence,
    /// A marginal fix is malformed or outside `[0, 1]`.
    BadMarginal(String),
    /// The fixed marginals admit no distribution at all.
    InfeasibleMarginals,
    /// An independence constraint stays nonlinear under the given fixes.
    NotLinearizable(String),
}

impl core::fmt::Display for NsError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            NsError::BadShape(d) => write!(f, "distribution does not match the scenario: {d}"),
            NsError::SizeLimit(n) => {
                write!(f, "behavior space of size {n} exceeds the enumeration limit")
            }
            NsError::NoIndependence => {
                write!(f, "the wiring implies no conditional independence between parties")
            }
            NsError::BadMarginal(d) => write!(f, "invalid marginal fix: {d}"),
            NsError::InfeasibleMarginals => {
                write!(f, "no distribution satisfies the fixed marginals")
            }
            NsError::NotLinearizable(d) => write!(
                f,
                "independence constraint stays nonlinear under the given fixes: {d}"
            ),
        }
    }
}

/// Largest behavior-space size (settings × outcomes) accepted by the
/// constraint generator.
const CONSTRAINT_SIZE_LIMIT: usize = 4096;
/// Largest behavior-space size accepted by exact vertex enumeration.
const ENUMERATION_SIZE_LIMIT: usize = 256;

/// Number of joint setting choices.
#[must_use]
pub fn settings_count(scenario: &Scenario) -> usize {
    scenario
        .parties
        .iter()
        .map(|p| usize::from(p.settings))
        .product()
}

/// Number of joint outcomes (binary per party).
#[must_use]
pub fn outcomes_count(scenario: &Scenario) -> usize {
    1 << scenario.parties.len()
}

/// Mixed-radix settings index of a per-party setting tuple.
#[must_use]
pub fn settings_index(scenario: &Scenario, settings: &[u8]) -> usize {
    let mut idx = 0usize;
    for (p, &x) in settings.iter().enumerate() {
        idx = idx * usize::from(scenario.parties[p].settings) + usize::from(x);
    }
    idx
}

/// Decodes a settings index back into the per-party tuple.
#[must_use]
pub fn settings_tuple(scenario: &Scenario, mut index: usize) -> Vec<u8> {
    let mut out = vec![0u8; scenario.parties.len()];
    for p in (0..scenario.parties.len()).rev() {
        let s = usize::from(scenario.parties[p].settings);
        out[p] = (index % s) as u8;
        index /= s;
    }
    out
}

/// Packed outcome index of a per-party outcome-bit tuple.
#[must_use]
pub fn outcome_index(parties: usize, outcomes: &[u8]) -> usize {
    let mut idx = 0usize;
    for &o in &outcomes[..parties] {
        idx = (idx << 1) | usize::from(o);
    }
    idx
}

/// Decodes an outcome index back into per-party bits.
#[must_use]
pub fn outcome_tuple(parties: usize, index: usize) -> Vec<u8> {
    (0..parties)
        .map(|p| ((index >> (parties - 1 - p)) & 1) as u8)
        .collect()
}

impl ObservableDistribution {
    /// An all-zero table of the right shape for a scenario.
    #[must_use]
    pub fn zero(scenario: &Scenario) -> Self {
        ObservableDistribution {
            probs: vec![vec![Rat::zero(); outcomes_count(scenario)]; settings_count(scenario)],
        }
    }

    /// Checks the table shape against the scenario.
    ///
    /// # Errors
    /// [`NsError::BadShape`] with the offending dimension.
    pub fn validate_shape(&self, scenario: &Scenario) -> Result<(), NsError> {
        let s = settings_count(scenario);
        let o = outcomes_count(scenario);
        if self.probs.len() != s {
            return Err(NsError::BadShape(format!(
                "{} setting rows, expected {s}",
                self.probs.len()
            )));
        }
        for (i, row) in self.probs.iter().enumerate() {
            if row.len() != o {
                return Err(NsError::BadShape(format!(
                    "setting row {i} has {} outcomes, expected {o}",
                    row.len()
                )));
            }
        }
        Ok(())
    }

    /// Probability of a joint outcome tuple under a joint setting tuple.
    #[must_use]
    pub fn get(&self, scenario: &Scenario, settings: &[u8], outcomes: &[u8]) -> &Rat {
        &self.probs[settings_index(scenario, settings)]
            [outcome_index(scenario.parties.len(), outcomes)]
    }

    /// Marginal probability of the outcome bits of a party subset under a
    /// full settings tuple: the sum over the complement's outcomes.
    #[must_use]
    pub fn marginal(
        &self,
        scenario: &Scenario,
        subset: &BTreeSet<usize>,
        settings: &[u8],
        outcomes: &[(usize, u8)],
    ) -> Rat {
        let n = scenario.parties.len();
        let s = settings_index(scenario, settings);
        let mut acc = Rat::zero();
        for o in 0..outcomes_count(scenario) {
            let tuple = outcome_tuple(n, o);
            if outcomes
                .iter()
                .all(|&(p, bit)| subset.contains(&p) && tuple[p] == bit)
            {
                acc += &self.probs[s][o];
            }
        }
        acc
    }
}

/// Sense of one linear constraint row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NsSense {
    /// `coeffs · p = rhs`.
    Eq,
    /// `coeffs · p >= rhs`.
    Ge,
}

/// One linear constraint on the flattened behavior vector (index
/// `settings_index * outcomes_count + outcome_index`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NsConstraint {
    /// Sparse coefficients on behavior entries.
    pub coeffs: Vec<(usize, Rat)>,
    /// Right-hand side.
    pub rhs: Rat,
    /// Constraint sense.
    pub sense: NsSense,
    /// Human-readable meaning.
    pub description: String,
}

impl NsConstraint {
    /// Evaluates the left-hand side on a flattened behavior vector.
    #[must_use]
    pub fn value(&self, flat: &[Rat]) -> Rat {
        let mut acc = Rat::zero();
        for (i, c) in &self.coeffs {
            acc += &(c * &flat[*i]);
        }
        acc
    }

    /// Whether a flattened behavior satisfies this constraint exactly.
    #[must_use]
    pub fn holds(&self, flat: &[Rat]) -> bool {
        let v = self.value(flat);
        match self.sense {
            NsSense::Eq => v == self.rhs,
            NsSense::Ge => v >= self.rhs,
        }
    }
}

fn flat_index(scenario: &Scenario, s: usize, o: usize) -> usize {
    s * outcomes_count(scenario) + o
}

fn render_settings(scenario: &Scenario, settings: &[u8]) -> String {
    let mut out = String::new();
    for (p, &x) in settings.iter().enumerate() {
        if p > 0 {
            out.push(' ');
        }
        out.push_str(&format!("{}{}", scenario.parties[p].label, x));
    }
    out
}

fn render_outcomes(outcomes: &[u8]) -> String {
    let mut out = String::new();
    for &o in outcomes {
        out.push_str(if o == 0 { "0" } else { "1" });
    }
    out
}

fn render_subset(scenario: &Scenario, subset: &BTreeSet<usize>) -> String {
    let mut out = String::new();
    for (i, &p) in subset.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&scenario.parties[p].label);
    }
    out
}

/// Sparse coefficients of the marginal of `subset` at outcome bits
/// `outcomes` under full settings tuple `settings`.
fn marginal_coeffs(
    scenario: &Scenario,
    subset: &BTreeSet<usize>,
    settings: &[u8],
    outcomes: &[(usize, u8)],
) -> Vec<(usize, Rat)> {
    let n = scenario.parties.len();
    let s = settings_index(scenario, settings);
    let mut coeffs = Vec::new();
    for o in 0..outcomes_count(scenario) {
        let tuple = outcome_tuple(n, o);
        if outcomes.iter().all(|&(p, bit)| tuple[p] == bit) {
            coeffs.push((flat_index(scenario, s, o), rat(1)));
        }
    }
    let _ = subset;
    coeffs
}

/// All outcome-bit assignments of a party subset, as sorted
/// `(party, bit)` lists.
fn subset_outcomes(subset: &BTreeSet<usize>) -> Vec<Vec<(usize, u8)>> {
    let parties: Vec<usize> = subset.iter().copied().collect();
    let mut out = Vec::with_capacity(1 << parties.len());
    for mask in 0..(1usize << parties.len()) {
        out.push(
            parties
                .iter()
                .enumerate()
                .map(|(i, &p)| (p, ((mask >> (parties.len() - 1 - i)) & 1) as u8))
                .collect(),
        );
    }
    out
}

/// All full settings tuples that agree with `partial` on its keys and are
/// zero elsewhere except for the enumerated completion parties.
fn completions(
    scenario: &Scenario,
    fixed: &[(usize, u8)],
) -> Vec<Vec<u8>> {
    let n = scenario.parties.len();
    let free: Vec<usize> = (0..n)
        .filter(|p| !fixed.iter().any(|&(q, _)| q == *p))
        .collect();
    let mut out = Vec::new();
    let total: usize = free
        .iter()
        .map(|&p| usize::from(scenario.parties[p].settings))
        .product();
    for mut rest in 0..total {
        let mut tuple = vec![0u8; n];
        for &(p, x) in fixed {
            tuple[p] = x;
        }
        for &p in free.iter().rev() {
            let s = usize::from(scenario.parties[p].settings);
            tuple[p] = (rest % s) as u8;
            rest /= s;
        }
        out.push(tuple);
    }
    out
}

/// All settings assignments of a party subset.
fn subset_settings(scenario: &Scenario, subset: &BTreeSet<usize>) -> Vec<Vec<(usize, u8)>> {
    let parties: Vec<usize> = subset.iter().copied().collect();
    let total: usize = parties
        .iter()
        .map(|&p| usize::from(scenario.parties[p].settings))
        .product();
    let mut out = Vec::with_capacity(total);
    for mut rest in 0..total {
        let mut assign = Vec::with_capacity(parties.len());
        for &p in parties.iter().rev() {
            let s = usize::from(scenario.parties[p].settings);
            assign.push((p, (rest % s) as u8));
            rest /= s;
        }
        assign.reverse();
        out.push(assign);
    }
    out
}

/// The linear nonsignalling constraints of a scenario: positivity of every
/// behavior entry, normalization under every joint setting, and, for every
/// proper nonempty party subset, independence of its marginal from the
/// complement's settings.
///
/// # Errors
/// [`NsError::SizeLimit`] beyond the constraint-generation limit.
pub fn ns_constraints(scenario: &Scenario) -> Result<Vec<NsConstraint>, NsError> {
    let s_count = settings_count(scenario);
    let o_count = outcomes_count(scenario);
    let size = s_count * o_count;
    if size > CONSTRAINT_SIZE_LIMIT {
        return Err(NsError::SizeLimit(size));
    }
    let n = scenario.parties.len();
    let mut out = Vec::new();
    for s in 0..s_count {
        let tuple = settings_tuple(scenario, s);
        out.push(NsConstraint {
            coeffs: (0..o_count).map(|o| (flat_index(scenario, s, o), rat(1))).collect(),
            rhs: rat(1),
            sense: NsSense::Eq,
            description: format!("normalization at {}", render_settings(scenario, &tuple)),
        });
    }
    // Marginal consistency: for each proper nonempty subset, the marginal
    // under any settings completion matches the all-zero completion.
    for mask in 1..((1usize << n) - 1) {
        let subset: BTreeSet<usize> = (0..n).filter(|p| (mask >> p) & 1 == 1).collect();
        for setting in subset_settings(scenario, &subset) {
            let all = completions(scenario, &setting);
            let reference = &all[0];
            for other in &all[1..] {
                for outcomes in subset_outcomes(&subset) {
                    let mut coeffs = marginal_coeffs(scenario, &subset, other, &outcomes);
                    for (i, c) in marginal_coeffs(scenario, &subset, reference, &outcomes) {
                        coeffs.push((i, -c));
                    }
                    let bits: Vec<u8> = outcomes.iter().map(|&(_, b)| b).collect();
                    out.push(NsConstraint {
                        coeffs,
                        rhs: Rat::zero(),
                        sense: NsSense::Eq,
                        description: format!(
                            "marginal of {{{}}} at outcomes {} independent of the \
                             complement: {} vs {}",
                            render_subset(scenario, &subset),
                            render_outcomes(&bits),
                            render_settings(scenario, other),
                            render_settings(scenario, reference),
                        ),
                    });
                }
            }
        }
    }
    for s in 0..s_count {
        let tuple = settings_tuple(scenario, s);
        for o in 0..o_count {
            out.push(NsConstraint {
                coeffs: vec![(flat_index(scenario, s, o), rat(1))],
                rhs: Rat::zero(),
                sense: NsSense::Ge,
                description: format!(
                    "positivity at {} outcomes {}",
                    render_settings(scenario, &tuple),
                    render_outcomes(&outcome_tuple(n, o)),
                ),
            });
        }
    }
    Ok(out)
}

/// Flattens a distribution's table.
fn flatten(dist: &ObservableDistribution) -> Vec<Rat> {
    dist.probs.iter().flatten().cloned().collect()
}

/// Descriptions of every constraint a distribution violates.
///
/// # Errors
/// Propagates shape validation and constraint-generation failures.
pub fn check_ns(
    scenario: &Scenario,
    dist: &ObservableDistribution,
) -> Result<Vec<String>, NsError> {
    dist.validate_shape(scenario)?;
    let flat = flatten(dist);
    Ok(ns_constraints(scenario)?
        .into_iter()
        .filter(|c| !c.holds(&flat))
        .map(|c| c.description)
        .collect())
}

/// Checks, for every conditional independence the wiring implies and every
/// joint settings tuple, that the observable block marginals factor
/// exactly.  Returns the violations found.
///
/// # Errors
/// [`NsError::NoIndependence`] when the wiring implies none.
pub fn observable_independencies(
    scenario: &Scenario,
    dist: &ObservableDistribution,
) -> Result<Vec<String>, NsError> {
    dist.validate_shape(scenario)?;
    let pairs = scenario.derive_independencies();
    if pairs.is_empty() {
        return Err(NsError::NoIndependence);
    }
    let mut violations = Vec::new();
    for (left, right) in &pairs {
        let union: BTreeSet<usize> = left.union(right).copied().collect();
        for s in 0..settings_count(scenario) {
            let tuple = settings_tuple(scenario, s);
            for lo in subset_outcomes(left) {
                for ro in subset_outcomes(right) {
                    let mut both = lo.clone();
                    both.extend(ro.iter().copied());
                    both.sort_unstable();
                    let joint = dist.marginal(scenario, &union, &tuple, &both);
                    let pl = dist.marginal(scenario, left, &tuple, &lo);
                    let pr = dist.marginal(scenario, right, &tuple, &ro);
                    if joint != &pl * &pr {
                        let bits: Vec<u8> = both.iter().map(|&(_, b)| b).collect();
                        violations.push(format!(
                            "{{{}}} x {{{}}} fails to factor at {} outcomes {}: \
                             joint {} vs product {}",
                            render_subset(scenario, left),
                            render_subset(scenario, right),
                            render_settings(scenario, &tuple),
                            render_outcomes(&bits),
                            render_rat(&joint),
                            render_rat(&(&pl * &pr)),
                        ));
                    }
                }
            }
        }
    }
    Ok(violations)
}

/// Result of a full generalized-nonsignalling membership check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GnsCheck {
    /// Whether every linear and factorization constraint holds.
    pub passes: bool,
    /// Descriptions of the violated constraints.
    pub violations: Vec<String>,
}

/// Exact membership check for the generalized nonsignalling set: the
/// linear constraints plus the wiring's factorization constraints.  A
/// wiring with no implied independence checks the linear part alone.
///
/// # Errors
/// Propagates shape validation and constraint-generation failures.
pub fn is_gns(scenario: &Scenario, dist: &ObservableDistribution) -> Result<GnsCheck, NsError> {
    let mut violations = check_ns(scenario, dist)?;
    match observable_independencies(scenario, dist) {
        Ok(more) => violations.extend(more),
        Err(NsError::NoIndependence) => {}
        Err(e) => return Err(e),
    }
    Ok(GnsCheck {
        passes: violations.is_empty(),
        violations,
    })
}

/// A marginal fix for one party: the probability of outcome bit 0 under
/// each of the party's settings (the complement is implied).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarginalFix {
    /// Party index.
    pub party: usize,
    /// `p(outcome = 0 | setting = x)` per setting `x`.
    pub prob_zero: Vec<Rat>,
}

/// One enumerated extreme point of the linearized generalized
/// nonsignalling set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GnsVertex {
    /// The behavior.
    pub dist: ObservableDistribution,
    /// Indices into the enumeration's constraint list of every constraint
    /// tight at this point.
    pub active_constraints: Vec<usize>,
    /// Whether the tight constraints have full rank, certifying the point
    /// as a zero-dimensional face.
    pub extremal: bool,
}

/// Result of an exact vertex enumeration.
#[derive(Clone, Debug)]
pub struct GnsEnumeration {
    /// The linear system that was enumerated: nonsignalling constraints,
    /// then marginal-fix rows, then linearized factorization rows.
    pub constraints: Vec<NsConstraint>,
    /// The extreme points, deterministically ordered.
    pub vertices: Vec<GnsVertex>,
}

/// Fixed single-party marginal value `p(outcome = bit | setting = x)`.
fn fix_value(fix: &MarginalFix, x: u8, bit: u8) -> Rat {
    let q = &fix.prob_zero[usize::from(x)];
    if bit == 0 {
        q.clone()
    } else {
        &rat(1) - q
    }
}

/// Enumerates the vertices of the generalized nonsignalling set after the
/// given marginal fixes make every factorization constraint affine.  Each
/// wiring-implied independence must have at least one side that is a
/// single party with a fixed marginal; both-sides-fixed constraints pin
/// the block joint to a constant, one-side-fixed constraints tie it to a
/// scaled marginal of the free side.
///
/// # Errors
/// [`NsError::SizeLimit`] beyond the enumeration limit,
/// [`NsError::BadMarginal`] for malformed fixes,
/// [`NsError::NotLinearizable`] when an independence keeps both sides
/// free, and [`NsError::InfeasibleMarginals`] when nothing satisfies the
/// fixes.
pub fn gns_vertices(
    scenario: &Scenario,
    fixes: &[MarginalFix],
) -> Result<GnsEnumeration, NsError> {
    let s_count = settings_count(scenario);
    let o_count = outcomes_count(scenario);
    let size = s_count * o_count;
    if size > ENUMERATION_SIZE_LIMIT {
        return Err(NsError::SizeLimit(size));
    }
    for fix in fixes {
        if fix.party >= scenario.parties.len() {
            return Err(NsError::BadMarginal(format!(
                "party index {} out of range",
                fix.party
            )));
        }
        let settings = usize::from(scenario.parties[fix.party].settings);
        if fix.prob_zero.len() != settings {
            return Err(NsError::BadMarginal(format!(
                "{} values for {} settings of party {}",
                fix.prob_zero.len(),
                settings,
                scenario.parties[fix.party].label
            )));
        }
        for q in &fix.prob_zero {
            if q.is_negative() || q > &rat(1) {
                return Err(NsError::BadMarginal(format!(
                    "probability {} outside [0, 1]",
                    render_rat(q)
                )));
            }
        }
    }
    let fixed_for = |p: usize| fixes.iter().find(|f| f.party == p);

    let mut constraints = ns_constraints(scenario)?;
    // Marginal-fix rows: the party's single-party marginal at the all-zero
    // completion (consistency rows propagate it to every completion).
    for fix in fixes {
        let subset = BTreeSet::from([fix.party]);
        for x in 0..scenario.parties[fix.party].settings {
            let tuple = completions(scenario, &[(fix.party, x)])[0].clone();
            constraints.push(NsConstraint {
                coeffs: marginal_coeffs(scenario, &subset, &tuple, &[(fix.party, 0)]),
                rhs: fix.prob_zero[usize::from(x)].clone(),
                sense: NsSense::Eq,
                description: format!(
                    "fixed marginal of {} at outcome 0 setting {x}",
                    scenario.parties[fix.party].label
                ),
            });
        }
    }
    // Linearized factorization rows.
    let pairs = scenario.derive_independencies();
    for (left, right) in &pairs {
        let left_fix = if left.len() == 1 {
            fixed_for(*left.iter().next().expect("nonempty block"))
        } else {
            None
        };
        let right_fix = if right.len() == 1 {
            fixed_for(*right.iter().next().expect("nonempty block"))
        } else {
            None
        };
        let (det, det_fix, free) = match (left_fix, right_fix) {
            (Some(f), _) => (left, f, right),
            (None, Some(f)) => (right, f, left),
            (None, None) => {
                return Err(NsError::NotLinearizable(format!(
                    "{{{}}} x {{{}}}",
                    render_subset(scenario, left),
                    render_subset(scenario, right),
                )))
            }
        };
        let det_party = *det.iter().next().expect("single-party block");
        let union: BTreeSet<usize> = det.union(free).copied().collect();
        let both_fixed =
            free.len() == 1 && fixed_for(*free.iter().next().expect("nonempty block")).is_some();
        for det_setting in 0..scenario.parties[det_party].settings {
            for free_setting in subset_settings(scenario, free) {
                let mut pinned = free_setting.clone();
                pinned.push((det_party, det_setting));
                let tuple = completions(scenario, &pinned)[0].clone();
                for det_bit in 0..2u8 {
                    let det_value = fix_value(det_fix, det_setting, det_bit);
                    for free_out in subset_outcomes(free) {
                        let mut both = free_out.clone();
                        both.push((det_party, det_bit));
                        both.sort_unstable();
                        let mut coeffs = marginal_coeffs(scenario, &union, &tuple, &both);
                        let rhs;
                        if both_fixed {
                            let free_party = *free.iter().next().expect("single-party block");
                            let (_, free_bit) = free_out[0];
                            let free_setting_value = free_setting[0].1;
                            rhs = &det_value
                                * &fix_value(
                                    fixed_for(free_party).expect("checked fixed"),
                                    free_setting_value,
                                    free_bit,
                                );
                        } else {
                            // joint = det_value · (marginal of the free
                            // block), moved to the left-hand side.
                            let free_tuple = completions(scenario, &free_setting)[0].clone();
                            for (i, c) in
                                marginal_coeffs(scenario, free, &free_tuple, &free_out)
                            {
                                coeffs.push((i, -(&c * &det_value)));
                            }
                            rhs = Rat::zero();
                        }
                        let bits: Vec<u8> = both.iter().map(|&(_, b)| b).collect();
                        constraints.push(NsConstraint {
                            coeffs,
                            rhs,
                            sense: NsSense::Eq,
                            description: format!(
                                "factorization of {{{}}} x {{{}}} at {} outcomes {}",
                                render_subset(scenario, det),
                                render_subset(scenario, free),
                                render_settings(scenario, &tuple),
                                render_outcomes(&bits),
                            ),
                        });
                    }
                }
            }
        }
    }

    // Reduce the equality system to an affine parametrization v = v0 + N t
    // and enumerate {t : v0 + N t >= 0} exactly.
    let mut eq_rows: Vec<Vec<Rat>> = Vec::new();
    let mut eq_rhs: Vec<Rat> = Vec::new();
    for c in &constraints {
        if c.sense == NsSense::Eq {
            let mut row = vec![Rat::zero(); size];
            for (i, v) in &c.coeffs {
                row[*i] += v;
            }
            eq_rows.push(row);
            eq_rhs.push(c.rhs.clone());
        }
    }
    let Some(v0) = solve_linear(&eq_rows, &eq_rhs) else {
        return Err(NsError::InfeasibleMarginals);
    };
    let basis = kernel_basis(&eq_rows, size);
    let dim = basis.len();
    let flat_vertices: Vec<Vec<Rat>> = if dim == 0 {
        if v0.iter().any(Rat::is_negative) {
            Vec::new()
        } else {
            vec![v0.clone()]
        }
    } else {
        let rows: Vec<LinIneq> = (0..size)
            .map(|i| {
                let mut coeffs = Vec::with_capacity(dim + 1);
                coeffs.push(v0[i].clone());
                for b in &basis {
                    coeffs.push(b[i].clone());
                }
                LinIneq::new(coeffs)
            })
            .collect();
        let enumeration = enumerate_vertices(&LinSystem::new(dim + 1, rows));
        enumeration
            .vertices
            .iter()
            .map(|t| {
                (0..size)
                    .map(|i| {
                        let mut v = v0[i].clone();
                        for (j, b) in basis.iter().enumerate() {
                            v += &(&b[i] * &t[j + 1]);
                        }
                        v
                    })
                    .collect()
            })
            .collect()
    };
    if flat_vertices.is_empty() {
        return Err(NsError::InfeasibleMarginals);
    }

    let mut vertices = Vec::with_capacity(flat_vertices.len());
    for flat in &flat_vertices {
        let mut active = Vec::new();
        let mut active_rows: Vec<Vec<Rat>> = Vec::new();
        for (idx, c) in constraints.iter().enumerate() {
            if c.value(flat) == c.rhs {
                active.push(idx);
                let mut row = vec![Rat::zero(); size];
                for (i, v) in &c.coeffs {
                    row[*i] += v;
                }
                active_rows.push(row);
            }
        }
        let extremal = rank(&active_rows) == size;
        let probs: Vec<Vec<Rat>> = (0..s_count)
            .map(|s| flat[s * o_count..(s + 1) * o_count].to_vec())
            .collect();
        vertices.push(GnsVertex {
            dist: ObservableDistribution { probs },
            active_constraints: active,
            extremal,
        });
    }
    Ok(GnsEnumeration {
        constraints,
        vertices,
    })
}

/// The two-party behavior `p(a, b | x, y) = 1/2 · [a ⊕ b = x·y]`, the
/// standard extremal nonlocal box, on a two-party scenario with two
/// settings each.
#[must_use]
pub fn pr_box(scenario: &Scenario) -> ObservableDistribution {
    let mut dist = ObservableDistribution::zero(scenario);
    let half = Rat::new(1.into(), 2.into());
    for x in 0..2u8 {
        for y in 0..2u8 {
            for a in 0..2u8 {
                for b in 0..2u8 {
                    if a ^ b == x & y {
                        let s = settings_index(scenario, &[x, y]);
                        let o = outcome_index(2, &[a, b]);
                        dist.probs[s][o] = half.clone();
                    }
                }
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::ratio;
    use crate::scenario::parse_scenario;

    const CHSH: &str = "[parties]\nA settings=2\nB settings=2\n[sources]\nL -> A,B\n\
        [functionals]\nS = E[A0 B0] + E[A0 B1] + E[A1 B0] - E[A1 B1]\n";

    const BILOCAL22: &str = "[parties]\n\
        A settings=2\n\
        B settings=2\n\
        C settings=2\n\
        [sources]\n\
        L1 -> A,B\n\
        L2 -> B,C\n\
        [functionals]\n\
        I = E[A0 B0 C0] + E[A0 B0 C1] + E[A1 B0 C0] + E[A1 B0 C1]\n\
        J = E[A0 B1 C0] - E[A0 B1 C1] - E[A1 B1 C0] + E[A1 B1 C1]\n";

    /// The parity point `p(a,b,c|x,y,z) = 1/4 · [a ⊕ b ⊕ c = y · (x ⊕ z)]`.
    fn parity_point(scenario: &Scenario) -> ObservableDistribution {
        let quarter = ratio(1, 4);
        let mut dist = ObservableDistribution::zero(scenario);
        for x in 0..2u8 {
            for y in 0..2u8 {
                for z in 0..2u8 {
                    for o in 0..8usize {
                        let bits = outcome_tuple(3, o);
                        if bits[0] ^ bits[1] ^ bits[2] == y & (x ^ z) {
                            let s = settings_index(scenario, &[x, y, z]);
                            dist.probs[s][o] = quarter.clone();
                        }
                    }
                }
            }
        }
        dist
    }

    /// Uniform-B product of a nonlocal box shared directly between the two
    /// outer parties, bypassing the wiring.
    fn outer_box(scenario: &Scenario) -> ObservableDistribution {
        let quarter = ratio(1, 4);
        let mut dist = ObservableDistribution::zero(scenario);
        for x in 0..2u8 {
            for y in 0..2u8 {
                for z in 0..2u8 {
                    for o in 0..8usize {
                        let bits = outcome_tuple(3, o);
                        if bits[0] ^ bits[2] == x & z {
                            let s = settings_index(scenario, &[x, y, z]);
                            dist.probs[s][o] = quarter.clone();
                        }
                    }
                }
            }
        }
        dist
    }

    #[test]
    fn the_nonlocal_box_is_nonsignalling() {
        let sc = parse_scenario(CHSH).unwrap();
        let dist = pr_box(&sc);
        assert!(check_ns(&sc, &dist).unwrap().is_empty());
        // Tampering with one entry breaks normalization and is reported.
        let mut bad = dist.clone();
        bad.probs[0][0] = rat(1);
        let violations = check_ns(&sc, &bad).unwrap();
        assert!(violations.iter().any(|v| v.contains("normalization")));
    }

    #[test]
    fn the_two_party_polytope_has_the_known_vertex_count() {
        let sc = parse_scenario(CHSH).unwrap();
        let result = gns_vertices(&sc, &[]).unwrap();
        assert_eq!(result.vertices.len(), 24);
        assert!(result.vertices.iter().all(|v| v.extremal));
        // 16 deterministic points (entries in {0, 1}) and 8 nonlocal boxes
        // (entries in {0, 1/2}).
        let deterministic = result
            .vertices
            .iter()
            .filter(|v| {
                v.dist
                    .probs
                    .iter()
                    .flatten()
                    .all(|p| p.is_zero() || *p == rat(1))
            })
            .count();
        assert_eq!(deterministic, 16);
        let half = ratio(1, 2);
        let boxes = result
            .vertices
            .iter()
            .filter(|v| {
                v.dist
                    .probs
                    .iter()
                    .flatten()
                    .all(|p| p.is_zero() || *p == half)
            })
            .count();
        assert_eq!(boxes, 8);
        let box_dist = pr_box(&sc);
        assert!(result.vertices.iter().any(|v| v.dist == box_dist));
    }

    #[test]
    fn fixing_uniform_outer_marginals_yields_the_parity_point() {
        let sc = parse_scenario(BILOCAL22).unwrap();
        let half = ratio(1, 2);
        let fixes = [
            MarginalFix {
                party: 0,
                prob_zero: vec![half.clone(), half.clone()],
            },
            MarginalFix {
                party: 2,
                prob_zero: vec![half.clone(), half],
            },
        ];
        let result = gns_vertices(&sc, &fixes).unwrap();
        assert!(!result.vertices.is_empty());
        assert!(result.vertices.iter().all(|v| v.extremal));
        let target = parity_point(&sc);
        assert!(result.vertices.iter().any(|v| v.dist == target));
        // Every enumerated point is a genuine member of the set.
        for v in &result.vertices {
            assert!(is_gns(&sc, &v.dist).unwrap().passes);
        }
    }

    #[test]
    fn fixing_a_deterministic_marginal_forces_the_party() {
        let sc = parse_scenario(BILOCAL22).unwrap();
        let half = ratio(1, 2);
        let fixes = [
            MarginalFix {
                party: 0,
                prob_zero: vec![rat(1), rat(1)],
            },
            MarginalFix {
                party: 2,
                prob_zero: vec![half.clone(), half],
            },
        ];
        let result = gns_vertices(&sc, &fixes).unwrap();
        assert!(!result.vertices.is_empty());
        // The first party always outputs bit 0: any outcome with its bit
        // set carries zero probability.
        for v in &result.vertices {
            for s in 0..settings_count(&sc) {
                for o in 0..outcomes_count(&sc) {
                    if outcome_tuple(3, o)[0] == 1 {
                        assert!(v.dist.probs[s][o].is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn unfixed_independence_and_bad_fixes_are_rejected() {
        let sc = parse_scenario(BILOCAL22).unwrap();
        assert!(matches!(
            gns_vertices(&sc, &[]),
            Err(NsError::NotLinearizable(_))
        ));
        let bad = [MarginalFix {
            party: 0,
            prob_zero: vec![rat(2), rat(0)],
        }];
        assert!(matches!(
            gns_vertices(&sc, &bad),
            Err(NsError::BadMarginal(_))
        ));
    }

    #[test]
    fn the_parity_point_is_generalized_nonsignalling() {
        let sc = parse_scenario(BILOCAL22).unwrap();
        let check = is_gns(&sc, &parity_point(&sc)).unwrap();
        assert!(check.passes, "{:?}", check.violations);
    }

    #[test]
    fn an_outer_shared_box_fails_the_factorization() {
        let sc = parse_scenario(BILOCAL22).unwrap();
        let dist = outer_box(&sc);
        // Linear nonsignalling holds; the wiring's factorization does not.
        assert!(check_ns(&sc, &dist).unwrap().is_empty());
        let check = is_gns(&sc, &dist).unwrap();
        assert!(!check.passes);
        assert!(check
            .violations
            .iter()
            .any(|v| v.contains("fails to factor")));
        let violations = observable_independencies(&sc, &dist).unwrap();
        assert!(!violations.is_empty());
    }

    #[test]
    fn single_source_scenarios_imply_no_independence() {
        let sc = parse_scenario(CHSH).unwrap();
        let dist = pr_box(&sc);
        assert!(matches!(
            observable_independencies(&sc, &dist),
            Err(NsError::NoIndependence)
        ));
        // The membership check still passes on the linear part alone.
        assert!(is_gns(&sc, &dist).unwrap().passes);
    }
}
