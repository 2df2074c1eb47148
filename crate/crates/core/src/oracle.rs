//! Brute-force and optimization oracles for validating derived inequalities.
//!
//! Three families of checks live here: exact enumeration of deterministic
//! single-source local bounds, sampling and alternating optimization over
//! classical models with several independent hidden sources, and exact
//! evaluation and relaxation queries against concrete correlation data.
//! Everything is rational arithmetic; sampled randomness flows from an
//! explicit seed so every run is reproducible bit for bit.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::{vec, vec::Vec};

use num_traits::{Signed, ToPrimitive, Zero};
use rand_core::{RngCore, SeedableRng};

use crate::moment::{build_basis, Correlator, Restriction};
use crate::nonlinear::poly::OutPoly;
use crate::nonlinear::PolynomialInequality;
use crate::ratio::{rat, render_rat, Rat};
use crate::scenario::Scenario;

/// A classical model for a scenario's network: every hidden source carries
/// a rational distribution over a finite alphabet, and every party answers
/// deterministically from its setting together with the letters of the
/// sources wired to it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct GlhvModel {
    /// Per source: nonnegative letter weights summing to one.
    pub weights: Vec<Vec<Rat>>,
    /// Per party: outcome bits laid out row-major over
    /// `(setting, letters of the party's parent sources in source order)`;
    /// bit `0` encodes outcome `+1` and bit `1` encodes `-1`.
    pub responses: Vec<Vec<u8>>,
}

/// Exact correlation values keyed by rendered correlators (`"E[A0 B0]"`)
/// and/or functional names (`"I"`).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CorrelationData {
    /// The values, in rendering order.
    pub values: BTreeMap<String, Rat>,
}

impl CorrelationData {
    /// Empty data set.
    #[must_use]
    pub fn new() -> Self {
        CorrelationData {
            values: BTreeMap::new(),
        }
    }

    /// Inserts one value under a key.
    pub fn insert(&mut self, key: &str, value: Rat) {
        self.values.insert(String::from(key), value);
    }
}

/// Failure modes of the oracle layer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleError {
    /// The model's shape disagrees with the scenario wiring.
    WiringMismatch(String),
    /// A source distribution is negative or does not sum to one.
    BadWeights(String),
    /// Deterministic enumeration would exceed the configured limit.
    EnumerationTooLarge(usize),
    /// The optimization budget must be positive.
    ZeroBudget,
    /// A needed correlator or functional value is missing from the data.
    MissingValue(String),
    /// No finite relaxation value can satisfy the named family member.
    NoFiniteRelaxation(String),
    /// A referenced functional is not declared in the scenario.
    UnknownFunctional(String),
}

impl core::fmt::Display for OracleError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            OracleError::WiringMismatch(d) => write!(f, "model does not match the scenario wiring: {d}"),
            OracleError::BadWeights(d) => write!(f, "invalid source weights: {d}"),
            OracleError::EnumerationTooLarge(n) => {
                write!(f, "deterministic enumeration of {n} strategies exceeds the limit")
            }
            OracleError::ZeroBudget => write!(f, "optimization budget must be positive"),
            OracleError::MissingValue(k) => write!(f, "missing value for {k}"),
            OracleError::NoFiniteRelaxation(m) => {
                write!(f, "no finite relaxation satisfies: {m}")
            }
            OracleError::UnknownFunctional(n) => write!(f, "unknown functional {n}"),
        }
    }
}

/// Largest deterministic-strategy enumeration attempted by [`local_bound`].
const ENUMERATION_LIMIT: usize = 1 << 20;

/// Indices of the sources feeding a party, ascending.
fn parent_sources(scenario: &Scenario, party: usize) -> Vec<usize> {
    scenario
        .sources
        .iter()
        .enumerate()
        .filter(|(_, s)| s.parties.contains(&party))
        .map(|(i, _)| i)
        .collect()
}

/// The default alphabet size of each source: the number of joint
/// deterministic response classes of the parties it feeds (each party with
/// `s` settings and binary outcomes contributes a factor `2^s`).  Any
/// classical source distribution is a mixture over at most this many
/// extremal behaviors.
#[must_use]
pub fn default_alphabets(scenario: &Scenario) -> Vec<usize> {
    scenario
        .sources
        .iter()
        .map(|src| {
            src.parties
                .iter()
                .map(|&p| 1usize << scenario.parties[p].settings)
                .product()
        })
        .collect()
}

/// Checks a model against the scenario wiring and distribution invariants.
///
/// # Errors
/// [`OracleError::WiringMismatch`] on shape disagreement and
/// [`OracleError::BadWeights`] on an invalid distribution.
pub fn validate_model(scenario: &Scenario, model: &GlhvModel) -> Result<(), OracleError> {
    if model.weights.len() != scenario.sources.len() {
        return Err(OracleError::WiringMismatch(format!(
            "{} source distributions for {} sources",
            model.weights.len(),
            scenario.sources.len()
        )));
    }
    if model.responses.len() != scenario.parties.len() {
        return Err(OracleError::WiringMismatch(format!(
            "{} response tables for {} parties",
            model.responses.len(),
            scenario.parties.len()
        )));
    }
    for (s, w) in model.weights.iter().enumerate() {
        if w.is_empty() {
            return Err(OracleError::WiringMismatch(format!(
                "source {} has an empty alphabet",
                scenario.sources[s].name
            )));
        }
        let mut sum = Rat::zero();
        for v in w {
            if v.is_negative() {
                return Err(OracleError::BadWeights(format!(
                    "source {} carries a negative weight",
                    scenario.sources[s].name
                )));
            }
            sum += v;
        }
        if sum != rat(1) {
            return Err(OracleError::BadWeights(format!(
                "source {} weights sum to {}",
                scenario.sources[s].name,
                render_rat(&sum)
            )));
        }
    }
    for (p, table) in model.responses.iter().enumerate() {
        let parents = parent_sources(scenario, p);
        let expected = usize::from(scenario.parties[p].settings)
            * parents.iter().map(|&s| model.weights[s].len()).product::<usize>();
        if table.len() != expected {
            return Err(OracleError::WiringMismatch(format!(
                "party {} has {} response entries, expected {}",
                scenario.parties[p].label,
                table.len(),
                expected
            )));
        }
        if table.iter().any(|&b| b > 1) {
            return Err(OracleError::WiringMismatch(format!(
                "party {} has a non-binary response entry",
                scenario.parties[p].label
            )));
        }
    }
    Ok(())
}

/// Row-major index into a party's response table.
fn response_index(
    model: &GlhvModel,
    parents: &[usize],
    setting: u8,
    letters: &[usize],
) -> usize {
    let mut idx = usize::from(setting);
    for &s in parents {
        idx = idx * model.weights[s].len() + letters[s];
    }
    idx
}

/// Outcome sign (+1/−1 as i32) of one party at one setting under a joint
/// letter assignment.
fn outcome_sign(
    model: &GlhvModel,
    parents_of: &[Vec<usize>],
    party: usize,
    setting: u8,
    letters: &[usize],
) -> i32 {
    let idx = response_index(model, &parents_of[party], setting, letters);
    1 - 2 * i32::from(model.responses[party][idx])
}

/// Iterates all joint letter assignments, calling `f` with the letter tuple
/// and the joint weight.
fn for_each_assignment<F: FnMut(&[usize], &Rat)>(model: &GlhvModel, mut f: F) {
    let alphas: Vec<usize> = model.weights.iter().map(Vec::len).collect();
    let total: usize = alphas.iter().product();
    let mut letters = vec![0usize; alphas.len()];
    for joint in 0..total {
        let mut rest = joint;
        for (s, &a) in alphas.iter().enumerate().rev() {
            letters[s] = rest % a;
            rest /= a;
        }
        let mut weight = rat(1);
        for (s, &l) in letters.iter().enumerate() {
            weight *= &model.weights[s][l];
        }
        if weight.is_zero() {
            continue;
        }
        f(&letters, &weight);
    }
}

/// Exact expectation value of one correlator (a sorted list of
/// `(party, setting)` variables) under a model.
///
/// # Errors
/// Propagates model-validation failures.
pub fn correlator_value(
    scenario: &Scenario,
    model: &GlhvModel,
    vars: &[(usize, u8)],
) -> Result<Rat, OracleError> {
    validate_model(scenario, model)?;
    let parents_of: Vec<Vec<usize>> = (0..scenario.parties.len())
        .map(|p| parent_sources(scenario, p))
        .collect();
    let mut acc = Rat::zero();
    for_each_assignment(model, |letters, weight| {
        let mut sign = 1i32;
        for &(p, x) in vars {
            sign *= outcome_sign(model, &parents_of, p, x, letters);
        }
        if sign > 0 {
            acc += weight;
        } else {
            acc -= weight;
        }
    });
    Ok(acc)
}

/// Exact values of every declared functional under a model, in declaration
/// order.  Uses an overflow-checked integer fast path and falls back to
/// full rational arithmetic when the model's weights are too large for it.
///
/// # Errors
/// Propagates model-validation failures.
pub fn functional_values(
    scenario: &Scenario,
    model: &GlhvModel,
) -> Result<Vec<Rat>, OracleError> {
    validate_model(scenario, model)?;
    if let Some(vals) = functional_values_integer(scenario, model) {
        return Ok(vals);
    }
    let parents_of: Vec<Vec<usize>> = (0..scenario.parties.len())
        .map(|p| parent_sources(scenario, p))
        .collect();
    let mut vals = vec![Rat::zero(); scenario.functionals.len()];
    for_each_assignment(model, |letters, weight| {
        for (i, func) in scenario.functionals.iter().enumerate() {
            let mut term_sum = Rat::zero();
            for term in &func.terms {
                let mut sign = 1i32;
                for &(p, x) in &term.vars {
                    sign *= outcome_sign(model, &parents_of, p, x, letters);
                }
                if sign > 0 {
                    term_sum += &term.coeff;
                } else {
                    term_sum -= &term.coeff;
                }
            }
            vals[i] += &(&term_sum * weight);
        }
    });
    Ok(vals)
}

/// Integer fast path for [`functional_values`]: weights are brought to a
/// per-source common denominator and the per-assignment sums accumulate in
/// `i128`.  Returns `None` when anything overflows the checked arithmetic.
fn functional_values_integer(scenario: &Scenario, model: &GlhvModel) -> Option<Vec<Rat>> {
    use num_integer::Integer;
    let mut numerators: Vec<Vec<i128>> = Vec::with_capacity(model.weights.len());
    let mut denominators: Vec<Rat> = Vec::with_capacity(model.weights.len());
    for w in &model.weights {
        let mut denom = num_bigint::BigInt::from(1);
        for v in w {
            denom = denom.lcm(v.denom());
        }
        let nums: Option<Vec<i128>> = w
            .iter()
            .map(|v| (v.numer() * (&denom / v.denom())).to_i128())
            .collect();
        numerators.push(nums?);
        denominators.push(Rat::new(denom, 1.into()));
    }
    // Integer-scale every functional's coefficients.
    let mut scaled: Vec<(Vec<(i128, &[(usize, u8)])>, Rat)> = Vec::new();
    for func in &scenario.functionals {
        let mut denom = num_bigint::BigInt::from(1);
        for term in &func.terms {
            denom = denom.lcm(term.coeff.denom());
        }
        let mut terms = Vec::with_capacity(func.terms.len());
        for term in &func.terms {
            let c = (term.coeff.numer() * (&denom / term.coeff.denom())).to_i128()?;
            terms.push((c, term.vars.as_slice()));
        }
        scaled.push((terms, Rat::new(denom, 1.into())));
    }
    let parents_of: Vec<Vec<usize>> = (0..scenario.parties.len())
        .map(|p| parent_sources(scenario, p))
        .collect();
    let alphas: Vec<usize> = model.weights.iter().map(Vec::len).collect();
    let total: usize = alphas.iter().product();
    let mut acc = vec![0i128; scenario.functionals.len()];
    let mut letters = vec![0usize; alphas.len()];
    for joint in 0..total {
        let mut rest = joint;
        for (s, &a) in alphas.iter().enumerate().rev() {
            letters[s] = rest % a;
            rest /= a;
        }
        let mut wnum: i128 = 1;
        for (s, &l) in letters.iter().enumerate() {
            wnum = wnum.checked_mul(numerators[s][l])?;
        }
        if wnum == 0 {
            continue;
        }
        for (i, (terms, _)) in scaled.iter().enumerate() {
            let mut t: i128 = 0;
            for (c, vars) in terms {
                let mut sign = 1i32;
                for &(p, x) in *vars {
                    sign *= outcome_sign(model, &parents_of, p, x, &letters);
                }
                t = t.checked_add(if sign > 0 { *c } else { -*c })?;
            }
            acc[i] = acc[i].checked_add(wnum.checked_mul(t)?)?;
        }
    }
    let mut weight_denom = rat(1);
    for d in &denominators {
        weight_denom *= d;
    }
    let mut out = Vec::with_capacity(acc.len());
    for (i, a) in acc.iter().enumerate() {
        let v = Rat::new((*a).into(), 1.into()) / (&weight_denom * &scaled[i].1);
        out.push(v);
    }
    Some(out)
}

/// The exact correlation data a model produces: every correlator of the
/// full moment basis plus every declared functional value.
///
/// # Errors
/// Propagates wiring/weight validation and basis-construction failures.
pub fn model_to_correlations(
    scenario: &Scenario,
    model: &GlhvModel,
) -> Result<CorrelationData, OracleError> {
    validate_model(scenario, model)?;
    let basis = build_basis(scenario, &Restriction::Full)
        .or_else(|_| build_basis(scenario, &Restriction::FullCorrelatorsOnly))
        .map_err(|e| OracleError::WiringMismatch(e.to_string()))?;
    let mut data = CorrelationData::new();
    for c in basis.correlators() {
        let value = correlator_value(scenario, model, c.vars())?;
        data.insert(&c.render(scenario), value);
    }
    let vals = functional_values(scenario, model)?;
    for (f, v) in scenario.functionals.iter().zip(vals) {
        data.insert(&f.name, v);
    }
    Ok(data)
}

/// Draws one reproducible random model: letter weights are small random
/// integers normalized per source, responses are random bits.  The model
/// for a given `(seed, index)` pair never depends on how many other models
/// are drawn, so sampling parallelizes without changing results.
#[must_use]
pub fn sample_model(scenario: &Scenario, seed: u64, index: u64) -> GlhvModel {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(
        seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15),
    );
    let alphas = default_alphabets(scenario);
    let mut weights = Vec::with_capacity(alphas.len());
    for &a in &alphas {
        let mut nums: Vec<u64> = (0..a).map(|_| rng.next_u64() % 17).collect();
        if nums.iter().all(|&n| n == 0) {
            nums[0] = 1;
        }
        let sum: u64 = nums.iter().sum();
        weights.push(
            nums.iter()
                .map(|&n| Rat::new(n.into(), sum.into()))
                .collect::<Vec<Rat>>(),
        );
    }
    let mut responses = Vec::with_capacity(scenario.parties.len());
    for p in 0..scenario.parties.len() {
        let parents = parent_sources(scenario, p);
        let entries = usize::from(scenario.parties[p].settings)
            * parents.iter().map(|&s| alphas[s]).product::<usize>();
        responses.push((0..entries).map(|_| (rng.next_u64() & 1) as u8).collect());
    }
    GlhvModel { weights, responses }
}

/// One additive term of a local-bound objective: `coeff · F` or
/// `coeff · |F|` for a declared functional `F`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundTerm {
    /// Rational coefficient.
    pub coeff: Rat,
    /// Index into the scenario's declared functionals.
    pub functional: usize,
    /// Whether the functional enters through its absolute value.
    pub absolute: bool,
}

/// Exact maximum of a combination of functionals over all deterministic
/// single-source strategies (every party answers from its setting alone;
/// one shared source makes every correlator factor into outcome products).
///
/// # Errors
/// [`OracleError::UnknownFunctional`] for an out-of-range index and
/// [`OracleError::EnumerationTooLarge`] beyond the enumeration limit.
pub fn local_bound(scenario: &Scenario, terms: &[BoundTerm]) -> Result<Rat, OracleError> {
    for t in terms {
        if t.functional >= scenario.functionals.len() {
            return Err(OracleError::UnknownFunctional(format!(
                "functional #{}",
                t.functional
            )));
        }
    }
    let mut total: usize = 1;
    for p in &scenario.parties {
        total = total
            .checked_shl(u32::from(p.settings))
            .ok_or(OracleError::EnumerationTooLarge(usize::MAX))?;
    }
    if total > ENUMERATION_LIMIT {
        return Err(OracleError::EnumerationTooLarge(total));
    }
    // Outcome bits per (party, setting), flattened.
    let offsets: Vec<u32> = {
        let mut acc = 0u32;
        scenario
            .parties
            .iter()
            .map(|p| {
                let o = acc;
                acc += u32::from(p.settings);
                o
            })
            .collect()
    };
    let mut best: Option<Rat> = None;
    for assign in 0..total {
        let sign = |p: usize, x: u8| -> i64 {
            let bit = (assign >> (offsets[p] + u32::from(x))) & 1;
            1 - 2 * (bit as i64)
        };
        let mut func_vals = vec![Rat::zero(); scenario.functionals.len()];
        for (i, func) in scenario.functionals.iter().enumerate() {
            for term in &func.terms {
                let mut s = 1i64;
                for &(p, x) in &term.vars {
                    s *= sign(p, x);
                }
                if s > 0 {
                    func_vals[i] += &term.coeff;
                } else {
                    func_vals[i] -= &term.coeff;
                }
            }
        }
        let mut value = Rat::zero();
        for t in terms {
            let f = &func_vals[t.functional];
            let contrib = if t.absolute { f.abs() } else { f.clone() };
            value += &(&t.coeff * &contrib);
        }
        if best.as_ref().is_none_or(|b| value > *b) {
            best = Some(value);
        }
    }
    Ok(best.expect("at least one deterministic strategy exists"))
}

/// Evaluates an output polynomial at a model's functional values (slack
/// fixed to zero).
///
/// # Errors
/// Propagates model-validation failures.
pub fn model_value(
    scenario: &Scenario,
    lhs: &OutPoly,
    model: &GlhvModel,
) -> Result<Rat, OracleError> {
    let vals = functional_values(scenario, model)?;
    Ok(lhs.eval(&vals, &Rat::zero()))
}

/// One seeded restart of the alternating optimizer: draw a random model,
/// then repeatedly replace one source's distribution with the exact best
/// point among the simplex's vertices and edges (the objective restricted
/// to an edge is a one-variable quadratic, solved in closed form) until no
/// source improves.  Returns the best value found and its witness.
///
/// # Errors
/// Propagates model-validation failures.
pub fn glhv_restart(
    scenario: &Scenario,
    lhs: &OutPoly,
    seed: u64,
    restart: u64,
) -> Result<(Rat, GlhvModel), OracleError> {
    let mut model = sample_model(scenario, seed, restart);
    let zero = Rat::zero();
    let mut current = model_value(scenario, lhs, &model)?;
    loop {
        let mut improved = false;
        for s in 0..model.weights.len() {
            // Functional values are affine in this source's weights:
            // evaluate the per-letter profiles once.
            let alpha = model.weights[s].len();
            let saved = model.weights[s].clone();
            let mut profiles: Vec<Vec<Rat>> = Vec::with_capacity(alpha);
            for l in 0..alpha {
                let mut point = vec![Rat::zero(); alpha];
                point[l] = rat(1);
                model.weights[s] = point;
                profiles.push(functional_values(scenario, &model)?);
            }
            model.weights[s] = saved;
            let value_at = |w: &[Rat]| -> Rat {
                let n = profiles[0].len();
                let mut vals = vec![Rat::zero(); n];
                for (l, wl) in w.iter().enumerate() {
                    if wl.is_zero() {
                        continue;
                    }
                    for i in 0..n {
                        vals[i] += &(wl * &profiles[l][i]);
                    }
                }
                lhs.eval(&vals, &zero)
            };
            let mut best_w: Option<(Rat, Vec<Rat>)> = None;
            let mut consider = |value: Rat, w: Vec<Rat>| {
                if best_w.as_ref().is_none_or(|(bv, _)| value > *bv) {
                    best_w = Some((value, w));
                }
            };
            for l in 0..alpha {
                let mut w = vec![Rat::zero(); alpha];
                w[l] = rat(1);
                consider(value_at(&w), w);
            }
            for l in 0..alpha {
                for m in (l + 1)..alpha {
                    // Objective along w = (1-t)·e_l + t·e_m is quadratic in
                    // t; its interior critical point is rational.
                    let at = |t: &Rat| -> Vec<Rat> {
                        let mut w = vec![Rat::zero(); alpha];
                        w[l] = rat(1) - t;
                        w[m] = t.clone();
                        w
                    };
                    let v0 = value_at(&at(&rat(0)));
                    let v1 = value_at(&at(&rat(1)));
                    let half = Rat::new(1.into(), 2.into());
                    let vh = value_at(&at(&half));
                    // Fit q(t) = q0 + q1 t + q2 t^2 through t = 0, 1/2, 1.
                    let q0 = v0.clone();
                    let q2 = (&(&v0 + &v1) - &(&vh * &rat(2))) * rat(2);
                    let q1 = &(&v1 - &v0) - &q2;
                    if q2.is_negative() {
                        let t_star = -&q1 / (&q2 * &rat(2));
                        if t_star > rat(0) && t_star < rat(1) {
                            let w = at(&t_star);
                            consider(value_at(&w), w);
                        }
                    }
                    let _ = q0;
                }
            }
            if let Some((bv, bw)) = best_w {
                if bv > current {
                    current = bv;
                    model.weights[s] = bw;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    Ok((current, model))
}

/// Best value of `lhs` over classical network models found by `budget`
/// seeded alternating-optimization restarts, with the witness model.  The
/// result is a lower bound on the true maximum; for a soundly derived
/// inequality it never exceeds zero.  Restarts are independent, so ranges
/// can run in parallel and the merge (larger value wins, ties broken by
/// the smaller witness) is order-independent.
///
/// # Errors
/// [`OracleError::ZeroBudget`] when `budget` is zero.
pub fn max_over_glhv(
    scenario: &Scenario,
    lhs: &OutPoly,
    budget: usize,
    seed: u64,
) -> Result<(Rat, GlhvModel), OracleError> {
    if budget == 0 {
        return Err(OracleError::ZeroBudget);
    }
    let mut best: Option<(Rat, GlhvModel)> = None;
    for r in 0..budget {
        let (value, model) = glhv_restart(scenario, lhs, seed, r as u64)?;
        let better = match &best {
            None => true,
            Some((bv, bm)) => value > *bv || (value == *bv && model < *bm),
        };
        if better {
            best = Some((value, model));
        }
    }
    Ok(best.expect("budget is positive"))
}

/// Resolves a functional's value from correlation data: a direct entry
/// under the functional's name wins; otherwise the declared correlator
/// combination is evaluated from correlator entries.
///
/// # Errors
/// [`OracleError::MissingValue`] naming the first absent correlator.
pub fn functional_from_data(
    scenario: &Scenario,
    data: &CorrelationData,
    index: usize,
) -> Result<Rat, OracleError> {
    let func = scenario
        .functionals
        .get(index)
        .ok_or_else(|| OracleError::UnknownFunctional(format!("functional #{index}")))?;
    if let Some(v) = data.values.get(&func.name) {
        return Ok(v.clone());
    }
    let mut acc = Rat::zero();
    for term in &func.terms {
        let key = Correlator::new(term.vars.clone()).render(scenario);
        let v = data
            .values
            .get(&key)
            .ok_or_else(|| OracleError::MissingValue(key.clone()))?;
        acc += &(&term.coeff * v);
    }
    Ok(acc)
}

/// Functional values for every declared functional, resolved from data.
///
/// # Errors
/// Propagates [`functional_from_data`] failures.
pub fn functionals_from_data(
    scenario: &Scenario,
    data: &CorrelationData,
) -> Result<Vec<Rat>, OracleError> {
    (0..scenario.functionals.len())
        .map(|i| functional_from_data(scenario, data, i))
        .collect()
}

/// Exact evaluation of one derived inequality at correlation data: returns
/// `(value, satisfied)` where `value` is the left side at zero slack and
/// satisfaction allows the optional relaxation value `c` (defaulting to
/// zero) to absorb the slack term.  A member whose case conditions fail at
/// the data does not apply and counts as satisfied.
///
/// # Errors
/// Propagates value-resolution failures.
pub fn evaluate(
    scenario: &Scenario,
    ineq: &PolynomialInequality,
    data: &CorrelationData,
    c: Option<&Rat>,
) -> Result<(Rat, bool), OracleError> {
    let vals = functionals_from_data(scenario, data)?;
    let zero = Rat::zero();
    let value = ineq.lhs.eval(&vals, &zero);
    let applies = ineq
        .cases
        .iter()
        .all(|g| !g.eval(&vals, &zero).is_negative());
    let slack = c.unwrap_or(&zero);
    let satisfied = !applies || !ineq.lhs.eval(&vals, slack).is_positive();
    Ok((value, satisfied))
}

/// Smallest nonnegative relaxation value that satisfies every applicable
/// member of a slack-bearing family at the data.
///
/// # Errors
/// [`OracleError::NoFiniteRelaxation`] when a member with no useful slack
/// term is violated.
pub fn min_relaxation(
    scenario: &Scenario,
    family: &[PolynomialInequality],
    data: &CorrelationData,
) -> Result<Rat, OracleError> {
    let vals = functionals_from_data(scenario, data)?;
    let zero = Rat::zero();
    let one = rat(1);
    let mut needed = Rat::zero();
    let mut capped: Vec<(&PolynomialInequality, Rat, Rat)> = Vec::new();
    for member in family {
        let applies = member
            .cases
            .iter()
            .all(|g| !g.eval(&vals, &zero).is_negative());
        if !applies {
            continue;
        }
        let v0 = member.lhs.eval(&vals, &zero);
        let slope = &member.lhs.eval(&vals, &one) - &v0;
        if slope.is_negative() {
            // v0 + slope·C ≤ 0  ⟺  C ≥ v0 / (−slope).
            let bound = &v0 / &(-&slope);
            if bound > needed {
                needed = bound;
            }
        } else {
            capped.push((member, v0, slope));
        }
    }
    for (member, v0, slope) in capped {
        if (&v0 + &(&slope * &needed)).is_positive() {
            return Err(OracleError::NoFiniteRelaxation(member.rendered.clone()));
        }
    }
    Ok(needed)
}

/// Report of the square-root-form equivalence sweep.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SqrtFormReport {
    /// Number of grid points checked.
    pub points: usize,
    /// Points where the family conjunction and the square-root bound
    /// disagree.
    pub mismatches: Vec<(Rat, Rat)>,
}

/// An evenly spaced rational grid over `[lo, hi]²` with `steps` points per
/// axis.
#[must_use]
pub fn square_grid(lo: &Rat, hi: &Rat, steps: usize) -> Vec<(Rat, Rat)> {
    let mut axis = Vec::with_capacity(steps);
    if steps <= 1 {
        axis.push(lo.clone());
    } else {
        let span = hi - lo;
        let den = rat(steps as i64 - 1);
        for k in 0..steps {
            axis.push(lo + &(&(&span * &rat(k as i64)) / &den));
        }
    }
    let mut grid = Vec::with_capacity(axis.len() * axis.len());
    for i in &axis {
        for j in &axis {
            grid.push((i.clone(), j.clone()));
        }
    }
    grid
}

/// Whether `√|i| + √|j| ≤ 2`, decided exactly through the squared
/// reformulation `|i| + |j| ≤ 4  ∧  (4 − |i| − |j|)² ≥ 4·|i|·|j|`.
#[must_use]
pub fn sqrt_bound_holds(i: &Rat, j: &Rat) -> bool {
    let ai = i.abs();
    let aj = j.abs();
    let sum = &ai + &aj;
    if sum > rat(4) {
        return false;
    }
    let rest = &rat(4) - &sum;
    &rest * &rest >= &(&ai * &aj) * &rat(4)
}

/// Checks, over a grid of `(I, J)` points, that the conjunction of a
/// two-functional family agrees exactly with the square-root bound.
#[must_use]
pub fn check_equivalence_sqrt_form(
    family: &[PolynomialInequality],
    grid: &[(Rat, Rat)],
) -> SqrtFormReport {
    let zero = Rat::zero();
    let mut mismatches = Vec::new();
    for (i, j) in grid {
        let vals = [i.clone(), j.clone()];
        let conj = family.iter().all(|m| {
            let applies = m.cases.iter().all(|g| !g.eval(&vals, &zero).is_negative());
            !applies || !m.lhs.eval(&vals, &zero).is_positive()
        });
        if conj != sqrt_bound_holds(i, j) {
            mismatches.push((i.clone(), j.clone()));
        }
    }
    SqrtFormReport {
        points: grid.len(),
        mismatches,
    }
}

/// Outcome of a sampling verification sweep.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    /// Number of models checked.
    pub checked: usize,
    /// Violations as `(sample index, family member index, value)`.
    pub violations: Vec<(u64, usize, Rat)>,
}

/// Draws `samples` seeded models and exactly evaluates every family member
/// at each; any positive value under satisfied case conditions is recorded
/// as a violation.
///
/// # Errors
/// Propagates model-validation failures.
pub fn verify_family(
    scenario: &Scenario,
    family: &[PolynomialInequality],
    samples: u64,
    seed: u64,
) -> Result<VerifyReport, OracleError> {
    let zero = Rat::zero();
    let mut violations = Vec::new();
    for index in 0..samples {
        let model = sample_model(scenario, seed, index);
        let vals = functional_values(scenario, &model)?;
        for (m, member) in family.iter().enumerate() {
            let applies = member
                .cases
                .iter()
                .all(|g| !g.eval(&vals, &zero).is_negative());
            if !applies {
                continue;
            }
            let value = member.lhs.eval(&vals, &zero);
            if value.is_positive() {
                violations.push((index, m, value));
            }
        }
    }
    Ok(VerifyReport {
        checked: samples as usize,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinear::poly::{OutMono, OutVar};
    use crate::ratio::ratio;
    use crate::scenario::parse_scenario;

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

    const BILOCAL33: &str = "[parties]\n\
        A settings=3\n\
        B settings=2\n\
        C settings=3\n\
        [sources]\n\
        L1 -> A,B\n\
        L2 -> B,C\n\
        [functionals]\n\
        I = E[A0 B0 C0] + E[A0 B0 C1] + E[A1 B0 C0] + E[A1 B0 C1] \
            + E[A0 B0 C2] + E[A2 B0 C0] + E[A1 B0 C2] + E[A2 B0 C1] + E[A2 B0 C2]\n\
        J = E[A0 B1 C0] + E[A0 B1 C1] + E[A1 B1 C0] + E[A1 B1 C1] \
            - E[A0 B1 C2] - E[A2 B1 C0] - E[A1 B1 C2] - E[A2 B1 C1] + E[A2 B1 C2]\n";

    const CHSH: &str = "[parties]\nA settings=2\nB settings=2\n[sources]\nL -> A,B\n\
        [functionals]\nS = E[A0 B0] + E[A0 B1] + E[A1 B0] - E[A1 B1]\n";

    /// The shipped two-setting family member for a sign pair: the negated
    /// extremal value `-(dI - eJ)²/8 + dI + eJ - 2`, with an optional slack
    /// term.
    fn family_member(d: i64, e: i64, slack: Option<i64>) -> PolynomialInequality {
        let mut lhs = OutPoly::zero();
        let eighth = ratio(-1, 8);
        lhs.add_term(OutMono(vec![OutVar::Func(0), OutVar::Func(0)]), eighth.clone());
        lhs.add_term(
            OutMono(vec![OutVar::Func(0), OutVar::Func(1)]),
            ratio(d * e, 4),
        );
        lhs.add_term(OutMono(vec![OutVar::Func(1), OutVar::Func(1)]), eighth);
        lhs.add_term(OutMono(vec![OutVar::Func(0)]), rat(d));
        lhs.add_term(OutMono(vec![OutVar::Func(1)]), rat(e));
        lhs.add_term(OutMono(vec![]), rat(-2));
        if let Some(s) = slack {
            lhs.add_term(OutMono(vec![OutVar::Relax]), rat(s));
        }
        PolynomialInequality {
            lhs: lhs.clone(),
            cases: vec![],
            rendered: lhs.render(&["I".to_string(), "J".to_string()]),
            case_strings: vec![],
            certificate: vec![],
        }
    }

    fn full_family(slack: Option<i64>) -> Vec<PolynomialInequality> {
        [(1, 1), (1, -1), (-1, 1), (-1, -1)]
            .iter()
            .map(|&(d, e)| family_member(d, e, slack))
            .collect()
    }

    /// A model where every response is the same bit: all outcomes +1, so
    /// every correlator equals one.
    fn constant_model(scenario: &Scenario) -> GlhvModel {
        let weights = scenario.sources.iter().map(|_| vec![rat(1)]).collect();
        let responses = scenario
            .parties
            .iter()
            .map(|p| vec![0u8; usize::from(p.settings)])
            .collect();
        GlhvModel { weights, responses }
    }

    #[test]
    fn constant_responses_give_unit_correlators() {
        let sc = parse_scenario(BILOCAL22).unwrap();
        let model = constant_model(&sc);
        let data = model_to_correlations(&sc, &model).unwrap();
        assert_eq!(data.values["E[A0 B0 C0]"], rat(1));
        assert_eq!(data.values["E[A1 B1 C1]"], rat(1));
        assert_eq!(data.values["E[A0 A1]"], rat(1));
        assert_eq!(data.values["I"], rat(4));
        assert_eq!(data.values["J"], rat(0));
    }

    /// Uniform binary sources with `b = λ1⊕λ2`, `a = λ1`, `c = λ2`
    /// (settings ignored): the parities cancel and every full correlator
    /// equals one.
    #[test]
    fn parity_model_cancels_to_unit_correlators() {
        let sc = parse_scenario(BILOCAL22).unwrap();
        let half = ratio(1, 2);
        let weights = vec![vec![half.clone(), half.clone()], vec![half.clone(), half]];
        // A: settings × λ1 → λ1; C: settings × λ2 → λ2; B: settings × λ1 ×
        // λ2 → λ1⊕λ2.
        let a_table = vec![0, 1, 0, 1];
        let c_table = vec![0, 1, 0, 1];
        let mut b_table = Vec::new();
        for _setting in 0..2 {
            for l1 in 0..2u8 {
                for l2 in 0..2u8 {
                    b_table.push(l1 ^ l2);
                }
            }
        }
        let model = GlhvModel {
            weights,
            responses: vec![a_table, b_table, c_table],
        };
        for x in 0..2u8 {
            for y in 0..2u8 {
                for z in 0..2u8 {
                    let v = correlator_value(&sc, &model, &[(0, x), (1, y), (2, z)]).unwrap();
                    assert_eq!(v, rat(1), "E[A{x} B{y} C{z}]");
                }
            }
        }
    }

    /// The wiring's defining independence: the outer parties' block
    /// correlators factor exactly for any model.
    #[test]
    fn outer_blocks_factor_exactly() {
        let sc = parse_scenario(BILOCAL22).unwrap();
        for index in 0..20 {
            let model = sample_model(&sc, 11, index);
            let joint = correlator_value(&sc, &model, &[(0, 0), (0, 1), (2, 0), (2, 1)])
                .unwrap();
            let a = correlator_value(&sc, &model, &[(0, 0), (0, 1)]).unwrap();
            let c = correlator_value(&sc, &model, &[(2, 0), (2, 1)]).unwrap();
            assert_eq!(joint, &a * &c, "sample {index}");
        }
    }

    #[test]
    fn sampled_models_validate_and_reproduce() {
        let sc = parse_scenario(BILOCAL22).unwrap();
        let m1 = sample_model(&sc, 5, 3);
        let m2 = sample_model(&sc, 5, 3);
        assert_eq!(m1, m2);
        assert!(validate_model(&sc, &m1).is_ok());
        assert_eq!(default_alphabets(&sc), vec![16, 16]);
        // The integer fast path agrees with the generic rational path.
        let fast = functional_values(&sc, &m1).unwrap();
        let i_direct = functional_from_data(&sc, &model_to_correlations(&sc, &m1).unwrap(), 0)
            .unwrap();
        assert_eq!(fast[0], i_direct);
    }

    #[test]
    fn wiring_and_weight_mismatches_are_reported() {
        let sc = parse_scenario(BILOCAL22).unwrap();
        let mut model = constant_model(&sc);
        model.weights[0] = vec![ratio(1, 2), ratio(1, 3)];
        assert!(matches!(
            validate_model(&sc, &model),
            Err(OracleError::BadWeights(_))
        ));
        let mut short = constant_model(&sc);
        short.responses.pop();
        assert!(matches!(
            validate_model(&sc, &short),
            Err(OracleError::WiringMismatch(_))
        ));
    }

    #[test]
    fn local_bound_recovers_the_two_party_facet_bound() {
        let sc = parse_scenario(CHSH).unwrap();
        let bound = local_bound(
            &sc,
            &[BoundTerm {
                coeff: rat(1),
                functional: 0,
                absolute: false,
            }],
        )
        .unwrap();
        assert_eq!(bound, rat(2));
        assert_eq!(local_bound(&sc, &[]).unwrap(), rat(0));
    }

    #[test]
    fn local_bound_of_the_three_setting_absolute_sum_is_ten() {
        let sc = parse_scenario(BILOCAL33).unwrap();
        let terms: Vec<BoundTerm> = (0..2)
            .map(|i| BoundTerm {
                coeff: rat(1),
                functional: i,
                absolute: true,
            })
            .collect();
        assert_eq!(local_bound(&sc, &terms).unwrap(), rat(10));
    }

    /// Sampled models never violate the shipped two-setting family, and
    /// the optimizer attains the boundary exactly.
    #[test]
    fn sampling_and_optimization_respect_the_family() {
        let sc = parse_scenario(BILOCAL22).unwrap();
        let family = full_family(None);
        let report = verify_family(&sc, &family, 200, 2026).unwrap();
        assert_eq!(report.checked, 200);
        assert!(report.violations.is_empty());
        let (best, witness) = max_over_glhv(&sc, &family[0].lhs, 8, 2026).unwrap();
        assert!(!best.is_positive());
        assert_eq!(best, rat(0));
        assert!(validate_model(&sc, &witness).is_ok());
        assert!(matches!(
            max_over_glhv(&sc, &family[0].lhs, 0, 1),
            Err(OracleError::ZeroBudget)
        ));
    }

    /// The facet functional minus its local bound maximizes to exactly
    /// zero over single-source models.
    #[test]
    fn facet_gap_closes_over_the_single_source_network() {
        let sc = parse_scenario(CHSH).unwrap();
        let mut lhs = OutPoly::zero();
        lhs.add_term(OutMono(vec![OutVar::Func(0)]), rat(1));
        lhs.add_term(OutMono(vec![]), rat(-2));
        let (best, _) = max_over_glhv(&sc, &lhs, 4, 9).unwrap();
        assert_eq!(best, rat(0));
    }

    #[test]
    fn evaluation_reports_value_and_satisfaction() {
        let sc = parse_scenario(BILOCAL22).unwrap();
        let family = full_family(None);
        let mut data = CorrelationData::new();
        data.insert("I", rat(2));
        data.insert("J", rat(2));
        // The aligned-sign member reaches 2 at I = J = 2 and is violated.
        let (value, ok) = evaluate(&sc, &family[0], &data, None).unwrap();
        assert_eq!(value, rat(2));
        assert!(!ok);
        // All-zero correlations satisfy every member at value −2.
        let mut zero_data = CorrelationData::new();
        zero_data.insert("I", rat(0));
        zero_data.insert("J", rat(0));
        for member in &family {
            let (value, ok) = evaluate(&sc, member, &zero_data, None).unwrap();
            assert_eq!(value, rat(-2));
            assert!(ok);
        }
        // Functional values resolve from correlator entries when needed.
        let model = constant_model(&sc);
        let full = model_to_correlations(&sc, &model).unwrap();
        let mut correlators_only = CorrelationData::new();
        for (k, v) in &full.values {
            if k.starts_with("E[") {
                correlators_only.insert(k, v.clone());
            }
        }
        assert_eq!(
            functionals_from_data(&sc, &correlators_only).unwrap(),
            vec![rat(4), rat(0)]
        );
        let mut missing = CorrelationData::new();
        missing.insert("I", rat(0));
        assert!(matches!(
            functionals_from_data(&sc, &missing),
            Err(OracleError::MissingValue(_))
        ));
    }

    #[test]
    fn relaxation_needs_maximal_slack_at_the_aligned_point() {
        let sc = parse_scenario(BILOCAL22).unwrap();
        let family = full_family(Some(-2));
        let mut data = CorrelationData::new();
        data.insert("I", rat(2));
        data.insert("J", rat(2));
        assert_eq!(min_relaxation(&sc, &family, &data).unwrap(), rat(1));
        // A boundary point needs no slack.
        let mut boundary = CorrelationData::new();
        boundary.insert("I", rat(4));
        boundary.insert("J", rat(0));
        assert_eq!(min_relaxation(&sc, &family, &boundary).unwrap(), rat(0));
        // Without a slack term a violated member has no finite relaxation.
        let rigid = full_family(None);
        assert!(matches!(
            min_relaxation(&sc, &rigid, &data),
            Err(OracleError::NoFiniteRelaxation(_))
        ));
    }

    #[test]
    fn sqrt_bound_matches_the_family_on_spot_points() {
        let family = full_family(None);
        let grid = vec![
            (rat(4), rat(0)),
            (rat(2), rat(2)),
            (rat(1), rat(1)),
            (rat(-4), rat(0)),
            (ratio(1, 2), ratio(1, 2)),
        ];
        let report = check_equivalence_sqrt_form(&family, &grid);
        assert_eq!(report.points, 5);
        assert!(report.mismatches.is_empty());
        assert!(sqrt_bound_holds(&rat(4), &rat(0)));
        assert!(!sqrt_bound_holds(&rat(2), &rat(2)));
        assert!(sqrt_bound_holds(&rat(1), &rat(1)));
    }

    #[test]
    fn grids_are_rational_and_evenly_spaced() {
        let grid = square_grid(&rat(-4), &rat(4), 81);
        assert_eq!(grid.len(), 81 * 81);
        assert_eq!(grid[0], (rat(-4), rat(-4)));
        assert_eq!(grid[81 * 81 - 1], (rat(4), rat(4)));
        assert_eq!(grid[1].1, &rat(-4) + &ratio(1, 10));
    }
}
