//! Network scenarios: parties, hidden sources, and the graphical
//! independence analysis.
//!
//! A scenario is a bipartite causal structure: independent hidden sources
//! point into measurement parties, every party choosing among a finite set
//! of binary-outcome measurement settings.  The text format parsed here is
//! line-oriented with three sections:
//!
//! ```text
//! [parties]
//! A settings=2
//! B settings=2
//!
//! [sources]
//! L1 -> A,B
//!
//! [functionals]
//! S = E[A0 B0] + E[A0 B1] + E[A1 B0] - E[A1 B1]
//! ```
//!
//! `#` starts a comment, blank lines are skipped, and whitespace is
//! otherwise insignificant.  Functional sections are optional; they declare
//! named affine combinations of correlators used for reporting and bounds.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_traits::Zero;

use crate::ratio::{parse_rat, Rat};

/// A measurement party with a fixed number of binary-outcome settings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Party {
    /// Human-readable label, unique within the scenario.
    pub label: String,
    /// Number of measurement settings (at least 1).
    pub settings: u8,
}

/// A hidden source wired into a set of parties.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Source {
    /// Human-readable name, unique within the scenario.
    pub name: String,
    /// Indices of the parties this source feeds, sorted ascending.
    pub parties: Vec<usize>,
}

/// One term of a declared functional: `coeff * E[vars]`, where each var is
/// a `(party index, setting)` pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionalTerm {
    /// Rational coefficient.
    pub coeff: Rat,
    /// Measurement variables of the correlator, sorted, duplicates rejected
    /// at parse time.  Empty means the unit correlator.
    pub vars: Vec<(usize, u8)>,
}

/// A named affine combination of correlators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Functional {
    /// Declared name.
    pub name: String,
    /// Terms, in declaration order.
    pub terms: Vec<FunctionalTerm>,
}

/// A declared relabeling symmetry: a sign-decorated bijection on the
/// measurement variables under which the declared functional set is closed
/// (each functional maps onto plus or minus a declared functional).
/// Derivation output deduplication identifies inequalities related by
/// declared symmetries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Symmetry {
    /// `(party, setting)` → `(party, setting, flip)`; `flip` negates the
    /// variable.  Every measurement variable appears as a key.
    pub map: BTreeMap<(usize, u8), (usize, u8, bool)>,
}

impl Symmetry {
    /// Image of a sorted variable list: `(sign, mapped sorted vars)`, or
    /// `None` when the image repeats a variable (a non-bijective map, or a
    /// correlator whose variables collide after relabeling).
    #[must_use]
    pub fn apply_vars(&self, vars: &[(usize, u8)]) -> Option<(bool, Vec<(usize, u8)>)> {
        let mut flip = false;
        let mut out = Vec::with_capacity(vars.len());
        for v in vars {
            let &(p, s, f) = self.map.get(v)?;
            flip ^= f;
            out.push((p, s));
        }
        out.sort_unstable();
        if out.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        Some((flip, out))
    }
}

/// A network scenario.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    /// Measurement parties, in declaration order.
    pub parties: Vec<Party>,
    /// Hidden sources, in declaration order.
    pub sources: Vec<Source>,
    /// Declared functionals, in declaration order.
    pub functionals: Vec<Functional>,
    /// Declared relabeling symmetries (possibly empty).
    pub symmetries: Vec<Symmetry>,
}

/// Validation or parse failure for a scenario description.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScenarioError {
    /// A structural rule was violated (duplicate label, empty section, ...).
    Invalid(String),
    /// The text form could not be parsed; carries line number and message.
    Parse {
        /// 1-based line number of the offending line.
        line: usize,
        /// Human-readable description of the problem.
        message: String,
    },
}

impl core::fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ScenarioError::Invalid(msg) => write!(f, "invalid scenario: {msg}"),
            ScenarioError::Parse { line, message } => {
                write!(f, "parse error on line {line}: {message}")
            }
        }
    }
}

impl Scenario {
    /// Builds and validates a scenario from parts.
    ///
    /// # Errors
    /// Rejects empty party lists, duplicate labels or source names, sources
    /// that reference no party or the same party twice, and settings counts
    /// of zero.
    pub fn new(
        parties: Vec<Party>,
        sources: Vec<Source>,
        functionals: Vec<Functional>,
    ) -> Result<Self, ScenarioError> {
        if parties.is_empty() {
            return Err(ScenarioError::Invalid("no parties declared".into()));
        }
        let mut labels = BTreeSet::new();
        for p in &parties {
            if p.settings == 0 {
                return Err(ScenarioError::Invalid(format!(
                    "party {} has zero settings",
                    p.label
                )));
            }
            if !labels.insert(p.label.clone()) {
                return Err(ScenarioError::Invalid(format!(
                    "duplicate party label {}",
                    p.label
                )));
            }
        }
        let mut names = BTreeSet::new();
        for s in &sources {
            if !names.insert(s.name.clone()) {
                return Err(ScenarioError::Invalid(format!(
                    "duplicate source name {}",
                    s.name
                )));
            }
            if s.parties.is_empty() {
                return Err(ScenarioError::Invalid(format!(
                    "source {} feeds no party",
                    s.name
                )));
            }
            let as_set: BTreeSet<usize> = s.parties.iter().copied().collect();
            if as_set.len() != s.parties.len() {
                return Err(ScenarioError::Invalid(format!(
                    "source {} lists a party twice",
                    s.name
                )));
            }
            if let Some(&bad) = s.parties.iter().find(|&&i| i >= parties.len()) {
                return Err(ScenarioError::Invalid(format!(
                    "source {} references unknown party index {bad}",
                    s.name
                )));
            }
        }
        let mut fn_names = BTreeSet::new();
        for func in &functionals {
            if !fn_names.insert(func.name.clone()) {
                return Err(ScenarioError::Invalid(format!(
                    "duplicate functional name {}",
                    func.name
                )));
            }
            for term in &func.terms {
                for &(party, setting) in &term.vars {
                    if party >= parties.len() {
                        return Err(ScenarioError::Invalid(format!(
                            "functional {} references unknown party index {party}",
                            func.name
                        )));
                    }
                    if setting >= parties[party].settings {
                        return Err(ScenarioError::Invalid(format!(
                            "functional {} references setting {setting} of party {}, \
                             which has only {} settings",
                            func.name, parties[party].label, parties[party].settings
                        )));
                    }
                }
            }
        }
        Ok(Scenario {
            parties,
            sources,
            functionals,
            symmetries: Vec::new(),
        })
    }

    /// Attaches declared symmetries after validating each one: the map must
    /// be a sign-decorated bijection on the measurement variables, and every
    /// declared functional must transform into plus or minus a declared
    /// functional (closure, so symmetry deduplication is well defined).
    ///
    /// # Errors
    /// Returns [`ScenarioError::Invalid`] describing the first violation.
    pub fn with_symmetries(mut self, symmetries: Vec<Symmetry>) -> Result<Self, ScenarioError> {
        let all_vars: BTreeSet<(usize, u8)> = self
            .parties
            .iter()
            .enumerate()
            .flat_map(|(p, party)| (0..party.settings).map(move |s| (p, s)))
            .collect();
        for (si, sym) in symmetries.iter().enumerate() {
            let keys: BTreeSet<(usize, u8)> = sym.map.keys().copied().collect();
            let images: BTreeSet<(usize, u8)> =
                sym.map.values().map(|&(p, s, _)| (p, s)).collect();
            if keys != all_vars || images != all_vars {
                return Err(ScenarioError::Invalid(format!(
                    "symmetry {} is not a bijection on the measurement variables",
                    si + 1
                )));
            }
            for func in &self.functionals {
                if self.transform_functional(func, sym).is_none() {
                    return Err(ScenarioError::Invalid(format!(
                        "symmetry {} does not map functional {} onto a declared functional",
                        si + 1,
                        func.name
                    )));
                }
            }
        }
        self.symmetries = symmetries;
        Ok(self)
    }

    /// Image of a functional under a symmetry, as `(functional index, sign
    /// flip)` into the declared list; `None` when the image is not plus or
    /// minus a declared functional.
    #[must_use]
    pub fn transform_functional(
        &self,
        func: &Functional,
        sym: &Symmetry,
    ) -> Option<(usize, bool)> {
        let canon = |terms: &[FunctionalTerm], negate: bool| -> Option<BTreeMap<Vec<(usize, u8)>, Rat>> {
            let mut map: BTreeMap<Vec<(usize, u8)>, Rat> = BTreeMap::new();
            for t in terms {
                let c = if negate { -t.coeff.clone() } else { t.coeff.clone() };
                let e = map.entry(t.vars.clone()).or_insert_with(Rat::zero);
                *e = &*e + &c;
            }
            map.retain(|_, v| !v.is_zero());
            Some(map)
        };
        let mut image: BTreeMap<Vec<(usize, u8)>, Rat> = BTreeMap::new();
        for t in &func.terms {
            let (flip, vars) = sym.apply_vars(&t.vars)?;
            let c = if flip { -t.coeff.clone() } else { t.coeff.clone() };
            let e = image.entry(vars).or_insert_with(Rat::zero);
            *e = &*e + &c;
        }
        image.retain(|_, v| !v.is_zero());
        for (j, g) in self.functionals.iter().enumerate() {
            if canon(&g.terms, false)? == image {
                return Some((j, false));
            }
            if canon(&g.terms, true)? == image {
                return Some((j, true));
            }
        }
        None
    }

    /// Index of the party with the given label.
    #[must_use]
    pub fn party_index(&self, label: &str) -> Option<usize> {
        self.parties.iter().position(|p| p.label == label)
    }

    /// Indices of the sources feeding the given party.
    #[must_use]
    pub fn hidden_parents(&self, party: usize) -> BTreeSet<usize> {
        self.sources
            .iter()
            .enumerate()
            .filter(|(_, s)| s.parties.contains(&party))
            .map(|(i, _)| i)
            .collect()
    }

    /// Union of the hidden parents of a set of parties.
    #[must_use]
    pub fn hidden_parents_of_set(&self, parties: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut parents = BTreeSet::new();
        for &p in parties {
            parents.extend(self.hidden_parents(p));
        }
        parents
    }

    /// Whether the party sets `a` and `b` are d-separated (given nothing).
    ///
    /// The causal graph is bipartite with all arrows pointing from sources
    /// into parties, so every path between two parties runs through a shared
    /// source fork; with an empty conditioning set, colliders block all
    /// longer paths.  Two disjoint party sets are therefore d-separated
    /// exactly when they share no hidden parent.
    #[must_use]
    pub fn d_separated(&self, a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> bool {
        if !a.is_disjoint(b) {
            return false;
        }
        self.hidden_parents_of_set(a)
            .is_disjoint(&self.hidden_parents_of_set(b))
    }

    /// All maximal bipartitions `(S, T)` of party subsets with disjoint
    /// hidden parents.
    ///
    /// A pair is maximal when no further party can be added to either side
    /// without destroying d-separation.  Pairs are unordered; each is
    /// reported once with the lexicographically smaller side first (by the
    /// sorted index sequence).  The list itself is sorted for determinism.
    #[must_use]
    pub fn derive_independencies(&self) -> Vec<(BTreeSet<usize>, BTreeSet<usize>)> {
        let n = self.parties.len();
        let mut seen = BTreeSet::new();
        let mut result = Vec::new();
        // Enumerate assignments of each party to side S (1), side T (2), or
        // neither (0).  Party counts in scenarios of interest are small.
        let total = 3usize.pow(n as u32);
        for code in 0..total {
            let mut s = BTreeSet::new();
            let mut t = BTreeSet::new();
            let mut c = code;
            for party in 0..n {
                match c % 3 {
                    1 => {
                        s.insert(party);
                    }
                    2 => {
                        t.insert(party);
                    }
                    _ => {}
                }
                c /= 3;
            }
            if s.is_empty() || t.is_empty() || !self.d_separated(&s, &t) {
                continue;
            }
            // Maximality: no outside party can join either side.
            let outside: Vec<usize> = (0..n).filter(|p| !s.contains(p) && !t.contains(p)).collect();
            let extendable = outside.iter().any(|&p| {
                let mut s2 = s.clone();
                s2.insert(p);
                if self.d_separated(&s2, &t) {
                    return true;
                }
                let mut t2 = t.clone();
                t2.insert(p);
                self.d_separated(&s, &t2)
            });
            if extendable {
                continue;
            }
            let (first, second) = if s <= t { (s, t) } else { (t, s) };
            if seen.insert((first.clone(), second.clone())) {
                result.push((first, second));
            }
        }
        result.sort();
        result
    }

    /// Whether the scenario admits any joint-level conditional independence
    /// (i.e. at least one d-separated party bipartition).
    #[must_use]
    pub fn has_joint_level_ci(&self) -> bool {
        !self.derive_independencies().is_empty()
    }

    /// Looks up a declared functional by name.
    #[must_use]
    pub fn functional(&self, name: &str) -> Option<&Functional> {
        self.functionals.iter().find(|f| f.name == name)
    }
}

/// Parses the line-oriented scenario format described at module level.
///
/// # Errors
/// Returns [`ScenarioError::Parse`] with a line number for malformed text
/// and [`ScenarioError::Invalid`] for structural violations.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    #[derive(PartialEq)]
    enum Section {
        None,
        Parties,
        Sources,
        Functionals,
        Symmetries,
    }
    let mut section = Section::None;
    let mut parties: Vec<Party> = Vec::new();
    let mut label_to_index: BTreeMap<String, usize> = BTreeMap::new();
    let mut sources: Vec<Source> = Vec::new();
    let mut functionals: Vec<Functional> = Vec::new();
    let mut symmetries: Vec<Symmetry> = Vec::new();

    for (line_no, raw) in text.lines().enumerate() {
        let line_no = line_no + 1;
        let line = match raw.split_once('#') {
            Some((before, _)) => before.trim(),
            None => raw.trim(),
        };
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return Err(ScenarioError::Parse {
                    line: line_no,
                    message: "unterminated section header".into(),
                });
            };
            section = match name.trim() {
                "parties" => Section::Parties,
                "sources" => Section::Sources,
                "functionals" => Section::Functionals,
                "symmetries" => Section::Symmetries,
                other => {
                    return Err(ScenarioError::Parse {
                        line: line_no,
                        message: format!("unknown section [{other}]"),
                    })
                }
            };
            continue;
        }
        match section {
            Section::None => {
                return Err(ScenarioError::Parse {
                    line: line_no,
                    message: "content before any section header".into(),
                })
            }
            Section::Parties => {
                let (label, rest) = match line.split_once(char::is_whitespace) {
                    Some((l, r)) => (l.trim(), r.trim()),
                    None => {
                        return Err(ScenarioError::Parse {
                            line: line_no,
                            message: "expected `LABEL settings=K`".into(),
                        })
                    }
                };
                let Some(settings_str) = rest
                    .strip_prefix("settings")
                    .map(str::trim)
                    .and_then(|r| r.strip_prefix('='))
                else {
                    return Err(ScenarioError::Parse {
                        line: line_no,
                        message: "expected `settings=K` after the party label".into(),
                    });
                };
                let settings: u8 = settings_str.trim().parse().map_err(|_| ScenarioError::Parse {
                    line: line_no,
                    message: format!("bad settings count `{}`", settings_str.trim()),
                })?;
                if !label.chars().all(|c| c.is_ascii_alphabetic()) || label.is_empty() {
                    return Err(ScenarioError::Parse {
                        line: line_no,
                        message: format!("party label `{label}` must be alphabetic"),
                    });
                }
                label_to_index.insert(label.to_string(), parties.len());
                parties.push(Party {
                    label: label.to_string(),
                    settings,
                });
            }
            Section::Sources => {
                let Some((name, targets)) = line.split_once("->") else {
                    return Err(ScenarioError::Parse {
                        line: line_no,
                        message: "expected `NAME -> LABEL,LABEL,...`".into(),
                    });
                };
                let name = name.trim();
                let mut indices = Vec::new();
                for part in targets.split(',') {
                    let label = part.trim();
                    if label.is_empty() {
                        return Err(ScenarioError::Parse {
                            line: line_no,
                            message: "empty party label in source target list".into(),
                        });
                    }
                    let Some(&idx) = label_to_index.get(label) else {
                        return Err(ScenarioError::Parse {
                            line: line_no,
                            message: format!("unknown party `{label}`"),
                        });
                    };
                    indices.push(idx);
                }
                indices.sort_unstable();
                sources.push(Source {
                    name: name.to_string(),
                    parties: indices,
                });
            }
            Section::Functionals => {
                let Some((name, expr)) = line.split_once('=') else {
                    return Err(ScenarioError::Parse {
                        line: line_no,
                        message: "expected `NAME = expression`".into(),
                    });
                };
                let terms = parse_functional_expr(expr, &label_to_index, &parties)
                    .map_err(|message| ScenarioError::Parse {
                        line: line_no,
                        message,
                    })?;
                functionals.push(Functional {
                    name: name.trim().to_string(),
                    terms,
                });
            }
            Section::Symmetries => {
                let map = parse_symmetry_line(line, &label_to_index, &parties).map_err(
                    |message| ScenarioError::Parse {
                        line: line_no,
                        message,
                    },
                )?;
                symmetries.push(Symmetry { map });
            }
        }
    }
    Scenario::new(parties, sources, functionals)?.with_symmetries(symmetries)
}

/// Parses one symmetry line: comma-separated `VAR -> [-]VAR` entries (e.g.
/// `A0 -> A1, A1 -> A0, B1 -> -B1`).  Variables not mentioned map to
/// themselves.
fn parse_symmetry_line(
    line: &str,
    labels: &BTreeMap<String, usize>,
    parties: &[Party],
) -> Result<BTreeMap<(usize, u8), (usize, u8, bool)>, String> {
    let parse_var = |token: &str| -> Result<(usize, u8), String> {
        let split = token
            .find(|c: char| c.is_ascii_digit())
            .ok_or_else(|| format!("bad measurement variable `{token}`"))?;
        let (label, digits) = token.split_at(split);
        let &party = labels
            .get(label)
            .ok_or_else(|| format!("unknown party `{label}`"))?;
        let setting: u8 = digits
            .parse()
            .map_err(|_| format!("bad setting in `{token}`"))?;
        if setting >= parties[party].settings {
            return Err(format!(
                "setting {setting} out of range for party {label}"
            ));
        }
        Ok((party, setting))
    };
    let mut map: BTreeMap<(usize, u8), (usize, u8, bool)> = BTreeMap::new();
    for entry in line.split(',') {
        let Some((from, to)) = entry.split_once("->") else {
            return Err(format!("expected `VAR -> VAR` in `{}`", entry.trim()));
        };
        let from = parse_var(from.trim())?;
        let to = to.trim();
        let (flip, to) = match to.strip_prefix('-') {
            Some(rest) => (true, rest.trim()),
            None => (false, to),
        };
        let (tp, ts) = parse_var(to)?;
        if map.insert(from, (tp, ts, flip)).is_some() {
            return Err("duplicate source variable in symmetry".into());
        }
    }
    for (p, party) in parties.iter().enumerate() {
        for s in 0..party.settings {
            map.entry((p, s)).or_insert((p, s, false));
        }
    }
    Ok(map)
}

/// Parses an affine correlator expression such as
/// `E[A0 B0] + 2*E[A0 B1] - 1/2*E[A1 B1] + E[]`.
fn parse_functional_expr(
    expr: &str,
    labels: &BTreeMap<String, usize>,
    parties: &[Party],
) -> Result<Vec<FunctionalTerm>, String> {
    let mut terms = Vec::new();
    let mut rest = expr.trim();
    let mut sign = Rat::from_integer(1.into());
    let mut first = true;
    while !rest.is_empty() {
        if let Some(r) = rest.strip_prefix('+') {
            if first && terms.is_empty() && r.trim_start().is_empty() {
                return Err("dangling sign".into());
            }
            sign = Rat::from_integer(1.into());
            rest = r.trim_start();
            first = false;
            continue;
        }
        if let Some(r) = rest.strip_prefix('-') {
            sign = Rat::from_integer((-1).into());
            rest = r.trim_start();
            first = false;
            continue;
        }
        // A term: optional `coeff *` followed by a correlator, or a bare
        // coefficient (implicitly times the unit correlator).
        let (coeff, after_coeff) = if rest.starts_with('E') {
            (Rat::from_integer(1.into()), rest)
        } else {
            let end = rest
                .find(|c: char| !(c.is_ascii_digit() || c == '/'))
                .unwrap_or(rest.len());
            let (num, after) = rest.split_at(end);
            let c = parse_rat(num).ok_or_else(|| format!("bad coefficient `{num}`"))?;
            let after = after.trim_start();
            let after = after.strip_prefix('*').map_or(after, str::trim_start);
            (c, after)
        };
        let (vars, after_term) = if let Some(r) = after_coeff.strip_prefix('E') {
            let r = r.trim_start();
            let Some(r) = r.strip_prefix('[') else {
                return Err("expected `[` after E".into());
            };
            let Some(close) = r.find(']') else {
                return Err("unterminated correlator bracket".into());
            };
            let inside = &r[..close];
            let mut vars = Vec::new();
            for token in inside.split_whitespace() {
                let split = token
                    .find(|c: char| c.is_ascii_digit())
                    .ok_or_else(|| format!("bad measurement variable `{token}`"))?;
                let (label, digits) = token.split_at(split);
                let Some(&party) = labels.get(label) else {
                    return Err(format!("unknown party `{label}` in correlator"));
                };
                let setting: u8 = digits
                    .parse()
                    .map_err(|_| format!("bad setting in `{token}`"))?;
                if setting >= parties[party].settings {
                    return Err(format!(
                        "setting {setting} out of range for party {label}"
                    ));
                }
                vars.push((party, setting));
            }
            vars.sort_unstable();
            let mut deduped = vars.clone();
            deduped.dedup();
            if deduped.len() != vars.len() {
                return Err("repeated measurement variable in correlator".into());
            }
            (vars, r[close + 1..].trim_start())
        } else if after_coeff.len() < rest.len() {
            // A bare coefficient: unit correlator.
            (Vec::new(), after_coeff)
        } else {
            return Err(format!("expected a term at `{rest}`"));
        };
        if !sign.is_zero() {
            terms.push(FunctionalTerm {
                coeff: &sign * &coeff,
                vars,
            });
        }
        sign = Rat::from_integer(1.into());
        rest = after_term.trim_start();
        first = false;
        // After a term, the next character must be +, -, or end of input.
        if !rest.is_empty() && !rest.starts_with('+') && !rest.starts_with('-') {
            return Err(format!("unexpected input at `{rest}`"));
        }
    }
    if terms.is_empty() {
        return Err("empty functional expression".into());
    }
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::ratio::{rat, ratio};

    fn set(items: &[usize]) -> BTreeSet<usize> {
        items.iter().copied().collect()
    }

    /// Three parties on a line with two independent sources.
    fn line_three() -> Scenario {
        parse_scenario(
            "[parties]\nA settings=2\nB settings=2\nC settings=2\n\
             [sources]\nL1 -> A,B\nL2 -> B,C\n",
        )
        .unwrap()
    }

    /// Three parties pairwise connected by three sources.
    fn ring_three() -> Scenario {
        parse_scenario(
            "[parties]\nA settings=2\nB settings=2\nC settings=2\n\
             [sources]\nL1 -> A,B\nL2 -> B,C\nL3 -> A,C\n",
        )
        .unwrap()
    }

    #[test]
    fn parses_parties_sources_functionals() {
        let s = parse_scenario(
            "# comment\n[parties]\nA settings=2  # binary pair\nB settings=3\n\
             [sources]\nL -> A, B\n\
             [functionals]\nS = E[A0 B0] + 2*E[A0 B1] - 1/2*E[A1 B2]\n",
        )
        .unwrap();
        assert_eq!(s.parties.len(), 2);
        assert_eq!(s.parties[1].settings, 3);
        assert_eq!(s.sources[0].parties, vec![0, 1]);
        let f = s.functional("S").unwrap();
        assert_eq!(f.terms.len(), 3);
        assert_eq!(f.terms[0].coeff, rat(1));
        assert_eq!(f.terms[1].coeff, rat(2));
        assert_eq!(f.terms[2].coeff, ratio(-1, 2));
        assert_eq!(f.terms[2].vars, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn parse_rejects_malformed_lines() {
        assert!(matches!(
            parse_scenario("[parties]\nA\n"),
            Err(ScenarioError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_scenario("[parties]\nA settings=2\n[sources]\nL -> A,Z\n"),
            Err(ScenarioError::Parse { line: 4, .. })
        ));
        assert!(matches!(
            parse_scenario("[parties]\nA settings=2\n[functionals]\nF = E[A5]\n"),
            Err(ScenarioError::Parse { line: 4, .. })
        ));
        assert!(matches!(
            parse_scenario("[parties]\nA settings=2\n[functionals]\nF = E[A0 A0]\n"),
            Err(ScenarioError::Parse { line: 4, .. })
        ));
        assert!(matches!(
            parse_scenario("stray\n"),
            Err(ScenarioError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn validation_catches_duplicates() {
        assert!(matches!(
            parse_scenario("[parties]\nA settings=2\nA settings=2\n[sources]\nL -> A\n"),
            Err(ScenarioError::Invalid(_))
        ));
        assert!(matches!(
            parse_scenario("[parties]\nA settings=0\n[sources]\nL -> A\n"),
            Err(ScenarioError::Invalid(_))
        ));
    }

    #[test]
    fn hidden_parents_follow_the_wiring() {
        let s = line_three();
        assert_eq!(s.hidden_parents(0), set(&[0]));
        assert_eq!(s.hidden_parents(1), set(&[0, 1]));
        assert_eq!(s.hidden_parents(2), set(&[1]));
    }

    #[test]
    fn d_separation_is_shared_parent_freeness() {
        let s = line_three();
        assert!(s.d_separated(&set(&[0]), &set(&[2])));
        assert!(!s.d_separated(&set(&[0]), &set(&[1])));
        assert!(!s.d_separated(&set(&[0, 1]), &set(&[2])));
        assert!(!s.d_separated(&set(&[0]), &set(&[0])));
    }

    #[test]
    fn line_network_has_the_outer_pair_independence() {
        let s = line_three();
        let inds = s.derive_independencies();
        assert_eq!(inds, vec![(set(&[0]), set(&[2]))]);
        assert!(s.has_joint_level_ci());
    }

    #[test]
    fn ring_network_has_no_joint_level_independence() {
        let s = ring_three();
        assert!(s.derive_independencies().is_empty());
        assert!(!s.has_joint_level_ci());
    }

    #[test]
    fn single_source_pair_has_no_independence() {
        let s = parse_scenario("[parties]\nA settings=2\nB settings=2\n[sources]\nL -> A,B\n")
            .unwrap();
        assert!(!s.has_joint_level_ci());
    }

    #[test]
    fn four_party_two_source_network_splits_ends() {
        let s = parse_scenario(
            "[parties]\nA settings=2\nB settings=2\nC settings=2\nD settings=2\n\
             [sources]\nL1 -> A,B,C\nL2 -> A,C,D\n",
        )
        .unwrap();
        let inds = s.derive_independencies();
        assert_eq!(inds, vec![(set(&[1]), set(&[3]))]);
    }
}
