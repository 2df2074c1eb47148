//! The per-symbol elimination engine.
//!
//! Symbols are removed one at a time from a work queue of branches (row
//! sets under recorded case conditions).  For each symbol, rows split into
//! pools by the certified sign of their symbol coefficient; opposite-sign
//! pools pair into combinations with certified-nonnegative multipliers,
//! which cancels the symbol exactly.  Rows quadratic in the symbol take the
//! square-completion route: the extremal value of a concave row over the
//! symbol domain, with domain-clamped variants emitted under recorded case
//! conditions whenever the extremal point can leave the domain.  Indefinite
//! affine coefficients trigger a closed two-way case split.  Every step is
//! recorded for certificate extraction and replay.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Signed;

use crate::ratio::Rat;

use super::certify::{affine_bounds, certify, region_feasible, Region, RegionBounds, Sign};
use super::poly::{AffineObservable, OutPoly, Poly, RenderCtx};
use super::{DeriveError, DeriveOptions, ParamSymbol, SymKind};

/// How a recorded row came to be.
#[derive(Clone, Debug)]
pub(crate) enum StepOp {
    /// A seed row (facet, domain row, equality side, tie row, ...).
    Input {
        /// Human-readable provenance.
        label: String,
    },
    /// Nonnegative combination of two rows cancelling `sym`.
    Pair {
        /// Step id of the row whose `sym` coefficient is nonnegative.
        pos: usize,
        /// Step id of the row whose `sym` coefficient is nonpositive.
        neg: usize,
        /// The eliminated symbol.
        sym: u32,
        /// Certified-nonnegative multiplier applied to `pos`.
        mult_pos: Poly,
        /// Certified-nonnegative multiplier applied to `neg`.
        mult_neg: Poly,
    },
    /// A sound rewrite of one row (product substitution, aggregate
    /// rewrite, variable change); not replayable generically.
    Rewrite {
        /// Step id of the rewritten row.
        parent: usize,
        /// What the rewrite did.
        label: String,
    },
    /// Square-completion bound of a row concave in `sym`, staying in the
    /// symbolic pipeline: `a2 s^2 + a1 s + a0 >= 0` implies
    /// `(-4 a2) a0 + a1^2 >= 0` when `a2 < 0`.
    VertexPoly {
        /// Step id of the quadratic row.
        parent: usize,
        /// The eliminated symbol.
        sym: u32,
    },
}

/// One recorded derivation step: the operation and the resulting row
/// polynomial (internal sense `poly >= 0`), stored canonically scaled.
#[derive(Clone, Debug)]
pub(crate) struct StepRec {
    pub op: StepOp,
    pub poly: Poly,
}

/// A live row: its polynomial (canonical, `>= 0`) and its step id.
#[derive(Clone, Debug)]
pub(crate) struct Row {
    pub poly: Poly,
    pub step: usize,
}

/// A branch of the case analysis: rows valid under the conjunction of the
/// recorded conditions (each condition asserts `poly >= 0`).
#[derive(Clone, Debug)]
pub(crate) struct Branch {
    pub conds: Vec<Poly>,
    pub rows: Vec<Row>,
    pub seen: BTreeSet<Poly>,
}

impl Branch {
    pub(crate) fn new() -> Self {
        Branch {
            conds: Vec::new(),
            rows: Vec::new(),
            seen: BTreeSet::new(),
        }
    }

    /// Adds a canonical row if unseen; returns whether it was added.
    pub(crate) fn push_row(&mut self, poly: Poly, step: usize) -> bool {
        if poly.is_zero() || !self.seen.insert(poly.clone()) {
            return false;
        }
        self.rows.push(Row { poly, step });
        true
    }
}

/// How a raw output was produced.
#[derive(Clone, Debug)]
pub(crate) enum OutKind {
    /// A symbol-free surviving row.
    Direct,
    /// Extremal value of a concave quadratic row over the symbol domain.
    Vertex {
        sym: u32,
    },
    /// Value of the quadratic row at a domain endpoint, valid under the
    /// recorded condition that the extremal point lies past that endpoint.
    Clamp {
        sym: u32,
        at: Rat,
    },
}

/// An output candidate in the internal `>= 0` sense.
#[derive(Clone, Debug)]
pub(crate) struct RawOutput {
    pub step: usize,
    pub kind: OutKind,
    pub out: OutPoly,
    pub conds: Vec<Poly>,
}

/// Immutable context shared by elimination steps.
pub(crate) struct Ctx<'a> {
    pub symbols: &'a [ParamSymbol],
    pub region: Region<'a>,
    pub names: RenderCtx<'a>,
    pub opts: &'a DeriveOptions,
}

impl Ctx<'_> {
    fn kind(&self, s: u32) -> SymKind {
        self.symbols[s as usize].kind
    }

    /// Degree guards: per monomial, parameter-like symbols (parameters and
    /// aggregates) at combined degree two at most, and at most one
    /// parametric-coordinate symbol.
    fn combo_ok(&self, p: &Poly) -> bool {
        p.max_degree_where(|s| {
            matches!(self.kind(s), SymKind::Parameter | SymKind::Aggregate)
        }) <= 2
            && p.max_degree_where(|s| {
                matches!(self.kind(s), SymKind::Parametric | SymKind::Product)
            }) <= 1
    }
}

/// Mutable recording state shared across the whole derivation.
pub(crate) struct Trace {
    pub steps: Vec<StepRec>,
    pub diags: BTreeMap<String, usize>,
    pub cases_created: usize,
}

impl Trace {
    pub(crate) fn new() -> Self {
        Trace {
            steps: Vec::new(),
            diags: BTreeMap::new(),
            cases_created: 0,
        }
    }

    pub(crate) fn diag(&mut self, reason: &str) {
        *self.diags.entry(String::from(reason)).or_insert(0) += 1;
    }

    pub(crate) fn record(&mut self, op: StepOp, poly: Poly) -> usize {
        self.steps.push(StepRec { op, poly });
        self.steps.len() - 1
    }
}

enum StepOutcome {
    Done(Branch),
    Split(Branch, Branch),
}

/// Eliminates one symbol from every branch.  `is_final` marks the stage
/// where quadratic rows produce observable-only outputs instead of staying
/// symbolic.
pub(crate) fn eliminate_sym(
    branches: Vec<Branch>,
    sym: u32,
    is_final: bool,
    ctx: &Ctx<'_>,
    trace: &mut Trace,
    outputs: &mut Vec<RawOutput>,
) -> Result<Vec<Branch>, DeriveError> {
    let mut pending = branches;
    let mut done = Vec::new();
    while let Some(branch) = pending.pop() {
        match step_branch(branch, sym, is_final, ctx, trace, outputs)? {
            StepOutcome::Done(b) => done.push(b),
            StepOutcome::Split(b1, b2) => {
                trace.cases_created += 2;
                if trace.cases_created > ctx.opts.max_cases {
                    let pivot = b1
                        .conds
                        .last()
                        .map_or_else(String::new, |c| c.render(&ctx.names));
                    return Err(DeriveError::CaseLimit { pivot });
                }
                for b in [b1, b2] {
                    if region_feasible(&b.conds, ctx.region) {
                        pending.push(b);
                    } else {
                        trace.diag("case branch infeasible");
                    }
                }
            }
        }
    }
    // Deterministic order despite the stack-based queue.
    done.sort_by(|a, b| a.conds.cmp(&b.conds));
    Ok(done)
}

fn step_branch(
    branch: Branch,
    sym: u32,
    is_final: bool,
    ctx: &Ctx<'_>,
    trace: &mut Trace,
    outputs: &mut Vec<RawOutput>,
) -> Result<StepOutcome, DeriveError> {
    // First pass: an indefinite affine pivot forces a closed two-way split.
    for row in &branch.rows {
        if row.poly.max_power(sym) != 1 {
            continue;
        }
        let (_, a1, _) = row
            .poly
            .split_quadratic(sym)
            .expect("power one row splits");
        if certify(&a1, &branch.conds, ctx.region) == Sign::Indefinite {
            trace.diag(&format!("case split on pivot {}", a1.render(&ctx.names)));
            let cond_pos = a1.canonical();
            let cond_neg = a1.neg().canonical();
            let mut b1 = branch.clone();
            b1.conds.push(cond_pos);
            let mut b2 = branch;
            b2.conds.push(cond_neg);
            return Ok(StepOutcome::Split(b1, b2));
        }
    }

    let mut next = Branch {
        conds: branch.conds.clone(),
        rows: Vec::new(),
        seen: BTreeSet::new(),
    };
    let mut pos: Vec<(Row, Poly)> = Vec::new();
    let mut neg: Vec<(Row, Poly)> = Vec::new();

    for row in &branch.rows {
        match row.poly.max_power(sym) {
            0 => {
                next.push_row(row.poly.clone(), row.step);
            }
            1 => {
                let (_, a1, _) = row
                    .poly
                    .split_quadratic(sym)
                    .expect("power one row splits");
                match certify(&a1, &branch.conds, ctx.region) {
                    Sign::NonNeg => pos.push((row.clone(), a1)),
                    Sign::NonPos => neg.push((row.clone(), a1)),
                    Sign::Zero => {
                        pos.push((row.clone(), a1.clone()));
                        neg.push((row.clone(), a1));
                    }
                    Sign::Indefinite | Sign::Unknown => {
                        trace.diag("pivot sign not certified");
                    }
                }
            }
            2 => {
                quadratic_row(row, sym, is_final, &branch.conds, ctx, trace, outputs, &mut next);
            }
            _ => trace.diag("degree above two in the eliminated symbol"),
        }
    }

    let attempted = pos.len().saturating_mul(neg.len());
    if attempted > ctx.opts.max_pairs {
        return Err(DeriveError::RowLimit {
            stage: format!("pairing on {}", ctx.names.sym_names[sym as usize]),
            rows: attempted,
        });
    }
    for (prow, pcoeff) in &pos {
        for (nrow, ncoeff) in &neg {
            if prow.step == nrow.step {
                continue;
            }
            let mult_pos = ncoeff.neg();
            let mult_neg = pcoeff.clone();
            let Some(left) = prow.poly.mul(&mult_pos) else {
                trace.diag("pairing multiplies two observable-bearing coefficients");
                continue;
            };
            let Some(right) = nrow.poly.mul(&mult_neg) else {
                trace.diag("pairing multiplies two observable-bearing coefficients");
                continue;
            };
            let combo = left.add(&right);
            if combo.is_zero() {
                continue;
            }
            if combo.max_power(sym) != 0 {
                trace.diag("degenerate pairing left the symbol in place");
                continue;
            }
            if !ctx.combo_ok(&combo) {
                trace.diag("combination exceeds the degree guards");
                continue;
            }
            let canon = combo.canonical();
            if next.seen.contains(&canon) {
                continue;
            }
            // Rows strictly positive over the whole region (not merely under
            // this branch's side conditions) are implied and carry no
            // information.
            if let Some(RegionBounds::Range(Some(lo), _)) =
                affine_bounds(&canon, &[], ctx.region)
            {
                if lo.is_positive() {
                    trace.diag("combination trivially satisfied");
                    continue;
                }
            }
            let step = trace.record(
                StepOp::Pair {
                    pos: prow.step,
                    neg: nrow.step,
                    sym,
                    mult_pos,
                    mult_neg,
                },
                canon.clone(),
            );
            next.push_row(canon, step);
            if next.rows.len() > ctx.opts.max_rows {
                return Err(DeriveError::RowLimit {
                    stage: format!("rows after {}", ctx.names.sym_names[sym as usize]),
                    rows: next.rows.len(),
                });
            }
        }
    }
    Ok(StepOutcome::Done(next))
}

/// Handles a row quadratic in `sym`: final-stage rows over `{sym}` alone
/// become observable-only outputs (extremal value plus gated endpoint
/// clamps); earlier rows take the symbolic square-completion route when the
/// leading coefficient is a negative constant and the linear coefficient is
/// observable-free.
#[allow(clippy::too_many_arguments)]
fn quadratic_row(
    row: &Row,
    sym: u32,
    is_final: bool,
    conds: &[Poly],
    ctx: &Ctx<'_>,
    trace: &mut Trace,
    outputs: &mut Vec<RawOutput>,
    next: &mut Branch,
) {
    let (a2, a1, a0) = row
        .poly
        .split_quadratic(sym)
        .expect("power two row splits");
    let Some(a2c) = a2.as_affine().and_then(|a| a.is_constant().then_some(a.constant)) else {
        trace.diag("quadratic leading coefficient is not constant");
        return;
    };
    if !a2c.is_negative() {
        trace.diag("row is convex in the eliminated symbol");
        return;
    }
    let only_sym = row.poly.syms() == BTreeSet::from([sym]);
    if is_final && only_sym {
        let a1a = a1.as_affine().expect("symbol-free linear part");
        let a0a = a0.as_affine().expect("symbol-free constant part");
        // The extremal value itself, a0 + a1^2 / (-4 a2), so downstream
        // evaluation works directly with the bound on the row's maximum.
        let inv = Rat::from_integer(1.into()) / (-(&a2c) * &Rat::from_integer(4.into()));
        let main = OutPoly::from_affine(&a0a)
            .add(&OutPoly::square_affine(&a1a).scale(&inv));
        outputs.push(RawOutput {
            step: row.step,
            kind: OutKind::Vertex { sym },
            out: main,
            conds: conds.to_vec(),
        });
        emit_clamps(row, sym, &a2c, &a1a, &a0a, conds, ctx, trace, outputs);
        return;
    }
    // Symbolic route: the linear part must stay observable-free so its
    // square remains a symbol polynomial.
    if a1.references_observables() {
        trace.diag("quadratic linear part mixes observables with symbols");
        return;
    }
    let Some(square) = a1.mul(&a1) else {
        trace.diag("quadratic linear part mixes observables with symbols");
        return;
    };
    let scale = -(&a2c) * &Rat::from_integer(4.into());
    let bound = a0.scale(&scale).add(&square);
    if !ctx.combo_ok(&bound) {
        trace.diag("combination exceeds the degree guards");
        return;
    }
    let canon = bound.canonical();
    if next.seen.contains(&canon) {
        return;
    }
    let step = trace.record(
        StepOp::VertexPoly {
            parent: row.step,
            sym,
        },
        canon.clone(),
    );
    next.push_row(canon, step);
}

/// Emits the domain-clamped endpoint variants of a final quadratic row for
/// every side the extremal point can exit, each under the case condition
/// that it does.
#[allow(clippy::too_many_arguments)]
fn emit_clamps(
    row: &Row,
    sym: u32,
    a2c: &Rat,
    a1a: &AffineObservable,
    a0a: &AffineObservable,
    conds: &[Poly],
    ctx: &Ctx<'_>,
    trace: &mut Trace,
    outputs: &mut Vec<RawOutput>,
) {
    let symbol = &ctx.symbols[sym as usize];
    let k = -(a2c) * &Rat::from_integer(2.into()); // extremal point = a1 / k, k > 0
    let a1_poly = Poly::from_affine(a1a.clone());
    let bounds = affine_bounds(&a1_poly, conds, ctx.region);
    let (can_hi, can_lo) = match &bounds {
        Some(RegionBounds::Range(min, max)) => {
            let hi_k = &symbol.hi * &k;
            let lo_k = &symbol.lo * &k;
            (
                max.as_ref().is_none_or(|m| *m > hi_k),
                min.as_ref().is_none_or(|m| *m < lo_k),
            )
        }
        Some(RegionBounds::Empty) => (false, false),
        // No bound available: emit both variants, soundly guarded.
        None => (true, true),
    };
    let mut emit = |endpoint: &Rat, guard: Poly| {
        let value = a0a
            .add(&a1a.scale(endpoint))
            .add(&AffineObservable::constant(a2c * &(endpoint * endpoint)));
        let mut out_conds = conds.to_vec();
        out_conds.push(guard.canonical());
        outputs.push(RawOutput {
            step: row.step,
            kind: OutKind::Clamp {
                sym,
                at: endpoint.clone(),
            },
            out: OutPoly::from_affine(&value),
            conds: out_conds,
        });
    };
    if can_hi {
        // extremal point >= hi  <=>  a1 - k*hi >= 0.
        let guard = a1_poly.add(&Poly::from_affine(AffineObservable::constant(
            -(&(&symbol.hi * &k)),
        )));
        emit(&symbol.hi.clone(), guard);
        trace.diag("domain-clamped variant emitted");
    }
    if can_lo {
        // extremal point <= lo  <=>  k*lo - a1 >= 0.
        let guard = a1_poly.neg().add(&Poly::from_affine(AffineObservable::constant(
            &symbol.lo * &k,
        )));
        emit(&symbol.lo.clone(), guard);
        trace.diag("domain-clamped variant emitted");
    }
}

/// Converts the rows surviving all eliminations into direct outputs.
pub(crate) fn drain_direct_outputs(
    branches: Vec<Branch>,
    trace: &mut Trace,
    outputs: &mut Vec<RawOutput>,
) {
    for branch in branches {
        for row in branch.rows {
            match row.poly.as_affine() {
                Some(a) => outputs.push(RawOutput {
                    step: row.step,
                    kind: OutKind::Direct,
                    out: OutPoly::from_affine(&a),
                    conds: branch.conds.clone(),
                }),
                None => trace.diag("surviving row still references symbols"),
            }
        }
    }
}

/// Recomputes a recorded step from its parents and checks it matches the
/// stored polynomial; used to validate certificates before they ship.
pub(crate) fn replay_step(steps: &[StepRec], idx: usize) -> Result<(), String> {
    match &steps[idx].op {
        StepOp::Input { .. } | StepOp::Rewrite { .. } => Ok(()),
        StepOp::Pair {
            pos,
            neg,
            mult_pos,
            mult_neg,
            sym,
        } => {
            let left = steps[*pos]
                .poly
                .mul(mult_pos)
                .ok_or_else(|| String::from("replay: invalid multiplier"))?;
            let right = steps[*neg]
                .poly
                .mul(mult_neg)
                .ok_or_else(|| String::from("replay: invalid multiplier"))?;
            let combo = left.add(&right).canonical();
            if combo != steps[idx].poly {
                return Err(format!("replay mismatch at step {idx}"));
            }
            if combo.max_power(*sym) != 0 {
                return Err(format!("replay: symbol survives at step {idx}"));
            }
            Ok(())
        }
        StepOp::VertexPoly { parent, sym } => {
            let (a2, a1, a0) = steps[*parent]
                .poly
                .split_quadratic(*sym)
                .ok_or_else(|| String::from("replay: parent not quadratic"))?;
            let a2c = a2
                .as_affine()
                .and_then(|a| a.is_constant().then_some(a.constant))
                .ok_or_else(|| String::from("replay: leading coefficient not constant"))?;
            let square = a1
                .mul(&a1)
                .ok_or_else(|| String::from("replay: linear part not squarable"))?;
            let scale = -(&a2c) * &Rat::from_integer(4.into());
            let bound = a0.scale(&scale).add(&square).canonical();
            if bound != steps[idx].poly {
                return Err(format!("replay mismatch at step {idx}"));
            }
            Ok(())
        }
    }
}
