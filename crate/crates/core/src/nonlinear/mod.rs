//! Derivation of observable-only polynomial inequalities.
//!
//! The hidden-source structure of a network scenario forces products of
//! unobservable correlators to factorize.  Treating one factor side of each
//! factorization as free bounded parameters turns the facet description of
//! the reachable moment region into inequality rows whose coefficients are
//! polynomials in those parameters.  The remaining unobservable coordinates
//! are then removed one at a time by parametric Fourier–Motzkin pairing
//! (with certified multiplier signs and recorded case splits), and the
//! parameters themselves fall to exact quadratic extremization over their
//! domain intervals — leaving polynomial inequalities over the declared
//! observable functionals alone.
//!
//! Every step of a derivation is recorded and replayed before an inequality
//! ships, and every shipped inequality is re-checked on all extreme points
//! of the reachable region.  All arithmetic is exact.

pub mod certify;
mod eliminate;
pub mod poly;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::linalg::{dot, solve_linear};
use crate::linear::dd::facets_of_points;
use crate::linear::LinIneq;
use crate::moment::{
    build_basis, classify_components, functional_coefficients, independence_constraints,
    MomentError, Restriction,
};
use crate::linear::project::scenario_vertices;
use crate::ratio::{rat, render_rat, Rat};
use crate::scenario::Scenario;

use certify::{affine_bounds, Layout, Region, RegionBounds};
use eliminate::{
    drain_direct_outputs, eliminate_sym, replay_step, Branch, Ctx, OutKind, RawOutput, StepOp,
    StepRec, Trace,
};
use poly::{AffineObservable, Mono, OutPoly, Poly, RenderCtx};

/// Role of an elimination symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymKind {
    /// A bounded factor promoted from a moment coordinate; removed last,
    /// through quadratic extremization over its domain.
    Parameter,
    /// A factor coordinate removed by plain parametric pairing, one at a
    /// time, before the parameters.
    Parametric,
    /// A joint-product coordinate kept symbolic under relaxed
    /// factorization (tied to its factor product by slack rows).
    Product,
    /// An affine combination of parameters introduced when several
    /// parameters survive to the final stage.
    Aggregate,
}

/// One elimination symbol with its exact domain interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamSymbol {
    /// Display name (the correlator it stands for, or a generated name).
    pub name: String,
    /// Domain lower endpoint.
    pub lo: Rat,
    /// Domain upper endpoint.
    pub hi: Rat,
    /// Elimination role.
    pub kind: SymKind,
    /// Coordinate of the symbol in the reduced vertex vectors, when the
    /// region is vertex-backed.
    pub coord: Option<usize>,
}

/// A factorized joint product: the reduced coordinate carrying the joint
/// correlator and the symbol ids of its two factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductDef {
    /// Reduced coordinate of the joint product correlator.
    pub coord: usize,
    /// Symbol id of the first factor.
    pub u: u32,
    /// Symbol id of the second factor.
    pub w: u32,
    /// Display name (the joint correlator).
    pub name: String,
}

/// Failure modes of the derivation pipeline.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeriveError {
    /// The scenario declares no functionals to express outputs in.
    NeedFunctionals,
    /// The scenario has no joint-level conditional independence, so there
    /// is nothing to factorize.
    NoJointLevelCi,
    /// A declared functional references correlators outside the observable
    /// set.
    FunctionalNotObservable(String),
    /// Moment-space construction failed.
    Moment(MomentError),
    /// Row growth exceeded the configured bound.
    RowLimit {
        /// Stage description.
        stage: String,
        /// Row or pair count reached.
        rows: usize,
    },
    /// Case splitting exceeded the configured bound.
    CaseLimit {
        /// The pivot expression that forced the split past the limit.
        pivot: String,
    },
    /// A polynomial exceeds the supported degree in the parameter.
    UnsupportedDegree {
        /// Observed degree.
        degree: usize,
    },
    /// Quadratic parameter elimination requires a convex inequality with a
    /// constant leading coefficient.
    NonConvex {
        /// What was wrong with the leading coefficient.
        detail: String,
    },
    /// The inequality still references symbols other than the parameter
    /// being eliminated.
    ResidualSymbols {
        /// Names of the offending symbols.
        detail: String,
    },
    /// Internal invariant failure: a certificate failed to replay, or an
    /// output failed re-validation on the region's extreme points.
    Internal(String),
}

impl core::fmt::Display for DeriveError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            DeriveError::NeedFunctionals => {
                write!(f, "the scenario declares no functionals to express outputs in")
            }
            DeriveError::NoJointLevelCi => {
                write!(f, "no joint-level conditional independence in this scenario")
            }
            DeriveError::FunctionalNotObservable(name) => {
                write!(f, "functional `{name}` references non-observable correlators")
            }
            DeriveError::Moment(e) => write!(f, "{e}"),
            DeriveError::RowLimit { stage, rows } => {
                write!(f, "row limit exceeded at {stage}: {rows} rows")
            }
            DeriveError::CaseLimit { pivot } => {
                write!(f, "case limit exceeded while splitting on `{pivot}`")
            }
            DeriveError::UnsupportedDegree { degree } => {
                write!(f, "parameter degree {degree} is not supported (limit 2)")
            }
            DeriveError::NonConvex { detail } => {
                write!(f, "quadratic elimination requires a convex inequality: {detail}")
            }
            DeriveError::ResidualSymbols { detail } => {
                write!(f, "other symbols must be eliminated first: {detail}")
            }
            DeriveError::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

impl From<MomentError> for DeriveError {
    fn from(e: MomentError) -> Self {
        match e {
            MomentError::NoJointLevelIndependence => DeriveError::NoJointLevelCi,
            other => DeriveError::Moment(other),
        }
    }
}

/// Tunable limits and modes of a derivation.
#[derive(Clone, Debug)]
pub struct DeriveOptions {
    /// Replace each factorization by the slack-bounded pair
    /// `|product − u·w| ≤ C`, carrying the slack magnitude symbolically
    /// into the outputs.
    pub relax: bool,
    /// Carry factor parameters in probability scale (domains inside
    /// `[0, 1]`) instead of correlator scale.  The derivation is related by
    /// an affine change of variables and produces identical outputs.
    pub full_linearization: bool,
    /// Deduplicate outputs related by the scenario's declared relabeling
    /// symmetries.
    pub symmetry_dedup: bool,
    /// Maximum rows a branch may hold after one elimination stage.
    pub max_rows: usize,
    /// Maximum case branches one derivation may create.
    pub max_cases: usize,
    /// Maximum opposite-sign row pairs attempted in one stage.
    pub max_pairs: usize,
}

impl Default for DeriveOptions {
    fn default() -> Self {
        DeriveOptions {
            relax: false,
            full_linearization: false,
            symmetry_dedup: true,
            max_rows: 20_000,
            max_cases: 64,
            max_pairs: 200_000,
        }
    }
}

/// An inequality still referencing elimination symbols: `lhs ≤ 0` under the
/// conjunction of the case conditions (each `case ≥ 0`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParametricInequality {
    /// Left-hand side (sense `lhs ≤ 0`), canonically scaled.
    pub lhs: Poly,
    /// Case conditions, each asserting `case ≥ 0`.
    pub cases: Vec<Poly>,
    /// Human-readable form of the inequality.
    pub rendered: String,
    /// Human-readable forms of the case conditions.
    pub case_strings: Vec<String>,
}

/// A shipped observable-only inequality: `lhs ≤ 0` over the declared
/// functionals (and the slack magnitude, in relaxed derivations), under the
/// conjunction of the case conditions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolynomialInequality {
    /// Left-hand side (sense `lhs ≤ 0`), at the scale the elimination
    /// produced it: quadratic outputs carry their row's negated extremal
    /// value, so evaluation compares directly against relaxation bounds.
    pub lhs: OutPoly,
    /// Observable case conditions, each asserting `case ≥ 0`.
    pub cases: Vec<OutPoly>,
    /// Human-readable form of the inequality.
    pub rendered: String,
    /// Human-readable forms of all case conditions (a superset of `cases`
    /// when a condition cannot be expressed over observables alone).
    pub case_strings: Vec<String>,
    /// Replayable derivation chain, one line per recorded step.
    pub certificate: Vec<String>,
}

/// Result of a full derivation.
#[derive(Clone, Debug)]
pub struct Derivation {
    /// Declared functional names, aligned with output variable indices.
    pub functional_names: Vec<String>,
    /// The elimination symbol table (parameters, parametric coordinates,
    /// products, aggregates).
    pub symbols: Vec<ParamSymbol>,
    /// The shipped inequalities, deterministically ordered.
    pub inequalities: Vec<PolynomialInequality>,
    /// Counts of suppressed or skipped items, keyed by reason.
    pub diagnostics: BTreeMap<String, usize>,
}

/// The reduced geometric description a derivation works on: extreme points
/// and facets of the moment region projected onto (unit, functionals,
/// factor coordinates, joint-product coordinates).
#[derive(Clone, Debug)]
pub struct Reduction {
    /// Declared functional names.
    pub func_names: Vec<String>,
    /// Parameter and parametric-coordinate symbols (products are appended
    /// by the relaxed linearization).
    pub symbols: Vec<ParamSymbol>,
    /// Factorized joint products.
    pub products: Vec<ProductDef>,
    /// Extreme points of the reduced region, unit coordinate first.
    pub verts: Vec<Vec<Rat>>,
    /// Facets of the reduced region.
    pub facets: Vec<LinIneq>,
    /// Affine-hull equalities of the reduced region.
    pub equalities: Vec<LinIneq>,
    /// Facets of the projection onto the parametric coordinates alone.
    pub parametric_facets: Vec<LinIneq>,
    /// Width of a reduced vertex or facet row.
    pub width: usize,
}

/// Projects the scenario's moment region onto the coordinates the
/// derivation needs: the unit, the declared functionals, the factor
/// coordinates of every independence constraint, and the joint products.
///
/// # Errors
/// Fails when the scenario declares no functionals, has no joint-level
/// conditional independence, a functional touches non-observable
/// correlators, or the moment basis cannot be built.
pub fn reduce(scenario: &Scenario, restriction: &Restriction) -> Result<Reduction, DeriveError> {
    if scenario.functionals.is_empty() {
        return Err(DeriveError::NeedFunctionals);
    }
    let basis = build_basis(scenario, restriction)?;
    let constraints = independence_constraints(scenario, &basis)?;
    let partition = classify_components(scenario, &basis, &constraints);
    let obs: BTreeSet<usize> = partition.observables.iter().copied().collect();

    let mut func_names = Vec::new();
    let mut func_vecs: Vec<Vec<Rat>> = Vec::new();
    for func in &scenario.functionals {
        let coeffs = functional_coefficients(scenario, &basis, &func.name)?;
        if coeffs.iter().enumerate().any(|(i, c)| !c.is_zero() && !obs.contains(&i)) {
            return Err(DeriveError::FunctionalNotObservable(func.name.clone()));
        }
        func_names.push(func.name.clone());
        func_vecs.push(coeffs);
    }
    let n_funcs = func_names.len();

    let mut symbols: Vec<ParamSymbol> = Vec::new();
    let mut kept: Vec<usize> = Vec::new();
    let mut sym_of_coord: BTreeMap<usize, u32> = BTreeMap::new();
    let push_symbol = |symbols: &mut Vec<ParamSymbol>,
                           kept: &mut Vec<usize>,
                           sym_of_coord: &mut BTreeMap<usize, u32>,
                           basis_coord: usize,
                           kind: SymKind| {
        let reduced = 1 + n_funcs + kept.len();
        sym_of_coord.insert(basis_coord, symbols.len() as u32);
        kept.push(basis_coord);
        symbols.push(ParamSymbol {
            name: basis.correlator(basis_coord).render(scenario),
            lo: rat(-1),
            hi: rat(1),
            kind,
            coord: Some(reduced),
        });
    };
    for &c in &partition.parameters {
        push_symbol(&mut symbols, &mut kept, &mut sym_of_coord, c, SymKind::Parameter);
    }
    for &c in &partition.parametric_coords {
        push_symbol(&mut symbols, &mut kept, &mut sym_of_coord, c, SymKind::Parametric);
    }

    let mut products: Vec<ProductDef> = Vec::new();
    let mut seen_products: BTreeSet<usize> = BTreeSet::new();
    for con in &constraints {
        if !seen_products.insert(con.left) {
            continue;
        }
        let (Some(&u), Some(&w)) = (sym_of_coord.get(&con.factor1), sym_of_coord.get(&con.factor2))
        else {
            return Err(DeriveError::Internal(String::from(
                "a factorization factor is not a parameter or parametric coordinate",
            )));
        };
        let reduced = 1 + n_funcs + kept.len();
        kept.push(con.left);
        products.push(ProductDef {
            coord: reduced,
            u,
            w,
            name: basis.correlator(con.left).render(scenario),
        });
    }

    let width = 1 + n_funcs + kept.len();
    let full = scenario_vertices(scenario, &basis);
    let mut vert_set: BTreeSet<Vec<Rat>> = BTreeSet::new();
    for v in &full {
        let mut reduced = Vec::with_capacity(width);
        reduced.push(Rat::one());
        for fv in &func_vecs {
            reduced.push(dot(fv, v));
        }
        for &c in &kept {
            reduced.push(v[c].clone());
        }
        vert_set.insert(reduced);
    }
    let verts: Vec<Vec<Rat>> = vert_set.into_iter().collect();
    let hull = facets_of_points(&verts, width);

    let parametric_positions: Vec<usize> = symbols
        .iter()
        .filter(|s| s.kind == SymKind::Parametric)
        .map(|s| s.coord.expect("reduced symbols carry coordinates"))
        .collect();
    let parametric_facets = if parametric_positions.is_empty() {
        Vec::new()
    } else {
        let mut proj_set: BTreeSet<Vec<Rat>> = BTreeSet::new();
        for v in &verts {
            let mut p = Vec::with_capacity(1 + parametric_positions.len());
            p.push(Rat::one());
            for &c in &parametric_positions {
                p.push(v[c].clone());
            }
            proj_set.insert(p);
        }
        let proj: Vec<Vec<Rat>> = proj_set.into_iter().collect();
        let sub = facets_of_points(&proj, 1 + parametric_positions.len());
        sub.facets
            .iter()
            .map(|row| {
                let mut coeffs = vec![Rat::zero(); width];
                coeffs[0] = row.coeffs[0].clone();
                for (j, &c) in parametric_positions.iter().enumerate() {
                    coeffs[c] = row.coeffs[1 + j].clone();
                }
                LinIneq::new(coeffs)
            })
            .collect()
    };

    Ok(Reduction {
        func_names,
        symbols,
        products,
        verts,
        facets: hull.facets,
        equalities: hull.equalities,
        parametric_facets,
        width,
    })
}

/// A fully linearized derivation state: symbol table, seed rows, and the
/// vertex-backed region description.
struct LinearizedSystem {
    func_names: Vec<String>,
    symbols: Vec<ParamSymbol>,
    sym_names: Vec<String>,
    rows: Vec<(String, Poly)>,
    verts: Vec<Vec<Rat>>,
    layout: Layout,
}

/// How one reduced coordinate enters the polynomial rows.
enum CoordRepr {
    Unit,
    Func(usize),
    Sym(u32),
    ProductMono(u32, u32),
}

fn linearize(red: &Reduction, opts: &DeriveOptions) -> LinearizedSystem {
    let n_funcs = red.func_names.len();
    let mut symbols = red.symbols.clone();
    let mut product_sym: BTreeMap<usize, u32> = BTreeMap::new();
    if opts.relax {
        for p in &red.products {
            product_sym.insert(p.coord, symbols.len() as u32);
            symbols.push(ParamSymbol {
                name: p.name.clone(),
                lo: rat(-1),
                hi: rat(1),
                kind: SymKind::Product,
                coord: Some(p.coord),
            });
        }
    }

    let mut repr: Vec<CoordRepr> = Vec::with_capacity(red.width);
    repr.push(CoordRepr::Unit);
    for i in 0..n_funcs {
        repr.push(CoordRepr::Func(i));
    }
    for _ in 1 + n_funcs..red.width {
        repr.push(CoordRepr::Unit); // placeholder until assigned below
    }
    for (id, s) in red.symbols.iter().enumerate() {
        repr[s.coord.expect("reduced symbols carry coordinates")] = CoordRepr::Sym(id as u32);
    }
    for p in &red.products {
        repr[p.coord] = match product_sym.get(&p.coord) {
            Some(&id) => CoordRepr::Sym(id),
            None => CoordRepr::ProductMono(p.u, p.w),
        };
    }

    let lin_to_poly = |row: &LinIneq| -> Poly {
        let mut out = Poly::zero();
        for (c, coeff) in row.coeffs.iter().enumerate() {
            if coeff.is_zero() {
                continue;
            }
            match &repr[c] {
                CoordRepr::Unit => {
                    out.add_term(Mono::unit(), AffineObservable::constant(coeff.clone()));
                }
                CoordRepr::Func(i) => {
                    out.add_term(Mono::unit(), AffineObservable::func(*i).scale(coeff));
                }
                CoordRepr::Sym(s) => {
                    out.add_term(Mono::sym(*s), AffineObservable::constant(coeff.clone()));
                }
                CoordRepr::ProductMono(u, w) => {
                    let mut m = vec![*u, *w];
                    m.sort_unstable();
                    out.add_term(Mono(m), AffineObservable::constant(coeff.clone()));
                }
            }
        }
        out
    };

    let mut rows: Vec<(String, Poly)> = Vec::new();
    for f in &red.facets {
        rows.push((String::from("facet"), lin_to_poly(f)));
    }
    for e in &red.equalities {
        let p = lin_to_poly(e);
        rows.push((String::from("equality"), p.clone()));
        rows.push((String::from("equality"), p.neg()));
    }
    for f in &red.parametric_facets {
        rows.push((String::from("projected facet"), lin_to_poly(f)));
    }
    for (id, s) in symbols.iter().enumerate() {
        if !matches!(s.kind, SymKind::Parametric | SymKind::Product) {
            continue;
        }
        let id = id as u32;
        let upper = Poly::sym(id)
            .neg()
            .add(&Poly::from_affine(AffineObservable::constant(s.hi.clone())));
        let lower = Poly::sym(id)
            .add(&Poly::from_affine(AffineObservable::constant(-s.lo.clone())));
        rows.push((String::from("domain"), upper));
        rows.push((String::from("domain"), lower));
    }
    if opts.relax {
        for p in &red.products {
            let m = product_sym[&p.coord];
            let mut uw = vec![p.u, p.w];
            uw.sort_unstable();
            let mut tie_minus = Poly::zero(); // C - m + u*w >= 0
            let mut slack = AffineObservable::zero();
            slack.relax = Rat::one();
            tie_minus.add_term(Mono::unit(), slack.clone());
            tie_minus.add_term(Mono::sym(m), AffineObservable::constant(rat(-1)));
            tie_minus.add_term(Mono(uw.clone()), AffineObservable::constant(rat(1)));
            let mut tie_plus = Poly::zero(); // C + m - u*w >= 0
            tie_plus.add_term(Mono::unit(), slack);
            tie_plus.add_term(Mono::sym(m), AffineObservable::constant(rat(1)));
            tie_plus.add_term(Mono(uw), AffineObservable::constant(rat(-1)));
            rows.push((String::from("slack tie"), tie_minus));
            rows.push((String::from("slack tie"), tie_plus));
        }
    }

    let mut verts = red.verts.clone();
    if opts.full_linearization {
        // Change every symbol to probability scale: s = 2 s' - 1.
        let two = rat(2);
        let minus_one = rat(-1);
        let half = Rat::new(1.into(), 2.into());
        for id in 0..symbols.len() {
            for (_, p) in rows.iter_mut() {
                *p = p.subst_sym_affine(id as u32, &two, &minus_one);
            }
            let s = &mut symbols[id];
            s.lo = (&s.lo + &Rat::one()) * &half;
            s.hi = (&s.hi + &Rat::one()) * &half;
            let coord = s.coord.expect("reduced symbols carry coordinates");
            for v in &mut verts {
                v[coord] = &(&v[coord] + &Rat::one()) * &half;
            }
        }
    }

    let layout = Layout {
        n_funcs,
        sym_coords: symbols
            .iter()
            .map(|s| s.coord.expect("reduced symbols carry coordinates"))
            .collect(),
        width: red.width,
    };
    let sym_names = symbols.iter().map(|s| s.name.clone()).collect();
    LinearizedSystem {
        func_names: red.func_names.clone(),
        symbols,
        sym_names,
        rows,
        verts,
        layout,
    }
}

fn seed_branch(sys: &LinearizedSystem, trace: &mut Trace) -> Branch {
    let names = RenderCtx {
        sym_names: &sys.sym_names,
        func_names: &sys.func_names,
    };
    let mut branch = Branch::new();
    for (label, p) in &sys.rows {
        let canon = p.canonical();
        if canon.is_zero() {
            continue;
        }
        let step = trace.record(
            StepOp::Input {
                label: format!("{label}: {} >= 0", canon.render(&names)),
            },
            canon.clone(),
        );
        branch.push_row(canon, step);
    }
    branch
}

/// Adds the domain rows of the listed symbols to every branch.
fn add_domain_rows(sys: &LinearizedSystem, branches: &mut [Branch], ids: &[u32], trace: &mut Trace) {
    let names = RenderCtx {
        sym_names: &sys.sym_names,
        func_names: &sys.func_names,
    };
    for &id in ids {
        let s = &sys.symbols[id as usize];
        let upper = Poly::sym(id)
            .neg()
            .add(&Poly::from_affine(AffineObservable::constant(s.hi.clone())))
            .canonical();
        let lower = Poly::sym(id)
            .add(&Poly::from_affine(AffineObservable::constant(-s.lo.clone())))
            .canonical();
        for p in [upper, lower] {
            if p.is_zero() {
                continue;
            }
            let step = trace.record(
                StepOp::Input {
                    label: format!("domain: {} >= 0", p.render(&names)),
                },
                p.clone(),
            );
            for b in branches.iter_mut() {
                b.push_row(p.clone(), step);
            }
        }
    }
}

fn run_stage(
    sys: &LinearizedSystem,
    branches: Vec<Branch>,
    sym: u32,
    is_final: bool,
    opts: &DeriveOptions,
    trace: &mut Trace,
    outputs: &mut Vec<RawOutput>,
) -> Result<Vec<Branch>, DeriveError> {
    let names = RenderCtx {
        sym_names: &sys.sym_names,
        func_names: &sys.func_names,
    };
    let ctx = Ctx {
        symbols: &sys.symbols,
        region: Region::Hull {
            verts: &sys.verts,
            layout: &sys.layout,
        },
        names,
        opts,
    };
    eliminate_sym(branches, sym, is_final, &ctx, trace, outputs)
}

/// One observable slot of a row: the basis element its parameter-polynomial
/// coefficient multiplies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Slot {
    Constant,
    Func(usize),
    Relax,
}

fn slot_unit(slot: Slot) -> AffineObservable {
    match slot {
        Slot::Constant => AffineObservable::constant(Rat::one()),
        Slot::Func(i) => AffineObservable::func(i),
        Slot::Relax => {
            let mut a = AffineObservable::zero();
            a.relax = Rat::one();
            a
        }
    }
}

/// Splits a row into per-slot polynomials over the symbols (all with
/// constant coefficients).
fn slot_decompose(p: &Poly) -> BTreeMap<Slot, Poly> {
    let mut slots: BTreeMap<Slot, Poly> = BTreeMap::new();
    for (mono, aff) in p.terms() {
        if !aff.constant.is_zero() {
            slots
                .entry(Slot::Constant)
                .or_insert_with(Poly::zero)
                .add_term(mono.clone(), AffineObservable::constant(aff.constant.clone()));
        }
        for (i, c) in &aff.funcs {
            slots
                .entry(Slot::Func(*i))
                .or_insert_with(Poly::zero)
                .add_term(mono.clone(), AffineObservable::constant(c.clone()));
        }
        if !aff.relax.is_zero() {
            slots
                .entry(Slot::Relax)
                .or_insert_with(Poly::zero)
                .add_term(mono.clone(), AffineObservable::constant(aff.relax.clone()));
        }
    }
    slots
}

fn constant_coeff_of(p: &Poly, m: &Mono) -> Rat {
    p.terms()
        .find(|(mm, _)| *mm == m)
        .map(|(_, c)| c.constant.clone())
        .unwrap_or_else(Rat::zero)
}

/// Rewrites a row in terms of two affine aggregates of the parameters.
/// Returns `None` when some slot polynomial lies outside the span of
/// `{1, a, b, a², ab, b²}`; rows free of the parameters pass unchanged.
fn rewrite_in_aggregates(
    p: &Poly,
    params: &BTreeSet<u32>,
    a: &Poly,
    b: &Poly,
    ga: u32,
    gb: u32,
) -> Option<Poly> {
    let syms = p.syms();
    if syms.iter().all(|s| !params.contains(s)) {
        return Some(p.clone());
    }
    if !syms.iter().all(|s| params.contains(s)) {
        return None;
    }
    let one = Poly::from_affine(AffineObservable::constant(Rat::one()));
    let expansions = [
        one,
        a.clone(),
        b.clone(),
        a.mul(a).expect("aggregates have constant coefficients"),
        a.mul(b).expect("aggregates have constant coefficients"),
        b.mul(b).expect("aggregates have constant coefficients"),
    ];
    let slots = slot_decompose(p);
    let mut monos: BTreeSet<Mono> = BTreeSet::new();
    for e in &expansions {
        for (m, _) in e.terms() {
            monos.insert(m.clone());
        }
    }
    for sp in slots.values() {
        for (m, _) in sp.terms() {
            monos.insert(m.clone());
        }
    }
    let monos: Vec<Mono> = monos.into_iter().collect();
    let matrix: Vec<Vec<Rat>> = monos
        .iter()
        .map(|m| expansions.iter().map(|e| constant_coeff_of(e, m)).collect())
        .collect();
    let aggregate_monos = [
        Mono::unit(),
        Mono::sym(ga),
        Mono::sym(gb),
        Mono(vec![ga, ga]),
        Mono(vec![ga, gb]),
        Mono(vec![gb, gb]),
    ];
    let mut out = Poly::zero();
    for (slot, sp) in &slots {
        let rhs: Vec<Rat> = monos.iter().map(|m| constant_coeff_of(sp, m)).collect();
        let solution = solve_linear(&matrix, &rhs)?;
        let mut check = Poly::zero();
        for (j, x) in solution.iter().enumerate() {
            if !x.is_zero() {
                check = check.add(&expansions[j].scale(x));
            }
        }
        if &check != sp {
            return None;
        }
        for (j, x) in solution.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            out.add_term(aggregate_monos[j].clone(), slot_unit(*slot).scale(x));
        }
    }
    Some(out)
}

/// Evaluates a constant-coefficient, symbol-affine polynomial at a vertex.
fn eval_sym_affine(p: &Poly, v: &[Rat], layout: &Layout) -> Rat {
    let mut total = Rat::zero();
    for (mono, c) in p.terms() {
        match mono.0.len() {
            0 => total = &total + &c.constant,
            1 => {
                let coord = layout.sym_coords[mono.0[0] as usize];
                total = &total + &(&c.constant * &v[coord]);
            }
            _ => unreachable!("aggregate candidates are affine"),
        }
    }
    total
}

/// Canonical, sign-normalized form of an aggregate candidate: primitive
/// integer coefficients with the first nonzero coefficient positive.
fn normalize_candidate(p: &Poly) -> Poly {
    let canon = p.canonical();
    let first_negative = canon
        .terms()
        .find(|(_, c)| !c.constant.is_zero())
        .is_some_and(|(_, c)| c.constant.is_negative());
    if first_negative {
        canon.neg()
    } else {
        canon
    }
}

/// Whether the linear parts of two symbol-affine forms are linearly
/// independent (so `{1, a, b}` spans a plane of affine functions).
fn affinely_independent(a: &Poly, b: &Poly, params: &[u32]) -> bool {
    let coeff = |p: &Poly, s: u32| constant_coeff_of(p, &Mono::sym(s));
    let la: Vec<Rat> = params.iter().map(|&s| coeff(a, s)).collect();
    let lb: Vec<Rat> = params.iter().map(|&s| coeff(b, s)).collect();
    let Some(k) = la.iter().position(|x| !x.is_zero()) else {
        return false;
    };
    let factor = &lb[k] / &la[k];
    (0..params.len()).any(|i| !(&lb[i] - &(&factor * &la[i])).is_zero())
}

/// Picks the aggregate pair: two affinely independent candidate forms
/// maximizing the number of observable-bearing rows fully expressible in
/// their span, ties broken toward the earliest candidate pair.
fn choose_aggregates(
    sys: &LinearizedSystem,
    branches: &[Branch],
    params: &[u32],
) -> Option<(Poly, Poly)> {
    let pset: BTreeSet<u32> = params.iter().copied().collect();
    let mut cands: BTreeSet<Poly> = BTreeSet::new();
    for branch in branches {
        for row in &branch.rows {
            for sp in slot_decompose(&row.poly).values() {
                if !sp.is_sym_affine() {
                    continue;
                }
                let syms = sp.syms();
                if syms.is_empty() || !syms.iter().all(|s| pset.contains(s)) {
                    continue;
                }
                cands.insert(normalize_candidate(sp));
            }
        }
    }
    for &s in params {
        cands.insert(Poly::sym(s));
    }
    let cands: Vec<Poly> = cands.into_iter().collect();
    let ga = sys.symbols.len() as u32;
    let gb = ga + 1;
    let mut best: Option<(usize, usize, usize)> = None; // (count, i, j)
    for i in 0..cands.len() {
        for j in i + 1..cands.len() {
            if !affinely_independent(&cands[i], &cands[j], params) {
                continue;
            }
            let mut count = 0usize;
            for branch in branches {
                for row in &branch.rows {
                    if !row.poly.references_observables() {
                        continue;
                    }
                    if rewrite_in_aggregates(&row.poly, &pset, &cands[i], &cands[j], ga, gb)
                        .is_some()
                    {
                        count += 1;
                    }
                }
            }
            if count > 0 && best.as_ref().is_none_or(|&(c, _, _)| count > c) {
                best = Some((count, i, j));
            }
        }
    }
    best.map(|(_, i, j)| (cands[i].clone(), cands[j].clone()))
}

/// Final elimination when several parameters survive: rewrite the rows in
/// two affine aggregates of the parameters, bound the aggregates by the
/// facets of their joint image over the region's extreme points, and
/// eliminate them (the second through quadratic extremization).  Falls back
/// to sequential parameter elimination when no aggregate pair spans the
/// observable-bearing rows.
fn aggregate_stage(
    sys: &mut LinearizedSystem,
    branches: &mut Vec<Branch>,
    params: &[u32],
    opts: &DeriveOptions,
    trace: &mut Trace,
    outputs: &mut Vec<RawOutput>,
) -> Result<(), DeriveError> {
    let Some((a, b)) = choose_aggregates(sys, branches, params) else {
        trace.diag("no aggregate pair spans the observable rows");
        let mut work = core::mem::take(branches);
        for (i, &s) in params.iter().enumerate() {
            add_domain_rows(sys, &mut work, &[s], trace);
            work = run_stage(sys, work, s, i + 1 == params.len(), opts, trace, outputs)?;
        }
        *branches = work;
        return Ok(());
    };

    let ga = sys.symbols.len() as u32;
    let gb = ga + 1;
    let ga_coord = sys.layout.width;
    let gb_coord = ga_coord + 1;
    let mut ga_range: Option<(Rat, Rat)> = None;
    let mut gb_range: Option<(Rat, Rat)> = None;
    for v in &mut sys.verts {
        let va = eval_sym_affine(&a, v, &sys.layout);
        let vb = eval_sym_affine(&b, v, &sys.layout);
        for (range, value) in [(&mut ga_range, &va), (&mut gb_range, &vb)] {
            match range {
                None => *range = Some((value.clone(), value.clone())),
                Some((lo, hi)) => {
                    if value < lo {
                        *lo = value.clone();
                    }
                    if value > hi {
                        *hi = value.clone();
                    }
                }
            }
        }
        v.push(va);
        v.push(vb);
    }
    let (ga_lo, ga_hi) = ga_range.ok_or_else(|| {
        DeriveError::Internal(String::from("no extreme points to bound the aggregates"))
    })?;
    let (gb_lo, gb_hi) = gb_range.expect("ranges fill together");
    sys.layout.width += 2;
    sys.layout.sym_coords.push(ga_coord);
    sys.layout.sym_coords.push(gb_coord);
    let names_before = RenderCtx {
        sym_names: &sys.sym_names,
        func_names: &sys.func_names,
    };
    let label_a = format!("aggregate g1 = {}", a.render(&names_before));
    let label_b = format!("aggregate g2 = {}", b.render(&names_before));
    sys.symbols.push(ParamSymbol {
        name: String::from("g1"),
        lo: ga_lo,
        hi: ga_hi,
        kind: SymKind::Aggregate,
        coord: Some(ga_coord),
    });
    sys.symbols.push(ParamSymbol {
        name: String::from("g2"),
        lo: gb_lo,
        hi: gb_hi,
        kind: SymKind::Aggregate,
        coord: Some(gb_coord),
    });
    sys.sym_names.push(String::from("g1"));
    sys.sym_names.push(String::from("g2"));

    let pset: BTreeSet<u32> = params.iter().copied().collect();
    for branch in branches.iter_mut() {
        let old_rows = core::mem::take(&mut branch.rows);
        branch.seen.clear();
        for row in old_rows {
            if row.poly.syms().iter().all(|s| !pset.contains(s)) {
                branch.push_row(row.poly.clone(), row.step);
                continue;
            }
            match rewrite_in_aggregates(&row.poly, &pset, &a, &b, ga, gb) {
                Some(new_poly) => {
                    let canon = new_poly.canonical();
                    if canon.is_zero() {
                        continue;
                    }
                    let step = trace.record(
                        StepOp::Rewrite {
                            parent: row.step,
                            label: format!("{label_a}; {label_b}"),
                        },
                        canon.clone(),
                    );
                    branch.push_row(canon, step);
                }
                None => trace.diag("row outside the aggregate span"),
            }
        }
    }

    // Aggregate image facets: the exact joint domain of (g1, g2).
    let mut img_set: BTreeSet<Vec<Rat>> = BTreeSet::new();
    for v in &sys.verts {
        img_set.insert(vec![Rat::one(), v[ga_coord].clone(), v[gb_coord].clone()]);
    }
    let img: Vec<Vec<Rat>> = img_set.into_iter().collect();
    let hull = facets_of_points(&img, 3);
    let names = RenderCtx {
        sym_names: &sys.sym_names,
        func_names: &sys.func_names,
    };
    let mut domain_rows: Vec<Poly> = Vec::new();
    let row_to_poly = |row: &LinIneq| -> Poly {
        let mut p = Poly::from_affine(AffineObservable::constant(row.coeffs[0].clone()));
        p = p.add(&Poly::sym(ga).scale(&row.coeffs[1]));
        p = p.add(&Poly::sym(gb).scale(&row.coeffs[2]));
        p
    };
    for f in &hull.facets {
        domain_rows.push(row_to_poly(f));
    }
    for e in &hull.equalities {
        let p = row_to_poly(e);
        domain_rows.push(p.clone());
        domain_rows.push(p.neg());
    }
    for p in domain_rows {
        let canon = p.canonical();
        if canon.is_zero() {
            continue;
        }
        let step = trace.record(
            StepOp::Input {
                label: format!("aggregate domain: {} >= 0", canon.render(&names)),
            },
            canon.clone(),
        );
        for b in branches.iter_mut() {
            b.push_row(canon.clone(), step);
        }
    }
    add_domain_rows(sys, branches, &[ga, gb], trace);

    let mut work = core::mem::take(branches);
    work = run_stage(sys, work, ga, false, opts, trace, outputs)?;
    work = run_stage(sys, work, gb, true, opts, trace, outputs)?;
    *branches = work;
    Ok(())
}

/// Runs the full derivation pipeline on a scenario.
///
/// # Errors
/// Propagates reduction errors, configured-limit aborts, and internal
/// certificate or validation failures.
pub fn derive(
    scenario: &Scenario,
    restriction: &Restriction,
    options: &DeriveOptions,
) -> Result<Derivation, DeriveError> {
    let red = reduce(scenario, restriction)?;
    let mut sys = linearize(&red, options);
    let mut trace = Trace::new();
    let mut outputs: Vec<RawOutput> = Vec::new();
    let mut branches = vec![seed_branch(&sys, &mut trace)];

    let ids_of = |sys: &LinearizedSystem, kind: SymKind| -> Vec<u32> {
        sys.symbols
            .iter()
            .enumerate()
            .filter(|(_, s)| s.kind == kind)
            .map(|(i, _)| i as u32)
            .collect()
    };
    for s in ids_of(&sys, SymKind::Product) {
        branches = run_stage(&sys, branches, s, false, options, &mut trace, &mut outputs)?;
    }
    for s in ids_of(&sys, SymKind::Parametric) {
        branches = run_stage(&sys, branches, s, false, options, &mut trace, &mut outputs)?;
    }
    let params = ids_of(&sys, SymKind::Parameter);
    match params.len() {
        0 => {}
        1 => {
            add_domain_rows(&sys, &mut branches, &params, &mut trace);
            branches =
                run_stage(&sys, branches, params[0], true, options, &mut trace, &mut outputs)?;
        }
        _ => {
            aggregate_stage(&mut sys, &mut branches, &params, options, &mut trace, &mut outputs)?;
        }
    }
    drain_direct_outputs(branches, &mut trace, &mut outputs);
    postprocess(scenario, options, &sys, &trace, &outputs)
}

/// Replays every recorded ancestor of a step; `Err` describes the first
/// mismatch.
fn replay_ancestors(steps: &[StepRec], idx: usize) -> Result<(), String> {
    let mut stack = vec![idx];
    let mut seen: BTreeSet<usize> = BTreeSet::new();
    while let Some(s) = stack.pop() {
        if !seen.insert(s) {
            continue;
        }
        replay_step(steps, s)?;
        match &steps[s].op {
            StepOp::Input { .. } => {}
            StepOp::Pair { pos, neg, .. } => {
                stack.push(*pos);
                stack.push(*neg);
            }
            StepOp::Rewrite { parent, .. } | StepOp::VertexPoly { parent, .. } => {
                stack.push(*parent);
            }
        }
    }
    Ok(())
}

fn certificate_lines(
    steps: &[StepRec],
    final_step: usize,
    kind: &OutKind,
    merged: &[(usize, Poly)],
    names: &RenderCtx<'_>,
) -> Vec<String> {
    let mut ancestors: BTreeSet<usize> = BTreeSet::new();
    let mut stack = vec![final_step];
    stack.extend(merged.iter().map(|(s, _)| *s));
    while let Some(s) = stack.pop() {
        if !ancestors.insert(s) {
            continue;
        }
        match &steps[s].op {
            StepOp::Input { .. } => {}
            StepOp::Pair { pos, neg, .. } => {
                stack.push(*pos);
                stack.push(*neg);
            }
            StepOp::Rewrite { parent, .. } | StepOp::VertexPoly { parent, .. } => {
                stack.push(*parent);
            }
        }
    }
    let mut lines = Vec::with_capacity(ancestors.len() + 1);
    for &s in &ancestors {
        let rec = &steps[s];
        let line = match &rec.op {
            StepOp::Input { label } => format!("[{s}] input {label}"),
            StepOp::Pair {
                pos,
                neg,
                sym,
                mult_pos,
                mult_neg,
            } => format!(
                "[{s}] = ({}) * [{pos}] + ({}) * [{neg}], eliminating {}: {} >= 0",
                mult_pos.render(names),
                mult_neg.render(names),
                names.sym_names[*sym as usize],
                rec.poly.render(names)
            ),
            StepOp::Rewrite { parent, label } => {
                format!("[{s}] rewrite of [{parent}] ({label}): {} >= 0", rec.poly.render(names))
            }
            StepOp::VertexPoly { parent, sym } => format!(
                "[{s}] extremal bound of [{parent}] over {}: {} >= 0",
                names.sym_names[*sym as usize],
                rec.poly.render(names)
            ),
        };
        lines.push(line);
    }
    let closing = match kind {
        OutKind::Direct => format!("output = -[{final_step}] <= 0"),
        OutKind::Vertex { sym } => format!(
            "output = extremal value of [{final_step}] over {}, negated",
            names.sym_names[*sym as usize]
        ),
        OutKind::Clamp { sym, at } => format!(
            "output = value of [{final_step}] at {} = {}, negated, under the recorded guard",
            names.sym_names[*sym as usize],
            render_rat(at)
        ),
    };
    lines.push(closing);
    for (mstep, cond) in merged {
        lines.push(format!(
            "case discharged: the derivation above assumed {} >= 0, and [{mstep}] \
             yields the same bound under {} >= 0; the two cases cover the region",
            cond.render(names),
            cond.neg().canonical().render(names)
        ));
    }
    lines
}

struct OutputCandidate {
    lhs: OutPoly,
    conds: Vec<Poly>,
    cases: Vec<OutPoly>,
    step: usize,
    kind: OutKind,
    /// Branches absorbed by discharging a complementary condition pair:
    /// (final step of the absorbed branch, the condition this side assumed).
    merged: Vec<(usize, Poly)>,
}

fn postprocess(
    scenario: &Scenario,
    opts: &DeriveOptions,
    sys: &LinearizedSystem,
    trace: &Trace,
    raw: &[RawOutput],
) -> Result<Derivation, DeriveError> {
    let names = RenderCtx {
        sym_names: &sys.sym_names,
        func_names: &sys.func_names,
    };
    let mut diags = trace.diags.clone();
    let bump = |diags: &mut BTreeMap<String, usize>, key: &str| {
        *diags.entry(String::from(key)).or_insert(0) += 1;
    };

    let mut candidates: Vec<OutputCandidate> = Vec::new();
    for out in raw {
        replay_ancestors(&trace.steps, out.step).map_err(DeriveError::Internal)?;
        // Outputs keep the scale they were produced at (for extremal-value
        // outputs, the bound on the row's maximum itself) so that evaluation
        // against data is meaningful; only the term order is normalized.
        let shipped = out.out.clone();
        if shipped.is_zero() {
            continue;
        }
        if shipped.func_degree() < 2 {
            bump(&mut diags, "output linear in the observables suppressed");
            continue;
        }
        let mut conds: Vec<Poly> = out.conds.iter().map(Poly::canonical).collect();
        conds.sort();
        conds.dedup();
        candidates.push(OutputCandidate {
            lhs: shipped.neg(),
            conds,
            cases: Vec::new(),
            step: out.step,
            kind: out.kind.clone(),
            merged: Vec::new(),
        });
    }

    // Syntactic deduplication.
    let mut unique: BTreeMap<(OutPoly, Vec<Poly>), OutputCandidate> = BTreeMap::new();
    for cand in candidates {
        let key = (cand.lhs.clone(), cand.conds.clone());
        if unique.contains_key(&key) {
            bump(&mut diags, "duplicate output suppressed");
        } else {
            unique.insert(key, cand);
        }
    }
    let mut merged_list: Vec<OutputCandidate> = unique.into_values().collect();

    // Merge pairs differing only by one complementary condition: a bound
    // proved both under c >= 0 and under -c >= 0 holds without the split.
    loop {
        let mut found: Option<(usize, usize, Poly)> = None;
        'scan: for i in 0..merged_list.len() {
            for j in i + 1..merged_list.len() {
                if merged_list[i].lhs != merged_list[j].lhs {
                    continue;
                }
                let a: BTreeSet<&Poly> = merged_list[i].conds.iter().collect();
                let b: BTreeSet<&Poly> = merged_list[j].conds.iter().collect();
                let only_a: Vec<&&Poly> = a.difference(&b).collect();
                let only_b: Vec<&&Poly> = b.difference(&a).collect();
                if only_a.len() == 1 && only_b.len() == 1 {
                    let complement = (**only_a[0]).neg().canonical();
                    if complement == **only_b[0] {
                        found = Some((i, j, (**only_a[0]).clone()));
                        break 'scan;
                    }
                }
            }
        }
        let Some((i, j, discharged)) = found else { break };
        let absorbed = merged_list.remove(j);
        merged_list[i].conds.retain(|c| *c != discharged);
        merged_list[i].merged.push((absorbed.step, discharged));
        merged_list[i].merged.extend(absorbed.merged);
        bump(&mut diags, "complementary case pair merged");
    }

    // Convert the surviving conditions to observable case polynomials; a
    // condition still referencing an internal symbol cannot ship.
    let mut final_list: Vec<OutputCandidate> = Vec::new();
    'cands: for mut cand in merged_list {
        for cond in &cand.conds {
            match cond.as_affine() {
                Some(aff) => cand.cases.push(OutPoly::from_affine(&aff).canonical()),
                None => {
                    bump(&mut diags, "output conditioned on internal symbols suppressed");
                    continue 'cands;
                }
            }
        }
        cand.cases.sort();
        cand.cases.dedup();
        final_list.push(cand);
    }

    // A second pass of syntactic deduplication: distinct condition sets can
    // collapse to one case set after conversion.
    let mut unique: BTreeMap<(OutPoly, Vec<OutPoly>), OutputCandidate> = BTreeMap::new();
    for cand in final_list {
        let key = (cand.lhs.clone(), cand.cases.clone());
        if unique.contains_key(&key) {
            bump(&mut diags, "duplicate output suppressed");
        } else {
            unique.insert(key, cand);
        }
    }
    let mut final_list: Vec<OutputCandidate> = unique.into_values().collect();

    // Symmetry deduplication among unconditioned outputs.
    if opts.symmetry_dedup && !scenario.symmetries.is_empty() {
        let n_funcs = sys.func_names.len();
        let maps: Vec<Vec<Option<(usize, bool)>>> = scenario
            .symmetries
            .iter()
            .map(|sym| {
                (0..n_funcs)
                    .map(|i| scenario.transform_functional(&scenario.functionals[i], sym))
                    .collect()
            })
            .collect();
        let mut groups: BTreeMap<OutPoly, Vec<usize>> = BTreeMap::new();
        for (idx, cand) in final_list.iter().enumerate() {
            if cand.cases.is_empty() {
                // Scale-invariant orbit key: group on the canonical form.
                groups
                    .entry(orbit_min(&cand.lhs.canonical(), &maps))
                    .or_default()
                    .push(idx);
            }
        }
        let mut drop: BTreeSet<usize> = BTreeSet::new();
        for members in groups.values() {
            if members.len() < 2 {
                continue;
            }
            let keep = members
                .iter()
                .copied()
                .min_by(|&x, &y| final_list[x].lhs.cmp(&final_list[y].lhs))
                .expect("nonempty group");
            for &m in members {
                if m != keep {
                    drop.insert(m);
                    bump(&mut diags, "symmetry-related output suppressed");
                }
            }
        }
        let mut kept = Vec::with_capacity(final_list.len() - drop.len());
        for (idx, cand) in final_list.into_iter().enumerate() {
            if !drop.contains(&idx) {
                kept.push(cand);
            }
        }
        final_list = kept;
    }

    // Re-validate every shipped inequality on the region's extreme points.
    let zero = Rat::zero();
    for cand in &final_list {
        for v in &sys.verts {
            let func_vals: Vec<Rat> = (0..sys.func_names.len())
                .map(|i| v[sys.layout.func_coord(i)].clone())
                .collect();
            if !cand
                .cases
                .iter()
                .all(|c| !c.eval(&func_vals, &zero).is_negative())
            {
                continue;
            }
            let value = cand.lhs.eval(&func_vals, &zero);
            if value.is_positive() {
                return Err(DeriveError::Internal(format!(
                    "output {} fails at an extreme point",
                    cand.lhs.render(&sys.func_names)
                )));
            }
        }
    }

    final_list.sort_by(|x, y| (&x.lhs, &x.cases).cmp(&(&y.lhs, &y.cases)));
    let inequalities = final_list
        .into_iter()
        .map(|cand| {
            let rendered = format!("{} <= 0", cand.lhs.render(&sys.func_names));
            let case_strings = cand
                .cases
                .iter()
                .map(|c| format!("{} >= 0", c.render(&sys.func_names)))
                .collect();
            let certificate =
                certificate_lines(&trace.steps, cand.step, &cand.kind, &cand.merged, &names);
            PolynomialInequality {
                lhs: cand.lhs,
                cases: cand.cases,
                rendered,
                case_strings,
                certificate,
            }
        })
        .collect();
    Ok(Derivation {
        functional_names: sys.func_names.clone(),
        symbols: sys.symbols.clone(),
        inequalities,
        diagnostics: diags,
    })
}

/// Image of an output polynomial under one functional relabeling map;
/// `None` when a referenced functional has no image.
fn apply_func_map(p: &OutPoly, map: &[Option<(usize, bool)>]) -> Option<OutPoly> {
    let mut out = OutPoly::zero();
    for (mono, coeff) in p.terms() {
        let mut flip = false;
        let mut vars = Vec::with_capacity(mono.0.len());
        for v in &mono.0 {
            match v {
                poly::OutVar::Func(i) => {
                    let (j, f) = map[*i]?;
                    flip ^= f;
                    vars.push(poly::OutVar::Func(j));
                }
                poly::OutVar::Relax => vars.push(poly::OutVar::Relax),
            }
        }
        vars.sort();
        let signed = if flip { -coeff.clone() } else { coeff.clone() };
        out.add_term(poly::OutMono(vars), signed);
    }
    Some(out.canonical())
}

/// Smallest element of the orbit of `lhs` under the declared relabeling
/// maps (bounded closure; falls back to `lhs` if the orbit is too large).
fn orbit_min(lhs: &OutPoly, maps: &[Vec<Option<(usize, bool)>>]) -> OutPoly {
    let mut seen: BTreeSet<OutPoly> = BTreeSet::new();
    let mut stack = vec![lhs.clone()];
    while let Some(p) = stack.pop() {
        if seen.len() > 256 {
            return lhs.clone();
        }
        if !seen.insert(p.clone()) {
            continue;
        }
        for map in maps {
            if let Some(img) = apply_func_map(&p, map) {
                if !seen.contains(&img) {
                    stack.push(img);
                }
            }
        }
    }
    seen.into_iter().next().expect("orbit contains the seed")
}

/// Eliminates the listed symbols from a system of rows (each asserting
/// `row ≥ 0`) over the symbols' domain boxes, splitting into recorded sign
/// cases whenever a pivot coefficient's sign is not determined.  Outputs
/// keep the remaining symbols; the union over the emitted cases is
/// equivalent to the projection of the input system.
///
/// # Errors
/// Fails on configured row, pair, or case limits.
pub fn parametric_fm(
    rows: &[Poly],
    symbols: &[ParamSymbol],
    func_names: &[String],
    remove: &[u32],
    options: &DeriveOptions,
) -> Result<Vec<ParametricInequality>, DeriveError> {
    let sym_names: Vec<String> = symbols.iter().map(|s| s.name.clone()).collect();
    let names = RenderCtx {
        sym_names: &sym_names,
        func_names,
    };
    let region = Region::Boxes { symbols };
    let ctx = Ctx {
        symbols,
        region,
        names,
        opts: options,
    };
    let mut trace = Trace::new();
    let mut outputs: Vec<RawOutput> = Vec::new();
    let mut branch = Branch::new();
    for p in rows {
        let canon = p.canonical();
        if canon.is_zero() {
            continue;
        }
        let step = trace.record(
            StepOp::Input {
                label: format!("row: {} >= 0", canon.render(&names)),
            },
            canon.clone(),
        );
        branch.push_row(canon, step);
    }
    let mut removed: Vec<u32> = remove.to_vec();
    removed.sort_unstable();
    removed.dedup();
    for &s in &removed {
        let sym = &symbols[s as usize];
        let upper = Poly::sym(s)
            .neg()
            .add(&Poly::from_affine(AffineObservable::constant(sym.hi.clone())))
            .canonical();
        let lower = Poly::sym(s)
            .add(&Poly::from_affine(AffineObservable::constant(-sym.lo.clone())))
            .canonical();
        for p in [upper, lower] {
            if p.is_zero() {
                continue;
            }
            let step = trace.record(
                StepOp::Input {
                    label: format!("domain: {} >= 0", p.render(&names)),
                },
                p.clone(),
            );
            branch.push_row(p, step);
        }
    }
    let mut branches = vec![branch];
    for &s in &removed {
        branches = eliminate_sym(branches, s, false, &ctx, &mut trace, &mut outputs)?;
    }
    let mut out: Vec<ParametricInequality> = Vec::new();
    let mut seen: BTreeSet<(Poly, Vec<Poly>)> = BTreeSet::new();
    for b in &branches {
        for row in &b.rows {
            let lhs = row.poly.neg();
            let cases = b.conds.clone();
            if !seen.insert((lhs.clone(), cases.clone())) {
                continue;
            }
            let rendered = format!("{} <= 0", lhs.render(&names));
            let case_strings = cases
                .iter()
                .map(|c| format!("{} >= 0", c.render(&names)))
                .collect();
            out.push(ParametricInequality {
                lhs,
                cases,
                rendered,
                case_strings,
            });
        }
    }
    out.sort_by(|x, y| (&x.lhs, &x.cases).cmp(&(&y.lhs, &y.cases)));
    Ok(out)
}

/// Existentially eliminates one parameter from a quadratic inequality
/// `lhs ≤ 0` over the parameter's domain interval: the result holds for
/// some admissible parameter value iff every returned inequality whose case
/// conditions hold is satisfied.  The principal output carries the
/// unconstrained extremal value; domain-endpoint variants follow wherever
/// the extremal point can exit the interval, guarded by the condition that
/// it does.
///
/// # Errors
/// Rejects inequalities that are not convex in the parameter, exceed
/// degree two, or still reference other symbols.
pub fn eliminate_quadratic_param(
    pineq: &ParametricInequality,
    symbols: &[ParamSymbol],
    func_names: &[String],
    param: u32,
) -> Result<Vec<PolynomialInequality>, DeriveError> {
    let sym_names: Vec<String> = symbols.iter().map(|s| s.name.clone()).collect();
    let names = RenderCtx {
        sym_names: &sym_names,
        func_names,
    };
    let r = pineq.lhs.neg(); // internal sense: r >= 0
    let residual: Vec<String> = r
        .syms()
        .into_iter()
        .filter(|&s| s != param)
        .map(|s| sym_names[s as usize].clone())
        .collect();
    if !residual.is_empty() {
        return Err(DeriveError::ResidualSymbols {
            detail: residual.join(", "),
        });
    }

    // Domain interval, tightened by single-symbol case conditions on the
    // parameter; all other case conditions are carried through.
    let mut lo = symbols[param as usize].lo.clone();
    let mut hi = symbols[param as usize].hi.clone();
    let mut carried: Vec<Poly> = Vec::new();
    for cond in &pineq.cases {
        let mut tightened = false;
        if cond.syms() == BTreeSet::from([param]) && cond.max_power(param) == 1 {
            if let Some((_, a1, a0)) = cond.split_quadratic(param) {
                let (Some(c1), Some(c0)) = (a1.as_affine(), a0.as_affine()) else {
                    unreachable!("single-symbol split yields coefficient slots");
                };
                if c1.is_constant() && c0.is_constant() {
                    let bound = -&c0.constant / &c1.constant;
                    if c1.constant.is_positive() {
                        if bound > lo {
                            lo = bound;
                        }
                    } else if bound < hi {
                        hi = bound;
                    }
                    tightened = true;
                }
            }
        }
        if !tightened {
            carried.push(cond.clone());
        }
    }
    if lo > hi {
        return Err(DeriveError::Internal(String::from(
            "case conditions empty the parameter domain",
        )));
    }

    let mut raws: Vec<(OutPoly, Vec<Poly>, String)> = Vec::new();
    match r.max_power(param) {
        0 => {
            let aff = r.as_affine().expect("parameter-free row is a coefficient");
            raws.push((
                OutPoly::from_affine(&aff),
                carried.clone(),
                String::from("parameter absent; inequality passes through"),
            ));
        }
        1 => {
            let (_, a1, a0) = r.split_quadratic(param).expect("degree-one row splits");
            let a1 = a1.as_affine().expect("coefficients are parameter-free");
            let a0 = a0.as_affine().expect("coefficients are parameter-free");
            let value_at = |e: &Rat| a0.add(&a1.scale(e));
            if a1.is_constant() {
                let endpoint = if a1.constant.is_negative() { &lo } else { &hi };
                raws.push((
                    OutPoly::from_affine(&value_at(endpoint)),
                    carried.clone(),
                    format!(
                        "linear in {}; maximum at the {} endpoint",
                        sym_names[param as usize],
                        render_rat(endpoint)
                    ),
                ));
            } else {
                for (endpoint, guard) in [
                    (&hi, Poly::from_affine(a1.clone())),
                    (&lo, Poly::from_affine(a1.neg())),
                ] {
                    let mut cases = carried.clone();
                    cases.push(guard.canonical());
                    raws.push((
                        OutPoly::from_affine(&value_at(endpoint)),
                        cases,
                        format!(
                            "linear in {}; maximum at the {} endpoint under the guard",
                            sym_names[param as usize],
                            render_rat(endpoint)
                        ),
                    ));
                }
            }
        }
        2 => {
            let (a2, a1, a0) = r.split_quadratic(param).expect("degree-two row splits");
            let Some(a2c) = a2
                .as_affine()
                .and_then(|a| a.is_constant().then_some(a.constant))
            else {
                return Err(DeriveError::NonConvex {
                    detail: String::from("the leading coefficient is not constant"),
                });
            };
            if !a2c.is_negative() {
                return Err(DeriveError::NonConvex {
                    detail: String::from("the leading coefficient has the wrong sign"),
                });
            }
            let a1 = a1.as_affine().expect("coefficients are parameter-free");
            let a0 = a0.as_affine().expect("coefficients are parameter-free");
            // The extremal value itself: a0 + a1^2 / (-4 a2).
            let inv = rat(1) / (-(&a2c) * &rat(4));
            let main = OutPoly::from_affine(&a0)
                .add(&OutPoly::square_affine(&a1).scale(&inv));
            raws.push((
                main,
                carried.clone(),
                format!("extremal value over {}", sym_names[param as usize]),
            ));
            let k = -(&a2c) * &rat(2); // extremal point = a1 / k
            let a1_poly = Poly::from_affine(a1.clone());
            let bounds = affine_bounds(&a1_poly, &pineq.cases, Region::Boxes { symbols });
            let (can_hi, can_lo) = match &bounds {
                Some(RegionBounds::Range(min, max)) => (
                    max.as_ref().is_none_or(|m| *m > &hi * &k),
                    min.as_ref().is_none_or(|m| *m < &lo * &k),
                ),
                Some(RegionBounds::Empty) => (false, false),
                None => (true, true),
            };
            let clamp_value = |e: &Rat| {
                a0.add(&a1.scale(e))
                    .add(&AffineObservable::constant(&a2c * &(e * e)))
            };
            if can_hi {
                let guard = a1_poly
                    .add(&Poly::from_affine(AffineObservable::constant(-(&(&hi * &k)))))
                    .canonical();
                let mut cases = carried.clone();
                cases.push(guard);
                raws.push((
                    OutPoly::from_affine(&clamp_value(&hi)),
                    cases,
                    format!(
                        "value at {} = {} under the exit guard",
                        sym_names[param as usize],
                        render_rat(&hi)
                    ),
                ));
            }
            if can_lo {
                let guard = a1_poly
                    .neg()
                    .add(&Poly::from_affine(AffineObservable::constant(&lo * &k)))
                    .canonical();
                let mut cases = carried.clone();
                cases.push(guard);
                raws.push((
                    OutPoly::from_affine(&clamp_value(&lo)),
                    cases,
                    format!(
                        "value at {} = {} under the exit guard",
                        sym_names[param as usize],
                        render_rat(&lo)
                    ),
                ));
            }
        }
        d => return Err(DeriveError::UnsupportedDegree { degree: d }),
    }

    let mut out = Vec::with_capacity(raws.len());
    for (raw, conds, note) in raws {
        let lhs = raw.neg();
        let mut cases: Vec<OutPoly> = Vec::new();
        let mut case_strings: Vec<String> = Vec::new();
        for c in &conds {
            case_strings.push(format!("{} >= 0", c.render(&names)));
            if let Some(aff) = c.as_affine() {
                cases.push(OutPoly::from_affine(&aff).canonical());
            }
        }
        let rendered = format!("{} <= 0", lhs.render(func_names));
        out.push(PolynomialInequality {
            lhs,
            cases,
            rendered,
            case_strings,
            certificate: vec![format!("from {}: {note}", pineq.rendered)],
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;
    use alloc::string::ToString;
    use poly::{OutMono, OutVar};
    use rand_core::{RngCore, SeedableRng};

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
        I = E[A0 B0 C0] + E[A0 B0 C1] + E[A0 B0 C2] \
          + E[A1 B0 C0] + E[A1 B0 C1] + E[A1 B0 C2] \
          + E[A2 B0 C0] + E[A2 B0 C1] + E[A2 B0 C2]\n\
        J = E[A0 B1 C0] - E[A0 B1 C1] + E[A0 B1 C2] \
          - E[A1 B1 C0] + E[A1 B1 C1] - E[A1 B1 C2] \
          + E[A2 B1 C0] - E[A2 B1 C1] + E[A2 B1 C2]\n";

    const FOURPARTY: &str = "[parties]\n\
        A settings=2\n\
        B settings=2\n\
        C settings=2\n\
        D settings=2\n\
        [sources]\n\
        L1 -> A,B,C\n\
        L2 -> A,C,D\n\
        [functionals]\n\
        I = -E[A1 B0 C0 D0] - E[A1 B0 C0 D1] + E[A1 B1 C0 D0] + E[A1 B1 C0 D1]\n\
        J = E[A0 B0 C1 D0] - E[A0 B0 C1 D1] + E[A0 B1 C1 D0] - E[A0 B1 C1 D1]\n";

    fn out_poly(terms: &[(i64, &[usize])]) -> OutPoly {
        let mut p = OutPoly::zero();
        for (c, vars) in terms {
            let mut vs: Vec<OutVar> = vars.iter().map(|&i| OutVar::Func(i)).collect();
            vs.sort();
            p.add_term(OutMono(vs), rat(*c));
        }
        p
    }

    /// The family `-(dI - eJ)^2 + 2k(dI + eJ) - k^2` with primitive integer
    /// coefficients.
    fn shifted_square(d: i64, e: i64, k: i64) -> OutPoly {
        out_poly(&[
            (-1, &[0, 0]),
            (2 * d * e, &[0, 1]),
            (-1, &[1, 1]),
            (2 * k * d, &[0]),
            (2 * k * e, &[1]),
            (-(k * k), &[]),
        ])
    }

    /// The same family at the scale the pipeline ships: the negated extremal
    /// value of a row with leading coefficient -2, i.e. the primitive form
    /// divided by 8.
    fn shipped_square(d: i64, e: i64, k: i64) -> OutPoly {
        shifted_square(d, e, k).scale(&(rat(1) / rat(8)))
    }

    fn lhs_set(derivation: &Derivation) -> BTreeSet<OutPoly> {
        derivation.inequalities.iter().map(|q| q.lhs.clone()).collect()
    }

    fn psym(name: &str, kind: SymKind) -> ParamSymbol {
        ParamSymbol {
            name: name.to_string(),
            lo: rat(-1),
            hi: rat(1),
            kind,
            coord: None,
        }
    }

    #[test]
    fn reduction_projects_the_two_setting_chain() {
        let sc = parse_scenario(BILOCAL22).unwrap();
        let red = reduce(&sc, &Restriction::FullCorrelatorsOnly).unwrap();
        assert_eq!(red.func_names, vec!["I".to_string(), "J".to_string()]);
        assert_eq!(red.width, 6);
        assert_eq!(red.verts.len(), 6);
        assert_eq!(red.facets.len(), 6);
        assert!(red.equalities.is_empty());
        assert_eq!(red.symbols.len(), 2);
        assert_eq!(red.symbols[0].kind, SymKind::Parameter);
        assert_eq!(red.symbols[1].kind, SymKind::Parametric);
        assert_eq!(red.products.len(), 1);
    }

    #[test]
    fn reduction_projects_the_three_setting_chain() {
        let sc = parse_scenario(BILOCAL33).unwrap();
        let red = reduce(&sc, &Restriction::FullCorrelatorsOnly).unwrap();
        assert_eq!(red.width, 18);
        assert_eq!(red.verts.len(), 64);
        assert_eq!(red.facets.len(), 20);
        assert_eq!(red.symbols.len(), 6);
        assert_eq!(red.products.len(), 9);
    }

    #[test]
    fn two_setting_chain_ships_exactly_the_four_sign_variants() {
        let sc = parse_scenario(BILOCAL22).unwrap();
        let d = derive(&sc, &Restriction::FullCorrelatorsOnly, &DeriveOptions::default())
            .unwrap();
        let want: BTreeSet<OutPoly> = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
            .iter()
            .map(|&(a, b)| shipped_square(a, b, 4))
            .collect();
        assert_eq!(lhs_set(&d), want);
        assert_eq!(d.inequalities.len(), 4);
        assert!(d.inequalities.iter().all(|q| q.cases.is_empty()));
        assert!(d.inequalities.iter().all(|q| !q.certificate.is_empty()));
        assert!(d.inequalities.iter().all(|q| q.rendered.ends_with("<= 0")));
    }

    #[test]
    fn three_setting_chain_ships_the_shifted_square() {
        let sc = parse_scenario(BILOCAL33).unwrap();
        let d = derive(&sc, &Restriction::FullCorrelatorsOnly, &DeriveOptions::default())
            .unwrap();
        let want = shipped_square(1, 1, 16);
        assert!(
            d.inequalities.iter().any(|q| q.lhs == want && q.cases.is_empty()),
            "missing the shifted square; got {:?}",
            d.inequalities.iter().map(|q| &q.rendered).collect::<Vec<_>>()
        );
    }

    #[test]
    fn four_party_chain_matches_the_two_setting_shape() {
        let sc = parse_scenario(FOURPARTY).unwrap();
        let d = derive(&sc, &Restriction::FullCorrelatorsOnly, &DeriveOptions::default())
            .unwrap();
        let want = shipped_square(1, 1, 4);
        assert!(
            d.inequalities.iter().any(|q| q.lhs == want && q.cases.is_empty()),
            "missing the shifted square; got {:?}",
            d.inequalities.iter().map(|q| &q.rendered).collect::<Vec<_>>()
        );
    }

    #[test]
    fn relaxed_chain_carries_the_slack_symbol() {
        let sc = parse_scenario(BILOCAL22).unwrap();
        let opts = DeriveOptions {
            relax: true,
            ..DeriveOptions::default()
        };
        let d = derive(&sc, &Restriction::FullCorrelatorsOnly, &opts).unwrap();
        let mut slack = OutPoly::zero();
        slack.add_term(OutMono(vec![OutVar::Relax]), rat(-2));
        let want = shipped_square(1, 1, 4).add(&slack);
        assert!(
            d.inequalities.iter().any(|q| q.lhs == want && q.cases.is_empty()),
            "missing the slack-bearing variant; got {:?}; diagnostics {:?}",
            d.inequalities.iter().map(|q| &q.rendered).collect::<Vec<_>>(),
            d.diagnostics
        );
    }

    #[test]
    fn probability_scale_route_matches_the_correlator_route() {
        let sc = parse_scenario(BILOCAL22).unwrap();
        let base = derive(&sc, &Restriction::FullCorrelatorsOnly, &DeriveOptions::default())
            .unwrap();
        let opts = DeriveOptions {
            full_linearization: true,
            ..DeriveOptions::default()
        };
        let scaled = derive(&sc, &Restriction::FullCorrelatorsOnly, &opts).unwrap();
        // The reparametrized route works on rows with rescaled leading
        // coefficients, so its outputs differ by a positive factor: compare
        // the canonical forms.
        let canon = |d: &Derivation| -> BTreeSet<OutPoly> {
            d.inequalities.iter().map(|q| q.lhs.canonical()).collect()
        };
        assert_eq!(canon(&base), canon(&scaled));
    }

    #[test]
    fn symmetry_declaration_halves_the_output_family() {
        let text = alloc::format!("{BILOCAL22}[symmetries]\nA0 -> A1, A1 -> A0\n");
        let sc = parse_scenario(&text).unwrap();
        let deduped = derive(&sc, &Restriction::FullCorrelatorsOnly, &DeriveOptions::default())
            .unwrap();
        assert_eq!(deduped.inequalities.len(), 2);
        let full_family: BTreeSet<OutPoly> = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
            .iter()
            .map(|&(a, b)| shipped_square(a, b, 4))
            .collect();
        assert!(lhs_set(&deduped).is_subset(&full_family));
        let opts = DeriveOptions {
            symmetry_dedup: false,
            ..DeriveOptions::default()
        };
        let kept = derive(&sc, &Restriction::FullCorrelatorsOnly, &opts).unwrap();
        assert_eq!(kept.inequalities.len(), 4);
    }

    #[test]
    fn derive_rejects_missing_functionals_and_missing_independence() {
        let no_functionals = "[parties]\nA settings=2\nB settings=2\nC settings=2\n\
             [sources]\nL1 -> A,B\nL2 -> B,C\n";
        let sc = parse_scenario(no_functionals).unwrap();
        assert_eq!(
            derive(&sc, &Restriction::FullCorrelatorsOnly, &DeriveOptions::default())
                .unwrap_err(),
            DeriveError::NeedFunctionals
        );
        let single_source = "[parties]\nA settings=2\nB settings=2\n[sources]\nL -> A,B\n\
             [functionals]\nS = E[A0 B0] + E[A0 B1] + E[A1 B0] - E[A1 B1]\n";
        let sc = parse_scenario(single_source).unwrap();
        assert_eq!(
            derive(&sc, &Restriction::FullCorrelatorsOnly, &DeriveOptions::default())
                .unwrap_err(),
            DeriveError::NoJointLevelCi
        );
    }

    #[test]
    fn parametric_elimination_splits_on_the_undetermined_pivot() {
        let symbols = vec![psym("u", SymKind::Parameter), psym("w", SymKind::Parametric)];
        let mut row = Poly::from_affine(AffineObservable::constant(rat(1)));
        row.add_term(Mono(vec![0, 1]), AffineObservable::constant(rat(1)));
        let out = parametric_fm(&[row], &symbols, &[], &[1], &DeriveOptions::default())
            .unwrap();
        let one = Poly::from_affine(AffineObservable::constant(rat(1)));
        let expect: BTreeSet<(Poly, Vec<Poly>)> = [
            (Poly::sym(0).add(&one).neg(), vec![Poly::sym(0)]),
            (one.add(&Poly::sym(0).neg()).neg(), vec![Poly::sym(0).neg()]),
        ]
        .into_iter()
        .collect();
        let got: BTreeSet<(Poly, Vec<Poly>)> = out
            .iter()
            .map(|q| (q.lhs.clone(), q.cases.clone()))
            .collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn case_limit_aborts_the_split() {
        let symbols = vec![psym("u", SymKind::Parameter), psym("w", SymKind::Parametric)];
        let mut row = Poly::from_affine(AffineObservable::constant(rat(1)));
        row.add_term(Mono(vec![0, 1]), AffineObservable::constant(rat(1)));
        let opts = DeriveOptions {
            max_cases: 1,
            ..DeriveOptions::default()
        };
        let err = parametric_fm(&[row], &symbols, &[], &[1], &opts).unwrap_err();
        assert!(matches!(err, DeriveError::CaseLimit { .. }));
    }

    /// The two-setting chain's final row, fed through the public quadratic
    /// eliminator: principal extremal value plus both guarded endpoints.
    #[test]
    fn quadratic_elimination_emits_vertex_and_guarded_endpoints() {
        let symbols = vec![psym("u", SymKind::Parameter)];
        let func_names = vec!["I".to_string(), "J".to_string()];
        let mut lhs = Poly::zero();
        lhs.add_term(Mono(vec![0, 0]), AffineObservable::constant(rat(2)));
        lhs.add_term(
            Mono::sym(0),
            AffineObservable::func(0).scale(&rat(-1)).add(&AffineObservable::func(1)),
        );
        lhs.add_term(
            Mono::unit(),
            AffineObservable::func(0)
                .add(&AffineObservable::func(1))
                .add(&AffineObservable::constant(rat(-2))),
        );
        let pineq = ParametricInequality {
            lhs,
            cases: Vec::new(),
            rendered: String::from("test row"),
            case_strings: Vec::new(),
        };
        let out = eliminate_quadratic_param(&pineq, &symbols, &func_names, 0).unwrap();
        let got: BTreeSet<(OutPoly, Vec<OutPoly>)> = out
            .iter()
            .map(|q| (q.lhs.clone(), q.cases.clone()))
            .collect();
        let expect: BTreeSet<(OutPoly, Vec<OutPoly>)> = [
            (shipped_square(1, 1, 4), vec![]),
            (
                out_poly(&[(2, &[1])]),
                vec![out_poly(&[(1, &[0]), (-1, &[1]), (-4, &[])])],
            ),
            (
                out_poly(&[(2, &[0])]),
                vec![out_poly(&[(-1, &[0]), (1, &[1]), (-4, &[])])],
            ),
        ]
        .into_iter()
        .collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn degenerate_linear_elimination_uses_the_endpoints() {
        let symbols = vec![psym("u", SymKind::Parameter)];
        let func_names = vec!["I".to_string(), "J".to_string()];
        let mut lhs = Poly::zero();
        lhs.add_term(Mono::sym(0), AffineObservable::func(0));
        lhs.add_term(Mono::unit(), AffineObservable::func(1).scale(&rat(-1)));
        let pineq = ParametricInequality {
            lhs,
            cases: Vec::new(),
            rendered: String::from("test row"),
            case_strings: Vec::new(),
        };
        let out = eliminate_quadratic_param(&pineq, &symbols, &func_names, 0).unwrap();
        assert_eq!(out.len(), 2);
        let got: BTreeSet<(OutPoly, Vec<OutPoly>)> = out
            .iter()
            .map(|q| (q.lhs.clone(), q.cases.clone()))
            .collect();
        let expect: BTreeSet<(OutPoly, Vec<OutPoly>)> = [
            (
                out_poly(&[(1, &[0]), (-1, &[1])]),
                vec![out_poly(&[(-1, &[0])])],
            ),
            (
                out_poly(&[(-1, &[0]), (-1, &[1])]),
                vec![out_poly(&[(1, &[0])])],
            ),
        ]
        .into_iter()
        .collect();
        assert_eq!(got, expect);
    }

    /// For constant-coefficient convex quadratics the conjunction of the
    /// emitted inequalities (those whose guards hold) must agree exactly
    /// with interval minimization.
    #[test]
    fn quadratic_elimination_matches_interval_minimization() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut small = |span: u64, offset: i64| rat((rng.next_u64() % span) as i64 + offset);
        for _ in 0..1000 {
            let a = small(5, 1);
            let b = small(21, -10);
            let c = small(21, -10);
            let mut lo = small(9, -4);
            let mut hi = small(9, -4);
            if hi < lo {
                core::mem::swap(&mut lo, &mut hi);
            }
            let symbols = vec![ParamSymbol {
                name: String::from("u"),
                lo: lo.clone(),
                hi: hi.clone(),
                kind: SymKind::Parameter,
                coord: None,
            }];
            let mut lhs = Poly::zero();
            lhs.add_term(Mono(vec![0, 0]), AffineObservable::constant(a.clone()));
            lhs.add_term(Mono::sym(0), AffineObservable::constant(b.clone()));
            lhs.add_term(Mono::unit(), AffineObservable::constant(c.clone()));
            let pineq = ParametricInequality {
                lhs,
                cases: Vec::new(),
                rendered: String::new(),
                case_strings: Vec::new(),
            };
            let out = eliminate_quadratic_param(&pineq, &symbols, &[], 0).unwrap();
            let zero = Rat::zero();
            let emitted_ok = out.iter().all(|q| {
                let active = q
                    .cases
                    .iter()
                    .all(|g| !g.eval(&[], &zero).is_negative());
                !active || !q.lhs.eval(&[], &zero).is_positive()
            });
            let eval = |u: &Rat| &(&a * &(u * u)) + &(&(&b * u) + &c);
            let vertex = -&b / &(&a * &rat(2));
            let at = if vertex < lo {
                lo.clone()
            } else if vertex > hi {
                hi.clone()
            } else {
                vertex
            };
            let exact_ok = !eval(&at).is_positive();
            assert_eq!(
                emitted_ok, exact_ok,
                "mismatch for {a} u^2 + {b} u + {c} on [{lo}, {hi}]"
            );
        }
    }
}
