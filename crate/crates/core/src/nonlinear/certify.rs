//! Sign certification of polynomial forms over the reachable region.
//!
//! Every multiplier used by a pairing step, every case condition, and every
//! pruning decision is backed by an exact certificate: affine forms are
//! bounded by scanning (or, under case conditions, by an exact LP over) the
//! region's extreme points or the symbol boxes, and observable-free
//! quadratic forms are classified through a symmetric square decomposition
//! (sum of squares, or a certified product of two affine factors).

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::linalg::{dot, symmetric_decompose};
use crate::linear::lp::{self, LpOutcome};
use crate::ratio::Rat;

use super::poly::{AffineObservable, Poly};
use super::ParamSymbol;

/// Certified sign of a form over a region.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    /// Identically zero on the region.
    Zero,
    /// Nonnegative on the region.
    NonNeg,
    /// Nonpositive on the region.
    NonPos,
    /// Provably attains both signs (candidate for a case split).
    Indefinite,
    /// No certificate found.
    Unknown,
}

/// Maps functionals and symbols to coordinates of a region vertex vector
/// (coordinate 0 is the homogenizing 1).
#[derive(Clone, Debug)]
pub struct Layout {
    /// Number of declared functionals.
    pub n_funcs: usize,
    /// Vertex-vector coordinate of each symbol, indexed by symbol id.
    pub sym_coords: Vec<usize>,
    /// Total width of a vertex vector.
    pub width: usize,
}

impl Layout {
    /// Vertex-vector coordinate of functional `i`.
    #[must_use]
    pub fn func_coord(&self, i: usize) -> usize {
        1 + i
    }
}

/// The reachable region a certificate quantifies over.
#[derive(Clone, Copy, Debug)]
pub enum Region<'a> {
    /// Convex hull of explicit extreme points (model-backed derivation).
    Hull {
        /// Extreme points, each with unit coordinate 1.
        verts: &'a [Vec<Rat>],
        /// Coordinate layout of the points.
        layout: &'a Layout,
    },
    /// Product of symbol domain intervals (standalone elimination, where no
    /// vertex description is available).
    Boxes {
        /// The symbol table with domain intervals.
        symbols: &'a [ParamSymbol],
    },
}

/// Exact bounds of a form over a (possibly condition-restricted) region.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RegionBounds {
    /// The restricted region is empty.
    Empty,
    /// `min`/`max` over the region; `None` means unbounded on that side.
    Range(Option<Rat>, Option<Rat>),
}

/// Splits a jointly affine polynomial into a coordinate vector over the
/// layout (constant, functionals, symbols) plus the slack coefficient.
/// `None` when some symbol monomial has a non-constant coefficient or a
/// monomial has degree above one.
fn affine_vector(form: &Poly, layout: &Layout) -> Option<(Vec<Rat>, Rat)> {
    let mut vec_out = vec![Rat::zero(); layout.width];
    let mut relax = Rat::zero();
    for (mono, coeff) in form.terms() {
        match mono.0.len() {
            0 => {
                vec_out[0] = coeff.constant.clone();
                for (f, c) in &coeff.funcs {
                    vec_out[layout.func_coord(*f)] = c.clone();
                }
                relax = coeff.relax.clone();
            }
            1 => {
                if !coeff.is_constant() {
                    return None;
                }
                let coord = layout.sym_coords[mono.0[0] as usize];
                vec_out[coord] = &vec_out[coord] + &coeff.constant;
            }
            _ => return None,
        }
    }
    Some((vec_out, relax))
}

/// Affine conversion for the box region: `(constant, per-symbol coeffs,
/// slack coefficient)`; `None` when the form touches functionals, or has
/// degree above one.
fn box_vector(form: &Poly, n_syms: usize) -> Option<(Rat, Vec<Rat>, Rat)> {
    let mut constant = Rat::zero();
    let mut coeffs = vec![Rat::zero(); n_syms];
    let mut relax = Rat::zero();
    for (mono, coeff) in form.terms() {
        if !coeff.funcs.is_empty() {
            return None;
        }
        match mono.0.len() {
            0 => {
                constant = coeff.constant.clone();
                relax = coeff.relax.clone();
            }
            1 => {
                if !coeff.relax.is_zero() {
                    return None;
                }
                let s = mono.0[0] as usize;
                coeffs[s] = &coeffs[s] + &coeff.constant;
            }
            _ => return None,
        }
    }
    Some((constant, coeffs, relax))
}

/// Tightens per-symbol intervals using the single-symbol affine conditions;
/// returns `None` when some tightened interval is empty.
fn tightened_intervals(symbols: &[ParamSymbol], conds: &[Poly]) -> Option<Vec<(Rat, Rat)>> {
    let mut iv: Vec<(Rat, Rat)> = symbols.iter().map(|s| (s.lo.clone(), s.hi.clone())).collect();
    for cond in conds {
        let Some((c0, cs, crelax)) = box_vector(cond, symbols.len()) else {
            continue; // multi-symbol or observable-bearing: ignored (sound).
        };
        // A positive slack coefficient lets the unbounded slack absorb the
        // condition, so it cannot tighten anything.  A negative one only
        // strengthens `c0 + cs·s >= 0`, which is then safe to use.
        if crelax.is_positive() {
            continue;
        }
        let nonzero: Vec<usize> = (0..cs.len()).filter(|&i| !cs[i].is_zero()).collect();
        if nonzero.len() != 1 {
            continue;
        }
        let s = nonzero[0];
        let bound = -&c0 / &cs[s];
        if cs[s].is_positive() {
            if bound > iv[s].0 {
                iv[s].0 = bound;
            }
        } else if bound < iv[s].1 {
            iv[s].1 = bound;
        }
        if iv[s].0 > iv[s].1 {
            return None;
        }
    }
    Some(iv)
}

fn add_relax_side(
    base_min: Option<Rat>,
    base_max: Option<Rat>,
    relax: &Rat,
) -> (Option<Rat>, Option<Rat>) {
    // The slack magnitude ranges over [0, +inf).
    let min = if relax.is_negative() { None } else { base_min };
    let max = if relax.is_positive() { None } else { base_max };
    (min, max)
}

/// Exact bounds of an affine form over the condition-restricted region;
/// `None` when the form is not certifiably affine over the region model.
pub fn affine_bounds(form: &Poly, conds: &[Poly], region: Region<'_>) -> Option<RegionBounds> {
    match region {
        Region::Hull { verts, layout } => {
            let (fvec, relax) = affine_vector(form, layout)?;
            if verts.is_empty() {
                return Some(RegionBounds::Empty);
            }
            if conds.is_empty() {
                let mut values = verts.iter().map(|v| dot(&fvec, v));
                let first = values.next()?;
                let (mut lo, mut hi) = (first.clone(), first);
                for v in values {
                    if v < lo {
                        lo = v.clone();
                    }
                    if v > hi {
                        hi = v;
                    }
                }
                let (min, max) = add_relax_side(Some(lo), Some(hi), &relax);
                return Some(RegionBounds::Range(min, max));
            }
            // Exact LP over mixture weights of the vertices.
            let n = verts.len();
            let mut rows: Vec<(Vec<Rat>, Rat)> = Vec::new();
            for i in 0..n {
                let mut r = vec![Rat::zero(); n];
                r[i] = Rat::from_integer(1.into());
                rows.push((r, Rat::zero()));
            }
            let ones = vec![Rat::from_integer(1.into()); n];
            rows.push((ones.clone(), Rat::from_integer((-1).into())));
            rows.push((
                ones.iter().map(|x| -x.clone()).collect(),
                Rat::from_integer(1.into()),
            ));
            for cond in conds {
                let (cvec, crelax) = affine_vector(cond, layout)?;
                if !crelax.is_zero() {
                    return None; // slack-dependent condition: no vertex model.
                }
                let r: Vec<Rat> = verts.iter().map(|v| dot(&cvec, v)).collect();
                rows.push((r, Rat::zero()));
            }
            let objective: Vec<Rat> = verts.iter().map(|v| dot(&fvec, v)).collect();
            let min = match lp::minimize(&rows, &objective) {
                LpOutcome::Optimal { value, .. } => value,
                LpOutcome::Infeasible => return Some(RegionBounds::Empty),
                LpOutcome::Unbounded => return None,
            };
            let max = match lp::maximize(&rows, &objective) {
                LpOutcome::Optimal { value, .. } => value,
                LpOutcome::Infeasible => return Some(RegionBounds::Empty),
                LpOutcome::Unbounded => return None,
            };
            let (min, max) = add_relax_side(Some(min), Some(max), &relax);
            Some(RegionBounds::Range(min, max))
        }
        Region::Boxes { symbols } => {
            let (constant, coeffs, relax) = box_vector(form, symbols.len())?;
            let Some(iv) = tightened_intervals(symbols, conds) else {
                return Some(RegionBounds::Empty);
            };
            let mut lo = constant.clone();
            let mut hi = constant;
            for (c, (l, h)) in coeffs.iter().zip(&iv) {
                if c.is_positive() {
                    lo = &lo + &(c * l);
                    hi = &hi + &(c * h);
                } else {
                    lo = &lo + &(c * h);
                    hi = &hi + &(c * l);
                }
            }
            let (min, max) = add_relax_side(Some(lo), Some(hi), &relax);
            Some(RegionBounds::Range(min, max))
        }
    }
}

/// Whether the condition-restricted region is provably nonempty.
#[must_use]
pub fn region_feasible(conds: &[Poly], region: Region<'_>) -> bool {
    if conds.is_empty() {
        return true;
    }
    let one = Poly::from_affine(AffineObservable::constant(Rat::from_integer(1.into())));
    match affine_bounds(&one, conds, region) {
        Some(RegionBounds::Empty) => false,
        // Conservative: treat unbounded/unknown as feasible.
        _ => true,
    }
}

fn sign_from_bounds(b: &RegionBounds) -> Sign {
    match b {
        RegionBounds::Empty => Sign::Zero,
        RegionBounds::Range(min, max) => {
            let lo_nonneg = min.as_ref().is_some_and(|m| !m.is_negative());
            let hi_nonpos = max.as_ref().is_some_and(|m| !m.is_positive());
            match (lo_nonneg, hi_nonpos) {
                (true, true) => Sign::Zero,
                (true, false) => Sign::NonNeg,
                (false, true) => Sign::NonPos,
                (false, false) => {
                    let lo_neg = match min {
                        Some(m) => m.is_negative(),
                        None => true,
                    };
                    let hi_pos = match max {
                        Some(m) => m.is_positive(),
                        None => true,
                    };
                    if lo_neg && hi_pos {
                        Sign::Indefinite
                    } else {
                        Sign::Unknown
                    }
                }
            }
        }
    }
}

/// Exact square root of a nonnegative rational, when it is one.
fn rational_sqrt(x: &Rat) -> Option<Rat> {
    if x.is_negative() {
        return None;
    }
    let sn = x.numer().sqrt();
    let sd = x.denom().sqrt();
    if &(&sn * &sn) == x.numer() && &(&sd * &sd) == x.denom() {
        Some(Rat::new(sn, sd))
    } else {
        None
    }
}

/// Certifies the sign of a form over the condition-restricted region.
///
/// Jointly affine forms are bounded exactly; observable-free quadratic
/// forms are classified by symmetric square decomposition (definite sums of
/// squares, or a hyperbolic pair certifying a product of two affine
/// factors, each then certified recursively).  Anything else is `Unknown`.
#[must_use]
pub fn certify(form: &Poly, conds: &[Poly], region: Region<'_>) -> Sign {
    if form.is_zero() {
        return Sign::Zero;
    }
    if let Some(b) = affine_bounds(form, conds, region) {
        return sign_from_bounds(&b);
    }
    quadratic_sign(form, conds, region)
}

/// Quadratic classification: definite decompositions and certified products
/// of affine pairs.
fn quadratic_sign(form: &Poly, conds: &[Poly], region: Region<'_>) -> Sign {
    // Observable-free, total degree <= 2.
    let syms: Vec<u32> = form.syms().into_iter().collect();
    let mut index = alloc::collections::BTreeMap::new();
    for (i, s) in syms.iter().enumerate() {
        index.insert(*s, i + 1);
    }
    let n = syms.len() + 1;
    let mut q = vec![vec![Rat::zero(); n]; n];
    let half = Rat::new(1.into(), 2.into());
    for (mono, coeff) in form.terms() {
        if !coeff.is_constant() {
            return Sign::Unknown;
        }
        let c = &coeff.constant;
        match mono.0.len() {
            0 => q[0][0] = &q[0][0] + c,
            1 => {
                let i = index[&mono.0[0]];
                let h = c * &half;
                q[0][i] = &q[0][i] + &h;
                q[i][0] = &q[i][0] + &h;
            }
            2 => {
                let i = index[&mono.0[0]];
                let j = index[&mono.0[1]];
                if i == j {
                    q[i][i] = &q[i][i] + c;
                } else {
                    let h = c * &half;
                    q[i][j] = &q[i][j] + &h;
                    q[j][i] = &q[j][i] + &h;
                }
            }
            _ => return Sign::Unknown,
        }
    }
    let terms = symmetric_decompose(q);
    let nonzero: Vec<_> = terms.iter().filter(|t| !t.coeff.is_zero()).collect();
    if nonzero.is_empty() {
        return Sign::Zero;
    }
    if nonzero.iter().all(|t| t.coeff.is_positive()) {
        return Sign::NonNeg;
    }
    if nonzero.iter().all(|t| t.coeff.is_negative()) {
        return Sign::NonPos;
    }
    if nonzero.len() == 2 {
        let (p_term, m_term) = if nonzero[0].coeff.is_positive() {
            (nonzero[0], nonzero[1])
        } else {
            (nonzero[1], nonzero[0])
        };
        let ratio = -(&m_term.coeff) / &p_term.coeff;
        if let Some(r) = rational_sqrt(&ratio) {
            // form = c (P^2 - r^2 M^2) = c (P + rM)(P - rM) with c > 0.
            let to_poly = |plus: bool| -> Poly {
                let mut p = Poly::zero();
                for (k, (pv, mv)) in p_term.form.iter().zip(&m_term.form).enumerate() {
                    let mv = mv * &r;
                    let c = if plus { pv + &mv } else { pv - &mv };
                    if c.is_zero() {
                        continue;
                    }
                    if k == 0 {
                        p = p.add(&Poly::from_affine(AffineObservable::constant(c)));
                    } else {
                        p = p.add(&Poly::sym(syms[k - 1]).scale(&c));
                    }
                }
                p
            };
            let l1 = to_poly(true);
            let l2 = to_poly(false);
            let s1 = certify(&l1, conds, region);
            let s2 = certify(&l2, conds, region);
            return match (s1, s2) {
                (Sign::Zero, _) | (_, Sign::Zero) => Sign::Zero,
                (Sign::NonNeg, Sign::NonNeg) | (Sign::NonPos, Sign::NonPos) => Sign::NonNeg,
                (Sign::NonNeg, Sign::NonPos) | (Sign::NonPos, Sign::NonNeg) => Sign::NonPos,
                _ => Sign::Unknown,
            };
        }
    }
    Sign::Unknown
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::rat;
    use alloc::string::ToString;

    use super::super::poly::Mono;
    use super::super::SymKind;

    fn sym_table() -> Vec<ParamSymbol> {
        vec![
            ParamSymbol {
                name: "u".to_string(),
                lo: rat(-1),
                hi: rat(1),
                kind: SymKind::Parameter,
                coord: None,
            },
            ParamSymbol {
                name: "w".to_string(),
                lo: rat(-1),
                hi: rat(1),
                kind: SymKind::Parametric,
                coord: None,
            },
        ]
    }

    #[test]
    fn box_bounds_and_condition_tightening() {
        let symbols = sym_table();
        let region = Region::Boxes { symbols: &symbols };
        // 1 + u over u in [-1, 1]: range [0, 2] -> NonNeg.
        let form = Poly::sym(0).add(&Poly::from_affine(AffineObservable::constant(rat(1))));
        assert_eq!(certify(&form, &[], region), Sign::NonNeg);
        // u alone is indefinite, but under the condition u >= 0 it's NonNeg.
        let u = Poly::sym(0);
        assert_eq!(certify(&u, &[], region), Sign::Indefinite);
        let cond = Poly::sym(0);
        assert_eq!(certify(&u, &[cond.clone()], region), Sign::NonNeg);
        // Contradictory conditions empty the region.
        let anti = Poly::sym(0)
            .neg()
            .add(&Poly::from_affine(AffineObservable::constant(rat(-1))));
        assert!(!region_feasible(&[cond, anti], region));
    }

    #[test]
    fn hull_bounds_scan_vertices_and_respect_conditions() {
        // One functional F, one symbol u; vertices (1, F, u):
        // (1, 4, 1), (1, -4, -1), (1, 0, 1).
        let layout = Layout {
            n_funcs: 1,
            sym_coords: vec![2],
            width: 3,
        };
        let verts = vec![
            vec![rat(1), rat(4), rat(1)],
            vec![rat(1), rat(-4), rat(-1)],
            vec![rat(1), rat(0), rat(1)],
        ];
        let region = Region::Hull {
            verts: &verts,
            layout: &layout,
        };
        // Form 4 - F >= 0 everywhere (min 0 at first vertex).
        let form = Poly::from_affine(
            AffineObservable::constant(rat(4)).add(&AffineObservable::func(0).neg()),
        );
        assert_eq!(certify(&form, &[], region), Sign::NonNeg);
        // F alone is indefinite over the hull.  Under the mixture
        // condition u >= 0 the worst mixture pairs (-4, -1) with (0, 1)
        // at equal weight: u = 0, F = -2.
        let f = Poly::from_affine(AffineObservable::func(0));
        assert_eq!(certify(&f, &[], region), Sign::Indefinite);
        let cond = Poly::sym(0);
        let b = affine_bounds(&f, &[cond], region).unwrap();
        assert_eq!(b, RegionBounds::Range(Some(rat(-2)), Some(rat(4))));
    }

    #[test]
    fn quadratic_products_certify_through_square_decomposition() {
        // (1 - u)(1 + w) = 1 - u + w - u w: NonNeg over the box.
        let symbols = sym_table();
        let region = Region::Boxes { symbols: &symbols };
        let mut p = Poly::from_affine(AffineObservable::constant(rat(1)));
        p.add_term(Mono::sym(0), AffineObservable::constant(rat(-1)));
        p.add_term(Mono::sym(1), AffineObservable::constant(rat(1)));
        p.add_term(Mono(vec![0, 1]), AffineObservable::constant(rat(-1)));
        assert_eq!(certify(&p, &[], region), Sign::NonNeg);
        // u^2 + w^2 is NonNeg, -(u^2 + w^2) is NonPos.
        let mut sq = Poly::zero();
        sq.add_term(Mono(vec![0, 0]), AffineObservable::constant(rat(1)));
        sq.add_term(Mono(vec![1, 1]), AffineObservable::constant(rat(1)));
        assert_eq!(certify(&sq, &[], region), Sign::NonNeg);
        assert_eq!(certify(&sq.neg(), &[], region), Sign::NonPos);
        // u w alone decomposes as a hyperbolic pair, but the factors
        // (u + w) and (u - w) are indefinite: Unknown.
        let mut uw = Poly::zero();
        uw.add_term(Mono(vec![0, 1]), AffineObservable::constant(rat(1)));
        assert_eq!(certify(&uw, &[], region), Sign::Unknown);
    }

    #[test]
    fn relax_coefficient_directions() {
        let symbols = sym_table();
        let region = Region::Boxes { symbols: &symbols };
        // 2C >= 0 for slack C in [0, inf): NonNeg with unbounded max.
        let mut c2 = AffineObservable::zero();
        c2.relax = rat(2);
        let form = Poly::from_affine(c2);
        assert_eq!(certify(&form, &[], region), Sign::NonNeg);
        // 1 - C can reach any negative value: Indefinite.
        let mut mc = AffineObservable::constant(rat(1));
        mc.relax = rat(-1);
        assert_eq!(certify(&Poly::from_affine(mc), &[], region), Sign::Indefinite);
    }
}
