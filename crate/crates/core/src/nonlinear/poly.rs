//! Polynomial arithmetic for the parametric elimination pipeline.
//!
//! Intermediate rows are polynomials over a small table of *symbols*
//! (constraint-factor quantities promoted out of the linear system, plus
//! derived aggregate symbols) whose coefficients are affine expressions in
//! the declared functionals and an optional slack magnitude.  The
//! coefficient type [`AffineObservable`] structurally enforces the pipeline
//! invariant that observables never multiply each other inside intermediate
//! rows.  The final elimination step widens into [`OutPoly`], which allows
//! functional degree two — the degree of the shipped inequalities.

use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::ratio::Rat;

/// Names for rendering polynomials: symbol names indexed by symbol id and
/// functional names indexed by functional id.
#[derive(Clone, Copy, Debug)]
pub struct RenderCtx<'a> {
    /// Symbol names, indexed by symbol id.
    pub sym_names: &'a [String],
    /// Functional names, indexed by functional index.
    pub func_names: &'a [String],
}

fn push_signed(out: &mut String, first: &mut bool, coeff: &Rat, body: Option<&str>) {
    if coeff.is_zero() {
        return;
    }
    let mag = coeff.abs();
    if *first {
        if coeff.is_negative() {
            out.push('-');
        }
        *first = false;
    } else if coeff.is_negative() {
        out.push_str(" - ");
    } else {
        out.push_str(" + ");
    }
    match body {
        None => out.push_str(&alloc::format!("{mag}")),
        Some(b) => {
            if mag.is_one() {
                out.push_str(b);
            } else {
                out.push_str(&alloc::format!("{mag}*{b}"));
            }
        }
    }
}

/// An affine expression `constant + Σ coeff_i · F_i + relax · C` over the
/// declared functionals `F_i` and the slack magnitude `C`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct AffineObservable {
    /// Constant part.
    pub constant: Rat,
    /// Functional index → nonzero coefficient.
    pub funcs: BTreeMap<usize, Rat>,
    /// Coefficient on the slack magnitude symbol.
    pub relax: Rat,
}

impl AffineObservable {
    /// The zero expression.
    #[must_use]
    pub fn zero() -> Self {
        AffineObservable {
            constant: Rat::zero(),
            funcs: BTreeMap::new(),
            relax: Rat::zero(),
        }
    }

    /// A constant expression.
    #[must_use]
    pub fn constant(c: Rat) -> Self {
        AffineObservable {
            constant: c,
            funcs: BTreeMap::new(),
            relax: Rat::zero(),
        }
    }

    /// The expression `1 · F_i`.
    #[must_use]
    pub fn func(i: usize) -> Self {
        let mut funcs = BTreeMap::new();
        funcs.insert(i, Rat::one());
        AffineObservable {
            constant: Rat::zero(),
            funcs,
            relax: Rat::zero(),
        }
    }

    /// Whether the expression is identically zero.
    #[must_use]
    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.funcs.is_empty() && self.relax.is_zero()
    }

    /// Whether the expression is a plain constant.
    #[must_use]
    pub fn is_constant(&self) -> bool {
        self.funcs.is_empty() && self.relax.is_zero()
    }

    fn normalize(&mut self) {
        self.funcs.retain(|_, v| !v.is_zero());
    }

    /// Sum of two expressions.
    #[must_use]
    pub fn add(&self, other: &AffineObservable) -> AffineObservable {
        let mut out = self.clone();
        out.constant = &out.constant + &other.constant;
        out.relax = &out.relax + &other.relax;
        for (k, v) in &other.funcs {
            let e = out.funcs.entry(*k).or_insert_with(Rat::zero);
            *e = &*e + v;
        }
        out.normalize();
        out
    }

    /// Negation.
    #[must_use]
    pub fn neg(&self) -> AffineObservable {
        let mut out = self.clone();
        out.constant = -out.constant;
        out.relax = -out.relax;
        for v in out.funcs.values_mut() {
            *v = -v.clone();
        }
        out
    }

    /// Scaling by a rational.
    #[must_use]
    pub fn scale(&self, s: &Rat) -> AffineObservable {
        if s.is_zero() {
            return AffineObservable::zero();
        }
        let mut out = self.clone();
        out.constant = &out.constant * s;
        out.relax = &out.relax * s;
        for v in out.funcs.values_mut() {
            *v = &*v * s;
        }
        out
    }

    /// Product, defined only when at least one side is constant (the
    /// pipeline never multiplies two observable-bearing coefficients).
    #[must_use]
    pub fn mul(&self, other: &AffineObservable) -> Option<AffineObservable> {
        if self.is_constant() {
            Some(other.scale(&self.constant))
        } else if other.is_constant() {
            Some(self.scale(&other.constant))
        } else {
            None
        }
    }

    /// Exact value at a point (functional values indexed by functional id).
    #[must_use]
    pub fn eval(&self, func_vals: &[Rat], relax: &Rat) -> Rat {
        let mut v = self.constant.clone();
        for (k, c) in &self.funcs {
            v = &v + &(c * &func_vals[*k]);
        }
        &v + &(&self.relax * relax)
    }

    /// All rational coefficients, for common-denominator scans.
    fn coeff_iter(&self) -> impl Iterator<Item = &Rat> {
        core::iter::once(&self.constant)
            .chain(self.funcs.values())
            .chain(core::iter::once(&self.relax))
    }

    /// Human-readable form.
    #[must_use]
    pub fn render(&self, ctx: &RenderCtx<'_>) -> String {
        let mut out = String::new();
        let mut first = true;
        push_signed(&mut out, &mut first, &self.constant, None);
        for (k, v) in &self.funcs {
            push_signed(&mut out, &mut first, v, Some(&ctx.func_names[*k]));
        }
        push_signed(&mut out, &mut first, &self.relax, Some("C"));
        if first {
            out.push('0');
        }
        out
    }
}

/// A monomial over symbol ids: a sorted multiset (repeated entries are
/// powers).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    /// The empty monomial (degree zero).
    #[must_use]
    pub fn unit() -> Self {
        Mono(Vec::new())
    }

    /// The degree-one monomial for a symbol.
    #[must_use]
    pub fn sym(s: u32) -> Self {
        Mono(vec![s])
    }

    /// Product of two monomials.
    #[must_use]
    pub fn mul(&self, other: &Mono) -> Mono {
        let mut v = Vec::with_capacity(self.0.len() + other.0.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        v.sort_unstable();
        Mono(v)
    }

    /// Multiplicity of a symbol in the monomial.
    #[must_use]
    pub fn power(&self, s: u32) -> usize {
        self.0.iter().filter(|&&x| x == s).count()
    }

    /// Number of entries satisfying a symbol predicate.
    pub fn degree_where(&self, mut pred: impl FnMut(u32) -> bool) -> usize {
        self.0.iter().filter(|&&x| pred(x)).count()
    }

    /// Copy with all entries equal to `s` removed.
    #[must_use]
    pub fn without(&self, s: u32) -> Mono {
        Mono(self.0.iter().copied().filter(|&x| x != s).collect())
    }
}

/// A polynomial over symbols with [`AffineObservable`] coefficients,
/// used for every intermediate row (convention: rows assert `poly >= 0`).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Poly {
    terms: BTreeMap<Mono, AffineObservable>,
}

impl Poly {
    /// The zero polynomial.
    #[must_use]
    pub fn zero() -> Self {
        Poly {
            terms: BTreeMap::new(),
        }
    }

    /// A symbol-free polynomial.
    #[must_use]
    pub fn from_affine(a: AffineObservable) -> Self {
        let mut p = Poly::zero();
        p.add_term(Mono::unit(), a);
        p
    }

    /// The degree-one polynomial for a symbol.
    #[must_use]
    pub fn sym(s: u32) -> Self {
        let mut p = Poly::zero();
        p.add_term(Mono::sym(s), AffineObservable::constant(Rat::one()));
        p
    }

    /// Adds `coeff · mono` in place.
    pub fn add_term(&mut self, mono: Mono, coeff: AffineObservable) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(mono) {
            alloc::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            alloc::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&coeff);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    /// Whether the polynomial is identically zero.
    #[must_use]
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Term view (monomial, coefficient), sorted by monomial.
    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &AffineObservable)> {
        self.terms.iter()
    }

    /// Sum.
    #[must_use]
    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    /// Negation.
    #[must_use]
    pub fn neg(&self) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.neg());
        }
        out
    }

    /// Scaling by a rational.
    #[must_use]
    pub fn scale(&self, s: &Rat) -> Poly {
        if s.is_zero() {
            return Poly::zero();
        }
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.scale(s));
        }
        out
    }

    /// Product with a coefficient expression; `None` when two
    /// observable-bearing coefficients would multiply.
    #[must_use]
    pub fn mul_affine(&self, a: &AffineObservable) -> Option<Poly> {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.mul(a)?);
        }
        Some(out)
    }

    /// Product of two polynomials; `None` when any coefficient product
    /// would multiply two observable-bearing expressions.
    #[must_use]
    pub fn mul(&self, other: &Poly) -> Option<Poly> {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1.mul(c2)?);
            }
        }
        Some(out)
    }

    /// Set of symbols with nonzero occurrence.
    #[must_use]
    pub fn syms(&self) -> BTreeSet<u32> {
        let mut s = BTreeSet::new();
        for m in self.terms.keys() {
            s.extend(m.0.iter().copied());
        }
        s
    }

    /// Largest power of `s` across monomials.
    #[must_use]
    pub fn max_power(&self, s: u32) -> usize {
        self.terms.keys().map(|m| m.power(s)).max().unwrap_or(0)
    }

    /// Largest per-monomial count of symbols satisfying the predicate.
    pub fn max_degree_where(&self, mut pred: impl FnMut(u32) -> bool) -> usize {
        self.terms
            .keys()
            .map(|m| m.degree_where(&mut pred))
            .max()
            .unwrap_or(0)
    }

    /// Splits by the power of `s`: returns `(a2, a1, a0)` with
    /// `self = a2·s² + a1·s + a0`; `None` when a higher power occurs.
    #[must_use]
    pub fn split_quadratic(&self, s: u32) -> Option<(Poly, Poly, Poly)> {
        let mut parts = [Poly::zero(), Poly::zero(), Poly::zero()];
        for (m, c) in &self.terms {
            let p = m.power(s);
            if p > 2 {
                return None;
            }
            parts[p].add_term(m.without(s), c.clone());
        }
        let [a0, a1, a2] = parts;
        Some((a2, a1, a0))
    }

    /// Substitutes `s := k·s + d` (an affine change of the symbol).
    #[must_use]
    pub fn subst_sym_affine(&self, s: u32, k: &Rat, d: &Rat) -> Poly {
        let replacement = {
            let mut r = Poly::sym(s).scale(k);
            r.add_term(Mono::unit(), AffineObservable::constant(d.clone()));
            r
        };
        let mut out = Poly::zero();
        for (mono, c) in &self.terms {
            let power = mono.power(s);
            let mut term = Poly::zero();
            term.add_term(mono.without(s), c.clone());
            for _ in 0..power {
                term = term
                    .mul(&replacement)
                    .expect("affine replacement has constant coefficients");
            }
            out = out.add(&term);
        }
        out
    }

    /// Replaces every occurrence of symbol `m` by the product `u·w`.
    #[must_use]
    pub fn subst_product(&self, m: u32, u: u32, w: u32) -> Poly {
        let mut out = Poly::zero();
        for (mono, c) in &self.terms {
            let mut v = Vec::with_capacity(mono.0.len() * 2);
            for &x in &mono.0 {
                if x == m {
                    v.push(u);
                    v.push(w);
                } else {
                    v.push(x);
                }
            }
            v.sort_unstable();
            out.add_term(Mono(v), c.clone());
        }
        out
    }

    /// Exact value at a point: symbol values indexed by symbol id,
    /// functional values by functional id.
    #[must_use]
    pub fn eval(&self, sym_vals: &[Rat], func_vals: &[Rat], relax: &Rat) -> Rat {
        let mut total = Rat::zero();
        for (m, c) in &self.terms {
            let mut prod = c.eval(func_vals, relax);
            for &s in &m.0 {
                prod = &prod * &sym_vals[s as usize];
            }
            total = &total + &prod;
        }
        total
    }

    /// The coefficient expression when the polynomial is symbol-free.
    #[must_use]
    pub fn as_affine(&self) -> Option<AffineObservable> {
        if self.terms.is_empty() {
            return Some(AffineObservable::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&Mono::unit()) {
                return Some(c.clone());
            }
        }
        None
    }

    /// Whether every monomial has degree ≤ 1 (affine in the symbols).
    #[must_use]
    pub fn is_sym_affine(&self) -> bool {
        self.terms.keys().all(|m| m.0.len() <= 1)
    }

    /// Whether any coefficient references a functional or the slack symbol.
    #[must_use]
    pub fn references_observables(&self) -> bool {
        self.terms.values().any(|c| !c.is_constant())
    }

    /// Primitive-integer rescaling: multiplies by the unique positive
    /// rational making all coefficients coprime integers.  Zero is fixed.
    #[must_use]
    pub fn canonical(&self) -> Poly {
        let Some(scale) = primitive_scale(self.terms.values().flat_map(AffineObservable::coeff_iter))
        else {
            return self.clone();
        };
        self.scale(&scale)
    }

    /// Human-readable form (terms sorted by monomial).
    #[must_use]
    pub fn render(&self, ctx: &RenderCtx<'_>) -> String {
        if self.terms.is_empty() {
            return String::from("0");
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let coeff = c.render(ctx);
            let wrapped = if c.funcs.len() + usize::from(!c.constant.is_zero())
                + usize::from(!c.relax.is_zero())
                > 1
            {
                alloc::format!("({coeff})")
            } else {
                coeff
            };
            if i > 0 {
                out.push_str(" + ");
            }
            if m.0.is_empty() {
                out.push_str(&wrapped);
            } else {
                let mono: Vec<&str> = m
                    .0
                    .iter()
                    .map(|&s| ctx.sym_names[s as usize].as_str())
                    .collect();
                if wrapped == "1" {
                    out.push_str(&mono.join("*"));
                } else {
                    out.push_str(&alloc::format!("{wrapped}*{}", mono.join("*")));
                }
            }
        }
        out
    }
}

/// Positive rational `s` such that scaling by `s` yields coprime integers;
/// `None` when all inputs are zero.
fn primitive_scale<'a>(coeffs: impl Iterator<Item = &'a Rat>) -> Option<Rat> {
    use num_bigint::BigInt;
    use num_integer::Integer;
    let mut denom_lcm: Option<BigInt> = None;
    let mut numer_gcd: Option<BigInt> = None;
    for c in coeffs {
        if c.is_zero() {
            continue;
        }
        denom_lcm = Some(match denom_lcm {
            None => c.denom().clone(),
            Some(l) => l.lcm(c.denom()),
        });
        numer_gcd = Some(match numer_gcd {
            None => c.numer().abs(),
            Some(g) => g.gcd(c.numer()),
        });
    }
    let (l, g) = (denom_lcm?, numer_gcd?);
    Some(Rat::new(l, g))
}

/// A variable of a shipped polynomial inequality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum OutVar {
    /// A declared functional, by index.
    Func(usize),
    /// The slack magnitude symbol.
    Relax,
}

/// A monomial over output variables: a sorted multiset.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct OutMono(pub Vec<OutVar>);

/// A polynomial over the declared functionals and the slack symbol, with
/// rational coefficients — the shape of a shipped inequality side.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct OutPoly {
    terms: BTreeMap<OutMono, Rat>,
}

impl OutPoly {
    /// The zero polynomial.
    #[must_use]
    pub fn zero() -> Self {
        OutPoly {
            terms: BTreeMap::new(),
        }
    }

    /// Adds `coeff · mono` in place.
    pub fn add_term(&mut self, mono: OutMono, coeff: Rat) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(mono) {
            alloc::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            alloc::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = &*e.get() + &coeff;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    /// Embeds an affine expression as a degree-≤-1 polynomial.
    #[must_use]
    pub fn from_affine(a: &AffineObservable) -> OutPoly {
        let mut out = OutPoly::zero();
        out.add_term(OutMono(Vec::new()), a.constant.clone());
        for (k, v) in &a.funcs {
            out.add_term(OutMono(vec![OutVar::Func(*k)]), v.clone());
        }
        out.add_term(OutMono(vec![OutVar::Relax]), a.relax.clone());
        out
    }

    /// The square of an affine expression (degree ≤ 2).
    #[must_use]
    pub fn square_affine(a: &AffineObservable) -> OutPoly {
        let mut vars: Vec<(OutVar, Rat)> = Vec::new();
        for (k, v) in &a.funcs {
            vars.push((OutVar::Func(*k), v.clone()));
        }
        if !a.relax.is_zero() {
            vars.push((OutVar::Relax, a.relax.clone()));
        }
        let mut out = OutPoly::zero();
        out.add_term(OutMono(Vec::new()), &a.constant * &a.constant);
        for (x, cx) in &vars {
            let double = Rat::from_integer(2.into());
            out.add_term(OutMono(vec![*x]), &(&a.constant * cx) * &double);
            out.add_term(OutMono(vec![*x, *x]), cx * cx);
        }
        for i in 0..vars.len() {
            for j in (i + 1)..vars.len() {
                let (x, cx) = &vars[i];
                let (y, cy) = &vars[j];
                let mut mono = vec![*x, *y];
                mono.sort_unstable();
                let double = Rat::from_integer(2.into());
                out.add_term(OutMono(mono), &(cx * cy) * &double);
            }
        }
        out
    }

    /// Whether the polynomial is identically zero.
    #[must_use]
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Term view (monomial, coefficient), sorted by monomial.
    pub fn terms(&self) -> impl Iterator<Item = (&OutMono, &Rat)> {
        self.terms.iter()
    }

    /// Sum.
    #[must_use]
    pub fn add(&self, other: &OutPoly) -> OutPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    /// Negation.
    #[must_use]
    pub fn neg(&self) -> OutPoly {
        let mut out = OutPoly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    /// Scaling by a rational.
    #[must_use]
    pub fn scale(&self, s: &Rat) -> OutPoly {
        let mut out = OutPoly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * s);
        }
        out
    }

    /// Largest monomial degree.
    #[must_use]
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.0.len()).max().unwrap_or(0)
    }

    /// Largest per-monomial count of functional variables.
    #[must_use]
    pub fn func_degree(&self) -> usize {
        self.terms
            .keys()
            .map(|m| {
                m.0.iter()
                    .filter(|v| matches!(v, OutVar::Func(_)))
                    .count()
            })
            .max()
            .unwrap_or(0)
    }

    /// Exact value at a point.
    #[must_use]
    pub fn eval(&self, func_vals: &[Rat], relax: &Rat) -> Rat {
        let mut total = Rat::zero();
        for (m, c) in &self.terms {
            let mut prod = c.clone();
            for v in &m.0 {
                prod = match v {
                    OutVar::Func(i) => &prod * &func_vals[*i],
                    OutVar::Relax => &prod * relax,
                };
            }
            total = &total + &prod;
        }
        total
    }

    /// Primitive-integer rescaling (positive factor only).
    #[must_use]
    pub fn canonical(&self) -> OutPoly {
        let Some(scale) = primitive_scale(self.terms.values()) else {
            return self.clone();
        };
        self.scale(&scale)
    }

    /// Human-readable form.
    #[must_use]
    pub fn render(&self, func_names: &[String]) -> String {
        if self.terms.is_empty() {
            return String::from("0");
        }
        let mut out = String::new();
        let mut first = true;
        for (m, c) in &self.terms {
            if m.0.is_empty() {
                push_signed(&mut out, &mut first, c, None);
            } else {
                let mono: Vec<&str> = m
                    .0
                    .iter()
                    .map(|v| match v {
                        OutVar::Func(i) => func_names[*i].as_str(),
                        OutVar::Relax => "C",
                    })
                    .collect();
                push_signed(&mut out, &mut first, c, Some(&mono.join("*")));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::{rat, ratio};
    use alloc::string::ToString;

    fn names() -> (Vec<String>, Vec<String>) {
        (
            vec!["u".to_string(), "w".to_string(), "m".to_string()],
            vec!["I".to_string(), "J".to_string()],
        )
    }

    #[test]
    fn affine_arithmetic_and_observable_product_guard() {
        let i = AffineObservable::func(0);
        let j = AffineObservable::func(1);
        let two = AffineObservable::constant(rat(2));
        let s = i.add(&j.neg()).add(&two); // 2 + I - J
        assert_eq!(s.eval(&[rat(3), rat(1)], &Rat::zero()), rat(4));
        assert!(s.mul(&two).is_some());
        assert!(s.mul(&i).is_none(), "observable times observable is rejected");
        let (sn, fnm) = names();
        let ctx = RenderCtx {
            sym_names: &sn,
            func_names: &fnm,
        };
        assert_eq!(s.render(&ctx), "2 + I - J");
    }

    #[test]
    fn product_substitution_rewrites_symbol_occurrences() {
        // 1 + m  with  m := u*w  becomes  1 + u*w.
        let mut p = Poly::from_affine(AffineObservable::constant(rat(1)));
        p.add_term(Mono::sym(2), AffineObservable::constant(rat(1)));
        let q = p.subst_product(2, 0, 1);
        assert_eq!(q.max_power(0), 1);
        assert_eq!(q.max_power(1), 1);
        assert_eq!(q.max_power(2), 0);
        // Evaluate at u=1/2, w=-1/3: 1 + (1/2)(-1/3) = 5/6.
        assert_eq!(q.eval(&[ratio(1, 2), ratio(-1, 3), rat(0)], &[], &Rat::zero()), ratio(5, 6));
    }

    #[test]
    fn quadratic_split_recovers_the_three_parts() {
        // p = 2u^2 + (I - J)u + (J - 2)  (symbol 0 = u).
        let mut p = Poly::zero();
        p.add_term(Mono(vec![0, 0]), AffineObservable::constant(rat(2)));
        p.add_term(
            Mono::sym(0),
            AffineObservable::func(0).add(&AffineObservable::func(1).neg()),
        );
        p.add_term(
            Mono::unit(),
            AffineObservable::func(1).add(&AffineObservable::constant(rat(-2))),
        );
        let (a2, a1, a0) = p.split_quadratic(0).unwrap();
        assert_eq!(a2.as_affine().unwrap(), AffineObservable::constant(rat(2)));
        assert_eq!(
            a1.as_affine().unwrap(),
            AffineObservable::func(0).add(&AffineObservable::func(1).neg())
        );
        assert!(a0.as_affine().unwrap().funcs.contains_key(&1));
        let mut cubic = p.clone();
        cubic.add_term(Mono(vec![0, 0, 0]), AffineObservable::constant(rat(1)));
        assert!(cubic.split_quadratic(0).is_none());
    }

    #[test]
    fn canonical_scaling_reaches_coprime_integers() {
        let mut p = Poly::zero();
        p.add_term(Mono::sym(0), AffineObservable::constant(ratio(2, 3)));
        p.add_term(Mono::unit(), AffineObservable::constant(ratio(-4, 3)));
        let c = p.canonical();
        let (sn, fnm) = names();
        let ctx = RenderCtx {
            sym_names: &sn,
            func_names: &fnm,
        };
        assert_eq!(c.render(&ctx), "-2 + 1*u".replace("1*u", "u"));
    }

    #[test]
    fn squaring_an_affine_expression_expands_exactly() {
        // (I - J + 4)^2 = I^2 - 2IJ + J^2 + 8I - 8J + 16.
        let a = AffineObservable {
            constant: rat(4),
            funcs: [(0usize, rat(1)), (1usize, rat(-1))].into_iter().collect(),
            relax: Rat::zero(),
        };
        let sq = OutPoly::square_affine(&a);
        assert_eq!(sq.eval(&[rat(2), rat(1)], &Rat::zero()), rat(25));
        assert_eq!(sq.eval(&[rat(-4), rat(0)], &Rat::zero()), rat(0));
        assert_eq!(sq.degree(), 2);
    }

    #[test]
    fn out_poly_canonicalization_and_render() {
        let mut p = OutPoly::zero();
        p.add_term(OutMono(vec![OutVar::Func(0), OutVar::Func(0)]), ratio(-1, 8));
        p.add_term(OutMono(vec![OutVar::Func(0)]), rat(1));
        p.add_term(OutMono(Vec::new()), rat(-2));
        let c = p.canonical();
        let (_, fnm) = names();
        assert_eq!(c.render(&fnm), "-16 + 8*I - I*I");
    }
}
