//! Super-symbols on the flat supercotangent bundle: polynomials in the even
//! coordinates `x^i, p_i` with Grassmann coefficients `xi^i`, and the
//! Poisson superbracket.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::ring::{exps_degree, Exps, Field, Scalar, MAX_DIM};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolError {
    #[error("signature mismatch: {0} vs {1}")]
    SignatureMismatch(MetricSignature, MetricSignature),
    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("unsupported signature ({p},{q}): need 2 <= p+q <= {max}")]
    BadSignature { p: usize, q: usize, max: usize },
}

/// Signature `(p, q)` of the flat metric `eta = diag(+1 x p, -1 x q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MetricSignature {
    pub p: usize,
    pub q: usize,
}

impl MetricSignature {
    pub fn new(p: usize, q: usize) -> Result<Self, SymbolError> {
        let n = p + q;
        if !(2..=MAX_DIM).contains(&n) {
            return Err(SymbolError::BadSignature { p, q, max: MAX_DIM });
        }
        Ok(MetricSignature { p, q })
    }

    /// Riemannian signature `(n, 0)`.
    pub fn euclidean(n: usize) -> Self {
        Self::new(n, 0).expect("dimension in range")
    }

    pub fn lorentzian(n: usize) -> Self {
        Self::new(n - 1, 1).expect("dimension in range")
    }

    pub fn dim(&self) -> usize {
        self.p + self.q
    }

    /// Diagonal entry `eta_ii` (0-based), equal to its own inverse.
    pub fn eta(&self, i: usize) -> i64 {
        if i < self.p {
            1
        } else {
            -1
        }
    }

    fn check_index(&self, i: usize) -> Result<(), SymbolError> {
        if i >= self.dim() {
            return Err(SymbolError::IndexOutOfRange { index: i + 1, n: self.dim() });
        }
        Ok(())
    }
}

impl fmt::Display for MetricSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.p, self.q)
    }
}

/// Bitmask helpers for strictly increasing index sets.
pub mod mask {
    /// Sign of reordering `xi^I xi^J` into increasing order (`I, J` disjoint).
    pub fn merge_sign(a: u16, b: u16) -> i64 {
        let mut swaps = 0u32;
        let mut rest = b;
        while rest != 0 {
            let j = rest.trailing_zeros();
            rest &= rest - 1;
            // elements of `a` above j must jump over xi^j
            swaps += (a >> (j + 1)).count_ones();
        }
        if swaps % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Number of elements of `m` strictly below `k`.
    pub fn below(m: u16, k: usize) -> u32 {
        (m & ((1u16 << k) - 1)).count_ones()
    }

    pub fn above(m: u16, k: usize) -> u32 {
        (m >> (k + 1)).count_ones()
    }

    pub fn indices(m: u16) -> impl Iterator<Item = usize> {
        (0..16).filter(move |i| m & (1 << i) != 0)
    }
}

/// Monomial `x^alpha p^beta xi^I`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mono {
    pub x: Exps,
    pub p: Exps,
    pub xi: u16,
}

impl Mono {
    pub const ONE: Mono = Mono { x: [0; MAX_DIM], p: [0; MAX_DIM], xi: 0 };

    pub fn x_degree(&self) -> u32 {
        exps_degree(&self.x)
    }

    pub fn p_degree(&self) -> u32 {
        exps_degree(&self.p)
    }

    pub fn xi_degree(&self) -> u32 {
        self.xi.count_ones()
    }

    /// Product with Grassmann sign, `None` when a xi repeats.
    pub fn mul(&self, o: &Mono) -> Option<(Mono, i64)> {
        if self.xi & o.xi != 0 {
            return None;
        }
        let mut m = *self;
        for k in 0..MAX_DIM {
            m.x[k] += o.x[k];
            m.p[k] += o.p[k];
        }
        m.xi |= o.xi;
        Some((m, mask::merge_sign(self.xi, o.xi)))
    }

    pub fn with_x(&self, x: Exps) -> Mono {
        Mono { x, ..*self }
    }
}

/// Finite sum of terms `c x^alpha p^beta xi^I` over a fixed signature.
#[derive(Clone, PartialEq)]
pub struct SuperSymbol<F: Field> {
    sig: MetricSignature,
    terms: BTreeMap<Mono, F>,
    /// Density weight carried as metadata; products add weights.
    pub weight: F,
}

impl<F: Field> SuperSymbol<F> {
    pub fn zero(sig: MetricSignature) -> Self {
        SuperSymbol { sig, terms: BTreeMap::new(), weight: F::zero() }
    }

    pub fn constant(sig: MetricSignature, c: F) -> Self {
        Self::monomial(sig, Mono::ONE, c)
    }

    pub fn monomial(sig: MetricSignature, m: Mono, c: F) -> Self {
        let mut s = Self::zero(sig);
        s.add_term(m, c);
        s
    }

    pub fn x(sig: MetricSignature, i: usize) -> Self {
        let mut m = Mono::ONE;
        m.x[i] = 1;
        Self::monomial(sig, m, F::one())
    }

    pub fn p(sig: MetricSignature, i: usize) -> Self {
        let mut m = Mono::ONE;
        m.p[i] = 1;
        Self::monomial(sig, m, F::one())
    }

    pub fn xi(sig: MetricSignature, i: usize) -> Self {
        Self::monomial(sig, Mono { xi: 1 << i, ..Mono::ONE }, F::one())
    }

    pub fn signature(&self) -> MetricSignature {
        self.sig
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &F)> {
        self.terms.iter()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Mono) -> F {
        self.terms.get(m).cloned().unwrap_or_else(F::zero)
    }

    pub fn with_weight(mut self, w: F) -> Self {
        self.weight = w;
        self
    }

    pub fn add_term(&mut self, m: Mono, c: F) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v = v.add(&c);
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    fn check_sig(&self, o: &Self) -> Result<(), SymbolError> {
        if self.sig != o.sig {
            return Err(SymbolError::SignatureMismatch(self.sig, o.sig));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.sig, o.sig, "signature mismatch");
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(*m, c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&F::from_int(-1))
    }

    pub fn scale(&self, s: &F) -> Self {
        let mut r = Self::zero(self.sig).with_weight(self.weight.clone());
        if s.is_zero() {
            return r;
        }
        for (m, c) in &self.terms {
            r.add_term(*m, c.mul(s));
        }
        r
    }

    pub fn scale_scalar(&self, s: &Scalar) -> Self {
        self.scale(&F::from_scalar(s))
    }

    /// Grassmann-algebra product; weights add.
    pub fn mul(&self, o: &Self) -> Result<Self, SymbolError> {
        self.check_sig(o)?;
        let mut r = Self::zero(self.sig).with_weight(self.weight.add(&o.weight));
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                if let Some((m, s)) = m1.mul(m2) {
                    r.add_term(m, c1.mul(c2).scale(&Scalar::from_int(s)));
                }
            }
        }
        Ok(r)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(self.sig, F::one());
        for _ in 0..e {
            acc = acc.mul(self).expect("same signature");
        }
        acc
    }

    /// Applies a linear map given on monomials.
    pub fn map_monomials(&self, mut f: impl FnMut(&Mono, &F, &mut Self)) -> Self {
        let mut r = Self::zero(self.sig).with_weight(self.weight.clone());
        for (m, c) in &self.terms {
            f(m, c, &mut r);
        }
        r
    }

    pub fn map_coeffs<G: Field>(&self, f: impl Fn(&F) -> G) -> SuperSymbol<G> {
        let mut r = SuperSymbol::zero(self.sig).with_weight(f(&self.weight));
        for (m, c) in &self.terms {
            r.add_term(*m, f(c));
        }
        r
    }

    /// Keeps the terms satisfying `pred`.
    pub fn filter(&self, pred: impl Fn(&Mono) -> bool) -> Self {
        let mut r = Self::zero(self.sig).with_weight(self.weight.clone());
        for (m, c) in &self.terms {
            if pred(m) {
                r.add_term(*m, c.clone());
            }
        }
        r
    }

    /// `d/dx^i`.
    pub fn diff_x(&self, i: usize) -> Self {
        self.map_monomials(|m, c, r| {
            if m.x[i] > 0 {
                let mut m2 = *m;
                m2.x[i] -= 1;
                r.add_term(m2, c.scale(&Scalar::from_int(m.x[i] as i64)));
            }
        })
    }

    /// `d/dp_i`.
    pub fn diff_p(&self, i: usize) -> Self {
        self.map_monomials(|m, c, r| {
            if m.p[i] > 0 {
                let mut m2 = *m;
                m2.p[i] -= 1;
                r.add_term(m2, c.scale(&Scalar::from_int(m.p[i] as i64)));
            }
        })
    }

    /// Left derivative `d/dxi^i`.
    pub fn diff_xi_left(&self, i: usize) -> Self {
        self.map_monomials(|m, c, r| {
            if m.xi & (1 << i) != 0 {
                let s = if mask::below(m.xi, i) % 2 == 0 { 1 } else { -1 };
                r.add_term(Mono { xi: m.xi & !(1 << i), ..*m }, c.scale(&Scalar::from_int(s)));
            }
        })
    }

    /// Right derivative `d/dxi^i` acting from the right.
    pub fn diff_xi_right(&self, i: usize) -> Self {
        self.map_monomials(|m, c, r| {
            if m.xi & (1 << i) != 0 {
                let s = if mask::above(m.xi, i) % 2 == 0 { 1 } else { -1 };
                r.add_term(Mono { xi: m.xi & !(1 << i), ..*m }, c.scale(&Scalar::from_int(s)));
            }
        })
    }

    /// Components of homogeneous parity; `None` for mixed or zero symbols.
    pub fn parity(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(|m| m.xi_degree() % 2);
        let first = it.next()?;
        it.all(|p| p == first).then_some(first)
    }

    /// Split into even and odd parts.
    pub fn split_parity(&self) -> (Self, Self) {
        (self.filter(|m| m.xi_degree() % 2 == 0), self.filter(|m| m.xi_degree() % 2 == 1))
    }

    pub fn degrees(&self) -> Degrees {
        Degrees {
            p_degree: self.terms.keys().map(Mono::p_degree).max(),
            xi_degrees: self.terms.keys().map(Mono::xi_degree).collect(),
            x_degree: self.terms.keys().map(Mono::x_degree).max(),
        }
    }

    /// Top p-degree part.
    pub fn principal_part(&self) -> Self {
        match self.degrees().p_degree {
            Some(k) => self.filter(|m| m.p_degree() == k),
            None => self.clone(),
        }
    }

    /// Renders in deterministic order with the formal parameter (if any) as `var`.
    pub fn render_with(&self, var: &str) -> String {
        let mut terms: Vec<(&Mono, &F)> = self.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| {
            (b.p_degree(), b.xi_degree(), b.x_degree())
                .cmp(&(a.p_degree(), a.xi_degree(), a.x_degree()))
                .then_with(|| b.cmp(a))
        });
        let n = self.sig.dim();
        let items = terms.into_iter().map(|(m, c)| (render_mono(m, n), c.render(var)));
        join_terms(items)
    }
}

fn render_mono(m: &Mono, n: usize) -> String {
    let mut parts = Vec::new();
    for i in 0..n {
        match m.x[i] {
            0 => {}
            1 => parts.push(format!("x{}", i + 1)),
            k => parts.push(format!("x{}^{}", i + 1, k)),
        }
    }
    for i in 0..n {
        match m.p[i] {
            0 => {}
            1 => parts.push(format!("p{}", i + 1)),
            k => parts.push(format!("p{}^{}", i + 1, k)),
        }
    }
    for i in mask::indices(m.xi) {
        parts.push(format!("xi{}", i + 1));
    }
    parts.join("*")
}

/// Joins `(monomial, coefficient)` renderings into `a*m1 + b*m2 - ...`.
pub(crate) fn join_terms(items: impl Iterator<Item = (String, String)>) -> String {
    let mut out = String::new();
    for (mono, coeff) in items {
        let compound = coeff.contains(" + ") || coeff.contains(" - ") || coeff.contains('/') && coeff.contains('(');
        let (neg, mag) = match coeff.strip_prefix('-') {
            Some(rest) if !compound => (true, rest.to_string()),
            _ => (false, coeff.clone()),
        };
        let body = if mono.is_empty() {
            if compound {
                format!("({mag})")
            } else {
                mag
            }
        } else if mag == "1" {
            mono
        } else if compound {
            format!("({mag})*{mono}")
        } else {
            format!("{mag}*{mono}")
        };
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        out.push_str(&body);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl<F: Field> fmt::Display for SuperSymbol<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_with("t"))
    }
}

impl<F: Field> fmt::Debug for SuperSymbol<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SuperSymbol{}[{}]", self.sig, self)
    }
}

/// Filtration data of a symbol; `None` degrees mark the zero symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Degrees {
    pub p_degree: Option<u32>,
    pub xi_degrees: BTreeSet<u32>,
    pub x_degree: Option<u32>,
}

/// Constants of the superbracket: `{x^i, p_j} = delta^i_j`,
/// `{xi^i, xi^j} = c_odd eta^{ij}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BracketConvention<F: Field> {
    pub hbar: F,
    pub c_odd: F,
}

impl<F: Field> BracketConvention<F> {
    /// The convention used throughout: `c_odd = 1/(i hbar)`.
    ///
    /// With it the spin components close on o(p,q), `{Delta, Delta} = c_odd R`,
    /// and the generator quantization `x -> x`, `p -> (hbar/i) d`,
    /// `xi -> gamma/sqrt 2` turns brackets into `(1/(i hbar))` times
    /// supercommutators.
    pub fn standard(hbar: F) -> Self {
        let ih = hbar.mul(&F::from_scalar(&Scalar::i()));
        let c_odd = ih.inv().expect("hbar must be nonzero");
        BracketConvention { hbar, c_odd }
    }

    /// `hbar / i`.
    pub fn hbar_over_i(&self) -> F {
        self.hbar.mul(&F::from_scalar(&Scalar::i().neg()))
    }
}

impl BracketConvention<Scalar> {
    pub fn unit() -> Self {
        Self::standard(Scalar::one())
    }
}

/// Poisson superbracket.
pub fn superbracket<F: Field>(
    s: &SuperSymbol<F>,
    t: &SuperSymbol<F>,
    conv: &BracketConvention<F>,
) -> Result<SuperSymbol<F>, SymbolError> {
    s.check_sig(t)?;
    let sig = s.sig;
    let mut r = SuperSymbol::zero(sig).with_weight(s.weight.add(&t.weight));
    for (m1, c1) in &s.terms {
        for (m2, c2) in &t.terms {
            bracket_monomials(sig, m1, m2, &c1.mul(c2), conv, &mut r);
        }
    }
    Ok(r)
}

/// Adds `c {m1, m2}` to `out`.
pub(crate) fn bracket_monomials<F: Field>(
    sig: MetricSignature,
    m1: &Mono,
    m2: &Mono,
    c: &F,
    conv: &BracketConvention<F>,
    out: &mut SuperSymbol<F>,
) {
    let n = sig.dim();
    // even part: d_x f d_p g - d_p f d_x g
    for i in 0..n {
        if m1.x[i] > 0 && m2.p[i] > 0 {
            let mut a = *m1;
            a.x[i] -= 1;
            let mut b = *m2;
            b.p[i] -= 1;
            if let Some((m, s)) = a.mul(&b) {
                let k = s * m1.x[i] as i64 * m2.p[i] as i64;
                out.add_term(m, c.scale(&Scalar::from_int(k)));
            }
        }
        if m1.p[i] > 0 && m2.x[i] > 0 {
            let mut a = *m1;
            a.p[i] -= 1;
            let mut b = *m2;
            b.x[i] -= 1;
            if let Some((m, s)) = a.mul(&b) {
                let k = -s * m1.p[i] as i64 * m2.x[i] as i64;
                out.add_term(m, c.scale(&Scalar::from_int(k)));
            }
        }
    }
    // odd part: c_odd eta^{ii} (f <-d_i) (d_i-> g)
    let common = m1.xi & m2.xi;
    for i in mask::indices(common) {
        let sr = if mask::above(m1.xi, i) % 2 == 0 { 1 } else { -1 };
        let sl = if mask::below(m2.xi, i) % 2 == 0 { 1 } else { -1 };
        let a = Mono { xi: m1.xi & !(1 << i), ..*m1 };
        let b = Mono { xi: m2.xi & !(1 << i), ..*m2 };
        if let Some((m, s)) = a.mul(&b) {
            let k = s * sr * sl * sig.eta(i);
            out.add_term(m, c.mul(&conv.c_odd).scale(&Scalar::from_int(k)));
        }
    }
}

/// Spin component `S^{ij} = (hbar/i) xi^i xi^j` (0-based indices).
pub fn spin_tensor<F: Field>(
    i: usize,
    j: usize,
    sig: MetricSignature,
    conv: &BracketConvention<F>,
) -> Result<SuperSymbol<F>, SymbolError> {
    sig.check_index(i)?;
    sig.check_index(j)?;
    let xi = SuperSymbol::<F>::xi(sig, i).mul(&SuperSymbol::xi(sig, j))?;
    Ok(xi.scale(&conv.hbar_over_i()))
}

/// The two distinguished invariant-building symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NamedSymbol {
    /// `Delta = p_i xi^i`
    Delta,
    /// `R = eta^{ij} p_i p_j`
    R,
}

pub fn named_symbol<F: Field>(name: NamedSymbol, sig: MetricSignature) -> SuperSymbol<F> {
    let n = sig.dim();
    let mut s = SuperSymbol::zero(sig);
    for i in 0..n {
        let mut m = Mono::ONE;
        match name {
            NamedSymbol::Delta => {
                m.p[i] = 1;
                m.xi = 1 << i;
                s.add_term(m, F::one());
            }
            NamedSymbol::R => {
                m.p[i] = 2;
                s.add_term(m, F::from_int(sig.eta(i)));
            }
        }
    }
    s
}

/// All index sets of size `k` in `0..n` as bitmasks, increasing.
pub fn subsets(n: usize, k: usize) -> Vec<u16> {
    let mut v: Vec<u16> = (0u16..(1 << n)).filter(|m| m.count_ones() as usize == k).collect();
    v.sort();
    v
}

/// All exponent vectors of total degree `d` in `n` variables, lexicographic.
pub fn exps_of_degree(n: usize, d: u32) -> Vec<Exps> {
    fn rec(n: usize, i: usize, left: u32, cur: &mut Exps, out: &mut Vec<Exps>) {
        if i == n - 1 {
            cur[i] = left as u8;
            out.push(*cur);
            cur[i] = 0;
            return;
        }
        for k in (0..=left).rev() {
            cur[i] = k as u8;
            rec(n, i + 1, left - k, cur, out);
        }
        cur[i] = 0;
    }
    let mut out = Vec::new();
    rec(n, 0, d, &mut [0; MAX_DIM], &mut out);
    out
}

/// Monomials of p-degree `k`, xi-degree `kappa`, x-degree `xdeg`.
pub fn monomials(n: usize, k: u32, kappa: usize, xdeg: u32) -> Vec<Mono> {
    let mut out = Vec::new();
    for x in exps_of_degree(n, xdeg) {
        for p in exps_of_degree(n, k) {
            for xi in subsets(n, kappa) {
                out.push(Mono { x, p, xi });
            }
        }
    }
    out
}
