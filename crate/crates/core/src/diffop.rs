//! Differential operators on spinor fields, `sum c x^alpha gamma^I d^beta`,
//! kept in normal order (multiplications left of derivatives).

use std::collections::BTreeMap;
use std::fmt;

use crate::clifford::{blade_mul, blade_name, kosmann, Matrix};
use crate::conformal::ConfGenerator;
use crate::ring::{exps_degree, Exps, Field, Scalar, XPoly, MAX_DIM};
use crate::symalg::{join_terms, BracketConvention, MetricSignature, Mono, SuperSymbol};

/// Key of a normal-ordered term: `(alpha, I, beta)`.
pub type OpKey = (Exps, u16, Exps);

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SpinorOperator<F: Field> {
    sig: MetricSignature,
    terms: BTreeMap<OpKey, F>,
}

fn binom(n: u8, k: u8) -> i64 {
    (0..k as i64).fold(1, |acc, i| acc * (n as i64 - i) / (i + 1))
}

fn falling(n: u8, k: u8) -> i64 {
    (0..k as i64).fold(1, |acc, i| acc * (n as i64 - i))
}

/// All `nu <= bound` componentwise.
fn sub_exps(bound: &Exps) -> Vec<Exps> {
    let mut out = vec![[0u8; MAX_DIM]];
    for k in 0..MAX_DIM {
        if bound[k] == 0 {
            continue;
        }
        out = out
            .into_iter()
            .flat_map(|e| {
                (0..=bound[k]).map(move |v| {
                    let mut e2 = e;
                    e2[k] = v;
                    e2
                })
            })
            .collect();
    }
    out
}

impl<F: Field> SpinorOperator<F> {
    pub fn zero(sig: MetricSignature) -> Self {
        SpinorOperator { sig, terms: BTreeMap::new() }
    }

    pub fn identity(sig: MetricSignature) -> Self {
        let mut op = Self::zero(sig);
        op.add_term([0; MAX_DIM], 0, [0; MAX_DIM], F::one());
        op
    }

    pub fn signature(&self) -> MetricSignature {
        self.sig
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OpKey, &F)> {
        self.terms.iter()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, k: &OpKey) -> F {
        self.terms.get(k).cloned().unwrap_or_else(F::zero)
    }

    pub fn add_term(&mut self, alpha: Exps, blade: u16, beta: Exps, c: F) {
        if c.is_zero() {
            return;
        }
        let key = (alpha, blade, beta);
        let v = self.terms.entry(key).or_insert_with(F::zero);
        *v = v.add(&c);
        if v.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for ((a, i, b), c) in &o.terms {
            r.add_term(*a, *i, *b, c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        SpinorOperator { sig: self.sig, terms: self.terms.iter().map(|(k, c)| (*k, c.neg())).collect() }
    }

    pub fn scale(&self, s: &F) -> Self {
        let mut r = Self::zero(self.sig);
        for ((a, i, b), c) in &self.terms {
            r.add_term(*a, *i, *b, c.mul(s));
        }
        r
    }

    /// Order as a differential operator; `None` for zero.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|(_, _, b)| exps_degree(b)).max()
    }

    /// `self o other`, re-normal-ordered by the Leibniz rule.
    pub fn compose(&self, o: &Self) -> Self {
        let mut r = Self::zero(self.sig);
        for ((a1, i1, b1), c1) in &self.terms {
            for ((a2, i2, b2), c2) in &o.terms {
                let (s, blade) = blade_mul(self.sig, *i1, *i2);
                let base = c1.mul(c2);
                let mut bound = [0u8; MAX_DIM];
                for k in 0..MAX_DIM {
                    bound[k] = b1[k].min(a2[k]);
                }
                for nu in sub_exps(&bound) {
                    let mut w = s;
                    let (mut alpha, mut beta) = ([0u8; MAX_DIM], [0u8; MAX_DIM]);
                    for k in 0..MAX_DIM {
                        w *= binom(b1[k], nu[k]) * falling(a2[k], nu[k]);
                        alpha[k] = a1[k] + a2[k] - nu[k];
                        beta[k] = b1[k] - nu[k] + b2[k];
                    }
                    r.add_term(alpha, blade, beta, base.scale(&Scalar::from_int(w)));
                }
            }
        }
        r
    }

    pub fn commutator(&self, o: &Self) -> Self {
        self.compose(o).sub(&o.compose(self))
    }

    pub fn map_coeffs<G: Field>(&self, f: impl Fn(&F) -> G) -> SpinorOperator<G> {
        let mut r = SpinorOperator::zero(self.sig);
        for ((a, i, b), c) in &self.terms {
            r.add_term(*a, *i, *b, f(c));
        }
        r
    }

    /// Deterministic rendering, highest order first, e.g. `x1*g1_2*d2^2`.
    pub fn render_with(&self, var: &str) -> String {
        let n = self.sig.dim();
        let mut keys: Vec<(&OpKey, &F)> = self.terms.iter().collect();
        keys.sort_by(|((a1, i1, b1), _), ((a2, i2, b2), _)| {
            (exps_degree(b2), i2.count_ones(), exps_degree(a2))
                .cmp(&(exps_degree(b1), i1.count_ones(), exps_degree(a1)))
                .then_with(|| (b2, i2, a2).cmp(&(b1, i1, a1)))
        });
        let items = keys.into_iter().map(|((a, i, b), c)| {
            let mut parts = Vec::new();
            for k in 0..n {
                match a[k] {
                    0 => {}
                    1 => parts.push(format!("x{}", k + 1)),
                    e => parts.push(format!("x{}^{}", k + 1, e)),
                }
            }
            if *i != 0 {
                parts.push(blade_name(*i));
            }
            for k in 0..n {
                match b[k] {
                    0 => {}
                    1 => parts.push(format!("d{}", k + 1)),
                    e => parts.push(format!("d{}^{}", k + 1, e)),
                }
            }
            (parts.join("*"), c.render(var))
        });
        join_terms(items)
    }
}

impl<F: Field> fmt::Display for SpinorOperator<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_with("t"))
    }
}

impl SpinorOperator<Scalar> {
    /// Applies the operator to a spinor field given by polynomial components,
    /// using `gammas` as the Clifford representation.
    pub fn act_on(&self, psi: &[XPoly<Scalar>], gammas: &[Matrix]) -> Vec<XPoly<Scalar>> {
        let d = psi.len();
        let mut out = vec![XPoly::zero(); d];
        for ((a, i, b), c) in &self.terms {
            let mut der: Vec<XPoly<Scalar>> = psi.to_vec();
            for k in 0..MAX_DIM {
                for _ in 0..b[k] {
                    der = der.iter().map(|f| f.diff(k)).collect();
                }
            }
            let g = crate::clifford::CliffordElement::<Scalar>::blade(self.sig, *i, c.clone());
            let m = crate::clifford::represent(&g, gammas);
            let xa = XPoly::monomial(*a, Scalar::one());
            for r in 0..d {
                for s in 0..d {
                    if !m[r][s].is_zero() && !der[s].is_zero() {
                        out[r] = out[r].add(&der[s].mul(&xa).scale(&m[r][s]));
                    }
                }
            }
        }
        out
    }
}

/// Per-term rescaling between symbols and operators: `(hbar/i)^|beta| / sqrt2^|I|`.
fn order_factor<F: Field>(conv: &BracketConvention<F>, beta_deg: u32, xi_deg: u32) -> F {
    let hi = conv.hbar_over_i();
    let mut f = F::one();
    for _ in 0..beta_deg {
        f = f.mul(&hi);
    }
    let inv_sqrt2 = Scalar::sqrt2().mul(&Scalar::frac(1, 2));
    f.scale(&inv_sqrt2.pow(xi_deg))
}

/// Normal ordering `x^alpha p^beta xi^I -> (hbar/i)^|beta| 2^{-|I|/2} x^alpha gamma^I d^beta`.
pub fn normal_order<F: Field>(s: &SuperSymbol<F>, conv: &BracketConvention<F>) -> SpinorOperator<F> {
    let mut op = SpinorOperator::zero(s.signature());
    for (m, c) in s.terms() {
        op.add_term(m.x, m.xi, m.p, c.mul(&order_factor(conv, m.p_degree(), m.xi_degree())));
    }
    op
}

/// Inverse of [`normal_order`].
pub fn full_symbol<F: Field>(d: &SpinorOperator<F>, conv: &BracketConvention<F>) -> SuperSymbol<F> {
    let mut s = SuperSymbol::zero(d.signature());
    for ((a, i, b), c) in d.terms() {
        let f = order_factor(conv, exps_degree(b), i.count_ones());
        s.add_term(Mono { x: *a, p: *b, xi: *i }, c.mul(&f.inv().expect("hbar is nonzero")));
    }
    s
}

/// Top-order part of the full symbol.
pub fn principal_symbol<F: Field>(d: &SpinorOperator<F>, conv: &BracketConvention<F>) -> SuperSymbol<F> {
    full_symbol(d, conv).principal_part()
}

/// `L_X D = L^mu_X o D - D o L^lambda_X` on operators from lambda- to mu-densities.
pub fn adjoint_action<F: Field>(x: &ConfGenerator, lambda: &F, mu: &F, d: &SpinorOperator<F>) -> SpinorOperator<F> {
    kosmann(x, mu).compose(d).sub(&d.compose(&kosmann(x, lambda)))
}

/// The adjoint action transported to symbols through normal ordering.
pub fn action_d<F: Field>(
    x: &ConfGenerator,
    lambda: &F,
    mu: &F,
    s: &SuperSymbol<F>,
    conv: &BracketConvention<F>,
) -> SuperSymbol<F> {
    full_symbol(&adjoint_action(x, lambda, mu, &normal_order(s, conv)), conv)
}
