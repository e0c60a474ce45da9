//! The conformal algebra o(p+1,q+1) of flat `(R^n, eta)` and its actions on
//! tensorial symbols, Hamiltonian symbols and (via normal ordering) spinor
//! differential operators.
//!
//! Conventions. Generators are polynomial vector fields and `[X, Y]` is the
//! vector-field commutator. Every module action `L_X` is a representation
//! for that bracket: `[L_X, L_Y] = L_[X,Y]`. On Hamiltonian symbols this
//! forces `L_X s = {s, J_X} + delta Div(X) s`, and the moment map satisfies
//! `{J_Y, J_X} = J_[X,Y]` (it is a morphism into the opposite bracket).

mod casimir;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::ring::{Field, LinearSystem, Scalar, SolveOutcome, XPoly, MAX_DIM};
use crate::symalg::{
    bracket_monomials, spin_tensor, BracketConvention, MetricSignature, SuperSymbol,
};

pub use casimir::{casimir_apply, casimir_matrix, killing_form, CasimirError, CasimirOperator};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConformalError {
    #[error("vector field is not conformal Killing")]
    NotConformalKilling,
    #[error("vector field is not in the span of the conformal generators")]
    NotInAlgebra,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum GeneratorKind {
    Translation(usize),
    Rotation(usize, usize),
    Dilation,
    Special(usize),
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorKind::Translation(i) => write!(f, "T{}", i + 1),
            GeneratorKind::Rotation(i, j) => write!(f, "M{}{}", i + 1, j + 1),
            GeneratorKind::Dilation => write!(f, "E"),
            GeneratorKind::Special(i) => write!(f, "K{}", i + 1),
        }
    }
}

/// A conformal Killing vector field `X = X^i d_i` with polynomial components.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfGenerator {
    pub kind: Option<GeneratorKind>,
    pub sig: MetricSignature,
    pub comps: Vec<XPoly<Scalar>>,
}

/// `x_i = eta_ii x^i` as a polynomial.
fn x_lower(sig: MetricSignature, i: usize) -> XPoly<Scalar> {
    XPoly::coord(i).scale(&Scalar::from_int(sig.eta(i)))
}

fn x_square(sig: MetricSignature) -> XPoly<Scalar> {
    (0..sig.dim()).fold(XPoly::zero(), |acc, a| acc.add(&XPoly::coord(a).mul(&x_lower(sig, a))))
}

impl ConfGenerator {
    pub fn new(sig: MetricSignature, kind: GeneratorKind) -> Self {
        let n = sig.dim();
        let zero = || vec![XPoly::<Scalar>::zero(); n];
        let comps = match kind {
            GeneratorKind::Translation(i) => {
                let mut c = zero();
                c[i] = XPoly::constant(Scalar::one());
                c
            }
            // x_i d_j - x_j d_i
            GeneratorKind::Rotation(i, j) => {
                let mut c = zero();
                c[j] = x_lower(sig, i);
                c[i] = x_lower(sig, j).scale(&Scalar::from_int(-1));
                c
            }
            GeneratorKind::Dilation => (0..n).map(XPoly::coord).collect(),
            // (x.x) d_i - 2 x_i x^a d_a
            GeneratorKind::Special(i) => {
                let xi = x_lower(sig, i).scale(&Scalar::from_int(-2));
                let mut c: Vec<XPoly<Scalar>> = (0..n).map(|a| xi.mul(&XPoly::coord(a))).collect();
                c[i] = c[i].add(&x_square(sig));
                c
            }
        };
        ConfGenerator { kind: Some(kind), sig, comps }
    }

    pub fn from_components(sig: MetricSignature, comps: Vec<XPoly<Scalar>>) -> Self {
        ConfGenerator { kind: None, sig, comps }
    }

    pub fn dim(&self) -> usize {
        self.sig.dim()
    }

    /// `Div(X) = d_i X^i`.
    pub fn div(&self) -> XPoly<Scalar> {
        (0..self.dim()).fold(XPoly::zero(), |acc, i| acc.add(&self.comps[i].diff(i)))
    }

    /// `d_i X^j`.
    pub fn jacobian(&self, i: usize, j: usize) -> XPoly<Scalar> {
        self.comps[j].diff(i)
    }

    /// `omega_ij = (d_i X_j - d_j X_i) / 2` with `X_j = eta_jj X^j`.
    pub fn omega(&self, i: usize, j: usize) -> XPoly<Scalar> {
        let a = self.jacobian(i, j).scale(&Scalar::from_int(self.sig.eta(j)));
        let b = self.jacobian(j, i).scale(&Scalar::from_int(self.sig.eta(i)));
        a.sub(&b).scale(&Scalar::frac(1, 2))
    }

    pub fn is_conformal_killing(&self) -> bool {
        is_conformal_killing(self.sig, &self.comps)
    }

    /// Vector-field commutator `[X, Y]^i = X(Y^i) - Y(X^i)`.
    pub fn bracket(&self, o: &ConfGenerator) -> ConfGenerator {
        let n = self.dim();
        let apply = |v: &ConfGenerator, f: &XPoly<Scalar>| {
            (0..n).fold(XPoly::zero(), |acc, a| acc.add(&v.comps[a].mul(&f.diff(a))))
        };
        let comps = (0..n).map(|i| apply(self, &o.comps[i]).sub(&apply(o, &self.comps[i]))).collect();
        ConfGenerator::from_components(self.sig, comps)
    }

    pub fn scale(&self, s: &Scalar) -> ConfGenerator {
        ConfGenerator::from_components(self.sig, self.comps.iter().map(|c| c.scale(s)).collect())
    }

    pub fn add(&self, o: &ConfGenerator) -> ConfGenerator {
        ConfGenerator::from_components(
            self.sig,
            self.comps.iter().zip(&o.comps).map(|(a, b)| a.add(b)).collect(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(XPoly::is_zero)
    }

    pub fn label(&self) -> String {
        self.kind.map_or_else(|| "X".to_string(), |k| k.to_string())
    }
}

/// `d_(i X_j) - (2/n) Div(X) eta_ij = 0` identically.
pub fn is_conformal_killing(sig: MetricSignature, comps: &[XPoly<Scalar>]) -> bool {
    let n = sig.dim();
    let x = ConfGenerator::from_components(sig, comps.to_vec());
    let div = x.div();
    for i in 0..n {
        for j in i..n {
            let sym = x
                .jacobian(i, j)
                .scale(&Scalar::from_int(sig.eta(j)))
                .add(&x.jacobian(j, i).scale(&Scalar::from_int(sig.eta(i))));
            let mut rhs = XPoly::zero();
            if i == j {
                rhs = div.scale(&Scalar::frac(2 * sig.eta(i), n as i64));
            }
            if !sym.sub(&rhs).is_zero() {
                return false;
            }
        }
    }
    true
}

/// Standard basis: translations, rotations `i<j`, dilation, special conformal.
pub fn generators(sig: MetricSignature) -> Vec<ConfGenerator> {
    let n = sig.dim();
    let mut out: Vec<ConfGenerator> =
        (0..n).map(|i| ConfGenerator::new(sig, GeneratorKind::Translation(i))).collect();
    for i in 0..n {
        for j in i + 1..n {
            out.push(ConfGenerator::new(sig, GeneratorKind::Rotation(i, j)));
        }
    }
    out.push(ConfGenerator::new(sig, GeneratorKind::Dilation));
    out.extend((0..n).map(|i| ConfGenerator::new(sig, GeneratorKind::Special(i))));
    out
}

/// Coordinates of a vector field in the basis of [`generators`].
pub fn decompose(basis: &[ConfGenerator], v: &ConfGenerator) -> Result<Vec<Scalar>, ConformalError> {
    let n = v.dim();
    // One equation per (component, monomial) pair that occurs anywhere.
    let mut keys = std::collections::BTreeSet::new();
    for g in basis.iter().chain(std::iter::once(v)) {
        for (i, c) in g.comps.iter().enumerate() {
            for (e, _) in c.terms() {
                keys.insert((i, *e));
            }
        }
    }
    let mut sys = LinearSystem::<Scalar>::new(basis.len());
    for (i, e) in keys {
        let row = basis.iter().enumerate().map(|(a, g)| (a, g.comps[i].coeff(&e))).collect();
        sys.push_row(row, v.comps[i].coeff(&e));
    }
    debug_assert_eq!(n, v.comps.len());
    match sys.solve() {
        SolveOutcome::Unique(c) => Ok(c),
        _ => Err(ConformalError::NotInAlgebra),
    }
}

/// Structure constants `[X_a, X_b] = f_ab^c X_c` of the generator basis.
pub fn structure_constants(sig: MetricSignature) -> Vec<Vec<Vec<Scalar>>> {
    let basis = generators(sig);
    basis
        .iter()
        .map(|a| basis.iter().map(|b| decompose(&basis, &a.bracket(b)).expect("algebra closes")).collect())
        .collect()
}

/// Multiplies a symbol by a polynomial in `x`.
pub fn mul_xpoly<F: Field>(s: &SuperSymbol<F>, f: &XPoly<Scalar>) -> SuperSymbol<F> {
    let mut r = SuperSymbol::zero(s.signature()).with_weight(s.weight.clone());
    for (e, c) in f.terms() {
        let cf = F::from_scalar(c);
        for (m, v) in s.terms() {
            let mut m2 = *m;
            for k in 0..MAX_DIM {
                m2.x[k] += e[k];
            }
            r.add_term(m2, v.mul(&cf));
        }
    }
    r
}

/// Super moment map `J_X = p_k X^k + (1/2) omega_ij S^ij`.
pub fn moment<F: Field>(
    x: &ConfGenerator,
    conv: &BracketConvention<F>,
) -> Result<SuperSymbol<F>, ConformalError> {
    if !x.is_conformal_killing() {
        return Err(ConformalError::NotConformalKilling);
    }
    let sig = x.sig;
    let n = sig.dim();
    let mut j = SuperSymbol::zero(sig);
    for k in 0..n {
        j = j.add(&mul_xpoly(&SuperSymbol::p(sig, k), &x.comps[k]));
    }
    // (1/2) sum_{i,j} omega_ij S^ij = sum_{i<j} omega_ij S^ij
    for a in 0..n {
        for b in a + 1..n {
            let w = x.omega(a, b);
            if !w.is_zero() {
                j = j.add(&mul_xpoly(&spin_tensor(a, b, sig, conv).expect("indices in range"), &w));
            }
        }
    }
    Ok(j)
}

/// A generator with its moment and divergence precomputed over `F`.
#[derive(Clone, Debug)]
pub struct PreparedGenerator<F: Field> {
    pub gen: ConfGenerator,
    pub moment: SuperSymbol<F>,
    pub div: XPoly<Scalar>,
}

impl<F: Field> PreparedGenerator<F> {
    pub fn new(gen: &ConfGenerator, conv: &BracketConvention<F>) -> Result<Self, ConformalError> {
        Ok(PreparedGenerator { gen: gen.clone(), moment: moment(gen, conv)?, div: gen.div() })
    }
}

pub fn prepare_all<F: Field>(sig: MetricSignature, conv: &BracketConvention<F>) -> Vec<PreparedGenerator<F>> {
    generators(sig).iter().map(|g| PreparedGenerator::new(g, conv).expect("basis is conformal Killing")).collect()
}

/// Hamiltonian action on `S^delta[xi]`: `{s, J_X} + delta Div(X) s`.
pub fn action_s<F: Field>(
    g: &PreparedGenerator<F>,
    delta: &F,
    s: &SuperSymbol<F>,
    conv: &BracketConvention<F>,
) -> SuperSymbol<F> {
    let sig = s.signature();
    let mut r = SuperSymbol::zero(sig).with_weight(s.weight.clone());
    for (m1, c1) in s.terms() {
        for (m2, c2) in g.moment.terms() {
            bracket_monomials(sig, m1, m2, &c1.mul(c2), conv, &mut r);
        }
    }
    if !delta.is_zero() {
        r = r.add(&mul_xpoly(s, &g.div).scale(delta));
    }
    r
}

/// Natural action on weighted tensors `T^delta[xi]`: cotangent lift on
/// `(x, p)`, Jacobian action on `xi ~ dx`, and weight `delta - kappa/n` on
/// the xi-degree-`kappa` component.
pub fn action_t<F: Field>(g: &PreparedGenerator<F>, delta: &F, t: &SuperSymbol<F>) -> SuperSymbol<F> {
    let sig = t.signature();
    let n = sig.dim();
    let x = &g.gen;
    let mut r = SuperSymbol::zero(sig).with_weight(t.weight.clone());
    for i in 0..n {
        if !x.comps[i].is_zero() {
            r = r.add(&mul_xpoly(&t.diff_x(i), &x.comps[i]));
        }
    }
    for i in 0..n {
        for j in 0..n {
            let dij = x.jacobian(i, j);
            if dij.is_zero() {
                continue;
            }
            // - p_j d_i X^j d/dp_i
            let dp = t.diff_p(i);
            if !dp.is_zero() {
                let pj = SuperSymbol::<F>::p(sig, j).mul(&dp).unwrap();
                r = r.sub(&mul_xpoly(&pj, &dij));
            }
            // + d_i X^j xi^i d/dxi^j
            let dxi = t.diff_xi_left(j);
            if !dxi.is_zero() {
                let xi = SuperSymbol::<F>::xi(sig, i).mul(&dxi).unwrap();
                r = r.add(&mul_xpoly(&xi, &dij));
            }
        }
    }
    let nn = Scalar::from_int(n as i64);
    for kappa in 0..=n {
        let comp = t.filter(|m| m.xi_degree() as usize == kappa);
        if comp.is_zero() {
            continue;
        }
        let w = delta.sub(&F::from_scalar(&Scalar::from_int(kappa as i64).mul(&nn.inv().unwrap())));
        if !w.is_zero() {
            r = r.add(&mul_xpoly(&comp, &x.div()).scale(&w));
        }
    }
    r
}
