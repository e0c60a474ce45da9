//! Clifford algebra `Cl(p,q)` with `gamma^i gamma^j + gamma^j gamma^i = 2 eta^{ij}`,
//! a matrix model for validation, and the Kosmann-type spinor Lie derivative.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::conformal::ConfGenerator;
use crate::diffop::{normal_order, SpinorOperator};
use crate::ring::{Field, Scalar, MAX_DIM};
use crate::symalg::{join_terms, mask, BracketConvention, MetricSignature, SuperSymbol};

/// Product of basis blades: `gamma^I gamma^J = sign gamma^(I xor J)`.
pub fn blade_mul(sig: MetricSignature, a: u16, b: u16) -> (i64, u16) {
    let mut sign = mask::merge_sign(a, b);
    for i in mask::indices(a & b) {
        sign *= sig.eta(i);
    }
    (sign, a ^ b)
}

/// Element `sum c_I gamma^I` over increasing index sets `I`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CliffordElement<F: Field> {
    sig: MetricSignature,
    terms: BTreeMap<u16, F>,
}

impl<F: Field> CliffordElement<F> {
    pub fn zero(sig: MetricSignature) -> Self {
        CliffordElement { sig, terms: BTreeMap::new() }
    }

    pub fn scalar(sig: MetricSignature, c: F) -> Self {
        Self::blade(sig, 0, c)
    }

    pub fn blade(sig: MetricSignature, m: u16, c: F) -> Self {
        let mut e = Self::zero(sig);
        e.add_term(m, c);
        e
    }

    pub fn gamma(sig: MetricSignature, i: usize) -> Self {
        Self::blade(sig, 1 << i, F::one())
    }

    pub fn signature(&self) -> MetricSignature {
        self.sig
    }

    pub fn terms(&self) -> impl Iterator<Item = (&u16, &F)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: u16) -> F {
        self.terms.get(&m).cloned().unwrap_or_else(F::zero)
    }

    pub fn add_term(&mut self, m: u16, c: F) {
        if c.is_zero() {
            return;
        }
        let v = self.terms.entry(m).or_insert_with(F::zero);
        *v = v.add(&c);
        if v.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(*m, c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&F::one().neg()))
    }

    pub fn scale(&self, s: &F) -> Self {
        let mut r = Self::zero(self.sig);
        for (m, c) in &self.terms {
            r.add_term(*m, c.mul(s));
        }
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero(self.sig);
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                let (s, m) = blade_mul(self.sig, *a, *b);
                r.add_term(m, ca.mul(cb).scale(&Scalar::from_int(s)));
            }
        }
        r
    }

    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }
}

pub(crate) fn blade_name(m: u16) -> String {
    if m == 0 {
        return String::new();
    }
    let idx: Vec<String> = mask::indices(m).map(|i| (i + 1).to_string()).collect();
    format!("g{}", idx.join("_"))
}

impl<F: Field> fmt::Display for CliffordElement<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items = self.terms.iter().rev().map(|(m, c)| (blade_name(*m), c.render("t")));
        f.write_str(&join_terms(items))
    }
}

/// Dense square matrix over `Scalar`.
pub type Matrix = Vec<Vec<Scalar>>;

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let mut c = vec![vec![Scalar::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                if !b[k][j].is_zero() {
                    c[i][j] = c[i][j].add(&a[i][k].mul(&b[k][j]));
                }
            }
        }
    }
    c
}

fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (n, m) = (a.len(), b.len());
    let mut c = vec![vec![Scalar::zero(); n * m]; n * m];
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                for l in 0..m {
                    c[i * m + k][j * m + l] = a[i][j].mul(&b[k][l]);
                }
            }
        }
    }
    c
}

fn identity(n: usize) -> Matrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { Scalar::one() } else { Scalar::zero() }).collect()).collect()
}

/// Gamma matrices of size `2^floor(n/2)` built from tensor products of Pauli
/// matrices; a factor `i` turns `+1` squares into `-1` for negative `eta_ii`.
pub fn gamma_matrices(sig: MetricSignature) -> Vec<Matrix> {
    let n = sig.dim();
    let m = n / 2;
    let (o, l, i) = (Scalar::zero(), Scalar::one(), Scalar::i());
    let px: Matrix = vec![vec![o.clone(), l.clone()], vec![l.clone(), o.clone()]];
    let py: Matrix = vec![vec![o.clone(), i.neg()], vec![i.clone(), o.clone()]];
    let pz: Matrix = vec![vec![l.clone(), o.clone()], vec![o, l.neg()]];
    let chain = |k: usize, mid: &Matrix| {
        let mut acc = identity(1);
        for _ in 0..k {
            acc = kron(&acc, &pz);
        }
        acc = kron(&acc, mid);
        for _ in k + 1..m {
            acc = kron(&acc, &identity(2));
        }
        acc
    };
    let mut euclid = Vec::with_capacity(n);
    for k in 0..m {
        euclid.push(chain(k, &px));
        euclid.push(chain(k, &py));
    }
    if n % 2 == 1 {
        let mut acc = identity(1);
        for _ in 0..m {
            acc = kron(&acc, &pz);
        }
        euclid.push(acc);
    }
    euclid
        .into_iter()
        .enumerate()
        .map(|(k, g)| {
            if sig.eta(k) < 0 {
                g.iter().map(|row| row.iter().map(|c| c.mul(&i)).collect()).collect()
            } else {
                g
            }
        })
        .collect()
}

/// Image of a Clifford element in the matrix model.
pub fn represent(e: &CliffordElement<Scalar>, gammas: &[Matrix]) -> Matrix {
    let d = gammas[0].len();
    let mut out = vec![vec![Scalar::zero(); d]; d];
    for (m, c) in e.terms() {
        let mut b = identity(d);
        for k in mask::indices(*m) {
            b = mat_mul(&b, &gammas[k]);
        }
        for r in 0..d {
            for s in 0..d {
                out[r][s] = out[r][s].add(&c.mul(&b[r][s]));
            }
        }
    }
    out
}

/// Spinor Lie derivative `L^lambda_X = X^i d_i + (1/4) omega_ij gamma^i gamma^j + lambda Div(X)`.
pub fn kosmann<F: Field>(x: &ConfGenerator, lambda: &F) -> SpinorOperator<F> {
    let sig = x.sig;
    let n = sig.dim();
    let mut op = SpinorOperator::zero(sig);
    let zero = [0u8; MAX_DIM];
    for i in 0..n {
        let mut beta = zero;
        beta[i] = 1;
        for (e, c) in x.comps[i].terms() {
            op.add_term(*e, 0, beta, F::from_scalar(c));
        }
    }
    // (1/4) sum_{i,j} omega_ij gamma^i gamma^j = (1/2) sum_{i<j} omega_ij gamma^ij
    for a in 0..n {
        for b in a + 1..n {
            for (e, c) in x.omega(a, b).terms() {
                op.add_term(*e, (1 << a) | (1 << b), zero, F::from_scalar(&c.mul(&Scalar::frac(1, 2))));
            }
        }
    }
    if !lambda.is_zero() {
        for (e, c) in x.div().terms() {
            op.add_term(*e, 0, zero, lambda.mul(&F::from_scalar(c)));
        }
    }
    op
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CliffordError {
    #[error("expected a single coordinate generator x^i, p_i or xi^i")]
    NotAGenerator,
}

/// Geometric quantization of a coordinate generator:
/// `x^i -> x^i`, `p_i -> (hbar/i) d_i`, `xi^i -> gamma^i / sqrt 2`.
pub fn quantize_generator<F: Field>(
    v: &SuperSymbol<F>,
    conv: &BracketConvention<F>,
) -> Result<SpinorOperator<F>, CliffordError> {
    let mut it = v.terms();
    let (m, c) = it.next().ok_or(CliffordError::NotAGenerator)?;
    let degree = m.x_degree() + m.p_degree() + m.xi_degree();
    if it.next().is_some() || degree != 1 || !c.is_one() {
        return Err(CliffordError::NotAGenerator);
    }
    Ok(normal_order(v, conv))
}
