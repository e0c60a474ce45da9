//! Quadratic Casimir of the conformal algebra acting on a symbol module.

use thiserror::Error;

use super::{structure_constants, PreparedGenerator};
use crate::ring::{Field, LinearSystem, Scalar, SolveOutcome};
use crate::symalg::{MetricSignature, Mono, SuperSymbol};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CasimirError {
    #[error("Casimir image leaves the working space; x-degree bound {required} needed")]
    Escapes { required: u32 },
}

/// Killing form `K_ab = f_ac^d f_bd^c` in the basis of [`super::generators`].
pub fn killing_form(sig: MetricSignature) -> Vec<Vec<Scalar>> {
    let f = structure_constants(sig);
    let d = f.len();
    let mut k = vec![vec![Scalar::zero(); d]; d];
    for a in 0..d {
        for b in a..d {
            let mut acc = Scalar::zero();
            for c in 0..d {
                for e in 0..d {
                    if f[a][c][e].is_zero() || f[b][e][c].is_zero() {
                        continue;
                    }
                    acc = acc.add(&f[a][c][e].mul(&f[b][e][c]));
                }
            }
            k[a][b] = acc.clone();
            k[b][a] = acc;
        }
    }
    k
}

fn inverse(m: &[Vec<Scalar>]) -> Vec<Vec<Scalar>> {
    let d = m.len();
    let mut cols = Vec::with_capacity(d);
    for j in 0..d {
        let rhs: Vec<Scalar> = (0..d).map(|i| if i == j { Scalar::one() } else { Scalar::zero() }).collect();
        let sys = LinearSystem::from_dense(m.to_vec(), rhs);
        match sys.solve() {
            SolveOutcome::Unique(c) => cols.push(c),
            _ => panic!("Killing form is nondegenerate on a semisimple algebra"),
        }
    }
    (0..d).map(|i| (0..d).map(|j| cols[j][i].clone()).collect()).collect()
}

/// `C = K^ab L_a L_b` for a representation `L` given as a closure.
pub struct CasimirOperator<F: Field> {
    gens: Vec<PreparedGenerator<F>>,
    kinv: Vec<Vec<Scalar>>,
}

impl<F: Field> CasimirOperator<F> {
    pub fn new(sig: MetricSignature, gens: Vec<PreparedGenerator<F>>) -> Self {
        let kinv = inverse(&killing_form(sig));
        assert_eq!(kinv.len(), gens.len());
        CasimirOperator { gens, kinv }
    }

    pub fn generators(&self) -> &[PreparedGenerator<F>] {
        &self.gens
    }

    pub fn apply<L>(&self, act: &L, s: &SuperSymbol<F>) -> SuperSymbol<F>
    where
        L: Fn(&PreparedGenerator<F>, &SuperSymbol<F>) -> SuperSymbol<F> + ?Sized,
    {
        let d = self.gens.len();
        let lb: Vec<SuperSymbol<F>> = self.gens.iter().map(|g| act(g, s)).collect();
        let mut out = SuperSymbol::zero(s.signature()).with_weight(s.weight.clone());
        for a in 0..d {
            let mut inner = SuperSymbol::zero(s.signature());
            for b in 0..d {
                let k = &self.kinv[a][b];
                if !k.is_zero() && !lb[b].is_zero() {
                    inner = inner.add(&lb[b].scale_scalar(k));
                }
            }
            if !inner.is_zero() {
                out = out.add(&act(&self.gens[a], &inner));
            }
        }
        out
    }
}

pub fn casimir_apply<F: Field, L>(c: &CasimirOperator<F>, act: &L, s: &SuperSymbol<F>) -> SuperSymbol<F>
where
    L: Fn(&PreparedGenerator<F>, &SuperSymbol<F>) -> SuperSymbol<F> + ?Sized,
{
    c.apply(act, s)
}

/// Matrix of the Casimir on the span of `basis`; column `j` is the image of
/// `basis[j]`. Fails if an image has monomials outside the span.
pub fn casimir_matrix<F: Field, L>(
    c: &CasimirOperator<F>,
    act: &L,
    sig: MetricSignature,
    basis: &[Mono],
) -> Result<Vec<Vec<F>>, CasimirError>
where
    L: Fn(&PreparedGenerator<F>, &SuperSymbol<F>) -> SuperSymbol<F> + ?Sized,
{
    let index: std::collections::HashMap<Mono, usize> = basis.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let d = basis.len();
    let mut mat = vec![vec![F::zero(); d]; d];
    for (j, m) in basis.iter().enumerate() {
        let img = c.apply(act, &SuperSymbol::monomial(sig, *m, F::one()));
        for (mm, v) in img.terms() {
            match index.get(mm) {
                Some(&i) => mat[i][j] = v.clone(),
                None => {
                    let required = img.terms().map(|(t, _)| t.x_degree()).max().unwrap_or(0);
                    return Err(CasimirError::Escapes { required });
                }
            }
        }
    }
    Ok(mat)
}
