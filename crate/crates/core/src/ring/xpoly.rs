use std::collections::BTreeMap;

use super::{Field, Scalar};

/// Largest supported base dimension.
pub const MAX_DIM: usize = 8;

/// Exponent multi-index over at most [`MAX_DIM`] variables.
pub type Exps = [u8; MAX_DIM];

pub fn exps_degree(e: &Exps) -> u32 {
    e.iter().map(|&k| k as u32).sum()
}

pub fn unit_exps(i: usize) -> Exps {
    let mut e = [0u8; MAX_DIM];
    e[i] = 1;
    e
}

/// Polynomial in the base coordinates `x^1..x^n`.
#[derive(Clone, PartialEq, Debug)]
pub struct XPoly<F: Field> {
    terms: BTreeMap<Exps, F>,
}

impl<F: Field> Default for XPoly<F> {
    fn default() -> Self {
        XPoly { terms: BTreeMap::new() }
    }
}

impl<F: Field> XPoly<F> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: F) -> Self {
        Self::monomial([0; MAX_DIM], c)
    }

    pub fn monomial(e: Exps, c: F) -> Self {
        let mut p = Self::zero();
        p.add_term(e, c);
        p
    }

    /// The coordinate `x^i` (0-based).
    pub fn coord(i: usize) -> Self {
        Self::monomial(unit_exps(i), F::one())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exps, &F)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &Exps) -> F {
        self.terms.get(e).cloned().unwrap_or_else(F::zero)
    }

    pub fn add_term(&mut self, e: Exps, c: F) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                *v = v.add(&c);
                if v.is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(*e, c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&F::from_int(-1)))
    }

    pub fn scale(&self, s: &F) -> Self {
        let mut r = Self::zero();
        for (e, c) in &self.terms {
            r.add_term(*e, c.mul(s));
        }
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let mut e = *e1;
                for k in 0..MAX_DIM {
                    e[k] += e2[k];
                }
                r.add_term(e, c1.mul(c2));
            }
        }
        r
    }

    /// `d/dx^i` (0-based).
    pub fn diff(&self, i: usize) -> Self {
        let mut r = Self::zero();
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = *e;
            e2[i] -= 1;
            r.add_term(e2, c.scale(&Scalar::from_int(e[i] as i64)));
        }
        r
    }

    /// Total degree; `None` for zero.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(exps_degree).max()
    }

    pub fn map_coeffs<G: Field>(&self, f: impl Fn(&F) -> G) -> XPoly<G> {
        let mut r = XPoly::zero();
        for (e, c) in &self.terms {
            r.add_term(*e, f(c));
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_on_monomials() {
        let x = XPoly::<Scalar>::coord(0);
        let y = XPoly::<Scalar>::coord(1);
        let f = x.mul(&x).mul(&y);
        assert_eq!(f.diff(0), x.mul(&y).scale(&Scalar::from_int(2)));
        assert_eq!(f.degree(), Some(3));
        assert!(f.sub(&f).is_zero());
    }
}
