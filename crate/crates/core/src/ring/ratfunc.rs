use std::fmt;

use num_rational::BigRational;

use super::{Field, Poly, RingError, Scalar};

/// Rational function in one formal parameter with `Scalar` coefficients.
///
/// Canonical form: numerator and denominator coprime, denominator monic, so
/// structural equality is equality of functions.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl RatFunc {
    pub fn var() -> Self {
        RatFunc::from_poly(Poly::var())
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFunc { num: p, den: Poly::constant(Scalar::one()) }
    }

    /// `a + b t` for the formal parameter `t`.
    pub fn affine(a: &Scalar, b: &Scalar) -> Self {
        RatFunc::from_poly(Poly::from_coeffs(vec![a.clone(), b.clone()]))
    }

    pub fn new(num: Poly, den: Poly) -> Result<Self, RingError> {
        if den.is_zero() {
            return Err(RingError::DivisionByZero);
        }
        Ok(Self::normalize(num, den))
    }

    fn normalize(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return RatFunc::from_poly(Poly::zero());
        }
        let (num, den) = if den.is_constant() {
            (num, den)
        } else {
            let g = num.gcd(&den);
            if g.is_constant() {
                (num, den)
            } else {
                (num.divrem(&g).unwrap().0, den.divrem(&g).unwrap().0)
            }
        };
        let l = den.leading().unwrap().inv().unwrap();
        if l.is_one() {
            RatFunc { num, den }
        } else {
            RatFunc { num: num.scale(&l), den: den.scale(&l) }
        }
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    /// The constant value, when this function does not depend on the parameter.
    pub fn as_constant(&self) -> Option<Scalar> {
        self.is_constant().then(|| self.num.constant_term())
    }

    /// Evaluates at `t = x`; errors on a pole.
    pub fn eval(&self, x: &Scalar) -> Result<Scalar, RingError> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return Err(RingError::Pole);
        }
        Ok(self.num.eval(x).mul(&d.inv()?))
    }

    pub fn eval_rational(&self, x: &BigRational) -> Result<Scalar, RingError> {
        self.eval(&Scalar::from_rational(x.clone()))
    }

    pub fn render(&self, var: &str) -> String {
        let n = self.num.render(var);
        if self.den.is_constant() {
            return n;
        }
        let wrap = |s: String, poly: &Poly| {
            if poly.coeffs().iter().filter(|c| !c.is_zero()).count() > 1 {
                format!("({s})")
            } else {
                s
            }
        };
        format!("{}/{}", wrap(n, &self.num), wrap(self.den.render(var), &self.den))
    }
}

impl Field for RatFunc {
    fn zero() -> Self {
        RatFunc::from_poly(Poly::zero())
    }

    fn one() -> Self {
        RatFunc::from_poly(Poly::constant(Scalar::one()))
    }

    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn add(&self, o: &Self) -> Self {
        if self.den.is_constant() && o.den.is_constant() {
            // Both denominators are 1 in canonical form.
            return RatFunc::from_poly(self.num.add(&o.num));
        }
        if self.den == o.den {
            return Self::normalize(self.num.add(&o.num), self.den.clone());
        }
        Self::normalize(
            self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
    }

    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        if self.den.is_constant() && o.den.is_constant() {
            return RatFunc::from_poly(self.num.mul(&o.num));
        }
        Self::normalize(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    fn neg(&self) -> Self {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }

    fn inv(&self) -> Result<Self, RingError> {
        if self.is_zero() {
            return Err(RingError::DivisionByZero);
        }
        Ok(Self::normalize(self.den.clone(), self.num.clone()))
    }

    fn from_scalar(s: &Scalar) -> Self {
        RatFunc::from_poly(Poly::constant(s.clone()))
    }

    fn scale(&self, s: &Scalar) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        RatFunc { num: self.num.scale(s), den: self.den.clone() }
    }

    fn render(&self, var: &str) -> String {
        RatFunc::render(self, var)
    }

    fn as_scalar(&self) -> Option<Scalar> {
        self.as_constant()
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("t"))
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
