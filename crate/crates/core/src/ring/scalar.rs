//! Exact elements of the field tower Q -> Q(i) -> Q(i, sqrt 2).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{Field, RingError};

/// Gaussian rational `re + i im`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        GaussRat { re, im: BigRational::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn add(&self, o: &Self) -> Self {
        GaussRat { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    fn sub(&self, o: &Self) -> Self {
        GaussRat { re: &self.re - &o.re, im: &self.im - &o.im }
    }

    fn mul(&self, o: &Self) -> Self {
        if self.im.is_zero() && o.im.is_zero() {
            return GaussRat::real(&self.re * &o.re);
        }
        GaussRat {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    fn neg(&self) -> Self {
        GaussRat { re: -&self.re, im: -&self.im }
    }

    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let norm = &self.re * &self.re + &self.im * &self.im;
        Some(GaussRat { re: &self.re / &norm, im: -&self.im / &norm })
    }
}

/// An element `a + b sqrt(2)` with `a, b` Gaussian rationals.
///
/// The representation is unique, so derived equality is field equality.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Scalar {
    pub a: GaussRat,
    pub b: GaussRat,
}

impl Scalar {
    pub fn from_rational(r: BigRational) -> Self {
        Scalar { a: GaussRat::real(r), b: GaussRat::default() }
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn frac(num: i64, den: i64) -> Self {
        Scalar::from_rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Scalar {
            a: GaussRat::new(BigRational::zero(), BigRational::one()),
            b: GaussRat::default(),
        }
    }

    pub fn sqrt2() -> Self {
        Scalar { a: GaussRat::default(), b: GaussRat::real(BigRational::one()) }
    }

    pub fn is_rational(&self) -> bool {
        self.a.im.is_zero() && self.b.is_zero()
    }

    /// The rational value, if this element lies in Q.
    pub fn as_rational(&self) -> Option<&BigRational> {
        self.is_rational().then_some(&self.a.re)
    }

    /// The four rational coordinates on the basis `1, i, sqrt2, i sqrt2`.
    pub fn components(&self) -> [&BigRational; 4] {
        [&self.a.re, &self.a.im, &self.b.re, &self.b.im]
    }

    pub fn from_components(c: [BigRational; 4]) -> Self {
        let [ar, ai, br, bi] = c;
        Scalar { a: GaussRat::new(ar, ai), b: GaussRat::new(br, bi) }
    }

    pub fn pow(&self, e: u32) -> Scalar {
        let mut acc = Scalar::from_int(1);
        for _ in 0..e {
            acc = Field::mul(&acc, self);
        }
        acc
    }

    /// Complex conjugate (sqrt 2 is real).
    pub fn conj(&self) -> Scalar {
        Scalar {
            a: GaussRat::new(self.a.re.clone(), -&self.a.im),
            b: GaussRat::new(self.b.re.clone(), -&self.b.im),
        }
    }
}

impl Field for Scalar {
    fn zero() -> Self {
        Scalar::default()
    }

    fn one() -> Self {
        Scalar::from_int(1)
    }

    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn add(&self, o: &Self) -> Self {
        Scalar { a: self.a.add(&o.a), b: self.b.add(&o.b) }
    }

    fn sub(&self, o: &Self) -> Self {
        Scalar { a: self.a.sub(&o.a), b: self.b.sub(&o.b) }
    }

    fn mul(&self, o: &Self) -> Self {
        if self.b.is_zero() && o.b.is_zero() {
            return Scalar { a: self.a.mul(&o.a), b: GaussRat::default() };
        }
        let two = GaussRat::real(BigRational::from_integer(BigInt::from(2)));
        Scalar {
            a: self.a.mul(&o.a).add(&two.mul(&self.b.mul(&o.b))),
            b: self.a.mul(&o.b).add(&self.b.mul(&o.a)),
        }
    }

    fn neg(&self) -> Self {
        Scalar { a: self.a.neg(), b: self.b.neg() }
    }

    fn inv(&self) -> Result<Self, RingError> {
        // (a + b r)^{-1} = (a - b r) / (a^2 - 2 b^2); the norm vanishes only at 0.
        let two = GaussRat::real(BigRational::from_integer(BigInt::from(2)));
        let norm = self.a.mul(&self.a).sub(&two.mul(&self.b.mul(&self.b)));
        let ninv = norm.inv().ok_or(RingError::DivisionByZero)?;
        Ok(Scalar { a: self.a.mul(&ninv), b: self.b.neg().mul(&ninv) })
    }

    fn from_scalar(s: &Scalar) -> Self {
        s.clone()
    }

    fn as_scalar(&self) -> Option<Scalar> {
        Some(self.clone())
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr for Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar {
                Field::$m(&self, &o)
            }
        }
        impl<'a> $tr<&'a Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $m(self, o: &'a Scalar) -> Scalar {
                Field::$m(self, o)
            }
        }
    };
}
forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Field::neg(&self)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

fn fmt_rat(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Scalar {
    /// Canonical rendering over the basis `1, I, sqrt2, I*sqrt2`, e.g. `1/2 - I*sqrt2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let basis = ["", "I", "sqrt2", "I*sqrt2"];
        let mut out = String::new();
        for (c, b) in self.components().into_iter().zip(basis) {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            let body = match (b.is_empty(), mag.is_one()) {
                (true, _) => fmt_rat(&mag),
                (false, true) => b.to_string(),
                (false, false) => format!("{}*{}", fmt_rat(&mag), b),
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
        f.write_str(&out)
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Scalar {
    type Err = RingError;

    /// Parses a rational literal `a` or `a/b`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || RingError::Parse(s.to_string());
        let r = match s.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(RingError::DivisionByZero);
                }
                BigRational::new(n, d)
            }
            None => BigRational::from_integer(s.parse().map_err(|_| bad())?),
        };
        Ok(Scalar::from_rational(r))
    }
}
