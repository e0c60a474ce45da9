use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Field, RingError, Scalar};

/// Dense univariate polynomial over `Scalar`, lowest degree first, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<Scalar>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: Scalar) -> Self {
        Poly::from_coeffs(vec![c])
    }

    /// The formal variable itself.
    pub fn var() -> Self {
        Poly::from_coeffs(vec![Scalar::zero(), Scalar::one()])
    }

    pub fn from_coeffs(mut coeffs: Vec<Scalar>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn leading(&self) -> Option<&Scalar> {
        self.coeffs.last()
    }

    pub fn constant_term(&self) -> Scalar {
        self.coeffs.first().cloned().unwrap_or_default()
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let z = Scalar::zero();
        let c = (0..n)
            .map(|i| {
                self.coeffs.get(i).unwrap_or(&z).add(o.coeffs.get(i).unwrap_or(&z))
            })
            .collect();
        Poly::from_coeffs(c)
    }

    pub fn neg(&self) -> Poly {
        Poly { coeffs: self.coeffs.iter().map(Field::neg).collect() }
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Scalar::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] = c[i + j].add(&a.mul(b));
            }
        }
        Poly::from_coeffs(c)
    }

    pub fn scale(&self, s: &Scalar) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().map(|c| c.mul(s)).collect())
    }

    /// Euclidean division `self = q * d + r`.
    pub fn divrem(&self, d: &Poly) -> Result<(Poly, Poly), RingError> {
        let dl = d.leading().ok_or(RingError::DivisionByZero)?.inv()?;
        let dd = d.degree().unwrap_or(0);
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return Ok((Poly::zero(), self.clone()));
        }
        let mut q = vec![Scalar::zero(); r.len() - dd];
        for i in (dd..r.len()).rev() {
            if r[i].is_zero() {
                continue;
            }
            let f = r[i].mul(&dl);
            for (j, dc) in d.coeffs.iter().enumerate() {
                r[i - dd + j] = r[i - dd + j].sub(&f.mul(dc));
            }
            q[i - dd] = f;
        }
        r.truncate(dd);
        Ok((Poly::from_coeffs(q), Poly::from_coeffs(r)))
    }

    pub fn monic(&self) -> Poly {
        match self.leading() {
            Some(l) => self.scale(&l.inv().expect("nonzero leading coefficient")),
            None => Poly::zero(),
        }
    }

    /// Monic greatest common divisor (`0` only when both inputs are zero).
    pub fn gcd(&self, o: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.divrem(&b).expect("nonzero divisor").1;
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        self.coeffs.iter().rev().fold(Scalar::zero(), |acc, c| acc.mul(x).add(c))
    }

    /// Distinct rational roots, ascending.
    ///
    /// A rational root must annihilate each of the four rational component
    /// polynomials, so the search runs on their gcd over Q.
    pub fn rational_roots(&self) -> Vec<BigRational> {
        if self.is_zero() {
            return Vec::new();
        }
        let mut g = Poly::zero();
        for k in 0..4 {
            let comp = Poly::from_coeffs(
                self.coeffs
                    .iter()
                    .map(|c| Scalar::from_rational(c.components()[k].clone()))
                    .collect(),
            );
            g = g.gcd(&comp);
        }
        rational_roots_q(&g)
    }
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    let mut out = Vec::new();
    if let Some(m) = n.to_u64() {
        let mut d = 1u64;
        while d * d <= m {
            if m % d == 0 {
                out.push(BigInt::from(d));
                if d * d != m {
                    out.push(BigInt::from(m / d));
                }
            }
            d += 1;
        }
    } else {
        // Fallback for huge constants: trial division is hopeless, keep the trivial divisors.
        out.push(BigInt::one());
        out.push(n);
    }
    out
}

fn rational_roots_q(p: &Poly) -> Vec<BigRational> {
    let mut roots = Vec::new();
    if p.degree().unwrap_or(0) == 0 {
        return roots;
    }
    // Clear denominators to integer coefficients.
    let lcm = p
        .coeffs
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.components()[0].denom()));
    let mut ints: Vec<BigInt> = p
        .coeffs
        .iter()
        .map(|c| (c.components()[0] * BigRational::from_integer(lcm.clone())).to_integer())
        .collect();
    if ints[0].is_zero() {
        roots.push(BigRational::zero());
        while ints.first().is_some_and(|c| c.is_zero()) {
            ints.remove(0);
        }
    }
    if ints.len() >= 2 {
        let lead = ints.last().unwrap().clone();
        let cand_num = divisors(&ints[0]);
        let cand_den = divisors(&lead);
        let q = Poly::from_coeffs(
            ints.iter().map(|c| Scalar::from_rational(BigRational::from_integer(c.clone()))).collect(),
        );
        for a in &cand_num {
            for b in &cand_den {
                for s in [1, -1] {
                    let r = BigRational::new(a * s, b.clone());
                    if !roots.contains(&r) && q.eval(&Scalar::from_rational(r.clone())).is_zero() {
                        roots.push(r);
                    }
                }
            }
        }
    }
    roots.sort();
    roots
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render("t"))
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Poly {
    /// Renders highest degree first with the given variable name.
    pub fn render(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts: Vec<String> = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mono = match k {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{k}"),
            };
            let cs = c.to_string();
            let compound = cs.contains(" + ") || cs.contains(" - ");
            let term = if mono.is_empty() {
                cs
            } else if *c == Scalar::one() {
                mono
            } else if *c == Scalar::from_int(-1) {
                format!("-{mono}")
            } else if compound {
                format!("({cs})*{mono}")
            } else {
                format!("{cs}*{mono}")
            };
            parts.push(term);
        }
        let mut out = parts[0].clone();
        for p in &parts[1..] {
            match p.strip_prefix('-') {
                Some(rest) => {
                    out.push_str(" - ");
                    out.push_str(rest);
                }
                None => {
                    out.push_str(" + ");
                    out.push_str(p);
                }
            }
        }
        out
    }
}
