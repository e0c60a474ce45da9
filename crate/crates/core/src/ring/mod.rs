//! Exact coefficient arithmetic: the field tower Q(i, sqrt 2), univariate
//! polynomials and rational functions in one formal parameter, polynomials in
//! the base coordinates, and exact (parameterized) linear solving.

mod linsolve;
mod poly;
mod ratfunc;
mod scalar;
mod xpoly;

use std::fmt;

use thiserror::Error;

pub use linsolve::{
    render_rational, solve_param, LinearSystem, ParamLinearSystem, ParamSolution, ParamStatus,
    SingularKind, SingularPoint, SolveOutcome,
};
pub use poly::Poly;
pub use ratfunc::RatFunc;
pub use scalar::{GaussRat, Scalar};
pub use xpoly::{exps_degree, unit_exps, Exps, XPoly, MAX_DIM};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("value {0} is not rational; the field tower stops at Q(i, sqrt 2)")]
    NotRational(String),
    #[error("cannot parse scalar literal `{0}`")]
    Parse(String),
    #[error("specialization hits a pole")]
    Pole,
}

/// Exact field operations shared by [`Scalar`] and [`RatFunc`].
///
/// Every computation in the crate is generic over this trait so that the
/// same code runs at a specialized weight (over `Scalar`) or with the weight
/// kept as a formal parameter (over `RatFunc`).
pub trait Field: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Result<Self, RingError>;
    fn from_scalar(s: &Scalar) -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_scalar(&Scalar::from_int(n))
    }

    fn is_one(&self) -> bool {
        *self == Self::one()
    }

    fn div(&self, o: &Self) -> Result<Self, RingError> {
        Ok(self.mul(&o.inv()?))
    }

    fn scale(&self, s: &Scalar) -> Self {
        self.mul(&Self::from_scalar(s))
    }

    /// Rendering with the formal parameter (if any) shown under `var`.
    fn render(&self, _var: &str) -> String {
        self.to_string()
    }

    /// The value as a plain scalar, if it does not depend on a parameter.
    fn as_scalar(&self) -> Option<Scalar>;
}
