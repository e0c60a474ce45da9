//! Exact sparse Gaussian elimination, over a fixed field or over rational
//! functions of one formal parameter with singular-locus detection.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use super::{Field, Poly, RatFunc, Scalar};

/// A sparse linear system `A c = b` in `n_unknowns` unknowns.
#[derive(Clone, Debug)]
pub struct LinearSystem<F: Field> {
    n_unknowns: usize,
    rows: Vec<(Vec<(usize, F)>, F)>,
}

/// Linear system whose entries are rational functions of one parameter.
pub type ParamLinearSystem = LinearSystem<RatFunc>;

#[derive(Clone, Debug, PartialEq)]
pub enum SolveOutcome<F> {
    Unique(Vec<F>),
    /// Consistent with a solution space of dimension `kernel_dim > 0`;
    /// `particular` sets every free unknown to zero.
    Underdetermined { particular: Vec<F>, kernel_dim: usize },
    Inconsistent,
}

impl<F: Field> SolveOutcome<F> {
    pub fn solution(&self) -> Option<&[F]> {
        match self {
            SolveOutcome::Unique(v) => Some(v),
            SolveOutcome::Underdetermined { particular, .. } => Some(particular),
            SolveOutcome::Inconsistent => None,
        }
    }
}

impl<F: Field> LinearSystem<F> {
    pub fn new(n_unknowns: usize) -> Self {
        LinearSystem { n_unknowns, rows: Vec::new() }
    }

    /// Dense constructor, mostly for tests and small examples.
    pub fn from_dense(a: Vec<Vec<F>>, b: Vec<F>) -> Self {
        let n = a.first().map_or(0, Vec::len);
        let mut s = Self::new(n);
        for (row, rhs) in a.into_iter().zip(b) {
            s.push_row(row.into_iter().enumerate().collect(), rhs);
        }
        s
    }

    pub fn n_unknowns(&self) -> usize {
        self.n_unknowns
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[(Vec<(usize, F)>, F)] {
        &self.rows
    }

    /// Adds the equation `sum coeffs = rhs`; zero coefficients are dropped
    /// and repeated columns are merged.
    pub fn push_row(&mut self, coeffs: Vec<(usize, F)>, rhs: F) {
        let mut m: BTreeMap<usize, F> = BTreeMap::new();
        for (j, c) in coeffs {
            assert!(j < self.n_unknowns, "column {j} out of range");
            let e = m.entry(j).or_insert_with(F::zero);
            *e = e.add(&c);
        }
        m.retain(|_, c| !c.is_zero());
        if m.is_empty() && rhs.is_zero() {
            return;
        }
        self.rows.push((m.into_iter().collect(), rhs));
    }

    pub fn map<G: Field>(&self, f: impl Fn(&F) -> G) -> LinearSystem<G> {
        let mut s = LinearSystem::new(self.n_unknowns);
        for (row, rhs) in &self.rows {
            s.push_row(row.iter().map(|(j, c)| (*j, f(c))).collect(), f(rhs));
        }
        s
    }

    pub fn try_map<G: Field, E>(&self, f: impl Fn(&F) -> Result<G, E>) -> Result<LinearSystem<G>, E> {
        let mut s = LinearSystem::new(self.n_unknowns);
        for (row, rhs) in &self.rows {
            let mut r = Vec::with_capacity(row.len());
            for (j, c) in row {
                r.push((*j, f(c)?));
            }
            s.push_row(r, f(rhs)?);
        }
        Ok(s)
    }

    pub fn solve(&self) -> SolveOutcome<F> {
        let mut ech = Echelon::new();
        let mut consistent = true;
        for (row, rhs) in &self.rows {
            if let Insert::Inconsistent = ech.insert(row, rhs) {
                consistent = false;
            }
        }
        if !consistent {
            return SolveOutcome::Inconsistent;
        }
        let x = ech.back_substitute(self.n_unknowns);
        let kernel_dim = self.n_unknowns - ech.rank();
        if kernel_dim == 0 {
            SolveOutcome::Unique(x)
        } else {
            SolveOutcome::Underdetermined { particular: x, kernel_dim }
        }
    }

    /// Dimension of the solution space of the homogeneous system, with a basis.
    pub fn nullspace(&self) -> Vec<Vec<F>> {
        let mut ech = Echelon::new();
        for (row, _) in &self.rows {
            ech.insert(row, &F::zero());
        }
        ech.nullspace(self.n_unknowns)
    }
}

enum Insert<F> {
    Pivot { original: F },
    Redundant,
    Inconsistent,
}

struct Echelon<F: Field> {
    // pivot column -> (normalized row with leading 1, rhs)
    pivots: BTreeMap<usize, (BTreeMap<usize, F>, F)>,
}

impl<F: Field> Echelon<F> {
    fn new() -> Self {
        Echelon { pivots: BTreeMap::new() }
    }

    fn rank(&self) -> usize {
        self.pivots.len()
    }

    fn insert(&mut self, row: &[(usize, F)], rhs: &F) -> Insert<F> {
        let mut r: BTreeMap<usize, F> = row.iter().cloned().collect();
        let mut b = rhs.clone();
        let mut from = 0usize;
        loop {
            let next = r.range(from..).map(|(j, _)| *j).find(|j| self.pivots.contains_key(j));
            let Some(p) = next else { break };
            let f = r.remove(&p).unwrap();
            let (prow, prhs) = &self.pivots[&p];
            for (j, c) in prow.iter().filter(|(j, _)| **j != p) {
                let e = r.entry(*j).or_insert_with(F::zero);
                *e = e.sub(&f.mul(c));
                if e.is_zero() {
                    r.remove(j);
                }
            }
            b = b.sub(&f.mul(prhs));
            from = p + 1;
        }
        match r.iter().next().map(|(j, c)| (*j, c.clone())) {
            None if b.is_zero() => Insert::Redundant,
            None => Insert::Inconsistent,
            Some((p, lead)) => {
                let li = lead.inv().expect("nonzero pivot");
                let normalized = r.into_iter().map(|(j, c)| (j, c.mul(&li))).collect();
                self.pivots.insert(p, (normalized, b.mul(&li)));
                Insert::Pivot { original: lead }
            }
        }
    }

    fn back_substitute(&self, n: usize) -> Vec<F> {
        let mut x = vec![F::zero(); n];
        for (p, (row, rhs)) in self.pivots.iter().rev() {
            let mut v = rhs.clone();
            for (j, c) in row.iter().filter(|(j, _)| **j != *p) {
                if !x[*j].is_zero() {
                    v = v.sub(&c.mul(&x[*j]));
                }
            }
            x[*p] = v;
        }
        x
    }

    fn nullspace(&self, n: usize) -> Vec<Vec<F>> {
        let free: Vec<usize> = (0..n).filter(|j| !self.pivots.contains_key(j)).collect();
        free.iter()
            .map(|&fj| {
                let mut x = vec![F::zero(); n];
                x[fj] = F::one();
                for (p, (row, _)) in self.pivots.iter().rev() {
                    let mut v = F::zero();
                    for (j, c) in row.iter().filter(|(j, _)| **j != *p) {
                        if !x[*j].is_zero() {
                            v = v.sub(&c.mul(&x[*j]));
                        }
                    }
                    x[*p] = v;
                }
                x
            })
            .collect()
    }
}

/// Why a parameter value is singular.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularKind {
    /// No solution at this value.
    Existence,
    /// Solutions exist but are not unique.
    Uniqueness,
    /// The system's own entries have a pole here.
    DataPole,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingularPoint {
    pub value: BigRational,
    pub kind: SingularKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParamStatus {
    Unique,
    GenericallyUnderdetermined { kernel_dim: usize },
    GenericallyInconsistent,
}

#[derive(Clone, Debug)]
pub struct ParamSolution {
    pub status: ParamStatus,
    /// Generic solution (particular one when underdetermined).
    pub solution: Option<Vec<RatFunc>>,
    /// Rational parameter values where the generic picture breaks, ascending.
    pub singular: Vec<SingularPoint>,
}

/// Parameter values tried, in order, as a stand-in for a generic point.
fn generic_points() -> impl Iterator<Item = Scalar> {
    [(7919, 104729), (-3571, 1303), (104723, 19), (1, 7817), (-65537, 257)]
        .into_iter()
        .map(|(a, b)| Scalar::frac(a, b))
}

/// Solves a parameterized system for generic parameter values and finds the
/// rational values where existence or uniqueness fails.
///
/// The generic rank is found by specializing at a point where no entry has a
/// pole; the independent rows are eliminated over the rational function
/// field, and every remaining row is checked exactly against the formal
/// solution. Candidate singular values are the rational roots of pivots and
/// denominators; each candidate is classified by solving the specialized
/// system exactly.
pub fn solve_param(sys: &ParamLinearSystem) -> ParamSolution {
    let point = generic_points()
        .find(|t| sys.rows.iter().all(|(r, b)| r.iter().all(|(_, c)| c.eval(t).is_ok()) && b.eval(t).is_ok()))
        .expect("entries have poles at every probe point");

    // Rank profile at the probe point.
    let mut probe = Echelon::<Scalar>::new();
    let mut independent = Vec::new();
    for (i, (row, rhs)) in sys.rows.iter().enumerate() {
        let r: Vec<(usize, Scalar)> = row.iter().map(|(j, c)| (*j, c.eval(&point).unwrap())).collect();
        if let Insert::Pivot { .. } = probe.insert(&r, &rhs.eval(&point).unwrap()) {
            independent.push(i);
        }
    }

    let mut candidates: Vec<Poly> = Vec::new();
    for (row, rhs) in &sys.rows {
        for (_, c) in row {
            if !c.is_polynomial() {
                candidates.push(c.denom().clone());
            }
        }
        if !rhs.is_polynomial() {
            candidates.push(rhs.denom().clone());
        }
    }

    let mut formal = Echelon::<RatFunc>::new();
    let mut formal_inconsistent = false;
    for &i in &independent {
        let (row, rhs) = &sys.rows[i];
        match formal.insert(row, rhs) {
            Insert::Pivot { original } => {
                candidates.push(original.numer().clone());
                candidates.push(original.denom().clone());
            }
            Insert::Redundant => {}
            Insert::Inconsistent => formal_inconsistent = true,
        }
    }

    let n = sys.n_unknowns;
    let mut status = if formal.rank() == n {
        ParamStatus::Unique
    } else {
        ParamStatus::GenericallyUnderdetermined { kernel_dim: n - formal.rank() }
    };
    let mut solution = None;
    if formal_inconsistent {
        status = ParamStatus::GenericallyInconsistent;
    } else {
        let x = formal.back_substitute(n);
        let rest: Vec<usize> = {
            let mut mark = vec![false; sys.rows.len()];
            for &i in &independent {
                mark[i] = true;
            }
            (0..sys.rows.len()).filter(|i| !mark[*i]).collect()
        };
        let consistent = match status {
            ParamStatus::Unique => residuals_vanish(sys, &rest, &x),
            _ => rest.iter().all(|&i| {
                let (row, rhs) = &sys.rows[i];
                !matches!(formal.insert(row, rhs), Insert::Inconsistent)
            }),
        };
        if consistent {
            for v in &x {
                candidates.push(v.denom().clone());
            }
            solution = Some(x);
        } else {
            status = ParamStatus::GenericallyInconsistent;
        }
    }

    let mut values: Vec<BigRational> = candidates
        .iter()
        .filter(|p| !p.is_constant())
        .flat_map(Poly::rational_roots)
        .collect();
    values.sort();
    values.dedup();

    let generic_kernel = match status {
        ParamStatus::GenericallyUnderdetermined { kernel_dim } => kernel_dim,
        _ => 0,
    };
    let singular = if status == ParamStatus::GenericallyInconsistent {
        Vec::new()
    } else {
        values
            .into_iter()
            .filter_map(|v| {
                let s = Scalar::from_rational(v.clone());
                let kind = match sys.try_map(|c| c.eval(&s)) {
                    Err(_) => Some(SingularKind::DataPole),
                    Ok(spec) => match spec.solve() {
                        SolveOutcome::Inconsistent => Some(SingularKind::Existence),
                        SolveOutcome::Underdetermined { kernel_dim, .. } if kernel_dim > generic_kernel => {
                            Some(SingularKind::Uniqueness)
                        }
                        _ => None,
                    },
                };
                kind.map(|kind| SingularPoint { value: v, kind })
            })
            .collect()
    };
    ParamSolution { status, solution, singular }
}

/// Checks `row . x == rhs` exactly for the listed rows, clearing the common
/// denominator of `x` so the test runs on polynomials.
fn residuals_vanish(sys: &ParamLinearSystem, rows: &[usize], x: &[RatFunc]) -> bool {
    let mut den = Poly::constant(Scalar::one());
    for v in x {
        if !v.is_polynomial() {
            let g = den.gcd(v.denom());
            den = den.mul(&v.denom().divrem(&g).unwrap().0);
        }
    }
    let scaled: Vec<Poly> = x
        .iter()
        .map(|v| v.numer().mul(&den.divrem(v.denom()).unwrap().0))
        .collect();
    let den_rf = RatFunc::from_poly(den);
    rows.iter().all(|&i| {
        let (row, rhs) = &sys.rows[i];
        if row.iter().all(|(_, c)| c.is_polynomial()) {
            let mut acc = rhs.mul(&den_rf).neg();
            if acc.is_polynomial() {
                let mut p = acc.numer().clone();
                for (j, c) in row {
                    p = p.add(&c.numer().mul(&scaled[*j]));
                }
                return p.is_zero();
            }
            for (j, c) in row {
                acc = acc.add(&c.mul(&RatFunc::from_poly(scaled[*j].clone())));
            }
            return acc.is_zero();
        }
        let mut acc = rhs.mul(&den_rf).neg();
        for (j, c) in row {
            acc = acc.add(&c.mul(&RatFunc::from_poly(scaled[*j].clone())));
        }
        acc.is_zero()
    })
}

impl SingularPoint {
    pub fn render_value(&self) -> String {
        render_rational(&self.value)
    }
}

pub fn render_rational(r: &BigRational) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rf(a: i64, b: i64) -> RatFunc {
        RatFunc::affine(&Scalar::from_int(a), &Scalar::from_int(b))
    }

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn identity_system() {
        let s = ParamLinearSystem::from_dense(vec![vec![RatFunc::one()]], vec![RatFunc::one()]);
        let sol = solve_param(&s);
        assert_eq!(sol.status, ParamStatus::Unique);
        assert_eq!(sol.solution.unwrap(), vec![RatFunc::one()]);
        assert!(sol.singular.is_empty());
    }

    #[test]
    fn forced_pole() {
        let s = ParamLinearSystem::from_dense(vec![vec![rf(-1, 1)]], vec![RatFunc::one()]);
        let sol = solve_param(&s);
        let x = &sol.solution.unwrap()[0];
        assert_eq!(x.mul(&rf(-1, 1)), RatFunc::one());
        assert_eq!(sol.singular, vec![SingularPoint { value: q(1, 1), kind: SingularKind::Existence }]);
    }

    #[test]
    fn triangular_system_singular_at_two_over_n() {
        for n in 2..=5 {
            let s = ParamLinearSystem::from_dense(
                vec![vec![RatFunc::one(), RatFunc::one()], vec![RatFunc::zero(), rf(-2, n)]],
                vec![RatFunc::one(), RatFunc::one()],
            );
            let sol = solve_param(&s);
            assert_eq!(sol.singular.len(), 1);
            assert_eq!(sol.singular[0].value, q(2, n));
            // Specialization on both sides of 2/n agrees with re-solving.
            for d in [q(2, n) - q(1, 100), q(2, n) + q(1, 100)] {
                let ds = Scalar::from_rational(d);
                let direct = s.map(|c| c.eval(&ds).unwrap()).solve();
                let spec: Vec<Scalar> =
                    sol.solution.as_ref().unwrap().iter().map(|c| c.eval(&ds).unwrap()).collect();
                assert_eq!(direct, SolveOutcome::Unique(spec));
            }
        }
    }

    #[test]
    fn uniqueness_failure_detected() {
        // [[t, 0], [0, 1]] c = [0, 1]: at t = 0 the first unknown is free.
        let s = ParamLinearSystem::from_dense(
            vec![vec![rf(0, 1), RatFunc::zero()], vec![RatFunc::zero(), RatFunc::one()]],
            vec![RatFunc::zero(), RatFunc::one()],
        );
        let sol = solve_param(&s);
        assert_eq!(sol.singular, vec![SingularPoint { value: q(0, 1), kind: SingularKind::Uniqueness }]);
    }

    #[test]
    fn generically_inconsistent() {
        let s = ParamLinearSystem::from_dense(
            vec![vec![RatFunc::one()], vec![RatFunc::one()]],
            vec![RatFunc::one(), rf(0, 1)],
        );
        assert_eq!(solve_param(&s).status, ParamStatus::GenericallyInconsistent);
    }

    #[test]
    fn redundant_rows_checked_exactly() {
        // Third row is the sum of the first two.
        let s = ParamLinearSystem::from_dense(
            vec![
                vec![rf(1, 1), RatFunc::one()],
                vec![RatFunc::one(), rf(0, 2)],
                vec![rf(2, 1), rf(1, 2)],
            ],
            vec![RatFunc::one(), rf(0, 1), rf(1, 1)],
        );
        let sol = solve_param(&s);
        assert_eq!(sol.status, ParamStatus::Unique);
    }

    #[test]
    fn nullspace_dimension() {
        let s = LinearSystem::<Scalar>::from_dense(
            vec![vec![Scalar::one(), Scalar::one(), Scalar::zero()]],
            vec![Scalar::zero()],
        );
        let ns = s.nullspace();
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!((v[0].clone() + v[1].clone()).is_zero());
        }
    }
}
