//! Construction of the equivariant superization and quantization maps.
//!
//! On each bidegree `B = (k, kappa)` the map is `identity + sum_j c_j O_j`
//! where the `O_j` are the invariant correction operators of
//! [`correction::enumerate`]. Translations, rotations and the dilation are
//! intertwined by construction, and the rotations carry one special conformal
//! generator to all others, so the only equations come from `K_1`. The
//! equivariance defect commutes with translations and has x-derivative order
//! at most `k + 1`, so testing it on `x^alpha m` with `|alpha| = k + 1` is
//! enough.

pub mod correction;
mod crosscheck;
mod report;

use std::collections::BTreeMap;

use num_rational::BigRational;
use thiserror::Error;

use crate::conformal::{action_s, action_t, ConfGenerator, GeneratorKind, PreparedGenerator};
use crate::diffop::{action_d, normal_order, SpinorOperator};
use crate::ring::{
    render_rational, solve_param, Field, LinearSystem, RatFunc, Scalar, SingularKind, SolveOutcome,
};
use crate::symalg::{exps_of_degree, BracketConvention, MetricSignature, SuperSymbol};

pub use correction::{enumerate, fiber_monomials, CorrectionOp, Slot};
pub use crosscheck::{casimir_crosscheck, casimir_resonances, ComponentSpectrum, CrossCheckError, CrossCheckReport};
pub use report::{MapReport, ResonanceReport, SCHEMA_VERSION};

pub type Bidegree = (u32, usize);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("resonant: {kind} fails at bidegree ({}, {})", .bidegree.0, .bidegree.1)]
    Resonant { bidegree: Bidegree, kind: FailureKind },
    #[error("generating set incomplete at bidegree ({}, {}): no solution for generic weight", .bidegree.0, .bidegree.1)]
    GeneratingSetIncomplete { bidegree: Bidegree },
    #[error("bidegree ({}, {}) is outside the constructed bound", .bidegree.0, .bidegree.1)]
    OutOfBound { bidegree: Bidegree },
    #[error("coefficient has a pole at the requested weight")]
    Pole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    Existence,
    Uniqueness,
}

impl std::fmt::Display for FailureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FailureKind::Existence => "existence",
            FailureKind::Uniqueness => "uniqueness",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    Superization,
    Quantization,
}

/// Weights of the source and target modules.
///
/// Superization: `T^delta -> S^delta`. Quantization: `S^delta -> D^(lambda, mu)`
/// with `delta = mu - lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights<F: Field> {
    pub delta: F,
    pub lambda: F,
    pub mu: F,
}

impl<F: Field> Weights<F> {
    pub fn superization(delta: F) -> Self {
        Weights { delta, lambda: F::zero(), mu: F::zero() }
    }

    pub fn quantization(lambda: F, mu: F) -> Self {
        Weights { delta: mu.sub(&lambda), lambda, mu }
    }
}

/// Size of the constructed region: p-degree `<= max_k`, xi-degree `<= max_kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bound {
    pub max_k: u32,
    pub max_kappa: usize,
}

impl Bound {
    pub fn new(max_k: u32, max_kappa: usize) -> Self {
        Bound { max_k, max_kappa }
    }

    /// Default: p-degree 2 and xi-degree `min(n, 3)`.
    pub fn default_for(sig: MetricSignature) -> Self {
        Bound { max_k: 2, max_kappa: sig.dim().min(3) }
    }

    pub fn bidegrees(&self, n: usize) -> Vec<Bidegree> {
        let mut out = Vec::new();
        for k in 0..=self.max_k {
            for kappa in 0..=self.max_kappa.min(n) {
                out.push((k, kappa));
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Component<F: Field> {
    pub ops: Vec<CorrectionOp>,
    pub coeffs: Vec<F>,
}

impl<F: Field> Component<F> {
    fn identity() -> Self {
        Component { ops: Vec::new(), coeffs: Vec::new() }
    }

    /// `s + sum_j c_j O_j s` for `s` inside this bidegree.
    pub fn apply(&self, s: &SuperSymbol<F>) -> SuperSymbol<F> {
        let mut out = s.clone();
        for (op, c) in self.ops.iter().zip(&self.coeffs) {
            if !c.is_zero() {
                out = out.add(&op.apply(s).scale(c));
            }
        }
        out
    }
}

/// A singular weight found while solving one bidegree.
#[derive(Debug, Clone, PartialEq)]
pub struct Resonance {
    pub value: BigRational,
    pub kind: SingularKind,
    pub bidegree: Bidegree,
}

impl Resonance {
    pub fn render_value(&self) -> String {
        render_rational(&self.value)
    }
}

#[derive(Debug, Clone)]
pub struct EquivariantMap<F: Field> {
    pub kind: MapKind,
    pub sig: MetricSignature,
    pub conv: BracketConvention<F>,
    pub weights: Weights<F>,
    pub bound: Bound,
    pub components: BTreeMap<Bidegree, Component<F>>,
    /// Weights where some bidegree degenerates (formal construction only).
    pub singular: Vec<Resonance>,
    /// Kernel dimensions of bidegrees where a particular solution was kept.
    pub kernels: BTreeMap<Bidegree, usize>,
}

impl<F: Field> EquivariantMap<F> {
    /// Applies the map to a symbol, bidegree by bidegree.
    pub fn apply_symbol(&self, s: &SuperSymbol<F>) -> Result<SuperSymbol<F>, SolverError> {
        let mut parts: BTreeMap<Bidegree, SuperSymbol<F>> = BTreeMap::new();
        for (m, c) in s.terms() {
            let b = (m.p_degree(), m.xi_degree() as usize);
            parts.entry(b).or_insert_with(|| SuperSymbol::zero(self.sig)).add_term(*m, c.clone());
        }
        let mut out = SuperSymbol::zero(self.sig);
        for (b, part) in parts {
            let comp = self.components.get(&b).ok_or(SolverError::OutOfBound { bidegree: b })?;
            out = out.add(&comp.apply(&part));
        }
        Ok(out)
    }

    /// For a quantization: the operator `Q(s)`.
    pub fn apply_operator(&self, s: &SuperSymbol<F>) -> Result<SpinorOperator<F>, SolverError> {
        Ok(normal_order(&self.apply_symbol(s)?, &self.conv))
    }

    /// Specializes a formal map at a rational weight.
    pub fn specialize(&self, at: &Scalar) -> Result<EquivariantMap<Scalar>, SolverError>
    where
        F: Specialize,
    {
        let sp = |c: &F| c.specialize(at).ok_or(SolverError::Pole);
        let conv = BracketConvention { hbar: sp(&self.conv.hbar)?, c_odd: sp(&self.conv.c_odd)? };
        let weights = Weights { delta: sp(&self.weights.delta)?, lambda: sp(&self.weights.lambda)?, mu: sp(&self.weights.mu)? };
        let mut components = BTreeMap::new();
        for (b, c) in &self.components {
            let coeffs = c.coeffs.iter().map(sp).collect::<Result<Vec<_>, _>>()?;
            components.insert(*b, Component { ops: c.ops.clone(), coeffs });
        }
        Ok(EquivariantMap {
            kind: self.kind,
            sig: self.sig,
            conv,
            weights,
            bound: self.bound,
            components,
            singular: Vec::new(),
            kernels: self.kernels.clone(),
        })
    }
}

/// Evaluation of a coefficient at a rational weight.
pub trait Specialize: Field {
    fn specialize(&self, at: &Scalar) -> Option<Scalar>;
}

impl Specialize for Scalar {
    fn specialize(&self, _at: &Scalar) -> Option<Scalar> {
        Some(self.clone())
    }
}

impl Specialize for RatFunc {
    fn specialize(&self, at: &Scalar) -> Option<Scalar> {
        self.eval(at).ok()
    }
}

/// Result of solving one bidegree's system.
#[derive(Debug, Clone)]
pub struct ComponentSolve<F> {
    pub solution: Result<Vec<F>, SolveFailure<F>>,
    pub singular: Vec<(BigRational, SingularKind)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveFailure<F> {
    Inconsistent,
    /// Solutions are not unique; a particular one when available.
    Underdetermined { particular: Option<Vec<F>>, kernel_dim: usize },
}

/// Fields over which a bidegree system can be solved and classified.
pub trait Solvable: Field + Specialize {
    /// `true` when values carry a formal parameter.
    const FORMAL: bool;
    fn solve_component(sys: &LinearSystem<Self>) -> ComponentSolve<Self>;
}

impl Solvable for Scalar {
    const FORMAL: bool = false;
    fn solve_component(sys: &LinearSystem<Self>) -> ComponentSolve<Self> {
        let solution = match sys.solve() {
            SolveOutcome::Unique(x) => Ok(x),
            SolveOutcome::Underdetermined { particular, kernel_dim } => {
                Err(SolveFailure::Underdetermined { particular: Some(particular), kernel_dim })
            }
            SolveOutcome::Inconsistent => Err(SolveFailure::Inconsistent),
        };
        ComponentSolve { solution, singular: Vec::new() }
    }
}

impl Solvable for RatFunc {
    const FORMAL: bool = true;
    fn solve_component(sys: &LinearSystem<Self>) -> ComponentSolve<Self> {
        let sol = solve_param(sys);
        let singular = sol.singular.iter().map(|p| (p.value.clone(), p.kind)).collect();
        let solution = match sol.status {
            crate::ring::ParamStatus::Unique => Ok(sol.solution.expect("unique status carries a solution")),
            crate::ring::ParamStatus::GenericallyUnderdetermined { kernel_dim } => {
                Err(SolveFailure::Underdetermined { particular: sol.solution, kernel_dim })
            }
            crate::ring::ParamStatus::GenericallyInconsistent => Err(SolveFailure::Inconsistent),
        };
        ComponentSolve { solution, singular }
    }
}

/// Source points `x^alpha m` with `|alpha| = k + 1` and `m` in the fiber of `B`.
fn sources<F: Field>(sig: MetricSignature, b: Bidegree) -> Vec<SuperSymbol<F>> {
    let n = sig.dim();
    let mut out = Vec::new();
    for alpha in exps_of_degree(n, b.0 + 1) {
        for m in fiber_monomials(n, b.0, b.1) {
            out.push(SuperSymbol::monomial(sig, m.with_x(alpha), F::one()));
        }
    }
    out
}

/// Appends the rows `sum_j c_j col_j = rhs`, one per monomial.
fn push_rows<F: Field>(sys: &mut LinearSystem<F>, cols: &[SuperSymbol<F>], rhs: &SuperSymbol<F>) {
    let mut rows: BTreeMap<crate::symalg::Mono, (Vec<(usize, F)>, F)> = BTreeMap::new();
    for (j, c) in cols.iter().enumerate() {
        for (m, v) in c.terms() {
            rows.entry(*m).or_insert_with(|| (Vec::new(), F::zero())).0.push((j, v.clone()));
        }
    }
    for (m, v) in rhs.terms() {
        rows.entry(*m).or_insert_with(|| (Vec::new(), F::zero())).1 = v.clone();
    }
    for (_, (row, b)) in rows {
        sys.push_row(row, b);
    }
}

fn special<F: Field>(sig: MetricSignature, conv: &BracketConvention<F>) -> PreparedGenerator<F> {
    PreparedGenerator::new(&ConfGenerator::new(sig, GeneratorKind::Special(0)), conv).expect("conformal Killing")
}

/// The system for the superization on bidegree `b`.
pub fn superization_system<F: Field>(
    sig: MetricSignature,
    b: Bidegree,
    ops: &[CorrectionOp],
    delta: &F,
    conv: &BracketConvention<F>,
) -> LinearSystem<F> {
    let k = special(sig, conv);
    let mut sys = LinearSystem::new(ops.len());
    for s in sources::<F>(sig, b) {
        let lt = action_t(&k, delta, &s);
        let ls = action_s(&k, delta, &s, conv);
        let cols: Vec<SuperSymbol<F>> =
            ops.iter().map(|o| action_s(&k, delta, &o.apply(&s), conv).sub(&o.apply(&lt))).collect();
        push_rows(&mut sys, &cols, &ls.sub(&lt).neg());
    }
    sys
}

fn split_bidegree<F: Field>(s: &SuperSymbol<F>, b: Bidegree) -> (SuperSymbol<F>, SuperSymbol<F>) {
    let inside = s.filter(|m| m.p_degree() == b.0 && m.xi_degree() as usize == b.1);
    let rest = s.sub(&inside);
    (inside, rest)
}

/// The system for the quantization on bidegree `b`, given the components
/// already built on lower p-degrees.
pub fn quantization_system<F: Field>(
    sig: MetricSignature,
    b: Bidegree,
    ops: &[CorrectionOp],
    weights: &Weights<F>,
    conv: &BracketConvention<F>,
    lower: &BTreeMap<Bidegree, Component<F>>,
) -> Result<LinearSystem<F>, SolverError> {
    let k = special(sig, conv);
    let phi = |s: &SuperSymbol<F>| action_d(&k.gen, &weights.lambda, &weights.mu, s, conv);
    let mut sys = LinearSystem::new(ops.len());
    for s in sources::<F>(sig, b) {
        let ls = action_s(&k, &weights.delta, &s, conv);
        let (top, rest) = split_bidegree(&ls, b);
        let mut lowered = SuperSymbol::zero(sig);
        let mut parts: BTreeMap<Bidegree, SuperSymbol<F>> = BTreeMap::new();
        for (m, c) in rest.terms() {
            let bb = (m.p_degree(), m.xi_degree() as usize);
            parts.entry(bb).or_insert_with(|| SuperSymbol::zero(sig)).add_term(*m, c.clone());
        }
        for (bb, part) in parts {
            let comp = lower.get(&bb).ok_or(SolverError::OutOfBound { bidegree: bb })?;
            lowered = lowered.add(&comp.apply(&part));
        }
        let cols: Vec<SuperSymbol<F>> = ops.iter().map(|o| phi(&o.apply(&s)).sub(&o.apply(&top))).collect();
        push_rows(&mut sys, &cols, &top.add(&lowered).sub(&phi(&s)));
    }
    Ok(sys)
}

/// What to do when a bidegree admits several solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NonUnique {
    /// Report a uniqueness resonance.
    #[default]
    Reject,
    /// Keep a particular solution and record the kernel dimension.
    Particular,
}

fn record<F: Solvable>(
    b: Bidegree,
    solved: ComponentSolve<F>,
    policy: NonUnique,
    singular: &mut Vec<Resonance>,
    kernels: &mut BTreeMap<Bidegree, usize>,
) -> Result<Vec<F>, SolverError> {
    for (value, kind) in solved.singular {
        singular.push(Resonance { value, kind, bidegree: b });
    }
    match solved.solution {
        Ok(x) => Ok(x),
        Err(SolveFailure::Inconsistent) if F::FORMAL => Err(SolverError::GeneratingSetIncomplete { bidegree: b }),
        Err(SolveFailure::Inconsistent) => Err(SolverError::Resonant { bidegree: b, kind: FailureKind::Existence }),
        Err(SolveFailure::Underdetermined { particular: Some(x), kernel_dim }) if policy == NonUnique::Particular => {
            kernels.insert(b, kernel_dim);
            Ok(x)
        }
        Err(SolveFailure::Underdetermined { .. }) => {
            Err(SolverError::Resonant { bidegree: b, kind: FailureKind::Uniqueness })
        }
    }
}

/// Which bidegrees a quantization component needs to be built first.
fn build_order(bound: &Bound, n: usize) -> Vec<Bidegree> {
    // Increasing p-degree; xi-degree order is irrelevant.
    bound.bidegrees(n)
}

/// Builds the superization `T^delta[xi] -> S^delta[xi]` within `bound`.
pub fn build_superization<F: Solvable>(
    sig: MetricSignature,
    delta: F,
    bound: Bound,
    conv: BracketConvention<F>,
) -> Result<EquivariantMap<F>, SolverError> {
    build_superization_with(sig, delta, bound, conv, NonUnique::Reject)
}

pub fn build_superization_with<F: Solvable>(
    sig: MetricSignature,
    delta: F,
    bound: Bound,
    conv: BracketConvention<F>,
    policy: NonUnique,
) -> Result<EquivariantMap<F>, SolverError> {
    let mut components = BTreeMap::new();
    let mut singular = Vec::new();
    let mut kernels = BTreeMap::new();
    for b in build_order(&bound, sig.dim()) {
        if b.0 == 0 {
            components.insert(b, Component::identity());
            continue;
        }
        let ops = enumerate(sig, b.0, b.1);
        let sys = superization_system(sig, b, &ops, &delta, &conv);
        let coeffs = record(b, F::solve_component(&sys), policy, &mut singular, &mut kernels)?;
        components.insert(b, Component { ops, coeffs });
    }
    singular.sort_by(|a, b| a.value.cmp(&b.value).then(a.bidegree.cmp(&b.bidegree)));
    Ok(EquivariantMap {
        kind: MapKind::Superization,
        sig,
        conv,
        weights: Weights::superization(delta),
        bound,
        components,
        singular,
        kernels,
    })
}

/// Builds the quantization `S^delta[xi] -> D^(lambda, mu)` within `bound`.
pub fn build_quantization<F: Solvable>(
    sig: MetricSignature,
    weights: Weights<F>,
    bound: Bound,
    conv: BracketConvention<F>,
) -> Result<EquivariantMap<F>, SolverError> {
    build_quantization_with(sig, weights, bound, conv, NonUnique::Reject)
}

pub fn build_quantization_with<F: Solvable>(
    sig: MetricSignature,
    weights: Weights<F>,
    bound: Bound,
    conv: BracketConvention<F>,
    policy: NonUnique,
) -> Result<EquivariantMap<F>, SolverError> {
    let mut components = BTreeMap::new();
    let mut singular = Vec::new();
    let mut kernels = BTreeMap::new();
    for b in build_order(&bound, sig.dim()) {
        if b.0 == 0 {
            components.insert(b, Component::identity());
            continue;
        }
        let ops = enumerate(sig, b.0, b.1);
        let sys = quantization_system(sig, b, &ops, &weights, &conv, &components)?;
        let coeffs = record(b, F::solve_component(&sys), policy, &mut singular, &mut kernels)?;
        components.insert(b, Component { ops, coeffs });
    }
    singular.sort_by(|a, b| a.value.cmp(&b.value).then(a.bidegree.cmp(&b.bidegree)));
    Ok(EquivariantMap {
        kind: MapKind::Quantization,
        sig,
        conv,
        weights,
        bound,
        components,
        singular,
        kernels,
    })
}

/// Generic value of `lambda` used when only `delta` is kept formal.
pub fn generic_lambda() -> Scalar {
    Scalar::frac(3, 11)
}

/// Formal weights `lambda = lambda0`, `mu = lambda0 + t` with `t = delta`.
pub fn formal_quantization_weights(lambda0: &Scalar) -> Weights<RatFunc> {
    Weights::quantization(RatFunc::from_scalar(lambda0), RatFunc::affine(lambda0, &Scalar::one()))
}

/// Resonances of the chosen construction with `delta` formal and `hbar = 1`.
pub fn resonances(sig: MetricSignature, kind: MapKind, bound: Bound) -> Result<ResonanceReport, SolverError> {
    let conv = BracketConvention::standard(RatFunc::one());
    let map = match kind {
        MapKind::Superization => build_superization(sig, RatFunc::var(), bound, conv)?,
        MapKind::Quantization => build_quantization(sig, formal_quantization_weights(&generic_lambda()), bound, conv)?,
    };
    Ok(ResonanceReport::from_map(&map))
}
