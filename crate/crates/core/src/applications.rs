//! Killing–Yano forms, conformal invariants and the Dirac operator.

use std::collections::BTreeMap;

use num_rational::BigRational;
use serde::Serialize;
use thiserror::Error;

use crate::conformal::{action_s, action_t, generators, prepare_all, GeneratorKind};
use crate::diffop::{adjoint_action, OpKey, SpinorOperator};
use crate::ring::{solve_param, Exps, Field, LinearSystem, RatFunc, Scalar, SingularKind, XPoly, MAX_DIM};
use crate::solver::{build_superization, Bound, EquivariantMap, MapKind, SolverError};
use crate::symalg::{
    exps_of_degree, mask, monomials, named_symbol, subsets, superbracket, BracketConvention, MetricSignature, Mono,
    NamedSymbol, SuperSymbol,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ApplicationError {
    #[error("form degree must be at least 1")]
    ZeroDegree,
    #[error("form degree {degree} exceeds dimension {n}")]
    DegreeTooLarge { degree: usize, n: usize },
    #[error("index list {0:?} does not match the form degree or dimension")]
    BadIndices(Vec<usize>),
    #[error("the bracket test needs the superization at delta = 0")]
    WrongMap,
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// A differential form `f = sum_{I increasing} f_I dx^I` with polynomial
/// coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewForm {
    pub sig: MetricSignature,
    pub degree: usize,
    comps: BTreeMap<u16, XPoly<Scalar>>,
}

/// Sign of the permutation sorting `idx`, or `None` on a repeated index.
fn sort_sign(idx: &[usize]) -> Option<(i64, u16)> {
    let mut v = idx.to_vec();
    let mut sign = 1;
    for i in 0..v.len() {
        for j in 0..v.len() - 1 - i {
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                sign = -sign;
            } else if v[j] == v[j + 1] {
                return None;
            }
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((sign, v.iter().fold(0u16, |m, i| m | (1 << i))))
}

impl SkewForm {
    pub fn new(sig: MetricSignature, degree: usize) -> Result<Self, ApplicationError> {
        if degree == 0 {
            return Err(ApplicationError::ZeroDegree);
        }
        if degree > sig.dim() {
            return Err(ApplicationError::DegreeTooLarge { degree, n: sig.dim() });
        }
        Ok(SkewForm { sig, degree, comps: BTreeMap::new() })
    }

    /// Antisymmetrization of an arbitrary covariant tensor.
    pub fn from_tensor(
        sig: MetricSignature,
        degree: usize,
        t: impl Fn(&[usize]) -> XPoly<Scalar>,
    ) -> Result<Self, ApplicationError> {
        let mut f = Self::new(sig, degree)?;
        let mut fact = 1i64;
        for k in 2..=degree as i64 {
            fact *= k;
        }
        for m in subsets(sig.dim(), degree) {
            let base: Vec<usize> = mask::indices(m).collect();
            let mut acc = XPoly::zero();
            for perm in permutations(&base) {
                let (s, _) = sort_sign(&perm).expect("distinct indices");
                acc = acc.add(&t(&perm).scale(&Scalar::from_int(s)));
            }
            f.comps.insert(m, acc.scale(&Scalar::frac(1, fact)));
        }
        f.comps.retain(|_, p| !p.is_zero());
        Ok(f)
    }

    /// Sets `f_{idx}` (and implicitly all its permutations).
    pub fn set(&mut self, idx: &[usize], f: XPoly<Scalar>) -> Result<(), ApplicationError> {
        let bad = || ApplicationError::BadIndices(idx.to_vec());
        if idx.len() != self.degree || idx.iter().any(|&i| i >= self.sig.dim()) {
            return Err(bad());
        }
        let (s, m) = sort_sign(idx).ok_or_else(bad)?;
        let f = f.scale(&Scalar::from_int(s));
        if f.is_zero() {
            self.comps.remove(&m);
        } else {
            self.comps.insert(m, f);
        }
        Ok(())
    }

    /// `f_{idx}` for any index list, zero on repeats.
    pub fn component(&self, idx: &[usize]) -> XPoly<Scalar> {
        match sort_sign(idx) {
            Some((s, m)) => self.comps.get(&m).map_or_else(XPoly::zero, |p| p.scale(&Scalar::from_int(s))),
            None => XPoly::zero(),
        }
    }

    pub fn components(&self) -> impl Iterator<Item = (u16, &XPoly<Scalar>)> {
        self.comps.iter().map(|(m, p)| (*m, p))
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn add(&self, o: &SkewForm) -> SkewForm {
        let mut r = self.clone();
        for (m, p) in &o.comps {
            let q = r.comps.get(m).map_or_else(|| p.clone(), |q| q.add(p));
            if q.is_zero() {
                r.comps.remove(m);
            } else {
                r.comps.insert(*m, q);
            }
        }
        r
    }

    pub fn scale(&self, s: &Scalar) -> SkewForm {
        let mut r = self.clone();
        r.comps = self.comps.iter().map(|(m, p)| (*m, p.scale(s))).filter(|(_, p)| !p.is_zero()).collect();
        r
    }
}

fn permutations(v: &[usize]) -> Vec<Vec<usize>> {
    if v.len() <= 1 {
        return vec![v.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..v.len() {
        let mut rest = v.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

/// `P_f = f^i_{J} xi^J p_i`, summed over increasing `J` of size `degree - 1`.
pub fn symbol_of_form(f: &SkewForm) -> SuperSymbol<Scalar> {
    let sig = f.sig;
    let mut s = SuperSymbol::zero(sig);
    for (m, poly) in &f.comps {
        let idx: Vec<usize> = mask::indices(*m).collect();
        for (a, &i) in idx.iter().enumerate() {
            // f_{i J} = (-1)^a f_I with J = I minus i
            let sign = if a % 2 == 0 { 1 } else { -1 } * sig.eta(i);
            for (e, c) in poly.terms() {
                let mut mono = Mono::ONE;
                mono.x = *e;
                mono.p[i] = 1;
                mono.xi = m & !(1 << i);
                s.add_term(mono, c.scale(&Scalar::from_int(sign)));
            }
        }
    }
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum KyClass {
    KillingYano,
    ConformalKY,
    Neither,
}

/// Components of a tensor indexed by `(i, J)` with `J` increasing.
type Residual = BTreeMap<(usize, u16), XPoly<Scalar>>;

fn exterior_derivative(f: &SkewForm, i: usize, j: &[usize]) -> XPoly<Scalar> {
    // (df)_{i j_1 .. j_k} = d_i f_J + sum_a (-1)^a d_{j_a} f_{i, J minus j_a}
    let mut acc = f.component(j).diff(i);
    for a in 0..j.len() {
        let mut idx = vec![i];
        idx.extend(j.iter().enumerate().filter(|(b, _)| *b != a).map(|(_, v)| *v));
        let t = f.component(&idx).diff(j[a]);
        acc = if a % 2 == 0 { acc.sub(&t) } else { acc.add(&t) };
    }
    acc
}

/// `d_i f_J - (df)_{iJ} / (k + 1)`: the part of the gradient that the
/// Killing–Yano equation forces to vanish.
fn ky_residual(f: &SkewForm) -> Residual {
    let n = f.sig.dim();
    let k = f.degree;
    let w = Scalar::frac(1, k as i64 + 1);
    let mut r = Residual::new();
    for i in 0..n {
        for m in subsets(n, k) {
            let j: Vec<usize> = mask::indices(m).collect();
            let t = f.component(&j).diff(i).sub(&exterior_derivative(f, i, &j).scale(&w));
            if !t.is_zero() {
                r.insert((i, m), t);
            }
        }
    }
    r
}

/// The residual after removing the trace part `eta_ii (dx^i wedge theta)_J`,
/// with `theta` fixed by taking the trace.
fn cky_residual(f: &SkewForm) -> Residual {
    let sig = f.sig;
    let n = sig.dim();
    let k = f.degree;
    let w = Scalar::frac(1, (n - k + 1) as i64);
    let mut theta: BTreeMap<u16, XPoly<Scalar>> = BTreeMap::new();
    for m in subsets(n, k - 1) {
        let jp: Vec<usize> = mask::indices(m).collect();
        let mut acc = XPoly::zero();
        for c in 0..n {
            let mut idx = vec![c];
            idx.extend(&jp);
            acc = acc.add(&f.component(&idx).diff(c).scale(&Scalar::from_int(sig.eta(c))));
        }
        theta.insert(m, acc.scale(&w));
    }
    let mut r = ky_residual(f);
    for i in 0..n {
        for m in subsets(n, k) {
            if m & (1 << i) == 0 {
                continue;
            }
            // (dx^i wedge theta)_J = (-1)^a theta_{J minus i}, a = position of i in J
            let a = mask::below(m, i);
            let sign = if a % 2 == 0 { 1 } else { -1 } * sig.eta(i);
            let t = theta[&(m & !(1 << i))].scale(&Scalar::from_int(sign));
            let e = r.remove(&(i, m)).unwrap_or_else(XPoly::zero).sub(&t);
            if !e.is_zero() {
                r.insert((i, m), e);
            }
        }
    }
    r
}

/// Direct check of the flat Killing–Yano and conformal Killing–Yano
/// equations on the coefficients.
pub fn ky_pde_oracle(f: &SkewForm) -> KyClass {
    if ky_residual(f).is_empty() {
        KyClass::KillingYano
    } else if cky_residual(f).is_empty() {
        KyClass::ConformalKY
    } else {
        KyClass::Neither
    }
}

/// Basis of all `degree`-forms with coefficients of polynomial degree at most
/// `max_poly`: one monomial in one component each.
pub fn form_basis(sig: MetricSignature, degree: usize, max_poly: u32) -> Result<Vec<SkewForm>, ApplicationError> {
    let mut out = Vec::new();
    for m in subsets(sig.dim(), degree) {
        for d in 0..=max_poly {
            for e in exps_of_degree(sig.dim(), d) {
                let mut f = SkewForm::new(sig, degree)?;
                f.comps.insert(m, XPoly::monomial(e, Scalar::one()));
                out.push(f);
            }
        }
    }
    Ok(out)
}

/// Basis of the (conformal) Killing–Yano forms among polynomial forms of
/// degree at most `max_poly`, by exact nullspace of the defining equations.
pub fn ky_solution_space(
    sig: MetricSignature,
    degree: usize,
    max_poly: u32,
    conformal: bool,
) -> Result<Vec<SkewForm>, ApplicationError> {
    let basis = form_basis(sig, degree, max_poly)?;
    let cols: Vec<Vec<((usize, u16, Exps), Scalar)>> = basis
        .iter()
        .map(|f| {
            let r = if conformal { cky_residual(f) } else { ky_residual(f) };
            r.iter()
                .flat_map(|((i, m), p)| p.terms().map(move |(e, c)| ((*i, *m, *e), c.clone())))
                .collect()
        })
        .collect();
    Ok(kernel(&cols)
        .into_iter()
        .map(|v| {
            v.iter()
                .zip(&basis)
                .filter(|(c, _)| !c.is_zero())
                .fold(SkewForm::new(sig, degree).expect("checked"), |acc, (c, f)| acc.add(&f.scale(c)))
        })
        .collect())
}

/// Basis of the common kernel of the linear maps given by their columns.
fn kernel<K: Ord + Clone, F: Field>(cols: &[Vec<(K, F)>]) -> Vec<Vec<F>> {
    system(cols).nullspace()
}

fn system<K: Ord + Clone, F: Field>(cols: &[Vec<(K, F)>]) -> LinearSystem<F> {
    let mut rows: BTreeMap<K, Vec<(usize, F)>> = BTreeMap::new();
    for (j, col) in cols.iter().enumerate() {
        for (k, v) in col {
            if !v.is_zero() {
                rows.entry(k.clone()).or_default().push((j, v.clone()));
            }
        }
    }
    let mut sys = LinearSystem::new(cols.len());
    for (_, row) in rows {
        sys.push_row(row, F::zero());
    }
    sys
}

/// The superization at `delta = 0` on symbols of p-degree at most 1.
pub fn ky_superization(sig: MetricSignature) -> Result<EquivariantMap<Scalar>, SolverError> {
    build_superization(sig, Scalar::zero(), Bound::new(1, sig.dim()), BracketConvention::unit())
}

/// Classifies `f` through `b = {Delta, S^0(P_f)}`: zero, a multiple
/// `h Delta` of Delta, or neither.
pub fn ky_bracket_test(f: &SkewForm, s0: &EquivariantMap<Scalar>) -> Result<KyClass, ApplicationError> {
    if s0.kind != MapKind::Superization || !s0.weights.delta.is_zero() || s0.sig != f.sig {
        return Err(ApplicationError::WrongMap);
    }
    let sig = f.sig;
    let delta = named_symbol(NamedSymbol::Delta, sig);
    let sp = s0.apply_symbol(&symbol_of_form(f))?;
    let b = superbracket(&delta, &sp, &s0.conv).expect("same signature");
    if b.is_zero() {
        return Ok(KyClass::KillingYano);
    }
    Ok(if divisible_by(&b, &delta) { KyClass::ConformalKY } else { KyClass::Neither })
}

/// Whether `b = h d` for some symbol `h`, solved degree by degree.
fn divisible_by(b: &SuperSymbol<Scalar>, d: &SuperSymbol<Scalar>) -> bool {
    let sig = b.signature();
    let n = sig.dim();
    let mut parts: BTreeMap<(u32, u32, u32), SuperSymbol<Scalar>> = BTreeMap::new();
    for (m, c) in b.terms() {
        parts
            .entry((m.p_degree(), m.xi_degree(), m.x_degree()))
            .or_insert_with(|| SuperSymbol::zero(sig))
            .add_term(*m, c.clone());
    }
    parts.into_iter().all(|((k, kappa, xd), part)| {
        if k == 0 || kappa == 0 {
            return false;
        }
        let cols: Vec<SuperSymbol<Scalar>> = monomials(n, k - 1, kappa as usize - 1, xd)
            .into_iter()
            .map(|m| SuperSymbol::monomial(sig, m, Scalar::one()).mul(d).expect("same signature"))
            .collect();
        let mut rows: BTreeMap<Mono, (Vec<(usize, Scalar)>, Scalar)> = BTreeMap::new();
        for (j, c) in cols.iter().enumerate() {
            for (m, v) in c.terms() {
                rows.entry(*m).or_insert_with(|| (Vec::new(), Scalar::zero())).0.push((j, v.clone()));
            }
        }
        for (m, v) in part.terms() {
            rows.entry(*m).or_insert_with(|| (Vec::new(), Scalar::zero())).1 = v.clone();
        }
        let mut sys = LinearSystem::new(cols.len());
        for (_, (row, rhs)) in rows {
            sys.push_row(row, rhs);
        }
        sys.solve().solution().is_some()
    })
}

/// `gamma^i d_i`.
pub fn dirac(sig: MetricSignature) -> SpinorOperator<Scalar> {
    let mut d = SpinorOperator::zero(sig);
    for i in 0..sig.dim() {
        let mut b = [0u8; MAX_DIM];
        b[i] = 1;
        d.add_term([0; MAX_DIM], 1 << i, b, Scalar::one());
    }
    d
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ModuleTag {
    /// `T^delta[xi]`
    TensorSymbols,
    /// `S^delta[xi]`
    HamiltonianSymbols,
    /// `D^(lambda, mu)`
    SpinorOperators,
}

#[derive(Clone, Debug, PartialEq)]
pub enum InvariantWeights {
    Delta(Scalar),
    /// `lambda = None` means invariant for every `lambda` with the given shift.
    Densities { lambda: Option<Scalar>, mu_minus_lambda: Scalar },
}

#[derive(Clone, Debug, PartialEq)]
pub enum InvariantElement {
    Symbol(SuperSymbol<Scalar>),
    Operator(SpinorOperator<Scalar>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Invariant {
    pub weights: InvariantWeights,
    pub element: InvariantElement,
}

/// Elements annihilated by every conformal generator, with the weights at
/// which that happens.
///
/// Translation invariance confines the search to x-free elements, dilation
/// fixes the weight of each homogeneous piece, and the remaining generators
/// are solved exactly. Symbol modules are scanned per bidegree within
/// `bound`; operators per order up to `bound.max_k`.
pub fn invariant_scan(sig: MetricSignature, module: ModuleTag, bound: Bound) -> Vec<Invariant> {
    match module {
        ModuleTag::SpinorOperators => (0..=bound.max_k).flat_map(|k| operator_invariants(sig, k)).collect(),
        _ => bound
            .bidegrees(sig.dim())
            .into_iter()
            .chain(std::iter::once((0, 0)))
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .flat_map(|(k, kappa)| symbol_invariants(sig, module, k, kappa))
            .collect(),
    }
}

fn symbol_action(
    module: ModuleTag,
    g: &crate::conformal::PreparedGenerator<Scalar>,
    delta: &Scalar,
    s: &SuperSymbol<Scalar>,
    conv: &BracketConvention<Scalar>,
) -> SuperSymbol<Scalar> {
    match module {
        ModuleTag::TensorSymbols => action_t(g, delta, s),
        _ => action_s(g, delta, s, conv),
    }
}

fn symbol_invariants(sig: MetricSignature, module: ModuleTag, k: u32, kappa: usize) -> Vec<Invariant> {
    let n = sig.dim();
    let conv = BracketConvention::unit();
    let gens = prepare_all(sig, &conv);
    let dil = gens
        .iter()
        .find(|g| g.gen.kind == Some(GeneratorKind::Dilation))
        .expect("dilation is a generator");
    let basis: Vec<SuperSymbol<Scalar>> =
        monomials(n, k, kappa, 0).into_iter().map(|m| SuperSymbol::monomial(sig, m, Scalar::one())).collect();
    // Dilation acts on x-free monomials by `a + n delta`; invariance needs `delta = -a/n`.
    let mut weights: Vec<Scalar> = Vec::new();
    for b in &basis {
        let (m, _) = b.terms().next().expect("monomial");
        let a = symbol_action(module, dil, &Scalar::zero(), b, &conv).coeff(m);
        let d = a.neg().mul(&Scalar::frac(1, n as i64));
        if !weights.contains(&d) {
            weights.push(d);
        }
    }
    let mut out = Vec::new();
    for delta in weights {
        let cols: Vec<Vec<((usize, Mono), Scalar)>> = basis
            .iter()
            .map(|b| {
                gens.iter()
                    .enumerate()
                    .flat_map(|(gi, g)| {
                        symbol_action(module, g, &delta, b, &conv)
                            .terms()
                            .map(|(m, c)| ((gi, *m), c.clone()))
                            .collect::<Vec<_>>()
                    })
                    .collect()
            })
            .collect();
        for v in kernel(&cols) {
            let s = v.iter().zip(&basis).fold(SuperSymbol::zero(sig), |acc, (c, b)| acc.add(&b.scale(c)));
            out.push(Invariant { weights: InvariantWeights::Delta(delta.clone()), element: InvariantElement::Symbol(s) });
        }
    }
    out
}

fn operator_column<F: Field>(d: &SpinorOperator<F>, tag: usize) -> Vec<((usize, OpKey), F)> {
    d.terms().map(|(k, c)| ((tag, *k), c.clone())).collect()
}

fn combine<F: Field>(sig: MetricSignature, v: &[F], basis: &[SpinorOperator<F>]) -> SpinorOperator<F> {
    v.iter().zip(basis).fold(SpinorOperator::zero(sig), |acc, (c, b)| acc.add(&b.scale(c)))
}

/// x-free invariant operators of order exactly `k`: homogeneity under the
/// dilation forces `mu - lambda = k/n`; rotations cut out a small space on
/// which the special conformal generators are solved for `lambda`.
fn operator_invariants(sig: MetricSignature, k: u32) -> Vec<Invariant> {
    let n = sig.dim();
    let shift = Scalar::frac(k as i64, n as i64);
    let mut basis = Vec::new();
    for beta in exps_of_degree(n, k) {
        for blade in 0..(1u16 << n) {
            let mut d = SpinorOperator::zero(sig);
            d.add_term([0; MAX_DIM], blade, beta, Scalar::one());
            basis.push(d);
        }
    }
    let gens = generators(sig);
    let (special, rest): (Vec<_>, Vec<_>) =
        gens.iter().partition(|g| matches!(g.kind, Some(GeneratorKind::Special(_))));
    // These do not see lambda once the shift is fixed.
    let cols: Vec<_> = basis
        .iter()
        .map(|b| {
            rest.iter()
                .enumerate()
                .flat_map(|(gi, g)| operator_column(&adjoint_action(g, &Scalar::zero(), &shift, b), gi))
                .collect::<Vec<_>>()
        })
        .collect();
    let space: Vec<SpinorOperator<Scalar>> = kernel(&cols).iter().map(|v| combine(sig, v, &basis)).collect();
    if space.is_empty() {
        return Vec::new();
    }
    let formal: Vec<SpinorOperator<RatFunc>> =
        space.iter().map(|d| d.map_coeffs(RatFunc::from_scalar)).collect();
    let lambda = RatFunc::var();
    let mu = lambda.add(&RatFunc::from_scalar(&shift));
    let cols: Vec<_> = formal
        .iter()
        .map(|b| {
            special
                .iter()
                .enumerate()
                .flat_map(|(gi, g)| operator_column(&adjoint_action(g, &lambda, &mu, b), gi))
                .collect::<Vec<_>>()
        })
        .collect();
    let sys = system(&cols);
    let sol = solve_param(&sys);
    let mut out = Vec::new();
    let generic = sys.nullspace();
    for v in &generic {
        let d = combine(sig, v, &formal);
        if let Some(d) = as_constant_operator(&d) {
            out.push(Invariant {
                weights: InvariantWeights::Densities { lambda: None, mu_minus_lambda: shift.clone() },
                element: InvariantElement::Operator(d),
            });
        }
    }
    if generic.is_empty() {
        for p in sol.singular.iter().filter(|p| p.kind == SingularKind::Uniqueness) {
            let at = Scalar::from_rational(p.value.clone());
            let spec = sys.try_map(|c| c.eval(&at)).expect("not a pole");
            for v in spec.nullspace() {
                out.push(Invariant {
                    weights: InvariantWeights::Densities { lambda: Some(at.clone()), mu_minus_lambda: shift.clone() },
                    element: InvariantElement::Operator(combine(sig, &v, &space)),
                });
            }
        }
    }
    out
}

fn as_constant_operator(d: &SpinorOperator<RatFunc>) -> Option<SpinorOperator<Scalar>> {
    let mut r = SpinorOperator::zero(d.signature());
    for ((a, b, c), v) in d.terms() {
        r.add_term(*a, *b, *c, v.as_constant()?);
    }
    Some(r)
}

impl Invariant {
    /// The weight `delta` or the pair `(lambda, mu)` as rationals, when fixed.
    pub fn rational_weights(&self) -> Option<Vec<BigRational>> {
        match &self.weights {
            InvariantWeights::Delta(d) => Some(vec![d.as_rational()?.clone()]),
            InvariantWeights::Densities { lambda, mu_minus_lambda } => {
                let l = lambda.as_ref()?;
                Some(vec![l.as_rational()?.clone(), l.add(mu_minus_lambda).as_rational()?.clone()])
            }
        }
    }
}
