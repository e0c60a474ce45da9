//! Independent check of the constructed maps through Casimir spectra.
//!
//! The Casimir commutes with translations, so every eigenvalue on a graded
//! component already occurs on its x-free part; there it is computed exactly.
//! On the graded components the weight enters as a scalar polynomial, so each
//! eigenvalue is a polynomial in the weight and coincidences along lowering
//! chains are its rational roots.
//!
//! Coincidences only bound the resonances from above. The Casimir
//! construction is sharper but can still be singular where the map is not:
//! two inequivalent pieces may share a Casimir eigenvalue.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use serde::Serialize;
use thiserror::Error;

use super::{
    build_order, build_quantization, build_superization, enumerate, formal_quantization_weights, generic_lambda,
    push_rows, record, resonances, sources, split_bidegree, Bidegree, Bound, Component, EquivariantMap, MapKind,
    NonUnique, Resonance, Solvable, SolverError, Weights,
};
use crate::conformal::{action_s, action_t, casimir_matrix, prepare_all, CasimirError, CasimirOperator, PreparedGenerator};
use crate::diffop::action_d;
use crate::ring::{render_rational, Field, LinearSystem, Poly, RatFunc, Scalar};
use crate::symalg::{monomials, BracketConvention, MetricSignature, Mono, SuperSymbol};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CrossCheckError {
    #[error(transparent)]
    Casimir(#[from] CasimirError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("weight does not enter the Casimir as a scalar on component {bidegree:?}")]
    WeightNotScalar { bidegree: Bidegree },
    #[error("Casimir spectrum on component {bidegree:?} is not rational")]
    IrrationalSpectrum { bidegree: Bidegree },
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentSpectrum {
    pub bidegree: [u32; 2],
    /// Eigenvalues as polynomials in the weight, rendered with `d`.
    pub eigenvalues: Vec<String>,
    #[serde(skip)]
    pub polys: Vec<Poly>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossCheckReport {
    pub kind: MapKind,
    pub signature: [usize; 2],
    pub spectra: Vec<ComponentSpectrum>,
    /// Eigenvalue coincidences along lowering chains.
    pub coincidences: Vec<String>,
    /// Weights where the Casimir construction is singular.
    pub construction: Vec<String>,
    pub resonances: Vec<String>,
    /// Casimir commutes with every generator on source and target.
    pub commutes: bool,
    /// `C_target o M = M o C_source` on the bound.
    pub conjugation: bool,
    /// The map keeps the top bidegree part of each basis symbol.
    pub principal: bool,
    #[serde(skip)]
    pub coincidence_values: Vec<BigRational>,
    #[serde(skip)]
    pub construction_values: Vec<BigRational>,
    #[serde(skip)]
    pub resonance_values: Vec<BigRational>,
}

impl CrossCheckReport {
    /// Coincidences equal resonances, as the Casimir method predicts.
    pub fn sets_agree(&self) -> bool {
        self.coincidence_values == self.resonance_values
    }

    /// Coincidences that are not resonances.
    pub fn spurious(&self) -> Vec<BigRational> {
        self.coincidence_values.iter().filter(|v| !self.resonance_values.contains(v)).cloned().collect()
    }

    /// Every resonance is a coincidence and a singular point of the Casimir
    /// construction, and the latter are coincidences.
    pub fn nested(&self) -> bool {
        let within = |a: &[BigRational], b: &[BigRational]| a.iter().all(|v| b.contains(v));
        within(&self.resonance_values, &self.construction_values)
            && within(&self.construction_values, &self.coincidence_values)
    }

    pub fn passed(&self) -> bool {
        self.commutes && self.conjugation && self.principal && self.nested() && self.sets_agree()
    }
}

fn sub_mat(a: &[Vec<Scalar>], b: &[Vec<Scalar>]) -> Vec<Vec<Scalar>> {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x.sub(y)).collect()).collect()
}

fn scalar_multiple(m: &[Vec<Scalar>]) -> Option<Scalar> {
    let c = m.first().map_or_else(Scalar::zero, |r| r[0].clone());
    for (i, r) in m.iter().enumerate() {
        for (j, v) in r.iter().enumerate() {
            let want = if i == j { &c } else { &Scalar::zero() };
            if v != want {
                return None;
            }
        }
    }
    Some(c)
}

fn mat_mul(a: &[Vec<Scalar>], b: &[Vec<Scalar>]) -> Vec<Vec<Scalar>> {
    let n = a.len();
    let mut r = vec![vec![Scalar::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                r[i][j] = r[i][j].add(&a[i][k].mul(&b[k][j]));
            }
        }
    }
    r
}

/// Minimal polynomial from the first linear dependence among `I, M, M^2, ...`.
fn minimal_polynomial(m: &[Vec<Scalar>]) -> Poly {
    let n = m.len();
    let identity: Vec<Vec<Scalar>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { Scalar::one() } else { Scalar::zero() }).collect()).collect();
    let mut powers = vec![identity];
    loop {
        let next = mat_mul(powers.last().expect("nonempty"), m);
        // sum_j c_j M^j = -M^d
        let d = powers.len();
        let mut sys = LinearSystem::new(d);
        for i in 0..n {
            for j in 0..n {
                let row = (0..d).filter(|&p| !powers[p][i][j].is_zero()).map(|p| (p, powers[p][i][j].clone())).collect();
                sys.push_row(row, next[i][j].neg());
            }
        }
        if let Some(c) = sys.solve().solution() {
            let mut coeffs = c.to_vec();
            coeffs.push(Scalar::one());
            return Poly::from_coeffs(coeffs);
        }
        powers.push(next);
    }
}

/// Eigenvalue polynomials of the Casimir on the x-free part of `T^d` in
/// bidegree `b`.
fn component_spectrum(sig: MetricSignature, b: Bidegree) -> Result<Vec<Poly>, CrossCheckError> {
    let conv = BracketConvention::unit();
    let cas = CasimirOperator::new(sig, prepare_all(sig, &conv));
    let basis: Vec<Mono> = monomials(sig.dim(), b.0, b.1, 0);
    let at = |d: i64| {
        let d = Scalar::from_int(d);
        casimir_matrix(&cas, &|g, s| action_t(g, &d, s), sig, &basis)
    };
    let (m0, m1, m2) = (at(0)?, at(1)?, at(2)?);
    // M(d) = M0 + d A + d^2 B
    let d1 = sub_mat(&m1, &m0);
    let d2 = sub_mat(&m2, &m1);
    let two_b = sub_mat(&d2, &d1);
    let bad = CrossCheckError::WeightNotScalar { bidegree: b };
    let b2 = scalar_multiple(&two_b).ok_or(bad.clone())?.mul(&Scalar::frac(1, 2));
    let a = scalar_multiple(&d1).ok_or(bad)?.sub(&b2);
    let minpoly = minimal_polynomial(&m0);
    let roots = minpoly.rational_roots();
    if roots.len() != minpoly.degree().unwrap_or(0) {
        return Err(CrossCheckError::IrrationalSpectrum { bidegree: b });
    }
    Ok(roots
        .into_iter()
        .map(|r| Poly::from_coeffs(vec![Scalar::from_rational(r), a.clone(), b2.clone()]))
        .collect())
}

/// Pairs of components the triangular construction couples: strictly lower
/// p-degree, same xi parity.
fn lowering_pairs(bidegrees: &[Bidegree]) -> Vec<(Bidegree, Bidegree)> {
    let mut out = Vec::new();
    for &hi in bidegrees {
        for &lo in bidegrees {
            if lo.0 < hi.0 && lo.1 % 2 == hi.1 % 2 {
                out.push((hi, lo));
            }
        }
    }
    out
}

fn render_eigen(p: &Poly) -> String {
    p.render("d")
}

fn basis_symbols<F: Field>(sig: MetricSignature, bound: &Bound, max_x: u32) -> Vec<SuperSymbol<F>> {
    let mut out = Vec::new();
    for (k, kappa) in bound.bidegrees(sig.dim()) {
        for xd in 0..=max_x {
            for m in monomials(sig.dim(), k, kappa, xd) {
                out.push(SuperSymbol::monomial(sig, m, F::one()));
            }
        }
    }
    out
}

/// A module action at a fixed weight.
type Action<'a> = Box<dyn Fn(&PreparedGenerator<Scalar>, &SuperSymbol<Scalar>) -> SuperSymbol<Scalar> + 'a>;

/// Source and target actions of the map of kind `kind` at weight `delta`.
fn actions<'a>(kind: MapKind, delta: &Scalar, conv: &'a BracketConvention<Scalar>) -> (Action<'a>, Action<'a>) {
    let d = delta.clone();
    let d2 = delta.clone();
    let src: Action<'a> = Box::new(move |g, s| action_t(g, &d, s));
    let dst: Action<'a> = match kind {
        MapKind::Superization => Box::new(move |g, s| action_s(g, &d2, s, conv)),
        MapKind::Quantization => {
            let lambda = generic_lambda();
            let mu = lambda.add(&d2);
            Box::new(move |g, s| action_d(&g.gen, &lambda, &mu, s, conv))
        }
    };
    (src, dst)
}

/// Casimir spectra, eigenvalue coincidences along lowering chains, the
/// singular weights of the Casimir construction, and the exact identities
/// relating the Casimirs through the constructed map.
///
/// Superization compares `T^d` with `S^d`; quantization compares `T^d` with
/// `D^(l, l + d)` through the composite construction, with `l` fixed to
/// [`generic_lambda`]. The identities are checked at the weight `at`, which
/// should be non-resonant.
pub fn casimir_crosscheck(
    sig: MetricSignature,
    kind: MapKind,
    bound: Bound,
    at: &Scalar,
) -> Result<CrossCheckReport, CrossCheckError> {
    let n = sig.dim();
    let bidegrees = bound.bidegrees(n);
    let mut spectra = Vec::new();
    for &b in &bidegrees {
        let polys = component_spectrum(sig, b)?;
        spectra.push(ComponentSpectrum {
            bidegree: [b.0, b.1 as u32],
            eigenvalues: polys.iter().map(render_eigen).collect(),
            polys,
        });
    }
    let spectrum_of = |b: &Bidegree| &spectra[bidegrees.iter().position(|c| c == b).expect("listed")].polys;

    // weights where an eigenvalue on a lower component meets one on the top
    let mut candidates: BTreeSet<BigRational> = BTreeSet::new();
    for (hi, lo) in lowering_pairs(&bidegrees) {
        for a in spectrum_of(&hi) {
            for b in spectrum_of(&lo) {
                for r in a.sub(b).rational_roots() {
                    candidates.insert(r);
                }
            }
        }
    }
    let coincidence_values: Vec<BigRational> = candidates.into_iter().collect();
    let construction_values: Vec<BigRational> = casimir_resonances(sig, kind, bound)?
        .into_iter()
        .map(|r| r.value)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let resonance_values = resonances(sig, kind, bound)?.resonant_values();

    let conv = BracketConvention::unit();
    let gens = prepare_all(sig, &conv);
    let cas = CasimirOperator::new(sig, gens.clone());
    let (src, dst) = actions(kind, at, &conv);
    let (commutes, conjugation, principal) = match kind {
        MapKind::Superization => {
            let map = build_superization(sig, at.clone(), bound, conv.clone())?;
            let basis = basis_symbols(sig, &bound, 1);
            check_identities(&cas, &gens, &[&map], &basis, &*src, &*dst)?
        }
        MapKind::Quantization => {
            let lambda = generic_lambda();
            let w = Weights::quantization(lambda.clone(), lambda.add(at));
            let q = build_quantization(sig, w, Bound::new(bound.max_k, n), conv.clone())?;
            let s = build_superization(sig, at.clone(), Bound::new(bound.max_k, n), conv.clone())?;
            let basis = basis_symbols(sig, &Bound::new(bound.max_k, bound.max_kappa.min(n)), 0);
            check_identities(&cas, &gens, &[&s, &q], &basis, &*src, &*dst)?
        }
    };

    Ok(CrossCheckReport {
        kind,
        signature: [sig.p, sig.q],
        spectra,
        coincidences: coincidence_values.iter().map(render_rational).collect(),
        construction: construction_values.iter().map(render_rational).collect(),
        resonances: resonance_values.iter().map(render_rational).collect(),
        commutes,
        conjugation,
        principal,
        coincidence_values,
        construction_values,
        resonance_values,
    })
}

/// Applies the maps in order.
fn compose(maps: &[&EquivariantMap<Scalar>], s: &SuperSymbol<Scalar>) -> Result<SuperSymbol<Scalar>, SolverError> {
    maps.iter().try_fold(s.clone(), |acc, m| m.apply_symbol(&acc))
}

fn check_identities<A, B>(
    cas: &CasimirOperator<Scalar>,
    gens: &[PreparedGenerator<Scalar>],
    maps: &[&EquivariantMap<Scalar>],
    basis: &[SuperSymbol<Scalar>],
    src: &A,
    dst: &B,
) -> Result<(bool, bool, bool), CrossCheckError>
where
    A: Fn(&PreparedGenerator<Scalar>, &SuperSymbol<Scalar>) -> SuperSymbol<Scalar> + ?Sized,
    B: Fn(&PreparedGenerator<Scalar>, &SuperSymbol<Scalar>) -> SuperSymbol<Scalar> + ?Sized,
{
    let mut commutes = true;
    let mut conjugation = true;
    let mut principal = true;
    for s in basis {
        let cs = cas.apply(src, s);
        let image = compose(maps, s)?;
        principal &= image.principal_part().filter(|m| m.xi_degree() as usize == s_kappa(s)) == *s;
        let c_image = cas.apply(dst, &image);
        conjugation &= c_image == compose(maps, &cs)?;
        for g in gens {
            commutes &= src(g, &cs) == cas.apply(src, &src(g, s));
            commutes &= dst(g, &c_image) == cas.apply(dst, &dst(g, &image));
        }
    }
    Ok((commutes, conjugation, principal))
}

fn s_kappa(s: &SuperSymbol<Scalar>) -> usize {
    s.terms().next().map_or(0, |(m, _)| m.xi_degree() as usize)
}

/// Singular weights of the Casimir construction.
///
/// Uses the solver's correction ansatz, which already commutes with
/// translations, rotations and dilations, and replaces the special conformal
/// constraint by `C_target o M = M o C_source` at a formal weight.
pub fn casimir_resonances(sig: MetricSignature, kind: MapKind, bound: Bound) -> Result<Vec<Resonance>, SolverError> {
    let conv = BracketConvention::standard(RatFunc::one());
    let cas = CasimirOperator::new(sig, prepare_all(sig, &conv));
    let weights = match kind {
        MapKind::Superization => Weights::superization(RatFunc::var()),
        MapKind::Quantization => formal_quantization_weights(&generic_lambda()),
    };
    let delta = weights.delta.clone();
    let on_t = |g: &PreparedGenerator<RatFunc>, s: &SuperSymbol<RatFunc>| action_t(g, &delta, s);
    let on_s = |g: &PreparedGenerator<RatFunc>, s: &SuperSymbol<RatFunc>| action_s(g, &delta, s, &conv);
    let on_d = |g: &PreparedGenerator<RatFunc>, s: &SuperSymbol<RatFunc>| {
        action_d(&g.gen, &weights.lambda, &weights.mu, s, &conv)
    };
    let mut components: BTreeMap<Bidegree, Component<RatFunc>> = BTreeMap::new();
    let mut singular = Vec::new();
    let mut kernels = BTreeMap::new();
    for b in build_order(&bound, sig.dim()) {
        if b.0 == 0 {
            components.insert(b, Component::identity());
            continue;
        }
        let ops = enumerate(sig, b.0, b.1);
        let mut sys = LinearSystem::new(ops.len());
        for s in sources::<RatFunc>(sig, b) {
            match kind {
                MapKind::Superization => {
                    let ct = cas.apply(&on_t, &s);
                    let cols: Vec<_> = ops.iter().map(|o| cas.apply(&on_s, &o.apply(&s)).sub(&o.apply(&ct))).collect();
                    push_rows(&mut sys, &cols, &cas.apply(&on_s, &s).sub(&ct).neg());
                }
                MapKind::Quantization => {
                    let (top, rest) = split_bidegree(&cas.apply(&on_s, &s), b);
                    let mut lowered = SuperSymbol::zero(sig);
                    for (m, c) in rest.terms() {
                        let bb = (m.p_degree(), m.xi_degree() as usize);
                        let comp = components.get(&bb).ok_or(SolverError::OutOfBound { bidegree: bb })?;
                        lowered = lowered.add(&comp.apply(&SuperSymbol::monomial(sig, *m, c.clone())));
                    }
                    let cols: Vec<_> =
                        ops.iter().map(|o| cas.apply(&on_d, &o.apply(&s)).sub(&o.apply(&top))).collect();
                    push_rows(&mut sys, &cols, &top.add(&lowered).sub(&cas.apply(&on_d, &s)));
                }
            }
        }
        let coeffs = record(b, RatFunc::solve_component(&sys), NonUnique::Reject, &mut singular, &mut kernels)?;
        components.insert(b, Component { ops, coeffs });
    }
    singular.sort_by(|a, b| a.value.cmp(&b.value).then(a.bidegree.cmp(&b.bidegree)));
    Ok(singular)
}
