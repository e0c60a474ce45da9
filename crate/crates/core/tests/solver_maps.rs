use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spinquant::clifford::quantize_generator;
use spinquant::conformal::{action_s, action_t, prepare_all};
use spinquant::diffop::action_d;
use spinquant::ring::{Field, RatFunc, Scalar};
use spinquant::solver::{
    build_quantization, build_quantization_with, build_superization, formal_quantization_weights, resonances,
    Bound, EquivariantMap, FailureKind, MapKind, NonUnique, SolverError, Weights,
};
use spinquant::symalg::{monomials, named_symbol, BracketConvention, MetricSignature, NamedSymbol, SuperSymbol};

fn basis<F: Field>(sig: MetricSignature, bound: Bound, max_x: u32) -> Vec<SuperSymbol<F>> {
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

fn assert_superization_equivariant<F: Field>(map: &EquivariantMap<F>, max_x: u32) {
    let delta = &map.weights.delta;
    for g in prepare_all(map.sig, &map.conv) {
        for s in basis::<F>(map.sig, map.bound, max_x) {
            let lhs = action_s(&g, delta, &map.apply_symbol(&s).unwrap(), &map.conv);
            let rhs = map.apply_symbol(&action_t(&g, delta, &s)).unwrap();
            assert_eq!(lhs, rhs, "{} on {s}", g.gen.label());
        }
    }
}

fn assert_quantization_equivariant<F: Field>(map: &EquivariantMap<F>, max_x: u32) {
    let w = &map.weights;
    // The source action raises xi-degree by 2, so stay where the image is in bound.
    let top = map.bound.max_kappa.saturating_sub(2);
    let inner = Bound::new(map.bound.max_k, top.max(if map.bound.max_kappa >= map.sig.dim() { map.sig.dim() } else { 0 }));
    for g in prepare_all(map.sig, &map.conv) {
        for s in basis::<F>(map.sig, inner, max_x) {
            let lhs = action_d(&g.gen, &w.lambda, &w.mu, &map.apply_symbol(&s).unwrap(), &map.conv);
            let rhs = map.apply_symbol(&action_s(&g, &w.delta, &s, &map.conv)).unwrap();
            assert_eq!(lhs, rhs, "{} on {s}", g.gen.label());
        }
    }
}

fn rational(r: &Scalar) -> BigRational {
    r.as_rational().unwrap().clone()
}

/// Random rationals avoiding the given values.
fn random_weights(seed: u64, avoid: &[BigRational], count: usize) -> Vec<Scalar> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let v = Scalar::frac(rng.gen_range(-40..=40), rng.gen_range(1..=13));
        if !avoid.contains(&rational(&v)) && !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

#[test]
fn superization_is_equivariant_formally_and_at_random_weights() {
    let sig = MetricSignature::lorentzian(3);
    let bound = Bound::new(2, 3);
    let conv = BracketConvention::standard(RatFunc::one());
    let formal = build_superization(sig, RatFunc::var(), bound, conv).unwrap();
    assert_superization_equivariant(&formal, 1);
    let avoid: Vec<BigRational> = formal.singular.iter().map(|r| r.value.clone()).collect();
    for d in random_weights(1, &avoid, 5) {
        let map = build_superization(sig, d.clone(), bound, BracketConvention::unit()).unwrap();
        assert_superization_equivariant(&map, 2);
        // The formal solution specializes to the direct one.
        let sp = formal.specialize(&d).unwrap();
        for (b, c) in &map.components {
            assert_eq!(sp.components[b].coeffs, c.coeffs);
        }
    }
}

#[test]
fn quantization_is_equivariant_at_random_weights() {
    let sig = MetricSignature::euclidean(3);
    let bound = Bound::new(2, 3);
    let report = resonances(sig, MapKind::Quantization, bound).unwrap();
    let avoid = report.resonant_values();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for d in random_weights(3, &avoid, 3) {
        let lambda = Scalar::frac(rng.gen_range(-5..=5), 7);
        let w = Weights::quantization(lambda.clone(), lambda.add(&d));
        let map = build_quantization(sig, w, bound, BracketConvention::unit()).unwrap();
        assert_quantization_equivariant(&map, 2);
    }
}

#[test]
fn formal_quantization_is_equivariant() {
    let sig = MetricSignature::lorentzian(3);
    let bound = Bound::new(2, 3);
    let conv = BracketConvention::standard(RatFunc::one());
    let map = build_quantization(sig, formal_quantization_weights(&Scalar::frac(3, 11)), bound, conv).unwrap();
    assert_quantization_equivariant(&map, 1);
}

#[test]
fn zero_weight_difference_is_not_resonant() {
    for sig in [MetricSignature::euclidean(3), MetricSignature::lorentzian(3)] {
        for lambda in [Scalar::frac(1, 2), Scalar::zero(), Scalar::frac(-4, 9)] {
            let w = Weights::quantization(lambda.clone(), lambda);
            build_quantization(sig, w, Bound::new(2, 3), BracketConvention::unit()).unwrap();
        }
    }
}

#[test]
fn half_densities_reproduce_geometric_quantization() {
    let sig = MetricSignature::lorentzian(3);
    let conv = BracketConvention::unit();
    let half = Scalar::frac(1, 2);
    let map = build_quantization(sig, Weights::quantization(half.clone(), half), Bound::new(2, 3), conv.clone()).unwrap();
    for i in 0..3 {
        for g in [SuperSymbol::x(sig, i), SuperSymbol::p(sig, i), SuperSymbol::xi(sig, i)] {
            assert_eq!(map.apply_operator(&g).unwrap(), quantize_generator(&g, &conv).unwrap());
        }
    }
    let one = SuperSymbol::constant(sig, Scalar::from_int(5));
    assert_eq!(map.apply_symbol(&one).unwrap(), one);
}

#[test]
fn quantized_delta_is_the_dirac_operator() {
    for n in [3usize, 4] {
        let sig = MetricSignature::euclidean(n);
        let conv = BracketConvention::unit();
        let nn = 2 * n as i64;
        let w = Weights::quantization(Scalar::frac(n as i64 - 1, nn), Scalar::frac(n as i64 + 1, nn));
        let bound = Bound::new(1, n);
        assert_eq!(
            build_quantization(sig, w.clone(), bound, conv.clone()).err(),
            Some(SolverError::Resonant { bidegree: (1, 1), kind: FailureKind::Uniqueness })
        );
        let map = build_quantization_with(sig, w, bound, conv.clone(), NonUnique::Particular).unwrap();
        assert!(map.kernels.contains_key(&(1, 1)));
        let delta: SuperSymbol<Scalar> = named_symbol(NamedSymbol::Delta, sig);
        let q = map.apply_operator(&delta).unwrap();
        let mut dirac = spinquant::diffop::SpinorOperator::zero(sig);
        for i in 0..n {
            let mut b = [0u8; spinquant::ring::MAX_DIM];
            b[i] = 1;
            dirac.add_term([0; spinquant::ring::MAX_DIM], 1 << i, b, Scalar::one());
        }
        let c = conv.hbar_over_i().mul(&Scalar::sqrt2()).mul(&Scalar::frac(1, 2));
        assert_eq!(q, dirac.scale(&c));
    }
}

#[test]
fn superization_fails_at_two_over_n() {
    for sig in [MetricSignature::euclidean(3), MetricSignature::lorentzian(3)] {
        let err = build_superization(sig, Scalar::frac(2, 3), Bound::new(2, 3), BracketConvention::unit()).unwrap_err();
        assert!(matches!(err, SolverError::Resonant { kind: FailureKind::Existence, .. }), "{err}");
        // Without xi the obstruction already shows on vector symbols.
        let only_r = Bound::new(2, 0);
        assert_eq!(
            build_superization(sig, Scalar::frac(2, 3), only_r, BracketConvention::unit()).err(),
            Some(SolverError::Resonant { bidegree: (1, 0), kind: FailureKind::Existence })
        );
    }
}

#[test]
fn quantization_resonances_do_not_depend_on_lambda() {
    let sig = MetricSignature::euclidean(3);
    let bound = Bound::new(2, 3);
    let conv = BracketConvention::standard(RatFunc::one());
    let mut sets = Vec::new();
    for l0 in [Scalar::frac(3, 11), Scalar::frac(-2, 7)] {
        let map = build_quantization(sig, formal_quantization_weights(&l0), bound, conv.clone()).unwrap();
        let report = spinquant::solver::ResonanceReport::from_map(&map);
        sets.push(report.resonant_values());
    }
    assert_eq!(sets[0], sets[1]);
    let third = BigRational::new(BigInt::from(1), BigInt::from(3));
    assert!(sets[0].contains(&third));
    assert!(sets[0].contains(&BigRational::from_integer(BigInt::from(1))));
    assert!(sets[0].iter().all(|v| v > &BigRational::from_integer(BigInt::from(0))));
}

#[test]
fn quantization_after_superization_is_equivariant() {
    let sig = MetricSignature::euclidean(3);
    let conv = BracketConvention::unit();
    let (lambda, mu) = (Scalar::frac(1, 4), Scalar::frac(1, 4).add(&Scalar::frac(2, 5)));
    let bound = Bound::new(2, 3);
    let q = build_quantization(sig, Weights::quantization(lambda.clone(), mu.clone()), bound, conv.clone()).unwrap();
    let s = build_superization(sig, Scalar::frac(2, 5), bound, conv.clone()).unwrap();
    for g in prepare_all(sig, &conv) {
        for t in basis::<Scalar>(sig, Bound::new(2, 1), 1) {
            let qs = |u: &SuperSymbol<Scalar>| q.apply_symbol(&s.apply_symbol(u).unwrap()).unwrap();
            let lhs = action_d(&g.gen, &lambda, &mu, &qs(&t), &conv);
            assert_eq!(lhs, qs(&action_t(&g, &Scalar::frac(2, 5), &t)));
        }
    }
}
