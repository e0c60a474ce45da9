//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the test harness so the lines always show. Exits non-zero
//! if a criterion fails that is not listed in `KNOWN_FAILURES`, or if a
//! listed one unexpectedly passes.

use std::time::{Duration, Instant};

use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spinquant::applications::{
    dirac, form_basis, invariant_scan, ky_bracket_test, ky_pde_oracle, ky_solution_space, ky_superization,
    InvariantElement, InvariantWeights, KyClass, ModuleTag,
};
use spinquant::clifford::{kosmann, quantize_generator};
use spinquant::conformal::{
    action_s, action_t, generators, moment, prepare_all, ConfGenerator, GeneratorKind, PreparedGenerator,
};
use spinquant::diffop::{adjoint_action, full_symbol, normal_order, SpinorOperator};
use spinquant::expr::parse_symbol;
use spinquant::ring::{Field, Scalar, MAX_DIM};
use spinquant::solver::{
    build_quantization, build_quantization_with, build_superization, casimir_crosscheck, resonances, Bound,
    FailureKind, MapKind, NonUnique, SolverError, Weights,
};
use spinquant::symalg::{
    monomials, named_symbol, spin_tensor, superbracket, BracketConvention, MetricSignature, Mono, NamedSymbol,
    SuperSymbol,
};

type S = SuperSymbol<Scalar>;
type Check = Result<(), String>;

/// Criteria that cannot hold, with the reason; see the README.
const KNOWN_FAILURES: &[(u32, &str)] = &[(
    8,
    "eigenvalue coincidences strictly contain the resonances; the Casimir cannot tell \
     inequivalent pieces with equal eigenvalue apart",
)];

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn both(n: usize) -> [MetricSignature; 2] {
    [MetricSignature::euclidean(n), MetricSignature::lorentzian(n)]
}

fn frac(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

fn sign(odd: bool) -> Scalar {
    if odd {
        Scalar::from_int(-1)
    } else {
        Scalar::one()
    }
}

fn random_scalar(rng: &mut ChaCha8Rng) -> Scalar {
    let a = Scalar::frac(rng.gen_range(-9..=9), rng.gen_range(1..=5));
    let b = Scalar::frac(rng.gen_range(-3..=3), rng.gen_range(1..=4)).mul(&Scalar::i());
    let c = Scalar::from_int(rng.gen_range(-1..=1)).mul(&Scalar::sqrt2());
    a.add(&b).add(&c)
}

fn random_symbol(sig: MetricSignature, rng: &mut ChaCha8Rng) -> S {
    let n = sig.dim();
    let mut s = S::zero(sig);
    for _ in 0..rng.gen_range(1..=4) {
        let mut m = Mono::ONE;
        for i in 0..n {
            m.x[i] = rng.gen_range(0..=1);
            m.p[i] = rng.gen_range(0..=1);
        }
        m.xi = rng.gen_range(0..(1u16 << n));
        s.add_term(m, random_scalar(rng));
    }
    s
}

fn random_operator(sig: MetricSignature, rng: &mut ChaCha8Rng) -> SpinorOperator<Scalar> {
    let n = sig.dim();
    let mut op = SpinorOperator::zero(sig);
    for _ in 0..3 {
        let (mut a, mut b) = ([0u8; MAX_DIM], [0u8; MAX_DIM]);
        a[rng.gen_range(0..n)] += rng.gen_range(0..=2);
        b[rng.gen_range(0..n)] += rng.gen_range(0..=2);
        op.add_term(a, rng.gen_range(0..(1u16 << n)), b, random_scalar(rng));
    }
    op
}

fn probes(sig: MetricSignature) -> Vec<S> {
    let n = sig.dim();
    [(1, 0, 0), (2, 1, 1), (1, 2, 1), (0, 1, 2), (2, 2, 0)]
        .into_iter()
        .map(|(k, kappa, xd)| {
            monomials(n, k, kappa, xd)
                .iter()
                .step_by(3)
                .enumerate()
                .fold(S::zero(sig), |acc, (i, m)| acc.add(&S::monomial(sig, *m, Scalar::from_int(i as i64 + 1))))
        })
        .collect()
}

fn dirac_weights(n: usize) -> (Scalar, Scalar) {
    let nn = 2 * n as i64;
    (Scalar::frac(n as i64 - 1, nn), Scalar::frac(n as i64 + 1, nn))
}

fn proportional(a: &S, b: &S) -> bool {
    let Some((m, c)) = b.terms().next() else { return a.is_zero() };
    let k = a.coeff(m).mul(&c.inv().unwrap());
    !k.is_zero() && a.sub(&b.scale(&k)).is_zero()
}

// 1. Super-Jacobi, Leibniz and closure of the spin components.
fn algebraic_soundness() -> Check {
    let conv = BracketConvention::unit();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for sig in [both(2), both(3)].concat() {
        let n = sig.dim();
        let monos: Vec<Mono> = (0..=2u32)
            .flat_map(|k| (0..=n.min(2)).flat_map(move |kp| (0..=1u32).flat_map(move |x| monomials(n, k, kp, x))))
            .collect();
        for _ in 0..400 {
            let pick = |rng: &mut ChaCha8Rng| *monos.choose(rng).unwrap();
            let (a, b, c) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
            let (pa, pb, pc) = (a.xi_degree() % 2, b.xi_degree() % 2, c.xi_degree() % 2);
            let (r, s, t) = (S::monomial(sig, a, Scalar::one()), S::monomial(sig, b, Scalar::one()), S::monomial(sig, c, Scalar::one()));
            let br = |u: &S, v: &S| superbracket(u, v, &conv).unwrap();
            let jacobi = br(&r, &br(&s, &t))
                .scale(&sign(pa * pc == 1))
                .add(&br(&s, &br(&t, &r)).scale(&sign(pb * pa == 1)))
                .add(&br(&t, &br(&r, &s)).scale(&sign(pc * pb == 1)));
            ensure(jacobi.is_zero(), || format!("Jacobi fails on {r}, {s}, {t} in {sig}"))?;
            let leibniz = br(&r, &s.mul(&t).unwrap())
                .sub(&br(&r, &s).mul(&t).unwrap())
                .sub(&s.mul(&br(&r, &t)).unwrap().scale(&sign(pa * pb == 1)));
            ensure(leibniz.is_zero(), || format!("Leibniz fails on {r}, {s}, {t} in {sig}"))?;
        }
    }
    for n in 2..=4 {
        for sig in both(n) {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
            let spin: Vec<S> = pairs.iter().map(|&(i, j)| spin_tensor(i, j, sig, &conv).unwrap()).collect();
            // Matrices M^{ij}_{ab} = delta_ai eta_jb - delta_aj eta_ib close with the same constants as -S^{ij}.
            let mat = |i: usize, j: usize| {
                let mut m = vec![vec![0i64; n]; n];
                m[i][j] += sig.eta(j);
                m[j][i] -= sig.eta(i);
                m
            };
            let mul = |a: &[Vec<i64>], b: &[Vec<i64>]| -> Vec<Vec<i64>> {
                (0..n).map(|r| (0..n).map(|s| (0..n).map(|k| a[r][k] * b[k][s]).sum()).collect()).collect()
            };
            for (a, &(i, j)) in pairs.iter().enumerate() {
                for (b, &(k, l)) in pairs.iter().enumerate() {
                    let (ma, mb) = (mat(i, j), mat(k, l));
                    let (ab, ba) = (mul(&ma, &mb), mul(&mb, &ma));
                    let want = pairs.iter().enumerate().fold(S::zero(sig), |acc, (c, &(r, s))| {
                        acc.add(&spin[c].scale(&Scalar::from_int(-(ab[r][s] - ba[r][s]) * sig.eta(s))))
                    });
                    let got = superbracket(&spin[a], &spin[b], &conv).unwrap();
                    ensure(got == want, || format!("spin bracket {a} {b} in {sig}"))?;
                }
            }
        }
    }
    Ok(())
}

// 2. The moment map and the three module actions represent the algebra.
fn conformal_representation() -> Check {
    let conv = BracketConvention::unit();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let delta = Scalar::frac(3, 7);
    let (lambda, mu) = (Scalar::frac(1, 7), Scalar::frac(4, 5));
    for n in [3, 4] {
        for sig in both(n) {
            let gens = generators(sig);
            let prep = prepare_all(sig, &conv);
            let ops: Vec<SpinorOperator<Scalar>> = (0..2).map(|_| random_operator(sig, &mut rng)).collect();
            for (a, x) in gens.iter().enumerate() {
                for (b, y) in gens.iter().enumerate().skip(a + 1) {
                    let xy = PreparedGenerator::new(&x.bracket(y), &conv).unwrap();
                    let lhs = superbracket(&prep[b].moment, &prep[a].moment, &conv).unwrap();
                    ensure(lhs == xy.moment, || format!("moment {} {} in {sig}", x.label(), y.label()))?;
                    for s in probes(sig) {
                        let t = |g: &PreparedGenerator<Scalar>, u: &S| action_t(g, &delta, u);
                        let h = |g: &PreparedGenerator<Scalar>, u: &S| action_s(g, &delta, u, &conv);
                        let tt = t(&prep[a], &t(&prep[b], &s)).sub(&t(&prep[b], &t(&prep[a], &s)));
                        ensure(tt == t(&xy, &s), || format!("T action {} {}", x.label(), y.label()))?;
                        let hh = h(&prep[a], &h(&prep[b], &s)).sub(&h(&prep[b], &h(&prep[a], &s)));
                        ensure(hh == h(&xy, &s), || format!("S action {} {}", x.label(), y.label()))?;
                    }
                    for d in &ops {
                        let l = |z: &ConfGenerator, e: &SpinorOperator<Scalar>| adjoint_action(z, &lambda, &mu, e);
                        let dd = l(x, &l(y, d)).sub(&l(y, &l(x, d)));
                        ensure(dd == l(&x.bracket(y), d), || format!("D action {} {}", x.label(), y.label()))?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn d_op(sig: MetricSignature, i: usize, c: Scalar) -> SpinorOperator<Scalar> {
    let mut b = [0u8; MAX_DIM];
    b[i] = 1;
    let mut op = SpinorOperator::zero(sig);
    op.add_term([0; MAX_DIM], 0, b, c);
    op
}

// 3. Geometric quantization of generators, Kosmann derivative and moments.
fn geometric_anchor() -> Check {
    let conv = BracketConvention::standard(Scalar::frac(2, 3));
    let hi = conv.hbar_over_i();
    for n in [3, 4] {
        for sig in both(n) {
            for i in 0..n {
                let mut a = [0u8; MAX_DIM];
                a[i] = 1;
                let mut x = SpinorOperator::zero(sig);
                x.add_term(a, 0, [0; MAX_DIM], Scalar::one());
                let mut g = SpinorOperator::zero(sig);
                g.add_term([0; MAX_DIM], 1 << i, [0; MAX_DIM], Scalar::sqrt2().mul(&Scalar::frac(1, 2)));
                for (v, want) in [(S::x(sig, i), x), (S::p(sig, i), d_op(sig, i, hi.clone())), (S::xi(sig, i), g)] {
                    let got = quantize_generator(&v, &conv).map_err(|e| e.to_string())?;
                    ensure(got == want, || format!("quantize_generator({v}) = {got}"))?;
                }
                let t = ConfGenerator::new(sig, GeneratorKind::Translation(i));
                ensure(kosmann(&t, &Scalar::frac(1, 3)) == d_op(sig, i, Scalar::one()), || format!("kosmann T{i}"))?;
                for j in i + 1..n {
                    // J = x_i p_j - x_j p_i + eta_ii eta_jj S^ij
                    let r = ConfGenerator::new(sig, GeneratorKind::Rotation(i, j));
                    let (ei, ej) = (Scalar::from_int(sig.eta(i)), Scalar::from_int(sig.eta(j)));
                    let want = S::x(sig, i)
                        .mul(&S::p(sig, j))
                        .unwrap()
                        .scale(&ei)
                        .sub(&S::x(sig, j).mul(&S::p(sig, i)).unwrap().scale(&ej))
                        .add(&spin_tensor(i, j, sig, &conv).unwrap().scale(&ei.mul(&ej)));
                    ensure(moment(&r, &conv).unwrap() == want, || format!("moment of rotation {i}{j}"))?;
                }
            }
            for x in generators(sig) {
                let j = moment(&x, &conv).unwrap();
                ensure(normal_order(&j, &conv) == kosmann(&x, &Scalar::zero()).scale(&hi), || {
                    format!("quantized moment of {}", x.label())
                })?;
            }
        }
    }
    Ok(())
}

// 4. Quantization at zero weight difference, half densities, resonances.
fn quantization_anchors() -> Check {
    let conv = BracketConvention::unit();
    for n in [3usize, 4] {
        let sig = MetricSignature::euclidean(n);
        let bound = Bound::new(if n == 3 { 2 } else { 1 }, n);
        for lambda in [Scalar::frac(1, 2), Scalar::frac(-2, 9)] {
            let w = Weights::quantization(lambda.clone(), lambda);
            let map = build_quantization(sig, w, bound, conv.clone()).map_err(|e| format!("n={n}: {e}"))?;
            ensure(map.kernels.is_empty(), || "not unique at zero weight".into())?;
        }
        let half = Scalar::frac(1, 2);
        let map = build_quantization(sig, Weights::quantization(half.clone(), half), bound, conv.clone()).unwrap();
        for i in 0..n {
            for g in [S::x(sig, i), S::p(sig, i), S::xi(sig, i)] {
                let got = map.apply_operator(&g).unwrap();
                ensure(got == quantize_generator(&g, &conv).unwrap(), || format!("Q^(1/2,1/2)({g}) = {got}"))?;
            }
        }
        let values = resonances(sig, MapKind::Quantization, bound).map_err(|e| e.to_string())?.resonant_values();
        let nn = n as i64;
        for s in 0..=1 {
            let v = frac(2 * s + 1, nn);
            ensure(values.contains(&v), || format!("n={n}: {v} missing from {values:?}"))?;
        }
        ensure(!values.contains(&frac(0, 1)), || format!("n={n}: 0 is resonant"))?;
    }
    Ok(())
}

// 5. Superization fails at 2/n and exists uniquely at random weights.
fn superization_anchors() -> Check {
    let conv = BracketConvention::unit();
    for n in [3usize, 4] {
        let sig = MetricSignature::euclidean(n);
        match build_superization(sig, Scalar::frac(2, n as i64), Bound::new(2, 0), conv.clone()) {
            Err(SolverError::Resonant { kind: FailureKind::Existence, .. }) => {}
            other => return Err(format!("n={n}: expected an existence failure at 2/n, got {:?}", other.err())),
        }
    }
    let sig = MetricSignature::lorentzian(3);
    let bound = Bound::new(2, 3);
    let avoid = resonances(sig, MapKind::Superization, bound).map_err(|e| e.to_string())?.resonant_values();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut tried = 0;
    while tried < 5 {
        let d = Scalar::frac(rng.gen_range(-40..=40), rng.gen_range(1..=13));
        if avoid.contains(d.as_rational().unwrap()) {
            continue;
        }
        tried += 1;
        let map = build_superization(sig, d.clone(), bound, conv.clone()).map_err(|e| format!("{d}: {e}"))?;
        for g in prepare_all(sig, &conv) {
            for (k, kappa) in bound.bidegrees(3) {
                for m in monomials(3, k, kappa, 1) {
                    let s = S::monomial(sig, m, Scalar::one());
                    let lhs = action_s(&g, &d, &map.apply_symbol(&s).unwrap(), &conv);
                    let rhs = map.apply_symbol(&action_t(&g, &d, &s)).unwrap();
                    ensure(lhs == rhs, || format!("not equivariant at {d} on {s}"))?;
                }
            }
        }
    }
    Ok(())
}

// 6. Invariants of the symbol modules and the Dirac operator.
fn invariants() -> Check {
    for sig in both(3) {
        let n = sig.dim() as i64;
        let delta: S = named_symbol(NamedSymbol::Delta, sig);
        let r: S = named_symbol(NamedSymbol::R, sig);
        let one = S::constant(sig, Scalar::one());
        let powers = [(0, 0, one.clone()), (1, 0, delta.clone()), (0, 1, r.clone()), (1, 1, delta.mul(&r).unwrap())];
        let scan = |tag, k| invariant_scan(sig, tag, Bound::new(k, 1));
        let has = |found: &[spinquant::applications::Invariant], s: &S, d: Scalar| {
            found.iter().any(|inv| {
                inv.weights == InvariantWeights::Delta(d.clone())
                    && matches!(&inv.element, InvariantElement::Symbol(t) if proportional(t, s))
            })
        };
        let t = scan(ModuleTag::TensorSymbols, 3);
        for (a, s, e) in &powers {
            ensure(has(&t, e, Scalar::frac(2 * s + a, n)), || format!("T: {e} at {}/{n} in {sig}", 2 * s + a))?;
        }
        let h = scan(ModuleTag::HamiltonianSymbols, 3);
        for (_, s, e) in powers.iter().filter(|(a, _, _)| *a == 1) {
            ensure(has(&h, e, Scalar::frac(2 * s + 1, n)), || format!("S: {e} at {}/{n} in {sig}", 2 * s + 1))?;
        }
    }
    let conv = BracketConvention::unit();
    for n in [3usize, 4] {
        let sig = MetricSignature::euclidean(n);
        let (l, m) = dirac_weights(n);
        let d = dirac(sig);
        for x in generators(sig) {
            ensure(adjoint_action(&x, &l, &m, &d).is_zero(), || format!("Dirac moved by {}", x.label()))?;
        }
        let w = Weights::quantization(l, m);
        let map = build_quantization_with(sig, w, Bound::new(1, n), conv.clone(), NonUnique::Particular)
            .map_err(|e| e.to_string())?;
        let q = map.apply_operator(&named_symbol(NamedSymbol::Delta, sig)).unwrap();
        let c = q.coeff(&([0; MAX_DIM], 1, {
            let mut b = [0u8; MAX_DIM];
            b[0] = 1;
            b
        }));
        ensure(!c.is_zero() && q == d.scale(&c), || format!("Q(Delta) = {q}"))?;
    }
    Ok(())
}

// 7. Killing-Yano classification by brackets against the PDE.
fn killing_yano() -> Check {
    for sig in both(3) {
        let s0 = ky_superization(sig).map_err(|e| e.to_string())?;
        let mut forms = form_basis(sig, 2, 2).map_err(|e| e.to_string())?;
        forms.extend(ky_solution_space(sig, 2, 2, false).map_err(|e| e.to_string())?);
        forms.extend(ky_solution_space(sig, 2, 2, true).map_err(|e| e.to_string())?);
        let mut seen = Vec::new();
        for f in &forms {
            let want = ky_pde_oracle(f);
            let got = ky_bracket_test(f, &s0).map_err(|e| e.to_string())?;
            ensure(got == want, || format!("{f:?}: bracket {got:?}, oracle {want:?}"))?;
            if !seen.contains(&want) {
                seen.push(want);
            }
        }
        for c in [KyClass::KillingYano, KyClass::ConformalKY, KyClass::Neither] {
            ensure(seen.contains(&c), || format!("no {c:?} witness in {sig}"))?;
        }
    }
    Ok(())
}

// 8. Casimir cross-check.
fn casimir() -> Check {
    let sig = MetricSignature::euclidean(3);
    let mut problems = Vec::new();
    for kind in [MapKind::Superization, MapKind::Quantization] {
        let r = casimir_crosscheck(sig, kind, Bound::new(2, 3), &Scalar::frac(7, 13)).map_err(|e| e.to_string())?;
        if !(r.commutes && r.conjugation && r.principal) {
            problems.push(format!("{kind:?}: commutes {} conjugation {} principal {}", r.commutes, r.conjugation, r.principal));
        }
        if !r.sets_agree() {
            let extra: Vec<String> = r.spurious().iter().map(|v| v.to_string()).collect();
            problems.push(format!("{kind:?}: coincidences not resonant {{{}}}", extra.join(", ")));
        }
    }
    ensure(problems.is_empty(), || problems.join("; "))
}

// 9. Round trips.
fn round_trips() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let conv = BracketConvention::standard(Scalar::from_int(3));
    for i in 0..100 {
        let sig = if i % 2 == 0 { MetricSignature::euclidean(3) } else { MetricSignature::lorentzian(4) };
        let s = random_symbol(sig, &mut rng);
        ensure(full_symbol(&normal_order(&s, &conv), &conv) == s, || format!("full_symbol(N({s}))"))?;
        let text = s.to_string();
        let back = parse_symbol(&text, sig, &Scalar::one()).map_err(|e| format!("{text}: {e}"))?;
        ensure(back == s && back.to_string() == text, || format!("parse round trip of {text}"))?;
    }
    Ok(())
}

fn main() {
    let criteria: [(u32, &str, u64, fn() -> Check); 9] = [
        (1, "algebraic soundness", 10, algebraic_soundness),
        (2, "conformal representation", 60, conformal_representation),
        (3, "geometric quantization anchor", 10, geometric_anchor),
        (4, "quantization anchors", 300, quantization_anchors),
        (5, "superization anchors", 300, superization_anchors),
        (6, "conformal invariants", 120, invariants),
        (7, "Killing-Yano correspondence", 300, killing_yano),
        (8, "Casimir cross-check", 300, casimir),
        (9, "round trips", 10, round_trips),
    ];
    let mut unexpected = 0;
    for (id, name, budget, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(()) if elapsed > Duration::from_secs(budget) => Err(format!("over the {budget} s budget")),
            other => other,
        };
        let known = KNOWN_FAILURES.iter().find(|(k, _)| *k == id);
        match (&outcome, known) {
            (Ok(()), None) => println!("PASS {id} {name} ({:.1} s)", elapsed.as_secs_f64()),
            (Ok(()), Some(_)) => {
                unexpected += 1;
                println!("PASS {id} {name} ({:.1} s) [listed as a known failure]", elapsed.as_secs_f64());
            }
            (Err(e), Some((_, why))) => {
                println!("FAIL {id} {name} ({:.1} s): {e} [known: {why}]", elapsed.as_secs_f64())
            }
            (Err(e), None) => {
                unexpected += 1;
                println!("FAIL {id} {name} ({:.1} s): {e}", elapsed.as_secs_f64());
            }
        }
    }
    if unexpected > 0 {
        std::process::exit(1);
    }
}
