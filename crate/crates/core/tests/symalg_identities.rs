use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spinquant::ring::{Field, Scalar};
use spinquant::symalg::{
    monomials, named_symbol, spin_tensor, superbracket, BracketConvention, MetricSignature, Mono,
    NamedSymbol, SuperSymbol,
};

type S = SuperSymbol<Scalar>;

fn sample_monomials(n: usize, max_total: u32) -> Vec<Mono> {
    let mut out = Vec::new();
    for k in 0..=max_total {
        for kappa in 0..=n.min((max_total - k) as usize) {
            for xd in 0..=(max_total - k - kappa as u32) {
                out.extend(monomials(n, k, kappa, xd));
            }
        }
    }
    out
}

fn parity(m: &Mono) -> u32 {
    m.xi_degree() % 2
}

fn sign(b: bool) -> Scalar {
    if b {
        Scalar::from_int(-1)
    } else {
        Scalar::one()
    }
}

fn triples(n: usize) -> Vec<(Mono, Mono, Mono)> {
    let monos = sample_monomials(n, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
    (0..1500)
        .map(|_| {
            let a = *monos.choose(&mut rng).unwrap();
            let b = *monos.choose(&mut rng).unwrap();
            let c = *monos.choose(&mut rng).unwrap();
            (a, b, c)
        })
        .collect()
}

fn signatures() -> Vec<MetricSignature> {
    vec![
        MetricSignature::euclidean(2),
        MetricSignature::lorentzian(2),
        MetricSignature::euclidean(3),
        MetricSignature::lorentzian(3),
    ]
}

#[test]
fn super_jacobi_on_sample() {
    let conv = BracketConvention::unit();
    for sig in signatures() {
        for (a, b, c) in triples(sig.dim()) {
            let (r, s, t) = (
                S::monomial(sig, a, Scalar::one()),
                S::monomial(sig, b, Scalar::one()),
                S::monomial(sig, c, Scalar::one()),
            );
            let (pr, ps, pt) = (parity(&a), parity(&b), parity(&c));
            let br = |u: &S, v: &S| superbracket(u, v, &conv).unwrap();
            let total = br(&r, &br(&s, &t))
                .scale(&sign(pr * pt % 2 == 1))
                .add(&br(&s, &br(&t, &r)).scale(&sign(ps * pr % 2 == 1)))
                .add(&br(&t, &br(&r, &s)).scale(&sign(pt * ps % 2 == 1)));
            assert!(total.is_zero(), "Jacobi fails on {r}, {s}, {t} in {sig}: {total}");
        }
    }
}

#[test]
fn leibniz_and_antisymmetry_on_sample() {
    let conv = BracketConvention::unit();
    for sig in signatures() {
        for (a, b, c) in triples(sig.dim()) {
            let (r, s, t) = (
                S::monomial(sig, a, Scalar::one()),
                S::monomial(sig, b, Scalar::one()),
                S::monomial(sig, c, Scalar::one()),
            );
            let br = |u: &S, v: &S| superbracket(u, v, &conv).unwrap();
            let lhs = br(&r, &s.mul(&t).unwrap());
            let rhs = br(&r, &s)
                .mul(&t)
                .unwrap()
                .add(&s.mul(&br(&r, &t)).unwrap().scale(&sign(parity(&a) * parity(&b) % 2 == 1)));
            assert_eq!(lhs, rhs, "Leibniz fails on {r}, {s}, {t}");
            let anti = br(&r, &s).add(&br(&s, &r).scale(&sign(parity(&a) * parity(&b) % 2 == 1)));
            assert!(anti.is_zero());
        }
    }
}

/// Structure constants of o(p,q) from commutators of the matrices
/// `(M^{ij})_{ab} = delta_{ai} eta_{jb} - delta_{aj} eta_{ib}`.
fn matrix_structure_constants(sig: MetricSignature) -> Vec<Vec<Vec<i64>>> {
    let n = sig.dim();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mat = |i: usize, j: usize| {
        let mut m = vec![vec![0i64; n]; n];
        m[i][j] += sig.eta(j);
        m[j][i] -= sig.eta(i);
        m
    };
    let mul = |a: &Vec<Vec<i64>>, b: &Vec<Vec<i64>>| {
        let mut c = vec![vec![0i64; n]; n];
        for r in 0..n {
            for s in 0..n {
                for k in 0..n {
                    c[r][s] += a[r][k] * b[k][s];
                }
            }
        }
        c
    };
    pairs
        .iter()
        .map(|&(i, j)| {
            pairs
                .iter()
                .map(|&(k, l)| {
                    let (a, b) = (mat(i, j), mat(k, l));
                    let (ab, ba) = (mul(&a, &b), mul(&b, &a));
                    pairs.iter().map(|&(r, s)| (ab[r][s] - ba[r][s]) * sig.eta(s)).collect()
                })
                .collect()
        })
        .collect()
}

#[test]
fn spin_components_close_on_orthogonal_algebra() {
    let conv = BracketConvention::unit();
    for n in 2..=4 {
        for sig in [MetricSignature::euclidean(n), MetricSignature::lorentzian(n)] {
            let pairs: Vec<(usize, usize)> =
                (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
            let spins: Vec<S> = pairs.iter().map(|&(i, j)| spin_tensor(i, j, sig, &conv).unwrap()).collect();
            let expected = matrix_structure_constants(sig);
            // Coefficient of S^{rs} is read off the xi^r xi^s term.
            let hbar_i = conv.hbar_over_i();
            let mut got = Vec::new();
            let mut want = Vec::new();
            for (a, sa) in spins.iter().enumerate() {
                for (b, sb) in spins.iter().enumerate() {
                    let br = superbracket(sa, sb, &conv).unwrap();
                    let mut rebuilt = S::zero(sig);
                    for (c, &(r, s)) in pairs.iter().enumerate() {
                        let m = Mono { xi: (1 << r) | (1 << s), ..Mono::ONE };
                        let coef = br.coeff(&m).div(&hbar_i).unwrap();
                        rebuilt = rebuilt.add(&spins[c].scale(&coef));
                        got.push(coef);
                        want.push(Scalar::from_int(expected[a][b][c]));
                    }
                    assert_eq!(br, rebuilt, "bracket leaves the span of spin components");
                }
            }
            // Isomorphic through the basis map S^{ij} -> -M^{ij}.
            let negated: Vec<Scalar> = want.iter().map(|w| w.neg()).collect();
            assert_eq!(got, negated, "{sig}");
        }
    }
}

#[test]
fn delta_squares_to_multiple_of_r() {
    let conv = BracketConvention::unit();
    for sig in signatures() {
        let d: S = named_symbol(NamedSymbol::Delta, sig);
        let r: S = named_symbol(NamedSymbol::R, sig);
        let b = superbracket(&d, &d, &conv).unwrap();
        assert_eq!(b, r.scale(&conv.c_odd));
        assert!(!conv.c_odd.is_zero());
    }
}

#[test]
fn bracket_of_quadratics_matches_leibniz_expansion() {
    // {p1 p2, x1 x2} expanded by hand with {p_i, x^j} = -delta_ij.
    let sig = MetricSignature::euclidean(2);
    let conv = BracketConvention::unit();
    let pp = S::p(sig, 0).mul(&S::p(sig, 1)).unwrap();
    let xx = S::x(sig, 0).mul(&S::x(sig, 1)).unwrap();
    let got = superbracket(&pp, &xx, &conv).unwrap();
    let want = S::x(sig, 0)
        .mul(&S::p(sig, 0))
        .unwrap()
        .add(&S::x(sig, 1).mul(&S::p(sig, 1)).unwrap())
        .neg();
    assert_eq!(got, want);
}
