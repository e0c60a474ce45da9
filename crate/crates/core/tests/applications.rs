use spinquant::applications::{
    dirac, form_basis, invariant_scan, ky_bracket_test, ky_pde_oracle, ky_solution_space, ky_superization,
    symbol_of_form, ApplicationError, InvariantElement, InvariantWeights, KyClass, ModuleTag, SkewForm,
};
use spinquant::conformal::generators;
use spinquant::diffop::{adjoint_action, normal_order};
use spinquant::ring::{unit_exps, Field, Scalar, XPoly};
use spinquant::solver::Bound;
use spinquant::symalg::{named_symbol, BracketConvention, MetricSignature, Mono, NamedSymbol, SuperSymbol};

fn one() -> XPoly<Scalar> {
    XPoly::constant(Scalar::one())
}

#[test]
fn symbol_of_constant_two_form() {
    let sig = MetricSignature::euclidean(2);
    let mut f = SkewForm::new(sig, 2).unwrap();
    f.set(&[0, 1], one()).unwrap();
    let p1xi2 = SuperSymbol::p(sig, 0).mul(&SuperSymbol::xi(sig, 1)).unwrap();
    let p2xi1 = SuperSymbol::p(sig, 1).mul(&SuperSymbol::xi(sig, 0)).unwrap();
    assert_eq!(symbol_of_form(&f), p1xi2.sub(&p2xi1));

    let mut g = SkewForm::new(sig, 1).unwrap();
    g.set(&[0], one()).unwrap();
    assert_eq!(symbol_of_form(&g), SuperSymbol::p(sig, 0));
}

#[test]
fn symmetric_tensors_have_zero_form() {
    let sig = MetricSignature::euclidean(3);
    let f = SkewForm::from_tensor(sig, 2, |idx| XPoly::coord(idx[0]).add(&XPoly::coord(idx[1]))).unwrap();
    assert!(f.is_zero());
    assert!(symbol_of_form(&f).is_zero());
    assert_eq!(SkewForm::new(sig, 0).unwrap_err(), ApplicationError::ZeroDegree);
    let mut f = SkewForm::new(sig, 2).unwrap();
    assert!(f.set(&[1, 1], one()).is_err());
    f.set(&[2, 0], one()).unwrap();
    assert_eq!(f.component(&[0, 2]), one().scale(&Scalar::from_int(-1)));
}

#[test]
fn pde_oracle_solution_counts() {
    // Flat counts: Killing–Yano k-forms C(n+1, k+1), conformal ones C(n+2, k+1).
    for sig in [MetricSignature::euclidean(3), MetricSignature::lorentzian(3)] {
        assert_eq!(ky_solution_space(sig, 2, 2, false).unwrap().len(), 4);
        assert_eq!(ky_solution_space(sig, 2, 2, true).unwrap().len(), 10);
        assert_eq!(ky_solution_space(sig, 1, 2, false).unwrap().len(), 6);
        assert_eq!(ky_solution_space(sig, 1, 2, true).unwrap().len(), 10);
    }
    let sig = MetricSignature::euclidean(3);
    let mut f = SkewForm::new(sig, 2).unwrap();
    f.set(&[0, 1], one()).unwrap();
    assert_eq!(ky_pde_oracle(&f), KyClass::KillingYano);
    let mut g = SkewForm::new(sig, 2).unwrap();
    g.set(&[0, 1], XPoly::coord(0)).unwrap();
    assert_eq!(ky_pde_oracle(&g), KyClass::Neither);
}

#[test]
fn bracket_test_matches_oracle_on_all_basis_forms() {
    for sig in [MetricSignature::euclidean(3), MetricSignature::lorentzian(3)] {
        let s0 = ky_superization(sig).unwrap();
        let mut forms = form_basis(sig, 2, 2).unwrap();
        forms.extend(ky_solution_space(sig, 2, 2, false).unwrap());
        forms.extend(ky_solution_space(sig, 2, 2, true).unwrap());
        let mut seen = Vec::new();
        for f in &forms {
            let want = ky_pde_oracle(f);
            assert_eq!(ky_bracket_test(f, &s0).unwrap(), want, "{f:?}");
            if !seen.contains(&want) {
                seen.push(want);
            }
        }
        assert_eq!(seen.len(), 3);
    }
}

#[test]
fn tensor_symbol_invariants() {
    let n = 3;
    let sig = MetricSignature::euclidean(n);
    let found = invariant_scan(sig, ModuleTag::TensorSymbols, Bound::new(2, 1));
    let delta: SuperSymbol<Scalar> = named_symbol(NamedSymbol::Delta, sig);
    let r: SuperSymbol<Scalar> = named_symbol(NamedSymbol::R, sig);
    let expected = [
        (SuperSymbol::constant(sig, Scalar::one()), Scalar::zero()),
        (delta.clone(), Scalar::frac(1, 3)),
        (r.clone(), Scalar::frac(2, 3)),
    ];
    for (s, d) in &expected {
        assert!(
            found.iter().any(|inv| inv.weights == InvariantWeights::Delta(d.clone())
                && matches!(&inv.element, InvariantElement::Symbol(t) if proportional(t, s))),
            "{s} at {d}"
        );
    }
}

fn proportional(a: &SuperSymbol<Scalar>, b: &SuperSymbol<Scalar>) -> bool {
    let Some((m, c)) = b.terms().next() else { return a.is_zero() };
    let k = a.coeff(m).mul(&c.inv().unwrap());
    !k.is_zero() && a.sub(&b.scale(&k)).is_zero()
}

#[test]
fn hamiltonian_symbol_invariants() {
    let sig = MetricSignature::lorentzian(3);
    let found = invariant_scan(sig, ModuleTag::HamiltonianSymbols, Bound::new(3, 1));
    let delta: SuperSymbol<Scalar> = named_symbol(NamedSymbol::Delta, sig);
    let r: SuperSymbol<Scalar> = named_symbol(NamedSymbol::R, sig);
    for (s, d) in [(delta.clone(), Scalar::frac(1, 3)), (delta.mul(&r).unwrap(), Scalar::one())] {
        assert!(found.iter().any(|inv| inv.weights == InvariantWeights::Delta(d.clone())
            && matches!(&inv.element, InvariantElement::Symbol(t) if proportional(t, &s))));
    }
}

#[test]
fn dirac_is_the_first_operator_invariant() {
    for sig in [MetricSignature::euclidean(3), MetricSignature::lorentzian(4)] {
        let n = sig.dim() as i64;
        let d = dirac(sig);
        let r: SuperSymbol<Scalar> = named_symbol(NamedSymbol::R, sig);
        let lap = normal_order(&r, &BracketConvention::unit()).scale(&Scalar::from_int(-1));
        assert_eq!(d.compose(&d), lap);
        let (l, m) = (Scalar::frac(n - 1, 2 * n), Scalar::frac(n + 1, 2 * n));
        for g in generators(sig) {
            assert!(adjoint_action(&g, &l, &m, &d).is_zero(), "{}", g.label());
        }
        let found = invariant_scan(sig, ModuleTag::SpinorOperators, Bound::new(1, 0));
        let first: Vec<_> = found
            .iter()
            .filter(|inv| matches!(inv.weights, InvariantWeights::Densities { lambda: Some(_), .. }))
            .collect();
        // Dirac and its product with the volume element, which only the
        // orientation-preserving part of the group sees as invariant.
        assert_eq!(first.len(), 2);
        let want = InvariantWeights::Densities { lambda: Some(l), mu_minus_lambda: Scalar::frac(1, n) };
        assert!(first.iter().all(|inv| inv.weights == want));
        assert!(first.iter().any(|inv| {
            let InvariantElement::Operator(op) = &inv.element else { return false };
            let (key, c) = d.terms().next().unwrap();
            let k = op.coeff(key).mul(&c.inv().unwrap());
            !k.is_zero() && op == &d.scale(&k)
        }));
    }
}

#[test]
fn x_dependent_form_symbol() {
    let sig = MetricSignature::euclidean(3);
    let mut f = SkewForm::new(sig, 2).unwrap();
    f.set(&[1, 2], XPoly::monomial(unit_exps(0), Scalar::from_int(3))).unwrap();
    let s = symbol_of_form(&f);
    let mut m = Mono::ONE;
    m.x[0] = 1;
    m.p[1] = 1;
    m.xi = 0b100;
    assert_eq!(s.coeff(&m), Scalar::from_int(3));
}
