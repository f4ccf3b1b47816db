use shnol_core::cutoff::intrinsic_cutoffs;
use shnol_core::grid::{Field, Grid, GridFunction, LogQuantity};
use shnol_core::operator::{discretize, LeftBoundary, OperatorSpec};
use shnol_core::profile::Profile;
use shnol_core::shnol::{
    check_identity, fit_trend, growth_verdict, harnack_equivalence, log_slope, oracle_distance, shnol_records,
    subexponential_diagnostic, subexponential_diagnostic_log, transformed_eigenfunction, CaccioppoliReport, Condition, Trend,
};
use shnol_core::Error;

/// Free line, u = cos x, cut-offs equal to 1 on |x| ≤ n with ramps of width 1/2.
fn flat(hi: f64, n_max: usize) -> (OperatorSpec, shnol_core::cutoff::CutoffSequence, Field) {
    let g = Grid::uniform(0.0, hi, (hi * 200.0) as usize).unwrap();
    let spec = OperatorSpec::builder(&g).left(LeftBoundary::Natural).mirrored(true).build().unwrap();
    let seq = intrinsic_cutoffs(&spec, 0.0, 0.5, n_max).unwrap();
    let u = Field::new(GridFunction::from_fn(&g, f64::cos).unwrap(), GridFunction::from_fn(&g, |x| -x.sin()).unwrap())
        .unwrap();
    (spec, seq, u)
}

/// ∫_a^b cos² x dx.
fn cos_sq(a: f64, b: f64) -> f64 {
    let f = |x: f64| 0.5 * x + 0.25 * (2.0 * x).sin();
    f(b) - f(a)
}

/// max |cos| over [a, b].
fn max_abs_cos(a: f64, b: f64) -> f64 {
    let pi = std::f64::consts::PI;
    if (a / pi).ceil() <= b / pi {
        1.0
    } else {
        a.cos().abs().max(b.cos().abs())
    }
}

/// Composite Simpson on [a, b] with 2k panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, k: usize) -> f64 {
    let n = 2 * k;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn flat_records_match_closed_forms() {
    let (spec, seq, u) = flat(30.0, 20);
    let op = discretize(&spec).unwrap();
    let recs = shnol_records(&spec, &spec, &seq, &u, 1.0, Some(&op)).unwrap();
    assert_eq!(recs.len(), seq.len() - 2);
    for r in &recs {
        let n = r.n as f64;
        // Ramp slope 2 on both sides of the origin.
        assert!((r.energy_a.value() - 4.0).abs() < 1e-9, "energy {}", r.energy_a.value());
        let grad = 2.0 * 4.0 * cos_sq(n, n + 0.5);
        assert!((r.grad_n.value() / grad - 1.0).abs() < 1e-6);
        let psi = |x: f64| if x <= n { 1.0 } else { (1.0 - 2.0 * (x - n)).max(0.0) };
        let norm_sq = 2.0 * simpson(|x| (psi(x) * x.cos()).powi(2), 0.0, n + 0.5, 20_000);
        assert!((r.norm.value().powi(2) / norm_sq - 1.0).abs() < 1e-6);
        assert!((r.max_ratio - max_abs_cos(n - 1.0, n + 1.5)).abs() < 1e-4);
        assert!(r.ibp_defect < 1e-6, "n = {}: {}", r.n, r.ibp_defect);
        assert!(r.consistency_defect() < 1e-12);
        assert!(r.residual.is_finite() && r.residual > 0.0);
    }
    check_identity(&recs).unwrap();
}

#[test]
fn identity_violation_is_reported() {
    let (spec, seq, u) = flat(12.0, 8);
    let mut recs = shnol_records(&spec, &spec, &seq, &u, 1.0, None).unwrap();
    assert!(recs.iter().all(|r| r.residual.is_nan()));
    // A wrong λ breaks the integration-by-parts identity.
    let wrong = shnol_records(&spec, &spec, &seq, &u, 1.3, None).unwrap();
    assert!(matches!(check_identity(&wrong), Err(Error::IdentityViolation { .. })));
    recs[2].ibp_defect = 1e-3;
    assert!(matches!(check_identity(&recs), Err(Error::IdentityViolation { n, .. }) if n == recs[2].n));
}

#[test]
fn trends() {
    let ns: Vec<usize> = (1..=12).collect();
    let exp: Vec<f64> = ns.iter().map(|&n| -0.7 * n as f64 + 3.0).collect();
    match fit_trend(&ns, &exp) {
        Some(Trend::Decaying { rate, .. }) => assert!((rate + 0.7).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
    let pow: Vec<f64> = ns.iter().map(|&n| -0.5 * (n as f64).ln()).collect();
    match fit_trend(&ns, &pow) {
        Some(Trend::Decaying { power, .. }) => assert!((power + 0.5).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
    assert_eq!(fit_trend(&ns, &vec![2.0; 12]), Some(Trend::Bounded));
    let grow: Vec<f64> = ns.iter().map(|&n| 0.3 * n as f64).collect();
    assert_eq!(fit_trend(&ns, &grow), Some(Trend::Growing));
    assert_eq!(fit_trend(&ns[..2], &grow[..2]), None);
    let mut zero_end = exp.clone();
    zero_end[11] = f64::NEG_INFINITY;
    assert!(matches!(fit_trend(&ns, &zero_end), Some(Trend::Decaying { rate, .. }) if rate == f64::NEG_INFINITY));
    assert!((log_slope(&[1.0, 2.0, 3.0], &[5.0, 3.0, 1.0]) + 2.0).abs() < 1e-15);
}

#[test]
fn verdict_labels() {
    let (spec, seq, u) = flat(12.0, 8);
    let recs = shnol_records(&spec, &spec, &seq, &u, 1.0, None).unwrap();
    let v = growth_verdict(Condition::GrowthI, &recs, |r| r.cond_i);
    assert!(v.applicable && v.pass, "{v}");
    assert!(v.to_string().starts_with("condition (i): PASS"));
    let v = growth_verdict(Condition::GrowthII, &recs, |_| LogQuantity::ONE);
    assert_eq!(v.label(), "FAIL");
    let v = growth_verdict(Condition::GrowthII, &recs[..2], |r| r.cond_ii);
    assert_eq!(v.label(), "INAPPLICABLE");
}

#[test]
fn harnack_needs_a_positive_eigenfunction() {
    let (spec, seq, u) = flat(12.0, 8);
    let recs = shnol_records(&spec, &spec, &seq, &u, 1.0, None).unwrap();
    let rep = harnack_equivalence(&seq, &u.value, &recs);
    assert!(!rep.verdict.applicable);
    // At λ = 0 the constant solves the equation and is positive everywhere.
    let one = Field::constant(spec.grid(), 1.0);
    let op = discretize(&spec).unwrap();
    let recs = shnol_records(&spec, &spec, &seq, &one, 0.0, Some(&op)).unwrap();
    let rep = harnack_equivalence(&seq, &one.value, &recs);
    assert!(rep.verdict.applicable, "{}", rep.verdict);
    assert!(rep.ratios.iter().all(|(_, q)| (q - 1.0).abs() < 1e-12));
}

#[test]
fn subexponential_examples() {
    let root: Vec<f64> = (1..=1000).map(|n| (n as f64).sqrt().exp()).collect();
    let rep = subexponential_diagnostic(&root).unwrap();
    assert!(rep.subexponential && rep.min_tail_ratio >= 1.0);
    // e^n overflows past n = 709, so its logarithm goes in directly.
    let ln_exp: Vec<f64> = (1..=1000).map(|n| n as f64).collect();
    let rep = subexponential_diagnostic_log(&ln_exp).unwrap();
    assert!(!rep.subexponential && rep.rho >= 0.9);
    assert!(matches!(subexponential_diagnostic(&root[..7]), Err(Error::TooShort(7))));
}

#[test]
fn transformed_eigenfunction_divides_by_reference() {
    let g = Grid::uniform(1.0, 5.0, 400).unwrap();
    let u = Field::new(GridFunction::from_fn(&g, |x| x.sin()).unwrap(), GridFunction::from_fn(&g, f64::cos).unwrap())
        .unwrap();
    let h = Field::new(
        GridFunction::from_fn(&g, |x| x.powi(-2)).unwrap(),
        GridFunction::from_fn(&g, |x| -2.0 * x.powi(-3)).unwrap(),
    )
    .unwrap();
    let t = transformed_eigenfunction(&u, &h).unwrap();
    for (i, &x) in g.nodes().iter().enumerate() {
        assert!((t.value.values()[i] - x * x * x.sin()).abs() < 1e-12);
        let d = 2.0 * x * x.sin() + x * x * x.cos();
        assert!((t.slope.values()[i] - d).abs() < 1e-10);
    }
}

#[test]
fn caccioppoli_refinement_rule() {
    let a = CaccioppoliReport { constants: vec![(2, 1.0)], sup: 1.0, bounded: true };
    let b = CaccioppoliReport { constants: vec![(2, 1.04)], sup: 1.04, bounded: true };
    let c = CaccioppoliReport { constants: vec![(2, 1.06)], sup: 1.06, bounded: true };
    assert!(a.stable_under_refinement(&b));
    assert!(!a.stable_under_refinement(&c));
}

#[test]
fn flat_oracle_eigenvalue() {
    // Natural left end, Dirichlet at X: eigenvalues ((k + 1/2)π/X)².
    let g = Grid::uniform(0.0, 50.0, 5000).unwrap();
    let spec = OperatorSpec::builder(&g).left(LeftBoundary::Natural).build().unwrap();
    let d = oracle_distance(&spec, 1.0).unwrap();
    let exact = (0..100)
        .map(|k| ((k as f64 + 0.5) * std::f64::consts::PI / 50.0).powi(2))
        .min_by(|a, b| (a - 1.0).abs().total_cmp(&(b - 1.0).abs()))
        .unwrap();
    assert!((d.nearest - exact).abs() < 1e-4, "{} vs {exact}", d.nearest);
    assert!(d.within_resolution());
    let weight = Profile::Const(2.0);
    let doubled = spec.to_builder().weight(weight).build().unwrap();
    assert!((oracle_distance(&doubled, 1.0).unwrap().nearest - d.nearest).abs() < 1e-10);
}
