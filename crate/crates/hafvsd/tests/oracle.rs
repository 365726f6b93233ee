use hafvsd::oracle::{
    blowup_pullback_eigenvalues, flow_exact, flow_rk4, measure_quasi_order, transition_sweep, verify_trace_to_angle,
    verify_transition, Axis, Branch, Field, FlowConfig, OracleError, Rk4Options, Section, SectionCurve,
};
use hafvsd::scalar::{q, q_int};
use hafvsd::{ExactModel, LinearModel, LinearModel32};

const CLOSE: f64 = 1e-6;

fn model() -> LinearModel {
    LinearModel::new(-1.0, 1.0, 2.0).unwrap()
}

fn curve(f: impl Fn(f64) -> f64, lo: f64, n: usize) -> SectionCurve {
    let samples = (0..n)
        .map(|k| {
            let y = lo.powf(k as f64 / (n - 1) as f64);
            [1.0, y, f(y)]
        })
        .collect();
    SectionCurve { section: Section::new(Axis::X, 1.0), samples }
}

#[test]
fn exact_flow_example() {
    let p = flow_exact(&model(), [1.0, 0.1, 0.01], Section::new(Axis::Y, 1.0)).unwrap();
    assert!((p[0] - 0.1).abs() < 1e-14);
    assert_eq!(p[1], 1.0);
    assert!((p[2] - 1.0).abs() < 1e-14);
}

#[test]
fn exact_flow_edge_cases() {
    let on = [0.5, 1.0, 0.3];
    assert_eq!(flow_exact(&model(), on, Section::new(Axis::Y, 1.0)).unwrap(), on);
    assert!(matches!(
        flow_exact(&model(), [0.0, 1.0, 1.0], Section::new(Axis::X, 1.0)),
        Err(OracleError::NoCrossing(_))
    ));
}

#[test]
fn exact_flow_semigroup() {
    let m = model();
    let p = [1.0, 0.01, 0.02];
    let mid = flow_exact(&m, p, Section::new(Axis::Y, 0.3)).unwrap();
    let two = flow_exact(&m, mid, Section::new(Axis::Y, 1.0)).unwrap();
    let one = flow_exact(&m, p, Section::new(Axis::Y, 1.0)).unwrap();
    for k in 0..3 {
        assert!((one[k] - two[k]).abs() < 1e-12 * one[k].abs().max(1.0));
    }
}

#[test]
fn rk4_matches_closed_form() {
    let opts = Rk4Options { step: 1e-3, tol: 1e-12, ..Rk4Options::default() };
    let field = Field::linear(model());
    for start in [[1.0, 0.1, 0.01], [0.5, 0.02, 0.3], [2.0, 0.5, 0.5]] {
        let a = flow_exact(&model(), start, Section::new(Axis::Y, 1.0)).unwrap();
        let b = flow_rk4(&field, start, Section::new(Axis::Y, 1.0), opts).unwrap();
        for k in 0..3 {
            assert!((a[k] - b[k]).abs() < 1e-8, "{start:?}: {a:?} vs {b:?}");
        }
    }
    let on = [0.3, 1.0, 0.2];
    assert_eq!(flow_rk4(&field, on, Section::new(Axis::Y, 1.0), opts).unwrap(), on);
}

#[test]
fn small_perturbation_stays_close() {
    let opts = Rk4Options::default();
    let start = [0.01, 0.01, 1e-4];
    let a = flow_rk4(&Field::linear(model()), start, Section::new(Axis::Y, 1.0), opts).unwrap();
    let b = flow_rk4(&Field::perturbed(model(), 0.01), start, Section::new(Axis::Y, 1.0), opts).unwrap();
    for k in 0..3 {
        assert!((a[k] - b[k]).abs() < 1e-3, "{a:?} vs {b:?}");
    }
}

#[test]
fn exact_power_law() {
    let fit = measure_quasi_order(&curve(|y| 3.0 * y * y, 1e-6, 40), (Axis::Y, Axis::Z), 40).unwrap();
    assert!((fit.rho - 2.0).abs() < 1e-9);
    assert!(fit.lo <= 2.0 + 1e-9 && fit.hi >= 2.0 - 1e-9);
}

#[test]
fn oscillating_curve_keeps_its_order() {
    let c = curve(|y| y * y * (1.0 + 0.1 * (1.0 / y).sin()), 1e-6, 400);
    let fit = measure_quasi_order(&c, (Axis::Y, Axis::Z), 400).unwrap();
    assert!((fit.rho - 2.0).abs() < 1e-2, "{}", fit.rho);
}

#[test]
fn scaling_does_not_move_the_estimate() {
    let base = curve(|y| y.powf(1.7), 1e-6, 40);
    let scaled = SectionCurve {
        section: base.section,
        samples: base.samples.iter().map(|p| [p[0], 7.0 * p[1], 0.02 * p[2]]).collect(),
    };
    let a = measure_quasi_order(&base, (Axis::Y, Axis::Z), 40).unwrap();
    let b = measure_quasi_order(&scaled, (Axis::Y, Axis::Z), 40).unwrap();
    assert!((a.rho - b.rho).abs() < 1e-12);
}

#[test]
fn constant_curve_is_degenerate() {
    let c = SectionCurve { section: Section::new(Axis::X, 1.0), samples: vec![[1.0, 0.5, 0.5]; 20] };
    assert_eq!(measure_quasi_order(&c, (Axis::Y, Axis::Z), 20), Err(OracleError::DegenerateCurve));
}

#[test]
fn trace_to_angle_examples() {
    let m = LinearModel::new(1.0, -1.0, -2.0).unwrap();
    let r = verify_trace_to_angle(&m, (1.0, 1.0), 1.0, &FlowConfig::default()).unwrap();
    assert!((r.measured - 2.0).abs() < CLOSE);

    let sym = LinearModel::new(1.0, -3.0, -3.0).unwrap();
    let r = verify_trace_to_angle(&sym, (1.0, 1.0), 1.0, &FlowConfig::default()).unwrap();
    assert!((r.measured - 1.0).abs() < CLOSE);

    let r = verify_trace_to_angle(&m, (1.0, 1.0), 1.0, &FlowConfig::rk4(1e-3, 0.01)).unwrap();
    assert!((r.measured - 2.0).abs() < 5e-3, "{}", r.measured);
}

#[test]
fn transition_examples() {
    for (rho, expect) in [(3.0, 1.0), (5.0, 3.0)] {
        let r = verify_transition(&model(), &rho, 1.0, &FlowConfig::default()).unwrap();
        assert_eq!(r.branch, Branch::I);
        assert!((r.report.measured - expect).abs() < CLOSE);
    }
    let r = verify_transition(&model(), &1.0, 1.0, &FlowConfig::default()).unwrap();
    assert_eq!(r.branch, Branch::J);
    assert!((r.report.measured - r.report.formula).abs() < CLOSE);
    assert_eq!(verify_transition(&model(), &2.0, 1.0, &FlowConfig::default()).unwrap_err(), OracleError::ResonantInput);
}

#[test]
fn transition_in_every_scalar() {
    let exact = ExactModel::new(q_int(-1), q_int(1), q_int(2)).unwrap();
    let r = verify_transition(&exact, &q(7, 2), 1.0, &FlowConfig::default()).unwrap();
    assert_eq!(r.report.formula, 1.5);
    assert!((r.report.measured - 1.5).abs() < CLOSE);

    let single = LinearModel32::new(-1.0, 1.0, 2.0).unwrap();
    let r = verify_transition(&single, &3.0f32, 1.0, &FlowConfig::default()).unwrap();
    assert!((r.report.measured - 1.0).abs() < CLOSE);
}

#[test]
fn sweep_approaches_zero() {
    let sweep = transition_sweep(&model(), 20, &FlowConfig::default()).unwrap();
    assert_eq!(sweep.len(), 20);
    for w in sweep.windows(2) {
        assert!(w[1].0 < w[0].0);
        assert!(w[1].1.report.measured < w[0].1.report.measured);
    }
    let last = sweep.last().unwrap().1.report.measured;
    assert!(last > 0.0 && last < 1e-5);
}

#[test]
fn blowup_examples() {
    let m = ExactModel::new(q_int(-1), q_int(1), q_int(2)).unwrap();
    let at = |r: i64| blowup_pullback_eigenvalues(&m, &q_int(r), false).unwrap();
    assert_eq!(at(1), [q_int(-1), q_int(1), q_int(1)]);
    assert_eq!(at(2), [q_int(-1), q_int(1), q_int(0)]);
    assert_eq!(at(3), [q_int(-1), q_int(1), q_int(-1)]);
    let ramified = blowup_pullback_eigenvalues(&m, &q(1, 2), true).unwrap();
    assert_eq!(ramified, [q_int(-1), q(1, 2), q(3, 2)]);
    assert_eq!(blowup_pullback_eigenvalues(&m, &q_int(0), false).unwrap_err(), OracleError::NonpositiveWeight);
}

#[test]
fn invalid_models_are_rejected() {
    assert!(LinearModel::new(1.0, 1.0, 2.0).is_err());
    assert!(LinearModel::new(-1.0, 1.0, -2.0).is_err());
}
