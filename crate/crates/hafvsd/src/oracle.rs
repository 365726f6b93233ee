//! Numerical checks of the quasi-order laws on linear saddle models.
//!
//! Chart convention: `x` carries `α`, `y` carries `λ_i`, `z` carries `λ_j`;
//! `D_i = {z = 0}` and `D_j = {y = 0}`. Flows are evaluated in `f64`; formula
//! values are computed in the model's own scalar and converted at the end.

use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::marks::{Transition, TransitionFailure};
use crate::scalar::{to_f64, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("model invariant violated: {0}")]
    InvalidModel(String),
    #[error("trajectory does not cross {0}")]
    NoCrossing(Section),
    #[error("step limit of {0} exceeded")]
    StepLimitExceeded(usize),
    #[error("only {0} usable tail samples (need 8)")]
    InsufficientSamples(usize),
    #[error("degenerate curve: no spread along the reference coordinate")]
    DegenerateCurve,
    #[error("input quasi-order equals the weight")]
    ResonantInput,
    #[error("input quasi-order must be positive")]
    DomainError,
    #[error("blow-up weight must be positive")]
    NonpositiveWeight,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearSaddleModel<T> {
    pub alpha: T,
    pub lambda_i: T,
    pub lambda_j: T,
}

impl<T: Scalar> LinearSaddleModel<T> {
    /// Requires `αλ_i < 0` and `λ_iλ_j > 0`.
    pub fn new(alpha: T, lambda_i: T, lambda_j: T) -> Result<Self, OracleError> {
        let zero = T::zero();
        if alpha.clone() * lambda_i.clone() >= zero || lambda_i.clone() * lambda_j.clone() <= zero {
            return Err(OracleError::InvalidModel(format!("({alpha}, {lambda_i}, {lambda_j})")));
        }
        Ok(LinearSaddleModel { alpha, lambda_i, lambda_j })
    }

    pub fn weight_i(&self) -> T {
        self.lambda_j.clone() / self.lambda_i.clone()
    }

    pub fn weight_j(&self) -> T {
        self.lambda_i.clone() / self.lambda_j.clone()
    }

    /// Time-reversed model.
    pub fn reversed(&self) -> Self {
        LinearSaddleModel { alpha: -self.alpha.clone(), lambda_i: -self.lambda_i.clone(), lambda_j: -self.lambda_j.clone() }
    }
}

impl<T: Scalar + ToPrimitive> LinearSaddleModel<T> {
    pub fn to_f64(&self) -> LinearSaddleModel<f64> {
        LinearSaddleModel { alpha: to_f64(&self.alpha), lambda_i: to_f64(&self.lambda_i), lambda_j: to_f64(&self.lambda_j) }
    }
}

impl LinearSaddleModel<f64> {
    fn eigen(&self) -> [f64; 3] {
        [self.alpha, self.lambda_i, self.lambda_j]
    }
}

pub type Point3 = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// The plane `{axis = c}`, `c > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Section {
    pub axis: Axis,
    pub c: f64,
}

impl Section {
    pub fn new(axis: Axis, c: f64) -> Section {
        assert!(c > 0.0, "section level must be positive");
        Section { axis, c }
    }
}

impl std::fmt::Display for Section {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{{:?} = {}}}", self.axis, self.c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionCurve {
    pub section: Section,
    pub samples: Vec<Point3>,
}

/// Closed-form crossing of `target` by the linear flow through `p`.
pub fn flow_exact(model: &LinearSaddleModel<f64>, p: Point3, target: Section) -> Result<Point3, OracleError> {
    let k = target.axis.index();
    if p[k] == target.c {
        return Ok(p);
    }
    let lam = model.eigen();
    if p[k] <= 0.0 || lam[k] == 0.0 {
        return Err(OracleError::NoCrossing(target));
    }
    let t = (target.c / p[k]).ln() / lam[k];
    let mut out = [0.0; 3];
    for m in 0..3 {
        out[m] = if m == k { target.c } else { p[m] * (lam[m] * t).exp() };
    }
    Ok(out)
}

/// Linear model plus `A = B = C = eps·x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Field {
    pub model: LinearSaddleModel<f64>,
    pub eps: f64,
}

impl Field {
    pub fn linear(model: LinearSaddleModel<f64>) -> Field {
        Field { model, eps: 0.0 }
    }

    pub fn perturbed(model: LinearSaddleModel<f64>, eps: f64) -> Field {
        Field { model, eps }
    }

    pub fn eval(&self, p: Point3) -> Point3 {
        let lam = self.model.eigen();
        let pert = self.eps * p[0];
        [p[0] * (lam[0] + pert), p[1] * (lam[1] + pert), p[2] * (lam[2] + pert)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rk4Options {
    pub step: f64,
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for Rk4Options {
    fn default() -> Self {
        Rk4Options { step: 1e-3, tol: 1e-12, max_steps: 10_000_000 }
    }
}

fn rk4_step(field: &Field, p: Point3, h: f64) -> Point3 {
    let add = |a: Point3, b: Point3, s: f64| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]];
    let k1 = field.eval(p);
    let k2 = field.eval(add(p, k1, h / 2.0));
    let k3 = field.eval(add(p, k2, h / 2.0));
    let k4 = field.eval(add(p, k3, h));
    let mut out = p;
    for m in 0..3 {
        out[m] += h / 6.0 * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m]);
    }
    out
}

/// RK4 in whichever time direction moves the section coordinate toward
/// `target`, with bisection on the final step.
pub fn flow_rk4(field: &Field, p: Point3, target: Section, opts: Rk4Options) -> Result<Point3, OracleError> {
    let k = target.axis.index();
    let c = target.c;
    if p[k] == c {
        return Ok(p);
    }
    let v = field.eval(p)[k];
    if p[k] <= 0.0 || v == 0.0 {
        return Err(OracleError::NoCrossing(target));
    }
    let h = if (c - p[k]) * v > 0.0 { opts.step } else { -opts.step };
    let side = (p[k] - c).signum();
    let mut cur = p;
    for _ in 0..opts.max_steps {
        let next = rk4_step(field, cur, h);
        if (next[k] - c).signum() != side {
            let (mut lo, mut hi) = (0.0, h);
            let mut mid_pt = next;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                mid_pt = rk4_step(field, cur, mid);
                if (mid_pt[k] - c).abs() <= opts.tol {
                    break;
                }
                if (mid_pt[k] - c).signum() == side {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            mid_pt[k] = c;
            return Ok(mid_pt);
        }
        if next[k] <= 0.0 || !next[k].is_finite() || (next[k] - cur[k]) * (c - cur[k]) <= 0.0 {
            return Err(OracleError::NoCrossing(target));
        }
        cur = next;
    }
    Err(OracleError::StepLimitExceeded(opts.max_steps))
}

/// Sampling and fitting window for quasi-order estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub samples: usize,
    pub depth: f64,
    pub tail: usize,
}

impl Default for Window {
    fn default() -> Self {
        Window { samples: 40, depth: 1e-8, tail: 20 }
    }
}

impl Window {
    /// Geometric parameters `1 = s_0 > … > s_{n−1} = depth`.
    pub fn params(&self) -> Vec<f64> {
        let n = self.samples.max(2);
        (0..n).map(|k| self.depth.powf(k as f64 / (n - 1) as f64)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuasiOrderFit {
    pub rho: f64,
    pub lo: f64,
    pub hi: f64,
    pub samples: usize,
}

/// Least-squares slope of `log c₂` against `log c₁` over the last `tail`
/// samples; the interval is three standard errors wide on each side.
pub fn measure_quasi_order(curve: &SectionCurve, axes: (Axis, Axis), tail: usize) -> Result<QuasiOrderFit, OracleError> {
    let (a, b) = (axes.0.index(), axes.1.index());
    let start = curve.samples.len().saturating_sub(tail);
    let pts: Vec<(f64, f64)> = curve.samples[start..]
        .iter()
        .filter(|p| p[a] > 0.0 && p[b] > 0.0)
        .map(|p| (p[a].ln(), p[b].ln()))
        .collect();
    let n = pts.len();
    if n < 8 {
        return Err(OracleError::InsufficientSamples(n));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= f64::EPSILON * nf * (1.0 + mx * mx) {
        return Err(OracleError::DegenerateCurve);
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let rho = sxy / sxx;
    let rss: f64 = pts.iter().map(|p| (p.1 - my - rho * (p.0 - mx)).powi(2)).sum();
    let se = (rss / (nf - 2.0) / sxx).sqrt();
    Ok(QuasiOrderFit { rho, lo: rho - 3.0 * se, hi: rho + 3.0 * se, samples: n })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    Exact,
    Rk4,
}

/// How the oracle moves points between sections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowConfig {
    pub integrator: Integrator,
    pub eps: f64,
    pub rk4: Rk4Options,
    pub window: Window,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig { integrator: Integrator::Exact, eps: 0.0, rk4: Rk4Options::default(), window: Window::default() }
    }
}

impl FlowConfig {
    pub fn rk4(step: f64, eps: f64) -> FlowConfig {
        FlowConfig { integrator: Integrator::Rk4, eps, rk4: Rk4Options { step, ..Rk4Options::default() }, ..Default::default() }
    }

    fn flow(&self, model: &LinearSaddleModel<f64>, p: Point3, target: Section) -> Result<Point3, OracleError> {
        match self.integrator {
            Integrator::Exact => flow_exact(model, p, target),
            Integrator::Rk4 => flow_rk4(&Field::perturbed(model.clone(), self.eps), p, target, self.rk4),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub formula: f64,
    pub measured: f64,
    pub error: f64,
    pub interval: [f64; 2],
    pub integrator: Integrator,
}

impl OracleReport {
    fn new(formula: f64, fit: QuasiOrderFit, integrator: Integrator) -> OracleReport {
        OracleReport { formula, measured: fit.rho, error: (fit.rho - formula).abs(), interval: [fit.lo, fit.hi], integrator }
    }
}

/// Flows the trace seed `s ↦ (s, y_b, z_b)` to `{x = c}` and measures the
/// `D_i`-quasi-order of the image against `λ_j/λ_i`.
pub fn verify_trace_to_angle<T: Scalar + ToPrimitive>(
    model: &LinearSaddleModel<T>,
    b: (f64, f64),
    c: f64,
    cfg: &FlowConfig,
) -> Result<OracleReport, OracleError> {
    let m = model.to_f64();
    let target = Section::new(Axis::X, c);
    // Seed parameters shrink toward x = 0, where the image approaches the corner.
    let samples = cfg
        .window
        .params()
        .into_iter()
        .map(|s| cfg.flow(&m, [c * s.powf(m.alpha.abs() / m.lambda_i.abs()), b.0, b.1], target))
        .collect::<Result<Vec<_>, _>>()?;
    let curve = SectionCurve { section: target, samples };
    let fit = measure_quasi_order(&curve, (Axis::Y, Axis::Z), cfg.window.tail)?;
    Ok(OracleReport::new(to_f64(&model.weight_i()), fit, cfg.integrator))
}

/// Which outgoing axis the saturation leaves along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    I,
    J,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionReport {
    pub branch: Branch,
    #[serde(flatten)]
    pub report: OracleReport,
}

/// Seeds an angle mark of `D_i`-quasi-order `rho` on `{x = c}`, flows it past
/// the saddle and measures the outgoing quasi-order.
pub fn verify_transition<T: Scalar + ToPrimitive>(
    model: &LinearSaddleModel<T>,
    rho: &T,
    c: f64,
    cfg: &FlowConfig,
) -> Result<TransitionReport, OracleError> {
    if *rho <= T::zero() {
        return Err(OracleError::DomainError);
    }
    let w = model.weight_i();
    let (branch, formula) = if *rho == w {
        return Err(OracleError::ResonantInput);
    } else if *rho > w {
        let t = Transition::new(model.alpha.clone(), model.lambda_i.clone(), model.lambda_j.clone());
        (Branch::I, t.apply(rho))
    } else {
        let t = Transition::new(model.alpha.clone(), model.lambda_j.clone(), model.lambda_i.clone());
        (Branch::J, t.apply(&(T::one() / rho.clone())))
    };
    let formula = formula.map_err(|e| match e {
        TransitionFailure::Resonant => OracleError::ResonantInput,
        TransitionFailure::OutOfDomain => OracleError::DomainError,
    })?;
    let m = model.to_f64();
    let r = to_f64(rho);
    // Along branch I the mark is z = y^ρ and exits through {y = c}; along J it
    // is y = z^{1/ρ} and exits through {z = c}.
    let (lead, exit) = match branch {
        Branch::I => (Axis::Y, Axis::Z),
        Branch::J => (Axis::Z, Axis::Y),
    };
    let power = if branch == Branch::I { r } else { 1.0 / r };
    let target = Section::new(lead, c);
    let samples = cfg
        .window
        .params()
        .into_iter()
        .map(|s| {
            let mut p = [c, 0.0, 0.0];
            p[lead.index()] = c * s;
            p[exit.index()] = c * s.powf(power);
            cfg.flow(&m, p, target)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let curve = SectionCurve { section: target, samples };
    let fit = measure_quasi_order(&curve, (Axis::X, exit), cfg.window.tail)?;
    Ok(TransitionReport { branch, report: OracleReport::new(to_f64(&formula), fit, cfg.integrator) })
}

/// Which of `{y = c}`, `{z = c}` a point of the mark `z = y^ρ` on `{x = c}`
/// reaches first, at depth `y = depth`.
pub fn exit_branch(model: &LinearSaddleModel<f64>, rho: f64, depth: f64, c: f64) -> Result<Branch, OracleError> {
    let p = [c, depth, depth.powf(rho)];
    let ty = (c / p[1]).ln() / model.lambda_i;
    let tz = (c / p[2]).ln() / model.lambda_j;
    if ty <= 0.0 || tz <= 0.0 {
        return Err(OracleError::NoCrossing(Section::new(Axis::Y, c)));
    }
    Ok(if ty < tz { Branch::I } else { Branch::J })
}

/// `ρ_k = w + δ_k` for `n` geometrically shrinking offsets `δ_k`, paired with
/// the measured outgoing quasi-order.
pub fn transition_sweep<T: Scalar + ToPrimitive>(
    model: &LinearSaddleModel<T>,
    n: usize,
    cfg: &FlowConfig,
) -> Result<Vec<(f64, TransitionReport)>, OracleError> {
    let m = model.to_f64();
    let w = to_f64(&model.weight_i());
    (0..n)
        .map(|k| {
            let rho = w + 2f64.powi(-(k as i32));
            verify_transition(&m, &rho, 1.0, cfg).map(|r| (rho, r))
        })
        .collect()
}

/// Linear part of the `ρ`-weighted blow-up pullback at the first chart's
/// origin: `(α, λ_i, λ_j − ρλ_i)`, or `(α, ρλ_i, λ_j − ρλ_i)` when `ramified`.
pub fn blowup_pullback_eigenvalues<T: Scalar>(
    model: &LinearSaddleModel<T>,
    rho: &T,
    ramified: bool,
) -> Result<[T; 3], OracleError> {
    if *rho <= T::zero() {
        return Err(OracleError::NonpositiveWeight);
    }
    let third = model.lambda_j.clone() - rho.clone() * model.lambda_i.clone();
    let second = if ramified { rho.clone() * model.lambda_i.clone() } else { model.lambda_i.clone() };
    Ok([model.alpha.clone(), second, third])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(a: f64, li: f64, lj: f64) -> LinearSaddleModel<f64> {
        LinearSaddleModel::new(a, li, lj).unwrap()
    }

    #[test]
    fn model_invariants() {
        assert!(LinearSaddleModel::new(1.0, 1.0, 2.0).is_err());
        assert!(LinearSaddleModel::new(-1.0, 1.0, -2.0).is_err());
        assert!(LinearSaddleModel::new(-1.0, 1.0, 2.0).is_ok());
    }

    #[test]
    fn exact_flow_example() {
        let p = flow_exact(&m(-1.0, 1.0, 2.0), [1.0, 0.1, 0.01], Section::new(Axis::Y, 1.0)).unwrap();
        assert!((p[0] - 0.1).abs() < 1e-12 && (p[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flow_on_section_is_identity() {
        let p = [0.3, 1.0, 0.2];
        let s = Section::new(Axis::Y, 1.0);
        assert_eq!(flow_exact(&m(-1.0, 1.0, 2.0), p, s).unwrap(), p);
        assert_eq!(flow_rk4(&Field::linear(m(-1.0, 1.0, 2.0)), p, s, Rk4Options::default()).unwrap(), p);
    }

    #[test]
    fn no_crossing_off_the_open_octant() {
        let s = Section::new(Axis::X, 1.0);
        assert!(matches!(flow_exact(&m(-1.0, 1.0, 2.0), [0.0, 0.5, 0.5], s), Err(OracleError::NoCrossing(_))));
    }

    #[test]
    fn constant_curve_is_degenerate() {
        let curve = SectionCurve { section: Section::new(Axis::X, 1.0), samples: vec![[1.0, 0.5, 0.5]; 20] };
        assert_eq!(measure_quasi_order(&curve, (Axis::Y, Axis::Z), 20), Err(OracleError::DegenerateCurve));
    }

    #[test]
    fn short_curve_rejected() {
        let curve = SectionCurve { section: Section::new(Axis::X, 1.0), samples: vec![[1.0, 0.5, 0.5]; 5] };
        assert_eq!(measure_quasi_order(&curve, (Axis::Y, Axis::Z), 20), Err(OracleError::InsufficientSamples(5)));
    }

    #[test]
    fn exit_branch_follows_weight() {
        let model = m(-1.0, 1.0, 2.0);
        assert_eq!(exit_branch(&model, 3.0, 1e-8, 1.0).unwrap(), Branch::I);
        assert_eq!(exit_branch(&model, 1.5, 1e-8, 1.0).unwrap(), Branch::J);
    }
}
