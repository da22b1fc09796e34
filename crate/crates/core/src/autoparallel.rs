//! Autoparallel and geodesic curves.
//!
//! A curve is an autoparallel of `Lambda = Omega + lambda` when
//! `Lambda-nabla_C' C' = 0`. In the orthonormal frame this reads
//! `du^a/ds = -Omega^a_b(u) u^b - lambda^a_b(u) u^b`, where `u^a = e^a(C')`.
//! States carry coordinate positions and velocities; the frame equation is
//! converted with the coframe and its derivatives at each evaluation.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::cartan::proca::constraint;
use crate::error::{GeomError, Result};
use crate::exterior::{Chart, Form, FrameAt};
use crate::geometry::Geometry;
use crate::jet::Scalar;

/// Position and velocity in coordinates at affine parameter `param`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveState {
    pub param: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl CurveState {
    pub fn new(param: f64, x: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if x.len() != v.len() {
            return Err(GeomError::ChartMismatch(format!("position has {} components, velocity {}", x.len(), v.len())));
        }
        if !x.iter().chain(&v).all(|c| c.is_finite()) {
            return Err(GeomError::Invalid("non-finite curve state".into()));
        }
        Ok(CurveState { param, x, v })
    }
}

/// Frame components `u^a = E^a_mu v^mu`.
fn frame_velocity(fr: &FrameAt<'_>, v: &[f64]) -> Vec<f64> {
    fr.e.iter().map(|row| row.iter().zip(v).map(|(e, vi)| e.val() * vi).sum()).collect()
}

/// `-conn^a_b(u) u^b` for a connection or distortion indexed `[a*n+b]`.
pub fn frame_force<S: Scalar>(conn: &[Form<S>], u: &[f64]) -> Vec<f64> {
    let n = u.len();
    (0..n)
        .map(|a| {
            let mut s = 0.0;
            for b in 0..n {
                let w = conn[a * n + b].components();
                let c: f64 = w.iter().zip(u).map(|(x, uc)| x.value() * uc).sum();
                s -= c * u[b];
            }
            s
        })
        .collect()
}

/// Coordinate acceleration from frame acceleration `du`:
/// `x'' = X_a (du^a - d_nu E^a_rho v^nu v^rho)`.
fn to_coordinates(fr: &FrameAt<'_>, v: &[f64], du: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut w = du.to_vec();
    for (a, wa) in w.iter_mut().enumerate() {
        for (rho, vr) in v.iter().enumerate() {
            let e = &fr.e[a][rho];
            for (nu, vn) in v.iter().enumerate() {
                *wa -= e.d1(nu) * vn * vr;
            }
        }
    }
    (0..n).map(|mu| (0..n).map(|a| fr.einv[mu][a].val() * w[a]).sum()).collect()
}

fn check_finite(state: &CurveState, acc: &[f64]) -> Result<()> {
    if acc.iter().all(|a| a.is_finite()) {
        Ok(())
    } else {
        Err(GeomError::domain("autoparallel_rhs", format!("non-finite acceleration at {:?}", state.x)))
    }
}

/// Levi-Civita geodesic acceleration in coordinates.
pub fn geodesic_rhs(chart: &Chart, state: &CurveState) -> Result<Vec<f64>> {
    let fr = chart.at(&state.x, 1)?;
    let u = frame_velocity(&fr, &state.v);
    let acc = to_coordinates(&fr, &state.v, &frame_force(&fr.omega, &u));
    check_finite(state, &acc)?;
    Ok(acc)
}

/// Autoparallel acceleration in coordinates. Equals [`geodesic_rhs`] exactly when
/// the distortion vanishes.
pub fn autoparallel_rhs(geo: &Geometry, state: &CurveState) -> Result<Vec<f64>> {
    let pg = geo.at(&state.x, 1)?;
    let fr = &pg.frame;
    let u = frame_velocity(fr, &state.v);
    let mut du = frame_force(&fr.omega, &u);
    for (d, f) in du.iter_mut().zip(frame_force(&pg.lambda, &u)) {
        *d += f;
    }
    let acc = to_coordinates(fr, &state.v, &du);
    check_finite(state, &acc)?;
    Ok(acc)
}

/// The non-Riemannian force `-lambda^a_b(u) u^b` in frame components at a state.
pub fn distortion_force(geo: &Geometry, state: &CurveState) -> Result<Vec<f64>> {
    let pg = geo.at(&state.x, 1)?;
    let u = frame_velocity(&pg.frame, &state.v);
    Ok(frame_force(&pg.lambda, &u))
}

/// `1/(2n)[u (A3 + 4A1 - 2A2)(u) + u^2 (A2 - (2+2n) A1 - A3)^#]` in frame components.
pub fn three_form_force(eta: &[f64], a1: &Form<f64>, a2: &Form<f64>, a3: &Form<f64>, u: &[f64]) -> Vec<f64> {
    let n = eta.len();
    let nf = n as f64;
    let on = |f: &Form<f64>| f.components().iter().zip(u).map(|(x, y)| x * y).sum::<f64>();
    let a4 = on(a3) + 4.0 * on(a1) - 2.0 * on(a2);
    let u2: f64 = (0..n).map(|a| eta[a] * u[a] * u[a]).sum();
    let (c1, c2, c3) = (a1.components(), a2.components(), a3.components());
    (0..n)
        .map(|a| {
            let bar = eta[a] * (c2[a] - (2.0 + 2.0 * nf) * c1[a] - c3[a]);
            (u[a] * a4 + u2 * bar) / (2.0 * nf)
        })
        .collect()
}

/// Right-hand side used by the integrator.
pub trait CurveField: Sync {
    fn accel(&self, state: &CurveState) -> Result<Vec<f64>>;
}

/// Levi-Civita geodesics of a chart.
pub struct Geodesic<'a>(pub &'a Chart);

impl CurveField for Geodesic<'_> {
    fn accel(&self, state: &CurveState) -> Result<Vec<f64>> {
        geodesic_rhs(self.0, state)
    }
}

/// Autoparallels of a geometry.
pub struct Autoparallel<'a>(pub &'a Geometry);

impl CurveField for Autoparallel<'_> {
    fn accel(&self, state: &CurveState) -> Result<Vec<f64>> {
        autoparallel_rhs(self.0, state)
    }
}

/// Sampled states of an integrated curve.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<CurveState>,
    /// Set when the curve left the domain; `states` holds the part before that.
    pub left_domain: Option<GeomError>,
}

impl Trajectory {
    pub fn last(&self) -> &CurveState {
        self.states.last().expect("trajectory holds the start state")
    }
}

fn shifted(s: &CurveState, h: f64, dx: &[f64], dv: &[f64]) -> CurveState {
    CurveState {
        param: s.param + h,
        x: s.x.iter().zip(dx).map(|(x, d)| x + h * d).collect(),
        v: s.v.iter().zip(dv).map(|(v, d)| v + h * d).collect(),
    }
}

/// One classical fourth-order Runge-Kutta step.
pub fn rk4_step(field: &dyn CurveField, s: &CurveState, h: f64) -> Result<CurveState> {
    let a1 = field.accel(s)?;
    let k1x = s.v.clone();
    let s2 = shifted(s, h / 2.0, &k1x, &a1);
    let a2 = field.accel(&s2)?;
    let k2x = s2.v.clone();
    let s3 = shifted(s, h / 2.0, &k2x, &a2);
    let a3 = field.accel(&s3)?;
    let k3x = s3.v.clone();
    let s4 = shifted(s, h, &k3x, &a3);
    let a4 = field.accel(&s4)?;
    let k4x = s4.v.clone();
    let comb = |a: &[f64], b: &[f64], c: &[f64], d: &[f64]| -> Vec<f64> {
        (0..a.len()).map(|i| (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]) / 6.0).collect()
    };
    let next = shifted(s, h, &comb(&k1x, &k2x, &k3x, &k4x), &comb(&a1, &a2, &a3, &a4));
    if !next.x.iter().chain(&next.v).all(|c| c.is_finite()) {
        return Err(GeomError::domain("rk4_step", "non-finite state"));
    }
    Ok(next)
}

/// Fixed-step integration. An evaluation failure truncates the trajectory
/// and records a [`GeomError::LeftDomain`]; failure at the first step is an error.
pub fn integrate(field: &dyn CurveField, start: &CurveState, step: f64, n_steps: usize) -> Result<Trajectory> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(GeomError::Invalid(format!("step must be positive, got {step}")));
    }
    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(start.clone());
    for i in 0..n_steps {
        let cur = &states[states.len() - 1];
        match rk4_step(field, cur, step) {
            Ok(mut next) => {
                next.param = start.param + (i + 1) as f64 * step;
                states.push(next);
            }
            Err(e) => {
                let err = GeomError::LeftDomain { param: cur.param, reason: e.to_string() };
                if i == 0 {
                    return Err(err);
                }
                return Ok(Trajectory { states, left_domain: Some(err) });
            }
        }
    }
    Ok(Trajectory { states, left_domain: None })
}

/// Integrates independent curves in parallel.
pub fn integrate_many(
    field: &dyn CurveField,
    starts: &[CurveState],
    step: f64,
    n_steps: usize,
) -> Vec<Result<Trajectory>> {
    starts.par_iter().map(|s| integrate(field, s, step, n_steps)).collect()
}

fn endpoint_distance(a: &CurveState, b: &CurveState) -> f64 {
    a.x.iter().zip(&b.x).chain(a.v.iter().zip(&b.v)).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Observed order of convergence from runs at `h`, `h/2` and `h/4` over the
/// same parameter interval: `log2(|y_h - y_{h/2}| / |y_{h/2} - y_{h/4}|)`.
pub fn convergence_order(field: &dyn CurveField, start: &CurveState, step: f64, n_steps: usize) -> Result<f64> {
    let run = |k: usize| -> Result<CurveState> {
        let t = integrate(field, start, step / k as f64, n_steps * k)?;
        match t.left_domain {
            Some(e) => Err(e),
            None => Ok(t.last().clone()),
        }
    };
    let (y1, y2, y4) = (run(1)?, run(2)?, run(4)?);
    let (e1, e2) = (endpoint_distance(&y1, &y2), endpoint_distance(&y2, &y4));
    if e2 == 0.0 {
        return Err(GeomError::Invalid("step differences vanish; order is undefined".into()));
    }
    Ok((e1 / e2).log2())
}

/// `g(C', C')` in frame components.
pub fn speed_squared(chart: &Chart, state: &CurveState) -> Result<f64> {
    let fr = chart.at(&state.x, 1)?;
    let u = frame_velocity(&fr, &state.v);
    Ok(u.iter().zip(fr.eta()).map(|(x, e)| e * x * x).sum())
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV `param,x0..,v0..` with 17 significant digits.
pub fn to_csv(t: &Trajectory) -> String {
    let n = t.states.first().map_or(0, |s| s.x.len());
    let mut out = String::from("param");
    (0..n).for_each(|i| write!(out, ",x{i}").unwrap());
    (0..n).for_each(|i| write!(out, ",v{i}").unwrap());
    out.push('\n');
    for s in &t.states {
        out.push_str(&fmt17(s.param));
        for c in s.x.iter().chain(&s.v) {
            out.push(',');
            out.push_str(&fmt17(*c));
        }
        out.push('\n');
    }
    out
}

/// CSV of an autoparallel run with the coordinate distance to a reference run
/// (typically the geodesic from the same start) in a final `deviation` column.
pub fn paired_csv(with: &Trajectory, without: &Trajectory) -> String {
    let n = with.states.first().map_or(0, |s| s.x.len());
    let mut out = String::from("param");
    (0..n).for_each(|i| write!(out, ",x{i}").unwrap());
    (0..n).for_each(|i| write!(out, ",v{i}").unwrap());
    out.push_str(",deviation\n");
    for (s, r) in with.states.iter().zip(&without.states) {
        let dev = s.x.iter().zip(&r.x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        out.push_str(&fmt17(s.param));
        for c in s.x.iter().chain(&s.v) {
            out.push(',');
            out.push_str(&fmt17(*c));
        }
        out.push(',');
        out.push_str(&fmt17(dev));
        out.push('\n');
    }
    out
}

/// Coefficients `(c4, c5)` of the Proca-type force written as
/// `1/(2n)[C'(A4 C') + C'^2 A5]` with `A4 = c4 T`, `A5 = c5 T^#`, using
/// `A1 = gamma T/(n k)`, `Q = gamma (1-n) T/(2 beta n)` and `A3 = (n-1) T/(2n)`.
pub fn printed_force_coefficients(n: usize, k: f64, beta: f64, gamma: f64) -> Result<(f64, f64)> {
    let nf = n as f64;
    let den = 2.0 * nf * k * beta;
    if den == 0.0 {
        return Err(GeomError::DegenerateDenominator("2 n k beta"));
    }
    let c4 = ((nf - 1.0) * k * beta + 8.0 * gamma * beta - 2.0 * gamma * k * (1.0 - nf)) / den;
    let c5 = (gamma * k * (1.0 - nf) - 4.0 * (1.0 + nf) * gamma * beta - k * beta * (nf - 1.0)) / den;
    Ok((c4, c5))
}

/// Outcome of the search for constants that remove the non-Riemannian force.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoForceAnalysis {
    pub n: usize,
    pub k: f64,
    pub beta: f64,
    pub gamma: f64,
    /// `(c4, c5)` at the returned constants; both vanish.
    pub force_coefficients: (f64, f64),
    /// The massless constraint polynomial at the returned constants.
    pub constraint_residual: f64,
    /// The massive constraint with `beta - beta0` in place of `beta`.
    pub massive_constraint_residual: f64,
    pub compatible: bool,
}

/// Solves `c4 = c5 = 0` for the non-trivial `(beta, gamma)` and evaluates the
/// Proca constraint there.
pub fn no_force_analysis(n: usize, k: f64) -> Result<NoForceAnalysis> {
    if n < 3 {
        return Err(GeomError::DimensionTooLow(n));
    }
    let nf = n as f64;
    // c4 = 0 gives beta = 2 gamma k (1-n) / ((n-1) k + 8 gamma); substituting
    // into c5 = 0 and dividing by gamma k (1-n) leaves -8 n gamma - (n-1) k = 0.
    let gamma = -k * (nf - 1.0) / (8.0 * nf);
    let beta = 2.0 * gamma * k * (1.0 - nf) / ((nf - 1.0) * k + 8.0 * gamma);
    let force_coefficients = printed_force_coefficients(n, k, beta, gamma)?;
    let constraint_residual = constraint(n, k, beta, gamma);
    let massive_constraint_residual = constraint(n, k, beta, gamma);
    let scale = 4.0 * nf * nf * (nf - 2.0) * (beta * k).abs();
    Ok(NoForceAnalysis {
        n,
        k,
        beta,
        gamma,
        force_coefficients,
        constraint_residual,
        massive_constraint_residual,
        compatible: constraint_residual.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_force_constants_in_four_dimensions() {
        let a = no_force_analysis(4, 1.0).unwrap();
        assert!((a.beta - 0.25).abs() < 1e-15);
        assert!((a.gamma + 3.0 / 32.0).abs() < 1e-15);
        assert!(a.force_coefficients.0.abs() < 1e-15 && a.force_coefficients.1.abs() < 1e-15);
        assert!(a.constraint_residual.abs() > 1e-3);
        assert!(!a.compatible);
    }

    #[test]
    fn csv_has_seventeen_significant_digits() {
        let s = CurveState::new(0.0, vec![1.0 / 3.0], vec![0.1]).unwrap();
        let csv = to_csv(&Trajectory { states: vec![s], left_domain: None });
        let row = csv.lines().nth(1).unwrap();
        let x: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(x, 1.0 / 3.0);
        assert_eq!(csv.lines().next().unwrap(), "param,x0,v0");
    }
}
