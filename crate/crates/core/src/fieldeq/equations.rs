//! Field-equation residuals on a chart.

use crate::cartan::conformal::ConformalModel;
use crate::cartan::proca::{ProcaModel, ProcaReduction};
use crate::error::{GeomError, Result};
use crate::expr::ScalarExpr;
use crate::exterior::{Chart, Form, FormField, FrameAt};
use crate::geometry::{einstein_forms, torsion_of_distortion, Geometry, PointGeometry};
use crate::jet::Jet;

use super::{
    stress_tensor, tau_distortion_square, tau_mass, tau_torsion_square, tau_torsion_trace, tau_weyl_torsion,
    traceless_distortion, Balance, ResidualReport,
};

/// `alpha d(f1 *dQ) + mass f2 *Q`, with `f1 = f2 = 1` when absent.
pub fn trace_balance(
    fr: &FrameAt<'_>,
    q: &Form<Jet>,
    alpha: f64,
    mass: f64,
    f1: Option<Jet>,
    f2: Option<Jet>,
) -> Balance {
    let eta = fr.eta();
    let n = fr.dim();
    let mut sdq = fr.d(q).hodge(eta);
    if let Some(f) = f1 {
        sdq = sdq.times(f);
    }
    let kin = fr.d(&sdq).scale(alpha);
    let mut sq = q.hodge(eta).scale(mass);
    if let Some(f) = f2 {
        sq = sq.times(f);
    }
    let mut b = Balance::new(n, n - 1, 1);
    b.add_one(&kin).add_one(&sq).widen(alpha.abs() * sdq.max_abs());
    b
}

/// Levi-Civita divergence `nabla^b T_ab` of a stress family, through `tau_a = T_ab *e^b`.
pub fn divergence(fr: &FrameAt<'_>, tau: &[Form<Jet>]) -> (Vec<Jet>, f64) {
    let eta = fr.eta();
    let n = fr.dim();
    let t = stress_tensor(eta, tau);
    let scale = t.iter().map(|x| x.max_abs()).fold(0.0, f64::max);
    // Omega^d_a(X_b)
    let om = |d: usize, a: usize, b: usize| fr.omega[d * n + a].components()[b];
    let div = (0..n)
        .map(|a| {
            let mut s = Jet::cst(0.0);
            for b in 0..n {
                let mut x = fr.frame_derivative(&t[a * n + b], b);
                for d in 0..n {
                    x -= om(d, a, b) * t[d * n + b];
                    x -= om(d, b, b) * t[a * n + d];
                }
                s += x * Jet::cst(eta[b]);
            }
            s
        })
        .collect();
    (div, scale)
}

/// `k G_lc` at a point, with the Levi-Civita curvature magnitude as scale.
pub fn einstein_term(pg: &PointGeometry<'_>, k: f64) -> (Vec<Form<Jet>>, f64) {
    let r = pg.lc_curvature();
    let scale = r.iter().map(|f| f.values().max_abs()).fold(0.0, f64::max) * k.abs();
    let g = einstein_forms(pg.eta(), &r).into_iter().map(|f| f.scale(k)).collect();
    (g, scale)
}

/// Non-Riemannian stresses of the reduced Proca model at a point.
pub fn proca_stresses<S: crate::jet::Scalar>(
    model: &ProcaModel,
    red: &ProcaReduction,
    eta: &[f64],
    q: &Form<S>,
) -> Vec<Vec<Form<S>>> {
    let n = eta.len();
    let lam = model.distortion(red, eta, q);
    let tor = torsion_of_distortion(n, &lam);
    let lh = traceless_distortion(&lam);
    vec![
        tau_distortion_square(eta, &lh).into_iter().map(|f| f.scale(model.k)).collect(),
        tau_mass(eta, model.beta, q),
        tau_torsion_trace(eta, model.gamma, &tor, &lam),
        tau_torsion_square(eta, model.epsilon, &tor, &lam),
        tau_weyl_torsion(eta, model.nu, &tor, q, &lam),
    ]
}

/// `k Delta G + tau[beta] + tau[gamma] + tau[eps] + tau[nu] - tau_mass(beta0)` on sampled points.
///
/// For a consistent model this vanishes identically: the non-Riemannian
/// stresses collapse to the Proca mass term with the declared `beta0`.
pub fn cancellation_residual(
    model: &ProcaModel,
    chart: &Chart,
    q: &FormField,
    points: &[Vec<f64>],
    seed: u64,
    tolerance: f64,
) -> Result<(ProcaReduction, ResidualReport)> {
    let red = model.reduce()?;
    let n = chart.dim();
    let rep = super::sample_residual("cancellation", points, seed, tolerance, |p| {
        let fr = chart.at(p, 1)?;
        let qv = q.at(&fr)?.values();
        let eta = fr.eta();
        let mut b = Balance::new(n, n - 1, n);
        for fam in proca_stresses(model, &red, eta, &qv) {
            b.add(&fam);
        }
        b.add(&tau_mass(eta, -model.beta0, &qv));
        Ok(b.finish())
    })?;
    Ok((red, rep))
}

/// `Y_a = (eta_ab box f - nabla_a nabla_b f) *e^b` for the Levi-Civita Hessian of `f`.
///
/// `f` must carry second derivatives.
pub fn hessian_forms(fr: &FrameAt<'_>, f: &Jet) -> Vec<Form<f64>> {
    let n = fr.dim();
    let eta = fr.eta();
    let fa: Vec<Jet> = (0..n).map(|a| fr.frame_derivative(f, a)).collect();
    let mut h = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            let mut x = fr.frame_derivative(&fa[a], b).val();
            for d in 0..n {
                x -= fr.omega[d * n + a].components()[b].val() * fa[d].val();
            }
            h[a * n + b] = x;
        }
    }
    let boxf: f64 = (0..n).map(|b| eta[b] * h[b * n + b]).sum();
    let stars: Vec<Form<f64>> = (0..n).map(|b| Form::<f64>::basis1(n, b).hodge(eta)).collect();
    (0..n)
        .map(|a| {
            let mut y = Form::zero(n, n - 1);
            for b in 0..n {
                let g = if a == b { eta[a] * boxf } else { 0.0 };
                y.axpy(g - h[a * n + b], &stars[b]);
            }
            y
        })
        .collect()
}

/// Reduction of the conformally coupled Einstein equation to a Levi-Civita system:
/// `k f (G - G_lc) + 2k Y[f] - tau_mass(beta' - beta, dpsi)` with `f = 1 + alpha psi^2`
/// and the realized `beta'`.
pub fn conformal_reduction_residual(
    model: &ConformalModel,
    chart: &Chart,
    psi: &ScalarExpr,
    q: &FormField,
    points: &[Vec<f64>],
    seed: u64,
    tolerance: f64,
) -> Result<ResidualReport> {
    model.validate()?;
    let geo = model.geometry(chart.clone(), psi.clone(), q.clone());
    let n = chart.dim();
    let k = model.k;
    super::sample_residual("conformal reduction", points, seed, tolerance, |p| {
        let pg = geo.at(p, 2)?;
        let pj = psi.jet(p, 2)?;
        let f = pj * pj * Jet::cst(model.alpha) + Jet::cst(1.0);
        let shift = model.beta_prime_realized(pj.val())? - model.beta;
        let g = pg.einstein_forms();
        let g0 = pg.lc_einstein_forms();
        let fk = k * f.val();
        let mut b = Balance::new(n, n - 1, n);
        b.add(&g.iter().map(|x| x.scale(fk)).collect::<Vec<_>>());
        b.add(&g0.iter().map(|x| x.scale(-fk)).collect::<Vec<_>>());
        b.add(&hessian_forms(&pg.frame, &f).iter().map(|x| x.scale(2.0 * k)).collect::<Vec<_>>());
        b.add(&tau_mass(pg.eta(), -shift, &pg.frame.d_scalar(&pj)));
        Ok(b.finish())
    })
}

/// `R - [R_lc + i_a i_c (D_lc lambda^{ca} + lambda^c_d ^ lambda^{da})]` on sampled points.
pub fn decomposition_residual(
    geo: &Geometry,
    points: &[Vec<f64>],
    seed: u64,
    tolerance: f64,
) -> Result<ResidualReport> {
    super::sample_residual("scalar curvature decomposition", points, seed, tolerance, |p| {
        let pg = geo.at(p, 2)?;
        let r = pg.scalar_curvature().val();
        let d = pg.scalar_curvature_decomposed().val();
        let scale = r.abs().max(d.abs()).max(pg.lc_scalar_curvature().val().abs());
        Ok(((r - d).abs(), scale))
    })
}

/// The Einstein reduction of a dilaton-coupled Proca model, `k tau(Delta R) + tau[beta - beta0] + ... = 0`.
///
/// The couplings `f1(psi), f2(psi)` of the kinetic and mass terms only enter
/// the trace of the Cartan equation, so the distortion and this residual are
/// those of the limiting model. The model must be of Proca type: its reduced
/// mass equals the declared `beta0`.
pub fn dilaton_isomorphism_residual(
    model: &ProcaModel,
    chart: &Chart,
    q: &FormField,
    points: &[Vec<f64>],
    seed: u64,
    tolerance: f64,
) -> Result<ResidualReport> {
    let red = model.reduce()?;
    let scale = model.beta.abs().max(model.beta0.abs()).max(red.mass.abs()).max(model.k.abs());
    if red.mass_mismatch.abs() > 1e-12 * scale {
        return Err(GeomError::NotProcaType(format!("reduced mass {} differs from beta0 {}", red.mass, model.beta0)));
    }
    let (_, mut rep) = cancellation_residual(model, chart, q, points, seed, tolerance)?;
    rep.equation = "dilaton isomorphism".into();
    Ok(rep)
}

/// `alpha d(f1 *dQ) + f2 beta0 *Q` on sampled points.
#[allow(clippy::too_many_arguments)]
pub fn dilaton_trace_residual(
    model: &ProcaModel,
    chart: &Chart,
    q: &FormField,
    f1: &ScalarExpr,
    f2: &ScalarExpr,
    points: &[Vec<f64>],
    seed: u64,
    tolerance: f64,
) -> Result<ResidualReport> {
    super::sample_residual("dilaton trace equation", points, seed, tolerance, |p| {
        let fr = chart.at(p, 2)?;
        let b = trace_balance(&fr, &q.at(&fr)?, model.alpha, model.beta0, Some(f1.jet(p, 2)?), Some(f2.jet(p, 2)?));
        Ok(b.finish())
    })
}
