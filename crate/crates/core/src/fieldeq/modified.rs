//! Modified constitutive laws from couplings of torsion and non-metricity to
//! the Maxwell field, in four dimensions.
//!
//! Two systems are covered: the torsion-axion coupling
//! `-beta *(T^a ^ e_a) ^ F ^ A` and the Weyl coupling
//! `beta/2 *(Q ^ *Q) F ^ F`.

use serde::{Deserialize, Serialize};

use crate::cartan::{closed_form, SourceTensor};
use crate::error::{GeomError, Result};
use crate::exterior::{Chart, Form, FormField};
use crate::geometry::{
    einstein_forms, nonmetricity_of_distortion, star_basis, torsion_of_distortion, torsion_trace,
    traceless_nonmetricity, traceless_torsion, Distortion, Geometry,
};
use crate::jet::Scalar;

use super::{sample_residual, Balance, ResidualReport};

/// Couplings of `k R *1 + alpha/2 F ^ *F - beta *(T^a ^ e_a) ^ F ^ A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxionModel {
    pub k: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Couplings of `k R *1 + alpha/2 F ^ *F + gamma/2 dQ ^ *dQ + beta/2 *(Q ^ *Q) F ^ F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QqffModel {
    pub k: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Which modified system to check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "system", rename_all = "snake_case")]
pub enum ModifiedSystem {
    Axion(AxionModel),
    Qqff(QqffModel),
}

fn require_four(n: usize) -> Result<()> {
    if n == 4 {
        Ok(())
    } else {
        Err(GeomError::DimensionNotFour(n))
    }
}

impl AxionModel {
    /// `gamma = beta / k`.
    pub fn gamma(&self) -> f64 {
        self.beta / self.k
    }

    /// Cartan source `F^a_b = gamma (e^a ^ e_b) ^ *(F ^ A)`.
    pub fn source<S: Scalar>(&self, eta: &[f64], fa: &Form<S>) -> Vec<Form<S>> {
        let n = eta.len();
        let s = fa.hodge(eta);
        let g = self.gamma();
        let mut out = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let eb = Form::basis1(n, b).scale(eta[b]);
                out.push(Form::basis1(n, a).wedge(&eb).wedge(&s).scale(g));
            }
        }
        out
    }

    /// Distortion solving the Cartan equation for the Weyl form `q`.
    pub fn solve<S: Scalar>(&self, eta: &[f64], fa: &Form<S>, q: &Form<S>) -> Result<Vec<Form<S>>> {
        require_four(eta.len())?;
        let src = SourceTensor::from_forms(eta, &self.source(eta, fa));
        Ok(closed_form(eta, &src).distortion(eta, q))
    }

    /// `lambda^a_b = 1/2 gamma i^a i_b (F ^ A) - delta^a_b Q / 8`.
    pub fn distortion_closed<S: Scalar>(&self, eta: &[f64], fa: &Form<S>, q: &Form<S>) -> Vec<Form<S>> {
        distortion_with(eta, 0.5 * self.gamma(), fa, q)
    }

    /// The printed form `lambda^a_b = 3/2 i^a i_b (F ^ A) - delta^a_b Q / 8`. Its
    /// torsion is `3 i^a(F ^ A)`, not `gamma i^a(F ^ A)`.
    pub fn distortion_printed<S: Scalar>(&self, eta: &[f64], fa: &Form<S>, q: &Form<S>) -> Vec<Form<S>> {
        distortion_with(eta, 1.5, fa, q)
    }

    /// `T^a = gamma i^a(F ^ A) + e^a ^ T / 3` with `T = 3Q/8`.
    pub fn torsion_closed<S: Scalar>(&self, eta: &[f64], fa: &Form<S>, q: &Form<S>) -> Vec<Form<S>> {
        let n = eta.len();
        let t = q.scale(3.0 / 8.0);
        (0..n)
            .map(|a| {
                let mut x = fa.interior(a).scale(self.gamma() * eta[a]);
                x.axpy(1.0 / 3.0, &Form::basis1(n, a).wedge(&t));
                x
            })
            .collect()
    }
}

fn distortion_with<S: Scalar>(eta: &[f64], c: f64, fa: &Form<S>, q: &Form<S>) -> Vec<Form<S>> {
    let n = eta.len();
    let mut out = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let mut l = fa.interior(b).interior(a).scale(c * eta[a]);
            if a == b {
                l.axpy(-0.125, q);
            }
            out.push(l);
        }
    }
    out
}

/// `*(T^a ^ e_a)`.
pub fn axial_torsion<S: Scalar>(eta: &[f64], torsion: &[Form<S>]) -> Form<S> {
    let n = eta.len();
    let mut x = Form::zero(n, 3);
    for (a, t) in torsion.iter().enumerate() {
        x.axpy(eta[a], &t.wedge(&Form::basis1(n, a)));
    }
    x.hodge(eta)
}

fn max_diff<S: Scalar>(x: &[Form<S>], y: &[Form<S>]) -> (f64, f64) {
    let mut b = Balance::new(x[0].dim(), x[0].degree(), x.len());
    b.add(x);
    b.add(&y.iter().map(|f| f.scale(-1.0)).collect::<Vec<_>>());
    b.finish()
}

/// `(eta, F ^ A, Q, F, lambda)` at a point.
type AxionPoint = (Vec<f64>, Form<f64>, Form<f64>, Form<f64>, Vec<Form<f64>>);

/// Checks of the axion system at sampled points for potential `a` and Weyl form `q`.
pub fn axion_reports(
    model: &AxionModel,
    chart: &Chart,
    a: &FormField,
    q: &FormField,
    points: &[Vec<f64>],
    seed: u64,
    tol: f64,
) -> Result<Vec<ResidualReport>> {
    require_four(chart.dim())?;
    let f = a.d()?;
    let g = model.gamma();
    let mut out = Vec::new();
    let at = |p: &[f64]| -> Result<AxionPoint> {
        let fr = chart.at(p, 1)?;
        let eta = fr.eta().to_vec();
        let fa = f.at(&fr)?.wedge(&a.at(&fr)?).values();
        let qv = q.at(&fr)?.values();
        let fv = f.at(&fr)?.values();
        let lam = model.solve(&eta, &fa, &qv)?;
        Ok((eta, fa, qv, fv, lam))
    };
    out.push(sample_residual("axion: traceless non-metricity vanishes", points, seed, tol, |p| {
        let (eta, fa, _, _, lam) = at(p)?;
        let qh = traceless_nonmetricity(&eta, &nonmetricity_of_distortion(&eta, &lam));
        let r = qh.iter().map(|x| x.max_abs()).fold(0.0, f64::max);
        Ok((r, lam.iter().map(|x| x.max_abs()).fold(fa.max_abs(), f64::max)))
    })?);
    out.push(sample_residual("axion: T = 3Q/8", points, seed, tol, |p| {
        let (_, _, qv, _, lam) = at(p)?;
        let t = torsion_trace(&torsion_of_distortion(4, &lam));
        let mut b = Balance::new(4, 1, 1);
        b.add_one(&t).add_one(&qv.scale(-3.0 / 8.0));
        Ok(b.finish())
    })?);
    out.push(sample_residual("axion: traceless torsion = gamma i_c(F ^ A)", points, seed, tol, |p| {
        let (eta, fa, _, _, lam) = at(p)?;
        let th = traceless_torsion(&torsion_of_distortion(4, &lam));
        let want: Vec<Form<f64>> = (0..4).map(|c| fa.interior(c).scale(g * eta[c])).collect();
        Ok(max_diff(&th, &want))
    })?);
    out.push(sample_residual("axion: torsion closed form", points, seed, tol, |p| {
        let (eta, fa, qv, _, lam) = at(p)?;
        Ok(max_diff(&torsion_of_distortion(4, &lam), &model.torsion_closed(&eta, &fa, &qv)))
    })?);
    out.push(sample_residual("axion: *(T^a ^ e_a) = 3 gamma *(F ^ A)", points, seed, tol, |p| {
        let (eta, fa, _, _, lam) = at(p)?;
        let ax = axial_torsion(&eta, &torsion_of_distortion(4, &lam));
        let mut b = Balance::new(4, 1, 1);
        b.add_one(&ax).add_one(&fa.hodge(&eta).scale(-3.0 * g));
        Ok(b.finish())
    })?);
    out.push(sample_residual("axion: distortion closed form", points, seed, tol, |p| {
        let (eta, fa, qv, _, lam) = at(p)?;
        Ok(max_diff(&lam, &model.distortion_closed(&eta, &fa, &qv)))
    })?);
    out.push(sample_residual("axion: quadratic Einstein contribution", points, seed, tol, |p| {
        let (eta, fa, _, _, lam) = at(p)?;
        let zero = Form::zero(4, 1);
        let lh = model.distortion_closed(&eta, &fa, &zero);
        let sq = |l: &[Form<f64>]| {
            let r: Vec<Form<f64>> = (0..16)
                .map(|k| {
                    let (a, b) = (k / 4, k % 4);
                    let mut x = Form::zero(4, 2);
                    for d in 0..4 {
                        x.add_assign(&l[a * 4 + d].wedge(&l[d * 4 + b]));
                    }
                    x
                })
                .collect();
            einstein_forms(&eta, &r)
        };
        let mut hat = lam.clone();
        let w = crate::geometry::weyl_form(&eta, &nonmetricity_of_distortion(&eta, &lam));
        for a in 0..4 {
            hat[a * 4 + a].axpy(0.125, &w);
        }
        // explicit 1/4 gamma^2 i^a i_d(F^A) ^ i^d i_b(F^A) ^ *(e_a ^ e^b ^ e_c)
        let mut explicit = vec![Form::zero(4, 3); 4];
        for a in 0..4 {
            for b in 0..4 {
                let mut x = Form::zero(4, 2);
                for d in 0..4 {
                    let l = fa.interior(d).interior(a).scale(eta[a]);
                    let r = fa.interior(b).interior(d).scale(eta[d]);
                    x.add_assign(&l.wedge(&r));
                }
                for (c, e) in explicit.iter_mut().enumerate() {
                    if c == a || c == b || a == b {
                        continue;
                    }
                    let s: Form<f64> = star_basis(&eta, &[a, b, c], &[true, false, true]);
                    e.axpy(0.25 * g * g, &x.wedge(&s));
                }
            }
        }
        let (r1, s1) = max_diff(&sq(&hat), &explicit);
        let (r2, s2) = max_diff(&sq(&lh), &explicit);
        Ok((r1.max(r2), s1.max(s2)))
    })?);
    out.push(sample_residual(
        "axion: alpha d*F + beta *(T^a ^ e_a) ^ F against alpha d*F + 3 beta gamma *(F ^ A) ^ F",
        points,
        seed,
        tol,
        |p| {
            let fr = chart.at(p, 2)?;
            let eta = fr.eta().to_vec();
            let fj = f.at(&fr)?;
            let kin = fr.d(&fj.hodge(&eta)).scale(model.alpha);
            let fa = fj.wedge(&a.at(&fr)?).values();
            let fv = fj.values();
            let lam = model.solve(&eta, &fa, &q.at(&fr)?.values())?;
            let ax = axial_torsion(&eta, &torsion_of_distortion(4, &lam));
            let lhs = kin.values();
            let mut from_torsion = lhs.clone();
            from_torsion.axpy(model.beta, &ax.wedge(&fv));
            let mut printed = lhs;
            printed.axpy(3.0 * model.beta * g, &fa.hodge(&eta).wedge(&fv));
            let mut b = Balance::new(4, 3, 1);
            b.add_one(&from_torsion).add_one(&printed.scale(-1.0));
            b.widen(kin.max_abs()).widen((model.beta * ax.wedge(&fv).max_abs()).abs());
            Ok(b.finish())
        },
    )?);
    Ok(out)
}

/// Distance between the solved distortion and the printed `3/2 i^a i_b (F ^ A)` form.
pub fn axion_printed_distortion_residual(
    model: &AxionModel,
    chart: &Chart,
    a: &FormField,
    q: &FormField,
    points: &[Vec<f64>],
    seed: u64,
    tol: f64,
) -> Result<ResidualReport> {
    require_four(chart.dim())?;
    let f = a.d()?;
    sample_residual("axion: printed distortion 3/2 i^a i_b(F ^ A)", points, seed, tol, |p| {
        let fr = chart.at(p, 1)?;
        let eta = fr.eta().to_vec();
        let fa = f.at(&fr)?.wedge(&a.at(&fr)?).values();
        let qv = q.at(&fr)?.values();
        let lam = model.solve(&eta, &fa, &qv)?;
        Ok(max_diff(&lam, &model.distortion_printed(&eta, &fa, &qv)))
    })
}

/// Checks of the `*(Q ^ *Q) F ^ F` system: the traceless Cartan equation is
/// homogeneous, so `lambda_ab = -g_ab Q / 8` and the Einstein forms are Levi-Civita.
pub fn qqff_reports(
    model: &QqffModel,
    chart: &Chart,
    q: &FormField,
    points: &[Vec<f64>],
    seed: u64,
    tol: f64,
) -> Result<Vec<ResidualReport>> {
    require_four(chart.dim())?;
    if model.k == 0.0 {
        return Err(GeomError::DegenerateDenominator("k"));
    }
    let mut out = Vec::new();
    out.push(sample_residual("qqff: lambda_ab = -g_ab Q/8", points, seed, tol, |p| {
        let fr = chart.at(p, 1)?;
        let eta = fr.eta().to_vec();
        let qv = q.at(&fr)?.values();
        let zero = SourceTensor { n: 4, f: vec![0.0; 64] };
        let lam = closed_form(&eta, &zero).distortion(&eta, &qv);
        let want: Vec<Form<f64>> =
            (0..16).map(|k| if k / 4 == k % 4 { qv.scale(-0.125) } else { Form::zero(4, 1) }).collect();
        let (r, s) = max_diff(&lam, &want);
        Ok((r, s.max(qv.max_abs())))
    })?);
    let qd = q.clone();
    let geo = Geometry {
        chart: chart.clone(),
        distortion: Distortion::recipe(move |fr| {
            let qv = qd.at(fr)?;
            Ok((0..16).map(|k| if k / 4 == k % 4 { qv.scale(-0.125) } else { Form::zero(4, 1) }).collect())
        }),
    };
    out.push(sample_residual("qqff: G = G_lc", points, seed, tol, |p| {
        let pg = geo.at(p, 2)?;
        let g = pg.einstein_forms();
        let g0 = pg.lc_einstein_forms();
        let scale = pg.curvature().iter().map(|f| f.values().max_abs()).fold(0.0, f64::max);
        let (r, s) = max_diff(&g, &g0);
        Ok((r, s.max(scale)))
    })?);
    Ok(out)
}

/// Runs the checks of either modified system.
pub fn modified_maxwell_reports(
    system: &ModifiedSystem,
    chart: &Chart,
    a: &FormField,
    q: &FormField,
    points: &[Vec<f64>],
    seed: u64,
    tol: f64,
) -> Result<Vec<ResidualReport>> {
    match system {
        ModifiedSystem::Axion(m) => axion_reports(m, chart, a, q, points, seed, tol),
        ModifiedSystem::Qqff(m) => qqff_reports(m, chart, q, points, seed, tol),
    }
}
