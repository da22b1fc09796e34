//! Stress forms and field-equation residuals.
//!
//! Every stress family is an `n`-vector of `(n-1)`-forms `tau_c` with a lower
//! frame index, so that a coframe variation reads `delta e^c ^ tau_c`. The
//! pointwise builders are generic over [`Scalar`] and work on frame-basis
//! forms; residual sweeps over sample points produce [`ResidualReport`]s.

use serde::{Deserialize, Serialize};

mod equations;
mod modified;
mod residual;

pub use equations::{
    cancellation_residual, conformal_reduction_residual, decomposition_residual, dilaton_isomorphism_residual,
    dilaton_trace_residual, divergence, einstein_term, hessian_forms, proca_stresses, trace_balance,
};
pub use modified::{
    axial_torsion, axion_printed_distortion_residual, axion_reports, modified_maxwell_reports, qqff_reports,
    AxionModel, ModifiedSystem, QqffModel,
};
pub use residual::{sample_residual, Balance, ResidualReport, Tally};

use crate::cartan::star_star_sign;
use crate::error::{GeomError, Result};
use crate::exterior::Form;
use crate::geometry::{star_basis, torsion_trace};
use crate::jet::Scalar;

fn parity(p: usize) -> f64 {
    if p.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Coframe-variation stress of `alpha ^ *beta` for coframe-independent
/// p-forms: `tau_c = -[i_c beta ^ *alpha - (-1)^p alpha ^ i_c *beta]`.
pub fn pair_stress<S: Scalar>(eta: &[f64], alpha: &Form<S>, beta: &Form<S>) -> Vec<Form<S>> {
    let n = eta.len();
    let p = alpha.degree();
    let sa = alpha.hodge(eta);
    let sb = beta.hodge(eta);
    (0..n)
        .map(|c| {
            let mut t = alpha.wedge(&sb.interior(c)).scale(parity(p));
            if p > 0 {
                t.sub_assign(&beta.interior(c).wedge(&sa));
            }
            t
        })
        .collect()
}

/// `coeff/2 (F ^ i_c *F - i_c F ^ *F)`: stress of `coeff/2 F ^ *F` for a 2-form field strength.
pub fn tau_kinetic<S: Scalar>(eta: &[f64], coeff: f64, f: &Form<S>) -> Vec<Form<S>> {
    let n = eta.len();
    let sf = f.hodge(eta);
    (0..n)
        .map(|c| {
            let mut t = f.wedge(&sf.interior(c));
            t.sub_assign(&f.interior(c).wedge(&sf));
            t.scale(0.5 * coeff)
        })
        .collect()
}

/// `-coeff/2 (A ^ i_c *A + i_c A ^ *A)`: stress of `coeff/2 A ^ *A` for a 1-form.
pub fn tau_mass<S: Scalar>(eta: &[f64], coeff: f64, a: &Form<S>) -> Vec<Form<S>> {
    let n = eta.len();
    let sa = a.hodge(eta);
    (0..n)
        .map(|c| {
            let mut t = a.wedge(&sa.interior(c));
            t.add_assign(&a.interior(c).wedge(&sa));
            t.scale(-0.5 * coeff)
        })
        .collect()
}

/// Stress of `gamma/2 T ^ *T` with `T = i_a T^a`:
/// `gamma [i_k(T^k ^ i_c *T) + lambda^k_c ^ i_k *T - 1/2 (T ^ i_c *T + i_c T ^ *T)]`.
pub fn tau_torsion_trace<S: Scalar>(eta: &[f64], gamma: f64, torsion: &[Form<S>], lambda: &[Form<S>]) -> Vec<Form<S>> {
    let n = eta.len();
    let t = torsion_trace(torsion);
    let st = t.hodge(eta);
    let mut out = tau_mass(eta, 1.0, &t);
    for (c, oc) in out.iter_mut().enumerate() {
        let icst = st.interior(c);
        for k in 0..n {
            oc.add_assign(&torsion[k].wedge(&icst).interior(k));
            oc.add_assign(&lambda[k * n + c].wedge(&st.interior(k)));
        }
        *oc = oc.scale(gamma);
    }
    out
}

/// Stress of `eps/2 T^c ^ *T_c`:
/// `eps (-lambda^b_a ^ *T_b + 1/2 (T_b ^ i_a *T^b - i_a T_b ^ *T^b))`.
pub fn tau_torsion_square<S: Scalar>(eta: &[f64], eps: f64, torsion: &[Form<S>], lambda: &[Form<S>]) -> Vec<Form<S>> {
    let n = eta.len();
    let stars: Vec<Form<S>> = torsion.iter().map(|t| t.hodge(eta)).collect();
    (0..n)
        .map(|a| {
            let mut x = Form::zero(n, n - 1);
            for b in 0..n {
                x.axpy(-eta[b], &lambda[b * n + a].wedge(&stars[b]));
                x.axpy(0.5 * eta[b], &torsion[b].wedge(&stars[b].interior(a)));
                x.axpy(-0.5 * eta[b], &torsion[b].interior(a).wedge(&stars[b]));
            }
            x.scale(eps)
        })
        .collect()
}

/// Stress of `nu/2 Q ^ *T`:
/// `nu/2 [i_k(T^k ^ i_c *Q) + lambda^k_c ^ i_k *Q - i_c T ^ *Q - Q ^ i_c *T]`.
pub fn tau_weyl_torsion<S: Scalar>(
    eta: &[f64],
    nu: f64,
    torsion: &[Form<S>],
    q: &Form<S>,
    lambda: &[Form<S>],
) -> Vec<Form<S>> {
    let n = eta.len();
    let t = torsion_trace(torsion);
    let sq = q.hodge(eta);
    let st = t.hodge(eta);
    (0..n)
        .map(|c| {
            let icsq = sq.interior(c);
            let mut x = t.interior(c).wedge(&sq).scale(-1.0);
            x.sub_assign(&q.wedge(&st.interior(c)));
            for k in 0..n {
                x.add_assign(&torsion[k].wedge(&icsq).interior(k));
                x.add_assign(&lambda[k * n + c].wedge(&sq.interior(k)));
            }
            x.scale(0.5 * nu)
        })
        .collect()
}

/// Traceless part `lambda^a_b - (1/n) delta^a_b lambda^c_c`.
pub fn traceless_distortion<S: Scalar>(lambda: &[Form<S>]) -> Vec<Form<S>> {
    let n = (lambda.len() as f64).sqrt() as usize;
    let mut tr = Form::zero(n, 1);
    for a in 0..n {
        tr.add_assign(&lambda[a * n + a]);
    }
    let mut out = lambda.to_vec();
    for a in 0..n {
        out[a * n + a].axpy(-1.0 / n as f64, &tr);
    }
    out
}

/// `lambda^a_c ^ lambda^c_b ^ *(e_a ^ e^b)`, the quadratic distortion part of `R *1`.
pub fn distortion_square_density<S: Scalar>(eta: &[f64], lambda: &[Form<S>]) -> Form<S> {
    let n = eta.len();
    let mut out = Form::zero(n, n);
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let mut ll = Form::zero(n, 2);
            for c in 0..n {
                ll.add_assign(&lambda[a * n + c].wedge(&lambda[c * n + b]));
            }
            out.add_assign(&ll.wedge(&star_basis(eta, &[a, b], &[true, false])));
        }
    }
    out
}

/// Stress of the quadratic distortion term, holding `lambda` fixed:
/// `lambda^a_c ^ lambda^c_b ^ *(e_a ^ e^b ^ e_d)`.
pub fn tau_distortion_square<S: Scalar>(eta: &[f64], lambda: &[Form<S>]) -> Vec<Form<S>> {
    let n = eta.len();
    let mut out = vec![Form::zero(n, n - 1); n];
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let mut ll = Form::zero(n, 2);
            for c in 0..n {
                ll.add_assign(&lambda[a * n + c].wedge(&lambda[c * n + b]));
            }
            if ll.max_abs() == 0.0 {
                continue;
            }
            for (d, od) in out.iter_mut().enumerate() {
                if d == a || d == b {
                    continue;
                }
                od.add_assign(&ll.wedge(&star_basis(eta, &[a, b, d], &[true, false, true])));
            }
        }
    }
    out
}

/// Electromagnetic stress `1/2 [i_a F ^ *F - i_a *F ^ F]`.
pub fn tau_maxwell<S: Scalar>(eta: &[f64], f: &Form<S>) -> Vec<Form<S>> {
    let n = eta.len();
    let sf = f.hodge(eta);
    (0..n)
        .map(|a| {
            let mut t = f.interior(a).wedge(&sf);
            t.sub_assign(&sf.interior(a).wedge(f));
            t.scale(0.5)
        })
        .collect()
}

/// Stress tensor components `T_ab` defined by `tau_a = T_ab *e^b`, indexed `[a*n+b]`.
///
/// This equals `(*tau_a)(X_b)` whenever `**` is the identity on 1-forms.
pub fn stress_tensor<S: Scalar>(eta: &[f64], tau: &[Form<S>]) -> Vec<S> {
    let n = eta.len();
    let sgn = star_star_sign(eta, 1);
    let mut out = Vec::with_capacity(n * n);
    for t in tau {
        let s = t.hodge(eta);
        out.extend(s.components().iter().map(|x| x.scale(sgn)));
    }
    out
}

/// `-[F_ac F^c_b + 1/4 g_ab F^cd F_cd]` from the frame components of a 2-form.
pub fn maxwell_tensor_components<S: Scalar>(eta: &[f64], f: &Form<S>) -> Vec<S> {
    let n = eta.len();
    let fab = |a: usize, b: usize| f.comp(&[a, b]);
    let mut ff = S::constant(0.0);
    for c in 0..n {
        for d in 0..n {
            if c != d {
                ff += (fab(c, d) * fab(c, d)).scale(eta[c] * eta[d]);
            }
        }
    }
    let mut out = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            // F^c_b = eta^cc F_cb
            let mut s = S::constant(0.0);
            for c in 0..n {
                s += (fab(a, c) * fab(c, b)).scale(eta[c]);
            }
            if a == b {
                s += ff.scale(0.25 * eta[a]);
            }
            out.push(-s);
        }
    }
    out
}

/// `sum_c e^c ^ tau_c`.
pub fn wedge_trace<S: Scalar>(tau: &[Form<S>]) -> Form<S> {
    let n = tau.len();
    let mut out = Form::zero(n, n);
    for (c, t) in tau.iter().enumerate() {
        out.add_assign(&Form::basis1(n, c).wedge(t));
    }
    out
}

/// Adds `k * y` to each entry of `x`.
pub fn axpy_all<S: Scalar>(x: &mut [Form<S>], k: f64, y: &[Form<S>]) {
    for (a, b) in x.iter_mut().zip(y) {
        a.axpy(k, b);
    }
}

/// Largest component magnitude over a family of forms.
pub fn max_abs_all<S: Scalar>(x: &[Form<S>]) -> f64 {
    x.iter().map(|f| f.max_abs()).fold(0.0, f64::max)
}

/// Labels of the stress families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StressLabel {
    /// `alpha/2 dQ ^ *dQ`.
    Alpha,
    /// `beta/2 Q ^ *Q`.
    Beta,
    /// `beta0/2 Q ^ *Q`.
    Beta0,
    /// `gamma/2 T ^ *T`.
    Gamma,
    /// `eps/2 T^c ^ *T_c`.
    Epsilon,
    /// `nu/2 Q ^ *T`.
    Nu,
    /// `delta/2 dpsi ^ *dpsi`.
    Delta,
    /// Quadratic distortion part of the Einstein-Hilbert term (times `k`).
    DistortionSquare,
    /// `1/2 [i_a F ^ *F - i_a *F ^ F]`.
    Maxwell,
}

/// Coupling constants for [`stress_forms`]; absent couplings are zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    #[serde(default)]
    pub k: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub beta0: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub nu: f64,
    #[serde(default)]
    pub delta: f64,
}

/// Field values at a point in the frame basis.
#[derive(Debug, Clone, Default)]
pub struct FieldValues<S: Scalar> {
    pub q: Option<Form<S>>,
    pub dq: Option<Form<S>>,
    pub torsion: Option<Vec<Form<S>>>,
    pub lambda: Option<Vec<Form<S>>>,
    pub dpsi: Option<Form<S>>,
    pub f: Option<Form<S>>,
}

fn need<'a, T>(x: &'a Option<T>, name: &str) -> Result<&'a T> {
    x.as_ref().ok_or_else(|| GeomError::MissingField(name.to_string()))
}

/// Evaluates the requested stress families.
pub fn stress_forms<S: Scalar>(
    eta: &[f64],
    c: &Couplings,
    fields: &FieldValues<S>,
    labels: &[StressLabel],
) -> Result<Vec<(StressLabel, Vec<Form<S>>)>> {
    let mut out = Vec::with_capacity(labels.len());
    for &l in labels {
        let tau = match l {
            StressLabel::Alpha => tau_kinetic(eta, c.alpha, need(&fields.dq, "dQ")?),
            StressLabel::Beta => tau_mass(eta, c.beta, need(&fields.q, "Q")?),
            StressLabel::Beta0 => tau_mass(eta, c.beta0, need(&fields.q, "Q")?),
            StressLabel::Gamma => {
                tau_torsion_trace(eta, c.gamma, need(&fields.torsion, "T^a")?, need(&fields.lambda, "lambda")?)
            }
            StressLabel::Epsilon => {
                tau_torsion_square(eta, c.epsilon, need(&fields.torsion, "T^a")?, need(&fields.lambda, "lambda")?)
            }
            StressLabel::Nu => tau_weyl_torsion(
                eta,
                c.nu,
                need(&fields.torsion, "T^a")?,
                need(&fields.q, "Q")?,
                need(&fields.lambda, "lambda")?,
            ),
            StressLabel::Delta => tau_mass(eta, c.delta, need(&fields.dpsi, "dpsi")?),
            StressLabel::DistortionSquare => {
                let lh = traceless_distortion(need(&fields.lambda, "lambda")?);
                tau_distortion_square(eta, &lh).into_iter().map(|f| f.scale(c.k)).collect()
            }
            StressLabel::Maxwell => tau_maxwell(eta, need(&fields.f, "F")?),
        };
        out.push((l, tau));
    }
    Ok(out)
}
