//! Reduction of the quadratic torsion and Weyl-form action to Proca form.
//!
//! The couplings are `k R + alpha/2 dQ^*dQ + beta/2 Q^*Q + gamma/2 T^*T
//! + eps/2 T^c^*T_c + nu/2 Q^*T`. The Cartan equation forces `hat T = 0`,
//! `hat Q = 0` and `T = ratio * Q`; the remaining Weyl-form equation is a
//! Proca equation with mass coupling `beta_eff + gamma_eff (n-1) ratio / (2n)`.

use serde::{Deserialize, Serialize};

use super::SolutionStatus;
use crate::error::{GeomError, Result};
use crate::exterior::Form;
use crate::jet::Scalar;

const DEGENERATE_TOL: f64 = 1e-12;

/// Coupling constants of the Proca-type model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcaModel {
    pub n: usize,
    pub k: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub nu: f64,
    /// Declared mass coupling of the reduced Proca equation.
    #[serde(default)]
    pub beta0: f64,
}

/// Which coefficient to use for the third 1-form in the autoparallel force.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum A3Choice {
    /// `A3 = A2 + 4 A1 / (n-2)`, which makes the force agree with the distortion.
    #[default]
    Consistent,
    /// `A3 = 2n/(n-1) T`.
    TwoNOverNMinusOne,
    /// `A3 = (n-1)/(2n) T`.
    NMinusOneOverTwoN,
}

/// Outcome of [`ProcaModel::reduce`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProcaReduction {
    pub status: SolutionStatus,
    /// `gamma - eps/(1-n)`.
    pub gamma_prime: f64,
    pub gamma_eff: f64,
    pub beta_eff: f64,
    /// `T = torsion_ratio * Q`.
    pub torsion_ratio: f64,
    /// Mass coupling of the reduced Proca equation.
    pub mass: f64,
    /// `mass - beta0`; zero when the declared `beta0` is consistent.
    pub mass_mismatch: f64,
    /// `A1 = a1_ratio * Q`.
    pub a1_ratio: f64,
}

/// The constraint polynomial `4n^2(n-2) beta k + (n-1)^2(n-2) gamma k + 8(1-n) gamma beta`.
pub fn constraint(n: usize, k: f64, beta: f64, gamma: f64) -> f64 {
    let nf = n as f64;
    4.0 * nf * nf * (nf - 2.0) * beta * k
        + (nf - 1.0).powi(2) * (nf - 2.0) * gamma * k
        + 8.0 * (1.0 - nf) * gamma * beta
}

/// The `beta` making the reduced mass vanish for the given `gamma`.
pub fn tuned_beta(n: usize, k: f64, gamma: f64) -> Result<f64> {
    let nf = n as f64;
    let den = 4.0 * nf * nf * (nf - 2.0) * k - 8.0 * (nf - 1.0) * gamma;
    if den.abs() <= DEGENERATE_TOL * (k.abs() + gamma.abs()).max(1.0) {
        return Err(GeomError::DegenerateDenominator("4n^2(n-2)k - 8(n-1)gamma"));
    }
    Ok(-(nf - 1.0).powi(2) * (nf - 2.0) * gamma * k / den)
}

impl ProcaModel {
    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(GeomError::DimensionTooLow(self.n));
        }
        let vals = [self.k, self.alpha, self.beta, self.gamma, self.epsilon, self.nu, self.beta0];
        if vals.iter().any(|x| !x.is_finite()) {
            return Err(GeomError::Invalid("non-finite coupling".into()));
        }
        if self.k == 0.0 {
            return Err(GeomError::DegenerateDenominator("k"));
        }
        Ok(())
    }

    pub fn gamma_prime(&self) -> f64 {
        self.gamma - self.epsilon / (1.0 - self.n as f64)
    }

    /// `2(n-1) / (k n^2 (n-2))`.
    fn s(&self) -> f64 {
        let nf = self.n as f64;
        2.0 * (nf - 1.0) / (self.k * nf * nf * (nf - 2.0))
    }

    pub fn reduce(&self) -> Result<ProcaReduction> {
        self.validate()?;
        let nf = self.n as f64;
        let c = (nf - 1.0) / (2.0 * nf);
        let s = self.s();
        let gp = self.gamma_prime();
        let den = 1.0 - s * gp;
        if den.abs() <= DEGENERATE_TOL {
            return Err(GeomError::DegenerateDenominator("1 - 2(n-1)gamma'/(k n^2 (n-2))"));
        }
        let ratio = (c + 0.5 * s * self.nu) / den;
        let (gamma_eff, beta_eff) = if self.nu == 0.0 {
            (gp, self.beta)
        } else {
            if ratio.abs() <= DEGENERATE_TOL {
                return Err(GeomError::ZeroLambda);
            }
            (gp + self.nu / (2.0 * ratio), self.beta + 0.5 * self.nu * ratio)
        };
        let mass = beta_eff + gamma_eff * c * ratio;
        let status = if (self.epsilon - self.k).abs() <= DEGENERATE_TOL * self.k.abs().max(1.0) {
            SolutionStatus::Underdetermined
        } else {
            SolutionStatus::Unique
        };
        Ok(ProcaReduction {
            status,
            gamma_prime: gp,
            gamma_eff,
            beta_eff,
            torsion_ratio: ratio,
            mass,
            mass_mismatch: mass - self.beta0,
            a1_ratio: gamma_eff * ratio / (nf * self.k),
        })
    }

    /// The mass coupling for `eps = nu = 0`:
    /// `beta + gamma k (n-1)^2 (n-2) / (4 (k n^2 (n-2) - 2 gamma (n-1)))`.
    pub fn beta0_closed_form(n: usize, k: f64, beta: f64, gamma: f64) -> Result<f64> {
        let nf = n as f64;
        let den = 4.0 * (k * nf * nf * (nf - 2.0) - 2.0 * gamma * (nf - 1.0));
        if den.abs() <= DEGENERATE_TOL {
            return Err(GeomError::DegenerateDenominator("k n^2 (n-2) - 2 gamma (n-1)"));
        }
        Ok(beta + gamma * k * (nf - 1.0).powi(2) * (nf - 2.0) / den)
    }

    /// The distortion of the reduced solution for a given Weyl form `Q`:
    /// `lambda^a_b = i_b A1 e^a/(n-2) + (1-n)/(n-2) e_b i^a A1 + delta^a_b (2 A1 - Q)/(2n)`.
    pub fn distortion<S: Scalar>(&self, red: &ProcaReduction, eta: &[f64], q: &Form<S>) -> Vec<Form<S>> {
        distortion_from_a1(eta, &q.scale(red.a1_ratio), q)
    }

    /// Cartan source `F^a_b = (gamma_eff/k)[(n-1)/n delta^a_b *T - e^a ^ i_b *T]`.
    pub fn cartan_source<S: Scalar>(&self, red: &ProcaReduction, eta: &[f64], q: &Form<S>) -> Vec<Form<S>> {
        let n = eta.len();
        let nf = n as f64;
        let t = q.scale(red.torsion_ratio);
        let st = t.hodge(eta);
        let g = red.gamma_eff / self.k;
        let mut out = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let mut f = Form::basis1(n, a).wedge(&st.interior(b)).scale(-g);
                if a == b {
                    f.axpy(g * (nf - 1.0) / nf, &st);
                }
                out.push(f);
            }
        }
        out
    }

    /// The 1-forms `(A1, A2, A3)` entering the autoparallel force.
    pub fn a_forms<S: Scalar>(
        &self,
        red: &ProcaReduction,
        q: &Form<S>,
        choice: A3Choice,
    ) -> (Form<S>, Form<S>, Form<S>) {
        let nf = self.n as f64;
        let a1 = q.scale(red.a1_ratio);
        let a2 = q.clone();
        let a3 = match choice {
            A3Choice::Consistent => {
                let mut x = a2.clone();
                x.axpy(4.0 / (nf - 2.0), &a1);
                x
            }
            A3Choice::TwoNOverNMinusOne => q.scale(red.torsion_ratio * 2.0 * nf / (nf - 1.0)),
            A3Choice::NMinusOneOverTwoN => q.scale(red.torsion_ratio * (nf - 1.0) / (2.0 * nf)),
        };
        (a1, a2, a3)
    }
}

/// The reduced distortion in terms of `A1` and `A2 = Q`.
pub fn distortion_from_a1<S: Scalar>(eta: &[f64], a1: &Form<S>, a2: &Form<S>) -> Vec<Form<S>> {
    let n = eta.len();
    let nf = n as f64;
    let mut tr = a1.scale(2.0);
    tr.sub_assign(a2);
    let tr = tr.scale(1.0 / (2.0 * nf));
    let comps = a1.components();
    let mut out = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let mut l = Form::basis1(n, a).times(comps[b]).scale(1.0 / (nf - 2.0));
            let ia = comps[a].scale(eta[a]);
            l.axpy((1.0 - nf) / (nf - 2.0), &Form::basis1(n, b).times(ia).scale(eta[b]));
            if a == b {
                l.add_assign(&tr);
            }
            out.push(l);
        }
    }
    out
}

/// The distortion written in terms of three 1-forms:
/// `1/(2n)[e^a i_b(A3 + 2A1 - A2) + e_b i^a(A2 - (2+2n)A1 - A3) + delta^a_b(2A1 - A2)]`.
pub fn distortion_three_forms<S: Scalar>(eta: &[f64], a1: &Form<S>, a2: &Form<S>, a3: &Form<S>) -> Vec<Form<S>> {
    let n = eta.len();
    let nf = n as f64;
    let mut x = a3.clone();
    x.axpy(2.0, a1);
    x.sub_assign(a2);
    let mut y = a2.clone();
    y.axpy(-(2.0 + 2.0 * nf), a1);
    y.sub_assign(a3);
    let mut z = a1.scale(2.0);
    z.sub_assign(a2);
    let k = 1.0 / (2.0 * nf);
    let mut out = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let mut l = Form::basis1(n, a).times(x.components()[b]);
            l.add_assign(&Form::basis1(n, b).times(y.components()[a].scale(eta[a] * eta[b])));
            if a == b {
                l.add_assign(&z);
            }
            out.push(l.scale(k));
        }
    }
    out
}
