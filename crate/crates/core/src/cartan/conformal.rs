//! A scalar field coupled to the full Einstein-Hilbert term, `k(1 + a psi^2) R *1`.
//!
//! The Cartan equation becomes `D *(e_a ^ e^b) = A(psi) dpsi ^ *(e_a ^ e^b)`
//! with `A = -2 a psi / (1 + a psi^2)`. Its solution has vanishing traceless
//! non-metricity and traceless torsion, and the Einstein equation reduces to
//! a Levi-Civita system with a shifted scalar kinetic coupling.

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::expr::ScalarExpr;
use crate::exterior::{Chart, Form, FormField};
use crate::geometry::{Distortion, Geometry};
use crate::jet::{Jet, Scalar};

const POLE_TOL: f64 = 1e-12;

/// Couplings of `k (1 + alpha psi^2) R *1 + beta/2 dpsi ^ *dpsi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConformalModel {
    pub n: usize,
    pub k: f64,
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
}

/// `1 + alpha psi^2`, rejecting the pole.
fn conformal_factor(alpha: f64, psi: f64) -> Result<f64> {
    let f = 1.0 + alpha * psi * psi;
    if f.abs() <= POLE_TOL {
        return Err(GeomError::ConformalPole);
    }
    Ok(f)
}

impl ConformalModel {
    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(GeomError::DimensionTooLow(self.n));
        }
        if ![self.k, self.alpha, self.beta].iter().all(|x| x.is_finite()) {
            return Err(GeomError::Invalid("non-finite coupling".into()));
        }
        Ok(())
    }

    /// `A(psi) = -2 alpha psi / (1 + alpha psi^2)`.
    pub fn a_of(&self, psi: f64) -> Result<f64> {
        Ok(-2.0 * self.alpha * psi / conformal_factor(self.alpha, psi)?)
    }

    /// `A(psi)` along a jet.
    pub fn a_jet(&self, psi: &Jet) -> Result<Jet> {
        conformal_factor(self.alpha, psi.val())?;
        let f = *psi * *psi * Jet::cst(self.alpha) + Jet::cst(1.0);
        Ok(psi.scale(-2.0 * self.alpha) * f.recip())
    }

    /// Distortion `lambda^a_b` from `lambda_ab = -g_ab Q/(2n) + A/(n-2)(i_a dpsi e_b - i_b dpsi e_a)`.
    pub fn distortion<S: Scalar>(&self, eta: &[f64], a: S, dpsi: &Form<S>, q: &Form<S>) -> Vec<Form<S>> {
        let n = eta.len();
        let nf = n as f64;
        let c = 1.0 / (nf - 2.0);
        let p = dpsi.components();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                // lambda^i_j = eta^ii lambda_ij
                let mut l = Form::basis1(n, j).times(p[i] * a).scale(c * eta[j] * eta[i]);
                l.axpy(-c * eta[i], &Form::basis1(n, i).times(p[j] * a).scale(eta[i]));
                if i == j {
                    l.axpy(-1.0 / (2.0 * nf), q);
                }
                out.push(l);
            }
        }
        out
    }

    /// Cartan source in the `D *(e^a ^ e_b) = F^a_b` convention:
    /// `F^a_b = A dpsi ^ *(e^a ^ e_b)`.
    pub fn cartan_source<S: Scalar>(&self, eta: &[f64], a: S, dpsi: &Form<S>) -> Vec<Form<S>> {
        let n = eta.len();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    out.push(Form::zero(n, n - 1));
                } else {
                    let s: Form<S> = crate::geometry::star_basis(eta, &[i, j], &[false, true]);
                    out.push(dpsi.wedge(&s).times(a));
                }
            }
        }
        out
    }

    /// Torsion `T^a = e^a ^ Q/(2n) - A/(n-2) e^a ^ dpsi`.
    pub fn torsion<S: Scalar>(&self, a: S, dpsi: &Form<S>, q: &Form<S>) -> Vec<Form<S>> {
        let n = dpsi.dim();
        let nf = n as f64;
        let mut x = q.scale(1.0 / (2.0 * nf));
        x.axpy(-1.0 / (nf - 2.0), &dpsi.times(a));
        (0..n).map(|i| Form::basis1(n, i).wedge(&x)).collect()
    }

    /// Torsion trace `T = (n-1)/(2n) Q + (1-n)/(n-2) A dpsi`.
    pub fn torsion_trace<S: Scalar>(&self, a: S, dpsi: &Form<S>, q: &Form<S>) -> Form<S> {
        let nf = self.n as f64;
        let mut t = q.scale((nf - 1.0) / (2.0 * nf));
        t.axpy((1.0 - nf) / (nf - 2.0), &dpsi.times(a));
        t
    }

    /// The printed kinetic shift `beta' = beta + 4k(n-1)/(n-2)`.
    pub fn beta_prime_printed(&self) -> f64 {
        let nf = self.n as f64;
        self.beta + 4.0 * self.k * (nf - 1.0) / (nf - 2.0)
    }

    /// The `beta` that makes the printed shift vanish.
    pub fn beta_eliminating_kinetic(n: usize, k: f64) -> f64 {
        let nf = n as f64;
        -4.0 * k * (nf - 1.0) / (nf - 2.0)
    }

    /// The kinetic coupling realized by the reduced equations at a field value,
    /// `beta - 4k (n-1)/(n-2) alpha psi A(psi)`. The reduced Einstein equation
    /// also keeps the Hessian terms of `1 + alpha psi^2`.
    pub fn beta_prime_realized(&self, psi: f64) -> Result<f64> {
        let nf = self.n as f64;
        Ok(self.beta - 4.0 * self.k * (nf - 1.0) / (nf - 2.0) * self.alpha * psi * self.a_of(psi)?)
    }

    /// The distorted geometry for scalar `psi` and Weyl form `q` on `chart`.
    pub fn geometry(&self, chart: Chart, psi: ScalarExpr, q: FormField) -> Geometry {
        let m = *self;
        let dist = Distortion::recipe(move |fr| {
            let pj = psi.jet(&fr.point, fr.order)?;
            let a = m.a_jet(&pj)?;
            let dpsi = fr.d_scalar(&pj);
            Ok(m.distortion(fr.eta(), a, &dpsi, &q.at(fr)?))
        });
        Geometry { chart, distortion: dist }
    }

    /// The coefficient of `dpsi ^ *dpsi` in the quadratic distortion part of
    /// `R *1`: `A^2 (3n - 2 - n^2)/(n-2)^2`.
    pub fn delta_r_coefficient(&self, psi: f64) -> Result<f64> {
        let nf = self.n as f64;
        let a = self.a_of(psi)?;
        Ok(a * a * (3.0 * nf - 2.0 - nf * nf) / ((nf - 2.0) * (nf - 2.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_shift_at_four_dimensions() {
        let m = ConformalModel { n: 4, k: 1.0, alpha: 0.3, beta: 0.0 };
        assert!((m.beta_prime_printed() - 6.0).abs() < 1e-15);
        let b = ConformalModel::beta_eliminating_kinetic(4, 1.0);
        assert_eq!(ConformalModel { beta: b, ..m }.beta_prime_printed(), 0.0);
    }

    #[test]
    fn zero_field_has_no_traceless_distortion() {
        let m = ConformalModel { n: 4, k: 1.0, alpha: 0.3, beta: 0.0 };
        assert_eq!(m.a_of(0.0).unwrap(), 0.0);
    }

    #[test]
    fn pole_is_rejected() {
        let m = ConformalModel { n: 4, k: 1.0, alpha: -1.0, beta: 0.0 };
        assert_eq!(m.a_of(1.0), Err(GeomError::ConformalPole));
    }
}
