//! Algebraic solution of the Cartan equation `D *(e^a ^ e_b) = F^a_b`.
//!
//! The source is summarized by the 0-forms `f^{ca}_b = i^c *F^a_b`. The
//! general solution fixes the traceless torsion, the traceless
//! non-metricity and the combination `T - (n-1)/(2n) Q`; the Weyl form `Q`
//! itself is left free.

pub mod cases;
pub mod conformal;
pub mod proca;

use crate::error::{GeomError, Result};
use crate::exterior::Form;
use crate::geometry::{distortion_from_torsion_nonmetricity, star_basis};
use crate::jet::Scalar;

/// Lowered source components `f_{cab}`, stored at `[(c*n + a)*n + b]`.
#[derive(Debug, Clone)]
pub struct SourceTensor<S> {
    pub n: usize,
    pub f: Vec<S>,
}

impl<S: Scalar> SourceTensor<S> {
    #[inline]
    pub fn get(&self, c: usize, a: usize, b: usize) -> S {
        self.f[(c * self.n + a) * self.n + b]
    }

    /// `f_{cab}` from the source forms `F^a_b` (indexed `[a*n+b]`).
    pub fn from_forms(eta: &[f64], forms: &[Form<S>]) -> Self {
        let n = eta.len();
        let mut f = vec![S::constant(0.0); n * n * n];
        for a in 0..n {
            for b in 0..n {
                // *F^a_b is a 1-form; i^c picks eta^cc times component c, lowering c and a
                // gives f_cab = eta_aa (*F^a_b)_c.
                let s = forms[a * n + b].hodge(eta);
                for c in 0..n {
                    f[(c * n + a) * n + b] = s.components()[c].scale(eta[a]);
                }
            }
        }
        SourceTensor { n, f }
    }

    /// Inverse of [`SourceTensor::from_forms`].
    pub fn to_forms(&self, eta: &[f64]) -> Vec<Form<S>> {
        let n = self.n;
        let mut out = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let comps = (0..n).map(|c| self.get(c, a, b).scale(eta[a])).collect();
                let one = Form::from_components(n, 1, comps);
                // *F is the 1-form above; F = sign * *(*F) with ** = (-1)^{p(n-p)} s on p = n-1 forms
                let sgn = star_star_sign(eta, n - 1);
                out.push(one.hodge(eta).scale(sgn));
            }
        }
        out
    }

    /// `f^d_{ad} = sum_d eta^dd f_{dad}`.
    pub fn trace_outer(&self, eta: &[f64], a: usize) -> S {
        let mut s = S::constant(0.0);
        for d in 0..self.n {
            s += self.get(d, a, d).scale(eta[d]);
        }
        s
    }

    /// `f^d_{da} = sum_d eta^dd f_{dda}`.
    pub fn trace_inner(&self, eta: &[f64], a: usize) -> S {
        let mut s = S::constant(0.0);
        for d in 0..self.n {
            s += self.get(d, d, a).scale(eta[d]);
        }
        s
    }

    /// `f^{ca}_a` lowered on c; vanishes exactly when `F^a_a = 0`.
    pub fn trace_last(&self, eta: &[f64], c: usize) -> S {
        let mut s = S::constant(0.0);
        for a in 0..self.n {
            s += self.get(c, a, a).scale(eta[a]);
        }
        s
    }
}

/// Sign of `**` on p-forms.
pub fn star_star_sign(eta: &[f64], p: usize) -> f64 {
    let n = eta.len();
    let det: f64 = eta.iter().product();
    let s = if (p * (n - p)).is_multiple_of(2) { 1.0 } else { -1.0 };
    s * det
}

/// Closed-form solution data of the Cartan equation.
#[derive(Debug, Clone)]
pub struct CartanSolution<S: Scalar> {
    pub n: usize,
    /// Traceless torsion `hat T^a` (index up).
    pub torsion_traceless: Vec<Form<S>>,
    /// Traceless non-metricity `hat Q_ab`, indexed `[a*n+b]`.
    pub nonmetricity_traceless: Vec<Form<S>>,
    /// `T - (n-1)/(2n) Q`.
    pub trace_relation: Form<S>,
    pub status: SolutionStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum SolutionStatus {
    Unique,
    Underdetermined,
}

/// Evaluates the closed forms for `hat T`, `hat Q` and the trace relation.
/// No check of the trace condition is made.
///
/// The printed forms hold as written in even dimension; in odd dimension the
/// source enters with the opposite overall sign, which is applied here.
pub fn closed_form<S: Scalar>(eta: &[f64], f: &SourceTensor<S>) -> CartanSolution<S> {
    let n = eta.len();
    let nf = n as f64;
    let parity = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let f = &SourceTensor { n, f: f.f.iter().map(|x| x.scale(parity)).collect() };
    let g = |a: usize, b: usize| if a == b { eta[a] } else { 0.0 };
    let t1: Vec<S> = (0..n).map(|a| f.trace_outer(eta, a)).collect();
    let t2: Vec<S> = (0..n).map(|a| f.trace_inner(eta, a)).collect();

    // i_a i_b hat T_c
    let iit = |a: usize, b: usize, c: usize| -> S {
        let mut x = (t1[a].scale(g(b, c)) - t1[b].scale(g(a, c))).scale(1.0 / (nf - 1.0));
        let s = f.get(b, a, c) + f.get(b, c, a) + f.get(c, a, b) - f.get(c, b, a) - f.get(a, b, c) - f.get(a, c, b);
        x -= s.scale(0.5);
        x
    };
    let mut that = Vec::with_capacity(n);
    for c in 0..n {
        let mut comps = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                // stored component (a<b) of a 2-form X is i_b i_a X
                comps.push(iit(b, a, c).scale(eta[c]));
            }
        }
        that.push(Form::from_components(n, 2, comps));
    }
    let mut qhat = Vec::with_capacity(n * n);
    for b in 0..n {
        for c in 0..n {
            let comps = (0..n)
                .map(|a| {
                    let mut x = (t2[a] + t1[a]).scale(g(b, c) / nf);
                    let s = f.get(b, a, c) + f.get(b, c, a) + f.get(c, a, b) + f.get(c, b, a)
                        - f.get(a, b, c)
                        - f.get(a, c, b);
                    x -= s.scale(0.5);
                    x
                })
                .collect();
            qhat.push(Form::from_components(n, 1, comps));
        }
    }
    let k = 1.0 / (nf * (nf - 2.0));
    let trace = Form::from_components(n, 1, (0..n).map(|a| (t1[a] + t2[a].scale(1.0 - nf)).scale(k)).collect());
    CartanSolution {
        n,
        torsion_traceless: that,
        nonmetricity_traceless: qhat,
        trace_relation: trace,
        status: SolutionStatus::Unique,
    }
}

/// Solves the Cartan equation for a source satisfying `F^a_a = 0`.
pub fn solve_general<S: Scalar>(eta: &[f64], forms: &[Form<S>], tol: f64) -> Result<CartanSolution<S>> {
    let n = eta.len();
    if n < 3 {
        return Err(GeomError::DimensionTooLow(n));
    }
    if forms.len() != n * n {
        return Err(GeomError::IndexMismatch(format!("{} source forms for n={n}", forms.len())));
    }
    let mut tr = Form::<S>::zero(n, n - 1);
    let mut scale: f64 = 0.0;
    for a in 0..n {
        tr.add_assign(&forms[a * n + a]);
        for b in 0..n {
            scale = scale.max(forms[a * n + b].max_abs());
        }
    }
    if tr.max_abs() > tol * scale.max(1.0) {
        return Err(GeomError::TraceViolation(tr.max_abs()));
    }
    Ok(closed_form(eta, &SourceTensor::from_forms(eta, forms)))
}

impl<S: Scalar> CartanSolution<S> {
    /// Full torsion `T^a` for a given Weyl form.
    pub fn torsion(&self, eta: &[f64], weyl: &Form<S>) -> Vec<Form<S>> {
        let n = self.n;
        let nf = n as f64;
        let mut t = self.trace_relation.clone();
        t.axpy((nf - 1.0) / (2.0 * nf), weyl);
        let _ = eta;
        (0..n)
            .map(|a| {
                let mut x = self.torsion_traceless[a].clone();
                x.axpy(1.0 / (nf - 1.0), &Form::basis1(n, a).wedge(&t));
                x
            })
            .collect()
    }

    /// Full non-metricity `Q_ab` for a given Weyl form.
    pub fn nonmetricity(&self, eta: &[f64], weyl: &Form<S>) -> Vec<Form<S>> {
        let n = self.n;
        let mut q = self.nonmetricity_traceless.clone();
        for a in 0..n {
            q[a * n + a].axpy(eta[a] / n as f64, weyl);
        }
        q
    }

    /// Distortion `lambda^a_b` for a given Weyl form.
    pub fn distortion(&self, eta: &[f64], weyl: &Form<S>) -> Vec<Form<S>> {
        let t = self.torsion(eta, weyl);
        let q = self.nonmetricity(eta, weyl);
        distortion_from_torsion_nonmetricity(eta, &t, &q, 1e-9).expect("closed-form Q is symmetric")
    }
}

/// `*(e^a ^ e_b)` for all index pairs.
pub fn star_pairs<S: Scalar>(eta: &[f64]) -> Vec<Form<S>> {
    let n = eta.len();
    (0..n * n)
        .map(|k| {
            let (a, b) = (k / n, k % n);
            if a == b {
                Form::zero(n, n - 2)
            } else {
                star_basis(eta, &[a, b], &[false, true])
            }
        })
        .collect()
}
