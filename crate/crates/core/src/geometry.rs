//! Connections, torsion, non-metricity and curvature at a point.
//!
//! A general connection is `Lambda = Omega + lambda`, where `Omega` is the
//! Levi-Civita connection of the coframe and `lambda^a_b` collects torsion
//! and non-metricity. All connection-valued data is stored as flat vectors
//! indexed `[a * n + b]` for `X^a_b`.

use std::sync::Arc;

use crate::error::{GeomError, Result};
use crate::exterior::{Form, FormField, FrameAt, IndexedForms, Slot};
use crate::jet::{Jet, Scalar};

/// Lowers the first index: `x_ab = eta_aa x^a_b`.
pub fn lower_first<S: Scalar>(eta: &[f64], x: &[Form<S>]) -> Vec<Form<S>> {
    let n = eta.len();
    x.iter().enumerate().map(|(k, f)| f.scale(eta[k / n])).collect()
}

/// Raises the first index of `x_ab`.
pub fn raise_first<S: Scalar>(eta: &[f64], x: &[Form<S>]) -> Vec<Form<S>> {
    lower_first(eta, x)
}

/// `*(e_{a1} ^ ...)` style constant forms: `star_of(eta, idx, lowered)` gives
/// `*(e^{a1}^...)` with each index lowered where `lowered[k]` is set.
pub fn star_basis<S: Scalar>(eta: &[f64], idx: &[usize], lowered: &[bool]) -> Form<S> {
    let n = eta.len();
    let mut f = Form::<S>::basis(n, idx);
    for (k, &a) in idx.iter().enumerate() {
        if lowered[k] {
            f = f.scale(eta[a]);
        }
    }
    f.hodge(eta)
}

/// Torsion of a distortion: `T^a = lambda^a_b ^ e^b`.
pub fn torsion_of_distortion<S: Scalar>(n: usize, lambda: &[Form<S>]) -> Vec<Form<S>> {
    (0..n)
        .map(|a| {
            let mut t = Form::zero(n, 2);
            for b in 0..n {
                t.add_assign(&lambda[a * n + b].wedge(&Form::basis1(n, b)));
            }
            t
        })
        .collect()
}

/// `Q_ab = -(lambda_ab + lambda_ba)`.
pub fn nonmetricity_of_distortion<S: Scalar>(eta: &[f64], lambda: &[Form<S>]) -> Vec<Form<S>> {
    let n = eta.len();
    let low = lower_first(eta, lambda);
    let mut q = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let mut s = &low[a * n + b] + &low[b * n + a];
            s = s.scale(-1.0);
            q.push(s);
        }
    }
    q
}

/// Weyl 1-form `Q = Q^a_a`.
pub fn weyl_form<S: Scalar>(eta: &[f64], q_low: &[Form<S>]) -> Form<S> {
    let n = eta.len();
    let mut w = Form::zero(n, 1);
    for a in 0..n {
        w.axpy(eta[a], &q_low[a * n + a]);
    }
    w
}

/// Trace 1-form `T = i_a T^a`.
pub fn torsion_trace<S: Scalar>(t: &[Form<S>]) -> Form<S> {
    let n = t.len();
    let mut s = Form::zero(n, 1);
    for (a, ta) in t.iter().enumerate() {
        s.add_assign(&ta.interior(a));
    }
    s
}

/// Traceless torsion `T^a - e^a ^ T / (n-1)`.
pub fn traceless_torsion<S: Scalar>(t: &[Form<S>]) -> Vec<Form<S>> {
    let n = t.len();
    let tr = torsion_trace(t);
    t.iter()
        .enumerate()
        .map(|(a, ta)| {
            let mut x = ta.clone();
            x.axpy(-1.0 / (n as f64 - 1.0), &Form::basis1(n, a).wedge(&tr));
            x
        })
        .collect()
}

/// Traceless non-metricity `Q_ab - eta_ab Q / n`.
pub fn traceless_nonmetricity<S: Scalar>(eta: &[f64], q_low: &[Form<S>]) -> Vec<Form<S>> {
    let n = eta.len();
    let w = weyl_form(eta, q_low);
    let mut out = q_low.to_vec();
    for a in 0..n {
        out[a * n + a].axpy(-eta[a] / n as f64, &w);
    }
    out
}

/// Distortion from torsion `T^a` and symmetric non-metricity `Q_ab`:
/// `2 lambda_ab = i_a T_b - i_b T_a - (i_a i_b T_c + i_b Q_ac - i_a Q_bc) e^c - Q_ab`.
pub fn distortion_from_torsion_nonmetricity<S: Scalar>(
    eta: &[f64],
    t: &[Form<S>],
    q_low: &[Form<S>],
    sym_tol: f64,
) -> Result<Vec<Form<S>>> {
    let n = eta.len();
    if t.len() != n || q_low.len() != n * n {
        return Err(GeomError::IndexMismatch("torsion needs n 2-forms and Q n*n 1-forms".into()));
    }
    for a in 0..n {
        for b in 0..a {
            let d = &q_low[a * n + b] - &q_low[b * n + a];
            if d.max_abs() > sym_tol * (1.0 + q_low[a * n + b].max_abs()) {
                return Err(GeomError::AsymmetricNonMetricity);
            }
        }
    }
    let t_low: Vec<Form<S>> = (0..n).map(|a| t[a].scale(eta[a])).collect();
    let mut lam = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let mut x = t_low[b].interior(a);
            x.sub_assign(&t_low[a].interior(b));
            for c in 0..n {
                let mut s = t_low[c].interior(b).interior(a).as_scalar();
                s += q_low[a * n + c].interior(b).as_scalar();
                s -= q_low[b * n + c].interior(a).as_scalar();
                // e^c coefficient; stored components are for upper-index basis
                x.components_mut()[c] -= s;
            }
            x.sub_assign(&q_low[a * n + b]);
            // lambda^a_b = eta^aa lambda_ab
            lam.push(x.scale(0.5 * eta[a]));
        }
    }
    Ok(lam)
}

/// The algebraic part of `D *(e^a ^ e_b)` contributed by a distortion,
/// `lambda^a_c ^ *(e^c ^ e_b) - lambda^c_b ^ *(e^a ^ e_c)`, indexed `[a*n+b]`.
pub fn cartan_operator<S: Scalar>(eta: &[f64], lambda: &[Form<S>]) -> Vec<Form<S>> {
    let n = eta.len();
    let s: Vec<Form<S>> = (0..n * n)
        .map(|k| {
            let (a, b) = (k / n, k % n);
            if a == b {
                Form::zero(n, n - 2)
            } else {
                star_basis(eta, &[a, b], &[false, true])
            }
        })
        .collect();
    let mut out = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let mut f = Form::zero(n, n - 1);
            for c in 0..n {
                f.add_assign(&lambda[a * n + c].wedge(&s[c * n + b]));
                f.sub_assign(&lambda[c * n + b].wedge(&s[a * n + c]));
            }
            out.push(f);
        }
    }
    out
}

/// Ricci 1-forms `P_b = i_a R^a_b`.
pub fn ricci_forms<S: Scalar>(n: usize, r: &[Form<S>]) -> Vec<Form<S>> {
    (0..n)
        .map(|b| {
            let mut p = Form::zero(n, 1);
            for a in 0..n {
                p.add_assign(&r[a * n + b].interior(a));
            }
            p
        })
        .collect()
}

/// Scalar curvature `R = i^b P_b`.
pub fn scalar_curvature<S: Scalar>(eta: &[f64], r: &[Form<S>]) -> S {
    let n = eta.len();
    let p = ricci_forms(n, r);
    let mut s = S::constant(0.0);
    for b in 0..n {
        s += p[b].interior(b).as_scalar().scale(eta[b]);
    }
    s
}

/// Einstein forms `G_c = R^a_b ^ *(e_a ^ e^b ^ e_c)`.
pub fn einstein_forms<S: Scalar>(eta: &[f64], r: &[Form<S>]) -> Vec<Form<S>> {
    let n = eta.len();
    let mut g = vec![Form::zero(n, n - 1); n];
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let rab = &r[a * n + b];
            if rab.max_abs() == 0.0 && rab.components().iter().all(|x| x.is_exact_zero()) {
                continue;
            }
            for (c, gc) in g.iter_mut().enumerate() {
                if c == a || c == b {
                    continue;
                }
                let s: Form<S> = star_basis(eta, &[a, b, c], &[true, false, true]);
                gc.add_assign(&rab.wedge(&s));
            }
        }
    }
    g
}

/// Pointwise distortion recipe.
pub type RecipeFn = dyn Fn(&FrameAt<'_>) -> Result<Vec<Form<Jet>>> + Send + Sync;

/// Source of the distortion `lambda^a_b` at a point.
#[derive(Clone, Default)]
pub enum Distortion {
    #[default]
    None,
    /// `lambda^a_b` given directly as `n*n` 1-form fields.
    Explicit(Vec<FormField>),
    /// Built from torsion 2-forms `T^a` and symmetric `Q_ab`.
    TorsionNonMetricity { torsion: Vec<FormField>, nonmetricity: Vec<FormField> },
    /// Any pointwise recipe.
    Recipe(Arc<RecipeFn>),
}

impl std::fmt::Debug for Distortion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Distortion::None => write!(f, "Distortion::None"),
            Distortion::Explicit(_) => write!(f, "Distortion::Explicit"),
            Distortion::TorsionNonMetricity { .. } => write!(f, "Distortion::TorsionNonMetricity"),
            Distortion::Recipe(_) => write!(f, "Distortion::Recipe"),
        }
    }
}

impl Distortion {
    pub fn recipe(f: impl Fn(&FrameAt<'_>) -> Result<Vec<Form<Jet>>> + Send + Sync + 'static) -> Self {
        Distortion::Recipe(Arc::new(f))
    }

    pub fn at(&self, fr: &FrameAt<'_>) -> Result<Vec<Form<Jet>>> {
        let n = fr.dim();
        match self {
            Distortion::None => Ok(vec![Form::zero(n, 1); n * n]),
            Distortion::Explicit(v) => {
                if v.len() != n * n {
                    return Err(GeomError::IndexMismatch(format!("{} distortion forms for n={n}", v.len())));
                }
                v.iter().map(|f| f.at(fr)).collect()
            }
            Distortion::TorsionNonMetricity { torsion, nonmetricity } => {
                let t: Vec<Form<Jet>> = torsion.iter().map(|f| f.at(fr)).collect::<Result<_>>()?;
                let q: Vec<Form<Jet>> = nonmetricity.iter().map(|f| f.at(fr)).collect::<Result<_>>()?;
                distortion_from_torsion_nonmetricity(fr.eta(), &t, &q, 1e-12)
            }
            Distortion::Recipe(f) => {
                let l = f(fr)?;
                if l.len() != n * n {
                    return Err(GeomError::IndexMismatch(format!("{} distortion forms for n={n}", l.len())));
                }
                Ok(l)
            }
        }
    }
}

/// A chart together with a distortion recipe.
#[derive(Debug, Clone)]
pub struct Geometry {
    pub chart: crate::exterior::Chart,
    pub distortion: Distortion,
}

impl Geometry {
    pub fn riemannian(chart: crate::exterior::Chart) -> Self {
        Geometry { chart, distortion: Distortion::None }
    }

    pub fn at(&self, point: &[f64], order: u8) -> Result<PointGeometry<'_>> {
        let fr = self.chart.at(point, order)?;
        let lambda = self.distortion.at(&fr)?;
        Ok(PointGeometry::new(fr, lambda))
    }
}

/// Geometry evaluated at a point.
pub struct PointGeometry<'c> {
    pub frame: FrameAt<'c>,
    /// `lambda^a_b`.
    pub lambda: Vec<Form<Jet>>,
    /// `Lambda^a_b = Omega^a_b + lambda^a_b`.
    pub conn: Vec<Form<Jet>>,
}

impl<'c> PointGeometry<'c> {
    pub fn new(frame: FrameAt<'c>, lambda: Vec<Form<Jet>>) -> Self {
        let conn = frame.omega.iter().zip(&lambda).map(|(o, l)| o + l).collect();
        PointGeometry { frame, lambda, conn }
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    pub fn eta(&self) -> &[f64] {
        self.frame.eta()
    }

    /// `T^a = de^a + Lambda^a_b ^ e^b`.
    pub fn torsion(&self) -> Vec<Form<Jet>> {
        let n = self.dim();
        let mut t = self.frame.de.clone();
        for (a, ta) in t.iter_mut().enumerate() {
            for b in 0..n {
                ta.add_assign(&self.conn[a * n + b].wedge(&Form::basis1(n, b)));
            }
        }
        t
    }

    /// `Q_ab` (both indices down).
    pub fn nonmetricity(&self) -> Vec<Form<Jet>> {
        nonmetricity_of_distortion(self.eta(), &self.lambda)
    }

    pub fn weyl(&self) -> Form<Jet> {
        weyl_form(self.eta(), &self.nonmetricity())
    }

    /// `R^a_b = d Lambda^a_b + Lambda^a_c ^ Lambda^c_b` for any connection.
    pub fn curvature_of(&self, conn: &[Form<Jet>]) -> Vec<Form<Jet>> {
        let n = self.dim();
        let mut r = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let mut x = self.frame.d(&conn[a * n + b]);
                for c in 0..n {
                    x.add_assign(&conn[a * n + c].wedge(&conn[c * n + b]));
                }
                r.push(x);
            }
        }
        r
    }

    pub fn curvature(&self) -> Vec<Form<Jet>> {
        self.curvature_of(&self.conn)
    }

    pub fn lc_curvature(&self) -> Vec<Form<Jet>> {
        self.curvature_of(&self.frame.omega)
    }

    pub fn scalar_curvature(&self) -> Jet {
        scalar_curvature(self.eta(), &self.curvature())
    }

    pub fn lc_scalar_curvature(&self) -> Jet {
        scalar_curvature(self.eta(), &self.lc_curvature())
    }

    pub fn einstein_forms(&self) -> Vec<Form<Jet>> {
        einstein_forms(self.eta(), &self.curvature())
    }

    pub fn lc_einstein_forms(&self) -> Vec<Form<Jet>> {
        einstein_forms(self.eta(), &self.lc_curvature())
    }

    /// `D *(e^a ^ e_b)` with the full connection, indexed `[a*n+b]`.
    pub fn cartan_lhs(&self) -> Vec<Form<Jet>> {
        let n = self.dim();
        let eta = self.eta();
        let comps = (0..n * n)
            .map(|k| {
                let (a, b) = (k / n, k % n);
                if a == b {
                    Form::zero(n, n - 2)
                } else {
                    star_basis(eta, &[a, b], &[false, true])
                }
            })
            .collect();
        let s = IndexedForms { n, slots: vec![Slot::Up, Slot::Down], comps };
        self.frame.covariant_d(&s, &self.conn).comps
    }

    /// Right side of `R = R_lc + i_a i_c (D_lc lambda^{ca} + lambda^c_d ^ lambda^{da})`.
    pub fn scalar_curvature_decomposed(&self) -> Jet {
        let n = self.dim();
        let eta = self.eta();
        // lambda^{ca} = lambda^c_a eta^aa
        let up: Vec<Form<Jet>> = (0..n * n).map(|k| self.lambda[k].scale(eta[k % n])).collect();
        let s = IndexedForms { n, slots: vec![Slot::Up, Slot::Up], comps: up.clone() };
        let dl = self.frame.covariant_d(&s, &self.frame.omega);
        let mut total = self.lc_scalar_curvature();
        for c in 0..n {
            for a in 0..n {
                let mut x = dl.comps[c * n + a].clone();
                for d in 0..n {
                    x.add_assign(&self.lambda[c * n + d].wedge(&up[d * n + a]));
                }
                total += x.interior(c).interior(a).as_scalar();
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ScalarExpr;
    use crate::exterior::Chart;

    fn sphere(r: f64) -> Chart {
        let th = ScalarExpr::coord(1, "th");
        Chart::diagonal(
            &["t", "th", "ph"],
            vec![-1.0, 1.0, 1.0],
            vec![ScalarExpr::cst(1.0), ScalarExpr::cst(r), th.sin().scale(r)],
        )
        .unwrap()
    }

    #[test]
    fn two_sphere_connection_and_curvature() {
        let chart = sphere(2.0);
        let g = Geometry::riemannian(chart);
        let th = 0.8;
        let pg = g.at(&[0.0, th, 0.3], 2).unwrap();
        // Omega^1_2 = -cos(th) dph = -cos(th) / (r sin th) e^2
        let o12 = &pg.frame.omega[3 + 2];
        assert!((o12.components()[2].val() + th.cos() / (2.0 * th.sin())).abs() < 1e-14);
        assert!((pg.lc_scalar_curvature().val() - 2.0 / 4.0).abs() < 1e-13);
    }

    #[test]
    fn weyl_distortion_roundtrip() {
        let n = 4;
        let eta = crate::exterior::lorentzian(n);
        let q = Form::<f64>::from_components(n, 1, vec![0.3, -0.2, 0.5, 1.1]);
        let mut lam = vec![Form::zero(n, 1); n * n];
        for a in 0..n {
            lam[a * n + a] = q.scale(-1.0 / (2.0 * n as f64));
        }
        let t = torsion_of_distortion(n, &lam);
        let ql = nonmetricity_of_distortion(&eta, &lam);
        let back = distortion_from_torsion_nonmetricity(&eta, &t, &ql, 1e-12).unwrap();
        for k in 0..n * n {
            assert!((&back[k] - &lam[k]).max_abs() < 1e-15);
        }
    }
}
