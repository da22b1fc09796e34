//! Exact solutions: constants, charts, field recipes, constraints and verification.
//!
//! A [`SolutionDoc`] names a solution and its constants. [`instantiate`]
//! builds the chart and fields; [`verify`] samples every field equation the
//! solution claims to satisfy and returns a [`VerifyBundle`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cartan::proca::{ProcaModel, ProcaReduction};
use crate::cartan::{closed_form, SourceTensor};
use crate::error::{GeomError, Result};
use crate::expr::ScalarExpr;
use crate::exterior::{lorentzian, Basis, Chart, Form, FormField, FrameAt};
use crate::fieldeq::{
    cancellation_residual, divergence, einstein_term, sample_residual, tau_kinetic, tau_mass, tau_maxwell,
    trace_balance, Balance, ResidualReport, Tally,
};
use crate::geometry::{cartan_operator, nonmetricity_of_distortion, torsion_of_distortion, Distortion, Geometry};
use crate::jet::{Jet, Scalar};
use crate::sampling::SamplingBox;

/// Relative tolerance for declared constraints.
pub const CONSTRAINT_TOL: f64 = 1e-12;

fn one() -> f64 {
    1.0
}

fn four() -> usize {
    4
}

/// A solution and its constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "solution", rename_all = "snake_case", deny_unknown_fields)]
pub enum SolutionDoc {
    Flat {
        #[serde(default = "four")]
        n: usize,
    },
    Schwarzschild {
        m: f64,
    },
    /// Static axially symmetric solution with a Weyl form `Q = beta(r) dphi`.
    Melvin {
        #[serde(default = "one")]
        k: f64,
        alpha: f64,
        c1: f64,
        c2: f64,
        c3: f64,
        c4: f64,
    },
    /// Time-dependent solution with `Q = C1 cos t dx + C2 y dz`.
    Rosen {
        #[serde(default = "one")]
        k: f64,
        b1: f64,
        b3: f64,
        /// Mixing angle between the electric and magnetic parts of `dQ`.
        angle: f64,
    },
    /// Non-Riemannian black hole with a dilaton, `n = 4`.
    DilatonBlackHole {
        #[serde(default = "one")]
        k: f64,
        alpha: f64,
        beta: f64,
        gamma: f64,
        q: f64,
        b1: f64,
        b2: f64,
    },
    /// Static spherically symmetric scalar-electrovac solution.
    Penney {
        lambda: f64,
        a: f64,
        b: f64,
        q: f64,
    },
    ReissnerNordstrom {
        m: f64,
        q: f64,
    },
}

impl SolutionDoc {
    pub fn name(&self) -> &'static str {
        match self {
            SolutionDoc::Flat { .. } => "flat",
            SolutionDoc::Schwarzschild { .. } => "schwarzschild",
            SolutionDoc::Melvin { .. } => "melvin",
            SolutionDoc::Rosen { .. } => "rosen",
            SolutionDoc::DilatonBlackHole { .. } => "dilaton_black_hole",
            SolutionDoc::Penney { .. } => "penney",
            SolutionDoc::ReissnerNordstrom { .. } => "reissner_nordstrom",
        }
    }

    /// Named constants, in declaration order.
    pub fn constants(&self) -> Vec<(&'static str, f64)> {
        match *self {
            SolutionDoc::Flat { n } => vec![("n", n as f64)],
            SolutionDoc::Schwarzschild { m } => vec![("m", m)],
            SolutionDoc::Melvin { k, alpha, c1, c2, c3, c4 } => {
                vec![("k", k), ("alpha", alpha), ("c1", c1), ("c2", c2), ("c3", c3), ("c4", c4)]
            }
            SolutionDoc::Rosen { k, b1, b3, angle } => vec![("k", k), ("b1", b1), ("b3", b3), ("angle", angle)],
            SolutionDoc::DilatonBlackHole { k, alpha, beta, gamma, q, b1, b2 } => {
                vec![("k", k), ("alpha", alpha), ("beta", beta), ("gamma", gamma), ("q", q), ("b1", b1), ("b2", b2)]
            }
            SolutionDoc::Penney { lambda, a, b, q } => vec![("lambda", lambda), ("a", a), ("b", b), ("q", q)],
            SolutionDoc::ReissnerNordstrom { m, q } => vec![("m", m), ("q", q)],
        }
    }

    /// A copy with one constant multiplied by `factor`.
    pub fn perturbed(&self, name: &str, factor: f64) -> Result<SolutionDoc> {
        let mut d = self.clone();
        let slot: &mut f64 = match (&mut d, name) {
            (SolutionDoc::Schwarzschild { m }, "m") => m,
            (SolutionDoc::Melvin { k, .. }, "k") => k,
            (SolutionDoc::Melvin { alpha, .. }, "alpha") => alpha,
            (SolutionDoc::Melvin { c1, .. }, "c1") => c1,
            (SolutionDoc::Melvin { c2, .. }, "c2") => c2,
            (SolutionDoc::Melvin { c3, .. }, "c3") => c3,
            (SolutionDoc::Melvin { c4, .. }, "c4") => c4,
            (SolutionDoc::Rosen { k, .. }, "k") => k,
            (SolutionDoc::Rosen { b1, .. }, "b1") => b1,
            (SolutionDoc::Rosen { b3, .. }, "b3") => b3,
            (SolutionDoc::Rosen { angle, .. }, "angle") => angle,
            (SolutionDoc::DilatonBlackHole { k, .. }, "k") => k,
            (SolutionDoc::DilatonBlackHole { alpha, .. }, "alpha") => alpha,
            (SolutionDoc::DilatonBlackHole { beta, .. }, "beta") => beta,
            (SolutionDoc::DilatonBlackHole { gamma, .. }, "gamma") => gamma,
            (SolutionDoc::DilatonBlackHole { q, .. }, "q") => q,
            (SolutionDoc::DilatonBlackHole { b1, .. }, "b1") => b1,
            (SolutionDoc::DilatonBlackHole { b2, .. }, "b2") => b2,
            (SolutionDoc::Penney { lambda, .. }, "lambda") => lambda,
            (SolutionDoc::Penney { a, .. }, "a") => a,
            (SolutionDoc::Penney { b, .. }, "b") => b,
            (SolutionDoc::Penney { q, .. }, "q") => q,
            (SolutionDoc::ReissnerNordstrom { m, .. }, "m") => m,
            (SolutionDoc::ReissnerNordstrom { q, .. }, "q") => q,
            _ => return Err(GeomError::UnknownSymbol(name.to_string())),
        };
        *slot *= factor;
        Ok(d)
    }
}

/// A named algebraic relation between constants, `lhs = rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constraint {
    pub equation: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Magnitude of the largest term, for the relative residual.
    pub scale: f64,
}

impl Constraint {
    fn new(equation: &str, lhs: f64, rhs: f64) -> Self {
        Constraint { equation: equation.to_string(), lhs, rhs, scale: lhs.abs().max(rhs.abs()) }
    }

    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }

    pub fn relative(&self) -> f64 {
        if self.residual() == 0.0 {
            0.0
        } else {
            self.residual() / self.scale
        }
    }

    pub fn report(&self, tolerance: f64) -> ResidualReport {
        let mut t = Tally::default();
        t.record(self.residual(), self.scale);
        t.report(format!("constraint: {}", self.equation), 0, tolerance)
    }
}

/// A printed relation that the realized solution does not satisfy as written.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding {
    pub label: String,
    pub printed: String,
    pub realized: String,
    pub residual: f64,
}

/// Couplings entering the field equations of an instance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct InstanceCouplings {
    pub k: f64,
    /// Coefficient of `1/2 dQ ^ *dQ` (or of `1/2 F ^ *F`).
    pub alpha: f64,
    /// Coefficient of `1/2 dpsi ^ *dpsi`.
    pub delta: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// A built solution.
#[derive(Debug, Clone)]
pub struct SolutionInstance {
    pub doc: SolutionDoc,
    pub chart: Chart,
    /// Weyl 1-form.
    pub q: Option<FormField>,
    /// Maxwell 2-form.
    pub maxwell: Option<FormField>,
    pub psi: Option<ScalarExpr>,
    pub couplings: InstanceCouplings,
    pub constraints: Vec<Constraint>,
    pub findings: Vec<Finding>,
    pub sampling: SamplingBox,
    pub singular_sets: Vec<String>,
    pub horizon: Option<f64>,
}

fn c(x: f64) -> ScalarExpr {
    ScalarExpr::cst(x)
}

fn domain(msg: impl Into<String>) -> GeomError {
    GeomError::DomainViolation(msg.into())
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{name} must be positive, got {x}")))
    }
}

/// `(a, b)` roots with `a + b = 2m`, `a b = q^2 / 2`.
fn rn_roots(m: f64, q: f64) -> Result<(f64, f64)> {
    let disc = m * m - q * q / 2.0;
    if disc < 0.0 {
        return Err(domain(format!("m^2 < q^2/2 ({m}, {q})")));
    }
    Ok((m + disc.sqrt(), m - disc.sqrt()))
}

fn spherical_coords() -> [&'static str; 4] {
    ["t", "r", "th", "ph"]
}

fn melvin_w(c2: f64) -> ScalarExpr {
    let r = ScalarExpr::coord(1, "r");
    r.mul(&r).scale(c2).add(&c(1.0))
}

fn bh_parts(k: f64, alpha: f64, q: f64, b1: f64, b2: f64) -> Result<(f64, ScalarExpr, ScalarExpr)> {
    positive("b1", b1)?;
    positive("b2", b2)?;
    if k == 0.0 {
        return Err(domain("k must be nonzero"));
    }
    let r1 = b2 / b1;
    let r = ScalarExpr::coord(1, "r");
    let f = r.powf(-1.0).scale(alpha * b1 * q * q / (2.0 * k * r1)).add(&c(1.0)).sqrt();
    let area = r.mul(&r.sub(&c(r1))).sqrt();
    Ok((r1, f, area))
}

/// Penney metric functions `(e^alpha, e^beta)` with `e^gamma = e^-alpha`.
fn penney_parts(lambda: f64, a: f64, b: f64) -> Result<(ScalarExpr, ScalarExpr)> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(domain(format!("lambda must lie in (0, 1], got {lambda}")));
    }
    if a == b {
        return Err(domain("a and b must differ"));
    }
    let r = ScalarExpr::coord(1, "r");
    let ra = r.sub(&c(a));
    let rb = r.sub(&c(b));
    let br = ra.powf(lambda).scale(b).sub(&rb.powf(lambda).scale(a)).scale(1.0 / (b - a));
    let b2 = br.powf(2.0);
    let ealpha = ra.powf(-lambda).mul(&rb.powf(-lambda)).mul(&b2);
    let ebeta = ra.powf(1.0 - lambda).mul(&rb.powf(1.0 - lambda)).mul(&b2);
    Ok((ealpha, ebeta))
}

fn chart_of(doc: &SolutionDoc) -> Result<Chart> {
    let sph = spherical_coords();
    match *doc {
        SolutionDoc::Flat { n } => {
            if !(2..=crate::jet::MAX_DIM).contains(&n) {
                return Err(domain(format!("dimension {n}")));
            }
            Ok(Chart::flat(n))
        }
        SolutionDoc::Schwarzschild { m } => {
            positive("m", m)?;
            let r = ScalarExpr::coord(1, "r");
            let th = ScalarExpr::coord(2, "th");
            let f = r.powf(-1.0).scale(-2.0 * m).add(&c(1.0)).sqrt();
            Chart::diagonal(&sph, lorentzian(4), vec![f.clone(), f.powf(-1.0), r.clone(), r.mul(&th.sin())])
        }
        SolutionDoc::Melvin { c1, c2, c3, .. } => {
            positive("c1", c1)?;
            positive("c3", c3)?;
            if c2 < 0.0 {
                return Err(domain("c2 < 0 makes 1 + c2 r^2 vanish in the box"));
            }
            let r = ScalarExpr::coord(1, "r");
            let w = melvin_w(c2);
            let sf = w.scale(c3.sqrt());
            let sh = w.scale(c1.sqrt());
            Chart::diagonal(&["t", "r", "ph", "z"], lorentzian(4), vec![sf.clone(), sh.clone(), r.div(&sf), sh])
        }
        SolutionDoc::Rosen { b1, b3, .. } => {
            positive("b1", b1)?;
            if b3 == 0.0 {
                return Err(domain("b3 must be nonzero"));
            }
            let b2 = 1.0 / b3;
            let t = ScalarExpr::coord(0, "t");
            let bb = t.scale(0.5).tan();
            let st = t.sin();
            let f0 = bb.powf(b2 + b3).scale(b1).div(&st.powf(2.0));
            let f2 = bb.powf(b2).div(&st);
            let f3 = bb.powf(b3).div(&st);
            Chart::diagonal(&["t", "x", "y", "z"], lorentzian(4), vec![f0, st, f2, f3])
        }
        SolutionDoc::DilatonBlackHole { k, alpha, q, b1, b2, .. } => {
            let (_, f, area) = bh_parts(k, alpha, q, b1, b2)?;
            let th = ScalarExpr::coord(2, "th");
            Chart::diagonal(&sph, lorentzian(4), vec![f.clone(), f.powf(-1.0), area.clone(), area.mul(&th.sin())])
        }
        SolutionDoc::Penney { lambda, a, b, .. } => penney_chart(lambda, a, b),
        SolutionDoc::ReissnerNordstrom { m, q } => {
            let (a, b) = rn_roots(m, q)?;
            penney_chart(1.0, a, b)
        }
    }
}

fn penney_chart(lambda: f64, a: f64, b: f64) -> Result<Chart> {
    let (ealpha, ebeta) = penney_parts(lambda, a, b)?;
    let th = ScalarExpr::coord(2, "th");
    let sb = ebeta.sqrt();
    Chart::diagonal(
        &spherical_coords(),
        lorentzian(4),
        vec![ealpha.powf(-0.5), ealpha.sqrt(), sb.clone(), sb.mul(&th.sin())],
    )
}

fn penney_fields(lambda: f64, a: f64, b: f64, q: f64) -> Result<(FormField, ScalarExpr)> {
    let (_, ebeta) = penney_parts(lambda, a, b)?;
    let r = ScalarExpr::coord(1, "r");
    let f = FormField::from_terms(4, 2, Basis::Coordinate, &[(&[1, 0], ebeta.powf(-1.0).scale(q))])?;
    let psi = r.sub(&c(a)).div(&r.sub(&c(b))).ln().scale(((1.0 - lambda * lambda) / 2.0).sqrt());
    Ok((f, psi))
}

/// Builds an instance with the coframe taken from `geo` and fields, couplings
/// and constraints taken from `fields` (both must name the same solution).
pub fn build(geo: &SolutionDoc, fields: &SolutionDoc) -> Result<SolutionInstance> {
    if std::mem::discriminant(geo) != std::mem::discriminant(fields) {
        return Err(GeomError::Invalid("geometry and field documents name different solutions".into()));
    }
    let chart = chart_of(geo)?;
    let mut inst = SolutionInstance {
        doc: fields.clone(),
        chart,
        q: None,
        maxwell: None,
        psi: None,
        couplings: InstanceCouplings { k: 1.0, ..Default::default() },
        constraints: Vec::new(),
        findings: Vec::new(),
        sampling: SamplingBox::cube(4, 0.0, 1.0),
        singular_sets: Vec::new(),
        horizon: None,
    };
    match *fields {
        SolutionDoc::Flat { n } => {
            inst.sampling = SamplingBox::cube(n, -1.0, 1.0);
        }
        SolutionDoc::Schwarzschild { m } => {
            inst.sampling = SamplingBox::new(vec![0.0, 2.5 * m, 0.2, 0.0], vec![1.0, 50.0 * m, PI - 0.2, 2.0 * PI])?;
            inst.singular_sets = vec!["r = 2m".into(), "r = 0".into(), "sin th = 0".into()];
            inst.horizon = Some(2.0 * m);
        }
        SolutionDoc::Melvin { k, alpha, c2, c3, c4, .. } => {
            let beta = melvin_w(c2).powf(-1.0).scale(-0.5 * c4);
            inst.q = Some(FormField::from_terms(4, 1, Basis::Coordinate, &[(&[2], beta)])?);
            inst.couplings = InstanceCouplings { k, alpha, ..Default::default() };
            let s = c2 * c3 * c4 * c4;
            inst.constraints.push(Constraint::new("alpha c2 c3 c4^2 = -16 k", alpha * s, -16.0 * k));
            inst.findings.push(Finding {
                label: "Melvin constraint".into(),
                printed: "c2 c3 c4^2 = 16 k alpha".into(),
                realized: "alpha c2 c3 c4^2 = -16 k".into(),
                residual: (s - 16.0 * k * alpha).abs(),
            });
            inst.sampling = SamplingBox::new(vec![0.0, 0.1, 0.0, -1.0], vec![1.0, 10.0, 2.0 * PI, 1.0])?;
            inst.singular_sets = vec!["r = 0".into()];
        }
        SolutionDoc::Rosen { k, b1, angle, .. } => {
            if k <= 0.0 {
                return Err(domain("k must be positive"));
            }
            let t = ScalarExpr::coord(0, "t");
            let y = ScalarExpr::coord(2, "y");
            let c1 = -2.0 * k.sqrt() * angle.cos();
            let c2 = 2.0 * k.sqrt() / b1 * angle.sin();
            inst.q = Some(FormField::from_terms(
                4,
                1,
                Basis::Coordinate,
                &[(&[1], t.cos().scale(c1)), (&[3], y.scale(c2))],
            )?);
            inst.couplings = InstanceCouplings { k, alpha: -1.0, ..Default::default() };
            let (ca, sa) = (angle.cos(), angle.sin());
            inst.findings.push(Finding {
                label: "Rosen Weyl form".into(),
                printed: "Q = C1 cos t dx + 2 C2 y dz".into(),
                realized: format!(
                    "Q = C1 cos t dx + C2 y dz (dQ as printed); the printed Q needs coupling alpha = {:.6}",
                    -1.0 / (ca * ca + 4.0 * sa * sa)
                ),
                residual: (1.0 / (ca * ca + 4.0 * sa * sa) - 1.0).abs(),
            });
            inst.sampling = SamplingBox::new(vec![0.1, -1.0, -1.0, -1.0], vec![PI - 0.1, 1.0, 1.0, 1.0])?;
            inst.singular_sets = vec!["sin t = 0".into()];
        }
        SolutionDoc::DilatonBlackHole { k, alpha, beta, gamma, q, b1, b2 } => {
            let (r1, _, _) = bh_parts(k, alpha, q, b1, b2)?;
            let r = ScalarExpr::coord(1, "r");
            let th = ScalarExpr::coord(2, "th");
            inst.q = Some(FormField::from_terms(4, 1, Basis::Coordinate, &[(&[3], th.cos().scale(-q))])?);
            inst.psi = Some(r.powf(-1.0).scale(-b2).add(&c(b1)).ln().scale(-0.5));
            inst.couplings = InstanceCouplings { k, alpha, delta: -4.0 * k, beta, gamma };
            let lhs = crate::cartan::proca::constraint(4, k, beta, gamma);
            let scale = 2.0 * (64.0 * (beta * k).abs() + 9.0 * (gamma * k).abs() + 12.0 * (beta * gamma).abs());
            inst.constraints
                .push(Constraint { scale, ..Constraint::new("64 beta k + 9 gamma k - 12 beta gamma = 0", lhs, 0.0) });
            let horizon = -alpha * b1 * q * q / (2.0 * k * r1);
            let h = if alpha * b1 / (2.0 * k * r1) < 0.0 && horizon > 0.0 { Some(horizon) } else { None };
            inst.horizon = h;
            let edge = r1.max(h.unwrap_or(0.0)) * 1.1;
            inst.sampling = SamplingBox::new(vec![0.0, edge, 0.2, 0.0], vec![1.0, 10.0 * edge, PI - 0.2, 2.0 * PI])?;
            inst.singular_sets = vec!["r = r1".into(), "r = horizon".into(), "sin th = 0".into()];
        }
        SolutionDoc::Penney { lambda, a, b, q } => {
            let (f, psi) = penney_fields(lambda, a, b, q)?;
            penney_common(&mut inst, lambda, a, b, q, f, psi)?;
        }
        SolutionDoc::ReissnerNordstrom { m, q } => {
            let (a, b) = rn_roots(m, q)?;
            let (f, psi) = penney_fields(1.0, a, b, q)?;
            penney_common(&mut inst, 1.0, a, b, q, f, psi)?;
        }
    }
    Ok(inst)
}

fn penney_common(
    inst: &mut SolutionInstance,
    lambda: f64,
    a: f64,
    b: f64,
    q: f64,
    f: FormField,
    psi: ScalarExpr,
) -> Result<()> {
    inst.maxwell = Some(f);
    inst.psi = Some(psi);
    inst.couplings = InstanceCouplings { k: 1.0, alpha: -2.0, delta: -2.0, ..Default::default() };
    let l2 = lambda * lambda;
    let m = (a + b) / 2.0;
    inst.constraints.push(Constraint::new("2 Lambda^2 a b = q^2", 2.0 * l2 * a * b, q * q));
    // c from the scalar amplitude c/(a-b) = sqrt((1-Lambda^2)/2)
    let cc = (a - b) * ((1.0 - l2) / 2.0).sqrt();
    inst.constraints.push(Constraint::new(
        "Lambda^2 c^2 = (1-Lambda^2)(2 Lambda^2 m^2 - q^2)",
        l2 * cc * cc,
        (1.0 - l2) * (2.0 * l2 * m * m - q * q),
    ));
    let edge = a.max(b) + 0.5;
    inst.sampling = SamplingBox::new(vec![0.0, edge, 0.2, 0.0], vec![1.0, 50.0, PI - 0.2, 2.0 * PI])?;
    inst.singular_sets = vec!["r = a".into(), "r = b".into(), "sin th = 0".into()];
    if lambda == 1.0 {
        inst.horizon = Some(a.max(b));
    }
    Ok(())
}

/// Builds and checks the declared constraints.
pub fn instantiate(doc: &SolutionDoc) -> Result<SolutionInstance> {
    let inst = build(doc, doc)?;
    for c in &inst.constraints {
        if c.relative() > CONSTRAINT_TOL {
            return Err(GeomError::ConstraintViolation { equation: c.equation.clone(), residual: c.residual() });
        }
    }
    Ok(inst)
}

/// A negative control: one constant scaled by `factor` in the field recipes,
/// or in the coframe when the fields do not depend on it.
pub fn negative_control(doc: &SolutionDoc, constant: &str, factor: f64) -> Result<SolutionInstance> {
    let pert = doc.perturbed(constant, factor)?;
    let base = build(doc, doc)?;
    let fields_only = build(doc, &pert)?;
    let same_fields = format!("{:?}{:?}{:?}", base.q, base.maxwell, base.psi)
        == format!("{:?}{:?}{:?}", fields_only.q, fields_only.maxwell, fields_only.psi)
        && base.couplings == fields_only.couplings;
    if same_fields {
        build(&pert, doc)
    } else {
        Ok(fields_only)
    }
}

/// Verification result for one instance.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyBundle {
    pub solution: String,
    pub constants: Vec<(String, f64)>,
    pub reports: Vec<ResidualReport>,
    pub findings: Vec<Finding>,
    pub horizon: Option<f64>,
    pub pass: bool,
}

struct Ctx<'a> {
    inst: &'a SolutionInstance,
    points: Vec<Vec<f64>>,
    seed: u64,
    tol: f64,
}

impl Ctx<'_> {
    fn run<F>(&self, name: &str, order: u8, f: F) -> Result<ResidualReport>
    where
        F: Fn(&FrameAt<'_>) -> Result<(f64, f64)> + Sync,
    {
        let chart = &self.inst.chart;
        sample_residual(name, &self.points, self.seed, self.tol, |p| {
            let fr = chart.at(p, order)?;
            f(&fr)
        })
    }
}

fn vals(f: &Form<Jet>) -> Form<f64> {
    f.values()
}

/// Einstein residual `k G_lc + sum of stresses` for the instance couplings.
fn einstein_report(ctx: &Ctx<'_>, name: &str) -> Result<ResidualReport> {
    let inst = ctx.inst;
    let cp = inst.couplings;
    let geo = Geometry::riemannian(inst.chart.clone());
    sample_residual(name, &ctx.points, ctx.seed, ctx.tol, |p| {
        let pg = geo.at(p, 2)?;
        let fr = &pg.frame;
        let eta = fr.eta();
        let n = fr.dim();
        let (g, gs) = einstein_term(&pg, cp.k);
        let mut bal = Balance::new(n, n - 1, n);
        bal.add(&g).widen(gs);
        let e2 = match &inst.psi {
            Some(psi) if matches!(inst.doc, SolutionDoc::DilatonBlackHole { .. }) => {
                Some(psi.jet(p, 2)?.scale(-2.0).exp())
            }
            _ => None,
        };
        if let Some(q) = &inst.q {
            let dq = fr.d(&q.at(fr)?);
            let mut t = tau_kinetic(eta, cp.alpha, &dq);
            if let Some(e2) = e2 {
                t = t.into_iter().map(|x| x.times(e2)).collect();
            }
            bal.add(&t);
        }
        if let Some(f) = &inst.maxwell {
            bal.add(&tau_kinetic(eta, cp.alpha, &f.at(fr)?));
        }
        if let Some(psi) = &inst.psi {
            let dpsi = fr.d_scalar(&psi.jet(p, 2)?);
            bal.add(&tau_mass(eta, cp.delta, &dpsi));
        }
        Ok(bal.finish())
    })
}

/// Cartan round trip for a `lambda = -Q/(2n) delta` geometry: the general
/// solution with zero source reproduces it, the Cartan operator annihilates
/// it, and the full Einstein forms equal the Levi-Civita ones.
/// The geometry of a vanishing Cartan source, `lambda^a_b = -delta^a_b Q/(2n)`,
/// for an instance carrying a Weyl form.
pub fn weyl_geometry(inst: &SolutionInstance) -> Result<Geometry> {
    let q = inst.q.clone().ok_or_else(|| GeomError::MissingField("Q".into()))?;
    let dist = Distortion::recipe(move |fr| {
        let qv = q.at(fr)?;
        let n = fr.dim();
        let mut l = vec![Form::zero(n, 1); n * n];
        for a in 0..n {
            l[a * n + a] = qv.scale(-1.0 / (2.0 * n as f64));
        }
        Ok(l)
    });
    Ok(Geometry { chart: inst.chart.clone(), distortion: dist })
}

fn weyl_only_reports(ctx: &Ctx<'_>) -> Result<Vec<ResidualReport>> {
    let inst = ctx.inst;
    let q = inst.q.clone().ok_or_else(|| GeomError::MissingField("Q".into()))?;
    let n = inst.chart.dim();
    let geo = weyl_geometry(inst)?;
    let mut out = Vec::new();
    out.push(ctx.run("cartan round trip (zero source)", 1, |fr| {
        let eta = fr.eta();
        let qv = vals(&q.at(fr)?);
        let zero = SourceTensor { n, f: vec![0.0; n * n * n] };
        let sol = closed_form(eta, &zero);
        let lam = sol.distortion(eta, &qv);
        let mut bal = Balance::new(n, 1, n * n);
        let mut want = vec![Form::zero(n, 1); n * n];
        for a in 0..n {
            want[a * n + a] = qv.scale(-1.0 / (2.0 * n as f64));
        }
        bal.add(&lam).add(&want.iter().map(|f| f.scale(-1.0)).collect::<Vec<_>>());
        let op = cartan_operator(eta, &want);
        let (r1, s1) = bal.finish();
        let r2 = op.iter().map(|f| f.max_abs()).fold(0.0, f64::max);
        Ok((r1.max(r2), s1))
    })?);
    out.push(sample_residual("einstein forms: full equals Levi-Civita", &ctx.points, ctx.seed, ctx.tol, |p| {
        let pg = geo.at(p, 2)?;
        let g = pg.einstein_forms();
        let g0 = pg.lc_einstein_forms();
        let r = pg.curvature();
        let scale = r.iter().map(|f| f.values().max_abs()).fold(0.0, f64::max);
        let mut bal = Balance::new(n, n - 1, n);
        bal.add(&g).add(&g0.iter().map(|f| f.scale(-1.0)).collect::<Vec<_>>()).widen(scale);
        Ok(bal.finish())
    })?);
    Ok(out)
}

fn trace_report(ctx: &Ctx<'_>, name: &str, dilaton: bool) -> Result<ResidualReport> {
    let inst = ctx.inst;
    let q = inst.q.clone().ok_or_else(|| GeomError::MissingField("Q".into()))?;
    let alpha = inst.couplings.alpha;
    ctx.run(name, 2, |fr| {
        let f1 = if dilaton {
            let psi = inst.psi.as_ref().ok_or_else(|| GeomError::MissingField("psi".into()))?;
            Some(psi.jet(&fr.point, 2)?.scale(-2.0).exp())
        } else {
            None
        };
        Ok(trace_balance(fr, &q.at(fr)?, alpha, 0.0, f1, None).finish())
    })
}

/// Proca data of the black-hole instance.
fn bh_model(inst: &SolutionInstance) -> Result<(ProcaModel, ProcaReduction)> {
    let cp = inst.couplings;
    let model = ProcaModel {
        n: 4,
        k: cp.k,
        alpha: cp.alpha,
        beta: cp.beta,
        gamma: cp.gamma,
        epsilon: 0.0,
        nu: 0.0,
        beta0: 0.0,
    };
    let red = model.reduce()?;
    Ok((model, red))
}

fn bh_reports(ctx: &Ctx<'_>) -> Result<Vec<ResidualReport>> {
    let inst = ctx.inst;
    let cp = inst.couplings;
    let SolutionDoc::DilatonBlackHole { k, alpha, beta, gamma, q, b1, b2 } = inst.doc else {
        return Err(GeomError::Invalid("not a black-hole instance".into()));
    };
    let qf = inst.q.clone().ok_or_else(|| GeomError::MissingField("Q".into()))?;
    let psi = inst.psi.clone().ok_or_else(|| GeomError::MissingField("psi".into()))?;
    let mut out = vec![
        einstein_report(ctx, "reduced einstein: k G + e^-2psi tau[alpha] + tau[delta]")?,
        trace_report(ctx, "maxwell-dilaton: alpha d(e^-2psi *dQ)", true)?,
    ];
    out.push(ctx.run("dilaton: delta d*dpsi + alpha e^-2psi dQ ^ *dQ", 2, |fr| {
        let eta = fr.eta();
        let ps = psi.jet(&fr.point, 2)?;
        let e2 = ps.scale(-2.0).exp();
        let dpsi = fr.d_scalar(&ps);
        let sd = dpsi.hodge(eta);
        let lap = fr.d(&sd).scale(cp.delta);
        let dq = fr.d(&qf.at(fr)?);
        let src = dq.wedge(&dq.hodge(eta)).times(e2).scale(cp.alpha);
        let mut b = Balance::new(4, 4, 1);
        b.add_one(&lap).add_one(&src).widen(cp.delta.abs() * sd.max_abs());
        Ok(b.finish())
    })?);
    let (model, red) = bh_model(inst)?;
    out.push(ctx.run("full trace: alpha d(e^-2psi *dQ) + beta *Q - gamma(1-n)/(2n) *T", 2, |fr| {
        let e2 = psi.jet(&fr.point, 2)?.scale(-2.0).exp();
        let qv = qf.at(fr)?;
        let mut b = trace_balance(fr, &qv, cp.alpha, 0.0, Some(e2), None);
        let eta = fr.eta();
        b.add_one(&qv.hodge(eta).scale(cp.beta));
        b.add_one(&qv.hodge(eta).scale(-cp.gamma * (1.0 - 4.0) / 8.0 * red.torsion_ratio));
        Ok(b.finish())
    })?);
    let r1 = b2 / b1;
    out.push(ctx.run("torsion: T^a = 8 beta/(9 gamma) q cos th e^a ^ dphi", 1, |fr| {
        let eta = fr.eta();
        let qv = vals(&qf.at(fr)?);
        let lam = model.distortion(&red, eta, &qv);
        let tor = torsion_of_distortion(4, &lam);
        let th = fr.point[2];
        let dphi = vals(&fr.coord_to_frame(1, &[Jet::cst(0.0), Jet::cst(0.0), Jet::cst(0.0), Jet::cst(1.0)]));
        let coef = 8.0 * beta / (9.0 * gamma) * q * th.cos();
        let want: Vec<Form<f64>> = (0..4).map(|a| Form::basis1(4, a).wedge(&dphi).scale(coef)).collect();
        let mut b = Balance::new(4, 2, 4);
        b.add(&tor).add(&want.iter().map(|f| f.scale(-1.0)).collect::<Vec<_>>());
        Ok(b.finish())
    })?);
    out.push(ctx.run("non-metricity: Q_ab = e_a i_b A1 + e_b i_a A1 - g_ab A1/2 + g_ab Q/4", 1, |fr| {
        let eta = fr.eta();
        let qv = vals(&qf.at(fr)?);
        let lam = model.distortion(&red, eta, &qv);
        let qab = nonmetricity_of_distortion(eta, &lam);
        let th = fr.point[2];
        let dphi = vals(&fr.coord_to_frame(1, &[Jet::cst(0.0), Jet::cst(0.0), Jet::cst(0.0), Jet::cst(1.0)]));
        let a1 = dphi.scale(2.0 * beta * q / (3.0 * k) * th.cos());
        let mut want = Vec::with_capacity(16);
        for a in 0..4 {
            for bb in 0..4 {
                let mut x = Form::basis1(4, a).scale(eta[a] * a1.components()[bb]);
                x.axpy(eta[bb] * a1.components()[a], &Form::basis1(4, bb));
                if a == bb {
                    x.axpy(-0.5 * eta[a], &a1);
                    x.axpy(0.25 * eta[a], &qv);
                }
                want.push(x.scale(-1.0));
            }
        }
        let mut b = Balance::new(4, 1, 16);
        b.add(&qab).add(&want);
        Ok(b.finish())
    })?);
    out.push(ctx.run("cartan round trip: lambda reproduces the source", 1, |fr| {
        let eta = fr.eta();
        let qv = vals(&qf.at(fr)?);
        let lam = model.distortion(&red, eta, &qv);
        let op = cartan_operator(eta, &lam);
        let src = model.cartan_source(&red, eta, &qv);
        let mut b = Balance::new(4, 3, 16);
        b.add(&op).add(&src.iter().map(|f| f.scale(-1.0)).collect::<Vec<_>>());
        Ok(b.finish())
    })?);
    let (_, canc) = cancellation_residual(&model, &inst.chart, &qf, &ctx.points, ctx.seed, ctx.tol)?;
    out.push(canc);
    if let Some(rh) = inst.horizon {
        let (_, f, _) = bh_parts(k, alpha, q, b1, b2)?;
        let v = f.evaluate(&[0.0, rh, 1.0, 0.0])?;
        let mut t = Tally::default();
        t.record(v * v, 1.0);
        out.push(t.report("horizon: f(r_h)^2 = 0", ctx.seed, ctx.tol));
    }
    let (_, _, area) = bh_parts(k, alpha, q, b1, b2)?;
    let ra = area.evaluate(&[0.0, r1 * (1.0 + 1e-6), 1.0, 0.0])?;
    let mut t = Tally::default();
    t.record(ra * ra, r1 * r1);
    out.push(t.report("area: R(r1 (1 + 1e-6))^2 -> 0", ctx.seed, 1e-5));
    Ok(out)
}

/// The scalar curvature of the Penney metric, with the factor `(a-b)^2`
/// that makes it agree with the metric for every `a, b`.
pub fn penney_scalar_curvature(lambda: f64, a: f64, b: f64, r: f64) -> f64 {
    penney_scalar_curvature_printed(lambda, a, b, r) * (a - b).powi(2)
}

/// The printed closed form of the Penney scalar curvature.
pub fn penney_scalar_curvature_printed(lambda: f64, a: f64, b: f64, r: f64) -> f64 {
    let br = b * (r - a).powf(lambda) - a * (r - b).powf(lambda);
    (a - b).powi(2) * (1.0 - lambda * lambda)
        / (2.0 * (r - a).powf(2.0 - lambda) * (r - b).powf(2.0 - lambda) * br * br)
}

/// Compares the engine scalar curvature against a closed form at sampled points.
pub fn curvature_scalar_check(
    inst: &SolutionInstance,
    printed: bool,
    n_points: usize,
    seed: u64,
    tol: f64,
) -> Result<ResidualReport> {
    let (lambda, a, b) = match inst.doc {
        SolutionDoc::Penney { lambda, a, b, .. } => (lambda, a, b),
        SolutionDoc::ReissnerNordstrom { m, q } => {
            let (a, b) = rn_roots(m, q)?;
            (1.0, a, b)
        }
        _ => return Err(GeomError::Invalid("curvature check applies to the Penney family".into())),
    };
    let geo = Geometry::riemannian(inst.chart.clone());
    let points = inst.sampling.points(n_points, seed);
    let name = if printed { "scalar curvature (printed closed form)" } else { "scalar curvature (closed form)" };
    sample_residual(name, &points, seed, tol, |p| {
        let pg = geo.at(p, 2)?;
        let engine = pg.lc_scalar_curvature().val();
        let want = if printed {
            penney_scalar_curvature_printed(lambda, a, b, p[1])
        } else {
            penney_scalar_curvature(lambda, a, b, p[1])
        };
        let r = pg.lc_curvature();
        let scale = r.iter().map(|f| f.values().max_abs()).fold(0.0, f64::max).max(engine.abs()).max(want.abs());
        Ok(((engine - want).abs(), scale))
    })
}

fn penney_reports(ctx: &Ctx<'_>) -> Result<Vec<ResidualReport>> {
    let inst = ctx.inst;
    let f = inst.maxwell.clone().ok_or_else(|| GeomError::MissingField("F".into()))?;
    let psi = inst.psi.clone().ok_or_else(|| GeomError::MissingField("psi".into()))?;
    let mut out = vec![einstein_report(ctx, "einstein: k G + tau[F] + tau[psi]")?];
    out.push(ctx.run("maxwell: d*F", 2, |fr| {
        let sf = f.at(fr)?.hodge(fr.eta());
        let mut b = Balance::new(4, 3, 1);
        b.add_one(&fr.d(&sf)).widen(sf.max_abs());
        Ok(b.finish())
    })?);
    out.push(ctx.run("scalar: d*dpsi", 2, |fr| {
        let sd = fr.d_scalar(&psi.jet(&fr.point, 2)?).hodge(fr.eta());
        let mut b = Balance::new(4, 4, 1);
        b.add_one(&fr.d(&sd)).widen(sd.max_abs());
        Ok(b.finish())
    })?);
    out.push(curvature_scalar_check(inst, false, ctx.points.len(), ctx.seed, ctx.tol)?);
    Ok(out)
}

/// Runs every equation the instance claims to satisfy.
pub fn verify(inst: &SolutionInstance, tolerance: f64, n_points: usize, seed: u64) -> Result<VerifyBundle> {
    let ctx = Ctx { inst, points: inst.sampling.points(n_points, seed), seed, tol: tolerance };
    let mut reports: Vec<ResidualReport> = inst.constraints.iter().map(|c| c.report(tolerance)).collect();
    match inst.doc {
        SolutionDoc::Flat { .. } | SolutionDoc::Schwarzschild { .. } => {
            reports.push(einstein_report(&ctx, "vacuum einstein: G")?);
        }
        SolutionDoc::Melvin { .. } => {
            reports.push(einstein_report(&ctx, "einstein: k G + tau[alpha]")?);
            reports.push(trace_report(&ctx, "proca: d*dQ", false)?);
            reports.extend(weyl_only_reports(&ctx)?);
            let qf = inst.q.clone().ok_or_else(|| GeomError::MissingField("Q".into()))?;
            reports.push(ctx.run("divergence of the Maxwell stress of dQ", 2, |fr| {
                let dq = fr.d(&qf.at(fr)?);
                let tau = tau_maxwell(fr.eta(), &dq);
                let (div, scale) = divergence(fr, &tau);
                Ok((div.iter().map(|x| x.val().abs()).fold(0.0, f64::max), scale))
            })?);
        }
        SolutionDoc::Rosen { k, b1, angle, .. } => {
            reports.push(einstein_report(&ctx, "einstein: k G + tau[alpha]")?);
            reports.push(trace_report(&ctx, "proca: d*dQ", false)?);
            reports.extend(weyl_only_reports(&ctx)?);
            let dq = inst.q.as_ref().ok_or_else(|| GeomError::MissingField("Q".into()))?.d()?;
            let want = 2.0 * k.sqrt() / b1 * angle.sin();
            let yz = crate::exterior::mask_rank(4, 0b1100);
            let comp = dq.comps[yz].clone();
            reports.push(sample_residual(
                "dQ: constant dy^dz part 2 sqrt(k)/b1 sin(angle)",
                &ctx.points,
                seed,
                tolerance,
                |p| {
                    let v = comp.evaluate(p)?;
                    Ok(((v - want).abs(), want.abs().max(v.abs())))
                },
            )?);
        }
        SolutionDoc::DilatonBlackHole { .. } => reports.extend(bh_reports(&ctx)?),
        SolutionDoc::Penney { .. } | SolutionDoc::ReissnerNordstrom { .. } => reports.extend(penney_reports(&ctx)?),
    }
    let pass = reports.iter().all(|r| r.pass);
    Ok(VerifyBundle {
        solution: inst.doc.name().to_string(),
        constants: inst.doc.constants().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        reports,
        findings: inst.findings.clone(),
        horizon: inst.horizon,
        pass,
    })
}

/// Whether any report in the bundle exceeds `threshold` relative residual.
pub fn any_exceeds(bundle: &VerifyBundle, threshold: f64) -> bool {
    bundle.reports.iter().any(|r| !(r.max_rel <= threshold))
}

/// Default documents: one valid instance per solution.
pub fn defaults() -> Vec<SolutionDoc> {
    let k = 1.0;
    let (gamma, beta) = bh_couplings(k);
    vec![
        SolutionDoc::Flat { n: 4 },
        SolutionDoc::Schwarzschild { m: 1.0 },
        SolutionDoc::Melvin { k, alpha: -1.0, c1: 1.0, c2: 0.25, c3: 1.0, c4: 8.0 },
        SolutionDoc::Rosen { k, b1: 1.3, b3: 2.0, angle: 0.7 },
        SolutionDoc::DilatonBlackHole { k, alpha: -1.0, beta, gamma, q: 0.8, b1: 1.5, b2: 0.9 },
        SolutionDoc::Penney { lambda: 0.5, a: 2.0, b: 1.0, q: 1.0 },
        SolutionDoc::ReissnerNordstrom { m: 1.0, q: 1.0 },
    ]
}

/// A `(gamma, beta)` pair satisfying the massless constraint at `n = 4`.
pub fn bh_couplings(k: f64) -> (f64, f64) {
    let gamma = 0.5 * k;
    let beta = crate::cartan::proca::tuned_beta(4, k, gamma).expect("nondegenerate");
    (gamma, beta)
}

/// A constant whose 5% perturbation must break each default instance.
pub fn control_constant(doc: &SolutionDoc) -> Option<&'static str> {
    match doc {
        SolutionDoc::Flat { .. } => None,
        SolutionDoc::Schwarzschild { .. } => None,
        SolutionDoc::Melvin { .. } => Some("c4"),
        SolutionDoc::Rosen { .. } => Some("b1"),
        SolutionDoc::DilatonBlackHole { .. } => Some("q"),
        SolutionDoc::Penney { .. } => Some("q"),
        SolutionDoc::ReissnerNordstrom { .. } => Some("q"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documents_round_trip_through_json() {
        for d in defaults() {
            let s = serde_json::to_string(&d).unwrap();
            let back: SolutionDoc = serde_json::from_str(&s).unwrap();
            assert_eq!(back, d);
        }
    }

    #[test]
    fn penney_needs_lambda_in_unit_interval() {
        let d = SolutionDoc::Penney { lambda: 1.5, a: 2.0, b: 1.0, q: 1.0 };
        assert!(matches!(instantiate(&d), Err(GeomError::DomainViolation(_))));
    }
}
