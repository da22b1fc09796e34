//! Acceptance run: one PASS/FAIL line per criterion, with the individual
//! checks indented below it.
//!
//! Checks marked as known red are unattainable as stated. They print FAIL
//! without failing the run; the run fails if one of them starts passing.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use nrgeom::autoparallel::{
    autoparallel_rhs, convergence_order, geodesic_rhs, no_force_analysis, Autoparallel, CurveState,
};
use nrgeom::cartan::cases::{project_traceless_two_forms, CartanRhs, Shape};
use nrgeom::cartan::conformal::ConformalModel;
use nrgeom::cartan::proca::{constraint, tuned_beta, ProcaModel};
use nrgeom::cartan::{closed_form, solve_general, SourceTensor};
use nrgeom::catalog::{
    any_exceeds, build, control_constant, curvature_scalar_check, defaults, instantiate, negative_control,
    penney_scalar_curvature, penney_scalar_curvature_printed, verify, SolutionDoc,
};
use nrgeom::exterior::{binomial, lorentzian, lowered_basis1, Chart, Form, FormField};
use nrgeom::fieldeq::{
    axion_printed_distortion_residual, cancellation_residual, conformal_reduction_residual, decomposition_residual,
    modified_maxwell_reports, proca_stresses, AxionModel, ModifiedSystem, QqffModel, ResidualReport,
};
use nrgeom::geometry::{
    cartan_operator, nonmetricity_of_distortion, torsion_of_distortion, torsion_trace, traceless_nonmetricity,
    traceless_torsion, weyl_form, Distortion, Geometry,
};
use nrgeom::sampling::{random_smooth_chart, random_smooth_form, random_smooth_scalar, SamplingBox};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 42;

struct Check {
    name: String,
    pass: bool,
    detail: String,
    known_red: bool,
}

struct Criterion {
    id: u32,
    title: &'static str,
    checks: Vec<Check>,
    info: Vec<String>,
    start: Instant,
    budget_s: f64,
}

impl Criterion {
    fn new(id: u32, title: &'static str, budget_s: f64) -> Self {
        Criterion { id, title, checks: Vec::new(), info: Vec::new(), start: Instant::now(), budget_s }
    }

    fn check(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), pass, detail: detail.into(), known_red: false });
    }

    fn known_red(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), pass, detail: detail.into(), known_red: true });
    }

    fn below(&mut self, name: impl Into<String>, value: f64, tol: f64) {
        self.check(name, value <= tol, format!("{value:.2e} <= {tol:.0e}"));
    }

    fn above(&mut self, name: impl Into<String>, value: f64, threshold: f64) {
        self.check(name, value > threshold, format!("{value:.2e} > {threshold:.0e}"));
    }

    fn report(&mut self, r: &ResidualReport) {
        let detail =
            format!("rel {:.2e}, abs {:.2e}, tol {:.0e}, {} points", r.max_rel, r.max_abs, r.tolerance, r.n_points);
        self.check(r.equation.clone(), r.pass, detail);
    }

    fn note(&mut self, s: impl Into<String>) {
        self.info.push(s.into());
    }

    /// Prints the block; returns the number of unexpected outcomes.
    fn finish(mut self) -> usize {
        let secs = self.start.elapsed().as_secs_f64();
        self.check("runtime", secs <= self.budget_s, format!("{secs:.2} s <= {} s", self.budget_s));
        let pass = self.checks.iter().all(|c| c.pass);
        println!("criterion {} {}: {}", self.id, self.title, if pass { "PASS" } else { "FAIL" });
        let mut unexpected = 0;
        for c in &self.checks {
            let tag = match (c.pass, c.known_red) {
                (true, false) => "pass",
                (false, false) => {
                    unexpected += 1;
                    "FAIL"
                }
                (false, true) => "FAIL (known red)",
                (true, true) => {
                    unexpected += 1;
                    "pass (expected red)"
                }
            };
            println!("    [{tag}] {}: {}", c.name, c.detail);
        }
        for i in &self.info {
            println!("    [info] {i}");
        }
        unexpected
    }
}

fn random_form(n: usize, p: usize, r: &mut ChaCha8Rng) -> Form<f64> {
    Form::from_components(n, p, (0..binomial(n, p)).map(|_| r.gen_range(-1.0..1.0)).collect())
}

/// `i_k f`, zero on 0-forms.
fn ip(f: &Form<f64>, k: usize) -> Form<f64> {
    if f.degree() == 0 {
        Form::zero(f.dim(), 0)
    } else {
        f.interior(k)
    }
}

fn max_diff(a: &[Form<f64>], b: &[Form<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).max_abs()).fold(0.0, f64::max)
}

fn exterior_identities() -> Criterion {
    let mut c = Criterion::new(1, "exterior algebra identities", 10.0);
    let cases = 100;
    let mut r = ChaCha8Rng::seed_from_u64(SEED);
    for n in [3usize, 4, 5] {
        let eta = lorentzian(n);
        let (mut dd, mut anti, mut deriv, mut star_i, mut sym) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
        let chart = random_smooth_chart(n, SEED + n as u64);
        let points = SamplingBox::cube(n, -1.0, 1.0).points(cases, SEED);
        for (i, x) in points.iter().enumerate() {
            let p = r.gen_range(0..n - 1);
            let w = random_smooth_form(n, p, 1000 * n as u64 + i as u64);
            let fr = chart.at(x, 2).expect("random chart is regular");
            let f = w.at(&fr).expect("smooth form");
            dd = dd.max(fr.d(&fr.d(&f)).max_abs());
        }
        for _ in 0..cases {
            let p = r.gen_range(0..=n);
            let q = r.gen_range(0..=n - p);
            let a = random_form(n, p, &mut r);
            let b = random_form(n, q, &mut r);
            let sign = if (p * q).is_multiple_of(2) { 1.0 } else { -1.0 };
            anti = anti.max((&a.wedge(&b) - &b.wedge(&a).scale(sign)).max_abs());
            let k = r.gen_range(0..n);
            let sp = if p.is_multiple_of(2) { 1.0 } else { -1.0 };
            if p + q > 0 {
                let lhs = ip(&a.wedge(&b), k);
                let mut rhs = Form::zero(n, p + q - 1);
                if p > 0 {
                    rhs.add_assign(&ip(&a, k).wedge(&b));
                }
                if q > 0 {
                    rhs.axpy(sp, &a.wedge(&ip(&b, k)));
                }
                deriv = deriv.max((&lhs - &rhs).max_abs());
            }
            if p < n {
                let ea: Form<f64> = lowered_basis1(n, &eta, k);
                star_i = star_i.max((&a.wedge(&ea).hodge(&eta) - &a.hodge(&eta).interior(k)).max_abs());
            }
            let b2 = random_form(n, p, &mut r);
            sym = sym.max((&a.wedge(&b2.hodge(&eta)) - &b2.wedge(&a.hodge(&eta))).max_abs());
        }
        c.below(format!("n={n} d d w = 0 ({cases} cases)"), dd, 1e-10);
        c.below(format!("n={n} a ^ b = (-1)^pq b ^ a ({cases} cases)"), anti, 1e-10);
        c.below(format!("n={n} i_a antiderivation ({cases} cases)"), deriv, 1e-10);
        c.below(format!("n={n} *(phi ^ e_a) = i_a *phi ({cases} cases)"), star_i, 1e-10);
        c.below(format!("n={n} a ^ *b = b ^ *a ({cases} cases)"), sym, 1e-10);
    }
    c
}

fn random_source(n: usize, r: &mut ChaCha8Rng) -> SourceTensor<f64> {
    let eta = lorentzian(n);
    let mut f: Vec<f64> = (0..n * n * n).map(|_| r.gen_range(-1.0..1.0)).collect();
    for c in 0..n {
        let tr: f64 = (0..n).map(|a| f[(c * n + a) * n + a] * eta[a]).sum();
        for a in 0..n {
            f[(c * n + a) * n + a] -= tr / n as f64 * eta[a];
        }
    }
    SourceTensor { n, f }
}

/// Least-squares distortion of the Cartan equation from its `n^3` columns.
fn dense_solve(eta: &[f64], forms: &[Form<f64>]) -> (Vec<Form<f64>>, f64) {
    let n = eta.len();
    let flat = |fs: &[Form<f64>]| -> Vec<f64> { fs.iter().flat_map(|f| f.components().to_vec()).collect() };
    let rhs = DVector::from_vec(flat(forms));
    let m = n * n * n;
    let mut a = DMatrix::<f64>::zeros(rhs.len(), m);
    for k in 0..m {
        let mut lam = vec![Form::<f64>::zero(n, 1); n * n];
        lam[k / n].components_mut()[k % n] = 1.0;
        for (i, v) in flat(&cartan_operator(eta, &lam)).into_iter().enumerate() {
            a[(i, k)] = v;
        }
    }
    let x = a.clone().svd(true, true).solve(&rhs, 1e-10).expect("svd solve");
    let resid = (&a * &x - &rhs).amax();
    let lam = (0..n * n).map(|ab| Form::from_components(n, 1, (0..n).map(|d| x[ab * n + d]).collect())).collect();
    (lam, resid)
}

fn cartan_oracle() -> Criterion {
    let mut c = Criterion::new(2, "closed-form Cartan solution against a dense solve", 30.0);
    let mut r = ChaCha8Rng::seed_from_u64(SEED);
    for n in [3usize, 4, 5] {
        let eta = lorentzian(n);
        let (mut worst, mut system) = (0.0f64, 0.0f64);
        for _ in 0..50 {
            let src = random_source(n, &mut r);
            let forms = src.to_forms(&eta);
            let (lam, resid) = dense_solve(&eta, &forms);
            system = system.max(resid);
            let t = torsion_of_distortion(n, &lam);
            let q = nonmetricity_of_distortion(&eta, &lam);
            let mut rel = torsion_trace(&t);
            rel.axpy(-(n as f64 - 1.0) / (2.0 * n as f64), &weyl_form(&eta, &q));
            let sol = closed_form(&eta, &src);
            worst = worst
                .max(max_diff(&traceless_torsion(&t), &sol.torsion_traceless))
                .max(max_diff(&traceless_nonmetricity(&eta, &q), &sol.nonmetricity_traceless))
                .max((&rel - &sol.trace_relation).max_abs());
        }
        c.below(format!("n={n} dense system consistent (50 sources)"), system, 1e-8);
        c.below(format!("n={n} hat T, hat Q and trace relation (50 sources)"), worst, 1e-8);
    }
    c
}

fn recipes(n: usize, r: &mut ChaCha8Rng) -> Vec<CartanRhs<f64>> {
    let eta = lorentzian(n);
    let a = random_form(n, 1, r);
    let a_k = vec![random_form(n, 1, r), random_form(n, 1, r)];
    let a_tuned = (&a_k[0] + &a_k[1]).scale(-(n as f64 - 1.0) / n as f64);
    let a_b: Vec<_> = (0..n).map(|_| random_form(n, 2, r)).collect();
    let mut anti = vec![0.0; n * n * n];
    for ci in 0..n {
        for ai in 0..n {
            for bi in 0..ai {
                let v = r.gen_range(-1.0..1.0);
                anti[(ci * n + ai) * n + bi] = v;
                anti[(ci * n + bi) * n + ai] = -v;
            }
        }
    }
    vec![
        CartanRhs::Zero { n },
        CartanRhs::AntisymLast(SourceTensor { n, f: anti }),
        CartanRhs::EaIb { a_k: a_k.clone() },
        CartanRhs::Diag { a },
        CartanRhs::TracelessTwoForm { a_b: project_traceless_two_forms(&eta, &a_b) },
        CartanRhs::DiagPlusEa { a: a_tuned.clone(), a_k: a_k.clone() },
        CartanRhs::EbIa { a_k: a_k.clone() },
        CartanRhs::DiagPlusEb { a: a_tuned, a_k },
    ]
}

fn case_reproduction() -> Criterion {
    let mut c = Criterion::new(3, "printed Cartan cases", 30.0);
    let mut r = ChaCha8Rng::seed_from_u64(SEED);
    let shapes = recipes(4, &mut r).iter().map(|x| x.shape()).collect::<Vec<Shape>>();
    for (i, shape) in shapes.iter().enumerate() {
        let (mut worst, mut general, mut rejected) = (0.0f64, 0usize, 0usize);
        for n in [3usize, 4, 5] {
            let eta = lorentzian(n);
            for _ in 0..20 {
                let rhs = recipes(n, &mut r).swap_remove(i);
                let forms = rhs.forms(&eta);
                let sol = match solve_general(&eta, &forms, 1e-12) {
                    Ok(s) => {
                        general += 1;
                        s
                    }
                    Err(_) => {
                        rejected += 1;
                        closed_form(&eta, &SourceTensor::from_forms(&eta, &forms))
                    }
                };
                let p = rhs.printed(&eta);
                if let Some(t) = &p.torsion_traceless {
                    worst = worst.max(max_diff(t, &sol.torsion_traceless));
                }
                if let Some(q) = &p.nonmetricity_traceless {
                    worst = worst.max(max_diff(q, &sol.nonmetricity_traceless));
                }
                if let Some(t) = &p.trace_relation {
                    worst = worst.max((t - &sol.trace_relation).max_abs());
                }
            }
        }
        c.below(format!("{shape:?}: printed hat T, hat Q, trace relation (n = 3, 4, 5)"), worst, 1e-8);
        if rejected > 0 {
            c.note(format!(
                "{shape:?}: {rejected} of {} sources violate the trace condition; compared against the unconstrained closed form",
                rejected + general
            ));
        }
    }
    c
}

fn proca(n: usize, k: f64, beta: f64, gamma: f64, beta0: f64) -> ProcaModel {
    ProcaModel { n, k, alpha: 1.0, beta, gamma, epsilon: 0.0, nu: 0.0, beta0 }
}

fn cancellation() -> Criterion {
    let mut c = Criterion::new(4, "cancellation", 120.0);
    let k = 1.0;
    let gamma = 0.5;
    for n in [4usize, 3, 5] {
        let chart = random_smooth_chart(n, SEED);
        let q = random_smooth_form(n, 1, SEED + 1);
        let points = SamplingBox::cube(n, -1.0, 1.0).points(100, SEED);
        let beta = tuned_beta(n, k, gamma).expect("nondegenerate");
        let m = proca(n, k, beta, gamma, 0.0);
        c.below(format!("n={n} tuned constraint residual"), constraint(n, k, beta, gamma).abs(), 1e-12);
        let (_, rep) = cancellation_residual(&m, &chart, &q, &points, SEED, 1e-8).expect("cancellation");
        c.check(
            format!("n={n} tuned beta = {beta:.6}: sum of stresses vanishes"),
            rep.pass,
            format!("rel {:.2e}", rep.max_rel),
        );
        if n == 4 {
            let off = proca(n, k, beta, 1.1 * gamma, 0.0);
            let (_, rep) = cancellation_residual(&off, &chart, &q, &points, SEED, 1e-8).expect("cancellation");
            c.above("n=4 gamma perturbed by 10%", rep.max_rel, 1e-3);
            let beta = 0.3;
            let beta0 = ProcaModel::beta0_closed_form(n, k, beta, gamma).expect("nondegenerate");
            let m = proca(n, k, beta, gamma, beta0);
            let red = m.reduce().expect("reduce");
            let mut worst = 0.0f64;
            for p in &points {
                let fr = chart.at(p, 1).expect("regular");
                let qv = q.at(&fr).expect("smooth").values();
                let eta = fr.eta();
                let sq = qv.hodge(eta);
                let mut sum = vec![Form::zero(n, n - 1); n];
                for fam in proca_stresses(&m, &red, eta, &qv) {
                    for (s, t) in sum.iter_mut().zip(&fam) {
                        s.add_assign(t);
                    }
                }
                for (a, s) in sum.iter().enumerate() {
                    let mut left = qv.wedge(&sq.interior(a));
                    left.add_assign(&qv.interior(a).wedge(&sq));
                    let want = left.scale(-0.5 * beta0);
                    let scale = s.max_abs().max(want.max_abs());
                    worst = worst.max((s - &want).max_abs() / scale);
                }
            }
            c.below(
                format!(
                    "n=4 massive branch beta = 0.3, beta0 = {beta0:.6}: leftover -beta0/2 [Q ^ i_a *Q + i_a Q ^ *Q]"
                ),
                worst,
                1e-8,
            );
        }
    }
    c
}

fn catalog() -> Criterion {
    let mut c = Criterion::new(5, "catalog solutions", 120.0);
    for doc in defaults() {
        let inst = instantiate(&doc).expect("default instance");
        let b = verify(&inst, 1e-8, 100, SEED).expect("verify");
        let worst = b.reports.iter().map(|r| r.max_rel).fold(0.0, f64::max);
        c.check(
            format!("{}: {} residuals at 100 points", b.solution, b.reports.len()),
            b.pass,
            format!("worst rel {worst:.2e}"),
        );
        for r in b.reports.iter().filter(|r| !r.pass) {
            c.note(format!("{}: {} rel {:.2e}", b.solution, r.equation, r.max_rel));
        }
        for f in &b.findings {
            c.note(format!("{} finding: printed `{}`, realized `{}`", b.solution, f.printed, f.realized));
        }
        if let Some(name) = control_constant(&doc) {
            let ctl = negative_control(&doc, name, 1.05).expect("control");
            let nb = verify(&ctl, 1e-8, 100, SEED).expect("verify");
            c.check(format!("{}: {name} x 1.05 breaks a residual beyond 1e-3", b.solution), any_exceeds(&nb, 1e-3), "");
        }
    }

    let printed_melvin = SolutionDoc::Melvin { k: 1.0, alpha: 1.0, c1: 1.0, c2: 0.25, c3: 1.0, c4: 8.0 };
    let inst = build(&printed_melvin, &printed_melvin).expect("build");
    let b = verify(&inst, 1e-8, 100, SEED).expect("verify");
    let einstein = b.reports.iter().find(|r| r.equation.starts_with("einstein")).expect("einstein report");
    c.known_red(
        "melvin with c2 c3 c4^2 = 16 k alpha (alpha = 1, c4 = 8)",
        einstein.pass,
        format!(
            "einstein rel {:.2e}; the printed relation admits no real solution of the field equations",
            einstein.max_rel
        ),
    );

    let rn = instantiate(&SolutionDoc::ReissnerNordstrom { m: 1.0, q: 1.0 }).expect("instance");
    let rep = curvature_scalar_check(&rn, false, 100, SEED, 1e-8).expect("curvature");
    c.check(
        "penney at Lambda = 1: R = 0",
        rep.pass && penney_scalar_curvature(1.0, 2.0, 1.0, 3.0) == 0.0,
        format!("rel {:.2e}", rep.max_rel),
    );
    let penney = defaults().into_iter().find(|d| d.name() == "penney").expect("penney");
    let inst = instantiate(&penney).expect("instance");
    let rep = curvature_scalar_check(&inst, true, 100, SEED, 1e-8).expect("curvature");
    c.check(
        "penney (Lambda = 0.5, a = 2, b = 1): printed scalar curvature",
        rep.pass,
        format!("rel {:.2e}", rep.max_rel),
    );
    let (l, a, bb, r) = (0.8, 1.5, 0.7, 3.0);
    let ratio = penney_scalar_curvature_printed(l, a, bb, r) / penney_scalar_curvature(l, a, bb, r);
    c.note(format!(
        "penney (Lambda = {l}, a = {a}, b = {bb}): printed / true scalar curvature = {ratio:.4} = 1/(a-b)^2"
    ));
    c
}

fn modified_maxwell() -> Criterion {
    let mut c = Criterion::new(6, "modified Maxwell systems", 60.0);
    let chart = random_smooth_chart(4, SEED);
    let a = random_smooth_form(4, 1, SEED + 1);
    let q = random_smooth_form(4, 1, SEED + 2);
    let points = SamplingBox::cube(4, -1.0, 1.0).points(100, SEED);
    let axion = AxionModel { k: 1.3, alpha: -0.7, beta: 0.4 };
    for r in
        modified_maxwell_reports(&ModifiedSystem::Axion(axion), &chart, &a, &q, &points, SEED, 1e-8).expect("axion")
    {
        c.report(&r);
    }
    let qqff = QqffModel { k: 1.3, alpha: -0.7, beta: 0.4, gamma: 0.2 };
    for r in modified_maxwell_reports(&ModifiedSystem::Qqff(qqff), &chart, &a, &q, &points, SEED, 1e-8).expect("qqff") {
        c.report(&r);
    }
    let r = axion_printed_distortion_residual(&axion, &chart, &a, &q, &points, SEED, 1e-8).expect("axion");
    c.note(format!("printed distortion 3/2 i^a i_b(F ^ A): rel {:.2e}; realized coefficient is gamma/2", r.max_rel));
    c
}

fn conformal() -> Criterion {
    let mut c = Criterion::new(7, "conformal coupling", 60.0);
    let m = ConformalModel { n: 4, k: 1.0, alpha: 0.3, beta: 0.0 };
    c.below("beta' = 6 at n = 4, k = 1, beta = 0", (m.beta_prime_printed() - 6.0).abs(), 1e-12);
    for n in [3usize, 4, 5] {
        let b = ConformalModel::beta_eliminating_kinetic(n, 1.0);
        let shifted = ConformalModel { n, beta: b, ..m }.beta_prime_printed();
        c.below(format!("n={n} beta = -4k(n-1)/(n-2) = {b:.4} zeroes beta'"), shifted.abs(), 1e-12);
        let model = ConformalModel { n, ..m };
        let chart = random_smooth_chart(n, SEED);
        let psi = random_smooth_scalar(n, SEED + 1);
        let q = random_smooth_form(n, 1, SEED + 2);
        let points = SamplingBox::cube(n, -1.0, 1.0).points(100, SEED);
        let geo = model.geometry(chart.clone(), psi.clone(), q.clone());
        let r = decomposition_residual(&geo, &points, SEED, 1e-8).expect("decomposition");
        c.check(
            format!("n={n} R = R_lc + i_a i_c(D_lc lambda^ca + lambda^c_d ^ lambda^da)"),
            r.pass,
            format!("rel {:.2e}", r.max_rel),
        );
        let red = conformal_reduction_residual(&model, &chart, &psi, &q, &points, SEED, 1e-8).expect("reduction");
        c.note(format!(
            "n={n} realized reduction k f (G - G_lc) = -2k Y[f] + tau[beta' - beta] with beta' = beta - 4k(n-1)/(n-2) alpha psi A: rel {:.2e}",
            red.max_rel
        ));
    }
    c
}

fn schwarzschild(m: f64) -> Chart {
    instantiate(&SolutionDoc::Schwarzschild { m }).expect("instance").chart
}

fn autoparallels() -> Criterion {
    let mut c = Criterion::new(8, "autoparallels", 60.0);
    let chart = schwarzschild(1.0);
    let zero = Geometry {
        chart: chart.clone(),
        distortion: Distortion::recipe(|fr| {
            let n = fr.dim();
            Ok(vec![Form::zero(n, 1); n * n])
        }),
    };
    let s = CurveState::new(0.0, vec![0.0, 6.5, 1.2, 0.3], vec![1.1, 0.3, -0.05, 0.02]).expect("state");
    let g = geodesic_rhs(&chart, &s).expect("rhs");
    c.check(
        "lambda = 0 gives the geodesic right-hand side bit for bit",
        autoparallel_rhs(&zero, &s).expect("rhs") == g,
        "",
    );

    let gamma = 0.3;
    let model = proca(4, 1.0, tuned_beta(4, 1.0, gamma).expect("nondegenerate"), gamma, 0.0);
    let red = model.reduce().expect("reduce");
    let r = nrgeom::expr::ScalarExpr::coord(1, "r");
    let q = FormField::coord_one_form(vec![
        r.powf(-1.0).scale(0.4),
        nrgeom::expr::ScalarExpr::cst(0.1),
        nrgeom::expr::ScalarExpr::cst(0.0),
        r.scale(0.02),
    ]);
    let geo =
        Geometry { chart, distortion: Distortion::recipe(move |fr| Ok(model.distortion(&red, fr.eta(), &q.at(fr)?))) };
    let s = CurveState::new(0.0, vec![0.0, 8.0, 1.3, 0.2], vec![1.1, 0.2, 0.05, 0.04]).expect("state");
    let order = convergence_order(&Autoparallel(&geo), &s, 0.2, 50).expect("integration");
    c.check("RK4 convergence order on a Proca geometry", order >= 3.8, format!("{order:.3} >= 3.8"));

    for n in 3..=6 {
        let a = no_force_analysis(n, 1.0).expect("analysis");
        let nf = n as f64;
        let exact = (a.beta - 0.25).abs() < 1e-14 && (a.gamma + (nf - 1.0) / (8.0 * nf)).abs() < 1e-14;
        c.check(
            format!("n={n} no-force constants beta = k/4, gamma = -k(n-1)/(8n)"),
            exact,
            format!("beta {:.6}, gamma {:.6}", a.beta, a.gamma),
        );
        c.check(
            format!("n={n} no-force constants violate the massless constraint"),
            a.constraint_residual.abs() > 1e-6 && !a.compatible,
            format!("constraint residual {:.4e}", a.constraint_residual),
        );
    }
    c
}

fn determinism() -> Criterion {
    let mut c = Criterion::new(9, "determinism", 60.0);
    for doc in defaults() {
        let inst = instantiate(&doc).expect("instance");
        let a = serde_json::to_string(&verify(&inst, 1e-8, 20, 7).expect("verify")).expect("json");
        let b = serde_json::to_string(&verify(&inst, 1e-8, 20, 7).expect("verify")).expect("json");
        c.check(format!("{}: identical reports for seed 7", doc.name()), a == b, "");
    }
    let chart = random_smooth_chart(4, 7);
    let q = random_smooth_form(4, 1, 8);
    let points = SamplingBox::cube(4, -1.0, 1.0).points(20, 7);
    let m = proca(4, 1.0, tuned_beta(4, 1.0, 0.5).expect("nondegenerate"), 0.5, 0.0);
    let run = || {
        serde_json::to_string(&cancellation_residual(&m, &chart, &q, &points, 7, 1e-8).expect("run").1).expect("json")
    };
    c.check("cancellation: identical reports for seed 7", run() == run(), "");
    c
}

fn main() {
    let criteria: [fn() -> Criterion; 9] = [
        exterior_identities,
        cartan_oracle,
        case_reproduction,
        cancellation,
        catalog,
        modified_maxwell,
        conformal,
        autoparallels,
        determinism,
    ];
    let mut unexpected = 0;
    for f in criteria {
        unexpected += f().finish();
    }
    if unexpected > 0 {
        println!("acceptance: {unexpected} unexpected outcome(s)");
        std::process::exit(1);
    }
    println!("acceptance: all outcomes as expected");
}
