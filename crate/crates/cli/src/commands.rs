//! Subcommand implementations. Each returns whether every check passed.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use nrgeom::autoparallel::{integrate, paired_csv, to_csv, Autoparallel, CurveState, Geodesic};
use nrgeom::cartan::proca::{constraint, ProcaModel, ProcaReduction};
use nrgeom::cartan::{closed_form, SolutionStatus, SourceTensor};
use nrgeom::catalog::{build, negative_control, verify as verify_instance, SolutionDoc, VerifyBundle};
use nrgeom::exterior::Form;
use nrgeom::fieldeq::{cancellation_residual, ResidualReport};
use nrgeom::geometry::cartan_operator;
use nrgeom::sampling::{random_smooth_chart, random_smooth_form, SamplingBox};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::docs::TraceDoc;
use crate::{Common, Format};

/// Report wrapper. `timestamp` is the only field that varies between
/// identical runs.
#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    input: String,
    seed: u64,
    tolerance: f64,
    n_points: usize,
    timestamp: u64,
    pass: bool,
    result: T,
}

fn read_doc<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(common: &Common, text: &str) -> Result<()> {
    match &common.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn envelope_json<T: Serialize>(command: &str, path: &Path, common: &Common, pass: bool, result: T) -> Result<String> {
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let env = Envelope {
        command,
        input: path.display().to_string(),
        seed: common.seed,
        tolerance: common.tol,
        n_points: common.points,
        timestamp,
        pass,
        result,
    };
    Ok(serde_json::to_string_pretty(&env)? + "\n")
}

fn reports_csv(reports: &[ResidualReport]) -> String {
    let mut out = String::from("equation,max_abs,max_rel,tolerance,pass\n");
    for r in reports {
        writeln!(
            out,
            "\"{}\",{:e},{:e},{:e},{}",
            r.equation.replace('"', "'"),
            r.max_abs,
            r.max_rel,
            r.tolerance,
            r.pass
        )
        .unwrap();
    }
    out
}

fn check_common(common: &Common) -> Result<()> {
    if !(common.tol > 0.0 && common.tol.is_finite()) {
        bail!("--tol must be positive");
    }
    if common.points == 0 {
        bail!("--points must be at least 1");
    }
    Ok(())
}

pub fn verify(path: &Path, common: &Common) -> Result<bool> {
    check_common(common)?;
    let doc: SolutionDoc = read_doc(path)?;
    let inst = build(&doc, &doc)?;
    let bundle = verify_instance(&inst, common.tol, common.points, common.seed)?;
    let pass = bundle.pass;
    let text = match common.format.unwrap_or(Format::Json) {
        Format::Json => envelope_json("verify", path, common, pass, &bundle)?,
        Format::Csv => reports_csv(&bundle.reports),
    };
    emit(common, &text)?;
    Ok(pass)
}

#[derive(Serialize)]
struct CancellationResult {
    model: ProcaModel,
    reduction: ProcaReduction,
    underdetermined: bool,
    /// `4n^2(n-2)(beta - beta0)k + (n-1)^2(n-2)gamma' k + 8(1-n)gamma'(beta - beta0)`.
    constraint: f64,
    background: String,
    cancellation: ResidualReport,
}

fn background(n: usize, seed: u64) -> (nrgeom::exterior::Chart, nrgeom::exterior::FormField, Vec<Vec<f64>>) {
    let chart = random_smooth_chart(n, seed);
    let q = random_smooth_form(n, 1, seed.wrapping_add(1));
    (chart, q, SamplingBox::cube(n, -1.0, 1.0).points(1, seed))
}

pub fn cancellation(path: &Path, common: &Common) -> Result<bool> {
    check_common(common)?;
    let model: ProcaModel = read_doc(path)?;
    let (chart, q, _) = background(model.n, common.seed);
    let points = SamplingBox::cube(model.n, -1.0, 1.0).points(common.points, common.seed);
    let (reduction, rep) = cancellation_residual(&model, &chart, &q, &points, common.seed, common.tol)?;
    let pass = rep.pass;
    let result = CancellationResult {
        model,
        reduction,
        underdetermined: reduction.status == SolutionStatus::Underdetermined,
        constraint: constraint(model.n, model.k, model.beta - model.beta0, reduction.gamma_prime),
        background: format!("random smooth coframe and Weyl form, seed {}", common.seed),
        cancellation: rep,
    };
    let text = match common.format.unwrap_or(Format::Json) {
        Format::Json => envelope_json("cancellation", path, common, pass, &result)?,
        Format::Csv => reports_csv(std::slice::from_ref(&result.cancellation)),
    };
    emit(common, &text)?;
    Ok(pass)
}

#[derive(Serialize)]
struct CartanDump {
    model: ProcaModel,
    reduction: ProcaReduction,
    point: Vec<f64>,
    status: SolutionStatus,
    weyl: Vec<f64>,
    /// `hat T^a`, one row per `a`.
    torsion_traceless: Vec<Vec<f64>>,
    /// `hat Q_ab`, row `a*n+b`.
    nonmetricity_traceless: Vec<Vec<f64>>,
    trace_relation: Vec<f64>,
    /// `lambda^a_b`, row `a*n+b`.
    distortion: Vec<Vec<f64>>,
    /// Relative residual of `D *(e^a ^ e_b) = F^a_b` for the returned distortion.
    round_trip: f64,
}

fn rows(forms: &[Form<f64>]) -> Vec<Vec<f64>> {
    forms.iter().map(|f| f.components().to_vec()).collect()
}

pub fn cartan_solve(path: &Path, common: &Common) -> Result<bool> {
    check_common(common)?;
    let model: ProcaModel = read_doc(path)?;
    let reduction = model.reduce()?;
    let (chart, q, points) = background(model.n, common.seed);
    let point = points[0].clone();
    let fr = chart.at(&point, 1)?;
    let eta = fr.eta().to_vec();
    let qv = q.at(&fr)?.values();
    let source = model.cartan_source(&reduction, &eta, &qv);
    let sol = closed_form(&eta, &SourceTensor::from_forms(&eta, &source));
    let lam = sol.distortion(&eta, &qv);
    let back = cartan_operator(&eta, &lam);
    let diff = back.iter().zip(&source).map(|(a, b)| (a - b).max_abs()).fold(0.0, f64::max);
    let scale = source.iter().chain(&back).map(|f| f.max_abs()).fold(0.0, f64::max);
    let round_trip = if diff == 0.0 { 0.0 } else { diff / scale };
    let pass = round_trip <= common.tol;
    let dump = CartanDump {
        model,
        reduction,
        point,
        status: sol.status,
        weyl: qv.components().to_vec(),
        torsion_traceless: rows(&sol.torsion_traceless),
        nonmetricity_traceless: rows(&sol.nonmetricity_traceless),
        trace_relation: sol.trace_relation.components().to_vec(),
        distortion: rows(&lam),
        round_trip,
    };
    if common.format == Some(Format::Csv) {
        bail!("cartan-solve writes JSON only");
    }
    emit(common, &envelope_json("cartan-solve", path, common, pass, &dump)?)?;
    Ok(pass)
}

#[derive(Serialize)]
struct TraceResult<'a> {
    doc: &'a TraceDoc,
    left_domain: Option<String>,
    states: &'a [CurveState],
    deviation: Option<Vec<f64>>,
}

pub fn trace(path: &Path, common: &Common) -> Result<bool> {
    let doc: TraceDoc = read_doc(path)?;
    let geo = doc.geometry()?;
    let start = CurveState::new(0.0, doc.start.x.clone(), doc.start.v.clone())?;
    let traj = integrate(&Autoparallel(&geo), &start, doc.step, doc.steps)?;
    if let Some(e) = &traj.left_domain {
        eprintln!("warning: {e}");
    }
    let reference =
        if doc.paired { Some(integrate(&Geodesic(&geo.chart), &start, doc.step, doc.steps)?) } else { None };
    let text = match common.format.unwrap_or(Format::Csv) {
        Format::Csv => match &reference {
            Some(r) => paired_csv(&traj, r),
            None => to_csv(&traj),
        },
        Format::Json => {
            let deviation = reference.as_ref().map(|r| {
                traj.states
                    .iter()
                    .zip(&r.states)
                    .map(|(a, b)| a.x.iter().zip(&b.x).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt())
                    .collect()
            });
            let result = TraceResult {
                doc: &doc,
                left_domain: traj.left_domain.as_ref().map(|e| e.to_string()),
                states: &traj.states,
                deviation,
            };
            envelope_json("trace", path, common, true, &result)?
        }
    };
    emit(common, &text)?;
    Ok(true)
}

#[derive(Serialize)]
struct SweepRow {
    value: f64,
    factor: f64,
    max_rel: Option<f64>,
    pass: bool,
    error: Option<String>,
}

fn sweep_row(doc: &SolutionDoc, constant: &str, base: f64, value: f64, common: &Common) -> SweepRow {
    let factor = value / base;
    let run = || -> nrgeom::Result<VerifyBundle> {
        let inst = negative_control(doc, constant, factor)?;
        verify_instance(&inst, common.tol, common.points, common.seed)
    };
    match run() {
        Ok(b) => SweepRow {
            value,
            factor,
            max_rel: Some(b.reports.iter().map(|r| r.max_rel).fold(0.0, f64::max)),
            pass: b.pass,
            error: None,
        },
        Err(e) => SweepRow { value, factor, max_rel: None, pass: false, error: Some(e.to_string()) },
    }
}

pub fn sweep(path: &Path, constant: &str, values: &[f64], common: &Common) -> Result<bool> {
    check_common(common)?;
    let doc: SolutionDoc = read_doc(path)?;
    let base = doc
        .constants()
        .into_iter()
        .find(|(k, _)| *k == constant)
        .map(|(_, v)| v)
        .with_context(|| format!("{} has no constant `{constant}`", doc.name()))?;
    if base == 0.0 {
        bail!("constant `{constant}` is zero; values cannot be expressed as factors");
    }
    let rows: Vec<SweepRow> = values.iter().map(|&v| sweep_row(&doc, constant, base, v, common)).collect();
    let text = match common.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut out = format!("{constant},factor,max_rel,pass\n");
            for r in &rows {
                let rel = r.max_rel.map_or_else(|| "nan".to_string(), |x| format!("{x:e}"));
                writeln!(out, "{:.16e},{:.16e},{rel},{}", r.value, r.factor, r.pass).unwrap();
            }
            out
        }
        Format::Json => envelope_json("sweep", path, common, true, &rows)?,
    };
    emit(common, &text)?;
    Ok(true)
}
