use std::f64::consts::PI;

use nalgebra::DMatrix;
use nrgeom::autoparallel::*;
use nrgeom::cartan::proca::{tuned_beta, A3Choice, ProcaModel};
use nrgeom::catalog::{defaults, instantiate, weyl_geometry, SolutionDoc};
use nrgeom::expr::ScalarExpr;
use nrgeom::exterior::{Chart, Form, FormField};
use nrgeom::geometry::{Distortion, Geometry};
use nrgeom::jet::Jet;
use nrgeom::sampling::random_smooth_chart;

fn schwarzschild(m: f64) -> Chart {
    instantiate(&SolutionDoc::Schwarzschild { m }).unwrap().chart
}

/// `x'' = -Gamma^mu_nu_rho v^nu v^rho` from `g = E^T eta E`.
fn christoffel_rhs(chart: &Chart, x: &[f64], v: &[f64]) -> Vec<f64> {
    let fr = chart.at(x, 1).unwrap();
    let n = x.len();
    let eta = fr.eta();
    let g: Vec<Vec<Jet>> = (0..n)
        .map(|mu| {
            (0..n)
                .map(|nu| {
                    let mut s = Jet::cst(0.0);
                    for a in 0..n {
                        s += fr.e[a][mu] * fr.e[a][nu] * Jet::cst(eta[a]);
                    }
                    s
                })
                .collect()
        })
        .collect();
    let gm = DMatrix::from_fn(n, n, |i, j| g[i][j].val());
    let ginv = gm.try_inverse().unwrap();
    let mut out = vec![0.0; n];
    for (mu, o) in out.iter_mut().enumerate() {
        for s in 0..n {
            for nu in 0..n {
                for rho in 0..n {
                    let gam = 0.5 * ginv[(mu, s)] * (g[s][rho].d1(nu) + g[s][nu].d1(rho) - g[nu][rho].d1(s));
                    *o -= gam * v[nu] * v[rho];
                }
            }
        }
    }
    out
}

fn proca_geometry(chart: Chart) -> (Geometry, ProcaModel) {
    let gamma = 0.3;
    let model = ProcaModel {
        n: 4,
        k: 1.0,
        alpha: 1.0,
        beta: tuned_beta(4, 1.0, gamma).unwrap(),
        gamma,
        epsilon: 0.0,
        nu: 0.0,
        beta0: 0.0,
    };
    let r = ScalarExpr::coord(1, "r");
    let q = FormField::coord_one_form(vec![
        r.powf(-1.0).scale(0.4),
        ScalarExpr::cst(0.1),
        ScalarExpr::cst(0.0),
        r.scale(0.02),
    ]);
    let red = model.reduce().unwrap();
    let dist = Distortion::recipe(move |fr| Ok(model.distortion(&red, fr.eta(), &q.at(fr)?)));
    (Geometry { chart, distortion: dist }, model)
}

fn start(x: &[f64], v: &[f64]) -> CurveState {
    CurveState::new(0.0, x.to_vec(), v.to_vec()).unwrap()
}

#[test]
fn geodesic_rhs_matches_christoffel_symbols() {
    let charts =
        [(schwarzschild(1.0), vec![0.3, 7.0, 1.1, 0.4]), (random_smooth_chart(4, 11), vec![0.1, -0.2, 0.3, 0.05])];
    for (chart, x) in charts {
        let v = [1.3, -0.2, 0.07, 0.11];
        let got = geodesic_rhs(&chart, &start(&x, &v)).unwrap();
        let want = christoffel_rhs(&chart, &x, &v);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() <= 1e-10 * (1.0 + w.abs()), "{got:?} vs {want:?}");
        }
    }
}

#[test]
fn vanishing_distortion_gives_the_geodesic_rhs_exactly() {
    let chart = schwarzschild(1.0);
    let zero = Geometry {
        chart: chart.clone(),
        distortion: Distortion::recipe(|fr| {
            let n = fr.dim();
            Ok(vec![Form::zero(n, 1); n * n])
        }),
    };
    let riem = Geometry::riemannian(chart.clone());
    let s = start(&[0.0, 6.5, 1.2, 0.3], &[1.1, 0.3, -0.05, 0.02]);
    let g = geodesic_rhs(&chart, &s).unwrap();
    assert_eq!(autoparallel_rhs(&zero, &s).unwrap(), g);
    assert_eq!(autoparallel_rhs(&riem, &s).unwrap(), g);
}

#[test]
fn proca_force_matches_three_form_expression() {
    let (geo, model) = proca_geometry(schwarzschild(1.0));
    let red = model.reduce().unwrap();
    let x = [0.2, 5.0, 1.0, 0.5];
    let pg = geo.at(&x, 1).unwrap();
    let eta = pg.eta().to_vec();
    let qv = pg.weyl().values();
    for u in [[1.2, 0.3, -0.4, 0.1], [1.0, 0.6, 0.0, 0.8]] {
        let force = frame_force(&pg.lambda, &u);
        let (a1, a2, a3) = model.a_forms(&red, &qv, A3Choice::Consistent);
        let want = three_form_force(&eta, &a1, &a2, &a3, &u);
        for (f, w) in force.iter().zip(&want) {
            assert!((f + w).abs() < 1e-12, "{force:?} vs {want:?}");
        }
        let (a1, a2, a3) = model.a_forms(&red, &qv, A3Choice::NMinusOneOverTwoN);
        let other = three_form_force(&eta, &a1, &a2, &a3, &u);
        assert!(force.iter().zip(&other).any(|(f, w)| (f + w).abs() > 1e-3));
    }
    // on a null vector only the u (A4 u) term survives
    let u = [1.0, 0.6, 0.0, 0.8];
    let (a1, a2, a3) = model.a_forms(&red, &qv, A3Choice::Consistent);
    let on = |f: &Form<f64>| f.components().iter().zip(&u).map(|(x, y)| x * y).sum::<f64>();
    let a4 = on(&a3) + 4.0 * on(&a1) - 2.0 * on(&a2);
    let force = frame_force(&pg.lambda, &u);
    for (f, ua) in force.iter().zip(&u) {
        assert!((f + ua * a4 / 8.0).abs() < 1e-12);
    }
}

#[test]
fn flat_chart_gives_straight_lines() {
    let chart = Chart::flat(4);
    let geo = Geometry::riemannian(chart);
    let s = start(&[0.1, 0.2, -0.3, 0.4], &[1.0, 0.25, -0.5, 0.125]);
    let t = integrate(&Autoparallel(&geo), &s, 0.01, 1000).unwrap();
    let end = t.last();
    for i in 0..4 {
        assert!((end.x[i] - (s.x[i] + 10.0 * s.v[i])).abs() <= 1e-12);
        assert!((end.v[i] - s.v[i]).abs() <= 1e-12);
    }
}

#[test]
fn circular_orbit_keeps_its_radius() {
    let (m, r) = (0.01, 0.1);
    let chart = schwarzschild(m);
    let ut = 1.0 / (1.0 - 3.0 * m / r).sqrt();
    let uphi = (m / (r * r * r)).sqrt() * ut;
    let period = 2.0 * PI / uphi;
    let h = 1e-3;
    let steps = (period / h).ceil() as usize;
    let t = integrate(&Geodesic(&chart), &start(&[0.0, r, PI / 2.0, 0.0], &[ut, 0.0, 0.0, uphi]), h, steps).unwrap();
    let drift = t.states.iter().map(|s| (s.x[1] - r).abs()).fold(0.0, f64::max);
    assert!(drift <= 1e-6, "radius drift {drift:e}");
    assert!(t.last().x[3] >= 2.0 * PI);
}

#[test]
fn speed_is_conserved_on_a_levi_civita_geometry() {
    let chart = schwarzschild(1.0);
    let s = start(&[0.0, 10.0, PI / 2.0, 0.0], &[1.2, -0.1, 0.0, 0.04]);
    let t = integrate(&Geodesic(&chart), &s, 0.01, 10_000).unwrap();
    assert!(t.left_domain.is_none());
    let g0 = speed_squared(&chart, &s).unwrap();
    for st in t.states.iter().step_by(500) {
        assert!((speed_squared(&chart, st).unwrap() - g0).abs() <= 1e-8);
    }
}

#[test]
fn fourth_order_convergence_on_a_curved_geometry() {
    let (geo, _) = proca_geometry(schwarzschild(1.0));
    let s = start(&[0.0, 8.0, 1.3, 0.2], &[1.1, 0.2, 0.05, 0.04]);
    let order = convergence_order(&Autoparallel(&geo), &s, 0.2, 50).unwrap();
    assert!(order >= 3.8, "observed order {order}");
}

#[test]
fn infall_through_the_horizon_truncates_the_trajectory() {
    let chart = schwarzschild(1.0);
    let s = start(&[0.0, 2.3, PI / 2.0, 0.0], &[3.0, -1.0, 0.0, 0.0]);
    let t = integrate(&Geodesic(&chart), &s, 0.01, 2000).unwrap();
    assert!(matches!(t.left_domain, Some(nrgeom::GeomError::LeftDomain { .. })));
    assert!(t.states.len() < 2001);
    assert!(t.states.iter().all(|s| s.x[1] > 2.0));
}

#[test]
fn melvin_weyl_geometry_deviates_from_geodesics() {
    let melvin = defaults().into_iter().find(|d| d.name() == "melvin").unwrap();
    let inst = instantiate(&melvin).unwrap();
    let geo = weyl_geometry(&inst).unwrap();
    let s = start(&[0.0, 2.0, 0.5, 0.0], &[1.5, 0.1, 0.2, 0.3]);
    let with = integrate(&Autoparallel(&geo), &s, 0.01, 200).unwrap();
    let without = integrate(&Geodesic(&inst.chart), &s, 0.01, 200).unwrap();
    let csv = paired_csv(&with, &without);
    let last: f64 = csv.lines().last().unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!(last > 1e-6);
}

#[test]
fn trajectories_are_reproducible() {
    let (geo, _) = proca_geometry(schwarzschild(1.0));
    let starts = vec![
        start(&[0.0, 8.0, 1.3, 0.2], &[1.1, 0.2, 0.05, 0.04]),
        start(&[0.0, 9.0, 1.0, 0.1], &[1.0, -0.1, 0.0, 0.02]),
    ];
    let a = integrate_many(&Autoparallel(&geo), &starts, 0.05, 100);
    let b = integrate_many(&Autoparallel(&geo), &starts, 0.05, 100);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(to_csv(x.as_ref().unwrap()), to_csv(y.as_ref().unwrap()));
    }
}

#[test]
fn no_force_constants_violate_the_constraint_in_every_dimension() {
    for n in 3..=6 {
        for k in [0.5, 1.0, 2.0] {
            let a = no_force_analysis(n, k).unwrap();
            let nf = n as f64;
            assert!((a.beta - k / 4.0).abs() < 1e-14);
            assert!((a.gamma + k * (nf - 1.0) / (8.0 * nf)).abs() < 1e-14);
            assert!(a.constraint_residual.abs() > 1e-6 && !a.compatible);
        }
    }
}
