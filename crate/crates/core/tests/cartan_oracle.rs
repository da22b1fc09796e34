//! Dense linear-system oracle for the Cartan equation.
//!
//! The distortion enters `D *(e^a ^ e_b)` linearly and algebraically, so the
//! equation can be assembled as an `n^3 x n^3` matrix in the components of
//! `lambda^a_b` and solved by SVD. The projective kernel `lambda^a_b = delta^a_b X`
//! drops out of the invariants compared below.

use nalgebra::{DMatrix, DVector};
use nrgeom::cartan::{closed_form, solve_general, SourceTensor};
use nrgeom::exterior::{lorentzian, Form};
use nrgeom::geometry::{
    cartan_operator, nonmetricity_of_distortion, torsion_of_distortion, torsion_trace, traceless_nonmetricity,
    traceless_torsion, weyl_form,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_source(n: usize, rng: &mut ChaCha8Rng) -> SourceTensor<f64> {
    let eta = lorentzian(n);
    let mut f: Vec<f64> = (0..n * n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    // project out f^{ca}_a
    for c in 0..n {
        let mut tr = 0.0;
        for a in 0..n {
            tr += f[(c * n + a) * n + a] * eta[a];
        }
        for a in 0..n {
            f[(c * n + a) * n + a] -= tr / n as f64 * eta[a];
        }
    }
    SourceTensor { n, f }
}

fn flatten(forms: &[Form<f64>]) -> Vec<f64> {
    forms.iter().flat_map(|f| f.components().to_vec()).collect()
}

/// Least-squares distortion solving `cartan_operator(lambda) = F`.
fn solve_dense(eta: &[f64], forms: &[Form<f64>]) -> (Vec<Form<f64>>, f64) {
    let n = eta.len();
    let m = n * n * n;
    let rhs = DVector::from_vec(flatten(forms));
    let mut a = DMatrix::<f64>::zeros(rhs.len(), m);
    for k in 0..m {
        let mut lam = vec![Form::<f64>::zero(n, 1); n * n];
        lam[k / n].components_mut()[k % n] = 1.0;
        let col = flatten(&cartan_operator(eta, &lam));
        for (i, v) in col.into_iter().enumerate() {
            a[(i, k)] = v;
        }
    }
    let svd = a.clone().svd(true, true);
    let x = svd.solve(&rhs, 1e-10).unwrap();
    let resid = (&a * &x - &rhs).amax();
    let lam = (0..n * n).map(|ab| Form::from_components(n, 1, (0..n).map(|d| x[ab * n + d]).collect())).collect();
    (lam, resid)
}

fn max_diff(a: &[Form<f64>], b: &[Form<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).max_abs()).fold(0.0, f64::max)
}

#[test]
fn closed_form_matches_dense_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [3usize, 4, 5] {
        let eta = lorentzian(n);
        for _ in 0..5 {
            let src = random_source(n, &mut rng);
            let forms = src.to_forms(&eta);
            let back = SourceTensor::from_forms(&eta, &forms);
            assert!(back.f.iter().zip(&src.f).all(|(x, y)| (x - y).abs() < 1e-12), "source roundtrip");
            let (lam, resid) = solve_dense(&eta, &forms);
            assert!(resid < 1e-10, "dense system inconsistent: {resid}");
            let t = torsion_of_distortion(n, &lam);
            let q = nonmetricity_of_distortion(&eta, &lam);
            let w = weyl_form(&eta, &q);
            let mut rel = torsion_trace(&t);
            rel.axpy(-(n as f64 - 1.0) / (2.0 * n as f64), &w);
            let sol = closed_form(&eta, &src);
            let dt = max_diff(&traceless_torsion(&t), &sol.torsion_traceless);
            let dq = max_diff(&traceless_nonmetricity(&eta, &q), &sol.nonmetricity_traceless);
            let dr = (&rel - &sol.trace_relation).max_abs();
            println!("n={n} dT={dt:e} dQ={dq:e} dtrace={dr:e}");
            assert!(dt < 1e-10 && dq < 1e-10 && dr < 1e-10);
            let sol2 = solve_general(&eta, &forms, 1e-12).unwrap();
            let lam2 = sol2.distortion(&eta, &w);
            let res = max_diff(&cartan_operator(&eta, &lam2), &forms);
            assert!(res < 1e-10, "closed-form distortion residual {res:e}");
        }
    }
}
