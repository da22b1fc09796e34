//! Coframe-variation oracle for the stress forms.
//!
//! A coordinate coframe `E(eps) = E0 + eps V` is varied with a first-order
//! jet in `eps`. The coordinate Lagrangian density `L(eps) det E(eps)` is
//! differentiated exactly and compared with `delta e^c ^ tau_c`.

use nrgeom::exterior::{invert, lorentzian, Form};
use nrgeom::fieldeq::{pair_stress, tau_kinetic, tau_mass, tau_maxwell, wedge_trace};
use nrgeom::jet::{Jet, Scalar};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Setup {
    n: usize,
    eta: Vec<f64>,
    e0: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Setup {
    fn random(n: usize, seed: u64) -> Self {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let e0 =
            (0..n).map(|a| (0..n).map(|m| if a == m { 1.0 } else { 0.0 } + r.gen_range(-0.3..0.3)).collect()).collect();
        let v = (0..n).map(|_| (0..n).map(|_| r.gen_range(-1.0..1.0)).collect()).collect();
        Setup { n, eta: lorentzian(n), e0, v }
    }

    fn coframe(&self) -> Vec<Vec<Jet>> {
        let eps = Jet::var(1, 0, 0.0, 1);
        (0..self.n).map(|a| (0..self.n).map(|m| eps.scale(self.v[a][m]) + Jet::cst(self.e0[a][m])).collect()).collect()
    }

    /// Frame-basis form of a p-form given by coordinate components.
    fn to_frame(&self, e: &[Vec<Jet>], coord: &Form<f64>) -> Form<Jet> {
        let n = self.n;
        let einv = invert(e).expect("invertible coframe");
        // dx^mu = Einv[mu][a] e^a
        let dx: Vec<Form<Jet>> = (0..n).map(|m| Form::from_components(n, 1, einv[m].clone())).collect();
        let p = coord.degree();
        let mut out = Form::zero(n, p);
        for (k, &mask) in nrgeom::exterior::basis_masks(n, p).iter().enumerate() {
            let c = coord.components()[k];
            if c == 0.0 {
                continue;
            }
            let mut w = Form::scalar(n, Jet::cst(1.0));
            for m in nrgeom::exterior::bits(mask) {
                w = w.wedge(&dx[m]);
            }
            out.axpy(c, &w);
        }
        out
    }

    fn det(&self, e: &[Vec<Jet>]) -> Jet {
        let n = self.n;
        let mut w = Form::scalar(n, Jet::cst(1.0));
        for row in e {
            w = w.wedge(&Form::from_components(n, 1, row.clone()));
        }
        w.top()
    }

    /// `d/deps [L det E]` against `delta e^c ^ tau_c` in coordinate components.
    fn compare(
        &self,
        lagr: impl Fn(&[f64], &[Form<Jet>]) -> Form<Jet>,
        stress: impl Fn(&[f64], &[Form<f64>]) -> Vec<Form<f64>>,
        fields: &[Form<f64>],
    ) -> (f64, f64) {
        let e = self.coframe();
        let fr: Vec<Form<Jet>> = fields.iter().map(|f| self.to_frame(&e, f)).collect();
        let dens = lagr(&self.eta, &fr).top() * self.det(&e);
        let lhs = dens.d1(0);
        let fr0: Vec<Form<f64>> = fr.iter().map(|f| f.values()).collect();
        let tau = stress(&self.eta, &fr0);
        let mut rhs = Form::<f64>::zero(self.n, self.n);
        for c in 0..self.n {
            let de = self.to_frame(&e, &Form::from_components(self.n, 1, self.v[c].clone())).values();
            rhs.add_assign(&de.wedge(&tau[c]));
        }
        let det0 = self.det(&e).val();
        let rhs = rhs.top() * det0;
        (lhs, rhs)
    }
}

fn random_form(n: usize, p: usize, r: &mut ChaCha8Rng) -> Form<f64> {
    let len = nrgeom::exterior::binomial(n, p);
    Form::from_components(n, p, (0..len).map(|_| r.gen_range(-1.0..1.0)).collect())
}

fn check(lhs: f64, rhs: f64) {
    assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()), "variation {lhs} vs stress {rhs}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pair_stress_matches_variation(n in 3usize..=6, seed in 0u64..10_000, pa in 0usize..4, b in -2.0f64..2.0) {
        let p = pa % n;
        let s = Setup::random(n, seed);
        let mut r = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let fields = [random_form(n, p, &mut r), random_form(n, p, &mut r)];
        let (lhs, rhs) = s.compare(
            |eta, f| f[0].wedge(&f[1].hodge(eta)).scale(b),
            |eta, f| pair_stress(eta, &f[0], &f[1]).into_iter().map(|t| t.scale(b)).collect(),
            &fields,
        );
        check(lhs, rhs);
    }

    #[test]
    fn kinetic_and_mass_stresses_match_variation(n in 3usize..=6, seed in 0u64..10_000, k in -2.0f64..2.0) {
        let s = Setup::random(n, seed);
        let mut r = ChaCha8Rng::seed_from_u64(seed ^ 0xface);
        let f2 = [random_form(n, 2, &mut r)];
        let (lhs, rhs) = s.compare(
            |eta, f| f[0].wedge(&f[0].hodge(eta)).scale(k / 2.0),
            |eta, f| tau_kinetic(eta, k, &f[0]),
            &f2,
        );
        check(lhs, rhs);
        let f1 = [random_form(n, 1, &mut r)];
        let (lhs, rhs) = s.compare(
            |eta, f| f[0].wedge(&f[0].hodge(eta)).scale(k / 2.0),
            |eta, f| tau_mass(eta, k, &f[0]),
            &f1,
        );
        check(lhs, rhs);
    }

    #[test]
    fn maxwell_stress_is_variation_of_minus_half_f_star_f(n in 3usize..=6, seed in 0u64..10_000) {
        let s = Setup::random(n, seed);
        let mut r = ChaCha8Rng::seed_from_u64(seed ^ 0xbeef);
        let f2 = [random_form(n, 2, &mut r)];
        let (lhs, rhs) = s.compare(
            |eta, f| f[0].wedge(&f[0].hodge(eta)).scale(-0.5),
            |eta, f| tau_maxwell(eta, &f[0]),
            &f2,
        );
        check(lhs, rhs);
    }

    #[test]
    fn wedge_trace_of_pair_stress(n in 3usize..=6, seed in 0u64..10_000, pa in 0usize..4) {
        let p = pa % n;
        let eta = lorentzian(n);
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (random_form(n, p, &mut r), random_form(n, p, &mut r));
        let w = wedge_trace(&pair_stress(&eta, &a, &b));
        let expect = a.wedge(&b.hodge(&eta)).scale(n as f64 - 2.0 * p as f64);
        prop_assert!((&w - &expect).max_abs() <= 1e-12, "{:?} vs {:?}", w, expect);
    }
}
