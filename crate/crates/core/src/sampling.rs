//! Seeded sample points and randomized smooth backgrounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::expr::{self, ScalarExpr};
use crate::exterior::{lorentzian, Basis, Chart, FormField};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Axis-aligned coordinate box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SamplingBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.iter().zip(&hi).any(|(a, b)| !(a <= b)) {
            return Err(GeomError::Invalid("sampling box bounds".into()));
        }
        Ok(SamplingBox { lo, hi })
    }

    pub fn cube(n: usize, lo: f64, hi: f64) -> Self {
        SamplingBox { lo: vec![lo; n], hi: vec![hi; n] }
    }

    pub fn points(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut r = rng(seed);
        (0..count)
            .map(|_| self.lo.iter().zip(&self.hi).map(|(&a, &b)| if a == b { a } else { r.gen_range(a..b) }).collect())
            .collect()
    }
}

fn random_wave(n: usize, syms: &[String], r: &mut ChaCha8Rng, amp: f64) -> ScalarExpr {
    let mut terms = Vec::new();
    for _ in 0..2 {
        let mut phase = vec![ScalarExpr::cst(r.gen_range(-1.0..1.0))];
        for (mu, s) in syms.iter().enumerate().take(n) {
            let k: f64 = r.gen_range(-0.8..0.8);
            phase.push(ScalarExpr::coord(mu, s).scale(k));
        }
        let arg = expr::add(phase);
        let c = r.gen_range(-amp..amp);
        terms.push(if r.gen_bool(0.5) { arg.sin() } else { arg.cos() }.scale(c));
    }
    expr::add(terms)
}

/// A chart whose coframe is the identity plus small smooth perturbations.
pub fn random_smooth_chart(n: usize, seed: u64) -> Chart {
    let mut r = rng(seed);
    let syms: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let coframe = (0..n)
        .map(|a| {
            (0..n)
                .map(|mu| {
                    let w = random_wave(n, &syms, &mut r, 0.15);
                    if a == mu {
                        w.add(&ScalarExpr::cst(1.0))
                    } else {
                        w
                    }
                })
                .collect()
        })
        .collect();
    Chart::new(syms, lorentzian(n), coframe).expect("random chart")
}

/// A smooth coordinate p-form with O(1) components.
pub fn random_smooth_form(n: usize, p: usize, seed: u64) -> FormField {
    let mut r = rng(seed);
    let syms: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let mut f = FormField::zero(n, p, Basis::Coordinate);
    for c in f.comps.iter_mut() {
        *c = random_wave(n, &syms, &mut r, 1.0);
    }
    f
}

/// A smooth scalar field.
pub fn random_smooth_scalar(n: usize, seed: u64) -> ScalarExpr {
    let mut r = rng(seed);
    let syms: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    random_wave(n, &syms, &mut r, 1.0)
}
