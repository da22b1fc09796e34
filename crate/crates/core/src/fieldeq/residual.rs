//! Residual bookkeeping and sampled evaluation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exterior::Form;
use crate::jet::Scalar;

/// Sampled residual of one equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub equation: String,
    pub n_points: usize,
    pub seed: u64,
    pub max_abs: f64,
    pub max_rel: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Running maxima for a [`ResidualReport`].
///
/// The relative residual at a point is the absolute residual divided by the
/// largest individual term entering the equation there.
#[derive(Debug, Clone, Default)]
pub struct Tally {
    pub max_abs: f64,
    pub max_rel: f64,
    pub points: usize,
}

impl Tally {
    pub fn record(&mut self, residual: f64, scale: f64) {
        self.points += 1;
        let rel = if residual == 0.0 {
            0.0
        } else if scale > 0.0 {
            residual / scale
        } else {
            f64::INFINITY
        };
        if !(residual <= self.max_abs) {
            self.max_abs = residual;
        }
        if !(rel <= self.max_rel) {
            self.max_rel = rel;
        }
    }

    pub fn merge(&mut self, o: &Tally) {
        self.points = self.points.max(o.points);
        self.max_abs = self.max_abs.max(o.max_abs);
        self.max_rel = self.max_rel.max(o.max_rel);
    }

    pub fn report(&self, equation: impl Into<String>, seed: u64, tolerance: f64) -> ResidualReport {
        ResidualReport {
            equation: equation.into(),
            n_points: self.points,
            seed,
            max_abs: self.max_abs,
            max_rel: self.max_rel,
            tolerance,
            pass: self.max_rel <= tolerance,
        }
    }
}

/// A sum of terms that should vanish, with the largest individual term kept as scale.
#[derive(Debug, Clone)]
pub struct Balance {
    sum: Vec<Form<f64>>,
    scale: f64,
}

impl Balance {
    pub fn new(n: usize, p: usize, count: usize) -> Self {
        Balance { sum: vec![Form::zero(n, p); count], scale: 0.0 }
    }

    /// Adds a family of forms (values only).
    pub fn add<S: Scalar>(&mut self, terms: &[Form<S>]) -> &mut Self {
        assert_eq!(terms.len(), self.sum.len(), "term family length");
        for (acc, t) in self.sum.iter_mut().zip(terms) {
            let v = t.map(|x| x.value());
            self.scale = self.scale.max(v.max_abs());
            acc.add_assign(&v);
        }
        self
    }

    pub fn add_one<S: Scalar>(&mut self, term: &Form<S>) -> &mut Self {
        self.add(std::slice::from_ref(term))
    }

    /// Widens the scale without adding a term.
    pub fn widen(&mut self, s: f64) -> &mut Self {
        self.scale = self.scale.max(s);
        self
    }

    /// `(max |sum|, scale)`.
    pub fn finish(&self) -> (f64, f64) {
        (self.sum.iter().map(|f| f.max_abs()).fold(0.0, f64::max), self.scale)
    }
}

/// Evaluates `f` at every point in parallel and tallies `(residual, scale)`.
///
/// The maxima are order independent, so the report does not depend on scheduling.
pub fn sample_residual<F>(
    equation: &str,
    points: &[Vec<f64>],
    seed: u64,
    tolerance: f64,
    f: F,
) -> Result<ResidualReport>
where
    F: Fn(&[f64]) -> Result<(f64, f64)> + Sync,
{
    let vals: Vec<(f64, f64)> = points.par_iter().map(|p| f(p)).collect::<Result<_>>()?;
    let mut t = Tally::default();
    for (r, s) in vals {
        t.record(r, s);
    }
    Ok(t.report(equation, seed, tolerance))
}
