//! Structured right-hand sides of the Cartan equation and their printed
//! closed-form solutions.
//!
//! A [`CartanRhs`] is a construction recipe. [`CartanRhs::shape`] reads the
//! tag off the recipe, never off the numbers, and [`CartanRhs::printed`]
//! evaluates the case-specific formulas so they can be compared against
//! [`closed_form`](super::closed_form).

use serde::Serialize;

use super::SourceTensor;
use crate::exterior::Form;
use crate::jet::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Shape {
    Zero,
    AntisymLast,
    EaIb,
    Diag,
    TracelessTwoForm,
    DiagPlusEa,
    EbIa,
    DiagPlusEb,
    General,
}

/// Right-hand side `F^a_b` of the Cartan equation, stored by construction.
#[derive(Debug, Clone)]
pub enum CartanRhs<S: Scalar> {
    Zero {
        n: usize,
    },
    /// Given `f_{cab}` with `f_{cab} = -f_{cba}`.
    AntisymLast(SourceTensor<S>),
    /// `sum_k e^a ^ i_b *A_k`.
    EaIb {
        a_k: Vec<Form<S>>,
    },
    /// `delta^a_b *A`.
    Diag {
        a: Form<S>,
    },
    /// `e^a ^ *A_b` with 2-forms `A_b` satisfying `i^b A_b = 0`.
    TracelessTwoForm {
        a_b: Vec<Form<S>>,
    },
    /// `delta^a_b *A + sum_k e^a ^ i_b *A_k`.
    DiagPlusEa {
        a: Form<S>,
        a_k: Vec<Form<S>>,
    },
    /// `sum_k e_b ^ i^a *A_k`.
    EbIa {
        a_k: Vec<Form<S>>,
    },
    /// `delta^a_b *A + sum_k e_b ^ i^a *A_k`.
    DiagPlusEb {
        a: Form<S>,
        a_k: Vec<Form<S>>,
    },
    General {
        forms: Vec<Form<S>>,
    },
}

/// Case formulas as printed; `None` where a case does not state a quantity.
#[derive(Debug, Clone)]
pub struct PrintedSolution<S: Scalar> {
    /// `hat T^c` (index up), if printed.
    pub torsion_traceless: Option<Vec<Form<S>>>,
    /// `hat Q_bc`, if printed.
    pub nonmetricity_traceless: Option<Vec<Form<S>>>,
    /// `T - (n-1)/(2n) Q`, if printed.
    pub trace_relation: Option<Form<S>>,
}

fn sum<S: Scalar>(n: usize, p: usize, v: &[Form<S>]) -> Form<S> {
    let mut s = Form::zero(n, p);
    for f in v {
        s.add_assign(f);
    }
    s
}

/// Removes the trace of a family of 2-forms: `A_b - e_b ^ A / (n-1)`, `A = i^a A_a`.
pub fn project_traceless_two_forms<S: Scalar>(eta: &[f64], a_b: &[Form<S>]) -> Vec<Form<S>> {
    let n = eta.len();
    let mut tr = Form::zero(n, 1);
    for (a, f) in a_b.iter().enumerate() {
        tr.axpy(eta[a], &f.interior(a));
    }
    a_b.iter()
        .enumerate()
        .map(|(b, f)| {
            let mut g = f.clone();
            g.axpy(-eta[b] / (n as f64 - 1.0), &Form::basis1(n, b).wedge(&tr));
            g
        })
        .collect()
}

impl<S: Scalar> CartanRhs<S> {
    pub fn dim(&self) -> usize {
        match self {
            CartanRhs::Zero { n } => *n,
            CartanRhs::AntisymLast(f) => f.n,
            CartanRhs::EaIb { a_k } | CartanRhs::EbIa { a_k } => a_k[0].dim(),
            CartanRhs::Diag { a } | CartanRhs::DiagPlusEa { a, .. } | CartanRhs::DiagPlusEb { a, .. } => a.dim(),
            CartanRhs::TracelessTwoForm { a_b } => a_b.len(),
            CartanRhs::General { forms } => forms[0].dim(),
        }
    }

    pub fn shape(&self) -> Shape {
        match self {
            CartanRhs::Zero { .. } => Shape::Zero,
            CartanRhs::AntisymLast(_) => Shape::AntisymLast,
            CartanRhs::EaIb { .. } => Shape::EaIb,
            CartanRhs::Diag { .. } => Shape::Diag,
            CartanRhs::TracelessTwoForm { .. } => Shape::TracelessTwoForm,
            CartanRhs::DiagPlusEa { .. } => Shape::DiagPlusEa,
            CartanRhs::EbIa { .. } => Shape::EbIa,
            CartanRhs::DiagPlusEb { .. } => Shape::DiagPlusEb,
            CartanRhs::General { .. } => Shape::General,
        }
    }

    /// The forms `F^a_b`, indexed `[a*n+b]`.
    pub fn forms(&self, eta: &[f64]) -> Vec<Form<S>> {
        let n = eta.len();
        let zero = || vec![Form::<S>::zero(n, n - 1); n * n];
        let diag = |out: &mut Vec<Form<S>>, a: &Form<S>| {
            let s = a.hodge(eta);
            for i in 0..n {
                out[i * n + i].add_assign(&s);
            }
        };
        let ea_ib = |out: &mut Vec<Form<S>>, a_k: &[Form<S>]| {
            let s = sum(n, 1, a_k).hodge(eta);
            for a in 0..n {
                for b in 0..n {
                    out[a * n + b].add_assign(&Form::basis1(n, a).wedge(&s.interior(b)));
                }
            }
        };
        let eb_ia = |out: &mut Vec<Form<S>>, a_k: &[Form<S>]| {
            let s = sum(n, 1, a_k).hodge(eta);
            for a in 0..n {
                for b in 0..n {
                    let t = Form::basis1(n, b).wedge(&s.interior(a));
                    out[a * n + b].axpy(eta[a] * eta[b], &t);
                }
            }
        };
        match self {
            CartanRhs::Zero { .. } => zero(),
            CartanRhs::AntisymLast(f) => f.to_forms(eta),
            CartanRhs::EaIb { a_k } => {
                let mut out = zero();
                ea_ib(&mut out, a_k);
                out
            }
            CartanRhs::Diag { a } => {
                let mut out = zero();
                diag(&mut out, a);
                out
            }
            CartanRhs::TracelessTwoForm { a_b } => {
                let mut out = zero();
                for a in 0..n {
                    for b in 0..n {
                        out[a * n + b] = Form::basis1(n, a).wedge(&a_b[b].hodge(eta));
                    }
                }
                out
            }
            CartanRhs::DiagPlusEa { a, a_k } => {
                let mut out = zero();
                diag(&mut out, a);
                ea_ib(&mut out, a_k);
                out
            }
            CartanRhs::EbIa { a_k } => {
                let mut out = zero();
                eb_ia(&mut out, a_k);
                out
            }
            CartanRhs::DiagPlusEb { a, a_k } => {
                let mut out = zero();
                diag(&mut out, a);
                eb_ia(&mut out, a_k);
                out
            }
            CartanRhs::General { forms } => forms.clone(),
        }
    }

    /// Evaluates the case-specific printed formulas.
    pub fn printed(&self, eta: &[f64]) -> PrintedSolution<S> {
        let n = eta.len();
        let nf = n as f64;
        let e = |a: usize| Form::<S>::basis1(n, a);
        let g = |a: usize, b: usize| if a == b { eta[a] } else { 0.0 };
        // hat T^c = x e^c ^ A
        let ec_wedge = |a: &Form<S>, x: f64| -> Vec<Form<S>> { (0..n).map(|c| e(c).wedge(a).scale(x)).collect() };
        // -e_b i_c A - e_c i_b A + x g_bc A
        let q_shape = |a: &Form<S>, x: f64| -> Vec<Form<S>> {
            let mut q = Vec::with_capacity(n * n);
            for b in 0..n {
                for c in 0..n {
                    let mut f = a.scale(x * g(b, c));
                    f.sub_assign(&e(b).times(a.components()[c]).scale(eta[b]));
                    f.sub_assign(&e(c).times(a.components()[b]).scale(eta[c]));
                    q.push(f);
                }
            }
            q
        };
        match self {
            CartanRhs::Zero { .. } => PrintedSolution {
                torsion_traceless: Some(vec![Form::zero(n, 2); n]),
                nonmetricity_traceless: Some(vec![Form::zero(n, 1); n * n]),
                trace_relation: Some(Form::zero(n, 1)),
            },
            CartanRhs::AntisymLast(f) => {
                let parity = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
                let tr: Vec<S> = (0..n).map(|a| f.trace_outer(eta, a).scale(parity)).collect();
                let rel = Form::from_components(n, 1, tr.iter().map(|x| x.scale(1.0 / (nf - 2.0))).collect());
                let mut t = Vec::with_capacity(n);
                for c in 0..n {
                    let mut x = Form::zero(n, 2);
                    for a in 0..n {
                        x.add_assign(&e(c).wedge(&e(a)).times(tr[a]).scale(1.0 / (nf - 1.0)));
                        for b in 0..n {
                            x.add_assign(&e(b).wedge(&e(a)).times(f.get(c, b, a)).scale(0.5 * parity * eta[c]));
                        }
                    }
                    t.push(x);
                }
                PrintedSolution {
                    torsion_traceless: Some(t),
                    nonmetricity_traceless: Some(vec![Form::zero(n, 1); n * n]),
                    trace_relation: Some(rel),
                }
            }
            CartanRhs::EaIb { a_k } => {
                let s = sum(n, 1, a_k);
                PrintedSolution {
                    torsion_traceless: Some(ec_wedge(&s, 1.0)),
                    nonmetricity_traceless: Some(q_shape(&s, (nf + 1.0) / nf)),
                    trace_relation: Some(s.scale(-(nf - 1.0) / (nf * (nf - 2.0)))),
                }
            }
            CartanRhs::Diag { a } => PrintedSolution {
                torsion_traceless: Some(ec_wedge(a, nf / (nf - 1.0))),
                nonmetricity_traceless: Some(q_shape(a, (nf + 2.0) / nf)),
                trace_relation: Some(a.scale(-1.0 / nf)),
            },
            CartanRhs::TracelessTwoForm { a_b } => {
                let mut q = Vec::with_capacity(n * n);
                for a in 0..n {
                    for b in 0..n {
                        let mut x = a_b[b].interior(a);
                        x.add_assign(&a_b[a].interior(b));
                        q.push(x.scale(-1.0));
                    }
                }
                let t = (0..n)
                    .map(|c| {
                        let mut x = a_b[c].clone();
                        for a in 0..n {
                            x.add_assign(&e(a).wedge(&a_b[a].interior(c)));
                        }
                        x.scale(-eta[c])
                    })
                    .collect();
                PrintedSolution {
                    torsion_traceless: Some(t),
                    nonmetricity_traceless: Some(q),
                    trace_relation: Some(Form::zero(n, 1)),
                }
            }
            CartanRhs::DiagPlusEa { a, a_k } | CartanRhs::DiagPlusEb { a, a_k } => {
                let s = sum(n, 1, a_k);
                let mut a1 = s.clone();
                a1.add_assign(a);
                let mut t = ec_wedge(&s, 1.0);
                for (x, y) in t.iter_mut().zip(ec_wedge(a, nf / (nf - 1.0))) {
                    x.add_assign(&y);
                }
                let mut rel = a.scale(-1.0 / nf);
                if matches!(self, CartanRhs::DiagPlusEa { .. }) {
                    rel.axpy(-(nf - 1.0) / (nf * (nf - 2.0)), &s);
                } else {
                    rel.axpy((nf - 1.0) * (nf - 1.0) / (nf * (nf - 2.0)), &s);
                }
                PrintedSolution {
                    torsion_traceless: Some(t),
                    nonmetricity_traceless: Some(q_shape(&a1, 2.0 / nf)),
                    trace_relation: Some(rel),
                }
            }
            CartanRhs::EbIa { a_k } => {
                let s = sum(n, 1, a_k);
                PrintedSolution {
                    torsion_traceless: Some(ec_wedge(&s, 1.0)),
                    nonmetricity_traceless: Some(q_shape(&s, (nf + 1.0) / nf)),
                    trace_relation: Some(s.scale((nf - 1.0) * (nf - 1.0) / (nf * (nf - 2.0)))),
                }
            }
            CartanRhs::General { .. } => {
                PrintedSolution { torsion_traceless: None, nonmetricity_traceless: None, trace_relation: None }
            }
        }
    }
}
