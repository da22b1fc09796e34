//! Second-order Taylor jets and the scalar trait shared by the pointwise algebra.
//!
//! A [`Jet`] carries a value, gradient and Hessian with respect to up to
//! [`MAX_DIM`] variables. The `order` tag records how many derivative levels
//! are valid; arithmetic takes the minimum order of its operands and
//! [`Jet::partial`] lowers it by one.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// Largest supported manifold dimension.
pub const MAX_DIM: usize = 8;
/// Highest derivative order carried by a jet.
pub const MAX_ORDER: u8 = 2;
const HESS: usize = MAX_DIM * (MAX_DIM + 1) / 2;

#[inline]
fn hidx(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    b * (b + 1) / 2 + a
}

/// Operations required by forms and connection algebra.
pub trait Scalar:
    Copy
    + fmt::Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    fn constant(x: f64) -> Self;
    fn value(&self) -> f64;
    fn scale(self, c: f64) -> Self;
    fn is_exact_zero(&self) -> bool;
}

impl Scalar for f64 {
    #[inline]
    fn constant(x: f64) -> Self {
        x
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn scale(self, c: f64) -> Self {
        self * c
    }
    #[inline]
    fn is_exact_zero(&self) -> bool {
        *self == 0.0
    }
}

#[derive(Clone, Copy)]
pub struct Jet {
    nvar: u8,
    order: u8,
    v: f64,
    g: [f64; MAX_DIM],
    h: [f64; HESS],
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.nvar as usize;
        write!(f, "Jet(o{} v={:e}", self.order, self.v)?;
        if self.order >= 1 && n > 0 {
            write!(f, " g={:?}", &self.g[..n])?;
        }
        write!(f, ")")
    }
}

impl Jet {
    /// A constant; all derivatives are exactly zero so it carries full order.
    #[inline]
    pub fn cst(v: f64) -> Self {
        Jet { nvar: 0, order: MAX_ORDER, v, g: [0.0; MAX_DIM], h: [0.0; HESS] }
    }

    /// The coordinate function `x_i` evaluated at `x`.
    pub fn var(nvar: usize, i: usize, x: f64, order: u8) -> Self {
        assert!(nvar <= MAX_DIM && i < nvar);
        let mut j = Jet { nvar: nvar as u8, order: order.min(MAX_ORDER), v: x, g: [0.0; MAX_DIM], h: [0.0; HESS] };
        if j.order >= 1 {
            j.g[i] = 1.0;
        }
        j
    }

    /// Builds a jet from explicit derivative data (Hessian as a full `n x n` row-major slice).
    pub fn from_parts(v: f64, grad: &[f64], hess: Option<&[f64]>) -> Self {
        let n = grad.len();
        assert!(n <= MAX_DIM);
        let mut j = Jet { nvar: n as u8, order: 1, v, g: [0.0; MAX_DIM], h: [0.0; HESS] };
        j.g[..n].copy_from_slice(grad);
        if let Some(h) = hess {
            assert_eq!(h.len(), n * n);
            j.order = 2;
            for b in 0..n {
                for a in 0..=b {
                    j.h[hidx(a, b)] = h[a * n + b];
                }
            }
        }
        j
    }

    #[inline]
    pub fn val(&self) -> f64 {
        self.v
    }
    #[inline]
    pub fn order(&self) -> u8 {
        self.order
    }
    #[inline]
    pub fn nvar(&self) -> usize {
        self.nvar as usize
    }

    /// First derivative with respect to variable `i` (zero beyond `nvar`).
    #[inline]
    pub fn d1(&self, i: usize) -> f64 {
        debug_assert!(self.order >= 1, "jet order exhausted");
        if i < MAX_DIM {
            self.g[i]
        } else {
            0.0
        }
    }

    #[inline]
    pub fn d2(&self, i: usize, j: usize) -> f64 {
        debug_assert!(self.order >= 2, "jet order exhausted");
        self.h[hidx(i, j)]
    }

    /// Truncates to a lower order.
    pub fn truncate(mut self, order: u8) -> Self {
        self.order = self.order.min(order);
        self
    }

    /// The partial derivative `d/dx_i` as a jet of one order lower.
    pub fn partial(&self, i: usize) -> Jet {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let n = self.nvar as usize;
        let mut out = Jet { nvar: self.nvar, order: self.order - 1, v: self.g[i], g: [0.0; MAX_DIM], h: [0.0; HESS] };
        if out.order >= 1 {
            for j in 0..n {
                out.g[j] = self.h[hidx(i, j)];
            }
        }
        out
    }

    /// `f(self)` given `f`, `f'` and `f''` evaluated at the value.
    #[inline]
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Jet {
        let n = self.nvar as usize;
        let mut out = Jet { nvar: self.nvar, order: self.order, v: f0, g: [0.0; MAX_DIM], h: [0.0; HESS] };
        if self.order >= 1 {
            for i in 0..n {
                out.g[i] = f1 * self.g[i];
            }
        }
        if self.order >= 2 {
            for b in 0..n {
                for a in 0..=b {
                    let k = hidx(a, b);
                    out.h[k] = f1 * self.h[k] + f2 * self.g[a] * self.g[b];
                }
            }
        }
        out
    }

    pub fn recip(&self) -> Jet {
        let x = self.v;
        self.chain(1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x))
    }

    pub fn sqrt(&self) -> Jet {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn tan(&self) -> Jet {
        let t = self.v.tan();
        let sec2 = 1.0 + t * t;
        self.chain(t, sec2, 2.0 * t * sec2)
    }

    pub fn exp(&self) -> Jet {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Jet {
        let x = self.v;
        self.chain(x.ln(), 1.0 / x, -1.0 / (x * x))
    }

    /// `self^p` for a constant exponent.
    pub fn powf(&self, p: f64) -> Jet {
        let x = self.v;
        if p == 0.0 {
            return Jet::cst(1.0);
        }
        let f0 = x.powf(p);
        let f1 = if p == 1.0 { 1.0 } else { p * x.powf(p - 1.0) };
        let f2 = if p == 1.0 {
            0.0
        } else if p == 2.0 {
            2.0
        } else {
            p * (p - 1.0) * x.powf(p - 2.0)
        };
        self.chain(f0, f1, f2)
    }

    pub fn is_finite(&self) -> bool {
        let n = self.nvar as usize;
        if !self.v.is_finite() {
            return false;
        }
        if self.order >= 1 && !self.g[..n].iter().all(|x| x.is_finite()) {
            return false;
        }
        if self.order >= 2 && !self.h[..n * (n + 1) / 2].iter().all(|x| x.is_finite()) {
            return false;
        }
        true
    }

    /// Largest absolute entry among the valid derivative levels.
    pub fn max_abs(&self) -> f64 {
        let n = self.nvar as usize;
        let mut m = self.v.abs();
        if self.order >= 1 {
            for x in &self.g[..n] {
                m = m.max(x.abs());
            }
        }
        if self.order >= 2 {
            for x in &self.h[..n * (n + 1) / 2] {
                m = m.max(x.abs());
            }
        }
        m
    }
}

impl Add for Jet {
    type Output = Jet;
    #[inline]
    fn add(self, o: Jet) -> Jet {
        let mut out = self;
        out += o;
        out
    }
}

impl AddAssign for Jet {
    #[inline]
    fn add_assign(&mut self, o: Jet) {
        let n = self.nvar.max(o.nvar) as usize;
        self.nvar = n as u8;
        self.order = self.order.min(o.order);
        self.v += o.v;
        if self.order >= 1 {
            for i in 0..n {
                self.g[i] += o.g[i];
            }
        }
        if self.order >= 2 {
            for k in 0..n * (n + 1) / 2 {
                self.h[k] += o.h[k];
            }
        }
    }
}

impl Sub for Jet {
    type Output = Jet;
    #[inline]
    fn sub(self, o: Jet) -> Jet {
        let mut out = self;
        out -= o;
        out
    }
}

impl SubAssign for Jet {
    #[inline]
    fn sub_assign(&mut self, o: Jet) {
        *self += -o;
    }
}

impl Neg for Jet {
    type Output = Jet;
    #[inline]
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    #[inline]
    fn mul(self, o: Jet) -> Jet {
        let n = self.nvar.max(o.nvar) as usize;
        let order = self.order.min(o.order);
        let mut out = Jet { nvar: n as u8, order, v: self.v * o.v, g: [0.0; MAX_DIM], h: [0.0; HESS] };
        if order >= 1 {
            for i in 0..n {
                out.g[i] = self.v * o.g[i] + o.v * self.g[i];
            }
        }
        if order >= 2 {
            for b in 0..n {
                for a in 0..=b {
                    let k = hidx(a, b);
                    out.h[k] = self.v * o.h[k] + o.v * self.h[k] + self.g[a] * o.g[b] + self.g[b] * o.g[a];
                }
            }
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Scalar for Jet {
    #[inline]
    fn constant(x: f64) -> Self {
        Jet::cst(x)
    }
    #[inline]
    fn value(&self) -> f64 {
        self.v
    }
    #[inline]
    fn scale(mut self, c: f64) -> Self {
        let n = self.nvar as usize;
        self.v *= c;
        if self.order >= 1 {
            for i in 0..n {
                self.g[i] *= c;
            }
        }
        if self.order >= 2 {
            for k in 0..n * (n + 1) / 2 {
                self.h[k] *= c;
            }
        }
        self
    }
    #[inline]
    fn is_exact_zero(&self) -> bool {
        self.max_abs() == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(f: impl Fn(&[f64]) -> f64, jf: impl Fn(&[Jet]) -> Jet, x: &[f64]) {
        let n = x.len();
        let vars: Vec<Jet> = (0..n).map(|i| Jet::var(n, i, x[i], 2)).collect();
        let j = jf(&vars);
        assert!((j.val() - f(x)).abs() < 1e-12);
        let h = 1e-4;
        for i in 0..n {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            let g = (f(&xp) - f(&xm)) / (2.0 * h);
            assert!((j.d1(i) - g).abs() < 1e-6 * (1.0 + g.abs()), "grad {i}");
            for k in 0..n {
                let mut pp = x.to_vec();
                let mut pm = x.to_vec();
                let mut mp = x.to_vec();
                let mut mm = x.to_vec();
                pp[i] += h;
                pp[k] += h;
                pm[i] += h;
                pm[k] -= h;
                mp[i] -= h;
                mp[k] += h;
                mm[i] -= h;
                mm[k] -= h;
                let hik = (f(&pp) - f(&pm) - f(&mp) + f(&mm)) / (4.0 * h * h);
                assert!((j.d2(i, k) - hik).abs() < 1e-4 * (1.0 + hik.abs()), "hess {i}{k}");
            }
        }
    }

    #[test]
    fn products_and_quotients_match_finite_differences() {
        fd_check(
            |x| x[0] * x[1] / (1.0 + x[2] * x[2]),
            |v| v[0] * v[1] / (Jet::cst(1.0) + v[2] * v[2]),
            &[0.3, -1.2, 0.7],
        );
    }

    #[test]
    fn transcendental_functions_match_finite_differences() {
        fd_check(
            |x| (x[0].sin() * x[1].exp()).sqrt() + x[1].ln() * x[0].tan() + x[0].powf(1.7),
            |v| (v[0].sin() * v[1].exp()).sqrt() + v[1].ln() * v[0].tan() + v[0].powf(1.7),
            &[0.4, 1.3],
        );
        fd_check(|x| x[0].cos() * x[1].recip(), |v| v[0].cos() * v[1].recip(), &[2.0, 0.5]);
    }

    #[test]
    fn partial_lowers_order() {
        let x = Jet::var(2, 0, 1.5, 2);
        let y = Jet::var(2, 1, 0.5, 2);
        let f = x * x * y;
        let fx = f.partial(0);
        assert_eq!(fx.order(), 1);
        assert!((fx.val() - 2.0 * 1.5 * 0.5).abs() < 1e-15);
        assert!((fx.d1(1) - 3.0).abs() < 1e-15);
    }
}
