//! Differential forms in an orthonormal coframe.
//!
//! A [`Form`] is a dense set of components over increasing multi-indices,
//! `alpha = sum_I alpha_I e^I`, stored in the order given by [`basis_masks`].
//! Multi-indices are bitmasks, so dimensions up to [`MAX_DIM`] are supported.
//!
//! Conventions: `*1 = e^0 ^ ... ^ e^{n-1}` and
//! `*(e^{a1} ^ ... ^ e^{ap}) = i^{ap} ... i^{a1} *1`, with `i^a = eta^{aa} i_a`.
//!
//! [`Chart`] holds a coordinate coframe as symbolic expressions, [`FrameAt`]
//! evaluates it to jets at a point and supplies the frame-basis exterior
//! derivative, and [`FormField`] is a symbolic form in either basis.

use std::cell::OnceCell;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::expr::{self, ScalarExpr};
use crate::jet::{Jet, Scalar, MAX_DIM};

struct DimTables {
    /// Masks of each degree, lexicographic in the index sequence.
    masks: Vec<Vec<u16>>,
    /// Position of a mask within its degree.
    rank: Vec<u16>,
    /// For each degree and position: (rank of complement, sign of `*` without metric factors).
    hodge: Vec<Vec<(u16, f64)>>,
}

fn tables(n: usize) -> &'static DimTables {
    static T: OnceLock<Vec<DimTables>> = OnceLock::new();
    assert!(n <= MAX_DIM, "dimension {n} exceeds {MAX_DIM}");
    &T.get_or_init(|| (0..=MAX_DIM).map(build_tables).collect())[n]
}

fn build_tables(n: usize) -> DimTables {
    let mut masks: Vec<Vec<u16>> = vec![Vec::new(); n + 1];
    for m in 0u32..(1u32 << n) {
        masks[m.count_ones() as usize].push(m as u16);
    }
    for v in masks.iter_mut() {
        v.sort_by_key(|&m| bits(m));
    }
    let mut rank = vec![0u16; 1 << n];
    for v in &masks {
        for (i, &m) in v.iter().enumerate() {
            rank[m as usize] = i as u16;
        }
    }
    let full = ((1u32 << n) - 1) as u16;
    let hodge = masks
        .iter()
        .map(|v| {
            v.iter()
                .map(|&m| {
                    let mut cur = full;
                    let mut sign = 1.0;
                    for a in bits(m) {
                        if (cur & ((1u16 << a) - 1)).count_ones() % 2 == 1 {
                            sign = -sign;
                        }
                        cur ^= 1 << a;
                    }
                    (rank[cur as usize], sign)
                })
                .collect()
        })
        .collect();
    DimTables { masks, rank, hodge }
}

/// Indices set in a mask, ascending.
pub fn bits(m: u16) -> Vec<usize> {
    (0..16).filter(|i| m & (1 << i) != 0).collect()
}

/// Basis multi-indices of degree `p` in dimension `n`, in storage order.
pub fn basis_masks(n: usize, p: usize) -> &'static [u16] {
    tables(n).masks.get(p).map_or(&[], |v| v.as_slice())
}

/// Storage position of a multi-index mask.
pub fn mask_rank(n: usize, m: u16) -> usize {
    tables(n).rank[m as usize] as usize
}

pub fn binomial(n: usize, p: usize) -> usize {
    if p > n {
        0
    } else {
        basis_masks(n, p).len()
    }
}

/// Sign of `e^A ^ e^B` relative to `e^{A|B}` for disjoint masks.
#[inline]
pub fn wedge_sign(a: u16, b: u16) -> f64 {
    let mut swaps = 0u32;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        swaps += (a >> (j + 1)).count_ones();
        bb &= bb - 1;
    }
    if swaps.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Scalars that also support division.
pub trait Field: Scalar {
    fn recip(self) -> Self;
}

impl Field for f64 {
    fn recip(self) -> Self {
        1.0 / self
    }
}

impl Field for Jet {
    fn recip(self) -> Self {
        Jet::recip(&self)
    }
}

#[derive(Clone, PartialEq)]
pub struct Form<S> {
    n: usize,
    p: usize,
    c: Vec<S>,
}

impl<S: Scalar> fmt::Debug for Form<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Form(n={}, p={}", self.n, self.p)?;
        for (m, c) in basis_masks(self.n, self.p).iter().zip(&self.c) {
            if c.value() != 0.0 {
                write!(f, ", {:?}: {:.6e}", bits(*m), c.value())?;
            }
        }
        write!(f, ")")
    }
}

impl<S: Scalar> Form<S> {
    pub fn zero(n: usize, p: usize) -> Self {
        assert!(n <= MAX_DIM);
        Form { n, p, c: vec![S::constant(0.0); binomial(n, p)] }
    }

    pub fn from_components(n: usize, p: usize, c: Vec<S>) -> Self {
        assert_eq!(c.len(), binomial(n, p), "component count");
        Form { n, p, c }
    }

    pub fn scalar(n: usize, s: S) -> Self {
        Form { n, p: 0, c: vec![s] }
    }

    /// `e^{i1} ^ ... ^ e^{ip}` for an arbitrary (not necessarily sorted) index list.
    pub fn basis(n: usize, idx: &[usize]) -> Self {
        let mut f = Form::<S>::scalar(n, S::constant(1.0));
        for &a in idx {
            f = f.wedge(&Form::basis1(n, a));
        }
        f
    }

    pub fn basis1(n: usize, a: usize) -> Self {
        let mut f = Form::zero(n, 1);
        f.c[a] = S::constant(1.0);
        f
    }

    /// `*1`.
    pub fn volume(n: usize) -> Self {
        let mut f = Form::zero(n, n);
        f.c[0] = S::constant(1.0);
        f
    }

    pub fn dim(&self) -> usize {
        self.n
    }
    pub fn degree(&self) -> usize {
        self.p
    }
    pub fn components(&self) -> &[S] {
        &self.c
    }
    pub fn components_mut(&mut self) -> &mut [S] {
        &mut self.c
    }

    /// Component on a basis mask.
    pub fn at_mask(&self, m: u16) -> S {
        self.c[mask_rank(self.n, m)]
    }

    /// Component `alpha_{i1..ip}` for an arbitrary index list (antisymmetric).
    pub fn comp(&self, idx: &[usize]) -> S {
        let mut m = 0u16;
        let mut sign = 1.0;
        for &a in idx {
            let bit = 1u16 << a;
            if m & bit != 0 {
                return S::constant(0.0);
            }
            sign *= wedge_sign(m, bit);
            m |= bit;
        }
        self.at_mask(m).scale(sign)
    }

    /// Value of a scalar (0-form).
    pub fn as_scalar(&self) -> S {
        assert_eq!(self.p, 0);
        self.c[0]
    }

    /// Top-form coefficient relative to `*1`.
    pub fn top(&self) -> S {
        assert_eq!(self.p, self.n);
        self.c[0]
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(S) -> T) -> Form<T> {
        Form { n: self.n, p: self.p, c: self.c.iter().map(|x| f(*x)).collect() }
    }

    pub fn values(&self) -> Form<f64> {
        self.map(|x| x.value())
    }

    pub fn scale(&self, k: f64) -> Self {
        self.map(|x| x.scale(k))
    }

    pub fn times(&self, s: S) -> Self {
        self.map(|x| x * s)
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, x| m.max(x.value().abs()))
    }

    fn check_same(&self, o: &Self) {
        assert!(self.n == o.n && self.p == o.p, "form shape mismatch: ({},{}) vs ({},{})", self.n, self.p, o.n, o.p);
    }

    pub fn add_assign(&mut self, o: &Self) {
        self.check_same(o);
        for (a, b) in self.c.iter_mut().zip(&o.c) {
            *a += *b;
        }
    }

    pub fn sub_assign(&mut self, o: &Self) {
        self.check_same(o);
        for (a, b) in self.c.iter_mut().zip(&o.c) {
            *a -= *b;
        }
    }

    /// `self += k * o`.
    pub fn axpy(&mut self, k: f64, o: &Self) {
        self.check_same(o);
        if k == 0.0 {
            return;
        }
        for (a, b) in self.c.iter_mut().zip(&o.c) {
            *a += b.scale(k);
        }
    }

    pub fn wedge(&self, o: &Self) -> Self {
        assert_eq!(self.n, o.n);
        let n = self.n;
        let q = self.p + o.p;
        if q > n {
            return Form::zero(n, q);
        }
        let mut out = Form::zero(n, q);
        let ma = basis_masks(n, self.p);
        let mb = basis_masks(n, o.p);
        let t = tables(n);
        for (i, &a) in ma.iter().enumerate() {
            let x = self.c[i];
            if x.is_exact_zero() {
                continue;
            }
            for (j, &b) in mb.iter().enumerate() {
                if a & b != 0 {
                    continue;
                }
                let y = o.c[j];
                if y.is_exact_zero() {
                    continue;
                }
                let k = t.rank[(a | b) as usize] as usize;
                let prod = x * y;
                if wedge_sign(a, b) > 0.0 {
                    out.c[k] += prod;
                } else {
                    out.c[k] -= prod;
                }
            }
        }
        out
    }

    /// Interior product with the frame vector `X_a`.
    pub fn interior(&self, a: usize) -> Self {
        assert!(self.p >= 1 && a < self.n);
        let n = self.n;
        let mut out = Form::zero(n, self.p - 1);
        let bit = 1u16 << a;
        let t = tables(n);
        for (i, &m) in basis_masks(n, self.p).iter().enumerate() {
            if m & bit == 0 {
                continue;
            }
            let k = t.rank[(m ^ bit) as usize] as usize;
            if (m & (bit - 1)).count_ones().is_multiple_of(2) {
                out.c[k] += self.c[i];
            } else {
                out.c[k] -= self.c[i];
            }
        }
        out
    }

    /// Interior product with a vector given by frame components.
    pub fn contract(&self, v: &[S]) -> Self {
        let mut out = Form::zero(self.n, self.p - 1);
        for (a, va) in v.iter().enumerate() {
            if va.is_exact_zero() {
                continue;
            }
            out.add_assign(&self.interior(a).times(*va));
        }
        out
    }

    /// Hodge dual for the diagonal signature `eta`.
    pub fn hodge(&self, eta: &[f64]) -> Self {
        let n = self.n;
        assert_eq!(eta.len(), n);
        let mut out = Form::zero(n, n - self.p);
        let t = tables(n);
        for (i, &m) in basis_masks(n, self.p).iter().enumerate() {
            let (k, s) = t.hodge[self.p][i];
            let mut s = s;
            for a in bits(m) {
                s *= eta[a];
            }
            out.c[k as usize] += self.c[i].scale(s);
        }
        out
    }

    pub fn is_zero_within(&self, tol: f64) -> bool {
        self.max_abs() <= tol
    }
}

impl<S: Scalar> Add for &Form<S> {
    type Output = Form<S>;
    fn add(self, o: &Form<S>) -> Form<S> {
        let mut r = self.clone();
        r.add_assign(o);
        r
    }
}

impl<S: Scalar> Sub for &Form<S> {
    type Output = Form<S>;
    fn sub(self, o: &Form<S>) -> Form<S> {
        let mut r = self.clone();
        r.sub_assign(o);
        r
    }
}

impl<S: Scalar> Neg for &Form<S> {
    type Output = Form<S>;
    fn neg(self) -> Form<S> {
        self.scale(-1.0)
    }
}

impl<S: Scalar> Mul<f64> for &Form<S> {
    type Output = Form<S>;
    fn mul(self, k: f64) -> Form<S> {
        self.scale(k)
    }
}

impl Form<f64> {
    pub fn lift(&self) -> Form<Jet> {
        self.map(Jet::cst)
    }
}

/// `eta` lowering of a vector index: `e_a = eta_{aa} e^a`.
pub fn lowered_basis1<S: Scalar>(n: usize, eta: &[f64], a: usize) -> Form<S> {
    Form::basis1(n, a).scale(eta[a])
}

/// Raised interior product `i^a = eta^{aa} i_a`.
pub fn interior_up<S: Scalar>(f: &Form<S>, eta: &[f64], a: usize) -> Form<S> {
    f.interior(a).scale(eta[a])
}

/// The 1-form metric dual to a vector with frame components `v^a`.
pub fn metric_dual<S: Scalar>(eta: &[f64], v: &[S]) -> Form<S> {
    Form::from_components(v.len(), 1, v.iter().zip(eta).map(|(x, e)| x.scale(*e)).collect())
}

/// Frame components of the vector dual to a 1-form.
pub fn vector_dual<S: Scalar>(eta: &[f64], f: &Form<S>) -> Vec<S> {
    assert_eq!(f.degree(), 1);
    f.components().iter().zip(eta).map(|(x, e)| x.scale(*e)).collect()
}

/// Lorentzian signature `diag(-1, 1, ..., 1)`.
pub fn lorentzian(n: usize) -> Vec<f64> {
    (0..n).map(|a| if a == 0 { -1.0 } else { 1.0 }).collect()
}

/// A coordinate chart with an orthonormal coframe `e^a = E^a_mu dx^mu`.
#[derive(Debug, Clone)]
pub struct Chart {
    pub coords: Vec<String>,
    pub signature: Vec<f64>,
    /// `coframe[a][mu] = E^a_mu`.
    pub coframe: Vec<Vec<ScalarExpr>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChartDoc {
    pub dim: usize,
    pub coords: Vec<String>,
    #[serde(default)]
    pub signature: Option<Vec<f64>>,
    pub coframe: Vec<Vec<String>>,
}

impl Chart {
    pub fn new(coords: Vec<String>, signature: Vec<f64>, coframe: Vec<Vec<ScalarExpr>>) -> Result<Self> {
        let n = coords.len();
        if n < 2 {
            return Err(GeomError::DimensionTooLow(n));
        }
        if n > MAX_DIM {
            return Err(GeomError::Invalid(format!("dimension {n} exceeds {MAX_DIM}")));
        }
        if signature.len() != n || signature.iter().any(|s| *s != 1.0 && *s != -1.0) {
            return Err(GeomError::Invalid("signature must list n entries of +-1".into()));
        }
        if coframe.len() != n || coframe.iter().any(|row| row.len() != n) {
            return Err(GeomError::ChartMismatch(format!("coframe must be {n}x{n}")));
        }
        for row in &coframe {
            for e in row {
                if e.max_coord_index().is_some_and(|i| i >= n) {
                    return Err(GeomError::ChartMismatch("coframe references a foreign coordinate".into()));
                }
            }
        }
        Ok(Chart { coords, signature, coframe })
    }

    /// A chart with a diagonal coframe `e^a = f_a dx^a`.
    pub fn diagonal(coords: &[&str], signature: Vec<f64>, diag: Vec<ScalarExpr>) -> Result<Self> {
        let n = coords.len();
        let coframe = (0..n)
            .map(|a| (0..n).map(|m| if a == m { diag[a].clone() } else { ScalarExpr::cst(0.0) }).collect())
            .collect();
        Chart::new(coords.iter().map(|s| s.to_string()).collect(), signature, coframe)
    }

    pub fn flat(n: usize) -> Self {
        let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        Chart::diagonal(&refs, lorentzian(n), vec![ScalarExpr::cst(1.0); n]).expect("flat chart")
    }

    pub fn from_doc(doc: &ChartDoc) -> Result<Self> {
        if doc.coords.len() != doc.dim {
            return Err(GeomError::ChartMismatch("dim does not match coordinate count".into()));
        }
        let sig = doc.signature.clone().unwrap_or_else(|| lorentzian(doc.dim));
        let mut coframe = Vec::new();
        for row in &doc.coframe {
            let mut r = Vec::new();
            for s in row {
                r.push(ScalarExpr::parse(s, &doc.coords)?);
            }
            coframe.push(r);
        }
        Chart::new(doc.coords.clone(), sig, coframe)
    }

    pub fn to_doc(&self) -> ChartDoc {
        ChartDoc {
            dim: self.dim(),
            coords: self.coords.clone(),
            signature: Some(self.signature.clone()),
            coframe: self.coframe.iter().map(|r| r.iter().map(|e| e.to_string()).collect()).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coord_index(&self, name: &str) -> Result<usize> {
        self.coords.iter().position(|c| c == name).ok_or_else(|| GeomError::UnknownSymbol(name.to_string()))
    }

    pub fn coord(&self, name: &str) -> Result<ScalarExpr> {
        Ok(ScalarExpr::coord(self.coord_index(name)?, name))
    }

    pub fn parse(&self, src: &str) -> Result<ScalarExpr> {
        ScalarExpr::parse(src, &self.coords)
    }

    /// Symbolic derivative by coordinate name.
    pub fn differentiate(&self, e: &ScalarExpr, name: &str) -> Result<ScalarExpr> {
        Ok(e.differentiate(self.coord_index(name)?))
    }

    pub fn at(&self, point: &[f64], order: u8) -> Result<FrameAt<'_>> {
        FrameAt::new(self, point, order)
    }
}

/// Gauss-Jordan inverse with partial pivoting on values.
pub fn invert<S: Field>(m: &[Vec<S>]) -> Option<Vec<Vec<S>>> {
    let n = m.len();
    let scale = m.iter().flatten().fold(0.0f64, |a, x| a.max(x.value().abs()));
    if !(scale > 0.0) || !scale.is_finite() {
        return None;
    }
    let mut a: Vec<Vec<S>> = m.to_vec();
    let mut inv: Vec<Vec<S>> =
        (0..n).map(|i| (0..n).map(|j| S::constant(if i == j { 1.0 } else { 0.0 })).collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].value().abs().total_cmp(&a[j][col].value().abs()))?;
        if a[piv][col].value().abs() <= 1e-13 * scale {
            return None;
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let r = a[col][col].recip();
        for j in 0..n {
            a[col][j] = a[col][j] * r;
            inv[col][j] = inv[col][j] * r;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = a[i][col];
            if f.is_exact_zero() {
                continue;
            }
            for j in 0..n {
                let (x, y) = (a[col][j], inv[col][j]);
                a[i][j] -= f * x;
                inv[i][j] -= f * y;
            }
        }
    }
    Some(inv)
}

/// A chart evaluated at a point: coframe jets, inverse, `de^a` and the
/// Levi-Civita connection, all in the orthonormal frame.
pub struct FrameAt<'c> {
    pub chart: &'c Chart,
    pub point: Vec<f64>,
    pub order: u8,
    /// `e[a][mu] = E^a_mu`.
    pub e: Vec<Vec<Jet>>,
    /// `einv[mu][a]`, components of `X_a = einv[mu][a] d_mu`.
    pub einv: Vec<Vec<Jet>>,
    /// `dx^mu` as frame 1-forms.
    dx: Vec<Form<Jet>>,
    /// `de^a` as frame 2-forms.
    pub de: Vec<Form<Jet>>,
    /// Levi-Civita connection `omega[a*n+b] = Omega^a_b`.
    pub omega: Vec<Form<Jet>>,
    dbasis: Vec<OnceCell<Vec<Form<Jet>>>>,
}

impl<'c> FrameAt<'c> {
    pub fn new(chart: &'c Chart, point: &[f64], order: u8) -> Result<Self> {
        let n = chart.dim();
        if point.len() != n {
            return Err(GeomError::ChartMismatch(format!("point has {} coordinates, chart {n}", point.len())));
        }
        if order == 0 {
            return Err(GeomError::Invalid("frame evaluation needs jet order >= 1".into()));
        }
        let mut e = Vec::with_capacity(n);
        for row in &chart.coframe {
            let mut r = Vec::with_capacity(n);
            for x in row {
                r.push(x.jet(point, order)?);
            }
            e.push(r);
        }
        let inv = invert(&e).ok_or_else(|| GeomError::SingularCoframe(point.to_vec()))?;
        // inv[mu][a] since E is [a][mu]
        let einv = inv;
        let dx: Vec<Form<Jet>> =
            (0..n).map(|mu| Form::from_components(n, 1, (0..n).map(|a| einv[mu][a]).collect())).collect();
        let mut de = Vec::with_capacity(n);
        for a in 0..n {
            // K_bc = sum d_mu E^a_nu X_b^mu X_c^nu
            let d_e: Vec<Vec<Jet>> = (0..n).map(|mu| (0..n).map(|nu| e[a][nu].partial(mu)).collect()).collect();
            let mut form = Form::<Jet>::zero(n, 2);
            for (k, &m) in basis_masks(n, 2).iter().enumerate() {
                let ix = bits(m);
                let (b, c) = (ix[0], ix[1]);
                let mut s = Jet::cst(0.0);
                for mu in 0..n {
                    for nu in 0..n {
                        let d = d_e[mu][nu];
                        if d.is_exact_zero() {
                            continue;
                        }
                        s += d * (einv[mu][b] * einv[nu][c] - einv[mu][c] * einv[nu][b]);
                    }
                }
                form.c[k] = s;
            }
            de.push(form);
        }
        let eta = &chart.signature;
        // 2 Omega_ab = i_b de_a - i_a de_b + e^c eta_cc i_a i_b de^c
        let mut omega = vec![Form::<Jet>::zero(n, 1); n * n];
        for a in 0..n {
            for b in 0..n {
                let mut w = de[a].interior(b).scale(eta[a]);
                w.sub_assign(&de[b].interior(a).scale(eta[b]));
                for c in 0..n {
                    let s = de[c].interior(b).interior(a).as_scalar();
                    w.c[c] += s.scale(eta[c]);
                }
                // Omega^a_b = eta^aa Omega_ab
                omega[a * n + b] = w.scale(0.5 * eta[a]);
            }
        }
        let dbasis = (0..=n).map(|_| OnceCell::new()).collect();
        Ok(FrameAt { chart, point: point.to_vec(), order, e, einv, dx, de, omega, dbasis })
    }

    pub fn dim(&self) -> usize {
        self.e.len()
    }

    pub fn eta(&self) -> &[f64] {
        &self.chart.signature
    }

    pub fn coframe(&self, a: usize) -> Form<Jet> {
        Form::basis1(self.dim(), a)
    }

    /// Frame derivative `X_a(f)`.
    pub fn frame_derivative(&self, f: &Jet, a: usize) -> Jet {
        let mut s = Jet::cst(0.0);
        for mu in 0..self.dim() {
            let x = self.einv[mu][a];
            if x.is_exact_zero() {
                continue;
            }
            s += f.partial(mu) * x;
        }
        s
    }

    /// Differential of a scalar as a frame 1-form.
    pub fn d_scalar(&self, f: &Jet) -> Form<Jet> {
        let n = self.dim();
        Form::from_components(n, 1, (0..n).map(|a| self.frame_derivative(f, a)).collect())
    }

    fn d_basis(&self, p: usize) -> &Vec<Form<Jet>> {
        self.dbasis[p].get_or_init(|| {
            let n = self.dim();
            basis_masks(n, p)
                .iter()
                .map(|&m| {
                    let ix = bits(m);
                    let mut acc = Form::<Jet>::zero(n, p + 1);
                    for k in 0..ix.len() {
                        let mut term = Form::<Jet>::scalar(n, Jet::cst(1.0));
                        for (j, &a) in ix.iter().enumerate() {
                            let f = if j == k { self.de[a].clone() } else { Form::basis1(n, a) };
                            term = term.wedge(&f);
                        }
                        if k.is_multiple_of(2) {
                            acc.add_assign(&term);
                        } else {
                            acc.sub_assign(&term);
                        }
                    }
                    acc
                })
                .collect()
        })
    }

    /// Exterior derivative of a frame-basis form.
    pub fn d(&self, f: &Form<Jet>) -> Form<Jet> {
        let n = self.dim();
        let p = f.degree();
        if p == n {
            return Form::zero(n, n);
        }
        let mut out = Form::<Jet>::zero(n, p + 1);
        let db = self.d_basis(p);
        for (i, &m) in basis_masks(n, p).iter().enumerate() {
            let c = f.c[i];
            if c.is_exact_zero() {
                continue;
            }
            // d(alpha_I) ^ e^I
            let t = tables(n);
            for a in 0..n {
                if m & (1 << a) != 0 {
                    continue;
                }
                let xa = self.frame_derivative(&c, a);
                let k = t.rank[(m | (1 << a)) as usize] as usize;
                if wedge_sign(1 << a, m) > 0.0 {
                    out.c[k] += xa;
                } else {
                    out.c[k] -= xa;
                }
            }
            out.add_assign(&db[i].times(c));
        }
        out
    }

    /// Re-expresses coordinate-basis components `w_J dx^J` in the frame.
    pub fn coord_to_frame(&self, p: usize, comps: &[Jet]) -> Form<Jet> {
        let n = self.dim();
        let mut out = Form::<Jet>::zero(n, p);
        for (j, &m) in basis_masks(n, p).iter().enumerate() {
            let c = comps[j];
            if c.is_exact_zero() {
                continue;
            }
            let mut b = Form::<Jet>::scalar(n, Jet::cst(1.0));
            for mu in bits(m) {
                b = b.wedge(&self.dx[mu]);
            }
            out.add_assign(&b.times(c));
        }
        out
    }

    /// Coordinate-basis components of a frame form.
    pub fn frame_to_coord(&self, f: &Form<Jet>) -> Vec<Jet> {
        let n = self.dim();
        let p = f.degree();
        let mut out = vec![Jet::cst(0.0); binomial(n, p)];
        let ea: Vec<Vec<Jet>> = (0..n).map(|a| self.e[a].clone()).collect();
        for (i, &m) in basis_masks(n, p).iter().enumerate() {
            let c = f.c[i];
            if c.is_exact_zero() {
                continue;
            }
            // e^I as coordinate form
            let mut coords: Vec<(u16, Jet)> = vec![(0, Jet::cst(1.0))];
            for a in bits(m) {
                let mut next: Vec<(u16, Jet)> = Vec::new();
                for (cm, cv) in &coords {
                    for mu in 0..n {
                        let bit = 1u16 << mu;
                        if cm & bit != 0 || ea[a][mu].is_exact_zero() {
                            continue;
                        }
                        let s = wedge_sign(*cm, bit);
                        next.push((cm | bit, (*cv * ea[a][mu]).scale(s)));
                    }
                }
                coords = next;
            }
            for (cm, cv) in coords {
                out[mask_rank(n, cm)] += cv * c;
            }
        }
        out
    }

    /// `D S` for an index-valued form and connection `conn[a*n+b] = Lambda^a_b`.
    pub fn covariant_d(&self, s: &IndexedForms, conn: &[Form<Jet>]) -> IndexedForms {
        let n = self.dim();
        let mut out = IndexedForms { n, slots: s.slots.clone(), comps: s.comps.iter().map(|f| self.d(f)).collect() };
        let r = s.slots.len();
        for flat in 0..s.comps.len() {
            let idx = s.unflatten(flat);
            for k in 0..r {
                for c in 0..n {
                    let mut j = idx.clone();
                    j[k] = c;
                    let src = &s.comps[s.flatten(&j)];
                    match s.slots[k] {
                        Slot::Up => {
                            let w = conn[idx[k] * n + c].wedge(src);
                            out.comps[flat].add_assign(&w);
                        }
                        Slot::Down => {
                            let w = conn[c * n + idx[k]].wedge(src);
                            out.comps[flat].sub_assign(&w);
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Up,
    Down,
}

/// A family of forms carrying frame indices, e.g. `S^a_b`.
#[derive(Debug, Clone)]
pub struct IndexedForms {
    pub n: usize,
    pub slots: Vec<Slot>,
    pub comps: Vec<Form<Jet>>,
}

impl IndexedForms {
    pub fn new(n: usize, slots: Vec<Slot>, comps: Vec<Form<Jet>>) -> Result<Self> {
        let want = n.pow(slots.len() as u32);
        if comps.len() != want {
            return Err(GeomError::IndexMismatch(format!("{} components for {want} index values", comps.len())));
        }
        Ok(IndexedForms { n, slots, comps })
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let r = self.slots.len();
        let mut idx = vec![0; r];
        for k in (0..r).rev() {
            idx[k] = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    pub fn get(&self, idx: &[usize]) -> &Form<Jet> {
        &self.comps[self.flatten(idx)]
    }
}

/// Which basis a symbolic form's components refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    Coordinate,
    Frame,
}

/// A symbolic p-form field.
#[derive(Debug, Clone)]
pub struct FormField {
    pub n: usize,
    pub p: usize,
    pub basis: Basis,
    pub comps: Vec<ScalarExpr>,
}

impl FormField {
    pub fn zero(n: usize, p: usize, basis: Basis) -> Self {
        FormField { n, p, basis, comps: vec![ScalarExpr::cst(0.0); binomial(n, p)] }
    }

    pub fn scalar(n: usize, e: ScalarExpr) -> Self {
        FormField { n, p: 0, basis: Basis::Coordinate, comps: vec![e] }
    }

    /// A coordinate 1-form from its components `w_mu`.
    pub fn coord_one_form(comps: Vec<ScalarExpr>) -> Self {
        FormField { n: comps.len(), p: 1, basis: Basis::Coordinate, comps }
    }

    /// A form from `(index list, component)` pairs.
    pub fn from_terms(n: usize, p: usize, basis: Basis, terms: &[(&[usize], ScalarExpr)]) -> Result<Self> {
        let mut f = FormField::zero(n, p, basis);
        for (idx, e) in terms {
            if idx.len() != p || idx.iter().any(|&i| i >= n) {
                return Err(GeomError::IndexMismatch(format!("term {idx:?} for a {p}-form in dim {n}")));
            }
            let mut m = 0u16;
            let mut sign = 1.0;
            for &a in *idx {
                if m & (1 << a) != 0 {
                    return Err(GeomError::IndexMismatch("repeated index".into()));
                }
                sign *= wedge_sign(m, 1 << a);
                m |= 1 << a;
            }
            let k = mask_rank(n, m);
            f.comps[k] = f.comps[k].add(&e.scale(sign));
        }
        Ok(f)
    }

    /// Symbolic exterior derivative of a coordinate-basis form.
    pub fn d(&self) -> Result<FormField> {
        if self.basis != Basis::Coordinate {
            return Err(GeomError::ChartMismatch("symbolic d needs coordinate components".into()));
        }
        let n = self.n;
        let mut acc: Vec<Vec<ScalarExpr>> = vec![Vec::new(); binomial(n, self.p + 1)];
        for (j, &m) in basis_masks(n, self.p).iter().enumerate() {
            let w = &self.comps[j];
            if w.is_zero() {
                continue;
            }
            for mu in 0..n {
                if m & (1 << mu) != 0 {
                    continue;
                }
                let dw = w.differentiate(mu);
                if dw.is_zero() {
                    continue;
                }
                let k = mask_rank(n, m | (1 << mu));
                acc[k].push(dw.scale(wedge_sign(1 << mu, m)));
            }
        }
        Ok(FormField { n, p: self.p + 1, basis: Basis::Coordinate, comps: acc.into_iter().map(expr::add).collect() })
    }

    pub fn scale_by(&self, f: &ScalarExpr) -> FormField {
        FormField { comps: self.comps.iter().map(|c| c.mul(f)).collect(), ..self.clone() }
    }

    pub fn plus(&self, o: &FormField) -> Result<FormField> {
        if self.n != o.n || self.p != o.p || self.basis != o.basis {
            return Err(GeomError::IndexMismatch("adding forms of different shape".into()));
        }
        Ok(FormField { comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a.add(b)).collect(), ..self.clone() })
    }

    /// Frame-basis jets at a point.
    pub fn at(&self, fr: &FrameAt<'_>) -> Result<Form<Jet>> {
        if self.n != fr.dim() {
            return Err(GeomError::ChartMismatch(format!(
                "{}-dimensional form on a {}-dimensional chart",
                self.n,
                fr.dim()
            )));
        }
        let mut comps = Vec::with_capacity(self.comps.len());
        for c in &self.comps {
            if c.max_coord_index().is_some_and(|i| i >= fr.dim()) {
                return Err(GeomError::ChartMismatch("form references a foreign coordinate".into()));
            }
            comps.push(c.jet(&fr.point, fr.order)?);
        }
        Ok(match self.basis {
            Basis::Frame => Form::from_components(self.n, self.p, comps),
            Basis::Coordinate => fr.coord_to_frame(self.p, &comps),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_e0_in_four_dimensions() {
        let eta = lorentzian(4);
        let s = Form::<f64>::basis1(4, 0).hodge(&eta);
        let want = Form::<f64>::basis(4, &[1, 2, 3]).scale(-1.0);
        assert_eq!(s, want);
    }

    #[test]
    fn wedge_antisymmetry() {
        let a = Form::<f64>::basis(5, &[3, 1]);
        assert_eq!(a, Form::basis(5, &[1, 3]).scale(-1.0));
        assert_eq!(a.comp(&[3, 1]), 1.0);
        assert_eq!(a.comp(&[1, 3]), -1.0);
    }

    #[test]
    fn interior_of_basis() {
        let f = Form::<f64>::basis(4, &[0, 2, 3]);
        assert_eq!(f.interior(2), Form::basis(4, &[0, 3]).scale(-1.0));
        assert_eq!(f.interior(1), Form::zero(4, 2));
    }

    #[test]
    fn symbolic_d_of_coordinate_form() {
        let chart = Chart::flat(3);
        let x0 = chart.coord("x0").unwrap();
        let x1 = chart.coord("x1").unwrap();
        // w = x0 x1 dx2
        let w = FormField::from_terms(3, 1, Basis::Coordinate, &[(&[2], x0.mul(&x1))]).unwrap();
        let dw = w.d().unwrap();
        let fr = chart.at(&[2.0, 3.0, 0.5], 2).unwrap();
        let v = dw.at(&fr).unwrap();
        assert!((v.comp(&[0, 2]).val() - 3.0).abs() < 1e-15);
        assert!((v.comp(&[1, 2]).val() - 2.0).abs() < 1e-15);
    }
}
