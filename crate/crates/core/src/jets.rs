//! Second-order Wirtinger jets.
//!
//! A [`Jet`] carries a complex value together with its first and second
//! derivatives with respect to the `4n` coordinate slots of a point pair
//! `(z, ζ)`: `∂/∂z_a`, `∂/∂z̄_a`, `∂/∂ζ_a`, `∂/∂ζ̄_a`. The barred slots are
//! independent variables, so non-holomorphic expressions such as
//! `1 / (1 + z z̄)` differentiate exactly.
//!
//! Each jet has an *order* (0, 1 or 2): the number of derivative orders that
//! are still valid. Arithmetic propagates the minimum order of its operands and
//! [`Jet::derivative`] consumes one order. Empty gradient or Hessian storage
//! stands for zeros, so constants cost no allocation.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Coordinate family of a jet slot. The slot layout matches the differential
/// generators of the superalgebra: `dz`, `dz̄`, `dζ`, `dζ̄`, `n` each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SlotKind {
    Z,
    ZBar,
    W,
    WBar,
}

impl SlotKind {
    pub fn offset(self, n: usize) -> usize {
        match self {
            SlotKind::Z => 0,
            SlotKind::ZBar => n,
            SlotKind::W => 2 * n,
            SlotKind::WBar => 3 * n,
        }
    }

    pub fn slot(self, index: usize, n: usize) -> usize {
        self.offset(n) + index
    }

    pub fn is_antiholomorphic(self) -> bool {
        matches!(self, SlotKind::ZBar | SlotKind::WBar)
    }
}

/// Slot reached by complex conjugation: `z_a <-> z̄_a`, `ζ_a <-> ζ̄_a`.
fn conj_slot(s: usize, n: usize) -> usize {
    match s / n {
        0 | 2 => s + n,
        _ => s - n,
    }
}

#[derive(Clone, PartialEq)]
pub struct Jet {
    value: C64,
    order: u8,
    grad: Vec<C64>,
    hess: Vec<C64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet{{{} | o{}", self.value, self.order)?;
        if !self.grad.is_empty() {
            write!(f, " | grad={:?}", self.grad)?;
        }
        write!(f, "}}")
    }
}

impl Jet {
    /// An exact constant: all derivatives zero at every order.
    pub fn constant(value: C64) -> Self {
        Jet {
            value,
            order: 2,
            grad: Vec::new(),
            hess: Vec::new(),
        }
    }

    /// A value with no derivative information.
    pub fn value_only(value: C64) -> Self {
        Jet {
            value,
            order: 0,
            grad: Vec::new(),
            hess: Vec::new(),
        }
    }

    /// Seeded coordinate: unit gradient in `slot`, zero Hessian, order 2.
    pub fn variable(value: C64, slot: usize, nslots: usize) -> Self {
        assert!(slot < nslots, "slot {slot} out of range for {nslots} slots");
        let mut grad = vec![ZERO; nslots];
        grad[slot] = ONE;
        Jet {
            value,
            order: 2,
            grad,
            hess: Vec::new(),
        }
    }

    pub fn value(&self) -> C64 {
        self.value
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    fn nslots(&self) -> usize {
        self.grad.len()
    }

    /// First derivative in `slot`, if the jet still carries first-order data.
    pub fn d(&self, slot: usize) -> Option<C64> {
        (self.order >= 1).then(|| self.grad.get(slot).copied().unwrap_or(ZERO))
    }

    /// Second derivative in `(s, t)`, if available.
    pub fn d2(&self, s: usize, t: usize) -> Option<C64> {
        if self.order < 2 {
            return None;
        }
        let ns = self.nslots();
        Some(if self.hess.is_empty() || ns == 0 {
            ZERO
        } else {
            self.hess[s * ns + t]
        })
    }

    pub fn is_zero(&self) -> bool {
        self.value == ZERO
            && (self.order == 0 || self.grad.iter().all(|g| *g == ZERO))
            && (self.order < 2 || self.hess.iter().all(|h| *h == ZERO))
    }

    /// Largest magnitude over value and the retained derivative data.
    pub fn magnitude(&self) -> f64 {
        let mut m = self.value.norm();
        if self.order >= 1 {
            m = self.grad.iter().fold(m, |acc, g| acc.max(g.norm()));
        }
        if self.order >= 2 {
            m = self.hess.iter().fold(m, |acc, h| acc.max(h.norm()));
        }
        m
    }

    pub fn truncate(&self, order: u8) -> Jet {
        let order = order.min(self.order);
        Jet {
            value: self.value,
            order,
            grad: if order >= 1 { self.grad.clone() } else { Vec::new() },
            hess: if order >= 2 { self.hess.clone() } else { Vec::new() },
        }
    }

    pub fn scale(&self, c: C64) -> Jet {
        Jet {
            value: self.value * c,
            order: self.order,
            grad: self.grad.iter().map(|g| g * c).collect(),
            hess: self.hess.iter().map(|h| h * c).collect(),
        }
    }

    fn linear(&self, other: &Jet, sign: f64) -> Jet {
        let order = self.order.min(other.order);
        let value = self.value + other.value * sign;
        let grad = if order >= 1 {
            combine(&self.grad, &other.grad, sign)
        } else {
            Vec::new()
        };
        let hess = if order >= 2 {
            combine(&self.hess, &other.hess, sign)
        } else {
            Vec::new()
        };
        Jet {
            value,
            order,
            grad,
            hess,
        }
    }

    pub fn add_assign(&mut self, other: &Jet) {
        self.accumulate(other, 1.0);
    }

    pub fn sub_assign(&mut self, other: &Jet) {
        self.accumulate(other, -1.0);
    }

    fn accumulate(&mut self, other: &Jet, sign: f64) {
        let order = self.order.min(other.order);
        self.value += other.value * sign;
        self.order = order;
        if order >= 1 {
            accumulate_into(&mut self.grad, &other.grad, sign);
        } else {
            self.grad.clear();
        }
        if order >= 2 {
            accumulate_into(&mut self.hess, &other.hess, sign);
        } else {
            self.hess.clear();
        }
    }

    pub fn mul_jet(&self, other: &Jet) -> Jet {
        let order = self.order.min(other.order);
        let (a, b) = (self.value, other.value);
        let value = a * b;
        if order == 0 {
            return Jet::value_only(value);
        }
        let ns = self.nslots().max(other.nslots());
        let mut grad = Vec::new();
        if ns > 0 {
            grad = vec![ZERO; ns];
            for (s, g) in self.grad.iter().enumerate() {
                grad[s] += g * b;
            }
            for (s, g) in other.grad.iter().enumerate() {
                grad[s] += g * a;
            }
        }
        let mut hess = Vec::new();
        if order >= 2 && ns > 0 {
            let both_grad = !self.grad.is_empty() && !other.grad.is_empty();
            if both_grad || !self.hess.is_empty() || !other.hess.is_empty() {
                hess = vec![ZERO; ns * ns];
                for (i, h) in self.hess.iter().enumerate() {
                    hess[i] += h * b;
                }
                for (i, h) in other.hess.iter().enumerate() {
                    hess[i] += h * a;
                }
                if both_grad {
                    for s in 0..ns {
                        let (ga, gb) = (self.grad[s], other.grad[s]);
                        if ga == ZERO && gb == ZERO {
                            continue;
                        }
                        for t in 0..ns {
                            hess[s * ns + t] += ga * other.grad[t] + gb * self.grad[t];
                        }
                    }
                }
            }
        }
        Jet {
            value,
            order,
            grad,
            hess,
        }
    }

    /// Applies a scalar function given its value and first two derivatives at
    /// `self.value`.
    pub fn compose(&self, f0: C64, f1: C64, f2: C64) -> Jet {
        let order = self.order;
        let grad: Vec<C64> = if order >= 1 {
            self.grad.iter().map(|g| g * f1).collect()
        } else {
            Vec::new()
        };
        let mut hess = Vec::new();
        if order >= 2 && !self.grad.is_empty() {
            let ns = self.nslots();
            hess = vec![ZERO; ns * ns];
            if !self.hess.is_empty() {
                for (i, h) in self.hess.iter().enumerate() {
                    hess[i] = h * f1;
                }
            }
            for s in 0..ns {
                let gs = self.grad[s] * f2;
                if gs == ZERO {
                    continue;
                }
                for t in 0..ns {
                    hess[s * ns + t] += gs * self.grad[t];
                }
            }
        }
        Jet {
            value: f0,
            order,
            grad,
            hess,
        }
    }

    pub fn recip(&self) -> Result<Jet> {
        if self.value == ZERO {
            return Err(Error::ArithmeticDomain("division by zero"));
        }
        let inv = self.value.inv();
        Ok(self.compose(inv, -inv * inv, 2.0 * inv * inv * inv))
    }

    pub fn checked_div(&self, other: &Jet) -> Result<Jet> {
        Ok(self.mul_jet(&other.recip()?))
    }

    /// Natural logarithm; only defined for (numerically) positive real values.
    pub fn ln(&self) -> Result<Jet> {
        let v = self.value;
        if !(v.re > 0.0) || v.im.abs() > 1e-12 * v.re {
            return Err(Error::ArithmeticDomain(
                "logarithm of a non-positive or non-real value",
            ));
        }
        let inv = v.inv();
        Ok(self.compose(C64::new(v.re.ln(), 0.0), inv, -inv * inv))
    }

    pub fn powi(&self, p: i32) -> Result<Jet> {
        if p < 0 {
            return self.recip()?.powi(-p);
        }
        let v = self.value;
        let pf = p as f64;
        let f0 = v.powi(p);
        let f1 = if p >= 1 { v.powi(p - 1) * pf } else { ZERO };
        let f2 = if p >= 2 {
            v.powi(p - 2) * (pf * (pf - 1.0))
        } else {
            ZERO
        };
        Ok(self.compose(f0, f1, f2))
    }

    /// Complex conjugate: conjugates every entry and swaps holomorphic and
    /// antiholomorphic slots.
    pub fn conj(&self) -> Jet {
        let ns = self.nslots();
        let grad = if ns == 0 {
            Vec::new()
        } else {
            let n = ns / 4;
            (0..ns).map(|s| self.grad[conj_slot(s, n)].conj()).collect()
        };
        let hess = if self.hess.is_empty() {
            Vec::new()
        } else {
            let n = ns / 4;
            let mut h = vec![ZERO; ns * ns];
            for s in 0..ns {
                let cs = conj_slot(s, n);
                for t in 0..ns {
                    h[s * ns + t] = self.hess[cs * ns + conj_slot(t, n)].conj();
                }
            }
            h
        };
        Jet {
            value: self.value.conj(),
            order: self.order,
            grad,
            hess,
        }
    }

    /// Partial derivative in `slot`, consuming one jet order.
    pub fn derivative(&self, slot: usize) -> Result<Jet> {
        if self.order == 0 {
            return Err(Error::JetOrderExhausted);
        }
        let ns = self.nslots();
        let value = self.grad.get(slot).copied().unwrap_or(ZERO);
        let order = self.order - 1;
        let grad = if order >= 1 && !self.hess.is_empty() {
            self.hess[slot * ns..(slot + 1) * ns].to_vec()
        } else {
            Vec::new()
        };
        Ok(Jet {
            value,
            order,
            grad,
            hess: Vec::new(),
        })
    }
}

fn combine(a: &[C64], b: &[C64], sign: f64) -> Vec<C64> {
    let len = a.len().max(b.len());
    (0..len)
        .map(|i| a.get(i).copied().unwrap_or(ZERO) + b.get(i).copied().unwrap_or(ZERO) * sign)
        .collect()
}

fn accumulate_into(a: &mut Vec<C64>, b: &[C64], sign: f64) {
    if b.is_empty() {
        return;
    }
    if a.len() < b.len() {
        a.resize(b.len(), ZERO);
    }
    for (x, y) in a.iter_mut().zip(b) {
        *x += y * sign;
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.linear(rhs, 1.0)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.linear(rhs, -1.0)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.mul_jet(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-ONE)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        &self + &rhs
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        &self - &rhs
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        &self * &rhs
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        -&self
    }
}

/// Dense matrix of jets, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct JetMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Jet>,
}

impl JetMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Jet) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        JetMatrix { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            Jet::constant(if i == j { ONE } else { ZERO })
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| Jet::constant(ZERO))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Jet {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Jet) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[Jet] {
        &self.data
    }

    pub fn map(&self, f: impl Fn(&Jet) -> Jet) -> Self {
        JetMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn values(&self) -> nalgebra::DMatrix<C64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).value())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn conj(&self) -> Self {
        self.map(Jet::conj)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn matmul(&self, other: &JetMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = Jet::constant(ZERO);
            for l in 0..self.cols {
                acc.add_assign(&(self.get(i, l) * other.get(l, j)));
            }
            acc
        }))
    }

    pub fn add(&self, other: &JetMatrix) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j) + other.get(i, j)
        }))
    }

    pub fn sub(&self, other: &JetMatrix) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j) - other.get(i, j)
        }))
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map(|x| x.scale(c))
    }

    fn check_same(&self, other: &JetMatrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    /// Kronecker product; row index `(i, j) -> i * other.rows + j`.
    pub fn kron(&self, other: &JetMatrix) -> Self {
        Self::from_fn(self.rows * other.rows, self.cols * other.cols, |r, c| {
            let (i, j) = (r / other.rows, r % other.rows);
            let (a, b) = (c / other.cols, c % other.cols);
            self.get(i, a) * other.get(j, b)
        })
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting on the value
    /// parts; every step is carried out in jet arithmetic.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.square_dim()?;
        let mut a = self.clone();
        let mut inv = JetMatrix::identity(n);
        for c in 0..n {
            let p = pivot_row(&a, c, n)?;
            if p != c {
                a.swap_rows(p, c);
                inv.swap_rows(p, c);
            }
            let r = a.get(c, c).recip()?;
            for j in 0..n {
                let v = a.get(c, j) * &r;
                a.set(c, j, v);
                let w = inv.get(c, j) * &r;
                inv.set(c, j, w);
            }
            for i in 0..n {
                if i == c {
                    continue;
                }
                let f = a.get(i, c).clone();
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let v = a.get(i, j) - &(&f * a.get(c, j));
                    a.set(i, j, v);
                    let w = inv.get(i, j) - &(&f * inv.get(c, j));
                    inv.set(i, j, w);
                }
            }
        }
        Ok(inv)
    }

    /// Determinant via the same elimination as [`JetMatrix::inverse`].
    pub fn det(&self) -> Result<Jet> {
        let n = self.square_dim()?;
        let mut a = self.clone();
        let mut det = Jet::constant(ONE);
        for c in 0..n {
            let p = match pivot_row(&a, c, n) {
                Ok(p) => p,
                Err(Error::SingularMatrix { .. }) => return Ok(det.mul_jet(&Jet::constant(ZERO))),
                Err(e) => return Err(e),
            };
            if p != c {
                a.swap_rows(p, c);
                det = -det;
            }
            let piv = a.get(c, c).clone();
            det = &det * &piv;
            let r = piv.recip()?;
            for i in c + 1..n {
                let f = a.get(i, c) * &r;
                if f.is_zero() {
                    continue;
                }
                for j in c..n {
                    let v = a.get(i, j) - &(&f * a.get(c, j));
                    a.set(i, j, v);
                }
            }
        }
        Ok(det)
    }

    fn square_dim(&self) -> Result<usize> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "square matrix required, got {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(self.rows)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

fn pivot_row(a: &JetMatrix, c: usize, n: usize) -> Result<usize> {
    let (p, mag) = (c..n)
        .map(|i| (i, a.get(i, c).value().norm()))
        .fold((c, -1.0), |best, x| if x.1 > best.1 { x } else { best });
    if mag == 0.0 || !mag.is_finite() {
        return Err(Error::SingularMatrix { pivot: mag });
    }
    Ok(p)
}
