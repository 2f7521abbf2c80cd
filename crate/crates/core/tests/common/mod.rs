//! Random jet expressions with a plain complex evaluator, and finite
//! difference Wirtinger derivatives to compare against.
#![allow(dead_code)]

use gkl::jets::{Jet, C64};
use gkl::sampling::{complex_normal, Rng};
use rand::Rng as _;

/// Number of complex variables in the generated expressions.
pub const VARS: usize = 2;

#[derive(Debug, Clone)]
pub enum Expr {
    Z(usize),
    ZBar(usize),
    Const(C64),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    /// `1 / (1 + |a|²)`
    Recip(Box<Expr>),
    /// `ln(1 + |a|²)`
    Ln(Box<Expr>),
    Pow(Box<Expr>, i32),
    Exp(Box<Expr>),
}

impl Expr {
    pub fn random(rng: &mut Rng, depth: u32) -> Expr {
        let leaf = depth == 0 || rng.random_bool(0.25);
        if leaf {
            return match rng.random_range(0..3) {
                0 => Expr::Z(rng.random_range(0..VARS)),
                1 => Expr::ZBar(rng.random_range(0..VARS)),
                _ => Expr::Const(complex_normal(rng) * 0.7),
            };
        }
        let op = rng.random_range(0..7);
        let mut sub = || Box::new(Expr::random(rng, depth - 1));
        match op {
            0 => Expr::Add(sub(), sub()),
            1 => Expr::Sub(sub(), sub()),
            2 => Expr::Mul(sub(), sub()),
            3 => Expr::Recip(sub()),
            4 => Expr::Ln(sub()),
            5 => Expr::Pow(sub(), 2 + depth as i32 % 2),
            _ => Expr::Exp(Box::new(Expr::Mul(Box::new(Expr::Const(C64::new(0.3, 0.2))), sub()))),
        }
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        let one = C64::new(1.0, 0.0);
        match self {
            Expr::Z(i) => z[*i],
            Expr::ZBar(i) => z[*i].conj(),
            Expr::Const(c) => *c,
            Expr::Add(a, b) => a.eval(z) + b.eval(z),
            Expr::Sub(a, b) => a.eval(z) - b.eval(z),
            Expr::Mul(a, b) => a.eval(z) * b.eval(z),
            Expr::Recip(a) => one / (one + a.eval(z).norm_sqr()),
            Expr::Ln(a) => C64::new((1.0 + a.eval(z).norm_sqr()).ln(), 0.0),
            Expr::Pow(a, p) => a.eval(z).powi(*p),
            Expr::Exp(a) => a.eval(z).exp(),
        }
    }

    /// Jet evaluation in the 4n slot layout with `n = VARS`, variables in
    /// the `z` family.
    pub fn eval_jet(&self, z: &[C64]) -> Jet {
        let ns = 4 * VARS;
        let one = Jet::constant(C64::new(1.0, 0.0));
        match self {
            Expr::Z(i) => Jet::variable(z[*i], *i, ns),
            Expr::ZBar(i) => Jet::variable(z[*i], *i, ns).conj(),
            Expr::Const(c) => Jet::constant(*c),
            Expr::Add(a, b) => a.eval_jet(z) + b.eval_jet(z),
            Expr::Sub(a, b) => a.eval_jet(z) - b.eval_jet(z),
            Expr::Mul(a, b) => a.eval_jet(z) * b.eval_jet(z),
            Expr::Recip(a) => {
                let a = a.eval_jet(z);
                (&one + &(&a * &a.conj())).recip().unwrap()
            }
            Expr::Ln(a) => {
                let a = a.eval_jet(z);
                (&one + &(&a * &a.conj())).ln().unwrap()
            }
            Expr::Pow(a, p) => a.eval_jet(z).powi(*p).unwrap(),
            Expr::Exp(a) => {
                let a = a.eval_jet(z);
                let e = a.value().exp();
                a.compose(e, e, e)
            }
        }
    }
}

fn shifted(z: &[C64], real: usize, h: f64) -> Vec<C64> {
    let mut out = z.to_vec();
    let d = if real.is_multiple_of(2) { C64::new(h, 0.0) } else { C64::new(0.0, h) };
    out[real / 2] += d;
    out
}

/// Fourth-order central difference along real coordinate `real`
/// (`2a` is `Re z_a`, `2a+1` is `Im z_a`).
fn central(f: &dyn Fn(&[C64]) -> C64, z: &[C64], real: usize, h: f64) -> C64 {
    let at = |k: f64| f(&shifted(z, real, k * h));
    (at(-2.0) - at(2.0) + (at(1.0) - at(-1.0)) * 8.0) / (12.0 * h)
}

/// Wirtinger derivative along slot `s` (`s < VARS` holomorphic, else
/// antiholomorphic) of a function given by real-coordinate derivatives.
fn wirtinger(real_d: &dyn Fn(usize) -> C64, s: usize) -> C64 {
    let (a, anti) = if s < VARS { (s, false) } else { (s - VARS, true) };
    let dx = real_d(2 * a);
    let dy = real_d(2 * a + 1);
    let i = C64::new(0.0, 1.0);
    if anti {
        (dx + i * dy) * 0.5
    } else {
        (dx - i * dy) * 0.5
    }
}

/// Finite-difference first Wirtinger derivatives over the `2·VARS`
/// `z`/`z̄` slots.
pub fn fd_gradient(f: &dyn Fn(&[C64]) -> C64, z: &[C64], h: f64) -> Vec<C64> {
    (0..2 * VARS)
        .map(|s| wirtinger(&|real| central(f, z, real, h), s))
        .collect()
}

/// Finite-difference second Wirtinger derivatives, nested stencils.
pub fn fd_hessian(f: &dyn Fn(&[C64]) -> C64, z: &[C64], h: f64) -> Vec<Vec<C64>> {
    (0..2 * VARS)
        .map(|s| {
            let ds = |w: &[C64]| wirtinger(&|real| central(f, w, real, h), s);
            (0..2 * VARS)
                .map(|t| wirtinger(&|real| central(&ds, z, real, h), t))
                .collect()
        })
        .collect()
}

/// Largest relative deviation between jet and finite-difference first and
/// second derivatives of `e` at `z`, relative to `max(1, |derivative|)`.
/// FD slot `s` is jet slot `s`: `z_a` is `a`, `z̄_a` is `VARS + a`.
pub fn fd_deviation(e: &Expr, z: &[C64]) -> f64 {
    let f = |w: &[C64]| e.eval(w);
    let jet = e.eval_jet(z);
    let grad = fd_gradient(&f, z, 1e-3);
    let hess = fd_hessian(&f, z, 2e-3);
    let mut worst: f64 = (jet.value() - e.eval(z)).norm() / e.eval(z).norm().max(1.0);
    let scale = grad
        .iter()
        .chain(hess.iter().flatten())
        .fold(1.0_f64, |m, x| m.max(x.norm()));
    for s in 0..2 * VARS {
        let d = jet.d(s).unwrap();
        worst = worst.max((d - grad[s]).norm() / scale);
        for t in 0..2 * VARS {
            let d2 = jet.d2(s, t).unwrap();
            worst = worst.max((d2 - hess[s][t]).norm() / scale);
        }
    }
    worst
}
