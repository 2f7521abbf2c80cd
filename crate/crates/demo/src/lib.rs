//! Browser bindings: a kernel heat map on `CP^1`, Bergman reproduction of
//! monomials and a small verification suite.

use gkl::geometry::{ChartMatrix, Shape};
use gkl::jets::C64;
use gkl::kernels::bergman::{analytic_constant, bergman_reproduce, det_gamma0, Section};
use gkl::quadrature::QuadratureSpec;
use gkl::suite::{suite_report, SuiteConfig};
use nalgebra::DMatrix;
use wasm_bindgen::prelude::*;

fn cp1() -> Shape {
    Shape::new(1, 2).expect("CP^1")
}

/// `log10 |det γ₀(z, ζ)|^r` on a `size × size` grid of `z` covering
/// `[-extent, extent]²`, row-major with imaginary part decreasing downwards.
#[wasm_bindgen]
pub fn kernel_field(r: i32, zeta_re: f64, zeta_im: f64, size: usize, extent: f64) -> Vec<f64> {
    let zeta = DMatrix::from_element(1, 1, C64::new(zeta_re, zeta_im));
    let step = if size > 1 { 2.0 * extent / (size - 1) as f64 } else { 0.0 };
    let mut out = Vec::with_capacity(size * size);
    for row in 0..size {
        let im = extent - row as f64 * step;
        for col in 0..size {
            let re = -extent + col as f64 * step;
            let z = DMatrix::from_element(1, 1, C64::new(re, im));
            out.push(r as f64 * det_gamma0(&z, &zeta).norm().log10());
        }
    }
    out
}

/// Reproduces `z^exponent` at `ζ` from `L^{-r}` on `CP^1` with a Gauss rule.
/// Returns `[estimate re, estimate im, exact re, exact im]`.
#[wasm_bindgen]
pub fn bergman(r: i32, exponent: u32, zeta_re: f64, zeta_im: f64, nodes: usize) -> Result<Vec<f64>, String> {
    let shape = cp1();
    let zeta = ChartMatrix::from_flat(shape, &[C64::new(zeta_re, zeta_im)]).map_err(|e| e.to_string())?;
    let section = Section::monomial(if exponent == 0 { vec![] } else { vec![[1, 1, exponent]] });
    let constant = analytic_constant(shape, r).ok_or("r must be non-negative")?;
    let est = bergman_reproduce(shape, r, &section, &zeta, &QuadratureSpec::gauss(nodes), constant)
        .map_err(|e| e.to_string())?;
    let exact = section.eval(&zeta);
    Ok(vec![est.value.re, est.value.im, exact.re, exact.im])
}

/// Runs the named checks (comma separated, or `all`) and returns the JSON report.
#[wasm_bindgen]
pub fn verify(k: usize, big_n: usize, r: i32, checks: &str, points: usize, seed: u64) -> Result<String, String> {
    let config = SuiteConfig {
        k,
        big_n,
        r: vec![r],
        checks: checks.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect(),
        points,
        seed,
        tol: None,
        timings: false,
    };
    let report = suite_report(&config).map_err(|e| e.to_string())?;
    serde_json::to_string_pretty(&report).map_err(|e| e.to_string())
}
