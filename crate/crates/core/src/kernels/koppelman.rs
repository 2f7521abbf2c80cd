//! Koppelman formula for functions, `ψ(z) = ∫ K ∧ ∂̄ψ + ∫ P ψ`, integrated
//! over the second variable by Monte Carlo.

use crate::error::Result;
use crate::geometry::{ChartMatrix, PointPair, Seeded, Shape, Side};
use crate::jets::{Jet, C64};
use crate::quadrature::{integrate_excluding, normalized_density, Estimate, QuadratureSpec};
use crate::superalg::{family_mask, GenKind, Multivector, Vars};

use super::{k_weighted, p_weighted};

/// Outcome at one point `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KoppelmanPoint {
    pub psi: C64,
    /// `∫ P ψ`.
    pub projection: Estimate,
    /// `∫ K ∧ ∂̄ψ`.
    pub homotopy: Estimate,
}

impl KoppelmanPoint {
    /// `|ψ(z) − ∫ P ψ − ∫ K ∧ ∂̄ψ|`.
    pub fn residual(&self) -> f64 {
        (self.psi - self.projection.value - self.homotopy.value).norm()
    }
}

/// `ψ = 1 / (1 + |ζ|²)`-type test function supplied as a jet expression in
/// the `ζ` coordinates.
pub type TestFunction = dyn Fn(&crate::jets::JetMatrix, &crate::jets::JetMatrix) -> Jet + Sync;

/// Coefficient turning a top form in `ζ` (canonical order) into a density
/// with respect to Lebesgue measure: `dζ_1…dζ_n dζ̄_1…dζ̄_n =
/// (−1)^{n(n−1)/2} (−2i)^n dλ`.
fn top_form_to_lebesgue(n: usize) -> C64 {
    let sign = if (n * n.saturating_sub(1) / 2) % 2 == 1 { -1.0 } else { 1.0 };
    C64::new(0.0, -2.0).powi(n as i32) * sign
}

/// Runs the check at `z` with the unweighted kernels (`r = 0`).
pub fn koppelman_function_check(
    shape: Shape,
    z: &ChartMatrix,
    psi: &TestFunction,
    spec: &QuadratureSpec,
) -> Result<KoppelmanPoint> {
    let n = shape.n();
    let top = family_mask(GenKind::Dw, n) | family_mask(GenKind::DwBar, n);
    let zforms = family_mask(GenKind::Dz, n) | family_mask(GenKind::DzBar, n);
    let to_density = top_form_to_lebesgue(n);
    let own = Seeded::new(shape, &PointPair::new(z.clone(), z.clone()), 0);
    let (w0, wb0) = own.point(Side::W);
    let psi_z = psi(w0, wb0).value();

    // top-degree ζ coefficient divided by the density of μ
    let per_measure = |w: &ChartMatrix, form: &Multivector<C64>| -> C64 {
        let c = form.coefficient(top).copied().unwrap_or_default();
        c * to_density / normalized_density(shape, w.matrix())
    };
    let projection = integrate_excluding(shape, spec, Some(z), &|w| {
        let s = Seeded::new(shape, &PointPair::new(z.clone(), w.clone()), 1);
        let (ww, wb) = s.point(Side::W);
        let p = match p_weighted(&s, 0) {
            Ok(p) => p.values().filter(|m| m & zforms == 0),
            Err(_) => return C64::new(0.0, 0.0),
        };
        per_measure(w, &p) * psi(ww, wb).value()
    })?;
    let homotopy = integrate_excluding(shape, spec, Some(z), &|w| {
        let s = Seeded::new(shape, &PointPair::new(z.clone(), w.clone()), 1);
        let (ww, wb) = s.point(Side::W);
        let Ok(k) = k_weighted(&s, 0) else {
            return C64::new(0.0, 0.0);
        };
        let k = k.values().filter(|m| m & zforms == 0);
        let Ok(dpsi) = Multivector::scalar(n, psi(ww, wb)).dbar(Vars::W) else {
            return C64::new(0.0, 0.0);
        };
        per_measure(w, &k.wedge(&dpsi.values()))
    })?;
    Ok(KoppelmanPoint {
        psi: psi_z,
        projection,
        homotopy,
    })
}

/// `ψ(ζ) = 1 / (1 + |ζ|²)` on `CP^n` charts (`k = 1`), extended by
/// `1 / det(I + ζ*ζ)` in general.
pub fn fubini_study_factor(w: &crate::jets::JetMatrix, wbar: &crate::jets::JetMatrix) -> Jet {
    let k = w.cols();
    let m = crate::jets::JetMatrix::identity(k)
        .add(&wbar.transpose().matmul(w).expect("conformable"))
        .expect("conformable");
    m.det().and_then(|d| d.recip()).expect("positive definite")
}

/// `∫ψ dμ` for [`fubini_study_factor`] on `CP^1`, which equals `∫ P ψ`.
pub const CP1_PSI_MEAN: f64 = 0.5;
