//! The weighted Koppelman kernels `K_{g^r}`, `P_{g^r}` and the objects built
//! from them.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{self, Bundle, Seeded, Side};
use crate::jets::{Jet, C64};
use crate::superalg::{GenKind, HomMatrix, Multivector, Vars};

pub mod audit;
pub mod bergman;
pub mod koppelman;

/// `i / 2π`.
pub fn i_over_2pi() -> C64 {
    C64::new(0.0, 1.0 / (2.0 * PI))
}

/// `1 / 2πi`.
pub fn inv_2pi_i() -> C64 {
    C64::new(0.0, -1.0 / (2.0 * PI))
}

/// `u = σ ∧ Σ_{m<n} (∂̄σ)^m`, the solution of `∇_η u = 1` off the diagonal.
pub fn u_form(s: &Seeded) -> Result<Multivector> {
    let n = s.shape().n();
    let sigma = geometry::sigma(s)?;
    let dsigma = sigma.dbar(Vars::Both)?;
    let mut power = Multivector::one(n);
    let mut sum = Multivector::zero(n);
    for m in 0..n {
        if m > 0 {
            power = power.wedge(&dsigma);
        }
        sum.add_assign(&power);
    }
    Ok(sigma.wedge(&sum))
}

/// Supercurvature `S = Dη / 2πi + iΘ̃ / 2π`.
pub fn supercurvature(s: &Seeded) -> Result<Multivector> {
    let dn = geometry::d_eta(s)?.scale(inv_2pi_i());
    let tt = geometry::theta_tilde(s)?.scale(i_over_2pi());
    Ok(dn.add(&tt))
}

/// Factors `x_I = e_I ∧ w_I` with `S = Σ_I x_I`.
///
/// The `x_I` are even, commute and square to zero, hence
/// `S^n / n! = x_1 ∧ … ∧ x_n`.
pub fn supercurvature_factors(s: &Seeded) -> Result<Vec<Multivector>> {
    let n = s.shape().n();
    let comps = geometry::d_eta_components(s)?;
    let theta = geometry::curvature(s, Bundle::E)?;
    let mut out = Vec::with_capacity(n);
    for (i, comp) in comps.iter().enumerate() {
        // e_I ∧ (Dη)_I/2πi = −(Dη)_I ∧ e_I/2πi
        let mut w = comp.scale(-inv_2pi_i());
        for j in 0..n {
            let t = theta.get(i, j);
            if t.is_empty() {
                continue;
            }
            let estar = Multivector::generator(n, GenKind::EStar, j);
            w.add_assign(&t.wedge(&estar).scale(i_over_2pi()));
        }
        out.push(Multivector::generator(n, GenKind::E, i).wedge(&w));
    }
    Ok(out)
}

/// `S_n = S^n / n!` via the factorization.
pub fn top_power(s: &Seeded) -> Result<Multivector> {
    let n = s.shape().n();
    let mut acc = Multivector::one(n);
    for x in supercurvature_factors(s)? {
        acc = acc.wedge(&x);
    }
    Ok(acc)
}

/// `P_{g^r} = ∫_E g^r ∧ S_n` for `r ≥ 0`; see [`p_weighted_values`] for all `r`.
pub fn p_weighted(s: &Seeded, r: i32) -> Result<Multivector> {
    if r < 0 {
        return Err(Error::ArithmeticDomain("negative powers are evaluated by role swap"));
    }
    let g = geometry::weight_l_power(s, r)?;
    Ok(g.berezin_wedge(&top_power(s)?))
}

/// `K_{g^r} = ∫_E u ∧ g^r ∧ S_n` for `r ≥ 0`, off the diagonal.
pub fn k_weighted(s: &Seeded, r: i32) -> Result<Multivector> {
    if r < 0 {
        return Err(Error::ArithmeticDomain("negative powers are evaluated by role swap"));
    }
    let u = u_form(s)?;
    let g = geometry::weight_l_power(s, r)?;
    Ok(u.wedge(&g).berezin_wedge(&top_power(s)?))
}

/// `P_{g^r}` as values for any `r`. For `r < 0` this is `P_{g^{|r|}}`
/// evaluated at `(ζ, z)` with the variables relabelled back, i.e. the dual
/// weight with the roles of `z` and `ζ` exchanged.
pub fn p_weighted_values(s: &Seeded, r: i32) -> Result<Multivector<C64>> {
    if r >= 0 {
        Ok(p_weighted(s, r)?.values())
    } else {
        Ok(p_weighted(&s.swapped(), -r)?.values().swap_variables())
    }
}

/// `K_{g^r}` as values for any `r`, with the same convention as
/// [`p_weighted_values`].
pub fn k_weighted_values(s: &Seeded, r: i32) -> Result<Multivector<C64>> {
    if r >= 0 {
        Ok(k_weighted(s, r)?.values())
    } else {
        Ok(k_weighted(&s.swapped(), -r)?.values().swap_variables())
    }
}

/// `det(iΘ_E / 2π)`, the top Chern form of `E`.
pub fn chern_form(s: &Seeded) -> Result<Multivector> {
    let theta = geometry::curvature(s, Bundle::E)?;
    theta.map(|e| e.scale(i_over_2pi())).det_even()
}

/// Mask of `dz_1 … dz_n dz̄_1 … dz̄_n`.
pub fn z_top_mask(n: usize) -> u64 {
    crate::superalg::family_mask(GenKind::Dz, n) | crate::superalg::family_mask(GenKind::DzBar, n)
}

/// The closed form `𝒫⁰ = (i/2π)^n det(γ₀)^r ∫_E (Θ̃_{F_z ⊗ Id})_n`.
pub fn p0(s: &Seeded, r: i32) -> Result<Multivector> {
    let shape = s.shape();
    let n = shape.n();
    let theta_f = geometry::curvature(s, Bundle::F(Side::Z))?;
    let id: HomMatrix<Jet> = HomMatrix::identity(n, shape.k);
    let tt = geometry::theta_tilde_from(&theta_f.kron(&id));
    let det_g0 = geometry::gamma0_matrix(s)?.det()?;
    let scalar = det_g0.powi(r)?.scale(i_over_2pi().powi(n as i32));
    Ok(tt.power_over_factorial(n).berezin().mul_coeff(&scalar))
}

/// Pointwise ratio `𝒫 / 𝒫⁰` of the `(n,n)`-in-`z` parts.
pub fn proportionality_ratio(s: &Seeded, r: i32) -> Result<Option<C64>> {
    let n = s.shape().n();
    let mask = z_top_mask(n);
    let full = p_weighted(s, r)?.values();
    let closed = p0(s, r)?.values();
    let num = full.coefficient(mask).copied().unwrap_or_default();
    let den = closed.coefficient(mask).copied().unwrap_or_default();
    if den.norm() == 0.0 {
        return Ok(None);
    }
    Ok(Some(num / den))
}

/// Outcome of the proportionality audit over a set of pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Proportionality {
    pub ratios: Vec<C64>,
    pub constant: C64,
    /// `max |ratio − C| / |C|`.
    pub dispersion: f64,
    /// Pairs at which `𝒫⁰` vanished.
    pub excluded: usize,
}

pub fn p0_and_proportionality(
    shape: geometry::Shape,
    pairs: &[geometry::PointPair],
    r: i32,
) -> Result<Proportionality> {
    let mut ratios = Vec::new();
    let mut excluded = 0;
    for pair in pairs {
        let s = Seeded::new(shape, pair, 1);
        match proportionality_ratio(&s, r)? {
            Some(q) => ratios.push(q),
            None => excluded += 1,
        }
    }
    let constant = if ratios.is_empty() {
        C64::new(f64::NAN, f64::NAN)
    } else {
        ratios.iter().sum::<C64>() / ratios.len() as f64
    };
    let dispersion = ratios
        .iter()
        .map(|q| (q - constant).norm() / constant.norm())
        .fold(0.0, f64::max);
    Ok(Proportionality {
        ratios,
        constant,
        dispersion,
        excluded,
    })
}

/// `binom(n + r, n)`, the constant expected for `CP^n`.
pub fn binomial(top: u64, bottom: u64) -> f64 {
    (0..bottom).fold(1.0, |acc, i| acc * (top - i) as f64 / (i + 1) as f64)
}
