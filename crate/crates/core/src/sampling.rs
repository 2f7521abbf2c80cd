//! Seeded random points, pairs and unitaries.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::geometry::{ChartMatrix, PointPair, Shape};
use crate::jets::C64;

pub type Rng = ChaCha8Rng;

/// splitmix64 finalizer; derives independent per-index seeds from one master.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut x = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn rng_for(master: u64, index: u64) -> Rng {
    Rng::seed_from_u64(derive_seed(master, index))
}

/// Complex Gaussian with `E|x|² = 1`.
pub fn complex_normal(rng: &mut Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Chart point with i.i.d. complex Gaussian entries.
pub fn gaussian_chart(shape: Shape, rng: &mut Rng) -> ChartMatrix {
    let m = DMatrix::from_fn(shape.rows(), shape.k, |_, _| complex_normal(rng));
    ChartMatrix::new(shape, m).expect("finite gaussian entries")
}

/// Off-diagonal pair with Gaussian entries at both points.
pub fn gaussian_pair(shape: Shape, rng: &mut Rng) -> PointPair {
    PointPair::new(gaussian_chart(shape, rng), gaussian_chart(shape, rng))
}

/// `count` pairs, pair `i` drawn from its own derived stream.
pub fn gaussian_pairs(shape: Shape, master: u64, count: usize) -> Vec<PointPair> {
    (0..count)
        .map(|i| gaussian_pair(shape, &mut rng_for(master, i as u64)))
        .collect()
}

/// Haar-distributed `U(N)` element: Ginibre matrix, QR, and the phase fix
/// `Q · diag(R_ii / |R_ii|)`.
pub fn haar_unitary(dim: usize, rng: &mut Rng) -> DMatrix<C64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| complex_normal(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub const HAAR_REJECT_THRESHOLD: f64 = 1e-8;

/// Chart point distributed by the normalized invariant measure: first `k`
/// columns `(A; B)` of a Haar unitary, `z = B A^{-1}`.
pub fn haar_sample(shape: Shape, rng: &mut Rng) -> ChartMatrix {
    let k = shape.k;
    loop {
        let u = haar_unitary(shape.big_n, rng);
        let a = u.view((0, 0), (k, k)).into_owned();
        if a.determinant().norm() < HAAR_REJECT_THRESHOLD {
            continue;
        }
        let b = u.view((k, 0), (shape.rows(), k));
        let inv = a.try_inverse().expect("checked determinant");
        return ChartMatrix::new(shape, b * inv).expect("finite chart point");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(42, 0), derive_seed(42, 1));
        assert_ne!(derive_seed(42, 0), derive_seed(43, 0));
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = rng_for(1, 0);
        let u = haar_unitary(4, &mut rng);
        let err = (u.adjoint() * &u - DMatrix::<C64>::identity(4, 4)).norm();
        assert!(err < 1e-12);
    }
}
