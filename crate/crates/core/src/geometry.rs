//! Chart-level constructions on `Gr(k, N)`.
//!
//! Points are `(N−k)×k` chart matrices `z`; the plane they represent is the
//! column span of `(I; z)`. Flattened indices run `I = (i, j) -> i·k + j`.
//! Objects on `X × X` are evaluated at a [`PointPair`] `(z, ζ)` whose entries
//! are seeded as jets, so every quantity carries its Wirtinger derivatives.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{Jet, JetMatrix, SlotKind, C64};
use crate::superalg::{FamilyMaps, GenKind, HomMatrix, Multivector, Vars};

/// Form-valued matrix: connection and curvature forms, framed weights.
pub type FormMatrix = HomMatrix<Jet>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub k: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
}

impl Shape {
    pub fn new(k: usize, big_n: usize) -> Result<Self> {
        if k == 0 || k >= big_n {
            return Err(Error::UnsupportedShape {
                k,
                big_n,
                reason: "need 1 <= k < N",
            });
        }
        if 6 * k * (big_n - k) > 64 {
            return Err(Error::UnsupportedShape {
                k,
                big_n,
                reason: "6n generators exceed the 64-bit mask",
            });
        }
        Ok(Shape { k, big_n })
    }

    /// Complex dimension `n = k(N−k)`.
    pub fn n(&self) -> usize {
        self.k * (self.big_n - self.k)
    }

    /// Rows of a chart matrix, `N − k`.
    pub fn rows(&self) -> usize {
        self.big_n - self.k
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.k + j
    }

    pub fn slots(&self) -> usize {
        4 * self.n()
    }
}

/// An `(N−k)×k` matrix of chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartMatrix(DMatrix<C64>);

impl ChartMatrix {
    pub fn new(shape: Shape, m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != shape.rows() || m.ncols() != shape.k {
            return Err(Error::DimensionMismatch(format!(
                "chart matrix must be {}x{}, got {}x{}",
                shape.rows(),
                shape.k,
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            return Err(Error::DimensionMismatch("non-finite chart entry".into()));
        }
        Ok(ChartMatrix(m))
    }

    pub fn zeros(shape: Shape) -> Self {
        ChartMatrix(DMatrix::zeros(shape.rows(), shape.k))
    }

    /// From flattened entries `I = i·k + j`.
    pub fn from_flat(shape: Shape, entries: &[C64]) -> Result<Self> {
        if entries.len() != shape.n() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries, got {}",
                shape.n(),
                entries.len()
            )));
        }
        Self::new(
            shape,
            DMatrix::from_fn(shape.rows(), shape.k, |i, j| entries[i * shape.k + j]),
        )
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn flat(&self) -> Vec<C64> {
        let (r, c) = self.0.shape();
        (0..r * c).map(|idx| self.0[(idx / c, idx % c)]).collect()
    }

    /// `(I; z)`, the homogeneous `N×k` representative.
    pub fn homogeneous(&self) -> DMatrix<C64> {
        let (r, k) = self.0.shape();
        DMatrix::from_fn(r + k, k, |a, j| {
            if a < k {
                if a == j {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            } else {
                self.0[(a - k, j)]
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointPair {
    pub z: ChartMatrix,
    pub w: ChartMatrix,
}

impl PointPair {
    pub fn new(z: ChartMatrix, w: ChartMatrix) -> Self {
        PointPair { z, w }
    }

    pub fn swapped(&self) -> Self {
        PointPair {
            z: self.w.clone(),
            w: self.z.clone(),
        }
    }
}

/// A point pair with jet-seeded coordinates.
#[derive(Debug, Clone)]
pub struct Seeded {
    shape: Shape,
    pair: PointPair,
    order: u8,
    z: JetMatrix,
    zbar: JetMatrix,
    w: JetMatrix,
    wbar: JetMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Z,
    W,
}

impl Side {
    fn holo(self) -> GenKind {
        match self {
            Side::Z => GenKind::Dz,
            Side::W => GenKind::Dw,
        }
    }
}

impl Seeded {
    /// Seeds `z` and `ζ` as jets of the given order (at most 2).
    pub fn new(shape: Shape, pair: &PointPair, order: u8) -> Self {
        let ns = shape.slots();
        let n = shape.n();
        let seed = |m: &ChartMatrix, kind: SlotKind| {
            JetMatrix::from_fn(shape.rows(), shape.k, |i, j| {
                let idx = shape.index(i, j);
                Jet::variable(m.matrix()[(i, j)], kind.slot(idx, n), ns).truncate(order)
            })
        };
        let z = seed(&pair.z, SlotKind::Z);
        let w = seed(&pair.w, SlotKind::W);
        Seeded {
            shape,
            pair: pair.clone(),
            order,
            zbar: z.conj(),
            wbar: w.conj(),
            z,
            w,
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn pair(&self) -> &PointPair {
        &self.pair
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    /// The same pair with `z` and `ζ` exchanged, seeded afresh.
    pub fn swapped(&self) -> Seeded {
        Seeded::new(self.shape, &self.pair.swapped(), self.order)
    }

    pub fn point(&self, side: Side) -> (&JetMatrix, &JetMatrix) {
        match side {
            Side::Z => (&self.z, &self.zbar),
            Side::W => (&self.w, &self.wbar),
        }
    }
}

fn lift(n: usize, m: &JetMatrix) -> FormMatrix {
    HomMatrix::from_fn(m.rows(), m.cols(), |i, j| {
        Multivector::scalar(n, m.get(i, j).clone())
    })
}

/// `I + v*v` (`k×k`), the transpose of `h_H`.
fn one_plus_vstar_v(v: &JetMatrix, vbar: &JetMatrix) -> Result<JetMatrix> {
    JetMatrix::identity(v.cols()).add(&vbar.transpose().matmul(v)?)
}

/// `I + v v*` (`(N−k)×(N−k)`).
fn one_plus_v_vstar(v: &JetMatrix, vbar: &JetMatrix) -> Result<JetMatrix> {
    JetMatrix::identity(v.rows()).add(&v.matmul(&vbar.transpose())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bundle {
    /// Tautological bundle at the given side.
    H(Side),
    /// Quotient bundle at the given side.
    F(Side),
    /// Dual of the tautological bundle.
    HDual(Side),
    /// `E = F_z ⊗ H*_ζ`.
    E,
}

/// Hermitian metric in the standard frame, `⟨v, w⟩ = vᵗ h w̄`.
pub fn metric(s: &Seeded, bundle: Bundle) -> Result<JetMatrix> {
    match bundle {
        Bundle::H(side) => {
            let (v, vb) = s.point(side);
            Ok(one_plus_vstar_v(v, vb)?.transpose())
        }
        Bundle::F(side) => {
            let (v, vb) = s.point(side);
            Ok(one_plus_v_vstar(v, vb)?.inverse()?.transpose())
        }
        Bundle::HDual(side) => Ok(metric(s, Bundle::H(side))?.inverse()?.transpose()),
        Bundle::E => Ok(metric(s, Bundle::F(Side::Z))?.kron(&metric(s, Bundle::HDual(Side::W))?)),
    }
}

/// Chern connection `θ` (matrix of (1,0)-forms) in closed form.
pub fn connection(s: &Seeded, bundle: Bundle) -> Result<FormMatrix> {
    let shape = s.shape;
    let n = shape.n();
    let k = shape.k;
    let rows = shape.rows();
    let dgen = |side: Side, i: usize, j: usize| {
        Multivector::<Jet>::generator(n, side.holo(), shape.index(i, j))
    };
    match bundle {
        Bundle::H(side) => {
            // θ = (I + v*v)^{-1} v* dv
            let (v, vb) = s.point(side);
            let m = one_plus_vstar_v(v, vb)?.inverse()?.matmul(&vb.transpose())?;
            Ok(HomMatrix::from_fn(k, k, |j, l| {
                let mut acc = Multivector::zero(n);
                for a in 0..rows {
                    acc.add_assign(&dgen(side, a, l).mul_coeff(m.get(j, a)));
                }
                acc
            }))
        }
        Bundle::F(side) => {
            // θ = −dv v*(I + v v*)^{-1}
            let (v, vb) = s.point(side);
            let q = vb.transpose().matmul(&one_plus_v_vstar(v, vb)?.inverse()?)?;
            Ok(HomMatrix::from_fn(rows, rows, |i, j| {
                let mut acc = Multivector::zero(n);
                for a in 0..k {
                    acc.add_assign(&dgen(side, i, a).mul_coeff(&-q.get(a, j)));
                }
                acc
            }))
        }
        Bundle::HDual(side) => Ok(connection(s, Bundle::H(side))?.transpose().map(|e| e.neg())),
        Bundle::E => {
            let tf = connection(s, Bundle::F(Side::Z))?;
            let th = connection(s, Bundle::HDual(Side::W))?;
            Ok(kron_sum(n, &tf, &th))
        }
    }
}

/// `A ⊗ I + I ⊗ B` with the `(i, j) -> i·dim(B) + j` index convention.
fn kron_sum(n: usize, a: &FormMatrix, b: &FormMatrix) -> FormMatrix {
    let (ra, rb) = (a.rows(), b.rows());
    HomMatrix::from_fn(ra * rb, ra * rb, |r, c| {
        let (i, j) = (r / rb, r % rb);
        let (i2, j2) = (c / rb, c % rb);
        let mut acc = Multivector::zero(n);
        if j == j2 {
            acc.add_assign(a.get(i, i2));
        }
        if i == i2 {
            acc.add_assign(b.get(j, j2));
        }
        acc
    })
}

/// Chern curvature `Θ = ∂̄θ`.
pub fn curvature(s: &Seeded, bundle: Bundle) -> Result<FormMatrix> {
    let theta = connection(s, bundle)?;
    let entries: Result<Vec<_>> = theta.entries().iter().map(|e| e.dbar(Vars::Both)).collect();
    let entries = entries?;
    Ok(HomMatrix::from_fn(theta.rows(), theta.cols(), |i, j| {
        entries[i * theta.cols() + j].clone()
    }))
}

/// Connection and curvature together.
pub fn connection_curvature(s: &Seeded, bundle: Bundle) -> Result<(FormMatrix, FormMatrix)> {
    Ok((connection(s, bundle)?, curvature(s, bundle)?))
}

/// `θ = h̄^{-1} ∂h̄` straight from the metric jets. Consumes one order, so the
/// result is only good for value-level comparison with [`connection`].
pub fn connection_generic(s: &Seeded, bundle: Bundle) -> Result<FormMatrix> {
    let n = s.shape.n();
    let hbar = metric(s, bundle)?.conj();
    let inv = lift(n, &hbar.inverse()?);
    let entries: Result<Vec<_>> = hbar
        .entries()
        .iter()
        .map(|e| Multivector::scalar(n, e.clone()).d_holo(Vars::Both))
        .collect();
    let entries = entries?;
    let dh = HomMatrix::from_fn(hbar.rows(), hbar.cols(), |i, j| {
        entries[i * hbar.cols() + j].clone()
    });
    inv.matmul(&dh)
}

/// `η = ζ − z`, flattened.
pub fn eta(s: &Seeded) -> Vec<Jet> {
    s.w.entries()
        .iter()
        .zip(s.z.entries())
        .map(|(w, z)| w - z)
        .collect()
}

/// `|η|²_E = ηᵗ h_E η̄` (value only).
pub fn eta_norm_sq(s: &Seeded) -> Result<f64> {
    let (_, denom) = sigma_parts(s)?;
    Ok(denom.value().re)
}

fn sigma_parts(s: &Seeded) -> Result<(Vec<Jet>, Jet)> {
    let h = metric(s, Bundle::E)?;
    let eta = eta(s);
    let n = eta.len();
    let etabar: Vec<Jet> = eta.iter().map(Jet::conj).collect();
    let v: Vec<Jet> = (0..n)
        .map(|i| {
            let mut acc = Jet::constant(C64::new(0.0, 0.0));
            for (j, eb) in etabar.iter().enumerate() {
                acc.add_assign(&(h.get(i, j) * eb));
            }
            acc
        })
        .collect();
    let mut denom = Jet::constant(C64::new(0.0, 0.0));
    for (e, vi) in eta.iter().zip(&v) {
        denom.add_assign(&(e * vi));
    }
    Ok((v, denom))
}

/// Minimal-norm solution `σ` of `δ_η σ = 1`.
pub fn sigma(s: &Seeded) -> Result<Multivector> {
    let n = s.shape.n();
    let plain: f64 = eta(s).iter().map(|e| e.value().norm_sqr()).sum();
    let (v, denom) = sigma_parts(s)?;
    if plain == 0.0 || !(denom.value().re > 0.0) {
        return Err(Error::DiagonalSingularity { norm_sq: plain });
    }
    let inv = denom.recip()?;
    let mut acc = Multivector::zero(n);
    for (i, vi) in v.iter().enumerate() {
        acc.add_assign(&Multivector::generator(n, GenKind::EStar, i).mul_coeff(&(vi * &inv)));
    }
    Ok(acc)
}

/// `(I + z*z)^{-1} z*`, the matrix `B` with `γ₀ = I + Bη`.
fn gamma_b(s: &Seeded) -> Result<JetMatrix> {
    one_plus_vstar_v(&s.z, &s.zbar)?
        .inverse()?
        .matmul(&s.zbar.transpose())
}

/// `γ₀ = (I + z*z)^{-1}(I + z*ζ)` as a jet matrix.
pub fn gamma0_matrix(s: &Seeded) -> Result<JetMatrix> {
    let rhs = JetMatrix::identity(s.shape.k).add(&s.zbar.transpose().matmul(&s.w)?)?;
    one_plus_vstar_v(&s.z, &s.zbar)?.inverse()?.matmul(&rhs)
}

pub fn gamma0(s: &Seeded) -> Result<FormMatrix> {
    Ok(lift(s.shape.n(), &gamma0_matrix(s)?))
}

/// `γ₁` with entries `M_jl = Σ_a e*_(a,l) ∧ ∂̄_z B_ja`, so that `δ_η γ₁ = ∂̄ γ₀`.
pub fn gamma1(s: &Seeded) -> Result<FormMatrix> {
    let shape = s.shape;
    let n = shape.n();
    let b = gamma_b(s)?;
    let mut db = Vec::with_capacity(b.entries().len());
    for e in b.entries() {
        db.push(Multivector::scalar(n, e.clone()).dbar(Vars::Z)?);
    }
    Ok(HomMatrix::from_fn(shape.k, shape.k, |j, l| {
        let mut acc = Multivector::zero(n);
        for a in 0..shape.rows() {
            let estar = Multivector::generator(n, GenKind::EStar, shape.index(a, l));
            acc.add_assign(&estar.wedge(&db[j * shape.rows() + a]));
        }
        acc
    }))
}

/// The weight `G = γ₀ + γ₁` for `H`.
pub fn weight_g(s: &Seeded) -> Result<FormMatrix> {
    gamma0(s)?.add(&gamma1(s)?)
}

/// `g = det G`.
pub fn weight_det(s: &Seeded) -> Result<Multivector> {
    weight_g(s)?.det_even()
}

/// `g^r`, realized as `(det G)^{|r|}`.
///
/// For `r < 0` this returns the same object as for `|r|`; the dual weight
/// operates with the roles of `z` and `ζ` exchanged, which callers apply by
/// evaluating at [`PointPair::swapped`] and reading degrees accordingly.
pub fn weight_l_power(s: &Seeded, r: i32) -> Result<Multivector> {
    let n = s.shape.n();
    let mut acc = Multivector::one(n);
    if r == 0 {
        return Ok(acc);
    }
    let g = weight_det(s)?;
    for _ in 0..r.unsigned_abs() {
        acc = acc.wedge(&g);
    }
    Ok(acc)
}

/// Operations of the weight algebra.
pub mod weight_algebra {
    use super::*;

    /// Weight for `H ⊗ H′`.
    pub fn tensor(g: &FormMatrix, h: &FormMatrix) -> FormMatrix {
        g.kron(h)
    }

    /// Weight for `H ∧ H` on the basis `u_i ∧ u_j`, `i < j`. The pairing
    /// `A ∧ A′(u ∧ u′) = A u ∧ A′ u′ − A u′ ∧ A′ u` doubles the identity on
    /// the diagonal, so the result is halved to keep `g_{0,0}(z, z) = Id`.
    pub fn exterior(g: &FormMatrix, h: &FormMatrix) -> Result<FormMatrix> {
        if g.rows() != h.rows() || g.cols() != h.cols() {
            return Err(Error::DimensionMismatch("exterior product of unequal weights".into()));
        }
        let pairs = |d: usize| -> Vec<(usize, usize)> {
            (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).collect()
        };
        let rows = pairs(g.rows());
        let cols = pairs(g.cols());
        let half = C64::new(0.5, 0.0);
        Ok(HomMatrix::from_fn(rows.len(), cols.len(), |r, c| {
            let (k, l) = rows[r];
            let (i, j) = cols[c];
            // coefficient of e_k ∧ e_l in A u_i ∧ A′ u_j − A u_j ∧ A′ u_i
            let ab = |p: usize, q: usize, x: usize, y: usize| g.get(p, x).wedge(h.get(q, y));
            let acc = ab(k, l, i, j)
                .sub(&ab(l, k, i, j))
                .sub(&ab(k, l, j, i))
                .add(&ab(l, k, j, i));
            acc.scale(half)
        }))
    }

    /// Weight for `H*`: the transpose of the operator part, forms unchanged.
    pub fn dual(g: &FormMatrix) -> FormMatrix {
        g.transpose()
    }
}

/// Components `(Dη)_I = dη_I + (θ_E η)_I`, each a (1,0)-form.
pub fn d_eta_components(s: &Seeded) -> Result<Vec<Multivector>> {
    let n = s.shape.n();
    let theta = connection(s, Bundle::E)?;
    let eta = eta(s);
    Ok((0..n)
        .map(|i| {
            let mut comp = Multivector::<Jet>::generator(n, GenKind::Dw, i)
                .sub(&Multivector::generator(n, GenKind::Dz, i));
            for (j, ej) in eta.iter().enumerate() {
                comp.add_assign(&theta.get(i, j).mul_coeff(ej));
            }
            comp
        })
        .collect())
}

/// `Dη = Σ_I (Dη)_I ∧ e_I`.
pub fn d_eta(s: &Seeded) -> Result<Multivector> {
    let n = s.shape.n();
    let mut acc = Multivector::zero(n);
    for (i, comp) in d_eta_components(s)?.iter().enumerate() {
        acc.add_assign(&comp.wedge(&Multivector::generator(n, GenKind::E, i)));
    }
    Ok(acc)
}

/// `Θ̃ = Σ_{I,J} (Θ_E)_{IJ} ∧ e_I ∧ e*_J`.
pub fn theta_tilde(s: &Seeded) -> Result<Multivector> {
    Ok(theta_tilde_from(&curvature(s, Bundle::E)?))
}

/// `Θ̃` assembled from any curvature matrix on `E`.
pub fn theta_tilde_from(theta: &FormMatrix) -> Multivector {
    let n = theta.rows();
    let nn = theta.entries().first().map_or(n, |e| e.n());
    let mut acc = Multivector::zero(nn);
    for i in 0..n {
        let ei = Multivector::generator(nn, GenKind::E, i);
        for j in 0..n {
            let t = theta.get(i, j);
            if t.is_empty() {
                continue;
            }
            let ej = Multivector::generator(nn, GenKind::EStar, j);
            acc.add_assign(&t.wedge(&ei).wedge(&ej));
        }
    }
    acc
}

/// Frame transition of a unitary acting on one chart point.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub z: ChartMatrix,
    /// `T_H = A + Bz` with `l·𝔥_j(z) = Σ_i 𝔥_i(z′) (T_H)_ij`.
    pub t_h: DMatrix<C64>,
    /// `T_F = D − z′B` with `l·𝔣_j(z) = Σ_i 𝔣_i(z′) (T_F)_ij`.
    pub t_f: DMatrix<C64>,
}

pub const CHART_EXIT_THRESHOLD: f64 = 1e-8;

/// Acts by `l ∈ U(N)` on the chart point `z`.
pub fn act_unitary(shape: Shape, l: &DMatrix<C64>, z: &ChartMatrix) -> Result<Transition> {
    act_unitary_with_threshold(shape, l, z, CHART_EXIT_THRESHOLD)
}

pub fn act_unitary_with_threshold(
    shape: Shape,
    l: &DMatrix<C64>,
    z: &ChartMatrix,
    threshold: f64,
) -> Result<Transition> {
    let (k, big_n) = (shape.k, shape.big_n);
    if l.nrows() != big_n || l.ncols() != big_n {
        return Err(Error::DimensionMismatch(format!(
            "unitary must be {big_n}x{big_n}"
        )));
    }
    let r = big_n - k;
    let a = l.view((0, 0), (k, k));
    let b = l.view((0, k), (k, r));
    let c = l.view((k, 0), (r, k));
    let d = l.view((k, k), (r, r));
    let t_h = a + b * z.matrix();
    let det = t_h.determinant().norm();
    if !(det >= threshold) {
        return Err(Error::ChartExit { det_abs: det });
    }
    let inv = t_h
        .clone()
        .try_inverse()
        .ok_or(Error::ChartExit { det_abs: det })?;
    let z_new = (c + d * z.matrix()) * inv;
    let t_f = d - &z_new * b;
    Ok(Transition {
        z: ChartMatrix::new(shape, z_new)?,
        t_h,
        t_f,
    })
}

/// Kronecker product with the `(i, j) -> i·dim(b) + j` convention.
pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// Transitions at both points of a pair, with the induced maps on generators.
#[derive(Debug, Clone)]
pub struct PairTransition {
    pub shape: Shape,
    pub at_z: Transition,
    pub at_w: Transition,
}

impl PairTransition {
    pub fn new(shape: Shape, l: &DMatrix<C64>, pair: &PointPair) -> Result<Self> {
        Ok(PairTransition {
            shape,
            at_z: act_unitary(shape, l, &pair.z)?,
            at_w: act_unitary(shape, l, &pair.w)?,
        })
    }

    pub fn image(&self) -> PointPair {
        PointPair::new(self.at_z.z.clone(), self.at_w.z.clone())
    }

    fn inv(m: &DMatrix<C64>) -> DMatrix<C64> {
        m.clone().try_inverse().expect("transition matrices are invertible")
    }

    /// Holomorphic Jacobian `∂z′/∂z = T_F(z) ⊗ T_H(z)^{-T}`.
    pub fn jacobian(&self, side: Side) -> DMatrix<C64> {
        let t = match side {
            Side::Z => &self.at_z,
            Side::W => &self.at_w,
        };
        kron(&t.t_f, &Self::inv(&t.t_h).transpose())
    }

    /// Components of `E` transform as `η′ = T η` with `T = T_F(z) ⊗ T_H(ζ)^{-T}`.
    pub fn frame_e(&self) -> DMatrix<C64> {
        kron(&self.at_z.t_f, &Self::inv(&self.at_w.t_h).transpose())
    }

    /// Substitution expressing primed generators through unprimed ones.
    pub fn pullback_maps(&self) -> FamilyMaps {
        let jz = self.jacobian(Side::Z);
        let jw = self.jacobian(Side::W);
        let t = self.frame_e();
        let t_inv_t = Self::inv(&t).transpose();
        FamilyMaps::new()
            .with(GenKind::DzBar, jz.map(|x| x.conj()))
            .with(GenKind::Dz, jz)
            .with(GenKind::DwBar, jw.map(|x| x.conj()))
            .with(GenKind::Dw, jw)
            .with(GenKind::EStar, t)
            .with(GenKind::E, t_inv_t)
    }

    /// Brings an `Hom(H_ζ, H_z)`-valued object evaluated at the image pair back
    /// to the original frames: `T_H(z)^{-1} M′ T_H(ζ)`, generators pulled back.
    pub fn pull_hom(&self, m: &HomMatrix<C64>) -> HomMatrix<C64> {
        let maps = self.pullback_maps();
        let pulled = m.map(|e| e.substitute(&maps));
        let left = Self::inv(&self.at_z.t_h);
        let right = &self.at_w.t_h;
        let n = self.shape.n();
        HomMatrix::from_fn(m.rows(), m.cols(), |i, j| {
            let mut acc = Multivector::zero(n);
            for a in 0..m.rows() {
                for b in 0..m.cols() {
                    let c = left[(i, a)] * right[(b, j)];
                    if c != C64::new(0.0, 0.0) {
                        acc.add_assign(&pulled.get(a, b).scale(c));
                    }
                }
            }
            acc
        })
    }

    /// Factor relating the `L^r` frames: `(det T_H(ζ) / det T_H(z))^r`.
    pub fn line_factor(&self, r: i32) -> C64 {
        (self.at_w.t_h.determinant() / self.at_z.t_h.determinant()).powi(r)
    }
}
