//! Graded exterior algebra over the `6n` odd generators
//! `dz, dz̄, dζ, dζ̄, e, e*`.
//!
//! A [`Multivector`] stores sparse terms keyed by a 64-bit generator mask.
//! Bit positions give the canonical order used for every sign computation:
//!
//! | family | bits          |
//! |--------|---------------|
//! | `dz`   | `[0, n)`      |
//! | `dz̄`   | `[n, 2n)`     |
//! | `dζ`   | `[2n, 3n)`    |
//! | `dζ̄`   | `[3n, 4n)`    |
//! | `e`    | `[4n, 5n)`    |
//! | `e*`   | `[5n, 6n)`    |
//!
//! The differential bits coincide with the jet slot layout of [`crate::jets`],
//! so `∂̄` of a coefficient in slot `s` emits generator `s`.

use std::collections::BTreeMap;
use std::fmt::Debug;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{Jet, C64};

/// Coefficient ring of a [`Multivector`].
pub trait Coeff: Clone + Debug + Send + Sync {
    fn from_c64(c: C64) -> Self;
    fn value(&self) -> C64;
    fn is_zero(&self) -> bool;
    fn mul(&self, other: &Self) -> Self;
    fn add_assign(&mut self, other: &Self);
    fn sub_assign(&mut self, other: &Self);
    fn scale(&self, c: C64) -> Self;
    fn magnitude(&self) -> f64;

    fn neg(&self) -> Self {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Coeff for C64 {
    fn from_c64(c: C64) -> Self {
        c
    }
    fn value(&self) -> C64 {
        *self
    }
    fn is_zero(&self) -> bool {
        *self == C64::new(0.0, 0.0)
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn sub_assign(&mut self, other: &Self) {
        *self -= other;
    }
    fn scale(&self, c: C64) -> Self {
        self * c
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl Coeff for Jet {
    fn from_c64(c: C64) -> Self {
        Jet::constant(c)
    }
    fn value(&self) -> C64 {
        Jet::value(self)
    }
    fn is_zero(&self) -> bool {
        Jet::is_zero(self)
    }
    fn mul(&self, other: &Self) -> Self {
        self.mul_jet(other)
    }
    fn add_assign(&mut self, other: &Self) {
        Jet::add_assign(self, other);
    }
    fn sub_assign(&mut self, other: &Self) {
        Jet::sub_assign(self, other);
    }
    fn scale(&self, c: C64) -> Self {
        Jet::scale(self, c)
    }
    fn magnitude(&self) -> f64 {
        Jet::magnitude(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GenKind {
    Dz,
    DzBar,
    Dw,
    DwBar,
    E,
    EStar,
}

impl GenKind {
    pub const ALL: [GenKind; 6] = [
        GenKind::Dz,
        GenKind::DzBar,
        GenKind::Dw,
        GenKind::DwBar,
        GenKind::E,
        GenKind::EStar,
    ];

    fn block(self) -> usize {
        self as usize
    }
}

/// A single generator; `index` is the 0-based flattened chart index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Generator {
    pub kind: GenKind,
    pub index: usize,
}

impl Generator {
    pub fn new(kind: GenKind, index: usize) -> Self {
        Generator { kind, index }
    }

    pub fn bit(self, n: usize) -> u32 {
        debug_assert!(self.index < n);
        (self.kind.block() * n + self.index) as u32
    }
}

/// Mask of every bit belonging to one generator family.
pub fn family_mask(kind: GenKind, n: usize) -> u64 {
    low_bits(n) << (kind.block() * n)
}

fn low_bits(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Sign of `a ∧ b` relative to the canonical order of `a | b`, for disjoint
/// masks: the parity of pairs `x ∈ a`, `y ∈ b` with `x > y`.
pub fn merge_sign(a: u64, b: u64) -> bool {
    let mut count = 0u32;
    let mut rest = b;
    while rest != 0 {
        let y = rest.trailing_zeros();
        count += ((a >> y) >> 1).count_ones();
        rest &= rest - 1;
    }
    count % 2 == 1
}

/// Parity of the number of set bits of `mask` strictly below `bit`.
fn parity_below(mask: u64, bit: u32) -> bool {
    (mask & ((1u64 << bit) - 1)).count_ones() % 2 == 1
}

/// Form degrees `(p′, q′, p″, q″)` in `z` and `ζ`, plus the `e` and `e*`
/// degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BidegreeKey {
    pub p_z: u8,
    pub q_z: u8,
    pub p_w: u8,
    pub q_w: u8,
    pub d_e: u8,
    pub d_estar: u8,
}

impl BidegreeKey {
    pub fn of_mask(mask: u64, n: usize) -> Self {
        let count = |k| (mask & family_mask(k, n)).count_ones() as u8;
        BidegreeKey {
            p_z: count(GenKind::Dz),
            q_z: count(GenKind::DzBar),
            p_w: count(GenKind::Dw),
            q_w: count(GenKind::DwBar),
            d_e: count(GenKind::E),
            d_estar: count(GenKind::EStar),
        }
    }

    pub fn as_tuple(&self) -> (u8, u8, u8, u8, u8, u8) {
        (self.p_z, self.q_z, self.p_w, self.q_w, self.d_e, self.d_estar)
    }

    /// Same key with the `z` and `ζ` degrees exchanged.
    pub fn swapped(&self) -> Self {
        BidegreeKey {
            p_z: self.p_w,
            q_z: self.q_w,
            p_w: self.p_z,
            q_w: self.q_z,
            ..*self
        }
    }
}

/// Which antiholomorphic variables `∂̄` differentiates in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vars {
    Z,
    W,
    Both,
}

impl Vars {
    fn families(self) -> &'static [GenKind] {
        match self {
            Vars::Z => &[GenKind::DzBar],
            Vars::W => &[GenKind::DwBar],
            Vars::Both => &[GenKind::DzBar, GenKind::DwBar],
        }
    }

    fn holomorphic_families(self) -> &'static [GenKind] {
        match self {
            Vars::Z => &[GenKind::Dz],
            Vars::W => &[GenKind::Dw],
            Vars::Both => &[GenKind::Dz, GenKind::Dw],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Multivector<C: Coeff = Jet> {
    n: usize,
    terms: Vec<(u64, C)>,
}

fn accumulate<C: Coeff>(map: &mut FxHashMap<u64, C>, mask: u64, c: &C, negate: bool) {
    match map.get_mut(&mask) {
        Some(slot) => {
            if negate {
                slot.sub_assign(c);
            } else {
                slot.add_assign(c);
            }
        }
        None => {
            map.insert(mask, if negate { c.neg() } else { c.clone() });
        }
    }
}

impl<C: Coeff> Multivector<C> {
    pub fn zero(n: usize) -> Self {
        assert!(6 * n <= 64, "6n must fit in a 64-bit mask");
        Multivector {
            n,
            terms: Vec::new(),
        }
    }

    pub fn scalar(n: usize, c: C) -> Self {
        Self::monomial(n, 0, c)
    }

    pub fn one(n: usize) -> Self {
        Self::scalar(n, C::from_c64(C64::new(1.0, 0.0)))
    }

    pub fn monomial(n: usize, mask: u64, c: C) -> Self {
        let mut m = Self::zero(n);
        if !c.is_zero() {
            m.terms.push((mask, c));
        }
        m
    }

    /// Product of generators in the order given (signs applied), times `c`.
    pub fn from_generators(n: usize, gens: &[Generator], c: C) -> Self {
        let mut mask = 0u64;
        let mut negate = false;
        for g in gens {
            let bit = 1u64 << g.bit(n);
            if mask & bit != 0 {
                return Self::zero(n);
            }
            negate ^= merge_sign(mask, bit);
            mask |= bit;
        }
        Self::monomial(n, mask, if negate { c.neg() } else { c })
    }

    pub fn generator(n: usize, kind: GenKind, index: usize) -> Self {
        Self::from_generators(n, &[Generator::new(kind, index)], C::from_c64(C64::new(1.0, 0.0)))
    }

    /// Builds from arbitrary `(mask, coefficient)` pairs, merging duplicates.
    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (u64, C)>) -> Self {
        let mut map = FxHashMap::default();
        for (mask, c) in terms {
            accumulate(&mut map, mask, &c, false);
        }
        Self::from_map(n, map)
    }

    fn from_map(n: usize, map: FxHashMap<u64, C>) -> Self {
        let mut terms: Vec<(u64, C)> = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by_key(|(m, _)| *m);
        Multivector { n, terms }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(u64, C)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, mask: u64) -> Option<&C> {
        self.terms
            .binary_search_by_key(&mask, |(m, _)| *m)
            .ok()
            .map(|i| &self.terms[i].1)
    }

    /// Coefficient value of the degree-0 part.
    pub fn scalar_part(&self) -> C64 {
        self.coefficient(0).map(Coeff::value).unwrap_or_default()
    }

    pub fn max_magnitude(&self) -> f64 {
        self.terms.iter().fold(0.0, |m, (_, c)| m.max(c.magnitude()))
    }

    /// Largest magnitude of the coefficient values, ignoring derivative data.
    pub fn max_value(&self) -> f64 {
        self.terms.iter().fold(0.0, |m, (_, c)| m.max(c.value().norm()))
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::ShapeMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    pub fn checked_wedge(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        Ok(self.wedge_filtered(other, |_| true))
    }

    /// Exterior product. Panics on mismatched shapes; see [`Self::checked_wedge`].
    pub fn wedge(&self, other: &Self) -> Self {
        self.checked_wedge(other).expect("wedge of multivectors over different shapes")
    }

    /// Exterior product keeping only result masks accepted by `keep`.
    pub fn wedge_filtered(&self, other: &Self, keep: impl Fn(u64) -> bool) -> Self {
        let mut map = FxHashMap::default();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if ma & mb != 0 || !keep(ma | mb) {
                    continue;
                }
                let c = ca.mul(cb);
                accumulate(&mut map, ma | mb, &c, merge_sign(*ma, *mb));
            }
        }
        Self::from_map(self.n, map)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, true)
    }

    fn combine(&self, other: &Self, negate: bool) -> Self {
        assert_eq!(self.n, other.n, "sum of multivectors over different shapes");
        let mut map = FxHashMap::default();
        for (m, c) in &self.terms {
            accumulate(&mut map, *m, c, false);
        }
        for (m, c) in &other.terms {
            accumulate(&mut map, *m, c, negate);
        }
        Self::from_map(self.n, map)
    }

    pub fn add_assign(&mut self, other: &Self) {
        *self = self.add(other);
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::from_sorted(self.n, self.terms.iter().map(|(m, x)| (*m, x.scale(c))))
    }

    pub fn neg(&self) -> Self {
        self.scale(C64::new(-1.0, 0.0))
    }

    /// Multiplies every coefficient by an even scalar function.
    pub fn mul_coeff(&self, c: &C) -> Self {
        Self::from_sorted(self.n, self.terms.iter().map(|(m, x)| (*m, c.mul(x))))
    }

    fn from_sorted(n: usize, terms: impl Iterator<Item = (u64, C)>) -> Self {
        Multivector {
            n,
            terms: terms.filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    /// Keeps the terms whose mask satisfies `keep`.
    pub fn filter(&self, keep: impl Fn(u64) -> bool) -> Self {
        Multivector {
            n: self.n,
            terms: self.terms.iter().filter(|(m, _)| keep(*m)).cloned().collect(),
        }
    }

    /// Removes terms whose coefficient magnitude is at most `threshold`.
    pub fn prune(&self, threshold: f64) -> Self {
        Multivector {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.magnitude() > threshold)
                .cloned()
                .collect(),
        }
    }

    pub fn map_coeff<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Multivector<D> {
        Multivector::from_sorted(self.n, self.terms.iter().map(|(m, c)| (*m, f(c))))
    }

    pub fn values(&self) -> Multivector<C64> {
        self.map_coeff(|c| c.value())
    }

    /// Contraction with `η`: the odd antiderivation with `δ(e*_I) = η_I`.
    pub fn delta_eta(&self, eta: &[C]) -> Self {
        assert_eq!(eta.len(), self.n, "eta must have n components");
        let n = self.n;
        let estar = family_mask(GenKind::EStar, n);
        let mut map = FxHashMap::default();
        for (mask, c) in &self.terms {
            let mut rest = mask & estar;
            while rest != 0 {
                let bit = rest.trailing_zeros();
                rest &= rest - 1;
                let idx = bit as usize - 5 * n;
                if eta[idx].is_zero() {
                    continue;
                }
                let x = c.mul(&eta[idx]);
                accumulate(&mut map, mask & !(1u64 << bit), &x, parity_below(*mask, bit));
            }
        }
        Self::from_map(n, map)
    }

    /// The Berezin integral: coefficient of `e_1∧e_1*∧…∧e_n∧e_n*`.
    ///
    /// Canonical storage places the block as `e_1…e_n e_1*…e_n*` at the end of
    /// every mask, which differs from the interleaved order by
    /// `(-1)^{n(n-1)/2}`.
    pub fn berezin(&self) -> Self {
        let n = self.n;
        let block = family_mask(GenKind::E, n) | family_mask(GenKind::EStar, n);
        let negate = (n * (n.saturating_sub(1)) / 2) % 2 == 1;
        Self::from_sorted(
            n,
            self.terms.iter().filter(|(m, _)| m & block == block).map(|(m, c)| {
                (m & !block, if negate { c.neg() } else { c.clone() })
            }),
        )
    }

    /// `berezin(self ∧ other)` without forming the terms the integral discards.
    pub fn berezin_wedge(&self, other: &Self) -> Self {
        let n = self.n;
        assert_eq!(n, other.n, "wedge of multivectors over different shapes");
        let block = family_mask(GenKind::E, n) | family_mask(GenKind::EStar, n);
        let mut by_block: FxHashMap<u64, Vec<usize>> = FxHashMap::default();
        for (i, (m, _)) in other.terms.iter().enumerate() {
            by_block.entry(m & block).or_default().push(i);
        }
        let negate_block = (n * (n.saturating_sub(1)) / 2) % 2 == 1;
        let mut map = FxHashMap::default();
        for (ma, ca) in &self.terms {
            let eb = ma & block;
            let Some(partners) = by_block.get(&(block & !eb)) else {
                continue;
            };
            for &j in partners {
                let (mb, cb) = &other.terms[j];
                if ma & mb != 0 {
                    continue;
                }
                let c = ca.mul(cb);
                let negate = merge_sign(*ma, *mb) ^ negate_block;
                accumulate(&mut map, (ma | mb) & !block, &c, negate);
            }
        }
        Self::from_map(n, map)
    }

    pub fn bidegree_split(&self) -> BTreeMap<BidegreeKey, Multivector<C>> {
        let mut out: BTreeMap<BidegreeKey, Vec<(u64, C)>> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(BidegreeKey::of_mask(*m, self.n))
                .or_default()
                .push((*m, c.clone()));
        }
        out.into_iter()
            .map(|(k, terms)| (k, Multivector { n: self.n, terms }))
            .collect()
    }

    /// `a^m / m!`.
    pub fn power_over_factorial(&self, m: usize) -> Self {
        let mut acc = Self::one(self.n);
        let mut fact = 1.0;
        for i in 1..=m {
            acc = acc.wedge(self);
            fact *= i as f64;
        }
        acc.scale(C64::new(1.0 / fact, 0.0))
    }

    /// Total degree if homogeneous.
    pub fn degree(&self) -> Option<u32> {
        let mut it = self.terms.iter().map(|(m, _)| m.count_ones());
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    /// Keeps only terms of even total degree.
    pub fn even_part(&self) -> Self {
        self.filter(|m| m.count_ones() % 2 == 0)
    }

    /// Exchanges the roles of `z` and `ζ`: `dz ↔ dζ`, `dz̄ ↔ dζ̄`, with the
    /// reordering sign `(-1)^{deg_z · deg_ζ}`.
    pub fn swap_variables(&self) -> Self {
        let n = self.n;
        let zmask = family_mask(GenKind::Dz, n) | family_mask(GenKind::DzBar, n);
        let wmask = family_mask(GenKind::Dw, n) | family_mask(GenKind::DwBar, n);
        let rest = !(zmask | wmask);
        let terms = self.terms.iter().map(|(m, c)| {
            let (zp, wp) = (m & zmask, m & wmask);
            let mask = (zp << (2 * n)) | (wp >> (2 * n)) | (m & rest);
            let odd = (zp.count_ones() * wp.count_ones()) % 2 == 1;
            (mask, if odd { c.neg() } else { c.clone() })
        });
        Self::from_terms(n, terms)
    }

    /// Substitutes each generator family by a linear map of the same family:
    /// generator `(kind, a)` becomes `Σ_b maps[kind][a][b] · (kind, b)`.
    /// `None` leaves the family unchanged.
    pub fn substitute(&self, maps: &FamilyMaps) -> Multivector<C64>
    where
        C: Coeff,
    {
        let n = self.n;
        let tables: Vec<Option<MinorTable>> = GenKind::ALL
            .iter()
            .map(|k| maps.get(*k).map(|m| MinorTable::new(m, n)))
            .collect();
        let mut map: FxHashMap<u64, C64> = FxHashMap::default();
        for (mask, c) in &self.terms {
            let mut partial: Vec<(u64, C64)> = vec![(0, c.value())];
            for (f, kind) in GenKind::ALL.iter().enumerate() {
                let shift = kind.block() * n;
                let sub = (mask >> shift) & low_bits(n);
                match &tables[f] {
                    None => {
                        for p in partial.iter_mut() {
                            p.0 |= sub << shift;
                        }
                    }
                    Some(table) => {
                        let mut next = Vec::new();
                        for (pm, pc) in &partial {
                            for (t, det) in &table.rows[sub as usize] {
                                next.push((pm | (t << shift), pc * det));
                            }
                        }
                        partial = next;
                    }
                }
            }
            for (m, v) in partial {
                *map.entry(m).or_default() += v;
            }
        }
        Multivector::from_map(n, map)
    }
}

/// Per-family linear substitution matrices for [`Multivector::substitute`].
#[derive(Debug, Clone, Default)]
pub struct FamilyMaps {
    maps: [Option<nalgebra::DMatrix<C64>>; 6],
}

impl FamilyMaps {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets the map for `kind`; row `a` holds the image of generator `a`.
    pub fn with(mut self, kind: GenKind, m: nalgebra::DMatrix<C64>) -> Self {
        self.maps[kind.block()] = Some(m);
        self
    }

    fn get(&self, kind: GenKind) -> Option<&nalgebra::DMatrix<C64>> {
        self.maps[kind.block()].as_ref()
    }
}

/// All minors of a linear map on one generator family, indexed by source
/// subset.
struct MinorTable {
    rows: Vec<Vec<(u64, C64)>>,
}

impl MinorTable {
    fn new(m: &nalgebra::DMatrix<C64>, n: usize) -> Self {
        let size = 1usize << n;
        let rows = (0..size as u64)
            .map(|s| {
                let src: Vec<usize> = bits(s).collect();
                (0..size as u64)
                    .filter(|t| t.count_ones() == s.count_ones())
                    .filter_map(|t| {
                        let dst: Vec<usize> = bits(t).collect();
                        let sub = nalgebra::DMatrix::from_fn(src.len(), dst.len(), |i, j| {
                            m[(src[i], dst[j])]
                        });
                        let det = if src.is_empty() {
                            C64::new(1.0, 0.0)
                        } else {
                            sub.determinant()
                        };
                        (det != C64::new(0.0, 0.0)).then_some((t, det))
                    })
                    .collect()
            })
            .collect();
        MinorTable { rows }
    }
}

fn bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let b = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(b)
        }
    })
}

impl Multivector<Jet> {
    /// `∂̄` in the chosen variables; consumes one jet order.
    pub fn dbar(&self, vars: Vars) -> Result<Self> {
        self.differentiate(vars.families())
    }

    /// `∂` in the chosen variables; consumes one jet order.
    pub fn d_holo(&self, vars: Vars) -> Result<Self> {
        self.differentiate(vars.holomorphic_families())
    }

    fn differentiate(&self, families: &[GenKind]) -> Result<Self> {
        let n = self.n;
        let mut map = FxHashMap::default();
        for (mask, c) in &self.terms {
            if c.order() == 0 {
                return Err(Error::JetOrderExhausted);
            }
            for kind in families {
                let base = kind.block() * n;
                for a in 0..n {
                    let bit = (base + a) as u32;
                    if mask & (1u64 << bit) != 0 {
                        continue;
                    }
                    let d = c.derivative(bit as usize)?;
                    if d.is_zero() {
                        continue;
                    }
                    accumulate(&mut map, mask | (1u64 << bit), &d, parity_below(*mask, bit));
                }
            }
        }
        Ok(Self::from_map(n, map))
    }

    pub fn truncate(&self, order: u8) -> Self {
        self.map_coeff(|c| c.truncate(order))
    }
}

/// Matrix of multivectors, used for framed operators such as `γ₀ + γ₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct HomMatrix<C: Coeff = Jet> {
    rows: usize,
    cols: usize,
    entries: Vec<Multivector<C>>,
}

impl<C: Coeff> HomMatrix<C> {
    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Multivector<C>,
    ) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        HomMatrix {
            rows,
            cols,
            entries,
        }
    }

    pub fn scalar(m: Multivector<C>) -> Self {
        HomMatrix {
            rows: 1,
            cols: 1,
            entries: vec![m],
        }
    }

    pub fn identity(n: usize, dim: usize) -> Self {
        Self::from_fn(dim, dim, |i, j| {
            if i == j {
                Multivector::one(n)
            } else {
                Multivector::zero(n)
            }
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Multivector<C> {
        &self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[Multivector<C>] {
        &self.entries
    }

    pub fn map(&self, f: impl Fn(&Multivector<C>) -> Multivector<C>) -> Self {
        HomMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn map_coeff<D: Coeff>(&self, f: impl Fn(&C) -> D + Copy) -> HomMatrix<D> {
        HomMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e.map_coeff(f)).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j).add(other.get(i, j))
        }))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j).sub(other.get(i, j))
        }))
    }

    /// Operator composition with entries multiplied by wedge.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let n = self.entries.first().map_or(0, |e| e.n());
        Ok(Self::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = Multivector::zero(n);
            for l in 0..self.cols {
                acc.add_assign(&self.get(i, l).wedge(other.get(l, j)));
            }
            acc
        }))
    }

    /// Kronecker product: row `(i, j) -> i * other.rows + j`, entries wedged.
    pub fn kron(&self, other: &Self) -> Self {
        Self::from_fn(self.rows * other.rows, self.cols * other.cols, |r, c| {
            let (i, j) = (r / other.rows, r % other.rows);
            let (a, b) = (c / other.cols, c % other.cols);
            self.get(i, a).wedge(other.get(j, b))
        })
    }

    /// Determinant by Leibniz expansion. Valid when the entries commute, i.e.
    /// they are even.
    pub fn det_even(&self) -> Result<Multivector<C>> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "square matrix required, got {}x{}",
                self.rows, self.cols
            )));
        }
        let k = self.rows;
        let n = self.entries.first().map_or(0, |e| e.n());
        let mut acc = Multivector::zero(n);
        for (perm, odd) in permutations(k) {
            let mut prod = Multivector::one(n);
            for (i, &p) in perm.iter().enumerate() {
                prod = prod.wedge(self.get(i, p));
                if prod.is_empty() {
                    break;
                }
            }
            acc = if odd { acc.sub(&prod) } else { acc.add(&prod) };
        }
        Ok(acc)
    }

    pub fn max_magnitude(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.max_magnitude()))
    }
}

/// All permutations of `0..k` with their parity (true = odd).
pub fn permutations(k: usize) -> Vec<(Vec<usize>, bool)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, k: usize, out: &mut Vec<(Vec<usize>, bool)>) {
        if prefix.len() == k {
            let mut inv = 0;
            for i in 0..k {
                for j in i + 1..k {
                    if prefix[i] > prefix[j] {
                        inv += 1;
                    }
                }
            }
            out.push((prefix.clone(), inv % 2 == 1));
            return;
        }
        for v in 0..k {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                rec(prefix, used, k, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], k, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    type Mv = Multivector<C64>;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn gen(n: usize, kind: GenKind, i: usize) -> Mv {
        Mv::generator(n, kind, i)
    }

    fn id_tilde(n: usize) -> Mv {
        let mut acc = Mv::zero(n);
        for i in 0..n {
            acc.add_assign(&gen(n, GenKind::E, i).wedge(&gen(n, GenKind::EStar, i)));
        }
        acc
    }

    #[test]
    fn antisymmetry_of_generators() {
        let n = 2;
        let a = gen(n, GenKind::E, 1).wedge(&gen(n, GenKind::E, 0));
        let b = gen(n, GenKind::E, 0).wedge(&gen(n, GenKind::E, 1));
        assert_eq!(a, b.neg());
        assert!(gen(n, GenKind::Dz, 0).wedge(&gen(n, GenKind::Dz, 0)).is_empty());
    }

    #[test]
    fn id_tilde_squared() {
        let n = 2;
        let sq = id_tilde(n).wedge(&id_tilde(n));
        let block = gen(n, GenKind::E, 0)
            .wedge(&gen(n, GenKind::EStar, 0))
            .wedge(&gen(n, GenKind::E, 1))
            .wedge(&gen(n, GenKind::EStar, 1));
        assert_eq!(sq, block.scale(c(2.0)));
    }

    #[test]
    fn unit_is_identity() {
        let x = gen(3, GenKind::DwBar, 2).add(&gen(3, GenKind::E, 0));
        assert_eq!(x.wedge(&Mv::one(3)), x);
    }

    #[test]
    fn delta_eta_examples() {
        let n = 2;
        let eta = [c(2.0), c(3.0)];
        assert_eq!(gen(n, GenKind::EStar, 0).delta_eta(&eta), Mv::scalar(n, c(2.0)));
        let two = gen(n, GenKind::EStar, 0).wedge(&gen(n, GenKind::EStar, 1));
        let expected = gen(n, GenKind::EStar, 1)
            .scale(c(2.0))
            .sub(&gen(n, GenKind::EStar, 0).scale(c(3.0)));
        assert_eq!(two.delta_eta(&eta), expected);
        assert!(gen(n, GenKind::DzBar, 0).delta_eta(&eta).is_empty());
    }

    #[test]
    fn berezin_examples() {
        for n in 1..=4 {
            let mut block = Mv::one(n);
            for i in 0..n {
                block = block
                    .wedge(&gen(n, GenKind::E, i))
                    .wedge(&gen(n, GenKind::EStar, i));
            }
            assert_eq!(block.berezin(), Mv::one(n));
            assert_eq!(id_tilde(n).power_over_factorial(n), block);
            assert_eq!(id_tilde(n).power_over_factorial(n).berezin(), Mv::one(n));
        }
        let n = 2;
        let partial = gen(n, GenKind::E, 0).wedge(&gen(n, GenKind::EStar, 0));
        assert!(partial.berezin().is_empty());
    }

    #[test]
    fn berezin_wedge_matches_two_step() {
        let n = 2;
        let a = gen(n, GenKind::Dz, 0)
            .wedge(&gen(n, GenKind::E, 1))
            .add(&gen(n, GenKind::E, 0).wedge(&gen(n, GenKind::EStar, 1)));
        let b = id_tilde(n)
            .wedge(&gen(n, GenKind::EStar, 0))
            .add(&gen(n, GenKind::E, 0).wedge(&gen(n, GenKind::EStar, 0)).wedge(&gen(n, GenKind::DwBar, 1)).wedge(&gen(n, GenKind::E, 1)));
        assert_eq!(a.berezin_wedge(&b), a.wedge(&b).berezin());
    }

    #[test]
    fn nilpotent_power() {
        let n = 2;
        let a = gen(n, GenKind::DzBar, 0)
            .wedge(&gen(n, GenKind::EStar, 0))
            .add(&gen(n, GenKind::DzBar, 1).wedge(&gen(n, GenKind::EStar, 1)));
        let expected = gen(n, GenKind::DzBar, 0)
            .wedge(&gen(n, GenKind::EStar, 0))
            .wedge(&gen(n, GenKind::DzBar, 1))
            .wedge(&gen(n, GenKind::EStar, 1));
        assert_eq!(a.power_over_factorial(2), expected);
        assert_eq!(a.power_over_factorial(0), Mv::one(n));
    }

    #[test]
    fn bidegree_split_example() {
        let n = 1;
        let x = gen(n, GenKind::Dz, 0).wedge(&gen(n, GenKind::DwBar, 0));
        let split = x.bidegree_split();
        assert_eq!(split.len(), 1);
        let (k, v) = split.iter().next().unwrap();
        assert_eq!(k.as_tuple(), (1, 0, 0, 1, 0, 0));
        assert_eq!(v, &x);
    }

    #[test]
    fn dbar_of_coordinate() {
        let n = 1;
        let zbar = Jet::variable(C64::new(0.5, 0.0), 0, 4).conj();
        let m = Multivector::scalar(n, zbar);
        let d = m.dbar(Vars::Both).unwrap();
        assert_eq!(d.values(), gen(n, GenKind::DzBar, 0));
        let constant: Multivector<Jet> = Multivector::one(n);
        assert!(constant.dbar(Vars::Both).unwrap().is_empty());
    }

    #[test]
    fn dbar_needs_order() {
        let m = Multivector::scalar(1, Jet::value_only(c(1.0)));
        assert_eq!(m.dbar(Vars::Z), Err(Error::JetOrderExhausted));
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let a = Mv::one(1);
        let b = Mv::one(2);
        assert!(matches!(a.checked_wedge(&b), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn substitution_by_identity_is_noop() {
        let n = 2;
        let x = gen(n, GenKind::Dz, 0)
            .wedge(&gen(n, GenKind::Dz, 1))
            .wedge(&gen(n, GenKind::EStar, 1))
            .add(&gen(n, GenKind::DwBar, 0));
        let id = nalgebra::DMatrix::<C64>::identity(n, n);
        let maps = FamilyMaps::new()
            .with(GenKind::Dz, id.clone())
            .with(GenKind::EStar, id);
        assert_eq!(x.substitute(&maps), x);
    }

    #[test]
    fn substitution_scales_top_form_by_det() {
        let n = 2;
        let x = gen(n, GenKind::Dz, 0).wedge(&gen(n, GenKind::Dz, 1));
        let m = nalgebra::DMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(3.0), c(4.0)]);
        let y = x.substitute(&FamilyMaps::new().with(GenKind::Dz, m));
        assert_eq!(y, x.scale(c(-2.0)));
    }

    #[test]
    fn swap_variables_sign() {
        let n = 1;
        let x = gen(n, GenKind::Dz, 0).wedge(&gen(n, GenKind::DwBar, 0));
        let expected = gen(n, GenKind::Dw, 0).wedge(&gen(n, GenKind::DzBar, 0));
        assert_eq!(x.swap_variables(), expected);
        assert_eq!(x.swap_variables().swap_variables(), x);
    }

    #[test]
    fn det_even_of_identity() {
        let id: HomMatrix<C64> = HomMatrix::identity(2, 3);
        assert_eq!(id.det_even().unwrap(), Mv::one(2));
    }
}
