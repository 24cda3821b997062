//! Frequency-lattice fields on the torus `T^d`.
//!
//! A [`FrequencyField`] stores the nonzero Fourier coefficients of a field on
//! the truncated lattice `[-M, M]^d ∩ Z^d`, sorted lexicographically. Norms are
//! exact sums over the stored modes. Products are discrete convolutions; the
//! sumset of the operands' supports is checked against the cutoff before any
//! arithmetic happens, so a product either fits or fails with
//! [`Error::CutoffViolation`] (or is projected, when asked for explicitly).

use std::collections::HashMap;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

/// A lattice point of `Z^d`; unused trailing coordinates are zero.
pub type Mode = [i64; MAX_DIM];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub fn mode_add(a: &Mode, b: &Mode) -> Mode {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn mode_sub(a: &Mode, b: &Mode) -> Mode {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn mode_neg(a: &Mode) -> Mode {
    [-a[0], -a[1], -a[2]]
}

pub fn mode_norm_sq(a: &Mode) -> i64 {
    a.iter().map(|x| x * x).sum()
}

/// Euclidean length `|ξ|`.
pub fn mode_norm(a: &Mode) -> f64 {
    (mode_norm_sq(a) as f64).sqrt()
}

/// Japanese bracket `⟨ξ⟩ = (1 + |ξ|²)^{1/2}`.
pub fn japanese(a: &Mode) -> f64 {
    (1.0 + mode_norm_sq(a) as f64).sqrt()
}

/// The cube `[-M, M]^d ∩ Z^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Lattice {
    dim: usize,
    cutoff: i64,
}

impl Lattice {
    pub fn new(dim: usize, cutoff: i64) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(invalid(format!("dimension {dim} not in 1..={MAX_DIM}")));
        }
        if cutoff < 1 {
            return Err(invalid(format!("cutoff {cutoff} must be at least 1")));
        }
        Ok(Self { dim, cutoff })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoff(&self) -> i64 {
        self.cutoff
    }

    /// `(2M + 1)^d`.
    pub fn mode_count(&self) -> usize {
        ((2 * self.cutoff + 1) as usize).pow(self.dim as u32)
    }

    pub fn contains(&self, m: &Mode) -> bool {
        m[..self.dim].iter().all(|x| x.abs() <= self.cutoff)
            && m[self.dim..].iter().all(|&x| x == 0)
    }

    /// All lattice modes in lexicographic order.
    pub fn modes(&self) -> impl Iterator<Item = Mode> + '_ {
        let side = 2 * self.cutoff + 1;
        let dim = self.dim;
        let cutoff = self.cutoff;
        (0..self.mode_count()).map(move |mut idx| {
            let mut m = [0i64; MAX_DIM];
            for axis in (0..dim).rev() {
                m[axis] = (idx as i64 % side) - cutoff;
                idx /= side as usize;
            }
            m
        })
    }
}

/// How a product treats modes that land outside the lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Truncation {
    /// Fail with [`Error::CutoffViolation`].
    #[default]
    Strict,
    /// Galerkin projection: drop the modes outside `[-M, M]^d`.
    Project,
}

/// Exponent of a Fourier–Lebesgue norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LebesgueExponent {
    One,
    Two,
    Infinity,
}

/// How [`FrequencyField::pointwise_power`] computes the convolution power.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ProductMethod {
    #[default]
    Direct,
    /// Zero-padded FFT; exact up to roundoff, which may leave tiny coefficients
    /// anywhere inside the bounding box of the sumset.
    Fft,
}

/// Fourier coefficients of a field on a truncated frequency lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyField {
    lattice: Lattice,
    modes: Vec<Mode>,
    coeffs: Vec<Complex64>,
}

impl FrequencyField {
    pub fn zero(lattice: Lattice) -> Self {
        Self {
            lattice,
            modes: Vec::new(),
            coeffs: Vec::new(),
        }
    }

    /// Builds a field from `(mode, coefficient)` pairs. Repeated modes are summed
    /// and exact zeros are dropped.
    pub fn from_entries<I>(lattice: Lattice, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Mode, Complex64)>,
    {
        let mut acc = Accumulator::default();
        for (m, c) in entries {
            if !lattice.contains(&m) {
                return Err(Error::CutoffViolation {
                    required: m.iter().map(|x| x.abs()).max().unwrap_or(0),
                    available: lattice.cutoff,
                });
            }
            acc.add(m, c);
        }
        Ok(acc.into_field(lattice))
    }

    pub fn single_mode(lattice: Lattice, mode: Mode, coeff: Complex64) -> Result<Self> {
        Self::from_entries(lattice, [(mode, coeff)])
    }

    /// Fills every lattice mode from `f`; zeros are dropped.
    pub fn from_fn(lattice: Lattice, mut f: impl FnMut(&Mode) -> Complex64) -> Self {
        let (modes, coeffs) = lattice
            .modes()
            .filter_map(|m| {
                let c = f(&m);
                (c != ZERO).then_some((m, c))
            })
            .unzip();
        Self {
            lattice,
            modes,
            coeffs,
        }
    }

    /// Indicator of `(center + Q_A) ∩ Z^d` with the half-open cube
    /// `Q_A = [-A/2, A/2)^d`.
    pub fn box_indicator(lattice: Lattice, center: Mode, side: f64) -> Result<Self> {
        let modes = box_modes(
            lattice.dim,
            [center[0] as f64, center[1] as f64, center[2] as f64],
            side,
        )?;
        Self::from_entries(
            lattice,
            modes.into_iter().map(|m| (m, Complex64::new(1.0, 0.0))),
        )
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    /// Number of stored (nonzero) coefficients.
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Mode, &Complex64)> + '_ {
        self.modes.iter().zip(self.coeffs.iter())
    }

    pub fn get(&self, m: &Mode) -> Complex64 {
        match self.modes.binary_search(m) {
            Ok(i) => self.coeffs[i],
            Err(_) => ZERO,
        }
    }

    /// The exact set `{ξ : f̂(ξ) ≠ 0}` in lexicographic order.
    pub fn support(&self) -> Vec<Mode> {
        self.iter()
            .filter(|(_, c)| **c != ZERO)
            .map(|(m, _)| *m)
            .collect()
    }

    /// Per-axis `(min, max)` of the support, `None` for the zero field.
    pub fn bounds(&self) -> Option<(Mode, Mode)> {
        let first = self.modes.first()?;
        let mut lo = *first;
        let mut hi = *first;
        for m in &self.modes {
            for a in 0..self.lattice.dim {
                lo[a] = lo[a].min(m[a]);
                hi[a] = hi[a].max(m[a]);
            }
        }
        Some((lo, hi))
    }

    /// Largest `|ξ_i|` over the support and all axes.
    pub fn radius(&self) -> i64 {
        self.bounds()
            .map(|(lo, hi)| {
                lo.iter()
                    .chain(hi.iter())
                    .map(|x| x.abs())
                    .max()
                    .unwrap_or(0)
            })
            .unwrap_or(0)
    }

    /// Moves the field onto another lattice of the same dimension. Fails if the
    /// target is too small to hold the support.
    pub fn relattice(&self, lattice: Lattice) -> Result<Self> {
        if lattice.dim != self.lattice.dim {
            return Err(Error::LatticeMismatch);
        }
        let r = self.radius();
        if r > lattice.cutoff {
            return Err(Error::CutoffViolation {
                required: r,
                available: lattice.cutoff,
            });
        }
        Ok(Self {
            lattice,
            modes: self.modes.clone(),
            coeffs: self.coeffs.clone(),
        })
    }

    /// Keeps only the modes satisfying `keep`.
    pub fn restrict(&self, mut keep: impl FnMut(&Mode) -> bool) -> Self {
        let (modes, coeffs) = self
            .iter()
            .filter(|(m, _)| keep(m))
            .map(|(m, c)| (*m, *c))
            .unzip();
        Self {
            lattice: self.lattice,
            modes,
            coeffs,
        }
    }

    /// Multiplies every coefficient by a mode-dependent factor.
    pub fn map_coeffs(&self, mut f: impl FnMut(&Mode, Complex64) -> Complex64) -> Self {
        let mut modes = Vec::with_capacity(self.len());
        let mut coeffs = Vec::with_capacity(self.len());
        for (m, c) in self.iter() {
            let v = f(m, *c);
            if v != ZERO {
                modes.push(*m);
                coeffs.push(v);
            }
        }
        Self {
            lattice: self.lattice,
            modes,
            coeffs,
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map_coeffs(|_, c| c * factor)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1.0)
    }

    /// `self + factor * other`, merging the sorted supports.
    pub fn combine(&self, other: &Self, factor: f64) -> Result<Self> {
        if self.lattice != other.lattice {
            return Err(Error::LatticeMismatch);
        }
        let mut modes = Vec::with_capacity(self.len() + other.len());
        let mut coeffs = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        let mut push = |m: Mode, c: Complex64| {
            if c != ZERO {
                modes.push(m);
                coeffs.push(c);
            }
        };
        while i < self.len() || j < other.len() {
            let take_left = j >= other.len() || (i < self.len() && self.modes[i] < other.modes[j]);
            let take_right = i >= self.len() || (j < other.len() && other.modes[j] < self.modes[i]);
            if take_left {
                push(self.modes[i], self.coeffs[i]);
                i += 1;
            } else if take_right {
                push(other.modes[j], other.coeffs[j] * factor);
                j += 1;
            } else {
                push(self.modes[i], self.coeffs[i] + other.coeffs[j] * factor);
                i += 1;
                j += 1;
            }
        }
        Ok(Self {
            lattice: self.lattice,
            modes,
            coeffs,
        })
    }

    /// `(Σ_ξ ⟨ξ⟩^{2s} |f̂(ξ)|²)^{1/2}`.
    pub fn norm_sobolev(&self, s: f64) -> f64 {
        self.norm_fourier_lebesgue(s, LebesgueExponent::Two)
    }

    /// `‖⟨ξ⟩^s f̂‖_{ℓ^p(Z^d)}` with counting measure.
    pub fn norm_fourier_lebesgue(&self, s: f64, p: LebesgueExponent) -> f64 {
        let weighted = self.iter().map(|(m, c)| weight(m, s) * c.norm());
        match p {
            LebesgueExponent::One => weighted.fold(0.0, |a, x| a + x),
            LebesgueExponent::Two => weighted.fold(0.0, |a, x| a + x * x).sqrt(),
            LebesgueExponent::Infinity => weighted.fold(0.0, f64::max),
        }
    }

    /// `‖f‖_{FL¹}`, the norm the local theory is set in.
    pub fn norm_fl1(&self) -> f64 {
        self.norm_fourier_lebesgue(0.0, LebesgueExponent::One)
    }

    /// `max_ξ |f̂(ξ)|`.
    pub fn norm_sup(&self) -> f64 {
        self.norm_fourier_lebesgue(0.0, LebesgueExponent::Infinity)
    }

    /// Largest `|f̂(ξ) − conj f̂(−ξ)|`; zero for the transform of real data.
    pub fn hermitian_defect(&self) -> f64 {
        self.iter()
            .map(|(m, c)| (c - self.get(&mode_neg(m)).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Discrete convolution `f̂ ∗ ĝ`, i.e. the coefficients of the product `f·g`.
    pub fn multiply(&self, other: &Self, truncation: Truncation) -> Result<Self> {
        convolve(self, other, truncation)
    }

    /// Coefficients of `f^k`.
    pub fn pointwise_power(
        &self,
        k: usize,
        method: ProductMethod,
        truncation: Truncation,
    ) -> Result<Self> {
        if k == 0 {
            return Err(invalid("power must be at least 1"));
        }
        match method {
            ProductMethod::Direct => {
                let mut acc = self.clone();
                for _ in 1..k {
                    acc = convolve(&acc, self, truncation)?;
                }
                Ok(acc)
            }
            ProductMethod::Fft => power_fft(self, k, truncation),
        }
    }
}

/// `⟨ξ⟩^s`, skipping the power for `s = 0`.
pub fn weight(m: &Mode, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else {
        japanese(m).powf(s)
    }
}

/// Lattice points of `center + [-A/2, A/2)^d`, with a real-valued center.
pub fn box_modes(dim: usize, center: [f64; MAX_DIM], side: f64) -> Result<Vec<Mode>> {
    if !(side >= 1.0) {
        return Err(invalid(format!("box side {side} must be at least 1")));
    }
    let ranges: Vec<(i64, i64)> = (0..dim)
        .map(|a| {
            let lo = (center[a] - side / 2.0).ceil() as i64;
            // half-open: exclude center + A/2 itself
            let hi_excl = center[a] + side / 2.0;
            let mut hi = hi_excl.ceil() as i64 - 1;
            if (hi as f64) >= hi_excl {
                hi -= 1;
            }
            (lo, hi)
        })
        .collect();
    let mut out = vec![[0i64; MAX_DIM]];
    for (a, &(lo, hi)) in ranges.iter().enumerate() {
        let mut next = Vec::with_capacity(out.len() * (hi - lo + 1).max(0) as usize);
        for m in &out {
            for x in lo..=hi {
                let mut n = *m;
                n[a] = x;
                next.push(n);
            }
        }
        out = next;
    }
    Ok(out)
}

/// Hash-based sparse accumulator; converts into a sorted field.
#[derive(Debug, Default, Clone)]
pub(crate) struct Accumulator {
    entries: HashMap<Mode, Complex64>,
}

impl Accumulator {
    pub(crate) fn add(&mut self, m: Mode, c: Complex64) {
        *self.entries.entry(m).or_insert(ZERO) += c;
    }

    pub(crate) fn into_field(self, lattice: Lattice) -> FrequencyField {
        let mut pairs: Vec<(Mode, Complex64)> = self
            .entries
            .into_iter()
            .filter(|(_, c)| *c != ZERO)
            .collect();
        pairs.sort_unstable_by_key(|a| a.0);
        let (modes, coeffs) = pairs.into_iter().unzip();
        FrequencyField {
            lattice,
            modes,
            coeffs,
        }
    }
}

fn sumset_bounds(
    a: &FrequencyField,
    b: &FrequencyField,
    truncation: Truncation,
) -> Result<Option<(Mode, Mode)>> {
    let lattice = a.lattice;
    let (Some((alo, ahi)), Some((blo, bhi))) = (a.bounds(), b.bounds()) else {
        return Ok(None);
    };
    let mut lo = mode_add(&alo, &blo);
    let mut hi = mode_add(&ahi, &bhi);
    let m = lattice.cutoff;
    let reach = lo
        .iter()
        .chain(hi.iter())
        .map(|x| x.abs())
        .max()
        .unwrap_or(0);
    match truncation {
        Truncation::Strict if reach > m => Err(Error::CutoffViolation {
            required: reach,
            available: m,
        }),
        Truncation::Strict => Ok(Some((lo, hi))),
        Truncation::Project => {
            for axis in 0..lattice.dim {
                lo[axis] = lo[axis].max(-m);
                hi[axis] = hi[axis].min(m);
                if lo[axis] > hi[axis] {
                    return Ok(None);
                }
            }
            Ok(Some((lo, hi)))
        }
    }
}

fn convolve(
    a: &FrequencyField,
    b: &FrequencyField,
    truncation: Truncation,
) -> Result<FrequencyField> {
    if a.lattice != b.lattice {
        return Err(Error::LatticeMismatch);
    }
    let lattice = a.lattice;
    let Some((lo, hi)) = sumset_bounds(a, b, truncation)? else {
        return Ok(FrequencyField::zero(lattice));
    };
    let dim = lattice.dim;
    let extent: Vec<usize> = (0..dim).map(|x| (hi[x] - lo[x] + 1) as usize).collect();
    let volume: usize = extent.iter().product();
    let pairs = a.len() * b.len();
    let index = |m: &Mode| -> Option<usize> {
        let mut idx = 0usize;
        for x in 0..dim {
            if m[x] < lo[x] || m[x] > hi[x] {
                return None;
            }
            idx = idx * extent[x] + (m[x] - lo[x]) as usize;
        }
        Some(idx)
    };
    let decode = |mut idx: usize| -> Mode {
        let mut m = [0i64; MAX_DIM];
        for x in (0..dim).rev() {
            m[x] = lo[x] + (idx % extent[x]) as i64;
            idx /= extent[x];
        }
        m
    };

    let mut modes = Vec::new();
    let mut coeffs = Vec::new();
    if volume <= 4 * pairs + 64 {
        let mut dense = vec![ZERO; volume];
        for (ma, ca) in a.iter() {
            for (mb, cb) in b.iter() {
                if let Some(i) = index(&mode_add(ma, mb)) {
                    dense[i] += ca * cb;
                }
            }
        }
        for (i, c) in dense.into_iter().enumerate() {
            if c != ZERO {
                modes.push(decode(i));
                coeffs.push(c);
            }
        }
    } else {
        let mut flat: Vec<(usize, Complex64)> = Vec::with_capacity(pairs);
        for (ma, ca) in a.iter() {
            for (mb, cb) in b.iter() {
                if let Some(i) = index(&mode_add(ma, mb)) {
                    flat.push((i, ca * cb));
                }
            }
        }
        flat.sort_unstable_by_key(|e| e.0);
        let mut iter = flat.into_iter().peekable();
        while let Some((i, mut c)) = iter.next() {
            while let Some(&(j, d)) = iter.peek() {
                if j != i {
                    break;
                }
                c += d;
                iter.next();
            }
            if c != ZERO {
                modes.push(decode(i));
                coeffs.push(c);
            }
        }
    }
    Ok(FrequencyField {
        lattice,
        modes,
        coeffs,
    })
}

fn power_fft(f: &FrequencyField, k: usize, truncation: Truncation) -> Result<FrequencyField> {
    let lattice = f.lattice;
    let Some((lo, hi)) = f.bounds() else {
        return Ok(FrequencyField::zero(lattice));
    };
    let dim = lattice.dim;
    let kk = k as i64;
    let reach = lo
        .iter()
        .chain(hi.iter())
        .map(|x| (x * kk).abs())
        .max()
        .unwrap_or(0);
    if truncation == Truncation::Strict && reach > lattice.cutoff {
        return Err(Error::CutoffViolation {
            required: reach,
            available: lattice.cutoff,
        });
    }
    // The k-fold sumset spans k*(hi - lo) + 1 points per axis; a cyclic
    // transform of at least that length does not alias.
    let len: Vec<usize> = (0..dim)
        .map(|x| (kk * (hi[x] - lo[x]) + 1) as usize)
        .collect();
    let total: usize = len.iter().product();
    let mut data = vec![ZERO; total];
    let flat = |m: &Mode, origin: &[i64]| -> usize {
        let mut idx = 0usize;
        for x in 0..dim {
            idx = idx * len[x] + (m[x] - origin[x]) as usize;
        }
        idx
    };
    for (m, c) in f.iter() {
        data[flat(m, &lo[..dim])] = *c;
    }
    let mut planner = FftPlanner::<f64>::new();
    fft_axes(&mut data, &len, &mut planner, false);
    for v in data.iter_mut() {
        *v = v.powu(k as u32);
    }
    fft_axes(&mut data, &len, &mut planner, true);
    let scale = 1.0 / total as f64;
    let origin: Vec<i64> = (0..dim).map(|x| kk * lo[x]).collect();
    let mut modes = Vec::new();
    let mut coeffs = Vec::new();
    for (idx, c) in data.into_iter().enumerate() {
        let mut m = [0i64; MAX_DIM];
        let mut rest = idx;
        for x in (0..dim).rev() {
            m[x] = origin[x] + (rest % len[x]) as i64;
            rest /= len[x];
        }
        if !lattice.contains(&m) {
            continue;
        }
        let v = c * scale;
        if v != ZERO {
            modes.push(m);
            coeffs.push(v);
        }
    }
    Ok(FrequencyField {
        lattice,
        modes,
        coeffs,
    })
}

fn fft_axes(data: &mut [Complex64], len: &[usize], planner: &mut FftPlanner<f64>, inverse: bool) {
    let dim = len.len();
    for axis in 0..dim {
        let n = len[axis];
        if n == 1 {
            continue;
        }
        let fft = if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        let stride: usize = len[axis + 1..].iter().product();
        let outer: usize = len[..axis].iter().product();
        let mut line = vec![ZERO; n];
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * n * stride + inner;
                for (i, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + i * stride];
                }
                fft.process(&mut line);
                for (i, v) in line.iter().enumerate() {
                    data[base + i * stride] = *v;
                }
            }
        }
    }
}

/// Cauchy data `(u, ∂_t u)` on a common lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePair {
    pub pos: FrequencyField,
    pub vel: FrequencyField,
}

impl PhasePair {
    pub fn new(pos: FrequencyField, vel: FrequencyField) -> Result<Self> {
        if pos.lattice != vel.lattice {
            return Err(Error::LatticeMismatch);
        }
        Ok(Self { pos, vel })
    }

    pub fn zero(lattice: Lattice) -> Self {
        Self {
            pos: FrequencyField::zero(lattice),
            vel: FrequencyField::zero(lattice),
        }
    }

    pub fn lattice(&self) -> Lattice {
        self.pos.lattice
    }

    /// `(‖u‖²_{H^s} + ‖v‖²_{H^{s-1}})^{1/2}`.
    pub fn norm(&self, s: f64) -> f64 {
        self.pos
            .norm_sobolev(s)
            .hypot(self.vel.norm_sobolev(s - 1.0))
    }

    /// `‖u‖_{FL¹} + ‖v‖_{FL^{-1,1}}`.
    pub fn norm_fl(&self) -> f64 {
        self.pos.norm_fl1() + self.vel.norm_fourier_lebesgue(-1.0, LebesgueExponent::One)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            pos: self.pos.add(&other.pos)?,
            vel: self.vel.add(&other.vel)?,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            pos: self.pos.sub(&other.pos)?,
            vel: self.vel.sub(&other.vel)?,
        })
    }

    pub fn relattice(&self, lattice: Lattice) -> Result<Self> {
        Ok(Self {
            pos: self.pos.relattice(lattice)?,
            vel: self.vel.relattice(lattice)?,
        })
    }

    /// Largest coordinate magnitude over both supports.
    pub fn radius(&self) -> i64 {
        self.pos.radius().max(self.vel.radius())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn l1(m: i64) -> Lattice {
        Lattice::new(1, m).unwrap()
    }

    #[test]
    fn lattice_rejects_bad_shape() {
        assert!(Lattice::new(0, 4).is_err());
        assert!(Lattice::new(4, 4).is_err());
        assert!(Lattice::new(2, 0).is_err());
        assert_eq!(Lattice::new(2, 3).unwrap().mode_count(), 49);
        assert_eq!(Lattice::new(2, 3).unwrap().modes().count(), 49);
    }

    #[test]
    fn sobolev_norm_examples() {
        let lat = l1(4);
        assert_eq!(FrequencyField::zero(lat).norm_sobolev(3.0), 0.0);
        let origin = FrequencyField::single_mode(lat, [0, 0, 0], c(1.0)).unwrap();
        assert_relative_eq!(origin.norm_sobolev(-7.3), 1.0);
        let one = FrequencyField::single_mode(lat, [1, 0, 0], c(1.0)).unwrap();
        assert_relative_eq!(
            one.norm_sobolev(-1.0),
            2f64.powf(-0.5),
            max_relative = 1e-15
        );
    }

    #[test]
    fn fourier_lebesgue_of_box() {
        let lat = l1(64);
        let r = 3.5;
        let f = FrequencyField::box_indicator(lat, [0, 0, 0], 8.0)
            .unwrap()
            .scale(r);
        assert_relative_eq!(f.norm_fourier_lebesgue(0.0, LebesgueExponent::One), r * 8.0);
        assert_relative_eq!(f.norm_fourier_lebesgue(0.0, LebesgueExponent::Infinity), r);
        assert_eq!(
            FrequencyField::zero(lat).norm_fourier_lebesgue(1.0, LebesgueExponent::One),
            0.0
        );
    }

    #[test]
    fn box_indicator_is_half_open() {
        let lat = l1(10);
        let f = FrequencyField::box_indicator(lat, [0, 0, 0], 4.0).unwrap();
        assert_eq!(
            f.support(),
            vec![[-2, 0, 0], [-1, 0, 0], [0, 0, 0], [1, 0, 0]]
        );
        let lat2 = Lattice::new(2, 5).unwrap();
        assert_eq!(
            FrequencyField::box_indicator(lat2, [0, 0, 0], 2.0)
                .unwrap()
                .len(),
            4
        );
        // odd side: [-1.5, 1.5) holds -1, 0, 1
        assert_eq!(
            FrequencyField::box_indicator(lat, [3, 0, 0], 3.0)
                .unwrap()
                .len(),
            3
        );
        assert!(FrequencyField::box_indicator(lat, [0, 0, 0], 0.5).is_err());
    }

    #[test]
    fn box_with_fractional_center() {
        // (A/4) e1 + Q_{A/4} for A = 10 is [1.25, 3.75) -> {2, 3}
        let modes = box_modes(1, [2.5, 0.0, 0.0], 2.5).unwrap();
        assert_eq!(modes, vec![[2, 0, 0], [3, 0, 0]]);
        let modes = box_modes(1, [2.0, 0.0, 0.0], 2.0).unwrap();
        assert_eq!(modes, vec![[1, 0, 0], [2, 0, 0]]);
    }

    #[test]
    fn square_of_two_point_indicator() {
        let lat = l1(4);
        let f =
            FrequencyField::from_entries(lat, [([-1, 0, 0], c(1.0)), ([1, 0, 0], c(1.0))]).unwrap();
        let sq = f
            .pointwise_power(2, ProductMethod::Direct, Truncation::Strict)
            .unwrap();
        assert_eq!(sq.support(), vec![[-2, 0, 0], [0, 0, 0], [2, 0, 0]]);
        assert_eq!(sq.get(&[-2, 0, 0]), c(1.0));
        assert_eq!(sq.get(&[0, 0, 0]), c(2.0));
        assert_eq!(sq.get(&[2, 0, 0]), c(1.0));
    }

    #[test]
    fn constant_mode_power() {
        let lat = l1(2);
        let z = Complex64::new(0.7, -0.2);
        let f = FrequencyField::single_mode(lat, [0, 0, 0], z).unwrap();
        for k in 2..6 {
            let p = f
                .pointwise_power(k, ProductMethod::Direct, Truncation::Strict)
                .unwrap();
            assert_eq!(p.len(), 1);
            assert!((p.get(&[0, 0, 0]) - z.powu(k as u32)).norm() < 1e-15);
        }
    }

    #[test]
    fn cutoff_violation_is_reported() {
        let lat = l1(3);
        let f = FrequencyField::single_mode(lat, [2, 0, 0], c(1.0)).unwrap();
        match f.pointwise_power(2, ProductMethod::Direct, Truncation::Strict) {
            Err(Error::CutoffViolation {
                required,
                available,
            }) => {
                assert_eq!(required, 4);
                assert_eq!(available, 3);
            }
            other => panic!("expected cutoff violation, got {other:?}"),
        }
        assert!(f
            .pointwise_power(2, ProductMethod::Fft, Truncation::Strict)
            .is_err());
        let projected = f
            .pointwise_power(2, ProductMethod::Direct, Truncation::Project)
            .unwrap();
        assert!(projected.is_empty());
    }

    #[test]
    fn combine_merges_supports() {
        let lat = l1(5);
        let f =
            FrequencyField::from_entries(lat, [([-1, 0, 0], c(1.0)), ([2, 0, 0], c(2.0))]).unwrap();
        let g =
            FrequencyField::from_entries(lat, [([2, 0, 0], c(2.0)), ([3, 0, 0], c(1.0))]).unwrap();
        let d = f.sub(&g).unwrap();
        assert_eq!(d.support(), vec![[-1, 0, 0], [3, 0, 0]]);
        assert_eq!(d.get(&[3, 0, 0]), c(-1.0));
        assert!(f.add(&FrequencyField::zero(l1(6))).is_err());
    }

    #[test]
    fn phase_pair_norms() {
        let lat = l1(3);
        assert_eq!(PhasePair::zero(lat).norm(0.0), 0.0);
        let v = PhasePair::new(
            FrequencyField::zero(lat),
            FrequencyField::single_mode(lat, [0, 0, 0], c(2.5)).unwrap(),
        )
        .unwrap();
        assert_relative_eq!(v.norm(0.0), 2.5);
        assert!(PhasePair::new(FrequencyField::zero(lat), FrequencyField::zero(l1(4))).is_err());
    }
}
