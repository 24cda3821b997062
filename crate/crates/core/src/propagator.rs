//! Linear propagator `S(t)` and the `k`-linear Duhamel operator.
//!
//! Everything is diagonal in frequency: mode `ξ` evolves with the multiplier
//! `m(ξ)`, which is `|ξ|` for the wave equation and `⟨ξ⟩` for Klein–Gordon.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{
    japanese, mode_norm, mode_norm_sq, FrequencyField, Lattice, Mode, PhasePair, Truncation,
};
use crate::time::{TimeField, TimeGrid};

/// Dispersion relation of the linear part.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum DispersionKind {
    #[default]
    Wave,
    KleinGordon,
}

impl DispersionKind {
    /// `m(ξ)`.
    pub fn multiplier(&self, m: &Mode) -> f64 {
        match self {
            Self::Wave => mode_norm(m),
            Self::KleinGordon => japanese(m),
        }
    }

    /// `sin(x·m(ξ))/m(ξ)`, equal to `x` at the wave zero mode.
    pub fn sinc(&self, m: &Mode, x: f64) -> f64 {
        match self {
            Self::Wave if mode_norm_sq(m) == 0 => x,
            _ => {
                let w = self.multiplier(m);
                (x * w).sin() / w
            }
        }
    }

    /// `cos(x·m(ξ))`.
    pub fn cos(&self, m: &Mode, x: f64) -> f64 {
        (x * self.multiplier(m)).cos()
    }

    /// `∂_x cos(x·m) = −m sin(x·m)`.
    fn cos_rate(&self, m: &Mode, x: f64) -> f64 {
        let w = self.multiplier(m);
        -w * (x * w).sin()
    }
}

/// `S(t)v = cos(t m) û₀ + sin(t m)/m û₁`.
pub fn linear_evolve(v: &PhasePair, t: f64, disp: DispersionKind) -> FrequencyField {
    let pos = v.pos.map_coeffs(|m, c| c * disp.cos(m, t));
    let vel = v.vel.map_coeffs(|m, c| c * disp.sinc(m, t));
    pos.add(&vel)
        .expect("phase pair components share a lattice")
}

/// `(S(t)v, ∂_t S(t)v)`, with the derivative taken analytically per mode.
pub fn linear_evolve_pair(v: &PhasePair, t: f64, disp: DispersionKind) -> PhasePair {
    let pos = linear_evolve(v, t, disp);
    let dpos = v.pos.map_coeffs(|m, c| c * disp.cos_rate(m, t));
    let dvel = v.vel.map_coeffs(|m, c| c * disp.cos(m, t));
    PhasePair {
        pos,
        vel: dpos
            .add(&dvel)
            .expect("phase pair components share a lattice"),
    }
}

/// The free evolution of fixed data, as a time-indexed field.
#[derive(Clone, Debug)]
pub struct LinearSolution {
    pub data: PhasePair,
    pub dispersion: DispersionKind,
}

impl LinearSolution {
    pub fn new(data: PhasePair, dispersion: DispersionKind) -> Self {
        Self { data, dispersion }
    }
}

impl TimeField for LinearSolution {
    fn lattice(&self) -> Lattice {
        self.data.lattice()
    }

    fn at(&self, t: f64) -> Result<FrequencyField> {
        Ok(linear_evolve(&self.data, t, self.dispersion))
    }
}

/// Product `f₁ ⋯ f_k` of a list of fields.
pub fn product(factors: &[&FrequencyField], truncation: Truncation) -> Result<FrequencyField> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| crate::error::invalid("empty product"))?;
    let mut acc = (*first).clone();
    for f in rest {
        acc = acc.multiply(f, truncation)?;
    }
    Ok(acc)
}

/// `∫₀ᵗ sin((t−t')m)/m · F[u₁⋯u_k](t') dt'` by the grid's composite rule on `[0, t]`.
pub fn duhamel(
    inputs: &[&dyn TimeField],
    t: f64,
    grid: &TimeGrid,
    disp: DispersionKind,
    truncation: Truncation,
) -> Result<FrequencyField> {
    let lattice = inputs
        .first()
        .map(|u| u.lattice())
        .ok_or_else(|| crate::error::invalid("Duhamel operator needs at least one input"))?;
    if inputs.iter().any(|u| u.lattice() != lattice) {
        return Err(Error::LatticeMismatch);
    }
    let mut out = FrequencyField::zero(lattice);
    for (tau, w) in grid.rule(t) {
        let values = inputs
            .iter()
            .map(|u| u.at(tau))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&FrequencyField> = values.iter().collect();
        let integrand = product(&refs, truncation)?;
        let term = integrand.map_coeffs(|m, c| c * (w * disp.sinc(m, t - tau)));
        out = out.add(&term)?;
    }
    Ok(out)
}

/// Running sums `C_p = Σ w cos(τm) F(τ)` and `S_p = Σ w sinc_τ F(τ)` over the
/// global nodes of the first `p` panels.
///
/// The kernel splits as `sin((t−τ)m)/m = sinc_t·cos(τm) − cos(tm)·sinc_τ`, so
/// the Duhamel integral over complete panels is `sinc_t·C_p − cos(tm)·S_p`.
#[derive(Clone, Debug)]
pub struct DuhamelPrefix {
    grid: TimeGrid,
    disp: DispersionKind,
    cos_sums: Vec<FrequencyField>,
    sinc_sums: Vec<FrequencyField>,
}

impl DuhamelPrefix {
    /// `integrand[n]` is `F` at the `n`-th global node of `grid`.
    pub fn new(
        grid: TimeGrid,
        disp: DispersionKind,
        lattice: Lattice,
        integrand: &[FrequencyField],
    ) -> Result<Self> {
        let q = grid.nodes_per_panel();
        if integrand.len() != grid.panels() * q {
            return Err(crate::error::invalid(
                "integrand length does not match the grid",
            ));
        }
        let nodes = grid.global_rule();
        let mut cos_sums = Vec::with_capacity(grid.panels() + 1);
        let mut sinc_sums = Vec::with_capacity(grid.panels() + 1);
        let mut c = FrequencyField::zero(lattice);
        let mut s = FrequencyField::zero(lattice);
        cos_sums.push(c.clone());
        sinc_sums.push(s.clone());
        for p in 0..grid.panels() {
            let mut acc_c = crate::field::Accumulator::default();
            let mut acc_s = crate::field::Accumulator::default();
            for n in p * q..(p + 1) * q {
                let (tau, w) = nodes[n];
                for (m, v) in integrand[n].iter() {
                    acc_c.add(*m, v * (w * disp.cos(m, tau)));
                    acc_s.add(*m, v * (w * disp.sinc(m, tau)));
                }
            }
            c = c.add(&acc_c.into_field(lattice))?;
            s = s.add(&acc_s.into_field(lattice))?;
            cos_sums.push(c.clone());
            sinc_sums.push(s.clone());
        }
        Ok(Self {
            grid,
            disp,
            cos_sums,
            sinc_sums,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Integral over the first `p` panels, evaluated at time `t`.
    pub fn value(&self, p: usize, t: f64) -> Result<FrequencyField> {
        let disp = self.disp;
        let a = self.cos_sums[p].map_coeffs(|m, c| c * disp.sinc(m, t));
        let b = self.sinc_sums[p].map_coeffs(|m, c| c * disp.cos(m, t));
        a.sub(&b)
    }
}

/// Adds `Σ w K(t−τ) F(τ)` over a partial-panel rule to `acc`.
pub(crate) fn add_kernel_terms(
    acc: &mut crate::field::Accumulator,
    disp: DispersionKind,
    t: f64,
    tau: f64,
    w: f64,
    integrand: &FrequencyField,
) {
    for (m, v) in integrand.iter() {
        acc.add(*m, v * (w * disp.sinc(m, t - tau)));
    }
}

/// `Σ_{ξ≠0} (m²|û|² + |∂_t û|²)`, conserved by the linear wave flow.
pub fn linear_energy(v: &PhasePair, disp: DispersionKind) -> f64 {
    let pos: f64 = v
        .pos
        .iter()
        .filter(|(m, _)| mode_norm_sq(m) != 0)
        .map(|(m, c)| disp.multiplier(m).powi(2) * c.norm_sqr())
        .sum();
    let vel: f64 = v
        .vel
        .iter()
        .filter(|(m, _)| mode_norm_sq(m) != 0)
        .map(|(_, c)| c.norm_sqr())
        .sum();
    pos + vel
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::Stationary;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn lat() -> Lattice {
        Lattice::new(1, 8).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn evolve_at_zero_returns_position() {
        let pos = FrequencyField::from_entries(lat(), [([1, 0, 0], c(2.0)), ([-3, 0, 0], c(-1.0))])
            .unwrap();
        let vel = FrequencyField::single_mode(lat(), [2, 0, 0], c(5.0)).unwrap();
        let v = PhasePair::new(pos.clone(), vel).unwrap();
        assert_eq!(linear_evolve(&v, 0.0, DispersionKind::Wave), pos);
    }

    #[test]
    fn zero_mode_velocity_grows_linearly() {
        let v = PhasePair::new(
            FrequencyField::zero(lat()),
            FrequencyField::single_mode(lat(), [0, 0, 0], c(1.5)).unwrap(),
        )
        .unwrap();
        for &t in &[0.0, 0.3, 1.0, 7.0] {
            let u = linear_evolve(&v, t, DispersionKind::Wave);
            assert_eq!(u.get(&[0, 0, 0]), c(1.5 * t));
            let pair = linear_evolve_pair(&v, t, DispersionKind::Wave);
            assert_eq!(pair.vel.get(&[0, 0, 0]), c(1.5));
        }
    }

    #[test]
    fn half_period_flips_sign() {
        let v = PhasePair::new(
            FrequencyField::single_mode(lat(), [1, 0, 0], c(1.0)).unwrap(),
            FrequencyField::zero(lat()),
        )
        .unwrap();
        let u = linear_evolve(&v, std::f64::consts::PI, DispersionKind::Wave);
        assert!((u.get(&[1, 0, 0]) - c(-1.0)).norm() < 1e-15);
    }

    #[test]
    fn klein_gordon_zero_mode_oscillates() {
        let v = PhasePair::new(
            FrequencyField::single_mode(lat(), [0, 0, 0], c(1.0)).unwrap(),
            FrequencyField::zero(lat()),
        )
        .unwrap();
        let u = linear_evolve(&v, 0.4, DispersionKind::KleinGordon);
        assert_relative_eq!(u.get(&[0, 0, 0]).re, 0.4f64.cos(), max_relative = 1e-15);
    }

    #[test]
    fn constant_inputs_give_quadratic_growth() {
        let cst = Stationary(FrequencyField::single_mode(lat(), [0, 0, 0], c(0.8)).unwrap());
        let grid = TimeGrid::with_default(1.0).unwrap();
        for k in 2..=4 {
            let inputs: Vec<&dyn TimeField> = (0..k).map(|_| &cst as &dyn TimeField).collect();
            for &t in &[0.25, 0.7, 1.0] {
                let out =
                    duhamel(&inputs, t, &grid, DispersionKind::Wave, Truncation::Strict).unwrap();
                assert_relative_eq!(
                    out.get(&[0, 0, 0]).re,
                    0.8f64.powi(k) * t * t / 2.0,
                    max_relative = 1e-13
                );
            }
        }
    }

    #[test]
    fn zero_inputs_give_zero() {
        let z = Stationary(FrequencyField::zero(lat()));
        let grid = TimeGrid::with_default(1.0).unwrap();
        let out = duhamel(
            &[&z, &z],
            0.6,
            &grid,
            DispersionKind::Wave,
            Truncation::Strict,
        )
        .unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn prefix_sums_match_direct_rule_at_breakpoints() {
        let lattice = lat();
        let data = PhasePair::new(
            FrequencyField::from_entries(lattice, [([2, 0, 0], c(1.0)), ([-2, 0, 0], c(1.0))])
                .unwrap(),
            FrequencyField::zero(lattice),
        )
        .unwrap();
        let lin = LinearSolution::new(data, DispersionKind::Wave);
        let grid = TimeGrid::new(1.0, 5, 6).unwrap();
        let integrand: Vec<FrequencyField> = grid
            .global_rule()
            .iter()
            .map(|(tau, _)| {
                let u = lin.at(*tau).unwrap();
                u.multiply(&u, Truncation::Strict).unwrap()
            })
            .collect();
        let prefix = DuhamelPrefix::new(grid, DispersionKind::Wave, lattice, &integrand).unwrap();
        let direct = duhamel(
            &[&lin, &lin],
            1.0,
            &grid,
            DispersionKind::Wave,
            Truncation::Strict,
        )
        .unwrap();
        let via_prefix = prefix.value(5, 1.0).unwrap();
        assert!(direct.sub(&via_prefix).unwrap().norm_fl1() < 1e-14);
    }
}
