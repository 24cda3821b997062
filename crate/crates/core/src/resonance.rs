//! Exact evaluation of the first Picard iterate of the inflation data and its
//! split into resonant and nonresonant sign classes.
//!
//! With zero velocity, `∏ cos(t m_j) = 2^{−k} Σ_ε cos(t Σ ε_j m_j)`. For a
//! tuple of input frequencies lying in boxes around `η₁, …, η_k ∈ Σ`, the sign
//! vectors with `Σ ε_j |η_j| = 0` (class `S₁`) keep a slowly varying phase and
//! add up coherently; the rest (`S₂`) oscillate at frequency of order `N`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::experiment::InflationParams;
use crate::field::{
    box_modes, mode_add, mode_norm_sq, Accumulator, FrequencyField, Mode, PhasePair, MAX_DIM,
};
use crate::propagator::DispersionKind;
use crate::time::{Rule, TimeGrid};

/// Largest arity handled by the exhaustive enumerations.
pub const MAX_ARITY: usize = 8;

/// All tuples in `sigma^k` summing to zero, in lexicographic index order.
pub fn enumerate_zero_sum_tuples(k: usize, sigma: &[Mode]) -> Result<Vec<Vec<Mode>>> {
    if k == 0 || k > MAX_ARITY {
        return Err(invalid(format!("arity {k} not in 1..={MAX_ARITY}")));
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; k];
    if sigma.is_empty() {
        return Ok(out);
    }
    loop {
        let sum = idx
            .iter()
            .fold([0i64; MAX_DIM], |acc, &i| mode_add(&acc, &sigma[i]));
        if sum == [0; MAX_DIM] {
            out.push(idx.iter().map(|&i| sigma[i]).collect());
        }
        let mut pos = k;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < sigma.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Resonant (`S₁`) and nonresonant (`S₂`) sign vectors of one `η`-tuple.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignSplit {
    pub eta: Vec<Mode>,
    pub s1: Vec<Vec<i8>>,
    pub s2: Vec<Vec<i8>>,
}

/// All `2^k` sign vectors, the first coordinate varying slowest.
pub fn sign_vectors(k: usize) -> Vec<Vec<i8>> {
    (0..1usize << k)
        .map(|mask| {
            (0..k)
                .map(|j| if mask >> (k - 1 - j) & 1 == 1 { -1 } else { 1 })
                .collect()
        })
        .collect()
}

fn exact_norm(m: &Mode) -> Result<i64> {
    let sq = mode_norm_sq(m);
    let mut r = (sq as f64).sqrt() as i64;
    while r * r > sq {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= sq {
        r += 1;
    }
    if r * r == sq {
        Ok(r)
    } else {
        Err(invalid(format!("|{m:?}| is not an integer")))
    }
}

/// Splits `{−1, 1}^k` by whether `Σ ε_j |η_j|` vanishes, in exact arithmetic.
pub fn split_signs(eta: &[Mode]) -> Result<SignSplit> {
    let norms = eta.iter().map(exact_norm).collect::<Result<Vec<_>>>()?;
    let (s1, s2) = sign_vectors(eta.len()).into_iter().partition(|eps| {
        eps.iter()
            .zip(&norms)
            .map(|(&e, &n)| e as i64 * n)
            .sum::<i64>()
            == 0
    });
    Ok(SignSplit {
        eta: eta.to_vec(),
        s1,
        s2,
    })
}

/// Lattice points of `(A/4) e₁ + Q_{A/4}`.
pub fn probe_window(p: &InflationParams) -> Result<Vec<Mode>> {
    let quarter = p.a as f64 / 4.0;
    box_modes(p.d, [quarter, 0.0, 0.0], quarter)
}

/// Grid resolving `Ξ₁` of data with the given support: integrand phases reach
/// `k·max m`, and the kernel as much again.
pub fn xi1_grid(
    phi: &PhasePair,
    k: usize,
    horizon: f64,
    disp: DispersionKind,
    nodes: usize,
) -> Result<TimeGrid> {
    crate::experiment::series_grid(phi, k, horizon, disp, nodes)
}

fn joint_support(phi: &PhasePair) -> Vec<Mode> {
    let mut support = phi.pos.support();
    support.extend(phi.vel.support());
    support.sort_unstable();
    support.dedup();
    support
}

/// Union of position and velocity supports with the linear-flow coefficients
/// at each quadrature node.
struct Flow {
    support: Vec<Mode>,
    /// `coeffs[node][i]` is `F[S(τ)φ](support[i])`.
    coeffs: Vec<Vec<Complex64>>,
}

impl Flow {
    fn new(phi: &PhasePair, rule: &Rule, disp: DispersionKind) -> Self {
        let support = joint_support(phi);
        let coeffs = rule
            .iter()
            .map(|&(tau, _)| {
                support
                    .iter()
                    .map(|m| phi.pos.get(m) * disp.cos(m, tau) + phi.vel.get(m) * disp.sinc(m, tau))
                    .collect()
            })
            .collect();
        Self { support, coeffs }
    }

    fn index(&self, m: &Mode) -> Option<usize> {
        self.support.binary_search(m).ok()
    }

    /// Index tuples `(i₁, …, i_k)` with `Σ support[i_j] = target`.
    fn tuples_to(&self, k: usize, target: &Mode) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut idx = vec![0usize; k - 1];
        let n = self.support.len();
        if n == 0 {
            return out;
        }
        loop {
            let partial = idx
                .iter()
                .fold([0i64; MAX_DIM], |acc, &i| mode_add(&acc, &self.support[i]));
            let last = crate::field::mode_sub(target, &partial);
            if let Some(j) = self.index(&last) {
                let mut t = idx.clone();
                t.push(j);
                out.push(t);
            }
            let mut pos = k - 1;
            loop {
                if pos == 0 {
                    return out;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < n {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }
}

/// `F[Ξ₁(φ)(T)]` by direct enumeration of `k`-tuples in the support and the
/// composite rule on `[0, T]`, independent of the tree evaluator.
///
/// With `targets`, only those output modes are computed (tuples are found by
/// solving for the last frequency). Without, the whole sumset is computed and
/// must fit in the lattice.
pub fn xi1_exact(
    phi: &PhasePair,
    k: usize,
    horizon: f64,
    grid: &TimeGrid,
    disp: DispersionKind,
    targets: Option<&[Mode]>,
) -> Result<FrequencyField> {
    if k == 0 || k > MAX_ARITY {
        return Err(invalid(format!("arity {k} not in 1..={MAX_ARITY}")));
    }
    let lattice = phi.lattice();
    let rule = grid.rule(horizon);
    let flow = Flow::new(phi, &rule, disp);
    let integral = |xi: &Mode, tuple: &[usize]| -> Complex64 {
        rule.iter()
            .zip(&flow.coeffs)
            .map(|(&(tau, w), c)| {
                tuple.iter().fold(
                    Complex64::new(w * disp.sinc(xi, horizon - tau), 0.0),
                    |acc, &i| acc * c[i],
                )
            })
            .sum()
    };
    let mut acc = Accumulator::default();
    match targets {
        Some(list) => {
            for xi in list {
                let v: Complex64 = flow.tuples_to(k, xi).iter().map(|t| integral(xi, t)).sum();
                acc.add(*xi, v);
            }
        }
        None => {
            let n = flow.support.len();
            let mut idx = vec![0usize; k];
            let mut required = 0i64;
            if n > 0 {
                loop {
                    let xi = idx
                        .iter()
                        .fold([0i64; MAX_DIM], |a, &i| mode_add(&a, &flow.support[i]));
                    if lattice.contains(&xi) {
                        acc.add(xi, integral(&xi, &idx));
                    } else {
                        required = required.max(xi.iter().map(|x| x.abs()).max().unwrap_or(0));
                    }
                    let mut pos = k;
                    loop {
                        if pos == 0 {
                            break;
                        }
                        pos -= 1;
                        idx[pos] += 1;
                        if idx[pos] < n {
                            break;
                        }
                        idx[pos] = 0;
                    }
                    if idx.iter().all(|&i| i == 0) {
                        break;
                    }
                }
            }
            if required > 0 {
                return Err(Error::CutoffViolation {
                    required,
                    available: lattice.cutoff(),
                });
            }
        }
    }
    Ok(acc.into_field(lattice))
}

/// What to do when `T` lies outside `[4(AN)^{−1/2}, 1/(4kA)]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum WindowPolicy {
    /// Fail with `WindowViolation`.
    Enforce,
    /// Record the violation in the report and continue.
    #[default]
    Report,
}

/// `I₁` and `I₂` at one probe frequency, with `R^k` included.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeValue {
    pub xi: Mode,
    pub i1: Complex64,
    pub i2: Complex64,
    /// Contributions of tuples whose boxes do not sum to zero; expected empty.
    pub stray: Complex64,
}

/// One `(η, ε)` class summed over the probe window.
#[derive(Clone, Debug, Serialize)]
pub struct CellSummary {
    pub eta: Vec<Mode>,
    pub signs: Vec<i8>,
    pub resonant: bool,
    pub tuples: usize,
    /// Range of `|Σ ε_j m(ξ_j)|` over the tuples of the cell.
    pub phase_min: f64,
    pub phase_max: f64,
    /// `max_ξ |contribution|` over the probe window.
    pub max_abs: f64,
}

/// Resonant/nonresonant decomposition of `Ξ₁(φ)(T)` on the probe window.
#[derive(Clone, Debug, Serialize)]
pub struct ResonanceReport {
    pub horizon: f64,
    pub window_lower: f64,
    pub window_upper: f64,
    pub in_window: bool,
    pub probe: Vec<ProbeValue>,
    pub cells: Vec<CellSummary>,
    pub stray_tuples: usize,
    /// `min_ξ Re I₁(ξ)` over the probe window.
    pub i1_min: f64,
    /// `max_ξ |I₂(ξ)|` over the probe window.
    pub i2_sup: f64,
    /// `I₂ sup / I₁ min`.
    pub dominance: f64,
    /// `T² A N`, which must be large for `I₁` to dominate.
    pub t2_an: f64,
    /// `I₁ min / (R^k T² A^{d(k−1)})`.
    pub i1_constant: f64,
    /// `I₂ sup / (R^k A^{−1} N^{−1} A^{d(k−1)})`.
    pub i2_constant: f64,
    /// `min cos(τ Σ ε_j m_j)` over resonant tuples and quadrature nodes.
    pub resonant_cos_min: f64,
    pub resonant_cos_ok: bool,
    /// `max |Σ ε_j m_j|` over resonant tuples, against the bound `1.5 k A`.
    pub resonant_phase_max: f64,
    pub resonant_phase_ok: bool,
    /// Range of `|Σ ε_j m_j|` over nonresonant tuples, against `[N/2, 8kN]`.
    pub nonresonant_phase_min: f64,
    pub nonresonant_phase_max: f64,
    pub nonresonant_phase_ok: bool,
    /// `min sinc_{T−τ}(ξ)/(T−τ)` over the probe window and quadrature nodes.
    pub kernel_ratio_min: f64,
    pub quadrature_nodes: usize,
}

/// `[4(AN)^{−1/2}, 1/(4kA)]`.
pub fn resonance_window(p: &InflationParams) -> (f64, f64) {
    let a = p.a as f64;
    (
        4.0 / (a * p.big_n as f64).sqrt(),
        1.0 / (4.0 * p.k as f64 * a),
    )
}

/// Box centre in `Σ` nearest to `m` along `e₁`.
fn box_of(m: &Mode, big_n: i64) -> Mode {
    let q = (m[0] as f64 / big_n as f64).round() as i64;
    [q * big_n, 0, 0]
}

/// Computes `I₁` and `I₂` separately for every `(η, ε)` class at each probe
/// frequency, with the phase diagnostics of the decomposition.
pub fn xi1_resonant_split(
    phi: &PhasePair,
    p: &InflationParams,
    grid: &TimeGrid,
    disp: DispersionKind,
    policy: WindowPolicy,
) -> Result<ResonanceReport> {
    if !phi.vel.is_empty() {
        return Err(invalid("resonance split needs zero velocity data"));
    }
    let k = p.k;
    if k > MAX_ARITY {
        return Err(invalid(format!("arity {k} above {MAX_ARITY}")));
    }
    let horizon = p.t;
    let (lower, upper) = resonance_window(p);
    let in_window = lower <= horizon && horizon <= upper;
    if !in_window && policy == WindowPolicy::Enforce {
        return Err(Error::WindowViolation {
            horizon,
            lower,
            upper,
        });
    }
    let rule = grid.rule(horizon);
    let support = joint_support(phi);
    let values: Vec<Complex64> = support.iter().map(|m| phi.pos.get(m)).collect();
    let mult: Vec<f64> = support.iter().map(|m| disp.multiplier(m)).collect();
    let boxes: Vec<Mode> = support.iter().map(|m| box_of(m, p.big_n)).collect();
    let signs = sign_vectors(k);
    let scale = 0.5f64.powi(k as i32);
    let probe = probe_window(p)?;
    let helper = Flow {
        support: support.clone(),
        coeffs: Vec::new(),
    };

    type CellRow = (Vec<Mode>, usize, bool, usize, f64, f64, Complex64);

    struct Local {
        value: ProbeValue,
        cells: Vec<CellRow>,
        stray_tuples: usize,
        cos_min: f64,
        kernel_min: f64,
    }

    let locals = probe
        .par_iter()
        .map(|xi| -> Result<Local> {
            let kernel: Vec<f64> = rule
                .iter()
                .map(|&(tau, w)| w * disp.sinc(xi, horizon - tau))
                .collect();
            let kernel_min = rule
                .iter()
                .filter(|&&(tau, _)| horizon - tau > 0.0)
                .map(|&(tau, _)| disp.sinc(xi, horizon - tau) / (horizon - tau))
                .fold(f64::INFINITY, f64::min);
            let mut value = ProbeValue {
                xi: *xi,
                i1: Complex64::new(0.0, 0.0),
                i2: Complex64::new(0.0, 0.0),
                stray: Complex64::new(0.0, 0.0),
            };
            let mut cells: Vec<CellRow> = Vec::new();
            let mut stray_tuples = 0;
            let mut cos_min = f64::INFINITY;
            let mut splits: Vec<(Vec<Mode>, SignSplit)> = Vec::new();
            for tuple in helper.tuples_to(k, xi) {
                let eta: Vec<Mode> = tuple.iter().map(|&i| boxes[i]).collect();
                let amp = tuple
                    .iter()
                    .fold(Complex64::new(scale, 0.0), |a, &i| a * values[i]);
                let eta_sum = eta.iter().fold([0i64; MAX_DIM], |a, e| mode_add(&a, e));
                let split = if eta_sum == [0; MAX_DIM] {
                    match splits.iter().find(|(e, _)| *e == eta) {
                        Some((_, s)) => Some(s.clone()),
                        None => {
                            let s = split_signs(&eta)?;
                            splits.push((eta.clone(), s.clone()));
                            Some(s)
                        }
                    }
                } else {
                    None
                };
                if split.is_none() {
                    stray_tuples += 1;
                }
                for (si, eps) in signs.iter().enumerate() {
                    let omega: f64 = eps
                        .iter()
                        .zip(&tuple)
                        .map(|(&e, &i)| e as f64 * mult[i])
                        .sum();
                    let integral: f64 = rule
                        .iter()
                        .zip(&kernel)
                        .map(|(&(tau, _), kw)| kw * (tau * omega).cos())
                        .sum();
                    let contrib = amp * integral;
                    let Some(split) = &split else {
                        value.stray += contrib;
                        continue;
                    };
                    let resonant = split.s1.contains(eps);
                    if resonant {
                        value.i1 += contrib;
                        for &(tau, _) in &rule {
                            cos_min = cos_min.min((tau * omega).cos());
                        }
                    } else {
                        value.i2 += contrib;
                    }
                    let phase = omega.abs();
                    match cells.iter_mut().find(|c| c.0 == eta && c.1 == si) {
                        Some(c) => {
                            c.3 += 1;
                            c.4 = c.4.min(phase);
                            c.5 = c.5.max(phase);
                            c.6 += contrib;
                        }
                        None => cells.push((eta.clone(), si, resonant, 1, phase, phase, contrib)),
                    }
                }
            }
            Ok(Local {
                value,
                cells,
                stray_tuples,
                cos_min,
                kernel_min,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut cells: Vec<CellSummary> = Vec::new();
    let mut stray_tuples = 0;
    let mut cos_min = f64::INFINITY;
    let mut kernel_min = f64::INFINITY;
    let mut probe_values = Vec::with_capacity(locals.len());
    for local in locals {
        stray_tuples += local.stray_tuples;
        cos_min = cos_min.min(local.cos_min);
        kernel_min = kernel_min.min(local.kernel_min);
        for (eta, si, resonant, tuples, lo, hi, contrib) in local.cells {
            match cells
                .iter_mut()
                .find(|c| c.eta == eta && c.signs == signs[si])
            {
                Some(c) => {
                    c.tuples += tuples;
                    c.phase_min = c.phase_min.min(lo);
                    c.phase_max = c.phase_max.max(hi);
                    c.max_abs = c.max_abs.max(contrib.norm());
                }
                None => cells.push(CellSummary {
                    eta,
                    signs: signs[si].clone(),
                    resonant,
                    tuples,
                    phase_min: lo,
                    phase_max: hi,
                    max_abs: contrib.norm(),
                }),
            }
        }
        probe_values.push(local.value);
    }
    cells.sort_by(|a, b| a.eta.cmp(&b.eta).then(a.signs.cmp(&b.signs)));

    let i1_min = probe_values
        .iter()
        .map(|v| v.i1.re)
        .fold(f64::INFINITY, f64::min);
    let i2_sup = probe_values.iter().map(|v| v.i2.norm()).fold(0.0, f64::max);
    let a = p.a as f64;
    let nf = p.big_n as f64;
    let rk = p.r.powi(k as i32);
    let vol = a.powf(p.d as f64 * (k as f64 - 1.0));
    let res_phase_max = cells
        .iter()
        .filter(|c| c.resonant)
        .map(|c| c.phase_max)
        .fold(0.0, f64::max);
    let non = cells.iter().filter(|c| !c.resonant);
    let non_min = non
        .clone()
        .map(|c| c.phase_min)
        .fold(f64::INFINITY, f64::min);
    let non_max = non.map(|c| c.phase_max).fold(0.0, f64::max);
    let has_nonresonant = cells.iter().any(|c| !c.resonant);
    Ok(ResonanceReport {
        horizon,
        window_lower: lower,
        window_upper: upper,
        in_window,
        probe: probe_values,
        stray_tuples,
        i1_min,
        i2_sup,
        dominance: i2_sup / i1_min,
        t2_an: horizon * horizon * a * nf,
        i1_constant: i1_min / (rk * horizon * horizon * vol),
        i2_constant: i2_sup / (rk * vol / (a * nf)),
        resonant_cos_min: cos_min,
        resonant_cos_ok: cos_min >= 0.5,
        resonant_phase_max: res_phase_max,
        resonant_phase_ok: res_phase_max <= 1.5 * k as f64 * a,
        nonresonant_phase_min: non_min,
        nonresonant_phase_max: non_max,
        nonresonant_phase_ok: !has_nonresonant
            || (non_min >= nf / 2.0 && non_max <= 8.0 * k as f64 * nf),
        kernel_ratio_min: kernel_min,
        quadrature_nodes: rule.len(),
        cells,
    })
}

/// `‖Ξ₁(φ)(T)‖_{H^s}` against `T² R^k A^{d(k−1)} f_s(A)`.
#[derive(Clone, Debug, Serialize)]
pub struct LowerBound {
    pub lhs_full: f64,
    /// The same norm restricted to the probe window.
    pub lhs_window: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub ratio_window: f64,
}

/// Compares a computed `Ξ₁(φ)(T)` with the predicted lower bound.
pub fn verify_lower_bound(
    xi1: &FrequencyField,
    window: &[Mode],
    p: &InflationParams,
) -> LowerBound {
    let lhs_full = xi1.norm_sobolev(p.s);
    let lhs_window = xi1.restrict(|m| window.contains(m)).norm_sobolev(p.s);
    let rhs = crate::experiment::lower_bound_scale(p);
    LowerBound {
        lhs_full,
        lhs_window,
        rhs,
        ratio: lhs_full / rhs,
        ratio_window: lhs_window / rhs,
    }
}
