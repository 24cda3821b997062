//! Local solutions of `u = S(t)u₀ + I[u, …, u]` in `C([0, T]; FL¹)`.
//!
//! Two independent routes are provided. [`solve_series`] sums the tree
//! expansion `Σ_{j ≤ J} Ξ_j(u₀)` and carries an analytic bound for the
//! discarded terms. [`solve_fixed_point`] iterates the contraction map on a
//! collocation grid, where the partial-panel integrand is interpolated from the
//! panel nodes. Both refuse horizons outside the contraction window.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::field::{
    Accumulator, FrequencyField, Lattice, LebesgueExponent, PhasePair, ProductMethod, Truncation,
};
use crate::propagator::{duhamel, linear_evolve, DispersionKind, DuhamelPrefix, LinearSolution};
use crate::time::{chebyshev_times, GaussLegendre, TimeField, TimeGrid, SAMPLE_COUNT};
use crate::trees::{growth_rate, NodeId, PicardEvaluator};

/// Contraction factor imposed on the local theory.
pub const THETA: f64 = 0.5;

/// The equation `∂_t²u + m(∇)²u = u^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Equation {
    pub power: usize,
    pub dispersion: DispersionKind,
}

impl Equation {
    pub fn new(power: usize, dispersion: DispersionKind) -> Result<Self> {
        if power < 2 {
            return Err(invalid(format!("nonlinearity power {power} below 2")));
        }
        Ok(Self { power, dispersion })
    }

    pub fn wave(power: usize) -> Self {
        Self {
            power,
            dispersion: DispersionKind::Wave,
        }
    }

    /// Constant `C` of the window `C·T²·M^{k−1} ≤ θ`. It covers both the tree
    /// sum (`γ_k/2`, from the count bound and the Duhamel constant `1/2`) and the
    /// contraction of `Γ` on the ball of radius `2M` (`k·2^{k−2}`).
    pub fn window_constant(&self) -> f64 {
        let k = self.power as f64;
        (growth_rate(self.power) / 2.0).max(k * 2f64.powf(k - 2.0))
    }

    /// `ρ = γ_k T² M^{k−1}/2`, the ratio of the geometric bound
    /// `‖Ξ_j‖_{C_T FL¹} ≤ M ρ^j`.
    pub fn growth_ratio(&self, horizon: f64, data_bound: f64) -> f64 {
        growth_rate(self.power) / 2.0 * horizon * horizon * data_bound.powi(self.power as i32 - 1)
    }

    /// `C·T²·M^{k−1}` with the window constant.
    pub fn contraction_ratio(&self, horizon: f64, data_bound: f64) -> f64 {
        self.window_constant() * horizon * horizon * data_bound.powi(self.power as i32 - 1)
    }

    /// `Σ_{j>J} M ρ^j = M ρ^{J+1}/(1−ρ)`, or `None` when the series bound diverges.
    pub fn tail_bound(&self, horizon: f64, data_bound: f64, order: usize) -> Option<f64> {
        let rho = self.growth_ratio(horizon, data_bound);
        (rho < 1.0).then(|| data_bound * rho.powi(order as i32 + 1) / (1.0 - rho))
    }

    /// Fails with [`Error::TimeTooLarge`] outside `C·T²·M^{k−1} ≤ θ`.
    pub fn check_window(&self, horizon: f64, data_bound: f64) -> Result<f64> {
        let ratio = self.contraction_ratio(horizon, data_bound);
        if ratio > THETA {
            return Err(Error::TimeTooLarge {
                horizon,
                ratio,
                limit: THETA,
            });
        }
        Ok(ratio)
    }
}

/// `sup_{0≤t≤T} ‖S(t)u₀‖_{FL¹} ≤ ‖û₀‖_{ℓ¹} + Σ |û₁(ξ)| min(T, 1/m(ξ))`.
///
/// This is the data size entering the window. It is at most
/// `max(1, T)·√2·‖u₀‖_{FL¹ × FL^{−1,1}}`.
pub fn linear_bound(u0: &PhasePair, horizon: f64, disp: DispersionKind) -> f64 {
    let vel: f64 = u0
        .vel
        .iter()
        .map(|(m, c)| {
            let w = disp.multiplier(m);
            let factor = if w == 0.0 {
                horizon
            } else {
                horizon.min(1.0 / w)
            };
            c.norm() * factor
        })
        .sum();
    u0.pos.norm_fourier_lebesgue(0.0, LebesgueExponent::One) + vel
}

/// The truncated series `U_J = Σ_{j ≤ J} Ξ_j(u₀)` on `[0, T]`.
#[derive(Debug)]
pub struct SeriesSolution {
    pub equation: Equation,
    pub order: usize,
    pub horizon: f64,
    /// `M` in the window condition; see [`linear_bound`].
    pub data_bound: f64,
    /// `C·T²·M^{k−1}`, at most [`THETA`].
    pub contraction: f64,
    /// Bound on `‖u − U_J‖_{C_T FL¹}`.
    pub tail_bound: f64,
    evaluator: PicardEvaluator,
    sum_node: NodeId,
    xi_nodes: Vec<NodeId>,
}

impl SeriesSolution {
    /// `Ξ_j(u₀)(t)` for `j ≤ J`.
    pub fn xi(&self, j: usize, t: f64) -> Result<FrequencyField> {
        let id = *self.xi_nodes.get(j).ok_or_else(|| {
            invalid(format!(
                "term {j} beyond the truncation order {}",
                self.order
            ))
        })?;
        self.evaluator.value(id, t)
    }

    /// `sup_t ‖Ξ_j(t)‖_{FL¹}` over the given times.
    pub fn term_sup_norm(&self, j: usize, times: &[f64]) -> Result<f64> {
        times
            .iter()
            .try_fold(0.0f64, |acc, &t| Ok(acc.max(self.xi(j, t)?.norm_fl1())))
    }

    /// The default Chebyshev sample set on `[0, T]`.
    pub fn sample_times(&self) -> Vec<f64> {
        chebyshev_times(self.horizon, SAMPLE_COUNT)
    }

    pub fn grid(&self) -> &TimeGrid {
        self.evaluator.grid()
    }
}

impl TimeField for SeriesSolution {
    fn lattice(&self) -> Lattice {
        self.evaluator.lattice()
    }

    fn at(&self, t: f64) -> Result<FrequencyField> {
        self.evaluator.value(self.sum_node, t)
    }
}

/// Sums the tree expansion up to order `J` on the grid's horizon.
pub fn solve_series(
    u0: &PhasePair,
    equation: Equation,
    order: usize,
    grid: &TimeGrid,
    truncation: Truncation,
) -> Result<SeriesSolution> {
    let horizon = grid.horizon();
    let data_bound = linear_bound(u0, horizon, equation.dispersion);
    let contraction = equation.check_window(horizon, data_bound)?;
    let tail_bound = equation
        .tail_bound(horizon, data_bound, order)
        .expect("inside the window the growth ratio is below one half");
    let mut evaluator = PicardEvaluator::new(
        u0.clone(),
        equation.power,
        *grid,
        equation.dispersion,
        truncation,
    )?;
    let xi_nodes = (0..=order).map(|j| evaluator.xi_node(j)).collect();
    let sum_node = evaluator.partial_sum_node(order);
    Ok(SeriesSolution {
        equation,
        order,
        horizon,
        data_bound,
        contraction,
        tail_bound,
        evaluator,
        sum_node,
        xi_nodes,
    })
}

/// Smallest `J ≥ 1` whose tail bound is below `10⁻³ ‖Ξ₁(u₀)(T)‖_{FL¹}`, capped
/// at `max_order`.
pub fn default_order(
    u0: &PhasePair,
    equation: Equation,
    grid: &TimeGrid,
    truncation: Truncation,
    max_order: usize,
) -> Result<usize> {
    let horizon = grid.horizon();
    let data_bound = linear_bound(u0, horizon, equation.dispersion);
    equation.check_window(horizon, data_bound)?;
    let mut ev = PicardEvaluator::new(
        u0.clone(),
        equation.power,
        *grid,
        equation.dispersion,
        truncation,
    )?;
    let xi1 = ev.xi(1, horizon)?.norm_fl1();
    for order in 1..=max_order {
        let tail = equation
            .tail_bound(horizon, data_bound, order)
            .unwrap_or(f64::INFINITY);
        if tail <= 1e-3 * xi1 {
            return Ok(order);
        }
    }
    Ok(max_order)
}

/// Settings for [`solve_fixed_point`].
#[derive(Clone, Copy, Debug)]
pub struct FixedPointOptions {
    pub panels: usize,
    pub nodes_per_panel: usize,
    /// Stop once `max_n ‖u_{m+1}(t_n) − u_m(t_n)‖_{FL¹} ≤ tol`.
    pub tol: f64,
    pub max_iterations: usize,
    /// Iterates of a finitely supported field leave any lattice, so the
    /// default is the Galerkin projection.
    pub truncation: Truncation,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            panels: 32,
            nodes_per_panel: 12,
            tol: 1e-12,
            max_iterations: 200,
            truncation: Truncation::Project,
        }
    }
}

/// Converged iterate of the contraction map, stored at the collocation nodes.
#[derive(Debug)]
pub struct FixedPointSolution {
    pub equation: Equation,
    pub iterations: usize,
    pub last_increment: f64,
    pub contraction: f64,
    data: PhasePair,
    grid: TimeGrid,
    truncation: Truncation,
    integrand: Vec<FrequencyField>,
    prefix: DuhamelPrefix,
    bary: Vec<f64>,
}

impl FixedPointSolution {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// `Γ[u](t)` for the stored iterate `u`.
    fn gamma(&self, t: f64) -> Result<FrequencyField> {
        let lin = linear_evolve(&self.data, t, self.equation.dispersion);
        let duh = collocation_duhamel(
            &self.grid,
            self.equation.dispersion,
            &self.prefix,
            &self.integrand,
            &self.bary,
            t,
        )?;
        lin.add(&duh)
    }
}

impl TimeField for FixedPointSolution {
    fn lattice(&self) -> Lattice {
        self.data.lattice()
    }

    fn at(&self, t: f64) -> Result<FrequencyField> {
        self.gamma(t)
    }
}

/// Barycentric weights of the Gauss–Legendre nodes on `[-1, 1]`.
fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    (0..nodes.len())
        .map(|i| {
            let prod: f64 = (0..nodes.len())
                .filter(|&j| j != i)
                .map(|j| nodes[i] - nodes[j])
                .product();
            1.0 / prod
        })
        .collect()
}

/// Lagrange basis values `ℓ_i(x)` at a point `x ∈ [-1, 1]`.
fn lagrange_basis(nodes: &[f64], bary: &[f64], x: f64) -> Vec<f64> {
    if let Some(i) = nodes.iter().position(|&n| n == x) {
        let mut out = vec![0.0; nodes.len()];
        out[i] = 1.0;
        return out;
    }
    let terms: Vec<f64> = nodes.iter().zip(bary).map(|(n, b)| b / (x - n)).collect();
    let denom: f64 = terms.iter().sum();
    terms.into_iter().map(|v| v / denom).collect()
}

/// Duhamel integral on `[0, t]`: prefix sums over complete panels plus a
/// Gauss–Legendre rule on the partial panel `[b_p, t]`, applied to the
/// degree-`q−1` interpolant of that panel's integrand values.
fn collocation_duhamel(
    grid: &TimeGrid,
    disp: DispersionKind,
    prefix: &DuhamelPrefix,
    integrand: &[FrequencyField],
    bary: &[f64],
    t: f64,
) -> Result<FrequencyField> {
    let (p, partial) = grid.split(t);
    let base = prefix.value(p, t)?;
    let Some((a, _)) = partial else {
        return Ok(base);
    };
    let b = grid.breakpoint(p + 1);
    let q = grid.nodes_per_panel();
    let rule = GaussLegendre::cached(q);
    let local = &integrand[p * q..(p + 1) * q];
    let mut acc = Accumulator::default();
    for (tau, w) in rule.mapped(a, t) {
        let x = (2.0 * tau - a - b) / (b - a);
        let basis = lagrange_basis(&rule.nodes, bary, x);
        for (f, l) in local.iter().zip(&basis) {
            let scale = w * l;
            for (m, v) in f.iter() {
                acc.add(*m, v * (scale * disp.sinc(m, t - tau)));
            }
        }
    }
    base.add(&acc.into_field(base.lattice()))
}

/// Iterates `Γ[u] = S(t)u₀ + I[u, …, u]` from `S(t)u₀` (or from `initial`).
pub fn solve_fixed_point(
    u0: &PhasePair,
    equation: Equation,
    horizon: f64,
    options: FixedPointOptions,
    initial: Option<&dyn TimeField>,
) -> Result<FixedPointSolution> {
    let grid = TimeGrid::new(horizon, options.panels, options.nodes_per_panel)?;
    let data_bound = linear_bound(u0, horizon, equation.dispersion);
    let contraction = equation.check_window(horizon, data_bound)?;
    let disp = equation.dispersion;
    let lattice = u0.lattice();
    let nodes = grid.global_rule();
    let q = grid.nodes_per_panel();
    let bary = barycentric_weights(&GaussLegendre::cached(q).nodes);
    let linear: Vec<FrequencyField> = nodes
        .iter()
        .map(|(t, _)| linear_evolve(u0, *t, disp))
        .collect();
    let mut current: Vec<FrequencyField> = match initial {
        Some(f) => nodes.iter().map(|(t, _)| f.at(*t)).collect::<Result<_>>()?,
        None => linear.clone(),
    };
    let power = |u: &FrequencyField| {
        u.pointwise_power(equation.power, ProductMethod::Direct, options.truncation)
    };
    let diverged = 1e6 * (1.0 + data_bound);
    let mut increment = f64::INFINITY;
    for iteration in 1..=options.max_iterations {
        let integrand: Vec<FrequencyField> = current.iter().map(power).collect::<Result<_>>()?;
        let prefix = DuhamelPrefix::new(grid, disp, lattice, &integrand)?;
        let mut next = Vec::with_capacity(nodes.len());
        for (n, &(t, _)) in nodes.iter().enumerate() {
            let duh = collocation_duhamel(&grid, disp, &prefix, &integrand, &bary, t)?;
            next.push(linear[n].add(&duh)?);
        }
        increment = next
            .iter()
            .zip(&current)
            .map(|(a, b)| a.sub(b).map(|d| d.norm_fl1()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        current = next;
        if !increment.is_finite() || increment > diverged {
            return Err(Error::NoContraction {
                iterations: iteration,
                increment,
            });
        }
        if increment <= options.tol {
            let integrand: Vec<FrequencyField> =
                current.iter().map(power).collect::<Result<_>>()?;
            let prefix = DuhamelPrefix::new(grid, disp, lattice, &integrand)?;
            return Ok(FixedPointSolution {
                equation,
                iterations: iteration,
                last_increment: increment,
                contraction,
                data: u0.clone(),
                grid,
                truncation: options.truncation,
                integrand,
                prefix,
                bary,
            });
        }
    }
    Err(Error::NoContraction {
        iterations: options.max_iterations,
        increment,
    })
}

impl FixedPointSolution {
    pub fn truncation(&self) -> Truncation {
        self.truncation
    }
}

/// `sup_t ‖u(t) − Γ[u](t)‖_{FL¹}` over `times`, with `Γ` evaluated by the
/// composite rule of `grid`.
pub fn residual(
    u: &dyn TimeField,
    u0: &PhasePair,
    equation: Equation,
    grid: &TimeGrid,
    truncation: Truncation,
    times: &[f64],
) -> Result<f64> {
    let inputs: Vec<&dyn TimeField> = (0..equation.power).map(|_| u).collect();
    let mut worst = 0.0f64;
    for &t in times {
        let gamma = linear_evolve(u0, t, equation.dispersion).add(&duhamel(
            &inputs,
            t,
            grid,
            equation.dispersion,
            truncation,
        )?)?;
        worst = worst.max(u.at(t)?.sub(&gamma)?.norm_fl1());
    }
    Ok(worst)
}

/// `sup_t ‖u(t) − v(t)‖_{FL¹}` over `times`.
pub fn sup_distance(u: &dyn TimeField, v: &dyn TimeField, times: &[f64]) -> Result<f64> {
    times.iter().try_fold(0.0f64, |acc, &t| {
        Ok(acc.max(u.at(t)?.sub(&v.at(t)?)?.norm_fl1()))
    })
}

/// The free solution as a series of order zero; handy as an initial iterate.
pub fn free_solution(u0: &PhasePair, disp: DispersionKind) -> LinearSolution {
    LinearSolution::new(u0.clone(), disp)
}
