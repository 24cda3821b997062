//! Time discretisation: Gauss–Legendre panels on `[0, T]` and sample sets for
//! time-sup norms.
//!
//! Panel breakpoints are global (`b_p = T·p/P`), so the quadrature rule on any
//! sub-interval `[0, t]` consists of the full panels left of `t` plus one mapped
//! partial panel. Nested Duhamel integrals reuse values at the global nodes.

use std::sync::OnceLock;

use crate::error::{invalid, Result};
use crate::field::{FrequencyField, Lattice};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule from Newton iteration on `P_n`, started at the Chebyshev
    /// approximation to each root.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Cached rules for small orders.
    pub fn cached(n: usize) -> &'static GaussLegendre {
        static CACHE: OnceLock<Vec<GaussLegendre>> = OnceLock::new();
        let table = CACHE.get_or_init(|| (0..=64).map(|q| GaussLegendre::new(q.max(1))).collect());
        assert!(n <= 64, "Gauss-Legendre order {n} above the cached range");
        &table[n]
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre grid on `[0, T]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    panels: usize,
    nodes_per_panel: usize,
}

/// Quadrature points of one interval as `(time, weight)` pairs.
pub type Rule = Vec<(f64, f64)>;

impl TimeGrid {
    pub const DEFAULT_PANELS: usize = 8;
    pub const DEFAULT_NODES: usize = 4;

    pub fn new(horizon: f64, panels: usize, nodes_per_panel: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(invalid(format!("time horizon {horizon} must be positive")));
        }
        if panels == 0 || !(1..=64).contains(&nodes_per_panel) {
            return Err(invalid(
                "grid needs at least one panel and 1..=64 nodes per panel",
            ));
        }
        Ok(Self {
            horizon,
            panels,
            nodes_per_panel,
        })
    }

    /// The default 8 panels × 4 nodes.
    pub fn with_default(horizon: f64) -> Result<Self> {
        Self::new(horizon, Self::DEFAULT_PANELS, Self::DEFAULT_NODES)
    }

    /// Grid resolving oscillations of angular frequency up to `omega`: each
    /// panel spans at most `q/2` radians of phase for a `q`-node rule, which
    /// keeps the per-panel error near `(q/4)^{2q}/(2q)!`.
    pub fn resolving(horizon: f64, omega: f64, nodes_per_panel: usize) -> Result<Self> {
        let per_panel = nodes_per_panel.max(1) as f64 / 2.0;
        let panels = ((omega * horizon / per_panel).ceil() as usize).max(Self::DEFAULT_PANELS);
        Self::new(horizon, panels, nodes_per_panel)
    }

    /// Same horizon with twice the panels.
    pub fn refined(&self) -> Self {
        Self {
            panels: self.panels * 2,
            ..*self
        }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn nodes_per_panel(&self) -> usize {
        self.nodes_per_panel
    }

    pub fn breakpoint(&self, p: usize) -> f64 {
        if p >= self.panels {
            self.horizon
        } else {
            self.horizon * p as f64 / self.panels as f64
        }
    }

    /// Splits `[0, t]` into the number of complete panels and the remaining
    /// partial interval, if any.
    pub fn split(&self, t: f64) -> (usize, Option<(f64, f64)>) {
        if t <= 0.0 {
            return (0, None);
        }
        let mut full = ((t / self.horizon) * self.panels as f64).floor() as usize;
        full = full.min(self.panels);
        while full > 0 && self.breakpoint(full) > t {
            full -= 1;
        }
        while full < self.panels && self.breakpoint(full + 1) <= t {
            full += 1;
        }
        let a = self.breakpoint(full);
        if t > a {
            (full, Some((a, t)))
        } else {
            (full, None)
        }
    }

    /// Rule for panel `p`.
    pub fn panel_rule(&self, p: usize) -> Rule {
        GaussLegendre::cached(self.nodes_per_panel)
            .mapped(self.breakpoint(p), self.breakpoint(p + 1))
            .collect()
    }

    /// All global nodes, panel by panel.
    pub fn global_rule(&self) -> Rule {
        (0..self.panels).flat_map(|p| self.panel_rule(p)).collect()
    }

    /// Composite rule on `[0, t]`.
    pub fn rule(&self, t: f64) -> Rule {
        let (full, partial) = self.split(t);
        let mut out: Rule = (0..full).flat_map(|p| self.panel_rule(p)).collect();
        if let Some((a, b)) = partial {
            out.extend(GaussLegendre::cached(self.nodes_per_panel).mapped(a, b));
        }
        out
    }
}

/// A field that can be evaluated at any time in its horizon.
pub trait TimeField: Sync {
    fn lattice(&self) -> Lattice;
    fn at(&self, t: f64) -> Result<FrequencyField>;
}

/// A field constant in time.
#[derive(Clone, Debug)]
pub struct Stationary(pub FrequencyField);

impl TimeField for Stationary {
    fn lattice(&self) -> Lattice {
        self.0.lattice()
    }

    fn at(&self, _t: f64) -> Result<FrequencyField> {
        Ok(self.0.clone())
    }
}

/// Default number of sample times for time-sup norms.
pub const SAMPLE_COUNT: usize = 33;

/// Chebyshev–Lobatto points `T/2·(1 − cos(iπ/(n−1)))`, both endpoints included.
pub fn chebyshev_times(horizon: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![horizon],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    horizon
                } else {
                    0.5 * horizon * (1.0 - (std::f64::consts::PI * i as f64 / (n - 1) as f64).cos())
                }
            })
            .collect(),
    }
}

/// `sup_t ‖f(t)‖_{FL¹}` over the given sample times.
pub fn sup_fl1(field: &dyn TimeField, times: &[f64]) -> Result<f64> {
    let mut best = 0.0f64;
    for &t in times {
        best = best.max(field.at(t)?.norm_fl1());
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in 1..=12 {
            let rule = GaussLegendre::new(n);
            assert_relative_eq!(rule.weights.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
            for deg in 0..(2 * n) {
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                let got: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(x, w)| w * x.powi(deg as i32))
                    .sum();
                assert!(
                    (got - exact).abs() < 1e-13,
                    "n={n} deg={deg}: {got} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn known_two_point_rule() {
        let rule = GaussLegendre::new(2);
        assert_relative_eq!(rule.nodes[1], 1.0 / 3f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(rule.weights[0], 1.0, max_relative = 1e-15);
    }

    #[test]
    fn split_respects_global_breakpoints() {
        let g = TimeGrid::new(1.0, 4, 3).unwrap();
        assert_eq!(g.split(0.0), (0, None));
        assert_eq!(g.split(0.5), (2, None));
        assert_eq!(g.split(1.0), (4, None));
        let (full, part) = g.split(0.6);
        assert_eq!(full, 2);
        let (a, b) = part.unwrap();
        assert_eq!(a, 0.5);
        assert_eq!(b, 0.6);
    }

    #[test]
    fn rule_integrates_on_subintervals() {
        let g = TimeGrid::with_default(0.9).unwrap();
        for &t in &[0.05, 0.3, 0.61, 0.9] {
            let got: f64 = g.rule(t).iter().map(|(x, w)| w * x.sin()).sum();
            assert_relative_eq!(got, 1.0 - t.cos(), max_relative = 1e-13);
        }
    }

    #[test]
    fn chebyshev_samples_cover_interval() {
        let ts = chebyshev_times(2.0, SAMPLE_COUNT);
        assert_eq!(ts.len(), 33);
        assert_eq!(ts[0], 0.0);
        assert_eq!(ts[32], 2.0);
        assert!(ts.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(0.0, 4, 4).is_err());
        assert!(TimeGrid::new(1.0, 0, 4).is_err());
        assert_eq!(TimeGrid::resolving(1.0, 100.0, 8).unwrap().panels(), 25);
        assert_eq!(TimeGrid::with_default(1.0).unwrap().refined().panels(), 16);
    }
}
