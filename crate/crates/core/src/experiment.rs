//! The norm-inflation data family, its parameter schedule, the six sufficient
//! conditions, and the end-to-end experiment.
//!
//! Data sit on four boxes of side `A` centred at `±N e₁` and `±2N e₁`. The
//! `k`-fold self-interaction of these boxes transfers energy to frequencies of
//! size `A`, which is where the `H^s` norm (`s < 0`) of the first Picard
//! iterate grows.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::field::{box_modes, mode_neg, FrequencyField, Lattice, Mode, PhasePair, Truncation};
use crate::propagator::{duhamel, DispersionKind, LinearSolution};
use crate::resonance::{
    probe_window, verify_lower_bound, xi1_grid, xi1_resonant_split, LowerBound, ResonanceReport,
    WindowPolicy,
};
use crate::series::{linear_bound, Equation};
use crate::time::{chebyshev_times, TimeField, TimeGrid};
use crate::trees::PicardEvaluator;

/// Box side fixed by the schedule in both cases.
pub const SCHEDULE_BOX_SIDE: i64 = 10;

/// Default "≪ / ≫" margin.
pub const DEFAULT_MARGIN: f64 = 10.0;

/// Which parameter regime to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum CaseSelector {
    /// Case 1 iff `−1/(k−1) ≤ s < 0`.
    #[default]
    Auto,
    Case1,
    Case2,
}

impl std::str::FromStr for CaseSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "1" => Ok(Self::Case1),
            "2" => Ok(Self::Case2),
            other => Err(invalid(format!("case must be auto, 1 or 2, not {other:?}"))),
        }
    }
}

/// `(d, k, s, n, δ, N, A, R, T)` plus the case that produced them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InflationParams {
    pub d: usize,
    pub k: usize,
    pub s: f64,
    pub n: u64,
    pub delta: f64,
    #[serde(rename = "N")]
    pub big_n: i64,
    #[serde(rename = "A")]
    pub a: i64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub case: u8,
}

impl InflationParams {
    /// `A ≤ N/8`, the separation under which nonresonant phases are of size `N`.
    pub fn well_separated(&self) -> bool {
        8 * self.a <= self.big_n
    }

    /// `Σ = {±N e₁, ±2N e₁}`.
    pub fn sigma(&self) -> Vec<Mode> {
        let n = self.big_n;
        vec![[-2 * n, 0, 0], [-n, 0, 0], [n, 0, 0], [2 * n, 0, 0]]
    }

    /// `k(2N + A)`, the cutoff needed for `k`-fold products of the data.
    pub fn required_cutoff(&self) -> i64 {
        self.k as i64 * (2 * self.big_n + self.a)
    }

    pub fn equation(&self, dispersion: DispersionKind) -> Equation {
        Equation {
            power: self.k,
            dispersion,
        }
    }
}

/// `Case 1` iff `−1/(k−1) ≤ s < 0`.
pub fn resolve_case(k: usize, s: f64, selector: CaseSelector) -> u8 {
    match selector {
        CaseSelector::Case1 => 1,
        CaseSelector::Case2 => 2,
        CaseSelector::Auto => {
            if s >= -1.0 / (k as f64 - 1.0) {
                1
            } else {
                2
            }
        }
    }
}

/// Parameters for frequency scale `N`.
///
/// Case 1: `A = 10`, `R = N^{−s−δ}`, `T = N^{(k−1)/2·(s+δ/2)}`, needing
/// `−s > (k+1)δ/2`. Case 2: `A = 10`, `R = N^{1/(k−1)−δ}`,
/// `T = N^{−1/2+(k−1)δ/4}`, needing `0 < δ < 2/(k²−1)`.
pub fn schedule_params(
    d: usize,
    k: usize,
    s: f64,
    n: u64,
    delta: f64,
    big_n: i64,
    selector: CaseSelector,
) -> Result<InflationParams> {
    if !(1..=3).contains(&d) {
        return Err(invalid(format!("dimension {d} not in 1..=3")));
    }
    if k < 2 {
        return Err(invalid(format!("power {k} below 2")));
    }
    if !(s < 0.0) {
        return Err(invalid(format!("regularity {s} must be negative")));
    }
    if big_n < 2 || big_n % 2 != 0 {
        return Err(invalid(format!(
            "frequency scale {big_n} must be an even integer ≥ 2"
        )));
    }
    if big_n <= SCHEDULE_BOX_SIDE {
        return Err(invalid(format!(
            "frequency scale {big_n} does not exceed the box side {SCHEDULE_BOX_SIDE}"
        )));
    }
    let case = resolve_case(k, s, selector);
    let kf = k as f64;
    let nf = big_n as f64;
    let (r, t) = match case {
        1 => {
            if !(delta > 0.0 && -s > (kf + 1.0) * delta / 2.0) {
                return Err(Error::BadDelta {
                    delta,
                    case,
                    constraint: format!(
                        "need 0 < δ and −s > (k+1)δ/2 = {}",
                        (kf + 1.0) * delta / 2.0
                    ),
                });
            }
            (
                nf.powf(-s - delta),
                nf.powf((kf - 1.0) / 2.0 * (s + delta / 2.0)),
            )
        }
        _ => {
            let upper = 2.0 / (kf * kf - 1.0);
            if !(delta > 0.0 && delta < upper) {
                return Err(Error::BadDelta {
                    delta,
                    case,
                    constraint: format!("need 0 < δ < 2/(k²−1) = {upper}"),
                });
            }
            (
                nf.powf(1.0 / (kf - 1.0) - delta),
                nf.powf(-0.5 + (kf - 1.0) * delta / 4.0),
            )
        }
    };
    Ok(InflationParams {
        d,
        k,
        s,
        n,
        delta,
        big_n,
        a: SCHEDULE_BOX_SIDE,
        r,
        t,
        case,
    })
}

/// `H^s` mass factor of a box of side `A` at the origin: `1` for `s < −d/2`,
/// `(log A)^{1/2}` at `s = −d/2` (within `1e−12`), `A^{d/2+s}` above.
pub fn f_s(a: f64, s: f64, d: usize) -> f64 {
    let edge = -(d as f64) / 2.0;
    if (s - edge).abs() <= 1e-12 {
        a.ln().sqrt()
    } else if s < edge {
        1.0
    } else {
        a.powf(d as f64 / 2.0 + s)
    }
}

/// `(s_scaling, s_conf, s_crit)` with `s_scaling = d/2 − 2/(k−1)`,
/// `s_conf = (d+1)/4 − 1/(k−1)` and `s_crit = min(s_scaling, s_conf, 0)`.
pub fn critical_regularity(d: usize, k: usize) -> (f64, f64, f64) {
    let df = d as f64;
    let kf = k as f64;
    let scaling = df / 2.0 - 2.0 / (kf - 1.0);
    let conf = (df + 1.0) / 4.0 - 1.0 / (kf - 1.0);
    (scaling, conf, scaling.min(conf).min(0.0))
}

/// Lattice points of `Ω`: the boxes `η + Q_A` for `η = N e₁, 2N e₁` and their
/// mirror images, so that `Ω = −Ω` and the data are real.
pub fn omega_modes(p: &InflationParams) -> Result<Vec<Mode>> {
    let mut out = Vec::new();
    for eta in [p.big_n, 2 * p.big_n] {
        let center = [eta as f64, 0.0, 0.0];
        let boxed = box_modes(p.d, center, p.a as f64)?;
        out.extend(boxed.iter().map(mode_neg));
        out.extend(boxed);
    }
    out.sort_unstable();
    Ok(out)
}

/// `φ̂ = R·χ_Ω`, zero velocity.
pub fn build_inflation_data(p: &InflationParams, lattice: Lattice) -> Result<PhasePair> {
    if lattice.dim() != p.d {
        return Err(Error::LatticeMismatch);
    }
    if lattice.cutoff() < p.required_cutoff() {
        return Err(Error::CutoffViolation {
            required: p.required_cutoff(),
            available: lattice.cutoff(),
        });
    }
    if p.a < 1 || p.a >= p.big_n {
        return Err(invalid(format!(
            "box side {} must lie in [1, N) for N = {}",
            p.a, p.big_n
        )));
    }
    let r = Complex64::new(p.r, 0.0);
    let pos = FrequencyField::from_entries(lattice, omega_modes(p)?.into_iter().map(|m| (m, r)))?;
    PhasePair::new(pos, FrequencyField::zero(lattice))
}

/// Smooth background data: `â(ξ) = a·exp(−|ξ|²/(2w²))` on `|ξ|_∞ ≤ radius`,
/// in both slots scaled by `(pos_amp, vel_amp)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianPreset {
    pub pos_amp: f64,
    pub vel_amp: f64,
    pub width: f64,
    pub radius: i64,
}

impl Default for GaussianPreset {
    fn default() -> Self {
        Self {
            pos_amp: 0.05,
            vel_amp: 0.05,
            width: 2.0,
            radius: 8,
        }
    }
}

impl GaussianPreset {
    pub fn build(&self, lattice: Lattice) -> Result<PhasePair> {
        if self.radius > lattice.cutoff() {
            return Err(Error::CutoffViolation {
                required: self.radius,
                available: lattice.cutoff(),
            });
        }
        let small = Lattice::new(lattice.dim(), self.radius.max(1))?;
        let profile = |amp: f64| {
            let f = FrequencyField::from_fn(small, |m| {
                let r2 = crate::field::mode_norm_sq(m) as f64;
                Complex64::new(amp * (-r2 / (2.0 * self.width * self.width)).exp(), 0.0)
            });
            f.relattice(lattice)
        };
        PhasePair::new(profile(self.pos_amp)?, profile(self.vel_amp)?)
    }
}

/// "≪ 1" or "≫ 1".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    MuchLess,
    MuchGreater,
}

/// One sufficient condition, possibly with several sub-ratios.
#[derive(Clone, Debug, Serialize)]
pub struct Condition {
    pub label: &'static str,
    pub statement: &'static str,
    pub relation: Relation,
    pub ratios: Vec<(String, f64)>,
    pub pass: bool,
}

impl Condition {
    fn new(
        label: &'static str,
        statement: &'static str,
        relation: Relation,
        ratios: Vec<(String, f64)>,
        margin: f64,
    ) -> Self {
        let pass = ratios.iter().all(|(_, r)| match relation {
            Relation::MuchLess => *r <= 1.0 / margin,
            Relation::MuchGreater => *r >= margin,
        });
        Self {
            label,
            statement,
            relation,
            ratios,
            pass,
        }
    }

    /// The sub-ratio furthest from passing.
    pub fn worst(&self) -> f64 {
        let it = self.ratios.iter().map(|(_, r)| *r);
        match self.relation {
            Relation::MuchLess => it.fold(f64::NEG_INFINITY, f64::max),
            Relation::MuchGreater => it.fold(f64::INFINITY, f64::min),
        }
    }
}

/// Conditions (i)–(vi) at one parameter point.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    pub margin: f64,
    pub conditions: Vec<Condition>,
    pub pass: bool,
}

/// `T²R^{k−1}A^{d(k−1)}`; conditions (ii) and (iv) both reduce to it.
fn local_ratio(p: &InflationParams) -> f64 {
    let km1 = p.k as f64 - 1.0;
    p.t * p.t * p.r.powf(km1) * (p.a as f64).powf(p.d as f64 * km1)
}

/// `T²R^kA^{d(k−1)}f_s(A)`, the size of the first iterate at low frequency.
pub fn lower_bound_scale(p: &InflationParams) -> f64 {
    let km1 = p.k as f64 - 1.0;
    p.t * p.t
        * p.r.powi(p.k as i32)
        * (p.a as f64).powf(p.d as f64 * km1)
        * f_s(p.a as f64, p.s, p.d)
}

/// `RA^{d/2}N^s`, the size of the data perturbation in `H^s`.
pub fn data_scale(p: &InflationParams) -> f64 {
    p.r * (p.a as f64).powf(p.d as f64 / 2.0) * (p.big_n as f64).powf(p.s)
}

pub fn check_conditions(p: &InflationParams, u0: &PhasePair, margin: f64) -> ConditionReport {
    use Relation::*;
    let n = p.n as f64;
    let a = p.a as f64;
    let rf = p.r * f_s(a, p.s, p.d);
    let local = local_ratio(p);
    let conditions = vec![
        Condition::new(
            "(i)",
            "R A^{d/2} N^s << 1/n",
            MuchLess,
            vec![("n R A^{d/2} N^s".into(), n * data_scale(p))],
            margin,
        ),
        Condition::new(
            "(ii)",
            "T^2 R^{k-1} A^{d(k-1)} << 1",
            MuchLess,
            vec![("T^2 R^{k-1} A^{d(k-1)}".into(), local)],
            margin,
        ),
        Condition::new(
            "(iii)",
            "T^2 R^k A^{d(k-1)} f_s(A) >> n",
            MuchGreater,
            vec![(
                "T^2 R^k A^{d(k-1)} f_s(A) / n".into(),
                lower_bound_scale(p) / n,
            )],
            margin,
        ),
        Condition::new(
            "(iv)",
            "T^2 R^k A^{d(k-1)} f_s(A) >> T^4 R^{2k-1} A^{2d(k-1)} f_s(A)",
            MuchLess,
            vec![("second over first".into(), local_ratio(p))],
            margin,
        ),
        Condition::new(
            "(v)",
            "(AN)^{-1/2} << T << min(1/A, 1/n)",
            MuchLess,
            vec![
                (
                    "(AN)^{-1/2} / T".into(),
                    (a * p.big_n as f64).powf(-0.5) / p.t,
                ),
                ("T A".into(), p.t * a),
                ("T n".into(), p.t * n),
            ],
            margin,
        ),
        Condition::new(
            "(vi)",
            "|u0|_{H^0} << R f_s(A), A << N, |u0|_{FL} << R A^d",
            MuchLess,
            vec![
                ("|u0|_{H^0} / (R f_s(A))".into(), u0.norm(0.0) / rf),
                ("A / N".into(), a / p.big_n as f64),
                (
                    "|u0|_{FL} / (R A^d)".into(),
                    u0.norm_fl() / (p.r * a.powi(p.d as i32)),
                ),
            ],
            margin,
        ),
    ];
    let pass = conditions.iter().all(|c| c.pass);
    ConditionReport {
        margin,
        conditions,
        pass,
    }
}

/// Doubles `N` from `start` until the conditions pass or `N` exceeds `max_n`.
/// Returns the last point tried in either case.
pub fn find_inflation_scale(
    d: usize,
    k: usize,
    s: f64,
    n: u64,
    delta: f64,
    selector: CaseSelector,
    u0: &PhasePair,
    margin: f64,
    start: i64,
    max_n: i64,
) -> Result<(InflationParams, ConditionReport)> {
    let mut big_n = start;
    loop {
        let p = schedule_params(d, k, s, n, delta, big_n, selector)?;
        let report = check_conditions(&p, u0, margin);
        if report.pass || big_n * 2 > max_n {
            return Ok((p, report));
        }
        big_n *= 2;
    }
}

/// `2^k − 1` multilinear terms making up `Ξ₁(u₀ + φ) − Ξ₁(φ)`.
pub fn cross_term(
    u0: &PhasePair,
    phi: &PhasePair,
    k: usize,
    t: f64,
    grid: &TimeGrid,
    disp: DispersionKind,
    truncation: Truncation,
) -> Result<(FrequencyField, usize)> {
    let lu = LinearSolution::new(u0.clone(), disp);
    let lp = LinearSolution::new(phi.clone(), disp);
    let mut total = FrequencyField::zero(u0.lattice());
    let mut terms = 0;
    for mask in 0..(1usize << k) - 1 {
        let inputs: Vec<&dyn TimeField> = (0..k)
            .map(|slot| {
                if mask >> slot & 1 == 1 {
                    &lp as &dyn TimeField
                } else {
                    &lu as &dyn TimeField
                }
            })
            .collect();
        total = total.add(&duhamel(&inputs, t, grid, disp, truncation)?)?;
        terms += 1;
    }
    Ok((total, terms))
}

/// Options of one experiment run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunOptions {
    /// Highest Picard order evaluated explicitly.
    pub order: usize,
    pub dispersion: DispersionKind,
    pub nodes_per_panel: usize,
    pub samples: usize,
    pub margin: f64,
    /// Requested data cutoff; the working lattice is enlarged to hold the
    /// supports of all evaluated terms.
    pub cutoff: Option<i64>,
    pub background: Option<GaussianPreset>,
    pub window_policy: WindowPolicy,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            order: 2,
            dispersion: DispersionKind::Wave,
            nodes_per_panel: 8,
            samples: 9,
            margin: DEFAULT_MARGIN,
            cutoff: None,
            background: Some(GaussianPreset::default()),
            window_policy: WindowPolicy::Report,
        }
    }
}

/// One `(t, ‖u_n(t)‖_{H^s})` sample.
#[derive(Clone, Debug, Serialize)]
pub struct TimeSample {
    pub t: f64,
    pub sobolev: f64,
    pub fl1: f64,
}

/// Everything measured for one parameter point.
#[derive(Clone, Debug, Serialize)]
pub struct NormReport {
    pub params: InflationParams,
    pub dispersion: DispersionKind,
    pub cutoff: i64,
    pub grid_panels: usize,
    pub grid_nodes_per_panel: usize,
    pub order: usize,
    /// `‖u_{0,n} − u₀‖_{H^s × H^{s−1}} = ‖φ_n‖`.
    pub data_distance: f64,
    /// `R A^{d/2} N^s`.
    pub data_scale: f64,
    /// `‖Ξ₀(u_{0,n})(T)‖_{H^s}`.
    pub xi0_norm: f64,
    /// `‖Ξ₁(φ_n)(T)‖_{H^s}`.
    pub xi1_phi_norm: f64,
    /// `‖Ξ₁(u_{0,n})(T) − Ξ₁(φ_n)(T)‖_{H^s}`.
    pub cross_term_norm: f64,
    pub cross_term_count: usize,
    /// `‖Ξ_j(u_{0,n})(T)‖_{H^s}` for `j ≤ order`.
    pub xi_norms: Vec<f64>,
    /// `‖Σ_{2 ≤ j ≤ order} Ξ_j(u_{0,n})(T)‖_{H^s}`.
    pub tail_measured: f64,
    /// Bound on `Σ_{j > order} ‖Ξ_j‖_{FL¹} ≥ Σ_{j > order} ‖Ξ_j‖_{H^s}`; absent
    /// when the geometric series diverges.
    pub tail_remainder_bound: Option<f64>,
    /// `M` and `ρ = γ_k T² M^{k−1}/2` of the analytic bound.
    pub data_bound: f64,
    pub growth_ratio: f64,
    /// Whether `T` lies in the contraction window of the local theory.
    pub in_local_window: bool,
    pub solution_samples: Vec<TimeSample>,
    pub lower_bound: LowerBound,
    pub resonance: ResonanceReport,
    pub conditions: ConditionReport,
}

impl NormReport {
    /// `tail_measured + tail_remainder_bound`, infinite without a bound.
    pub fn tail(&self) -> f64 {
        self.tail_measured + self.tail_remainder_bound.unwrap_or(f64::INFINITY)
    }

    /// `‖Ξ₀‖ + ‖cross term‖ + tail`.
    pub fn remainder(&self) -> f64 {
        self.xi0_norm + self.cross_term_norm + self.tail()
    }
}

/// Runs one parameter point: builds `u_{0,n} = u₀ + φ_n` and measures every
/// term of the lower-bound chain at time `T`.
pub fn run_experiment(p: &InflationParams, options: &RunOptions) -> Result<NormReport> {
    let base_cutoff = options.cutoff.unwrap_or(p.required_cutoff());
    let data_lattice = Lattice::new(p.d, base_cutoff)?;
    let phi = build_inflation_data(p, data_lattice)?;
    let u0 = match &options.background {
        Some(g) => g.build(data_lattice)?,
        None => PhasePair::zero(data_lattice),
    };
    let u0n = u0.add(&phi)?;
    let reach = ((p.k - 1) * options.order.max(1) + 1) as i64 * u0n.radius();
    let lattice = Lattice::new(p.d, base_cutoff.max(reach))?;
    let phi = phi.relattice(lattice)?;
    let u0 = u0.relattice(lattice)?;
    let u0n = u0n.relattice(lattice)?;
    let disp = options.dispersion;
    let equation = p.equation(disp);

    let degree = (p.k - 1) * options.order.max(1) + 1;
    let grid = series_grid(&u0n, degree, p.t, disp, options.nodes_per_panel)?;
    let mut ev = PicardEvaluator::new(u0n.clone(), p.k, grid, disp, Truncation::Strict)?;
    let mut xi_norms = Vec::with_capacity(options.order + 1);
    let mut tail = FrequencyField::zero(lattice);
    for j in 0..=options.order {
        let v = ev.xi(j, p.t)?;
        xi_norms.push(v.norm_sobolev(p.s));
        if j >= 2 {
            tail = tail.add(&v)?;
        }
    }
    let data_bound = linear_bound(&u0n, p.t, disp);
    let growth_ratio = equation.growth_ratio(p.t, data_bound);
    let in_local_window = equation.check_window(p.t, data_bound).is_ok();

    let sum_node = ev.partial_sum_node(options.order);
    let mut solution_samples = Vec::with_capacity(options.samples);
    for t in chebyshev_times(p.t, options.samples) {
        let v = ev.value(sum_node, t)?;
        solution_samples.push(TimeSample {
            t,
            sobolev: v.norm_sobolev(p.s),
            fl1: v.norm_fl1(),
        });
    }

    let phi_grid = xi1_grid(&phi, p.k, p.t, disp, options.nodes_per_panel)?;
    let xi1_phi = crate::trees::xi_j(p.k, 1, &phi, p.t, &phi_grid, disp, Truncation::Strict)?;
    let (cross, cross_term_count) =
        cross_term(&u0, &phi, p.k, p.t, &grid, disp, Truncation::Strict)?;
    let resonance = xi1_resonant_split(&phi, p, &phi_grid, disp, options.window_policy)?;
    let lower_bound = verify_lower_bound(&xi1_phi, &probe_window(p)?, p);

    Ok(NormReport {
        params: p.clone(),
        dispersion: disp,
        cutoff: lattice.cutoff(),
        grid_panels: grid.panels(),
        grid_nodes_per_panel: grid.nodes_per_panel(),
        order: options.order,
        data_distance: phi.norm(p.s),
        data_scale: data_scale(p),
        xi0_norm: xi_norms[0],
        xi1_phi_norm: xi1_phi.norm_sobolev(p.s),
        cross_term_norm: cross.norm_sobolev(p.s),
        cross_term_count,
        tail_measured: tail.norm_sobolev(p.s),
        tail_remainder_bound: equation.tail_bound(p.t, data_bound, options.order),
        xi_norms,
        data_bound,
        growth_ratio,
        in_local_window,
        solution_samples,
        lower_bound,
        resonance,
        conditions: check_conditions(p, &u0, options.margin),
    })
}

/// Grid resolving terms of multilinear degree `degree` built from `data`.
pub fn series_grid(
    data: &PhasePair,
    degree: usize,
    horizon: f64,
    disp: DispersionKind,
    nodes: usize,
) -> Result<TimeGrid> {
    let top = data
        .pos
        .iter()
        .chain(data.vel.iter())
        .map(|(m, _)| disp.multiplier(m))
        .fold(0.0, f64::max);
    // integrand phases reach degree·top, the kernel adds as much again
    TimeGrid::resolving(horizon, 2.0 * degree as f64 * top, nodes)
}

/// Least-squares slope of `log₂ y` against `log₂ x`.
pub fn log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 || ys.iter().any(|y| !(*y > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.log2()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.log2()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Results of an `N`-sweep.
#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub reports: Vec<NormReport>,
    /// Slope of `log₂ ‖Ξ₁(φ_n)(T)‖_{H^s}` against `log₂ N`; needs three points.
    pub growth_exponent: Option<f64>,
    /// The exponent the schedule predicts.
    pub predicted_exponent: f64,
}

/// Predicted growth rate of `‖Ξ₁(φ_n)(T)‖_{H^s}` in `N`: `−s − (k+1)δ/2` in
/// case 1 and `1/(k−1) − (k+1)δ/2` in case 2.
pub fn predicted_exponent(k: usize, s: f64, delta: f64, case: u8) -> f64 {
    let kf = k as f64;
    match case {
        1 => -s - (kf + 1.0) * delta / 2.0,
        _ => 1.0 / (kf - 1.0) - (kf + 1.0) * delta / 2.0,
    }
}

/// Runs every `N` of the sweep (in parallel) and fits the growth exponent.
pub fn run_sweep(
    d: usize,
    k: usize,
    s: f64,
    n: u64,
    delta: f64,
    selector: CaseSelector,
    sweep: &[i64],
    options: &RunOptions,
) -> Result<SweepReport> {
    let params = sweep
        .iter()
        .map(|&big_n| schedule_params(d, k, s, n, delta, big_n, selector))
        .collect::<Result<Vec<_>>>()?;
    let reports = params
        .par_iter()
        .map(|p| run_experiment(p, options))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = reports.iter().map(|r| r.params.big_n as f64).collect();
    let ys: Vec<f64> = reports.iter().map(|r| r.xi1_phi_norm).collect();
    let growth_exponent = if reports.len() >= 3 {
        log_slope(&xs, &ys)
    } else {
        None
    };
    let case = resolve_case(k, s, selector);
    Ok(SweepReport {
        reports,
        growth_exponent,
        predicted_exponent: predicted_exponent(k, s, delta, case),
    })
}

pub const CSV_HEADER: &str = "N,T,phi_Hs,xi1_Hs,I1,I2sup,tail,exponent_so_far";

/// One CSV row per sweep point; the last column is the slope fitted to the
/// points up to and including that row (empty before three points).
pub fn csv_rows(sweep: &SweepReport) -> Vec<String> {
    let mut rows = Vec::with_capacity(sweep.reports.len());
    for (i, r) in sweep.reports.iter().enumerate() {
        let xs: Vec<f64> = sweep.reports[..=i]
            .iter()
            .map(|r| r.params.big_n as f64)
            .collect();
        let ys: Vec<f64> = sweep.reports[..=i].iter().map(|r| r.xi1_phi_norm).collect();
        let slope = if xs.len() >= 3 {
            log_slope(&xs, &ys)
        } else {
            None
        };
        rows.push(format!(
            "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{}",
            r.params.big_n,
            r.params.t,
            r.data_distance,
            r.xi1_phi_norm,
            r.resonance.i1_min,
            r.resonance.i2_sup,
            r.tail(),
            slope.map(|v| format!("{v:.17e}")).unwrap_or_default()
        ));
    }
    rows
}

/// Provenance block stored with every report.
#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub build_id: String,
    /// SHA-256 of the serialised inputs; identical inputs give identical ids.
    pub run_id: String,
}

/// Build id: `INFLATE_BUILD_ID` at compile time if set, else the crate version.
pub fn build_id() -> String {
    option_env!("INFLATE_BUILD_ID")
        .map(str::to_owned)
        .unwrap_or_else(|| format!("v{}", env!("CARGO_PKG_VERSION")))
}

pub fn provenance<T: Serialize>(inputs: &T) -> Provenance {
    let bytes = serde_json::to_vec(inputs).unwrap_or_default();
    let digest = Sha256::digest(&bytes);
    let run_id = digest.iter().map(|b| format!("{b:02x}")).collect();
    Provenance {
        tool: "inflate",
        version: env!("CARGO_PKG_VERSION"),
        build_id: build_id(),
        run_id,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn case_one_schedule() {
        let p = schedule_params(1, 2, -0.5, 1, 0.1, 256, CaseSelector::Auto).unwrap();
        assert_eq!(p.case, 1);
        assert_eq!(p.a, 10);
        assert_relative_eq!(p.r, 256f64.powf(0.4), max_relative = 1e-14);
        assert_relative_eq!(p.t, 256f64.powf(-0.225), max_relative = 1e-14);
    }

    #[test]
    fn case_two_schedule() {
        let p = schedule_params(1, 2, -2.0, 1, 0.1, 256, CaseSelector::Auto).unwrap();
        assert_eq!(p.case, 2);
        assert_relative_eq!(p.r, 256f64.powf(0.9), max_relative = 1e-14);
        assert_relative_eq!(p.t, 256f64.powf(-0.475), max_relative = 1e-14);
    }

    #[test]
    fn bad_delta() {
        assert!(matches!(
            schedule_params(1, 2, -0.5, 1, 0.5, 256, CaseSelector::Auto),
            Err(Error::BadDelta { case: 1, .. })
        ));
        assert!(matches!(
            schedule_params(1, 2, -2.0, 1, 0.7, 256, CaseSelector::Auto),
            Err(Error::BadDelta { case: 2, .. })
        ));
    }

    #[test]
    fn f_s_branches() {
        assert_eq!(f_s(10.0, -1.0, 1), 1.0);
        assert_relative_eq!(f_s(10.0, -0.5, 1), 10f64.ln().sqrt());
        assert_relative_eq!(f_s(10.0, -0.5 + 5e-13, 1), 10f64.ln().sqrt());
        assert_relative_eq!(f_s(10.0, -0.25, 1), 10f64.powf(0.25));
    }

    #[test]
    fn critical_values() {
        assert_eq!(critical_regularity(1, 2), (-1.5, -0.5, -1.5));
        assert_eq!(critical_regularity(3, 3), (0.5, 0.5, 0.0));
        assert_eq!(critical_regularity(2, 3), (0.0, 0.25, 0.0));
    }

    #[test]
    fn data_support_and_size() {
        let p = schedule_params(1, 2, -0.5, 1, 0.1, 128, CaseSelector::Auto).unwrap();
        let lat = Lattice::new(1, p.required_cutoff()).unwrap();
        let phi = build_inflation_data(&p, lat).unwrap();
        assert_eq!(phi.pos.len(), 40);
        assert!(phi.vel.is_empty());
        assert_relative_eq!(phi.norm_fl(), 4.0 * p.r * 10.0, max_relative = 1e-14);
        assert_eq!(phi.pos.hermitian_defect(), 0.0);
        let small = Lattice::new(1, p.required_cutoff() - 1).unwrap();
        assert!(matches!(
            build_inflation_data(&p, small),
            Err(Error::CutoffViolation { .. })
        ));
    }

    #[test]
    fn condition_four_equals_two() {
        let p = schedule_params(1, 2, -0.5, 2, 0.1, 1024, CaseSelector::Auto).unwrap();
        let lat = Lattice::new(1, 4).unwrap();
        let rep = check_conditions(&p, &PhasePair::zero(lat), 10.0);
        assert_eq!(
            rep.conditions[1].ratios[0].1.to_bits(),
            rep.conditions[3].ratios[0].1.to_bits()
        );
    }

    #[test]
    fn log_slope_of_power_law() {
        let xs = [64.0, 128.0, 256.0, 512.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(0.35)).collect();
        assert_relative_eq!(log_slope(&xs, &ys).unwrap(), 0.35, max_relative = 1e-12);
    }
}
