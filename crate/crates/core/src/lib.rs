//! Spectral norm-inflation experiments for the semilinear wave equation
//! `∂_t²u − Δu = u^k` on the torus `T^d`.
//!
//! Fields live on a truncated Fourier lattice ([`field`]). The linear flow and
//! the Duhamel operator act mode by mode ([`propagator`]), with time integrals
//! done by composite Gauss–Legendre quadrature ([`time`]). Solutions are built
//! as power series indexed by `k`-ary trees ([`trees`], [`series`]), and the
//! high-to-low frequency transfer behind norm inflation is measured by
//! [`experiment`] and [`resonance`].

// `!(x >= y)` guards deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod error;
pub mod experiment;
pub mod field;
pub mod io;
pub mod propagator;
pub mod resonance;
pub mod series;
pub mod time;
pub mod trees;

pub use error::{Error, Result};
pub use experiment::{
    check_conditions, run_experiment, run_sweep, schedule_params, CaseSelector, ConditionReport,
    InflationParams, NormReport, RunOptions, SweepReport,
};
pub use field::{
    FrequencyField, Lattice, LebesgueExponent, Mode, PhasePair, ProductMethod, Truncation,
};
pub use propagator::{duhamel, linear_evolve, linear_evolve_pair, DispersionKind, LinearSolution};
pub use resonance::{xi1_exact, xi1_resonant_split, ResonanceReport, SignSplit, WindowPolicy};
pub use series::{solve_fixed_point, solve_series, Equation, FixedPointOptions, SeriesSolution};
pub use time::{chebyshev_times, TimeField, TimeGrid};
pub use trees::{enumerate_trees, evaluate_psi, fuss_catalan, xi_j, KTree, PicardEvaluator};
