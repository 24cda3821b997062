//! Cross-checks against independent references: brute-force enumeration,
//! closed forms, and the exponential nested-quadrature evaluator.

use approx::assert_relative_eq;
use inflate_core::experiment::{
    build_inflation_data, cross_term, run_experiment, schedule_params, CaseSelector,
    GaussianPreset, InflationParams, RunOptions,
};
use inflate_core::field::{box_modes, FrequencyField, Lattice, Mode, PhasePair, Truncation};
use inflate_core::propagator::{duhamel, DispersionKind, LinearSolution};
use inflate_core::resonance::{
    probe_window, xi1_exact, xi1_grid, xi1_resonant_split, WindowPolicy,
};
use inflate_core::time::{Stationary, TimeField, TimeGrid};
use inflate_core::trees::{enumerate_trees, evaluate_psi_naive, xi_j, PicardEvaluator};
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn small_data() -> PhasePair {
    let lat = Lattice::new(1, 40).unwrap();
    let pos = FrequencyField::from_entries(
        lat,
        vec![
            ([-2, 0, 0], c(0.3, -0.1)),
            ([0, 0, 0], c(0.5, 0.0)),
            ([2, 0, 0], c(0.3, 0.1)),
        ],
    )
    .unwrap();
    let vel = FrequencyField::from_entries(
        lat,
        vec![([-1, 0, 0], c(0.2, 0.0)), ([1, 0, 0], c(0.2, 0.0))],
    )
    .unwrap();
    PhasePair::new(pos, vel).unwrap()
}

fn max_diff(a: &FrequencyField, b: &FrequencyField) -> f64 {
    a.sub(b).unwrap().norm_sup()
}

#[test]
fn evaluator_matches_nested_quadrature() {
    let phi = small_data();
    let t = 0.7;
    for disp in [DispersionKind::Wave, DispersionKind::KleinGordon] {
        let grid = TimeGrid::new(t, 3, 4).unwrap();
        for (k, j_max) in [(2, 3), (3, 2)] {
            let mut ev =
                PicardEvaluator::new(phi.clone(), k, grid, disp, Truncation::Strict).unwrap();
            for j in 0..=j_max {
                for tree in enumerate_trees(k, j).unwrap() {
                    let fast = ev.psi(&tree, t).unwrap();
                    let slow =
                        evaluate_psi_naive(tree.root(), &phi, t, &grid, disp, Truncation::Strict)
                            .unwrap();
                    let scale = slow.norm_sup().max(1e-300);
                    assert!(
                        max_diff(&fast, &slow) <= 1e-12 * scale,
                        "tree {tree} k={k} {disp:?}"
                    );
                }
            }
        }
    }
}

#[test]
fn xi_equals_sum_over_trees() {
    let phi = small_data();
    let grid = TimeGrid::new(0.6, 4, 6).unwrap();
    for (k, j_max) in [(2, 4), (3, 3)] {
        let mut ev = PicardEvaluator::new(
            phi.clone(),
            k,
            grid,
            DispersionKind::Wave,
            Truncation::Strict,
        )
        .unwrap();
        for j in 0..=j_max {
            for &t in &[0.6, 0.37] {
                let mut sum = FrequencyField::zero(phi.lattice());
                for tree in enumerate_trees(k, j).unwrap() {
                    sum = sum.add(&ev.psi(&tree, t).unwrap()).unwrap();
                }
                let xi = ev.xi(j, t).unwrap();
                assert!(
                    max_diff(&xi, &sum) <= 1e-13 * sum.norm_sup().max(1.0),
                    "k={k} j={j} t={t}"
                );
            }
        }
    }
}

#[test]
fn duhamel_of_constants_is_half_t_squared() {
    let lat = Lattice::new(1, 2).unwrap();
    let one = Stationary(FrequencyField::single_mode(lat, [0; 3], c(1.0, 0.0)).unwrap());
    let grid = TimeGrid::with_default(2.0).unwrap();
    for &t in &[0.3, 1.1, 2.0] {
        let v = duhamel(
            &[&one, &one],
            t,
            &grid,
            DispersionKind::Wave,
            Truncation::Strict,
        )
        .unwrap();
        assert_relative_eq!(v.get(&[0; 3]).re, t * t / 2.0, max_relative = 1e-13);
        // Klein-Gordon zero mode: ∫ sin(t−τ) dτ = 1 − cos t
        let kg = duhamel(
            &[&one, &one],
            t,
            &grid,
            DispersionKind::KleinGordon,
            Truncation::Strict,
        )
        .unwrap();
        assert_relative_eq!(kg.get(&[0; 3]).re, 1.0 - t.cos(), max_relative = 1e-12);
    }
}

#[test]
fn box_convolution_is_a_tent() {
    for d in 1..=2usize {
        for side in [3i64, 4] {
            let modes = box_modes(d, [0.0; 3], side as f64).unwrap();
            let lat = Lattice::new(d, 2 * side).unwrap();
            let chi =
                FrequencyField::from_entries(lat, modes.iter().map(|m| (*m, c(1.0, 0.0)))).unwrap();
            let conv = chi.multiply(&chi, Truncation::Strict).unwrap();
            let mut brute = std::collections::HashMap::<Mode, f64>::new();
            for a in &modes {
                for b in &modes {
                    *brute.entry([a[0] + b[0], a[1] + b[1], 0]).or_default() += 1.0;
                }
            }
            assert_eq!(conv.len(), brute.len());
            for (m, v) in conv.iter() {
                assert_eq!(v.re, brute[m]);
            }
            assert_eq!(conv.norm_sup(), (side as f64).powi(d as i32));
            let conv_fl1: f64 = conv.norm_fl1();
            assert_eq!(conv_fl1, (side as f64).powi(2 * d as i32));
        }
    }
}

fn params(k: usize, big_n: i64, a: i64, t: f64) -> InflationParams {
    InflationParams {
        d: 1,
        k,
        s: -0.5,
        n: 1,
        delta: 0.1,
        big_n,
        a,
        r: 1.0,
        t,
        case: 1,
    }
}

#[test]
fn direct_first_iterate_matches_tree_evaluator() {
    let p = params(2, 64, 4, 0.2);
    let lat = Lattice::new(1, p.required_cutoff()).unwrap();
    let phi = build_inflation_data(&p, lat).unwrap();
    let grid = xi1_grid(&phi, 2, p.t, DispersionKind::Wave, 8).unwrap();
    let exact = xi1_exact(&phi, 2, p.t, &grid, DispersionKind::Wave, None).unwrap();
    let tree = xi_j(
        2,
        1,
        &phi,
        p.t,
        &grid,
        DispersionKind::Wave,
        Truncation::Strict,
    )
    .unwrap();
    assert!(max_diff(&exact, &tree) <= 1e-10 * exact.norm_sup());
    // output support lies in the sumset Ω + Ω
    let omega = phi.pos.support();
    for (m, _) in exact.iter() {
        assert!(omega
            .iter()
            .any(|a| omega.binary_search(&[m[0] - a[0], 0, 0]).is_ok()));
    }
    let cut = phi
        .relattice(Lattice::new(1, 2 * p.big_n + p.a).unwrap())
        .unwrap();
    assert!(cut.lattice().cutoff() < p.required_cutoff());
    assert!(matches!(
        xi1_exact(&cut, 2, p.t, &grid, DispersionKind::Wave, None),
        Err(inflate_core::Error::CutoffViolation { .. })
    ));
}

#[test]
fn resonance_phase_bounds_hold_exhaustively() {
    for k in [2, 3] {
        for disp in [DispersionKind::Wave, DispersionKind::KleinGordon] {
            let a = 8;
            let p = params(k, 64, a, 1.0 / (4.0 * k as f64 * a as f64));
            let lat = Lattice::new(1, p.required_cutoff()).unwrap();
            let phi = build_inflation_data(&p, lat).unwrap();
            let grid = xi1_grid(&phi, k, p.t, disp, 8).unwrap();
            let rep = xi1_resonant_split(&phi, &p, &grid, disp, WindowPolicy::Report).unwrap();
            assert_eq!(rep.stray_tuples, 0);
            assert!(rep.resonant_phase_ok, "k={k}: {}", rep.resonant_phase_max);
            assert!(
                rep.nonresonant_phase_ok,
                "k={k}: [{}, {}]",
                rep.nonresonant_phase_min, rep.nonresonant_phase_max
            );
            assert!(rep.resonant_cos_ok);
            assert!(rep.kernel_ratio_min > 0.5);
            assert!(rep.i1_min > 0.0);
            assert!(!rep.in_window);
            assert!(matches!(
                xi1_resonant_split(&phi, &p, &grid, disp, WindowPolicy::Enforce),
                Err(inflate_core::Error::WindowViolation { .. })
            ));
            assert_eq!(probe_window(&p).unwrap().len(), rep.probe.len());
        }
    }
}

#[test]
fn scheduler_exponents_are_exact() {
    let (k, s, delta) = (2usize, -0.5, 0.1);
    let kf = k as f64;
    let lo = schedule_params(1, k, s, 1, delta, 256, CaseSelector::Case1).unwrap();
    let hi = schedule_params(1, k, s, 1, delta, 512, CaseSelector::Case1).unwrap();
    let local = |p: &InflationParams| p.t * p.t * p.r.powf(kf - 1.0) * (p.a as f64).powf(kf - 1.0);
    assert_relative_eq!(
        (local(&hi) / local(&lo)).log2(),
        -(kf - 1.0) * delta / 2.0,
        epsilon = 1e-12
    );
    let lower = inflate_core::experiment::lower_bound_scale;
    assert_relative_eq!(
        (lower(&hi) / lower(&lo)).log2(),
        -s - (kf + 1.0) * delta / 2.0,
        epsilon = 1e-12
    );
}

#[test]
fn cross_term_is_the_multilinear_difference() {
    let p = params(2, 32, 4, 0.15);
    let lat = Lattice::new(1, 2 * (2 * p.big_n + p.a) + 8).unwrap();
    let phi = build_inflation_data(&p, lat).unwrap();
    let u0 = GaussianPreset::default().build(lat).unwrap();
    let grid = TimeGrid::new(p.t, 40, 8).unwrap();
    for k in [2, 3] {
        let lat_k = Lattice::new(1, k as i64 * (2 * p.big_n + p.a + 8)).unwrap();
        let (phi, u0) = (phi.relattice(lat_k).unwrap(), u0.relattice(lat_k).unwrap());
        let (cross, count) = cross_term(
            &u0,
            &phi,
            k,
            p.t,
            &grid,
            DispersionKind::Wave,
            Truncation::Strict,
        )
        .unwrap();
        assert_eq!(count, (1 << k) - 1);
        let both = u0.add(&phi).unwrap();
        let full = xi_j(
            k,
            1,
            &both,
            p.t,
            &grid,
            DispersionKind::Wave,
            Truncation::Strict,
        )
        .unwrap();
        let pure = xi_j(
            k,
            1,
            &phi,
            p.t,
            &grid,
            DispersionKind::Wave,
            Truncation::Strict,
        )
        .unwrap();
        let diff = full.sub(&pure).unwrap();
        assert!(max_diff(&cross, &diff) <= 1e-12 * diff.norm_sup());
    }
}

#[test]
fn multilinear_duhamel() {
    let phi = small_data();
    let lat = phi.lattice();
    let f = LinearSolution::new(phi.clone(), DispersionKind::Wave);
    let g_data = PhasePair::new(
        FrequencyField::single_mode(lat, [3, 0, 0], c(0.0, 1.0)).unwrap(),
        FrequencyField::zero(lat),
    )
    .unwrap();
    let g = LinearSolution::new(g_data.clone(), DispersionKind::Wave);
    let mix_data = PhasePair::new(
        phi.pos.scale(2.0).add(&g_data.pos).unwrap(),
        phi.vel.scale(2.0),
    )
    .unwrap();
    let mix = LinearSolution::new(mix_data, DispersionKind::Wave);
    let grid = TimeGrid::with_default(0.8).unwrap();
    let run = |a: &dyn TimeField| {
        duhamel(
            &[a, &f],
            0.8,
            &grid,
            DispersionKind::Wave,
            Truncation::Strict,
        )
        .unwrap()
    };
    let lhs = run(&mix);
    let rhs = run(&f).scale(2.0).add(&run(&g)).unwrap();
    assert!(max_diff(&lhs, &rhs) <= 1e-14 * lhs.norm_sup());
}

#[test]
fn zero_background_data_distance_matches_scale() {
    let p = schedule_params(1, 2, -0.5, 1, 0.1, 64, CaseSelector::Auto).unwrap();
    let options = RunOptions {
        order: 1,
        background: None,
        ..Default::default()
    };
    let rep = run_experiment(&p, &options).unwrap();
    let ratio = rep.data_distance / rep.data_scale;
    assert!((0.5..=2.0).contains(&ratio), "ratio {ratio}");
    assert_eq!(rep.cross_term_norm, 0.0);
    assert_eq!(rep.cross_term_count, 3);
    assert!(rep.lower_bound.lhs_window <= rep.lower_bound.lhs_full);
    assert!(rep.lower_bound.ratio > 0.0);
    assert_eq!(rep.xi_norms.len(), 2);
    assert_relative_eq!(rep.xi_norms[1], rep.xi1_phi_norm, max_relative = 1e-9);
}

#[test]
fn inflation_data_is_the_exact_difference() {
    let p = schedule_params(1, 2, -0.5, 1, 0.1, 64, CaseSelector::Auto).unwrap();
    let lat = Lattice::new(1, p.required_cutoff()).unwrap();
    let phi = build_inflation_data(&p, lat).unwrap();
    let u0 = GaussianPreset::default().build(lat).unwrap();
    let u0n = u0.add(&phi).unwrap();
    let back = u0n.sub(&u0).unwrap();
    assert_eq!(back.pos, phi.pos);
    assert_eq!(back.vel, phi.vel);
}
