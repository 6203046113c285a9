use approx::assert_relative_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use intwave::dno::{kinetic_gradient, Backend, DnOperators};
use intwave::params::{gamma_quartic, speed_for_lambda_excess, speed_to_scaling};
use intwave::stability::{
    dprime_leading, dprime_leading_consistent, dprime_sample, functionals, gardner_momentum_closed_form,
    momentum_consistency, psistar, region_verdict, steady_residual, trivial_flow_verdict, Conclusion, Family,
    Monotonicity,
};
use intwave::{Grid, GridProfile, NonDimParams, PhysicalParams};

const C_STAR: f64 = 0.7035976;

fn cos_state(grid: Grid) -> (GridProfile, GridProfile) {
    (GridProfile::from_fn(grid, |x| 0.01 * x.cos()), GridProfile::from_fn(grid, |x| 0.02 * x.sin()))
}

fn pi_grid(n: usize) -> Grid {
    Grid::new(std::f64::consts::PI, n).unwrap()
}

/// Smooth random mean-zero profile made of a few low modes.
fn random_profile(rng: &mut ChaCha8Rng, grid: Grid, amplitude: f64) -> GridProfile {
    let modes: Vec<(f64, f64)> = (1..=4).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let base = std::f64::consts::PI / grid.half_period;
    GridProfile::from_fn(grid, |x| {
        amplitude
            * modes
                .iter()
                .enumerate()
                .map(|(k, (a, b))| {
                    let w = base * (k + 1) as f64;
                    (a * (w * x).cos() + b * (w * x).sin()) / (k + 1) as f64
                })
                .sum::<f64>()
    })
}

#[test]
fn psistar_examples() {
    let p = PhysicalParams::p0();
    let (eta, _) = cos_state(pi_grid(64));
    let psi = psistar(&eta, 1.0, &p, Backend::Flat).unwrap();
    let coth = |x: f64| 1.0 / x.tanh();
    let coefficient = 0.01 * (coth(1.0) + 2.0 * coth(2.0));
    assert_relative_eq!(coefficient, 0.0338766, epsilon = 1e-7);
    for (x, v) in eta.grid.points().iter().zip(&psi.values) {
        assert!((v - coefficient * x.sin()).abs() < 1e-14);
    }
    let flipped = psistar(&eta, -1.0, &p, Backend::Flat).unwrap();
    assert!(psi.values.iter().zip(&flipped.values).all(|(a, b)| *a == -b));
    let zero = psistar(&GridProfile::zeros(eta.grid), 1.0, &p, Backend::curved(16)).unwrap();
    assert!(zero.values.iter().all(|v| *v == 0.0));
}

#[test]
fn functionals_examples() {
    let p = PhysicalParams::p0();
    let (eta, psi) = cos_state(pi_grid(64));
    let f = functionals(&eta, &psi, &p, Backend::Flat).unwrap();
    assert_relative_eq!(f.momentum, 2e-4 * std::f64::consts::PI, epsilon = 1e-15);
    assert_relative_eq!(f.momentum, 6.28319e-4, epsilon = 1e-9);
    let coth = |x: f64| 1.0 / x.tanh();
    let kinetic = 0.5 * 0.02f64.powi(2) / (coth(1.0) + 2.0 * coth(2.0)) * std::f64::consts::PI;
    assert_relative_eq!(f.kinetic, kinetic, epsilon = 1e-15);
    assert_relative_eq!(f.kinetic, 1.8547e-4, epsilon = 1e-8);
    assert_eq!(f.energy, f.kinetic + f.potential);

    let z = GridProfile::zeros(eta.grid);
    let f = functionals(&z, &z, &p, Backend::curved(16)).unwrap();
    assert_eq!((f.kinetic, f.potential, f.energy, f.momentum), (0.0, 0.0, 0.0, 0.0));
}

#[test]
fn potential_energy_matches_direct_quadrature() {
    let p = PhysicalParams::p0();
    let grid = pi_grid(128);
    let (eta, psi) = cos_state(grid);
    let f = functionals(&eta, &psi, &p, Backend::Flat).unwrap();
    // −½g⟦ρ⟧∫η² + σ∫(√(1+η′²) − 1) with η′ = −0.01 sin x.
    let direct: f64 = grid
        .points()
        .iter()
        .map(|x| {
            let (e, s) = (0.01 * x.cos(), -0.01 * x.sin());
            -0.5 * p.g * p.density_jump() * e * e + p.sigma * ((1.0 + s * s).sqrt() - 1.0)
        })
        .sum::<f64>()
        * grid.dx();
    assert_relative_eq!(f.potential, direct, epsilon = 1e-16, max_relative = 1e-12);
}

#[test]
fn functionals_are_translation_invariant() {
    let p = PhysicalParams::p0();
    let grid = Grid::new(8.0, 64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let eta = random_profile(&mut rng, grid, 0.05);
    let psi = random_profile(&mut rng, grid, 0.1);
    for backend in [Backend::Flat, Backend::curved(16)] {
        let f0 = functionals(&eta, &psi, &p, backend).unwrap();
        for shift in [1, 7, 31] {
            let f = functionals(&eta.shifted(shift), &psi.shifted(shift), &p, backend).unwrap();
            for (a, b) in [(f.kinetic, f0.kinetic), (f.potential, f0.potential), (f.energy, f0.energy), (f.momentum, f0.momentum)] {
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-3), "{backend:?}, shift {shift}: {a} vs {b}");
            }
        }
    }
}

/// `ψ*` minimizes `K − cP` at fixed `η`, so the first variation vanishes.
#[test]
fn psistar_is_a_critical_point() {
    let p = PhysicalParams::p0();
    let grid = Grid::new(8.0, 64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let eta = random_profile(&mut rng, grid, 0.05);
    let c = 0.7;
    for backend in [Backend::Flat, Backend::curved(16)] {
        let psi = psistar(&eta, c, &p, backend).unwrap();
        let reduced = |psi: &GridProfile| {
            let f = functionals(&eta, psi, &p, backend).unwrap();
            f.kinetic - c * f.momentum
        };
        for _ in 0..3 {
            let phi = random_profile(&mut rng, grid, 1.0);
            let t = 1e-3;
            let slope = (reduced(&psi.add(&phi.scale(t))) - reduced(&psi.sub(&phi.scale(t)))) / (2.0 * t);
            let f = functionals(&eta, &phi, &p, backend).unwrap();
            let scale = (2.0 * f.kinetic).abs() + (c * f.momentum).abs();
            assert!(slope.abs() < 1e-8 * scale, "{backend:?}: slope {slope}, scale {scale}");
        }
    }
}

/// The η-gradient of `K` against a centred difference of `K` itself.
#[test]
fn kinetic_gradient_matches_finite_difference() {
    let p = PhysicalParams::p0();
    let grid = Grid::new(8.0, 64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let eta = random_profile(&mut rng, grid, 0.05);
    let psi = random_profile(&mut rng, grid, 0.1);
    let backend = Backend::curved(64);
    let kinetic = |e: &GridProfile| functionals(e, &psi, &p, backend).unwrap().kinetic;
    let ops = DnOperators::new(&eta, &p, backend).unwrap();
    let (gradient, _) = kinetic_gradient(&ops, &psi.values).unwrap();
    for _ in 0..2 {
        let direction = random_profile(&mut rng, grid, 1.0);
        let t = 1e-4;
        let fd = (kinetic(&eta.add(&direction.scale(t))) - kinetic(&eta.sub(&direction.scale(t)))) / (2.0 * t);
        let formula = grid.dx() * gradient.iter().zip(&direction.values).map(|(a, b)| a * b).sum::<f64>();
        assert!((fd - formula).abs() < 1e-2 * fd.abs(), "fd {fd}, formula {formula}");
    }
}

#[test]
fn steady_residual_examples() {
    let p = PhysicalParams::p0();
    let grid = Grid::new(8.0, 64).unwrap();
    let z = GridProfile::zeros(grid);
    for c in [-1.0, 0.0, 0.7] {
        let r = steady_residual(&z, &z, c, &p, Backend::curved(16)).unwrap();
        assert_eq!((r.res_eta, r.res_psi), (0.0, 0.0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..3 {
        let eta = random_profile(&mut rng, grid, 0.05);
        let psi = random_profile(&mut rng, grid, 0.1);
        let r = steady_residual(&eta, &psi, 0.7, &p, Backend::curved(16)).unwrap();
        assert!(r.res_eta + r.res_psi > 1e-2 * r.state_norm, "{r:?}");
    }
}

#[test]
fn dprime_example_and_conventions() {
    let p0 = PhysicalParams::p0();
    let d = dprime_leading(C_STAR, Family::AKdv, &p0).unwrap();
    // −cε³d₊²·w·(ρ₊ + ρ₋d₊/d₋)·∫η̃², with ∫η̃² = (16/3)(ϱ−1/h²)⁻²·2w for the
    // KdV soliton of width w.
    let s = speed_to_scaling(&p0, C_STAR).unwrap();
    let eps = s.epsilon_a.unwrap();
    let w = (s.beta_c - s.beta0).sqrt();
    let oracle = -C_STAR * eps.powi(3) * w * 2.0 * (16.0 * 4.0 / 3.0 * 2.0 * w);
    assert_relative_eq!(d, oracle, max_relative = 1e-9);
    assert_relative_eq!(d, -0.0100068, epsilon = 1e-5);
    let consistent = dprime_leading_consistent(C_STAR, Family::AKdv, &p0).unwrap();
    assert_relative_eq!(consistent, d / w, max_relative = 1e-9);
    let s = dprime_sample(C_STAR, Family::AKdv, &p0).unwrap();
    assert!(s.integral_error < 1e-8 * s.integral);
}

#[test]
fn dprime_is_odd_in_speed() {
    let p0 = PhysicalParams::p0();
    for family in [Family::AKdv, Family::AGardnerPlus] {
        for c in [0.69, 0.7, C_STAR] {
            let up = dprime_leading(c, family, &p0).unwrap();
            let down = dprime_leading(-c, family, &p0).unwrap();
            assert_relative_eq!(down, -up, max_relative = 1e-12);
        }
    }
}

#[test]
fn dprime_rejects_subcritical_and_large_amplitude_speeds() {
    let p0 = PhysicalParams::p0();
    assert!(dprime_leading(0.75, Family::AKdv, &p0).is_err());
    assert!(dprime_leading(0.2, Family::AKdv, &p0).is_err());
}

#[test]
fn gardner_momentum_integrals() {
    let elevation = gardner_momentum_closed_form(1.0, 0.625, true).unwrap();
    let depression = gardner_momentum_closed_form(1.0, 0.625, false).unwrap();
    assert_relative_eq!(elevation.quadrature, 1.1623, max_relative = 1e-4);
    assert_relative_eq!(depression.quadrature, 7.5201, max_relative = 1e-4);
    for g in [elevation, depression] {
        assert_relative_eq!(g.quadrature, g.closed_form, max_relative = 1e-10);
        assert_relative_eq!(g.difference, g.printed - g.quadrature, epsilon = 1e-15);
        assert!(g.difference.abs() > 1.0);
    }
    assert_relative_eq!(depression.printed, 0.0645249, epsilon = 1e-7);

    let cubic_only = gardner_momentum_closed_form(0.0, 0.625, false).unwrap();
    assert_relative_eq!(cubic_only.quadrature, 2.0 / 0.625, max_relative = 1e-10);
    assert_relative_eq!(cubic_only.printed, -0.8, epsilon = 1e-12);
    assert!(cubic_only.printed_negative);
    assert!(gardner_momentum_closed_form(1.0, 0.0, true).is_err());
}

#[test]
fn gardner_momentum_branch_symmetry() {
    for kappa in [0.3, 1.0, 2.5] {
        let a = gardner_momentum_closed_form(-kappa, 0.625, false).unwrap();
        let b = gardner_momentum_closed_form(kappa, 0.625, true).unwrap();
        assert_relative_eq!(a.quadrature, b.quadrature, max_relative = 1e-10);
    }
}

#[test]
fn region_a_verdicts_are_stable() {
    let p0 = PhysicalParams::p0();
    for family in [Family::AKdv, Family::AGardnerPlus, Family::AGardnerMinus] {
        let (verdict, curve) = region_verdict(C_STAR, family, &p0, 5e-4, 5).unwrap();
        assert_eq!(verdict.conclusion, Conclusion::ConditionallyStable, "{family:?}: {verdict:?}");
        assert!(verdict.is_well_founded());
        assert_eq!(curve.monotone_increasing, Monotonicity::Yes);
        assert_eq!(curve.second_difference_sign, 1);
        assert_eq!(curve.samples.len(), 11);
        assert!(curve.samples.windows(2).all(|w| w[0].c < w[1].c));
        let halved = region_verdict(C_STAR, family, &p0, 2.5e-4, 5).unwrap().0;
        assert_eq!(halved.conclusion, verdict.conclusion);
    }
}

#[test]
fn region_a_window_across_criticality_is_rejected() {
    let p0 = PhysicalParams::p0();
    assert!(region_verdict(C_STAR, Family::AKdv, &p0, 2e-3, 5).is_err());
    assert!(region_verdict(C_STAR, Family::AKdv, &p0, 0.0, 5).is_err());
}

fn region_c_base(delta: f64) -> PhysicalParams {
    let (varrho, h, eps) = (0.5, 2.0, 0.2);
    let gamma = gamma_quartic(varrho, h);
    let nd = NonDimParams::from_ratios(5.0 / 6.0 + 2.0 * gamma * eps * eps * (1.0 + delta), 1.0 + gamma * eps.powi(4), varrho, h)
        .unwrap();
    PhysicalParams::from_nondim(&nd, 2.0, 1.0, 0.7).unwrap()
}

#[test]
fn region_c_verdicts() {
    let base = region_c_base(0.5);
    let (verdict, curve) = region_verdict(base.c, Family::CKawahara, &base, 1e-5, 3).unwrap();
    assert_eq!(verdict.conclusion, Conclusion::ConditionallyStable, "{verdict:?}");
    assert!(verdict.is_well_founded());
    assert!(curve.samples.iter().all(|s| s.statistic > 0.0));
    // Steps far below the integral's error bar carry no evidence.
    let (flat, _) = region_verdict(base.c, Family::CKawahara, &base, 1e-14, 1).unwrap();
    assert_eq!(flat.conclusion, Conclusion::Inconclusive);
    assert!(flat.is_well_founded());
}

#[test]
fn trivial_flow_examples() {
    let p0 = PhysicalParams::p0();
    let v = trivial_flow_verdict(&p0).unwrap();
    assert_eq!(v.conclusion, Conclusion::ConditionallyStable);
    assert_relative_eq!(v.evidence.details["nu_star_dimless"], 0.01, epsilon = 1e-6);
    assert_eq!(v.evidence.details["in_region_b"], 1.0);

    let speed = |excess: f64| p0.with_speed(speed_for_lambda_excess(&p0, excess).unwrap());
    let critical = trivial_flow_verdict(&speed(0.0)).unwrap();
    assert_eq!(critical.conclusion, Conclusion::Inconclusive);
    assert!(critical.evidence.sign_statistic.abs() < 1e-10);
    let below = trivial_flow_verdict(&speed(-0.01)).unwrap();
    assert_eq!(below.conclusion, Conclusion::Inconclusive);
    assert_relative_eq!(below.evidence.sign_statistic, -0.01, epsilon = 1e-8);
}

#[test]
fn momentum_of_assembled_wave_tracks_dprime() {
    let p0 = PhysicalParams::p0();
    let errors: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&eps| {
            let c = speed_for_lambda_excess(&p0, eps * eps).unwrap();
            let m = momentum_consistency(c, Family::AKdv, &p0, Backend::Flat).unwrap();
            assert_relative_eq!(m.epsilon, eps, max_relative = 1e-9);
            m.relative_error_consistent
        })
        .collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0] / 3.0), "{errors:?}");
    assert!(errors[2] < 5e-3);
}
