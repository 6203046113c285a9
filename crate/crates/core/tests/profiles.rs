use approx::assert_relative_eq;
use proptest::prelude::*;

use intwave::profiles::{
    build_profile, closed_profile, cubic_kawahara_solve, decay_rate, dimensional_profile, fit_decay_rate,
    kawahara_default_grid, kawahara_explicit, kawahara_explicit_mass, kawahara_solve, steady_ode_residual,
    tail_decay_rate, tail_oscillation, ProfileKind, ProfileSpec, SteadyEquation, KAWAHARA_EXPLICIT_DELTA,
    KAWAHARA_PRINTED_DELTA,
};
use intwave::{Error, Grid, GridProfile};

/// Adaptive Simpson quadrature, independent of the grid machinery.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    step(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
}

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

fn default_grid() -> Grid {
    Grid::new(40.0, 1024).unwrap()
}

#[test]
fn amplitude_exponents() {
    assert_eq!(ProfileKind::Kdv.amplitude_exponent(), 2);
    assert_eq!(ProfileKind::CubicKawaharaNumeric.amplitude_exponent(), 2);
    assert_eq!(ProfileKind::GardnerElevation.amplitude_exponent(), 1);
    assert_eq!(ProfileKind::GardnerDepression.amplitude_exponent(), 1);
    assert_eq!(ProfileKind::KawaharaNumeric.amplitude_exponent(), 4);
    assert_eq!(ProfileKind::KawaharaExplicit.amplitude_exponent(), 4);
}

#[test]
fn kdv_closed_profile() {
    let spec = ProfileSpec::kdv(0.5, 2.0, 1.0);
    let eta = closed_profile(&spec, default_grid()).unwrap();
    assert_relative_eq!(eta.values[eta.grid.origin()], 4.0, epsilon = 1e-14);
    let w = (1.0f64 / 6.0).sqrt();
    let oracle = simpson(&|x| (4.0 * sech(x / (2.0 * w)).powi(2)).powi(2), -40.0, 40.0, 1e-12);
    assert_relative_eq!(eta.dot(&eta), oracle, epsilon = 1e-9);
    assert_relative_eq!(eta.dot(&eta), 16.0 * 4.0 / 3.0 * 2.0 * w, epsilon = 1e-9);
    assert_relative_eq!(eta.dot(&eta), 17.4186, epsilon = 1e-4);
}

#[test]
fn gardner_closed_profiles() {
    let up = closed_profile(&ProfileSpec::gardner(true, 1.0, 0.625), default_grid()).unwrap();
    let down = closed_profile(&ProfileSpec::gardner(false, 1.0, 0.625), default_grid()).unwrap();
    let o = up.grid.origin();
    let (p, q) = (0.5, 0.875f64.sqrt());
    assert_relative_eq!(up.values[o], 1.0 / (p + q), epsilon = 1e-14);
    assert_relative_eq!(down.values[o], 1.0 / (p - q), epsilon = 1e-14);
    // Quoted six-digit values, which round the exact ones by 2e-6.
    assert_relative_eq!(up.values[o], 0.696664, epsilon = 5e-6);
    assert_relative_eq!(down.values[o], -2.296665, epsilon = 5e-6);
}

#[test]
fn gardner_depression_needs_positive_cubic() {
    let spec = ProfileSpec::gardner(false, 1.0, -0.1);
    assert!(matches!(closed_profile(&spec, default_grid()), Err(Error::InvalidProfile(_))));
}

#[test]
fn kdv_rejects_degenerate_parameters() {
    assert!(closed_profile(&ProfileSpec::kdv(0.25, 2.0, 1.0), default_grid()).is_err());
    assert!(closed_profile(&ProfileSpec::kdv(0.5, 2.0, 0.8), default_grid()).is_err());
}

#[test]
fn explicit_kawahara_values() {
    let z = closed_profile(&ProfileSpec::kawahara_explicit(), default_grid()).unwrap();
    assert_relative_eq!(z.values[z.grid.origin()], 35.0 / 24.0, epsilon = 1e-15);
    let oracle = simpson(&|x| kawahara_explicit(x).powi(2), -40.0, 40.0, 1e-12);
    assert_relative_eq!(oracle, kawahara_explicit_mass(), epsilon = 1e-8);
    assert_relative_eq!(z.dot(&z), 9.525793, epsilon = 1e-6);
}

#[test]
fn closed_profiles_solve_their_equations() {
    let grid = default_grid();
    let kdv = ProfileSpec::kdv(0.5, 2.0, 1.0);
    let r = steady_ode_residual(&closed_profile(&kdv, grid).unwrap(), SteadyEquation::for_spec(&kdv).unwrap());
    assert!(r < 1e-8, "KdV residual {r}");

    for elevation in [true, false] {
        let spec = ProfileSpec::gardner_for(elevation, 0.5, 2.0, 1.0, None);
        let eta = closed_profile(&spec, grid).unwrap();
        let r = steady_ode_residual(&eta, SteadyEquation::for_spec(&spec).unwrap());
        assert!(r < 1e-8, "Gardner residual {r}");
        // The variant with ϱ + h in place of ϱ + 1/h³ does not solve the equation.
        let variant = ProfileSpec { cubic: Some(0.5 + 2.0), ..spec };
        let eta = closed_profile(&variant, grid).unwrap();
        let r = steady_ode_residual(&eta, SteadyEquation::for_spec(&spec).unwrap());
        assert!(r > 0.1, "variant residual {r}");
    }
}

#[test]
fn explicit_formula_solves_the_fourth_order_equation_at_one_twelfth() {
    let z = closed_profile(&ProfileSpec::kawahara_explicit(), Grid::new(60.0, 1024).unwrap()).unwrap();
    let at = |delta| steady_ode_residual(&z, SteadyEquation::FourthOrder { delta, quadratic: 1.0, cubic: 0.0 });
    assert!(at(KAWAHARA_EXPLICIT_DELTA) < 1e-8);
    assert!(at(KAWAHARA_PRINTED_DELTA) > 1e-2);
}

#[test]
fn decay_rates() {
    assert_eq!(decay_rate(0.0).unwrap(), 1.0);
    assert_relative_eq!(decay_rate(1.0 / 6.0).unwrap(), 0.752158, epsilon = 1e-6);
    assert_relative_eq!(decay_rate(0.5).unwrap(), (1.5 - 1.25f64.sqrt()).sqrt(), epsilon = 1e-15);
    assert_eq!(decay_rate(-0.5).unwrap(), 0.5);
    assert!(decay_rate(-2.0).is_err());
    assert_relative_eq!(tail_oscillation(-0.1).unwrap(), 0.05f64.sqrt(), epsilon = 1e-15);
    assert_relative_eq!(tail_decay_rate(-0.1).unwrap(), 0.95f64.sqrt(), epsilon = 1e-15);
}

/// Roots of `k⁴ − 2(1+δ)k² + 1` give the tail `e^{−k|x|}`; the slowest real
/// part must equal the envelope rate.
#[test]
fn tail_rate_matches_characteristic_roots() {
    for delta in [-1.5, -0.7, -0.1, 0.0, 0.3, 2.0] {
        let b = 1.0 + delta;
        let disc = num_complex::Complex64::new(b * b - 1.0, 0.0).sqrt();
        let slowest = [b + disc, b - disc]
            .iter()
            .map(|k2| k2.sqrt().re.abs())
            .fold(f64::INFINITY, f64::min);
        assert_relative_eq!(tail_decay_rate(delta).unwrap(), slowest, epsilon = 1e-12);
    }
}

#[test]
fn kawahara_solver_recovers_explicit_solution() {
    let sol = kawahara_solve(KAWAHARA_EXPLICIT_DELTA, None).unwrap();
    let diff = sol
        .profile
        .grid
        .points()
        .iter()
        .zip(&sol.profile.values)
        .map(|(x, z)| (z - kawahara_explicit(*x)).abs())
        .fold(0.0, f64::max);
    assert!(diff < 1e-8, "max difference {diff}");
}

fn check_homoclinic_invariants(profile: &GridProfile) {
    let refl = profile.reflected();
    let asym = profile.values.iter().zip(&refl.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(asym < 1e-10, "asymmetry {asym}");
    let slope = profile.derivative();
    assert!(slope.values[profile.grid.origin()].abs() < 1e-12);
    // The default grid spans 25 envelope decay lengths.
    let peak = profile.max_abs();
    assert!(profile.values[0].abs() < 1e-9 * peak);
}

#[test]
fn kawahara_half_and_negative_detuning() {
    let sol = kawahara_solve(0.5, None).unwrap();
    assert!(sol.residual_norm < 1e-10);
    check_homoclinic_invariants(&sol.profile);
    assert!(sol.profile.values.iter().all(|&z| z > -1e-12));
    let o = sol.profile.grid.origin();
    assert!((o..sol.profile.grid.n - 1).all(|j| sol.profile.values[j + 1] <= sol.profile.values[j] + 1e-14));
    let fit = fit_decay_rate(&sol.profile).unwrap();
    assert!((fit / decay_rate(0.5).unwrap() - 1.0).abs() < 0.1);
    assert!(sol.continuation_constant.is_finite() && sol.continuation_constant > 0.0);

    let sol = kawahara_solve(-0.1, None).unwrap();
    assert!(sol.residual_norm < 1e-10);
    check_homoclinic_invariants(&sol.profile);
    assert!(sol.profile.values.iter().any(|&z| z < -1e-8), "tails should oscillate");
    let fit = fit_decay_rate(&sol.profile).unwrap();
    assert!((fit / tail_decay_rate(-0.1).unwrap() - 1.0).abs() < 0.1, "fit {fit}");
}

#[test]
fn default_grid_satisfies_the_length_precondition() {
    for delta in [-0.2, 0.0, 1.0 / 6.0, 1.0] {
        let g = kawahara_default_grid(delta).unwrap();
        assert!(g.half_period >= 25.0 / tail_decay_rate(delta).unwrap() && g.half_period >= 40.0);
        assert!(g.dx() <= 0.25 && g.n >= 512);
    }
}

#[test]
fn cubic_kawahara_branches() {
    for negative in [false, true] {
        let spec = ProfileSpec::cubic_kawahara(1.0 / 6.0, 1.0, 0.5, 2.0, negative);
        let sol = cubic_kawahara_solve(&spec, None).unwrap();
        assert!(sol.residual_norm < 1e-8);
        check_homoclinic_invariants(&sol.profile);
        let peak = sol.profile.values[sol.profile.grid.origin()];
        assert_eq!(peak < 0.0, negative);
        let r = steady_ode_residual(&sol.profile, SteadyEquation::for_spec(&spec).unwrap());
        assert!(r < 1e-8);
    }
}

#[test]
fn build_profile_dispatches() {
    let grid = kawahara_default_grid(0.3).unwrap();
    let z = build_profile(&ProfileSpec::kawahara(0.3), grid).unwrap();
    assert_eq!(z.grid, grid);
    assert!(build_profile(&ProfileSpec::kdv(0.5, 2.0, 1.0), grid).is_ok());
}

#[test]
fn dimensional_reconstruction_scales_exactly() {
    let spec = ProfileSpec::kdv(0.5, 2.0, 1.0);
    let scaled = closed_profile(&spec, Grid::new(20.0, 256).unwrap()).unwrap();
    let (eps, d_plus) = (0.1, 1.5);
    let grid = Grid::new(150.0, 512).unwrap();
    let eta = dimensional_profile(&spec, &scaled, eps, d_plus, grid).unwrap();
    let w = (1.0f64 / 6.0).sqrt();
    for (x, v) in grid.points().iter().zip(&eta.values).step_by(17) {
        let exact = eps * eps * d_plus * 4.0 * sech(eps * x / d_plus / (2.0 * w)).powi(2);
        assert!((v - exact).abs() < 1e-9, "x = {x}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn closed_profiles_are_even_and_decay(kappa in -2.0f64..2.0, cubic in 0.1f64..2.0, elevation: bool) {
        let spec = ProfileSpec::gardner(elevation, kappa, cubic);
        let eta = closed_profile(&spec, default_grid()).unwrap();
        let refl = eta.reflected();
        for (a, b) in eta.values.iter().zip(&refl.values) {
            prop_assert!((a - b).abs() <= 1e-12 * eta.max_abs());
        }
        let o = eta.grid.origin();
        for j in o..eta.grid.n - 1 {
            prop_assert!(eta.values[j + 1].abs() <= eta.values[j].abs() + 1e-15);
        }
        prop_assert!(eta.values[0].abs() < 1e-10 * eta.max_abs());
    }
}
