use approx::assert_relative_eq;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use intwave::dispersion::qtilde;
use intwave::dno::Backend;
use intwave::grid::{Parity, Spectral};
use intwave::profiles::kawahara_default_grid;
use intwave::params::speed_for_lambda_excess;
use intwave::spectra::{
    assemble_operator, assemble_qc, assemble_qc_with, eigensolve, rescaled_convergence_study, ConvergenceFamily,
    OperatorMatrix, OperatorRequest, PotentialSign,
};
use intwave::stability::{functionals, leading_order_wave, psistar, Family};
use intwave::{Error, Grid, GridProfile, PhysicalParams};

const KDV: OperatorRequest = OperatorRequest::Qtilde0AKdv { varrho: 0.5, h: 2.0, beta: 1.0 };

fn gardner(elevation: bool) -> OperatorRequest {
    OperatorRequest::Qtilde0AGardner { varrho: 0.5, h: 2.0, kappa: 1.0, cubic: None, beta: None, elevation }
}

fn assemble(request: &OperatorRequest) -> OperatorMatrix {
    assemble_operator(request, request.default_grid().unwrap()).unwrap()
}

/// Householder reduction to tridiagonal form, written out independently of
/// the library's eigensolver.
fn tridiagonalize(m: &DMatrix<f64>) -> (Vec<f64>, Vec<f64>) {
    let n = m.nrows();
    let mut a = m.clone();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<f64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if x[0] > 0.0 { -norm } else { norm };
        let mut v = x.clone();
        v[0] -= alpha;
        let vn = v.iter().map(|t| t * t).sum::<f64>();
        if vn == 0.0 {
            continue;
        }
        // A ← H A H with H = I − 2vvᵀ/‖v‖² acting on rows/columns k+1..n.
        let mut h = DMatrix::<f64>::identity(n, n);
        for (i, vi) in v.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                h[(k + 1 + i, k + 1 + j)] -= 2.0 * vi * vj / vn;
            }
        }
        a = &h * &a * &h;
    }
    let diag = (0..n).map(|i| a[(i, i)]).collect();
    let off = (1..n).map(|i| a[(i, i - 1)]).collect();
    (diag, off)
}

/// Eigenvalues below `x`, from the sign changes of the characteristic
/// polynomial's Sturm sequence.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let prev = if q == 0.0 { f64::EPSILON } else { q };
        q = diag[i] - x - off[i - 1] * off[i - 1] / prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn bisection_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let (diag, off) = tridiagonalize(m);
    let bound = (0..diag.len())
        .map(|i| diag[i].abs() + off.get(i).map_or(0.0, |v| v.abs()) + i.checked_sub(1).map_or(0.0, |j| off[j].abs()))
        .fold(0.0, f64::max);
    (0..diag.len())
        .map(|k| {
            let (mut lo, mut hi) = (-bound - 1.0, bound + 1.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if sturm_count(&diag, &off, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

#[test]
fn eigensolver_matches_bisection_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let grid = Grid::new(1.0, 64).unwrap();
    for _ in 0..5 {
        let mut m = DMatrix::<f64>::zeros(50, 50);
        for i in 0..50 {
            for j in 0..=i {
                let v: f64 = rng.random_range(-1.0..1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        let oracle = bisection_eigenvalues(&m);
        let op = OperatorMatrix {
            kind: intwave::spectra::OperatorKind::Qdelta,
            grid,
            entries: m,
            asymmetry: 0.0,
            ess_edge: 1.0,
            profile: None,
        };
        let report = eigensolve(&op, 50);
        for (a, b) in report.eigenvalues.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }
}

#[test]
fn kdv_limit_operator_matches_closed_form() {
    let grid = KDV.default_grid().unwrap();
    let m = assemble_operator(&KDV, grid).unwrap();
    // Same operator written out: −(1/6)∂² + 1 − 3 sech²(x / (2√(1/6))).
    let w = (1.0f64 / 6.0).sqrt();
    let spectral = Spectral::new(grid);
    let mut direct = spectral.symbol_matrix(Parity::Even, |xi| xi * xi / 6.0);
    for (j, x) in grid.points().iter().enumerate() {
        direct[(j, j)] += 1.0 - 3.0 / (x / (2.0 * w)).cosh().powi(2);
    }
    assert!((&m.entries - direct).amax() < 1e-10);

    let r = eigensolve(&m, 3);
    for (got, want) in r.eigenvalues.iter().zip([-1.25, 0.0, 0.75]) {
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }
    assert_eq!(r.ess_edge, 1.0);
    assert_eq!(r.n_negative, 1);
    assert_eq!(r.zero_modes.len(), 1);
    assert!(r.kernel_alignment.unwrap() > 0.999);
}

#[test]
fn report_counts_are_consistent() {
    let m = assemble(&gardner(true));
    let r = eigensolve(&m, m.n());
    assert_eq!(r.eigenvalues.len(), m.n());
    assert!(r.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(r.n_negative, r.eigenvalues.iter().filter(|&&v| v < -r.tolerance).count());
    assert_eq!(r.zero_modes.len(), r.eigenvalues.iter().filter(|&&v| v.abs() <= r.tolerance).count());
    assert_eq!(r.discretized_continuum, r.eigenvalues.iter().filter(|&&v| v >= r.ess_edge).count());
    for v in &r.lowest_vectors {
        assert_relative_eq!(v.values.iter().map(|x| x * x).sum::<f64>(), 1.0, epsilon = 1e-12);
    }
}

#[test]
fn identity_shift_moves_the_spectrum() {
    let m = assemble(&KDV);
    let base = eigensolve(&m, m.n()).eigenvalues;
    let shifted = eigensolve(&m.shifted(2.5), m.n()).eigenvalues;
    let drift = base.iter().zip(&shifted).map(|(a, b)| (b - a - 2.5).abs()).fold(0.0, f64::max);
    assert!(drift < 1e-10, "drift {drift}");
}

fn limiting_requests() -> Vec<OperatorRequest> {
    let mut out = vec![KDV, gardner(true), gardner(false)];
    for delta in [-0.2, 0.0, 1.0 / 6.0, 0.5, 1.0] {
        out.push(OperatorRequest::Qtilde0C { varrho: 0.5, h: 2.0, delta });
        out.push(OperatorRequest::Qdelta { delta });
    }
    out
}

#[test]
fn limiting_operators_are_self_adjoint_with_translation_kernel() {
    for request in limiting_requests() {
        let m = assemble(&request);
        assert!(m.asymmetry < 1e-10, "{request:?}: asymmetry {}", m.asymmetry);
        let defect = m.kernel_defect().unwrap();
        assert!(defect < 1e-6, "{request:?}: kernel defect {defect}");
    }
}

#[test]
fn limiting_operators_have_one_negative_eigenvalue() {
    for request in limiting_requests() {
        let r = eigensolve(&assemble(&request), 3);
        assert_eq!(r.n_negative, 1, "{request:?}: {:?}", r.eigenvalues);
        assert_eq!(r.zero_modes.len(), 1, "{request:?}: {:?}", r.eigenvalues);
    }
}

#[test]
fn kawahara_linearization_kernel() {
    let m = assemble(&OperatorRequest::Qdelta { delta: 1.0 / 6.0 });
    let r = eigensolve(&m, 3);
    assert_eq!(r.n_negative, 1);
    assert_eq!(r.zero_modes.len(), 1);
    assert!(r.kernel_alignment.unwrap() > 0.999);
    let z = m.profile.as_ref().unwrap().derivative();
    let image = m.apply(&z.values);
    assert!(image.iter().map(|v| v.abs()).fold(0.0, f64::max) < 1e-6);
}

#[test]
fn region_c_essential_edge_is_gamma() {
    let m = assemble(&OperatorRequest::Qtilde0C { varrho: 0.5, h: 2.0, delta: 0.5 });
    assert_relative_eq!(m.ess_edge, 8.5 / 45.0, epsilon = 1e-15);
}

#[test]
fn discrete_eigenvalues_are_grid_converged() {
    for request in [KDV, gardner(false), OperatorRequest::Qdelta { delta: 0.5 }] {
        let grid = request.default_grid().unwrap();
        let coarse = eigensolve(&assemble_operator(&request, Grid::new(grid.half_period, grid.n / 2).unwrap()).unwrap(), 4);
        let fine = eigensolve(&assemble_operator(&request, grid).unwrap(), 4);
        for (a, b) in coarse.eigenvalues.iter().zip(&fine.eigenvalues) {
            if *b < fine.ess_edge {
                assert!((a - b).abs() < 1e-6, "{request:?}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn rescaled_operator_converges_at_second_order() {
    let grid = KDV.default_grid().unwrap();
    let limit = assemble_operator(&KDV, grid).unwrap();
    let test_vector: Vec<f64> = grid.points().iter().map(|x| (-x * x).exp() * (1.0 + x)).collect();
    let target = limit.apply(&test_vector);
    let errors: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&epsilon| {
            let request = OperatorRequest::QepsA { varrho: 0.5, h: 2.0, beta: 1.0, epsilon };
            let applied = assemble_operator(&request, grid).unwrap().apply(&test_vector);
            applied.iter().zip(&target).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
        })
        .collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}, errors {errors:?}");
    }
}

#[test]
fn region_a_convergence_study() {
    let family = ConvergenceFamily::RegionAKdv { varrho: 0.5, h: 2.0, beta: 1.0 };
    let grid = family.default_grid().unwrap();
    let study = rescaled_convergence_study(family, &[0.2, 0.1, 0.05], grid).unwrap();
    assert!(study.monotone);
    for r in &study.nu1_ratios {
        assert!((3.0..=5.0).contains(r), "{study:?}");
    }
    // ν₂ starts pre-asymptotic at ε = 0.2; its ratio must climb into the band.
    let nu2 = &study.nu2_ratios;
    assert!(nu2[1] > nu2[0] && (3.0..=5.0).contains(&nu2[1]), "{study:?}");
    let limit = eigensolve(&assemble_operator(&KDV, grid).unwrap(), 2);
    assert_eq!(study.limit.nu1, limit.eigenvalues[0]);
    assert_eq!(study.limit.nu2, limit.eigenvalues[1]);
    assert!(study.rows.windows(2).all(|w| w[1].nu2.abs() < w[0].nu2.abs()));
}

#[test]
fn convergence_study_rejects_bad_lists() {
    let family = ConvergenceFamily::RegionAKdv { varrho: 0.5, h: 2.0, beta: 1.0 };
    let grid = family.default_grid().unwrap();
    assert!(rescaled_convergence_study(family, &[0.1, 0.2], grid).is_err());
    assert!(rescaled_convergence_study(family, &[0.4, 0.1], grid).is_err());
}

#[test]
fn under_resolved_grids_are_rejected() {
    let short = Grid::new(2.0, 64).unwrap();
    assert!(matches!(assemble_operator(&KDV, short), Err(Error::InvalidGrid(_))));
    let delta = 0.5;
    let g = kawahara_default_grid(delta).unwrap();
    let short = Grid::new(g.half_period / 4.0, g.n / 4).unwrap();
    assert!(assemble_operator(&OperatorRequest::Qdelta { delta }, short).is_err());
}

/// At the flat state the operator is the dimensional multiplier
/// `(c²ρ₋/d₊) q̃(d₊ξ)`, so its spectrum is the symbol sampled on the grid.
/// The periodic inverse drops the ξ → 0 limit and the odd first-derivative
/// matrix annihilates the Nyquist mode, so those two modes carry only the
/// gravity term `−g⟦ρ⟧`.
#[test]
fn flat_state_operator_is_the_symbol_multiplier() {
    let p = PhysicalParams::p0();
    let nd = p.nondimensionalize().unwrap();
    let grid = Grid::new(20.0, 64).unwrap();
    let m = assemble_qc(&GridProfile::zeros(grid), &p, Backend::Flat).unwrap();
    let mut expected: Vec<f64> = grid
        .wavenumbers()
        .iter()
        .filter(|&&k| k != 0.0 && k.abs() != grid.nyquist())
        .map(|&k| p.symbol_scale() * qtilde(p.d_plus * k, nd.beta, nd.lambda, nd.varrho, nd.h))
        .collect();
    expected.extend([-p.g * p.density_jump(); 2]);
    expected.sort_by(f64::total_cmp);
    let constant = m.apply(&vec![1.0; grid.n]);
    assert!(constant.iter().all(|v| (v + p.g * p.density_jump()).abs() < 1e-12));
    let r = eigensolve(&m, grid.n);
    for (got, want) in r.eigenvalues.iter().zip(&expected) {
        assert!((got - want).abs() < 1e-9 * want.abs().max(1.0), "{got} vs {want}");
    }
    assert!(r.eigenvalues[0] >= r.ess_edge);
}

/// `⟨v, Q_c(η)v⟩` against central second differences of the reduced
/// functional `η ↦ (E − cP)(η, ψ*(η))` on a curved KdV wave.
#[test]
fn qc_quadratic_form_matches_reduced_functional_hessian() {
    let base = PhysicalParams::p0();
    let backend = Backend::curved(24);
    let mut printed_gaps = Vec::new();
    for eps in [0.2, 0.14] {
        let c = speed_for_lambda_excess(&base, eps * eps).unwrap();
        let decay = base.d_plus * (1.0f64 - 5.0 / 6.0).sqrt() / eps;
        let grid = Grid::new(12.0 * decay, 128).unwrap();
        let wave = leading_order_wave(c, Family::AKdv, &base, backend, Some(grid)).unwrap();
        let p = wave.params;
        let reduced = |eta: &GridProfile| {
            let psi = psistar(eta, c, &p, backend).unwrap();
            let f = functionals(eta, &psi, &p, backend).unwrap();
            f.energy - c * f.momentum
        };
        let printed = assemble_qc_with(&wave.eta, &p, backend, PotentialSign::Printed).unwrap();
        let flipped = assemble_qc_with(&wave.eta, &p, backend, PotentialSign::Flipped).unwrap();
        let directions = [
            wave.eta.scale(1.0 / wave.eta.max_abs()),
            GridProfile::from_fn(grid, |x| (-((x - decay) / decay).powi(2)).exp()),
        ];
        for v in directions {
            let t = 1e-3 * wave.eta.max_abs();
            let fd = (reduced(&wave.eta.add(&v.scale(t))) - 2.0 * reduced(&wave.eta)
                + reduced(&wave.eta.sub(&v.scale(t))))
                / (t * t);
            let form = |m: &OperatorMatrix| v.dot(&v.with_values(m.apply(&v.values)));
            let (gap_printed, gap_flipped) = ((form(&printed) - fd).abs(), (form(&flipped) - fd).abs());
            assert!(gap_printed < 0.2 * gap_flipped, "eps {eps}: printed gap {gap_printed}, flipped gap {gap_flipped}");
            assert!(gap_printed < 1e-2 * fd.abs());
            printed_gaps.push(gap_printed);
        }
    }
    // The leading-order wave is only approximately critical; the gap shrinks with ε.
    assert!(printed_gaps[2] < printed_gaps[0] && printed_gaps[3] < printed_gaps[1], "{printed_gaps:?}");
}
