mod common;

use sdde_split::config::Preset;
use sdde_split::experiment::run_convergence_study;
use sdde_split::reference::exact_path;
use sdde_split::{BrownianLattice, Scheme, SddeProblem, TrajectoryKey};

use common::*;

#[test]
fn delay_equation_closed_form_on_two_intervals() {
    assert!(dde_max_error(2f64.powi(-14), 2.0) <= 1e-10);
    assert!(dde_max_error(2f64.powi(-6), 2.0) <= 1e-12);
}

#[test]
fn closed_form_oracle_is_continuous() {
    for n in 1..4 {
        let t = n as f64;
        assert!((dde_exact(t - 1e-12) - dde_exact(t + 1e-12)).abs() < 1e-9);
    }
    assert!((dde_exact(2.0) - -0.5).abs() < 1e-15);
    assert!((dde_exact(3.0) - (1.0 - 3.0 + 2.0 - 1.0 / 6.0)).abs() < 1e-15);
}

#[test]
fn quadrature_is_second_order() {
    let steps: Vec<f64> = (3..=8).map(|k| 2f64.powi(-k)).collect();
    let (order, errors) = dde_self_convergence(&steps);
    assert!((1.7..=2.3).contains(&order), "{order} {errors:?}");
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.0..5.0).contains(&ratio), "{errors:?}");
    }
}

#[test]
fn linear_equation_is_integrated_exactly() {
    let grid = [2f64.powi(-4), 2f64.powi(-7)];
    for rho in [-0.9, 0.0, 0.45] {
        let gap = linear_exactness_gap(rho, 2f64.powi(-10), &grid, 10, 21);
        assert!(gap <= 1e-12, "rho {rho}: {gap}");
    }
}

/// Euler-Maruyama on the original correlated form, including the `σX dW₁`
/// and `g dW₂` terms and nothing else.
fn euler_maruyama(problem: &SddeProblem, lattice: &BrownianLattice) -> Vec<f64> {
    let dt = lattice.dt();
    let lag = (problem.tau() / dt).round() as usize;
    let w = lattice.correlate(problem.rho()).unwrap();
    let mut x = vec![1.0; lag + 1];
    for (dw1, dw2) in w.dw1.iter().zip(&w.dw2) {
        let n = x.len() - 1;
        let (now, delayed) = (x[n], x[n - lag]);
        x.push(
            now + (problem.mu() * now + problem.f().eval(delayed)) * dt
                + problem.sigma() * now * dw1
                + problem.g().eval(delayed) * dw2,
        );
    }
    x.split_off(lag)
}

#[test]
fn reference_agrees_with_euler_maruyama_under_correlation() {
    let mut p = SddeProblem::example1(0.9).unwrap().params();
    p.horizon = 2.0;
    let problem = SddeProblem::new(p).unwrap();
    let n_traj = 100;
    let fine_dt = 2f64.powi(-14);
    let steps = (problem.horizon() / fine_dt).round() as usize;
    let mut gaps = Vec::new();
    let mut scale = 0.0f64;
    for k in [8, 10, 12] {
        let mut worst_mean_sq = 0.0f64;
        let mut sums = vec![0.0; (1 << k) * 2 + 1];
        let mut magnitude = vec![0.0; (1 << k) * 2 + 1];
        for i in 0..n_traj {
            let fine = BrownianLattice::generate(TrajectoryKey::new(31, i), steps, fine_dt).unwrap();
            let lattice = fine.coarsen(1 << (14 - k)).unwrap();
            let em = euler_maruyama(&problem, &lattice);
            let reference = exact_path(&problem, &lattice).unwrap();
            for (s, (a, b)) in sums.iter_mut().zip(em.iter().zip(&reference.values)) {
                *s += (a - b) * (a - b);
            }
            for (m, b) in magnitude.iter_mut().zip(&reference.values) {
                *m += b * b;
            }
        }
        scale = magnitude.iter().map(|m| m / n_traj as f64).fold(0.0, f64::max).sqrt();
        for s in &sums {
            worst_mean_sq = worst_mean_sq.max(s / n_traj as f64);
        }
        gaps.push(worst_mean_sq.sqrt());
    }
    // both are order one half; the gap must shrink with the step
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
    assert!(gaps[0] / gaps[2] > 2.5, "{gaps:?}");
    assert!(gaps[2] < 0.1 * scale, "{gaps:?} against {scale}");
}

#[test]
fn lie_trotter_gap_shrinks_from_two_to_ten_to_eleven() {
    let mut cfg = Preset::Example1Desk.config();
    cfg.dt_grid = vec![2f64.powi(-10), 2f64.powi(-11)];
    let study = run_convergence_study(&cfg, 0.0).unwrap();
    let (coarse, fine) = (study.rows[0].rms_error, study.rows[1].rms_error);
    assert!(fine > 0.0 && fine < coarse, "{coarse} {fine}");
}

#[test]
fn scheme_and_reference_coincide_at_mesh_points_without_noise() {
    // σ = 0, g ≡ 0 on [0, 1]: the Euler drift of a constant history is exact
    let problem = dde_problem(1.0);
    let fine = BrownianLattice::from_increments(2f64.powi(-8), vec![0.0; 256], vec![0.0; 256]).unwrap();
    let reference = exact_path(&problem, &fine).unwrap();
    let mesh = sdde_split::UniformMesh::new(&problem, 2f64.powi(-4)).unwrap();
    let noise = Scheme::LieTrotter.noise_from(&fine, &mesh).unwrap();
    let path = Scheme::LieTrotter.simulate(&problem, &mesh, &noise).unwrap();
    let sampled = reference.every(16).unwrap();
    for (a, b) in path.values.iter().zip(&sampled) {
        assert!((a - b).abs() < 1e-14);
    }
}
