mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sdde_split::config::Preset;
use sdde_split::experiment::{run_convergence_study, run_rho_sweep};
use sdde_split::noise::BrownianLattice;
use sdde_split::{ConvergenceStudy, Scheme, TrajectoryKey, UniformMesh};

use common::*;

#[test]
fn interpolant_increments_scale_linearly_in_mean_square() {
    for rho in [0.0, -0.9] {
        let r = lie_trotter_regularity(rho, 10_000, 61);
        assert!((0.8..=1.2).contains(&r.exponent), "rho {rho}: {}", r.exponent);
        assert!(r.moments.windows(2).all(|w| w[0] < w[1]));
    }
}

/// `max_k E|Y_k|²` of Lie-Trotter for Example 1 on a shared fine lattice.
fn max_second_moment(dt: f64, fine_dt: f64, n_traj: u64) -> f64 {
    let problem = sdde_split::SddeProblem::example1(0.0).unwrap();
    let mesh = UniformMesh::new(&problem, dt).unwrap();
    let steps = (problem.horizon() / fine_dt).round() as usize;
    let mut sums = vec![0.0; mesh.n_steps + 1];
    for i in 0..n_traj {
        let fine = BrownianLattice::generate(TrajectoryKey::new(77, i), steps, fine_dt).unwrap();
        let noise = Scheme::LieTrotter.noise_from(&fine, &mesh).unwrap();
        let path = Scheme::LieTrotter.simulate(&problem, &mesh, &noise).unwrap();
        for (s, y) in sums.iter_mut().zip(&path.values) {
            *s += y * y;
        }
    }
    sums.iter().map(|s| s / n_traj as f64).fold(0.0, f64::max)
}

#[test]
fn second_moment_is_stable_under_refinement() {
    let fine = 2f64.powi(-10);
    let coarse = max_second_moment(2f64.powi(-6), fine, 200);
    let finer = max_second_moment(2f64.powi(-10), fine, 200);
    assert!(coarse.is_finite() && finer.is_finite());
    let variation = (coarse - finer).abs() / coarse.max(finer);
    assert!(variation < 0.25, "{coarse} vs {finer}");
}

fn gamma(s: &ConvergenceStudy) -> (f64, f64) {
    let f = s.fit.expect("fitted");
    (f.gamma, f.gamma_std)
}

fn check_sweep_shape(preset: Preset) {
    let studies = run_rho_sweep(&preset.config()).unwrap();
    let rhos: Vec<f64> = studies.iter().map(|s| s.rho).collect();
    assert_eq!(rhos, vec![-0.9, -0.6, -0.3, 0.0, 0.3, 0.6, 0.9]);

    // symmetric in the sign of rho, up to combined bars
    for k in 0..3 {
        let (a, sa) = gamma(&studies[k]);
        let (b, sb) = gamma(&studies[6 - k]);
        assert!((a - b).abs() <= sa + sb, "{preset}: rho {} {a}±{sa} vs {b}±{sb}", rhos[6 - k]);
    }
    // peak at zero, non-increasing in |rho| up to bars
    let (g0, _) = gamma(&studies[3]);
    for s in &studies {
        assert!(gamma(s).0 <= g0, "{preset}: rho {}", s.rho);
    }
    for side in [[3, 2, 1, 0], [3, 4, 5, 6]] {
        for w in side.windows(2) {
            let (inner, si) = gamma(&studies[w[0]]);
            let (outer, so) = gamma(&studies[w[1]]);
            assert!(outer <= inner + si + so, "{preset}: {} -> {}", studies[w[0]].rho, studies[w[1]].rho);
        }
    }
    for s in [&studies[0], &studies[6]] {
        assert!(s.plateau_ratio() < 2.0, "{preset}: rho {} plateau {}", s.rho, s.plateau_ratio());
    }
}

#[test]
fn example1_sweep_peaks_at_zero_and_is_symmetric() {
    check_sweep_shape(Preset::Example1Desk);
}

#[test]
fn example2_sweep_peaks_at_zero_and_is_symmetric() {
    check_sweep_shape(Preset::Example2Desk);
}

/// Fraction of bootstrap resamples of whole groups whose ensemble RMS is
/// strictly decreasing as the step shrinks.
fn monotone_fraction(study: &ConvergenceStudy, resamples: usize, seed: u64) -> f64 {
    let n_groups = study.rows[0].group_mean_sq.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0;
    for _ in 0..resamples {
        let picks: Vec<usize> = (0..n_groups).map(|_| rng.random_range(0..n_groups)).collect();
        let rms: Vec<f64> = study
            .rows
            .iter()
            .map(|row| {
                let width = row.mean_sq.len();
                (0..width)
                    .map(|k| picks.iter().map(|&g| row.group_mean_sq[g][k]).sum::<f64>() / n_groups as f64)
                    .fold(0.0, f64::max)
                    .sqrt()
            })
            .collect();
        // rows run from the largest step to the smallest
        if rms.windows(2).all(|w| w[1] < w[0]) {
            hits += 1;
        }
    }
    hits as f64 / resamples as f64
}

#[test]
fn errors_decrease_with_step_in_most_group_resamples() {
    // 2000 trajectories in 20 groups; at 200 the per-dt differences at the
    // fine end are within sampling noise
    let mut cfg = Preset::Example1Desk.config();
    cfg.group_size = 100;
    cfg.n_trajectories = 2000;
    let study = run_convergence_study(&cfg, 0.0).unwrap();
    let fraction = monotone_fraction(&study, 1000, 5);
    assert!(fraction >= 0.95, "{fraction}");
}

#[test]
#[ignore = "fails at the 200-trajectory desk ensemble; see the README"]
fn errors_decrease_with_step_in_most_group_resamples_at_desk_scale() {
    let study = run_convergence_study(&Preset::Example1Desk.config(), 0.0).unwrap();
    let fraction = monotone_fraction(&study, 1000, 5);
    assert!(fraction >= 0.95, "{fraction}");
}
