//! Oracles shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sdde_split::experiment::{fit_order, run_convergence_study};
use sdde_split::model::ProblemParams;
use sdde_split::propagator::{phi, IntervalIncrement};
use sdde_split::reference::exact_path;
use sdde_split::schemes::psi1;
use sdde_split::{
    BrownianLattice, Coefficient, ConvergenceStudy, InitialFunction, Scheme, SddeProblem,
    StudyConfig, TrajectoryKey, UniformMesh,
};

/// `x'(t) = -x(t-1)`, `x ≡ 1` on `[-1, 0]`.
pub fn dde_problem(horizon: f64) -> SddeProblem {
    SddeProblem::new(ProblemParams {
        mu: 0.0,
        sigma: 0.0,
        rho: 0.0,
        tau: 1.0,
        horizon,
        f: Coefficient::Linear(-1.0),
        g: Coefficient::zero(),
        psi: InitialFunction::Constant(1.0),
    })
    .unwrap()
}

/// Method-of-steps solution: on `[n-1, n]`, `x = Σ_{k≤n} (-1)^k (t-k+1)^k / k!`.
pub fn dde_exact(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let n = t.ceil() as i32;
    let mut sum = 0.0;
    let mut fact = 1.0;
    for k in 0..=n {
        if k > 0 {
            fact *= k as f64;
        }
        sum += (-1f64).powi(k) * (t - (k - 1) as f64).powi(k) / fact;
    }
    sum
}

/// Max absolute reference error at fine nodes on `[0, horizon]`.
pub fn dde_max_error(dt_fine: f64, horizon: f64) -> f64 {
    let problem = dde_problem(horizon);
    let n = (horizon / dt_fine).round() as usize;
    let lattice = BrownianLattice::from_increments(dt_fine, vec![0.0; n], vec![0.0; n]).unwrap();
    let path = exact_path(&problem, &lattice).unwrap();
    path.values
        .iter()
        .enumerate()
        .map(|(k, x)| (x - dde_exact(k as f64 * dt_fine)).abs())
        .fold(0.0, f64::max)
}

/// Fitted order of the reference's max error over `[0, 4]`.
pub fn dde_self_convergence(steps: &[f64]) -> (f64, Vec<f64>) {
    let errors: Vec<f64> = steps.iter().map(|&dt| dde_max_error(dt, 4.0)).collect();
    let points: Vec<(f64, f64)> = steps.iter().copied().zip(errors.iter().copied()).collect();
    (fit_order(&points).unwrap().gamma, errors)
}

/// Example 1 coefficients with `f ≡ g ≡ 0`.
pub fn linear_problem(rho: f64) -> SddeProblem {
    let mut p = SddeProblem::example1(rho).unwrap().params();
    p.f = Coefficient::zero();
    p.g = Coefficient::zero();
    p.psi = InitialFunction::Constant(0.75);
    SddeProblem::new(p).unwrap()
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Largest relative gap between `ψ(0)·Φ₀(tₙ)` (a running product of
/// fine-step exponentials) and both schemes and the reference, over every
/// mesh point of every step size in `dt_grid`.
pub fn linear_exactness_gap(
    rho: f64,
    dt_fine: f64,
    dt_grid: &[f64],
    n_trajectories: u64,
    seed: u64,
) -> f64 {
    let problem = linear_problem(rho);
    let (mu, sigma) = (problem.mu(), problem.sigma());
    let c = (1.0 - rho * rho).sqrt();
    let steps = (problem.horizon() / dt_fine).round() as usize;
    let mut worst = 0.0f64;
    for i in 0..n_trajectories {
        let fine = BrownianLattice::generate(TrajectoryKey::new(seed, i), steps, dt_fine).unwrap();
        let mut exact = Vec::with_capacity(steps + 1);
        let mut x = 0.75;
        exact.push(x);
        for (b1, b2) in fine.db1().iter().zip(fine.db2()) {
            x *= ((mu - 0.5 * sigma * sigma) * dt_fine + sigma * (c * b1 + rho * b2)).exp();
            exact.push(x);
        }

        let reference = exact_path(&problem, &fine).unwrap();
        for (r, e) in reference.values.iter().zip(&exact) {
            worst = worst.max(relative_gap(*r, *e));
        }
        for &dt in dt_grid {
            let mesh = UniformMesh::new(&problem, dt).unwrap();
            let stride = (dt / dt_fine).round() as usize;
            for scheme in Scheme::ALL {
                let noise = scheme.noise_from(&fine, &mesh).unwrap();
                let path = scheme.simulate(&problem, &mesh, &noise).unwrap();
                for (n, y) in path.values.iter().enumerate() {
                    worst = worst.max(relative_gap(*y, exact[n * stride]));
                }
            }
        }
    }
    worst
}

/// Second moments `E|Y(t_n + h) - Y(t_n)|²` of the Lie-Trotter interpolant
/// inside one step, for `h = dt·2^-j`, `j = 0..=log2(substeps)`.
pub struct Regularity {
    pub spans: Vec<f64>,
    pub moments: Vec<f64>,
    pub exponent: f64,
}

pub fn lie_trotter_regularity(rho: f64, n_trajectories: u64, seed: u64) -> Regularity {
    let mut p = SddeProblem::example1(rho).unwrap().params();
    p.horizon = 3.0;
    let problem = SddeProblem::new(p).unwrap();
    let dt = 2f64.powi(-6);
    let substeps = 16usize;
    let dt_fine = dt / substeps as f64;
    let mesh = UniformMesh::new(&problem, dt).unwrap();
    let step = 150;
    let steps = (problem.horizon() / dt_fine).round() as usize;
    let spans_in_fine: Vec<usize> = vec![1, 2, 4, 8, 16];

    let mut sums = vec![0.0; spans_in_fine.len()];
    for i in 0..n_trajectories {
        let fine = BrownianLattice::generate(TrajectoryKey::new(seed, i), steps, dt_fine).unwrap();
        let noise = fine.coarsen(substeps).unwrap();
        let path = Scheme::LieTrotter.simulate(&problem, &mesh, &noise).unwrap();
        let x = path.values[step];
        let delayed = path.values[step - mesh.lag];
        for (s, &m) in sums.iter_mut().zip(&spans_in_fine) {
            let base = step * substeps;
            let db1: f64 = fine.db1()[base..base + m].iter().sum();
            let db2: f64 = fine.db2()[base..base + m].iter().sum();
            let h = m as f64 * dt_fine;
            let y = phi(&problem, IntervalIncrement::new(h, db1, db2)) * psi1(x, delayed, h, db2, &problem);
            if m == substeps {
                assert!(relative_gap(y, path.values[step + 1]) < 1e-12);
            }
            *s += (y - x) * (y - x);
        }
    }
    let spans: Vec<f64> = spans_in_fine.iter().map(|&m| m as f64 * dt_fine).collect();
    let moments: Vec<f64> = sums.iter().map(|s| s / n_trajectories as f64).collect();
    let points: Vec<(f64, f64)> = spans.iter().copied().zip(moments.iter().copied()).collect();
    let exponent = fit_order(&points).unwrap().gamma;
    Regularity {
        spans,
        moments,
        exponent,
    }
}

/// Worst relative cocycle gap over random parameter and increment draws.
pub fn cocycle_max_gap(samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let mut p = SddeProblem::example1(0.0).unwrap().params();
        p.mu = rng.random_range(-2.0..2.0);
        p.sigma = rng.random_range(0.0..2.0);
        p.rho = rng.random_range(-0.99..0.99);
        let problem = SddeProblem::new(p).unwrap();
        let mut inc = || {
            let dt: f64 = rng.random_range(1e-6..0.5);
            let s = dt.sqrt();
            IntervalIncrement::new(dt, rng.random_range(-3.0..3.0) * s, rng.random_range(-3.0..3.0) * s)
        };
        let (a, b) = (inc(), inc());
        let joined = phi(&problem, a.join(b));
        worst = worst.max(relative_gap(phi(&problem, a) * phi(&problem, b), joined));
    }
    worst
}

/// Standardised deviations of `(Var ΔW₁, Var ΔW₂, Cov)` from `(dt, dt, ρ·dt)`.
pub fn covariance_z_scores(rho: f64, n: usize, dt: f64, seed: u64) -> [f64; 3] {
    let lattice = BrownianLattice::generate(TrajectoryKey::new(seed, 0), n, dt).unwrap();
    let w = lattice.correlate(rho).unwrap();
    let z = |xs: Vec<f64>, target: f64| {
        let m = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / m;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
        (mean - target) / (var / m).sqrt()
    };
    let sq1 = w.dw1.iter().map(|x| x * x).collect();
    let sq2 = w.dw2.iter().map(|x| x * x).collect();
    let cross = w.dw1.iter().zip(&w.dw2).map(|(a, b)| a * b).collect();
    [z(sq1, dt), z(sq2, dt), z(cross, rho * dt)]
}

/// Worst gap between one-stage and two-stage coarsening, relative to the sum
/// of absolute fine increments in the block (the scale reassociation error is
/// proportional to; the block sum itself may nearly cancel).
pub fn coarsening_max_gap(seed: u64) -> f64 {
    let n = 8 * 3 * 5 * 64;
    let dt = 2f64.powi(-12);
    let fine = BrownianLattice::generate(TrajectoryKey::new(seed, 1), n, dt).unwrap();
    let abs = |xs: &[f64]| xs.iter().map(|x| x.abs()).collect::<Vec<_>>();
    let magnitude = BrownianLattice::from_increments(dt, abs(fine.db1()), abs(fine.db2())).unwrap();
    let mut worst = 0.0f64;
    for (m1, m2) in [(2, 8), (3, 24), (5, 60), (4, 64), (8, 960)] {
        let direct = fine.coarsen(m2).unwrap();
        let staged = fine.coarsen(m1).unwrap().coarsen(m2 / m1).unwrap();
        let scale = magnitude.coarsen(m2).unwrap();
        let flat = |l: &BrownianLattice| l.db1().iter().chain(l.db2()).copied().collect::<Vec<_>>();
        for ((a, b), s) in flat(&direct).iter().zip(flat(&staged)).zip(flat(&scale)) {
            worst = worst.max((a - b).abs() / s);
        }
        worst = worst.max(relative_gap(staged.dt(), direct.dt()));
    }
    worst
}

/// Runs a study inside a dedicated pool of `threads` workers.
pub fn study_on_threads(config: &StudyConfig, rho: f64, threads: usize) -> ConvergenceStudy {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(|| run_convergence_study(config, rho).unwrap())
}

/// Small Example 1 study used for determinism checks.
pub fn small_config(scheme: Scheme) -> StudyConfig {
    let mut cfg = sdde_split::config::Preset::Example1Desk.config();
    let mut p = cfg.problem.params();
    p.horizon = 2.0;
    cfg.problem = SddeProblem::new(p).unwrap();
    cfg.scheme = scheme;
    cfg.dt_grid = vec![2f64.powi(-4), 2f64.powi(-5), 2f64.powi(-6)];
    cfg.dt_reference = 2f64.powi(-10);
    cfg.n_groups = 6;
    cfg.group_size = 7;
    cfg.n_trajectories = 42;
    cfg
}

/// Same fit, same per-dt RMS bits, same group slopes.
pub fn bitwise_equal(a: &ConvergenceStudy, b: &ConvergenceStudy) -> bool {
    let bits = |s: &ConvergenceStudy| {
        let mut v: Vec<u64> = s
            .rows
            .iter()
            .flat_map(|r| {
                std::iter::once(r.rms_error)
                    .chain(r.mean_sq.iter().copied())
                    .chain(r.group_rms.iter().copied())
            })
            .chain(s.group_gammas.iter().copied())
            .map(f64::to_bits)
            .collect();
        if let Some(f) = s.fit {
            v.extend([f.gamma, f.gamma_std, f.log_intercept, f.residual].map(f64::to_bits));
        }
        v
    };
    bits(a) == bits(b)
}
