//! Browser bindings: trajectories, an error-vs-step curve and a small order
//! sweep, all at a reduced scale that finishes in a few seconds on one core.

use wasm_bindgen::prelude::*;

use sdde_split::experiment::{run_convergence_study, run_rho_sweep};
use sdde_split::reference::exact_path;
use sdde_split::{BrownianLattice, ConvergenceStudy, Scheme, SddeProblem, StudyConfig, TrajectoryKey, UniformMesh};

/// Reference step used by every demo computation.
pub const DEMO_REFERENCE_LOG2: i32 = 12;
/// Demo step grid `2^-4 … 2^-8`.
pub const DEMO_STEP_LOG2: [i32; 5] = [4, 5, 6, 7, 8];

fn problem(example: u8, rho: f64) -> Result<SddeProblem, String> {
    match example {
        1 => SddeProblem::example1(rho),
        2 => SddeProblem::example2(rho),
        other => return Err(format!("unknown example {other}")),
    }
    .map_err(|e| e.to_string())
}

fn scheme(name: &str) -> Result<Scheme, String> {
    name.parse().map_err(|e: sdde_split::Error| e.to_string())
}

/// One shared-noise trajectory: reference sampled at the mesh, Lie-Trotter
/// and Strang on the mesh.
#[wasm_bindgen]
pub struct Paths {
    times: Vec<f64>,
    reference: Vec<f64>,
    lie_trotter: Vec<f64>,
    strang: Vec<f64>,
}

#[wasm_bindgen]
impl Paths {
    pub fn times(&self) -> Vec<f64> {
        self.times.clone()
    }
    pub fn reference(&self) -> Vec<f64> {
        self.reference.clone()
    }
    pub fn lie_trotter(&self) -> Vec<f64> {
        self.lie_trotter.clone()
    }
    pub fn strang(&self) -> Vec<f64> {
        self.strang.clone()
    }
}

pub fn paths(example: u8, rho: f64, step_log2: i32, seed: u64, trajectory: u64) -> Result<Paths, String> {
    let problem = problem(example, rho)?;
    if !(1..=DEMO_REFERENCE_LOG2 - 1).contains(&step_log2) {
        return Err(format!("step 2^-{step_log2} outside 2^-1 … 2^-{}", DEMO_REFERENCE_LOG2 - 1));
    }
    let dt_fine = 2f64.powi(-DEMO_REFERENCE_LOG2);
    let steps = (problem.horizon() / dt_fine).round() as usize;
    let fine = BrownianLattice::generate(TrajectoryKey::new(seed, trajectory), steps, dt_fine)
        .map_err(|e| e.to_string())?;
    let mesh = UniformMesh::new(&problem, 2f64.powi(-step_log2)).map_err(|e| e.to_string())?;
    let run = |s: Scheme| -> Result<Vec<f64>, String> {
        let noise = s.noise_from(&fine, &mesh).map_err(|e| e.to_string())?;
        Ok(s.simulate(&problem, &mesh, &noise).map_err(|e| e.to_string())?.values)
    };
    let reference = exact_path(&problem, &fine)
        .and_then(|r| r.every(1 << (DEMO_REFERENCE_LOG2 - step_log2)))
        .map_err(|e| e.to_string())?;
    Ok(Paths {
        times: (0..=mesh.n_steps).map(|n| mesh.time(n)).collect(),
        reference,
        lie_trotter: run(Scheme::LieTrotter)?,
        strang: run(Scheme::Strang)?,
    })
}

/// Error table and fitted order of one study.
#[wasm_bindgen]
pub struct Curve {
    rho: f64,
    dts: Vec<f64>,
    rms: Vec<f64>,
    gamma: f64,
    gamma_std: f64,
}

#[wasm_bindgen]
impl Curve {
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn dts(&self) -> Vec<f64> {
        self.dts.clone()
    }
    pub fn rms(&self) -> Vec<f64> {
        self.rms.clone()
    }
    /// NaN when no order could be fitted.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn gamma_std(&self) -> f64 {
        self.gamma_std
    }
}

impl From<&ConvergenceStudy> for Curve {
    fn from(s: &ConvergenceStudy) -> Self {
        let (gamma, gamma_std) = s.fit.map_or((f64::NAN, f64::NAN), |f| (f.gamma, f.gamma_std));
        Curve {
            rho: s.rho,
            dts: s.rows.iter().map(|r| r.dt).collect(),
            rms: s.rows.iter().map(|r| r.rms_error).collect(),
            gamma,
            gamma_std,
        }
    }
}

/// Demo-scale study configuration: `groups` groups of 5 trajectories.
pub fn demo_config(example: u8, scheme_name: &str, groups: usize, seed: u64) -> Result<StudyConfig, String> {
    if groups < 2 {
        return Err("need at least two groups for error bars".into());
    }
    Ok(StudyConfig {
        problem: problem(example, 0.0)?,
        scheme: scheme(scheme_name)?,
        rho_grid: vec![-0.9, -0.5, 0.0, 0.5, 0.9],
        dt_grid: DEMO_STEP_LOG2.iter().map(|&k| 2f64.powi(-k)).collect(),
        dt_reference: 2f64.powi(-DEMO_REFERENCE_LOG2),
        n_trajectories: groups * 5,
        n_groups: groups,
        group_size: 5,
        master_seed: seed,
    })
}

pub fn curve(example: u8, scheme_name: &str, rho: f64, groups: usize, seed: u64) -> Result<Curve, String> {
    let cfg = demo_config(example, scheme_name, groups, seed)?;
    let study = run_convergence_study(&cfg, rho).map_err(|e| e.to_string())?;
    Ok(Curve::from(&study))
}

pub fn sweep(example: u8, scheme_name: &str, groups: usize, seed: u64) -> Result<Vec<Curve>, String> {
    let cfg = demo_config(example, scheme_name, groups, seed)?;
    let studies = run_rho_sweep(&cfg).map_err(|e| e.to_string())?;
    Ok(studies.iter().map(Curve::from).collect())
}

#[wasm_bindgen(js_name = simulatePaths)]
pub fn simulate_paths(example: u8, rho: f64, step_log2: i32, seed: u64, trajectory: u64) -> Result<Paths, JsError> {
    paths(example, rho, step_log2, seed, trajectory).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = errorCurve)]
pub fn error_curve(example: u8, scheme: &str, rho: f64, groups: usize, seed: u64) -> Result<Curve, JsError> {
    curve(example, scheme, rho, groups, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = orderSweep)]
pub fn order_sweep(example: u8, scheme: &str, groups: usize, seed: u64) -> Result<Vec<Curve>, JsError> {
    sweep(example, scheme, groups, seed).map_err(|e| JsError::new(&e))
}
