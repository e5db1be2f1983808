//! Monte Carlo strong-error studies.
//!
//! For every trajectory one fine lattice is generated; the reference path is
//! computed on it and every step size in the grid runs the scheme on a block
//! coarsening of the same lattice. Squared errors at coarse mesh points are
//! accumulated per group of trajectories, in trajectory order, so the result
//! does not depend on how trajectories are scheduled.
//!
//! ```text
//! E_RMS(dt) = sqrt( max_k  mean_i |X_i(t_k) - Y_i(t_k)|² )
//! log E_RMS ≈ log C + γ log dt
//! ```

use std::io::Write;

use crate::csv::sci;
use crate::error::{Error, Result};
use crate::model::SddeProblem;
use crate::noise::{BrownianLattice, TrajectoryKey};
use crate::reference::exact_path;
use crate::schemes::{integer_ratio, UniformMesh};

pub use crate::schemes::Scheme;

/// Errors at or below this fraction of the reference magnitude are treated
/// as exact; no order is fitted to them.
pub const EXACTNESS_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct StudyConfig {
    /// Coefficients and horizon; its own `rho` is replaced per study.
    pub problem: SddeProblem,
    pub scheme: Scheme,
    pub rho_grid: Vec<f64>,
    pub dt_grid: Vec<f64>,
    pub dt_reference: f64,
    pub n_trajectories: usize,
    pub n_groups: usize,
    pub group_size: usize,
    pub master_seed: u64,
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_groups == 0 || self.group_size == 0 {
            return Err(Error::param("n_groups", "groups must be non-empty"));
        }
        if self.n_groups * self.group_size != self.n_trajectories {
            return Err(Error::param(
                "n_trajectories",
                format!(
                    "{} groups of {} do not make {} trajectories",
                    self.n_groups, self.group_size, self.n_trajectories
                ),
            ));
        }
        if self.dt_grid.is_empty() {
            return Err(Error::EmptyInput("dt_grid"));
        }
        if let Some(&rho) = self.rho_grid.iter().find(|r| !(r.abs() < 1.0)) {
            return Err(Error::RhoOutOfRange(rho));
        }
        if integer_ratio(self.problem.tau(), self.dt_reference).is_none() {
            return Err(Error::param(
                "dt_reference",
                format!("{} does not divide tau = {}", self.dt_reference, self.problem.tau()),
            ));
        }
        for &dt in &self.dt_grid {
            let mesh = UniformMesh::new(&self.problem, dt)?;
            if !mesh.exact_lag {
                return Err(Error::param(
                    "dt_grid",
                    format!("tau / {dt} must be an integer for convergence studies"),
                ));
            }
            if integer_ratio(0.5 * dt, self.dt_reference).is_none() {
                return Err(Error::param(
                    "dt_grid",
                    format!(
                        "dt_reference {} must divide {dt} and its half step",
                        self.dt_reference
                    ),
                ));
            }
        }
        Ok(())
    }

    fn fine_steps(&self) -> usize {
        (self.problem.horizon() / self.dt_reference).round() as usize
    }
}

/// RMS errors for one step size.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub rho: f64,
    pub dt: f64,
    pub rms_error: f64,
    /// Mean squared error at each coarse mesh point over all trajectories.
    pub mean_sq: Vec<f64>,
    pub group_rms: Vec<f64>,
    /// Per group, mean squared error at each coarse mesh point.
    pub group_mean_sq: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderFit {
    pub gamma: f64,
    /// Natural log of the constant `C`.
    pub log_intercept: f64,
    /// Sample standard deviation of per-group slopes.
    pub gamma_std: f64,
    /// Root-mean-square regression residual.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub scheme: Scheme,
    pub rho: f64,
    pub n_trajectories: usize,
    pub dt_reference: f64,
    pub rows: Vec<ErrorRow>,
    /// `None` when the scheme is exact to rounding or too few errors are positive.
    pub fit: Option<OrderFit>,
    pub group_gammas: Vec<f64>,
    /// `max_k sqrt(mean |X(t_k)|²)` of the reference on the coarsest mesh.
    pub reference_scale: f64,
}

impl ConvergenceStudy {
    /// Largest-dt RMS over smallest-dt RMS.
    pub fn plateau_ratio(&self) -> f64 {
        let by_dt = |pick: fn(f64, f64) -> bool| {
            self.rows
                .iter()
                .fold(None::<&ErrorRow>, |best, r| match best {
                    Some(b) if !pick(r.dt, b.dt) => Some(b),
                    _ => Some(r),
                })
                .map(|r| r.rms_error)
                .unwrap_or(f64::NAN)
        };
        by_dt(|a, b| a > b) / by_dt(|a, b| a < b)
    }
}

/// `max_k sqrt(mean_i e_{i,k}²)` over a trajectories × mesh-points table.
pub fn rms_error(errors: &[Vec<f64>]) -> Result<f64> {
    let width = errors.first().map(Vec::len).unwrap_or(0);
    if width == 0 {
        return Err(Error::EmptyInput("error table"));
    }
    if errors.iter().any(|row| row.len() != width) {
        return Err(Error::param("errors", "ragged error table"));
    }
    let n = errors.len() as f64;
    let mean_sq: Vec<f64> = (0..width)
        .map(|k| errors.iter().map(|row| row[k] * row[k]).sum::<f64>() / n)
        .collect();
    Ok(rms_from_mean_sq(&mean_sq))
}

fn rms_from_mean_sq(mean_sq: &[f64]) -> f64 {
    mean_sq.iter().fold(0.0f64, |m, &v| m.max(v)).sqrt()
}

/// Least-squares slope of `ln E` against `ln dt`. Points with zero error are
/// dropped with a warning.
pub fn fit_order(points: &[(f64, f64)]) -> Result<OrderFit> {
    if points.iter().any(|&(dt, e)| !(dt > 0.0) || !(e >= 0.0)) {
        return Err(Error::param("points", "step sizes must be positive and errors non-negative"));
    }
    let kept: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(_, e)| e > 0.0)
        .map(|&(dt, e)| (dt.ln(), e.ln()))
        .collect();
    if kept.len() < points.len() {
        log::warn!("dropped {} zero-error points from the order fit", points.len() - kept.len());
    }
    let mut distinct: Vec<f64> = kept.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::TooFewPoints(distinct.len()));
    }

    let n = kept.len() as f64;
    let mx = kept.iter().map(|p| p.0).sum::<f64>() / n;
    let my = kept.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = kept.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = kept.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let gamma = sxy / sxx;
    let log_intercept = my - gamma * mx;
    let ss_res: f64 = kept
        .iter()
        .map(|p| (p.1 - log_intercept - gamma * p.0).powi(2))
        .sum();
    Ok(OrderFit {
        gamma,
        log_intercept,
        gamma_std: 0.0,
        residual: (ss_res / n).sqrt(),
    })
}

fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

#[cfg(feature = "parallel")]
fn map_ordered<T: Send>(range: std::ops::Range<u64>, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    range.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_ordered<T: Send>(range: std::ops::Range<u64>, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    range.map(f).collect()
}

/// Per-trajectory output: squared errors per step size, and squared
/// reference values on the coarsest mesh.
struct TrajectoryErrors {
    sq: Vec<Vec<f64>>,
    reference_sq: Vec<f64>,
}

struct Plan<'a> {
    config: &'a StudyConfig,
    problem: SddeProblem,
    meshes: Vec<UniformMesh>,
    strides: Vec<usize>,
    coarsest: usize,
}

impl<'a> Plan<'a> {
    fn new(config: &'a StudyConfig, rho: f64) -> Result<Self> {
        config.validate()?;
        let problem = config.problem.with_rho(rho)?;
        let meshes = config
            .dt_grid
            .iter()
            .map(|&dt| UniformMesh::new(&problem, dt))
            .collect::<Result<Vec<_>>>()?;
        let strides = config
            .dt_grid
            .iter()
            .map(|&dt| integer_ratio(dt, config.dt_reference).expect("validated"))
            .collect::<Vec<_>>();
        let coarsest = (0..strides.len()).max_by_key(|&i| strides[i]).unwrap_or(0);
        Ok(Self {
            config,
            problem,
            meshes,
            strides,
            coarsest,
        })
    }

    fn wrap(&self, dt: f64, trajectory: u64) -> impl FnOnce(Error) -> Error {
        let rho = self.problem.rho();
        move |e| Error::Trajectory {
            rho,
            dt,
            trajectory,
            source: Box::new(e),
        }
    }

    fn trajectory(&self, index: u64) -> Result<TrajectoryErrors> {
        let cfg = self.config;
        let key = TrajectoryKey::new(cfg.master_seed, index);
        let fine = BrownianLattice::generate(key, cfg.fine_steps(), cfg.dt_reference)?;
        let reference =
            exact_path(&self.problem, &fine).map_err(self.wrap(cfg.dt_reference, index))?;

        let mut sq = Vec::with_capacity(self.meshes.len());
        for (mesh, &stride) in self.meshes.iter().zip(&self.strides) {
            let noise = cfg.scheme.noise_from(&fine, mesh)?;
            let path = cfg
                .scheme
                .simulate(&self.problem, mesh, &noise)
                .map_err(self.wrap(mesh.dt, index))?;
            let exact = reference.every(stride)?;
            sq.push(
                path.values
                    .iter()
                    .zip(&exact)
                    .map(|(y, x)| (x - y) * (x - y))
                    .collect(),
            );
        }
        let reference_sq = reference
            .every(self.strides[self.coarsest])?
            .into_iter()
            .map(|x| x * x)
            .collect();
        Ok(TrajectoryErrors { sq, reference_sq })
    }
}

/// One convergence study at correlation `rho`.
pub fn run_convergence_study(config: &StudyConfig, rho: f64) -> Result<ConvergenceStudy> {
    let plan = Plan::new(config, rho)?;
    let widths: Vec<usize> = plan.meshes.iter().map(|m| m.n_steps + 1).collect();
    let n_dt = widths.len();

    // group_sums[g][d][k]
    let mut group_sums: Vec<Vec<Vec<f64>>> = Vec::with_capacity(config.n_groups);
    let mut reference_sum = vec![0.0; widths[plan.coarsest]];
    for g in 0..config.n_groups {
        let start = (g * config.group_size) as u64;
        let end = start + config.group_size as u64;
        let outputs = map_ordered(start..end, |i| plan.trajectory(i));
        let mut sums: Vec<Vec<f64>> = widths.iter().map(|&w| vec![0.0; w]).collect();
        for out in outputs {
            let out = out?;
            for (acc, sq) in sums.iter_mut().zip(&out.sq) {
                for (a, s) in acc.iter_mut().zip(sq) {
                    *a += s;
                }
            }
            for (a, s) in reference_sum.iter_mut().zip(&out.reference_sq) {
                *a += s;
            }
        }
        group_sums.push(sums);
    }

    let n = config.n_trajectories as f64;
    let gs = config.group_size as f64;
    let mut rows = Vec::with_capacity(n_dt);
    for d in 0..n_dt {
        let mut total = vec![0.0; widths[d]];
        for sums in &group_sums {
            for (t, s) in total.iter_mut().zip(&sums[d]) {
                *t += s;
            }
        }
        let mean_sq: Vec<f64> = total.iter().map(|s| s / n).collect();
        let group_mean_sq: Vec<Vec<f64>> = group_sums
            .iter()
            .map(|sums| sums[d].iter().map(|s| s / gs).collect())
            .collect();
        rows.push(ErrorRow {
            rho,
            dt: config.dt_grid[d],
            rms_error: rms_from_mean_sq(&mean_sq),
            group_rms: group_mean_sq.iter().map(|m| rms_from_mean_sq(m)).collect(),
            mean_sq,
            group_mean_sq,
        });
    }
    let reference_scale = rms_from_mean_sq(&reference_sum.iter().map(|s| s / n).collect::<Vec<_>>());

    let exact = rows
        .iter()
        .all(|r| r.rms_error <= EXACTNESS_FLOOR * reference_scale);
    let (fit, group_gammas) = if exact {
        log::warn!(
            "{} at rho = {rho}: errors at rounding level, no order fitted",
            config.scheme
        );
        (None, Vec::new())
    } else {
        let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.dt, r.rms_error)).collect();
        let group_gammas: Vec<f64> = (0..config.n_groups)
            .filter_map(|g| {
                let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.dt, r.group_rms[g])).collect();
                fit_order(&pts).ok().map(|f| f.gamma)
            })
            .collect();
        let fit = match fit_order(&points) {
            Ok(f) => Some(OrderFit {
                gamma_std: sample_std(&group_gammas),
                ..f
            }),
            Err(e) => {
                log::warn!("{} at rho = {rho}: {e}", config.scheme);
                None
            }
        };
        (fit, group_gammas)
    };

    if let Some(f) = &fit {
        log::info!(
            "{} rho = {rho:+.3}: gamma = {:.4} ± {:.4} ({} trajectories)",
            config.scheme,
            f.gamma,
            f.gamma_std,
            config.n_trajectories
        );
    }

    Ok(ConvergenceStudy {
        scheme: config.scheme,
        rho,
        n_trajectories: config.n_trajectories,
        dt_reference: config.dt_reference,
        rows,
        fit,
        group_gammas,
        reference_scale,
    })
}

/// One study per entry of `rho_grid`, all driven by the same fine lattices.
pub fn run_rho_sweep(config: &StudyConfig) -> Result<Vec<ConvergenceStudy>> {
    if config.rho_grid.is_empty() {
        return Err(Error::EmptyInput("rho_grid"));
    }
    config
        .rho_grid
        .iter()
        .map(|&rho| run_convergence_study(config, rho))
        .collect()
}

pub const ERRORS_HEADER: &str = "scheme,rho,dt,rms_error,group_id,group_rms";
pub const ORDERS_HEADER: &str =
    "scheme,rho,gamma,gamma_std,log_intercept,residual,n_trajectories,dt_reference";

/// One line per (rho, dt, group).
pub fn write_errors_csv<W: Write>(mut w: W, studies: &[ConvergenceStudy]) -> Result<()> {
    writeln!(w, "{ERRORS_HEADER}")?;
    for s in studies {
        for r in &s.rows {
            for (g, grms) in r.group_rms.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{},{},{g},{}",
                    s.scheme,
                    sci(s.rho),
                    sci(r.dt),
                    sci(r.rms_error),
                    sci(*grms)
                )?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// One line per study; unfitted studies carry `NaN`.
pub fn write_orders_csv<W: Write>(mut w: W, studies: &[ConvergenceStudy]) -> Result<()> {
    writeln!(w, "{ORDERS_HEADER}")?;
    for s in studies {
        let f = s.fit.unwrap_or(OrderFit {
            gamma: f64::NAN,
            log_intercept: f64::NAN,
            gamma_std: f64::NAN,
            residual: f64::NAN,
        });
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            s.scheme,
            sci(s.rho),
            sci(f.gamma),
            sci(f.gamma_std),
            sci(f.log_intercept),
            sci(f.residual),
            s.n_trajectories,
            sci(s.dt_reference)
        )?;
    }
    w.flush()?;
    Ok(())
}
