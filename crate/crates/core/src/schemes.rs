//! Lie-Trotter and Strang splitting.
//!
//! The equation splits into the delayed subsystem
//! `dY = f(Y(t-τ)) dt + g(Y(t-τ)) dB₂`, advanced by an Euler-Maruyama map
//! [`psi1`], and the linear subsystem, advanced exactly by [`psi2`].

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SddeProblem;
use crate::noise::BrownianLattice;
use crate::propagator::{IntervalIncrement, Propagator};

/// Relative tolerance for treating a step ratio as an integer.
pub(crate) const RATIO_TOL: f64 = 1e-9;

pub(crate) fn integer_ratio(num: f64, den: f64) -> Option<usize> {
    let r = num / den;
    let k = r.round();
    (k >= 1.0 && (r - k).abs() <= RATIO_TOL * r).then_some(k as usize)
}

/// Uniform mesh `t_n = n·dt` on `[0, T]` with delay lag `⌊τ/dt⌋`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformMesh {
    pub dt: f64,
    pub n_steps: usize,
    pub lag: usize,
    /// Whether `τ/dt` is an integer.
    pub exact_lag: bool,
}

impl UniformMesh {
    pub fn new(problem: &SddeProblem, dt: f64) -> Result<Self> {
        let (tau, horizon) = (problem.tau(), problem.horizon());
        if !(dt > 0.0) || !(dt < tau.min(1.0)) {
            return Err(Error::param(
                "dt",
                format!("step {dt} must satisfy 0 < dt < min(tau, 1)"),
            ));
        }
        let n = (horizon / dt).round();
        if n < 1.0 || (n * dt - horizon).abs() > 1e-12 * horizon {
            return Err(Error::param(
                "dt",
                format!("step {dt} does not divide the horizon {horizon}"),
            ));
        }
        let (lag, exact_lag) = match integer_ratio(tau, dt) {
            Some(l) => (l, true),
            None => {
                let l = (tau / dt).floor() as usize;
                log::warn!(
                    "tau/dt = {} is fractional; using lag {l}, which biases the delay by O(dt)",
                    tau / dt
                );
                (l, false)
            }
        };
        Ok(Self {
            dt,
            n_steps: n as usize,
            lag,
            exact_lag,
        })
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    /// `ψ((i - L)·dt)` for `i = 0..=L`.
    pub fn history(&self, problem: &SddeProblem) -> Vec<f64> {
        (0..=self.lag)
            .map(|i| problem.psi().eval((i as f64 - self.lag as f64) * self.dt))
            .collect()
    }
}

/// Scheme output at mesh points, including the history segment.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryGrid {
    pub mesh: UniformMesh,
    pub history: Vec<f64>,
    /// `X_0 … X_N`
    pub values: Vec<f64>,
}

impl TrajectoryGrid {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(|n| self.mesh.time(n))
    }

    /// `t,X` rows on `[0, T]`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        crate::csv::write_path(w, self.times().zip(self.values.iter().copied()))
    }
}

/// Euler-Maruyama map of the delayed subsystem: `r + f(r_τ)·span + g(r_τ)·ΔB₂`.
#[inline]
pub fn psi1(r: f64, r_tau: f64, span: f64, db2: f64, problem: &SddeProblem) -> f64 {
    r + problem.f().eval(r_tau) * span + problem.g().eval(r_tau) * db2
}

/// Exact flow of the linear subsystem: `r·Φ`.
#[inline]
pub fn psi2(r: f64, inc: IntervalIncrement, problem: &SddeProblem) -> f64 {
    r * Propagator::new(problem).phi(inc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    LieTrotter,
    Strang,
}

impl Scheme {
    pub const ALL: [Scheme; 2] = [Scheme::LieTrotter, Scheme::Strang];

    /// Noise resolution the scheme consumes: full steps for Lie-Trotter,
    /// half steps for Strang.
    pub fn substeps(self) -> usize {
        match self {
            Scheme::LieTrotter => 1,
            Scheme::Strang => 2,
        }
    }

    /// Coarsens a fine lattice to the resolution this scheme needs on `mesh`.
    pub fn noise_from(self, fine: &BrownianLattice, mesh: &UniformMesh) -> Result<BrownianLattice> {
        let target = mesh.dt / self.substeps() as f64;
        let m = integer_ratio(target, fine.dt()).ok_or_else(|| {
            Error::MeshMismatch(format!(
                "fine step {} does not refine {} step {target}",
                fine.dt(),
                self
            ))
        })?;
        fine.coarsen(m)
    }

    pub fn simulate(
        self,
        problem: &SddeProblem,
        mesh: &UniformMesh,
        noise: &BrownianLattice,
    ) -> Result<TrajectoryGrid> {
        match self {
            Scheme::LieTrotter => lie_trotter(problem, mesh, noise),
            Scheme::Strang => strang(problem, mesh, noise),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::LieTrotter => "lie-trotter",
            Scheme::Strang => "strang",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lie-trotter" => Ok(Scheme::LieTrotter),
            "strang" => Ok(Scheme::Strang),
            other => Err(Error::Config(format!(
                "unknown scheme `{other}` (expected lie-trotter or strang)"
            ))),
        }
    }
}

fn check_noise(mesh: &UniformMesh, noise: &BrownianLattice, substeps: usize) -> Result<()> {
    let dt = mesh.dt / substeps as f64;
    if noise.n_steps() != mesh.n_steps * substeps || (noise.dt() - dt).abs() > 1e-12 * dt {
        return Err(Error::MeshMismatch(format!(
            "expected {} increments of {dt}, got {} of {}",
            mesh.n_steps * substeps,
            noise.n_steps(),
            noise.dt()
        )));
    }
    Ok(())
}

/// Runs a one-step map `step(n, x_n, x_{n-L}) -> x_{n+1}` over the mesh.
fn iterate(
    problem: &SddeProblem,
    mesh: &UniformMesh,
    mut step: impl FnMut(usize, f64, f64) -> f64,
) -> Result<TrajectoryGrid> {
    let history = mesh.history(problem);
    let lag = mesh.lag;
    let mut values = Vec::with_capacity(mesh.n_steps + 1);
    values.push(history[lag]);
    for n in 0..mesh.n_steps {
        let delayed = if n < lag { history[n] } else { values[n - lag] };
        let next = step(n, values[n], delayed);
        if !next.is_finite() {
            return Err(Error::NonFinite {
                step: n + 1,
                time: mesh.time(n + 1),
            });
        }
        values.push(next);
    }
    Ok(TrajectoryGrid {
        mesh: *mesh,
        history,
        values,
    })
}

/// `X_{n+1} = Φ_{t_n}(t_{n+1}) (X_n + dt·f(X_{n-L}) + g(X_{n-L})·ΔB₂)`.
///
/// `noise` holds one increment pair per mesh step.
pub fn lie_trotter(
    problem: &SddeProblem,
    mesh: &UniformMesh,
    noise: &BrownianLattice,
) -> Result<TrajectoryGrid> {
    check_noise(mesh, noise, 1)?;
    let prop = Propagator::new(problem);
    let (f, g, dt) = (problem.f(), problem.g(), mesh.dt);
    iterate(problem, mesh, |n, x, delayed| {
        let inc = noise.step(n);
        (x + f.eval(delayed) * dt + g.eval(delayed) * inc.db2) * prop.phi(inc)
    })
}

/// Half Euler step, full exact linear step, half Euler step. The delayed
/// argument `X_{n-L}` is the same in both half steps.
///
/// `noise` holds two increment pairs per mesh step; the linear flow uses
/// their sum.
pub fn strang(
    problem: &SddeProblem,
    mesh: &UniformMesh,
    noise: &BrownianLattice,
) -> Result<TrajectoryGrid> {
    check_noise(mesh, noise, 2)?;
    let prop = Propagator::new(problem);
    let (f, g) = (problem.f(), problem.g());
    let half = 0.5 * mesh.dt;
    iterate(problem, mesh, |n, x, delayed| {
        let first = noise.step(2 * n);
        let second = noise.step(2 * n + 1);
        let (fd, gd) = (f.eval(delayed), g.eval(delayed));
        let y = x + fd * half + gd * first.db2;
        y * prop.phi(first.join(second)) + fd * half + gd * second.db2
    })
}
