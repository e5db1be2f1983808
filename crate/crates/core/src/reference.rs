//! Reference solution by the method of steps.
//!
//! On each delay interval `(jτ, (j+1)τ]` the delayed argument
//! `ψ_j(s) = X(s - τ)` is already known, so the equation is linear and
//!
//! ```text
//! X(t) = Φ_{jτ}(t) ( X(jτ) + ∫ Φ_{jτ}⁻¹(s) [f(ψ_j(s)) - ρσ g(ψ_j(s))] ds
//!                          + ∫ Φ_{jτ}⁻¹(s) g(ψ_j(s)) dB₂(s) ).
//! ```
//!
//! The `ds` integral uses the composite trapezoid rule on the fine nodes and
//! the `dB₂` integral uses the left-point (Itô) rectangle sum.

use std::io::Write;

use crate::error::{Error, Result};
use crate::model::SddeProblem;
use crate::noise::BrownianLattice;
use crate::propagator::Propagator;
use crate::schemes::integer_ratio;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftRule {
    Trapezoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ItoRule {
    LeftPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quadrature {
    pub drift: DriftRule,
    pub ito: ItoRule,
}

/// Relative tolerance between the running product `∏ Φ⁻¹` and `exp(-Σ exponent)`
/// at the end of each delay interval.
pub const PROPAGATOR_DRIFT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePath {
    pub dt: f64,
    pub n_steps: usize,
    /// Fine steps per delay.
    pub lag: usize,
    /// `X(-τ + i·dt)`, `i = 0..=lag`.
    pub history: Vec<f64>,
    /// `X(k·dt)`, `k = 0..=n_steps`.
    pub values: Vec<f64>,
    pub quadrature: Quadrature,
}

/// Reference path on the lattice mesh, driven by the lattice's increments.
pub fn exact_path(problem: &SddeProblem, lattice: &BrownianLattice) -> Result<ReferencePath> {
    let dt = lattice.dt();
    let lag = integer_ratio(problem.tau(), dt).ok_or_else(|| {
        Error::MeshMismatch(format!("fine step {dt} does not divide tau = {}", problem.tau()))
    })?;
    let n_steps = lag * problem.n_delays();
    if lattice.n_steps() != n_steps {
        return Err(Error::MeshMismatch(format!(
            "lattice spans {} steps of {dt}, horizon needs {n_steps}",
            lattice.n_steps()
        )));
    }

    let prop = Propagator::new(problem);
    let (f, g) = (problem.f(), problem.g());
    let rho_sigma = problem.rho() * problem.sigma();
    let drift_integrand = |delayed: f64| f.eval(delayed) - rho_sigma * g.eval(delayed);

    // x[i] = X(-τ + i·dt)
    let mut x = Vec::with_capacity(lag + n_steps + 1);
    x.extend((0..=lag).map(|i| problem.psi().eval((i as f64 - lag as f64) * dt)));

    for j in 0..problem.n_delays() {
        let base = lag + j * lag;
        let x0 = x[base];
        let mut phi = 1.0;
        let mut phi_inv = 1.0;
        let mut exponent = 0.0;
        let mut ds_integral = 0.0;
        let mut ito_integral = 0.0;
        // integrands at the left node
        let mut delayed = x[base - lag];
        let mut h_ds = drift_integrand(delayed);
        for k in 0..lag {
            let inc = lattice.step(j * lag + k);
            ito_integral += phi_inv * g.eval(delayed) * inc.db2;

            let e = prop.exponent(inc);
            exponent += e;
            phi *= e.exp();
            phi_inv *= (-e).exp();

            delayed = x[base + k + 1 - lag];
            let h_next = phi_inv * drift_integrand(delayed);
            ds_integral += 0.5 * dt * (h_ds + h_next);
            h_ds = h_next;

            let value = phi * (x0 + ds_integral + ito_integral);
            if !value.is_finite() {
                return Err(Error::NonFinite {
                    step: j * lag + k + 1,
                    time: (j * lag + k + 1) as f64 * dt,
                });
            }
            x.push(value);
        }
        let direct = (-exponent).exp();
        let gap = (phi_inv - direct).abs() / direct;
        if !(gap <= PROPAGATOR_DRIFT_TOL) {
            return Err(Error::PropagatorDrift {
                interval: j,
                relative_gap: gap,
            });
        }
    }

    let values = x.split_off(lag);
    x.push(values[0]);
    Ok(ReferencePath {
        dt,
        n_steps,
        lag,
        history: x,
        values,
        quadrature: Quadrature {
            drift: DriftRule::Trapezoid,
            ito: ItoRule::LeftPoint,
        },
    })
}

impl ReferencePath {
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    /// Stored values at the requested times; each must sit on a fine node
    /// within `1e-9`.
    pub fn sample_at(&self, times: &[f64]) -> Result<Vec<f64>> {
        times
            .iter()
            .map(|&t| {
                let k = (t / self.dt).round();
                if k < 0.0 || k > self.n_steps as f64 || (k * self.dt - t).abs() > 1e-9 {
                    return Err(Error::Misaligned { time: t, dt: self.dt });
                }
                Ok(self.values[k as usize])
            })
            .collect()
    }

    /// Every `stride`-th stored value, starting at `t = 0`.
    pub fn every(&self, stride: usize) -> Result<Vec<f64>> {
        if stride == 0 || self.n_steps % stride != 0 {
            return Err(Error::NotDivisible {
                n_steps: self.n_steps,
                factor: stride,
            });
        }
        Ok(self.values.iter().step_by(stride).copied().collect())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        crate::csv::write_path(
            w,
            self.values.iter().enumerate().map(|(k, &v)| (self.time(k), v)),
        )
    }
}
