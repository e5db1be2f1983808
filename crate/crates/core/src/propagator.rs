//! Fundamental solution of the linear subsystem
//! `dY = μY dt + √(1-ρ²)σY dB₁ + ρσY dB₂`:
//!
//! ```text
//! Φ_s(t) = exp{(μ - σ²/2)(t-s) + √(1-ρ²)σ ΔB₁ + ρσ ΔB₂}
//! ```

use crate::model::SddeProblem;

/// Time span and independent Brownian increments over one interval.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IntervalIncrement {
    pub dt: f64,
    pub db1: f64,
    pub db2: f64,
}

impl IntervalIncrement {
    pub fn new(dt: f64, db1: f64, db2: f64) -> Self {
        Self { dt, db1, db2 }
    }

    /// Concatenation of two adjacent intervals.
    pub fn join(self, next: Self) -> Self {
        Self {
            dt: self.dt + next.dt,
            db1: self.db1 + next.db1,
            db2: self.db2 + next.db2,
        }
    }
}

/// Precomputed exponent coefficients for one problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagator {
    drift: f64,
    b1: f64,
    b2: f64,
}

impl Propagator {
    pub fn new(problem: &SddeProblem) -> Self {
        let (sigma, rho) = (problem.sigma(), problem.rho());
        Self {
            drift: problem.mu() - 0.5 * sigma * sigma,
            b1: (1.0 - rho * rho).sqrt() * sigma,
            b2: rho * sigma,
        }
    }

    #[inline]
    pub fn exponent(&self, inc: IntervalIncrement) -> f64 {
        self.drift * inc.dt + self.b1 * inc.db1 + self.b2 * inc.db2
    }

    #[inline]
    pub fn phi(&self, inc: IntervalIncrement) -> f64 {
        self.exponent(inc).exp()
    }

    #[inline]
    pub fn phi_inverse(&self, inc: IntervalIncrement) -> f64 {
        (-self.exponent(inc)).exp()
    }
}

/// `Φ_s(t)` over the interval described by `inc`.
pub fn phi(problem: &SddeProblem, inc: IntervalIncrement) -> f64 {
    Propagator::new(problem).phi(inc)
}

/// `Φ_s(t)⁻¹` over the interval described by `inc`.
pub fn phi_inverse(problem: &SddeProblem, inc: IntervalIncrement) -> f64 {
    Propagator::new(problem).phi_inverse(inc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Coefficient, InitialFunction, ProblemParams};
    use proptest::prelude::*;

    fn problem(mu: f64, sigma: f64, rho: f64) -> SddeProblem {
        SddeProblem::new(ProblemParams {
            mu,
            sigma,
            rho,
            tau: 1.0,
            horizon: 1.0,
            f: Coefficient::zero(),
            g: Coefficient::zero(),
            psi: InitialFunction::Constant(1.0),
        })
        .unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn identity_on_empty_interval() {
        let p = SddeProblem::example1(0.4).unwrap();
        assert_eq!(phi(&p, IntervalIncrement::default()), 1.0);
        assert_eq!(phi_inverse(&p, IntervalIncrement::default()), 1.0);
    }

    #[test]
    fn example1_values() {
        let p = SddeProblem::example1(0.0).unwrap();
        // exp(-0.72), exp(0.42), exp(0.72) from an independent evaluation
        assert!(rel(phi(&p, IntervalIncrement::new(1.0, 0.0, 0.0)), 0.486_752_255_959_972) < 1e-14);
        assert!(rel(phi(&p, IntervalIncrement::new(0.25, 0.5, 0.0)), 1.521_961_555_618_634) < 1e-14);
        assert!(rel(phi_inverse(&p, IntervalIncrement::new(1.0, 0.0, 0.0)), 2.054_433_210_643_888) < 1e-14);
    }

    #[test]
    fn zero_noise_ignores_rho() {
        let inc = IntervalIncrement::new(0.3, 0.0, 0.0);
        let base = phi(&problem(0.1, 0.8, 0.0), inc);
        for rho in [-0.9, -0.2, 0.5, 0.99] {
            assert_eq!(phi(&problem(0.1, 0.8, rho), inc).to_bits(), base.to_bits());
        }
    }

    proptest! {
        #[test]
        fn cocycle(mu in -1.0..1.0f64, sigma in 0.0..2.0f64, rho in -0.99..0.99f64,
                   dt1 in 0.0..0.5f64, dt2 in 0.0..0.5f64,
                   a1 in -1.0..1.0f64, a2 in -1.0..1.0f64, c1 in -1.0..1.0f64, c2 in -1.0..1.0f64) {
            let p = Propagator::new(&problem(mu, sigma, rho));
            let i1 = IntervalIncrement::new(dt1, a1, a2);
            let i2 = IntervalIncrement::new(dt2, c1, c2);
            let joined = p.phi(i1.join(i2));
            prop_assert!(rel(p.phi(i1) * p.phi(i2), joined) < 1e-12);
        }

        #[test]
        fn reciprocal_and_positive(sigma in 0.0..3.0f64, rho in -0.99..0.99f64,
                                   dt in 0.0..1.0f64, b1 in -3.0..3.0f64, b2 in -3.0..3.0f64) {
            let p = Propagator::new(&problem(-0.3, sigma, rho));
            let inc = IntervalIncrement::new(dt, b1, b2);
            prop_assert!(p.phi(inc) > 0.0);
            prop_assert!((p.phi(inc) * p.phi_inverse(inc) - 1.0).abs() < 1e-14);
        }
    }
}
