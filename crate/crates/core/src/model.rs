//! Problem definition.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

/// Scalar map used for the delayed drift `f` and delayed diffusion `g`.
#[derive(Clone)]
pub enum Coefficient {
    /// `x ↦ c·x`
    Linear(f64),
    /// Host-supplied map.
    Custom {
        name: String,
        map: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl Coefficient {
    pub fn zero() -> Self {
        Coefficient::Linear(0.0)
    }

    pub fn custom(name: impl Into<String>, map: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Coefficient::Custom {
            name: name.into(),
            map: Arc::new(map),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Coefficient::Linear(c) => c * x,
            Coefficient::Custom { map, .. } => map(x),
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Linear(c) => write!(f, "linear:{c}"),
            Coefficient::Custom { name, .. } => write!(f, "custom:{name}"),
        }
    }
}

/// Registry form: `linear:<c>` or `zero`.
impl FromStr for Coefficient {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "zero" {
            return Ok(Coefficient::zero());
        }
        match s.split_once(':') {
            Some(("linear", c)) => c
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|c| c.is_finite())
                .map(Coefficient::Linear)
                .ok_or_else(|| Error::Config(format!("bad linear coefficient `{c}`"))),
            _ => Err(Error::Config(format!(
                "unknown coefficient `{s}` (expected `linear:<c>` or `zero`)"
            ))),
        }
    }
}

/// Deterministic initial segment ψ on `[-τ, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialFunction {
    Constant(f64),
    /// `values[i] = ψ(start + i·dt)`; evaluated by nearest node.
    Tabulated { start: f64, dt: f64, values: Vec<f64> },
}

impl InitialFunction {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            InitialFunction::Constant(c) => *c,
            InitialFunction::Tabulated { start, dt, values } => {
                let i = ((t - start) / dt).round();
                let i = i.clamp(0.0, (values.len() - 1) as f64) as usize;
                values[i]
            }
        }
    }

    fn validate(&self, tau: f64) -> Result<()> {
        match self {
            InitialFunction::Constant(c) if c.is_finite() => Ok(()),
            InitialFunction::Constant(c) => Err(Error::param("psi", format!("non-finite value {c}"))),
            InitialFunction::Tabulated { start, dt, values } => {
                if values.is_empty() || !(*dt > 0.0) {
                    return Err(Error::param("psi", "empty table or non-positive spacing"));
                }
                let end = start + dt * (values.len() - 1) as f64;
                if (start + tau).abs() > 1e-9 * tau.max(1.0) || end.abs() > 1e-9 * tau.max(1.0) {
                    return Err(Error::param(
                        "psi",
                        format!("table spans [{start}, {end}], expected [-{tau}, 0]"),
                    ));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::param("psi", "non-finite table entry"));
                }
                Ok(())
            }
        }
    }
}

/// Raw parameters accepted by [`SddeProblem::new`].
#[derive(Debug, Clone)]
pub struct ProblemParams {
    pub mu: f64,
    pub sigma: f64,
    pub rho: f64,
    pub tau: f64,
    pub horizon: f64,
    pub f: Coefficient,
    pub g: Coefficient,
    pub psi: InitialFunction,
}

/// Validated problem. `horizon / tau` is a positive integer.
#[derive(Debug, Clone)]
pub struct SddeProblem {
    mu: f64,
    sigma: f64,
    rho: f64,
    tau: f64,
    horizon: f64,
    n_delays: usize,
    f: Coefficient,
    g: Coefficient,
    psi: InitialFunction,
}

impl SddeProblem {
    pub fn new(p: ProblemParams) -> Result<Self> {
        if !(p.tau > 0.0) || !p.tau.is_finite() {
            return Err(Error::NonPositiveDelay(p.tau));
        }
        if !(p.horizon > 0.0) || !p.horizon.is_finite() {
            return Err(Error::NonPositiveHorizon(p.horizon));
        }
        if !(p.rho.abs() < 1.0) {
            return Err(Error::RhoOutOfRange(p.rho));
        }
        if !p.mu.is_finite() {
            return Err(Error::param("mu", "must be finite"));
        }
        if !p.sigma.is_finite() {
            return Err(Error::param("sigma", "must be finite"));
        }
        let ratio = p.horizon / p.tau;
        let m = ratio.round();
        if m < 1.0 || (ratio - m).abs() > 1e-12 * ratio {
            return Err(Error::HorizonNotMultipleOfDelay {
                horizon: p.horizon,
                tau: p.tau,
            });
        }
        p.psi.validate(p.tau)?;
        Ok(Self {
            mu: p.mu,
            sigma: p.sigma,
            rho: p.rho,
            tau: p.tau,
            horizon: p.horizon,
            n_delays: m as usize,
            f: p.f,
            g: p.g,
            psi: p.psi,
        })
    }

    /// `f(x) = -x`, `g(x) = x`, `μ = 0`, `σ = 1.2`, `τ = 1`, `T = 8`, `ψ ≡ 1`.
    pub fn example1(rho: f64) -> Result<Self> {
        Self::new(ProblemParams {
            mu: 0.0,
            sigma: 1.2,
            rho,
            tau: 1.0,
            horizon: 8.0,
            f: Coefficient::Linear(-1.0),
            g: Coefficient::Linear(1.0),
            psi: InitialFunction::Constant(1.0),
        })
    }

    /// `f(x) = 0.6x`, `g(x) = x`, `μ = -0.4`, `σ = 1.2`, `τ = 1`, `T = 8`, `ψ ≡ 1`.
    pub fn example2(rho: f64) -> Result<Self> {
        Self::new(ProblemParams {
            mu: -0.4,
            sigma: 1.2,
            rho,
            tau: 1.0,
            horizon: 8.0,
            f: Coefficient::Linear(0.6),
            g: Coefficient::Linear(1.0),
            psi: InitialFunction::Constant(1.0),
        })
    }

    pub fn params(&self) -> ProblemParams {
        ProblemParams {
            mu: self.mu,
            sigma: self.sigma,
            rho: self.rho,
            tau: self.tau,
            horizon: self.horizon,
            f: self.f.clone(),
            g: self.g.clone(),
            psi: self.psi.clone(),
        }
    }

    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        if !(rho.abs() < 1.0) {
            return Err(Error::RhoOutOfRange(rho));
        }
        Ok(Self { rho, ..self.clone() })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    /// Number of delay intervals `T / τ`.
    pub fn n_delays(&self) -> usize {
        self.n_delays
    }
    pub fn f(&self) -> &Coefficient {
        &self.f
    }
    pub fn g(&self) -> &Coefficient {
        &self.g
    }
    pub fn psi(&self) -> &InitialFunction {
        &self.psi
    }
}

/// Empirical constants for the growth and Lipschitz conditions on `f`, `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    /// `max{|f(x)|², |g(x)|²} / (1 + x²)`
    pub linear_growth_k: f64,
    /// `|g(x) - g(y)| / |x - y|`
    pub g_lipschitz_c: f64,
    /// `(x - y)(f(x) - f(y)) / |x - y|²`
    pub f_onesided_c: f64,
    pub sample_radius: f64,
    pub sample_count: usize,
}

/// Largest number of points entering the pairwise ratios.
pub const PAIR_SUBSAMPLE: usize = 256;

/// Probe points: `±radius` followed by `n - 2` uniform draws.
pub fn probe_points(radius: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut pts = vec![-radius, radius];
    pts.extend((2..n).map(|_| rng.random_range(-radius..=radius)));
    pts
}

/// Sampling-based estimate of the constants in the growth and Lipschitz
/// assumptions. Advisory only: a large constant never blocks simulation.
pub fn probe_assumptions(
    problem: &SddeProblem,
    radius: f64,
    n: usize,
    seed: u64,
) -> Result<AssumptionReport> {
    if n < 2 {
        return Err(Error::param("n", "need at least two probe points"));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::param("radius", "must be positive"));
    }
    let pts = probe_points(radius, n, seed);
    let (f, g) = (problem.f(), problem.g());

    let linear_growth_k = pts
        .iter()
        .map(|&x| f.eval(x).powi(2).max(g.eval(x).powi(2)) / (1.0 + x * x))
        .fold(0.0, f64::max);

    let sub = &pts[..pts.len().min(PAIR_SUBSAMPLE)];
    let mut g_lipschitz_c: f64 = 0.0;
    let mut f_onesided_c = f64::NEG_INFINITY;
    for (i, &x) in sub.iter().enumerate() {
        for &y in &sub[i + 1..] {
            let d = x - y;
            if d == 0.0 {
                continue;
            }
            g_lipschitz_c = g_lipschitz_c.max((g.eval(x) - g.eval(y)).abs() / d.abs());
            f_onesided_c = f_onesided_c.max(d * (f.eval(x) - f.eval(y)) / (d * d));
        }
    }
    if f_onesided_c == f64::NEG_INFINITY {
        f_onesided_c = 0.0;
    }

    Ok(AssumptionReport {
        linear_growth_k,
        g_lipschitz_c,
        f_onesided_c,
        sample_radius: radius,
        sample_count: n,
    })
}
