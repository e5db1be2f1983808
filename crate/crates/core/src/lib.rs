//! Splitting integrators for the scalar semilinear stochastic delay
//! differential equation
//!
//! ```text
//! dX(t) = [μ X(t) + f(X(t-τ))] dt + σ X(t) dW₁(t) + g(X(t-τ)) dW₂(t),   t ∈ (0, T]
//! X(t)  = ψ(t),                                                        t ∈ [-τ, 0]
//! ```
//!
//! where `W₁`, `W₂` are standard Brownian motions with correlation `ρ`.
//!
//! The crate provides:
//!
//! * reproducible Brownian increment lattices shared between every scheme
//!   and the reference solver ([`noise`]),
//! * the problem definition and assumption probes ([`model`]),
//! * the exact fundamental solution of the linear subsystem ([`propagator`]),
//! * Lie-Trotter and Strang splitting ([`schemes`]),
//! * a method-of-steps reference solver ([`reference`]),
//! * Monte Carlo strong-error studies and order fitting ([`experiment`]),
//! * a flat TOML configuration layer with built-in presets ([`config`]).

pub mod config;
pub mod error;
pub mod experiment;
pub mod model;
pub mod noise;
pub mod propagator;
pub mod reference;
pub mod schemes;

mod csv;

pub use error::{Error, Result};
pub use experiment::{ConvergenceStudy, ErrorRow, OrderFit, Scheme, StudyConfig};
pub use model::{Coefficient, InitialFunction, SddeProblem};
pub use noise::{BrownianLattice, CorrelatedIncrements, TrajectoryKey};
pub use propagator::IntervalIncrement;
pub use reference::ReferencePath;
pub use schemes::{TrajectoryGrid, UniformMesh};
