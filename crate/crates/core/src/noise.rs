//! Reproducible Brownian increments.
//!
//! Every trajectory owns one fine lattice of independent increment pairs
//! `(ΔB₁, ΔB₂)`. The reference solver consumes it directly; each scheme
//! consumes a block-summed coarsening of the same lattice, so all of them see
//! one underlying Brownian path.
//!
//! Streams are keyed by `(master_seed, trajectory_index, channel)` using the
//! stream parameter of ChaCha12, so trajectories can be generated in any order
//! or in parallel with identical results.

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::propagator::IntervalIncrement;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    B1,
    B2,
}

/// Identifies one independent increment stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub master_seed: u64,
    pub trajectory_index: u64,
    pub channel: Channel,
}

impl StreamKey {
    fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.master_seed);
        let tag = match self.channel {
            Channel::B1 => 0,
            Channel::B2 => 1,
        };
        rng.set_stream(self.trajectory_index.wrapping_mul(2).wrapping_add(tag));
        rng
    }

    /// `n` iid N(0, dt) draws.
    pub fn increments(&self, n: usize, dt: f64) -> Vec<f64> {
        let mut rng = self.rng();
        let scale = dt.sqrt();
        (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                scale * z
            })
            .collect()
    }
}

/// The pair of streams driving one trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TrajectoryKey {
    pub master_seed: u64,
    pub trajectory_index: u64,
}

impl TrajectoryKey {
    pub fn new(master_seed: u64, trajectory_index: u64) -> Self {
        Self {
            master_seed,
            trajectory_index,
        }
    }

    pub fn stream(&self, channel: Channel) -> StreamKey {
        StreamKey {
            master_seed: self.master_seed,
            trajectory_index: self.trajectory_index,
            channel,
        }
    }
}

/// Independent increment pairs on a uniform mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianLattice {
    dt: f64,
    db1: Vec<f64>,
    db2: Vec<f64>,
}

impl BrownianLattice {
    pub fn generate(key: TrajectoryKey, n_steps: usize, dt: f64) -> Result<Self> {
        check_shape(n_steps, dt)?;
        Ok(Self {
            dt,
            db1: key.stream(Channel::B1).increments(n_steps, dt),
            db2: key.stream(Channel::B2).increments(n_steps, dt),
        })
    }

    pub fn from_increments(dt: f64, db1: Vec<f64>, db2: Vec<f64>) -> Result<Self> {
        check_shape(db1.len(), dt)?;
        if db1.len() != db2.len() {
            return Err(Error::param(
                "increments",
                format!("channel lengths differ ({} vs {})", db1.len(), db2.len()),
            ));
        }
        Ok(Self { dt, db1, db2 })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.db1.len()
    }

    pub fn db1(&self) -> &[f64] {
        &self.db1
    }

    pub fn db2(&self) -> &[f64] {
        &self.db2
    }

    /// Increment over step `k`.
    #[inline]
    pub fn step(&self, k: usize) -> IntervalIncrement {
        IntervalIncrement {
            dt: self.dt,
            db1: self.db1[k],
            db2: self.db2[k],
        }
    }

    /// Block sums of `factor` consecutive increments.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || self.n_steps() % factor != 0 {
            return Err(Error::NotDivisible {
                n_steps: self.n_steps(),
                factor,
            });
        }
        let block = |xs: &[f64]| -> Vec<f64> {
            xs.chunks_exact(factor).map(|c| c.iter().sum()).collect()
        };
        Ok(Self {
            dt: self.dt * factor as f64,
            db1: block(&self.db1),
            db2: block(&self.db2),
        })
    }

    /// Cholesky transform to a correlated pair:
    /// `ΔW₁ = √(1-ρ²) ΔB₁ + ρ ΔB₂`, `ΔW₂ = ΔB₂`.
    pub fn correlate(&self, rho: f64) -> Result<CorrelatedIncrements> {
        if !(rho.abs() < 1.0) {
            return Err(Error::RhoOutOfRange(rho));
        }
        let c = (1.0 - rho * rho).sqrt();
        let dw1 = self
            .db1
            .iter()
            .zip(&self.db2)
            .map(|(b1, b2)| c * b1 + rho * b2)
            .collect();
        Ok(CorrelatedIncrements {
            dt: self.dt,
            rho,
            dw1,
            dw2: self.db2.clone(),
        })
    }

    /// Path values `B(t_k)`, `k = 0..=n`, starting from zero.
    pub fn path(&self, channel: Channel) -> Vec<f64> {
        let inc = match channel {
            Channel::B1 => &self.db1,
            Channel::B2 => &self.db2,
        };
        let mut out = Vec::with_capacity(inc.len() + 1);
        let mut acc = 0.0;
        out.push(acc);
        for d in inc {
            acc += d;
            out.push(acc);
        }
        out
    }

    /// Little-endian dump: seed (u64), n_steps (u64), dt (f64), then ΔB₁
    /// followed by ΔB₂ as f64.
    pub fn write_binary<W: Write>(&self, seed: u64, mut w: W) -> Result<()> {
        w.write_all(&seed.to_le_bytes())?;
        w.write_all(&(self.n_steps() as u64).to_le_bytes())?;
        w.write_all(&self.dt.to_le_bytes())?;
        for x in self.db1.iter().chain(&self.db2) {
            w.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<(u64, Self)> {
        let mut word = [0u8; 8];
        let mut next = |r: &mut R| -> Result<[u8; 8]> {
            r.read_exact(&mut word)?;
            Ok(word)
        };
        let seed = u64::from_le_bytes(next(&mut r)?);
        let n = u64::from_le_bytes(next(&mut r)?) as usize;
        let dt = f64::from_le_bytes(next(&mut r)?);
        let mut body = Vec::with_capacity(2 * n);
        for _ in 0..2 * n {
            body.push(f64::from_le_bytes(next(&mut r)?));
        }
        let db2 = body.split_off(n);
        Ok((seed, Self::from_increments(dt, body, db2)?))
    }
}

fn check_shape(n_steps: usize, dt: f64) -> Result<()> {
    if n_steps == 0 {
        return Err(Error::param("n_steps", "must be at least 1"));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::param("dt", format!("must be positive, got {dt}")));
    }
    Ok(())
}

/// Correlated increments `(ΔW₁, ΔW₂)` with `Cov = ρ·dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatedIncrements {
    pub dt: f64,
    pub rho: f64,
    pub dw1: Vec<f64>,
    pub dw2: Vec<f64>,
}

impl CorrelatedIncrements {
    pub fn n_steps(&self) -> usize {
        self.dw1.len()
    }
}
