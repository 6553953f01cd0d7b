//! Step-by-step simulation of the walk.
//!
//! Away from the running maximum the walk is a simple symmetric walk, so
//! [`Walker`] advances through up to 64 such steps per random word. The result
//! is path-identical to repeated [`WalkerState::step`] on the same stream.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::step_probability;
use crate::rng::{Domain, WalkRng};

/// Largest accepted horizon.
pub const MAX_TIME: u64 = 1 << 62;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkerState {
    pub x: i64,
    pub z: u64,
    pub t: u64,
    pub gamma: f64,
}

impl WalkerState {
    pub fn origin(gamma: f64) -> Self {
        Self {
            x: 0,
            z: 0,
            t: 0,
            gamma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ax = self.x.unsigned_abs();
        if ax > self.z {
            return Err(Error::InconsistentState(format!(
                "|x|={ax} exceeds z={}",
                self.z
            )));
        }
        if self.z > self.t {
            return Err(Error::InconsistentState(format!(
                "z={} exceeds t={}",
                self.z, self.t
            )));
        }
        if (ax + self.t) % 2 != 0 {
            return Err(Error::InconsistentState(format!(
                "parity violation: x={} at t={}",
                self.x, self.t
            )));
        }
        if self.t > 0 && self.z == 0 {
            return Err(Error::InconsistentState("z=0 after the first step".into()));
        }
        if !self.gamma.is_finite() {
            return Err(invalid("gamma must be finite"));
        }
        Ok(())
    }

    /// One step of the walk.
    pub fn step(&self, rng: &mut WalkRng) -> Result<Self> {
        self.validate()?;
        let sigma = if self.z == 0 || self.x.unsigned_abs() < self.z {
            if rng.bit() {
                1
            } else {
                -1
            }
        } else {
            let p = step_probability(self.z, self.gamma)?;
            let outward = self.x.signum();
            if rng.uniform() < p {
                outward
            } else {
                -outward
            }
        };
        let x = self.x + sigma;
        Ok(Self {
            x,
            z: self.z.max(x.unsigned_abs()),
            t: self.t + 1,
            gamma: self.gamma,
        })
    }
}

/// Walker with a memoized boundary probability and block-stepping.
#[derive(Debug, Clone)]
pub struct Walker {
    state: WalkerState,
    cached_z: u64,
    cached_p: f64,
}

impl Walker {
    pub fn new(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(invalid(format!("gamma must be finite, got {gamma}")));
        }
        Ok(Self {
            state: WalkerState::origin(gamma),
            cached_z: 0,
            cached_p: 0.5,
        })
    }

    pub fn state(&self) -> WalkerState {
        self.state
    }

    #[inline]
    fn boundary_probability(&mut self) -> f64 {
        if self.cached_z != self.state.z {
            self.cached_z = self.state.z;
            // z >= 1 here and gamma was checked at construction
            self.cached_p = 1.0 / (1.0 + (self.state.z as f64).powf(-self.state.gamma));
        }
        self.cached_p
    }

    /// Advance until `t == target`.
    pub fn advance_to(&mut self, target: u64, rng: &mut WalkRng) {
        while self.state.t < target {
            let s = &mut self.state;
            let ax = s.x.unsigned_abs();
            if s.z == 0 {
                s.x = if rng.bit() { 1 } else { -1 };
                s.z = 1;
                s.t += 1;
            } else if ax < s.z {
                let j = (s.z - ax).min(64).min(target - s.t) as u32;
                s.x += rng.displacement(j);
                s.t += u64::from(j);
            } else {
                let p = self.boundary_probability();
                let s = &mut self.state;
                let outward = s.x.signum();
                s.x += if rng.uniform() < p { outward } else { -outward };
                s.z = s.z.max(s.x.unsigned_abs());
                s.t += 1;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckpointRecord {
    pub walker_id: u64,
    pub t: u64,
    pub z: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<i64>,
}

pub(crate) fn validate_schedule(t_max: u64, checkpoints: &[u64]) -> Result<()> {
    if t_max == 0 {
        return Err(invalid("t_max must be >= 1"));
    }
    if t_max > MAX_TIME {
        return Err(invalid(format!("t_max must not exceed 2^62, got {t_max}")));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("checkpoints must be strictly increasing"));
    }
    if let (Some(&first), Some(&last)) = (checkpoints.first(), checkpoints.last()) {
        if first < 1 || last > t_max {
            return Err(invalid(format!("checkpoints must lie in [1, {t_max}]")));
        }
    }
    Ok(())
}

/// Simulates one walker for `t_max` steps, recording `(t, z, x)` at every
/// checkpoint. With no checkpoints, only the final state is recorded.
pub fn run_walker(
    gamma: f64,
    t_max: u64,
    checkpoints: &[u64],
    walker_id: u64,
    rng: &mut WalkRng,
) -> Result<Vec<CheckpointRecord>> {
    validate_schedule(t_max, checkpoints)?;
    let mut walker = Walker::new(gamma)?;
    let final_only = [t_max];
    let schedule = if checkpoints.is_empty() {
        &final_only[..]
    } else {
        checkpoints
    };
    let mut out = Vec::with_capacity(schedule.len());
    for &t in schedule {
        walker.advance_to(t, rng);
        let s = walker.state();
        out.push(CheckpointRecord {
            walker_id,
            t: s.t,
            z: s.z,
            x: Some(s.x),
        });
    }
    walker.advance_to(t_max, rng);
    Ok(out)
}

/// Runs `n_walkers` independent walkers; walker `i` draws from stream
/// `(master_seed, i)`. Records are ordered by walker id, then time, whatever
/// the size of the current rayon pool.
pub fn run_ensemble(
    gamma: f64,
    t_max: u64,
    checkpoints: &[u64],
    n_walkers: u64,
    master_seed: u64,
) -> Result<Vec<CheckpointRecord>> {
    if n_walkers == 0 {
        return Err(invalid("n_walkers must be >= 1"));
    }
    validate_schedule(t_max, checkpoints)?;
    let per_walker: Vec<Vec<CheckpointRecord>> = (0..n_walkers)
        .into_par_iter()
        .map(|id| {
            let mut rng = WalkRng::for_walker(master_seed, Domain::Direct, id);
            run_walker(gamma, t_max, checkpoints, id, &mut rng)
        })
        .collect::<Result<_>>()?;
    Ok(per_walker.into_iter().flatten().collect())
}
