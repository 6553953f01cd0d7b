//! Journey decomposition of the walk.
//!
//! A trajectory is cut into cycles. Each cycle is a lazy journey (one step
//! off the maximum followed by `m` symmetric steps until either frontier is
//! hit again) and an active journey (`n` consecutive outward steps). Record
//! `k` carries the `m` and `n` that produced it, so that
//! `t_k = t_{k-1} + 1 + m_k + n_k` and `z_k = z_{k-1} + n_k`. Record 1 is the
//! initial active journey from `z = 1`: its `m` is zero and `t_1 = z_1 = 1 + n_1`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::direct::MAX_TIME;
use crate::error::{invalid, Error, Result};
use crate::rng::{Domain, WalkRng};
use crate::stats::Estimate;

/// Default bound on `(2z − 1) · s_max` for [`exit_time_pmf`].
pub const DEFAULT_PMF_WORK_LIMIT: u128 = 1_000_000_000;

/// First exit of a simple symmetric walk started at 0 from `[a, b]`.
/// Returns the exit time and the exit position.
pub fn exit_interval(a: i64, b: i64, rng: &mut WalkRng) -> Result<(u64, i64)> {
    let (tau, w) = exit_interval_capped(a, b, u64::MAX, rng)?;
    Ok((tau, w.expect("uncapped walk exits")))
}

/// As [`exit_interval`], but gives up after `cap` steps; the position is
/// `None` when the walk is still inside at that point.
pub fn exit_interval_capped(
    a: i64,
    b: i64,
    cap: u64,
    rng: &mut WalkRng,
) -> Result<(u64, Option<i64>)> {
    if a >= 0 || b <= 0 {
        return Err(invalid(format!("need a < 0 < b, got [{a}, {b}]")));
    }
    let mut y = 0i64;
    let mut tau = 0u64;
    while tau < cap {
        let room = (y - a).min(b - y) as u64;
        let j = room.min(64).min(cap - tau) as u32;
        y += rng.displacement(j);
        tau += u64::from(j);
        if y == a || y == b {
            return Ok((tau, Some(y)));
        }
    }
    Ok((tau, None))
}

fn check_z(z: u64) -> Result<()> {
    if z < 1 {
        return Err(invalid("z must be >= 1"));
    }
    if z > (i64::MAX as u64) / 4 {
        return Err(invalid(format!("z too large: {z}")));
    }
    Ok(())
}

/// Lazy-journey exit time `m(z)`: time for a symmetric walk started at `z − 1`
/// to reach `±z`, sampled by path simulation.
pub fn sample_m(z: u64, rng: &mut WalkRng) -> Result<u64> {
    check_z(z)?;
    let a = -(2 * z as i64 - 1);
    exit_interval(a, 1, rng).map(|(tau, _)| tau)
}

/// `min(m(z), cap)`, simulating at most `cap` steps.
pub fn sample_m_capped(z: u64, cap: u64, rng: &mut WalkRng) -> Result<u64> {
    check_z(z)?;
    let a = -(2 * z as i64 - 1);
    exit_interval_capped(a, 1, cap, rng).map(|(tau, _)| tau)
}

/// Exact distribution of `m(z)` on `1..=s_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExitTimePmf {
    /// `pmf[s - 1] = P(m = s)`.
    pub pmf: Vec<f64>,
    /// `P(m > s_max)`, the probability still inside the interval.
    pub tail: f64,
}

impl ExitTimePmf {
    pub fn prob(&self, s: usize) -> f64 {
        if s == 0 {
            0.0
        } else {
            self.pmf.get(s - 1).copied().unwrap_or(0.0)
        }
    }

    /// `Σ_s P(m = s) e^{-λs}`, without the tail.
    pub fn laplace_partial(&self, lambda: f64) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .map(|(i, p)| p * (-lambda * (i + 1) as f64).exp())
            .sum()
    }
}

pub fn exit_time_pmf(z: u64, s_max: usize) -> Result<ExitTimePmf> {
    exit_time_pmf_with_limit(z, s_max, DEFAULT_PMF_WORK_LIMIT)
}

/// Propagates the occupation probabilities of the `2z − 1` interior sites
/// from the start site `z − 1`, absorbing at `±z`.
pub fn exit_time_pmf_with_limit(z: u64, s_max: usize, limit: u128) -> Result<ExitTimePmf> {
    check_z(z)?;
    if s_max < 1 {
        return Err(invalid("s_max must be >= 1"));
    }
    let requested = (2 * u128::from(z) - 1) * s_max as u128;
    if requested > limit {
        return Err(Error::WorkLimit { requested, limit });
    }
    let sites = (2 * z - 1) as usize;
    let mut occ = vec![0.0f64; sites];
    let mut next = vec![0.0f64; sites];
    occ[sites - 1] = 1.0;
    let mut pmf = Vec::with_capacity(s_max);
    for _ in 0..s_max {
        let absorbed = 0.5 * (occ[0] + occ[sites - 1]);
        for i in 0..sites {
            let left = if i > 0 { occ[i - 1] } else { 0.0 };
            let right = if i + 1 < sites { occ[i + 1] } else { 0.0 };
            next[i] = 0.5 * (left + right);
        }
        std::mem::swap(&mut occ, &mut next);
        pmf.push(absorbed);
    }
    let tail = occ.iter().sum();
    Ok(ExitTimePmf { pmf, tail })
}

/// Active-run length `n(z)` with at most `cap` steps.
pub fn sample_n_capped(z: u64, gamma: f64, cap: u64, rng: &mut WalkRng) -> Result<u64> {
    check_z(z)?;
    if !gamma.is_finite() {
        return Err(invalid(format!("gamma must be finite, got {gamma}")));
    }
    let mut n = 0u64;
    while n < cap {
        let p = 1.0 / (1.0 + ((z + n) as f64).powf(-gamma));
        if rng.uniform() < p {
            n += 1;
        } else {
            break;
        }
    }
    Ok(n)
}

/// Active-run length `n(z)`: outward steps succeed with `p(z), p(z+1), …`
/// until the first failure.
///
/// For `γ > 1` the run is infinite with positive probability, so only the
/// capped variant is offered there.
pub fn sample_n(z: u64, gamma: f64, rng: &mut WalkRng) -> Result<u64> {
    if gamma > 1.0 {
        return Err(invalid(format!(
            "active runs are a.s. finite only for gamma <= 1, got {gamma}; use sample_n_capped"
        )));
    }
    sample_n_capped(z, gamma, MAX_TIME, rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub walker_id: u64,
    pub k: u64,
    pub t: u64,
    pub z: u64,
    pub m: u64,
    pub n: u64,
}

impl CycleRecord {
    /// The initial active journey, stored with `m = 0`.
    pub fn is_initial(&self) -> bool {
        self.k == 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stop {
    /// Exactly this many cycles.
    Cycles(u64),
    /// Until the clock reaches this time. Whichever journey is running then
    /// is cut, so the last record has `t` equal to the bound.
    Time(u64),
}

/// Iterates the cycle recurrences from the initial active journey.
pub fn run_cycles(
    gamma: f64,
    stop: Stop,
    walker_id: u64,
    rng: &mut WalkRng,
) -> Result<Vec<CycleRecord>> {
    if !gamma.is_finite() {
        return Err(invalid(format!("gamma must be finite, got {gamma}")));
    }
    let (k_max, t_max) = match stop {
        Stop::Cycles(0) | Stop::Time(0) => return Err(invalid("stop bound must be >= 1")),
        Stop::Cycles(k) => {
            if gamma > 1.0 {
                return Err(invalid(
                    "a cycle-count bound needs gamma <= 1; use a time bound",
                ));
            }
            (k, MAX_TIME)
        }
        Stop::Time(t) if t > MAX_TIME => return Err(invalid("t_max must not exceed 2^62")),
        Stop::Time(t) => (u64::MAX, t),
    };

    let mut out = Vec::new();
    let n1 = sample_n_capped(1, gamma, t_max - 1, rng)?;
    out.push(CycleRecord {
        walker_id,
        k: 1,
        t: 1 + n1,
        z: 1 + n1,
        m: 0,
        n: n1,
    });
    let (mut t, mut z) = (1 + n1, 1 + n1);
    let mut k = 1;
    while k < k_max && t < t_max {
        let m = sample_m_capped(z, t_max - t - 1, rng)?;
        let lazy_end = t + 1 + m;
        let n = if lazy_end >= t_max {
            0
        } else {
            sample_n_capped(z, gamma, t_max - lazy_end, rng)?
        };
        k += 1;
        t = lazy_end + n;
        z += n;
        out.push(CycleRecord {
            walker_id,
            k,
            t,
            z,
            m,
            n,
        });
    }
    Ok(out)
}

/// Independent cycle replicas, walker `i` on stream `(master_seed, i)`.
pub fn run_cycle_ensemble(
    gamma: f64,
    stop: Stop,
    n_walkers: u64,
    master_seed: u64,
) -> Result<Vec<Vec<CycleRecord>>> {
    if n_walkers == 0 {
        return Err(invalid("n_walkers must be >= 1"));
    }
    (0..n_walkers)
        .into_par_iter()
        .map(|id| {
            let mut rng = WalkRng::for_walker(master_seed, Domain::Cycles, id);
            run_cycles(gamma, stop, id, &mut rng)
        })
        .collect()
}

/// Maxima at the given times for each walker of a time-bounded cycle
/// ensemble, `out[w][c]`. Streams match [`run_cycle_ensemble`]; the cycle
/// sequences themselves are dropped as soon as they are read.
pub fn ensemble_maxima(
    gamma: f64,
    times: &[u64],
    n_walkers: u64,
    master_seed: u64,
) -> Result<Vec<Vec<u64>>> {
    if n_walkers == 0 {
        return Err(invalid("n_walkers must be >= 1"));
    }
    let t_max = *times
        .last()
        .ok_or_else(|| invalid("need at least one time"))?;
    crate::direct::validate_schedule(t_max, times)?;
    (0..n_walkers)
        .into_par_iter()
        .map(|id| {
            let mut rng = WalkRng::for_walker(master_seed, Domain::Cycles, id);
            let cycles = run_cycles(gamma, Stop::Time(t_max), id, &mut rng)?;
            times.iter().map(|&t| reconstruct_z(&cycles, t)).collect()
        })
        .collect()
}

/// Running maximum at time `t` rebuilt from a cycle sequence.
///
/// Inside cycle `k` the maximum stays at `z_{k-1}` for the `1 + m_k` lazy
/// steps and then grows by one per active step.
pub fn reconstruct_z(cycles: &[CycleRecord], t: u64) -> Result<u64> {
    let last = cycles
        .last()
        .ok_or_else(|| Error::InsufficientData("empty cycle sequence".into()))?;
    if t == 0 {
        return Err(invalid("t must be >= 1"));
    }
    if t > last.t {
        return Err(invalid(format!(
            "t={t} is beyond the simulated horizon {}",
            last.t
        )));
    }
    let idx = cycles.partition_point(|c| c.t < t);
    let cycle = &cycles[idx];
    let (t_prev, z_prev) = if idx == 0 {
        (0, 1)
    } else {
        (cycles[idx - 1].t, cycles[idx - 1].z)
    };
    let active = t.saturating_sub(t_prev + 1 + cycle.m);
    Ok(z_prev + active)
}

/// `L(k) = k^{-2} Σ_{i=1}^{k-1} m(z(i))` over a sequence of `k` cycles.
pub fn l_of_k(cycles: &[CycleRecord]) -> Result<f64> {
    if cycles.len() < 2 {
        return Err(Error::InsufficientData(
            "L(k) needs at least 2 cycles".into(),
        ));
    }
    if !cycles[0].is_initial() {
        return Err(invalid("cycle sequence must start with the initial record"));
    }
    let k = cycles.len() as f64;
    let sum: u64 = cycles[1..].iter().map(|c| c.m).sum();
    Ok(sum as f64 / (k * k))
}

/// Monte Carlo estimate of `E[e^{θ w(τ)} / cosh(θ)^τ]` for the exit time of
/// `[a, b]`; the martingale identity says it equals 1.
pub fn wald_identity_check(
    theta: f64,
    a: i64,
    b: i64,
    n_paths: u64,
    rng: &mut WalkRng,
) -> Result<Estimate> {
    if !theta.is_finite() || theta == 0.0 {
        return Err(invalid(format!(
            "theta must be finite and nonzero, got {theta}"
        )));
    }
    if a >= 0 || b <= 0 {
        return Err(invalid(format!("need a < 0 < b, got [{a}, {b}]")));
    }
    if n_paths == 0 {
        return Err(invalid("n_paths must be >= 1"));
    }
    let lc = crate::model::log_cosh(theta);
    let mut values = Vec::with_capacity(n_paths as usize);
    for _ in 0..n_paths {
        let (tau, w) = exit_interval(a, b, rng)?;
        values.push((theta * w as f64 - tau as f64 * lc).exp());
    }
    Estimate::mean_of(&values)
}
