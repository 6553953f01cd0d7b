use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{bounded, median_in_place};
use crate::error::{invalid, Error, Result};
use crate::rng::{Domain, WalkRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NuMethod {
    MedianSlope,
    MeanSlope,
}

/// Per-checkpoint values of an ensemble, walker-aligned across checkpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleTable {
    pub times: Vec<u64>,
    /// `values[c][w]` is walker `w` at checkpoint `c`.
    pub values: Vec<Vec<f64>>,
}

impl EnsembleTable {
    pub fn new(times: Vec<u64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(invalid("one value row per checkpoint required"));
        }
        let walkers = values.first().map_or(0, Vec::len);
        if walkers == 0 || values.iter().any(|r| r.len() != walkers) {
            return Err(invalid(
                "every checkpoint needs the same nonzero number of walkers",
            ));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) || times.first() == Some(&0) {
            return Err(invalid("checkpoint times must be positive and increasing"));
        }
        Ok(Self { times, values })
    }

    pub fn walkers(&self) -> usize {
        self.values[0].len()
    }

    /// Sub-table restricted to checkpoints with `lo <= t <= hi`.
    pub fn window(&self, lo: u64, hi: u64) -> Result<Self> {
        let (times, values): (Vec<_>, Vec<_>) = self
            .times
            .iter()
            .zip(&self.values)
            .filter(|(&t, _)| t >= lo && t <= hi)
            .map(|(&t, v)| (t, v.clone()))
            .unzip();
        Self::new(times, values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuEstimate {
    pub nu_hat: f64,
    pub stderr: f64,
    pub t_min: u64,
    pub t_max: u64,
    pub method: NuMethod,
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn statistic(values: &mut [f64], method: NuMethod) -> f64 {
    match method {
        NuMethod::MedianSlope => median_in_place(values),
        NuMethod::MeanSlope => values.iter().sum::<f64>() / values.len() as f64,
    }
}

/// Least-squares slope of `log stat(z)` against `log t`, with a bootstrap
/// standard error obtained by resampling walkers.
pub fn estimate_nu(
    table: &EnsembleTable,
    method: NuMethod,
    resamples: usize,
    seed: u64,
) -> Result<NuEstimate> {
    let t_min = table.times[0];
    let t_max = *table.times.last().unwrap();
    if table.times.len() < 4 {
        return Err(Error::InsufficientData(
            "need at least 4 checkpoints".into(),
        ));
    }
    if (t_max as f64) < 10.0 * t_min as f64 {
        return Err(Error::InsufficientData(
            "checkpoints must span at least one decade".into(),
        ));
    }
    if table.values.iter().flatten().any(|&v| !(v > 0.0)) {
        return Err(invalid("all values must be positive to take logarithms"));
    }
    if resamples < 2 {
        return Err(invalid("need at least 2 bootstrap resamples"));
    }
    let log_t: Vec<f64> = table.times.iter().map(|&t| (t as f64).ln()).collect();
    let fit = |rows: &mut dyn FnMut(usize, &mut Vec<f64>)| -> f64 {
        let mut buf = Vec::new();
        let ys: Vec<f64> = (0..table.times.len())
            .map(|c| {
                rows(c, &mut buf);
                statistic(&mut buf, method).ln()
            })
            .collect();
        slope(&log_t, &ys)
    };
    let nu_hat = fit(&mut |c, buf| {
        buf.clear();
        buf.extend_from_slice(&table.values[c]);
    });
    let w = table.walkers();
    let reps: Vec<f64> = (0..resamples as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = WalkRng::new(seed, Domain::Bootstrap, r);
            let idx: Vec<usize> = (0..w).map(|_| bounded(&mut rng, w)).collect();
            fit(&mut |c, buf| {
                buf.clear();
                buf.extend(idx.iter().map(|&i| table.values[c][i]));
            })
        })
        .collect();
    let m = reps.iter().sum::<f64>() / reps.len() as f64;
    let stderr =
        (reps.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (reps.len() as f64 - 1.0)).sqrt();
    Ok(NuEstimate {
        nu_hat,
        stderr,
        t_min,
        t_max,
        method,
    })
}
