//! Estimators and reference samplers that confront ensemble output with the
//! limit laws.

mod gof;
mod nu;
mod samplers;
mod summary;

pub use gof::{
    chi_square_gof, ks_critical, ks_critical_two_sample, ks_distance, ks_distance_discrete,
    ks_two_sample, lattice_tail_distance, ChiSquare, KS_C_01,
};
pub use nu::{estimate_nu, EnsembleTable, NuEstimate, NuMethod};
pub use samplers::{sample_levy, sample_t, DEFAULT_T_RESOLUTION};
pub use summary::{summarize, Ecdf, EnsembleSummary, LaplacePoint, SummaryConfig};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::{Domain, WalkRng};

/// Default number of bootstrap resamples.
pub const DEFAULT_RESAMPLES: usize = 1000;

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    /// Sample mean and its standard error `s/√n`.
    pub fn mean_of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientData("empty sample".into()));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let se = if values.len() > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Ok(Self { value: mean, se })
    }

    /// Distance from `target` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.value - target) / self.se
    }

    pub fn within_se(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.se
    }
}

/// Sample standard deviation with a delta-method standard error.
pub fn std_dev_estimate(values: &[f64]) -> Result<Estimate> {
    if values.len() < 4 {
        return Err(Error::InsufficientData("need at least 4 samples".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    let var = m2 * n / (n - 1.0);
    let sd = var.sqrt();
    // Var(s²) ≈ (μ4 − σ⁴)/n, then s = √s²
    let se = ((m4 - m2 * m2) / n).sqrt() / (2.0 * sd);
    Ok(Estimate { value: sd, se })
}

/// Mean of `e^{-λX}` with its standard error.
pub fn empirical_laplace(samples: &[f64], lambda: f64) -> Result<Estimate> {
    if samples.is_empty() {
        return Err(Error::InsufficientData(
            "empirical Laplace transform of an empty sample".into(),
        ));
    }
    if !(lambda >= 0.0) || lambda.is_infinite() {
        return Err(invalid(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )));
    }
    if lambda == 0.0 {
        return Ok(Estimate {
            value: 1.0,
            se: 0.0,
        });
    }
    let values: Vec<f64> = samples.iter().map(|&x| (-lambda * x).exp()).collect();
    Estimate::mean_of(&values)
}

/// Bootstrap replicate of a statistic under resampling with replacement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bootstrap {
    pub estimate: f64,
    pub se: f64,
    /// 2.5% and 97.5% percentiles of the replicates.
    pub lo: f64,
    pub hi: f64,
}

/// Nonparametric bootstrap of `statistic`; replicate `r` resamples with stream
/// `(seed, r)` so the result does not depend on thread scheduling.
pub fn bootstrap<F>(samples: &[f64], statistic: F, resamples: usize, seed: u64) -> Result<Bootstrap>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if samples.is_empty() {
        return Err(Error::InsufficientData(
            "bootstrap of an empty sample".into(),
        ));
    }
    if resamples < 2 {
        return Err(invalid("need at least 2 bootstrap resamples"));
    }
    let estimate = statistic(samples);
    let n = samples.len();
    let mut reps: Vec<f64> = (0..resamples as u64)
        .into_par_iter()
        .map_init(
            || vec![0.0; n],
            |buf, r| {
                let mut rng = WalkRng::new(seed, Domain::Bootstrap, r);
                for slot in buf.iter_mut() {
                    *slot = samples[bounded(&mut rng, n)];
                }
                statistic(buf)
            },
        )
        .collect();
    let m = reps.iter().sum::<f64>() / resamples as f64;
    let se = (reps.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (resamples as f64 - 1.0)).sqrt();
    reps.sort_by(f64::total_cmp);
    let pick = |p: f64| reps[((p * (resamples - 1) as f64).round() as usize).min(resamples - 1)];
    Ok(Bootstrap {
        estimate,
        se,
        lo: pick(0.025),
        hi: pick(0.975),
    })
}

#[inline]
pub(crate) fn bounded(rng: &mut WalkRng, n: usize) -> usize {
    // multiply-shift; bias is below 2^-32 for the sample sizes used here
    ((rand::RngCore::next_u64(rng) as u128 * n as u128) >> 64) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub q: f64,
    pub value: f64,
    pub se: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Sample mean of `x^q` with a bootstrap standard error.
pub fn moment_estimate_seeded(
    samples: &[f64],
    q: f64,
    resamples: usize,
    seed: u64,
) -> Result<MomentEstimate> {
    if !(q > 0.0) || q.is_infinite() {
        return Err(invalid(format!("q must be finite and > 0, got {q}")));
    }
    if samples.iter().any(|&x| !(x >= 0.0)) {
        return Err(invalid("moment samples must be >= 0"));
    }
    let powered: Vec<f64> = samples.iter().map(|&x| x.powf(q)).collect();
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let b = bootstrap(&powered, mean, resamples, seed)?;
    Ok(MomentEstimate {
        q,
        value: b.estimate,
        se: b.se,
        lo: b.lo,
        hi: b.hi,
    })
}

pub fn moment_estimate(samples: &[f64], q: f64) -> Result<MomentEstimate> {
    moment_estimate_seeded(samples, q, DEFAULT_RESAMPLES, 0)
}

/// Median of a sample (mean of the two central order statistics).
pub fn median(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("median of an empty sample".into()));
    }
    let mut v = samples.to_vec();
    Ok(median_in_place(&mut v))
}

pub(crate) fn median_in_place(v: &mut [f64]) -> f64 {
    let n = v.len();
    let mid = n / 2;
    let (_, &mut hi, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    if n % 2 == 1 {
        hi
    } else {
        let lo = v[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lo + hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{limit_laplace_l, moment_prediction};

    #[test]
    fn laplace_of_constant_samples() {
        let e = empirical_laplace(&[2.5; 100], 0.7).unwrap();
        assert!((e.value - (-0.7f64 * 2.5).exp()).abs() < 1e-15);
        assert!(e.se < 1e-15);
        assert_eq!(empirical_laplace(&[1.0, 3.0], 0.0).unwrap().value, 1.0);
        assert!(empirical_laplace(&[], 1.0).is_err());
        assert!(empirical_laplace(&[1.0], -1.0).is_err());
    }

    #[test]
    fn laplace_of_exponential_samples() {
        let mut rng = WalkRng::new(1, Domain::Verify, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| -(1.0 - rng.uniform()).ln()).collect();
        let e = empirical_laplace(&xs, 1.0).unwrap();
        assert!(e.within_se(0.5, 3.0), "{e:?}");
    }

    #[test]
    fn laplace_is_monotone_in_lambda() {
        let mut rng = WalkRng::new(2, Domain::Verify, 0);
        let xs: Vec<f64> = (0..1000).map(|_| sample_levy(&mut rng)).collect();
        let mut prev = 1.0;
        for i in 1..100 {
            let v = empirical_laplace(&xs, i as f64 * 0.1).unwrap().value;
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn moment_of_constant() {
        let m = moment_estimate(&[3.0; 50], 2.0).unwrap();
        assert!((m.value - 9.0).abs() < 1e-12);
        assert!(m.se.abs() < 1e-12);
        assert!(moment_estimate(&[], 2.0).is_err());
        assert!(moment_estimate(&[1.0], 0.0).is_err());
    }

    #[test]
    fn bootstrap_is_deterministic() {
        let xs: Vec<f64> = (0..500).map(|i| (i as f64).sqrt()).collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let a = bootstrap(&xs, mean, 200, 9).unwrap();
        let b = bootstrap(&xs, mean, 200, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.lo <= a.estimate && a.estimate <= a.hi);
        let classical = Estimate::mean_of(&xs).unwrap().se;
        assert!((a.se / classical - 1.0).abs() < 0.2);
    }

    #[test]
    fn median_examples() {
        assert_eq!(median(&[3.0, 1.0, 2.0]).unwrap(), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]).unwrap(), 2.5);
        assert!(median(&[]).is_err());
    }

    #[test]
    fn std_dev_of_uniform() {
        let mut rng = WalkRng::new(3, Domain::Verify, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| rng.uniform()).collect();
        let sd = std_dev_estimate(&xs).unwrap();
        assert!(sd.within_se((1.0f64 / 12.0).sqrt(), 3.0), "{sd:?}");
    }

    #[test]
    fn moment_formula_matches_levy_sampler() {
        // (1/(2ν))^{2ν} L^{-ν} has the predicted positive moments
        let n = 100_000;
        let mut rng = WalkRng::new(4, Domain::Reference, 0);
        let levy: Vec<f64> = (0..n).map(|_| sample_levy(&mut rng)).collect();
        for gamma in [0.1f64, 0.25, 0.4] {
            let nu: f64 = 1.0 / (2.0 - 2.0 * gamma);
            let scale = (1.0 / (2.0 * nu)).powf(2.0 * nu);
            let xs: Vec<f64> = levy.iter().map(|l| scale * l.powf(-nu)).collect();
            for q in [1.0, 1.5, 2.0] {
                let m = moment_estimate_seeded(&xs, q, 200, 1).unwrap();
                let exact = moment_prediction(q, gamma).unwrap();
                assert!(
                    (m.value - exact).abs() < 3.0 * m.se,
                    "γ={gamma} q={q}: {m:?} vs {exact}"
                );
            }
        }
        let e = empirical_laplace(&levy, 1.0).unwrap();
        assert!(e.within_se(limit_laplace_l(1.0).unwrap(), 3.0));
    }
}
