use serde::{Deserialize, Serialize};

use super::{
    empirical_laplace, ks_distance, median, moment_estimate_seeded, MomentEstimate,
    DEFAULT_RESAMPLES,
};
use crate::error::{invalid, Error, Result};
use crate::model::{
    levy_cdf_unchecked, limit_laplace_l, limit_laplace_t, limit_transform_to_reference,
    scaling_exponent,
};

/// Empirical distribution function over a sorted copy of the sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InsufficientData("ECDF of an empty sample".into()));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(invalid("sample contains NaN"));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Fraction of the sample `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    /// Smallest sample value with ECDF `>= p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.sorted.len();
        let idx = ((p * n as f64).ceil() as usize).clamp(1, n) - 1;
        self.sorted[idx]
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplacePoint {
    pub lambda: f64,
    pub value: f64,
    pub se: f64,
    pub reference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryConfig {
    pub lambdas: Vec<f64>,
    pub qs: Vec<f64>,
    pub resamples: usize,
    pub seed: u64,
}

impl Default for SummaryConfig {
    fn default() -> Self {
        Self {
            lambdas: vec![0.5, 1.0, 2.0],
            qs: vec![1.0, 1.5, 2.0],
            resamples: DEFAULT_RESAMPLES,
            seed: 0,
        }
    }
}

/// Statistics of one checkpoint of an ensemble.
///
/// Moments are of `z/t^ν`. The Laplace table and the ECDF are of the
/// reference variable recovered from the limit law (`T̂` for `γ = 0`, `L̂` for
/// `0 < γ <= 1/2`) and are empty outside that range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub t: u64,
    pub count: usize,
    pub gamma: f64,
    pub nu: f64,
    pub median_z: f64,
    pub moments: Vec<MomentEstimate>,
    pub laplace: Vec<LaplacePoint>,
    /// KS distance of `L̂` against the Lévy distribution function.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levy_ks: Option<f64>,
    #[serde(skip)]
    pub ecdf: Option<Ecdf>,
}

pub fn summarize(
    t: u64,
    zs: &[u64],
    gamma: f64,
    config: &SummaryConfig,
) -> Result<EnsembleSummary> {
    if zs.is_empty() {
        return Err(Error::InsufficientData(format!("no samples at t={t}")));
    }
    let nu = scaling_exponent(gamma)?;
    let tf = t as f64;
    let zf: Vec<f64> = zs.iter().map(|&z| z as f64).collect();
    let scale = tf.powf(nu);
    let scaled: Vec<f64> = zf.iter().map(|z| z / scale).collect();
    let moments = config
        .qs
        .iter()
        .map(|&q| moment_estimate_seeded(&scaled, q, config.resamples, config.seed ^ t))
        .collect::<Result<Vec<_>>>()?;

    let (laplace, levy_ks, ecdf) = if (0.0..=0.5).contains(&gamma) {
        let reference: Vec<f64> = zf
            .iter()
            .map(|&z| limit_transform_to_reference(z, tf, gamma))
            .collect::<Result<_>>()?;
        let laplace = config
            .lambdas
            .iter()
            .map(|&lambda| {
                let e = empirical_laplace(&reference, lambda)?;
                let exact = if gamma == 0.0 {
                    limit_laplace_t(lambda)?
                } else {
                    limit_laplace_l(lambda)?
                };
                Ok(LaplacePoint {
                    lambda,
                    value: e.value,
                    se: e.se,
                    reference: exact,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let ks = if gamma > 0.0 {
            Some(ks_distance(&reference, levy_cdf_unchecked)?)
        } else {
            None
        };
        (laplace, ks, Some(Ecdf::new(&reference)?))
    } else {
        (Vec::new(), None, None)
    };

    Ok(EnsembleSummary {
        t,
        count: zs.len(),
        gamma,
        nu,
        median_z: median(&zf)?,
        moments,
        laplace,
        levy_ks,
        ecdf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ecdf_basics() {
        let e = Ecdf::new(&[3.0, 1.0, 2.0, 2.0]).unwrap();
        assert_eq!(e.eval(0.5), 0.0);
        assert_eq!(e.eval(2.0), 0.75);
        assert_eq!(e.eval(10.0), 1.0);
        assert_eq!(e.quantile(0.5), 2.0);
        assert_eq!(e.quantile(1.0), 3.0);
        assert!(Ecdf::new(&[]).is_err());
    }

    #[test]
    fn constant_ensemble_moments() {
        // z/t^{1/2} = 0.5 for every walker
        let zs = vec![50u64; 40];
        let s = summarize(10_000, &zs, 0.0, &SummaryConfig::default()).unwrap();
        for m in &s.moments {
            assert!((m.value - 0.5f64.powf(m.q)).abs() < 1e-12);
        }
        assert_eq!(s.count, 40);
        assert_eq!(s.median_z, 50.0);
        // T̂ = 4 for every walker
        for p in &s.laplace {
            assert!((p.value - (-4.0 * p.lambda).exp()).abs() < 1e-12);
        }
        assert!(s.levy_ks.is_none());
    }

    #[test]
    fn out_of_range_gamma_has_no_reference_table() {
        let s = summarize(100, &[10, 12, 14], 0.8, &SummaryConfig::default()).unwrap();
        assert!(s.laplace.is_empty());
        assert!(s.ecdf.is_none());
        assert_eq!(s.nu, 1.0);
    }
}
