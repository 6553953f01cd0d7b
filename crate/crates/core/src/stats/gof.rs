use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{invalid, Error, Result};

/// Asymptotic Kolmogorov critical constant at the 1% level.
pub const KS_C_01: f64 = 1.628;

/// One-sample critical value `c(0.01)/√n`.
pub fn ks_critical(n: usize) -> f64 {
    KS_C_01 / (n as f64).sqrt()
}

/// Two-sample critical value `c(0.01)·√((n+m)/(nm))`.
pub fn ks_critical_two_sample(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    KS_C_01 * ((n + m) / (n * m)).sqrt()
}

fn sorted_finite(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("empty sample".into()));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(invalid("sample contains NaN"));
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Sup-distance between the empirical distribution of `samples` and a
/// continuous distribution function.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    let v = sorted_finite(samples)?;
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    let mut prev_f = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        if !(0.0..=1.0).contains(&f) {
            return Err(invalid(format!("cdf({x}) = {f} is outside [0, 1]")));
        }
        if f < prev_f {
            return Err(invalid(format!("cdf decreases at {x}")));
        }
        prev_f = f;
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// Two-sample Kolmogorov–Smirnov statistic; ties are stepped over together.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    let a = sorted_finite(a)?;
    let b = sorted_finite(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Sup-distance between the empirical and a reference distribution function,
/// both supported on the integers.
pub fn ks_distance_discrete<F: Fn(i64) -> f64>(samples: &[i64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("empty sample".into()));
    }
    let mut v = samples.to_vec();
    v.sort_unstable();
    let n = v.len() as f64;
    let (lo, hi) = (v[0], v[v.len() - 1]);
    let mut d: f64 = 0.0;
    let mut idx = 0;
    let mut prev_f = 0.0;
    for j in (lo - 1)..=hi {
        while idx < v.len() && v[idx] <= j {
            idx += 1;
        }
        let f = cdf(j);
        if !(0.0..=1.0).contains(&f) || f < prev_f {
            return Err(invalid(format!("invalid cdf value {f} at {j}")));
        }
        prev_f = f;
        d = d.max((idx as f64 / n - f).abs());
    }
    Ok(d)
}

/// `sup_j |P̂(X ≥ j) − S(j)|` over the lattice `j = 0, 1, …, max + 1` for a
/// nonnegative integer sample and a reference survival function `S`.
pub fn lattice_tail_distance<F: Fn(u64) -> f64>(samples: &[u64], survival: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("empty sample".into()));
    }
    let hi = *samples.iter().max().unwrap() as usize;
    let mut counts = vec![0u64; hi + 2];
    for &s in samples {
        counts[s as usize] += 1;
    }
    let n = samples.len() as f64;
    let mut at_least = samples.len() as u64;
    let mut d: f64 = 0.0;
    for (j, &c) in counts.iter().enumerate() {
        let s = survival(j as u64);
        if !(0.0..=1.0).contains(&s) {
            return Err(invalid(format!("survival({j}) = {s} is outside [0, 1]")));
        }
        d = d.max((at_least as f64 / n - s).abs());
        at_least -= c;
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub bins: usize,
}

/// Pearson goodness of fit of `observed` counts to cell probabilities `probs`.
///
/// Cells with expected count below 5 are pooled into a single cell. The
/// probabilities need not sum to one: the remainder becomes its own cell
/// matched against `overflow` observed counts.
pub fn chi_square_gof(observed: &[u64], probs: &[f64], overflow: u64) -> Result<ChiSquare> {
    if observed.len() != probs.len() {
        return Err(invalid("observed and probability vectors differ in length"));
    }
    let n = observed.iter().sum::<u64>() + overflow;
    if n == 0 {
        return Err(Error::InsufficientData("no observations".into()));
    }
    let nf = n as f64;
    let rest = 1.0 - probs.iter().sum::<f64>();
    let rest = if rest < 1e-12 { 0.0 } else { rest };
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (overflow as f64, rest * nf);
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * nf;
        if e >= 5.0 {
            cells.push((o as f64, e));
        } else {
            pooled.0 += o as f64;
            pooled.1 += e;
        }
    }
    if pooled.1 > 0.0 {
        cells.push(pooled);
    } else if pooled.0 > 0.0 {
        return Err(invalid("observations fall in a cell of zero probability"));
    }
    if cells.len() < 2 {
        return Err(Error::InsufficientData(
            "fewer than two chi-square cells".into(),
        ));
    }
    let statistic = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = cells.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| invalid(e.to_string()))?;
    Ok(ChiSquare {
        statistic,
        dof,
        p_value: 1.0 - dist.cdf(statistic),
        bins: cells.len(),
    })
}
