//! Closed-form expressions for the walk with memory of its maximum distance.
//!
//! Everything here is a pure function of its arguments. Transforms of the
//! simple symmetric walk exit times are evaluated in log-space so that large
//! intervals and large `λ` neither overflow nor cancel.

use std::f64::consts::{LN_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Result};

/// Below this `λ` the series `θ ≈ √(2λ)(1 + λ/6)` is used.
pub const THETA_SERIES_CUTOFF: f64 = 1e-8;

/// Probability of stepping away from the origin while sitting on the maximum.
///
/// `z^γ / (1 + z^γ)`, evaluated as `1 / (1 + z^{-γ})`.
pub fn step_probability(z: u64, gamma: f64) -> Result<f64> {
    if z == 0 {
        return Err(invalid("step probability is only defined for z >= 1"));
    }
    if !gamma.is_finite() {
        return Err(invalid(format!("gamma must be finite, got {gamma}")));
    }
    Ok(1.0 / (1.0 + (z as f64).powf(-gamma)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Subdiffusive,
    Ssrw,
    Superdiffusive,
    BallisticBoundary,
    Ballistic,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::Subdiffusive => "subdiffusive",
            Regime::Ssrw => "ssrw",
            Regime::Superdiffusive => "superdiffusive",
            Regime::BallisticBoundary => "ballistic_boundary",
            Regime::Ballistic => "ballistic",
        };
        f.write_str(s)
    }
}

/// Limit law of `z(t)/t^ν`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum LimitLaw {
    /// Deterministic constant `(1/2ν)^ν`.
    Constant { value: f64 },
    /// `1/T^{1/2}` with `T` the exit time of Brownian motion from `[-1, 1]`.
    InverseSqrtT,
    /// `scale / L^ν` with `scale = (1/2ν)^{2ν}` and `L` a unit Lévy variable.
    LevyPower { scale: f64, nu: f64 },
    /// `1/(4L + 1)`.
    BallisticLevy,
    /// Deterministic 1.
    Unit,
}

impl fmt::Display for LimitLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LimitLaw::Constant { value } => write!(f, "(1/2ν)^ν = {value}"),
            LimitLaw::InverseSqrtT => f.write_str("1/T^{1/2}"),
            LimitLaw::LevyPower { .. } => f.write_str("(1/2ν)^{2ν}/L^ν"),
            LimitLaw::BallisticLevy => f.write_str("1/(4L+1)"),
            LimitLaw::Unit => f.write_str("1"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimePrediction {
    pub gamma: f64,
    pub nu: f64,
    pub regime: Regime,
    pub limit: LimitLaw,
}

/// Scaling exponent and limit law of the running maximum for a given `γ`.
pub fn predict_regime(gamma: f64) -> Result<RegimePrediction> {
    if !gamma.is_finite() {
        return Err(invalid(format!("gamma must be finite, got {gamma}")));
    }
    let (nu, regime, limit) = if gamma < 0.0 {
        let nu = 1.0 / (2.0 - gamma);
        let value = (1.0 / (2.0 * nu)).powf(nu);
        (nu, Regime::Subdiffusive, LimitLaw::Constant { value })
    } else if gamma == 0.0 {
        (0.5, Regime::Ssrw, LimitLaw::InverseSqrtT)
    } else if gamma < 0.5 {
        let nu = 1.0 / (2.0 - 2.0 * gamma);
        let scale = (1.0 / (2.0 * nu)).powf(2.0 * nu);
        (
            nu,
            Regime::Superdiffusive,
            LimitLaw::LevyPower { scale, nu },
        )
    } else if gamma == 0.5 {
        (1.0, Regime::BallisticBoundary, LimitLaw::BallisticLevy)
    } else {
        (1.0, Regime::Ballistic, LimitLaw::Unit)
    };
    Ok(RegimePrediction {
        gamma,
        nu,
        regime,
        limit,
    })
}

/// Exponent `ν(γ)` alone.
pub fn scaling_exponent(gamma: f64) -> Result<f64> {
    predict_regime(gamma).map(|p| p.nu)
}

/// `θ(λ) = arccosh(e^λ)`, the inverse of `λ = ln cosh θ`.
pub fn theta(lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) || lambda.is_infinite() {
        return Err(invalid(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )));
    }
    Ok(theta_unchecked(lambda))
}

#[inline]
pub(crate) fn theta_unchecked(lambda: f64) -> f64 {
    if lambda < THETA_SERIES_CUTOFF {
        (2.0 * lambda).sqrt() * (1.0 + lambda / 6.0)
    } else if lambda < 1.0 {
        // ln(e^λ + √(e^{2λ} − 1)) with u = e^λ − 1 taken from expm1
        let u = lambda.exp_m1();
        (u + (u * (u + 2.0)).sqrt()).ln_1p()
    } else {
        lambda + (-(-2.0 * lambda).exp_m1()).sqrt().ln_1p()
    }
}

/// `ln cosh u`, exact for all finite `u`.
#[inline]
pub fn log_cosh(u: f64) -> f64 {
    let a = u.abs();
    a + (-2.0 * a).exp().ln_1p() - LN_2
}

/// `cosh(θc)/cosh(θd)` for `d >= |c|`, written as
/// `e^{-θ(d−|c|)} (1 + e^{-2θ|c|}) / (1 + e^{-2θd})` so that nothing of
/// size `θd` is ever subtracted.
#[inline]
pub(crate) fn cosh_ratio(th: f64, c: f64, d: f64) -> f64 {
    log_cosh_ratio(th, c, d).exp()
}

#[inline]
fn log_cosh_ratio(th: f64, c: f64, d: f64) -> f64 {
    let c = c.abs();
    -th * (d - c) + (-2.0 * th * c).exp().ln_1p() - (-2.0 * th * d).exp().ln_1p()
}

/// Laplace transform of the simple symmetric walk exit time from `[a, b]`
/// started at 0: `cosh(θc)/cosh(θd)` with `c = (a+b)/2`, `d = (b−a)/2`.
pub fn laplace_exit_interval(lambda: f64, a: i64, b: i64) -> Result<f64> {
    if a >= 0 || b <= 0 {
        return Err(invalid(format!("need a < 0 < b, got [{a}, {b}]")));
    }
    let th = theta(lambda)?;
    let c = (a as f64 + b as f64) / 2.0;
    let d = (b as f64 - a as f64) / 2.0;
    Ok(cosh_ratio(th, c, d))
}

/// Laplace transform of the lazy-journey exit time `m(z)`:
/// `cosh(θ(z−1))/cosh(θz)`.
pub fn laplace_m(lambda: f64, z: u64) -> Result<f64> {
    if z < 1 {
        return Err(invalid("laplace_m needs z >= 1"));
    }
    let th = theta(lambda)?;
    let z = z as f64;
    Ok(cosh_ratio(th, z - 1.0, z))
}

fn check_positive(x: f64, what: &str) -> Result<()> {
    if !(x > 0.0) || x.is_nan() {
        return Err(invalid(format!("{what} must be > 0, got {x}")));
    }
    Ok(())
}

/// Density of the unit Lévy law, `(2πx³)^{-1/2} e^{-1/(2x)}`.
pub fn levy_pdf(x: f64) -> Result<f64> {
    check_positive(x, "x")?;
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok((2.0 * PI * x * x * x).sqrt().recip() * (-0.5 / x).exp())
}

/// Distribution function of the unit Lévy law, `erfc(1/√(2x))`.
pub fn levy_cdf(x: f64) -> Result<f64> {
    check_positive(x, "x")?;
    Ok(levy_cdf_unchecked(x))
}

#[inline]
pub(crate) fn levy_cdf_unchecked(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x.is_infinite() {
        1.0
    } else {
        erfc((2.0 * x).sqrt().recip())
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) {
        return Err(invalid(format!("lambda must be >= 0, got {lambda}")));
    }
    Ok(())
}

/// `E[e^{-λL}] = e^{-√(2λ)}`.
pub fn limit_laplace_l(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok((-(2.0 * lambda).sqrt()).exp())
}

/// `E[e^{-λT}] = 1/cosh(√(2λ))`.
pub fn limit_laplace_t(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok((-log_cosh((2.0 * lambda).sqrt())).exp())
}

fn superdiffusive_nu(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 0.5) {
        return Err(invalid(format!("gamma must lie in (0, 1/2), got {gamma}")));
    }
    Ok(1.0 / (2.0 - 2.0 * gamma))
}

/// Limit of `E[(z(t)/t^ν)^q]` for `0 < γ < 1/2`:
/// `(1/(2ν²))^{qν} Γ(qν + 1/2) / Γ(1/2)`.
pub fn moment_prediction(q: f64, gamma: f64) -> Result<f64> {
    check_positive(q, "q")?;
    let nu = superdiffusive_nu(gamma)?;
    let qn = q * nu;
    let log = -qn * (2.0 * nu * nu).ln() + ln_gamma(qn + 0.5) - ln_gamma(0.5);
    Ok(log.exp())
}

fn check_reference_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&gamma) {
        return Err(invalid(format!("gamma must lie in [0, 1/2], got {gamma}")));
    }
    Ok(())
}

/// Inverts the limit law of `z(t)` into an estimate of the reference variable.
///
/// * `γ = 0`: `T̂ = t/z²`
/// * `0 < γ < 1/2`: `L̂ = t / ((2ν)² z^{1/ν})`
/// * `γ = 1/2`: `L̂ = (t/z − 1)/4`
pub fn limit_transform_to_reference(z: f64, t: f64, gamma: f64) -> Result<f64> {
    check_reference_gamma(gamma)?;
    if !(z >= 1.0 && t >= z) {
        return Err(invalid(format!("need t >= z >= 1, got z={z}, t={t}")));
    }
    Ok(if gamma == 0.0 {
        t / (z * z)
    } else if gamma == 0.5 {
        (t / z - 1.0) / 4.0
    } else {
        let nu = 1.0 / (2.0 - 2.0 * gamma);
        t / ((2.0 * nu).powi(2) * z.powf(1.0 / nu))
    })
}

/// The forward limit law: the maximum implied at time `t` by a reference
/// variable value (`T` for `γ = 0`, `L` otherwise).
pub fn limit_law_maximum(reference: f64, t: f64, gamma: f64) -> Result<f64> {
    check_reference_gamma(gamma)?;
    check_positive(t, "t")?;
    if !(reference >= 0.0) {
        return Err(invalid(format!(
            "reference value must be >= 0, got {reference}"
        )));
    }
    Ok(if gamma == 0.0 {
        (t / reference).sqrt()
    } else if gamma == 0.5 {
        t / (4.0 * reference + 1.0)
    } else {
        let nu = 1.0 / (2.0 - 2.0 * gamma);
        (1.0 / (2.0 * nu)).powf(2.0 * nu) * t.powf(nu) / reference.powf(nu)
    })
}

fn check_growth_gamma(gamma: f64) -> Result<()> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(invalid(format!("gamma must lie in [0, 1), got {gamma}")));
    }
    Ok(())
}

/// Deterministic growth of the maximum with the cycle count,
/// `((1−γ) k)^{1/(1−γ)}`.
pub fn deterministic_z_of_k(k: u64, gamma: f64) -> Result<f64> {
    check_growth_gamma(gamma)?;
    if k < 1 {
        return Err(invalid("k must be >= 1"));
    }
    let g = 1.0 - gamma;
    Ok((g * k as f64).powf(1.0 / g))
}

/// Correction factor `R(k)` of the product representation of `E[e^{-λL(k)}]`.
pub fn r_product(k: u64, lambda: f64, gamma: f64) -> Result<f64> {
    check_growth_gamma(gamma)?;
    check_positive(lambda, "lambda")?;
    if k < 1 {
        return Err(invalid("k must be >= 1"));
    }
    let kf = k as f64;
    let th = theta(lambda / (kf * kf))?;
    let g = 1.0 - gamma;
    let mut log_r = 0.0;
    for i in 1..k {
        let z = (g * i as f64).powf(1.0 / g);
        log_r += (-2.0 * th * (z - 1.0)).exp().ln_1p() - (-2.0 * th * z).exp().ln_1p();
    }
    Ok(log_r.exp())
}

/// Exact Laplace transform of `L(k)` under the deterministic growth law,
/// `Π_{i<k} cosh(θ(z_i − 1))/cosh(θ z_i)` with `θ = θ(λ/k²)`.
pub fn laplace_l_of_k(k: u64, lambda: f64, gamma: f64) -> Result<f64> {
    check_growth_gamma(gamma)?;
    check_lambda(lambda)?;
    if k < 1 {
        return Err(invalid("k must be >= 1"));
    }
    let kf = k as f64;
    let th = theta(lambda / (kf * kf))?;
    let g = 1.0 - gamma;
    let mut log = 0.0;
    for i in 1..k {
        let z = (g * i as f64).powf(1.0 / g);
        log += log_cosh_ratio(th, z - 1.0, z);
    }
    Ok(log.exp())
}

/// A Laplace transform tabulated on a grid of `λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplaceGrid {
    pub lambdas: Vec<f64>,
    pub values: Vec<f64>,
}

impl LaplaceGrid {
    pub fn tabulate<F>(lambdas: &[f64], f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64>,
    {
        if lambdas.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("lambda grid must be strictly increasing"));
        }
        if lambdas.iter().any(|&l| !(l > 0.0)) {
            return Err(invalid("lambda grid must be positive"));
        }
        let values = lambdas.iter().map(|&l| f(l)).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            lambdas: lambdas.to_vec(),
            values,
        })
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Adaptive Simpson quadrature, test oracle only.
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
        fn rec<F: Fn(f64) -> f64>(
            f: &F,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = f(lm);
            let frm = f(rm);
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            let delta = left + right - whole;
            if depth == 0 || delta.abs() <= 15.0 * tol {
                left + right + delta / 15.0
            } else {
                rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                    + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
            }
        }
        let fa = f(a);
        let fb = f(b);
        let fm = f(0.5 * (a + b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, b, fa, fm, fb, whole, tol, 50)
    }

    /// Bisection root of cosh(θ) = e^λ, test oracle only.
    fn theta_by_bisection(lambda: f64) -> f64 {
        let target = lambda.exp();
        let (mut lo, mut hi) = (0.0f64, lambda + 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid.cosh() < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn step_probability_examples() {
        assert_eq!(step_probability(7, 0.0).unwrap(), 0.5);
        assert_eq!(step_probability(1, 3.7).unwrap(), 0.5);
        assert!(close(step_probability(4, 0.5).unwrap(), 2.0 / 3.0, 1e-15));
        assert!(step_probability(0, 0.5).is_err());
        assert!(step_probability(0, -1.0).is_err());
        assert!(step_probability(3, f64::NAN).is_err());
        // large z^γ stays strictly below 1 until it rounds
        let p = step_probability(1_000_000, 0.25).unwrap();
        assert!(p > 0.96 && p < 1.0);
    }

    #[test]
    fn regime_examples() {
        let p = predict_regime(-2.0).unwrap();
        assert_eq!(p.regime, Regime::Subdiffusive);
        assert!(close(p.nu, 0.25, 1e-15));
        match p.limit {
            LimitLaw::Constant { value } => assert!(close(value, 2.0f64.powf(0.25), 1e-14)),
            other => panic!("unexpected {other:?}"),
        }
        let p = predict_regime(0.25).unwrap();
        assert_eq!(p.regime, Regime::Superdiffusive);
        assert!(close(p.nu, 2.0 / 3.0, 1e-15));
        match p.limit {
            LimitLaw::LevyPower { scale, nu } => {
                assert!(close(nu, 2.0 / 3.0, 1e-15));
                assert!(close(scale, 0.75f64.powf(4.0 / 3.0), 1e-14));
            }
            other => panic!("unexpected {other:?}"),
        }
        let p = predict_regime(2.0).unwrap();
        assert_eq!(p.regime, Regime::Ballistic);
        assert_eq!(p.nu, 1.0);
        assert_eq!(p.limit, LimitLaw::Unit);
        assert_eq!(predict_regime(0.0).unwrap().regime, Regime::Ssrw);
        assert_eq!(
            predict_regime(0.5).unwrap().regime,
            Regime::BallisticBoundary
        );
        assert!(predict_regime(f64::INFINITY).is_err());
    }

    #[test]
    fn nu_is_continuous_at_regime_boundaries() {
        for edge in [0.0, 0.5] {
            let left = scaling_exponent(edge - 1e-9).unwrap();
            let right = scaling_exponent(edge + 1e-9).unwrap();
            let at = scaling_exponent(edge).unwrap();
            assert!(close(left, at, 1e-8), "left limit at {edge}");
            assert!(close(right, at, 1e-8), "right limit at {edge}");
        }
    }

    #[test]
    fn nu_is_monotone() {
        let mut prev = f64::NEG_INFINITY;
        for i in -400..=400 {
            let g = i as f64 / 100.0;
            let nu = scaling_exponent(g).unwrap();
            assert!(nu >= prev);
            if g >= 0.5 {
                assert_eq!(nu, 1.0);
            }
            prev = nu;
        }
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta(0.0).unwrap(), 0.0);
        let t1 = theta(1.0).unwrap();
        assert!(close(t1, theta_by_bisection(1.0), 1e-12));
        assert!(close(t1.cosh(), 1.0f64.exp(), 1e-12));
        let small = theta(1e-6).unwrap();
        assert!(((small - (2e-6f64).sqrt()) / (2e-6f64).sqrt()).abs() < 1e-3);
        assert!(theta(-1e-3).is_err());
        assert!(theta(f64::NAN).is_err());
    }

    #[test]
    fn theta_inverts_log_cosh() {
        let mut grid = vec![0.0];
        let mut l = 1e-10;
        while l <= 50.0 {
            grid.push(l);
            l *= 1.37;
        }
        grid.extend([THETA_SERIES_CUTOFF, 0.999_999, 1.0, 1.000_001, 50.0]);
        for lambda in grid {
            let th = theta(lambda).unwrap();
            let rel = th.cosh() / lambda.exp() - 1.0;
            assert!(rel.abs() < 1e-12, "λ={lambda}: rel {rel}");
        }
    }

    #[test]
    fn theta_series_matches_closed_form_at_cutoff() {
        let l = THETA_SERIES_CUTOFF;
        let series = (2.0 * l).sqrt() * (1.0 + l / 6.0);
        let u = l.exp_m1();
        let closed = (u + (u * (u + 2.0)).sqrt()).ln_1p();
        assert!(((series - closed) / closed).abs() < 1e-12);
    }

    #[test]
    fn laplace_exit_interval_examples() {
        for lambda in [0.01, 0.3, 2.0] {
            let v = laplace_exit_interval(lambda, -1, 1).unwrap();
            assert!(close(v, 1.0 / theta(lambda).unwrap().cosh(), 1e-14));
        }
        for (a, b) in [(-1, 1), (-7, 2), (-3, 40)] {
            assert_eq!(laplace_exit_interval(0.0, a, b).unwrap(), 1.0);
        }
        let lambda = 0.2;
        let mut prev = 1.0;
        for b in 1..60 {
            let v = laplace_exit_interval(lambda, -b, b).unwrap();
            assert!(v < prev);
            prev = v;
        }
        assert!(laplace_exit_interval(0.1, 0, 3).is_err());
        assert!(laplace_exit_interval(0.1, -3, 0).is_err());
    }

    #[test]
    fn laplace_m_examples() {
        for lambda in [0.0, 1e-9, 0.1, 1.0, 5.0, 30.0] {
            let v = laplace_m(lambda, 1).unwrap();
            assert!(close(v, (-lambda).exp(), 1e-12), "λ={lambda}");
        }
        for z in [1, 2, 50, 1_000_000] {
            assert_eq!(laplace_m(0.0, z).unwrap(), 1.0);
        }
        for lambda in [0.01, 0.5, 2.0] {
            let v = laplace_m(lambda, 1_000_000).unwrap();
            assert!(close(v, (-theta(lambda).unwrap()).exp(), 1e-9));
        }
        assert!(laplace_m(0.1, 0).is_err());
    }

    #[test]
    fn laplace_m_monotone_on_grids() {
        for z in [1u64, 2, 5, 40] {
            let mut prev = 1.0 + 1e-12;
            for i in 1..200 {
                let v = laplace_m(i as f64 * 0.05, z).unwrap();
                assert!(v < prev);
                prev = v;
            }
        }
        for lambda in [0.01, 0.3, 3.0] {
            let mut prev = 1.0;
            for z in 1..300 {
                let v = laplace_m(lambda, z).unwrap();
                // the sequence saturates at e^{-θ}; allow rounding at the floor
                assert!(v <= prev * (1.0 + 4.0 * f64::EPSILON), "λ={lambda} z={z}");
                prev = v;
            }
        }
    }

    #[test]
    fn laplace_m_handles_huge_arguments() {
        let v = laplace_m(10.0, u32::MAX as u64).unwrap();
        assert!(v.is_finite() && v > 0.0);
        assert!(close(v, (-theta(10.0).unwrap()).exp(), 1e-12));
    }

    #[test]
    fn telescoping_product() {
        let th = 0.37;
        for k in [2u64, 10, 1000] {
            let mut log = 0.0;
            for i in 1..k {
                let i = i as f64;
                log += log_cosh(th * (i - 1.0)) - log_cosh(th * i);
            }
            let expected = 1.0 / (th * (k as f64 - 1.0)).cosh();
            assert!(close(log.exp(), expected, 1e-10));
        }
    }

    #[test]
    fn levy_examples() {
        let pdf1 = levy_pdf(1.0).unwrap();
        assert!(close(
            pdf1,
            (2.0 * PI).sqrt().recip() * (-0.5f64).exp(),
            1e-15
        ));
        assert!(close(pdf1, 0.24197, 1e-5));
        assert!(levy_cdf(1e300).unwrap() > 1.0 - 1e-12);
        assert!(levy_cdf(1e-3).unwrap() < 1e-200);
        assert!(levy_pdf(0.0).is_err());
        assert!(levy_cdf(-1.0).is_err());
    }

    #[test]
    fn levy_cdf_agrees_with_quadrature() {
        let f = |x: f64| if x <= 0.0 { 0.0 } else { levy_pdf(x).unwrap() };
        for x in [0.5, 1.0, 2.0, 5.0] {
            let q = simpson(&f, 0.0, x, 1e-13);
            let c = levy_cdf(x).unwrap();
            assert!((q - c).abs() < 1e-8, "x={x}: {q} vs {c}");
        }
    }

    #[test]
    fn levy_cdf_round_trips_numeric_quantile() {
        let mut prev = 0.0;
        for i in 1..400 {
            let x = i as f64 * 0.05;
            let c = levy_cdf(x).unwrap();
            assert!(c >= prev);
            prev = c;
        }
        for p in [0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99] {
            let (mut lo, mut hi) = (1e-6f64, 1e12f64);
            for _ in 0..300 {
                let mid = (lo * hi).sqrt();
                if levy_cdf(mid).unwrap() < p {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            assert!((levy_cdf(lo).unwrap() - p).abs() < 1e-8);
        }
    }

    #[test]
    fn limit_transforms() {
        assert_eq!(limit_laplace_l(0.0).unwrap(), 1.0);
        assert_eq!(limit_laplace_t(0.0).unwrap(), 1.0);
        assert!(close(limit_laplace_l(0.5).unwrap(), (-1.0f64).exp(), 1e-15));
        assert!(close(limit_laplace_l(0.5).unwrap(), 0.36788, 1e-5));
        assert!(close(
            limit_laplace_t(0.5).unwrap(),
            1.0 / 1.0f64.cosh(),
            1e-15
        ));
        assert!(close(limit_laplace_t(0.5).unwrap(), 0.64805, 1e-5));
        assert!(limit_laplace_l(-0.1).is_err());
        assert!(limit_laplace_t(-0.1).is_err());
    }

    #[test]
    fn moment_prediction_examples() {
        assert!(close(moment_prediction(1.5, 0.25).unwrap(), 0.5625, 1e-12));
        assert!(close(
            moment_prediction(3.0, 0.25).unwrap(),
            243.0 / 256.0,
            1e-12
        ));
        assert!(close(moment_prediction(3.0, 0.25).unwrap(), 0.94922, 1e-5));
        for g in [0.05, 0.25, 0.45] {
            assert!(close(moment_prediction(1e-12, g).unwrap(), 1.0, 1e-9));
        }
        assert!(moment_prediction(1.0, 0.0).is_err());
        assert!(moment_prediction(1.0, 0.5).is_err());
        assert!(moment_prediction(0.0, 0.25).is_err());
    }

    #[test]
    fn reference_transform_examples() {
        let t = 1e6;
        assert!(close(
            limit_transform_to_reference(1000.0, t, 0.0).unwrap(),
            1.0,
            1e-15
        ));
        assert_eq!(limit_transform_to_reference(t, t, 0.5).unwrap(), 0.0);
        let z = (1.0f64 / (4.0 / 3.0)).powf(4.0 / 3.0) * t.powf(2.0 / 3.0);
        let l = limit_transform_to_reference(z, t, 0.25).unwrap();
        let back = limit_law_maximum(l, t, 0.25).unwrap();
        assert!(((back - z) / z).abs() < 1e-9);
        assert!(limit_transform_to_reference(10.0, 100.0, 0.6).is_err());
        assert!(limit_transform_to_reference(10.0, 100.0, -0.1).is_err());
        assert!(limit_transform_to_reference(10.0, 5.0, 0.25).is_err());
    }

    #[test]
    fn deterministic_growth_examples() {
        assert!(close(deterministic_z_of_k(37, 0.0).unwrap(), 37.0, 1e-12));
        assert!(close(deterministic_z_of_k(10, 0.5).unwrap(), 25.0, 1e-12));
        let z = deterministic_z_of_k(8, 0.25).unwrap();
        assert!(close(
            z,
            0.75f64.powf(4.0 / 3.0) * 8.0f64.powf(4.0 / 3.0),
            1e-12
        ));
        assert!(close(z, 10.903, 1e-3));
        assert!(deterministic_z_of_k(8, 1.0).is_err());
        assert!(deterministic_z_of_k(0, 0.2).is_err());
    }

    #[test]
    fn r_product_examples() {
        assert_eq!(r_product(1, 1.0, 0.25).unwrap(), 1.0);
        let limit = 2.0 / (1.0 + (-2.0 * 2.0f64.sqrt()).exp());
        assert!((r_product(100_000, 1.0, 0.0).unwrap() - limit).abs() < 1e-3);
        assert!(r_product(10, 1.0, 1.0).is_err());
        // decreasing towards 1 for γ in (0, 1)
        let a = r_product(1_000, 1.0, 0.25).unwrap();
        let b = r_product(100_000, 1.0, 0.25).unwrap();
        assert!(a > b && b > 1.0);
    }

    #[test]
    fn product_representation_factorizes() {
        for (k, lambda, gamma) in [(50u64, 1.0, 0.25), (400, 0.5, 0.0), (1000, 2.0, 0.4)] {
            let kf = k as f64;
            let th = theta(lambda / (kf * kf)).unwrap();
            let lhs = laplace_l_of_k(k, lambda, gamma).unwrap();
            let rhs = (-th * (kf - 1.0)).exp() * r_product(k, lambda, gamma).unwrap();
            assert!(((lhs - rhs) / lhs).abs() < 1e-10);
        }
    }

    #[test]
    fn laplace_grid_is_nonincreasing() {
        let lambdas: Vec<f64> = (1..50).map(|i| i as f64 * 0.1).collect();
        for z in [1u64, 3, 30] {
            let g = LaplaceGrid::tabulate(&lambdas, |l| laplace_m(l, z)).unwrap();
            assert!(g.is_nonincreasing());
            assert!(g.values.iter().all(|&v| v > 0.0 && v <= 1.0));
        }
        let near_zero = laplace_m(1e-12, 10).unwrap();
        assert!(close(near_zero, 1.0, 1e-9));
        assert!(LaplaceGrid::tabulate(&[0.5, 0.1], limit_laplace_l).is_err());
    }
}
