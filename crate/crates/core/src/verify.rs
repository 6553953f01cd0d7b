//! Verification suites: analytic identities, exact oracles, journey laws,
//! regime convergence and engine equivalence.
//!
//! Every check records what was measured and the criterion it was held to.
//! Sample sizes and horizons live in [`Budgets`]; the defaults are the ones
//! the checks were designed for, and `tolerance_scale` widens or narrows
//! every tolerance at once.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cycles::{
    ensemble_maxima, exit_time_pmf, run_cycles, sample_m, sample_n, wald_identity_check, Stop,
};
use crate::direct::run_walker;
use crate::error::{invalid, Result};
use crate::model::{
    deterministic_z_of_k, laplace_m, levy_cdf_unchecked, limit_laplace_l, limit_laplace_t,
    limit_transform_to_reference, log_cosh, moment_prediction, r_product, scaling_exponent, theta,
};
use crate::records::Schedule;
use crate::rng::{Domain, WalkRng};
use crate::stats::{
    empirical_laplace, estimate_nu, ks_critical, ks_critical_two_sample, ks_distance,
    ks_two_sample, lattice_tail_distance, median, moment_estimate_seeded, sample_levy, sample_t,
    std_dev_estimate, EnsembleTable, Estimate, NuMethod, DEFAULT_RESAMPLES, DEFAULT_T_RESOLUTION,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Analytic,
    Oracle,
    Journeys,
    Regimes,
    Equivalence,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Analytic,
        Suite::Oracle,
        Suite::Journeys,
        Suite::Regimes,
        Suite::Equivalence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Analytic => "analytic",
            Suite::Oracle => "oracle",
            Suite::Journeys => "journeys",
            Suite::Regimes => "regimes",
            Suite::Equivalence => "equivalence",
        }
    }
}

/// Sample sizes, horizons and seed of the suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Budgets {
    pub seed: u64,
    /// Draws for sampler, journey and Wald checks.
    pub draws: u64,
    /// Draws of the Lévy sampler.
    pub levy_draws: u64,
    /// Ensemble size of the regime checks.
    pub walkers: u64,
    /// Horizon of the regime checks.
    pub t_max: u64,
    /// Horizon of the regime checks for `0 < γ < 1/2`, where the moment
    /// converges slowly.
    pub superdiffusive_t_max: u64,
    /// Cycle count of the growth-law check.
    pub k_cycles: u64,
    /// Samples per engine in the equivalence check.
    pub equivalence_samples: u64,
    /// Time at which the engines are compared.
    pub equivalence_t: u64,
    pub resamples: usize,
    pub tolerance_scale: f64,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            seed: 20_240_601,
            draws: 100_000,
            levy_draws: 1_000_000,
            walkers: 10_000,
            t_max: 1_000_000,
            superdiffusive_t_max: 100_000_000,
            k_cycles: 1_000,
            equivalence_samples: 5_000,
            equivalence_t: 10_000,
            resamples: DEFAULT_RESAMPLES,
            tolerance_scale: 1.0,
        }
    }
}

impl Budgets {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance_scale.is_finite() && self.tolerance_scale > 0.0) {
            return Err(invalid(format!(
                "tolerance scale must be positive, got {}",
                self.tolerance_scale
            )));
        }
        for (name, v) in [
            ("draws", self.draws),
            ("levy draws", self.levy_draws),
            ("walkers", self.walkers),
            ("equivalence samples", self.equivalence_samples),
        ] {
            if v < 2 {
                return Err(invalid(format!("{name} must be >= 2")));
            }
        }
        if self.t_max.min(self.superdiffusive_t_max) < 1000 {
            return Err(invalid("regime horizon must be >= 1000"));
        }
        if self.k_cycles < 2 || self.equivalence_t < 1 || self.resamples < 2 {
            return Err(invalid(
                "cycle count, comparison time and resamples must be positive",
            ));
        }
        Ok(())
    }
}

/// What a measurement is held to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Criterion {
    Absolute {
        expected: f64,
        tolerance: f64,
    },
    Relative {
        expected: f64,
        tolerance: f64,
    },
    Below {
        limit: f64,
    },
    Above {
        limit: f64,
    },
    Interval {
        lo: f64,
        hi: f64,
    },
    /// A property that either holds or not; `measured` is 1 when it does.
    Holds,
}

impl Criterion {
    fn scaled(self, s: f64) -> Self {
        match self {
            Criterion::Absolute {
                expected,
                tolerance,
            } => Criterion::Absolute {
                expected,
                tolerance: tolerance * s,
            },
            Criterion::Relative {
                expected,
                tolerance,
            } => Criterion::Relative {
                expected,
                tolerance: tolerance * s,
            },
            Criterion::Below { limit } => Criterion::Below { limit: limit * s },
            Criterion::Above { limit } => Criterion::Above { limit: limit / s },
            Criterion::Interval { lo, hi } => {
                let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo) * s);
                Criterion::Interval {
                    lo: mid - half,
                    hi: mid + half,
                }
            }
            Criterion::Holds => Criterion::Holds,
        }
    }

    fn accepts(&self, m: f64) -> bool {
        match *self {
            Criterion::Absolute {
                expected,
                tolerance,
            } => (m - expected).abs() <= tolerance,
            Criterion::Relative {
                expected,
                tolerance,
            } => (m - expected).abs() <= tolerance * expected.abs(),
            Criterion::Below { limit } => m < limit,
            Criterion::Above { limit } => m > limit,
            Criterion::Interval { lo, hi } => lo <= m && m <= hi,
            Criterion::Holds => m == 1.0,
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Criterion::Absolute {
                expected,
                tolerance,
            } => write!(f, "expected {expected:.6e} ± {tolerance:.3e}"),
            Criterion::Relative {
                expected,
                tolerance,
            } => {
                write!(f, "expected {expected:.6e} ± {:.1}%", 100.0 * tolerance)
            }
            Criterion::Below { limit } => write!(f, "< {limit:.3e}"),
            Criterion::Above { limit } => write!(f, "> {limit:.3e}"),
            Criterion::Interval { lo, hi } => write!(f, "in [{lo:.4}, {hi:.4}]"),
            Criterion::Holds => f.write_str("holds"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub measured: f64,
    pub criterion: Criterion,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        write!(
            f,
            "{tag} {}/{}: measured {:.6e}, {}",
            self.suite.name(),
            self.name,
            self.measured,
            self.criterion
        )?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

struct Recorder<'a> {
    suite: Suite,
    budgets: &'a Budgets,
    report: Report,
}

impl<'a> Recorder<'a> {
    fn new(suite: Suite, budgets: &'a Budgets) -> Self {
        Self {
            suite,
            budgets,
            report: Report::default(),
        }
    }

    fn check(&mut self, name: impl Into<String>, measured: f64, criterion: Criterion) {
        self.check_with(name, measured, criterion, String::new());
    }

    fn check_with(
        &mut self,
        name: impl Into<String>,
        measured: f64,
        criterion: Criterion,
        detail: String,
    ) {
        let criterion = criterion.scaled(self.budgets.tolerance_scale);
        self.report.checks.push(Check {
            suite: self.suite,
            name: name.into(),
            measured,
            pass: criterion.accepts(measured),
            criterion,
            detail,
        });
    }

    fn within_se(&mut self, name: impl Into<String>, e: Estimate, expected: f64) {
        self.check(
            name,
            e.value,
            Criterion::Absolute {
                expected,
                tolerance: 3.0 * e.se,
            },
        );
    }
}

/// Runs one suite. `gamma` selects the regime for the regime suite (all three
/// reference regimes when absent) and the exponent compared by the
/// equivalence suite; verification is restricted to `γ ∈ [0, 1)`.
pub fn run_suite(suite: Suite, gamma: Option<f64>, budgets: &Budgets) -> Result<Report> {
    budgets.validate()?;
    if let Some(g) = gamma {
        if !(0.0..1.0).contains(&g) {
            return Err(invalid(format!(
                "verification needs gamma in [0, 1), got {g}"
            )));
        }
    }
    match suite {
        Suite::Analytic => analytic(budgets),
        Suite::Oracle => oracle(budgets),
        Suite::Journeys => journeys(budgets),
        Suite::Regimes => match gamma {
            Some(g) => regimes(g, budgets),
            None => {
                let mut report = Report::default();
                for g in [0.0, 0.25, 0.5] {
                    report.extend(regimes(g, budgets)?);
                }
                Ok(report)
            }
        },
        Suite::Equivalence => equivalence(gamma.unwrap_or(0.25), budgets),
    }
}

const THETA_GRID: [f64; 13] = [
    1e-8, 1e-6, 1e-4, 1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0,
];

pub fn analytic(budgets: &Budgets) -> Result<Report> {
    let mut r = Recorder::new(Suite::Analytic, budgets);

    let mut worst: f64 = 0.0;
    for &l in &THETA_GRID {
        let e = l.exp();
        worst = worst.max((theta(l)?.cosh() - e).abs() / e);
    }
    r.check(
        "cosh(theta(lambda)) = e^lambda, max relative error",
        worst,
        Criterion::Below { limit: 1e-12 },
    );

    let mut worst: f64 = 0.0;
    for &l in &THETA_GRID {
        worst = worst.max((laplace_m(l, 1)? - (-l).exp()).abs());
    }
    r.check(
        "laplace_m(lambda, 1) = e^-lambda, max error",
        worst,
        Criterion::Below { limit: 1e-12 },
    );

    let k = 1000u64;
    let mut worst: f64 = 0.0;
    for l in [1e-6, 1e-4, 1e-2, 0.1, 1.0] {
        let mut prod = 1.0;
        for z in 1..k {
            prod *= laplace_m(l, z)?;
        }
        let exact = (-log_cosh(theta(l)? * (k - 1) as f64)).exp();
        worst = worst.max((prod - exact).abs());
    }
    r.check(
        "telescoping product at k=1000, max error",
        worst,
        Criterion::Below { limit: 1e-10 },
    );

    let k = 100_000;
    let limit0 = 2.0 / (1.0 + (-2.0 * 2f64.sqrt()).exp());
    r.check(
        "R(1e5) at gamma=0, lambda=1",
        r_product(k, 1.0, 0.0)?,
        Criterion::Absolute {
            expected: limit0,
            tolerance: 1e-3,
        },
    );
    r.check(
        "R(1e5) at gamma=0.25, lambda=1",
        r_product(k, 1.0, 0.25)?,
        Criterion::Absolute {
            expected: 1.0,
            tolerance: 1e-2,
        },
    );
    Ok(r.report)
}

/// Seeded parallel draws, draw `i` on stream `i` of the reference domain.
fn parallel_draws<T, F>(seed: u64, domain: Domain, n: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut WalkRng) -> Result<T> + Sync,
{
    (0..n)
        .into_par_iter()
        .map(|i| f(&mut WalkRng::new(seed, domain, i)))
        .collect()
}

pub fn oracle(budgets: &Budgets) -> Result<Report> {
    let mut r = Recorder::new(Suite::Oracle, budgets);
    let seed = budgets.seed;

    let pmf = exit_time_pmf(3, 400)?;
    for l in [0.01, 0.1, 1.0, 3.0] {
        r.check_with(
            format!("exact pmf of m(3) Laplace sum at lambda={l}"),
            pmf.laplace_partial(l),
            Criterion::Absolute {
                expected: laplace_m(l, 3)?,
                tolerance: 1e-8 + pmf.tail,
            },
            format!("tail {:.2e}", pmf.tail),
        );
    }

    let s_max = 200;
    let pmf = exit_time_pmf(4, s_max)?;
    let draws = parallel_draws(seed, Domain::Verify, budgets.draws, |rng| sample_m(4, rng))?;
    let mut observed = vec![0u64; s_max];
    let mut overflow = 0;
    for &m in &draws {
        match m as usize {
            s @ 1..=200 => observed[s - 1] += 1,
            _ => overflow += 1,
        }
    }
    let chi = crate::stats::chi_square_gof(&observed, &pmf.pmf, overflow)?;
    r.check_with(
        "chi-square of sample_m(4) against the exact pmf, p-value",
        chi.p_value,
        Criterion::Above { limit: 0.01 },
        format!("statistic {:.2} on {} dof", chi.statistic, chi.dof),
    );

    let draws = parallel_draws(seed ^ 1, Domain::Verify, budgets.draws, |rng| {
        sample_m(10, rng)
    })?;
    let xs: Vec<f64> = draws.iter().map(|&m| m as f64).collect();
    r.within_se("mean of sample_m(10)", Estimate::mean_of(&xs)?, 19.0);

    let mut rng = WalkRng::new(seed, Domain::Reference, 0);
    let levy: Vec<f64> = (0..budgets.levy_draws)
        .map(|_| sample_levy(&mut rng))
        .collect();
    for l in [0.5, 1.0, 2.0] {
        r.within_se(
            format!("Levy sampler Laplace at lambda={l}"),
            empirical_laplace(&levy, l)?,
            limit_laplace_l(l)?,
        );
    }
    r.check(
        "Levy sampler KS distance",
        ks_distance(&levy, levy_cdf_unchecked)?,
        Criterion::Below {
            limit: ks_critical(levy.len()),
        },
    );
    drop(levy);

    let ts = parallel_draws(seed, Domain::Reference, budgets.draws, |rng| {
        sample_t(rng, DEFAULT_T_RESOLUTION)
    })?;
    r.within_se("T sampler mean", Estimate::mean_of(&ts)?, 1.0);
    r.within_se(
        "T sampler standard deviation",
        std_dev_estimate(&ts)?,
        (2.0f64 / 3.0).sqrt(),
    );
    r.check(
        "T sampler Laplace at lambda=1",
        empirical_laplace(&ts, 1.0)?.value,
        Criterion::Absolute {
            expected: limit_laplace_t(1.0)?,
            tolerance: 0.01,
        },
    );
    Ok(r.report)
}

pub fn journeys(budgets: &Budgets) -> Result<Report> {
    let mut r = Recorder::new(Suite::Journeys, budgets);
    let seed = budgets.seed;

    let n = budgets.draws;
    let runs = parallel_draws(seed ^ 2, Domain::Verify, n, |rng| sample_n(1, 0.0, rng))?;
    for j in 1..=10u64 {
        let p = 0.5f64.powi(j as i32);
        let hat = runs.iter().filter(|&&v| v >= j).count() as f64 / n as f64;
        r.check(
            format!("P(n >= {j}) at gamma=0"),
            hat,
            Criterion::Absolute {
                expected: p,
                tolerance: 3.0 * (p * (1.0 - p) / n as f64).sqrt(),
            },
        );
    }

    let z = 1_000_000u64;
    let gamma = 0.25;
    let runs = parallel_draws(seed ^ 3, Domain::Verify, n, |rng| sample_n(z, gamma, rng))?;
    let scale = (z as f64).powf(gamma);
    r.check(
        "KS of n/z^gamma against Exp(1) at gamma=0.25, z=1e6",
        lattice_tail_distance(&runs, |j| (-(j as f64) / scale).exp())?,
        Criterion::Below { limit: 0.01 },
    );

    let mut rng = WalkRng::new(seed, Domain::Verify, 1 << 40);
    r.within_se(
        "Wald identity, theta=0.3 on [-5, 3]",
        wald_identity_check(0.3, -5, 3, n, &mut rng)?,
        1.0,
    );
    Ok(r.report)
}

fn regime_label(gamma: f64) -> String {
    format!("gamma={gamma}")
}

/// Nu fit window: the last three decades of the checkpoint grid.
fn nu_window(t_max: u64) -> u64 {
    (t_max / 1000).max(1)
}

pub fn regimes(gamma: f64, budgets: &Budgets) -> Result<Report> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(invalid(format!(
            "verification needs gamma in [0, 1), got {gamma}"
        )));
    }
    let mut r = Recorder::new(Suite::Regimes, budgets);
    let label = regime_label(gamma);
    let nu = scaling_exponent(gamma)?;
    let t_max = if gamma > 0.0 && gamma < 0.5 {
        budgets.superdiffusive_t_max
    } else {
        budgets.t_max
    };
    let mut times = Schedule::default_geometric().resolve(t_max);
    times.extend([t_max / 100, t_max / 10, t_max]);
    times.sort_unstable();
    times.dedup();
    let per_walker = ensemble_maxima(gamma, &times, budgets.walkers, budgets.seed)?;
    let column = |c: usize| -> Vec<f64> { per_walker.iter().map(|w| w[c] as f64).collect() };
    let last = times.len() - 1;
    let z_final = column(last);
    let tf = t_max as f64;

    let table = EnsembleTable::new(times.clone(), (0..times.len()).map(column).collect())?;
    let window = table.window(nu_window(t_max), t_max)?;
    let fit = estimate_nu(
        &window,
        NuMethod::MedianSlope,
        budgets.resamples,
        budgets.seed,
    )?;
    let nu_detail = format!(
        "bootstrap se {:.4}, t in [{}, {}]",
        fit.stderr, fit.t_min, fit.t_max
    );

    if gamma == 0.0 {
        let t_hat: Vec<f64> = z_final.iter().map(|&z| tf / (z * z)).collect();
        for l in [0.5, 1.0, 2.0] {
            r.check(
                format!("{label} Laplace of t/z^2 at lambda={l}"),
                empirical_laplace(&t_hat, l)?.value,
                Criterion::Absolute {
                    expected: limit_laplace_t(l)?,
                    tolerance: 0.02,
                },
            );
        }
        r.check_with(
            format!("{label} nu_hat"),
            fit.nu_hat,
            Criterion::Interval { lo: 0.47, hi: 0.53 },
            nu_detail,
        );
    } else if gamma == 0.25 {
        r.check_with(
            format!("{label} nu_hat"),
            fit.nu_hat,
            Criterion::Interval { lo: 0.61, hi: 0.72 },
            nu_detail,
        );
        moment_checks(&mut r, &label, gamma, &times, &column)?;
        growth_check(&mut r, &label, gamma)?;
    } else if gamma == 0.5 {
        let l_hat: Vec<f64> = z_final
            .iter()
            .map(|&z| limit_transform_to_reference(z, tf, gamma))
            .collect::<Result<_>>()?;
        r.check(
            format!("{label} KS of (t/z - 1)/4 against the Levy law"),
            ks_distance(&l_hat, levy_cdf_unchecked)?,
            Criterion::Below { limit: 0.05 },
        );
        let ratio: Vec<f64> = z_final.iter().map(|&z| z / tf).collect();
        r.check(
            format!("{label} median of z/t"),
            median(&ratio)?,
            Criterion::Relative {
                expected: 1.0 / (4.0 * levy_median() + 1.0),
                tolerance: 0.1,
            },
        );
    } else {
        r.check_with(
            format!("{label} nu_hat"),
            fit.nu_hat,
            Criterion::Interval {
                lo: nu - 0.06,
                hi: nu + 0.06,
            },
            nu_detail,
        );
        if gamma < 0.5 {
            moment_checks(&mut r, &label, gamma, &times, &column)?;
        }
    }
    Ok(r.report)
}

/// `E[(z/t^ν)^{3/2}]` at the horizon, and the gap to the limit shrinking over
/// the last three decades.
fn moment_checks(
    r: &mut Recorder<'_>,
    label: &str,
    gamma: f64,
    times: &[u64],
    column: &dyn Fn(usize) -> Vec<f64>,
) -> Result<()> {
    let q = 1.5;
    let nu = scaling_exponent(gamma)?;
    let expected = moment_prediction(q, gamma)?;
    let t_max = *times.last().unwrap();
    let mut gaps = Vec::new();
    let mut at_horizon = 0.0;
    for t in [t_max / 100, t_max / 10, t_max] {
        let c = times.iter().position(|&s| s == t);
        let c = c.ok_or_else(|| invalid(format!("checkpoint grid misses t={t}")))?;
        let scaled: Vec<f64> = column(c).iter().map(|z| z / (t as f64).powf(nu)).collect();
        let m = moment_estimate_seeded(&scaled, q, r.budgets.resamples, r.budgets.seed ^ t)?;
        gaps.push((m.value - expected).abs());
        at_horizon = m.value;
    }
    r.check(
        format!("{label} moment q=1.5 of z/t^nu at t={t_max}"),
        at_horizon,
        Criterion::Relative {
            expected,
            tolerance: 0.15,
        },
    );
    let shrinking = gaps.windows(2).all(|w| w[1] < w[0]);
    r.check_with(
        format!("{label} moment gap shrinks over the last three decades"),
        if shrinking { 1.0 } else { 0.0 },
        Criterion::Holds,
        format!("gaps {:.4} {:.4} {:.4}", gaps[0], gaps[1], gaps[2]),
    );
    Ok(())
}

/// Median of `z(k)/k^{1/(1−γ)}` over cycle replicas against the deterministic law.
fn growth_check(r: &mut Recorder<'_>, label: &str, gamma: f64) -> Result<()> {
    let b = r.budgets;
    let k = b.k_cycles;
    let seed = b.seed.wrapping_add(1);
    let zs: Vec<f64> = (0..b.walkers)
        .into_par_iter()
        .map(|id| {
            let mut rng = WalkRng::for_walker(seed, Domain::Cycles, id);
            let run = run_cycles(gamma, Stop::Cycles(k), id, &mut rng)?;
            Ok(run.last().map_or(0.0, |c| c.z as f64))
        })
        .collect::<Result<_>>()?;
    let norm = (k as f64).powf(1.0 / (1.0 - gamma));
    let scaled: Vec<f64> = zs.iter().map(|z| z / norm).collect();
    r.check(
        format!("{label} median of z(k)/k^(1/(1-gamma)) at k={k}"),
        median(&scaled)?,
        Criterion::Relative {
            expected: deterministic_z_of_k(k, gamma)? / norm,
            tolerance: 0.1,
        },
    );
    Ok(())
}

/// Median of the unit Lévy law, solving `levy_cdf(x) = 1/2` by bisection.
pub fn levy_median() -> f64 {
    let (mut lo, mut hi) = (0.1, 100.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if levy_cdf_unchecked(mid) < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn equivalence(gamma: f64, budgets: &Budgets) -> Result<Report> {
    let mut r = Recorder::new(Suite::Equivalence, budgets);
    let t = budgets.equivalence_t;
    let n = budgets.equivalence_samples;
    let seed = budgets.seed;
    let direct: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|id| {
            let mut rng = WalkRng::for_walker(seed, Domain::Direct, id);
            let rec = run_walker(gamma, t, &[], id, &mut rng)?;
            Ok(rec[0].z as f64)
        })
        .collect::<Result<_>>()?;
    let cycles: Vec<f64> = ensemble_maxima(gamma, &[t], n, seed)?
        .into_iter()
        .map(|w| w[0] as f64)
        .collect();
    r.check(
        format!("two-sample KS of z({t}), direct vs cycles, gamma={gamma}"),
        ks_two_sample(&direct, &cycles)?,
        Criterion::Below {
            limit: ks_critical_two_sample(direct.len(), cycles.len()),
        },
    );
    Ok(r.report)
}
