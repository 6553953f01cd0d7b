use boldwalk::cycles::ensemble_maxima;
use boldwalk::direct::run_ensemble;
use boldwalk::rng::{Domain, WalkRng};
use boldwalk::stats::{
    ks_critical, ks_critical_two_sample, ks_distance_discrete, ks_two_sample, sample_t, Estimate,
};

/// Exact `Bin(n, 1/2)` distribution function, by Pascal's rule.
fn binomial_half_cdf(n: usize) -> Vec<f64> {
    let mut row = vec![1.0f64];
    for _ in 0..n {
        let mut next = vec![0.0; row.len() + 1];
        for (i, p) in row.iter().enumerate() {
            next[i] += 0.5 * p;
            next[i + 1] += 0.5 * p;
        }
        row = next;
    }
    let mut acc = 0.0;
    row.iter()
        .map(|p| {
            acc += p;
            acc.min(1.0)
        })
        .collect()
}

#[test]
fn fair_walk_position_is_binomial() {
    let (t, n) = (100u64, 100_000u64);
    let recs = run_ensemble(0.0, t, &[t], n, 31).unwrap();
    let xs: Vec<i64> = recs.iter().map(|r| r.x.unwrap()).collect();
    let cdf = binomial_half_cdf(t as usize);
    // x = 2B - t
    let d = ks_distance_discrete(&xs, |x| {
        let b = (x + t as i64).div_euclid(2);
        if b < 0 {
            0.0
        } else {
            cdf[(b as usize).min(t as usize)]
        }
    })
    .unwrap();
    assert!(d < ks_critical(n as usize), "KS {d}");
}

#[test]
fn fair_walk_scaled_maximum_matches_exit_time_oracle() {
    // E[z(t)/√t] against E[T^{-1/2}], T the Brownian exit time of [-1, 1]
    let t = 100_000u64;
    let recs = run_ensemble(0.0, t, &[], 10_000, 32).unwrap();
    let scaled: Vec<f64> = recs
        .iter()
        .map(|r| r.z as f64 / (t as f64).sqrt())
        .collect();
    let sim = Estimate::mean_of(&scaled).unwrap();

    let draws: Vec<f64> = (0..20_000)
        .map(|i| {
            let mut rng = WalkRng::new(33, Domain::Reference, i);
            sample_t(&mut rng, 200).unwrap().powf(-0.5)
        })
        .collect();
    let oracle = Estimate::mean_of(&draws).unwrap();
    let se = (sim.se.powi(2) + oracle.se.powi(2)).sqrt();
    assert!(
        (sim.value - oracle.value).abs() < 4.0 * se + 0.01,
        "{sim:?} vs {oracle:?}"
    );
}

#[test]
fn engines_agree_at_several_times() {
    let times = [100u64, 1000, 3000];
    let n = 3000u64;
    for gamma in [0.0, 0.5] {
        let direct = run_ensemble(gamma, 3000, &times, n, 34).unwrap();
        let cycles = ensemble_maxima(gamma, &times, n, 35).unwrap();
        for (c, &t) in times.iter().enumerate() {
            let a: Vec<f64> = direct
                .iter()
                .filter(|r| r.t == t)
                .map(|r| r.z as f64)
                .collect();
            let b: Vec<f64> = cycles.iter().map(|w| w[c] as f64).collect();
            let d = ks_two_sample(&a, &b).unwrap();
            assert!(
                d < ks_critical_two_sample(a.len(), b.len()),
                "gamma={gamma} t={t} KS {d}"
            );
        }
    }
}
