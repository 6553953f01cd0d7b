use rand::Rng;
use rand_distr::StandardNormal;

use crate::cycles::exit_interval;
use crate::error::{invalid, Result};
use crate::rng::WalkRng;

pub const DEFAULT_T_RESOLUTION: u64 = 200;

/// Exact draw of the unit Lévy variable as `1/Z²`, `Z` standard normal.
pub fn sample_levy<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let z: f64 = rng.sample(StandardNormal);
        if z != 0.0 {
            return 1.0 / (z * z);
        }
    }
}

/// Lattice approximation of the Brownian exit time from `[-1, 1]`: the
/// symmetric walk exit time from `[-N, N]` divided by `N²`.
pub fn sample_t(rng: &mut WalkRng, resolution: u64) -> Result<f64> {
    if resolution < 10 {
        return Err(invalid(format!(
            "resolution must be >= 10, got {resolution}"
        )));
    }
    let n = resolution as i64;
    let (tau, _) = exit_interval(-n, n, rng)?;
    Ok(tau as f64 / (resolution * resolution) as f64)
}
