//! Cell-averaging CFAR on beamformed range-Doppler power maps.
//!
//! Training cells run along range on both sides of the cell under test, for
//! each Doppler bin independently. With `N = 2 n_train` exponential reference
//! cells the threshold factor `N (pfa^(-1/N) - 1)` gives the requested
//! false-alarm probability exactly. Threshold crossings are then thinned to
//! local maxima of their 3 x 3 neighbourhood (Doppler wraps).

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CfarConfig {
    pub pfa: f64,
    /// Training cells on each side.
    pub n_train: usize,
    /// Guard cells on each side.
    pub n_guard: usize,
}

impl Default for CfarConfig {
    fn default() -> Self {
        Self { pfa: 1e-4, n_train: 16, n_guard: 2 }
    }
}

impl CfarConfig {
    pub fn threshold_factor(&self) -> f64 {
        let n = (2 * self.n_train) as f64;
        n * (self.pfa.powf(-1.0 / n) - 1.0)
    }

    fn reach(&self) -> usize {
        self.n_train + self.n_guard
    }

    /// Number of cells that get a full training window in a map.
    pub fn tested_cells(&self, n_range: usize, n_doppler: usize) -> usize {
        n_range.saturating_sub(2 * self.reach()) * n_doppler
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pfa > 0.0 && self.pfa < 1.0) {
            return Err(Error::Config(format!("cfar.pfa must lie in (0, 1), got {}", self.pfa)));
        }
        if self.n_train == 0 {
            return Err(Error::Config("cfar.n_train must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Detection {
    pub range_bin: usize,
    pub doppler_bin: usize,
    pub range_m: f64,
    pub radial_velocity_mps: f64,
    pub peak_power_db: f64,
    pub threshold_db: f64,
}

/// CA-CFAR over a `(range, doppler)` power map.
///
/// `range_axis` and `doppler_axis` label the detections; they must match the
/// map dimensions.
pub fn cfar_detect(
    map: &Array2<f64>,
    range_axis: &[f64],
    doppler_axis: &[f64],
    cfg: &CfarConfig,
) -> Result<Vec<Detection>> {
    cfg.validate()?;
    let (n_r, n_d) = map.dim();
    if range_axis.len() != n_r || doppler_axis.len() != n_d {
        return Err(Error::Contract("CFAR axes do not match the map".into()));
    }
    let reach = cfg.reach();
    if 2 * reach + 1 > n_r {
        return Err(Error::Config(format!(
            "CFAR window of {} cells exceeds {n_r} range bins",
            2 * reach + 1
        )));
    }
    if map.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::Contract("CFAR input must be finite non-negative power".into()));
    }
    let alpha = cfg.threshold_factor();
    let n_ref = (2 * cfg.n_train) as f64;
    let mut out = Vec::new();
    for d in 0..n_d {
        // Prefix sums along range for this Doppler column.
        let mut prefix = vec![0.0; n_r + 1];
        for r in 0..n_r {
            prefix[r + 1] = prefix[r] + map[[r, d]];
        }
        let sum = |a: usize, b: usize| prefix[b] - prefix[a];
        for r in reach..n_r - reach {
            let lead = sum(r - reach, r - cfg.n_guard);
            let lag = sum(r + cfg.n_guard + 1, r + reach + 1);
            let threshold = alpha * (lead + lag) / n_ref;
            let p = map[[r, d]];
            if p > threshold && is_local_max(map, r, d) {
                out.push(Detection {
                    range_bin: r,
                    doppler_bin: d,
                    range_m: range_axis[r],
                    radial_velocity_mps: doppler_axis[d],
                    peak_power_db: 10.0 * p.log10(),
                    threshold_db: 10.0 * threshold.max(f64::MIN_POSITIVE).log10(),
                });
            }
        }
    }
    out.sort_by_key(|det| (det.range_bin, det.doppler_bin));
    Ok(out)
}

fn is_local_max(map: &Array2<f64>, r: usize, d: usize) -> bool {
    let (n_r, n_d) = map.dim();
    let p = map[[r, d]];
    for dr in -1isize..=1 {
        for dd in -1isize..=1 {
            if dr == 0 && dd == 0 {
                continue;
            }
            let rr = r as isize + dr;
            if rr < 0 || rr >= n_r as isize {
                continue;
            }
            let dn = (d as isize + dd).rem_euclid(n_d as isize) as usize;
            if map[[rr as usize, dn]] > p {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Exp1};

    fn axes(n_r: usize, n_d: usize) -> (Vec<f64>, Vec<f64>) {
        ((0..n_r).map(|i| i as f64).collect(), (0..n_d).map(|i| i as f64).collect())
    }

    fn noise(n_r: usize, n_d: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_simple_fn((n_r, n_d), || {
            let e: f64 = Exp1.sample(&mut rng);
            e
        })
    }

    #[test]
    fn threshold_factor_closed_form() {
        let cfg = CfarConfig { pfa: 1e-4, n_train: 16, n_guard: 2 };
        // pfa = (1 + alpha/N)^-N for exponential reference cells.
        let n = 32.0;
        let pfa = (1.0 + cfg.threshold_factor() / n).powf(-n);
        assert!((pfa - 1e-4).abs() < 1e-15);
    }

    #[test]
    fn single_strong_cell() {
        let mut map = Array2::from_elem((200, 32), 1.0);
        map[[100, 7]] = 1000.0;
        let (ra, da) = axes(200, 32);
        let dets = cfar_detect(&map, &ra, &da, &CfarConfig::default()).unwrap();
        assert_eq!(dets.len(), 1);
        assert_eq!((dets[0].range_bin, dets[0].doppler_bin), (100, 7));
        assert!((dets[0].peak_power_db - 30.0).abs() < 1e-12);
    }

    #[test]
    fn zero_map_no_detections() {
        let map = Array2::zeros((100, 16));
        let (ra, da) = axes(100, 16);
        assert!(cfar_detect(&map, &ra, &da, &CfarConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn window_larger_than_map() {
        let map = Array2::zeros((20, 4));
        let (ra, da) = axes(20, 4);
        let err = cfar_detect(&map, &ra, &da, &CfarConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn false_alarm_rate_calibrated() {
        let cfg = CfarConfig::default();
        let (n_r, n_d) = (4000, 256);
        let map = noise(n_r, n_d, 11);
        let (ra, da) = axes(n_r, n_d);
        let dets = cfar_detect(&map, &ra, &da, &cfg).unwrap();
        let rate = dets.len() as f64 / cfg.tested_cells(n_r, n_d) as f64;
        assert!(rate > 0.5e-4 && rate < 2e-4, "rate {rate}");
    }

    #[test]
    fn scale_invariant() {
        let mut map = noise(300, 32, 4);
        map[[150, 3]] = 80.0;
        map[[40, 20]] = 50.0;
        let (ra, da) = axes(300, 32);
        let cfg = CfarConfig { pfa: 1e-3, ..Default::default() };
        let a = cfar_detect(&map, &ra, &da, &cfg).unwrap();
        let b = cfar_detect(&map.mapv(|p| p * 37.5), &ra, &da, &cfg).unwrap();
        let cells = |v: &[Detection]| v.iter().map(|d| (d.range_bin, d.doppler_bin)).collect::<Vec<_>>();
        assert_eq!(cells(&a), cells(&b));
        assert!(!a.is_empty());
    }
}
