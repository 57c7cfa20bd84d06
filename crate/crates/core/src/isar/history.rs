use ndarray::Array2;
use num_complex::Complex64;

use crate::beamforming::BeamformerWeights;
use crate::rd::range_compress;
use crate::scene::RawDatacube;
use crate::{Error, Result};

/// Complex range profiles of one target, `(slow_time, range_bin)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeProfileHistory {
    pub values: Array2<Complex64>,
    pub prf_hz: f64,
    pub wavelength_m: f64,
    pub range_axis: Vec<f64>,
}

impl RangeProfileHistory {
    pub fn n_slow(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_range(&self) -> usize {
        self.values.ncols()
    }

    pub fn duration_s(&self) -> f64 {
        self.n_slow() as f64 / self.prf_hz
    }

    /// Slow time of each profile relative to the middle of the aperture.
    pub fn centered_time(&self) -> Vec<f64> {
        let mid = (self.n_slow() as f64 - 1.0) / 2.0;
        (0..self.n_slow()).map(|k| (k as f64 - mid) / self.prf_hz).collect()
    }

    pub fn range_bin_m(&self) -> f64 {
        if self.range_axis.len() > 1 {
            self.range_axis[1] - self.range_axis[0]
        } else {
            0.0
        }
    }
}

/// Stacks the beamformed, range-compressed profiles of every dwell inside
/// `center_bin +/- half_window`.
///
/// Fails when the window does not fit the range axis, or when a dwell's
/// strongest bin sits on the window edge (the target is walking out).
pub fn extract_target_history(
    dwells: &[RawDatacube],
    weights: &BeamformerWeights,
    center_bin: usize,
    half_window: usize,
) -> Result<RangeProfileHistory> {
    let first = dwells.first().ok_or_else(|| Error::Contract("no dwells to extract".into()))?;
    let n_range = first.params.n_range_bins();
    if center_bin < half_window || center_bin + half_window >= n_range {
        return Err(Error::Contract(format!(
            "window {center_bin} +/- {half_window} exceeds {n_range} range bins"
        )));
    }
    let lo = center_bin - half_window;
    let width = 2 * half_window + 1;
    let n_pulses = first.params.n_pulses;
    let mut values = Array2::zeros((dwells.len() * n_pulses, width));
    let wc: Vec<Complex64> = weights.values.iter().map(|z| z.conj()).collect();
    for (d, dwell) in dwells.iter().enumerate() {
        if dwell.params != first.params {
            return Err(Error::Contract(format!("dwell {d} has different radar parameters")));
        }
        if dwell.n_channels() != wc.len() {
            return Err(Error::Contract(format!(
                "dwell {d} has {} channels for {} weights",
                dwell.n_channels(),
                wc.len()
            )));
        }
        let comp = range_compress(dwell)?;
        let mut energy = vec![0.0; width];
        for m in 0..n_pulses {
            for j in 0..width {
                let z: Complex64 = (0..wc.len()).map(|c| wc[c] * comp.values[[c, lo + j, m]]).sum();
                values[[d * n_pulses + m, j]] = z;
                energy[j] += z.norm_sqr();
            }
        }
        let peak = energy
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(j, _)| j)
            .unwrap_or(0);
        if peak == 0 || peak == width - 1 {
            return Err(Error::Domain(format!(
                "target leaves the extraction window at dwell {d} (peak at window bin {peak})"
            )));
        }
    }
    Ok(RangeProfileHistory {
        values,
        prf_hz: first.params.prf_hz,
        wavelength_m: first.params.wavelength_m,
        range_axis: first.params.range_axis()[lo..lo + width].to_vec(),
    })
}
