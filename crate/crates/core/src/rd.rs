//! Pulse compression and slow-time spectral analysis.
//!
//! Range compression correlates every pulse with the unit-energy LFM replica,
//! so white noise keeps its per-sample power while a point echo gains a factor
//! equal to the number of pulse samples. The Doppler stage applies a
//! unit-mean-power window followed by a unitary DFT; the noise floor is again
//! unchanged and a bin-centred tone gains `n_pulses` times the window's
//! coherent loss.

use ndarray::{Array2, Array3, Axis};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::scene::{RadarParams, RawDatacube};
use crate::window::WindowKind;
use crate::{Error, Result};

/// Range-compressed cube, `(channel, range_bin, pulse)`.
#[derive(Debug, Clone)]
pub struct CompressedCube {
    pub values: Array3<Complex64>,
    pub params: RadarParams,
    pub range_axis: Vec<f64>,
    pub t0: f64,
}

/// Range-Doppler cube, `(channel, range_bin, doppler_bin)`.
///
/// Doppler bins are stored in increasing velocity order: storage index `i`
/// holds DFT bin `i - n_doppler / 2`.
#[derive(Debug, Clone)]
pub struct RdDatacube {
    pub values: Array3<Complex64>,
    pub params: RadarParams,
    pub range_axis: Vec<f64>,
    /// Radial velocity of each Doppler bin, m/s (positive closing).
    pub doppler_axis: Vec<f64>,
    pub window: WindowKind,
    pub oversample: usize,
}

impl RdDatacube {
    pub fn n_channels(&self) -> usize {
        self.values.dim().0
    }

    pub fn n_range(&self) -> usize {
        self.values.dim().1
    }

    pub fn n_doppler(&self) -> usize {
        self.values.dim().2
    }

    /// Storage index of a signed DFT bin (wrapped).
    pub fn doppler_index(&self, dft_bin: isize) -> usize {
        let n = self.n_doppler() as isize;
        (dft_bin + n / 2).rem_euclid(n) as usize
    }

    /// Signed DFT bin held at a storage index.
    pub fn dft_bin(&self, index: usize) -> isize {
        index as isize - self.n_doppler() as isize / 2
    }

    /// 6-vector snapshot at one cell.
    pub fn snapshot(&self, range_bin: usize, doppler_bin: usize) -> Vec<Complex64> {
        self.values.slice(ndarray::s![.., range_bin, doppler_bin]).to_vec()
    }

    /// One channel as a `(range, doppler)` map.
    pub fn channel(&self, c: usize) -> Array2<Complex64> {
        self.values.index_axis(Axis(0), c).to_owned()
    }
}

/// Matched filtering of every pulse against the transmitted replica.
pub fn range_compress(raw: &RawDatacube) -> Result<CompressedCube> {
    let p = &raw.params;
    let (n_ch, n_fast, n_slow) = raw.values.dim();
    if n_fast != p.n_fast_time() || n_slow != p.n_pulses {
        return Err(Error::Contract(format!(
            "raw cube {n_fast}x{n_slow} does not match parameters {}x{}",
            p.n_fast_time(),
            p.n_pulses
        )));
    }
    let replica = p.replica();
    let ns = replica.len();
    let n_out = p.n_range_bins();
    let len = (n_fast + ns).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);

    let mut h = vec![Complex64::new(0.0, 0.0); len];
    h[..ns].copy_from_slice(&replica);
    fwd.process(&mut h);
    // Unit-energy replica; the inverse FFT is unnormalized.
    let scale = 1.0 / ((ns as f64).sqrt() * len as f64);
    let h_conj: Vec<Complex64> = h.iter().map(|z| z.conj() * scale).collect();

    let mut out = Array3::zeros((n_ch, n_out, n_slow));
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for c in 0..n_ch {
        for m in 0..n_slow {
            buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            for n in 0..n_fast {
                buf[n] = raw.values[[c, n, m]];
            }
            fwd.process(&mut buf);
            buf.iter_mut().zip(&h_conj).for_each(|(x, hc)| *x *= hc);
            inv.process(&mut buf);
            for k in 0..n_out {
                out[[c, k, m]] = buf[k];
            }
        }
    }
    Ok(CompressedCube { values: out, params: p.clone(), range_axis: p.range_axis(), t0: raw.t0 })
}

/// Windowed unitary DFT across slow time.
///
/// `oversample > 1` zero-pads slow time to `oversample * n_pulses` points; the
/// scaling stays `1/sqrt(n_pulses)` so the noise floor is unchanged.
pub fn doppler_process(
    compressed: &CompressedCube,
    window: WindowKind,
    oversample: usize,
) -> Result<RdDatacube> {
    let (n_ch, n_range, n_slow) = compressed.values.dim();
    if n_slow < 2 {
        return Err(Error::Contract("Doppler processing needs at least two pulses".into()));
    }
    if oversample == 0 {
        return Err(Error::Config("Doppler oversampling factor must be >= 1".into()));
    }
    let n_dop = n_slow * oversample;
    let w = window.coefficients(n_slow);
    let fft = FftPlanner::new().plan_fft_forward(n_dop);
    let scale = 1.0 / (n_slow as f64).sqrt();
    let half = n_dop / 2;
    let mut out = Array3::zeros((n_ch, n_range, n_dop));
    let mut buf = vec![Complex64::new(0.0, 0.0); n_dop];
    for c in 0..n_ch {
        for r in 0..n_range {
            buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            for m in 0..n_slow {
                buf[m] = compressed.values[[c, r, m]] * w[m] * scale;
            }
            fft.process(&mut buf);
            for (k, z) in buf.iter().enumerate() {
                out[[c, r, (k + half) % n_dop]] = *z;
            }
        }
    }
    let p = &compressed.params;
    let dv = p.wavelength_m * p.prf_hz / (2.0 * n_dop as f64);
    let doppler_axis = (0..n_dop).map(|i| (i as f64 - half as f64) * dv).collect();
    Ok(RdDatacube {
        values: out,
        params: p.clone(),
        range_axis: compressed.range_axis.clone(),
        doppler_axis,
        window,
        oversample,
    })
}

/// Range compression followed by Doppler processing.
pub fn form_rd_cube(raw: &RawDatacube, window: WindowKind, oversample: usize) -> Result<RdDatacube> {
    doppler_process(&range_compress(raw)?, window, oversample)
}
