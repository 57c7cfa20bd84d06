//! Envelope-correlation range alignment.
//!
//! Each profile's magnitude envelope is cross-correlated against a running
//! reference (the accumulated, already aligned envelopes, which is dominated
//! by the strongest scatterers). The integer correlation peak is refined by a
//! parabola, the per-profile displacements are smoothed by a low-order
//! polynomial fit, and the profiles are shifted back by the smoothed amount
//! with a spectral phase ramp.

use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

use super::RangeProfileHistory;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub aligned: RangeProfileHistory,
    /// Measured displacement of each profile relative to the first, bins.
    pub measured: Vec<f64>,
    /// Polynomial-smoothed displacement that was removed, bins.
    pub shifts: Vec<f64>,
    /// Profiles whose correlation had two equal maxima.
    pub ambiguous: Vec<usize>,
}

impl Alignment {
    /// Least-squares slope of the removed displacement, bins per profile.
    pub fn slope(&self) -> f64 {
        let n = self.shifts.len() as f64;
        let mx = (n - 1.0) / 2.0;
        let my = self.shifts.iter().sum::<f64>() / n;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (k, s) in self.shifts.iter().enumerate() {
            let dx = k as f64 - mx;
            sxy += dx * (s - my);
            sxx += dx * dx;
        }
        sxy / sxx
    }
}

/// Circularly shifts a complex profile by `shift` bins (positive toward
/// higher bins), fractional shifts by band-limited interpolation.
pub fn shift_profile(profile: &[Complex64], shift: f64) -> Vec<Complex64> {
    let n = profile.len();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf = profile.to_vec();
    fwd.process(&mut buf);
    for (k, z) in buf.iter_mut().enumerate() {
        let f = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        *z *= Complex64::from_polar(1.0 / n as f64, -2.0 * PI * f * shift / n as f64);
    }
    inv.process(&mut buf);
    buf
}

fn shift_real(env: &[f64], shift: f64) -> Vec<f64> {
    let c: Vec<Complex64> = env.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    shift_profile(&c, shift).into_iter().map(|z| z.re).collect()
}

/// Linear cross-correlation `sum_i reference[i] * env[i + lag]`.
fn correlate(reference: &[f64], env: &[f64], lag: isize) -> f64 {
    let n = reference.len() as isize;
    let mut s = 0.0;
    for i in 0..n {
        let j = i + lag;
        if (0..n).contains(&j) {
            s += reference[i as usize] * env[j as usize];
        }
    }
    s
}

fn polyfit(y: &[f64], order: usize) -> Vec<f64> {
    let n = y.len();
    let order = order.min(n.saturating_sub(1));
    let scale = (n.max(2) - 1) as f64;
    let a = DMatrix::from_fn(n, order + 1, |i, p| (i as f64 / scale).powi(p as i32));
    let b = DVector::from_column_slice(y);
    let coef = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-12)
        .expect("SVD was computed with both factors");
    (0..n).map(|i| (0..=order).map(|p| coef[p] * (i as f64 / scale).powi(p as i32)).sum()).collect()
}

/// Aligns all profiles to the first one.
///
/// `poly_order` is the order of the smoothing fit (2 removes constant,
/// linear and quadratic walk).
pub fn range_align(history: &RangeProfileHistory, poly_order: usize) -> Result<Alignment> {
    let (n_slow, width) = history.values.dim();
    if n_slow < 2 {
        return Err(Error::Contract("range alignment needs at least two profiles".into()));
    }
    let max_lag = (width / 2) as isize;
    let envelope = |k: usize| -> Vec<f64> { history.values.row(k).iter().map(|z| z.norm()).collect() };
    let mut reference = envelope(0);
    let mut measured = vec![0.0; n_slow];
    let mut ambiguous = Vec::new();
    for k in 1..n_slow {
        let env = envelope(k);
        let corr: Vec<f64> = (-max_lag..=max_lag).map(|l| correlate(&reference, &env, l)).collect();
        let best = corr.iter().cloned().fold(f64::MIN, f64::max);
        // Equal maxima: prefer the smaller |lag|.
        let ties: Vec<usize> = (0..corr.len()).filter(|&i| corr[i] == best).collect();
        if ties.len() > 1 {
            ambiguous.push(k);
        }
        let i = *ties
            .iter()
            .min_by_key(|&&i| (i as isize - max_lag).unsigned_abs())
            .expect("correlation has at least one lag");
        let mut lag = i as f64 - max_lag as f64;
        if i > 0 && i + 1 < corr.len() {
            let (a, b, c) = (corr[i - 1], corr[i], corr[i + 1]);
            let denom = a - 2.0 * b + c;
            if denom < 0.0 {
                lag += 0.5 * (a - c) / denom;
            }
        }
        measured[k] = lag;
        let back = shift_real(&env, -lag);
        reference.iter_mut().zip(back).for_each(|(r, e)| *r += e);
    }
    let shifts = polyfit(&measured, poly_order);
    let mut aligned = Array2::zeros((n_slow, width));
    for k in 0..n_slow {
        let row: Vec<Complex64> = history.values.row(k).to_vec();
        let fixed = if shifts[k] == 0.0 { row } else { shift_profile(&row, -shifts[k]) };
        aligned.row_mut(k).assign(&ndarray::Array1::from(fixed));
    }
    Ok(Alignment {
        aligned: RangeProfileHistory { values: aligned, ..history.clone() },
        measured,
        shifts,
        ambiguous,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Band-limited point response centred at `pos`.
    fn profile(width: usize, pos: f64) -> Vec<Complex64> {
        (0..width)
            .map(|i| {
                let x = (i as f64 - pos) * 0.8;
                let s = if x.abs() < 1e-12 { 1.0 } else { (PI * x).sin() / (PI * x) };
                Complex64::new(s, 0.0)
            })
            .collect()
    }

    fn history(positions: &[f64], width: usize) -> RangeProfileHistory {
        let mut v = Array2::zeros((positions.len(), width));
        for (k, &p) in positions.iter().enumerate() {
            v.row_mut(k).assign(&ndarray::Array1::from(profile(width, p)));
        }
        RangeProfileHistory { values: v, prf_hz: 100.0, wavelength_m: 0.03, range_axis: (0..width).map(|i| i as f64).collect() }
    }

    fn peak(row: ndarray::ArrayView1<Complex64>) -> f64 {
        // Parabolic peak of the magnitude.
        let m: Vec<f64> = row.iter().map(|z| z.norm()).collect();
        let i = m.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        let (a, b, c) = (m[i - 1], m[i], m[i + 1]);
        i as f64 + 0.5 * (a - c) / (a - 2.0 * b + c)
    }

    #[test]
    fn aligned_input_has_zero_shifts() {
        let h = history(&[20.0; 16], 64);
        let a = range_align(&h, 2).unwrap();
        assert!(a.shifts.iter().all(|s| s.abs() < 1e-9));
        assert!(a.ambiguous.is_empty());
    }

    #[test]
    fn linear_walk_slope_recovered() {
        let pos: Vec<f64> = (0..64).map(|k| 20.0 + 0.2 * k as f64).collect();
        let a = range_align(&history(&pos, 64), 2).unwrap();
        assert!((a.slope() - 0.2).abs() < 0.01, "slope {}", a.slope());
    }

    #[test]
    fn quadratic_walk_residual_small() {
        let pos: Vec<f64> = (0..64).map(|k| 16.0 + 0.004 * (k * k) as f64).collect();
        let a = range_align(&history(&pos, 64), 2).unwrap();
        let target = peak(a.aligned.values.row(0));
        let rms = (a
            .aligned
            .values
            .rows()
            .into_iter()
            .map(|r| (peak(r) - target).powi(2))
            .sum::<f64>()
            / 64.0)
            .sqrt();
        assert!(rms < 0.25, "rms {rms}");
    }

    #[test]
    fn tie_flagged_and_small_shift_kept() {
        // A flat envelope correlates equally at symmetric lags.
        let mut v = Array2::from_elem((2, 9), Complex64::new(0.0, 0.0));
        v[[0, 4]] = Complex64::new(1.0, 0.0);
        v[[1, 3]] = Complex64::new(1.0, 0.0);
        v[[1, 5]] = Complex64::new(1.0, 0.0);
        let h = RangeProfileHistory { values: v, prf_hz: 1.0, wavelength_m: 0.03, range_axis: (0..9).map(|i| i as f64).collect() };
        let a = range_align(&h, 1).unwrap();
        assert_eq!(a.ambiguous, vec![1]);
        assert!(a.measured[1].abs() <= 1.0);
    }

    #[test]
    fn needs_two_profiles() {
        assert!(range_align(&history(&[3.0], 16), 2).is_err());
    }
}
