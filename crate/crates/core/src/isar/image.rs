use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use super::autofocus::image_contrast;
use super::RangeProfileHistory;
use crate::window::WindowKind;
use crate::{Error, Result};

/// Magnitude image, `(range_bin, doppler_bin)`, Doppler fftshifted.
#[derive(Debug, Clone, PartialEq)]
pub struct IsarImage {
    pub magnitude: Array2<f64>,
    pub range_axis: Vec<f64>,
    pub doppler_axis_hz: Vec<f64>,
    pub wavelength_m: f64,
    /// Meters per Doppler bin, set by [`cross_range_scale`].
    pub cross_range_m_per_bin: Option<f64>,
    pub contrast: f64,
    pub omega_used: Option<f64>,
}

impl IsarImage {
    pub fn n_range(&self) -> usize {
        self.magnitude.nrows()
    }

    pub fn n_doppler(&self) -> usize {
        self.magnitude.ncols()
    }

    pub fn doppler_bin_hz(&self) -> f64 {
        self.doppler_axis_hz[1] - self.doppler_axis_hz[0]
    }

    pub fn range_bin_m(&self) -> f64 {
        if self.range_axis.len() > 1 {
            self.range_axis[1] - self.range_axis[0]
        } else {
            0.0
        }
    }

    /// Cross-range axis in meters, if the image has been scaled.
    pub fn cross_range_axis(&self) -> Option<Vec<f64>> {
        let omega = self.omega_used?;
        Some(self.doppler_axis_hz.iter().map(|f| f * self.wavelength_m / (2.0 * omega)).collect())
    }

    /// Magnitude normalized to the image maximum, in dB.
    pub fn normalized_db(&self) -> Array2<f64> {
        let max = self.magnitude.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        self.magnitude.mapv(|m| 20.0 * (m / max).max(1e-15).log10())
    }
}

/// Windowed unitary DFT over slow time for every range bin, fftshifted.
/// Input is `(slow, range)`, output `(range, doppler)`.
pub(crate) fn doppler_transform(values: &Array2<Complex64>, window: WindowKind) -> Array2<Complex64> {
    let (n_slow, n_range) = values.dim();
    let w = window.coefficients(n_slow);
    let fft = FftPlanner::new().plan_fft_forward(n_slow);
    let scale = 1.0 / (n_slow as f64).sqrt();
    let half = n_slow / 2;
    let mut out = Array2::zeros((n_range, n_slow));
    let mut buf = vec![Complex64::new(0.0, 0.0); n_slow];
    for r in 0..n_range {
        for k in 0..n_slow {
            buf[k] = values[[k, r]] * (w[k] * scale);
        }
        fft.process(&mut buf);
        for (k, z) in buf.iter().enumerate() {
            out[[r, (k + half) % n_slow]] = *z;
        }
    }
    out
}

pub fn form_image(history: &RangeProfileHistory, window: WindowKind) -> Result<IsarImage> {
    let n = history.n_slow();
    if n < 2 || history.n_range() == 0 {
        return Err(Error::Contract(format!(
            "image needs at least 2 profiles and 1 range bin, got {}x{}",
            n,
            history.n_range()
        )));
    }
    let magnitude = doppler_transform(&history.values, window).mapv(|z| z.norm());
    let contrast = image_contrast(&magnitude)?;
    let df = history.prf_hz / n as f64;
    let half = (n / 2) as f64;
    Ok(IsarImage {
        magnitude,
        range_axis: history.range_axis.clone(),
        doppler_axis_hz: (0..n).map(|i| (i as f64 - half) * df).collect(),
        wavelength_m: history.wavelength_m,
        cross_range_m_per_bin: None,
        contrast,
        omega_used: None,
    })
}

/// Attaches a cross-range axis, `lambda * df / (2 omega)` meters per bin.
pub fn cross_range_scale(image: &IsarImage, omega: f64) -> Result<IsarImage> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::Domain(format!("rotation rate must be positive, got {omega}")));
    }
    Ok(IsarImage {
        cross_range_m_per_bin: Some(image.wavelength_m * image.doppler_bin_hz() / (2.0 * omega)),
        omega_used: Some(omega),
        ..image.clone()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScattererPeak {
    pub range_bin: usize,
    pub doppler_bin: usize,
    pub range_m: f64,
    pub doppler_hz: f64,
    pub cross_range_m: Option<f64>,
    pub rel_db: f64,
}

fn parabolic(l: f64, c: f64, r: f64) -> f64 {
    let d = l - 2.0 * c + r;
    if d.abs() < 1e-300 {
        0.0
    } else {
        (0.5 * (l - r) / d).clamp(-0.5, 0.5)
    }
}

/// Up to `k` strongest 3x3 local maxima (Doppler wraps), strongest first.
/// Positions are refined by a parabola through the neighbours.
pub fn find_scatterers(image: &IsarImage, k: usize) -> Vec<ScattererPeak> {
    let (nr, nd) = image.magnitude.dim();
    let m = &image.magnitude;
    let max = m.iter().cloned().fold(0.0, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    let mut cands = Vec::new();
    for r in 0..nr {
        for d in 0..nd {
            let v = m[[r, d]];
            if v <= 0.0 {
                continue;
            }
            let mut is_max = true;
            'n: for dr in -1isize..=1 {
                let rr = r as isize + dr;
                if rr < 0 || rr >= nr as isize {
                    continue;
                }
                for dd in -1isize..=1 {
                    if dr == 0 && dd == 0 {
                        continue;
                    }
                    let di = (d as isize + dd).rem_euclid(nd as isize) as usize;
                    let u = m[[rr as usize, di]];
                    // Plateaus keep their first cell only.
                    if u > v || (u == v && (rr as usize, di) < (r, d)) {
                        is_max = false;
                        break 'n;
                    }
                }
            }
            if is_max {
                cands.push((r, d, v));
            }
        }
    }
    cands.sort_by(|a, b| b.2.total_cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1))));
    cands.truncate(k);
    let dr_m = image.range_bin_m();
    let df = image.doppler_bin_hz();
    cands
        .into_iter()
        .map(|(r, d, v)| {
            let ro = if r > 0 && r + 1 < nr { parabolic(m[[r - 1, d]], v, m[[r + 1, d]]) } else { 0.0 };
            let dl = m[[r, (d + nd - 1) % nd]];
            let du = m[[r, (d + 1) % nd]];
            let doff = parabolic(dl, v, du);
            let doppler_hz = image.doppler_axis_hz[d] + doff * df;
            ScattererPeak {
                range_bin: r,
                doppler_bin: d,
                range_m: image.range_axis[r] + ro * dr_m,
                doppler_hz,
                cross_range_m: image.omega_used.map(|w| doppler_hz * image.wavelength_m / (2.0 * w)),
                rel_db: 20.0 * (v / max).log10(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tone_history(n: usize, prf: f64, tones: &[(usize, f64, f64)]) -> RangeProfileHistory {
        let mut values = Array2::zeros((n, 8));
        for k in 0..n {
            let t = k as f64 / prf;
            for &(bin, f, a) in tones {
                values[[k, bin]] += Complex64::from_polar(a, 2.0 * PI * f * t);
            }
        }
        RangeProfileHistory {
            values,
            prf_hz: prf,
            wavelength_m: 0.03,
            range_axis: (0..8).map(|i| 2000.0 + 2.4 * i as f64).collect(),
        }
    }

    #[test]
    fn static_scatterer_sits_at_zero_doppler() {
        let img = form_image(&tone_history(64, 100.0, &[(3, 0.0, 1.0)]), WindowKind::Hann).unwrap();
        let p = find_scatterers(&img, 1);
        assert_eq!(p[0].range_bin, 3);
        assert_eq!(img.doppler_axis_hz[p[0].doppler_bin], 0.0);
        assert!((img.contrast - image_contrast(&img.magnitude).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn rotating_scatterer_doppler_and_scaling() {
        let (omega, x, lambda) = (0.05, 6.0, 0.03);
        let f = 2.0 * omega * x / lambda;
        let img = form_image(&tone_history(256, 128.0, &[(5, f, 1.0)]), WindowKind::Hann).unwrap();
        let p = &find_scatterers(&img, 1)[0];
        assert!((p.doppler_hz - f).abs() < img.doppler_bin_hz() / 2.0);
        let scaled = cross_range_scale(&img, omega).unwrap();
        let bin = scaled.cross_range_m_per_bin.unwrap();
        assert!((bin - img.doppler_bin_hz() * lambda / 2.0 / omega).abs() < 1e-15);
        let p = &find_scatterers(&scaled, 1)[0];
        assert!((p.cross_range_m.unwrap() - x).abs() < bin);
        let doubled = cross_range_scale(&img, 2.0 * omega).unwrap();
        assert!((doubled.cross_range_m_per_bin.unwrap() * 2.0 - bin).abs() < 1e-15);
        assert!(matches!(cross_range_scale(&img, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn rayleigh_separation_resolves() {
        let (n, prf) = (128usize, 64.0);
        let df = prf / n as f64;
        let img = form_image(&tone_history(n, prf, &[(2, 4.0 * df, 1.0), (2, 6.0 * df, 1.0)]), WindowKind::Rectangular)
            .unwrap();
        let peaks = find_scatterers(&img, 2);
        assert_eq!(peaks.len(), 2);
        assert!(peaks.iter().all(|p| p.range_bin == 2));
        let mut f: Vec<f64> = peaks.iter().map(|p| p.doppler_hz).collect();
        f.sort_by(f64::total_cmp);
        assert!((f[0] - 4.0 * df).abs() < 0.5 * df && (f[1] - 6.0 * df).abs() < 0.5 * df);
    }
}
