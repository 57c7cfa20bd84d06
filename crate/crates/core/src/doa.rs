//! MUSIC azimuth estimation and the bearing-versus-ground-truth bookkeeping.
//!
//! Snapshots for MUSIC come from a patch of the unfiltered multichannel cube
//! around a detection. The covariance of that patch is eigen-decomposed; the
//! eigenvectors of the `6 - n_sources` smallest eigenvalues span the noise
//! subspace and the pseudo-spectrum `1 / |E_n^H v(theta)|^2` peaks where the
//! steering vector is orthogonal to it.
//!
//! The subarray pitch is one wavelength, so steering vectors repeat (up to a
//! real scale) whenever `sin(theta)` shifts by one. Keep the scan grid inside
//! roughly +/-30 deg for sources in the +/-22.5 deg sector.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::array_model::ArrayGeometry;
use crate::beamforming::{covariance_from_snapshots, CovarianceEstimate};
use crate::linalg;
use crate::rd::RdDatacube;
use crate::{Error, Result};

/// Patch geometry around a detection, in bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PatchWindow {
    pub half_range: usize,
    pub half_doppler: usize,
    pub guard_range: usize,
    pub guard_doppler: usize,
}

impl Default for PatchWindow {
    fn default() -> Self {
        Self { half_range: 3, half_doppler: 3, guard_range: 0, guard_doppler: 0 }
    }
}

/// Snapshots from a window centred on `(range_bin, doppler_bin)`, minus an
/// optional inner guard and any masked cells.
///
/// The range extent is clipped at the cube edges; Doppler wraps.
pub fn select_training_subset(
    rd: &RdDatacube,
    range_bin: usize,
    doppler_bin: usize,
    window: &PatchWindow,
    clutter_mask: Option<&Array2<bool>>,
) -> Result<Vec<Vec<Complex64>>> {
    let (n_ch, n_r, n_d) = rd.values.dim();
    if range_bin >= n_r || doppler_bin >= n_d {
        return Err(Error::Contract(format!(
            "detection ({range_bin}, {doppler_bin}) outside cube {n_r}x{n_d}"
        )));
    }
    if let Some(m) = clutter_mask {
        if m.dim() != (n_r, n_d) {
            return Err(Error::Contract("clutter mask shape differs from cube".into()));
        }
    }
    let r0 = range_bin.saturating_sub(window.half_range);
    let r1 = (range_bin + window.half_range).min(n_r - 1);
    let mut snapshots = Vec::new();
    for r in r0..=r1 {
        for dd in -(window.half_doppler as isize)..=window.half_doppler as isize {
            let in_guard = r.abs_diff(range_bin) <= window.guard_range
                && dd.unsigned_abs() <= window.guard_doppler;
            let guarded = (window.guard_range > 0 || window.guard_doppler > 0) && in_guard;
            if guarded {
                continue;
            }
            let d = (doppler_bin as isize + dd).rem_euclid(n_d as isize) as usize;
            if clutter_mask.is_some_and(|m| m[[r, d]]) {
                continue;
            }
            snapshots.push(rd.snapshot(r, d));
        }
    }
    let floor = 2 * n_ch;
    if snapshots.len() < floor {
        return Err(Error::Estimation(format!(
            "training subset has {} snapshots, need at least {floor}",
            snapshots.len()
        )));
    }
    Ok(snapshots)
}

/// Unloaded sample covariance of [`select_training_subset`].
pub fn covariance_for_patch(
    rd: &RdDatacube,
    range_bin: usize,
    doppler_bin: usize,
    window: &PatchWindow,
    clutter_mask: Option<&Array2<bool>>,
) -> Result<CovarianceEstimate> {
    let snapshots = select_training_subset(rd, range_bin, doppler_bin, window, clutter_mask)?;
    covariance_from_snapshots(&snapshots, f64::NEG_INFINITY, 2 * rd.n_channels())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MusicSpectrum {
    pub az_grid: Vec<f64>,
    pub pseudo_spectrum: Vec<f64>,
    pub n_sources: usize,
}

impl MusicSpectrum {
    /// Pseudo-spectrum in dB relative to its maximum.
    pub fn normalized_db(&self) -> Vec<f64> {
        let peak = self.pseudo_spectrum.iter().cloned().fold(0.0, f64::max);
        self.pseudo_spectrum.iter().map(|p| 10.0 * (p / peak).log10()).collect()
    }
}

/// Inclusive uniform grid `start, start + step, ..., <= stop`.
pub fn uniform_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..n).map(|i| start + i as f64 * step).collect()
}

/// Noise-subspace projector columns for a covariance.
pub fn noise_subspace(cov: &CovarianceEstimate, n_sources: usize) -> Result<linalg::CMatrix> {
    let dim = cov.dim();
    if n_sources == 0 || n_sources >= dim {
        return Err(Error::Contract(format!(
            "n_sources must lie in 1..={}, got {n_sources}",
            dim - 1
        )));
    }
    linalg::check_hermitian(&cov.matrix, 1e-10)?;
    let (_, vecs) = linalg::hermitian_eigen(&cov.matrix);
    Ok(vecs.columns(0, dim - n_sources).into_owned())
}

/// `|E_n^H v|^2`.
pub fn noise_projection(en: &linalg::CMatrix, v: &[Complex64]) -> f64 {
    (0..en.ncols())
        .map(|k| {
            let col = en.column(k);
            col.iter().zip(v).map(|(e, x)| e.conj() * x).sum::<Complex64>().norm_sqr()
        })
        .sum()
}

pub fn music_spectrum(
    cov: &CovarianceEstimate,
    geometry: &ArrayGeometry,
    az_grid: &[f64],
    n_sources: usize,
) -> Result<MusicSpectrum> {
    if az_grid.is_empty() {
        return Err(Error::Contract("empty MUSIC grid".into()));
    }
    if az_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Contract("MUSIC grid must be strictly increasing".into()));
    }
    let en = noise_subspace(cov, n_sources)?;
    let mut pseudo_spectrum = Vec::with_capacity(az_grid.len());
    for &az in az_grid {
        let v = geometry.subarray_steering(az, 0.0)?.values;
        let d = noise_projection(&en, &v).max(1e-300);
        pseudo_spectrum.push(1.0 / d);
    }
    Ok(MusicSpectrum { az_grid: az_grid.to_vec(), pseudo_spectrum, n_sources })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakEstimate {
    pub azimuth_deg: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakPick {
    /// Sorted by decreasing pseudo-spectrum value.
    pub peaks: Vec<PeakEstimate>,
    pub requested: usize,
}

impl PeakPick {
    /// `false` when fewer local maxima than requested were found.
    pub fn complete(&self) -> bool {
        self.peaks.len() >= self.requested
    }

    pub fn azimuths(&self) -> Vec<f64> {
        self.peaks.iter().map(|p| p.azimuth_deg).collect()
    }
}

/// The `k` strongest interior local maxima, refined by a three-point parabola.
pub fn pick_peaks(spectrum: &MusicSpectrum, k: usize) -> Result<PeakPick> {
    if k == 0 {
        return Err(Error::Contract("pick_peaks needs k >= 1".into()));
    }
    let (x, y) = (&spectrum.az_grid, &spectrum.pseudo_spectrum);
    let mut peaks = Vec::new();
    for i in 1..y.len().saturating_sub(1) {
        if y[i] > y[i - 1] && y[i] >= y[i + 1] {
            let denom = y[i - 1] - 2.0 * y[i] + y[i + 1];
            let offset = if denom < 0.0 { 0.5 * (y[i - 1] - y[i + 1]) / denom } else { 0.0 };
            let step = 0.5 * (x[i + 1] - x[i - 1]);
            let value = y[i] - 0.25 * (y[i - 1] - y[i + 1]) * offset;
            peaks.push(PeakEstimate { azimuth_deg: x[i] + offset * step, value });
        }
    }
    peaks.sort_by(|a, b| {
        b.value
            .total_cmp(&a.value)
            .then(a.azimuth_deg.abs().total_cmp(&b.azimuth_deg.abs()))
    });
    peaks.truncate(k);
    Ok(PeakPick { peaks, requested: k })
}

/// Ground-truth position report (an AIS-style track point).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthTrack {
    pub timestamp: String,
    pub name: String,
    pub range_m: f64,
    pub azimuth_deg: f64,
    pub heading_deg: f64,
    pub length_m: f64,
    pub beam_m: f64,
}

impl GroundTruthTrack {
    pub fn validate(&self) -> Result<()> {
        if !(self.beam_m > 0.0 && self.length_m >= self.beam_m) {
            return Err(Error::Domain(format!(
                "track '{}': need length >= beam > 0, got {} / {}",
                self.name, self.length_m, self.beam_m
            )));
        }
        Ok(())
    }
}

/// Reads a track CSV with header
/// `timestamp,name,range_m,azimuth_deg,heading_deg,length_m,beam_m`.
pub fn read_tracks(path: &Path) -> Result<Vec<GroundTruthTrack>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut tracks = Vec::new();
    for (i, row) in reader.deserialize().enumerate() {
        let track: GroundTruthTrack =
            row.map_err(|e| Error::Config(format!("{} row {}: {e}", path.display(), i + 1)))?;
        track.validate()?;
        tracks.push(track);
    }
    Ok(tracks)
}

/// `|estimate - truth|` wrapped to [0, 180] degrees.
pub fn angular_error(estimate_deg: f64, truth: &GroundTruthTrack) -> f64 {
    wrapped_difference(estimate_deg, truth.azimuth_deg)
}

pub fn wrapped_difference(a_deg: f64, b_deg: f64) -> f64 {
    let d = (a_deg - b_deg).rem_euclid(360.0);
    if d > 180.0 {
        360.0 - d
    } else {
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularSpan {
    pub projected_m: f64,
    pub span_deg: f64,
    pub within: Option<bool>,
}

/// Apparent angular width of an object of cross-range size `projected_m`
/// at `range_m`.
pub fn span_from_projected(projected_m: f64, range_m: f64) -> Result<f64> {
    if !(range_m > 0.0) {
        return Err(Error::Domain(format!("range must be positive, got {range_m}")));
    }
    Ok(2.0 * (projected_m / (2.0 * range_m)).atan().to_degrees())
}

/// Whether an angular error lies within the target's span. `tolerance`
/// absorbs the rounding of reported errors (0 for exact comparison).
pub fn within_target(error_deg: f64, span_deg: f64, tolerance: f64) -> bool {
    error_deg - tolerance <= span_deg
}

/// Cross-range extent and angular span of a vessel seen along
/// `radar_los_deg`. The projected length floors at the beam for hulls seen
/// nearly end-on.
pub fn target_angular_span(
    track: &GroundTruthTrack,
    radar_los_deg: f64,
    error_deg: Option<f64>,
) -> Result<AngularSpan> {
    let aspect = (track.heading_deg - radar_los_deg).to_radians();
    let projected_m = (track.length_m * aspect.sin().abs()).max(track.beam_m);
    let span_deg = span_from_projected(projected_m, track.range_m)?;
    Ok(AngularSpan {
        projected_m,
        span_deg,
        within: error_deg.map(|e| within_target(e, span_deg, 0.0)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;

    fn geom() -> ArrayGeometry {
        ArrayGeometry::demonstrator(0.03).unwrap()
    }

    fn spectrum(x: Vec<f64>, y: Vec<f64>) -> MusicSpectrum {
        MusicSpectrum { az_grid: x, pseudo_spectrum: y, n_sources: 1 }
    }

    #[test]
    fn noiseless_source_peaks_at_truth() {
        let g = geom();
        let v = g.subarray_steering(7.3, 0.0).unwrap().values;
        let mut m = CMatrix::identity(6, 6) * Complex64::new(1e-6, 0.0);
        linalg::add_outer(&mut m, &v);
        let cov = CovarianceEstimate::from_matrix(m).unwrap();
        let grid = uniform_grid(-30.0, 30.0, 0.05);
        let s = music_spectrum(&cov, &g, &grid, 1).unwrap();
        let i = s.pseudo_spectrum.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert!((grid[i] - 7.3).abs() < 0.026);
        let pick = pick_peaks(&s, 1).unwrap();
        assert!((pick.peaks[0].azimuth_deg - 7.3).abs() < 0.01);
    }

    #[test]
    fn orthogonality_for_noiseless_rank_two() {
        let g = geom();
        let a = g.subarray_steering(-10.0, 0.0).unwrap().values;
        let b = g.subarray_steering(12.0, 0.0).unwrap().values;
        let mut m = CMatrix::zeros(6, 6);
        linalg::add_outer(&mut m, &a);
        linalg::add_outer(&mut m, &b);
        let cov = CovarianceEstimate::from_matrix(m).unwrap();
        let en = noise_subspace(&cov, 2).unwrap();
        assert!(noise_projection(&en, &a).sqrt() < 1e-8);
        assert!(noise_projection(&en, &b).sqrt() < 1e-8);
    }

    #[test]
    fn bad_source_count_and_non_hermitian() {
        let g = geom();
        let cov = CovarianceEstimate::from_matrix(CMatrix::identity(6, 6)).unwrap();
        assert!(music_spectrum(&cov, &g, &[0.0], 0).is_err());
        assert!(music_spectrum(&cov, &g, &[0.0], 6).is_err());
        let mut bad = cov.clone();
        bad.matrix[(0, 3)] = Complex64::new(0.5, 0.5);
        assert!(matches!(music_spectrum(&bad, &g, &[0.0], 1), Err(Error::Contract(_))));
    }

    #[test]
    fn parabolic_vertex_exact_on_quadratic() {
        let x = uniform_grid(-2.0, 2.0, 0.1);
        let vertex = 0.437;
        let y: Vec<f64> = x.iter().map(|a| 10.0 - (a - vertex).powi(2)).collect();
        let pick = pick_peaks(&spectrum(x, y), 1).unwrap();
        assert!((pick.peaks[0].azimuth_deg - vertex).abs() < 1e-6);
    }

    #[test]
    fn peaks_ordered_by_power_and_incomplete_flag() {
        let x = uniform_grid(-5.0, 5.0, 1.0);
        let y = vec![0.0, 1.0, 3.0, 1.0, 0.0, 0.5, 0.0, 1.0, 2.0, 1.0, 0.0];
        let pick = pick_peaks(&spectrum(x.clone(), y.clone()), 2).unwrap();
        assert_eq!(pick.azimuths(), vec![-3.0, 3.0]);
        let pick = pick_peaks(&spectrum(x, y), 5).unwrap();
        assert_eq!(pick.peaks.len(), 3);
        assert!(!pick.complete());
    }

    #[test]
    fn ties_prefer_small_azimuth() {
        let x = uniform_grid(-4.0, 4.0, 1.0);
        let y = vec![0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0];
        let pick = pick_peaks(&spectrum(x, y), 1).unwrap();
        assert_eq!(pick.peaks[0].azimuth_deg.abs(), 2.0);
    }

    fn track(range_m: f64, length: f64, beam: f64, heading: f64) -> GroundTruthTrack {
        GroundTruthTrack {
            timestamp: "t".into(),
            name: "v".into(),
            range_m,
            azimuth_deg: 0.0,
            heading_deg: heading,
            length_m: length,
            beam_m: beam,
        }
    }

    #[test]
    fn angular_error_wraps() {
        let t = GroundTruthTrack { azimuth_deg: 179.0, ..track(1000.0, 10.0, 2.0, 0.0) };
        assert!((angular_error(-179.0, &t) - 2.0).abs() < 1e-12);
        assert_eq!(angular_error(179.0, &t), 0.0);
    }

    #[test]
    fn span_geometry() {
        assert!((span_from_projected(178.0, 10_150.0).unwrap() - 1.005).abs() < 1e-3);
        assert_eq!(span_from_projected(0.0, 5000.0).unwrap(), 0.0);
        assert!(matches!(span_from_projected(10.0, 0.0), Err(Error::Domain(_))));
        // End-on hull floors at the beam.
        let s = target_angular_span(&track(8220.0, 180.0, 25.0, 90.0), 90.0, Some(0.9)).unwrap();
        assert_eq!(s.projected_m, 25.0);
        assert_eq!(s.within, Some(false));
    }

    #[test]
    fn patch_counts() {
        use crate::rd::RdDatacube;
        use crate::scene::RadarParams;
        use crate::window::WindowKind;
        let rd = RdDatacube {
            values: ndarray::Array3::zeros((6, 60, 64)),
            params: RadarParams::default(),
            range_axis: (0..60).map(|i| i as f64).collect(),
            doppler_axis: (0..64).map(|i| i as f64).collect(),
            window: WindowKind::Hann,
            oversample: 1,
        };
        let w = PatchWindow { half_range: 10, half_doppler: 10, guard_range: 3, guard_doppler: 3 };
        assert_eq!(select_training_subset(&rd, 30, 32, &w, None).unwrap().len(), 392);
        let all = Array2::from_elem((60, 64), true);
        assert!(matches!(select_training_subset(&rd, 30, 32, &w, Some(&all)), Err(Error::Estimation(_))));
        // Clipped at the near range edge: rows 0..=9, 21 Doppler columns.
        let plain = PatchWindow { half_range: 9, half_doppler: 10, guard_range: 0, guard_doppler: 0 };
        let half = Array2::from_shape_fn((60, 64), |(r, _)| (5..10).contains(&r));
        let full = select_training_subset(&rd, 0, 32, &plain, None).unwrap().len();
        let halved = select_training_subset(&rd, 0, 32, &plain, Some(&half)).unwrap().len();
        assert_eq!(full, 210);
        assert_eq!(halved, full / 2);
    }
}
