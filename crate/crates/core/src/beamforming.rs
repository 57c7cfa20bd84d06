//! Conventional and MVDR digital beamforming over the six subarray channels.
//!
//! A snapshot is the 6-channel vector of one range-Doppler cell. The MVDR
//! weights solve the distortionless minimum-power problem
//! `w0 = R^-1 v / (v^H R^-1 v)` on a diagonally loaded sample covariance and
//! are then rescaled to unit norm. The rescaling keeps the pattern shape and
//! leaves white noise at its per-channel power, which is what makes the
//! conventional and adaptive maps directly comparable.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::array_model::{hdot, ArrayGeometry};
use crate::linalg::{self, CMatrix};
use crate::rd::RdDatacube;
use crate::{Error, Result};

/// Condition number beyond which a loaded covariance is treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// A guard box removed from a training or measurement region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GuardBox {
    pub range_bin: usize,
    pub doppler_bin: usize,
    pub range_guard: usize,
    pub doppler_guard: usize,
}

impl GuardBox {
    pub fn square(range_bin: usize, doppler_bin: usize, guard: usize) -> Self {
        Self { range_bin, doppler_bin, range_guard: guard, doppler_guard: guard }
    }

    /// Whether a cell falls inside the box. Doppler distance wraps around
    /// the `n_doppler` bins.
    pub fn contains(&self, r: usize, d: usize, n_doppler: usize) -> bool {
        let dr = r.abs_diff(self.range_bin);
        let dd = d.abs_diff(self.doppler_bin);
        let dd = dd.min(n_doppler - dd.min(n_doppler));
        dr <= self.range_guard && dd <= self.doppler_guard
    }
}

/// Block of range-Doppler cells used to estimate the interference covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRegion {
    /// Half-open range-bin span.
    pub range_bins: (usize, usize),
    /// Half-open Doppler-bin span (storage indices).
    pub doppler_bins: (usize, usize),
    pub exclusions: Vec<GuardBox>,
    /// Cells flagged `true` are excluded (e.g. clutter).
    pub mask: Option<Array2<bool>>,
    pub min_snapshots: usize,
}

impl TrainingRegion {
    /// Every cell of a cube, with the default snapshot floor of two per channel.
    pub fn full(rd: &RdDatacube) -> Self {
        Self {
            range_bins: (0, rd.n_range()),
            doppler_bins: (0, rd.n_doppler()),
            exclusions: Vec::new(),
            mask: None,
            min_snapshots: 2 * rd.n_channels(),
        }
    }

    pub fn with_exclusions(mut self, guards: impl IntoIterator<Item = GuardBox>) -> Self {
        self.exclusions.extend(guards);
        self
    }

    pub fn with_mask(mut self, mask: Array2<bool>) -> Self {
        self.mask = Some(mask);
        self
    }

    /// Cells of the region in range-major order.
    pub fn cells(&self, n_range: usize, n_doppler: usize) -> Result<Vec<(usize, usize)>> {
        let (r0, r1) = self.range_bins;
        let (d0, d1) = self.doppler_bins;
        if r0 >= r1 || d0 >= d1 || r1 > n_range || d1 > n_doppler {
            return Err(Error::Contract(format!(
                "training span r[{r0},{r1}) d[{d0},{d1}) outside cube {n_range}x{n_doppler}"
            )));
        }
        if let Some(m) = &self.mask {
            if m.dim() != (n_range, n_doppler) {
                return Err(Error::Contract("training mask shape differs from cube".into()));
            }
        }
        let mut cells = Vec::new();
        for r in r0..r1 {
            for d in d0..d1 {
                if self.mask.as_ref().is_some_and(|m| m[[r, d]]) {
                    continue;
                }
                if self.exclusions.iter().any(|g| g.contains(r, d, n_doppler)) {
                    continue;
                }
                cells.push((r, d));
            }
        }
        Ok(cells)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceEstimate {
    pub matrix: CMatrix,
    pub snapshot_count: usize,
    /// Linear power added to the diagonal.
    pub diagonal_loading: f64,
    /// Noise-floor estimate the loading was referenced to.
    pub noise_floor: f64,
}

impl CovarianceEstimate {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Wraps a known covariance matrix without loading.
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        linalg::check_hermitian(&matrix, 1e-12)?;
        let (vals, _) = linalg::hermitian_eigen(&matrix);
        let noise_floor = lower_half_mean(&vals);
        Ok(Self { matrix, snapshot_count: 0, diagonal_loading: 0.0, noise_floor })
    }
}

fn lower_half_mean(sorted: &[f64]) -> f64 {
    let k = sorted.len().div_ceil(2).max(1);
    sorted[..k].iter().sum::<f64>() / k as f64
}

/// Sample covariance `(1/K) sum x x^H + delta I`.
///
/// `delta` is the noise-floor estimate (mean of the smaller half of the
/// sample-covariance eigenvalues) times `10^(loading_db/10)`; pass
/// `f64::NEG_INFINITY` for no loading.
pub fn covariance_from_snapshots(
    snapshots: &[Vec<Complex64>],
    loading_db: f64,
    min_snapshots: usize,
) -> Result<CovarianceEstimate> {
    let k = snapshots.len();
    if k == 0 || k < min_snapshots {
        return Err(Error::Estimation(format!(
            "only {k} training snapshots, need at least {min_snapshots}"
        )));
    }
    let n = snapshots[0].len();
    let mut r = CMatrix::zeros(n, n);
    for x in snapshots {
        if x.len() != n {
            return Err(Error::Contract("snapshots differ in length".into()));
        }
        linalg::add_outer(&mut r, x);
    }
    r /= Complex64::new(k as f64, 0.0);
    // Symmetrize away rounding so downstream checks see an exact Hermitian.
    let r = (&r + r.adjoint()) * Complex64::new(0.5, 0.0);
    let (vals, _) = linalg::hermitian_eigen(&r);
    let noise_floor = lower_half_mean(&vals).max(0.0);
    let delta = noise_floor * 10f64.powf(loading_db / 10.0);
    let mut matrix = r;
    for i in 0..n {
        matrix[(i, i)] += delta;
    }
    Ok(CovarianceEstimate { matrix, snapshot_count: k, diagonal_loading: delta, noise_floor })
}

/// Covariance over a training region of a range-Doppler cube.
pub fn estimate_covariance(
    rd: &RdDatacube,
    region: &TrainingRegion,
    loading_db: f64,
) -> Result<CovarianceEstimate> {
    let cells = region.cells(rd.n_range(), rd.n_doppler())?;
    let snapshots: Vec<Vec<Complex64>> = cells.iter().map(|&(r, d)| rd.snapshot(r, d)).collect();
    covariance_from_snapshots(&snapshots, loading_db, region.min_snapshots)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BeamMode {
    Conventional,
    Mvdr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerWeights {
    /// Unit-norm channel weights.
    pub values: Vec<Complex64>,
    pub mode: BeamMode,
    pub steer_azimuth_deg: f64,
}

impl BeamformerWeights {
    /// Selects a single channel.
    pub fn selector(n: usize, channel: usize) -> Self {
        let mut values = vec![Complex64::new(0.0, 0.0); n];
        values[channel] = Complex64::new(1.0, 0.0);
        Self { values, mode: BeamMode::Conventional, steer_azimuth_deg: f64::NAN }
    }
}

fn unit(v: Vec<Complex64>) -> Result<Vec<Complex64>> {
    let n = linalg::norm(&v);
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::Numerical(format!("cannot normalize weight vector of norm {n}")));
    }
    Ok(v.into_iter().map(|z| z / n).collect())
}

/// Matched steering `v / |v|`.
pub fn conventional_weights(geometry: &ArrayGeometry, az_deg: f64) -> Result<BeamformerWeights> {
    let v = geometry.subarray_steering(az_deg, 0.0)?.values;
    Ok(BeamformerWeights { values: unit(v)?, mode: BeamMode::Conventional, steer_azimuth_deg: az_deg })
}

/// Distortionless MVDR weights `R^-1 v / (v^H R^-1 v)` before normalization.
pub fn mvdr_distortionless(cov: &CovarianceEstimate, steering: &[Complex64]) -> Result<Vec<Complex64>> {
    if steering.len() != cov.dim() {
        return Err(Error::Contract(format!(
            "steering length {} vs covariance dimension {}",
            steering.len(),
            cov.dim()
        )));
    }
    linalg::check_hermitian(&cov.matrix, 1e-10)?;
    let (vals, _) = linalg::hermitian_eigen(&cov.matrix);
    let (lo, hi) = (vals[0], vals[vals.len() - 1]);
    if !(lo > 0.0) || hi / lo > MAX_CONDITION {
        let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        return Err(Error::Numerical(format!(
            "covariance is singular or ill-conditioned (condition number {cond:.3e})"
        )));
    }
    let rinv_v = linalg::solve(&cov.matrix, steering)?;
    let denom = hdot(steering, &rinv_v);
    Ok(rinv_v.into_iter().map(|z| z / denom).collect())
}

/// Unit-norm MVDR weights steered to `az_deg`.
pub fn mvdr_weights(
    cov: &CovarianceEstimate,
    geometry: &ArrayGeometry,
    az_deg: f64,
) -> Result<BeamformerWeights> {
    let v = geometry.subarray_steering(az_deg, 0.0)?.values;
    let w0 = mvdr_distortionless(cov, &v)?;
    Ok(BeamformerWeights { values: unit(w0)?, mode: BeamMode::Mvdr, steer_azimuth_deg: az_deg })
}

/// Beamformed map `w^H x(r, d)`, shaped `(range, doppler)`.
pub fn apply_beamformer(rd: &RdDatacube, w: &BeamformerWeights) -> Result<Array2<Complex64>> {
    let (n_ch, n_r, n_d) = rd.values.dim();
    if w.values.len() != n_ch {
        return Err(Error::Contract(format!(
            "{} weights for a {n_ch}-channel cube",
            w.values.len()
        )));
    }
    let wc: Vec<Complex64> = w.values.iter().map(|z| z.conj()).collect();
    let mut out = Array2::zeros((n_r, n_d));
    for c in 0..n_ch {
        let ch = rd.values.index_axis(ndarray::Axis(0), c);
        out.zip_mut_with(&ch, |o, x| *o += wc[c] * x);
    }
    Ok(out)
}

pub fn power_map(map: &Array2<Complex64>) -> Array2<f64> {
    map.mapv(|z| z.norm_sqr())
}

/// Power maps scaled by their joint maximum, in dB.
pub fn jointly_normalized_db(maps: &[&Array2<f64>]) -> Vec<Array2<f64>> {
    let peak = maps
        .iter()
        .flat_map(|m| m.iter())
        .cloned()
        .fold(f64::MIN_POSITIVE, f64::max);
    maps.iter()
        .map(|m| m.mapv(|p| 10.0 * (p.max(f64::MIN_POSITIVE) / peak).log10()))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamscanCurve {
    pub az_grid: Vec<f64>,
    pub mode: BeamMode,
    /// Total beamformed energy per angle.
    pub energy: Vec<f64>,
    /// `energy` in dB relative to its own maximum.
    pub normalized_db: Vec<f64>,
}

impl BeamscanCurve {
    /// Energy in dB relative to an external reference level.
    pub fn db_relative_to(&self, reference: f64) -> Vec<f64> {
        self.energy.iter().map(|e| 10.0 * (e / reference).log10()).collect()
    }

    pub fn peak_energy(&self) -> f64 {
        self.energy.iter().cloned().fold(0.0, f64::max)
    }
}

/// Output energy of the whole map versus steering angle.
pub fn beamscan(
    rd: &RdDatacube,
    geometry: &ArrayGeometry,
    az_grid: &[f64],
    mode: BeamMode,
    cov: Option<&CovarianceEstimate>,
) -> Result<BeamscanCurve> {
    if az_grid.is_empty() {
        return Err(Error::Contract("empty beamscan grid".into()));
    }
    let mut energy = Vec::with_capacity(az_grid.len());
    for &az in az_grid {
        let w = match mode {
            BeamMode::Conventional => conventional_weights(geometry, az)?,
            BeamMode::Mvdr => {
                let cov = cov.ok_or_else(|| {
                    Error::Contract("MVDR beamscan requires a covariance estimate".into())
                })?;
                mvdr_weights(cov, geometry, az)?
            }
        };
        let map = apply_beamformer(rd, &w)?;
        energy.push(map.iter().map(|z| z.norm_sqr()).sum());
    }
    let peak = energy.iter().cloned().fold(0.0, f64::max);
    if peak <= 0.0 {
        return Err(Error::Numerical("beamscan energy is zero everywhere".into()));
    }
    let normalized_db = energy.iter().map(|e| 10.0 * (e / peak).log10()).collect();
    Ok(BeamscanCurve { az_grid: az_grid.to_vec(), mode, energy, normalized_db })
}

/// Interference rejection `10 log10(P_conv / P_mvdr)` over the cells where
/// `region` is `true` (all cells when `None`).
pub fn rejection_db(
    conv_map: &Array2<Complex64>,
    mvdr_map: &Array2<Complex64>,
    region: Option<&Array2<bool>>,
) -> Result<f64> {
    if conv_map.dim() != mvdr_map.dim() {
        return Err(Error::Contract("conventional and MVDR maps differ in shape".into()));
    }
    if let Some(m) = region {
        if m.dim() != conv_map.dim() {
            return Err(Error::Contract("measurement region shape differs from maps".into()));
        }
    }
    let (mut pc, mut pm, mut n) = (0.0, 0.0, 0usize);
    for ((idx, c), m) in conv_map.indexed_iter().zip(mvdr_map.iter()) {
        if region.is_none_or(|mask| mask[idx]) {
            pc += c.norm_sqr();
            pm += m.norm_sqr();
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::Contract("empty rejection measurement region".into()));
    }
    if pm <= 0.0 {
        return Err(Error::Numerical("adaptive map has zero power in the measurement region".into()));
    }
    Ok(10.0 * (pc / pm).log10())
}

/// Measurement mask: `true` everywhere except inside the guard boxes.
pub fn region_excluding(n_range: usize, n_doppler: usize, guards: &[GuardBox]) -> Array2<bool> {
    Array2::from_shape_fn((n_range, n_doppler), |(r, d)| {
        !guards.iter().any(|g| g.contains(r, d, n_doppler))
    })
}
