//! Synthetic multichannel dwells: point targets, a broadband noise jammer,
//! receiver noise, optional zero-Doppler clutter and rotating rigid bodies
//! for imaging.
//!
//! Raw cubes are indexed `(channel, fast_time, slow_time)`. Fast-time sample
//! `n` of every pulse is taken at absolute delay `(first_sample + n) / fs`,
//! where `first_sample = round(2 r_min fs / c)`, so range bins line up with
//! the absolute sample grid.
//!
//! Random draws come from a ChaCha8 generator seeded with the scenario seed,
//! with the dwell index selecting the stream. Dwell `d` of a seed is therefore
//! reproducible on its own and decorrelated from every other dwell.

use ndarray::{Array2, Array3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::array_model::ArrayGeometry;
use crate::window::WindowKind;
use crate::{Error, Result};

/// Speed of light, m/s.
pub const C: f64 = 299_792_458.0;

/// Half-width of the surveillance sector in degrees.
pub const SECTOR_HALF_WIDTH_DEG: f64 = 22.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RadarParams {
    pub wavelength_m: f64,
    pub bandwidth_hz: f64,
    pub pulse_width_s: f64,
    pub prf_hz: f64,
    pub n_pulses: usize,
    pub sample_rate_hz: f64,
    pub r_min_m: f64,
    pub r_max_m: f64,
}

impl Default for RadarParams {
    fn default() -> Self {
        Self {
            wavelength_m: 0.03,
            bandwidth_hz: 50e6,
            pulse_width_s: 2e-6,
            prf_hz: 2000.0,
            n_pulses: 128,
            sample_rate_hz: 62.5e6,
            r_min_m: 2000.0,
            r_max_m: 3700.0,
        }
    }
}

impl RadarParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("wavelength_m", self.wavelength_m),
            ("bandwidth_hz", self.bandwidth_hz),
            ("pulse_width_s", self.pulse_width_s),
            ("prf_hz", self.prf_hz),
            ("sample_rate_hz", self.sample_rate_hz),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("radar.{name} must be positive, got {v}")));
            }
        }
        if self.sample_rate_hz < self.bandwidth_hz {
            return Err(Error::Domain(format!(
                "radar.sample_rate_hz {} below bandwidth {}",
                self.sample_rate_hz, self.bandwidth_hz
            )));
        }
        if self.n_pulses < 2 {
            return Err(Error::Domain("radar.n_pulses must be at least 2".into()));
        }
        if !(self.r_min_m >= 0.0 && self.r_min_m < self.r_max_m) {
            return Err(Error::Domain(format!(
                "radar range window [{}, {}] m is empty",
                self.r_min_m, self.r_max_m
            )));
        }
        let unambiguous = C / (2.0 * self.prf_hz);
        if unambiguous < self.r_max_m {
            return Err(Error::Domain(format!(
                "radar.r_max_m {} beyond unambiguous range {unambiguous:.1} m",
                self.r_max_m
            )));
        }
        if self.pulse_samples() < 2 {
            return Err(Error::Domain("pulse shorter than two samples".into()));
        }
        Ok(())
    }

    /// Range extent of one fast-time sample.
    pub fn range_bin_m(&self) -> f64 {
        C / (2.0 * self.sample_rate_hz)
    }

    /// Absolute sample index of the first range bin.
    pub fn first_sample(&self) -> usize {
        (2.0 * self.r_min_m * self.sample_rate_hz / C).round() as usize
    }

    pub fn n_range_bins(&self) -> usize {
        let last = (2.0 * self.r_max_m * self.sample_rate_hz / C).floor() as usize;
        last.saturating_sub(self.first_sample()) + 1
    }

    pub fn pulse_samples(&self) -> usize {
        (self.pulse_width_s * self.sample_rate_hz).round() as usize
    }

    /// Raw fast-time length: every echo from the range window fits entirely.
    pub fn n_fast_time(&self) -> usize {
        self.n_range_bins() + self.pulse_samples() - 1
    }

    /// Range of each compressed range bin.
    pub fn range_axis(&self) -> Vec<f64> {
        let first = self.first_sample();
        (0..self.n_range_bins())
            .map(|k| (first + k) as f64 * self.range_bin_m())
            .collect()
    }

    pub fn dwell_duration_s(&self) -> f64 {
        self.n_pulses as f64 / self.prf_hz
    }

    /// Transmitted linear-FM pulse sampled at `fs`, sweeping -B/2 .. B/2.
    pub fn replica(&self) -> Vec<Complex64> {
        (0..self.pulse_samples())
            .map(|n| self.chirp(n as f64 / self.sample_rate_hz))
            .collect()
    }

    fn chirp(&self, t: f64) -> Complex64 {
        let k = self.bandwidth_hz / self.pulse_width_s;
        let tc = t - self.pulse_width_s / 2.0;
        Complex64::from_polar(1.0, PI * k * tc * tc)
    }

    /// Signed DFT bin (before wrap) of a radial velocity.
    pub fn doppler_bin_of(&self, radial_velocity: f64) -> isize {
        let fd = 2.0 * radial_velocity / self.wavelength_m;
        (fd / self.prf_hz * self.n_pulses as f64).round() as isize
    }

    /// Compressed range bin of an absolute range.
    pub fn range_bin_of(&self, range: f64) -> isize {
        (2.0 * range / C * self.sample_rate_hz).round() as isize - self.first_sample() as isize
    }

    /// Peak per-sample amplitude giving `snr_db` at the range-Doppler peak of
    /// a bin-centred echo under matched range compression and the default
    /// (Hann) Doppler window.
    pub fn amplitude_for_snr(&self, snr_db: f64, noise_power: f64) -> f64 {
        let window = WindowKind::default().coherent_loss(self.n_pulses);
        let gain = (self.pulse_samples() * self.n_pulses) as f64 * window;
        (noise_power * 10f64.powf(snr_db / 10.0) / gain).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointTarget {
    pub range_m: f64,
    /// Positive when closing (positive Doppler).
    pub radial_velocity_mps: f64,
    pub azimuth_deg: f64,
    /// Per-channel SNR at the range-Doppler peak, dB.
    pub snr_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JammerSource {
    pub active: bool,
    pub azimuth_deg: f64,
    /// Jammer-to-noise power ratio in one channel sample, dB.
    pub jnr_db: f64,
}

impl Default for JammerSource {
    fn default() -> Self {
        Self { active: false, azimuth_deg: 21.4, jnr_db: 50.0 }
    }
}

/// Zero-Doppler clutter band starting at the near edge of the range window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClutterBand {
    pub enabled: bool,
    pub extent_m: f64,
    /// Mean per-channel clutter-to-noise ratio at the RD peak, dB.
    pub cnr_db: f64,
    /// Doppler bins either side of zero treated as clutter-dominated.
    pub doppler_half_width: usize,
}

impl Default for ClutterBand {
    fn default() -> Self {
        Self { enabled: false, extent_m: 150.0, cnr_db: 30.0, doppler_half_width: 2 }
    }
}

impl ClutterBand {
    /// Number of range bins covered by the band.
    pub fn n_range_bins(&self, params: &RadarParams) -> usize {
        if !self.enabled {
            return 0;
        }
        ((self.extent_m / params.range_bin_m()).ceil() as usize).min(params.n_range_bins())
    }

    /// Range-Doppler cells dominated by the band, for a map with `n_doppler`
    /// fftshifted bins (zero Doppler at `n_doppler / 2`).
    pub fn mask(&self, params: &RadarParams, n_doppler: usize) -> Array2<bool> {
        let n_bins = self.n_range_bins(params);
        let scale = n_doppler / params.n_pulses.max(1);
        let half = (self.doppler_half_width * scale.max(1)) as isize;
        let zero = (n_doppler / 2) as isize;
        Array2::from_shape_fn((params.n_range_bins(), n_doppler), |(r, d)| {
            r < n_bins && (d as isize - zero).abs() <= half
        })
    }
}

/// Rotating rigid body observed over several dwells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RigidBodyTarget {
    /// (down-range offset m, cross-range offset m, amplitude). Amplitude is
    /// the square root of the single-dwell per-channel RD-peak SNR.
    pub scatterers: Vec<(f64, f64, f64)>,
    pub center_range_m: f64,
    pub azimuth_deg: f64,
    /// Rotation rate, rad/s.
    pub rotation_rate: f64,
    /// Closing speed of the body centre, m/s.
    pub translational_velocity_mps: f64,
}

impl Default for RigidBodyTarget {
    /// Three-scatterer body 2060 m out on boresight turning at 0.02 rad/s.
    fn default() -> Self {
        Self {
            scatterers: vec![(0.0, 0.0, 10.0), (8.0, 12.0, 8.0), (-6.0, -9.0, 6.0)],
            center_range_m: 2060.0,
            azimuth_deg: 0.0,
            rotation_rate: 0.02,
            translational_velocity_mps: 0.0,
        }
    }
}

impl RigidBodyTarget {
    /// Range of scatterer `i` at time `t` after the start of the sequence.
    pub fn scatterer_range(&self, i: usize, t: f64) -> f64 {
        let (dr, cr, _) = self.scatterers[i];
        let a = self.rotation_rate * t;
        self.center_range_m - self.translational_velocity_mps * t + dr * a.cos() - cr * a.sin()
    }
}

#[derive(Debug, Clone)]
pub struct RawDatacube {
    /// `(channel, fast_time, slow_time)`.
    pub values: Array3<Complex64>,
    pub params: RadarParams,
    pub seed: u64,
    pub dwell_index: u64,
    /// Slow time of the first pulse, s.
    pub t0: f64,
}

impl RawDatacube {
    pub fn zeros(params: &RadarParams, n_channels: usize) -> Self {
        Self {
            values: Array3::zeros((n_channels, params.n_fast_time(), params.n_pulses)),
            params: params.clone(),
            seed: 0,
            dwell_index: 0,
            t0: 0.0,
        }
    }

    pub fn n_channels(&self) -> usize {
        self.values.dim().0
    }
}

/// Everything needed to synthesize a dwell.
#[derive(Debug, Clone)]
pub struct Scene {
    pub params: RadarParams,
    pub geometry: ArrayGeometry,
    pub targets: Vec<PointTarget>,
    pub jammer: Option<JammerSource>,
    pub clutter: ClutterBand,
    pub noise_power: f64,
}

/// Generator for dwell `dwell_index` of `seed`.
pub fn dwell_rng(seed: u64, dwell_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(dwell_index);
    rng
}

fn complex_gaussian<R: Rng>(rng: &mut R, power: f64) -> Complex64 {
    let s = (power / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * s, im * s)
}

/// Subarray steering rescaled to unit mean power per channel.
fn unit_power_signature(geometry: &ArrayGeometry, az_deg: f64) -> Result<Vec<Complex64>> {
    let v = geometry.subarray_steering(az_deg, 0.0)?.values;
    let rms = (v.iter().map(|z| z.norm_sqr()).sum::<f64>() / v.len() as f64).sqrt();
    if rms < 1e-12 {
        return Err(Error::Numerical(format!("subarray response vanishes at {az_deg} deg")));
    }
    Ok(v.into_iter().map(|z| z / rms).collect())
}

/// Adds the echo of a point scatterer whose range follows `range_at(t)`.
///
/// `amplitude` is the per-channel complex baseband amplitude; `signature`
/// is the per-channel spatial response.
fn add_echo(
    cube: &mut RawDatacube,
    signature: &[Complex64],
    amplitude: f64,
    range_at: impl Fn(f64) -> f64,
) {
    let p = cube.params.clone();
    let fs = p.sample_rate_hz;
    let first = p.first_sample() as f64;
    let n_fast = p.n_fast_time();
    let ns = p.pulse_samples();
    for m in 0..p.n_pulses {
        let t = cube.t0 + m as f64 / p.prf_hz;
        let r = range_at(t);
        let delay = 2.0 * r / C;
        let carrier = Complex64::from_polar(amplitude, -4.0 * PI * r / p.wavelength_m);
        // First fast-time index with t_n >= delay.
        let start = ((delay * fs - first).ceil()).max(0.0) as usize;
        for n in start..n_fast {
            let local = (first + n as f64) / fs - delay;
            if local >= p.pulse_width_s || local >= ns as f64 / fs {
                break;
            }
            if local < 0.0 {
                continue;
            }
            let s = p.chirp(local) * carrier;
            for (c, w) in signature.iter().enumerate() {
                cube.values[[c, n, m]] += s * w;
            }
        }
    }
}

/// Noise-free echoes of point targets. Linear in the target list.
pub fn echo_cube(
    params: &RadarParams,
    geometry: &ArrayGeometry,
    targets: &[PointTarget],
    noise_power: f64,
) -> Result<RawDatacube> {
    let mut cube = RawDatacube::zeros(params, geometry.n_subarrays());
    for t in targets {
        check_target(params, t)?;
        let sig = unit_power_signature(geometry, t.azimuth_deg)?;
        let a = params.amplitude_for_snr(t.snr_db, noise_power);
        let (r0, v) = (t.range_m, t.radial_velocity_mps);
        add_echo(&mut cube, &sig, a, |time| r0 - v * time);
    }
    Ok(cube)
}

fn check_target(params: &RadarParams, t: &PointTarget) -> Result<()> {
    if !(t.range_m >= params.r_min_m && t.range_m <= params.r_max_m) {
        return Err(Error::Domain(format!(
            "target at {} m outside range window [{}, {}] m",
            t.range_m, params.r_min_m, params.r_max_m
        )));
    }
    if t.azimuth_deg.abs() > SECTOR_HALF_WIDTH_DEG {
        return Err(Error::Domain(format!(
            "target azimuth {} deg outside the +/-{SECTOR_HALF_WIDTH_DEG} deg sector",
            t.azimuth_deg
        )));
    }
    Ok(())
}

impl Scene {
    pub fn new(params: RadarParams, geometry: ArrayGeometry, noise_power: f64) -> Self {
        Self {
            params,
            geometry,
            targets: Vec::new(),
            jammer: None,
            clutter: ClutterBand::default(),
            noise_power,
        }
    }

    /// Synthesizes dwell `dwell_index` of `seed`.
    ///
    /// Draw order within the dwell stream: clutter scatterers, jammer
    /// samples, receiver noise.
    pub fn simulate(&self, seed: u64, dwell_index: u64) -> Result<RawDatacube> {
        self.params.validate()?;
        if !(self.noise_power.is_finite() && self.noise_power > 0.0) {
            return Err(Error::Domain(format!(
                "noise power must be positive, got {}",
                self.noise_power
            )));
        }
        let mut cube = echo_cube(&self.params, &self.geometry, &self.targets, self.noise_power)?;
        cube.seed = seed;
        cube.dwell_index = dwell_index;
        let mut rng = dwell_rng(seed, dwell_index);

        if self.clutter.enabled {
            let n_bins = self.clutter.n_range_bins(&self.params);
            let axis = self.params.range_axis();
            let mean = 10f64.powf(self.clutter.cnr_db / 10.0);
            for &r in axis.iter().take(n_bins) {
                let e: f64 = Exp1.sample(&mut rng);
                let snr = mean * e;
                let az = rng.random_range(-SECTOR_HALF_WIDTH_DEG..SECTOR_HALF_WIDTH_DEG);
                let phase = rng.random_range(0.0..2.0 * PI);
                let sig: Vec<Complex64> = unit_power_signature(&self.geometry, az)?
                    .into_iter()
                    .map(|z| z * Complex64::from_polar(1.0, phase))
                    .collect();
                let a = self.params.amplitude_for_snr(10.0 * snr.log10(), self.noise_power);
                add_echo(&mut cube, &sig, a, |_| r);
            }
        }

        let (n_ch, n_fast, n_slow) = cube.values.dim();
        if let Some(j) = self.jammer.as_ref().filter(|j| j.active) {
            if j.jnr_db.is_nan() {
                return Err(Error::Domain("jammer JNR is NaN".into()));
            }
            let sig = unit_power_signature(&self.geometry, j.azimuth_deg)?;
            let power = self.noise_power * 10f64.powf(j.jnr_db / 10.0);
            for m in 0..n_slow {
                for n in 0..n_fast {
                    let s = complex_gaussian(&mut rng, power);
                    for (c, w) in sig.iter().enumerate() {
                        cube.values[[c, n, m]] += s * w;
                    }
                }
            }
        }

        for c in 0..n_ch {
            for n in 0..n_fast {
                for m in 0..n_slow {
                    cube.values[[c, n, m]] += complex_gaussian(&mut rng, self.noise_power);
                }
            }
        }
        Ok(cube)
    }
}

/// Single-dwell convenience wrapper around [`Scene::simulate`].
pub fn simulate_dwell(
    params: &RadarParams,
    geometry: &ArrayGeometry,
    targets: &[PointTarget],
    jammer: Option<&JammerSource>,
    noise_power: f64,
    seed: u64,
) -> Result<RawDatacube> {
    let mut scene = Scene::new(params.clone(), geometry.clone(), noise_power);
    scene.targets = targets.to_vec();
    scene.jammer = jammer.cloned();
    scene.simulate(seed, 0)
}

#[derive(Debug, Clone)]
pub struct IsarSequence {
    pub dwells: Vec<RawDatacube>,
    pub warnings: Vec<String>,
}

/// Total rotation angle above which the small-angle imaging model degrades.
pub const MAX_IMAGING_ROTATION_RAD: f64 = 0.2;

/// Consecutive dwells of a rotating rigid body with receiver noise.
///
/// Pulses form one continuous train: pulse `m` of dwell `d` is emitted at
/// `(d * n_pulses + m) / prf`.
pub fn simulate_isar_sequence(
    params: &RadarParams,
    geometry: &ArrayGeometry,
    body: &RigidBodyTarget,
    n_dwells: usize,
    noise_power: f64,
    seed: u64,
) -> Result<IsarSequence> {
    params.validate()?;
    if !(noise_power.is_finite() && noise_power >= 0.0) {
        return Err(Error::Domain(format!("noise power must be non-negative, got {noise_power}")));
    }
    if body.scatterers.len() < 2 {
        return Err(Error::Domain("rigid body needs at least two scatterers".into()));
    }
    let mut warnings = Vec::new();
    let cpi = n_dwells as f64 * params.dwell_duration_s();
    let rotation = (body.rotation_rate * cpi).abs();
    if rotation > MAX_IMAGING_ROTATION_RAD {
        warnings.push(format!(
            "total rotation {rotation:.3} rad exceeds {MAX_IMAGING_ROTATION_RAD} rad; \
             small-angle imaging model is inaccurate"
        ));
    }
    let sig = unit_power_signature(geometry, body.azimuth_deg)?;
    let reference_noise = if noise_power > 0.0 { noise_power } else { 1.0 };
    let mut dwells = Vec::with_capacity(n_dwells);
    for d in 0..n_dwells {
        let mut cube = RawDatacube::zeros(params, geometry.n_subarrays());
        cube.seed = seed;
        cube.dwell_index = d as u64;
        cube.t0 = d as f64 * params.dwell_duration_s();
        for (i, &(_, _, amp)) in body.scatterers.iter().enumerate() {
            let snr_db = 20.0 * amp.abs().max(1e-300).log10();
            let a = params.amplitude_for_snr(snr_db, reference_noise) * amp.signum();
            add_echo(&mut cube, &sig, a, |t| body.scatterer_range(i, t));
        }
        if noise_power > 0.0 {
            let mut rng = dwell_rng(seed, d as u64);
            cube.values.mapv_inplace(|z| z + complex_gaussian(&mut rng, noise_power));
        }
        dwells.push(cube);
    }
    for (i, _) in body.scatterers.iter().enumerate() {
        for (label, t) in [("start", 0.0), ("end", cpi)] {
            let r = body.scatterer_range(i, t);
            if r < params.r_min_m || r > params.r_max_m {
                warnings.push(format!("scatterer {i} at {r:.1} m leaves the range window at {label}"));
            }
        }
    }
    Ok(IsarSequence { dwells, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_params() -> RadarParams {
        RadarParams { r_min_m: 2000.0, r_max_m: 2300.0, n_pulses: 32, ..Default::default() }
    }

    fn geom() -> ArrayGeometry {
        ArrayGeometry::demonstrator(0.03).unwrap()
    }

    #[test]
    fn default_params_are_valid() {
        RadarParams::default().validate().unwrap();
        assert!(RadarParams::default().n_range_bins() >= 200);
    }

    #[test]
    fn invalid_params_rejected() {
        let p = RadarParams { sample_rate_hz: 10e6, ..Default::default() };
        assert!(p.validate().is_err());
        let p = RadarParams { n_pulses: 1, ..Default::default() };
        assert!(p.validate().is_err());
        let p = RadarParams { prf_hz: 50_000.0, r_max_m: 23_500.0, ..Default::default() };
        assert!(p.validate().is_err());
    }

    #[test]
    fn same_seed_same_cube() {
        let mut scene = Scene::new(small_params(), geom(), 1.0);
        scene.jammer = Some(JammerSource { active: true, ..Default::default() });
        let a = scene.simulate(9, 0).unwrap();
        let b = scene.simulate(9, 0).unwrap();
        assert_eq!(a.values, b.values);
        let c = scene.simulate(9, 1).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn targets_superpose() {
        let p = small_params();
        let g = geom();
        let ta = PointTarget { range_m: 2100.0, radial_velocity_mps: 3.0, azimuth_deg: 5.0, snr_db: 20.0 };
        let tb = PointTarget { range_m: 2150.5, radial_velocity_mps: -7.0, azimuth_deg: -12.0, snr_db: 30.0 };
        let both = echo_cube(&p, &g, &[ta.clone(), tb.clone()], 1.0).unwrap();
        let a = echo_cube(&p, &g, &[ta], 1.0).unwrap();
        let b = echo_cube(&p, &g, &[tb], 1.0).unwrap();
        assert_eq!(both.values, &a.values + &b.values);
    }

    #[test]
    fn target_outside_window_rejected() {
        let p = small_params();
        let t = PointTarget { range_m: 5000.0, radial_velocity_mps: 0.0, azimuth_deg: 0.0, snr_db: 10.0 };
        let err = simulate_dwell(&p, &geom(), &[t], None, 1.0, 0).unwrap_err();
        assert!(matches!(err, Error::Domain(ref m) if m.contains("outside range window")));
    }

    #[test]
    fn non_positive_noise_rejected() {
        assert!(matches!(
            simulate_dwell(&small_params(), &geom(), &[], None, 0.0, 0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn static_body_dwells_repeat() {
        let p = small_params();
        let body = RigidBodyTarget {
            scatterers: vec![(0.0, 0.0, 10.0), (5.0, 3.0, 5.0)],
            center_range_m: 2150.0,
            azimuth_deg: 0.0,
            rotation_rate: 0.0,
            translational_velocity_mps: 0.0,
        };
        let seq = simulate_isar_sequence(&p, &geom(), &body, 3, 0.0, 1).unwrap();
        assert!(seq.warnings.is_empty());
        // The carrier phase is constant, so dwells differ only by noise.
        assert_eq!(seq.dwells[0].values, seq.dwells[2].values);
    }

    #[test]
    fn large_rotation_warns() {
        let p = small_params();
        let body = RigidBodyTarget {
            scatterers: vec![(0.0, 0.0, 1.0), (1.0, 1.0, 1.0)],
            center_range_m: 2150.0,
            azimuth_deg: 0.0,
            rotation_rate: 10.0,
            translational_velocity_mps: 0.0,
        };
        let seq = simulate_isar_sequence(&p, &geom(), &body, 4, 1.0, 1).unwrap();
        assert!(seq.warnings.iter().any(|w| w.contains("rotation")));
        assert_eq!(seq.dwells.len(), 4);
    }
}
