use ndarray::Array2;
use sha2::{Digest, Sha256};

use super::config::{config_to_string, ExperimentConfig, Mode};
use crate::array_model::ArrayGeometry;
use crate::beamforming::{
    apply_beamformer, beamscan, conventional_weights, estimate_covariance, mvdr_weights, power_map,
    region_excluding, rejection_db, BeamMode, BeamformerWeights, BeamscanCurve, CovarianceEstimate,
    GuardBox, TrainingRegion,
};
use crate::detection::{cfar_detect, Detection};
use crate::doa::{
    covariance_for_patch, music_spectrum, pick_peaks, read_tracks, target_angular_span, uniform_grid,
    wrapped_difference, GroundTruthTrack, MusicSpectrum,
};
use crate::grid::{Grid, GridAxis};
use crate::isar::{
    apply_phase_correction, cross_range_scale, extract_target_history, find_scatterers, form_image,
    icba_autofocus, range_align, PhasePolynomial, ScattererPeak,
};
use crate::rd::{form_rd_cube, RdDatacube};
use crate::scene::{simulate_isar_sequence, Scene};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub config_sha256: String,
    pub seed: u64,
    pub version: String,
}

/// One CFAR detection and the MUSIC result on its patch.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRecord {
    pub dwell: usize,
    pub steer_deg: f64,
    pub beam: BeamMode,
    pub detection: Detection,
    pub snapshot_count: usize,
    /// MUSIC peaks, strongest first.
    pub azimuths_deg: Vec<f64>,
}

/// Angular error of one ground-truth object (one row per dwell).
#[derive(Debug, Clone, PartialEq)]
pub struct TruthComparison {
    pub dwell: usize,
    pub name: String,
    pub range_m: f64,
    pub truth_azimuth_deg: f64,
    pub detected_range_m: Option<f64>,
    pub estimate_deg: Option<f64>,
    pub error_deg: Option<f64>,
    pub projected_m: Option<f64>,
    pub span_deg: Option<f64>,
    pub within: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RejectionRow {
    pub steer_deg: f64,
    pub rejection_db: f64,
    pub snapshot_count: usize,
    pub diagonal_loading: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsarSummary {
    pub polynomial: PhasePolynomial,
    pub contrast_before: f64,
    pub contrast_after: f64,
    pub no_focus_gain: bool,
    pub evaluations: usize,
    pub omega_used: f64,
    pub range_bin_m: f64,
    pub doppler_bin_hz: f64,
    pub cross_range_m_per_bin: f64,
    pub max_alignment_shift: f64,
    pub scatterers: Vec<ScattererPeak>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub mode: Mode,
    pub provenance: Provenance,
    pub config_text: String,
    pub adaptive: bool,
    pub steering_deg: Vec<f64>,
    pub detections: Vec<DetectionRecord>,
    /// Detections on the conventional map when the detection beam is MVDR
    /// (T3), kept to show what nulling uncovered.
    pub conventional_detections: Vec<DetectionRecord>,
    pub truth: Vec<TruthComparison>,
    pub rejection: Vec<RejectionRow>,
    pub beamscan: Vec<BeamscanCurve>,
    pub spectra: Vec<(String, MusicSpectrum)>,
    pub isar: Option<IsarSummary>,
    pub grids: Vec<(String, Grid)>,
    pub warnings: Vec<String>,
}

impl ExperimentReport {
    pub fn average_rejection_db(&self) -> Option<f64> {
        if self.rejection.is_empty() {
            return None;
        }
        Some(self.rejection.iter().map(|r| r.rejection_db).sum::<f64>() / self.rejection.len() as f64)
    }

    pub fn grid(&self, name: &str) -> Option<&Grid> {
        self.grids.iter().find(|(n, _)| n == name).map(|(_, g)| g)
    }
}

pub fn provenance(cfg: &ExperimentConfig) -> Result<(Provenance, String)> {
    let text = config_to_string(cfg)?;
    let hash = Sha256::digest(text.as_bytes());
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    Ok((
        Provenance { config_sha256: hex, seed: cfg.seed, version: env!("CARGO_PKG_VERSION").to_string() },
        text,
    ))
}

fn rd_axes(rd: &RdDatacube) -> (GridAxis, GridAxis) {
    (GridAxis::from_coords(&rd.range_axis, "m"), GridAxis::from_coords(&rd.doppler_axis, "m/s"))
}

/// Storage cell of each declared target in `rd`.
fn target_cells(cfg: &ExperimentConfig, rd: &RdDatacube) -> Vec<(usize, usize)> {
    let p = &rd.params;
    cfg.targets
        .iter()
        .filter_map(|t| {
            let r = p.range_bin_of(t.range_m);
            if r < 0 || r as usize >= rd.n_range() {
                return None;
            }
            let fd = 2.0 * t.radial_velocity_mps / p.wavelength_m;
            let bin = (fd / p.prf_hz * rd.n_doppler() as f64).round() as isize;
            Some((r as usize, rd.doppler_index(bin)))
        })
        .collect()
}

fn target_guards(cfg: &ExperimentConfig, rd: &RdDatacube) -> Vec<GuardBox> {
    let g = cfg.processing.target_guard * rd.oversample.max(1);
    target_cells(cfg, rd)
        .into_iter()
        .map(|(r, d)| GuardBox { range_bin: r, doppler_bin: d, range_guard: cfg.processing.target_guard, doppler_guard: g })
        .collect()
}

fn clutter_mask(cfg: &ExperimentConfig, rd: &RdDatacube) -> Option<Array2<bool>> {
    cfg.clutter.enabled.then(|| cfg.clutter.mask(&cfg.radar, rd.n_doppler()))
}

/// Interference covariance: the whole cube minus target guards and clutter.
fn interference_covariance(cfg: &ExperimentConfig, rd: &RdDatacube) -> Result<CovarianceEstimate> {
    let mut region = TrainingRegion::full(rd).with_exclusions(target_guards(cfg, rd));
    if let Some(m) = clutter_mask(cfg, rd) {
        region = region.with_mask(m);
    }
    estimate_covariance(rd, &region, cfg.processing.loading_db)
}

fn scene(cfg: &ExperimentConfig, geometry: &ArrayGeometry) -> Scene {
    Scene {
        params: cfg.radar.clone(),
        geometry: geometry.clone(),
        targets: cfg.targets.clone(),
        jammer: Some(cfg.jammer.clone()),
        clutter: cfg.clutter.clone(),
        noise_power: cfg.noise_power,
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let truth = match &cfg.truth_file {
        Some(path) => Some(read_tracks(path)?),
        None => None,
    };
    let (provenance, config_text) = provenance(cfg)?;
    let geometry = ArrayGeometry::demonstrator(cfg.radar.wavelength_m)?;
    let mut report = ExperimentReport {
        mode: cfg.mode,
        provenance,
        config_text,
        adaptive: cfg.adaptive,
        steering_deg: cfg.steering(),
        detections: Vec::new(),
        conventional_detections: Vec::new(),
        truth: Vec::new(),
        rejection: Vec::new(),
        beamscan: Vec::new(),
        spectra: Vec::new(),
        isar: None,
        grids: Vec::new(),
        warnings: Vec::new(),
    };
    match cfg.mode {
        Mode::T1 | Mode::T3 => run_doa(cfg, &geometry, truth.as_deref(), &mut report)?,
        Mode::T2 => run_rejection(cfg, &geometry, &mut report)?,
        Mode::T4 => run_isar(cfg, &geometry, &mut report)?,
    }
    Ok(report)
}

/// Detection on a (conventional or MVDR) beam, then MUSIC on the original
/// multichannel cube around every detection.
fn run_doa(
    cfg: &ExperimentConfig,
    geometry: &ArrayGeometry,
    truth: Option<&[GroundTruthTrack]>,
    report: &mut ExperimentReport,
) -> Result<()> {
    let p = &cfg.processing;
    let sc = scene(cfg, geometry);
    let grid = uniform_grid(p.music_start_deg, p.music_stop_deg, p.music_step_deg);
    let adaptive = cfg.adaptive || cfg.mode == Mode::T3;
    let n_sources = cfg.n_sources();
    for dwell in 0..cfg.n_dwells {
        let raw = sc.simulate(cfg.seed, dwell as u64)?;
        let rd = form_rd_cube(&raw, p.window, p.doppler_oversample)?;
        let mask = clutter_mask(cfg, &rd);
        let cov = if adaptive { Some(interference_covariance(cfg, &rd)?) } else { None };
        let mut found: Vec<DetectionRecord> = Vec::new();
        for &steer in &cfg.steering() {
            let conv = conventional_weights(geometry, steer)?;
            let conv_power = power_map(&apply_beamformer(&rd, &conv)?);
            if dwell == 0 {
                let (ra, da) = rd_axes(&rd);
                report.grids.push((format!("conventional_power_{steer}"), Grid::real(ra, da, &conv_power)));
            }
            let (weights, beam_power) = match &cov {
                Some(cov) => {
                    let w = mvdr_weights(cov, geometry, steer)?;
                    let pm = power_map(&apply_beamformer(&rd, &w)?);
                    if dwell == 0 {
                        let (ra, da) = rd_axes(&rd);
                        report.grids.push((format!("mvdr_power_{steer}"), Grid::real(ra, da, &pm)));
                    }
                    let conv_dets = cfar_detect(&conv_power, &rd.range_axis, &rd.doppler_axis, &p.cfar)?;
                    report.conventional_detections.extend(conv_dets.into_iter().map(|det| DetectionRecord {
                        dwell,
                        steer_deg: steer,
                        beam: BeamMode::Conventional,
                        detection: det,
                        snapshot_count: 0,
                        azimuths_deg: Vec::new(),
                    }));
                    (w, pm)
                }
                None => (conv, conv_power),
            };
            let mut dets = cfar_detect(&beam_power, &rd.range_axis, &rd.doppler_axis, &p.cfar)?;
            dets.sort_by(|a, b| b.peak_power_db.total_cmp(&a.peak_power_db));
            dets.truncate(p.max_detections);
            for det in dets {
                let (snapshots, azimuths) =
                    match music_on_patch(&rd, geometry, &det, cfg, &grid, n_sources, mask.as_ref()) {
                        Ok((count, spectrum, peaks)) => {
                            if dwell == 0 {
                                report.spectra.push((
                                    format!("music_r{}_d{}_steer{}", det.range_bin, det.doppler_bin, steer),
                                    spectrum,
                                ));
                            }
                            (count, peaks)
                        }
                        Err(e @ Error::Estimation(_)) => {
                            report.warnings.push(format!("dwell {dwell}: {e}"));
                            (0, Vec::new())
                        }
                        Err(e) => return Err(e),
                    };
                found.push(DetectionRecord {
                    dwell,
                    steer_deg: steer,
                    beam: weights.mode,
                    detection: det,
                    snapshot_count: snapshots,
                    azimuths_deg: azimuths,
                });
            }
        }
        compare_with_truth(cfg, &rd, truth, dwell, &found, report)?;
        report.detections.extend(found);
    }
    Ok(())
}

fn music_on_patch(
    rd: &RdDatacube,
    geometry: &ArrayGeometry,
    det: &Detection,
    cfg: &ExperimentConfig,
    grid: &[f64],
    n_sources: usize,
    mask: Option<&Array2<bool>>,
) -> Result<(usize, MusicSpectrum, Vec<f64>)> {
    let cov = covariance_for_patch(rd, det.range_bin, det.doppler_bin, &cfg.processing.patch, mask)?;
    let spectrum = music_spectrum(&cov, geometry, grid, n_sources)?;
    let peaks = pick_peaks(&spectrum, n_sources)?.azimuths();
    Ok((cov.snapshot_count, spectrum, peaks))
}

/// Tracks come from the truth file when given, else from the scenario.
fn compare_with_truth(
    cfg: &ExperimentConfig,
    rd: &RdDatacube,
    truth: Option<&[GroundTruthTrack]>,
    dwell: usize,
    found: &[DetectionRecord],
    report: &mut ExperimentReport,
) -> Result<()> {
    let entries: Vec<(String, f64, f64, Option<&GroundTruthTrack>)> = match truth {
        Some(tracks) => tracks.iter().map(|t| (t.name.clone(), t.range_m, t.azimuth_deg, Some(t))).collect(),
        None => cfg
            .targets
            .iter()
            .enumerate()
            .map(|(i, t)| (format!("target{i}"), t.range_m, t.azimuth_deg, None))
            .collect(),
    };
    let tol = (cfg.processing.target_guard as f64 + 0.5) * rd.params.range_bin_m();
    for (name, range, az, track) in entries {
        // Strongest detection near the reported range.
        let hit = found
            .iter()
            .filter(|d| (d.detection.range_m - range).abs() <= tol && !d.azimuths_deg.is_empty())
            .max_by(|a, b| a.detection.peak_power_db.total_cmp(&b.detection.peak_power_db));
        let estimate = hit.and_then(|h| {
            h.azimuths_deg
                .iter()
                .cloned()
                .min_by(|a, b| wrapped_difference(*a, az).total_cmp(&wrapped_difference(*b, az)))
        });
        let error = estimate.map(|e| wrapped_difference(e, az));
        let span = match track {
            Some(t) => Some(target_angular_span(t, cfg.boresight_deg + t.azimuth_deg, error)?),
            None => None,
        };
        report.truth.push(TruthComparison {
            dwell,
            name,
            range_m: range,
            truth_azimuth_deg: az,
            detected_range_m: hit.map(|h| h.detection.range_m),
            estimate_deg: estimate,
            error_deg: error,
            projected_m: span.map(|s| s.projected_m),
            span_deg: span.map(|s| s.span_deg),
            within: span.and_then(|s| s.within),
        });
    }
    Ok(())
}

/// Conventional vs MVDR output per steering angle on one jammed dwell.
fn run_rejection(cfg: &ExperimentConfig, geometry: &ArrayGeometry, report: &mut ExperimentReport) -> Result<()> {
    let p = &cfg.processing;
    let raw = scene(cfg, geometry).simulate(cfg.seed, 0)?;
    let rd = form_rd_cube(&raw, p.window, p.doppler_oversample)?;
    let cov = interference_covariance(cfg, &rd)?;
    let region = region_excluding(rd.n_range(), rd.n_doppler(), &target_guards(cfg, &rd));
    let (ra, da) = rd_axes(&rd);
    report.grids.push((
        "rejection_region".into(),
        Grid::real(ra.clone(), da.clone(), &region.mapv(|b| if b { 1.0 } else { 0.0 })),
    ));
    for &steer in &cfg.steering() {
        let conv = apply_beamformer(&rd, &conventional_weights(geometry, steer)?)?;
        let mvdr = apply_beamformer(&rd, &mvdr_weights(&cov, geometry, steer)?)?;
        let rejection = rejection_db(&conv, &mvdr, Some(&region))?;
        report.grids.push((format!("conventional_power_{steer}"), Grid::real(ra.clone(), da.clone(), &power_map(&conv))));
        report.grids.push((format!("mvdr_power_{steer}"), Grid::real(ra.clone(), da.clone(), &power_map(&mvdr))));
        report.rejection.push(RejectionRow {
            steer_deg: steer,
            rejection_db: rejection,
            snapshot_count: cov.snapshot_count,
            diagonal_loading: cov.diagonal_loading,
        });
    }
    let az = uniform_grid(-30.0, 30.0, p.beamscan_step_deg);
    report.beamscan.push(beamscan(&rd, geometry, &az, BeamMode::Conventional, None)?);
    report.beamscan.push(beamscan(&rd, geometry, &az, BeamMode::Mvdr, Some(&cov))?);
    Ok(())
}

fn run_isar(cfg: &ExperimentConfig, geometry: &ArrayGeometry, report: &mut ExperimentReport) -> Result<()> {
    let is = &cfg.isar;
    let seq = simulate_isar_sequence(&cfg.radar, geometry, &is.body, is.n_dwells, cfg.noise_power, cfg.seed)?;
    report.warnings.extend(seq.warnings.iter().cloned());
    let weights: BeamformerWeights = conventional_weights(geometry, is.body.azimuth_deg)?;
    let center = cfg.radar.range_bin_of(is.body.center_range_m);
    if center < 0 {
        return Err(Error::Config("isar.body.center_range_m lies before the range window".into()));
    }
    let mut history = extract_target_history(&seq.dwells, &weights, center as usize, is.half_window)?;
    if !is.injected_phase.is_empty() {
        // Applying the negated polynomial as a "correction" adds the error.
        let error = PhasePolynomial { coefficients: is.injected_phase.iter().map(|c| -c).collect() };
        history = apply_phase_correction(&history, &error);
    }
    let aligned = range_align(&history, is.align_order)?;
    if !aligned.ambiguous.is_empty() {
        report.warnings.push(format!("{} profiles had ambiguous alignment peaks", aligned.ambiguous.len()));
    }
    let focus = icba_autofocus(&aligned.aligned, is.phase_order, &is.autofocus)?;
    if focus.no_focus_gain {
        report.warnings.push("autofocus found no contrast gain".into());
    }
    let omega = is.omega.unwrap_or(is.body.rotation_rate.abs());
    let image = cross_range_scale(&form_image(&focus.focused, is.autofocus.window)?, omega)?;
    let scatterers = find_scatterers(&image, is.n_scatterers);
    let cross = image.cross_range_axis().expect("scaled image has a cross-range axis");
    let max = image.magnitude.iter().cloned().fold(0.0, f64::max);
    report.grids.push((
        "isar_image".into(),
        Grid::real(
            GridAxis::from_coords(&image.range_axis, "m"),
            GridAxis::from_coords(&cross, "m"),
            &image.magnitude.mapv(|m| m / max),
        ),
    ));
    let unfocused = form_image(&aligned.aligned, is.autofocus.window)?;
    let umax = unfocused.magnitude.iter().cloned().fold(0.0, f64::max);
    report.grids.push((
        "isar_image_unfocused".into(),
        Grid::real(
            GridAxis::from_coords(&unfocused.range_axis, "m"),
            GridAxis::from_coords(&unfocused.doppler_axis_hz, "Hz"),
            &unfocused.magnitude.mapv(|m| m / umax),
        ),
    ));
    report.isar = Some(IsarSummary {
        polynomial: focus.polynomial,
        contrast_before: focus.contrast_before,
        contrast_after: focus.contrast_after,
        no_focus_gain: focus.no_focus_gain,
        evaluations: focus.evaluations,
        omega_used: omega,
        range_bin_m: image.range_bin_m(),
        doppler_bin_hz: image.doppler_bin_hz(),
        cross_range_m_per_bin: image.cross_range_m_per_bin.unwrap_or(f64::NAN),
        max_alignment_shift: aligned.shifts.iter().fold(0.0, |a: f64, s| a.max(s.abs())),
        scatterers,
    });
    Ok(())
}
