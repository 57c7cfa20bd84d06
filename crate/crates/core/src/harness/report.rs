use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::experiment::{DetectionRecord, ExperimentReport};
use crate::{Error, Result};

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn write_detections(path: &Path, list: &[DetectionRecord]) -> Result<()> {
    let rows: Vec<Vec<String>> = list
        .iter()
        .map(|d| {
            let az: Vec<String> = d.azimuths_deg.iter().map(|a| format!("{a:.4}")).collect();
            vec![
                d.dwell.to_string(),
                d.steer_deg.to_string(),
                format!("{:?}", d.beam).to_lowercase(),
                d.detection.range_bin.to_string(),
                d.detection.doppler_bin.to_string(),
                format!("{:.3}", d.detection.range_m),
                format!("{:.4}", d.detection.radial_velocity_mps),
                format!("{:.3}", d.detection.peak_power_db),
                format!("{:.3}", d.detection.threshold_db),
                d.snapshot_count.to_string(),
                az.join(";"),
            ]
        })
        .collect();
    write_csv(
        path,
        &[
            "dwell", "steer_deg", "beam", "range_bin", "doppler_bin", "range_m", "velocity_mps", "power_db",
            "threshold_db", "snapshots", "azimuths_deg",
        ],
        &rows,
    )
}

/// Human-readable summary. Contains no timestamps, so identical runs give
/// identical text.
pub fn summary_text(report: &ExperimentReport) -> String {
    let mut s = String::new();
    let p = &report.provenance;
    let _ = writeln!(s, "mode = {}", report.mode);
    let _ = writeln!(s, "seed = {}", p.seed);
    let _ = writeln!(s, "version = {}", p.version);
    let _ = writeln!(s, "config_sha256 = {}", p.config_sha256);
    let _ = writeln!(s, "adaptive = {}", report.adaptive);
    let steer: Vec<String> = report.steering_deg.iter().map(|a| a.to_string()).collect();
    let _ = writeln!(s, "steering_deg = [{}]", steer.join(", "));
    if !report.detections.is_empty() || !report.conventional_detections.is_empty() {
        let _ = writeln!(s, "\n[detection]");
        let _ = writeln!(s, "detections = {}", report.detections.len());
        if !report.conventional_detections.is_empty() {
            let _ = writeln!(s, "conventional_detections = {}", report.conventional_detections.len());
        }
    }
    if !report.truth.is_empty() {
        let _ = writeln!(s, "\n[angular_error]");
        let errors: Vec<f64> = report.truth.iter().filter_map(|t| t.error_deg).collect();
        let _ = writeln!(s, "compared = {}", report.truth.len());
        let _ = writeln!(s, "estimated = {}", errors.len());
        if !errors.is_empty() {
            let n = errors.len() as f64;
            let mean = errors.iter().sum::<f64>() / n;
            let rms = (errors.iter().map(|e| e * e).sum::<f64>() / n).sqrt();
            let _ = writeln!(s, "mean_error_deg = {mean:.4}");
            let _ = writeln!(s, "rms_error_deg = {rms:.4}");
        }
        let flags: Vec<bool> = report.truth.iter().filter_map(|t| t.within).collect();
        if !flags.is_empty() {
            let _ = writeln!(s, "within_target = {}/{}", flags.iter().filter(|&&w| w).count(), flags.len());
        }
    }
    if !report.rejection.is_empty() {
        let _ = writeln!(s, "\n[rejection]");
        for r in &report.rejection {
            let _ = writeln!(s, "steer {:+.1} deg = {:.2} dB", r.steer_deg, r.rejection_db);
        }
        if let Some(avg) = report.average_rejection_db() {
            let _ = writeln!(s, "average_db = {avg:.2}");
        }
        let _ = writeln!(s, "training_snapshots = {}", report.rejection[0].snapshot_count);
    }
    if let Some(i) = &report.isar {
        let _ = writeln!(s, "\n[isar]");
        let c: Vec<String> = i.polynomial.coefficients.iter().map(|c| format!("{c:.4}")).collect();
        let _ = writeln!(s, "phase_coefficients = [{}]", c.join(", "));
        let _ = writeln!(s, "contrast_before = {:.4}", i.contrast_before);
        let _ = writeln!(s, "contrast_after = {:.4}", i.contrast_after);
        let _ = writeln!(s, "no_focus_gain = {}", i.no_focus_gain);
        let _ = writeln!(s, "evaluations = {}", i.evaluations);
        let _ = writeln!(s, "omega_used = {}", i.omega_used);
        let _ = writeln!(s, "range_bin_m = {:.4}", i.range_bin_m);
        let _ = writeln!(s, "doppler_bin_hz = {:.6}", i.doppler_bin_hz);
        let _ = writeln!(s, "cross_range_m_per_bin = {:.6}", i.cross_range_m_per_bin);
        let _ = writeln!(s, "scatterers = {}", i.scatterers.len());
    }
    if !report.warnings.is_empty() {
        let _ = writeln!(s, "\n[warnings]");
        for w in &report.warnings {
            let _ = writeln!(s, "{w}");
        }
    }
    s
}

/// Writes `summary.txt`, the effective `config.toml`, CSV tables and
/// `grids/*.aesg`. Returns the files written, in order.
pub fn write_report(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir.join("grids"))?;
    let mut files = Vec::new();
    let mut put = |name: &str, text: &str| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, text)?;
        files.push(path);
        Ok(())
    };
    put("summary.txt", &summary_text(report))?;
    put("config.toml", &report.config_text)?;

    for (name, list) in [("detections.csv", &report.detections), ("conventional_detections.csv", &report.conventional_detections)] {
        if !list.is_empty() {
            let path = dir.join(name);
            write_detections(&path, list)?;
            files.push(path);
        }
    }
    if !report.truth.is_empty() {
        let rows: Vec<Vec<String>> = report
            .truth
            .iter()
            .map(|t| {
                vec![
                    t.dwell.to_string(),
                    t.name.clone(),
                    format!("{:.3}", t.range_m),
                    format!("{:.4}", t.truth_azimuth_deg),
                    opt(t.detected_range_m),
                    opt(t.estimate_deg),
                    opt(t.error_deg),
                    opt(t.projected_m),
                    opt(t.span_deg),
                    t.within.map(|w| w.to_string()).unwrap_or_default(),
                ]
            })
            .collect();
        let path = dir.join("angular_errors.csv");
        write_csv(
            &path,
            &[
                "dwell", "name", "range_m", "truth_azimuth_deg", "detected_range_m", "estimate_deg",
                "error_deg", "projected_m", "span_deg", "within",
            ],
            &rows,
        )?;
        files.push(path);
    }
    if !report.rejection.is_empty() {
        let rows: Vec<Vec<String>> = report
            .rejection
            .iter()
            .map(|r| {
                vec![
                    r.steer_deg.to_string(),
                    format!("{:.4}", r.rejection_db),
                    r.snapshot_count.to_string(),
                    format!("{:.6e}", r.diagonal_loading),
                ]
            })
            .collect();
        let path = dir.join("rejection.csv");
        write_csv(&path, &["steer_deg", "rejection_db", "snapshots", "diagonal_loading"], &rows)?;
        files.push(path);
    }
    if !report.beamscan.is_empty() {
        // Both curves relative to the conventional peak, as in a beamscan plot.
        let reference = report.beamscan[0].peak_energy();
        let curves: Vec<Vec<f64>> = report.beamscan.iter().map(|c| c.db_relative_to(reference)).collect();
        let rows: Vec<Vec<String>> = (0..report.beamscan[0].az_grid.len())
            .map(|i| {
                let mut row = vec![format!("{:.3}", report.beamscan[0].az_grid[i])];
                row.extend(curves.iter().map(|c| format!("{:.4}", c[i])));
                row
            })
            .collect();
        let mut header = vec!["azimuth_deg".to_string()];
        header.extend(report.beamscan.iter().map(|c| format!("{:?}_db", c.mode).to_lowercase()));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let path = dir.join("beamscan.csv");
        write_csv(&path, &header, &rows)?;
        files.push(path);
    }
    if !report.spectra.is_empty() {
        let mut rows = Vec::new();
        for (name, spec) in &report.spectra {
            for (az, db) in spec.az_grid.iter().zip(spec.normalized_db()) {
                rows.push(vec![name.clone(), format!("{az:.3}"), format!("{db:.4}")]);
            }
        }
        let path = dir.join("music_spectra.csv");
        write_csv(&path, &["patch", "azimuth_deg", "normalized_db"], &rows)?;
        files.push(path);
    }
    if let Some(isar) = &report.isar {
        let rows: Vec<Vec<String>> = isar
            .scatterers
            .iter()
            .map(|s| {
                vec![
                    format!("{:.4}", s.range_m),
                    format!("{:.4}", s.doppler_hz),
                    opt(s.cross_range_m),
                    format!("{:.3}", s.rel_db),
                ]
            })
            .collect();
        let path = dir.join("scatterers.csv");
        write_csv(&path, &["range_m", "doppler_hz", "cross_range_m", "rel_db"], &rows)?;
        files.push(path);
    }
    for (name, grid) in &report.grids {
        let path = dir.join("grids").join(format!("{name}.aesg"));
        grid.save(&path)?;
        files.push(path);
    }
    Ok(files)
}
