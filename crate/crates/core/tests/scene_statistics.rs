use aesa_chain::array_model::ArrayGeometry;
use aesa_chain::beamforming::{estimate_covariance, TrainingRegion};
use aesa_chain::linalg::hermitian_eigen;
use aesa_chain::rd::form_rd_cube;
use aesa_chain::scene::{JammerSource, PointTarget, RadarParams, Scene};
use aesa_chain::window::WindowKind;

fn scene() -> Scene {
    let p = RadarParams::default();
    let g = ArrayGeometry::demonstrator(p.wavelength_m).unwrap();
    Scene::new(p, g, 1.0)
}

#[test]
fn configured_snr_appears_at_rd_peak() {
    let mut s = scene();
    let t = PointTarget { range_m: 2500.0, radial_velocity_mps: 9.375, azimuth_deg: 0.0, snr_db: 15.0 };
    s.targets.push(t.clone());
    let r = s.params.range_bin_of(t.range_m) as usize;
    let mut total = 0.0;
    let n = 100;
    for dwell in 0..n {
        let rd = form_rd_cube(&s.simulate(11, dwell).unwrap(), WindowKind::Hann, 1).unwrap();
        let d = rd.doppler_axis.iter().position(|v| (v - t.radial_velocity_mps).abs() < 1e-9).unwrap();
        total += rd.values[[0, r, d]].norm_sqr();
    }
    // Mean cell power is signal plus one unit of noise.
    let snr = 10.0 * (total / n as f64 - 1.0).log10();
    assert!((snr - 15.0).abs() <= 1.0, "measured {snr:.2} dB");
}

#[test]
fn jammer_only_covariance_is_rank_one_at_configured_jnr() {
    let mut s = scene();
    let jnr_db = 30.0;
    s.jammer = Some(JammerSource { active: true, azimuth_deg: 12.0, jnr_db });
    let rd = form_rd_cube(&s.simulate(4, 0).unwrap(), WindowKind::Rectangular, 1).unwrap();
    let cov = estimate_covariance(&rd, &TrainingRegion::full(&rd), f64::NEG_INFINITY).unwrap();
    assert!(cov.snapshot_count >= 10_000);
    let (vals, _) = hermitian_eigen(&cov.matrix);
    let floor = vals[..5].iter().sum::<f64>() / 5.0;
    // Unit-RMS signature over six channels: the jammer eigenvalue is 6 JNR above the floor.
    let jnr = (vals[5] - floor) / (6.0 * floor);
    let expect = 10f64.powf(jnr_db / 10.0);
    assert!((jnr / expect - 1.0).abs() < 0.1, "{jnr} vs {expect}");
    assert!(vals[4] / vals[5] < 1e-3);
}
