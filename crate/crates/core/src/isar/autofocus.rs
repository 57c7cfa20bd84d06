//! Image-contrast-based autofocus.
//!
//! Residual motion after range alignment shows up as a slow-time phase error.
//! It is modelled as a polynomial `c2 t^2 + ... + cP t^P` in time measured
//! from the aperture centre (constant and linear terms only shift the image)
//! and removed by the conjugate phase whose coefficients maximize the
//! contrast `std(I) / mean(I)` of the image intensity.
//!
//! The search is a coordinate-wise coarse grid followed by Nelder-Mead in
//! grid-step units. The zero polynomial is always a candidate, so the
//! returned contrast never falls below the unfocused one.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::image::doppler_transform;
use super::RangeProfileHistory;
use crate::window::WindowKind;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePolynomial {
    /// `c2, c3, ..., cP` in rad/s^n.
    pub coefficients: Vec<f64>,
}

impl PhasePolynomial {
    pub fn zero(order: usize) -> Self {
        Self { coefficients: vec![0.0; order.saturating_sub(1)] }
    }

    pub fn order(&self) -> usize {
        self.coefficients.len() + 1
    }

    pub fn phase(&self, t: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(i, c)| c * t.powi(i as i32 + 2))
            .sum()
    }
}

/// Multiplies profile `k` by `exp(-j * phase(t_k))` with `t` centred on the
/// aperture.
pub fn apply_phase_correction(history: &RangeProfileHistory, poly: &PhasePolynomial) -> RangeProfileHistory {
    let t = history.centered_time();
    let mut values = history.values.clone();
    for (k, mut row) in values.rows_mut().into_iter().enumerate() {
        let rot = Complex64::from_polar(1.0, -poly.phase(t[k]));
        row.mapv_inplace(|z| z * rot);
    }
    RangeProfileHistory { values, ..history.clone() }
}

/// `std(I) / mean(I)` over the intensity `I = magnitude^2`.
pub fn image_contrast(magnitude: &Array2<f64>) -> Result<f64> {
    if magnitude.is_empty() {
        return Err(Error::Contract("contrast of an empty grid".into()));
    }
    let n = magnitude.len() as f64;
    let mean = magnitude.iter().map(|m| m * m).sum::<f64>() / n;
    if !(mean > 0.0) {
        return Err(Error::Domain("contrast of an all-zero image is undefined".into()));
    }
    let var = magnitude.iter().map(|m| (m * m - mean).powi(2)).sum::<f64>() / n;
    Ok(var.sqrt() / mean)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AutofocusConfig {
    /// Points per coefficient in the coarse grid.
    pub grid_points: usize,
    /// Coarse half-span of `c_n` is `extent * pi * (2/T)^n`, i.e. `extent * pi`
    /// radians of phase at the aperture edges.
    pub extent: f64,
    /// Relative contrast tolerance that stops the simplex.
    pub tolerance: f64,
    pub max_evaluations: usize,
    pub window: WindowKind,
}

impl Default for AutofocusConfig {
    fn default() -> Self {
        Self {
            grid_points: 21,
            extent: 32.0,
            tolerance: 1e-3,
            max_evaluations: 2000,
            window: WindowKind::Hann,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AutofocusResult {
    pub polynomial: PhasePolynomial,
    pub focused: RangeProfileHistory,
    pub contrast_before: f64,
    pub contrast_after: f64,
    /// Set when no candidate beat the unfocused image.
    pub no_focus_gain: bool,
    pub evaluations: usize,
}

struct Objective<'a> {
    history: &'a RangeProfileHistory,
    t: Vec<f64>,
    window: WindowKind,
    evaluations: usize,
}

impl Objective<'_> {
    fn contrast(&mut self, coefficients: &[f64]) -> f64 {
        self.evaluations += 1;
        let poly = PhasePolynomial { coefficients: coefficients.to_vec() };
        let mut values = self.history.values.clone();
        for (k, mut row) in values.rows_mut().into_iter().enumerate() {
            let rot = Complex64::from_polar(1.0, -poly.phase(self.t[k]));
            row.mapv_inplace(|z| z * rot);
        }
        let image = doppler_transform(&values, self.window).mapv(|z| z.norm());
        image_contrast(&image).unwrap_or(0.0)
    }
}

/// Coarse step for coefficient `c_n` given the aperture length.
fn coarse_step(order_n: usize, duration: f64, cfg: &AutofocusConfig) -> f64 {
    let half_span = cfg.extent * PI * (2.0 / duration).powi(order_n as i32);
    2.0 * half_span / (cfg.grid_points.max(2) - 1) as f64
}

pub fn icba_autofocus(
    history: &RangeProfileHistory,
    order: usize,
    cfg: &AutofocusConfig,
) -> Result<AutofocusResult> {
    if !(2..=4).contains(&order) {
        return Err(Error::Config(format!("autofocus order must be 2..=4, got {order}")));
    }
    if history.n_slow() < 2 {
        return Err(Error::Contract("autofocus needs at least two profiles".into()));
    }
    let dim = order - 1;
    let steps: Vec<f64> = (2..=order).map(|n| coarse_step(n, history.duration_s(), cfg)).collect();
    let mut obj = Objective {
        history,
        t: history.centered_time(),
        window: cfg.window,
        evaluations: 0,
    };
    let contrast_before = obj.contrast(&vec![0.0; dim]);
    let mut best = vec![0.0; dim];
    let mut best_val = contrast_before;

    // Coordinate-wise coarse grid, lowest order first.
    let half = (cfg.grid_points.max(2) - 1) as isize / 2;
    for i in 0..dim {
        let mut trial = best.clone();
        for g in -half..=half {
            trial[i] = g as f64 * steps[i];
            let v = obj.contrast(&trial);
            if v > best_val {
                best_val = v;
                best = trial.clone();
            }
        }
    }

    // Simplex refinement in step-normalized coordinates.
    let to_coef = |x: &[f64]| -> Vec<f64> { x.iter().zip(&steps).map(|(a, s)| a * s).collect() };
    let start: Vec<f64> = best.iter().zip(&steps).map(|(c, s)| c / s).collect();
    let budget = cfg.max_evaluations.saturating_sub(obj.evaluations);
    let (x, v) = nelder_mead(
        |x| -obj.contrast(&to_coef(x)),
        &start,
        0.5,
        cfg.tolerance,
        budget,
    );
    if -v > best_val {
        best_val = -v;
        best = to_coef(&x);
    }

    let no_focus_gain = best_val <= contrast_before;
    let polynomial = if no_focus_gain {
        PhasePolynomial::zero(order)
    } else {
        PhasePolynomial { coefficients: best }
    };
    let focused = apply_phase_correction(history, &polynomial);
    Ok(AutofocusResult {
        polynomial,
        focused,
        contrast_before,
        contrast_after: best_val.max(contrast_before),
        no_focus_gain,
        evaluations: obj.evaluations,
    })
}

/// Minimizes `f` from `start` with an axis-aligned initial simplex of size
/// `step`. Stops when the relative spread of simplex values is below `ftol`
/// and the simplex has collapsed below 1e-3 of the initial size, or after
/// `max_evals` evaluations.
fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> f64,
    start: &[f64],
    step: f64,
    ftol: f64,
    max_evals: usize,
) -> (Vec<f64>, f64) {
    let n = start.len();
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += step;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();
    let mut evals = n + 1;
    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
    };
    while evals < max_evals {
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        values = idx.iter().map(|&i| values[i]).collect();

        let spread = (values[n] - values[0]).abs() / values[0].abs().max(1e-300);
        let size = simplex[1..]
            .iter()
            .map(|p| p.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread < ftol && size < 1e-3 * step {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|p| p[j]).sum::<f64>() / n as f64)
            .collect();
        let reflected = lerp(&centroid, &simplex[n], -1.0);
        let fr = f(&reflected);
        evals += 1;
        if fr < values[0] {
            let expanded = lerp(&centroid, &simplex[n], -2.0);
            let fe = f(&expanded);
            evals += 1;
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
        } else {
            let (target, ft) = if fr < values[n] { (reflected, fr) } else { (simplex[n].clone(), values[n]) };
            let contracted = lerp(&centroid, &target, 0.5);
            let fc = f(&contracted);
            evals += 1;
            if fc < ft {
                simplex[n] = contracted;
                values[n] = fc;
            } else {
                for i in 1..=n {
                    simplex[i] = lerp(&simplex[0], &simplex[i], 0.5);
                    values[i] = f(&simplex[i]);
                }
                evals += n;
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    (simplex[best].clone(), values[best])
}
