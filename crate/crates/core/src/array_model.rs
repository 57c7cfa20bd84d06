//! Antenna geometry of the 48-element demonstrator and its steering vectors.
//!
//! The aperture is a 12 x 4 grid (azimuth x elevation) at half-wavelength
//! pitch, partitioned into six 2 x 4 subarrays that tile the azimuth axis.
//! Each subarray is summed in analog and digitized as one receive channel, so
//! all digital processing downstream works on 6-vectors and in azimuth only.
//!
//! Subarray outputs are divided by the element count, which makes the
//! broadside subarray steering vector all-ones.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::beamforming::BeamformerWeights;
use crate::{Error, Result};

/// Number of digitized receive channels.
pub const N_CHANNELS: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    pub wavelength: f64,
    pub element_pitch: f64,
    pub n_az: usize,
    pub n_el: usize,
    /// (azimuth count, elevation count) of one subarray.
    pub subarray_shape: (usize, usize),
    /// Element positions (x, y) in meters, x along azimuth.
    pub element_positions: Vec<(f64, f64)>,
    /// Element index -> subarray index.
    pub subarray_map: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteeringLevel {
    Element,
    Subarray,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub level: SteeringLevel,
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    pub values: Vec<Complex64>,
}

impl SteeringVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl ArrayGeometry {
    /// The demonstrator layout: 12 x 4 elements at lambda/2, six 2 x 4 subarrays.
    pub fn demonstrator(wavelength: f64) -> Result<Self> {
        Self::new(wavelength, 12, 4, (2, 4))
    }

    /// Rectangular grid centred on the origin with half-wavelength pitch.
    ///
    /// Element `k = i * n_el + j` sits at azimuth column `i` and elevation row
    /// `j`; subarrays are contiguous blocks of `subarray_shape.0` columns that
    /// span the full elevation extent.
    pub fn new(
        wavelength: f64,
        n_az: usize,
        n_el: usize,
        subarray_shape: (usize, usize),
    ) -> Result<Self> {
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::Domain(format!("wavelength must be positive, got {wavelength}")));
        }
        let (sa_az, sa_el) = subarray_shape;
        if sa_az == 0 || !n_az.is_multiple_of(sa_az) || sa_el != n_el {
            return Err(Error::Domain(format!(
                "subarray shape {sa_az}x{sa_el} does not tile a {n_az}x{n_el} grid along azimuth"
            )));
        }
        let pitch = wavelength / 2.0;
        let x0 = (n_az as f64 - 1.0) / 2.0;
        let y0 = (n_el as f64 - 1.0) / 2.0;
        let mut element_positions = Vec::with_capacity(n_az * n_el);
        let mut subarray_map = Vec::with_capacity(n_az * n_el);
        for i in 0..n_az {
            for j in 0..n_el {
                element_positions.push(((i as f64 - x0) * pitch, (j as f64 - y0) * pitch));
                subarray_map.push(i / sa_az);
            }
        }
        Ok(Self {
            wavelength,
            element_pitch: pitch,
            n_az,
            n_el,
            subarray_shape,
            element_positions,
            subarray_map,
        })
    }

    pub fn n_elements(&self) -> usize {
        self.element_positions.len()
    }

    pub fn n_subarrays(&self) -> usize {
        self.n_az / self.subarray_shape.0
    }

    fn elements_per_subarray(&self) -> usize {
        self.subarray_shape.0 * self.subarray_shape.1
    }

    /// Mean element position of each subarray.
    pub fn subarray_phase_centers(&self) -> Vec<(f64, f64)> {
        let n = self.elements_per_subarray() as f64;
        let mut centers = vec![(0.0, 0.0); self.n_subarrays()];
        for (&(x, y), &s) in self.element_positions.iter().zip(&self.subarray_map) {
            centers[s].0 += x / n;
            centers[s].1 += y / n;
        }
        centers
    }

    /// Plane-wave response of every element.
    pub fn element_steering(&self, az_deg: f64, el_deg: f64) -> Result<SteeringVector> {
        check_angle("azimuth", az_deg)?;
        check_angle("elevation", el_deg)?;
        let k = 2.0 * PI / self.wavelength;
        let (az, el) = (az_deg.to_radians(), el_deg.to_radians());
        let (ux, uy) = (az.sin() * el.cos(), el.sin());
        let values = self
            .element_positions
            .iter()
            .map(|&(x, y)| Complex64::from_polar(1.0, k * (x * ux + y * uy)))
            .collect();
        Ok(SteeringVector {
            level: SteeringLevel::Element,
            azimuth_deg: az_deg,
            elevation_deg: el_deg,
            values,
        })
    }

    /// Channel-level response: element responses averaged within each subarray.
    pub fn subarray_steering(&self, az_deg: f64, el_deg: f64) -> Result<SteeringVector> {
        let elements = self.element_steering(az_deg, el_deg)?;
        let n = self.elements_per_subarray() as f64;
        let mut values = vec![Complex64::new(0.0, 0.0); self.n_subarrays()];
        for (v, &s) in elements.values.iter().zip(&self.subarray_map) {
            values[s] += v / n;
        }
        Ok(SteeringVector {
            level: SteeringLevel::Subarray,
            azimuth_deg: az_deg,
            elevation_deg: el_deg,
            values,
        })
    }

    /// Complex response `w^H v(az)` of weights at the subarray (length 6) or
    /// element (length 48) level, at zero elevation.
    pub fn response(&self, weights: &[Complex64], az_deg: f64) -> Result<Complex64> {
        let v = if weights.len() == self.n_subarrays() {
            self.subarray_steering(az_deg, 0.0)?
        } else if weights.len() == self.n_elements() {
            self.element_steering(az_deg, 0.0)?
        } else {
            return Err(Error::Contract(format!(
                "weight length {} matches neither {} subarrays nor {} elements",
                weights.len(),
                self.n_subarrays(),
                self.n_elements()
            )));
        };
        Ok(hdot(weights, &v.values))
    }

    /// Beam pattern `|w^H v(az)|^2` in dB, normalized so the grid maximum is 0 dB.
    pub fn beampattern(&self, weights: &BeamformerWeights, az_grid: &[f64]) -> Result<Vec<f64>> {
        let power = self.pattern_power(&weights.values, az_grid)?;
        let peak = power.iter().cloned().fold(0.0_f64, f64::max);
        if peak <= 0.0 {
            return Err(Error::Numerical("beam pattern is identically zero".into()));
        }
        Ok(power.iter().map(|p| 10.0 * (p / peak).log10()).collect())
    }

    /// Linear, unnormalized pattern power on a grid.
    pub fn pattern_power(&self, weights: &[Complex64], az_grid: &[f64]) -> Result<Vec<f64>> {
        if az_grid.is_empty() {
            return Err(Error::Contract("empty azimuth grid".into()));
        }
        az_grid
            .iter()
            .map(|&az| self.response(weights, az).map(|r| r.norm_sqr()))
            .collect()
    }
}

/// `a^H b`.
pub fn hdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn check_angle(name: &str, deg: f64) -> Result<()> {
    if deg.is_finite() && deg.abs() < 90.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} {deg} deg outside (-90, 90)")))
    }
}
