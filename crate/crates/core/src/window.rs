//! Slow-time taper windows.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Rectangular,
    #[default]
    Hann,
    Hamming,
}

impl WindowKind {
    /// Periodic window of length `n`, scaled to unit mean power (sum of
    /// squares equals `n`), so white noise keeps its power through a unitary
    /// transform.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..n)
            .map(|i| {
                let x = 2.0 * PI * i as f64 / n as f64;
                match self {
                    WindowKind::Rectangular => 1.0,
                    WindowKind::Hann => 0.5 - 0.5 * x.cos(),
                    WindowKind::Hamming => 0.54 - 0.46 * x.cos(),
                }
            })
            .collect();
        let energy: f64 = raw.iter().map(|w| w * w).sum();
        let scale = (n as f64 / energy).sqrt();
        raw.into_iter().map(|w| w * scale).collect()
    }

    /// Peak power gain relative to a rectangular window of the same length
    /// for a bin-centred tone (1 for rectangular, about -1.76 dB for Hann).
    pub fn coherent_loss(self, n: usize) -> f64 {
        let w = self.coefficients(n);
        let s: f64 = w.iter().sum();
        s * s / (n as f64 * n as f64)
    }
}

impl fmt::Display for WindowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            WindowKind::Rectangular => "rectangular",
            WindowKind::Hann => "hann",
            WindowKind::Hamming => "hamming",
        };
        f.write_str(s)
    }
}

impl FromStr for WindowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rectangular" | "rect" | "none" => Ok(WindowKind::Rectangular),
            "hann" | "hanning" => Ok(WindowKind::Hann),
            "hamming" => Ok(WindowKind::Hamming),
            other => Err(Error::Config(format!("unknown window '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_mean_power() {
        for kind in [WindowKind::Rectangular, WindowKind::Hann, WindowKind::Hamming] {
            let w = kind.coefficients(128);
            let e: f64 = w.iter().map(|x| x * x).sum();
            assert!((e - 128.0).abs() < 1e-9);
        }
    }

    #[test]
    fn hann_loss() {
        let db = 10.0 * WindowKind::Hann.coherent_loss(128).log10();
        assert!((db + 1.76).abs() < 0.01, "{db}");
        assert_eq!(WindowKind::Rectangular.coherent_loss(64), 1.0);
    }

    #[test]
    fn parse_names() {
        assert_eq!("Hann".parse::<WindowKind>().unwrap(), WindowKind::Hann);
        assert!(matches!("kaiser".parse::<WindowKind>(), Err(Error::Config(_))));
    }
}
