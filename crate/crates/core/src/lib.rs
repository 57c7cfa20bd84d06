//! Simulation and processing chain for a six-channel subarrayed X-band AESA.
//!
//! The crate covers the whole receive side of a multifunction surveillance
//! radar: synthetic multichannel dwells ([`scene`]), range-Doppler formation
//! ([`rd`]), conventional and MVDR beamforming ([`beamforming`]), CA-CFAR
//! detection ([`detection`]), MUSIC direction finding ([`doa`]) and ISAR
//! imaging with contrast-maximizing autofocus ([`isar`]). The [`harness`]
//! module strings these together into the four trial modes and writes
//! reports.

pub mod array_model;
pub mod beamforming;
pub mod detection;
pub mod doa;
mod error;
pub mod grid;
pub mod harness;
pub mod isar;
pub mod linalg;
pub mod rd;
pub mod scene;
pub mod window;

pub use error::{Error, Result};
