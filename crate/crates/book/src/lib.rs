//! The guide's chapters, compiled so that every listing runs as a doctest.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/array.md")]
pub mod array {}

#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}

#[doc = include_str!("../../../book/src/range_doppler.md")]
pub mod range_doppler {}

#[doc = include_str!("../../../book/src/beamforming.md")]
pub mod beamforming {}

#[doc = include_str!("../../../book/src/detection_doa.md")]
pub mod detection_doa {}

#[doc = include_str!("../../../book/src/isar.md")]
pub mod isar {}

#[doc = include_str!("../../../book/src/harness.md")]
pub mod harness {}

#[doc = include_str!("../../../book/src/file_formats.md")]
pub mod file_formats {}
