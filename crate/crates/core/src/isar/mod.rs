//! Inverse synthetic aperture imaging of a rotating target.
//!
//! The chain is: extract the compressed, beamformed range profiles of the
//! target across consecutive dwells ([`extract_target_history`]), remove the
//! range walk ([`range_align`]), estimate and remove residual polynomial
//! phase by maximizing image contrast ([`icba_autofocus`]), transform slow
//! time to Doppler ([`form_image`]) and finally map Doppler to cross-range
//! with a rotation rate ([`cross_range_scale`]).

mod align;
mod autofocus;
mod history;
mod image;

pub use align::{range_align, shift_profile, Alignment};
pub use autofocus::{
    apply_phase_correction, icba_autofocus, image_contrast, AutofocusConfig, AutofocusResult,
    PhasePolynomial,
};
pub use history::{extract_target_history, RangeProfileHistory};
pub use image::{cross_range_scale, find_scatterers, form_image, IsarImage, ScattererPeak};
