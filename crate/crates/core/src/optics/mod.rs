//! Linear-algebra model of the optical readout chain.
//!
//! A challenge is a binary 0/π phase pattern over K modes. The key maps it to
//! a speckle response through its transmission matrix; the decoding modulator
//! multiplies the response by the conjugate of the enrolled response phases,
//! and the lens plus pinhole keep only the flat-mode component.

mod field;
mod key;
mod matrix;

pub use field::{
    apply_mask, challenge_field, conjugate_mask, expected_conjugation_efficiency, focus_overlap,
    inner_product, pinhole_power, BinaryPhaseChallenge, FocusResult, ModeField, PhaseMask,
    NORM_TOLERANCE, PHASE_LEVELS,
};
pub use key::{propagate, propagate_adjoint, propagate_many, sample_key, KeyModel, ScatteringKey};
pub use matrix::CMatrix;

/// Pinhole fraction obtained by sending `challenge` into `key` and decoding the
/// response with `mask`.
pub fn decode_gamma_sq(
    key: &ScatteringKey,
    challenge: &ModeField,
    mask: &PhaseMask,
) -> crate::Result<f64> {
    let response = propagate(key, challenge)?;
    Ok(pinhole_power(&apply_mask(mask, &response)?).gamma_sq)
}
