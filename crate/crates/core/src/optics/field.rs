use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;

use crate::error::{QsaError, Result};

/// Tolerance on `Σ|aᵢ|² = 1` for a field to count as normalized.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Number of phase levels of a stored decode mask (16-bit fixed point over `[0, 2π)`).
pub const PHASE_LEVELS: u32 = 1 << 16;

/// Binary 0/π phase pattern written on the challenge modulator, one bit per mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryPhaseChallenge {
    bits: Vec<bool>,
}

impl BinaryPhaseChallenge {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(QsaError::InvalidDimension(0));
        }
        Ok(BinaryPhaseChallenge { bits })
    }

    /// Uniformly random challenge over all `2^K` patterns.
    pub fn random<R: Rng + ?Sized>(modes: usize, rng: &mut R) -> Result<Self> {
        Self::new((0..modes).map(|_| rng.random::<bool>()).collect())
    }

    /// Parses a string of `'0'`/`'1'` characters.
    pub fn from_bit_string(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(QsaError::Format(format!("invalid challenge bit {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(bits)
    }

    pub fn to_bit_string(&self) -> String {
        self.bits
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn modes(&self) -> usize {
        self.bits.len()
    }

    /// Copy with the bits at `indices` inverted.
    pub fn with_flipped(&self, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut bits = self.bits.clone();
        for i in indices {
            bits[i] = !bits[i];
        }
        BinaryPhaseChallenge { bits }
    }
}

/// Complex amplitudes of a shaped wavefront over K modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeField {
    amplitudes: Vec<Complex64>,
    normalized: bool,
}

impl ModeField {
    /// Wraps `amplitudes`; the normalized flag is set when the squared norm is
    /// within [`NORM_TOLERANCE`] of one.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(QsaError::InvalidDimension(0));
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        Ok(ModeField {
            amplitudes,
            normalized: (norm_sq - 1.0).abs() <= NORM_TOLERANCE,
        })
    }

    /// Rescales to unit norm; a zero vector is rejected.
    pub fn unit(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(QsaError::NotNormalized {
                norm_sq: norm * norm,
            });
        }
        Self::new(amplitudes.into_iter().map(|a| a / norm).collect())
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn modes(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Per-mode intensities `|aᵢ|²`.
    pub fn intensities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Per-mode phase shifts of the decoding modulator, each in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMask {
    phases: Vec<f64>,
}

fn wrap_phase(p: f64) -> f64 {
    let w = p.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

impl PhaseMask {
    /// Builds a mask, wrapping every phase into `[0, 2π)`.
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if phases.is_empty() {
            return Err(QsaError::InvalidDimension(0));
        }
        if let Some(bad) = phases.iter().find(|p| !p.is_finite()) {
            return Err(QsaError::invalid(
                "phase",
                format!("non-finite value {bad}"),
            ));
        }
        Ok(PhaseMask {
            phases: phases.into_iter().map(wrap_phase).collect(),
        })
    }

    pub fn zeros(modes: usize) -> Result<Self> {
        Self::new(vec![0.0; modes])
    }

    /// Uniformly random 16-bit quantized mask.
    pub fn random<R: Rng + ?Sized>(modes: usize, rng: &mut R) -> Result<Self> {
        Self::from_codes(&(0..modes).map(|_| rng.random::<u16>()).collect::<Vec<_>>())
    }

    /// Mask from 16-bit fixed-point codes, phase = `code · 2π / 65536`.
    pub fn from_codes(codes: &[u16]) -> Result<Self> {
        Self::new(
            codes
                .iter()
                .map(|&c| c as f64 * TAU / PHASE_LEVELS as f64)
                .collect(),
        )
    }

    /// Nearest 16-bit fixed-point codes (2π wraps to 0).
    pub fn codes(&self) -> Vec<u16> {
        self.phases
            .iter()
            .map(|p| ((p / TAU * PHASE_LEVELS as f64).round() as u32 % PHASE_LEVELS) as u16)
            .collect()
    }

    /// The mask rounded to the 16-bit grid the database stores.
    pub fn quantized(&self) -> Self {
        Self::from_codes(&self.codes()).expect("non-empty mask")
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn modes(&self) -> usize {
        self.phases.len()
    }

    /// Elementwise sum of phases, wrapped.
    pub fn compose(&self, other: &PhaseMask) -> Result<Self> {
        check_dims(self.modes(), other.modes())?;
        Self::new(
            self.phases
                .iter()
                .zip(&other.phases)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

/// Split of field power between the pinhole mode and everything else.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocusResult {
    pub gamma_sq: f64,
    pub out_of_pinhole: f64,
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(QsaError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Field launched by the challenge modulator: `±1/√K` per mode.
pub fn challenge_field(challenge: &BinaryPhaseChallenge) -> ModeField {
    let amp = 1.0 / (challenge.modes() as f64).sqrt();
    let amplitudes = challenge
        .bits()
        .iter()
        .map(|&b| Complex64::new(if b { -amp } else { amp }, 0.0))
        .collect();
    ModeField {
        amplitudes,
        normalized: true,
    }
}

/// Phases that flatten `response`: `−arg(aᵢ) mod 2π`, zero for vanishing modes.
pub fn conjugate_mask(response: &ModeField) -> PhaseMask {
    PhaseMask {
        phases: response
            .amplitudes()
            .iter()
            .map(|a| {
                if *a == Complex64::new(0.0, 0.0) {
                    0.0
                } else {
                    wrap_phase(-a.arg())
                }
            })
            .collect(),
    }
}

/// Multiplies each mode by `e^{iθᵢ}`.
pub fn apply_mask(mask: &PhaseMask, field: &ModeField) -> Result<ModeField> {
    check_dims(mask.modes(), field.modes())?;
    let amplitudes = field
        .amplitudes()
        .iter()
        .zip(mask.phases())
        .map(|(a, &p)| a * Complex64::from_polar(1.0, p))
        .collect();
    ModeField::new(amplitudes)
}

/// Power coupled into the flat (plane-wave) mode behind the lens and pinhole,
/// `|Σᵢ aᵢ/√K|²`, for a field of any norm.
pub fn pinhole_power(field: &ModeField) -> FocusResult {
    let k = field.modes() as f64;
    let sum: Complex64 = field.amplitudes().iter().sum();
    let gamma_sq = sum.norm_sqr() / k;
    FocusResult {
        gamma_sq,
        out_of_pinhole: (field.norm_sqr() - gamma_sq).max(0.0),
    }
}

/// Fraction of a unit-norm field's power that passes the pinhole.
pub fn focus_overlap(field: &ModeField) -> Result<FocusResult> {
    if !field.is_normalized() {
        return Err(QsaError::NotNormalized {
            norm_sq: field.norm_sqr(),
        });
    }
    let raw = pinhole_power(field);
    let gamma_sq = raw.gamma_sq.clamp(0.0, 1.0);
    Ok(FocusResult {
        gamma_sq,
        out_of_pinhole: 1.0 - gamma_sq,
    })
}

/// `C₀ · C₁ = Σᵢ C₀ᵢ* C₁ᵢ`.
pub fn inner_product(c0: &ModeField, c1: &ModeField) -> Result<Complex64> {
    check_dims(c0.modes(), c1.modes())?;
    Ok(c0
        .amplitudes()
        .iter()
        .zip(c1.amplitudes())
        .map(|(a, b)| a.conj() * b)
        .sum())
}

/// Mean pinhole fraction of phase-only conjugation of a uniformly random unit
/// response in K modes: `π/4 + (1 − π/4)/K`.
pub fn expected_conjugation_efficiency(modes: usize) -> f64 {
    let quarter_pi = PI / 4.0;
    quarter_pi + (1.0 - quarter_pi) / modes as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::rng_from_seed;

    fn bits(v: &[u8]) -> BinaryPhaseChallenge {
        BinaryPhaseChallenge::new(v.iter().map(|&b| b == 1).collect()).unwrap()
    }

    #[test]
    fn empty_challenge_rejected() {
        assert_eq!(
            BinaryPhaseChallenge::new(vec![]),
            Err(QsaError::InvalidDimension(0))
        );
    }

    #[test]
    fn challenge_field_sign_map() {
        let f = challenge_field(&bits(&[0, 0, 0, 0]));
        assert!(f
            .amplitudes()
            .iter()
            .all(|a| *a == Complex64::new(0.5, 0.0)));
        let f = challenge_field(&bits(&[0, 1, 0, 1]));
        let re: Vec<f64> = f.amplitudes().iter().map(|a| a.re).collect();
        assert_eq!(re, vec![0.5, -0.5, 0.5, -0.5]);
        assert!(f.is_normalized());
    }

    #[test]
    fn bit_string_round_trip() {
        let c = BinaryPhaseChallenge::random(37, &mut rng_from_seed(1)).unwrap();
        assert_eq!(
            BinaryPhaseChallenge::from_bit_string(&c.to_bit_string()).unwrap(),
            c
        );
        assert!(BinaryPhaseChallenge::from_bit_string("01x").is_err());
    }

    #[test]
    fn conjugate_mask_of_imaginary_unit() {
        let f = ModeField::new(vec![Complex64::new(0.0, 1.0)]).unwrap();
        let m = conjugate_mask(&f);
        assert!((m.phases()[0] - 3.0 * PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn conjugate_mask_of_real_positive_field_is_flat() {
        let f = ModeField::unit(vec![Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)]).unwrap();
        assert!(conjugate_mask(&f).phases().iter().all(|&p| p == 0.0));
    }

    #[test]
    fn zero_amplitude_gets_zero_phase() {
        let f = ModeField::new(vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, -1.0)]).unwrap();
        let m = conjugate_mask(&f);
        assert_eq!(m.phases()[0], 0.0);
        assert!((m.phases()[1] - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_mask_is_identity() {
        let f =
            ModeField::unit(vec![Complex64::new(0.3, -0.2), Complex64::new(-1.0, 0.7)]).unwrap();
        assert_eq!(apply_mask(&PhaseMask::zeros(2).unwrap(), &f).unwrap(), f);
    }

    #[test]
    fn mask_dimension_mismatch() {
        let f = challenge_field(&bits(&[0, 1]));
        assert_eq!(
            apply_mask(&PhaseMask::zeros(3).unwrap(), &f),
            Err(QsaError::DimensionMismatch {
                expected: 3,
                found: 2
            })
        );
    }

    #[test]
    fn flat_field_focuses_fully() {
        let f = challenge_field(&bits(&[0; 16]));
        let r = focus_overlap(&f).unwrap();
        assert!((r.gamma_sq - 1.0).abs() < 1e-12);
        assert!(r.out_of_pinhole.abs() < 1e-12);
    }

    #[test]
    fn balanced_challenge_misses_pinhole() {
        let pattern: Vec<u8> = (0..16).map(|i| (i % 2) as u8).collect();
        let r = focus_overlap(&challenge_field(&bits(&pattern))).unwrap();
        assert!(r.gamma_sq.abs() < 1e-15);
        assert!((r.gamma_sq + r.out_of_pinhole - 1.0).abs() < 1e-9);
    }

    #[test]
    fn focus_rejects_unnormalized() {
        let f = ModeField::new(vec![Complex64::new(2.0, 0.0)]).unwrap();
        assert!(matches!(
            focus_overlap(&f),
            Err(QsaError::NotNormalized { .. })
        ));
    }

    #[test]
    fn inner_products_of_small_challenges() {
        let a = challenge_field(&bits(&[0, 0, 0, 0]));
        let b = challenge_field(&bits(&[0, 1, 0, 1]));
        assert!((inner_product(&a, &a).unwrap() - 1.0).norm() < 1e-15);
        assert!(inner_product(&a, &b).unwrap().norm() < 1e-15);
        let c = challenge_field(&bits(&[0, 1, 0]));
        assert!(inner_product(&a, &c).is_err());
    }

    #[test]
    fn inner_product_is_conjugate_linear_in_first_argument() {
        let a = ModeField::new(vec![Complex64::new(0.0, 1.0)]).unwrap();
        let b = ModeField::new(vec![Complex64::new(1.0, 0.0)]).unwrap();
        assert!((inner_product(&a, &b).unwrap() - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn mask_codes_round_trip_exactly() {
        let m = PhaseMask::random(50, &mut rng_from_seed(9)).unwrap();
        assert_eq!(PhaseMask::from_codes(&m.codes()).unwrap(), m);
        assert_eq!(m.quantized(), m);
    }

    #[test]
    fn quantization_error_is_half_a_level() {
        let m = PhaseMask::new(vec![0.1, 1.0, 3.0, 6.2]).unwrap();
        for (a, b) in m.phases().iter().zip(m.quantized().phases()) {
            let d = (a - b).abs().min(TAU - (a - b).abs());
            assert!(d <= PI / PHASE_LEVELS as f64 + 1e-15);
        }
    }

    #[test]
    fn expected_efficiency_limits() {
        assert_eq!(expected_conjugation_efficiency(1), 1.0);
        assert!((expected_conjugation_efficiency(1_000_000) - PI / 4.0).abs() < 1e-6);
    }
}
