use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::field::{check_dims, ModeField};
use super::matrix::CMatrix;
use crate::error::{QsaError, Result};
use crate::seeding::rng_from_seed;

/// Statistical model of the scattering medium's transmission matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum KeyModel {
    /// Lossless scattering: Haar-random unitary.
    #[default]
    HaarUnitary,
    /// Lossy medium: i.i.d. circular complex normal entries of variance `1/K`.
    ComplexGaussian,
}

impl fmt::Display for KeyModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KeyModel::HaarUnitary => "haar-unitary",
            KeyModel::ComplexGaussian => "complex-gaussian",
        })
    }
}

impl FromStr for KeyModel {
    type Err = QsaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "haar-unitary" | "haar" => Ok(KeyModel::HaarUnitary),
            "complex-gaussian" | "gaussian" => Ok(KeyModel::ComplexGaussian),
            other => Err(QsaError::invalid(
                "key model",
                format!("unknown model {other:?}"),
            )),
        }
    }
}

/// A scattering key: a K×K complex transmission matrix fixed by `(seed, K, model)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringKey {
    matrix: CMatrix,
    seed: u64,
    model: KeyModel,
}

impl ScatteringKey {
    /// Key with an explicitly given matrix (seed recorded as 0).
    pub fn from_matrix(matrix: CMatrix, model: KeyModel) -> Result<Self> {
        if matrix.dim() == 0 {
            return Err(QsaError::InvalidDimension(0));
        }
        Ok(ScatteringKey {
            matrix,
            seed: 0,
            model,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn model(&self) -> KeyModel {
        self.model
    }

    pub fn modes(&self) -> usize {
        self.matrix.dim()
    }

    /// Stable identifier derived from the generating parameters.
    pub fn id(&self) -> String {
        format!("{}:k{}:seed{}", self.model, self.modes(), self.seed)
    }
}

/// Manufactures a key deterministically from `(seed, modes, model)`.
pub fn sample_key(seed: u64, modes: usize, model: KeyModel) -> Result<ScatteringKey> {
    if modes == 0 {
        return Err(QsaError::InvalidDimension(0));
    }
    let mut rng = rng_from_seed(seed);
    let matrix = match model {
        KeyModel::HaarUnitary => CMatrix::haar_unitary(modes, &mut rng),
        KeyModel::ComplexGaussian => CMatrix::complex_gaussian(modes, 1.0 / modes as f64, &mut rng),
    };
    Ok(ScatteringKey {
        matrix,
        seed,
        model,
    })
}

/// Response of the key to an incident field: `M · field`.
pub fn propagate(key: &ScatteringKey, field: &ModeField) -> Result<ModeField> {
    check_dims(key.modes(), field.modes())?;
    ModeField::new(key.matrix.mul_vec(field.amplitudes()))
}

/// Responses to a batch of fields; identical to mapping [`propagate`].
pub fn propagate_many(key: &ScatteringKey, fields: &[ModeField]) -> Result<Vec<ModeField>> {
    for f in fields {
        check_dims(key.modes(), f.modes())?;
    }
    let xs: Vec<&[num_complex::Complex64]> = fields.iter().map(|f| f.amplitudes()).collect();
    key.matrix
        .mul_many(&xs)
        .into_iter()
        .map(ModeField::new)
        .collect()
}

/// `M† · field`, the inverse map of a unitary key.
pub fn propagate_adjoint(key: &ScatteringKey, field: &ModeField) -> Result<ModeField> {
    check_dims(key.modes(), field.modes())?;
    ModeField::new(key.matrix.adjoint_mul_vec(field.amplitudes()))
}
