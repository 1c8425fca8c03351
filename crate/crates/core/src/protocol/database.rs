//! Challenge-response database and its on-disk document.
//!
//! The document is JSON:
//!
//! ```text
//! {
//!   "format": "qsa-crp-database",
//!   "version": 1,
//!   "key_id": "haar-unitary:k1100:seed1",
//!   "modes": 1100,
//!   "records": [
//!     { "challenge": "0110…", "mask": "3fa2…", "expected_gamma_sq": 0.7851… }
//!   ]
//! }
//! ```
//!
//! `challenge` holds one `0`/`1` character per mode; `mask` holds one
//! four-digit lowercase hex word per mode, the phase in units of `2π/65536`.
//! Masks are already on that grid in memory, so a round trip is exact.

use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{QsaError, Result};
use crate::optics::{BinaryPhaseChallenge, PhaseMask};

pub const DATABASE_FORMAT: &str = "qsa-crp-database";
pub const DATABASE_VERSION: u32 = 1;

/// One enrolled challenge with its decode mask.
#[derive(Debug, Clone, PartialEq)]
pub struct ChallengeResponseRecord {
    pub challenge: BinaryPhaseChallenge,
    pub decode_mask: PhaseMask,
    /// Pinhole fraction the true key produces with this record.
    pub expected_gamma_sq: f64,
}

impl ChallengeResponseRecord {
    pub fn modes(&self) -> usize {
        self.challenge.modes()
    }
}

/// Immutable set of records enrolled from one key.
#[derive(Debug, Clone, PartialEq)]
pub struct Database {
    key_id: String,
    modes: usize,
    records: Vec<ChallengeResponseRecord>,
}

#[derive(Serialize, Deserialize)]
struct RecordDoc {
    challenge: String,
    mask: String,
    expected_gamma_sq: f64,
}

#[derive(Serialize, Deserialize)]
struct DatabaseDoc {
    format: String,
    version: u32,
    key_id: String,
    modes: usize,
    records: Vec<RecordDoc>,
}

fn encode_mask(mask: &PhaseMask) -> String {
    let mut s = String::with_capacity(mask.modes() * 4);
    for code in mask.codes() {
        write!(s, "{code:04x}").expect("writing to a String");
    }
    s
}

fn decode_mask(hex: &str) -> Result<PhaseMask> {
    if !hex.is_ascii() || !hex.len().is_multiple_of(4) {
        return Err(QsaError::Format(
            "mask length is not a multiple of 4 hex digits".into(),
        ));
    }
    let codes = (0..hex.len() / 4)
        .map(|i| {
            u16::from_str_radix(&hex[4 * i..4 * i + 4], 16).map_err(|e| {
                QsaError::Format(format!("bad mask word {:?}: {e}", &hex[4 * i..4 * i + 4]))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    PhaseMask::from_codes(&codes)
}

impl Database {
    pub fn new(
        key_id: impl Into<String>,
        modes: usize,
        records: Vec<ChallengeResponseRecord>,
    ) -> Result<Self> {
        if modes == 0 {
            return Err(QsaError::InvalidDimension(0));
        }
        for r in &records {
            for found in [r.challenge.modes(), r.decode_mask.modes()] {
                if found != modes {
                    return Err(QsaError::DimensionMismatch {
                        expected: modes,
                        found,
                    });
                }
            }
        }
        Ok(Database {
            key_id: key_id.into(),
            modes,
            records,
        })
    }

    pub fn key_id(&self) -> &str {
        &self.key_id
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn records(&self) -> &[ChallengeResponseRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Mean `expected_gamma_sq` over the records (zero when empty).
    pub fn mean_expected_gamma_sq(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records
            .iter()
            .map(|r| r.expected_gamma_sq)
            .sum::<f64>()
            / self.records.len() as f64
    }

    pub fn to_json(&self) -> String {
        let doc = DatabaseDoc {
            format: DATABASE_FORMAT.to_string(),
            version: DATABASE_VERSION,
            key_id: self.key_id.clone(),
            modes: self.modes,
            records: self
                .records
                .iter()
                .map(|r| RecordDoc {
                    challenge: r.challenge.to_bit_string(),
                    mask: encode_mask(&r.decode_mask),
                    expected_gamma_sq: r.expected_gamma_sq,
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("database serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: DatabaseDoc =
            serde_json::from_str(text).map_err(|e| QsaError::Format(e.to_string()))?;
        if doc.format != DATABASE_FORMAT {
            return Err(QsaError::Format(format!("unknown format {:?}", doc.format)));
        }
        if doc.version != DATABASE_VERSION {
            return Err(QsaError::Format(format!(
                "unsupported version {}",
                doc.version
            )));
        }
        let records = doc
            .records
            .into_iter()
            .map(|r| {
                // Non-unitary keys can exceed one.
                if !(r.expected_gamma_sq >= 0.0 && r.expected_gamma_sq.is_finite()) {
                    return Err(QsaError::Format(format!(
                        "expected_gamma_sq {} is not a finite non-negative number",
                        r.expected_gamma_sq
                    )));
                }
                Ok(ChallengeResponseRecord {
                    challenge: BinaryPhaseChallenge::from_bit_string(&r.challenge)?,
                    decode_mask: decode_mask(&r.mask)?,
                    expected_gamma_sq: r.expected_gamma_sq,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Database::new(doc.key_id, doc.modes, records)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(self.to_json().as_bytes())
    }

    pub fn read_from<R: Read>(mut r: R) -> std::io::Result<Result<Self>> {
        let mut text = String::new();
        r.read_to_string(&mut text)?;
        Ok(Self::from_json(&text))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{sample_key, KeyModel};
    use crate::protocol::enroll;

    #[test]
    fn round_trip_is_exact() {
        let key = sample_key(2, 24, KeyModel::HaarUnitary).unwrap();
        let db = enroll(&key, 6, 3).unwrap();
        let back = Database::from_json(&db.to_json()).unwrap();
        assert_eq!(back, db);
        assert_eq!(back.to_json(), db.to_json());
    }

    #[test]
    fn rejects_wrong_version_and_format() {
        let key = sample_key(2, 4, KeyModel::HaarUnitary).unwrap();
        let text = enroll(&key, 1, 3).unwrap().to_json();
        let v2 = text.replace("\"version\": 1", "\"version\": 2");
        assert!(matches!(Database::from_json(&v2), Err(QsaError::Format(_))));
        let other = text.replace(DATABASE_FORMAT, "something-else");
        assert!(matches!(
            Database::from_json(&other),
            Err(QsaError::Format(_))
        ));
        assert!(Database::from_json("{").is_err());
    }

    #[test]
    fn rejects_inconsistent_dimensions() {
        let key = sample_key(2, 4, KeyModel::HaarUnitary).unwrap();
        let text = enroll(&key, 1, 3).unwrap().to_json();
        let bad = text.replace("\"modes\": 4", "\"modes\": 5");
        assert!(matches!(
            Database::from_json(&bad),
            Err(QsaError::DimensionMismatch {
                expected: 5,
                found: 4
            })
        ));
    }

    #[test]
    fn mask_hex_encoding() {
        let m = PhaseMask::from_codes(&[0, 1, 0xffff, 0x1234]).unwrap();
        assert_eq!(encode_mask(&m), "00000001ffff1234");
        assert_eq!(decode_mask("00000001ffff1234").unwrap(), m);
        assert!(decode_mask("000").is_err());
        assert!(decode_mask("zzzz").is_err());
    }
}
