//! JSON description of a stochastic-task strategy.
//!
//! ```json
//! { "n": 3,
//!   "state": { "kind": "isotropic", "visibility": 0.9 },
//!   "encodings": { "kind": "dense-coding" },
//!   "measurements": { "kind": "product" } }
//! ```
//!
//! Every part also has an `explicit` form holding row-major matrices as
//! separate real and imaginary arrays.

use std::path::Path;

use densecode::protocol::{encoding_unitary, product_measurement};
use densecode::{ComplexMatrix, DensityOperator, Povm, StochasticProtocol, C64};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixData {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl MatrixData {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            re: m.entries().iter().map(|z| z.re).collect(),
            im: m.entries().iter().map(|z| z.im).collect(),
        }
    }

    pub fn to_matrix(&self) -> CliResult<ComplexMatrix> {
        if self.re.len() != self.im.len() {
            return Err(CliError::Validation(format!(
                "matrix has {} real and {} imaginary entries",
                self.re.len(),
                self.im.len()
            )));
        }
        let data = self
            .re
            .iter()
            .zip(&self.im)
            .map(|(&r, &i)| C64::new(r, i))
            .collect();
        Ok(ComplexMatrix::from_row_major(self.rows, self.cols, data)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StateSpec {
    Ideal,
    Isotropic { visibility: f64 },
    Explicit { matrix: MatrixData },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EncodingSpec {
    #[default]
    DenseCoding,
    /// `unitaries[x1 * n + x2]`.
    Explicit { unitaries: Vec<MatrixData> },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MeasurementSpec {
    #[default]
    Product,
    /// Effects for setting 1 then setting 2.
    Explicit { settings: [Vec<MatrixData>; 2] },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolFile {
    pub n: usize,
    pub state: StateSpec,
    #[serde(default)]
    pub encodings: EncodingSpec,
    #[serde(default)]
    pub measurements: MeasurementSpec,
}

impl ProtocolFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> CliResult<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        Ok((serde_json::from_slice(&bytes)?, bytes))
    }

    pub fn write(&self) -> String {
        serde_json::to_string_pretty(self).expect("protocol files always serialize") + "\n"
    }

    /// Fully explicit description of an existing protocol.
    pub fn from_protocol(p: &StochasticProtocol) -> Self {
        let effects = |m: &Povm| m.effects().iter().map(MatrixData::from_matrix).collect();
        Self {
            n: p.n(),
            state: StateSpec::Explicit {
                matrix: MatrixData::from_matrix(p.shared_state().matrix()),
            },
            encodings: EncodingSpec::Explicit {
                unitaries: p.encodings().iter().map(MatrixData::from_matrix).collect(),
            },
            measurements: MeasurementSpec::Explicit {
                settings: [effects(&p.measurements()[0]), effects(&p.measurements()[1])],
            },
        }
    }

    pub fn to_protocol(&self) -> CliResult<StochasticProtocol> {
        let n = self.n;
        let state = match &self.state {
            StateSpec::Ideal => DensityOperator::isotropic(n, 1.0)?,
            StateSpec::Isotropic { visibility } => DensityOperator::isotropic(n, *visibility)?,
            StateSpec::Explicit { matrix } => DensityOperator::new(matrix.to_matrix()?)?,
        };
        let encodings = match &self.encodings {
            EncodingSpec::DenseCoding => {
                let mut out = Vec::with_capacity(n * n);
                for x1 in 0..n {
                    for x2 in 0..n {
                        out.push(encoding_unitary(n, x1, x2)?);
                    }
                }
                out
            }
            EncodingSpec::Explicit { unitaries } => unitaries
                .iter()
                .map(MatrixData::to_matrix)
                .collect::<CliResult<_>>()?,
        };
        let measurements = match &self.measurements {
            MeasurementSpec::Product => [product_measurement(n, 1)?, product_measurement(n, 2)?],
            MeasurementSpec::Explicit { settings } => {
                let povm = |effects: &Vec<MatrixData>| -> CliResult<Povm> {
                    let m = effects
                        .iter()
                        .map(MatrixData::to_matrix)
                        .collect::<CliResult<_>>()?;
                    Ok(Povm::new(m)?)
                };
                [povm(&settings[0])?, povm(&settings[1])?]
            }
        };
        Ok(StochasticProtocol::new(n, state, encodings, measurements)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compact_form_parses() {
        let f =
            ProtocolFile::parse(r#"{"n": 3, "state": {"kind": "isotropic", "visibility": 0.5}}"#)
                .unwrap();
        assert_eq!(f.encodings, EncodingSpec::DenseCoding);
        assert_eq!(f.measurements, MeasurementSpec::Product);
        assert_eq!(f.to_protocol().unwrap().n(), 3);
    }

    #[test]
    fn explicit_round_trip() {
        let p = densecode::protocol::isotropic_protocol(2, 0.3).unwrap();
        let f = ProtocolFile::from_protocol(&p);
        let back = ProtocolFile::parse(&f.write()).unwrap();
        assert_eq!(back, f);
        let q = back.to_protocol().unwrap();
        assert_eq!(q.shared_state(), p.shared_state());
        assert_eq!(q.encodings(), p.encodings());
    }

    #[test]
    fn rejects_bad_files() {
        assert!(ProtocolFile::parse(r#"{"n": 3}"#).is_err());
        assert!(ProtocolFile::parse(
            r#"{"n": 3, "state": {"kind": "isotropic", "visibility": 2.0}}"#
        )
        .unwrap()
        .to_protocol()
        .is_err());
    }
}
