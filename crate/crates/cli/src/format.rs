//! JSON coefficient files. Complex scalars are `[re, im]`, matrices are
//! arrays of rows, and `S_blocks[i][j]` holds `S^i_j`.

use std::collections::BTreeMap;

use nalgebra::Complex;
use qle_core::model::{ModelError, QleCoefficients};
use qle_core::{CMatrix, Tol};
use serde::{Deserialize, Serialize};

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientFile {
    pub dim_system: usize,
    pub dim_noise: usize,
    #[serde(rename = "H")]
    pub h: JsonMatrix,
    #[serde(rename = "L0")]
    pub l0: Vec<JsonMatrix>,
    #[serde(rename = "S_blocks")]
    pub s_blocks: Vec<Vec<JsonMatrix>>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{field}: {message}")]
    Shape { field: String, message: String },
}

pub fn matrix_to_json(m: &CMatrix) -> JsonMatrix {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

/// Reads an `n × n` matrix, naming `field` on shape errors.
pub fn matrix_from_json(field: &str, rows: &JsonMatrix, n: usize) -> Result<CMatrix, FormatError> {
    if rows.len() != n {
        return Err(FormatError::Shape { field: field.into(), message: format!("expected {n} rows, found {}", rows.len()) });
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(FormatError::Shape {
                field: format!("{field}[{i}]"),
                message: format!("expected {n} entries, found {}", row.len()),
            });
        }
    }
    Ok(CMatrix::from_fn(n, n, |i, j| Complex::new(rows[i][j][0], rows[i][j][1])))
}

impl CoefficientFile {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let file: CoefficientFile = serde_json::from_str(text)?;
        file.check_shapes()?;
        Ok(file)
    }

    fn check_shapes(&self) -> Result<(), FormatError> {
        let (n, d) = (self.dim_system, self.dim_noise);
        matrix_from_json("H", &self.h, n)?;
        if self.l0.len() != d {
            return Err(FormatError::Shape { field: "L0".into(), message: format!("expected {d} matrices, found {}", self.l0.len()) });
        }
        for (k, m) in self.l0.iter().enumerate() {
            matrix_from_json(&format!("L0[{k}]"), m, n)?;
        }
        if self.s_blocks.len() != d {
            return Err(FormatError::Shape { field: "S_blocks".into(), message: format!("expected {d} rows, found {}", self.s_blocks.len()) });
        }
        for (i, row) in self.s_blocks.iter().enumerate() {
            if row.len() != d {
                return Err(FormatError::Shape {
                    field: format!("S_blocks[{i}]"),
                    message: format!("expected {d} blocks, found {}", row.len()),
                });
            }
            for (j, m) in row.iter().enumerate() {
                matrix_from_json(&format!("S_blocks[{i}][{j}]"), m, n)?;
            }
        }
        Ok(())
    }

    /// Hamiltonian, creation coefficients and the gauge in grid layout.
    pub fn matrices(&self) -> Result<(CMatrix, Vec<CMatrix>, CMatrix), FormatError> {
        let (n, d) = (self.dim_system, self.dim_noise);
        let h = matrix_from_json("H", &self.h, n)?;
        let l0 = self
            .l0
            .iter()
            .enumerate()
            .map(|(k, m)| matrix_from_json(&format!("L0[{k}]"), m, n))
            .collect::<Result<Vec<_>, _>>()?;
        let mut gauge = CMatrix::zeros(n * d, n * d);
        for (i, row) in self.s_blocks.iter().enumerate() {
            for (j, m) in row.iter().enumerate() {
                let block = matrix_from_json(&format!("S_blocks[{i}][{j}]"), m, n)?;
                gauge.view_mut((j * n, i * n), (n, n)).copy_from(&block);
            }
        }
        Ok((h, l0, gauge))
    }

    /// Validated coefficients. Shape problems were caught by [`parse`](Self::parse).
    pub fn coefficients(&self, tol: &Tol) -> Result<QleCoefficients<f64>, ModelError> {
        let (h, l0, gauge) = self.matrices().map_err(|e| ModelError::Shape(e.to_string()))?;
        QleCoefficients::with_dims(self.dim_system, self.dim_noise, h, l0, gauge, tol)
    }

    pub fn from_coefficients(c: &QleCoefficients<f64>, metadata: BTreeMap<String, String>) -> Self {
        let (n, d) = (c.n(), c.d());
        Self {
            dim_system: n,
            dim_noise: d,
            h: matrix_to_json(c.hamiltonian()),
            l0: c.l0().iter().map(matrix_to_json).collect(),
            s_blocks: (0..d).map(|i| (0..d).map(|j| matrix_to_json(&c.s(i, j))).collect()).collect(),
            metadata,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qle_core::fixtures::{example_4_2, spontaneous_emission};

    #[test]
    fn round_trip_is_bitwise() {
        for c in [spontaneous_emission(), example_4_2(0.5235987755982988, 2.0)] {
            let file = CoefficientFile::from_coefficients(&c, BTreeMap::new());
            let back = CoefficientFile::parse(&file.to_json()).unwrap();
            assert_eq!(back, file);
            let c2 = back.coefficients(&Tol::default()).unwrap();
            assert_eq!(c2.l0(), c.l0());
            assert_eq!(c2.gauge(), c.gauge());
        }
    }

    #[test]
    fn empty_input_is_a_parse_error() {
        assert!(matches!(CoefficientFile::parse(""), Err(FormatError::Parse(_))));
    }

    #[test]
    fn shape_errors_name_the_field() {
        let c = spontaneous_emission();
        let mut file = CoefficientFile::from_coefficients(&c, BTreeMap::new());
        file.l0[0].pop();
        let err = CoefficientFile::parse(&file.to_json()).unwrap_err();
        assert!(err.to_string().starts_with("L0[0]"), "{err}");
    }

    #[test]
    fn block_convention() {
        // S^0_1 is the block in grid position (1, 0)
        let mut file = CoefficientFile::from_coefficients(&example_4_2(0.3, 2.0), BTreeMap::new());
        let c = file.coefficients(&Tol::default()).unwrap();
        assert_eq!(matrix_to_json(&c.s(0, 1)), file.s_blocks[0][1]);
        file.s_blocks[0][1][0][0][0] += 0.25;
        let (_, _, gauge) = file.matrices().unwrap();
        assert_eq!(gauge[(2, 0)].re, c.gauge()[(2, 0)].re + 0.25);
    }
}
