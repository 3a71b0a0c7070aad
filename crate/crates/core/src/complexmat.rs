//! JSON-friendly representation of complex matrices: real and imaginary
//! parts as nested row-major arrays.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ComplexMatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl ComplexMatrixJson {
    pub fn from_matrix(m: &DMatrix<Complex64>) -> Self {
        let rows = m.nrows();
        let cols = m.ncols();
        let mut re = vec![vec![0.0; cols]; rows];
        let mut im = vec![vec![0.0; cols]; rows];
        for i in 0..rows {
            for j in 0..cols {
                re[i][j] = m[(i, j)].re;
                im[i][j] = m[(i, j)].im;
            }
        }
        Self { re, im }
    }

    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>> {
        let rows = self.re.len();
        if rows == 0 {
            return Err(Error::EmptyInput("matrix has no rows".into()));
        }
        let cols = self.re[0].len();
        let shape_ok = self.im.len() == rows
            && self.re.iter().all(|r| r.len() == cols)
            && self.im.iter().all(|r| r.len() == cols);
        if !shape_ok {
            return Err(Error::DimensionMismatch(
                "re/im parts disagree on matrix shape".into(),
            ));
        }
        Ok(DMatrix::from_fn(rows, cols, |i, j| {
            Complex64::new(self.re[i][j], self.im[i][j])
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let m = DMatrix::from_fn(3, 2, |i, j| Complex64::new(i as f64, j as f64 - 1.0));
        let back = ComplexMatrixJson::from_matrix(&m).to_matrix().unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let bad = ComplexMatrixJson {
            re: vec![vec![1.0, 2.0]],
            im: vec![vec![1.0]],
        };
        assert!(bad.to_matrix().is_err());
    }
}
