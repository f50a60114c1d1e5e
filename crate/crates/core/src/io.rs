//! JSON matrix exchange format: `{"n": 4, "re": [[...]], "im": [[...]]}`,
//! with `im` omitted when every imaginary part is zero.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{BistoMatrix, CMatrix, Complex64, MatrixError, Tolerances};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("matrix JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("declared order {declared} does not match {field} with {actual} rows")]
    OrderMismatch { declared: usize, field: &'static str, actual: usize },
    #[error("matrix has non-zero imaginary part {0:e}; a real matrix is required")]
    NotReal(f64),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixJson {
    pub fn from_cmatrix(m: &CMatrix) -> Self {
        let n = m.order();
        let re = (0..n).map(|i| m.row(i).iter().map(|z| z.re).collect()).collect();
        let im = if m.max_imag() == 0.0 {
            None
        } else {
            Some((0..n).map(|i| m.row(i).iter().map(|z| z.im).collect()).collect())
        };
        Self { n, re, im }
    }

    pub fn from_bisto(b: &BistoMatrix) -> Self {
        Self { n: b.order(), re: b.rows(), im: None }
    }

    pub fn to_cmatrix(&self) -> Result<CMatrix, IoError> {
        self.check_shape(&self.re, "re")?;
        let zeros;
        let im = match &self.im {
            Some(im) => {
                self.check_shape(im, "im")?;
                im
            }
            None => {
                zeros = vec![vec![0.0; self.n]; self.n];
                &zeros
            }
        };
        let data = self
            .re
            .iter()
            .zip(im)
            .flat_map(|(r, i)| r.iter().zip(i).map(|(&a, &b)| Complex64::new(a, b)))
            .collect();
        Ok(CMatrix::from_vec(self.n, data)?)
    }

    /// Interprets the matrix as bistochastic; any imaginary part must vanish.
    pub fn to_bisto(&self, tol: &Tolerances) -> Result<BistoMatrix, IoError> {
        self.check_shape(&self.re, "re")?;
        if let Some(im) = &self.im {
            let worst = im.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max);
            if worst > 0.0 {
                return Err(IoError::NotReal(worst));
            }
        }
        Ok(BistoMatrix::from_rows(&self.re, tol)?)
    }

    fn check_shape(&self, rows: &[Vec<f64>], field: &'static str) -> Result<(), IoError> {
        if rows.len() != self.n {
            return Err(IoError::OrderMismatch { declared: self.n, field, actual: rows.len() });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != self.n) {
            return Err(MatrixError::NotSquare { rows: self.n, cols: bad.len() }.into());
        }
        Ok(())
    }
}

pub fn cmatrix_to_json(m: &CMatrix) -> String {
    serde_json::to_string_pretty(&MatrixJson::from_cmatrix(m)).expect("matrix serialization cannot fail")
}

pub fn cmatrix_from_json(s: &str) -> Result<CMatrix, IoError> {
    serde_json::from_str::<MatrixJson>(s)?.to_cmatrix()
}

pub fn bisto_from_json(s: &str, tol: &Tolerances) -> Result<BistoMatrix, IoError> {
    serde_json::from_str::<MatrixJson>(s)?.to_bisto(tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn real_matrix_omits_im() {
        let s = cmatrix_to_json(&CMatrix::identity(2));
        assert!(!s.contains("\"im\""));
        assert_eq!(cmatrix_from_json(&s).unwrap(), CMatrix::identity(2));
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(
            cmatrix_from_json(r#"{"n": 3, "re": [[1,0],[0,1]]}"#),
            Err(IoError::OrderMismatch { declared: 3, .. })
        ));
        assert!(cmatrix_from_json(r#"{"n": 2, "re": [[1,0],[0]]}"#).is_err());
        assert!(matches!(
            bisto_from_json(r#"{"n": 1, "re": [[1]], "im": [[0.5]]}"#, &Tolerances::default()),
            Err(IoError::NotReal(_))
        ));
    }

    proptest! {
        #[test]
        fn complex_roundtrip_is_lossless(vals in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 9)) {
            let m = CMatrix::from_vec(3, vals.iter().map(|&(a, b)| Complex64::new(a, b)).collect()).unwrap();
            let back = cmatrix_from_json(&cmatrix_to_json(&m)).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
