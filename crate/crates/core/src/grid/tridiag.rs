use crate::error::{Error, Result};

/// Tridiagonal linear system `A x = rhs`.
///
/// Row `i` reads `lower[i-1] x[i-1] + diag[i] x[i] + upper[i] x[i+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    fn check_shape(&self) -> Result<()> {
        let n = self.diag.len();
        if n == 0 || self.rhs.len() != n || self.lower.len() + 1 != n || self.upper.len() + 1 != n {
            return Err(Error::Mismatch(format!(
                "tridiagonal shape: lower {}, diag {}, upper {}, rhs {}",
                self.lower.len(),
                n,
                self.upper.len(),
                self.rhs.len()
            )));
        }
        Ok(())
    }

    /// `|diag_i| ≥ |lower_{i-1}| + |upper_i|` on every row.
    pub fn is_diagonally_dominant(&self) -> bool {
        (0..self.len()).all(|i| {
            let off = if i > 0 { self.lower[i - 1].abs() } else { 0.0 }
                + self.upper.get(i).map_or(0.0, |u| u.abs());
            self.diag[i].abs() >= off
        })
    }

    /// Matrix-vector product, used to check residuals.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    pub fn solve(&self) -> Result<Vec<f64>> {
        tridiagonal_solve(self)
    }
}

/// Forward elimination and back substitution (Thomas algorithm), `O(n)`.
pub fn tridiagonal_solve(sys: &TridiagonalSystem) -> Result<Vec<f64>> {
    sys.check_shape()?;
    let n = sys.len();
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];

    let mut pivot = sys.diag[0];
    if pivot == 0.0 {
        return Err(Error::ZeroPivot { row: 0 });
    }
    if n > 1 {
        c[0] = sys.upper[0] / pivot;
    }
    x[0] = sys.rhs[0] / pivot;
    for i in 1..n {
        pivot = sys.diag[i] - sys.lower[i - 1] * c[i - 1];
        if pivot == 0.0 {
            return Err(Error::ZeroPivot { row: i });
        }
        if i + 1 < n {
            c[i] = sys.upper[i] / pivot;
        }
        x[i] = (sys.rhs[i] - sys.lower[i - 1] * x[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity() {
        let sys = TridiagonalSystem {
            lower: vec![0.0; 4],
            diag: vec![1.0; 5],
            upper: vec![0.0; 4],
            rhs: vec![1.0, -2.0, 3.5, 0.0, 7.0],
        };
        assert_eq!(sys.solve().unwrap(), sys.rhs);
    }

    #[test]
    fn three_by_three() {
        let sys = TridiagonalSystem {
            lower: vec![-1.0, -1.0],
            diag: vec![2.0, 2.0, 2.0],
            upper: vec![-1.0, -1.0],
            rhs: vec![1.0, 0.0, 1.0],
        };
        let x = sys.solve().unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn single_row() {
        let sys = TridiagonalSystem {
            lower: vec![],
            diag: vec![4.0],
            upper: vec![],
            rhs: vec![2.0],
        };
        assert_eq!(sys.solve().unwrap(), vec![0.5]);
    }

    #[test]
    fn zero_pivot_and_shape_errors() {
        let singular = TridiagonalSystem {
            lower: vec![1.0],
            diag: vec![1.0, 1.0],
            upper: vec![1.0],
            rhs: vec![1.0, 1.0],
        };
        assert!(matches!(singular.solve(), Err(Error::ZeroPivot { row: 1 })));
        let bad = TridiagonalSystem {
            lower: vec![1.0],
            diag: vec![1.0, 1.0],
            upper: vec![],
            rhs: vec![1.0, 1.0],
        };
        assert!(matches!(bad.solve(), Err(Error::Mismatch(_))));
    }
}
