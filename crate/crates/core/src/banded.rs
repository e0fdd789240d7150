//! Symmetric positive-definite banded matrices with an in-place Cholesky
//! factorization and solve. The finite-volume extension system is SPD with
//! bandwidth equal to the vertical level count, far too sparse for a dense
//! factorization at ~4·10⁴ unknowns but comfortably in range for a banded
//! one (O(n·b²) work, O(n·b) storage).

use crate::error::{CoreError, Result};

/// Lower-band storage: `bands[k][j] = A[j + k, j]` for k = 0..=bandwidth.
#[derive(Debug, Clone)]
pub struct SymBanded {
    pub n: usize,
    pub bandwidth: usize,
    bands: Vec<Vec<f64>>,
}

impl SymBanded {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        let bands = (0..=bandwidth).map(|k| vec![0.0; n - k.min(n)]) // n−k entries on diag k
            .collect();
        SymBanded { n, bandwidth, bands }
    }

    /// Adds `v` to A[i, j] (and by symmetry A[j, i]). |i − j| must be within
    /// the bandwidth.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let k = hi - lo;
        assert!(k <= self.bandwidth, "entry ({i},{j}) outside band");
        self.bands[k][lo] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let k = hi - lo;
        if k > self.bandwidth {
            0.0
        } else {
            self.bands[k][lo]
        }
    }

    /// y = A x.
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            y[j] += self.bands[0][j] * x[j];
            for k in 1..=self.bandwidth {
                if j + k >= self.n {
                    break;
                }
                let a = self.bands[k][j];
                y[j + k] += a * x[j];
                y[j] += a * x[j + k];
            }
        }
        y
    }

    /// Cholesky factorization A = L Lᵀ with L in the same band layout.
    /// Fails with a solve error if a pivot is not strictly positive.
    pub fn cholesky(mut self) -> Result<BandedCholesky> {
        let n = self.n;
        let bw = self.bandwidth;
        for j in 0..n {
            // L[j][j]
            let mut d = self.bands[0][j];
            let kmin = j.saturating_sub(bw);
            for p in kmin..j {
                let l = self.bands[j - p][p];
                d -= l * l;
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(CoreError::SolveFailure(format!(
                    "banded Cholesky pivot {d} at row {j}"
                )));
            }
            let dj = d.sqrt();
            self.bands[0][j] = dj;
            // Column below the diagonal.
            for i in j + 1..(j + bw + 1).min(n) {
                let mut s = self.bands[i - j][j];
                let kmin = i.saturating_sub(bw).max(kmin);
                for p in kmin..j {
                    s -= self.bands[i - p][p] * self.bands[j - p][p];
                }
                self.bands[i - j][j] = s / dj;
            }
        }
        Ok(BandedCholesky { factor: self })
    }
}

/// Factorized SPD banded system.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    factor: SymBanded,
}

impl BandedCholesky {
    /// Solves A x = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.factor.n;
        let bw = self.factor.bandwidth;
        assert_eq!(b.len(), n);
        let l = &self.factor.bands;
        // Forward: L y = b.
        let mut y = b.to_vec();
        for i in 0..n {
            let kmin = i.saturating_sub(bw);
            let mut s = y[i];
            for p in kmin..i {
                s -= l[i - p][p] * y[p];
            }
            y[i] = s / l[0][i];
        }
        // Backward: Lᵀ x = y.
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in 1..=bw {
                if i + k >= n {
                    break;
                }
                s -= l[k][i] * y[i + k];
            }
            y[i] = s / l[0][i];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};

    #[test]
    fn matches_dense_solver_on_random_spd_band() {
        let n = 64;
        let bw = 7;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let mut a = SymBanded::zeros(n, bw);
        let mut dense = DMatrix::zeros(n, n);
        for i in 0..n {
            a.add(i, i, 10.0 + rng.gen_range(0.0..1.0));
            dense[(i, i)] = a.get(i, i);
            for k in 1..=bw {
                if i + k < n {
                    let v = rng.gen_range(-0.5..0.5);
                    a.add(i + k, i, v);
                    dense[(i + k, i)] = v;
                    dense[(i, i + k)] = v;
                }
            }
        }
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = a.clone().cholesky().unwrap().solve(&b);
        let want = dense
            .clone()
            .cholesky()
            .unwrap()
            .solve(&DVector::from_column_slice(&b));
        for (xi, wi) in x.iter().zip(want.iter()) {
            assert!((xi - wi).abs() < 1e-10);
        }
        // Residual check through the banded multiply.
        let ax = a.mul(&x);
        for (axi, bi) in ax.iter().zip(&b) {
            assert!((axi - bi).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_indefinite_matrices() {
        let mut a = SymBanded::zeros(3, 1);
        a.add(0, 0, 1.0);
        a.add(1, 1, -2.0);
        a.add(2, 2, 1.0);
        assert!(a.cholesky().is_err());
    }
}
