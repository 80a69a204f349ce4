//! Symmetric banded matrices: Cholesky factorization, triangular solves and
//! LDLᵀ inertia counts. Lower-triangle storage by diagonals.

/// Symmetric banded matrix of order `n` with `bw` subdiagonals.
/// Entry (i, j) with 0 ≤ i − j ≤ bw lives at `data[i*(bw+1) + (i−j)]`.
#[derive(Debug, Clone)]
pub struct SymBanded {
    pub n: usize,
    pub bw: usize,
    pub data: Vec<f64>,
}

impl SymBanded {
    pub fn zeros(n: usize, bw: usize) -> Self {
        SymBanded { n, bw, data: vec![0.0; n * (bw + 1)] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        if hi - lo > self.bw {
            0.0
        } else {
            self.data[hi * (self.bw + 1) + (hi - lo)]
        }
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        debug_assert!(hi - lo <= self.bw);
        self.data[hi * (self.bw + 1) + (hi - lo)] += v;
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        debug_assert!(hi - lo <= self.bw);
        self.data[hi * (self.bw + 1) + (hi - lo)] = v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let jlo = i.saturating_sub(self.bw);
            let mut acc = 0.0;
            for j in jlo..=i {
                let v = self.data[i * (self.bw + 1) + (i - j)];
                acc += v * x[j];
                if j < i {
                    y[j] += v * x[i];
                }
            }
            y[i] += acc;
        }
        y
    }

    /// Maximum symmetry defect when interpreted through `get`; zero by
    /// construction, kept for assembly audits of callers that fill both
    /// triangles through `add`.
    pub fn diag_shifted(&self, shift: f64) -> SymBanded {
        let mut out = self.clone();
        for i in 0..self.n {
            out.data[i * (self.bw + 1)] += shift;
        }
        out
    }

    /// In-place banded Cholesky (A = LLᵀ). Returns false if not positive
    /// definite. On success `self` holds L in the same layout.
    pub fn cholesky(&mut self) -> bool {
        let n = self.n;
        let bw = self.bw;
        let w = bw + 1;
        for i in 0..n {
            let jlo = i.saturating_sub(bw);
            for j in jlo..=i {
                let klo = jlo.max(j.saturating_sub(bw));
                let mut sum = self.data[i * w + (i - j)];
                for k in klo..j {
                    sum -= self.data[i * w + (i - k)] * self.data[j * w + (j - k)];
                }
                if j < i {
                    self.data[i * w + (i - j)] = sum / self.data[j * w];
                } else {
                    if sum <= 0.0 || !sum.is_finite() {
                        return false;
                    }
                    self.data[i * w] = sum.sqrt();
                }
            }
        }
        true
    }

    /// Solve L Lᵀ x = b given the factor produced by `cholesky`.
    pub fn chol_solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let bw = self.bw;
        let w = bw + 1;
        let mut x = b.to_vec();
        for i in 0..n {
            let jlo = i.saturating_sub(bw);
            let mut sum = x[i];
            for j in jlo..i {
                sum -= self.data[i * w + (i - j)] * x[j];
            }
            x[i] = sum / self.data[i * w];
        }
        for i in (0..n).rev() {
            let jhi = (i + bw).min(n - 1);
            let mut sum = x[i];
            for j in i + 1..=jhi {
                sum -= self.data[j * w + (j - i)] * x[j];
            }
            x[i] = sum / self.data[i * w];
        }
        x
    }

    /// Inertia (number of negative eigenvalues) via unpivoted LDLᵀ.
    /// Returns None on a vanishing pivot; callers retry with a perturbed shift.
    pub fn ldlt_negative_count(&self) -> Option<usize> {
        let n = self.n;
        let bw = self.bw;
        let w = bw + 1;
        let mut fac = self.data.clone();
        let mut d = vec![0.0; n];
        let mut neg = 0;
        let mut scale = 0.0_f64;
        for i in 0..n {
            scale = scale.max(self.data[i * w].abs());
        }
        let tiny = 1e-14 * scale.max(1e-300);
        for i in 0..n {
            let jlo = i.saturating_sub(bw);
            for j in jlo..=i {
                let klo = jlo.max(j.saturating_sub(bw));
                let mut sum = fac[i * w + (i - j)];
                for k in klo..j {
                    sum -= fac[i * w + (i - k)] * fac[j * w + (j - k)] * d[k];
                }
                if j < i {
                    fac[i * w + (i - j)] = sum / d[j];
                } else {
                    if sum.abs() < tiny || !sum.is_finite() {
                        return None;
                    }
                    d[i] = sum;
                    if sum < 0.0 {
                        neg += 1;
                    }
                }
            }
        }
        Some(neg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> SymBanded {
        let mut a = SymBanded::zeros(n, 1);
        for i in 0..n {
            a.set(i, i, 2.0);
            if i > 0 {
                a.set(i, i - 1, -1.0);
            }
        }
        a
    }

    #[test]
    fn cholesky_solve_roundtrip() {
        let a = laplacian_1d(64);
        let xref: Vec<f64> = (0..64).map(|i| (0.1 * i as f64).sin()).collect();
        let b = a.matvec(&xref);
        let mut f = a.clone();
        assert!(f.cholesky());
        let x = f.chol_solve(&b);
        for i in 0..64 {
            assert!((x[i] - xref[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn inertia_counts_negatives() {
        // shift the 1d laplacian below its two smallest eigenvalues
        let n = 64;
        let h = 1.0; // unscaled stencil: eigenvalues 2 - 2cos(kπ/(n+1))
        let _ = h;
        let lam = |k: usize| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos();
        let shift = 0.5 * (lam(2) + lam(3));
        let a = laplacian_1d(n).diag_shifted(-shift);
        assert_eq!(a.ldlt_negative_count(), Some(2));
    }
}
