//! Symmetric tridiagonal eigensolves (Sturm bisection + inverse iteration)
//! and the Thomas solve for general tridiagonal systems.

/// Symmetric tridiagonal matrix: `diag` length n, `off` length n−1.
#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: f64) -> usize {
        let n = self.n();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..n {
            let e2 = self.off[i - 1] * self.off[i - 1];
            let denom = if q == 0.0 { 1e-300 } else { q };
            q = self.diag[i] - x - e2 / denom;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.n();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k` smallest eigenvalues in ascending order, by bisection on the
    /// Sturm count. Resolves multiple eigenvalues with their multiplicity.
    pub fn lowest_eigenvalues(&self, k: usize) -> Vec<f64> {
        let n = self.n();
        let k = k.min(n);
        let (glo, ghi) = self.gershgorin();
        let scale = (ghi - glo).max(1e-30);
        let mut out = Vec::with_capacity(k);
        for idx in 1..=k {
            let mut lo = glo;
            let mut hi = ghi;
            for _ in 0..120 {
                let mid = 0.5 * (lo + hi);
                if self.count_below(mid) < idx {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-15 * scale {
                    break;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        out
    }

    /// Eigenvector for an eigenvalue estimate, by shifted inverse iteration.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.n();
        let (glo, ghi) = self.gershgorin();
        let shift = lambda + 1e-12 * (ghi - glo).max(1.0);
        let mut v = vec![1.0; n];
        for (i, vi) in v.iter_mut().enumerate() {
            *vi += (i as f64 * 0.618).sin() * 0.01;
        }
        normalize(&mut v);
        for _ in 0..4 {
            let sub: Vec<f64> = self.off.clone();
            let diag: Vec<f64> = self.diag.iter().map(|d| d - shift).collect();
            if let Some(x) = thomas_sym(&diag, &sub, &v) {
                v = x;
                normalize(&mut v);
            } else {
                break;
            }
        }
        // sign convention: first component of significant size is positive
        let lead = v
            .iter()
            .find(|c| c.abs() > 1e-8 * max_abs(&v))
            .copied()
            .unwrap_or(1.0);
        if lead < 0.0 {
            for c in v.iter_mut() {
                *c = -*c;
            }
        }
        v
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.off[i] * x[i + 1];
            }
            y[i] = acc;
        }
        y
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |a, b| a.max(b.abs()))
}

fn normalize(v: &mut [f64]) {
    let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nrm > 0.0 {
        for x in v.iter_mut() {
            *x /= nrm;
        }
    }
}

/// Thomas solve for a symmetric tridiagonal system (with partial protection
/// against zero pivots via a tiny perturbation).
fn thomas_sym(diag: &[f64], off: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut piv = diag[0];
    if piv == 0.0 {
        piv = 1e-300;
    }
    c[0] = off.first().copied().unwrap_or(0.0) / piv;
    d[0] = rhs[0] / piv;
    for i in 1..n {
        let m = diag[i] - off[i - 1] * c[i - 1];
        let m = if m == 0.0 { 1e-300 } else { m };
        if i < n - 1 {
            c[i] = off[i] / m;
        }
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / m;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let xi = x[i] - c[i] * x[i + 1];
        x[i] = xi;
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

/// General (non-symmetric) tridiagonal solve: `sub` length n−1 (below the
/// diagonal), `diag` length n, `sup` length n−1.
pub fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut piv = diag[0];
    if piv == 0.0 {
        return None;
    }
    c[0] = sup.first().copied().unwrap_or(0.0) / piv;
    d[0] = rhs[0] / piv;
    for i in 1..n {
        let m = diag[i] - sub[i - 1] * c[i - 1];
        if m == 0.0 {
            return None;
        }
        if i < n - 1 {
            c[i] = sup[i] / m;
        }
        d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / m;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let xi = x[i] - c[i] * x[i + 1];
        x[i] = xi;
    }
    piv = 0.0;
    let _ = piv;
    Some(x)
}
