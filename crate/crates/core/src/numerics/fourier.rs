//! Cosine/sine collocation on a half period.
//!
//! Even Λ-periodic functions are represented by their values at the nodes
//! q_i = i·Λ/(2m), i = 0..m. Differentiation goes through the DCT-I
//! coefficients and is exact for resolvable harmonics cos(kτq), k ≤ m,
//! τ = 2π/Λ.

/// Collocation grid with precomputed transform and derivative matrices.
#[derive(Debug, Clone)]
pub struct CosineGrid {
    pub m: usize,
    pub lambda0: f64,
    pub tau: f64,
    nodes: Vec<f64>,
    /// nodal values of an even function -> its q-derivative at the nodes (odd values)
    d_even: Vec<f64>,
    /// nodal values of an odd function (endpoints zero) -> derivative at the nodes
    d_odd: Vec<f64>,
    /// DCT-I analysis matrix: coeffs a_k = Σ_i t[k,i] w_i
    analysis: Vec<f64>,
}

impl CosineGrid {
    pub fn new(m: usize, lambda0: f64) -> Self {
        assert!(m >= 2);
        let tau = 2.0 * std::f64::consts::PI / lambda0;
        let half = 0.5 * lambda0;
        let nodes: Vec<f64> = (0..=m).map(|i| half * i as f64 / m as f64).collect();
        let mf = m as f64;
        let n1 = m + 1;
        let mut analysis = vec![0.0; n1 * n1];
        for k in 0..=m {
            for i in 0..=m {
                let mut v = 2.0 / mf * (std::f64::consts::PI * (k * i) as f64 / mf).cos();
                if i == 0 || i == m {
                    v *= 0.5;
                }
                if k == 0 || k == m {
                    v *= 0.5;
                }
                analysis[k * n1 + i] = v;
            }
        }
        // synthesis entries cos(pi k i / m); derivative matrices by composition
        let mut d_even = vec![0.0; n1 * n1];
        let mut d_odd = vec![0.0; n1 * n1];
        for i in 0..=m {
            for ip in 0..=m {
                let mut acc = 0.0;
                for k in 0..=m {
                    let sk = -(k as f64) * tau * (std::f64::consts::PI * (k * i) as f64 / mf).sin();
                    acc += sk * analysis[k * n1 + ip];
                }
                d_even[i * n1 + ip] = acc;
            }
        }
        // odd analysis: b_k = (2/m) Σ_{i=1}^{m-1} f_i sin(pi k i/m), k = 1..m-1
        for i in 0..=m {
            for ip in 1..m {
                let mut acc = 0.0;
                for k in 1..m {
                    let ck = (k as f64) * tau * (std::f64::consts::PI * (k * i) as f64 / mf).cos();
                    let t = 2.0 / mf * (std::f64::consts::PI * (k * ip) as f64 / mf).sin();
                    acc += ck * t;
                }
                d_odd[i * n1 + ip] = acc;
            }
        }
        CosineGrid { m, lambda0, tau, nodes, d_even, d_odd, analysis }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn apply_d_even(&self, w: &[f64], out: &mut [f64]) {
        matvec(&self.d_even, w, out, self.m + 1);
    }

    pub fn apply_d_odd(&self, f: &[f64], out: &mut [f64]) {
        matvec(&self.d_odd, f, out, self.m + 1);
    }

    /// DCT-I coefficients a_k with w(q) = Σ_k a_k cos(kτq).
    pub fn coeffs(&self, w: &[f64]) -> Vec<f64> {
        let n1 = self.m + 1;
        let mut a = vec![0.0; n1];
        matvec(&self.analysis, w, &mut a, n1);
        a
    }

    /// Evaluate Σ_k a_k cos(kτq) at arbitrary q.
    pub fn eval_coeffs(&self, a: &[f64], q: f64) -> f64 {
        let mut acc = 0.0;
        for (k, &ak) in a.iter().enumerate() {
            acc += ak * (k as f64 * self.tau * q).cos();
        }
        acc
    }
}

fn matvec(mat: &[f64], x: &[f64], out: &mut [f64], n: usize) {
    for i in 0..n {
        let row = &mat[i * n..(i + 1) * n];
        let mut acc = 0.0;
        for j in 0..n {
            acc += row[j] * x[j];
        }
        out[i] = acc;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_exact_on_harmonics() {
        let m = 24;
        let lambda0 = 1.9;
        let g = CosineGrid::new(m, lambda0);
        let tau = g.tau;
        for k in [1usize, 3, 11] {
            let w: Vec<f64> = g.nodes().iter().map(|&q| (k as f64 * tau * q).cos()).collect();
            let mut dq = vec![0.0; m + 1];
            g.apply_d_even(&w, &mut dq);
            for (i, &q) in g.nodes().iter().enumerate() {
                let exact = -(k as f64) * tau * (k as f64 * tau * q).sin();
                assert!((dq[i] - exact).abs() < 1e-10, "k={k} i={i}");
            }
            let f: Vec<f64> = g.nodes().iter().map(|&q| (k as f64 * tau * q).sin()).collect();
            let mut df = vec![0.0; m + 1];
            g.apply_d_odd(&f, &mut df);
            for (i, &q) in g.nodes().iter().enumerate() {
                let exact = (k as f64) * tau * (k as f64 * tau * q).cos();
                if k < m {
                    assert!((df[i] - exact).abs() < 1e-10, "odd k={k} i={i}");
                }
            }
        }
    }

    #[test]
    fn coefficient_roundtrip() {
        let m = 16;
        let g = CosineGrid::new(m, 2.3);
        let w: Vec<f64> = g
            .nodes()
            .iter()
            .map(|&q| 0.7 + 0.3 * (g.tau * q).cos() - 0.11 * (5.0 * g.tau * q).cos())
            .collect();
        let a = g.coeffs(&w);
        assert!((a[0] - 0.7).abs() < 1e-12);
        assert!((a[1] - 0.3).abs() < 1e-12);
        assert!((a[5] + 0.11).abs() < 1e-12);
        for (i, &q) in g.nodes().iter().enumerate() {
            assert!((g.eval_coeffs(&a, q) - w[i]).abs() < 1e-12);
        }
    }
}
