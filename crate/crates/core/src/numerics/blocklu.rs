//! Direct solvers for the Newton systems: dense LU with partial pivoting and
//! a bordered block-tridiagonal elimination (block Thomas with the scalar
//! border column/row carried through).

use crate::error::WaveError;
use crate::Result;

/// Dense row-major LU solve with partial pivoting, in place.
pub fn dense_solve(a: &mut [f64], n: usize, b: &mut [f64]) -> Result<()> {
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let mut piv = col;
        let mut best = a[perm[col] * n + col].abs();
        for r in col + 1..n {
            let v = a[perm[r] * n + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return Err(WaveError::InternalInconsistency { what: "singular dense system" });
        }
        perm.swap(col, piv);
        let prow = perm[col];
        let pval = a[prow * n + col];
        for r in col + 1..n {
            let row = perm[r];
            let factor = a[row * n + col] / pval;
            if factor != 0.0 {
                a[row * n + col] = factor;
                for c in col + 1..n {
                    a[row * n + c] -= factor * a[prow * n + c];
                }
            } else {
                a[row * n + col] = 0.0;
            }
        }
    }
    // forward
    let mut y = vec![0.0; n];
    for i in 0..n {
        let row = perm[i];
        let mut acc = b[row];
        for j in 0..i {
            acc -= a[row * n + j] * y[j];
        }
        y[i] = acc;
    }
    // backward
    for i in (0..n).rev() {
        let row = perm[i];
        let mut acc = y[i];
        for j in i + 1..n {
            acc -= a[row * n + j] * b[j];
        }
        b[i] = acc / a[row * n + i];
    }
    Ok(())
}

/// Bordered block-tridiagonal system
///
/// ```text
/// [ D_1 U_1                 b_1 ] [x_1]   [r_1]
/// [ L_2 D_2 U_2             b_2 ] [x_2]   [r_2]
/// [        ...                  ] [...] = [...]
/// [             L_J D_J     b_J ] [x_J]   [r_J]
/// [  0   0  ...     c^T      d  ] [ λ ]   [r_λ]
/// ```
///
/// with square blocks of uniform size `bs` except the last (`bs_last`), and
/// the border row touching only the last block. Solved by block Thomas
/// elimination with the λ column carried as an extra right-hand side.
pub struct BlockTridiagBordered {
    pub bs: usize,
    pub bs_last: usize,
    /// diagonal blocks, row-major
    pub diag: Vec<Vec<f64>>,
    /// sub-diagonal blocks L_j (j = 2..J), L_j maps x_{j−1}
    pub lower: Vec<Vec<f64>>,
    /// super-diagonal blocks U_j (j = 1..J−1), U_j maps x_{j+1}
    pub upper: Vec<Vec<f64>>,
    /// border column pieces b_j
    pub bcol: Vec<Vec<f64>>,
    /// border row over the last block
    pub crow: Vec<f64>,
    pub d: f64,
}

impl BlockTridiagBordered {
    /// Solve in place of `rhs` (concatenated block rhs then the scalar r_λ).
    /// Returns the solution in the same layout.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let nb = self.diag.len();
        if nb == 0 {
            return Err(WaveError::InvalidInput { what: "empty block system" });
        }
        let size = |j: usize| if j + 1 == nb { self.bs_last } else { self.bs };
        // carry per block: solved representation x_j = f_j − G_j x_{j+1} − g_j λ
        let mut f: Vec<Vec<f64>> = Vec::with_capacity(nb);
        let mut gmat: Vec<Vec<f64>> = Vec::with_capacity(nb);
        let mut gl: Vec<Vec<f64>> = Vec::with_capacity(nb);

        let mut offset = 0usize;
        let mut dtil: Vec<f64>;
        for j in 0..nb {
            let nj = size(j);
            let mut rj = rhs[offset..offset + nj].to_vec();
            let mut bj = self.bcol[j].clone();
            dtil = self.diag[j].clone();
            if j > 0 {
                // D̃_j = D_j − L_j G_{j−1}, r̃_j = r_j − L_j f_{j−1}, b̃_j = b_j − L_j g_{j−1}
                let l = &self.lower[j - 1];
                let nprev = size(j - 1);
                let gprev = &gmat[j - 1];
                let fprev = &f[j - 1];
                let glprev = &gl[j - 1];
                for r in 0..nj {
                    for c in 0..nprev {
                        let lv = l[r * nprev + c];
                        if lv != 0.0 {
                            rj[r] -= lv * fprev[c];
                            bj[r] -= lv * glprev[c];
                        }
                    }
                }
                if j + 1 <= nb {
                    // subtract L_j * (−G_{j−1} x_j)? G couples to x_j: D̃_j -= L_j G_{j−1}
                    let ncur = nj;
                    for r in 0..nj {
                        for c in 0..ncur {
                            let mut acc = 0.0;
                            for t in 0..nprev {
                                acc += l[r * nprev + t] * gprev[t * ncur + c];
                            }
                            dtil[r * ncur + c] -= acc;
                        }
                    }
                }
            }
            // factor D̃_j and form G_j = D̃⁻¹U_j, f_j = D̃⁻¹r̃, g_j = D̃⁻¹b̃
            let nxt = if j + 1 < nb { size(j + 1) } else { 0 };
            let ncols = nxt + 2; // U columns + border col + rhs
            let mut stacked = vec![0.0; nj * ncols.max(1)];
            if j + 1 < nb {
                let u = &self.upper[j];
                for r in 0..nj {
                    for c in 0..nxt {
                        stacked[r * ncols + c] = u[r * nxt + c];
                    }
                }
            }
            for r in 0..nj {
                stacked[r * ncols + nxt] = bj[r];
                stacked[r * ncols + nxt + 1] = rj[r];
            }
            solve_multi(&mut dtil, nj, &mut stacked, ncols)?;
            let mut gj = vec![0.0; nj * nxt.max(1)];
            let mut glj = vec![0.0; nj];
            let mut fj = vec![0.0; nj];
            for r in 0..nj {
                for c in 0..nxt {
                    gj[r * nxt + c] = stacked[r * ncols + c];
                }
                glj[r] = stacked[r * ncols + nxt];
                fj[r] = stacked[r * ncols + nxt + 1];
            }
            gmat.push(gj);
            gl.push(glj);
            f.push(fj);
            offset += nj;
        }

        // border row: c^T x_J + d λ = r_λ with x_J = f_J − g_J λ  (G_J empty)
        let nlast = size(nb - 1);
        let rl = rhs[offset];
        let mut num = rl;
        let mut den = self.d;
        for c in 0..nlast {
            num -= self.crow[c] * f[nb - 1][c];
            den -= self.crow[c] * gl[nb - 1][c];
        }
        if den == 0.0 || !den.is_finite() {
            return Err(WaveError::InternalInconsistency { what: "singular border closure" });
        }
        let lambda = num / den;

        // back substitution
        let mut x = vec![0.0; offset + 1];
        x[offset] = lambda;
        let mut xnext: Vec<f64> = Vec::new();
        let mut off_end = offset;
        for j in (0..nb).rev() {
            let nj = size(j);
            off_end -= nj;
            let mut xj = f[j].clone();
            for r in 0..nj {
                xj[r] -= gl[j][r] * lambda;
            }
            if j + 1 < nb {
                let nxt = size(j + 1);
                for r in 0..nj {
                    let mut acc = 0.0;
                    for c in 0..nxt {
                        acc += gmat[j][r * nxt + c] * xnext[c];
                    }
                    xj[r] -= acc;
                }
            }
            x[off_end..off_end + nj].copy_from_slice(&xj);
            xnext = xj;
        }
        Ok(x)
    }
}

/// LU with partial pivoting of `a` (n×n), solving for `m` right-hand sides
/// stored as rows of length `m` per unknown (column-major in the rhs sense).
fn solve_multi(a: &mut [f64], n: usize, rhs: &mut [f64], m: usize) -> Result<()> {
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let mut piv = col;
        let mut best = a[perm[col] * n + col].abs();
        for r in col + 1..n {
            let v = a[perm[r] * n + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return Err(WaveError::InternalInconsistency { what: "singular diagonal block" });
        }
        perm.swap(col, piv);
        let prow = perm[col];
        let pval = a[prow * n + col];
        for r in col + 1..n {
            let row = perm[r];
            let factor = a[row * n + col] / pval;
            a[row * n + col] = factor;
            if factor != 0.0 {
                for c in col + 1..n {
                    a[row * n + c] -= factor * a[prow * n + c];
                }
            }
        }
    }
    let mut y = vec![0.0; n * m];
    for i in 0..n {
        let row = perm[i];
        for c in 0..m {
            let mut acc = rhs[row * m + c];
            for j in 0..i {
                acc -= a[row * n + j] * y[j * m + c];
            }
            y[i * m + c] = acc;
        }
    }
    for i in (0..n).rev() {
        let row = perm[i];
        for c in 0..m {
            let mut acc = y[i * m + c];
            for j in i + 1..n {
                acc -= a[row * n + j] * rhs[j * m + c];
            }
            rhs[i * m + c] = acc / a[row * n + i];
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pseudo(v: &mut u64) -> f64 {
        *v = v.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*v >> 11) as f64 / (1u64 << 53) as f64) - 0.5
    }

    #[test]
    fn dense_lu_roundtrip() {
        let n = 40;
        let mut seed = 7u64;
        let mut a = vec![0.0; n * n];
        for v in a.iter_mut() {
            *v = pseudo(&mut seed);
        }
        for i in 0..n {
            a[i * n + i] += 4.0;
        }
        let xref: Vec<f64> = (0..n).map(|i| (i as f64 * 0.211).sin()).collect();
        let mut b = vec![0.0; n];
        for i in 0..n {
            b[i] = (0..n).map(|j| a[i * n + j] * xref[j]).sum();
        }
        let mut acopy = a.clone();
        dense_solve(&mut acopy, n, &mut b).unwrap();
        for i in 0..n {
            assert!((b[i] - xref[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn block_solver_matches_dense() {
        // random bordered block-tridiagonal, blocks 5x5, last 8x8
        let bs = 5;
        let bs_last = 8;
        let nb = 6;
        let mut seed = 42u64;
        let sizes: Vec<usize> = (0..nb).map(|j| if j + 1 == nb { bs_last } else { bs }).collect();
        let total: usize = sizes.iter().sum::<usize>() + 1;
        let mut diag = Vec::new();
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        let mut bcol = Vec::new();
        for j in 0..nb {
            let nj = sizes[j];
            let mut dblk = vec![0.0; nj * nj];
            for v in dblk.iter_mut() {
                *v = pseudo(&mut seed);
            }
            for i in 0..nj {
                dblk[i * nj + i] += 5.0;
            }
            diag.push(dblk);
            if j > 0 {
                let np = sizes[j - 1];
                let mut l = vec![0.0; nj * np];
                for v in l.iter_mut() {
                    *v = pseudo(&mut seed);
                }
                lower.push(l);
            }
            if j + 1 < nb {
                let nx = sizes[j + 1];
                let mut u = vec![0.0; nj * nx];
                for v in u.iter_mut() {
                    *v = pseudo(&mut seed);
                }
                upper.push(u);
            }
            let mut b = vec![0.0; nj];
            for v in b.iter_mut() {
                *v = pseudo(&mut seed);
            }
            bcol.push(b);
        }
        let mut crow = vec![0.0; bs_last];
        for v in crow.iter_mut() {
            *v = pseudo(&mut seed);
        }
        let d = 0.3;
        // assemble dense
        let mut dense = vec![0.0; total * total];
        let offsets: Vec<usize> = {
            let mut o = vec![0usize];
            for j in 0..nb {
                let last = *o.last().unwrap();
                o.push(last + sizes[j]);
            }
            o
        };
        for j in 0..nb {
            let nj = sizes[j];
            for r in 0..nj {
                for c in 0..nj {
                    dense[(offsets[j] + r) * total + offsets[j] + c] = diag[j][r * nj + c];
                }
                dense[(offsets[j] + r) * total + total - 1] = bcol[j][r];
            }
            if j > 0 {
                let np = sizes[j - 1];
                for r in 0..nj {
                    for c in 0..np {
                        dense[(offsets[j] + r) * total + offsets[j - 1] + c] =
                            lower[j - 1][r * np + c];
                    }
                }
            }
            if j + 1 < nb {
                let nx = sizes[j + 1];
                for r in 0..nj {
                    for c in 0..nx {
                        dense[(offsets[j] + r) * total + offsets[j + 1] + c] =
                            upper[j][r * nx + c];
                    }
                }
            }
        }
        for c in 0..bs_last {
            dense[(total - 1) * total + offsets[nb - 1] + c] = crow[c];
        }
        dense[(total - 1) * total + total - 1] = d;

        let mut rhs = vec![0.0; total];
        for v in rhs.iter_mut() {
            *v = pseudo(&mut seed);
        }
        let sys = BlockTridiagBordered { bs, bs_last, diag, lower, upper, bcol, crow, d };
        let x = sys.solve(&rhs).unwrap();
        let mut dense_rhs = rhs.clone();
        dense_solve(&mut dense, total, &mut dense_rhs).unwrap();
        for i in 0..total {
            assert!((x[i] - dense_rhs[i]).abs() < 1e-9, "i={i} {} {}", x[i], dense_rhs[i]);
        }
    }
}
