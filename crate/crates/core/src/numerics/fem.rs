//! Symmetric assembly of second-order forms on tensor grids with bilinear
//! elements: used for the physical-plane eigenproblem after the vertical
//! scaling map. Bottom edge Dirichlet, other edges natural; an optional
//! weighted top-edge term covers the transformed Robin condition.

use super::banded::SymBanded;

/// Coefficients of the form, all evaluated at physical points (x, η):
///
/// a(w,v) = ∫∫ [gxx w_x v_x + gxe (w_x v_η + w_η v_x) + gee w_η v_η
///              + pot · w v] dx dη + ∫_top beta(x) · w v dx
/// m(w,v) = ∫∫ mass · w v dx dη   (row-sum lumped)
pub struct FormCoefficients<'a> {
    pub gxx: &'a dyn Fn(f64, f64) -> f64,
    pub gxe: &'a dyn Fn(f64, f64) -> f64,
    pub gee: &'a dyn Fn(f64, f64) -> f64,
    pub pot: &'a dyn Fn(f64, f64) -> f64,
    pub mass: &'a dyn Fn(f64, f64) -> f64,
    pub beta_top: &'a dyn Fn(f64) -> f64,
}

/// Assembled generalized eigenproblem A w = λ diag(m) w with the bottom row
/// of nodes eliminated (Dirichlet).
pub struct AssembledForm {
    pub a: SymBanded,
    pub mass: Vec<f64>,
    pub nx: usize,
    pub ny: usize,
}

impl AssembledForm {
    /// Grid-node dof index (i, j), j ≥ 1.
    #[inline]
    pub fn dof(&self, i: usize, j: usize) -> usize {
        i * self.ny + (j - 1)
    }
}

const GP: [f64; 2] = [-0.577350269189625764509148780502, 0.577350269189625764509148780502];

pub fn assemble(xs: &[f64], etas: &[f64], coef: &FormCoefficients<'_>) -> AssembledForm {
    let nx = xs.len() - 1;
    let ny = etas.len() - 1;
    let ndof = (nx + 1) * ny;
    let bw = ny + 1;
    let mut a = SymBanded::zeros(ndof, bw);
    let mut mass = vec![0.0; ndof];
    let dof = |i: usize, j: usize| -> Option<usize> {
        if j == 0 {
            None
        } else {
            Some(i * ny + (j - 1))
        }
    };

    for ei in 0..nx {
        let hx = xs[ei + 1] - xs[ei];
        for ej in 0..ny {
            let he = etas[ej + 1] - etas[ej];
            // local nodes in order (i,j), (i+1,j), (i,j+1), (i+1,j+1)
            let locals = [
                dof(ei, ej),
                dof(ei + 1, ej),
                dof(ei, ej + 1),
                dof(ei + 1, ej + 1),
            ];
            let mut ke = [[0.0_f64; 4]; 4];
            let mut me = [0.0_f64; 4];
            for &gx in GP.iter() {
                for &ge in GP.iter() {
                    let x = xs[ei] + 0.5 * hx * (1.0 + gx);
                    let eta = etas[ej] + 0.5 * he * (1.0 + ge);
                    let jac = 0.25 * hx * he;
                    // bilinear shape functions on the reference square
                    let sx = [0.5 * (1.0 - gx), 0.5 * (1.0 + gx)];
                    let se = [0.5 * (1.0 - ge), 0.5 * (1.0 + ge)];
                    let dsx = [-1.0 / hx, 1.0 / hx];
                    let dse = [-1.0 / he, 1.0 / he];
                    let shape = [sx[0] * se[0], sx[1] * se[0], sx[0] * se[1], sx[1] * se[1]];
                    let dx = [
                        dsx[0] * se[0],
                        dsx[1] * se[0],
                        dsx[0] * se[1],
                        dsx[1] * se[1],
                    ];
                    let de = [
                        sx[0] * dse[0],
                        sx[1] * dse[0],
                        sx[0] * dse[1],
                        sx[1] * dse[1],
                    ];
                    let cxx = (coef.gxx)(x, eta);
                    let cxe = (coef.gxe)(x, eta);
                    let cee = (coef.gee)(x, eta);
                    let cp = (coef.pot)(x, eta);
                    let cm = (coef.mass)(x, eta);
                    for r in 0..4 {
                        for c in 0..4 {
                            ke[r][c] += jac
                                * (cxx * dx[r] * dx[c]
                                    + cxe * (dx[r] * de[c] + de[r] * dx[c])
                                    + cee * de[r] * de[c]
                                    + cp * shape[r] * shape[c]);
                        }
                        me[r] += jac * cm * shape[r];
                    }
                }
            }
            // top-edge boundary term on the row ej+1 == ny
            if ej + 1 == ny {
                for &gx in GP.iter() {
                    let x = xs[ei] + 0.5 * hx * (1.0 + gx);
                    let jac = 0.5 * hx;
                    let sx = [0.5 * (1.0 - gx), 0.5 * (1.0 + gx)];
                    let b = (coef.beta_top)(x);
                    // local top nodes are 2 and 3
                    for (r, sr) in [(2usize, sx[0]), (3usize, sx[1])] {
                        for (c, sc) in [(2usize, sx[0]), (3usize, sx[1])] {
                            ke[r][c] += jac * b * sr * sc;
                        }
                    }
                }
            }
            for r in 0..4 {
                let Some(gr) = locals[r] else { continue };
                mass[gr] += me[r];
                for c in 0..4 {
                    let Some(gc) = locals[c] else { continue };
                    if gc <= gr {
                        a.add(gr, gc, ke[r][c]);
                    }
                }
            }
        }
    }
    AssembledForm { a, mass, nx, ny }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::lanczos::lowest_generalized;

    #[test]
    fn flat_laplacian_modes() {
        // -Δ on (0,2)x(0,1), Dirichlet bottom, Neumann elsewhere:
        // eigenvalues ((k+1/2)π)² + (jπ/2)², lowest (π/2)² ≈ 2.4674
        let nx = 24;
        let ny = 24;
        let xs: Vec<f64> = (0..=nx).map(|i| 2.0 * i as f64 / nx as f64).collect();
        let es: Vec<f64> = (0..=ny).map(|j| j as f64 / ny as f64).collect();
        let one = |_: f64, _: f64| 1.0;
        let zero = |_: f64, _: f64| 0.0;
        let coef = FormCoefficients {
            gxx: &one,
            gxe: &zero,
            gee: &one,
            pot: &zero,
            mass: &one,
            beta_top: &|_| 0.0,
        };
        let asm = assemble(&xs, &es, &coef);
        let eigs = lowest_generalized(&asm.a, &asm.mass, 3, 80).unwrap();
        let pi = std::f64::consts::PI;
        let exact = [
            (0.5 * pi) * (0.5 * pi),
            (0.5 * pi) * (0.5 * pi) + (0.5 * pi) * (0.5 * pi),
            (0.5 * pi) * (0.5 * pi) + pi * pi,
        ];
        for (i, &ex) in exact.iter().enumerate() {
            assert!(
                (eigs.values[i] - ex).abs() < 0.02 * ex,
                "mode {i}: {} vs {ex}",
                eigs.values[i]
            );
        }
    }
}
