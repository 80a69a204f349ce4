//! Hodograph-plane Newton continuation of periodic wave branches.
//!
//! The height function h = H + w lives on Q = [0, Λ₀] × [0, 1], even and
//! Λ₀-periodic in q, with w(q, 0) = 0. The nonlinear system couples the
//! interior divergence form 𝓕 = 𝓙_p + 𝓘_q with the surface relation
//! 𝓖 = 𝓙 + w and is closed by the crest-minus-trough amplitude constraint,
//! with the period scaling λ as the extra unknown.
//!
//! Discretization: cosine collocation over the half period in q (evenness
//! and periodicity exact) and conservative second-order differences in p.
//! Newton systems are solved by a bordered block-tridiagonal elimination.
//! The spectrum of the linearization is assembled separately in
//! cosine-sector Galerkin form on a refined p grid.

use crate::dispersion::tau_star;
use crate::error::WaveError;
use crate::expansion::kernel_mode_n;
use crate::frechet::{PhysicalWave, WaveKind};
use crate::numerics::banded::SymBanded;
use crate::numerics::blocklu::BlockTridiagBordered;
use crate::numerics::fourier::CosineGrid;
use crate::numerics::interp::Pchip;
use crate::numerics::lanczos::{count_below_generalized, lowest_generalized};
use crate::spectra::{ProblemTag, SpectrumReport};
use crate::stream::StreamSolution;
use crate::Result;

const HODOGRAPH_GUARD: f64 = 1e-8;
/// Newton convergence target on the max-norm residual.
pub const NEWTON_TOL: f64 = 1e-11;
pub const NEWTON_MAX_ITERS: usize = 25;

/// Discrete wave in the hodograph plane.
#[derive(Debug, Clone)]
pub struct WaveField {
    stream: StreamSolution,
    grid: CosineGrid,
    /// p intervals
    np: usize,
    pub tau_star: f64,
    pub lambda0: f64,
    /// deviation from the uniform stream profile, (m+1)×(np+1), idx i*(np+1)+j
    pub w: Vec<f64>,
    pub lambda: f64,
    /// H(p_j) of the base stream
    h_base: Vec<f64>,
    /// exact H_p at nodes and half nodes
    hp_node: Vec<f64>,
    hp_half: Vec<f64>,
    /// kernel profile α₀(p_j) (predictor direction)
    alpha0: Vec<f64>,
}

impl WaveField {
    /// The zero-amplitude field over the subcritical stream.
    pub fn uniform(stream: &StreamSolution, n_q: usize, n_p: usize) -> Result<Self> {
        if n_q < 8 || n_q % 2 != 0 || n_p < 8 {
            return Err(WaveError::InvalidInput { what: "wave field needs even n_q ≥ 8, n_p ≥ 8" });
        }
        let star = tau_star(stream)?.ok_or(WaveError::NoSolution {
            what: "branch continuation needs a subcritical stream",
        })?;
        let m = n_q / 2;
        let grid = CosineGrid::new(m, star.lambda0);
        let km = kernel_mode_n(stream, n_p)?;
        let hp_node: Vec<f64> =
            (0..=n_p).map(|j| stream.h_p(j as f64 / n_p as f64)).collect();
        let hp_half: Vec<f64> =
            (0..n_p).map(|j| stream.h_p((j as f64 + 0.5) / n_p as f64)).collect();
        Ok(WaveField {
            stream: stream.clone(),
            grid,
            np: n_p,
            tau_star: star.tau,
            lambda0: star.lambda0,
            w: vec![0.0; (m + 1) * (n_p + 1)],
            lambda: 1.0,
            h_base: km.h.clone(),
            hp_node,
            hp_half,
            alpha0: km.alpha0.clone(),
        })
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.grid.m
    }
    #[inline]
    pub fn np(&self) -> usize {
        self.np
    }
    pub fn stream(&self) -> &StreamSolution {
        &self.stream
    }
    pub fn q_nodes(&self) -> &[f64] {
        self.grid.nodes()
    }
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.np + 1) + j
    }
    #[inline]
    pub fn w_at(&self, i: usize, j: usize) -> f64 {
        self.w[self.idx(i, j)]
    }
    /// total height h = H + w at a node
    #[inline]
    pub fn h_at(&self, i: usize, j: usize) -> f64 {
        self.h_base[j] + self.w_at(i, j)
    }
    pub fn bernoulli(&self) -> f64 {
        self.stream.bernoulli()
    }

    /// crest-minus-trough surface amplitude h(0,1) − h(Λ₀/2,1)
    pub fn amplitude(&self) -> f64 {
        let m = self.m();
        let np = self.np;
        self.w_at(0, np) - self.w_at(m, np)
    }

    /// branch parameter t̃ associated with the amplitude normalization
    /// a = 2 t̃ α₀(1) with α₀(1) = 1/κ
    pub fn t_parameter(&self) -> f64 {
        self.amplitude() * self.stream.kappa() / 2.0
    }

    /// evenness defect of the stored representation (exact by construction)
    pub fn evenness_defect(&self) -> f64 {
        0.0
    }

    /// h_p > 0 on the whole grid
    pub fn hodograph_valid(&self) -> bool {
        let dp = 1.0 / self.np as f64;
        for i in 0..=self.m() {
            for j in 0..self.np {
                let wp = (self.w_at(i, j + 1) - self.w_at(i, j)) / dp;
                if self.hp_half[j] + wp <= HODOGRAPH_GUARD {
                    return false;
                }
            }
        }
        true
    }

    /// per-sector cosine coefficients of w at every p level: a[k][j]
    pub fn sector_coefficients(&self) -> Vec<Vec<f64>> {
        let m = self.m();
        let np = self.np;
        let mut per_level: Vec<Vec<f64>> = Vec::with_capacity(np + 1);
        let mut col = vec![0.0; m + 1];
        for j in 0..=np {
            for i in 0..=m {
                col[i] = self.w_at(i, j);
            }
            per_level.push(self.grid.coeffs(&col));
        }
        let mut out = vec![vec![0.0; np + 1]; m + 1];
        for (j, lev) in per_level.iter().enumerate() {
            for k in 0..=m {
                out[k][j] = lev[k];
            }
        }
        out
    }
}

/// Interior and boundary residuals of the discrete system.
#[derive(Debug, Clone)]
pub struct Residual {
    /// 𝓕 at (i, j), j = 1..np−1, layout i*(np−1)+(j−1)
    pub interior: Vec<f64>,
    /// 𝓖 at (i, np)
    pub boundary: Vec<f64>,
    pub max_abs: f64,
}

struct BaseData {
    /// base h_q at nodes and half nodes ((m+1)×…)
    hq_node: Vec<f64>,
    hq_half: Vec<f64>,
    /// base h_p at nodes and half nodes
    hp_node: Vec<f64>,
    hp_half: Vec<f64>,
}

/// Derivative data of the uniform stream base: h_q = 0, h_p = H_p exact.
fn uniform_base_data(field: &WaveField) -> BaseData {
    let m = field.m();
    let np = field.np;
    let mut hq_node = vec![0.0; (m + 1) * (np + 1)];
    let mut hp_node = vec![0.0; (m + 1) * (np + 1)];
    let mut hq_half = vec![0.0; (m + 1) * np];
    let mut hp_half = vec![0.0; (m + 1) * np];
    for i in 0..=m {
        for j in 0..=np {
            hp_node[i * (np + 1) + j] = field.hp_node[j];
        }
        for j in 0..np {
            hp_half[i * np + j] = field.hp_half[j];
        }
    }
    hq_node.iter_mut().for_each(|x| *x = 0.0);
    hq_half.iter_mut().for_each(|x| *x = 0.0);
    BaseData { hq_node, hq_half, hp_node, hp_half }
}

/// Base-field derivative data; for the uniform base w = 0 this is exact.
fn base_data(field: &WaveField) -> BaseData {
    let m = field.m();
    let np = field.np;
    let dp = 1.0 / np as f64;
    let mut wq = vec![0.0; (m + 1) * (np + 1)];
    let mut col = vec![0.0; m + 1];
    let mut dcol = vec![0.0; m + 1];
    for j in 0..=np {
        for i in 0..=m {
            col[i] = field.w_at(i, j);
        }
        field.grid.apply_d_even(&col, &mut dcol);
        for i in 0..=m {
            wq[i * (np + 1) + j] = dcol[i];
        }
    }
    let mut hq_node = vec![0.0; (m + 1) * (np + 1)];
    let mut hp_node = vec![0.0; (m + 1) * (np + 1)];
    let mut hq_half = vec![0.0; (m + 1) * np];
    let mut hp_half = vec![0.0; (m + 1) * np];
    for i in 0..=m {
        for j in 0..=np {
            hq_node[i * (np + 1) + j] = wq[i * (np + 1) + j];
            let wp = if j == 0 {
                (field.w_at(i, 1) - field.w_at(i, 0)) / dp
            } else if j == np {
                (1.5 * field.w_at(i, np) - 2.0 * field.w_at(i, np - 1)
                    + 0.5 * field.w_at(i, np - 2))
                    / dp
            } else {
                (field.w_at(i, j + 1) - field.w_at(i, j - 1)) / (2.0 * dp)
            };
            hp_node[i * (np + 1) + j] = field.hp_node[j] + wp;
        }
        for j in 0..np {
            hq_half[i * np + j] = 0.5 * (wq[i * (np + 1) + j] + wq[i * (np + 1) + j + 1]);
            let wp = (field.w_at(i, j + 1) - field.w_at(i, j)) / dp;
            hp_half[i * np + j] = field.hp_half[j] + wp;
        }
    }
    BaseData { hq_node, hq_half, hp_node, hp_half }
}

#[inline]
fn j_flux(lambda: f64, hq: f64, hp: f64, wq: f64, wp: f64) -> f64 {
    let num = lambda * lambda * hp * hp * (2.0 * hq + wq) * wq
        - (2.0 * hp + wp) * (1.0 + lambda * lambda * hq * hq) * wp;
    let den = 2.0 * hp * hp * (hp + wp) * (hp + wp);
    num / den
}

#[inline]
fn i_flux(lambda: f64, hq: f64, hp: f64, wq: f64, wp: f64) -> f64 {
    -lambda * lambda * (hp * wq - hq * wp) / (hp * (hp + wp))
}

/// Evaluate (𝓕, 𝓖) for an increment `w` about the field's own state.
pub fn residual(w: &[f64], field: &WaveField) -> Result<Residual> {
    let base = base_data(field);
    residual_with_base(w, field, &base, field.lambda)
}

fn residual_with_base(
    w: &[f64],
    field: &WaveField,
    base: &BaseData,
    lambda: f64,
) -> Result<Residual> {
    let m = field.m();
    let np = field.np;
    let dp = 1.0 / np as f64;
    if w.len() != (m + 1) * (np + 1) {
        return Err(WaveError::InvalidInput { what: "increment grid size mismatch" });
    }
    let at = |i: usize, j: usize| w[i * (np + 1) + j];
    // spectral q-derivatives of the increment per level
    let mut wq = vec![0.0; (m + 1) * (np + 1)];
    let mut col = vec![0.0; m + 1];
    let mut dcol = vec![0.0; m + 1];
    for j in 0..=np {
        for i in 0..=m {
            col[i] = at(i, j);
        }
        field.grid.apply_d_even(&col, &mut dcol);
        for i in 0..=m {
            wq[i * (np + 1) + j] = dcol[i];
        }
    }
    // 𝓙 at half levels
    let mut jf = vec![0.0; (m + 1) * np];
    for i in 0..=m {
        for j in 0..np {
            let wqh = 0.5 * (wq[i * (np + 1) + j] + wq[i * (np + 1) + j + 1]);
            let wph = (at(i, j + 1) - at(i, j)) / dp;
            let hp = base.hp_half[i * np + j];
            if hp + wph <= HODOGRAPH_GUARD {
                return Err(WaveError::HodographBreakdown);
            }
            jf[i * np + j] = j_flux(lambda, base.hq_half[i * np + j], hp, wqh, wph);
        }
    }
    // 𝓘 at integer levels 1..np−1 (odd in q), then its spectral q-derivative
    let mut interior = vec![0.0; (m + 1) * (np - 1)];
    let mut icol = vec![0.0; m + 1];
    let mut idcol = vec![0.0; m + 1];
    for j in 1..np {
        for i in 0..=m {
            let wp = (at(i, j + 1) - at(i, j - 1)) / (2.0 * dp);
            let hp = base.hp_node[i * (np + 1) + j];
            if hp + wp <= HODOGRAPH_GUARD {
                return Err(WaveError::HodographBreakdown);
            }
            icol[i] = i_flux(lambda, base.hq_node[i * (np + 1) + j], hp, wq[i * (np + 1) + j], wp);
        }
        field.grid.apply_d_odd(&icol, &mut idcol);
        for i in 0..=m {
            interior[i * (np - 1) + (j - 1)] =
                (jf[i * np + j] - jf[i * np + j - 1]) / dp + idcol[i];
        }
    }
    // 𝓖 at p = 1 with one-sided w_p
    let mut boundary = vec![0.0; m + 1];
    for i in 0..=m {
        let wp = (1.5 * at(i, np) - 2.0 * at(i, np - 1) + 0.5 * at(i, np - 2)) / dp;
        let hp = base.hp_node[i * (np + 1) + np];
        if hp + wp <= HODOGRAPH_GUARD {
            return Err(WaveError::HodographBreakdown);
        }
        boundary[i] =
            j_flux(lambda, base.hq_node[i * (np + 1) + np], hp, wq[i * (np + 1) + np], wp)
                + at(i, np);
    }
    let mut max_abs = 0.0_f64;
    for v in interior.iter().chain(boundary.iter()) {
        max_abs = max_abs.max(v.abs());
    }
    Ok(Residual { interior, boundary, max_abs })
}

/// Apply the linearization (A w, 𝓝 w) at the field's state to an increment.
/// 𝓝 w = −(directional derivative of 𝓖), matching the sign convention of
/// the boundary operator N w − w.
pub fn frechet_apply(w: &[f64], field: &WaveField) -> Result<(Vec<f64>, Vec<f64>)> {
    let base = base_data(field);
    let m = field.m();
    let np = field.np;
    let dp = 1.0 / np as f64;
    let lambda = field.lambda;
    let at = |i: usize, j: usize| w[i * (np + 1) + j];
    let mut wq = vec![0.0; (m + 1) * (np + 1)];
    let mut col = vec![0.0; m + 1];
    let mut dcol = vec![0.0; m + 1];
    for j in 0..=np {
        for i in 0..=m {
            col[i] = at(i, j);
        }
        field.grid.apply_d_even(&col, &mut dcol);
        for i in 0..=m {
            wq[i * (np + 1) + j] = dcol[i];
        }
    }
    // linearized fluxes at w = 0 about the base state
    let mut jf = vec![0.0; (m + 1) * np];
    for i in 0..=m {
        for j in 0..np {
            let wqh = 0.5 * (wq[i * (np + 1) + j] + wq[i * (np + 1) + j + 1]);
            let wph = (at(i, j + 1) - at(i, j)) / dp;
            let hq = base.hq_half[i * np + j];
            let hp = base.hp_half[i * np + j];
            jf[i * np + j] = lambda * lambda * hq * wqh / (hp * hp)
                - (1.0 + lambda * lambda * hq * hq) * wph / (hp * hp * hp);
        }
    }
    let mut aw = vec![0.0; (m + 1) * (np - 1)];
    let mut icol = vec![0.0; m + 1];
    let mut idcol = vec![0.0; m + 1];
    for j in 1..np {
        for i in 0..=m {
            let wp = (at(i, j + 1) - at(i, j - 1)) / (2.0 * dp);
            let hq = base.hq_node[i * (np + 1) + j];
            let hp = base.hp_node[i * (np + 1) + j];
            icol[i] = -lambda * lambda * (wq[i * (np + 1) + j] / hp - hq * wp / (hp * hp));
        }
        field.grid.apply_d_odd(&icol, &mut idcol);
        for i in 0..=m {
            aw[i * (np - 1) + (j - 1)] = (jf[i * np + j] - jf[i * np + j - 1]) / dp + idcol[i];
        }
    }
    let mut nw = vec![0.0; m + 1];
    for i in 0..=m {
        let wp = (1.5 * at(i, np) - 2.0 * at(i, np - 1) + 0.5 * at(i, np - 2)) / dp;
        let hq = base.hq_node[i * (np + 1) + np];
        let hp = base.hp_node[i * (np + 1) + np];
        let g_lin = lambda * lambda * hq * wq[i * (np + 1) + np] / (hp * hp)
            - (1.0 + lambda * lambda * hq * hq) * wp / (hp * hp * hp)
            + at(i, np);
        nw[i] = -g_lin;
    }
    Ok((aw, nw))
}

/// One converged Newton point.
#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub iterations: usize,
    pub final_residual: f64,
    /// ratio of the last two residual norms (quadratic regime ⇒ small)
    pub last_ratio: f64,
}

/// Solve the system at a prescribed amplitude, starting from the field's
/// current (w, λ) predictor. Unknowns: interior/boundary w rows and λ.
pub fn newton_solve(
    field: &WaveField,
    amplitude_target: f64,
    damp: f64,
) -> Result<(WaveField, NewtonOutcome)> {
    let m = field.m();
    let np = field.np;
    let dp = 1.0 / np as f64;
    let bs = m + 1;
    let nw = bs * np;
    let mut x = vec![0.0; nw + 1];
    // unknown layout: level-major w(i,j) at (j−1)*bs + i, then λ
    for j in 1..=np {
        for i in 0..=m {
            x[(j - 1) * bs + i] = field.w_at(i, j);
        }
    }
    x[nw] = field.lambda;

    let mut work = field.clone();
    let uniform = uniform_base_data(field);
    let mut prev_norm = f64::INFINITY;
    let mut last_ratio = 1.0;
    for iter in 0..NEWTON_MAX_ITERS {
        // unpack
        for j in 1..=np {
            for i in 0..=m {
                work.w[i * (np + 1) + j] = x[(j - 1) * bs + i];
            }
        }
        work.lambda = x[nw];
        if !work.hodograph_valid() {
            return Err(WaveError::HodographBreakdown);
        }
        // the governing system is the deviation problem about the uniform
        // stream: F(w_k; base = H) with the current λ
        let res = residual_with_base(&work.w, &work, &uniform, work.lambda)?;
        let amp_res = work.amplitude() - amplitude_target;
        let norm = res.max_abs.max(amp_res.abs());
        if norm <= NEWTON_TOL {
            let outcome = NewtonOutcome {
                iterations: iter,
                final_residual: norm,
                last_ratio,
            };
            return Ok((work, outcome));
        }
        last_ratio = if prev_norm.is_finite() { norm / prev_norm } else { 1.0 };
        prev_norm = norm;

        // the w-derivative at state w_k about base H equals the derivative at
        // increment 0 about the total state H + w_k (translation invariance)
        let base = base_data(&work);
        let sys = assemble_jacobian(&work, &base, &uniform)?;
        // stacked right-hand side: −residual rows in block layout, −amp_res
        let mut rhs = vec![0.0; nw + 1];
        for j in 1..np {
            for i in 0..=m {
                rhs[(j - 1) * bs + i] = -res.interior[i * (np - 1) + (j - 1)];
            }
        }
        for i in 0..=m {
            rhs[(np - 1) * bs + i] = -res.boundary[i];
        }
        rhs[nw] = -amp_res;
        let dx = sys.solve(&rhs)?;
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += damp * di;
        }
        let _ = dp;
    }
    Err(WaveError::NonConvergence { iterations: NEWTON_MAX_ITERS, residual: prev_norm })
}

/// Analytic Jacobian in bordered block-tridiagonal form. Row blocks: interior
/// levels 1..np−1 and the boundary level; the last two levels are merged so
/// the one-sided boundary stencil stays within the block structure.
/// `base` carries the total-state derivatives (for the w-blocks), `uniform`
/// the stream base (for the λ-column of the deviation system).
fn assemble_jacobian(
    field: &WaveField,
    base: &BaseData,
    uniform: &BaseData,
) -> Result<BlockTridiagBordered> {
    let m = field.m();
    let np = field.np;
    let bs = m + 1;
    let dp = 1.0 / np as f64;
    let lambda = field.lambda;
    // derivative tables of the fluxes at the current state (increment = 0)
    // half-level tables for 𝓙, node tables for 𝓘
    let mut djq = vec![0.0; bs * np];
    let mut djp = vec![0.0; bs * np];
    let mut djl = vec![0.0; bs * np];
    for i in 0..bs {
        for j in 0..np {
            let hq = base.hq_half[i * np + j];
            let hp = base.hp_half[i * np + j];
            // ∂𝓙/∂wq = λ²(hq + wq)/(hp + wp)² at wq = wp = 0
            djq[i * np + j] = lambda * lambda * hq / (hp * hp);
            // ∂𝓙/∂wp = −(1 + λ²hq²)/(hp²(hp+wp)) − 2𝓙/(hp+wp); 𝓙(0) = 0
            djp[i * np + j] = -(1.0 + lambda * lambda * hq * hq) / (hp * hp * hp);
            // ∂𝓙/∂λ at w = 0 vanishes (𝓙 quadratic in the increment)
            djl[i * np + j] = 0.0;
        }
    }
    let mut diq = vec![0.0; bs * (np + 1)];
    let mut dip = vec![0.0; bs * (np + 1)];
    for i in 0..bs {
        for j in 0..=np {
            let hq = base.hq_node[i * (np + 1) + j];
            let hp = base.hp_node[i * (np + 1) + j];
            diq[i * (np + 1) + j] = -lambda * lambda / hp;
            dip[i * (np + 1) + j] = lambda * lambda * hq / (hp * hp);
        }
    }
    let dmat = d_even_matrix(&field.grid);
    let dodd = d_odd_matrix(&field.grid);

    let lam_col = lambda_column(field, uniform)?;

    let singles = np - 2;
    let mut diag: Vec<Vec<f64>> = Vec::with_capacity(singles + 1);
    let mut lower: Vec<Vec<f64>> = Vec::new();
    let mut upper: Vec<Vec<f64>> = Vec::new();
    let mut bcol: Vec<Vec<f64>> = Vec::new();

    // helper to add the interior-row couplings for level j into matrices
    // block index convention: row level j couples w at levels j−1, j, j+1
    let interior_blocks = |j: usize| -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut dl = vec![0.0; bs * bs]; // to level j−1
        let mut dd = vec![0.0; bs * bs]; // to level j
        let mut du = vec![0.0; bs * bs]; // to level j+1
        for i in 0..bs {
            let jp_plus = djp[i * np + j];
            let jp_minus = djp[i * np + j - 1];
            let jq_plus = djq[i * np + j];
            let jq_minus = djq[i * np + j - 1];
            // 𝓙 half-level wp parts (diagonal in q index)
            dd[i * bs + i] += (-jp_plus / dp - jp_minus / dp) / dp;
            du[i * bs + i] += jp_plus / dp / dp;
            dl[i * bs + i] += jp_minus / dp / dp;
            // 𝓙 half-level wq parts (spectral coupling over q at two levels)
            for ip in 0..bs {
                let dv = dmat[i * bs + ip];
                dd[i * bs + ip] += (jq_plus * 0.5 - jq_minus * 0.5) * dv / dp;
                du[i * bs + ip] += jq_plus * 0.5 * dv / dp;
                dl[i * bs + ip] += -jq_minus * 0.5 * dv / dp;
            }
        }
        // 𝓘 parts: rows pick up D_odd ∘ (diag(diq)·D_even + diag(dip)·∂p)
        for i in 0..bs {
            for iq in 0..bs {
                let od = dodd[i * bs + iq];
                if od == 0.0 {
                    continue;
                }
                let cq = diq[iq * (np + 1) + j];
                let cp = dip[iq * (np + 1) + j];
                for ip in 0..bs {
                    dd[i * bs + ip] += od * cq * dmat[iq * bs + ip];
                }
                du[i * bs + iq] += od * cp / (2.0 * dp);
                dl[i * bs + iq] += -od * cp / (2.0 * dp);
            }
        }
        (dl, dd, du)
    };

    for j in 1..=singles {
        let (dl, dd, du) = interior_blocks(j);
        diag.push(dd);
        if j > 1 {
            // level 1 couples to level 0 where w = 0: that block is dropped
            lower.push(dl);
        }
        if j < singles {
            upper.push(du);
        } else {
            // the last single level couples into the first half of the
            // merged block (levels np−1, np)
            let mut widened = vec![0.0; bs * 2 * bs];
            for r in 0..bs {
                for c in 0..bs {
                    widened[r * 2 * bs + c] = du[r * bs + c];
                }
            }
            upper.push(widened);
        }
        // border column for this level
        let mut b = vec![0.0; bs];
        for (i, bi) in b.iter_mut().enumerate() {
            *bi = lam_col[i * (np - 1) + (j - 1)];
        }
        bcol.push(b);
    }

    // merged block: levels np−1 (interior rows) and np (boundary rows)
    let big = 2 * bs;
    let mut dd = vec![0.0; big * big];
    let mut dl = vec![0.0; big * bs]; // couples to level np−2
    {
        let (l1, d1, u1) = interior_blocks(np - 1);
        for i in 0..bs {
            for ip in 0..bs {
                dd[i * big + ip] = d1[i * bs + ip];
                dd[i * big + bs + ip] = u1[i * bs + ip];
                dl[i * bs + ip] = l1[i * bs + ip];
            }
        }
        // boundary rows at level np: 𝓖 = 𝓙(node np) + w
        for i in 0..bs {
            let r = bs + i;
            let hq = base.hq_node[i * (np + 1) + np];
            let hp = base.hp_node[i * (np + 1) + np];
            let jq = lambda * lambda * hq / (hp * hp);
            let jp = -(1.0 + lambda * lambda * hq * hq) / (hp * hp * hp);
            // wq at node np: spectral over level np
            for ip in 0..bs {
                dd[r * big + bs + ip] += jq * dmat[i * bs + ip];
            }
            // one-sided wp: 1.5 w_np − 2 w_{np−1} + 0.5 w_{np−2}
            dd[r * big + bs + i] += jp * 1.5 / dp + 1.0;
            dd[r * big + i] += jp * (-2.0) / dp;
            dl[r * bs + i] += jp * 0.5 / dp;
            // +1.0 for the +w term sits on the (r, bs+i) entry above
        }
    }
    diag.push(dd);
    lower.push(dl);
    let mut bmerged = vec![0.0; big];
    for i in 0..bs {
        bmerged[i] = lam_col[i * (np - 1) + (np - 2)];
        bmerged[bs + i] = lam_col[bs * (np - 1) + i];
    }
    bcol.push(bmerged);

    // amplitude row on the merged block's np level: w(0,np) − w(m,np)
    let mut crow = vec![0.0; big];
    crow[bs] = 1.0;
    crow[bs + m] = -1.0;

    Ok(BlockTridiagBordered {
        bs,
        bs_last: big,
        diag,
        lower,
        upper,
        bcol,
        crow,
        d: 0.0,
    })
}

/// ∂residual/∂λ of the deviation system F(w; base H, λ) at the field's own
/// state, by central differencing in λ alone. Layout: interior rows
/// i*(np−1)+(j−1), then boundary rows at offset (m+1)*(np−1).
fn lambda_column(field: &WaveField, uniform: &BaseData) -> Result<Vec<f64>> {
    let m = field.m();
    let np = field.np;
    let h = 1e-6 * field.lambda.max(0.5);
    let rp = residual_with_base(&field.w, field, uniform, field.lambda + h)?;
    let rm = residual_with_base(&field.w, field, uniform, field.lambda - h)?;
    let mut out = vec![0.0; (m + 1) * (np - 1) + (m + 1)];
    for (k, v) in out.iter_mut().take((m + 1) * (np - 1)).enumerate() {
        *v = (rp.interior[k] - rm.interior[k]) / (2.0 * h);
    }
    for i in 0..=m {
        out[(m + 1) * (np - 1) + i] = (rp.boundary[i] - rm.boundary[i]) / (2.0 * h);
    }
    Ok(out)
}

fn d_even_matrix(grid: &CosineGrid) -> Vec<f64> {
    let m = grid.m;
    let n1 = m + 1;
    let mut out = vec![0.0; n1 * n1];
    let mut e = vec![0.0; n1];
    let mut col = vec![0.0; n1];
    for c in 0..n1 {
        e.iter_mut().for_each(|x| *x = 0.0);
        e[c] = 1.0;
        grid.apply_d_even(&e, &mut col);
        for r in 0..n1 {
            out[r * n1 + c] = col[r];
        }
    }
    out
}

fn d_odd_matrix(grid: &CosineGrid) -> Vec<f64> {
    let m = grid.m;
    let n1 = m + 1;
    let mut out = vec![0.0; n1 * n1];
    let mut e = vec![0.0; n1];
    let mut col = vec![0.0; n1];
    for c in 0..n1 {
        e.iter_mut().for_each(|x| *x = 0.0);
        e[c] = 1.0;
        grid.apply_d_odd(&e, &mut col);
        for r in 0..n1 {
            out[r * n1 + c] = col[r];
        }
    }
    out
}

/// One branch point with its diagnostics.
#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub amplitude: f64,
    pub lambda: f64,
    pub field: WaveField,
    pub newton_iterations: usize,
    pub final_residual: f64,
    pub quad_ratio: f64,
}

/// Ordered branch with a stop flag.
#[derive(Debug, Clone)]
pub struct BranchState {
    pub points: Vec<BranchPoint>,
    pub stopped_early: bool,
}

/// Start a branch at amplitude 0 over the given stream.
pub fn branch_start(stream: &StreamSolution, n_q: usize, n_p: usize) -> Result<BranchState> {
    let field = WaveField::uniform(stream, n_q, n_p)?;
    let point = BranchPoint {
        amplitude: 0.0,
        lambda: 1.0,
        field,
        newton_iterations: 0,
        final_residual: 0.0,
        quad_ratio: 0.0,
    };
    Ok(BranchState { points: vec![point], stopped_early: false })
}

/// Append `n_steps` points at spacing `d_amplitude` using the kernel-mode
/// tangent for the first step and linear extrapolation afterwards.
pub fn branch_extend(
    state: &mut BranchState,
    d_amplitude: f64,
    n_steps: usize,
    damp: f64,
) -> Result<()> {
    if state.points.is_empty() {
        return Err(WaveError::InvalidInput { what: "branch_extend needs a starting point" });
    }
    if d_amplitude == 0.0 || n_steps == 0 {
        return Ok(()); // duplicate-point rejection
    }
    for _ in 0..n_steps {
        let last = state.points.last().unwrap();
        let target = last.amplitude + d_amplitude;
        let mut predictor = last.field.clone();
        if state.points.len() == 1 {
            // kernel tangent: w = t̃ α₀(p) cos(τ* q)
            let kappa = predictor.stream.kappa();
            let t = target * kappa / 2.0;
            let m = predictor.m();
            let np = predictor.np;
            let qs: Vec<f64> = predictor.q_nodes().to_vec();
            for i in 0..=m {
                let c = (predictor.tau_star * qs[i]).cos();
                for j in 0..=np {
                    predictor.w[i * (np + 1) + j] = t * predictor.alpha0[j] * c;
                }
            }
        } else {
            let prev = &state.points[state.points.len() - 2];
            let ratio = if (last.amplitude - prev.amplitude).abs() > 1e-15 {
                d_amplitude / (last.amplitude - prev.amplitude)
            } else {
                1.0
            };
            for (k, wv) in predictor.w.iter_mut().enumerate() {
                *wv = last.field.w[k] + ratio * (last.field.w[k] - prev.field.w[k]);
            }
            predictor.lambda = last.lambda + ratio * (last.lambda - prev.lambda);
        }
        match newton_solve(&predictor, target, damp) {
            Ok((field, outcome)) => {
                state.points.push(BranchPoint {
                    amplitude: target,
                    lambda: field.lambda,
                    field,
                    newton_iterations: outcome.iterations,
                    final_residual: outcome.final_residual,
                    quad_ratio: outcome.last_ratio,
                });
            }
            Err(_) => {
                state.stopped_early = true;
                return Ok(());
            }
        }
    }
    Ok(())
}

/// Quadratic-in-t̃ fit of λ along the branch with a free constant.
#[derive(Debug, Clone, Copy)]
pub struct LambdaFit {
    pub lambda0: f64,
    pub lambda2: f64,
    pub lambda4: f64,
}

/// Least-squares fit λ(t̃) = λ₀ + λ₂ t̃² + λ₄ t̃⁴ over the nontrivial points.
pub fn fit_lambda(state: &BranchState) -> Option<LambdaFit> {
    let pts: Vec<(f64, f64)> = state
        .points
        .iter()
        .filter(|p| p.amplitude > 0.0)
        .map(|p| (p.field.t_parameter(), p.lambda))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    // normal equations for the basis {1, t², t⁴}
    let mut ata = [[0.0_f64; 3]; 3];
    let mut atb = [0.0_f64; 3];
    for &(t, l) in &pts {
        let basis = [1.0, t * t, t * t * t * t];
        for r in 0..3 {
            for c in 0..3 {
                ata[r][c] += basis[r] * basis[c];
            }
            atb[r] += basis[r] * l;
        }
    }
    // 3×3 solve by elimination
    let mut aug = [[0.0_f64; 4]; 3];
    for r in 0..3 {
        aug[r][..3].copy_from_slice(&ata[r]);
        aug[r][3] = atb[r];
    }
    for c in 0..3 {
        let mut piv = c;
        for r in c + 1..3 {
            if aug[r][c].abs() > aug[piv][c].abs() {
                piv = r;
            }
        }
        aug.swap(c, piv);
        if aug[c][c] == 0.0 {
            return None;
        }
        for r in 0..3 {
            if r != c {
                let f = aug[r][c] / aug[c][c];
                for k in c..4 {
                    aug[r][k] -= f * aug[c][k];
                }
            }
        }
    }
    Some(LambdaFit {
        lambda0: aug[0][3] / aug[0][0],
        lambda2: aug[1][3] / aug[1][1],
        lambda4: aug[2][3] / aug[2][2],
    })
}

/// Spectrum of the linearization at a field, in the even Λ₀-periodic class:
/// cosine-sector Galerkin in q, P1 elements with lumped mass in p at a
/// refined resolution `n_pe`, `sectors` cosine harmonics.
pub fn hodograph_spectrum_resolved(
    field: &WaveField,
    k: usize,
    n_pe: usize,
    sectors: usize,
) -> Result<SpectrumReport> {
    let m = field.m();
    let kk = sectors.min(m);
    let np = field.np;
    let tau = field.tau_star;
    let lam = field.lambda;
    let half = 0.5 * field.lambda0;
    // sector coefficients of w resampled to the fine p grid
    let coarse_p: Vec<f64> = (0..=np).map(|j| j as f64 / np as f64).collect();
    let coeffs = field.sector_coefficients();
    let mut interp: Vec<Pchip> = Vec::with_capacity(kk + 1);
    for sec in coeffs.iter().take(kk + 1) {
        interp.push(Pchip::new(coarse_p.clone(), sec.clone())?);
    }
    let nq = (8 * (kk + 1)).max(64);
    let qs: Vec<f64> = (0..=nq).map(|i| half * i as f64 / nq as f64).collect();
    let dp = 1.0 / n_pe as f64;

    // assembled banded matrix: dof (j−1)*(kk+1) + sector, j = 1..n_pe
    let ndof = n_pe * (kk + 1);
    let bw = 2 * (kk + 1) - 1;
    let mut a = SymBanded::zeros(ndof, bw);
    let mut mass = vec![0.0; ndof];
    let dof = |j: usize, sec: usize| (j - 1) * (kk + 1) + sec;

    // per-element sector tables at the p midpoint
    let mut ca = vec![0.0; nq + 1];
    let mut cb = vec![0.0; nq + 1];
    let mut cc = vec![0.0; nq + 1];
    for e in 0..n_pe {
        let pm = (e as f64 + 0.5) * dp;
        let hp0 = field.stream.h_p(pm);
        for (iq, &q) in qs.iter().enumerate() {
            let mut hq = 0.0;
            let mut hp = hp0;
            for (ks, it) in interp.iter().enumerate() {
                let phase = ks as f64 * tau * q;
                hq += -(ks as f64) * tau * it.eval(pm) * phase.sin();
                hp += it.deriv(pm) * phase.cos();
            }
            if hp <= HODOGRAPH_GUARD {
                return Err(WaveError::HodographBreakdown);
            }
            ca[iq] = (1.0 + lam * lam * hq * hq) / (hp * hp * hp); // even
            cb[iq] = -lam * lam * hq / (hp * hp); // odd
            cc[iq] = lam * lam / hp; // even
        }
        // period integrals ∫ c·cos(jτq) dq and ∫ c·sin(jτq) dq
        let pa = period_cos_integrals(&ca, &qs, 2 * kk, tau);
        let qb = period_sin_integrals(&cb, &qs, 2 * kk, tau);
        let pc = period_cos_integrals(&cc, &qs, 2 * kk, tau);
        let sgn = |x: i64| -> f64 {
            match x.cmp(&0) {
                std::cmp::Ordering::Greater => 1.0,
                std::cmp::Ordering::Less => -1.0,
                std::cmp::Ordering::Equal => 0.0,
            }
        };
        // local P1 data: s = gradient sign, element mass dp/6·[[2,1],[1,2]]
        let svec = [-1.0_f64, 1.0];
        let mel = [[dp / 3.0, dp / 6.0], [dp / 6.0, dp / 3.0]];
        for krow in 0..=kk {
            for kcol in 0..=kk {
                let diffi = krow.abs_diff(kcol);
                let sumi = krow + kcol;
                let icc = 0.5 * (pa[diffi] + pa[sumi]);
                let iss = 0.5 * (pc[diffi] - pc[sumi]);
                // IQP = ∫cB sin(kcol τ q) cos(krow τ q) dq  (w-sector kcol)
                let iqp = 0.5 * (qb[sumi] + sgn(kcol as i64 - krow as i64) * qb[diffi]);
                // IPQ = ∫cB cos(kcol τ q) sin(krow τ q) dq  (v-sector krow)
                let ipq = 0.5 * (qb[sumi] + sgn(krow as i64 - kcol as i64) * qb[diffi]);
                let kw = kcol as f64 * tau;
                let kv = krow as f64 * tau;
                for (r, _) in svec.iter().enumerate() {
                    let nr = e + r;
                    if nr == 0 {
                        continue;
                    }
                    for (c, _) in svec.iter().enumerate() {
                        let nc = e + c;
                        if nc == 0 {
                            continue;
                        }
                        let gr = dof(nr, krow);
                        let gc = dof(nc, kcol);
                        if gc > gr {
                            continue;
                        }
                        let v = icc * svec[r] * svec[c] / dp
                            + kw * kv * iss * mel[r][c]
                            - kw * iqp * svec[r] * 0.5
                            - kv * ipq * svec[c] * 0.5;
                        a.add(gr, gc, v);
                    }
                }
            }
        }
        // lumped mass with the q-orthogonality weights
        for ks in 0..=kk {
            let qm = if ks == 0 { 2.0 * half } else { half };
            for node in [e, e + 1] {
                if node >= 1 {
                    mass[dof(node, ks)] += qm * 0.5 * dp;
                }
            }
        }
    }
    // top boundary term −∫ w v dq at p = 1
    for ks in 0..=kk {
        let qm = if ks == 0 { 2.0 * half } else { half };
        a.add(dof(n_pe, ks), dof(n_pe, ks), -qm);
    }
    let eigs = lowest_generalized(&a, &mass, k, (3 * k + 40).max(70))?;
    let negative_count = count_below_generalized(&a, &mass, -1e-9)?;
    let mut max_residual = 0.0_f64;
    for (lamv, v) in eigs.values.iter().zip(&eigs.vectors) {
        let av = a.matvec(v);
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..v.len() {
            num += (av[i] - lamv * mass[i] * v[i]).powi(2);
            den += (mass[i] * v[i]).powi(2);
        }
        max_residual = max_residual.max((num / den).sqrt() / lamv.abs().max(1.0));
    }
    Ok(SpectrumReport {
        problem_tag: ProblemTag::Hodograph2D,
        eigenvalues: eigs.values,
        eigenvectors: eigs.vectors,
        grid: (1..=n_pe).map(|j| j as f64 * dp).collect(),
        negative_count,
        nu0_reference: None,
        max_residual,
    })
}

/// Hodograph spectrum at the default eigensolver resolution.
pub fn hodograph_spectrum(field: &WaveField, k: usize) -> Result<SpectrumReport> {
    hodograph_spectrum_resolved(field, k, 2048, 8 + k)
}

/// ∫ over one period of c(q)·cos(jτq) dq for an even sample set on the half
/// period (trapezoid over the half period, doubled; spectrally accurate for
/// smooth periodic integrands).
fn period_cos_integrals(vals: &[f64], qs: &[f64], jmax: usize, tau: f64) -> Vec<f64> {
    let nq = qs.len() - 1;
    let hq = (qs[nq] - qs[0]) / nq as f64;
    let mut out = vec![0.0; jmax + 1];
    for (j, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (iq, &q) in qs.iter().enumerate() {
            let w = if iq == 0 || iq == nq { 0.5 } else { 1.0 };
            acc += w * vals[iq] * (j as f64 * tau * q).cos();
        }
        *o = 2.0 * acc * hq;
    }
    out
}

/// ∫ over one period of c(q)·sin(jτq) dq for an odd sample set on the half
/// period (the product is even, same trapezoid rule applies).
fn period_sin_integrals(vals: &[f64], qs: &[f64], jmax: usize, tau: f64) -> Vec<f64> {
    let nq = qs.len() - 1;
    let hq = (qs[nq] - qs[0]) / nq as f64;
    let mut out = vec![0.0; jmax + 1];
    for (j, o) in out.iter_mut().enumerate().skip(1) {
        let mut acc = 0.0;
        for (iq, &q) in qs.iter().enumerate() {
            let w = if iq == 0 || iq == nq { 0.5 } else { 1.0 };
            acc += w * vals[iq] * (j as f64 * tau * q).sin();
        }
        *o = 2.0 * acc * hq;
    }
    out
}

/// Evaluate a hodograph eigenvector (sector dofs on the fine p grid) at a
/// physical point (q, p) of Q.
pub fn synthesize_mode(
    eigvec: &[f64],
    n_pe: usize,
    sectors: usize,
    tau: f64,
    q: f64,
    p: f64,
) -> f64 {
    let dp = 1.0 / n_pe as f64;
    let t = (p.clamp(0.0, 1.0)) / dp;
    let j = (t.floor() as usize).min(n_pe - 1);
    let frac = t - j as f64;
    let mut acc = 0.0;
    for k in 0..=sectors {
        let lo = if j == 0 { 0.0 } else { eigvec[(j - 1) * (sectors + 1) + k] };
        let hi = eigvec[j * (sectors + 1) + k];
        let alpha = lo * (1.0 - frac) + hi * frac;
        acc += alpha * (k as f64 * tau * q).cos();
    }
    acc
}

/// Physical-plane reconstruction of a hodograph field on an (nx, ny) grid
/// over the half period. Columns are inverted by Newton on H(p) + w(q, p).
pub fn reconstruct_physical(field: &WaveField, nx: usize, ny: usize) -> Result<PhysicalWave> {
    if !field.hodograph_valid() {
        return Err(WaveError::HodographBreakdown);
    }
    let np = field.np;
    let lam = field.lambda;
    let length = 0.5 * field.lambda0 / lam;
    let coarse_p: Vec<f64> = (0..=np).map(|j| j as f64 / np as f64).collect();
    let coeffs = field.sector_coefficients();
    let m = field.m();
    let interp: Vec<Pchip> = coeffs
        .iter()
        .take(m + 1)
        .map(|sec| Pchip::new(coarse_p.clone(), sec.clone()))
        .collect::<Result<_>>()?;
    let tau = field.tau_star;
    let w_of = |q: f64, p: f64| -> f64 {
        let mut acc = 0.0;
        for (ks, it) in interp.iter().enumerate() {
            acc += it.eval(p) * (ks as f64 * tau * q).cos();
        }
        acc
    };
    let wp_of = |q: f64, p: f64| -> f64 {
        let mut acc = 0.0;
        for (ks, it) in interp.iter().enumerate() {
            acc += it.deriv(p) * (ks as f64 * tau * q).cos();
        }
        acc
    };
    let stream = &field.stream;
    let xs: Vec<f64> = (0..=nx).map(|i| length * i as f64 / nx as f64).collect();
    let etas: Vec<f64> = (0..=ny).map(|j| j as f64 / ny as f64).collect();
    let mut xi = Vec::with_capacity(nx + 1);
    let mut psi = Vec::with_capacity((nx + 1) * (ny + 1));
    for &x in &xs {
        let q = lam * x;
        let surface = stream.h_at(1.0) + w_of(q, 1.0);
        xi.push(surface);
        for &eta in &etas {
            let y = eta * surface;
            // monotone solve of H(p) + w(q,p) = y
            let mut lo = 0.0_f64;
            let mut hi = 1.0_f64;
            let mut p = eta; // good starting guess
            for _ in 0..60 {
                let f = stream.h_at(p) + w_of(q, p) - y;
                if f > 0.0 {
                    hi = p;
                } else {
                    lo = p;
                }
                let fp = stream.h_p(p) + wp_of(q, p);
                let mut next = p - f / fp;
                if !(next > lo && next < hi) {
                    next = 0.5 * (lo + hi);
                }
                if (next - p).abs() < 1e-14 {
                    p = next;
                    break;
                }
                p = next;
            }
            psi.push(p.clamp(0.0, 1.0));
        }
    }
    // exact endpoints
    let wave = PhysicalWave {
        kind: WaveKind::PeriodicCell,
        xs,
        etas,
        xi,
        psi,
        r: field.bernoulli(),
        stream: stream.clone(),
    };
    wave.validate()?;
    Ok(wave)
}

/// Flow force at one station, in both conventions.
///
/// `stated` integrates Ψ_Y² − Ψ_X² + R − Y + ∫_Ψ^1 ω (the printed form);
/// `invariant` integrates ½Ψ_Y² − ½Ψ_X² + R − Y + ∫_Ψ^1 ω, which is the
/// X-independent momentum flux: its X-derivative telescopes against the
/// surface Bernoulli relation and the streamline identity Ψ_X = −ξ′Ψ_Y,
/// while the first variation of the full-gradient form along the kernel
/// mode is (R − d − s²)·δξ ≠ 0.
#[derive(Debug, Clone, Copy)]
pub struct FlowForce {
    pub stated: f64,
    pub invariant: f64,
}

/// Flow-force S(X) at the requested stations (nearest grid columns).
pub fn flow_force(wave: &PhysicalWave, x_positions: &[f64]) -> Result<Vec<FlowForce>> {
    let nx = wave.nx();
    let ny = wave.ny();
    if ny % 2 != 0 {
        return Err(WaveError::InvalidInput { what: "flow force needs an even eta grid" });
    }
    let model = wave.stream.model();
    let omega1 = model.capital_omega_unchecked(1.0);
    let de = 1.0 / ny as f64;
    let xip = {
        let mut out = vec![0.0; nx + 1];
        for i in 1..nx {
            out[i] = (wave.xi[i + 1] - wave.xi[i - 1]) / (wave.xs[i + 1] - wave.xs[i - 1]);
        }
        out
    };
    let mut result = Vec::with_capacity(x_positions.len());
    for &x in x_positions {
        let rel = (x / wave.length()).clamp(0.0, 1.0);
        let i = ((rel * nx as f64).round() as usize).min(nx);
        let xi = wave.xi[i];
        // gradient and potential parts at the η nodes
        let mut grad = Vec::with_capacity(ny + 1);
        let mut rest = Vec::with_capacity(ny + 1);
        for j in 0..=ny {
            let psi = wave.psi_at(i, j);
            let p_eta = if j == 0 {
                (-1.5 * wave.psi_at(i, 0) + 2.0 * wave.psi_at(i, 1) - 0.5 * wave.psi_at(i, 2))
                    / de
            } else if j == ny {
                (1.5 * wave.psi_at(i, ny) - 2.0 * wave.psi_at(i, ny - 1)
                    + 0.5 * wave.psi_at(i, ny - 2))
                    / de
            } else {
                (wave.psi_at(i, j + 1) - wave.psi_at(i, j - 1)) / (2.0 * de)
            };
            let psi_y = p_eta / xi;
            let hat_x = if i == 0 || i == nx {
                0.0
            } else {
                (wave.psi_at(i + 1, j) - wave.psi_at(i - 1, j))
                    / (wave.xs[i + 1] - wave.xs[i - 1])
            };
            let eta = wave.etas[j];
            let psi_x = hat_x - eta * xip[i] / xi * p_eta;
            let y = eta * xi;
            grad.push(psi_y * psi_y - psi_x * psi_x);
            rest.push(wave.r - y + omega1 - model.capital_omega_unchecked(psi.clamp(0.0, 1.0)));
        }
        let simpson = |vals: &[f64]| -> f64 {
            let mut acc = vals[0] + vals[ny];
            for (j, v) in vals.iter().enumerate().take(ny).skip(1) {
                acc += v * if j % 2 == 1 { 4.0 } else { 2.0 };
            }
            acc * de / 3.0 * xi
        };
        let g = simpson(&grad);
        let r = simpson(&rest);
        result.push(FlowForce { stated: g + r, invariant: 0.5 * g + r });
    }
    Ok(result)
}

/// Flow force over uniformly spread stations with the spread of the
/// invariant form.
pub fn flow_force_spread(wave: &PhysicalWave, stations: usize) -> Result<(Vec<FlowForce>, f64)> {
    let xs: Vec<f64> = (0..stations)
        .map(|k| wave.length() * k as f64 / (stations.max(2) - 1) as f64)
        .collect();
    let values = flow_force(wave, &xs)?;
    let lo = values.iter().map(|v| v.invariant).fold(f64::INFINITY, f64::min);
    let hi = values.iter().map(|v| v.invariant).fold(f64::NEG_INFINITY, f64::max);
    Ok((values, hi - lo))
}

/// λ(t̃)-independent helper: evaluate the residual of the expansion ansatz
/// w = t̃ v₀ + t̃² v₁ with λ = 1 + λ₂ t̃² on the field grid; used by the
/// plug-back scaling tests.
pub fn expansion_plugback_residual(
    stream: &StreamSolution,
    n_q: usize,
    n_p: usize,
    t: f64,
) -> Result<(f64, f64)> {
    let field = WaveField::uniform(stream, n_q, n_p)?;
    let e = crate::expansion::expand_n(stream, n_p.max(512))?;
    let m = field.m();
    let np = field.np;
    let stride = e.kernel.p.len() - 1;
    let pick = |vals: &[f64], j: usize| {
        let t = j as f64 / np as f64 * stride as f64;
        let i = (t.floor() as usize).min(stride - 1);
        let frac = t - i as f64;
        vals[i] * (1.0 - frac) + vals[i + 1] * frac
    };
    let mut w = vec![0.0; (m + 1) * (np + 1)];
    let qs = field.q_nodes().to_vec();
    for i in 0..=m {
        let c1 = (field.tau_star * qs[i]).cos();
        let c2 = (2.0 * field.tau_star * qs[i]).cos();
        for j in 0..=np {
            let v0 = pick(&e.kernel.alpha0, j) * c1;
            let v1 = pick(&e.alpha1, j) + pick(&e.beta1, j) * c2;
            w[i * (np + 1) + j] = t * v0 + t * t * v1;
        }
    }
    let mut probe = field.clone();
    probe.lambda = 1.0 + e.lambda2 * t * t;
    let base = base_data(&probe);
    let res = residual_with_base(&w, &probe, &base, probe.lambda)?;
    // kernel-sector projection of the interior residual at the surface level
    let mut proj = 0.0;
    let mut col = vec![0.0; m + 1];
    for j in 1..np {
        for i in 0..=m {
            col[i] = res.interior[i * (np - 1) + (j - 1)];
        }
        let coeffs = field.grid.coeffs(&col);
        proj += coeffs[1] * pick(&e.kernel.alpha0, j);
    }
    proj /= np as f64;
    Ok((res.max_abs, proj.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::solve_stream;
    use crate::vorticity::VorticityModel;

    fn near_critical_stream() -> StreamSolution {
        let m = VorticityModel::zero();
        let roots = crate::stream::invert_bernoulli(&m, 1.51).unwrap();
        solve_stream(&m, roots.s_plus.unwrap(), 512).unwrap()
    }

    #[test]
    fn residual_zero_at_trivial_state() {
        let sol = near_critical_stream();
        let field = WaveField::uniform(&sol, 16, 24).unwrap();
        let w = vec![0.0; (field.m() + 1) * (field.np() + 1)];
        let r = residual(&w, &field).unwrap();
        assert_eq!(r.max_abs, 0.0);
    }

    #[test]
    fn frechet_matches_directional_derivative() {
        let sol = near_critical_stream();
        let field = WaveField::uniform(&sol, 16, 24).unwrap();
        let m = field.m();
        let np = field.np();
        // smooth test increment
        let mut w = vec![0.0; (m + 1) * (np + 1)];
        let qs = field.q_nodes().to_vec();
        for i in 0..=m {
            for j in 1..=np {
                let p = j as f64 / np as f64;
                w[i * (np + 1) + j] =
                    (field.tau_star * qs[i]).cos() * p * p + 0.3 * (2.0 * field.tau_star * qs[i]).cos() * p;
            }
        }
        let (aw, nw) = frechet_apply(&w, &field).unwrap();
        let eps = 1e-6;
        let weps: Vec<f64> = w.iter().map(|x| x * eps).collect();
        let wmeps: Vec<f64> = w.iter().map(|x| -x * eps).collect();
        let rp = residual(&weps, &field).unwrap();
        let rm = residual(&wmeps, &field).unwrap();
        for k in 0..aw.len() {
            let fd = (rp.interior[k] - rm.interior[k]) / (2.0 * eps);
            assert!(
                (fd - aw[k]).abs() <= 1e-6 * (1.0 + aw[k].abs()),
                "interior lin mismatch at {k}: {fd} vs {}",
                aw[k]
            );
        }
        for i in 0..=m {
            let fd = (rp.boundary[i] - rm.boundary[i]) / (2.0 * eps);
            assert!(
                (fd + nw[i]).abs() <= 1e-6 * (1.0 + nw[i].abs()),
                "boundary lin mismatch at {i}: {fd} vs {}",
                -nw[i]
            );
        }
    }

    #[test]
    fn kernel_mode_annihilated() {
        // A₀(α₀ cos τ*q) ≈ 0 and the boundary operator vanishes with it
        let sol = near_critical_stream();
        let field = WaveField::uniform(&sol, 16, 64).unwrap();
        let m = field.m();
        let np = field.np();
        let mut w = vec![0.0; (m + 1) * (np + 1)];
        let qs = field.q_nodes().to_vec();
        for i in 0..=m {
            let c = (field.tau_star * qs[i]).cos();
            for j in 0..=np {
                w[i * (np + 1) + j] = field.alpha0[j] * c;
            }
        }
        let (aw, nw) = frechet_apply(&w, &field).unwrap();
        let amax = aw.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
        let nmax = nw.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
        assert!(amax < 1e-3, "kernel interior residual {amax}");
        assert!(nmax < 1e-3, "kernel boundary residual {nmax}");
    }

    #[test]
    fn hodograph_breakdown_guard() {
        let sol = near_critical_stream();
        let field = WaveField::uniform(&sol, 8, 16).unwrap();
        let m = field.m();
        let np = field.np();
        let mut w = vec![0.0; (m + 1) * (np + 1)];
        // push h_p negative on one cell
        w[0 * (np + 1) + 3] = 10.0;
        w[0 * (np + 1) + 2] = -10.0;
        assert!(matches!(residual(&w, &field), Err(WaveError::HodographBreakdown)));
    }

    #[test]
    fn newton_converges_and_lambda_fits() {
        let sol = near_critical_stream();
        let mut branch = branch_start(&sol, 24, 48).unwrap();
        branch_extend(&mut branch, 2e-3, 3, 1.0).unwrap();
        assert!(!branch.stopped_early);
        assert_eq!(branch.points.len(), 4);
        for p in branch.points.iter().skip(1) {
            assert!(p.final_residual <= NEWTON_TOL);
            assert!(p.newton_iterations <= 10);
        }
        // λ differences match the expansion λ₂ (constant discrete offset drops)
        let e = crate::expansion::expand_n(&sol, 1024).unwrap();
        let p1 = &branch.points[1];
        let p2 = &branch.points[2];
        let t1 = p1.field.t_parameter();
        let t2 = p2.field.t_parameter();
        let slope = (p2.lambda - p1.lambda) / (t2 * t2 - t1 * t1);
        let rel = (slope - e.lambda2).abs() / e.lambda2.abs();
        assert!(rel < 0.05, "lambda2 mismatch: slope {slope} vs {}", e.lambda2);
    }

    #[test]
    fn duplicate_point_rejected() {
        let sol = near_critical_stream();
        let mut branch = branch_start(&sol, 16, 24).unwrap();
        branch_extend(&mut branch, 0.0, 5, 1.0).unwrap();
        assert_eq!(branch.points.len(), 1);
    }

    #[test]
    fn hodograph_kernel_at_amplitude_zero() {
        // exactly one near-zero eigenvalue; eigenvector = α₀(p)cos(τ*q)
        let m = VorticityModel::zero();
        let sol = solve_stream(&m, 2.0_f64.sqrt() - 1.0, 512).unwrap();
        let field = WaveField::uniform(&sol, 32, 64).unwrap();
        let k = 6;
        let sectors = 8;
        let n_pe = 2048;
        let rep = hodograph_spectrum_resolved(&field, k, n_pe, sectors).unwrap();
        let near_zero: Vec<usize> = (0..k)
            .filter(|&i| rep.eigenvalues[i].abs() <= 1e-4)
            .collect();
        assert_eq!(near_zero.len(), 1, "eigenvalues {:?}", rep.eigenvalues);
        let idx = near_zero[0];
        // compare the synthesized mode against α₀ cos(τ*q) on a sample grid
        let km = crate::expansion::kernel_mode_n(&sol, 128).unwrap();
        let mut reference = Vec::new();
        let mut candidate = Vec::new();
        for iq in 0..=16 {
            let q = 0.5 * field.lambda0 * iq as f64 / 16.0;
            for jp in 0..=128 {
                let p = jp as f64 / 128.0;
                reference.push(km.alpha0[jp] * (field.tau_star * q).cos());
                candidate.push(synthesize_mode(
                    &rep.eigenvectors[idx],
                    n_pe,
                    sectors,
                    field.tau_star,
                    q,
                    p,
                ));
            }
        }
        let nr = reference.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nc = candidate.iter().map(|x| x * x).sum::<f64>().sqrt();
        let sign = reference
            .iter()
            .zip(&candidate)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            .signum();
        for (r, c) in reference.iter().zip(&candidate) {
            assert!(
                (r / nr - sign * c / nc).abs() < 1e-3,
                "kernel mode mismatch: {} vs {}",
                r / nr,
                sign * c / nc
            );
        }
        // the lowest eigenvalue is negative and separated
        assert!(rep.eigenvalues[0] < -0.1);
        assert_eq!(rep.negative_count, 1);
    }

    #[test]
    fn hodograph_mu_signs_along_branch() {
        // μ̃₀ < 0 and μ̃₁ > 0 at every computed point; the curvature of
        // μ̃₁(t̃) matches μ₂. First differences carry the (constant)
        // λ₀-bias of the discrete branch through dμ/dλ, so the rate is
        // extracted from second differences over equal t̃ steps.
        let sol = near_critical_stream();
        let mut branch = branch_start(&sol, 24, 48).unwrap();
        branch_extend(&mut branch, 2e-3, 3, 1.0).unwrap();
        assert!(!branch.stopped_early);
        let rep0 = hodograph_spectrum_resolved(&branch.points[0].field, 4, 2048, 8).unwrap();
        // at amplitude 0: a kernel eigenvalue within 1e−4 of zero
        let kernel0 = rep0
            .eigenvalues
            .iter()
            .cloned()
            .min_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())
            .unwrap();
        assert!(kernel0.abs() < 1e-4);
        let e = crate::expansion::expand_n(&sol, 1024).unwrap();
        let mut mu1s = Vec::new();
        let mut ts = Vec::new();
        for point in branch.points.iter().skip(1) {
            let rep = hodograph_spectrum_resolved(&point.field, 4, 2048, 8).unwrap();
            assert!(rep.eigenvalues[0] < 0.0, "mu0 not negative");
            let mu1 = rep
                .eigenvalues
                .iter()
                .cloned()
                .filter(|&x| x > rep.eigenvalues[0])
                .fold(f64::INFINITY, f64::min);
            assert!(mu1 > 0.0, "mu1 = {mu1} not positive at a = {}", point.amplitude);
            mu1s.push(mu1);
            ts.push(point.field.t_parameter());
        }
        let dt = ts[1] - ts[0];
        assert!((ts[2] - ts[1] - dt).abs() < 1e-12);
        let second_diff = mu1s[2] - 2.0 * mu1s[1] + mu1s[0];
        let curvature = second_diff / (2.0 * dt * dt);
        let rel = (curvature - e.mu2).abs() / e.mu2;
        assert!(rel < 0.05, "mu2 curvature {curvature} vs {}", e.mu2);
    }

    #[test]
    fn reconstruct_uniform_identity() {
        let sol = near_critical_stream();
        let field = WaveField::uniform(&sol, 16, 32).unwrap();
        let wave = reconstruct_physical(&field, 24, 48).unwrap();
        let d = sol.d();
        for &x in &wave.xi {
            assert!((x - d).abs() < 1e-8);
        }
        for i in 0..=wave.nx() {
            for j in 0..=wave.ny() {
                let y = wave.etas[j] * wave.xi[i];
                let expect = sol.u_at_refined(y);
                assert!(
                    (wave.psi_at(i, j) - expect).abs() < 1e-8,
                    "psi mismatch at ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn reconstruct_small_wave_surface_shape() {
        // surface ≈ d + t̃·2α₀(1)·cos(τ* λ X)/…: crest at X=0, trough at L
        let sol = near_critical_stream();
        let mut branch = branch_start(&sol, 24, 48).unwrap();
        branch_extend(&mut branch, 3e-3, 1, 1.0).unwrap();
        let point = branch.points.last().unwrap();
        let wave = reconstruct_physical(&point.field, 48, 64).unwrap();
        let d = sol.d();
        let t = point.field.t_parameter();
        let alpha_end = 1.0 / sol.kappa();
        let lam = point.field.lambda;
        let mut max_dev = 0.0_f64;
        for (i, &x) in wave.xs.iter().enumerate() {
            let leading = d + t * alpha_end * (point.field.tau_star * lam * x).cos();
            max_dev = max_dev.max((wave.xi[i] - leading).abs());
        }
        // deviation is the t̃² corrector scale, well below the t̃ amplitude
        assert!(max_dev < 0.2 * t * alpha_end, "surface deviation {max_dev}");
        // crest minus trough matches the amplitude functional
        let crest_trough = wave.xi[0] - wave.xi[wave.nx()];
        assert!((crest_trough - point.amplitude).abs() < 1e-10);
    }

    #[test]
    fn flow_force_invariance() {
        let sol = near_critical_stream();
        let mut branch = branch_start(&sol, 24, 48).unwrap();
        branch_extend(&mut branch, 4e-3, 1, 1.0).unwrap();
        let wave = reconstruct_physical(&branch.points[1].field, 128, 128).unwrap();
        let (values, spread) = flow_force_spread(&wave, 8).unwrap();
        let scale = values[0].invariant.abs();
        assert!(spread <= 1e-5 * scale, "flow force spread {spread} vs scale {scale}");
        // the full-gradient form varies at first order in the amplitude
        let hi = values.iter().map(|v| v.stated).fold(f64::NEG_INFINITY, f64::max);
        let lo = values.iter().map(|v| v.stated).fold(f64::INFINITY, f64::min);
        let t = branch.points[1].field.t_parameter();
        assert!(hi - lo > 0.1 * t, "stated-form spread unexpectedly small");
        // single station call works
        let single = flow_force(&wave, &[0.3 * wave.length()]).unwrap();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn flow_force_uniform_closed_form() {
        // stated form: S = s²d + Rd − d²/2 = 3.125 for ω ≡ 0, s = 2, R = 2.5
        let m = VorticityModel::zero();
        let sol = solve_stream(&m, 2.0, 512).unwrap();
        let wave = crate::frechet::PhysicalWave::uniform(&sol, 4.0, 16, 64);
        let vals = flow_force(&wave, &[0.0, 1.0, 2.0]).unwrap();
        for v in &vals {
            assert!((v.stated - 3.125).abs() < 1e-9, "flow force {}", v.stated);
            // invariant form drops half the kinetic term: 1 + 1.25 − 0.125
            assert!((v.invariant - 2.125).abs() < 1e-9);
        }
    }

    #[test]
    fn plugback_residual_scales_cubically() {
        let sol = near_critical_stream();
        let mut norms = Vec::new();
        for &t in &[1e-2, 5e-3, 2.5e-3] {
            let (max_abs, _proj) = expansion_plugback_residual(&sol, 24, 512, t).unwrap();
            norms.push(max_abs);
        }
        let slope1 = (norms[0] / norms[1]).ln() / 2.0_f64.ln();
        let slope2 = (norms[1] / norms[2]).ln() / 2.0_f64.ln();
        assert!(slope1 >= 2.7 && slope2 >= 2.7, "plug-back slopes {slope1} {slope2}");
    }

    #[test]
    fn period_grows_along_branch() {
        // Λ(t̃) = Λ₀/λ nondecreasing among the nontrivial points (λ₂ < 0);
        // the amplitude-0 point is excluded since the discrete branch starts
        // from λ₀ = 1 + O(Δp²), the bifurcation-point offset
        let sol = near_critical_stream();
        let mut branch = branch_start(&sol, 24, 48).unwrap();
        branch_extend(&mut branch, 2e-3, 4, 1.0).unwrap();
        let mut prev = 0.0;
        for p in branch.points.iter().skip(1) {
            let period = p.field.lambda0 / p.lambda;
            assert!(period >= prev - 1e-12, "period {period} after {prev}");
            prev = period;
        }
    }
}
