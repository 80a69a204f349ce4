//! Physical-plane waves and the spectrum of their linearization: the 2D
//! eigenproblem −Δw − ω′(Ψ)w = μw with w = 0 on the bed, ∂_n w = ρw on the
//! surface and lateral Neumann conditions (evenness at X = 0, truncation or
//! half-period symmetry at X = L).
//!
//! The fluid domain is mapped onto a rectangle by vertical scaling
//! (X, Y) → (X, η = Y/ξ(X)) and the quadratic form is assembled with
//! bilinear elements, so the discrete operator is symmetric by construction
//! with a lumped ξ-weighted mass.

use crate::error::WaveError;
use crate::numerics::fem::{assemble, FormCoefficients};
use crate::numerics::lanczos::{count_below_generalized, lowest_generalized};
use crate::spectra::{interval_spectrum_n, ProblemTag, SpectrumReport};
use crate::stream::StreamSolution;
use crate::Result;

/// How the finite X-extent is meant: a truncated solitary-type domain or one
/// half period of an even periodic wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveKind {
    SolitaryTruncated,
    PeriodicCell,
}

/// Sampled wave in the physical plane on the vertically scaled grid.
#[derive(Debug, Clone)]
pub struct PhysicalWave {
    pub kind: WaveKind,
    /// X nodes on [0, L]
    pub xs: Vec<f64>,
    /// η nodes on [0, 1]
    pub etas: Vec<f64>,
    /// surface elevation per X node
    pub xi: Vec<f64>,
    /// Ψ at (X_i, η_j ξ_i), row-major by i
    pub psi: Vec<f64>,
    pub r: f64,
    /// the limiting / base uniform stream
    pub stream: StreamSolution,
}

const STAGNATION_GUARD: f64 = 1e-8;

impl PhysicalWave {
    #[inline]
    pub fn nx(&self) -> usize {
        self.xs.len() - 1
    }
    #[inline]
    pub fn ny(&self) -> usize {
        self.etas.len() - 1
    }
    #[inline]
    pub fn psi_at(&self, i: usize, j: usize) -> f64 {
        self.psi[i * (self.ny() + 1) + j]
    }
    pub fn length(&self) -> f64 {
        *self.xs.last().unwrap()
    }
    pub fn amplitude(&self) -> f64 {
        let d = self.stream.d();
        self.xi.iter().fold(0.0_f64, |a, &x| a.max((x - d).abs()))
    }

    /// Flat domain of a uniform stream, truncated at `length`. The single
    /// Ψ column is computed by quadrature-refined inversion and replicated.
    pub fn uniform(stream: &StreamSolution, length: f64, nx: usize, ny: usize) -> Self {
        let d = stream.d();
        let xs: Vec<f64> = (0..=nx).map(|i| length * i as f64 / nx as f64).collect();
        let etas: Vec<f64> = (0..=ny).map(|j| j as f64 / ny as f64).collect();
        let column: Vec<f64> = etas.iter().map(|&eta| stream.u_at_refined(eta * d)).collect();
        let mut psi = Vec::with_capacity((nx + 1) * (ny + 1));
        for _ in 0..=nx {
            psi.extend_from_slice(&column);
        }
        PhysicalWave {
            kind: WaveKind::SolitaryTruncated,
            xs,
            etas,
            xi: vec![d; nx + 1],
            psi,
            r: stream.bernoulli(),
            stream: stream.clone(),
        }
    }

    /// Invariants shared by both kinds plus the kind-specific surface bound.
    pub fn validate(&self) -> Result<()> {
        let ny = self.ny();
        for i in 0..=self.nx() {
            if self.psi_at(i, 0).abs() > 1e-8 {
                return Err(WaveError::InternalInconsistency { what: "psi not zero on the bed" });
            }
            if (self.psi_at(i, ny) - 1.0).abs() > 1e-8 {
                return Err(WaveError::InternalInconsistency { what: "psi not one on the surface" });
            }
            for j in 0..ny {
                if self.psi_at(i, j + 1) <= self.psi_at(i, j) {
                    return Err(WaveError::InternalInconsistency {
                        what: "flow not unidirectional (psi not increasing in Y)",
                    });
                }
            }
            if !(self.xi[i] > 0.0) {
                return Err(WaveError::InternalInconsistency { what: "nonpositive surface" });
            }
        }
        if self.kind == WaveKind::SolitaryTruncated {
            let d = self.stream.d();
            for &x in &self.xi {
                if x < d - 1e-9 {
                    return Err(WaveError::InternalInconsistency {
                        what: "solitary surface dips below the limiting depth",
                    });
                }
            }
        }
        Ok(())
    }

    /// Surface derivative ξ′ with the even-symmetry endpoints.
    fn xi_prime(&self) -> Vec<f64> {
        let nx = self.nx();
        let mut out = vec![0.0; nx + 1];
        for i in 1..nx {
            out[i] = (self.xi[i + 1] - self.xi[i - 1]) / (self.xs[i + 1] - self.xs[i - 1]);
        }
        // X = 0 is an evenness axis in both kinds; the far end is an evenness
        // axis for periodic cells and a flat truncation for solitary domains
        out[0] = 0.0;
        out[nx] = match self.kind {
            WaveKind::PeriodicCell => 0.0,
            WaveKind::SolitaryTruncated => {
                (1.5 * self.xi[nx] - 2.0 * self.xi[nx - 1] + 0.5 * self.xi[nx - 2])
                    / (self.xs[nx] - self.xs[nx - 1])
            }
        };
        out
    }
}

/// Exponential tail fit of a solitary-type surface.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    /// slope of log|ξ − d| against X over the tail half
    pub log_slope: f64,
    pub sqrt_nu0: f64,
}

/// Least-squares slope of log|ξ(X) − d| on the tail half of the domain,
/// compared against √ν₀ of the limiting stream. None when the wave is flat
/// to machine precision or the tail touches d exactly.
pub fn decay_fit(wave: &PhysicalWave, nu0: f64) -> Option<DecayFit> {
    if wave.amplitude() < 1e-6 || nu0 <= 0.0 {
        return None;
    }
    let d = wave.stream.d();
    let nx = wave.nx();
    let mut xs = Vec::new();
    let mut logs = Vec::new();
    for i in nx / 2..=nx {
        let dev = (wave.xi[i] - d).abs();
        if dev > 1e-14 {
            xs.push(wave.xs[i]);
            logs.push(dev.ln());
        }
    }
    if xs.len() < 4 {
        return None;
    }
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = logs.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&logs).map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    Some(DecayFit { log_slope: slope, sqrt_nu0: nu0.sqrt() })
}

/// Surface Robin coefficient ρ(X) from one-sided second-order differences of
/// the mapped samples. Reduces to ρ₀ on a uniform stream.
pub fn robin_coefficient(wave: &PhysicalWave) -> Result<Vec<f64>> {
    let nx = wave.nx();
    let ny = wave.ny();
    let de = 1.0 / ny as f64;
    let xip = wave.xi_prime();
    // Ψ_Y and Ψ_YY at the surface per column
    let mut psi_y = vec![0.0; nx + 1];
    let mut psi_yy = vec![0.0; nx + 1];
    for i in 0..=nx {
        let xi = wave.xi[i];
        let p0 = wave.psi_at(i, ny);
        let p1 = wave.psi_at(i, ny - 1);
        let p2 = wave.psi_at(i, ny - 2);
        let p3 = wave.psi_at(i, ny.saturating_sub(3));
        let d_eta = (1.5 * p0 - 2.0 * p1 + 0.5 * p2) / de;
        let dd_eta = if ny >= 3 {
            (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) / (de * de)
        } else {
            (p0 - 2.0 * p1 + p2) / (de * de)
        };
        psi_y[i] = d_eta / xi;
        psi_yy[i] = dd_eta / (xi * xi);
        if psi_y[i] < STAGNATION_GUARD {
            return Err(WaveError::Stagnation { x: wave.xs[i] });
        }
    }
    // tangential derivative of Ψ_Y along the surface
    let mut rho = vec![0.0; nx + 1];
    for i in 0..=nx {
        let dsurf = if i == 0 {
            (psi_y[1] - psi_y[0]) / (wave.xs[1] - wave.xs[0]) * {
                // evenness: odd derivative vanishes
                0.0
            }
        } else if i == nx {
            match wave.kind {
                WaveKind::PeriodicCell => 0.0,
                WaveKind::SolitaryTruncated => {
                    (psi_y[nx] - psi_y[nx - 1]) / (wave.xs[nx] - wave.xs[nx - 1])
                }
            }
        } else {
            (psi_y[i + 1] - psi_y[i - 1]) / (wave.xs[i + 1] - wave.xs[i - 1])
        };
        let psi_x = -xip[i] * psi_y[i];
        let psi_xy = dsurf - xip[i] * psi_yy[i];
        let denom = psi_y[i] * (psi_x * psi_x + psi_y[i] * psi_y[i]).sqrt();
        rho[i] = (1.0 + psi_x * psi_xy + psi_y[i] * psi_yy[i]) / denom;
    }
    Ok(rho)
}

/// Spectrum of the physical-plane linearization with its truncation flag.
#[derive(Debug, Clone)]
pub struct PhysicalSpectrum {
    pub report: SpectrumReport,
    /// set when the lowest eigenvector keeps > 1e−3 of its mass in the last
    /// 10% of the X range (meaningful for truncated solitary domains)
    pub truncation_warning: bool,
}

/// Lowest k eigenvalues of the mapped 2D operator on the wave's own grid.
pub fn physical_spectrum(wave: &PhysicalWave, k: usize) -> Result<PhysicalSpectrum> {
    wave.validate()?;
    let nx = wave.nx();
    let ny = wave.ny();
    let rho = robin_coefficient(wave)?;
    let xip = wave.xi_prime();
    let model = wave.stream.model().clone();
    let xs = wave.xs.clone();
    let etas = wave.etas.clone();
    let xi = wave.xi.clone();
    let psi = wave.psi.clone();
    let hx = xs[1] - xs[0];
    let lerp_x = move |table: &[f64], x: f64| -> f64 {
        let t = (x - xs[0]) / hx;
        let i = (t.floor() as usize).min(nx - 1);
        let frac = (t - i as f64).clamp(0.0, 1.0);
        table[i] * (1.0 - frac) + table[i + 1] * frac
    };
    let de = 1.0 / ny as f64;
    let psi_bilinear = {
        let xi_len = ny + 1;
        move |x: f64, eta: f64| -> f64 {
            let tx = (x / hx).max(0.0);
            let i = (tx.floor() as usize).min(nx - 1);
            let fx = (tx - i as f64).clamp(0.0, 1.0);
            let te = (eta / de).max(0.0);
            let j = (te.floor() as usize).min(ny - 1);
            let fe = (te - j as f64).clamp(0.0, 1.0);
            let v00 = psi[i * xi_len + j];
            let v10 = psi[(i + 1) * xi_len + j];
            let v01 = psi[i * xi_len + j + 1];
            let v11 = psi[(i + 1) * xi_len + j + 1];
            v00 * (1.0 - fx) * (1.0 - fe) + v10 * fx * (1.0 - fe) + v01 * (1.0 - fx) * fe
                + v11 * fx * fe
        }
    };
    let xi_f = {
        let xi = xi.clone();
        let lx = lerp_x.clone();
        move |x: f64| lx(&xi, x)
    };
    let xip_f = {
        let lx = lerp_x.clone();
        let xip = xip.clone();
        move |x: f64| lx(&xip, x)
    };
    let gxx = |x: f64, _e: f64| xi_f(x);
    let gxe = |x: f64, e: f64| -e * xip_f(x) / xi_f(x) * xi_f(x);
    let gee = |x: f64, e: f64| {
        let xiv = xi_f(x);
        let c = e * xip_f(x) / xiv;
        (c * c + 1.0 / (xiv * xiv)) * xiv
    };
    let pot = |x: f64, e: f64| -model.omega_deriv(psi_bilinear(x, e)) * xi_f(x);
    let mass = |x: f64, e: f64| {
        let _ = e;
        xi_f(x)
    };
    let beta = {
        let lx = lerp_x.clone();
        let rho = rho.clone();
        let xipc = xip.clone();
        move |x: f64| {
            let xp = lx(&xipc, x);
            -lx(&rho, x) * (1.0 + xp * xp).sqrt()
        }
    };
    let coef = FormCoefficients {
        gxx: &gxx,
        gxe: &gxe,
        gee: &gee,
        pot: &pot,
        mass: &mass,
        beta_top: &beta,
    };
    let asm = assemble(&wave.xs, &etas, &coef);
    let eigs = lowest_generalized(&asm.a, &asm.mass, k, (3 * k + 40).max(60))?;
    let negative_count = count_below_generalized(&asm.a, &asm.mass, -1e-9)?;
    // eigenpair residual diagnostics
    let mut max_residual = 0.0_f64;
    for (lam, v) in eigs.values.iter().zip(&eigs.vectors) {
        let av = asm.a.matvec(v);
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..v.len() {
            num += (av[i] - lam * asm.mass[i] * v[i]).powi(2);
            den += (asm.mass[i] * v[i]).powi(2);
        }
        max_residual = max_residual.max((num / den).sqrt() / lam.abs().max(1.0));
    }
    // truncation diagnostic on the lowest mode
    let mut truncation_warning = false;
    if let Some(v0) = eigs.vectors.first() {
        let cutoff = 0.9 * wave.length();
        let mut tail = 0.0;
        let mut total = 0.0;
        for i in 0..=nx {
            for j in 1..=ny {
                let dof = asm.dof(i, j);
                let w = asm.mass[dof] * v0[dof] * v0[dof];
                total += w;
                if wave.xs[i] >= cutoff {
                    tail += w;
                }
            }
        }
        truncation_warning = wave.kind == WaveKind::SolitaryTruncated && tail > 1e-3 * total;
    }
    let nu0_reference = interval_spectrum_n(&wave.stream, 1, 512)
        .ok()
        .map(|r| r.eigenvalues[0]);
    let report = SpectrumReport {
        problem_tag: ProblemTag::Physical2D,
        eigenvalues: eigs.values,
        eigenvectors: eigs.vectors,
        grid: Vec::new(),
        negative_count,
        nu0_reference,
        max_residual,
    };
    Ok(PhysicalSpectrum { report, truncation_warning })
}

/// Negative-eigenvalue counts along a list of waves.
pub fn negative_count_series(waves: &[PhysicalWave], k: usize) -> Result<Vec<usize>> {
    waves.iter().map(|w| Ok(physical_spectrum(w, k)?.report.negative_count)).collect()
}

/// Residual of the applied discrete operator on the sampled Ψ_X (which
/// solves the linearized problem with zero eigenvalue in the continuum).
/// Returns (interior residual max, scale) where interior excludes two node
/// columns at each lateral end (Ψ_X is odd, so its natural condition at
/// X = 0 differs from the assembled Neumann one).
pub fn derivative_mode_residual(wave: &PhysicalWave) -> Result<(f64, f64)> {
    let nx = wave.nx();
    let ny = wave.ny();
    if nx < 8 {
        return Err(WaveError::InvalidInput { what: "derivative-mode residual needs nx ≥ 8" });
    }
    let rho = robin_coefficient(wave)?;
    let xip = wave.xi_prime();
    // Ψ_X at the mapped nodes: Ψ̂_X − (ηξ′/ξ)Ψ_η
    let de = 1.0 / ny as f64;
    let mut u = vec![0.0; (nx + 1) * (ny + 1)];
    for i in 0..=nx {
        for j in 0..=ny {
            let hat_x = if i == 0 || i == nx {
                0.0 // evenness of Ψ itself
            } else {
                (wave.psi_at(i + 1, j) - wave.psi_at(i - 1, j))
                    / (wave.xs[i + 1] - wave.xs[i - 1])
            };
            let p_eta = if j == 0 {
                (wave.psi_at(i, 1) - wave.psi_at(i, 0)) / de
            } else if j == ny {
                (wave.psi_at(i, ny) - wave.psi_at(i, ny - 1)) / de
            } else {
                (wave.psi_at(i, j + 1) - wave.psi_at(i, j - 1)) / (2.0 * de)
            };
            let eta = wave.etas[j];
            u[i * (ny + 1) + j] = hat_x - eta * xip[i] / wave.xi[i] * p_eta;
        }
    }
    let _ = rho;
    // pointwise mapped-operator residual on interior nodes, central stencils
    let model = wave.stream.model();
    let hx = wave.xs[1] - wave.xs[0];
    let mut max_res = 0.0_f64;
    let mut scale = 0.0_f64;
    let at = |i: usize, j: usize| u[i * (ny + 1) + j];
    for i in 2..nx - 1 {
        for j in 1..ny {
            let xi = wave.xi[i];
            let eta = wave.etas[j];
            let c = eta * xip[i] / xi;
            // second derivatives in mapped coordinates
            let uxx_hat = (at(i + 1, j) - 2.0 * at(i, j) + at(i - 1, j)) / (hx * hx);
            let uee = (at(i, j + 1) - 2.0 * at(i, j) + at(i, j - 1)) / (de * de);
            let uxe = (at(i + 1, j + 1) - at(i + 1, j - 1) - at(i - 1, j + 1)
                + at(i - 1, j - 1))
                / (4.0 * hx * de);
            let ue = (at(i, j + 1) - at(i, j - 1)) / (2.0 * de);
            // ξ″ via central difference
            let xipp = (wave.xi[i + 1] - 2.0 * wave.xi[i] + wave.xi[i - 1]) / (hx * hx);
            // Δu = u_XX + u_YY with u_X = û_X − cû_η, u_Y = û_η/ξ:
            // u_XX = û_XX − 2cû_Xη + c²û_ηη − (η ξ″/ξ − 2ηξ′²/ξ²)û_η·…
            let dcdx = eta * (xipp / xi - xip[i] * xip[i] / (xi * xi));
            let uxx = uxx_hat - 2.0 * c * uxe + c * c * uee - dcdx * ue
                + c * (xip[i] / xi) * ue;
            let uyy = uee / (xi * xi);
            let res = uxx + uyy + model.omega_deriv(wave.psi_at(i, j)) * at(i, j);
            max_res = max_res.max(res.abs());
            scale = scale.max(at(i, j).abs() / (hx * hx).min(de * de));
        }
    }
    Ok((max_res, scale.max(1e-300)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::solve_stream;
    use crate::vorticity::VorticityModel;
    use approx::assert_abs_diff_eq;

    #[test]
    fn robin_reduces_to_rho0_zero_vorticity() {
        let sol = solve_stream(&VorticityModel::zero(), 2.0, 512).unwrap();
        let wave = PhysicalWave::uniform(&sol, 10.0, 32, 64);
        let rho = robin_coefficient(&wave).unwrap();
        for &r in &rho {
            assert_abs_diff_eq!(r, 0.25, epsilon = 1e-6);
        }
    }

    #[test]
    fn robin_reduces_to_rho0_polynomial_vorticity() {
        // ρ(X) ≡ κ⁻² − ω(1)/κ for any uniform stream
        let m = VorticityModel::new(&[0.4, -0.3]).unwrap();
        let sol = solve_stream(&m, 1.6, 512).unwrap();
        let wave = PhysicalWave::uniform(&sol, 8.0, 24, 512);
        let rho = robin_coefficient(&wave).unwrap();
        let expect = sol.kappa().powi(-2) - m.omega_unchecked(1.0) / sol.kappa();
        for &r in &rho {
            assert!((r - expect).abs() < 2e-6, "rho {r} vs {expect}");
        }
    }

    #[test]
    fn stagnation_guard_fires() {
        let sol = solve_stream(&VorticityModel::zero(), 2.0, 256).unwrap();
        let mut wave = PhysicalWave::uniform(&sol, 5.0, 16, 32);
        // flatten Ψ near the surface of one column
        let ny = wave.ny();
        let crest = 8 * (ny + 1);
        for j in ny - 2..=ny {
            wave.psi[crest + j] = 1.0;
        }
        assert!(matches!(robin_coefficient(&wave), Err(WaveError::Stagnation { .. })));
    }

    #[test]
    fn flat_domain_threshold_matches_interval_eigenvalue() {
        // lowest 2D eigenvalue ≈ ν₀ (lateral constant mode), next ≈ ν₀ + (π/L)²
        let sol = solve_stream(&VorticityModel::zero(), 2.0, 512).unwrap();
        let wave = PhysicalWave::uniform(&sol, 10.0, 96, 96);
        let spec = physical_spectrum(&wave, 3).unwrap();
        let nu0 = spec.report.nu0_reference.unwrap();
        let low = spec.report.eigenvalues[0];
        assert!((low - nu0).abs() < 0.02 * nu0, "{low} vs {nu0}");
        let second = spec.report.eigenvalues[1];
        let expect = nu0 + (std::f64::consts::PI / 10.0).powi(2);
        assert!((second - expect).abs() < 0.02 * expect, "{second} vs {expect}");
        assert_eq!(spec.report.negative_count, 0);
        // the lowest mode is laterally extended: truncation flag is on
        assert!(spec.truncation_warning);
    }

    #[test]
    fn flat_domain_second_order_refinement() {
        let sol = solve_stream(&VorticityModel::zero(), 2.0, 512).unwrap();
        let nu0 = {
            let rep = interval_spectrum_n(&sol, 1, 2048).unwrap();
            rep.eigenvalues[0]
        };
        let mut errors = Vec::new();
        for n in [24usize, 48, 96] {
            let wave = PhysicalWave::uniform(&sol, 10.0, n, n);
            let spec = physical_spectrum(&wave, 1).unwrap();
            errors.push((spec.report.eigenvalues[0] - nu0).abs());
        }
        let r1 = errors[0] / errors[1];
        let r2 = errors[1] / errors[2];
        assert!(r1 > 2.5 && r2 > 2.5, "refinement ratios {r1} {r2}");
    }

    #[test]
    fn validate_rejects_dipping_solitary_surface() {
        let sol = solve_stream(&VorticityModel::zero(), 2.0, 256).unwrap();
        let mut wave = PhysicalWave::uniform(&sol, 5.0, 16, 32);
        wave.xi[3] = sol.d() - 1e-6;
        assert!(wave.validate().is_err());
        wave.kind = WaveKind::PeriodicCell;
        assert!(wave.validate().is_ok());
    }

    #[test]
    fn empty_series() {
        assert!(negative_count_series(&[], 2).unwrap().is_empty());
    }
}
