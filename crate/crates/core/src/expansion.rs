//! Small-amplitude expansion of the hodograph wave branch around a
//! subcritical stream: kernel mode α₀, first corrector (α₁, β₁), the
//! small-wavenumber coefficient c₁, and the solvability pair (λ₂, μ₂).
//!
//! With v₀ = α₀(p)cos(τ*q), the quadratic forcing splits into the mean and
//! the doubled-wavenumber sectors; each corrector profile solves the
//! transformed two-point problem in its sector. The solvability condition of
//! the third-order problem then fixes λ₂, and μ₂ follows from the eigenvalue
//! rate identity. All q-integrals are reduced to exact trigonometric
//! averages; only p-quadratures are numerical.

use crate::dispersion::{gamma_solve, tau_star};
use crate::error::WaveError;
use crate::spectra::transformed_solve_n;
use crate::stream::{h_profile, StreamSolution};
use crate::Result;

/// Default p-resolution of the expansion pipeline.
pub const EXPANSION_N: usize = 2048;

/// Pointwise material data of the kernel mode on a p-grid.
#[derive(Debug, Clone)]
pub struct KernelMode {
    pub p: Vec<f64>,
    pub h: Vec<f64>,
    pub h_p: Vec<f64>,
    pub omega: Vec<f64>,
    pub alpha0: Vec<f64>,
    pub alpha0_p: Vec<f64>,
    pub alpha0_pp: Vec<f64>,
    pub tau_star: f64,
}

/// α₀(p) = γ(H(p); τ*)·H_p with exact derivatives from the γ equation.
pub fn kernel_mode(stream: &StreamSolution) -> Result<KernelMode> {
    kernel_mode_n(stream, EXPANSION_N)
}

pub fn kernel_mode_n(stream: &StreamSolution, n: usize) -> Result<KernelMode> {
    let star = tau_star(stream)?.ok_or(WaveError::NoSolution {
        what: "kernel mode needs a subcritical stream (no dispersion root)",
    })?;
    let ts = star.tau;
    let g = gamma_solve(stream, ts)?;
    let model = stream.model();
    let p: Vec<f64> = (0..=n).map(|j| j as f64 / n as f64).collect();
    let h = h_profile(model, stream.s(), &p)?;
    let mut h_p = Vec::with_capacity(n + 1);
    let mut omega = Vec::with_capacity(n + 1);
    let mut alpha0 = Vec::with_capacity(n + 1);
    let mut alpha0_p = Vec::with_capacity(n + 1);
    let mut alpha0_pp = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let pj = p[j];
        let hp = stream.h_p(pj);
        let y = h[j];
        let om = model.omega_unchecked(pj);
        let omp = model.omega_deriv(pj);
        let gv = g.at(y);
        let gp = g.slope_at(y);
        let gpp = (ts * ts - omp) * gv;
        let hpp = hp * hp * hp * om;
        let hppp = 3.0 * hp.powi(5) * om * om + hp.powi(3) * omp;
        h_p.push(hp);
        omega.push(om);
        alpha0.push(gv * hp);
        alpha0_p.push(gp * hp * hp + gv * hpp);
        alpha0_pp.push(gpp * hp.powi(3) + 3.0 * gp * hp * hpp + gv * hppp);
    }
    Ok(KernelMode { p, h, h_p, omega, alpha0, alpha0_p, alpha0_pp, tau_star: ts })
}

/// Full expansion output.
#[derive(Debug, Clone)]
pub struct ExpansionResult {
    pub kernel: KernelMode,
    pub alpha1: Vec<f64>,
    pub beta1: Vec<f64>,
    pub c1: f64,
    pub lambda2: f64,
    pub mu2: f64,
    pub tau_star: f64,
    /// small-τ* leading order in the stated form (9/8)c₁⟨α₀ₚ²/H_p⟩/(τ*²⟨α₀²/H_p⟩)
    pub lambda2_small_tau: f64,
    /// same with the doubled-sector margin correction: the doubled sector is
    /// nearly singular with margin σ(2τ*) = −3σ(0) + O(τ*⁴), so its singular
    /// response carries −c₁/3 instead of c₁, replacing the 9/8 by 5/8;
    /// equals (5/9)·lambda2_small_tau and matches the full solvability value
    /// to O(τ*²) relative
    pub lambda2_small_tau_corrected: f64,
    /// grid-halving estimate of the corrector solve error
    pub corrector_error_estimate: f64,
}

fn simpson_grid(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    assert!(n % 2 == 0);
    let mut acc = values[0] + values[n];
    for (i, &v) in values.iter().enumerate().take(n).skip(1) {
        acc += v * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

fn central_derivative(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len() - 1;
    let mut out = vec![0.0; n + 1];
    out[0] = (-1.5 * values[0] + 2.0 * values[1] - 0.5 * values[2]) / h;
    out[n] = (1.5 * values[n] - 2.0 * values[n - 1] + 0.5 * values[n - 2]) / h;
    for j in 1..n {
        out[j] = (values[j + 1] - values[j - 1]) / (2.0 * h);
    }
    out
}

struct SectorData {
    phi0_end: f64,
    phi2_end: f64,
    f0: Vec<f64>,
    f2: Vec<f64>,
}

fn sector_forcing(km: &KernelMode) -> SectorData {
    let ts = km.tau_star;
    let n = km.p.len() - 1;
    let mut f0 = Vec::with_capacity(n + 1);
    let mut f2 = Vec::with_capacity(n + 1);
    let mut phi0_end = 0.0;
    let mut phi2_end = 0.0;
    for j in 0..=n {
        let hp = km.h_p[j];
        let a0 = km.alpha0[j];
        let a0p = km.alpha0_p[j];
        let a0pp = km.alpha0_pp[j];
        let om = km.omega[j];
        let hp2 = hp * hp;
        let hp4 = hp2 * hp2;
        // Φ₀ = τ²α₀²/(4H_p²) + (3/4)α₀ₚ²/H_p⁴ and the doubled sector twin
        let phi0 = ts * ts * a0 * a0 / (4.0 * hp2) + 0.75 * a0p * a0p / hp4;
        let phi2 = -ts * ts * a0 * a0 / (4.0 * hp2) + 0.75 * a0p * a0p / hp4;
        if j == n {
            phi0_end = phi0;
            phi2_end = phi2;
        }
        // exact derivatives, using (H_p^{-2})′ = −2ω and (H_p^{-4})′ = −4ω/H_p²
        let dphi_shared = 1.5 * a0p * a0pp / hp4 - 3.0 * a0p * a0p * om / hp2;
        let dphi0 = 0.5 * ts * ts * a0 * a0p / hp2 - 0.5 * ts * ts * a0 * a0 * om + dphi_shared;
        let dphi2 = -0.5 * ts * ts * a0 * a0p / hp2 + 0.5 * ts * ts * a0 * a0 * om + dphi_shared;
        let theta2 = -ts * a0 * a0p / (2.0 * hp2);
        f0.push(-dphi0);
        f2.push(-dphi2 - 2.0 * ts * theta2);
    }
    SectorData { phi0_end, phi2_end, f0, f2 }
}

/// The full expansion at resolution n (must be even).
pub fn expand_n(stream: &StreamSolution, n: usize) -> Result<ExpansionResult> {
    if n % 2 != 0 || n < 128 {
        return Err(WaveError::InvalidInput { what: "expansion resolution must be even, ≥ 128" });
    }
    let km = kernel_mode_n(stream, n)?;
    let ts = km.tau_star;
    let dp = 1.0 / n as f64;
    let sect = sector_forcing(&km);
    let interp = |vals: &[f64], p: f64| -> f64 {
        let t = (p.clamp(0.0, 1.0)) * n as f64;
        let i = (t.floor() as usize).min(n - 1);
        let frac = t - i as f64;
        vals[i] * (1.0 - frac) + vals[i + 1] * frac
    };
    let alpha1 = transformed_solve_n(stream, 0.0, &|p| interp(&sect.f0, p), -sect.phi0_end, n)?;
    let beta1 =
        transformed_solve_n(stream, 2.0 * ts, &|p| interp(&sect.f2, p), -sect.phi2_end, n)?;
    // grid-halving error estimate for the correctors
    let half = n / 2;
    let a1h = transformed_solve_n(stream, 0.0, &|p| interp(&sect.f0, p), -sect.phi0_end, half)?;
    let b1h =
        transformed_solve_n(stream, 2.0 * ts, &|p| interp(&sect.f2, p), -sect.phi2_end, half)?;
    let mut corrector_error_estimate = 0.0_f64;
    for j in 0..=half {
        corrector_error_estimate = corrector_error_estimate
            .max((alpha1[2 * j] - a1h[j]).abs())
            .max((beta1[2 * j] - b1h[j]).abs());
    }

    let a1p = central_derivative(&alpha1, dp);
    let b1p = central_derivative(&beta1, dp);

    // q-averaged solvability integrands (verified trigonometric reduction)
    let mut t2 = Vec::with_capacity(n + 1);
    let mut t3 = Vec::with_capacity(n + 1);
    let mut wgt = Vec::with_capacity(n + 1);
    let mut a0sq_over_hp = Vec::with_capacity(n + 1);
    let mut a0sq = Vec::with_capacity(n + 1);
    let mut a0psq_over_hp = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let hp = km.h_p[j];
        let a0 = km.alpha0[j];
        let a0p = km.alpha0_p[j];
        let b1 = beta1[j];
        let hp2 = hp * hp;
        let hp3 = hp2 * hp;
        let hp4 = hp2 * hp2;
        let hp5 = hp4 * hp;
        t2.push(
            ts * ts * a0 * a0p * b1 / hp2
                + 1.5 * a0p * a0p * a1p[j] / hp4
                + 0.75 * a0p * a0p * b1p[j] / hp4
                + 0.5 * ts * ts * a0 * a0 * a1p[j] / hp2
                - 0.25 * ts * ts * a0 * a0 * b1p[j] / hp2,
        );
        t3.push(0.75 * a0p.powi(4) / hp5 + 0.25 * ts * ts * a0 * a0 * a0p * a0p / hp3);
        wgt.push(ts * ts * a0 * a0 / hp);
        a0sq_over_hp.push(a0 * a0 / hp);
        a0sq.push(a0 * a0);
        a0psq_over_hp.push(a0p * a0p / hp);
    }
    let lambda2 =
        (simpson_grid(&t2, dp) - simpson_grid(&t3, dp)) / simpson_grid(&wgt, dp);
    // eigenvalue rate: −4λ₂τ*²∫γ² dY = μ₂ ∫γ²/U_Y dY, both recast in p
    let mu2 = -4.0 * lambda2 * ts * ts * simpson_grid(&a0sq_over_hp, dp)
        / simpson_grid(&a0sq, dp);
    let froude = stream.froude();
    let c1 = 1.0 / (1.0 - froude.powi(-2)) * 1.5 * simpson_grid(&a0psq_over_hp, dp);
    let lambda2_small_tau =
        9.0 / 8.0 * c1 * simpson_grid(&a0psq_over_hp, dp) / (ts * ts * simpson_grid(&a0sq_over_hp, dp));
    Ok(ExpansionResult {
        kernel: km,
        alpha1,
        beta1,
        c1,
        lambda2,
        mu2,
        tau_star: ts,
        lambda2_small_tau,
        lambda2_small_tau_corrected: 5.0 / 9.0 * lambda2_small_tau,
        corrector_error_estimate,
    })
}

/// Expansion at the default resolution.
pub fn expand(stream: &StreamSolution) -> Result<ExpansionResult> {
    expand_n(stream, EXPANSION_N)
}

/// c₁ alone (quadrature of the stated closed form).
pub fn c1_coefficient(stream: &StreamSolution) -> Result<f64> {
    let km = kernel_mode_n(stream, EXPANSION_N)?;
    let n = km.p.len() - 1;
    let dp = 1.0 / n as f64;
    let vals: Vec<f64> = (0..=n)
        .map(|j| km.alpha0_p[j] * km.alpha0_p[j] / km.h_p[j])
        .collect();
    let froude = stream.froude();
    Ok(1.0 / (1.0 - froude.powi(-2)) * 1.5 * simpson_grid(&vals, dp))
}

/// (λ₂, μ₂) from the full pipeline.
pub fn lambda2_mu2(stream: &StreamSolution) -> Result<(f64, f64)> {
    let e = expand(stream)?;
    Ok((e.lambda2, e.mu2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::{invert_bernoulli, solve_stream};
    use crate::vorticity::VorticityModel;
    use approx::assert_abs_diff_eq;

    fn sub_stream() -> StreamSolution {
        solve_stream(&VorticityModel::zero(), 2.0_f64.sqrt() - 1.0, 512).unwrap()
    }

    #[test]
    fn kernel_mode_closed_form() {
        // ω ≡ 0: α₀(p) = sinh(τ* p/s)/(s sinh(τ* d))
        let sol = sub_stream();
        let s = sol.s();
        let km = kernel_mode_n(&sol, 512).unwrap();
        let ts = km.tau_star;
        let d = sol.d();
        for j in [0usize, 100, 256, 512] {
            let p = km.p[j];
            let exact = (ts * p / s).sinh() / (s * (ts * d).sinh());
            assert!((km.alpha0[j] - exact).abs() < 1e-7 * exact.abs().max(1.0));
        }
        // normalization α₀(1) = 1/κ
        assert_abs_diff_eq!(km.alpha0[512], 1.0 / sol.kappa(), epsilon = 1e-9);
    }

    #[test]
    fn no_root_error_for_supercritical() {
        let sol = solve_stream(&VorticityModel::zero(), 2.0, 256).unwrap();
        assert!(matches!(kernel_mode(&sol), Err(crate::WaveError::NoSolution { .. })));
    }

    #[test]
    fn sign_ledger_near_critical_zero_vorticity() {
        // R = R_c + 0.01 ⇒ c₁ < 0, λ₂ < 0, μ₂ > 0
        let m = VorticityModel::zero();
        let roots = invert_bernoulli(&m, 1.51).unwrap();
        let sol = solve_stream(&m, roots.s_plus.unwrap(), 512).unwrap();
        let e = expand_n(&sol, 1024).unwrap();
        assert!(e.c1 < 0.0);
        assert!(e.lambda2 < 0.0);
        assert!(e.mu2 > 0.0);
        // independently computed reference values (NumPy pipeline):
        // λ₂ ≈ −15.695, μ₂ ≈ 43.80, c₁ ≈ −5.8715 at s₊ = 0.9206011
        assert_abs_diff_eq!(e.lambda2, -15.695, epsilon = 0.05);
        assert_abs_diff_eq!(e.mu2, 43.80, epsilon = 0.15);
        assert_abs_diff_eq!(e.c1, -5.8715, epsilon = 0.01);
    }

    #[test]
    fn far_from_critical_reference() {
        // ω ≡ 0, s = √2 − 1 (steep kernel): reference λ₂ ≈ 182.85, μ₂ ≈ −10291
        let sol = sub_stream();
        let e = expand_n(&sol, 4096).unwrap();
        assert_abs_diff_eq!(e.lambda2, 182.85, epsilon = 1.0);
        assert_abs_diff_eq!(e.mu2, -10291.4, epsilon = 60.0);
        assert!(e.c1 < 0.0);
        // sign(μ₂) = −sign(λ₂)
        assert!(e.mu2 * e.lambda2 < 0.0);
    }

    #[test]
    fn corrector_quadratic_homogeneity() {
        // doubling v₀ scales the quadratic forcing, hence v₁, by 4
        let sol = sub_stream();
        let km = kernel_mode_n(&sol, 512).unwrap();
        let sect = sector_forcing(&km);
        let mut km2 = km.clone();
        for j in 0..km2.alpha0.len() {
            km2.alpha0[j] *= 2.0;
            km2.alpha0_p[j] *= 2.0;
            km2.alpha0_pp[j] *= 2.0;
        }
        let sect2 = sector_forcing(&km2);
        for j in 0..sect.f0.len() {
            assert_abs_diff_eq!(sect2.f0[j], 4.0 * sect.f0[j], epsilon = 1e-9 * (1.0 + sect.f0[j].abs()));
            assert_abs_diff_eq!(sect2.f2[j], 4.0 * sect.f2[j], epsilon = 1e-9 * (1.0 + sect.f2[j].abs()));
        }
        assert_abs_diff_eq!(sect2.phi0_end, 4.0 * sect.phi0_end, epsilon = 1e-9);
    }

    #[test]
    fn small_tau_leading_order_agrees() {
        // τ* ≤ 0.1: the margin-corrected leading order sits within 20% of the
        // full solvability value (observed ≈ 1e−4 relative), and the ratio of
        // the full value to the stated 9/8-form converges to 5/9.
        let m = VorticityModel::zero();
        // τ*² = 3(1/s − s²) ⇒ s for τ* = 0.1
        let target = 0.1_f64;
        let s = crate::numerics::roots::bisect_secant(
            |s: f64| 3.0 * (1.0 / s - s * s) - target * target,
            0.9,
            0.9999999,
            crate::numerics::roots::RootTol::default(),
        )
        .unwrap();
        let sol = solve_stream(&m, s, 512).unwrap();
        let e = expand_n(&sol, 1024).unwrap();
        assert!(e.tau_star <= 0.11, "tau* = {}", e.tau_star);
        let rel = (e.lambda2_small_tau_corrected - e.lambda2).abs() / e.lambda2.abs();
        assert!(rel < 0.2, "corrected leading-order mismatch {rel}");
        let ratio = e.lambda2 / e.lambda2_small_tau;
        assert!((ratio - 5.0 / 9.0).abs() < 0.02, "sector-margin ratio {ratio}");
    }

    #[test]
    fn c1_magnitude_grows_near_critical() {
        let m = VorticityModel::zero();
        let s1 = 0.97;
        let s2 = 0.997;
        let c1a = c1_coefficient(&solve_stream(&m, s1, 512).unwrap()).unwrap();
        let c1b = c1_coefficient(&solve_stream(&m, s2, 512).unwrap()).unwrap();
        assert!(c1a < 0.0 && c1b < 0.0);
        assert!(c1b.abs() > 5.0 * c1a.abs(), "c1 {c1a} vs {c1b}");
    }
}
