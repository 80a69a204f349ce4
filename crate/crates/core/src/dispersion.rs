//! The linearized vertical problem γ(·,τ), the dispersion function σ(τ) and
//! its positive root τ*.
//!
//! γ solves γ″ + ω′(U)γ − τ²γ = 0 with γ(0) = 0, γ(d) = 1, obtained by
//! shooting: a fixed-step fourth-order integration of the initial-value
//! problem with one Richardson halving check, then rescaling by γ(d).
//! σ(τ) = κγ′(d,τ) − κ⁻¹ + ω(1) is even in τ (only τ² enters the equation)
//! and strictly increasing for τ > 0.

use crate::error::WaveError;
use crate::numerics::interp::hermite_eval;
use crate::numerics::roots::{bisect_secant, RootTol};
use crate::stream::StreamSolution;
use crate::Result;

/// Fixed step count of the shooting integrator (the check runs at half step).
const IVP_STEPS: usize = 2048;
const RICHARDSON_TOL: f64 = 1e-10;
/// Upper bound of the τ* bracket search.
const TAU_LIMIT: f64 = 1e3;

/// Normalized vertical profile at one τ.
#[derive(Debug, Clone)]
pub struct GammaProfile {
    pub tau: f64,
    pub ys: Vec<f64>,
    pub gamma: Vec<f64>,
    pub gamma_p: Vec<f64>,
    /// γ″ at the nodes, from the equation itself
    pub gamma_pp: Vec<f64>,
    /// γ′(d, τ) after normalization
    pub end_slope: f64,
}

impl GammaProfile {
    fn segment(&self, y: f64) -> (usize, f64) {
        let n = self.ys.len() - 1;
        let d = self.ys[n];
        let yy = y.clamp(0.0, d);
        let h = d / n as f64;
        let i = ((yy / h).floor() as usize).min(n - 1);
        (i, yy)
    }

    /// Dense evaluation by cubic Hermite interpolation (slopes are stored).
    pub fn at(&self, y: f64) -> f64 {
        let (i, yy) = self.segment(y);
        hermite_eval(
            self.ys[i],
            self.ys[i + 1],
            self.gamma[i],
            self.gamma[i + 1],
            self.gamma_p[i],
            self.gamma_p[i + 1],
            yy,
        )
    }

    /// Dense evaluation of γ′ (Hermite on the slope field, using γ″ nodes).
    pub fn slope_at(&self, y: f64) -> f64 {
        let (i, yy) = self.segment(y);
        hermite_eval(
            self.ys[i],
            self.ys[i + 1],
            self.gamma_p[i],
            self.gamma_p[i + 1],
            self.gamma_pp[i],
            self.gamma_pp[i + 1],
            yy,
        )
    }
}

fn rk4_shoot(stream: &StreamSolution, tau: f64, steps: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let d = stream.d();
    let h = d / steps as f64;
    let model = stream.model();
    let coeff = |y: f64| tau * tau - model.omega_deriv(stream.u_at(y));
    let mut g = 0.0_f64;
    let mut gp = 1.0_f64;
    let mut ys = Vec::with_capacity(steps + 1);
    let mut gs = Vec::with_capacity(steps + 1);
    let mut gps = Vec::with_capacity(steps + 1);
    ys.push(0.0);
    gs.push(g);
    gps.push(gp);
    for i in 0..steps {
        let y = i as f64 * h;
        let f = |y: f64, g: f64, gp: f64| (gp, coeff(y) * g);
        let (k1g, k1p) = f(y, g, gp);
        let (k2g, k2p) = f(y + 0.5 * h, g + 0.5 * h * k1g, gp + 0.5 * h * k1p);
        let (k3g, k3p) = f(y + 0.5 * h, g + 0.5 * h * k2g, gp + 0.5 * h * k2p);
        let (k4g, k4p) = f(y + h, g + h * k3g, gp + h * k3p);
        g += h / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
        gp += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        ys.push((i + 1) as f64 * h);
        gs.push(g);
        gps.push(gp);
    }
    (ys, gs, gps)
}

/// Solve the two-point problem γ(0) = 0, γ(d) = 1 by shooting.
pub fn gamma_solve(stream: &StreamSolution, tau: f64) -> Result<GammaProfile> {
    if !tau.is_finite() {
        return Err(WaveError::Domain { what: "tau", value: tau });
    }
    let tau = tau.abs(); // σ and γ are even in τ
    let (ys, gs, gps) = rk4_shoot(stream, tau, IVP_STEPS);
    let (_, gs2, gps2) = rk4_shoot(stream, tau, 2 * IVP_STEPS);
    let scale = gs2.iter().fold(0.0_f64, |a, b| a.max(b.abs())).max(1.0);
    if !scale.is_finite() {
        return Err(WaveError::DiscretizationFailure {
            what: "gamma shooting overflowed (tau·d too large)",
        });
    }
    let end = *gs.last().unwrap();
    let end2 = *gs2.last().unwrap();
    if end2.abs() < 1e-13 * scale {
        return Err(WaveError::ShootingDegeneracy);
    }
    // step-halving check on the normalized end slope (the quantity used by σ)
    let slope = gps.last().unwrap() / end;
    let slope2 = gps2.last().unwrap() / end2;
    if end.abs() < 1e-13 * scale || (slope - slope2).abs() > RICHARDSON_TOL * slope2.abs().max(1.0)
    {
        return Err(WaveError::DiscretizationFailure {
            what: "gamma shooting failed the step-halving check",
        });
    }
    // rescale the fine solution so γ(d) = 1
    let n = IVP_STEPS;
    let model = stream.model();
    let mut gamma = Vec::with_capacity(n + 1);
    let mut gamma_p = Vec::with_capacity(n + 1);
    let mut gamma_pp = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let g = gs2[2 * i] / end2;
        gamma.push(g);
        gamma_p.push(gps2[2 * i] / end2);
        let y = ys[i];
        gamma_pp.push((tau * tau - model.omega_deriv(stream.u_at(y))) * g);
    }
    let end_slope = *gamma_p.last().unwrap();
    Ok(GammaProfile { tau, ys, gamma, gamma_p, gamma_pp, end_slope })
}

/// σ(τ) = κγ′(d,τ) − κ⁻¹ + ω(1).
pub fn sigma(stream: &StreamSolution, tau: f64) -> Result<f64> {
    let g = gamma_solve(stream, tau)?;
    let kappa = stream.kappa();
    Ok(kappa * g.end_slope - 1.0 / kappa + stream.model().omega_unchecked(1.0))
}

/// Both forms of σ: (κγ′ − κ⁻¹ + ω(1), κγ′ − κρ₀); they agree identically.
pub fn sigma_forms(stream: &StreamSolution, tau: f64) -> Result<(f64, f64)> {
    let g = gamma_solve(stream, tau)?;
    let kappa = stream.kappa();
    let a = kappa * g.end_slope - 1.0 / kappa + stream.model().omega_unchecked(1.0);
    let b = kappa * g.end_slope - kappa * stream.rho0();
    Ok((a, b))
}

/// The dispersion root and its wavelength.
#[derive(Debug, Clone, Copy)]
pub struct TauStar {
    pub tau: f64,
    pub lambda0: f64,
}

/// Unique positive root of σ when σ(0) < 0; None for σ(0) ≥ 0.
pub fn tau_star(stream: &StreamSolution) -> Result<Option<TauStar>> {
    let sigma0 = sigma(stream, 0.0)?;
    if sigma0 >= 0.0 {
        return Ok(None);
    }
    // geometric bracket growth ×2 from 1e−3 until the sign flips
    let mut lo = 0.0;
    let mut hi = 1e-3;
    loop {
        let fhi = sigma(stream, hi)?;
        if !fhi.is_finite() {
            return Err(WaveError::BracketFailure {
                what: "sigma evaluation lost finiteness during bracket growth",
            });
        }
        if fhi >= 0.0 {
            let tau = bisect_secant(
                |t| sigma(stream, t).unwrap_or(f64::NAN),
                lo,
                hi,
                RootTol { f_abs: 1e-9 * 1e-3, x_abs: 1e-13 },
            )?;
            // polish on |σ| ≤ 1e−9
            let tau = polish_sigma_root(stream, tau, lo, hi)?;
            return Ok(Some(TauStar { tau, lambda0: 2.0 * std::f64::consts::PI / tau }));
        }
        lo = hi;
        hi *= 2.0;
        if hi > TAU_LIMIT {
            return Err(WaveError::BracketFailure {
                what: "sigma kept the same sign below tau = 1e3",
            });
        }
    }
}

fn polish_sigma_root(stream: &StreamSolution, tau: f64, lo: f64, hi: f64) -> Result<f64> {
    let mut t = tau;
    for _ in 0..8 {
        let f = sigma(stream, t)?;
        if f.abs() <= 1e-9 {
            return Ok(t);
        }
        let h = 1e-6 * t.max(1e-3);
        let fp = (sigma(stream, t + h)? - sigma(stream, t - h)?) / (2.0 * h);
        if fp == 0.0 {
            break;
        }
        let next = t - f / fp;
        if next > lo && next < hi {
            t = next;
        } else {
            break;
        }
    }
    let f = sigma(stream, t)?;
    if f.abs() <= 1e-9 {
        Ok(t)
    } else {
        Err(WaveError::DiscretizationFailure { what: "sigma root polishing stalled above 1e-9" })
    }
}

/// Reported comparison of σ(0) against the stated representation
/// 3(F² − 1)/(2κ), plus the directly derived (F² − 1)/κ.
#[derive(Debug, Clone, Copy)]
pub struct SigmaZeroIdentity {
    pub lhs: f64,
    pub rhs_stated: f64,
    pub defect: f64,
    pub rhs_derived: f64,
}

/// Evaluate σ(0) both ways; reports the defect, asserts nothing.
pub fn sigma_zero_identity(stream: &StreamSolution) -> Result<SigmaZeroIdentity> {
    let lhs = sigma(stream, 0.0)?;
    let f = stream.froude();
    let kappa = stream.kappa();
    let rhs_stated = 3.0 * (f * f - 1.0) / (2.0 * kappa);
    let rhs_derived = (f * f - 1.0) / kappa;
    Ok(SigmaZeroIdentity { lhs, rhs_stated, defect: lhs - rhs_stated, rhs_derived })
}

/// Sampled dispersion data on a τ grid.
#[derive(Debug, Clone)]
pub struct DispersionProfile {
    pub tau_grid: Vec<f64>,
    pub sigma_values: Vec<f64>,
    pub tau_star: Option<f64>,
    pub lambda0: Option<f64>,
    pub sigma0: f64,
    /// profiles kept per grid τ, ordered as tau_grid
    pub gamma_cache: Vec<(f64, GammaProfile)>,
}

/// Build the profile over a nonnegative τ grid.
pub fn profile(stream: &StreamSolution, tau_grid: &[f64], keep_gamma: bool) -> Result<DispersionProfile> {
    let mut sigma_values = Vec::with_capacity(tau_grid.len());
    let mut gamma_cache = Vec::new();
    for &t in tau_grid {
        if t < 0.0 {
            return Err(WaveError::Domain { what: "tau grid must be nonnegative", value: t });
        }
        let g = gamma_solve(stream, t)?;
        let kappa = stream.kappa();
        sigma_values.push(kappa * g.end_slope - 1.0 / kappa + stream.model().omega_unchecked(1.0));
        if keep_gamma {
            gamma_cache.push((t, g));
        }
    }
    let star = tau_star(stream)?;
    let sigma0 = sigma(stream, 0.0)?;
    Ok(DispersionProfile {
        tau_grid: tau_grid.to_vec(),
        sigma_values,
        tau_star: star.map(|t| t.tau),
        lambda0: star.map(|t| t.lambda0),
        sigma0,
        gamma_cache,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::solve_stream;
    use crate::vorticity::VorticityModel;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gamma_closed_form_zero_vorticity() {
        let m = VorticityModel::zero();
        let sol = solve_stream(&m, 2.0, 256).unwrap();
        let g = gamma_solve(&sol, 1.0).unwrap();
        // γ = sinh(y)/sinh(d), γ'(d) = coth(d), d = 0.5
        let d = 0.5_f64;
        assert_abs_diff_eq!(g.end_slope, 1.0 / d.tanh(), epsilon = 1e-9);
        for i in [0, 100, 256] {
            let y = g.ys[i.min(g.ys.len() - 1)];
            assert_abs_diff_eq!(g.gamma[i.min(g.gamma.len() - 1)], y.sinh() / d.sinh(), epsilon = 1e-9);
        }
    }

    #[test]
    fn gamma_linear_at_tau_zero() {
        let m = VorticityModel::zero();
        let sol = solve_stream(&m, 1.3, 256).unwrap();
        let g = gamma_solve(&sol, 0.0).unwrap();
        let d = sol.d();
        assert_abs_diff_eq!(g.end_slope, 1.0 / d, epsilon = 1e-9);
        assert_abs_diff_eq!(g.at(0.37 * d), 0.37, epsilon = 1e-8);
    }

    #[test]
    fn gamma_matches_fine_oracle() {
        // fine-step RK oracle in the test, independent of the module path
        let m = VorticityModel::new(&[1.0, -2.0]).unwrap();
        let sol = solve_stream(&m, 1.5, 512).unwrap();
        let tau = 2.0;
        let g = gamma_solve(&sol, tau).unwrap();
        let steps = 100_000;
        let d = sol.d();
        let h = d / steps as f64;
        let mut gg = 0.0_f64;
        let mut gp = 1.0_f64;
        let coeff = |y: f64| tau * tau - m.omega_deriv(sol.u_at(y));
        for i in 0..steps {
            let y = i as f64 * h;
            let f = |y: f64, g: f64, p: f64| (p, coeff(y) * g);
            let (k1g, k1p) = f(y, gg, gp);
            let (k2g, k2p) = f(y + 0.5 * h, gg + 0.5 * h * k1g, gp + 0.5 * h * k1p);
            let (k3g, k3p) = f(y + 0.5 * h, gg + 0.5 * h * k2g, gp + 0.5 * h * k2p);
            let (k4g, k4p) = f(y + h, gg + h * k3g, gp + h * k3p);
            gg += h / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
            gp += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        }
        assert_abs_diff_eq!(g.end_slope, gp / gg, epsilon = 1e-8);
    }

    #[test]
    fn sigma_zero_closed_forms() {
        let m = VorticityModel::zero();
        let sup = solve_stream(&m, 2.0, 256).unwrap();
        assert_abs_diff_eq!(sigma(&sup, 0.0).unwrap(), 3.5, epsilon = 1e-9);

        let s = 2.0_f64.sqrt() - 1.0;
        let sub = solve_stream(&m, s, 256).unwrap();
        assert_abs_diff_eq!(sigma(&sub, 0.0).unwrap(), s * s - 1.0 / s, epsilon = 1e-9);

        let crit = solve_stream(&m, 1.0, 256).unwrap();
        assert_abs_diff_eq!(sigma(&crit, 0.0).unwrap(), 0.0, epsilon = 1e-8);
    }

    #[test]
    fn sigma_forms_agree() {
        let m = VorticityModel::new(&[0.3, -0.2]).unwrap();
        let sol = solve_stream(&m, 1.4, 256).unwrap();
        let (a, b) = sigma_forms(&sol, 0.7).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-10);
    }

    #[test]
    fn tau_star_examples() {
        let m = VorticityModel::zero();
        let s = 2.0_f64.sqrt() - 1.0;
        let sub = solve_stream(&m, s, 256).unwrap();
        let star = tau_star(&sub).unwrap().unwrap();
        // oracle: bisection on τ coth(τ d) = 1/s² in the test
        let d = sub.d();
        let oracle = bisect_secant(
            |t| s * t / (t * d).tanh() - 1.0 / s,
            1e-6,
            20.0,
            RootTol { f_abs: 1e-13, x_abs: 1e-15 },
        )
        .unwrap();
        assert_abs_diff_eq!(star.tau, oracle, epsilon = 1e-8);
        assert_abs_diff_eq!(star.lambda0, 2.0 * std::f64::consts::PI / oracle, epsilon = 1e-8);

        let sup = solve_stream(&m, 2.0, 256).unwrap();
        assert!(tau_star(&sup).unwrap().is_none());

        let near = solve_stream(&m, 0.999999, 256).unwrap();
        let small = tau_star(&near).unwrap().unwrap();
        // leading order: τ*² = 3(1/s − s²) for ω ≡ 0 as s ↑ 1
        let s = 0.999999_f64;
        let lead = (3.0 * (1.0 / s - s * s)).sqrt();
        assert!((small.tau - lead).abs() < 1e-2 * lead, "near-critical root {}", small.tau);
    }

    #[test]
    fn sigma_zero_identity_reports_defect() {
        let m = VorticityModel::zero();
        let sol = solve_stream(&m, 2.0, 256).unwrap();
        let id = sigma_zero_identity(&sol).unwrap();
        assert_abs_diff_eq!(id.lhs, 3.5, epsilon = 1e-9);
        assert_abs_diff_eq!(id.rhs_stated, 5.25, epsilon = 1e-9);
        assert_abs_diff_eq!(id.defect, -1.75, epsilon = 1e-8);
        assert_abs_diff_eq!(id.rhs_derived, 3.5, epsilon = 1e-9);

        let crit = solve_stream(&m, 1.0, 256).unwrap();
        let idc = sigma_zero_identity(&crit).unwrap();
        assert!(idc.lhs.abs() < 1e-8 && idc.defect.abs() < 1e-8);
    }

    #[test]
    fn sigma_monotone_and_unique_root() {
        let m = VorticityModel::new(&[0.2, -0.6]).unwrap();
        let curve = crate::stream::bernoulli_curve(&m).unwrap();
        let s = 0.5 * (m.s0() + curve.s_c);
        let sol = solve_stream(&m, s, 256).unwrap();
        let star = tau_star(&sol).unwrap().expect("subcritical stream must have a root");
        let grid: Vec<f64> = (0..=200).map(|i| 2.0 * star.tau * i as f64 / 200.0).collect();
        let prof = profile(&sol, &grid, false).unwrap();
        let mut signs = 0;
        for w in prof.sigma_values.windows(2) {
            assert!(w[1] > w[0], "sigma not increasing");
            if w[0] < 0.0 && w[1] >= 0.0 {
                signs += 1;
            }
        }
        assert_eq!(signs, 1);
    }
}
