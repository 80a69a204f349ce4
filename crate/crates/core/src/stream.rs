//! Uniform stream solutions and global constants of the stream family:
//! depth d(s), Bernoulli map 𝓡(s) with its critical values (s_c, R_c, R_0),
//! Froude number routes, the large-F asymptotic defect and the flow-force
//! upper-bound expression.
//!
//! Everything derives from the two quadratures
//!   H(p) = ∫₀^p (s² − 2Ω)^{-1/2} dτ   (depth: d = H(1))
//!   1/F² = ∫₀¹ (s² − 2Ω)^{-3/2} dτ
//! with an endpoint square-root substitution when the radicand vanishes to
//! first order (s = s₀ in cases II/III).

use crate::error::WaveError;
use crate::numerics::interp::Pchip;
use crate::numerics::quad::{integrate, integrate_sqrt_endpoints};
use crate::numerics::roots::{bisect_secant, grow_and_solve, RootTol};
use crate::vorticity::{CaseTag, VorticityModel};
use crate::Result;

/// Quadrature tolerance for the stream integrals.
pub const QUAD_TOL: f64 = 1e-12;
/// Below this distance from s₀ the depth quadrature sets the accuracy flag.
pub const NEAR_CRITICAL_GAP: f64 = 1e-3;

#[inline]
fn radicand(model: &VorticityModel, s: f64, tau: f64) -> f64 {
    s * s - 2.0 * model.capital_omega_unchecked(tau)
}

/// Depth value plus the near-critical accuracy flag.
#[derive(Debug, Clone, Copy)]
pub struct DepthEval {
    pub value: f64,
    pub accuracy_warning: bool,
}

/// d(s) = ∫₀¹ (s² − 2Ω)^{-1/2} dτ for s > s₀.
pub fn depth(model: &VorticityModel, s: f64) -> Result<DepthEval> {
    let s0 = model.s0();
    if !(s > s0) {
        return Err(WaveError::SingularInput { what: "depth requires s > s0", value: s });
    }
    let warning = s - s0 < NEAR_CRITICAL_GAP;
    let f = |tau: f64| radicand(model, s, tau).max(1e-300).powf(-0.5);
    let value = if warning {
        integrate_sqrt_endpoints(f, 0.0, 1.0, QUAD_TOL)
    } else {
        integrate(f, 0.0, 1.0, QUAD_TOL)
    };
    Ok(DepthEval { value, accuracy_warning: warning })
}

/// Depth exactly at s = s₀ (finite only in cases II/III).
pub fn depth_at_s0(model: &VorticityModel) -> Result<f64> {
    if model.case_tag() == CaseTag::CaseI {
        return Err(WaveError::SingularInput { what: "d(s0) diverges in case I", value: model.s0() });
    }
    let s0 = model.s0();
    let f = |tau: f64| radicand(model, s0, tau).max(1e-300).powf(-0.5);
    Ok(integrate_sqrt_endpoints(f, 0.0, 1.0, QUAD_TOL))
}

/// H(p) on an arbitrary increasing grid (cumulative adaptive quadrature).
pub fn h_profile(model: &VorticityModel, s: f64, pgrid: &[f64]) -> Result<Vec<f64>> {
    if !(s > model.s0()) {
        return Err(WaveError::SingularInput { what: "h_profile requires s > s0", value: s });
    }
    let f = |tau: f64| radicand(model, s, tau).max(1e-300).powf(-0.5);
    let mut out = Vec::with_capacity(pgrid.len());
    let mut acc = 0.0;
    let mut prev = 0.0;
    for &p in pgrid {
        acc += integrate(f, prev, p, QUAD_TOL * 1e-2);
        out.push(acc);
        prev = p;
    }
    Ok(out)
}

/// 1/F²(s), the canonical Froude integral in the p variable.
pub fn inv_froude_sq(model: &VorticityModel, s: f64) -> Result<f64> {
    if !(s > model.s0()) {
        return Err(WaveError::SingularInput { what: "froude requires s > s0", value: s });
    }
    Ok(integrate(|tau| radicand(model, s, tau).max(1e-300).powf(-1.5), 0.0, 1.0, QUAD_TOL))
}

/// 𝓡(s) = s²/2 + d(s) − Ω(1).
pub fn bernoulli_of_s(model: &VorticityModel, s: f64) -> Result<f64> {
    let d = depth(model, s)?.value;
    Ok(0.5 * s * s + d - model.capital_omega_unchecked(1.0))
}

/// A uniform stream with its sampled profiles.
#[derive(Debug, Clone)]
pub struct StreamSolution {
    model: VorticityModel,
    s: f64,
    d: f64,
    kappa: f64,
    rho0: f64,
    bernoulli: f64,
    froude: f64,
    /// uniform U-values (= p-values), H(p) samples and U′ samples
    p: Vec<f64>,
    y: Vec<f64>,
    up: Vec<f64>,
    u_of_y: Pchip,
    depth_warning: bool,
}

/// Solve the uniform stream at shear s with `n_samples` profile points.
pub fn solve_stream(model: &VorticityModel, s: f64, n_samples: usize) -> Result<StreamSolution> {
    if n_samples < 16 {
        return Err(WaveError::InvalidInput { what: "n_samples must be at least 16" });
    }
    if !(s > model.s0()) {
        return Err(WaveError::SingularInput { what: "solve_stream requires s > s0", value: s });
    }
    let n = n_samples - 1;
    let p: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let y = h_profile(model, s, &p)?;
    let up: Vec<f64> = p.iter().map(|&pi| radicand(model, s, pi).max(0.0).sqrt()).collect();
    let d = y[n];
    let kappa = up[n];
    let omega1 = model.omega_unchecked(1.0);
    // (F28a) with U'' = −ω(U): ρ₀ = κ⁻² − ω(1)/κ
    let rho0 = 1.0 / (kappa * kappa) - omega1 / kappa;
    let bernoulli = 0.5 * s * s + d - model.capital_omega_unchecked(1.0);
    let froude = inv_froude_sq(model, s)?.powf(-0.5);
    let u_of_y = Pchip::new(y.clone(), p.clone())?;
    let depth_warning = s - model.s0() < NEAR_CRITICAL_GAP;
    Ok(StreamSolution {
        model: model.clone(),
        s,
        d,
        kappa,
        rho0,
        bernoulli,
        froude,
        p,
        y,
        up,
        u_of_y,
        depth_warning,
    })
}

impl StreamSolution {
    pub fn model(&self) -> &VorticityModel {
        &self.model
    }
    pub fn s(&self) -> f64 {
        self.s
    }
    pub fn d(&self) -> f64 {
        self.d
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn rho0(&self) -> f64 {
        self.rho0
    }
    pub fn bernoulli(&self) -> f64 {
        self.bernoulli
    }
    pub fn froude(&self) -> f64 {
        self.froude
    }
    pub fn depth_warning(&self) -> bool {
        self.depth_warning
    }
    /// Sampled (Y, U, U′) triples.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.p.len()).map(move |i| (self.y[i], self.p[i], self.up[i]))
    }
    pub fn p_grid(&self) -> &[f64] {
        &self.p
    }
    pub fn y_grid(&self) -> &[f64] {
        &self.y
    }
    pub fn up_grid(&self) -> &[f64] {
        &self.up
    }

    /// U(Y) by monotone cubic inversion of the H samples.
    pub fn u_at(&self, y: f64) -> f64 {
        self.u_of_y.eval(y.clamp(0.0, self.d)).clamp(0.0, 1.0)
    }

    /// U′(Y) through the identity U′² = s² − 2Ω(U).
    pub fn u_prime_at(&self, y: f64) -> f64 {
        radicand(&self.model, self.s, self.u_at(y)).max(0.0).sqrt()
    }

    /// U(Y) refined by Newton on the exact quadrature H(p) = Y; accurate to
    /// the quadrature tolerance rather than the interpolation error.
    pub fn u_at_refined(&self, y: f64) -> f64 {
        let y = y.clamp(0.0, self.d);
        let mut p = self.u_at(y);
        for _ in 0..4 {
            let hy = integrate(
                |t| radicand(&self.model, self.s, t).max(1e-300).powf(-0.5),
                0.0,
                p,
                1e-13,
            );
            let step = (hy - y) * radicand(&self.model, self.s, p).max(0.0).sqrt();
            p = (p - step).clamp(0.0, 1.0);
            if step.abs() < 1e-14 {
                break;
            }
        }
        p
    }

    /// H_p(p) = (s² − 2Ω(p))^{-1/2}, exact.
    pub fn h_p(&self, p: f64) -> f64 {
        radicand(&self.model, self.s, p).max(1e-300).powf(-0.5)
    }

    /// H(p) interpolated from the stored samples.
    pub fn h_at(&self, p: f64) -> f64 {
        // samples are uniform in p
        let n = self.p.len() - 1;
        let t = (p.clamp(0.0, 1.0)) * n as f64;
        let i = (t.floor() as usize).min(n - 1);
        let frac = t - i as f64;
        crate::numerics::interp::hermite_eval(
            self.p[i],
            self.p[i + 1],
            self.y[i],
            self.y[i + 1],
            self.h_p(self.p[i]),
            self.h_p(self.p[i + 1]),
            self.p[i] + frac * (self.p[i + 1] - self.p[i]),
        )
    }
}

/// Critical constants of the Bernoulli map.
#[derive(Debug, Clone, Copy)]
pub struct BernoulliCurve {
    pub s_c: f64,
    pub r_c: f64,
    /// 𝓡(s₀); +∞ in case I.
    pub r_0: f64,
}

/// Locate s_c (root of F(s) = 1), R_c = 𝓡(s_c) and R_0 = 𝓡(s₀).
pub fn bernoulli_curve(model: &VorticityModel) -> Result<BernoulliCurve> {
    let s0 = model.s0();
    let g = |s: f64| match inv_froude_sq(model, s) {
        Ok(v) => v - 1.0,
        Err(_) => f64::INFINITY,
    };
    // bracket: g > 0 near s0 (F < 1), g < 0 for large s
    let mut delta = 0.5 * s0.max(1.0);
    let mut tries = 0;
    while g(s0 + delta) <= 0.0 {
        delta *= 0.25;
        tries += 1;
        if tries > 200 {
            return Err(WaveError::BracketFailure { what: "no subcritical shear found above s0" });
        }
    }
    let a = s0 + delta;
    let mut b = a + a.max(1.0);
    tries = 0;
    while g(b) >= 0.0 {
        b = s0 + 2.0 * (b - s0);
        tries += 1;
        if tries > 200 {
            return Err(WaveError::BracketFailure { what: "no supercritical shear found" });
        }
    }
    let s_c = bisect_secant(g, a, b, RootTol::default())?;
    let r_c = bernoulli_of_s(model, s_c)?;
    let r_0 = if model.case_tag() == CaseTag::CaseI {
        f64::INFINITY
    } else {
        0.5 * s0 * s0 + depth_at_s0(model)? - model.capital_omega_unchecked(1.0)
    };
    Ok(BernoulliCurve { s_c, r_c, r_0 })
}

/// Solutions of 𝓡(s) = R.
#[derive(Debug, Clone, Copy)]
pub struct BernoulliRoots {
    /// subcritical root in (s₀, s_c); absent when R ≥ R₀
    pub s_plus: Option<f64>,
    /// supercritical root in [s_c, ∞)
    pub s_minus: f64,
}

/// Invert the Bernoulli map at level R ≥ R_c − 1e−12.
pub fn invert_bernoulli(model: &VorticityModel, r: f64) -> Result<BernoulliRoots> {
    let curve = bernoulli_curve(model)?;
    if r < curve.r_c - 1e-12 {
        return Err(WaveError::NoSolution { what: "Bernoulli level below R_c" });
    }
    if (r - curve.r_c).abs() <= 1e-12 {
        return Ok(BernoulliRoots { s_plus: Some(curve.s_c), s_minus: curve.s_c });
    }
    let h = |s: f64| match bernoulli_of_s(model, s) {
        Ok(v) => v - r,
        Err(_) => f64::INFINITY,
    };
    // supercritical: 𝓡 increasing on (s_c, ∞)
    let s_minus = grow_and_solve(h, curve.s_c, curve.s_c.max(0.5), 1e9, RootTol::default())?;
    // subcritical: 𝓡 decreasing on (s0, s_c), sup limit R_0
    let s_plus = if r < curve.r_0 {
        let s0 = model.s0();
        let mut delta = 0.5 * (curve.s_c - s0);
        let mut tries = 0;
        let mut found = None;
        while tries < 200 {
            if h(s0 + delta) > 0.0 {
                found = Some(s0 + delta);
                break;
            }
            delta *= 0.5;
            tries += 1;
        }
        match found {
            Some(a) => Some(bisect_secant(h, a, curve.s_c, RootTol::default())?),
            None => None,
        }
    } else {
        None
    };
    Ok(BernoulliRoots { s_plus, s_minus })
}

/// The three Froude routes and their diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct FroudeChecks {
    /// (Okt25ba): F from ∫₀^d dY/U′² with the sampled/interpolated profile
    pub integral_y: f64,
    /// (Au31a): F from −d′(s)/s with central-difference d′ (h = 1e−5)
    pub derivative_form: f64,
    /// ∫₀¹ H_p³ dp, the canonical route (equals the stored Froude number)
    pub hp_cubed: f64,
    pub max_pairwise: f64,
}

/// Evaluate all three Froude formulas on a stream and report the spread.
pub fn froude_checks(sol: &StreamSolution) -> Result<FroudeChecks> {
    let model = sol.model();
    let s = sol.s();
    let hp_cubed = inv_froude_sq(model, s)?.powf(-0.5);
    let inv_y = integrate(
        |y| {
            let upv = sol.u_prime_at(y);
            1.0 / (upv * upv)
        },
        0.0,
        sol.d(),
        1e-10,
    );
    let integral_y = inv_y.powf(-0.5);
    let h = 1e-5;
    let dp = depth(model, s + h)?.value;
    let dm = depth(model, s - h)?.value;
    let dprime = (dp - dm) / (2.0 * h);
    let derivative_form = (-dprime / s).powf(-0.5);
    let vals = [integral_y, derivative_form, hp_cubed];
    let mut max_pairwise = 0.0_f64;
    for i in 0..3 {
        for j in i + 1..3 {
            max_pairwise = max_pairwise.max((vals[i] - vals[j]).abs());
        }
    }
    Ok(FroudeChecks { integral_y, derivative_form, hp_cubed, max_pairwise })
}

/// Shear with prescribed Froude number F > 1 (supercritical branch).
pub fn shear_at_froude(model: &VorticityModel, f_target: f64) -> Result<f64> {
    if !(f_target > 1.0) {
        return Err(WaveError::InvalidInput { what: "supercritical Froude target must exceed 1" });
    }
    let curve = bernoulli_curve(model)?;
    let g = |s: f64| match inv_froude_sq(model, s) {
        Ok(v) => v.powf(-0.5) - f_target,
        Err(_) => f64::NEG_INFINITY,
    };
    grow_and_solve(g, curve.s_c, curve.s_c.max(1.0), 1e9, RootTol::default())
}

/// One row of the large-F asymptotic check R(F) − F^{4/3}/2.
#[derive(Debug, Clone, Copy)]
pub struct RAsymptoticRow {
    pub froude: f64,
    pub bernoulli: f64,
    pub defect: f64,
}

/// Evaluate R(F) − F^{4/3}/2 on supercritical Froude targets.
pub fn r_asymptotic_check(model: &VorticityModel, f_list: &[f64]) -> Result<Vec<RAsymptoticRow>> {
    let mut out = Vec::with_capacity(f_list.len());
    for &f in f_list {
        let s = shear_at_froude(model, f)?;
        let r = bernoulli_of_s(model, s)?;
        out.push(RAsymptoticRow { froude: f, bernoulli: r, defect: r - 0.5 * f.powf(4.0 / 3.0) });
    }
    Ok(out)
}

/// Pieces of the flow-force upper-bound expression.
#[derive(Debug, Clone, Copy)]
pub struct RUpperBound {
    pub bound: f64,
    pub d_minus: f64,
    pub d_plus: f64,
    pub integral_term: f64,
    /// whether R/2 ≤ bound held (reported, not asserted)
    pub holds: bool,
}

/// Evaluate the bound expression
/// B = d/2 + (d₊−d)⁻¹ ∫₀^d (U_Y² − d⁻²) dY + (d d₊)⁻¹ + (1 + d/(d₊−d)) ω₀
/// at the supercritical stream of level R, with d = d(s₋), d₊ = d(s₊).
pub fn r_upper_bound(model: &VorticityModel, r: f64) -> Result<RUpperBound> {
    let roots = invert_bernoulli(model, r)?;
    let s_plus = roots.s_plus.ok_or(WaveError::Domain {
        what: "r_upper_bound needs R < R_0 (both Bernoulli roots)",
        value: r,
    })?;
    let d_minus = depth(model, roots.s_minus)?.value;
    let d_plus = depth(model, s_plus)?.value;
    if d_plus - d_minus <= 1e-9 {
        return Err(WaveError::InternalInconsistency { what: "d_plus did not exceed d_minus" });
    }
    // ∫₀^d U_Y² dY = ∫₀¹ √(s² − 2Ω) dτ
    let s = roots.s_minus;
    let kinetic = integrate(|tau| radicand(model, s, tau).max(0.0).sqrt(), 0.0, 1.0, QUAD_TOL);
    let integral_term = kinetic - 1.0 / d_minus;
    let omega0 = model.omega0();
    let bound = 0.5 * d_minus
        + integral_term / (d_plus - d_minus)
        + 1.0 / (d_minus * d_plus)
        + (1.0 + d_minus / (d_plus - d_minus)) * omega0;
    Ok(RUpperBound { bound, d_minus, d_plus, integral_term, holds: 0.5 * r <= bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quad::simpson;
    use approx::assert_abs_diff_eq;

    fn zero() -> VorticityModel {
        VorticityModel::zero()
    }

    #[test]
    fn depth_closed_forms() {
        let m = zero();
        assert_abs_diff_eq!(depth(&m, 2.0).unwrap().value, 0.5, epsilon = 1e-11);
        assert_abs_diff_eq!(depth(&m, 1.0).unwrap().value, 1.0, epsilon = 1e-11);
        assert!(depth(&m, 0.0).is_err());
    }

    #[test]
    fn depth_matches_simpson_oracle() {
        let m = VorticityModel::new(&[1.0, -2.0]).unwrap();
        let s = 2.0;
        let oracle = simpson(
            |t| (s * s - 2.0 * m.capital_omega_unchecked(t)).powf(-0.5),
            0.0,
            1.0,
            1_000_000,
        );
        assert_abs_diff_eq!(depth(&m, s).unwrap().value, oracle, epsilon = 1e-9);
    }

    #[test]
    fn near_critical_flag() {
        let m = zero();
        assert!(!depth(&m, 1.0).unwrap().accuracy_warning);
        assert!(depth(&m, 5e-4).unwrap().accuracy_warning);
    }

    #[test]
    fn solve_stream_zero_vorticity() {
        let m = zero();
        let sol = solve_stream(&m, 2.0, 512).unwrap();
        assert_abs_diff_eq!(sol.d(), 0.5, epsilon = 1e-11);
        assert_abs_diff_eq!(sol.kappa(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.rho0(), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.bernoulli(), 2.5, epsilon = 1e-11);
        assert_abs_diff_eq!(sol.froude(), 2.0_f64.powf(1.5), epsilon = 1e-10);
        // U(Y) = 2Y
        for i in 0..=16 {
            let y = 0.5 * i as f64 / 16.0;
            assert_abs_diff_eq!(sol.u_at(y), 2.0 * y, epsilon = 1e-9);
        }
    }

    #[test]
    fn critical_stream_is_unit_froude() {
        let m = zero();
        let sol = solve_stream(&m, 1.0, 256).unwrap();
        assert_abs_diff_eq!(sol.d(), 1.0, epsilon = 1e-11);
        assert_abs_diff_eq!(sol.bernoulli(), 1.5, epsilon = 1e-11);
        assert_abs_diff_eq!(sol.froude(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn stream_invariants_hold() {
        let m = VorticityModel::new(&[0.3, -0.8]).unwrap();
        let sol = solve_stream(&m, 1.7, 256).unwrap();
        let s = sol.s();
        let s0 = m.s0();
        // U(0)=0, U(d)=1, U increasing; U'^2 identity; Okt19a bounds
        let mut prev_u = -1.0;
        for (y, u, upv) in sol.samples() {
            assert!(u > prev_u - 1e-15);
            prev_u = u;
            let id = upv * upv - (s * s - 2.0 * m.capital_omega_unchecked(u));
            assert!(id.abs() < 1e-9, "U'^2 identity defect {id}");
            assert!(upv * upv >= s * s - s0 * s0 - 1e-9);
            assert!(upv * upv <= s * s - 2.0 * m.min_capital_omega() + 1e-9);
            let _ = y;
        }
        // R identity and hodograph inverse consistency
        assert_abs_diff_eq!(
            sol.bernoulli(),
            0.5 * s * s + sol.d() - m.capital_omega_unchecked(1.0),
            epsilon = 1e-10
        );
        for (y, u, _) in sol.samples() {
            assert!((sol.u_at(y) - u).abs() < 1e-8);
        }
        // 1/F² = ∫ H_p³ dp
        let f2 = inv_froude_sq(&m, s).unwrap();
        assert_abs_diff_eq!(sol.froude(), f2.powf(-0.5), epsilon = 1e-12);
    }

    #[test]
    fn bernoulli_curve_zero_vorticity() {
        let m = zero();
        let c = bernoulli_curve(&m).unwrap();
        assert_abs_diff_eq!(c.s_c, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(c.r_c, 1.5, epsilon = 1e-10);
        assert!(c.r_0.is_infinite());
    }

    #[test]
    fn bernoulli_curve_case_three_has_finite_r0() {
        // ω ≡ 1: s0 = √2, d(s0) = √2, R_0 = 1 + √2 − 1 = √2
        let m = VorticityModel::new(&[1.0]).unwrap();
        let c = bernoulli_curve(&m).unwrap();
        assert!(c.r_0.is_finite());
        assert_abs_diff_eq!(c.r_0, 2.0_f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn bernoulli_derivative_identity() {
        // (Ju28a) closed form at s = 2 for ω ≡ 0
        let m = zero();
        let h = 1e-5;
        let rp = (bernoulli_of_s(&m, 2.0 + h).unwrap() - bernoulli_of_s(&m, 2.0 - h).unwrap())
            / (2.0 * h);
        assert_abs_diff_eq!(rp, 1.75, epsilon = 1e-8);
        let f = inv_froude_sq(&m, 2.0).unwrap().powf(-0.5);
        assert_abs_diff_eq!(2.0 * (1.0 - 1.0 / (f * f)), 1.75, epsilon = 1e-10);
    }

    #[test]
    fn invert_bernoulli_examples() {
        let m = zero();
        let r = invert_bernoulli(&m, 2.5).unwrap();
        assert_abs_diff_eq!(r.s_minus, 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.s_plus.unwrap(), 2.0_f64.sqrt() - 1.0, epsilon = 1e-9);

        let c = invert_bernoulli(&m, 1.5).unwrap();
        assert_abs_diff_eq!(c.s_minus, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(c.s_plus.unwrap(), 1.0, epsilon = 1e-9);

        assert!(matches!(invert_bernoulli(&m, 1.4), Err(WaveError::NoSolution { .. })));
    }

    #[test]
    fn froude_routes_agree() {
        let m = VorticityModel::new(&[0.25, 0.5]).unwrap();
        let sol = solve_stream(&m, 1.9, 512).unwrap();
        let checks = froude_checks(&sol).unwrap();
        assert!(checks.max_pairwise < 1e-5, "spread {}", checks.max_pairwise);
    }

    #[test]
    fn froude_subcritical_closed_form() {
        let m = zero();
        let s = 2.0_f64.sqrt() - 1.0;
        let sol = solve_stream(&m, s, 256).unwrap();
        assert_abs_diff_eq!(sol.froude(), s.powf(1.5), epsilon = 1e-10);
        assert!(sol.froude() < 1.0);
    }

    #[test]
    fn asymptotic_defect_zero_vorticity() {
        let m = zero();
        let rows = r_asymptotic_check(&m, &[8.0, 1000.0]).unwrap();
        assert_abs_diff_eq!(rows[0].bernoulli, 8.25, epsilon = 1e-8);
        assert_abs_diff_eq!(rows[0].defect, 0.25, epsilon = 1e-8);
        assert_abs_diff_eq!(rows[1].defect, 0.01, epsilon = 1e-7);
    }

    #[test]
    fn upper_bound_closed_form_pieces() {
        let m = zero();
        let b = r_upper_bound(&m, 2.5).unwrap();
        assert_abs_diff_eq!(b.integral_term, 0.0, epsilon = 1e-9);
        let expect = 0.25 + 1.0 / (0.5 * (2.0_f64.sqrt() + 1.0));
        assert_abs_diff_eq!(b.bound, expect, epsilon = 1e-8);
        // reported, not asserted: for the uniform stream R/2 may exceed B
        assert!(!b.holds);
    }

    #[test]
    fn upper_bound_matches_quadrature_oracle() {
        let m = VorticityModel::new(&[0.1]).unwrap();
        let c = bernoulli_curve(&m).unwrap();
        let b = r_upper_bound(&m, c.r_c + 0.5).unwrap();
        // oracle values computed with an independent fine-Simpson pipeline
        let s_minus = {
            let f = |s: f64| {
                0.5 * s * s
                    + simpson(|t| (s * s - 0.2 * t).powf(-0.5), 0.0, 1.0, 200_000)
                    - 0.1
            };
            bisect_secant(|s| f(s) - (c.r_c + 0.5), c.s_c, 5.0, RootTol::default()).unwrap()
        };
        let d_o = simpson(|t| (s_minus * s_minus - 0.2 * t).powf(-0.5), 0.0, 1.0, 200_000);
        assert_abs_diff_eq!(b.d_minus, d_o, epsilon = 1e-8);
        let kinetic = simpson(|t| (s_minus * s_minus - 0.2 * t).sqrt(), 0.0, 1.0, 200_000);
        let oracle =
            0.5 * d_o + (kinetic - 1.0 / d_o) / (b.d_plus - d_o) + 1.0 / (d_o * b.d_plus)
                + (1.0 + d_o / (b.d_plus - d_o)) * 0.1;
        assert_abs_diff_eq!(b.bound, oracle, epsilon = 1e-8);
    }

    #[test]
    fn depth_strictly_decreasing_and_bernoulli_increasing() {
        for coeffs in [vec![0.0], vec![1.0, -2.0], vec![0.0, 0.3], vec![-0.5]] {
            let m = VorticityModel::new(&coeffs).unwrap();
            let s0 = m.s0();
            let c = bernoulli_curve(&m).unwrap();
            let mut prev_d = f64::INFINITY;
            for i in 0..10 {
                let s = s0 + 0.01 + (10.0 - 0.01) * i as f64 / 9.0;
                let d = depth(&m, s).unwrap().value;
                assert!(d < prev_d);
                prev_d = d;
            }
            let mut prev_r = bernoulli_of_s(&m, c.s_c + 1e-3).unwrap();
            let mut prev_f = 0.0;
            for i in 1..10 {
                let s = c.s_c + 1e-3 + i as f64;
                let r = bernoulli_of_s(&m, s).unwrap();
                let f = inv_froude_sq(&m, s).unwrap().powf(-0.5);
                assert!(r > prev_r);
                assert!(f > prev_f);
                prev_r = r;
                prev_f = f;
            }
        }
    }

    #[test]
    fn hodograph_profile_residuals() {
        // H_pp − H_p³ ω = 0 (fine-grid FD residual on exact H_p samples)
        // and the surface relation 1/(2H_p²(1)) + H(1) = R
        for coeffs in [vec![0.0], vec![1.0, -2.0]] {
            let m = VorticityModel::new(&coeffs).unwrap();
            let s = 2.0;
            let n = 2048;
            let dp = 1.0 / n as f64;
            let sol = solve_stream(&m, s, 64).unwrap();
            for j in 1..n {
                let p = j as f64 * dp;
                let hp_m = sol.h_p(p - dp);
                let hp_p = sol.h_p(p + dp);
                let hpp = (hp_p - hp_m) / (2.0 * dp);
                let res = hpp - sol.h_p(p).powi(3) * m.omega_unchecked(p);
                assert!(res.abs() < 1e-7, "H ode residual {res} at p={p}");
            }
            let hp1 = sol.h_p(1.0);
            let rel = 1.0 / (2.0 * hp1 * hp1) + sol.d() - sol.bernoulli();
            assert!(rel.abs() < 1e-9);
        }
    }
}
