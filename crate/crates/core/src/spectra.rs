//! One-dimensional spectral problems attached to a stream: the interval
//! eigenproblem defining ν₀, the Rayleigh-form coercivity probe, and the
//! transformed two-point solver in the p variable that feeds the expansion.
//!
//! Discretizations are symmetric second-order finite differences; the Robin
//! condition enters through a half-cell row that keeps the generalized
//! problem symmetric, and eigenvalues come from Sturm-sequence bisection.

use crate::dispersion::{gamma_solve, tau_star};
use crate::error::WaveError;
use crate::numerics::quad::simpson;
use crate::numerics::tridiag::{thomas, SymTridiag};
use crate::stream::StreamSolution;
use crate::Result;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Which discrete problem produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemTag {
    Interval1D,
    Hodograph1D,
    Physical2D,
    Hodograph2D,
}

impl std::fmt::Display for ProblemTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ProblemTag::Interval1D => "interval-1d",
            ProblemTag::Hodograph1D => "hodograph-1d",
            ProblemTag::Physical2D => "physical-2d",
            ProblemTag::Hodograph2D => "hodograph-2d",
        };
        write!(f, "{s}")
    }
}

/// Ordered eigenvalues with sampled eigenvectors and sign bookkeeping.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub problem_tag: ProblemTag,
    /// ascending, with multiplicity
    pub eigenvalues: Vec<f64>,
    /// unit-norm samples, leading significant component positive
    pub eigenvectors: Vec<Vec<f64>>,
    /// abscissae of the eigenvector samples (1D problems)
    pub grid: Vec<f64>,
    /// count of eigenvalues < −1e−9 over the whole discrete spectrum
    pub negative_count: usize,
    pub nu0_reference: Option<f64>,
    /// maximum relative eigenpair residual among the reported pairs
    pub max_residual: f64,
}

const NEGATIVE_CUT: f64 = -1e-9;

/// Assemble the symmetrized FD matrix of
///   −v″ − ω′(U)v = ν v,  v(0) = 0,  v′(d) = ρ₀ v(d)
/// on n intervals. Returns (matrix, cell weights m) for A v = ν diag(m) v.
fn interval_matrix(stream: &StreamSolution, n: usize) -> (SymTridiag, Vec<f64>) {
    let d = stream.d();
    let h = d / n as f64;
    let model = stream.model();
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n - 1);
    for j in 1..=n {
        let y = j as f64 * h;
        let pot = -model.omega_deriv(stream.u_at(y));
        if j < n {
            diag.push(2.0 / (h * h) + pot);
            off.push(-1.0 / (h * h));
        } else {
            // half cell at Y = d with the flux condition v′(d) = ρ₀ v(d)
            diag.push(1.0 / (h * h) - stream.rho0() / h + 0.5 * pot);
        }
    }
    let mut m = vec![1.0; n];
    m[n - 1] = 0.5;
    (SymTridiag { diag, off }, m)
}

fn symmetrize(a: &SymTridiag, m: &[f64]) -> SymTridiag {
    let n = a.n();
    let mut diag = a.diag.clone();
    let mut off = a.off.clone();
    for i in 0..n {
        diag[i] /= m[i];
    }
    for i in 0..n - 1 {
        off[i] /= (m[i] * m[i + 1]).sqrt();
    }
    SymTridiag { diag, off }
}

/// First k eigenpairs of the interval problem at resolution n, with a
/// Richardson check against the 2n grid.
pub fn interval_spectrum_n(stream: &StreamSolution, k: usize, n: usize) -> Result<SpectrumReport> {
    if k == 0 || n < 64 {
        return Err(WaveError::InvalidInput { what: "interval spectrum needs k ≥ 1, n ≥ 64" });
    }
    let (a, m) = interval_matrix(stream, n);
    let b = symmetrize(&a, &m);
    let evs = b.lowest_eigenvalues(k);
    let (a2, m2) = interval_matrix(stream, 2 * n);
    let b2 = symmetrize(&a2, &m2);
    let evs2 = b2.lowest_eigenvalues(k);
    for i in 0..k {
        let scale = evs2[i].abs().max(1.0);
        if (evs[i] - evs2[i]).abs() > 4.0 * 1e-5 * scale {
            return Err(WaveError::DiscretizationFailure {
                what: "interval eigenvalues failed the grid-halving check",
            });
        }
    }
    let h = stream.d() / (2 * n) as f64;
    let grid: Vec<f64> = (1..=2 * n).map(|j| j as f64 * h).collect();
    let mut eigenvectors = Vec::with_capacity(k);
    let mut max_residual = 0.0_f64;
    for &ev in &evs2 {
        let v = b2.eigenvector(ev);
        let r = b2.matvec(&v);
        let mut resid = 0.0_f64;
        let mut norm = 0.0_f64;
        for i in 0..v.len() {
            resid += (r[i] - ev * v[i]).powi(2);
            norm += v[i] * v[i];
        }
        max_residual = max_residual.max((resid / norm).sqrt() / ev.abs().max(1.0));
        // undo the diagonal scaling (eigenvector of the generalized problem)
        let mut u: Vec<f64> = v.iter().enumerate().map(|(i, &vi)| vi / m2[i].sqrt()).collect();
        let nrm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in u.iter_mut() {
            *x /= nrm;
        }
        eigenvectors.push(u);
    }
    let negative_count = b2.count_below(NEGATIVE_CUT);
    let nu0_reference = Some(evs2[0]);
    Ok(SpectrumReport {
        problem_tag: ProblemTag::Interval1D,
        eigenvalues: evs2,
        eigenvectors,
        grid,
        negative_count,
        nu0_reference,
        max_residual,
    })
}

/// Interval spectrum at the default resolution (n = 1024).
pub fn interval_spectrum(stream: &StreamSolution, k: usize) -> Result<SpectrumReport> {
    interval_spectrum_n(stream, k, 1024)
}

/// Quadratic form of the interval problem on a sampled profile with v(0)=0:
/// ∫(v′² − ω′(U)v²) dY − ρ₀ v(d)².
pub fn rayleigh_form(stream: &StreamSolution, ys: &[f64], v: &[f64]) -> f64 {
    let model = stream.model();
    let mut grad = 0.0;
    let mut pot = 0.0;
    for i in 0..ys.len() - 1 {
        let h = ys[i + 1] - ys[i];
        let vp = (v[i + 1] - v[i]) / h;
        grad += vp * vp * h;
        let w0 = model.omega_deriv(stream.u_at(ys[i])) * v[i] * v[i];
        let w1 = model.omega_deriv(stream.u_at(ys[i + 1])) * v[i + 1] * v[i + 1];
        pot += 0.5 * (w0 + w1) * h;
    }
    grad - pot - stream.rho0() * v[v.len() - 1] * v[v.len() - 1]
}

/// Evaluate the form on random piecewise-linear trial profiles (plus the
/// dispersive mode γ(·,τ*) when it exists). True iff every value is positive,
/// which by Rayleigh theory is equivalent to ν₀ > 0.
pub fn coercivity_check(stream: &StreamSolution, trials: usize) -> Result<bool> {
    let d = stream.d();
    let nodes = 24;
    let ys: Vec<f64> = (0..=nodes).map(|i| d * i as f64 / nodes as f64).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c0ec);
    let mut all_positive = true;
    for _ in 0..trials {
        let mut v = vec![0.0; nodes + 1];
        for x in v.iter_mut().skip(1) {
            *x = rng.gen_range(-1.0..1.0);
        }
        let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm < 1e-12 {
            continue;
        }
        for x in v.iter_mut() {
            *x /= nrm;
        }
        if rayleigh_form(stream, &ys, &v) <= 0.0 {
            all_positive = false;
        }
    }
    if let Some(star) = tau_star(stream)? {
        // the violating direction for subcritical streams
        let g = gamma_solve(stream, star.tau)?;
        let fine: Vec<f64> = (0..=512).map(|i| d * i as f64 / 512.0).collect();
        let v: Vec<f64> = fine.iter().map(|&y| g.at(y)).collect();
        if rayleigh_form(stream, &fine, &v) <= 0.0 {
            all_positive = false;
        }
    }
    Ok(all_positive)
}

/// Default resolution of the transformed two-point solver.
pub const TRANSFORMED_N: usize = 2048;

/// Guard band around τ* within which the transformed problem is singular.
pub const RESONANCE_GUARD: f64 = 1e-6;

/// Solve −(u_p/H_p³)_p + τ²u/H_p = f, u(0)=0, −u_p/H_p³ + u = c at p=1,
/// by conservative second-order finite differences on `n` intervals.
pub fn transformed_solve_n(
    stream: &StreamSolution,
    tau: f64,
    f_rhs: &dyn Fn(f64) -> f64,
    c: f64,
    n: usize,
) -> Result<Vec<f64>> {
    if let Some(star) = tau_star(stream)? {
        if (tau.abs() - star.tau).abs() <= RESONANCE_GUARD {
            return Err(WaveError::NearResonance { tau, tau_star: star.tau });
        }
    }
    let (sub, diag, sup, rhs) = transformed_system(stream, tau, f_rhs, c, n);
    let u_inner = thomas(&sub, &diag, &sup, &rhs).ok_or(WaveError::DiscretizationFailure {
        what: "transformed two-point solve hit a zero pivot",
    })?;
    let mut u = Vec::with_capacity(n + 1);
    u.push(0.0);
    u.extend_from_slice(&u_inner);
    Ok(u)
}

/// The assembled tridiagonal system of the transformed problem (unknowns
/// u_1..u_n). Also used for kernel diagnostics at τ = τ*.
fn transformed_system(
    stream: &StreamSolution,
    tau: f64,
    f_rhs: &dyn Fn(f64) -> f64,
    c: f64,
    n: usize,
) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let dp = 1.0 / n as f64;
    let a_half = |j: f64| {
        let p = j * dp;
        let hp = stream.h_p(p);
        1.0 / (hp * hp * hp)
    };
    let weight = |j: usize| 1.0 / stream.h_p(j as f64 * dp);
    let t2 = tau * tau;
    let mut sub = Vec::with_capacity(n - 1);
    let mut diag = Vec::with_capacity(n);
    let mut sup = Vec::with_capacity(n - 1);
    let mut rhs = Vec::with_capacity(n);
    for j in 1..n {
        let am = a_half(j as f64 - 0.5);
        let ap = a_half(j as f64 + 0.5);
        diag.push((am + ap) / (dp * dp) + t2 * weight(j));
        if j > 1 {
            sub.push(-am / (dp * dp));
        }
        sup.push(-ap / (dp * dp));
        rhs.push(f_rhs(j as f64 * dp));
    }
    // half cell at p = 1 with the flux condition −a u_p + u = c
    let am = a_half(n as f64 - 0.5);
    diag.push(am / (dp * dp) - 1.0 / dp + 0.5 * t2 * weight(n));
    sub.push(-am / (dp * dp));
    rhs.push(0.5 * f_rhs(1.0) - c / dp);
    (sub, diag, sup, rhs)
}

/// Independent route: solve the two-point problem in the Y variable with
/// f(Y) = −F(U(Y)), g = −c/κ and map back by u(p) = v(H(p))·H_p(p).
pub fn transformed_solve_via_interval(
    stream: &StreamSolution,
    tau: f64,
    f_rhs: &dyn Fn(f64) -> f64,
    c: f64,
    n: usize,
) -> Result<Vec<f64>> {
    if let Some(star) = tau_star(stream)? {
        if (tau.abs() - star.tau).abs() <= RESONANCE_GUARD {
            return Err(WaveError::NearResonance { tau, tau_star: star.tau });
        }
    }
    let d = stream.d();
    let h = d / n as f64;
    let model = stream.model();
    let t2 = tau * tau;
    // v″ + ω′(U)v − τ²v = f with f(Y) = −F(U(Y)), v(0)=0, v′(d) − ρ₀v(d) = g.
    // Assembled as −v″ − ω′(U)v + τ²v = −f = +F(U(Y)) with a half-cell Robin
    // row carrying +g/h on the right.
    let mut sub = Vec::with_capacity(n - 1);
    let mut diag = Vec::with_capacity(n);
    let mut sup = Vec::with_capacity(n - 1);
    let mut rhs = Vec::with_capacity(n);
    let g = -c / stream.kappa();
    for j in 1..n {
        let y = j as f64 * h;
        let pot = -model.omega_deriv(stream.u_at(y)) + t2;
        diag.push(2.0 / (h * h) + pot);
        if j > 1 {
            sub.push(-1.0 / (h * h));
        }
        sup.push(-1.0 / (h * h));
        rhs.push(f_rhs(stream.u_at(y)));
    }
    let pot = -model.omega_deriv(1.0) + t2;
    diag.push(1.0 / (h * h) - stream.rho0() / h + 0.5 * pot);
    sub.push(-1.0 / (h * h));
    rhs.push(0.5 * f_rhs(1.0) + g / h);
    let v_inner = thomas(&sub, &diag, &sup, &rhs).ok_or(WaveError::DiscretizationFailure {
        what: "interval-route solve hit a zero pivot",
    })?;
    let mut v = Vec::with_capacity(n + 1);
    v.push(0.0);
    v.extend_from_slice(&v_inner);
    // u(p) = v(H(p)) H_p(p) on the uniform p grid, 4-point Lagrange lookup
    let mut u = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let p = j as f64 / n as f64;
        let y = stream.h_at(p);
        let base = (((y / h).floor() as isize) - 1).clamp(0, n as isize - 3) as usize;
        let t = y / h - base as f64;
        let (v0, v1, v2, v3) = (v[base], v[base + 1], v[base + 2], v[base + 3]);
        let l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
        let l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
        let l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
        let l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
        let vv = v0 * l0 + v1 * l1 + v2 * l2 + v3 * l3;
        u.push(vv * stream.h_p(p));
    }
    u[0] = 0.0;
    Ok(u)
}

/// Kernel diagnostics of the homogeneous transformed system at τ.
#[derive(Debug, Clone)]
pub struct KernelDiagnostics {
    /// eigenvalues of the symmetrized homogeneous system with |λ| below
    /// 1e−6 × median |λ|
    pub near_null_count: usize,
    pub median_abs: f64,
    /// normalized kernel candidate (full grid including p = 0)
    pub kernel_vector: Vec<f64>,
}

/// Detect the one-dimensional kernel of the transformed operator at τ = τ*.
pub fn transformed_kernel_diagnostics(
    stream: &StreamSolution,
    tau: f64,
    n: usize,
) -> Result<KernelDiagnostics> {
    let zero = |_: f64| 0.0;
    let (sub, diag, _sup, _rhs) = transformed_system(stream, tau, &zero, 0.0, n);
    let mut m = vec![1.0; n];
    m[n - 1] = 0.5;
    let a = SymTridiag { diag, off: sub };
    let b = symmetrize(&a, &m);
    let all = b.lowest_eigenvalues(n.min(256));
    let mut abs: Vec<f64> = all.iter().map(|x| x.abs()).collect();
    abs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let median_abs = abs[abs.len() / 2];
    let near_null_count = abs.iter().filter(|&&x| x < 1e-6 * median_abs).count();
    let mut best = all[0];
    for &x in &all {
        if x.abs() < best.abs() {
            best = x;
        }
    }
    let v = b.eigenvector(best);
    let mut kernel = vec![0.0];
    for (i, &vi) in v.iter().enumerate() {
        kernel.push(vi / m[i].sqrt());
    }
    let nrm = kernel.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in kernel.iter_mut() {
        *x /= nrm;
    }
    if kernel[kernel.len() / 2] < 0.0 {
        for x in kernel.iter_mut() {
            *x = -*x;
        }
    }
    Ok(KernelDiagnostics { near_null_count, median_abs, kernel_vector: kernel })
}

/// L² norm of a uniformly sampled profile over [0, length].
pub fn l2_norm_uniform(values: &[f64], length: f64) -> f64 {
    let n = values.len() - 1;
    simpson(
        |x| {
            let t = x / length * n as f64;
            let i = (t.floor() as usize).min(n - 1);
            let frac = t - i as f64;
            let v = values[i] * (1.0 - frac) + values[i + 1] * frac;
            v * v
        },
        0.0,
        length,
        2 * n,
    )
    .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::roots::{bisect_secant, RootTol};
    use crate::stream::solve_stream;
    use crate::vorticity::VorticityModel;
    use approx::assert_abs_diff_eq;

    fn sup_stream() -> StreamSolution {
        solve_stream(&VorticityModel::zero(), 2.0, 256).unwrap()
    }

    fn sub_stream() -> StreamSolution {
        solve_stream(&VorticityModel::zero(), 2.0_f64.sqrt() - 1.0, 256).unwrap()
    }

    #[test]
    fn interval_spectrum_zero_vorticity() {
        // oracle: smallest positive root of tan(x d) = x s² ⇒ ν₀ = x²
        let sol = sup_stream();
        let rep = interval_spectrum_n(&sol, 3, 1024).unwrap();
        let x = bisect_secant(
            |x: f64| (0.5 * x).tan() - 4.0 * x,
            2.2,
            std::f64::consts::PI - 1e-9,
            RootTol { f_abs: 1e-13, x_abs: 1e-15 },
        )
        .unwrap();
        let nu0 = x * x;
        assert_abs_diff_eq!(rep.eigenvalues[0], nu0, epsilon = 1e-4 * nu0);
        assert!(rep.eigenvalues[0] > 0.0);
        assert_eq!(rep.negative_count, 0);
        // eigenfunction ~ sin(x y): no sign change on (0, d]
        let v = &rep.eigenvectors[0];
        let lead = v[v.len() / 2].signum();
        for &vi in v.iter().skip(2) {
            assert!(vi * lead > -1e-8);
        }
        assert!(rep.max_residual < 1e-6);
    }

    #[test]
    fn subcritical_lowest_is_minus_tau_star_squared() {
        // ν = −τ² is an eigenvalue iff σ(τ) = 0, so the only negative
        // eigenvalue of the subcritical interval problem is −τ*²
        let sol = sub_stream();
        let star = tau_star(&sol).unwrap().unwrap();
        let rep = interval_spectrum_n(&sol, 2, 2048).unwrap();
        assert_abs_diff_eq!(
            rep.eigenvalues[0],
            -star.tau * star.tau,
            epsilon = 2e-3 * star.tau * star.tau
        );
        assert_eq!(rep.negative_count, 1);
        assert!(rep.eigenvalues[1] > 0.0);
    }

    #[test]
    fn second_order_convergence() {
        let sol = sup_stream();
        let e1 = interval_spectrum_n(&sol, 1, 256).unwrap().eigenvalues[0];
        let e2 = interval_spectrum_n(&sol, 1, 512).unwrap().eigenvalues[0];
        let e4 = interval_spectrum_n(&sol, 1, 1024).unwrap().eigenvalues[0];
        let r = (e1 - e2).abs() / (e2 - e4).abs();
        assert!(r > 3.0 && r < 5.0, "convergence ratio {r}");
    }

    #[test]
    fn coercivity_sign() {
        assert!(coercivity_check(&sup_stream(), 100).unwrap());
        let m = VorticityModel::zero();
        let slow = solve_stream(&m, 0.5, 256).unwrap();
        assert!(!coercivity_check(&slow, 100).unwrap());
    }

    #[test]
    fn transformed_zero_rhs_gives_zero() {
        let sol = sub_stream();
        let star = tau_star(&sol).unwrap().unwrap();
        let u = transformed_solve_n(&sol, 2.0 * star.tau, &|_| 0.0, 0.0, 512).unwrap();
        for &ui in &u {
            assert!(ui.abs() < 1e-12);
        }
    }

    #[test]
    fn transformed_two_routes_agree() {
        let sol = sub_stream();
        let star = tau_star(&sol).unwrap().unwrap();
        let tau = 2.0 * star.tau;
        let f = |p: f64| (1.5 * p).sin() - 0.3 * p * p;
        let c = 0.4;
        let n = 2048;
        let u1 = transformed_solve_n(&sol, tau, &f, c, n).unwrap();
        let u2 = transformed_solve_via_interval(&sol, tau, &f, c, n).unwrap();
        let scale = u1.iter().fold(0.0_f64, |a, &b| a.max(b.abs())).max(1e-30);
        for j in 0..=n {
            assert!(
                (u1[j] - u2[j]).abs() < 1e-6 * scale.max(1.0),
                "routes disagree at j={j}: {} vs {}",
                u1[j],
                u2[j]
            );
        }
    }

    #[test]
    fn near_resonance_guard() {
        let sol = sub_stream();
        let star = tau_star(&sol).unwrap().unwrap();
        let e = transformed_solve_n(&sol, star.tau, &|_| 1.0, 0.0, 256);
        assert!(matches!(e, Err(WaveError::NearResonance { .. })));
    }

    #[test]
    fn kernel_detected_at_tau_star() {
        let sol = sub_stream();
        let star = tau_star(&sol).unwrap().unwrap();
        let diag = transformed_kernel_diagnostics(&sol, star.tau, 2048).unwrap();
        assert_eq!(diag.near_null_count, 1, "median {}", diag.median_abs);
        // kernel matches α₀(p) = γ(H(p);τ*)·H_p after normalization
        let g = gamma_solve(&sol, star.tau).unwrap();
        let n = diag.kernel_vector.len() - 1;
        let mut alpha: Vec<f64> = (0..=n)
            .map(|j| {
                let p = j as f64 / n as f64;
                g.at(sol.h_at(p)) * sol.h_p(p)
            })
            .collect();
        let nrm = alpha.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in alpha.iter_mut() {
            *x /= nrm;
        }
        for j in 0..=n {
            assert!(
                (alpha[j] - diag.kernel_vector[j]).abs() < 1e-4,
                "kernel mismatch at {j}: {} vs {}",
                alpha[j],
                diag.kernel_vector[j]
            );
        }
        // away from τ* there is no near-null direction
        let away = transformed_kernel_diagnostics(&sol, 2.0 * star.tau, 1024).unwrap();
        assert_eq!(away.near_null_count, 0);
    }
}
