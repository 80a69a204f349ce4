//! Built-in invariant suite over the fixed vorticity matrix
//! {0, 1 − 2p, 0.3p, −0.5}: stream identities, monotonicity, dispersion sign
//! structure, spectra and the small-amplitude sign ledger, each reported as
//! a named pass/fail entry. Per-model groups may run on separate threads,
//! capped by the WAVEBRANCH_THREADS environment variable.

use crate::dispersion::{sigma, sigma_forms, sigma_zero_identity, tau_star};
use crate::expansion::expand_n;
use crate::spectra::{coercivity_check, interval_spectrum_n, transformed_solve_n,
    transformed_solve_via_interval};
use crate::stream::{
    bernoulli_curve, bernoulli_of_s, depth, froude_checks, inv_froude_sq, invert_bernoulli,
    solve_stream,
};
use crate::vorticity::VorticityModel;
use crate::Result;

/// One named check with its outcome.
#[derive(Debug, Clone)]
pub struct VerifyEntry {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Ordered collection of check outcomes.
#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub entries: Vec<VerifyEntry>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }
    pub fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.entries.push(VerifyEntry { name: name.into(), passed, detail: detail.into() });
    }
    pub fn find(&self, name: &str) -> Option<&VerifyEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

/// The fixed desk-scale vorticity matrix.
pub fn builtin_models() -> Vec<(&'static str, VorticityModel)> {
    vec![
        ("zero", VorticityModel::new(&[0.0]).expect("valid")),
        ("affine", VorticityModel::new(&[1.0, -2.0]).expect("valid")),
        ("linear", VorticityModel::new(&[0.0, 0.3]).expect("valid")),
        ("negative", VorticityModel::new(&[-0.5]).expect("valid")),
    ]
}

fn thread_cap() -> usize {
    std::env::var("WAVEBRANCH_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(4)
        .min(8)
}

/// Run the matrix; entries are ordered by model then check name.
pub fn run() -> Result<VerifyReport> {
    let models = builtin_models();
    let cap = thread_cap().max(1);
    let mut partials: Vec<Option<VerifyReport>> = (0..models.len()).map(|_| None).collect();
    // chunked scoped threads, deterministic collection order
    for chunk in models.chunks(cap.max(1)) {
        let offset = models
            .iter()
            .position(|(n, _)| n == &chunk[0].0)
            .unwrap_or(0);
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for (name, model) in chunk {
                handles.push(scope.spawn(move || model_report(name, model)));
            }
            for (k, h) in handles.into_iter().enumerate() {
                partials[offset + k] = Some(h.join().expect("verify worker panicked"));
            }
        });
    }
    let mut report = VerifyReport::default();
    report.push(
        "froude-au22b-note",
        true,
        "Froude convention: 1/F² = ∫dY/U′² (integral form); the alternative F = (∫dY/U′²)^{-2} \
         reading is inconsistent with 𝓡′(s) = s(1−F⁻²) and ∫H_p³dp and is not used; \
         cross-check residuals are reported per stream below"
            .to_string(),
    );
    for p in partials.into_iter().flatten() {
        report.entries.extend(p.entries);
    }
    Ok(report)
}

fn model_report(tag: &str, model: &VorticityModel) -> VerifyReport {
    let mut r = VerifyReport::default();
    match model_checks(tag, model, &mut r) {
        Ok(()) => {}
        Err(e) => r.push(format!("{tag}/fatal"), false, format!("{e}")),
    }
    r
}

fn model_checks(tag: &str, model: &VorticityModel, r: &mut VerifyReport) -> Result<()> {
    // classification and s0
    let s0 = model.s0();
    let mut max_cap = f64::NEG_INFINITY;
    for i in 0..=4096 {
        max_cap = max_cap.max(model.capital_omega_unchecked(i as f64 / 4096.0));
    }
    let s0_defect = (s0 * s0 - 2.0 * max_cap.max(0.0)).abs();
    r.push(
        format!("{tag}/classification"),
        s0_defect <= 1e-12,
        format!("case {} s0 {:.6e} defect {:.2e}", model.case_tag(), s0, s0_defect),
    );

    // Ω closed form vs quadrature on 101 points
    let mut q_defect = 0.0_f64;
    for i in 0..=101 {
        let taup = i as f64 / 101.0;
        let quad = crate::numerics::quad::integrate(|t| model.omega_unchecked(t), 0.0, taup, 1e-13);
        q_defect = q_defect.max((model.capital_omega_unchecked(taup) - quad).abs());
    }
    r.push(
        format!("{tag}/capital-omega-quadrature"),
        q_defect <= 1e-10,
        format!("max defect {q_defect:.2e}"),
    );

    let curve = bernoulli_curve(model)?;

    // depth strictly decreasing
    let mut prev_d = f64::INFINITY;
    let mut depth_ok = true;
    for i in 0..10 {
        let s = s0 + 0.01 + (10.0 - 0.01) * i as f64 / 9.0;
        let d = depth(model, s)?.value;
        if d >= prev_d {
            depth_ok = false;
        }
        prev_d = d;
    }
    r.push(format!("{tag}/depth-decreasing"), depth_ok, "10 samples on (s0+0.01, s0+10)");

    // Bernoulli and Froude increasing past s_c
    let mut bf_ok = true;
    let mut prev_r = f64::NEG_INFINITY;
    let mut prev_f = 0.0;
    for i in 0..8 {
        let s = curve.s_c + 1e-3 + 1.3 * i as f64;
        let rr = bernoulli_of_s(model, s)?;
        let ff = inv_froude_sq(model, s)?.powf(-0.5);
        if rr <= prev_r || ff <= prev_f {
            bf_ok = false;
        }
        prev_r = rr;
        prev_f = ff;
    }
    r.push(format!("{tag}/bernoulli-froude-increasing"), bf_ok, "8 samples past s_c");

    // Froude triple consistency + (Ju28a) + H-profile residuals at 2 shears
    let mut triple_max: f64 = 0.0;
    let mut ju28_max: f64 = 0.0;
    let mut hode_max: f64 = 0.0;
    let mut hbc_max: f64 = 0.0;
    let mut uprime_max: f64 = 0.0;
    for factor in [1.35, 2.0] {
        let s = curve.s_c * factor;
        let sol = solve_stream(model, s, 512)?;
        let checks = froude_checks(&sol)?;
        triple_max = triple_max.max(checks.max_pairwise);
        let h = 1e-5;
        let rp = (bernoulli_of_s(model, s + h)? - bernoulli_of_s(model, s - h)?) / (2.0 * h);
        let f = sol.froude();
        ju28_max = ju28_max.max((rp - s * (1.0 - f.powi(-2))).abs());
        // H ode residual on a fine grid with exact H_p samples
        let nfine = 2048;
        let dpf = 1.0 / nfine as f64;
        for j in 1..nfine {
            let p = j as f64 * dpf;
            let hpp = (sol.h_p(p + dpf) - sol.h_p(p - dpf)) / (2.0 * dpf);
            hode_max =
                hode_max.max((hpp - sol.h_p(p).powi(3) * model.omega_unchecked(p)).abs());
        }
        let hp1 = sol.h_p(1.0);
        hbc_max = hbc_max.max((1.0 / (2.0 * hp1 * hp1) + sol.d() - sol.bernoulli()).abs());
        for (_, u, upv) in sol.samples() {
            let id = upv * upv - (s * s - 2.0 * model.capital_omega_unchecked(u));
            uprime_max = uprime_max.max(id.abs());
        }
    }
    r.push(
        format!("{tag}/froude-triple"),
        triple_max <= 1e-5,
        format!("max pairwise {triple_max:.2e}"),
    );
    r.push(format!("{tag}/ju28a"), ju28_max <= 1e-5, format!("max defect {ju28_max:.2e}"));
    r.push(format!("{tag}/h-ode-residual"), hode_max <= 1e-7, format!("max {hode_max:.2e}"));
    r.push(format!("{tag}/h-surface-relation"), hbc_max <= 1e-9, format!("max {hbc_max:.2e}"));
    r.push(format!("{tag}/u-prime-identity"), uprime_max <= 1e-9, format!("max {uprime_max:.2e}"));

    // dispersion sign structure on one subcritical and one supercritical stream
    let s_sub = 0.5 * (s0 + curve.s_c).max(s0 + 0.35 * (curve.s_c - s0));
    let sub = solve_stream(model, s_sub, 512)?;
    let sup = solve_stream(model, 1.7 * curve.s_c, 512)?;
    let sigma0_sub = sigma(&sub, 0.0)?;
    let sigma0_sup = sigma(&sup, 0.0)?;
    let sign_ok = sigma0_sub < 0.0
        && sigma0_sup > 0.0
        && sub.froude() < 1.0
        && sup.froude() > 1.0;
    r.push(
        format!("{tag}/sigma-sign-dichotomy"),
        sign_ok,
        format!("sigma0 sub {sigma0_sub:.3e} (F {:.4}), sup {sigma0_sup:.3e} (F {:.4})",
            sub.froude(), sup.froude()),
    );
    let (fa, fb) = sigma_forms(&sub, 0.8)?;
    r.push(
        format!("{tag}/sigma-forms-agree"),
        (fa - fb).abs() <= 1e-10,
        format!("defect {:.2e}", (fa - fb).abs()),
    );
    let derived = sigma_zero_identity(&sub)?;
    let derived_defect = (derived.lhs - derived.rhs_derived).abs();
    r.push(
        format!("{tag}/sigma-zero-derived-identity"),
        derived_defect <= 1e-7,
        format!(
            "lhs {:.6e}, (F²−1)/κ {:.6e}, stated 3(F²−1)/(2κ) defect {:.3e} (reported only)",
            derived.lhs, derived.rhs_derived, derived.defect
        ),
    );
    // monotonicity and root uniqueness
    let star = tau_star(&sub)?.expect("subcritical stream must provide a dispersion root");
    let mut mono_ok = true;
    let mut crossings = 0;
    let mut prev = sigma(&sub, 0.0)?;
    for i in 1..=200 {
        let t = 2.0 * star.tau * i as f64 / 200.0;
        let sv = sigma(&sub, t)?;
        if sv <= prev {
            mono_ok = false;
        }
        if prev < 0.0 && sv >= 0.0 {
            crossings += 1;
        }
        prev = sv;
    }
    r.push(
        format!("{tag}/sigma-monotone-unique-root"),
        mono_ok && crossings == 1,
        format!("tau* {:.6e}, crossings {crossings}", star.tau),
    );

    // interval spectrum and coercivity
    let rep_sup = interval_spectrum_n(&sup, 1, 512)?;
    let nu0 = rep_sup.eigenvalues[0];
    let coercive = coercivity_check(&sup, 100)?;
    r.push(
        format!("{tag}/nu0-positive-supercritical"),
        nu0 > 0.0 && coercive,
        format!("nu0 {nu0:.6e}, coercive {coercive}"),
    );
    let rep_sub = interval_spectrum_n(&sub, 1, 1024)?;
    let nu0_sub = rep_sub.eigenvalues[0];
    let sub_match = (nu0_sub + star.tau * star.tau).abs() <= 2e-3 * star.tau * star.tau;
    let noncoercive = !coercivity_check(&sub, 100)?;
    r.push(
        format!("{tag}/nu0-subcritical-is-minus-tau-star-sq"),
        sub_match && noncoercive,
        format!("nu0 {nu0_sub:.6e} vs −τ*² {:.6e}", -star.tau * star.tau),
    );

    // transformed solver routes agree
    let f_probe = |p: f64| (1.3 * p).sin() - 0.2 * p;
    let u1 = transformed_solve_n(&sub, 2.0 * star.tau, &f_probe, 0.3, 2048)?;
    let u2 = transformed_solve_via_interval(&sub, 2.0 * star.tau, &f_probe, 0.3, 2048)?;
    let scale = u1.iter().fold(0.0_f64, |a, &b| a.max(b.abs())).max(1e-30);
    let mut route_defect = 0.0_f64;
    for j in 0..u1.len() {
        route_defect = route_defect.max((u1[j] - u2[j]).abs());
    }
    r.push(
        format!("{tag}/transformed-two-routes"),
        route_defect <= 1e-6 * scale.max(1.0),
        format!("max defect {route_defect:.2e} scale {scale:.2e}"),
    );

    // sign ledger near criticality (c₁ < 0, λ₂ < 0, μ₂ > 0)
    for drc in [0.02_f64, 0.05] {
        let rr = curve.r_c + drc;
        let roots = invert_bernoulli(model, rr)?;
        let Some(s_plus) = roots.s_plus else {
            r.push(
                format!("{tag}/sign-ledger-dR-{drc}"),
                false,
                "no subcritical root".to_string(),
            );
            continue;
        };
        let stream = solve_stream(model, s_plus, 512)?;
        let e = expand_n(&stream, 1024)?;
        let ok = e.c1 < 0.0 && e.lambda2 < 0.0 && e.mu2 > 0.0;
        r.push(
            format!("{tag}/sign-ledger-dR-{drc}"),
            ok,
            format!("c1 {:.4e}, lambda2 {:.4e}, mu2 {:.4e}", e.c1, e.lambda2, e.mu2),
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_matrix_passes() {
        let report = run().unwrap();
        for e in &report.entries {
            assert!(e.passed, "verify entry failed: {} — {}", e.name, e.detail);
        }
        assert!(report.find("froude-au22b-note").is_some());
        // the matrix covers all three classification cases
        let tags: Vec<String> = report.entries.iter().map(|e| e.name.clone()).collect();
        assert!(tags.iter().any(|t| t.starts_with("zero/")));
        assert!(tags.iter().any(|t| t.starts_with("negative/")));
    }
}
