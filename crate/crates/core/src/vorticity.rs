//! Vorticity function ω(p) and its derived scalars.
//!
//! ω is a polynomial of degree ≤ 8 on [0, 1]; Ω is its antiderivative with
//! Ω(0) = 0. The classification of ω follows the trichotomy used for the
//! finiteness of the critical depth: an interior maximum of Ω (case I), a
//! strict left-endpoint maximum with ω(0) < 0 (case II), or a right-endpoint
//! maximum with ω(1) > 0 (case III). In cases II and III the depth stays
//! finite at the critical shear; in case I it diverges.

use crate::error::WaveError;
use crate::numerics::poly::Poly;
use crate::Result;

const DOMAIN_SLACK: f64 = 1e-12;
const MAX_DEGREE: usize = 8;

/// Trichotomy of vorticity functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseTag {
    CaseI,
    CaseII,
    CaseIII,
}

impl std::fmt::Display for CaseTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CaseTag::CaseI => write!(f, "I"),
            CaseTag::CaseII => write!(f, "II"),
            CaseTag::CaseIII => write!(f, "III"),
        }
    }
}

/// Polynomial vorticity with precomputed antiderivative and classification.
#[derive(Debug, Clone)]
pub struct VorticityModel {
    omega: Poly,
    omega_deriv: Poly,
    capital: Poly,
    s0: f64,
    omega0: f64,
    max_capital: f64,
    min_capital: f64,
    case_tag: CaseTag,
}

impl VorticityModel {
    /// Build from coefficients in increasing degree.
    pub fn new(coeffs: &[f64]) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(WaveError::InvalidInput { what: "empty coefficient list" });
        }
        if coeffs.len() > MAX_DEGREE + 1 {
            return Err(WaveError::InvalidInput { what: "vorticity degree above 8" });
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(WaveError::InvalidInput { what: "non-finite vorticity coefficient" });
        }
        let omega = Poly::new(coeffs.to_vec());
        let omega_deriv = omega.derivative();
        let capital = omega.antiderivative();

        let (max_capital, maximizers) = extremum(&capital, &omega, true);
        let (min_capital, _) = extremum(&capital, &omega, false);
        let (omega0, _) = extremum(&omega, &omega_deriv, true);

        let tol = 1e-12 * (1.0 + max_capital.abs());
        let interior = maximizers.iter().any(|&t| t > 1e-9 && t < 1.0 - 1e-9);
        let at_right = maximizers.iter().any(|&t| t >= 1.0 - 1e-9);
        let at_left = maximizers.iter().any(|&t| t <= 1e-9);
        let _ = tol;
        let w0 = omega.eval(0.0);
        let w1 = omega.eval(1.0);
        let case_tag = if interior {
            CaseTag::CaseI
        } else if at_right && w1 > 1e-12 {
            CaseTag::CaseIII
        } else if at_left && !at_right && w0 < -1e-12 {
            CaseTag::CaseII
        } else {
            CaseTag::CaseI
        };

        let s0 = (2.0 * max_capital).max(0.0).sqrt();
        Ok(VorticityModel {
            omega,
            omega_deriv,
            capital,
            s0,
            omega0,
            max_capital,
            min_capital,
            case_tag,
        })
    }

    /// ω ≡ 0.
    pub fn zero() -> Self {
        VorticityModel::new(&[0.0]).expect("zero model is valid")
    }

    pub fn coeffs(&self) -> &[f64] {
        self.omega.coeffs()
    }

    fn check_domain(p: f64, what: &'static str) -> Result<()> {
        if !(p >= -DOMAIN_SLACK && p <= 1.0 + DOMAIN_SLACK) {
            return Err(WaveError::Domain { what, value: p });
        }
        Ok(())
    }

    /// ω(p) on [0, 1] (with 1e−12 slack).
    pub fn omega(&self, p: f64) -> Result<f64> {
        Self::check_domain(p, "omega argument p")?;
        Ok(self.omega.eval(p))
    }

    /// ω(p) without the domain check, for inner quadrature loops.
    #[inline]
    pub fn omega_unchecked(&self, p: f64) -> f64 {
        self.omega.eval(p)
    }

    /// ω′(p), exact polynomial derivative.
    #[inline]
    pub fn omega_deriv(&self, p: f64) -> f64 {
        self.omega_deriv.eval(p)
    }

    /// Ω(τ) = ∫₀^τ ω, closed form.
    pub fn capital_omega(&self, tau: f64) -> Result<f64> {
        Self::check_domain(tau, "capital omega argument tau")?;
        Ok(self.capital.eval(tau))
    }

    #[inline]
    pub fn capital_omega_unchecked(&self, tau: f64) -> f64 {
        self.capital.eval(tau)
    }

    /// s₀ = √(2 max Ω).
    pub fn s0(&self) -> f64 {
        self.s0
    }

    /// ω₀ = max ω on [0, 1].
    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn case_tag(&self) -> CaseTag {
        self.case_tag
    }

    pub fn max_capital_omega(&self) -> f64 {
        self.max_capital
    }

    pub fn min_capital_omega(&self) -> f64 {
        self.min_capital
    }

    /// True when ω is identically zero.
    pub fn is_zero(&self) -> bool {
        self.omega.is_zero()
    }
}

/// Extremum of `f` on [0,1] from sign changes of `df` plus endpoints, with a
/// dense grid sweep folded in for tangential critical points.
fn extremum(f: &Poly, df: &Poly, maximum: bool) -> (f64, Vec<f64>) {
    let mut candidates = df.roots_in(0.0, 1.0, 4096);
    candidates.push(0.0);
    candidates.push(1.0);
    const SWEEP: usize = 4096;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=SWEEP {
        let t = i as f64 / SWEEP as f64;
        let v = if maximum { f.eval(t) } else { -f.eval(t) };
        if v > best {
            best = v;
        }
    }
    for &c in &candidates {
        let v = if maximum { f.eval(c) } else { -f.eval(c) };
        if v > best {
            best = v;
        }
    }
    let tol = 1e-12 * (1.0 + best.abs());
    let mut arg = Vec::new();
    for &c in &candidates {
        let v = if maximum { f.eval(c) } else { -f.eval(c) };
        if (best - v).abs() <= tol {
            arg.push(c);
        }
    }
    for i in 0..=64 {
        let t = i as f64 / 64.0;
        let v = if maximum { f.eval(t) } else { -f.eval(t) };
        if (best - v).abs() <= tol && !arg.iter().any(|&a| (a - t).abs() < 1e-9) {
            arg.push(t);
        }
    }
    arg.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (if maximum { best } else { -best }, arg)
}
