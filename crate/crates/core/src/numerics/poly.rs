//! Real polynomials in one variable, coefficients in increasing degree.

/// Dense polynomial with coefficients `c[0] + c[1] x + ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::new(vec![0.0]);
        }
        let d: Vec<f64> = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * k as f64)
            .collect();
        Poly::new(d)
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Poly {
        let mut a = Vec::with_capacity(self.coeffs.len() + 1);
        a.push(0.0);
        for (k, &c) in self.coeffs.iter().enumerate() {
            a.push(c / (k + 1) as f64);
        }
        Poly::new(a)
    }

    /// Roots inside `(a, b)` located by a sign scan on `scan` subintervals
    /// followed by bisection. Tangential (even-order) roots without a sign
    /// change are not reported; callers that only need extrema candidates
    /// combine this with a dense grid scan.
    pub fn roots_in(&self, a: f64, b: f64, scan: usize) -> Vec<f64> {
        let mut roots = Vec::new();
        if self.is_zero() {
            return roots;
        }
        let h = (b - a) / scan as f64;
        let mut x0 = a;
        let mut f0 = self.eval(x0);
        for i in 1..=scan {
            let x1 = a + h * i as f64;
            let f1 = self.eval(x1);
            if f0 == 0.0 {
                roots.push(x0);
            } else if f0 * f1 < 0.0 {
                let mut lo = x0;
                let mut hi = x1;
                let mut flo = f0;
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    let fm = self.eval(mid);
                    if fm == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if flo * fm < 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fm;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            x0 = x1;
            f0 = f1;
        }
        if f0 == 0.0 {
            roots.push(x0);
        }
        roots
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_and_calculus() {
        let p = Poly::new(vec![1.0, -2.0]); // 1 - 2x
        assert_eq!(p.eval(0.25), 0.5);
        let a = p.antiderivative(); // x - x^2
        assert_eq!(a.eval(1.0), 0.0);
        assert_eq!(a.eval(0.5), 0.25);
        let d = p.derivative();
        assert_eq!(d.eval(7.0), -2.0);
    }

    #[test]
    fn root_scan() {
        let p = Poly::new(vec![-0.25, 0.0, 1.0]); // x^2 - 1/4
        let r = p.roots_in(0.0, 1.0, 128);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 0.5).abs() < 1e-12);
    }
}
