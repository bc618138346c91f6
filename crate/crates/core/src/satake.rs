//! Satake-parameter algebra at a single prime: symmetric-power coefficients,
//! symmetric-power local factors and the Chebyshev expansion of λ(p)^r.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Result};

/// Local data at a prime p: λ(p) = 2cos θ with α = e^{iθ}, β = e^{−iθ}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatakeLocal {
    pub p: u64,
    pub lambda_p: f64,
    pub theta: f64,
}

impl SatakeLocal {
    /// Values outside [−2, 2] by less than 10⁻⁹ are clamped (rounding in
    /// λ(p)); anything further out is rejected.
    pub fn new(p: u64, lambda_p: f64) -> Result<Self> {
        if !lambda_p.is_finite() || lambda_p.abs() > 2.0 + 1e-9 {
            return invalid(format!(
                "λ({p}) = {lambda_p} violates |λ(p)| ≤ 2"
            ));
        }
        let lambda_p = lambda_p.clamp(-2.0, 2.0);
        Ok(SatakeLocal {
            p,
            lambda_p,
            theta: (lambda_p / 2.0).acos(),
        })
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.theta)
    }

    pub fn beta(&self) -> Complex64 {
        Complex64::from_polar(1.0, -self.theta)
    }
}

/// λ_{sym^m f}(p) = λ(p^m) = U_m(cos θ), by the recurrence
/// u_{k+1} = λ·u_k − u_{k−1}.
pub fn sym_lambda_p(m: u32, s: &SatakeLocal) -> f64 {
    chebyshev_u_half(m, s.lambda_p)
}

/// U_m(x/2) for x in [−2, 2].
pub fn chebyshev_u_half(m: u32, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if m == 0 {
        return prev;
    }
    for _ in 1..m {
        let next = x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// 2cos(kθ) for x = 2cos θ, by V_{k+1} = x·V_k − V_{k−1}.
pub fn chebyshev_v(k: u32, x: f64) -> f64 {
    let (mut prev, mut cur) = (2.0, x);
    if k == 0 {
        return prev;
    }
    for _ in 1..k {
        let next = x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Coefficients c_0..=c_degree of ∏_{j=0}^{m} (1 − α^{m−j}β^j x)^{−1}.
/// Computed as a product of complex geometric series, then projected to the
/// real line.
pub fn sym_power_series(m: u32, s: &SatakeLocal, degree: usize) -> Vec<f64> {
    let mut acc = vec![Complex64::new(0.0, 0.0); degree + 1];
    acc[0] = Complex64::new(1.0, 0.0);
    for j in 0..=m {
        let root = Complex64::from_polar(1.0, (m as f64 - 2.0 * j as f64) * s.theta);
        // multiply by 1/(1 − root·x): c_k += root·c_{k−1}, in increasing k
        for k in 1..=degree {
            let prev = acc[k - 1];
            acc[k] += root * prev;
        }
    }
    acc.into_iter().map(|c| c.re).collect()
}

/// Coefficients of ∏_j (1 − α^{m−j}β^j x), a real polynomial of degree m+1.
/// Conjugate roots are paired, so only real arithmetic is used.
pub fn sym_power_det(m: u32, lambda_p: f64) -> Vec<f64> {
    let mut poly = vec![1.0];
    let mut mul_by = |factor: &[f64]| {
        let mut next = vec![0.0; poly.len() + factor.len() - 1];
        for (i, a) in poly.iter().enumerate() {
            for (j, b) in factor.iter().enumerate() {
                next[i + j] += a * b;
            }
        }
        poly = next;
    };
    for j in 0..(m + 1) / 2 {
        let v = chebyshev_v(m - 2 * j, lambda_p);
        mul_by(&[1.0, -v, 1.0]);
    }
    if m % 2 == 0 {
        mul_by(&[1.0, -1.0]);
    }
    poly
}

fn binomial_signed(r: i64, n: i64) -> i64 {
    if n < 0 || n > r {
        0
    } else {
        num_integer::binomial(r, n)
    }
}

/// A_{ℓ,j} = C(ℓ, (ℓ−j)/2) − C(ℓ, (ℓ−j)/2 − 1) when j ≡ ℓ (mod 2), else 0.
/// With this indexing x^ℓ = Σ_j A_{ℓ,j}·U_j(x/2): the coefficient belongs
/// to the degree-j polynomial, not the degree-(ℓ−j) one.
pub fn chebyshev_a(ell: u32, j: u32) -> i64 {
    assert!(j <= ell, "chebyshev_a needs j ≤ ℓ");
    if (ell - j) % 2 != 0 {
        return 0;
    }
    let h = ((ell - j) / 2) as i64;
    binomial_signed(ell as i64, h) - binomial_signed(ell as i64, h - 1)
}

/// Multiplicity C(r, n) − C(r, n−1) of sym^{r−2n} in the r-th tensor power.
pub fn sym_multiplicity(r: u32, n: u32) -> i64 {
    binomial_signed(r as i64, n as i64) - binomial_signed(r as i64, n as i64 - 1)
}

/// Σ_{n=0}^{⌊r/2⌋} (C(r,n) − C(r,n−1))·λ_{sym^{r−2n}}(p); equals λ(p)^r.
pub fn power_decomposition(r: u32, s: &SatakeLocal) -> f64 {
    (0..=r / 2)
        .map(|n| sym_multiplicity(r, n) as f64 * sym_lambda_p(r - 2 * n, s))
        .sum()
}

/// Outcome of the integer form of the decomposition at one prime.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDecomposition {
    pub p: u64,
    pub r: u32,
    /// a(p)^r
    pub lhs: BigInt,
    /// Σ_n e_n·p^{(k−1)n}·a(p^{r−2n})
    pub rhs: BigInt,
    /// |lhs − rhs| / |lhs|, or |rhs| when lhs = 0.
    pub relative_error: f64,
}

/// λ(p)^r = Σ_n e_n·λ(p^{r−2n}) multiplied through by p^{(k−1)r/2}, so that
/// both sides are integers: a(p)^r = Σ_n e_n·p^{(k−1)n}·a(p^{r−2n}), with
/// a(p^m) from a(p^{m+1}) = a(p)a(p^m) − p^{k−1}a(p^{m−1}). Floating point
/// cannot resolve the left side when |λ(p)|^r is tiny, since the right side
/// cancels terms of size O(1).
pub fn power_decomposition_exact(r: u32, p: u64, a_p: &BigInt, weight: u32) -> ExactDecomposition {
    let pk = BigInt::from(p).pow(weight - 1);
    let mut powers = vec![BigInt::one(), a_p.clone()];
    for m in 2..=r as usize {
        let next = a_p * &powers[m - 1] - &pk * &powers[m - 2];
        powers.push(next);
    }
    let lhs = a_p.pow(r);
    let mut rhs = BigInt::zero();
    let mut pk_n = BigInt::one();
    for n in 0..=r / 2 {
        rhs += sym_multiplicity(r, n) * &pk_n * &powers[(r - 2 * n) as usize];
        pk_n *= &pk;
    }
    let diff = (&lhs - &rhs).abs();
    let relative_error = if diff.is_zero() {
        0.0
    } else if lhs.is_zero() {
        f64::INFINITY
    } else {
        let scale = lhs.abs().bits().saturating_sub(60);
        let num = (&diff >> scale).to_f64().unwrap_or(f64::INFINITY);
        let den = (lhs.abs() >> scale).to_f64().unwrap_or(f64::INFINITY);
        num / den
    };
    ExactDecomposition {
        p,
        r,
        lhs,
        rhs,
        relative_error,
    }
}
