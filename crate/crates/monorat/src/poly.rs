//! Dense univariate real polynomials.
//!
//! Coefficients are stored ascending by degree and trimmed of trailing
//! zeros. This module carries exactly what the rest of the crate needs:
//! Horner evaluation with a running magnitude estimate (for scale-aware
//! sign decisions), arithmetic, affine composition, and a normalized
//! Sturm chain for counting real roots on an interval.

use std::fmt;

/// Relative threshold below which an evaluated value is considered to have
/// indeterminate sign (lost to rounding).
const SIGN_EPS: f64 = 1e-12;

/// Relative threshold below which a polynomial-division remainder is
/// treated as exactly zero when building a Sturm chain.
const REMAINDER_ZERO: f64 = 1e-13;

/// A polynomial with real coefficients, ascending by degree.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    /// Builds a polynomial from ascending coefficients, trimming trailing
    /// zeros so the leading coefficient is nonzero (the zero polynomial is
    /// stored as an empty coefficient list).
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Poly {
            coeffs: vec![0.0, 1.0],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of the polynomial; 0 for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap_or(&0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Horner evaluation together with `Σ |c_i||x|^i`, the natural scale
    /// against which the rounding error of the result is measured.
    pub fn eval_with_magnitude(&self, x: f64) -> (f64, f64) {
        let ax = x.abs();
        let mut val = 0.0;
        let mut mag = 0.0;
        for &c in self.coeffs.iter().rev() {
            val = val * x + c;
            mag = mag * ax + c.abs();
        }
        (val, mag)
    }

    /// Sign of `p(x)` with a scale-aware dead zone: returns 0 when the
    /// value is smaller than the accumulated rounding scale allows to
    /// distinguish from zero.
    pub fn sign_at(&self, x: f64) -> i8 {
        let (val, mag) = self.eval_with_magnitude(x);
        if val.abs() <= SIGN_EPS * mag {
            0
        } else if val > 0.0 {
            1
        } else {
            -1
        }
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn neg(&self) -> Poly {
        self.scale(-1.0)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0.0; n];
        for (i, &c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, &c) in other.coeffs.iter().enumerate() {
            out[i] += c;
        }
        Poly::new(out)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// Euclidean division: returns `(quotient, remainder)`.
    ///
    /// Panics if `divisor` is the zero polynomial.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        if self.degree() < divisor.degree() || self.is_zero() {
            return (Poly::zero(), self.clone());
        }
        let mut rem = self.coeffs.clone();
        let dn = divisor.degree();
        let lead = divisor.leading();
        let mut quot = vec![0.0; rem.len() - dn];
        for i in (dn..rem.len()).rev() {
            let q = rem[i] / lead;
            quot[i - dn] = q;
            if q != 0.0 {
                for (j, &dc) in divisor.coeffs.iter().enumerate() {
                    rem[i - dn + j] -= q * dc;
                }
            }
            rem[i] = 0.0;
        }
        (Poly::new(quot), Poly::new(rem))
    }

    /// Coefficients of `p(a + b·y)` as a polynomial in `y`.
    pub fn compose_affine(&self, a: f64, b: f64) -> Poly {
        let arg = Poly::new(vec![a, b]);
        let mut out = Poly::zero();
        for &c in self.coeffs.iter().rev() {
            out = out.mul(&arg).add(&Poly::constant(c));
        }
        out
    }

    /// Divides by the largest absolute coefficient so the result has
    /// coefficients in `[-1, 1]`. No-op on the zero polynomial.
    pub fn normalized(&self) -> Poly {
        let m = self.max_abs_coeff();
        if m == 0.0 {
            self.clone()
        } else {
            self.scale(1.0 / m)
        }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "{c}·x^{i}")?;
            first = false;
        }
        Ok(())
    }
}

/// A Sturm chain plus bookkeeping about how trustworthy it is.
///
/// Every element is normalized to unit max-coefficient (positive scaling
/// preserves the sign-variation property). Chains built from severely
/// ill-conditioned inputs are flagged `reliable = false` and must not be
/// used as certification evidence.
pub struct SturmChain {
    chain: Vec<Poly>,
    /// False when remainder magnitudes decayed into rounding noise or the
    /// variation counts are internally inconsistent.
    pub reliable: bool,
}

impl SturmChain {
    /// Builds the chain for `p` (normalized).
    pub fn build(p: &Poly) -> SturmChain {
        let p0 = p.normalized();
        let mut chain = vec![p0.clone()];
        let d = p0.derivative();
        if d.is_zero() {
            return SturmChain {
                chain,
                reliable: true,
            };
        }
        chain.push(d.normalized());
        let mut reliable = true;
        loop {
            let n = chain.len();
            let (_, rem) = chain[n - 2].div_rem(&chain[n - 1]);
            let scale = rem.max_abs_coeff();
            if scale <= REMAINDER_ZERO {
                break;
            }
            // A remainder that barely clears the zero threshold is noise
            // amplified by the upcoming normalization.
            if scale <= 1e-9 {
                reliable = false;
            }
            chain.push(rem.neg().normalized());
            if chain.len() > p0.degree() + 2 {
                reliable = false;
                break;
            }
        }
        SturmChain { chain, reliable }
    }

    /// Number of sign variations of the chain at `x`, skipping values whose
    /// sign is indeterminate at working precision.
    pub fn variations(&self, x: f64) -> usize {
        let mut count = 0;
        let mut last: i8 = 0;
        for p in &self.chain {
            let s = p.sign_at(x);
            if s == 0 {
                continue;
            }
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
        count
    }

    /// Counts distinct real roots in `(a, b]`, or `None` when the chain is
    /// unreliable or the variation counts are inconsistent.
    pub fn count_roots(&self, a: f64, b: f64) -> Option<usize> {
        if !self.reliable {
            return None;
        }
        let va = self.variations(a);
        let vm = self.variations(0.5 * (a + b));
        let vb = self.variations(b);
        if va < vm || vm < vb {
            return None;
        }
        Some(va - vb)
    }

    /// Splits `(a, b]` into subintervals each containing exactly one
    /// distinct root, down to width `min_width`. Intervals that cannot be
    /// split further are returned as-is (clustered roots).
    pub fn isolate_roots(&self, a: f64, b: f64, min_width: f64) -> Option<Vec<(f64, f64)>> {
        let total = self.count_roots(a, b)?;
        let mut out = Vec::new();
        let mut stack = vec![(a, b, total)];
        while let Some((lo, hi, k)) = stack.pop() {
            if k == 0 {
                continue;
            }
            if k == 1 || hi - lo < min_width {
                out.push((lo, hi));
                continue;
            }
            let mid = 0.5 * (lo + hi);
            let left = self.count_roots(lo, mid)?;
            let right = self.count_roots(mid, hi)?;
            if left + right != k {
                return None;
            }
            stack.push((lo, mid, left));
            stack.push((mid, hi, right));
        }
        out.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
        Some(out)
    }
}

/// Chebyshev points of the first kind mapped to `[lo, hi]`, ascending.
pub fn chebyshev_points(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    assert!(n >= 2);
    let c = 0.5 * (lo + hi);
    let r = 0.5 * (hi - lo);
    let mut pts: Vec<f64> = (0..n)
        .map(|i| {
            let theta = std::f64::consts::PI * (2 * i + 1) as f64 / (2 * n) as f64;
            c + r * theta.cos()
        })
        .collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts
}
