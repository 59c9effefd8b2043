//! The three concrete function forms and their expansion to a single
//! numerator/denominator pair.
//!
//! Kernel forms are always evaluated term by term; expanding them over a
//! common denominator is reserved for degree audits and Sturm
//! certification because the bump scales of stacked constructions span
//! many orders of magnitude and the expanded coefficients lose accuracy.

use serde::Serialize;

use super::RatcoreError;
use crate::poly::{chebyshev_points, Poly, SturmChain};

/// Scale ratio beyond which expansion over a common denominator is flagged
/// as accuracy-destroying.
pub const DYNAMIC_RANGE_LIMIT: f64 = 1e12;

/// A ratio of two real polynomials, continuous on `[-1, 1]`.
///
/// `declared_degree` is the degree-class bound: both numerator and
/// denominator degrees stay at or below it.
#[derive(Clone, Debug)]
pub struct RationalFn {
    numer: Poly,
    denom: Poly,
    declared_degree: usize,
}

impl RationalFn {
    /// Validates the denominator (nonzero on `[-1, 1]`) and the degree
    /// bound before accepting the representation.
    pub fn new(numer: Poly, denom: Poly, declared_degree: usize) -> Result<Self, RatcoreError> {
        if denom.is_zero() {
            return Err(RatcoreError::InvalidForm(
                "denominator is the zero polynomial".into(),
            ));
        }
        let deg = numer.degree().max(denom.degree());
        if deg > declared_degree {
            return Err(RatcoreError::DegreeExceeded {
                actual: deg,
                declared: declared_degree,
            });
        }
        if let Some(near) = denominator_root_in_unit_interval(&denom) {
            return Err(RatcoreError::DenominatorVanishes { near });
        }
        Ok(RationalFn {
            numer,
            denom,
            declared_degree,
        })
    }

    /// Skips the denominator-root scan. For internal construction paths
    /// where the denominator is a product of manifestly positive factors.
    pub(crate) fn new_unchecked(numer: Poly, denom: Poly, declared_degree: usize) -> Self {
        RationalFn {
            numer,
            denom,
            declared_degree,
        }
    }

    pub fn numer(&self) -> &Poly {
        &self.numer
    }

    pub fn denom(&self) -> &Poly {
        &self.denom
    }

    pub fn declared_degree(&self) -> usize {
        self.declared_degree
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.numer.eval(x) / self.denom.eval(x)
    }

    pub fn derivative_at(&self, x: f64) -> f64 {
        let p = self.numer.eval(x);
        let q = self.denom.eval(x);
        let dp = self.numer.derivative().eval(x);
        let dq = self.denom.derivative().eval(x);
        (dp * q - p * dq) / (q * q)
    }

    /// Numerator of the derivative, `p'q − pq'`. The derivative of the
    /// function has the same sign as this polynomial on `[-1, 1]`.
    pub fn derivative_numerator(&self) -> Poly {
        self.numer
            .derivative()
            .mul(&self.denom)
            .sub(&self.numer.mul(&self.denom.derivative()))
    }
}

/// Checks whether the denominator vanishes somewhere on `[-1, 1]`.
/// Sturm-based; falls back to a dense sign/magnitude scan when the chain
/// is numerically unreliable.
fn denominator_root_in_unit_interval(q: &Poly) -> Option<f64> {
    if q.degree() == 0 {
        return None;
    }
    let chain = SturmChain::build(q);
    if q.sign_at(-1.0) == 0 {
        return Some(-1.0);
    }
    if q.sign_at(1.0) == 0 {
        return Some(1.0);
    }
    if let Some(count) = chain.count_roots(-1.0, 1.0) {
        if count == 0 {
            return None;
        }
        if let Some(intervals) = chain.isolate_roots(-1.0, 1.0, 1e-12) {
            if let Some((lo, hi)) = intervals.first() {
                return Some(0.5 * (lo + hi));
            }
        }
        return Some(f64::NAN);
    }
    // Unreliable chain: scan for sign changes or magnitude collapse.
    let pts = chebyshev_points(4097, -1.0, 1.0);
    let mut prev: Option<(f64, i8)> = None;
    for &x in &pts {
        let (v, mag) = q.eval_with_magnitude(x);
        if v.abs() <= 1e-9 * mag.max(f64::MIN_POSITIVE) {
            return Some(x);
        }
        let s = if v > 0.0 { 1 } else { -1 };
        if let Some((px, ps)) = prev {
            if ps != s {
                return Some(0.5 * (px + x));
            }
        }
        prev = Some((x, s));
    }
    None
}

/// One term `c·z²x/(z² + 3x²)` of a comparison kernel sum.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct KernelTerm {
    /// Positive weight `c`.
    pub weight: f64,
    /// Node `z ∈ (0, 1]`.
    pub node: f64,
}

/// An odd sum `Σ c_k·z_k²x/(z_k² + 3x²)` with strictly decreasing nodes.
#[derive(Clone, Debug, Serialize)]
pub struct KernelSum {
    terms: Vec<KernelTerm>,
}

impl KernelSum {
    pub fn new(terms: Vec<KernelTerm>) -> Result<Self, RatcoreError> {
        if terms.is_empty() {
            return Err(RatcoreError::InvalidForm("kernel sum has no terms".into()));
        }
        for t in &terms {
            if !(t.weight > 0.0) || !t.weight.is_finite() {
                return Err(RatcoreError::InvalidForm(format!(
                    "kernel weight must be positive, got {}",
                    t.weight
                )));
            }
            if !(t.node > 0.0 && t.node <= 1.0) {
                return Err(RatcoreError::InvalidForm(format!(
                    "kernel node must lie in (0, 1], got {}",
                    t.node
                )));
            }
        }
        if !terms.windows(2).all(|w| w[0].node > w[1].node) {
            return Err(RatcoreError::InvalidForm(
                "kernel nodes must be strictly decreasing".into(),
            ));
        }
        Ok(KernelSum { terms })
    }

    pub fn terms(&self) -> &[KernelTerm] {
        &self.terms
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.weight * scaled_kernel_value(x, t.node, 3.0))
            .sum()
    }

    /// Closed-form derivative `Σ c_k·z_k²(z_k² − 3x²)/(z_k² + 3x²)²`.
    /// Exactly the weight sum at `x = 0`.
    pub fn derivative_at(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.weight * scaled_kernel_slope(x, t.node, 3.0))
            .sum()
    }

    /// Sum of `|term|` in the derivative; the term-cancellation scale.
    pub(crate) fn derivative_magnitude(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| (t.weight * scaled_kernel_slope(x, t.node, 3.0)).abs())
            .sum()
    }
}

/// `s²x/(s² + λx²)` evaluated as `x/(1 + t)` with `t = λ(x/s)²`, which
/// survives scales far below the fourth-power underflow threshold of the
/// raw formula. The far tail (`t` overflowing) falls back to `s²/(λx)`.
fn scaled_kernel_value(x: f64, scale: f64, lambda: f64) -> f64 {
    let r = x / scale;
    let t = lambda * r * r;
    if t.is_finite() {
        x / (1.0 + t)
    } else {
        (scale / x) * (scale / lambda)
    }
}

/// `s²(s² − λx²)/(s² + λx²)²` evaluated as `(1 − t)/(1 + t)²` with
/// `t = λ(x/s)²`: exactly 1 at `x = 0`, exactly 0 at `t = 1`, and exactly
/// `−1/8` at `t = 3`. The far tail falls back to `−(s/x)²/λ`.
fn scaled_kernel_slope(x: f64, scale: f64, lambda: f64) -> f64 {
    let r = x / scale;
    let t = lambda * r * r;
    if t.is_finite() {
        let one_plus = 1.0 + t;
        (1.0 - t) / (one_plus * one_plus)
    } else {
        let s = scale / x;
        -s * s / lambda
    }
}

/// One bump `a·γ²x/(γ² + x²)`: odd, unit slope at the origin per unit
/// amplitude, sup-norm `a·γ/2` attained at `x = γ`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Bump {
    /// Positive amplitude `a`.
    pub amplitude: f64,
    /// Positive scale `γ`.
    pub scale: f64,
}

/// The extremal-construction form `s·x + Σ a_j·γ_j²x/(γ_j² + x²)` with
/// strictly decreasing scales.
#[derive(Clone, Debug, Serialize)]
pub struct LinearPlusBumps {
    slope: f64,
    bumps: Vec<Bump>,
}

impl LinearPlusBumps {
    pub fn new(slope: f64, bumps: Vec<Bump>) -> Result<Self, RatcoreError> {
        if !(slope > 0.0) || !slope.is_finite() {
            return Err(RatcoreError::InvalidForm(format!(
                "slope must be positive, got {slope}"
            )));
        }
        for b in &bumps {
            if !(b.amplitude > 0.0) || !b.amplitude.is_finite() {
                return Err(RatcoreError::InvalidForm(format!(
                    "bump amplitude must be positive, got {}",
                    b.amplitude
                )));
            }
            if !(b.scale > 0.0) || !b.scale.is_finite() {
                return Err(RatcoreError::InvalidForm(format!(
                    "bump scale must be positive, got {}",
                    b.scale
                )));
            }
        }
        if !bumps.windows(2).all(|w| w[0].scale > w[1].scale) {
            return Err(RatcoreError::InvalidForm(
                "bump scales must be strictly decreasing".into(),
            ));
        }
        Ok(LinearPlusBumps { slope, bumps })
    }

    /// The identity function `x` (slope one, no bumps).
    pub fn identity() -> Self {
        LinearPlusBumps {
            slope: 1.0,
            bumps: Vec::new(),
        }
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn bumps(&self) -> &[Bump] {
        &self.bumps
    }

    /// Returns a copy with one more bump appended; its scale must be
    /// strictly below every existing scale.
    pub fn with_bump(&self, amplitude: f64, scale: f64) -> Result<Self, RatcoreError> {
        let mut bumps = self.bumps.clone();
        bumps.push(Bump { amplitude, scale });
        LinearPlusBumps::new(self.slope, bumps)
    }

    /// Scales the whole function by `c > 0` (slope and amplitudes).
    pub fn scaled(&self, c: f64) -> Result<Self, RatcoreError> {
        LinearPlusBumps::new(
            self.slope * c,
            self.bumps
                .iter()
                .map(|b| Bump {
                    amplitude: b.amplitude * c,
                    scale: b.scale,
                })
                .collect(),
        )
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = self.slope * x;
        for b in &self.bumps {
            acc += b.amplitude * scaled_kernel_value(x, b.scale, 1.0);
        }
        acc
    }

    /// Closed-form derivative `s + Σ a_j·γ_j²(γ_j² − x²)/(γ_j² + x²)²`.
    /// At `x = 0` this is exactly `s + Σ a_j`.
    pub fn derivative_at(&self, x: f64) -> f64 {
        let mut acc = self.slope;
        for b in &self.bumps {
            acc += b.amplitude * scaled_kernel_slope(x, b.scale, 1.0);
        }
        acc
    }

    /// Sum of `|term|` in the derivative; the term-cancellation scale.
    pub(crate) fn derivative_magnitude(&self, x: f64) -> f64 {
        let mut acc = self.slope.abs();
        for b in &self.bumps {
            acc += (b.amplitude * scaled_kernel_slope(x, b.scale, 1.0)).abs();
        }
        acc
    }

    /// Exact derivative at the origin: the slope plus the sum of the
    /// stored amplitudes.
    pub fn derivative_at_zero(&self) -> f64 {
        self.slope + self.bumps.iter().map(|b| b.amplitude).sum::<f64>()
    }
}

/// `z²x/(z² + 3x²)` or `γ²x/(γ² + x²)` as a numerator/denominator pair
/// over `scale²`; `triple` selects the `3x²` variant.
fn kernel_fraction(scale: f64, triple: bool) -> (Poly, Poly) {
    let s2 = scale * scale;
    let numer = Poly::new(vec![0.0, s2]);
    let denom = Poly::new(vec![s2, 0.0, if triple { 3.0 } else { 1.0 }]);
    (numer, denom)
}

/// Expands a list of simple fractions `w_k·n_k/d_k` plus an optional
/// polynomial offset over the common denominator `Π d_k`.
fn expand_over_common_denominator(
    offset: Option<&Poly>,
    parts: &[(f64, Poly, Poly)],
) -> (Poly, Poly) {
    let mut denom = Poly::constant(1.0);
    for (_, _, d) in parts {
        denom = denom.mul(d);
    }
    let mut numer = match offset {
        Some(p) => p.mul(&denom),
        None => Poly::zero(),
    };
    for (i, (w, n, _)) in parts.iter().enumerate() {
        let mut term = n.scale(*w);
        for (j, (_, _, d)) in parts.iter().enumerate() {
            if i != j {
                term = term.mul(d);
            }
        }
        numer = numer.add(&term);
    }
    (numer, denom)
}

impl KernelSum {
    /// Ratio of the largest to the smallest node.
    pub fn dynamic_range(&self) -> f64 {
        let max = self.terms.first().map(|t| t.node).unwrap_or(1.0);
        let min = self.terms.last().map(|t| t.node).unwrap_or(1.0);
        max / min
    }

    /// Expands to a single `p/q`; an `n`-term sum lands in degree class
    /// `2n` with an odd numerator of degree `2n − 1` and an even
    /// denominator of degree `2n`.
    pub fn to_rational(&self) -> RationalFn {
        if self.dynamic_range() > DYNAMIC_RANGE_LIMIT {
            log::warn!(
                "expanding a kernel sum with node ratio {:.3e}: coefficients span a range \
                 where double precision loses the small scales",
                self.dynamic_range()
            );
        }
        let parts: Vec<(f64, Poly, Poly)> = self
            .terms
            .iter()
            .map(|t| {
                let (n, d) = kernel_fraction(t.node, true);
                (t.weight, n, d)
            })
            .collect();
        let (numer, denom) = expand_over_common_denominator(None, &parts);
        RationalFn::new_unchecked(numer, denom, 2 * self.terms.len())
    }
}

impl LinearPlusBumps {
    /// Ratio of the largest to the smallest bump scale (1 without bumps).
    pub fn dynamic_range(&self) -> f64 {
        match (self.bumps.first(), self.bumps.last()) {
            (Some(a), Some(b)) => a.scale / b.scale,
            _ => 1.0,
        }
    }

    /// Expands to a single `p/q`; `m` bumps plus the linear term land in
    /// degree class `2m + 1`.
    pub fn to_rational(&self) -> RationalFn {
        if self.dynamic_range() > DYNAMIC_RANGE_LIMIT {
            log::warn!(
                "expanding a bump stack with scale ratio {:.3e}: coefficients span a range \
                 where double precision loses the small scales",
                self.dynamic_range()
            );
        }
        let parts: Vec<(f64, Poly, Poly)> = self
            .bumps
            .iter()
            .map(|b| {
                let (n, d) = kernel_fraction(b.scale, false);
                (b.amplitude, n, d)
            })
            .collect();
        let offset = Poly::new(vec![0.0, self.slope]);
        let (numer, denom) = expand_over_common_denominator(Some(&offset), &parts);
        RationalFn::new_unchecked(numer, denom, 2 * self.bumps.len() + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_rejects_vanishing_denominator() {
        // 1/x has a pole at 0
        let err = RationalFn::new(Poly::constant(1.0), Poly::x(), 1).unwrap_err();
        match err {
            RatcoreError::DenominatorVanishes { near } => assert!(near.abs() < 1e-6),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rational_rejects_degree_overflow() {
        let err = RationalFn::new(
            Poly::new(vec![0.0, 0.0, 1.0]),
            Poly::constant(1.0),
            1,
        )
        .unwrap_err();
        assert!(matches!(err, RatcoreError::DegreeExceeded { .. }));
    }

    #[test]
    fn kernel_sum_requires_decreasing_nodes() {
        let terms = vec![
            KernelTerm {
                weight: 1.0,
                node: 0.3,
            },
            KernelTerm {
                weight: 1.0,
                node: 0.5,
            },
        ];
        assert!(KernelSum::new(terms).is_err());
    }

    #[test]
    fn kernel_value_matches_direct_substitution() {
        // c=4, z=1 at x=1: 4·1·1/(1+3) = 1
        let k = KernelSum::new(vec![KernelTerm {
            weight: 4.0,
            node: 1.0,
        }])
        .unwrap();
        assert_eq!(k.eval(1.0), 1.0);
    }

    #[test]
    fn kernel_slope_at_origin_is_exactly_the_weight() {
        for &(c, z) in &[(4.0, 1.0), (36.0, 0.123), (0.7, 0.05)] {
            let k = KernelSum::new(vec![KernelTerm { weight: c, node: z }]).unwrap();
            assert_eq!(k.derivative_at(0.0), c);
        }
    }

    #[test]
    fn bump_stack_derivative_at_zero_is_exact_sum() {
        let f = LinearPlusBumps::new(
            1.0,
            vec![
                Bump {
                    amplitude: 7.84,
                    scale: 0.1,
                },
                Bump {
                    amplitude: 0.25,
                    scale: 0.001,
                },
            ],
        )
        .unwrap();
        assert_eq!(f.derivative_at(0.0), 1.0 + 7.84 + 0.25);
        assert_eq!(f.derivative_at_zero(), 1.0 + 7.84 + 0.25);
    }

    #[test]
    fn bump_value_at_own_scale_is_half_scale() {
        // γ²x/(γ²+x²) at x=γ equals γ/2
        let f = LinearPlusBumps::new(
            1.0,
            vec![Bump {
                amplitude: 1.0,
                scale: 0.1,
            }],
        )
        .unwrap();
        let bump_only = f.eval(0.1) - 1.0 * 0.1;
        assert!((bump_only - 0.05).abs() < 1e-15);
    }

    #[test]
    fn single_bump_expansion_structure() {
        // one bump, γ = 1: numer (0, 1), denom (1, 0, 1), degree class 2
        let (n, d) = kernel_fraction(1.0, false);
        assert_eq!(n.coeffs(), &[0.0, 1.0]);
        assert_eq!(d.coeffs(), &[1.0, 0.0, 1.0]);
    }

    #[test]
    fn kernel_expansion_degrees() {
        let k = KernelSum::new(vec![
            KernelTerm {
                weight: 4.0,
                node: 0.9,
            },
            KernelTerm {
                weight: 36.0,
                node: 0.2,
            },
        ])
        .unwrap();
        let r = k.to_rational();
        assert_eq!(r.declared_degree(), 4);
        assert_eq!(r.numer().degree(), 3);
        assert_eq!(r.denom().degree(), 4);
        // numerator odd, denominator even
        for (i, &c) in r.numer().coeffs().iter().enumerate() {
            if i % 2 == 0 {
                assert_eq!(c, 0.0);
            }
        }
        for (i, &c) in r.denom().coeffs().iter().enumerate() {
            if i % 2 == 1 {
                assert_eq!(c, 0.0);
            }
        }
    }

    #[test]
    fn expansion_agrees_pointwise() {
        let k = KernelSum::new(vec![
            KernelTerm {
                weight: 4.0,
                node: 1.0,
            },
            KernelTerm {
                weight: 36.0,
                node: 0.1,
            },
        ])
        .unwrap();
        let r = k.to_rational();
        for i in 0..=1000 {
            let x = -1.0 + 0.002 * i as f64;
            assert!(
                (k.eval(x) - r.eval(x)).abs() <= 1e-12 * (1.0 + k.eval(x).abs()),
                "mismatch at {x}"
            );
        }
    }
}
