//! Function representations and their calculus on `[-1, 1]`.
//!
//! [`FnExpr`] is the uniform handle the rest of the crate works with:
//! a rational function, one of the two odd kernel forms, a difference of
//! two expressions, or an opaque evaluator pair. Evaluation and
//! differentiation are closed-form throughout; nothing here differentiates
//! numerically.

mod certify;
mod forms;
mod norm;
mod schema;

pub use certify::{
    certify_increasing, certify_increasing_with, CertifyError, Method, MethodPref, Mode,
    MonotoneCertificate, MonotoneFailure, Witness,
};
pub use forms::{Bump, KernelSum, KernelTerm, LinearPlusBumps, RationalFn, DYNAMIC_RANGE_LIMIT};
pub use norm::{sup_norm, sup_norm_with, NormOptions};
pub(crate) use norm::golden_max;
pub use schema::{
    from_json_str, from_schema, to_json_string, to_schema, FunctionSchema, JsonParseError,
};

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

use crate::poly::Poly;

#[derive(Debug, Error)]
pub enum RatcoreError {
    #[error("argument {x} lies outside the domain [-1, 1]")]
    DomainError { x: f64 },
    #[error("transfer point {x0} must lie in the open interval (0, 1)")]
    TransferPointOutOfRange { x0: f64 },
    #[error("denominator vanishes on [-1, 1] near x = {near}")]
    DenominatorVanishes { near: f64 },
    #[error("degree {actual} exceeds the declared degree bound {declared}")]
    DegreeExceeded { actual: usize, declared: usize },
    #[error("malformed function: {0}")]
    InvalidForm(String),
    #[error("expression has no rational-function expansion")]
    NotRational,
    #[error("function JSON is invalid: {0}")]
    Schema(String),
}

/// An opaque odd/even-aware evaluator pair, used where the pipeline needs
/// a function that is not representable by the rational forms (for
/// example the odd extension of a non-rational target).
#[derive(Clone)]
pub struct CustomFn {
    pub name: String,
    pub odd: bool,
    pub f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub df: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for CustomFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CustomFn")
            .field("name", &self.name)
            .field("odd", &self.odd)
            .finish()
    }
}

/// A function on `[-1, 1]` built from the supported forms.
#[derive(Clone, Debug)]
pub enum FnExpr {
    Rational(RationalFn),
    Kernel(KernelSum),
    Bumps(LinearPlusBumps),
    Difference(Box<FnExpr>, Box<FnExpr>),
    Custom(CustomFn),
}

impl From<RationalFn> for FnExpr {
    fn from(r: RationalFn) -> Self {
        FnExpr::Rational(r)
    }
}

impl From<KernelSum> for FnExpr {
    fn from(k: KernelSum) -> Self {
        FnExpr::Kernel(k)
    }
}

impl From<LinearPlusBumps> for FnExpr {
    fn from(b: LinearPlusBumps) -> Self {
        FnExpr::Bumps(b)
    }
}

impl FnExpr {
    pub fn difference(a: FnExpr, b: FnExpr) -> FnExpr {
        FnExpr::Difference(Box::new(a), Box::new(b))
    }

    /// Evaluates at `x ∈ [-1, 1]`.
    pub fn eval(&self, x: f64) -> Result<f64, RatcoreError> {
        if !(-1.0..=1.0).contains(&x) {
            return Err(RatcoreError::DomainError { x });
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        match self {
            FnExpr::Rational(r) => r.eval(x),
            FnExpr::Kernel(k) => k.eval(x),
            FnExpr::Bumps(b) => b.eval(x),
            FnExpr::Difference(a, b) => a.eval_unchecked(x) - b.eval_unchecked(x),
            FnExpr::Custom(c) => (c.f)(x),
        }
    }

    /// Closed-form derivative at `x ∈ [-1, 1]`.
    pub fn derivative_at(&self, x: f64) -> Result<f64, RatcoreError> {
        if !(-1.0..=1.0).contains(&x) {
            return Err(RatcoreError::DomainError { x });
        }
        Ok(self.derivative_unchecked(x))
    }

    pub(crate) fn derivative_unchecked(&self, x: f64) -> f64 {
        match self {
            FnExpr::Rational(r) => r.derivative_at(x),
            FnExpr::Kernel(k) => k.derivative_at(x),
            FnExpr::Bumps(b) => b.derivative_at(x),
            FnExpr::Difference(a, b) => a.derivative_unchecked(x) - b.derivative_unchecked(x),
            FnExpr::Custom(c) => (c.df)(x),
        }
    }

    /// Sum of the magnitudes of the derivative's additive terms at `x`:
    /// the natural scale against which rounding noise in
    /// `derivative_at(x)` is measured.
    pub(crate) fn derivative_magnitude(&self, x: f64) -> f64 {
        match self {
            FnExpr::Rational(r) => {
                let q = r.denom().eval(x);
                let a = r.numer().derivative().eval(x) * q;
                let b = r.numer().eval(x) * r.denom().derivative().eval(x);
                (a.abs() + b.abs()) / (q * q)
            }
            FnExpr::Kernel(k) => k.derivative_magnitude(x),
            FnExpr::Bumps(b) => b.derivative_magnitude(x),
            FnExpr::Difference(a, b) => a.derivative_magnitude(x) + b.derivative_magnitude(x),
            FnExpr::Custom(c) => (c.df)(x).abs(),
        }
    }

    /// Hash of the exact coefficient data; monotonicity certificates are
    /// bound to this value and become invalid for any other coefficients.
    pub fn identity_hash(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.hash_into(&mut h);
        h.finish()
    }

    fn hash_into(&self, h: &mut DefaultHasher) {
        fn bits(h: &mut DefaultHasher, v: f64) {
            v.to_bits().hash(h);
        }
        match self {
            FnExpr::Rational(r) => {
                0u8.hash(h);
                for &c in r.numer().coeffs() {
                    bits(h, c);
                }
                u64::MAX.hash(h);
                for &c in r.denom().coeffs() {
                    bits(h, c);
                }
                r.declared_degree().hash(h);
            }
            FnExpr::Kernel(k) => {
                1u8.hash(h);
                for t in k.terms() {
                    bits(h, t.weight);
                    bits(h, t.node);
                }
            }
            FnExpr::Bumps(b) => {
                2u8.hash(h);
                bits(h, b.slope());
                for bump in b.bumps() {
                    bits(h, bump.amplitude);
                    bits(h, bump.scale);
                }
            }
            FnExpr::Difference(a, b) => {
                3u8.hash(h);
                a.hash_into(h);
                b.hash_into(h);
            }
            FnExpr::Custom(c) => {
                4u8.hash(h);
                c.name.hash(h);
                c.odd.hash(h);
            }
        }
    }

    /// True when oddness follows from the representation itself: kernel
    /// forms are odd by construction, rational forms with an odd numerator
    /// and even denominator are odd, differences of odd functions are odd.
    pub fn is_structurally_odd(&self) -> bool {
        match self {
            FnExpr::Rational(r) => {
                let numer_odd = r
                    .numer()
                    .coeffs()
                    .iter()
                    .enumerate()
                    .all(|(i, &c)| i % 2 == 1 || c == 0.0);
                let denom_even = r
                    .denom()
                    .coeffs()
                    .iter()
                    .enumerate()
                    .all(|(i, &c)| i % 2 == 0 || c == 0.0);
                numer_odd && denom_even
            }
            FnExpr::Kernel(_) | FnExpr::Bumps(_) => true,
            FnExpr::Difference(a, b) => a.is_structurally_odd() && b.is_structurally_odd(),
            FnExpr::Custom(c) => c.odd,
        }
    }

    /// Largest `|f(x) + f(−x)|` over a uniform sample of `(0, 1]`.
    pub fn odd_defect(&self, samples: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 1..=samples {
            let x = i as f64 / samples as f64;
            let d = (self.eval_unchecked(x) + self.eval_unchecked(-x)).abs();
            worst = worst.max(d);
        }
        worst
    }

    /// Degree-class bound (`Q_n` membership) when the expression has one.
    pub fn degree_bound(&self) -> Option<usize> {
        match self {
            FnExpr::Rational(r) => Some(r.declared_degree()),
            FnExpr::Kernel(k) => Some(2 * k.terms().len()),
            FnExpr::Bumps(b) => Some(2 * b.bumps().len() + 1),
            FnExpr::Difference(a, b) => Some(a.degree_bound()? + b.degree_bound()?),
            FnExpr::Custom(_) => None,
        }
    }

    /// Ratio of the largest to the smallest internal scale; expansion is
    /// accuracy-safe only while this stays well below
    /// [`DYNAMIC_RANGE_LIMIT`].
    pub fn dynamic_range(&self) -> f64 {
        match self {
            FnExpr::Rational(_) | FnExpr::Custom(_) => 1.0,
            FnExpr::Kernel(k) => k.dynamic_range(),
            FnExpr::Bumps(b) => b.dynamic_range(),
            FnExpr::Difference(a, b) => a.dynamic_range().max(b.dynamic_range()),
        }
    }

    /// Expands to a single numerator/denominator pair. Kernel and bump
    /// forms expand over their common denominator; differences combine the
    /// two sides. Opaque evaluators have no expansion.
    pub fn to_rational(&self) -> Result<RationalFn, RatcoreError> {
        match self {
            FnExpr::Rational(r) => Ok(r.clone()),
            FnExpr::Kernel(k) => Ok(k.to_rational()),
            FnExpr::Bumps(b) => Ok(b.to_rational()),
            FnExpr::Difference(a, b) => {
                let ra = a.to_rational()?;
                let rb = b.to_rational()?;
                let numer = ra
                    .numer()
                    .mul(rb.denom())
                    .sub(&rb.numer().mul(ra.denom()));
                let denom = ra.denom().mul(rb.denom());
                Ok(RationalFn::new_unchecked(
                    numer,
                    denom,
                    ra.declared_degree() + rb.declared_degree(),
                ))
            }
            FnExpr::Custom(_) => Err(RatcoreError::NotRational),
        }
    }

    /// Points (positive side) near which the expression has structure at
    /// small scales; grid sweeps add these so multi-scale features are not
    /// missed.
    pub(crate) fn scale_points(&self) -> Vec<f64> {
        let mut scales = Vec::new();
        self.collect_scales(&mut scales);
        let mut pts = Vec::new();
        let ladder: Vec<f64> = (0..33)
            .map(|i| 0.05 * (20.0f64 / 0.05).powf(i as f64 / 32.0))
            .collect();
        for s in scales {
            for &m in &ladder {
                let x = s * m;
                if x > 0.0 && x <= 1.0 {
                    pts.push(x);
                }
            }
        }
        pts
    }

    fn collect_scales(&self, out: &mut Vec<f64>) {
        match self {
            FnExpr::Rational(_) | FnExpr::Custom(_) => {}
            FnExpr::Kernel(k) => out.extend(k.terms().iter().map(|t| t.node)),
            FnExpr::Bumps(b) => out.extend(b.bumps().iter().map(|bb| bb.scale)),
            FnExpr::Difference(a, b) => {
                a.collect_scales(out);
                b.collect_scales(out);
            }
        }
    }
}

/// The odd reflection transfer: for increasing `R` and `x0 ∈ (0, 1)`,
///
/// `H(y) = (R(x0 + y(1−x0)) − R(x0 − y(1−x0))) / 2`
///
/// is odd and increasing with `‖H‖ ≤ ‖R‖`, `H'(0) = (1−x0)·R'(x0)`, and
/// doubles the degree class.
pub fn transfer_to_odd(f: &FnExpr, x0: f64) -> Result<FnExpr, RatcoreError> {
    if !(x0 > 0.0 && x0 < 1.0) {
        return Err(RatcoreError::TransferPointOutOfRange { x0 });
    }
    let r = f.to_rational()?;
    let h = 1.0 - x0;
    let pa = r.numer().compose_affine(x0, h);
    let pb = r.numer().compose_affine(x0, -h);
    let qa = r.denom().compose_affine(x0, h);
    let qb = r.denom().compose_affine(x0, -h);
    let numer = pa.mul(&qb).sub(&pb.mul(&qa));
    let denom = qa.mul(&qb).scale(2.0);
    // The numerator is odd and the denominator even by symmetry; the
    // opposite-parity coefficients are pure rounding residue, so zero them
    // to make the parity exact.
    let numer = Poly::new(
        numer
            .coeffs()
            .iter()
            .enumerate()
            .map(|(i, &c)| if i % 2 == 0 { 0.0 } else { c })
            .collect(),
    );
    let denom = Poly::new(
        denom
            .coeffs()
            .iter()
            .enumerate()
            .map(|(i, &c)| if i % 2 == 1 { 0.0 } else { c })
            .collect(),
    );
    Ok(FnExpr::Rational(RationalFn::new_unchecked(
        numer,
        denom,
        2 * r.declared_degree(),
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_expr() -> FnExpr {
        FnExpr::Rational(
            RationalFn::new(Poly::new(vec![0.0, 1.0]), Poly::constant(1.0), 1).unwrap(),
        )
    }

    #[test]
    fn eval_rejects_out_of_domain() {
        let f = identity_expr();
        assert!(matches!(
            f.eval(1.5),
            Err(RatcoreError::DomainError { .. })
        ));
        assert!(f.eval(1.0).is_ok());
    }

    #[test]
    fn odd_function_vanishes_at_origin() {
        let f = FnExpr::Bumps(
            LinearPlusBumps::new(
                1.0,
                vec![Bump {
                    amplitude: 8.0 * 0.98,
                    scale: 0.1,
                }],
            )
            .unwrap(),
        );
        assert_eq!(f.eval(0.0).unwrap(), 0.0);
        assert!(f.is_structurally_odd());
    }

    #[test]
    fn identity_derivative_is_one_everywhere() {
        let f = identity_expr();
        for x in [-1.0, -0.3, 0.0, 0.7, 1.0] {
            assert_eq!(f.derivative_at(x).unwrap(), 1.0);
        }
    }

    #[test]
    fn kernel_weight_sum_at_origin() {
        // weights 4·9^{k−1} for k = 1..n sum to (9^n − 1)/2; n = 2 gives 40
        let k = KernelSum::new(vec![
            KernelTerm {
                weight: 4.0,
                node: 0.8,
            },
            KernelTerm {
                weight: 36.0,
                node: 0.3,
            },
        ])
        .unwrap();
        assert_eq!(FnExpr::Kernel(k).derivative_at(0.0).unwrap(), 40.0);
    }

    #[test]
    fn hash_changes_with_coefficients() {
        let a = identity_expr();
        let b = FnExpr::Rational(
            RationalFn::new(Poly::new(vec![0.0, 1.0 + 1e-15]), Poly::constant(1.0), 1).unwrap(),
        );
        assert_ne!(a.identity_hash(), b.identity_hash());
    }

    #[test]
    fn transfer_identity_halves_slope() {
        // R(x) = x, x0 = 0.5: H(y) = 0.5·y
        let h = transfer_to_odd(&identity_expr(), 0.5).unwrap();
        for i in 0..=10 {
            let y = -1.0 + 0.2 * i as f64;
            assert!((h.eval(y).unwrap() - 0.5 * y).abs() < 1e-14);
        }
        assert!((h.derivative_at(0.0).unwrap() - 0.5).abs() < 1e-14);
        assert!(h.is_structurally_odd());
    }

    #[test]
    fn transfer_rejects_bad_point() {
        assert!(transfer_to_odd(&identity_expr(), 0.0).is_err());
        assert!(transfer_to_odd(&identity_expr(), 1.0).is_err());
    }

    #[test]
    fn transfer_is_odd_and_doubles_degree() {
        let k = KernelSum::new(vec![
            KernelTerm {
                weight: 4.0,
                node: 0.9,
            },
            KernelTerm {
                weight: 36.0,
                node: 0.25,
            },
        ])
        .unwrap();
        let f = FnExpr::Kernel(k);
        let h = transfer_to_odd(&f, 0.3).unwrap();
        assert!(h.is_structurally_odd());
        assert_eq!(h.degree_bound(), Some(8));
        assert_eq!(h.eval(0.0).unwrap(), 0.0);
        // H(y) must match the defining reflection pointwise.
        for i in 0..=40 {
            let y = -1.0 + 0.05 * i as f64;
            let direct = 0.5
                * (f.eval_unchecked(0.3 + y * 0.7) - f.eval_unchecked(0.3 - y * 0.7));
            assert!(
                (h.eval(y).unwrap() - direct).abs() <= 1e-10 * (1.0 + direct.abs()),
                "mismatch at y = {y}"
            );
        }
    }

    #[test]
    fn difference_expansion_matches_eval() {
        let k = FnExpr::Kernel(
            KernelSum::new(vec![KernelTerm {
                weight: 4.0,
                node: 0.6,
            }])
            .unwrap(),
        );
        let l = FnExpr::difference(k.clone(), identity_expr());
        let r = l.to_rational().unwrap();
        for i in 0..=100 {
            let x = -1.0 + 0.02 * i as f64;
            let direct = l.eval(x).unwrap();
            assert!((r.eval(x) - direct).abs() <= 1e-13 * (1.0 + direct.abs()));
        }
        assert_eq!(l.degree_bound(), Some(3));
    }
}
