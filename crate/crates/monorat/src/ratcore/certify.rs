//! Monotonicity certification.
//!
//! The authority is exact-structure: the derivative numerator
//! `D = p'q − pq'` of the expanded representation is root-counted with a
//! Sturm chain over `[-1, 1]`. Strict certification demands no roots at
//! all and `D(0) > 0`; weak certification tolerates roots without a sign
//! change (even multiplicity). A dense scale-aware grid sweep of the
//! closed-form derivative is kept as the fallback for expressions whose
//! expansion is outside double-precision reach, and as a cross-check; a
//! certificate records which method produced it.

use serde::Serialize;
use thiserror::Error;

use super::{FnExpr, DYNAMIC_RANGE_LIMIT};
use crate::poly::{chebyshev_points, Poly, SturmChain};

/// Relative dead zone for grid-based sign decisions on the derivative.
const GRID_SIGN_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Derivative strictly positive on `[-1, 1]`.
    Strict,
    /// Derivative nonnegative: isolated zeros of even multiplicity allowed.
    Weak,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sturm,
    Grid,
}

/// How the certification is allowed to proceed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodPref {
    /// Sturm when the expansion is trustworthy, grid otherwise.
    Auto,
    /// Grid sweep only (used when the scale spread rules expansion out).
    GridOnly,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// Sturm evidence: distinct roots of `D` found on `[-1, 1]` and the
    /// sign-bearing value `D(0)`.
    SturmCount {
        distinct_roots: usize,
        derivative_numerator_at_zero: f64,
    },
    /// Grid evidence: the refined minimum of the closed-form derivative.
    GridMin { min_derivative: f64, grid: usize },
}

/// Evidence that a function is increasing. Valid only for the exact
/// coefficient data it was issued against (`subject` is the identity
/// hash of the expression).
#[derive(Clone, Debug, Serialize)]
pub struct MonotoneCertificate {
    pub subject: u64,
    pub mode: Mode,
    pub method: Method,
    pub witness: Witness,
}

impl MonotoneCertificate {
    pub fn covers(&self, f: &FnExpr) -> bool {
        self.subject == f.identity_hash()
    }
}

/// Where and how monotonicity fails.
#[derive(Clone, Debug, Serialize)]
pub struct MonotoneFailure {
    /// An interval containing a sign change (or touch) of the derivative.
    pub interval: (f64, f64),
    /// A derivative sample inside the interval.
    pub derivative_sample: f64,
}

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("derivative is identically zero (constant function)")]
    DegenerateInput,
    #[error("derivative changes sign in [{:.6e}, {:.6e}]", .0.interval.0, .0.interval.1)]
    NotMonotone(MonotoneFailure),
    #[error("derivative touches zero near [{:.6e}, {:.6e}]; weak mode would certify", .0.interval.0, .0.interval.1)]
    NotStrict(MonotoneFailure),
}

/// Certifies that `f` is increasing on `[-1, 1]`, choosing the method
/// automatically.
pub fn certify_increasing(f: &FnExpr, mode: Mode) -> Result<MonotoneCertificate, CertifyError> {
    certify_increasing_with(f, mode, MethodPref::Auto)
}

/// Certifies that `f` is increasing on `[-1, 1]`.
pub fn certify_increasing_with(
    f: &FnExpr,
    mode: Mode,
    pref: MethodPref,
) -> Result<MonotoneCertificate, CertifyError> {
    if pref == MethodPref::Auto && f.dynamic_range() <= DYNAMIC_RANGE_LIMIT {
        if let Ok(r) = f.to_rational() {
            let d = r.derivative_numerator();
            if d.is_zero() {
                return Err(CertifyError::DegenerateInput);
            }
            if d.coeffs().iter().all(|c| c.is_finite()) {
                if let Some(result) = sturm_verdict(f, &d, mode) {
                    return result;
                }
            }
            // Chain was unreliable: fall through to the grid sweep.
        }
    }
    grid_verdict(f, mode)
}

/// Sturm-based verdict; `None` when the chain cannot be trusted.
fn sturm_verdict(
    f: &FnExpr,
    d: &Poly,
    mode: Mode,
) -> Option<Result<MonotoneCertificate, CertifyError>> {
    let chain = SturmChain::build(d);
    let count = chain.count_roots(-1.0, 1.0)?;

    // Assemble sign samples at the endpoints, the origin and around every
    // isolated root; any detected sign flip is a genuine failure, which is
    // confirmed by bisecting on the polynomial sign.
    let mut probes = vec![-1.0, 0.0, 1.0];
    let intervals = if count > 0 {
        let iso = chain.isolate_roots(-1.0, 1.0, 1e-13)?;
        for &(lo, hi) in &iso {
            probes.push(lo);
            probes.push(hi);
        }
        iso
    } else {
        Vec::new()
    };
    probes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    probes.dedup();

    let signs: Vec<(f64, i8)> = probes.iter().map(|&x| (x, d.sign_at(x))).collect();
    for w in signs.windows(2) {
        let (xa, sa) = w[0];
        let (xb, sb) = w[1];
        if sa != 0 && sb != 0 && sa != sb {
            let (lo, hi) = bisect_poly_sign_change(d, xa, xb);
            let sample = f.derivative_unchecked(0.5 * (lo + hi));
            // Confirm against the closed-form derivative; a flip the
            // expression itself cannot reproduce is expansion noise.
            if !confirmed_dip(f, lo, hi) {
                return None;
            }
            return Some(Err(CertifyError::NotMonotone(MonotoneFailure {
                interval: (lo, hi),
                derivative_sample: sample,
            })));
        }
    }
    let any_negative = signs.iter().any(|&(_, s)| s == -1);
    let any_positive = signs.iter().any(|&(_, s)| s == 1);
    if any_negative && !any_positive {
        // Decreasing everywhere sampled; report the whole interval.
        return Some(Err(CertifyError::NotMonotone(MonotoneFailure {
            interval: (-1.0, 1.0),
            derivative_sample: f.derivative_unchecked(0.0),
        })));
    }
    if any_negative {
        // Negative values without a detected flip: internally inconsistent.
        return None;
    }

    let d0 = d.eval(0.0);
    match mode {
        Mode::Strict => {
            if count == 0 && d.sign_at(0.0) == 1 && d.sign_at(-1.0) != 0 && d.sign_at(1.0) != 0 {
                Some(Ok(MonotoneCertificate {
                    subject: f.identity_hash(),
                    mode: Mode::Strict,
                    method: Method::Sturm,
                    witness: Witness::SturmCount {
                        distinct_roots: 0,
                        derivative_numerator_at_zero: d0,
                    },
                }))
            } else {
                let interval = intervals
                    .first()
                    .copied()
                    .unwrap_or((-1e-13, 1e-13));
                if count > 0 && !confirmed_dip(f, interval.0, interval.1) {
                    // The chain claims a root the derivative does not
                    // exhibit; distrust the expansion.
                    return None;
                }
                Some(Err(CertifyError::NotStrict(MonotoneFailure {
                    interval,
                    derivative_sample: f.derivative_unchecked(0.5 * (interval.0 + interval.1)),
                })))
            }
        }
        Mode::Weak => {
            if any_positive {
                Some(Ok(MonotoneCertificate {
                    subject: f.identity_hash(),
                    mode: Mode::Weak,
                    method: Method::Sturm,
                    witness: Witness::SturmCount {
                        distinct_roots: count,
                        derivative_numerator_at_zero: d0,
                    },
                }))
            } else {
                None
            }
        }
    }
}

/// True when the closed-form derivative actually approaches zero (or goes
/// negative) somewhere in `[lo, hi]`, relative to its origin scale.
fn confirmed_dip(f: &FnExpr, lo: f64, hi: f64) -> bool {
    let scale = f.derivative_unchecked(0.0).abs().max(1.0);
    let mut min = f64::INFINITY;
    for i in 0..=16 {
        let x = lo + (hi - lo) * i as f64 / 16.0;
        min = min.min(f.derivative_unchecked(x.clamp(-1.0, 1.0)));
    }
    min <= 1e-9 * scale
}

fn bisect_poly_sign_change(d: &Poly, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let slo = d.sign_at(lo);
    for _ in 0..80 {
        if hi - lo <= 1e-14 * (1.0 + lo.abs()) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let sm = d.sign_at(mid);
        if sm == 0 {
            // Landed on the root itself; report a tight bracket around it.
            let w = (1e-12f64).max(1e-12 * mid.abs());
            return (mid - w, mid + w);
        }
        if sm == slo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Grid-based verdict on the closed-form derivative: dense Chebyshev grid
/// augmented with the expression's scale points, refined around the
/// minimum.
fn grid_verdict(f: &FnExpr, mode: Mode) -> Result<MonotoneCertificate, CertifyError> {
    let mut pts = chebyshev_points(8193, -1.0, 1.0);
    for s in f.scale_points() {
        pts.push(s);
        pts.push(-s);
    }
    pts.push(0.0);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();

    let vals: Vec<f64> = pts.iter().map(|&x| f.derivative_unchecked(x)).collect();
    if vals.iter().fold(0.0f64, |m, v| m.max(v.abs())) == 0.0 {
        return Err(CertifyError::DegenerateInput);
    }
    let (mut min_idx, mut min_val) = (0usize, f64::INFINITY);
    for (i, &v) in vals.iter().enumerate() {
        if v < min_val {
            min_val = v;
            min_idx = i;
        }
    }
    // Refine the minimum between the neighbors of the argmin.
    let lo = pts[min_idx.saturating_sub(1)];
    let hi = pts[(min_idx + 1).min(pts.len() - 1)];
    let (xmin, neg_min) = super::norm::golden_max(
        |x| -f.derivative_unchecked(x),
        lo,
        hi,
        1e-13,
    );
    let refined_min = (-neg_min).min(min_val);
    let grid = pts.len();

    // Sign dead zone scaled to the cancellation magnitude at the minimum,
    // not the global derivative range: a stacked construction has a huge
    // slope at the origin and a small genuine floor elsewhere.
    let tol = GRID_SIGN_EPS * (1.0 + f.derivative_magnitude(xmin));
    if refined_min < -tol {
        // Locate a genuine sign change bracketing the dip.
        let interval = bracket_derivative_sign_change(f, &pts, &vals, tol)
            .unwrap_or((xmin - 1e-9, xmin + 1e-9));
        return Err(CertifyError::NotMonotone(MonotoneFailure {
            interval,
            derivative_sample: refined_min,
        }));
    }
    match mode {
        Mode::Strict => {
            if refined_min > tol {
                Ok(MonotoneCertificate {
                    subject: f.identity_hash(),
                    mode: Mode::Strict,
                    method: Method::Grid,
                    witness: Witness::GridMin {
                        min_derivative: refined_min,
                        grid,
                    },
                })
            } else {
                Err(CertifyError::NotStrict(MonotoneFailure {
                    interval: (xmin - 1e-9, xmin + 1e-9),
                    derivative_sample: refined_min,
                }))
            }
        }
        Mode::Weak => Ok(MonotoneCertificate {
            subject: f.identity_hash(),
            mode: Mode::Weak,
            method: Method::Grid,
            witness: Witness::GridMin {
                min_derivative: refined_min,
                grid,
            },
        }),
    }
}

/// Finds adjacent grid points where the derivative crosses from positive
/// to negative (or back) and bisects the crossing.
fn bracket_derivative_sign_change(
    f: &FnExpr,
    pts: &[f64],
    vals: &[f64],
    tol: f64,
) -> Option<(f64, f64)> {
    for i in 1..pts.len() {
        let (a, va) = (pts[i - 1], vals[i - 1]);
        let (b, vb) = (pts[i], vals[i]);
        if (va > tol && vb < -tol) || (va < -tol && vb > tol) {
            let (mut lo, mut hi) = (a, b);
            let mut vlo = va;
            for _ in 0..80 {
                if hi - lo <= 1e-14 * (1.0 + lo.abs()) {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                let vm = f.derivative_unchecked(mid);
                if (vm > 0.0) == (vlo > 0.0) {
                    lo = mid;
                    vlo = vm;
                } else {
                    hi = mid;
                }
            }
            return Some((lo, hi));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratcore::{Bump, LinearPlusBumps, RationalFn};

    fn rational(numer: Vec<f64>, denom: Vec<f64>, deg: usize) -> FnExpr {
        FnExpr::Rational(RationalFn::new(Poly::new(numer), Poly::new(denom), deg).unwrap())
    }

    #[test]
    fn identity_gets_strict_certificate() {
        let f = rational(vec![0.0, 1.0], vec![1.0], 1);
        let cert = certify_increasing(&f, Mode::Strict).unwrap();
        assert_eq!(cert.mode, Mode::Strict);
        assert_eq!(cert.method, Method::Sturm);
        assert!(cert.covers(&f));
    }

    #[test]
    fn cube_is_weak_but_not_strict() {
        // derivative 3x² vanishes at 0
        let f = rational(vec![0.0, 0.0, 0.0, 1.0], vec![1.0], 3);
        assert!(matches!(
            certify_increasing(&f, Mode::Strict),
            Err(CertifyError::NotStrict(_))
        ));
        let weak = certify_increasing(&f, Mode::Weak).unwrap();
        assert_eq!(weak.mode, Mode::Weak);
    }

    #[test]
    fn peak_counterexample_fails_with_interval_near_delta() {
        // δx/(x²+δ²) with δ = 0.5: derivative changes sign at |x| = 0.5
        let delta = 0.5;
        let f = rational(vec![0.0, delta], vec![delta * delta, 0.0, 1.0], 2);
        match certify_increasing(&f, Mode::Strict) {
            Err(CertifyError::NotMonotone(fail)) => {
                let mid = 0.5 * (fail.interval.0 + fail.interval.1);
                assert!(
                    (mid.abs() - delta).abs() < 1e-6,
                    "sign change reported at {mid}, expected near ±{delta}"
                );
            }
            other => panic!("expected NotMonotone, got {other:?}"),
        }
        assert!(certify_increasing(&f, Mode::Weak).is_err());
    }

    #[test]
    fn constant_function_is_degenerate() {
        let f = rational(vec![2.5], vec![1.0], 0);
        assert!(matches!(
            certify_increasing(&f, Mode::Strict),
            Err(CertifyError::DegenerateInput)
        ));
    }

    #[test]
    fn grid_method_certifies_multiscale_stack() {
        // Scales spread far beyond expansion reach.
        let f = FnExpr::Bumps(
            LinearPlusBumps::new(
                1.0,
                vec![
                    Bump {
                        amplitude: 1.0,
                        scale: 1e-2,
                    },
                    Bump {
                        amplitude: 2.0,
                        scale: 1e-9,
                    },
                    Bump {
                        amplitude: 4.0,
                        scale: 1e-16,
                    },
                ],
            )
            .unwrap(),
        );
        let cert = certify_increasing_with(&f, Mode::Strict, MethodPref::GridOnly).unwrap();
        assert_eq!(cert.method, Method::Grid);
        match cert.witness {
            Witness::GridMin { min_derivative, .. } => {
                // Each bump dips at most amplitude/8 at its own scale; the
                // dips sit at separated scales, so the floor stays near
                // 1 − max(amplitude)/8 = 0.5.
                assert!(min_derivative > 0.4, "floor {min_derivative}");
            }
            _ => panic!("expected grid witness"),
        }
    }

    #[test]
    fn grid_method_rejects_sign_change() {
        let delta = 0.3;
        let f = rational(vec![0.0, delta], vec![delta * delta, 0.0, 1.0], 2);
        match certify_increasing_with(&f, Mode::Strict, MethodPref::GridOnly) {
            Err(CertifyError::NotMonotone(fail)) => {
                let mid = 0.5 * (fail.interval.0 + fail.interval.1);
                assert!((mid.abs() - delta).abs() < 1e-6);
            }
            other => panic!("expected NotMonotone, got {other:?}"),
        }
    }

    #[test]
    fn certificate_does_not_cover_other_functions() {
        let f = rational(vec![0.0, 1.0], vec![1.0], 1);
        let g = rational(vec![0.0, 2.0], vec![1.0], 1);
        let cert = certify_increasing(&f, Mode::Strict).unwrap();
        assert!(!cert.covers(&g));
    }
}
