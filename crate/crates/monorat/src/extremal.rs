//! The extremal construction: starting from `R(x) = x`, each stage adds a
//! bump `8(R'(0) − 2ε)·γ²x/(γ² + x²)` with `γ` small enough that the sum
//! stays strictly increasing. One stage multiplies the derivative at the
//! origin by `9 − 16ε/R'(0)` exactly while growing the norm by at most
//! `4(R'(0) − 2ε)γ`, so `R'(0)/‖R‖` approaches `9^{n−1}` for the
//! `(2n−1)`-degree class after `n − 1` stages.
//!
//! A stage's scale is admissible when
//!
//! * `8(R'(0) − 2ε)·γ²/α² ≤ safety·β`, where `α` is the plateau radius
//!   (derivative within `ε` of its origin value on `[−α, α]`) and `β` the
//!   global slope floor — this keeps the perturbed slope positive outside
//!   the plateau, since the bump derivative is at least `−a·γ²/x²` there
//!   and at least `−a/8` everywhere;
//! * `4(R'(0) − 2ε)·γ ≤ (ε/R'(0))·‖R‖` — a norm-growth cap tied to the
//!   same `ε` policy, so the cumulative norm inflation stays of the order
//!   of the relative slope loss;
//! * the result passes strict monotonicity certification.
//!
//! The largest dyadic fraction of the previous scale satisfying all three
//! is chosen, minimizing dynamic-range loss.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::poly::chebyshev_points;
use crate::ratcore::{
    certify_increasing, sup_norm, CertifyError, FnExpr, LinearPlusBumps, Method,
    MonotoneCertificate, RatcoreError,
};

/// Hard floor below which no bump scale is attempted.
pub const GAMMA_FLOOR: f64 = 1e-150;

#[derive(Debug, Error)]
pub enum ExtremalError {
    #[error("epsilon {epsilon} must lie in (0, {max})")]
    InvalidEpsilon { epsilon: f64, max: f64 },
    #[error("safety factor {safety} must lie in (0, 1)")]
    InvalidSafety { safety: f64 },
    #[error("policy fraction {rho} must lie in (0, 0.5)")]
    InvalidPolicy { rho: f64 },
    #[error("slope minimum {min} is not positive; certification should have caught this")]
    NonPositiveSlope { min: f64 },
    #[error("no admissible bump scale above {floor:.1e} at stage {stage}")]
    GammaUnderflow {
        stage: usize,
        floor: f64,
        partial: Option<Box<ConstructionReport>>,
    },
    #[error("a strict monotonicity certificate for this exact function is required")]
    CertificateMissing,
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error(transparent)]
    Ratcore(#[from] RatcoreError),
}

/// Everything one stage decided and measured.
#[derive(Clone, Debug, Serialize)]
pub struct StageParams {
    pub stage: usize,
    pub epsilon: f64,
    /// Plateau radius: derivative stays above `R'(0) − ε` on `[−α, α]`.
    pub alpha: f64,
    /// Global slope floor before the bump.
    pub beta: f64,
    /// Chosen bump scale.
    pub gamma: f64,
    /// `8(R'(0) − 2ε)`.
    pub amplitude: f64,
    pub safety: f64,
    /// Derivative at the origin after the stage.
    pub deriv0_after: f64,
    /// Norm after the stage.
    pub norm_after: f64,
    /// `deriv0_after / norm_after`.
    pub ratio_after: f64,
}

/// Outcome of a full construction.
#[derive(Clone, Debug, Serialize)]
pub struct ConstructionReport {
    pub n: usize,
    pub function: LinearPlusBumps,
    pub stages: Vec<StageParams>,
    pub derivative_at_zero: f64,
    pub norm: f64,
    pub ratio: f64,
    /// `9^{n−1}`.
    pub target: f64,
    pub ratio_fraction: f64,
    /// Which certification method backed the final certificate.
    pub certificate_method: Method,
    /// Set when the construction stopped before reaching `n` stages.
    pub partial: bool,
}

/// The largest radius `α` such that the derivative stays above
/// `R'(0) − ε` on `[−α, α]`, found by bisection over a refined grid and
/// shrunk by one grid cell to stay conservative.
pub fn plateau_radius(r: &FnExpr, epsilon: f64) -> Result<f64, ExtremalError> {
    let d0 = r.derivative_at(0.0)?;
    if !(epsilon > 0.0 && epsilon < 0.5 * d0) {
        return Err(ExtremalError::InvalidEpsilon {
            epsilon,
            max: 0.5 * d0,
        });
    }
    let floor = d0 - epsilon;
    let scale_pts = r.scale_points();
    let ok = |alpha: f64| -> bool {
        let mut min = f64::INFINITY;
        for i in 0..=256 {
            let x = alpha * i as f64 / 256.0;
            min = min.min(r.derivative_unchecked(x));
        }
        for &s in &scale_pts {
            if s <= alpha {
                min = min.min(r.derivative_unchecked(s));
            }
        }
        min > floor
    };
    if ok(1.0) {
        return Ok(1.0);
    }
    // Geometric descent to a passing radius, then bisection.
    let mut hi = 1.0f64;
    let mut lo = 0.5f64;
    while !ok(lo) {
        hi = lo;
        lo *= 0.5;
        if lo < GAMMA_FLOOR {
            return Ok(GAMMA_FLOOR);
        }
    }
    for _ in 0..120 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo * (1.0 - 1.0 / 256.0))
}

/// Global minimum of the derivative over `[-1, 1]`: Chebyshev grid
/// augmented with the bump-scale neighborhoods, golden-section refined.
pub fn min_slope(r: &FnExpr) -> Result<f64, ExtremalError> {
    let mut pts = chebyshev_points(2049, -1.0, 1.0);
    for s in r.scale_points() {
        pts.push(s);
        pts.push(-s);
    }
    pts.push(0.0);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let mut min_val = f64::INFINITY;
    let mut min_idx = 0usize;
    for (i, &x) in pts.iter().enumerate() {
        let v = r.derivative_unchecked(x);
        if v < min_val {
            min_val = v;
            min_idx = i;
        }
    }
    let lo = pts[min_idx.saturating_sub(1)];
    let hi = pts[(min_idx + 1).min(pts.len() - 1)];
    let refined = if hi > lo {
        let (_, neg) = crate::ratcore::golden_max(|x| -r.derivative_unchecked(x), lo, hi, 1e-13);
        (-neg).min(min_val)
    } else {
        min_val
    };
    if !(refined > 0.0) {
        return Err(ExtremalError::NonPositiveSlope { min: refined });
    }
    Ok(refined)
}

/// Adds one bump to a certified increasing stack. Returns the new stack
/// and the stage record; the input is certified internally before any
/// scale is attempted.
pub fn add_bump(
    r: &LinearPlusBumps,
    epsilon: f64,
    safety: f64,
) -> Result<(LinearPlusBumps, StageParams, MonotoneCertificate), ExtremalError> {
    if !(safety > 0.0 && safety < 1.0) {
        return Err(ExtremalError::InvalidSafety { safety });
    }
    let d0 = r.derivative_at_zero();
    if !(epsilon > 0.0 && epsilon < 0.5 * d0) {
        return Err(ExtremalError::InvalidEpsilon {
            epsilon,
            max: 0.5 * d0,
        });
    }
    let expr = FnExpr::Bumps(r.clone());
    certify_increasing(&expr, crate::ratcore::Mode::Strict)?;

    let alpha = plateau_radius(&expr, epsilon)?;
    let beta = min_slope(&expr)?;
    let amplitude = 8.0 * (d0 - 2.0 * epsilon);
    let norm = r.eval(1.0);
    let norm_budget = (epsilon / d0) * norm;
    let gamma_prev = r.bumps().last().map(|b| b.scale).unwrap_or(1.0);
    let stage = r.bumps().len() + 1;

    let mut m = if r.bumps().is_empty() { 0 } else { 1 };
    loop {
        let gamma = gamma_prev * 0.5f64.powi(m);
        if gamma < GAMMA_FLOOR {
            return Err(ExtremalError::GammaUnderflow {
                stage,
                floor: GAMMA_FLOOR,
                partial: None,
            });
        }
        let ratio = gamma / alpha;
        let slope_ok = amplitude * ratio * ratio <= safety * beta;
        let norm_ok = 4.0 * (d0 - 2.0 * epsilon) * gamma <= norm_budget;
        if slope_ok && norm_ok {
            let candidate = r.with_bump(amplitude, gamma)?;
            let cand_expr = FnExpr::Bumps(candidate.clone());
            match certify_increasing(&cand_expr, crate::ratcore::Mode::Strict) {
                Ok(cert) => {
                    let deriv0_after = candidate.derivative_at_zero();
                    let expected = 9.0 * d0 - 16.0 * epsilon;
                    assert!(
                        (deriv0_after - expected).abs() <= 8.0 * f64::EPSILON * expected.abs(),
                        "stage derivative recursion broke: {deriv0_after} vs {expected}"
                    );
                    let norm_after = candidate.eval(1.0);
                    let growth_bound = 4.0 * (d0 - 2.0 * epsilon) * gamma;
                    assert!(
                        norm_after - norm <= growth_bound + 1e-12,
                        "norm growth {:.3e} exceeds its bound {:.3e}",
                        norm_after - norm,
                        growth_bound
                    );
                    let params = StageParams {
                        stage,
                        epsilon,
                        alpha,
                        beta,
                        gamma,
                        amplitude,
                        safety,
                        deriv0_after,
                        norm_after,
                        ratio_after: deriv0_after / norm_after,
                    };
                    return Ok((candidate, params, cert));
                }
                Err(CertifyError::DegenerateInput) => {
                    return Err(ExtremalError::Certify(CertifyError::DegenerateInput))
                }
                Err(_) => {
                    // Certification refused this scale; try a smaller one.
                }
            }
        }
        m += 1;
    }
}

/// Runs the construction for degree class `2n − 1`: `n − 1` stages on top
/// of the identity with the relative policy `ε_j = ρ·R_j'(0)`.
pub fn construct(n: usize, rho: f64) -> Result<ConstructionReport, ExtremalError> {
    assert!(n >= 1, "construction needs n >= 1");
    if !(rho > 0.0 && rho < 0.5) {
        return Err(ExtremalError::InvalidPolicy { rho });
    }
    let safety = 0.5;
    let mut function = LinearPlusBumps::identity();
    let mut stages: Vec<StageParams> = Vec::new();
    for _ in 1..n {
        let d0 = function.derivative_at_zero();
        let epsilon = rho * d0;
        match add_bump(&function, epsilon, safety) {
            Ok((next, params, _cert)) => {
                function = next;
                stages.push(params);
            }
            Err(ExtremalError::GammaUnderflow { stage, floor, .. }) => {
                let partial = finish_report(n, function, stages, true)?;
                return Err(ExtremalError::GammaUnderflow {
                    stage,
                    floor,
                    partial: Some(Box::new(partial)),
                });
            }
            Err(e) => return Err(e),
        }
    }
    finish_report(n, function, stages, false)
}

fn finish_report(
    n: usize,
    function: LinearPlusBumps,
    stages: Vec<StageParams>,
    partial: bool,
) -> Result<ConstructionReport, ExtremalError> {
    let expr = FnExpr::Bumps(function.clone());
    let cert = certify_increasing(&expr, crate::ratcore::Mode::Strict)?;
    let derivative_at_zero = function.derivative_at_zero();
    let norm = sup_norm(&expr, Some(&cert));
    let ratio = derivative_at_zero / norm;
    let target = 9f64.powi(n as i32 - 1);
    Ok(ConstructionReport {
        n,
        function,
        stages,
        derivative_at_zero,
        norm,
        ratio,
        target,
        ratio_fraction: ratio / target,
        certificate_method: cert.method,
        partial,
    })
}

/// `R'(0)/‖R‖` for a certified increasing function: the numerator is the
/// closed-form derivative, the denominator the certified norm shortcut.
pub fn ratio(r: &FnExpr, cert: &MonotoneCertificate) -> Result<f64, ExtremalError> {
    if !cert.covers(r) {
        return Err(ExtremalError::CertificateMissing);
    }
    Ok(r.derivative_at(0.0)? / sup_norm(r, Some(cert)))
}

/// CSV rendering of the stage table:
/// `j,epsilon,alpha,beta,gamma,amplitude,deriv0,norm,ratio`.
pub fn stages_csv(report: &ConstructionReport) -> String {
    let mut out = String::from("j,epsilon,alpha,beta,gamma,amplitude,deriv0,norm,ratio\n");
    for s in &report.stages {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            s.stage,
            s.epsilon,
            s.alpha,
            s.beta,
            s.gamma,
            s.amplitude,
            s.deriv0_after,
            s.norm_after,
            s.ratio_after
        );
    }
    out
}
