//! The interpolation-node pipeline and the two derivative-bound verifiers.
//!
//! For an increasing continuous target `f` on `[0, 1]` with `f(0) = 0`,
//! `f(1) = 1` and `f'(0) > ½·9ⁿ`, the slope function `g(x) = f(x)/x`
//! attains the levels `9^{i−1}` and `3·9^{i−1}` at interlaced thresholds
//! `0 < u_n < v_n < … < u_1 < v_1 ≤ 1`. Inside the box `Π[u_i, v_i]` the
//! residual field
//!
//! `f_s(y) = Σ_k 4·9^{k−1}·y_k²y_s/(y_k² + 3y_s²) − f(y_s)`
//!
//! satisfies opposite-face sign conditions, so the box solver produces
//! nodes `z_1 > … > z_n` where the kernel sum with weights `4·9^{k−1}`
//! interpolates `f`. Subtracting an odd candidate that agrees with `f` on
//! `(0, 1]` yields a comparison function whose forced zero count exceeds
//! its degree class — the mechanism behind the bound `R'(0) ≤ ½·9ⁿ·R(1)`
//! for odd increasing `R ∈ Q_{2n}` and its pointwise consequence
//! `R'(x) < 9ⁿ‖R‖/(1−x²)` on `Q_n`.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::miranda::{self, BoxN, Component, MirandaError, MirandaReport, SolverConfig, VectorField};
use crate::ratcore::{
    sup_norm, CustomFn, FnExpr, KernelSum, KernelTerm, MonotoneCertificate, RatcoreError,
};

#[derive(Debug, Error)]
pub enum CompareError {
    #[error("target slope at 0 is {slope}, the pipeline needs more than {required}")]
    SlopeTooSmall { slope: f64, required: f64 },
    #[error("slope level {level} is never attained by the target")]
    LevelNotBracketed { level: f64 },
    #[error("target is malformed: {0}")]
    MalformedTarget(String),
    #[error("function is not odd: |f(x)+f(-x)| reaches {defect:.3e}")]
    ParityError { defect: f64 },
    #[error("sign pattern violated: {detail} in [{:.6e}, {:.6e}]", interval.0, interval.1)]
    PatternViolation {
        interval: (f64, f64),
        detail: String,
    },
    #[error("a monotonicity certificate for this exact function is required")]
    CertificateMissing,
    #[error("degree class {actual} exceeds the verifier bound {allowed}")]
    DegreeExceeded { actual: usize, allowed: usize },
    #[error("node solve failed with status {status}: residual {residual:.3e}")]
    NodesNotFound { status: String, residual: f64 },
    #[error(transparent)]
    Solver(#[from] MirandaError),
    #[error(transparent)]
    Ratcore(#[from] RatcoreError),
}

/// An increasing continuous target on `[0, 1]` with `f(0) = 0`,
/// `f(1) = 1`, plus its slope at the origin (supplied, since `f(x)/x` has
/// a removable singularity there).
#[derive(Clone)]
pub struct TargetFn {
    name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    df: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    f0_slope: f64,
}

impl std::fmt::Debug for TargetFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TargetFn")
            .field("name", &self.name)
            .field("f0_slope", &self.f0_slope)
            .finish()
    }
}

impl TargetFn {
    /// Validates the endpoint normalization (to 1e−12) and checks
    /// monotonicity on a thousand-point grid.
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f0_slope: f64,
    ) -> Result<Self, CompareError> {
        let t = TargetFn {
            name: name.into(),
            f: Arc::new(f),
            df: None,
            f0_slope,
        };
        t.validate()?;
        Ok(t)
    }

    /// Attaches a closed-form derivative, needed for the odd extension.
    pub fn with_derivative(mut self, df: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.df = Some(Arc::new(df));
        self
    }

    /// The canonical steep target `f_δ(x) = (1+δ)x/(x+δ)`: increasing,
    /// `f_δ(0) = 0`, `f_δ(1) = 1`, `f_δ'(0) = (1+δ)/δ`.
    pub fn f_delta(delta: f64) -> Result<Self, CompareError> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(CompareError::MalformedTarget(format!(
                "delta must be positive, got {delta}"
            )));
        }
        let t = TargetFn::new(
            format!("f_delta({delta})"),
            move |x| (1.0 + delta) * x / (x + delta),
            (1.0 + delta) / delta,
        )?;
        Ok(t.with_derivative(move |x| (1.0 + delta) * delta / ((x + delta) * (x + delta))))
    }

    fn validate(&self) -> Result<(), CompareError> {
        let f0 = (self.f)(0.0);
        let f1 = (self.f)(1.0);
        if f0.abs() > 1e-12 {
            return Err(CompareError::MalformedTarget(format!(
                "f(0) = {f0}, expected 0"
            )));
        }
        if (f1 - 1.0).abs() > 1e-12 {
            return Err(CompareError::MalformedTarget(format!(
                "f(1) = {f1}, expected 1"
            )));
        }
        if !(self.f0_slope > 0.0) {
            return Err(CompareError::MalformedTarget(format!(
                "slope at 0 must be positive, got {}",
                self.f0_slope
            )));
        }
        let mut prev = f0;
        for i in 1..=1000 {
            let x = i as f64 / 1000.0;
            let v = (self.f)(x);
            if v < prev {
                return Err(CompareError::MalformedTarget(format!(
                    "target decreases near x = {x}"
                )));
            }
            prev = v;
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn f0_slope(&self) -> f64 {
        self.f0_slope
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    /// The slope function `g(x) = f(x)/x` with the removable singularity
    /// filled in: `g(0) = f'(0)`, and a guarded blend below `1e−8` against
    /// cancellation in the quotient.
    pub fn slope(&self, x: f64) -> f64 {
        const GUARD: f64 = 1e-8;
        if x == 0.0 {
            return self.f0_slope;
        }
        let quotient = (self.f)(x) / x;
        if x < GUARD {
            let t = x / GUARD;
            (1.0 - t) * self.f0_slope + t * quotient
        } else {
            quotient
        }
    }

    /// The odd extension `x ↦ sign(x)·f(|x|)` as an expression; requires a
    /// closed-form derivative (the extension's derivative is `f'(|x|)`).
    pub fn odd_extension(&self) -> Result<FnExpr, CompareError> {
        let df = self.df.clone().ok_or_else(|| {
            CompareError::MalformedTarget(format!(
                "target {} has no derivative attached; the odd extension needs one",
                self.name
            ))
        })?;
        let f = self.f.clone();
        Ok(FnExpr::Custom(CustomFn {
            name: format!("odd({})", self.name),
            odd: true,
            f: Arc::new(move |x: f64| if x < 0.0 { -(f)(-x) } else { (f)(x) }),
            df: Arc::new(move |x: f64| (df)(x.abs())),
        }))
    }
}

/// One interlacing pair: `g(u_i) = 3·9^{i−1}`, `g(v_i) = 9^{i−1}`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ThresholdRow {
    pub index: usize,
    pub u: f64,
    pub v: f64,
    pub slope_at_u: f64,
    pub slope_at_v: f64,
}

/// The full chain `0 < u_n < v_n < … < u_1 < v_1 ≤ 1`, stored with row 1
/// (the largest pair) first.
#[derive(Clone, Debug, Serialize)]
pub struct ThresholdTable {
    pub rows: Vec<ThresholdRow>,
}

impl ThresholdTable {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// Checks the strict ordering chain and the separation inequality
    /// `v_i < 3·9^{k−i}·u_k` for `k < i`, a consequence of the target
    /// being increasing.
    pub fn validate(&self) -> Result<(), CompareError> {
        let n = self.rows.len();
        for (i, row) in self.rows.iter().enumerate() {
            if !(row.u > 0.0 && row.u < row.v && row.v <= 1.0) {
                return Err(CompareError::MalformedTarget(format!(
                    "threshold pair {} out of order: u = {}, v = {}",
                    row.index, row.u, row.v
                )));
            }
            if i + 1 < n && !(self.rows[i + 1].v < row.u) {
                return Err(CompareError::MalformedTarget(format!(
                    "threshold chain breaks between rows {} and {}",
                    row.index,
                    row.index + 1
                )));
            }
        }
        for i in 2..=n {
            for k in 1..i {
                let vi = self.rows[i - 1].v;
                let uk = self.rows[k - 1].u;
                let sep = 3.0 * 9f64.powi(k as i32 - i as i32) * uk;
                if !(vi < sep) {
                    return Err(CompareError::MalformedTarget(format!(
                        "separation v_{i} < 3·9^({k}-{i})·u_{k} fails: {vi} vs {sep}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Kernel weights `4·9^{k−1}`, `k = 1..n`.
pub fn comparison_weights(n: usize) -> Vec<f64> {
    (0..n).map(|k| 4.0 * 9f64.powi(k as i32)).collect()
}

/// Finds the interlaced slope thresholds by scanning right-to-left and
/// bisecting `g(x) = L` for each level `L ∈ {1, 3, 9, 27, …}` in
/// increasing order; the ordering chain holds by construction. Each level
/// equation is solved to `|g(x) − L| ≤ 1e−12·L`.
pub fn find_thresholds(target: &TargetFn, n: usize) -> Result<ThresholdTable, CompareError> {
    assert!(n >= 1, "threshold table needs n >= 1");
    let required = 0.5 * 9f64.powi(n as i32);
    if !(target.f0_slope() > required) {
        return Err(CompareError::SlopeTooSmall {
            slope: target.f0_slope(),
            required,
        });
    }

    // Levels ascending: v_1, u_1, v_2, u_2, …
    let mut levels: Vec<(f64, bool, usize)> = Vec::with_capacity(2 * n);
    for i in 1..=n {
        let base = 9f64.powi(i as i32 - 1);
        levels.push((base, false, i)); // v_i
        levels.push((3.0 * base, true, i)); // u_i
    }

    let mut right = 1.0f64;
    let mut us = vec![0.0; n];
    let mut vs = vec![0.0; n];
    for &(level, is_u, index) in &levels {
        // The first level is 1 = g(1) (the endpoint normalization), so the
        // rightmost solution is the endpoint itself; later levels strictly
        // exceed g(right) and are bracketed to its left.
        let x = if right == 1.0 && (target.slope(right) - level).abs() <= 1e-12 * level {
            right
        } else {
            solve_slope_level(target, level, right)?
        };
        if is_u {
            us[index - 1] = x;
        } else {
            vs[index - 1] = x;
        }
        right = x;
    }

    let rows = (1..=n)
        .map(|i| ThresholdRow {
            index: i,
            u: us[i - 1],
            v: vs[i - 1],
            slope_at_u: 3.0 * 9f64.powi(i as i32 - 1),
            slope_at_v: 9f64.powi(i as i32 - 1),
        })
        .collect();
    let table = ThresholdTable { rows };
    table.validate()?;
    Ok(table)
}

/// The largest `x < right` with `g(x) = level`. The bracket comes from a
/// multiplicative leftward scan (`g(right) < level` on entry and
/// `g → f'(0) > level` toward 0).
fn solve_slope_level(target: &TargetFn, level: f64, right: f64) -> Result<f64, CompareError> {
    const STEP: f64 = 0.917_004_043_204_671_2; // 2^(-1/8)
    let mut hi = right;
    let mut lo = right * STEP;
    let mut guard = 0;
    while target.slope(lo) < level {
        hi = lo;
        lo *= STEP;
        guard += 1;
        if lo < 1e-300 || guard > 100_000 {
            return Err(CompareError::LevelNotBracketed { level });
        }
    }
    // g(lo) ≥ level > g(hi): bisect.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let gm = target.slope(mid);
        if (gm - level).abs() <= 1e-12 * level || (hi - lo) <= f64::EPSILON * mid {
            return Ok(mid);
        }
        if gm >= level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The residual field of the node system over its threshold box:
/// component `s` is `Σ_k 4·9^{k−1}·y_k²y_s/(y_k² + 3y_s²) − f(y_s)`.
pub fn build_residual_system(
    target: &TargetFn,
    table: &ThresholdTable,
) -> Result<(VectorField, BoxN), CompareError> {
    table.validate()?;
    let n = table.n();
    let weights = comparison_weights(n);
    let mut components: Vec<Component> = Vec::with_capacity(n);
    for s in 0..n {
        let weights = weights.clone();
        let t = target.clone();
        components.push(Box::new(move |y: &[f64]| {
            let ys = y[s];
            let mut acc = 0.0;
            for (k, &w) in weights.iter().enumerate() {
                let yk2 = y[k] * y[k];
                acc += w * yk2 * ys / (yk2 + 3.0 * ys * ys);
            }
            acc - t.eval(ys)
        }));
    }
    let field = VectorField::new(components);
    let bx = BoxN::new(
        table.rows.iter().map(|r| r.u).collect(),
        table.rows.iter().map(|r| r.v).collect(),
    )?;
    Ok((field, bx))
}

/// Solved nodes `z_1 > z_2 > … > z_n` with their residuals.
#[derive(Clone, Debug, Serialize)]
pub struct NodeVector {
    pub z: Vec<f64>,
    pub residuals: Vec<f64>,
    pub residual_inf: f64,
}

/// Everything the node pipeline produced.
#[derive(Clone, Debug, Serialize)]
pub struct NodePipeline {
    pub thresholds: ThresholdTable,
    pub nodes: NodeVector,
    pub solver: MirandaReport,
}

/// Thresholds → residual field → box solve, with interlacing verified.
pub fn solve_interpolation_nodes(
    target: &TargetFn,
    n: usize,
    cfg: &SolverConfig,
) -> Result<NodePipeline, CompareError> {
    let thresholds = find_thresholds(target, n)?;
    let (field, bx) = build_residual_system(target, &thresholds)?;
    let report = miranda::solve(&field, &bx, cfg)?;
    let z = match &report.solution {
        Some(z) => z.clone(),
        None => {
            return Err(CompareError::NodesNotFound {
                status: report.status.clone(),
                residual: report.residual_inf,
            })
        }
    };
    // Interlacing: z_i within its threshold pair, strictly decreasing.
    for (i, row) in thresholds.rows.iter().enumerate() {
        let slack = 1e-12 * (1.0 + row.v.abs());
        if z[i] < row.u - slack || z[i] > row.v + slack {
            return Err(CompareError::NodesNotFound {
                status: format!("node {} escapes its threshold pair", i + 1),
                residual: report.residual_inf,
            });
        }
    }
    if !z.windows(2).all(|w| w[0] > w[1]) {
        return Err(CompareError::NodesNotFound {
            status: "nodes are not strictly decreasing".into(),
            residual: report.residual_inf,
        });
    }
    let residuals: Vec<f64> = (0..n).map(|s| field.component(s, &z)).collect();
    let residual_inf = residuals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(NodePipeline {
        thresholds,
        nodes: NodeVector {
            z,
            residuals,
            residual_inf,
        },
        solver: report,
    })
}

/// CSV rendering of a node table: `i,u_i,v_i,z_i,residual_i`.
pub fn nodes_csv(table: &ThresholdTable, nodes: &NodeVector) -> String {
    let mut out = String::from("i,u_i,v_i,z_i,residual_i\n");
    for (row, (z, r)) in table.rows.iter().zip(nodes.z.iter().zip(&nodes.residuals)) {
        let _ = writeln!(out, "{},{},{},{},{}", row.index, row.u, row.v, z, r);
    }
    out
}

/// The comparison function: the kernel sum with weights `4·9^{k−1}` at the
/// solved nodes, minus the odd candidate. The candidate's oddness is
/// checked on a sample grid.
pub fn build_comparison_fn(r: &FnExpr, nodes: &NodeVector) -> Result<FnExpr, CompareError> {
    if !r.is_structurally_odd() {
        let defect = r.odd_defect(512);
        let scale = 1.0 + r.eval(1.0)?.abs();
        if defect > 1e-10 * scale {
            return Err(CompareError::ParityError { defect });
        }
    }
    let weights = comparison_weights(nodes.z.len());
    let kernel = KernelSum::new(
        weights
            .iter()
            .zip(&nodes.z)
            .map(|(&w, &z)| KernelTerm { weight: w, node: z })
            .collect(),
    )?;
    Ok(FnExpr::difference(FnExpr::Kernel(kernel), r.clone()))
}

/// What the sign-pattern sweep established.
#[derive(Clone, Debug, Serialize)]
pub struct SignPatternReport {
    /// `L'(0)`; negative whenever the candidate slope at 0 beats the
    /// weight sum `(9ⁿ−1)/2`.
    pub derivative_at_zero: f64,
    /// `L(z_s)` per node; at the interpolation-residual scale.
    pub values_at_nodes: Vec<f64>,
    /// `L'(z_s)` per node; all negative in a valid pattern.
    pub derivative_at_nodes: Vec<f64>,
    /// One bracketing pair per gap interval `(0, z_n), (z_n, z_{n−1}), …`.
    pub gap_crossings: Vec<(f64, f64)>,
    /// Zero events on `(0, 1]`: transversal node zeros plus gap crossings.
    pub half_line_zero_events: usize,
    /// Total on `[-1, 1]`, counting odd reflections and the origin.
    pub total_zero_count: usize,
    /// Degree class of the comparison function, when it has one.
    pub degree_bound: Option<usize>,
    /// Whether the count exceeds what the degree class permits for a
    /// function that is not identically zero.
    pub exceeds_degree_bound: Option<bool>,
}

/// Verifies the forced sign pattern of a comparison function `L`:
/// `L'(0) < 0`, `L'(z_s) < 0` at every node, and a sign change of `L`
/// inside every gap interval. Zero counting uses sign changes only, so the
/// reported count is a lower bound on the true number of zeros.
pub fn sign_pattern_check(
    l: &FnExpr,
    nodes: &NodeVector,
) -> Result<SignPatternReport, CompareError> {
    let d0 = l.derivative_at(0.0)?;
    if !(d0 < 0.0) {
        return Err(CompareError::PatternViolation {
            interval: (0.0, 0.0),
            detail: format!("L'(0) = {d0} is not negative"),
        });
    }
    let mut derivative_at_nodes = Vec::with_capacity(nodes.z.len());
    let mut values_at_nodes = Vec::with_capacity(nodes.z.len());
    for &z in &nodes.z {
        let dz = l.derivative_at(z)?;
        if !(dz < 0.0) {
            return Err(CompareError::PatternViolation {
                interval: (z, z),
                detail: format!("L'({z}) = {dz} is not negative"),
            });
        }
        derivative_at_nodes.push(dz);
        values_at_nodes.push(l.eval(z)?);
    }

    // Gap intervals, smallest first: (0, z_n), (z_n, z_{n−1}), …, (z_2, z_1).
    let mut bounds: Vec<f64> = vec![0.0];
    bounds.extend(nodes.z.iter().rev());
    let mut gap_crossings = Vec::new();
    for w in bounds.windows(2) {
        let (a, b) = (w[0], w[1]);
        match find_sign_change(l, a, b) {
            Some(pair) => gap_crossings.push(pair),
            None => {
                return Err(CompareError::PatternViolation {
                    interval: (a, b),
                    detail: "no sign change detected in gap".into(),
                })
            }
        }
    }

    // Nodes are transversal zeros (L(z_s) ≈ 0 with L'(z_s) < 0), so each
    // counts as a zero event alongside the gap crossings.
    let half = gap_crossings.len() + nodes.z.len();
    let total = 2 * half + 1;
    let degree_bound = l.degree_bound();
    Ok(SignPatternReport {
        derivative_at_zero: d0,
        values_at_nodes,
        derivative_at_nodes,
        gap_crossings,
        half_line_zero_events: half,
        total_zero_count: total,
        degree_bound,
        exceeds_degree_bound: degree_bound.map(|d| total > d),
    })
}

/// Searches the open interval `(a, b)` for adjacent samples of opposite
/// sign, raising the resolution until one is found.
fn find_sign_change(l: &FnExpr, a: f64, b: f64) -> Option<(f64, f64)> {
    let mut samples = 512usize;
    while samples <= 1 << 20 {
        let mut prev: Option<(f64, f64)> = None;
        for i in 1..samples {
            let x = a + (b - a) * i as f64 / samples as f64;
            let v = l.eval(x).ok()?;
            if v == 0.0 {
                continue;
            }
            if let Some((px, pv)) = prev {
                if (pv > 0.0) != (v > 0.0) {
                    return Some((px, x));
                }
            }
            prev = Some((x, v));
        }
        samples *= 8;
    }
    None
}

/// Verification outcome for one of the derivative bounds.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub subject: String,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derivative_at_zero: Option<f64>,
    pub norm: f64,
    /// The measured quantity the bound caps: `R'(0)/R(1)` for the center
    /// bound, `max_x R'(x)(1−x²)/‖R‖` for the envelope.
    pub ratio: f64,
    pub upper_bound: f64,
    pub verdict: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_x: Option<f64>,
    pub certified: bool,
}

fn describe(f: &FnExpr) -> String {
    match f {
        FnExpr::Rational(r) => format!("rational(degree<={})", r.declared_degree()),
        FnExpr::Kernel(k) => format!("kernel-sum({} terms)", k.terms().len()),
        FnExpr::Bumps(b) => format!("linear-plus-bumps({} bumps)", b.bumps().len()),
        FnExpr::Difference(..) => "difference".into(),
        FnExpr::Custom(c) => c.name.clone(),
    }
}

fn check_cert<'a>(
    f: &FnExpr,
    cert: Option<&'a MonotoneCertificate>,
) -> Result<&'a MonotoneCertificate, CompareError> {
    match cert {
        Some(c) if c.covers(f) => Ok(c),
        _ => Err(CompareError::CertificateMissing),
    }
}

/// Verifies `R'(0) ≤ ½·9ⁿ·R(1)` for a certified odd increasing `R` in the
/// degree class `Q_{2n}` (`n_half` is that `n`). The ratio normalizes by
/// `R(1)`, which equals the norm for odd increasing functions.
pub fn verify_center_bound(
    r: &FnExpr,
    n_half: usize,
    cert: Option<&MonotoneCertificate>,
) -> Result<BoundReport, CompareError> {
    let cert = check_cert(r, cert)?;
    if !r.is_structurally_odd() {
        let defect = r.odd_defect(512);
        if defect > 1e-10 * (1.0 + r.eval(1.0)?.abs()) {
            return Err(CompareError::ParityError { defect });
        }
    }
    if let Some(d) = r.degree_bound() {
        if d > 2 * n_half {
            return Err(CompareError::DegreeExceeded {
                actual: d,
                allowed: 2 * n_half,
            });
        }
    }
    let r1 = r.eval(1.0)?;
    if !(r1 > 0.0) {
        return Err(CompareError::MalformedTarget(format!(
            "R(1) = {r1} must be positive for normalization"
        )));
    }
    let mut report = center_bound_report_unchecked(r, n_half);
    report.norm = sup_norm(r, Some(cert));
    report.certified = true;
    Ok(report)
}

/// The center-bound arithmetic without any certification requirement.
/// The verdict is only meaningful for increasing inputs; this entry point
/// exists to exercise the boundary of the bound on raw kernel sums.
pub fn center_bound_report_unchecked(r: &FnExpr, n_half: usize) -> BoundReport {
    let d0 = r.derivative_at(0.0).unwrap_or(f64::NAN);
    let r1 = r.eval(1.0).unwrap_or(f64::NAN);
    let ratio = d0 / r1;
    let upper = 0.5 * 9f64.powi(n_half as i32);
    BoundReport {
        subject: describe(r),
        n: n_half,
        derivative_at_zero: Some(d0),
        norm: sup_norm(r, None),
        ratio,
        upper_bound: upper,
        verdict: ratio <= upper,
        worst_x: None,
        certified: false,
    }
}

/// Grid margin excluded at the endpoints, where the envelope diverges.
pub const ENVELOPE_MARGIN: f64 = 1e-4;
/// Envelope verification grid size.
pub const ENVELOPE_GRID: usize = 10_000;

/// Verifies the pointwise envelope `R'(x)(1−x²) ≤ 9ⁿ·‖R‖` for a certified
/// increasing `R` in the degree class `Q_n` (`n_deg` is that `n`), on a
/// ten-thousand-point grid of the open interval.
pub fn verify_envelope_bound(
    r: &FnExpr,
    n_deg: usize,
    cert: Option<&MonotoneCertificate>,
) -> Result<BoundReport, CompareError> {
    let cert = check_cert(r, cert)?;
    if let Some(d) = r.degree_bound() {
        if d > n_deg {
            return Err(CompareError::DegreeExceeded {
                actual: d,
                allowed: n_deg,
            });
        }
    }
    let norm = sup_norm(r, Some(cert));
    if !(norm > 0.0) {
        return Err(CompareError::MalformedTarget(
            "function has zero norm".into(),
        ));
    }
    let lo = -1.0 + ENVELOPE_MARGIN;
    let hi = 1.0 - ENVELOPE_MARGIN;
    let mut pts: Vec<f64> = (0..ENVELOPE_GRID)
        .map(|i| lo + (hi - lo) * i as f64 / (ENVELOPE_GRID - 1) as f64)
        .collect();
    for s in scale_points_in(r, hi) {
        pts.push(s);
        pts.push(-s);
    }
    pts.push(0.0);
    let mut worst_x = 0.0;
    let mut worst = f64::NEG_INFINITY;
    for &x in &pts {
        let s = r.derivative_at(x)? * (1.0 - x * x) / norm;
        if s > worst {
            worst = s;
            worst_x = x;
        }
    }
    let upper = 9f64.powi(n_deg as i32);
    Ok(BoundReport {
        subject: describe(r),
        n: n_deg,
        derivative_at_zero: Some(r.derivative_at(0.0)?),
        norm,
        ratio: worst,
        upper_bound: upper,
        verdict: worst <= upper,
        worst_x: Some(worst_x),
        certified: true,
    })
}

fn scale_points_in(r: &FnExpr, hi: f64) -> Vec<f64> {
    r.scale_points().into_iter().filter(|&s| s < hi).collect()
}
