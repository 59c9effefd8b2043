//! Root finding on boxes under opposite-face sign conditions
//! (Poincaré–Miranda): if every component `f_k` of a continuous field is
//! negative on the face `y_k = u_k` and positive on the face `y_k = v_k`,
//! the field has a zero inside the box.
//!
//! The solver is the constructive counterpart: after mapping the box to
//! `[-1, 1]ⁿ` it iterates `x ← x − μ·φ(x)` with the saturating
//! normalization
//!
//! `φ_k(x) = f_k(x) / (|f_k(x)| + (1 − x_k²))`,
//!
//! each component normalized by its own magnitude. `|φ_k| ≤ 1` everywhere
//! and `φ_k = ±1` on the corresponding faces, so for small enough `μ` the
//! iteration maps the box into itself; `μ` is adapted (halved on stall and
//! whenever a step would exit the box). A damped Newton polish with a
//! finite-difference Jacobian sharpens the final digits.

use serde::Serialize;
use thiserror::Error;

/// An axis-aligned box `Π = Π[u_i, v_i]`.
#[derive(Clone, Debug, Serialize)]
pub struct BoxN {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxN {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, MirandaError> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(MirandaError::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        for (i, (&u, &v)) in lower.iter().zip(&upper).enumerate() {
            if !(u < v) {
                return Err(MirandaError::EmptySide { index: i, lo: u, hi: v });
            }
        }
        Ok(BoxN { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&u, &v)| 0.5 * (u + v))
            .collect()
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        y.len() == self.dim()
            && y.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&yi, (&u, &v))| yi >= u && yi <= v)
    }

    /// Maps `x ∈ [-1, 1]ⁿ` to the box.
    fn lift_unit_point(&self, x: &[f64], out: &mut [f64]) {
        for (i, out_i) in out.iter_mut().enumerate() {
            let c = 0.5 * (self.lower[i] + self.upper[i]);
            let r = 0.5 * (self.upper[i] - self.lower[i]);
            *out_i = c + r * x[i];
        }
    }

    fn clamp(&self, y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = yi.clamp(self.lower[i], self.upper[i]);
        }
    }
}

/// One component evaluator of a vector field.
pub type Component = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A continuous vector field on a box, one evaluator per component.
/// Evaluators must be pure; the solver calls them freely.
pub struct VectorField {
    components: Vec<Component>,
}

impl VectorField {
    pub fn new(components: Vec<Component>) -> Self {
        VectorField { components }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, k: usize, y: &[f64]) -> f64 {
        (self.components[k])(y)
    }

    pub fn eval_into(&self, y: &[f64], out: &mut [f64]) {
        for (k, c) in self.components.iter().enumerate() {
            out[k] = c(y);
        }
    }

    /// `max_k |f_k(y)|`.
    pub fn residual_inf(&self, y: &[f64]) -> f64 {
        self.components
            .iter()
            .map(|c| c(y).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Initial damping step.
    pub mu_init: f64,
    /// The iteration gives up when the damping falls below this.
    pub mu_min: f64,
    pub max_iter: usize,
    /// Residual target, `max_k |f_k| ≤ tol`.
    pub tol: f64,
    /// Lattice points per face dimension for the sign check.
    pub face_samples: usize,
    /// Iterations without residual improvement before the damping halves.
    pub patience: usize,
    /// Keep the iterate log in the report.
    pub record_path: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            mu_init: 0.1,
            mu_min: 1e-12,
            max_iter: 100_000,
            tol: 1e-10,
            face_samples: 33,
            patience: 25,
            record_path: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum MirandaError {
    #[error("field has {expected} components but the box has dimension {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("box side {index} is empty: [{lo}, {hi}]")]
    EmptySide { index: usize, lo: f64, hi: f64 },
    #[error("iteration did not converge: residual {residual:.3e} after {iterations} iterations")]
    NoConvergence {
        residual: f64,
        iterations: usize,
        last: Vec<f64>,
    },
    #[error("component {component} has the wrong sign ({value:.3e}) at the {side} face")]
    SignConditionViolated {
        component: usize,
        side: char,
        value: f64,
    },
    #[error("singular Jacobian at the polish stage")]
    SingularJacobian,
}

/// Worst-case margins of one component on its two faces.
#[derive(Clone, Debug, Serialize)]
pub struct FaceMargin {
    pub component: usize,
    /// Minimum of `f_k` on the face `y_k = v_k`; the condition wants it
    /// positive.
    pub plus_min: f64,
    /// Maximum of `f_k` on the face `y_k = u_k`; the condition wants it
    /// negative.
    pub minus_max: f64,
}

/// Sampled face-sign evidence. A lattice verdict, not a proof.
#[derive(Clone, Debug, Serialize)]
pub struct FaceCheck {
    pub margins: Vec<FaceMargin>,
    /// Strict verdict: every `plus_min > 0` and every `minus_max < 0`.
    pub pass: bool,
    /// Faces where the sign is strictly wrong (beyond a zero margin).
    pub violations: Vec<(usize, char)>,
    /// True when some margin is exactly zero: the root may sit on the
    /// boundary. The solver proceeds in this case.
    pub marginal: bool,
}

/// Samples each face `Π_k^±` on a uniform lattice and reports the
/// worst-case margins. The verdict is heuristic evidence from sampling,
/// not a certificate.
pub fn check_face_signs(
    field: &VectorField,
    bx: &BoxN,
    cfg: &SolverConfig,
) -> Result<FaceCheck, MirandaError> {
    let n = bx.dim();
    if field.dim() != n {
        return Err(MirandaError::DimensionMismatch {
            expected: field.dim(),
            got: n,
        });
    }
    // Cap the lattice at 1e5 points per face.
    let mut per_dim = cfg.face_samples.max(2);
    if n > 1 {
        while (per_dim as f64).powi(n as i32 - 1) > 1e5 {
            per_dim -= 1;
        }
        per_dim = per_dim.max(2);
    }

    let mut margins = Vec::with_capacity(n);
    let mut violations = Vec::new();
    let mut marginal = false;
    let mut point = vec![0.0; n];
    for k in 0..n {
        let mut plus_min = f64::INFINITY;
        let mut minus_max = f64::NEG_INFINITY;
        for &(side, fixed) in &[('+', bx.upper[k]), ('-', bx.lower[k])] {
            enumerate_face(bx, k, fixed, per_dim, &mut point, &mut |p| {
                let v = field.component(k, p);
                if side == '+' {
                    plus_min = plus_min.min(v);
                } else {
                    minus_max = minus_max.max(v);
                }
            });
        }
        if plus_min < 0.0 {
            violations.push((k, '+'));
        }
        if minus_max > 0.0 {
            violations.push((k, '-'));
        }
        if plus_min == 0.0 || minus_max == 0.0 {
            marginal = true;
        }
        margins.push(FaceMargin {
            component: k,
            plus_min,
            minus_max,
        });
    }
    let pass = margins
        .iter()
        .all(|m| m.plus_min > 0.0 && m.minus_max < 0.0);
    Ok(FaceCheck {
        margins,
        pass,
        violations,
        marginal,
    })
}

fn enumerate_face(
    bx: &BoxN,
    fixed_dim: usize,
    fixed_value: f64,
    per_dim: usize,
    point: &mut [f64],
    visit: &mut impl FnMut(&[f64]),
) {
    let n = bx.dim();
    let free: Vec<usize> = (0..n).filter(|&i| i != fixed_dim).collect();
    point[fixed_dim] = fixed_value;
    let mut idx = vec![0usize; free.len()];
    loop {
        for (slot, &dim) in free.iter().enumerate() {
            let t = if per_dim == 1 {
                0.5
            } else {
                idx[slot] as f64 / (per_dim - 1) as f64
            };
            point[dim] = bx.lower[dim] + t * (bx.upper[dim] - bx.lower[dim]);
        }
        visit(point);
        // Advance the multi-index.
        let mut slot = 0;
        loop {
            if slot == idx.len() {
                return;
            }
            idx[slot] += 1;
            if idx[slot] < per_dim {
                break;
            }
            idx[slot] = 0;
            slot += 1;
        }
    }
}

/// The normalized step component `φ_k = f_k/(|f_k| + (1 − x_k²))` in
/// mapped coordinates. Bounded by 1 in magnitude everywhere, saturating to
/// `±1` on the faces `x_k = ±1` whenever `f_k` has the face's sign, and 0
/// at a root.
pub fn phi_component(f_value: f64, x_k: f64) -> f64 {
    let denom = f_value.abs() + (1.0 - x_k * x_k);
    if denom == 0.0 {
        0.0
    } else {
        f_value / denom
    }
}

/// Outcome of the damped iteration.
#[derive(Clone, Debug)]
pub struct IterationOutcome {
    pub x: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    /// Largest `|x_k|` seen over all iterates in mapped coordinates; the
    /// containment invariant is `≤ 1`.
    pub max_coord_abs: f64,
    pub path: Option<Vec<Vec<f64>>>,
}

/// Damped fixed-point iteration from the box center.
///
/// Fails with `NoConvergence` (carrying the best iterate) when the budget
/// or the damping floor is exhausted, and with `SignConditionViolated`
/// when a component shows a decisively wrong sign at a face.
pub fn brouwer_iterate(
    field: &VectorField,
    bx: &BoxN,
    cfg: &SolverConfig,
) -> Result<IterationOutcome, MirandaError> {
    let n = bx.dim();
    if field.dim() != n {
        return Err(MirandaError::DimensionMismatch {
            expected: field.dim(),
            got: n,
        });
    }
    let mut x = vec![0.0; n]; // box center in mapped coordinates
    let mut y = vec![0.0; n];
    let mut fval = vec![0.0; n];
    let mut phi = vec![0.0; n];
    let mut mu = cfg.mu_init;
    let mut best = x.clone();
    let mut best_res = f64::INFINITY;
    let mut stall = 0usize;
    let mut max_coord: f64 = 0.0;
    let mut path = if cfg.record_path { Some(Vec::new()) } else { None };

    for iter in 0..cfg.max_iter {
        bx.lift_unit_point(&x, &mut y);
        field.eval_into(&y, &mut fval);
        let residual = fval.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if let Some(p) = path.as_mut() {
            p.push(y.clone());
        }
        if residual <= cfg.tol {
            return Ok(IterationOutcome {
                x: y,
                residual,
                iterations: iter,
                max_coord_abs: max_coord,
                path,
            });
        }
        if residual < best_res {
            best_res = residual;
            best.copy_from_slice(&x);
            stall = 0;
        } else {
            stall += 1;
            if stall >= cfg.patience {
                mu *= 0.5;
                stall = 0;
                if mu < cfg.mu_min {
                    bx.lift_unit_point(&best, &mut y);
                    return Err(MirandaError::NoConvergence {
                        residual: best_res,
                        iterations: iter,
                        last: y,
                    });
                }
            }
        }
        for k in 0..n {
            phi[k] = phi_component(fval[k], x[k]);
        }
        // Take the step, halving μ while it would exit the box. |φ_k| ≤ 1
        // always; wrong-signed components near a face are the only way a
        // step can push outside.
        loop {
            let mut inside = true;
            let mut offender = 0usize;
            for k in 0..n {
                let xk = x[k] - mu * phi[k];
                if xk.abs() > 1.0 {
                    inside = false;
                    offender = k;
                    break;
                }
            }
            if inside {
                break;
            }
            mu *= 0.5;
            if mu < cfg.mu_min {
                let k = offender;
                // A vanishing component near the face is a boundary root,
                // handled by the polish; a decisively wrong sign is a
                // violated face condition.
                if fval[k].abs() > 100.0 * cfg.tol {
                    return Err(MirandaError::SignConditionViolated {
                        component: k,
                        side: if x[k] > 0.0 { '+' } else { '-' },
                        value: fval[k],
                    });
                }
                bx.lift_unit_point(&best, &mut y);
                return Err(MirandaError::NoConvergence {
                    residual: best_res,
                    iterations: iter,
                    last: y,
                });
            }
        }
        for k in 0..n {
            x[k] -= mu * phi[k];
            max_coord = max_coord.max(x[k].abs());
        }
    }
    bx.lift_unit_point(&best, &mut y);
    Err(MirandaError::NoConvergence {
        residual: best_res,
        iterations: cfg.max_iter,
        last: y,
    })
}

/// Outcome of the Newton polish.
#[derive(Clone, Debug)]
pub struct PolishOutcome {
    pub x: Vec<f64>,
    pub residual: f64,
    pub steps: usize,
    pub converged: bool,
    pub singular: bool,
}

/// Damped Newton with a forward-difference Jacobian, steps clipped to the
/// box. Returns the best iterate with flags rather than failing: a
/// singular Jacobian hands back the starting point.
pub fn newton_polish(field: &VectorField, bx: &BoxN, x0: &[f64], tol: f64) -> PolishOutcome {
    let n = bx.dim();
    let mut x = x0.to_vec();
    bx.clamp(&mut x);
    let mut fx = vec![0.0; n];
    field.eval_into(&x, &mut fx);
    let mut res = fx.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if res <= tol {
        return PolishOutcome {
            x,
            residual: res,
            steps: 0,
            converged: true,
            singular: false,
        };
    }
    let mut singular = false;
    let mut taken = 0usize;
    for step in 1..=60 {
        // Forward-difference Jacobian, step scaled per coordinate.
        let mut jac = vec![vec![0.0; n]; n];
        let mut xh = x.clone();
        let mut fh = vec![0.0; n];
        for j in 0..n {
            let h = 1e-7 * (1.0 + x[j].abs());
            xh[j] = x[j] + h;
            field.eval_into(&xh, &mut fh);
            for i in 0..n {
                jac[i][j] = (fh[i] - fx[i]) / h;
            }
            xh[j] = x[j];
        }
        let rhs: Vec<f64> = fx.iter().map(|v| -v).collect();
        let delta = match solve_linear(&mut jac, rhs) {
            Some(d) => d,
            None => {
                singular = true;
                break;
            }
        };
        // Damped line search on the residual, clipped to the box.
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let mut xn: Vec<f64> = x
                .iter()
                .zip(&delta)
                .map(|(&xi, &di)| xi + lambda * di)
                .collect();
            bx.clamp(&mut xn);
            let mut fn_ = vec![0.0; n];
            field.eval_into(&xn, &mut fn_);
            let rn = fn_.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if rn < res {
                x = xn;
                fx = fn_;
                res = rn;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if accepted {
            taken = step;
        }
        if res <= tol {
            return PolishOutcome {
                x,
                residual: res,
                steps: taken,
                converged: true,
                singular: false,
            };
        }
        if !accepted {
            break;
        }
    }
    PolishOutcome {
        x,
        residual: res,
        steps: taken,
        converged: res <= tol,
        singular,
    }
}

/// Gaussian elimination with partial pivoting; `None` on singularity.
fn solve_linear(a: &mut [Vec<f64>], mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let mut piv = col;
        for row in col + 1..n {
            if a[row][col].abs() > a[piv][col].abs() {
                piv = row;
            }
        }
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor != 0.0 {
                let (pivot_row, target_row) = {
                    let (head, tail) = a.split_at_mut(row);
                    (&head[col], &mut tail[0])
                };
                for (t, p) in target_row[col..n].iter_mut().zip(&pivot_row[col..n]) {
                    *t -= factor * p;
                }
                b[row] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Full pipeline report.
#[derive(Clone, Debug, Serialize)]
pub struct MirandaReport {
    pub dim: usize,
    pub face_check: FaceCheck,
    pub solution: Option<Vec<f64>>,
    pub residual_inf: f64,
    pub iterations: usize,
    pub status: String,
    /// Largest mapped coordinate magnitude observed; containment holds
    /// while this stays at or below 1. When the damped stage gives up
    /// early the field reports 1, the ceiling its step-retry loop
    /// enforces.
    pub containment_max_abs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<Vec<f64>>>,
}

/// Face check, damped iteration, Newton polish — in that order. The
/// report carries all stages; a wrong-signed face stops the pipeline
/// unless the margins are merely zero (boundary root), in which case the
/// iteration proceeds.
pub fn solve(field: &VectorField, bx: &BoxN, cfg: &SolverConfig) -> Result<MirandaReport, MirandaError> {
    let face_check = check_face_signs(field, bx, cfg)?;
    if !face_check.violations.is_empty() {
        return Ok(MirandaReport {
            dim: bx.dim(),
            face_check,
            solution: None,
            residual_inf: f64::INFINITY,
            iterations: 0,
            status: "face_sign_violation".into(),
            containment_max_abs: 0.0,
            path: None,
        });
    }
    let (start, iterations, max_coord, path) = match brouwer_iterate(field, bx, cfg) {
        Ok(out) => (out.x, out.iterations, out.max_coord_abs, out.path),
        Err(MirandaError::NoConvergence {
            iterations, last, ..
        }) => (last, iterations, 1.0, None),
        Err(e) => return Err(e),
    };
    // The polish starts from the iteration's best point and only accepts
    // improving steps, so its residual never exceeds the handoff value.
    let polish = newton_polish(field, bx, &start, cfg.tol * 1e-2);
    let final_x = polish.x;
    let final_res = polish.residual;
    let converged = final_res <= cfg.tol;
    Ok(MirandaReport {
        dim: bx.dim(),
        face_check,
        solution: if converged { Some(final_x.clone()) } else { None },
        residual_inf: final_res,
        iterations: iterations + polish.steps,
        status: if converged {
            "converged".into()
        } else if polish.singular {
            "singular_jacobian".into()
        } else {
            "no_convergence".into()
        },
        containment_max_abs: max_coord,
        path,
    })
}
