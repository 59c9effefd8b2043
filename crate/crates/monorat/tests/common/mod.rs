//! Shared oracles for the integration suites. Everything here recomputes
//! expected values through routes independent of the library paths under
//! test: plain bisection, exhaustive grid scans, and closed forms.
//!
//! Each integration target compiles this module separately, so not every
//! helper is used by every target.
#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::Rng;

use monorat::ratcore::{Bump, LinearPlusBumps};

/// Bisection root of `f` on `[a, b]`. Accepts an endpoint root (no sign
/// change needed there) and otherwise requires `f(a)·f(b) < 0`.
pub fn bisect_root(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    if fa.abs() <= tol {
        return a;
    }
    if fb.abs() <= tol {
        return b;
    }
    assert!(
        fa * fb < 0.0,
        "oracle bisection needs a sign change: f({a}) = {fa}, f({b}) = {fb}"
    );
    let mut sa = fa.signum();
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm.abs() <= tol || (b - a) < f64::EPSILON * mid.abs() {
            return mid;
        }
        if fm.signum() == sa {
            a = mid;
            sa = fm.signum();
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Dense scan of `f` on `[a, b]` followed by a parabolic-free refinement
/// pass (three-point golden-section) around the best sample. Returns
/// `(argmax, max)`.
pub fn dense_max(f: impl Fn(f64) -> f64 + Copy, a: f64, b: f64, samples: usize) -> (f64, f64) {
    let mut best_x = a;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=samples {
        let x = a + (b - a) * i as f64 / samples as f64;
        let v = f(x);
        if v > best {
            best = v;
            best_x = x;
        }
    }
    let h = (b - a) / samples as f64;
    let (mut lo, mut hi) = ((best_x - h).max(a), (best_x + h).min(b));
    for _ in 0..200 {
        if hi - lo <= 1e-14 * (1.0 + lo.abs()) {
            break;
        }
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) < f(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x).max(best))
}

/// `(argmin, min)` via [`dense_max`] on `-f`.
pub fn dense_min(f: impl Fn(f64) -> f64 + Copy, a: f64, b: f64, samples: usize) -> (f64, f64) {
    let (x, neg) = dense_max(move |t| -f(t), a, b, samples);
    (x, -neg)
}

/// A random strictly increasing odd stack: random slope, up to five bumps
/// with scales in `[0.05, 1]`, and amplitudes budgeted so that
/// `Σ a_j < 8·slope` — each bump costs at most `a_j/8` of slope, so the
/// derivative keeps a positive floor by construction.
pub fn random_monotone_stack(rng: &mut StdRng) -> LinearPlusBumps {
    let m: usize = rng.random_range(1..=5);
    let slope = 10f64.powf(rng.random_range(-1.0..1.0));
    let mut scales: Vec<f64> = Vec::with_capacity(m);
    while scales.len() < m {
        let s: f64 = rng.random_range(0.05..=1.0);
        if scales.iter().all(|&t: &f64| (t - s).abs() > 1e-6) {
            scales.push(s);
        }
    }
    scales.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let budget: f64 = rng.random_range(0.1..0.95);
    let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let bumps = scales
        .iter()
        .zip(&raw)
        .map(|(&scale, &w)| Bump {
            amplitude: 8.0 * slope * budget * w / total,
            scale,
        })
        .collect();
    LinearPlusBumps::new(slope, bumps).expect("constructed stack is well-formed")
}
