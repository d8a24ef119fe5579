//! Weighted nonlinear least squares for `net = A (1 + V cos(2πx/T + φ))`.
//!
//! Levenberg–Marquardt on all four parameters. The period starts at the
//! caller's nominal value and the phase at the best of a 16-point grid,
//! which keeps the free-period problem inside the right basin.
//!
//! A first pass weights each point by `1 / raw` (pre-subtraction counts,
//! `raw = 0` treated as 1). Weighting by observed counts pulls the fit
//! toward low fluctuations, so the fit is then repeated with weights from
//! the predicted raw counts `model + accidentals` until they settle.

use std::f64::consts::TAU;

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use serde::Serialize;

use crate::analysis::fringe::FringePoint;
use crate::error::{Error, Result};
use crate::quantum::{Phase, Visibility};

const PHASE_GRID: usize = 16;
const MAX_ITERATIONS: usize = 500;
const MAX_RESTARTS: usize = 4;
const REWEIGHT_PASSES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FringeFit {
    pub mean_level: f64,
    /// Fitted visibility as it came out of the fit; may exceed 1.
    pub visibility_raw: f64,
    pub visibility_sigma: f64,
    pub phase0: Phase,
    pub period: f64,
    pub mean_level_sigma: f64,
    pub phase_sigma: f64,
    pub period_sigma: f64,
    /// Reduced chi-square.
    pub goodness: f64,
    pub iterations: usize,
}

impl FringeFit {
    /// Visibility clamped into `[0, 1]` for reporting.
    pub fn visibility(&self) -> Visibility {
        Visibility::saturating(self.visibility_raw)
    }

    pub fn model(&self, x: f64) -> f64 {
        evaluate(&self.params(), x)
    }

    fn params(&self) -> Vector4<f64> {
        Vector4::new(self.mean_level, self.visibility_raw, self.phase0.0, self.period)
    }
}

struct Data {
    x: Vec<f64>,
    y: Vec<f64>,
    w: Vec<f64>,
}

// parameter order: A, V, φ, T
fn evaluate(p: &Vector4<f64>, x: f64) -> f64 {
    p[0] * (1.0 + p[1] * (TAU * x / p[3] + p[2]).cos())
}

fn chi2(p: &Vector4<f64>, d: &Data) -> f64 {
    d.x.iter()
        .zip(&d.y)
        .zip(&d.w)
        .map(|((&x, &y), &w)| w * (y - evaluate(p, x)).powi(2))
        .sum()
}

/// `(χ², JᵀWJ, JᵀWr)` at `p`.
fn normal_equations(p: &Vector4<f64>, d: &Data) -> (f64, Matrix4<f64>, Vector4<f64>) {
    let (a, v, phi, t) = (p[0], p[1], p[2], p[3]);
    let mut jtj = Matrix4::zeros();
    let mut jtr = Vector4::zeros();
    let mut chi = 0.0;
    for ((&x, &y), &w) in d.x.iter().zip(&d.y).zip(&d.w) {
        let theta = TAU * x / t + phi;
        let (s, c) = theta.sin_cos();
        let r = y - a * (1.0 + v * c);
        let j = Vector4::new(1.0 + v * c, a * c, -a * v * s, a * v * s * TAU * x / (t * t));
        chi += w * r * r;
        jtj += w * j * j.transpose();
        jtr += w * r * j;
    }
    (chi, jtj, jtr)
}

struct Solution {
    p: Vector4<f64>,
    chi2: f64,
    iterations: usize,
}

fn levenberg_marquardt(start: Vector4<f64>, d: &Data) -> Option<Solution> {
    let mut p = start;
    let mut lambda = 1e-3;
    for iteration in 1..=MAX_ITERATIONS {
        let (chi, jtj, jtr) = normal_equations(&p, d);
        if !chi.is_finite() {
            return None;
        }
        if chi <= 1e-28 * d.y.len() as f64 {
            return Some(Solution {
                p,
                chi2: chi,
                iterations: iteration,
            });
        }
        let mut improved = None;
        while lambda < 1e16 {
            let mut damped = jtj;
            for k in 0..4 {
                damped[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let step = damped.lu().solve(&jtr);
            if let Some(step) = step {
                let candidate = p + step;
                if candidate[3] > 0.0 {
                    let c = chi2(&candidate, d);
                    if c.is_finite() && c < chi {
                        improved = Some((candidate, c, step));
                        break;
                    }
                }
            }
            lambda *= 10.0;
        }
        let Some((candidate, new_chi, step)) = improved else {
            // no downhill step at any damping: at the minimum to working precision
            return Some(Solution {
                p,
                chi2: chi,
                iterations: iteration,
            });
        };
        lambda = (lambda / 10.0).max(1e-12);
        let small_step = (0..4).all(|k| step[k].abs() <= 1e-13 * (candidate[k].abs() + 1e-13));
        p = candidate;
        if chi - new_chi <= 1e-15 * chi || small_step {
            return Some(Solution {
                p,
                chi2: new_chi,
                iterations: iteration,
            });
        }
    }
    None
}

/// Linear fit `a + b cos + c sin` at a fixed period; returns the
/// coefficients with their covariance.
fn linear_fit(d: &Data, period: f64) -> Option<(Vector3<f64>, Matrix3<f64>)> {
    let mut m = Matrix3::zeros();
    let mut rhs = Vector3::zeros();
    for ((&x, &y), &w) in d.x.iter().zip(&d.y).zip(&d.w) {
        let (s, c) = (TAU * x / period).sin_cos();
        let row = Vector3::new(1.0, c, s);
        m += w * row * row.transpose();
        rhs += w * y * row;
    }
    let cov = m.try_inverse()?;
    Some((cov * rhs, cov))
}

fn flat_fit(d: &Data, period: f64) -> FringeFit {
    let n = d.y.len();
    let mean = d.y.iter().sum::<f64>() / n as f64;
    let p = Vector4::new(mean, 0.0, 0.0, period);
    let sigma_v = linear_fit(d, period)
        .map(|(_, cov)| ((cov[(1, 1)] + cov[(2, 2)]) / 2.0).sqrt() / mean.abs())
        .unwrap_or(f64::INFINITY);
    let sigma_a = (1.0 / d.w.iter().sum::<f64>()).sqrt();
    FringeFit {
        mean_level: mean,
        visibility_raw: 0.0,
        visibility_sigma: sigma_v,
        phase0: Phase(0.0),
        period,
        mean_level_sigma: sigma_a,
        phase_sigma: f64::INFINITY,
        period_sigma: f64::INFINITY,
        goodness: chi2(&p, d) / (n - 4) as f64,
        iterations: 0,
    }
}

/// Phase candidates sorted by χ², each with the visibility that best fits
/// at that phase for the mean level `a`.
fn initial_guesses(d: &Data, a: f64, period: f64) -> Vec<(f64, Vector4<f64>)> {
    let mut guesses: Vec<(f64, Vector4<f64>)> = (0..PHASE_GRID)
        .map(|k| {
            let phi = TAU * k as f64 / PHASE_GRID as f64;
            let (mut num, mut den) = (0.0, 0.0);
            for ((&x, &y), &w) in d.x.iter().zip(&d.y).zip(&d.w) {
                let c = (TAU * x / period + phi).cos();
                num += w * (y - a) * c;
                den += w * c * c;
            }
            let v = if den > 0.0 {
                (num / (a * den)).clamp(0.0, 1.5)
            } else {
                0.0
            };
            let p = Vector4::new(a, v, phi, period);
            (chi2(&p, d), p)
        })
        .collect();
    guesses.sort_by(|l, r| l.0.total_cmp(&r.0));
    guesses
}

/// Fits a sinusoidal fringe to accidental-subtracted points.
///
/// `period_seed` is the nominal fringe period in control units; the points
/// must span at least one such period.
pub fn fit_fringe(points: &[FringePoint], period_seed: f64) -> Result<FringeFit> {
    let n = points.len();
    if n < 5 {
        return Err(Error::Fit(format!("need at least 5 points, got {n}")));
    }
    if !(period_seed.is_finite() && period_seed > 0.0) {
        return Err(Error::Fit(format!("period seed {period_seed} must be positive")));
    }
    if points.iter().any(|p| !(p.control.is_finite() && p.net.is_finite())) {
        return Err(Error::Fit("non-finite control or net value".into()));
    }
    let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        (lo.min(p.control), hi.max(p.control))
    });
    if hi - lo < period_seed * (1.0 - 1e-9) {
        return Err(Error::Fit(format!(
            "points span {:e}, less than one period {period_seed:e}",
            hi - lo
        )));
    }

    let mut data = Data {
        x: points.iter().map(|p| p.control).collect(),
        y: points.iter().map(|p| p.net).collect(),
        w: points
            .iter()
            .map(|p| 1.0 / (p.raw_coincidences.max(1) as f64))
            .collect(),
    };

    let first = data.y[0];
    let scale = data.y.iter().fold(0.0f64, |m, &y| m.max(y.abs())).max(1e-300);
    if data.y.iter().all(|&y| (y - first).abs() <= 1e-12 * scale) {
        return Ok(flat_fit(&data, period_seed));
    }

    let mean = data.y.iter().sum::<f64>() / n as f64;
    if mean <= 0.0 {
        return Err(Error::Fit(format!("mean net level {mean} is not positive")));
    }

    // restart from the next-best grid phase only when a start fails
    let starts = initial_guesses(&data, mean, period_seed);
    let Some(mut sol) = starts
        .iter()
        .take(MAX_RESTARTS + 1)
        .find_map(|(_, start)| levenberg_marquardt(*start, &data))
    else {
        return Err(Error::Fit(format!(
            "no convergence after {} starts of up to {MAX_ITERATIONS} iterations (best start χ² = {:.4e})",
            MAX_RESTARTS + 1,
            starts[0].0
        )));
    };

    let accidentals: Vec<f64> = points.iter().map(|p| p.accidentals).collect();
    for _ in 0..REWEIGHT_PASSES {
        for ((w, &x), &acc) in data.w.iter_mut().zip(&data.x).zip(&accidentals) {
            *w = 1.0 / (evaluate(&sol.p, x) + acc).max(1.0);
        }
        let Some(next) = levenberg_marquardt(sol.p, &data) else {
            break;
        };
        let settled = (0..4).all(|k| (next.p[k] - sol.p[k]).abs() <= 1e-10 * (sol.p[k].abs() + 1e-12));
        let iterations = sol.iterations + next.iterations;
        sol = Solution { iterations, ..next };
        if settled {
            break;
        }
    }

    if sol.p[1] < 0.0 {
        sol.p[1] = -sol.p[1];
        sol.p[2] += std::f64::consts::PI;
    }
    sol.p[2] = Phase(sol.p[2]).reduced().0;

    let (_, jtj, _) = normal_equations(&sol.p, &data);
    let cov = jtj.try_inverse();
    let sigma = |k: usize| cov.map(|c| c[(k, k)].max(0.0).sqrt()).unwrap_or(f64::INFINITY);
    let mut visibility_sigma = sigma(1);
    if !visibility_sigma.is_finite() {
        visibility_sigma = flat_fit(&data, sol.p[3]).visibility_sigma;
    }

    Ok(FringeFit {
        mean_level: sol.p[0],
        visibility_raw: sol.p[1],
        visibility_sigma,
        phase0: Phase(sol.p[2]),
        period: sol.p[3],
        mean_level_sigma: sigma(0),
        phase_sigma: sigma(2),
        period_sigma: sigma(3),
        goodness: sol.chi2 / (n - 4) as f64,
        iterations: sol.iterations,
    })
}
