//! Predictor–corrector continuation along `|Φ(z)| = r`.

use thiserror::Error;

use super::{Arc, Termination};
use crate::complex::C64;
use crate::symbols::Symbol;

const SEED_TOL: f64 = 0.1;
const FD_STEP: f64 = 1e-6;
const CRITICAL_TOL: f64 = 1e-8;
const MAX_NEWTON: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraceError {
    #[error("seed is off the level set: ||Φ(seed)| − r| = {residual}")]
    SeedNotOnLevel { residual: f64 },
    #[error("Newton corrector did not converge in {MAX_NEWTON} iterations near {at}")]
    CorrectorDivergence { at: C64 },
    #[error("critical point of Φ encountered near {at}")]
    CriticalPoint { at: C64 },
    #[error("level and step must be positive")]
    BadParameters,
}

fn residual_tol(r: f64) -> f64 {
    1e-11 * r.max(1.0)
}

/// `∇|Φ|²` as a complex number, `2 Φ conj(Φ')`.
fn gradient(phi: &Symbol, z: C64) -> C64 {
    2.0 * phi.eval(z) * phi.derivative(z).conj()
}

/// Damped Newton on `|Φ|² − r²` along the gradient direction.
pub fn correct_to_level(phi: &Symbol, r: f64, mut z: C64) -> Result<C64, TraceError> {
    let f = |z: C64| phi.eval(z).norm_sqr() - r * r;
    let mut fz = f(z);
    for _ in 0..MAX_NEWTON {
        if (phi.eval(z).norm() - r).abs() < residual_tol(r) {
            return Ok(z);
        }
        let g = gradient(phi, z);
        let gn = g.norm_sqr();
        if gn < CRITICAL_TOL * CRITICAL_TOL {
            return Err(TraceError::CriticalPoint { at: z });
        }
        let full = g * (fz / gn);
        let mut lambda = 1.0;
        loop {
            let cand = z - full * lambda;
            let fc = f(cand);
            if fc.abs() < fz.abs() || lambda < 1e-6 {
                z = cand;
                fz = fc;
                break;
            }
            lambda *= 0.5;
        }
    }
    if (phi.eval(z).norm() - r).abs() < residual_tol(r) {
        Ok(z)
    } else {
        Err(TraceError::CorrectorDivergence { at: z })
    }
}

/// Walks `z` onto level `r` in small level increments, so that the start
/// may be far from the target level.
pub fn move_to_level(phi: &Symbol, r: f64, mut z: C64) -> Result<C64, TraceError> {
    let mut current = phi.eval(z).norm();
    let stride = 0.05 * r.max(1.0);
    while (current - r).abs() > stride {
        current += stride * (r - current).signum();
        z = correct_to_level(phi, current, z)?;
    }
    correct_to_level(phi, r, z)
}

fn unit_tangent(phi: &Symbol, z: C64, orientation: f64) -> Option<C64> {
    let g = gradient(phi, z);
    let n = g.norm();
    (n > 0.0).then(|| C64::new(0.0, orientation) * g / n)
}

/// Traces `|Φ| = r` from `seed` in the counterclockwise sense for `Φ(z) = z`
/// (tangent `i∇|Φ|²`), stopping at `max_points`, on closure, or near a
/// critical point.
pub fn trace_level_curve(phi: &Symbol, r: f64, seed: C64, step: f64, max_points: usize) -> Result<Arc, TraceError> {
    trace_oriented(phi, r, seed, step, max_points, 1.0)
}

/// As [`trace_level_curve`] with tangent orientation `±1`.
pub fn trace_oriented(
    phi: &Symbol,
    r: f64,
    seed: C64,
    step: f64,
    max_points: usize,
    orientation: f64,
) -> Result<Arc, TraceError> {
    if !(r > 0.0 && step > 0.0) {
        return Err(TraceError::BadParameters);
    }
    let residual = (phi.eval(seed).norm() - r).abs();
    if residual.is_nan() || residual > SEED_TOL {
        return Err(TraceError::SeedNotOnLevel { residual });
    }
    if phi.fd_derivative(seed, FD_STEP).norm() < CRITICAL_TOL {
        return Err(TraceError::CriticalPoint { at: seed });
    }
    let start = correct_to_level(phi, r, seed)?;
    let mut points = vec![start];
    let mut tangent = unit_tangent(phi, start, orientation).ok_or(TraceError::CriticalPoint { at: start })?;
    let mut left_seed = false;
    let mut termination = Termination::MaxPoints;
    let mut closed = false;

    while points.len() < max_points {
        let z = *points.last().unwrap();
        let next = match correct_to_level(phi, r, z + tangent * step) {
            Ok(w) => w,
            Err(TraceError::CriticalPoint { .. }) => {
                termination = Termination::CriticalPoint;
                break;
            }
            Err(e) => return Err(e),
        };
        let spacing = (next - z).norm();
        if phi.derivative(next).norm() < CRITICAL_TOL || !(0.5 * step..=2.0 * step).contains(&spacing) {
            termination = Termination::CriticalPoint;
            break;
        }
        let new_tangent = match unit_tangent(phi, next, orientation) {
            Some(t) => t,
            None => {
                termination = Termination::CriticalPoint;
                break;
            }
        };
        // a reversed tangent means the continuation jumped branches near a saddle
        if (new_tangent * tangent.conj()).re < 0.0 {
            termination = Termination::CriticalPoint;
            break;
        }
        if (next - start).norm() > step {
            left_seed = true;
        }
        if left_seed && points.len() > 2 && (next - start).norm() < 0.5 * step {
            termination = Termination::Closed;
            closed = true;
            break;
        }
        points.push(next);
        tangent = new_tangent;
    }
    Ok(Arc::build(points, r, step, closed, termination))
}

/// Traces `half` steps each way from `seed` and joins the two halves into
/// one arc oriented along `+i∇|Φ|²`, seed at index `half` when nothing
/// terminates early.
pub fn trace_both_ways(phi: &Symbol, r: f64, seed: C64, step: f64, half: usize) -> Result<Arc, TraceError> {
    let fwd = trace_oriented(phi, r, seed, step, half + 1, 1.0)?;
    if fwd.closed {
        return Ok(fwd);
    }
    let back = trace_oriented(phi, r, seed, step, half + 1, -1.0)?;
    let mut points: Vec<C64> = back.points[1..].iter().rev().copied().collect();
    points.extend_from_slice(&fwd.points);
    let termination = if fwd.termination == Termination::CriticalPoint || back.termination == Termination::CriticalPoint
    {
        Termination::CriticalPoint
    } else {
        Termination::MaxPoints
    };
    Ok(Arc::build(points, r, step, false, termination))
}
