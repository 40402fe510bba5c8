//! Search for a certified triple `(Λ, r, Γ_r)` for a symbol `Φ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::hull::{check_hull_condition, check_minkowski_conditions, check_relaxed_origin_condition, MinkowskiReport};
use super::trace::{move_to_level, trace_both_ways, TraceError};
use super::{strictly_convex_subarc, Arc, Segment, SegmentError, Termination, DEFAULT_DENSITY};
use crate::complex::{pair, C64};
use crate::symbols::{validate_hypotheses, Symbol};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("index {index} out of range for an arc of {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("no strictly convex run of {min_points} points")]
    NoConvexRun { min_points: usize },
    #[error("no strictly convex seed arc at level 1 satisfying the hull and origin conditions")]
    NoSeedArc,
    #[error("no certified level r > 1 found (last tried r = {last_r}, failing: {failing})")]
    SearchExhausted { last_r: f64, failing: String },
    #[error("need 1 ≤ M ≤ d, got d = {d}, M = {m}")]
    BadDegrees { d: u32, m: u32 },
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Segment(#[from] SegmentError),
}

/// Tunables for [`build_theorem_data`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    /// tracing step
    pub step: f64,
    /// samples on each side of the arc centre
    pub half_width: usize,
    pub density: usize,
    /// first level tried above 1
    pub r0: f64,
    /// rays scanned from the origin for a level-1 crossing
    pub rays: usize,
    /// tried in order for the relaxed origin condition
    pub eps: Vec<f64>,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            step: 0.01,
            half_width: 20,
            density: DEFAULT_DENSITY,
            r0: 2.0,
            rays: 64,
            eps: vec![0.5, 0.25, 0.1],
        }
    }
}

/// How the origin requirement on the seed arc was met.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum OriginMode {
    /// `|Φ(0)| < 1`
    Origin,
    /// the triangle `conv{0, −εz₁, −εz₂}` lies in `Φ⁻¹(𝔻)`
    Relaxed { eps: f64 },
}

/// Certified geometry, in the original coordinates of `Φ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremData {
    pub phi: Symbol,
    /// `a` with `Φ̃(z) = Φ(az)` putting the arc midpoint at argument `π/2`
    #[serde(with = "pair")]
    pub omega: C64,
    pub lambda: Segment,
    pub r: f64,
    pub gamma_r: Arc,
    pub gamma_1: Arc,
    pub d: u32,
    pub m: u32,
    pub origin_mode: OriginMode,
    pub report: MinkowskiReport,
    /// the same checks at twice the density
    pub report_doubled: MinkowskiReport,
}

impl TheoremData {
    /// Reruns the four inclusion checks at `density`.
    pub fn recheck(&self, density: usize) -> MinkowskiReport {
        check_minkowski_conditions(&self.phi, &self.gamma_r, &self.lambda, self.d, self.m, density)
    }

    /// `Γ_r` in the normalized frame, `z ↦ z/ω`.
    pub fn gamma_r_normalized(&self) -> Arc {
        self.gamma_r.rotated(self.omega.inv())
    }
}

/// First crossing of `|Φ| = 1` along `s ↦ s·u`, `0 < s ≤ 20`, refined by bisection.
fn ray_crossing(phi: &Symbol, u: C64) -> Option<C64> {
    let f = |s: f64| phi.eval(u * s).norm() - 1.0;
    let ds = 0.01;
    let mut prev = f(ds);
    for k in 2..=2000 {
        let s = k as f64 * ds;
        let cur = f(s);
        if prev.signum() != cur.signum() && prev.is_finite() && cur.is_finite() {
            let (mut lo, mut hi) = (s - ds, s);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if f(mid).signum() == prev.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some(u * (0.5 * (lo + hi)));
        }
        prev = cur;
    }
    None
}

/// Closed arcs are reindexed so that the seed (index 0) sits in the middle.
fn centred(arc: Arc, seed: C64) -> (Arc, usize) {
    if arc.closed {
        let n = arc.len();
        let mut pts = arc.points[n - n / 2..].to_vec();
        pts.extend_from_slice(&arc.points[..n - n / 2]);
        (Arc::build(pts, arc.level, arc.step, false, Termination::Closed), n / 2)
    } else {
        let idx = (0..arc.len()).min_by(|&i, &j| (arc.points[i] - seed).norm().total_cmp(&(arc.points[j] - seed).norm()));
        (arc, idx.unwrap_or(0))
    }
}

fn keeps_sign(arc: &Arc) -> bool {
    strictly_convex_subarc(arc, arc.len()).is_ok()
}

/// Orders the arc so that `0 < arg(z₁/ω) < arg(z₂/ω) < π`.
fn normalize(arc: Arc, omega: C64) -> Option<Arc> {
    let arg = |z: C64| (z / omega).arg();
    let (a1, a2) = (arg(arc.first()), arg(arc.last()));
    let arc = if a1 > a2 { arc.reversed() } else { arc };
    let (a1, a2) = (arg(arc.first()), arg(arc.last()));
    (0.0 < a1 && a2 < PI).then_some(arc)
}

fn rotation_for(z3: C64) -> C64 {
    C64::new(0.0, -1.0) * z3 / z3.norm()
}

struct Seed {
    gamma_1: Arc,
    omega: C64,
    origin_mode: OriginMode,
}

fn seed_arc(phi: &Symbol, p: &SearchParams) -> Option<Seed> {
    let origin_ok = validate_hypotheses(phi).origin_ok;
    let delta = PI / p.rays.max(1) as f64;
    for k in 0..p.rays {
        let offset = k.div_ceil(2) as f64 * delta * if k % 2 == 1 { 1.0 } else { -1.0 };
        let Some(z) = ray_crossing(phi, C64::from_polar(1.0, PI / 2.0 + offset)) else { continue };
        let Ok(traced) = trace_both_ways(phi, 1.0, z, p.step, 400) else { continue };
        let (traced, seed_idx) = centred(traced, z);
        let Ok(run) = strictly_convex_subarc(&traced, 7) else { continue };
        // prefer a window around the seed; fall back to the middle of the convex run
        let run_start = traced.points.iter().position(|z| *z == run.first()).unwrap_or(0);
        let run_end = run_start + run.len();
        let mut hw = p.half_width;
        while hw >= 3 {
            let centre = if seed_idx >= run_start + hw && seed_idx + hw < run_end {
                seed_idx
            } else {
                run_start + run.len() / 2
            };
            if centre >= hw && centre + hw < traced.len() && centre - hw >= run_start && centre + hw < run_end {
                let window = traced.slice(centre - hw..centre + hw + 1);
                let omega = rotation_for(window.midpoint());
                if let Some(gamma_1) = normalize(window, omega) {
                    if check_hull_condition(phi, &gamma_1, p.density).holds {
                        let origin_mode = if origin_ok {
                            Some(OriginMode::Origin)
                        } else {
                            p.eps
                                .iter()
                                .find(|&&e| check_relaxed_origin_condition(phi, &gamma_1, e, p.density).holds)
                                .map(|&eps| OriginMode::Relaxed { eps })
                        };
                        if let Some(origin_mode) = origin_mode {
                            return Some(Seed { gamma_1, omega, origin_mode });
                        }
                    }
                }
            }
            hw /= 2;
        }
    }
    None
}

/// Largest `s ≤ 10` with `−û·(0, s] ⊂ Φ⁻¹(𝔻)`, scanned in steps of `1e-3`.
fn inner_radius(phi: &Symbol, u: C64) -> f64 {
    let ds = 1e-3;
    let mut best = 0.0;
    for k in 1..=10_000 {
        let s = k as f64 * ds;
        if phi.eval(-u * s).norm() >= 1.0 {
            break;
        }
        best = s;
    }
    best
}

struct Attempt {
    gamma_r: Arc,
    report: MinkowskiReport,
}

fn attempt(phi: &Symbol, r: f64, z3: C64, lambda: &Segment, d: u32, m: u32, p: &SearchParams) -> Result<Attempt, String> {
    let start = move_to_level(phi, r, z3).map_err(|e| e.to_string())?;
    let gamma_r = trace_both_ways(phi, r, start, p.step, p.half_width).map_err(|e| e.to_string())?;
    if gamma_r.len() != 2 * p.half_width + 1 || !keeps_sign(&gamma_r) {
        return Err("Γ_r is not a strictly convex arc".into());
    }
    let report = check_minkowski_conditions(phi, &gamma_r, lambda, d, m, p.density);
    match report.first_failure() {
        None => Ok(Attempt { gamma_r, report }),
        Some(c) => Err(format!("condition ({}) at {:?}", c.name, c.witness)),
    }
}

/// Discrete version of the arc/segment construction: a strictly convex
/// level-1 arc `Γ₁` around `z₃`, a segment `Λ` on the ray through `−z₃`
/// with `dΛ` inside `Φ⁻¹(𝔻)`, then the largest `r ∈ (1, r₀]` found by
/// halving and bisection for which the level-`r` arc near `z₃` passes all
/// four inclusion checks, at `density` and at twice `density`.
pub fn build_theorem_data(phi: &Symbol, d: u32, m: u32, params: &SearchParams) -> Result<TheoremData, GeometryError> {
    if m < 1 || m > d {
        return Err(GeometryError::BadDegrees { d, m });
    }
    if phi.is_constant() {
        return Err(GeometryError::NoSeedArc);
    }
    let Seed { gamma_1, omega, origin_mode } = seed_arc(phi, params).ok_or(GeometryError::NoSeedArc)?;
    let z3 = gamma_1.midpoint();
    let u = z3 / z3.norm();
    let rho = inner_radius(phi, u);
    if rho == 0.0 {
        return Err(GeometryError::NoSeedArc);
    }
    let s_hi = 0.9 * rho / d as f64;
    let lambda = Segment::new(-u * s_hi, -u * (s_hi / 1.25), params.density)?;

    let certify = |r: f64| -> Result<(Attempt, MinkowskiReport), String> {
        let a = attempt(phi, r, z3, &lambda, d, m, params)?;
        let doubled = check_minkowski_conditions(phi, &a.gamma_r, &lambda, d, m, 2 * params.density);
        match doubled.first_failure() {
            None => Ok((a, doubled)),
            Some(c) => Err(format!("condition ({}) at doubled density", c.name)),
        }
    };

    let mut r = params.r0;
    let (mut lo, mut hi);
    loop {
        let failing = match certify(r) {
            Ok(found) => {
                lo = (r, found);
                hi = if r == params.r0 { None } else { Some(1.0 + 2.0 * (r - 1.0)) };
                break;
            }
            Err(why) => why,
        };
        r = 1.0 + (r - 1.0) / 2.0;
        if r - 1.0 < 1e-6 {
            return Err(GeometryError::SearchExhausted { last_r: r, failing });
        }
    }
    if let Some(mut fail) = hi.take() {
        for _ in 0..8 {
            let mid = 0.5 * (lo.0 + fail);
            match certify(mid) {
                Ok(found) => lo = (mid, found),
                Err(_) => fail = mid,
            }
        }
    }
    let (r, (Attempt { gamma_r, report }, report_doubled)) = lo;
    Ok(TheoremData { phi: phi.clone(), omega, lambda, r, gamma_r, gamma_1, d, m, origin_mode, report, report_doubled })
}
