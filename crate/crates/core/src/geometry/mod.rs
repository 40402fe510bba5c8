//! Level curves `|Φ(z)| = r`, curvature, and the sampled inclusion checks
//! that certify an arc `Γ_r` and a segment `Λ` for the construction.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{pair, pairs, C64};

mod construct;
mod hull;
mod trace;

pub use construct::{build_theorem_data, GeometryError, OriginMode, SearchParams, TheoremData};
pub use hull::{
    check_hull_condition, check_minkowski_conditions, check_relaxed_origin_condition, hull_samples, ConditionReport,
    HullReport, MinkowskiReport,
};
pub use trace::{correct_to_level, move_to_level, trace_both_ways, trace_level_curve, trace_oriented, TraceError};

/// Default samples per dimension for the inclusion checks.
pub const DEFAULT_DENSITY: usize = 40;

/// Why tracing stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    MaxPoints,
    Closed,
    CriticalPoint,
    /// assembled from given points rather than traced
    Given,
}

/// Sampled planar curve at level `r`, with signed curvature per sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    #[serde(with = "pairs")]
    pub points: Vec<C64>,
    pub level: f64,
    pub curvatures: Vec<f64>,
    /// nominal spacing; zero when not traced
    pub step: f64,
    pub closed: bool,
    pub termination: Termination,
}

/// Signed curvature of the circle through `a`, `b`, `c`; positive when the
/// three points turn counterclockwise.
pub fn three_point_curvature(a: C64, b: C64, c: C64) -> f64 {
    let (u, v) = (b - a, c - b);
    let cross = u.re * v.im - u.im * v.re;
    let denom = u.norm() * v.norm() * (c - a).norm();
    if denom == 0.0 {
        return 0.0;
    }
    2.0 * cross / denom
}

impl Arc {
    /// Open arc through `points`, curvatures from consecutive triples.
    pub fn from_points(points: Vec<C64>, level: f64) -> Self {
        Self::build(points, level, 0.0, false, Termination::Given)
    }

    pub(crate) fn build(points: Vec<C64>, level: f64, step: f64, closed: bool, termination: Termination) -> Self {
        let curvatures = curvature_profile(&points, closed);
        Arc { points, level, curvatures, step, closed, termination }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> C64 {
        self.points[0]
    }

    pub fn last(&self) -> C64 {
        *self.points.last().expect("nonempty arc")
    }

    pub fn midpoint(&self) -> C64 {
        self.points[self.points.len() / 2]
    }

    /// Samples `range`, keeping the already computed curvatures.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Arc {
        Arc {
            points: self.points[range.clone()].to_vec(),
            level: self.level,
            curvatures: self.curvatures[range].to_vec(),
            step: self.step,
            closed: false,
            termination: self.termination,
        }
    }

    pub fn reversed(&self) -> Arc {
        let mut out = self.clone();
        out.points.reverse();
        out.curvatures.reverse();
        for k in &mut out.curvatures {
            *k = -*k;
        }
        out
    }

    /// Every point mapped by `z ↦ ω z`.
    pub fn rotated(&self, omega: C64) -> Arc {
        let mut out = self.clone();
        for z in &mut out.points {
            *z *= omega;
        }
        out
    }

    /// Largest `| |Φ(z)| − level |` over the samples.
    pub fn max_residual(&self, phi: &crate::symbols::Symbol) -> f64 {
        self.points.iter().map(|&z| (phi.eval(z).norm() - self.level).abs()).fold(0.0, f64::max)
    }

    /// `re,im,curvature` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("re,im,curvature\n");
        for (z, k) in self.points.iter().zip(&self.curvatures) {
            let _ = writeln!(s, "{:.16e},{:.16e},{:.16e}", z.re, z.im, k);
        }
        s
    }
}

fn curvature_profile(points: &[C64], closed: bool) -> Vec<f64> {
    let n = points.len();
    if n < 3 {
        return vec![0.0; n];
    }
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = three_point_curvature(points[i - 1], points[i], points[i + 1]);
    }
    if closed {
        out[0] = three_point_curvature(points[n - 1], points[0], points[1]);
        out[n - 1] = three_point_curvature(points[n - 2], points[n - 1], points[0]);
    } else {
        out[0] = out[1];
        out[n - 1] = out[n - 2];
    }
    out
}

/// Curvature at an interior sample from its two neighbours.
pub fn signed_curvature(arc: &Arc, index: usize) -> Result<f64, GeometryError> {
    if index < 1 || index + 1 >= arc.len() {
        return Err(GeometryError::IndexOutOfRange { index, len: arc.len() });
    }
    Ok(three_point_curvature(arc.points[index - 1], arc.points[index], arc.points[index + 1]))
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Longest run of samples whose curvature keeps one sign with
/// `|κ| ≥ 0.01 · median |κ|`.
pub fn strictly_convex_subarc(arc: &Arc, min_points: usize) -> Result<Arc, GeometryError> {
    if arc.len() < min_points {
        return Err(GeometryError::NoConvexRun { min_points });
    }
    let floor = 0.01 * median(arc.curvatures.iter().map(|k| k.abs()).collect());
    let sign = |k: f64| -> i8 {
        if k.abs() < floor || k == 0.0 {
            0
        } else if k > 0.0 {
            1
        } else {
            -1
        }
    };
    let (mut best, mut start) = ((0, 0), 0);
    for i in 0..=arc.len() {
        let run_ends = i == arc.len() || sign(arc.curvatures[i]) == 0 || sign(arc.curvatures[i]) != sign(arc.curvatures[start]);
        if run_ends {
            if start < i && sign(arc.curvatures[start]) != 0 && i - start > best.1 - best.0 {
                best = (start, i);
            }
            start = if i < arc.len() && sign(arc.curvatures[i]) == 0 { i + 1 } else { i };
        }
    }
    if best.1 - best.0 < min_points.max(1) {
        return Err(GeometryError::NoConvexRun { min_points });
    }
    Ok(arc.slice(best.0..best.1))
}

/// Nontrivial segment `[a, b]` avoiding the origin, with evenly spaced samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    #[serde(with = "pair")]
    pub a: C64,
    #[serde(with = "pair")]
    pub b: C64,
    #[serde(with = "pairs")]
    pub samples: Vec<C64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SegmentError {
    #[error("segment endpoints coincide")]
    Degenerate,
    #[error("segment passes through the origin")]
    ContainsOrigin,
    #[error("a segment needs at least two samples")]
    TooFewSamples,
}

impl Segment {
    pub fn new(a: C64, b: C64, n_samples: usize) -> Result<Self, SegmentError> {
        if (a - b).norm() == 0.0 {
            return Err(SegmentError::Degenerate);
        }
        if n_samples < 2 {
            return Err(SegmentError::TooFewSamples);
        }
        // distance from 0 to [a, b]
        let d = b - a;
        let t = (-(a.conj() * d).re / d.norm_sqr()).clamp(0.0, 1.0);
        if (a + d * t).norm() <= 1e-12 * a.norm().max(b.norm()) {
            return Err(SegmentError::ContainsOrigin);
        }
        let samples = (0..n_samples).map(|j| a + d * (j as f64 / (n_samples - 1) as f64)).collect();
        Ok(Segment { a, b, samples })
    }

    pub fn rotated(&self, omega: C64) -> Segment {
        Segment { a: self.a * omega, b: self.b * omega, samples: self.samples.iter().map(|z| z * omega).collect() }
    }

    /// `re,im` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("re,im\n");
        for z in &self.samples {
            let _ = writeln!(s, "{:.16e},{:.16e}", z.re, z.im);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn circle(r: f64, from: f64, to: f64, n: usize) -> Vec<C64> {
        (0..n).map(|j| C64::from_polar(r, from + (to - from) * j as f64 / (n - 1) as f64)).collect()
    }

    #[test]
    fn curvature_of_circles_and_lines() {
        let arc = Arc::from_points(circle(1.0, 0.0, PI, 200), 1.0);
        for i in 1..199 {
            assert!((signed_curvature(&arc, i).unwrap() - 1.0).abs() < 1e-4);
        }
        let cw = arc.reversed();
        assert!((signed_curvature(&cw, 5).unwrap() + 1.0).abs() < 1e-4);
        let big = Arc::from_points(circle(2.0, 0.0, 1.0, 50), 2.0);
        assert!((signed_curvature(&big, 10).unwrap().abs() - 0.5).abs() < 1e-4);
        let line = Arc::from_points((0..10).map(|j| C64::new(j as f64 * 0.1, 0.3 + j as f64 * 0.2)).collect(), 1.0);
        assert!(signed_curvature(&line, 4).unwrap().abs() < 1e-6);
        assert!(signed_curvature(&line, 0).is_err());
        assert!(signed_curvature(&line, 9).is_err());
    }

    #[test]
    fn convex_runs() {
        let arc = Arc::from_points(circle(1.0, 0.0, 2.0, 50), 1.0);
        assert_eq!(strictly_convex_subarc(&arc, 10).unwrap().len(), 50);
        let tiny = Arc::from_points(circle(1.0, 0.0, 0.1, 3), 1.0);
        assert_eq!(strictly_convex_subarc(&tiny, 5), Err(GeometryError::NoConvexRun { min_points: 5 }));
        // S-curve: left turn then right turn
        let mut pts = circle(1.0, -PI / 2.0, 0.0, 30);
        let centre = C64::new(2.0, 0.0);
        pts.extend((1..30).map(|j| centre + C64::from_polar(1.0, PI - j as f64 * (PI / 2.0) / 29.0)));
        let s = Arc::from_points(pts, 1.0);
        let run = strictly_convex_subarc(&s, 5).unwrap();
        assert!(run.curvatures.iter().all(|&k| k > 0.0) || run.curvatures.iter().all(|&k| k < 0.0));
        assert!(run.len() <= 30);
    }

    #[test]
    fn segments() {
        let s = Segment::new(C64::new(0.0, -0.1), C64::new(0.0, -0.05), 5).unwrap();
        assert_eq!(s.samples.len(), 5);
        assert!((s.samples[2] - C64::new(0.0, -0.075)).norm() < 1e-15);
        assert_eq!(Segment::new(C64::new(1.0, 0.0), C64::new(1.0, 0.0), 5), Err(SegmentError::Degenerate));
        assert_eq!(
            Segment::new(C64::new(-1.0, -1.0), C64::new(1.0, 1.0), 5),
            Err(SegmentError::ContainsOrigin)
        );
    }

    #[test]
    fn csv_layout() {
        let arc = Arc::from_points(circle(1.0, 0.0, 1.0, 4), 1.0);
        let csv = arc.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "re,im,curvature");
        assert_eq!(lines.len(), 5);
        let first: Vec<f64> = lines[1].split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(first[0], 1.0);
    }
}
