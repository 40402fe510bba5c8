//! Sampled checks of the set inclusions that certify `Γ_r` and `Λ`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Arc, Segment};
use crate::complex::C64;
use crate::symbols::Symbol;

const PAR_MIN: usize = 4096;

/// Largest `|Φ|` over `points` and where it occurs.
fn worst(phi: &Symbol, points: &[C64]) -> Option<(C64, f64)> {
    let f = |z: &C64| (*z, phi.eval(*z).norm());
    let pick = |a: (C64, f64), b: (C64, f64)| if b.1 > a.1 { b } else { a };
    if points.len() >= PAR_MIN {
        // max-by with index tiebreak keeps the result order independent
        points
            .par_iter()
            .enumerate()
            .map(|(i, z)| (i, f(z)))
            .reduce_with(|a, b| {
                if b.1 .1 > a.1 .1 || (b.1 .1 == a.1 .1 && b.0 < a.0) {
                    b
                } else {
                    a
                }
            })
            .map(|(_, w)| w)
    } else {
        points.iter().map(f).reduce(pick)
    }
}

fn subsample(points: &[C64], m: usize) -> Vec<C64> {
    let n = points.len();
    if n <= m || m < 2 {
        return points.to_vec();
    }
    (0..m)
        .map(|j| points[((j as f64) * (n - 1) as f64 / (m - 1) as f64).round() as usize])
        .collect()
}

/// Lattice `t·((1−s)p_j + s·p_{m−1−j})` over `density` arc samples: nested
/// symmetric chords sweep the region between a convex arc and its end chord,
/// and scaling by `t ∈ (0, 1]` sweeps `conv(Γ ∪ {0})`. The samples lying on
/// `Γ` (`t = 1`, `s ∈ {0, 1}`) are included only with `include_arc`, and
/// `t = 0` only with `include_origin`.
pub fn hull_samples(points: &[C64], density: usize, include_arc: bool, include_origin: bool) -> Vec<C64> {
    let density = density.max(2);
    let p = subsample(points, density);
    let m = p.len();
    let mut out = Vec::with_capacity(m * (density + 1) * density / 2 + m);
    if include_origin {
        out.push(C64::new(0.0, 0.0));
    }
    for j in 0..m {
        let k = m - 1 - j;
        if j > k {
            break;
        }
        for si in 0..=density {
            let s = si as f64 / density as f64;
            let chord = p[j] * (1.0 - s) + p[k] * s;
            let on_arc = si == 0 || si == density || j == k;
            for ti in 1..=density {
                if ti == density && on_arc {
                    continue;
                }
                out.push(chord * (ti as f64 / density as f64));
            }
            if j == k {
                break;
            }
        }
    }
    if include_arc {
        out.extend_from_slice(&p);
    }
    out
}

/// Result of one sampled inclusion check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullReport {
    pub holds: bool,
    #[serde(with = "crate::complex::opt_pair")]
    pub witness: Option<C64>,
    /// `|Φ|` at the witness
    pub witness_value: f64,
    /// the sample list is not an ordered arc (a gap far above the typical spacing)
    pub malformed: bool,
    pub samples: usize,
}

fn gap_anomaly(points: &[C64]) -> Option<C64> {
    if points.len() < 4 {
        return None;
    }
    let mut gaps: Vec<(f64, usize)> = points.windows(2).enumerate().map(|(i, w)| ((w[1] - w[0]).norm(), i)).collect();
    let mut sorted: Vec<f64> = gaps.iter().map(|g| g.0).collect();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    gaps.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (g, i) = gaps[0];
    (g > 4.0 * median).then(|| 0.5 * (points[i] + points[i + 1]))
}

/// Sampled `conv(Γ ∪ {0}) ∖ Γ ⊂ {|Φ| < level}` on a `density`-per-dimension
/// lattice; the witness is the sample of largest `|Φ|`.
pub fn check_hull_condition(phi: &Symbol, gamma: &Arc, density: usize) -> HullReport {
    if let Some(at) = gap_anomaly(&gamma.points) {
        return HullReport {
            holds: false,
            witness: Some(at),
            witness_value: phi.eval(at).norm(),
            malformed: true,
            samples: 0,
        };
    }
    let pts = hull_samples(&gamma.points, density, false, false);
    match worst(phi, &pts) {
        Some((w, v)) => HullReport {
            holds: v < gamma.level,
            witness: Some(w),
            witness_value: v,
            malformed: false,
            samples: pts.len(),
        },
        None => HullReport { holds: true, witness: None, witness_value: 0.0, malformed: false, samples: 0 },
    }
}

/// Open triangle `conv{0, −εz₁, −εz₂}` (endpoints of `Γ`) inside `{|Φ| < 1}`,
/// sampled on a barycentric lattice.
pub fn check_relaxed_origin_condition(phi: &Symbol, gamma: &Arc, eps: f64, density: usize) -> HullReport {
    let (a, b) = (-eps * gamma.first(), -eps * gamma.last());
    let d = density.max(3);
    let mut pts = Vec::new();
    for i in 1..d {
        for j in 1..d - i {
            pts.push(a * (i as f64 / d as f64) + b * (j as f64 / d as f64));
        }
    }
    let (w, v) = worst(phi, &pts).unwrap_or((C64::new(0.0, 0.0), 0.0));
    HullReport { holds: v < 1.0, witness: Some(w), witness_value: v, malformed: false, samples: pts.len() }
}

/// One of the four inclusions with its sampled verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub name: String,
    pub holds: bool,
    /// empty index range, holds trivially
    pub vacuous: bool,
    #[serde(with = "crate::complex::opt_pair")]
    pub witness: Option<C64>,
    pub witness_value: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiReport {
    pub d: u32,
    pub m: u32,
    pub density: usize,
    pub conditions: Vec<ConditionReport>,
}

impl MinkowskiReport {
    pub fn all_hold(&self) -> bool {
        self.conditions.iter().all(|c| c.holds)
    }

    pub fn condition(&self, name: &str) -> Option<&ConditionReport> {
        self.conditions.iter().find(|c| c.name == name)
    }

    /// The first failing condition, if any.
    pub fn first_failure(&self) -> Option<&ConditionReport> {
        self.conditions.iter().find(|c| !c.holds)
    }
}

fn condition(name: &str, phi: &Symbol, pts: &[C64], bound: f64) -> ConditionReport {
    let (witness, value) = match worst(phi, pts) {
        Some((w, v)) => (Some(w), v),
        None => (None, 0.0),
    };
    ConditionReport {
        name: name.into(),
        holds: value < bound,
        vacuous: false,
        witness,
        witness_value: value,
        samples: pts.len(),
    }
}

fn vacuous(name: &str) -> ConditionReport {
    ConditionReport { name: name.into(), holds: true, vacuous: true, witness: None, witness_value: 0.0, samples: 0 }
}

/// Multiset sums of `count` elements of `pts`.
fn multiset_sums(pts: &[C64], count: usize) -> Vec<C64> {
    fn rec(pts: &[C64], from: usize, left: usize, acc: C64, out: &mut Vec<C64>) {
        if left == 0 {
            out.push(acc);
            return;
        }
        for i in from..pts.len() {
            rec(pts, i, left - 1, acc + pts[i], out);
        }
    }
    let mut out = Vec::new();
    rec(pts, 0, count, C64::new(0.0, 0.0), &mut out);
    out
}

/// Sampled verification of
/// (i) `Σ^d Λ ⊂ Φ⁻¹(𝔻)`,
/// (ii) `conv(Γ_r ∪ {0}) + Σ^i Λ ⊂ Φ⁻¹(𝔻)` for `1 ≤ i < d`,
/// (iii) `Σ^i (1/M)Γ_r ⊂ Φ⁻¹(𝔻)` for `1 ≤ i < M`,
/// (iv) `conv(Γ_r ∪ {0}) ∖ Γ_r ⊂ {|Φ| < r}`.
///
/// `Λ` is a segment, so `Σ^i Λ = iΛ` is sampled directly.
pub fn check_minkowski_conditions(
    phi: &Symbol,
    gamma_r: &Arc,
    lambda: &Segment,
    d: u32,
    m: u32,
    density: usize,
) -> MinkowskiReport {
    assert!(1 <= m && m <= d, "need 1 ≤ M ≤ d");
    let density = density.max(2);
    let lam = Segment::new(lambda.a, lambda.b, density).map(|s| s.samples).unwrap_or_else(|_| lambda.samples.clone());
    let mut conditions = Vec::with_capacity(4);

    let sum_d: Vec<C64> = lam.iter().map(|z| z * d as f64).collect();
    conditions.push(condition("i", phi, &sum_d, 1.0));

    if d > 1 {
        let hull = hull_samples(&gamma_r.points, density, true, true);
        let mut acc: Option<ConditionReport> = None;
        for i in 1..d {
            let pts: Vec<C64> = hull.iter().flat_map(|h| lam.iter().map(move |l| h + l * i as f64)).collect();
            let rep = condition("ii", phi, &pts, 1.0);
            acc = Some(match acc {
                Some(prev) if prev.witness_value >= rep.witness_value => ConditionReport { samples: prev.samples + rep.samples, ..prev },
                Some(prev) => ConditionReport { samples: prev.samples + rep.samples, ..rep },
                None => rep,
            });
        }
        conditions.push(acc.expect("d > 1"));
    } else {
        conditions.push(vacuous("ii"));
    }

    if m > 1 {
        let scaled: Vec<C64> = subsample(&gamma_r.points, density).iter().map(|z| z / m as f64).collect();
        let mut pts = Vec::new();
        for i in 1..m as usize {
            pts.extend(multiset_sums(&scaled, i));
        }
        conditions.push(condition("iii", phi, &pts, 1.0));
    } else {
        conditions.push(vacuous("iii"));
    }

    let hull = check_hull_condition(phi, gamma_r, density);
    conditions.push(ConditionReport {
        name: "iv".into(),
        holds: hull.holds,
        vacuous: false,
        witness: hull.witness,
        witness_value: hull.witness_value,
        samples: hull.samples,
    });

    MinkowskiReport { d, m, density, conditions }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn circle_arc(r: f64, from: f64, to: f64, n: usize) -> Arc {
        Arc::from_points((0..n).map(|j| C64::from_polar(r, from + (to - from) * j as f64 / (n - 1) as f64)).collect(), r)
    }

    /// Independent dense check of `conv(Γ ∪ {0}) ∖ Γ` through random convex
    /// combinations of arbitrary sample pairs.
    fn dense_oracle(phi: &Symbol, gamma: &Arc) -> f64 {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = gamma.len();
        let mut best = 0.0f64;
        for _ in 0..200_000 {
            let (p, q) = (gamma.points[rng.random_range(0..n)], gamma.points[rng.random_range(0..n)]);
            let s: f64 = rng.random_range(0.0..1.0);
            let t: f64 = rng.random_range(0.0..0.999);
            best = best.max(phi.eval((p * (1.0 - s) + q * s) * t).norm());
        }
        best
    }

    #[test]
    fn hull_of_circle_arc() {
        let id = Symbol::identity();
        let arc = circle_arc(1.0, PI / 3.0, 2.0 * PI / 3.0, 60);
        let rep = check_hull_condition(&id, &arc, 40);
        assert!(rep.holds);
        assert!(!rep.malformed);
        assert!(rep.witness_value < 1.0);
        assert!(dense_oracle(&id, &arc) < 1.0);
        assert!(rep.samples > 40 * 40 * 40 / 2 - 100);
    }

    #[test]
    fn glued_antipodal_arcs_rejected() {
        let id = Symbol::identity();
        let mut pts = circle_arc(1.0, 1.3, 1.8, 30).points;
        pts.extend(circle_arc(1.0, 1.3 + PI, 1.8 + PI, 30).points);
        let rep = check_hull_condition(&id, &Arc::from_points(pts, 1.0), 40);
        assert!(!rep.holds);
        assert!(rep.malformed);
    }

    #[test]
    fn cosine_arc_past_critical_point() {
        // |cos z| = 1 on y = asinh(sin x); the branch turns over at the critical point π
        let cos: Symbol = "cos".parse().unwrap();
        let pts: Vec<C64> = (0..80)
            .map(|j| {
                let x = 2.5 + 1.3 * j as f64 / 79.0;
                c(x, x.sin().asinh())
            })
            .collect();
        let arc = Arc::from_points(pts, 1.0);
        assert!(arc.max_residual(&cos) < 1e-12);
        let rep = check_hull_condition(&cos, &arc, 40);
        assert!(!rep.holds);
        assert!(rep.witness_value >= 1.0);
        assert!((cos.eval(rep.witness.unwrap()).norm() - rep.witness_value).abs() < 1e-12);
        assert!(dense_oracle(&cos, &arc) >= 1.0);
    }

    #[test]
    fn relaxed_origin() {
        let id = Symbol::identity();
        let arc = circle_arc(1.0, 0.5, 2.0, 20);
        assert!(check_relaxed_origin_condition(&id, &arc, 0.5, 30).holds);
        assert!(!check_relaxed_origin_condition(&id, &arc, 3.0, 30).holds);
        let cos: Symbol = "cos".parse().unwrap();
        let pts: Vec<C64> = (0..20)
            .map(|j| {
                let x = 0.2 + 0.4 * j as f64 / 19.0;
                c(x, x.sin().asinh())
            })
            .collect();
        let arc = Arc::from_points(pts, 1.0);
        assert!(check_relaxed_origin_condition(&cos, &arc, 0.1, 30).holds);
        assert!(!check_relaxed_origin_condition(&cos, &arc, 20.0, 30).holds);
    }

    #[test]
    fn minkowski_for_identity() {
        let id = Symbol::identity();
        let gamma = circle_arc(1.05, PI / 2.0 - 0.3, PI / 2.0 + 0.3, 41);
        let lam = Segment::new(c(0.0, -0.1), c(0.0, -0.075), 40).unwrap();
        let rep = check_minkowski_conditions(&id, &gamma, &lam, 2, 2, 40);
        assert!(rep.all_hold(), "{rep:?}");
        assert!((rep.condition("i").unwrap().witness_value - 0.2).abs() < 1e-12);
        assert!((rep.condition("iii").unwrap().witness_value - 0.525).abs() < 1e-9);

        let m1 = check_minkowski_conditions(&id, &gamma, &lam, 2, 1, 40);
        assert!(m1.condition("iii").unwrap().vacuous);

        let big = Segment::new(c(0.0, -0.6), c(0.0, -0.5), 40).unwrap();
        let rep = check_minkowski_conditions(&id, &gamma, &big, 2, 2, 40);
        let i = rep.condition("i").unwrap();
        assert!(!i.holds);
        assert!((i.witness.unwrap() - c(0.0, -1.2)).norm() < 1e-12);
    }

    #[test]
    fn full_segment_touches_boundary() {
        // with Λ reaching −0.05i, the arc midpoint 1.05i plus Λ lands on |z| = 1
        let id = Symbol::identity();
        let gamma = circle_arc(1.05, PI / 2.0 - 0.05, PI / 2.0 + 0.05, 21);
        let lam = Segment::new(c(0.0, -0.1), c(0.0, -0.05), 40).unwrap();
        let rep = check_minkowski_conditions(&id, &gamma, &lam, 2, 2, 40);
        let ii = rep.condition("ii").unwrap();
        assert!(!ii.holds);
        assert!(ii.witness_value >= 1.0);
        assert!((ii.witness.unwrap() - c(0.0, 1.0)).norm() < 0.06);
    }
}
