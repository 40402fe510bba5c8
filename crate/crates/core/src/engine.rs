//! The perturbation scheme that drives `Φ(D)^n(f^β)` to a target `B` while
//! every other `Φ(D)^n(f^α)` dies out, plus the approximation step for a
//! polynomial `P(f)` and the transport to real samples.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algdep::{Field, MPoly};
use crate::complex::{pair, C64};
use crate::expsum::{self, apply_operator, linear_combine, monomial_power, sup_distance, sup_norm, ExpSum, Grid, Term};
use crate::geometry::TheoremData;
use crate::indexcraft::{find_injective_weights, is_admissible, select_beta, IndexError, MultiIndex, MultiIndexSet, SelectedIndex, Weights};
use crate::symbols::Symbol;

/// Exponents of `B` and `Lᵢ` must lie this close to a certified sample.
pub const SNAP_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("target exponent {0} is not on the certified arc")]
    OffArc(C64),
    #[error("base exponent {0} is not on the certified segment")]
    OffSegment(C64),
    #[error("the target is the zero function")]
    ZeroTarget,
    #[error("expected {expected} base functions, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("geometry certified for (d, M) = ({geom_d}, {geom_m}) but the index set needs ({d}, {m})")]
    GeometryMismatch { geom_d: u32, geom_m: u32, d: u32, m: u32 },
    #[error("Φ vanishes at the target exponent {0}")]
    ZeroSymbolValue(C64),
    #[error("polynomial has a constant term or empty support")]
    NotAdmissible,
    #[error("schedule must be increasing and start at n ≥ 1")]
    BadSchedule,
    #[error("no n ≤ {n_max} reached distance < {eps} (best {best_distance} at n = {best_n})")]
    NotConverged { n_max: u32, eps: f64, best_distance: f64, best_n: u32 },
    #[error(transparent)]
    Index(#[from] IndexError),
}

fn snap(z: C64, samples: &[C64]) -> Option<C64> {
    samples
        .iter()
        .copied()
        .min_by(|a, b| (a - z).norm().total_cmp(&(b - z).norm()))
        .filter(|s| (s - z).norm() <= SNAP_TOL)
}

fn snapped(f: &ExpSum, samples: &[C64], err: fn(C64) -> EngineError) -> Result<ExpSum, EngineError> {
    let terms = f
        .terms()
        .iter()
        .map(|t| snap(t.lambda, samples).map(|lambda| Term { lambda, coeff: t.coeff }).ok_or(err(t.lambda)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ExpSum::from_terms(terms))
}

/// Inputs of the perturbation scheme: `Φ`, the index set with its weights
/// and `β`, certified geometry, the target `B` (exponents on `Γ_r`) and the
/// base tuple `L` (exponents on `Λ`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClaimConfig {
    pub phi: Symbol,
    pub a: MultiIndexSet,
    pub weights: Weights,
    pub selected: SelectedIndex,
    pub geometry: TheoremData,
    pub b: ExpSum,
    pub l: Vec<ExpSum>,
    pub r_disk: f64,
    pub grid: Grid,
}

impl ClaimConfig {
    /// Validates the configuration, snapping exponents of `b` to `Γ_r` samples
    /// and those of `l` to `Λ` samples.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        phi: Symbol,
        a: MultiIndexSet,
        weights: Weights,
        geometry: TheoremData,
        b: &ExpSum,
        l: &[ExpSum],
        r_disk: f64,
        grid: Grid,
    ) -> Result<Self, EngineError> {
        let selected = select_beta(&a, &weights)?;
        if (geometry.d, geometry.m) != (selected.d_a, selected.m_a) {
            return Err(EngineError::GeometryMismatch {
                geom_d: geometry.d,
                geom_m: geometry.m,
                d: selected.d_a,
                m: selected.m_a,
            });
        }
        if l.len() != a.dim() {
            return Err(EngineError::DimensionMismatch { expected: a.dim(), got: l.len() });
        }
        if b.is_zero() {
            return Err(EngineError::ZeroTarget);
        }
        let b = snapped(b, &geometry.gamma_r.points, EngineError::OffArc)?;
        let l = l
            .iter()
            .map(|li| snapped(li, &geometry.lambda.samples, EngineError::OffSegment))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ClaimConfig { phi, a, weights, selected, geometry, b, l, r_disk, grid })
    }

    /// `Σ_{s ∈ I_N} k_s β_s`.
    pub fn weight_exponent(&self) -> f64 {
        let k = self.weights.to_f64();
        self.selected.others().map(|s| k[s] * self.selected.beta[s] as f64).sum()
    }
}

/// Target `B` of `b_coeffs.len()` terms spread along `Γ_r` (the midpoint for a
/// single term) and base functions `Lᵢ` of two terms each on `Λ`.
pub fn demo_data(geometry: &TheoremData, n_vars: usize, b_coeffs: &[C64], l_coeff: C64) -> (ExpSum, Vec<ExpSum>) {
    let g = &geometry.gamma_r.points;
    let p = b_coeffs.len();
    let b = ExpSum::from_pairs(b_coeffs.iter().enumerate().map(|(j, &bj)| {
        let idx = if p == 1 { g.len() / 2 } else { j * (g.len() - 1) / (p - 1) };
        (bj, g[idx])
    }));
    let lam = &geometry.lambda.samples;
    let l = (0..n_vars)
        .map(|i| {
            let (j1, j2) = ((i * 7) % lam.len(), (i * 7 + lam.len() / 2) % lam.len());
            ExpSum::from_pairs([(l_coeff, lam[j1]), (l_coeff, lam[j2])])
        })
        .collect();
    (b, l)
}

/// The tuple `f` at step `n` together with the coefficients `c_j(n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub n: u32,
    #[serde(with = "crate::complex::pairs")]
    pub c: Vec<C64>,
    pub f: Vec<ExpSum>,
}

/// Principal `m`-th root of `b·n^κ/φⁿ`, computed in polar form so that large
/// `n` neither overflows nor loses the phase.
fn coefficient(b: C64, phi_gamma: C64, n: u32, kappa: f64, m: u32) -> C64 {
    let ln_mod = b.norm().ln() + kappa * (n as f64).ln() - n as f64 * phi_gamma.norm().ln();
    let mut arg = (b.arg() - n as f64 * phi_gamma.arg()).rem_euclid(2.0 * std::f64::consts::PI);
    if arg > std::f64::consts::PI {
        arg -= 2.0 * std::f64::consts::PI;
    }
    C64::from_polar((ln_mod / m as f64).exp(), arg / m as f64)
}

/// `f_{i_A} = L_{i_A} + Σⱼ cⱼ e^{(γⱼ/M_A)z}` with `cⱼ^{M_A} Φ(γⱼ)ⁿ = bⱼ n^{Σ k_s β_s}`,
/// and `fᵢ = Lᵢ + n^{−kᵢ}` for the other coordinates.
pub fn build_perturbation(cfg: &ClaimConfig, n: u32) -> Result<Perturbation, EngineError> {
    let n = n.max(1);
    let m = cfg.selected.m_a;
    let kappa = cfg.weight_exponent();
    let mut c = Vec::with_capacity(cfg.b.len());
    for t in cfg.b.terms() {
        let phi_gamma = cfg.phi.eval(t.lambda);
        if phi_gamma.norm() == 0.0 {
            return Err(EngineError::ZeroSymbolValue(t.lambda));
        }
        c.push(coefficient(t.coeff, phi_gamma, n, kappa, m));
    }
    let r_n = ExpSum::from_pairs(cfg.b.terms().iter().zip(&c).map(|(t, &cj)| (cj, t.lambda / m as f64)));
    let k = cfg.weights.to_f64();
    let f = (0..cfg.a.dim())
        .map(|i| {
            if i == cfg.selected.i_a {
                cfg.l[i].add(&r_n)
            } else {
                cfg.l[i].add(&ExpSum::constant(C64::new((n as f64).powf(-k[i]), 0.0)))
            }
        })
        .collect();
    Ok(Perturbation { n, c, f })
}

/// `Φ(D)ⁿ(f^α)`.
pub fn orbit_term(phi: &Symbol, f: &[ExpSum], alpha: &[u32], n: u32) -> ExpSum {
    apply_operator(phi, &monomial_power(f, alpha), n)
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

fn multinomial(total: u32, parts: impl IntoIterator<Item = u32>) -> f64 {
    parts.into_iter().fold(factorial(total), |acc, p| acc / factorial(p))
}

/// A single term `X_α(u, v, ℓ, n)` of the expansion of `Φ(D)ⁿ(f^α)` and its
/// exponent `λ·u + γ·v/M_A`. `u[i]` indexes the terms of `Lᵢ`, `v` those of
/// `B`, and `ell[i]` (ignored at `i_A`) counts factors `n^{−kᵢ}`.
pub fn x_alpha(
    cfg: &ClaimConfig,
    pert: &Perturbation,
    alpha: &[u32],
    u: &[Vec<u32>],
    v: &[u32],
    ell: &[u32],
) -> (C64, C64) {
    let (ia, m) = (cfg.selected.i_a, cfg.selected.m_a);
    let k = cfg.weights.to_f64();
    let mut coeff = C64::new(1.0, 0.0);
    let mut exponent = C64::new(0.0, 0.0);
    let mut damping = 0.0;
    for (i, ui) in u.iter().enumerate() {
        let mut parts: Vec<u32> = ui.clone();
        if i == ia {
            parts.extend_from_slice(v);
        } else {
            parts.push(ell[i]);
            damping += k[i] * ell[i] as f64;
        }
        coeff *= multinomial(alpha[i], parts);
        for (t, &e) in cfg.l[i].terms().iter().zip(ui) {
            coeff *= t.coeff.powu(e);
            exponent += t.lambda * e as f64;
        }
    }
    for ((t, &cj), &vj) in cfg.b.terms().iter().zip(&pert.c).zip(v) {
        coeff *= cj.powu(vj);
        exponent += t.lambda * (vj as f64 / m as f64);
    }
    let value = coeff * cfg.phi.eval(exponent).powu(pert.n) / (pert.n as f64).powf(damping);
    (exponent, value)
}

/// `X_α(0, M_A eⱼ, ℓ, n)` with `ℓᵢ = αᵢ` off `i_A`: equal to `bⱼ` for `α = β`
/// and to `bⱼ n^{Σ k_s(β_s − α_s)}` for the other `α` with `α_{i_A} = M_A`.
pub fn x_extreme(cfg: &ClaimConfig, pert: &Perturbation, alpha: &[u32], j: usize) -> Option<C64> {
    let (ia, m) = (cfg.selected.i_a, cfg.selected.m_a);
    if alpha[ia] != m {
        return None;
    }
    let u: Vec<Vec<u32>> = cfg.l.iter().map(|li| vec![0; li.len()]).collect();
    let mut v = vec![0; cfg.b.len()];
    v[j] = m;
    Some(x_alpha(cfg, pert, alpha, &u, &v, alpha).1)
}

/// One `(α, n)` row of an orbit report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitRow {
    pub alpha: MultiIndex,
    pub n: u32,
    pub is_beta: bool,
    /// sampled sup distance to `B` for `β`, to `0` otherwise
    pub distance: f64,
    /// `X_α(0, M_A eⱼ, α, n)` at the largest `|bⱼ|` when `α_{i_A} = M_A`,
    /// else the largest coefficient of `Φ(D)ⁿ(f^α)`
    #[serde(with = "pair")]
    pub dominant_term: C64,
    /// `X_α(0, M_A eⱼ, α, n)` for every `j`, when defined
    #[serde(with = "crate::complex::pairs")]
    pub extreme_terms: Vec<C64>,
    pub max_perturbation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub beta: MultiIndex,
    pub schedule: Vec<u32>,
    pub r_disk: f64,
    pub grid: Grid,
    pub rows: Vec<OrbitRow>,
}

impl OrbitReport {
    pub fn row(&self, alpha: &[u32], n: u32) -> Option<&OrbitRow> {
        self.rows.iter().find(|r| r.alpha == alpha && r.n == n)
    }

    /// Columns `alpha,n,distance,dominant_term_re,dominant_term_im`; the
    /// multi-index is joined with `;`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("alpha,n,distance,dominant_term_re,dominant_term_im\n");
        for r in &self.rows {
            let alpha: Vec<String> = r.alpha.iter().map(u32::to_string).collect();
            let _ = writeln!(
                s,
                "{},{},{:.16e},{:.16e},{:.16e}",
                alpha.join(";"),
                r.n,
                r.distance,
                r.dominant_term.re,
                r.dominant_term.im
            );
        }
        s
    }
}

fn check_schedule(schedule: &[u32]) -> Result<(), EngineError> {
    if schedule.is_empty() || schedule[0] == 0 || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EngineError::BadSchedule);
    }
    Ok(())
}

fn orbit_row(cfg: &ClaimConfig, pert: &Perturbation, alpha: &MultiIndex) -> OrbitRow {
    let is_beta = *alpha == cfg.selected.beta;
    let term = orbit_term(&cfg.phi, &pert.f, alpha, pert.n);
    let distance = if is_beta {
        sup_distance(&term, &cfg.b, cfg.r_disk, cfg.grid)
    } else {
        sup_norm(&term, cfg.r_disk, cfg.grid)
    };
    let extreme_terms: Vec<C64> = (0..cfg.b.len()).filter_map(|j| x_extreme(cfg, pert, alpha, j)).collect();
    let dominant_term = if extreme_terms.is_empty() {
        term.terms().iter().map(|t| t.coeff).max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or_default()
    } else {
        let j = (0..cfg.b.len())
            .rev()
            .max_by(|&a, &b| cfg.b.terms()[a].coeff.norm().total_cmp(&cfg.b.terms()[b].coeff.norm()))
            .unwrap_or(0);
        extreme_terms[j]
    };
    OrbitRow {
        alpha: alpha.clone(),
        n: pert.n,
        is_beta,
        distance,
        dominant_term,
        extreme_terms,
        max_perturbation: pert.c.iter().map(|c| c.norm()).fold(0.0, f64::max),
    }
}

/// Tabulates the distances of `Φ(D)ⁿ(f(n)^α)` to their limits for every
/// `α ∈ A` and `n` in the schedule. Rows are computed in parallel and
/// reported in `(n, α)` order.
pub fn verify_claim(cfg: &ClaimConfig, schedule: &[u32]) -> Result<OrbitReport, EngineError> {
    check_schedule(schedule)?;
    let perts = schedule.par_iter().map(|&n| build_perturbation(cfg, n)).collect::<Result<Vec<_>, _>>()?;
    let jobs: Vec<(&Perturbation, &MultiIndex)> =
        perts.iter().flat_map(|p| cfg.a.elems().iter().map(move |a| (p, a))).collect();
    let rows = jobs.par_iter().map(|(p, a)| orbit_row(cfg, p, a)).collect();
    Ok(OrbitReport {
        beta: cfg.selected.beta.clone(),
        schedule: schedule.to_vec(),
        r_disk: cfg.r_disk,
        grid: cfg.grid,
        rows,
    })
}

/// Parameters of [`hypercyclic_step`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepParams {
    pub eps: f64,
    pub r_disk: f64,
    pub n_max: u32,
    pub grid: Grid,
    /// seed for the weight search
    pub seed: u64,
}

impl Default for StepParams {
    fn default() -> Self {
        StepParams { eps: 0.1, r_disk: 1.0, n_max: 512, grid: Grid::default(), seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepResult {
    pub f: Vec<ExpSum>,
    pub q: u32,
    pub distance: f64,
    pub config: ClaimConfig,
    /// `(n, distance)` for every step tried
    pub history: Vec<(u32, f64)>,
    pub report: OrbitReport,
}

/// Doubling schedule `1, 2, 4, …` capped by `n_max`.
pub fn doubling_schedule(n_max: u32) -> Vec<u32> {
    std::iter::successors(Some(1u32), |&n| n.checked_mul(2)).take_while(|&n| n <= n_max).collect()
}

/// Finds `f` near the base tuple `l` and `q ≤ n_max` with
/// `Φ(D)^q P(f)` within `eps` of `g` on `|z| ≤ r_disk`, by running the
/// perturbation scheme with target `B = g/c_β`.
pub fn hypercyclic_step<K: Field>(
    p: &MPoly<K>,
    g: &ExpSum,
    l: &[ExpSum],
    geometry: &TheoremData,
    params: &StepParams,
) -> Result<StepResult, EngineError> {
    let support = p.support();
    if !is_admissible(&support) || p.has_constant_term() {
        return Err(EngineError::NotAdmissible);
    }
    if g.is_zero() {
        return Err(EngineError::ZeroTarget);
    }
    let a = MultiIndexSet::new(p.nvars(), support)?;
    let weights = find_injective_weights(&a, params.seed)?;
    let selected = select_beta(&a, &weights)?;
    let c_beta = p.coeff(&selected.beta).to_c64();
    let b = g.scale(c_beta.inv());
    let phi = geometry.phi.clone();
    let cfg = ClaimConfig::new(phi.clone(), a, weights, geometry.clone(), &b, l, params.r_disk, params.grid)?;
    let g = cfg.b.scale(c_beta);

    let mut history = Vec::new();
    let mut best = (f64::INFINITY, 0);
    for n in doubling_schedule(params.n_max) {
        let pert = build_perturbation(&cfg, n)?;
        let image = apply_operator(&phi, &expsum::apply_polynomial(p, &pert.f, true).expect("checked above"), n);
        let distance = sup_distance(&image, &g, params.r_disk, params.grid);
        history.push((n, distance));
        if distance < best.0 {
            best = (distance, n);
        }
        if distance < params.eps {
            let schedule: Vec<u32> = history.iter().map(|h| h.0).collect();
            let report = verify_claim(&cfg, &schedule)?;
            return Ok(StepResult { f: pert.f, q: n, distance, config: cfg, history, report });
        }
    }
    Err(EngineError::NotConverged { n_max: params.n_max, eps: params.eps, best_distance: best.0, best_n: best.1 })
}

/// `x ↦ f(x)` on real samples.
pub fn restrict_to_real(f: &ExpSum, xs: &[f64]) -> Vec<C64> {
    xs.iter().map(|&x| f.eval(C64::new(x, 0.0))).collect()
}

/// Restriction of a translation orbit `τ_aⁿ P(f)` to real samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranslationReport {
    #[serde(with = "pair")]
    pub a: C64,
    pub n: u32,
    pub xs: Vec<f64>,
    pub image: ExpSum,
    #[serde(with = "crate::complex::pairs")]
    pub restricted: Vec<C64>,
    /// `restricted` equals pointwise evaluation at every sample
    pub restriction_exact: bool,
    /// largest `|P(f)(x + na) − restricted(x)|`, relative to `1 + |P(f)(x + na)|`
    pub shift_mismatch: f64,
    /// largest coefficient gap between `τ_aⁿ P(f)` and `P(τ_aⁿ f)`
    pub multiplicative_gap: f64,
}

fn coefficient_gap(x: &ExpSum, y: &ExpSum) -> f64 {
    let diff = x.sub(y);
    let scale = x.terms().iter().chain(y.terms()).map(|t| t.coeff.norm()).fold(1.0, f64::max);
    diff.terms().iter().map(|t| t.coeff.norm()).fold(0.0, f64::max) / scale
}

/// Applies `Φ(D)ⁿ = e^{naD}` (`Φ = exp:a`) to `P(f)` and restricts the result to
/// the real samples `xs`, checking it against pointwise evaluation, against
/// the shifted function `P(f)(x + na)`, and against `P(e^{naD} f)`.
pub fn translation_transport<K: Field>(
    a: C64,
    p: &MPoly<K>,
    f: &[ExpSum],
    n: u32,
    xs: &[f64],
) -> Result<TranslationReport, EngineError> {
    let phi = Symbol::Exp { a };
    let pf = expsum::apply_polynomial(p, f, false).map_err(|_| EngineError::DimensionMismatch {
        expected: p.nvars(),
        got: f.len(),
    })?;
    let image = apply_operator(&phi, &pf, n);
    let restricted = restrict_to_real(&image, xs);
    let restriction_exact = xs.iter().zip(&restricted).all(|(&x, r)| expsum::eval_point(&image, C64::new(x, 0.0)) == *r);
    let shift = a * n as f64;
    let shift_mismatch = xs
        .iter()
        .zip(&restricted)
        .map(|(&x, r)| {
            let direct = pf.eval(C64::new(x, 0.0) + shift);
            (direct - r).norm() / (1.0 + direct.norm())
        })
        .fold(0.0, f64::max);
    let moved: Vec<ExpSum> = f.iter().map(|fi| apply_operator(&phi, fi, n)).collect();
    let composed = expsum::apply_polynomial(p, &moved, false).expect("same arity");
    Ok(TranslationReport {
        a,
        n,
        xs: xs.to_vec(),
        multiplicative_gap: coefficient_gap(&image, &composed),
        image,
        restricted,
        restriction_exact,
        shift_mismatch,
    })
}

/// `Σ_α c_α Φ(D)ⁿ(f^α)`, the termwise form of `Φ(D)ⁿ P(f)`.
pub fn orbit_by_terms<K: Field>(phi: &Symbol, p: &MPoly<K>, f: &[ExpSum], n: u32) -> ExpSum {
    let parts: Vec<(C64, ExpSum)> = p.terms().map(|(alpha, c)| (c.to_c64(), orbit_term(phi, f, alpha, n))).collect();
    let refs: Vec<(C64, &ExpSum)> = parts.iter().map(|(c, g)| (*c, g)).collect();
    linear_combine(&refs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algdep::parse_poly;
    use crate::geometry::{build_theorem_data, SearchParams};
    use std::sync::OnceLock;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn identity_geometry() -> &'static TheoremData {
        static G: OnceLock<TheoremData> = OnceLock::new();
        G.get_or_init(|| build_theorem_data(&Symbol::identity(), 2, 2, &SearchParams::default()).unwrap())
    }

    fn identity_geometry_11() -> &'static TheoremData {
        static G: OnceLock<TheoremData> = OnceLock::new();
        G.get_or_init(|| build_theorem_data(&Symbol::identity(), 1, 1, &SearchParams::default()).unwrap())
    }

    fn maclane_config(b_coeffs: &[C64]) -> ClaimConfig {
        let a = MultiIndexSet::from_vec(vec![vec![2, 0], vec![0, 1]]).unwrap();
        let k = find_injective_weights(&a, 7).unwrap();
        let geom = identity_geometry().clone();
        let (b, l) = demo_data(&geom, 2, b_coeffs, c(0.5, 0.0));
        ClaimConfig::new(Symbol::identity(), a, k, geom, &b, &l, 1.0, Grid::default()).unwrap()
    }

    /// All `v ∈ ℕ₀^parts` with `|v| = total`.
    fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
        if parts == 0 {
            return if total == 0 { vec![vec![]] } else { vec![] };
        }
        (0..=total)
            .flat_map(|first| {
                compositions(total - first, parts - 1).into_iter().map(move |mut rest| {
                    rest.insert(0, first);
                    rest
                })
            })
            .collect()
    }

    /// `(u_i, v_i, ℓ_i)` choices for one coordinate.
    type Split = (Vec<u32>, Vec<u32>, u32);

    /// Sum of every `X_α(u, v, ℓ, n)` over the index set, grouped by exponent.
    fn expansion_oracle(cfg: &ClaimConfig, pert: &Perturbation, alpha: &[u32]) -> ExpSum {
        let ia = cfg.selected.i_a;
        let mut per_coord: Vec<Vec<Split>> = Vec::new();
        for (i, li) in cfg.l.iter().enumerate() {
            let mut opts = Vec::new();
            for extra in 0..=alpha[i] {
                let rest = alpha[i] - extra;
                let extra_slots = if i == ia { cfg.b.len() } else { 1 };
                for u in compositions(rest, li.len()) {
                    for w in compositions(extra, extra_slots) {
                        if i == ia {
                            opts.push((u.clone(), w, 0));
                        } else {
                            opts.push((u.clone(), vec![], w[0]));
                        }
                    }
                }
            }
            per_coord.push(opts);
        }
        let mut pairs = Vec::new();
        let mut idx = vec![0usize; per_coord.len()];
        loop {
            let u: Vec<Vec<u32>> = idx.iter().zip(&per_coord).map(|(&k, o)| o[k].0.clone()).collect();
            let v = per_coord[ia][idx[ia]].1.clone();
            let ell: Vec<u32> = idx.iter().zip(&per_coord).map(|(&k, o)| o[k].2).collect();
            let (e, x) = x_alpha(cfg, pert, alpha, &u, &v, &ell);
            pairs.push((x, e));
            let mut pos = 0;
            loop {
                if pos == idx.len() {
                    return ExpSum::from_pairs(pairs);
                }
                idx[pos] += 1;
                if idx[pos] < per_coord[pos].len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }

    fn assert_same(x: &ExpSum, y: &ExpSum, tol: f64) {
        assert!(coefficient_gap(x, y) < tol, "{x:?}\nvs\n{y:?}");
    }

    #[test]
    fn coefficient_equation() {
        // M = 1: c = b n^κ / φⁿ
        let cj = coefficient(c(1.0, 2.0), c(1.5, 0.5), 5, 0.75, 1);
        let expect = c(1.0, 2.0) * 5f64.powf(0.75) / c(1.5, 0.5).powu(5);
        assert!((cj - expect).norm() < 1e-13 * expect.norm());
        // M = 2, φ = 2, n = 4, b = 1: principal root of 1/16
        assert!((coefficient(c(1.0, 0.0), c(2.0, 0.0), 4, 0.0, 2) - c(0.25, 0.0)).norm() < 1e-15);
        // principal branch: argument in (−π/M, π/M]
        let w = coefficient(c(-1.0, 0.0), c(1.0, 0.0), 1, 0.0, 2);
        assert!((w - c(0.0, 1.0)).norm() < 1e-15);
        for n in [1, 7, 40, 300] {
            let cj = coefficient(c(0.3, -0.7), c(-1.1, 0.6), n, 1.3, 3);
            let lhs = cj.powu(3) * c(-1.1, 0.6).powu(n);
            let rhs = c(0.3, -0.7) * (n as f64).powf(1.3);
            assert!((lhs - rhs).norm() < 1e-9 * rhs.norm(), "n = {n}");
            assert!(cj.arg() > -std::f64::consts::PI / 3.0 && cj.arg() <= std::f64::consts::PI / 3.0);
        }
    }

    #[test]
    fn perturbation_shape() {
        let cfg = maclane_config(&[c(1.0, 0.0)]);
        assert_eq!(cfg.selected.beta, vec![2, 0]);
        let pert = build_perturbation(&cfg, 16).unwrap();
        assert_eq!(pert.f.len(), 2);
        // the second coordinate gained the constant n^{−k₂}
        let k2 = cfg.weights.to_f64()[1];
        assert!((pert.f[1].coeff_at(c(0.0, 0.0)) - c(16f64.powf(-k2), 0.0)).norm() < 1e-15);
        // the first carries R_n at γ/2
        let gamma = cfg.b.terms()[0].lambda;
        assert_eq!(pert.f[0].coeff_at(gamma / 2.0), pert.c[0]);
        let later = build_perturbation(&cfg, 64).unwrap();
        assert!(later.c[0].norm() < pert.c[0].norm());
    }

    #[test]
    fn expansion_matches_orbit_term() {
        let cfg = maclane_config(&[c(1.0, 0.0), c(0.0, -0.5)]);
        for n in [3, 8] {
            let pert = build_perturbation(&cfg, n).unwrap();
            for alpha in cfg.a.elems() {
                let direct = orbit_term(&cfg.phi, &pert.f, alpha, n);
                let oracle = expansion_oracle(&cfg, &pert, alpha);
                assert_same(&direct, &oracle, 1e-12);
            }
        }
    }

    #[test]
    fn beta_extreme_term_is_target() {
        let cfg = maclane_config(&[c(1.0, 0.0), c(0.25, 0.5)]);
        let report = verify_claim(&cfg, &[4, 8, 16, 32]).unwrap();
        for row in report.rows.iter().filter(|r| r.is_beta) {
            for (x, t) in row.extreme_terms.iter().zip(cfg.b.terms()) {
                assert!((x - t.coeff).norm() < 1e-12 * t.coeff.norm(), "n = {}", row.n);
            }
        }
        // the non-β index here has α_{i_A} = 0 < M_A
        assert!(report.rows.iter().filter(|r| !r.is_beta).all(|r| r.extreme_terms.is_empty()));
        assert_eq!(report.rows.len(), 8);
        assert_eq!(report.rows[0].n, 4);
    }

    #[test]
    fn maclane_convergence() {
        let cfg = maclane_config(&[c(1.0, 0.0)]);
        let report = verify_claim(&cfg, &[8, 16, 32, 64]).unwrap();
        let beta = cfg.selected.beta.clone();
        assert!(report.row(&beta, 64).unwrap().distance < 0.1 * report.row(&beta, 8).unwrap().distance);
        let other = vec![0, 1];
        assert!(report.row(&other, 64).unwrap().distance < 0.1 * report.row(&other, 8).unwrap().distance);
        let csv = report.to_csv();
        assert!(csv.starts_with("alpha,n,distance,dominant_term_re,dominant_term_im\n"));
        assert!(csv.contains("\n2;0,8,"));
    }

    #[test]
    fn singleton_set_has_only_beta_rows() {
        let geom = identity_geometry().clone();
        let a = MultiIndexSet::from_vec(vec![vec![1, 1]]).unwrap();
        let k = find_injective_weights(&a, 1).unwrap();
        let (b, l) = demo_data(&geom, 2, &[c(1.0, 0.0)], c(0.5, 0.0));
        // (1,1) has M_A = 1 and d_A = 2; the (2, 2) geometry does not match
        assert!(matches!(
            ClaimConfig::new(Symbol::identity(), a.clone(), k.clone(), geom, &b, &l, 1.0, Grid::default()),
            Err(EngineError::GeometryMismatch { .. })
        ));
        let geom21 = build_theorem_data(&Symbol::identity(), 2, 1, &SearchParams::default()).unwrap();
        let (b, l) = demo_data(&geom21, 2, &[c(1.0, 0.0)], c(0.5, 0.0));
        let cfg = ClaimConfig::new(Symbol::identity(), a, k, geom21, &b, &l, 1.0, Grid::default()).unwrap();
        let report = verify_claim(&cfg, &[2, 4]).unwrap();
        assert_eq!(report.rows.len(), 2);
        assert!(report.rows.iter().all(|r| r.is_beta));
        // M_A = 1: no root is taken, the extreme term is exactly b
        for r in &report.rows {
            assert!((r.dominant_term - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn perturbation_decays_geometrically() {
        // M_A = 1: |c(n)| = |b| n^κ r^{−n}; the slope of ln|c| − κ ln n is −ln r
        let geom = identity_geometry_11().clone();
        let a = MultiIndexSet::from_vec(vec![vec![1]]).unwrap();
        let k = find_injective_weights(&a, 0).unwrap();
        let (b, l) = demo_data(&geom, 1, &[c(0.7, 0.2)], c(0.5, 0.0));
        let cfg = ClaimConfig::new(Symbol::identity(), a, k, geom.clone(), &b, &l, 1.0, Grid::default()).unwrap();
        let kappa = cfg.weight_exponent();
        let ns = [8u32, 16, 32, 64, 128];
        let ys: Vec<f64> = ns
            .iter()
            .map(|&n| build_perturbation(&cfg, n).unwrap().c[0].norm().ln() - kappa * (n as f64).ln())
            .collect();
        let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
        let (mx, my) = (xs.iter().sum::<f64>() / 5.0, ys.iter().sum::<f64>() / 5.0);
        let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
            / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
        assert!((slope + geom.r.ln()).abs() < 0.05 * geom.r.ln(), "slope {slope}, r {}", geom.r);
    }

    #[test]
    fn commutation_with_polynomial() {
        let cfg = maclane_config(&[c(1.0, 0.0)]);
        let p = parse_poly("3*t1^2 - 2*t2", Some(2)).unwrap();
        let pert = build_perturbation(&cfg, 5).unwrap();
        let whole = apply_operator(&cfg.phi, &expsum::apply_polynomial(&p, &pert.f, true).unwrap(), 5);
        assert_same(&whole, &orbit_by_terms(&cfg.phi, &p, &pert.f, 5), 1e-13);
    }

    #[test]
    fn snapping_and_validation() {
        let geom = identity_geometry().clone();
        let a = MultiIndexSet::from_vec(vec![vec![2, 0], vec![0, 1]]).unwrap();
        let k = find_injective_weights(&a, 7).unwrap();
        let (b, l) = demo_data(&geom, 2, &[c(1.0, 0.0)], c(0.5, 0.0));
        let gamma = b.terms()[0].lambda;
        let near = ExpSum::exp(c(1.0, 0.0), gamma + 1e-8);
        let cfg = ClaimConfig::new(Symbol::identity(), a.clone(), k.clone(), geom.clone(), &near, &l, 1.0, Grid::default())
            .unwrap();
        assert_eq!(cfg.b.terms()[0].lambda, gamma);
        let off = ExpSum::exp(c(1.0, 0.0), gamma * 0.5);
        assert!(matches!(
            ClaimConfig::new(Symbol::identity(), a.clone(), k.clone(), geom.clone(), &off, &l, 1.0, Grid::default()),
            Err(EngineError::OffArc(_))
        ));
        let bad_l = vec![l[0].clone(), ExpSum::exp(c(1.0, 0.0), c(0.3, 0.3))];
        assert!(matches!(
            ClaimConfig::new(Symbol::identity(), a.clone(), k.clone(), geom.clone(), &b, &bad_l, 1.0, Grid::default()),
            Err(EngineError::OffSegment(_))
        ));
        assert_eq!(
            ClaimConfig::new(Symbol::identity(), a, k, geom, &ExpSum::zero(), &l, 1.0, Grid::default()).unwrap_err(),
            EngineError::ZeroTarget
        );
        assert_eq!(verify_claim(&cfg, &[8, 4]).unwrap_err(), EngineError::BadSchedule);
    }

    #[test]
    fn step_for_square() {
        let geom = identity_geometry().clone();
        let p = parse_poly("t1^2", Some(1)).unwrap();
        let (g, l) = demo_data(&geom, 1, &[c(1.0, 0.0)], c(0.5, 0.0));
        let res = hypercyclic_step(&p, &g, &l, &geom, &StepParams::default()).unwrap();
        assert!(res.distance < 0.1);
        let again = apply_operator(&geom.phi, &expsum::apply_polynomial(&p, &res.f, true).unwrap(), res.q);
        assert!(sup_distance(&again, &g, 1.0, Grid::default().doubled()) < 0.1);
        // the history is a doubling schedule ending at q
        assert_eq!(res.history.last().unwrap().0, res.q);
        assert!(res.history.windows(2).all(|w| w[1].0 == 2 * w[0].0));

        let constant = parse_poly("1 + t1", Some(1)).unwrap();
        assert_eq!(hypercyclic_step(&constant, &g, &l, &geom, &StepParams::default()).unwrap_err(), EngineError::NotAdmissible);
        assert_eq!(
            hypercyclic_step(&p, &ExpSum::zero(), &l, &geom, &StepParams::default()).unwrap_err(),
            EngineError::ZeroTarget
        );
        let short = StepParams { n_max: 1, eps: 1e-9, ..StepParams::default() };
        assert!(matches!(hypercyclic_step(&p, &g, &l, &geom, &short), Err(EngineError::NotConverged { best_n: 1, .. })));
    }

    #[test]
    fn linear_step() {
        let geom = identity_geometry_11().clone();
        let p = parse_poly("t1", Some(1)).unwrap();
        let (g, l) = demo_data(&geom, 1, &[c(0.5, 0.5)], c(0.5, 0.0));
        let res = hypercyclic_step(&p, &g, &l, &geom, &StepParams::default()).unwrap();
        assert!(res.distance < 0.1);
    }

    #[test]
    fn restriction() {
        assert_eq!(restrict_to_real(&ExpSum::exp(c(1.0, 0.0), c(0.0, 1.0)), &[0.0]), vec![c(1.0, 0.0)]);
        let e = restrict_to_real(&ExpSum::exp(c(1.0, 0.0), c(1.0, 0.0)), &[1.0])[0];
        assert!((e - c(std::f64::consts::E, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn translation() {
        let p = parse_poly("t1^2 + t1*t2", Some(2)).unwrap();
        let f = vec![
            ExpSum::from_pairs([(c(1.0, 0.0), c(0.5, 0.0)), (c(0.0, 1.0), c(0.0, -1.0))]),
            ExpSum::exp(c(0.3, 0.0), c(-0.25, 0.5)),
        ];
        let xs: Vec<f64> = (0..=20).map(|j| -1.0 + 0.1 * j as f64).collect();
        let rep = translation_transport(c(1.0, 0.0), &p, &f, 3, &xs).unwrap();
        assert!(rep.restriction_exact);
        assert!(rep.shift_mismatch < 1e-12, "{}", rep.shift_mismatch);
        assert!(rep.multiplicative_gap < 1e-12);
    }
}
