//! Executable constructions behind hypercyclic algebras for convolution
//! operators `Φ(D)` on the space of entire functions.
//!
//! Every function handled here is a finite exponential sum
//! `Σ aⱼ e^{λⱼ z}`, on which `Φ(D)` acts diagonally:
//! `Φ(D) e^{λz} = Φ(λ) e^{λz}`. On top of that calculus the crate provides
//!
//! * [`symbols`]: the entire functions `Φ` that parameterize the operators,
//! * [`expsum`]: products, powers, operator iterates and sampled distances,
//! * [`geometry`]: level-curve tracing and the sampled set-inclusion checks
//!   that certify the arcs `Γ_r` and segments `Λ` used by the construction,
//! * [`indexcraft`]: injective weights and the distinguished multi-index `β`,
//! * [`algdep`]: exact polynomial relations and bounded-degree dependence,
//! * [`engine`]: the perturbation scheme, orbit diagnostics and the
//!   approximation step for arbitrary polynomials `P(f)`.

pub mod algdep;
pub mod complex;
pub mod engine;
pub mod expsum;
pub mod geometry;
pub mod indexcraft;
pub mod symbols;

pub use algdep::{GaussRat, MPoly};
pub use complex::C64;
pub use engine::{ClaimConfig, OrbitReport};
pub use expsum::{ExpSum, Grid, Term};
pub use geometry::{Arc, Segment, TheoremData};
pub use indexcraft::{MultiIndexSet, SelectedIndex, Weights};
pub use symbols::Symbol;
