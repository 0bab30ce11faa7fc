//! Exact counting of balanced edge numberings on trivalent graphs.
//!
//! The count of balanced `(p, N)`-edge numberings on any connected
//! trivalent graph of genus `g` equals the degree of the moduli of dormant
//! PGL2-opers of level `N` over the moduli of curves. From these counts the
//! crate derives the generic degree of the rank-2 Verschiebung, fits the
//! counts as quasi-polynomials in `p`, and checks both against closed forms.
//!
//! * [`graph`]: trivalent multigraphs, a catalog, exhaustive generation
//! * [`admissibility`]: the per-vertex triple condition
//! * [`enumeration`]: brute-force and frontier-DP counting
//! * [`quasipoly`]: Bernoulli numbers and exact quasi-polynomial fits
//! * [`formulas`]: trigonometric, ratio and closed-form degrees

pub mod admissibility;
pub mod enumeration;
pub mod error;
pub mod formulas;
pub mod graph;
pub mod quasipoly;

pub use admissibility::{LevelParams, Triple};
pub use enumeration::{count, count_brute, count_dp, CountReport, DpOptions, EliminationOrder, Method};
pub use error::{AdmissibilityError, CountError, FitError, FormulaError, GraphError};
pub use graph::{catalog, generate_trivalent, TrivalentGraph};
pub use quasipoly::{QuasiPolynomial, Rational};
