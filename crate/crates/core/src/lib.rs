//! Maximum degree of the `r`-th power of sparse random graphs `G(n, c/n)`.
//!
//! Three independent views of the same quantity:
//!
//! * [`graph`] and [`power`] sample graphs and measure `Δ(G^r)` by
//!   truncated BFS from every vertex;
//! * [`analytic`] evaluates the limiting joint law of the BFS layer sizes,
//!   the degree pmf of `G^r` and union-bound tail estimates;
//! * [`minimizer`] solves the layer-size minimization that governs the
//!   exponent of the dominant term.
//!
//! [`experiment`] runs seeded Monte Carlo campaigns tying them together.

pub mod analytic;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod minimizer;
pub mod power;
pub mod stream;

pub use error::{Error, Result};
