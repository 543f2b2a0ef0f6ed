//! Exact solver for two-player discounted-sum games on finite weighted
//! graphs, with regret-minimal and admissible strategy synthesis.
//!
//! A game is played on a directed graph whose vertices are split between Eve
//! and Adam. A play is an infinite walk; its payoff is the discounted sum of
//! edge weights with a rational discount factor strictly between 0 and 1.
//! Everything here is computed in exact rational arithmetic:
//!
//! * [`values::solve_values`] gives, per vertex, the antagonistic value (Eve
//!   maximises against a hostile Adam), the cooperative value (both players
//!   maximise), and the cooperative value restricted to worst-case optimal
//!   play, together with positional witnesses for each.
//! * [`regret::regret_of`] measures the regret of a switching strategy (play
//!   one positional strategy, then swap to a second once a per-vertex step
//!   threshold passes), and [`regret::min_regret`] synthesises a strategy
//!   with minimal regret.
//! * [`admissible::check_admissible`] decides whether a strategy is weakly
//!   dominated, [`admissible::admissibilize`] repairs it into an admissible
//!   finite-memory strategy, and [`admissible::weakly_dominates`] compares
//!   two finite-memory strategies outright.
//! * [`pumping`] manipulates finite histories symbolically: compressing a
//!   long history into a short prefix plus a pumped cycle of astronomical
//!   repetition count, evaluating such paths without unrolling them, and
//!   deciding whether a strategy admits a consistent history of a given
//!   (possibly astronomical) length.
//! * [`oracle`] holds brute-force re-implementations of the main results by
//!   outright enumeration, used to cross-check the solvers on small inputs.

pub mod admissible;
pub mod error;
pub mod game;
pub mod history;
pub mod oracle;
pub mod product;
pub mod pumping;
pub mod rational;
pub mod regret;
pub mod strategy;
pub mod values;

pub use error::Error;
pub use game::{Game, Owner, VertexId};
pub use history::{History, Lasso};
pub use rational::Rational;
pub use strategy::{FiniteMemoryStrategy, Positional, SwitchingStrategy, Threshold, Thresholds};
