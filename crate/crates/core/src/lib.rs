//! A laboratory for the iterated prisoner's dilemma.
//!
//! Two families of strategies are built and cross-validated here:
//!
//! * **Memory-one (Markov) plans** — cooperation probabilities conditioned
//!   on the previous round's outcome. Two such plans induce a Markov chain
//!   on `{cc, cd, dc, dd}` whose terminal sets and stationary distributions
//!   determine the limiting average payoffs ([`markov`]).
//! * **Smale plans** — maps from the *running average payoff pair* to a
//!   cooperation probability. The geometry of separation lines and
//!   separation paths pins where the average can converge ([`smale`],
//!   [`path`]).
//!
//! On top of these sit a round-by-round match engine with uniform and
//! weighted averaging ([`sim`]), Nash-pair constructions for arbitrary
//! feasible target payoffs ([`folk`]), and replicator dynamics over rosters
//! of simple Smale plans ([`evo`]).
//!
//! All geometry is generic over [`scalar::Scalar`]: instantiate with
//! [`scalar::Rat`] for exact rational arithmetic (the default for uniform
//! weights and rational payoffs) or `f64` with a tolerance band for
//! on-line classification.

pub mod evo;
pub mod export;
pub mod folk;
pub mod gallery;
pub mod game;
pub mod geom;
pub mod markov;
pub mod path;
pub mod scalar;
pub mod sim;
pub mod smale;
pub mod weights;

pub use game::{Game, GameError, SepLine};
pub use geom::{Line, Move, Outcome, Point};
pub use scalar::{Rat, Scalar, FLOAT_TOL};
