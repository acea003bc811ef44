//! Lelong numbers and complex singularity exponents of structured
//! plurisubharmonic functions, computed two ways: exact convex-geometric rules
//! and independent numeric estimators.

pub mod error;
pub mod estimate;
pub mod estimators;
pub mod eval;
pub mod expr;
pub mod geometry;
pub mod json;
pub mod ops;
pub mod poly;
pub mod rational;
pub mod rng;
pub mod verify;

pub use error::{Error, Result};
pub use estimate::{EstimateValue, InvariantEstimate, Kind, Method};
pub use eval::{eval, EvalOptions, Evaluator};
pub use expr::{AffineMap, PshExpr, RadialProfile};
pub use geometry::{lct_exact, lelong_exact, skoda_sandwich, NewtonPolyhedron};
pub use ops::{make_phi_k, pullback_difference, restrict_to_slice, scale, tower_pullback, SliceMap};
pub use poly::Polynomial;
pub use rational::{ExtRational, Rational};
