//! Exact invariants: Newton polyhedra, vanishing orders, Skoda bounds.

pub mod lp;
pub mod newton;
pub mod ord;
pub mod rules;

pub use newton::{newton_polyhedron, NewtonPolyhedron};
pub use ord::{ord_at, shifted_support, uses_exact_arithmetic, ORD_REL_TOL};
pub use rules::{canonicalize, lct_exact, lelong_exact, skoda_sandwich};
