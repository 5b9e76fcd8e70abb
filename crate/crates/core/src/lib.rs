//! Symbolic toolkit for the inverse problem of the calculus of variations:
//! exact jet-coordinate polynomials, a problem-file DSL, the Euler-Lagrange
//! and Helmholtz operator suite, and the finite-dimensional Lagrangian
//! construction for flows preserving a symplectic form.

pub mod jetcore;
pub mod mech;
pub mod parser;
pub mod sample;
pub mod varcalc;

pub use jetcore::{Expr, JetError, JetSpace, JetVar, MultiIndex, Rational};
pub use parser::{parse_problem, render, ProblemFile};
pub use varcalc::{euler_lagrange, helmholtz, tonti_lagrangian, Lagrangian, SourceForm};
