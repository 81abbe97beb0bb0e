//! Exact λ-bracket calculus for finite free Leibniz and Lie conformal
//! algebras: polynomial arithmetic, axiom checkers, extending structures,
//! flag datums and a bounded-degree linear solver.

pub mod conformal;
pub mod corpus;
pub mod error;
pub mod extend;
pub mod flag;
pub mod manifest;
pub mod poly;
pub mod report;
pub mod solver;

pub use conformal::{Basis, CMap, Chirality, ConformalAlgebra, ModElem, ScalarCMap};
pub use error::{Error, Result};
pub use poly::{LinearForm, Poly, Rational, Substitution, Var};
pub use report::{Item, Report, Residual};
