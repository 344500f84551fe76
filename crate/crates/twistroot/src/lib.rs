//! Twisted affine root systems of Lie superalgebras, their closed subsets,
//! shadows and the functionals that cut them out.

pub mod cli;
pub mod cylsets;
pub mod functionals;
pub mod quadratic;
pub mod rootspace;
pub mod shadow;
pub mod suite;
