//! Exact construction and verification of signed polytope decompositions
//! (Brianchon-Gram, Lawrence-Varchenko and the norm-square decomposition) of
//! simple polytopes, together with the localization data that selects among
//! them.

pub mod decomp;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod linalg;
pub mod lp;
pub mod measure;
pub mod rational;
pub mod taming;

pub use error::{Error, Result};
pub use geometry::{AxisBox, ClippedPolytope, Face, HalfSpace, SimplePolytope};
pub use rational::{QVector, Rational};
