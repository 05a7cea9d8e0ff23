//! Random-feature ReLU models `f_v(x) = σ(xᵀW) v`, closed-form approximate
//! eigenvectors of their Fisher information matrix, the infinite-width limit
//! functions those eigenvectors converge to, and gradient-descent dynamics
//! projected onto that basis.

pub mod dynamics;
pub mod eigenvectors;
pub mod error;
pub mod experiment;
pub mod features;
pub mod fim_metric;
pub mod limits;
pub mod linalg;
pub mod mc;
pub mod oracles;
pub mod rng;

pub use eigenvectors::{BasisLabel, BasisVector, Group};
pub use error::{Error, Result};
pub use features::FeatureMap;
pub use limits::{LimitFn, LimitKind, SpecialConstants};
