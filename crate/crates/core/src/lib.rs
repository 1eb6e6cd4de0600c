//! Iterated function systems of circle maps: hyperspace dynamics under the
//! Hutchinson operator, density/expansion/blending certificates for the
//! generated semigroup, and strong-leaf computations for the associated
//! symbolic skew-product.

pub mod catalog;
pub mod circle;
pub mod hyperspace;
pub mod map;
pub mod rational;
pub mod semigroup;
pub mod skewprod;

pub use circle::{Arc, ArcUnion, CirclePoint};
pub use hyperspace::{hausdorff_distance, hutchinson_step, IfsSystem, PointCloud};
pub use map::{CircleMap, MapError};
pub use rational::Rational;
