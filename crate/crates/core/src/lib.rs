//! Flow spaces of generalized geodesics over proper CAT(0) model spaces.
//!
//! The crate models three spaces (Euclidean space, the Cayley tree of the
//! free group of rank two, the hyperbolic plane in the disk model), the flow
//! space `FS(X)` of generalized geodesics with its flow and metric, isometric
//! group actions, the homotopy action on a ball used to transfer control into
//! the flow space, and explicit equivariant covers of the periodic part of
//! `FS(X)`. Every quantitative statement has a sampled verifier returning a
//! report instead of a bare boolean.
//!
//! ```
//! use flowspace::model_spaces::{distance, SpacePoint};
//!
//! let x = SpacePoint::euclidean(&[0.0, 0.0]);
//! let y = SpacePoint::euclidean(&[3.0, 4.0]);
//! assert_eq!(distance(&x, &y).unwrap(), 5.0);
//! ```

pub mod error;
pub mod flow_space;
pub mod group_actions;
pub mod model_spaces;
pub mod periodic;
pub mod report;
pub mod sampling;
pub mod suites;
pub mod transfer;

pub use error::{Error, Result};
