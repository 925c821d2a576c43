//! Isometric group actions on the model spaces.
//!
//! Elements are concrete isometries ([`IsometryElement`]); an action is a
//! finite symmetric generating set containing the identity together with a
//! base point ([`GroupAction`]). Translation lengths are computed in closed
//! form and can be cross-checked against [`minimize_displacement`].

mod action;
mod isometry;

pub use action::{
    line_motion, line_stabilizer, stabilizer_witness, ActionConfig, ActionKind, EuclideanGenerator, GroupAction, LineMotion,
    StabilizerWitness, DEFAULT_WORD_LENGTH,
};
pub use isometry::{minimize_displacement, Classification, IsometryElement};
