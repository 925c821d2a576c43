//! The guide's chapters, compiled so that `cargo test` runs their listings.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/model-spaces.md")]
pub mod model_spaces {}
#[doc = include_str!("../../../book/src/flow-space.md")]
pub mod flow_space {}
#[doc = include_str!("../../../book/src/group-actions.md")]
pub mod group_actions {}
#[doc = include_str!("../../../book/src/transfer.md")]
pub mod transfer {}
#[doc = include_str!("../../../book/src/periodic.md")]
pub mod periodic {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
