//! The guide's chapters, compiled so that `cargo test` runs every listing.

#[doc = include_str!("../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../book/src/model.md")]
pub mod model {}
#[doc = include_str!("../../book/src/initial_data.md")]
pub mod initial_data {}
#[doc = include_str!("../../book/src/reformulation.md")]
pub mod reformulation {}
#[doc = include_str!("../../book/src/time_stepping.md")]
pub mod time_stepping {}
#[doc = include_str!("../../book/src/diagnostics.md")]
pub mod diagnostics {}
#[doc = include_str!("../../book/src/verification.md")]
pub mod verification {}
#[doc = include_str!("../../book/src/command_line.md")]
pub mod command_line {}
