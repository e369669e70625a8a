//! Relative-action representations for dual-arm manipulators, plus a
//! kinematics replay simulator that compares how each representation tracks a
//! recorded trajectory when joint measurements are unreliable.
//!
//! The crate is organized around five pieces:
//!
//! - [`se3`]: poses, rotations, the two pose-subtraction rules, the 6D
//!   rotation encoding, and path RMSE.
//! - [`action`]: camera-centric, tool-centric, and hybrid-relative action
//!   encodings of commanded waypoint sequences, with the flat 20-dim
//!   per-step vector layout used for training targets.
//! - [`kinematics`] / [`chain`]: a serial-chain dual-arm robot model whose
//!   passive setup joints are measured only by noisy potentiometers,
//!   yielding per-configuration rigid base errors between true and believed
//!   kinematics.
//! - [`replay`]: the repeatability experiment — record a reference path,
//!   re-execute it in each representation under shifted configurations, and
//!   report tracking RMSE.
//! - [`dataset`]: demonstration recording files, validation, training-chunk
//!   export, and normalization statistics.

pub mod action;
pub mod chain;
pub mod dataset;
pub mod kinematics;
pub mod replay;
pub mod se3;
