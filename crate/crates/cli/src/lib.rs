//! File formats, subcommands and SVG layout behind the `pack` binary.

// `!(x < bound)` is deliberate throughout: NaN must fail every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod format;
pub mod layout;
