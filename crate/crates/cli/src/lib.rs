//! Command-line front end for `semibound`: problem files, bound and
//! distribution commands, and figure series.

pub mod commands;
pub mod config;
pub mod figures;
pub mod table;
