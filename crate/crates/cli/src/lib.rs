//! Command-line front end: evaluation, dataset validation, the interactive
//! HTTP service and synthetic dataset generation.

pub mod commands;
pub mod diag;
pub mod server;
pub mod table1;
