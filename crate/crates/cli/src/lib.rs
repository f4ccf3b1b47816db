//! Scenario files, report bundles and their CSV and SVG renderings for the
//! `shnol` command.

pub mod config;
pub mod report;
