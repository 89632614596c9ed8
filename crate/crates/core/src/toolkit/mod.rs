//! Generators, file formats, reports and the command-line front end.

pub mod cli;
pub mod generators;
pub mod io;
pub mod random;
pub mod report;
pub mod verify;
