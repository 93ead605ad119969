//! Library half of the `tfpsi` experiment runner: configuration handling,
//! file formats, report structure, and the suite implementations.  The
//! binary in `main.rs` is a thin argument-parsing shell over [`suites`].

pub mod config;
pub mod io;
pub mod report;
pub mod suites;
