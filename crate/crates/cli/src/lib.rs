//! Library surface of the `specfrac` harness: scenario configs, the
//! verification pipeline, report types, and artifact serialization.  The
//! binary in `main.rs` is a thin argument layer over these modules; the
//! integration tests drive them directly.

pub mod config;
pub mod io;
pub mod report;
pub mod scenario;
