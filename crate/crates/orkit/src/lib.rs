//! Observer-based realizations of control systems through the
//! dimension-keeping semi-tensor product.
//!
//! The library is organized around a small calculus for multiplying matrices
//! of mismatched dimensions while keeping the outer shape, plus the invariant
//! subspace machinery needed to turn a state-space system into a lower order
//! model whose output reproduces the original one.

pub mod cli;
pub mod dkstp;
pub mod error;
pub mod io;
pub mod nonlin;
pub mod orsys;
pub mod poly;
pub mod rat;
pub mod repro;
pub mod sim;
pub mod subspace;
pub mod xspace;

pub use error::{OrkitError, Result};

/// Entry point used by the `orkit` binary; lives in the library so the crate
/// stays a single unit.
pub fn cli_main() {
    // die quietly when the consumer of stdout goes away (e.g. `orkit ... | head`)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    std::process::exit(cli::run(std::env::args_os()));
}
