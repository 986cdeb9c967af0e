//! Inverse spectral problems for canonical systems with
//! `H = diag(w, 1/w)`.
//!
//! Given an even measure `μ` that samples every Paley–Wiener space `PW_a`,
//! [`inverse_spectral::recover_weight`] reconstructs the weight `w` on
//! `[0, a]` from the truncated Toeplitz operators of `μ`. Around that:
//!
//! - [`canonical_system`]: transfer matrices, `Θ(r, z)`, de Branges kernels;
//! - [`muckenhoupt`]: A₂ characteristics and averaged log-weights;
//! - [`krein_functions`]: the orthogonal entire functions `P_t`, `P_t*`;
//! - [`wiener_hopf`]: triangular factorization of Wiener–Hopf operators and
//!   outer functions.
//!
//! ```
//! use specweight::{recover_weight, Measure, RecoverOptions};
//!
//! let mu = Measure::constant(2.0, 40.0)?;
//! let rep = recover_weight(&mu, 1.0, &RecoverOptions::new(16, 32))?;
//! assert!(rep.w.iter().all(|w| (w - 0.5).abs() < 1e-6));
//! # Ok::<(), specweight::Error>(())
//! ```

// `!(x > 0.0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod canonical_system;
pub mod error;
pub mod inverse_spectral;
pub mod krein_functions;
pub mod linalg;
pub mod measures;
pub mod muckenhoupt;
pub mod quadrature;
pub mod toeplitz_pw;
pub mod wiener_hopf;

pub use canonical_system::{db_kernel, solve_theta, theta_at, WeightProfile};
pub use error::{Error, Result};
pub use inverse_spectral::{recover_weight, verify_spectral, Probe, RecoverOptions, RecoveryReport};
pub use measures::{build_measure, Measure, MeasureSpec};
pub use muckenhoupt::{a2_norm, prop1_certificate, ScanFamily};
pub use wiener_hopf::{cholesky_factorize, fmu_factorize, outer_pi, sakhnovich_audit};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/measures.md")]
    mod measures {}
    #[doc = include_str!("../../../book/src/toeplitz.md")]
    mod toeplitz {}
    #[doc = include_str!("../../../book/src/canonical-systems.md")]
    mod canonical_systems {}
    #[doc = include_str!("../../../book/src/recovery.md")]
    mod recovery {}
    #[doc = include_str!("../../../book/src/muckenhoupt.md")]
    mod muckenhoupt {}
    #[doc = include_str!("../../../book/src/krein.md")]
    mod krein {}
    #[doc = include_str!("../../../book/src/factorization.md")]
    mod factorization {}
    #[doc = include_str!("../../../book/src/outer-functions.md")]
    mod outer_functions {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
