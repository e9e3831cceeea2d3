//! Eigenvalue statistics for the classical compact groups U(n), SO(2n),
//! SO(2n+1) and Sp(n).
//!
//! The crate computes cumulants of linear statistics `S_n(f) = Σ_j f(θ_j)`
//! of the eigenvalue angles along several independent routes and checks
//! them against each other:
//!
//! * [`comb`] — exact rational arithmetic for the combinatorial identities
//!   that drive the central limit theorems (the piecewise-linear function G,
//!   the Rudnick–Sarnak permutation identity, Spohn's tree sum U, and the
//!   composition coefficient sums).
//! * [`cumulant`] — exact finite-n cumulants from the Fourier k-sum for
//!   U(n) and from projection-kernel traces for all four ensembles, plus
//!   the limiting values.
//! * [`mgf`] — moment generating functions as Toeplitz determinants,
//!   Fredholm determinants on the projection basis, and brute-force Weyl
//!   quadrature for tiny n, with cumulant extraction from the log-MGF.
//! * [`sampler`] — a sequential projection-DPP sampler for the eigenvalue
//!   angle process and the Monte Carlo machinery (k-statistics,
//!   Kolmogorov–Smirnov distance) used to test the CLTs empirically.
//! * [`fourier`] — trigonometric polynomials by their Fourier data and the
//!   rapidly-decaying test functions used for local statistics.

pub mod comb;
pub mod cumulant;
pub mod ensemble;
pub mod error;
pub mod fourier;
pub mod linalg;
pub mod mgf;
pub mod quad;
pub mod sampler;

pub use error::{Error, Result};
