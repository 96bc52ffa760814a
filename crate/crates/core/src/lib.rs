//! Certified evaluation, differentiation and inequality replay for three
//! smooth solutions of the one-dimensional heat equation that fail to be
//! analytic in time at every point.
//!
//! * [`numerics`]: ball arithmetic, log-magnitude arithmetic, precision escalation.
//! * [`heat_kernel`]: the Gaussian heat kernel and its derivatives of any order.
//! * [`solutions`]: the lacunary series `u1`, `w_eps` and the kernel condensation `u2`.
//! * [`derivatives`]: closed-form time derivatives with certified truncation.
//! * [`diagnostics`]: replay of the quantitative steps of the non-analyticity
//!   arguments, the growth envelope, and PDE residual checks.

pub mod numerics;
pub mod derivatives;
pub mod heat_kernel;
pub mod solutions;
pub mod parallel;
pub mod diagnostics;

#[cfg(test)]
mod testutil;
