//! Integer factorization with divisor traps.
//!
//! A divisor trap approximates the hyperbola `y = n/x` near a chosen point
//! by an integer-coefficient curve and sweeps an integer step `k`; every
//! integer point on the hyperbola whose step falls in the swept range is
//! found exactly. The tangent trap is Fermat's method, multiplier sweeps of
//! it give Lehman's method, and higher-order Taylor traps reach divisors
//! near `(n/s)^{1/m}`.

pub mod algorithms;
pub mod cli;
pub mod coverage_lab;
pub mod exact_arith;
pub mod poly_solve;
pub mod traps;

pub use exact_arith::{Natural, Rational};
