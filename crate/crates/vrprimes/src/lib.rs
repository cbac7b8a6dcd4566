//! Very regular primes for imaginary quadratic fields.
//!
//! An odd prime `p` that splits in an imaginary quadratic field `F = Q(sqrt(d))`
//! (`d < 0` a fundamental discriminant) is *very regular* when three conditions
//! hold simultaneously:
//!
//! 1. `p` is regular in the classical sense: `p` divides none of the Bernoulli
//!    numbers `B_2, B_4, ..., B_{p-3}`;
//! 2. `p` divides none of the L-values `L(chi_d, -2), L(chi_d, -4), ...,
//!    L(chi_d, 3-p)` for the quadratic character `chi_d` attached to `F`;
//! 3. a generator `alpha` of the principal ideal `P^h` (where `P` is a prime
//!    above `p` and `h` the class number) satisfies `alpha^(p-1) != 1` modulo
//!    the square of the conjugate prime.
//!
//! The crate supplies the modular arithmetic, Bernoulli/Euler tables, quadratic
//! field arithmetic, and the decision procedure itself, together with a survey
//! scanner over fundamental discriminants and exact graded-series calculators
//! for the associated stable cohomology dimensions.

pub mod arith;
pub mod bernoulli;
pub mod quadfield;
pub mod stabledim;
pub mod survey;
pub mod veryregular;

pub use num::{BigInt, BigRational};
