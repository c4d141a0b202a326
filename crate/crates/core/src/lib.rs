//! Exact symbolic engine for the monomial case of embedded resolution of
//! threefold singularities in positive characteristic.
//!
//! All computation is exact over finite fields F_{p^m}. The engine cleans a
//! Weierstrass element to well-adapted form and evaluates the invariants of
//! the monomial case. Along every branch of the resolution tree it checks
//! that the configuration tuple strictly decreases.

pub mod field;
pub mod poly;
pub mod univar;
pub mod situation;
pub mod cleaning;
pub mod invariants;
pub mod singlocus;
pub mod blowup;
pub mod claims;
pub mod driver;
pub mod tau0;
pub mod tau2;
pub mod io;
pub mod sample;
