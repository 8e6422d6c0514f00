//! Quadratic Chabauty toolkit for odd-degree hyperelliptic curves over Q
//! whose Jacobian has Mordell-Weil rank equal to the genus.
//!
//! The crate is organised around the stages of the computation:
//!
//! * [`padic`] — capped-precision arithmetic in Q_p, linear algebra,
//!   the Iwasawa logarithm and rational reconstruction;
//! * [`hyperelliptic`] — curve models, point counting, Mumford/Cantor
//!   arithmetic and Jacobian group structure over finite fields;
//! * [`cohomology`] — the Frobenius matrix on H^1 via a Kedlaya-style
//!   reduction, cup products, Hecke matrices and Neron-Severi classes;
//! * [`coleman`] — Coleman integration, abelian logarithms and the
//!   local height pairing at p;
//! * [`graphheights`] — metric-graph Laplacians and local heights away
//!   from p;
//! * [`qc`] — assembly of quadratic Chabauty functions and p-adic root
//!   isolation;
//! * [`mwsieve`] — the Mordell-Weil sieve.

pub mod padic;
pub(crate) mod zmod;
pub mod ffield;
pub mod hyperelliptic;
pub mod cohomology;
pub mod coleman;
pub mod graphheights;
pub mod qc;
pub mod mwsieve;
pub mod ratpoly;
