//! Exact truncated q-series engine for Ramanujan's false theta identities.
//!
//! - [`series`]: sparse truncated Laurent series with rational coefficients
//! - [`monomial`]: signed monomials `±q^r`, the only parameter shape needed
//! - [`pochhammer`]: finite, infinite and limiting q-Pochhammer products
//! - [`hypergeom`]: `r+1 phi r` evaluation and products of such pieces
//! - [`transforms`]: two-sided checkers for the six classical transformations
//! - [`identities`]: the five false theta identities and the proof-step registry
//! - [`cli`]: the command line front end

pub mod cli;
pub mod error;
pub mod exec;
pub mod hypergeom;
pub mod identities;
pub mod monomial;
pub mod pochhammer;
pub mod series;
pub mod transforms;

pub use error::{Error, Result};
pub use exec::Exec;
pub use hypergeom::{detect_terminating, eval_phi, eval_sum, Factor, PhiSpec, TermSum};
pub use monomial::Monomial;
pub use pochhammer::{poch, poch_inf, poch_limit, poch_limit_monomial, Param};
pub use series::{Coeff, Mismatch, QSeries, Report, Scale, Sides};
