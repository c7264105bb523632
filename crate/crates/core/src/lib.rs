//! Polar coding for degraded binary-input symmetric wiretap channels.
//!
//! The crate covers channel modelling ([`channel`]), the polar transform and
//! successive-cancellation decoders ([`polar`]), certified bit-channel
//! construction ([`construction`]), weak- and strong-security wiretap codes
//! ([`wiretap`]) and exact and Monte Carlo verification tools
//! ([`evaluation`]).

pub mod bits;
pub mod channel;
pub mod construction;
pub mod error;
pub mod evaluation;
pub mod index_set;
pub mod polar;
pub mod wiretap;

pub use error::{Error, Result};
pub use index_set::IndexSet;
