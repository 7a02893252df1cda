//! Fountain error exponents and a one-level concatenated fountain codec.
//!
//! * [`channel`]: discrete memoryless channels, Gallager's `E0`, capacity.
//! * [`exponent`]: random-coding, one-level, multilevel and
//!   unknown-channel fountain exponents by numerical optimization.
//! * [`outer`]: Reed-Solomon codes over GF(16) and GF(256).
//! * [`codec`]: the concatenated fountain encoder and decoder.
//! * [`sim`]: Monte Carlo sweeps and statistics.
//! * [`verify`]: self-checks of the exponent engine and decoders.

pub mod channel;
pub mod codec;
pub mod error;
pub mod exponent;
pub mod outer;
pub mod sim;
pub mod verify;

pub use channel::{Channel, InputDistribution, Nats};
pub use error::{Error, Result};
