//! Deep polar codes: multi-layer pre-transformed polar encoding, list
//! decoding with backpropagation parity checks, reference ML decoders,
//! weight-spectrum analysis and Monte Carlo BLER simulation.

pub mod analysis;
pub mod channels;
pub mod codec;
pub mod construction;
pub mod error;
pub mod gf2;
pub mod presets;
pub mod reliability;
pub mod sim;

pub use codec::{decode, encode, DecodeResult, DecoderKind};
pub use construction::{build_code, CodeConfig, DeepPolarCode, LayerConfig, LayerSpec};
pub use error::{Error, Result};
pub use gf2::{BitVector, Gf2Matrix};
