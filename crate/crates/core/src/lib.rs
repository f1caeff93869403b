//! Quasi-cyclic (protograph-lifted) polar codes.
//!
//! A QC polar code runs `Q` copies of an `n`-stage polar encoder side by side
//! and couples them through circulant permutations at every
//! proto-polarization unit. The crate covers the full pipeline:
//!
//! * [`code_model`]: code description and its text format
//! * [`encoder`]: standard and lifted encoding, dense generator oracle
//! * [`protograph`]: cycle enumeration, girth, hill-climbing shift design
//! * [`construction`]: frozen-bit selection and greedy unit pruning
//! * [`decoders`]: SC, CRC-aided SCL and round-robin BP with operation counts
//! * [`simulator`]: AWGN/BPSK Monte Carlo BER/FER sweeps
//!
//! With the default `parallel` feature, frame batches, cycle enumeration and
//! candidate evaluation run on rayon; without it the same code runs
//! sequentially and produces identical results.

pub mod code_model;
pub mod construction;
pub mod crc;
pub mod decoders;
pub mod encoder;
pub mod error;
pub mod par;
pub mod protograph;
pub mod simulator;

pub use code_model::{load_spec, save_spec, validate, CodeSpec, ShiftBaseMatrix, UnitAddress};
pub use error::{Error, Result};
