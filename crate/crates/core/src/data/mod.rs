//! Problem generation, dataset loading, and matrix persistence.
//!
//! All randomness goes through `ChaCha8Rng`, which produces the same stream
//! on every platform for a given seed.

mod matrix_csv;
mod movielens;
mod synth;

pub use matrix_csv::{format_value, read_matrix_csv, write_matrix_csv};
pub use movielens::{load_movielens, parse_movielens, RatingsMatrix};
pub use synth::{derive_init_seed, generate_synthetic, initial_point, scaling_factor, SynthSpec};
