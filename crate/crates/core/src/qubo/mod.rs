//! QUBO and Ising models: storage, energy evaluation, conversions and
//! penalty composition.

mod bits;
mod ising;
mod matrix;
mod text;

pub use bits::{bit_order, bits_from_str, bits_to_string, serde_bits, BitOrder};
pub use ising::{ising_to_qubo, qubo_to_ising, IsingModel};
pub use matrix::{equality_penalty, QuboBuilder, QuboMatrix};
pub use text::{read_triplets, write_triplets};

#[derive(Debug, thiserror::Error)]
pub enum QuboError {
    #[error("assignment has {found} variables, model has {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("dimension mismatch: {left} vs {right} variables")]
    DimensionMismatch { left: usize, right: usize },
    #[error("entry ({i}, {j}) out of range for {n} variables")]
    IndexOutOfRange { i: usize, j: usize, n: usize },
    #[error("non-finite coefficient at ({i}, {j})")]
    NonFinite { i: usize, j: usize },
    #[error("spin {index} is {value}, expected -1 or 1")]
    NotSpin { index: usize, value: i8 },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
