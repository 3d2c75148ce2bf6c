use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{QuboBuilder, QuboError, QuboMatrix};
use crate::scalar::Scalar;

/// `H(S) = sum_i h_i S_i + sum_{i<j} J_ij S_i S_j + offset` over spins in {-1, 1}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct IsingModel<T> {
    pub h: Vec<T>,
    /// Couplers keyed by `(i, j)` with `i < j`.
    pub j: BTreeMap<(usize, usize), T>,
    pub offset: T,
}

impl<T: Scalar> IsingModel<T> {
    pub fn new(n: usize) -> Self {
        Self { h: vec![T::zero(); n], j: BTreeMap::new(), offset: T::zero() }
    }

    pub fn n(&self) -> usize {
        self.h.len()
    }

    /// Adds to the coupler between `a` and `b` (order-insensitive, `a != b`).
    pub fn add_coupler(&mut self, a: usize, b: usize, v: T) {
        assert_ne!(a, b, "self-coupling is a bias");
        let key = if a < b { (a, b) } else { (b, a) };
        *self.j.entry(key).or_insert_with(T::zero) += v;
    }

    pub fn energy(&self, spins: &[i8]) -> Result<T, QuboError> {
        if spins.len() != self.n() {
            return Err(QuboError::LengthMismatch { expected: self.n(), found: spins.len() });
        }
        if let Some((index, &value)) = spins.iter().enumerate().find(|(_, &s)| s != 1 && s != -1) {
            return Err(QuboError::NotSpin { index, value });
        }
        let s = |i: usize| if spins[i] > 0 { T::one() } else { -T::one() };
        let mut e = self.offset;
        for (i, &h) in self.h.iter().enumerate() {
            e += h * s(i);
        }
        for (&(a, b), &v) in &self.j {
            e += v * s(a) * s(b);
        }
        Ok(e)
    }
}

/// Substitutes `S = 2x - 1`.
pub fn ising_to_qubo<T: Scalar>(m: &IsingModel<T>) -> QuboMatrix<T> {
    let two = T::lit(2.0);
    let mut b = QuboBuilder::new(m.n());
    b.add_offset(m.offset);
    for (i, &h) in m.h.iter().enumerate() {
        b.add_linear(i, two * h).add_offset(-h);
    }
    for (&(i, j), &v) in &m.j {
        b.add(i, j, T::lit(4.0) * v)
            .add_linear(i, -two * v)
            .add_linear(j, -two * v)
            .add_offset(v);
    }
    b.build().expect("ising indices are in range")
}

/// Substitutes `x = (S + 1) / 2`.
pub fn qubo_to_ising<T: Scalar>(q: &QuboMatrix<T>) -> IsingModel<T> {
    let half = T::lit(0.5);
    let quarter = T::lit(0.25);
    let mut m = IsingModel::new(q.n());
    m.offset = q.offset();
    for (i, j, v) in q.entries() {
        if i == j {
            m.h[i] += half * v;
            m.offset += half * v;
        } else {
            m.add_coupler(i, j, quarter * v);
            m.h[i] += quarter * v;
            m.h[j] += quarter * v;
            m.offset += quarter * v;
        }
    }
    m
}
