use std::fmt;

use serde::de::Deserializer;
use serde::ser::{SerializeSeq, SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use super::QuboError;
use crate::scalar::Scalar;

/// Upper-triangular QUBO coefficients with a constant offset.
///
/// Energy of an assignment `x` is `sum_{i <= j} Q_ij x_i x_j + offset`.
/// Entries are stored row-compressed: row `i` holds the nonzero `Q_ij` for
/// `j >= i` in ascending `j`.
#[derive(Clone, PartialEq)]
pub struct QuboMatrix<T> {
    n: usize,
    row_start: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<T>,
    offset: T,
}

impl<T: fmt::Debug> fmt::Debug for QuboMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuboMatrix")
            .field("n", &self.n)
            .field("nnz", &self.vals.len())
            .field("offset", &self.offset)
            .finish()
    }
}

impl<T: Scalar> QuboMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, row_start: vec![0; n + 1], cols: Vec::new(), vals: Vec::new(), offset: T::zero() }
    }

    /// Builds from arbitrary `(i, j, value)` triplets. `(j, i)` is folded
    /// onto `(i, j)`, duplicates are summed and zero sums are dropped.
    pub fn from_triplets(
        n: usize,
        offset: T,
        mut triplets: Vec<(usize, usize, T)>,
    ) -> Result<Self, QuboError> {
        for t in triplets.iter_mut() {
            if t.0 > t.1 {
                std::mem::swap(&mut t.0, &mut t.1);
            }
            if t.1 >= n {
                return Err(QuboError::IndexOutOfRange { i: t.0, j: t.1, n });
            }
            if !t.2.is_finite() {
                return Err(QuboError::NonFinite { i: t.0, j: t.1 });
            }
        }
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(usize, usize, T)> = Vec::with_capacity(triplets.len());
        for (i, j, v) in triplets {
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => merged.push((i, j, v)),
            }
        }
        let mut row_start = vec![0; n + 1];
        let mut cols = Vec::with_capacity(merged.len());
        let mut vals = Vec::with_capacity(merged.len());
        for (i, j, v) in merged.into_iter().filter(|t| t.2 != T::zero()) {
            row_start[i + 1] += 1;
            cols.push(j as u32);
            vals.push(v);
        }
        for i in 0..n {
            row_start[i + 1] += row_start[i];
        }
        Ok(Self { n, row_start, cols, vals, offset })
    }

    /// Builds row by row. `fill(i, row)` appends the `(j, Q_ij)` entries of
    /// row `i`; columns must be strictly ascending and `>= i`. Zeros are
    /// dropped.
    pub fn from_upper_rows(
        n: usize,
        offset: T,
        mut fill: impl FnMut(usize, &mut Vec<(usize, T)>),
    ) -> Result<Self, QuboError> {
        let mut row_start = Vec::with_capacity(n + 1);
        row_start.push(0);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut row = Vec::new();
        for i in 0..n {
            row.clear();
            fill(i, &mut row);
            let mut prev: Option<usize> = None;
            for &(j, v) in &row {
                if j < i || j >= n || prev.is_some_and(|p| j <= p) {
                    return Err(QuboError::IndexOutOfRange { i, j, n });
                }
                if !v.is_finite() {
                    return Err(QuboError::NonFinite { i, j });
                }
                prev = Some(j);
                if v != T::zero() {
                    cols.push(j as u32);
                    vals.push(v);
                }
            }
            row_start.push(cols.len());
        }
        Ok(Self { n, row_start, cols, vals, offset })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> T {
        self.offset
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Fraction of the `n(n+1)/2` upper-triangular slots that are nonzero.
    pub fn density(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.nnz() as f64 / (self.n as f64 * (self.n as f64 + 1.0) / 2.0)
    }

    /// `(j, Q_ij)` for the stored entries of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_start[i]..self.row_start[i + 1];
        self.cols[r.clone()].iter().zip(&self.vals[r]).map(|(&j, &v)| (j as usize, v))
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        if j >= self.n {
            return T::zero();
        }
        let r = self.row_start[i]..self.row_start[i + 1];
        match self.cols[r.clone()].binary_search(&(j as u32)) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => T::zero(),
        }
    }

    pub fn evaluate(&self, x: &[bool]) -> Result<T, QuboError> {
        if x.len() != self.n {
            return Err(QuboError::LengthMismatch { expected: self.n, found: x.len() });
        }
        let mut e = self.offset;
        for i in (0..self.n).filter(|&i| x[i]) {
            for (j, v) in self.row(i) {
                if x[j] {
                    e += v;
                }
            }
        }
        Ok(e)
    }

    pub fn scaled(&self, lambda: T) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= lambda);
        out.offset *= lambda;
        out.prune();
        out
    }

    /// `self + lambda * term`, merged row by row.
    pub fn add_scaled(&self, lambda: T, term: &Self) -> Result<Self, QuboError> {
        if self.n != term.n {
            return Err(QuboError::DimensionMismatch { left: self.n, right: term.n });
        }
        let offset = self.offset + lambda * term.offset;
        Self::from_upper_rows(self.n, offset, |i, row| {
            let mut a = self.row(i).peekable();
            let mut b = term.row(i).map(|(j, v)| (j, lambda * v)).peekable();
            loop {
                match (a.peek().copied(), b.peek().copied()) {
                    (Some((ja, va)), Some((jb, vb))) => {
                        if ja == jb {
                            row.push((ja, va + vb));
                            a.next();
                            b.next();
                        } else if ja < jb {
                            row.push((ja, va));
                            a.next();
                        } else {
                            row.push((jb, vb));
                            b.next();
                        }
                    }
                    (Some(e), None) => {
                        row.push(e);
                        a.next();
                    }
                    (None, Some(e)) => {
                        row.push(e);
                        b.next();
                    }
                    (None, None) => break,
                }
            }
        })
    }

    fn prune(&mut self) {
        if self.vals.iter().all(|&v| v != T::zero()) {
            return;
        }
        let entries: Vec<_> = self.entries().collect();
        *self = Self::from_triplets(self.n, self.offset, entries).expect("entries already valid");
    }
}

/// `(coeffs . x - target)^2` as a QUBO, folding `x_i^2 = x_i` into the diagonal.
pub fn equality_penalty<T: Scalar>(coeffs: &[T], target: T) -> QuboMatrix<T> {
    let two = T::lit(2.0);
    QuboMatrix::from_upper_rows(coeffs.len(), target * target, |i, row| {
        let a = coeffs[i];
        row.push((i, a * a - two * target * a));
        row.extend(coeffs.iter().enumerate().skip(i + 1).map(|(j, &b)| (j, two * a * b)));
    })
    .expect("dense upper rows are well formed")
}

/// Incremental QUBO construction from freely ordered terms.
#[derive(Clone, Debug)]
pub struct QuboBuilder<T> {
    n: usize,
    offset: T,
    terms: Vec<(usize, usize, T)>,
}

impl<T: Scalar> QuboBuilder<T> {
    pub fn new(n: usize) -> Self {
        Self { n, offset: T::zero(), terms: Vec::new() }
    }

    pub fn add(&mut self, i: usize, j: usize, v: T) -> &mut Self {
        self.terms.push((i, j, v));
        self
    }

    pub fn add_linear(&mut self, i: usize, v: T) -> &mut Self {
        self.add(i, i, v)
    }

    pub fn add_offset(&mut self, v: T) -> &mut Self {
        self.offset += v;
        self
    }

    pub fn build(self) -> Result<QuboMatrix<T>, QuboError> {
        QuboMatrix::from_triplets(self.n, self.offset, self.terms)
    }
}

impl<T: Scalar> Serialize for QuboMatrix<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        struct Entries<'a, T>(&'a QuboMatrix<T>);
        impl<T: Scalar> Serialize for Entries<'_, T> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                let mut seq = s.serialize_seq(Some(self.0.nnz()))?;
                for (i, j, v) in self.0.entries() {
                    seq.serialize_element(&(i, j, v))?;
                }
                seq.end()
            }
        }
        let mut st = s.serialize_struct("QuboMatrix", 3)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("offset", &self.offset)?;
        st.serialize_field("entries", &Entries(self))?;
        st.end()
    }
}

impl<'de, T: Scalar> Deserialize<'de> for QuboMatrix<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(bound = "T: Scalar")]
        struct Raw<T> {
            n: usize,
            #[serde(default)]
            offset: T,
            entries: Vec<(usize, usize, T)>,
        }
        let raw = Raw::<T>::deserialize(d)?;
        QuboMatrix::from_triplets(raw.n, raw.offset, raw.entries).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: usize, offset: f64, t: &[(usize, usize, f64)]) -> QuboMatrix<f64> {
        QuboMatrix::from_triplets(n, offset, t.to_vec()).unwrap()
    }

    #[test]
    fn hand_expansion() {
        let m = q(2, 0.0, &[(0, 0, 1.0), (0, 1, -2.0), (1, 1, 1.0)]);
        assert_eq!(m.evaluate(&[true, true]).unwrap(), 0.0);
        assert_eq!(m.evaluate(&[true, false]).unwrap(), 1.0);
    }

    #[test]
    fn zero_assignment_gives_offset() {
        let m = q(3, 4.5, &[(0, 2, 7.0), (1, 1, -3.0)]);
        assert_eq!(m.evaluate(&[false; 3]).unwrap(), 4.5);
    }

    #[test]
    fn length_mismatch() {
        let m = QuboMatrix::<f64>::zeros(3);
        assert!(matches!(m.evaluate(&[true]), Err(QuboError::LengthMismatch { expected: 3, found: 1 })));
    }

    #[test]
    fn lower_triangle_and_duplicates_normalized() {
        let m = q(3, 0.0, &[(2, 0, 1.5), (0, 2, 0.5), (1, 1, 2.0), (1, 1, -2.0)]);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 2), 2.0);
        assert_eq!(m.get(2, 0), 2.0);
        assert_eq!(m.get(1, 1), 0.0);
        assert!(m.entries().all(|(i, j, v)| i <= j && v != 0.0));
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(matches!(
            QuboMatrix::from_triplets(2, 0.0, vec![(0, 2, 1.0)]),
            Err(QuboError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn add_scaled_identities() {
        let m = q(2, 1.0, &[(0, 0, 3.0), (0, 1, -1.0)]);
        let h = q(2, -2.0, &[(1, 1, 5.0)]);
        assert_eq!(QuboMatrix::zeros(2).add_scaled(1.0, &m).unwrap(), m);
        assert_eq!(m.add_scaled(0.0, &h).unwrap(), m);
        assert!(matches!(m.add_scaled(1.0, &QuboMatrix::zeros(3)), Err(QuboError::DimensionMismatch { .. })));
    }

    #[test]
    fn cancellation_drops_entries() {
        let m = q(2, 0.0, &[(0, 1, 2.0)]);
        let sum = m.add_scaled(-1.0, &m).unwrap();
        assert_eq!(sum.nnz(), 0);
        assert_eq!(m.scaled(0.0).nnz(), 0);
    }

    #[test]
    fn two_variable_penalty() {
        let p = equality_penalty(&[1.0, 1.0], 1.0);
        assert_eq!(p.get(0, 0), -1.0);
        assert_eq!(p.get(1, 1), -1.0);
        assert_eq!(p.get(0, 1), 2.0);
        assert_eq!(p.offset(), 1.0);
        assert_eq!(p.evaluate(&[true, false]).unwrap(), 0.0);
        assert_eq!(p.evaluate(&[true, true]).unwrap(), 1.0);
    }

    #[test]
    fn json_layout() {
        let m = q(3, 0.25, &[(0, 1, 2.0), (2, 2, -1.0)]);
        let v = serde_json::to_value(&m).unwrap();
        assert_eq!(v, serde_json::json!({"n": 3, "offset": 0.25, "entries": [[0, 1, 2.0], [2, 2, -1.0]]}));
        let back: QuboMatrix<f64> = serde_json::from_value(v).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn builder_sums_terms() {
        let mut b = QuboBuilder::<f32>::new(2);
        b.add(1, 0, 1.0).add(0, 1, 1.0).add_linear(1, -4.0).add_offset(3.0);
        let m = b.build().unwrap();
        assert_eq!(m.get(0, 1), 2.0);
        assert_eq!(m.evaluate(&[false, true]).unwrap(), -1.0);
    }
}
