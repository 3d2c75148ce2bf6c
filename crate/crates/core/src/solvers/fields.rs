use crate::qubo::QuboMatrix;
use crate::scalar::Scalar;

/// Symmetric adjacency of a QUBO with per-variable local fields.
///
/// `field[i] = Q_ii + sum_j Q_ij x_j`, so flipping `x_i` changes the energy
/// by `field[i]` when it turns on and by `-field[i]` when it turns off.
pub(crate) struct LocalFields<'a, T> {
    adj: &'a Adjacency<T>,
    pub x: Vec<bool>,
    pub field: Vec<T>,
}

pub(crate) struct Adjacency<T> {
    diag: Vec<T>,
    start: Vec<usize>,
    nbr: Vec<u32>,
    w: Vec<T>,
}

impl<T: Scalar> Adjacency<T> {
    pub fn new(q: &QuboMatrix<T>) -> Self {
        let n = q.n();
        let mut diag = vec![T::zero(); n];
        let mut degree = vec![0usize; n];
        for (i, j, v) in q.entries() {
            if i == j {
                diag[i] = v;
            } else {
                degree[i] += 1;
                degree[j] += 1;
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for d in &degree {
            start.push(start.last().unwrap() + d);
        }
        let total = start[n];
        let mut nbr = vec![0u32; total];
        let mut w = vec![T::zero(); total];
        let mut fill = start[..n].to_vec();
        for (i, j, v) in q.entries() {
            if i != j {
                nbr[fill[i]] = j as u32;
                w[fill[i]] = v;
                fill[i] += 1;
                nbr[fill[j]] = i as u32;
                w[fill[j]] = v;
                fill[j] += 1;
            }
        }
        Self { diag, start, nbr, w }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn neighbours(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.start[i]..self.start[i + 1];
        self.nbr[r.clone()].iter().map(|&j| j as usize).zip(self.w[r].iter().copied())
    }

    /// Largest and smallest nonzero single-flip energy change magnitudes
    /// (upper bound and lower bound over all states).
    pub fn delta_range(&self) -> (f64, f64) {
        let mut max = 0.0f64;
        let mut min = f64::INFINITY;
        for i in 0..self.n() {
            let mut bound = self.diag[i].as_f64().abs();
            if bound > 0.0 {
                min = min.min(bound);
            }
            for (_, v) in self.neighbours(i) {
                let a = v.as_f64().abs();
                bound += a;
                if a > 0.0 {
                    min = min.min(a);
                }
            }
            max = max.max(bound);
        }
        (max, min)
    }

    pub fn fields(&self, x: Vec<bool>) -> LocalFields<'_, T> {
        let field = (0..self.n())
            .map(|i| {
                self.neighbours(i).fold(self.diag[i], |acc, (j, v)| if x[j] { acc + v } else { acc })
            })
            .collect();
        LocalFields { adj: self, x, field }
    }
}

impl<T: Scalar> LocalFields<'_, T> {
    #[inline]
    pub fn delta(&self, i: usize) -> T {
        if self.x[i] {
            -self.field[i]
        } else {
            self.field[i]
        }
    }

    pub fn flip(&mut self, i: usize) {
        self.x[i] = !self.x[i];
        let on = self.x[i];
        for (j, v) in self.adj.neighbours(i) {
            if on {
                self.field[j] += v;
            } else {
                self.field[j] -= v;
            }
        }
    }

    /// Flips improving bits (lowest index first) until none remains.
    pub fn descend(&mut self) {
        loop {
            let mut improved = false;
            for i in 0..self.x.len() {
                if self.delta(i) < T::zero() {
                    self.flip(i);
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
    }
}
