use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense real tensor of rank `rank` over `dim` dimensions, row-major
/// (first index most significant).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    dim: usize,
    rank: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(dim: usize, rank: usize) -> Self {
        Tensor { dim, rank, data: vec![0.0; dim.pow(rank as u32)] }
    }

    /// Rank-0 tensor; `dim` is carried along so it combines with rank-l
    /// tensors of the same space.
    pub fn scalar(dim: usize, value: f64) -> Self {
        Tensor { dim, rank: 0, data: vec![value] }
    }

    pub fn from_vec(dim: usize, rank: usize, data: Vec<f64>) -> Result<Self> {
        let expected = dim.pow(rank as u32);
        if data.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: data.len() });
        }
        Ok(Tensor { dim, rank, data })
    }

    /// `v ⊗ v ⊗ … ⊗ v` (`rank` factors).
    pub fn outer_power(v: &[f64], rank: usize) -> Self {
        let mut t = Tensor { dim: v.len(), rank: 0, data: vec![1.0] };
        for _ in 0..rank {
            t = t.outer_vec(v);
        }
        t
    }

    /// Identity matrix as a rank-2 tensor.
    pub fn delta(dim: usize) -> Self {
        let mut t = Tensor::zeros(dim, 2);
        for i in 0..dim {
            t.data[i * dim + i] = 1.0;
        }
        t
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.rank
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank);
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.rank];
        for slot in idx.iter_mut().rev() {
            *slot = flat % self.dim;
            flat /= self.dim;
        }
        idx
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.flat_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: f64) {
        let k = self.flat_index(idx);
        self.data[k] = value;
    }

    pub fn outer_vec(&self, v: &[f64]) -> Tensor {
        let mut data = Vec::with_capacity(self.data.len() * v.len());
        for &a in &self.data {
            data.extend(v.iter().map(|&b| a * b));
        }
        Tensor { dim: v.len(), rank: self.rank + 1, data }
    }

    pub fn outer(&self, other: &Tensor) -> Tensor {
        let dim = if self.rank == 0 { other.dim } else { self.dim };
        let mut data = Vec::with_capacity(self.data.len() * other.data.len());
        for &a in &self.data {
            data.extend(other.data.iter().map(|&b| a * b));
        }
        Tensor { dim, rank: self.rank + other.rank, data }
    }

    pub fn scale(mut self, s: f64) -> Tensor {
        self.data.iter_mut().for_each(|x| *x *= s);
        self
    }

    pub fn add_scaled(&mut self, other: &Tensor, s: f64) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn dot(&self, other: &Tensor) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Contraction of index pair `(a, b)`, `a < b`.
    pub fn trace(&self, a: usize, b: usize) -> Tensor {
        assert!(a < b && b < self.rank, "trace indices out of range");
        let d = self.dim;
        let mut out = Tensor::zeros(d, self.rank - 2);
        for flat in 0..self.data.len() {
            let idx = self.multi_index(flat);
            if idx[a] != idx[b] {
                continue;
            }
            let reduced: Vec<usize> =
                idx.iter().enumerate().filter(|&(k, _)| k != a && k != b).map(|(_, &i)| i).collect();
            let k = out.flat_index(&reduced);
            out.data[k] += self.data[flat];
        }
        out
    }

    /// Full contraction of the last index with `v`.
    pub fn contract_last(&self, v: &[f64]) -> Tensor {
        debug_assert!(self.rank >= 1);
        let d = self.dim;
        let data = self.data.chunks_exact(d).map(|c| c.iter().zip(v).map(|(a, b)| a * b).sum()).collect();
        Tensor { dim: d, rank: self.rank - 1, data }
    }

    /// `T_{i1…il} v_{i1} … v_{il}`.
    pub fn contract_power(&self, v: &[f64]) -> f64 {
        let mut cur = self.data.clone();
        let d = self.dim;
        for _ in 0..self.rank {
            cur = cur.chunks_exact(d).map(|c| c.iter().zip(v).map(|(a, b)| a * b).sum()).collect();
        }
        cur[0]
    }

    /// Average over all index permutations.
    pub fn symmetrize(&self) -> Tensor {
        if self.rank < 2 {
            return self.clone();
        }
        // Entries whose index tuples are permutations of one another form an
        // orbit; the symmetrized value is the orbit mean.
        let mut groups: std::collections::HashMap<Vec<usize>, (f64, usize)> = std::collections::HashMap::new();
        let mut keys = Vec::with_capacity(self.data.len());
        for flat in 0..self.data.len() {
            let mut idx = self.multi_index(flat);
            idx.sort_unstable();
            let e = groups.entry(idx.clone()).or_insert((0.0, 0));
            e.0 += self.data[flat];
            e.1 += 1;
            keys.push(idx);
        }
        let data = keys
            .iter()
            .map(|k| {
                let (s, n) = groups[k];
                s / n as f64
            })
            .collect();
        Tensor { dim: self.dim, rank: self.rank, data }
    }

    /// Largest deviation from permutation symmetry (compares every entry with
    /// its sorted-index representative).
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for flat in 0..self.data.len() {
            let mut idx = self.multi_index(flat);
            idx.sort_unstable();
            worst = worst.max((self.data[flat] - self.get(&idx)).abs());
        }
        worst
    }

    /// Largest entry of any single-pair trace.
    pub fn trace_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.rank {
            for b in (a + 1)..self.rank {
                worst = worst.max(self.trace(a, b).max_abs());
            }
        }
        worst
    }

    /// Apply the `dim×dim` row-major matrix `r` to every index:
    /// `T'_{i…} = R_{ii'} … T_{i'…}`.
    pub fn rotate(&self, r: &[f64]) -> Tensor {
        let d = self.dim;
        let mut cur = self.data.clone();
        let n = cur.len();
        for slot in 0..self.rank {
            let stride = d.pow((self.rank - 1 - slot) as u32);
            cur = (0..n)
                .map(|flat| {
                    let i = (flat / stride) % d;
                    let base = flat - i * stride;
                    (0..d).map(|k| r[i * d + k] * cur[base + k * stride]).sum()
                })
                .collect();
        }
        Tensor { dim: d, rank: self.rank, data: cur }
    }
}
