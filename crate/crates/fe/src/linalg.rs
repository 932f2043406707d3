//! Sparse system storage and direct solvers.

use std::collections::{BTreeSet, VecDeque};

use nalgebra::{DMatrix, DVector};

use crate::error::{FeError, Result};

/// Square matrix in compressed-row form with a fixed sparsity pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix with the given column sets per row.
    pub fn from_pattern(rows: &[BTreeSet<usize>]) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        row_ptr.push(0);
        for r in rows {
            cols.extend(r.iter().copied());
            row_ptr.push(cols.len());
        }
        let nnz = cols.len();
        Self {
            n,
            row_ptr,
            cols,
            values: vec![0.0; nnz],
        }
    }

    pub fn from_dense(a: &DMatrix<f64>) -> Self {
        let rows: Vec<BTreeSet<usize>> = (0..a.nrows())
            .map(|i| (0..a.ncols()).filter(|&j| a[(i, j)] != 0.0 || i == j).collect())
            .collect();
        let mut m = Self::from_pattern(&rows);
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                if a[(i, j)] != 0.0 {
                    m.add(i, j, a[(i, j)]);
                }
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn clear(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()]
            .binary_search(&j)
            .ok()
            .map(|p| range.start + p)
    }

    /// Adds `v` at `(i, j)`; the entry must be in the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let p = self
            .position(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside the sparsity pattern"));
        self.values[p] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |p| self.values[p])
    }

    /// `(column, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                a[(i, j)] = v;
            }
        }
        a
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// A direct solver for `A x = b`.
pub trait LinearSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>>;
}

/// Dense LU with partial pivoting; for small systems and cross-checks.
#[derive(Clone, Copy, Debug, Default)]
pub struct DenseLu;

impl LinearSolver for DenseLu {
    fn name(&self) -> &'static str {
        "dense-lu"
    }

    fn solve(&self, a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
        let lu = a.to_dense().lu();
        let x = lu
            .solve(&DVector::from_column_slice(b))
            .ok_or(FeError::Singular(0))?;
        Ok(x.iter().copied().collect())
    }
}

/// Reverse Cuthill–McKee ordering of the symmetrized pattern:
/// `order[k]` is the original index placed at position `k`.
pub fn rcm_order(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for (j, _) in a.row(i) {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for l in &mut adj {
        l.sort_unstable();
        l.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        // start each component from a minimum-degree node, then move to the
        // far end of its level structure (pseudo-peripheral node)
        let seed = (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| degree[i])
            .unwrap();
        let start = last_level_node(seed, &adj, &degree, &visited);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn last_level_node(seed: usize, adj: &[Vec<usize>], degree: &[usize], visited: &[bool]) -> usize {
    let mut seen = visited.to_vec();
    let mut level = vec![seed];
    seen[seed] = true;
    loop {
        let mut next = Vec::new();
        for &v in &level {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            return *level.iter().min_by_key(|&&v| (degree[v], v)).unwrap();
        }
        level = next;
    }
}

/// Banded LU without pivoting after RCM reordering. Suitable for the
/// diagonally dominant-enough systems of stable FE problems; a vanishing
/// pivot is reported as a singular system.
#[derive(Clone, Copy, Debug, Default)]
pub struct BandLu;

impl LinearSolver for BandLu {
    fn name(&self) -> &'static str {
        "band-lu"
    }

    fn solve(&self, a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
        let n = a.n();
        if n == 0 {
            return Ok(Vec::new());
        }
        let order = rcm_order(a);
        let mut pos = vec![0; n];
        for (k, &i) in order.iter().enumerate() {
            pos[i] = k;
        }
        let mut bw = 0;
        for i in 0..n {
            for (j, _) in a.row(i) {
                bw = bw.max(pos[i].abs_diff(pos[j]));
            }
        }
        let width = 2 * bw + 1;
        let mut band = vec![0.0; n * width];
        let at = |i: usize, j: usize| i * width + (j + bw - i);
        for i in 0..n {
            for (j, v) in a.row(i) {
                band[at(pos[i], pos[j])] += v;
            }
        }
        let tiny = 1e-14 * a.max_abs();
        for k in 0..n {
            let pivot = band[at(k, k)];
            if !(pivot.abs() > tiny) {
                return Err(FeError::Singular(order[k]));
            }
            let end = (k + bw + 1).min(n);
            for i in k + 1..end {
                let l = band[at(i, k)] / pivot;
                if l == 0.0 {
                    continue;
                }
                band[at(i, k)] = l;
                for j in k + 1..end {
                    band[at(i, j)] -= l * band[at(k, j)];
                }
            }
        }
        let mut y: Vec<f64> = order.iter().map(|&i| b[i]).collect();
        for i in 0..n {
            let start = i.saturating_sub(bw);
            let s: f64 = (start..i).map(|j| band[at(i, j)] * y[j]).sum();
            y[i] -= s;
        }
        for i in (0..n).rev() {
            let end = (i + bw + 1).min(n);
            let s: f64 = (i + 1..end).map(|j| band[at(i, j)] * y[j]).sum();
            y[i] = (y[i] - s) / band[at(i, i)];
        }
        let mut x = vec![0.0; n];
        for (k, &i) in order.iter().enumerate() {
            x[i] = y[k];
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Random sparse, diagonally dominant, unsymmetric matrix.
    fn random_system(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let mut a = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for _ in 0..3 {
                let j = rng.random_range(0..n);
                let v = rng.random_range(-1.0..1.0);
                a[(i, j)] += v;
                a[(j, i)] += 0.5 * v;
            }
        }
        for i in 0..n {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum();
            a[(i, i)] = off + 1.0;
        }
        a
    }

    #[test]
    fn band_and_dense_agree_with_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in [1, 2, 7, 60] {
            let a = random_system(n, &mut rng);
            let csr = CsrMatrix::from_dense(&a);
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let x1 = BandLu.solve(&csr, &b).unwrap();
            let x2 = DenseLu.solve(&csr, &b).unwrap();
            let r = csr.mul_vec(&x1);
            for i in 0..n {
                assert!((r[i] - b[i]).abs() < 1e-12);
                assert!((x1[i] - x2[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rcm_reduces_bandwidth_of_a_shuffled_chain() {
        let n = 30;
        let perm: Vec<usize> = (0..n).map(|i| (i * 7) % n).collect();
        let mut rows = vec![BTreeSet::new(); n];
        for k in 0..n {
            rows[perm[k]].insert(perm[k]);
            if k + 1 < n {
                rows[perm[k]].insert(perm[k + 1]);
                rows[perm[k + 1]].insert(perm[k]);
            }
        }
        let a = CsrMatrix::from_pattern(&rows);
        let order = rcm_order(&a);
        let mut pos = vec![0; n];
        for (k, &i) in order.iter().enumerate() {
            pos[i] = k;
        }
        let bw = (0..n)
            .flat_map(|i| a.row(i).map(move |(j, _)| (i, j)).collect::<Vec<_>>())
            .map(|(i, j)| pos[i].abs_diff(pos[j]))
            .max()
            .unwrap();
        assert_eq!(bw, 1);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let csr = CsrMatrix::from_dense(&a);
        assert!(matches!(BandLu.solve(&csr, &[1.0, 2.0]), Err(FeError::Singular(_))));
    }
}
