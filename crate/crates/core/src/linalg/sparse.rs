use std::collections::{BTreeMap, VecDeque};

use super::LinalgError;

/// Accumulates (i, j, v) entries of a symmetric matrix; duplicates are summed
/// and entries above the diagonal are mirrored into the lower triangle.
#[derive(Clone, Debug, Default)]
pub struct TripletBuilder {
    n: usize,
    entries: BTreeMap<(usize, usize), f64>,
}

impl TripletBuilder {
    pub fn new(n: usize) -> Self {
        TripletBuilder {
            n,
            entries: BTreeMap::new(),
        }
    }

    /// Adds `v` to the symmetric pair (i, j)/(j, i); call once per pair.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let key = if i >= j { (i, j) } else { (j, i) };
        *self.entries.entry(key).or_insert(0.0) += v;
    }

    pub fn build(self) -> SparseSymmetric {
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut col = Vec::with_capacity(self.entries.len());
        let mut val = Vec::with_capacity(self.entries.len());
        for (&(i, j), &v) in &self.entries {
            row_ptr[i + 1] += 1;
            col.push(j);
            val.push(v);
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseSymmetric {
            n: self.n,
            row_ptr,
            col,
            val,
        }
    }
}

/// Symmetric matrix in compressed rows of its lower triangle (columns sorted,
/// diagonal last in each row when present).
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSymmetric {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
}

/// Diagnostics of a direct solve.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveInfo {
    /// Smallest pivot d_i = L_ii² of the envelope factorization.
    pub min_pivot: f64,
    pub max_pivot: f64,
    /// ‖Mx − b‖ / ‖b‖.
    pub residual: f64,
    /// Stored entries of the factor.
    pub envelope: usize,
}

impl SparseSymmetric {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz_lower(&self) -> usize {
        self.val.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |p| (self.col[p], self.val[p]))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                y[i] += v * x[j];
                if j != i {
                    y[j] += v * x[i];
                }
            }
        }
        y
    }

    /// Largest absolute entry.
    pub fn norm_max(&self) -> f64 {
        self.val.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn neighbours(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for i in 0..self.n {
            for (j, _) in self.row(i) {
                if j != i {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        adj
    }

    /// Solves M x = b by envelope Cholesky in reverse Cuthill-McKee order.
    pub fn solve_spd(&self, b: &[f64]) -> Result<(Vec<f64>, SolveInfo), LinalgError> {
        self.solve_impl(b, None)
    }

    /// Solves (M + c cᵀ) x = b. Used to pin the constant mode of singular
    /// Neumann systems without destroying sparsity of M itself.
    pub fn solve_spd_rank_one(&self, c: &[f64], b: &[f64]) -> Result<(Vec<f64>, SolveInfo), LinalgError> {
        self.solve_impl(b, Some(c))
    }

    /// Factor M (or M + c cᵀ) once for repeated solves.
    pub fn factor_spd(&self, c: Option<&[f64]>) -> Result<SpdFactor, LinalgError> {
        if let Some(c) = c {
            if c.len() != self.n {
                return Err(LinalgError::Dimension(self.n, c.len()));
            }
        }
        if self.val.iter().chain(c.unwrap_or(&[])).any(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        self.factor_impl(c)
    }

    fn factor_impl(&self, c: Option<&[f64]>) -> Result<SpdFactor, LinalgError> {
        let perm = rcm_ordering(self);
        let mut inv = vec![0; self.n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let chol = Envelope::factor(self, &perm, &inv, c)?;
        Ok(SpdFactor { perm, chol })
    }

    fn solve_impl(&self, b: &[f64], c: Option<&[f64]>) -> Result<(Vec<f64>, SolveInfo), LinalgError> {
        if b.len() != self.n {
            return Err(LinalgError::Dimension(self.n, b.len()));
        }
        if self.val.iter().chain(b).any(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        let fac = self.factor_impl(c)?;
        let x = fac.solve(b);
        let mut r = self.matvec(&x);
        if let Some(c) = c {
            let cx: f64 = c.iter().zip(&x).map(|(a, b)| a * b).sum();
            r.iter_mut().zip(c).for_each(|(ri, ci)| *ri += ci * cx);
        }
        let rn: f64 = r.iter().zip(b).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let bn: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        let info = SolveInfo {
            min_pivot: fac.chol.min_pivot,
            max_pivot: fac.chol.max_pivot,
            residual: if bn > 0.0 { rn / bn } else { rn },
            envelope: fac.chol.val.len(),
        };
        Ok((x, info))
    }
}

/// Envelope Cholesky factor in its own (RCM) ordering.
pub struct SpdFactor {
    perm: Vec<usize>,
    chol: Envelope,
}

impl SpdFactor {
    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn min_pivot(&self) -> f64 {
        self.chol.min_pivot
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let pb: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        let px = self.chol.solve(&pb);
        let mut x = vec![0.0; pb.len()];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = px[new];
        }
        x
    }
}

/// Reverse Cuthill-McKee ordering; `perm[new] = old`. Each connected
/// component starts from a pseudo-peripheral vertex.
pub fn rcm_ordering(m: &SparseSymmetric) -> Vec<usize> {
    let n = m.n();
    let mut adj = m.neighbours();
    for a in adj.iter_mut() {
        a.sort_unstable();
        a.dedup();
    }
    let deg: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);

    let bfs_levels = |root: usize, placed: &[bool]| -> Vec<Vec<usize>> {
        let mut seen = placed.to_vec();
        seen[root] = true;
        let mut levels = vec![vec![root]];
        loop {
            let mut next = Vec::new();
            for &v in levels.last().unwrap() {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                return levels;
            }
            levels.push(next);
        }
    };

    for start in 0..n {
        if placed[start] {
            continue;
        }
        // lowest-degree vertex of this component
        let comp: Vec<usize> = bfs_levels(start, &placed).concat();
        let mut root = *comp.iter().min_by_key(|&&v| (deg[v], v)).unwrap();
        let mut ecc = bfs_levels(root, &placed).len();
        loop {
            let levels = bfs_levels(root, &placed);
            let cand = *levels.last().unwrap().iter().min_by_key(|&&v| (deg[v], v)).unwrap();
            let e = bfs_levels(cand, &placed).len();
            if e > ecc {
                root = cand;
                ecc = e;
            } else {
                break;
            }
        }
        let mut queue = VecDeque::from([root]);
        placed[root] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = adj[v].iter().copied().filter(|&w| !placed[w]).collect();
            nb.sort_by_key(|&w| (deg[w], w));
            for w in nb {
                placed[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Row-oriented envelope (skyline) Cholesky factor L Lᵀ.
struct Envelope {
    first: Vec<usize>,
    start: Vec<usize>,
    val: Vec<f64>,
    min_pivot: f64,
    max_pivot: f64,
}

impl Envelope {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.val[self.start[i] + j - self.first[i]]
    }

    #[allow(clippy::needless_range_loop)]
    fn factor(m: &SparseSymmetric, perm: &[usize], inv: &[usize], c: Option<&[f64]>) -> Result<Envelope, LinalgError> {
        let n = m.n();
        let mut first: Vec<usize> = (0..n).collect();
        for i in 0..n {
            for (j, _) in m.row(i) {
                let (a, b) = (inv[i], inv[j]);
                let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
                first[hi] = first[hi].min(lo);
            }
        }
        // rows of the rank-one support reach back to its first member
        let pc: Option<Vec<f64>> = c.map(|c| perm.iter().map(|&o| c[o]).collect());
        if let Some(pc) = &pc {
            if let Some(f0) = pc.iter().position(|&v| v != 0.0) {
                for i in f0..n {
                    if pc[i] != 0.0 {
                        first[i] = first[i].min(f0);
                    }
                }
            }
        }
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut val = vec![0.0; start[n]];
        for i in 0..n {
            for (j, v) in m.row(i) {
                let (a, b) = (inv[i], inv[j]);
                let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
                val[start[hi] + lo - first[hi]] += v;
            }
        }
        if let Some(pc) = &pc {
            for i in 0..n {
                if pc[i] == 0.0 {
                    continue;
                }
                for j in first[i]..=i {
                    val[start[i] + j - first[i]] += pc[i] * pc[j];
                }
            }
        }
        let scale = (0..n).map(|i| val[start[i + 1] - 1].abs()).fold(0.0, f64::max);
        let mut e = Envelope {
            first,
            start,
            val,
            min_pivot: f64::INFINITY,
            max_pivot: 0.0,
        };
        for i in 0..n {
            let fi = e.first[i];
            let si = e.start[i];
            for j in fi..i {
                let fj = e.first[j];
                let k0 = fi.max(fj);
                let sj = e.start[j];
                let mut s = e.val[si + j - fi];
                let (ri, rj) = (&e.val[si + k0 - fi..si + j - fi], &e.val[sj + k0 - fj..sj + j - fj]);
                s -= ri.iter().zip(rj).map(|(a, b)| a * b).sum::<f64>();
                let ljj = e.val[sj + j - fj];
                e.val[si + j - fi] = s / ljj;
            }
            let row = &e.val[si..si + i - fi];
            let d = e.val[si + i - fi] - row.iter().map(|v| v * v).sum::<f64>();
            let positive = d > 1e-14 * scale;
            if !positive {
                return Err(LinalgError::NotSpd { row: perm[i], pivot: d });
            }
            e.min_pivot = e.min_pivot.min(d);
            e.max_pivot = e.max_pivot.max(d);
            e.val[si + i - fi] = d.sqrt();
        }
        Ok(e)
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut y = b.to_vec();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.val[self.start[i]..self.start[i] + i - fi];
            let s: f64 = row.iter().zip(&y[fi..i]).map(|(a, b)| a * b).sum();
            y[i] = (y[i] - s) / self.at(i, i);
        }
        for i in (0..n).rev() {
            y[i] /= self.at(i, i);
            let fi = self.first[i];
            let yi = y[i];
            let row = &self.val[self.start[i]..self.start[i] + i - fi];
            for (k, a) in row.iter().enumerate() {
                y[fi + k] -= a * yi;
            }
        }
        y
    }
}
