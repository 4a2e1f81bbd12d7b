//! Sparse SPD solver: reverse Cuthill-McKee ordering, envelope Cholesky
//! with iterative refinement, Jacobi-preconditioned CG as fallback.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

/// Compressed sparse row matrix with sorted column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries. Entries are accumulated in input order, so
    /// the result depends only on the triplet sequence.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(i, _, _) in triplets {
            counts[i + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut raw = vec![(0usize, 0.0f64); triplets.len()];
        for &(i, j, v) in triplets {
            raw[fill[i]] = (j, v);
            fill[i] += 1;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            let row = &mut raw[counts[i]..counts[i + 1]];
            // stable sort keeps the accumulation order of duplicates
            row.sort_by_key(|e| e.0);
            for &(j, v) in row.iter() {
                if cols.len() > row_ptr[i] && *cols.last().unwrap() == j {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]];
        match r.binary_search(&j) {
            Ok(k) => self.vals[self.row_ptr[i] + k],
            Err(_) => 0.0,
        }
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Largest `|a_ij − a_ji|` relative to the largest `|a_ij|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                scale = scale.max(v.abs());
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }
}

/// Error-free product: `a*b = p + e`.
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Error-free sum: `a + b = s + e`.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let z = s - a;
    (s, (a - (s - z)) + (b - z))
}

/// Residual `b − A x` evaluated in twice the working precision.
pub fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    (0..a.n)
        .map(|i| {
            let (mut s, mut c) = (b[i], 0.0);
            for (j, v) in a.row(i) {
                let (p, pe) = two_prod(-v, x[j]);
                let (t, te) = two_sum(s, p);
                s = t;
                c += pe + te;
            }
            s + c
        })
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Reverse Cuthill-McKee permutation: `perm[new] = old`.
pub fn rcm(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n;
    let degree: Vec<usize> = (0..n).map(|i| a.row_ptr[i + 1] - a.row_ptr[i]).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &start in &by_degree {
        if visited[start] {
            continue;
        }
        let root = pseudo_peripheral(a, start, &degree);
        visited[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = a.row(v).map(|(j, _)| j).filter(|&j| !visited[j]).collect();
            nb.sort_by_key(|&j| (degree[j], j));
            for j in nb {
                visited[j] = true;
                queue.push_back(j);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(a: &CsrMatrix, root: usize) -> (Vec<usize>, usize) {
    let mut level = vec![usize::MAX; a.n];
    level[root] = 0;
    let mut queue = VecDeque::from([root]);
    let mut last = root;
    while let Some(v) = queue.pop_front() {
        last = v;
        for (j, _) in a.row(v) {
            if level[j] == usize::MAX {
                level[j] = level[v] + 1;
                queue.push_back(j);
            }
        }
    }
    (level, last)
}

fn pseudo_peripheral(a: &CsrMatrix, start: usize, degree: &[usize]) -> usize {
    let mut root = start;
    let (mut levels, _) = bfs_levels(a, root);
    let mut ecc = levels.iter().filter(|&&l| l != usize::MAX).max().copied().unwrap_or(0);
    for _ in 0..8 {
        let candidate = (0..a.n)
            .filter(|&i| levels[i] == ecc)
            .min_by_key(|&i| (degree[i], i))
            .unwrap_or(root);
        let (cl, _) = bfs_levels(a, candidate);
        let ce = cl.iter().filter(|&&l| l != usize::MAX).max().copied().unwrap_or(0);
        if ce <= ecc {
            break;
        }
        root = candidate;
        levels = cl;
        ecc = ce;
    }
    root
}

/// Cholesky factor stored by rows over each row's envelope.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    /// Factors `P A Pᵀ`; `None` on a non-positive pivot.
    pub fn factor(a: &CsrMatrix, perm: Vec<usize>) -> Option<Self> {
        let n = a.n;
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first = vec![0; n];
        for i in 0..n {
            first[i] = a.row(perm[i]).map(|(j, _)| inv[j]).filter(|&j| j <= i).min().unwrap_or(i);
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + (i - first[i] + 1));
        }
        let mut data = vec![0.0; start[n]];
        for i in 0..n {
            for (j, v) in a.row(perm[i]) {
                let jn = inv[j];
                if jn <= i {
                    data[start[i] + jn - first[i]] = v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let lo = fi.max(fj);
                let mut s = data[start[i] + j - fi];
                let ri = &data[start[i] + lo - fi..start[i] + j - fi];
                let rj = &data[start[j] + lo - fj..start[j] + j - fj];
                s -= ri.iter().zip(rj).map(|(x, y)| x * y).sum::<f64>();
                if j < i {
                    data[start[i] + j - fi] = s / data[start[j + 1] - 1];
                } else {
                    if !(s > 0.0) || !s.is_finite() {
                        return None;
                    }
                    data[start[i + 1] - 1] = s.sqrt();
                }
            }
        }
        Some(Self {
            perm,
            first,
            start,
            data,
        })
    }

    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.perm.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let s: f64 = row[..i - fi].iter().zip(&y[fi..i]).map(|(l, x)| l * x).sum();
            y[i] = (y[i] - s) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            y[i] /= row[i - fi];
            let yi = y[i];
            for (l, x) in row[..i - fi].iter().zip(&mut y[fi..i]) {
                *x -= l * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Direct,
    Pcg,
    Trivial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub method: SolveMethod,
    /// Refinement sweeps (direct) or CG iterations.
    pub iterations: usize,
    pub relative_residual: f64,
}

pub const TARGET_RESIDUAL: f64 = 1e-12;
pub const PCG_MAX_ITERATIONS: usize = 1_000_000;

/// Solves `A x = b` for SPD `A`. Returns the best solution found and its
/// statistics; the caller decides whether the residual is acceptable.
pub fn solve_spd(a: &CsrMatrix, b: &[f64]) -> (Vec<f64>, SolveStats) {
    let bn = norm(b);
    if a.n == 0 || bn == 0.0 {
        return (
            vec![0.0; a.n],
            SolveStats {
                method: SolveMethod::Trivial,
                iterations: 0,
                relative_residual: 0.0,
            },
        );
    }
    if let Some(chol) = EnvelopeCholesky::factor(a, rcm(a)) {
        let mut x = chol.solve(b);
        let mut r = residual(a, &x, b);
        let mut rel = norm(&r) / bn;
        let mut sweeps = 0;
        while rel > TARGET_RESIDUAL && sweeps < 10 {
            let d = chol.solve(&r);
            let cand: Vec<f64> = x.iter().zip(&d).map(|(x, d)| x + d).collect();
            let rc = residual(a, &cand, b);
            let relc = norm(&rc) / bn;
            sweeps += 1;
            if !(relc < rel) {
                break;
            }
            x = cand;
            r = rc;
            rel = relc;
        }
        if rel <= TARGET_RESIDUAL {
            return (
                x,
                SolveStats {
                    method: SolveMethod::Direct,
                    iterations: sweeps,
                    relative_residual: rel,
                },
            );
        }
        let (xp, sp) = pcg(a, b, Some(x.clone()));
        if sp.relative_residual < rel {
            return (xp, sp);
        }
        return (
            x,
            SolveStats {
                method: SolveMethod::Direct,
                iterations: sweeps,
                relative_residual: rel,
            },
        );
    }
    pcg(a, b, None)
}

/// Jacobi-preconditioned conjugate gradients.
pub fn pcg(a: &CsrMatrix, b: &[f64], x0: Option<Vec<f64>>) -> (Vec<f64>, SolveStats) {
    let n = a.n;
    let bn = norm(b);
    let dinv: Vec<f64> = a.diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let mut x = x0.unwrap_or_else(|| vec![0.0; n]);
    let mut r = residual(a, &x, b);
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(r, z)| r * z).sum();
    let mut iterations = 0;
    let mut rel = norm(&r) / bn;
    let (mut best, mut best_at) = (rel, 0);
    // give up once the residual has stalled for this many iterations
    let patience = n.max(1000);
    while rel > TARGET_RESIDUAL && iterations < PCG_MAX_ITERATIONS && iterations - best_at < patience {
        let ap = a.mul_vec(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(p, q)| p * q).sum();
        if !(pap > 0.0) {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        iterations += 1;
        if iterations % 50 == 0 {
            r = residual(a, &x, b);
        }
        rel = norm(&r) / bn;
        if rel < 0.5 * best {
            best = rel;
            best_at = iterations;
        }
        for i in 0..n {
            z[i] = r[i] * dinv[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(r, z)| r * z).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rel = norm(&residual(a, &x, b)) / bn;
    (
        x,
        SolveStats {
            method: SolveMethod::Pcg,
            iterations,
            relative_residual: rel,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 1D Laplacian tridiag(-1, 2, -1).
    fn laplace_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, &t)
    }

    #[test]
    fn triplets_sum_duplicates() {
        let m = CsrMatrix::from_triplets(2, &[(0, 1, 1.0), (0, 0, 2.0), (0, 1, 0.5), (1, 1, 3.0)]);
        assert_eq!(m.get(0, 1), 1.5);
        assert_eq!(m.nnz(), 3);
    }

    #[test]
    fn cholesky_solves_1d_laplacian() {
        let a = laplace_1d(50);
        let xs: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let b = a.mul_vec(&xs);
        let (x, st) = solve_spd(&a, &b);
        assert_eq!(st.method, SolveMethod::Direct);
        assert!(st.relative_residual <= 1e-12);
        for (p, q) in x.iter().zip(&xs) {
            assert!((p - q).abs() < 1e-10);
        }
    }

    #[test]
    fn rcm_is_a_permutation() {
        let a = laplace_1d(17);
        let mut p = rcm(&a);
        p.sort_unstable();
        assert_eq!(p, (0..17).collect::<Vec<_>>());
    }

    #[test]
    fn pcg_agrees_with_direct() {
        let a = laplace_1d(40);
        let b: Vec<f64> = (0..40).map(|i| 1.0 + i as f64).collect();
        let (x1, _) = solve_spd(&a, &b);
        let (x2, st) = pcg(&a, &b, None);
        assert!(st.relative_residual <= 1e-12);
        for (p, q) in x1.iter().zip(&x2) {
            assert!((p - q).abs() < 1e-8);
        }
    }

    #[test]
    fn indefinite_matrix_falls_back() {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (1, 1, -1.0)]);
        assert!(EnvelopeCholesky::factor(&a, vec![0, 1]).is_none());
    }

    #[test]
    fn one_dof_identity() {
        let a = CsrMatrix::from_triplets(1, &[(0, 0, 1.0)]);
        let (x, st) = solve_spd(&a, &[3.5]);
        assert_eq!(x, vec![3.5]);
        assert_eq!(st.relative_residual, 0.0);
    }
}
