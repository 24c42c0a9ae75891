//! Exact linear algebra over the Gaussian rationals.

use std::collections::{BTreeMap, HashMap};

use super::gauss::GaussianRational as Gq;

/// Sparse row: strictly increasing column indices, nonzero values.
pub type SparseRow = Vec<(usize, Gq)>;

/// Incrementally maintained reduced row echelon form.
#[derive(Clone, Debug, Default)]
pub struct Rref {
    ncols: usize,
    rows: Vec<SparseRow>,
    pivot_row: HashMap<usize, usize>,
}

impl Rref {
    pub fn new(ncols: usize) -> Self {
        Self {
            ncols,
            ..Default::default()
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn pivot_columns(&self) -> Vec<usize> {
        let mut p: Vec<usize> = self.pivot_row.keys().copied().collect();
        p.sort_unstable();
        p
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    /// Reduces `row` against the current pivots without inserting it.
    pub fn reduce(&self, row: impl IntoIterator<Item = (usize, Gq)>) -> BTreeMap<usize, Gq> {
        let mut acc: BTreeMap<usize, Gq> = BTreeMap::new();
        for (c, v) in row {
            if v.is_zero() {
                continue;
            }
            let e = acc.entry(c).or_default();
            *e += &v;
            if e.is_zero() {
                acc.remove(&c);
            }
        }
        let hits: Vec<usize> = acc
            .keys()
            .copied()
            .filter(|c| self.pivot_row.contains_key(c))
            .collect();
        for c in hits {
            let Some(v) = acc.get(&c).cloned() else { continue };
            for (cc, pv) in &self.rows[self.pivot_row[&c]] {
                let e = acc.entry(*cc).or_default();
                *e -= &(&v * pv);
                if e.is_zero() {
                    acc.remove(cc);
                }
            }
        }
        acc
    }

    /// Adds an equation; returns false if it was already implied.
    pub fn insert(&mut self, row: impl IntoIterator<Item = (usize, Gq)>) -> bool {
        let reduced = self.reduce(row);
        let Some((&pc, pv)) = reduced.iter().next() else {
            return false;
        };
        let inv = pv.inv().expect("nonzero pivot");
        let new_row: SparseRow = reduced.iter().map(|(c, v)| (*c, v * &inv)).collect();
        for r in self.rows.iter_mut() {
            let Ok(pos) = r.binary_search_by_key(&pc, |e| e.0) else { continue };
            let factor = r[pos].1.clone();
            let mut merged: BTreeMap<usize, Gq> = r.drain(..).collect();
            for (c, v) in &new_row {
                let e = merged.entry(*c).or_default();
                *e -= &(&factor * v);
                if e.is_zero() {
                    merged.remove(c);
                }
            }
            *r = merged.into_iter().collect();
        }
        self.pivot_row.insert(pc, self.rows.len());
        self.rows.push(new_row);
        true
    }

    /// Basis of the nullspace: one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<Gq>> {
        let mut out = Vec::new();
        for free in 0..self.ncols {
            if self.pivot_row.contains_key(&free) {
                continue;
            }
            let mut v = vec![Gq::zero(); self.ncols];
            v[free] = Gq::one();
            for r in &self.rows {
                if let Ok(pos) = r.binary_search_by_key(&free, |e| e.0) {
                    v[r[0].0] = -&r[pos].1;
                }
            }
            out.push(v);
        }
        out
    }
}

/// Solves `A x = b` for dense `A` (rows) and returns one solution if consistent.
pub fn solve(a: &[Vec<Gq>], b: &[Gq]) -> Option<Vec<Gq>> {
    let ncols = a.first().map_or(0, |r| r.len());
    let mut rref = Rref::new(ncols + 1);
    for (row, rhs) in a.iter().zip(b) {
        let entries = row
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(c, v)| (c, v.clone()))
            .chain(std::iter::once((ncols, -rhs)));
        rref.insert(entries);
    }
    if rref.pivot_row.contains_key(&ncols) {
        return None;
    }
    let mut x = vec![Gq::zero(); ncols];
    for r in &rref.rows {
        if let Ok(pos) = r.binary_search_by_key(&ncols, |e| e.0) {
            x[r[0].0] = -&r[pos].1;
        }
    }
    Some(x)
}

/// Dense square or rectangular matrix over the Gaussian rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Gq>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Gq::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Gq::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Gq>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> &Gq {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Gq) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn mul(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.cols, o.rows);
        let mut out = Matrix::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        let idx = i * out.cols + j;
                        out.data[idx] += &(a * b);
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, o: &Matrix) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Matrix) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: &Gq) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<Gq> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row_vec(&self, i: usize) -> Vec<Gq> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    fn to_rref(&self) -> Rref {
        let mut r = Rref::new(self.cols);
        for i in 0..self.rows {
            r.insert(
                self.row_vec(i)
                    .into_iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero()),
            );
        }
        r
    }

    pub fn rank(&self) -> usize {
        self.to_rref().rank()
    }

    /// Basis of `{v : M v = 0}`.
    pub fn nullspace(&self) -> Vec<Vec<Gq>> {
        self.to_rref().nullspace()
    }

    /// Determinant by Gaussian elimination.
    pub fn det(&self) -> Gq {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Gq::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| !m.get(r, c).is_zero()) else {
                return Gq::zero();
            };
            if p != c {
                for j in 0..n {
                    m.data.swap(p * n + j, c * n + j);
                }
                det = -det;
            }
            let pv = m.get(c, c).clone();
            det = &det * &pv;
            let inv = pv.inv().unwrap();
            for r in c + 1..n {
                let f = m.get(r, c) * &inv;
                if f.is_zero() {
                    continue;
                }
                for j in c..n {
                    let v = m.get(r, j) - &(&f * m.get(c, j));
                    m.set(r, j, v);
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<Matrix> {
        let n = self.rows;
        let mut out = Matrix::zeros(n, n);
        let rows: Vec<Vec<Gq>> = (0..n).map(|i| self.row_vec(i)).collect();
        for j in 0..n {
            let mut e = vec![Gq::zero(); n];
            e[j] = Gq::one();
            let x = solve(&rows, &e)?;
            for i in 0..n {
                out.set(i, j, x[i].clone());
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: i64) -> Gq {
        Gq::from_int(n)
    }

    #[test]
    fn nullspace_and_solve() {
        let m = Matrix::from_rows(vec![vec![g(1), g(2), g(3)], vec![g(2), g(4), g(6)]]);
        let ns = m.nullspace();
        assert_eq!(ns.len(), 2);
        for v in &ns {
            let prod = m.mul(&Matrix::from_rows(v.iter().map(|x| vec![x.clone()]).collect()));
            assert!(prod.is_zero());
        }
        let a = vec![vec![g(1), g(1)], vec![g(1), g(-1)]];
        assert_eq!(solve(&a, &[g(3), g(1)]), Some(vec![g(2), g(1)]));
        assert_eq!(solve(&[vec![g(1)], vec![g(1)]], &[g(1), g(2)]), None);
    }

    #[test]
    fn determinant_and_inverse() {
        let m = Matrix::from_rows(vec![vec![g(0), g(2)], vec![g(3), g(1)]]);
        assert_eq!(m.det(), g(-6));
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Matrix::identity(2));
        assert!(Matrix::from_rows(vec![vec![g(1), g(1)], vec![g(1), g(1)]]).inverse().is_none());
    }
}
