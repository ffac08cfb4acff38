//! Dense linear algebra over a [`Field`]: reduced row echelon form, kernels,
//! particular solutions and certified ranks.

use crate::field::modp::{rank_mod_p, ModPrime};
use crate::field::Field;
use num_integer::Integer;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Field> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![F::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, F::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<F>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        let data: Vec<F> = rows.into_iter().flatten().collect();
        assert_eq!(data.len(), r * c, "ragged rows");
        Matrix { rows: r, cols: c, data }
    }

    /// Matrix whose columns are the given vectors (all of length `rows`).
    pub fn from_columns(rows: usize, cols: &[Vec<F>]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            for (i, x) in col.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &F {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: F) {
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<F> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn mul_vec(&self, x: &[F]) -> Vec<F> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = F::zero();
                for (a, b) in self.row(i).iter().zip(x) {
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.add(&a.mul(b));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn mul(&self, o: &Matrix<F>) -> Matrix<F> {
        assert_eq!(self.cols, o.rows);
        let mut m = Matrix::<F>::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        let v = m.get(i, j).add(&a.mul(b));
                        m.set(i, j, v);
                    }
                }
            }
        }
        m
    }

    pub fn transpose(&self) -> Matrix<F> {
        let mut m = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.get(i, j).clone());
            }
        }
        m
    }

    /// Horizontal concatenation `[self | o]`.
    pub fn hcat(&self, o: &Matrix<F>) -> Matrix<F> {
        assert_eq!(self.rows, o.rows);
        let mut m = Matrix::zeros(self.rows, self.cols + o.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j).clone());
            }
            for j in 0..o.cols {
                m.set(i, self.cols + j, o.get(i, j).clone());
            }
        }
        m
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// `row[dst] -= f · row[src]`, columns from `from` on.
    fn axpy_rows(&mut self, dst: usize, src: usize, f: &F, from: usize) {
        for j in from..self.cols {
            let s = &self.data[src * self.cols + j];
            if s.is_zero() {
                continue;
            }
            let t = f.mul(s);
            let d = &mut self.data[dst * self.cols + j];
            *d = d.sub(&t);
        }
    }

    fn scale_row(&mut self, i: usize, f: &F, from: usize) {
        for j in from..self.cols {
            let d = &mut self.data[i * self.cols + j];
            if !d.is_zero() {
                *d = d.mul(f);
            }
        }
    }

    pub fn rank(&self) -> usize {
        Rref::new(self, false).rank()
    }

    /// Rank, certified through a modular reduction when that already proves
    /// full rank; otherwise computed exactly.
    pub fn rank_certified(&self) -> usize {
        let full = self.rows.min(self.cols);
        if full == 0 {
            return 0;
        }
        if F::is_exact() {
            let n = self.data.iter().fold(1u64, |acc, x| acc.lcm(&x.conductor()));
            let ctx = ModPrime::for_conductor(n, 0);
            let reduced: Option<Vec<u64>> = self.data.iter().map(|x| x.reduce_mod_p(&ctx)).collect();
            if let Some(r) = reduced {
                if rank_mod_p(self.rows, self.cols, r, ctx.p) == full {
                    return full;
                }
            }
        }
        self.rank()
    }
}

/// Reduced row echelon form `R = T·A` of a matrix `A`, with the pivot columns
/// and optionally the row-operation transform `T`.
#[derive(Clone, Debug)]
pub struct Rref<F> {
    reduced: Matrix<F>,
    pivots: Vec<usize>,
    transform: Option<Matrix<F>>,
}

impl<F: Field> Rref<F> {
    pub fn new(a: &Matrix<F>, with_transform: bool) -> Self {
        let mut m = a.clone();
        let mut t = if with_transform { Some(Matrix::identity(a.rows)) } else { None };
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let mut best: Option<(usize, f64)> = None;
            for i in r..m.rows {
                let x = m.get(i, c);
                if !x.is_zero() {
                    let w = x.pivot_weight();
                    if best.map(|(_, bw)| w > bw).unwrap_or(true) {
                        best = Some((i, w));
                    }
                }
            }
            let Some((p, _)) = best else { continue };
            m.swap_rows(p, r);
            if let Some(t) = t.as_mut() {
                t.swap_rows(p, r);
            }
            let inv = m.get(r, c).inv().expect("nonzero pivot");
            m.scale_row(r, &inv, c);
            if let Some(t) = t.as_mut() {
                t.scale_row(r, &inv, 0);
            }
            m.set(r, c, F::one());
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let f = m.get(i, c).clone();
                if f.is_zero() {
                    continue;
                }
                m.axpy_rows(i, r, &f, c);
                m.set(i, c, F::zero());
                if let Some(t) = t.as_mut() {
                    t.axpy_rows(i, r, &f, 0);
                }
            }
            pivots.push(c);
            r += 1;
        }
        Rref { reduced: m, pivots, transform: t }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn reduced(&self) -> &Matrix<F> {
        &self.reduced
    }

    /// Basis of the right kernel, one vector per free column.
    pub fn kernel(&self) -> Vec<Vec<F>> {
        let cols = self.reduced.cols;
        let mut is_pivot = vec![false; cols];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        (0..cols)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut x = vec![F::zero(); cols];
                x[f] = F::one();
                for (i, &p) in self.pivots.iter().enumerate() {
                    x[p] = self.reduced.get(i, f).neg();
                }
                x
            })
            .collect()
    }

    /// A solution of `A x = b` with free variables set to zero, or the index
    /// of the first inconsistent row of `T b`. Needs the transform.
    pub fn solve(&self, b: &[F]) -> std::result::Result<Vec<F>, usize> {
        let t = self.transform.as_ref().expect("rref built without transform");
        let y = t.mul_vec(b);
        if let Some(bad) = (self.rank()..y.len()).find(|&i| !y[i].is_zero()) {
            return Err(bad);
        }
        let mut x = vec![F::zero(); self.reduced.cols];
        for (i, &p) in self.pivots.iter().enumerate() {
            x[p] = y[i].clone();
        }
        Ok(x)
    }
}
