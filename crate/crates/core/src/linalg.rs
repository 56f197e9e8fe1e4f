//! Dense matrices over complex numbers or scalar expressions.

use crate::expr::{Evaluator, Expr};
use crate::jet::C64;
use std::collections::HashMap;
use std::fmt::Debug;

/// Ring operations shared by pointwise values and field expressions.
pub trait Scalar: Clone + Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_c64(z: C64) -> Self;
    fn sadd(&self, o: &Self) -> Self;
    fn ssub(&self, o: &Self) -> Self;
    fn smul(&self, o: &Self) -> Self;
    fn sneg(&self) -> Self;
    /// Structural zero test (exact for numbers, folded-constant for expressions).
    fn is_zero_s(&self) -> bool;

    fn from_f64(x: f64) -> Self {
        Self::from_c64(C64::new(x, 0.0))
    }
}

impl Scalar for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn from_c64(z: C64) -> Self {
        z
    }
    fn sadd(&self, o: &Self) -> Self {
        self + o
    }
    fn ssub(&self, o: &Self) -> Self {
        self - o
    }
    fn smul(&self, o: &Self) -> Self {
        self * o
    }
    fn sneg(&self) -> Self {
        -self
    }
    fn is_zero_s(&self) -> bool {
        *self == C64::new(0.0, 0.0)
    }
}

impl Scalar for Expr {
    fn zero() -> Self {
        Expr::zero()
    }
    fn one() -> Self {
        Expr::one()
    }
    fn from_c64(z: C64) -> Self {
        Expr::constant(z)
    }
    fn sadd(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn ssub(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn smul(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn sneg(&self) -> Self {
        self.neg()
    }
    fn is_zero_s(&self) -> bool {
        self.is_zero()
    }
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<S = C64> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Mat::from_fn(n, n, |i, j| if i == j { S::one() } else { S::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    /// # Panics
    /// If the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix rows");
        Mat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[S] {
        &self.data
    }

    pub fn row(&self, i: usize) -> Vec<S> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn map<T: Scalar>(&self, f: impl FnMut(&S) -> T) -> Mat<T> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "matrix shape mismatch");
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.sadd(b)).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "matrix shape mismatch");
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.ssub(b)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.map(|a| a.sneg())
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map(|a| s.smul(a))
    }

    pub fn matmul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "matrix shape mismatch");
        Mat::from_fn(self.rows, o.cols, |i, j| {
            let mut acc = S::zero();
            for k in 0..self.cols {
                let a = self.get(i, k);
                let b = o.get(k, j);
                if a.is_zero_s() || b.is_zero_s() {
                    continue;
                }
                acc = acc.sadd(&a.smul(b));
            }
            acc
        })
    }

    pub fn apply(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = S::zero();
                for (k, x) in v.iter().enumerate() {
                    let a = self.get(i, k);
                    if a.is_zero_s() || x.is_zero_s() {
                        continue;
                    }
                    acc = acc.sadd(&a.smul(x));
                }
                acc
            })
            .collect()
    }

    /// Outer product u vᵀ.
    pub fn outer(u: &[S], v: &[S]) -> Self {
        Mat::from_fn(u.len(), v.len(), |i, j| u[i].smul(&v[j]))
    }
}

impl Mat<C64> {
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn from_real(rows: Vec<Vec<f64>>) -> Self {
        Mat::from_rows(rows.into_iter().map(|r| r.into_iter().map(|x| C64::new(x, 0.0)).collect()).collect())
    }

    /// Gaussian elimination with partial pivoting; `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.rows;
        assert_eq!(n, self.cols, "inverse of a non-square matrix");
        let mut a = self.clone();
        let mut inv = Mat::<C64>::identity(n);
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let piv = (col..n).max_by(|&i, &j| a.get(i, col).norm().total_cmp(&a.get(j, col).norm()))?;
            if a.get(piv, col).norm() <= 1e-14 * scale {
                return None;
            }
            if piv != col {
                for j in 0..n {
                    a.data.swap(piv * n + j, col * n + j);
                    inv.data.swap(piv * n + j, col * n + j);
                }
            }
            let p = *a.get(col, col);
            for j in 0..n {
                a.data[col * n + j] /= p;
                inv.data[col * n + j] /= p;
            }
            for i in 0..n {
                if i == col {
                    continue;
                }
                let f = *a.get(i, col);
                if f == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    let (av, iv) = (*a.get(col, j), *inv.get(col, j));
                    a.data[i * n + j] -= f * av;
                    inv.data[i * n + j] -= f * iv;
                }
            }
        }
        Some(inv)
    }

    pub fn solve(&self, b: &[C64]) -> Option<Vec<C64>> {
        Some(self.inverse()?.apply(b))
    }
}

impl Mat<Expr> {
    pub fn eval(&self, ev: &mut Evaluator) -> Mat<C64> {
        self.map(|e| ev.value(e))
    }

    pub fn partial(&self, var: usize) -> Mat<Expr> {
        self.map(|e| e.partial(var))
    }

    pub fn from_real(rows: Vec<Vec<f64>>) -> Self {
        Mat::from_rows(rows.into_iter().map(|r| r.into_iter().map(Expr::real).collect()).collect())
    }

    /// Symbolic determinant by memoized Laplace expansion.
    pub fn det(&self) -> Expr {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let mut memo = HashMap::new();
        self.minor(full, full, &mut memo)
    }

    fn minor(&self, rmask: u64, cmask: u64, memo: &mut HashMap<(u64, u64), Expr>) -> Expr {
        if rmask == 0 {
            return Expr::one();
        }
        if let Some(e) = memo.get(&(rmask, cmask)) {
            return e.clone();
        }
        let r = rmask.trailing_zeros() as usize;
        let mut acc = Expr::zero();
        let mut sign = 1.0;
        for c in 0..self.cols {
            if cmask & (1u64 << c) == 0 {
                continue;
            }
            let a = self.get(r, c);
            if !a.is_zero() {
                let sub = self.minor(rmask & !(1u64 << r), cmask & !(1u64 << c), memo);
                let term = a.mul(&sub);
                acc = if sign > 0.0 { acc.add(&term) } else { acc.sub(&term) };
            }
            sign = -sign;
        }
        memo.insert((rmask, cmask), acc.clone());
        acc
    }

    /// Symbolic inverse via the adjugate. Singularity shows up as a
    /// non-finite value on evaluation.
    pub fn inverse(&self) -> Mat<Expr> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let full = (1u64 << n) - 1;
        let mut memo = HashMap::new();
        let det = self.minor(full, full, &mut memo);
        Mat::from_fn(n, n, |i, j| {
            // inv[i][j] = (-1)^{i+j} M_{ji} / det
            let m = self.minor(full & !(1u64 << j), full & !(1u64 << i), &mut memo);
            let m = if (i + j) % 2 == 0 { m } else { m.neg() };
            m.div(&det)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::eval_at;

    #[test]
    fn numeric_inverse() {
        let a = Mat::<C64>::from_real(vec![vec![2.0, 1.0, 0.0], vec![0.0, 0.0, 3.0], vec![1.0, 0.0, 1.0]]);
        let inv = a.inverse().unwrap();
        assert!(a.matmul(&inv).sub(&Mat::identity(3)).max_abs() < 1e-14);
        let sing = Mat::<C64>::from_real(vec![vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(sing.inverse().is_none());
    }

    #[test]
    fn symbolic_inverse_matches_numeric() {
        let x = Expr::var(0);
        let y = Expr::var(1);
        let m = Mat::from_rows(vec![
            vec![x.clone(), Expr::one(), y.clone()],
            vec![Expr::zero(), x.mul(&y), Expr::real(2.0)],
            vec![y.sin(), Expr::zero(), Expr::real(3.0)],
        ]);
        let p = [0.7, -1.2];
        let num = m.map(|e| eval_at(e, &p));
        let sym = m.inverse().map(|e| eval_at(e, &p));
        assert!(sym.sub(&num.inverse().unwrap()).max_abs() < 1e-12);
        let det = eval_at(&m.det(), &p);
        // direct cofactor expansion along the first row
        let g = |i: usize, j: usize| *num.get(i, j);
        let d = g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1)) - g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0))
            + g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0));
        assert!((det - d).norm() < 1e-12);
    }
}
