//! Truncated multivariate Taylor polynomials.
//!
//! A [`Taylor`] of order `K` in `n` variables stores every Taylor coefficient
//! up to total degree `K` around a base point. Monomials are kept in graded
//! order, so the coefficients of a lower order are a prefix of the higher
//! order ones and truncation is a slice.

use num_complex::Complex64;
use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

pub type C64 = Complex64;

struct Table {
    nvars: usize,
    order: usize,
    exps: Vec<Vec<u8>>,
    /// `offsets[d]` is the index of the first monomial of degree `d`.
    offsets: Vec<usize>,
    /// (a, b, c): coefficient a times coefficient b contributes to c.
    products: Vec<(u32, u32, u32)>,
    /// Per variable: (src, dst, factor) for the partial derivative.
    derivs: Vec<Vec<(u32, u32, f64)>>,
}

fn monomials_of_degree(nvars: usize, degree: usize, out: &mut Vec<Vec<u8>>) {
    fn rec(pos: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left as u8;
            out.push(cur.clone());
            return;
        }
        for k in (0..=left).rev() {
            cur[pos] = k as u8;
            rec(pos + 1, left - k, cur, out);
        }
    }
    if nvars == 0 {
        if degree == 0 {
            out.push(Vec::new());
        }
        return;
    }
    let mut cur = vec![0u8; nvars];
    rec(0, degree, &mut cur, out);
}

impl Table {
    fn build(nvars: usize, order: usize) -> Table {
        let mut exps = Vec::new();
        let mut offsets = Vec::with_capacity(order + 2);
        for d in 0..=order {
            offsets.push(exps.len());
            monomials_of_degree(nvars, d, &mut exps);
        }
        offsets.push(exps.len());
        let index: HashMap<Vec<u8>, usize> =
            exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let deg = |e: &[u8]| e.iter().map(|&v| v as usize).sum::<usize>();
        let mut products = Vec::new();
        for (a, ea) in exps.iter().enumerate() {
            for (b, eb) in exps.iter().enumerate() {
                if deg(ea) + deg(eb) > order {
                    continue;
                }
                let sum: Vec<u8> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                products.push((a as u32, b as u32, index[&sum] as u32));
            }
        }
        let mut derivs = vec![Vec::new(); nvars];
        for (v, list) in derivs.iter_mut().enumerate() {
            for (src, e) in exps.iter().enumerate() {
                if e[v] == 0 {
                    continue;
                }
                let mut lower = e.clone();
                lower[v] -= 1;
                list.push((src as u32, index[&lower] as u32, e[v] as f64));
            }
        }
        Table { nvars, order, exps, offsets, products, derivs }
    }

    fn len(&self) -> usize {
        self.exps.len()
    }
}

thread_local! {
    static TABLES: RefCell<HashMap<(usize, usize), Rc<Table>>> = RefCell::new(HashMap::new());
}

fn table(nvars: usize, order: usize) -> Rc<Table> {
    TABLES.with(|t| {
        t.borrow_mut()
            .entry((nvars, order))
            .or_insert_with(|| Rc::new(Table::build(nvars, order)))
            .clone()
    })
}

/// Truncated Taylor expansion around a fixed base point.
#[derive(Clone)]
pub struct Taylor {
    table: Rc<Table>,
    c: Vec<C64>,
}

impl std::fmt::Debug for Taylor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Taylor")
            .field("nvars", &self.table.nvars)
            .field("order", &self.table.order)
            .field("coeffs", &self.c)
            .finish()
    }
}

impl Taylor {
    pub fn constant(nvars: usize, order: usize, value: C64) -> Taylor {
        let table = table(nvars, order);
        let mut c = vec![C64::new(0.0, 0.0); table.len()];
        c[0] = value;
        Taylor { table, c }
    }

    /// The coordinate function `x_var` expanded around `value`.
    pub fn variable(nvars: usize, order: usize, var: usize, value: f64) -> Taylor {
        let mut t = Taylor::constant(nvars, order, C64::new(value, 0.0));
        if order >= 1 {
            // degree-one monomials are listed as e_0, e_1, ... in that order
            t.c[1 + var] = C64::new(1.0, 0.0);
        }
        t
    }

    pub fn nvars(&self) -> usize {
        self.table.nvars
    }

    pub fn order(&self) -> usize {
        self.table.order
    }

    pub fn value(&self) -> C64 {
        self.c[0]
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.c
    }

    /// Exponent vector of every stored coefficient.
    pub fn exponents(&self) -> Vec<Vec<u8>> {
        self.table.exps.clone()
    }

    pub fn truncate(&self, order: usize) -> Taylor {
        if order >= self.order() {
            return self.clone();
        }
        let table = table(self.nvars(), order);
        let c = self.c[..table.len()].to_vec();
        Taylor { table, c }
    }

    fn common(&self, other: &Taylor) -> (Taylor, Taylor) {
        let k = self.order().min(other.order());
        (self.truncate(k), other.truncate(k))
    }

    pub fn add(&self, other: &Taylor) -> Taylor {
        let (mut a, b) = self.common(other);
        for (x, y) in a.c.iter_mut().zip(&b.c) {
            *x += y;
        }
        a
    }

    pub fn sub(&self, other: &Taylor) -> Taylor {
        let (mut a, b) = self.common(other);
        for (x, y) in a.c.iter_mut().zip(&b.c) {
            *x -= y;
        }
        a
    }

    pub fn neg(&self) -> Taylor {
        let mut a = self.clone();
        for x in a.c.iter_mut() {
            *x = -*x;
        }
        a
    }

    pub fn scale(&self, s: C64) -> Taylor {
        let mut a = self.clone();
        for x in a.c.iter_mut() {
            *x *= s;
        }
        a
    }

    pub fn mul(&self, other: &Taylor) -> Taylor {
        let (a, b) = self.common(other);
        let mut c = vec![C64::new(0.0, 0.0); a.c.len()];
        for &(i, j, k) in &a.table.products {
            c[k as usize] += a.c[i as usize] * b.c[j as usize];
        }
        Taylor { table: a.table, c }
    }

    /// Partial derivative in `var`; the result has one order less.
    pub fn deriv(&self, var: usize) -> Taylor {
        assert!(self.order() >= 1, "cannot differentiate an order-0 expansion");
        let table = table(self.nvars(), self.order() - 1);
        let mut c = vec![C64::new(0.0, 0.0); table.len()];
        for &(src, dst, factor) in &self.table.derivs[var] {
            if (dst as usize) < c.len() {
                c[dst as usize] += self.c[src as usize] * factor;
            }
        }
        Taylor { table, c }
    }

    /// `f(self)` for a univariate `f` given its derivatives `f^(j)(u0)`,
    /// `j = 0..=order`, at the constant term `u0`.
    pub fn compose(&self, derivs: &[C64]) -> Taylor {
        let order = self.order();
        let mut h = self.clone();
        h.c[0] = C64::new(0.0, 0.0);
        let mut out = Taylor::constant(self.nvars(), order, derivs[0]);
        let mut power = Taylor::constant(self.nvars(), order, C64::new(1.0, 0.0));
        let mut fact = 1.0;
        for (j, d) in derivs.iter().enumerate().take(order + 1).skip(1) {
            power = power.mul(&h);
            fact *= j as f64;
            out = out.add(&power.scale(*d / fact));
        }
        out
    }

    pub fn recip(&self) -> Taylor {
        let u0 = self.value();
        let mut d = Vec::with_capacity(self.order() + 1);
        let mut fact = 1.0;
        for j in 0..=self.order() {
            if j > 0 {
                fact *= j as f64;
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            d.push(sign * fact / u0.powi(j as i32 + 1));
        }
        self.compose(&d)
    }

    pub fn div(&self, other: &Taylor) -> Taylor {
        self.mul(&other.recip())
    }

    pub fn powi(&self, n: i32) -> Taylor {
        if n < 0 {
            return self.recip().powi(-n);
        }
        let mut result = Taylor::constant(self.nvars(), self.order(), C64::new(1.0, 0.0));
        let mut base = self.clone();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Power with a constant complex exponent.
    pub fn powc(&self, p: C64) -> Taylor {
        let u0 = self.value();
        let mut d = Vec::with_capacity(self.order() + 1);
        let mut coef = C64::new(1.0, 0.0);
        for j in 0..=self.order() {
            d.push(coef * u0.powc(p - j as f64));
            coef *= p - j as f64;
        }
        self.compose(&d)
    }

    pub fn exp(&self) -> Taylor {
        let e = self.value().exp();
        self.compose(&vec![e; self.order() + 1])
    }

    pub fn ln(&self) -> Taylor {
        let u0 = self.value();
        let mut d = vec![u0.ln()];
        let mut fact = 1.0;
        for j in 1..=self.order() {
            if j > 1 {
                fact *= (j - 1) as f64;
            }
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            d.push(sign * fact / u0.powi(j as i32));
        }
        self.compose(&d)
    }

    pub fn sin(&self) -> Taylor {
        let (s, c) = (self.value().sin(), self.value().cos());
        let cycle = [s, c, -s, -c];
        let d: Vec<C64> = (0..=self.order()).map(|j| cycle[j % 4]).collect();
        self.compose(&d)
    }

    pub fn cos(&self) -> Taylor {
        let (s, c) = (self.value().sin(), self.value().cos());
        let cycle = [c, -s, -c, s];
        let d: Vec<C64> = (0..=self.order()).map(|j| cycle[j % 4]).collect();
        self.compose(&d)
    }

    pub fn sqrt(&self) -> Taylor {
        self.powc(C64::new(0.5, 0.0))
    }

    /// Value, gradient and Hessian; requires order ≥ 2.
    pub fn to_jet2(&self) -> Jet2 {
        assert!(self.order() >= 2, "Jet2 needs a second-order expansion");
        let n = self.nvars();
        let grad = (0..n).map(|i| self.c[1 + i]).collect();
        let mut hess = vec![vec![C64::new(0.0, 0.0); n]; n];
        let start = self.table.offsets[2];
        let end = self.table.offsets[3];
        for idx in start..end {
            let e = &self.table.exps[idx];
            let vars: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, e[v] as usize)).collect();
            let (i, j) = (vars[0], vars[1]);
            if i == j {
                hess[i][i] = self.c[idx] * 2.0;
            } else {
                hess[i][j] = self.c[idx];
                hess[j][i] = self.c[idx];
            }
        }
        Jet2 { value: self.c[0], grad, hess }
    }
}

/// Value, gradient and Hessian of a scalar field at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    pub value: C64,
    pub grad: Vec<C64>,
    pub hess: Vec<Vec<C64>>,
}

impl Jet2 {
    /// Largest |hess[i][j] − hess[j][i]|.
    pub fn hess_asymmetry(&self) -> f64 {
        let n = self.grad.len();
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                m = m.max((self.hess[i][j] - self.hess[j][i]).norm());
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn graded_prefix_property() {
        let t3 = table(3, 3);
        let t1 = table(3, 1);
        assert_eq!(&t3.exps[..t1.len()], &t1.exps[..]);
        assert_eq!(t1.exps[1], vec![1, 0, 0]);
        assert_eq!(t1.exps[3], vec![0, 0, 1]);
    }

    #[test]
    fn product_of_variables() {
        let x = Taylor::variable(2, 2, 0, 1.0);
        let y = Taylor::variable(2, 2, 1, 2.0);
        // x^2 y at (1,2): value 2, grad (4, 1), hess [[4, 2], [2, 0]]
        let f = x.mul(&x).mul(&y).to_jet2();
        assert_eq!(f.value, c(2.0));
        assert_eq!(f.grad, vec![c(4.0), c(1.0)]);
        assert_eq!(f.hess, vec![vec![c(4.0), c(2.0)], vec![c(2.0), c(0.0)]]);
    }

    #[test]
    fn derivative_lowers_order() {
        let x = Taylor::variable(1, 3, 0, 0.5);
        let f = x.sin();
        let df = f.deriv(0);
        assert_eq!(df.order(), 2);
        let j = df.to_jet2();
        assert!((j.value - c(0.5f64.cos())).norm() < 1e-15);
        assert!((j.grad[0] - c(-(0.5f64.sin()))).norm() < 1e-15);
        assert!((j.hess[0][0] - c(-(0.5f64.cos()))).norm() < 1e-15);
    }

    #[test]
    fn elementary_functions_agree_with_identities() {
        let x = Taylor::variable(2, 4, 0, 0.3);
        let y = Taylor::variable(2, 4, 1, 1.7);
        let u = x.mul(&y).add(&y);
        let one = u.sin().powi(2).add(&u.cos().powi(2));
        assert!((one.value() - c(1.0)).norm() < 1e-14);
        assert!(one.coeffs()[1..].iter().all(|v| v.norm() < 1e-13));
        let back = u.exp().ln().sub(&u);
        assert!(back.coeffs().iter().all(|v| v.norm() < 1e-13));
        let sq = u.sqrt().mul(&u.sqrt()).sub(&u);
        assert!(sq.coeffs().iter().all(|v| v.norm() < 1e-13));
        let r = u.recip().mul(&u);
        assert!((r.value() - c(1.0)).norm() < 1e-14);
        assert!(r.coeffs()[1..].iter().all(|v| v.norm() < 1e-13));
    }

    #[test]
    fn mixed_orders_truncate() {
        let a = Taylor::variable(2, 3, 0, 1.0);
        let b = Taylor::variable(2, 1, 1, 1.0);
        assert_eq!(a.add(&b).order(), 1);
        assert_eq!(a.mul(&b).order(), 1);
    }

    #[test]
    fn zero_variable_expansion() {
        let a = Taylor::constant(0, 2, c(3.0));
        assert_eq!(a.mul(&a).value(), c(9.0));
    }
}
