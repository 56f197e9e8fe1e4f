#![allow(dead_code)]

use gencontact::gta::{GtEndo, GtVec};
use gencontact::linalg::Mat;
use gencontact::C64;
use proptest::prelude::*;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn cplx() -> impl Strategy<Value = C64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| C64::new(a, b))
}

pub fn gtvec(n: usize) -> impl Strategy<Value = GtVec<C64>> {
    proptest::collection::vec(cplx(), 2 * n).prop_map(|v| GtVec::from_flat(&v))
}

pub fn gtendo(n: usize) -> impl Strategy<Value = GtEndo<C64>> {
    proptest::collection::vec(cplx(), 4 * n * n).prop_map(move |v| {
        let m = Mat::from_fn(2 * n, 2 * n, |i, j| v[i * 2 * n + j]);
        GtEndo::from_mat(&m)
    })
}

/// Random antisymmetric real matrix.
pub fn two_form(n: usize) -> impl Strategy<Value = Mat<C64>> {
    proptest::collection::vec(-2.0f64..2.0, n * n).prop_map(move |v| {
        Mat::from_fn(n, n, |i, j| {
            if i < j {
                c(v[i * n + j])
            } else if i > j {
                c(-v[j * n + i])
            } else {
                c(0.0)
            }
        })
    })
}

pub fn vec_dist(a: &GtVec<C64>, b: &GtVec<C64>) -> f64 {
    a.sub(b).max_abs()
}

use gencontact::expr::Expr;
use gencontact::gta::SectionField;

/// Random polynomial of degree ≤ 2 in `n` variables plus a sin and an exp
/// term.
pub fn field(n: usize) -> impl Strategy<Value = Expr> {
    let monos = (n + 1) * (n + 2) / 2;
    proptest::collection::vec(-1.5f64..1.5, monos + 2).prop_map(move |co| {
        let mut terms = Vec::new();
        let mut k = 0;
        terms.push(Expr::real(co[k]));
        k += 1;
        for i in 0..n {
            terms.push(Expr::var(i).scale(c(co[k])));
            k += 1;
        }
        for i in 0..n {
            for j in i..n {
                terms.push(Expr::var(i).mul(&Expr::var(j)).scale(c(co[k])));
                k += 1;
            }
        }
        let lin = Expr::var(0).add(&Expr::var(n - 1).scale(c(0.5)));
        terms.push(lin.sin().scale(c(co[k])));
        terms.push(Expr::var(n / 2).scale(c(0.3)).exp().scale(c(co[k + 1])));
        Expr::sum(terms.iter())
    })
}

/// Polynomial of degree ≤ 2 only.
pub fn poly(n: usize) -> impl Strategy<Value = Expr> {
    let monos = (n + 1) * (n + 2) / 2;
    proptest::collection::vec(-1.5f64..1.5, monos).prop_map(move |co| {
        let mut terms = vec![Expr::real(co[0])];
        let mut k = 1;
        for i in 0..n {
            terms.push(Expr::var(i).scale(c(co[k])));
            k += 1;
        }
        for i in 0..n {
            for j in i..n {
                terms.push(Expr::var(i).mul(&Expr::var(j)).scale(c(co[k])));
                k += 1;
            }
        }
        Expr::sum(terms.iter())
    })
}

pub fn fields(n: usize, count: usize) -> impl Strategy<Value = Vec<Expr>> {
    proptest::collection::vec(field(n), count)
}

pub fn section(n: usize) -> impl Strategy<Value = SectionField> {
    proptest::collection::vec(poly(n), 2 * n).prop_map(|v| SectionField::from_flat(&v))
}

pub fn point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-0.9f64..0.9, n)
}
