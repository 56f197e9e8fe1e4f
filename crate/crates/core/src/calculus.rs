//! Exterior calculus on coordinate charts.
//!
//! Forms are stored as full antisymmetric component arrays with
//! `ω_{i1…ik} = ω(∂_{i1}, …, ∂_{ik})`, so `(dη)_{ij} = ∂_iη_j − ∂_jη_i` and
//! `(α∧β)(X,Y) = α(X)β(Y) − α(Y)β(X)`.

use crate::expr::{Evaluator, Expr};
use crate::gta::{GtVec, SectionField};
use crate::jet::C64;
use crate::linalg::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalcError {
    #[error("exterior derivative of a {0}-form is not supported (k ≤ 2)")]
    DegreeTooHigh(usize),
    #[error("interior product of a 0-form")]
    InteriorOfFunction,
    #[error("degree {0} exceeds the chart dimension {1}")]
    DegreeExceedsDim(usize, usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("c-transform needs degree 1, 2 or 3 (got {0})")]
    CTransformDegree(usize),
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("non-finite value while evaluating at {0:?}")]
    NonFinite(Vec<f64>),
}

/// Coordinate box with named coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    coords: Vec<String>,
    domain: Vec<(f64, f64)>,
}

impl Chart {
    pub fn new(coords: Vec<String>, domain: Vec<(f64, f64)>) -> Result<Chart, CalcError> {
        if coords.len() != domain.len() {
            return Err(CalcError::InvalidChart(format!(
                "{} coordinate names for {} intervals",
                coords.len(),
                domain.len()
            )));
        }
        if coords.is_empty() || coords.len() > 32 {
            return Err(CalcError::InvalidChart("dimension must be between 1 and 32".into()));
        }
        for (name, &(lo, hi)) in coords.iter().zip(&domain) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(CalcError::InvalidChart(format!("interval for '{}' must be finite with lo < hi", name)));
            }
        }
        for (i, a) in coords.iter().enumerate() {
            if coords[..i].contains(a) {
                return Err(CalcError::InvalidChart(format!("duplicate coordinate '{}'", a)));
            }
        }
        Ok(Chart { coords, domain })
    }

    /// Chart with the given names and intervals.
    ///
    /// # Panics
    /// If the description is invalid.
    pub fn with(names: &[&str], domain: &[(f64, f64)]) -> Chart {
        Chart::new(names.iter().map(|s| s.to_string()).collect(), domain.to_vec()).expect("valid chart")
    }

    /// Default names: x, y, z for dimension ≤ 3, x1..xn otherwise.
    pub fn default_names(n: usize) -> Vec<String> {
        match n {
            1 => vec!["x".into()],
            2 => vec!["x".into(), "y".into()],
            3 => vec!["x".into(), "y".into(), "z".into()],
            _ => (1..=n).map(|i| format!("x{}", i)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn var(&self, i: usize) -> Expr {
        assert!(i < self.dim(), "coordinate index out of range");
        Expr::var(i)
    }

    pub fn coord(&self, name: &str) -> Option<Expr> {
        self.coords.iter().position(|c| c == name).map(Expr::var)
    }

    pub fn center(&self) -> Vec<f64> {
        self.domain.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect()
    }

    /// `count` deterministic points, each coordinate uniform in the interval
    /// shrunk by 5% of its width on both sides.
    pub fn sample(&self, seed: u64, count: usize) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                self.domain
                    .iter()
                    .map(|&(lo, hi)| {
                        let m = 0.05 * (hi - lo);
                        rng.gen_range(lo + m..hi - m)
                    })
                    .collect()
            })
            .collect()
    }

    /// This chart with one more coordinate appended.
    pub fn extend(&self, name: &str, interval: (f64, f64)) -> Result<Chart, CalcError> {
        let mut coords = self.coords.clone();
        coords.push(name.to_string());
        let mut domain = self.domain.clone();
        domain.push(interval);
        Chart::new(coords, domain)
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && p.iter().zip(&self.domain).all(|(x, (lo, hi))| lo < x && x < hi)
    }
}

pub type VectorField = Vec<Expr>;
pub type EndoField = Mat<Expr>;

/// Differential k-form field with a full antisymmetric component array.
#[derive(Clone, Debug)]
pub struct Form {
    degree: usize,
    dim: usize,
    comps: Vec<Expr>,
}

fn sign_of_perm(p: &[usize]) -> f64 {
    let mut s = 1.0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                s = -s;
            }
        }
    }
    s
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// Strictly increasing index tuples of length k in 0..n.
pub fn increasing(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

impl Form {
    fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn zero(degree: usize, dim: usize) -> Form {
        Form { degree, dim, comps: vec![Expr::zero(); dim.pow(degree as u32)] }
    }

    pub fn function(f: Expr, dim: usize) -> Form {
        Form { degree: 0, dim, comps: vec![f] }
    }

    pub fn one_form(comps: Vec<Expr>) -> Form {
        let dim = comps.len();
        Form { degree: 1, dim, comps }
    }

    /// Form from its components on increasing index tuples; the rest is
    /// filled in by antisymmetry.
    pub fn from_increasing(degree: usize, dim: usize, mut f: impl FnMut(&[usize]) -> Expr) -> Form {
        let mut out = Form::zero(degree, dim);
        let perms = permutations(degree);
        for idx in increasing(dim, degree) {
            let v = f(&idx);
            if v.is_zero() {
                continue;
            }
            for p in &perms {
                let permuted: Vec<usize> = p.iter().map(|&k| idx[k]).collect();
                let s = sign_of_perm(p);
                let at = out.flat_index(&permuted);
                out.comps[at] = if s > 0.0 { v.clone() } else { v.neg() };
            }
        }
        out
    }

    /// 2-form from the upper triangle of `m` (B_ij for i < j).
    pub fn two_form_upper(m: &Mat<Expr>) -> Form {
        Form::from_increasing(2, m.rows(), |idx| m.get(idx[0], idx[1]).clone())
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, idx: &[usize]) -> &Expr {
        assert_eq!(idx.len(), self.degree, "index length must equal the degree");
        &self.comps[self.flat_index(idx)]
    }

    pub fn comps(&self) -> &[Expr] {
        &self.comps
    }

    /// Component matrix of a 2-form.
    pub fn to_mat(&self) -> Mat<Expr> {
        assert_eq!(self.degree, 2, "to_mat needs a 2-form");
        Mat::from_fn(self.dim, self.dim, |i, j| self.get(&[i, j]).clone())
    }

    pub fn add(&self, o: &Form) -> Form {
        assert_eq!((self.degree, self.dim), (o.degree, o.dim), "form shape mismatch");
        Form { degree: self.degree, dim: self.dim, comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, o: &Form) -> Form {
        assert_eq!((self.degree, self.dim), (o.degree, o.dim), "form shape mismatch");
        Form { degree: self.degree, dim: self.dim, comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn scale(&self, f: &Expr) -> Form {
        Form { degree: self.degree, dim: self.dim, comps: self.comps.iter().map(|a| f.mul(a)).collect() }
    }

    pub fn neg(&self) -> Form {
        self.scale(&Expr::real(-1.0))
    }

    pub fn partial(&self, var: usize) -> Form {
        Form { degree: self.degree, dim: self.dim, comps: self.comps.iter().map(|a| a.partial(var)).collect() }
    }

    pub fn eval(&self, ev: &mut Evaluator) -> Vec<C64> {
        self.comps.iter().map(|e| ev.value(e)).collect()
    }

    /// Largest |component| at a point.
    pub fn max_abs_at(&self, ev: &mut Evaluator) -> f64 {
        self.comps.iter().fold(0.0, |m, e| m.max(ev.value(e).norm()))
    }

    /// Largest deviation from antisymmetry at a point.
    pub fn antisymmetry_defect(&self, ev: &mut Evaluator) -> f64 {
        let vals = self.eval(ev);
        let mut worst: f64 = 0.0;
        if self.degree < 2 {
            return 0.0;
        }
        let total = self.comps.len();
        for flat in 0..total {
            let mut idx = vec![0; self.degree];
            let mut r = flat;
            for slot in (0..self.degree).rev() {
                idx[slot] = r % self.dim;
                r /= self.dim;
            }
            for a in 0..self.degree - 1 {
                let mut sw = idx.clone();
                sw.swap(a, a + 1);
                let other = vals[self.flat_index(&sw)];
                worst = worst.max((vals[flat] + other).norm());
            }
        }
        worst
    }
}

/// Exterior derivative of a k-form, k ≤ 2.
pub fn d(w: &Form) -> Result<Form, CalcError> {
    if w.degree > 2 {
        return Err(CalcError::DegreeTooHigh(w.degree));
    }
    let k = w.degree + 1;
    if k > w.dim {
        return Ok(Form::zero(k, w.dim));
    }
    Ok(Form::from_increasing(k, w.dim, |idx| {
        let mut acc = Expr::zero();
        for j in 0..k {
            let rest: Vec<usize> = idx.iter().enumerate().filter(|&(m, _)| m != j).map(|(_, &v)| v).collect();
            let term = w.get(&rest).partial(idx[j]);
            acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
        }
        acc
    }))
}

/// ι_X ω, contracting the first slot.
pub fn interior(x: &[Expr], w: &Form) -> Result<Form, CalcError> {
    if w.degree == 0 {
        return Err(CalcError::InteriorOfFunction);
    }
    if x.len() != w.dim {
        return Err(CalcError::DimMismatch(x.len(), w.dim));
    }
    let k = w.degree - 1;
    let mut out = Form::zero(k, w.dim);
    let rest_count = w.dim.pow(k as u32);
    for r in 0..rest_count {
        let mut acc = Expr::zero();
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            let c = &w.comps[i * rest_count + r];
            if c.is_zero() {
                continue;
            }
            acc = acc.add(&xi.mul(c));
        }
        out.comps[r] = acc;
    }
    Ok(out)
}

/// α∧β with (α∧β)(X,Y) = α(X)β(Y) − α(Y)β(X) for 1-forms.
pub fn wedge(a: &Form, b: &Form) -> Result<Form, CalcError> {
    if a.dim != b.dim {
        return Err(CalcError::DimMismatch(a.dim, b.dim));
    }
    let (p, q) = (a.degree, b.degree);
    let k = p + q;
    if k > 3 && k > a.dim {
        return Err(CalcError::DegreeExceedsDim(k, a.dim));
    }
    if k > a.dim {
        return Ok(Form::zero(k, a.dim));
    }
    // shuffles: choose which positions of the increasing tuple go to α
    let choices = increasing(k, p);
    Ok(Form::from_increasing(k, a.dim, |idx| {
        let mut acc = Expr::zero();
        for ch in &choices {
            let rest: Vec<usize> = (0..k).filter(|m| !ch.contains(m)).collect();
            let order: Vec<usize> = ch.iter().chain(&rest).copied().collect();
            let ai: Vec<usize> = ch.iter().map(|&m| idx[m]).collect();
            let bi: Vec<usize> = rest.iter().map(|&m| idx[m]).collect();
            let term = a.get(&ai).mul(b.get(&bi));
            acc = if sign_of_perm(&order) > 0.0 { acc.add(&term) } else { acc.sub(&term) };
        }
        acc
    }))
}

/// [X,Y]^i = X^j∂_jY^i − Y^j∂_jX^i.
pub fn lie_bracket(x: &[Expr], y: &[Expr]) -> VectorField {
    let n = x.len();
    assert_eq!(n, y.len(), "vector fields of different dimension");
    (0..n)
        .map(|i| {
            let mut acc = Expr::zero();
            for j in 0..n {
                acc = acc.add(&x[j].mul(&y[i].partial(j)));
                acc = acc.sub(&y[j].mul(&x[i].partial(j)));
            }
            acc
        })
        .collect()
}

/// L_X ω = ι_X dω + d(ι_X ω).
pub fn lie_derivative(x: &[Expr], w: &Form) -> Result<Form, CalcError> {
    if w.degree > 2 {
        return Err(CalcError::DegreeTooHigh(w.degree));
    }
    let a = interior(x, &d(w)?)?;
    if w.degree == 0 {
        return Ok(a);
    }
    Ok(a.add(&d(&interior(x, w)?)?))
}

fn vec_part(s: &SectionField) -> &[Expr] {
    &s.vec
}

/// ⟦X+α, Y+β⟧ = [X,Y] + L_Xβ − L_Yα − ½d(ι_Xβ − ι_Yα).
pub fn courant(a: &SectionField, b: &SectionField) -> SectionField {
    let n = a.dim();
    assert_eq!(n, b.dim(), "sections of different dimension");
    let alpha = Form::one_form(a.form.clone());
    let beta = Form::one_form(b.form.clone());
    let x = vec_part(a);
    let y = vec_part(b);
    let lb = lie_bracket(x, y);
    let lx_beta = lie_derivative(x, &beta).expect("1-form");
    let ly_alpha = lie_derivative(y, &alpha).expect("1-form");
    let f = interior(x, &beta).expect("1-form").comps[0].sub(&interior(y, &alpha).expect("1-form").comps[0]);
    let df = d(&Form::function(f, n)).expect("0-form");
    let half = Expr::real(0.5);
    let form = (0..n)
        .map(|j| lx_beta.comps[j].sub(&ly_alpha.comps[j]).sub(&half.mul(&df.comps[j])))
        .collect();
    GtVec { vec: lb, form }
}

/// Nij(A,B,C) = ⅓(⟨⟦A,B⟧,C⟩ + ⟨⟦B,C⟧,A⟩ + ⟨⟦C,A⟧,B⟩).
pub fn nij(a: &SectionField, b: &SectionField, c: &SectionField) -> Expr {
    let s = courant(a, b).pair(c).add(&courant(b, c).pair(a)).add(&courant(c, a).pair(b));
    Expr::real(1.0 / 3.0).mul(&s)
}

/// Jac(A,B,C) = ⟦⟦A,B⟧,C⟧ + ⟦⟦B,C⟧,A⟧ + ⟦⟦C,A⟧,B⟧.
pub fn jac(a: &SectionField, b: &SectionField, c: &SectionField) -> SectionField {
    courant(&courant(a, b), c).add(&courant(&courant(b, c), a)).add(&courant(&courant(c, a), b))
}

/// ω^c(X_1,…,X_k) = ω(φX_1,…,φX_k) for a tangent endomorphism with
/// matrix φ^i_j (column j is φ∂_j).
pub fn c_transform(w: &Form, phi: &Mat<Expr>) -> Result<Form, CalcError> {
    if !(1..=3).contains(&w.degree) {
        return Err(CalcError::CTransformDegree(w.degree));
    }
    if phi.rows() != w.dim || phi.cols() != w.dim {
        return Err(CalcError::DimMismatch(phi.rows(), w.dim));
    }
    let n = w.dim;
    let mut cur = w.comps.clone();
    // pull back one slot at a time
    for slot in 0..w.degree {
        let stride = n.pow((w.degree - 1 - slot) as u32);
        let mut next = vec![Expr::zero(); cur.len()];
        for (flat, out) in next.iter_mut().enumerate() {
            let j = (flat / stride) % n;
            let base = flat - j * stride;
            let mut acc = Expr::zero();
            for i in 0..n {
                let p = phi.get(i, j);
                let v = &cur[base + i * stride];
                if p.is_zero() || v.is_zero() {
                    continue;
                }
                acc = acc.add(&v.mul(p));
            }
            *out = acc;
        }
        cur = next;
    }
    Ok(Form { degree: w.degree, dim: n, comps: cur })
}

/// Finite-difference agreement of a field's jet at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct JetResidual {
    /// max |∂f − FD| / max(1, |∂f|) over gradient entries.
    pub grad: f64,
    /// Same for the Hessian, using central differences of the gradient.
    pub hess: f64,
}

pub const FD_STEP: f64 = 1e-5;

pub fn jet_validate(f: &Expr, point: &[f64]) -> Result<JetResidual, CalcError> {
    let n = point.len();
    let jet = Evaluator::new(point).eval(f, 2).to_jet2();
    let finite = |z: C64| z.re.is_finite() && z.im.is_finite();
    if !finite(jet.value) {
        return Err(CalcError::NonFinite(point.to_vec()));
    }
    let at = |q: &[f64]| Evaluator::new(q).eval(f, 1);
    let mut grad_err: f64 = 0.0;
    let mut hess_err: f64 = 0.0;
    for i in 0..n {
        let mut qp = point.to_vec();
        let mut qm = point.to_vec();
        qp[i] += FD_STEP;
        qm[i] -= FD_STEP;
        let (tp, tm) = (at(&qp), at(&qm));
        if !finite(tp.value()) || !finite(tm.value()) {
            return Err(CalcError::NonFinite(qp));
        }
        let fd = (tp.value() - tm.value()) / (2.0 * FD_STEP);
        grad_err = grad_err.max((jet.grad[i] - fd).norm() / jet.grad[i].norm().max(1.0));
        for j in 0..n {
            let g = |t: &crate::jet::Taylor| t.coeffs()[1 + j];
            let fd2 = (g(&tp) - g(&tm)) / (2.0 * FD_STEP);
            hess_err = hess_err.max((jet.hess[i][j] - fd2).norm() / jet.hess[i][j].norm().max(1.0));
        }
    }
    Ok(JetResidual { grad: grad_err, hess: hess_err })
}
