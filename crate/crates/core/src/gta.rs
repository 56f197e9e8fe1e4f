//! Linear algebra of the generalized tangent bundle TM⊕T*M.
//!
//! [`GtVec`] and [`GtEndo`] are generic over the scalar: with `C64` they are
//! values at a point, with [`Expr`] they are fields on a chart
//! ([`SectionField`], [`GtEndoField`]).

use crate::expr::{Evaluator, Expr};
use crate::jet::C64;
use crate::linalg::{Mat, Scalar};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GtError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("2-form is not antisymmetric (deviation {0:e})")]
    NotAntisymmetric(f64),
}

/// X + α: tangent part `vec`, cotangent part `form`.
#[derive(Clone, Debug, PartialEq)]
pub struct GtVec<S = C64> {
    pub vec: Vec<S>,
    pub form: Vec<S>,
}

pub type SectionField = GtVec<Expr>;
pub type GtEndoField = GtEndo<Expr>;

impl<S: Scalar> GtVec<S> {
    pub fn new(vec: Vec<S>, form: Vec<S>) -> Result<Self, GtError> {
        if vec.len() != form.len() {
            return Err(GtError::DimMismatch(vec.len(), form.len()));
        }
        Ok(GtVec { vec, form })
    }

    pub fn zeros(n: usize) -> Self {
        GtVec { vec: vec![S::zero(); n], form: vec![S::zero(); n] }
    }

    pub fn vector(v: Vec<S>) -> Self {
        let n = v.len();
        GtVec { vec: v, form: vec![S::zero(); n] }
    }

    pub fn covector(f: Vec<S>) -> Self {
        let n = f.len();
        GtVec { vec: vec![S::zero(); n], form: f }
    }

    /// Coordinate section number `k`: ∂_k for k < n, dx^{k−n} otherwise.
    pub fn basis(n: usize, k: usize) -> Self {
        let mut g = GtVec::zeros(n);
        if k < n {
            g.vec[k] = S::one();
        } else {
            g.form[k - n] = S::one();
        }
        g
    }

    pub fn dim(&self) -> usize {
        self.vec.len()
    }

    pub fn flat(&self) -> Vec<S> {
        self.vec.iter().chain(&self.form).cloned().collect()
    }

    pub fn from_flat(v: &[S]) -> Self {
        assert!(v.len().is_multiple_of(2), "odd-length flat section");
        let n = v.len() / 2;
        GtVec { vec: v[..n].to_vec(), form: v[n..].to_vec() }
    }

    pub fn add(&self, o: &Self) -> Self {
        GtVec {
            vec: self.vec.iter().zip(&o.vec).map(|(a, b)| a.sadd(b)).collect(),
            form: self.form.iter().zip(&o.form).map(|(a, b)| a.sadd(b)).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        GtVec {
            vec: self.vec.iter().zip(&o.vec).map(|(a, b)| a.ssub(b)).collect(),
            form: self.form.iter().zip(&o.form).map(|(a, b)| a.ssub(b)).collect(),
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        GtVec {
            vec: self.vec.iter().map(|a| s.smul(a)).collect(),
            form: self.form.iter().map(|a| s.smul(a)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&S::one().sneg())
    }

    fn dot(a: &[S], b: &[S]) -> S {
        a.iter().zip(b).fold(S::zero(), |acc, (x, y)| {
            if x.is_zero_s() || y.is_zero_s() {
                acc
            } else {
                acc.sadd(&x.smul(y))
            }
        })
    }

    /// ⟨self, o⟩ = ½(o.form(self.vec) + self.form(o.vec)).
    ///
    /// # Panics
    /// On dimension mismatch; see [`pair`] for the checked form.
    pub fn pair(&self, o: &Self) -> S {
        assert_eq!(self.dim(), o.dim(), "pairing of sections of different dimension");
        let s = Self::dot(&self.vec, &o.form).sadd(&Self::dot(&o.vec, &self.form));
        S::from_f64(0.5).smul(&s)
    }

    /// ⟨self, o⟩₋ = ½(self.form(o.vec) − o.form(self.vec)).
    pub fn pair_minus(&self, o: &Self) -> S {
        assert_eq!(self.dim(), o.dim(), "pairing of sections of different dimension");
        let s = Self::dot(&self.form, &o.vec).ssub(&Self::dot(&o.form, &self.vec));
        S::from_f64(0.5).smul(&s)
    }

    pub fn map<T: Scalar>(&self, mut f: impl FnMut(&S) -> T) -> GtVec<T> {
        GtVec { vec: self.vec.iter().map(&mut f).collect(), form: self.form.iter().map(&mut f).collect() }
    }
}

impl GtVec<C64> {
    pub fn max_abs(&self) -> f64 {
        self.vec.iter().chain(&self.form).fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.vec.iter().chain(&self.form).all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl GtVec<Expr> {
    pub fn eval(&self, ev: &mut Evaluator) -> GtVec<C64> {
        self.map(|e| ev.value(e))
    }

    pub fn partial(&self, var: usize) -> Self {
        self.map(|e| e.partial(var))
    }
}

/// Checked pairing ⟨A,B⟩.
pub fn pair<S: Scalar>(a: &GtVec<S>, b: &GtVec<S>) -> Result<S, GtError> {
    if a.dim() != b.dim() {
        return Err(GtError::DimMismatch(a.dim(), b.dim()));
    }
    Ok(a.pair(b))
}

/// Checked skew pairing ⟨A,B⟩₋.
pub fn pair_minus<S: Scalar>(a: &GtVec<S>, b: &GtVec<S>) -> Result<S, GtError> {
    if a.dim() != b.dim() {
        return Err(GtError::DimMismatch(a.dim(), b.dim()));
    }
    Ok(a.pair_minus(b))
}

/// Endomorphism [[tt, tc], [ct, cc]] acting on (vec, form).
#[derive(Clone, Debug, PartialEq)]
pub struct GtEndo<S = C64> {
    pub tt: Mat<S>,
    pub tc: Mat<S>,
    pub ct: Mat<S>,
    pub cc: Mat<S>,
}

impl<S: Scalar> GtEndo<S> {
    pub fn from_blocks(tt: Mat<S>, tc: Mat<S>, ct: Mat<S>, cc: Mat<S>) -> Result<Self, GtError> {
        let n = tt.rows();
        for m in [&tt, &tc, &ct, &cc] {
            if m.rows() != n || m.cols() != n {
                return Err(GtError::DimMismatch(n, m.rows().max(m.cols())));
            }
        }
        Ok(GtEndo { tt, tc, ct, cc })
    }

    pub fn zeros(n: usize) -> Self {
        GtEndo { tt: Mat::zeros(n, n), tc: Mat::zeros(n, n), ct: Mat::zeros(n, n), cc: Mat::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        GtEndo { tt: Mat::identity(n), tc: Mat::zeros(n, n), ct: Mat::zeros(n, n), cc: Mat::identity(n) }
    }

    /// Block-diagonal (φ, −φ*) built from a tangent endomorphism.
    pub fn from_tangent(phi: &Mat<S>) -> Self {
        let n = phi.rows();
        GtEndo { tt: phi.clone(), tc: Mat::zeros(n, n), ct: Mat::zeros(n, n), cc: phi.transpose().neg() }
    }

    pub fn dim(&self) -> usize {
        self.tt.rows()
    }

    pub fn apply(&self, a: &GtVec<S>) -> GtVec<S> {
        assert_eq!(self.dim(), a.dim(), "endomorphism applied to a section of different dimension");
        let v1 = self.tt.apply(&a.vec);
        let v2 = self.tc.apply(&a.form);
        let f1 = self.ct.apply(&a.vec);
        let f2 = self.cc.apply(&a.form);
        GtVec {
            vec: v1.iter().zip(&v2).map(|(x, y)| x.sadd(y)).collect(),
            form: f1.iter().zip(&f2).map(|(x, y)| x.sadd(y)).collect(),
        }
    }

    /// self ∘ o.
    pub fn compose(&self, o: &Self) -> Self {
        GtEndo {
            tt: self.tt.matmul(&o.tt).add(&self.tc.matmul(&o.ct)),
            tc: self.tt.matmul(&o.tc).add(&self.tc.matmul(&o.cc)),
            ct: self.ct.matmul(&o.tt).add(&self.cc.matmul(&o.ct)),
            cc: self.ct.matmul(&o.tc).add(&self.cc.matmul(&o.cc)),
        }
    }

    /// a ∘ self ∘ b.
    pub fn conjugate(&self, a: &Self, b: &Self) -> Self {
        a.compose(self).compose(b)
    }

    pub fn add(&self, o: &Self) -> Self {
        GtEndo { tt: self.tt.add(&o.tt), tc: self.tc.add(&o.tc), ct: self.ct.add(&o.ct), cc: self.cc.add(&o.cc) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        GtEndo { tt: self.tt.sub(&o.tt), tc: self.tc.sub(&o.tc), ct: self.ct.sub(&o.ct), cc: self.cc.sub(&o.cc) }
    }

    pub fn scale(&self, s: &S) -> Self {
        GtEndo { tt: self.tt.scale(s), tc: self.tc.scale(s), ct: self.ct.scale(s), cc: self.cc.scale(s) }
    }

    pub fn neg(&self) -> Self {
        self.scale(&S::one().sneg())
    }

    /// P* with ⟨PA,B⟩ = ⟨A,P*B⟩.
    pub fn adjoint(&self) -> Self {
        GtEndo {
            tt: self.cc.transpose(),
            tc: self.tc.transpose(),
            ct: self.ct.transpose(),
            cc: self.tt.transpose(),
        }
    }

    /// E⊗F: the map A ↦ 2⟨E,A⟩F (the first factor is the input slot).
    pub fn tensor_pair(e: &GtVec<S>, f: &GtVec<S>) -> Self {
        // 2⟨E,A⟩ = e.form·a.vec + e.vec·a.form
        GtEndo {
            tt: Mat::outer(&f.vec, &e.form),
            tc: Mat::outer(&f.vec, &e.vec),
            ct: Mat::outer(&f.form, &e.form),
            cc: Mat::outer(&f.form, &e.vec),
        }
    }

    /// e^B: X+α ↦ X + α + ι_X B for a 2-form with components B_ij = B(∂_i, ∂_j).
    pub fn b_field(b: &Mat<S>) -> Self {
        let n = b.rows();
        GtEndo { tt: Mat::identity(n), tc: Mat::zeros(n, n), ct: b.transpose(), cc: Mat::identity(n) }
    }

    /// diag(a on vectors, b on forms).
    pub fn diag_scaling(a: &S, b: &S, n: usize) -> Self {
        GtEndo {
            tt: Mat::identity(n).scale(a),
            tc: Mat::zeros(n, n),
            ct: Mat::zeros(n, n),
            cc: Mat::identity(n).scale(b),
        }
    }

    /// The 2n×2n matrix [[tt, tc], [ct, cc]].
    pub fn to_mat(&self) -> Mat<S> {
        let n = self.dim();
        Mat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => self.tt.get(i, j).clone(),
            (true, false) => self.tc.get(i, j - n).clone(),
            (false, true) => self.ct.get(i - n, j).clone(),
            (false, false) => self.cc.get(i - n, j - n).clone(),
        })
    }

    pub fn from_mat(m: &Mat<S>) -> Self {
        assert!(m.rows() == m.cols() && m.rows().is_multiple_of(2), "not a 2n×2n matrix");
        let n = m.rows() / 2;
        GtEndo {
            tt: Mat::from_fn(n, n, |i, j| m.get(i, j).clone()),
            tc: Mat::from_fn(n, n, |i, j| m.get(i, j + n).clone()),
            ct: Mat::from_fn(n, n, |i, j| m.get(i + n, j).clone()),
            cc: Mat::from_fn(n, n, |i, j| m.get(i + n, j + n).clone()),
        }
    }

    pub fn map<T: Scalar>(&self, mut f: impl FnMut(&S) -> T) -> GtEndo<T> {
        GtEndo { tt: self.tt.map(&mut f), tc: self.tc.map(&mut f), ct: self.ct.map(&mut f), cc: self.cc.map(&mut f) }
    }
}

impl GtEndo<C64> {
    pub fn max_abs(&self) -> f64 {
        [&self.tt, &self.tc, &self.ct, &self.cc].iter().fold(0.0, |m, b| m.max(b.max_abs()))
    }

    pub fn is_finite(&self) -> bool {
        [&self.tt, &self.tc, &self.ct, &self.cc]
            .iter()
            .all(|b| b.entries().iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }
}

impl GtEndo<Expr> {
    pub fn eval(&self, ev: &mut Evaluator) -> GtEndo<C64> {
        self.map(|e| ev.value(e))
    }

    pub fn partial(&self, var: usize) -> Self {
        self.map(|e| e.partial(var))
    }
}

/// Checked e^B for a pointwise 2-form.
pub fn b_field_matrix(b: &Mat<C64>, n: usize) -> Result<GtEndo<C64>, GtError> {
    if b.rows() != n || b.cols() != n {
        return Err(GtError::DimMismatch(n, b.rows().max(b.cols())));
    }
    let dev = b.add(&b.transpose()).max_abs();
    if dev > 1e-12 * b.max_abs().max(1.0) {
        return Err(GtError::NotAntisymmetric(dev));
    }
    Ok(GtEndo::b_field(b))
}

/// R(t) = diag(e^{−t}, e^{t}).
pub fn r_scaling(t: f64, n: usize) -> GtEndo<C64> {
    GtEndo::diag_scaling(&C64::new((-t).exp(), 0.0), &C64::new(t.exp(), 0.0), n)
}

/// Checked tensor pair.
pub fn tensor_pair<S: Scalar>(e: &GtVec<S>, f: &GtVec<S>) -> Result<GtEndo<S>, GtError> {
    if e.dim() != f.dim() {
        return Err(GtError::DimMismatch(e.dim(), f.dim()));
    }
    Ok(GtEndo::tensor_pair(e, f))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn pair_basics() {
        let dx = GtVec::<C64>::basis(3, 3);
        let px = GtVec::<C64>::basis(3, 0);
        let py = GtVec::<C64>::basis(3, 1);
        assert_eq!(px.pair(&dx), c(0.5));
        assert_eq!(px.pair(&py), c(0.0));
        let dz = GtVec::<C64>::basis(3, 5);
        let pz = GtVec::<C64>::basis(3, 2);
        assert_eq!(dz.pair_minus(&pz), c(0.5));
        assert_eq!(pz.pair_minus(&dz), c(-0.5));
        assert!(pair(&px, &GtVec::<C64>::zeros(2)).is_err());
    }

    #[test]
    fn tensor_pair_convention() {
        // dx⊗∂x sends ∂x to ∂x
        let dx = GtVec::<C64>::basis(3, 3);
        let px = GtVec::<C64>::basis(3, 0);
        assert_eq!(GtEndo::tensor_pair(&dx, &px).apply(&px), px);
        let py = GtVec::<C64>::basis(3, 1);
        assert_eq!(GtEndo::tensor_pair(&dx, &px).apply(&py), GtVec::zeros(3));
    }

    #[test]
    fn b_field_examples() {
        let mut b = Mat::<C64>::zeros(3, 3);
        b.set(0, 1, c(1.0));
        b.set(1, 0, c(-1.0));
        let e = b_field_matrix(&b, 3).unwrap();
        let out = e.apply(&GtVec::basis(3, 0));
        assert_eq!(out, GtVec::basis(3, 0).add(&GtVec::basis(3, 4)));
        let mut bad = b.clone();
        bad.set(1, 0, c(0.5));
        assert!(matches!(b_field_matrix(&bad, 3), Err(GtError::NotAntisymmetric(_))));
        assert_eq!(b_field_matrix(&Mat::zeros(3, 3), 3).unwrap(), GtEndo::identity(3));
    }

    #[test]
    fn r_scaling_examples() {
        assert_eq!(r_scaling(0.0, 2), GtEndo::identity(2));
        let v = r_scaling(1.0, 2).apply(&GtVec::basis(2, 0));
        assert!((v.vec[0] - c((-1.0f64).exp())).norm() < 1e-15);
        let id = r_scaling(0.7, 2).compose(&r_scaling(-0.7, 2));
        assert!(id.sub(&GtEndo::identity(2)).max_abs() < 1e-15);
    }
}
