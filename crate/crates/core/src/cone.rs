//! The cone C(M) = M × R₊ in the coordinate t = log r (t is the last
//! coordinate), with the lifts Φ + Ψ, Ψᶠ and the R-conjugation.

use crate::calculus::{CalcError, Chart};
use crate::deformations::FGacs;
use crate::expr::{Evaluator, Expr};
use crate::gta::{GtEndo, GtEndoField, GtVec, SectionField};
use crate::linalg::Mat;
use crate::report::{sweep, ResidualReport};
use crate::structures::Gacs;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConeError {
    #[error("structure depends on t (|∂_t| = {residual:e} at {point:?})")]
    TDependent { point: Vec<f64>, residual: f64 },
    #[error("structure is not of the cone form (deviation {residual:e} at {point:?})")]
    Inconsistent { point: Vec<f64>, residual: f64 },
    #[error(transparent)]
    Chart(#[from] CalcError),
}

pub const DEFAULT_T_INTERVAL: (f64, f64) = (-1.0, 1.0);

#[derive(Clone, Debug, PartialEq)]
pub struct ConeChart {
    pub base: Chart,
    pub chart: Chart,
}

impl ConeChart {
    pub fn new(base: &Chart, t_interval: (f64, f64)) -> Result<ConeChart, ConeError> {
        let chart = base.extend("t", t_interval)?;
        Ok(ConeChart { base: base.clone(), chart })
    }

    pub fn over(base: &Chart) -> ConeChart {
        ConeChart::new(base, DEFAULT_T_INTERVAL).expect("base chart must not already use the name 't'")
    }

    pub fn base_dim(&self) -> usize {
        self.base.dim()
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// Index of the t coordinate.
    pub fn t_index(&self) -> usize {
        self.base.dim()
    }

    pub fn t(&self) -> Expr {
        Expr::var(self.t_index())
    }

    /// ∂/∂t as a section.
    pub fn dt_vector(&self) -> SectionField {
        GtVec::basis(self.dim(), self.t_index())
    }

    /// dt as a section.
    pub fn dt_form(&self) -> SectionField {
        GtVec::basis(self.dim(), self.dim() + self.t_index())
    }

    pub fn sample(&self, seed: u64, count: usize) -> Vec<Vec<f64>> {
        self.chart.sample(seed, count)
    }
}

/// Generalized almost complex structure on a cone chart.
#[derive(Clone, Debug)]
pub struct ConeGacx {
    pub cone: ConeChart,
    pub j: GtEndoField,
}

/// t-independent extension of a section by zero in the ∂_t and dt slots.
pub fn lift_section(s: &SectionField) -> SectionField {
    let mut vec = s.vec.clone();
    vec.push(Expr::zero());
    let mut form = s.form.clone();
    form.push(Expr::zero());
    GtVec { vec, form }
}

/// t-independent extension of an endomorphism, zero on ∂_t and dt.
pub fn lift_endo(e: &GtEndoField) -> GtEndoField {
    let n = e.dim();
    let ext = |m: &Mat<Expr>| Mat::from_fn(n + 1, n + 1, |i, j| if i < n && j < n { m.get(i, j).clone() } else { Expr::zero() });
    GtEndo { tt: ext(&e.tt), tc: ext(&e.tc), ct: ext(&e.ct), cc: ext(&e.cc) }
}

/// Ψ(E₊,E₋) = E₋⊗∂t − ∂t⊗E₋ + E₊⊗dt − dt⊗E₊ for base sections E±.
pub fn psi(cone: &ConeChart, eplus: &SectionField, eminus: &SectionField) -> GtEndoField {
    let ep = lift_section(eplus);
    let em = lift_section(eminus);
    let dtv = cone.dt_vector();
    let dtf = cone.dt_form();
    GtEndo::tensor_pair(&em, &dtv)
        .sub(&GtEndo::tensor_pair(&dtv, &em))
        .add(&GtEndo::tensor_pair(&ep, &dtf))
        .sub(&GtEndo::tensor_pair(&dtf, &ep))
}

/// Ψᶠ = Ψ + f(∂t⊗dt − dt⊗∂t).
pub fn psi_f(cone: &ConeChart, s: &FGacs) -> GtEndoField {
    let dtv = cone.dt_vector();
    let dtf = cone.dt_form();
    let extra = GtEndo::tensor_pair(&dtv, &dtf).sub(&GtEndo::tensor_pair(&dtf, &dtv)).scale(&s.f);
    psi(cone, &s.eplus, &s.eminus).add(&extra)
}

/// J = Φ + Ψ(E₊,E₋).
pub fn cone_gacx(s: &Gacs) -> ConeGacx {
    let cone = ConeChart::over(&s.chart);
    let j = lift_endo(&s.phi).add(&psi(&cone, &s.eplus, &s.eminus));
    ConeGacx { cone, j }
}

/// I′ = Φᶠ + Ψᶠ.
pub fn i_prime(s: &FGacs) -> ConeGacx {
    let cone = ConeChart::over(&s.chart);
    let j = lift_endo(&s.phi).add(&psi_f(&cone, s));
    ConeGacx { cone, j }
}

/// R(t) = diag(e^{−t}, e^{t}) on the whole cone bundle.
pub fn r_field(cone: &ConeChart, sign: f64) -> GtEndoField {
    let t = cone.t().scale(crate::C64::new(sign, 0.0));
    GtEndo::diag_scaling(&t.neg().exp(), &t.exp(), cone.dim())
}

/// R J R⁻¹.
pub fn r_conjugate(j: &ConeGacx) -> ConeGacx {
    let r = r_field(&j.cone, 1.0);
    let rinv = r_field(&j.cone, -1.0);
    ConeGacx { cone: j.cone.clone(), j: j.j.conjugate(&r, &rinv) }
}

/// I = R(Φᶠ + Ψᶠ)R⁻¹.
pub fn i_map(s: &FGacs) -> ConeGacx {
    r_conjugate(&i_prime(s))
}

/// J² + id and J + J* residuals.
pub fn cone_gacx_check(j: &ConeGacx, points: &[Vec<f64>], tol: f64) -> ResidualReport {
    let n = j.cone.dim();
    ResidualReport::new(sweep(points, &[("square", tol), ("skew", tol)], |p| {
        let mut ev = Evaluator::new(p);
        let m = j.j.eval(&mut ev);
        vec![m.compose(&m).add(&GtEndo::identity(n)).max_abs(), m.add(&m.adjoint()).max_abs()]
    }))
}

/// Result of splitting a cone structure.
#[derive(Clone, Debug)]
pub enum Decomposed {
    Gacs(Gacs),
    FGacs(FGacs),
}

/// Tolerances used by [`cone_decompose`].
pub const DECOMPOSE_TOL: f64 = 1e-10;

fn restrict(e: &Expr, t: usize) -> Expr {
    if e.depends_on(t) {
        e.subst(t, &Expr::zero())
    } else {
        e.clone()
    }
}

/// Split J = J_M + A⊗∂t − ∂t⊗A + B⊗dt − dt⊗B + h(∂t⊗dt − dt⊗∂t).
pub fn cone_decompose(j: &ConeGacx, points: &[Vec<f64>]) -> Result<Decomposed, ConeError> {
    let cone = &j.cone;
    let tix = cone.t_index();
    let n = cone.base_dim();
    // t-independence
    let dj = j.j.partial(tix);
    for p in points {
        let mut ev = Evaluator::new(p);
        let r = dj.eval(&mut ev).max_abs();
        if !(r < DECOMPOSE_TOL) {
            return Err(ConeError::TDependent { point: p.clone(), residual: r });
        }
    }
    let jt = j.j.map(|e| restrict(e, tix));
    let on_dt = jt.apply(&cone.dt_vector());
    let on_dtf = jt.apply(&cone.dt_form());
    let b_sec: SectionField = GtVec { vec: on_dt.vec[..n].iter().map(|e| e.neg()).collect(), form: on_dt.form[..n].iter().map(|e| e.neg()).collect() };
    let a_sec: SectionField = GtVec { vec: on_dtf.vec[..n].iter().map(|e| e.neg()).collect(), form: on_dtf.form[..n].iter().map(|e| e.neg()).collect() };
    let h = on_dt.vec[tix].neg();
    let blk = |m: &Mat<Expr>| Mat::from_fn(n, n, |a, b| m.get(a, b).clone());
    let jm = GtEndo { tt: blk(&jt.tt), tc: blk(&jt.tc), ct: blk(&jt.ct), cc: blk(&jt.cc) };
    let fg = FGacs { chart: cone.base.clone(), phi: jm, eplus: b_sec, eminus: a_sec, f: h.clone() };
    // consistency: rebuild and compare, and h read from dt agrees
    let rebuilt = lift_endo(&fg.phi).add(&psi_f(cone, &fg));
    let mut h_zero = true;
    for p in points {
        let mut ev = Evaluator::new(p);
        let dev = rebuilt.eval(&mut ev).sub(&j.j.eval(&mut ev)).max_abs();
        let h_alt = (ev.value(&on_dtf.form[tix]) - ev.value(&h)).norm();
        let dev = dev.max(h_alt);
        if !(dev < DECOMPOSE_TOL) {
            return Err(ConeError::Inconsistent { point: p.clone(), residual: dev });
        }
        if ev.value(&h).norm() >= DECOMPOSE_TOL {
            h_zero = false;
        }
    }
    if h_zero {
        Ok(Decomposed::Gacs(Gacs { chart: fg.chart, phi: fg.phi, eplus: fg.eplus, eminus: fg.eminus }))
    } else {
        Ok(Decomposed::FGacs(fg))
    }
}
