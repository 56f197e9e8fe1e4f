//! Structure records, constructors and axiom checkers.

use crate::calculus::{d, Chart, Form, VectorField};
use crate::expr::{Evaluator, Expr};
use crate::gta::{GtEndo, GtEndoField, GtVec, SectionField};
use crate::jet::C64;
use crate::linalg::Mat;
use crate::report::{point_seed, sweep, ResidualReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StructureError {
    #[error("{what} fails at {point:?} (residual {residual:e})")]
    AxiomFailure { what: String, point: Vec<f64>, residual: f64 },
    #[error("contact condition fails: ρ is singular at {0:?}")]
    NotContact(Vec<f64>),
    #[error("metric is singular or indefinite at {0:?}")]
    BadMetric(Vec<f64>),
    #[error("dimension mismatch: {0}")]
    Dim(String),
    #[error("eigenframe rank drops below {expected} at {point:?}")]
    RankDrop { expected: usize, point: Vec<f64> },
    #[error("probe '{0}' fails, dual structure not formed")]
    ProbeFailed(String),
}

/// Almost contact (metric) structure (φ, ξ, η, g).
#[derive(Clone, Debug)]
pub struct AlmostContactMetric {
    pub chart: Chart,
    /// Matrix φ^i_j: column j is φ(∂_j).
    pub phi: Mat<Expr>,
    pub xi: VectorField,
    pub eta: VectorField,
    pub g: Option<Mat<Expr>>,
}

/// Generalized almost contact structure (Φ, E₊, E₋).
#[derive(Clone, Debug)]
pub struct Gacs {
    pub chart: Chart,
    pub phi: GtEndoField,
    pub eplus: SectionField,
    pub eminus: SectionField,
}

/// Generalized metric G, remembering (g, b) when built from them.
#[derive(Clone, Debug)]
pub struct GeneralizedMetric {
    pub g: Option<Mat<Expr>>,
    /// 2-form components b_ij.
    pub b: Option<Mat<Expr>>,
    pub endo: GtEndoField,
}

#[derive(Clone, Debug)]
pub struct Gacm {
    pub gacs: Gacs,
    pub metric: GeneralizedMetric,
}

/// Sample points used to validate constructor preconditions.
pub(crate) fn guard_points(chart: &Chart) -> Vec<Vec<f64>> {
    let mut pts = vec![chart.center()];
    pts.extend(chart.sample(0x5eed, 16));
    pts
}

fn mat_dev(a: &Mat<C64>) -> f64 {
    a.max_abs()
}

fn eval_vec(v: &[Expr], ev: &mut Evaluator) -> Vec<C64> {
    v.iter().map(|e| ev.value(e)).collect()
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn acms_check(acs: &AlmostContactMetric, points: &[Vec<f64>], tol: f64) -> ResidualReport {
    let n = acs.chart.dim();
    let mut specs = vec![("reeb_normalization", tol), ("phi_square", tol)];
    if acs.g.is_some() {
        specs.push(("metric_compatibility", tol));
    }
    let entries = sweep(points, &specs, |p| {
        let mut ev = Evaluator::new(p);
        let phi = acs.phi.eval(&mut ev);
        let xi = eval_vec(&acs.xi, &mut ev);
        let eta = eval_vec(&acs.eta, &mut ev);
        let norm = (dot(&eta, &xi) - 1.0).norm();
        let sq = phi.matmul(&phi).add(&Mat::identity(n)).sub(&Mat::outer(&xi, &eta));
        let mut out = vec![norm, mat_dev(&sq)];
        if let Some(g) = &acs.g {
            let g = g.eval(&mut ev);
            let lhs = phi.transpose().matmul(&g).matmul(&phi);
            out.push(mat_dev(&lhs.sub(&g).add(&Mat::outer(&eta, &eta))));
        }
        out
    });
    ResidualReport::new(entries)
}

fn require(report: &ResidualReport, what: &str) -> Result<(), StructureError> {
    for r in &report.entries {
        if !r.pass && !r.probe {
            return Err(StructureError::AxiomFailure {
                what: format!("{}: {}", what, r.condition),
                point: r.argmax_point.clone(),
                residual: r.max_residual,
            });
        }
    }
    Ok(())
}

/// Φ = (φ 0; 0 −φ*), E₊ = ξ, E₋ = η.
pub fn gacs_from_acs(acs: &AlmostContactMetric) -> Result<Gacs, StructureError> {
    let pts = guard_points(&acs.chart);
    require(&acms_check(acs, &pts, 1e-8), "almost contact axioms")?;
    Ok(Gacs {
        chart: acs.chart.clone(),
        phi: GtEndo::from_tangent(&acs.phi),
        eplus: GtVec::vector(acs.xi.clone()),
        eminus: GtVec::covector(acs.eta.clone()),
    })
}

/// Data derived from a contact form.
#[derive(Clone, Debug)]
pub struct ContactData {
    pub eta: VectorField,
    /// dη components.
    pub d_eta: Mat<Expr>,
    /// ρ as a map X ↦ ι_X dη − η(X)η.
    pub rho: Mat<Expr>,
    pub rho_inv: Mat<Expr>,
    pub reeb: VectorField,
}

pub fn contact_data(eta: &[Expr]) -> ContactData {
    let de = d(&Form::one_form(eta.to_vec())).expect("1-form").to_mat();
    let rho = de.transpose().sub(&Mat::outer(eta, eta));
    let rho_inv = rho.inverse();
    let reeb = rho_inv.apply(eta).iter().map(|e| e.neg()).collect();
    ContactData { eta: eta.to_vec(), d_eta: de, rho, rho_inv, reeb }
}

/// Φ = (0 π; dη 0), E₊ = η, E₋ = ξ for a contact form η.
pub fn gacs_from_contact(chart: &Chart, eta: &[Expr]) -> Result<Gacs, StructureError> {
    let n = chart.dim();
    if eta.len() != n {
        return Err(StructureError::Dim(format!("η has {} components on a {}-chart", eta.len(), n)));
    }
    if n.is_multiple_of(2) {
        return Err(StructureError::Dim(format!("contact forms need an odd dimension, got {}", n)));
    }
    let cd = contact_data(eta);
    for p in guard_points(chart) {
        let mut ev = Evaluator::new(&p);
        let rho = cd.rho.eval(&mut ev);
        match rho.inverse() {
            Some(inv) if inv.max_abs().is_finite() && inv.max_abs() < 1e10 => {}
            _ => return Err(StructureError::NotContact(p)),
        }
    }
    let r = &cd.rho_inv;
    let tc = r.transpose().matmul(&cd.d_eta.transpose()).matmul(r);
    let phi = GtEndo { tt: Mat::zeros(n, n), tc, ct: cd.d_eta.transpose(), cc: Mat::zeros(n, n) };
    Ok(Gacs {
        chart: chart.clone(),
        phi,
        eplus: GtVec::covector(eta.to_vec()),
        eminus: GtVec::vector(cd.reeb.clone()),
    })
}

pub(crate) fn endo_at(e: &GtEndoField, ev: &mut Evaluator) -> GtEndo<C64> {
    e.eval(ev)
}

/// Residuals of skewness, normalization, isotropy and the square identity.
pub fn gacs_values(phi: &GtEndo<C64>, ep: &GtVec<C64>, em: &GtVec<C64>) -> [f64; 4] {
    let n = phi.dim();
    let skew = phi.add(&phi.adjoint()).max_abs();
    let norm = (ep.pair(em) * 2.0 - 1.0).norm();
    let iso = ep.pair(ep).norm().max(em.pair(em).norm());
    let sq = phi
        .compose(phi)
        .add(&GtEndo::identity(n))
        .sub(&GtEndo::tensor_pair(ep, em))
        .sub(&GtEndo::tensor_pair(em, ep))
        .max_abs();
    [skew, norm, iso, sq]
}

pub fn gacs_check(s: &Gacs, points: &[Vec<f64>], tol: f64) -> ResidualReport {
    let specs = [("skew", tol), ("normalization", tol), ("isotropy", tol), ("square", tol)];
    ResidualReport::new(sweep(points, &specs, |p| {
        let mut ev = Evaluator::new(p);
        let phi = endo_at(&s.phi, &mut ev);
        gacs_values(&phi, &s.eplus.eval(&mut ev), &s.eminus.eval(&mut ev)).to_vec()
    }))
}

/// ‖ΦE₊‖ and ‖ΦE₋‖.
pub fn phi_kernel_check(s: &Gacs, points: &[Vec<f64>], tol: f64) -> ResidualReport {
    let specs = [("phi_eplus", tol), ("phi_eminus", tol)];
    ResidualReport::new(sweep(points, &specs, |p| {
        let mut ev = Evaluator::new(p);
        let phi = endo_at(&s.phi, &mut ev);
        vec![phi.apply(&s.eplus.eval(&mut ev)).max_abs(), phi.apply(&s.eminus.eval(&mut ev)).max_abs()]
    }))
}

/// Φ³ + Φ.
pub fn phi_cube_check(s: &Gacs, points: &[Vec<f64>], tol: f64) -> ResidualReport {
    ResidualReport::new(sweep(points, &[("phi_cube", tol)], |p| {
        let mut ev = Evaluator::new(p);
        let phi = endo_at(&s.phi, &mut ev);
        vec![phi.compose(&phi).compose(&phi).add(&phi).max_abs()]
    }))
}

/// (e^B Φ e^{−B}, e^B E₊, e^B E₋) for a 2-form B.
pub fn b_transform(s: &Gacs, b: &Form) -> Gacs {
    let bm = b.to_mat();
    let eb = GtEndo::b_field(&bm);
    let ebi = GtEndo::b_field(&bm.neg());
    Gacs {
        chart: s.chart.clone(),
        phi: s.phi.conjugate(&eb, &ebi),
        eplus: eb.apply(&s.eplus),
        eminus: eb.apply(&s.eminus),
    }
}

/// G(g,b) = e^b (0 g⁻¹; g 0) e^{−b}.
pub fn gmetric_from_gb(g: &Mat<Expr>, b: &Form) -> Result<GeneralizedMetric, StructureError> {
    let n = g.rows();
    if g.cols() != n || b.dim() != n || b.degree() != 2 {
        return Err(StructureError::Dim("metric and 2-form must be n×n on the same chart".into()));
    }
    let ginv = g.inverse();
    let bm = b.to_mat();
    let core = GtEndo { tt: Mat::zeros(n, n), tc: ginv, ct: g.clone(), cc: Mat::zeros(n, n) };
    let endo = core.conjugate(&GtEndo::b_field(&bm), &GtEndo::b_field(&bm.neg()));
    Ok(GeneralizedMetric { g: Some(g.clone()), b: Some(bm), endo })
}

/// Checks G is symmetric, positive at sample points.
pub fn check_metric_positive(g: &Mat<Expr>, chart: &Chart) -> Result<(), StructureError> {
    for p in guard_points(chart) {
        let mut ev = Evaluator::new(&p);
        let gm = g.eval(&mut ev);
        if gm.sub(&gm.transpose()).max_abs() > 1e-10 * gm.max_abs().max(1.0) {
            return Err(StructureError::BadMetric(p));
        }
        // leading principal minors via Cholesky on the real part
        let n = gm.rows();
        let mut l = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = gm.get(i, j).re;
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                if i == j {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(StructureError::BadMetric(p));
                    }
                    l[i][i] = s.sqrt();
                } else {
                    l[i][j] = s / l[j][j];
                }
            }
        }
    }
    Ok(())
}

/// Minimum of ⟨GA,A⟩/|A|² over `count` random real probes.
pub fn positivity_probe(g: &GtEndo<C64>, seed: u64, count: usize) -> f64 {
    let n = g.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..count {
        let flat: Vec<C64> = (0..2 * n).map(|_| C64::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
        let a = GtVec::from_flat(&flat);
        let norm2: f64 = flat.iter().map(|z| z.norm_sqr()).sum();
        if norm2 == 0.0 {
            continue;
        }
        let q = g.apply(&a).pair(&a).re / norm2;
        worst = worst.min(q);
    }
    worst
}

pub const POSITIVITY_PROBES: usize = 200;

pub fn gacm_check(m: &Gacm, points: &[Vec<f64>], tol: f64) -> ResidualReport {
    let s = &m.gacs;
    let specs = [
        ("skew", tol),
        ("normalization", tol),
        ("isotropy", tol),
        ("square", tol),
        ("metric_symmetry", tol),
        ("metric_involution", tol),
        ("metric_positivity", tol),
        ("compatibility", tol),
        ("commute_phi_g", tol),
        ("g_eplus_to_eminus", tol),
        ("g_eminus_to_eplus", tol),
    ];
    let entries = sweep(points, &specs, |p| {
        let mut ev = Evaluator::new(p);
        let phi = endo_at(&s.phi, &mut ev);
        let ep = s.eplus.eval(&mut ev);
        let em = s.eminus.eval(&mut ev);
        let g = endo_at(&m.metric.endo, &mut ev);
        let n = g.dim();
        let mut out = gacs_values(&phi, &ep, &em).to_vec();
        out.push(g.sub(&g.adjoint()).max_abs());
        out.push(g.compose(&g).sub(&GtEndo::identity(n)).max_abs());
        let q = positivity_probe(&g, point_seed(p), POSITIVITY_PROBES);
        out.push(positivity_residual(q));
        let compat = phi
            .compose(&g)
            .compose(&phi)
            .neg()
            .sub(&g)
            .add(&GtEndo::tensor_pair(&ep, &ep))
            .add(&GtEndo::tensor_pair(&em, &em));
        out.push(compat.max_abs());
        out.push(phi.compose(&g).sub(&g.compose(&phi)).max_abs());
        out.push(g.apply(&ep).sub(&em).max_abs());
        out.push(g.apply(&em).sub(&ep).max_abs());
        out
    });
    let mut entries = entries;
    for r in entries.iter_mut() {
        if matches!(r.condition.as_str(), "commute_phi_g" | "g_eplus_to_eminus" | "g_eminus_to_eplus") {
            r.probe = true;
        }
    }
    ResidualReport::new(entries)
}

/// 0 when the smallest probe value is positive, otherwise at least 1.
pub fn positivity_residual(min_q: f64) -> f64 {
    if min_q > 0.0 {
        0.0
    } else {
        (-min_q).max(1.0)
    }
}

/// (G, GΦ, GE₊, GE₋).
pub fn dual_gacm(m: &Gacm) -> Result<Gacm, StructureError> {
    let pts = guard_points(&m.gacs.chart);
    let rep = gacm_check(m, &pts, 1e-8);
    for name in ["commute_phi_g", "g_eplus_to_eminus", "g_eminus_to_eplus"] {
        if !rep.get(name).map(|r| r.pass).unwrap_or(false) {
            return Err(StructureError::ProbeFailed(name.to_string()));
        }
    }
    let g = &m.metric.endo;
    Ok(Gacm {
        gacs: Gacs {
            chart: m.gacs.chart.clone(),
            phi: g.compose(&m.gacs.phi),
            eplus: g.apply(&m.gacs.eplus),
            eminus: g.apply(&m.gacs.eminus),
        },
        metric: m.metric.clone(),
    })
}

/// How pivot columns are chosen for eigenframes.
#[derive(Clone, Debug, PartialEq)]
pub enum PivotRule {
    /// Largest remaining column first.
    Greedy,
    /// First column in the given order that is independent enough.
    FirstFit(Vec<usize>),
}

pub const PIVOT_THRESHOLD: f64 = 1e-6;

/// Relative Gram–Schmidt residuals of `cols` in order.
fn gs_residuals(cols: &[Vec<C64>]) -> Vec<f64> {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut out = Vec::new();
    for c in cols {
        let norm0 = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let mut v = c.clone();
        for b in &basis {
            let proj: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= proj * bi;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        out.push(if norm0 > 0.0 { norm / norm0.max(1.0) } else { 0.0 });
        if norm > 0.0 {
            basis.push(v.iter().map(|z| z / norm).collect());
        }
    }
    out
}

/// Choose `target` independent columns of `m` at a point.
pub fn select_columns(m: &Mat<C64>, target: usize, rule: &PivotRule) -> Option<Vec<usize>> {
    let cols: Vec<Vec<C64>> = (0..m.cols()).map(|j| m.col(j)).collect();
    let scale = cols.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).fold(0.0, f64::max);
    if scale == 0.0 {
        return if target == 0 { Some(vec![]) } else { None };
    }
    let mut chosen: Vec<usize> = Vec::new();
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let residual = |c: &[C64], basis: &[Vec<C64>]| {
        let mut v = c.to_vec();
        for b in basis {
            let proj: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= proj * bi;
            }
        }
        v
    };
    let norm = |v: &[C64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    while chosen.len() < target {
        let candidates: Vec<usize> = match rule {
            PivotRule::Greedy => (0..cols.len()).collect(),
            PivotRule::FirstFit(order) => order.clone(),
        };
        let mut best: Option<(usize, Vec<C64>, f64)> = None;
        for j in candidates {
            if chosen.contains(&j) {
                continue;
            }
            let v = residual(&cols[j], &basis);
            let nv = norm(&v);
            if nv <= PIVOT_THRESHOLD * scale {
                continue;
            }
            match rule {
                PivotRule::FirstFit(_) => {
                    best = Some((j, v, nv));
                    break;
                }
                PivotRule::Greedy => {
                    if best.as_ref().is_none_or(|b| nv > b.2) {
                        best = Some((j, v, nv));
                    }
                }
            }
        }
        let (j, v, nv) = best?;
        chosen.push(j);
        basis.push(v.iter().map(|z| z / nv).collect());
    }
    Some(chosen)
}

/// Columns of `m` (a symbolic endomorphism) at the given indices, as sections.
pub fn columns_as_sections(m: &GtEndoField, idx: &[usize]) -> Vec<SectionField> {
    let n = m.dim();
    idx.iter().map(|&k| m.apply(&GtVec::basis(n, k))).collect()
}

/// Pivot-selected +i eigenframe of `m`'s image: chooses `target` columns at
/// `base` and verifies they stay independent at every point.
pub fn frame_from_projector(
    m: &GtEndoField,
    target: usize,
    base: &[f64],
    points: &[Vec<f64>],
    rule: &PivotRule,
) -> Result<Vec<SectionField>, StructureError> {
    let mut ev = Evaluator::new(base);
    let mb = m.eval(&mut ev).to_mat();
    let idx = select_columns(&mb, target, rule).ok_or(StructureError::RankDrop { expected: target, point: base.to_vec() })?;
    let frame = columns_as_sections(m, &idx);
    for p in points {
        let mut ev = Evaluator::new(p);
        let cols: Vec<Vec<C64>> = frame.iter().map(|a| a.eval(&mut ev).flat()).collect();
        if gs_residuals(&cols).iter().any(|&r| !(r > PIVOT_THRESHOLD)) {
            return Err(StructureError::RankDrop { expected: target, point: p.clone() });
        }
    }
    Ok(frame)
}

#[derive(Clone, Debug)]
pub struct Eigenframe {
    /// Frame of E^{(1,0)}.
    pub frame: Vec<SectionField>,
    pub eplus: SectionField,
    pub eminus: SectionField,
}

/// A ↦ A − 2⟨A,E₋⟩E₊ − 2⟨A,E₊⟩E₋ followed by ½(1 − iΦ).
pub fn e10_projector(s: &Gacs) -> GtEndoField {
    let n = s.chart.dim();
    let p = GtEndo::identity(n)
        .sub(&GtEndo::tensor_pair(&s.eminus, &s.eplus))
        .sub(&GtEndo::tensor_pair(&s.eplus, &s.eminus));
    let half = Expr::real(0.5);
    let q = GtEndo::identity(n).sub(&s.phi.scale(&Expr::imag_unit())).scale(&half);
    q.compose(&p)
}

pub fn eigenframe(s: &Gacs, base_point: &[f64], points: &[Vec<f64>]) -> Result<Eigenframe, StructureError> {
    eigenframe_with(s, base_point, points, &PivotRule::Greedy)
}

pub fn eigenframe_with(
    s: &Gacs,
    base_point: &[f64],
    points: &[Vec<f64>],
    rule: &PivotRule,
) -> Result<Eigenframe, StructureError> {
    let n = s.chart.dim();
    if n < 1 {
        return Err(StructureError::Dim("empty chart".into()));
    }
    let m = e10_projector(s);
    let frame = frame_from_projector(&m, n - 1, base_point, points, rule)?;
    Ok(Eigenframe { frame, eplus: s.eplus.clone(), eminus: s.eminus.clone() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InvolutivityClass {
    Strong,
    ContactPlus,
    ContactMinus,
    None,
}

impl InvolutivityClass {
    pub fn label(self) -> &'static str {
        match self {
            InvolutivityClass::Strong => "strong",
            InvolutivityClass::ContactPlus => "contact(+)",
            InvolutivityClass::ContactMinus => "contact(-)",
            InvolutivityClass::None => "none",
        }
    }
}

/// Max |Nij| over all triples of `frame` at a point.
pub fn triple_residual(nijs: &[Expr], ev: &mut Evaluator) -> f64 {
    nijs.iter().fold(0.0, |m, e| m.max(ev.value(e).norm()))
}

/// Nij expressions for every triple i<j<k of a frame.
pub fn frame_nijs(frame: &[SectionField]) -> Vec<Expr> {
    let mut out = Vec::new();
    let f = frame.len();
    for i in 0..f {
        for j in i + 1..f {
            for k in j + 1..f {
                out.push(crate::calculus::nij(&frame[i], &frame[j], &frame[k]));
            }
        }
    }
    out
}

/// Max |⟨A,B⟩| over all pairs (including A with itself).
pub fn isotropy_value(frame: &[GtVec<C64>]) -> f64 {
    let mut m: f64 = 0.0;
    for a in frame {
        for b in frame {
            m = m.max(a.pair(b).norm());
        }
    }
    m
}

pub fn involutivity_class(
    s: &Gacs,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<(InvolutivityClass, ResidualReport), StructureError> {
    let ef = eigenframe(s, &s.chart.center(), points)?;
    let mut lp = vec![ef.eplus.clone()];
    lp.extend(ef.frame.iter().cloned());
    let mut lm = vec![ef.eminus.clone()];
    lm.extend(ef.frame.iter().cloned());
    let np = frame_nijs(&lp);
    let nm = frame_nijs(&lm);
    let specs = [("l_plus_nij", tol), ("l_minus_nij", tol), ("frame_isotropy", tol)];
    let entries = sweep(points, &specs, |p| {
        let mut ev = Evaluator::new(p);
        let a = triple_residual(&np, &mut ev);
        let b = triple_residual(&nm, &mut ev);
        let vp: Vec<GtVec<C64>> = lp.iter().map(|x| x.eval(&mut ev)).collect();
        let vm: Vec<GtVec<C64>> = lm.iter().map(|x| x.eval(&mut ev)).collect();
        vec![a, b, isotropy_value(&vp).max(isotropy_value(&vm))]
    });
    let mut rep = ResidualReport::new(entries);
    let plus = rep.get("l_plus_nij").map(|r| r.pass).unwrap_or(false);
    let minus = rep.get("l_minus_nij").map(|r| r.pass).unwrap_or(false);
    let class = match (plus, minus) {
        (true, true) => InvolutivityClass::Strong,
        (true, false) => InvolutivityClass::ContactPlus,
        (false, true) => InvolutivityClass::ContactMinus,
        (false, false) => InvolutivityClass::None,
    };
    // the class is the outcome; individual L± failures are not check failures
    for r in rep.entries.iter_mut().take(2) {
        r.probe = true;
    }
    rep.set_flag("class", class.label());
    Ok((class, rep))
}
