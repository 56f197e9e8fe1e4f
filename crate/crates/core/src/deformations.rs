//! f-structures (Φᶠ, E₊ᶠ, E₋ᶠ, f), the K±(κ) deformations and their cone
//! counterparts.

use crate::calculus::{Chart, Form};
use crate::cone::{i_map, i_prime, lift_endo, lift_section, psi, ConeChart, ConeGacx};
use crate::expr::{Evaluator, Expr};
use crate::gta::{GtEndo, GtEndoField, GtVec, SectionField};
use crate::integrability::gacx_involutivity;
use crate::jet::C64;
use crate::linalg::Mat;
use crate::report::{point_seed, sweep, ResidualReport};
use crate::structures::{positivity_probe, positivity_residual, Gacm, Gacs, StructureError, POSITIVITY_PROBES};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeformError {
    #[error("cannot normalize: vector part of E₊ᶠ+E₋ᶠ vanishes at {point:?} where f = {f:e}")]
    ZeroZeta { point: Vec<f64>, f: f64 },
    #[error("1-form has {got} components, chart has dimension {expected}")]
    Dim { expected: usize, got: usize },
    #[error("generalized metric carries no Riemannian metric g")]
    NoMetric,
    #[error("generalized metric has a nonzero B-field (|b| = {residual:e} at {point:?})")]
    NonzeroB { point: Vec<f64>, residual: f64 },
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// Generalized f-almost contact structure.
#[derive(Clone, Debug)]
pub struct FGacs {
    pub chart: Chart,
    pub phi: GtEndoField,
    pub eplus: SectionField,
    pub eminus: SectionField,
    pub f: Expr,
}

impl FGacs {
    /// The f = 0 structure.
    pub fn from_gacs(s: &Gacs) -> FGacs {
        FGacs { chart: s.chart.clone(), phi: s.phi.clone(), eplus: s.eplus.clone(), eminus: s.eminus.clone(), f: Expr::zero() }
    }

    /// Drops f; only meaningful when f vanishes.
    pub fn to_gacs(&self) -> Gacs {
        Gacs { chart: self.chart.clone(), phi: self.phi.clone(), eplus: self.eplus.clone(), eminus: self.eminus.clone() }
    }

    /// Largest pointwise difference from `o` over all four slots.
    pub fn deviation(&self, o: &FGacs, points: &[Vec<f64>]) -> f64 {
        points.iter().fold(0.0, |m, p| {
            let mut ev = Evaluator::new(p);
            let d = self.phi.eval(&mut ev).sub(&o.phi.eval(&mut ev)).max_abs();
            let d = d.max(self.eplus.eval(&mut ev).sub(&o.eplus.eval(&mut ev)).max_abs());
            let d = d.max(self.eminus.eval(&mut ev).sub(&o.eminus.eval(&mut ev)).max_abs());
            let d = d.max((ev.value(&self.f) - ev.value(&o.f)).norm());
            m.max(d)
        })
    }
}

pub fn fgacs_check(s: &FGacs, points: &[Vec<f64>], tol: f64) -> ResidualReport {
    let specs = [
        ("skew", tol),
        ("square", tol),
        ("eigen_plus", tol),
        ("eigen_minus", tol),
        ("normalization", tol),
        ("isotropy", tol),
    ];
    let n = s.chart.dim();
    ResidualReport::new(sweep(points, &specs, |p| {
        let mut ev = Evaluator::new(p);
        let phi = s.phi.eval(&mut ev);
        let ep = s.eplus.eval(&mut ev);
        let em = s.eminus.eval(&mut ev);
        let f = ev.value(&s.f);
        let sq = phi
            .compose(&phi)
            .add(&GtEndo::identity(n))
            .sub(&GtEndo::tensor_pair(&ep, &em))
            .sub(&GtEndo::tensor_pair(&em, &ep));
        vec![
            phi.add(&phi.adjoint()).max_abs(),
            sq.max_abs(),
            phi.apply(&ep).sub(&ep.scale(&f)).max_abs(),
            phi.apply(&em).add(&em.scale(&f)).max_abs(),
            (ep.pair(&em) * 2.0 - 1.0 - f * f).norm(),
            ep.pair(&ep).norm().max(em.pair(&em).norm()),
        ]
    }))
}

fn kappa_section(s: &FGacs, kappa: &[Expr]) -> SectionField {
    assert_eq!(kappa.len(), s.chart.dim(), "κ must have one component per coordinate");
    GtVec::covector(kappa.to_vec())
}

/// K₋(κ): fixes E₋ᶠ.
pub fn k_minus(s: &FGacs, kappa: &[Expr]) -> FGacs {
    let k = kappa_section(s, kappa);
    let c = s.eminus.pair(&k).scale(C64::new(2.0, 0.0));
    FGacs {
        chart: s.chart.clone(),
        phi: s.phi.sub(&GtEndo::tensor_pair(&k, &s.eminus)).add(&GtEndo::tensor_pair(&s.eminus, &k)),
        eplus: s.eplus.add(&s.phi.apply(&k)).add(&k.scale(&c)).add(&k.scale(&s.f)),
        eminus: s.eminus.clone(),
        f: s.f.add(&c),
    }
}

/// K₊(κ): fixes E₊ᶠ.
pub fn k_plus(s: &FGacs, kappa: &[Expr]) -> FGacs {
    let k = kappa_section(s, kappa);
    let c = s.eplus.pair(&k).scale(C64::new(2.0, 0.0));
    FGacs {
        chart: s.chart.clone(),
        phi: s.phi.sub(&GtEndo::tensor_pair(&k, &s.eplus)).add(&GtEndo::tensor_pair(&s.eplus, &k)),
        eplus: s.eplus.clone(),
        eminus: s.eminus.add(&s.phi.apply(&k)).add(&k.scale(&c)).sub(&k.scale(&s.f)),
        f: s.f.sub(&c),
    }
}

/// Slot-wise B-field transform; f is kept.
pub fn b_transform(s: &FGacs, b: &Form) -> FGacs {
    let bm = b.to_mat();
    let eb = GtEndo::b_field(&bm);
    let ebi = GtEndo::b_field(&bm.neg());
    FGacs {
        chart: s.chart.clone(),
        phi: s.phi.conjugate(&eb, &ebi),
        eplus: eb.apply(&s.eplus),
        eminus: eb.apply(&s.eminus),
        f: s.f.clone(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KSign {
    Plus,
    Minus,
}

pub fn k_deform(s: &FGacs, sign: KSign, kappa: &[Expr]) -> FGacs {
    match sign {
        KSign::Plus => k_plus(s, kappa),
        KSign::Minus => k_minus(s, kappa),
    }
}

/// Max deviation between e^B∘K(κ) and K(κ)∘e^B applied to `s`.
pub fn b_commute_check(s: &FGacs, sign: KSign, kappa: &[Expr], b: &Form, points: &[Vec<f64>]) -> f64 {
    let lhs = b_transform(&k_deform(s, sign, kappa), b);
    let rhs = k_deform(&b_transform(s, b), sign, kappa);
    lhs.deviation(&rhs, points)
}

/// α = f ζ♭/|ζ|² (Euclidean) with β = −α, ζ the vector part of E₊ᶠ+E₋ᶠ.
pub fn normalization_form(s: &FGacs) -> Vec<Expr> {
    let zeta: Vec<Expr> = s.eplus.vec.iter().zip(&s.eminus.vec).map(|(a, b)| a.add(b)).collect();
    let norm2 = Expr::sum(zeta.iter().map(|z| z.mul(z)).collect::<Vec<_>>().iter());
    zeta.iter().map(|z| s.f.mul(z).div(&norm2)).collect()
}

/// Returns (Φ, E±) = K₋(−α)(K₊(α)(s)) with f = 0, and α, β.
pub fn normalize(s: &FGacs, points: &[Vec<f64>]) -> Result<(Gacs, Vec<Expr>, Vec<Expr>), DeformError> {
    for p in points {
        let mut ev = Evaluator::new(p);
        let f = ev.value(&s.f).norm();
        if f == 0.0 {
            continue;
        }
        let z2: f64 = s.eplus.vec.iter().zip(&s.eminus.vec).map(|(a, b)| (ev.value(a) + ev.value(b)).norm_sqr()).sum();
        if !(z2 > 1e-24) {
            return Err(DeformError::ZeroZeta { point: p.clone(), f });
        }
    }
    if s.f.is_zero() {
        let zero = vec![Expr::zero(); s.chart.dim()];
        return Ok((s.to_gacs(), zero.clone(), zero));
    }
    let alpha = normalization_form(s);
    let beta: Vec<Expr> = alpha.iter().map(|a| a.neg()).collect();
    let out = k_minus(&k_plus(s, &alpha), &beta);
    Ok((out.to_gacs(), alpha, beta))
}

fn cone_form(cone: &ConeChart, kappa: &[Expr], weight: &Expr) -> Form {
    // weight · dt∧κ as a 2-form on the cone
    let m = cone.dim();
    let tix = cone.t_index();
    let mut b = Mat::from_fn(m, m, |_, _| Expr::zero());
    for (i, k) in kappa.iter().enumerate() {
        let v = weight.mul(k);
        b.set(tix, i, v.clone());
        b.set(i, tix, v.neg());
    }
    Form::two_form_upper(&b)
}

/// The cone 2-form e^{2t}dt∧κ that conjugates I into I∘K₋(κ).
pub fn cone_b_form(cone: &ConeChart, kappa: &[Expr]) -> Form {
    cone_form(cone, kappa, &cone.t().scale(C64::new(2.0, 0.0)).exp())
}

/// The cone 2-form dt∧κ that conjugates Φ+Ψ (and I′) into I′∘K₋(κ).
pub fn cone_b_form_flat(cone: &ConeChart, kappa: &[Expr]) -> Form {
    cone_form(cone, kappa, &Expr::one())
}

fn conj_b(j: &GtEndoField, b: &Form) -> GtEndoField {
    let bm = b.to_mat();
    j.conjugate(&GtEndo::b_field(&bm), &GtEndo::b_field(&bm.neg()))
}

fn endo_dev(a: &GtEndoField, b: &GtEndoField, points: &[Vec<f64>], name: &str, tol: f64) -> crate::report::Residual {
    sweep(points, &[(name, tol)], |p| {
        let mut ev = Evaluator::new(p);
        vec![a.eval(&mut ev).sub(&b.eval(&mut ev)).max_abs()]
    })
    .remove(0)
}

/// Cone B-field correspondence for K₋(κ), in both the conjugated and the
/// unconjugated form. `points` are cone points.
pub fn cone_b_correspondence(s: &FGacs, kappa: &[Expr], points: &[Vec<f64>], tol: f64) -> ResidualReport {
    let target = k_minus(s, kappa);
    let i0 = i_map(s);
    let cone = &i0.cone;
    let lhs = conj_b(&i0.j, &cone_b_form(cone, kappa));
    let mut rep = ResidualReport::default();
    rep.push(endo_dev(&lhs, &i_map(&target).j, points, "i_conjugation", tol));
    let lhs = conj_b(&i_prime(s).j, &cone_b_form_flat(cone, kappa));
    rep.push(endo_dev(&lhs, &i_prime(&target).j, points, "i_prime_conjugation", tol));
    rep
}

/// The expanded right-hand side Φᵏ+Ψ(E₊ᵏ,E₋) + 2⟨E₋,κ⟩(∂t⊗dt − dt⊗∂t) for a
/// Gacs, written term by term.
pub fn k_minus_cone_display(s: &Gacs, kappa: &[Expr]) -> ConeGacx {
    let cone = ConeChart::over(&s.chart);
    let k = GtVec::covector(kappa.to_vec());
    let c = s.eminus.pair(&k).scale(C64::new(2.0, 0.0));
    let phik = s.phi.sub(&GtEndo::tensor_pair(&k, &s.eminus)).add(&GtEndo::tensor_pair(&s.eminus, &k));
    let epk = s.eplus.add(&s.phi.apply(&k)).add(&k.scale(&c));
    let dtv = cone.dt_vector();
    let dtf = cone.dt_form();
    let corr = GtEndo::tensor_pair(&dtv, &dtf).sub(&GtEndo::tensor_pair(&dtf, &dtv)).scale(&c);
    let j = lift_endo(&phik).add(&psi(&cone, &epk, &s.eminus)).add(&corr);
    ConeGacx { cone, j }
}

/// G̃_α on the cone from a Riemannian metric g and a 1-form α.
pub fn g_tilde(cone: &ConeChart, g: &Mat<Expr>, alpha: &[Expr]) -> GtEndoField {
    let n = cone.base_dim();
    let ginv = g.inverse();
    let core = GtEndo { tt: Mat::zeros(n, n), tc: ginv.clone(), ct: g.clone(), cc: Mat::zeros(n, n) };
    let ga = GtVec::vector(ginv.apply(alpha));
    let ga_alpha = Expr::sum(ginv.apply(alpha).iter().zip(alpha).map(|(a, b)| a.mul(b)).collect::<Vec<_>>().iter());
    let dtv = cone.dt_vector();
    let lga = lift_section(&ga);
    let upper = GtEndo::tensor_pair(&lga, &dtv)
        .neg()
        .sub(&GtEndo::tensor_pair(&dtv, &lga))
        .add(&GtEndo::tensor_pair(&dtv, &dtv).scale(&Expr::one().add(&ga_alpha)));
    let adt = lift_section(&GtVec::covector(alpha.to_vec())).add(&cone.dt_form());
    let lower = GtEndo::tensor_pair(&adt, &adt);
    lift_endo(&core).add(&upper).add(&lower)
}

fn riemannian(m: &Gacm) -> Result<Mat<Expr>, DeformError> {
    m.metric.g.clone().ok_or(DeformError::NoMetric)
}

/// Compatibility of I′(s) with G̃_α and the identities 2⟨E₊ᶠ,α⟩ = −f and
/// Φᶠα = −GE₊ᶠ + E₋ᶠ. `points` are cone points.
pub fn thm510_check(s: &FGacs, g: &Mat<Expr>, alpha: &[Expr], points: &[Vec<f64>], tol: f64) -> ResidualReport {
    let ip = i_prime(s);
    let gt = g_tilde(&ip.cone, g, alpha);
    let n = s.chart.dim();
    let ginv = g.inverse();
    let gm = GtEndo { tt: Mat::zeros(n, n), tc: ginv, ct: g.clone(), cc: Mat::zeros(n, n) };
    let a = GtVec::covector(alpha.to_vec());
    let specs = [("compatibility", tol), ("pairing_identity", tol), ("phi_alpha_identity", tol), ("metric_involution", tol)];
    let entries = sweep(points, &specs, |p| {
        let mut ev = Evaluator::new(p);
        let i = ip.j.eval(&mut ev);
        let g = gt.eval(&mut ev);
        let compat = g.add(&i.compose(&g).compose(&i)).max_abs();
        let ep = s.eplus.eval(&mut ev);
        let em = s.eminus.eval(&mut ev);
        let av = a.eval(&mut ev);
        let f = ev.value(&s.f);
        let pairing = (ep.pair(&av) * 2.0 + f).norm();
        let phi = s.phi.eval(&mut ev);
        let gmv = gm.eval(&mut ev);
        let ident = phi.apply(&av).add(&gmv.apply(&ep)).sub(&em).max_abs();
        let inv = g.compose(&g).sub(&GtEndo::identity(g.dim())).max_abs();
        vec![compat, pairing, ident, inv]
    });
    let mut rep = ResidualReport::new(entries);
    if let Some(r) = rep.entries.last_mut() {
        r.probe = true;
    }
    rep
}

/// K₊(α) applied to the f = 0 structure underlying a Gacm.
pub fn k_plus_of(m: &Gacm, alpha: &[Expr]) -> FGacs {
    k_plus(&FGacs::from_gacs(&m.gacs), alpha)
}

/// The same for the dual triple (GΦ, GE₊, GE₋).
pub fn k_plus_of_dual(m: &Gacm, alpha: &[Expr]) -> FGacs {
    let g = &m.metric.endo;
    let dual = Gacs {
        chart: m.gacs.chart.clone(),
        phi: g.compose(&m.gacs.phi),
        eplus: g.apply(&m.gacs.eplus),
        eminus: g.apply(&m.gacs.eminus),
    };
    k_plus(&FGacs::from_gacs(&dual), alpha)
}

/// Forward direction: K₊(α)(Φ,E±,0) built from the Gacm, checked against
/// G̃_α made from the Gacm's own g. The Gacm must have b = 0.
pub fn thm510_forward(m: &Gacm, alpha: &[Expr], points: &[Vec<f64>], tol: f64) -> Result<ResidualReport, DeformError> {
    let g = riemannian(m)?;
    if alpha.len() != g.rows() {
        return Err(DeformError::Dim { expected: g.rows(), got: alpha.len() });
    }
    // G̃_α is built from g alone
    if let Some(b) = &m.metric.b {
        for p in crate::structures::guard_points(&m.gacs.chart) {
            let mut ev = Evaluator::new(&p);
            let r = b.map(|e| ev.value(e)).max_abs();
            if r > 1e-12 {
                return Err(DeformError::NonzeroB { point: p, residual: r });
            }
        }
    }
    Ok(thm510_check(&k_plus_of(m, alpha), &g, alpha, points, tol))
}

/// Commutation, symmetry, involution and positivity of −I′₁∘I′₂ for two
/// structures on the same chart. `points` are cone points.
pub fn commuting_pair_check(s1: &FGacs, s2: &FGacs, points: &[Vec<f64>], tol: f64) -> ResidualReport {
    let i1 = i_prime(s1);
    let i2 = i_prime(s2);
    let specs = [("commutator", tol), ("symmetry", tol), ("involution", tol), ("positivity", tol)];
    ResidualReport::new(sweep(points, &specs, |p| {
        let mut ev = Evaluator::new(p);
        let a = i1.j.eval(&mut ev);
        let b = i2.j.eval(&mut ev);
        let comm = a.compose(&b).sub(&b.compose(&a)).max_abs();
        let m = a.compose(&b).neg();
        let sym = m.sub(&m.adjoint()).max_abs();
        let inv = m.compose(&m).sub(&GtEndo::identity(m.dim())).max_abs();
        let q = positivity_probe(&m, point_seed(p), POSITIVITY_PROBES);
        vec![comm, sym, inv, positivity_residual(q)]
    }))
}

/// I′(K₊(α)(Φ,E±,0)) and I′(K₊(α)(GΦ,GE±,0)) commute and give a metric.
pub fn cor511_check(m: &Gacm, alpha: &[Expr], points: &[Vec<f64>], tol: f64) -> ResidualReport {
    commuting_pair_check(&k_plus_of(m, alpha), &k_plus_of_dual(m, alpha), points, tol)
}

/// Generalized f-almost contact metric structure stored with its witness.
#[derive(Clone, Debug)]
pub struct FGacm {
    pub witness: Gacm,
    pub alpha: Vec<Expr>,
    pub beta: Vec<Expr>,
    /// K₋(β)∘K₊(α)(Φ,E±,0).
    pub structure: FGacs,
    /// K₋(β)∘K₊(α)(GΦ,GE±,0).
    pub dual: FGacs,
}

impl FGacm {
    pub fn new(witness: Gacm, alpha: Vec<Expr>, beta: Vec<Expr>) -> Result<FGacm, DeformError> {
        let n = witness.gacs.chart.dim();
        for k in [&alpha, &beta] {
            if k.len() != n {
                return Err(DeformError::Dim { expected: n, got: k.len() });
            }
        }
        let structure = k_minus(&k_plus_of(&witness, &alpha), &beta);
        let dual = k_minus(&k_plus_of_dual(&witness, &alpha), &beta);
        Ok(FGacm { witness, alpha, beta, structure, dual })
    }
}

/// Involutivity of the +i eigenbundles of both I structures. `points` are
/// cone points.
pub fn f_sasakian_check(fm: &FGacm, points: &[Vec<f64>], tol: f64) -> Result<ResidualReport, StructureError> {
    let mut rep = ResidualReport::default();
    let first = gacx_involutivity(&i_map(&fm.structure), points, tol)?;
    let second = gacx_involutivity(&i_map(&fm.dual), points, tol)?;
    rep.merge("first", first);
    rep.merge("second", second);
    Ok(rep)
}
