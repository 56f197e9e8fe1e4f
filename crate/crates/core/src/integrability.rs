//! Integrability checks: Courant involutivity of eigenbundles on M and on
//! the cone, the Nij_M criterion for the R-conjugated cone structure and
//! its cone-side cross-check, normality and the Sasakian-type conditions.

use crate::calculus::{c_transform, courant, d, lie_bracket, lie_derivative, nij, wedge, CalcError, Form};
use crate::cone::{cone_gacx, lift_section, r_conjugate, r_field, ConeChart, ConeGacx};
use crate::expr::{Evaluator, Expr};
use crate::gta::{GtEndo, SectionField};
use crate::jet::C64;
use crate::linalg::Mat;
use crate::report::{sweep, Residual, ResidualReport};
use crate::structures::{
    eigenframe, frame_from_projector, frame_nijs, involutivity_class, isotropy_value, triple_residual, AlmostContactMetric,
    Gacm, Gacs, PivotRule, StructureError,
};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrabilityError {
    #[error("the two structures do not share a metric (deviation {residual:e} at {point:?})")]
    MetricMismatch { point: Vec<f64>, residual: f64 },
    #[error("structure has no metric")]
    NoMetric,
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Calculus(#[from] CalcError),
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "fail"
    }
}

/// 0 when the two verdicts agree, 1 otherwise.
fn agreement(name: &str, a: bool, b: bool) -> Residual {
    let v = if a == b { 0.0 } else { 1.0 };
    Residual::from_values(name, 0.5, &[vec![]], &[v])
}

/// +i eigenframe of a cone structure from the projector ½(1 − iJ), with
/// direct Nij residuals. `points` are cone points.
pub fn gacx_involutivity(j: &ConeGacx, points: &[Vec<f64>], tol: f64) -> Result<ResidualReport, StructureError> {
    let m = j.cone.dim();
    let proj = GtEndo::identity(m).sub(&j.j.scale(&Expr::imag_unit())).scale(&Expr::real(0.5));
    let frame = frame_from_projector(&proj, m, &j.cone.chart.center(), points, &PivotRule::Greedy)?;
    let nijs = frame_nijs(&frame);
    let i = Expr::imag_unit();
    let eig: Vec<SectionField> = frame.iter().map(|a| j.j.apply(a).sub(&a.scale(&i))).collect();
    let specs = [("nij", tol), ("frame_eigen", tol), ("frame_isotropy", tol)];
    let entries = sweep(points, &specs, |p| {
        let mut ev = Evaluator::new(p);
        let n = triple_residual(&nijs, &mut ev);
        let e = eig.iter().fold(0.0f64, |acc, s| acc.max(s.eval(&mut ev).max_abs()));
        let vals: Vec<_> = frame.iter().map(|a| a.eval(&mut ev)).collect();
        vec![n, e, isotropy_value(&vals)]
    });
    Ok(ResidualReport::new(entries))
}

fn cone_points_for(s: &Gacs, count: usize, seed: u64) -> (ConeChart, Vec<Vec<f64>>) {
    let cone = ConeChart::over(&s.chart);
    let pts = cone.sample(seed, count);
    (cone, pts)
}

/// The +i frame of Φ+Ψ: lifted E^{(1,0)}, E₊ − i∂t, E₋ − i dt.
fn cone_frame(cone: &ConeChart, e10: &[SectionField], s: &Gacs) -> Vec<SectionField> {
    let i = Expr::imag_unit();
    let mut out: Vec<SectionField> = e10.iter().map(lift_section).collect();
    out.push(lift_section(&s.eplus).sub(&cone.dt_vector().scale(&i)));
    out.push(lift_section(&s.eminus).sub(&cone.dt_form().scale(&i)));
    out
}

/// L± involutivity and ⟦E₊,E₋⟧ = 0 against direct involutivity of Φ+Ψ.
pub fn prop45_check(
    s: &Gacs,
    base_points: &[Vec<f64>],
    cone_points: &[Vec<f64>],
    tol: f64,
) -> Result<ResidualReport, StructureError> {
    let (class, cls) = involutivity_class(s, base_points, tol)?;
    let mut rep = ResidualReport::default();
    rep.merge("", cls);
    let br = courant(&s.eplus, &s.eminus);
    let mut bracket = sweep(base_points, &[("bracket_eplus_eminus", tol)], |p| {
        let mut ev = Evaluator::new(p);
        vec![br.eval(&mut ev).max_abs()]
    });
    let bracket = bracket.remove(0).as_probe();
    let ab = class == crate::structures::InvolutivityClass::Strong && bracket.pass;
    rep.push(bracket);

    let cone = ConeChart::over(&s.chart);
    let ef = eigenframe(s, &s.chart.center(), base_points)?;
    let frame = cone_frame(&cone, &ef.frame, s);
    let j = cone_gacx(s);
    let nijs = frame_nijs(&frame);
    let i = Expr::imag_unit();
    let eig: Vec<SectionField> = frame.iter().map(|a| j.j.apply(a).sub(&a.scale(&i))).collect();
    let mut entries = sweep(cone_points, &[("cone_nij", tol), ("cone_frame_eigen", tol)], |p| {
        let mut ev = Evaluator::new(p);
        let n = triple_residual(&nijs, &mut ev);
        let e = eig.iter().fold(0.0f64, |acc, a| acc.max(a.eval(&mut ev).max_abs()));
        vec![n, e]
    });
    entries[0].probe = true;
    let c = entries[0].pass;
    for e in entries {
        rep.push(e);
    }
    rep.push(agreement("iff_agreement", ab, c));
    rep.set_flag("strong_and_commuting", verdict(ab));
    rep.set_flag("cone_integrable", verdict(c));
    Ok(rep)
}

/// 2i(⟨E₋,A⟩⟨B,C⟩₋ + ⟨E₋,B⟩⟨C,A⟩₋ + ⟨E₋,C⟩⟨A,B⟩₋).
pub fn thm48_rhs(em: &SectionField, a: &SectionField, b: &SectionField, c: &SectionField) -> Expr {
    let s = em
        .pair(a)
        .mul(&b.pair_minus(c))
        .add(&em.pair(b).mul(&c.pair_minus(a)))
        .add(&em.pair(c).mul(&a.pair_minus(b)));
    s.scale(C64::new(0.0, 2.0))
}

struct Triple {
    /// Indices into the frame (E^{(1,0)} members first, then E₊, E₋).
    idx: [usize; 3],
    nij: Expr,
    rhs: Expr,
}

fn m_triples(frame: &[SectionField], em: &SectionField) -> Vec<Triple> {
    let f = frame.len();
    let mut out = Vec::new();
    for i in 0..f {
        for j in i + 1..f {
            for k in j + 1..f {
                let (a, b, c) = (&frame[i], &frame[j], &frame[k]);
                out.push(Triple { idx: [i, j, k], nij: nij(a, b, c), rhs: thm48_rhs(em, a, b, c) });
            }
        }
    }
    out
}

fn full_frame(s: &Gacs, base_points: &[Vec<f64>]) -> Result<(Vec<SectionField>, usize), StructureError> {
    let ef = eigenframe(s, &s.chart.center(), base_points)?;
    let k = ef.frame.len();
    let mut frame = ef.frame;
    frame.push(s.eplus.clone());
    frame.push(s.eminus.clone());
    Ok((frame, k))
}

/// |Nij_M − RHS| over all triples from E^{(1,0)} ∪ {E₊, E₋}.
pub fn thm48_residual(s: &Gacs, points: &[Vec<f64>], tol: f64) -> Result<ResidualReport, StructureError> {
    let (frame, k) = full_frame(s, points)?;
    let triples = m_triples(&frame, &s.eminus);
    let specs = [("defect", tol), ("e10_rhs", tol), ("nij", tol)];
    let entries = sweep(points, &specs, |p| {
        let mut ev = Evaluator::new(p);
        let mut defect: f64 = 0.0;
        let mut e10: f64 = 0.0;
        let mut raw: f64 = 0.0;
        for t in &triples {
            let n = ev.value(&t.nij);
            let r = ev.value(&t.rhs);
            defect = defect.max((n - r).norm());
            raw = raw.max(n.norm());
            if t.idx.iter().all(|&i| i < k) {
                e10 = e10.max(r.norm());
            }
        }
        vec![defect, e10, raw]
    });
    let mut rep = ResidualReport::new(entries);
    rep.entries[2].probe = true;
    let pass = rep.entries[0].pass;
    rep.set_flag("integrable", verdict(pass));
    Ok(rep)
}

/// Direct Nij on the R-conjugated cone frame against the four base-side
/// identities, the verdict agreement with [`thm48_residual`] and the
/// E^{(1,0)} ⊕ L_{E₋} sub-frame. `cone_points` are cone points.
pub fn cone_crosscheck(
    s: &Gacs,
    base_points: &[Vec<f64>],
    cone_points: &[Vec<f64>],
    tol: f64,
) -> Result<ResidualReport, StructureError> {
    let (frame, k) = full_frame(s, base_points)?;
    let cone = ConeChart::over(&s.chart);
    let r = r_field(&cone, 1.0);
    let cframe: Vec<SectionField> = cone_frame(&cone, &frame[..k], s).iter().map(|a| r.apply(a)).collect();
    let em = &s.eminus;
    let ep_ix = k;
    let em_ix = k + 1;
    let triples = m_triples(&frame, em);
    let cone_nij: Vec<Expr> = triples.iter().map(|t| nij(&cframe[t.idx[0]], &cframe[t.idx[1]], &cframe[t.idx[2]])).collect();
    // lifted base-side quantities: t-independent, so they evaluate on cone points
    let half_i = Expr::constant(C64::new(0.0, 0.5));
    let corrections: Vec<Expr> = triples
        .iter()
        .map(|t| {
            let [a, b, c] = t.idx;
            if c == ep_ix && b < k {
                // +½i(β(X) − α(Y)) = −i⟨A,B⟩₋
                half_i.mul(&frame[a].pair_minus(&frame[b]).scale(C64::new(-2.0, 0.0)))
            } else if b == ep_ix && c == em_ix {
                // −½i(η₋(X) − α(ξ₋)) = −i⟨E₋,A⟩₋
                half_i.mul(&em.pair_minus(&frame[a]).scale(C64::new(-2.0, 0.0)))
            } else {
                Expr::zero()
            }
        })
        .map(|e| lift_expr(&e, s.chart.dim()))
        .collect();
    let base_nij: Vec<Expr> = triples.iter().map(|t| lift_expr(&t.nij, s.chart.dim())).collect();
    let base_rhs: Vec<Expr> = triples.iter().map(|t| lift_expr(&t.rhs, s.chart.dim())).collect();
    let kind = |t: &Triple| -> usize {
        let [_, b, c] = t.idx;
        if c < k {
            0
        } else if c == ep_ix {
            1
        } else if b < k {
            2
        } else {
            3
        }
    };
    let kinds: Vec<usize> = triples.iter().map(kind).collect();
    let sub: Vec<bool> = triples.iter().map(|t| !t.idx.contains(&ep_ix)).collect();
    let i_struct = r_conjugate(&cone_gacx(s));
    let i = Expr::imag_unit();
    let eig: Vec<SectionField> = cframe.iter().map(|a| i_struct.j.apply(a).sub(&a.scale(&i))).collect();
    let tix = cone.t_index();
    let specs = [
        ("identity_e10", tol),
        ("identity_eplus", tol),
        ("identity_eminus", tol),
        ("identity_mixed", tol),
        ("route_difference", tol),
        ("frame_eigen", tol),
        ("cone_nij", tol),
        ("base_defect", tol),
        ("e10_eminus_subframe", tol),
    ];
    let entries = sweep(cone_points, &specs, |p| {
        let mut ev = Evaluator::new(p);
        let et = (-p[tix]).exp();
        let mut id = [0.0f64; 4];
        let mut route: f64 = 0.0;
        let mut cone_max: f64 = 0.0;
        let mut defect: f64 = 0.0;
        let mut subframe: f64 = 0.0;
        for (q, _) in triples.iter().enumerate() {
            let c = ev.value(&cone_nij[q]);
            let m = ev.value(&base_nij[q]);
            let corr = ev.value(&corrections[q]);
            let rhs = ev.value(&base_rhs[q]);
            id[kinds[q]] = id[kinds[q]].max((c - (m + corr) * et).norm());
            route = route.max((c - (m - rhs) * et).norm());
            cone_max = cone_max.max(c.norm());
            defect = defect.max((m - rhs).norm());
            if sub[q] {
                subframe = subframe.max(m.norm());
            }
        }
        let e = eig.iter().fold(0.0f64, |acc, a| acc.max(a.eval(&mut ev).max_abs()));
        vec![id[0], id[1], id[2], id[3], route, e, cone_max, defect, subframe]
    });
    let mut rep = ResidualReport::new(entries);
    let cone_pass = rep.get("cone_nij").map(|r| r.pass).unwrap_or(false);
    let base_pass = rep.get("base_defect").map(|r| r.pass).unwrap_or(false);
    for r in rep.entries.iter_mut() {
        match r.condition.as_str() {
            "cone_nij" | "base_defect" => r.probe = true,
            "e10_eminus_subframe" => r.probe = !base_pass,
            _ => {}
        }
    }
    rep.push(agreement("verdict_agreement", cone_pass, base_pass));
    rep.set_flag("cone_integrable", verdict(cone_pass));
    rep.set_flag("base_criterion", verdict(base_pass));
    Ok(rep)
}

/// Base expressions evaluate on cone points unchanged (the t coordinate is
/// last and unused), so lifting is the identity.
fn lift_expr(e: &Expr, base_dim: usize) -> Expr {
    debug_assert!(!e.depends_on(base_dim));
    e.clone()
}

/// Tangent matrix of I = φ + η⊗∂t − dt⊗ξ on the cone (column j is I∂_j).
pub fn classical_cone_i(acs: &AlmostContactMetric) -> Mat<Expr> {
    let n = acs.chart.dim();
    Mat::from_fn(n + 1, n + 1, |i, j| match (i < n, j < n) {
        (true, true) => acs.phi.get(i, j).clone(),
        (false, true) => acs.eta[j].clone(),
        (true, false) => acs.xi[i].neg(),
        (false, false) => Expr::zero(),
    })
}

/// Nijenhuis tensor of I on coordinate pairs: [I∂i,I∂j] − I[I∂i,∂j] − I[∂i,I∂j].
pub fn normality_check(acs: &AlmostContactMetric, points: &[Vec<f64>], tol: f64) -> ResidualReport {
    let i = classical_cone_i(acs);
    let m = i.rows();
    let cols: Vec<Vec<Expr>> = (0..m).map(|j| i.col(j)).collect();
    let basis = |k: usize| -> Vec<Expr> { (0..m).map(|l| if l == k { Expr::one() } else { Expr::zero() }).collect() };
    let mut comps = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            let t1 = lie_bracket(&cols[a], &cols[b]);
            let t2 = i.apply(&lie_bracket(&cols[a], &basis(b)));
            let t3 = i.apply(&lie_bracket(&basis(a), &cols[b]));
            for c in 0..m {
                comps.push(t1[c].sub(&t2[c]).sub(&t3[c]));
            }
        }
    }
    let cone_pts: Vec<Vec<f64>> = points.iter().map(|p| if p.len() == m { p.clone() } else { with_t(p, 0.0) }).collect();
    let mut entries = sweep(&cone_pts, &[("nijenhuis", tol)], |p| {
        let mut ev = Evaluator::new(p);
        vec![comps.iter().fold(0.0, |acc, e| acc.max(ev.value(e).norm()))]
    });
    ResidualReport::new(vec![entries.remove(0)])
}

fn with_t(p: &[f64], t: f64) -> Vec<f64> {
    let mut q = p.to_vec();
    q.push(t);
    q
}

/// θ = g(·, φ·) as a 2-form.
pub fn fundamental_form(g: &Mat<Expr>, phi: &Mat<Expr>) -> Form {
    Form::two_form_upper(&g.matmul(phi))
}

fn max_form(w: &Form, ev: &mut Evaluator) -> f64 {
    w.max_abs_at(ev)
}

/// θ − ½dη (the Sasakian criterion θ = dη with ½-weighted d).
pub fn sasakian_criterion(acs: &AlmostContactMetric, points: &[Vec<f64>], tol: f64) -> Result<ResidualReport, IntegrabilityError> {
    let g = acs.g.as_ref().ok_or(IntegrabilityError::NoMetric)?;
    let theta = fundamental_form(g, &acs.phi);
    let de = d(&Form::one_form(acs.eta.clone()))?;
    let diff = theta.sub(&de.scale(&Expr::real(0.5)));
    let entries = sweep(points, &[("theta_minus_d_eta", tol)], |p| {
        let mut ev = Evaluator::new(p);
        vec![max_form(&diff, &mut ev)]
    });
    Ok(ResidualReport::new(entries))
}

struct VaismanSide {
    lt: Form,
    cond2: Form,
    cond3: Form,
}

fn vaisman_side(acs: &AlmostContactMetric, g: &Mat<Expr>) -> Result<VaismanSide, CalcError> {
    let theta = fundamental_form(g, &acs.phi);
    let eta = Form::one_form(acs.eta.clone());
    let lt = lie_derivative(&acs.xi, &theta)?;
    let llt = lie_derivative(&acs.xi, &lt)?;
    let cond2 = theta.sub(&d(&eta)?.scale(&Expr::real(0.5))).add(&llt.scale(&Expr::real(0.25)));
    let cond3 = d(&theta)?
        .sub(&wedge(&eta, &lt)?)
        .sub(&c_transform(&d(&lt)?, &acs.phi)?.scale(&Expr::real(0.5)));
    Ok(VaismanSide { lt, cond2, cond3 })
}

/// The three conditions on a pair sharing a metric; axioms of the two
/// structures are not enforced here.
pub fn vaisman_conditions(
    plus: &AlmostContactMetric,
    minus: &AlmostContactMetric,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<ResidualReport, IntegrabilityError> {
    let g = plus.g.as_ref().ok_or(IntegrabilityError::NoMetric)?;
    let g2 = minus.g.as_ref().ok_or(IntegrabilityError::NoMetric)?;
    for p in points {
        let mut ev = Evaluator::new(p);
        let dev = g.eval(&mut ev).sub(&g2.eval(&mut ev)).max_abs();
        if !(dev < 1e-10) {
            return Err(IntegrabilityError::MetricMismatch { point: p.clone(), residual: dev });
        }
    }
    let a = vaisman_side(plus, g)?;
    let b = vaisman_side(minus, g)?;
    let c1 = a.lt.add(&b.lt);
    let specs = [
        ("lie_theta_balance", tol),
        ("theta_eta_plus", tol),
        ("theta_eta_minus", tol),
        ("d_theta_plus", tol),
        ("d_theta_minus", tol),
    ];
    let entries = sweep(points, &specs, |p| {
        let mut ev = Evaluator::new(p);
        vec![
            max_form(&c1, &mut ev),
            max_form(&a.cond2, &mut ev),
            max_form(&b.cond2, &mut ev),
            max_form(&a.cond3, &mut ev),
            max_form(&b.cond3, &mut ev),
        ]
    });
    Ok(ResidualReport::new(entries))
}

/// The dual triple (GΦ, GE₊, GE₋).
pub fn dual_gacs(m: &Gacm) -> Gacs {
    let g = &m.metric.endo;
    Gacs {
        chart: m.gacs.chart.clone(),
        phi: g.compose(&m.gacs.phi),
        eplus: g.apply(&m.gacs.eplus),
        eminus: g.apply(&m.gacs.eminus),
    }
}

/// Both R-conjugated cone structures of (Φ,E±) and (GΦ,GE±) via the Nij_M
/// criterion and the cone cross-check.
pub fn generalized_sasakian_check(
    m: &Gacm,
    base_points: &[Vec<f64>],
    cone_points: &[Vec<f64>],
    tol: f64,
) -> Result<ResidualReport, StructureError> {
    let mut rep = ResidualReport::default();
    let mut ok = true;
    for (name, s) in [("first", m.gacs.clone()), ("second", dual_gacs(m))] {
        let t = thm48_residual(&s, base_points, tol)?;
        ok &= t.pass();
        rep.merge(&format!("{}.thm48", name), t);
        let c = cone_crosscheck(&s, base_points, cone_points, tol)?;
        ok &= c.pass();
        rep.merge(&format!("{}.cone", name), c);
    }
    rep.set_flag("generalized_sasakian", verdict(ok));
    Ok(rep)
}

/// Default cone sample for a base structure.
pub fn default_cone_points(s: &Gacs, count: usize, seed: u64) -> Vec<Vec<f64>> {
    cone_points_for(s, count, seed).1
}
