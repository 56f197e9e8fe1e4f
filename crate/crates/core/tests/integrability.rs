mod common;

use common::*;
use gencontact::calculus::Chart;
use gencontact::cone::{cone_gacx, r_conjugate, ConeChart};
use gencontact::expr::Expr;
use gencontact::gallery::{darboux_contact, heisenberg_sasakian, kahler_interval, kahler_interval_with, sasakian_to_gs};
use gencontact::gta::GtEndo;
use gencontact::integrability::{
    cone_crosscheck, default_cone_points, gacx_involutivity, generalized_sasakian_check, normality_check, prop45_check,
    sasakian_criterion, thm48_residual, vaisman_conditions, IntegrabilityError,
};
use gencontact::linalg::Mat;
use gencontact::structures::{gacs_from_acs, Gacs};
use std::f64::consts::FRAC_PI_4;

const TOL: f64 = 1e-7;

fn pts(chart: &Chart, n: usize) -> Vec<Vec<f64>> {
    chart.sample(5, n)
}

fn zeros3() -> Mat<Expr> {
    Mat::from_fn(3, 3, |_, _| Expr::zero())
}

fn heisenberg() -> Gacs {
    gacs_from_acs(&heisenberg_sasakian()).unwrap()
}

fn perturbed_heisenberg() -> Gacs {
    let h = heisenberg();
    let mut tt = zeros3();
    tt.set(0, 2, Expr::var(2).scale(c(0.3)));
    let mut tc = zeros3();
    tc.set(2, 0, Expr::var(2).scale(c(0.3)));
    let delta = GtEndo { tt, tc, ct: zeros3(), cc: zeros3() };
    Gacs { phi: h.phi.add(&delta), ..h }
}

#[test]
fn prop45_sides_agree() {
    let cases = [(heisenberg(), "pass"), (darboux_contact(1), "fail"), (perturbed_heisenberg(), "fail")];
    for (s, want) in cases {
        let base = pts(&s.chart, 20);
        let cone = default_cone_points(&s, 20, 5);
        let rep = prop45_check(&s, &base, &cone, TOL).unwrap();
        assert_eq!(rep.flags["strong_and_commuting"], want);
        assert_eq!(rep.flags["cone_integrable"], want);
        assert!(rep.get("iff_agreement").unwrap().pass);
    }
}

#[test]
fn thm48_examples() {
    let h = heisenberg();
    let rep = thm48_residual(&h, &pts(&h.chart, 30), TOL).unwrap();
    assert!(rep.pass(), "{:?}", rep);
    // the right side vanishes identically on E^{(1,0)} triples
    assert_eq!(rep.max("e10_rhs"), 0.0);
    let d = darboux_contact(1);
    let rep = thm48_residual(&d, &pts(&d.chart, 30), TOL).unwrap();
    assert!(!rep.pass());
    assert!(rep.max("defect") > 0.1);
    assert_eq!(rep.max("e10_rhs"), 0.0);
}

#[test]
fn cone_crosscheck_on_slices() {
    for s in [heisenberg(), darboux_contact(1), kahler_interval().gacm.gacs] {
        let base = pts(&s.chart, 12);
        for t in [-0.5, 0.0, 0.5] {
            let cone: Vec<Vec<f64>> = base
                .iter()
                .map(|p| {
                    let mut q = p.clone();
                    q.push(t);
                    q
                })
                .collect();
            let rep = cone_crosscheck(&s, &base, &cone, TOL).unwrap();
            let m48 = thm48_residual(&s, &base, TOL).unwrap().pass();
            assert!(rep.pass(), "t = {t}: {:?}", rep);
            let want = if m48 { "pass" } else { "fail" };
            assert_eq!(rep.flags["cone_integrable"], want);
            assert_eq!(rep.flags["base_criterion"], want);
        }
    }
}

#[test]
fn direct_cone_involutivity_matches() {
    for (s, integrable) in [(heisenberg(), true), (darboux_contact(1), false)] {
        let cone = default_cone_points(&s, 15, 1);
        let j = r_conjugate(&cone_gacx(&s));
        let rep = gacx_involutivity(&j, &cone, TOL).unwrap();
        assert_eq!(rep.get("nij").unwrap().pass, integrable);
        assert!(rep.get("frame_eigen").unwrap().pass && rep.get("frame_isotropy").unwrap().pass);
    }
}

#[test]
fn normality_examples() {
    let k = kahler_interval();
    let kp = pts(&k.plus.chart, 20);
    assert!(normality_check(&k.plus, &kp, TOL).pass());
    assert!(normality_check(&k.minus, &kp, TOL).pass());
    let h = heisenberg_sasakian();
    let hp = pts(&h.chart, 20);
    assert!(normality_check(&h, &hp, TOL).pass());
    // φ + 0.1 dx⊗∂y
    let mut bent = h.clone();
    bent.phi.set(1, 0, h.phi.get(1, 0).add(&Expr::real(0.1)));
    assert!(normality_check(&bent, &hp, TOL).worst() > 1e-3);
    // points may also be given on the cone
    let cone = ConeChart::over(&h.chart).sample(3, 10);
    assert!(normality_check(&h, &cone, TOL).pass());
}

#[test]
fn vaisman_examples() {
    let h = heisenberg_sasakian();
    let hp = pts(&h.chart, 20);
    assert!(vaisman_conditions(&h, &h, &hp, 1e-8).unwrap().pass());
    let k = kahler_interval();
    let kp = pts(&k.plus.chart, 20);
    assert!(vaisman_conditions(&k.plus, &k.minus, &kp, 1e-8).unwrap().pass());
    let mut detuned = k.minus.clone();
    detuned.eta = detuned.eta.iter().map(|e| e.scale(c(2.0))).collect();
    assert!(vaisman_conditions(&k.plus, &detuned, &kp, 1e-8).unwrap().worst() > 1e-2);
    // with dη = 0 the detuning only reaches the third condition; on Heisenberg it breaks the second
    let mut hd = h.clone();
    hd.eta = hd.eta.iter().map(|e| e.scale(c(2.0))).collect();
    let rep = vaisman_conditions(&h, &hd, &hp, 1e-8).unwrap();
    assert!(rep.max("theta_eta_minus") > 1e-2);
    assert!(rep.max("theta_eta_plus") < 1e-8);
    let mut other = k.minus.clone();
    other.g = Some(Mat::identity(3));
    assert!(matches!(vaisman_conditions(&k.plus, &other, &kp, 1e-8), Err(IntegrabilityError::MetricMismatch { .. })));
    other.g = None;
    assert!(matches!(vaisman_conditions(&k.plus, &other, &kp, 1e-8), Err(IntegrabilityError::NoMetric)));
}

#[test]
fn sasakian_criterion_examples() {
    let h = heisenberg_sasakian();
    assert!(sasakian_criterion(&h, &pts(&h.chart, 20), 1e-9).unwrap().pass());
    // θ = ∓sin(2z) dx∧dy while dη = 0
    let k = kahler_interval();
    let at = vec![vec![0.2, -0.3, FRAC_PI_4]];
    for acs in [&k.plus, &k.minus] {
        let r = sasakian_criterion(acs, &at, 1e-9).unwrap().worst();
        assert!((r - 1.0).abs() < 1e-12, "{r}");
    }
}

#[test]
fn generalized_sasakian_examples() {
    let h = sasakian_to_gs(&heisenberg_sasakian()).unwrap();
    let base = pts(&h.gacs.chart, 15);
    let cone = default_cone_points(&h.gacs, 15, 2);
    assert!(generalized_sasakian_check(&h, &base, &cone, TOL).unwrap().pass());
    let k = kahler_interval();
    let base = pts(&k.gacm.gacs.chart, 15);
    let cone = default_cone_points(&k.gacm.gacs, 15, 2);
    let rep = generalized_sasakian_check(&k.gacm, &base, &cone, TOL).unwrap();
    assert!(rep.pass(), "{:?}", rep);
    assert_eq!(rep.flags["generalized_sasakian"], "pass");
    // without the B-field, or with the middle factor's sign as displayed
    for (b, sign) in [(0.0, -1.0), (1.0, 1.0)] {
        let bad = kahler_interval_with(b, sign);
        let rep = generalized_sasakian_check(&bad.gacm, &base, &cone, TOL).unwrap();
        assert!(rep.worst() > 1e-3);
        assert_eq!(rep.flags["generalized_sasakian"], "fail");
    }
}
