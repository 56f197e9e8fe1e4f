mod common;

use common::*;
use gencontact::calculus::{Chart, Form};
use gencontact::deformations::{k_minus, normalize, FGacs};
use gencontact::expr::{Evaluator, Expr};
use gencontact::gallery::{darboux, darboux_contact, heisenberg_sasakian, kahler_interval, sasakian_to_gs};
use gencontact::gta::{GtEndo, GtVec, SectionField};
use gencontact::linalg::Mat;
use gencontact::structures::{
    acms_check, b_transform, contact_data, dual_gacm, eigenframe, eigenframe_with, gacm_check, gacs_check,
    gacs_from_acs, gacs_from_contact, gmetric_from_gb, involutivity_class, phi_cube_check, phi_kernel_check,
    Gacm, Gacs, InvolutivityClass, PivotRule, StructureError,
};
use proptest::prelude::*;

fn pts(chart: &Chart, n: usize) -> Vec<Vec<f64>> {
    chart.sample(42, n)
}

fn zeros3() -> Mat<Expr> {
    Mat::from_fn(3, 3, |_, _| Expr::zero())
}

fn two_form(i: usize, j: usize, e: Expr) -> Form {
    let mut m = zeros3();
    m.set(i, j, e.clone());
    m.set(j, i, e.neg());
    Form::two_form_upper(&m)
}

fn endo_dev(a: &GtEndo<Expr>, b: &GtEndo<Expr>, points: &[Vec<f64>]) -> f64 {
    points.iter().map(|p| a.eval(&mut Evaluator::new(p)).sub(&b.eval(&mut Evaluator::new(p))).max_abs()).fold(0.0, f64::max)
}

fn sec_dev(a: &SectionField, b: &SectionField, points: &[Vec<f64>]) -> f64 {
    points.iter().map(|p| a.sub(b).eval(&mut Evaluator::new(p)).max_abs()).fold(0.0, f64::max)
}

#[test]
fn from_acs_has_classical_blocks() {
    let acs = heisenberg_sasakian();
    let s = gacs_from_acs(&acs).unwrap();
    let p = pts(&s.chart, 100);
    assert!(gacs_check(&s, &p, 1e-9).pass());
    assert!(s.eplus.form.iter().all(|e| e.is_zero()));
    assert!(s.eminus.vec.iter().all(|e| e.is_zero()));
    // Φ(α) = −φ*α with (φ*α)(X) = α(φX)
    let alpha = vec![c(0.3), c(-1.0), c(0.7)];
    for q in &p[..10] {
        let mut ev = Evaluator::new(q);
        let phi = acs.phi.eval(&mut ev);
        let got = s.phi.eval(&mut ev).apply(&GtVec::covector(alpha.clone()));
        for j in 0..3 {
            let pull: gencontact::C64 = (0..3).map(|i| alpha[i] * phi.get(i, j)).sum();
            assert!((got.form[j] + pull).norm() < 1e-14);
        }
        assert!(got.vec.iter().all(|z| z.norm() == 0.0));
    }
}

#[test]
fn from_acs_rejects_broken_axioms() {
    let mut acs = heisenberg_sasakian();
    acs.xi = vec![Expr::zero(), Expr::zero(), Expr::real(2.0)];
    assert!(matches!(gacs_from_acs(&acs), Err(StructureError::AxiomFailure { .. })));
}

#[test]
fn darboux_contact_structure() {
    let (chart, eta) = darboux(1);
    let cd = contact_data(&eta);
    let p = pts(&chart, 100);
    for q in &p {
        let mut ev = Evaluator::new(q);
        let xi: Vec<_> = cd.reeb.iter().map(|e| ev.value(e)).collect();
        assert!((xi[0].norm() + xi[1].norm() + (xi[2] - 1.0).norm()) < 1e-14);
        // ρ(∂z) = −η
        let rho_z = cd.rho.eval(&mut ev).col(2);
        let eta_v: Vec<_> = eta.iter().map(|e| ev.value(e)).collect();
        assert!(rho_z.iter().zip(&eta_v).all(|(a, b)| (a + b).norm() < 1e-14));
    }
    let s = gacs_from_contact(&chart, &eta).unwrap();
    assert!(gacs_check(&s, &p, 1e-9).pass());
    assert!(phi_kernel_check(&s, &p, 1e-9).pass());
    assert!(phi_cube_check(&s, &p, 1e-9).pass());
    let s5 = darboux_contact(2);
    assert!(gacs_check(&s5, &pts(&s5.chart, 50), 1e-9).pass());
}

#[test]
fn contact_builder_rejects_bad_input() {
    let chart = Chart::with(&["x", "y", "z"], &[(-1.0, 1.0); 3]);
    let dz = vec![Expr::zero(), Expr::zero(), Expr::one()];
    assert!(matches!(gacs_from_contact(&chart, &dz), Err(StructureError::NotContact(_))));
    let even = Chart::with(&["x", "y"], &[(-1.0, 1.0); 2]);
    assert!(matches!(gacs_from_contact(&even, &[Expr::one(), Expr::zero()]), Err(StructureError::Dim(_))));
    assert!(gacs_from_contact(&chart, &[Expr::one()]).is_err());
}

#[test]
fn gacs_check_detects_scaled_eplus_and_symmetric_perturbation() {
    let s = darboux_contact(1);
    let p = pts(&s.chart, 30);
    let mut scaled = s.clone();
    scaled.eplus = s.eplus.scale(&Expr::real(2.0));
    let r = gacs_check(&scaled, &p, 1e-9);
    assert!((r.max("normalization") - 1.0).abs() < 1e-12);
    let mut pert = s.clone();
    pert.phi = s.phi.add(&GtEndo::identity(3).scale(&Expr::real(0.1)));
    let r = gacs_check(&pert, &p, 1e-9);
    assert!((r.max("skew") - 0.2).abs() < 1e-12);
}

#[test]
fn b_transform_examples() {
    let s = darboux_contact(1);
    let p = pts(&s.chart, 50);
    let same = b_transform(&s, &Form::zero(2, 3));
    assert!(endo_dev(&same.phi, &s.phi, &p) == 0.0);
    let t = b_transform(&s, &two_form(0, 1, Expr::one()));
    assert!(gacs_check(&t, &p, 1e-9).pass());
    assert!(phi_kernel_check(&t, &p, 1e-9).pass());
    let b = two_form(0, 2, Expr::var(1).sin().mul(&Expr::var(2)));
    let back = b_transform(&b_transform(&s, &b), &b.neg());
    assert!(endo_dev(&back.phi, &s.phi, &p) < 1e-12);
    assert!(sec_dev(&back.eplus, &s.eplus, &p) < 1e-12);
    assert!(sec_dev(&back.eminus, &s.eminus, &p) < 1e-12);
}

#[test]
fn generalized_metric_from_g_and_b() {
    let acs = heisenberg_sasakian();
    let g = acs.g.clone().unwrap();
    let p = pts(&acs.chart, 30);
    let m0 = gmetric_from_gb(&g, &Form::zero(2, 3)).unwrap();
    for q in &p {
        let mut ev = Evaluator::new(q);
        let e = m0.endo.eval(&mut ev);
        assert_eq!(e.tt.max_abs(), 0.0);
        assert_eq!(e.cc.max_abs(), 0.0);
        assert!(e.ct.sub(&g.eval(&mut ev)).max_abs() == 0.0);
        assert!(e.tc.matmul(&e.ct).sub(&Mat::identity(3)).max_abs() < 1e-12);
    }
    let b = two_form(0, 2, Expr::var(1).cos());
    let m = gmetric_from_gb(&g, &b).unwrap();
    for q in &p {
        let e = m.endo.eval(&mut Evaluator::new(q));
        assert!(e.compose(&e).sub(&GtEndo::identity(3)).max_abs() < 1e-12);
    }
}

#[test]
fn kahler_metric_matches_displayed_product() {
    let k = kahler_interval();
    let p = pts(&k.plus.chart, 30);
    let g = k.plus.g.clone().unwrap();
    // G = (1 0; −cos(2z)ω′ 1)(0 g⁻¹; g 0)(1 0; cos(2z)ω′ 1), the lower-left block acting as X ↦ ι_X b
    let cos2z = Expr::var(2).scale(c(2.0)).cos();
    let w = k.omega.to_mat();
    let ix = |s: f64| Mat::from_fn(3, 3, |i, j| w.get(j, i).mul(&cos2z).scale(c(s)));
    let id = Mat::from_fn(3, 3, |i, j| if i == j { Expr::one() } else { Expr::zero() });
    let left = GtEndo { tt: id.clone(), tc: zeros3(), ct: ix(-1.0), cc: id.clone() };
    let right = GtEndo { tt: id.clone(), tc: zeros3(), ct: ix(1.0), cc: id.clone() };
    let core = GtEndo { tt: zeros3(), tc: g.inverse(), ct: g.clone(), cc: zeros3() };
    let want = left.compose(&core).compose(&right);
    assert!(endo_dev(&k.gacm.metric.endo, &want, &p) < 1e-12);
}

#[test]
fn gacm_examples() {
    let m = sasakian_to_gs(&heisenberg_sasakian()).unwrap();
    let p = pts(&m.gacs.chart, 50);
    let r = gacm_check(&m, &p, 1e-9);
    assert!(r.pass(), "{:?}", r);
    assert!(r.get("g_eplus_to_eminus").unwrap().max_residual < 1e-9);
    let k = kahler_interval();
    let kp = pts(&k.gacm.gacs.chart, 50);
    let r = gacm_check(&k.gacm, &kp, 1e-9);
    assert!(r.pass());
    assert!(r.get("g_eplus_to_eminus").unwrap().max_residual < 1e-9);
    // G swapped to (g, b + 0.3 dx∧dz)
    let g = m.metric.g.clone().unwrap();
    let swapped = Gacm { gacs: m.gacs.clone(), metric: gmetric_from_gb(&g, &two_form(0, 2, Expr::real(0.3))).unwrap() };
    assert!(gacm_check(&swapped, &p, 1e-9).max("compatibility") > 1e-2);
}

#[test]
fn dual_is_an_involution() {
    for m in [sasakian_to_gs(&heisenberg_sasakian()).unwrap(), kahler_interval().gacm] {
        let p = pts(&m.gacs.chart, 40);
        let d1 = dual_gacm(&m).unwrap();
        assert!(gacm_check(&d1, &p, 1e-9).pass());
        let d2 = dual_gacm(&d1).unwrap();
        assert!(endo_dev(&d2.gacs.phi, &m.gacs.phi, &p) < 1e-10);
        assert!(sec_dev(&d2.gacs.eplus, &m.gacs.eplus, &p) < 1e-10);
        assert!(sec_dev(&d2.gacs.eminus, &m.gacs.eminus, &p) < 1e-10);
    }
}

#[test]
fn kahler_dual_pairs_with_the_other_sign_of_phi() {
    // GE₊ = E₋, so the dual swaps the roles of ξ and η; its Φ restricted to
    // vectors tangent to R² equals the tangent block of Φ for −φ up to the B-field
    let k = kahler_interval();
    let d = dual_gacm(&k.gacm).unwrap();
    let p = pts(&k.plus.chart, 20);
    let minus = gacs_from_acs(&k.minus).unwrap();
    let plus = gacs_from_acs(&k.plus).unwrap();
    let tt = |s: &Gacs, q: &[f64]| s.phi.eval(&mut Evaluator::new(q)).tt;
    for q in &p {
        let dt = tt(&d.gacs, q);
        let dist_minus = dt.sub(&tt(&minus, q)).max_abs();
        let dist_plus = dt.sub(&tt(&plus, q)).max_abs();
        assert!(dist_plus < 1e-12 || dist_minus < 1e-12, "{} {}", dist_plus, dist_minus);
    }
}

#[test]
fn dual_refuses_when_probes_fail() {
    let m = sasakian_to_gs(&heisenberg_sasakian()).unwrap();
    let mut bad = m.clone();
    bad.gacs.eplus = m.gacs.eplus.scale(&Expr::real(2.0));
    bad.gacs.eminus = m.gacs.eminus.scale(&Expr::real(0.5));
    assert!(matches!(dual_gacm(&bad), Err(StructureError::ProbeFailed(_))));
}

#[test]
fn eigenframe_has_n_minus_one_isotropic_eigenvectors() {
    for s in [darboux_contact(1), darboux_contact(2), gacs_from_acs(&heisenberg_sasakian()).unwrap()] {
        let n = s.chart.dim();
        let p = pts(&s.chart, 30);
        let ef = eigenframe(&s, &s.chart.center(), &p).unwrap();
        assert_eq!(ef.frame.len(), n - 1);
        for q in &p {
            let mut ev = Evaluator::new(q);
            let phi = s.phi.eval(&mut ev);
            let ep = s.eplus.eval(&mut ev);
            let em = s.eminus.eval(&mut ev);
            let vals: Vec<GtVec> = ef.frame.iter().map(|a| a.eval(&mut ev)).collect();
            for a in &vals {
                assert!(phi.apply(a).sub(&a.scale(&gencontact::C64::new(0.0, 1.0))).max_abs() < 1e-9);
                assert!(a.pair(&ep).norm() < 1e-9 && a.pair(&em).norm() < 1e-9);
                for b in &vals {
                    assert!(a.pair(b).norm() < 1e-9);
                }
            }
            // frame, conjugate frame and E± span the 2n-dimensional fibre
            let mut cols: Vec<Vec<gencontact::C64>> = vals.iter().map(|a| a.flat()).collect();
            cols.extend(vals.iter().map(|a| a.flat().iter().map(|z| z.conj()).collect::<Vec<_>>()));
            cols.push(ep.flat());
            cols.push(em.flat());
            let m = Mat::from_fn(2 * n, 2 * n, |i, j| cols[j][i]);
            assert!(m.inverse().is_some());
        }
    }
}

#[test]
fn involutivity_classes() {
    let h = gacs_from_acs(&heisenberg_sasakian()).unwrap();
    let p = pts(&h.chart, 30);
    assert_eq!(involutivity_class(&h, &p, 1e-7).unwrap().0, InvolutivityClass::Strong);
    let (class, rep) = involutivity_class(&darboux_contact(1), &p, 1e-7).unwrap();
    assert_eq!(class, InvolutivityClass::ContactMinus);
    assert!(rep.get("l_plus_nij").unwrap().max_residual > 1e-3);
    // Φ + εΔ with z-dependent entries in the TT and TC blocks
    let mut tt = zeros3();
    tt.set(0, 2, Expr::var(2).scale(c(0.3)));
    let mut tc = zeros3();
    tc.set(2, 0, Expr::var(2).scale(c(0.3)));
    let delta = GtEndo { tt, tc, ct: zeros3(), cc: zeros3() };
    let pert = Gacs { phi: h.phi.add(&delta), ..h.clone() };
    let (class, rep) = involutivity_class(&pert, &p, 1e-7).unwrap();
    assert_eq!(class, InvolutivityClass::None);
    assert!(rep.get("l_plus_nij").unwrap().max_residual > 1e-7);
    assert!(rep.get("l_minus_nij").unwrap().max_residual > 1e-7);
}

#[test]
fn frame_choice_does_not_change_the_class() {
    let h = gacs_from_acs(&heisenberg_sasakian()).unwrap();
    let p = pts(&h.chart, 20);
    let order: Vec<usize> = (0..6).rev().collect();
    let a = eigenframe(&h, &h.chart.center(), &p).unwrap();
    let b = eigenframe_with(&h, &h.chart.center(), &p, &PivotRule::FirstFit(order)).unwrap();
    assert_eq!(a.frame.len(), b.frame.len());
    use gencontact::structures::{frame_nijs, triple_residual};
    let worst = |frame: &[SectionField]| {
        let mut lp = vec![h.eplus.clone()];
        lp.extend(frame.iter().cloned());
        let nijs = frame_nijs(&lp);
        p.iter().map(|q| triple_residual(&nijs, &mut Evaluator::new(q))).fold(0.0, f64::max)
    };
    assert!(worst(&a.frame) < 1e-9 && worst(&b.frame) < 1e-9);
}

fn kappa() -> impl Strategy<Value = Vec<Expr>> {
    fields(3, 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    // Φ(E±) = 0 for every structure that passes the axioms, including random
    // B-transforms and normalized K-deformations
    #[test]
    fn phi_kills_eplus_and_eminus(bxy in field(3), bxz in field(3), k in kappa(), which in 0usize..3) {
        let base = match which {
            0 => darboux_contact(1),
            1 => gacs_from_acs(&heisenberg_sasakian()).unwrap(),
            _ => kahler_interval().gacm.gacs,
        };
        let b = two_form(0, 1, bxy).add(&two_form(0, 2, bxz));
        let t = b_transform(&base, &b);
        let p = pts(&t.chart, 10);
        prop_assert!(gacs_check(&t, &p, 1e-8).pass());
        prop_assert!(phi_kernel_check(&t, &p, 1e-8).pass());
        prop_assert!(phi_cube_check(&t, &p, 1e-8).pass());
        // K₋(κ) descendant normalized back to f = 0
        if let Ok((n, _, _)) = normalize(&k_minus(&FGacs::from_gacs(&t), &k), &p) {
            prop_assert!(gacs_check(&n, &p, 1e-8).pass());
            prop_assert!(phi_kernel_check(&n, &p, 1e-8).pass());
        }
    }

    #[test]
    fn acms_axioms_hold_for_gallery(seed in 0u64..1000) {
        for acs in [heisenberg_sasakian(), kahler_interval().plus, kahler_interval().minus] {
            let p = acs.chart.sample(seed, 5);
            prop_assert!(acms_check(&acs, &p, 1e-10).pass());
        }
    }
}
