//! Closed-form example structures.

use crate::calculus::{c_transform, d, Chart, Form};
use crate::deformations::{k_minus, k_plus, FGacm, FGacs};
use crate::expr::{Evaluator, Expr};
use crate::gta::{GtEndo, GtVec};
use crate::integrability::{classical_cone_i, sasakian_criterion};
use crate::report::{sweep, ResidualReport};
use crate::linalg::Mat;
use crate::suite::{run_checks, Fixture, RunOptions, SuiteError, SuiteReport};
use crate::structures::{gacs_from_acs, gacs_from_contact, gmetric_from_gb, AlmostContactMetric, Gacm, Gacs, StructureError};
use std::f64::consts::FRAC_PI_2;

/// η = dz − Σ yᵢ dxᵢ on R^{2k+1} with coordinates x₁..x_k, y₁..y_k, z
/// (x, y, z when k = 1).
pub fn darboux(k: usize) -> (Chart, Vec<Expr>) {
    assert!(k >= 1, "darboux needs k ≥ 1");
    let names: Vec<String> = if k == 1 {
        vec!["x".into(), "y".into(), "z".into()]
    } else {
        (1..=k).map(|i| format!("x{}", i)).chain((1..=k).map(|i| format!("y{}", i))).chain(["z".to_string()]).collect()
    };
    let n = 2 * k + 1;
    let chart = Chart::new(names, vec![(-1.0, 1.0); n]).expect("valid chart");
    let mut eta = vec![Expr::zero(); n];
    for i in 0..k {
        eta[i] = Expr::var(k + i).neg();
    }
    eta[n - 1] = Expr::one();
    (chart, eta)
}

/// Contact-type Gacs of the Darboux form.
pub fn darboux_contact(k: usize) -> Gacs {
    let (chart, eta) = darboux(k);
    gacs_from_contact(&chart, &eta).expect("Darboux form is contact")
}

fn heisenberg_with(sigma: f64) -> AlmostContactMetric {
    let chart = Chart::with(&["x", "y", "z"], &[(-1.0, 1.0); 3]);
    let y = Expr::var(1);
    let s = Expr::real(sigma);
    let z = Expr::zero();
    let phi = Mat::from_rows(vec![
        vec![z.clone(), s.neg(), z.clone()],
        vec![s.clone(), z.clone(), z.clone()],
        vec![z.clone(), s.neg().mul(&y), z.clone()],
    ]);
    let eta = vec![y.neg(), Expr::zero(), Expr::one()];
    let xi = vec![Expr::zero(), Expr::zero(), Expr::one()];
    let half = Expr::real(0.5);
    let g = Mat::from_fn(3, 3, |i, j| {
        let base = eta[i].mul(&eta[j]);
        if i == j && i < 2 {
            base.add(&half)
        } else {
            base
        }
    });
    AlmostContactMetric { chart, phi, xi, eta, g: Some(g) }
}

/// Left-invariant Sasakian structure on the Heisenberg group: η = dz − y dx,
/// ξ = ∂z, g = η⊗η + ½(dx² + dy²), φ rotating {∂x + y∂z, ∂y}. The rotation
/// sense is the one for which θ = g(·,φ·) matches dη.
pub fn heisenberg_sasakian() -> AlmostContactMetric {
    let pts = vec![vec![0.1, 0.2, 0.3], vec![-0.4, 0.5, 0.0]];
    let residual = |s: f64| sasakian_criterion(&heisenberg_with(s), &pts, 1.0).expect("has metric").worst();
    if residual(1.0) <= residual(-1.0) {
        heisenberg_with(1.0)
    } else {
        heisenberg_with(-1.0)
    }
}

/// (G, Φ, ξ, η) with G = (0 g⁻¹; g 0) and Φ = (φ 0; 0 −φ*).
pub fn sasakian_to_gs(acs: &AlmostContactMetric) -> Result<Gacm, StructureError> {
    let g = acs.g.as_ref().ok_or_else(|| StructureError::Dim("structure has no metric".into()))?;
    let gacs = gacs_from_acs(acs)?;
    let metric = gmetric_from_gb(g, &Form::zero(2, acs.chart.dim()))?;
    Ok(Gacm { gacs, metric })
}

/// Flat Kähler R² × (0, π/2) structures and the generalized Sasakian
/// structure they induce.
#[derive(Clone, Debug)]
pub struct KahlerInterval {
    /// (+φ, ξ, η, g).
    pub plus: AlmostContactMetric,
    /// (−φ, ξ, η, g).
    pub minus: AlmostContactMetric,
    pub gacm: Gacm,
    /// Kähler form ω′ = g′(·, J′·) of the R² factor as a 2-form on M.
    pub omega: Form,
}

fn kahler_chart() -> Chart {
    Chart::with(&["x", "y", "z"], &[(-1.0, 1.0), (-1.0, 1.0), (0.0, FRAC_PI_2)])
}

/// J′ on R² extended by zero: J′∂x = ∂y, J′∂y = −∂x.
fn j_prime(sign: f64) -> Mat<Expr> {
    let s = Expr::real(sign);
    let z = Expr::zero();
    Mat::from_rows(vec![
        vec![z.clone(), s.neg(), z.clone()],
        vec![s.clone(), z.clone(), z.clone()],
        vec![z.clone(), z.clone(), z.clone()],
    ])
}

#[doc(hidden)]
pub fn kahler_interval_with(b_scale: f64, mid_sign: f64) -> KahlerInterval {
    let chart = kahler_chart();
    let zc = Expr::var(2);
    let two_z = zc.scale(crate::C64::new(2.0, 0.0));
    let s = two_z.sin();
    let c = two_z.cos();
    let g = Mat::from_fn(3, 3, |i, j| match (i, j) {
        (2, 2) => Expr::one(),
        (i, j) if i == j => s.clone(),
        _ => Expr::zero(),
    });
    let xi = vec![Expr::zero(), Expr::zero(), Expr::one()];
    let eta = vec![Expr::zero(), Expr::zero(), Expr::one()];
    let acs = |sign: f64| AlmostContactMetric { chart: chart.clone(), phi: j_prime(sign), xi: xi.clone(), eta: eta.clone(), g: Some(g.clone()) };
    let plus = acs(1.0);
    let minus = acs(-1.0);
    // ω′ = g′(·, J′·) with g′ Euclidean
    let gprime = Mat::from_fn(3, 3, |i, j| if i == j && i < 2 { Expr::one() } else { Expr::zero() });
    let wm = gprime.matmul(&j_prime(1.0));
    let omega = Form::two_form_upper(&wm);
    // ω′ as the map X ↦ ι_X ω′ and its inverse on the R² factor
    let w_map = wm.transpose();
    let rho = w_map.neg();
    let mid_ct = w_map.scale(&s.neg()).scale(&Expr::real(mid_sign));
    let mid_tc = rho.scale(&s.powi(-1)).scale(&Expr::real(mid_sign));
    let core = GtEndo { tt: Mat::zeros(3, 3), tc: mid_tc, ct: mid_ct, cc: Mat::zeros(3, 3) };
    let b = omega.scale(&c.neg().scale(crate::C64::new(b_scale, 0.0)));
    let bm = b.to_mat();
    let eb = GtEndo::b_field(&bm);
    let ebi = GtEndo::b_field(&bm.neg());
    let gacs = Gacs {
        chart: chart.clone(),
        phi: core.conjugate(&eb, &ebi),
        eplus: eb.apply(&GtVec::vector(xi.clone())),
        eminus: eb.apply(&GtVec::covector(eta.clone())),
    };
    let metric = gmetric_from_gb(&g, &b).expect("g is a metric");
    KahlerInterval { plus, minus, gacm: Gacm { gacs, metric }, omega }
}

/// M = R² × (0, π/2) with φ = ±J′, ξ = ∂z, η = dz, g = sin(2z)g′ + dz², and
/// the Gacm G = e^b(0 g⁻¹; g 0)e^{−b}, Φ = e^b(0 −ρ/sin2z; sin2z ω′ 0)e^{−b},
/// E₊ = ∂z, E₋ = dz with b = −cos(2z)ω′, ω′ = g′(·,J′·) and ρ = (ω′)⁻¹.
///
/// With ω′ read as g′(·,J′·) and b as fixed by the cone identity
/// dω₊(J₊·,J₊·,J₊·) = d(−r²cos(2z)ω′), the middle factor of Φ needs the
/// overall sign shown here for both cone structures to be integrable.
pub fn kahler_interval() -> KahlerInterval {
    kahler_interval_with(1.0, -1.0)
}

/// Cone-side data of [`kahler_interval`] in t = log r: residuals of
/// ω± = g̃(·,J±·) against ±e^{2t}sin(2z)ω′ + e^{2t}dt∧dz and of
/// dω±(J±·,J±·,J±·) against ±d(−e^{2t}cos(2z)ω′). `points` are cone points.
pub fn kahler_cone_identities(k: &KahlerInterval, points: &[Vec<f64>], tol: f64) -> ResidualReport {
    let t = Expr::var(3);
    let e2t = t.scale(crate::C64::new(2.0, 0.0)).exp();
    let two_z = Expr::var(2).scale(crate::C64::new(2.0, 0.0));
    let w4 = {
        let w = k.omega.to_mat();
        Mat::from_fn(4, 4, |i, j| if i < 3 && j < 3 { w.get(i, j).clone() } else { Expr::zero() })
    };
    let omega4 = Form::two_form_upper(&w4);
    let mut dtdz = Mat::from_fn(4, 4, |_, _| Expr::zero());
    dtdz.set(3, 2, Expr::one());
    dtdz.set(2, 3, Expr::real(-1.0));
    let dtdz = Form::two_form_upper(&dtdz);
    let mut forms = Vec::new();
    for (acs, sign) in [(&k.plus, 1.0), (&k.minus, -1.0)] {
        let j = classical_cone_i(acs);
        let g = acs.g.as_ref().expect("metric");
        let gt = Mat::from_fn(4, 4, |i, l| {
            if i < 3 && l < 3 {
                g.get(i, l).mul(&e2t)
            } else if i == 3 && l == 3 {
                e2t.clone()
            } else {
                Expr::zero()
            }
        });
        let om = Form::two_form_upper(&gt.matmul(&j));
        let expected = omega4.scale(&e2t.mul(&two_z.sin()).scale(crate::C64::new(sign, 0.0))).add(&dtdz.scale(&e2t));
        let lhs = c_transform(&d(&om).expect("2-form"), &j).expect("3-form");
        let b = omega4.scale(&e2t.mul(&two_z.cos()).neg());
        let rhs = d(&b).expect("2-form").scale(&Expr::real(sign));
        forms.push(om.sub(&expected));
        forms.push(lhs.sub(&rhs));
    }
    let specs = [("omega_plus", tol), ("d_omega_plus", tol), ("omega_minus", tol), ("d_omega_minus", tol)];
    ResidualReport::new(sweep(points, &specs, |p| {
        let mut ev = Evaluator::new(p);
        forms.iter().map(|f| f.max_abs_at(&mut ev)).collect()
    }))
}

/// K₋(dz) applied to the Darboux contact structure.
pub fn darboux_k_minus() -> FGacs {
    let s = FGacs::from_gacs(&darboux_contact(1));
    k_minus(&s, &[Expr::zero(), Expr::zero(), Expr::one()])
}

/// K₊(x dy) applied to the Darboux contact structure.
pub fn darboux_k_plus() -> FGacs {
    let s = FGacs::from_gacs(&darboux_contact(1));
    k_plus(&s, &[Expr::zero(), Expr::var(0), Expr::zero()])
}

/// Heisenberg Gacm deformed by K₊(0.3 dz).
pub fn heisenberg_f_metric() -> FGacm {
    let m = sasakian_to_gs(&heisenberg_sasakian()).expect("Sasakian structure");
    let alpha = vec![Expr::zero(), Expr::zero(), Expr::real(0.3)];
    FGacm::new(m, alpha, vec![Expr::zero(); 3]).expect("dimensions match")
}

/// Heisenberg Gacm deformed by K₋(0.3 dz). The deformation is the cone
/// B-transform by the closed form e^{2t}dt∧0.3dz, so both I structures stay
/// integrable.
pub fn heisenberg_f_sasakian() -> FGacm {
    let m = sasakian_to_gs(&heisenberg_sasakian()).expect("Sasakian structure");
    let beta = vec![Expr::zero(), Expr::zero(), Expr::real(0.3)];
    FGacm::new(m, vec![Expr::zero(); 3], beta).expect("dimensions match")
}

/// A named gallery structure with the verdicts its checks must produce.
#[derive(Clone, Debug)]
pub struct GalleryEntry {
    pub name: &'static str,
    pub description: &'static str,
    /// (check, expected pass).
    pub expected: &'static [(&'static str, bool)],
}

pub const ENTRIES: &[GalleryEntry] = &[
    GalleryEntry {
        name: "darboux",
        description: "contact-type structure of η = dz − y dx on R³",
        expected: &[
            ("gacs", true),
            ("phi_kernel", true),
            ("phi_cube", true),
            ("cone_algebra", true),
            ("involutivity", true),
            ("prop45", true),
            // the cone of a contact-type structure is not integrable
            ("thm48", false),
            ("cone_crosscheck", true),
        ],
    },
    GalleryEntry {
        name: "darboux5",
        description: "contact-type structure of η = dz − y₁dx₁ − y₂dx₂ on R⁵",
        expected: &[("gacs", true), ("phi_kernel", true), ("phi_cube", true), ("cone_algebra", true), ("involutivity", true)],
    },
    GalleryEntry {
        name: "heisenberg_sasakian",
        description: "left-invariant Sasakian structure on the Heisenberg group and its generalized Sasakian structure",
        expected: &[
            ("acms", true),
            ("normality", true),
            ("sasakian", true),
            ("vaisman", true),
            ("gacs", true),
            ("phi_kernel", true),
            ("phi_cube", true),
            ("cone_algebra", true),
            ("involutivity", true),
            ("prop45", true),
            ("gacm", true),
            ("dual_gacm", true),
            ("thm48", true),
            ("cone_crosscheck", true),
            ("generalized_sasakian", true),
            ("thm510", true),
            ("cor511", true),
        ],
    },
    GalleryEntry {
        name: "kahler_interval",
        description: "R² × (0, π/2) with φ = ±J′, g = sin(2z)g′ + dz²: generalized Sasakian but neither (±φ, ξ, η, g) is Sasakian",
        expected: &[
            ("acms", true),
            ("normality", true),
            ("sasakian", false),
            ("sasakian_pair", false),
            ("vaisman", true),
            ("gacs", true),
            ("phi_kernel", true),
            ("phi_cube", true),
            ("cone_algebra", true),
            ("gacm", true),
            ("dual_gacm", true),
            ("thm48", true),
            ("cone_crosscheck", true),
            ("generalized_sasakian", true),
        ],
    },
    GalleryEntry {
        name: "darboux_k_minus",
        description: "Darboux contact structure deformed by K₋(dz)",
        expected: &[("fgacs", true), ("f_cone_algebra", true)],
    },
    GalleryEntry {
        name: "darboux_k_plus",
        description: "Darboux contact structure deformed by K₊(x dy)",
        expected: &[("fgacs", true), ("f_cone_algebra", true)],
    },
    GalleryEntry {
        name: "heisenberg_f_metric",
        description: "Heisenberg generalized Sasakian structure deformed by K₊(0.3 dz)",
        // K₊ is not a cone B-transform: the dual I structure loses integrability
        expected: &[("fgacs", true), ("f_cone_algebra", true), ("thm510", true), ("cor511", true), ("f_sasakian", false)],
    },
    GalleryEntry {
        name: "heisenberg_f_sasakian",
        description: "Heisenberg generalized Sasakian structure deformed by K₋(0.3 dz)",
        expected: &[("fgacs", true), ("f_cone_algebra", true), ("f_sasakian", true)],
    },
];

pub fn entry(name: &str) -> Option<&'static GalleryEntry> {
    ENTRIES.iter().find(|e| e.name == name)
}

/// Build the structures of a gallery entry.
pub fn fixture(name: &str) -> Option<Fixture> {
    let mut fx = Fixture::default();
    match name {
        "darboux" => fx.gacs = Some(darboux_contact(1)),
        "darboux5" => fx.gacs = Some(darboux_contact(2)),
        "heisenberg_sasakian" => {
            let acs = heisenberg_sasakian();
            fx.gacm = Some(sasakian_to_gs(&acs).expect("Sasakian structure"));
            fx.acs = Some(acs);
        }
        "kahler_interval" => {
            let k = kahler_interval();
            fx.pair = Some((k.plus, k.minus));
            fx.gacm = Some(k.gacm);
        }
        "darboux_k_minus" => fx.fgacs = Some(darboux_k_minus()),
        "darboux_k_plus" => fx.fgacs = Some(darboux_k_plus()),
        "heisenberg_f_metric" => fx.fgacm = Some(heisenberg_f_metric()),
        "heisenberg_f_sasakian" => fx.fgacm = Some(heisenberg_f_sasakian()),
        _ => return None,
    }
    Some(fx)
}

/// Run every declared check of an entry.
pub fn run_entry(e: &GalleryEntry, opts: &RunOptions) -> Result<SuiteReport, SuiteError> {
    let fx = fixture(e.name).expect("every entry has a fixture");
    let checks: Vec<String> = e.expected.iter().map(|(c, _)| c.to_string()).collect();
    run_checks(e.name, &fx, &checks, opts)
}

/// Checks whose verdict differs from the entry's table.
pub fn mismatches(e: &GalleryEntry, rep: &SuiteReport) -> Vec<String> {
    e.expected
        .iter()
        .filter(|(c, want)| rep.checks.iter().find(|r| r.check == *c).map(|r| r.pass != *want).unwrap_or(true))
        .map(|(c, _)| c.to_string())
        .collect()
}
