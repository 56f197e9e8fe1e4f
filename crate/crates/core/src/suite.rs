//! Named checks over a fixture of structures, shared by the gallery, the
//! command line and the acceptance tests.

use crate::cone::{cone_decompose, cone_gacx, cone_gacx_check, i_map, i_prime, ConeChart, Decomposed};
use crate::deformations::{cor511_check, f_sasakian_check, fgacs_check, thm510_forward, DeformError, FGacm, FGacs};
use crate::integrability::{
    cone_crosscheck, generalized_sasakian_check, normality_check, prop45_check, sasakian_criterion, thm48_residual,
    vaisman_conditions, IntegrabilityError,
};
use crate::report::{Residual, ResidualReport, ALGEBRAIC_TOL, INTEGRABILITY_TOL};
use crate::structures::{
    acms_check, dual_gacm, gacm_check, gacs_check, gacs_from_acs, involutivity_class, phi_cube_check, phi_kernel_check,
    AlmostContactMetric, Gacm, Gacs, StructureError,
};
use crate::expr::Expr;
use crate::calculus::Chart;
use serde::Serialize;
use std::collections::BTreeMap;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SuiteError {
    #[error("unknown check '{0}'")]
    UnknownCheck(String),
    #[error("check '{check}' needs {needs}, which this structure does not provide")]
    Missing { check: String, needs: &'static str },
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Integrability(#[from] IntegrabilityError),
    #[error(transparent)]
    Deform(#[from] DeformError),
    #[error(transparent)]
    Cone(#[from] crate::cone::ConeError),
}

/// The structures a check can draw on. Any subset may be present.
#[derive(Clone, Debug, Default)]
pub struct Fixture {
    pub acs: Option<AlmostContactMetric>,
    /// Two almost contact metric structures with one metric.
    pub pair: Option<(AlmostContactMetric, AlmostContactMetric)>,
    pub gacs: Option<Gacs>,
    pub gacm: Option<Gacm>,
    pub fgacs: Option<FGacs>,
    pub fgacm: Option<FGacm>,
}

impl Fixture {
    pub fn chart(&self) -> Option<&Chart> {
        if let Some(a) = &self.acs {
            return Some(&a.chart);
        }
        if let Some((a, _)) = &self.pair {
            return Some(&a.chart);
        }
        if let Some(s) = self.gacs_ref() {
            return Some(&s.chart);
        }
        self.fgacs_ref().map(|s| &s.chart)
    }

    fn gacs_ref(&self) -> Option<&Gacs> {
        self.gacs.as_ref().or(self.gacm.as_ref().map(|m| &m.gacs)).or(self.fgacm.as_ref().map(|m| &m.witness.gacs))
    }

    fn fgacs_ref(&self) -> Option<&FGacs> {
        self.fgacs.as_ref().or(self.fgacm.as_ref().map(|m| &m.structure))
    }

    fn gacm_ref(&self) -> Option<&Gacm> {
        self.gacm.as_ref().or(self.fgacm.as_ref().map(|m| &m.witness))
    }

    fn classical(&self) -> Vec<&AlmostContactMetric> {
        match (&self.acs, &self.pair) {
            (_, Some((a, b))) => vec![a, b],
            (Some(a), None) => vec![a],
            _ => vec![],
        }
    }
}

/// Every check name understood by [`run_check`].
pub const CHECKS: &[&str] = &[
    "acms",
    "normality",
    "sasakian",
    "sasakian_pair",
    "vaisman",
    "gacs",
    "phi_kernel",
    "phi_cube",
    "cone_algebra",
    "involutivity",
    "prop45",
    "thm48",
    "cone_crosscheck",
    "gacm",
    "dual_gacm",
    "generalized_sasakian",
    "fgacs",
    "f_cone_algebra",
    "thm510",
    "cor511",
    "f_sasakian",
];

/// Default tolerance of a check.
pub fn default_tolerance(check: &str) -> f64 {
    match check {
        "involutivity" | "prop45" | "thm48" | "cone_crosscheck" | "generalized_sasakian" | "f_sasakian" | "normality" => {
            INTEGRABILITY_TOL
        }
        "vaisman" | "thm510" => 1e-8,
        _ => ALGEBRAIC_TOL,
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub seed: u64,
    pub samples: usize,
    pub cone_samples: usize,
    /// Overrides every check's tolerance when set.
    pub tol: Option<f64>,
    /// Per-check tolerances; take precedence over `tol`.
    pub overrides: BTreeMap<String, f64>,
    /// Record wall time per check.
    pub timings: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { seed: 0, samples: 100, cone_samples: 40, tol: None, overrides: BTreeMap::new(), timings: false }
    }
}

impl RunOptions {
    pub fn tolerance(&self, check: &str) -> f64 {
        self.overrides.get(check).copied().or(self.tol).unwrap_or_else(|| default_tolerance(check))
    }
}

/// Base and cone sample points for a chart.
pub fn sample_points(chart: &Chart, opts: &RunOptions) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let base = chart.sample(opts.seed, opts.samples);
    let cone = ConeChart::over(chart).sample(opts.seed ^ 0x9e37_79b9_7f4a_7c15, opts.cone_samples);
    (base, cone)
}

fn need<'a, T>(v: Option<&'a T>, check: &str, needs: &'static str) -> Result<&'a T, SuiteError> {
    v.ok_or_else(|| SuiteError::Missing { check: check.to_string(), needs })
}

fn gacs_for(fx: &Fixture, check: &str) -> Result<Gacs, SuiteError> {
    if let Some(s) = fx.gacs_ref() {
        return Ok(s.clone());
    }
    if let Some(a) = &fx.acs {
        return Ok(gacs_from_acs(a)?);
    }
    Err(SuiteError::Missing { check: check.to_string(), needs: "a generalized almost contact structure" })
}

fn merge_all(parts: Vec<(String, ResidualReport)>) -> ResidualReport {
    if parts.len() == 1 {
        return parts.into_iter().next().map(|p| p.1).unwrap_or_default();
    }
    let mut rep = ResidualReport::default();
    for (name, r) in parts {
        rep.merge(&name, r);
    }
    rep
}

fn side_names(n: usize) -> Vec<String> {
    if n == 2 {
        vec!["plus".into(), "minus".into()]
    } else {
        (0..n).map(|i| format!("s{}", i)).collect()
    }
}

fn round_trip(j: &crate::cone::ConeGacx, original: &FGacs, base: &[Vec<f64>], cone: &[Vec<f64>], tol: f64) -> Result<Residual, SuiteError> {
    let back = match cone_decompose(j, cone)? {
        Decomposed::Gacs(s) => FGacs::from_gacs(&s),
        Decomposed::FGacs(s) => s,
    };
    let dev = back.deviation(original, base);
    Ok(Residual::from_values("round_trip", tol, &[vec![]], &[dev]))
}

/// Run one named check.
pub fn run_check(fx: &Fixture, check: &str, opts: &RunOptions) -> Result<ResidualReport, SuiteError> {
    let chart = fx.chart().ok_or_else(|| SuiteError::Missing { check: check.to_string(), needs: "a structure" })?;
    let (base, cone) = sample_points(chart, opts);
    let tol = opts.tolerance(check);
    let classical = || -> Result<Vec<&AlmostContactMetric>, SuiteError> {
        let c = fx.classical();
        if c.is_empty() {
            return Err(SuiteError::Missing { check: check.to_string(), needs: "an almost contact metric structure" });
        }
        Ok(c)
    };
    let rep = match check {
        "acms" => {
            let c = classical()?;
            merge_all(side_names(c.len()).into_iter().zip(c).map(|(n, a)| (n, acms_check(a, &base, tol))).collect())
        }
        "normality" => {
            let c = classical()?;
            merge_all(side_names(c.len()).into_iter().zip(c).map(|(n, a)| (n, normality_check(a, &base, tol))).collect())
        }
        "sasakian" => {
            let c = classical()?;
            let mut parts = Vec::new();
            for (n, a) in side_names(c.len()).into_iter().zip(c) {
                parts.push((n, sasakian_criterion(a, &base, tol)?));
            }
            merge_all(parts)
        }
        "sasakian_pair" => {
            let (a, b) = need(fx.pair.as_ref(), check, "a pair of almost contact metric structures")?;
            merge_all(vec![("plus".into(), sasakian_criterion(a, &base, tol)?), ("minus".into(), sasakian_criterion(b, &base, tol)?)])
        }
        "vaisman" => match (&fx.pair, &fx.acs) {
            (Some((a, b)), _) => vaisman_conditions(a, b, &base, tol)?,
            (None, Some(a)) => vaisman_conditions(a, a, &base, tol)?,
            _ => return Err(SuiteError::Missing { check: check.into(), needs: "an almost contact metric structure" }),
        },
        "gacs" => gacs_check(&gacs_for(fx, check)?, &base, tol),
        "phi_kernel" => phi_kernel_check(&gacs_for(fx, check)?, &base, tol),
        "phi_cube" => phi_cube_check(&gacs_for(fx, check)?, &base, tol),
        "cone_algebra" => {
            let s = gacs_for(fx, check)?;
            let j = cone_gacx(&s);
            let mut rep = cone_gacx_check(&j, &cone, tol);
            rep.push(round_trip(&j, &FGacs::from_gacs(&s), &base, &cone, tol)?);
            rep
        }
        "involutivity" => involutivity_class(&gacs_for(fx, check)?, &base, tol)?.1,
        "prop45" => prop45_check(&gacs_for(fx, check)?, &base, &cone, tol)?,
        "thm48" => thm48_residual(&gacs_for(fx, check)?, &base, tol)?,
        "cone_crosscheck" => cone_crosscheck(&gacs_for(fx, check)?, &base, &cone, tol)?,
        "gacm" => gacm_check(need(fx.gacm_ref(), check, "a generalized almost contact metric structure")?, &base, tol),
        "dual_gacm" => {
            let m = need(fx.gacm_ref(), check, "a generalized almost contact metric structure")?;
            gacm_check(&dual_gacm(m)?, &base, tol)
        }
        "generalized_sasakian" => {
            let m = need(fx.gacm_ref(), check, "a generalized almost contact metric structure")?;
            generalized_sasakian_check(m, &base, &cone, tol)?
        }
        "fgacs" => fgacs_check(need(fx.fgacs_ref(), check, "a generalized f-almost contact structure")?, &base, tol),
        "f_cone_algebra" => {
            let s = need(fx.fgacs_ref(), check, "a generalized f-almost contact structure")?;
            let ip = i_prime(s);
            let mut rep = ResidualReport::default();
            rep.merge("i_prime", cone_gacx_check(&ip, &cone, tol));
            rep.merge("i", cone_gacx_check(&i_map(s), &cone, tol));
            rep.push(round_trip(&ip, s, &base, &cone, tol)?);
            rep
        }
        "thm510" => {
            let (m, alpha) = gacm_and_alpha(fx, check)?;
            thm510_forward(m, &alpha, &cone, tol)?
        }
        "cor511" => {
            let (m, alpha) = gacm_and_alpha(fx, check)?;
            cor511_check(m, &alpha, &cone, tol)
        }
        "f_sasakian" => {
            let fm = need(fx.fgacm.as_ref(), check, "a generalized f-almost contact metric structure")?;
            f_sasakian_check(fm, &cone, tol)?
        }
        other => return Err(SuiteError::UnknownCheck(other.to_string())),
    };
    Ok(rep)
}

fn gacm_and_alpha<'a>(fx: &'a Fixture, check: &str) -> Result<(&'a Gacm, Vec<Expr>), SuiteError> {
    if let Some(fm) = &fx.fgacm {
        return Ok((&fm.witness, fm.alpha.clone()));
    }
    let m = need(fx.gacm.as_ref(), check, "a generalized almost contact metric structure")?;
    Ok((m, vec![Expr::zero(); m.gacs.chart.dim()]))
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub check: String,
    pub pass: bool,
    pub report: ResidualReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub structure: String,
    pub seed: u64,
    pub samples: usize,
    pub cone_samples: usize,
    pub pass: bool,
    pub checks: Vec<CheckResult>,
}

/// Run several checks in order.
pub fn run_checks(name: &str, fx: &Fixture, checks: &[String], opts: &RunOptions) -> Result<SuiteReport, SuiteError> {
    let mut out = Vec::new();
    for c in checks {
        let start = Instant::now();
        let report = run_check(fx, c, opts)?;
        let wall = start.elapsed().as_secs_f64() * 1e3;
        out.push(CheckResult {
            check: c.clone(),
            pass: report.pass(),
            report,
            wall_time_ms: if opts.timings { Some(wall) } else { None },
        });
    }
    Ok(SuiteReport {
        structure: name.to_string(),
        seed: opts.seed,
        samples: opts.samples,
        cone_samples: opts.cone_samples,
        pass: out.iter().all(|c| c.pass),
        checks: out,
    })
}

/// Flags of all checks, keyed `check.flag`.
pub fn collect_flags(rep: &SuiteReport) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    for c in &rep.checks {
        for (k, v) in &c.report.flags {
            m.insert(format!("{}.{}", c.check, k), v.clone());
        }
    }
    m
}
