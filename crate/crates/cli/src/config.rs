//! Run configuration: which structure, which deformations, which checks.

use crate::error::CliError;
use crate::structure::{read_structure, Reader, StructureJson};
use gencontact::deformations::{b_transform, k_minus, k_plus, normalize, FGacs};
use gencontact::gallery::{entry, fixture};
use gencontact::structures::gacs_from_acs;
use gencontact::suite::{Fixture, RunOptions, CHECKS};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Label used in the report; defaults to the gallery name.
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub gallery: Option<String>,
    #[serde(default)]
    pub structure: Option<StructureJson>,
    #[serde(default)]
    pub pipeline: Vec<Step>,
    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub cone_samples: Option<usize>,
    #[serde(default)]
    pub tol: Option<Tol>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

/// One tolerance for every check, or one per check.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Tol {
    All(f64),
    PerCheck(BTreeMap<String, f64>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Step {
    /// e^B with B given as an antisymmetric matrix.
    BField(Vec<Vec<String>>),
    KPlus(Vec<String>),
    KMinus(Vec<String>),
    /// Back to f = 0 by K₋(−α)∘K₊(α).
    Normalize,
}

/// A fully resolved configuration.
#[derive(Clone, Debug)]
pub struct Job {
    pub name: String,
    pub fixture: Fixture,
    pub checks: Vec<String>,
    pub options: RunOptions,
    pub out: Option<PathBuf>,
}

fn invalid(path: &str, msg: impl Into<String>) -> CliError {
    CliError::Invalid { path: path.to_string(), message: msg.into() }
}

/// Syntax and schema only; errors carry line and column.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    serde_json::from_str(text).map_err(CliError::from_json)
}

/// Parse and resolve in one go.
pub fn load_config(text: &str) -> Result<Job, CliError> {
    parse_config(text)?.resolve()
}

fn check_tol(path: &str, t: f64) -> Result<f64, CliError> {
    if t.is_finite() && t > 0.0 {
        Ok(t)
    } else {
        Err(invalid(path, "tolerance must be positive and finite"))
    }
}

fn known_check(path: &str, c: &str) -> Result<(), CliError> {
    if CHECKS.contains(&c) {
        Ok(())
    } else {
        Err(invalid(path, format!("unknown check '{}' (known: {})", c, CHECKS.join(", "))))
    }
}

impl RunConfig {
    pub fn options(&self) -> Result<RunOptions, CliError> {
        let mut o = RunOptions::default();
        if let Some(s) = self.seed {
            o.seed = s;
        }
        if let Some(n) = self.samples {
            if n == 0 {
                return Err(invalid("samples", "must be at least 1"));
            }
            o.samples = n;
        }
        if let Some(n) = self.cone_samples {
            if n == 0 {
                return Err(invalid("cone_samples", "must be at least 1"));
            }
            o.cone_samples = n;
        }
        match &self.tol {
            None => {}
            Some(Tol::All(t)) => o.tol = Some(check_tol("tol", *t)?),
            Some(Tol::PerCheck(m)) => {
                for (k, &t) in m {
                    known_check(&format!("tol.{}", k), k)?;
                    o.overrides.insert(k.clone(), check_tol(&format!("tol.{}", k), t)?);
                }
            }
        }
        Ok(o)
    }

    /// The structure before the pipeline.
    pub fn base_fixture(&self) -> Result<(String, Fixture), CliError> {
        match (&self.gallery, &self.structure) {
            (Some(_), Some(_)) => Err(invalid("gallery", "give either gallery or structure, not both")),
            (None, None) => Err(invalid("structure", "missing (give gallery or structure)")),
            (Some(g), None) => {
                let fx = fixture(g).ok_or_else(|| invalid("gallery", format!("unknown gallery structure '{}'", g)))?;
                Ok((g.clone(), fx))
            }
            (None, Some(s)) => Ok(("structure".to_string(), read_structure(s)?)),
        }
    }

    pub fn resolve(&self) -> Result<Job, CliError> {
        let options = self.options()?;
        let (default_name, base) = self.base_fixture()?;
        let fx = apply_pipeline(&base, &self.pipeline, &options)?;
        let checks = if !self.checks.is_empty() {
            for (i, c) in self.checks.iter().enumerate() {
                known_check(&format!("checks[{}]", i), c)?;
            }
            self.checks.clone()
        } else {
            match self.gallery.as_deref().and_then(entry) {
                Some(e) if self.pipeline.is_empty() => e.expected.iter().map(|(c, _)| c.to_string()).collect(),
                _ => return Err(invalid("checks", "no checks requested")),
            }
        };
        Ok(Job { name: self.name.clone().unwrap_or(default_name), fixture: fx, checks, options, out: self.out.clone() })
    }
}

fn start_of(fx: &Fixture) -> Result<FGacs, CliError> {
    if let Some(f) = &fx.fgacs {
        return Ok(f.clone());
    }
    if let Some(m) = &fx.fgacm {
        return Ok(m.structure.clone());
    }
    if let Some(s) = &fx.gacs {
        return Ok(FGacs::from_gacs(s));
    }
    if let Some(m) = &fx.gacm {
        return Ok(FGacs::from_gacs(&m.gacs));
    }
    if let Some(a) = &fx.acs {
        return Ok(FGacs::from_gacs(&gacs_from_acs(a).map_err(|e| invalid("structure", e.to_string()))?));
    }
    Err(invalid("pipeline", "needs a generalized almost contact structure to act on"))
}

/// Apply the deformation steps in order. The result carries only the
/// deformed structure; metric data does not survive a pipeline.
pub fn apply_pipeline(fx: &Fixture, steps: &[Step], opts: &RunOptions) -> Result<Fixture, CliError> {
    if steps.is_empty() {
        return Ok(fx.clone());
    }
    let mut s = start_of(fx)?;
    let chart = s.chart.clone();
    let r = Reader::new(&chart);
    let mut normalized = false;
    for (i, step) in steps.iter().enumerate() {
        let path = format!("pipeline[{}]", i);
        normalized = false;
        s = match step {
            Step::BField(m) => b_transform(&s, &r.two_form(&format!("{}.b_field", path), m)?),
            Step::KPlus(k) => k_plus(&s, &r.vector(&format!("{}.k_plus", path), k)?),
            Step::KMinus(k) => k_minus(&s, &r.vector(&format!("{}.k_minus", path), k)?),
            Step::Normalize => {
                let pts = chart.sample(opts.seed, opts.samples);
                let (g, _, _) = normalize(&s, &pts).map_err(|e| invalid(&path, e.to_string()))?;
                normalized = true;
                FGacs::from_gacs(&g)
            }
        };
    }
    let mut out = Fixture::default();
    if normalized || s.f.is_zero() {
        out.gacs = Some(s.to_gacs());
    }
    out.fgacs = Some(s);
    Ok(out)
}
