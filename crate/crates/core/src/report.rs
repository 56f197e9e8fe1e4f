//! Named residual tables aggregated over sample points.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Default tolerance for pointwise algebraic identities.
pub const ALGEBRAIC_TOL: f64 = 1e-9;
/// Default tolerance for integrability (Courant involutivity) residuals.
pub const INTEGRABILITY_TOL: f64 = 1e-7;

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub condition: String,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub argmax_point: Vec<f64>,
    pub pass: bool,
    pub tolerance: f64,
    /// Reported for information; does not enter the overall verdict.
    #[serde(default, skip_serializing_if = "is_false")]
    pub probe: bool,
}

impl Residual {
    /// Aggregate per-point values (one per point, same order as `points`).
    /// Non-finite values count as failures and win the argmax.
    pub fn from_values(condition: &str, tolerance: f64, points: &[Vec<f64>], values: &[f64]) -> Residual {
        assert_eq!(points.len(), values.len(), "one value per point");
        let mut max = 0.0f64;
        let mut arg = 0usize;
        let mut sum = 0.0;
        let mut finite = true;
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                if finite {
                    arg = i;
                }
                finite = false;
                continue;
            }
            sum += v;
            if finite && v > max {
                max = v;
                arg = i;
            }
        }
        let n = values.len().max(1) as f64;
        let max_residual = if finite { max } else { f64::INFINITY };
        Residual {
            condition: condition.to_string(),
            max_residual,
            mean_residual: if finite { sum / n } else { f64::INFINITY },
            argmax_point: points.get(arg).cloned().unwrap_or_default(),
            pass: finite && max_residual < tolerance,
            tolerance,
            probe: false,
        }
    }

    pub fn as_probe(mut self) -> Residual {
        self.probe = true;
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub entries: Vec<Residual>,
    /// Classification results and other labelled outcomes.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub flags: BTreeMap<String, String>,
}

pub type IntegrabilityReport = ResidualReport;

impl ResidualReport {
    pub fn new(entries: Vec<Residual>) -> ResidualReport {
        ResidualReport { entries, flags: BTreeMap::new() }
    }

    pub fn get(&self, condition: &str) -> Option<&Residual> {
        self.entries.iter().find(|r| r.condition == condition)
    }

    /// Max residual of a named entry.
    ///
    /// # Panics
    /// If the entry is missing.
    pub fn max(&self, condition: &str) -> f64 {
        match self.get(condition) {
            Some(r) => r.max_residual,
            None => panic!("no residual named '{}' in report (have: {:?})", condition, self.names()),
        }
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|r| r.condition.as_str()).collect()
    }

    /// All non-probe entries pass.
    pub fn pass(&self) -> bool {
        self.entries.iter().filter(|r| !r.probe).all(|r| r.pass)
    }

    /// Largest max-residual among non-probe entries.
    pub fn worst(&self) -> f64 {
        self.entries.iter().filter(|r| !r.probe).fold(0.0, |m, r| m.max(r.max_residual))
    }

    pub fn push(&mut self, r: Residual) {
        self.entries.push(r);
    }

    /// Append another report, prefixing its names with `prefix.`.
    pub fn merge(&mut self, prefix: &str, other: ResidualReport) {
        for mut r in other.entries {
            if !prefix.is_empty() {
                r.condition = format!("{}.{}", prefix, r.condition);
            }
            self.entries.push(r);
        }
        for (k, v) in other.flags {
            let key = if prefix.is_empty() { k } else { format!("{}.{}", prefix, k) };
            self.flags.insert(key, v);
        }
    }

    pub fn set_flag(&mut self, key: &str, value: impl Into<String>) {
        self.flags.insert(key.to_string(), value.into());
    }
}

/// Evaluate `f` at every point in parallel and aggregate the named values
/// in point order, so the result does not depend on scheduling.
pub fn sweep<F>(points: &[Vec<f64>], specs: &[(&str, f64)], f: F) -> Vec<Residual>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync + Send,
{
    let per_point: Vec<Vec<f64>> = points.par_iter().map(|p| f(p)).collect();
    specs
        .iter()
        .enumerate()
        .map(|(k, &(name, tol))| {
            let vals: Vec<f64> = per_point.iter().map(|v| v[k]).collect();
            Residual::from_values(name, tol, points, &vals)
        })
        .collect()
}

/// Deterministic per-point seed derived from the coordinates.
pub fn point_seed(p: &[f64]) -> u64 {
    p.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, x| (h ^ x.to_bits()).wrapping_mul(0x0100_0000_01b3))
}
