//! Structure-description JSON: reading into a [`Fixture`] and writing one
//! back out.

use crate::error::CliError;
use gencontact::calculus::{Chart, Form};
use gencontact::deformations::{FGacm, FGacs};
use gencontact::expr::{parse, Evaluator, Expr};
use gencontact::gta::{GtEndo, GtVec, SectionField};
use gencontact::linalg::Mat;
use gencontact::structures::{gacs_from_acs, gacs_from_contact, gmetric_from_gb, AlmostContactMetric, Gacm, Gacs};
use gencontact::gallery::sasakian_to_gs;
use gencontact::suite::Fixture;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<String>>,
    pub domain: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcsJson {
    pub phi: Vec<Vec<String>>,
    pub xi: Vec<String>,
    pub eta: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Vec<Vec<String>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionJson {
    pub vec: Vec<String>,
    pub form: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricJson {
    pub g: Vec<Vec<String>>,
    /// Antisymmetric component matrix b_ij.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<Vec<String>>>,
}

/// Φ given by a builder instead of a 2n×2n matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "builder", rename_all = "snake_case", deny_unknown_fields)]
pub enum Builder {
    FromAcs {
        phi: Vec<Vec<String>>,
        xi: Vec<String>,
        eta: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        g: Option<Vec<Vec<String>>>,
    },
    FromContact {
        eta: Vec<String>,
    },
    Blocks {
        tt: Vec<Vec<String>>,
        tc: Vec<Vec<String>>,
        ct: Vec<Vec<String>>,
        cc: Vec<Vec<String>>,
    },
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureJson {
    pub chart: Option<ChartJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acs: Option<AcsJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<Vec<AcsJson>>,
    /// A 2n×2n matrix of expressions or a [`Builder`] object.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eplus: Option<SectionJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eminus: Option<SectionJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricJson>,
    /// With `beta`, K₋(β)∘K₊(α) of the metric structure.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<String>>,
}

fn invalid(path: &str, msg: impl Into<String>) -> CliError {
    CliError::Invalid { path: path.to_string(), message: msg.into() }
}

/// Expression reader bound to a chart.
pub struct Reader<'a> {
    pub chart: &'a Chart,
    names: Vec<String>,
}

impl<'a> Reader<'a> {
    pub fn new(chart: &'a Chart) -> Self {
        Reader { chart, names: chart.coords().to_vec() }
    }

    pub fn expr(&self, path: &str, s: &str) -> Result<Expr, CliError> {
        parse(s, &self.names).map_err(|e| invalid(path, e.to_string()))
    }

    pub fn vector(&self, path: &str, v: &[String]) -> Result<Vec<Expr>, CliError> {
        let n = self.chart.dim();
        if v.len() != n {
            return Err(invalid(path, format!("expected {} components, got {}", n, v.len())));
        }
        v.iter().enumerate().map(|(i, s)| self.expr(&format!("{}[{}]", path, i), s)).collect()
    }

    pub fn matrix(&self, path: &str, m: &[Vec<String>], size: usize) -> Result<Mat<Expr>, CliError> {
        if m.len() != size || m.iter().any(|r| r.len() != size) {
            return Err(invalid(path, format!("expected a {}×{} matrix", size, size)));
        }
        let mut rows = Vec::with_capacity(size);
        for (i, r) in m.iter().enumerate() {
            let row: Result<Vec<Expr>, CliError> =
                r.iter().enumerate().map(|(j, s)| self.expr(&format!("{}[{}][{}]", path, i, j), s)).collect();
            rows.push(row?);
        }
        Ok(Mat::from_rows(rows))
    }

    pub fn section(&self, path: &str, s: &SectionJson) -> Result<SectionField, CliError> {
        Ok(GtVec { vec: self.vector(&format!("{}.vec", path), &s.vec)?, form: self.vector(&format!("{}.form", path), &s.form)? })
    }

    fn acs(&self, path: &str, a: &AcsJson) -> Result<AlmostContactMetric, CliError> {
        let n = self.chart.dim();
        let g = match &a.g {
            Some(g) => Some(self.matrix(&format!("{}.g", path), g, n)?),
            None => None,
        };
        Ok(AlmostContactMetric {
            chart: self.chart.clone(),
            phi: self.matrix(&format!("{}.phi", path), &a.phi, n)?,
            xi: self.vector(&format!("{}.xi", path), &a.xi)?,
            eta: self.vector(&format!("{}.eta", path), &a.eta)?,
            g,
        })
    }

    /// b as an antisymmetric matrix, checked numerically on a few points.
    pub fn two_form(&self, path: &str, m: &[Vec<String>]) -> Result<Form, CliError> {
        let n = self.chart.dim();
        let b = self.matrix(path, m, n)?;
        for p in self.chart.sample(0, 8) {
            let mut ev = Evaluator::new(&p);
            for i in 0..n {
                for j in 0..=i {
                    if (ev.value(b.get(i, j)) + ev.value(b.get(j, i))).norm() > 1e-12 {
                        return Err(invalid(path, format!("entries [{}][{}] and [{}][{}] are not antisymmetric", i, j, j, i)));
                    }
                }
            }
        }
        Ok(Form::two_form_upper(&b))
    }
}

pub fn read_chart(c: &ChartJson) -> Result<Chart, CliError> {
    let n = c.domain.len();
    if let Some(d) = c.dim {
        if d != n {
            return Err(invalid("chart.domain", format!("dim is {} but {} intervals are given", d, n)));
        }
    }
    let names = c.coords.clone().unwrap_or_else(|| Chart::default_names(n));
    let domain = c.domain.iter().map(|&[a, b]| (a, b)).collect();
    Chart::new(names, domain).map_err(|e| invalid("chart", e.to_string()))
}

fn gacs_from_phi(r: &Reader, phi: &Value, s: &StructureJson, fx: &mut Fixture) -> Result<Gacs, CliError> {
    let n = r.chart.dim();
    let sections = || -> Result<(SectionField, SectionField), CliError> {
        let ep = s.eplus.as_ref().ok_or_else(|| invalid("eplus", "required when phi is given by components"))?;
        let em = s.eminus.as_ref().ok_or_else(|| invalid("eminus", "required when phi is given by components"))?;
        Ok((r.section("eplus", ep)?, r.section("eminus", em)?))
    };
    if phi.is_array() {
        let m: Vec<Vec<String>> = serde_json::from_value(phi.clone()).map_err(|e| invalid("phi", e.to_string()))?;
        let phi = GtEndo::from_mat(&r.matrix("phi", &m, 2 * n)?);
        let (eplus, eminus) = sections()?;
        return Ok(Gacs { chart: r.chart.clone(), phi, eplus, eminus });
    }
    let b: Builder = serde_json::from_value(phi.clone()).map_err(|e| invalid("phi", e.to_string()))?;
    match b {
        Builder::FromAcs { phi, xi, eta, g } => {
            let acs = r.acs("phi", &AcsJson { phi, xi, eta, g })?;
            let gacs = gacs_from_acs(&acs).map_err(|e| invalid("phi", e.to_string()))?;
            if acs.g.is_some() && s.metric.is_none() {
                fx.gacm = Some(sasakian_to_gs(&acs).map_err(|e| invalid("phi.g", e.to_string()))?);
            }
            if fx.acs.is_none() {
                fx.acs = Some(acs);
            }
            Ok(gacs)
        }
        Builder::FromContact { eta } => {
            let eta = r.vector("phi.eta", &eta)?;
            gacs_from_contact(r.chart, &eta).map_err(|e| invalid("phi", e.to_string()))
        }
        Builder::Blocks { tt, tc, ct, cc } => {
            let phi = GtEndo {
                tt: r.matrix("phi.tt", &tt, n)?,
                tc: r.matrix("phi.tc", &tc, n)?,
                ct: r.matrix("phi.ct", &ct, n)?,
                cc: r.matrix("phi.cc", &cc, n)?,
            };
            let (eplus, eminus) = sections()?;
            Ok(Gacs { chart: r.chart.clone(), phi, eplus, eminus })
        }
    }
}

/// Build every structure the description provides.
pub fn read_structure(s: &StructureJson) -> Result<Fixture, CliError> {
    let chart = read_chart(s.chart.as_ref().ok_or_else(|| invalid("chart", "missing"))?)?;
    let r = Reader::new(&chart);
    let mut fx = Fixture::default();
    if let Some(a) = &s.acs {
        fx.acs = Some(r.acs("acs", a)?);
    }
    if let Some(p) = &s.pair {
        if p.len() != 2 {
            return Err(invalid("pair", format!("expected 2 structures, got {}", p.len())));
        }
        fx.pair = Some((r.acs("pair[0]", &p[0])?, r.acs("pair[1]", &p[1])?));
    }
    let Some(phi) = &s.phi else {
        for (key, present) in [("eplus", s.eplus.is_some()), ("eminus", s.eminus.is_some()), ("f", s.f.is_some()), ("metric", s.metric.is_some()), ("alpha", s.alpha.is_some()), ("beta", s.beta.is_some())] {
            if present {
                return Err(invalid(key, "needs phi"));
            }
        }
        if fx.acs.is_none() && fx.pair.is_none() {
            return Err(invalid("structure", "describes no structure (give acs, pair or phi)"));
        }
        return Ok(fx);
    };
    let gacs = gacs_from_phi(&r, phi, s, &mut fx)?;
    if let Some(m) = &s.metric {
        let n = chart.dim();
        let g = r.matrix("metric.g", &m.g, n)?;
        let b = match &m.b {
            Some(b) => r.two_form("metric.b", b)?,
            None => Form::zero(2, n),
        };
        let metric = gmetric_from_gb(&g, &b).map_err(|e| invalid("metric", e.to_string()))?;
        fx.gacm = Some(Gacm { gacs: gacs.clone(), metric });
    }
    match (&s.alpha, &s.beta) {
        (None, None) => {}
        (a, b) => {
            if s.f.is_some() {
                return Err(invalid("f", "f is determined by alpha and beta"));
            }
            let witness = fx.gacm.take().ok_or_else(|| invalid("alpha", "needs a metric structure"))?;
            let zero = vec!["0".to_string(); chart.dim()];
            let alpha = r.vector("alpha", a.as_ref().unwrap_or(&zero))?;
            let beta = r.vector("beta", b.as_ref().unwrap_or(&zero))?;
            fx.fgacm = Some(FGacm::new(witness, alpha, beta).map_err(|e| invalid("alpha", e.to_string()))?);
            return Ok(fx);
        }
    }
    if let Some(f) = &s.f {
        if fx.gacm.is_some() {
            return Err(invalid("f", "an f-structure cannot carry a metric here; use alpha and beta"));
        }
        fx.fgacs = Some(FGacs { chart: chart.clone(), phi: gacs.phi, eplus: gacs.eplus, eminus: gacs.eminus, f: r.expr("f", f)? });
        return Ok(fx);
    }
    if fx.gacm.is_none() {
        fx.gacs = Some(gacs);
    }
    Ok(fx)
}

/// Expression writer bound to a chart.
struct Writer {
    names: Vec<String>,
}

impl Writer {
    fn expr(&self, e: &Expr) -> Result<String, CliError> {
        e.to_infix(&self.names).map_err(|err| CliError::Serialize(err.to_string()))
    }

    fn vector(&self, v: &[Expr]) -> Result<Vec<String>, CliError> {
        v.iter().map(|e| self.expr(e)).collect()
    }

    fn matrix(&self, m: &Mat<Expr>) -> Result<Vec<Vec<String>>, CliError> {
        (0..m.rows()).map(|i| (0..m.cols()).map(|j| self.expr(m.get(i, j))).collect()).collect()
    }

    fn section(&self, s: &SectionField) -> Result<SectionJson, CliError> {
        Ok(SectionJson { vec: self.vector(&s.vec)?, form: self.vector(&s.form)? })
    }

    fn acs(&self, a: &AlmostContactMetric) -> Result<AcsJson, CliError> {
        let g = match &a.g {
            Some(g) => Some(self.matrix(g)?),
            None => None,
        };
        Ok(AcsJson { phi: self.matrix(&a.phi)?, xi: self.vector(&a.xi)?, eta: self.vector(&a.eta)?, g })
    }

    fn gacs(&self, out: &mut StructureJson, phi: &GtEndo<Expr>, ep: &SectionField, em: &SectionField) -> Result<(), CliError> {
        out.phi = Some(serde_json::to_value(self.matrix(&phi.to_mat())?).expect("strings serialize"));
        out.eplus = Some(self.section(ep)?);
        out.eminus = Some(self.section(em)?);
        Ok(())
    }

    fn metric(&self, m: &Gacm) -> Result<MetricJson, CliError> {
        let g = m.metric.g.as_ref().ok_or_else(|| CliError::Serialize("generalized metric has no g".into()))?;
        let b = match &m.metric.b {
            Some(b) => Some(self.matrix(b)?),
            None => None,
        };
        Ok(MetricJson { g: self.matrix(g)?, b })
    }
}

pub fn chart_json(chart: &Chart) -> ChartJson {
    ChartJson {
        dim: Some(chart.dim()),
        coords: Some(chart.coords().to_vec()),
        domain: chart.domain().iter().map(|&(a, b)| [a, b]).collect(),
    }
}

/// Description of every structure in the fixture.
pub fn write_structure(fx: &Fixture) -> Result<StructureJson, CliError> {
    let chart = fx.chart().ok_or_else(|| CliError::Serialize("fixture holds no structure".into()))?;
    let w = Writer { names: chart.coords().to_vec() };
    let mut out = StructureJson { chart: Some(chart_json(chart)), ..StructureJson::default() };
    if let Some(a) = &fx.acs {
        out.acs = Some(w.acs(a)?);
    }
    if let Some((a, b)) = &fx.pair {
        out.pair = Some(vec![w.acs(a)?, w.acs(b)?]);
    }
    if let Some(fm) = &fx.fgacm {
        let s = &fm.witness.gacs;
        w.gacs(&mut out, &s.phi, &s.eplus, &s.eminus)?;
        out.metric = Some(w.metric(&fm.witness)?);
        out.alpha = Some(w.vector(&fm.alpha)?);
        out.beta = Some(w.vector(&fm.beta)?);
    } else if let Some(m) = &fx.gacm {
        w.gacs(&mut out, &m.gacs.phi, &m.gacs.eplus, &m.gacs.eminus)?;
        out.metric = Some(w.metric(m)?);
    } else if let Some(f) = &fx.fgacs {
        w.gacs(&mut out, &f.phi, &f.eplus, &f.eminus)?;
        out.f = Some(w.expr(&f.f)?);
    } else if let Some(s) = &fx.gacs {
        w.gacs(&mut out, &s.phi, &s.eplus, &s.eminus)?;
    }
    Ok(out)
}
