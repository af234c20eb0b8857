//! JSON scenario files: a domain, a field, an exponent and the sampler,
//! walk-on-spheres and tolerance settings of a verification run.
//!
//! Unknown keys are rejected and every numeric range is checked at load.

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::extension::{GehringMartioSampler, WeightedLengthOptions};
use crate::geometry::{EpigraphDomain, GraphShape, LipschitzCertificate, LipschitzGraph, Point};
use crate::harmonic::{BoundaryData, HarmonicField, PoissonExtension, PoissonRule, WosField, WosParams};
use crate::hoelder::{PointSampler, TheoremSamplers};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainSpec {
    HalfSpace { dim: usize },
    Affine { slope: Vec<f64>, offset: f64, lip: f64 },
    AbsCone {
        slope: f64,
        apex: Vec<f64>,
        #[serde(default)]
        height: f64,
        lip: f64,
    },
    PiecewiseLinear { knots: Vec<[f64; 2]>, lip: f64 },
    /// CSV table; a relative path is resolved against the scenario file.
    Tabulated { csv: PathBuf, lip: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DataSpec {
    Constant { value: f64 },
    Indicator { threshold: f64 },
    PowerKink { alpha: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSpec {
    Constant { value: f64 },
    SeparableExp,
    Pole { pole: Point },
    HarmonicMeasure,
    Poisson {
        data: DataSpec,
        #[serde(default)]
        rule: PoissonRule,
    },
    /// Walk-on-spheres extension of `data`, using the scenario's `wos` block.
    Wos { data: DataSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertificationSpec {
    pub n_pairs: usize,
    pub lo: f64,
    pub hi: f64,
    pub seed: u64,
}

impl Default for CertificationSpec {
    fn default() -> Self {
        Self { n_pairs: 10_000, lo: -10.0, hi: 10.0, seed: 0 }
    }
}

fn default_tol() -> f64 {
    1e-9
}

fn default_inflation() -> f64 {
    1.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: u32,
    #[serde(default)]
    pub name: String,
    pub domain: DomainSpec,
    pub field: FieldSpec,
    pub alpha: f64,
    #[serde(default)]
    pub samplers: TheoremSamplers,
    #[serde(default)]
    pub extension: GehringMartioSampler,
    #[serde(default)]
    pub quadrature: WeightedLengthOptions,
    #[serde(default)]
    pub wos: WosParams,
    /// Evaluation points for walk-on-spheres runs.
    #[serde(default)]
    pub wos_points: Vec<Point>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_inflation")]
    pub inflation: f64,
    #[serde(default)]
    pub certification: CertificationSpec,
}

fn finite(what: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return invalid(format!("{what} must be finite, got {v}"));
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Replaces every seed in the scenario.
    pub fn with_seed(mut self, seed: u64) -> Self {
        if let PointSampler::Random { seed: s, .. } = &mut self.samplers.points {
            *s = seed;
        }
        self.samplers.pairs.seed = seed;
        self.extension.seed = seed;
        self.wos.seed = seed;
        self.certification.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return invalid(format!("unsupported config version {} (expected {CONFIG_VERSION})", self.version));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return invalid(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if !(self.tol >= 0.0 && self.tol.is_finite()) {
            return invalid(format!("tol must be finite and >= 0, got {}", self.tol));
        }
        if !(self.inflation >= 1.0 && self.inflation.is_finite()) {
            return invalid(format!("inflation must be finite and >= 1, got {}", self.inflation));
        }
        let w = &self.wos;
        if !(w.epsilon > 0.0) || w.n_walks == 0 || w.max_steps == 0 {
            return invalid("wos needs epsilon > 0, n_walks > 0 and max_steps > 0");
        }
        finite("wos far_value", w.far_value)?;
        if let Some(c) = w.far_cutoff {
            if !(c > 0.0 && c.is_finite()) {
                return invalid(format!("wos far_cutoff must be positive, got {c}"));
            }
        }
        let cert = &self.certification;
        if cert.n_pairs == 0 || !(cert.lo < cert.hi) {
            return invalid("certification needs n_pairs > 0 and lo < hi");
        }
        Ok(())
    }

    pub fn build_domain(&self, base_dir: &Path) -> Result<EpigraphDomain> {
        let graph = match &self.domain {
            DomainSpec::HalfSpace { dim } => {
                if *dim < 2 {
                    return invalid("half-space needs dim >= 2");
                }
                LipschitzGraph::flat(dim - 1)?
            }
            DomainSpec::Affine { slope, offset, lip } => {
                LipschitzGraph::new(GraphShape::Affine { slope: slope.clone(), offset: *offset }, *lip)?
            }
            DomainSpec::AbsCone { slope, apex, height, lip } => LipschitzGraph::new(
                GraphShape::AbsCone { slope: *slope, apex: apex.clone(), height: *height },
                *lip,
            )?,
            DomainSpec::PiecewiseLinear { knots, lip } => LipschitzGraph::piecewise_linear(knots.clone(), *lip)?,
            DomainSpec::Tabulated { csv, lip } => {
                let path = if csv.is_absolute() { csv.clone() } else { base_dir.join(csv) };
                let f = File::open(&path)
                    .map_err(|e| Error::InvalidInput(format!("cannot open table {}: {e}", path.display())))?;
                LipschitzGraph::tabulated_from_csv(f, *lip)?
            }
        };
        Ok(EpigraphDomain::new(graph))
    }

    fn build_data(spec: &DataSpec) -> Result<BoundaryData> {
        Ok(match *spec {
            DataSpec::Constant { value } => {
                finite("constant data", value)?;
                BoundaryData::Constant(value)
            }
            DataSpec::Indicator { threshold } => {
                finite("indicator threshold", threshold)?;
                BoundaryData::Indicator { threshold }
            }
            DataSpec::PowerKink { alpha } => BoundaryData::power_kink(alpha)?,
        })
    }

    pub fn build_field(&self, domain: &EpigraphDomain) -> Result<HarmonicField> {
        let dim = domain.dim();
        let flat = matches!(&domain.graph.shape, GraphShape::Affine { slope, offset } if *offset == 0.0 && slope.iter().all(|a| *a == 0.0));
        let need_flat = |what: &str| -> Result<()> {
            if !flat {
                return invalid(format!("{what} field needs the half-space domain"));
            }
            Ok(())
        };
        match &self.field {
            FieldSpec::Constant { value } => HarmonicField::constant(dim, *value),
            FieldSpec::SeparableExp => {
                need_flat("separable-exp")?;
                HarmonicField::separable_exp(dim)
            }
            FieldSpec::Pole { pole } => HarmonicField::pole(domain, pole.clone()),
            FieldSpec::HarmonicMeasure => {
                need_flat("harmonic-measure")?;
                if dim != 2 {
                    return invalid("harmonic-measure field is two-dimensional");
                }
                Ok(HarmonicField::harmonic_measure_2d())
            }
            FieldSpec::Poisson { data, rule } => {
                need_flat("poisson")?;
                if dim != 2 {
                    return invalid("poisson field is two-dimensional");
                }
                Ok(HarmonicField::Poisson(PoissonExtension::new(Self::build_data(data)?, *rule)?))
            }
            FieldSpec::Wos { data } => Ok(HarmonicField::Wos(WosField {
                domain: domain.clone(),
                data: Self::build_data(data)?,
                params: self.wos,
            })),
        }
    }
}

/// A loaded scenario with its domain, field and Lipschitz certificate.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub domain: EpigraphDomain,
    pub field: HarmonicField,
    pub certificate: LipschitzCertificate,
}

impl Scenario {
    /// Builds the scenario and certifies the declared Lipschitz bound on the
    /// certification box; a failed certificate is an input error.
    pub fn from_config(config: ScenarioConfig, base_dir: &Path) -> Result<Self> {
        config.validate()?;
        let domain = config.build_domain(base_dir)?;
        let cert = &config.certification;
        let bbox = vec![(cert.lo, cert.hi); domain.dim() - 1];
        let certificate = domain.graph.certify(cert.n_pairs, &bbox, cert.seed)?;
        if !certificate.passed {
            return invalid(format!(
                "declared Lipschitz bound {} is violated: sampled quotient {}",
                certificate.declared, certificate.max_quotient
            ));
        }
        for p in &config.wos_points {
            if p.dim() != domain.dim() {
                return invalid(format!("wos point {:?} is not in R^{}", p.coords(), domain.dim()));
            }
        }
        let field = config.build_field(&domain)?;
        Ok(Self { config, domain, field, certificate })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        let config = ScenarioConfig::from_json(&text)?;
        Self::from_config(config, path.parent().unwrap_or(Path::new(".")))
    }
}
