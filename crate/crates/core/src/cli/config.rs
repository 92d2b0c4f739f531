//! Declarative run configuration.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::expr::Expr;
use super::io::{real_field_from_json, spinor_from_json, FieldFile};
use crate::clifford::GammaRep;
use crate::edm::EdmParams;
use crate::error::{Error, Result};
use crate::grid::{MetricField, OneFormField, ScalarField, TensorField, TorusGrid};
use crate::metric::BilinearForm;
use crate::random::FieldSampler;
use crate::spinor::{SpinStructureTwist, SpinorField};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MetricSpec {
    #[default]
    Flat,
    Constant {
        matrix: Vec<Vec<f64>>,
    },
    /// `e^{2u} η` for an expression `u`.
    Conformal {
        factor: String,
    },
    /// `Λᵀ η S² Λ` with smooth random `Λ`, `S`.
    Random {
        seed: u64,
        amplitude: f64,
        #[serde(default = "one")]
        modes: i32,
    },
    GridFile {
        path: PathBuf,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpinorSpec {
    Zero,
    /// `e^{i k·x} v` with `v` given as `[re, im]` pairs.
    PlaneWave {
        momentum: Vec<f64>,
        amplitude: Vec<[f64; 2]>,
    },
    Random {
        seed: u64,
        amplitude: f64,
        #[serde(default = "one")]
        modes: i32,
    },
    GridFile {
        path: PathBuf,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    #[default]
    Zero,
    /// One expression per coordinate component.
    Expression {
        components: Vec<String>,
    },
    Random {
        seed: u64,
        amplitude: f64,
        #[serde(default = "one")]
        modes: i32,
    },
    GridFile {
        path: PathBuf,
    },
}

fn one() -> i32 {
    1
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    #[serde(default)]
    pub lambda: Vec<f64>,
    #[serde(default)]
    pub q: Vec<f64>,
}

/// Command-specific settings; each command reads the fields it needs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Eigenvalue count for `dirac-spectrum`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    /// Second metric for `dirac-pullback`, `beta-transport`, `wave-gauge` and `symbol`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_metric: Option<MetricSpec>,
    /// Declared bound on residual norms; adds a check to residual commands.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_tolerance: Option<f64>,
    /// `el-check`: number of random directions, their seed and the differencing step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directions: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    /// `constraints`: second fundamental form (matrix of expressions),
    /// normal component of the potential and covariant normal derivative.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extrinsic: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal_potential: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential_rate: Option<Vec<String>>,
    /// `symbol`: covector and base point (grid indices; default the centre).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<Vec<usize>>,
    /// `evolve`: steps, CFL fraction, output stride, background scale and
    /// lapse as expressions in `x1` and `t`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfl: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lapse: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dimension: usize,
    pub signature: [usize; 2],
    pub grid: Vec<usize>,
    #[serde(default)]
    pub metric: MetricSpec,
    /// Per-direction twist, each 0 or 0.5; periodic when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twist: Option<Vec<f64>>,
    #[serde(default)]
    pub spinors: Vec<SpinorSpec>,
    #[serde(default)]
    pub potential: PotentialSpec,
    #[serde(default)]
    pub params: ParamsSpec,
    #[serde(default)]
    pub options: Options,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("configuration serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    /// Schema-level consistency checks that do not touch the file system.
    pub fn validate(&self) -> Result<()> {
        let m = self.dimension;
        if self.grid.len() != m {
            return Err(Error::Config(format!("grid has {} sizes for dimension {m}", self.grid.len())));
        }
        if self.signature[0] + self.signature[1] != m {
            return Err(Error::Config(format!(
                "signature ({}, {}) does not add up to dimension {m}",
                self.signature[0], self.signature[1]
            )));
        }
        if let Some(tw) = &self.twist {
            if tw.len() != m {
                return Err(Error::Config(format!("twist has {} entries for dimension {m}", tw.len())));
            }
            SpinStructureTwist::new(tw)?;
        }
        if self.params.lambda.len() != self.params.q.len() {
            return Err(Error::Config("params.lambda and params.q differ in length".into()));
        }
        check_metric_spec(&self.metric, m)?;
        if let Some(t) = &self.options.target_metric {
            check_metric_spec(t, m)?;
        }
        for s in &self.spinors {
            if let SpinorSpec::PlaneWave { momentum, .. } = s {
                if momentum.len() != m {
                    return Err(Error::Config("plane-wave momentum has the wrong length".into()));
                }
                let twist = self.twist.clone().unwrap_or_else(|| vec![0.0; m]);
                for (k, d) in momentum.iter().zip(&twist) {
                    if ((k - d) - (k - d).round()).abs() > 1e-12 {
                        return Err(Error::Config(format!("momentum {k} is incompatible with twist {d}")));
                    }
                }
            }
        }
        if let PotentialSpec::Expression { components } = &self.potential {
            if components.len() != m {
                return Err(Error::Config("potential needs one expression per direction".into()));
            }
            for c in components {
                Expr::parse_in(c, m, false)?;
            }
        }
        Ok(())
    }

    pub fn torus(&self) -> Result<TorusGrid> {
        TorusGrid::new(&self.grid)
    }

    pub fn spin_structure(&self) -> Result<SpinStructureTwist> {
        match &self.twist {
            Some(t) => SpinStructureTwist::new(t),
            None => Ok(SpinStructureTwist::periodic(self.dimension)),
        }
    }

    pub fn signature(&self) -> (usize, usize) {
        (self.signature[0], self.signature[1])
    }

    pub fn rep(&self) -> Result<GammaRep> {
        GammaRep::new(self.signature[0], self.signature[1])
    }

    pub fn params(&self) -> Result<EdmParams> {
        EdmParams::new(self.params.lambda.clone(), self.params.q.clone())
    }
}

fn check_metric_spec(spec: &MetricSpec, m: usize) -> Result<()> {
    match spec {
        MetricSpec::Constant { matrix } => {
            if matrix.len() != m || matrix.iter().any(|r| r.len() != m) {
                return Err(Error::Config(format!("constant metric must be {m}×{m}")));
            }
        }
        MetricSpec::Conformal { factor } => {
            Expr::parse_in(factor, m, false)?;
        }
        _ => {}
    }
    Ok(())
}

/// Materializes configured fields; relative file paths resolve against `base`.
pub struct Resolver<'a> {
    pub config: &'a RunConfig,
    pub base: PathBuf,
}

impl<'a> Resolver<'a> {
    pub fn new(config: &'a RunConfig, base: &Path) -> Self {
        Self {
            config,
            base: base.to_path_buf(),
        }
    }

    fn read(&self, path: &Path) -> Result<FieldFile> {
        let full = if path.is_absolute() { path.to_path_buf() } else { self.base.join(path) };
        Ok(serde_json::from_str(&std::fs::read_to_string(full)?)?)
    }

    pub fn metric(&self, spec: &MetricSpec) -> Result<MetricField> {
        let cfg = self.config;
        let grid = cfg.torus()?;
        let (r, s) = cfg.signature();
        let g = match spec {
            MetricSpec::Flat => MetricField::flat(&grid, r, s)?,
            MetricSpec::Constant { matrix } => {
                let flat: Vec<f64> = matrix.iter().flatten().copied().collect();
                MetricField::constant(&grid, &BilinearForm::new(DMatrix::from_row_slice(r + s, r + s, &flat))?)?
            }
            MetricSpec::Conformal { factor } => {
                let u = Expr::parse_in(factor, cfg.dimension, false)?;
                MetricField::conformal(&grid, r, s, |x| u.eval(x, 0.0))?
            }
            MetricSpec::Random { seed, amplitude, modes } => {
                FieldSampler::new(*seed).metric(&grid, (r, s), *modes, *amplitude)?
            }
            MetricSpec::GridFile { path } => {
                let m = cfg.dimension;
                let (file_grid, values) = real_field_from_json(&self.read(path)?, m * m)?;
                file_grid.check_same(&grid)?;
                MetricField::from_values(&grid, values)?
            }
        };
        if g.signature() != (r, s) {
            let (gr, gs) = g.signature();
            return Err(Error::SignatureMismatch {
                expected_r: r,
                expected_s: s,
                r: gr,
                s: gs,
            });
        }
        Ok(g)
    }

    pub fn spinor(&self, spec: &SpinorSpec, spinor_dim: usize) -> Result<SpinorField> {
        let cfg = self.config;
        let grid = cfg.torus()?;
        let twist = cfg.spin_structure()?;
        let psi = match spec {
            SpinorSpec::Zero => SpinorField::zeros(&grid, &twist, spinor_dim),
            SpinorSpec::PlaneWave { momentum, amplitude } => {
                let v: Vec<Complex64> = amplitude.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
                SpinorField::plane_wave(&grid, &twist, momentum, &v)?
            }
            SpinorSpec::Random { seed, amplitude, modes } => {
                FieldSampler::new(*seed).spinor(&grid, &twist, spinor_dim, *modes, *amplitude)?
            }
            SpinorSpec::GridFile { path } => {
                let psi = spinor_from_json(&self.read(path)?)?;
                psi.grid.check_same(&grid)?;
                if psi.twist != twist {
                    return Err(Error::TwistMismatch);
                }
                psi
            }
        };
        if psi.spinor_dim != spinor_dim {
            return Err(Error::DimensionMismatch {
                expected: spinor_dim,
                found: psi.spinor_dim,
            });
        }
        Ok(psi)
    }

    /// The configured spinor fields, in order.
    pub fn spinors(&self, spinor_dim: usize) -> Result<Vec<SpinorField>> {
        self.config
            .spinors
            .iter()
            .map(|s| self.spinor(s, spinor_dim))
            .collect()
    }

    pub fn potential(&self) -> Result<OneFormField> {
        let cfg = self.config;
        let grid = cfg.torus()?;
        let m = cfg.dimension;
        match &cfg.potential {
            PotentialSpec::Zero => Ok(OneFormField::zeros(&grid)),
            PotentialSpec::Expression { components } => {
                let exprs = components
                    .iter()
                    .map(|c| Expr::parse_in(c, m, false))
                    .collect::<Result<Vec<_>>>()?;
                Ok(OneFormField::from_fn(&grid, |x| exprs.iter().map(|e| e.eval(x, 0.0)).collect()))
            }
            PotentialSpec::Random { seed, amplitude, modes } => {
                Ok(FieldSampler::new(*seed).one_form(&grid, *modes, *amplitude))
            }
            PotentialSpec::GridFile { path } => {
                let (file_grid, values) = real_field_from_json(&self.read(path)?, m)?;
                file_grid.check_same(&grid)?;
                OneFormField::from_values(&grid, values)
            }
        }
    }

    pub fn scalar_expr(&self, src: &str) -> Result<ScalarField> {
        let e = Expr::parse_in(src, self.config.dimension, false)?;
        Ok(ScalarField::from_fn(&self.config.torus()?, |x| e.eval(x, 0.0)))
    }

    pub fn one_form_exprs(&self, srcs: &[String]) -> Result<OneFormField> {
        let m = self.config.dimension;
        if srcs.len() != m {
            return Err(Error::Config(format!("expected {m} component expressions")));
        }
        let exprs = srcs.iter().map(|c| Expr::parse_in(c, m, false)).collect::<Result<Vec<_>>>()?;
        Ok(OneFormField::from_fn(&self.config.torus()?, |x| exprs.iter().map(|e| e.eval(x, 0.0)).collect()))
    }

    pub fn tensor_exprs(&self, rows: &[Vec<String>]) -> Result<TensorField> {
        let m = self.config.dimension;
        if rows.len() != m || rows.iter().any(|r| r.len() != m) {
            return Err(Error::Config(format!("expected a {m}×{m} matrix of expressions")));
        }
        let exprs = rows
            .iter()
            .flatten()
            .map(|c| Expr::parse_in(c, m, false))
            .collect::<Result<Vec<_>>>()?;
        Ok(TensorField::from_fn(&self.config.torus()?, |x| {
            DMatrix::from_row_iterator(m, m, exprs.iter().map(|e| e.eval(x, 0.0)))
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "dimension": 2, "signature": [2, 0], "grid": [16, 16],
        "metric": {"kind": "conformal", "factor": "0.1*sin(x1)"},
        "twist": [0.5, 0],
        "spinors": [{"kind": "plane-wave", "momentum": [0.5, 1], "amplitude": [[1, 0], [0, 0.5]]}],
        "potential": {"kind": "expression", "components": ["cos(x2)", "0"]},
        "params": {"lambda": [0.5], "q": [1.0]},
        "options": {"count": 8, "target_metric": {"kind": "constant", "matrix": [[2, 0], [0, 1]]}}
    }"#;

    #[test]
    fn round_trip_is_identity() {
        let cfg = RunConfig::from_json(SAMPLE).unwrap();
        let again = RunConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash(), again.hash());
    }

    #[test]
    fn schema_violations_are_rejected() {
        assert!(RunConfig::from_json(&SAMPLE.replace("\"grid\": [16, 16]", "\"grid\": [16]")).is_err());
        assert!(RunConfig::from_json(&SAMPLE.replace("[0.5, 1]", "[1, 1]")).is_err());
        assert!(RunConfig::from_json(&SAMPLE.replace("\"count\"", "\"cuont\"")).is_err());
        assert!(RunConfig::from_json(&SAMPLE.replace("sin(x1)", "sin(x3)")).is_err());
    }

    #[test]
    fn resolver_builds_fields() {
        let cfg = RunConfig::from_json(SAMPLE).unwrap();
        let r = Resolver::new(&cfg, Path::new("."));
        let g = r.metric(&cfg.metric).unwrap();
        assert_eq!(g.signature(), (2, 0));
        let psi = r.spinors(2).unwrap();
        assert_eq!(psi.len(), 1);
        assert_eq!(r.potential().unwrap().at(0)[0], 1.0);
    }
}
