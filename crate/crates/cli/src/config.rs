//! The TOML experiment document.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use kirk_iter::operators::{corpus, Operator};
use kirk_iter::schemes::{specialize, ClassicScheme, Family, GeneratedRule, SchemeConfig, StopRule, WeightRow, WeightSchedule};
use kirk_iter::stability::PerturbationModel;
use kirk_iter::Vector;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional; when present it must match the subcommand.
    pub action: Option<String>,
    pub operator: Option<String>,
    pub x0: Option<Vec<f64>>,
    pub tol: Option<f64>,
    pub steps: Option<usize>,
    pub stop: Option<StopRule>,
    pub seed: Option<u64>,
    /// Contraction constant for `sigma`; defaults to the operator's.
    pub a: Option<f64>,
    pub tol_eps: Option<f64>,
    pub tol_y: Option<f64>,
    pub tol_eps_converse: Option<f64>,
    pub samples: Option<usize>,
    pub max_power: Option<usize>,
    pub out: Option<PathBuf>,
    pub scheme: Option<SchemeDoc>,
    #[serde(default)]
    pub schemes: Vec<SchemeDoc>,
    pub perturbation: Option<PerturbationDoc>,
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| anyhow!("ExperimentConfig parse: {}", e.message()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml_str(&text)
    }

    pub fn check_action(&self, action: &str) -> Result<()> {
        match &self.action {
            Some(a) if a != action => bail!("ExperimentConfig action: config is for `{a}`, invoked as `{action}`"),
            _ => Ok(()),
        }
    }

    pub fn operator(&self) -> Result<Operator> {
        let id = self
            .operator
            .as_deref()
            .ok_or_else(|| anyhow!("ExperimentConfig operator: missing `operator` key"))?;
        Ok(corpus::get(id)?)
    }

    /// `x0`, checked against the operator's dimension.
    pub fn x0(&self, op: &Operator) -> Result<Vector> {
        let coords = self
            .x0
            .clone()
            .ok_or_else(|| anyhow!("ExperimentConfig x0: missing `x0` key"))?;
        let x0 = Vector::new(coords)?;
        if x0.dim() != op.dim() {
            bail!(
                "ExperimentConfig x0: dimension {} does not match operator `{}` of dimension {}",
                x0.dim(),
                op.id(),
                op.dim()
            );
        }
        Ok(x0)
    }

    pub fn scheme(&self) -> Result<SchemeConfig> {
        self.scheme
            .as_ref()
            .ok_or_else(|| anyhow!("ExperimentConfig scheme: missing `[scheme]` section"))?
            .resolve()
    }

    /// The perturbation, with a missing random seed filled from `seed`.
    pub fn perturbation(&self) -> Result<PerturbationModel> {
        let seed = self.seed.unwrap_or(0);
        let model = match self.perturbation.clone().unwrap_or(PerturbationDoc::None) {
            PerturbationDoc::None => PerturbationModel::None,
            PerturbationDoc::Decaying { c, r } => PerturbationModel::Decaying { c, r },
            PerturbationDoc::Persistent { c } => PerturbationModel::Persistent { c },
            PerturbationDoc::RandomDecaying { c, r, seed: s } => PerturbationModel::RandomDecaying {
                c,
                r,
                seed: s.unwrap_or(seed),
            },
        };
        model.validate()?;
        Ok(model)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PerturbationDoc {
    None,
    Decaying { c: f64, r: f64 },
    Persistent { c: f64 },
    RandomDecaying { c: f64, r: f64, seed: Option<u64> },
}

/// A weight schedule as written in a config: a scalar `θ` for the row
/// `(1 − θ, θ)`, a bare row, a table of rows, or a generated rule.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ScheduleDoc {
    Theta(f64),
    Row(Vec<f64>),
    Table { tabulated: Vec<Vec<f64>> },
    Rule { generated: GeneratedRule },
}

impl ScheduleDoc {
    pub fn resolve(&self) -> Result<WeightSchedule> {
        Ok(match self {
            ScheduleDoc::Theta(t) => WeightSchedule::two_point(*t)?,
            ScheduleDoc::Row(r) => WeightSchedule::constant(r.clone())?,
            ScheduleDoc::Table { tabulated } => {
                let rows = tabulated.iter().map(|r| WeightRow::new(r.clone())).collect::<Result<Vec<_>, _>>()?;
                WeightSchedule::tabulated(rows)?
            }
            ScheduleDoc::Rule { generated } => WeightSchedule::generated(generated.clone())?,
        })
    }
}

/// Either a named preset with its parameters or an explicit engine setting.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeDoc {
    /// Label used by `compare`.
    pub name: Option<String>,
    pub preset: Option<String>,
    pub lambda: Option<f64>,
    pub alpha: Option<ScheduleDoc>,
    pub beta: Option<ScheduleDoc>,
    pub gamma: Option<ScheduleDoc>,
    pub beta1: Option<ScheduleDoc>,
    pub beta2: Option<ScheduleDoc>,
    pub family: Option<Family>,
    pub powers: Option<Vec<usize>>,
    #[serde(default)]
    pub betas: Vec<ScheduleDoc>,
    pub enforce_alpha0_nonzero: Option<bool>,
}

pub const PRESETS: [&str; 11] = [
    "picard",
    "krasnoselskij",
    "mann",
    "ishikawa",
    "noor",
    "sp",
    "thianwan",
    "kirk",
    "kirk-mann",
    "kirk-ishikawa",
    "kirk-noor",
];

impl SchemeDoc {
    pub fn label(&self) -> String {
        self.name
            .clone()
            .or_else(|| self.preset.clone())
            .or_else(|| self.family.map(|f| f.to_string()))
            .unwrap_or_else(|| "scheme".into())
    }

    pub fn resolve(&self) -> Result<SchemeConfig> {
        match (&self.preset, self.family) {
            (Some(_), Some(_)) => bail!("SchemeConfig document: give either `preset` or `family`, not both"),
            (None, None) => bail!("SchemeConfig document: needs `preset` or `family`"),
            (Some(p), None) => self.resolve_preset(p),
            (None, Some(f)) => self.resolve_explicit(f),
        }
    }

    fn resolve_explicit(&self, family: Family) -> Result<SchemeConfig> {
        if self.lambda.is_some() || self.beta.is_some() || self.gamma.is_some() || self.beta1.is_some() || self.beta2.is_some() {
            bail!("SchemeConfig document: explicit schemes take `alpha` and `betas`, not preset parameters");
        }
        let alpha = self
            .alpha
            .as_ref()
            .ok_or_else(|| anyhow!("SchemeConfig document: explicit scheme needs `alpha`"))?
            .resolve()?;
        let betas = self.betas.iter().map(ScheduleDoc::resolve).collect::<Result<Vec<_>>>()?;
        let powers = match &self.powers {
            Some(p) => p.clone(),
            None => std::iter::once(&alpha).chain(&betas).map(|s| s.row_len() - 1).collect(),
        };
        let enforce = self.enforce_alpha0_nonzero.unwrap_or(true);
        Ok(SchemeConfig::with_enforcement(family, powers, alpha, betas, enforce)?)
    }

    fn resolve_preset(&self, preset: &str) -> Result<SchemeConfig> {
        if !self.betas.is_empty() || self.powers.is_some() || self.enforce_alpha0_nonzero.is_some() {
            bail!("SchemeConfig document: preset `{preset}` does not take `betas`, `powers` or `enforce_alpha0_nonzero`");
        }
        let allowed: &[&str] = match preset {
            "picard" => &[],
            "krasnoselskij" => &["lambda"],
            "mann" | "kirk-mann" | "kirk" => &["alpha"],
            "ishikawa" | "thianwan" | "kirk-ishikawa" => &["alpha", "beta"],
            "noor" | "sp" => &["alpha", "beta", "gamma"],
            "kirk-noor" => &["alpha", "beta1", "beta2"],
            other => bail!("SchemeConfig document: unknown preset `{other}` (known: {})", PRESETS.join(", ")),
        };
        let given = [
            ("lambda", self.lambda.is_some()),
            ("alpha", self.alpha.is_some()),
            ("beta", self.beta.is_some()),
            ("gamma", self.gamma.is_some()),
            ("beta1", self.beta1.is_some()),
            ("beta2", self.beta2.is_some()),
        ];
        for (key, present) in given {
            if present && !allowed.contains(&key) {
                bail!("SchemeConfig document: preset `{preset}` does not take `{key}`");
            }
            if !present && allowed.contains(&key) {
                bail!("SchemeConfig document: preset `{preset}` needs `{key}`");
            }
        }
        let s = |d: &Option<ScheduleDoc>| d.as_ref().expect("presence checked").resolve();
        let scheme = match preset {
            "picard" => ClassicScheme::Picard,
            "krasnoselskij" => ClassicScheme::Krasnoselskij { lambda: self.lambda.unwrap() },
            "mann" => ClassicScheme::Mann { alpha: s(&self.alpha)? },
            "ishikawa" => ClassicScheme::Ishikawa { alpha: s(&self.alpha)?, beta: s(&self.beta)? },
            "noor" => ClassicScheme::Noor {
                alpha: s(&self.alpha)?,
                beta: s(&self.beta)?,
                gamma: s(&self.gamma)?,
            },
            "sp" => ClassicScheme::Sp {
                alpha: s(&self.alpha)?,
                beta: s(&self.beta)?,
                gamma: s(&self.gamma)?,
            },
            "thianwan" => ClassicScheme::Thianwan { alpha: s(&self.alpha)?, beta: s(&self.beta)? },
            "kirk" => match s(&self.alpha)? {
                WeightSchedule::Constant(row) => ClassicScheme::Kirk { alpha: row },
                _ => bail!("SchemeConfig document: preset `kirk` needs a constant `alpha` row"),
            },
            "kirk-mann" => ClassicScheme::KirkMann { alpha: s(&self.alpha)? },
            "kirk-ishikawa" => ClassicScheme::KirkIshikawa { alpha: s(&self.alpha)?, beta: s(&self.beta)? },
            "kirk-noor" => ClassicScheme::KirkNoor {
                alpha: s(&self.alpha)?,
                beta1: s(&self.beta1)?,
                beta2: s(&self.beta2)?,
            },
            _ => unreachable!("preset names checked above"),
        };
        Ok(specialize(&scheme)?)
    }
}
