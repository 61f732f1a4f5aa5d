//! System configuration: schema, validation and hashing.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use subeq_core::bunching::{BunchingMode, Side};
use subeq_core::potential::{PotentialKind, WordPotential};
use subeq_core::{FiniteRangeCocycle, Matrix, PointSpec, Sft, Word};

use crate::error::CliError;
use crate::model::ModelSpec;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleSpec {
    pub d: usize,
    pub k: usize,
    pub alpha: f64,
    pub entries: Vec<CocycleEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleEntry {
    pub window: Word,
    pub matrix: Vec<Vec<f64>>,
}

fn default_typicality_depth() -> usize {
    30
}

/// One requested analysis; `kind` selects the operation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Analysis {
    Pressure {
        n_max: usize,
    },
    Gibbs {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pressure: Option<f64>,
    },
    Qm {
        n: usize,
        k_max: usize,
    },
    Lps {
        n: usize,
        #[serde(default)]
        model: ModelSpec,
        /// Required for models other than `gibbs` and `parry`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gibbs_constant: Option<f64>,
    },
    Submult {
        n_max: usize,
    },
    Bunching {
        mode: BunchingMode,
    },
    Holonomy {
        x: PointSpec,
        y: PointSpec,
        side: Side,
        n: usize,
    },
    Typicality {
        p: Word,
        bridge: Word,
        #[serde(default = "default_typicality_depth")]
        n: usize,
    },
    Irreducibility {},
    Lyapunov {
        n: usize,
        #[serde(default)]
        model: ModelSpec,
    },
    Kscan {
        #[serde(default)]
        model: ModelSpec,
        level: usize,
        m1: i64,
        m2: i64,
        eps: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        partition: Option<(i64, i64)>,
    },
    Vwbscan {
        #[serde(default)]
        model: ModelSpec,
        level: usize,
        n: usize,
        m1: i64,
        m2: i64,
        eps: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        partition: Option<(i64, i64)>,
    },
}

impl Analysis {
    pub fn kind(&self) -> &'static str {
        match self {
            Analysis::Pressure { .. } => "pressure",
            Analysis::Gibbs { .. } => "gibbs",
            Analysis::Qm { .. } => "qm",
            Analysis::Lps { .. } => "lps",
            Analysis::Submult { .. } => "submult",
            Analysis::Bunching { .. } => "bunching",
            Analysis::Holonomy { .. } => "holonomy",
            Analysis::Typicality { .. } => "typicality",
            Analysis::Irreducibility {} => "irreducibility",
            Analysis::Lyapunov { .. } => "lyapunov",
            Analysis::Kscan { .. } => "kscan",
            Analysis::Vwbscan { .. } => "vwbscan",
        }
    }

    /// Pressure first, then weights-based analyses, then scans.
    pub fn stage(&self) -> u8 {
        match self {
            Analysis::Pressure { .. } => 0,
            Analysis::Gibbs { .. } => 1,
            Analysis::Qm { .. } | Analysis::Lps { .. } | Analysis::Submult { .. } => 2,
            Analysis::Bunching { .. }
            | Analysis::Holonomy { .. }
            | Analysis::Typicality { .. }
            | Analysis::Irreducibility {}
            | Analysis::Lyapunov { .. } => 3,
            Analysis::Kscan { .. } | Analysis::Vwbscan { .. } => 4,
        }
    }

    fn model(&self) -> Option<&ModelSpec> {
        match self {
            Analysis::Lps { model, .. }
            | Analysis::Lyapunov { model, .. }
            | Analysis::Kscan { model, .. }
            | Analysis::Vwbscan { model, .. } => Some(model),
            _ => None,
        }
    }

    /// Parameter ranges that can be checked without computing anything.
    pub fn validate(&self, system: &System) -> Result<(), String> {
        let positive = |name: &str, v: usize| if v == 0 { Err(format!("{name} must be at least 1")) } else { Ok(()) };
        let sft = system.cocycle.sft();
        match self {
            Analysis::Pressure { n_max } => {
                if *n_max < 2 {
                    return Err("n_max must be at least 2".into());
                }
            }
            Analysis::Gibbs { n, pressure } => {
                positive("n", *n)?;
                if pressure.is_some_and(|p| !p.is_finite()) {
                    return Err("pressure must be finite".into());
                }
            }
            Analysis::Qm { n, .. } => positive("n", *n)?,
            Analysis::Lps { n, model, gibbs_constant } => {
                positive("n", *n)?;
                let needs_constant = !matches!(model, ModelSpec::Gibbs | ModelSpec::Parry);
                match gibbs_constant {
                    None if needs_constant => return Err(format!("model {model} needs an explicit gibbs_constant")),
                    Some(c) if !(c.is_finite() && *c >= 1.0) => return Err(format!("gibbs_constant {c} must be >= 1")),
                    _ => {}
                }
            }
            Analysis::Submult { n_max } => {
                if *n_max < 2 {
                    return Err("n_max must be at least 2".into());
                }
            }
            Analysis::Bunching { .. } | Analysis::Irreducibility {} => {}
            Analysis::Holonomy { x, y, n, .. } => {
                positive("n", *n)?;
                x.check_admissible(sft).map_err(|e| e.to_string())?;
                y.check_admissible(sft).map_err(|e| e.to_string())?;
            }
            Analysis::Typicality { p, n, .. } => {
                positive("n", *n)?;
                if p.is_empty() {
                    return Err("periodic word is empty".into());
                }
            }
            Analysis::Lyapunov { n, .. } => positive("n", *n)?,
            Analysis::Kscan { level, m1, m2, eps, partition, .. }
            | Analysis::Vwbscan { level, m1, m2, eps, partition, .. } => {
                positive("level", *level)?;
                if *m1 < 1 || m2 < m1 {
                    return Err(format!("need 1 <= m1 <= m2, got m1 = {m1}, m2 = {m2}"));
                }
                if !(*eps > 0.0 && *eps < 1.0) {
                    return Err(format!("eps = {eps} outside (0, 1)"));
                }
                if let Some((a, b)) = partition {
                    if b <= a {
                        return Err(format!("empty partition window [{a}, {b})"));
                    }
                }
                let (a, b) = partition.unwrap_or((0, 1));
                let need = match self {
                    Analysis::Vwbscan { n, .. } => {
                        positive("n", *n)?;
                        (b - a + *n as i64 + m2) as usize
                    }
                    _ => (b - a + m2) as usize,
                };
                if need > *level {
                    return Err(format!("windows span {need} coordinates but level is {level}"));
                }
            }
        }
        if let Some(model) = self.model() {
            model.check_compatible(sft)?;
        }
        Ok(())
    }
}

fn default_potential() -> PotentialKind {
    PotentialKind::Norm
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(default)]
    pub name: String,
    pub adjacency: Vec<Vec<i64>>,
    pub cocycle: CocycleSpec,
    #[serde(default = "default_potential")]
    pub potential: PotentialKind,
    #[serde(default)]
    pub analyses: Vec<Analysis>,
    /// Not part of the hash.
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

/// Validated system: the cocycle and the potential built from the config.
pub struct System {
    pub cocycle: FiniteRangeCocycle,
    pub potential: WordPotential,
}

impl SystemConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// SHA-256 of the canonical serialization of every semantic field.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn build_system(&self) -> Result<System, CliError> {
        let config = |e: subeq_core::Error| CliError::Config(e.to_string());
        let sft = Sft::new(&self.adjacency).map_err(config)?;
        let spec = &self.cocycle;
        let mut table = BTreeMap::new();
        for entry in &spec.entries {
            let m = Matrix::from_rows(&entry.matrix).map_err(config)?;
            if table.insert(entry.window.clone(), m).is_some() {
                return Err(CliError::Config(format!("duplicate cocycle window {}", entry.window)));
            }
        }
        let cocycle = FiniteRangeCocycle::new(sft, spec.d, spec.k, spec.alpha, table).map_err(config)?;
        let potential = WordPotential::from_cocycle(cocycle.clone(), self.potential).map_err(config)?;
        Ok(System { cocycle, potential })
    }

    /// Builds the system and checks every analysis request.
    pub fn validate(&self) -> Result<System, CliError> {
        let system = self.build_system()?;
        for (i, a) in self.analyses.iter().enumerate() {
            a.validate(&system).map_err(|msg| CliError::Config(format!("analysis {i} ({}): {msg}", a.kind())))?;
        }
        Ok(system)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: &str = r#"{
        "adjacency": [[1, 1], [1, 0]],
        "cocycle": {"d": 1, "k": 0, "alpha": 1.0,
            "entries": [{"window": "0", "matrix": [[1.0]]}, {"window": "1", "matrix": [[1.0]]}]},
        "analyses": [{"kind": "pressure", "n_max": 8}, {"kind": "holonomy", "x": "0/1/0", "y": "0/0/0", "side": "s", "n": 5}]
    }"#;

    #[test]
    fn parses_and_validates() {
        let c = SystemConfig::from_json(GOLDEN).unwrap();
        assert_eq!(c.analyses.len(), 2);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn hash_ignores_output_dir() {
        let mut c = SystemConfig::from_json(GOLDEN).unwrap();
        let h = c.hash();
        c.output_dir = Some("elsewhere".into());
        assert_eq!(c.hash(), h);
        c.seed = 5;
        assert_ne!(c.hash(), h);
    }

    #[test]
    fn rejects_bad_requests() {
        let non_square = GOLDEN.replace("[[1, 1], [1, 0]]", "[[1, 1], [1]]");
        assert!(SystemConfig::from_json(&non_square).unwrap().validate().is_err());
        let bad_n = GOLDEN.replace("\"n_max\": 8", "\"n_max\": 1");
        assert!(SystemConfig::from_json(&bad_n).unwrap().validate().is_err());
        let unknown = GOLDEN.replace("\"pressure\"", "\"entropy\"");
        assert!(SystemConfig::from_json(&unknown).is_err());
        let inadmissible = GOLDEN.replace("0/1/0", "1/1/0");
        assert!(SystemConfig::from_json(&inadmissible).unwrap().validate().is_err());
    }
}
