//! Measure models for the weights-based analyses, written as short strings:
//! `gibbs`, `parry`, `bernoulli:0.3,0.7`, `markov:0.9,0.1;0.2,0.8`, `periodic:01`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use subeq_core::potential::WordPotential;
use subeq_core::thermo::{gibbs_weights, CylinderWeights};
use subeq_core::{Matrix, Sft, Word};

#[derive(Debug, Clone, PartialEq, Default)]
pub enum ModelSpec {
    #[default]
    Gibbs,
    Parry,
    Bernoulli(Vec<f64>),
    Markov(Vec<Vec<f64>>),
    Periodic(Word),
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::Gibbs => f.write_str("gibbs"),
            ModelSpec::Parry => f.write_str("parry"),
            ModelSpec::Bernoulli(p) => write!(f, "bernoulli:{}", join(p)),
            ModelSpec::Markov(rows) => {
                let rows: Vec<String> = rows.iter().map(|r| join(r)).collect();
                write!(f, "markov:{}", rows.join(";"))
            }
            ModelSpec::Periodic(w) => write!(f, "periodic:{w}"),
        }
    }
}

fn numbers(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad number {t:?}"))).collect()
}

impl FromStr for ModelSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (head, body) = s.split_once(':').unwrap_or((s, ""));
        match head.trim() {
            "gibbs" => Ok(ModelSpec::Gibbs),
            "parry" => Ok(ModelSpec::Parry),
            "bernoulli" => Ok(ModelSpec::Bernoulli(numbers(body)?)),
            "markov" => Ok(ModelSpec::Markov(body.split(';').map(numbers).collect::<Result<_, _>>()?)),
            "periodic" => Ok(ModelSpec::Periodic(body.parse().map_err(|e| format!("{e}"))?)),
            other => Err(format!("unknown model {other:?}")),
        }
    }
}

impl Serialize for ModelSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ModelSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}

impl ModelSpec {
    /// Support of the model must lie in the shift.
    pub fn check_compatible(&self, sft: &Sft) -> Result<(), String> {
        let q = sft.q();
        match self {
            ModelSpec::Gibbs | ModelSpec::Parry => Ok(()),
            ModelSpec::Bernoulli(p) => {
                if p.len() != q {
                    return Err(format!("bernoulli model has {} probabilities for {q} symbols", p.len()));
                }
                if !sft.is_full_shift() && p.iter().filter(|&&x| x > 0.0).count() > 1 {
                    return Err("bernoulli model charges inadmissible words".into());
                }
                Ok(())
            }
            ModelSpec::Markov(rows) => {
                if rows.len() != q || rows.iter().any(|r| r.len() != q) {
                    return Err(format!("markov model must be {q} x {q}"));
                }
                for (a, row) in rows.iter().enumerate() {
                    for (b, &p) in row.iter().enumerate() {
                        if p > 0.0 && !sft.allowed(a as u8, b as u8) {
                            return Err(format!("markov model allows forbidden transition {a} -> {b}"));
                        }
                    }
                }
                Ok(())
            }
            ModelSpec::Periodic(w) => {
                if w.is_empty() || w.iter().any(|&s| s as usize >= q) || !sft.is_cyclically_admissible(w) {
                    return Err(format!("periodic word {w} is not a cycle of the shift"));
                }
                Ok(())
            }
        }
    }

    pub fn weights(&self, pot: &WordPotential, level: usize, pressure: f64) -> subeq_core::Result<CylinderWeights> {
        match self {
            ModelSpec::Gibbs => Ok(gibbs_weights(pot, level, pressure, false)?.weights),
            ModelSpec::Parry => CylinderWeights::parry(pot.sft(), level),
            ModelSpec::Bernoulli(p) => CylinderWeights::bernoulli(p, level),
            ModelSpec::Markov(rows) => CylinderWeights::markov(&Matrix::from_rows(rows)?, level),
            ModelSpec::Periodic(w) => CylinderWeights::periodic_orbit(w, level),
        }
    }
}
