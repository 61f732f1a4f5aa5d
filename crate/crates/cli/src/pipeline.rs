//! Runs the requested analyses in dependency order and assembles the report.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use subeq_core::bunching::{
    bunching_margin, burnside_irreducibility, equivariance_defect, holonomy, lyapunov_spectrum, typicality_report,
};
use subeq_core::mixing::{k_scan, vwb_scan, Partition, TestSet};
use subeq_core::potential::check_submultiplicativity;
use subeq_core::thermo::{gibbs_constant, gibbs_weights, lps_check, pressure_estimate, qm_search, PerronData};
use subeq_core::Matrix;

use crate::config::{Analysis, System, SystemConfig};
use crate::error::CliError;
use crate::io::{weights_table, write_table, Table};
use crate::model::ModelSpec;
use crate::report::write_json;

/// Depth of the pressure estimate used when an analysis needs `P` and the
/// config requests none.
pub const IMPLICIT_PRESSURE_N: usize = 10;

/// Results of analyses that later ones depend on.
#[derive(Debug, Default)]
pub struct Context {
    pressure: Option<(f64, &'static str)>,
}

impl Context {
    fn pressure(&mut self, system: &System) -> subeq_core::Result<f64> {
        if let Some((p, _)) = self.pressure {
            return Ok(p);
        }
        let p = pressure_estimate(&system.potential, IMPLICIT_PRESSURE_N)?.extrapolated;
        self.pressure = Some((p, "implicit"));
        Ok(p)
    }
}

fn value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn pressure_table(r: &subeq_core::thermo::PressureReport) -> Table {
    let mut contents = String::from("n,log_z,estimate\n");
    for (i, (z, p)) in r.log_z.iter().zip(&r.estimates).enumerate() {
        contents.push_str(&format!("{},{},{}\n", i + 1, crate::report::format_f64(*z), crate::report::format_f64(*p)));
    }
    Table { file: "pressure.csv".into(), contents }
}

fn model_weights(
    model: &ModelSpec,
    system: &System,
    ctx: &mut Context,
    level: usize,
) -> subeq_core::Result<subeq_core::thermo::CylinderWeights> {
    let pressure = if *model == ModelSpec::Gibbs { ctx.pressure(system)? } else { 0.0 };
    model.weights(&system.potential, level, pressure)
}

fn partition(system: &System, window: Option<(i64, i64)>) -> subeq_core::Result<Partition> {
    let (a, b) = window.unwrap_or((0, 1));
    Partition::cylinders(system.cocycle.sft(), a, b)
}

/// One analysis: its JSON result and any CSV tables.
pub fn run_analysis(system: &System, analysis: &Analysis, ctx: &mut Context) -> subeq_core::Result<(Value, Vec<Table>)> {
    let pot = &system.potential;
    let coc = &system.cocycle;
    Ok(match analysis {
        Analysis::Pressure { n_max } => {
            let r = pressure_estimate(pot, *n_max)?;
            if ctx.pressure.is_none_or(|(_, src)| src == "implicit") {
                ctx.pressure = Some((r.extrapolated, "pressure"));
            }
            (value(&r), vec![pressure_table(&r)])
        }
        Analysis::Gibbs { n, pressure } => {
            let p = match pressure {
                Some(p) => *p,
                None => ctx.pressure(system)?,
            };
            let r = gibbs_weights(pot, *n, p, true)?;
            let file = format!("gibbs_n{n}.csv");
            let summary = json!({
                "n": r.n,
                "pressure": r.pressure,
                "log_normalizer": r.log_normalizer,
                "gibbs_constant": r.gibbs_constant,
                "defects": r.weights.defects(),
                "table": file,
            });
            (summary, vec![weights_table(&file, &r.weights)])
        }
        Analysis::Qm { n, k_max } => (value(&qm_search(pot, *n, *k_max)?), vec![]),
        Analysis::Lps { n, model, gibbs_constant: explicit } => {
            let w2 = model_weights(model, system, ctx, 2 * n)?;
            let c = match (explicit, model) {
                (Some(c), _) => *c,
                (None, ModelSpec::Parry) => PerronData::of(coc.sft())?.parry_gibbs_constant(),
                (None, _) => gibbs_constant(&w2, pot, ctx.pressure(system)?)?,
            };
            (value(&lps_check(&w2, None, None, c)?), vec![])
        }
        Analysis::Submult { n_max } => {
            let audit = check_submultiplicativity(pot, *n_max)?;
            let mut v = value(&audit);
            v["passed"] = json!(audit.passed());
            (v, vec![])
        }
        Analysis::Bunching { mode } => (value(&bunching_margin(coc, *mode)), vec![]),
        Analysis::Holonomy { x, y, side, n } => {
            let h = holonomy(coc, x, y, *side, *n)?;
            let defect = equivariance_defect(coc, x, y, *side, *n)?;
            let mut v = value(&h);
            v["equivariance_defect"] = json!(defect);
            (v, vec![])
        }
        Analysis::Typicality { p, bridge, n } => (value(&typicality_report(coc, p, bridge, *n)?), vec![]),
        Analysis::Irreducibility {} => {
            let gens: Vec<Matrix> = coc.table().values().cloned().collect();
            (value(&burnside_irreducibility(&gens)?), vec![])
        }
        Analysis::Lyapunov { n, model } => {
            let w = model_weights(model, system, ctx, n + coc.radius())?;
            (value(&lyapunov_spectrum(coc, &w, *n)?), vec![])
        }
        Analysis::Kscan { model, level, m1, m2, eps, partition: window } => {
            let xi = partition(system, *window)?;
            let w = model_weights(model, system, ctx, *level)?;
            (value(&k_scan(&w, &xi, &TestSet::all_atoms(&xi), *m1, *m2, *eps)?), vec![])
        }
        Analysis::Vwbscan { model, level, n, m1, m2, eps, partition: window } => {
            let xi = partition(system, *window)?;
            let w = model_weights(model, system, ctx, *level)?;
            (value(&vwb_scan(&w, &xi, *n, *m1, *m2, *eps)?), vec![])
        }
    })
}

/// Everything a run produces, held in memory until persisted.
#[derive(Debug)]
pub struct RunReport {
    pub report: Value,
    pub timings: Value,
    pub tables: Vec<Table>,
    pub failure: Option<CliError>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        self.failure.as_ref().map_or(0, CliError::exit_code)
    }

    /// Writes `report.json`, `timings.json` and the CSV tables.
    pub fn persist(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir)?;
        write_json(&self.report, &dir.join("report.json"))?;
        write_json(&self.timings, &dir.join("timings.json"))?;
        for t in &self.tables {
            write_table(dir, t)?;
        }
        Ok(())
    }
}

pub fn label(index: usize, analysis: &Analysis) -> String {
    format!("{}#{index}", analysis.kind())
}

/// Validates the whole config first; a config error produces no report.
pub fn run_pipeline(config: &SystemConfig) -> Result<RunReport, CliError> {
    let system = config.validate()?;
    let mut order: Vec<(usize, &Analysis)> = config.analyses.iter().enumerate().collect();
    order.sort_by_key(|(_, a)| a.stage());

    let start = Instant::now();
    let mut ctx = Context::default();
    let mut results = Vec::new();
    let mut timings = Vec::new();
    let mut tables = Vec::new();
    let mut failure = None;
    let mut last_done: Option<String> = None;
    for (index, analysis) in order {
        let t0 = Instant::now();
        let outcome = run_analysis(&system, analysis, &mut ctx);
        timings.push(json!({"analysis": label(index, analysis), "seconds": t0.elapsed().as_secs_f64()}));
        match outcome {
            Ok((result, new_tables)) => {
                let files: Vec<&str> = new_tables.iter().map(|t| t.file.as_str()).collect();
                results.push(json!({
                    "analysis": label(index, analysis),
                    "params": value(analysis),
                    "result": result,
                    "tables": files,
                }));
                tables.extend(new_tables);
                last_done = Some(label(index, analysis));
            }
            Err(source) => {
                log::error!("{} failed: {source}", label(index, analysis));
                failure = Some(CliError::Numeric { analysis: label(index, analysis), source });
                break;
            }
        }
    }

    let mut report = json!({
        "tool": "subeq",
        "version": env!("CARGO_PKG_VERSION"),
        "name": config.name,
        "config_hash": config.hash(),
        "seed": config.seed,
        "potential": config.potential.to_string(),
        "pressure_source": ctx.pressure.map(|(_, src)| src),
        "results": results,
    });
    if let Some(CliError::Numeric { analysis, source }) = &failure {
        report["failed_after"] = json!(last_done);
        report["failure"] = json!({"analysis": analysis, "error": source.to_string()});
    }
    let timings = json!({"total_seconds": start.elapsed().as_secs_f64(), "analyses": timings});
    Ok(RunReport { report, timings, tables, failure })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(analyses: &str) -> SystemConfig {
        SystemConfig::from_json(&format!(
            r#"{{"adjacency": [[1, 1], [1, 1]],
                "cocycle": {{"d": 1, "k": 0, "alpha": 1.0,
                    "entries": [{{"window": "0", "matrix": [[1.0]]}}, {{"window": "1", "matrix": [[2.0]]}}]}},
                "analyses": {analyses}}}"#
        ))
        .unwrap()
    }

    #[test]
    fn dependency_order_and_tables() {
        let c = config(r#"[{"kind": "gibbs", "n": 4}, {"kind": "pressure", "n_max": 6}]"#);
        let r = run_pipeline(&c).unwrap();
        assert_eq!(r.exit_code(), 0);
        let results = r.report["results"].as_array().unwrap();
        assert_eq!(results[0]["analysis"], "pressure#1");
        assert_eq!(results[1]["analysis"], "gibbs#0");
        assert_eq!(r.report["pressure_source"], "pressure");
        let p = results[1]["result"]["pressure"].as_f64().unwrap();
        assert!((p - 3f64.ln()).abs() < 1e-12);
        assert_eq!(r.tables.len(), 2);
    }

    #[test]
    fn numeric_failure_is_marked() {
        let c = config(
            r#"[{"kind": "pressure", "n_max": 4},
                {"kind": "holonomy", "x": "0/1/0", "y": "1/1/1", "side": "s", "n": 5}]"#,
        );
        let r = run_pipeline(&c).unwrap();
        assert_eq!(r.exit_code(), 3);
        assert_eq!(r.report["failed_after"], "pressure#0");
        assert_eq!(r.report["failure"]["analysis"], "holonomy#1");
        assert_eq!(r.report["results"].as_array().unwrap().len(), 1);
    }

    #[test]
    fn config_error_has_no_report() {
        let c = config(r#"[{"kind": "qm", "n": 0, "k_max": 1}]"#);
        assert_eq!(run_pipeline(&c).unwrap_err().exit_code(), 2);
    }
}
