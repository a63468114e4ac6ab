//! Output schemas.
//!
//! CSV files start with `# key=value` metadata lines (schema version,
//! artifact version, generator id, resolved config as compact JSON) followed
//! by a header row. Floats use Rust's shortest round-trip formatting. JSON
//! output carries the same metadata as top-level fields.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use crate::ensemble::EnsembleStats;
use crate::models::Trajectory;
use crate::oracle::OracleRow;
use crate::rng::RNG_ALGORITHM;

pub const SCHEMA_VERSION: u32 = 1;
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(crate::Error::Config(format!("unknown format `{other}` (csv or json)"))),
        }
    }
}

/// Run metadata embedded in every output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub schema_version: u32,
    pub artifact_version: &'static str,
    pub rng: &'static str,
    pub config: Value,
}

impl Metadata {
    pub fn new(config: &impl Serialize) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            artifact_version: ARTIFACT_VERSION,
            rng: RNG_ALGORITHM,
            config: serde_json::to_value(config).expect("configs serialize to JSON"),
        }
    }

    fn csv_preamble(&self) -> String {
        format!(
            "# schema_version={}\n# artifact_version={}\n# rng={}\n# config={}\n",
            self.schema_version, self.artifact_version, self.rng, self.config
        )
    }
}

fn push_row(out: &mut String, cells: impl IntoIterator<Item = String>) {
    let mut first = true;
    for c in cells {
        if !first {
            out.push(',');
        }
        first = false;
        out.push_str(&c);
    }
    out.push('\n');
}

pub const SIMULATE_COLUMNS: [&str; 8] = ["m", "N", "N0", "frac_isolated", "frac_isolated_of_n", "edges", "psi1", "psi2"];
pub const ENSEMBLE_COLUMNS: [&str; 8] = ["source", "m", "observable", "mean", "stderr", "n", "min", "max"];
pub const ORACLE_COLUMNS: [&str; 6] = ["m", "E_N0", "E_frac_isolated", "psi1", "psi2", "mass_error"];

/// One trajectory, one row per recorded step.
pub fn render_trajectory(traj: &Trajectory, meta: &Metadata, format: OutputFormat) -> String {
    let prefix = traj.rows.first().map_or(0, |r| r.histogram_prefix.len());
    match format {
        OutputFormat::Csv => {
            let mut out = meta.csv_preamble();
            push_row(
                &mut out,
                SIMULATE_COLUMNS
                    .iter()
                    .map(|s| s.to_string())
                    .chain((0..prefix).map(|k| format!("n_{k}"))),
            );
            for r in &traj.rows {
                push_row(
                    &mut out,
                    [
                        r.m.to_string(),
                        r.vertices.to_string(),
                        r.isolated.to_string(),
                        r.frac_isolated().to_string(),
                        r.frac_isolated_of_n().to_string(),
                        r.edges.to_string(),
                        r.psi1.to_string(),
                        r.psi2.to_string(),
                    ]
                    .into_iter()
                    .chain(r.histogram_prefix.iter().map(u64::to_string)),
                );
            }
            out
        }
        OutputFormat::Json => {
            let rows: Vec<Value> = traj
                .rows
                .iter()
                .map(|r| {
                    json!({
                        "m": r.m,
                        "N": r.vertices,
                        "N0": r.isolated,
                        "frac_isolated": r.frac_isolated(),
                        "frac_isolated_of_n": r.frac_isolated_of_n(),
                        "edges": r.edges,
                        "psi1": r.psi1,
                        "psi2": r.psi2,
                        "histogram_prefix": r.histogram_prefix,
                    })
                })
                .collect();
            json_document(meta, rows)
        }
    }
}

/// Tidy long format: one row per recorded time and observable column.
pub fn render_ensemble(stats: &EnsembleStats, meta: &Metadata, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => {
            let mut out = meta.csv_preamble();
            push_row(&mut out, ENSEMBLE_COLUMNS.iter().map(|s| s.to_string()));
            for (m, row) in stats.times.iter().zip(&stats.cells) {
                for (name, s) in stats.columns.iter().zip(row) {
                    push_row(
                        &mut out,
                        [
                            "ensemble".to_string(),
                            m.to_string(),
                            name.clone(),
                            s.mean.to_string(),
                            s.stderr.to_string(),
                            s.n.to_string(),
                            s.min.to_string(),
                            s.max.to_string(),
                        ],
                    );
                }
            }
            out
        }
        OutputFormat::Json => {
            let rows: Vec<Value> = stats
                .times
                .iter()
                .zip(&stats.cells)
                .flat_map(|(m, row)| {
                    stats.columns.iter().zip(row).map(move |(name, s)| {
                        json!({
                            "source": "ensemble",
                            "m": m,
                            "observable": name,
                            "mean": s.mean,
                            "stderr": s.stderr,
                            "n": s.n,
                            "min": s.min,
                            "max": s.max,
                        })
                    })
                })
                .collect();
            json_document(meta, rows)
        }
    }
}

/// Oracle rows in their own wide schema, or (`long = true`) in the ensemble
/// schema with `source=oracle`, zero standard error and `n = 0`.
pub fn render_oracle(rows: &[OracleRow], meta: &Metadata, format: OutputFormat, long: bool) -> String {
    let prefix = rows.first().map_or(0, |r| r.histogram_prefix.len());
    let named = |r: &OracleRow| -> Vec<(String, f64)> {
        let mut v = vec![
            ("E_N0".to_string(), r.isolated),
            ("E_frac_isolated".to_string(), r.frac_isolated),
            ("psi1".to_string(), r.psi1),
            ("psi2".to_string(), r.psi2),
            ("mass_error".to_string(), r.mass_error),
        ];
        v.extend(r.histogram_prefix.iter().enumerate().map(|(k, x)| (format!("E_n_{k}"), *x)));
        v
    };
    match (format, long) {
        (OutputFormat::Csv, false) => {
            let mut out = meta.csv_preamble();
            push_row(
                &mut out,
                ORACLE_COLUMNS
                    .iter()
                    .map(|s| s.to_string())
                    .chain((0..prefix).map(|k| format!("E_n_{k}"))),
            );
            for r in rows {
                push_row(
                    &mut out,
                    std::iter::once(r.m.to_string()).chain(named(r).into_iter().map(|(_, x)| x.to_string())),
                );
            }
            out
        }
        (OutputFormat::Csv, true) => {
            let mut out = meta.csv_preamble();
            push_row(&mut out, ENSEMBLE_COLUMNS.iter().map(|s| s.to_string()));
            for r in rows {
                for (name, x) in named(r) {
                    let v = x.to_string();
                    push_row(
                        &mut out,
                        ["oracle".into(), r.m.to_string(), name, v.clone(), "0".into(), "0".into(), v.clone(), v],
                    );
                }
            }
            out
        }
        (OutputFormat::Json, _) => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|r| {
                    let mut obj = serde_json::Map::new();
                    obj.insert("source".into(), json!("oracle"));
                    obj.insert("m".into(), json!(r.m));
                    for (name, x) in named(r) {
                        obj.insert(name, json!(x));
                    }
                    Value::Object(obj)
                })
                .collect();
            json_document(meta, rows)
        }
    }
}

/// Any serializable report wrapped with metadata.
pub fn render_json_report(meta: &Metadata, report: &impl Serialize) -> String {
    let mut doc = serde_json::to_value(meta).expect("metadata serializes");
    doc["report"] = serde_json::to_value(report).expect("reports serialize");
    let mut s = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
    s.push('\n');
    s
}

fn json_document(meta: &Metadata, rows: Vec<Value>) -> String {
    let mut doc = serde_json::to_value(meta).expect("metadata serializes");
    doc["rows"] = Value::Array(rows);
    let mut s = serde_json::to_string(&doc).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Right-aligned two-column table.
pub fn render_table(rows: &[(String, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in rows {
        let _ = writeln!(out, "{k:>width$}  {v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::InitialGraphSpec;
    use crate::models::{run_trajectory, Dynamics, ModelParams, RecordSpec};
    use crate::rng::RngStream;

    fn traj() -> Trajectory {
        run_trajectory(
            &Dynamics::ModelA(ModelParams::new(1.0, 1.0, 0.0).unwrap()),
            &InitialGraphSpec::SingleEdge,
            4,
            RngStream::new(1, 0),
            &RecordSpec::default(),
        )
        .unwrap()
    }

    #[test]
    fn csv_trajectory_layout() {
        let meta = Metadata::new(&json!({"k": 1}));
        let s = render_trajectory(&traj(), &meta, OutputFormat::Csv);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "# schema_version=1");
        assert_eq!(lines[2], format!("# rng={RNG_ALGORITHM}"));
        assert_eq!(lines[3], r#"# config={"k":1}"#);
        assert_eq!(lines[4], "m,N,N0,frac_isolated,frac_isolated_of_n,edges,psi1,psi2");
        assert_eq!(lines[5], "2,2,0,0,0,1,1,1");
        assert_eq!(lines[7], "4,4,2,0.5,0.5,1,0.5,0.5");
    }

    #[test]
    fn json_trajectory_parses() {
        let meta = Metadata::new(&json!({}));
        let s = render_trajectory(&traj(), &meta, OutputFormat::Json);
        let v: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["rows"][2]["N0"], 2);
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 123456.789] {
            assert_eq!(x.to_string().parse::<f64>().unwrap(), x);
        }
    }
}
