//! Bundled reference tables. These are recorded measurements, shown as
//! data and never as results of this crate.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::formats::csv_float;

const TABLE1: &str = include_str!("../fixtures/table1.json");

pub const NAMES: [&str; 1] = ["table1"];

#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct FixtureRow {
    pub gate: String,
    pub alpha_pre: f64,
    pub beta_pre: f64,
    pub f_expt: f64,
    #[serde(default)]
    pub alpha_cre: Option<f64>,
    #[serde(default)]
    pub beta_cre: Option<f64>,
    #[serde(default)]
    pub alpha_pre_prime: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct Ideal {
    pub alpha_pre: f64,
    pub beta_pre: f64,
    pub f_threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub title: String,
    pub provenance: String,
    pub columns: Vec<String>,
    pub rows: Vec<FixtureRow>,
    pub ideal: Ideal,
}

pub fn load(name: &str) -> Result<Fixture> {
    let text = match name {
        "table1" => TABLE1,
        _ => {
            return Err(Error::InvalidParameter(format!(
                "unknown fixture {name:?} (available: {})",
                NAMES.join(", ")
            )))
        }
    };
    serde_json::from_str(text).map_err(|e| Error::Format(format!("fixture {name}: {e}")))
}

impl Fixture {
    pub fn row(&self, gate: &str) -> Option<&FixtureRow> {
        self.rows.iter().find(|r| r.gate == gate)
    }

    /// Plain-text table with the provenance line first.
    pub fn render(&self) -> String {
        let mut out = format!("# {}\n# provenance: {}\n", self.title, self.provenance);
        out.push_str(&format!("{:<10}", "measure"));
        for r in &self.rows {
            out.push_str(&format!("{:>8}", r.gate));
        }
        out.push('\n');
        let cols: [(&str, fn(&FixtureRow) -> f64); 3] = [
            ("alpha_pre", |r| r.alpha_pre),
            ("beta_pre", |r| r.beta_pre),
            ("f_expt", |r| r.f_expt),
        ];
        for (name, get) in cols {
            out.push_str(&format!("{name:<10}"));
            for r in &self.rows {
                out.push_str(&format!("{:>8.3}", get(r)));
            }
            out.push('\n');
        }
        let extras: Vec<String> = self
            .rows
            .iter()
            .filter_map(|r| {
                let (a, b, p) = (r.alpha_cre?, r.beta_cre?, r.alpha_pre_prime?);
                Some(format!(
                    "# {}: alpha_cre={} beta_cre={} alpha_pre_prime={}",
                    r.gate,
                    csv_float(a),
                    csv_float(b),
                    csv_float(p)
                ))
            })
            .collect();
        for e in extras {
            out.push_str(&e);
            out.push('\n');
        }
        out.push_str(&format!(
            "# ideal gates: alpha_pre={} beta_pre={} f_threshold={}\n",
            csv_float(self.ideal.alpha_pre),
            csv_float(self.ideal.beta_pre),
            csv_float(self.ideal.f_threshold)
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table1_rows() {
        let t = load("table1").unwrap();
        assert_eq!(t.rows.len(), 7);
        let i = t.row("I").unwrap();
        assert_eq!((i.alpha_pre, i.beta_pre, i.f_expt), (0.939, 0.918, 0.959));
        let c = t.row("CNOT").unwrap();
        assert_eq!((c.alpha_pre, c.beta_pre, c.f_expt), (0.678, 0.674, 0.757));
        assert_eq!(c.alpha_cre, Some(0.6745));
        assert!(t.row("I").unwrap().alpha_cre.is_none());
    }

    #[test]
    fn render_labels_the_data() {
        let s = load("table1").unwrap().render();
        assert!(s.contains("provenance: published experimental values"));
        assert!(s.contains("   0.678"));
        assert!(s
            .lines()
            .any(|l| l.starts_with("f_expt") && l.contains("0.959")));
    }

    #[test]
    fn unknown_fixture() {
        assert!(matches!(load("table2"), Err(Error::InvalidParameter(_))));
    }
}
