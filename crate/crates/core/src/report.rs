//! Deterministic report writer.
//!
//! A report is a sequence of `[name]` sections of tab-separated rows,
//! written to `<stem>.report.tsv`, plus a flat `<stem>.summary.tsv` with
//! one `experiment, system, quantity, value` row per headline number.
//! Nothing machine-dependent (paths, timings, thread counts) is recorded, so
//! equal configs give byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::action::PRECISION_GUARD_BITS;
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::semigroup::Element;
use crate::sensitivity::SensitivityReport;

/// Keys every report must carry, checked by [`Report::missing_fields`].
pub const REQUIRED_KEYS: [&str; 6] = ["seed", "box_schedule", "anchors", "precision_budget", "quantile", "config_hash"];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Section {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Section {
    pub fn table(name: impl Into<String>, header: &[&str]) -> Self {
        Section {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// A two-column key/value section.
    pub fn keyed(name: impl Into<String>) -> Self {
        Self::table(name, &["key", "value"])
    }

    pub fn row<I, S>(&mut self, cells: I) -> &mut Self
    where
        I: IntoIterator<Item = S>,
        S: ToString,
    {
        self.rows.push(cells.into_iter().map(|c| clean(&c.to_string())).collect());
        self
    }

    pub fn kv(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.row([key.to_string(), value.to_string()])
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.rows.iter().find(|r| r.first().map(String::as_str) == Some(key)).and_then(|r| r.get(1)).map(String::as_str)
    }
}

/// Tabs and newlines would break the format.
fn clean(s: &str) -> String {
    s.replace(['\t', '\n'], " ")
}

pub fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}

pub fn elements(items: &[Element]) -> String {
    items.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" ")
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub experiment: String,
    pub system: String,
    pub quantity: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub experiment: String,
    pub sections: Vec<Section>,
    pub summary: Vec<SummaryRow>,
}

impl Report {
    /// A report headed by the run provenance of `config`.
    pub fn new(experiment: &str, config: &ExperimentConfig) -> Self {
        let mut prov = Section::keyed("run");
        prov.kv("experiment", experiment)
            .kv("config_hash", config.hash())
            .kv("seed", config.seed)
            .kv("precision_bits", config.bits())
            .kv("precision_budget", config.bits() - PRECISION_GUARD_BITS);
        Report {
            experiment: experiment.to_string(),
            sections: vec![prov],
            summary: Vec::new(),
        }
    }

    pub fn push(&mut self, section: Section) {
        self.sections.push(section);
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn note(&mut self, system: &str, quantity: &str, value: impl ToString) {
        self.summary.push(SummaryRow {
            experiment: self.experiment.clone(),
            system: system.to_string(),
            quantity: quantity.to_string(),
            value: clean(&value.to_string()),
        });
    }

    /// Adds the estimator output for one system under `role`.
    pub fn add_sensitivity(&mut self, role: &str, r: &SensitivityReport, include_pairs: bool) {
        let c = &r.config;
        let mut s = Section::keyed(format!("system {role}"));
        s.kv("system", &r.system)
            .kv("metric", &r.metric)
            .kv("sampling", &r.sampling)
            .kv("seed", c.seed)
            .kv("box_schedule", join(&c.box_schedule))
            .kv("anchors", elements(&r.anchors))
            .kv("quantile", c.quantile)
            .kv("n_x", c.n_x)
            .kv("n_y", c.n_y)
            .kv("delta_resolution", c.delta_resolution)
            .kv("plateau_tolerance", c.plateau_tolerance)
            .kv("delta_hat", r.delta_hat)
            .kv("delta_band_low", r.delta_band.0)
            .kv("delta_band_high", r.delta_band.1)
            .kv("delta_hat_exists_form", r.delta_hat_exists_form)
            .kv("max_form_gap", r.max_form_gap)
            .kv("plateau_fraction", r.plateau_fraction)
            .kv("isometry_defect", r.isometry_defect)
            .kv("rigidity_tail_minimum", r.rigidity.tail_minimum)
            .kv(
                "rigidity_tail_argmin",
                r.rigidity.tail_argmin.map(|e| e.to_string()).unwrap_or_else(|| "-".into()),
            )
            .kv("rigid", r.rigidity.rigid)
            .kv("verdict", r.verdict);
        self.push(s);

        let mut b = Section::table(
            format!("basepoints {role}"),
            &["index", "point", "score", "score_low", "score_high", "exists_score", "min", "median", "max", "plateau_fraction"],
        );
        for p in &r.basepoints {
            b.row([
                p.index.to_string(),
                join(&p.point),
                p.score.to_string(),
                p.score_low.to_string(),
                p.score_high.to_string(),
                p.exists_score.to_string(),
                p.min.to_string(),
                p.median.to_string(),
                p.max.to_string(),
                p.plateau_fraction.to_string(),
            ]);
        }
        self.push(b);

        let mut rec = Section::table(format!("return-records {role}"), &["element", "displacement"]);
        for x in &r.rigidity.records {
            rec.row([x.element.to_string(), x.displacement.to_string()]);
        }
        self.push(rec);

        if include_pairs {
            let mut p = Section::table(format!("pairs {role}"), &["basepoint", "companion", "limsup", "exists_form", "plateaued"]);
            for x in &r.pairs {
                p.row([
                    x.basepoint.to_string(),
                    x.companion.to_string(),
                    x.limsup.value.to_string(),
                    x.limsup.exists_form.to_string(),
                    x.limsup.plateaued.to_string(),
                ]);
            }
            self.push(p);
        }

        self.note(role, "delta_hat", r.delta_hat);
        self.note(role, "delta_band_low", r.delta_band.0);
        self.note(role, "delta_band_high", r.delta_band.1);
        self.note(role, "delta_hat_exists_form", r.delta_hat_exists_form);
        self.note(role, "plateau_fraction", r.plateau_fraction);
        self.note(role, "isometry_defect", r.isometry_defect);
        self.note(role, "verdict", r.verdict);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "[{}]", s.name);
            let _ = writeln!(out, "{}", s.header.join("\t"));
            for r in &s.rows {
                let _ = writeln!(out, "{}", r.join("\t"));
            }
        }
        out
    }

    pub fn render_summary(&self) -> String {
        let mut out = String::from("experiment\tsystem\tquantity\tvalue\n");
        for r in &self.summary {
            let _ = writeln!(out, "{}\t{}\t{}\t{}", r.experiment, r.system, r.quantity, r.value);
        }
        out
    }

    /// Required keys absent from every section.
    pub fn missing_fields(&self) -> Vec<&'static str> {
        let mut missing: Vec<&'static str> = REQUIRED_KEYS
            .iter()
            .copied()
            .filter(|k| !self.sections.iter().any(|s| s.get(k).is_some()))
            .collect();
        if self.section("assumptions").is_none() {
            missing.push("assumptions");
        }
        missing
    }

    /// Writes `<dir>/<stem>.report.tsv` and `<dir>/<stem>.summary.tsv`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let report = dir.join(format!("{stem}.report.tsv"));
        let summary = dir.join(format!("{stem}.summary.tsv"));
        std::fs::write(&report, self.render())?;
        std::fs::write(&summary, self.render_summary())?;
        Ok((report, summary))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_layout() {
        let cfg = ExperimentConfig::default();
        let mut r = Report::new("demo", &cfg);
        let mut s = Section::table("t", &["a", "b"]);
        s.row(["1", "x\ty"]);
        r.push(s);
        r.note("sys", "q", 0.5);
        let text = r.render();
        assert!(text.starts_with("[run]\nkey\tvalue\nexperiment\tdemo\n"));
        assert!(text.ends_with("\n[t]\na\tb\n1\tx y\n"));
        assert_eq!(r.render_summary(), "experiment\tsystem\tquantity\tvalue\ndemo\tsys\tq\t0.5\n");
        assert_eq!(r.section("run").unwrap().get("precision_budget"), Some("224"));
        assert_eq!(r.missing_fields(), vec!["box_schedule", "anchors", "quantile", "assumptions"]);
    }

    #[test]
    fn writes_both_files() {
        let dir = tempfile::tempdir().unwrap();
        let r = Report::new("demo", &ExperimentConfig::default());
        let (a, b) = r.write(dir.path(), "demo").unwrap();
        assert_eq!(std::fs::read_to_string(a).unwrap(), r.render());
        assert_eq!(std::fs::read_to_string(b).unwrap(), r.render_summary());
    }
}
