//! Experiment drivers: each builds its systems from an [`ExperimentConfig`],
//! runs the estimators and collects a [`Report`].

use crate::action::{factor_project, nonsingularity_proxy, orbit_tail_density, SemigroupAction};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::metric::MetricSpec;
use crate::report::{elements, Report, Section};
use crate::rng::domain;
use crate::semigroup::Element;
use crate::sensitivity::{estimate_sensitivity_constant, null_radius_estimate, SensitivityConfig, SensitivityReport, Verdict};
use crate::subsemigroup::{find_syndetic_witness, is_syndetic, is_thick, restrict_action, SubSemigroupSpec};

/// The configuration shipped with the crate.
pub const DEFAULT_CONFIG: &str = include_str!("../configs/default.toml");

pub fn default_config() -> ExperimentConfig {
    ExperimentConfig::parse(DEFAULT_CONFIG).expect("built-in config is valid")
}

/// Names accepted by [`run_named`].
pub const EXPERIMENTS: [&str; 4] = ["dichotomy", "factor", "powers", "cone"];

/// Radius of the orbit-density evidence.
pub const DENSITY_RADIUS: f64 = 0.05;

/// Samples of the measure-preservation histogram.
pub const HISTOGRAM_SAMPLES: usize = 10_000;

/// Box of the restriction consistency check, in restricted coordinates.
pub const CONSISTENCY_BOX: u32 = 6;

/// Translate bound and scale of the syndetic-witness search on cones.
pub const CONE_WITNESS_BOUND: u32 = 10;
pub const CONE_WITNESS_BOX: u32 = 100;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Keep going when a verdict is inconclusive instead of failing.
    pub allow_inconclusive: bool,
    /// Write every pair record into the report.
    pub include_pairs: bool,
}

#[derive(Clone, Debug)]
pub struct SystemOutcome {
    pub role: String,
    pub report: SensitivityReport,
    pub expected: Option<Verdict>,
}

impl SystemOutcome {
    pub fn verdict(&self) -> Verdict {
        self.report.verdict
    }

    pub fn matches_expectation(&self) -> Option<bool> {
        self.expected.map(|e| e == self.report.verdict)
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub name: String,
    pub outcomes: Vec<SystemOutcome>,
    pub document: Report,
}

impl ExperimentReport {
    fn new(name: &str, config: &ExperimentConfig) -> Self {
        let mut document = Report::new(name, config);
        document.push(Section::table(
            "assumptions",
            &["system", "assumption", "status", "evidence", "value"],
        ));
        ExperimentReport {
            name: name.to_string(),
            outcomes: Vec::new(),
            document,
        }
    }

    pub fn outcome(&self, role: &str) -> Option<&SystemOutcome> {
        self.outcomes.iter().find(|o| o.role == role)
    }

    pub fn inconclusive(&self) -> Vec<&SystemOutcome> {
        self.outcomes.iter().filter(|o| o.verdict() == Verdict::Inconclusive).collect()
    }

    /// `Err(Inconclusive)` for the first inconclusive system unless allowed.
    pub fn ensure_conclusive(&self, allow: bool) -> Result<()> {
        match self.inconclusive().first() {
            Some(o) if !allow => Err(Error::Inconclusive {
                system: o.report.system.clone(),
                diagnostics: o.report.diagnostics(),
            }),
            _ => Ok(()),
        }
    }

    fn assumptions(&mut self) -> &mut Section {
        self.document
            .sections
            .iter_mut()
            .find(|s| s.name == "assumptions")
            .expect("created in new")
    }

    /// Estimates, records and checks one system.
    fn evaluate(
        &mut self,
        role: &str,
        action: &SemigroupAction,
        metric: &MetricSpec,
        config: &SensitivityConfig,
        expected: Option<Verdict>,
        options: RunOptions,
    ) -> Result<&SystemOutcome> {
        let report = estimate_sensitivity_constant(action, metric, config)?;
        let rows = assumption_rows(action, metric, config, &report.anchors)?;
        self.assumptions().rows.extend(rows);
        self.document.add_sensitivity(role, &report, options.include_pairs);
        if let Some(e) = expected {
            self.document.note(role, "expected_verdict", e);
            self.document.note(role, "matches_expectation", e == report.verdict);
        }
        if report.verdict == Verdict::Inconclusive && !options.allow_inconclusive {
            return Err(Error::Inconclusive {
                system: report.system.clone(),
                diagnostics: report.diagnostics(),
            });
        }
        self.outcomes.push(SystemOutcome {
            role: role.to_string(),
            report,
            expected,
        });
        Ok(self.outcomes.last().expect("just pushed"))
    }
}

/// The assumption ledger of one system: what is assumed and the numerical
/// evidence collected for it.
pub fn assumption_rows(
    action: &SemigroupAction,
    metric: &MetricSpec,
    config: &SensitivityConfig,
    anchors: &[Element],
) -> Result<Vec<Vec<String>>> {
    let name = action.name().to_string();
    let x = action.sample(config.seed, domain::DENSITY, 0)?;
    let anchor = anchors.last().copied().unwrap_or_else(|| action.semigroup().zero());
    let density = orbit_tail_density(action, metric, &x, &anchor, config.max_box(), DENSITY_RADIUS)?;
    let g = action.semigroup().generators()[0];
    let hist = nonsingularity_proxy(action, &g, HISTOGRAM_SAMPLES, config.seed)?;
    Ok(vec![
        vec![
            name.clone(),
            "standard-borel".into(),
            "by-construction".into(),
            action.space().describe(),
            "-".into(),
        ],
        vec![
            name.clone(),
            "nonsingular".into(),
            if hist.passed { "proxy-passed" } else { "proxy-failed" }.into(),
            format!("histogram max_z of T_{g} over {HISTOGRAM_SAMPLES} samples"),
            hist.max_z.to_string(),
        ],
        vec![
            name.clone(),
            "conservative".into(),
            "assumed-unverified".into(),
            format!("orbit tail density from {anchor} in Box({}) at radius {DENSITY_RADIUS}", config.max_box()),
            density.to_string(),
        ],
        vec![
            name,
            "ergodic".into(),
            "assumed-unverified".into(),
            "same orbit tail density".into(),
            density.to_string(),
        ],
    ])
}

fn missing(name: &str) -> Error {
    Error::config(format!("experiment.{name}"), "section missing from the config")
}

/// Null-radius estimate at the first basepoint, added to the summary.
fn record_null_radius(
    out: &mut ExperimentReport,
    role: &str,
    action: &SemigroupAction,
    metric: &MetricSpec,
    config: &SensitivityConfig,
    samples: usize,
) -> Result<f64> {
    let x = action.sample(config.seed, domain::BASEPOINT, 0)?;
    let r = null_radius_estimate(action, metric, &x, config.max_box(), samples, config.seed, config.delta_resolution)?;
    out.document.note(role, "null_radius", r);
    Ok(r)
}

/// Isometric systems against sensitive ones, with return-time records and
/// null radii.
pub fn run_dichotomy_showcase(config: &ExperimentConfig, options: RunOptions) -> Result<ExperimentReport> {
    let def = config.experiment.dichotomy.as_ref().ok_or_else(|| missing("dichotomy"))?;
    let mut out = ExperimentReport::new("dichotomy", config);
    let plan = def
        .isometric
        .iter()
        .map(|s| (s, Verdict::IsometryEvidence))
        .chain(def.sensitive.iter().map(|s| (s, Verdict::SensitiveEvidence)));
    for (name, expected) in plan {
        let (action, metric) = config.system(name)?;
        let sconf = config.sensitivity_for(name, &def.sensitivity)?;
        let samples = config.sensitivity_def_for(name, &def.sensitivity).null_radius_samples();
        out.evaluate(name, &action, &metric, &sconf, Some(expected), options)?;
        record_null_radius(&mut out, name, &action, &metric, &sconf, samples)?;
    }
    Ok(out)
}

/// A sensitive product whose isometric factor shows that sensitivity does
/// not pass to factors.
pub fn run_factor_counterexample(config: &ExperimentConfig, options: RunOptions) -> Result<ExperimentReport> {
    let def = config.experiment.factor.as_ref().ok_or_else(|| missing("factor"))?;
    let sconf = config.sensitivity_for(&def.system, &def.sensitivity)?;
    let (product, metric) = config.system(&def.system)?;
    let mut out = ExperimentReport::new("factor", config);
    out.evaluate("product", &product, &metric, &sconf, Some(Verdict::SensitiveEvidence), options)?;
    for index in 1..=2 {
        let factor = factor_project(&product, index)?;
        let fmetric = metric
            .component(index)
            .cloned()
            .ok_or_else(|| Error::SpaceMismatch(format!("{} is not a product", def.system)))?;
        let expected = if index == def.isometric_factor {
            Verdict::IsometryEvidence
        } else {
            Verdict::SensitiveEvidence
        };
        out.evaluate(&format!("factor{index}"), &factor, &fmetric, &sconf, Some(expected), options)?;
    }
    let product_sensitive = out.outcome("product").map(|o| o.verdict()) == Some(Verdict::SensitiveEvidence);
    let iso_role = format!("factor{}", def.isometric_factor);
    let factor_isometric = out.outcome(&iso_role).map(|o| o.verdict()) == Some(Verdict::IsometryEvidence);
    let mut s = Section::keyed("factor");
    s.kv("product", &def.system)
        .kv("isometric_factor", def.isometric_factor)
        .kv("product_sensitive", product_sensitive)
        .kv("factor_isometric", factor_isometric)
        .kv("counterexample_exhibited", product_sensitive && factor_isometric);
    out.document.push(s);
    out.document.note("product", "counterexample_exhibited", product_sensitive && factor_isometric);
    Ok(out)
}

/// Largest `n <= limit` whose box fits the precision budget of `action`.
pub fn largest_fitting_box(action: &SemigroupAction, limit: u32) -> Result<u32> {
    if action.check_budget(limit).is_ok() {
        return Ok(limit);
    }
    let (mut lo, mut hi) = (0u32, limit);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if action.check_budget(mid).is_ok() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo == 0 {
        action.check_budget(1)?;
    }
    Ok(lo)
}

/// The schedule with every bound capped at the largest box `action` can
/// afford; repeated bounds are dropped.
pub fn fit_schedule(action: &SemigroupAction, schedule: &[u32]) -> Result<Vec<u32>> {
    let cap = largest_fitting_box(action, schedule.iter().copied().max().unwrap_or(1))?;
    let mut out: Vec<u32> = schedule.iter().map(|&n| n.min(cap)).collect();
    out.dedup();
    Ok(out)
}

/// Restriction of a system to `kN^d`, with the syndetic certificate
/// `F = G ∩ Box(k - 1)`.
pub fn run_powers_experiment(config: &ExperimentConfig, k: u32, options: RunOptions) -> Result<ExperimentReport> {
    let def = config.experiment.powers.as_ref().ok_or_else(|| missing("powers"))?;
    if k == 0 || k > 5 {
        return Err(Error::config("k", "powers must lie in 1..=5"));
    }
    let sconf = config.sensitivity_for(&def.system, &def.sensitivity)?;
    let (action, metric) = config.system(&def.system)?;
    let parent = action.semigroup().clone();
    let mut out = ExperimentReport::new(&format!("powers-k{k}"), config);
    out.evaluate("base", &action, &metric, &sconf, Some(Verdict::SensitiveEvidence), options)?;

    let spec = SubSemigroupSpec::scaled(&parent, k)?;
    let gens = spec
        .natural_generators()
        .ok_or_else(|| Error::NotGenerating(format!("no generators known for {}", spec.describe())))?;
    let restricted = restrict_action(&action, &spec, &gens)?;
    let rconf = SensitivityConfig {
        box_schedule: fit_schedule(restricted.action(), &sconf.box_schedule)?,
        anchors: None,
        ..sconf.clone()
    };
    let role = format!("restricted-k{k}");
    let samples: Vec<_> = (0..16).map(|i| action.sample(config.seed, domain::MISC, i)).collect::<Result<_>>()?;
    let mismatches = restricted.consistency_mismatches(&action, CONSISTENCY_BOX, &samples)?;
    out.evaluate(&role, restricted.action(), &metric, &rconf, Some(Verdict::SensitiveEvidence), options)?;

    let translates = parent.enumerate_in_box(k - 1);
    let cert = is_syndetic(&parent, &spec, &translates, sconf.max_box())?;
    let mut s = Section::keyed("powers");
    s.kv("k", k)
        .kv("subsemigroup", spec.describe())
        .kv("restricted_generators", elements(&gens))
        .kv("restricted_box_schedule", crate::report::join(&rconf.box_schedule))
        .kv("consistency_mismatches", mismatches)
        .kv("syndetic_translates", elements(&cert.translates))
        .kv("syndetic_scale", cert.scale)
        .kv("syndetic_holds", cert.holds)
        .kv("syndetic_uncovered", cert.uncovered.len());
    out.document.push(s);
    let base = out.outcome("base").map(|o| o.report.delta_hat).unwrap_or(f64::NAN);
    let sub = out.outcome(&role).map(|o| o.report.delta_hat).unwrap_or(f64::NAN);
    out.document.note(&role, "syndetic_holds", cert.holds);
    out.document.note(&role, "consistency_mismatches", mismatches);
    out.document.note(&role, "delta_hat_ratio", sub / base);
    if mismatches > 0 {
        return Err(Error::Inconclusive {
            system: restricted.action().name().to_string(),
            diagnostics: format!("{mismatches} restricted evaluations disagree with the parent action"),
        });
    }
    Ok(out)
}

/// Restrictions of a multi-parameter system to the configured
/// sub-semigroups, with thickness and syndeticity certificates.
pub fn run_cone_restriction(config: &ExperimentConfig, options: RunOptions) -> Result<ExperimentReport> {
    let def = config.experiment.cone.as_ref().ok_or_else(|| missing("cone"))?;
    let sconf = config.sensitivity_for(&def.system, &def.sensitivity)?;
    let rconf = SensitivityConfig {
        anchors: None,
        ..config.sensitivity_for(&def.system, &def.sensitivity.merged(&def.restricted_sensitivity))?
    };
    let (action, metric) = config.system(&def.system)?;
    let parent = action.semigroup().clone();
    let mut out = ExperimentReport::new("cone", config);
    out.evaluate("parent", &action, &metric, &sconf, Some(Verdict::SensitiveEvidence), options)?;
    let samples: Vec<_> = (0..16).map(|i| action.sample(config.seed, domain::MISC, i)).collect::<Result<_>>()?;

    for name in &def.restrictions {
        let sub_def = &config.subsemigroups[name];
        if sub_def.system != def.system {
            return Err(Error::config(
                format!("subsemigroups.{name}.system"),
                format!("must be `{}` to be used by the cone experiment", def.system),
            ));
        }
        let (spec, gens) = sub_def.build(name, &parent)?;
        spec.verify(crate::subsemigroup::VERIFICATION_BOX)?;
        let gens = gens.ok_or_else(|| {
            Error::config(format!("subsemigroups.{name}.restrict_generators"), "needed: generators cannot be derived")
        })?;
        let thick = is_thick(&parent, &spec, &def.thick_sizes, None)?;
        let witness = find_syndetic_witness(&parent, &spec, CONE_WITNESS_BOUND, CONE_WITNESS_BOX)?;
        let restricted = restrict_action(&action, &spec, &gens)?;
        let mismatches = restricted.consistency_mismatches(&action, CONSISTENCY_BOX, &samples)?;
        out.evaluate(name, restricted.action(), &metric, &rconf, Some(Verdict::SensitiveEvidence), options)?;

        let mut s = Section::keyed(format!("restriction {name}"));
        s.kv("subsemigroup", spec.describe())
            .kv("restricted_generators", elements(&gens))
            .kv("consistency_mismatches", mismatches)
            .kv("thick_search_bound", thick.p_bound)
            .kv("thick_holds", thick.holds)
            .kv("syndetic_translate_bound", witness.f_bound)
            .kv("syndetic_scale", witness.scale)
            .kv("syndetic_search", witness.method.label())
            .kv(
                "syndetic_witness",
                witness.witness.as_deref().map(elements).unwrap_or_else(|| "none".into()),
            )
            .kv("syndetic_uncoverable", witness.uncoverable);
        out.document.push(s);
        let mut t = Section::table(format!("thick-witnesses {name}"), &["size", "witness"]);
        for (m, p) in &thick.witnesses {
            t.row([m.to_string(), p.map(|e| e.to_string()).unwrap_or_else(|| "none".into())]);
        }
        out.document.push(t);
        out.document.note(name, "thick", thick.holds);
        out.document.note(name, "syndetic_witness_found", witness.witness.is_some());
        out.document.note(name, "consistency_mismatches", mismatches);
        if mismatches > 0 {
            return Err(Error::Inconclusive {
                system: restricted.action().name().to_string(),
                diagnostics: format!("{mismatches} restricted evaluations disagree with the parent action"),
            });
        }
    }
    Ok(out)
}

/// Runs an experiment by name; `powers` runs every configured `k`.
pub fn run_named(name: &str, config: &ExperimentConfig, k: Option<u32>, options: RunOptions) -> Result<Vec<ExperimentReport>> {
    match name {
        "dichotomy" => Ok(vec![run_dichotomy_showcase(config, options)?]),
        "factor" => Ok(vec![run_factor_counterexample(config, options)?]),
        "cone" => Ok(vec![run_cone_restriction(config, options)?]),
        "powers" => {
            let ks = match k {
                Some(k) => vec![k],
                None => config.experiment.powers.as_ref().ok_or_else(|| missing("powers"))?.k.clone(),
            };
            ks.into_iter().map(|k| run_powers_experiment(config, k, options)).collect()
        }
        other => Err(Error::config(
            "experiment",
            format!("unknown experiment `{other}` (expected one of {})", EXPERIMENTS.join(", ")),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> ExperimentConfig {
        let mut cfg = default_config();
        cfg.sensitivity.n_x = Some(8);
        cfg.sensitivity.n_y = Some(60);
        cfg.sensitivity.null_radius_samples = Some(200);
        let tt = cfg.systems.get_mut("doubling-tripling").unwrap();
        tt.sensitivity.n_x = Some(8);
        tt.sensitivity.n_y = Some(60);
        cfg
    }

    #[test]
    fn default_config_is_complete() {
        let cfg = default_config();
        for name in ["rotation", "doubling", "shift", "doubling-x-rotation", "doubling-tripling"] {
            cfg.system(name).unwrap();
        }
        assert!(cfg.experiment.dichotomy.is_some() && cfg.experiment.cone.is_some());
    }

    #[test]
    fn schedules_fit_the_budget() {
        let x8 = crate::action::catalog::circle_map(8, "0", 256).unwrap();
        assert_eq!(largest_fitting_box(&x8, 100).unwrap(), 74);
        assert_eq!(fit_schedule(&x8, &[50, 100]).unwrap(), vec![50, 74]);
        assert_eq!(fit_schedule(&x8, &[80, 100]).unwrap(), vec![74]);
        let x4 = crate::action::catalog::circle_map(4, "0", 256).unwrap();
        assert_eq!(fit_schedule(&x4, &[50, 100]).unwrap(), vec![50, 100]);
    }

    #[test]
    fn powers_with_k_one_matches_the_base() {
        let out = run_powers_experiment(&quick(), 1, RunOptions::default()).unwrap();
        let base = &out.outcome("base").unwrap().report;
        let sub = &out.outcome("restricted-k1").unwrap().report;
        assert_eq!(base.pairs, sub.pairs);
        assert_eq!(base.delta_hat, sub.delta_hat);
        assert_eq!(base.verdict, sub.verdict);
        assert_eq!(out.document.section("powers").unwrap().get("syndetic_translates"), Some("0"));
    }

    #[test]
    fn quadrant_restriction_matches_the_parent() {
        let mut cfg = quick();
        cfg.subsemigroups.insert(
            "quadrant".into(),
            crate::config::SubDef {
                system: "doubling-tripling".into(),
                kind: "cone".into(),
                k: None,
                generators: None,
                rays: Some([[1, 0], [0, 1]]),
                restrict_generators: None,
            },
        );
        cfg.experiment.cone.as_mut().unwrap().restrictions = vec!["quadrant".into()];
        let out = run_cone_restriction(&cfg, RunOptions::default()).unwrap();
        let parent = &out.outcome("parent").unwrap().report;
        let sub = &out.outcome("quadrant").unwrap().report;
        assert_eq!(parent.pairs, sub.pairs);
        assert_eq!(parent.delta_hat, sub.delta_hat);
        assert_eq!(out.document.section("restriction quadrant").unwrap().get("thick_holds"), Some("true"));
    }

    #[test]
    fn reports_carry_required_fields() {
        let out = run_factor_counterexample(&quick(), RunOptions::default()).unwrap();
        assert!(out.document.missing_fields().is_empty(), "{:?}", out.document.missing_fields());
        let text = out.document.render();
        assert!(text.contains("\nconservative\t") || text.contains("\tconservative\t"));
    }

    #[test]
    fn missing_sections_and_names_are_config_errors() {
        let empty = ExperimentConfig::default();
        assert!(matches!(run_dichotomy_showcase(&empty, RunOptions::default()), Err(Error::Config { .. })));
        assert!(matches!(run_named("unknown", &quick(), None, RunOptions::default()), Err(Error::Config { .. })));
        assert!(matches!(run_powers_experiment(&quick(), 6, RunOptions::default()), Err(Error::Config { .. })));
    }
}
