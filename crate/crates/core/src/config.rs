//! TOML experiment configuration.
//!
//! ```toml
//! seed = 7
//! precision_bits = 256
//!
//! [sensitivity]
//! box_schedule = [50, 100]
//! n_x = 50
//! n_y = 400
//!
//! [systems.rotation]
//! semigroup = { kind = "full_lattice", dim = 1 }
//! factors = [{ space = "circle", maps = [{ multiplier = 1, rotation = "0.4142135623" }] }]
//! ```
//!
//! A system has one factor, or two factors forming a product space. Each
//! factor lists one map per semigroup generator. The effective config (after
//! command-line overrides) is re-serialized canonically and hashed.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::action::{GeneratorMap, MeasureSpec, SemigroupAction, StateSpace, DEFAULT_PRECISION_BITS};
use crate::error::{Error, Result};
use crate::fixed::{self, Fixed};
use crate::metric::MetricSpec;
use crate::semigroup::{Element, Semigroup};
use crate::sensitivity::SensitivityConfig;
use crate::subsemigroup::SubSemigroupSpec;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision_bits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default)]
    pub sensitivity: SensitivityDef,
    #[serde(default)]
    pub systems: BTreeMap<String, SystemDef>,
    #[serde(default)]
    pub subsemigroups: BTreeMap<String, SubDef>,
    #[serde(default)]
    pub experiment: ExperimentsDef,
}

/// Overrides of the sensitivity defaults; absent fields keep their default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensitivityDef {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_schedule: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_x: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_y: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantile: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor_depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchors: Option<Vec<Vec<u32>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_resolution: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plateau_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defect_pairs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rigidity_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rigidity_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub null_radius_samples: Option<usize>,
}

impl SensitivityDef {
    pub fn is_empty(&self) -> bool {
        *self == SensitivityDef::default()
    }

    /// `self` with the fields of `over` taking precedence.
    pub fn merged(&self, over: &SensitivityDef) -> SensitivityDef {
        macro_rules! pick {
            ($($f:ident),*) => { SensitivityDef { $($f: over.$f.clone().or_else(|| self.$f.clone())),* } };
        }
        pick!(
            box_schedule,
            n_x,
            n_y,
            quantile,
            anchor_depth,
            anchors,
            delta_resolution,
            plateau_tolerance,
            defect_pairs,
            rigidity_samples,
            rigidity_tolerance,
            null_radius_samples
        )
    }

    pub fn build(&self, seed: u64) -> Result<SensitivityConfig> {
        let d = SensitivityConfig::default();
        let anchors = match &self.anchors {
            Some(list) => Some(
                list.iter()
                    .map(|a| Element::new(a).map_err(|e| Error::config("sensitivity.anchors", e.to_string())))
                    .collect::<Result<Vec<_>>>()?,
            ),
            None => None,
        };
        let cfg = SensitivityConfig {
            box_schedule: self.box_schedule.clone().unwrap_or(d.box_schedule),
            n_x: self.n_x.unwrap_or(d.n_x),
            n_y: self.n_y.unwrap_or(d.n_y),
            quantile: self.quantile.unwrap_or(d.quantile),
            anchor_depth: self.anchor_depth.unwrap_or(d.anchor_depth),
            anchors,
            seed,
            delta_resolution: self.delta_resolution.unwrap_or(d.delta_resolution),
            plateau_tolerance: self.plateau_tolerance.unwrap_or(d.plateau_tolerance),
            defect_pairs: self.defect_pairs.unwrap_or(d.defect_pairs),
            rigidity_samples: self.rigidity_samples.unwrap_or(d.rigidity_samples),
            rigidity_tolerance: self.rigidity_tolerance.unwrap_or(d.rigidity_tolerance),
        };
        cfg.validate().map_err(|e| match e {
            Error::Config { field, message } => Error::config(format!("sensitivity.{field}"), message),
            other => other,
        })?;
        Ok(cfg)
    }

    pub fn null_radius_samples(&self) -> usize {
        self.null_radius_samples.unwrap_or(1000)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemigroupDef {
    /// `full_lattice`, `scaled_lattice`, `generated` or `cone`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<Vec<u32>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rays: Option<[[u32; 2]; 2]>,
}

fn elements(field: &str, list: &[Vec<u32>]) -> Result<Vec<Element>> {
    list.iter()
        .map(|v| Element::new(v).map_err(|e| Error::config(field, e.to_string())))
        .collect()
}

impl SemigroupDef {
    pub fn build(&self, field: &str) -> Result<Semigroup> {
        let wrap = |e: Error| Error::config(field, e.to_string());
        let need = |name: &str| Error::config(format!("{field}.{name}"), format!("required for kind `{}`", self.kind));
        match self.kind.as_str() {
            "full_lattice" => Semigroup::full_lattice(self.dim.unwrap_or(1)).map_err(wrap),
            "scaled_lattice" => {
                Semigroup::scaled_lattice(self.dim.unwrap_or(1), self.k.ok_or_else(|| need("k"))?).map_err(wrap)
            }
            "generated" => {
                let gens = self.generators.as_ref().ok_or_else(|| need("generators"))?;
                Semigroup::generated(elements(&format!("{field}.generators"), gens)?).map_err(wrap)
            }
            "cone" => {
                let r = self.rays.ok_or_else(|| need("rays"))?;
                Semigroup::cone(r[0], r[1]).map_err(wrap)
            }
            other => Err(Error::config(
                format!("{field}.kind"),
                format!("unknown semigroup kind `{other}` (expected full_lattice, scaled_lattice, generated or cone)"),
            )),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDef {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplier: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multipliers: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotations: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorDef {
    /// `circle`, `torus` or `shift`.
    pub space: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bernoulli: Option<f64>,
    pub maps: Vec<MapDef>,
}

impl FactorDef {
    fn build(&self, field: &str, generators: usize, bits: u32) -> Result<(StateSpace, MeasureSpec, Vec<GeneratorMap>)> {
        let wrap = |f: &str, e: Error| Error::config(format!("{field}.{f}"), e.to_string());
        if self.maps.len() != generators {
            return Err(Error::config(
                format!("{field}.maps"),
                format!("need one map per semigroup generator: {generators} expected, {} given", self.maps.len()),
            ));
        }
        match self.space.as_str() {
            "circle" | "torus" => {
                let dim = if self.space == "circle" { 1 } else { self.dim.unwrap_or(2) };
                let space = StateSpace::torus(dim, bits).map_err(|e| wrap("dim", e))?;
                if self.bernoulli.is_some() {
                    return Err(Error::config(format!("{field}.bernoulli"), "only shift factors take a Bernoulli parameter"));
                }
                let maps = self
                    .maps
                    .iter()
                    .enumerate()
                    .map(|(i, m)| {
                        let mf = format!("{field}.maps[{i}]");
                        if m.steps.is_some() {
                            return Err(Error::config(format!("{mf}.steps"), "torus maps take multipliers and rotations"));
                        }
                        let qs = match (&m.multiplier, &m.multipliers) {
                            (Some(q), None) => vec![*q; dim],
                            (None, Some(qs)) => qs.clone(),
                            (None, None) => vec![1; dim],
                            _ => return Err(Error::config(format!("{mf}.multipliers"), "give multiplier or multipliers, not both")),
                        };
                        let rots = match (&m.rotation, &m.rotations) {
                            (Some(r), None) => vec![r.clone(); dim],
                            (None, Some(rs)) => rs.clone(),
                            (None, None) => vec!["0".to_string(); dim],
                            _ => return Err(Error::config(format!("{mf}.rotations"), "give rotation or rotations, not both")),
                        };
                        if qs.len() != dim || rots.len() != dim {
                            return Err(Error::config(mf, format!("need {dim} multipliers and rotations")));
                        }
                        let coords = qs
                            .iter()
                            .zip(&rots)
                            .map(|(&q, r)| {
                                if q == 0 {
                                    return Err(Error::config(format!("{mf}.multiplier"), "multipliers must be >= 1"));
                                }
                                let rot = fixed::parse_fraction(r, bits)
                                    .map_err(|_| Error::config(format!("{mf}.rotation"), format!("cannot parse `{r}`")))?;
                                Ok((q, rot))
                            })
                            .collect::<Result<Vec<(u64, Fixed)>>>()?;
                        GeneratorMap::torus(&coords).map_err(|e| wrap(&format!("maps[{i}]"), e))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((space, MeasureSpec::Haar, maps))
            }
            "shift" => {
                let space = StateSpace::shift(bits).map_err(|e| wrap("space", e))?;
                let p = self.bernoulli.unwrap_or(0.5);
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::config(format!("{field}.bernoulli"), "must lie strictly between 0 and 1"));
                }
                let maps = self
                    .maps
                    .iter()
                    .enumerate()
                    .map(|(i, m)| {
                        if m.multiplier.is_some() || m.multipliers.is_some() || m.rotation.is_some() || m.rotations.is_some() {
                            return Err(Error::config(format!("{field}.maps[{i}]"), "shift maps take only `steps`"));
                        }
                        Ok(GeneratorMap::shift(m.steps.unwrap_or(1)))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((space, MeasureSpec::Bernoulli(p), maps))
            }
            other => Err(Error::config(
                format!("{field}.space"),
                format!("unknown space `{other}` (expected circle, torus or shift)"),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDef {
    pub semigroup: SemigroupDef,
    pub factors: Vec<FactorDef>,
    /// `default`, `arc`, `shift` or `max`; the default follows the space.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<String>,
    /// Overrides of the global sensitivity section for this system.
    #[serde(default, skip_serializing_if = "SensitivityDef::is_empty")]
    pub sensitivity: SensitivityDef,
}

impl SystemDef {
    pub fn build(&self, name: &str, bits: u32) -> Result<(SemigroupAction, MetricSpec)> {
        let field = format!("systems.{name}");
        let sg = self.semigroup.build(&format!("{field}.semigroup"))?;
        let d = sg.dim();
        let parts = self
            .factors
            .iter()
            .enumerate()
            .map(|(i, f)| f.build(&format!("{field}.factors[{i}]"), d, bits))
            .collect::<Result<Vec<_>>>()?;
        let (space, measure, maps) = match parts.len() {
            1 => parts.into_iter().next().expect("one factor"),
            2 => {
                let mut it = parts.into_iter();
                let (sa, ma, ga) = it.next().expect("two factors");
                let (sb, mb, gb) = it.next().expect("two factors");
                let maps = ga.into_iter().zip(gb).map(|(a, b)| GeneratorMap::pair(a, b)).collect();
                (
                    StateSpace::product(sa, sb),
                    MeasureSpec::Product(Box::new(ma), Box::new(mb)),
                    maps,
                )
            }
            n => {
                return Err(Error::config(
                    format!("{field}.factors"),
                    format!("need one or two factors, {n} given"),
                ))
            }
        };
        let metric = match self.metric.as_deref().unwrap_or("default") {
            "default" | "max" => MetricSpec::default_for(&space),
            "arc" => MetricSpec::Arc,
            "shift" => MetricSpec::Shift,
            other => {
                return Err(Error::config(
                    format!("{field}.metric"),
                    format!("unknown metric `{other}` (expected default, arc, shift or max)"),
                ))
            }
        };
        if !metric.compatible(&space) {
            return Err(Error::config(
                format!("{field}.metric"),
                format!("metric does not fit the space {}", space.describe()),
            ));
        }
        let action = SemigroupAction::new(name, sg, maps, space, measure).map_err(|e| match e {
            Error::NonCommuting(m) => Error::config(format!("{field}.factors"), format!("generator maps do not commute: {m}")),
            other => other,
        })?;
        Ok((action, metric))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubDef {
    /// The system whose semigroup is the parent.
    pub system: String,
    /// `scaled`, `generated` or `cone`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<Vec<u32>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rays: Option<[[u32; 2]; 2]>,
    /// Generators used for restriction when they cannot be derived.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restrict_generators: Option<Vec<Vec<u32>>>,
}

impl SubDef {
    pub fn build(&self, name: &str, parent: &Semigroup) -> Result<(SubSemigroupSpec, Option<Vec<Element>>)> {
        let field = format!("subsemigroups.{name}");
        let wrap = |e: Error| Error::config(field.clone(), e.to_string());
        let spec = match self.kind.as_str() {
            "scaled" => SubSemigroupSpec::scaled(parent, self.k.ok_or_else(|| Error::config(format!("{field}.k"), "required"))?)
                .map_err(wrap)?,
            "generated" => {
                let gens = self
                    .generators
                    .as_ref()
                    .ok_or_else(|| Error::config(format!("{field}.generators"), "required"))?;
                SubSemigroupSpec::generated(parent, elements(&format!("{field}.generators"), gens)?).map_err(wrap)?
            }
            "cone" => {
                let r = self.rays.ok_or_else(|| Error::config(format!("{field}.rays"), "required"))?;
                SubSemigroupSpec::cone(parent, r[0], r[1]).map_err(wrap)?
            }
            other => {
                return Err(Error::config(
                    format!("{field}.kind"),
                    format!("unknown kind `{other}` (expected scaled, generated or cone)"),
                ))
            }
        };
        let gens = match &self.restrict_generators {
            Some(list) => Some(elements(&format!("{field}.restrict_generators"), list)?),
            None => spec.natural_generators(),
        };
        Ok((spec, gens))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentsDef {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dichotomy: Option<DichotomyDef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor: Option<FactorExperimentDef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub powers: Option<PowersDef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone: Option<ConeDef>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DichotomyDef {
    pub isometric: Vec<String>,
    pub sensitive: Vec<String>,
    #[serde(default)]
    pub sensitivity: SensitivityDef,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorExperimentDef {
    pub system: String,
    /// Index (1 or 2) of the factor expected to be isometric.
    #[serde(default = "default_factor")]
    pub isometric_factor: usize,
    #[serde(default)]
    pub sensitivity: SensitivityDef,
}

fn default_factor() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowersDef {
    pub system: String,
    pub k: Vec<u32>,
    #[serde(default)]
    pub sensitivity: SensitivityDef,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeDef {
    pub system: String,
    /// Names of entries in `[subsemigroups]` to restrict to.
    pub restrictions: Vec<String>,
    pub thick_sizes: Vec<u32>,
    #[serde(default)]
    pub sensitivity: SensitivityDef,
    /// Overrides for the restricted actions.
    #[serde(default)]
    pub restricted_sensitivity: SensitivityDef,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let message = e.message().to_string();
            let field = message
                .split('`')
                .nth(1)
                .map(|s| s.to_string())
                .unwrap_or_else(|| "config".to_string());
            Error::config(field, message)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("--config", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        fixed::check_bits(self.bits()).map_err(|e| Error::config("precision_bits", e.to_string()))?;
        self.sensitivity.build(self.seed)?;
        let known = |field: &str, name: &str| {
            if self.systems.contains_key(name) {
                Ok(())
            } else {
                Err(Error::config(field, format!("unknown system `{name}`")))
            }
        };
        for (name, sub) in &self.subsemigroups {
            known(&format!("subsemigroups.{name}.system"), &sub.system)?;
        }
        let ex = &self.experiment;
        if let Some(d) = &ex.dichotomy {
            for s in d.isometric.iter().chain(&d.sensitive) {
                known("experiment.dichotomy", s)?;
            }
        }
        if let Some(f) = &ex.factor {
            known("experiment.factor.system", &f.system)?;
            if !(1..=2).contains(&f.isometric_factor) {
                return Err(Error::config("experiment.factor.isometric_factor", "must be 1 or 2"));
            }
        }
        if let Some(p) = &ex.powers {
            known("experiment.powers.system", &p.system)?;
            if p.k.iter().any(|&k| k == 0 || k > 5) {
                return Err(Error::config("experiment.powers.k", "powers must lie in 1..=5"));
            }
        }
        if let Some(c) = &ex.cone {
            known("experiment.cone.system", &c.system)?;
            for r in &c.restrictions {
                if !self.subsemigroups.contains_key(r) {
                    return Err(Error::config("experiment.cone.restrictions", format!("unknown sub-semigroup `{r}`")));
                }
            }
        }
        Ok(())
    }

    pub fn bits(&self) -> u32 {
        self.precision_bits.unwrap_or(DEFAULT_PRECISION_BITS)
    }

    pub fn system(&self, name: &str) -> Result<(SemigroupAction, MetricSpec)> {
        self.systems
            .get(name)
            .ok_or_else(|| Error::config("--system", format!("unknown system `{name}`")))?
            .build(name, self.bits())
    }

    pub fn subsemigroup(&self, name: &str) -> Result<(SemigroupAction, MetricSpec, SubSemigroupSpec, Option<Vec<Element>>)> {
        let def = self
            .subsemigroups
            .get(name)
            .ok_or_else(|| Error::config("--sub", format!("unknown sub-semigroup `{name}`")))?;
        let (action, metric) = self.system(&def.system)?;
        let (spec, gens) = def.build(name, action.semigroup())?;
        Ok((action, metric, spec, gens))
    }

    /// The sensitivity config with `over` applied on top of the global section.
    pub fn sensitivity_with(&self, over: &SensitivityDef) -> Result<SensitivityConfig> {
        self.sensitivity.merged(over).build(self.seed)
    }

    /// Global section, then the system's overrides, then `over`.
    pub fn sensitivity_for(&self, system: &str, over: &SensitivityDef) -> Result<SensitivityConfig> {
        self.sensitivity_def_for(system, over).build(self.seed)
    }

    pub fn sensitivity_def_for(&self, system: &str, over: &SensitivityDef) -> SensitivityDef {
        let own = self.systems.get(system).map(|s| s.sensitivity.clone()).unwrap_or_default();
        self.sensitivity.merged(&own).merged(over)
    }

    /// Canonical TOML of the effective config.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ROTATION: &str = r#"
seed = 3
[systems.rotation]
semigroup = { kind = "full_lattice", dim = 1 }
factors = [{ space = "circle", maps = [{ multiplier = 1, rotation = "0.41421356" }] }]
"#;

    #[test]
    fn parses_and_builds() {
        let cfg = ExperimentConfig::parse(ROTATION).unwrap();
        let (action, metric) = cfg.system("rotation").unwrap();
        assert_eq!(metric, MetricSpec::Arc);
        assert_eq!(action.semigroup(), &Semigroup::full_lattice(1).unwrap());
        assert_eq!(cfg.sensitivity_with(&SensitivityDef::default()).unwrap().seed, 3);
    }

    #[test]
    fn hash_is_canonical() {
        let a = ExperimentConfig::parse(ROTATION).unwrap();
        let b = ExperimentConfig::parse(&ROTATION.replace("seed = 3", "seed = 3\n\n# comment")).unwrap();
        assert_eq!(a.hash(), b.hash());
        let mut c = a.clone();
        c.seed = 4;
        assert_ne!(a.hash(), c.hash());
        assert_eq!(ExperimentConfig::parse(&a.canonical()).unwrap(), a);
    }

    #[test]
    fn schema_errors_name_the_field() {
        let err = ExperimentConfig::parse(&ROTATION.replace("multiplier =", "mutliplier =")).unwrap_err();
        assert!(matches!(&err, Error::Config { field, .. } if field == "mutliplier"), "{err}");
        let err = ExperimentConfig::parse(&ROTATION.replace("full_lattice", "lattice"))
            .unwrap()
            .system("rotation")
            .unwrap_err();
        assert!(matches!(&err, Error::Config { field, .. } if field == "systems.rotation.semigroup.kind"), "{err}");
        let err = ExperimentConfig::parse(&ROTATION.replace("0.41421356", "abc"))
            .unwrap()
            .system("rotation")
            .unwrap_err();
        assert!(matches!(&err, Error::Config { field, .. } if field == "systems.rotation.factors[0].maps[0].rotation"));
        let err = ExperimentConfig::parse(&format!("precision_bits = 100\n{ROTATION}")).unwrap_err();
        assert!(matches!(&err, Error::Config { field, .. } if field == "precision_bits"));
        let err = ExperimentConfig::parse(&format!("{ROTATION}\n[sensitivity]\nquantile = 2.0\n")).unwrap_err();
        assert!(matches!(&err, Error::Config { field, .. } if field == "sensitivity.quantile"));
        let err = ExperimentConfig::parse(&format!("{ROTATION}\n[experiment.factor]\nsystem = \"nope\"\n")).unwrap_err();
        assert!(matches!(&err, Error::Config { field, .. } if field == "experiment.factor.system"));
    }

    #[test]
    fn non_commuting_maps_are_a_config_error() {
        let text = r#"
[systems.bad]
semigroup = { kind = "full_lattice", dim = 2 }
factors = [{ space = "circle", maps = [{ multiplier = 2 }, { multiplier = 1, rotation = "0.1" }] }]
"#;
        let err = ExperimentConfig::parse(text).unwrap().system("bad").unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
    }

    #[test]
    fn products_and_shifts() {
        let text = r#"
[systems.prod]
semigroup = { kind = "full_lattice" }
factors = [
  { space = "circle", maps = [{ multiplier = 2 }] },
  { space = "shift", bernoulli = 0.3, maps = [{ steps = 2 }] },
]
[systems.torus]
semigroup = { kind = "generated", generators = [[1, 0], [0, 1]] }
factors = [{ space = "torus", dim = 2, maps = [{ multipliers = [2, 1] }, { multipliers = [1, 3], rotations = ["0", "1/7"] }] }]
[subsemigroups.diag]
system = "torus"
kind = "generated"
generators = [[1, 1]]
"#;
        let cfg = ExperimentConfig::parse(text).unwrap();
        let (a, m) = cfg.system("prod").unwrap();
        assert!(a.space().is_product());
        assert_eq!(m, MetricSpec::Max(Box::new(MetricSpec::Arc), Box::new(MetricSpec::Shift)));
        assert_eq!(a.measure().describe(), "haarxbernoulli(0.3)");
        let (t, _) = cfg.system("torus").unwrap();
        assert_eq!(t.space(), &StateSpace::torus(2, 256).unwrap());
        let (_, _, spec, gens) = cfg.subsemigroup("diag").unwrap();
        assert_eq!(gens.unwrap(), vec![Element::new(&[1, 1]).unwrap()]);
        assert!(spec.contains(&Element::new(&[4, 4]).unwrap()));
    }
}
