use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use wmsens::config::{ExperimentConfig, SensitivityDef};
use wmsens::experiments::{self, assumption_rows, ExperimentReport, RunOptions};
use wmsens::metric::{dg_certified, dg_lipschitz_defect, isometry_defect, DgTruncated};
use wmsens::report::{elements, join, Report, Section};
use wmsens::rng::domain;
use wmsens::semigroup::{Element, Semigroup};
use wmsens::sensitivity::{estimate_sensitivity_constant, null_radius_estimate, Verdict};
use wmsens::subsemigroup::{find_syndetic_witness, is_syndetic, is_thick, restrict_action, SubSemigroupSpec, VERIFICATION_BOX};
use wmsens::{Error, Result};

const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_PRECISION: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "wmsens", version, about = "Sensitivity experiments for semigroup actions on compact spaces")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// TOML config; the built-in suite config when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory [env: WMSENS_OUT, default: wmsens-out].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Main box bound; the schedule becomes [box/2, box].
    #[arg(long = "box", global = true)]
    box_bound: Option<u32>,
    #[arg(long, global = true)]
    precision_bits: Option<u32>,
    /// Exit 0 even when a verdict is inconclusive.
    #[arg(long, global = true)]
    allow_inconclusive: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Verdicts for the configured systems.
    Classify {
        #[arg(long)]
        system: Vec<String>,
    },
    /// Sensitivity estimates with every pair record.
    Sensitivity {
        #[arg(long)]
        system: Vec<String>,
    },
    /// Truncated sup-metric values and defects for sampled pairs.
    Dg {
        #[arg(long)]
        system: String,
        #[arg(long, default_value_t = 16)]
        pairs: usize,
    },
    /// Syndetic or thick certificates for kN^d or a cone in N^2.
    Subsemigroup {
        #[arg(long, value_enum)]
        kind: Largeness,
        #[arg(long)]
        k: Option<u32>,
        /// Cone rays as `a,b,c,d` for (a,b) and (c,d).
        #[arg(long)]
        cone: Option<String>,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// Explicit translates, `;`-separated, coordinates `,`-separated.
        #[arg(long)]
        translates: Option<String>,
        #[arg(long, default_value_t = 10)]
        f_bound: u32,
        /// Block sizes for the thickness check.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<u32>,
        #[arg(long)]
        p_bound: Option<u32>,
    },
    /// Restrict a system to a configured sub-semigroup and classify it.
    Restrict {
        #[arg(long)]
        sub: String,
    },
    /// A named experiment: dichotomy, factor, powers, cone or all.
    Experiment {
        name: String,
        #[arg(long)]
        k: Option<u32>,
    },
    /// Fast property checks of the pipeline.
    Selftest,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Largeness {
    Syndetic,
    Thick,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Inconclusive { .. } => EXIT_INCONCLUSIVE,
        Error::PrecisionExhausted { .. } | Error::InvalidPrecision(_) => EXIT_PRECISION,
        Error::Io(_) => 1,
        _ => EXIT_CONFIG,
    }
}

fn load_config(g: &Global) -> Result<ExperimentConfig> {
    let mut cfg = match &g.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => experiments::default_config(),
    };
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    if let Some(bits) = g.precision_bits {
        cfg.precision_bits = Some(bits);
    }
    if let Some(n) = g.box_bound {
        let schedule = if n >= 2 { vec![n / 2, n] } else { vec![n] };
        cfg.sensitivity.box_schedule = Some(schedule.clone());
        for sys in cfg.systems.values_mut() {
            if sys.sensitivity.box_schedule.is_some() {
                sys.sensitivity.box_schedule = Some(schedule.clone());
            }
        }
        let ex = &mut cfg.experiment;
        let overrides: Vec<&mut SensitivityDef> = [
            ex.dichotomy.as_mut().map(|d| &mut d.sensitivity),
            ex.factor.as_mut().map(|d| &mut d.sensitivity),
            ex.powers.as_mut().map(|d| &mut d.sensitivity),
            ex.cone.as_mut().map(|d| &mut d.sensitivity),
        ]
        .into_iter()
        .flatten()
        .collect();
        for o in overrides {
            if o.box_schedule.is_some() {
                o.box_schedule = Some(schedule.clone());
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(g: &Global, cfg: Option<&ExperimentConfig>) -> PathBuf {
    g.out
        .clone()
        .or_else(|| std::env::var_os("WMSENS_OUT").map(PathBuf::from))
        .or_else(|| cfg.and_then(|c| c.output.clone()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("wmsens-out"))
}

fn write(report: &Report, dir: &Path, stem: &str) -> Result<()> {
    let (a, b) = report.write(dir, stem)?;
    println!("wrote {} and {}", a.display(), b.display());
    Ok(())
}

fn systems_or_all(cfg: &ExperimentConfig, names: &[String]) -> Vec<String> {
    if names.is_empty() {
        cfg.systems.keys().cloned().collect()
    } else {
        names.to_vec()
    }
}

/// Verdicts of every selected system; `Ok(true)` when all are conclusive.
fn classify(g: &Global, names: &[String], include_pairs: bool, stem: &str) -> Result<bool> {
    let cfg = load_config(g)?;
    let mut report = Report::new(stem, &cfg);
    let mut ledger = Section::table("assumptions", &["system", "assumption", "status", "evidence", "value"]);
    let mut conclusive = true;
    for name in systems_or_all(&cfg, names) {
        let (action, metric) = cfg.system(&name)?;
        let sconf = cfg.sensitivity_for(&name, &SensitivityDef::default())?;
        let r = estimate_sensitivity_constant(&action, &metric, &sconf)?;
        ledger.rows.extend(assumption_rows(&action, &metric, &sconf, &r.anchors)?);
        if include_pairs {
            let x = action.sample(sconf.seed, domain::BASEPOINT, 0)?;
            let samples = cfg.sensitivity_def_for(&name, &SensitivityDef::default()).null_radius_samples();
            let radius = null_radius_estimate(&action, &metric, &x, sconf.max_box(), samples, sconf.seed, sconf.delta_resolution)?;
            report.note(&name, "null_radius", radius);
        }
        report.add_sensitivity(&name, &r, include_pairs);
        println!(
            "{name}\t{}\tdelta_hat={}\tband=[{}, {}]",
            r.verdict, r.delta_hat, r.delta_band.0, r.delta_band.1
        );
        if r.verdict == Verdict::Inconclusive {
            eprintln!("inconclusive: {name}: {}", r.diagnostics());
            conclusive = false;
        }
    }
    report.push(ledger);
    write(&report, &out_dir(g, Some(&cfg)), stem)?;
    Ok(conclusive)
}

fn dg(g: &Global, name: &str, pairs: usize) -> Result<bool> {
    let cfg = load_config(g)?;
    let (action, metric) = cfg.system(name)?;
    let sconf = cfg.sensitivity_for(name, &SensitivityDef::default())?;
    let n = sconf.max_box();
    let mut report = Report::new("dg", &cfg);
    let mut s = Section::table("dg", &["pair", "x", "y", "d", "dg", "bound", "status"]);
    let samples: Vec<_> = (0..pairs as u64)
        .map(|i| Ok((action.sample(cfg.seed, domain::MISC, 2 * i)?, action.sample(cfg.seed, domain::MISC, 2 * i + 1)?)))
        .collect::<Result<_>>()?;
    for (i, (x, y)) in samples.iter().enumerate() {
        let v = dg_certified(&action, &metric, x, y, n)?;
        s.row([
            i.to_string(),
            join(&x.approx()),
            join(&y.approx()),
            metric.dist(x, y)?.to_string(),
            v.value.to_string(),
            v.bound.to_string(),
            v.status.label().to_string(),
        ]);
    }
    report.push(s);
    let step = (n / 4).max(1);
    let inner = n - step.min(n);
    let mut k = Section::keyed("defects");
    k.kv("system", name)
        .kv("seed", cfg.seed)
        .kv("box_schedule", join(&sconf.box_schedule))
        .kv("anchors", "-")
        .kv("quantile", sconf.quantile)
        .kv("isometry_defect", isometry_defect(&action, &metric, &samples, n)?)
        .kv("dg_lipschitz_defect", dg_lipschitz_defect(&action, &metric, &samples, inner, step)?)
        .kv(
            "dg_isometry_defect",
            isometry_defect(&action, &DgTruncated::new(&action, metric.clone(), inner)?, &samples, step)?,
        );
    report.push(k);
    let mut ledger = Section::table("assumptions", &["system", "assumption", "status", "evidence", "value"]);
    ledger.rows.extend(assumption_rows(&action, &metric, &sconf, &sconf.resolve_anchors(&action)?)?);
    report.push(ledger);
    println!("{}", report.render());
    write(&report, &out_dir(g, Some(&cfg)), "dg")?;
    Ok(true)
}

fn parse_elements(text: &str) -> Result<Vec<Element>> {
    text.split(';')
        .map(|e| {
            let coords = e
                .split(',')
                .map(|c| c.trim().parse::<u32>().map_err(|_| Error::config("--translates", format!("bad coordinate `{c}`"))))
                .collect::<Result<Vec<_>>>()?;
            Element::new(&coords)
        })
        .collect()
}

fn cone_rays(text: &str) -> Result<([u32; 2], [u32; 2])> {
    let v = text
        .split(',')
        .map(|c| c.trim().parse::<u32>().map_err(|_| Error::config("--cone", format!("bad entry `{c}`"))))
        .collect::<Result<Vec<_>>>()?;
    match v[..] {
        [a, b, c, d] => Ok(([a, b], [c, d])),
        _ => Err(Error::config("--cone", "expected four entries a,b,c,d")),
    }
}

#[allow(clippy::too_many_arguments)]
fn subsemigroup(
    g: &Global,
    kind: Largeness,
    k: Option<u32>,
    cone: Option<&str>,
    dim: usize,
    translates: Option<&str>,
    f_bound: u32,
    sizes: &[u32],
    p_bound: Option<u32>,
) -> Result<bool> {
    let n = g.box_bound.unwrap_or(100);
    let (parent, spec) = match (k, cone) {
        (Some(k), None) => {
            let parent = Semigroup::full_lattice(dim)?;
            let spec = SubSemigroupSpec::scaled(&parent, k)?;
            (parent, spec)
        }
        (None, Some(text)) => {
            let (r1, r2) = cone_rays(text)?;
            let parent = Semigroup::full_lattice(2)?;
            let spec = SubSemigroupSpec::cone(&parent, r1, r2)?;
            (parent, spec)
        }
        _ => return Err(Error::config("--k", "give exactly one of --k and --cone")),
    };
    spec.verify(VERIFICATION_BOX)?;
    let cfg = ExperimentConfig {
        seed: g.seed.unwrap_or(0),
        ..ExperimentConfig::default()
    };
    let mut report = Report::new("subsemigroup", &cfg);
    let mut s = Section::keyed("certificate");
    s.kv("parent", parent.describe()).kv("subsemigroup", spec.describe()).kv("box", n);
    match kind {
        Largeness::Syndetic => match translates {
            Some(t) => {
                let cert = is_syndetic(&parent, &spec, &parse_elements(t)?, n)?;
                s.kv("translates", elements(&cert.translates))
                    .kv("holds", cert.holds)
                    .kv("uncovered", cert.uncovered.len())
                    .kv("first_uncovered", cert.uncovered.first().map(|e| e.to_string()).unwrap_or_else(|| "-".into()));
                println!("syndetic at Box({n}) with F = {{{}}}: {}", elements(&cert.translates), cert.holds);
            }
            None => {
                let search = find_syndetic_witness(&parent, &spec, f_bound, n)?;
                let w = search.witness.as_deref().map(elements).unwrap_or_else(|| "none".into());
                s.kv("translate_bound", search.f_bound)
                    .kv("search", search.method.label())
                    .kv("witness", &w)
                    .kv("uncoverable", search.uncoverable);
                println!("syndetic witness at Box({n}) with translates in Box({f_bound}): {w}");
            }
        },
        Largeness::Thick => {
            let sizes = if sizes.is_empty() { vec![n] } else { sizes.to_vec() };
            let cert = is_thick(&parent, &spec, &sizes, p_bound)?;
            s.kv("search_bound", cert.p_bound).kv("holds", cert.holds);
            for (m, p) in &cert.witnesses {
                let w = p.map(|e| e.to_string()).unwrap_or_else(|| "none".into());
                s.kv(&format!("witness_size_{m}"), &w);
                println!("block Box({m}) + {w}");
            }
            println!("thick up to size {}: {}", sizes.iter().max().unwrap_or(&0), cert.holds);
        }
    }
    report.push(s);
    write(&report, &out_dir(g, None), "subsemigroup")?;
    Ok(true)
}

fn restrict(g: &Global, sub: &str) -> Result<bool> {
    let cfg = load_config(g)?;
    let (action, metric, spec, gens) = cfg.subsemigroup(sub)?;
    let gens = gens.ok_or_else(|| {
        Error::config(format!("subsemigroups.{sub}.restrict_generators"), "needed: generators cannot be derived")
    })?;
    let restricted = restrict_action(&action, &spec, &gens)?;
    let mut sconf = cfg.sensitivity_for(&cfg.subsemigroups[sub].system, &SensitivityDef::default())?;
    sconf.box_schedule = experiments::fit_schedule(restricted.action(), &sconf.box_schedule)?;
    sconf.anchors = None;
    let xs: Vec<_> = (0..16).map(|i| action.sample(cfg.seed, domain::MISC, i)).collect::<Result<_>>()?;
    let mismatches = restricted.consistency_mismatches(&action, experiments::CONSISTENCY_BOX, &xs)?;
    let r = estimate_sensitivity_constant(restricted.action(), &metric, &sconf)?;
    let mut report = Report::new("restrict", &cfg);
    let mut s = Section::keyed("restriction");
    s.kv("subsemigroup", spec.describe())
        .kv("generators", elements(&gens))
        .kv("consistency_mismatches", mismatches);
    report.push(s);
    let mut ledger = Section::table("assumptions", &["system", "assumption", "status", "evidence", "value"]);
    ledger.rows.extend(assumption_rows(restricted.action(), &metric, &sconf, &r.anchors)?);
    report.push(ledger);
    report.add_sensitivity(sub, &r, false);
    write(&report, &out_dir(g, Some(&cfg)), "restrict")?;
    println!("{}\t{}\tdelta_hat={}", restricted.action().name(), r.verdict, r.delta_hat);
    if mismatches > 0 {
        return Err(Error::Inconclusive {
            system: restricted.action().name().to_string(),
            diagnostics: format!("{mismatches} restricted evaluations disagree with the parent"),
        });
    }
    if r.verdict == Verdict::Inconclusive {
        eprintln!("inconclusive: {}", r.diagnostics());
        return Ok(false);
    }
    Ok(true)
}

fn experiment(g: &Global, name: &str, k: Option<u32>) -> Result<bool> {
    let cfg = load_config(g)?;
    let names: Vec<&str> = if name == "all" {
        experiments::EXPERIMENTS.to_vec()
    } else {
        vec![name]
    };
    let options = RunOptions {
        allow_inconclusive: true,
        include_pairs: false,
    };
    let dir = out_dir(g, Some(&cfg));
    let mut conclusive = true;
    for n in names {
        let reports: Vec<ExperimentReport> = experiments::run_named(n, &cfg, k, options)?;
        for r in reports {
            write(&r.document, &dir, &r.name)?;
            for o in &r.outcomes {
                let check = match o.matches_expectation() {
                    Some(true) => "as expected",
                    Some(false) => "UNEXPECTED",
                    None => "",
                };
                println!(
                    "{}\t{}\t{}\tdelta_hat={}\t{check}",
                    r.name, o.role, o.report.verdict, o.report.delta_hat
                );
            }
            if let Err(e) = r.ensure_conclusive(false) {
                eprintln!("{e}");
                conclusive = false;
            }
        }
    }
    Ok(conclusive)
}

fn run(cli: &Cli) -> Result<bool> {
    if let Some(t) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::config("--threads", e.to_string()))?;
    }
    let g = &cli.global;
    match &cli.command {
        Command::Classify { system } => classify(g, system, false, "classify"),
        Command::Sensitivity { system } => classify(g, system, true, "sensitivity"),
        Command::Dg { system, pairs } => dg(g, system, *pairs),
        Command::Subsemigroup {
            kind,
            k,
            cone,
            dim,
            translates,
            f_bound,
            sizes,
            p_bound,
        } => subsemigroup(g, *kind, *k, cone.as_deref(), *dim, translates.as_deref(), *f_bound, sizes, *p_bound),
        Command::Restrict { sub } => restrict(g, sub),
        Command::Experiment { name, k } => experiment(g, name, *k),
        Command::Selftest => {
            let r = wmsens::selftest::run_selftest(g.seed.unwrap_or(0));
            for c in &r.checks {
                println!("{}\t{}\t{}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if r.all_passed() {
                Ok(true)
            } else {
                Err(Error::Io("selftest failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) if cli.global.allow_inconclusive => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_INCONCLUSIVE),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
