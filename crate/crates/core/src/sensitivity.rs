//! Orbit-separation estimators, the sensitivity constant and the verdict.
//!
//! For a pair `(x, y)` the separation over a tail window is
//! `S(h, n) = max { d(T_g x, T_g y) : g in Box(n), h <= g, g != 0 }` and the
//! order-limsup is approximated by `min_h S(h, n_k)` over a cofinal anchor
//! schedule. "Almost every y" becomes a low quantile over sampled companions.

use rayon::prelude::*;

use crate::action::{GeneratorMap, Point, ReturnRecord, SemigroupAction, StateSpace};
use crate::error::{Error, Result};
use crate::fixed::Fixed;
use crate::metric::{isometry_defect, DgTruncated, Metric, MetricSpec};
use crate::rng::{domain, pair_index};
use crate::semigroup::Element;

/// Share of pairs that must carry a plateau flag for a sensitive verdict.
pub const PLATEAU_SHARE: f64 = 0.95;

/// Isometry defects up to this size count as isometric.
pub const ISOMETRY_TOLERANCE: f64 = 1e-9;

/// Largest fraction of samples allowed inside the null radius.
pub const NULL_FRACTION: f64 = 1e-3;

/// At most this many anchors (they are tracked in a bit mask).
pub const MAX_ANCHORS: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct SensitivityConfig {
    /// Strictly increasing box bounds; the last one is the main window.
    pub box_schedule: Vec<u32>,
    pub n_x: usize,
    pub n_y: usize,
    pub quantile: f64,
    /// Depth of the default cofinal anchor schedule.
    pub anchor_depth: usize,
    /// Explicit anchors replacing the default schedule.
    pub anchors: Option<Vec<Element>>,
    pub seed: u64,
    pub delta_resolution: f64,
    pub plateau_tolerance: f64,
    pub defect_pairs: usize,
    pub rigidity_samples: usize,
    pub rigidity_tolerance: f64,
}

impl Default for SensitivityConfig {
    fn default() -> Self {
        SensitivityConfig {
            box_schedule: vec![50, 100],
            n_x: 50,
            n_y: 400,
            quantile: 0.05,
            anchor_depth: 5,
            anchors: None,
            seed: 0,
            delta_resolution: 1.0 / 64.0,
            plateau_tolerance: 1.0 / 16.0,
            defect_pairs: 64,
            rigidity_samples: 32,
            rigidity_tolerance: 0.02,
        }
    }
}

impl SensitivityConfig {
    pub fn validate(&self) -> Result<()> {
        if self.box_schedule.is_empty() {
            return Err(Error::config("box_schedule", "must contain at least one bound"));
        }
        if self.box_schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("box_schedule", "must be strictly increasing"));
        }
        if !(self.quantile > 0.0 && self.quantile < 1.0) {
            return Err(Error::config("quantile", "must lie strictly between 0 and 1"));
        }
        if self.n_x == 0 || self.n_y == 0 {
            return Err(Error::config("n_x", "sample counts must be positive"));
        }
        if self.anchor_depth == 0 || self.anchor_depth > MAX_ANCHORS {
            return Err(Error::config("anchor_depth", format!("must lie in 1..={MAX_ANCHORS}")));
        }
        if let Some(a) = &self.anchors {
            if a.is_empty() || a.len() > MAX_ANCHORS {
                return Err(Error::config("anchors", format!("need 1..={MAX_ANCHORS} anchors")));
            }
        }
        if !(self.delta_resolution > 0.0) {
            return Err(Error::config("delta_resolution", "must be positive"));
        }
        if !(self.plateau_tolerance >= 0.0) {
            return Err(Error::config("plateau_tolerance", "must be nonnegative"));
        }
        if self.rigidity_samples == 0 || self.defect_pairs == 0 {
            return Err(Error::config("rigidity_samples", "probe sample counts must be positive"));
        }
        Ok(())
    }

    pub fn max_box(&self) -> u32 {
        *self.box_schedule.last().expect("validated nonempty")
    }

    /// The anchors actually used: the explicit list or `cofinal_schedule(depth)`.
    pub fn resolve_anchors(&self, action: &SemigroupAction) -> Result<Vec<Element>> {
        let anchors = match &self.anchors {
            Some(a) => a.clone(),
            None => action.semigroup().cofinal_schedule(self.anchor_depth)?,
        };
        for a in &anchors {
            if !action.semigroup().contains(a) {
                return Err(Error::NotMember {
                    element: a.to_string(),
                    semigroup: action.semigroup().describe(),
                });
            }
        }
        Ok(anchors)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    SensitiveEvidence,
    IsometryEvidence,
    Inconclusive,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::SensitiveEvidence => "sensitive-evidence",
            Verdict::IsometryEvidence => "isometry-evidence",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Nonzero members of the largest window with their transforms, and for
/// each element the set of anchors it dominates.
struct Window<'a> {
    action: &'a SemigroupAction,
    transforms: Vec<GeneratorMap>,
    anchor_mask: Vec<u64>,
    max_coord: Vec<u32>,
    bounds: Vec<u32>,
    anchors: usize,
}

impl<'a> Window<'a> {
    fn new(action: &'a SemigroupAction, anchors: &[Element], bounds: &[u32]) -> Result<Self> {
        let n = *bounds.last().expect("nonempty bounds");
        action.check_budget(n)?;
        let sg = action.semigroup();
        let mut transforms = Vec::new();
        let mut anchor_mask = Vec::new();
        let mut max_coord = Vec::new();
        let mut seen = vec![false; anchors.len()];
        for g in sg.enumerate_in_box(n) {
            if g.is_zero() {
                continue;
            }
            let mut mask = 0u64;
            for (a, h) in anchors.iter().enumerate() {
                if sg.leq(h, &g) {
                    mask |= 1 << a;
                    seen[a] = true;
                }
            }
            transforms.push(action.transform(&g)?);
            anchor_mask.push(mask);
            max_coord.push(g.max_coord());
        }
        if let Some(a) = seen.iter().position(|s| !s) {
            return Err(Error::EmptyTail {
                anchor: anchors[a].to_string(),
                bound: n,
            });
        }
        Ok(Window {
            action,
            transforms,
            anchor_mask,
            max_coord,
            bounds: bounds.to_vec(),
            anchors: anchors.len(),
        })
    }

    /// `sep[a][b] = S(anchor a, bound b)` and `all[b] = S(0, bound b)`.
    fn separations(&self, metric: &MetricSpec, x: &Point, y: &Point) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        let nb = self.bounds.len();
        let mut sep = vec![vec![0.0f64; nb]; self.anchors];
        let mut all = vec![0.0f64; nb];
        for (i, t) in self.transforms.iter().enumerate() {
            let d = metric.dist(&t.apply(x)?, &t.apply(y)?)?;
            let first = self.bounds.iter().position(|&b| self.max_coord[i] <= b).unwrap_or(nb);
            for b in first..nb {
                if d > all[b] {
                    all[b] = d;
                }
                let mut mask = self.anchor_mask[i];
                while mask != 0 {
                    let a = mask.trailing_zeros() as usize;
                    if d > sep[a][b] {
                        sep[a][b] = d;
                    }
                    mask &= mask - 1;
                }
            }
        }
        Ok((sep, all))
    }

    fn limsup(&self, metric: &MetricSpec, x: &Point, y: &Point, tolerance: f64) -> Result<Limsup> {
        let (sep, all) = self.separations(metric, x, y)?;
        let k = self.bounds.len() - 1;
        let inf_at = |b: usize| sep.iter().map(|row| row[b]).fold(f64::INFINITY, f64::min);
        let value = inf_at(k);
        let mut stable = true;
        if k >= 1 {
            stable &= (value - inf_at(k - 1)).abs() <= tolerance;
        }
        if self.anchors >= 2 {
            stable &= (sep[self.anchors - 1][k] - sep[self.anchors - 2][k]).abs() <= tolerance;
        }
        Ok(Limsup {
            value,
            exists_form: all[k],
            plateaued: stable || value >= metric.diameter(),
        })
    }

    fn action(&self) -> &SemigroupAction {
        self.action
    }
}

/// `max { d(T_g x, T_g y) : g in tail_in_box(g0, n), g != 0 }`.
pub fn separation(
    action: &SemigroupAction,
    metric: &MetricSpec,
    x: &Point,
    y: &Point,
    n: u32,
    g0: &Element,
) -> Result<f64> {
    if !action.semigroup().contains(g0) {
        return Err(Error::NotMember {
            element: g0.to_string(),
            semigroup: action.semigroup().describe(),
        });
    }
    let w = Window::new(action, std::slice::from_ref(g0), &[n])?;
    Ok(w.separations(metric, x, y)?.0[0][0])
}

/// The order-limsup estimate of one pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Limsup {
    /// `min over anchors of S(h, n_k)`.
    pub value: f64,
    /// `S(0, n_k)`: the "some nonzero g separates" form.
    pub exists_form: f64,
    /// Stable within tolerance across the last two anchors and the last
    /// two box bounds, or equal to the diameter.
    pub plateaued: bool,
}

pub fn limsup_separation(
    action: &SemigroupAction,
    metric: &MetricSpec,
    x: &Point,
    y: &Point,
    config: &SensitivityConfig,
) -> Result<Limsup> {
    config.validate()?;
    let anchors = config.resolve_anchors(action)?;
    Window::new(action, &anchors, &config.box_schedule)?.limsup(metric, x, y, config.plateau_tolerance)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairRecord {
    pub basepoint: usize,
    pub companion: usize,
    pub limsup: Limsup,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BasepointSummary {
    pub index: usize,
    pub point: Vec<f64>,
    /// The quantile of the companion limsups.
    pub score: f64,
    pub score_low: f64,
    pub score_high: f64,
    pub exists_score: f64,
    pub min: f64,
    pub median: f64,
    pub max: f64,
    pub plateau_fraction: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RigidityEvidence {
    pub records: Vec<ReturnRecord>,
    /// Smallest sampled sup-displacement over the tail of the last anchor.
    pub tail_minimum: f64,
    pub tail_argmin: Option<Element>,
    pub rigid: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SensitivityReport {
    pub system: String,
    pub metric: String,
    pub sampling: String,
    pub config: SensitivityConfig,
    pub anchors: Vec<Element>,
    pub pairs: Vec<PairRecord>,
    pub basepoints: Vec<BasepointSummary>,
    pub delta_hat: f64,
    /// Two-standard-deviation order-statistic band for `delta_hat`.
    pub delta_band: (f64, f64),
    /// The same estimator applied to the "some nonzero g" form.
    pub delta_hat_exists_form: f64,
    /// Largest gap between the two forms over all pairs.
    pub max_form_gap: f64,
    pub plateau_fraction: f64,
    pub isometry_defect: f64,
    pub rigidity: RigidityEvidence,
    pub verdict: Verdict,
}

impl SensitivityReport {
    pub fn diagnostics(&self) -> String {
        format!(
            "delta_hat={} (resolution {}), plateau_fraction={} (need {}), isometry_defect={}, rigid={} (tail minimum {})",
            self.delta_hat,
            self.config.delta_resolution,
            self.plateau_fraction,
            PLATEAU_SHARE,
            self.isometry_defect,
            self.rigidity.rigid,
            self.rigidity.tail_minimum
        )
    }
}

/// Order-statistic index of the `q`-quantile of `m` values.
fn quantile_index(m: usize, q: f64) -> usize {
    ((q * m as f64).ceil() as usize).clamp(1, m) - 1
}

fn quantile_band(m: usize, q: f64) -> (usize, usize) {
    let centre = q * m as f64;
    let spread = 2.0 * (m as f64 * q * (1.0 - q)).sqrt();
    let lo = ((centre - spread).floor() as i64).clamp(1, m as i64) as usize - 1;
    let hi = ((centre + spread).ceil() as i64).clamp(1, m as i64) as usize - 1;
    (lo, hi)
}

fn summarize(index: usize, point: &Point, records: &[PairRecord], q: f64) -> BasepointSummary {
    let mut v: Vec<f64> = records.iter().map(|r| r.limsup.value).collect();
    v.sort_by(f64::total_cmp);
    let mut e: Vec<f64> = records.iter().map(|r| r.limsup.exists_form).collect();
    e.sort_by(f64::total_cmp);
    let m = v.len();
    let (lo, hi) = quantile_band(m, q);
    let plateaued = records.iter().filter(|r| r.limsup.plateaued).count();
    BasepointSummary {
        index,
        point: point.approx(),
        score: v[quantile_index(m, q)],
        score_low: v[lo],
        score_high: v[hi],
        exists_score: e[quantile_index(m, q)],
        min: v[0],
        median: v[m / 2],
        max: v[m - 1],
        plateau_fraction: plateaued as f64 / m as f64,
    }
}

/// Sampled sup-displacements over `Box(n)`: the return-time records and
/// the best return inside the tail of `anchor`.
pub fn rigidity_evidence(
    action: &SemigroupAction,
    metric: &MetricSpec,
    anchor: &Element,
    n: u32,
    sample_count: usize,
    seed: u64,
    tolerance: f64,
) -> Result<RigidityEvidence> {
    let xs: Vec<Point> = (0..sample_count as u64)
        .map(|i| action.sample(seed, domain::RIGIDITY, i))
        .collect::<Result<_>>()?;
    let sg = action.semigroup();
    let elements: Vec<Element> = sg.enumerate_in_box(n).into_iter().filter(|g| !g.is_zero()).collect();
    let displacements: Vec<f64> = elements
        .par_iter()
        .map(|g| {
            let t = action.transform(g)?;
            let mut worst = 0.0f64;
            for x in &xs {
                worst = worst.max(metric.dist(&t.apply(x)?, x)?);
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    let mut records = Vec::new();
    let mut best = f64::INFINITY;
    let mut tail_minimum = f64::INFINITY;
    let mut tail_argmin = None;
    for (g, &d) in elements.iter().zip(&displacements) {
        if d < best {
            best = d;
            records.push(ReturnRecord {
                element: *g,
                displacement: d,
            });
        }
        if sg.leq(anchor, g) && d < tail_minimum {
            tail_minimum = d;
            tail_argmin = Some(*g);
        }
    }
    Ok(RigidityEvidence {
        records,
        tail_minimum,
        tail_argmin,
        rigid: tail_minimum <= tolerance,
    })
}

fn verdict_for(config: &SensitivityConfig, delta_hat: f64, plateau: f64, defect: f64, rigid: bool) -> Verdict {
    if defect <= ISOMETRY_TOLERANCE {
        // the quantile proxy is positive for any isometry, so it never counts as sensitivity
        if rigid {
            Verdict::IsometryEvidence
        } else {
            Verdict::Inconclusive
        }
    } else if delta_hat >= config.delta_resolution && plateau >= PLATEAU_SHARE {
        Verdict::SensitiveEvidence
    } else {
        Verdict::Inconclusive
    }
}

fn run_estimator(
    action: &SemigroupAction,
    metric: &MetricSpec,
    config: &SensitivityConfig,
    sampling: &str,
    basepoints: Vec<Point>,
    companion: impl Fn(usize, usize) -> Result<Point> + Sync,
    n_y: usize,
) -> Result<SensitivityReport> {
    config.validate()?;
    if !metric.compatible(action.space()) {
        return Err(Error::SpaceMismatch(format!(
            "metric {} on {}",
            metric.describe(),
            action.space().describe()
        )));
    }
    let anchors = config.resolve_anchors(action)?;
    let window = Window::new(action, &anchors, &config.box_schedule)?;
    let n_x = basepoints.len();
    let pairs: Vec<PairRecord> = (0..n_x * n_y)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / n_y, k % n_y);
            let y = companion(i, j)?;
            Ok(PairRecord {
                basepoint: i,
                companion: j,
                limsup: window.limsup(metric, &basepoints[i], &y, config.plateau_tolerance)?,
            })
        })
        .collect::<Result<_>>()?;
    let basepoint_summaries: Vec<BasepointSummary> = (0..n_x)
        .map(|i| summarize(i, &basepoints[i], &pairs[i * n_y..(i + 1) * n_y], config.quantile))
        .collect();
    let min_of = |f: fn(&BasepointSummary) -> f64| basepoint_summaries.iter().map(f).fold(f64::INFINITY, f64::min);
    let delta_hat = min_of(|s| s.score);
    let delta_band = (min_of(|s| s.score_low), min_of(|s| s.score_high));
    let delta_hat_exists_form = min_of(|s| s.exists_score);
    let max_form_gap = pairs
        .iter()
        .map(|p| p.limsup.exists_form - p.limsup.value)
        .fold(0.0, f64::max);
    let plateau_fraction = pairs.iter().filter(|p| p.limsup.plateaued).count() as f64 / pairs.len() as f64;

    let defect_pairs: Vec<(Point, Point)> = (0..config.defect_pairs as u64)
        .map(|i| {
            Ok((
                action.sample(config.seed, domain::DEFECT, 2 * i)?,
                action.sample(config.seed, domain::DEFECT, 2 * i + 1)?,
            ))
        })
        .collect::<Result<_>>()?;
    let defect = isometry_defect(window.action(), metric, &defect_pairs, config.max_box())?;
    let rigidity = rigidity_evidence(
        action,
        metric,
        anchors.last().expect("nonempty anchors"),
        config.max_box(),
        config.rigidity_samples,
        config.seed,
        config.rigidity_tolerance,
    )?;
    let verdict = verdict_for(config, delta_hat, plateau_fraction, defect, rigidity.rigid);
    Ok(SensitivityReport {
        system: action.name().to_string(),
        metric: metric.describe(),
        sampling: sampling.to_string(),
        config: config.clone(),
        anchors,
        pairs,
        basepoints: basepoint_summaries,
        delta_hat,
        delta_band,
        delta_hat_exists_form,
        max_form_gap,
        plateau_fraction,
        isometry_defect: defect,
        rigidity,
        verdict,
    })
}

/// Monte-Carlo estimate of the sensitivity constant: `n_x` basepoints, each
/// against `n_y` companions, per-basepoint quantile, minimum over basepoints.
pub fn estimate_sensitivity_constant(
    action: &SemigroupAction,
    metric: &MetricSpec,
    config: &SensitivityConfig,
) -> Result<SensitivityReport> {
    config.validate()?;
    let basepoints: Vec<Point> = (0..config.n_x as u64)
        .map(|i| action.sample(config.seed, domain::BASEPOINT, i))
        .collect::<Result<_>>()?;
    let seed = config.seed;
    run_estimator(
        action,
        metric,
        config,
        "monte-carlo",
        basepoints,
        |i, j| action.sample(seed, domain::COMPANION, pair_index(i, j)),
        config.n_y,
    )
}

/// Replaces the first `depth` digits of `word` by the binary digits of `prefix`.
fn with_prefix(word: &Fixed, prefix: u64, depth: u32) -> Result<Fixed> {
    let digits = (0..word.bits()).map(|i| {
        if i < depth {
            (prefix >> (depth - 1 - i)) & 1 == 1
        } else {
            word.bit(i)
        }
    });
    Fixed::from_bits(word.bits(), digits)
}

fn cylinder_point(action: &SemigroupAction, seed: u64, dom: u64, index: u64, prefix: u64, depth: u32) -> Result<Point> {
    match action.sample(seed, dom, index)? {
        Point::Shift { word, .. } => Ok(Point::sequence(with_prefix(&word, prefix, depth)?)),
        other => Err(Error::SpaceMismatch(format!("cylinder enumeration needs a shift point, got {other:?}"))),
    }
}

/// The estimator with sampling replaced by enumeration of every depth-`depth`
/// cylinder, for basepoints and companions alike. Digits beyond the
/// cylinder prefix are drawn from the measure. Shift spaces only.
pub fn estimate_on_cylinders(
    action: &SemigroupAction,
    metric: &MetricSpec,
    config: &SensitivityConfig,
    depth: u32,
) -> Result<SensitivityReport> {
    if !matches!(action.space(), StateSpace::Shift { .. }) {
        return Err(Error::SpaceMismatch(format!(
            "cylinder enumeration needs a shift space, got {}",
            action.space().describe()
        )));
    }
    if depth == 0 || depth > 12 {
        return Err(Error::config("depth", "cylinder depth must lie in 1..=12"));
    }
    let count = 1usize << depth;
    let basepoints: Vec<Point> = (0..count as u64)
        .map(|c| cylinder_point(action, config.seed, domain::BASEPOINT, c, c, depth))
        .collect::<Result<_>>()?;
    let seed = config.seed;
    run_estimator(
        action,
        metric,
        config,
        &format!("cylinders(depth={depth})"),
        basepoints,
        |i, j| cylinder_point(action, seed, domain::COMPANION, pair_index(i, j), j as u64, depth),
        count,
    )
}

/// Largest `eps` on the resolution grid such that at most a `1e-3` share of
/// sampled `y` has `d_G^n(x, y) < eps`; a lower estimate of the null radius.
pub fn null_radius_estimate(
    action: &SemigroupAction,
    metric: &MetricSpec,
    x: &Point,
    n: u32,
    sample_count: usize,
    seed: u64,
    resolution: f64,
) -> Result<f64> {
    if sample_count == 0 || !(resolution > 0.0) {
        return Err(Error::config("sample_count", "need samples and a positive resolution"));
    }
    let dg = DgTruncated::new(action, metric.clone(), n)?;
    let mut d: Vec<f64> = (0..sample_count as u64)
        .into_par_iter()
        .map(|i| dg.distance(x, &action.sample(seed, domain::NULL_RADIUS, i)?))
        .collect::<Result<_>>()?;
    d.sort_by(f64::total_cmp);
    let allowed = (NULL_FRACTION * sample_count as f64).floor() as usize;
    // #{d < eps} <= allowed  iff  eps <= d[allowed]
    let limit = d.get(allowed).copied().unwrap_or(metric.diameter()).min(metric.diameter());
    Ok((limit / resolution).floor() * resolution)
}

pub fn classify(action: &SemigroupAction, metric: &MetricSpec, config: &SensitivityConfig) -> Result<Verdict> {
    Ok(estimate_sensitivity_constant(action, metric, config)?.verdict)
}
