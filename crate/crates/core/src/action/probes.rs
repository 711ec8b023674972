//! Numerical probes of an action: orbit density, rigidity, factors and a
//! histogram proxy for nonsingularity.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use super::{Point, SemigroupAction, StateSpace};
use crate::error::{Error, Result};
use crate::fixed::{self, Fixed};
use crate::metric::MetricSpec;
use crate::rng::domain;
use crate::semigroup::Element;

/// Number of points in the reference grid used by [`orbit_tail_density`].
pub const REFERENCE_GRID_POINTS: usize = 1024;

/// A grid of about `budget` points spread over the space. Torus: a
/// uniform lattice `i / r` per axis. Shift: every cylinder of the largest
/// depth that fits, with zero tails. Product: a grid per factor.
pub fn reference_grid(space: &StateSpace, budget: usize) -> Result<Vec<Point>> {
    let budget = budget.max(1);
    match space {
        StateSpace::Torus { dim, bits } => {
            let r = ((budget as f64).powf(1.0 / *dim as f64) + 1e-9).floor().max(1.0) as u64;
            let axis: Vec<Fixed> = (0..r)
                .map(|i| Fixed::from_ratio(&BigUint::from(i), &BigUint::from(r), *bits))
                .collect::<Result<_>>()?;
            let mut out = Vec::new();
            let mut idx = vec![0usize; *dim];
            loop {
                let coords: Vec<Fixed> = idx.iter().map(|&i| axis[i]).collect();
                out.push(Point::torus(&coords));
                let mut k = 0;
                while k < *dim {
                    idx[k] += 1;
                    if idx[k] < axis.len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == *dim {
                    return Ok(out);
                }
            }
        }
        StateSpace::Shift { bits } => {
            let depth = (usize::BITS - 1 - budget.leading_zeros()).min(*bits);
            (0..1u64 << depth)
                .map(|c| {
                    let digits = (0..depth).map(|i| (c >> (depth - 1 - i)) & 1 == 1);
                    Ok(Point::sequence(Fixed::from_bits(*bits, digits)?))
                })
                .collect()
        }
        StateSpace::Product(a, b) => {
            let per = (budget as f64).sqrt().floor() as usize;
            let ga = reference_grid(a, per)?;
            let gb = reference_grid(b, per)?;
            let mut out = Vec::with_capacity(ga.len() * gb.len());
            for p in &ga {
                for q in &gb {
                    out.push(Point::pair(p.clone(), q.clone()));
                }
            }
            Ok(out)
        }
    }
}

/// Fraction of the reference grid lying within `eps` of the orbit tail
/// `{T_h x : h in tail_in_box(g, n)}`.
pub fn orbit_tail_density(
    action: &SemigroupAction,
    metric: &MetricSpec,
    x: &Point,
    g: &Element,
    n: u32,
    eps: f64,
) -> Result<f64> {
    if eps <= 0.0 {
        return Err(Error::config("eps", "coverage radius must be positive"));
    }
    let tail = action.semigroup().tail_in_box(g, n);
    let orbit: Vec<Point> = tail
        .iter()
        .map(|h| action.apply(h, x))
        .collect::<Result<_>>()?;
    let grid = reference_grid(action.space(), REFERENCE_GRID_POINTS)?;
    let mut covered = 0usize;
    for p in &grid {
        for o in &orbit {
            if metric.dist(p, o)? < eps {
                covered += 1;
                break;
            }
        }
    }
    Ok(covered as f64 / grid.len() as f64)
}

/// Sampled points shared by the rigidity probes.
fn rigidity_samples(action: &SemigroupAction, count: usize, seed: u64) -> Result<Vec<Point>> {
    (0..count as u64)
        .map(|i| action.sample(seed, domain::RIGIDITY, i))
        .collect()
}

fn max_displacement(action: &SemigroupAction, metric: &MetricSpec, h: &Element, xs: &[Point]) -> Result<f64> {
    let t = action.transform(h)?;
    let mut worst = 0.0f64;
    for x in xs {
        worst = worst.max(metric.dist(&t.apply(x)?, x)?);
    }
    Ok(worst)
}

/// `max over sampled x of d(T_h x, x)` for every `h` of the schedule.
pub fn uniform_rigidity_probe(
    action: &SemigroupAction,
    metric: &MetricSpec,
    schedule: &[Element],
    sample_count: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if schedule.is_empty() {
        return Err(Error::config("schedule", "rigidity schedule must be nonempty"));
    }
    let xs = rigidity_samples(action, sample_count, seed)?;
    schedule
        .iter()
        .map(|h| max_displacement(action, metric, h, &xs))
        .collect()
}

/// A new minimum of the sampled sup-displacement.
#[derive(Clone, Debug, PartialEq)]
pub struct ReturnRecord {
    pub element: Element,
    pub displacement: f64,
}

/// Scans the nonzero members of `Box(n)` in graded order and keeps every
/// element whose sampled sup-displacement beats all earlier ones. For a
/// circle rotation the records are the continued-fraction denominators.
pub fn return_time_records(
    action: &SemigroupAction,
    metric: &MetricSpec,
    n: u32,
    sample_count: usize,
    seed: u64,
) -> Result<Vec<ReturnRecord>> {
    let xs = rigidity_samples(action, sample_count, seed)?;
    let mut best = f64::INFINITY;
    let mut records = Vec::new();
    for g in action.semigroup().enumerate_in_box(n) {
        if g.is_zero() {
            continue;
        }
        let d = max_displacement(action, metric, &g, &xs)?;
        if d < best {
            best = d;
            records.push(ReturnRecord {
                element: g,
                displacement: d,
            });
        }
    }
    Ok(records)
}

/// Denominators `q_0 = 1, q_1, ...` of the continued-fraction convergents of
/// the exact rational value of `literal`, up to `max_denominator`.
pub fn convergent_denominators(literal: &str, max_denominator: u64) -> Result<Vec<u64>> {
    let (mut p, mut q) = fixed::parse_rational(literal)?;
    let (mut q_prev, mut q_cur) = (BigUint::zero(), BigUint::from(1u32));
    let mut out = Vec::new();
    loop {
        let (a, r) = p.div_rem(&q);
        let next = &a * &q_cur + &q_prev;
        if out.is_empty() {
            // q_0 = 1 regardless of the integer part
            out.push(1);
        } else {
            match next.to_u64() {
                Some(d) if d <= max_denominator => out.push(d),
                _ => break,
            }
            q_prev = std::mem::replace(&mut q_cur, next);
        }
        if r.is_zero() {
            break;
        }
        p = std::mem::replace(&mut q, r);
    }
    Ok(out)
}

/// The action on factor `index` (1 or 2) of a product space, with the
/// component measure.
pub fn factor_project(action: &SemigroupAction, index: usize) -> Result<SemigroupAction> {
    let not_product = || {
        Error::SpaceMismatch(format!(
            "factor {index} requested from {}, which is not a product with factors 1 and 2",
            action.space().describe()
        ))
    };
    let (space, measure) = match (action.space(), action.measure()) {
        (StateSpace::Product(a, b), super::MeasureSpec::Product(ma, mb)) => match index {
            1 => ((**a).clone(), (**ma).clone()),
            2 => ((**b).clone(), (**mb).clone()),
            _ => return Err(not_product()),
        },
        _ => return Err(not_product()),
    };
    let gens = action
        .generators()
        .iter()
        .map(|g| g.component(index).cloned().ok_or_else(not_product))
        .collect::<Result<Vec<_>>>()?;
    SemigroupAction::new(
        format!("{}/factor{index}", action.name()),
        action.semigroup().clone(),
        gens,
        space,
        measure,
    )
}

/// Pushed-forward versus direct histogram counts.
#[derive(Clone, Debug, PartialEq)]
pub struct HistogramComparison {
    pub pushed: Vec<u64>,
    pub direct: Vec<u64>,
    /// Largest `|a - b| / sqrt(a + b)` over the cells.
    pub max_z: f64,
    pub passed: bool,
}

/// Cells of the histogram partition.
pub const HISTOGRAM_CELLS: usize = 64;

/// Bound on the per-cell deviation in Monte-Carlo standard deviations.
pub const HISTOGRAM_Z_BOUND: f64 = 4.0;

fn cell_of(p: &Point, bits: u32) -> usize {
    match p {
        Point::Torus { coords, .. } => (coords[0].top_u64() >> (64 - bits)) as usize,
        Point::Shift { word, .. } => (word.top_u64() >> (64 - bits)) as usize,
        Point::Pair(a, b) => {
            let hi = bits / 2;
            (cell_of(a, hi) << (bits - hi)) | cell_of(b, bits - hi)
        }
    }
}

/// Pushes `sample_count` measure samples through `T_g` and compares the
/// 64-cell histogram with `sample_count` direct samples. Passing means every
/// cell agrees within 4 standard deviations.
pub fn nonsingularity_proxy(
    action: &SemigroupAction,
    g: &Element,
    sample_count: usize,
    seed: u64,
) -> Result<HistogramComparison> {
    let bits = HISTOGRAM_CELLS.trailing_zeros();
    let t = action.transform(g)?;
    let mut pushed = vec![0u64; HISTOGRAM_CELLS];
    let mut direct = vec![0u64; HISTOGRAM_CELLS];
    for i in 0..sample_count as u64 {
        let x = action.sample(seed, domain::HISTOGRAM, i)?;
        pushed[cell_of(&t.apply(&x)?, bits)] += 1;
        let y = action.sample(seed, domain::HISTOGRAM, sample_count as u64 + i)?;
        direct[cell_of(&y, bits)] += 1;
    }
    let max_z = pushed
        .iter()
        .zip(&direct)
        .map(|(&a, &b)| {
            if a + b == 0 {
                0.0
            } else {
                (a as f64 - b as f64).abs() / ((a + b) as f64).sqrt()
            }
        })
        .fold(0.0, f64::max);
    Ok(HistogramComparison {
        pushed,
        direct,
        max_z,
        passed: max_z <= HISTOGRAM_Z_BOUND,
    })
}
