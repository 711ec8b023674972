//! Concrete nonsingular semigroup actions.
//!
//! State spaces are tori `[0,1)^m`, one-sided binary shifts truncated to `L`
//! digits, and products of two spaces. All coordinates are stored as `L`-bit
//! [`Fixed`] words. Expanding maps consume digits: every point carries a
//! consumed-depth counter per leaf, and an application that would push the
//! counter past `L - 32` fails with [`Error::PrecisionExhausted`].

pub mod catalog;
mod probes;

pub use probes::{
    convergent_denominators, factor_project, nonsingularity_proxy, orbit_tail_density,
    reference_grid, return_time_records, uniform_rigidity_probe, HistogramComparison, ReturnRecord,
    HISTOGRAM_CELLS, HISTOGRAM_Z_BOUND, REFERENCE_GRID_POINTS,
};

use rand::Rng;
use smallvec::SmallVec;
use std::fmt;

use crate::error::{Error, Result};
use crate::fixed::{self, Fixed};
use crate::rng::{domain, stream_rng};
use crate::semigroup::{Element, Semigroup};

/// Digits reserved below the consumed depth; points are never expanded into them.
pub const PRECISION_GUARD_BITS: u32 = 32;

pub const DEFAULT_PRECISION_BITS: u32 = 256;

#[derive(Clone, Debug, PartialEq)]
pub enum StateSpace {
    Torus { dim: usize, bits: u32 },
    Shift { bits: u32 },
    Product(Box<StateSpace>, Box<StateSpace>),
}

impl StateSpace {
    pub fn circle(bits: u32) -> Result<Self> {
        Self::torus(1, bits)
    }

    pub fn torus(dim: usize, bits: u32) -> Result<Self> {
        fixed::check_bits(bits)?;
        if dim == 0 || dim > 4 {
            return Err(Error::UnsupportedDimension(dim));
        }
        Ok(StateSpace::Torus { dim, bits })
    }

    pub fn shift(bits: u32) -> Result<Self> {
        fixed::check_bits(bits)?;
        Ok(StateSpace::Shift { bits })
    }

    pub fn product(a: StateSpace, b: StateSpace) -> Self {
        StateSpace::Product(Box::new(a), Box::new(b))
    }

    pub fn is_product(&self) -> bool {
        matches!(self, StateSpace::Product(..))
    }

    /// Precision of the first leaf; all leaves of a config-built space share it.
    pub fn precision_bits(&self) -> u32 {
        match self {
            StateSpace::Torus { bits, .. } | StateSpace::Shift { bits } => *bits,
            StateSpace::Product(a, _) => a.precision_bits(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            StateSpace::Torus { dim: 1, .. } => "circle".into(),
            StateSpace::Torus { dim, .. } => format!("torus({dim})"),
            StateSpace::Shift { .. } => "shift".into(),
            StateSpace::Product(a, b) => format!("{}x{}", a.describe(), b.describe()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeasureSpec {
    /// Lebesgue measure on the torus.
    Haar,
    /// I.i.d. digits with `P(1) = p`.
    Bernoulli(f64),
    Product(Box<MeasureSpec>, Box<MeasureSpec>),
}

impl MeasureSpec {
    pub fn default_for(space: &StateSpace) -> Self {
        match space {
            StateSpace::Torus { .. } => MeasureSpec::Haar,
            StateSpace::Shift { .. } => MeasureSpec::Bernoulli(0.5),
            StateSpace::Product(a, b) => MeasureSpec::Product(
                Box::new(Self::default_for(a)),
                Box::new(Self::default_for(b)),
            ),
        }
    }

    pub fn compatible(&self, space: &StateSpace) -> bool {
        match (self, space) {
            (MeasureSpec::Haar, StateSpace::Torus { .. }) => true,
            (MeasureSpec::Bernoulli(p), StateSpace::Shift { .. }) => *p > 0.0 && *p < 1.0,
            (MeasureSpec::Product(ma, mb), StateSpace::Product(sa, sb)) => {
                ma.compatible(sa) && mb.compatible(sb)
            }
            _ => false,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            MeasureSpec::Haar => "haar".into(),
            MeasureSpec::Bernoulli(p) => format!("bernoulli({p})"),
            MeasureSpec::Product(a, b) => format!("{}x{}", a.describe(), b.describe()),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Point {
    Torus {
        coords: SmallVec<[Fixed; 2]>,
        consumed: u32,
    },
    Shift {
        word: Fixed,
        consumed: u32,
    },
    Pair(Box<Point>, Box<Point>),
}

impl Point {
    pub fn circle(x: Fixed) -> Self {
        Point::Torus {
            coords: SmallVec::from_slice(&[x]),
            consumed: 0,
        }
    }

    /// A circle point from a decimal or `p/q` literal.
    pub fn circle_literal(literal: &str, bits: u32) -> Result<Self> {
        Ok(Self::circle(fixed::parse_fraction(literal, bits)?))
    }

    pub fn torus(coords: &[Fixed]) -> Self {
        Point::Torus {
            coords: SmallVec::from_slice(coords),
            consumed: 0,
        }
    }

    pub fn sequence(word: Fixed) -> Self {
        Point::Shift { word, consumed: 0 }
    }

    /// A shift point from its leading symbols; the remaining digits are zero.
    pub fn sequence_from_symbols(symbols: &[bool], bits: u32) -> Result<Self> {
        Ok(Self::sequence(Fixed::from_bits(bits, symbols.iter().copied())?))
    }

    pub fn pair(a: Point, b: Point) -> Self {
        Point::Pair(Box::new(a), Box::new(b))
    }

    pub fn belongs_to(&self, space: &StateSpace) -> bool {
        match (self, space) {
            (Point::Torus { coords, .. }, StateSpace::Torus { dim, bits }) => {
                coords.len() == *dim && coords.iter().all(|c| c.bits() == *bits)
            }
            (Point::Shift { word, .. }, StateSpace::Shift { bits }) => word.bits() == *bits,
            (Point::Pair(a, b), StateSpace::Product(sa, sb)) => a.belongs_to(sa) && b.belongs_to(sb),
            _ => false,
        }
    }

    /// Largest consumed depth over all leaves.
    pub fn consumed(&self) -> u32 {
        match self {
            Point::Torus { consumed, .. } | Point::Shift { consumed, .. } => *consumed,
            Point::Pair(a, b) => a.consumed().max(b.consumed()),
        }
    }

    pub fn component(&self, index: usize) -> Option<&Point> {
        match (self, index) {
            (Point::Pair(a, _), 1) => Some(a),
            (Point::Pair(_, b), 2) => Some(b),
            _ => None,
        }
    }

    /// Approximate coordinates, for reports and plotting.
    pub fn approx(&self) -> Vec<f64> {
        match self {
            Point::Torus { coords, .. } => coords.iter().map(|c| c.to_f64()).collect(),
            Point::Shift { word, .. } => vec![word.to_f64()],
            Point::Pair(a, b) => {
                let mut v = a.approx();
                v.extend(b.approx());
                v
            }
        }
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Torus { coords, consumed } => {
                let c: Vec<f64> = coords.iter().map(|c| c.to_f64()).collect();
                write!(f, "Torus({c:?}, consumed={consumed})")
            }
            Point::Shift { word, consumed } => write!(f, "Shift({word:?}, consumed={consumed})"),
            Point::Pair(a, b) => write!(f, "Pair({a:?}, {b:?})"),
        }
    }
}

/// One coordinate of an affine torus map `x -> m x + c (mod 1)`; `m` is an
/// integer mod `2^L`, `c` a fraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AffineCoord {
    pub multiplier: Fixed,
    pub offset: Fixed,
}

impl AffineCoord {
    fn identity(bits: u32) -> Result<Self> {
        Ok(AffineCoord {
            multiplier: Fixed::from_u64(1, bits)?,
            offset: Fixed::zero(bits)?,
        })
    }

    /// `self ∘ inner`.
    fn after(&self, inner: &AffineCoord) -> AffineCoord {
        AffineCoord {
            multiplier: self.multiplier.wrapping_mul(&inner.multiplier),
            offset: self.multiplier.wrapping_mul(&inner.offset).wrapping_add(&self.offset),
        }
    }

    fn pow(&self, n: u64) -> AffineCoord {
        AffineCoord {
            multiplier: fixed::pow(&self.multiplier, n),
            offset: fixed::geometric_sum(&self.multiplier, n).wrapping_mul(&self.offset),
        }
    }

    #[inline]
    fn apply(&self, x: &Fixed) -> Fixed {
        self.multiplier.wrapping_mul(x).wrapping_add(&self.offset)
    }
}

/// Digits consumed by one application of `x -> q x`: `ceil(log2 q)`.
pub fn expansion_cost(q: u64) -> u32 {
    if q <= 1 {
        0
    } else {
        64 - (q - 1).leading_zeros()
    }
}

/// A map of the state space. The allowed forms are closed under composition
/// and powers, so `T_g` for any `g` is again a `GeneratorMap`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GeneratorMap {
    Affine {
        coords: SmallVec<[AffineCoord; 2]>,
        /// Digits consumed per application.
        cost: u32,
    },
    Shift {
        steps: u32,
    },
    Pair(Box<GeneratorMap>, Box<GeneratorMap>),
}

impl GeneratorMap {
    /// `x -> q x + rotation (mod 1)` on the circle.
    pub fn circle(q: u64, rotation: Fixed) -> Result<Self> {
        Self::torus(&[(q, rotation)])
    }

    /// Diagonal affine map of the torus, one `(q, rotation)` per coordinate.
    pub fn torus(coords: &[(u64, Fixed)]) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::SpaceMismatch("affine map needs at least one coordinate".into()));
        }
        let bits = coords[0].1.bits();
        let mut out = SmallVec::new();
        let mut cost = 0;
        for &(q, rot) in coords {
            if q == 0 {
                return Err(Error::config("multiplier", "multipliers must be >= 1"));
            }
            if rot.bits() != bits {
                return Err(Error::SpaceMismatch("mixed precisions in one map".into()));
            }
            out.push(AffineCoord {
                multiplier: Fixed::from_u64(q, bits)?,
                offset: rot,
            });
            cost = cost.max(expansion_cost(q));
        }
        Ok(GeneratorMap::Affine { coords: out, cost })
    }

    pub fn shift(steps: u32) -> Self {
        GeneratorMap::Shift { steps }
    }

    pub fn pair(a: GeneratorMap, b: GeneratorMap) -> Self {
        GeneratorMap::Pair(Box::new(a), Box::new(b))
    }

    pub fn identity(space: &StateSpace) -> Result<Self> {
        Ok(match space {
            StateSpace::Torus { dim, bits } => GeneratorMap::Affine {
                coords: (0..*dim).map(|_| AffineCoord::identity(*bits)).collect::<Result<_>>()?,
                cost: 0,
            },
            StateSpace::Shift { .. } => GeneratorMap::Shift { steps: 0 },
            StateSpace::Product(a, b) => Self::pair(Self::identity(a)?, Self::identity(b)?),
        })
    }

    pub fn compatible(&self, space: &StateSpace) -> bool {
        match (self, space) {
            (GeneratorMap::Affine { coords, .. }, StateSpace::Torus { dim, bits }) => {
                coords.len() == *dim && coords.iter().all(|c| c.multiplier.bits() == *bits)
            }
            (GeneratorMap::Shift { .. }, StateSpace::Shift { .. }) => true,
            (GeneratorMap::Pair(a, b), StateSpace::Product(sa, sb)) => {
                a.compatible(sa) && b.compatible(sb)
            }
            _ => false,
        }
    }

    /// `self ∘ inner` (apply `inner` first).
    pub fn after(&self, inner: &GeneratorMap) -> Result<GeneratorMap> {
        match (self, inner) {
            (
                GeneratorMap::Affine { coords: a, cost: ca },
                GeneratorMap::Affine { coords: b, cost: cb },
            ) if a.len() == b.len() => Ok(GeneratorMap::Affine {
                coords: a.iter().zip(b).map(|(x, y)| x.after(y)).collect(),
                cost: ca.saturating_add(*cb),
            }),
            (GeneratorMap::Shift { steps: a }, GeneratorMap::Shift { steps: b }) => {
                Ok(GeneratorMap::Shift {
                    steps: a.saturating_add(*b),
                })
            }
            (GeneratorMap::Pair(a1, b1), GeneratorMap::Pair(a2, b2)) => {
                Ok(Self::pair(a1.after(a2)?, b1.after(b2)?))
            }
            _ => Err(Error::SpaceMismatch("composing maps of different spaces".into())),
        }
    }

    /// `self^n` in closed form.
    pub fn pow(&self, n: u32) -> GeneratorMap {
        match self {
            GeneratorMap::Affine { coords, cost } => GeneratorMap::Affine {
                coords: coords.iter().map(|c| c.pow(n as u64)).collect(),
                cost: cost.saturating_mul(n),
            },
            GeneratorMap::Shift { steps } => GeneratorMap::Shift {
                steps: steps.saturating_mul(n),
            },
            GeneratorMap::Pair(a, b) => Self::pair(a.pow(n), b.pow(n)),
        }
    }

    /// Largest per-leaf digit consumption of one application.
    pub fn cost(&self) -> u32 {
        match self {
            GeneratorMap::Affine { cost, .. } => *cost,
            GeneratorMap::Shift { steps } => *steps,
            GeneratorMap::Pair(a, b) => a.cost().max(b.cost()),
        }
    }

    pub fn component(&self, index: usize) -> Option<&GeneratorMap> {
        match (self, index) {
            (GeneratorMap::Pair(a, _), 1) => Some(a),
            (GeneratorMap::Pair(_, b), 2) => Some(b),
            _ => None,
        }
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        match (self, x) {
            (GeneratorMap::Affine { coords, cost }, Point::Torus { coords: xs, consumed })
                if coords.len() == xs.len() =>
            {
                let consumed = charge(*consumed, *cost, xs[0].bits())?;
                Ok(Point::Torus {
                    coords: coords.iter().zip(xs).map(|(m, x)| m.apply(x)).collect(),
                    consumed,
                })
            }
            (GeneratorMap::Shift { steps }, Point::Shift { word, consumed }) => {
                let consumed = charge(*consumed, *steps, word.bits())?;
                Ok(Point::Shift {
                    word: word.shl(*steps),
                    consumed,
                })
            }
            (GeneratorMap::Pair(a, b), Point::Pair(xa, xb)) => Ok(Point::pair(a.apply(xa)?, b.apply(xb)?)),
            _ => Err(Error::SpaceMismatch(format!("cannot apply map to {x:?}"))),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            GeneratorMap::Affine { coords, .. } => {
                let parts: Vec<String> = coords
                    .iter()
                    .map(|c| {
                        let q = c.multiplier.to_biguint();
                        let rot = c.offset.to_f64();
                        if rot == 0.0 {
                            format!("x{q}")
                        } else if q == 1u32.into() {
                            format!("+{rot}")
                        } else {
                            format!("x{q}+{rot}")
                        }
                    })
                    .collect();
                format!("affine[{}]", parts.join(";"))
            }
            GeneratorMap::Shift { steps } => format!("shift^{steps}"),
            GeneratorMap::Pair(a, b) => format!("({},{})", a.describe(), b.describe()),
        }
    }
}

fn charge(consumed: u32, cost: u32, bits: u32) -> Result<u32> {
    let budget = bits - PRECISION_GUARD_BITS;
    let required = consumed.saturating_add(cost);
    if required > budget {
        return Err(Error::PrecisionExhausted { required, budget });
    }
    Ok(required)
}

/// Draws one point from `measure`.
pub fn sample_point<R: Rng + ?Sized>(space: &StateSpace, measure: &MeasureSpec, rng: &mut R) -> Result<Point> {
    match (space, measure) {
        (StateSpace::Torus { dim, bits }, MeasureSpec::Haar) => {
            let coords: SmallVec<[Fixed; 2]> =
                (0..*dim).map(|_| Fixed::random(rng, *bits)).collect::<Result<_>>()?;
            Ok(Point::Torus { coords, consumed: 0 })
        }
        (StateSpace::Shift { bits }, MeasureSpec::Bernoulli(p)) => {
            let word = if *p == 0.5 {
                Fixed::random(rng, *bits)?
            } else {
                let digits: Vec<bool> = (0..*bits).map(|_| rng.gen_bool(*p)).collect();
                Fixed::from_bits(*bits, digits)?
            };
            Ok(Point::sequence(word))
        }
        (StateSpace::Product(sa, sb), MeasureSpec::Product(ma, mb)) => {
            let a = sample_point(sa, ma, rng)?;
            let b = sample_point(sb, mb, rng)?;
            Ok(Point::pair(a, b))
        }
        _ => Err(Error::SpaceMismatch(format!(
            "measure {} does not live on {}",
            measure.describe(),
            space.describe()
        ))),
    }
}

/// Sample `index` of the stream `(seed, domain)`.
pub fn sample_seeded(space: &StateSpace, measure: &MeasureSpec, seed: u64, domain: u64, index: u64) -> Result<Point> {
    sample_point(space, measure, &mut stream_rng(seed, domain, index))
}

/// A homomorphism from a sub-monoid of `N^d` into maps of a state space,
/// given by `d` pairwise commuting generator maps.
#[derive(Clone, Debug)]
pub struct SemigroupAction {
    name: String,
    semigroup: Semigroup,
    generators: Vec<GeneratorMap>,
    space: StateSpace,
    measure: MeasureSpec,
}

/// Sampled points used for the commutation check at construction.
pub const COMMUTATION_SAMPLES: usize = 1000;

impl SemigroupAction {
    pub fn new(
        name: impl Into<String>,
        semigroup: Semigroup,
        generators: Vec<GeneratorMap>,
        space: StateSpace,
        measure: MeasureSpec,
    ) -> Result<Self> {
        if generators.len() != semigroup.dim() {
            return Err(Error::DimensionMismatch {
                expected: semigroup.dim(),
                got: generators.len(),
            });
        }
        for (i, g) in generators.iter().enumerate() {
            if !g.compatible(&space) {
                return Err(Error::SpaceMismatch(format!(
                    "generator {i} ({}) does not act on {}",
                    g.describe(),
                    space.describe()
                )));
            }
        }
        if !measure.compatible(&space) {
            return Err(Error::SpaceMismatch(format!(
                "measure {} does not live on {}",
                measure.describe(),
                space.describe()
            )));
        }
        let action = SemigroupAction {
            name: name.into(),
            semigroup,
            generators,
            space,
            measure,
        };
        action.check_commutation()?;
        Ok(action)
    }

    /// Pairwise commutation, both as closed forms and on sampled points.
    fn check_commutation(&self) -> Result<()> {
        let n = self.generators.len();
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (&self.generators[i], &self.generators[j]);
                if a.after(b)? != b.after(a)? {
                    return Err(Error::NonCommuting(format!(
                        "{} and {} (closed forms differ)",
                        a.describe(),
                        b.describe()
                    )));
                }
                for k in 0..COMMUTATION_SAMPLES as u64 {
                    let x = sample_seeded(&self.space, &self.measure, 0, domain::COMMUTATION, k)?;
                    // a single application of each generator is always affordable
                    if b.apply(&a.apply(&x)?)? != a.apply(&b.apply(&x)?)? {
                        return Err(Error::NonCommuting(format!(
                            "{} and {} disagree on a sampled point",
                            a.describe(),
                            b.describe()
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn semigroup(&self) -> &Semigroup {
        &self.semigroup
    }

    pub fn generators(&self) -> &[GeneratorMap] {
        &self.generators
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn measure(&self) -> &MeasureSpec {
        &self.measure
    }

    pub fn precision_bits(&self) -> u32 {
        self.space.precision_bits()
    }

    /// `T_g` in closed form, composed from generator powers.
    pub fn transform(&self, g: &Element) -> Result<GeneratorMap> {
        if g.dim() != self.semigroup.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.semigroup.dim(),
                got: g.dim(),
            });
        }
        if !self.semigroup.contains(g) {
            return Err(Error::NotMember {
                element: g.to_string(),
                semigroup: self.semigroup.describe(),
            });
        }
        let mut map = GeneratorMap::identity(&self.space)?;
        for (gen, &e) in self.generators.iter().zip(g.coords()) {
            if e > 0 {
                map = map.after(&gen.pow(e))?;
            }
        }
        Ok(map)
    }

    /// `T_g x`.
    pub fn apply(&self, g: &Element, x: &Point) -> Result<Point> {
        if !x.belongs_to(&self.space) {
            return Err(Error::SpaceMismatch(format!("{x:?} is not a point of {}", self.space.describe())));
        }
        self.transform(g)?.apply(x)
    }

    /// `T_g` for every member of `Box(n)`, graded-lex order.
    pub fn transforms_in_box(&self, n: u32) -> Result<Vec<(Element, GeneratorMap)>> {
        self.semigroup
            .enumerate_in_box(n)
            .into_iter()
            .map(|g| Ok((g, self.transform(&g)?)))
            .collect()
    }

    /// Fails early when a fresh point cannot afford `T_g` for some `g` in `Box(n)`.
    pub fn check_budget(&self, n: u32) -> Result<()> {
        let budget = self.precision_bits() - PRECISION_GUARD_BITS;
        let worst = Element::new(&vec![n; self.semigroup.dim()])?;
        let required = self
            .generators
            .iter()
            .zip(worst.coords())
            .fold(0u32, |acc, (g, &e)| acc.saturating_add(g.cost().saturating_mul(e)));
        if required > budget {
            return Err(Error::PrecisionExhausted { required, budget });
        }
        Ok(())
    }

    pub fn sample(&self, seed: u64, domain: u64, index: u64) -> Result<Point> {
        sample_seeded(&self.space, &self.measure, seed, domain, index)
    }

    pub fn describe(&self) -> String {
        let gens: Vec<String> = self.generators.iter().map(|g| g.describe()).collect();
        format!(
            "{} acting on {} by [{}] with {}",
            self.semigroup.describe(),
            self.space.describe(),
            gens.join(", "),
            self.measure.describe()
        )
    }
}

#[cfg(test)]
mod tests;
