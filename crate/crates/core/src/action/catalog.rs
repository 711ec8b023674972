//! Ready-made actions used by the experiments, the self-test and the tests.

use super::{GeneratorMap, MeasureSpec, SemigroupAction, StateSpace};
use crate::error::Result;
use crate::fixed::{self, Fixed};
use crate::semigroup::Semigroup;

fn circle_system(name: &str, map: GeneratorMap, bits: u32) -> Result<SemigroupAction> {
    let space = StateSpace::circle(bits)?;
    SemigroupAction::new(name, Semigroup::full_lattice(1)?, vec![map], space, MeasureSpec::Haar)
}

/// `x -> x + alpha` on the circle; `alpha` is a decimal or `p/q` literal.
pub fn rotation(alpha: &str, bits: u32) -> Result<SemigroupAction> {
    circle_system("rotation", GeneratorMap::circle(1, fixed::parse_fraction(alpha, bits)?)?, bits)
}

/// `x -> 2x` on the circle.
pub fn doubling(bits: u32) -> Result<SemigroupAction> {
    circle_map(2, "0", bits).map(|a| a.with_name("doubling"))
}

/// `x -> q x + beta` on the circle.
pub fn circle_map(q: u64, beta: &str, bits: u32) -> Result<SemigroupAction> {
    circle_system(
        &format!("circle-x{q}"),
        GeneratorMap::circle(q, fixed::parse_fraction(beta, bits)?)?,
        bits,
    )
}

pub fn identity_circle(bits: u32) -> Result<SemigroupAction> {
    circle_system("identity", GeneratorMap::circle(1, Fixed::zero(bits)?)?, bits)
}

/// The one-sided shift with i.i.d. digits, `P(1) = p`.
pub fn bernoulli_shift(p: f64, bits: u32) -> Result<SemigroupAction> {
    SemigroupAction::new(
        "shift",
        Semigroup::full_lattice(1)?,
        vec![GeneratorMap::shift(1)],
        StateSpace::shift(bits)?,
        MeasureSpec::Bernoulli(p),
    )
}

fn two_circles(bits: u32) -> Result<StateSpace> {
    Ok(StateSpace::product(StateSpace::circle(bits)?, StateSpace::circle(bits)?))
}

fn product_haar() -> MeasureSpec {
    MeasureSpec::Product(Box::new(MeasureSpec::Haar), Box::new(MeasureSpec::Haar))
}

/// `(x, y) -> (2x, y + alpha)` on two circles, one generator.
pub fn doubling_times_rotation(alpha: &str, bits: u32) -> Result<SemigroupAction> {
    let map = GeneratorMap::pair(
        GeneratorMap::circle(2, Fixed::zero(bits)?)?,
        GeneratorMap::circle(1, fixed::parse_fraction(alpha, bits)?)?,
    );
    SemigroupAction::new(
        "doubling-x-rotation",
        Semigroup::full_lattice(1)?,
        vec![map],
        two_circles(bits)?,
        product_haar(),
    )
}

/// `(x, y) -> (x + a, y + b)` on two circles, one generator.
pub fn rotation_pair(a: &str, b: &str, bits: u32) -> Result<SemigroupAction> {
    let map = GeneratorMap::pair(
        GeneratorMap::circle(1, fixed::parse_fraction(a, bits)?)?,
        GeneratorMap::circle(1, fixed::parse_fraction(b, bits)?)?,
    );
    SemigroupAction::new("rotation-pair", Semigroup::full_lattice(1)?, vec![map], two_circles(bits)?, product_haar())
}

/// `N^2` acting on two circles: the first generator doubles the first
/// coordinate, the second rotates the second coordinate by `alpha`.
pub fn doubling_rotation_plane(alpha: &str, bits: u32) -> Result<SemigroupAction> {
    let zero = Fixed::zero(bits)?;
    let gens = vec![
        GeneratorMap::pair(GeneratorMap::circle(2, zero)?, GeneratorMap::circle(1, zero)?),
        GeneratorMap::pair(
            GeneratorMap::circle(1, zero)?,
            GeneratorMap::circle(1, fixed::parse_fraction(alpha, bits)?)?,
        ),
    ];
    SemigroupAction::new("doubling-rotation-plane", Semigroup::full_lattice(2)?, gens, two_circles(bits)?, product_haar())
}

/// `N^2` acting on the circle by `x -> 2x` and `x -> 3x`.
pub fn doubling_tripling(bits: u32) -> Result<SemigroupAction> {
    let zero = Fixed::zero(bits)?;
    SemigroupAction::new(
        "doubling-tripling",
        Semigroup::full_lattice(2)?,
        vec![GeneratorMap::circle(2, zero)?, GeneratorMap::circle(3, zero)?],
        StateSpace::circle(bits)?,
        MeasureSpec::Haar,
    )
}
