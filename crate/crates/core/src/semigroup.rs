//! Pointed cancellative abelian semigroups realized as sub-monoids of `N^d`.
//!
//! Every semigroup carries the algebraic partial order `g <= h` iff
//! `h = g + x` for some member `x`. Enumeration always runs inside a finite
//! window `Box(n) = {v in N^d : every coordinate <= n}` and uses graded
//! lexicographic order (total degree first, then coordinates left to right).

use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 4;

/// A point of `N^d`, `1 <= d <= 4`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Element {
    coords: [u32; MAX_DIM],
    dim: u8,
}

impl Element {
    pub fn new(coords: &[u32]) -> Result<Self> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(Error::UnsupportedDimension(coords.len()));
        }
        let mut c = [0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Ok(Element {
            coords: c,
            dim: coords.len() as u8,
        })
    }

    /// Converts a signed vector, returning `None` when a coordinate is negative.
    pub fn from_signed(v: &[i64]) -> Option<Self> {
        if v.is_empty() || v.len() > MAX_DIM || v.iter().any(|&c| c < 0 || c > u32::MAX as i64) {
            return None;
        }
        let c: Vec<u32> = v.iter().map(|&c| c as u32).collect();
        Element::new(&c).ok()
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Element::new(&vec![0; dim])
    }

    pub fn unit(dim: usize, i: usize) -> Result<Self> {
        let mut c = vec![0; dim];
        c[i] = 1;
        Element::new(&c)
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[u32] {
        &self.coords[..self.dim()]
    }

    pub fn is_zero(&self) -> bool {
        self.coords().iter().all(|&c| c == 0)
    }

    pub fn degree(&self) -> u64 {
        self.coords().iter().map(|&c| c as u64).sum()
    }

    pub fn max_coord(&self) -> u32 {
        self.coords().iter().copied().max().unwrap_or(0)
    }

    pub fn scale(&self, k: u32) -> Self {
        let mut out = *self;
        for c in &mut out.coords[..self.dim()] {
            *c *= k;
        }
        out
    }

    /// Coordinatewise sum; the semigroup operation.
    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        let mut out = *self;
        for i in 0..self.dim() {
            out.coords[i] += other.coords[i];
        }
        Ok(out)
    }

    /// `self - other` when every coordinate stays nonnegative.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        if self.dim != other.dim {
            return None;
        }
        let mut out = *self;
        for i in 0..self.dim() {
            out.coords[i] = self.coords[i].checked_sub(other.coords[i])?;
        }
        Some(out)
    }

    /// Coordinatewise `self <= other` in `N^d`.
    pub fn dominated_by(&self, other: &Self) -> bool {
        self.dim == other.dim && (0..self.dim()).all(|i| self.coords[i] <= other.coords[i])
    }

    pub fn graded_cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.coords().cmp(other.coords()))
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dim() == 1 {
            return write!(f, "{}", self.coords[0]);
        }
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// `g + h`.
pub fn add(g: &Element, h: &Element) -> Result<Element> {
    g.checked_add(h)
}

/// All of `Box(n)` in `N^d`, graded-lex order.
pub fn box_points(dim: usize, n: u32) -> Vec<Element> {
    let side = n as usize + 1;
    let total = side.pow(dim as u32);
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0u32; dim];
    for _ in 0..total {
        out.push(Element::new(&idx).expect("dimension validated by caller"));
        for c in idx.iter_mut().rev() {
            if *c < n {
                *c += 1;
                break;
            }
            *c = 0;
        }
    }
    out.sort_by(|a, b| a.graded_cmp(b));
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SemigroupKind {
    /// `N^d`.
    FullLattice,
    /// `k N^d`.
    ScaledLattice { k: u32 },
    /// Nonnegative integer combinations of the generator list.
    FinitelyGenerated,
    /// Integer points of `N^2` weakly between two rays.
    Cone { rays: [[u32; 2]; 2] },
}

/// A finitely generated sub-monoid of `N^d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Semigroup {
    dim: usize,
    kind: SemigroupKind,
    generators: Vec<Element>,
}

impl Semigroup {
    pub fn full_lattice(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        let generators = (0..dim).map(|i| Element::unit(dim, i)).collect::<Result<_>>()?;
        Ok(Semigroup {
            dim,
            kind: SemigroupKind::FullLattice,
            generators,
        })
    }

    pub fn scaled_lattice(dim: usize, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidSemigroup("scale factor k must be >= 1".into()));
        }
        if k == 1 {
            return Self::full_lattice(dim);
        }
        let base = Self::full_lattice(dim)?;
        Ok(Semigroup {
            dim,
            kind: SemigroupKind::ScaledLattice { k },
            generators: base.generators.iter().map(|g| g.scale(k)).collect(),
        })
    }

    pub fn generated(generators: Vec<Element>) -> Result<Self> {
        let first = generators
            .first()
            .ok_or_else(|| Error::InvalidSemigroup("empty generator list".into()))?;
        let dim = first.dim();
        for g in &generators {
            check_dim(dim, g.dim())?;
            if g.is_zero() {
                return Err(Error::InvalidSemigroup("zero generator".into()));
            }
        }
        let mut gens = generators;
        gens.sort_by(|a, b| a.graded_cmp(b));
        gens.dedup();
        Ok(Semigroup {
            dim,
            kind: SemigroupKind::FinitelyGenerated,
            generators: gens,
        })
    }

    /// The integer cone between two linearly independent rays in `N^2`.
    /// The generator list is the cone's Hilbert basis.
    pub fn cone(r1: [u32; 2], r2: [u32; 2]) -> Result<Self> {
        let cross = r1[0] as i64 * r2[1] as i64 - r1[1] as i64 * r2[0] as i64;
        if cross == 0 {
            return Err(Error::InvalidSemigroup(format!(
                "cone rays {r1:?} and {r2:?} are linearly dependent"
            )));
        }
        // orient so that r1 is the clockwise-most ray
        let (a, b) = if cross > 0 { (r1, r2) } else { (r2, r1) };
        let mut sg = Semigroup {
            dim: 2,
            kind: SemigroupKind::Cone { rays: [a, b] },
            generators: Vec::new(),
        };
        sg.generators = sg.cone_hilbert_basis();
        Ok(sg)
    }

    fn cone_hilbert_basis(&self) -> Vec<Element> {
        let SemigroupKind::Cone { rays } = self.kind else {
            unreachable!()
        };
        let primitive = |r: [u32; 2]| {
            let g = r[0].gcd(&r[1]);
            [r[0] / g, r[1] / g]
        };
        let (p, q) = (primitive(rays[0]), primitive(rays[1]));
        // the Hilbert basis lies in the half-open parallelogram spanned by the
        // primitive rays, plus the rays themselves
        let bound = (p[0] + q[0]).max(p[1] + q[1]);
        let members: Vec<Element> = box_points(2, bound)
            .into_iter()
            .filter(|v| !v.is_zero() && self.contains(v))
            .collect();
        members
            .iter()
            .filter(|v| {
                !members.iter().any(|u| {
                    u != *v
                        && u.dominated_by(v)
                        && v.checked_sub(u).is_some_and(|w| self.contains(&w))
                })
            })
            .copied()
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &SemigroupKind {
        &self.kind
    }

    pub fn generators(&self) -> &[Element] {
        &self.generators
    }

    pub fn zero(&self) -> Element {
        Element::zero(self.dim).expect("dimension validated at construction")
    }

    /// Sum of all generators; its multiples form the default cofinal schedule.
    pub fn generator_sum(&self) -> Element {
        self.generators
            .iter()
            .fold(self.zero(), |acc, g| acc.checked_add(g).expect("same dimension"))
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            SemigroupKind::FullLattice => format!("N^{}", self.dim),
            SemigroupKind::ScaledLattice { k } => format!("{k}N^{}", self.dim),
            SemigroupKind::FinitelyGenerated => {
                let gens: Vec<String> = self.generators.iter().map(|g| g.to_string()).collect();
                format!("<{}>", gens.join(","))
            }
            SemigroupKind::Cone { rays } => format!(
                "cone[({},{}),({},{})]",
                rays[0][0], rays[0][1], rays[1][0], rays[1][1]
            ),
        }
    }

    /// Membership of a signed integer vector.
    pub fn member(&self, v: &[i64]) -> bool {
        if v.len() != self.dim {
            return false;
        }
        match Element::from_signed(v) {
            Some(e) => self.contains(&e),
            None => false,
        }
    }

    pub fn contains(&self, v: &Element) -> bool {
        if v.dim() != self.dim {
            return false;
        }
        match &self.kind {
            SemigroupKind::FullLattice => true,
            SemigroupKind::ScaledLattice { k } => v.coords().iter().all(|c| c % k == 0),
            SemigroupKind::Cone { rays } => {
                let (x, y) = (v.coords()[0] as i64, v.coords()[1] as i64);
                let cross = |r: [u32; 2], px: i64, py: i64| r[0] as i64 * py - r[1] as i64 * px;
                cross(rays[0], x, y) >= 0 && -cross(rays[1], x, y) >= 0
            }
            SemigroupKind::FinitelyGenerated => reachable_table(&self.generators, v.coords())
                .last()
                .copied()
                .unwrap_or(false),
        }
    }

    /// Membership of every point of `Box(n)`, computed once.
    pub fn membership_table(&self, n: u32) -> MembershipTable {
        let dims = vec![n; self.dim];
        let bits = match &self.kind {
            SemigroupKind::FinitelyGenerated => reachable_table(&self.generators, &dims),
            _ => {
                let side = n as usize + 1;
                let mut out = vec![false; side.pow(self.dim as u32)];
                let mut idx = vec![0u32; self.dim];
                for slot in out.iter_mut() {
                    *slot = self.contains(&Element::new(&idx).expect("valid dim"));
                    for c in idx.iter_mut().rev() {
                        if *c < n {
                            *c += 1;
                            break;
                        }
                        *c = 0;
                    }
                }
                out
            }
        };
        MembershipTable {
            n,
            dim: self.dim,
            bits,
        }
    }

    /// `g <= h` in the algebraic order.
    pub fn leq(&self, g: &Element, h: &Element) -> bool {
        match h.checked_sub(g) {
            Some(x) => self.contains(&x),
            None => false,
        }
    }

    pub fn enumerate_in_box(&self, n: u32) -> Vec<Element> {
        let table = self.membership_table(n);
        box_points(self.dim, n)
            .into_iter()
            .filter(|v| table.get(v))
            .collect()
    }

    /// `{g in Box(n) ∩ G : h <= g}`.
    pub fn tail_in_box(&self, h: &Element, n: u32) -> Vec<Element> {
        let table = self.membership_table(n);
        box_points(self.dim, n)
            .into_iter()
            .filter(|g| table.get(g) && g.checked_sub(h).is_some_and(|x| table.get(&x)))
            .collect()
    }

    /// `h_i = i * s` for `i = 1..=depth`, `s` the sum of the generators.
    ///
    /// The schedule is checked to dominate every member of `Box(i)` at each
    /// step; a failure is reported instead of silently accepted.
    pub fn cofinal_schedule(&self, depth: usize) -> Result<Vec<Element>> {
        if depth == 0 {
            return Err(Error::NotCofinal("depth must be >= 1".into()));
        }
        let s = self.generator_sum();
        let schedule: Vec<Element> = (1..=depth as u32).map(|i| s.scale(i)).collect();
        for (i, h) in schedule.iter().enumerate() {
            let bound = i as u32 + 1;
            let table = self.membership_table(h.max_coord().max(bound));
            for g in self.enumerate_in_box(bound) {
                let dominated = h.checked_sub(&g).is_some_and(|x| table.get(&x));
                if !dominated {
                    return Err(Error::NotCofinal(format!(
                        "{} does not dominate {} in {}",
                        h,
                        g,
                        self.describe()
                    )));
                }
            }
        }
        Ok(schedule)
    }
}

/// Dynamic program over the box `[0, bounds]`: entry `u` is true iff `u` is a
/// nonnegative integer combination of the generators. Row-major indexing,
/// last coordinate fastest.
fn reachable_table(generators: &[Element], bounds: &[u32]) -> Vec<bool> {
    let dim = bounds.len();
    let sides: Vec<usize> = bounds.iter().map(|&b| b as usize + 1).collect();
    let total: usize = sides.iter().product();
    let mut strides = vec![1usize; dim];
    for i in (0..dim.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * sides[i + 1];
    }
    let gens: Vec<(&Element, usize)> = generators
        .iter()
        .filter(|g| g.dim() == dim)
        .map(|g| {
            let off = g.coords().iter().zip(&strides).map(|(&c, &s)| c as usize * s).sum();
            (g, off)
        })
        .collect();
    let mut table = vec![false; total];
    if total == 0 {
        return table;
    }
    table[0] = true;
    let mut idx = vec![0u32; dim];
    for flat in 0..total {
        if flat > 0 {
            table[flat] = gens.iter().any(|(g, off)| {
                g.coords().iter().zip(&idx).all(|(&gc, &ic)| gc <= ic) && table[flat - off]
            });
        }
        for i in (0..dim).rev() {
            if idx[i] < bounds[i] {
                idx[i] += 1;
                break;
            }
            idx[i] = 0;
        }
    }
    table
}

/// Precomputed membership over `Box(n)`.
#[derive(Clone, Debug)]
pub struct MembershipTable {
    n: u32,
    dim: usize,
    bits: Vec<bool>,
}

impl MembershipTable {
    pub fn bound(&self) -> u32 {
        self.n
    }

    /// Membership of `v`; points outside the box panic in debug builds and
    /// report `false` otherwise.
    pub fn get(&self, v: &Element) -> bool {
        if v.dim() != self.dim || v.max_coord() > self.n {
            debug_assert!(false, "{v} outside Box({})", self.n);
            return false;
        }
        let side = self.n as usize + 1;
        let flat = v.coords().iter().fold(0usize, |acc, &c| acc * side + c as usize);
        self.bits[flat]
    }
}
