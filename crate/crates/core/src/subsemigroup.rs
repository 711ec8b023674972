//! Sub-semigroups, syndetic and thick largeness at bounded scale, and
//! restriction of actions to sub-semigroups.
//!
//! All largeness verdicts are stamped with the box they were decided on.

use fixedbitset::FixedBitSet;

use crate::action::SemigroupAction;
use crate::error::{Error, Result};
use crate::semigroup::{box_points, Element, MembershipTable, Semigroup, SemigroupKind};

/// Box on which the sub-monoid axioms and generation are verified.
pub const VERIFICATION_BOX: u32 = 10;

/// Largest `|F|` searched exhaustively before falling back to greedy cover.
pub const EXHAUSTIVE_WITNESS_SIZE: usize = 3;

/// Cap on the candidate-by-target work of a syndetic witness search.
pub const SEARCH_WORK_LIMIT: u64 = 2_000_000_000;

/// Cap on the number of candidate tuples tried exhaustively.
const EXHAUSTIVE_TUPLE_LIMIT: u64 = 20_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubKind {
    /// `k N^d ∩ parent`.
    Scaled { k: u32 },
    /// The sub-monoid generated by a list of parent members.
    Generated,
    /// The cone between two integer rays, intersected with the parent.
    Cone { rays: [[u32; 2]; 2] },
}

/// A sub-monoid `H` of a parent semigroup `G`, realised as the intersection
/// of `G` with a shape semigroup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubSemigroupSpec {
    parent: Semigroup,
    kind: SubKind,
    shape: Semigroup,
}

impl SubSemigroupSpec {
    pub fn scaled(parent: &Semigroup, k: u32) -> Result<Self> {
        let shape = Semigroup::scaled_lattice(parent.dim(), k)?;
        Self::build(parent, SubKind::Scaled { k }, shape)
    }

    pub fn generated(parent: &Semigroup, generators: Vec<Element>) -> Result<Self> {
        for g in &generators {
            if !parent.contains(g) {
                return Err(Error::NotMember {
                    element: g.to_string(),
                    semigroup: parent.describe(),
                });
            }
        }
        let shape = Semigroup::generated(generators)?;
        if shape.dim() != parent.dim() {
            return Err(Error::DimensionMismatch {
                expected: parent.dim(),
                got: shape.dim(),
            });
        }
        Self::build(parent, SubKind::Generated, shape)
    }

    pub fn cone(parent: &Semigroup, r1: [u32; 2], r2: [u32; 2]) -> Result<Self> {
        if parent.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: parent.dim(),
            });
        }
        let shape = Semigroup::cone(r1, r2)?;
        let SemigroupKind::Cone { rays } = *shape.kind() else {
            unreachable!()
        };
        Self::build(parent, SubKind::Cone { rays }, shape)
    }

    /// `H = G` itself.
    pub fn whole(parent: &Semigroup) -> Result<Self> {
        Self::scaled(parent, 1)
    }

    fn build(parent: &Semigroup, kind: SubKind, shape: Semigroup) -> Result<Self> {
        let spec = SubSemigroupSpec {
            parent: parent.clone(),
            kind,
            shape,
        };
        spec.verify(VERIFICATION_BOX)?;
        Ok(spec)
    }

    /// Contains 0, closed under addition and contained in the parent, on `Box(n)`.
    pub fn verify(&self, n: u32) -> Result<()> {
        let table = self.membership_table(n);
        let parent = self.parent.membership_table(n);
        let members: Vec<Element> = box_points(self.dim(), n).into_iter().filter(|v| table.get(v)).collect();
        if !table.get(&self.parent.zero()) {
            return Err(Error::InvalidSemigroup(format!("{} does not contain 0", self.describe())));
        }
        for g in &members {
            if !parent.get(g) {
                return Err(Error::InvalidSemigroup(format!("{g} lies outside the parent")));
            }
            for h in &members {
                let s = g.checked_add(h)?;
                if s.max_coord() <= n && !table.get(&s) {
                    return Err(Error::InvalidSemigroup(format!(
                        "{} is not closed under addition: {g} + {h}",
                        self.describe()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn parent(&self) -> &Semigroup {
        &self.parent
    }

    pub fn kind(&self) -> &SubKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.parent.dim()
    }

    pub fn contains(&self, v: &Element) -> bool {
        self.shape.contains(v) && self.parent.contains(v)
    }

    pub fn membership_table(&self, n: u32) -> SubTable {
        SubTable {
            shape: self.shape.membership_table(n),
            parent: self.parent.membership_table(n),
        }
    }

    pub fn members_in_box(&self, n: u32) -> Vec<Element> {
        let t = self.membership_table(n);
        box_points(self.dim(), n).into_iter().filter(|v| t.get(v)).collect()
    }

    /// Generators known without search: valid when the parent is a full lattice.
    pub fn natural_generators(&self) -> Option<Vec<Element>> {
        match (&self.kind, self.parent.kind()) {
            (SubKind::Generated, _) => Some(self.shape.generators().to_vec()),
            (_, SemigroupKind::FullLattice) => Some(self.shape.generators().to_vec()),
            _ if self.shape == self.parent => Some(self.parent.generators().to_vec()),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            SubKind::Scaled { k: 1 } => self.parent.describe(),
            SubKind::Generated => self.shape.describe(),
            _ if matches!(self.parent.kind(), SemigroupKind::FullLattice) => self.shape.describe(),
            _ => format!("{}∩{}", self.shape.describe(), self.parent.describe()),
        }
    }
}

/// Membership of a sub-semigroup over a box.
pub struct SubTable {
    shape: MembershipTable,
    parent: MembershipTable,
}

impl SubTable {
    pub fn bound(&self) -> u32 {
        self.shape.bound()
    }

    pub fn get(&self, v: &Element) -> bool {
        self.shape.get(v) && self.parent.get(v)
    }
}

/// `f^{-1}A = {g in G ∩ Box(n) : f + g in A}`.
pub fn backward_translate(g_sg: &Semigroup, f: &Element, a: &SubSemigroupSpec, n: u32) -> Result<Vec<Element>> {
    if f.dim() != g_sg.dim() || a.dim() != g_sg.dim() {
        return Err(Error::DimensionMismatch {
            expected: g_sg.dim(),
            got: f.dim(),
        });
    }
    let table = a.membership_table(n + f.max_coord());
    g_sg.enumerate_in_box(n)
        .into_iter()
        .map(|g| Ok((g.checked_add(f)?, g)))
        .filter_map(|r: Result<(Element, Element)>| match r {
            Ok((s, g)) => table.get(&s).then_some(Ok(g)),
            Err(e) => Some(Err(e)),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyndeticCertificate {
    pub scale: u32,
    pub translates: Vec<Element>,
    pub holds: bool,
    /// `(g, f)` with `f + g in H`, for every covered `g`.
    pub cover: Vec<(Element, Element)>,
    pub uncovered: Vec<Element>,
}

/// Whether the translates `f^{-1}H`, `f in F`, cover `G ∩ Box(n)`.
pub fn is_syndetic(g_sg: &Semigroup, h: &SubSemigroupSpec, translates: &[Element], n: u32) -> Result<SyndeticCertificate> {
    for f in translates {
        if !g_sg.contains(f) {
            return Err(Error::NotMember {
                element: f.to_string(),
                semigroup: g_sg.describe(),
            });
        }
    }
    let reach = translates.iter().map(|f| f.max_coord()).max().unwrap_or(0);
    let table = h.membership_table(n + reach);
    let mut cover = Vec::new();
    let mut uncovered = Vec::new();
    for g in g_sg.enumerate_in_box(n) {
        let mut found = None;
        for f in translates {
            if table.get(&f.checked_add(&g)?) {
                found = Some(*f);
                break;
            }
        }
        match found {
            Some(f) => cover.push((g, f)),
            None => uncovered.push(g),
        }
    }
    Ok(SyndeticCertificate {
        scale: n,
        translates: translates.to_vec(),
        holds: uncovered.is_empty(),
        cover,
        uncovered,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMethod {
    Exhaustive,
    Greedy,
}

impl SearchMethod {
    pub fn label(&self) -> &'static str {
        match self {
            SearchMethod::Exhaustive => "exhaustive",
            SearchMethod::Greedy => "greedy",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyndeticSearch {
    pub scale: u32,
    pub f_bound: u32,
    pub witness: Option<Vec<Element>>,
    pub method: SearchMethod,
    /// Members of `G ∩ Box(n)` that no candidate translate covers.
    pub uncoverable: usize,
}

/// Finds a smallest `F ⊆ G ∩ Box(f_bound)` whose translates cover
/// `G ∩ Box(n)`: exhaustive for `|F| <= 3`, greedy set cover beyond.
/// `None` means no witness at this scale, not a disproof.
pub fn find_syndetic_witness(g_sg: &Semigroup, h: &SubSemigroupSpec, f_bound: u32, n: u32) -> Result<SyndeticSearch> {
    let candidates = g_sg.enumerate_in_box(f_bound);
    let targets = g_sg.enumerate_in_box(n);
    let work = candidates.len() as u64 * targets.len() as u64;
    if work > SEARCH_WORK_LIMIT {
        return Err(Error::config(
            "f_bound",
            format!("witness search over {work} candidate-target pairs exceeds {SEARCH_WORK_LIMIT}; lower f_bound or the box"),
        ));
    }
    let table = h.membership_table(n + f_bound);
    // distinct coverage sets, each represented by its graded-lex first translate
    let mut sets: Vec<(Element, FixedBitSet)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for f in &candidates {
        let mut bits = FixedBitSet::with_capacity(targets.len());
        for (i, g) in targets.iter().enumerate() {
            if table.get(&f.checked_add(g)?) {
                bits.insert(i);
            }
        }
        if bits.count_ones(..) > 0 && seen.insert(bits.clone()) {
            sets.push((*f, bits));
        }
    }
    let mut union = FixedBitSet::with_capacity(targets.len());
    for (_, b) in &sets {
        union.union_with(b);
    }
    let uncoverable = targets.len() - union.count_ones(..);
    let mut result = SyndeticSearch {
        scale: n,
        f_bound,
        witness: None,
        method: SearchMethod::Exhaustive,
        uncoverable,
    };
    if uncoverable > 0 {
        return Ok(result);
    }
    let full = targets.len();
    for size in 1..=EXHAUSTIVE_WITNESS_SIZE.min(sets.len()) {
        if binomial(sets.len() as u64, size as u64) > EXHAUSTIVE_TUPLE_LIMIT {
            break;
        }
        if let Some(idx) = first_cover(&sets, size, full) {
            let mut witness: Vec<Element> = idx.iter().map(|&i| sets[i].0).collect();
            witness.sort_by(|a, b| a.graded_cmp(b));
            result.witness = Some(witness);
            return Ok(result);
        }
    }
    result.method = SearchMethod::Greedy;
    let mut covered = FixedBitSet::with_capacity(full);
    let mut chosen = Vec::new();
    while covered.count_ones(..) < full {
        let (best, gain) = sets
            .iter()
            .enumerate()
            .map(|(i, (_, b))| (i, b.difference(&covered).count()))
            .fold((0, 0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if gain == 0 {
            return Ok(result);
        }
        covered.union_with(&sets[best].1);
        chosen.push(sets[best].0);
    }
    chosen.sort_by(|a, b| a.graded_cmp(b));
    result.witness = Some(chosen);
    Ok(result)
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Lexicographically first index tuple of the given size covering everything.
fn first_cover(sets: &[(Element, FixedBitSet)], size: usize, full: usize) -> Option<Vec<usize>> {
    fn go(
        sets: &[(Element, FixedBitSet)],
        start: usize,
        left: usize,
        acc: &FixedBitSet,
        picked: &mut Vec<usize>,
        full: usize,
    ) -> bool {
        if left == 0 {
            return acc.count_ones(..) == full;
        }
        for i in start..=sets.len() - left {
            let mut next = acc.clone();
            next.union_with(&sets[i].1);
            picked.push(i);
            if go(sets, i + 1, left - 1, &next, picked, full) {
                return true;
            }
            picked.pop();
        }
        false
    }
    let mut picked = Vec::new();
    let empty = FixedBitSet::with_capacity(full);
    go(sets, 0, size, &empty, &mut picked, full).then_some(picked)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThickCertificate {
    pub p_bound: u32,
    pub holds: bool,
    /// For each requested size `m`, the graded-lex first `p` with `(G ∩ Box(m)) + p ⊆ H`.
    pub witnesses: Vec<(u32, Option<Element>)>,
}

/// Default search bound for witnesses: four times the requested box.
pub fn default_search_bound(n: u32) -> u32 {
    n.saturating_mul(4)
}

/// For each size `m`, searches `p in G ∩ Box(p_bound)` with
/// `(G ∩ Box(m)) + p ⊆ H`. `p_bound` defaults to `4 max(sizes)`.
pub fn is_thick(g_sg: &Semigroup, h: &SubSemigroupSpec, sizes: &[u32], p_bound: Option<u32>) -> Result<ThickCertificate> {
    let top = sizes.iter().copied().max().unwrap_or(0);
    let p_bound = p_bound.unwrap_or_else(|| default_search_bound(top));
    let table = h.membership_table(p_bound + top);
    let ps = g_sg.enumerate_in_box(p_bound);
    let mut witnesses = Vec::new();
    for &m in sizes {
        let block = g_sg.enumerate_in_box(m);
        let mut found = None;
        for p in &ps {
            let mut ok = true;
            for f in &block {
                if !table.get(&f.checked_add(p)?) {
                    ok = false;
                    break;
                }
            }
            if ok {
                found = Some(*p);
                break;
            }
        }
        witnesses.push((m, found));
    }
    Ok(ThickCertificate {
        p_bound,
        holds: witnesses.iter().all(|(_, w)| w.is_some()),
        witnesses,
    })
}

/// An action restricted to a sub-semigroup `H = <h_1, ..., h_m>`,
/// re-coordinatized over `N^m` with generator maps `T_{h_i}`.
#[derive(Clone, Debug)]
pub struct RestrictedAction {
    action: SemigroupAction,
    sub: SubSemigroupSpec,
    generators: Vec<Element>,
}

impl RestrictedAction {
    pub fn action(&self) -> &SemigroupAction {
        &self.action
    }

    pub fn sub(&self) -> &SubSemigroupSpec {
        &self.sub
    }

    pub fn generators(&self) -> &[Element] {
        &self.generators
    }

    /// `c -> sum_i c_i h_i`.
    pub fn embed(&self, c: &Element) -> Result<Element> {
        if c.dim() != self.generators.len() {
            return Err(Error::DimensionMismatch {
                expected: self.generators.len(),
                got: c.dim(),
            });
        }
        let mut out = Element::zero(self.sub.dim())?;
        for (h, &k) in self.generators.iter().zip(c.coords()) {
            out = out.checked_add(&h.scale(k))?;
        }
        Ok(out)
    }

    /// Number of `(c, x)` checks where the restricted evaluation differs from
    /// the parent evaluation at the embedded element, over `c in Box(n)`.
    pub fn consistency_mismatches(&self, parent: &SemigroupAction, n: u32, samples: &[crate::action::Point]) -> Result<usize> {
        let mut bad = 0;
        for c in self.action.semigroup().enumerate_in_box(n) {
            let t = self.action.transform(&c)?;
            let u = parent.transform(&self.embed(&c)?)?;
            for x in samples {
                if t.apply(x)? != u.apply(x)? {
                    bad += 1;
                }
            }
        }
        Ok(bad)
    }
}

/// Restricts `action` to `H` given generators of `H`. The generators are
/// checked to generate `H` on `Box(10)` and each `T_{h_i}` must fit the
/// precision budget.
pub fn restrict_action(action: &SemigroupAction, h: &SubSemigroupSpec, generators: &[Element]) -> Result<RestrictedAction> {
    if h.parent() != action.semigroup() {
        return Err(Error::InvalidSemigroup(format!(
            "{} is not a sub-semigroup of the acting semigroup {}",
            h.describe(),
            action.semigroup().describe()
        )));
    }
    if generators.is_empty() {
        return Err(Error::NotGenerating("empty generator list".into()));
    }
    if generators.len() > crate::semigroup::MAX_DIM {
        return Err(Error::UnsupportedDimension(generators.len()));
    }
    for g in generators {
        if !h.contains(g) {
            return Err(Error::NotGenerating(format!("{g} is not a member of {}", h.describe())));
        }
    }
    let span = Semigroup::generated(generators.to_vec())?;
    let n = VERIFICATION_BOX;
    let expected = h.members_in_box(n);
    let got = span.enumerate_in_box(n);
    if expected != got {
        let missing: Vec<String> = expected.iter().filter(|v| !got.contains(v)).map(|v| v.to_string()).collect();
        return Err(Error::NotGenerating(format!(
            "generators miss {} members of {} in Box({n}), first: {}",
            missing.len(),
            h.describe(),
            missing.first().cloned().unwrap_or_default()
        )));
    }
    let budget = action.precision_bits() - crate::action::PRECISION_GUARD_BITS;
    let mut maps = Vec::new();
    for g in generators {
        let t = action.transform(g)?;
        if t.cost() > budget {
            return Err(Error::PrecisionExhausted {
                required: t.cost(),
                budget,
            });
        }
        maps.push(t);
    }
    let restricted = SemigroupAction::new(
        format!("{}|{}", action.name(), h.describe()),
        Semigroup::full_lattice(generators.len())?,
        maps,
        action.space().clone(),
        action.measure().clone(),
    )?;
    Ok(RestrictedAction {
        action: restricted,
        sub: h.clone(),
        generators: generators.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::{catalog, Point};
    use crate::rng::domain;

    fn el(c: &[u32]) -> Element {
        Element::new(c).unwrap()
    }

    fn nat() -> Semigroup {
        Semigroup::full_lattice(1).unwrap()
    }

    fn plane() -> Semigroup {
        Semigroup::full_lattice(2).unwrap()
    }

    fn below_diagonal() -> SubSemigroupSpec {
        SubSemigroupSpec::cone(&plane(), [1, 0], [1, 1]).unwrap()
    }

    #[test]
    fn sub_semigroup_construction() {
        let h = SubSemigroupSpec::scaled(&nat(), 3).unwrap();
        assert!(h.contains(&el(&[9])) && !h.contains(&el(&[4])));
        let cone = below_diagonal();
        assert!(cone.contains(&el(&[3, 2])) && !cone.contains(&el(&[2, 3])));
        assert_eq!(cone.natural_generators().unwrap(), vec![el(&[1, 0]), el(&[1, 1])]);
        let even = Semigroup::scaled_lattice(1, 2).unwrap();
        assert!(matches!(
            SubSemigroupSpec::generated(&even, vec![el(&[3])]),
            Err(Error::NotMember { .. })
        ));
        let six = SubSemigroupSpec::scaled(&even, 3).unwrap();
        assert_eq!(six.members_in_box(13), vec![el(&[0]), el(&[6]), el(&[12])]);
        assert!(six.natural_generators().is_none());
        assert!(SubSemigroupSpec::cone(&nat(), [1, 0], [1, 1]).is_err());
    }

    #[test]
    fn backward_translate_examples() {
        let h = SubSemigroupSpec::scaled(&nat(), 3).unwrap();
        let v = backward_translate(&nat(), &el(&[2]), &h, 10).unwrap();
        assert_eq!(v, vec![el(&[1]), el(&[4]), el(&[7]), el(&[10])]);
        let v = backward_translate(&nat(), &el(&[0]), &h, 9).unwrap();
        assert_eq!(v, vec![el(&[0]), el(&[3]), el(&[6]), el(&[9])]);
        // b + 2 <= a inside Box(3)
        let v = backward_translate(&plane(), &el(&[0, 2]), &below_diagonal(), 3).unwrap();
        assert_eq!(v, vec![el(&[2, 0]), el(&[3, 0]), el(&[3, 1])]);
        for g in &v {
            assert!(below_diagonal().contains(&g.checked_add(&el(&[0, 2])).unwrap()));
        }
    }

    #[test]
    fn syndetic_examples() {
        for k in 1..=6u32 {
            let h = SubSemigroupSpec::scaled(&nat(), k).unwrap();
            let f: Vec<Element> = (0..k).map(|i| el(&[i])).collect();
            let cert = is_syndetic(&nat(), &h, &f, 200).unwrap();
            assert!(cert.holds);
            for (g, f) in &cert.cover {
                assert!(h.contains(&g.checked_add(f).unwrap()));
            }
        }
        let f: Vec<Element> = box_points(2, 10);
        let cert = is_syndetic(&plane(), &below_diagonal(), &f, 100).unwrap();
        assert!(!cert.holds);
        assert!(cert.uncovered.contains(&el(&[0, 11])));
        assert!(is_syndetic(&nat(), &SubSemigroupSpec::whole(&nat()).unwrap(), &[el(&[0])], 50).unwrap().holds);
    }

    #[test]
    fn witness_search_examples() {
        let h = SubSemigroupSpec::scaled(&nat(), 3).unwrap();
        let s = find_syndetic_witness(&nat(), &h, 40, 100).unwrap();
        assert_eq!(s.witness, Some(vec![el(&[0]), el(&[1]), el(&[2])]));
        assert_eq!(s.method, SearchMethod::Exhaustive);
        let s = find_syndetic_witness(&plane(), &SubSemigroupSpec::whole(&plane()).unwrap(), 10, 20).unwrap();
        assert_eq!(s.witness, Some(vec![el(&[0, 0])]));
        let s = find_syndetic_witness(&plane(), &below_diagonal(), 10, 100).unwrap();
        assert_eq!(s.witness, None);
        assert!(s.uncoverable > 0);
        let h = SubSemigroupSpec::scaled(&nat(), 7).unwrap();
        let s = find_syndetic_witness(&nat(), &h, 28, 300).unwrap();
        assert_eq!(s.method, SearchMethod::Greedy);
        assert_eq!(s.witness.unwrap().len(), 7);
    }

    #[test]
    fn thick_examples() {
        let cone = below_diagonal();
        let sizes: Vec<u32> = (0..=12).collect();
        let cert = is_thick(&plane(), &cone, &sizes, None).unwrap();
        assert!(cert.holds);
        for (m, p) in &cert.witnesses {
            assert_eq!(*p, Some(el(&[*m, 0])));
        }
        let h = SubSemigroupSpec::scaled(&nat(), 2).unwrap();
        let cert = is_thick(&nat(), &h, &[1], None).unwrap();
        assert!(!cert.holds);
        let cert = is_thick(&nat(), &SubSemigroupSpec::whole(&nat()).unwrap(), &[0, 5], None).unwrap();
        assert!(cert.holds);
        assert_eq!(cert.witnesses[1].1, Some(el(&[0])));
    }

    fn samples(action: &SemigroupAction) -> Vec<Point> {
        (0..8).map(|i| action.sample(4, domain::MISC, i).unwrap()).collect()
    }

    #[test]
    fn restriction_examples() {
        let dbl = catalog::doubling(256).unwrap();
        let even = SubSemigroupSpec::scaled(&nat(), 2).unwrap();
        let r = restrict_action(&dbl, &even, &[el(&[2])]).unwrap();
        assert_eq!(r.action().generators(), catalog::circle_map(4, "0", 256).unwrap().generators());
        assert_eq!(r.consistency_mismatches(&dbl, 40, &samples(&dbl)).unwrap(), 0);

        let alpha = "0.41421356237309504880168872420969807856967187537694";
        let plane_sys = catalog::doubling_rotation_plane(alpha, 256).unwrap();
        let diag = SubSemigroupSpec::generated(&plane(), vec![el(&[1, 1])]).unwrap();
        let r = restrict_action(&plane_sys, &diag, &[el(&[1, 1])]).unwrap();
        assert_eq!(
            r.action().generators(),
            catalog::doubling_times_rotation(alpha, 256).unwrap().generators()
        );

        let ns = SubSemigroupSpec::generated(&nat(), vec![el(&[3]), el(&[5])]).unwrap();
        let r = restrict_action(&dbl, &ns, &[el(&[3]), el(&[5])]).unwrap();
        let x = dbl.sample(1, domain::MISC, 0).unwrap();
        let via_restriction = r.action().apply(&el(&[1, 1]), &x).unwrap();
        let mut direct = x.clone();
        for _ in 0..8 {
            direct = dbl.apply(&el(&[1]), &direct).unwrap();
        }
        assert_eq!(via_restriction, direct);
        assert_eq!(r.consistency_mismatches(&dbl, 10, &samples(&dbl)).unwrap(), 0);

        let tt = catalog::doubling_tripling(256).unwrap();
        let r = restrict_action(&tt, &below_diagonal(), &[el(&[1, 0]), el(&[1, 1])]).unwrap();
        assert_eq!(r.consistency_mismatches(&tt, 12, &samples(&tt)).unwrap(), 0);
        assert_eq!(r.embed(&el(&[2, 3])).unwrap(), el(&[5, 3]));
    }

    #[test]
    fn restriction_errors() {
        let dbl = catalog::doubling(256).unwrap();
        let three = SubSemigroupSpec::scaled(&nat(), 3).unwrap();
        assert!(matches!(restrict_action(&dbl, &three, &[el(&[6])]), Err(Error::NotGenerating(_))));
        assert!(matches!(restrict_action(&dbl, &three, &[el(&[4])]), Err(Error::NotGenerating(_))));
        let tt = catalog::doubling_tripling(256).unwrap();
        assert!(matches!(
            restrict_action(&tt, &below_diagonal(), &[el(&[1, 0]), el(&[2, 2])]),
            Err(Error::NotGenerating(_))
        ));
        let small = catalog::doubling(64).unwrap();
        assert!(matches!(
            restrict_action(&small, &SubSemigroupSpec::scaled(&nat(), 40).unwrap(), &[el(&[40])]),
            Err(Error::PrecisionExhausted { .. })
        ));
    }
}
