//! Fast property checks of the whole pipeline, run by `wmsens selftest`.

use rand::Rng;

use crate::action::{catalog, Point, SemigroupAction};
use crate::error::Result;
use crate::metric::{dg_truncated, MetricSpec};
use crate::oracle;
use crate::rng::{domain, stream_rng};
use crate::semigroup::{box_points, Element, Semigroup};
use crate::sensitivity::{estimate_sensitivity_constant, SensitivityConfig};
use crate::subsemigroup::{is_syndetic, is_thick, restrict_action, SubSemigroupSpec};

const ALPHA: &str = "0.41421356237309504880168872420969807856967187537694";

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn record(&mut self, name: &'static str, outcome: Result<(bool, String)>) {
        let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        self.checks.push(Check { name, passed, detail });
    }
}

fn membership_against_oracle(seed: u64) -> Result<(bool, String)> {
    let mut rng = stream_rng(seed, domain::MISC, 0);
    let n = 40;
    let mut bad = 0;
    for _ in 0..20 {
        let dim = rng.gen_range(1..=2);
        let count = rng.gen_range(1..=3);
        let gens: Vec<Element> = (0..count)
            .map(|_| loop {
                let c: Vec<u32> = (0..dim).map(|_| rng.gen_range(0..=7)).collect();
                if c.iter().any(|&v| v > 0) {
                    break Element::new(&c);
                }
            })
            .collect::<Result<_>>()?;
        let sg = Semigroup::generated(gens.clone())?;
        let table = sg.membership_table(n);
        let span = oracle::span_in_box(&gens, n);
        bad += box_points(dim, n)
            .iter()
            .filter(|v| table.get(v) != span.contains(v.coords()))
            .count();
    }
    Ok((bad == 0, format!("{bad} disagreements over 20 generator sets on Box({n})")))
}

fn order_axioms() -> Result<(bool, String)> {
    let mut bad = 0;
    for sg in [
        Semigroup::full_lattice(2)?,
        Semigroup::scaled_lattice(2, 3)?,
        Semigroup::cone([1, 0], [1, 1])?,
        Semigroup::generated(vec![Element::new(&[2])?, Element::new(&[3])?])?,
    ] {
        let pts = sg.enumerate_in_box(5);
        for a in &pts {
            bad += usize::from(!sg.leq(a, a));
            for b in &pts {
                bad += usize::from(a != b && sg.leq(a, b) && sg.leq(b, a));
                for c in &pts {
                    bad += usize::from(sg.leq(a, b) && sg.leq(b, c) && !sg.leq(a, c));
                }
            }
        }
    }
    Ok((bad == 0, format!("{bad} violations of reflexivity, antisymmetry or transitivity")))
}

fn homomorphism_law(seed: u64) -> Result<(bool, String)> {
    let systems = [
        catalog::doubling(256)?,
        catalog::rotation(ALPHA, 256)?,
        catalog::bernoulli_shift(0.5, 256)?,
        catalog::doubling_tripling(256)?,
    ];
    let mut rng = stream_rng(seed, domain::MISC, 1);
    let mut bad = 0;
    for action in &systems {
        let d = action.semigroup().dim();
        for i in 0..50 {
            let g = Element::new(&(0..d).map(|_| rng.gen_range(0..6)).collect::<Vec<_>>())?;
            let h = Element::new(&(0..d).map(|_| rng.gen_range(0..6)).collect::<Vec<_>>())?;
            let x = action.sample(seed, domain::MISC, i)?;
            let lhs = action.apply(&g.checked_add(&h)?, &x)?;
            let rhs = action.apply(&g, &action.apply(&h, &x)?)?;
            bad += usize::from(lhs != rhs);
        }
    }
    Ok((bad == 0, format!("{bad} failures of T_(g+h) = T_g T_h over 200 draws")))
}

fn truncated_metric(seed: u64) -> Result<(bool, String)> {
    let action = catalog::doubling(256)?;
    let m = MetricSpec::Arc;
    let mut bad = 0;
    for i in 0..100 {
        let p: Vec<Point> = (0..3).map(|j| action.sample(seed, domain::MISC, 3 * i + j)).collect::<Result<_>>()?;
        let d = |a: &Point, b: &Point, n| dg_truncated(&action, &m, a, b, n);
        bad += usize::from(d(&p[0], &p[2], 20)? > d(&p[0], &p[1], 20)? + d(&p[1], &p[2], 20)?);
        bad += usize::from(d(&p[0], &p[1], 10)? > d(&p[0], &p[1], 20)?);
    }
    Ok((bad == 0, format!("{bad} triangle or monotonicity failures over 100 triples")))
}

fn doubling_digits(seed: u64) -> Result<(bool, String)> {
    let action = catalog::doubling(256)?;
    let mut bad = 0;
    for i in 0..200 {
        let x = action.sample(seed, domain::MISC, 2 * i)?;
        let y = action.sample(seed, domain::MISC, 2 * i + 1)?;
        let (Point::Torus { coords: cx, .. }, Point::Torus { coords: cy, .. }) = (&x, &y) else {
            unreachable!("circle points")
        };
        let numeric = dg_truncated(&action, &MetricSpec::Arc, &x, &y, 6)? >= 0.25;
        bad += usize::from(numeric != oracle::doubling_separates(&cx[0], &cy[0], 6));
    }
    Ok((bad == 0, format!("{bad} of 200 pairs disagree with the digit rule")))
}

fn largeness() -> Result<(bool, String)> {
    let nat = Semigroup::full_lattice(1)?;
    let mut ok = true;
    for k in 1..=5 {
        let h = SubSemigroupSpec::scaled(&nat, k)?;
        ok &= is_syndetic(&nat, &h, &nat.enumerate_in_box(k - 1), 200)?.holds;
        ok &= k == 1 || !is_thick(&nat, &h, &[1], None)?.holds;
    }
    let plane = Semigroup::full_lattice(2)?;
    let cone = SubSemigroupSpec::cone(&plane, [1, 0], [1, 1])?;
    let cert = is_thick(&plane, &cone, &[1, 5, 10], None)?;
    ok &= cert.holds;
    Ok((ok, format!("kN syndetic and not thick for k <= 5; cone thick: {}", cert.holds)))
}

fn restriction_consistency(seed: u64) -> Result<(bool, String)> {
    let action = catalog::doubling_tripling(256)?;
    let cone = SubSemigroupSpec::cone(action.semigroup(), [1, 0], [1, 1])?;
    let gens = cone.natural_generators().unwrap_or_default();
    let r = restrict_action(&action, &cone, &gens)?;
    let xs: Vec<Point> = (0..8).map(|i| action.sample(seed, domain::MISC, i)).collect::<Result<_>>()?;
    let bad = r.consistency_mismatches(&action, 6, &xs)?;
    Ok((bad == 0, format!("{bad} mismatches restricting to the cone")))
}

fn thread_independence(seed: u64) -> Result<(bool, String)> {
    let action: SemigroupAction = catalog::doubling(256)?;
    let cfg = SensitivityConfig {
        box_schedule: vec![10, 20],
        n_x: 6,
        n_y: 40,
        seed,
        ..SensitivityConfig::default()
    };
    let run = |threads| -> Result<_> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| crate::Error::config("threads", e.to_string()))?;
        pool.install(|| estimate_sensitivity_constant(&action, &MetricSpec::Arc, &cfg))
    };
    let same = run(1)? == run(4)?;
    Ok((same, format!("estimator output identical on 1 and 4 threads: {same}")))
}

pub fn run_selftest(seed: u64) -> SelftestReport {
    let mut r = SelftestReport::default();
    r.record("membership-vs-brute-force", membership_against_oracle(seed));
    r.record("order-axioms", order_axioms());
    r.record("homomorphism-law", homomorphism_law(seed));
    r.record("truncated-metric", truncated_metric(seed));
    r.record("doubling-digit-rule", doubling_digits(seed));
    r.record("largeness", largeness());
    r.record("restriction-consistency", restriction_consistency(seed));
    r.record("thread-independence", thread_independence(seed));
    r
}

#[cfg(test)]
mod tests {
    #[test]
    fn selftest_passes() {
        let r = super::run_selftest(5);
        for c in &r.checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
        assert_eq!(r.checks.len(), 8);
    }
}
