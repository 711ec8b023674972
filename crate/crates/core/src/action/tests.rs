use super::*;
use crate::metric::MetricSpec;
use proptest::prelude::*;

const ALPHA: &str = "0.41421356237309504880168872420969807856967187537694";

fn el(c: &[u32]) -> Element {
    Element::new(c).unwrap()
}

fn circle(s: &str) -> Point {
    Point::circle_literal(s, 256).unwrap()
}

#[test]
fn doubling_sends_one_third_to_two_thirds() {
    let dbl = catalog::doubling(256).unwrap();
    let y = dbl.apply(&el(&[1]), &circle("1/3")).unwrap();
    // 1/3 = 0.0101..., doubling drops one digit
    let Point::Torus { coords, consumed } = &y else { panic!() };
    assert_eq!(*consumed, 1);
    assert!((coords[0].to_f64() - 2.0 / 3.0).abs() < 1e-15);
    let twice = dbl.apply(&el(&[2]), &circle("1/3")).unwrap();
    assert!((twice.approx()[0] - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn zero_acts_as_identity() {
    let rot = catalog::rotation(ALPHA, 256).unwrap();
    let x = circle("0.123");
    assert_eq!(rot.apply(&el(&[0]), &x).unwrap(), x);
    let tt = catalog::doubling_tripling(256).unwrap();
    assert_eq!(tt.apply(&el(&[0, 0]), &x).unwrap(), x);
}

#[test]
fn product_map_closed_form() {
    let sys = catalog::doubling_times_rotation(ALPHA, 256).unwrap();
    let x = Point::pair(circle("1/5"), circle("0.1"));
    let two = sys.apply(&el(&[2]), &x).unwrap();
    let once = sys.apply(&el(&[1]), &x).unwrap();
    assert_eq!(two, sys.apply(&el(&[1]), &once).unwrap());
    let v = two.approx();
    let alpha: f64 = ALPHA.parse().unwrap();
    assert!((v[0] - 0.8).abs() < 1e-15);
    assert!((v[1] - (0.1 + 2.0 * alpha).fract()).abs() < 1e-15);
}

#[test]
fn precision_budget_is_enforced() {
    let dbl = catalog::doubling(64).unwrap();
    let x = Point::circle_literal("0.3", 64).unwrap();
    assert!(dbl.apply(&el(&[32]), &x).is_ok());
    assert_eq!(
        dbl.apply(&el(&[33]), &x),
        Err(Error::PrecisionExhausted { required: 33, budget: 32 })
    );
    // consumption accumulates across applications
    let y = dbl.apply(&el(&[20]), &x).unwrap();
    assert!(matches!(dbl.apply(&el(&[13]), &y), Err(Error::PrecisionExhausted { .. })));
    // x3 costs two digits per step
    let triple = catalog::circle_map(3, "0", 64).unwrap();
    assert!(triple.apply(&el(&[16]), &x).is_ok());
    assert!(triple.apply(&el(&[17]), &x).is_err());
    assert!(dbl.check_budget(32).is_ok());
    assert!(dbl.check_budget(33).is_err());
    // isometries never run out
    let rot = catalog::rotation(ALPHA, 64).unwrap();
    assert!(rot.apply(&el(&[1_000_000]), &x).is_ok());
}

#[test]
fn non_members_are_rejected() {
    let space = StateSpace::circle(256).unwrap();
    let even = SemigroupAction::new(
        "even-doubling",
        Semigroup::scaled_lattice(1, 2).unwrap(),
        vec![GeneratorMap::circle(2, Fixed::zero(256).unwrap()).unwrap()],
        space,
        MeasureSpec::Haar,
    )
    .unwrap();
    let x = circle("0.3");
    assert!(matches!(even.apply(&el(&[3]), &x), Err(Error::NotMember { .. })));
    assert!(even.apply(&el(&[4]), &x).is_ok());
    assert!(matches!(even.apply(&el(&[1, 1]), &x), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn construction_validates_inputs() {
    let space = StateSpace::circle(256).unwrap();
    let zero = Fixed::zero(256).unwrap();
    let beta = fixed::parse_fraction("0.1", 256).unwrap();
    let err = SemigroupAction::new(
        "bad",
        Semigroup::full_lattice(2).unwrap(),
        vec![GeneratorMap::circle(2, zero).unwrap(), GeneratorMap::circle(1, beta).unwrap()],
        space.clone(),
        MeasureSpec::Haar,
    );
    assert!(matches!(err, Err(Error::NonCommuting(_))));
    let err = SemigroupAction::new(
        "bad",
        Semigroup::full_lattice(2).unwrap(),
        vec![GeneratorMap::circle(2, zero).unwrap()],
        space.clone(),
        MeasureSpec::Haar,
    );
    assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    let err = SemigroupAction::new(
        "bad",
        Semigroup::full_lattice(1).unwrap(),
        vec![GeneratorMap::shift(1)],
        space.clone(),
        MeasureSpec::Haar,
    );
    assert!(matches!(err, Err(Error::SpaceMismatch(_))));
    let err = SemigroupAction::new(
        "bad",
        Semigroup::full_lattice(1).unwrap(),
        vec![GeneratorMap::circle(2, zero).unwrap()],
        space,
        MeasureSpec::Bernoulli(0.5),
    );
    assert!(matches!(err, Err(Error::SpaceMismatch(_))));
    assert!(StateSpace::circle(100).is_err());
    assert!(StateSpace::torus(5, 256).is_err());
}

#[test]
fn sampling_is_reproducible_and_in_range() {
    let space = StateSpace::circle(256).unwrap();
    let a = sample_seeded(&space, &MeasureSpec::Haar, 9, domain::MISC, 4).unwrap();
    let b = sample_seeded(&space, &MeasureSpec::Haar, 9, domain::MISC, 4).unwrap();
    let c = sample_seeded(&space, &MeasureSpec::Haar, 10, domain::MISC, 4).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    let v = a.approx()[0];
    assert!((0.0..1.0).contains(&v));

    let shift = StateSpace::shift(256).unwrap();
    let w = sample_seeded(&shift, &MeasureSpec::Bernoulli(0.5), 1, domain::MISC, 0).unwrap();
    assert!(w.belongs_to(&shift));
    // a biased measure puts about p of the digits to 1
    let biased = sample_seeded(&shift, &MeasureSpec::Bernoulli(0.9), 1, domain::MISC, 0).unwrap();
    let Point::Shift { word, .. } = biased else { panic!() };
    let ones = (0..256).filter(|&i| word.bit(i)).count();
    assert!(ones > 200, "{ones}");

    let prod = StateSpace::product(space.clone(), shift.clone());
    let m = MeasureSpec::default_for(&prod);
    let p = sample_seeded(&prod, &m, 3, domain::MISC, 0).unwrap();
    assert!(p.belongs_to(&prod));
    assert!(p.component(1).unwrap().belongs_to(&space));
    assert!(sample_seeded(&prod, &MeasureSpec::Haar, 3, domain::MISC, 0).is_err());
}

#[test]
fn measure_is_preserved_in_histogram() {
    for (action, g) in [
        (catalog::doubling(256).unwrap(), el(&[3])),
        (catalog::rotation(ALPHA, 256).unwrap(), el(&[17])),
        (catalog::bernoulli_shift(0.5, 256).unwrap(), el(&[5])),
        (catalog::doubling_times_rotation(ALPHA, 256).unwrap(), el(&[2])),
        (catalog::doubling_tripling(256).unwrap(), el(&[2, 3])),
    ] {
        let h = nonsingularity_proxy(&action, &g, 10_000, 1).unwrap();
        assert!(h.passed, "{}: z = {}", action.name(), h.max_z);
        assert_eq!(h.pushed.iter().sum::<u64>(), 10_000);
    }
}

#[test]
fn orbit_density_examples() {
    let arc = MetricSpec::Arc;
    let x = circle("0");
    let rot = catalog::rotation(ALPHA, 256).unwrap();
    assert_eq!(orbit_tail_density(&rot, &arc, &x, &el(&[0]), 500, 0.05).unwrap(), 1.0);
    let id = catalog::identity_circle(256).unwrap();
    let d = orbit_tail_density(&id, &arc, &x, &el(&[0]), 10, 0.05).unwrap();
    // grid points i/1024 with |i| < 51.2
    assert_eq!(d, 103.0 / 1024.0);
    let dbl = catalog::doubling(256).unwrap();
    let d = orbit_tail_density(&dbl, &arc, &circle("1/3"), &el(&[0]), 100, 0.05).unwrap();
    assert!(d < 0.25, "{d}");
    assert!(orbit_tail_density(&rot, &arc, &x, &el(&[0]), 5, 0.0).is_err());
}

#[test]
fn reference_grid_sizes() {
    assert_eq!(reference_grid(&StateSpace::circle(64).unwrap(), 1024).unwrap().len(), 1024);
    assert_eq!(reference_grid(&StateSpace::torus(2, 64).unwrap(), 1024).unwrap().len(), 1024);
    assert_eq!(reference_grid(&StateSpace::torus(3, 64).unwrap(), 1024).unwrap().len(), 1000);
    assert_eq!(reference_grid(&StateSpace::shift(64).unwrap(), 1024).unwrap().len(), 1024);
    let prod = StateSpace::product(StateSpace::circle(64).unwrap(), StateSpace::shift(64).unwrap());
    assert_eq!(reference_grid(&prod, 1024).unwrap().len(), 1024);
}

#[test]
fn convergents_of_silver_ratio_part() {
    assert_eq!(
        convergent_denominators(ALPHA, 100_000).unwrap(),
        vec![1, 2, 5, 12, 29, 70, 169, 408, 985, 2378, 5741, 13860, 33461, 80782]
    );
    assert_eq!(convergent_denominators("3/8", 100).unwrap(), vec![1, 2, 3, 8]);
}

#[test]
fn rigidity_examples() {
    let arc = MetricSpec::Arc;
    let id = catalog::identity_circle(256).unwrap();
    let sched = id.semigroup().cofinal_schedule(5).unwrap();
    assert!(uniform_rigidity_probe(&id, &arc, &sched, 50, 1).unwrap().iter().all(|&v| v == 0.0));

    let rot = catalog::rotation(ALPHA, 256).unwrap();
    let dens: Vec<Element> = convergent_denominators(ALPHA, 10_000)
        .unwrap()
        .into_iter()
        .map(|q| el(&[q as u32]))
        .collect();
    let probe = uniform_rigidity_probe(&rot, &arc, &dens, 50, 1).unwrap();
    let alpha: f64 = ALPHA.parse().unwrap();
    for (v, q) in probe.iter().zip(&dens) {
        let t = q.coords()[0] as f64 * alpha;
        assert!((v - (t - t.round()).abs()).abs() < 1e-12);
    }
    assert!(probe.windows(2).all(|w| w[1] < w[0]));
    assert!(*probe.last().unwrap() < 1e-3);

    let dbl = catalog::doubling(256).unwrap();
    let probe = uniform_rigidity_probe(&dbl, &arc, &dbl.semigroup().cofinal_schedule(5).unwrap(), 50, 1).unwrap();
    assert!(probe.iter().all(|&v| v > 0.4));

    assert!(uniform_rigidity_probe(&rot, &arc, &[], 10, 1).is_err());
}

#[test]
fn return_records_of_rotation_are_convergents() {
    let rot = catalog::rotation(ALPHA, 256).unwrap();
    let records = return_time_records(&rot, &MetricSpec::Arc, 1000, 8, 1).unwrap();
    let times: Vec<u64> = records.iter().map(|r| r.element.coords()[0] as u64).collect();
    assert_eq!(times, convergent_denominators(ALPHA, 1000).unwrap());
}

#[test]
fn factors_of_the_product() {
    let sys = catalog::doubling_times_rotation(ALPHA, 256).unwrap();
    let f2 = factor_project(&sys, 2).unwrap();
    let rot = catalog::rotation(ALPHA, 256).unwrap();
    assert_eq!(f2.generators(), rot.generators());
    assert_eq!(f2.space(), rot.space());
    assert_eq!(f2.measure(), &MeasureSpec::Haar);
    let f1 = factor_project(&sys, 1).unwrap();
    assert_eq!(f1.generators(), catalog::doubling(256).unwrap().generators());
    // the projection intertwines the actions
    let x = sys.sample(2, domain::MISC, 0).unwrap();
    let g = el(&[7]);
    let moved = sys.apply(&g, &x).unwrap();
    assert_eq!(moved.component(2).unwrap(), &f2.apply(&g, x.component(2).unwrap()).unwrap());
    assert!(factor_project(&rot, 1).is_err());
    assert!(factor_project(&sys, 3).is_err());
}

fn arb_system() -> impl Strategy<Value = usize> {
    0usize..5
}

fn system(i: usize) -> SemigroupAction {
    match i {
        0 => catalog::doubling(256).unwrap(),
        1 => catalog::rotation(ALPHA, 256).unwrap(),
        2 => catalog::bernoulli_shift(0.5, 256).unwrap(),
        3 => catalog::doubling_rotation_plane(ALPHA, 256).unwrap(),
        _ => catalog::doubling_tripling(256).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn homomorphism_law(sys in arb_system(), a in prop::array::uniform2(0u32..=5), b in prop::array::uniform2(0u32..=5), idx in 0u64..1000) {
        let action = system(sys);
        let d = action.semigroup().dim();
        let g = Element::new(&a[..d]).unwrap();
        let h = Element::new(&b[..d]).unwrap();
        let x = action.sample(5, domain::MISC, idx).unwrap();
        let direct = action.apply(&g.checked_add(&h).unwrap(), &x).unwrap();
        let stepwise = action.apply(&g, &action.apply(&h, &x).unwrap()).unwrap();
        prop_assert_eq!(direct, stepwise);
    }

    #[test]
    fn generators_commute_pointwise(a in 0u32..=5, b in 0u32..=5, idx in 0u64..1000) {
        let action = catalog::doubling_tripling(256).unwrap();
        let x = action.sample(6, domain::MISC, idx).unwrap();
        let ab = action.apply(&el(&[a, 0]), &action.apply(&el(&[0, b]), &x).unwrap()).unwrap();
        let ba = action.apply(&el(&[0, b]), &action.apply(&el(&[a, 0]), &x).unwrap()).unwrap();
        prop_assert_eq!(ab, ba);
    }
}
