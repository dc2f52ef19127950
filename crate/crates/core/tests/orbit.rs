use kothe::gallery::builtin;
use kothe::orbit::{
    hypercyclic_candidate, periodic_approximant, replay, return_set, transitivity_witness, Coordinates, Witness,
    WitnessRecord,
};
use kothe::{Error, RatVector, Rational};

fn e(j: usize) -> RatVector {
    RatVector::basis(j).unwrap()
}

fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

#[test]
fn transitivity_on_power_series_replays_exactly() {
    let spec = builtin("power-series-dual(j)").unwrap();
    let rec = transitivity_witness(&e(1), &e(1), &spec, 1, 0.0).unwrap();
    assert_eq!(rec.coordinates, Coordinates::Original);
    let Witness::Transitivity { n, log_norm, .. } = &rec.witness else { panic!() };
    assert!(*n >= 1 && *log_norm < 0.0);
    replay(&rec, &spec).unwrap();
    let back = WitnessRecord::from_json(&rec.to_json()).unwrap();
    assert_eq!(back, rec);
    replay(&back, &spec).unwrap();
}

#[test]
fn transitivity_with_richer_vectors() {
    let spec = builtin("prop4-2").unwrap();
    let x = RatVector::from_entries([(1, ratio(3, 2)), (2, ratio(-1, 5))]).unwrap();
    let y = RatVector::from_entries([(1, ratio(1, 7)), (3, ratio(2, 1))]).unwrap();
    let rec = transitivity_witness(&x, &y, &spec, 2, (0.25f64).ln()).unwrap();
    replay(&rec, &spec).unwrap();
}

#[test]
fn constant_family_has_no_transitivity_witness() {
    let spec = builtin("constant").unwrap();
    let err = transitivity_witness(&e(1), &e(1), &spec, 1, -1.0).unwrap_err();
    assert!(matches!(err, Error::WitnessNotFound(_)), "{err}");
}

#[test]
fn tampered_transitivity_is_rejected() {
    let spec = builtin("power-series-dual(j)").unwrap();
    let mut rec = transitivity_witness(&e(1), &e(1), &spec, 1, 0.0).unwrap();
    if let Witness::Transitivity { n, .. } = &mut rec.witness {
        *n += 1;
    }
    assert!(replay(&rec, &spec).is_err());
}

#[test]
fn return_set_on_prop41_is_syndetic() {
    let spec = builtin("prop4-1").unwrap();
    let rec = return_set(&e(1), &e(1), -4.0 * std::f64::consts::LN_2, &spec, 1, 1 << 12).unwrap();
    let Witness::ReturnSet { members, gap, .. } = &rec.witness else { panic!() };
    assert!(!members.is_empty());
    assert!(gap.is_some());
    replay(&rec, &spec).unwrap();
}

#[test]
fn periodic_point_on_power_series() {
    let spec = builtin("power-series-dual(j)").unwrap();
    let rec = periodic_approximant(2, &spec, 1, (0.01f64).ln()).unwrap();
    let Witness::Periodic { period, log_bound, .. } = &rec.witness else { panic!() };
    assert!(*period > 2 && *log_bound < (0.01f64).ln());
    replay(&rec, &spec).unwrap();
}

#[test]
fn periodic_point_requires_certified_chaos() {
    let spec = builtin("prop4-1").unwrap();
    assert!(matches!(periodic_approximant(1, &spec, 1, -1.0), Err(Error::Precondition(_))));
}

#[test]
fn hypercyclic_candidate_hits_each_target() {
    let spec = builtin("power-series-dual(j)").unwrap();
    let targets = vec![e(1), e(2), RatVector::from_entries([(1, ratio(1, 2)), (2, ratio(1, 3))]).unwrap()];
    let tol = (0.1f64).ln();
    let rec = hypercyclic_candidate(&targets, &spec, 1, tol).unwrap();
    let Witness::HypercyclicCandidate { log_distances, iterates, .. } = &rec.witness else { panic!() };
    assert_eq!(iterates[0], 0);
    assert!(iterates.windows(2).all(|w| w[0] < w[1]));
    assert!(log_distances.iter().all(|&d| d < tol), "{log_distances:?}");
    replay(&rec, &spec).unwrap();
}

#[test]
fn annihilation_uses_transported_coordinates() {
    let spec = builtin("annihilation").unwrap();
    let rec = transitivity_witness(&e(1), &e(2), &spec, 1, -1.0).unwrap();
    assert_eq!(rec.coordinates, Coordinates::Transported);
    replay(&rec, &spec).unwrap();
}
