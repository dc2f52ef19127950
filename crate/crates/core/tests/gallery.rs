use std::time::Instant;

use kothe::classifier::{recheck, Property};
use kothe::gallery::{canonical_names, run_expectations};

#[test]
fn every_entry_matches_its_expectations() {
    for name in canonical_names() {
        let t = Instant::now();
        let run = run_expectations(&name).unwrap();
        eprintln!("{name}: {:?}", t.elapsed());
        for p in Property::ALL {
            let v = run.report.verdict(p);
            eprintln!("  {p}: {} {}", v.status, v.note.clone().unwrap_or_default());
        }
        assert!(run.passed(), "{name}: {:?} {:?}", run.mismatches, run.report.lattice_violations);
        recheck(&run.report, &kothe::gallery::builtin(&name).unwrap()).unwrap();
    }
}

#[test]
fn nuclear_ergodic_search_reports_without_claiming() {
    use kothe::gallery::search_nuclear_ergodic;
    use kothe::Window;
    let window = Window { levels: 4, grades: 4, n: 1 << 10 };
    let a = search_nuclear_ergodic(0..12, window).unwrap();
    assert_eq!(a.examined, 12);
    assert!(a.candidates.iter().all(|h| h.is_candidate()));
    assert!(a.near.iter().all(|h| h.is_near() && !h.is_candidate()));
    assert_eq!(a, search_nuclear_ergodic(0..12, window).unwrap());
}
