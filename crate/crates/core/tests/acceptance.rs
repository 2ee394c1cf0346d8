//! One line per acceptance criterion. A criterion that cannot hold as stated is
//! reported as FAIL; the test still requires its outcome to match the recorded analysis.

use voa_engine::selftest::run_criterion;

#[test]
fn acceptance() {
    let results: Vec<_> = (1..=12).map(|id| {
        let r = run_criterion(id);
        println!("{}", r.line());
        r
    }).collect();
    let passed = results.iter().filter(|r| r.passed).count();
    println!("acceptance: {passed}/12 pass as stated");
    for r in &results {
        assert!(r.as_analyzed, "criterion {}: {:?}", r.id, r.unexpected);
    }
    let known: Vec<u32> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert_eq!(known, [9, 10, 11]);
}
