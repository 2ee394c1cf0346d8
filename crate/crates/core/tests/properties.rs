use voa_engine::properties::{run_property, Property};

fn run(p: Property) {
    let out = run_property(p, 1000);
    assert!(out.passed, "{}: {}", p.name(), out.failure.unwrap_or_default());
    eprintln!("{} ok in {:.1}s", p.name(), out.seconds);
}

#[test]
fn grading() {
    run(Property::Grading);
}

#[test]
fn vacuum() {
    run(Property::Vacuum);
}

#[test]
fn leibniz() {
    run(Property::Leibniz);
}

#[test]
fn weak_filtration() {
    run(Property::WeakFiltration);
}

#[test]
fn idempotence() {
    run(Property::Idempotence);
}

#[test]
fn round_trip() {
    run(Property::RoundTrip);
}
