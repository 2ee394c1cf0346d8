use serde_json::Value;
use sha2::{Digest, Sha256};

use voa_engine::algebras::{bc_system, bp_algebra, Catalog};
use voa_engine::cache::{fingerprint, load_cache, save_cache, CacheLoad};
use voa_engine::orbifold::solve_decoupling;
use voa_engine::vertex::{Engine, FieldExpr};

fn warm_engine() -> Catalog {
    let c = Catalog::new(bp_algebra().engine());
    solve_decoupling(&c, 1).unwrap();
    c
}

fn text(e: &Engine, f: &FieldExpr) -> String {
    f.display(e.algebra()).to_string()
}

#[test]
fn saved_products_reload_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let c = warm_engine();
    let e = c.engine();
    assert!(e.cache_len() > 100);
    save_cache(e, &path).unwrap();

    let fresh = bp_algebra().engine();
    assert_eq!(load_cache(&fresh, &path), CacheLoad::Loaded(e.cache_len()));
    assert_eq!(fresh.cache_entries(), e.cache_entries());

    // Every stored product equals a recomputation from scratch, as printed text.
    let plain = Engine::without_cache(bp_algebra());
    for (a, b, n, v) in fresh.cache_entries().iter().step_by(7) {
        let again = plain.nth_product(&FieldExpr::monomial(a.clone()), &FieldExpr::monomial(b.clone()), *n as i64);
        assert_eq!(text(&plain, &again), text(&fresh, v));
    }

    // Same results warm and cold.
    let warm = solve_decoupling(&Catalog::new(fresh), 1).unwrap();
    let cold = solve_decoupling(&Catalog::new(bp_algebra().engine()), 1).unwrap();
    assert_eq!(warm.leading_coefficient, cold.leading_coefficient);
    assert_eq!(warm.source, cold.source);
}

#[test]
fn sections_are_kept_per_algebra() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let bc = bc_system().engine();
    assert_eq!(load_cache(&bc, &path), CacheLoad::Missing);
    let b = bc.algebra().gen("b").unwrap();
    let c = bc.algebra().gen("c").unwrap();
    bc.nth_product(&bc.wick(&b, &c), &bc.wick(&b, &c), 1);
    save_cache(&bc, &path).unwrap();
    assert_eq!(load_cache(&bp_algebra().engine(), &path), CacheLoad::NoSection);

    save_cache(warm_engine().engine(), &path).unwrap();
    let file: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let fps: Vec<&str> = file["sections"].as_array().unwrap().iter().map(|s| s["fingerprint"].as_str().unwrap()).collect();
    assert_eq!(fps.len(), 2);
    assert!(fps.contains(&fingerprint(bc.algebra()).as_str()));
    assert!(fps.contains(&fingerprint(&bp_algebra()).as_str()));
    assert!(matches!(load_cache(&bc_system().engine(), &path), CacheLoad::Loaded(n) if n == bc.cache_len()));
}

fn rehash(file: &mut Value) {
    let entries = &file["sections"][0]["entries"];
    let sum: String = Sha256::digest(serde_json::to_vec(entries).unwrap()).iter().map(|b| format!("{b:02x}")).collect();
    file["sections"][0]["checksum"] = Value::String(sum);
}

#[test]
fn damaged_files_load_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    save_cache(warm_engine().engine(), &path).unwrap();
    let good: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();

    let mut cases: Vec<(&str, String)> = Vec::new();
    let mut v = good.clone();
    v["version"] = 2.into();
    cases.push(("version", v.to_string()));
    let mut v = good.clone();
    v["sections"][0]["entries"][3]["n"] = 40.into();
    cases.push(("checksum", v.to_string()));
    let mut v = good.clone();
    v["sections"][0]["entries"][0]["a"] = serde_json::json!([[9, 0]]);
    rehash(&mut v);
    cases.push(("malformed", v.to_string()));
    let mut v = good.clone();
    // Letters out of normal order.
    v["sections"][0]["entries"][0]["a"] = serde_json::json!([[3, 0], [0, 0]]);
    rehash(&mut v);
    cases.push(("malformed", v.to_string()));
    let mut v = good.clone();
    v["sections"][0]["entries"][0]["value"] = serde_json::json!([[[], "1/(l"]]);
    rehash(&mut v);
    cases.push(("coefficient", v.to_string()));
    cases.push(("unreadable", "{\"version\": 1".into()));

    for (why, body) in cases {
        std::fs::write(&path, body).unwrap();
        let e = bp_algebra().engine();
        match load_cache(&e, &path) {
            CacheLoad::Ignored(msg) => assert!(msg.contains(why), "{why}: {msg}"),
            other => panic!("{why}: {other:?}"),
        }
        assert_eq!(e.cache_len(), 0, "{why}");
    }
}
