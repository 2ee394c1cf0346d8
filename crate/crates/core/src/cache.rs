//! On-disk store for the engine's product cache.
//!
//! A cache file records the format version, a SHA-256 fingerprint of the algebra
//! text it was computed for, the products themselves, and a checksum over the
//! products. A file that fails any of these checks is ignored as a whole.

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algebras::to_alg_text;
use crate::scalars::RatFuncL;
use crate::vertex::{AlgebraPresentation, Engine, FieldExpr, Letter, Monomial};

pub const CACHE_VERSION: u32 = 1;

/// Environment variable naming the cache file.
pub const CACHE_ENV: &str = "VOA_CACHE";

type Letters = Vec<(u16, u16)>;

#[derive(Serialize, Deserialize)]
struct Entry {
    a: Letters,
    b: Letters,
    n: i32,
    value: Vec<(Letters, String)>,
}

#[derive(Serialize, Deserialize)]
struct Section {
    fingerprint: String,
    checksum: String,
    entries: Vec<Entry>,
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    version: u32,
    sections: Vec<Section>,
}

/// What happened when reading a cache file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CacheLoad {
    Missing,
    /// Number of products preloaded.
    Loaded(usize),
    /// The file exists but holds nothing for this algebra.
    NoSection,
    Ignored(String),
}

pub fn fingerprint(alg: &AlgebraPresentation) -> String {
    hex(&Sha256::digest(to_alg_text(alg).as_bytes()))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn letters(m: &Monomial) -> Letters {
    m.letters().iter().map(|l| (l.gen, l.deriv)).collect()
}

fn checksum(entries: &[Entry]) -> String {
    let body = serde_json::to_vec(entries).expect("entries serialize");
    hex(&Sha256::digest(&body))
}

fn section_for(engine: &Engine) -> Section {
    let entries: Vec<Entry> = engine
        .cache_entries()
        .into_iter()
        .map(|(a, b, n, e)| Entry {
            a: letters(&a),
            b: letters(&b),
            n,
            value: e.iter().map(|(m, c)| (letters(m), c.to_string())).collect(),
        })
        .collect();
    Section { fingerprint: fingerprint(engine.algebra()), checksum: checksum(&entries), entries }
}

fn read(path: &Path) -> Result<Option<CacheFile>, String> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.to_string()),
    };
    let file: CacheFile = serde_json::from_str(&text).map_err(|e| format!("unreadable: {e}"))?;
    if file.version != CACHE_VERSION {
        return Err(format!("version {} (expected {CACHE_VERSION})", file.version));
    }
    Ok(Some(file))
}

fn monomial(alg: &AlgebraPresentation, ls: &Letters) -> Result<Monomial, String> {
    let v: Vec<Letter> = ls.iter().map(|&(g, d)| Letter { gen: g, deriv: d }).collect();
    if v.iter().any(|l| l.gen as usize >= alg.generators().len()) || !Monomial::is_normal(&v, alg) {
        return Err("malformed monomial".into());
    }
    Ok(Monomial::from_sorted(&v))
}

fn decode(alg: &AlgebraPresentation, s: &Section) -> Result<Vec<(Monomial, Monomial, i32, FieldExpr)>, String> {
    if checksum(&s.entries) != s.checksum {
        return Err("checksum mismatch".into());
    }
    s.entries
        .iter()
        .map(|e| {
            let mut f = FieldExpr::zero();
            for (m, c) in &e.value {
                let c = RatFuncL::parse(c).map_err(|err| format!("bad coefficient '{c}': {err}"))?;
                f.add_term(monomial(alg, m)?, &c);
            }
            Ok((monomial(alg, &e.a)?, monomial(alg, &e.b)?, e.n, f))
        })
        .collect()
}

/// Preloads the engine from `path`. Nothing is loaded unless the whole file checks out.
pub fn load_cache(engine: &Engine, path: &Path) -> CacheLoad {
    let file = match read(path) {
        Ok(Some(f)) => f,
        Ok(None) => return CacheLoad::Missing,
        Err(e) => return CacheLoad::Ignored(e),
    };
    let fp = fingerprint(engine.algebra());
    let Some(section) = file.sections.iter().find(|s| s.fingerprint == fp) else {
        return CacheLoad::NoSection;
    };
    match decode(engine.algebra(), section) {
        Ok(entries) => {
            let n = entries.len();
            engine.preload(entries);
            CacheLoad::Loaded(n)
        }
        Err(e) => CacheLoad::Ignored(e),
    }
}

/// Writes the engine's products to `path`, keeping sections for other algebras
/// from a valid existing file.
pub fn save_cache(engine: &Engine, path: &Path) -> io::Result<()> {
    let mine = section_for(engine);
    let mut sections: Vec<Section> = match read(path) {
        Ok(Some(f)) => f.sections.into_iter().filter(|s| s.fingerprint != mine.fingerprint).collect(),
        _ => Vec::new(),
    };
    sections.push(mine);
    sections.sort_by(|a, b| a.fingerprint.cmp(&b.fingerprint));
    let body = serde_json::to_string(&CacheFile { version: CACHE_VERSION, sections })?;
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, body)?;
    fs::rename(tmp, path)
}
