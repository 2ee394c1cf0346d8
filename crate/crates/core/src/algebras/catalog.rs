use std::collections::BTreeMap;
use std::sync::Arc;

use parking_lot::RwLock;

use crate::expr::{parse_field, NameResolver};
use crate::scalars::{ParseError, RatFuncL};
use crate::vertex::{Engine, FieldExpr, Letter, Monomial};

/// Named composite fields over one presentation.
///
/// Built-in names, available when the needed generators exist:
///
/// | name | field |
/// |------|-------|
/// | `U[i,j]` | `:(d^i G+)(d^j G-):` |
/// | `TH`, `TC` | `3/(4*l)*:J J:`, `T - TH` |
/// | `JE`, `TE` | `-:b c:`, `1/2*(:(d b) c: - :b (d c):)` |
/// | `Jdiag`, `JD`, `TD` | `J + JE`, `J - (2*l)/3*JE`, `T + TE - 3/(2*(3+2*l))*:Jdiag Jdiag:` |
/// | `phi+[n]`, `phi-[n]` | `:b d^n G+:`, `:c d^n G-:` (`phi+` = `phi+[0]`) |
/// | `UD` | `UC[0]`, once registered |
///
/// Further names (such as `UC[i]`) are added with [`Catalog::insert`].
pub struct Catalog {
    engine: Arc<Engine>,
    extra: RwLock<BTreeMap<String, FieldExpr>>,
}

fn key(name: &str, index: &[i64]) -> String {
    if index.is_empty() {
        name.to_string()
    } else {
        let idx: Vec<String> = index.iter().map(|i| i.to_string()).collect();
        format!("{name}[{}]", idx.join(","))
    }
}

impl Catalog {
    pub fn new(engine: Arc<Engine>) -> Self {
        Catalog { engine, extra: RwLock::new(BTreeMap::new()) }
    }

    pub fn engine(&self) -> &Arc<Engine> {
        &self.engine
    }

    fn has(&self, g: &str) -> bool {
        self.engine.algebra().generator_index(g).is_ok()
    }

    /// ℓ, or its value when the presentation is specialized.
    pub fn ell(&self) -> RatFuncL {
        match self.engine.algebra().specialized_at() {
            Some(v) => RatFuncL::from_rational(v.clone()),
            None => RatFuncL::ell(),
        }
    }

    fn g(&self, name: &str) -> FieldExpr {
        self.engine.algebra().gen(name).expect("generator checked by caller")
    }

    /// Registers `name` (e.g. `UC[0]`) for use in expressions.
    pub fn insert(&self, name: &str, value: FieldExpr) {
        self.extra.write().insert(name.to_string(), value);
    }

    /// Looks up a name such as `TC` or `U[0,1]`.
    pub fn get(&self, name: &str, index: &[i64]) -> Result<FieldExpr, String> {
        self.resolve(name, index, &self.engine)
    }

    /// Parses and evaluates an expression using this catalog's names.
    pub fn field(&self, text: &str) -> Result<FieldExpr, ParseError> {
        parse_field(text, &self.engine, self)
    }

    /// U_{i,j} = :(∂^i G+)(∂^j G-):
    pub fn u(&self, i: usize, j: usize) -> FieldExpr {
        let alg = self.engine.algebra();
        let p = alg.generator_index("G+").expect("G+ present");
        let m = alg.generator_index("G-").expect("G- present");
        FieldExpr::monomial(Monomial::from_sorted(&[Letter::new(p, i), Letter::new(m, j)]))
    }

    pub fn t_h(&self) -> FieldExpr {
        let j = self.g("J");
        let c = RatFuncL::from_int(3) / (RatFuncL::from_int(4) * self.ell());
        self.engine.wick(&j, &j).scale(&c)
    }

    pub fn t_c(&self) -> FieldExpr {
        &self.g("T") - &self.t_h()
    }

    pub fn j_e(&self) -> FieldExpr {
        -&self.engine.wick(&self.g("b"), &self.g("c"))
    }

    pub fn t_e(&self) -> FieldExpr {
        let (b, c) = (self.g("b"), self.g("c"));
        let e = &self.engine;
        (&e.wick(&e.derivative(&b), &c) - &e.wick(&b, &e.derivative(&c))).scale(&RatFuncL::frac(1, 2))
    }

    pub fn j_diag(&self) -> FieldExpr {
        &self.g("J") + &self.j_e()
    }

    pub fn j_d(&self) -> FieldExpr {
        let c = self.ell().scale(&crate::scalars::rat(-2, 3));
        let mut out = self.g("J");
        out.add_scaled(&self.j_e(), &c);
        out
    }

    pub fn t_d(&self) -> FieldExpr {
        let jd = self.j_diag();
        let c = -(RatFuncL::from_int(3) / (RatFuncL::from_int(2) * (RatFuncL::from_int(3) + self.ell() * RatFuncL::from_int(2))));
        let mut out = &self.g("T") + &self.t_e();
        out.add_scaled(&self.engine.wick(&jd, &jd), &c);
        out
    }

    /// φ^+_{0,n} = :b ∂^n G+: and φ^-_{0,n} = :c ∂^n G-:
    pub fn phi(&self, plus: bool, n: usize) -> FieldExpr {
        let (x, g) = if plus { ("b", "G+") } else { ("c", "G-") };
        let e = &self.engine;
        e.wick(&self.g(x), &e.derivative_k(&self.g(g), n))
    }
}

impl NameResolver for Catalog {
    fn knows(&self, name: &str) -> bool {
        if self.has(name) || self.extra.read().keys().any(|k| k == name || k.starts_with(&format!("{name}["))) {
            return true;
        }
        let w = self.has("G+") && self.has("G-");
        let j = self.has("J");
        let e = self.has("b") && self.has("c");
        match name {
            "U" => w,
            "TH" | "TC" => j && self.has("T"),
            "JE" | "TE" => e,
            "Jdiag" | "JD" => e && j,
            "TD" => e && j && self.has("T"),
            "phi+" | "phi-" => e && w,
            "UD" => e && self.extra.read().contains_key("UC[0]"),
            _ => false,
        }
    }

    fn resolve(&self, name: &str, index: &[i64], _engine: &Engine) -> Result<FieldExpr, String> {
        if let Some(v) = self.extra.read().get(&key(name, index)) {
            return Ok(v.clone());
        }
        if self.has(name) {
            if !index.is_empty() {
                return Err(format!("generator '{name}' takes no index"));
            }
            return Ok(self.g(name));
        }
        let nonneg = |k: usize| -> Result<Vec<usize>, String> {
            if index.len() != k || index.iter().any(|&i| i < 0) {
                return Err(format!("'{name}' expects {k} non-negative index value(s)"));
            }
            Ok(index.iter().map(|&i| i as usize).collect())
        };
        let plain = || -> Result<(), String> {
            if index.is_empty() {
                Ok(())
            } else {
                Err(format!("'{name}' takes no index"))
            }
        };
        match name {
            "U" => {
                let ij = nonneg(2)?;
                Ok(self.u(ij[0], ij[1]))
            }
            "TH" => plain().map(|_| self.t_h()),
            "TC" => plain().map(|_| self.t_c()),
            "JE" => plain().map(|_| self.j_e()),
            "TE" => plain().map(|_| self.t_e()),
            "Jdiag" => plain().map(|_| self.j_diag()),
            "JD" => plain().map(|_| self.j_d()),
            "TD" => plain().map(|_| self.t_d()),
            "phi+" | "phi-" => {
                let n = if index.is_empty() { 0 } else { nonneg(1)?[0] };
                Ok(self.phi(name == "phi+", n))
            }
            "UD" => {
                plain()?;
                self.extra.read().get("UC[0]").cloned().ok_or_else(|| "UD needs UC[0]".to_string())
            }
            _ => Err(format!("unknown field name '{}'", key(name, index))),
        }
    }
}

/// The right-nested m-fold Wick power of a generator.
pub fn power_field(engine: &Engine, generator: &str, m: usize) -> Result<FieldExpr, String> {
    let g = engine.algebra().gen(generator).map_err(|e| e.to_string())?;
    Ok(engine.wick_power(&g, m))
}
