//! Weights of sl_n and its affinization in simple-root coordinates.

use num_traits::Zero;

use super::series::Exp;

/// Inner product of two vectors in simple-root coordinates, (α_i|α_i) = 2.
pub fn inner(a: &[Exp], b: &[Exp]) -> Exp {
    let r = a.len();
    let mut s = Exp::zero();
    for i in 0..r {
        s += a[i] * b[i] * 2;
        if i + 1 < r {
            s -= a[i] * b[i + 1] + a[i + 1] * b[i];
        }
    }
    s
}

pub fn norm2(a: &[Exp]) -> Exp {
    inner(a, a)
}

/// Simple-root coordinates of sl_n to coordinates on ε_1..ε_n (summing to zero).
pub fn to_eps(a: &[Exp]) -> Vec<Exp> {
    let n = a.len() + 1;
    (0..n)
        .map(|i| {
            let here = if i < n - 1 { a[i] } else { Exp::zero() };
            let prev = if i > 0 { a[i - 1] } else { Exp::zero() };
            here - prev
        })
        .collect()
}

pub fn from_eps(v: &[Exp]) -> Vec<Exp> {
    let mut acc = Exp::zero();
    v[..v.len() - 1]
        .iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

/// ρ of sl_n: Σ_i i(n−i)/2 · α_i.
pub fn rho(n: usize) -> Vec<Exp> {
    (1..n).map(|i| Exp::new((i * (n - i)) as i64, 2)).collect()
}

/// Fundamental weight ω_s (ω_0 = 0): Σ_i min(s,i)(n − max(s,i))/n · α_i.
pub fn fundamental(n: usize, s: usize) -> Vec<Exp> {
    (1..n)
        .map(|i| {
            if s == 0 {
                Exp::zero()
            } else {
                Exp::new((s.min(i) * (n - s.max(i))) as i64, n as i64)
            }
        })
        .collect()
}

/// All permutations of 0..n with their signs.
pub fn permutations(n: usize) -> Vec<(Vec<usize>, i64)> {
    fn go(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, sign: i64, out: &mut Vec<(Vec<usize>, i64)>) {
        if rest.is_empty() {
            out.push((prefix.clone(), sign));
            return;
        }
        for k in 0..rest.len() {
            let x = rest.remove(k);
            prefix.push(x);
            // Taking the k-th remaining element costs k transpositions.
            go(prefix, rest, if k % 2 == 0 { sign } else { -sign }, out);
            prefix.pop();
            rest.insert(k, x);
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut (0..n).collect(), 1, &mut out);
    out
}

/// Finite Weyl group action: permutes ε-coordinates, (u v)_{u(i)} = v_i.
pub fn act(perm: &[usize], a: &[Exp]) -> Vec<Exp> {
    let v = to_eps(a);
    let mut w = vec![Exp::zero(); v.len()];
    for (i, x) in v.iter().enumerate() {
        w[perm[i]] = *x;
    }
    from_eps(&w)
}

/// Integer points x with |x + y|² ≤ r2 (Cartan form of sl_n, n = y.len() + 1).
pub fn lattice_points(y: &[Exp], r2: Exp) -> Vec<Vec<i64>> {
    let r = y.len();
    let n = r + 1;
    if r2 < Exp::zero() {
        return Vec::new();
    }
    let r2f = *r2.numer() as f64 / *r2.denom() as f64;
    // Coordinate bounds from the diagonal of the inverse Cartan matrix, widened by one.
    let ranges: Vec<(i64, i64)> = (0..r)
        .map(|i| {
            let k = ((i + 1) * (n - i - 1)) as f64 / n as f64;
            let b = (r2f * k).sqrt() + 1.0;
            let yi = *y[i].numer() as f64 / *y[i].denom() as f64;
            ((-yi - b).floor() as i64, (-yi + b).ceil() as i64)
        })
        .collect();
    let mut out = Vec::new();
    let mut x = vec![0i64; r];
    fn rec(i: usize, x: &mut Vec<i64>, ranges: &[(i64, i64)], y: &[Exp], r2: Exp, out: &mut Vec<Vec<i64>>) {
        if i == x.len() {
            let z: Vec<Exp> = x.iter().zip(y).map(|(a, b)| Exp::from(*a) + b).collect();
            if norm2(&z) <= r2 {
                out.push(x.clone());
            }
            return;
        }
        for v in ranges[i].0..=ranges[i].1 {
            x[i] = v;
            rec(i + 1, x, ranges, y, r2, out);
        }
    }
    if r == 0 {
        return vec![vec![]];
    }
    rec(0, &mut x, &ranges, y, r2, &mut out);
    out
}

/// A weight of affine sl_n: level·Λ_0 + finite + delta·δ.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineWeight {
    pub level: Exp,
    /// Simple-root coordinates of the finite part.
    pub finite: Vec<Exp>,
    pub delta: Exp,
}

impl AffineWeight {
    pub fn new(level: Exp, finite: Vec<Exp>, delta: Exp) -> AffineWeight {
        AffineWeight { level, finite, delta }
    }

    /// ρ̂ = ρ + nΛ_0.
    pub fn rho_hat(n: usize) -> AffineWeight {
        AffineWeight::new(Exp::from(n as i64), rho(n), Exp::zero())
    }

    pub fn add(&self, other: &AffineWeight) -> AffineWeight {
        AffineWeight {
            level: self.level + other.level,
            finite: self.finite.iter().zip(&other.finite).map(|(a, b)| a + b).collect(),
            delta: self.delta + other.delta,
        }
    }

    pub fn sub(&self, other: &AffineWeight) -> AffineWeight {
        AffineWeight {
            level: self.level - other.level,
            finite: self.finite.iter().zip(&other.finite).map(|(a, b)| a - b).collect(),
            delta: self.delta - other.delta,
        }
    }

    /// t_β(λ) = λ + mβ − ((λ|β) + ½|β|²m)δ, m the level.
    pub fn translate(&self, beta: &[Exp]) -> AffineWeight {
        let m = self.level;
        let half = Exp::new(1, 2);
        AffineWeight {
            level: m,
            finite: self.finite.iter().zip(beta).map(|(a, b)| a + m * b).collect(),
            delta: self.delta - (inner(&self.finite, beta) + half * norm2(beta) * m),
        }
    }

    pub fn act_finite(&self, perm: &[usize]) -> AffineWeight {
        AffineWeight { level: self.level, finite: act(perm, &self.finite), delta: self.delta }
    }

    /// (t_β u)∘λ = t_β u(λ + ρ̂) − ρ̂.
    pub fn shifted(&self, perm: &[usize], beta: &[Exp]) -> AffineWeight {
        let n = self.finite.len() + 1;
        let rh = AffineWeight::rho_hat(n);
        self.add(&rh).act_finite(perm).translate(beta).sub(&rh)
    }
}

pub(crate) fn ints(x: &[i64]) -> Vec<Exp> {
    x.iter().map(|v| Exp::from(*v)).collect()
}

pub(crate) fn half() -> Exp {
    Exp::new(1, 2)
}
