use super::{PolyL, RatFuncL};

/// A sparse row: (column, coefficient) pairs with distinct columns.
pub type SparseRow = Vec<(usize, RatFuncL)>;

/// Result of [`solve_linear`] / [`solve_sparse`].
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolution {
    pub rank: usize,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    /// A particular solution (free variables set to zero) and a nullspace basis.
    Solved { particular: Vec<RatFuncL>, nullspace: Vec<Vec<RatFuncL>> },
    /// A row vector y with yA = 0 and y·b = 1.
    Inconsistent { certificate: Vec<RatFuncL> },
}

impl LinearSolution {
    pub fn particular(&self) -> Option<&[RatFuncL]> {
        match &self.outcome {
            Outcome::Solved { particular, .. } => Some(particular),
            Outcome::Inconsistent { .. } => None,
        }
    }

    pub fn nullspace(&self) -> &[Vec<RatFuncL>] {
        match &self.outcome {
            Outcome::Solved { nullspace, .. } => nullspace,
            Outcome::Inconsistent { .. } => &[],
        }
    }

    pub fn is_consistent(&self) -> bool {
        matches!(self.outcome, Outcome::Solved { .. })
    }

    pub fn is_unique(&self) -> bool {
        matches!(&self.outcome, Outcome::Solved { nullspace, .. } if nullspace.is_empty())
    }
}

/// Solves the dense system `matrix · x = rhs` over ℚ(ℓ).
pub fn solve_linear(matrix: &[Vec<RatFuncL>], rhs: &[RatFuncL]) -> LinearSolution {
    assert_eq!(matrix.len(), rhs.len(), "row count mismatch");
    let ncols = matrix.first().map_or(0, |r| r.len());
    let rows: Vec<SparseRow> = matrix
        .iter()
        .map(|r| {
            assert_eq!(r.len(), ncols, "ragged matrix");
            r.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(j, v)| (j, v.clone())).collect()
        })
        .collect();
    solve_sparse(ncols, &rows, rhs)
}

#[derive(Clone)]
struct PRow {
    entries: Vec<(usize, PolyL)>,
    rhs: PolyL,
}

impl PRow {
    fn from_sparse(row: &SparseRow, rhs: &RatFuncL) -> PRow {
        let mut l = rhs.denom().clone();
        for (_, v) in row {
            let d = v.denom();
            if !d.is_one() && !l.is_divisible_by(d) {
                let g = PolyL::gcd(&l, d);
                l = &l * &d.div_exact(&g);
            }
        }
        let conv = |v: &RatFuncL| -> PolyL {
            if v.denom().is_one() {
                v.numer() * &l
            } else {
                v.numer() * &l.div_exact(v.denom())
            }
        };
        let mut entries: Vec<(usize, PolyL)> =
            row.iter().filter(|(_, v)| !v.is_zero()).map(|(j, v)| (*j, conv(v))).collect();
        entries.sort_by_key(|e| e.0);
        let mut r = PRow { entries, rhs: conv(rhs) };
        r.make_primitive();
        r
    }

    fn get(&self, col: usize) -> Option<&PolyL> {
        self.entries.binary_search_by_key(&col, |e| e.0).ok().map(|i| &self.entries[i].1)
    }

    /// Divides the row by the gcd of all its entries, normalizing the scale.
    fn make_primitive(&mut self) {
        let mut g = self.rhs.monic();
        for (_, v) in &self.entries {
            if g.is_one() {
                break;
            }
            g = PolyL::gcd(&g, v);
        }
        if g.is_zero() {
            return;
        }
        // Fix the scale so that the first nonzero entry is monic as well.
        let lead = self.entries.first().map(|e| &e.1).unwrap_or(&self.rhs);
        let c = lead.div_exact(&g).leading().recip();
        let g_is_one = g.is_one();
        for (_, v) in self.entries.iter_mut() {
            if !g_is_one {
                *v = v.div_exact(&g);
            }
            *v = v.scale(&c);
        }
        if !g_is_one {
            self.rhs = self.rhs.div_exact(&g);
        }
        self.rhs = self.rhs.scale(&c);
    }

    /// self ← a·self − b·other
    fn combine(&mut self, a: &PolyL, b: &PolyL, other: &PRow) {
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut i, mut j) = (0, 0);
        while i < self.entries.len() || j < other.entries.len() {
            let ci = self.entries.get(i).map_or(usize::MAX, |e| e.0);
            let cj = other.entries.get(j).map_or(usize::MAX, |e| e.0);
            let (col, v) = if ci < cj {
                i += 1;
                (ci, a * &self.entries[i - 1].1)
            } else if cj < ci {
                j += 1;
                (cj, -&(b * &other.entries[j - 1].1))
            } else {
                i += 1;
                j += 1;
                (ci, &(a * &self.entries[i - 1].1) - &(b * &other.entries[j - 1].1))
            };
            if !v.is_zero() {
                out.push((col, v));
            }
        }
        self.entries = out;
        self.rhs = &(a * &self.rhs) - &(b * &other.rhs);
        self.make_primitive();
    }
}

/// Solves a sparse system with `ncols` unknowns over ℚ(ℓ).
///
/// Rows are cleared of denominators and reduced by fraction-free Gauss–Jordan
/// elimination in ℚ[ℓ]: the pivot is the remaining entry of smallest degree
/// (ties by column, then row), and every combination `p·row − a·pivot_row` is
/// divided by its polynomial content. Back substitution happens in ℚ(ℓ).
pub fn solve_sparse(ncols: usize, rows: &[SparseRow], rhs: &[RatFuncL]) -> LinearSolution {
    assert_eq!(rows.len(), rhs.len(), "row count mismatch");
    let mut prows: Vec<PRow> = rows.iter().zip(rhs).map(|(r, b)| PRow::from_sparse(r, b)).collect();
    let mut is_pivot_row = vec![false; prows.len()];
    let mut pivots: Vec<(usize, usize)> = Vec::new();

    loop {
        let mut best: Option<(usize, usize, usize)> = None; // (degree, col, row)
        for (ri, r) in prows.iter().enumerate() {
            if is_pivot_row[ri] {
                continue;
            }
            for (c, v) in &r.entries {
                let key = (v.degree().unwrap_or(0), *c, ri);
                if best.is_none_or(|b| key < b) {
                    best = Some(key);
                }
                if key.0 == 0 {
                    break;
                }
            }
        }
        let Some((_, col, pr)) = best else { break };
        let prow = prows[pr].clone();
        let p = prow.get(col).unwrap().clone();
        for (ri, r) in prows.iter_mut().enumerate() {
            if ri == pr {
                continue;
            }
            if let Some(a) = r.get(col).cloned() {
                let g = PolyL::gcd(&p, &a);
                r.combine(&p.div_exact(&g), &a.div_exact(&g), &prow);
            }
        }
        is_pivot_row[pr] = true;
        pivots.push((col, pr));
    }

    let rank = pivots.len();
    if let Some(bad) = prows.iter().enumerate().find(|(ri, r)| !is_pivot_row[*ri] && !r.rhs.is_zero()) {
        let _ = bad;
        return LinearSolution { rank, outcome: Outcome::Inconsistent { certificate: certificate(ncols, rows, rhs) } };
    }

    let mut pivot_of_col = vec![None; ncols];
    for &(c, r) in &pivots {
        pivot_of_col[c] = Some(r);
    }
    let mut particular = vec![RatFuncL::zero(); ncols];
    for &(c, r) in &pivots {
        let p = prows[r].get(c).unwrap();
        particular[c] = RatFuncL::new(prows[r].rhs.clone(), p.clone()).unwrap();
    }
    let mut nullspace = Vec::new();
    for f in (0..ncols).filter(|&f| pivot_of_col[f].is_none()) {
        let mut v = vec![RatFuncL::zero(); ncols];
        v[f] = RatFuncL::one();
        for &(c, r) in &pivots {
            if let Some(e) = prows[r].get(f) {
                let p = prows[r].get(c).unwrap();
                v[c] = -RatFuncL::new(e.clone(), p.clone()).unwrap();
            }
        }
        nullspace.push(v);
    }
    LinearSolution { rank, outcome: Outcome::Solved { particular, nullspace } }
}

/// Finds y with yA = 0 and y·b = 1 by solving the transposed system.
fn certificate(ncols: usize, rows: &[SparseRow], rhs: &[RatFuncL]) -> Vec<RatFuncL> {
    let m = rows.len();
    let mut trows: Vec<SparseRow> = vec![Vec::new(); ncols + 1];
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r {
            if !v.is_zero() {
                trows[*j].push((i, v.clone()));
            }
        }
        if !rhs[i].is_zero() {
            trows[ncols].push((i, rhs[i].clone()));
        }
    }
    let mut trhs = vec![RatFuncL::zero(); ncols + 1];
    trhs[ncols] = RatFuncL::one();
    let sol = solve_sparse(m, &trows, &trhs);
    sol.particular().expect("transposed system of an inconsistent system is consistent").to_vec()
}
