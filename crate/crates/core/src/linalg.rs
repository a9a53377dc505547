//! Sparse exact linear algebra over `F_p` and `Z/p^N`.
//!
//! Everything reduces to one routine computing the Howell form of a list
//! of sparse rows over the chain ring `Z/p^N`. For `N = 1` that is the
//! reduced row echelon form, so Gaussian elimination over `F_p` is the
//! special case.

use std::collections::BTreeMap;

use crate::error::{config, Result};
use crate::scalar::{inv_mod, mul_mod, valuation, ScalarRing};

/// Sorted `(column, nonzero entry)` pairs.
pub type SparseVec = Vec<(usize, u64)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    p: u64,
    prec: u32,
    modulus: u64,
    nrows: usize,
    ncols: usize,
    rows: Vec<SparseVec>,
}

/// Outcome of [`solve`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solution {
    Solved { particular: SparseVec, kernel: Vec<SparseVec> },
    Inconsistent,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankProfile {
    pub rank: usize,
    pub pivots: Vec<usize>,
    pub form: Vec<SparseVec>,
}

fn modular(ring: &ScalarRing) -> Result<(u64, u32, u64)> {
    match ring.modulus() {
        Some(m) => Ok((ring.p, ring.prec, m)),
        None => config("linear algebra needs a finite scalar ring"),
    }
}

impl SparseMatrix {
    pub fn new(ring: &ScalarRing, nrows: usize, ncols: usize) -> Result<Self> {
        let (p, prec, modulus) = modular(ring)?;
        Ok(SparseMatrix { p, prec, modulus, nrows, ncols, rows: vec![Vec::new(); nrows] })
    }

    /// Builds a matrix from `(row, col, value)` triplets; duplicates add up.
    pub fn from_triplets(
        ring: &ScalarRing,
        nrows: usize,
        ncols: usize,
        entries: impl IntoIterator<Item = (usize, usize, u64)>,
    ) -> Result<Self> {
        let mut m = Self::new(ring, nrows, ncols)?;
        let mut acc: Vec<BTreeMap<usize, u64>> = vec![BTreeMap::new(); nrows];
        for (r, c, v) in entries {
            if r >= nrows || c >= ncols {
                return config(format!("entry ({r}, {c}) outside a {nrows}x{ncols} matrix"));
            }
            let e = acc[r].entry(c).or_insert(0);
            *e = (*e + v % m.modulus) % m.modulus;
        }
        m.rows = acc.into_iter().map(|row| row.into_iter().filter(|&(_, v)| v != 0).collect()).collect();
        Ok(m)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn rows(&self) -> &[SparseVec] {
        &self.rows
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.rows[r].binary_search_by_key(&c, |&(j, _)| j).map_or(0, |i| self.rows[r][i].1)
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut rows = vec![Vec::new(); self.ncols];
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                rows[c].push((r, v));
            }
        }
        SparseMatrix { nrows: self.ncols, ncols: self.nrows, rows, ..*self }
    }

    /// `A·x` for a sparse vector `x`.
    pub fn mul_vec(&self, x: &SparseVec) -> Result<Vec<u64>> {
        if x.iter().any(|&(c, _)| c >= self.ncols) {
            return config("vector length does not match the matrix");
        }
        let dense = densify(x, self.ncols);
        Ok(self
            .rows
            .iter()
            .map(|row| row.iter().fold(0u64, |acc, &(c, v)| (acc + mul_mod(v, dense[c], self.modulus)) % self.modulus))
            .collect())
    }

    /// Howell form of the row span (reduced echelon form over `F_p`).
    pub fn rank_profile(&self) -> RankProfile {
        let form = howell_form(self.rows.clone(), self.p, self.prec);
        let pivots = form.iter().map(|r| r[0].0).collect();
        RankProfile { rank: form.len(), pivots, form }
    }
}

pub fn densify(x: &SparseVec, n: usize) -> Vec<u64> {
    let mut d = vec![0u64; n];
    for &(c, v) in x {
        d[c] = v;
    }
    d
}

pub fn sparsify(x: &[u64]) -> SparseVec {
    x.iter().enumerate().filter(|(_, &v)| v != 0).map(|(c, &v)| (c, v)).collect()
}

/// `a − f·b` modulo `m`.
fn axpy(a: &SparseVec, f: u64, b: &SparseVec, m: u64) -> SparseVec {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ca = a.get(i).map_or(usize::MAX, |e| e.0);
        let cb = b.get(j).map_or(usize::MAX, |e| e.0);
        let (c, v) = if ca < cb {
            i += 1;
            (ca, a[i - 1].1)
        } else if cb < ca {
            j += 1;
            (cb, (m - mul_mod(f, b[j - 1].1, m)) % m)
        } else {
            i += 1;
            j += 1;
            (ca, (a[i - 1].1 + m - mul_mod(f, b[j - 1].1, m)) % m)
        };
        if v != 0 {
            out.push((c, v));
        }
    }
    out
}

fn scale(a: &SparseVec, f: u64, m: u64) -> SparseVec {
    a.iter().map(|&(c, v)| (c, mul_mod(v, f, m))).filter(|&(_, v)| v != 0).collect()
}

/// Howell form over `Z/p^N`: pivots are powers `p^e`, entries above a
/// pivot lie in `[0, p^e)`, and the span is saturated so the form is
/// canonical.
pub fn howell_form(rows: Vec<SparseVec>, p: u64, prec: u32) -> Vec<SparseVec> {
    let m = p.pow(prec);
    let mut buckets: BTreeMap<usize, Vec<SparseVec>> = BTreeMap::new();
    for r in rows.into_iter().filter(|r| !r.is_empty()) {
        buckets.entry(r[0].0).or_default().push(r);
    }
    let mut form: Vec<SparseVec> = Vec::new();
    while let Some((_, mut bucket)) = buckets.pop_first() {
        let (best, _) = bucket.iter().enumerate().min_by_key(|(i, r)| (valuation(r[0].1, p, prec), *i)).expect("buckets are never empty");
        let pivot = bucket.swap_remove(best);
        let e = valuation(pivot[0].1, p, prec);
        let pe = p.pow(e);
        let unit = inv_mod(pivot[0].1 / pe, m, p).expect("cofactor of p^e is a unit");
        let pivot = scale(&pivot, unit, m);
        for r in bucket {
            let f = r[0].1 / pe;
            let reduced = axpy(&r, f, &pivot, m);
            if let Some(&(c, _)) = reduced.first() {
                buckets.entry(c).or_default().push(reduced);
            }
        }
        if e > 0 {
            let sat = scale(&pivot, p.pow(prec - e), m);
            if let Some(&(c, _)) = sat.first() {
                buckets.entry(c).or_default().push(sat);
            }
        }
        form.push(pivot);
    }
    // reduce above pivots
    for i in 0..form.len() {
        let (col, pv) = form[i][0];
        for j in 0..i {
            let Ok(pos) = form[j].binary_search_by_key(&col, |&(c, _)| c) else { continue };
            let f = form[j][pos].1 / pv;
            if f != 0 {
                form[j] = axpy(&form[j], f, &form[i], m);
            }
        }
    }
    form
}

/// Solves `A·x = b`, returning a particular solution and a generating set
/// of the kernel.
pub fn solve(a: &SparseMatrix, b: &[u64]) -> Result<Solution> {
    solve_with(a, b, true)
}

/// Like [`solve`]; the kernel is only computed when `want_kernel` is set.
pub fn solve_with(a: &SparseMatrix, b: &[u64], want_kernel: bool) -> Result<Solution> {
    if b.len() != a.nrows {
        return config(format!("right-hand side has length {}, expected {}", b.len(), a.nrows));
    }
    let m = a.modulus;
    let b: Vec<u64> = b.iter().map(|v| v % m).collect();
    if a.prec == 1 {
        Ok(solve_field(a, &b, want_kernel))
    } else {
        Ok(solve_chain(a, &b))
    }
}

/// Gauss–Jordan on `[A | b]`.
fn solve_field(a: &SparseMatrix, b: &[u64], want_kernel: bool) -> Solution {
    let n = a.ncols;
    let p = a.p;
    let rows: Vec<SparseVec> = a
        .rows
        .iter()
        .zip(b)
        .map(|(row, &bv)| {
            let mut r = row.clone();
            if bv != 0 {
                r.push((n, bv));
            }
            r
        })
        .collect();
    let form = howell_form(rows, p, 1);
    let mut particular = Vec::new();
    let mut is_pivot = vec![false; n];
    for row in &form {
        let (c, _) = row[0];
        if c == n {
            return Solution::Inconsistent;
        }
        is_pivot[c] = true;
        if let Some(&(last, v)) = row.last() {
            if last == n {
                particular.push((c, v));
            }
        }
    }
    let mut kernel = Vec::new();
    if want_kernel {
        let mut by_free: BTreeMap<usize, SparseVec> = BTreeMap::new();
        for row in &form {
            let pc = row[0].0;
            for &(c, v) in &row[1..] {
                if c < n {
                    by_free.entry(c).or_default().push((pc, (p - v) % p));
                }
            }
        }
        for f in (0..n).filter(|&c| !is_pivot[c]) {
            let mut vec = by_free.remove(&f).unwrap_or_default();
            vec.push((f, 1));
            vec.sort_unstable();
            kernel.push(vec);
        }
    }
    Solution::Solved { particular, kernel }
}

/// Howell form of `[Aᵀ | I]`: the rows span all pairs `(A·y, y)`.
fn solve_chain(a: &SparseMatrix, b: &[u64]) -> Solution {
    let (nr, m) = (a.nrows, a.modulus);
    let at = a.transpose();
    let rows: Vec<SparseVec> = at
        .rows
        .into_iter()
        .enumerate()
        .map(|(i, mut r)| {
            r.push((nr + i, 1));
            r
        })
        .collect();
    let form = howell_form(rows, a.p, a.prec);
    let mut residual = sparsify(b);
    for row in form.iter().filter(|r| r[0].0 < nr) {
        let (c, pv) = row[0];
        let current = residual.iter().find(|e| e.0 == c).map_or(0, |e| e.1);
        if let Some(&(lead, _)) = residual.first() {
            if lead < c {
                return Solution::Inconsistent;
            }
        }
        if current == 0 {
            continue;
        }
        if current % pv != 0 {
            return Solution::Inconsistent;
        }
        residual = axpy(&residual, current / pv, row, m);
    }
    if residual.first().is_some_and(|e| e.0 < nr) {
        return Solution::Inconsistent;
    }
    let particular = residual.iter().map(|&(c, v)| (c - nr, (m - v) % m)).collect();
    let kernel = form.iter().filter(|r| r[0].0 >= nr).map(|r| r.iter().map(|&(c, v)| (c - nr, v)).collect()).collect();
    Solution::Solved { particular, kernel }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ring(p: u64, n: u32) -> ScalarRing {
        if n == 1 {
            ScalarRing::prime_field(p).unwrap()
        } else {
            ScalarRing::integers_mod(p, n).unwrap()
        }
    }

    fn dense(r: &ScalarRing, rows: &[&[u64]]) -> SparseMatrix {
        let nc = rows.first().map_or(0, |r| r.len());
        let entries = rows.iter().enumerate().flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &v)| (i, j, v)));
        SparseMatrix::from_triplets(r, rows.len(), nc, entries).unwrap()
    }

    #[test]
    fn spec_examples() {
        for r in [ring(5, 1), ring(5, 3)] {
            let id = dense(&r, &[&[1, 0], &[0, 1]]);
            assert_eq!(solve(&id, &[3, 4]).unwrap(), Solution::Solved { particular: vec![(0, 3), (1, 4)], kernel: vec![] });
            assert_eq!(id.rank_profile().rank, 2);
            assert_eq!(dense(&r, &[&[0, 0]]).rank_profile().rank, 0);
        }
        let z4 = ring(2, 2);
        let two = dense(&z4, &[&[2]]);
        assert_eq!(solve(&two, &[2]).unwrap(), Solution::Solved { particular: vec![(0, 1)], kernel: vec![vec![(0, 2)]] });
        assert_eq!(two.rank_profile().rank, 1);
        let f2 = ring(2, 1);
        assert_eq!(solve(&dense(&f2, &[&[1, 1], &[1, 1]]), &[1, 0]).unwrap(), Solution::Inconsistent);
        assert!(matches!(solve(&two, &[1, 1]), Err(crate::Error::Config(_))));
    }

    fn arb_matrix(p: u64, n: u32) -> impl Strategy<Value = (SparseMatrix, Vec<u64>)> {
        let m = p.pow(n);
        (1usize..6, 1usize..6).prop_flat_map(move |(r, c)| {
            (prop::collection::vec(prop::collection::vec(0..m, c), r), prop::collection::vec(0..m, c)).prop_map(move |(rows, x)| {
                let rg = ring(p, n);
                let refs: Vec<&[u64]> = rows.iter().map(|r| r.as_slice()).collect();
                (dense(&rg, &refs), x)
            })
        })
    }

    fn check_solution(a: &SparseMatrix, b: &[u64], sol: &Solution) {
        let Solution::Solved { particular, kernel } = sol else { panic!("expected a solution") };
        assert_eq!(a.mul_vec(particular).unwrap(), b.to_vec());
        for k in kernel {
            assert!(a.mul_vec(k).unwrap().iter().all(|&v| v == 0));
        }
    }

    proptest! {
        #[test]
        fn consistent_systems_solve(
            (a, x) in arb_matrix(3, 2),
        ) {
            let b = a.mul_vec(&sparsify(&x)).unwrap();
            let sol = solve(&a, &b).unwrap();
            check_solution(&a, &b, &sol);
        }

        #[test]
        fn field_systems_solve((a, x) in arb_matrix(5, 1)) {
            let b = a.mul_vec(&sparsify(&x)).unwrap();
            let sol = solve(&a, &b).unwrap();
            check_solution(&a, &b, &sol);
            let Solution::Solved { kernel, .. } = sol else { unreachable!() };
            prop_assert_eq!(kernel.len(), a.ncols() - a.rank_profile().rank);
        }

        #[test]
        fn kernel_is_complete((a, x) in arb_matrix(2, 3)) {
            // x − particular lies in the span of the kernel rows
            let b = a.mul_vec(&sparsify(&x)).unwrap();
            let Solution::Solved { particular, kernel } = solve(&a, &b).unwrap() else { panic!() };
            let m = a.modulus();
            let xd = x.clone();
            let pd = densify(&particular, a.ncols());
            let diff: Vec<u64> = xd.iter().zip(&pd).map(|(u, v)| (u + m - v) % m).collect();
            let span = howell_form(kernel.clone(), 2, 3);
            let mut with = kernel;
            with.push(sparsify(&diff));
            prop_assert_eq!(howell_form(with, 2, 3), span);
        }

        #[test]
        fn howell_is_canonical((a, _x) in arb_matrix(3, 2), perm_seed in 0usize..100) {
            let mut rows = a.rows().to_vec();
            let k = rows.len();
            rows.rotate_left(perm_seed % k);
            // add a combination of rows
            if k > 1 {
                let extra = axpy(&rows[0], 2, &rows[1], 9);
                rows.push(extra);
            }
            prop_assert_eq!(howell_form(rows, 3, 2), a.rank_profile().form);
        }

        #[test]
        fn howell_at_precision_one_is_rref((a, _x) in arb_matrix(7, 1)) {
            let form = a.rank_profile().form;
            for (i, row) in form.iter().enumerate() {
                prop_assert_eq!(row[0].1, 1);
                for (j, other) in form.iter().enumerate() {
                    if i != j {
                        prop_assert!(other.iter().all(|e| e.0 != row[0].0));
                    }
                }
            }
        }
    }
}
