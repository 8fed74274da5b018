//! Exact integer determinants.
//!
//! [`bareiss`] computes exact determinants (fraction-free elimination, exact
//! divisions only). [`cofactor`] is a plain Laplace expansion kept as an
//! independent cross-check for small matrices.
//!
//! When only the 2-adic valuation of a determinant of powers of two is
//! needed, [`PowerMatrix::det_valuation`] eliminates modulo `2^P` instead,
//! which keeps every number at most `P` bits long.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use crate::graph::ceil_log2;

pub type IntMatrix = Vec<Vec<BigInt>>;

/// Determinant by Bareiss fraction-free elimination with row pivoting.
pub fn bareiss(mut a: IntMatrix) -> BigInt {
    let n = a.len();
    debug_assert!(a.iter().all(|row| row.len() == n));
    if n == 0 {
        return BigInt::one();
    }
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        let (top, rest) = a.split_at_mut(k + 1);
        let pivot_row = &top[k];
        for row in rest.iter_mut() {
            for j in k + 1..n {
                let v = &pivot_row[k] * &row[j] - &row[k] * &pivot_row[j];
                row[j] = v / &prev;
            }
            row[k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}

/// Laplace expansion along the first row. Exponential; meant for n ≤ 6.
pub fn cofactor(a: &[Vec<BigInt>]) -> BigInt {
    let cols: Vec<usize> = (0..a.len()).collect();
    cofactor_rec(a, 0, &cols)
}

fn cofactor_rec(a: &[Vec<BigInt>], row: usize, cols: &[usize]) -> BigInt {
    if cols.is_empty() {
        return BigInt::one();
    }
    let mut acc = BigInt::zero();
    for (pos, &c) in cols.iter().enumerate() {
        if a[row][c].is_zero() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let term = &a[row][c] * cofactor_rec(a, row + 1, &rest);
        if pos % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// Exponent of the largest power of two dividing `x`; `None` for zero.
pub fn two_adic_valuation(x: &BigInt) -> Option<u64> {
    x.trailing_zeros()
}

/// Square matrix whose entries are `2^e` or zero, stored as exponents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerMatrix {
    entries: Vec<Vec<Option<u64>>>,
}

/// A determinant written as `mantissa · 2^shift`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaledDet {
    pub mantissa: BigInt,
    pub shift: u64,
}

impl ScaledDet {
    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn valuation(&self) -> Option<u64> {
        two_adic_valuation(&self.mantissa).map(|v| v + self.shift)
    }

    pub fn to_bigint(&self) -> BigInt {
        &self.mantissa << self.shift
    }

    pub fn abs(&self) -> ScaledDet {
        ScaledDet { mantissa: self.mantissa.abs(), shift: self.shift }
    }
}

impl PowerMatrix {
    pub fn new(entries: Vec<Vec<Option<u64>>>) -> Self {
        debug_assert!(entries.iter().all(|r| r.len() == entries.len()));
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Option<u64> {
        self.entries[i][j]
    }

    /// The matrix with explicit big-integer entries.
    pub fn to_int_matrix(&self) -> IntMatrix {
        self.entries
            .iter()
            .map(|row| row.iter().map(|e| e.map_or_else(BigInt::zero, |x| BigInt::one() << x)).collect())
            .collect()
    }

    pub fn det(&self) -> ScaledDet {
        let rows: Vec<usize> = (0..self.dim()).collect();
        self.det_of(&rows, &rows)
    }

    /// Determinant with row `i` and column `j` deleted.
    pub fn minor(&self, i: usize, j: usize) -> ScaledDet {
        let rows: Vec<usize> = (0..self.dim()).filter(|&r| r != i).collect();
        let cols: Vec<usize> = (0..self.dim()).filter(|&c| c != j).collect();
        self.det_of(&rows, &cols)
    }

    fn det_of(&self, rows: &[usize], cols: &[usize]) -> ScaledDet {
        match self.normalized(rows, cols) {
            Some((exps, shift)) => ScaledDet { mantissa: bareiss(PowerMatrix::new(exps).to_int_matrix()), shift },
            None => ScaledDet { mantissa: BigInt::zero(), shift: 0 },
        }
    }

    /// Factors the smallest power of two out of every row and then every
    /// column. Returns the reduced exponents and the total factored out, or
    /// `None` if some row or column is empty (determinant zero).
    fn normalized(&self, rows: &[usize], cols: &[usize]) -> Option<(Vec<Vec<Option<u64>>>, u64)> {
        let mut exps: Vec<Vec<Option<u64>>> =
            rows.iter().map(|&r| cols.iter().map(|&c| self.entries[r][c]).collect()).collect();
        let mut shift = 0u64;
        for row in exps.iter_mut() {
            let m = row.iter().flatten().copied().min()?;
            shift += m;
            row.iter_mut().flatten().for_each(|e| *e -= m);
        }
        for c in 0..cols.len() {
            let m = exps.iter().filter_map(|row| row[c]).min()?;
            shift += m;
            exps.iter_mut().filter_map(|row| row[c].as_mut()).for_each(|e| *e -= m);
        }
        Some((exps, shift))
    }

    /// 2-adic valuation of the determinant, or `None` if it is zero.
    pub fn det_valuation(&self) -> Option<u64> {
        ValuationOracle::new(self).det_valuation()
    }

    /// 2-adic valuation of the `(i, j)` minor if it is below `cap`; `None`
    /// means the minor is divisible by `2^cap` (possibly zero).
    pub fn minor_valuation_below(&self, i: usize, j: usize, cap: u64) -> Option<u64> {
        ValuationOracle::new(self).minor_valuation_below(i, j, cap)
    }
}

/// Valuations of a [`PowerMatrix`] determinant and its minors, computed
/// modulo `2^P` after rescaling by potentials `u_i + v_j ≤ e_ij`.
///
/// Rows are multiplied by `2^{-u_i}` and columns by `2^{-v_j}`, which scales
/// every determinant involved by a known power of two. The potentials only
/// affect how much precision is needed, never the result. Optimal ones (from
/// the assignment problem) leave an odd determinant whenever the minimum
/// exponent sum is attained by a single permutation.
#[derive(Debug, Clone)]
pub struct ValuationOracle<'a> {
    matrix: &'a PowerMatrix,
    row_pot: Vec<i128>,
    col_pot: Vec<i128>,
}

impl<'a> ValuationOracle<'a> {
    pub fn new(matrix: &'a PowerMatrix) -> Self {
        let (row_pot, col_pot) = assignment_potentials(&matrix.entries)
            .filter(|(u, v)| feasible(&matrix.entries, u, v))
            .unwrap_or_else(|| minima_potentials(&matrix.entries));
        Self { matrix, row_pot, col_pot }
    }

    /// Rescales by row and column minima only.
    pub fn with_minima(matrix: &'a PowerMatrix) -> Self {
        let (row_pot, col_pot) = minima_potentials(&matrix.entries);
        Self { matrix, row_pot, col_pot }
    }

    pub fn det_valuation(&self) -> Option<u64> {
        let all: Vec<usize> = (0..self.matrix.dim()).collect();
        let (exps, shift) = self.reduce(&all, &all)?;
        // |det| ≤ dim! · 2^(sum of row maxima), which bounds any nonzero valuation
        let factorial_bits: u64 = (2..=exps.len()).map(|i| ceil_log2(i) as u64).sum();
        let bound = exps.iter().map(|r| r.iter().flatten().max().copied().unwrap_or(0)).sum::<u64>() + factorial_bits;
        let mut precision = 64;
        loop {
            if let Some(v) = valuation_mod(&exps, precision) {
                return u64::try_from(v as i128 + shift).ok();
            }
            if precision > bound {
                return None;
            }
            precision *= 2;
        }
    }

    pub fn minor_valuation_below(&self, i: usize, j: usize, cap: u64) -> Option<u64> {
        let dim = self.matrix.dim();
        let rows: Vec<usize> = (0..dim).filter(|&r| r != i).collect();
        let cols: Vec<usize> = (0..dim).filter(|&c| c != j).collect();
        let (exps, shift) = self.reduce(&rows, &cols)?;
        let precision = u64::try_from(cap as i128 - shift).ok().filter(|&p| p > 0)?;
        valuation_mod(&exps, precision).and_then(|v| u64::try_from(v as i128 + shift).ok())
    }

    /// Reduced exponents of the submatrix and the power of two factored out.
    fn reduce(&self, rows: &[usize], cols: &[usize]) -> Option<(Vec<Vec<Option<u64>>>, i128)> {
        let mut exps = Vec::with_capacity(rows.len());
        for &r in rows {
            let row: Vec<Option<u64>> = cols
                .iter()
                .map(|&c| self.matrix.entries[r][c].map(|e| (e as i128 - self.row_pot[r] - self.col_pot[c]) as u64))
                .collect();
            if row.iter().all(Option::is_none) {
                return None;
            }
            exps.push(row);
        }
        let shift = rows.iter().map(|&r| self.row_pot[r]).sum::<i128>() + cols.iter().map(|&c| self.col_pot[c]).sum::<i128>();
        Some((exps, shift))
    }
}

fn feasible(entries: &[Vec<Option<u64>>], u: &[i128], v: &[i128]) -> bool {
    entries.iter().enumerate().all(|(i, row)| {
        row.iter().enumerate().all(|(j, e)| e.is_none_or(|e| e as i128 - u[i] - v[j] >= 0))
    })
}

/// Row minima, then column minima of what is left.
fn minima_potentials(entries: &[Vec<Option<u64>>]) -> (Vec<i128>, Vec<i128>) {
    let n = entries.len();
    let u: Vec<i128> = entries.iter().map(|r| r.iter().flatten().min().map_or(0, |&m| m as i128)).collect();
    let v: Vec<i128> = (0..n)
        .map(|j| (0..n).filter_map(|i| entries[i][j].map(|e| e as i128 - u[i])).min().unwrap_or(0))
        .collect();
    (u, v)
}

/// Dual potentials of the minimum-cost assignment (Hungarian method), with
/// absent entries priced above any full assignment of present ones.
fn assignment_potentials(entries: &[Vec<Option<u64>>]) -> Option<(Vec<i128>, Vec<i128>)> {
    let n = entries.len();
    if n == 0 {
        return Some((vec![], vec![]));
    }
    let absent = entries.iter().flatten().flatten().map(|&e| e as i128).sum::<i128>() + 1;
    let cost = |i: usize, j: usize| entries[i - 1][j - 1].map_or(absent, |e| e as i128);
    // 1-based; column 0 is the virtual start
    let mut u = vec![0i128; n + 1];
    let mut v = vec![0i128; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![i128::MAX; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = i128::MAX;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            if j1 == 0 {
                return None;
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    Some((u[1..].to_vec(), v[1..].to_vec()))
}

/// Valuation of `det(2^exps)` if it is below `precision`, by elimination over
/// `Z / 2^precision`. Each step pivots on an entry of minimal valuation in the
/// remaining block, so dividing the pivot row by the pivot's unit part and
/// clearing the column stays exact modulo `2^precision`.
fn valuation_mod(exps: &[Vec<Option<u64>>], precision: u64) -> Option<u64> {
    let n = exps.len();
    let modulus_mask = (BigUint::one() << precision) - 1u32;
    let mut a: Vec<Vec<BigUint>> = exps
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| match e {
                    Some(x) if *x < precision => BigUint::one() << *x,
                    _ => BigUint::zero(),
                })
                .collect()
        })
        .collect();
    let mut rows: Vec<usize> = (0..n).collect();
    let mut cols: Vec<usize> = (0..n).collect();
    let mut total = 0u64;
    while !rows.is_empty() {
        let mut best: Option<(u64, usize, usize)> = None;
        for (ri, &r) in rows.iter().enumerate() {
            for (ci, &c) in cols.iter().enumerate() {
                if let Some(v) = a[r][c].trailing_zeros() {
                    if best.is_none_or(|(bv, _, _)| v < bv) {
                        best = Some((v, ri, ci));
                    }
                }
            }
        }
        let (v, ri, ci) = best?;
        total += v;
        if total >= precision {
            return None;
        }
        let (pr, pc) = (rows.swap_remove(ri), cols.swap_remove(ci));
        let inverse = unit_inverse(&(&a[pr][pc] >> v), precision);
        for &r in &rows {
            if a[r][pc].is_zero() {
                continue;
            }
            let factor = ((&a[r][pc] >> v) * &inverse) & &modulus_mask;
            for &c in &cols {
                let sub = (&factor * &a[pr][c]) & &modulus_mask;
                a[r][c] = ((&a[r][c] + &modulus_mask + 1u32) - sub) & &modulus_mask;
            }
            a[r][pc] = BigUint::zero();
        }
    }
    Some(total)
}

/// Inverse of an odd number modulo `2^bits` by Newton iteration.
fn unit_inverse(u: &BigUint, bits: u64) -> BigUint {
    debug_assert!(u.bit(0));
    let mask = (BigUint::one() << bits) - 1u32;
    let two = BigUint::from(2u32);
    let mut x = BigUint::one();
    let mut correct = 1u64;
    while correct < bits {
        // x ← x · (2 − u·x), computed as x · (2 + 2^bits − u·x mod 2^bits)
        let ux = (u * &x) & &mask;
        x = (&x * ((&two + &mask + 1u32) - ux)) & &mask;
        correct *= 2;
    }
    x
}
