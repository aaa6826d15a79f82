//! Exact linear algebra over the rationals and Laurent coefficient windows.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Q = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("cannot parse rational {0:?}")]
    Parse(String),
}

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"3"`, `"-3/2"` and similar into an exact rational.
pub fn parse_q(s: &str) -> Result<Q, ExactError> {
    let s = s.trim();
    let bad = || ExactError::Parse(s.to_string());
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn factorial(n: usize) -> Q {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= BigInt::from(i);
    }
    Q::from_integer(acc)
}

pub fn zero_vec(n: usize) -> Vec<Q> {
    vec![Q::zero(); n]
}

pub fn unit_vec(n: usize, i: usize) -> Vec<Q> {
    let mut v = zero_vec(n);
    v[i] = Q::one();
    v
}

pub fn is_zero_vec(v: &[Q]) -> bool {
    v.iter().all(|x| x.is_zero())
}

pub fn add_scaled(acc: &mut [Q], c: &Q, v: &[Q]) {
    if c.is_zero() {
        return;
    }
    for (a, b) in acc.iter_mut().zip(v) {
        if !b.is_zero() {
            *a += c * b;
        }
    }
}

pub fn sub_vec(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add_vec(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale_vec(c: &Q, v: &[Q]) -> Vec<Q> {
    v.iter().map(|x| c * x).collect()
}

/// Dense row-major matrix with rational entries.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Q>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| fmt_q(self.get(r, c))).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Q::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Q::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Q>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        Matrix { rows: r, cols: c, data }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect())
    }

    /// Builds a matrix whose columns are the given vectors of length `rows`.
    pub fn from_columns(rows: usize, cols: &[Vec<Q>]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, x) in col.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn get(&self, r: usize, c: usize) -> &Q {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Q) {
        self.data[r * self.cols + c] = v;
    }

    pub fn add_at(&mut self, r: usize, c: usize, v: &Q) {
        self.data[r * self.cols + c] += v;
    }

    pub fn row(&self, r: usize) -> Vec<Q> {
        self.data[r * self.cols..(r + 1) * self.cols].to_vec()
    }

    pub fn column(&self, c: usize) -> Vec<Q> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn set_column(&mut self, c: usize, v: &[Q]) {
        for (r, x) in v.iter().enumerate() {
            self.set(r, c, x.clone());
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matrix product shape");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape");
        let mut out = zero_vec(self.rows);
        for (c, x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (r, o) in out.iter_mut().enumerate() {
                let a = self.get(r, c);
                if !a.is_zero() {
                    *o += a * x;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: &Q) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * c).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn trace(&self) -> Q {
        (0..self.rows.min(self.cols)).fold(Q::zero(), |acc, i| acc + self.get(i, i))
    }

    pub fn commutator(&self, other: &Matrix) -> Matrix {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn rank(&self) -> usize {
        rref(self).1.len()
    }

    /// Inverse of a square matrix, `None` when singular.
    pub fn inverse(&self) -> Option<Matrix> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let mut aug = Matrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, Q::one());
        }
        let (r, pivots) = rref(&aug);
        if pivots.len() < n || pivots[n - 1] >= n {
            return None;
        }
        let mut inv = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, r.get(i, n + j).clone());
            }
        }
        Some(inv)
    }

    pub fn is_identity(&self) -> bool {
        *self == Matrix::identity(self.rows)
    }
}

/// Reduced row echelon form with the first nonzero pivot taken in column order.
pub fn rref(m: &Matrix) -> (Matrix, Vec<usize>) {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..a.cols {
        if r == a.rows {
            break;
        }
        let Some(p) = (r..a.rows).find(|&i| !a.get(i, c).is_zero()) else {
            continue;
        };
        if p != r {
            for j in 0..a.cols {
                a.data.swap(p * a.cols + j, r * a.cols + j);
            }
        }
        let inv = a.get(r, c).recip();
        for j in c..a.cols {
            let v = a.get(r, j) * &inv;
            a.set(r, j, v);
        }
        let pivot_row = a.row(r);
        for i in 0..a.rows {
            if i == r {
                continue;
            }
            let f = a.get(i, c).clone();
            if f.is_zero() {
                continue;
            }
            for j in c..a.cols {
                if !pivot_row[j].is_zero() {
                    let v = a.get(i, j) - &f * &pivot_row[j];
                    a.set(i, j, v);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

#[derive(Debug, Clone)]
pub struct RankKernelImage {
    pub rank: usize,
    pub kernel: Vec<Vec<Q>>,
    pub image: Vec<Vec<Q>>,
}

pub fn rank_kernel_image(m: &Matrix) -> RankKernelImage {
    let (r, pivots) = rref(m);
    let mut kernel = Vec::new();
    let mut is_pivot = vec![false; m.cols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    for free in (0..m.cols).filter(|&c| !is_pivot[c]) {
        let mut v = zero_vec(m.cols);
        v[free] = Q::one();
        for (row, &p) in pivots.iter().enumerate() {
            v[p] = -r.get(row, free).clone();
        }
        kernel.push(v);
    }
    let image = pivots.iter().map(|&p| m.column(p)).collect();
    RankKernelImage { rank: pivots.len(), kernel, image }
}

/// Returns some `x` with `m x = b`, or `None` when `b` is outside the image.
pub fn solve(m: &Matrix, b: &[Q]) -> Result<Option<Vec<Q>>, ExactError> {
    if b.len() != m.rows {
        return Err(ExactError::Dimension { expected: m.rows, found: b.len() });
    }
    let mut aug = Matrix::zeros(m.rows, m.cols + 1);
    for i in 0..m.rows {
        for j in 0..m.cols {
            aug.set(i, j, m.get(i, j).clone());
        }
        aug.set(i, m.cols, b[i].clone());
    }
    let (r, pivots) = rref(&aug);
    if pivots.last() == Some(&m.cols) {
        return Ok(None);
    }
    let mut x = zero_vec(m.cols);
    for (row, &p) in pivots.iter().enumerate() {
        x[p] = r.get(row, m.cols).clone();
    }
    Ok(Some(x))
}

/// A subspace of `Q^n` kept in reduced echelon form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace {
    pub ambient: usize,
    rows: Vec<Vec<Q>>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace { ambient, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(ambient: usize) -> Self {
        Self::span(ambient, (0..ambient).map(|i| unit_vec(ambient, i)))
    }

    pub fn span<I: IntoIterator<Item = Vec<Q>>>(ambient: usize, vs: I) -> Self {
        let mut s = Self::zero(ambient);
        for v in vs {
            s.insert(v);
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> &[Vec<Q>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Canonical representative of `v` modulo the subspace: zero in every pivot column.
    pub fn reduce(&self, v: &[Q]) -> Vec<Q> {
        let mut w = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if !w[p].is_zero() {
                let c = w[p].clone();
                for (a, b) in w.iter_mut().zip(row) {
                    if !b.is_zero() {
                        *a -= &c * b;
                    }
                }
            }
        }
        w
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        is_zero_vec(&self.reduce(v))
    }

    /// Coordinates of `v` in the echelon basis; meaningful only when `contains(v)`.
    pub fn coords(&self, v: &[Q]) -> Vec<Q> {
        self.pivots.iter().map(|&p| v[p].clone()).collect()
    }

    /// Adds `v` to the span; returns whether the dimension grew.
    pub fn insert(&mut self, v: Vec<Q>) -> bool {
        assert_eq!(v.len(), self.ambient, "subspace ambient dimension");
        let w = self.reduce(&v);
        let Some(p) = w.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = w[p].recip();
        let w: Vec<Q> = w.iter().map(|x| x * &inv).collect();
        for row in self.rows.iter_mut() {
            if !row[p].is_zero() {
                let c = row[p].clone();
                for (a, b) in row.iter_mut().zip(&w) {
                    if !b.is_zero() {
                        *a -= &c * b;
                    }
                }
            }
        }
        let at = self.pivots.partition_point(|&q| q < p);
        self.pivots.insert(at, p);
        self.rows.insert(at, w);
        true
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.rows.iter().all(|r| other.contains(r))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut s = self.clone();
        for r in &other.rows {
            s.insert(r.clone());
        }
        s
    }

    pub fn intersection(&self, other: &Subspace) -> Subspace {
        let n = self.ambient;
        if self.dim() == 0 || other.dim() == 0 {
            return Subspace::zero(n);
        }
        let mut cols = self.rows.clone();
        cols.extend(other.rows.iter().map(|r| r.iter().map(|x| -x).collect()));
        let m = Matrix::from_columns(n, &cols);
        let ker = rank_kernel_image(&m).kernel;
        Subspace::span(
            n,
            ker.into_iter().map(|k| {
                let mut v = zero_vec(n);
                for (c, row) in k.iter().zip(&self.rows) {
                    add_scaled(&mut v, c, row);
                }
                v
            }),
        )
    }

    /// Image of the subspace under a linear map.
    pub fn image_under(&self, m: &Matrix) -> Subspace {
        Subspace::span(m.rows, self.rows.iter().map(|r| m.mul_vec(r)))
    }

    /// Preimage `{x : m x ∈ self}` inside the whole domain of `m`.
    pub fn preimage(&self, m: &Matrix) -> Subspace {
        let quot = Quotient::new(self.clone());
        let composed = quot.project.mul(m);
        Subspace::span(m.cols, rank_kernel_image(&composed).kernel)
    }
}

/// Quotient of `Q^n` by a subspace with canonical representatives.
#[derive(Debug, Clone)]
pub struct Quotient {
    pub sub: Subspace,
    /// Standard basis vectors at the non-pivot columns.
    pub representatives: Vec<Vec<Q>>,
    /// Matrix of the projection onto quotient coordinates.
    pub project: Matrix,
    free: Vec<usize>,
}

impl Quotient {
    pub fn new(sub: Subspace) -> Self {
        let n = sub.ambient;
        let mut is_pivot = vec![false; n];
        for &p in sub.pivots() {
            is_pivot[p] = true;
        }
        let free: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
        let representatives = free.iter().map(|&c| unit_vec(n, c)).collect();
        let mut project = Matrix::zeros(free.len(), n);
        for j in 0..n {
            let r = sub.reduce(&unit_vec(n, j));
            for (i, &c) in free.iter().enumerate() {
                project.set(i, j, r[c].clone());
            }
        }
        Quotient { sub, representatives, project, free }
    }

    pub fn dim(&self) -> usize {
        self.free.len()
    }

    /// Ambient indices of the representatives.
    pub fn free(&self) -> &[usize] {
        &self.free
    }

    pub fn coords(&self, v: &[Q]) -> Vec<Q> {
        let r = self.sub.reduce(v);
        self.free.iter().map(|&c| r[c].clone()).collect()
    }

    pub fn lift(&self, coords: &[Q]) -> Vec<Q> {
        let mut v = zero_vec(self.sub.ambient);
        for (c, &i) in coords.iter().zip(&self.free) {
            v[i] = c.clone();
        }
        v
    }
}

pub fn quotient_basis(sub: &[Vec<Q>], ambient: usize) -> Quotient {
    Quotient::new(Subspace::span(ambient, sub.iter().cloned()))
}

/// Exact Laurent polynomial in one variable.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Laurent(pub BTreeMap<i64, Q>);

impl Laurent {
    pub fn zero() -> Self {
        Laurent(BTreeMap::new())
    }

    pub fn monomial(c: Q, e: i64) -> Self {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(e, c);
        }
        Laurent(m)
    }

    pub fn constant(c: Q) -> Self {
        Self::monomial(c, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add_term(&mut self, e: i64, c: &Q) {
        if c.is_zero() {
            return;
        }
        let entry = self.0.entry(e).or_insert_with(Q::zero);
        *entry += c;
        if entry.is_zero() {
            self.0.remove(&e);
        }
    }

    pub fn add(&self, o: &Laurent) -> Laurent {
        let mut r = self.clone();
        for (e, c) in &o.0 {
            r.add_term(*e, c);
        }
        r
    }

    pub fn sub(&self, o: &Laurent) -> Laurent {
        self.add(&o.scale(&-Q::one()))
    }

    pub fn scale(&self, c: &Q) -> Laurent {
        if c.is_zero() {
            return Laurent::zero();
        }
        Laurent(self.0.iter().map(|(e, x)| (*e, x * c)).collect())
    }

    pub fn mul(&self, o: &Laurent) -> Laurent {
        let mut r = Laurent::zero();
        for (e1, c1) in &self.0 {
            for (e2, c2) in &o.0 {
                r.add_term(e1 + e2, &(c1 * c2));
            }
        }
        r
    }

    pub fn derivative(&self) -> Laurent {
        let mut r = Laurent::zero();
        for (e, c) in &self.0 {
            r.add_term(e - 1, &(c * q(*e)));
        }
        r
    }

    pub fn coeff(&self, e: i64) -> Q {
        self.0.get(&e).cloned().unwrap_or_else(Q::zero)
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.0.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.0.keys().next_back().copied()
    }

    /// `Some((c, e))` when the polynomial is the single term `c t^e`.
    pub fn as_monomial(&self) -> Option<(Q, i64)> {
        if self.0.len() == 1 {
            let (e, c) = self.0.iter().next().unwrap();
            Some((c.clone(), *e))
        } else {
            None
        }
    }

    /// Substitutes `t -> 1/t`.
    pub fn invert_variable(&self) -> Laurent {
        Laurent(self.0.iter().map(|(e, c)| (-e, c.clone())).collect())
    }
}

impl fmt::Display for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(e, c)| match e {
                0 => fmt_q(c),
                1 => format!("{}*t", fmt_q(c)),
                _ => format!("{}*t^{}", fmt_q(c), e),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Laurent coefficients restricted to an exponent window `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentWindow {
    pub var: String,
    pub lo: i64,
    pub hi: i64,
    coeffs: Vec<Q>,
}

impl LaurentWindow {
    pub fn zero(var: &str, lo: i64, hi: i64) -> Self {
        assert!(lo <= hi, "empty Laurent window");
        LaurentWindow { var: var.to_string(), lo, hi, coeffs: zero_vec((hi - lo + 1) as usize) }
    }

    /// Restricts `p` to the window; the flag reports whether a nonzero coefficient was dropped.
    pub fn from_laurent(var: &str, lo: i64, hi: i64, p: &Laurent) -> (Self, bool) {
        let mut w = Self::zero(var, lo, hi);
        let mut truncated = false;
        for (e, c) in &p.0 {
            if (lo..=hi).contains(e) {
                w.coeffs[(e - lo) as usize] = c.clone();
            } else {
                truncated = true;
            }
        }
        (w, truncated)
    }

    pub fn width(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, e: i64) -> Q {
        if (self.lo..=self.hi).contains(&e) {
            self.coeffs[(e - self.lo) as usize].clone()
        } else {
            Q::zero()
        }
    }

    pub fn set(&mut self, e: i64, c: Q) -> bool {
        if (self.lo..=self.hi).contains(&e) {
            self.coeffs[(e - self.lo) as usize] = c;
            true
        } else {
            c.is_zero()
        }
    }

    pub fn to_laurent(&self) -> Laurent {
        let mut p = Laurent::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            p.add_term(self.lo + i as i64, c);
        }
        p
    }

    /// Product kept in this window; the flag is raised when a nonzero product coefficient falls outside.
    pub fn mul(&self, other: &LaurentWindow) -> (LaurentWindow, bool) {
        let p = self.to_laurent().mul(&other.to_laurent());
        Self::from_laurent(&self.var, self.lo, self.hi, &p)
    }

    pub fn add(&self, other: &LaurentWindow) -> (LaurentWindow, bool) {
        let p = self.to_laurent().add(&other.to_laurent());
        Self::from_laurent(&self.var, self.lo, self.hi, &p)
    }

    /// The window widened by half its width (at least one exponent on each side).
    pub fn widened(lo: i64, hi: i64) -> (i64, i64) {
        let grow = ((hi - lo + 1) / 4).max(1);
        (lo - grow, hi + grow)
    }
}

/// Sign `(-1)^n` as a rational.
pub fn sign(n: i64) -> Q {
    if n.rem_euclid(2) == 0 {
        Q::one()
    } else {
        -Q::one()
    }
}

pub fn abs_q(x: &Q) -> Q {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proportional_rows() {
        let m = Matrix::from_i64(&[&[1, 2], &[2, 4]]);
        let rki = rank_kernel_image(&m);
        assert_eq!(rki.rank, 1);
        assert_eq!(rki.kernel, vec![vec![q(-2), q(1)]]);
    }

    #[test]
    fn zero_matrix_kernel_is_everything() {
        let rki = rank_kernel_image(&Matrix::zeros(3, 3));
        assert_eq!(rki.rank, 0);
        assert_eq!(rki.kernel.len(), 3);
        assert_eq!(rki.kernel[1], unit_vec(3, 1));
    }

    #[test]
    fn solve_cases() {
        let id = Matrix::identity(2);
        assert_eq!(solve(&id, &[q(4), q(5)]).unwrap(), Some(vec![q(4), q(5)]));
        let m = Matrix::from_i64(&[&[1, 2], &[2, 4]]);
        assert_eq!(solve(&m, &[q(1), q(3)]).unwrap(), None);
        assert_eq!(solve(&Matrix::from_i64(&[&[2]]), &[q(3)]).unwrap(), Some(vec![qr(3, 2)]));
        assert!(solve(&m, &[q(1)]).is_err());
    }

    #[test]
    fn quotient_cases() {
        let qt = quotient_basis(&[], 2);
        assert_eq!(qt.dim(), 2);
        assert_eq!(qt.project, Matrix::identity(2));
        let full = quotient_basis(&[unit_vec(2, 0), unit_vec(2, 1)], 2);
        assert_eq!(full.dim(), 0);
        let diag = quotient_basis(&[vec![q(1), q(1)]], 2);
        assert_eq!(diag.dim(), 1);
        assert!(!is_zero_vec(&diag.project.mul_vec(&unit_vec(2, 1))));
        assert!(is_zero_vec(&diag.project.mul_vec(&[q(1), q(1)])));
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_q("-3/2").unwrap(), qr(-3, 2));
        assert_eq!(parse_q(" 7 ").unwrap(), q(7));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("x").is_err());
        assert_eq!(fmt_q(&qr(6, -4)), "-3/2");
    }

    #[test]
    fn intersection_and_preimage() {
        let a = Subspace::span(3, [unit_vec(3, 0), unit_vec(3, 1)]);
        let b = Subspace::span(3, [unit_vec(3, 1), unit_vec(3, 2)]);
        let i = a.intersection(&b);
        assert_eq!(i.dim(), 1);
        assert!(i.contains(&unit_vec(3, 1)));
        let m = Matrix::from_i64(&[&[0, 1, 0], &[0, 0, 1], &[0, 0, 0]]);
        let pre = Subspace::span(3, [unit_vec(3, 0)]).preimage(&m);
        assert_eq!(pre.dim(), 2);
    }

    #[test]
    fn window_truncation_flag() {
        let a = LaurentWindow::from_laurent("t", -1, 1, &Laurent::monomial(q(1), 1)).0;
        let (sq, flagged) = a.mul(&a);
        assert!(flagged);
        assert!(sq.to_laurent().is_zero());
        let b = LaurentWindow::from_laurent("t", -1, 1, &Laurent::monomial(q(2), -1)).0;
        let (p, flagged) = a.mul(&b);
        assert!(!flagged);
        assert_eq!(p.coeff(0), q(2));
    }
}
