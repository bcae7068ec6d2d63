//! Exact rational scalars and sparse linear algebra.
//!
//! Everything downstream (radicals, quotient dimensions, recurrence search)
//! reduces to rank and kernel computations over `Rational`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

pub type Rational = BigRational;

/// Matrices with fewer columns than this are reduced densely.
const DENSE_COLS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid rational literal {0:?}")]
    ParseRational(String),
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `p`, `-p`, `p/q` (whitespace tolerated). Zero denominators are rejected.
pub fn parse_rational(s: &str) -> Result<Rational, LinalgError> {
    let t = s.trim();
    let err = || LinalgError::ParseRational(s.to_string());
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| err())?;
    let d: BigInt = d.parse().map_err(|_| err())?;
    if d.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(n, d))
}

/// Canonical text form: `p/q`, or `p` when the denominator is one.
pub fn fmt_rational(r: &Rational) -> String {
    r.to_string()
}

/// Serde adapter writing rationals as strings.
pub mod serde_rational {
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            S(String),
            I(i64),
        }
        match Raw::deserialize(d)? {
            Raw::S(s) => parse_rational(&s).map_err(de::Error::custom),
            Raw::I(i) => Ok(int(i)),
        }
    }
}

/// Serde adapter for sequences of rationals written as strings.
pub mod serde_rational_vec {
    use super::*;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "super::serde_rational")] Rational);

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let w: Vec<Wrap> = v.iter().cloned().map(Wrap).collect();
        w.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let w: Vec<Wrap> = Vec::deserialize(d)?;
        Ok(w.into_iter().map(|x| x.0).collect())
    }
}

/// Sparse vector: entries sorted by index, no stored zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SparseVector {
    dim: usize,
    entries: Vec<(usize, Rational)>,
}

impl SparseVector {
    pub fn zero(dim: usize) -> Self {
        SparseVector { dim, entries: Vec::new() }
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        assert!(i < dim, "index out of range");
        SparseVector { dim, entries: vec![(i, Rational::one())] }
    }

    pub fn from_dense(v: &[Rational]) -> Self {
        let entries = v
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(i, x)| (i, x.clone()))
            .collect();
        SparseVector { dim: v.len(), entries }
    }

    /// Builds from unsorted entries, summing duplicates.
    pub fn from_entries<I: IntoIterator<Item = (usize, Rational)>>(dim: usize, it: I) -> Self {
        let mut map: BTreeMap<usize, Rational> = BTreeMap::new();
        for (i, x) in it {
            assert!(i < dim, "index out of range");
            *map.entry(i).or_insert_with(Rational::zero) += x;
        }
        let entries = map.into_iter().filter(|(_, x)| !x.is_zero()).collect();
        SparseVector { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(usize, Rational)] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> Rational {
        match self.entries.binary_search_by_key(&i, |e| e.0) {
            Ok(k) => self.entries[k].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    pub fn leading(&self) -> Option<usize> {
        self.entries.first().map(|e| e.0)
    }

    pub fn to_dense(&self) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.dim];
        for (i, x) in &self.entries {
            v[*i] = x.clone();
        }
        v
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return SparseVector::zero(self.dim);
        }
        SparseVector {
            dim: self.dim,
            entries: self.entries.iter().map(|(i, x)| (*i, x * c)).collect(),
        }
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, other: &SparseVector, c: &Rational) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        SparseVector {
            dim: self.dim,
            entries: merge_scaled(&self.entries, &other.entries, c),
        }
    }

    pub fn add(&self, other: &SparseVector) -> Self {
        self.add_scaled(other, &Rational::one())
    }

    pub fn sub(&self, other: &SparseVector) -> Self {
        self.add_scaled(other, &-Rational::one())
    }

    /// Reindexes into a space of dimension `dim` via `f`, summing collisions.
    pub fn remap(&self, dim: usize, f: impl Fn(usize) -> usize) -> Self {
        SparseVector::from_entries(dim, self.entries.iter().map(|(i, x)| (f(*i), x.clone())))
    }
}

fn merge_scaled(
    a: &[(usize, Rational)],
    b: &[(usize, Rational)],
    c: &Rational,
) -> Vec<(usize, Rational)> {
    if c.is_zero() {
        return a.to_vec();
    }
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push((b[j].0, &b[j].1 * c));
            j += 1;
        } else {
            let s = &a[i].1 + &b[j].1 * c;
            if !s.is_zero() {
                out.push((a[i].0, s));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

impl fmt::Display for SparseVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.to_dense().iter().map(fmt_rational).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Row-major sparse matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Vec<(usize, Rational)>>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, data: vec![Vec::new(); rows] }
    }

    pub fn identity(n: usize) -> Self {
        let data = (0..n).map(|i| vec![(i, Rational::one())]).collect();
        SparseMatrix { rows: n, cols: n, data }
    }

    pub fn from_dense(rows: &[Vec<Rational>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let data = rows
            .iter()
            .map(|r| {
                assert_eq!(r.len(), cols, "ragged matrix");
                SparseVector::from_dense(r).entries
            })
            .collect();
        SparseMatrix { rows: rows.len(), cols, data }
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Self {
        let r: Vec<Vec<Rational>> =
            rows.iter().map(|row| row.iter().map(|&x| int(x)).collect()).collect();
        SparseMatrix::from_dense(&r)
    }

    pub fn from_triplets<I: IntoIterator<Item = (usize, usize, Rational)>>(
        rows: usize,
        cols: usize,
        it: I,
    ) -> Self {
        let mut per_row: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); rows];
        for (r, c, x) in it {
            assert!(r < rows && c < cols, "index out of range");
            per_row[r].push((c, x));
        }
        let data = per_row
            .into_iter()
            .map(|entries| SparseVector::from_entries(cols, entries).entries)
            .collect();
        SparseMatrix { rows, cols, data }
    }

    pub fn from_rows(cols: usize, rows: Vec<SparseVector>) -> Self {
        let n = rows.len();
        let data = rows
            .into_iter()
            .map(|r| {
                assert_eq!(r.dim, cols, "dimension mismatch");
                r.entries
            })
            .collect();
        SparseMatrix { rows: n, cols, data }
    }

    pub fn from_columns(rows: usize, cols: &[SparseVector]) -> Self {
        let mut data: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); rows];
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.dim, rows, "dimension mismatch");
            for (i, x) in &c.entries {
                data[*i].push((j, x.clone()));
            }
        }
        SparseMatrix { rows, cols: cols.len(), data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> SparseVector {
        SparseVector { dim: self.cols, entries: self.data[i].clone() }
    }

    pub fn row_entries(&self, i: usize) -> &[(usize, Rational)] {
        &self.data[i]
    }

    pub fn get(&self, r: usize, c: usize) -> Rational {
        match self.data[r].binary_search_by_key(&c, |e| e.0) {
            Ok(k) => self.data[r][k].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(|r| r.len()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|r| r.is_empty())
    }

    /// Iterates nonzero entries as `(row, col, value)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Rational)> {
        self.data
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |(j, x)| (i, *j, x)))
    }

    pub fn to_dense(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_dense()).collect()
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut data: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); self.cols];
        for (i, j, x) in self.entries() {
            data[j].push((i, x.clone()));
        }
        SparseMatrix { rows: self.cols, cols: self.rows, data }
    }

    pub fn mul_vec(&self, v: &SparseVector) -> Result<SparseVector, LinalgError> {
        if v.dim != self.cols {
            return Err(LinalgError::DimensionMismatch { expected: self.cols, got: v.dim });
        }
        let mut out = Vec::new();
        for (i, r) in self.data.iter().enumerate() {
            let mut s = Rational::zero();
            let (mut a, mut b) = (0, 0);
            while a < r.len() && b < v.entries.len() {
                match r[a].0.cmp(&v.entries[b].0) {
                    std::cmp::Ordering::Less => a += 1,
                    std::cmp::Ordering::Greater => b += 1,
                    std::cmp::Ordering::Equal => {
                        s += &r[a].1 * &v.entries[b].1;
                        a += 1;
                        b += 1;
                    }
                }
            }
            if !s.is_zero() {
                out.push((i, s));
            }
        }
        Ok(SparseVector { dim: self.rows, entries: out })
    }

    pub fn mul(&self, other: &SparseMatrix) -> Result<SparseMatrix, LinalgError> {
        if other.rows != self.cols {
            return Err(LinalgError::DimensionMismatch { expected: self.cols, got: other.rows });
        }
        let mut data = Vec::with_capacity(self.rows);
        for r in &self.data {
            let mut acc: Vec<(usize, Rational)> = Vec::new();
            for (k, x) in r {
                acc = merge_scaled(&acc, &other.data[*k], x);
            }
            data.push(acc);
        }
        Ok(SparseMatrix { rows: self.rows, cols: other.cols, data })
    }

    pub fn sub(&self, other: &SparseMatrix) -> SparseMatrix {
        assert!(self.rows == other.rows && self.cols == other.cols, "shape mismatch");
        let m1 = -Rational::one();
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| merge_scaled(a, b, &m1))
            .collect();
        SparseMatrix { rows: self.rows, cols: self.cols, data }
    }
}

/// Result of a reduced row-echelon computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub matrix: SparseMatrix,
    pub pivots: Vec<usize>,
    pub rank: usize,
}

/// Reduced row-echelon form. Nonzero rows come first, ordered by pivot column.
pub fn rref(m: &SparseMatrix) -> Rref {
    let rows = if m.cols < DENSE_COLS { rref_rows_dense(m) } else { rref_rows_sparse(m) };
    finish_rref(m.rows, m.cols, rows)
}

fn finish_rref(nrows: usize, cols: usize, rows: Vec<SparseVector>) -> Rref {
    let pivots: Vec<usize> = rows.iter().map(|r| r.leading().expect("nonzero row")).collect();
    let rank = rows.len();
    let mut data: Vec<Vec<(usize, Rational)>> = rows.into_iter().map(|r| r.entries).collect();
    data.resize(nrows.max(rank), Vec::new());
    Rref { matrix: SparseMatrix { rows: nrows.max(rank), cols, data }, pivots, rank }
}

pub(crate) fn rref_rows_sparse(m: &SparseMatrix) -> Vec<SparseVector> {
    let mut e = Echelon::new(m.cols);
    for i in 0..m.rows {
        e.insert(m.row(i));
    }
    e.into_reduced_rows()
}

pub(crate) fn rref_rows_dense(m: &SparseMatrix) -> Vec<SparseVector> {
    let mut a = m.to_dense();
    let mut prow = 0;
    for col in 0..m.cols {
        let Some(p) = (prow..a.len()).find(|&i| !a[i][col].is_zero()) else { continue };
        a.swap(prow, p);
        let inv = a[prow][col].recip();
        for x in a[prow].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = a[prow].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != prow && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        prow += 1;
        if prow == a.len() {
            break;
        }
    }
    a.truncate(prow);
    a.iter().map(|r| SparseVector::from_dense(r)).collect()
}

pub fn rank(m: &SparseMatrix) -> usize {
    let mut e = Echelon::new(m.cols);
    for i in 0..m.rows {
        e.insert(m.row(i));
    }
    e.rank()
}

/// Basis of the null space `{v : m v = 0}`, one vector per free column.
pub fn kernel_basis(m: &SparseMatrix) -> Vec<SparseVector> {
    let r = rref(m);
    let pivot_set: std::collections::BTreeSet<usize> = r.pivots.iter().copied().collect();
    let mut out = Vec::new();
    for f in (0..m.cols).filter(|c| !pivot_set.contains(c)) {
        let mut entries = vec![(f, Rational::one())];
        for (i, &p) in r.pivots.iter().enumerate() {
            let x = r.matrix.get(i, f);
            if !x.is_zero() {
                entries.push((p, -x));
            }
        }
        out.push(SparseVector::from_entries(m.cols, entries));
    }
    out
}

/// Incrementally built row-echelon basis. Each stored row is monic at its pivot
/// and has no entries in earlier pivot columns.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    dim: usize,
    rows: BTreeMap<usize, Vec<(usize, Rational)>>,
}

impl Echelon {
    pub fn new(dim: usize) -> Self {
        Echelon { dim, rows: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.rows.keys().copied().collect()
    }

    /// Remainder of `v` after elimination against the stored rows.
    pub fn reduce(&self, v: &SparseVector) -> SparseVector {
        assert_eq!(v.dim, self.dim, "dimension mismatch");
        SparseVector { dim: self.dim, entries: self.reduce_entries(v.entries.clone()) }
    }

    fn reduce_entries(&self, mut cur: Vec<(usize, Rational)>) -> Vec<(usize, Rational)> {
        if self.rows.is_empty() {
            return cur;
        }
        let mut start = 0;
        loop {
            let hit = cur[start..]
                .iter()
                .position(|(c, _)| self.rows.contains_key(c))
                .map(|k| k + start);
            let Some(k) = hit else { return cur };
            let (col, coef) = cur[k].clone();
            let row = &self.rows[&col];
            cur = merge_scaled(&cur, row, &-coef);
            start = cur.partition_point(|e| e.0 <= col);
        }
    }

    pub fn contains(&self, v: &SparseVector) -> bool {
        self.reduce(v).is_zero()
    }

    /// Inserts `v`; returns true when it enlarged the span.
    pub fn insert(&mut self, v: SparseVector) -> bool {
        assert_eq!(v.dim, self.dim, "dimension mismatch");
        let r = self.reduce_entries(v.entries);
        let Some((p, lead)) = r.first().cloned() else { return false };
        let inv = lead.recip();
        let row: Vec<(usize, Rational)> = r.into_iter().map(|(c, x)| (c, x * &inv)).collect();
        self.rows.insert(p, row);
        true
    }

    /// Stored rows in pivot order (not back-reduced).
    pub fn rows(&self) -> Vec<SparseVector> {
        self.rows
            .values()
            .map(|r| SparseVector { dim: self.dim, entries: r.clone() })
            .collect()
    }

    /// Fully reduced rows, ordered by pivot.
    pub fn into_reduced_rows(self) -> Vec<SparseVector> {
        let dim = self.dim;
        let pivots: Vec<usize> = self.rows.keys().copied().collect();
        let mut done: BTreeMap<usize, Vec<(usize, Rational)>> = BTreeMap::new();
        for &p in pivots.iter().rev() {
            let mut row = self.rows[&p].clone();
            let mut k = 1;
            while k < row.len() {
                let (c, x) = row[k].clone();
                if let Some(other) = done.get(&c) {
                    row = merge_scaled(&row, other, &-x);
                    k = row.partition_point(|e| e.0 <= c);
                } else {
                    k += 1;
                }
            }
            done.insert(p, row);
        }
        done.into_values().map(|r| SparseVector { dim, entries: r }).collect()
    }
}

/// A subspace of `Q^n` held as a reduced row-echelon basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<SparseVector>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace { ambient, basis: Vec::new() }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace { ambient, basis: (0..ambient).map(|i| SparseVector::unit(ambient, i)).collect() }
    }

    pub fn span(ambient: usize, vectors: &[SparseVector]) -> Result<Self, LinalgError> {
        let mut e = Echelon::new(ambient);
        for v in vectors {
            if v.dim != ambient {
                return Err(LinalgError::DimensionMismatch { expected: ambient, got: v.dim });
            }
            e.insert(v.clone());
        }
        Ok(Subspace { ambient, basis: e.into_reduced_rows() })
    }

    pub fn span_dense(ambient: usize, vectors: &[Vec<Rational>]) -> Result<Self, LinalgError> {
        let v: Vec<SparseVector> = vectors.iter().map(|x| SparseVector::from_dense(x)).collect();
        Subspace::span(ambient, &v)
    }

    pub fn from_echelon(e: Echelon) -> Self {
        let ambient = e.dim();
        Subspace { ambient, basis: e.into_reduced_rows() }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[SparseVector] {
        &self.basis
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.basis.iter().map(|r| r.leading().expect("nonzero row")).collect()
    }

    fn echelon(&self) -> Echelon {
        let mut e = Echelon::new(self.ambient);
        for r in &self.basis {
            e.rows.insert(r.leading().expect("nonzero row"), r.entries.clone());
        }
        e
    }

    /// Residual of `v` modulo this subspace (zero on pivot coordinates).
    pub fn reduce(&self, v: &SparseVector) -> Result<SparseVector, LinalgError> {
        if v.dim != self.ambient {
            return Err(LinalgError::DimensionMismatch { expected: self.ambient, got: v.dim });
        }
        let mut cur = v.clone();
        for r in &self.basis {
            let p = r.leading().expect("nonzero row");
            let c = cur.get(p);
            if !c.is_zero() {
                cur = cur.add_scaled(r, &-c);
            }
        }
        Ok(cur)
    }

    pub fn contains(&self, v: &SparseVector) -> Result<bool, LinalgError> {
        Ok(self.reduce(v)?.is_zero())
    }

    pub fn contains_dense(&self, v: &[Rational]) -> Result<bool, LinalgError> {
        self.contains(&SparseVector::from_dense(v))
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> Result<bool, LinalgError> {
        for b in &self.basis {
            if !other.contains(b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace, LinalgError> {
        self.check(other)?;
        let mut e = self.echelon();
        for b in &other.basis {
            e.insert(b.clone());
        }
        Ok(Subspace::from_echelon(e))
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace, LinalgError> {
        self.check(other)?;
        if self.basis.is_empty() || other.basis.is_empty() {
            return Ok(Subspace::zero(self.ambient));
        }
        let residuals: Vec<SparseVector> =
            self.basis.iter().map(|a| other.reduce(a)).collect::<Result<_, _>>()?;
        let m = SparseMatrix::from_columns(self.ambient, &residuals);
        let mut vecs = Vec::new();
        for k in kernel_basis(&m) {
            let mut x = SparseVector::zero(self.ambient);
            for (i, c) in k.entries() {
                x = x.add_scaled(&self.basis[*i], c);
            }
            vecs.push(x);
        }
        Subspace::span(self.ambient, &vecs)
    }

    fn check(&self, other: &Subspace) -> Result<(), LinalgError> {
        if self.ambient != other.ambient {
            return Err(LinalgError::DimensionMismatch { expected: self.ambient, got: other.ambient });
        }
        Ok(())
    }

    /// Indices that are not pivots: coordinates of a complement.
    pub fn complement_indices(&self) -> Vec<usize> {
        let piv: std::collections::BTreeSet<usize> = self.pivots().into_iter().collect();
        (0..self.ambient).filter(|i| !piv.contains(i)).collect()
    }
}

pub fn subspace_contains(s: &Subspace, v: &[Rational]) -> Result<bool, LinalgError> {
    s.contains_dense(v)
}

pub fn subspace_intersect(a: &Subspace, b: &Subspace) -> Result<Subspace, LinalgError> {
    a.intersect(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> SparseMatrix {
        SparseMatrix::from_i64(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    #[test]
    fn parse_and_print() {
        assert_eq!(parse_rational("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse_rational(" -4 ").unwrap(), int(-4));
        assert_eq!(fmt_rational(&rat(-6, 4)), "-3/2");
        assert_eq!(fmt_rational(&int(5)), "5");
        assert_eq!(fmt_rational(&rat(0, 7)), "0");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn rref_examples() {
        let r = rref(&SparseMatrix::identity(2));
        assert_eq!(r.matrix, SparseMatrix::identity(2));
        assert_eq!((r.pivots.clone(), r.rank), (vec![0, 1], 2));

        let r = rref(&SparseMatrix::zeros(3, 3));
        assert_eq!((r.rank, r.pivots.len()), (0, 0));
        assert!(r.matrix.is_zero());

        let r = rref(&m(&[&[1, 2], &[2, 4]]));
        assert_eq!(r.matrix, m(&[&[1, 2], &[0, 0]]));
        assert_eq!(r.rank, 1);
    }

    #[test]
    fn kernel_examples() {
        assert!(kernel_basis(&SparseMatrix::identity(3)).is_empty());
        let k = kernel_basis(&m(&[&[1, -1]]));
        assert_eq!(k, vec![SparseVector::from_dense(&[int(1), int(1)])]);
        assert_eq!(kernel_basis(&SparseMatrix::zeros(2, 3)).len(), 3);
    }

    #[test]
    fn subspace_examples() {
        let s = Subspace::span_dense(2, &[vec![int(1), int(0)]]).unwrap();
        assert!(subspace_contains(&s, &[int(2), int(0)]).unwrap());
        assert!(!subspace_contains(&s, &[int(0), int(1)]).unwrap());
        let p = Subspace::span_dense(2, &[vec![int(1), int(1)], vec![int(1), int(-1)]]).unwrap();
        assert!(subspace_contains(&p, &[int(3), int(5)]).unwrap());
        assert!(subspace_contains(&p, &[int(1)]).is_err());

        assert_eq!(subspace_intersect(&s, &s).unwrap(), s);
        let y = Subspace::span_dense(2, &[vec![int(0), int(1)]]).unwrap();
        assert_eq!(subspace_intersect(&s, &y).unwrap().dim(), 0);
        let d = Subspace::span_dense(2, &[vec![int(1), int(1)]]).unwrap();
        assert_eq!(subspace_intersect(&Subspace::full(2), &d).unwrap(), d);
        assert!(subspace_intersect(&s, &Subspace::full(3)).is_err());
    }

    #[test]
    fn dense_and_sparse_paths_agree() {
        let a = m(&[&[0, 2, 4, 1], &[1, 1, 0, 0], &[1, 3, 4, 1], &[2, 0, -4, -1]]);
        assert_eq!(rref_rows_dense(&a), rref_rows_sparse(&a));
    }
}
