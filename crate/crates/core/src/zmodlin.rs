//! Exact linear algebra over the local ring `Z/l^n`.
//!
//! Vectors are rows and maps act on the right: a matrix `a` sends `x` to
//! `x * a`. Submodules of `(Z/l^n)^k` are kept in Howell normal form, which
//! is unique, so two submodules are equal exactly when their bases are.
//!
//! All elimination runs on sparse rows. Small maps are stored densely in
//! [`ZMat`]; [`LinearMap::from_sparse_rows`] switches to [`SparseMat`] above
//! [`DENSE_ENTRY_LIMIT`] entries.

use crate::error::{Error, Result};

/// Above this many entries a map is stored as coordinate lists.
pub const DENSE_ENTRY_LIMIT: usize = 1_000_000;

pub type SparseRow = Vec<(usize, u64)>;

/// The coefficient ring `Z/l^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RingConfig {
    ell: u64,
    n: u32,
    modulus: u64,
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl RingConfig {
    /// Products of two residues must fit in a `u64`, so `l^n < 2^32`.
    pub fn new(ell: u64, n: u32) -> Result<Self> {
        if !is_prime(ell) {
            return Err(Error::InvalidRing(format!("{ell} is not prime")));
        }
        if n == 0 {
            return Err(Error::InvalidRing("n must be at least 1".into()));
        }
        let mut modulus: u64 = 1;
        for _ in 0..n {
            modulus = modulus
                .checked_mul(ell)
                .filter(|m| *m <= u32::MAX as u64)
                .ok_or_else(|| Error::InvalidRing(format!("{ell}^{n} does not fit in 32 bits")))?;
        }
        Ok(RingConfig { ell, n, modulus })
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        (a * b) % self.modulus
    }

    pub fn reduce(&self, a: u64) -> u64 {
        a % self.modulus
    }

    pub fn reduce_i64(&self, a: i64) -> u64 {
        a.rem_euclid(self.modulus as i64) as u64
    }

    /// `l^k` as an integer, `k <= n`.
    pub fn ell_pow(&self, k: u32) -> u64 {
        debug_assert!(k <= self.n);
        self.ell.pow(k)
    }

    /// Largest `v` with `l^v | a`; `n` for zero.
    pub fn valuation(&self, a: u64) -> u32 {
        if a == 0 {
            return self.n;
        }
        let mut v = 0;
        let mut x = a;
        while x.is_multiple_of(self.ell) {
            x /= self.ell;
            v += 1;
        }
        v
    }

    /// Inverse of a unit (an element prime to `l`).
    pub fn inverse(&self, a: u64) -> Option<u64> {
        let (mut r0, mut r1) = (self.modulus as i64, (a % self.modulus) as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        if r0 != 1 {
            return None;
        }
        Some(self.reduce_i64(t0))
    }

    /// Exponents `e` of cyclic factors `Z/l^e` as orders.
    pub fn orders_of(&self, exps: &[u32]) -> Vec<u64> {
        exps.iter().map(|&e| self.ell_pow(e)).collect()
    }
}

/// Dense matrix over `Z/l^n`, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZMat {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
    ring: RingConfig,
}

impl ZMat {
    pub fn zeros(rows: usize, cols: usize, ring: RingConfig) -> Self {
        ZMat { rows, cols, data: vec![0; rows * cols], ring }
    }

    pub fn identity(k: usize, ring: RingConfig) -> Self {
        let mut m = Self::zeros(k, k, ring);
        for i in 0..k {
            m.set(i, i, 1);
        }
        m
    }

    /// Entries are reduced on the way in.
    pub fn from_rows(rows: &[Vec<u64>], cols: usize, ring: RingConfig) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has length {}, expected {cols}",
                    r.len()
                )));
            }
            data.extend(r.iter().map(|&x| ring.reduce(x)));
        }
        Ok(ZMat { rows: rows.len(), cols, data, ring })
    }

    pub fn ring(&self) -> RingConfig {
        self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: u64) {
        self.data[i * self.cols + j] = self.ring.reduce(x);
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> ZMat {
        let mut t = ZMat::zeros(self.cols, self.rows, self.ring);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn mul(&self, other: &ZMat) -> Result<ZMat> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let r = self.ring;
        let mut out = ZMat::zeros(self.rows, other.cols, r);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] = r.add(out.data[idx], r.mul(a, other.get(k, j)));
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &ZMat) -> ZMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let r = self.ring;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| r.add(a, b)).collect();
        ZMat { data, ..self.clone() }
    }

    pub fn sub(&self, other: &ZMat) -> ZMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let r = self.ring;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| r.sub(a, b)).collect();
        ZMat { data, ..self.clone() }
    }

    /// Row vector times matrix.
    pub fn apply(&self, x: &[u64]) -> Vec<u64> {
        assert_eq!(x.len(), self.rows);
        let r = self.ring;
        let mut out = vec![0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o = r.add(*o, r.mul(xi, self.get(i, j)));
            }
        }
        out
    }

    pub fn sparse_rows(&self) -> Vec<SparseRow> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, &x)| x != 0)
                    .map(|(j, &x)| (j, x))
                    .collect()
            })
            .collect()
    }

    /// Horizontal concatenation.
    pub fn hcat(&self, other: &ZMat) -> ZMat {
        assert_eq!(self.rows, other.rows);
        let mut out = ZMat::zeros(self.rows, self.cols + other.cols, self.ring);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j));
            }
            for j in 0..other.cols {
                out.set(i, self.cols + j, other.get(i, j));
            }
        }
        out
    }

    /// Vertical concatenation.
    pub fn vcat(&self, other: &ZMat) -> ZMat {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        ZMat { rows: self.rows + other.rows, cols: self.cols, data, ring: self.ring }
    }
}

/// Coordinate-list matrix; rows are sorted by column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMat {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<SparseRow>,
    pub ring: RingConfig,
}

impl SparseMat {
    pub fn apply(&self, x: &[u64]) -> Vec<u64> {
        let r = self.ring;
        let mut out = vec![0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            for &(j, a) in &self.entries[i] {
                out[j] = r.add(out[j], r.mul(xi, a));
            }
        }
        out
    }

    pub fn to_dense(&self) -> ZMat {
        let mut m = ZMat::zeros(self.rows, self.cols, self.ring);
        for (i, row) in self.entries.iter().enumerate() {
            for &(j, a) in row {
                m.set(i, j, a);
            }
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinearMap {
    Dense(ZMat),
    Sparse(SparseMat),
}

impl LinearMap {
    /// Builds a map from unsorted, possibly repeated `(col, value)` entries per row.
    pub fn from_sparse_rows(rows: Vec<SparseRow>, cols: usize, ring: RingConfig) -> Self {
        let entries: Vec<SparseRow> = rows.into_iter().map(|r| normalize_row(r, ring)).collect();
        let sparse = SparseMat { rows: entries.len(), cols, entries, ring };
        if sparse.rows.saturating_mul(cols) <= DENSE_ENTRY_LIMIT {
            LinearMap::Dense(sparse.to_dense())
        } else {
            LinearMap::Sparse(sparse)
        }
    }

    pub fn rows(&self) -> usize {
        match self {
            LinearMap::Dense(m) => m.rows(),
            LinearMap::Sparse(m) => m.rows,
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            LinearMap::Dense(m) => m.cols(),
            LinearMap::Sparse(m) => m.cols,
        }
    }

    pub fn ring(&self) -> RingConfig {
        match self {
            LinearMap::Dense(m) => m.ring(),
            LinearMap::Sparse(m) => m.ring,
        }
    }

    pub fn apply(&self, x: &[u64]) -> Vec<u64> {
        match self {
            LinearMap::Dense(m) => m.apply(x),
            LinearMap::Sparse(m) => m.apply(x),
        }
    }

    pub fn sparse_rows(&self) -> Vec<SparseRow> {
        match self {
            LinearMap::Dense(m) => m.sparse_rows(),
            LinearMap::Sparse(m) => m.entries.clone(),
        }
    }
}

/// Sort by column, merge repeats, drop zeros.
pub fn normalize_row(mut row: SparseRow, ring: RingConfig) -> SparseRow {
    row.sort_unstable_by_key(|e| e.0);
    let mut out: SparseRow = Vec::with_capacity(row.len());
    for (j, a) in row {
        let a = ring.reduce(a);
        match out.last_mut() {
            Some(last) if last.0 == j => last.1 = ring.add(last.1, a),
            _ => out.push((j, a)),
        }
    }
    out.retain(|e| e.1 != 0);
    out
}

fn dense_to_sparse(v: &[u64]) -> SparseRow {
    v.iter().enumerate().filter(|(_, &x)| x != 0).map(|(j, &x)| (j, x)).collect()
}

fn sparse_to_dense(v: &SparseRow, width: usize) -> Vec<u64> {
    let mut out = vec![0; width];
    for &(j, a) in v {
        out[j] = a;
    }
    out
}

/// `a - q * b` on sparse rows.
fn axpy(ring: RingConfig, a: &SparseRow, q: u64, b: &SparseRow) -> SparseRow {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j >= b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i >= a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i]);
            i += 1;
        } else if take_b {
            let v = ring.neg(ring.mul(q, b[j].1));
            if v != 0 {
                out.push((b[j].0, v));
            }
            j += 1;
        } else {
            let v = ring.sub(a[i].1, ring.mul(q, b[j].1));
            if v != 0 {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

fn scale_row(ring: RingConfig, a: &SparseRow, q: u64) -> SparseRow {
    a.iter()
        .filter_map(|&(j, x)| {
            let v = ring.mul(x, q);
            (v != 0).then_some((j, v))
        })
        .collect()
}

/// Incremental echelon form with the Howell closure: whenever a row with
/// leading entry `l^v` becomes a pivot, its multiple by `l^(n-v)` is pushed
/// back in, so the span of pivots right of any column is closed.
#[derive(Debug, Clone)]
pub(crate) struct Echelon {
    ring: RingConfig,
    width: usize,
    pivots: Vec<Option<(u32, SparseRow)>>,
}

impl Echelon {
    pub(crate) fn new(ring: RingConfig, width: usize) -> Self {
        Echelon { ring, width, pivots: vec![None; width] }
    }

    pub(crate) fn insert(&mut self, row: SparseRow) {
        let ring = self.ring;
        let mut stack = vec![row];
        while let Some(mut r) = stack.pop() {
            while let Some(&(c, x)) = r.first() {
                let v = ring.valuation(x);
                match &self.pivots[c] {
                    Some((pv, p)) if v >= *pv => {
                        let q = x / ring.ell_pow(*pv);
                        r = axpy(ring, &r, q, p);
                    }
                    existing => {
                        let u = x / ring.ell_pow(v);
                        let inv = ring.inverse(u).expect("unit part is invertible");
                        let r_norm = scale_row(ring, &r, inv);
                        if v > 0 {
                            stack.push(scale_row(ring, &r_norm, ring.ell_pow(ring.n() - v)));
                        }
                        if let Some((pv, p)) = existing {
                            let q = ring.ell_pow(pv - v);
                            stack.push(axpy(ring, p, q, &r_norm));
                        }
                        self.pivots[c] = Some((v, r_norm));
                        break;
                    }
                }
            }
        }
    }

    /// `log_l` of the size of the span.
    pub(crate) fn log_order(&self) -> u32 {
        self.pivots.iter().flatten().map(|(v, _)| self.ring.n() - v).sum()
    }

    /// Fully reduced Howell basis.
    pub(crate) fn into_howell(self) -> HowellBasis {
        let ring = self.ring;
        let mut rows: Vec<(usize, u32, SparseRow)> = self
            .pivots
            .into_iter()
            .enumerate()
            .filter_map(|(c, p)| p.map(|(v, r)| (c, v, r)))
            .collect();
        for i in 0..rows.len() {
            let (c, v, ref pivot_row) = rows[i];
            let pivot_row = pivot_row.clone();
            let modulus = ring.ell_pow(v);
            for row in rows.iter_mut().take(i) {
                let x = row.2.iter().find(|e| e.0 == c).map(|e| e.1).unwrap_or(0);
                let q = x / modulus;
                if q != 0 {
                    row.2 = axpy(ring, &row.2, q, &pivot_row);
                }
            }
        }
        let width = self.width;
        HowellBasis {
            ambient_rank: width,
            pivots: rows.iter().map(|(c, v, _)| (*c, *v)).collect(),
            rows: rows.iter().map(|(_, _, r)| sparse_to_dense(r, width)).collect(),
            ring,
        }
    }
}

/// Canonical basis of a submodule of `(Z/l^n)^k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HowellBasis {
    ambient_rank: usize,
    rows: Vec<Vec<u64>>,
    pivots: Vec<(usize, u32)>,
    ring: RingConfig,
}

impl HowellBasis {
    pub fn zero(ambient_rank: usize, ring: RingConfig) -> Self {
        HowellBasis { ambient_rank, rows: vec![], pivots: vec![], ring }
    }

    pub fn full(ambient_rank: usize, ring: RingConfig) -> Self {
        let id = ZMat::identity(ambient_rank, ring);
        howell_form(&id).expect("identity is well-formed")
    }

    pub fn from_vectors(vectors: &[Vec<u64>], ambient_rank: usize, ring: RingConfig) -> Result<Self> {
        howell_form(&ZMat::from_rows(vectors, ambient_rank, ring)?)
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn ring(&self) -> RingConfig {
        self.ring
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    /// `(column, valuation)` of each pivot.
    pub fn pivots(&self) -> &[(usize, u32)] {
        &self.pivots
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn as_matrix(&self) -> ZMat {
        ZMat::from_rows(&self.rows, self.ambient_rank, self.ring).expect("rows are well-formed")
    }

    /// `log_l` of the number of elements in the span.
    pub fn log_order(&self) -> u32 {
        self.pivots.iter().map(|&(_, v)| self.ring.n() - v).sum()
    }

    /// Residue of `v` after Howell reduction; zero exactly for members.
    pub fn reduce(&self, v: &[u64]) -> Result<Vec<u64>> {
        if v.len() != self.ambient_rank {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} in ambient rank {}",
                v.len(),
                self.ambient_rank
            )));
        }
        let ring = self.ring;
        let mut x: Vec<u64> = v.iter().map(|&a| ring.reduce(a)).collect();
        for (row, &(c, val)) in self.rows.iter().zip(&self.pivots) {
            let q = x[c] / ring.ell_pow(val);
            if q != 0 {
                for (xi, &ri) in x.iter_mut().zip(row).skip(c) {
                    *xi = ring.sub(*xi, ring.mul(q, ri));
                }
            }
        }
        Ok(x)
    }

    pub fn contains(&self, v: &[u64]) -> Result<bool> {
        Ok(self.reduce(v)?.iter().all(|&a| a == 0))
    }

    pub fn contains_all(&self, other: &HowellBasis) -> Result<bool> {
        for r in &other.rows {
            if !self.contains(r)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Sum of two submodules.
    pub fn join(&self, other: &HowellBasis) -> HowellBasis {
        let mut e = Echelon::new(self.ring, self.ambient_rank);
        for r in self.rows.iter().chain(&other.rows) {
            e.insert(dense_to_sparse(r));
        }
        e.into_howell()
    }

    /// Every element of the span, for small spans.
    pub fn enumerate(&self) -> Vec<Vec<u64>> {
        let ring = self.ring;
        let mut out = vec![vec![0u64; self.ambient_rank]];
        for (row, &(_, v)) in self.rows.iter().zip(&self.pivots) {
            let count = ring.ell_pow(ring.n() - v);
            let mut next = Vec::with_capacity(out.len() * count as usize);
            for base in &out {
                for c in 0..count {
                    next.push(base.iter().zip(row).map(|(&b, &r)| ring.add(b, ring.mul(c, r))).collect());
                }
            }
            out = next;
        }
        out
    }
}

/// Canonical basis of the row span of `generators`.
pub fn howell_form(generators: &ZMat) -> Result<HowellBasis> {
    let mut e = Echelon::new(generators.ring(), generators.cols());
    for r in generators.sparse_rows() {
        e.insert(r);
    }
    Ok(e.into_howell())
}

/// `log_l` of the size of the span of many sparse rows, without forming a basis.
pub fn span_log_order<I: IntoIterator<Item = SparseRow>>(rows: I, width: usize, ring: RingConfig) -> u32 {
    let mut e = Echelon::new(ring, width);
    for r in rows {
        e.insert(normalize_row(r, ring));
    }
    e.log_order()
}

/// Factorization of a map for repeated left solves `x * a = b`.
///
/// Built from the Howell form of `[a | I]`: rows with a pivot in the `a`
/// block give the image, the rest give the kernel.
#[derive(Debug, Clone)]
pub struct LeftSolver {
    ring: RingConfig,
    unknowns: usize,
    cols: usize,
    image_rows: Vec<(usize, u32, SparseRow)>,
    kernel: HowellBasis,
}

impl LeftSolver {
    pub fn new(a: &LinearMap) -> Self {
        Self::from_rows(a.sparse_rows(), a.cols(), a.ring())
    }

    pub fn from_rows(rows: Vec<SparseRow>, cols: usize, ring: RingConfig) -> Self {
        let unknowns = rows.len();
        let mut e = Echelon::new(ring, cols + unknowns);
        for (i, mut r) in rows.into_iter().enumerate() {
            r.push((cols + i, 1));
            e.insert(normalize_row(r, ring));
        }
        let mut image_rows = vec![];
        let mut kernel_rows = vec![];
        for (c, p) in e.pivots.into_iter().enumerate() {
            if let Some((v, row)) = p {
                if c < cols {
                    image_rows.push((c, v, row));
                } else {
                    kernel_rows.push(row.into_iter().map(|(j, a)| (j - cols, a)).collect::<SparseRow>());
                }
            }
        }
        let mut ke = Echelon::new(ring, unknowns);
        for r in kernel_rows {
            ke.insert(r);
        }
        LeftSolver { ring, unknowns, cols, image_rows, kernel: ke.into_howell() }
    }

    pub fn unknowns(&self) -> usize {
        self.unknowns
    }

    /// `{x : x * a = 0}`.
    pub fn kernel(&self) -> &HowellBasis {
        &self.kernel
    }

    /// The image `{x * a}` in Howell form.
    pub fn image(&self) -> HowellBasis {
        let mut e = Echelon::new(self.ring, self.cols);
        for (_, _, r) in &self.image_rows {
            e.insert(r.iter().copied().filter(|&(j, _)| j < self.cols).collect());
        }
        e.into_howell()
    }

    /// Lexicographically least `x` with `x * a = b`.
    pub fn solve(&self, b: &[u64]) -> Result<Option<Vec<u64>>> {
        if b.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side of length {}, expected {}",
                b.len(),
                self.cols
            )));
        }
        let ring = self.ring;
        let mut v = dense_to_sparse(&b.iter().map(|&x| ring.reduce(x)).collect::<Vec<_>>());
        for (c, val, row) in &self.image_rows {
            let x = match v.iter().find(|e| e.0 == *c) {
                Some(e) => e.1,
                None => continue,
            };
            if v.first().map(|e| e.0) != Some(*c) {
                // a nonzero entry left of this pivot survived
                return Ok(None);
            }
            if ring.valuation(x) < *val {
                return Ok(None);
            }
            v = axpy(ring, &v, x / ring.ell_pow(*val), row);
        }
        if v.first().is_some_and(|e| e.0 < self.cols) {
            return Ok(None);
        }
        let mut x = vec![0u64; self.unknowns];
        for (j, a) in v {
            x[j - self.cols] = ring.neg(a);
        }
        Ok(Some(self.kernel.reduce(&x)?))
    }
}

/// Lexicographically least `x` with `x * a = b`, if any.
pub fn solve(a: &ZMat, b: &[u64]) -> Result<Option<Vec<u64>>> {
    LeftSolver::new(&LinearMap::Dense(a.clone())).solve(b)
}

/// `{x : x * a = 0}`.
pub fn kernel(a: &ZMat) -> Result<HowellBasis> {
    Ok(LeftSolver::new(&LinearMap::Dense(a.clone())).kernel().clone())
}

pub fn contains(sub: &HowellBasis, v: &[u64]) -> Result<bool> {
    sub.contains(v)
}

/// `{x : x * a ∈ target}`.
pub fn preimage(a: &ZMat, target: &HowellBasis) -> Result<HowellBasis> {
    if a.cols() != target.ambient_rank() {
        return Err(Error::DimensionMismatch("preimage target rank".into()));
    }
    let stacked = a.vcat(&target.as_matrix());
    let k = kernel(&stacked)?;
    let proj: Vec<Vec<u64>> = k.rows().iter().map(|r| r[..a.rows()].to_vec()).collect();
    HowellBasis::from_vectors(&proj, a.rows(), a.ring())
}

/// Lexicographically least `x` with `x * a ≡ b` modulo `target`.
pub fn solve_modulo(a: &ZMat, target: &HowellBasis, b: &[u64]) -> Result<Option<Vec<u64>>> {
    let stacked = a.vcat(&target.as_matrix());
    Ok(solve(&stacked, b)?.map(|y| y[..a.rows()].to_vec()))
}

/// `ambient / sub` written as a product of cyclic groups `Z/l^e`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientPresentation {
    /// Exponents `e_i`, each in `1..=n`.
    pub exponents: Vec<u32>,
    /// `ambient_rank x q`: coordinates of the class of `x` are `x * projection`.
    pub projection: ZMat,
    /// `q x ambient_rank`: a representative of `y` is `y * section`.
    pub section: ZMat,
}

impl QuotientPresentation {
    pub fn orders(&self) -> Vec<u64> {
        self.projection.ring().orders_of(&self.exponents)
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// Reduced coordinates of the class of `x`.
    pub fn project(&self, x: &[u64]) -> Vec<u64> {
        let ring = self.projection.ring();
        self.projection
            .apply(x)
            .into_iter()
            .zip(&self.exponents)
            .map(|(a, &e)| a % ring.ell_pow(e))
            .collect()
    }

    pub fn lift(&self, y: &[u64]) -> Vec<u64> {
        self.section.apply(y)
    }
}

/// Smith reduction of the submodule's basis with tracked column operations.
pub fn quotient_presentation(sub: &HowellBasis, ambient_rank: usize) -> Result<QuotientPresentation> {
    if sub.ambient_rank() != ambient_rank {
        return Err(Error::DimensionMismatch(format!(
            "submodule of rank {} in ambient {}",
            sub.ambient_rank(),
            ambient_rank
        )));
    }
    let ring = sub.ring();
    let k = ambient_rank;
    let mut m: Vec<Vec<u64>> = sub.rows().to_vec();
    let mut v = ZMat::identity(k, ring);
    let mut w = ZMat::identity(k, ring);
    let mut vals = vec![];
    let mut t = 0;
    while t < m.len().min(k) {
        let mut best: Option<(u32, usize, usize)> = None;
        for (i, row) in m.iter().enumerate().skip(t) {
            for (j, &x) in row.iter().enumerate().skip(t) {
                if x != 0 {
                    let val = ring.valuation(x);
                    if best.is_none_or(|b| val < b.0) {
                        best = Some((val, i, j));
                    }
                }
            }
        }
        let Some((val, bi, bj)) = best else { break };
        m.swap(t, bi);
        if bj != t {
            for row in m.iter_mut() {
                row.swap(t, bj);
            }
            for i in 0..k {
                let (a, b) = (v.get(i, t), v.get(i, bj));
                v.set(i, t, b);
                v.set(i, bj, a);
                let (a, b) = (w.get(t, i), w.get(bj, i));
                w.set(t, i, b);
                w.set(bj, i, a);
            }
        }
        let p = ring.ell_pow(val);
        let u = m[t][t] / p;
        let uinv = ring.inverse(u).expect("unit");
        for row in m.iter_mut() {
            row[t] = ring.mul(row[t], uinv);
        }
        for i in 0..k {
            v.set(i, t, ring.mul(v.get(i, t), uinv));
            w.set(t, i, ring.mul(w.get(t, i), u));
        }
        let pivot_row = m[t].clone();
        for row in m.iter_mut().skip(t + 1) {
            let q = row[t] / p;
            if q != 0 {
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x = ring.sub(*x, ring.mul(q, y));
                }
            }
        }
        for j in t + 1..k {
            let q = m[t][j] / p;
            if q == 0 {
                continue;
            }
            for row in m.iter_mut() {
                row[j] = ring.sub(row[j], ring.mul(q, row[t]));
            }
            for i in 0..k {
                v.set(i, j, ring.sub(v.get(i, j), ring.mul(q, v.get(i, t))));
                w.set(t, i, ring.add(w.get(t, i), ring.mul(q, w.get(j, i))));
            }
        }
        vals.push(val);
        t += 1;
    }
    let mut keep = vec![];
    let mut exponents = vec![];
    for (i, &val) in vals.iter().enumerate() {
        if val > 0 {
            keep.push(i);
            exponents.push(val);
        }
    }
    for i in vals.len()..k {
        keep.push(i);
        exponents.push(ring.n());
    }
    let mut projection = ZMat::zeros(k, keep.len(), ring);
    let mut section = ZMat::zeros(keep.len(), k, ring);
    for (q, &c) in keep.iter().enumerate() {
        for i in 0..k {
            projection.set(i, q, v.get(i, c));
            section.set(q, i, w.get(c, i));
        }
    }
    Ok(QuotientPresentation { exponents, projection, section })
}

/// Structure of `sub / rel` for submodules `rel ⊆ sub` of the same ambient.
#[derive(Debug, Clone)]
pub struct Subquotient {
    pub exponents: Vec<u32>,
    /// Ambient representatives of the cyclic generators.
    pub generators: Vec<Vec<u64>>,
    sub_basis: ZMat,
    rel: HowellBasis,
    presentation: QuotientPresentation,
}

impl Subquotient {
    pub fn new(sub: &HowellBasis, rel: &HowellBasis) -> Result<Self> {
        let basis = sub.as_matrix();
        let relations = preimage(&basis, rel)?;
        let presentation = quotient_presentation(&relations, basis.rows())?;
        let generators = presentation.section.row_vecs().iter().map(|c| basis.apply(c)).collect();
        Ok(Subquotient {
            exponents: presentation.exponents.clone(),
            generators,
            sub_basis: basis,
            rel: rel.clone(),
            presentation,
        })
    }

    pub fn log_order(&self) -> u32 {
        self.exponents.iter().sum()
    }

    pub fn rank(&self) -> usize {
        self.exponents.len()
    }

    /// Coordinates of an element of `sub` in the cyclic generators.
    pub fn coordinates(&self, x: &[u64]) -> Result<Option<Vec<u64>>> {
        Ok(solve_modulo(&self.sub_basis, &self.rel, x)?.map(|c| self.presentation.project(&c)))
    }

    /// All elements (as ambient representatives) for small subquotients.
    pub fn enumerate(&self) -> Vec<Vec<u64>> {
        let ring = self.sub_basis.ring();
        let width = self.sub_basis.cols();
        let mut out = vec![vec![0u64; width]];
        for (g, &e) in self.generators.iter().zip(&self.exponents) {
            let mut next = vec![];
            for base in &out {
                for c in 0..ring.ell_pow(e) {
                    next.push(base.iter().zip(g).map(|(&b, &x)| ring.add(b, ring.mul(c, x))).collect());
                }
            }
            out = next;
        }
        out
    }
}
