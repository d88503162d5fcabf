//! Normalized bar cochains `C^k(Γ, M)` for finite groups.
//!
//! A cochain stores one module vector per tuple of non-identity elements,
//! indexed lexicographically in base `|Γ|-1`. The coefficient module may be
//! over a different group `G`; `Γ` acts through a homomorphism `via: Γ -> G`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fingroup::{ExtensionData, FinGroup};
use crate::gmodule::GModule;
use crate::zmodlin::{span_log_order, Echelon, HowellBasis, LeftSolver, RingConfig, SparseRow, Subquotient, ZMat};

/// Default cap on the number of cochain coordinates a computation may touch.
pub const DEFAULT_MAX_COCHAIN_DIM: usize = 2_000_000;

/// Default bound on `|𝒢|` for the `H^2` inflation test.
pub const DEFAULT_MAX_ORDER: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coefficients {
    pub group: Arc<FinGroup>,
    pub module: GModule,
    pub via: Vec<usize>,
}

impl Coefficients {
    pub fn new(group: Arc<FinGroup>, module: GModule, via: Vec<usize>) -> Result<Arc<Coefficients>> {
        let target = module.group();
        if via.len() != group.order() || via.iter().any(|&x| x >= target.order()) {
            return Err(Error::DimensionMismatch("homomorphism table has the wrong shape".into()));
        }
        for a in group.elements() {
            for b in group.elements() {
                if via[group.mul(a, b)] != target.mul(via[a], via[b]) {
                    return Err(Error::InvalidModule(format!("map is not a homomorphism at ({a}, {b})")));
                }
            }
        }
        Ok(Arc::new(Coefficients { group, module, via }))
    }

    /// `Γ = G` acting directly.
    pub fn direct(module: GModule) -> Arc<Coefficients> {
        let group = module.group().clone();
        let via = group.elements().collect();
        Arc::new(Coefficients { group, module, via })
    }

    /// Trivial coefficients `Z/l^n` on `Γ`.
    pub fn trivial(group: Arc<FinGroup>, ring: RingConfig) -> Arc<Coefficients> {
        let one = Arc::new(FinGroup::trivial(group.ell()));
        let module = GModule::trivial(ring, vec![ring.n()], one).expect("trivial module is valid");
        let via = vec![0; group.order()];
        Arc::new(Coefficients { group, module, via })
    }

    /// Same `Γ` and homomorphism, different module over the same target group.
    pub fn with_module(&self, module: GModule) -> Arc<Coefficients> {
        Arc::new(Coefficients { group: self.group.clone(), module, via: self.via.clone() })
    }

    pub fn ring(&self) -> RingConfig {
        self.module.ring()
    }

    fn base(&self) -> usize {
        self.group.order() - 1
    }

    /// Number of tuples in degree `k`.
    pub fn tuples(&self, k: usize) -> usize {
        self.base().pow(k as u32)
    }

    pub fn dim(&self, k: usize) -> usize {
        self.tuples(k) * self.module.rank()
    }

    pub fn tuple_index(&self, t: &[usize]) -> Option<usize> {
        let b = self.base();
        let mut idx = 0;
        for &g in t {
            if g == 0 {
                return None;
            }
            idx = idx * b + (g - 1);
        }
        Some(idx)
    }

    pub fn tuple_of(&self, mut idx: usize, k: usize) -> Vec<usize> {
        let b = self.base();
        let mut t = vec![0; k];
        for slot in t.iter_mut().rev() {
            *slot = idx % b + 1;
            idx /= b;
        }
        t
    }

    fn act(&self, g: usize, x: &[u64]) -> Vec<u64> {
        self.module.act(self.via[g], x)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cochain {
    pub degree: usize,
    pub coeffs: Arc<Coefficients>,
    values: Vec<u64>,
}

impl Cochain {
    pub fn zero(coeffs: Arc<Coefficients>, degree: usize) -> Cochain {
        let len = coeffs.dim(degree);
        Cochain { degree, coeffs, values: vec![0; len] }
    }

    pub fn from_values(coeffs: Arc<Coefficients>, degree: usize, values: Vec<u64>) -> Result<Cochain> {
        if values.len() != coeffs.dim(degree) {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a degree-{degree} cochain of dimension {}",
                values.len(),
                coeffs.dim(degree)
            )));
        }
        let mut c = Cochain { degree, coeffs, values };
        c.normalize_values();
        Ok(c)
    }

    /// Evaluates `f` on every non-identity tuple.
    pub fn from_fn(coeffs: Arc<Coefficients>, degree: usize, mut f: impl FnMut(&[usize]) -> Vec<u64>) -> Cochain {
        let r = coeffs.module.rank();
        let mut values = vec![0; coeffs.dim(degree)];
        for idx in 0..coeffs.tuples(degree) {
            let t = coeffs.tuple_of(idx, degree);
            let v = coeffs.module.reduce(&f(&t));
            values[idx * r..(idx + 1) * r].copy_from_slice(&v);
        }
        Cochain { degree, coeffs, values }
    }

    fn normalize_values(&mut self) {
        let r = self.coeffs.module.rank();
        if r == 0 {
            return;
        }
        for chunk in self.values.chunks_mut(r) {
            let v = self.coeffs.module.reduce(chunk);
            chunk.copy_from_slice(&v);
        }
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn rank(&self) -> usize {
        self.coeffs.module.rank()
    }

    /// Zero when any argument is the identity.
    pub fn value(&self, t: &[usize]) -> Vec<u64> {
        debug_assert_eq!(t.len(), self.degree);
        let r = self.rank();
        match self.coeffs.tuple_index(t) {
            Some(i) => self.values[i * r..(i + 1) * r].to_vec(),
            None => vec![0; r],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&x| x == 0)
    }

    fn check_same(&self, other: &Cochain) -> Result<()> {
        if self.degree != other.degree || self.values.len() != other.values.len() {
            return Err(Error::DimensionMismatch("cochains of different shape".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Cochain) -> Result<Cochain> {
        self.check_same(other)?;
        let ring = self.coeffs.ring();
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| ring.add(a, b)).collect();
        Cochain::from_values(self.coeffs.clone(), self.degree, values)
    }

    pub fn sub(&self, other: &Cochain) -> Result<Cochain> {
        self.check_same(other)?;
        let ring = self.coeffs.ring();
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| ring.sub(a, b)).collect();
        Cochain::from_values(self.coeffs.clone(), self.degree, values)
    }

    pub fn scale(&self, c: u64) -> Cochain {
        let ring = self.coeffs.ring();
        let values = self.values.iter().map(|&a| ring.mul(a, c)).collect();
        Cochain::from_values(self.coeffs.clone(), self.degree, values).expect("same shape")
    }

    pub fn neg(&self) -> Cochain {
        self.scale(self.coeffs.ring().modulus() - 1)
    }

    /// Pushes values forward along a module map (rows: images of basis vectors).
    pub fn map_values(&self, target: Arc<Coefficients>, map: &ZMat) -> Result<Cochain> {
        if map.rows() != self.rank() || map.cols() != target.module.rank() {
            return Err(Error::DimensionMismatch("value map has the wrong shape".into()));
        }
        Ok(Cochain::from_fn(target, self.degree, |t| map.apply(&self.value(t))))
    }

    /// `{"degree": k, "entries": [[tuple, value], …]}` over nonzero entries.
    pub fn to_json(&self) -> Value {
        let r = self.rank();
        let entries: Vec<Value> = (0..self.coeffs.tuples(self.degree))
            .filter_map(|idx| {
                let v = &self.values[idx * r..(idx + 1) * r];
                v.iter().any(|&x| x != 0).then(|| json!([self.coeffs.tuple_of(idx, self.degree), v]))
            })
            .collect();
        json!({ "degree": self.degree, "entries": entries })
    }
}

/// `(df)(g_1..g_{k+1}) = g_1 f(g_2..) + Σ (-1)^i f(..g_i g_{i+1}..) + (-1)^{k+1} f(g_1..g_k)`.
pub fn differential(f: &Cochain) -> Cochain {
    let k = f.degree;
    let coeffs = f.coeffs.clone();
    let g = &coeffs.group;
    let ring = coeffs.ring();
    let r = f.rank();
    let acts_trivially: Vec<bool> = g
        .elements()
        .map(|x| (0..r).all(|j| {
            let mut e = vec![0; r];
            e[j] = 1;
            coeffs.module.reduce(&coeffs.act(x, &e)) == coeffs.module.reduce(&e)
        }))
        .collect();
    let add_term = |acc: &mut [u64], t: &[usize], negate: bool| {
        if let Some(i) = coeffs.tuple_index(t) {
            for (a, &v) in acc.iter_mut().zip(&f.values[i * r..(i + 1) * r]) {
                *a = if negate { ring.sub(*a, v) } else { ring.add(*a, v) };
            }
        }
    };
    let mut values = vec![0; coeffs.dim(k + 1)];
    let mut t = vec![1; k + 1];
    let mut inner = vec![0; k];
    for idx in 0..coeffs.tuples(k + 1) {
        let acc = &mut values[idx * r..(idx + 1) * r];
        if acts_trivially[t[0]] {
            add_term(acc, &t[1..], false);
        } else if let Some(i) = coeffs.tuple_index(&t[1..]) {
            acc.copy_from_slice(&coeffs.act(t[0], &f.values[i * r..(i + 1) * r]));
        }
        for i in 1..=k {
            inner[..i - 1].copy_from_slice(&t[..i - 1]);
            inner[i - 1] = g.mul(t[i - 1], t[i]);
            inner[i..].copy_from_slice(&t[i + 1..]);
            add_term(acc, &inner, i % 2 == 1);
        }
        add_term(acc, &t[..k], (k + 1) % 2 == 1);
        // odometer over non-identity tuples, last slot fastest, matching `tuple_of`
        for slot in t.iter_mut().rev() {
            *slot += 1;
            if *slot < g.order() {
                break;
            }
            *slot = 1;
        }
    }
    let mut c = Cochain { degree: k + 1, coeffs, values };
    c.normalize_values();
    c
}

pub fn is_cocycle(f: &Cochain) -> bool {
    differential(f).is_zero()
}

/// Rows of `d: C^k -> C^(k+1)` as sparse vectors (row `x` maps to `x * D`).
pub fn differential_rows(coeffs: &Coefficients, k: usize) -> Result<Vec<SparseRow>> {
    let r = coeffs.module.rank();
    if coeffs.dim(k + 1) > DEFAULT_MAX_COCHAIN_DIM {
        return Err(Error::SizeBound(format!("C^{} has dimension {}", k + 1, coeffs.dim(k + 1))));
    }
    let ring = coeffs.ring();
    let g = &coeffs.group;
    let mut rows: Vec<SparseRow> = vec![vec![]; coeffs.dim(k)];
    let mut inner = Vec::with_capacity(k);
    for s in 0..coeffs.tuples(k + 1) {
        let t = coeffs.tuple_of(s, k + 1);
        if let Some(ti) = coeffs.tuple_index(&t[1..]) {
            let a = coeffs.module.action(coeffs.via[t[0]]);
            for c in 0..r {
                for j in 0..r {
                    let x = a.get(c, j);
                    if x != 0 {
                        rows[ti * r + c].push((s * r + j, x));
                    }
                }
            }
        }
        let push_id = |tuple: &[usize], positive: bool, rows: &mut Vec<SparseRow>| {
            if let Some(ti) = coeffs.tuple_index(tuple) {
                for c in 0..r {
                    rows[ti * r + c].push((s * r + c, if positive { 1 } else { ring.neg(1) }));
                }
            }
        };
        for i in 1..=k {
            inner.clear();
            inner.extend_from_slice(&t[..i - 1]);
            inner.push(g.mul(t[i - 1], t[i]));
            inner.extend_from_slice(&t[i + 1..]);
            push_id(&inner, i % 2 == 0, &mut rows);
        }
        push_id(&t[..k], (k + 1).is_multiple_of(2), &mut rows);
    }
    for row in rows.iter_mut() {
        row.sort_unstable_by_key(|e| e.0);
        let mut merged: SparseRow = Vec::with_capacity(row.len());
        for &(j, x) in row.iter() {
            match merged.last_mut() {
                Some(last) if last.0 == j => last.1 = ring.add(last.1, x),
                _ => merged.push((j, x)),
            }
        }
        merged.retain(|e| e.1 != 0);
        *row = merged;
    }
    Ok(rows)
}

/// `Rel` in every tuple slot of `C^k`.
fn relation_rows(coeffs: &Coefficients, k: usize) -> Vec<SparseRow> {
    let r = coeffs.module.rank();
    let rel = coeffs.module.relations();
    let mut rows = vec![];
    for t in 0..coeffs.tuples(k) {
        for row in rel.rows() {
            rows.push(row.iter().enumerate().filter(|e| *e.1 != 0).map(|(j, &x)| (t * r + j, x)).collect());
        }
    }
    rows
}

/// Repeated coboundary tests in a fixed degree `k`.
#[derive(Debug, Clone)]
pub struct CoboundarySolver {
    coeffs: Arc<Coefficients>,
    degree: usize,
    unknowns: usize,
    solver: LeftSolver,
}

impl CoboundarySolver {
    pub fn new(coeffs: Arc<Coefficients>, degree: usize) -> Result<CoboundarySolver> {
        if degree == 0 {
            return Err(Error::DimensionMismatch("coboundaries start in degree 1".into()));
        }
        let mut rows = differential_rows(&coeffs, degree - 1)?;
        let unknowns = rows.len();
        rows.extend(relation_rows(&coeffs, degree));
        let solver = LeftSolver::from_rows(rows, coeffs.dim(degree), coeffs.ring());
        Ok(CoboundarySolver { coeffs, degree, unknowns, solver })
    }

    /// Canonical `w` with `dw = f`, if one exists.
    pub fn witness(&self, f: &Cochain) -> Result<Option<Cochain>> {
        if f.degree != self.degree || f.values.len() != self.coeffs.dim(self.degree) {
            return Err(Error::DimensionMismatch("cochain does not match the solver".into()));
        }
        if !is_cocycle(f) {
            return Err(Error::NotACocycle);
        }
        match self.solver.solve(&f.values)? {
            None => Ok(None),
            Some(x) => Ok(Some(Cochain::from_values(self.coeffs.clone(), self.degree - 1, x[..self.unknowns].to_vec())?)),
        }
    }

    pub fn is_coboundary(&self, f: &Cochain) -> Result<bool> {
        Ok(self.witness(f)?.is_some())
    }
}

pub fn coboundary_witness(f: &Cochain) -> Result<Option<Cochain>> {
    CoboundarySolver::new(f.coeffs.clone(), f.degree)?.witness(f)
}

/// Cyclic orders of `H^k(Γ, M)`.
pub fn cohomology_orders(coeffs: &Arc<Coefficients>, k: usize) -> Result<Vec<u64>> {
    let ring = coeffs.ring();
    let z = cocycles(coeffs, k)?;
    let mut b = Echelon::new(ring, coeffs.dim(k));
    for row in relation_rows(coeffs, k) {
        b.insert(row);
    }
    if k > 0 {
        for row in differential_rows(coeffs, k - 1)? {
            b.insert(row);
        }
    }
    let sq = Subquotient::new(&z, &b.into_howell())?;
    Ok(ring.orders_of(&sq.exponents))
}

/// A bilinear map `M × N -> P` given by `table[i][j] = e_i · e_j`.
#[derive(Debug, Clone)]
pub struct Pairing {
    pub left: GModule,
    pub right: GModule,
    pub target: GModule,
    table: Vec<Vec<Vec<u64>>>,
}

impl Pairing {
    pub fn new(left: GModule, right: GModule, target: GModule, table: Vec<Vec<Vec<u64>>>) -> Result<Pairing> {
        let ring = target.ring();
        if table.len() != left.rank() || table.iter().any(|row| row.len() != right.rank()) {
            return Err(Error::PairingMismatch("table shape".into()));
        }
        for (i, row) in table.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let e = left.exponents()[i].min(right.exponents()[j]);
                if v.len() != target.rank() || !target.is_zero(&target.scale(ring.ell_pow(e), v)) {
                    return Err(Error::PairingMismatch(format!("entry ({i}, {j}) is not well defined")));
                }
            }
        }
        let table = table.into_iter().map(|row| row.into_iter().map(|v| target.reduce(&v)).collect()).collect();
        Ok(Pairing { left, right, target, table })
    }

    /// `R × M -> M`.
    pub fn scalar_left(m: &GModule) -> Result<Pairing> {
        let ring = m.ring();
        let r = GModule::trivial(ring, vec![ring.n()], m.group().clone())?;
        let row = (0..m.rank()).map(|j| unit(m.rank(), j)).collect();
        Pairing::new(r, m.clone(), m.clone(), vec![row])
    }

    /// `M × R -> M`.
    pub fn scalar_right(m: &GModule) -> Result<Pairing> {
        let ring = m.ring();
        let r = GModule::trivial(ring, vec![ring.n()], m.group().clone())?;
        let table = (0..m.rank()).map(|i| vec![unit(m.rank(), i)]).collect();
        Pairing::new(m.clone(), r, m.clone(), table)
    }

    pub fn apply(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        let ring = self.target.ring();
        let mut out = vec![0; self.target.rank()];
        for (i, &a) in x.iter().enumerate().filter(|e| *e.1 != 0) {
            for (j, &b) in y.iter().enumerate().filter(|e| *e.1 != 0) {
                let c = ring.mul(a, b);
                for (o, &t) in out.iter_mut().zip(&self.table[i][j]) {
                    *o = ring.add(*o, ring.mul(c, t));
                }
            }
        }
        self.target.reduce(&out)
    }

    /// `g(x·y) = gx · gy` for all generators and basis vectors.
    pub fn is_equivariant(&self) -> bool {
        let g = self.target.group();
        g.generators().iter().all(|&s| {
            (0..self.left.rank()).all(|i| {
                (0..self.right.rank()).all(|j| {
                    let lhs = self.target.act(s, &self.table[i][j]);
                    let rhs = self.apply(&self.left.act(s, &unit(self.left.rank(), i)), &self.right.act(s, &unit(self.right.rank(), j)));
                    lhs == rhs
                })
            })
        })
    }
}

fn unit(len: usize, k: usize) -> Vec<u64> {
    let mut v = vec![0; len];
    v[k] = 1;
    v
}

/// `(f ∪ h)(g_1..g_{p+q}) = f(g_1..g_p) · (g_1⋯g_p) h(g_{p+1}..g_{p+q})`.
pub fn cup(f: &Cochain, h: &Cochain, pairing: &Pairing) -> Result<Cochain> {
    if f.coeffs.module.exponents() != pairing.left.exponents() || h.coeffs.module.exponents() != pairing.right.exponents() {
        return Err(Error::PairingMismatch("coefficient modules do not match the pairing".into()));
    }
    if f.coeffs.group != h.coeffs.group || f.coeffs.via != h.coeffs.via {
        return Err(Error::PairingMismatch("cochains live on different groups".into()));
    }
    let (p, q) = (f.degree, h.degree);
    let g = f.coeffs.group.clone();
    let target = f.coeffs.with_module(pairing.target.clone());
    let hc = h.coeffs.clone();
    Ok(Cochain::from_fn(target, p + q, |t| {
        let prefix = t[..p].iter().fold(0, |acc, &x| g.mul(acc, x));
        pairing.apply(&f.value(&t[..p]), &hc.act(prefix, &h.value(&t[p..])))
    }))
}

/// `0 -> A -> B -> C -> 0` with an `R`-linear section `C -> B`.
#[derive(Debug, Clone)]
pub struct ShortExactSequence {
    pub sub: GModule,
    pub mid: GModule,
    pub quot: GModule,
    pub inclusion: ZMat,
    pub projection: ZMat,
    pub section: ZMat,
}

impl ShortExactSequence {
    pub fn check_section(&self) -> Result<()> {
        for k in 0..self.quot.rank() {
            let u = unit(self.quot.rank(), k);
            let back = self.quot.reduce(&self.projection.apply(&self.mid.reduce(&self.section.apply(&u))));
            if back != u {
                return Err(Error::SectionNotLinear);
            }
        }
        Ok(())
    }
}

/// `δ f = d(s ∘ f)` pulled back into the submodule.
pub fn connecting(ses: &ShortExactSequence, f: &Cochain) -> Result<Cochain> {
    ses.check_section()?;
    if f.coeffs.module.exponents() != ses.quot.exponents() {
        return Err(Error::DimensionMismatch("cochain coefficients are not the quotient".into()));
    }
    if !is_cocycle(f) {
        return Err(Error::NotACocycle);
    }
    let mid = f.coeffs.with_module(ses.mid.clone());
    let lifted = f.map_values(mid, &ses.section)?;
    let dl = differential(&lifted);
    let mut rows = ses.inclusion.sparse_rows();
    let a = rows.len();
    rows.extend(ses.mid.relations().as_matrix().sparse_rows());
    let solver = LeftSolver::from_rows(rows, ses.mid.rank(), ses.mid.ring());
    let sub = f.coeffs.with_module(ses.sub.clone());
    let mut failure = None;
    let out = Cochain::from_fn(sub, f.degree + 1, |t| match solver.solve(&dl.value(t)) {
        Ok(Some(x)) => x[..a].to_vec(),
        _ => {
            failure = Some(Error::NotACocycle);
            vec![0; a]
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Precomposition with `π: Γ -> Q` in every slot.
pub fn inflation(gamma: Arc<FinGroup>, pi: &[usize], f: &Cochain) -> Result<Cochain> {
    let via: Vec<usize> = pi.iter().map(|&x| f.coeffs.via[x]).collect();
    let coeffs = Coefficients::new(gamma, f.coeffs.module.clone(), via)?;
    let mapped = |t: &[usize]| t.iter().map(|&x| pi[x]).collect::<Vec<_>>();
    Ok(Cochain::from_fn(coeffs, f.degree, |t| f.value(&mapped(t))))
}

/// Restriction along an embedding `sub -> Γ`.
pub fn restriction(sub: Arc<FinGroup>, embedding: &[usize], f: &Cochain) -> Result<Cochain> {
    inflation(sub, embedding, f)
}

/// The factor set `α(g,h) = s(g)s(h)s(gh)^-1` in `H^ab` coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionCocycle {
    order: usize,
    values: Vec<Vec<u64>>,
}

impl ExtensionCocycle {
    pub fn value(&self, g: usize, h: usize) -> &[u64] {
        &self.values[g * self.order + h]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.iter().all(|&x| x == 0))
    }

    /// `g α(h,k) + α(g,hk) = α(g,h) + α(gh,k)` under conjugation.
    pub fn is_cocycle(&self, ext: &ExtensionData) -> bool {
        let q = &ext.quotient;
        let add = |a: &[u64], b: &[u64]| {
            let mut c: Vec<u64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
            ext.hab.reduce(&mut c);
            c
        };
        q.elements().all(|g| {
            q.elements().all(|h| {
                q.elements().all(|k| {
                    let lhs = add(&ext.conjugate_hab(g, self.value(h, k)), self.value(g, q.mul(h, k)));
                    let rhs = add(self.value(g, h), self.value(q.mul(g, h), k));
                    lhs == rhs
                })
            })
        })
    }
}

pub fn extension_cocycle(ext: &ExtensionData) -> ExtensionCocycle {
    let q = &ext.quotient;
    let t = &ext.total;
    let mut values = Vec::with_capacity(q.order() * q.order());
    for g in q.elements() {
        for h in q.elements() {
            let x = t.mul(t.mul(ext.section[g], ext.section[h]), t.inv(ext.section[q.mul(g, h)]));
            values.push(ext.hab_coords(x).to_vec());
        }
    }
    ExtensionCocycle { order: q.order(), values }
}

/// A homomorphism `H^ab -> M`, rows the images of the cyclic generators.
pub fn check_hab_map(ext: &ExtensionData, x: &ZMat, m: &GModule) -> Result<()> {
    let r = ext.hab.rank();
    if x.rows() != r || x.cols() != m.rank() {
        return Err(Error::DimensionMismatch("map from H^ab has the wrong shape".into()));
    }
    let apply = |c: &[u64]| m.reduce(&x.apply(c));
    for j in 0..r {
        if !m.is_zero(&m.scale(ext.hab.ring.ell_pow(ext.hab.exponents[j]), x.row(j))) {
            return Err(Error::InvalidModule(format!("image of generator {j} has the wrong order")));
        }
    }
    for &s in ext.quotient.generators() {
        for j in 0..r {
            let moved = ext.conjugate_hab(s, &unit(r, j));
            if apply(&moved) != m.act(s, &apply(&unit(r, j))) {
                return Err(Error::NotEquivariant { sigma: s, basis: j });
            }
        }
    }
    Ok(())
}

/// `d_2(x) = -x ∘ α` for an equivariant `x: H^ab -> M`.
pub fn d2_on_e01(ext: &ExtensionData, alpha: &ExtensionCocycle, x: &ZMat, m: &GModule) -> Result<Cochain> {
    check_hab_map(ext, x, m)?;
    let coeffs = Coefficients::direct(m.clone());
    Ok(Cochain::from_fn(coeffs, 2, |t| m.neg(&x.apply(alpha.value(t[0], t[1])))))
}

/// Inflation `H^2(G) -> H^2(𝒢)` with trivial `Z/l^n` coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InflationReport {
    pub holds: bool,
    /// `log_l |H^2(𝒢)|`.
    pub h2_total_dim: u32,
    /// `log_l` of the inflated image.
    pub inflated_dim: u32,
    pub corank: u32,
}

pub fn inflation_h2_surjective(ext: &ExtensionData, max_order: usize) -> Result<InflationReport> {
    let total = ext.total.clone();
    if total.order() > max_order {
        return Err(Error::SizeBound(format!("|𝒢| = {} exceeds the bound {max_order}", total.order())));
    }
    let ring = ext.ring;
    let big = Coefficients::trivial(total.clone(), ring);
    let width = big.dim(2);
    // |Z^2| = |C^2| / |im d_2|
    let d2_rank = span_log_order(differential_rows(&big, 2)?, big.dim(3), ring);
    let z2 = ring.n() * width as u32 - d2_rank;
    let mut v = Echelon::new(ring, width);
    for row in differential_rows(&big, 1)? {
        v.insert(row);
    }
    let b2 = v.log_order();
    let small = Coefficients::trivial(ext.quotient.clone(), ring);
    let cocycles = LeftSolver::from_rows(differential_rows(&small, 2)?, small.dim(3), ring);
    for row in cocycles.kernel().rows() {
        let f = Cochain::from_values(small.clone(), 2, row.clone())?;
        let inf = inflation(total.clone(), &ext.projection, &f)?;
        v.insert(inf.values.iter().enumerate().filter(|e| *e.1 != 0).map(|(j, &x)| (j, x)).collect());
    }
    let image = v.log_order();
    Ok(InflationReport {
        holds: image == z2,
        h2_total_dim: z2 - b2,
        inflated_dim: image - b2,
        corank: z2 - image,
    })
}

/// Nonzero values keyed by tuple.
pub fn support(f: &Cochain) -> BTreeMap<Vec<usize>, Vec<u64>> {
    let r = f.rank();
    (0..f.coeffs.tuples(f.degree))
        .filter_map(|idx| {
            let v = f.values[idx * r..(idx + 1) * r].to_vec();
            v.iter().any(|&x| x != 0).then(|| (f.coeffs.tuple_of(idx, f.degree), v))
        })
        .collect()
}

/// `Z^k` inside `C^k`, including the relation module.
pub fn cocycles(coeffs: &Arc<Coefficients>, k: usize) -> Result<HowellBasis> {
    let dim = coeffs.dim(k);
    let mut rows = differential_rows(coeffs, k)?;
    rows.extend(relation_rows(coeffs, k + 1));
    let ker = LeftSolver::from_rows(rows, coeffs.dim(k + 1), coeffs.ring());
    let mut z = Echelon::new(coeffs.ring(), dim);
    for row in ker.kernel().rows() {
        z.insert(row[..dim].iter().enumerate().filter(|e| *e.1 != 0).map(|(j, &x)| (j, x)).collect());
    }
    for row in relation_rows(coeffs, k) {
        z.insert(row);
    }
    Ok(z.into_howell())
}

/// The dual basis `x_i ∈ H^1(G, Z/l^n)` of the chosen `σ_i`.
pub fn h1_basis(ext: &ExtensionData) -> Vec<Cochain> {
    let coeffs = Coefficients::trivial(ext.quotient.clone(), ext.ring);
    (0..ext.d()).map(|i| Cochain::from_fn(coeffs.clone(), 1, |t| vec![ext.coords[t[0]][i]])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fingroup::{catalog, make_extension, CatalogParams};
    use crate::gmodule::module_j;

    fn params(kv: &[(&str, &str)]) -> CatalogParams {
        kv.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    fn f2() -> RingConfig {
        RingConfig::new(2, 1).unwrap()
    }

    fn trivial_on(name: &str, kv: &[(&str, &str)]) -> Arc<Coefficients> {
        Coefficients::trivial(Arc::new(catalog(name, &params(kv)).unwrap()), f2())
    }

    fn scalar(coeffs: &Arc<Coefficients>) -> Pairing {
        Pairing::scalar_left(&coeffs.module).unwrap()
    }

    #[test]
    fn differential_matches_the_bar_formula() {
        let g = Arc::new(catalog("elementary_abelian", &params(&[("d", "2")])).unwrap());
        let gr = crate::gmodule::GroupRing::new(g.clone(), f2()).unwrap();
        let coeffs = Coefficients::direct(gr.truncation(3).unwrap().lambda_m.dual().unwrap());
        let m = &coeffs.module;
        for k in 0..=2 {
            let f = Cochain::from_fn(coeffs.clone(), k, |t| {
                (0..m.rank()).map(|j| t.iter().enumerate().map(|(i, &x)| (x * (i + 2) + j) as u64).sum::<u64>() % 2).collect()
            });
            let naive = Cochain::from_fn(coeffs.clone(), k + 1, |t| {
                let mut acc = m.act(t[0], &f.value(&t[1..]));
                for i in 1..=k {
                    let mut inner = t[..i - 1].to_vec();
                    inner.push(g.mul(t[i - 1], t[i]));
                    inner.extend_from_slice(&t[i + 1..]);
                    let v = f.value(&inner);
                    acc = if i % 2 == 0 { m.add(&acc, &v) } else { m.sub(&acc, &v) };
                }
                let last = f.value(&t[..k]);
                if k % 2 == 1 { m.add(&acc, &last) } else { m.sub(&acc, &last) }
            });
            assert_eq!(differential(&f), naive, "degree {k}");
        }
    }

    #[test]
    fn degree_zero_differential() {
        let g = Arc::new(catalog("cyclic", &params(&[("k", "1")])).unwrap());
        let swap = ZMat::from_rows(&[vec![0, 1], vec![1, 0]], 2, f2()).unwrap();
        let m = GModule::new(f2(), vec![1, 1], g, &[swap]).unwrap();
        let c = Cochain::from_values(Coefficients::direct(m), 0, vec![1, 0]).unwrap();
        assert_eq!(differential(&c).value(&[1]), vec![1, 1]);
    }

    #[test]
    fn cyclic_group_of_order_two() {
        let coeffs = trivial_on("cyclic", &[("k", "1")]);
        let x = Cochain::from_values(coeffs.clone(), 1, vec![1]).unwrap();
        assert!(is_cocycle(&x));
        assert!(coboundary_witness(&x).unwrap().is_none());
        let xx = cup(&x, &x, &scalar(&coeffs)).unwrap();
        assert!(coboundary_witness(&xx).unwrap().is_none());
        assert_eq!(cohomology_orders(&coeffs, 2).unwrap(), vec![2]);
        let zero = Cochain::zero(coeffs.clone(), 2);
        assert!(coboundary_witness(&zero).unwrap().unwrap().is_zero());
    }

    #[test]
    fn klein_four_cohomology() {
        let coeffs = trivial_on("elementary_abelian", &[("d", "2")]);
        for k in 0..=3 {
            assert_eq!(cohomology_orders(&coeffs, k).unwrap().len(), k + 1, "degree {k}");
        }
        let one = Coefficients::trivial(Arc::new(FinGroup::trivial(2)), f2());
        assert!(cohomology_orders(&one, 1).unwrap().is_empty());
    }

    #[test]
    fn non_cocycle_is_rejected() {
        let coeffs = trivial_on("cyclic", &[("k", "2")]);
        let f = Cochain::from_fn(coeffs, 1, |t| vec![u64::from(t[0] == 1)]);
        assert!(!is_cocycle(&f));
        assert_eq!(coboundary_witness(&f), Err(Error::NotACocycle));
    }

    #[test]
    fn cyclic_four_over_two() {
        let z4 = catalog("cyclic", &params(&[("k", "2")])).unwrap();
        let ext = make_extension(&z4, f2()).unwrap();
        let alpha = extension_cocycle(&ext);
        assert!(alpha.is_cocycle(&ext));
        let sigma = ext.sigma[0];
        assert_eq!(alpha.value(sigma, sigma), &[1]);
        let chi = ZMat::from_rows(&[vec![1]], 1, f2()).unwrap();
        let j = GModule::trivial(f2(), vec![1], ext.quotient.clone()).unwrap();
        let d2 = d2_on_e01(&ext, &alpha, &chi, &j).unwrap();
        assert!(coboundary_witness(&d2).unwrap().is_none());
    }

    #[test]
    fn split_extension_has_zero_class() {
        let v = catalog("elementary_abelian", &params(&[("d", "2")])).unwrap();
        let ext = make_extension(&v, f2()).unwrap();
        assert!(extension_cocycle(&ext).is_zero());
    }

    #[test]
    fn quaternion_class_is_x2_xy_y2() {
        let q8 = catalog("quaternion8", &CatalogParams::new()).unwrap();
        let ext = make_extension(&q8, f2()).unwrap();
        let alpha = extension_cocycle(&ext);
        assert!(alpha.is_cocycle(&ext));
        let j = module_j(&ext).unwrap();
        let trivial = GModule::trivial(f2(), vec![1], ext.quotient.clone()).unwrap();
        let chi = ZMat::from_rows(&[vec![j.pairing(&[1], &[1])]], 1, f2()).unwrap();
        let d2 = d2_on_e01(&ext, &alpha, &chi, &trivial).unwrap();
        let xs = h1_basis(&ext);
        let p = scalar(&xs[0].coeffs);
        let poly = cup(&xs[0], &xs[0], &p)
            .unwrap()
            .add(&cup(&xs[0], &xs[1], &p).unwrap())
            .unwrap()
            .add(&cup(&xs[1], &xs[1], &p).unwrap())
            .unwrap();
        let poly = Cochain::from_values(d2.coeffs.clone(), 2, poly.values().to_vec()).unwrap();
        assert!(coboundary_witness(&d2.sub(&poly).unwrap()).unwrap().is_some());
        assert!(coboundary_witness(&d2).unwrap().is_none());
    }

    #[test]
    fn non_equivariant_map_is_rejected() {
        let q8 = catalog("quaternion8", &CatalogParams::new()).unwrap();
        let ext = make_extension(&q8, f2()).unwrap();
        let g = ext.quotient.clone();
        let swap = ZMat::from_rows(&[vec![0, 1], vec![1, 0]], 2, f2()).unwrap();
        let ident = ZMat::identity(2, f2());
        let gens: Vec<ZMat> = (0..g.generators().len()).map(|i| if i == 0 { swap.clone() } else { ident.clone() }).collect();
        let m = GModule::new(f2(), vec![1, 1], g, &gens).unwrap();
        let x = ZMat::from_rows(&[vec![1, 0]], 2, f2()).unwrap();
        assert!(matches!(
            d2_on_e01(&ext, &extension_cocycle(&ext), &x, &m),
            Err(Error::NotEquivariant { .. })
        ));
    }

    #[test]
    fn inflation_hypothesis_examples() {
        let q8 = catalog("quaternion8", &CatalogParams::new()).unwrap();
        let r = inflation_h2_surjective(&make_extension(&q8, f2()).unwrap(), DEFAULT_MAX_ORDER).unwrap();
        assert_eq!((r.holds, r.h2_total_dim, r.inflated_dim), (true, 2, 2));
        let d8 = catalog("dihedral8", &CatalogParams::new()).unwrap();
        let r = inflation_h2_surjective(&make_extension(&d8, f2()).unwrap(), DEFAULT_MAX_ORDER).unwrap();
        assert_eq!((r.holds, r.h2_total_dim, r.inflated_dim), (false, 3, 2));
        let v = catalog("elementary_abelian", &params(&[("d", "2")])).unwrap();
        assert!(inflation_h2_surjective(&make_extension(&v, f2()).unwrap(), DEFAULT_MAX_ORDER).unwrap().holds);
        assert!(matches!(
            inflation_h2_surjective(&make_extension(&d8, f2()).unwrap(), 4),
            Err(Error::SizeBound(_))
        ));
    }

    #[test]
    fn restriction_of_inflation_is_trivial() {
        let q8 = catalog("quaternion8", &CatalogParams::new()).unwrap();
        let ext = make_extension(&q8, f2()).unwrap();
        let (h, embedding) = ext.kernel.as_group(&ext.total);
        let xs = h1_basis(&ext);
        let p = scalar(&xs[0].coeffs);
        let c = cup(&xs[0], &xs[1], &p).unwrap();
        let inf = inflation(ext.total.clone(), &ext.projection, &c).unwrap();
        assert!(is_cocycle(&inf));
        let res = restriction(Arc::new(h), &embedding, &inf).unwrap();
        assert!(coboundary_witness(&res).unwrap().is_some());
    }

    #[test]
    fn cochain_json_is_lexicographic() {
        let coeffs = trivial_on("elementary_abelian", &[("d", "2")]);
        let f = Cochain::from_fn(coeffs, 2, |t| vec![(t[0] + t[1]) as u64 % 2]);
        let j = f.to_json();
        assert_eq!(j["degree"], 2);
        let tuples: Vec<Vec<u64>> = j["entries"]
            .as_array()
            .unwrap()
            .iter()
            .map(|e| e[0].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect())
            .collect();
        // nonzero exactly where t_0 + t_1 is odd
        assert_eq!(tuples, vec![vec![1, 2], vec![2, 1], vec![2, 3], vec![3, 2]]);
    }
}
