//! Finite l-groups stored as Cayley tables.
//!
//! Elements are indices. After construction the identity is `0` and the
//! remaining elements follow breadth-first order from the ordered generator
//! list, so every later choice (coset representatives, sections) is
//! deterministic.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zmodlin::{quotient_presentation, Echelon, HowellBasis, RingConfig, SparseRow};

/// Largest table accepted by the validating constructor.
pub const MAX_TABLE_ORDER: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinGroup {
    ell: u64,
    order: usize,
    table: Vec<u32>,
    inverse: Vec<usize>,
    generators: Vec<usize>,
    labels: Option<Vec<String>>,
}

impl FinGroup {
    /// Validates the group axioms and relabels into canonical order.
    pub fn from_cayley_table(table: &[Vec<usize>], generators: &[usize], ell: u64) -> Result<FinGroup> {
        Ok(Self::canonicalize(table, generators, ell, None)?.0)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<FinGroup> {
        if labels.len() != self.order {
            return Err(Error::Parse(format!("{} labels for a group of order {}", labels.len(), self.order)));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Returns the group and the map from input indices to canonical indices.
    pub(crate) fn canonicalize(
        table: &[Vec<usize>],
        generators: &[usize],
        ell: u64,
        labels: Option<Vec<String>>,
    ) -> Result<(FinGroup, Vec<usize>)> {
        let n = table.len();
        if n == 0 {
            return Err(Error::NotAGroup { reason: "empty table".into(), witness: vec![] });
        }
        if n > MAX_TABLE_ORDER {
            return Err(Error::SizeBound(format!("group of order {n} exceeds {MAX_TABLE_ORDER}")));
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotAGroup { reason: "table is not square".into(), witness: vec![i] });
            }
            if let Some(&bad) = row.iter().find(|&&x| x >= n) {
                return Err(Error::NotAGroup { reason: "entry out of range".into(), witness: vec![i, bad] });
            }
        }
        if let Some(&g) = generators.iter().find(|&&g| g >= n) {
            return Err(Error::NotAGroup { reason: "generator out of range".into(), witness: vec![g] });
        }
        let e = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or_else(|| Error::NotAGroup { reason: "no identity".into(), witness: vec![] })?;
        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b];
                for c in 0..n {
                    if table[ab][c] != table[a][table[b][c]] {
                        return Err(Error::NotAGroup {
                            reason: "associativity fails".into(),
                            witness: vec![a, b, c],
                        });
                    }
                }
            }
        }
        let mut inverse = vec![usize::MAX; n];
        for a in 0..n {
            match (0..n).find(|&b| table[a][b] == e && table[b][a] == e) {
                Some(b) => inverse[a] = b,
                None => return Err(Error::NotAGroup { reason: "missing inverse".into(), witness: vec![a] }),
            }
        }
        // element orders
        for a in 0..n {
            let mut k = 1;
            let mut x = a;
            while x != e {
                x = table[x][a];
                k += 1;
            }
            let mut m = k;
            while m % ell as usize == 0 {
                m /= ell as usize;
            }
            if m != 1 {
                return Err(Error::NotEllGroup { element: a, order: k, ell });
            }
        }
        // breadth-first relabelling
        let mut new_index = vec![usize::MAX; n];
        let mut order = vec![e];
        new_index[e] = 0;
        let mut queue = VecDeque::from([e]);
        while let Some(g) = queue.pop_front() {
            for &s in generators {
                let h = table[g][s];
                if new_index[h] == usize::MAX {
                    new_index[h] = order.len();
                    order.push(h);
                    queue.push_back(h);
                }
            }
        }
        if order.len() != n {
            return Err(Error::GeneratorsDontGenerate { reached: order.len(), order: n });
        }
        let mut flat = vec![0u32; n * n];
        for (i, &a) in order.iter().enumerate() {
            for (j, &b) in order.iter().enumerate() {
                flat[i * n + j] = new_index[table[a][b]] as u32;
            }
        }
        let inverse = order.iter().map(|&a| new_index[inverse[a]]).collect();
        let labels = labels.map(|l| order.iter().map(|&a| l[a].clone()).collect());
        let group = FinGroup {
            ell,
            order: n,
            table: flat,
            inverse,
            generators: generators.iter().map(|&g| new_index[g]).collect(),
            labels,
        };
        Ok((group, new_index))
    }

    pub fn trivial(ell: u64) -> FinGroup {
        FinGroup { ell, order: 1, table: vec![0], inverse: vec![0], generators: vec![], labels: None }
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b] as usize
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn pow(&self, a: usize, k: u64) -> usize {
        let mut x = 0;
        for _ in 0..k {
            x = self.mul(x, a);
        }
        x
    }

    /// `g x g^-1`.
    pub fn conj(&self, g: usize, x: usize) -> usize {
        self.mul(self.mul(g, x), self.inv(g))
    }

    /// `[a, b] = a^-1 b^-1 a b`.
    pub fn commutator(&self, a: usize, b: usize) -> usize {
        self.mul(self.mul(self.inv(a), self.inv(b)), self.mul(a, b))
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut k = 1;
        let mut x = a;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..self.order).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn cayley(&self) -> Vec<Vec<usize>> {
        (0..self.order).map(|a| (0..self.order).map(|b| self.mul(a, b)).collect()).collect()
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    /// The same group with a different ordered generator list.
    pub fn regenerated(&self, generators: &[usize]) -> Result<(FinGroup, Vec<usize>)> {
        Self::canonicalize(&self.cayley(), generators, self.ell, self.labels.clone())
    }
}

/// A subgroup as a sorted set of parent indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subgroup {
    parent_order: usize,
    elements: Vec<usize>,
    member: Vec<bool>,
}

impl Subgroup {
    /// Closure of `gens` under multiplication.
    pub fn generated_by(g: &FinGroup, gens: &[usize]) -> Subgroup {
        let mut member = vec![false; g.order()];
        member[0] = true;
        let mut elements = vec![0];
        let mut i = 0;
        while i < elements.len() {
            let x = elements[i];
            for &s in gens {
                let y = g.mul(x, s);
                if !member[y] {
                    member[y] = true;
                    elements.push(y);
                }
            }
            i += 1;
        }
        elements.sort_unstable();
        Subgroup { parent_order: g.order(), elements, member }
    }

    pub fn whole(g: &FinGroup) -> Subgroup {
        Subgroup { parent_order: g.order(), elements: g.elements().collect(), member: vec![true; g.order()] }
    }

    pub fn trivial(g: &FinGroup) -> Subgroup {
        Self::generated_by(g, &[])
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.member[x]
    }

    pub fn parent_order(&self) -> usize {
        self.parent_order
    }

    /// `Err((g, x))` with `g x g^-1` outside the subgroup.
    pub fn check_normal(&self, g: &FinGroup) -> std::result::Result<(), (usize, usize)> {
        for &s in g.generators() {
            for &x in &self.elements {
                if !self.contains(g.conj(s, x)) {
                    return Err((s, x));
                }
            }
        }
        Ok(())
    }

    pub fn is_normal(&self, g: &FinGroup) -> bool {
        self.check_normal(g).is_ok()
    }

    /// The subgroup as a group in its own right, with its embedding.
    pub fn as_group(&self, g: &FinGroup) -> (FinGroup, Vec<usize>) {
        let local: HashMap<usize, usize> = self.elements.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let table: Vec<Vec<usize>> = self
            .elements
            .iter()
            .map(|&a| self.elements.iter().map(|&b| local[&g.mul(a, b)]).collect())
            .collect();
        // greedy generating set in increasing parent order
        let mut gens = vec![];
        let mut reached = Subgroup::generated_by(g, &[]);
        for &x in &self.elements {
            if !reached.contains(x) {
                gens.push(x);
                let parent_gens: Vec<usize> = gens.clone();
                reached = Subgroup::generated_by(g, &parent_gens);
            }
        }
        let local_gens: Vec<usize> = gens.iter().map(|x| local[x]).collect();
        let (sub, relabel) = FinGroup::canonicalize(&table, &local_gens, g.ell(), None)
            .expect("a subgroup of a valid group is a valid group");
        let mut embedding = vec![0; sub.order()];
        for (i, &x) in self.elements.iter().enumerate() {
            embedding[relabel[i]] = x;
        }
        (sub, embedding)
    }
}

/// `[G, N] N^(l^n)` for a normal subgroup `N`: one step of the mod-`l^n`
/// central descending series.
pub fn descending_step_of(g: &FinGroup, normal: &Subgroup, ring: RingConfig) -> Subgroup {
    let mut gens = vec![];
    for a in g.elements() {
        for &b in normal.elements() {
            gens.push(g.commutator(a, b));
        }
    }
    for &b in normal.elements() {
        gens.push(g.pow(b, ring.modulus()));
    }
    gens.sort_unstable();
    gens.dedup();
    Subgroup::generated_by(g, &gens)
}

/// `G^(2,n) = [G,G] G^(l^n)`.
pub fn descending_step(g: &FinGroup, ring: RingConfig) -> Subgroup {
    descending_step_of(g, &Subgroup::whole(g), ring)
}

/// `G^(1,n) ⊇ G^(2,n) ⊇ ...` down to the first repeated term.
pub fn descending_series(g: &FinGroup, ring: RingConfig) -> Vec<Subgroup> {
    let mut series = vec![Subgroup::whole(g)];
    loop {
        let next = descending_step_of(g, series.last().unwrap(), ring);
        if &next == series.last().unwrap() {
            return series;
        }
        series.push(next);
    }
}

/// `G / N` with least-index coset representatives; the quotient's
/// generators are the images of the parent's generators.
pub fn quotient(g: &FinGroup, normal: &Subgroup) -> Result<(FinGroup, Vec<usize>)> {
    normal
        .check_normal(g)
        .map_err(|(conjugator, element)| Error::NotNormal { conjugator, element })?;
    let mut rep_index = vec![usize::MAX; g.order()];
    let mut reps = vec![];
    for x in g.elements() {
        if rep_index[x] == usize::MAX {
            let idx = reps.len();
            reps.push(x);
            for &h in normal.elements() {
                rep_index[g.mul(x, h)] = idx;
            }
        }
    }
    let table: Vec<Vec<usize>> = reps
        .iter()
        .map(|&a| reps.iter().map(|&b| rep_index[g.mul(a, b)]).collect())
        .collect();
    let mut gens = vec![];
    for &s in g.generators() {
        let c = rep_index[s];
        if c != rep_index[0] && !gens.contains(&c) {
            gens.push(c);
        }
    }
    let (q, relabel) = FinGroup::canonicalize(&table, &gens, g.ell(), None)?;
    let projection = g.elements().map(|x| relabel[rep_index[x]]).collect();
    Ok((q, projection))
}

/// A finite abelian l-group written as `∏ Z/l^e_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbelianDecomposition {
    /// `Z/l^N` with `l^N` the exponent of the group.
    pub ring: RingConfig,
    pub exponents: Vec<u32>,
    /// Coordinates of every element of the decomposed group.
    pub coords: Vec<Vec<u64>>,
    element_of: HashMap<Vec<u64>, usize>,
}

impl AbelianDecomposition {
    /// Decomposes an abelian group from its relation module.
    pub fn of_abelian(a: &FinGroup) -> Result<AbelianDecomposition> {
        debug_assert!(a.is_abelian());
        let exponent = a.elements().map(|x| a.element_order(x)).max().unwrap_or(1);
        let mut big_n = 0;
        let mut e = 1;
        while e < exponent {
            e *= a.ell() as usize;
            big_n += 1;
        }
        let ring = RingConfig::new(a.ell(), big_n.max(1))?;
        let gens = a.generators();
        let r = gens.len();
        // words along the breadth-first tree
        let mut word: Vec<Option<Vec<u64>>> = vec![None; a.order()];
        word[0] = Some(vec![0; r]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for (i, &s) in gens.iter().enumerate() {
                let y = a.mul(x, s);
                if word[y].is_none() {
                    let mut w = word[x].clone().unwrap();
                    w[i] = ring.add(w[i], 1);
                    word[y] = Some(w);
                    queue.push_back(y);
                }
            }
        }
        let word: Vec<Vec<u64>> = word.into_iter().map(|w| w.expect("generators generate")).collect();
        let mut relations = Echelon::new(ring, r);
        for x in a.elements() {
            for (i, &s) in gens.iter().enumerate() {
                let y = a.mul(x, s);
                let rel: SparseRow = (0..r)
                    .map(|j| {
                        let mut v = ring.sub(word[x][j], word[y][j]);
                        if j == i {
                            v = ring.add(v, 1);
                        }
                        (j, v)
                    })
                    .filter(|e| e.1 != 0)
                    .collect();
                relations.insert(rel);
            }
        }
        let kernel: HowellBasis = relations.into_howell();
        let qp = quotient_presentation(&kernel, r)?;
        let coords: Vec<Vec<u64>> = word.iter().map(|w| qp.project(w)).collect();
        let element_of = coords.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
        Ok(AbelianDecomposition { ring, exponents: qp.exponents.clone(), coords, element_of })
    }

    pub fn orders(&self) -> Vec<u64> {
        self.ring.orders_of(&self.exponents)
    }

    pub fn rank(&self) -> usize {
        self.exponents.len()
    }

    pub fn element(&self, coords: &[u64]) -> Option<usize> {
        self.element_of.get(coords).copied()
    }

    /// Reduces integer coordinates into the canonical box.
    pub fn reduce(&self, c: &mut [u64]) {
        for (x, &e) in c.iter_mut().zip(&self.exponents) {
            *x %= self.ring.ell_pow(e);
        }
    }
}

/// The abelianization `G/[G,G]` with projection from `G`.
pub fn abelianization(g: &FinGroup) -> Result<(AbelianDecomposition, Vec<usize>)> {
    let mut gens = vec![];
    for a in g.elements() {
        for b in g.elements() {
            gens.push(g.commutator(a, b));
        }
    }
    gens.sort_unstable();
    gens.dedup();
    let derived = Subgroup::generated_by(g, &gens);
    let (ab, proj) = quotient(g, &derived)?;
    Ok((AbelianDecomposition::of_abelian(&ab)?, proj))
}

/// The extension `1 -> H -> 𝒢 -> G -> 1` with `H = 𝒢^(2,n)` and
/// `G ≅ (Z/l^n)^d`.
#[derive(Debug, Clone)]
pub struct ExtensionData {
    pub ring: RingConfig,
    pub total: Arc<FinGroup>,
    pub kernel: Subgroup,
    pub quotient: Arc<FinGroup>,
    /// `𝒢 -> G`.
    pub projection: Vec<usize>,
    /// `G -> 𝒢`, `section[0] = 0`.
    pub section: Vec<usize>,
    /// The basis `σ_i` of `G`.
    pub sigma: Vec<usize>,
    /// Least-index lifts of the `σ_i`.
    pub sigma_lifts: Vec<usize>,
    /// Exponent vectors of elements of `G` in the `σ_i`; these are the dual
    /// basis `x_i` of `H^1(G)`.
    pub coords: Vec<Vec<u64>>,
    /// `H^ab` with coordinates of every element of `H` (indexed by 𝒢 element).
    pub hab: AbelianDecomposition,
    hab_coords: HashMap<usize, Vec<u64>>,
    hab_reps: HashMap<Vec<u64>, usize>,
}

impl ExtensionData {
    pub fn d(&self) -> usize {
        self.sigma.len()
    }

    /// Coordinates in `H^ab` of an element of `H ⊆ 𝒢`.
    pub fn hab_coords(&self, h: usize) -> &[u64] {
        &self.hab_coords[&h]
    }

    /// Some element of `H ⊆ 𝒢` with the given `H^ab` coordinates.
    pub fn hab_representative(&self, c: &[u64]) -> usize {
        self.hab_reps[c]
    }

    /// `s(g) h s(g)^-1` on `H^ab` coordinates, `g ∈ G`.
    pub fn conjugate_hab(&self, g: usize, c: &[u64]) -> Vec<u64> {
        let h = self.hab_representative(c);
        self.hab_coords(self.total.conj(self.section[g], h)).to_vec()
    }

    /// Element of `G` with the given exponent vector.
    pub fn element_with_coords(&self, a: &[u64]) -> usize {
        let q = &self.quotient;
        let mut x = 0;
        for (&s, &k) in self.sigma.iter().zip(a) {
            x = q.mul(x, q.pow(s, k));
        }
        x
    }

    /// The same extension with the basis `σ` reordered by `perm`
    /// (`new σ_i = old σ_perm[i]`); the section is rebuilt from the new words.
    pub fn permuted(&self, perm: &[usize]) -> Result<ExtensionData> {
        let sigma: Vec<usize> = perm.iter().map(|&i| self.sigma[i]).collect();
        build_extension(self.total.clone(), self.kernel.clone(), self.quotient.clone(), self.projection.clone(), sigma, self.ring)
    }
}

pub fn make_extension(g: &FinGroup, ring: RingConfig) -> Result<ExtensionData> {
    if g.ell() != ring.ell() {
        return Err(Error::InvalidRing(format!("group is a {}-group, ring is Z/{}", g.ell(), ring.modulus())));
    }
    let h = descending_step(g, ring);
    let (q, projection) = quotient(g, &h)?;
    let dec = AbelianDecomposition::of_abelian(&q)?;
    if dec.exponents.iter().any(|&e| e != ring.n()) {
        return Err(Error::QuotientNotFree { modulus: ring.modulus(), factors: dec.orders() });
    }
    let d = dec.rank();
    // greedy basis modulo l, scanning G in canonical order
    let fl = RingConfig::new(ring.ell(), 1)?;
    let mut chosen: Vec<Vec<u64>> = vec![];
    let mut sigma = vec![];
    for x in q.elements().skip(1) {
        if sigma.len() == d {
            break;
        }
        let v: Vec<u64> = dec.coords[x].iter().map(|&c| c % ring.ell()).collect();
        let before = HowellBasis::from_vectors(&chosen, d, fl)?.log_order();
        chosen.push(v);
        if HowellBasis::from_vectors(&chosen, d, fl)?.log_order() > before {
            sigma.push(x);
        } else {
            chosen.pop();
        }
    }
    build_extension(Arc::new(g.clone()), h, Arc::new(q), projection, sigma, ring)
}

fn build_extension(
    total: Arc<FinGroup>,
    kernel: Subgroup,
    quotient: Arc<FinGroup>,
    projection: Vec<usize>,
    sigma: Vec<usize>,
    ring: RingConfig,
) -> Result<ExtensionData> {
    let q = &quotient;
    let d = sigma.len();
    let mut coords: Vec<Option<Vec<u64>>> = vec![None; q.order()];
    let mut exps = vec![0u64; d];
    loop {
        let mut x = 0;
        for (&s, &k) in sigma.iter().zip(&exps) {
            x = q.mul(x, q.pow(s, k));
        }
        if coords[x].is_some() {
            return Err(Error::QuotientNotFree { modulus: ring.modulus(), factors: vec![] });
        }
        coords[x] = Some(exps.clone());
        // odometer
        let mut i = 0;
        while i < d {
            exps[i] += 1;
            if exps[i] < ring.modulus() {
                break;
            }
            exps[i] = 0;
            i += 1;
        }
        if i == d {
            break;
        }
    }
    let coords: Vec<Vec<u64>> = coords
        .into_iter()
        .map(|c| c.ok_or_else(|| Error::QuotientNotFree { modulus: ring.modulus(), factors: vec![] }))
        .collect::<Result<_>>()?;
    let sigma_lifts: Vec<usize> = sigma
        .iter()
        .map(|&s| total.elements().find(|&x| projection[x] == s).expect("projection is onto"))
        .collect();
    let section: Vec<usize> = coords
        .iter()
        .map(|a| {
            let mut x = 0;
            for (&s, &k) in sigma_lifts.iter().zip(a) {
                x = total.mul(x, total.pow(s, k));
            }
            x
        })
        .collect();
    let (hgroup, embedding) = kernel.as_group(&total);
    let hab_q = abelianization(&hgroup)?;
    let (hab, hproj) = hab_q;
    let mut hab_coords = HashMap::new();
    let mut hab_reps = HashMap::new();
    for (local, &x) in embedding.iter().enumerate() {
        let c = hab.coords[hproj[local]].clone();
        hab_reps.entry(c.clone()).or_insert(x);
        hab_coords.insert(x, c);
    }
    Ok(ExtensionData {
        ring,
        total,
        kernel,
        quotient,
        projection,
        section,
        sigma,
        sigma_lifts,
        coords,
        hab,
        hab_coords,
        hab_reps,
    })
}

/// A class-at-most-2 group in normal form `e_1^a_1 … e_d^a_d · z`, with
/// `z` in a central group `∏ Z/central_orders[k]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Class2Presentation {
    pub d: usize,
    pub ell: u64,
    pub n: u32,
    pub central_orders: Vec<u64>,
    /// `(i, j, word)` meaning `[e_i, e_j] = z^word` for `i < j`.
    #[serde(default)]
    pub commutators: Vec<(usize, usize, Vec<u64>)>,
    /// `e_i^(l^n) = z^powers[i]`; missing entries are trivial.
    #[serde(default)]
    pub powers: Vec<Vec<u64>>,
}

impl Class2Presentation {
    pub fn build(&self) -> Result<FinGroup> {
        let ring = RingConfig::new(self.ell, self.n)?;
        let bad = |m: String| Error::InconsistentPresentation(m);
        let t = self.central_orders.len();
        for &o in &self.central_orders {
            let mut x = o;
            while x > 1 && x % self.ell == 0 {
                x /= self.ell;
            }
            if o < 1 || x != 1 {
                return Err(bad(format!("central order {o} is not a power of {}", self.ell)));
            }
        }
        let reduce = |w: &[u64]| -> Result<Vec<u64>> {
            if w.len() != t {
                return Err(bad(format!("central word {w:?} has length {}, expected {t}", w.len())));
            }
            Ok(w.iter().zip(&self.central_orders).map(|(&a, &o)| a % o).collect())
        };
        let mut comm = vec![vec![vec![0u64; t]; self.d]; self.d];
        for (i, j, w) in &self.commutators {
            if !(i < j && *j < self.d) {
                return Err(bad(format!("commutator index ({i}, {j}) must satisfy i < j < d")));
            }
            comm[*i][*j] = reduce(w)?;
        }
        if self.powers.len() > self.d {
            return Err(bad("more power relations than generators".into()));
        }
        let mut powers = vec![vec![0u64; t]; self.d];
        for (i, w) in self.powers.iter().enumerate() {
            powers[i] = reduce(w)?;
        }
        let m = ring.modulus();
        let mut radix: Vec<u64> = vec![m; self.d];
        radix.extend(&self.central_orders);
        let order = radix.iter().try_fold(1u64, |acc, &r| acc.checked_mul(r)).unwrap_or(u64::MAX);
        if order > MAX_TABLE_ORDER as u64 {
            return Err(Error::SizeBound(format!("presented group has order {order}")));
        }
        let order = order as usize;
        let decode = |mut idx: usize| -> Vec<u64> {
            radix
                .iter()
                .map(|&r| {
                    let v = (idx as u64) % r;
                    idx /= r as usize;
                    v
                })
                .collect()
        };
        let encode = |v: &[u64]| -> usize {
            let mut idx = 0usize;
            for (x, &r) in v.iter().zip(&radix).rev() {
                idx = idx * r as usize + *x as usize;
            }
            idx
        };
        let elems: Vec<Vec<u64>> = (0..order).map(decode).collect();
        let mut table = vec![vec![0usize; order]; order];
        for (ia, a) in elems.iter().enumerate() {
            for (ib, b) in elems.iter().enumerate() {
                let mut out = vec![0u64; self.d + t];
                let mut z: Vec<u64> = (0..t).map(|k| a[self.d + k] + b[self.d + k]).collect();
                for i in 0..self.d {
                    let s = a[i] + b[i];
                    out[i] = s % m;
                    if s >= m {
                        for k in 0..t {
                            z[k] += powers[i][k];
                        }
                    }
                }
                // moving e_i^b_i left past e_j^a_j (i < j) costs [e_j, e_i]^(a_j b_i) = [e_i, e_j]^(-a_j b_i)
                for i in 0..self.d {
                    for j in i + 1..self.d {
                        let k_ij = a[j] * b[i];
                        if k_ij == 0 {
                            continue;
                        }
                        for k in 0..t {
                            let o = self.central_orders[k];
                            z[k] += (o - comm[i][j][k] % o) * (k_ij % o);
                        }
                    }
                }
                for k in 0..t {
                    out[self.d + k] = z[k] % self.central_orders[k];
                }
                table[ia][ib] = encode(&out);
            }
        }
        let mut gens: Vec<usize> = (0..self.d)
            .map(|i| {
                let mut v = vec![0u64; self.d + t];
                v[i] = 1;
                encode(&v)
            })
            .collect();
        // central generators not already reached
        for k in 0..t {
            let mut v = vec![0u64; self.d + t];
            v[self.d + k] = 1;
            let zk = encode(&v);
            if !closure_contains(&table, &gens, zk) {
                gens.push(zk);
            }
        }
        let labels: Vec<String> = elems.iter().map(|v| word_label(v, self.d)).collect();
        Ok(FinGroup::canonicalize(&table, &gens, self.ell, Some(labels))?.0)
    }
}

fn closure_contains(table: &[Vec<usize>], gens: &[usize], target: usize) -> bool {
    let mut seen = vec![false; table.len()];
    // index of the identity in the normal-form encoding is 0
    seen[0] = true;
    let mut stack = vec![0usize];
    while let Some(x) = stack.pop() {
        if x == target {
            return true;
        }
        for &s in gens {
            let y = table[x][s];
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    false
}

fn word_label(v: &[u64], d: usize) -> String {
    let mut parts = vec![];
    for (i, &a) in v.iter().enumerate() {
        if a == 0 {
            continue;
        }
        let name = if i < d { format!("e{}", i + 1) } else { format!("z{}", i - d + 1) };
        parts.push(if a == 1 { name } else { format!("{name}^{a}") });
    }
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

pub fn from_class2_presentation(p: &Class2Presentation) -> Result<FinGroup> {
    p.build()
}

fn abelian_table(orders: &[u64], ell: u64) -> Result<FinGroup> {
    let order: u64 = orders.iter().product();
    if order > MAX_TABLE_ORDER as u64 {
        return Err(Error::SizeBound(format!("abelian group of order {order}")));
    }
    let order = order as usize;
    let decode = |mut i: usize| -> Vec<u64> {
        orders
            .iter()
            .map(|&o| {
                let v = i as u64 % o;
                i /= o as usize;
                v
            })
            .collect()
    };
    let encode = |v: &[u64]| v.iter().zip(orders).rev().fold(0usize, |acc, (&x, &o)| acc * o as usize + x as usize);
    let elems: Vec<Vec<u64>> = (0..order).map(decode).collect();
    let table: Vec<Vec<usize>> = elems
        .iter()
        .map(|a| {
            elems
                .iter()
                .map(|b| encode(&a.iter().zip(b).zip(orders).map(|((x, y), o)| (x + y) % o).collect::<Vec<_>>()))
                .collect()
        })
        .collect();
    let gens: Vec<usize> = (0..orders.len())
        .filter(|&i| orders[i] > 1)
        .map(|i| {
            let mut v = vec![0; orders.len()];
            v[i] = 1;
            encode(&v)
        })
        .collect();
    FinGroup::from_cayley_table(&table, &gens, ell)
}

/// `(Z/4 × Z/4) ⋊ Z/2` with the swap action.
fn wreath_z4_z2() -> Result<FinGroup> {
    let enc = |u: usize, v: usize, t: usize| u + 4 * v + 16 * t;
    let mut table = vec![vec![0; 32]; 32];
    for x in 0..32 {
        let (u, v, t) = (x % 4, (x / 4) % 4, x / 16);
        for y in 0..32 {
            let (u2, v2, t2) = (y % 4, (y / 4) % 4, y / 16);
            let (a, b) = if t == 0 { (u2, v2) } else { (v2, u2) };
            table[x][y] = enc((u + a) % 4, (v + b) % 4, (t + t2) % 2);
        }
    }
    FinGroup::from_cayley_table(&table, &[enc(1, 0, 0), enc(0, 0, 1)], 2)
}

pub type CatalogParams = BTreeMap<String, String>;

fn param_u64(params: &CatalogParams, key: &str, default: Option<u64>) -> Result<u64> {
    match params.get(key) {
        Some(s) => s.parse().map_err(|_| Error::Parse(format!("parameter {key}={s} is not an integer"))),
        None => default.ok_or_else(|| Error::Parse(format!("missing parameter {key}"))),
    }
}

pub const CATALOG_NAMES: &[&str] = &[
    "cyclic",
    "elementary_abelian",
    "abelian_product",
    "dihedral8",
    "quaternion8",
    "heisenberg",
    "unitriangular3",
    "wreath_z4_z2",
    "free_class2",
];

/// Named groups. `ell` and `n` default to 2 and 1 when absent.
pub fn catalog(name: &str, params: &CatalogParams) -> Result<FinGroup> {
    let ell = param_u64(params, "ell", Some(2))?;
    let n = param_u64(params, "n", Some(1))? as u32;
    match name {
        "cyclic" => {
            let k = param_u64(params, "k", Some(1))? as u32;
            abelian_table(&[ell.pow(k)], ell)
        }
        "elementary_abelian" => {
            let d = param_u64(params, "d", Some(2))? as usize;
            abelian_table(&vec![ell; d], ell)
        }
        "abelian_product" => {
            let orders: Vec<u64> = params
                .get("orders")
                .ok_or_else(|| Error::Parse("missing parameter orders".into()))?
                .split(':')
                .map(|s| s.parse().map_err(|_| Error::Parse(format!("bad order {s}"))))
                .collect::<Result<_>>()?;
            abelian_table(&orders, ell)
        }
        "dihedral8" => Class2Presentation {
            d: 2,
            ell: 2,
            n: 1,
            central_orders: vec![2],
            commutators: vec![(0, 1, vec![1])],
            powers: vec![],
        }
        .build(),
        "quaternion8" => Class2Presentation {
            d: 2,
            ell: 2,
            n: 1,
            central_orders: vec![2],
            commutators: vec![(0, 1, vec![1])],
            powers: vec![vec![1], vec![1]],
        }
        .build(),
        "heisenberg" => Class2Presentation {
            d: 2,
            ell,
            n: 1,
            central_orders: vec![ell],
            commutators: vec![(0, 1, vec![1])],
            powers: vec![],
        }
        .build(),
        "unitriangular3" => {
            let m = RingConfig::new(ell, n)?.modulus();
            Class2Presentation {
                d: 2,
                ell,
                n,
                central_orders: vec![m],
                commutators: vec![(0, 1, vec![1])],
                powers: vec![],
            }
            .build()
        }
        "wreath_z4_z2" => wreath_z4_z2(),
        "free_class2" => {
            let d = param_u64(params, "d", Some(2))? as usize;
            let m = RingConfig::new(ell, n)?.modulus();
            let pairs: Vec<(usize, usize)> = (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).collect();
            let t = pairs.len() + d;
            let unit = |k: usize| {
                let mut w = vec![0u64; t];
                w[k] = 1;
                w
            };
            Class2Presentation {
                d,
                ell,
                n,
                central_orders: vec![m; t],
                commutators: pairs.iter().enumerate().map(|(k, &(i, j))| (i, j, unit(k))).collect(),
                powers: (0..d).map(|i| unit(pairs.len() + i)).collect(),
            }
            .build()
        }
        other => Err(Error::UnknownCatalogEntry(other.to_string())),
    }
}

/// Group input file: an explicit table, a class-2 presentation, or a
/// catalog reference.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupSpec {
    Cayley {
        cayley: Vec<Vec<usize>>,
        generators: Vec<usize>,
        #[serde(default)]
        ell: Option<u64>,
        #[serde(default)]
        labels: Option<Vec<String>>,
    },
    Class2 {
        class2: Class2Presentation,
    },
    Catalog {
        catalog: String,
        #[serde(default)]
        params: CatalogParams,
    },
}

impl GroupSpec {
    pub fn parse(json: &str) -> Result<GroupSpec> {
        serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))
    }

    /// `default_ell` applies to tables without an explicit `ell`.
    pub fn build(&self, default_ell: u64) -> Result<FinGroup> {
        match self {
            GroupSpec::Cayley { cayley, generators, ell, labels } => {
                if let Some(l) = labels {
                    if l.len() != cayley.len() {
                        return Err(Error::Parse(format!("{} labels for {} elements", l.len(), cayley.len())));
                    }
                }
                Ok(FinGroup::canonicalize(cayley, generators, ell.unwrap_or(default_ell), labels.clone())?.0)
            }
            GroupSpec::Class2 { class2 } => class2.build(),
            GroupSpec::Catalog { catalog: name, params } => catalog(name, params),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(kv: &[(&str, &str)]) -> CatalogParams {
        kv.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    fn klein_table() -> Vec<Vec<usize>> {
        (0..4).map(|a| (0..4).map(|b| a ^ b).collect()).collect()
    }

    #[test]
    fn klein_four() {
        let g = FinGroup::from_cayley_table(&klein_table(), &[1, 2], 2).unwrap();
        assert_eq!(g.order(), 4);
        assert!(g.is_abelian());
    }

    #[test]
    fn broken_associativity_reports_witness() {
        let mut t = klein_table();
        // keep identity row/column, corrupt an interior entry
        t[1][2] = 1;
        t[1][1] = 3;
        match FinGroup::from_cayley_table(&t, &[1, 2], 2) {
            Err(Error::NotAGroup { witness, .. }) => assert!(!witness.is_empty()),
            other => panic!("expected NotAGroup, got {other:?}"),
        }
    }

    #[test]
    fn s3_is_not_a_2_group() {
        // permutations of {0,1,2} composed as (p*q)(x) = p(q(x))
        let perms: Vec<[usize; 3]> = vec![[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]];
        let idx = |p: [usize; 3]| perms.iter().position(|q| *q == p).unwrap();
        let table: Vec<Vec<usize>> = perms
            .iter()
            .map(|p| perms.iter().map(|q| idx([p[q[0]], p[q[1]], p[q[2]]])).collect())
            .collect();
        match FinGroup::from_cayley_table(&table, &[1, 4], 2) {
            Err(Error::NotEllGroup { order, .. }) => assert_eq!(order, 3),
            other => panic!("expected NotEllGroup, got {other:?}"),
        }
    }

    #[test]
    fn generators_must_generate() {
        assert!(matches!(
            FinGroup::from_cayley_table(&klein_table(), &[1], 2),
            Err(Error::GeneratorsDontGenerate { reached: 2, order: 4 })
        ));
    }

    #[test]
    fn q8_from_presentation_is_quaternion() {
        let q8 = catalog("quaternion8", &params(&[])).unwrap();
        assert_eq!(q8.order(), 8);
        assert!(!q8.is_abelian());
        // exactly one involution (-1), six elements of order 4
        let orders: Vec<usize> = q8.elements().map(|x| q8.element_order(x)).collect();
        assert_eq!(orders.iter().filter(|&&o| o == 2).count(), 1);
        assert_eq!(orders.iter().filter(|&&o| o == 4).count(), 6);
        let (i, j) = (q8.generators()[0], q8.generators()[1]);
        let minus_one = q8.mul(i, i);
        assert_eq!(q8.mul(j, j), minus_one);
        assert_eq!(q8.commutator(i, j), minus_one);
    }

    #[test]
    fn trivial_presentation() {
        let p = Class2Presentation { d: 0, ell: 2, n: 1, central_orders: vec![], commutators: vec![], powers: vec![] };
        assert_eq!(p.build().unwrap().order(), 1);
    }

    #[test]
    fn heisenberg_27_has_exponent_3() {
        let h = catalog("heisenberg", &params(&[("ell", "3")])).unwrap();
        assert_eq!(h.order(), 27);
        assert!(h.elements().all(|x| h.pow(x, 3) == 0));
    }

    #[test]
    fn presentation_commutators_and_powers_hold() {
        let g = catalog("free_class2", &params(&[("d", "2")])).unwrap();
        assert_eq!(g.order(), 32);
        let (a, b) = (g.generators()[0], g.generators()[1]);
        let z = [g.commutator(a, b), g.pow(a, 2), g.pow(b, 2)];
        let center: Vec<usize> = g.elements().filter(|&x| g.elements().all(|y| g.mul(x, y) == g.mul(y, x))).collect();
        for zk in z {
            assert!(center.contains(&zk));
            assert_eq!(g.element_order(zk), 2);
        }
        assert_eq!(Subgroup::generated_by(&g, &z).order(), 8);
    }

    #[test]
    fn inconsistent_presentation() {
        let p = Class2Presentation {
            d: 2,
            ell: 2,
            n: 1,
            central_orders: vec![3],
            commutators: vec![],
            powers: vec![],
        };
        assert!(matches!(p.build(), Err(Error::InconsistentPresentation(_))));
        let p = Class2Presentation {
            d: 2,
            ell: 2,
            n: 1,
            central_orders: vec![2],
            commutators: vec![(1, 0, vec![1])],
            powers: vec![],
        };
        assert!(matches!(p.build(), Err(Error::InconsistentPresentation(_))));
    }

    #[test]
    fn descending_step_examples() {
        let r2 = RingConfig::new(2, 1).unwrap();
        let q8 = catalog("quaternion8", &params(&[])).unwrap();
        let h = descending_step(&q8, r2);
        assert_eq!(h.order(), 2);
        let minus_one = q8.mul(q8.generators()[0], q8.generators()[0]);
        assert!(h.contains(minus_one));
        let v4 = catalog("elementary_abelian", &params(&[("d", "2")])).unwrap();
        assert_eq!(descending_step(&v4, r2).order(), 1);
        let z4 = catalog("cyclic", &params(&[("k", "2")])).unwrap();
        let h = descending_step(&z4, r2);
        assert_eq!(h.order(), 2);
        assert!(h.contains(z4.pow(z4.generators()[0], 2)));
    }

    #[test]
    fn quotient_examples() {
        let r2 = RingConfig::new(2, 1).unwrap();
        let q8 = catalog("quaternion8", &params(&[])).unwrap();
        let (q, proj) = quotient(&q8, &descending_step(&q8, r2)).unwrap();
        assert_eq!(q.order(), 4);
        assert!(q.elements().skip(1).all(|x| q.element_order(x) == 2));
        for a in q8.elements() {
            for b in q8.elements() {
                assert_eq!(proj[q8.mul(a, b)], q.mul(proj[a], proj[b]));
            }
        }
        let (same, _) = quotient(&q8, &Subgroup::trivial(&q8)).unwrap();
        assert_eq!(same.order(), 8);
        let (triv, _) = quotient(&q8, &Subgroup::whole(&q8)).unwrap();
        assert_eq!(triv.order(), 1);
    }

    #[test]
    fn non_normal_quotient_fails() {
        let d8 = catalog("dihedral8", &params(&[])).unwrap();
        let s = d8.generators()[0];
        let sub = Subgroup::generated_by(&d8, &[s]);
        assert!(matches!(quotient(&d8, &sub), Err(Error::NotNormal { .. })));
    }

    #[test]
    fn abelianization_examples() {
        let q8 = catalog("quaternion8", &params(&[])).unwrap();
        assert_eq!(abelianization(&q8).unwrap().0.orders(), vec![2, 2]);
        let heis = catalog("heisenberg", &params(&[("ell", "3")])).unwrap();
        assert_eq!(abelianization(&heis).unwrap().0.orders(), vec![3, 3]);
        let ab = catalog("abelian_product", &params(&[("orders", "2:4")])).unwrap();
        assert_eq!(abelianization(&ab).unwrap().0.orders(), vec![2, 4]);
    }

    #[test]
    fn extension_examples() {
        let r2 = RingConfig::new(2, 1).unwrap();
        let r4 = RingConfig::new(2, 2).unwrap();
        let q8 = catalog("quaternion8", &params(&[])).unwrap();
        let ext = make_extension(&q8, r2).unwrap();
        assert_eq!((ext.d(), ext.kernel.order()), (2, 2));
        let ab = catalog("abelian_product", &params(&[("orders", "2:4")])).unwrap();
        assert!(matches!(make_extension(&ab, r4), Err(Error::QuotientNotFree { .. })));
        let z4sq = catalog("abelian_product", &params(&[("orders", "4:4")])).unwrap();
        let ext = make_extension(&z4sq, r4).unwrap();
        assert_eq!((ext.d(), ext.kernel.order(), ext.quotient.order()), (2, 1, 16));
    }

    #[test]
    fn extension_section_and_normality() {
        let r2 = RingConfig::new(2, 1).unwrap();
        for name in ["quaternion8", "dihedral8", "wreath_z4_z2", "free_class2"] {
            let g = catalog(name, &params(&[])).unwrap();
            let ext = make_extension(&g, r2).unwrap();
            assert_eq!(ext.section[0], 0);
            for x in ext.quotient.elements() {
                assert_eq!(ext.projection[ext.section[x]], x);
            }
            assert!(ext.kernel.is_normal(&g));
            for &h in ext.kernel.elements() {
                assert_eq!(ext.projection[h], 0);
            }
        }
    }

    #[test]
    fn catalog_orders() {
        let p = CatalogParams::new();
        assert_eq!(catalog("quaternion8", &p).unwrap().order(), 8);
        assert_eq!(catalog("heisenberg", &params(&[("ell", "3")])).unwrap().order(), 27);
        assert_eq!(catalog("wreath_z4_z2", &p).unwrap().order(), 32);
        assert_eq!(catalog("free_class2", &params(&[("d", "2")])).unwrap().order(), 32);
        assert_eq!(catalog("unitriangular3", &params(&[("n", "2")])).unwrap().order(), 64);
        assert_eq!(catalog("cyclic", &params(&[("k", "1")])).unwrap().order(), 2);
        assert!(matches!(catalog("mathieu24", &p), Err(Error::UnknownCatalogEntry(_))));
    }

    #[test]
    fn wreath_extension_shape() {
        let r2 = RingConfig::new(2, 1).unwrap();
        let g = catalog("wreath_z4_z2", &CatalogParams::new()).unwrap();
        let ext = make_extension(&g, r2).unwrap();
        assert_eq!(ext.kernel.order(), 8);
        assert_eq!(ext.quotient.order(), 4);
        let mut orders = ext.hab.orders();
        orders.sort();
        assert_eq!(orders, vec![2, 4]);
    }

    #[test]
    fn group_spec_json() {
        let spec = GroupSpec::parse(r#"{"catalog": "quaternion8"}"#).unwrap();
        assert_eq!(spec.build(2).unwrap().order(), 8);
        let spec = GroupSpec::parse(r#"{"cayley": [[0,1],[1,0]], "generators": [1]}"#).unwrap();
        assert_eq!(spec.build(2).unwrap().order(), 2);
        let spec = GroupSpec::parse(
            r#"{"class2": {"d": 2, "ell": 3, "n": 1, "central_orders": [3], "commutators": [[0, 1, [1]]]}}"#,
        )
        .unwrap();
        assert_eq!(spec.build(3).unwrap().order(), 27);
        assert!(GroupSpec::parse("{\"nope\": 1}").is_err());
    }
}
