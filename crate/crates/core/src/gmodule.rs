//! Modules over `Λ = Z/l^n[G]` for a finite abelian `G`.
//!
//! A module is `∏ Z/l^e_k` written as `R^r / Rel` with `Rel = span{l^e_k e_k}`.
//! Elements are row vectors; `g` acts by `x ↦ x * A_g`, so `A_{gh} = A_h A_g`.
//! Submodules are `HowellBasis` values in `R^r` that contain `Rel`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fingroup::{ExtensionData, FinGroup};
use crate::zmodlin::{
    preimage, quotient_presentation, HowellBasis, QuotientPresentation, RingConfig, Subquotient, ZMat,
};

/// Enumeration cap for exhaustive checks over module elements.
pub const ENUMERATION_LIMIT: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GModule {
    ring: RingConfig,
    exponents: Vec<u32>,
    group: Arc<FinGroup>,
    action: Vec<ZMat>,
}

impl GModule {
    /// Builds the action of every element from matrices for the group's
    /// generators, checking the relations of the Cayley graph.
    pub fn new(ring: RingConfig, exponents: Vec<u32>, group: Arc<FinGroup>, generator_action: &[ZMat]) -> Result<GModule> {
        let r = exponents.len();
        if let Some(&e) = exponents.iter().find(|&&e| e == 0 || e > ring.n()) {
            return Err(Error::InvalidModule(format!("cyclic exponent {e} outside 1..={}", ring.n())));
        }
        if generator_action.len() != group.generators().len() {
            return Err(Error::InvalidModule(format!(
                "{} action matrices for {} generators",
                generator_action.len(),
                group.generators().len()
            )));
        }
        let shell = GModule { ring, exponents, group: group.clone(), action: vec![] };
        let mut gens = vec![];
        for a in generator_action {
            if a.rows() != r || a.cols() != r || a.ring() != ring {
                return Err(Error::InvalidModule("action matrix has the wrong shape".into()));
            }
            let a = shell.normalize(a);
            for i in 0..r {
                for j in 0..r {
                    if !ring.mul(ring.ell_pow(shell.exponents[i]), a.get(i, j)).is_multiple_of(ring.ell_pow(shell.exponents[j])) {
                        return Err(Error::InvalidModule(format!("action does not preserve relations at ({i}, {j})")));
                    }
                }
            }
            gens.push(a);
        }
        let mut action: Vec<Option<ZMat>> = vec![None; group.order()];
        action[0] = Some(ZMat::identity(r, ring));
        for g in group.elements() {
            let ag = action[g].clone().expect("canonical order reaches parents first");
            for (s, a_s) in group.generators().iter().zip(&gens) {
                let h = group.mul(g, *s);
                let candidate = shell.normalize(&a_s.mul(&ag)?);
                match &action[h] {
                    None => action[h] = Some(candidate),
                    Some(existing) if *existing == candidate => {}
                    Some(_) => {
                        return Err(Error::InvalidModule(format!(
                            "action is not a homomorphism (element {g}, generator {s})"
                        )))
                    }
                }
            }
        }
        let action = action.into_iter().map(|a| a.expect("generators generate")).collect();
        Ok(GModule { action, ..shell })
    }

    pub fn trivial(ring: RingConfig, exponents: Vec<u32>, group: Arc<FinGroup>) -> Result<GModule> {
        let ids = vec![ZMat::identity(exponents.len(), ring); group.generators().len()];
        GModule::new(ring, exponents, group, &ids)
    }

    pub fn ring(&self) -> RingConfig {
        self.ring
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn orders(&self) -> Vec<u64> {
        self.ring.orders_of(&self.exponents)
    }

    pub fn rank(&self) -> usize {
        self.exponents.len()
    }

    pub fn log_order(&self) -> u32 {
        self.exponents.iter().sum()
    }

    pub fn group(&self) -> &Arc<FinGroup> {
        &self.group
    }

    pub fn action(&self, g: usize) -> &ZMat {
        &self.action[g]
    }

    pub fn generator_action(&self) -> Vec<ZMat> {
        self.group.generators().iter().map(|&s| self.action[s].clone()).collect()
    }

    /// Reduces coordinate `k` modulo `l^e_k`.
    pub fn reduce(&self, x: &[u64]) -> Vec<u64> {
        x.iter().zip(&self.exponents).map(|(&a, &e)| a % self.ring.ell_pow(e)).collect()
    }

    fn normalize(&self, a: &ZMat) -> ZMat {
        let mut out = a.clone();
        for i in 0..a.rows() {
            for (j, &e) in self.exponents.iter().enumerate() {
                out.set(i, j, a.get(i, j) % self.ring.ell_pow(e));
            }
        }
        out
    }

    pub fn act(&self, g: usize, x: &[u64]) -> Vec<u64> {
        self.reduce(&self.action[g].apply(x))
    }

    pub fn add(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        self.reduce(&x.iter().zip(y).map(|(&a, &b)| self.ring.add(a, b)).collect::<Vec<_>>())
    }

    pub fn sub(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        self.reduce(&x.iter().zip(y).map(|(&a, &b)| self.ring.sub(a, b)).collect::<Vec<_>>())
    }

    pub fn neg(&self, x: &[u64]) -> Vec<u64> {
        self.reduce(&x.iter().map(|&a| self.ring.neg(a)).collect::<Vec<_>>())
    }

    pub fn scale(&self, c: u64, x: &[u64]) -> Vec<u64> {
        self.reduce(&x.iter().map(|&a| self.ring.mul(c, a)).collect::<Vec<_>>())
    }

    pub fn zero(&self) -> Vec<u64> {
        vec![0; self.rank()]
    }

    pub fn is_zero(&self, x: &[u64]) -> bool {
        self.reduce(x).iter().all(|&a| a == 0)
    }

    /// Matrix of a group ring element `Σ η_g g` given in group coordinates.
    pub fn ring_element_matrix(&self, eta: &[u64]) -> ZMat {
        let mut out = ZMat::zeros(self.rank(), self.rank(), self.ring);
        for (g, &c) in eta.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for i in 0..self.rank() {
                for j in 0..self.rank() {
                    out.set(i, j, self.ring.add(out.get(i, j), self.ring.mul(c, self.action[g].get(i, j))));
                }
            }
        }
        self.normalize(&out)
    }

    pub fn act_ring(&self, eta: &[u64], x: &[u64]) -> Vec<u64> {
        let mut out = self.zero();
        for (g, &c) in eta.iter().enumerate() {
            if c != 0 {
                out = self.add(&out, &self.scale(c, &self.act(g, x)));
            }
        }
        out
    }

    /// `Rel = span{l^e_k e_k}`, the zero submodule.
    pub fn relations(&self) -> HowellBasis {
        let r = self.rank();
        let rows: Vec<Vec<u64>> = (0..r)
            .filter(|&k| self.exponents[k] < self.ring.n())
            .map(|k| {
                let mut v = vec![0; r];
                v[k] = self.ring.ell_pow(self.exponents[k]);
                v
            })
            .collect();
        HowellBasis::from_vectors(&rows, r, self.ring).expect("shapes agree")
    }

    pub fn full(&self) -> HowellBasis {
        HowellBasis::full(self.rank(), self.ring)
    }

    /// `{x : x * a_i ∈ target}` for every `i`, with `target` a submodule.
    fn common_preimage(&self, maps: &[ZMat], target: &HowellBasis) -> Result<HowellBasis> {
        let r = self.rank();
        if maps.is_empty() {
            return Ok(self.full());
        }
        let mut stacked = maps[0].clone();
        for a in &maps[1..] {
            stacked = stacked.hcat(a);
        }
        let mut rows = vec![];
        for c in 0..maps.len() {
            for row in target.rows() {
                let mut v = vec![0; r * maps.len()];
                v[c * r..(c + 1) * r].copy_from_slice(row);
                rows.push(v);
            }
        }
        let target = HowellBasis::from_vectors(&rows, r * maps.len(), self.ring)?;
        let pre = preimage(&stacked, &target)?;
        Ok(pre.join(&self.relations()))
    }

    fn minus_identity(&self, g: usize) -> ZMat {
        self.normalize(&self.action[g].sub(&ZMat::identity(self.rank(), self.ring)))
    }

    /// `M^G`.
    pub fn invariants(&self) -> Result<HowellBasis> {
        self.invariants_modulo(&self.relations())
    }

    /// Preimage of `(M/sub)^G`.
    pub fn invariants_modulo(&self, sub: &HowellBasis) -> Result<HowellBasis> {
        let maps: Vec<ZMat> = self.group.generators().iter().map(|&s| self.minus_identity(s)).collect();
        self.common_preimage(&maps, sub)
    }

    /// `{x : η x = 0}` for all `η` in the list (group coordinates).
    pub fn annihilated_by(&self, etas: &[Vec<u64>]) -> Result<HowellBasis> {
        let maps: Vec<ZMat> = etas.iter().map(|e| self.ring_element_matrix(e)).collect();
        self.common_preimage(&maps, &self.relations())
    }

    /// Smallest submodule containing `vectors`.
    pub fn submodule_generated(&self, vectors: &[Vec<u64>]) -> Result<HowellBasis> {
        let mut rows: Vec<Vec<u64>> = self.relations().rows().to_vec();
        for v in vectors {
            for g in self.group.elements() {
                rows.push(self.act(g, v));
            }
        }
        HowellBasis::from_vectors(&rows, self.rank(), self.ring)
    }

    /// Cyclic structure of a submodule.
    pub fn structure(&self, sub: &HowellBasis) -> Result<Subquotient> {
        Subquotient::new(sub, &self.relations())
    }

    /// A submodule as a module in its own right, with the inclusion
    /// (rows: images of the new cyclic generators).
    pub fn restrict_to(&self, sub: &HowellBasis) -> Result<(GModule, ZMat)> {
        let sq = self.structure(sub)?;
        let k = sq.rank();
        let mut mats = vec![];
        for &s in self.group.generators() {
            let mut a = ZMat::zeros(k, k, self.ring);
            for (i, gen) in sq.generators.iter().enumerate() {
                let image = self.act(s, gen);
                let c = sq.coordinates(&image)?.ok_or_else(|| Error::InvalidModule("subset is not a submodule".into()))?;
                for (j, &x) in c.iter().enumerate() {
                    a.set(i, j, x);
                }
            }
            mats.push(a);
        }
        let module = GModule::new(self.ring, sq.exponents.clone(), self.group.clone(), &mats)?;
        let inclusion = ZMat::from_rows(&sq.generators, self.rank(), self.ring)?;
        Ok((module, inclusion))
    }

    /// `M^∨ = Hom(M, R)` with `(σf)(x) = f(σ^-1 x)`; the basis functional
    /// `f_k` sends `x` to `l^(n-e_k) x_k`.
    pub fn dual(&self) -> Result<GModule> {
        let r = self.rank();
        let mut mats = vec![];
        for &s in self.group.generators() {
            let a = &self.action[self.group.inv(s)];
            let mut b = ZMat::zeros(r, r, self.ring);
            for k in 0..r {
                for j in 0..r {
                    let (ej, ek) = (self.exponents[j], self.exponents[k]);
                    let x = a.get(j, k);
                    let v = if ej >= ek {
                        self.ring.mul(x, self.ring.ell_pow(ej - ek))
                    } else {
                        x / self.ring.ell_pow(ek - ej)
                    };
                    b.set(k, j, v);
                }
            }
            mats.push(b);
        }
        GModule::new(self.ring, self.exponents.clone(), self.group.clone(), &mats)
    }

    /// Evaluation `f(x)` for `f` in dual coordinates.
    pub fn pairing(&self, f: &[u64], x: &[u64]) -> u64 {
        let ring = self.ring;
        f.iter()
            .zip(x)
            .zip(&self.exponents)
            .fold(0, |acc, ((&a, &b), &e)| ring.add(acc, ring.mul(ring.mul(a, b), ring.ell_pow(ring.n() - e))))
    }

    /// Coordinates in `M^∨` of the functional with the given values on the
    /// basis of `M`.
    pub fn dual_coordinates(&self, values: &[u64]) -> Result<Vec<u64>> {
        let ring = self.ring;
        values
            .iter()
            .zip(&self.exponents)
            .map(|(&v, &e)| {
                let p = ring.ell_pow(ring.n() - e);
                if !ring.reduce(v).is_multiple_of(p) {
                    return Err(Error::InvalidModule(format!("value {v} is not killed by l^{e}")));
                }
                Ok((ring.reduce(v) / p) % ring.ell_pow(e))
            })
            .collect()
    }

    /// All elements in lexicographic order.
    pub fn elements(&self) -> Result<Vec<Vec<u64>>> {
        if self.log_order() as f64 * (self.ring.ell() as f64).log2() > (ENUMERATION_LIMIT as f64).log2() {
            return Err(Error::SizeBound(format!("module of order {}^{}", self.ring.ell(), self.log_order())));
        }
        Ok(enumerate_box(&self.orders()))
    }
}

/// All vectors `v` with `v_k < orders[k]`, last coordinate fastest.
pub fn enumerate_box(orders: &[u64]) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for &o in orders {
        out = out
            .into_iter()
            .flat_map(|v: Vec<u64>| {
                (0..o).map(move |a| {
                    let mut w = v.clone();
                    w.push(a);
                    w
                })
            })
            .collect();
    }
    out
}

/// `Hom(M, N)` with coordinates `c_ij`, where the matrix entry is
/// `F[i][j] = c_ij l^max(0, b_j - a_i)` and `c_ij` has order `l^min(a_i, b_j)`.
#[derive(Debug, Clone)]
pub struct HomModule {
    pub module: GModule,
    source: GModule,
    target: GModule,
}

impl HomModule {
    fn shift(&self, i: usize, j: usize) -> u32 {
        self.target.exponents[j].saturating_sub(self.source.exponents[i])
    }

    pub fn source(&self) -> &GModule {
        &self.source
    }

    pub fn target(&self) -> &GModule {
        &self.target
    }

    pub fn to_matrix(&self, c: &[u64]) -> ZMat {
        let (rm, rn) = (self.source.rank(), self.target.rank());
        let ring = self.module.ring;
        let mut f = ZMat::zeros(rm, rn, ring);
        for i in 0..rm {
            for j in 0..rn {
                f.set(i, j, ring.mul(c[i * rn + j], ring.ell_pow(self.shift(i, j))) % ring.ell_pow(self.target.exponents[j]));
            }
        }
        f
    }

    /// Coordinates of a matrix, which must describe a well-defined map.
    pub fn from_matrix(&self, f: &ZMat) -> Result<Vec<u64>> {
        let (rm, rn) = (self.source.rank(), self.target.rank());
        if f.rows() != rm || f.cols() != rn {
            return Err(Error::DimensionMismatch(format!("expected a {rm}x{rn} matrix")));
        }
        let ring = self.module.ring;
        let mut c = vec![0; rm * rn];
        for i in 0..rm {
            for j in 0..rn {
                let x = f.get(i, j) % ring.ell_pow(self.target.exponents[j]);
                let p = ring.ell_pow(self.shift(i, j));
                if !x.is_multiple_of(p) {
                    return Err(Error::InvalidModule(format!("entry ({i}, {j}) does not define a map")));
                }
                c[i * rn + j] = (x / p) % ring.ell_pow(self.module.exponents[i * rn + j]);
            }
        }
        Ok(c)
    }

    /// `F(x)` for `F` in Hom coordinates.
    pub fn apply(&self, c: &[u64], x: &[u64]) -> Vec<u64> {
        self.target.reduce(&self.to_matrix(c).apply(x))
    }

    /// `Hom_G(M, N)`.
    pub fn equivariant(&self) -> Result<HowellBasis> {
        self.module.invariants()
    }
}

/// `Hom(M, N)` with `(σF)(x) = σ F(σ^-1 x)`.
pub fn hom_module(m: &GModule, n: &GModule) -> Result<HomModule> {
    if m.ring != n.ring || m.group.order() != n.group.order() {
        return Err(Error::InvalidModule("modules over different rings or groups".into()));
    }
    let (rm, rn) = (m.rank(), n.rank());
    let ring = m.ring;
    let exponents: Vec<u32> = (0..rm * rn).map(|k| m.exponents[k / rn].min(n.exponents[k % rn])).collect();
    let shell = HomModule {
        module: GModule::trivial(ring, exponents.clone(), m.group.clone())?,
        source: m.clone(),
        target: n.clone(),
    };
    let mut mats = vec![];
    for &s in m.group.generators() {
        let left = &m.action[m.group.inv(s)];
        let right = &n.action[s];
        let mut a = ZMat::zeros(rm * rn, rm * rn, ring);
        for k in 0..rm * rn {
            let mut unit = vec![0; rm * rn];
            unit[k] = 1;
            let f = left.mul(&shell.to_matrix(&unit))?.mul(right)?;
            for (j, x) in shell.from_matrix(&f)?.into_iter().enumerate() {
                a.set(k, j, x);
            }
        }
        mats.push(a);
    }
    let module = GModule::new(ring, exponents, m.group.clone(), &mats)?;
    Ok(HomModule { module, ..shell })
}

/// `Hom_G(M, N)` inside the coordinates of `hom_module(M, N)`.
pub fn hom_g(m: &GModule, n: &GModule) -> Result<HowellBasis> {
    hom_module(m, n)?.equivariant()
}

pub fn dual(m: &GModule) -> Result<GModule> {
    m.dual()
}

pub fn invariants(m: &GModule) -> Result<HowellBasis> {
    m.invariants()
}

/// `R[G]` for `G` abelian and free over `R`, in the basis of group elements.
#[derive(Debug, Clone)]
pub struct GroupRing {
    group: Arc<FinGroup>,
    ring: RingConfig,
}

impl GroupRing {
    pub fn new(group: Arc<FinGroup>, ring: RingConfig) -> Result<GroupRing> {
        if !group.is_abelian() {
            return Err(Error::NotFreeModule("group is not abelian".into()));
        }
        let dec = crate::fingroup::AbelianDecomposition::of_abelian(&group)?;
        if group.ell() != ring.ell() || dec.exponents.iter().any(|&e| e != ring.n()) {
            return Err(Error::NotFreeModule(format!(
                "group with invariant factors {:?} over Z/{}",
                dec.orders(),
                ring.modulus()
            )));
        }
        Ok(GroupRing { group, ring })
    }

    pub fn group(&self) -> &Arc<FinGroup> {
        &self.group
    }

    pub fn ring(&self) -> RingConfig {
        self.ring
    }

    pub fn rank(&self) -> usize {
        self.group.order()
    }

    pub fn one(&self) -> Vec<u64> {
        self.element(0)
    }

    pub fn element(&self, g: usize) -> Vec<u64> {
        let mut v = vec![0; self.rank()];
        v[g] = 1;
        v
    }

    /// `g - 1`.
    pub fn augmentation_generator(&self, g: usize) -> Vec<u64> {
        let mut v = self.element(g);
        v[0] = self.ring.sub(v[0], 1);
        v
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let mut out = vec![0; self.rank()];
        for (g, &x) in a.iter().enumerate().filter(|e| *e.1 != 0) {
            for (h, &y) in b.iter().enumerate().filter(|e| *e.1 != 0) {
                let k = self.group.mul(g, h);
                out[k] = self.ring.add(out[k], self.ring.mul(x, y));
            }
        }
        out
    }

    pub fn augmentation(&self, a: &[u64]) -> u64 {
        a.iter().fold(0, |acc, &x| self.ring.add(acc, x))
    }

    /// `Λ` as a module over itself.
    pub fn regular_module(&self) -> Result<GModule> {
        let k = self.rank();
        let mats: Vec<ZMat> = self
            .group
            .generators()
            .iter()
            .map(|&s| {
                let mut a = ZMat::zeros(k, k, self.ring);
                for g in 0..k {
                    a.set(g, self.group.mul(s, g), 1);
                }
                a
            })
            .collect();
        GModule::new(self.ring, vec![self.ring.n(); k], self.group.clone(), &mats)
    }

    /// `(σ - 1) v` for `v` in augmentation coordinates (`v = Σ v_g (g - 1)`).
    fn times_sigma_minus_one(&self, sigma: usize, v: &[u64]) -> Vec<u64> {
        let ring = self.ring;
        let mut out = vec![0; v.len()];
        let bump = |g: usize, x: u64, out: &mut Vec<u64>| {
            if g != 0 {
                out[g - 1] = ring.add(out[g - 1], x);
            }
        };
        for (i, &x) in v.iter().enumerate().filter(|e| *e.1 != 0) {
            let g = i + 1;
            // (σ-1)(g-1) = (σg-1) - (σ-1) - (g-1)
            bump(self.group.mul(sigma, g), x, &mut out);
            bump(sigma, ring.neg(x), &mut out);
            bump(g, ring.neg(x), &mut out);
        }
        out
    }

    /// `I^m` for `m ≥ 1`.
    pub fn ideal_power(&self, m: usize) -> Result<IdealPower> {
        if m == 0 {
            return Err(Error::DimensionMismatch("ideal powers start at m = 1".into()));
        }
        let k = self.rank() - 1;
        let mut aug = HowellBasis::full(k, self.ring);
        for _ in 1..m {
            if aug.is_zero() {
                break;
            }
            let mut rows = vec![];
            for sigma in 1..self.rank() {
                for v in aug.rows() {
                    rows.push(self.times_sigma_minus_one(sigma, v));
                }
            }
            aug = HowellBasis::from_vectors(&rows, k, self.ring)?;
        }
        let basis_rows: Vec<Vec<u64>> = aug.rows().iter().map(|v| self.from_augmentation_coords(v)).collect();
        Ok(IdealPower { m, basis: HowellBasis::from_vectors(&basis_rows, self.rank(), self.ring)?, augmentation_basis: aug })
    }

    /// Group coordinates of `Σ v_g (g - 1)`.
    pub fn from_augmentation_coords(&self, v: &[u64]) -> Vec<u64> {
        let mut out = vec![0; self.rank()];
        for (i, &x) in v.iter().enumerate() {
            out[i + 1] = x;
            out[0] = self.ring.sub(out[0], x);
        }
        out
    }

    /// Augmentation coordinates of an element of `I`.
    pub fn to_augmentation_coords(&self, eta: &[u64]) -> Vec<u64> {
        debug_assert_eq!(self.augmentation(eta), 0);
        eta[1..].to_vec()
    }

    /// `Λ_m` and `I_m`.
    pub fn truncation(&self, m: usize) -> Result<Truncation> {
        let ideal = self.ideal_power(m)?;
        let k = self.rank() - 1;
        let presentation = quotient_presentation(&ideal.augmentation_basis, k)?;
        let q = presentation.len();
        let ring = self.ring;
        let mut i_mats = vec![];
        let mut l_mats = vec![];
        for &s in self.group.generators() {
            let mut a = ZMat::zeros(q, q, ring);
            for (row, lifted) in presentation.section.row_vecs().iter().enumerate() {
                // σ η = η + (σ - 1) η
                let moved: Vec<u64> = lifted
                    .iter()
                    .zip(self.times_sigma_minus_one(s, lifted))
                    .map(|(&x, y)| ring.add(x, y))
                    .collect();
                for (j, x) in presentation.project(&moved).into_iter().enumerate() {
                    a.set(row, j, x);
                }
            }
            let mut l = ZMat::zeros(q + 1, q + 1, ring);
            l.set(0, 0, 1);
            let mut unit = vec![0; k];
            if s != 0 {
                unit[s - 1] = 1;
            }
            for (j, x) in presentation.project(&unit).into_iter().enumerate() {
                l.set(0, j + 1, x);
            }
            for i in 0..q {
                for j in 0..q {
                    l.set(i + 1, j + 1, a.get(i, j));
                }
            }
            i_mats.push(a);
            l_mats.push(l);
        }
        let i_m = GModule::new(ring, presentation.exponents.clone(), self.group.clone(), &i_mats)?;
        let mut l_exps = vec![ring.n()];
        l_exps.extend(&presentation.exponents);
        let lambda_m = GModule::new(ring, l_exps, self.group.clone(), &l_mats)?;
        Ok(Truncation { m, group_ring: self.clone(), ideal, presentation, i_m, lambda_m })
    }
}

/// `I^m ⊆ Λ`.
#[derive(Debug, Clone)]
pub struct IdealPower {
    pub m: usize,
    /// In group coordinates, inside `R^|G|`.
    pub basis: HowellBasis,
    /// In augmentation coordinates, inside `R^(|G|-1)`.
    pub augmentation_basis: HowellBasis,
}

impl IdealPower {
    pub fn is_zero(&self) -> bool {
        self.basis.is_zero()
    }
}

pub fn group_ring(group: Arc<FinGroup>, ring: RingConfig) -> Result<GroupRing> {
    GroupRing::new(group, ring)
}

pub fn ideal_power(gr: &GroupRing, m: usize) -> Result<IdealPower> {
    gr.ideal_power(m)
}

/// `Λ_m = Λ/I^m = R·1 ⊕ I_m` and `I_m = I/I^m`.
///
/// The canonical basis of `I_m` is the cyclic basis of the quotient
/// presentation; `Λ_m` has coordinate 0 for `1` followed by those of `I_m`.
#[derive(Debug, Clone)]
pub struct Truncation {
    pub m: usize,
    pub group_ring: GroupRing,
    pub ideal: IdealPower,
    pub presentation: QuotientPresentation,
    pub i_m: GModule,
    pub lambda_m: GModule,
}

impl Truncation {
    /// `I_m` coordinates of `η ∈ I` given in group coordinates.
    pub fn project_ideal(&self, eta: &[u64]) -> Vec<u64> {
        self.presentation.project(&self.group_ring.to_augmentation_coords(eta))
    }

    /// A representative in `I` (group coordinates) of an `I_m` element.
    pub fn lift_ideal(&self, y: &[u64]) -> Vec<u64> {
        self.group_ring.from_augmentation_coords(&self.presentation.lift(y))
    }

    /// `Λ_m` coordinates of `λ ∈ Λ`.
    pub fn project_lambda(&self, lambda: &[u64]) -> Vec<u64> {
        let gr = &self.group_ring;
        let e = gr.augmentation(lambda);
        let mut eta = lambda.to_vec();
        eta[0] = gr.ring.sub(eta[0], e);
        let mut out = vec![e];
        out.extend(self.project_ideal(&eta));
        out
    }

    /// Image of `g - 1` in `I_m`.
    pub fn rho(&self, g: usize) -> Vec<u64> {
        self.project_ideal(&self.group_ring.augmentation_generator(g))
    }

    /// Matrix (rows: `I_m` basis) of `η ↦ η γ` into a module over the same group.
    pub fn multiplication_map(&self, module: &GModule, gamma: &[u64]) -> Result<ZMat> {
        let rows: Vec<Vec<u64>> = (0..self.i_m.rank())
            .map(|k| {
                let mut unit = vec![0; self.i_m.rank()];
                unit[k] = 1;
                module.act_ring(&self.lift_ideal(&unit), gamma)
            })
            .collect();
        ZMat::from_rows(&rows, module.rank(), module.ring())
    }
}

pub fn lambda_m(gr: &GroupRing, m: usize) -> Result<Truncation> {
    gr.truncation(m)
}

/// `H^ab ⊗ Z/l^n` with the conjugation action of `G`.
pub fn hab_mod_ln(ext: &ExtensionData) -> Result<GModule> {
    let ring = ext.ring;
    let keep: Vec<usize> = (0..ext.hab.rank()).collect();
    let exponents: Vec<u32> = keep.iter().map(|&k| ext.hab.exponents[k].min(ring.n())).collect();
    let r = exponents.len();
    let mut mats = vec![];
    for &s in ext.quotient.generators() {
        let mut a = ZMat::zeros(r, r, ring);
        for j in 0..r {
            let mut unit = vec![0; r];
            unit[j] = 1;
            let image = ext.conjugate_hab(s, &unit);
            for (k, &x) in image.iter().enumerate() {
                a.set(j, k, x % ring.ell_pow(exponents[k]));
            }
        }
        mats.push(a);
    }
    GModule::new(ring, exponents, ext.quotient.clone(), &mats)
}

/// `J = H^1(H, Z/l^n) = Hom(H^ab, Z/l^n)` as a `G`-module.
pub fn module_j(ext: &ExtensionData) -> Result<GModule> {
    hab_mod_ln(ext)?.dual()
}

/// `J_1 ⊆ J_2 ⊆ …` with `J_m = {γ : I^m γ = 0}`.
#[derive(Debug, Clone)]
pub struct SocleChain {
    pub module: GModule,
    pub steps: Vec<HowellBasis>,
    /// Number of cyclic factors of each step.
    pub ranks: Vec<usize>,
    /// First `m` with `J_m = J`.
    pub stabilization: usize,
}

impl SocleChain {
    /// `J_m`; levels past stabilization are all of `J`.
    pub fn level(&self, m: usize) -> &HowellBasis {
        &self.steps[m.clamp(1, self.steps.len()) - 1]
    }
}

pub fn socle_level(j: &GModule, gr: &GroupRing, m: usize) -> Result<HowellBasis> {
    j.annihilated_by(gr.ideal_power(m)?.basis.rows())
}

pub fn socle_series(j: &GModule, gr: &GroupRing) -> Result<SocleChain> {
    let full = j.full();
    let mut steps = vec![];
    let mut m = 1;
    loop {
        let step = socle_level(j, gr, m)?;
        let done = step.contains_all(&full)?;
        steps.push(step);
        if done {
            break;
        }
        m += 1;
    }
    let ranks = steps.iter().map(|s| j.structure(s).map(|sq| sq.rank())).collect::<Result<_>>()?;
    Ok(SocleChain { module: j.clone(), stabilization: steps.len(), steps, ranks })
}

/// The comparison `Hom_G(Λ_m, J) ≅ J_m` (via `f ↦ f(1)`) and its
/// restriction to `Hom_G(I_m, J)`.
#[derive(Debug, Clone)]
pub struct JmComparison {
    pub m: usize,
    pub hom_lambda: HomModule,
    pub hom_lambda_g: HowellBasis,
    pub hom_i: HomModule,
    pub hom_i_g: HowellBasis,
    pub j_m: HowellBasis,
    /// `Hom(Λ_m, J)` coordinates to `J` coordinates.
    pub evaluation: ZMat,
    pub checked: usize,
    pub violations: usize,
}

impl JmComparison {
    pub fn commutes(&self) -> bool {
        self.violations == 0
    }
}

/// Checks that every equivariant `f: Λ_m → J` has `f(1) ∈ J_m` and restricts
/// to `φ_f(1)` on `I_m`, and that the two sides have the same size.
pub fn jm_via_invariant_homs(ext: &ExtensionData, m: usize) -> Result<JmComparison> {
    let j = module_j(ext)?;
    let gr = GroupRing::new(ext.quotient.clone(), ext.ring)?;
    let tr = gr.truncation(m)?;
    let j_m = socle_level(&j, &gr, m)?;
    let hom_lambda = hom_module(&tr.lambda_m, &j)?;
    let hom_lambda_g = hom_lambda.equivariant()?;
    let hom_i = hom_module(&tr.i_m, &j)?;
    let hom_i_g = hom_i.equivariant()?;
    let r = j.rank();
    let mut evaluation = ZMat::zeros(hom_lambda.module.rank(), r, j.ring());
    for c in 0..r {
        evaluation.set(c, c, 1);
    }
    let sq = hom_lambda.module.structure(&hom_lambda_g)?;
    let jm_order = j.structure(&j_m)?.log_order();
    let mut violations = usize::from(sq.log_order() != jm_order);
    let mut checked = 0;
    for f in sq.enumerate() {
        let f = hom_lambda.module.reduce(&f);
        let matrix = hom_lambda.to_matrix(&f);
        let gamma = j.reduce(matrix.row(0));
        let restricted = ZMat::from_rows(&matrix.row_vecs()[1..], r, j.ring())?;
        let phi = tr.multiplication_map(&j, &gamma)?;
        let same = (0..phi.rows()).all(|k| j.reduce(phi.row(k)) == j.reduce(restricted.row(k)));
        let in_hom_i = hom_i_g.contains(&hom_i.from_matrix(&restricted)?)?;
        if !j_m.contains(&gamma)? || !same || !in_hom_i {
            violations += 1;
        }
        checked += 1;
    }
    Ok(JmComparison { m, hom_lambda, hom_lambda_g, hom_i, hom_i_g, j_m, evaluation, checked, violations })
}
