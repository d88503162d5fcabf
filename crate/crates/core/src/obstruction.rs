//! The obstruction `Ψ = δ ∘ d_2` on `Hom_G(I_m, J)`, its three
//! computations, the quotient `𝒢_φ`, and the theorem verifier.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cohomology::{
    connecting, cup, d2_on_e01, extension_cocycle, h1_basis, inflation_h2_surjective, is_cocycle, CoboundarySolver,
    Coefficients, Cochain, ExtensionCocycle, InflationReport, Pairing, ShortExactSequence,
};
use crate::error::{Error, Result};
use crate::fingroup::{quotient, ExtensionData, FinGroup, Subgroup};
use crate::gmodule::{hom_module, module_j, socle_series, GModule, GroupRing, HomModule, SocleChain, Truncation};
use crate::zmodlin::{solve_modulo, HowellBasis, RingConfig, Subquotient, ZMat};

/// Default cap on `|Hom_G(I_m, J)|` for exhaustive verification.
pub const DEFAULT_MAX_MAPS: u64 = 4096;

/// Default cap on `|J_m|` for exhaustive enumeration of `γ`.
pub const DEFAULT_MAX_GAMMAS: u64 = 256;

/// Everything needed to evaluate `Ψ` for one extension and level `m`.
#[derive(Debug, Clone)]
pub struct Context {
    pub ext: ExtensionData,
    pub m: usize,
    pub truncation: Truncation,
    pub j: GModule,
    pub socle: SocleChain,
    pub hom: HomModule,
    pub hom_g: HowellBasis,
    pub alpha: ExtensionCocycle,
    /// `I_m^∨`.
    pub i_dual: GModule,
    /// `0 -> Z/l^n -> Λ_m^∨ -> I_m^∨ -> 0` with `f̃(1) = 0`.
    pub ses: ShortExactSequence,
    h3: CoboundarySolver,
    h2_dual: CoboundarySolver,
}

impl Context {
    pub fn new(ext: ExtensionData, m: usize) -> Result<Context> {
        if m == 0 {
            return Err(Error::WrongLevel(m));
        }
        let ring = ext.ring;
        let gr = GroupRing::new(ext.quotient.clone(), ring)?;
        let truncation = gr.truncation(m)?;
        let j = module_j(&ext)?;
        let socle = socle_series(&j, &gr)?;
        let hom = hom_module(&truncation.i_m, &j)?;
        let hom_g = hom.equivariant()?;
        let alpha = extension_cocycle(&ext);
        let i_dual = truncation.i_m.dual()?;
        let lambda_dual = truncation.lambda_m.dual()?;
        let q = i_dual.rank();
        let r = GModule::trivial(ring, vec![ring.n()], ext.quotient.clone())?;
        let mut inclusion = ZMat::zeros(1, q + 1, ring);
        inclusion.set(0, 0, 1);
        let mut projection = ZMat::zeros(q + 1, q, ring);
        let mut section = ZMat::zeros(q, q + 1, ring);
        for k in 0..q {
            projection.set(k + 1, k, 1);
            section.set(k, k + 1, 1);
        }
        let ses = ShortExactSequence { sub: r.clone(), mid: lambda_dual, quot: i_dual.clone(), inclusion, projection, section };
        let h3 = CoboundarySolver::new(Coefficients::direct(r), 3)?;
        let h2_dual = CoboundarySolver::new(Coefficients::direct(i_dual.clone()), 2)?;
        Ok(Context { ext, m, truncation, j, socle, hom, hom_g, alpha, i_dual, ses, h3, h2_dual })
    }

    pub fn j_level(&self, m: usize) -> &HowellBasis {
        self.socle.level(m)
    }

    /// `J_m` as a list of cyclic generators.
    pub fn j_m(&self) -> Result<Subquotient> {
        self.j.structure(self.j_level(self.m))
    }

    pub fn hom_g_structure(&self) -> Result<Subquotient> {
        self.hom.module.structure(&self.hom_g)
    }

    /// `log_l |{φ_γ : γ ∈ J_m}| = log_l |J_m / J_1|`.
    pub fn image_log_order(&self) -> Result<u32> {
        let top = self.j.structure(self.j_level(self.m))?.log_order();
        let bottom = self.j.structure(self.j_level(1))?.log_order();
        Ok(top - bottom)
    }

    /// `H^ab` coordinates reduced into `H^ab ⊗ Z/l^n`, the coordinates `J` pairs with.
    fn hab_ln(&self, c: &[u64]) -> Vec<u64> {
        c.iter().zip(self.j.exponents()).map(|(&x, &e)| x % self.ext.ring.ell_pow(e)).collect()
    }

    /// `ψ(h)` for `ψ ∈ J` and `h` in `H^ab` coordinates.
    pub fn evaluate(&self, psi: &[u64], h: &[u64]) -> u64 {
        self.j.pairing(psi, &self.hab_ln(h))
    }

    /// Coboundary solver for `C^3(G, Z/l^n)`.
    pub fn h3_solver(&self) -> &CoboundarySolver {
        &self.h3
    }
}

/// An equivariant `φ: I_m -> J`, rows indexed by the canonical `I_m` basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhiMap {
    pub m: usize,
    pub matrix: ZMat,
}

impl PhiMap {
    pub fn new(ctx: &Context, matrix: ZMat) -> Result<PhiMap> {
        let (i_m, j) = (&ctx.truncation.i_m, &ctx.j);
        if matrix.rows() != i_m.rank() || matrix.cols() != j.rank() {
            return Err(Error::DimensionMismatch(format!(
                "phi must be {}x{}, got {}x{}",
                i_m.rank(),
                j.rank(),
                matrix.rows(),
                matrix.cols()
            )));
        }
        ctx.hom.from_matrix(&matrix)?;
        let mut reduced = ZMat::zeros(matrix.rows(), matrix.cols(), j.ring());
        for k in 0..matrix.rows() {
            for (c, x) in j.reduce(matrix.row(k)).into_iter().enumerate() {
                reduced.set(k, c, x);
            }
        }
        let phi = PhiMap { m: ctx.m, matrix: reduced };
        for &s in i_m.group().generators() {
            for k in 0..i_m.rank() {
                let eta = unit(i_m.rank(), k);
                if phi.apply(ctx, &i_m.act(s, &eta)) != j.act(s, &phi.apply(ctx, &eta)) {
                    return Err(Error::NotEquivariant { sigma: s, basis: k });
                }
            }
        }
        let below = ctx.j_level(ctx.m.saturating_sub(1).max(1));
        if ctx.m > 1 {
            for k in 0..i_m.rank() {
                if !below.contains(phi.matrix.row(k))? {
                    return Err(Error::InvalidModule(format!("phi(basis {k}) is outside J_{}", ctx.m - 1)));
                }
            }
        }
        Ok(phi)
    }

    /// `φ(y)` for `y` in `I_m` coordinates.
    pub fn apply(&self, ctx: &Context, y: &[u64]) -> Vec<u64> {
        ctx.j.reduce(&self.matrix.apply(y))
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.is_zero()
    }

    /// Rows of the matrix as plain vectors, for reports.
    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.matrix.row_vecs()
    }

    /// `x: H^ab -> I_m^∨`, `x(h)(η) = φ(η)(h)`; rows are the images of the
    /// cyclic generators of `H^ab`.
    pub fn dual_form(&self, ctx: &Context) -> Result<ZMat> {
        let r = ctx.ext.hab.rank();
        let q = ctx.truncation.i_m.rank();
        let mut x = ZMat::zeros(r, q, ctx.ext.ring);
        for j in 0..r {
            let h = unit(r, j);
            let values: Vec<u64> = (0..q).map(|k| ctx.evaluate(self.matrix.row(k), &h)).collect();
            for (k, c) in ctx.truncation.i_m.dual_coordinates(&values)?.into_iter().enumerate() {
                x.set(j, k, c);
            }
        }
        Ok(x)
    }
}

fn unit(len: usize, k: usize) -> Vec<u64> {
    let mut v = vec![0; len];
    v[k] = 1;
    v
}

/// `φ_γ: η ↦ η γ` for `γ ∈ J_m`.
pub fn phi_from_gamma(ctx: &Context, gamma: &[u64]) -> Result<PhiMap> {
    if gamma.len() != ctx.j.rank() || !ctx.j_level(ctx.m).contains(gamma)? {
        return Err(Error::GammaNotInSocleLevel { level: ctx.m });
    }
    PhiMap::new(ctx, ctx.truncation.multiplication_map(&ctx.j, gamma)?)
}

/// `Ψ(φ)` by all three routes and whether its class vanishes.
#[derive(Debug, Clone)]
pub struct ObstructionResult {
    pub psi_cocycle: Cochain,
    pub witness: Option<Cochain>,
    pub is_zero_class: bool,
    pub routes: RouteComparison,
}

#[derive(Debug, Clone)]
pub struct RouteComparison {
    pub closed_form: Cochain,
    /// Absent when `m ≠ 2`.
    pub m2_formula: Option<Cochain>,
    pub generic_equals_closed: bool,
    /// Witness for `m2 - generic`, present when they are cohomologous.
    pub m2_difference_witness: Option<Cochain>,
}

impl RouteComparison {
    pub fn all_agree(&self) -> bool {
        self.generic_equals_closed && (self.m2_formula.is_none() || self.m2_difference_witness.is_some())
    }
}

/// `d_2(φ) ∈ C^2(G, I_m^∨)`.
pub fn d2_generic(ctx: &Context, phi: &PhiMap) -> Result<Cochain> {
    d2_on_e01(&ctx.ext, &ctx.alpha, &phi.dual_form(ctx)?, &ctx.i_dual)
}

/// Route A: `δ(d_2(φ))` along the dual sequence of `Λ_m`.
pub fn psi_cocycle(ctx: &Context, phi: &PhiMap) -> Result<Cochain> {
    connecting(&ctx.ses, &d2_generic(ctx, phi)?)
}

/// Route B: `Ψ(a,b,c) = -φ(a^-1 - 1 mod I^m)(α(b,c))`.
pub fn psi_closed_form(ctx: &Context, phi: &PhiMap) -> Cochain {
    let g = ctx.ext.quotient.clone();
    let ring = ctx.ext.ring;
    let coeffs = Coefficients::trivial(g.clone(), ring);
    let gr = &ctx.truncation.group_ring;
    let images: Vec<Vec<u64>> = g
        .elements()
        .map(|a| phi.apply(ctx, &ctx.truncation.project_ideal(&gr.augmentation_generator(g.inv(a)))))
        .collect();
    Cochain::from_fn(coeffs, 3, |t| vec![ring.neg(ctx.evaluate(&images[t[0]], ctx.alpha.value(t[1], t[2])))])
}

/// Route C (`m = 2`): `Σ_i -x_i ∪ d_2(φ(ρ_i))`.
pub fn psi_m2_formula(ctx: &Context, phi: &PhiMap) -> Result<Cochain> {
    if ctx.m != 2 {
        return Err(Error::WrongLevel(ctx.m));
    }
    let ext = &ctx.ext;
    let ring = ext.ring;
    let trivial = GModule::trivial(ring, vec![ring.n()], ext.quotient.clone())?;
    let pairing = Pairing::scalar_left(&trivial)?;
    let xs = h1_basis(ext);
    let mut total = Cochain::zero(Coefficients::direct(trivial.clone()), 3);
    for (i, x) in xs.iter().enumerate() {
        let psi = phi.apply(ctx, &ctx.truncation.rho(ext.sigma[i]));
        let r = ext.hab.rank();
        let rows: Vec<Vec<u64>> = (0..r).map(|j| vec![ctx.evaluate(&psi, &unit(r, j))]).collect();
        let chi = ZMat::from_rows(&rows, 1, ring)?;
        let d2 = d2_on_e01(ext, &ctx.alpha, &chi, &trivial)?;
        let x = Cochain::from_values(d2.coeffs.clone(), 1, x.values().to_vec())?;
        total = total.sub(&cup(&x, &d2, &pairing)?)?;
    }
    Ok(total)
}

/// Route A with the zero-class test and the comparison against routes B and C.
pub fn psi_generic(ctx: &Context, phi: &PhiMap) -> Result<ObstructionResult> {
    let psi = psi_cocycle(ctx, phi)?;
    let witness = ctx.h3.witness(&psi)?;
    let closed = psi_closed_form(ctx, phi);
    let generic_equals_closed = closed.values() == psi.values();
    let (m2_formula, m2_difference_witness) = if ctx.m == 2 {
        let c = psi_m2_formula(ctx, phi)?;
        let diff = Cochain::from_values(psi.coeffs.clone(), 3, c.values().to_vec())?.sub(&psi)?;
        let w = ctx.h3.witness(&diff)?;
        (Some(c), w)
    } else {
        (None, None)
    };
    Ok(ObstructionResult {
        is_zero_class: witness.is_some(),
        psi_cocycle: psi,
        witness,
        routes: RouteComparison { closed_form: closed, m2_formula, generic_equals_closed, m2_difference_witness },
    })
}

/// Whether `Ψ(φ)` is a coboundary, by route A only.
pub fn psi_is_zero_class(ctx: &Context, phi: &PhiMap) -> Result<bool> {
    ctx.h3.is_coboundary(&psi_cocycle(ctx, phi)?)
}

/// The quotient `𝒢_φ = 𝒢/H_φ` and the classes it carries.
#[derive(Debug, Clone)]
pub struct GPhiData {
    pub h_phi: Subgroup,
    pub g_phi: Arc<FinGroup>,
    /// `𝒢 -> 𝒢_φ`.
    pub projection: Vec<usize>,
    /// `𝒢_φ -> G`.
    pub to_g: Vec<usize>,
    /// `Im φ ⊆ J`.
    pub image: HowellBasis,
    /// `|H/H_φ| = |Im φ|` and evaluation separates `H/H_φ`.
    pub kernel_iso: bool,
    /// With values in `(Im φ)^∨`.
    pub alpha_phi: Cochain,
    /// Pushforward of `α_φ` to `I_m^∨`.
    pub beta_phi: Cochain,
}

pub fn build_g_phi(ctx: &Context, phi: &PhiMap) -> Result<GPhiData> {
    let ext = &ctx.ext;
    let j = &ctx.j;
    let total = &ext.total;
    let image = j.submodule_generated(&phi.rows())?;
    let image_sq = j.structure(&image)?;
    let gens = image_sq.generators.clone();
    let h_phi_elems: Vec<usize> = ext
        .kernel
        .elements()
        .iter()
        .copied()
        .filter(|&h| gens.iter().all(|psi| ctx.evaluate(psi, ext.hab_coords(h)) == 0))
        .collect();
    let h_phi = Subgroup::generated_by(total, &h_phi_elems);
    h_phi
        .check_normal(total)
        .map_err(|(conjugator, element)| Error::NormalityFailure { conjugator, element })?;
    let (g_phi, projection) = quotient(total, &h_phi)?;
    let mut to_g = vec![usize::MAX; g_phi.order()];
    let mut lift = vec![usize::MAX; g_phi.order()];
    for x in total.elements() {
        let y = projection[x];
        if lift[y] == usize::MAX {
            lift[y] = x;
            to_g[y] = ext.projection[x];
        }
    }
    let kernel_order = ext.kernel.order() / h_phi.order();
    let image_order = ext.ring.ell().pow(image_sq.log_order()) as usize;
    let kernel_iso = kernel_order == image_order && h_phi_elems.len() == h_phi.order();
    // least-index element of each fibre of 𝒢_φ -> G
    let mut section = vec![usize::MAX; ext.quotient.order()];
    for y in g_phi.elements() {
        if section[to_g[y]] == usize::MAX {
            section[to_g[y]] = y;
        }
    }
    let q = &ext.quotient;
    let factor = |g: usize, h: usize| -> Vec<u64> {
        let y = g_phi.mul(g_phi.mul(section[g], section[h]), g_phi.inv(section[q.mul(g, h)]));
        ext.hab_coords(lift[y]).to_vec()
    };
    let (image_module, _) = j.restrict_to(&image)?;
    let image_dual = image_module.dual()?;
    let alpha_phi = {
        let coeffs = Coefficients::direct(image_dual.clone());
        let mut failure = None;
        let c = Cochain::from_fn(coeffs, 2, |t| {
            let h = factor(t[0], t[1]);
            let values: Vec<u64> = gens.iter().map(|psi| ctx.evaluate(psi, &h)).collect();
            image_module.dual_coordinates(&values).unwrap_or_else(|e| {
                failure = Some(e);
                vec![0; gens.len()]
            })
        });
        if let Some(e) = failure {
            return Err(e);
        }
        c
    };
    let i_m = &ctx.truncation.i_m;
    let beta_phi = {
        let coeffs = Coefficients::direct(ctx.i_dual.clone());
        let mut failure = None;
        let c = Cochain::from_fn(coeffs, 2, |t| {
            let h = factor(t[0], t[1]);
            let values: Vec<u64> = (0..i_m.rank()).map(|k| ctx.evaluate(phi.matrix.row(k), &h)).collect();
            i_m.dual_coordinates(&values).unwrap_or_else(|e| {
                failure = Some(e);
                vec![0; i_m.rank()]
            })
        });
        if let Some(e) = failure {
            return Err(e);
        }
        c
    };
    Ok(GPhiData { h_phi, g_phi: Arc::new(g_phi), projection, to_g, image, kernel_iso, alpha_phi, beta_phi })
}

/// `d_2(φ) = -β_φ`, computed from `𝒢_φ`.
pub fn d2_via_g_phi(ctx: &Context, phi: &PhiMap) -> Result<Cochain> {
    Ok(build_g_phi(ctx, phi)?.beta_phi.neg())
}

/// Witness that the `𝒢_φ` route and route A give the same `d_2` class.
pub fn d2_routes_witness(ctx: &Context, phi: &PhiMap) -> Result<Option<Cochain>> {
    let a = d2_generic(ctx, phi)?;
    let b = d2_via_g_phi(ctx, phi)?;
    if !is_cocycle(&b) {
        return Err(Error::NotACocycle);
    }
    ctx.h2_dual.witness(&b.sub(&a)?)
}

/// Lexicographically least `γ ∈ J_m` with `φ_γ = φ`.
pub fn image_membership(ctx: &Context, phi: &PhiMap) -> Result<Option<Vec<u64>>> {
    let j = &ctx.j;
    let r = j.rank();
    let tr = &ctx.truncation;
    let mut blocks: Vec<ZMat> = tr.ideal.basis.rows().iter().map(|eta| j.ring_element_matrix(eta)).collect();
    let mut rhs: Vec<u64> = vec![0; r * blocks.len()];
    for k in 0..tr.i_m.rank() {
        blocks.push(j.ring_element_matrix(&tr.lift_ideal(&unit(tr.i_m.rank(), k))));
        rhs.extend(phi.matrix.row(k));
    }
    if blocks.is_empty() || r == 0 {
        return Ok(Some(vec![0; r]));
    }
    let mut a = blocks[0].clone();
    for b in &blocks[1..] {
        a = a.hcat(b);
    }
    let rel = j.relations();
    let mut rows = vec![];
    for c in 0..blocks.len() {
        for row in rel.rows() {
            let mut v = vec![0; r * blocks.len()];
            v[c * r..(c + 1) * r].copy_from_slice(row);
            rows.push(v);
        }
    }
    let target = HowellBasis::from_vectors(&rows, r * blocks.len(), j.ring())?;
    Ok(solve_modulo(&a, &target, &rhs)?.map(|g| j.reduce(&g)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exhaustive,
    Sampled { seed: u64, count: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HypothesisSummary {
    pub holds: bool,
    pub h2_total_dim: u32,
    pub inflated_dim: u32,
}

impl From<&InflationReport> for HypothesisSummary {
    fn from(r: &InflationReport) -> Self {
        HypothesisSummary { holds: r.holds, h2_total_dim: r.h2_total_dim, inflated_dim: r.inflated_dim }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Direction1 {
    pub checked: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Direction2 {
    pub asserted: bool,
    pub checked: usize,
    pub passed: bool,
    pub zero_class_count: usize,
    pub image_size: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub kind: String,
    pub gamma: Option<Vec<u64>>,
    pub phi: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub group: String,
    pub ell: u64,
    pub n: u32,
    pub m: usize,
    pub d: usize,
    pub socle_ranks: Vec<usize>,
    pub hypothesis: HypothesisSummary,
    pub direction1: Direction1,
    pub direction2: Direction2,
    pub counterexamples: Vec<Counterexample>,
}

impl Report {
    /// The theorem's claims that are asserted under this report's hypothesis.
    pub fn passed(&self) -> bool {
        self.direction1.passed && (!self.direction2.asserted || self.direction2.passed)
    }
}

/// A uniform element of the subquotient, as a vector of width `width`.
pub fn random_element(sq: &Subquotient, rng: &mut ChaCha8Rng, ring: RingConfig, width: usize) -> Vec<u64> {
    let mut v = vec![0; width];
    for (g, &e) in sq.generators.iter().zip(&sq.exponents) {
        let c = rng.gen_range(0..ring.ell_pow(e));
        for (x, &y) in v.iter_mut().zip(g) {
            *x = ring.add(*x, ring.mul(c, y));
        }
    }
    v
}

/// Elements of a subquotient: all of them, or `count` seeded draws.
fn elements(sq: &Subquotient, mode: Mode, limit: u64, rng: &mut ChaCha8Rng, ring: RingConfig, width: usize) -> Result<Vec<Vec<u64>>> {
    let size = (ring.ell() as f64).powi(sq.log_order() as i32);
    match mode {
        Mode::Exhaustive if size <= limit as f64 => Ok(sq.enumerate()),
        Mode::Exhaustive => Err(Error::SizeBound(format!("{size} elements exceed the exhaustive bound {limit}"))),
        Mode::Sampled { count, .. } => Ok((0..count).map(|_| random_element(sq, rng, ring, width)).collect()),
    }
}

/// Direction (1) ⇒ (2): `Ψ(φ_γ)` is a coboundary for each `γ ∈ J_m`.
/// Exhaustive when `|J_m| ≤ max_gammas`, otherwise `samples` seeded draws.
pub fn check_direction1(ctx: &Context, max_gammas: u64, seed: u64, samples: usize) -> Result<(Direction1, Vec<Counterexample>)> {
    let sq = ctx.j_m()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = (ctx.ext.ring.ell() as f64).powi(sq.log_order() as i32);
    let mode = if size <= max_gammas as f64 { Mode::Exhaustive } else { Mode::Sampled { seed, count: samples } };
    let gammas = elements(&sq, mode, max_gammas, &mut rng, ctx.ext.ring, ctx.j.rank())?;
    let mut failures = vec![];
    for gamma in &gammas {
        let gamma = ctx.j.reduce(gamma);
        let phi = phi_from_gamma(ctx, &gamma)?;
        if !psi_is_zero_class(ctx, &phi)? {
            failures.push(Counterexample { kind: "direction1".into(), gamma: Some(gamma), phi: phi.rows() });
        }
    }
    Ok((Direction1 { checked: gammas.len(), passed: failures.is_empty() }, failures))
}

/// Bounds for `verify_theorem`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_order: usize,
    pub max_maps: u64,
    pub max_gammas: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_order: crate::cohomology::DEFAULT_MAX_ORDER, max_maps: DEFAULT_MAX_MAPS, max_gammas: DEFAULT_MAX_GAMMAS }
    }
}

pub fn verify_theorem(ctx: &Context, group: &str, mode: Mode, limits: Limits) -> Result<Report> {
    let ext = &ctx.ext;
    let ring = ext.ring;
    let hypothesis = inflation_h2_surjective(ext, limits.max_order)?;
    let seed = match mode {
        Mode::Sampled { seed, .. } => seed,
        Mode::Exhaustive => 0,
    };
    let samples = match mode {
        Mode::Sampled { count, .. } => count.max(200),
        Mode::Exhaustive => 200,
    };
    let (direction1, mut counterexamples) = check_direction1(ctx, limits.max_gammas, seed, samples)?;

    let hom_sq = ctx.hom_g_structure()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let maps = elements(&hom_sq, mode, limits.max_maps, &mut rng, ring, ctx.hom.module.rank())?;
    let mut zero_class_count = 0;
    let mut passed = true;
    for c in &maps {
        let phi = PhiMap::new(ctx, ctx.hom.to_matrix(&ctx.hom.module.reduce(c)))?;
        if psi_is_zero_class(ctx, &phi)? {
            zero_class_count += 1;
            if image_membership(ctx, &phi)?.is_none() {
                passed = false;
                counterexamples.push(Counterexample { kind: "direction2".into(), gamma: None, phi: phi.rows() });
            }
        }
    }
    let image_size = ring.ell().pow(ctx.image_log_order()?);
    if matches!(mode, Mode::Exhaustive) && zero_class_count as u64 != image_size {
        passed = false;
    }
    Ok(Report {
        group: group.to_string(),
        ell: ring.ell(),
        n: ring.n(),
        m: ctx.m,
        d: ext.d(),
        socle_ranks: ctx.socle.ranks.clone(),
        hypothesis: (&hypothesis).into(),
        direction1,
        direction2: Direction2 { asserted: hypothesis.holds, checked: maps.len(), passed, zero_class_count, image_size },
        counterexamples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fingroup::{catalog, make_extension, CatalogParams};

    fn context(name: &str, m: usize) -> Context {
        let g = catalog(name, &CatalogParams::new()).unwrap();
        Context::new(make_extension(&g, RingConfig::new(2, 1).unwrap()).unwrap(), m).unwrap()
    }

    fn all_phis(ctx: &Context) -> Vec<PhiMap> {
        ctx.hom_g_structure()
            .unwrap()
            .enumerate()
            .iter()
            .map(|c| PhiMap::new(ctx, ctx.hom.to_matrix(&ctx.hom.module.reduce(c))).unwrap())
            .collect()
    }

    #[test]
    fn zero_map() {
        let ctx = context("quaternion8", 2);
        let zero = PhiMap::new(&ctx, ZMat::zeros(2, 1, ctx.ext.ring)).unwrap();
        let res = psi_generic(&ctx, &zero).unwrap();
        assert!(res.psi_cocycle.is_zero() && res.is_zero_class);
        assert!(res.witness.unwrap().is_zero());
        assert_eq!(image_membership(&ctx, &zero).unwrap(), Some(vec![0]));
        let g = build_g_phi(&ctx, &zero).unwrap();
        assert_eq!(g.h_phi.order(), ctx.ext.kernel.order());
        assert_eq!(g.g_phi.order(), 4);
    }

    #[test]
    fn quaternion_maps() {
        let ctx = context("quaternion8", 2);
        let phis = all_phis(&ctx);
        assert_eq!(phis.len(), 4);
        let mut zero_classes = 0;
        for phi in &phis {
            let res = psi_generic(&ctx, phi).unwrap();
            assert!(res.routes.all_agree());
            zero_classes += usize::from(res.is_zero_class);
            assert_eq!(res.is_zero_class, phi.is_zero());
            if !phi.is_zero() {
                assert!(image_membership(&ctx, phi).unwrap().is_none());
                let g = build_g_phi(&ctx, phi).unwrap();
                assert_eq!((g.h_phi.order(), g.g_phi.order()), (1, 8));
                assert!(g.kernel_iso);
                assert!(d2_routes_witness(&ctx, phi).unwrap().is_some());
            }
        }
        assert_eq!(zero_classes, 1);
    }

    #[test]
    fn gamma_outside_level_is_rejected() {
        let g = catalog("cyclic", &[("k".to_string(), "1".to_string())].into_iter().collect()).unwrap();
        let ctx = Context::new(make_extension(&g, RingConfig::new(2, 1).unwrap()).unwrap(), 2).unwrap();
        assert_eq!(ctx.j.rank(), 0);
        let q8 = context("quaternion8", 2);
        assert!(phi_from_gamma(&q8, &[1]).unwrap().is_zero());
        assert!(matches!(phi_from_gamma(&q8, &[1, 0]), Err(Error::GammaNotInSocleLevel { .. })));
    }

    #[test]
    fn m2_formula_needs_level_two() {
        let ctx = context("quaternion8", 3);
        let zero = PhiMap::new(&ctx, ZMat::zeros(ctx.truncation.i_m.rank(), 1, ctx.ext.ring)).unwrap();
        assert_eq!(psi_m2_formula(&ctx, &zero).unwrap_err(), Error::WrongLevel(3));
    }

    #[test]
    fn non_equivariant_phi_is_rejected() {
        // G acts trivially on J but not on I/I^3, so a map that is nonzero on I^2/I^3 is not equivariant
        let ctx = context("quaternion8", 3);
        let q = ctx.truncation.i_m.rank();
        let accepted = (0..1u64 << q)
            .filter(|&bits| {
                let rows: Vec<Vec<u64>> = (0..q).map(|k| vec![(bits >> k) & 1]).collect();
                let phi = ZMat::from_rows(&rows, 1, ctx.ext.ring).unwrap();
                match PhiMap::new(&ctx, phi) {
                    Ok(_) => true,
                    Err(Error::NotEquivariant { .. }) => false,
                    Err(e) => panic!("{e}"),
                }
            })
            .count();
        // the equivariant maps are those killing I^2/I^3, i.e. Hom(I/I^2, Z/2)
        assert_eq!((q, accepted), (3, 4));
        assert_eq!(ctx.hom_g_structure().unwrap().log_order(), 2);
        let wrong_shape = ZMat::zeros(q + 1, 1, ctx.ext.ring);
        assert!(matches!(PhiMap::new(&ctx, wrong_shape), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn verify_quaternion_and_dihedral() {
        let ctx = context("quaternion8", 2);
        let report = verify_theorem(&ctx, "quaternion8", Mode::Exhaustive, Limits::default()).unwrap();
        assert!(report.hypothesis.holds);
        assert_eq!(report.hypothesis.h2_total_dim, 2);
        assert!(report.direction1.passed && report.direction2.passed);
        assert_eq!((report.direction2.zero_class_count, report.direction2.image_size), (1, 1));
        let ctx = context("dihedral8", 2);
        let report = verify_theorem(&ctx, "dihedral8", Mode::Exhaustive, Limits::default()).unwrap();
        assert!(!report.hypothesis.holds && !report.direction2.asserted);
        assert!(report.direction1.passed);
    }
}
