//! Isotypic decomposition `H ≅ ⊕_μ H_μ ⊗ C^{m_μ}`, commutant and group averaging.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grouprep::{GroupElement, HaarSampler, Representation};
use crate::json::JsonMatrix;
use crate::linalg::{c, eigh, frob, kron, nullspace, unitarity_defect, unvec, CMatrix};

/// Relative singular-value cut for commutant and intertwiner nullspaces.
pub const NULLSPACE_TOL: f64 = 1e-10;
/// Absolute eigenvalue clustering tolerance for the unit-norm commutant sample.
pub const CLUSTER_TOL: f64 = 1e-8;
/// Minimum accepted gap between distinct eigenvalue clusters.
const MIN_GAP: f64 = 1e-6;
const MAX_ATTEMPTS: usize = 8;
const DECOMPOSITION_SEED: u64 = 0x15_07_19;
/// Monte-Carlo twirl chunk size; each chunk has its own derived seed.
pub const TWIRL_CHUNK: usize = 4096;

/// One isotypic component. Column `i·m + n` of `basis` spans `|e_i⟩ ⊗ |φ_n⟩`.
#[derive(Debug, Clone)]
pub struct IrrepBlock {
    pub label: usize,
    pub d: usize,
    pub m: usize,
    pub basis: CMatrix,
    /// Column offset of this block inside `W`.
    pub offset: usize,
}

impl IrrepBlock {
    pub fn size(&self) -> usize {
        self.d * self.m
    }
}

#[derive(Debug, Clone)]
pub struct IsotypicDecomposition {
    pub blocks: Vec<IrrepBlock>,
    /// Unitary whose columns are the block bases, in block order.
    pub w: CMatrix,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct CommutantBasis {
    /// Hilbert-Schmidt orthonormal basis of the commutant.
    pub elements: Vec<CMatrix>,
    /// Set when the nullspace cut falls within 10x of a retained singular value.
    pub warning: Option<String>,
}

impl CommutantBasis {
    pub fn dim(&self) -> usize {
        self.elements.len()
    }
}

/// Stacked map `X ↦ (A_k X − X B_k)_k` on column-major `vec X`.
fn intertwiner_map(a: &[CMatrix], b: &[CMatrix]) -> CMatrix {
    let da = a[0].nrows();
    let db = b[0].nrows();
    let cols = da * db;
    let mut stacked = CMatrix::zeros(a.len() * cols, cols);
    let id_a = CMatrix::identity(da, da);
    let id_b = CMatrix::identity(db, db);
    for (k, (ak, bk)) in a.iter().zip(b).enumerate() {
        let block = kron(&id_b, ak) - kron(&bk.transpose(), &id_a);
        stacked.view_mut((k * cols, 0), (cols, cols)).copy_from(&block);
    }
    stacked
}

fn nullspace_matrices(a: &[CMatrix], b: &[CMatrix]) -> (Vec<CMatrix>, Option<String>) {
    let ns = nullspace(&intertwiner_map(a, b), NULLSPACE_TOL);
    let (ra, rb) = (a[0].nrows(), b[0].nrows());
    let mats = (0..ns.dim())
        .map(|k| unvec(ns.basis.column(k).as_slice(), ra, rb))
        .collect();
    let warning = ns.ill_conditioned().then(|| {
        format!(
            "ill-conditioned nullspace: smallest retained singular value {:.3e} within 10x of threshold {:.3e}",
            ns.smallest_nonnull.unwrap_or(0.0),
            ns.threshold
        )
    });
    (mats, warning)
}

/// Commutant `{X : [X, U_g] = 0}` over the group's constraint set.
pub fn compute_commutant(rep: &Representation) -> CommutantBasis {
    let us = rep.constraint_matrices();
    let (elements, warning) = nullspace_matrices(&us, &us);
    CommutantBasis { elements, warning }
}

fn character_key(restricted: &[CMatrix]) -> Vec<f64> {
    // rounded so that equivalent copies that differ by roundoff sort identically
    restricted
        .iter()
        .flat_map(|u| {
            let t = u.trace();
            [(t.re * 1e6).round() / 1e6, (t.im * 1e6).round() / 1e6]
        })
        .collect()
}

fn cmp_keys(a: &(usize, Vec<f64>), b: &(usize, Vec<f64>)) -> Ordering {
    a.0.cmp(&b.0).then_with(|| {
        for (x, y) in a.1.iter().zip(&b.1) {
            match x.total_cmp(y) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    })
}

fn restrict(us: &[CMatrix], q: &CMatrix) -> Vec<CMatrix> {
    us.iter().map(|u| q.adjoint() * u * q).collect()
}

fn random_hermitian_element(comm: &CommutantBasis, rng: &mut ChaCha20Rng) -> CMatrix {
    let n = comm.elements[0].nrows();
    let mut x = CMatrix::zeros(n, n);
    for b in &comm.elements {
        let z = c(rng.sample(StandardNormal), rng.sample(StandardNormal));
        x += b * z;
    }
    let h = (&x + x.adjoint()).scale(0.5);
    let (vals, _) = eigh(&h);
    let norm = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if norm > 0.0 {
        h.unscale(norm)
    } else {
        h
    }
}

/// Attempts one decomposition from a commutant sample; `Err` carries the reason to resample.
fn attempt(
    rep: &Representation,
    us: &[CMatrix],
    comm: &CommutantBasis,
    rng: &mut ChaCha20Rng,
) -> std::result::Result<IsotypicDecomposition, String> {
    let dim = rep.dim();
    let h = random_hermitian_element(comm, rng);
    let (vals, vecs) = eigh(&h);

    let mut clusters: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for k in 1..=dim {
        if k == dim || vals[k] - vals[k - 1] > CLUSTER_TOL {
            if k < dim && vals[k] - vals[k - 1] < MIN_GAP {
                return Err(format!("near-degenerate eigenvalue gap {:.3e}", vals[k] - vals[k - 1]));
            }
            clusters.push((start, k - start));
            start = k;
        }
    }

    struct Copy {
        q: CMatrix,
        restricted: Vec<CMatrix>,
    }
    let mut copies = Vec::with_capacity(clusters.len());
    for &(s, len) in &clusters {
        let q = vecs.columns(s, len).into_owned();
        let restricted = restrict(us, &q);
        for (u, r) in us.iter().zip(&restricted) {
            let leak = frob(&(u * &q - &q * r));
            if leak > 1e-8 {
                return Err(format!("eigenspace not invariant (leak {leak:.3e})"));
            }
        }
        let (self_comm, _) = nullspace_matrices(&restricted, &restricted);
        if self_comm.len() != 1 {
            return Err(format!("eigenspace of dimension {len} is reducible"));
        }
        copies.push(Copy { q, restricted });
    }

    // classes of equivalent copies; the first copy of each class is the reference
    let mut classes: Vec<Vec<(usize, CMatrix)>> = Vec::new();
    'next: for (idx, copy) in copies.iter().enumerate() {
        for class in classes.iter_mut() {
            let reference = &copies[class[0].0];
            if reference.q.ncols() != copy.q.ncols() {
                continue;
            }
            let (t, _) = nullspace_matrices(&reference.restricted, &copy.restricted);
            match t.len() {
                0 => continue,
                1 => {
                    // U_ref T = T U_copy, T ∝ unitary
                    let svd = t[0].clone().svd(true, true);
                    let w = svd.u.expect("u") * svd.v_t.expect("v_t");
                    class.push((idx, w));
                    continue 'next;
                }
                n => return Err(format!("intertwiner space of dimension {n}")),
            }
        }
        let d = copy.q.ncols();
        classes.push(vec![(idx, CMatrix::identity(d, d))]);
    }

    let m2: usize = classes.iter().map(|cl| cl.len() * cl.len()).sum();
    if m2 != comm.dim() {
        return Err(format!("Σm² = {m2} but commutant dimension is {}", comm.dim()));
    }

    let mut keyed: Vec<((usize, Vec<f64>), CMatrix)> = classes
        .iter()
        .map(|class| {
            let ref_copy = &copies[class[0].0];
            let d = ref_copy.q.ncols();
            let m = class.len();
            let mut basis = CMatrix::zeros(dim, d * m);
            for (n, (idx, w)) in class.iter().enumerate() {
                let aligned = &copies[*idx].q * w.adjoint();
                for i in 0..d {
                    basis.set_column(i * m + n, &aligned.column(i));
                }
            }
            ((d, character_key(&ref_copy.restricted)), basis)
        })
        .collect();
    keyed.sort_by(|a, b| cmp_keys(&a.0, &b.0));

    let mut w = CMatrix::zeros(dim, dim);
    let mut blocks = Vec::with_capacity(keyed.len());
    let mut offset = 0;
    for (label, ((d, _), basis)) in keyed.into_iter().enumerate() {
        let m = basis.ncols() / d;
        w.view_mut((0, offset), (dim, d * m)).copy_from(&basis);
        blocks.push(IrrepBlock { label, d, m, basis, offset });
        offset += d * m;
    }
    let iso = IsotypicDecomposition { blocks, w, warnings: Vec::new() };
    for u in us {
        let r = iso.block_residual(u);
        if r > 1e-8 {
            return Err(format!("block residual {r:.3e} after alignment"));
        }
    }
    Ok(iso)
}

/// Isotypic decomposition with aligned multiplicity bases.
pub fn isotypic_decompose(rep: &Representation) -> Result<IsotypicDecomposition> {
    let us = rep.constraint_matrices();
    let comm = compute_commutant(rep);
    if comm.dim() == 0 {
        return Err(Error::DecompositionFailed("empty commutant".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(DECOMPOSITION_SEED);
    let mut reasons = Vec::new();
    for _ in 0..MAX_ATTEMPTS {
        match attempt(rep, &us, &comm, &mut rng) {
            Ok(mut iso) => {
                iso.warnings.extend(comm.warning.clone());
                return Ok(iso);
            }
            Err(reason) => reasons.push(reason),
        }
    }
    Err(Error::DecompositionFailed(format!(
        "no clean split after {MAX_ATTEMPTS} commutant samples: {}",
        reasons.join("; ")
    )))
}

/// `Tr_{H}` of a `(d·m)×(d·m)` block in `(i·m + n)` ordering, giving an `m×m` matrix.
pub fn partial_trace_irrep(block: &CMatrix, d: usize, m: usize) -> CMatrix {
    let mut out = CMatrix::zeros(m, m);
    for i in 0..d {
        out += block.view((i * m, i * m), (m, m));
    }
    out
}

impl IsotypicDecomposition {
    pub fn dim(&self) -> usize {
        self.w.nrows()
    }

    /// `⊕_μ d_μ m_μ` layout as `(d, m)` pairs.
    pub fn layout(&self) -> Vec<(usize, usize)> {
        self.blocks.iter().map(|b| (b.d, b.m)).collect()
    }

    /// Matrix in the block basis, `W† A W`.
    pub fn to_block_basis(&self, a: &CMatrix) -> CMatrix {
        self.w.adjoint() * a * &self.w
    }

    pub fn from_block_basis(&self, a: &CMatrix) -> CMatrix {
        &self.w * a * self.w.adjoint()
    }

    /// Distance of `W†UW` from `⊕ V_μ ⊗ 1_{m_μ}`, with `V_μ` read from the first copy.
    pub fn block_residual(&self, u: &CMatrix) -> f64 {
        let b = self.to_block_basis(u);
        let mut expected = CMatrix::zeros(b.nrows(), b.ncols());
        for blk in &self.blocks {
            let (d, m, o) = (blk.d, blk.m, blk.offset);
            let v = CMatrix::from_fn(d, d, |i, j| b[(o + i * m, o + j * m)]);
            expected
                .view_mut((o, o), (d * m, d * m))
                .copy_from(&kron(&v, &CMatrix::identity(m, m)));
        }
        frob(&(b - expected))
    }

    /// Irrep matrix `U^μ_g` on block `label`, read from the first multiplicity copy.
    pub fn irrep_matrix(&self, u: &CMatrix, label: usize) -> CMatrix {
        let blk = &self.blocks[label];
        let b = self.to_block_basis(u);
        CMatrix::from_fn(blk.d, blk.d, |i, j| b[(blk.offset + i * blk.m, blk.offset + j * blk.m)])
    }

    /// Checks the layout and block structure against `rep` on its constraint set.
    pub fn validate_against(&self, rep: &Representation) -> Result<()> {
        if self.dim() != rep.dim() {
            return Err(Error::DimensionMismatch { expected: rep.dim(), got: self.dim() });
        }
        let defect = unitarity_defect(&self.w);
        if defect > 1e-10 * (self.dim() as f64).max(1.0) {
            return Err(Error::Validation(format!("W is not unitary (defect {defect:.3e})")));
        }
        for u in rep.constraint_matrices() {
            let r = self.block_residual(&u);
            if r > 1e-8 {
                return Err(Error::Validation(format!(
                    "decomposition does not block-diagonalize the representation (residual {r:.3e})"
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> DecompositionJson {
        DecompositionJson {
            blocks: self.blocks.iter().map(|b| BlockJson { d: b.d, m: b.m }).collect(),
            w: JsonMatrix::from_matrix(&self.w),
        }
    }

    pub fn from_json(doc: &DecompositionJson) -> Result<Self> {
        let w = doc.w.to_matrix("W")?;
        if w.nrows() != w.ncols() {
            return Err(Error::parse("W", "must be square"));
        }
        let total: usize = doc.blocks.iter().map(|b| b.d * b.m).sum();
        if total != w.nrows() {
            return Err(Error::parse("blocks", format!("Σ d·m = {total} but W is {}x{}", w.nrows(), w.ncols())));
        }
        if doc.blocks.iter().any(|b| b.d == 0 || b.m == 0) {
            return Err(Error::parse("blocks", "d and m must be positive"));
        }
        let defect = unitarity_defect(&w);
        if defect > 1e-10 * (w.nrows() as f64).max(1.0) {
            return Err(Error::Validation(format!("W is not unitary (defect {defect:.3e})")));
        }
        let mut blocks = Vec::new();
        let mut offset = 0;
        for (label, b) in doc.blocks.iter().enumerate() {
            let basis = w.columns(offset, b.d * b.m).into_owned();
            blocks.push(IrrepBlock { label, d: b.d, m: b.m, basis, offset });
            offset += b.d * b.m;
        }
        Ok(IsotypicDecomposition { blocks, w, warnings: Vec::new() })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockJson {
    pub d: usize,
    pub m: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionJson {
    pub blocks: Vec<BlockJson>,
    #[serde(rename = "W")]
    pub w: JsonMatrix,
}

/// `⟨A⟩_G = ⊕_μ 1_{d_μ} ⊗ Tr_{H_μ}[A]/d_μ`, returned in the original basis.
pub fn group_average(a: &CMatrix, iso: &IsotypicDecomposition) -> Result<CMatrix> {
    if a.nrows() != iso.dim() || a.ncols() != iso.dim() {
        return Err(Error::DimensionMismatch { expected: iso.dim(), got: a.nrows() });
    }
    Ok(iso.from_block_basis(&group_average_block_basis(&iso.to_block_basis(a), iso)))
}

/// Group average of a matrix already expressed in the block basis.
pub fn group_average_block_basis(b: &CMatrix, iso: &IsotypicDecomposition) -> CMatrix {
    let n = iso.dim();
    let mut out = CMatrix::zeros(n, n);
    for blk in &iso.blocks {
        let (d, m, o) = (blk.d, blk.m, blk.offset);
        let block = b.view((o, o), (d * m, d * m)).into_owned();
        let reduced = partial_trace_irrep(&block, d, m).unscale(d as f64);
        out.view_mut((o, o), (d * m, d * m))
            .copy_from(&kron(&CMatrix::identity(d, d), &reduced));
    }
    out
}

/// Twirl estimate; `std_error` is the Frobenius-norm standard error (zero when exact).
#[derive(Debug, Clone)]
pub struct TwirlEstimate {
    pub mean: CMatrix,
    pub std_error: f64,
    pub samples: usize,
    pub exact: bool,
    /// Seeding scheme: chunk `k` draws from `HaarSampler::new(group, chunk_seeds[k])`.
    pub chunk_seeds: Vec<u64>,
}

fn conj_avg(u: &CMatrix, a: &CMatrix) -> CMatrix {
    u * a * u.adjoint()
}

/// `∫dg U_g A U_g†`: exact for finite groups, Monte-Carlo over `n` Haar samples otherwise.
pub fn twirl_oracle(a: &CMatrix, rep: &Representation, sampler: &mut HaarSampler, n: usize) -> Result<TwirlEstimate> {
    if a.nrows() != rep.dim() || a.ncols() != rep.dim() {
        return Err(Error::DimensionMismatch { expected: rep.dim(), got: a.nrows() });
    }
    let group = rep.group().clone();
    if let Some(elements) = group.elements() {
        let mats = crate::par_map(&elements, |g: &GroupElement| {
            rep.evaluate(g).map(|u| conj_avg(&u, a))
        });
        let mut sum = CMatrix::zeros(a.nrows(), a.ncols());
        for m in mats {
            sum += m?;
        }
        return Ok(TwirlEstimate {
            mean: sum.unscale(elements.len() as f64),
            std_error: 0.0,
            samples: elements.len(),
            exact: true,
            chunk_seeds: Vec::new(),
        });
    }

    let n = n.max(1);
    let chunks = n.div_ceil(TWIRL_CHUNK);
    let mut seeder = ChaCha20Rng::seed_from_u64(sampler.seed() ^ sampler.counter().rotate_left(32));
    let chunk_seeds: Vec<u64> = (0..chunks).map(|_| seeder.random()).collect();
    for _ in 0..n {
        // keep the caller's sampler position consistent with the number of draws
        sampler.sample();
    }
    let jobs: Vec<(u64, usize)> = chunk_seeds
        .iter()
        .enumerate()
        .map(|(k, &s)| (s, TWIRL_CHUNK.min(n - k * TWIRL_CHUNK)))
        .collect();
    let partials = crate::par_map(&jobs, |&(seed, count)| -> Result<(CMatrix, f64)> {
        let mut local = HaarSampler::new(group.clone(), seed);
        let mut sum = CMatrix::zeros(a.nrows(), a.ncols());
        let mut sq = 0.0;
        for _ in 0..count {
            let x = conj_avg(&rep.evaluate(&local.sample())?, a);
            sq += frob(&x).powi(2);
            sum += x;
        }
        Ok((sum, sq))
    });
    let mut sum = CMatrix::zeros(a.nrows(), a.ncols());
    let mut sq = 0.0;
    for p in partials {
        let (s, q) = p?;
        sum += s;
        sq += q;
    }
    let mean = sum.unscale(n as f64);
    let var = if n > 1 {
        ((sq / n as f64 - frob(&mean).powi(2)) * n as f64 / (n as f64 - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(TwirlEstimate { mean, std_error: (var / n as f64).sqrt(), samples: n, exact: false, chunk_seeds })
}

/// Projector onto block `label` in the original basis.
pub fn block_projector(iso: &IsotypicDecomposition, label: usize) -> CMatrix {
    let b = &iso.blocks[label].basis;
    b * b.adjoint()
}
