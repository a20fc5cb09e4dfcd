//! Closed-form maximum-likelihood covariant estimation.
//!
//! A pure state is decomposed blockwise as `⊕_μ c_μ Σ_m √λ_m |ψ_m⟩|φ_m⟩`;
//! the optimal covariant POVM is `dĝ U_ĝ|η⟩⟨η|U_ĝ†` with
//! `|η⟩ = ⊕_μ √d_μ e^{i arg c_μ} Σ_m |ψ_m⟩|φ_m⟩`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grouprep::{GroupElement, Representation};
use crate::isotypic::{group_average, IsotypicDecomposition};
use crate::linalg::{c, entropy_bits, frob, hermitian_fn, kron, kron_vec, outer, CMatrix, CVector, C64};

/// Singular values of a block below this are dropped from the Schmidt rank.
pub const SCHMIDT_TOL: f64 = 1e-12;
/// Eigenvalue cut for the pseudo-inverse square root of the frame operator.
pub const FRAME_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-10;

/// Schmidt data of one isotypic block.
#[derive(Debug, Clone)]
pub struct BlockState {
    pub label: usize,
    pub d: usize,
    pub m: usize,
    /// Block amplitude. The phase is absorbed into the left vectors, so `c` is real and `≥ 0`.
    pub c: C64,
    /// Schmidt coefficients, descending, summing to one when `c ≠ 0`.
    pub lambdas: Vec<f64>,
    pub left: Vec<CVector>,
    pub right: Vec<CVector>,
}

impl BlockState {
    pub fn rank(&self) -> usize {
        self.lambdas.len()
    }

    pub fn k(&self) -> usize {
        self.d.min(self.m)
    }
}

#[derive(Debug, Clone)]
pub struct StateDecomposition {
    pub blocks: Vec<BlockState>,
}

impl StateDecomposition {
    pub fn populated(&self) -> impl Iterator<Item = &BlockState> {
        self.blocks.iter().filter(|b| b.rank() > 0)
    }
}

fn block_vector(y: &CVector, offset: usize, d: usize, m: usize) -> CMatrix {
    CMatrix::from_fn(d, m, |i, n| y[offset + i * m + n])
}

/// First entry of `v` with modulus above a small cut, used to fix phases.
fn leading_phase(v: &CVector) -> C64 {
    let scale = v.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    for z in v.iter() {
        if z.norm() > 1e-8 * scale.max(1e-300) {
            return z / z.norm();
        }
    }
    c(1.0, 0.0)
}

fn lex_cmp(a: &CVector, b: &CVector) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if (x - y).norm() > 1e-12 && o != std::cmp::Ordering::Equal {
            return o.reverse();
        }
    }
    std::cmp::Ordering::Equal
}

/// Blockwise Schmidt decomposition of `psi`.
pub fn decompose_state(psi: &CVector, iso: &IsotypicDecomposition) -> Result<StateDecomposition> {
    if psi.len() != iso.dim() {
        return Err(Error::DimensionMismatch { expected: iso.dim(), got: psi.len() });
    }
    let norm = psi.norm();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(norm));
    }
    let y = iso.w.adjoint() * psi;
    let mut blocks = Vec::with_capacity(iso.blocks.len());
    for blk in &iso.blocks {
        let mx = block_vector(&y, blk.offset, blk.d, blk.m);
        let svd = mx.svd(true, true);
        let u = svd.u.expect("u");
        let v_t = svd.v_t.expect("v_t");
        let mut terms: Vec<(f64, CVector, CVector)> = Vec::new();
        for (k, &s) in svd.singular_values.iter().enumerate() {
            if s < SCHMIDT_TOL {
                continue;
            }
            // ψφᵀ = u_k v_k†, so φ_k = conj(v_k) = row k of v_t, transposed
            let mut left = u.column(k).into_owned();
            let mut right = v_t.row(k).transpose();
            let ph = leading_phase(&left);
            left *= ph.conj();
            right *= ph;
            terms.push((s, left, right));
        }
        let weight: f64 = terms.iter().map(|t| t.0 * t.0).sum();
        terms.sort_by(|a, b| {
            if ((a.0 * a.0 - b.0 * b.0) / weight).abs() < 1e-10 {
                lex_cmp(&a.1, &b.1)
            } else {
                b.0.total_cmp(&a.0)
            }
        });
        let cnorm = weight.sqrt();
        blocks.push(BlockState {
            label: blk.label,
            d: blk.d,
            m: blk.m,
            c: c(cnorm, 0.0),
            lambdas: terms.iter().map(|t| t.0 * t.0 / weight).collect(),
            left: terms.iter().map(|t| t.1.clone()).collect(),
            right: terms.iter().map(|t| t.2.clone()).collect(),
        });
    }
    Ok(StateDecomposition { blocks })
}

/// `⊕_μ c_μ Σ_m √λ_m |ψ_m⟩|φ_m⟩`, mapped back through `W`.
pub fn reconstruct(sd: &StateDecomposition, iso: &IsotypicDecomposition) -> CVector {
    let mut y = CVector::zeros(iso.dim());
    for (b, blk) in sd.blocks.iter().zip(&iso.blocks) {
        for k in 0..b.rank() {
            let v = kron_vec(&b.left[k], &b.right[k]) * (b.c * b.lambdas[k].sqrt());
            let mut view = y.rows_mut(blk.offset, blk.d * blk.m);
            view += &v;
        }
    }
    &iso.w * y
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedOrigin {
    Analytic,
    SqrtMeasurement,
    NumericOracle,
}

/// Seed `|η⟩` of a covariant POVM together with the orbit-support projector.
#[derive(Debug, Clone)]
pub struct CovariantSeed {
    pub eta: CVector,
    pub orbit_projector: CMatrix,
    pub origin: SeedOrigin,
}

fn orbit_projector(sd: &StateDecomposition, iso: &IsotypicDecomposition) -> CMatrix {
    let n = iso.dim();
    let mut p = CMatrix::zeros(n, n);
    for (b, blk) in sd.blocks.iter().zip(&iso.blocks) {
        if b.rank() == 0 {
            continue;
        }
        let mut q = CMatrix::zeros(b.m, b.m);
        for phi in &b.right {
            q += outer(phi, phi);
        }
        p.view_mut((blk.offset, blk.offset), (blk.d * blk.m, blk.d * blk.m))
            .copy_from(&kron(&CMatrix::identity(b.d, b.d), &q));
    }
    iso.from_block_basis(&p)
}

/// Optimal seed; blocks with `c_μ = 0` contribute nothing.
pub fn optimal_seed(sd: &StateDecomposition, iso: &IsotypicDecomposition) -> Result<CovariantSeed> {
    if sd.populated().next().is_none() {
        return Err(Error::EmptyState);
    }
    let mut y = CVector::zeros(iso.dim());
    for (b, blk) in sd.blocks.iter().zip(&iso.blocks) {
        let phase = if b.c.norm() > 0.0 { b.c / b.c.norm() } else { c(1.0, 0.0) };
        for k in 0..b.rank() {
            let v = kron_vec(&b.left[k], &b.right[k]) * (phase * (b.d as f64).sqrt());
            let mut view = y.rows_mut(blk.offset, blk.d * blk.m);
            view += &v;
        }
    }
    Ok(CovariantSeed {
        eta: &iso.w * y,
        orbit_projector: orbit_projector(sd, iso),
        origin: SeedOrigin::Analytic,
    })
}

/// `(Σ_μ |c_μ| Σ_m √(λ_m d_μ))²`.
pub fn optimal_likelihood(sd: &StateDecomposition) -> f64 {
    let s: f64 = sd
        .blocks
        .iter()
        .map(|b| b.c.norm() * b.lambdas.iter().map(|l| (l * b.d as f64).sqrt()).sum::<f64>())
        .sum();
    s * s
}

/// `p(ĝ|g) = |⟨η|U_ĝ† U_g|ψ⟩|²`.
pub fn likelihood_density(
    seed: &CovariantSeed,
    psi: &CVector,
    g: &GroupElement,
    g_hat: &GroupElement,
    rep: &Representation,
) -> Result<f64> {
    if psi.len() != rep.dim() || seed.eta.len() != rep.dim() {
        return Err(Error::DimensionMismatch { expected: rep.dim(), got: psi.len() });
    }
    let psi_g = rep.evaluate(g)? * psi;
    let eta_g = rep.evaluate(g_hat)? * &seed.eta;
    Ok(eta_g.dotc(&psi_g).norm_sqr())
}

/// `d_Ψ = Σ_μ d_μ r_μ`.
pub fn orbit_dimension(sd: &StateDecomposition) -> usize {
    sd.blocks.iter().map(|b| b.d * b.rank()).sum()
}

/// `L = Σ_μ d_μ min(d_μ, m_μ)`.
pub fn l_bound(iso: &IsotypicDecomposition) -> usize {
    iso.blocks.iter().map(|b| b.d * b.d.min(b.m)).sum()
}

/// Optimal input state `(1/√L) ⊕_μ √(d_μ k_μ) e^{iθ_μ} |E_μ⟩⟩` and its likelihood `L`.
pub fn optimal_input_state(iso: &IsotypicDecomposition, phases: Option<&[f64]>) -> Result<(CVector, f64)> {
    if let Some(p) = phases {
        if p.len() != iso.blocks.len() {
            return Err(Error::DimensionMismatch { expected: iso.blocks.len(), got: p.len() });
        }
    }
    let l = l_bound(iso) as f64;
    let mut y = CVector::zeros(iso.dim());
    for (idx, blk) in iso.blocks.iter().enumerate() {
        let k = blk.d.min(blk.m);
        let theta = phases.map_or(0.0, |p| p[idx]);
        let amp = C64::from_polar(((blk.d * k) as f64 / l).sqrt() / (k as f64).sqrt(), theta);
        for j in 0..k {
            y[blk.offset + j * blk.m + j] = amp;
        }
    }
    Ok((&iso.w * y, l))
}

#[derive(Debug, Clone, Serialize)]
pub struct SaturationCertificate {
    pub saturated: bool,
    pub orbit_dim: usize,
    pub violations: Vec<String>,
}

/// Whether `p^Opt = d_Ψ`: `|c_μ| = √(d_μ r_μ / d_Ψ)` and `λ_m = 1/r_μ` for all blocks.
pub fn state_saturates_bound(sd: &StateDecomposition) -> SaturationCertificate {
    let d_psi = orbit_dimension(sd);
    let mut violations = Vec::new();
    for b in &sd.blocks {
        let target = ((b.d * b.rank()) as f64 / d_psi as f64).sqrt();
        let got = b.c.norm();
        if (got - target).abs() > 1e-8 {
            violations.push(format!("block {}: |c| = {got:.10} but √(d·r/d_Ψ) = {target:.10}", b.label));
        }
        for (k, l) in b.lambdas.iter().enumerate() {
            let want = 1.0 / b.rank() as f64;
            if (l - want).abs() > 1e-8 {
                violations.push(format!("block {} Schmidt {k}: λ = {l:.10} but 1/r = {want:.10}", b.label));
            }
        }
    }
    SaturationCertificate { saturated: violations.is_empty(), orbit_dim: d_psi, violations }
}

/// `χ = S(⟨|Ψ⟩⟨Ψ|⟩_G)` in bits.
pub fn holevo_chi(sd: &StateDecomposition, iso: &IsotypicDecomposition) -> Result<f64> {
    let psi = reconstruct(sd, iso);
    let avg = group_average(&outer(&psi, &psi), iso)?;
    Ok(entropy_bits(&avg))
}

/// `F^{−1/2}|ψ⟩` with `F = ⟨|ψ⟩⟨ψ|⟩_G`, pseudo-inverse on the support of `F`.
pub fn sqrt_measurement_seed(psi: &CVector, iso: &IsotypicDecomposition) -> Result<CovariantSeed> {
    if psi.len() != iso.dim() {
        return Err(Error::DimensionMismatch { expected: iso.dim(), got: psi.len() });
    }
    let norm = psi.norm();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(norm));
    }
    let frame = group_average(&outer(psi, psi), iso)?;
    let inv_sqrt = hermitian_fn(&frame, |x| if x > FRAME_TOL { 1.0 / x.sqrt() } else { 0.0 });
    let support = hermitian_fn(&(frame), |x| if x > FRAME_TOL { 1.0 } else { 0.0 });
    if frob(&support) == 0.0 {
        return Err(Error::EmptyState);
    }
    Ok(CovariantSeed { eta: inv_sqrt * psi, orbit_projector: support, origin: SeedOrigin::SqrtMeasurement })
}

/// External-reference analysis for `U_g ⊗ 1_R`.
#[derive(Debug, Clone, Serialize)]
pub struct ReferenceRequirements {
    pub d_r_bar: usize,
    pub l_max: usize,
    layout: Vec<(usize, usize)>,
}

impl ReferenceRequirements {
    /// `L′(d_R) = Σ_μ d_μ min(d_μ, m_μ d_R)`.
    pub fn l_prime(&self, d_r: usize) -> usize {
        self.layout.iter().map(|&(d, m)| d * d.min(m * d_r)).sum()
    }
}

pub fn reference_requirements(iso: &IsotypicDecomposition) -> ReferenceRequirements {
    let layout = iso.layout();
    ReferenceRequirements {
        d_r_bar: layout.iter().map(|&(d, m)| d.div_ceil(m)).max().unwrap_or(1),
        l_max: layout.iter().map(|&(d, _)| d * d).sum(),
        layout,
    }
}

/// Residual fields of an [`EstimationReport`]; `None` when not computed.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Residuals {
    pub normalization: Option<f64>,
    pub covariance: Option<f64>,
    pub sqrt_equiv: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimationReport {
    pub likelihood: f64,
    pub orbit_dim: usize,
    pub chi_bits: f64,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "L_max")]
    pub l_max: usize,
    #[serde(rename = "d_R_bar")]
    pub d_r_bar: usize,
    pub residuals: Residuals,
    pub saturates_bound: bool,
    pub seed_origin: SeedOrigin,
    /// The POVM is fixed only on the orbit support; no completion is constructed.
    pub off_support_completion: &'static str,
}

impl EstimationReport {
    pub fn closed_form(sd: &StateDecomposition, iso: &IsotypicDecomposition) -> Result<Self> {
        let refs = reference_requirements(iso);
        Ok(EstimationReport {
            likelihood: optimal_likelihood(sd),
            orbit_dim: orbit_dimension(sd),
            chi_bits: holevo_chi(sd, iso)?,
            l: l_bound(iso),
            l_max: refs.l_max,
            d_r_bar: refs.d_r_bar,
            residuals: Residuals::default(),
            saturates_bound: state_saturates_bound(sd).saturated,
            seed_origin: SeedOrigin::Analytic,
            off_support_completion: "none",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grouprep::{GroupSpec, Quaternion};
    use crate::isotypic::isotypic_decompose;
    use crate::linalg::basis_vector;

    fn spin_pair() -> (Representation, IsotypicDecomposition) {
        let rep = Representation::spin(1).tensor(&Representation::spin(1)).unwrap();
        let iso = isotypic_decompose(&rep).unwrap();
        (rep, iso)
    }

    #[test]
    fn up_up_is_pure_triplet() {
        let (_, iso) = spin_pair();
        let sd = decompose_state(&basis_vector(4, 0), &iso).unwrap();
        assert_eq!(sd.blocks[0].rank(), 0);
        assert!((sd.blocks[1].c.norm() - 1.0).abs() < 1e-12);
        assert_eq!(sd.blocks[1].rank(), 1);
        assert!((optimal_likelihood(&sd) - 3.0).abs() < 1e-12);
        assert_eq!(orbit_dimension(&sd), 3);
        assert!(state_saturates_bound(&sd).saturated);
        assert!((holevo_chi(&sd, &iso).unwrap() - 3f64.log2()).abs() < 1e-9);
    }

    #[test]
    fn up_down_values() {
        let (_, iso) = spin_pair();
        let sd = decompose_state(&basis_vector(4, 1), &iso).unwrap();
        let h = 0.5f64.sqrt();
        assert!((sd.blocks[0].c.norm() - h).abs() < 1e-12);
        assert!((sd.blocks[1].c.norm() - h).abs() < 1e-12);
        let expect = (1.0 + 3f64.sqrt()).powi(2) / 2.0;
        assert!((optimal_likelihood(&sd) - expect).abs() < 1e-12);
        assert_eq!(orbit_dimension(&sd), 4);
        let cert = state_saturates_bound(&sd);
        assert!(!cert.saturated);
        assert!(!cert.violations.is_empty());
        let chi = holevo_chi(&sd, &iso).unwrap();
        let direct = -(0.5f64 * 0.5f64.log2()) - 3.0 * (1.0 / 6.0) * (1.0f64 / 6.0).log2();
        assert!((chi - direct).abs() < 1e-9);
    }

    #[test]
    fn seed_reproduces_likelihood_and_sqrt_measurement() {
        let (_, iso) = spin_pair();
        let psi = basis_vector(4, 1);
        let sd = decompose_state(&psi, &iso).unwrap();
        let seed = optimal_seed(&sd, &iso).unwrap();
        let p = seed.eta.dotc(&psi).norm_sqr();
        assert!((p - optimal_likelihood(&sd)).abs() < 1e-10);
        let sq = sqrt_measurement_seed(&psi, &iso).unwrap();
        assert!((sq.eta - &seed.eta).norm() < 1e-9);
        let p2 = &seed.orbit_projector * &seed.orbit_projector;
        assert!(frob(&(p2 - &seed.orbit_projector)) < 1e-10);
    }

    #[test]
    fn reconstruction_matches_input() {
        let (_, iso) = spin_pair();
        let psi = CVector::from_vec(vec![c(0.3, 0.1), c(-0.2, 0.5), c(0.4, -0.3), c(0.1, 0.2)]);
        let psi = &psi / c(psi.norm(), 0.0);
        let sd = decompose_state(&psi, &iso).unwrap();
        assert!((reconstruct(&sd, &iso) - psi).norm() < 1e-9);
    }

    #[test]
    fn unnormalized_input_is_rejected() {
        let (_, iso) = spin_pair();
        let psi = basis_vector(4, 0) * c(2.0, 0.0);
        assert!(matches!(decompose_state(&psi, &iso), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn optimal_input_for_spin_pair() {
        let (_, iso) = spin_pair();
        let (psi, l) = optimal_input_state(&iso, None).unwrap();
        assert_eq!(l, 4.0);
        let sd = decompose_state(&psi, &iso).unwrap();
        assert!((sd.blocks[0].c.norm() - 0.5).abs() < 1e-12);
        assert!((sd.blocks[1].c.norm() - 3f64.sqrt() / 2.0).abs() < 1e-12);
        assert!((optimal_likelihood(&sd) - 4.0).abs() < 1e-10);
        assert!((holevo_chi(&sd, &iso).unwrap() - 2.0).abs() < 1e-9);
        assert!(state_saturates_bound(&sd).saturated);
    }

    #[test]
    fn maximally_entangled_under_local_action() {
        let rep = Representation::spin(2).with_reference(3).unwrap();
        let iso = isotypic_decompose(&rep).unwrap();
        assert_eq!(iso.layout(), vec![(3, 3)]);
        let mut psi = CVector::zeros(9);
        for i in 0..3 {
            psi[i * 3 + i] = c(1.0 / 3f64.sqrt(), 0.0);
        }
        let sd = decompose_state(&psi, &iso).unwrap();
        assert_eq!(sd.blocks[0].rank(), 3);
        for l in &sd.blocks[0].lambdas {
            assert!((l - 1.0 / 3.0).abs() < 1e-10);
        }
        assert_eq!(orbit_dimension(&sd), 9);
    }

    #[test]
    fn susskind_glogower_seed() {
        let rep = Representation::u1_number(12);
        let iso = isotypic_decompose(&rep).unwrap();
        let psi = CVector::from_fn(12, |n, _| c(1.0 + n as f64, 0.0));
        let psi = &psi / c(psi.norm(), 0.0);
        let seed = optimal_seed(&decompose_state(&psi, &iso).unwrap(), &iso).unwrap();
        let ones = CVector::from_element(12, c(1.0, 0.0));
        assert!((seed.eta - ones).norm() < 1e-10);
    }

    #[test]
    fn z3_uniform_off_diagonal_density_vanishes() {
        let g = GroupSpec::cyclic(3);
        let rep = Representation::regular(&g).unwrap();
        let iso = isotypic_decompose(&rep).unwrap();
        // uniform over the three character blocks
        let (psi, _) = optimal_input_state(&iso, None).unwrap();
        let sd = decompose_state(&psi, &iso).unwrap();
        let seed = optimal_seed(&sd, &iso).unwrap();
        let g0 = GroupElement::Finite(0);
        for k in 1..3 {
            let p = likelihood_density(&seed, &psi, &g0, &GroupElement::Finite(k), &rep).unwrap();
            assert!(p < 1e-12);
        }
        let p = likelihood_density(&seed, &psi, &g0, &g0, &rep).unwrap();
        assert!((p - 3.0).abs() < 1e-10);
    }

    #[test]
    fn density_at_pi_rotation_matches_dense_evaluation() {
        let (rep, iso) = spin_pair();
        let psi = basis_vector(4, 1);
        let seed = optimal_seed(&decompose_state(&psi, &iso).unwrap(), &iso).unwrap();
        let g = GroupElement::Su2(Quaternion::normalized([0.3, 0.1, -0.4, 0.8]));
        let rz = GroupElement::Su2(Quaternion::from_axis_angle([0.0, 0.0, 1.0], std::f64::consts::PI));
        let g_hat = rep.group().compose(&g, &rz).unwrap();
        let p = likelihood_density(&seed, &psi, &g, &g_hat, &rep).unwrap();
        // dense path: build the POVM element and take the trace
        let u_hat = rep.evaluate(&g_hat).unwrap();
        let eta_hat = &u_hat * &seed.eta;
        let povm = outer(&eta_hat, &eta_hat);
        let psi_g = rep.evaluate(&g).unwrap() * &psi;
        let rho = outer(&psi_g, &psi_g);
        let dense = (povm * rho).trace().re;
        assert!((p - dense).abs() < 1e-12);
    }

    #[test]
    fn reference_numbers() {
        let iso = isotypic_decompose(&Representation::spin(1)).unwrap();
        let refs = reference_requirements(&iso);
        assert_eq!(refs.d_r_bar, 2);
        assert_eq!(refs.l_prime(1), 2);
        assert_eq!(refs.l_max, 4);
        let (_, pair) = spin_pair();
        let refs = reference_requirements(&pair);
        assert_eq!(refs.d_r_bar, 3);
        assert_eq!(refs.l_max, 10);
        let z3 = isotypic_decompose(&Representation::regular(&GroupSpec::cyclic(3)).unwrap()).unwrap();
        assert_eq!(reference_requirements(&z3).d_r_bar, 1);
    }
}
