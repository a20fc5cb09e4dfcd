//! Numerical cross-checks of the closed-form optimum.
//!
//! `maximize_likelihood_numeric` maximizes `Tr[ρΞ]` over positive `Ξ` with
//! `Tr_{H_μ}[Ξ_μμ] = d_μ 1_{m_μ}` by projected ascent. It knows nothing about
//! Schmidt decompositions, so agreement with the analytic value is a real test.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimation::CovariantSeed;
use crate::grouprep::{HaarSampler, Representation};
use crate::isotypic::{group_average_block_basis, partial_trace_irrep, twirl_oracle, IsotypicDecomposition};
use crate::linalg::{c, eigh, frob, hermitian_fn, hermitian_part, kron, outer, CMatrix};

/// Constraint residual above which an ascent is flagged inconclusive.
pub const FEASIBILITY_TOL: f64 = 1e-8;
const DYKSTRA_MAX: usize = 400;
const DYKSTRA_TOL: f64 = 1e-12;

/// Per-block partial-trace targets `Tr_{H_μ}[Ξ_μμ] = d_μ 1_{m_μ}`.
#[derive(Debug, Clone)]
pub struct ConstraintSpec {
    /// `(d, m, offset)` in the block basis.
    pub blocks: Vec<(usize, usize, usize)>,
    pub dim: usize,
}

impl ConstraintSpec {
    pub fn from_decomposition(iso: &IsotypicDecomposition) -> Self {
        ConstraintSpec {
            blocks: iso.blocks.iter().map(|b| (b.d, b.m, b.offset)).collect(),
            dim: iso.dim(),
        }
    }

    /// `max_μ ‖Tr_{H_μ}[Ξ_μμ] − d_μ 1‖_F`.
    pub fn affine_residual(&self, xi: &CMatrix) -> f64 {
        self.blocks
            .iter()
            .map(|&(d, m, o)| {
                let red = partial_trace_irrep(&xi.view((o, o), (d * m, d * m)).into_owned(), d, m);
                frob(&(red - CMatrix::identity(m, m).scale(d as f64)))
            })
            .fold(0.0, f64::max)
    }

    /// Constraint residual: affine defect plus the magnitude of negative eigenvalues.
    pub fn residual(&self, xi: &CMatrix) -> f64 {
        let neg: f64 = eigh(xi).0.iter().filter(|&&v| v < 0.0).map(|v| -v).sum();
        self.affine_residual(xi).max(neg)
    }

    fn project_affine(&self, xi: &CMatrix) -> CMatrix {
        let mut out = xi.clone();
        for &(d, m, o) in &self.blocks {
            let red = partial_trace_irrep(&out.view((o, o), (d * m, d * m)).into_owned(), d, m);
            let fix = CMatrix::identity(m, m).scale(d as f64) - red;
            let delta = kron(&CMatrix::identity(d, d), &fix).unscale(d as f64);
            let mut view = out.view_mut((o, o), (d * m, d * m));
            view += &delta;
        }
        out
    }

    /// Exact feasibility by congruence with `⊕ 1_d ⊗ S_μ`, `S_μ = (Tr_{H_μ}Ξ/d)^{−1/2}`.
    fn restore(&self, xi: &CMatrix) -> Option<CMatrix> {
        let mut k = CMatrix::zeros(self.dim, self.dim);
        for &(d, m, o) in &self.blocks {
            let red = partial_trace_irrep(&xi.view((o, o), (d * m, d * m)).into_owned(), d, m).unscale(d as f64);
            let (vals, _) = eigh(&red);
            if vals.first().is_none_or(|&v| v <= 1e-9) {
                return None;
            }
            let s = hermitian_fn(&red, |x| 1.0 / x.sqrt());
            k.view_mut((o, o), (d * m, d * m)).copy_from(&kron(&CMatrix::identity(d, d), &s));
        }
        Some(hermitian_part(&(&k * xi * &k)))
    }
}

fn project_psd(x: &CMatrix) -> CMatrix {
    hermitian_fn(x, |v| v.max(0.0))
}

/// Dykstra's alternating projections onto `{Ξ ⪰ 0} ∩ {partial-trace constraints}`.
fn project_feasible(spec: &ConstraintSpec, y: &CMatrix) -> CMatrix {
    let n = y.nrows();
    let mut x = y.clone();
    let mut p = CMatrix::zeros(n, n);
    let mut q = CMatrix::zeros(n, n);
    for _ in 0..DYKSTRA_MAX {
        let a = spec.project_affine(&(&x + &p));
        p = &x + &p - &a;
        let b = project_psd(&(&a + &q));
        q = &a + &q - &b;
        let change = frob(&(&b - &x));
        x = b;
        if change < DYKSTRA_TOL && spec.affine_residual(&x) < DYKSTRA_TOL {
            break;
        }
    }
    x
}

#[derive(Debug, Clone, Serialize)]
pub struct AscentTrace {
    pub iterations: usize,
    /// Objective of the restored feasible candidate at each iterate.
    pub objective: Vec<f64>,
    /// Constraint residual of the raw iterate.
    pub residual: Vec<f64>,
    pub final_residual: f64,
    pub final_objective: f64,
    pub seed: u64,
}

impl AscentTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,objective,residual\n");
        for (k, (o, r)) in self.objective.iter().zip(&self.residual).enumerate() {
            let _ = writeln!(out, "{k},{o:.17e},{r:.17e}");
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    /// Best feasible `Ξ`, in the original basis.
    pub xi: CMatrix,
    pub value: f64,
    pub trace: AscentTrace,
    /// Set when the final constraint residual exceeds [`FEASIBILITY_TOL`].
    pub inconclusive: bool,
}

fn check_density(rho: &CMatrix, dim: usize) -> Result<()> {
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: rho.nrows() });
    }
    let herm = frob(&(rho - rho.adjoint()));
    if herm > 1e-10 {
        return Err(Error::InvalidDensity(format!("not Hermitian (defect {herm:.3e})")));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
        return Err(Error::InvalidDensity(format!("trace {tr} is not 1")));
    }
    let min = eigh(rho).0.first().copied().unwrap_or(0.0);
    if min < -1e-10 {
        return Err(Error::InvalidDensity(format!("negative eigenvalue {min:.3e}")));
    }
    Ok(())
}

fn start_point(spec: &ConstraintSpec, seed: u64) -> CMatrix {
    let n = spec.dim;
    let id = CMatrix::identity(n, n);
    if seed == 0 {
        return id;
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let g = CMatrix::from_fn(n, n, |_, _| {
        c(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
    });
    let perturb = (&g * g.adjoint()).unscale(n as f64);
    project_feasible(spec, &(id + perturb))
}

/// Projected ascent `Ξ ← P(Ξ + ρ/(1+k))` for `iters` steps; returns the best feasible iterate.
///
/// `seed = 0` starts from the identity; other seeds start from a projected random perturbation of it.
pub fn maximize_likelihood_numeric(
    rho: &CMatrix,
    iso: &IsotypicDecomposition,
    seed: u64,
    iters: usize,
) -> Result<OracleResult> {
    check_density(rho, iso.dim())?;
    if iters == 0 {
        return Err(Error::Validation("oracle needs at least one iteration".into()));
    }
    let spec = ConstraintSpec::from_decomposition(iso);
    let rho_b = hermitian_part(&iso.to_block_basis(rho));
    let objective = |x: &CMatrix| (&rho_b * x).trace().re;

    let mut xi = start_point(&spec, seed);
    let mut best: Option<(f64, CMatrix)> = None;
    let mut trace = AscentTrace {
        iterations: iters,
        objective: Vec::with_capacity(iters),
        residual: Vec::with_capacity(iters),
        final_residual: 0.0,
        final_objective: 0.0,
        seed,
    };
    for k in 0..iters {
        let step = 1.0 / (1.0 + k as f64);
        xi = project_feasible(&spec, &(&xi + rho_b.scale(step)));
        let res = spec.residual(&xi);
        let value = match spec.restore(&project_psd(&xi)) {
            Some(cand) => {
                let v = objective(&cand);
                if best.as_ref().is_none_or(|(b, _)| v > *b) {
                    best = Some((v, cand));
                }
                v
            }
            None => f64::NAN,
        };
        trace.objective.push(value);
        trace.residual.push(res);
    }
    trace.final_residual = *trace.residual.last().expect("iters >= 1");
    let (value, xi_b) = best.ok_or_else(|| Error::Validation("no feasible iterate".into()))?;
    trace.final_objective = value;
    Ok(OracleResult {
        xi: iso.from_block_basis(&xi_b),
        value,
        inconclusive: trace.final_residual > FEASIBILITY_TOL,
        trace,
    })
}

/// Independent ascents from each seed, merged by maximum value (ties go to the smaller seed).
pub fn maximize_multistart(
    rho: &CMatrix,
    iso: &IsotypicDecomposition,
    seeds: &[u64],
    iters: usize,
) -> Result<OracleResult> {
    let runs = crate::par_map(seeds, |&s| maximize_likelihood_numeric(rho, iso, s, iters));
    let mut best: Option<OracleResult> = None;
    for r in runs {
        let r = r?;
        let better = match &best {
            None => true,
            Some(b) => r.value > b.value || (r.value == b.value && r.trace.seed < b.trace.seed),
        };
        if better {
            best = Some(r);
        }
    }
    best.ok_or_else(|| Error::Validation("multistart needs at least one seed".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationMode {
    ClosedForm,
    MonteCarlo,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormalizationReport {
    pub mode: NormalizationMode,
    /// `‖P_Ψ ⟨|η⟩⟨η|⟩_G P_Ψ − P_Ψ‖_F`.
    pub residual: f64,
    pub projector_norm: f64,
    pub std_error: Option<f64>,
    pub samples: usize,
}

/// Checks that the covariant POVM generated by `seed` sums to the identity on the orbit support.
pub fn verify_normalization(
    seed: &CovariantSeed,
    rep: &Representation,
    iso: &IsotypicDecomposition,
    mode: NormalizationMode,
    n: usize,
    sampler: &mut HaarSampler,
) -> Result<NormalizationReport> {
    let e = outer(&seed.eta, &seed.eta);
    let p = &seed.orbit_projector;
    let (avg, std_error, samples) = match mode {
        NormalizationMode::ClosedForm => {
            let b = group_average_block_basis(&iso.to_block_basis(&e), iso);
            (iso.from_block_basis(&b), None, 0)
        }
        NormalizationMode::MonteCarlo => {
            let t = twirl_oracle(&e, rep, sampler, n)?;
            (t.mean, Some(t.std_error), t.samples)
        }
    };
    Ok(NormalizationReport {
        mode,
        residual: frob(&(p * avg * p - p)),
        projector_norm: frob(p),
        std_error,
        samples,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CovarianceReport {
    pub max_residual: f64,
    pub pairs: usize,
}

/// `max ‖U_h M(g) U_h† − M(hg)‖_F` over 20 sampled `(g, h)`, `M(g) = U_g|η⟩⟨η|U_g†`.
pub fn verify_covariance(
    seed: &CovariantSeed,
    rep: &Representation,
    sampler: &mut HaarSampler,
) -> Result<CovarianceReport> {
    let group = rep.group().clone();
    let povm = |u: &CMatrix| {
        let v = u * &seed.eta;
        outer(&v, &v)
    };
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let g = sampler.sample();
        let h = sampler.sample();
        let uh = rep.evaluate(&h)?;
        let lhs = &uh * povm(&rep.evaluate(&g)?) * uh.adjoint();
        let rhs = povm(&rep.evaluate(&group.compose(&h, &g)?)?);
        worst = worst.max(frob(&(lhs - rhs)));
    }
    Ok(CovarianceReport { max_residual: worst, pairs: 20 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::{decompose_state, optimal_likelihood, optimal_seed};
    use crate::grouprep::{GroupElement, GroupSpec};
    use crate::isotypic::isotypic_decompose;
    use crate::linalg::{basis_vector, CVector};

    fn spin_pair() -> (Representation, IsotypicDecomposition) {
        let rep = Representation::spin(1).tensor(&Representation::spin(1)).unwrap();
        let iso = isotypic_decompose(&rep).unwrap();
        (rep, iso)
    }

    fn pure(psi: &CVector) -> CMatrix {
        outer(psi, psi)
    }

    #[test]
    fn up_down_reaches_analytic_value() {
        let (_, iso) = spin_pair();
        let r = maximize_likelihood_numeric(&pure(&basis_vector(4, 1)), &iso, 0, 5000).unwrap();
        let target = (1.0 + 3f64.sqrt()).powi(2) / 2.0;
        assert!(!r.inconclusive, "residual {}", r.trace.final_residual);
        assert!((r.value - target).abs() < 1e-4, "{} vs {target}", r.value);
        assert!(r.value <= target + 1e-6);
    }

    #[test]
    fn up_up_reaches_three() {
        let (_, iso) = spin_pair();
        let r = maximize_likelihood_numeric(&pure(&basis_vector(4, 0)), &iso, 0, 5000).unwrap();
        assert!((r.value - 3.0).abs() < 1e-4, "{}", r.value);
    }

    #[test]
    fn maximally_mixed_z3_is_one() {
        let rep = Representation::regular(&GroupSpec::cyclic(3)).unwrap();
        let iso = isotypic_decompose(&rep).unwrap();
        let rho = CMatrix::identity(3, 3).unscale(3.0);
        let r = maximize_likelihood_numeric(&rho, &iso, 0, 200).unwrap();
        assert!((r.value - 1.0).abs() < 1e-4);
    }

    #[test]
    fn identical_seeds_give_identical_traces() {
        let (_, iso) = spin_pair();
        let rho = pure(&basis_vector(4, 1));
        let a = maximize_likelihood_numeric(&rho, &iso, 7, 50).unwrap();
        let b = maximize_likelihood_numeric(&rho, &iso, 7, 50).unwrap();
        assert_eq!(a.trace.objective, b.trace.objective);
        assert!(a.trace.to_csv().starts_with("iteration,objective,residual\n"));
    }

    #[test]
    fn invalid_density_is_rejected() {
        let (_, iso) = spin_pair();
        let rho = CMatrix::identity(4, 4);
        assert!(matches!(
            maximize_likelihood_numeric(&rho, &iso, 0, 10),
            Err(Error::InvalidDensity(_))
        ));
    }

    #[test]
    fn normalization_closed_form_and_fault() {
        let (rep, iso) = spin_pair();
        let psi = basis_vector(4, 1);
        let seed = optimal_seed(&decompose_state(&psi, &iso).unwrap(), &iso).unwrap();
        let mut s = HaarSampler::new(GroupSpec::Su2, 1);
        let r = verify_normalization(&seed, &rep, &iso, NormalizationMode::ClosedForm, 0, &mut s).unwrap();
        assert!(r.residual <= 1e-12);
        let mut bad = seed.clone();
        bad.eta *= c(1.1, 0.0);
        let r = verify_normalization(&bad, &rep, &iso, NormalizationMode::ClosedForm, 0, &mut s).unwrap();
        assert!((r.residual / r.projector_norm - 0.21).abs() < 1e-9);
    }

    #[test]
    fn normalization_monte_carlo_within_four_sigma() {
        let (rep, iso) = spin_pair();
        let psi = basis_vector(4, 1);
        let seed = optimal_seed(&decompose_state(&psi, &iso).unwrap(), &iso).unwrap();
        let mut s = HaarSampler::new(GroupSpec::Su2, 42);
        let r = verify_normalization(&seed, &rep, &iso, NormalizationMode::MonteCarlo, 100_000, &mut s).unwrap();
        assert!(r.residual <= 4.0 * r.std_error.unwrap(), "{} vs se {:?}", r.residual, r.std_error);
    }

    #[test]
    fn covariance_holds_and_fault_is_caught() {
        let (rep, iso) = spin_pair();
        let psi = basis_vector(4, 1);
        let seed = optimal_seed(&decompose_state(&psi, &iso).unwrap(), &iso).unwrap();
        let r = verify_covariance(&seed, &rep, &mut HaarSampler::new(GroupSpec::Su2, 3)).unwrap();
        assert!(r.max_residual <= 1e-9);

        let inner = rep.clone();
        let broken = Representation::from_fn_unchecked(GroupSpec::Su2, 4, false, move |g| {
            // squares the parameter: not a homomorphism
            let GroupElement::Su2(q) = g else { unreachable!() };
            inner.evaluate(&GroupElement::Su2(q.mul(q))).unwrap()
        });
        let r = verify_covariance(&seed, &broken, &mut HaarSampler::new(GroupSpec::Su2, 3)).unwrap();
        assert!(r.max_residual > 1e-3);
    }

    #[test]
    fn z3_conjugation_family_is_covariant() {
        let g = GroupSpec::cyclic(3);
        let rep = Representation::regular(&g).unwrap();
        let seed = CovariantSeed {
            eta: basis_vector(3, 0),
            orbit_projector: CMatrix::identity(3, 3),
            origin: crate::estimation::SeedOrigin::NumericOracle,
        };
        let r = verify_covariance(&seed, &rep, &mut HaarSampler::new(g, 0)).unwrap();
        assert!(r.max_residual <= 1e-12);
    }

    #[test]
    fn mixed_state_does_not_beat_best_pure() {
        let (_, iso) = spin_pair();
        let a = basis_vector(4, 0);
        let b = basis_vector(4, 1);
        let rho = (pure(&a) * c(0.3, 0.0)) + (pure(&b) * c(0.7, 0.0));
        let r = maximize_likelihood_numeric(&rho, &iso, 0, 500).unwrap();
        let best = [a, b]
            .iter()
            .map(|p| optimal_likelihood(&decompose_state(p, &iso).unwrap()))
            .fold(0.0, f64::max);
        assert!(r.value <= best + 1e-6);
    }
}
