//! Two-mode displacement estimation on truncated Fock spaces.
//!
//! Single-mode operators are dense `(N+1)×(N+1)` matrices. Two-mode states are
//! `(N+1)×(N+1)` arrays `Ψ[n1, n2]` (flattened as `n1·(N+1) + n2`), and a
//! product operator `A ⊗ B` acts as `A Ψ Bᵀ`. The beamsplitter conserves the
//! total photon number and is stored as one exponential per sector.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::json::pair;
use crate::linalg::{c, CMatrix, CVector, C64};
use crate::quadrature::{displacement_elements, gauss_legendre, polar_rule};

pub const MIN_CUTOFF: usize = 8;
/// Largest squeezing tail weight `x^{2(N+1)}` accepted by the squeezed scenario.
pub const SQUEEZE_TAIL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSpace {
    cutoff: usize,
}

impl FockSpace {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff < MIN_CUTOFF {
            return Err(Error::Validation(format!("cutoff {cutoff} below the minimum {MIN_CUTOFF}")));
        }
        Ok(FockSpace { cutoff })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Single-mode dimension `N + 1`.
    pub fn levels(&self) -> usize {
        self.cutoff + 1
    }

    /// Validity radius `N/8` for displacement arguments.
    pub fn max_displacement(&self) -> f64 {
        self.cutoff as f64 / 8.0
    }

    fn check_range(&self, alpha: C64) -> Result<()> {
        let max = self.max_displacement();
        // slack for quadrature nodes placed exactly on the boundary
        if alpha.norm() > max * (1.0 + 1e-12) {
            return Err(Error::Range(alpha.norm(), max));
        }
        Ok(())
    }

    pub fn annihilation(&self) -> CMatrix {
        let l = self.levels();
        let mut a = CMatrix::zeros(l, l);
        for n in 1..l {
            a[(n - 1, n)] = c((n as f64).sqrt(), 0.0);
        }
        a
    }

    pub fn vacuum(&self) -> CVector {
        let mut v = CVector::zeros(self.levels());
        v[0] = c(1.0, 0.0);
        v
    }
}

fn displacement_unchecked(alpha: C64, space: &FockSpace) -> CMatrix {
    let a = space.annihilation();
    let gen = a.adjoint() * alpha - a * alpha.conj();
    gen.exp()
}

/// Truncated `D(α) = exp(αa† − α*a)`; `|α|` must not exceed `N/8`.
pub fn displacement(alpha: C64, space: &FockSpace) -> Result<CMatrix> {
    space.check_range(alpha)?;
    Ok(displacement_unchecked(alpha, space))
}

/// Largest deviation of truncated `D(α)` from the exact matrix elements on levels `0..=N/2`.
pub fn displacement_truncation_defect(alpha: C64, space: &FockSpace) -> Result<f64> {
    let d = displacement(alpha, space)?;
    let l = space.levels();
    let exact = displacement_elements(alpha, space.cutoff());
    let half = space.cutoff() / 2;
    let mut worst = 0.0f64;
    for i in 0..=half {
        for j in 0..=half {
            worst = worst.max((d[(i, j)] - exact[i * l + j]).norm());
        }
    }
    Ok(worst)
}

/// The square-integrable irrep `α ↦ D(s·α)`, validity checked on the group parameter `α`.
///
/// Uses `D(re^{iθ}) = R(θ) D(r) R(θ)†` with `R(θ) = e^{iθa†a}`, caching `D(s·r)` per radius.
#[derive(Debug)]
pub struct WeylIrrep {
    pub scale: f64,
    pub space: FockSpace,
    radial: Mutex<HashMap<u64, Arc<CMatrix>>>,
}

impl WeylIrrep {
    pub fn new(scale: f64, space: FockSpace) -> Self {
        WeylIrrep { scale, space, radial: Mutex::new(HashMap::new()) }
    }

    pub fn evaluate(&self, alpha: C64) -> Result<CMatrix> {
        self.space.check_range(alpha)?;
        let r = alpha.norm();
        let theta = alpha.arg();
        let key = r.to_bits();
        let cached = self.radial.lock().expect("cache lock").get(&key).cloned();
        let base = match cached {
            Some(m) => m,
            None => {
                let m = Arc::new(displacement_unchecked(c(r * self.scale, 0.0), &self.space));
                self.radial.lock().expect("cache lock").insert(key, m.clone());
                m
            }
        };
        Ok(CMatrix::from_fn(base.nrows(), base.ncols(), |i, j| {
            base[(i, j)] * C64::from_polar(1.0, theta * (i as f64 - j as f64))
        }))
    }
}

/// `V = exp[π/4 (a₁†a₂ − a₁a₂†)]`, one exponential per total-photon-number sector.
///
/// With this sign `V|α, α⟩ = |√2α, 0⟩`, so `D(α)⊗D(α) = V†(D(√2α)⊗1)V`.
#[derive(Debug, Clone)]
pub struct BeamSplitter {
    levels: usize,
    /// `(lowest n1, sector unitary)` for total photon number `s = index`.
    sectors: Vec<(usize, CMatrix)>,
}

pub fn beamsplitter_v(space: &FockSpace) -> BeamSplitter {
    let n = space.cutoff();
    let sectors = (0..=2 * n)
        .map(|s| {
            let lo = s.saturating_sub(n);
            let hi = s.min(n);
            let size = hi - lo + 1;
            let mut g = CMatrix::zeros(size, size);
            for k in 0..size {
                let n1 = lo + k;
                let n2 = s - n1;
                if k + 1 < size {
                    // a₁†a₂ |n1, n2⟩ = √((n1+1) n2) |n1+1, n2−1⟩
                    g[(k + 1, k)] += c(((n1 + 1) as f64 * n2 as f64).sqrt(), 0.0);
                }
                if k > 0 {
                    // −a₁a₂† |n1, n2⟩ = −√(n1 (n2+1)) |n1−1, n2+1⟩
                    g[(k - 1, k)] -= c((n1 as f64 * (n2 + 1) as f64).sqrt(), 0.0);
                }
            }
            (lo, (g * c(FRAC_PI_4, 0.0)).exp())
        })
        .collect();
    BeamSplitter { levels: space.levels(), sectors }
}

impl BeamSplitter {
    fn apply_with(&self, psi: &CMatrix, adjoint: bool) -> CMatrix {
        let l = self.levels;
        let mut out = CMatrix::zeros(l, l);
        for (s, (lo, u)) in self.sectors.iter().enumerate() {
            let size = u.nrows();
            let v = CVector::from_fn(size, |k, _| psi[(lo + k, s - lo - k)]);
            let w = if adjoint { u.adjoint() * v } else { u * v };
            for k in 0..size {
                out[(lo + k, s - lo - k)] = w[k];
            }
        }
        out
    }

    pub fn apply(&self, psi: &CMatrix) -> CMatrix {
        self.apply_with(psi, false)
    }

    pub fn apply_adjoint(&self, psi: &CMatrix) -> CMatrix {
        self.apply_with(psi, true)
    }

    /// Largest sector unitarity defect.
    pub fn unitarity_defect(&self) -> f64 {
        self.sectors
            .iter()
            .map(|(_, u)| crate::linalg::unitarity_defect(u))
            .fold(0.0, f64::max)
    }
}

/// `A ⊗ B` applied to a two-mode array.
pub fn apply_local(a: &CMatrix, b: &CMatrix, psi: &CMatrix) -> CMatrix {
    a * psi * b.transpose()
}

/// Product state `u ⊗ v` as a two-mode array.
pub fn product_state(u: &CVector, v: &CVector) -> CMatrix {
    u * v.transpose()
}

/// Flattened two-mode vector, index `n1·(N+1) + n2`.
pub fn flatten(psi: &CMatrix) -> CVector {
    CVector::from_iterator(psi.len(), psi.transpose().iter().copied())
}

/// `max ‖V†(D(√2α)⊗1)V e − D(α)⊗D(α) e‖` over basis inputs with `n1 + n2 ≤ N/4`.
pub fn intertwining_residual(alpha: C64, space: &FockSpace, v: &BeamSplitter) -> Result<f64> {
    let d = displacement(alpha, space)?;
    let d2 = WeylIrrep::new(SQRT_2, *space).evaluate(alpha)?;
    let id = CMatrix::identity(space.levels(), space.levels());
    let l = space.levels();
    let limit = space.cutoff() / 4;
    let mut worst = 0.0f64;
    for n1 in 0..=limit {
        for n2 in 0..=(limit - n1) {
            let mut e = CMatrix::zeros(l, l);
            e[(n1, n2)] = c(1.0, 0.0);
            let lhs = v.apply_adjoint(&apply_local(&d2, &id, &v.apply(&e)));
            let rhs = apply_local(&d, &d, &e);
            worst = worst.max(crate::linalg::frob(&(lhs - rhs)));
        }
    }
    Ok(worst)
}

/// `(∫ d²α/π |⟨ψ|U_α|φ⟩|²)^{−1}` by polar quadrature on `|α| ≤ N/8`.
pub fn formal_dimension_numeric(
    evaluator: &(dyn Fn(C64) -> Result<CMatrix> + Sync),
    space: &FockSpace,
    radial_order: usize,
    psi: &CVector,
    phi: &CVector,
) -> Result<f64> {
    let r_max = space.max_displacement();
    let rule = polar_rule(radial_order, 64, r_max);
    let values = crate::par_map(&rule, |(alpha, _)| -> Result<f64> {
        let u = evaluator(*alpha)?;
        Ok(psi.dotc(&(u * phi)).norm_sqr())
    });
    let values = values.into_iter().collect::<Result<Vec<f64>>>()?;
    let integral: f64 = values.iter().zip(&rule).map(|(v, (_, w))| v * w).sum::<f64>() / PI;
    let peak = values.iter().fold(0.0f64, |m, v| m.max(*v));
    let edge = (0..64)
        .map(|k| {
            let a = C64::from_polar(r_max, 2.0 * PI * k as f64 / 64.0);
            evaluator(a).map(|u| psi.dotc(&(u * phi)).norm_sqr())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0f64, f64::max);
    if edge > 1e-6 * peak {
        return Err(Error::Truncation(format!(
            "integrand at R_max = {r_max} is {edge:.3e}, peak {peak:.3e}"
        )));
    }
    Ok(1.0 / integral)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CvKind {
    Identical,
    Conjugated,
    Squeezed { x: f64 },
}

impl CvKind {
    pub fn name(&self) -> &'static str {
        match self {
            CvKind::Identical => "identical",
            CvKind::Conjugated => "conjugated",
            CvKind::Squeezed { .. } => "squeezed",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CvScenario {
    pub kind: CvKind,
    pub space: FockSpace,
    /// True displacement `α` of the input.
    pub alpha: C64,
    /// Estimates `α̂` at which the density is evaluated.
    pub grid: Vec<C64>,
}

impl CvScenario {
    /// Default scenario: `α = 0.5` and a 5×5 grid `α̂ = α + δ`, `Re δ, Im δ ∈ {−1, −½, 0, ½, 1}`.
    pub fn new(kind: CvKind, cutoff: usize) -> Result<Self> {
        let alpha = c(0.5, 0.0);
        let steps = [-1.0, -0.5, 0.0, 0.5, 1.0];
        let grid = steps
            .iter()
            .flat_map(|&re| steps.iter().map(move |&im| alpha + c(re, im)))
            .collect();
        Self::with_grid(kind, cutoff, alpha, grid)
    }

    pub fn with_grid(kind: CvKind, cutoff: usize, alpha: C64, grid: Vec<C64>) -> Result<Self> {
        let space = FockSpace::new(cutoff)?;
        for z in grid.iter().chain(std::iter::once(&alpha)) {
            space.check_range(*z)?;
        }
        if let CvKind::Squeezed { x } = kind {
            if !(0.0..1.0).contains(&x) {
                return Err(Error::Validation(format!("squeezing x = {x} outside [0, 1)")));
            }
        }
        Ok(CvScenario { kind, space, alpha, grid })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridPoint {
    pub alpha_hat: [f64; 2],
    pub density: f64,
    pub target: f64,
    pub abs_err: f64,
    /// Density of the second optimal POVM (identical states only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density_alt: Option<f64>,
    /// Set when the evaluated vector has weight above the truncation tolerance near the cutoff.
    pub truncation_flag: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub kind: &'static str,
    pub cutoff: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    pub alpha: [f64; 2],
    pub grid: Vec<GridPoint>,
    pub likelihood: f64,
    pub target_likelihood: f64,
    pub max_abs_err: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_povm_discrepancy: Option<f64>,
    pub flagged_points: Vec<usize>,
}

impl ScenarioReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("alpha_hat_re,alpha_hat_im,density,target,abs_err\n");
        for p in &self.grid {
            out.push_str(&format!(
                "{},{},{:.17e},{:.17e},{:.17e}\n",
                p.alpha_hat[0], p.alpha_hat[1], p.density, p.target, p.abs_err
            ));
        }
        out
    }
}

/// Weight of a two-mode array on levels above `3N/4` in either mode.
fn edge_weight(psi: &CMatrix) -> f64 {
    let l = psi.nrows();
    let start = 3 * (l - 1) / 4;
    let mut w = 0.0;
    for i in 0..l {
        for j in 0..l {
            if i > start || j > start {
                w += psi[(i, j)].norm_sqr();
            }
        }
    }
    w
}

const EDGE_TOL: f64 = 1e-10;

/// All-ones diagonal `Σ_n |n, n⟩`, unnormalized.
fn diagonal_ones(l: usize) -> CMatrix {
    CMatrix::identity(l, l)
}

fn finish(
    s: &CvScenario,
    x: Option<f64>,
    points: Vec<(f64, Option<f64>, f64, bool)>,
    likelihood: f64,
    target_likelihood: f64,
) -> ScenarioReport {
    let grid: Vec<GridPoint> = s
        .grid
        .iter()
        .zip(points)
        .map(|(ah, (density, alt, target, flag))| GridPoint {
            alpha_hat: pair(*ah),
            density,
            target,
            abs_err: (density - target).abs(),
            density_alt: alt,
            truncation_flag: flag,
        })
        .collect();
    let max_abs_err = grid.iter().map(|p| p.abs_err).fold(0.0, f64::max);
    let max_povm_discrepancy = grid
        .iter()
        .filter_map(|p| p.density_alt.map(|a| (a - p.density).abs()))
        .reduce(f64::max);
    let flagged_points = grid.iter().enumerate().filter(|(_, p)| p.truncation_flag).map(|(i, _)| i).collect();
    ScenarioReport {
        kind: s.kind.name(),
        cutoff: s.space.cutoff(),
        x,
        alpha: pair(s.alpha),
        grid,
        likelihood,
        target_likelihood,
        max_abs_err,
        max_povm_discrepancy,
        flagged_points,
    }
}

/// `D(α̂)†D(α)|0⟩` for one mode.
fn relative_coherent(d_alpha: &CMatrix, alpha_hat: C64, space: &FockSpace) -> Result<CVector> {
    let d_hat = displacement(alpha_hat, space)?;
    Ok(d_hat.adjoint() * (d_alpha * space.vacuum()))
}

/// Identical coherent states `|α⟩|α⟩` with both optimal POVMs
/// `M = 2 D⊗²(V†|1⟩⟩⟨⟨1|V)D†⊗²` and `M̃ = 2 D⊗²(V†(|0⟩⟨0|⊗1)V)D†⊗²`.
pub fn identical_scenario(s: &CvScenario) -> Result<ScenarioReport> {
    if s.kind != CvKind::Identical {
        return Err(Error::Validation("identical_scenario needs kind = identical".into()));
    }
    let space = s.space;
    let v = beamsplitter_v(&space);
    let d_alpha = displacement(s.alpha, &space)?;
    let eval = |alpha_hat: &C64| -> Result<(f64, Option<f64>, f64, bool)> {
        let u = relative_coherent(&d_alpha, *alpha_hat, &space)?;
        let phi = product_state(&u, &u);
        let vphi = v.apply(&phi);
        let m = 2.0 * vphi.diagonal().sum().norm_sqr();
        let m_alt = 2.0 * (0..space.levels()).map(|n| vphi[(0, n)].norm_sqr()).sum::<f64>();
        let delta = (alpha_hat - s.alpha).norm_sqr();
        Ok((m, Some(m_alt), 2.0 * (-2.0 * delta).exp(), edge_weight(&phi) > EDGE_TOL))
    };
    let points = crate::par_map(&s.grid, eval).into_iter().collect::<Result<Vec<_>>>()?;
    let likelihood = eval(&s.alpha)?.0;
    Ok(finish(s, None, points, likelihood, 2.0))
}

/// Seed `2 Σ_n (−1)ⁿ |n, n⟩` of the conjugated-pair POVM, as a two-mode array.
pub fn conjugated_seed(space: &FockSpace) -> CMatrix {
    let l = space.levels();
    CMatrix::from_fn(l, l, |i, j| if i == j { c(if i % 2 == 0 { 2.0 } else { -2.0 }, 0.0) } else { c(0.0, 0.0) })
}

/// Conjugated coherent states `|α⟩|α*⟩` under `α ↦ D(α)⊗D(α)*`.
pub fn conjugated_scenario(s: &CvScenario) -> Result<ScenarioReport> {
    if s.kind != CvKind::Conjugated {
        return Err(Error::Validation("conjugated_scenario needs kind = conjugated".into()));
    }
    let space = s.space;
    let eta = conjugated_seed(&space);
    let d_alpha = displacement(s.alpha, &space)?;
    let eval = |alpha_hat: &C64| -> Result<(f64, Option<f64>, f64, bool)> {
        let d_hat = displacement(*alpha_hat, &space)?;
        let input = product_state(&(&d_alpha * space.vacuum()), &(d_alpha.conjugate() * space.vacuum()));
        let back = apply_local(&d_hat.adjoint(), &d_hat.conjugate().adjoint(), &input);
        let amp: C64 = eta.iter().zip(back.iter()).map(|(e, b)| e.conj() * b).sum();
        let delta = (alpha_hat - s.alpha).norm_sqr();
        Ok((amp.norm_sqr(), None, 4.0 * (-4.0 * delta).exp(), edge_weight(&back) > EDGE_TOL))
    };
    let points = crate::par_map(&s.grid, eval).into_iter().collect::<Result<Vec<_>>>()?;
    let likelihood = eval(&s.alpha)?.0;
    Ok(finish(s, None, points, likelihood, 4.0))
}

/// Squeezed input `V†√(1−x²) Σ xⁿ |n, n⟩` (renormalized) with seed `√2 V† Σ |n, n⟩`.
pub fn squeezed_scenario(s: &CvScenario) -> Result<ScenarioReport> {
    let CvKind::Squeezed { x } = s.kind else {
        return Err(Error::Validation("squeezed_scenario needs kind = squeezed".into()));
    };
    let space = s.space;
    let l = space.levels();
    let tail = x.powi(2 * (space.cutoff() as i32 + 1));
    if tail > SQUEEZE_TAIL_TOL {
        return Err(Error::Truncation(format!(
            "squeezing x = {x} leaves tail weight {tail:.3e} beyond cutoff {}",
            space.cutoff()
        )));
    }
    let v = beamsplitter_v(&space);
    let mut tms = CMatrix::zeros(l, l);
    for n in 0..l {
        tms[(n, n)] = c(x.powi(n as i32), 0.0);
    }
    let norm = crate::linalg::frob(&tms);
    let input = v.apply_adjoint(&tms.unscale(norm));
    let eta = v.apply_adjoint(&(diagonal_ones(l) * c(SQRT_2, 0.0)));
    let k = 2.0 * (1.0 + x) / (1.0 - x);
    let d_alpha = displacement(s.alpha, &space)?;
    let eval = |alpha_hat: &C64| -> Result<(f64, Option<f64>, f64, bool)> {
        let d_hat = displacement(*alpha_hat, &space)?;
        let moved = apply_local(&d_alpha, &d_alpha, &input);
        let back = apply_local(&d_hat.adjoint(), &d_hat.adjoint(), &moved);
        let amp: C64 = eta.iter().zip(back.iter()).map(|(e, b)| e.conj() * b).sum();
        let delta = (alpha_hat - s.alpha).norm_sqr();
        Ok((amp.norm_sqr(), None, k * (-k * delta).exp(), edge_weight(&moved) > 1e-8))
    };
    let points = crate::par_map(&s.grid, eval).into_iter().collect::<Result<Vec<_>>>()?;
    let overlap: C64 = eta.iter().zip(input.iter()).map(|(e, b)| e.conj() * b).sum();
    Ok(finish(s, Some(x), points, overlap.norm_sqr(), k))
}

pub fn run_scenario(s: &CvScenario) -> Result<ScenarioReport> {
    match s.kind {
        CvKind::Identical => identical_scenario(s),
        CvKind::Conjugated => conjugated_scenario(s),
        CvKind::Squeezed { .. } => squeezed_scenario(s),
    }
}

/// `∫ d²β/π |D(β)⟩⟩` from exact matrix elements, as a two-mode array.
///
/// Radial Gauss-Legendre on `[0, 2√N + 6]` times a 64-point angular trapezoid.
pub fn conjugated_seed_quadrature(space: &FockSpace, radial_order: usize) -> CMatrix {
    let n = space.cutoff();
    let l = space.levels();
    let r_max = 2.0 * (n as f64).sqrt() + 6.0;
    let rule = polar_rule(radial_order, 64, r_max);
    let parts = crate::par_map(&rule, |(beta, w)| {
        let e = displacement_elements(*beta, n);
        CMatrix::from_fn(l, l, |i, j| e[i * l + j] * (w / PI))
    });
    parts.into_iter().fold(CMatrix::zeros(l, l), |acc, m| acc + m)
}

/// `∫ d²α̂/π p(α̂|α)` over `|α̂ − α| ≤ radius`.
pub fn density_normalization(kind: CvKind, cutoff: usize, radius: f64, radial: usize, angular: usize) -> Result<f64> {
    let alpha = c(0.5, 0.0);
    let rule = polar_rule(radial, angular, radius);
    let grid: Vec<C64> = rule.iter().map(|(d, _)| alpha + d).collect();
    let s = CvScenario::with_grid(kind, cutoff, alpha, grid)?;
    let report = run_scenario(&s)?;
    Ok(report.grid.iter().zip(&rule).map(|(p, (_, w))| p.density * w).sum::<f64>() / PI)
}

/// Least-squares fit of `log p = log A − k|δ|²`; returns `1/k`, proportional to the Gaussian variance.
pub fn fitted_width(report: &ScenarioReport) -> f64 {
    let alpha = C64::new(report.alpha[0], report.alpha[1]);
    let pts: Vec<(f64, f64)> = report
        .grid
        .iter()
        .filter(|p| p.density > 1e-12)
        .map(|p| ((C64::new(p.alpha_hat[0], p.alpha_hat[1]) - alpha).norm_sqr(), p.density.ln()))
        .collect();
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in &pts {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    -sxx / sxy
}

/// Radial Gauss-Legendre rule helper re-exported for callers building custom grids.
pub fn radial_nodes(order: usize, r_max: f64) -> (Vec<f64>, Vec<f64>) {
    gauss_legendre(order, 0.0, r_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frob;

    fn space(n: usize) -> FockSpace {
        FockSpace::new(n).unwrap()
    }

    #[test]
    fn zero_displacement_is_identity() {
        let s = space(12);
        let d = displacement(c(0.0, 0.0), &s).unwrap();
        assert!(frob(&(d - CMatrix::identity(13, 13))) < 1e-15);
    }

    #[test]
    fn vacuum_overlap_at_one() {
        let d = displacement(c(1.0, 0.0), &space(40)).unwrap();
        assert!((d[(0, 0)].re - (-0.5f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn inverse_displacement() {
        let s = space(40);
        let a = c(0.7, 0.3);
        let p = displacement(a, &s).unwrap() * displacement(-a, &s).unwrap();
        assert!(frob(&(p - CMatrix::identity(41, 41))) < 1e-8);
        assert!(displacement_truncation_defect(a, &s).unwrap() < 1e-8);
    }

    #[test]
    fn out_of_range_displacement() {
        assert!(matches!(displacement(c(2.0, 0.0), &space(8)), Err(Error::Range(..))));
    }

    #[test]
    fn beamsplitter_basics() {
        let s = space(40);
        let v = beamsplitter_v(&s);
        assert!(v.unitarity_defect() < 1e-10);
        let mut vac = CMatrix::zeros(41, 41);
        vac[(0, 0)] = c(1.0, 0.0);
        assert!(frob(&(v.apply(&vac) - &vac)) < 1e-10);
        assert!(intertwining_residual(c(0.5, 0.0), &s, &v).unwrap() < 1e-6);
    }

    #[test]
    fn beamsplitter_sends_pair_to_first_mode() {
        let s = space(40);
        let v = beamsplitter_v(&s);
        let a = c(0.6, -0.2);
        let coh = displacement(a, &s).unwrap() * s.vacuum();
        let out = v.apply(&product_state(&coh, &coh));
        let expect = product_state(&(displacement(a * SQRT_2, &s).unwrap() * s.vacuum()), &s.vacuum());
        assert!(frob(&(out - expect)) < 1e-8);
    }

    #[test]
    fn formal_dimensions() {
        let s = space(40);
        let vac = s.vacuum();
        let two = WeylIrrep::new(SQRT_2, s);
        let d2 = formal_dimension_numeric(&|a| two.evaluate(a), &s, 64, &vac, &vac).unwrap();
        assert!((d2 - 2.0).abs() < 1e-3, "{d2}");
        let one = WeylIrrep::new(1.0, s);
        let d1 = formal_dimension_numeric(&|a| one.evaluate(a), &s, 64, &vac, &vac).unwrap();
        assert!((d1 - 1.0).abs() < 1e-3, "{d1}");
        let mut e1 = CVector::zeros(41);
        e1[1] = c(1.0, 0.0);
        let d2b = formal_dimension_numeric(&|a| two.evaluate(a), &s, 64, &e1, &vac).unwrap();
        assert!((d2b - 2.0).abs() < 1e-3, "{d2b}");
    }

    #[test]
    fn identical_density_values() {
        let sc = CvScenario::new(CvKind::Identical, 40).unwrap();
        let r = identical_scenario(&sc).unwrap();
        assert!((r.likelihood - 2.0).abs() < 1e-3);
        assert!(r.max_abs_err < 1e-3);
        assert!(r.max_povm_discrepancy.unwrap() < 1e-3);
        let at_one = r.grid.iter().find(|p| (p.alpha_hat[0] - 1.5).abs() < 1e-12 && p.alpha_hat[1] == 0.0).unwrap();
        assert!((at_one.density - 2.0 * (-2.0f64).exp()).abs() < 1e-3);
    }

    #[test]
    fn conjugated_density_values() {
        let sc = CvScenario::new(CvKind::Conjugated, 40).unwrap();
        let r = conjugated_scenario(&sc).unwrap();
        assert!((r.likelihood - 4.0).abs() < 1e-3);
        assert!(r.max_abs_err < 1e-3);
    }

    #[test]
    fn squeezed_likelihoods() {
        for (x, want) in [(0.0, 2.0), (0.5, 6.0), (0.6, 8.0)] {
            let sc = CvScenario::new(CvKind::Squeezed { x }, 40).unwrap();
            let r = squeezed_scenario(&sc).unwrap();
            assert!((r.likelihood - want).abs() <= 1e-3 * want, "x={x}: {}", r.likelihood);
        }
        let sc = CvScenario::new(CvKind::Squeezed { x: 0.8 }, 40).unwrap();
        assert!(matches!(squeezed_scenario(&sc), Err(Error::Truncation(_))));
    }

    #[test]
    fn conjugated_seed_matches_direct_integral() {
        let s = space(20);
        let q = conjugated_seed_quadrature(&s, 160);
        let diff = frob(&(q - conjugated_seed(&s)));
        assert!(diff <= 1e-2, "{diff}");
    }
}
