//! Gauss-Legendre rules and closed-form displacement matrix elements.

use std::f64::consts::PI;

use crate::linalg::{c, C64};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = mid - half * x;
        nodes[n - 1 - i] = mid + half * x;
        weights[i] = half * w;
        weights[n - 1 - i] = half * w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// Generalized Laguerre polynomials `L_k^{(a)}(x)` for `k = 0..=n`.
fn laguerre_all(n: usize, a: f64, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n >= 1 {
        out.push(1.0 + a - x);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * out[k] - (kf + a) * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

/// `⟨i|D(β)|j⟩` of the untruncated displacement, for all `i, j ≤ n_max`, row-major.
pub fn displacement_elements(beta: C64, n_max: usize) -> Vec<C64> {
    let l = n_max + 1;
    let r2 = beta.norm_sqr();
    let gauss = (-r2 / 2.0).exp();
    let mut out = vec![c(0.0, 0.0); l * l];
    for diff in 0..l {
        let lag = laguerre_all(n_max - diff, diff as f64, r2);
        // element (j + diff, j) = √(j!/(j+diff)!) β^diff e^{−|β|²/2} L_j^{(diff)}(|β|²)
        let pow = beta.powu(diff as u32);
        let pow_neg = (-beta.conj()).powu(diff as u32);
        let mut ratio = 1.0f64; // √(j!/(j+diff)!)
        for k in 1..=diff {
            ratio /= (k as f64).sqrt();
        }
        for j in 0..l - diff {
            if j > 0 {
                ratio *= (j as f64 / (j + diff) as f64).sqrt();
            }
            let base = ratio * gauss * lag[j];
            out[(j + diff) * l + j] = pow * base;
            if diff > 0 {
                out[j * l + j + diff] = pow_neg * base;
            }
        }
    }
    out
}

/// Polar rule on the disc of radius `r_max`: radial Gauss-Legendre × angular trapezoid.
///
/// Returns `(β, weight)` pairs with weights for `∫ d²β`.
pub fn polar_rule(radial: usize, angular: usize, r_max: f64) -> Vec<(C64, f64)> {
    let (nodes, weights) = gauss_legendre(radial, 0.0, r_max);
    let dtheta = 2.0 * PI / angular as f64;
    let mut out = Vec::with_capacity(radial * angular);
    for (r, w) in nodes.iter().zip(&weights) {
        for k in 0..angular {
            out.push((C64::from_polar(*r, k as f64 * dtheta), w * r * dtheta));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(10, 0.0, 2.0);
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(19)).sum();
        assert!((integral - 2f64.powi(20) / 20.0).abs() < 1e-9 * 2f64.powi(20) / 20.0);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_on_disc() {
        let total: f64 = polar_rule(80, 64, 8.0).iter().map(|(b, w)| w * (-b.norm_sqr()).exp()).sum();
        assert!((total / PI - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vacuum_element_is_gaussian() {
        let beta = c(0.7, -0.4);
        let e = displacement_elements(beta, 5);
        assert!((e[0] - c((-beta.norm_sqr() / 2.0).exp(), 0.0)).norm() < 1e-15);
        // ⟨1|D|0⟩ = β e^{−|β|²/2}
        assert!((e[6] - beta * (-beta.norm_sqr() / 2.0).exp()).norm() < 1e-15);
        // ⟨0|D|1⟩ = −β* e^{−|β|²/2}
        assert!((e[1] + beta.conj() * (-beta.norm_sqr() / 2.0).exp()).norm() < 1e-15);
    }
}
