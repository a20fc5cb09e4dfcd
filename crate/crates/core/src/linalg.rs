//! Dense complex linear algebra helpers shared by every module.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

pub fn direct_sum(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let n = a.nrows() + b.nrows();
    let mut out = CMatrix::zeros(n, n);
    out.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), (b.nrows(), b.ncols()))
        .copy_from(b);
    out
}

pub fn frob(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// ‖U†U − 1‖_F
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    frob(&(u.adjoint() * u - CMatrix::identity(n, n)))
}

pub fn hermiticity_defect(h: &CMatrix) -> f64 {
    frob(&(h - h.adjoint()))
}

pub fn hermitian_part(h: &CMatrix) -> CMatrix {
    (h + h.adjoint()).scale(0.5)
}

/// Eigendecomposition of the Hermitian part of `h`, eigenvalues ascending.
pub fn eigh(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = hermitian_part(h).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    (values, vectors)
}

/// Applies `f` to the spectrum of a Hermitian matrix.
pub fn hermitian_fn(h: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = eigh(h);
    let n = vals.len();
    let mut scaled = vecs.clone();
    for k in 0..n {
        let s = f(vals[k]);
        for i in 0..n {
            scaled[(i, k)] *= s;
        }
    }
    scaled * vecs.adjoint()
}

/// Result of a nullspace computation.
#[derive(Debug, Clone)]
pub struct Nullspace {
    /// Orthonormal columns spanning the numerical nullspace.
    pub basis: CMatrix,
    /// Largest singular value of the map.
    pub sigma_max: f64,
    /// Smallest singular value kept as non-null, if any.
    pub smallest_nonnull: Option<f64>,
    pub threshold: f64,
}

impl Nullspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// True when the first non-null singular value sits within 10x of the cut.
    pub fn ill_conditioned(&self) -> bool {
        matches!(self.smallest_nonnull, Some(s) if s < 10.0 * self.threshold)
    }
}

/// Nullspace of `a` by singular-value thresholding at `rel_tol · σ_max`.
///
/// Tall inputs are first reduced by QR; the singular values of R equal those of `a`.
pub fn nullspace(a: &CMatrix, rel_tol: f64) -> Nullspace {
    let cols = a.ncols();
    let reduced = if a.nrows() > cols {
        a.clone().qr().r()
    } else {
        let mut padded = CMatrix::zeros(cols, cols);
        padded.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
        padded
    };
    let svd = reduced.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
    let threshold = rel_tol * sigma_max.max(f64::MIN_POSITIVE);
    let mut null_rows = Vec::new();
    let mut smallest_nonnull: Option<f64> = None;
    for (k, &s) in sigma.iter().enumerate() {
        if s <= threshold {
            null_rows.push(k);
        } else {
            smallest_nonnull = Some(smallest_nonnull.map_or(s, |m: f64| m.min(s)));
        }
    }
    let mut basis = CMatrix::zeros(cols, null_rows.len());
    for (j, &k) in null_rows.iter().enumerate() {
        for i in 0..cols {
            basis[(i, j)] = v_t[(k, i)].conj();
        }
    }
    Nullspace {
        basis,
        sigma_max,
        smallest_nonnull,
        threshold,
    }
}

/// Column-major vectorization, matching `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.
pub fn vec_of(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

pub fn unvec(v: &[C64], rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_column_slice(rows, cols, v)
}

/// Unitary factor of the polar decomposition.
pub fn polar_unitary(t: &CMatrix) -> CMatrix {
    let svd = t.clone().svd(true, true);
    svd.u.expect("u") * svd.v_t.expect("v_t")
}

/// Von Neumann entropy in bits, with 0·log 0 = 0.
pub fn entropy_bits(rho: &CMatrix) -> f64 {
    let (vals, _) = eigh(rho);
    vals.iter()
        .filter(|&&p| p > 1e-15)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Number of eigenvalues above `tol` of a Hermitian matrix.
pub fn hermitian_rank(h: &CMatrix, tol: f64) -> usize {
    eigh(h).0.iter().filter(|&&v| v > tol).count()
}

pub fn inner(a: &CVector, b: &CVector) -> C64 {
    a.dotc(b)
}

pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

pub fn basis_vector(dim: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[k] = C64::new(1.0, 0.0);
    v
}

pub fn real_matrix(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| C64::new(x, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullspace_of_rank_one() {
        let v = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)]);
        let a = outer(&v, &v);
        let ns = nullspace(&a, 1e-10);
        assert_eq!(ns.dim(), 2);
        assert!(frob(&(&a * &ns.basis)) < 1e-12);
    }

    #[test]
    fn tall_nullspace_uses_qr() {
        let mut a = CMatrix::zeros(6, 2);
        a[(0, 0)] = c(1.0, 0.0);
        a[(3, 0)] = c(2.0, 0.0);
        let ns = nullspace(&a, 1e-10);
        assert_eq!(ns.dim(), 1);
        assert!(ns.basis[(0, 0)].norm() < 1e-12);
    }

    #[test]
    fn entropy_of_maximally_mixed_qubit() {
        let rho = CMatrix::identity(2, 2).scale(0.5);
        assert!((entropy_bits(&rho) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vec_identity() {
        let a = CMatrix::from_fn(2, 2, |i, j| c(i as f64, j as f64));
        let x = CMatrix::from_fn(2, 2, |i, j| c((i + 2 * j) as f64, 1.0));
        let b = CMatrix::from_fn(2, 2, |i, j| c(1.0, (i * j) as f64));
        let lhs = vec_of(&(&a * &x * &b));
        let rhs = kron(&b.transpose(), &a) * vec_of(&x);
        assert!((lhs - rhs).norm() < 1e-12);
    }
}
