//! Complex linear-algebra kernels shared by the solvers and schedulers.

use crate::error::{Error, Result};
use crate::model::{CMatrix, CVector, C64};

const HERMITIAN_TOL: f64 = 1e-10;
/// Relative residual below which a Gram-Schmidt candidate adds no dimension.
pub const DEGENERATE_TOL: f64 = 1e-12;

/// `a^H b`.
#[inline]
pub fn inner(a: &CVector, b: &CVector) -> C64 {
    a.dotc(b)
}

/// `|a^H b| / (‖a‖‖b‖)`, zero when either vector is zero.
pub fn abs_cosine(a: &CVector, b: &CVector) -> f64 {
    let denom = a.norm() * b.norm();
    if denom == 0.0 {
        0.0
    } else {
        inner(a, b).norm() / denom
    }
}

/// Hermitian positive definite matrix together with its Cholesky factor.
#[derive(Debug, Clone)]
pub struct HpdMatrix {
    matrix: CMatrix,
    lower: CMatrix,
}

impl HpdMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::domain(format!(
                "HPD matrix must be square and nonempty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let scale = matrix.norm().max(f64::MIN_POSITIVE);
        let skew = (&matrix - matrix.adjoint()).norm();
        if !(skew <= HERMITIAN_TOL * scale) {
            return Err(Error::domain(format!(
                "matrix is not Hermitian (relative skew {:.3e})",
                skew / scale
            )));
        }
        let lower = cholesky(&matrix)?;
        Ok(HpdMatrix { matrix, lower })
    }

    /// `I + scale · Σ v v^H` over the columns of `vectors`.
    pub fn identity_plus_gram(vectors: &CMatrix, scale: f64) -> Result<Self> {
        let n = vectors.nrows();
        let mut m = vectors * vectors.adjoint() * C64::from(scale);
        for i in 0..n {
            m[(i, i)] += C64::from(1.0);
        }
        // Exact symmetry so the Hermitian check never trips on rounding.
        for i in 0..n {
            m[(i, i)].im = 0.0;
            for j in 0..i {
                m[(j, i)] = m[(i, j)].conj();
            }
        }
        HpdMatrix::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Lower-triangular `L` with `R = L L^H`.
    pub fn factor(&self) -> &CMatrix {
        &self.lower
    }

    /// Solves `R X = B` by forward and back substitution.
    pub fn solve(&self, rhs: &CMatrix) -> Result<CMatrix> {
        if rhs.nrows() != self.dim() {
            return Err(Error::domain(format!(
                "right-hand side has {} rows, matrix is {}x{}",
                rhs.nrows(),
                self.dim(),
                self.dim()
            )));
        }
        let n = self.dim();
        let l = &self.lower;
        let mut x = rhs.clone();
        for mut col in x.column_iter_mut() {
            for i in 0..n {
                let mut acc = col[i];
                for k in 0..i {
                    acc -= l[(i, k)] * col[k];
                }
                col[i] = acc / l[(i, i)];
            }
            for i in (0..n).rev() {
                let mut acc = col[i];
                for k in i + 1..n {
                    acc -= l[(k, i)].conj() * col[k];
                }
                col[i] = acc / l[(i, i)];
            }
        }
        Ok(x)
    }

    pub fn solve_vector(&self, rhs: &CVector) -> Result<CVector> {
        let m = CMatrix::from_column_slice(rhs.len(), 1, rhs.as_slice());
        Ok(self.solve(&m)?.column(0).into_owned())
    }
}

fn cholesky(a: &CMatrix) -> Result<CMatrix> {
    let n = a.nrows();
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Singular { pivot: j });
        }
        let djj = d.sqrt();
        l[(j, j)] = C64::from(djj);
        for i in j + 1..n {
            let mut acc = a[(i, j)];
            for k in 0..j {
                acc -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = acc / djj;
        }
    }
    Ok(l)
}

/// `R^{-1} B` through the cached factorization.
pub fn hpd_solve(r: &HpdMatrix, b: &CMatrix) -> Result<CMatrix> {
    r.solve(b)
}

/// Orthonormal vectors `f_1..f_n`, grown one direction at a time.
#[derive(Debug, Clone, Default)]
pub struct OrthonormalBasis {
    vectors: Vec<CVector>,
}

impl OrthonormalBasis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }

    /// Appends the normalized component of `v` orthogonal to the basis.
    ///
    /// Modified Gram-Schmidt with one re-orthogonalization pass. Fails without
    /// modifying the basis when the residual is below `1e-12 ‖v‖`.
    pub fn append(&mut self, v: &CVector) -> Result<&CVector> {
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::domain("Gram-Schmidt input is not finite"));
        }
        if let Some(f) = self.vectors.first() {
            if f.len() != v.len() {
                return Err(Error::domain("Gram-Schmidt input has the wrong dimension"));
            }
        }
        let threshold = DEGENERATE_TOL * v.norm();
        let mut residual = v.clone();
        for _ in 0..2 {
            for f in &self.vectors {
                let proj = inner(f, &residual);
                residual.axpy(-proj, f, C64::from(1.0));
            }
        }
        let norm = residual.norm();
        if !(norm > threshold) {
            return Err(Error::DegenerateDirection {
                residual: norm,
                threshold,
            });
        }
        residual.unscale_mut(norm);
        self.vectors.push(residual);
        Ok(self.vectors.last().expect("just pushed"))
    }
}

/// Gram-Schmidt step: returns the new basis vector `f_n`.
pub fn gram_schmidt_append(basis: &mut OrthonormalBasis, v: &CVector) -> Result<CVector> {
    basis.append(v).cloned()
}

/// Unit-norm copy of `v` rotated so its reference element is real and
/// non-negative. The reference is the first element with magnitude above
/// `1e-12 ‖v‖`.
pub fn phase_align(v: &CVector) -> Result<CVector> {
    let norm = v.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::domain("cannot phase-align a zero or non-finite vector"));
    }
    let cutoff = 1e-12 * norm;
    let reference = v
        .iter()
        .find(|z| z.norm() > cutoff)
        .copied()
        .expect("a nonzero vector has an element above the cutoff");
    let rotation = C64::from_polar(1.0 / norm, -reference.arg());
    let mut out = v * rotation;
    // Remove the rounding residue in the reference element's phase.
    if let Some(z) = out.iter_mut().find(|z| z.norm() > 1e-12) {
        *z = C64::from(z.norm());
    }
    Ok(out)
}

/// `K / Σ 1/v_k`.
pub fn harmonic_mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::domain("harmonic mean of an empty list"));
    }
    if let Some(v) = values.iter().find(|&&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::domain(format!("harmonic mean needs positive values, got {v}")));
    }
    Ok(values.len() as f64 / values.iter().map(|v| v.recip()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::model::complex_gaussian;

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn dotc_conjugates_left_operand() {
        let a = CVector::from_vec(vec![c(0.0, 1.0)]);
        let b = CVector::from_vec(vec![c(1.0, 0.0)]);
        assert_eq!(inner(&a, &b), c(0.0, -1.0));
    }

    #[test]
    fn solve_identity_and_scalar() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = random_matrix(&mut rng, 5, 3);
        let eye = HpdMatrix::new(CMatrix::identity(5, 5)).unwrap();
        assert_eq!(hpd_solve(&eye, &b).unwrap(), b);
        let two = HpdMatrix::new(CMatrix::identity(5, 5) * c(2.0, 0.0)).unwrap();
        let x = hpd_solve(&two, &b).unwrap();
        assert_relative_eq!((x - &b * c(0.5, 0.0)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn solve_rank_one_update_matches_explicit_inverse() {
        // (I + u u^H)^{-1} = I - u u^H / (1 + ‖u‖²)
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = random_matrix(&mut rng, 4, 1);
        let r = HpdMatrix::identity_plus_gram(&u, 1.0).unwrap();
        let b = random_matrix(&mut rng, 4, 1);
        let denom = 1.0 + u.norm_squared();
        let inv = CMatrix::identity(4, 4) - &u * u.adjoint() * c(1.0 / denom, 0.0);
        let expected = inv * &b;
        let x = hpd_solve(&r, &b).unwrap();
        assert!((x - expected).norm() <= 1e-10 * b.norm());
    }

    #[test]
    fn solve_residual_on_random_hpd() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &n in &[4usize, 16, 64] {
            for _ in 0..100 {
                let a = random_matrix(&mut rng, n, n);
                let r = HpdMatrix::identity_plus_gram(&a, 1.0).unwrap();
                let b = random_matrix(&mut rng, n, 3);
                let x = hpd_solve(&r, &b).unwrap();
                let resid = (r.matrix() * x - &b).norm() / b.norm();
                assert!(resid <= 1e-10, "n={n} residual {resid:e}");
            }
        }
    }

    #[test]
    fn rejects_indefinite_with_pivot() {
        let mut m = CMatrix::identity(3, 3);
        m[(2, 2)] = c(-1.0, 0.0);
        match HpdMatrix::new(m) {
            Err(Error::Singular { pivot }) => assert_eq!(pivot, 2),
            other => panic!("expected singular error, got {other:?}"),
        }
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = c(0.0, 1.0);
        assert!(matches!(HpdMatrix::new(m), Err(Error::Domain(_))));
    }

    #[test]
    fn gram_schmidt_examples() {
        let e1 = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let e2 = CVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]);
        let mut basis = OrthonormalBasis::new();
        let v = CVector::from_vec(vec![c(3.0, 0.0), c(0.0, 4.0)]);
        let f1 = gram_schmidt_append(&mut basis, &v).unwrap();
        assert_relative_eq!((f1 - &v / c(5.0, 0.0)).norm(), 0.0, epsilon = 1e-15);

        let mut basis = OrthonormalBasis::new();
        basis.append(&e1).unwrap();
        assert_eq!(gram_schmidt_append(&mut basis, &e2).unwrap(), e2);
        assert!(matches!(
            basis.append(&e1),
            Err(Error::DegenerateDirection { .. })
        ));
        assert_eq!(basis.len(), 2);
    }

    #[test]
    fn gram_schmidt_rejects_zero() {
        let mut basis = OrthonormalBasis::new();
        assert!(basis.append(&CVector::zeros(3)).is_err());
        assert!(basis.is_empty());
    }

    #[test]
    fn phase_align_examples() {
        let v = CVector::from_vec(vec![c(1.0, 1.0), c(0.0, 0.0)]);
        let y = phase_align(&v).unwrap();
        assert_relative_eq!((y - CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)])).norm(), 0.0, epsilon = 1e-15);

        let v = CVector::from_vec(vec![c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(phase_align(&v).unwrap(), v / c(2.0, 0.0));

        let v = CVector::from_vec(vec![c(0.0, 0.0), c(0.0, 1.0)]);
        assert_eq!(phase_align(&v).unwrap(), CVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]));

        assert!(phase_align(&CVector::zeros(2)).is_err());
    }

    #[test]
    fn harmonic_mean_examples() {
        assert_relative_eq!(harmonic_mean(&[1.0, 1.0]).unwrap(), 1.0);
        assert_relative_eq!(harmonic_mean(&[1.0, 1.0 / 3.0]).unwrap(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(harmonic_mean(&[2.0, 4.0, 8.0]).unwrap(), 24.0 / 7.0, max_relative = 1e-15);
        assert!(harmonic_mean(&[]).is_err());
        assert!(harmonic_mean(&[1.0, 0.0]).is_err());
    }
}
