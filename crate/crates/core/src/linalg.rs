//! Thin complex-matrix layer over nalgebra: Gaussian ensembles, Hermitian
//! eigendecomposition with input validation, and positive-definite log-dets.

use nalgebra::{Cholesky, Complex, DMatrix};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Error;

pub type ComplexMatrix = DMatrix<Complex<f64>>;

/// Max |a_ij - conj(a_ji)| allowed, relative to the largest entry magnitude
/// (floored at 1), before a matrix is rejected as non-Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Draws a matrix with i.i.d. circularly symmetric complex Gaussian entries
/// of unit variance (real and imaginary parts each N(0, 1/2)).
pub fn sample_complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        data.push(Complex::new(re * scale, im * scale));
    }
    ComplexMatrix::from_vec(rows, cols, data)
}

/// Largest deviation from Hermitian symmetry, max over (i, j) of
/// |a_ij - conj(a_ji)|.
pub fn hermitian_deviation(a: &ComplexMatrix) -> f64 {
    let n = a.nrows();
    let mut dev = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            let d = (a[(i, j)] - a[(j, i)].conj()).norm();
            dev = dev.max(d);
        }
    }
    dev
}

fn check_hermitian(a: &ComplexMatrix) -> Result<(), Error> {
    if a.nrows() != a.ncols() {
        return Err(Error::NonSquare { rows: a.nrows(), cols: a.ncols() });
    }
    let scale = a.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    let deviation = hermitian_deviation(a);
    if deviation > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian { deviation, tol: HERMITIAN_TOL * scale });
    }
    Ok(())
}

/// Eigenvalues of a Hermitian matrix in ascending order.
///
/// The input is validated first; symmetry is then enforced exactly by
/// averaging `(A + A^H) / 2` so roundoff in the caller's products cannot
/// leak into the decomposition.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>, Error> {
    Ok(hermitian_eigen(a)?.0)
}

/// Eigenvalues (ascending) and matching eigenvector columns of a Hermitian
/// matrix.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix), Error> {
    check_hermitian(a)?;
    let sym = hermitize(a);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let n = a.nrows();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

/// (A + A^H) / 2, the Hermitian part.
pub fn hermitize(a: &ComplexMatrix) -> ComplexMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// log2 det(A) of a Hermitian positive-definite matrix.
///
/// Cholesky is attempted first; if it fails, the eigenvalues decide whether
/// the matrix is merely ill-conditioned (summed in log space) or genuinely
/// not positive definite (error).
pub fn log2_det_hermitian_pd(a: &ComplexMatrix) -> Result<f64, Error> {
    check_hermitian(a)?;
    let sym = hermitize(a);
    if let Some(chol) = Cholesky::new(sym.clone()) {
        // nalgebra can hand back a factor with NaN or near-imaginary pivots
        // instead of failing (sqrt of a negative center lands at re ~ 1e-17,
        // im ~ 1), so the diagonal has to be vetted before it is trusted.
        let l = chol.l();
        let mut acc = 0.0;
        let mut trustworthy = true;
        for i in 0..l.nrows() {
            let pivot = l[(i, i)];
            if !(pivot.re.is_finite() && pivot.re > 0.0 && pivot.im.abs() <= 1e-8 * pivot.re) {
                trustworthy = false;
                break;
            }
            acc += pivot.re.log2();
        }
        if trustworthy {
            return Ok(2.0 * acc);
        }
    }
    let values = hermitian_eigenvalues(&sym)?;
    let min = values.first().copied().unwrap_or(0.0);
    if min <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    Ok(values.iter().map(|v| v.log2()).sum())
}

/// Solves `A X = B` for Hermitian positive-definite `A`.
pub fn solve_hermitian_pd(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, Error> {
    check_hermitian(a)?;
    let chol = Cholesky::new(hermitize(a)).ok_or(Error::NotPositiveDefinite {
        min_eigenvalue: f64::NAN,
    })?;
    let l = chol.l();
    for i in 0..l.nrows() {
        let pivot = l[(i, i)];
        if !(pivot.re.is_finite() && pivot.re > 0.0 && pivot.im.abs() <= 1e-8 * pivot.re) {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: f64::NAN });
        }
    }
    Ok(chol.solve(b))
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let g = sample_complex_gaussian(n, n, rng);
        hermitize(&g)
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = sample_complex_gaussian(200, 200, &mut rng);
        let n = (a.nrows() * a.ncols()) as f64;
        let mean = a.iter().sum::<Complex<f64>>() / Complex::new(n, 0.0);
        let var = a.iter().map(|z| z.norm_sqr()).sum::<f64>() / n;
        assert!(mean.norm() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "variance {var}");
    }

    #[test]
    fn eigen_residual_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1usize, 2, 3, 6, 9] {
            let a = random_hermitian(n, &mut rng);
            let (values, vectors) = hermitian_eigen(&a).unwrap();
            let norm = a.norm().max(1e-30);
            for (j, &lam) in values.iter().enumerate() {
                let v = vectors.column(j);
                let residual = (&a * v - v.scale(lam)).norm();
                assert!(residual <= 1e-8 * norm, "n={n}, residual {residual}");
            }
            for w in values.windows(2) {
                assert!(w[0] <= w[1], "eigenvalues not ascending: {values:?}");
            }
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut a = identity(3);
        a[(0, 1)] = Complex::new(0.5, 0.0);
        match hermitian_eigenvalues(&a) {
            Err(Error::NotHermitian { deviation, .. }) => assert!((deviation - 0.5).abs() < 1e-12),
            other => panic!("expected NotHermitian, got {other:?}"),
        }
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(
            hermitian_eigenvalues(&rect),
            Err(Error::NonSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn log2_det_matches_eigen_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = sample_complex_gaussian(5, 5, &mut rng);
        let a = &g * g.adjoint() + identity(5).scale(0.5);
        let direct = log2_det_hermitian_pd(&a).unwrap();
        let via_eigen: f64 = hermitian_eigenvalues(&a)
            .unwrap()
            .iter()
            .map(|v| v.log2())
            .sum();
        assert!((direct - via_eigen).abs() < 1e-9, "{direct} vs {via_eigen}");
    }

    #[test]
    fn log2_det_rejects_indefinite() {
        let mut a = identity(2);
        a[(1, 1)] = Complex::new(-1.0, 0.0);
        assert!(matches!(
            log2_det_hermitian_pd(&a),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn pd_solve_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = sample_complex_gaussian(4, 4, &mut rng);
        let a = &g * g.adjoint() + identity(4);
        let b = sample_complex_gaussian(4, 2, &mut rng);
        let x = solve_hermitian_pd(&a, &b).unwrap();
        assert!((&a * &x - &b).norm() < 1e-10);
    }
}
