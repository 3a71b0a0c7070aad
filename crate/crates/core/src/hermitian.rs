//! Isometric coordinates for Hermitian matrices.
//!
//! An N x N Hermitian matrix is mapped to a real vector of length N^2 such
//! that the trace inner product becomes the Euclidean dot product:
//! `tr(A B) = w_a . w_b`. The fixed basis order is: the N real diagonal
//! entries first, then for each pair i < j in row-major order the entries
//! `sqrt(2) Re(A_ij)` and `sqrt(2) Im(A_ij)`.
//!
//! Real symmetric matrices use the same mapping; their imaginary-part
//! coordinates are exactly zero.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative Frobenius tolerance for accepting an input as Hermitian.
pub const HERMITIAN_REL_TOL: f64 = 1e-10;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Real coordinate vector of a Hermitian matrix in the fixed basis.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianCoords {
    n: usize,
    w: DVector<f64>,
}

impl HermitianCoords {
    /// Wrap a raw coordinate vector; its length must be a perfect square.
    pub fn new(w: DVector<f64>) -> Result<Self> {
        let n = perfect_square_root(w.len()).ok_or(Error::BadLength { len: w.len() })?;
        Ok(Self { n, w })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.w
    }

    pub fn into_coords(self) -> DVector<f64> {
        self.w
    }
}

fn perfect_square_root(len: usize) -> Option<usize> {
    if len == 0 {
        return None;
    }
    let n = (len as f64).sqrt().round() as usize;
    (n * n == len).then_some(n)
}

/// Position of the coordinate pair for off-diagonal entry (i, j), i < j.
#[inline]
fn pair_base(n: usize, i: usize, j: usize) -> usize {
    n + 2 * (i * (2 * n - i - 1) / 2 + (j - i - 1))
}

/// Map a Hermitian matrix to its real coordinate vector.
///
/// Inputs within [`HERMITIAN_REL_TOL`] of Hermitian are symmetrized as
/// `(A + A^H)/2` before mapping; anything further off is rejected.
pub fn map_to_coords(a: &DMatrix<Complex64>) -> Result<HermitianCoords> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let norm = a.norm();
    let asym = (a - a.adjoint()).norm();
    if asym > HERMITIAN_REL_TOL * norm.max(f64::MIN_POSITIVE) {
        return Err(Error::NonHermitianInput {
            asymmetry: asym / norm.max(f64::MIN_POSITIVE),
            tol: HERMITIAN_REL_TOL,
        });
    }

    let mut w = DVector::zeros(n * n);
    for i in 0..n {
        w[i] = a[(i, i)].re;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            // Symmetrized off-diagonal entry: (A_ij + conj(A_ji)) / 2.
            let e = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            let base = pair_base(n, i, j);
            w[base] = SQRT2 * e.re;
            w[base + 1] = SQRT2 * e.im;
        }
    }
    Ok(HermitianCoords { n, w })
}

/// Inverse of [`map_to_coords`]; the output is exactly Hermitian.
pub fn map_from_coords(c: &HermitianCoords) -> DMatrix<Complex64> {
    matrix_from_coords(c.n, &c.w)
}

/// Reconstruct the Hermitian matrix from raw coordinates (length n^2).
pub(crate) fn matrix_from_coords(n: usize, w: &DVector<f64>) -> DMatrix<Complex64> {
    debug_assert_eq!(w.len(), n * n);
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = Complex64::new(w[i], 0.0);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let base = pair_base(n, i, j);
            let e = Complex64::new(w[base] / SQRT2, w[base + 1] / SQRT2);
            a[(i, j)] = e;
            a[(j, i)] = e.conj();
        }
    }
    a
}

/// Reconstruct a real symmetric matrix, ignoring the (zero) imaginary slots.
pub(crate) fn real_matrix_from_coords(n: usize, w: &DVector<f64>) -> DMatrix<f64> {
    debug_assert_eq!(w.len(), n * n);
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = w[i];
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let e = w[pair_base(n, i, j)] / SQRT2;
            a[(i, j)] = e;
            a[(j, i)] = e;
        }
    }
    a
}

/// Coordinates of the rank-one matrix `x x^H` without forming it.
pub(crate) fn coords_of_outer(x: &DVector<Complex64>) -> DVector<f64> {
    let n = x.len();
    let mut w = DVector::zeros(n * n);
    for i in 0..n {
        w[i] = x[i].norm_sqr();
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let e = x[i] * x[j].conj();
            let base = pair_base(n, i, j);
            w[base] = SQRT2 * e.re;
            w[base + 1] = SQRT2 * e.im;
        }
    }
    w
}

/// Coordinates of `x x^T` for real `x`; imaginary slots stay zero.
pub(crate) fn coords_of_outer_real(x: &DVector<f64>) -> DVector<f64> {
    let n = x.len();
    let mut w = DVector::zeros(n * n);
    for i in 0..n {
        w[i] = x[i] * x[i];
    }
    for i in 0..n {
        for j in (i + 1)..n {
            w[pair_base(n, i, j)] = SQRT2 * x[i] * x[j];
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::substream;
    use rand::Rng;

    fn random_hermitian(n: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = Complex64::new(rng.gen::<f64>() * 2.0 - 1.0, 0.0);
            for j in (i + 1)..n {
                let e = Complex64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0);
                a[(i, j)] = e;
                a[(j, i)] = e.conj();
            }
        }
        a
    }

    fn trace_product(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Complex64 {
        (a * b).trace()
    }

    #[test]
    fn identity_coords() {
        let a = DMatrix::<Complex64>::identity(2, 2);
        let w = map_to_coords(&a).unwrap();
        assert_eq!(w.coords().as_slice(), &[1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn zero_matrix_coords() {
        let a = DMatrix::<Complex64>::zeros(3, 3);
        let w = map_to_coords(&a).unwrap();
        assert_eq!(w.coords().len(), 9);
        assert!(w.coords().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn basis_vector_reconstruction() {
        // Third coordinate of the n=2 basis is the sqrt(2)-scaled real part
        // of the (0,1) entry.
        let w =
            HermitianCoords::new(DVector::from_vec(vec![0.0, 0.0, SQRT2, 0.0])).unwrap();
        let a = map_from_coords(&w);
        assert_eq!(a[(0, 0)], Complex64::new(0.0, 0.0));
        assert_eq!(a[(1, 1)], Complex64::new(0.0, 0.0));
        assert_eq!(a[(0, 1)], Complex64::new(1.0, 0.0));
        assert_eq!(a[(1, 0)], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn trace_inner_product_random_pairs() {
        let mut rng = substream(11, &[1]);
        for trial in 0..50 {
            let n = 2 + (trial % 7);
            let a = random_hermitian(n, &mut rng);
            let b = random_hermitian(n, &mut rng);
            let t = trace_product(&a, &b);
            assert!(t.im.abs() <= 1e-10 * t.norm().max(1e-30));
            let wa = map_to_coords(&a).unwrap();
            let wb = map_to_coords(&b).unwrap();
            let dot = wa.coords().dot(wb.coords());
            assert!(
                (t.re - dot).abs() <= 1e-10 * t.re.abs().max(1e-14),
                "n={n}: tr={} dot={dot}",
                t.re
            );
        }
    }

    #[test]
    fn round_trip_random() {
        let mut rng = substream(12, &[2]);
        for trial in 0..100 {
            let n = 2 + (trial % 7);
            let a = random_hermitian(n, &mut rng);
            let back = map_from_coords(&map_to_coords(&a).unwrap());
            let max_err = (&back - &a).amax();
            assert!(max_err <= 1e-12, "round-trip error {max_err}");
        }
    }

    #[test]
    fn isometry_and_linearity() {
        let mut rng = substream(13, &[3]);
        for _ in 0..30 {
            let n = 2 + rng.gen_range(0..6);
            let a = random_hermitian(n, &mut rng);
            let b = random_hermitian(n, &mut rng);
            let wa = map_to_coords(&a).unwrap().into_coords();
            let wb = map_to_coords(&b).unwrap().into_coords();

            let fro = a.norm();
            assert!((fro - wa.norm()).abs() <= 1e-12 * fro.max(1.0));

            let (alpha, beta) = (rng.gen::<f64>() * 3.0 - 1.5, rng.gen::<f64>() * 3.0 - 1.5);
            let combo = &a * Complex64::new(alpha, 0.0) + &b * Complex64::new(beta, 0.0);
            let wc = map_to_coords(&combo).unwrap().into_coords();
            let expected = &wa * alpha + &wb * beta;
            assert!((wc - expected).amax() <= 1e-12 * (alpha.abs() + beta.abs()).max(1.0));
        }
    }

    #[test]
    fn real_symmetric_has_zero_imaginary_coords() {
        let mut rng = substream(14, &[4]);
        let n = 5;
        let mut a = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = Complex64::new(rng.gen(), 0.0);
            for j in (i + 1)..n {
                let e = Complex64::new(rng.gen::<f64>() - 0.5, 0.0);
                a[(i, j)] = e;
                a[(j, i)] = e;
            }
        }
        let w = map_to_coords(&a).unwrap();
        for i in 0..n {
            for j in (i + 1)..n {
                assert_eq!(w.coords()[pair_base(n, i, j) + 1], 0.0);
            }
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut a = DMatrix::<Complex64>::identity(3, 3);
        a[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            map_to_coords(&a),
            Err(Error::NonHermitianInput { .. })
        ));
    }

    #[test]
    fn rejects_bad_length() {
        let w = DVector::from_vec(vec![1.0; 7]);
        assert!(matches!(
            HermitianCoords::new(w),
            Err(Error::BadLength { len: 7 })
        ));
    }

    #[test]
    fn outer_product_coords_match_matrix_path() {
        let mut rng = substream(15, &[5]);
        for _ in 0..20 {
            let n = 2 + rng.gen_range(0..6);
            let x = DVector::from_fn(n, |_, _| {
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            let outer = &x * x.adjoint();
            let direct = coords_of_outer(&x);
            let via_matrix = map_to_coords(&outer).unwrap().into_coords();
            assert!((direct - via_matrix).amax() <= 1e-13);
        }
    }
}
