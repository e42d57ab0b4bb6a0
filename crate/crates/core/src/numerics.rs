//! Small dense complex linear algebra.
//!
//! Everything here works on [`ComplexMatrix`] (a dynamically sized nalgebra
//! matrix of `Complex64`). The sizes that matter are 4x4 system operators,
//! 16x16 superoperators and the few-hundred-dimensional extended Floquet
//! Hamiltonians used as test oracles.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

/// Eigenvalues below this magnitude (negative side) are round-off and get
/// clamped to zero by [`psd_sqrt`].
pub const PSD_CLAMP: f64 = 1e-12;
/// Anything more negative than this is a genuinely indefinite input.
pub const PSD_REJECT: f64 = 1e-9;
/// Default relative singular-value threshold for [`nullspace`].
pub const NULLSPACE_TOL: f64 = 1e-9;

const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues with eigenvectors stored as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition<T> {
    pub values: Vec<T>,
    pub vectors: ComplexMatrix,
}

impl<T: Copy> EigenDecomposition<T> {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> ComplexVector {
        self.vectors.column(k).into_owned()
    }
}

impl EigenDecomposition<f64> {
    /// `V diag(f(λ))`, the eigenvectors scaled column by column.
    pub fn map_columns(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let mut scaled = self.vectors.clone();
        for (k, &value) in self.values.iter().enumerate() {
            let mut column = scaled.column_mut(k);
            column *= f(value);
        }
        scaled
    }

    /// `V diag(f(λ)) V†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        self.map_columns(f) * self.vectors.adjoint()
    }
}

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn from_real_diagonal(diag: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&DVector::from_iterator(
        diag.len(),
        diag.iter().map(|&d| c(d)),
    ))
}

/// Frobenius norm of `M - M†`.
pub fn hermiticity_defect(m: &ComplexMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

/// Frobenius norm of `U†U - I`.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    let n = u.nrows();
    (u.adjoint() * u - ComplexMatrix::identity(n, n)).norm()
}

fn ensure_square(m: &ComplexMatrix) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        })
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Eigenvalues come back ascending.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<EigenDecomposition<f64>> {
    ensure_square(m)?;
    let norm = m.norm();
    let defect = hermiticity_defect(m);
    if defect > 1e-9 * norm.max(f64::MIN_POSITIVE) {
        return Err(Error::NonHermitianInput { defect });
    }
    let n = m.nrows();
    // Symmetrize so round-off in the input does not leak into the rotations.
    let mut a = (m + m.adjoint()) * c(0.5);
    let mut v = ComplexMatrix::identity(n, n);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * 1e-2 * norm || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, k| v[(r, order[k])]);
    Ok(EigenDecomposition { values, vectors })
}

/// One complex Jacobi rotation annihilating `a[(p, q)]`. The rotation is a
/// phase on column `q` (making the pivot real) followed by a real symmetric
/// Schur rotation.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r < 1e-300 {
        return;
    }
    let n = a.nrows();
    let phase = apq / r; // e^{iφ}
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let cs = 1.0 / (1.0 + t * t).sqrt();
    let sn = t * cs;
    let conj_phase = phase.conj();

    // A <- A W, V <- V W with W = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] on (p, q).
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)] * conj_phase;
        a[(k, p)] = akp * cs - akq * sn;
        a[(k, q)] = akp * sn + akq * cs;
        let vkp = v[(k, p)];
        let vkq = v[(k, q)] * conj_phase;
        v[(k, p)] = vkp * cs - vkq * sn;
        v[(k, q)] = vkp * sn + vkq * cs;
    }
    // A <- W† A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)] * phase;
        a[(p, k)] = apk * cs - aqk * sn;
        a[(q, k)] = apk * sn + aqk * cs;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = c(a[(p, p)].re);
    a[(q, q)] = c(a[(q, q)].re);
}

/// Mixing coefficients for the Hermitian auxiliary `Re U + μ Im U`. Any
/// μ separates distinct eigenphases except on a measure-zero set; the one
/// giving the widest minimum gap is kept.
const UNITARY_MIXING: [f64; 5] = [0.618_033_988_749_894_8, -1.324_717_957_244_746, std::f64::consts::E, -0.414_213_562, 0.0];

/// Eigendecomposition of a unitary matrix.
///
/// `U` is normal, so `Re U = (U + U†)/2` and `Im U = (U - U†)/2i` are
/// commuting Hermitian matrices sharing its eigenvectors. The Hermitian
/// combination `Re U + μ Im U` is diagonalized with [`hermitian_eig`] and the
/// eigenvalues of `U` are read back as Rayleigh quotients.
pub fn unitary_eig(u: &ComplexMatrix) -> Result<EigenDecomposition<C64>> {
    ensure_square(u)?;
    let defect = unitarity_defect(u);
    if defect > 1e-8 {
        return Err(Error::NonUnitaryInput { defect });
    }
    let re = (u + u.adjoint()) * c(0.5);
    let im = (u - u.adjoint()) * C64::new(0.0, -0.5);

    let mut best: Option<(f64, EigenDecomposition<f64>)> = None;
    for &mu in &UNITARY_MIXING {
        let aux = &re + &im * c(mu);
        let eig = hermitian_eig(&aux)?;
        let gap = eig
            .values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        if best.as_ref().is_none_or(|(g, _)| gap > *g) {
            best = Some((gap, eig));
        }
        if gap > 1e-3 {
            break;
        }
    }
    let (_, eig) = best.expect("at least one mixing coefficient");
    let values = (0..eig.dim())
        .map(|k| {
            let v = eig.vectors.column(k);
            (v.adjoint() * u * v)[(0, 0)]
        })
        .collect();
    Ok(EigenDecomposition {
        values,
        vectors: eig.vectors,
    })
}

/// Closest matrix with orthonormal columns (Löwdin), `M (M†M)^{-1/2}`.
/// Meant for frames that are unitary up to integration error.
pub fn orthonormalize(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let gram = m.adjoint() * m;
    let eig = hermitian_eig(&gram)?;
    if eig.values.first().is_none_or(|&v| v <= 0.0) {
        return Err(Error::IndefiniteInput {
            min_eigenvalue: eig.values.first().copied().unwrap_or(0.0),
        });
    }
    Ok(m * eig.map_spectrum(|x| c(1.0 / x.sqrt())))
}

/// Principal square root of a positive-semidefinite Hermitian matrix.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m)?;
    let scale = m.norm().max(1.0);
    let min = eig.values.first().copied().unwrap_or(0.0);
    if min < -PSD_REJECT * scale {
        return Err(Error::IndefiniteInput {
            min_eigenvalue: min,
        });
    }
    Ok(eig.map_spectrum(|x| c(x.max(0.0).sqrt())))
}

/// Orthonormal basis of the numerical kernel of a square matrix: right
/// singular vectors whose singular value is below `tol * σ_max`.
pub fn nullspace(m: &ComplexMatrix, tol: f64) -> Result<Vec<ComplexVector>> {
    ensure_square(m)?;
    let n = m.nrows();
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors were requested");
    let sigma_max = svd.singular_values.max();
    if sigma_max == 0.0 {
        let id = ComplexMatrix::identity(n, n);
        return Ok(id.column_iter().map(|col| col.into_owned()).collect());
    }
    Ok(svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s < tol * sigma_max)
        .map(|(k, _)| v_t.row(k).adjoint())
        .collect())
}

/// Eigenvalues of a general (non-normal) square matrix via complex Schur
/// form.
pub fn general_eigenvalues(m: &ComplexMatrix) -> Result<Vec<C64>> {
    ensure_square(m)?;
    let schur = m.clone().schur();
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|k| t[(k, k)]).collect())
}

/// `exp(M)` by scaling and squaring with Padé approximants.
pub fn expm(m: &ComplexMatrix) -> ComplexMatrix {
    m.exp()
}

/// Fourier coefficients `x(K) = (1/N) Σ_j x(t_j) e^{+2πi K j / N}` for
/// `K = -kmax..=kmax`, from `N` uniform samples over one period. Entry
/// `K + kmax` of the result holds `x(K)`.
pub fn fourier_coefficients(samples: &[ComplexVector], kmax: usize) -> Vec<ComplexVector> {
    let n = samples.len();
    let dim = samples.first().map_or(0, |s| s.len());
    let kmax = kmax as i64;
    (-kmax..=kmax)
        .map(|k| {
            let mut acc = ComplexVector::zeros(dim);
            for (j, s) in samples.iter().enumerate() {
                let phase = C64::from_polar(1.0, std::f64::consts::TAU * (k * j as i64) as f64 / n as f64);
                acc.axpy(phase, s, c(1.0));
            }
            acc / c(n as f64)
        })
        .collect()
}
