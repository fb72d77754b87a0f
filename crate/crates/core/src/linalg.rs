//! Dense complex matrices plus the spectral routines everything else builds on:
//! Hermitian eigendecomposition, PSD square roots, trace norms, partial traces,
//! and the transpose pairing (B, rho) := Tr(B rho^T).
//!
//! The pairing fixes a computational basis once and for all; transposition and
//! entrywise conjugation below are always meant in that basis.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Relative tolerance for Hermitian symmetry checks.
pub const HERM_TOL: f64 = 1e-8;
/// Eigenvalues in [-psd_tol, 0] with psd_tol = PSD_TOL_FACTOR * max|eig| are
/// clipped to zero; anything below -psd_tol is a genuine PSD violation.
pub const PSD_TOL_FACTOR: f64 = 1e-8;
/// Tolerance on |trace - 1| for density operators.
pub const TRACE_TOL: f64 = 1e-8;

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Build from row-major data, validating length and finiteness.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "matrix data length {} does not fill {} x {}",
                data.len(),
                rows,
                cols
            )));
        }
        for (idx, z) in data.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFiniteEntry {
                    row: idx / cols,
                    col: idx % cols,
                });
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Rank-one matrix |v><w|.
    pub fn outer(v: &[Complex64], w: &[Complex64]) -> Self {
        Self::from_fn(v.len(), w.len(), |r, c| v[r] * w[c].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    /// Entrywise complex conjugate (the basis involution J).
    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace of non-square matrix");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Kronecker product, self as the slow (first) factor.
    pub fn kron(&self, other: &Self) -> Self {
        Self::from_fn(
            self.rows * other.rows,
            self.cols * other.cols,
            |r, c| self[(r / other.rows, c / other.cols)] * other[(r % other.rows, c % other.cols)],
        )
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm of M - M^dag.
    pub fn hermitian_deviation(&self) -> f64 {
        assert!(self.is_square());
        let mut acc = 0.0;
        for r in 0..self.rows {
            for c in 0..self.cols {
                acc += (self[(r, c)] - self[(c, r)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// (M + M^dag) / 2, used to strip numerical asymmetry before eigensolves.
    pub fn hermitize(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| {
            (self[(r, c)] + self[(c, r)].conj()) * 0.5
        })
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self[(r, c)] * v[c]).sum())
            .collect()
    }

    pub(crate) fn to_dmatrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_iterator(self.rows, self.cols, self.data.iter().copied())
    }

    pub(crate) fn from_dmatrix(m: &DMatrix<Complex64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "mul shape mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for c in 0..rhs.cols {
                    out[(r, c)] += a * rhs[(k, c)];
                }
            }
        }
        out
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|c| format!("{:+.4}{:+.4}i", self[(r, c)].re, self[(r, c)].im))
                .collect();
            writeln!(f, "  {}", row.join("  "))?;
        }
        write!(f, "]")
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixRepr {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(deserializer)?;
        let data = repr
            .data
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        ComplexMatrix::new(repr.rows, repr.cols, data).map_err(serde::de::Error::custom)
    }
}

/// Complex inner product <a|b>, conjugate-linear in the first slot.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize_vec(v: &[Complex64]) -> Vec<Complex64> {
    let n = vec_norm(v);
    assert!(n > 0.0, "cannot normalize the zero vector");
    v.iter().map(|z| z / n).collect()
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
#[derive(Clone, Debug)]
pub struct HermitianEig {
    pub eigenvalues: Vec<f64>,
    /// Column k is the eigenvector for eigenvalues[k].
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEig {
    /// Column k as a vector.
    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        (0..self.eigenvectors.rows())
            .map(|r| self.eigenvectors[(r, k)])
            .collect()
    }

    /// Rebuild V f(Lambda) V^dag from transformed eigenvalues.
    pub fn assemble(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for k in 0..n {
            let lam = f(self.eigenvalues[k]);
            if lam == 0.0 {
                continue;
            }
            for r in 0..n {
                let vr = v[(r, k)] * lam;
                for c in 0..n {
                    out[(r, c)] += vr * v[(c, k)].conj();
                }
            }
        }
        out
    }

    /// Same rebuild with a complex-valued spectral function, e.g. exp(i t l).
    pub fn assemble_complex(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for k in 0..n {
            let lam = f(self.eigenvalues[k]);
            for r in 0..n {
                let vr = v[(r, k)] * lam;
                for c in 0..n {
                    out[(r, c)] += vr * v[(c, k)].conj();
                }
            }
        }
        out
    }
}

/// Sweep cap for the Jacobi eigensolver. Cyclic Jacobi converges quadratically
/// once the off-diagonal mass is small; at the dimensions handled here (<= 16
/// or so) every input settles in well under ten sweeps, so the cap only trips
/// on non-finite garbage that slipped past validation.
const JACOBI_SWEEP_CAP: usize = 60;

/// Cyclic complex Jacobi iteration. Diagonalizes a Hermitian matrix by
/// repeatedly zeroing the largest-systematically-visited off-diagonal entries
/// with 2 x 2 unitary rotations, accumulating the eigenvector basis. Every
/// rotation is exactly unitary, so eigenpair residuals |Hv - lambda v| come
/// out at machine precision even for clustered or vanishing eigenvalues,
/// which is what the fidelity routines downstream need.
fn jacobi_hermitian(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = h.rows();
    let mut a = h.clone();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();
    if scale == 0.0 || n == 1 {
        return Ok(((0..n).map(|k| a[(k, k)].re).collect(), v));
    }
    // Entries this small rotate pure rounding noise; skipping them still lets
    // the total off-diagonal mass reach the sweep stop below.
    let skip = f64::EPSILON * scale * 1e-2;
    let stop = f64::EPSILON * scale * n as f64;
    for _ in 0..JACOBI_SWEEP_CAP {
        let mut off = 0.0f64;
        for r in 0..n {
            for c in r + 1..n {
                off += 2.0 * a[(r, c)].norm_sqr();
            }
        }
        if off.sqrt() <= stop {
            return Ok(((0..n).map(|k| a[(k, k)].re).collect(), v));
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let hpq = a[(p, q)];
                let g = hpq.norm();
                if g <= skip {
                    continue;
                }
                // Rotation G: identity except G[p][p] = c, G[p][q] = s,
                // G[q][p] = -s e^{-i phi}, G[q][q] = c e^{-i phi}, with
                // e^{i phi} the phase of the entry being zeroed and (c, s)
                // the classical Jacobi pair for tau = (beta - alpha) / 2g.
                let alpha = a[(p, p)].re;
                let beta = a[(q, q)].re;
                let phase = hpq / g;
                let tau = (beta - alpha) / (2.0 * g);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let sp = phase.conj() * s;
                let cp = phase.conj() * c;
                // A <- (A G), then A <- G^dag A.
                for r in 0..n {
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    a[(r, p)] = arp * c - arq * sp;
                    a[(r, q)] = arp * s + arq * cp;
                }
                for col in 0..n {
                    let apc = a[(p, col)];
                    let aqc = a[(q, col)];
                    a[(p, col)] = apc * c - aqc * sp.conj();
                    a[(q, col)] = apc * s + aqc * cp.conj();
                }
                // The rotated entry is zero analytically; pin it, and keep the
                // touched diagonal real against phase drift.
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                // V <- V G accumulates the eigenvector columns.
                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = vrp * c - vrq * sp;
                    v[(r, q)] = vrp * s + vrq * cp;
                }
            }
        }
    }
    let mut off = 0.0f64;
    for r in 0..n {
        for c in r + 1..n {
            off += 2.0 * a[(r, c)].norm_sqr();
        }
    }
    Err(Error::NoConvergence {
        iterations: JACOBI_SWEEP_CAP,
        best: off.sqrt(),
    })
}

/// Eigendecomposition of a Hermitian matrix. Fails when the symmetry deviation
/// exceeds HERM_TOL relative to the Frobenius norm.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEig> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {} x {}",
            m.rows(),
            m.cols()
        )));
    }
    let scale = m.frobenius_norm();
    let dev = m.hermitian_deviation();
    if dev > HERM_TOL * scale.max(1e-300) && dev > 0.0 {
        return Err(Error::NonHermitian {
            deviation: dev,
            tol: HERM_TOL * scale,
        });
    }
    let (raw_values, raw_vectors) = jacobi_hermitian(&m.hermitize())?;
    let n = m.rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| raw_values[b].partial_cmp(&raw_values[a]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&k| raw_values[k]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, c| raw_vectors[(r, order[c])]);
    Ok(HermitianEig {
        eigenvalues,
        eigenvectors,
    })
}

/// Positive eigenvalues below this times the spectral radius are rounding
/// debris of the eigensolver (absolute eigenvalue error is a few machine
/// epsilons times the radius); the square root must drop them, or structural
/// zeros of rank-deficient operators resurface at the sqrt(debris) ~ 1e-8
/// scale.
const SQRT_DUST_FACTOR: f64 = 1e-13;

/// PSD square root via the spectral decomposition. Eigenvalues in
/// [-psd_tol, 0] are clipped to zero; lower ones raise NotPsd. A matrix whose
/// whole spectrum sits below 1e-12 in magnitude is rounding debris from a
/// structurally zero product (the natural scale of every operator here is
/// order one) and maps to the zero matrix.
pub fn psd_sqrt(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(a)?;
    let lam_max = eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    if lam_max < 1e-12 {
        return Ok(ComplexMatrix::zeros(a.rows(), a.cols()));
    }
    let psd_tol = PSD_TOL_FACTOR * lam_max;
    if let Some(&lam_min) = eig
        .eigenvalues
        .iter()
        .find(|&&l| l < -psd_tol)
    {
        return Err(Error::NotPsd {
            eigenvalue: lam_min,
            tol: psd_tol,
        });
    }
    let dust = SQRT_DUST_FACTOR * lam_max;
    Ok(eig.assemble(|l| if l > dust { l.sqrt() } else { 0.0 }))
}

/// Sum of singular values.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    let svd = m.to_dmatrix().svd(false, false);
    svd.singular_values.iter().sum()
}

/// Largest singular value.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    let svd = m.to_dmatrix().svd(false, false);
    svd.singular_values.iter().fold(0.0f64, |a, &s| a.max(s))
}

/// SVD factors (u, sigma, v_dag) with m = u diag(sigma) v_dag and the
/// singular values in nonincreasing order.
pub fn svd_factors(m: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<f64>, ComplexMatrix)> {
    let svd = m.to_dmatrix().svd(true, true);
    match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => Ok((
            ComplexMatrix::from_dmatrix(&u),
            svd.singular_values.iter().copied().collect(),
            ComplexMatrix::from_dmatrix(&v_t),
        )),
        _ => Err(Error::NoConvergence {
            iterations: 0,
            best: f64::NAN,
        }),
    }
}

/// Eigenvalues of a general square complex matrix, read off the triangular
/// factor of its Schur form. No ordering is guaranteed.
pub fn complex_eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues need a square matrix, got {} x {}",
            m.rows(),
            m.cols()
        )));
    }
    let (_, t) = m.to_dmatrix().schur().unpack();
    Ok((0..m.rows()).map(|k| t[(k, k)]).collect())
}

/// Which tensor factor to trace out of a matrix on a d1 x d2 product space;
/// the first factor is the slow index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    First,
    Second,
}

/// Partial trace of a matrix on the product space C^d1 (x) C^d2.
pub fn partial_trace(
    m: &ComplexMatrix,
    d1: usize,
    d2: usize,
    which: Factor,
) -> Result<ComplexMatrix> {
    if !m.is_square() || m.rows() != d1 * d2 {
        return Err(Error::DimensionMismatch(format!(
            "partial trace expects a square matrix of side {} * {} = {}, got {} x {}",
            d1,
            d2,
            d1 * d2,
            m.rows(),
            m.cols()
        )));
    }
    match which {
        Factor::Second => Ok(ComplexMatrix::from_fn(d1, d1, |i, ip| {
            (0..d2).map(|k| m[(i * d2 + k, ip * d2 + k)]).sum()
        })),
        Factor::First => Ok(ComplexMatrix::from_fn(d2, d2, |k, kp| {
            (0..d1).map(|i| m[(i * d2 + k, i * d2 + kp)]).sum()
        })),
    }
}

/// The pairing (B, rho) := Tr(B rho^T) = Tr(B^T rho).
pub fn transpose_and_pairing(b: &ComplexMatrix, rho: &ComplexMatrix) -> Result<Complex64> {
    if !b.is_square() || !rho.is_square() || b.rows() != rho.rows() {
        return Err(Error::DimensionMismatch(format!(
            "pairing expects square matrices of equal side, got {} x {} and {} x {}",
            b.rows(),
            b.cols(),
            rho.rows(),
            rho.cols()
        )));
    }
    let n = b.rows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += b[(i, j)] * rho[(i, j)];
        }
    }
    Ok(acc)
}

/// Tr sqrt(R S) := Tr (R^{1/2} S R^{1/2})^{1/2} for PSD R, S. Symmetric in its
/// arguments and equal to the Bhattacharyya sum when R and S commute.
pub fn trace_sqrt_product(r: &ComplexMatrix, s: &ComplexMatrix) -> Result<f64> {
    if r.rows() != s.rows() || r.cols() != s.cols() {
        return Err(Error::DimensionMismatch(format!(
            "trace sqrt product expects equal shapes, got {} x {} and {} x {}",
            r.rows(),
            r.cols(),
            s.rows(),
            s.cols()
        )));
    }
    let r_sqrt = psd_sqrt(r)?;
    trace_sqrt_given_sqrt(&r_sqrt, s)
}

/// Tr sqrt(R S) with R^{1/2} already in hand. Computed as the trace norm of
/// R^{1/2} S^{1/2}: the square-rooted operator is (R^{1/2}S^{1/2}) times its
/// adjoint, so the singular values of the product are exactly the square
/// roots of its eigenvalues. Going through the product's singular values
/// keeps rounding debris at machine scale instead of sqrt(machine) scale.
pub(crate) fn trace_sqrt_given_sqrt(r_sqrt: &ComplexMatrix, s: &ComplexMatrix) -> Result<f64> {
    let s_sqrt = psd_sqrt(&s.hermitize())?;
    Ok(trace_norm(&(r_sqrt * &s_sqrt)))
}

/// Validated density operator: Hermitian, PSD within tolerance, unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "density operator must be square, got {} x {}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let eig = hermitian_eig(&matrix)?;
        let lam_max = eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
        let psd_tol = PSD_TOL_FACTOR * lam_max;
        if let Some(&lam) = eig.eigenvalues.iter().find(|&&l| l < -psd_tol) {
            return Err(Error::NotPsd {
                eigenvalue: lam,
                tol: psd_tol,
            });
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::OutOfRange(format!(
                "density operator trace {:.12e}{:+.3e}i differs from 1",
                tr.re, tr.im
            )));
        }
        Ok(Self { matrix })
    }

    /// |psi><psi| from a state vector, normalizing first.
    pub fn from_pure(psi: &[Complex64]) -> Self {
        let v = normalize_vec(psi);
        Self {
            matrix: ComplexMatrix::outer(&v, &v),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale_re(1.0 / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

#[cfg(test)]
pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub(crate) fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mat(rows: usize, cols: usize, entries: &[(f64, f64)]) -> ComplexMatrix {
        ComplexMatrix::new(rows, cols, entries.iter().map(|&(r, i)| c(r, i)).collect()).unwrap()
    }

    #[test]
    fn eig_identity() {
        let eig = hermitian_eig(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0, 1.0]);
    }

    #[test]
    fn eig_diagonal_descending() {
        let m = mat(2, 2, &[(3.0, 0.0), (0.0, 0.0), (0.0, 0.0), (-1.0, 0.0)]);
        let eig = hermitian_eig(&m).unwrap();
        assert!((eig.eigenvalues[0] - 3.0).abs() < 1e-14);
        assert!((eig.eigenvalues[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let h = sampling::random_hermitian(&mut rng, 4);
            let eig = hermitian_eig(&h).unwrap();
            let rec = eig.assemble(|l| l);
            let rel = (&rec - &h).frobenius_norm() / h.frobenius_norm();
            assert!(rel < 1e-10, "reconstruction error {rel:e}");
            // eigenvector unitarity
            let v = &eig.eigenvectors;
            let dev = (&(&v.adjoint() * v) - &ComplexMatrix::identity(4)).frobenius_norm();
            assert!(dev < 1e-10);
        }
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = mat(2, 2, &[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        assert!(matches!(hermitian_eig(&m), Err(Error::NonHermitian { .. })));
    }

    #[test]
    fn sqrt_identity_and_diagonal() {
        let s = psd_sqrt(&ComplexMatrix::identity(3)).unwrap();
        assert!((&s - &ComplexMatrix::identity(3)).frobenius_norm() < 1e-14);

        let m = mat(2, 2, &[(4.0, 0.0), (0.0, 0.0), (0.0, 0.0), (9.0, 0.0)]);
        let s = psd_sqrt(&m).unwrap();
        assert!((s[(0, 0)].re - 2.0).abs() < 1e-12);
        assert!((s[(1, 1)].re - 3.0).abs() < 1e-12);
    }

    #[test]
    fn sqrt_squares_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = sampling::random_psd(&mut rng, 3);
        let s = psd_sqrt(&a).unwrap();
        let rel = (&(&s * &s) - &a).frobenius_norm() / a.frobenius_norm();
        assert!(rel < 1e-9, "sqrt reconstruction error {rel:e}");
    }

    #[test]
    fn sqrt_rejects_negative() {
        let m = mat(2, 2, &[(-1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        assert!(matches!(psd_sqrt(&m), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn trace_norm_examples() {
        let m = mat(2, 2, &[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (-2.0, 0.0)]);
        assert!((trace_norm(&m) - 3.0).abs() < 1e-12);

        let n = mat(2, 2, &[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        assert!((trace_norm(&n) - 1.0).abs() < 1e-12);

        assert_eq!(trace_norm(&ComplexMatrix::zeros(3, 3)), 0.0);
    }

    #[test]
    fn partial_trace_of_product_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = sampling::random_psd(&mut rng, 2);
        let sigma = sampling::random_psd(&mut rng, 3);
        let prod = rho.kron(&sigma);

        let tr2 = partial_trace(&prod, 2, 3, Factor::Second).unwrap();
        let expect = rho.scale(sigma.trace());
        assert!((&tr2 - &expect).frobenius_norm() < 1e-12);

        let tr1 = partial_trace(&prod, 2, 3, Factor::First).unwrap();
        let expect = sigma.scale(rho.trace());
        assert!((&tr1 - &expect).frobenius_norm() < 1e-12);
    }

    #[test]
    fn partial_trace_of_bell_projector() {
        let inv = 1.0 / 2f64.sqrt();
        let bell = [cr(inv), cr(0.0), cr(0.0), cr(inv)];
        let proj = ComplexMatrix::outer(&bell, &bell);
        let red = partial_trace(&proj, 2, 2, Factor::Second).unwrap();
        let half = ComplexMatrix::identity(2).scale_re(0.5);
        assert!((&red - &half).frobenius_norm() < 1e-12);
    }

    #[test]
    fn partial_trace_of_identity() {
        let id4 = ComplexMatrix::identity(4);
        let tr1 = partial_trace(&id4, 2, 2, Factor::First).unwrap();
        assert!((&tr1 - &ComplexMatrix::identity(2).scale_re(2.0)).frobenius_norm() < 1e-14);
    }

    #[test]
    fn partial_trace_shape_check() {
        let m = ComplexMatrix::identity(5);
        assert!(matches!(
            partial_trace(&m, 2, 2, Factor::First),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn pairing_examples() {
        let e01 = mat(2, 2, &[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        let val = transpose_and_pairing(&e01, &e01).unwrap();
        assert!((val - cr(1.0)).norm() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rho = sampling::random_psd(&mut rng, 3);
        let val = transpose_and_pairing(&ComplexMatrix::identity(3), &rho).unwrap();
        assert!((val - rho.trace()).norm() < 1e-13);
    }

    #[test]
    fn pairing_two_sided() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let b = sampling::random_matrix(&mut rng, 3, 3);
            let rho = sampling::random_matrix(&mut rng, 3, 3);
            let lhs = transpose_and_pairing(&b, &rho).unwrap();
            let rhs = (&b.transpose() * &rho).trace();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn trace_sqrt_identity_and_orthogonal() {
        let id = ComplexMatrix::identity(4);
        assert!((trace_sqrt_product(&id, &id).unwrap() - 4.0).abs() < 1e-12);

        let p0 = mat(2, 2, &[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        let p1 = mat(2, 2, &[(0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        assert!(trace_sqrt_product(&p0, &p1).unwrap().abs() < 1e-12);
    }

    #[test]
    fn trace_sqrt_commuting_is_bhattacharyya() {
        let r = mat(2, 2, &[(4.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        let s = mat(2, 2, &[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (4.0, 0.0)]);
        assert!((trace_sqrt_product(&r, &s).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn trace_sqrt_symmetric_in_arguments() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let r = sampling::random_psd(&mut rng, 3);
            let s = sampling::random_psd(&mut rng, 3);
            let a = trace_sqrt_product(&r, &s).unwrap();
            let b = trace_sqrt_product(&s, &r).unwrap();
            assert!((a - b).abs() < 1e-9, "asymmetry {:e}", (a - b).abs());
        }
    }

    #[test]
    fn trace_sqrt_rejects_non_psd() {
        let bad = mat(2, 2, &[(-1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        let ok = ComplexMatrix::identity(2);
        assert!(matches!(
            trace_sqrt_product(&bad, &ok),
            Err(Error::NotPsd { .. })
        ));
        assert!(matches!(
            trace_sqrt_product(&ok, &bad),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn density_operator_validation() {
        assert!(DensityOperator::new(ComplexMatrix::identity(2).scale_re(0.5)).is_ok());
        // trace 2
        assert!(DensityOperator::new(ComplexMatrix::identity(2)).is_err());
        // negative eigenvalue
        let m = mat(2, 2, &[(1.5, 0.0), (0.0, 0.0), (0.0, 0.0), (-0.5, 0.0)]);
        assert!(matches!(
            DensityOperator::new(m),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn matrix_new_validates() {
        assert!(ComplexMatrix::new(2, 2, vec![cr(0.0); 3]).is_err());
        assert!(ComplexMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn matrix_json_round_trip() {
        let m = mat(1, 2, &[(0.5, -1.0), (2.0, 0.25)]);
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(
            text,
            r#"{"rows":1,"cols":2,"data":[[0.5,-1.0],[2.0,0.25]]}"#
        );
        let back: ComplexMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }

    #[test]
    fn matrix_json_rejects_bad_shape() {
        let text = r#"{"rows":2,"cols":2,"data":[[1.0,0.0]]}"#;
        assert!(serde_json::from_str::<ComplexMatrix>(text).is_err());
    }
}
