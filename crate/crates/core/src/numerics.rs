//! Dense complex Hermitian linear algebra.
//!
//! Everything here is a pure function of its inputs. Matrices are
//! `nalgebra` dynamic matrices over `Complex<f64>`; [`HermitianMatrix`]
//! is a thin newtype that guarantees exact conjugate symmetry so the
//! eigensolvers never see a lopsided input.

use nalgebra::{Cholesky, Complex, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Relative asymmetry accepted by [`HermitianMatrix::new`].
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues of a PSD input above this (negative) level are clipped to 0.
pub const PSD_CLIP: f64 = -1e-10;
/// Eigenvalues below this level make [`sqrt_psd`] fail.
pub const PSD_REJECT: f64 = -1e-6;
/// Smallest eigenvalue a pencil's right-hand matrix must exceed.
pub const DEFINITE_TOL: f64 = 1e-12;

/// A square complex matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMat);

impl HermitianMatrix {
    /// Validates conjugate symmetry (relative tolerance [`HERMITIAN_TOL`])
    /// and stores the exactly symmetrized matrix.
    pub fn new(m: CMat) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension(format!(
                "Hermitian matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in j..n {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        if worst > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian(worst));
        }
        Ok(Self::hermitian_part(&m))
    }

    /// `(m + m^H) / 2`, without any symmetry check.
    pub fn hermitian_part(m: &CMat) -> Self {
        assert!(m.is_square(), "hermitian_part needs a square matrix");
        let n = m.nrows();
        let mut out = CMat::zeros(n, n);
        for j in 0..n {
            out[(j, j)] = C64::new(m[(j, j)].re, 0.0);
            for i in (j + 1)..n {
                let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                out[(i, j)] = z;
                out[(j, i)] = z.conj();
            }
        }
        HermitianMatrix(out)
    }

    pub fn identity(n: usize) -> Self {
        HermitianMatrix(CMat::identity(n, n))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        HermitianMatrix(CMat::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(d[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    /// Builds a real symmetric matrix from `f(i, j)`, evaluated for `i >= j`.
    pub fn from_real_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = CMat::zeros(n, n);
        for j in 0..n {
            for i in j..n {
                let v = C64::new(f(i, j), 0.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        HermitianMatrix(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_inner(self) -> CMat {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn scaled(&self, s: f64) -> Self {
        HermitianMatrix(self.0.map(|z| z * s))
    }
}

/// Eigenvalues sorted descending with matching orthonormal eigenvectors
/// (column `k` of `vectors` pairs with `values[k]`).
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V diag(values) V^H`.
    pub fn reconstruct(&self) -> CMat {
        let scaled = scale_columns(&self.vectors, &self.values);
        &scaled * self.vectors.adjoint()
    }

    /// Columns of `vectors` selected by `indices`, in that order.
    pub fn select_columns(&self, indices: &[usize]) -> CMat {
        self.vectors.select_columns(indices)
    }
}

fn scale_columns(m: &CMat, s: &[f64]) -> CMat {
    let mut out = m.clone();
    for (k, mut col) in out.column_iter_mut().enumerate() {
        col *= C64::new(s[k], 0.0);
    }
    out
}

/// Rotates every column so its largest-magnitude entry (first one on ties)
/// is real and positive. Removes the arbitrary global phase eigensolvers
/// leave on each eigenvector.
fn fix_column_phases(v: &mut CMat) {
    for mut col in v.column_iter_mut() {
        let mut best = 0usize;
        let mut best_mag = -1.0f64;
        for (i, z) in col.iter().enumerate() {
            let mag = z.norm();
            if mag > best_mag {
                best_mag = mag;
                best = i;
            }
        }
        if best_mag > 0.0 {
            let rot = col[best].conj() / best_mag;
            col *= rot;
        }
    }
}

/// Hermitian eigendecomposition with eigenvalues in descending order.
///
/// Ties keep the order produced by the underlying solver (stable sort), so
/// the result is deterministic for a given input.
pub fn eigh(h: &HermitianMatrix) -> Result<EigenSystem> {
    let n = h.dim();
    if n == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    let max_iter = 1000 * n.max(8);
    let eig = SymmetricEigen::try_new(h.as_matrix().clone(), f64::EPSILON, max_iter)
        .ok_or_else(|| Error::NumericalFailure("Hermitian eigensolver did not converge".into()))?;
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("non-finite eigenvalue".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite eigenvalues")
    });
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = eig.eigenvectors.select_columns(&order);
    fix_column_phases(&mut vectors);
    Ok(EigenSystem { values, vectors })
}

/// Generalized eigenpairs of the Hermitian-definite pencil `(A, B)`:
/// `A v = λ B v`, sorted by `λ` descending, with `V^H B V = I`.
///
/// Solved by whitening: `B^{-1/2} A B^{-1/2}` is decomposed as an ordinary
/// Hermitian matrix and the eigenvectors mapped back through `B^{-1/2}`.
pub fn gen_eigh_pencil(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<EigenSystem> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!(
            "pencil operands {}x{} and {}x{}",
            a.dim(),
            a.dim(),
            b.dim(),
            b.dim()
        )));
    }
    let eb = eigh(b)?;
    let smallest = *eb.values.last().expect("non-empty");
    if smallest <= DEFINITE_TOL {
        return Err(Error::NotPositiveDefinite(smallest));
    }
    let inv_sqrt: Vec<f64> = eb.values.iter().map(|v| 1.0 / v.sqrt()).collect();
    let whiten = &scale_columns(&eb.vectors, &inv_sqrt) * eb.vectors.adjoint();
    let whitened = HermitianMatrix::hermitian_part(&(&whiten * a.as_matrix() * &whiten));
    let inner = eigh(&whitened)?;
    Ok(EigenSystem {
        values: inner.values,
        vectors: &whiten * inner.vectors,
    })
}

/// Block generalized Rayleigh quotient `tr((V^H B V)^{-1} V^H A V)`.
pub fn block_grq(v: &CMat, a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    let n = a.dim();
    if b.dim() != n || v.nrows() != n {
        return Err(Error::Dimension(format!(
            "V is {}x{}, pencil is {}x{}",
            v.nrows(),
            v.ncols(),
            n,
            b.dim()
        )));
    }
    if v.ncols() == 0 || v.ncols() > n {
        return Err(Error::RankDeficient);
    }
    let gram = HermitianMatrix::hermitian_part(&(v.adjoint() * v));
    let ge = eigh(&gram)?;
    let (hi, lo) = (ge.values[0], *ge.values.last().expect("non-empty"));
    if hi <= 0.0 || lo <= 1e-12 * hi {
        return Err(Error::RankDeficient);
    }
    let vbv = v.adjoint() * b.as_matrix() * v;
    let vav = v.adjoint() * a.as_matrix() * v;
    let chol = hpd_cholesky(&vbv, "V^H B V")?;
    Ok(chol.solve(&vav).trace().re)
}

/// Hermitian PSD square root `U Λ^{1/2} U^H`.
pub fn sqrt_psd(r: &HermitianMatrix) -> Result<CMat> {
    sqrt_from_eigen(&eigh(r)?)
}

/// Square root from an existing eigendecomposition. Eigenvalues in
/// `[PSD_REJECT, 0)` are treated as zero.
pub fn sqrt_from_eigen(e: &EigenSystem) -> Result<CMat> {
    let smallest = *e.values.last().expect("non-empty");
    if smallest < PSD_REJECT {
        return Err(Error::NotPsd(smallest));
    }
    let roots: Vec<f64> = e.values.iter().map(|v| v.max(0.0).sqrt()).collect();
    let s = &scale_columns(&e.vectors, &roots) * e.vectors.adjoint();
    Ok(HermitianMatrix::hermitian_part(&s).into_inner())
}

/// `x ≻ y`: every prefix sum of descending-sorted `x` is at least the
/// corresponding prefix sum of descending-sorted `y`. Non-strict, so
/// `majorizes(x, x)` holds.
pub fn majorizes(x: &[f64], y: &[f64]) -> Result<bool> {
    if x.len() != y.len() {
        return Err(Error::Domain(format!(
            "majorization needs equal lengths, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let scale = sx.abs().max(sy.abs()).max(1.0);
    if (sx - sy).abs() > 1e-9 * scale {
        return Err(Error::Domain(format!(
            "majorization needs equal sums, got {sx} and {sy}"
        )));
    }
    let sorted = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(|a, b| b.partial_cmp(a).expect("finite entries"));
        s
    };
    let (xs, ys) = (sorted(x), sorted(y));
    let tol = 1e-12 * scale;
    let (mut px, mut py) = (0.0, 0.0);
    for (a, b) in xs.iter().zip(&ys) {
        px += a;
        py += b;
        if px < py - tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Cholesky factor of a Hermitian positive-definite matrix. On failure the
/// error carries an eigenvalue-based condition estimate.
pub fn hpd_cholesky(m: &CMat, what: &str) -> Result<Cholesky<C64, Dyn>> {
    let h = HermitianMatrix::hermitian_part(m);
    match Cholesky::new(h.as_matrix().clone()) {
        Some(c) => Ok(c),
        None => Err(Error::Singular {
            what: what.to_string(),
            condition: condition_estimate(&h),
        }),
    }
}

/// `max|λ| / min|λ|` of a Hermitian matrix; infinite when singular.
pub fn condition_estimate(h: &HermitianMatrix) -> f64 {
    match eigh(h) {
        Ok(e) => {
            let abs: Vec<f64> = e.values.iter().map(|v| v.abs()).collect();
            let hi = abs.iter().cloned().fold(0.0, f64::max);
            let lo = abs.iter().cloned().fold(f64::INFINITY, f64::min);
            if lo == 0.0 {
                f64::INFINITY
            } else {
                hi / lo
            }
        }
        Err(_) => f64::NAN,
    }
}

/// `tr(M^{-1})` for Hermitian positive-definite `M`.
pub fn trace_of_inverse(m: &CMat, what: &str) -> Result<f64> {
    let chol = hpd_cholesky(m, what)?;
    Ok(chol.inverse().trace().re)
}

/// Orthonormal basis of the column space of `v` (thin QR).
pub fn orthonormalize_columns(v: &CMat) -> Result<CMat> {
    let (rows, cols) = v.shape();
    if cols == 0 || cols > rows {
        return Err(Error::RankDeficient);
    }
    let qr = v.clone().qr();
    let r = qr.r();
    let scale = v.norm().max(f64::MIN_POSITIVE);
    if (0..cols).any(|k| r[(k, k)].norm() <= 1e-12 * scale) {
        return Err(Error::RankDeficient);
    }
    Ok(qr.q())
}

/// Block-diagonal matrix assembled from `blocks` in order.
pub fn block_diagonal(blocks: &[CMat]) -> CMat {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), b.shape()).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Vertical concatenation of equally wide matrices.
pub fn vstack(blocks: &[CMat]) -> CMat {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vstack needs equal widths");
        out.view_mut((r, 0), b.shape()).copy_from(b);
        r += b.nrows();
    }
    out
}
