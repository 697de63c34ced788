//! Dense linear-algebra helpers shared by the decompositions.

use faer::Side;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result, C64};

pub type CMat = DMatrix<C64>;
pub type RMat = DMatrix<f64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn frob(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `‖u†u − I‖_F`.
pub fn unitary_defect(u: &CMat) -> f64 {
    let n = u.ncols();
    frob(&(u.adjoint() * u - CMat::identity(n, n)))
}

pub fn check_unitary(u: &CMat, tol: f64) -> Result<()> {
    if !u.is_square() {
        return Err(Error::Shape(format!("{}x{} is not square", u.nrows(), u.ncols())));
    }
    let d = unitary_defect(u);
    if d > tol {
        return Err(Error::NotUnitary(d));
    }
    Ok(())
}

fn to_faer<T: Copy>(m: &DMatrix<T>) -> faer::Mat<T> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer<T: Copy + nalgebra::Scalar>(m: faer::MatRef<'_, T>) -> DMatrix<T> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Eigendecomposition of a hermitian matrix with eigenvalues sorted ascending.
///
/// Non-finite input, or a solver failure, yields NaN eigenpairs.
pub fn eigh(h: &CMat) -> (Vec<f64>, CMat) {
    let n = h.nrows();
    let sym = (h + h.adjoint()).scale(0.5);
    if !sym.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return (vec![f64::NAN; n], CMat::from_element(n, n, C64::new(f64::NAN, f64::NAN)));
    }
    match to_faer(&sym).self_adjoint_eigen(Side::Lower) {
        Ok(eig) => {
            let vals = eig.S().column_vector().iter().map(|z| z.re).collect();
            (vals, from_faer(eig.U()))
        }
        Err(_) => (vec![f64::NAN; n], CMat::from_element(n, n, C64::new(f64::NAN, f64::NAN))),
    }
}

/// Eigendecomposition of a real symmetric matrix, eigenvalues descending.
pub fn eigh_real_desc(m: &RMat) -> (Vec<f64>, RMat) {
    let n = m.nrows();
    let sym = (m + m.transpose()).scale(0.5);
    if !sym.iter().all(|x| x.is_finite()) {
        return (vec![f64::NAN; n], RMat::from_element(n, n, f64::NAN));
    }
    match to_faer(&sym).self_adjoint_eigen(Side::Lower) {
        Ok(eig) => {
            let s = eig.S();
            let u = eig.U();
            let vals = (0..n).rev().map(|i| s.column_vector()[i]).collect();
            let vecs = RMat::from_fn(n, n, |r, c| u[(r, n - 1 - c)]);
            (vals, vecs)
        }
        Err(_) => (vec![f64::NAN; n], RMat::from_element(n, n, f64::NAN)),
    }
}

/// Thin SVD `m = u diag(s) v†` with singular values descending.
pub struct Svd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

pub fn svd(m: &CMat) -> Result<Svd> {
    if !m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Invalid("SVD of a non-finite matrix".into()));
    }
    let d = to_faer(m)
        .thin_svd()
        .map_err(|e| Error::Invalid(format!("SVD failed: {e:?}")))?;
    Ok(Svd {
        u: from_faer(d.U()),
        s: d.S().column_vector().iter().map(|z| z.re).collect(),
        v: from_faer(d.V()),
    })
}

/// Singular values, descending. Empty for an empty or non-finite matrix.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.is_empty() || !m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Vec::new();
    }
    let mut sv = to_faer(m).singular_values().unwrap_or_default();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Spectral data of an antihermitian generator `κ = V diag(iω) V†`.
#[derive(Clone, Debug)]
pub struct AntihermitianEigen {
    pub vectors: CMat,
    pub omega: Vec<f64>,
}

impl AntihermitianEigen {
    pub fn new(kappa: &CMat) -> Self {
        let h = kappa.map(|z| -I * z);
        let (omega, vectors) = eigh(&h);
        Self { vectors, omega }
    }

    pub fn exp(&self) -> CMat {
        let v = &self.vectors;
        let phases = DVector::from_iterator(
            self.omega.len(),
            self.omega.iter().map(|w| C64::from_polar(1.0, *w)),
        );
        let mut vd = v.clone();
        for (j, mut col) in vd.column_iter_mut().enumerate() {
            col *= phases[j];
        }
        vd * v.adjoint()
    }
}

/// `exp(κ)` for antihermitian `κ`, unitary to machine precision.
pub fn expm_antihermitian(kappa: &CMat) -> CMat {
    AntihermitianEigen::new(kappa).exp()
}

/// Diagonalization `z = μ diag(λ) μ†` of a normal matrix.
///
/// The hermitian part is diagonalized first; the antihermitian part is then
/// diagonalized inside each degenerate eigenspace of the hermitian part.
/// If the result does not reconstruct `z`, a general eigensolver is used.
pub fn diagonalize_normal(z: &CMat) -> Result<(CMat, Vec<C64>)> {
    let n = z.nrows();
    if !z.iter().all(|x| x.re.is_finite() && x.im.is_finite()) {
        return Err(Error::Invalid("cannot diagonalize a non-finite matrix".into()));
    }
    let scale = frob(z).max(f64::MIN_POSITIVE);
    let tol = 1e-9 * scale;
    let h = (z + z.adjoint()).scale(0.5);
    let k = (z - z.adjoint()).scale(0.5);
    let (hv, mut mu) = eigh(&h);

    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (hv[end] - hv[end - 1]).abs() <= tol {
            end += 1;
        }
        if end - start > 1 {
            let block = mu.columns(start, end - start).into_owned();
            let kb = block.adjoint() * &k * &block;
            let (_, w) = eigh(&kb.map(|x| -I * x));
            let rotated = &block * w;
            mu.columns_mut(start, end - start).copy_from(&rotated);
        }
        start = end;
    }

    let d = mu.adjoint() * z * &mu;
    let lambda: Vec<C64> = (0..n).map(|i| d[(i, i)]).collect();
    if reconstruct_err(z, &mu, &lambda) <= 1e-10 * scale {
        return Ok((mu, lambda));
    }

    // General eigenvectors, orthonormalized: for normal input the QR factor
    // is a set of Schur vectors, hence eigenvectors.
    let eig = to_faer(z)
        .eigen()
        .map_err(|e| Error::Invalid(format!("eigendecomposition failed: {e:?}")))?;
    let (q, _) = nalgebra::QR::new(from_faer(eig.U())).unpack();
    let d = q.adjoint() * z * &q;
    let lambda: Vec<C64> = (0..n).map(|i| d[(i, i)]).collect();
    let err = reconstruct_err(z, &q, &lambda);
    if err <= 1e-9 * scale {
        Ok((q, lambda))
    } else {
        Err(Error::Invalid(format!(
            "matrix is not normal to working precision (residual {err:.3e})"
        )))
    }
}

fn reconstruct_err(z: &CMat, mu: &CMat, lambda: &[C64]) -> f64 {
    let mut m = mu.clone();
    for (j, mut col) in m.column_iter_mut().enumerate() {
        col *= lambda[j];
    }
    frob(&(z - m * mu.adjoint()))
}

/// Principal logarithm of a unitary matrix, returned as an antihermitian matrix.
pub fn log_unitary(u: &CMat) -> Result<CMat> {
    let (w, lambda) = diagonalize_normal(u)?;
    let mut m = w.clone();
    for (j, mut col) in m.column_iter_mut().enumerate() {
        col *= C64::new(0.0, lambda[j].arg());
    }
    let k = m * w.adjoint();
    Ok((&k - k.adjoint()).scale(0.5))
}

pub fn random_complex<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_antihermitian<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> CMat {
    let g = random_complex(n, n, rng);
    (&g - g.adjoint()).scale(0.5 * scale)
}

/// Haar-ish random unitary from the exponential of a random generator.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let g = random_complex(n, n, rng);
    let (q, r) = nalgebra::QR::new(g).unpack();
    // Fix column phases so the distribution does not depend on the QR convention.
    let mut q = q;
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= ph;
    }
    q
}

pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> RMat {
    let g = RMat::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let (q, r) = nalgebra::QR::new(g).unpack();
    let mut q = q;
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            let mut col = q.column_mut(j);
            col *= -1.0;
        }
    }
    q
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

/// Largest singular value.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    singular_values(m).first().copied().unwrap_or(f64::NAN)
}
