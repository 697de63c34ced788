//! Analytical sum-of-squares decompositions.
//!
//! Both routes start from the supermatrix `X` of a charge-charge tensor and
//! assume the operator is antihermitian, which makes `X` complex symmetric
//! and `X = −adj(X)`. Under that assumption:
//!
//! * Takagi: `X = Σ_l y_l ⊗ y_l` with `y = √σ u`, and
//!   `X̂ = ¼ Σ_l (Y⁺_l² + Y⁻_l²)` with the normal operators `Y^± = Y ± iY†`.
//! * SVD: `X = Σ_l Û_l ⊗ V̂_l`, and with `S = Û + V̂`, `D = Û − V̂`,
//!   `X̂ = (1/16) Σ_l [(S+iS†)² + (S−iS†)² − (D+iD†)² − (D−iD†)²]`.
//!
//! Each square `Z²` of a normal `Z = μ diag(λ) μ†` becomes one [`SOSFactor`]
//! with the rank-one coupling `J = w λλᵀ`, the prefactor `w` absorbed.

use crate::linalg::{diagonalize_normal, eigh_real_desc, frob, CMat, RMat, I};
use crate::tensor::{
    normal_order_to_charge_charge, reshape_to_supermatrix, singular_values, symmetrize_pairs,
    CoeffTensor4, Convention, FactorOrigin, NormalOperatorCoeffs, OneBodyCorrection, SOSFactor,
    SuperMatrix,
};
use crate::{par, Error, Result, C64};

/// Relative symmetry tolerance for inputs.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Takagi/singular values below this fraction of the largest are dropped.
pub const DROP_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct TakagiResult {
    pub u: CMat,
    pub sigma: Vec<f64>,
}

impl TakagiResult {
    /// `U diag(σ) Uᵀ`.
    pub fn reconstruct(&self) -> CMat {
        let mut us = self.u.clone();
        for (j, mut col) in us.column_iter_mut().enumerate() {
            col *= C64::new(self.sigma[j], 0.0);
        }
        us * self.u.transpose()
    }
}

/// Takagi factorization `m = U diag(σ) Uᵀ` of a complex symmetric matrix.
///
/// Uses the real symmetric embedding `[[Re m, Im m], [Im m, −Re m]]`, whose
/// eigenvector `(x, y)` at eigenvalue `σ` gives the Takagi vector `x + iy`.
/// The partner `(−y, x)` sits at `−σ`, so scanning eigenvectors in
/// descending order and keeping those orthogonal to every accepted vector
/// and its partner yields a complete unitary, null space included.
pub fn takagi(m: &CMat) -> Result<TakagiResult> {
    let dim = m.nrows();
    if !m.is_square() {
        return Err(Error::Shape(format!("{}x{} is not square", m.nrows(), m.ncols())));
    }
    let norm = frob(m);
    let asym = frob(&(m - m.transpose()));
    if asym > SYMMETRY_TOL * norm {
        return Err(Error::Symmetry {
            what: "Takagi input is not complex symmetric".into(),
            residual: asym,
            tol: SYMMETRY_TOL * norm,
        });
    }
    if dim == 0 {
        return Ok(TakagiResult {
            u: CMat::zeros(0, 0),
            sigma: Vec::new(),
        });
    }

    let re = m.map(|z| z.re);
    let im = m.map(|z| z.im);
    let mut emb = RMat::zeros(2 * dim, 2 * dim);
    emb.view_mut((0, 0), (dim, dim)).copy_from(&re);
    emb.view_mut((0, dim), (dim, dim)).copy_from(&im);
    emb.view_mut((dim, 0), (dim, dim)).copy_from(&im);
    emb.view_mut((dim, dim), (dim, dim)).copy_from(&(-&re));
    let (_, vecs) = eigh_real_desc(&emb);

    // Accepted real vectors and their partners, kept orthonormal.
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(2 * dim);
    let mut chosen: Vec<Vec<f64>> = Vec::with_capacity(dim);
    let accept = |v: Vec<f64>, basis: &mut Vec<Vec<f64>>, chosen: &mut Vec<Vec<f64>>| {
        let partner: Vec<f64> = v[dim..].iter().map(|y| -y).chain(v[..dim].iter().copied()).collect();
        basis.push(v.clone());
        basis.push(partner);
        chosen.push(v);
    };
    for k in 0..2 * dim {
        if chosen.len() == dim {
            break;
        }
        let (v, nv) = project_out(vecs.column(k).iter().copied().collect(), &basis);
        if nv < 0.5 {
            continue;
        }
        accept(v.into_iter().map(|x| x / nv).collect(), &mut basis, &mut chosen);
    }
    // Inside a large null space the scan can run dry; any orthonormal
    // completion is valid there. Pivoted Gram-Schmidt over unit vectors.
    while chosen.len() < dim {
        let best = (0..dim)
            .map(|i| {
                let mut e = vec![0.0; 2 * dim];
                e[i] = 1.0;
                project_out(e, &basis)
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("dim > 0");
        if best.1 < 1e-3 {
            break;
        }
        let nv = best.1;
        accept(best.0.into_iter().map(|x| x / nv).collect(), &mut basis, &mut chosen);
    }
    if chosen.len() != dim {
        return Err(Error::Invalid(format!(
            "Takagi basis completion found {} of {dim} vectors",
            chosen.len()
        )));
    }

    let mut cols: Vec<(f64, Vec<C64>)> = chosen
        .into_iter()
        .map(|v| {
            let u: Vec<C64> = (0..dim).map(|i| C64::new(v[i], v[dim + i])).collect();
            // σ = u† m conj(u), real and nonnegative for a true Takagi vector
            let mut s = C64::new(0.0, 0.0);
            for i in 0..dim {
                let mut row = C64::new(0.0, 0.0);
                for j in 0..dim {
                    row += m[(i, j)] * u[j].conj();
                }
                s += u[i].conj() * row;
            }
            (s.re.max(0.0), u)
        })
        .collect();
    cols.sort_by(|a, b| b.0.total_cmp(&a.0));
    let sigma = cols.iter().map(|c| c.0).collect();
    let u = CMat::from_fn(dim, dim, |r, c| cols[c].1[r]);
    Ok(TakagiResult { u, sigma })
}

/// Removes the components along an orthonormal `basis`, twice for stability.
fn project_out(mut v: Vec<f64>, basis: &[Vec<f64>]) -> (Vec<f64>, f64) {
    for _ in 0..2 {
        for b in basis {
            let d: f64 = v.iter().zip(b).map(|(a, b)| a * b).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= d * bi;
            }
        }
    }
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    (v, nv)
}

/// Checks the two structural properties both decompositions rely on.
/// Brings an antihermitian two-body operator into decomposable form.
///
/// Accepts ladder or charge-charge input and returns `(X, S)` with `X`
/// pair-symmetric and adjoint-antisymmetric and `Ŝ` antihermitian, such that
/// the input operator equals `X̂ − Ŝ`. Fails if the operator is not
/// antihermitian.
pub fn prepare_generator(t: &CoeffTensor4) -> Result<(CoeffTensor4, OneBodyCorrection)> {
    let n = t.n();
    let (x, s0) = match t.convention() {
        Convention::PqrsLadder => normal_order_to_charge_charge(t)?,
        Convention::ChargeCharge => (t.clone(), OneBodyCorrection::zeros(n)),
        Convention::HermitianChemist => {
            return Err(Error::Invalid(
                "integral tensors are handled by the eri module, not as generators".into(),
            ))
        }
    };
    let (xs, ds) = symmetrize_pairs(&x)?;
    let s_tot = s0.s + ds.s;
    let adj = xs.adjoint();
    let herm = xs.add(&adj)?.scale(C64::new(0.5, 0.0));
    let anti = xs.sub(&adj)?.scale(C64::new(0.5, 0.0));

    // a†_p a_q a†_r a_s = a†_p a†_r a_s a_q + δ_qr a†_p a_s: the hermitian part
    // must reduce to the hermitian part of the accumulated one-body term.
    let ladder = CoeffTensor4::from_fn(n, Convention::PqrsLadder, |p, r, q, s| herm.get(p, q, r, s));
    let two_body = ladder.antisymmetrize().norm();
    let one = CMat::from_fn(n, n, |p, s| (0..n).map(|q| herm.get(p, q, q, s)).sum::<C64>());
    let s_herm = (&s_tot + s_tot.adjoint()).scale(0.5);
    let one_body = frob(&(one - &s_herm));
    let tol = SYMMETRY_TOL * t.norm().max(1.0);
    if two_body.max(one_body) > tol {
        return Err(Error::Symmetry {
            what: "operator is not antihermitian".into(),
            residual: two_body.max(one_body),
            tol,
        });
    }
    let s_anti = (&s_tot - s_tot.adjoint()).scale(0.5);
    Ok((anti, OneBodyCorrection { s: s_anti }))
}

fn checked_supermatrix(x: &SuperMatrix) -> Result<()> {
    let norm = frob(x.mat());
    let tol = SYMMETRY_TOL * norm.max(f64::MIN_POSITIVE);
    let sym = x.symmetry_residual();
    if sym > tol {
        return Err(Error::Symmetry {
            what: "supermatrix is not complex symmetric".into(),
            residual: sym,
            tol,
        });
    }
    let adj = x.adjoint_residual();
    if adj > tol {
        return Err(Error::Symmetry {
            what: "operator is not antihermitian; project it first".into(),
            residual: adj,
            tol,
        });
    }
    Ok(())
}

fn unflatten(col: impl Iterator<Item = C64>, n: usize) -> CMat {
    let v: Vec<C64> = col.collect();
    CMat::from_row_slice(n, n, &v)
}

/// Per-column Takagi data `y_l = √σ_l u_l` and the normal combinations.
#[derive(Clone, Debug)]
pub struct TakagiSosIntermediates {
    pub sigma: Vec<f64>,
    pub y: Vec<CMat>,
    pub y_plus: Vec<CMat>,
    pub y_minus: Vec<CMat>,
}

pub fn takagi_intermediates(x: &SuperMatrix) -> Result<TakagiSosIntermediates> {
    checked_supermatrix(x)?;
    let n = x.n();
    let tk = takagi(x.mat())?;
    let top = tk.sigma.first().copied().unwrap_or(0.0);
    let mut out = TakagiSosIntermediates {
        sigma: Vec::new(),
        y: Vec::new(),
        y_plus: Vec::new(),
        y_minus: Vec::new(),
    };
    for (l, &s) in tk.sigma.iter().enumerate() {
        if s <= DROP_TOL * top || s == 0.0 {
            break;
        }
        let y = unflatten(tk.u.column(l).iter().map(|z| z * s.sqrt()), n);
        let yd = y.adjoint();
        out.y_plus.push(&y + &yd * I);
        out.y_minus.push(&y - &yd * I);
        out.y.push(y);
        out.sigma.push(s);
    }
    Ok(out)
}

/// Eigendecomposition used for each normal one-body operator.
pub(crate) type Diagonalizer = dyn Fn(&CMat) -> Result<(CMat, Vec<C64>)> + Sync;

/// Factor for `w Z²` with `Z = Σ z_{pq} a†_p a_q` normal.
fn square_factor(
    z: &CMat,
    weight: C64,
    origin: FactorOrigin,
    index: usize,
    diag: &Diagonalizer,
) -> Result<SOSFactor> {
    let (mu, lambda) = diag(z).map_err(|e| Error::Factor {
        index,
        reason: format!("normal-operator diagonalization failed: {e}"),
    })?;
    let n = z.nrows();
    let j = CMat::from_fn(n, n, |p, q| weight * lambda[p] * lambda[q]);
    SOSFactor::new(mu, j, origin)
}

fn row_major(n: usize) -> impl Fn(&[C64]) -> CMat + Sync {
    move |v: &[C64]| CMat::from_row_slice(n, n, v)
}

/// Takagi factors of `m`, with `unflat` mapping a column of `U` to the
/// one-body coefficient matrix it represents.
pub(crate) fn takagi_factors_from(
    m: &CMat,
    unflat: &(dyn Fn(&[C64]) -> CMat + Sync),
    diag: &Diagonalizer,
    truncate: Option<usize>,
) -> Result<Vec<SOSFactor>> {
    let tk = takagi(m)?;
    let top = tk.sigma.first().copied().unwrap_or(0.0);
    let kept = tk.sigma.iter().take_while(|&&s| s > DROP_TOL * top && s > 0.0).count();
    let quarter = C64::new(0.25, 0.0);
    let floor = 1e-14 * top.sqrt();
    let pairs = par::map_range(kept, |l| -> Result<Vec<SOSFactor>> {
        let col: Vec<C64> = tk.u.column(l).iter().map(|z| z * tk.sigma[l].sqrt()).collect();
        let y = unflat(&col);
        let yd = y.adjoint();
        let mut fs = Vec::with_capacity(2);
        for (k, z) in [&y + &yd * I, &y - &yd * I].iter().enumerate() {
            // one half vanishes when y is a phase times a hermitian matrix
            if frob(z) > floor * (z.nrows() as f64) {
                fs.push(square_factor(z, quarter, FactorOrigin::Takagi, 2 * l + k, diag)?);
            }
        }
        Ok(fs)
    });
    let mut out = Vec::with_capacity(2 * kept);
    for p in pairs {
        out.extend(p?);
    }
    if let Some(l) = truncate {
        out.truncate(l);
    }
    Ok(out)
}

/// SVD factors of `m`; see [`takagi_factors_from`] for `unflat`.
pub(crate) fn svd_factors_from(
    m: &CMat,
    unflat: &(dyn Fn(&[C64]) -> CMat + Sync),
    diag: &Diagonalizer,
) -> Result<Vec<SOSFactor>> {
    let svd = crate::linalg::svd(m)?;
    let u = &svd.u;
    let vt = svd.v.adjoint();
    let mut order: Vec<usize> = (0..svd.s.len()).collect();
    order.sort_by(|&a, &b| svd.s[b].total_cmp(&svd.s[a]));
    let top = order.first().map(|&i| svd.s[i]).unwrap_or(0.0);
    order.retain(|&i| svd.s[i] > DROP_TOL * top && svd.s[i] > 0.0);
    let floor = 1e-14 * top.sqrt();
    let w = 1.0 / 16.0;
    let per = par::map_range(order.len(), |rank| -> Result<Vec<SOSFactor>> {
        let l = order[rank];
        let r = svd.s[l].sqrt();
        // X = Σ σ u_l v_l†, and row l of V† is conj(v_l)
        let uc: Vec<C64> = u.column(l).iter().map(|z| z * r).collect();
        let vc: Vec<C64> = vt.row(l).iter().map(|z| z * r).collect();
        let (uh, vh) = (unflat(&uc), unflat(&vc));
        let mut fs = Vec::with_capacity(4);
        for (base, weight) in [(&uh + &vh, w), (&uh - &vh, -w)] {
            if frob(&base) <= floor * (base.nrows() as f64) {
                continue;
            }
            let bd = base.adjoint();
            for sign in [1.0, -1.0] {
                let z = &base + &bd * (I * sign);
                let index = 4 * rank + fs.len();
                fs.push(square_factor(&z, C64::new(weight, 0.0), FactorOrigin::Svd, index, diag)?);
            }
        }
        Ok(fs)
    });
    let mut out = Vec::new();
    for p in per {
        out.extend(p?);
    }
    Ok(out)
}

/// Takagi sum of squares: up to two factors per retained Takagi value, sorted by σ.
///
/// `truncate` keeps at most that many factors.
pub fn takagi_sos(x: &SuperMatrix, truncate: Option<usize>) -> Result<Vec<SOSFactor>> {
    checked_supermatrix(x)?;
    takagi_factors_from(x.mat(), &row_major(x.n()), &diagonalize_normal, truncate)
}

/// Convenience wrapper taking a charge-charge tensor.
pub fn takagi_sos_tensor(t: &CoeffTensor4, truncate: Option<usize>) -> Result<Vec<SOSFactor>> {
    takagi_sos(&reshape_to_supermatrix(t)?, truncate)
}

/// Per singular value: `Û_l`, `V̂_l` (with `√σ` absorbed), `S_l`, `D_l`.
#[derive(Clone, Debug)]
pub struct SvdSosIntermediates {
    pub sigma: Vec<f64>,
    pub u_vec: Vec<CMat>,
    pub v_vec: Vec<CMat>,
    pub s: Vec<CMat>,
    pub d: Vec<CMat>,
}

pub fn svd_intermediates(x: &SuperMatrix) -> Result<SvdSosIntermediates> {
    checked_supermatrix(x)?;
    let n = x.n();
    let svd = crate::linalg::svd(x.mat())?;
    let u = &svd.u;
    let vt = svd.v.adjoint();
    let mut order: Vec<usize> = (0..svd.s.len()).collect();
    order.sort_by(|&a, &b| svd.s[b].total_cmp(&svd.s[a]));
    let top = order.first().map(|&i| svd.s[i]).unwrap_or(0.0);
    let mut out = SvdSosIntermediates {
        sigma: Vec::new(),
        u_vec: Vec::new(),
        v_vec: Vec::new(),
        s: Vec::new(),
        d: Vec::new(),
    };
    for &l in &order {
        let s = svd.s[l];
        if s <= DROP_TOL * top || s == 0.0 {
            break;
        }
        let r = s.sqrt();
        let uh = unflatten(u.column(l).iter().map(|z| z * r), n);
        let vh = unflatten(vt.row(l).iter().map(|z| z * r), n);
        out.s.push(&uh + &vh);
        out.d.push(&uh - &vh);
        out.u_vec.push(uh);
        out.v_vec.push(vh);
        out.sigma.push(s);
    }
    Ok(out)
}

/// SVD sum of squares: up to four factors per retained singular value.
///
/// Squares whose one-body operator vanishes (for example `D = 0` when
/// `Û = V̂`) are omitted.
pub fn svd_sos(x: &SuperMatrix) -> Result<Vec<SOSFactor>> {
    checked_supermatrix(x)?;
    svd_factors_from(x.mat(), &row_major(x.n()), &diagonalize_normal)
}

pub fn svd_sos_tensor(t: &CoeffTensor4) -> Result<Vec<SOSFactor>> {
    svd_sos(&reshape_to_supermatrix(t)?)
}

/// Recovers `z = μ diag(λ) μ†` from a rank-one factor `J = λλᵀ`.
pub fn factor_to_normal_operator(f: &SOSFactor) -> Result<NormalOperatorCoeffs> {
    let defect = f.rank_one_defect();
    if defect > 1e-10 {
        return Err(Error::Factor {
            index: 0,
            reason: format!(
                "J has rank > 1 (σ₂/‖J‖ = {defect:.3e}); realize it through the charge-charge exponential instead of a single Z"
            ),
        });
    }
    let n = f.n();
    let j = &f.j;
    let (k, jkk) = (0..n)
        .map(|k| (k, j[(k, k)]))
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .unwrap_or((0, C64::new(0.0, 0.0)));
    if jkk.norm() == 0.0 {
        return Ok(NormalOperatorCoeffs { z: CMat::zeros(n, n) });
    }
    let lk = jkk.sqrt();
    let lambda: Vec<C64> = (0..n).map(|p| if p == k { lk } else { j[(p, k)] / lk }).collect();
    let mut m = f.mu.clone();
    for (c, mut col) in m.column_iter_mut().enumerate() {
        col *= lambda[c];
    }
    Ok(NormalOperatorCoeffs {
        z: m * f.mu.adjoint(),
    })
}

/// Singular values of a supermatrix, for comparison with Takagi values.
pub fn supermatrix_singular_values(x: &SuperMatrix) -> Vec<f64> {
    singular_values(x.mat())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_complex;
    use crate::tensor::{project_antihermitian, reconstruct, Convention};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> CMat {
        let g = random_complex(n, n, rng);
        (&g + g.transpose()).scale(0.5)
    }

    /// Antihermitian generator with a symmetric supermatrix.
    fn random_generator(n: usize, rng: &mut ChaCha8Rng) -> CoeffTensor4 {
        let raw = CoeffTensor4::from_fn(n, Convention::ChargeCharge, |_, _, _, _| C64::new(0.0, 0.0));
        let g = random_complex(n * n, n * n, rng);
        let mut x = raw;
        let nn = n * n;
        for a in 0..nn {
            for b in 0..nn {
                let v = (g[(a, b)] + g[(b, a)]) * 0.5;
                x.set(a / n, a % n, b / n, b % n, v);
            }
        }
        project_antihermitian(&x)
    }

    #[test]
    fn takagi_identity() {
        let m = CMat::identity(3, 3);
        let t = takagi(&m).unwrap();
        assert_eq!(t.sigma.len(), 3);
        for s in &t.sigma {
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert!(frob(&(t.reconstruct() - m)) < 1e-12);
    }

    #[test]
    fn takagi_real_diagonal() {
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = C64::new(2.0, 0.0);
        m[(1, 1)] = C64::new(1.0, 0.0);
        let t = takagi(&m).unwrap();
        assert!((t.sigma[0] - 2.0).abs() < 1e-14 && (t.sigma[1] - 1.0).abs() < 1e-14);
        // columns are ±e_k
        assert!((t.u[(0, 0)].norm() - 1.0).abs() < 1e-14);
        assert!(t.u[(0, 0)].im.abs() < 1e-14 && t.u[(1, 1)].im.abs() < 1e-14);
    }

    #[test]
    fn takagi_matches_svd_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let m = random_symmetric(6, &mut rng);
        let t = takagi(&m).unwrap();
        let sv = singular_values(&m);
        for (a, b) in t.sigma.iter().zip(&sv) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(frob(&(t.reconstruct() - &m)) < 1e-10 * frob(&m));
        assert!(crate::linalg::unitary_defect(&t.u) < 1e-10);
    }

    #[test]
    fn takagi_rank_deficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v = random_complex(5, 2, &mut rng);
        let m = &v * v.transpose();
        let t = takagi(&m).unwrap();
        assert!(t.sigma[2] < 1e-12);
        assert!(crate::linalg::unitary_defect(&t.u) < 1e-10);
        assert!(frob(&(t.reconstruct() - &m)) < 1e-10 * frob(&m));
    }

    #[test]
    fn takagi_large_null_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..5 {
            let v = random_complex(36, 6, &mut rng);
            let m = &v * v.transpose();
            let t = takagi(&m).unwrap();
            assert!(crate::linalg::unitary_defect(&t.u) < 1e-10);
            assert!(frob(&(t.reconstruct() - &m)) < 1e-10 * frob(&m));
        }
    }

    #[test]
    fn takagi_rejects_nonsymmetric() {
        let mut m = CMat::identity(2, 2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(takagi(&m), Err(Error::Symmetry { .. })));
    }

    #[test]
    fn zero_tensor_gives_no_factors() {
        let t = CoeffTensor4::zeros(3, Convention::ChargeCharge);
        assert!(takagi_sos_tensor(&t, None).unwrap().is_empty());
        assert!(svd_sos_tensor(&t).unwrap().is_empty());
    }

    #[test]
    fn takagi_and_svd_reconstruct_tensor() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = random_generator(3, &mut rng);
        for fs in [takagi_sos_tensor(&x, None).unwrap(), svd_sos_tensor(&x).unwrap()] {
            let back = reconstruct(3, &fs).unwrap();
            assert!(back.sub(&x).unwrap().norm() < 1e-10 * x.norm());
            for f in &fs {
                assert!(f.rank_one_defect() < 1e-10);
                assert!(f.unitarity_defect() < 1e-10);
            }
        }
    }

    #[test]
    fn prepared_ladder_generator_matches_operator() {
        use crate::fock::{verify_factorization, VerifyMode};
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let n = 3;
        let g = random_complex(n * n, n * n, &mut rng);
        let raw = CoeffTensor4::from_fn(n, Convention::PqrsLadder, |p, q, r, s| g[(p * n + q, r * n + s)]);
        let a = project_antihermitian(&raw);
        let (x, s) = prepare_generator(&a).unwrap();
        let sm = reshape_to_supermatrix(&x).unwrap();
        assert!(sm.symmetry_residual() < 1e-12 && sm.adjoint_residual() < 1e-12);
        let fs = takagi_sos(&sm, None).unwrap();
        let v = verify_factorization(&a, Some(&s), &fs, VerifyMode::ExactSum).unwrap();
        assert!(v.op_error < 1e-10, "{}", v.op_error);
        assert!(prepare_generator(&raw).is_err());
    }

    #[test]
    fn intermediates_are_normal() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let x = reshape_to_supermatrix(&random_generator(3, &mut rng)).unwrap();
        let inter = takagi_intermediates(&x).unwrap();
        for y in inter.y_plus.iter().chain(&inter.y_minus) {
            let z = NormalOperatorCoeffs { z: y.clone() };
            assert!(z.normality_residual() < 1e-10 * frob(y).powi(2));
        }
    }

    #[test]
    fn normal_operator_of_number_factor() {
        let n = 3;
        let mut j = CMat::zeros(n, n);
        j[(0, 0)] = C64::new(1.0, 0.0);
        let f = SOSFactor::new(CMat::identity(n, n), j.clone(), FactorOrigin::Takagi).unwrap();
        let z = factor_to_normal_operator(&f).unwrap();
        assert!(frob(&(z.z - j)) < 1e-15);
    }

    #[test]
    fn normal_operator_rejects_full_rank() {
        let f = SOSFactor::new(CMat::identity(2, 2), CMat::identity(2, 2), FactorOrigin::Uc).unwrap();
        assert!(matches!(factor_to_normal_operator(&f), Err(Error::Factor { .. })));
    }
}
