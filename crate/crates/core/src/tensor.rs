//! Coefficient tensors, geminal reshaping and residual diagnostics.
//!
//! Index conventions (all storage is row-major `(p, q, r, s)`):
//!
//! * [`Convention::PqrsLadder`]: `A[p,q,r,s]` multiplies `a†_p a†_q a_s a_r`.
//! * [`Convention::ChargeCharge`]: `X[p,q,r,s]` multiplies `a†_p a_q a†_r a_s`.
//!   The supermatrix is the plain reshape with row `(p,q) = p·n + q` and
//!   column `(r,s) = r·n + s`.
//! * [`Convention::HermitianChemist`]: real integrals `(pq|rs)` in
//!   chemists' notation, reshaped the same way as charge-charge tensors.
//!
//! A one-body correction `S` always enters with a minus sign: the operator
//! represented by `(X, S)` is `X̂ − Σ S_{pr} a†_p a_r`.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::linalg::{frob, CMat};
use crate::{par, Error, Result, C64};

/// Relative threshold below which singular values count as zero.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    PqrsLadder,
    ChargeCharge,
    HermitianChemist,
}

impl Convention {
    pub fn as_str(self) -> &'static str {
        match self {
            Convention::PqrsLadder => "pqrs-ladder",
            Convention::ChargeCharge => "charge-charge",
            Convention::HermitianChemist => "hermitian-chemist",
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Convention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pqrs-ladder" => Ok(Convention::PqrsLadder),
            "charge-charge" => Ok(Convention::ChargeCharge),
            "hermitian-chemist" => Ok(Convention::HermitianChemist),
            other => Err(Error::Format(format!("unknown convention {other:?}"))),
        }
    }
}

/// Rank-4 complex coefficient tensor over `n` modes.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffTensor4 {
    n: usize,
    convention: Convention,
    data: Vec<C64>,
}

/// Which structural symmetries a tensor satisfies, measured rather than assumed.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct SymmetryReport {
    /// `max |A_pqrs + A_qprs|, |A_pqrs + A_pqsr|` (ladder convention only).
    pub antisymmetry: Option<f64>,
    /// `max |X − Xᵀ|` of the supermatrix (charge-charge and chemist).
    pub pair_symmetry: Option<f64>,
    /// `max |T + adj(T)|`, zero when the represented operator's tensor is antihermitian.
    pub antihermiticity: f64,
    /// `max |T − adj(T)|`.
    pub hermiticity: f64,
}

impl CoeffTensor4 {
    pub fn zeros(n: usize, convention: Convention) -> Self {
        Self {
            n,
            convention,
            data: vec![C64::new(0.0, 0.0); n.pow(4)],
        }
    }

    pub fn from_vec(n: usize, convention: Convention, data: Vec<C64>) -> Result<Self> {
        if data.len() != n.pow(4) {
            return Err(Error::Shape(format!(
                "{} entries for n = {n}, expected {}",
                data.len(),
                n.pow(4)
            )));
        }
        Ok(Self {
            n,
            convention,
            data,
        })
    }

    pub fn from_fn<F: FnMut(usize, usize, usize, usize) -> C64>(
        n: usize,
        convention: Convention,
        mut f: F,
    ) -> Self {
        let mut data = Vec::with_capacity(n.pow(4));
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        data.push(f(p, q, r, s));
                    }
                }
            }
        }
        Self {
            n,
            convention,
            data,
        }
    }

    #[inline]
    pub fn idx(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        ((p * self.n + q) * self.n + r) * self.n + s
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> C64 {
        self.data[self.idx(p, q, r, s)]
    }

    #[inline]
    pub fn set(&mut self, p: usize, q: usize, r: usize, s: usize, v: C64) {
        let i = self.idx(p, q, r, s);
        self.data[i] = v;
    }

    #[inline]
    pub fn add_at(&mut self, p: usize, q: usize, r: usize, s: usize, v: C64) {
        let i = self.idx(p, q, r, s);
        self.data[i] += v;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    /// Reinterprets the same numbers under another convention tag.
    pub fn relabel(mut self, convention: Convention) -> Self {
        self.convention = convention;
        self
    }

    pub fn expect(&self, convention: Convention) -> Result<()> {
        if self.convention != convention {
            return Err(Error::Convention {
                expected: convention,
                found: self.convention,
            });
        }
        Ok(())
    }

    pub fn same_shape(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Shape(format!(
                "tensors over {} and {} modes",
                self.n, other.n
            )));
        }
        Ok(())
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| *z == C64::new(0.0, 0.0))
    }

    pub fn scale(&self, a: C64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|z| *z *= a);
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(out)
    }

    pub fn sub_assign(&mut self, other: &Self) -> Result<()> {
        self.same_shape(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        Ok(())
    }

    /// Tensor of the adjoint operator, in the same convention.
    pub fn adjoint(&self) -> Self {
        let n = self.n;
        match self.convention {
            // (a†_p a†_q a_s a_r)† = a†_r a†_s a_q a_p
            Convention::PqrsLadder => {
                Self::from_fn(n, self.convention, |p, q, r, s| self.get(r, s, p, q).conj())
            }
            // (a†_p a_q a†_r a_s)† = a†_s a_r a†_q a_p
            Convention::ChargeCharge | Convention::HermitianChemist => {
                Self::from_fn(n, self.convention, |p, q, r, s| self.get(s, r, q, p).conj())
            }
        }
    }

    /// Projection `(A − A_qprs − A_pqsr + A_qpsr)/4` onto antisymmetric tensors.
    pub fn antisymmetrize(&self) -> Self {
        let n = self.n;
        Self::from_fn(n, self.convention, |p, q, r, s| {
            (self.get(p, q, r, s) - self.get(q, p, r, s) - self.get(p, q, s, r)
                + self.get(q, p, s, r))
                * 0.25
        })
    }

    pub fn symmetry_report(&self) -> SymmetryReport {
        let n = self.n;
        let adj = self.adjoint();
        let mut antiherm: f64 = 0.0;
        let mut herm: f64 = 0.0;
        for (a, b) in self.data.iter().zip(adj.data()) {
            antiherm = antiherm.max((a + b).norm());
            herm = herm.max((a - b).norm());
        }
        let mut rep = SymmetryReport {
            antihermiticity: antiherm,
            hermiticity: herm,
            ..Default::default()
        };
        match self.convention {
            Convention::PqrsLadder => {
                let mut worst: f64 = 0.0;
                for p in 0..n {
                    for q in 0..n {
                        for r in 0..n {
                            for s in 0..n {
                                let a = self.get(p, q, r, s);
                                worst = worst
                                    .max((a + self.get(q, p, r, s)).norm())
                                    .max((a + self.get(p, q, s, r)).norm());
                            }
                        }
                    }
                }
                rep.antisymmetry = Some(worst);
            }
            _ => {
                let mut worst: f64 = 0.0;
                for p in 0..n {
                    for q in 0..n {
                        for r in 0..n {
                            for s in 0..n {
                                worst = worst.max((self.get(p, q, r, s) - self.get(r, s, p, q)).norm());
                            }
                        }
                    }
                }
                rep.pair_symmetry = Some(worst);
            }
        }
        rep
    }
}

/// Applies the single-particle basis change `u` to every index:
/// `t̃_{pqrs} = Σ u*_{ip} u_{jq} u*_{kr} u_{ls} t_{ijkl}`.
///
/// For a charge-charge tensor this is the coefficient tensor of `Û† T̂ Û`,
/// where `Û a†_i Û† = Σ_p u_{pi} a†_p`. Four single-index contractions,
/// `O(n^5)` in total.
pub fn transform4(t: &CoeffTensor4, u: &CMat) -> CoeffTensor4 {
    let n = t.n();
    assert_eq!(u.nrows(), n);
    let mut data = contract_mode(t.data(), n, 3, u, false);
    data = contract_mode(&data, n, 2, u, true);
    data = contract_mode(&data, n, 1, u, false);
    data = contract_mode(&data, n, 0, u, true);
    CoeffTensor4 {
        n,
        convention: t.convention(),
        data,
    }
}

/// `out[.., b, ..] = Σ_a m[a, b]^(*) data[.., a, ..]` along index `mode`.
pub(crate) fn contract_mode(data: &[C64], n: usize, mode: usize, m: &CMat, conj: bool) -> Vec<C64> {
    let inner = n.pow(3 - mode as u32);
    let mut out = vec![C64::new(0.0, 0.0); data.len()];
    par::for_each_chunk_mut(&mut out, inner, |chunk, dst| {
        let outer = chunk / n;
        let new = chunk % n;
        let base = outer * n * inner;
        for old in 0..n {
            let mut c = m[(old, new)];
            if conj {
                c = c.conj();
            }
            if c == C64::new(0.0, 0.0) {
                continue;
            }
            let src = &data[base + old * inner..base + (old + 1) * inner];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += c * s;
            }
        }
    });
    out
}

/// `n²×n²` supermatrix of a charge-charge tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperMatrix {
    n: usize,
    mat: CMat,
}

impl SuperMatrix {
    pub fn new(n: usize, mat: CMat) -> Result<Self> {
        if mat.nrows() != n * n || mat.ncols() != n * n {
            return Err(Error::Shape(format!(
                "supermatrix for n = {n} must be {0}x{0}",
                n * n
            )));
        }
        Ok(Self { n, mat })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn into_mat(self) -> CMat {
        self.mat
    }

    /// `‖M − Mᵀ‖_F`.
    pub fn symmetry_residual(&self) -> f64 {
        frob(&(&self.mat - self.mat.transpose()))
    }

    /// `‖M + adj(M)‖_F` where `adj` is the adjoint-operator map.
    pub fn adjoint_residual(&self) -> f64 {
        let n = self.n;
        let m = &self.mat;
        let mut acc = 0.0;
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let a = m[(p * n + q, r * n + s)];
                        let b = m[(s * n + r, q * n + p)].conj();
                        acc += (a + b).norm_sqr();
                    }
                }
            }
        }
        acc.sqrt()
    }

    pub fn to_tensor(&self) -> CoeffTensor4 {
        let n = self.n;
        let nn = n * n;
        let mut data = Vec::with_capacity(nn * nn);
        for row in 0..nn {
            for col in 0..nn {
                data.push(self.mat[(row, col)]);
            }
        }
        CoeffTensor4 {
            n,
            convention: Convention::ChargeCharge,
            data,
        }
    }
}

/// `mat[(p,q),(r,s)] = t[p,q,r,s]`; accepts charge-charge and chemist tensors.
pub fn reshape_to_supermatrix(t: &CoeffTensor4) -> Result<SuperMatrix> {
    if t.convention() == Convention::PqrsLadder {
        return Err(Error::Convention {
            expected: Convention::ChargeCharge,
            found: t.convention(),
        });
    }
    let n = t.n();
    let nn = n * n;
    let mat = DMatrix::from_row_slice(nn, nn, t.data());
    Ok(SuperMatrix { n, mat })
}

/// One-body coefficients `S_{pr}` of `a†_p a_r`, entering with a minus sign.
#[derive(Clone, Debug, PartialEq)]
pub struct OneBodyCorrection {
    pub s: CMat,
}

impl OneBodyCorrection {
    pub fn zeros(n: usize) -> Self {
        Self {
            s: CMat::zeros(n, n),
        }
    }

    pub fn n(&self) -> usize {
        self.s.nrows()
    }

    pub fn is_zero(&self) -> bool {
        self.s.iter().all(|z| *z == C64::new(0.0, 0.0))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            s: &self.s + &other.s,
        }
    }

    /// `‖S + S†‖_F`, zero when `−Ŝ` is antihermitian.
    pub fn antihermitian_residual(&self) -> f64 {
        frob(&(&self.s + self.s.adjoint()))
    }
}

/// Reorders `a†_p a†_q a_s a_r = a†_p a_r a†_q a_s − δ_{qr} a†_p a_s`.
///
/// Returns `(X, S)` with `X[p,r,q,s] = A[p,q,r,s]` and
/// `S[p,s] = Σ_q A[p,q,q,s]`, so that `Â = X̂ − Ŝ` for any input.
pub fn normal_order_to_charge_charge(
    a: &CoeffTensor4,
) -> Result<(CoeffTensor4, OneBodyCorrection)> {
    a.expect(Convention::PqrsLadder)?;
    let n = a.n();
    let x = CoeffTensor4::from_fn(n, Convention::ChargeCharge, |p, r, q, s| a.get(p, q, r, s));
    let mut s_mat = CMat::zeros(n, n);
    for p in 0..n {
        for s in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for q in 0..n {
                acc += a.get(p, q, q, s);
            }
            s_mat[(p, s)] = acc;
        }
    }
    Ok((x, OneBodyCorrection { s: s_mat }))
}

/// Splits a charge-charge tensor into its pair-symmetric part.
///
/// Returns `(X_sym, ΔS)` such that `X̂ = X̂_sym − ΔŜ` as operators; the
/// antisymmetric part of the supermatrix is a commutator and reduces to a
/// one-body term.
pub fn symmetrize_pairs(x: &CoeffTensor4) -> Result<(CoeffTensor4, OneBodyCorrection)> {
    x.expect(Convention::ChargeCharge)?;
    let n = x.n();
    let sym = CoeffTensor4::from_fn(n, Convention::ChargeCharge, |p, q, r, s| {
        (x.get(p, q, r, s) + x.get(r, s, p, q)) * 0.5
    });
    let anti = |p: usize, q: usize, r: usize, s: usize| (x.get(p, q, r, s) - x.get(r, s, p, q)) * 0.5;
    // Σ X_a[p,s,q,r] a†_p a_s a†_q a_r = ½ Σ X_a[p,s,q,r] (δ_sq a†_p a_r − δ_pr a†_q a_s)
    let mut k = CMat::zeros(n, n);
    for p in 0..n {
        for s in 0..n {
            for q in 0..n {
                for r in 0..n {
                    let c = anti(p, s, q, r) * 0.5;
                    if s == q {
                        k[(p, r)] += c;
                    }
                    if p == r {
                        k[(q, s)] -= c;
                    }
                }
            }
        }
    }
    Ok((sym, OneBodyCorrection { s: -k }))
}

/// `(X − adj X)/2`; leaves the operator unchanged when it is antihermitian.
pub fn project_antihermitian(x: &CoeffTensor4) -> CoeffTensor4 {
    let adj = x.adjoint();
    let mut out = x.clone();
    for (a, b) in out.data.iter_mut().zip(adj.data()) {
        *a = (*a - b) * 0.5;
    }
    out
}

/// Where a factor came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorOrigin {
    Svd,
    Takagi,
    Uc,
    Cholesky,
}

impl FactorOrigin {
    pub fn as_str(self) -> &'static str {
        match self {
            FactorOrigin::Svd => "svd",
            FactorOrigin::Takagi => "takagi",
            FactorOrigin::Uc => "uc",
            FactorOrigin::Cholesky => "cholesky",
        }
    }

    /// Analytical origins produce rank-one coupling matrices.
    pub fn is_rank_one(self) -> bool {
        !matches!(self, FactorOrigin::Uc)
    }
}

/// One charge-charge factor `F = Σ_{xy} J_{xy} ñ_x ñ_y`, `ñ_x = Û(μ) n_x Û(μ)†`.
///
/// Its charge-charge tensor is `F[p,q,r,s] = Σ_{xy} μ_{px} μ*_{qx} J_{xy} μ_{ry} μ*_{sy}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SOSFactor {
    pub mu: CMat,
    pub j: CMat,
    pub origin: FactorOrigin,
}

impl SOSFactor {
    pub fn new(mu: CMat, j: CMat, origin: FactorOrigin) -> Result<Self> {
        let n = mu.nrows();
        if !mu.is_square() || j.nrows() != n || j.ncols() != n {
            return Err(Error::Shape(format!(
                "factor with mu {}x{} and J {}x{}",
                mu.nrows(),
                mu.ncols(),
                j.nrows(),
                j.ncols()
            )));
        }
        Ok(Self { mu, j, origin })
    }

    pub fn n(&self) -> usize {
        self.mu.nrows()
    }

    pub fn unitarity_defect(&self) -> f64 {
        crate::linalg::unitary_defect(&self.mu)
    }

    /// Second singular value of `J` relative to `‖J‖_F`.
    pub fn rank_one_defect(&self) -> f64 {
        let norm = frob(&self.j);
        if norm == 0.0 {
            return 0.0;
        }
        singular_values(&self.j)
            .get(1).copied().unwrap_or(0.0) / norm
    }

    pub fn symmetry_defect(&self) -> f64 {
        frob(&(&self.j - self.j.transpose()))
    }

    /// Charge-charge coefficient tensor of the factor.
    pub fn tensor(&self) -> CoeffTensor4 {
        let n = self.n();
        let mut diag = CoeffTensor4::zeros(n, Convention::ChargeCharge);
        for x in 0..n {
            for y in 0..n {
                diag.set(x, x, y, y, self.j[(x, y)]);
            }
        }
        transform4(&diag, &self.mu.adjoint())
    }
}

/// Sum of factor tensors over `n` modes.
pub fn reconstruct(n: usize, factors: &[SOSFactor]) -> Result<CoeffTensor4> {
    let parts = par::map_slice(factors, |f| f.tensor());
    let mut acc = CoeffTensor4::zeros(n, Convention::ChargeCharge);
    for (k, part) in parts.iter().enumerate() {
        if part.n() != n {
            return Err(Error::Factor {
                index: k,
                reason: format!("acts on {} modes, expected {n}", part.n()),
            });
        }
        for (a, b) in acc.data.iter_mut().zip(part.data()) {
            *a += b;
        }
    }
    Ok(acc)
}

/// Coefficients `z_{pq}` of a one-body operator `Z = Σ z_{pq} a†_p a_q`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalOperatorCoeffs {
    pub z: CMat,
}

impl NormalOperatorCoeffs {
    /// `‖[z, z†]‖_F`.
    pub fn normality_residual(&self) -> f64 {
        let zd = self.z.adjoint();
        frob(&(&self.z * &zd - &zd * &self.z))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResidualMetrics {
    pub l2: f64,
    pub mad: f64,
    pub takagi_rank: usize,
}

/// Frobenius norm, maximum absolute deviation and rank of `t − approx`.
///
/// The rank counts singular values of the residual supermatrix above
/// `RANK_TOL · σ_max(t)`; for complex symmetric residuals these are the
/// Takagi values. Measuring against `t` keeps round-off in an exact
/// reconstruction from registering as full rank.
pub fn residual_metrics(t: &CoeffTensor4, approx: &CoeffTensor4) -> Result<ResidualMetrics> {
    t.same_shape(approx)?;
    let mut l2 = 0.0;
    let mut mad: f64 = 0.0;
    let mut diff = Vec::with_capacity(t.data.len());
    for (a, b) in t.data.iter().zip(&approx.data) {
        let d = a - b;
        l2 += d.norm_sqr();
        mad = mad.max(d.norm());
        diff.push(d);
    }
    let n = t.n();
    let residual = CoeffTensor4 {
        n,
        convention: Convention::ChargeCharge,
        data: diff,
    };
    let scale = singular_values(&reshape_any(t)).first().copied().unwrap_or(0.0);
    let takagi_rank = rank_above(&reshape_any(&residual), RANK_TOL * scale);
    Ok(ResidualMetrics {
        l2: l2.sqrt(),
        mad,
        takagi_rank,
    })
}

fn reshape_any(t: &CoeffTensor4) -> CMat {
    let nn = t.n() * t.n();
    DMatrix::from_row_slice(nn, nn, t.data())
}

pub use crate::linalg::singular_values;

fn rank_above(m: &CMat, floor: f64) -> usize {
    if floor <= 0.0 {
        return 0;
    }
    singular_values(m).into_iter().filter(|s| *s > floor).count()
}

/// Largest singular value of the plain reshape of `t`.
pub fn sigma_max(t: &CoeffTensor4) -> f64 {
    singular_values(&reshape_any(t)).first().copied().unwrap_or(0.0)
}

/// Rank of the reshaped `residual` counting singular values above
/// `RANK_TOL · scale`.
pub fn residual_rank(residual: &CoeffTensor4, scale: f64) -> usize {
    rank_above(&reshape_any(residual), RANK_TOL * scale)
}

/// Rank of a supermatrix relative to its own largest singular value.
pub fn takagi_rank(m: &SuperMatrix) -> usize {
    let sv = singular_values(m.mat());
    let top = sv.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    sv.into_iter().filter(|s| *s > RANK_TOL * top).count()
}

/// Doubles correlation energy `(1/4) Σ_{ijab} v_{ijab} t_{ijab}`.
///
/// Both tensors are indexed `(i, j, a, b)` over spin-orbitals; `v` holds
/// antisymmetrized integrals `⟨ij||ab⟩`.
pub fn cc_doubles_energy(t2: &CoeffTensor4, v: &CoeffTensor4) -> Result<f64> {
    t2.same_shape(v)?;
    let e: C64 = t2.data.iter().zip(&v.data).map(|(t, v)| t * v).sum();
    Ok(0.25 * e.re)
}

/// Doubles amplitudes `t_{ijab}` carried by the excitation part of a
/// charge-charge generator.
///
/// `T₂ = ¼ Σ t_{ijab} a†_a a_i a†_b a_j`; because the pairing of a charge-charge
/// tensor is not unique, both the direct and the exchanged pairings are read:
/// `t_{ijab} = X[a,i,b,j] + X[b,j,a,i] − X[b,i,a,j] − X[a,j,b,i]`.
pub fn amplitudes_from_generator(x: &CoeffTensor4) -> Result<CoeffTensor4> {
    x.expect(Convention::ChargeCharge)?;
    let n = x.n();
    Ok(CoeffTensor4::from_fn(n, Convention::PqrsLadder, |i, j, a, b| {
        x.get(a, i, b, j) + x.get(b, j, a, i) - x.get(b, i, a, j) - x.get(a, j, b, i)
    }))
}
