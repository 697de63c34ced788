//! Dense Jordan–Wigner realization of fermion operators.
//!
//! Basis states are occupation bit strings with mode 0 in the least
//! significant bit; `a_p` picks up the sign `(−1)^{#occupied modes below p}`.
//! Matrices are dense `2^n × 2^n`, so `n = 10` costs 16 MiB per operator.

use std::collections::HashSet;
use std::sync::{Mutex, OnceLock};

use serde::Serialize;

use crate::linalg::{frob, log_unitary, spectral_norm, AntihermitianEigen, CMat};
use crate::tensor::{CoeffTensor4, Convention, OneBodyCorrection, SOSFactor};
use crate::{par, Error, Result, C64};

pub const DEFAULT_ORACLE_CAP: usize = 10;
pub const CAP_ENV: &str = "SOS_COMPRESS_ORACLE_CAP";

/// Mode cap, overridable through `SOS_COMPRESS_ORACLE_CAP`.
pub fn oracle_cap() -> usize {
    std::env::var(CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_ORACLE_CAP)
}

fn check_cap(n: usize) -> Result<()> {
    let cap = oracle_cap();
    if n > cap {
        return Err(Error::OracleCap { modes: n, cap });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    pub n: usize,
    pub mat: CMat,
}

impl DenseOperator {
    pub fn zeros(n: usize) -> Self {
        let d = 1 << n;
        Self {
            n,
            mat: CMat::zeros(d, d),
        }
    }

    pub fn identity(n: usize) -> Self {
        let d = 1 << n;
        Self {
            n,
            mat: CMat::identity(d, d),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            n: self.n,
            mat: self.mat.adjoint(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            n: self.n,
            mat: &self.mat + &other.mat,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            n: self.n,
            mat: &self.mat - &other.mat,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            n: self.n,
            mat: &self.mat * &other.mat,
        }
    }

    pub fn scale(&self, a: C64) -> Self {
        Self {
            n: self.n,
            mat: self.mat.map(|z| z * a),
        }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn frobenius(&self) -> f64 {
        frob(&self.mat)
    }

    /// Operator 2-norm (largest singular value).
    pub fn norm2(&self) -> f64 {
        spectral_norm(&self.mat)
    }

    pub fn is_antihermitian(&self, tol: f64) -> bool {
        frob(&(&self.mat + self.mat.adjoint())) <= tol * self.frobenius().max(1.0)
    }
}

#[inline]
fn annihilate(p: usize, x: usize) -> Option<(f64, usize)> {
    if x >> p & 1 == 0 {
        return None;
    }
    let sign = if (x & ((1 << p) - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    Some((sign, x ^ (1 << p)))
}

#[inline]
fn create(p: usize, x: usize) -> Option<(f64, usize)> {
    if x >> p & 1 == 1 {
        return None;
    }
    let sign = if (x & ((1 << p) - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    Some((sign, x | (1 << p)))
}

/// `a†_p a_q |x⟩`.
#[inline]
fn hop(p: usize, q: usize, x: usize) -> Option<(f64, usize)> {
    let (s1, y) = annihilate(q, x)?;
    let (s2, z) = create(p, y)?;
    Some((s1 * s2, z))
}

/// Dense matrix of `a_p` (or `a†_p`).
pub fn ladder(n: usize, p: usize, dagger: bool) -> DenseOperator {
    let mut op = DenseOperator::zeros(n);
    for x in 0..1usize << n {
        let hit = if dagger { create(p, x) } else { annihilate(p, x) };
        if let Some((s, y)) = hit {
            op.mat[(y, x)] = C64::new(s, 0.0);
        }
    }
    op
}

fn verified() -> &'static Mutex<HashSet<usize>> {
    static SEEN: OnceLock<Mutex<HashSet<usize>>> = OnceLock::new();
    SEEN.get_or_init(|| Mutex::new(HashSet::new()))
}

/// Checks `{a_p, a†_q} = δ_pq` and `{a_p, a_q} = 0` on every basis state.
pub fn check_anticommutation(n: usize) -> Result<()> {
    for x in 0..1usize << n {
        for p in 0..n {
            for q in 0..n {
                // {a_p, a†_q}|x⟩
                let mut acc = std::collections::BTreeMap::<usize, f64>::new();
                if let Some((s1, y)) = create(q, x) {
                    if let Some((s2, z)) = annihilate(p, y) {
                        *acc.entry(z).or_default() += s1 * s2;
                    }
                }
                if let Some((s1, y)) = annihilate(p, x) {
                    if let Some((s2, z)) = create(q, y) {
                        *acc.entry(z).or_default() += s1 * s2;
                    }
                }
                let expect = if p == q { 1.0 } else { 0.0 };
                for (z, v) in &acc {
                    let want = if *z == x { expect } else { 0.0 };
                    if v - want != 0.0 {
                        return Err(Error::Invalid(format!(
                            "{{a_{p}, a†_{q}}} fails on state {x:#b}"
                        )));
                    }
                }
                if p == q && acc.get(&x).copied().unwrap_or(0.0) != 1.0 {
                    return Err(Error::Invalid(format!("{{a_{p}, a†_{p}}} ≠ 1 on {x:#b}")));
                }
                // {a_p, a_q}|x⟩
                let mut acc = std::collections::BTreeMap::<usize, f64>::new();
                for (a, b) in [(p, q), (q, p)] {
                    if let Some((s1, y)) = annihilate(b, x) {
                        if let Some((s2, z)) = annihilate(a, y) {
                            *acc.entry(z).or_default() += s1 * s2;
                        }
                    }
                }
                if acc.values().any(|v| *v != 0.0) {
                    return Err(Error::Invalid(format!("{{a_{p}, a_{q}}} ≠ 0 on {x:#b}")));
                }
            }
        }
    }
    Ok(())
}

fn ensure_verified(n: usize) -> Result<()> {
    {
        let seen = verified().lock().expect("oracle registry poisoned");
        if seen.contains(&n) {
            return Ok(());
        }
    }
    check_anticommutation(n)?;
    verified().lock().expect("oracle registry poisoned").insert(n);
    Ok(())
}

/// `Σ s_{pq} a†_p a_q`.
pub fn one_body(s: &CMat) -> Result<DenseOperator> {
    let n = s.nrows();
    check_cap(n)?;
    ensure_verified(n)?;
    let mut op = DenseOperator::zeros(n);
    for x in 0..1usize << n {
        for p in 0..n {
            for q in 0..n {
                let c = s[(p, q)];
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                if let Some((sg, y)) = hop(p, q, x) {
                    op.mat[(y, x)] += c * sg;
                }
            }
        }
    }
    Ok(op)
}

/// Dense matrix of a two-body tensor, minus the optional one-body correction.
pub fn build_two_body(
    t: &CoeffTensor4,
    s: Option<&OneBodyCorrection>,
) -> Result<DenseOperator> {
    let n = t.n();
    check_cap(n)?;
    ensure_verified(n)?;
    let dim = 1usize << n;
    // hops[pq][x] = a†_p a_q |x⟩
    let hops: Vec<Vec<Option<(f64, usize)>>> = (0..n * n)
        .map(|pq| (0..dim).map(|x| hop(pq / n, pq % n, x)).collect())
        .collect();

    let terms: Vec<(usize, usize, C64)> = match t.convention() {
        Convention::ChargeCharge => {
            let mut v = Vec::new();
            for p in 0..n {
                for q in 0..n {
                    for r in 0..n {
                        for s in 0..n {
                            let c = t.get(p, q, r, s);
                            if c != C64::new(0.0, 0.0) {
                                v.push((p * n + q, r * n + s, c));
                            }
                        }
                    }
                }
            }
            v
        }
        Convention::PqrsLadder => Vec::new(),
        Convention::HermitianChemist => {
            return Err(Error::Convention {
                expected: Convention::ChargeCharge,
                found: Convention::HermitianChemist,
            })
        }
    };

    // Columns are independent; each worker owns one column block.
    let columns: Vec<Vec<(usize, C64)>> = par::map_range(dim, |x| {
        let mut col: Vec<(usize, C64)> = Vec::new();
        match t.convention() {
            Convention::ChargeCharge => {
                for &(left, right, c) in &terms {
                    if let Some((s1, y)) = hops[right][x] {
                        if let Some((s2, z)) = hops[left][y] {
                            col.push((z, c * (s1 * s2)));
                        }
                    }
                }
            }
            _ => {
                // a†_p a†_q a_s a_r, rightmost first
                for p in 0..n {
                    for q in 0..n {
                        for r in 0..n {
                            for s in 0..n {
                                let c = t.get(p, q, r, s);
                                if c == C64::new(0.0, 0.0) {
                                    continue;
                                }
                                let hit = annihilate(r, x)
                                    .and_then(|(s1, y)| annihilate(s, y).map(|(s2, y)| (s1 * s2, y)))
                                    .and_then(|(s1, y)| create(q, y).map(|(s2, y)| (s1 * s2, y)))
                                    .and_then(|(s1, y)| create(p, y).map(|(s2, y)| (s1 * s2, y)));
                                if let Some((sg, z)) = hit {
                                    col.push((z, c * sg));
                                }
                            }
                        }
                    }
                }
            }
        }
        col
    });
    let mut op = DenseOperator::zeros(n);
    for (x, col) in columns.into_iter().enumerate() {
        for (z, v) in col {
            op.mat[(z, x)] += v;
        }
    }
    if let Some(s) = s {
        if s.n() != n {
            return Err(Error::Shape(format!(
                "one-body correction over {} modes, tensor over {n}",
                s.n()
            )));
        }
        op = op.sub(&one_body(&s.s)?);
    }
    Ok(op)
}

/// Matrix exponential. Antihermitian input goes through the hermitian
/// eigendecomposition of `iG`; anything else through scaling and squaring.
pub fn exp_operator(g: &DenseOperator) -> DenseOperator {
    if g.is_antihermitian(1e-12) {
        exp_antihermitian(g)
    } else {
        exp_scaling_squaring(g)
    }
}

pub fn exp_antihermitian(g: &DenseOperator) -> DenseOperator {
    DenseOperator {
        n: g.n,
        mat: AntihermitianEigen::new(&g.mat).exp(),
    }
}

pub fn exp_scaling_squaring(g: &DenseOperator) -> DenseOperator {
    DenseOperator {
        n: g.n,
        mat: g.mat.clone().exp(),
    }
}

/// Fock-space representation of a single-particle unitary `u`,
/// `Û a†_x Û† = Σ_p u_{px} a†_p`, fixing the vacuum.
pub fn fock_rotation(u: &CMat) -> Result<DenseOperator> {
    let k = log_unitary(u)?;
    Ok(exp_antihermitian(&one_body(&k)?))
}

/// `Σ J_{pq} n_p n_q` as a diagonal operator.
pub fn charge_charge(j: &CMat) -> Result<DenseOperator> {
    let n = j.nrows();
    check_cap(n)?;
    let mut op = DenseOperator::zeros(n);
    for x in 0..1usize << n {
        let mut acc = C64::new(0.0, 0.0);
        for p in 0..n {
            if x >> p & 1 == 0 {
                continue;
            }
            for q in 0..n {
                if x >> q & 1 == 1 {
                    acc += j[(p, q)];
                }
            }
        }
        op.mat[(x, x)] = acc;
    }
    Ok(op)
}

/// `S_z = ½ Σ_p (n_{pα} − n_{pβ})` with spin-orbital `2p + σ`, `α = 0`.
pub fn sz_operator(n: usize) -> DenseOperator {
    let mut op = DenseOperator::zeros(n);
    for x in 0..1usize << n {
        let mut v = 0.0;
        for p in 0..n {
            if x >> p & 1 == 1 {
                v += if p % 2 == 0 { 0.5 } else { -0.5 };
            }
        }
        op.mat[(x, x)] = C64::new(v, 0.0);
    }
    op
}

pub fn number_operator(n: usize) -> DenseOperator {
    let mut op = DenseOperator::zeros(n);
    for x in 0..1usize << n {
        op.mat[(x, x)] = C64::new(x.count_ones() as f64, 0.0);
    }
    op
}

/// Dense matrix of a single factor `F = Σ J ñ ñ`.
pub fn factor_operator(f: &SOSFactor) -> Result<DenseOperator> {
    build_two_body(&f.tensor(), None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyMode {
    ExactSum,
    Trotter,
}

impl std::str::FromStr for VerifyMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact-sum" => Ok(VerifyMode::ExactSum),
            "trotter" => Ok(VerifyMode::Trotter),
            other => Err(Error::Invalid(format!("unknown verify mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Verification {
    /// `‖G − (Σ F_l − S)‖₂`.
    pub op_error: f64,
    /// `‖e^G − e^{−S} e^{F_L} ⋯ e^{F_1}‖₂`, trotter mode only.
    pub trotter_error: Option<f64>,
}

/// `e^{−S} e^{F_L} ⋯ e^{F_1}`; factor 1 acts first.
pub fn trotter_product(
    n: usize,
    s: Option<&OneBodyCorrection>,
    factors: &[SOSFactor],
) -> Result<DenseOperator> {
    let mut prod = DenseOperator::identity(n);
    // batches bound the number of dense 2^n x 2^n operators held at once
    for batch in factors.chunks(par::threads()) {
        for e in par::map_slice(batch, |f| factor_operator(f).map(|op| exp_operator(&op))) {
            prod = e?.mul(&prod);
        }
    }
    if let Some(s) = s {
        let minus_s = one_body(&s.s.map(|z| -z))?;
        prod = exp_operator(&minus_s).mul(&prod);
    }
    Ok(prod)
}

/// Compares the operator of `t` (ladder or charge-charge) with `Σ F_l − S`.
pub fn verify_factorization(
    t: &CoeffTensor4,
    s: Option<&OneBodyCorrection>,
    factors: &[SOSFactor],
    mode: VerifyMode,
) -> Result<Verification> {
    let n = t.n();
    for (k, f) in factors.iter().enumerate() {
        if f.n() != n {
            return Err(Error::Factor {
                index: k,
                reason: format!("acts on {} modes, tensor has {n}", f.n()),
            });
        }
    }
    let target = build_two_body(t, None)?;
    let mut approx = DenseOperator::zeros(n);
    for batch in factors.chunks(par::threads()) {
        for p in par::map_slice(batch, factor_operator) {
            approx = approx.add(&p?);
        }
    }
    if let Some(s) = s {
        approx = approx.sub(&one_body(&s.s)?);
    }
    let op_error = target.sub(&approx).norm2();
    let trotter_error = match mode {
        VerifyMode::ExactSum => None,
        VerifyMode::Trotter => {
            let exact = exp_operator(&target);
            let prod = trotter_product(n, s, factors)?;
            Some(exact.sub(&prod).norm2())
        }
    };
    Ok(Verification {
        op_error,
        trotter_error,
    })
}
