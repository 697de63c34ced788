//! Sz-adapted decomposition.
//!
//! Spin-orbital `2p + σ` holds spatial orbital `p` with spin `σ` (α = 0,
//! β = 1). An Sz-conserving charge-charge tensor is first re-paired so every
//! `a†_i a_j` pair has equal spins, then split into the blocks
//! `A = (αα|αα)`, `C = (ββ|ββ)` and `B = (αα|ββ)`. Factors from `A` and `C`
//! rotate a single sector; the cross block is decomposed through
//! `[[0, B], [Bᵀ, 0]]` with each one-body operator diagonalized per sector.

use serde::{Deserialize, Serialize};

use crate::compression::{greedy_compress, CompressionConfig, CompressionReport, ParamSpace};
use crate::decompositions::{svd_factors_from, takagi_factors_from};
use crate::linalg::{diagonalize_normal, CMat};
use crate::tensor::{CoeffTensor4, Convention, FactorOrigin, OneBodyCorrection, SOSFactor};
use crate::{Error, Result, C64};

/// Entries breaking Sz conservation above this are rejected.
pub const SZ_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sector {
    Alpha,
    Beta,
    Cross,
}

impl Sector {
    pub fn as_str(self) -> &'static str {
        match self {
            Sector::Alpha => "alpha",
            Sector::Beta => "beta",
            Sector::Cross => "cross",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnnotatedFactor {
    pub factor: SOSFactor,
    pub sector: Sector,
    /// Alpha and beta factors sharing a group can run in the same layer.
    pub simultaneous_group: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockMethod {
    Takagi,
    Svd,
    Uc,
}

/// Same-spin blocks of an Sz-conserving supermatrix over `m` spatial orbitals.
///
/// Pair index `(p, q)` maps to `p·m + q` within each block.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinBlockedSuperMatrix {
    pub m: usize,
    pub a: CMat,
    pub c: CMat,
    pub b: CMat,
    /// The `(ββ|αα)` block; equals `Bᵀ` for a symmetric supermatrix.
    pub b_t: CMat,
}

#[inline]
fn spin(i: usize) -> usize {
    i % 2
}

impl SpinBlockedSuperMatrix {
    /// `[[A, B], [Bᵀ, C]]` over the `2m²` same-spin pairs, α pairs first.
    pub fn reduced(&self) -> CMat {
        let mm = self.m * self.m;
        let mut out = CMat::zeros(2 * mm, 2 * mm);
        out.view_mut((0, 0), (mm, mm)).copy_from(&self.a);
        out.view_mut((0, mm), (mm, mm)).copy_from(&self.b);
        out.view_mut((mm, 0), (mm, mm)).copy_from(&self.b_t);
        out.view_mut((mm, mm), (mm, mm)).copy_from(&self.c);
        out
    }

    /// `‖M − Mᵀ‖_F` of the reduced supermatrix.
    pub fn symmetry_residual(&self) -> f64 {
        let r = self.reduced();
        crate::linalg::frob(&(&r - r.transpose()))
    }

    /// Charge-charge tensor over `2m` spin-orbitals.
    pub fn to_tensor(&self) -> CoeffTensor4 {
        let m = self.m;
        let mut t = CoeffTensor4::zeros(2 * m, Convention::ChargeCharge);
        for (blk, s1, s2) in [(&self.a, 0, 0), (&self.b, 0, 1), (&self.b_t, 1, 0), (&self.c, 1, 1)] {
            for pq in 0..m * m {
                for rs in 0..m * m {
                    let v = blk[(pq, rs)];
                    if v != C64::new(0.0, 0.0) {
                        let (p, q, r, s) = (pq / m, pq % m, rs / m, rs % m);
                        t.set(2 * p + s1, 2 * q + s1, 2 * r + s2, 2 * s + s2, v);
                    }
                }
            }
        }
        t
    }
}

/// Splits an Sz-conserving charge-charge tensor into same-spin blocks.
///
/// Spin-flip pairings are rewritten with
/// `a†_i a_j a†_k a_l = −a†_i a_l a†_k a_j + δ_jk a†_i a_l` (the `δ_kl` term
/// vanishes for flips), so `X̂ = X̂_blocked − ΔŜ` with the returned `ΔS`.
pub fn partition_by_sz(t: &CoeffTensor4) -> Result<(SpinBlockedSuperMatrix, OneBodyCorrection)> {
    t.expect(Convention::ChargeCharge)?;
    let n = t.n();
    if n % 2 != 0 {
        return Err(Error::Shape(format!("{n} spin-orbitals is not an even count")));
    }
    let m = n / 2;
    let mm = m * m;
    let mut blocks = [CMat::zeros(mm, mm), CMat::zeros(mm, mm), CMat::zeros(mm, mm), CMat::zeros(mm, mm)];
    let mut ds = CMat::zeros(n, n);
    let mut violations: Vec<([usize; 4], f64)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = t.get(i, j, k, l);
                    if v == C64::new(0.0, 0.0) {
                        continue;
                    }
                    if spin(i) + spin(k) != spin(j) + spin(l) {
                        if v.norm() > SZ_TOL {
                            violations.push(([i, j, k, l], v.norm()));
                        }
                        continue;
                    }
                    let (p, q, r, s, coeff) = if spin(i) == spin(j) {
                        (i, j, k, l, v)
                    } else {
                        if j == k {
                            // +δ_jk a†_i a_l enters −ΔS
                            ds[(i, l)] -= v;
                        }
                        (i, l, k, j, -v)
                    };
                    let blk = 2 * spin(p) + spin(r);
                    blocks[blk][((p / 2) * m + q / 2, (r / 2) * m + s / 2)] += coeff;
                }
            }
        }
    }
    if !violations.is_empty() {
        violations.sort_by(|a, b| b.1.total_cmp(&a.1));
        let count = violations.len();
        violations.truncate(5);
        return Err(Error::SzViolation {
            count,
            worst: violations,
        });
    }
    let [a, b, b_t, c] = blocks;
    Ok((SpinBlockedSuperMatrix { m, a, c, b, b_t }, OneBodyCorrection { s: ds }))
}

/// Expands a spatial matrix onto one spin sector of `2m` spin-orbitals.
fn embed(mat: &CMat, sector: usize, fill_identity: bool) -> CMat {
    let m = mat.nrows();
    let mut out = CMat::zeros(2 * m, 2 * m);
    for p in 0..m {
        for q in 0..m {
            out[(2 * p + sector, 2 * q + sector)] = mat[(p, q)];
        }
        if fill_identity {
            out[(2 * p + 1 - sector, 2 * p + 1 - sector)] = C64::new(1.0, 0.0);
        }
    }
    out
}

/// Diagonalizes a sector-block-diagonal normal matrix one sector at a time,
/// so the eigenvectors never mix spins.
fn diagonalize_by_sector(z: &CMat) -> Result<(CMat, Vec<C64>)> {
    let n = z.nrows();
    let m = n / 2;
    let mut mu = CMat::zeros(n, n);
    let mut lambda = vec![C64::new(0.0, 0.0); n];
    for s in 0..2 {
        let sub = CMat::from_fn(m, m, |p, q| z[(2 * p + s, 2 * q + s)]);
        let (v, l) = diagonalize_normal(&sub)?;
        for p in 0..m {
            for x in 0..m {
                mu[(2 * p + s, 2 * x + s)] = v[(p, x)];
            }
            lambda[2 * p + s] = l[p];
        }
    }
    Ok((mu, lambda))
}

/// Maps a reduced `2m²` vector to a `2m × 2m` one-body matrix.
fn reduced_unflat(m: usize) -> impl Fn(&[C64]) -> CMat + Sync {
    move |v: &[C64]| {
        let mm = m * m;
        let mut y = CMat::zeros(2 * m, 2 * m);
        for s in 0..2 {
            for p in 0..m {
                for q in 0..m {
                    y[(2 * p + s, 2 * q + s)] = v[s * mm + p * m + q];
                }
            }
        }
        y
    }
}

fn block_only(s: &SpinBlockedSuperMatrix, which: Sector) -> CMat {
    let mm = s.m * s.m;
    let z = CMat::zeros(mm, mm);
    let part = match which {
        Sector::Alpha => SpinBlockedSuperMatrix { a: s.a.clone(), b: z.clone(), b_t: z.clone(), c: z, m: s.m },
        Sector::Beta => SpinBlockedSuperMatrix { c: s.c.clone(), b: z.clone(), b_t: z.clone(), a: z, m: s.m },
        Sector::Cross => SpinBlockedSuperMatrix { b: s.b.clone(), b_t: s.b_t.clone(), a: z.clone(), c: z, m: s.m },
    };
    part.reduced()
}

/// Output of [`decompose_blocked`].
#[derive(Clone, Debug)]
pub struct BlockedDecomposition {
    pub factors: Vec<AnnotatedFactor>,
    /// One report per greedy run (alpha, beta, cross) for the uc method.
    pub reports: Vec<(Sector, CompressionReport)>,
}

/// Decomposes each spin block; every rotation stays inside one sector.
pub fn decompose_blocked(
    s: &SpinBlockedSuperMatrix,
    method: BlockMethod,
    cfg: &CompressionConfig,
) -> Result<BlockedDecomposition> {
    let m = s.m;
    let mut per_sector: Vec<(Sector, Vec<SOSFactor>)> = Vec::new();
    let mut reports = Vec::new();
    for sector in [Sector::Alpha, Sector::Beta, Sector::Cross] {
        let reduced = block_only(s, sector);
        if reduced.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            per_sector.push((sector, Vec::new()));
            continue;
        }
        let fs = match method {
            BlockMethod::Takagi => {
                takagi_factors_from(&reduced, &reduced_unflat(m), &diagonalize_by_sector, None)?
            }
            BlockMethod::Svd => svd_factors_from(&reduced, &reduced_unflat(m), &diagonalize_by_sector)?,
            BlockMethod::Uc => {
                let (fs, report) = match sector {
                    Sector::Alpha | Sector::Beta => {
                        let blk = if sector == Sector::Alpha { &s.a } else { &s.c };
                        let t = CoeffTensor4::from_vec(m, Convention::ChargeCharge, row_major_data(blk))?;
                        let sub = CompressionConfig {
                            space: ParamSpace::Full,
                            ..cfg.clone()
                        };
                        let c = greedy_compress(&t, &sub)?;
                        let idx = usize::from(sector == Sector::Beta);
                        let fs = c
                            .factors
                            .into_iter()
                            .map(|f| SOSFactor::new(embed(&f.mu, idx, true), embed(&f.j, idx, false), FactorOrigin::Uc))
                            .collect::<Result<Vec<_>>>()?;
                        (fs, c.report)
                    }
                    Sector::Cross => {
                        let part = SpinBlockedSuperMatrix {
                            m,
                            a: CMat::zeros(m * m, m * m),
                            c: CMat::zeros(m * m, m * m),
                            b: s.b.clone(),
                            b_t: s.b_t.clone(),
                        };
                        let sub = CompressionConfig {
                            space: ParamSpace::SpinBlocked,
                            ..cfg.clone()
                        };
                        let c = greedy_compress(&part.to_tensor(), &sub)?;
                        (c.factors, c.report)
                    }
                };
                reports.push((sector, report));
                fs
            }
        };
        per_sector.push((sector, fs));
    }

    let mut it = per_sector.into_iter();
    let (_, alpha) = it.next().expect("alpha");
    let (_, beta) = it.next().expect("beta");
    let (_, cross) = it.next().expect("cross");
    let mut factors = Vec::new();
    let pairs = alpha.len().max(beta.len());
    let mut alpha = alpha.into_iter();
    let mut beta = beta.into_iter();
    for g in 0..pairs {
        let a = alpha.next();
        let b = beta.next();
        let group = (a.is_some() && b.is_some()).then_some(g);
        if let Some(f) = a {
            factors.push(AnnotatedFactor { factor: f, sector: Sector::Alpha, simultaneous_group: group });
        }
        if let Some(f) = b {
            factors.push(AnnotatedFactor { factor: f, sector: Sector::Beta, simultaneous_group: group });
        }
    }
    factors.extend(cross.into_iter().map(|f| AnnotatedFactor {
        factor: f,
        sector: Sector::Cross,
        simultaneous_group: None,
    }));
    Ok(BlockedDecomposition { factors, reports })
}

fn row_major_data(m: &CMat) -> Vec<C64> {
    let mut v = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            v.push(m[(r, c)]);
        }
    }
    v
}

/// Largest coupling between unlike spins in a rotation.
pub fn sector_leakage(mu: &CMat) -> f64 {
    let n = mu.nrows();
    let mut worst: f64 = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p % 2 != q % 2 {
                worst = worst.max(mu[(p, q)].norm());
            }
        }
    }
    worst
}
