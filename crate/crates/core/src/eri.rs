//! Real two-electron integrals: Cholesky baseline and orbital-rotation
//! compression restricted to real orthogonal rotations.

use crate::compression::{greedy_compress, Compression, CompressionConfig, ParamSpace};
use crate::linalg::{eigh_real_desc, to_complex, RMat};
use crate::tensor::{Convention, CoeffTensor4, FactorOrigin, SOSFactor};
use crate::{Error, Result, C64};

pub const ERI_SYMMETRY_TOL: f64 = 1e-12;
pub const INDEFINITE_TOL: f64 = 1e-10;

/// `(ij|kl)` over `m` spatial orbitals with all eight index symmetries.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianERITensor {
    v: CoeffTensor4,
}

impl HermitianERITensor {
    pub fn new(v: CoeffTensor4) -> Result<Self> {
        v.expect(Convention::HermitianChemist)?;
        let m = v.n();
        let scale = v.max_abs().max(1.0);
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let x = v.get(i, j, k, l);
                        worst = worst.max(x.im.abs());
                        for y in [
                            v.get(j, i, k, l),
                            v.get(i, j, l, k),
                            v.get(k, l, i, j),
                        ] {
                            worst = worst.max((x - y).norm());
                        }
                    }
                }
            }
        }
        if worst > ERI_SYMMETRY_TOL * scale {
            return Err(Error::Symmetry {
                what: "eight-fold integral symmetry".into(),
                residual: worst,
                tol: ERI_SYMMETRY_TOL * scale,
            });
        }
        Ok(Self { v })
    }

    pub fn from_real_fn<F: FnMut(usize, usize, usize, usize) -> f64>(m: usize, mut f: F) -> Result<Self> {
        Self::new(CoeffTensor4::from_fn(m, Convention::HermitianChemist, |i, j, k, l| {
            C64::new(f(i, j, k, l), 0.0)
        }))
    }

    pub fn m(&self) -> usize {
        self.v.n()
    }

    pub fn tensor(&self) -> &CoeffTensor4 {
        &self.v
    }

    /// Real `m² × m²` supermatrix with rows `(ij)` and columns `(kl)`.
    pub fn supermatrix(&self) -> RMat {
        let mm = self.m() * self.m();
        RMat::from_iterator(mm, mm, self.v.data().iter().map(|z| z.re)).transpose()
    }
}

/// Factor `λ w wᵀ` of a reshaped symmetric vector `w`, written as a real
/// rotation diagonalizing `w` and `J = λ ω ωᵀ`.
fn rank_one_factor(lambda: f64, w: &RMat) -> SOSFactor {
    let sym = (w + w.transpose()) * 0.5;
    let (omega, o) = eigh_real_desc(&sym);
    let m = omega.len();
    let j = RMat::from_fn(m, m, |x, y| lambda * omega[x] * omega[y]);
    SOSFactor {
        mu: to_complex(&o),
        j: to_complex(&j),
        origin: FactorOrigin::Cholesky,
    }
}

/// Top-`L` eigenpairs of the integral supermatrix as real rank-one factors.
///
/// Passing `None` keeps every eigenpair above round-off.
pub fn cholesky_baseline(v: &HermitianERITensor, l: Option<usize>) -> Result<Vec<SOSFactor>> {
    let m = v.m();
    if m == 0 {
        return Ok(Vec::new());
    }
    let (vals, vecs) = eigh_real_desc(&v.supermatrix());
    let top = vals.first().copied().unwrap_or(0.0).max(0.0);
    if let Some(&low) = vals.last() {
        if low < -INDEFINITE_TOL * top.max(1.0) {
            return Err(Error::Indefinite(low));
        }
        if low < 0.0 {
            log::warn!("clipping negative integral eigenvalue {low:.3e}");
        }
    }
    let floor = crate::tensor::RANK_TOL * top * 1e-3;
    let keep = vals.iter().take_while(|&&x| x > floor).count();
    let count = l.map_or(keep, |l| l.min(keep));
    Ok((0..count)
        .map(|k| {
            let w = RMat::from_fn(m, m, |i, j| vecs[(i * m + j, k)]);
            rank_one_factor(vals[k], &w)
        })
        .collect())
}

/// Greedy compression over real orbital rotations.
pub fn compress_eri(v: &HermitianERITensor, cfg: &CompressionConfig) -> Result<Compression> {
    let cfg = CompressionConfig {
        space: ParamSpace::RealOrthogonal,
        ..cfg.clone()
    };
    greedy_compress(&v.v, &cfg)
}

/// `max |v − Σ factors|` for the first `k` factors, `k = 0..=len`.
pub fn mad_curve(v: &HermitianERITensor, factors: &[SOSFactor]) -> Vec<f64> {
    let mut approx = CoeffTensor4::zeros(v.m(), Convention::HermitianChemist);
    let mut out = vec![mad(&v.v, &approx)];
    for f in factors {
        let t = f.tensor();
        for (a, b) in approx.data_mut().iter_mut().zip(t.data()) {
            *a += b;
        }
        out.push(mad(&v.v, &approx));
    }
    out
}

fn mad(a: &CoeffTensor4, b: &CoeffTensor4) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_orthogonal;
    use crate::tensor::reconstruct;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Sum of random symmetric rank-one pair terms: PSD and eight-fold symmetric.
    pub(crate) fn random_eri(m: usize, terms: usize, seed: u64) -> HermitianERITensor {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ws: Vec<RMat> = (0..terms)
            .map(|_| {
                let a = RMat::from_fn(m, m, |_, _| rng.gen_range(-1.0..1.0));
                &a + a.transpose()
            })
            .collect();
        HermitianERITensor::from_real_fn(m, |i, j, k, l| ws.iter().map(|w| w[(i, j)] * w[(k, l)]).sum()).unwrap()
    }

    #[test]
    fn rejects_broken_symmetry() {
        let mut t = random_eri(3, 2, 1).tensor().clone();
        t.set(0, 1, 2, 2, t.get(0, 1, 2, 2) + C64::new(1e-6, 0.0));
        assert!(matches!(HermitianERITensor::new(t), Err(Error::Symmetry { .. })));
    }

    #[test]
    fn diagonal_integrals_give_coordinate_factors() {
        let v = HermitianERITensor::from_real_fn(3, |i, j, k, l| {
            if i == j && k == l && i == k {
                (i + 1) as f64
            } else {
                0.0
            }
        })
        .unwrap();
        let f = cholesky_baseline(&v, None).unwrap();
        assert_eq!(f.len(), 3);
        for factor in &f {
            let nonzero = factor.j.iter().filter(|z| z.norm() > 1e-12).count();
            assert_eq!(nonzero, 1);
        }
    }

    #[test]
    fn full_cholesky_reconstructs() {
        let v = random_eri(4, 5, 2);
        let f = cholesky_baseline(&v, None).unwrap();
        let r = reconstruct(4, &f).unwrap();
        assert!(mad(&r, v.tensor()) < 1e-10);
    }

    #[test]
    fn indefinite_rejected() {
        let v = HermitianERITensor::from_real_fn(2, |i, j, k, l| {
            if i == j && k == l {
                if i == k { 0.0 } else { 1.0 }
            } else {
                0.0
            }
        })
        .unwrap();
        assert!(matches!(cholesky_baseline(&v, None), Err(Error::Indefinite(_))));
    }

    #[test]
    fn planted_real_factor() {
        let m = 4;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let o = random_orthogonal(m, &mut rng);
        let a = RMat::from_fn(m, m, |_, _| rng.gen_range(-1.0..1.0));
        let j = &a + a.transpose();
        let f = SOSFactor::new(to_complex(&o), to_complex(&j), FactorOrigin::Uc).unwrap();
        let v = HermitianERITensor::new(f.tensor().relabel(Convention::HermitianChemist)).unwrap();
        let out = compress_eri(&v, &CompressionConfig::default()).unwrap();
        assert_eq!(out.factors.len(), 1);
        assert!(out.residual.norm() < 1e-8);
        for g in &out.factors {
            assert!(g.mu.iter().all(|z| z.im == 0.0));
        }
    }
}
