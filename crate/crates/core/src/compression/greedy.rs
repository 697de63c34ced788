use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::compression::bfgs::{minimize, BfgsOptions};
use crate::compression::kappa::{KappaParams, ParamSpace};
use crate::compression::objective::{diagonal_coefficients, value_and_gradient_with};
use crate::compression::wilcox::KappaSpectrum;
use crate::decompositions::takagi;
use crate::linalg::{diagonalize_normal, eigh, eigh_real_desc, frob, to_complex, CMat, I};
use crate::tensor::{
    residual_rank, sigma_max, transform4, CoeffTensor4, Convention, FactorOrigin, SOSFactor,
};
use crate::{par, Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    Random,
    TakagiSeed,
}

impl std::str::FromStr for InitMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(InitMode::Random),
            "takagi-seed" => Ok(InitMode::TakagiSeed),
            other => Err(Error::Invalid(format!("unknown init mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompressionConfig {
    /// Stop once the remainder's Frobenius norm drops below this.
    pub threshold: f64,
    pub max_factors: usize,
    pub init: InitMode,
    /// Random starts in addition to the primary start.
    pub restarts: usize,
    pub seed: u64,
    pub space: ParamSpace,
    pub gtol: f64,
    pub max_iter: usize,
    /// Compute the residual rank after every iteration (one SVD of `n²×n²`).
    pub track_rank: bool,
}

impl Default for CompressionConfig {
    fn default() -> Self {
        Self {
            threshold: 1e-5,
            max_factors: 100,
            init: InitMode::TakagiSeed,
            restarts: 2,
            seed: 0,
            space: ParamSpace::Full,
            gtol: 1e-7,
            max_iter: 500,
            track_rank: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    ThresholdMet,
    MaxFactors,
}

#[derive(Clone, Debug, Serialize)]
pub struct IterationReport {
    pub factor_index: usize,
    pub residual_l2: f64,
    pub residual_mad: f64,
    pub residual_takagi_rank: Option<usize>,
    /// `O(κ*)` on the remainder before subtraction.
    pub objective: f64,
    /// `‖J − Jᵀ‖_F` before symmetrization.
    pub asymmetry: f64,
    pub optimizer_iterations: usize,
    pub starts_converged: usize,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompressionReport {
    pub initial_l2: f64,
    pub iterations: Vec<IterationReport>,
    pub stop: Option<StopReason>,
}

#[derive(Clone, Debug)]
pub struct Compression {
    pub factors: Vec<SOSFactor>,
    pub report: CompressionReport,
    pub residual: CoeffTensor4,
}

struct StartOutcome {
    u: CMat,
    value: f64,
    iterations: usize,
    converged: bool,
}

fn optimize_from(
    r: &CoeffTensor4,
    u0: &CMat,
    theta0: Vec<f64>,
    active: &[usize],
    cfg: &CompressionConfig,
) -> StartOutcome {
    let n = r.n();
    let rotated = transform4(r, u0);
    let scale = 1.0 / r.norm_sqr();
    let fg = |theta: &[f64]| {
        let k = KappaParams::scatter(n, active, theta);
        let spec = KappaSpectrum::new(&k.kappa());
        let (v, g) = value_and_gradient_with(&rotated, &spec);
        let g = active.iter().map(|&i| -g[i] * scale).collect();
        (-v * scale, g)
    };
    let res = minimize(
        fg,
        theta0,
        BfgsOptions {
            gtol: cfg.gtol,
            max_iter: cfg.max_iter,
        },
    );
    let mut u = u0 * KappaParams::scatter(n, active, &res.x).unitary();
    if cfg.space == ParamSpace::RealOrthogonal {
        u = u.map(|z| C64::new(z.re, 0.0));
    }
    let value = crate::compression::objective::objective_at(r, &u);
    StartOutcome {
        u,
        value,
        iterations: res.iterations,
        converged: res.converged,
    }
}

/// Rotation that diagonalizes the leading Takagi vector of the remainder.
fn takagi_seed(r: &CoeffTensor4, space: ParamSpace) -> Option<CMat> {
    let n = r.n();
    let nn = n * n;
    let m = CMat::from_row_slice(nn, nn, r.data());
    let sym = (&m + m.transpose()).scale(0.5);
    if space == ParamSpace::RealOrthogonal {
        let (vals, vecs) = eigh_real_desc(&sym.map(|z| z.re));
        let top = (0..nn).max_by(|&a, &b| vals[a].abs().total_cmp(&vals[b].abs()))?;
        let y = crate::linalg::RMat::from_fn(n, n, |p, q| vecs[(p * n + q, top)]);
        let (_, w) = eigh_real_desc(&(&y + y.transpose()).scale(0.5));
        return Some(to_complex(&w));
    }
    let tk = takagi(&sym).ok()?;
    let y = CMat::from_fn(n, n, |p, q| tk.u[(p * n + q, 0)]);
    let z = &y + y.adjoint() * I;
    let u = match diagonalize_normal(&z) {
        Ok((mu, _)) => mu,
        Err(_) => eigh(&(&z + z.adjoint()).scale(0.5)).1,
    };
    // A seed that mixes spin sectors cannot be reached in the blocked space.
    let local = (0..n).all(|p| (0..n).all(|q| p % 2 == q % 2 || u[(p, q)].norm() < 1e-12));
    (space != ParamSpace::SpinBlocked || local).then_some(u)
}

fn stream_rng(seed: u64, iteration: usize, start: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((iteration as u64) << 32) | start as u64);
    rng
}

fn diag_tensor(j: &CMat) -> CoeffTensor4 {
    let n = j.nrows();
    let mut d = CoeffTensor4::zeros(n, Convention::ChargeCharge);
    for x in 0..n {
        for y in 0..n {
            d.set(x, x, y, y, j[(x, y)]);
        }
    }
    d
}

/// Greedy unitary compression of a charge-charge (or real chemist) tensor.
///
/// Fails with [`Error::Optimizer`], carrying the factors accepted so far,
/// when no start of an iteration finds a positive objective.
pub fn greedy_compress(t: &CoeffTensor4, cfg: &CompressionConfig) -> Result<Compression> {
    if t.convention() == Convention::PqrsLadder {
        return Err(Error::Convention {
            expected: Convention::ChargeCharge,
            found: t.convention(),
        });
    }
    if !(cfg.threshold > 0.0) {
        return Err(Error::Invalid(format!("threshold must be positive, got {}", cfg.threshold)));
    }
    let n = t.n();
    let active = cfg.space.active(n);
    let rank_scale = if cfg.track_rank { sigma_max(t) } else { 0.0 };
    let mut residual = t.clone();
    let mut factors = Vec::new();
    let mut report = CompressionReport {
        initial_l2: t.norm(),
        iterations: Vec::new(),
        stop: None,
    };

    loop {
        let l2 = residual.norm();
        if l2 < cfg.threshold {
            report.stop = Some(StopReason::ThresholdMet);
            break;
        }
        if factors.len() >= cfg.max_factors {
            report.stop = Some(StopReason::MaxFactors);
            break;
        }
        let iteration = factors.len();
        let clock = Instant::now();

        let mut starts: Vec<(CMat, Vec<f64>)> = Vec::new();
        if cfg.init == InitMode::TakagiSeed {
            if let Some(u0) = takagi_seed(&residual, cfg.space) {
                starts.push((u0, vec![0.0; active.len()]));
            }
        }
        let randoms = cfg.restarts + usize::from(cfg.init == InitMode::Random || starts.is_empty());
        let normal = Normal::new(0.0, 0.1).expect("valid normal");
        for k in 0..randoms {
            let mut rng = stream_rng(cfg.seed, iteration, k);
            let theta = (0..active.len()).map(|_| normal.sample(&mut rng)).collect();
            starts.push((CMat::identity(n, n), theta));
        }

        let outcomes = par::map_slice(&starts, |(u0, theta)| {
            optimize_from(&residual, u0, theta.clone(), &active, cfg)
        });
        let floor = 1e-14 * l2 * l2;
        let before = l2 * l2;
        // Objectives of good starts agree to round-off, so rank them by the
        // residual they actually leave.
        let mut best: Option<(usize, CMat, f64, CoeffTensor4, f64)> = None;
        for (k, o) in outcomes.iter().enumerate() {
            if !(o.value.is_finite() && o.value > floor) {
                continue;
            }
            let mut j = diagonal_coefficients(&residual, &o.u);
            if cfg.space == ParamSpace::RealOrthogonal {
                j = j.map(|z| C64::new(z.re, 0.0));
            }
            let asymmetry = frob(&(&j - j.transpose()));
            let j = (&j + j.transpose()).scale(0.5);
            let piece = transform4(&diag_tensor(&j), &o.u.adjoint());
            let left = residual.sub(&piece)?;
            let after = left.norm_sqr();
            if best.as_ref().map_or(true, |b| after < b.4) {
                best = Some((k, j, asymmetry, left, after));
            }
        }
        let Some((k, j, asymmetry, left, after)) = best else {
            let reason = format!(
                "no start reached a positive objective (values {:?})",
                outcomes.iter().map(|o| o.value).collect::<Vec<_>>()
            );
            report.stop = None;
            return Err(Error::Optimizer {
                iteration,
                reason,
                partial: Box::new(Compression {
                    factors,
                    report,
                    residual,
                }),
            });
        };
        let best = &outcomes[k];
        log::debug!(
            "iteration {iteration}: O = {:.6e}, ‖R‖² {before:.6e} -> {after:.6e}",
            best.value
        );
        if after > before {
            return Err(Error::Optimizer {
                iteration,
                reason: format!("subtraction increased the residual ({before:.3e} -> {after:.3e})"),
                partial: Box::new(Compression {
                    factors,
                    report,
                    residual,
                }),
            });
        }
        residual = left;
        factors.push(SOSFactor::new(best.u.clone(), j, FactorOrigin::Uc)?);
        report.iterations.push(IterationReport {
            factor_index: iteration + 1,
            residual_l2: after.sqrt(),
            residual_mad: residual.max_abs(),
            residual_takagi_rank: cfg.track_rank.then(|| residual_rank(&residual, rank_scale)),
            objective: best.value,
            asymmetry,
            optimizer_iterations: best.iterations,
            starts_converged: outcomes.iter().filter(|o| o.converged).count(),
            wall_time_s: clock.elapsed().as_secs_f64(),
        });
    }
    Ok(Compression {
        factors,
        report,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_unitary;
    use rand::Rng;

    #[test]
    fn zero_tensor_needs_no_factors() {
        let t = CoeffTensor4::zeros(3, Convention::ChargeCharge);
        let c = greedy_compress(&t, &CompressionConfig::default()).unwrap();
        assert!(c.factors.is_empty());
        assert!(c.report.iterations.is_empty());
        assert_eq!(c.report.stop, Some(StopReason::ThresholdMet));
    }

    #[test]
    fn planted_factor_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let n = 4;
        let mu = random_unitary(n, &mut rng);
        let mut j = CMat::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        j = (&j + j.transpose()).scale(0.5);
        let t = SOSFactor::new(mu, j, FactorOrigin::Uc).unwrap().tensor();
        let c = greedy_compress(&t, &CompressionConfig { threshold: 1e-8, ..Default::default() }).unwrap();
        assert_eq!(c.factors.len(), 1);
        assert!(c.residual.norm() < 1e-8);
    }

    #[test]
    fn deterministic_given_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let n = 3;
        let t = CoeffTensor4::from_fn(n, Convention::ChargeCharge, |_, _, _, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let cfg = CompressionConfig {
            max_factors: 2,
            init: InitMode::Random,
            seed: 5,
            ..Default::default()
        };
        let a = greedy_compress(&t, &cfg).unwrap();
        let b = greedy_compress(&t, &cfg).unwrap();
        assert_eq!(a.factors, b.factors);
    }
}
