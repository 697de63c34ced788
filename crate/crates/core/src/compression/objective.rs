//! The compression objective `O(u) = Σ_{xy} |t̃_{xxyy}|²` and its gradients.

use crate::compression::kappa::{Direction, KappaParams};
use crate::compression::wilcox::KappaSpectrum;
use crate::linalg::CMat;
use crate::tensor::{contract_mode, transform4, CoeffTensor4, Convention};
use crate::{Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// `t̃ = transform4(t, e^κ)`.
pub fn transform_tensor(t: &CoeffTensor4, kappa: &KappaParams) -> Result<CoeffTensor4> {
    check(t, kappa)?;
    Ok(transform4(t, &kappa.unitary()))
}

fn check(t: &CoeffTensor4, kappa: &KappaParams) -> Result<()> {
    if t.convention() == Convention::PqrsLadder {
        return Err(crate::Error::Convention {
            expected: Convention::ChargeCharge,
            found: t.convention(),
        });
    }
    if kappa.n() != t.n() {
        return Err(crate::Error::Shape(format!(
            "κ over {} modes, tensor over {}",
            kappa.n(),
            t.n()
        )));
    }
    Ok(())
}

/// `Q[i,j,y] = Σ_kl u*_{ky} u_{ly} t_{ijkl}`, stored row-major.
fn right_pair(t: &[C64], n: usize, u: &CMat) -> Vec<C64> {
    // only the k = l diagonal of the second contraction is needed
    let a = contract_mode(t, n, 3, u, false);
    let mut q = vec![ZERO; n * n * n];
    for ij in 0..n * n {
        let block = &a[ij * n * n..(ij + 1) * n * n];
        for y in 0..n {
            let mut acc = ZERO;
            for k in 0..n {
                acc += u[(k, y)].conj() * block[k * n + y];
            }
            q[ij * n + y] = acc;
        }
    }
    q
}

/// `Q'[x,k,l] = Σ_ij u*_{ix} u_{jx} t_{ijkl}`.
fn left_pair(t: &[C64], n: usize, u: &CMat) -> Vec<C64> {
    let a = contract_mode(t, n, 0, u, true);
    let nn = n * n;
    let mut q = vec![ZERO; n * nn];
    for x in 0..n {
        let dst = &mut q[x * nn..(x + 1) * nn];
        for j in 0..n {
            let c = u[(j, x)];
            let src = &a[(x * n + j) * nn..(x * n + j + 1) * nn];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += c * s;
            }
        }
    }
    q
}

/// `D_{xy} = t̃_{xxyy}` from `Q`.
fn diagonal_from_right(q: &[C64], n: usize, u: &CMat) -> CMat {
    let mut d = CMat::zeros(n, n);
    for x in 0..n {
        for i in 0..n {
            let a = u[(i, x)].conj();
            for j in 0..n {
                let c = a * u[(j, x)];
                let row = &q[(i * n + j) * n..(i * n + j + 1) * n];
                for y in 0..n {
                    d[(x, y)] += c * row[y];
                }
            }
        }
    }
    d
}

/// Diagonal coefficients `J_{xy} = t̃_{xxyy}` under the rotation `u`.
pub fn diagonal_coefficients(t: &CoeffTensor4, u: &CMat) -> CMat {
    let n = t.n();
    diagonal_from_right(&right_pair(t.data(), n, u), n, u)
}

/// `O(u)` for an explicit unitary.
pub fn objective_at(t: &CoeffTensor4, u: &CMat) -> f64 {
    diagonal_coefficients(t, u).iter().map(|z| z.norm_sqr()).sum()
}

pub fn objective(t: &CoeffTensor4, kappa: &KappaParams) -> Result<f64> {
    check(t, kappa)?;
    Ok(objective_at(t, &kappa.unitary()))
}

/// Wirtinger gradient `G_{cd} = ∂O/∂u_{cd}`, so that `dO = 2 Re Σ G ∘ du`.
pub fn wirtinger_gradient(t: &CoeffTensor4, u: &CMat) -> (f64, CMat) {
    let n = t.n();
    let q = right_pair(t.data(), n, u);
    let qp = left_pair(t.data(), n, u);
    let d = diagonal_from_right(&q, n, u);
    let value = d.iter().map(|z| z.norm_sqr()).sum();
    let nn = n * n;
    let mut g = CMat::zeros(n, n);
    for c in 0..n {
        for dd in 0..n {
            let mut acc = ZERO;
            for i in 0..n {
                let ud = u[(i, dd)].conj();
                // ket and bra slots of the left pair
                for y in 0..n {
                    acc += ud * q[(i * n + c) * n + y] * d[(dd, y)].conj();
                    acc += ud * q[(c * n + i) * n + y].conj() * d[(dd, y)];
                }
                // ket and bra slots of the right pair
                for x in 0..n {
                    acc += ud * qp[x * nn + i * n + c] * d[(x, dd)].conj();
                    acc += ud * qp[x * nn + c * n + i].conj() * d[(x, dd)];
                }
            }
            g[(c, dd)] = acc;
        }
    }
    (value, g)
}

/// Value and full `n²` gradient of `O(e^κ)`, `O(n^5)` overall.
pub fn value_and_gradient(t: &CoeffTensor4, kappa: &KappaParams) -> Result<(f64, Vec<f64>)> {
    check(t, kappa)?;
    let spec = KappaSpectrum::new(&kappa.kappa());
    Ok(value_and_gradient_with(t, &spec))
}

pub(crate) fn value_and_gradient_with(t: &CoeffTensor4, spec: &KappaSpectrum) -> (f64, Vec<f64>) {
    let n = t.n();
    let (value, g) = wirtinger_gradient(t, &spec.u);
    let gamma = spec.pullback(&g);
    let grad = (0..n * n)
        .map(|k| 2.0 * Direction::of(n, k).expect("in range").pair_with(&gamma).re)
        .collect();
    (value, grad)
}

pub fn gradient(t: &CoeffTensor4, kappa: &KappaParams) -> Result<Vec<f64>> {
    Ok(value_and_gradient(t, kappa)?.1)
}

/// `Σ a*_{ix} b_{jx} c*_{ky} d_{ly} t_{ijkl}` for all `(x, y)`.
fn mixed_diagonal(t: &[C64], n: usize, a: &CMat, b: &CMat, c: &CMat, d: &CMat) -> CMat {
    let left = contract_mode(t, n, 0, a, true);
    let left = contract_mode(&left, n, 1, b, false);
    let nn = n * n;
    let mut out = CMat::zeros(n, n);
    for x in 0..n {
        let block = &left[(x * n + x) * nn..(x * n + x + 1) * nn];
        for y in 0..n {
            let mut acc = ZERO;
            for k in 0..n {
                let ck = c[(k, y)].conj();
                for l in 0..n {
                    acc += ck * d[(l, y)] * block[k * n + l];
                }
            }
            out[(x, y)] = acc;
        }
    }
    out
}

/// Term-by-term gradient: for every direction the derivative of each of the
/// four `u` slots of `t̃_{xxyy}` is contracted separately. `O(n^7)`; kept as
/// the reference for [`gradient`].
pub fn reference_gradient(t: &CoeffTensor4, kappa: &KappaParams) -> Result<Vec<f64>> {
    check(t, kappa)?;
    let n = t.n();
    let spec = KappaSpectrum::new(&kappa.kappa());
    let u = &spec.u;
    let d = mixed_diagonal(t.data(), n, u, u, u, u);
    let mut grad = Vec::with_capacity(n * n);
    for k in 0..n * n {
        let w = spec.derivative(&Direction::of(n, k)?.matrix(n));
        let du = &w * u;
        let dd = mixed_diagonal(t.data(), n, &du, u, u, u)
            + mixed_diagonal(t.data(), n, u, &du, u, u)
            + mixed_diagonal(t.data(), n, u, u, &du, u)
            + mixed_diagonal(t.data(), n, u, u, u, &du);
        let s: f64 = d.iter().zip(dd.iter()).map(|(a, b)| (a.conj() * b).re).sum();
        grad.push(2.0 * s);
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_kappa(n: usize, rng: &mut ChaCha8Rng) -> KappaParams {
        KappaParams::from_vec(n, (0..n * n).map(|_| rng.gen_range(-0.5..0.5)).collect()).unwrap()
    }

    #[test]
    fn diagonal_tensor_objective_at_origin() {
        let n = 3;
        let mut t = CoeffTensor4::zeros(n, Convention::ChargeCharge);
        let mut norm = 0.0;
        for x in 0..n {
            for y in 0..n {
                let v = C64::new(x as f64 + 1.0, y as f64 - 1.0);
                t.set(x, x, y, y, v);
                norm += v.norm_sqr();
            }
        }
        let k = KappaParams::zeros(n);
        assert!((objective(&t, &k).unwrap() - norm).abs() < 1e-12);
        assert!(gradient(&t, &k).unwrap().iter().all(|g| g.abs() < 1e-12));
    }

    #[test]
    fn chain_rule_matches_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 3;
        let t = CoeffTensor4::from_fn(n, Convention::ChargeCharge, |_, _, _, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let k = random_kappa(n, &mut rng);
        let a = gradient(&t, &k).unwrap();
        let b = reference_gradient(&t, &k).unwrap();
        let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12 * scale.max(1.0));
        }
    }
}
