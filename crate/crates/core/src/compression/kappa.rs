use serde::{Deserialize, Serialize};

use crate::linalg::{expm_antihermitian, CMat, I};
use crate::{Error, Result, C64};

/// Which real parameters of `κ` the optimizer may move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamSpace {
    /// All `n²` parameters.
    Full,
    /// Real antisymmetric `κ` only, so `e^κ` is real orthogonal.
    RealOrthogonal,
    /// Only rotations between spin-orbitals of equal spin (`p ≡ q mod 2`).
    SpinBlocked,
}

/// Antihermitian generator `κ` stored as `n²` reals.
///
/// Layout: real parts of the strict upper triangle (row-major), then their
/// imaginary parts, then the `n` imaginary diagonal entries.
#[derive(Clone, Debug, PartialEq)]
pub struct KappaParams {
    n: usize,
    params: Vec<f64>,
}

/// Strict upper-triangle pairs in row-major order.
pub fn upper_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for p in 0..n {
        for q in p + 1..n {
            v.push((p, q));
        }
    }
    v
}

/// What a single real parameter moves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Real(usize, usize),
    Imag(usize, usize),
    Diag(usize),
}

impl Direction {
    pub fn of(n: usize, k: usize) -> Result<Self> {
        let m = n * n.saturating_sub(1) / 2;
        if k >= n * n {
            return Err(Error::Invalid(format!("direction {k} out of range for n = {n}")));
        }
        let pairs = upper_pairs(n);
        Ok(if k < m {
            let (p, q) = pairs[k];
            Direction::Real(p, q)
        } else if k < 2 * m {
            let (p, q) = pairs[k - m];
            Direction::Imag(p, q)
        } else {
            Direction::Diag(k - 2 * m)
        })
    }

    /// The antihermitian basis matrix `E` with `∂κ/∂θ = E`.
    pub fn matrix(self, n: usize) -> CMat {
        let mut e = CMat::zeros(n, n);
        match self {
            Direction::Real(p, q) => {
                e[(p, q)] = C64::new(1.0, 0.0);
                e[(q, p)] = C64::new(-1.0, 0.0);
            }
            Direction::Imag(p, q) => {
                e[(p, q)] = I;
                e[(q, p)] = I;
            }
            Direction::Diag(p) => e[(p, p)] = I,
        }
        e
    }

    /// `Σ_ab E_ab Γ_ab`.
    pub fn pair_with(self, gamma: &CMat) -> C64 {
        match self {
            Direction::Real(p, q) => gamma[(p, q)] - gamma[(q, p)],
            Direction::Imag(p, q) => I * (gamma[(p, q)] + gamma[(q, p)]),
            Direction::Diag(p) => I * gamma[(p, p)],
        }
    }
}

impl ParamSpace {
    /// Indices into the full `n²` layout that this space activates.
    pub fn active(self, n: usize) -> Vec<usize> {
        (0..n * n)
            .filter(|&k| match (self, Direction::of(n, k).expect("in range")) {
                (ParamSpace::Full, _) => true,
                (ParamSpace::RealOrthogonal, Direction::Real(..)) => true,
                (ParamSpace::RealOrthogonal, _) => false,
                (ParamSpace::SpinBlocked, Direction::Real(p, q) | Direction::Imag(p, q)) => {
                    p % 2 == q % 2
                }
                (ParamSpace::SpinBlocked, Direction::Diag(_)) => true,
            })
            .collect()
    }
}

impl KappaParams {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            params: vec![0.0; n * n],
        }
    }

    pub fn from_vec(n: usize, params: Vec<f64>) -> Result<Self> {
        if params.len() != n * n {
            return Err(Error::Shape(format!(
                "{} parameters for n = {n}, expected {}",
                params.len(),
                n * n
            )));
        }
        Ok(Self { n, params })
    }

    /// Places `values` at the `active` indices, zero elsewhere.
    pub fn scatter(n: usize, active: &[usize], values: &[f64]) -> Self {
        let mut params = vec![0.0; n * n];
        for (&k, &v) in active.iter().zip(values) {
            params[k] = v;
        }
        Self { n, params }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// The antihermitian matrix; `κ† = −κ` holds exactly.
    pub fn kappa(&self) -> CMat {
        let n = self.n;
        let m = n * n.saturating_sub(1) / 2;
        let mut k = CMat::zeros(n, n);
        for (i, (p, q)) in upper_pairs(n).into_iter().enumerate() {
            let re = self.params[i];
            let im = self.params[m + i];
            k[(p, q)] = C64::new(re, im);
            k[(q, p)] = C64::new(-re, im);
        }
        for p in 0..n {
            k[(p, p)] = C64::new(0.0, self.params[2 * m + p]);
        }
        k
    }

    pub fn unitary(&self) -> CMat {
        expm_antihermitian(&self.kappa())
    }

    pub fn neg(&self) -> Self {
        Self {
            n: self.n,
            params: self.params.iter().map(|x| -x).collect(),
        }
    }
}
