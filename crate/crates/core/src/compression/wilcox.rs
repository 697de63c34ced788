use crate::compression::kappa::{Direction, KappaParams};
use crate::linalg::{AntihermitianEigen, CMat};
use crate::{Result, C64};

/// `∂U/∂θ = W U` for one real parameter direction.
#[derive(Clone, Debug)]
pub struct RotationDerivative {
    pub w: CMat,
}

/// Spectral data of `κ` reused across all directions.
#[derive(Clone, Debug)]
pub struct KappaSpectrum {
    pub v: CMat,
    pub u: CMat,
    /// `Φ_ij = (e^{λ_i − λ_j} − 1)/(λ_i − λ_j)` with `λ = iω`.
    pub phi: CMat,
}

/// `(e^{iδ} − 1)/(iδ)` written as `e^{iδ/2} sinc(δ/2)`, which has no
/// cancellation for small gaps.
fn divided_difference(delta: f64) -> C64 {
    let h = 0.5 * delta;
    let sinc = if h.abs() < 1e-12 {
        1.0
    } else if h.abs() < 1e-4 {
        1.0 - h * h / 6.0
    } else {
        h.sin() / h
    };
    C64::from_polar(sinc, h)
}

impl KappaSpectrum {
    pub fn new(kappa: &CMat) -> Self {
        let eig = AntihermitianEigen::new(kappa);
        let n = eig.omega.len();
        let phi = CMat::from_fn(n, n, |i, j| divided_difference(eig.omega[i] - eig.omega[j]));
        let u = eig.exp();
        Self { v: eig.vectors, u, phi }
    }

    /// `W = V (B ∘ Φ) V†` with `B = V† E V`.
    pub fn derivative(&self, e: &CMat) -> CMat {
        let b = self.v.adjoint() * e * &self.v;
        &self.v * b.component_mul(&self.phi) * self.v.adjoint()
    }

    /// Pulls a Wirtinger gradient `G = ∂O/∂u` back to `Γ` such that
    /// `dO/dθ_k = 2 Re Σ_ab E_k,ab Γ_ab`.
    pub fn pullback(&self, g: &CMat) -> CMat {
        let h = self.v.adjoint() * &self.u * g.transpose() * &self.v;
        self.v.conjugate() * h.transpose().component_mul(&self.phi) * self.v.transpose()
    }
}

pub fn wilcox_derivative(kappa: &KappaParams, direction_index: usize) -> Result<RotationDerivative> {
    let n = kappa.n();
    let dir = Direction::of(n, direction_index)?;
    let spec = KappaSpectrum::new(&kappa.kappa());
    Ok(RotationDerivative {
        w: spec.derivative(&dir.matrix(n)),
    })
}
