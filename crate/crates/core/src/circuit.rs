//! Compilation of factor lists into layered circuits.
//!
//! A factor `F_l` is implemented as `e^{F_l} = Û(μ_l) e^{Σ J n n} Û(μ_l)†`.
//! Consecutive slices share their basis changes, so the circuit applies
//! `U_1`, `C_1`, `U_2 U_1†`, …, `C_L`, `U_L†` with `U_l = μ_l†`. Basis
//! changes become nearest-neighbour Givens meshes (Clements layout) and
//! charge layers follow an odd-even transposition schedule.

use serde::{Deserialize, Serialize};

use crate::fock::{fock_rotation, DenseOperator};
use crate::linalg::{check_unitary, expm_antihermitian, CMat};
use crate::spin::AnnotatedFactor;
use crate::tensor::{OneBodyCorrection, SOSFactor};
use crate::{Error, Result, C64};

pub const IR_VERSION: u32 = 1;

/// Two-mode rotation on `(p, p + 1)`:
/// `[[e^{iφ} cos θ, −sin θ], [e^{iφ} sin θ, cos θ]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GivensRotation {
    pub p: usize,
    pub q: usize,
    pub theta: f64,
    pub phi: f64,
    /// Parallel round, starting at 0.
    pub round: usize,
}

impl GivensRotation {
    pub fn matrix(&self, n: usize) -> CMat {
        let mut m = CMat::identity(n, n);
        let (s, c) = self.theta.sin_cos();
        let e = C64::from_polar(1.0, self.phi);
        m[(self.p, self.p)] = e * c;
        m[(self.p, self.q)] = C64::new(-s, 0.0);
        m[(self.q, self.p)] = e * s;
        m[(self.q, self.q)] = C64::new(c, 0.0);
        m
    }

    fn is_identity(&self) -> bool {
        let two_pi = std::f64::consts::TAU;
        self.theta.abs() < 1e-15 && (self.phi.rem_euclid(two_pi).min(two_pi - self.phi.rem_euclid(two_pi))) < 1e-15
    }
}

/// Rotations in application order followed by final phases:
/// `u = diag(e^{iφ_p}) · T_K ⋯ T_1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GivensNetwork {
    pub n: usize,
    pub rotations: Vec<GivensRotation>,
    pub phases: Vec<f64>,
}

impl GivensNetwork {
    pub fn unitary(&self) -> CMat {
        let n = self.n;
        let mut u = CMat::identity(n, n);
        for r in &self.rotations {
            u = r.matrix(n) * u;
        }
        for p in 0..n {
            let e = C64::from_polar(1.0, self.phases[p]);
            for c in 0..n {
                u[(p, c)] *= e;
            }
        }
        u
    }

    pub fn depth(&self) -> usize {
        self.rotations.iter().map(|r| r.round + 1).max().unwrap_or(0)
    }
}

/// Right multiplication by `T†` that zeroes `u[r, m]`.
fn null_right(u: &mut CMat, r: usize, m: usize) -> GivensRotation {
    let a = u[(r, m)];
    let b = u[(r, m + 1)];
    let (theta, phi) = if a.norm() == 0.0 {
        (0.0, 0.0)
    } else if b.norm() == 0.0 {
        (std::f64::consts::FRAC_PI_2, a.arg())
    } else {
        ((a.norm() / b.norm()).atan(), a.arg() - b.arg())
    };
    let t = GivensRotation { p: m, q: m + 1, theta, phi, round: 0 };
    let td = t.matrix(u.nrows()).adjoint();
    *u = &*u * td;
    u[(r, m)] = C64::new(0.0, 0.0);
    t
}

/// Left multiplication by `T` on `(m − 1, m)` that zeroes `u[m, c]`.
fn null_left(u: &mut CMat, m: usize, c: usize) -> GivensRotation {
    let a = u[(m - 1, c)];
    let b = u[(m, c)];
    let (theta, phi) = if b.norm() == 0.0 {
        (0.0, 0.0)
    } else if a.norm() == 0.0 {
        (std::f64::consts::FRAC_PI_2, 0.0)
    } else {
        let ph = -(b / b.norm()) / (a / a.norm());
        ((b.norm() / a.norm()).atan(), ph.arg())
    };
    let t = GivensRotation { p: m - 1, q: m, theta, phi, round: 0 };
    *u = t.matrix(u.nrows()) * &*u;
    u[(m, c)] = C64::new(0.0, 0.0);
    t
}

/// Assigns each rotation the earliest round after its modes are free.
fn schedule(rotations: &mut [GivensRotation], n: usize) {
    let mut busy = vec![0usize; n];
    for r in rotations.iter_mut() {
        let round = busy[r.p].max(busy[r.q]);
        r.round = round;
        busy[r.p] = round + 1;
        busy[r.q] = round + 1;
    }
}

/// Clements decomposition of a unitary into at most `n(n−1)/2`
/// nearest-neighbour rotations and `n` phases.
pub fn givens_decompose(u: &CMat) -> Result<GivensNetwork> {
    check_unitary(u, 1e-10)?;
    let n = u.nrows();
    let mut w = u.clone();
    let mut right = Vec::new();
    let mut left = Vec::new();
    for i in 0..n.saturating_sub(1) {
        if i % 2 == 0 {
            for j in 0..=i {
                right.push(null_right(&mut w, n - 1 - j, i - j));
            }
        } else {
            for j in 1..=i + 1 {
                let row = n + j - i - 2;
                left.push(null_left(&mut w, row, j - 1));
            }
        }
    }
    // w is now diagonal: L_k ⋯ L_1 u R_1† ⋯ R_r† = D.
    let mut phases: Vec<f64> = (0..n).map(|p| w[(p, p)].arg()).collect();
    left.retain(|r| !r.is_identity());
    // Move each L† through D: T† D = D' T'.
    let mut moved = Vec::with_capacity(left.len());
    for t in left.iter().rev() {
        let (d1, d2) = (phases[t.p], phases[t.q]);
        let pi = std::f64::consts::PI;
        moved.push(GivensRotation { phi: d1 - d2 + pi, ..*t });
        phases[t.p] = d2 - t.phi + pi;
        phases[t.q] = d2;
    }
    // u = D' L'_1 ⋯ L'_k R_r ⋯ R_1; `moved` holds L'_k first.
    let mut rotations: Vec<GivensRotation> = right;
    rotations.extend(moved);
    rotations.retain(|r| !r.is_identity());
    schedule(&mut rotations, n);
    for ph in phases.iter_mut() {
        *ph = normalize_angle(*ph);
    }
    Ok(GivensNetwork { n, rotations, phases })
}

fn normalize_angle(a: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let r = (a + pi).rem_euclid(2.0 * pi) - pi;
    if r.abs() < 1e-15 {
        0.0
    } else {
        r
    }
}

/// `exp((re + i·angle) n_p n_q)` for `p < q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChargeCoupling {
    pub p: usize,
    pub q: usize,
    pub angle: f64,
    #[serde(default)]
    pub re: f64,
    pub round: usize,
}

/// `exp((re + i·angle) n_p)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalTerm {
    pub p: usize,
    pub angle: f64,
    #[serde(default)]
    pub re: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Layer {
    Givens {
        rotations: Vec<GivensRotation>,
        phases: Vec<f64>,
    },
    Charge {
        couplings: Vec<ChargeCoupling>,
        /// Folded `J_pp` terms.
        local: Vec<LocalTerm>,
        rounds: usize,
    },
    Phase {
        phases: Vec<f64>,
    },
}

impl Layer {
    pub fn kind(&self) -> &'static str {
        match self {
            Layer::Givens { .. } => "givens",
            Layer::Charge { .. } => "charge",
            Layer::Phase { .. } => "phase",
        }
    }

    pub fn gate_count(&self) -> usize {
        match self {
            Layer::Givens { rotations, .. } => rotations.len(),
            Layer::Charge { couplings, .. } => couplings.len(),
            Layer::Phase { .. } => 0,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Layer::Givens { rotations, .. } => rotations.iter().map(|r| r.round + 1).max().unwrap_or(0),
            Layer::Charge { rounds, .. } => *rounds,
            Layer::Phase { .. } => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceStats {
    pub factor_index: usize,
    pub gate_count: usize,
    pub cumulative_depth: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitIR {
    pub version: u32,
    pub n: usize,
    pub layers: Vec<Layer>,
    pub gate_count: usize,
    pub depth: usize,
    pub slices: Vec<SliceStats>,
}

fn basis_layer(u: &CMat) -> Result<Layer> {
    let net = givens_decompose(u)?;
    Ok(if net.rotations.is_empty() {
        Layer::Phase { phases: net.phases }
    } else {
        Layer::Givens {
            rotations: net.rotations,
            phases: net.phases,
        }
    })
}

/// All `n(n−1)/2` couplings on an odd-even transposition network.
pub fn charge_layer(j: &CMat) -> Layer {
    let n = j.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    let mut couplings = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for round in 0..n {
        let mut k = round % 2;
        while k + 1 < n {
            let (a, b) = (order[k], order[k + 1]);
            let (p, q) = (a.min(b), a.max(b));
            let c = j[(p, q)] + j[(q, p)];
            couplings.push(ChargeCoupling { p, q, angle: c.im, re: c.re, round });
            order.swap(k, k + 1);
            k += 2;
        }
    }
    let local = (0..n)
        .map(|p| LocalTerm { p, angle: j[(p, p)].im, re: j[(p, p)].re })
        .collect();
    Layer::Charge {
        couplings,
        local,
        rounds: if n > 1 { n } else { 0 },
    }
}

/// Slices of the Trotter step: each carries a basis rotation and couplings.
struct Slice {
    mu: CMat,
    j: CMat,
    first_factor: usize,
}

fn slices(factors: &[SOSFactor], annotations: Option<&[AnnotatedFactor]>) -> Vec<Slice> {
    let mut out: Vec<Slice> = Vec::new();
    let mut k = 0;
    while k < factors.len() {
        let f = &factors[k];
        let group = annotations.and_then(|a| a.get(k)).and_then(|a| a.simultaneous_group);
        let partner = annotations.and_then(|a| a.get(k + 1));
        if let (Some(g), Some(next)) = (group, partner) {
            if next.simultaneous_group == Some(g) && next.sector != annotations.unwrap()[k].sector {
                // disjoint sectors commute: one rotation, summed couplings
                let other = &factors[k + 1];
                out.push(Slice {
                    mu: &f.mu * &other.mu,
                    j: &f.j + &other.j,
                    first_factor: k,
                });
                k += 2;
                continue;
            }
        }
        out.push(Slice {
            mu: f.mu.clone(),
            j: f.j.clone(),
            first_factor: k,
        });
        k += 1;
    }
    out
}

/// Builds the circuit for `e^{−S} e^{F_L} ⋯ e^{F_1}`.
///
/// With `merge`, adjacent basis changes collapse into `U_{l+1} U_l†`;
/// without it every slice keeps its own `U_l` and `U_l†`. Annotated factors
/// sharing a simultaneous group are placed in one slice.
pub fn merge_and_schedule(
    factors: &[SOSFactor],
    annotations: Option<&[AnnotatedFactor]>,
    one_body: Option<&OneBodyCorrection>,
    merge: bool,
) -> Result<CircuitIR> {
    let n = factors.first().map(|f| f.n()).or(one_body.map(|s| s.n())).unwrap_or(0);
    for (k, f) in factors.iter().enumerate() {
        if f.n() != n {
            return Err(Error::Factor {
                index: k,
                reason: format!("acts on {} modes, first factor on {n}", f.n()),
            });
        }
    }
    if let Some(a) = annotations {
        if a.len() != factors.len() {
            return Err(Error::Shape(format!(
                "{} annotations for {} factors",
                a.len(),
                factors.len()
            )));
        }
    }
    if let Some(s) = one_body {
        if s.n() != n {
            return Err(Error::Shape(format!("one-body correction over {} modes, factors over {n}", s.n())));
        }
    }
    let closing = one_body.map(|s| expm_antihermitian_or_general(&s.s.map(|z| -z)));

    let sl = slices(factors, annotations);
    let mut layers = Vec::new();
    let mut stats = Vec::new();
    let mut depth = 0;
    let mut prev: Option<CMat> = None; // U_{l-1}
    for (idx, s) in sl.iter().enumerate() {
        let u = s.mu.adjoint();
        let mut gates = 0;
        let mut slice_depth = 0;
        let mut push = |layer: Layer, layers: &mut Vec<Layer>| {
            gates += layer.gate_count();
            slice_depth += layer.depth();
            layers.push(layer);
        };
        let entering = match (&prev, merge) {
            (Some(p), true) => &u * p.adjoint(),
            _ => u.clone(),
        };
        push(basis_layer(&entering)?, &mut layers);
        push(charge_layer(&s.j), &mut layers);
        let last = idx + 1 == sl.len();
        if !merge || last {
            let mut leaving = u.adjoint();
            if last {
                if let Some(c) = &closing {
                    leaving = c * leaving;
                }
            }
            push(basis_layer(&leaving)?, &mut layers);
        }
        depth += slice_depth;
        stats.push(SliceStats {
            factor_index: s.first_factor + 1,
            gate_count: gates,
            cumulative_depth: depth,
        });
        prev = Some(u);
    }
    if sl.is_empty() {
        if let Some(c) = closing {
            let layer = basis_layer(&c)?;
            depth += layer.depth();
            layers.push(layer);
        }
    }
    let gate_count = layers.iter().map(Layer::gate_count).sum();
    Ok(CircuitIR {
        version: IR_VERSION,
        n,
        layers,
        gate_count,
        depth,
        slices: stats,
    })
}

fn expm_antihermitian_or_general(k: &CMat) -> CMat {
    let anti = crate::linalg::frob(&(k + k.adjoint()));
    if anti <= 1e-12 * crate::linalg::frob(k).max(1.0) {
        expm_antihermitian(k)
    } else {
        k.clone().exp()
    }
}

/// Single-particle matrix of a basis-change layer.
pub fn layer_unitary(layer: &Layer, n: usize) -> Option<CMat> {
    match layer {
        Layer::Givens { rotations, phases } => Some(
            GivensNetwork {
                n,
                rotations: rotations.clone(),
                phases: phases.clone(),
            }
            .unitary(),
        ),
        Layer::Phase { phases } => Some(CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            phases.iter().map(|p| C64::from_polar(1.0, *p)),
        ))),
        Layer::Charge { .. } => None,
    }
}

/// Fock-space operator of a whole circuit, layer by layer.
pub fn realize_ir(ir: &CircuitIR) -> Result<DenseOperator> {
    let n = ir.n;
    let mut op = DenseOperator::identity(n);
    for layer in &ir.layers {
        let step = match layer {
            Layer::Charge { couplings, local, .. } => {
                let mut g = vec![C64::new(0.0, 0.0); 1 << n];
                for (x, gx) in g.iter_mut().enumerate() {
                    for c in couplings {
                        if x >> c.p & 1 == 1 && x >> c.q & 1 == 1 {
                            *gx += C64::new(c.re, c.angle);
                        }
                    }
                    for t in local {
                        if x >> t.p & 1 == 1 {
                            *gx += C64::new(t.re, t.angle);
                        }
                    }
                }
                let mut d = DenseOperator::zeros(n);
                for (x, gx) in g.into_iter().enumerate() {
                    d.mat[(x, x)] = gx.exp();
                }
                d
            }
            other => {
                let u = layer_unitary(other, n).expect("basis layer");
                fock_rotation(&u)?
            }
        };
        op = step.mul(&op);
    }
    Ok(op)
}
