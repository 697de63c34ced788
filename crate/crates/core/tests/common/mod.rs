#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sos_core::compression::KappaParams;
use sos_core::decompositions::prepare_generator;
use sos_core::linalg::{random_complex, random_unitary, CMat, I};
use sos_core::tensor::{
    amplitudes_from_generator, cc_doubles_energy, project_antihermitian, CoeffTensor4, Convention,
    FactorOrigin, OneBodyCorrection, SOSFactor,
};
use sos_core::C64;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn random_ladder(n: usize, rng: &mut ChaCha8Rng) -> CoeffTensor4 {
    let raw = CoeffTensor4::from_fn(n, Convention::PqrsLadder, |_, _, _, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    project_antihermitian(&raw)
}

/// Antihermitian ladder tensor conserving Sz, spin-orbital `2p + σ`.
pub fn random_sz_ladder(m: usize, rng: &mut ChaCha8Rng) -> CoeffTensor4 {
    let raw = CoeffTensor4::from_fn(2 * m, Convention::PqrsLadder, |p, q, r, s| {
        let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if p % 2 + q % 2 == r % 2 + s % 2 {
            z
        } else {
            C64::new(0.0, 0.0)
        }
    });
    project_antihermitian(&raw)
}

/// Pair-symmetric antihermitian charge-charge generator.
pub fn random_generator(n: usize, rng: &mut ChaCha8Rng) -> CoeffTensor4 {
    prepare_generator(&random_ladder(n, rng)).unwrap().0
}

pub fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let g = random_complex(n, n, rng);
    (&g + g.transpose()).scale(0.5)
}

pub fn random_factor(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> SOSFactor {
    let mu = random_unitary(n, rng);
    let j = random_symmetric(n, rng).scale(scale);
    SOSFactor::new(mu, j, FactorOrigin::Uc).unwrap()
}

/// Factor with imaginary `J`, so `e^F` is unitary.
pub fn random_unitary_factor(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> SOSFactor {
    let mu = random_unitary(n, rng);
    let j = random_symmetric(n, rng).map(|z| I * z.re * scale);
    SOSFactor::new(mu, j, FactorOrigin::Uc).unwrap()
}

pub fn random_one_body(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> OneBodyCorrection {
    let g = random_complex(n, n, rng);
    OneBodyCorrection {
        s: (&g - g.adjoint()).scale(0.5 * scale),
    }
}

pub fn random_kappa(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> KappaParams {
    KappaParams::from_vec(n, (0..n * n).map(|_| scale * rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

/// Parameters of an antihermitian matrix in the [`KappaParams`] layout.
pub fn params_of(k: &CMat) -> KappaParams {
    let n = k.nrows();
    let mut re = Vec::new();
    let mut im = Vec::new();
    for p in 0..n {
        for q in p + 1..n {
            re.push(k[(p, q)].re);
            im.push(k[(p, q)].im);
        }
    }
    let diag = (0..n).map(|p| k[(p, p)].im);
    KappaParams::from_vec(n, re.into_iter().chain(im).chain(diag).collect()).unwrap()
}

/// `κ = V diag(iω) V†` for a random unitary `V`.
pub fn kappa_with_spectrum(omega: &[f64], rng: &mut ChaCha8Rng) -> KappaParams {
    let n = omega.len();
    let v = random_unitary(n, rng);
    let d = CMat::from_diagonal(&DVector::from_iterator(n, omega.iter().map(|w| I * *w)));
    let k = &v * d * v.adjoint();
    params_of(&((&k - k.adjoint()).scale(0.5)))
}

pub fn doubles_energy(x: &CoeffTensor4, v: &CoeffTensor4) -> f64 {
    cc_doubles_energy(&amplitudes_from_generator(x).unwrap(), v).unwrap()
}

pub fn meta(name: &str) -> serde_json::Value {
    let text = std::fs::read_to_string(fixture(&format!("{name}.meta.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}
