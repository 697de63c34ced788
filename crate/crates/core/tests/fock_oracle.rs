mod common;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sos_core::decompositions::{prepare_generator, svd_sos_tensor, takagi_sos_tensor};
use sos_core::fock::{build_two_body, exp_operator, trotter_product, verify_factorization, VerifyMode};
use sos_core::tensor::OneBodyCorrection;
use sos_core::C64;

#[test]
fn analytical_factors_verify_against_the_ladder_operator() {
    for n in [3, 4, 5] {
        let a = random_ladder(n, &mut ChaCha8Rng::seed_from_u64(n as u64));
        let (x, s) = prepare_generator(&a).unwrap();
        for fs in [takagi_sos_tensor(&x, None).unwrap(), svd_sos_tensor(&x).unwrap()] {
            let v = verify_factorization(&a, Some(&s), &fs, VerifyMode::ExactSum).unwrap();
            assert!(v.op_error < 1e-10, "n={n}: {}", v.op_error);
            assert!(v.trotter_error.is_none());
        }
    }
}

#[test]
fn trotter_error_is_second_order() {
    // ‖e^{εG} − Π e^{εF_l}‖ = O(ε²), so halving ε quarters the error
    let n = 4;
    let a = random_ladder(n, &mut ChaCha8Rng::seed_from_u64(21));
    let (x, s) = prepare_generator(&a).unwrap();
    let fs = takagi_sos_tensor(&x, None).unwrap();
    let g = build_two_body(&a, None).unwrap();
    let err = |eps: f64| {
        let scaled: Vec<_> = fs.iter().map(|f| {
            let mut f = f.clone();
            f.j = f.j.scale(eps);
            f
        }).collect();
        let s_eps = OneBodyCorrection { s: s.s.scale(eps) };
        let exact = exp_operator(&g.scale(C64::new(eps, 0.0)));
        exact.sub(&trotter_product(n, Some(&s_eps), &scaled).unwrap()).norm2()
    };
    let (e1, e2) = (err(0.02), err(0.01));
    let ratio = e1 / e2;
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}
