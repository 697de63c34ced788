mod common;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sos_core::circuit::{merge_and_schedule, realize_ir, CircuitIR, IR_VERSION};
use sos_core::decompositions::takagi_sos_tensor;
use sos_core::fock::trotter_product;

#[test]
fn one_factor_compiles_to_three_layers() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = random_unitary_factor(4, 0.4, &mut rng);
    let ir = merge_and_schedule(&[f], None, None, true).unwrap();
    let kinds: Vec<&str> = ir.layers.iter().map(|l| l.kind()).collect();
    assert_eq!(kinds.len(), 3, "{kinds:?}");
    assert_eq!(kinds[1], "charge");
    assert_eq!(ir.version, IR_VERSION);
    assert_eq!(ir.slices.len(), 1);
}

#[test]
fn merging_saves_basis_layers_and_keeps_the_unitary() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 5;
    let fs: Vec<_> = (0..3).map(|_| random_unitary_factor(n, 0.3, &mut rng)).collect();
    let s = random_one_body(n, 0.2, &mut rng);
    let merged = merge_and_schedule(&fs, None, Some(&s), true).unwrap();
    let split = merge_and_schedule(&fs, None, Some(&s), false).unwrap();
    assert!(merged.layers.len() < split.layers.len());
    assert!(merged.gate_count <= split.gate_count);
    let want = trotter_product(n, Some(&s), &fs).unwrap();
    for ir in [&merged, &split] {
        assert!(realize_ir(ir).unwrap().sub(&want).norm2() < 1e-10);
    }
    let depths: Vec<usize> = merged.slices.iter().map(|s| s.cumulative_depth).collect();
    assert!(depths.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn ir_json_roundtrips_and_realizes_takagi_factors() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 4;
    let x = random_generator(n, &mut rng);
    let fs = takagi_sos_tensor(&x, None).unwrap();
    let ir = merge_and_schedule(&fs, None, None, true).unwrap();
    let back: CircuitIR = serde_json::from_str(&serde_json::to_string(&ir).unwrap()).unwrap();
    assert_eq!(back, ir);
    let want = trotter_product(n, None, &fs).unwrap();
    let got = realize_ir(&back).unwrap();
    assert!(got.sub(&want).norm2() < 1e-10 * want.norm2().max(1.0));
}
