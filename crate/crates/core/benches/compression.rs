//! Throughput of the data-parallel kernels.
//!
//! Group names carry the build mode, so running once with default features
//! and once with `--no-default-features` gives directly comparable reports.
//! The parallel build additionally times each kernel inside a one-thread
//! rayon pool.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sos_core::compression::{greedy_compress, value_and_gradient, CompressionConfig, InitMode, KappaParams};
use sos_core::decompositions::{prepare_generator, takagi_sos_tensor};
use sos_core::fock::{verify_factorization, VerifyMode};
use sos_core::tensor::{project_antihermitian, reconstruct, transform4, CoeffTensor4, Convention};
use sos_core::linalg::random_unitary;
use sos_core::C64;

#[cfg(feature = "parallel")]
const MODE: &str = "parallel";
#[cfg(not(feature = "parallel"))]
const MODE: &str = "sequential";

fn generator(n: usize, seed: u64) -> (CoeffTensor4, CoeffTensor4) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = CoeffTensor4::from_fn(n, Convention::PqrsLadder, |_, _, _, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let ladder = project_antihermitian(&raw);
    let x = prepare_generator(&ladder).unwrap().0;
    (ladder, x)
}

/// Runs `f` as-is and, in the parallel build, also on a single rayon thread.
fn modes(c: &mut Criterion, name: &str, sizes: &[usize], mut f: impl FnMut(usize) -> Box<dyn FnMut() + Send>) {
    let mut g = c.benchmark_group(format!("{name}/{MODE}"));
    g.sample_size(10);
    for &n in sizes {
        let mut run = f(n);
        g.bench_function(BenchmarkId::new("threads-all", n), |b| b.iter(&mut run));
        #[cfg(feature = "parallel")]
        {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
            g.bench_function(BenchmarkId::new("threads-1", n), |b| b.iter(|| pool.install(&mut run)));
        }
    }
    g.finish();
}

fn kernels(c: &mut Criterion) {
    modes(c, "transform4", &[8, 12], |n| {
        let (_, x) = generator(n, 1);
        let u = random_unitary(n, &mut ChaCha8Rng::seed_from_u64(2));
        Box::new(move || {
            std::hint::black_box(transform4(&x, &u));
        })
    });
    modes(c, "gradient", &[8, 12], |n| {
        let (_, x) = generator(n, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let kappa = KappaParams::from_vec(n, (0..n * n).map(|_| rng.gen_range(-0.1..0.1)).collect()).unwrap();
        Box::new(move || {
            std::hint::black_box(value_and_gradient(&x, &kappa).unwrap());
        })
    });
    modes(c, "takagi_reconstruct", &[6, 8], |n| {
        let (_, x) = generator(n, 5);
        Box::new(move || {
            let fs = takagi_sos_tensor(&x, None).unwrap();
            std::hint::black_box(reconstruct(n, &fs).unwrap());
        })
    });
    modes(c, "greedy_3_factors", &[6], |n| {
        let (_, x) = generator(n, 6);
        let cfg = CompressionConfig {
            max_factors: 3,
            restarts: 1,
            init: InitMode::TakagiSeed,
            track_rank: false,
            ..Default::default()
        };
        Box::new(move || {
            std::hint::black_box(greedy_compress(&x, &cfg).unwrap());
        })
    });
    modes(c, "oracle_verify", &[6, 8], |n| {
        let (ladder, x) = generator(n, 7);
        let (_, s) = prepare_generator(&ladder).unwrap();
        let fs = takagi_sos_tensor(&x, None).unwrap();
        Box::new(move || {
            std::hint::black_box(verify_factorization(&ladder, Some(&s), &fs, VerifyMode::ExactSum).unwrap());
        })
    });
}

criterion_group!(benches, kernels);
criterion_main!(benches);
