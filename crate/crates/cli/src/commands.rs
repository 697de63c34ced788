use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use sos_core::circuit::merge_and_schedule;
use sos_core::compression::{greedy_compress, CompressionConfig, InitMode, StopReason};
use sos_core::decompositions::{prepare_generator, svd_sos_tensor, takagi_sos_tensor};
use sos_core::eri::{cholesky_baseline, compress_eri, HermitianERITensor};
use sos_core::fock::{verify_factorization, VerifyMode};
use sos_core::io::{read_factors, read_matrix, read_tensor, write_factors, write_matrix_json};
use sos_core::spin::{decompose_blocked, partition_by_sz, AnnotatedFactor, BlockMethod};
use sos_core::tensor::{symmetrize_pairs, CoeffTensor4, Convention, OneBodyCorrection, SOSFactor};

use crate::report::{rows, write_csv, Artifacts, RunManifest};
use crate::{CompileArgs, DecomposeArgs, Method, VerifyArgs};

const EXIT_OK: u8 = 0;
const EXIT_FAIL: u8 = 1;
const EXIT_MAX_FACTORS: u8 = 2;

fn config_from(args: &DecomposeArgs) -> Result<CompressionConfig> {
    let mut cfg = match &args.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => CompressionConfig::default(),
    };
    if let Some(t) = args.threshold {
        cfg.threshold = t;
    }
    if let Some(m) = args.max_factors {
        cfg.max_factors = m;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(r) = args.restarts {
        cfg.restarts = r;
    }
    match (args.method, args.init) {
        (Method::UcTakagi, Some(crate::Init::Random)) => bail!("uc-takagi always starts from the Takagi seed"),
        (Method::UcTakagi, _) => cfg.init = InitMode::TakagiSeed,
        (Method::Uc, None) if args.config.is_none() => cfg.init = InitMode::Random,
        (_, Some(i)) => cfg.init = i.into(),
        _ => {}
    }
    Ok(cfg)
}

/// Generator in pair-symmetric charge-charge form and the one-body term
/// such that the input operator equals `X̂ − Ŝ`.
fn charge_charge_form(t: &CoeffTensor4) -> Result<(CoeffTensor4, OneBodyCorrection)> {
    Ok(match t.convention() {
        Convention::PqrsLadder => prepare_generator(t)?,
        Convention::ChargeCharge => symmetrize_pairs(t)?,
        Convention::HermitianChemist => bail!("hermitian-chemist tensors have no one-body reordering"),
    })
}

struct Outcome {
    target: CoeffTensor4,
    factors: Vec<SOSFactor>,
    annotations: Option<Vec<AnnotatedFactor>>,
    one_body: Option<OneBodyCorrection>,
    initial_l2: f64,
    /// Set by the greedy methods; the analytical ones are judged on the final residual.
    stop: Option<StopReason>,
}

fn run_method(input: &CoeffTensor4, args: &DecomposeArgs, cfg: &CompressionConfig) -> Result<Outcome> {
    if input.convention() == Convention::HermitianChemist {
        if args.sz_adapted {
            bail!("--sz-adapted applies to spin-orbital tensors only");
        }
        let v = HermitianERITensor::new(input.clone())?;
        let (factors, stop) = match args.method {
            Method::Cholesky => (cholesky_baseline(&v, args.max_factors)?, None),
            Method::Uc | Method::UcTakagi => {
                let c = compress_eri(&v, cfg)?;
                (c.factors, c.report.stop)
            }
            m => bail!("method {m:?} needs a spin-orbital tensor; use cholesky or uc for integrals"),
        };
        return Ok(Outcome {
            initial_l2: input.norm(),
            target: input.clone(),
            factors,
            annotations: None,
            one_body: None,
            stop,
        });
    }
    if args.method == Method::Cholesky {
        bail!("cholesky needs a hermitian-chemist integral tensor");
    }
    let (x, s) = charge_charge_form(input)?;
    if args.sz_adapted {
        let (blocks, ds) = partition_by_sz(&x)?;
        let method = match args.method {
            Method::Takagi => BlockMethod::Takagi,
            Method::Svd => BlockMethod::Svd,
            _ => BlockMethod::Uc,
        };
        let out = decompose_blocked(&blocks, method, cfg)?;
        let stop = if method == BlockMethod::Uc {
            let all_met = out.reports.iter().all(|(_, r)| r.stop == Some(StopReason::ThresholdMet));
            Some(if all_met { StopReason::ThresholdMet } else { StopReason::MaxFactors })
        } else {
            None
        };
        let target = blocks.to_tensor();
        return Ok(Outcome {
            initial_l2: target.norm(),
            target,
            factors: out.factors.iter().map(|a| a.factor.clone()).collect(),
            annotations: Some(out.factors),
            one_body: Some(s.add(&ds)),
            stop,
        });
    }
    let (factors, stop) = match args.method {
        Method::Takagi => (takagi_sos_tensor(&x, args.max_factors)?, None),
        Method::Svd => {
            let mut fs = svd_sos_tensor(&x)?;
            if let Some(m) = args.max_factors {
                fs.truncate(m);
            }
            (fs, None)
        }
        _ => {
            let c = greedy_compress(&x, cfg)?;
            (c.factors, c.report.stop)
        }
    };
    Ok(Outcome {
        initial_l2: x.norm(),
        target: x,
        factors,
        annotations: None,
        one_body: Some(s),
        stop,
    })
}

pub fn decompose(args: &DecomposeArgs) -> Result<u8> {
    let cfg = config_from(args)?;
    let input = read_tensor(&args.input, args.convention)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let energy = match &args.energy_fixture {
        Some(p) if input.convention() == Convention::HermitianChemist => {
            bail!("--energy-fixture {} needs amplitude input", p.display())
        }
        Some(p) => Some(read_tensor(p, None).with_context(|| format!("reading {}", p.display()))?),
        None => None,
    };
    let out = run_method(&input, args, &cfg)?;
    let report_rows = rows(&out.target, &out.factors, energy.as_ref())?;

    let verification = if args.verify {
        let v = verify_factorization(&input, out.one_body.as_ref(), &out.factors, VerifyMode::ExactSum)?;
        println!("op_error {:.3e}", v.op_error);
        Some(v)
    } else {
        None
    };

    fs::create_dir_all(&args.out_dir)?;
    let artifacts = Artifacts {
        factors: args.out_dir.join("factors.json"),
        report: args.out_dir.join("report.csv"),
        one_body: out.one_body.as_ref().map(|_| args.out_dir.join("one_body.json")),
        manifest: args.out_dir.join("manifest.json"),
    };
    write_factors(&artifacts.factors, &out.factors, out.annotations.as_deref())?;
    if let (Some(path), Some(s)) = (&artifacts.one_body, &out.one_body) {
        write_matrix_json(path, &s.s)?;
    }
    write_csv(&artifacts.report, &report_rows, energy.is_some())?;

    let final_l2 = report_rows.last().map_or(out.initial_l2, |r| r.residual_l2);
    let met = match out.stop {
        Some(stop) => stop == StopReason::ThresholdMet,
        None => final_l2 < cfg.threshold,
    };
    let code = match (verification, args.tol) {
        (Some(v), Some(tol)) if v.op_error > tol => {
            eprintln!("operator error {:.3e} exceeds --tol {tol:e}", v.op_error);
            EXIT_FAIL
        }
        _ if met => EXIT_OK,
        _ => EXIT_MAX_FACTORS,
    };
    let manifest = RunManifest {
        input: args.input.clone(),
        method: args.method,
        sz_adapted: args.sz_adapted,
        seed: cfg.seed,
        config: cfg,
        initial_l2: out.initial_l2,
        stop: out.stop,
        rows: report_rows,
        verification,
        artifacts,
        library_version: sos_core::VERSION,
    };
    fs::write(&manifest.artifacts.manifest, serde_json::to_string_pretty(&manifest)?)?;
    println!(
        "{} factors, residual l2 {:.3e} ({})",
        out.factors.len(),
        final_l2,
        if met { "threshold met" } else { "threshold not met" }
    );
    Ok(code)
}

pub fn compile(args: &CompileArgs) -> Result<u8> {
    let list = read_factors(&args.factors).with_context(|| format!("reading {}", args.factors.display()))?;
    let one_body = read_one_body(args.one_body.as_deref())?;
    let ir = merge_and_schedule(&list.factors, list.annotations.as_deref(), one_body.as_ref(), !args.no_merge)?;
    fs::create_dir_all(&args.out_dir)?;
    fs::write(args.out_dir.join("circuit.json"), serde_json::to_string_pretty(&ir)?)?;
    let mut w = csv::Writer::from_path(args.out_dir.join("circuit_stats.csv"))?;
    for s in &ir.slices {
        w.serialize(s)?;
    }
    w.flush()?;
    println!("{} layers, {} gates, depth {}", ir.layers.len(), ir.gate_count, ir.depth);
    Ok(EXIT_OK)
}

fn read_one_body(path: Option<&Path>) -> Result<Option<OneBodyCorrection>> {
    path.map(|p| {
        let s = read_matrix(p).with_context(|| format!("reading {}", p.display()))?;
        Ok(OneBodyCorrection { s })
    })
    .transpose()
}

pub fn oracle_verify(args: &VerifyArgs) -> Result<u8> {
    let t = read_tensor(&args.tensor, args.convention).with_context(|| format!("reading {}", args.tensor.display()))?;
    let list = read_factors(&args.factors).with_context(|| format!("reading {}", args.factors.display()))?;
    let one_body = match read_one_body(args.one_body.as_deref())? {
        Some(s) => Some(s),
        None if t.convention() == Convention::HermitianChemist => None,
        None => Some(charge_charge_form(&t)?.1),
    };
    let v = verify_factorization(&t, one_body.as_ref(), &list.factors, args.mode)?;
    println!("op_error {:e}", v.op_error);
    if let Some(e) = v.trotter_error {
        println!("trotter_error {e:e}");
    }
    Ok(if v.op_error < args.tol { EXIT_OK } else { EXIT_FAIL })
}
