use std::path::{Path, PathBuf};

use anyhow::Result;
use serde::Serialize;
use sos_core::compression::{CompressionConfig, StopReason};
use sos_core::fock::Verification;
use sos_core::tensor::{amplitudes_from_generator, cc_doubles_energy, residual_metrics, CoeffTensor4, Convention, SOSFactor};

use crate::Method;

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub factor_index: usize,
    pub residual_l2: f64,
    pub residual_mad: f64,
    pub residual_takagi_rank: usize,
    pub objective: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cum_cc_energy_error: Option<f64>,
}

/// One row per factor prefix: residual of `target − Σ_{l≤k} F_l`.
///
/// The objective column is `‖J_k‖²_F`, the weight the factor removes.
pub fn rows(target: &CoeffTensor4, factors: &[SOSFactor], energy: Option<&CoeffTensor4>) -> Result<Vec<Row>> {
    let exact = match energy {
        Some(v) => Some(doubles_energy(target, v)?),
        None => None,
    };
    let mut approx = CoeffTensor4::zeros(target.n(), Convention::ChargeCharge);
    let mut out = Vec::with_capacity(factors.len());
    for (k, f) in factors.iter().enumerate() {
        for (a, b) in approx.data_mut().iter_mut().zip(f.tensor().data()) {
            *a += b;
        }
        let m = residual_metrics(target, &approx)?;
        let cum_cc_energy_error = match (energy, exact) {
            (Some(v), Some(e)) => Some((doubles_energy(&approx, v)? - e).abs()),
            _ => None,
        };
        out.push(Row {
            factor_index: k + 1,
            residual_l2: m.l2,
            residual_mad: m.mad,
            residual_takagi_rank: m.takagi_rank,
            objective: f.j.norm_squared(),
            cum_cc_energy_error,
        });
    }
    Ok(out)
}

fn doubles_energy(x: &CoeffTensor4, v: &CoeffTensor4) -> Result<f64> {
    Ok(cc_doubles_energy(&amplitudes_from_generator(x)?, v)?)
}

pub fn write_csv(path: &Path, rows: &[Row], with_energy: bool) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["factor_index", "residual_l2", "residual_mad", "residual_takagi_rank", "objective"];
    if with_energy {
        header.push("cum_cc_energy_error");
    }
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.factor_index.to_string(),
            format!("{:e}", r.residual_l2),
            format!("{:e}", r.residual_mad),
            r.residual_takagi_rank.to_string(),
            format!("{:e}", r.objective),
        ];
        if with_energy {
            rec.push(r.cum_cc_energy_error.map(|e| format!("{e:e}")).unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct Artifacts {
    pub factors: PathBuf,
    pub report: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub one_body: Option<PathBuf>,
    pub manifest: PathBuf,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub input: PathBuf,
    pub method: Method,
    pub sz_adapted: bool,
    pub config: CompressionConfig,
    pub seed: u64,
    pub initial_l2: f64,
    pub stop: Option<StopReason>,
    pub rows: Vec<Row>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<Verification>,
    pub artifacts: Artifacts,
    pub library_version: &'static str,
}
