//! FTEN tensor files and factor-list JSON.
//!
//! JSON tensors carry `version`, `order`, `dims`, `layout`, `convention`,
//! `dtype` and interleaved `data`. Order-2 arrays use the convention
//! `"matrix"`. Binary files start with the magic `FTENBIN1`, then a
//! little-endian `u32` order, the `u32` dims, and interleaved `f64` data;
//! they carry no convention, so readers supply one.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::linalg::CMat;
use crate::spin::{AnnotatedFactor, Sector};
use crate::tensor::{Convention, CoeffTensor4, FactorOrigin, SOSFactor};
use crate::{Error, Result, C64};

pub const FTEN_VERSION: u32 = 1;
pub const BIN_MAGIC: &[u8; 8] = b"FTENBIN1";
const MATRIX_CONVENTION: &str = "matrix";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FtenDoc {
    pub version: u32,
    pub order: u32,
    pub dims: Vec<usize>,
    pub layout: String,
    pub convention: String,
    pub dtype: String,
    pub data: Vec<f64>,
}

fn interleave(data: &[C64]) -> Vec<f64> {
    data.iter().flat_map(|z| [z.re, z.im]).collect()
}

fn deinterleave(data: &[f64]) -> Vec<C64> {
    data.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect()
}

impl FtenDoc {
    pub fn from_tensor(t: &CoeffTensor4) -> Self {
        let n = t.n();
        Self {
            version: FTEN_VERSION,
            order: 4,
            dims: vec![n; 4],
            layout: "row-major".into(),
            convention: t.convention().as_str().into(),
            dtype: "complex128".into(),
            data: interleave(t.data()),
        }
    }

    pub fn from_matrix(m: &CMat) -> Self {
        let row_major: Vec<C64> = m.transpose().iter().copied().collect();
        Self {
            version: FTEN_VERSION,
            order: 2,
            dims: vec![m.nrows(), m.ncols()],
            layout: "row-major".into(),
            convention: MATRIX_CONVENTION.into(),
            dtype: "complex128".into(),
            data: interleave(&row_major),
        }
    }

    fn validate(&self, order: u32) -> Result<usize> {
        if self.version != FTEN_VERSION {
            return Err(Error::Format(format!("unsupported FTEN version {}", self.version)));
        }
        if self.order != order || self.dims.len() != order as usize {
            return Err(Error::Format(format!(
                "expected order {order}, got order {} with dims {:?}",
                self.order, self.dims
            )));
        }
        if self.layout != "row-major" {
            return Err(Error::Format(format!("unsupported layout {:?}", self.layout)));
        }
        if self.dtype != "complex128" {
            return Err(Error::Format(format!("unsupported dtype {:?}", self.dtype)));
        }
        let count: usize = self.dims.iter().product();
        if self.data.len() != 2 * count {
            return Err(Error::Format(format!(
                "{} floats for {} complex entries",
                self.data.len(),
                count
            )));
        }
        Ok(count)
    }

    pub fn to_tensor(&self) -> Result<CoeffTensor4> {
        self.validate(4)?;
        let n = self.dims[0];
        if self.dims.iter().any(|&d| d != n) {
            return Err(Error::Format(format!("non-cubic dims {:?}", self.dims)));
        }
        let conv: Convention = self.convention.parse()?;
        CoeffTensor4::from_vec(n, conv, deinterleave(&self.data))
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        self.validate(2)?;
        if self.convention != MATRIX_CONVENTION {
            return Err(Error::Format(format!(
                "order-2 array with convention {:?}",
                self.convention
            )));
        }
        Ok(CMat::from_row_slice(self.dims[0], self.dims[1], &deinterleave(&self.data)))
    }
}

pub fn write_tensor_json(path: &Path, t: &CoeffTensor4) -> Result<()> {
    fs::write(path, serde_json::to_vec(&FtenDoc::from_tensor(t))?)?;
    Ok(())
}

pub fn write_matrix_json(path: &Path, m: &CMat) -> Result<()> {
    fs::write(path, serde_json::to_vec(&FtenDoc::from_matrix(m))?)?;
    Ok(())
}

pub fn write_tensor_bin(path: &Path, t: &CoeffTensor4) -> Result<()> {
    fs::write(path, encode_bin(&[t.n(); 4], t.data()))?;
    Ok(())
}

fn encode_bin(dims: &[usize], data: &[C64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 4 * dims.len() + 16 * data.len());
    out.extend_from_slice(BIN_MAGIC);
    out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for &d in dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for z in data {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

fn decode_bin(bytes: &[u8]) -> Result<(Vec<usize>, Vec<C64>)> {
    let short = || Error::Format("truncated binary FTEN file".into());
    let word = |at: usize| -> Result<u32> {
        let b = bytes.get(at..at + 4).ok_or_else(short)?;
        Ok(u32::from_le_bytes(b.try_into().unwrap()))
    };
    let order = word(8)? as usize;
    if order != 2 && order != 4 {
        return Err(Error::Format(format!("binary FTEN of order {order}")));
    }
    let dims: Vec<usize> = (0..order).map(|k| word(12 + 4 * k).map(|d| d as usize)).collect::<Result<_>>()?;
    let start = 12 + 4 * order;
    let count: usize = dims.iter().product();
    let body = &bytes[start.min(bytes.len())..];
    if body.len() != 16 * count {
        return Err(Error::Format(format!(
            "binary body has {} bytes for {count} complex entries",
            body.len()
        )));
    }
    let data = body
        .chunks_exact(16)
        .map(|c| {
            C64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Ok((dims, data))
}

/// Reads a rank-4 FTEN file, JSON or binary.
///
/// `convention` is required for binary input; for JSON input it is checked
/// against the file when given.
pub fn read_tensor(path: &Path, convention: Option<Convention>) -> Result<CoeffTensor4> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(BIN_MAGIC) {
        let conv = convention.ok_or_else(|| {
            Error::Format(format!("{}: binary FTEN needs an explicit convention", path.display()))
        })?;
        let (dims, data) = decode_bin(&bytes)?;
        if dims.len() != 4 || dims.iter().any(|&d| d != dims[0]) {
            return Err(Error::Format(format!("expected cubic order-4 dims, got {dims:?}")));
        }
        return CoeffTensor4::from_vec(dims[0], conv, data);
    }
    let doc: FtenDoc = serde_json::from_slice(&bytes)?;
    let t = doc.to_tensor()?;
    if let Some(c) = convention {
        t.expect(c)?;
    }
    Ok(t)
}

/// Reads an order-2 FTEN file, JSON or binary.
pub fn read_matrix(path: &Path) -> Result<CMat> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(BIN_MAGIC) {
        let (dims, data) = decode_bin(&bytes)?;
        if dims.len() != 2 {
            return Err(Error::Format(format!("expected order 2, got dims {dims:?}")));
        }
        return Ok(CMat::from_row_slice(dims[0], dims[1], &data));
    }
    let doc: FtenDoc = serde_json::from_slice(&bytes)?;
    doc.to_matrix()
}

/// One entry of a factor-list file. The weight is already absorbed into `J`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorRecord {
    pub mu: FtenDoc,
    #[serde(rename = "J")]
    pub j: FtenDoc,
    pub tag: FactorOrigin,
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sector: Option<Sector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simultaneous_group: Option<usize>,
    #[serde(default)]
    pub real: bool,
}

impl FactorRecord {
    pub fn from_factor(f: &SOSFactor, annotation: Option<&AnnotatedFactor>) -> Self {
        let real = f.mu.iter().chain(f.j.iter()).all(|z| z.im == 0.0);
        Self {
            mu: FtenDoc::from_matrix(&f.mu),
            j: FtenDoc::from_matrix(&f.j),
            tag: f.origin,
            weight: 1.0,
            sector: annotation.map(|a| a.sector),
            simultaneous_group: annotation.and_then(|a| a.simultaneous_group),
            real,
        }
    }

    pub fn to_factor(&self) -> Result<SOSFactor> {
        let mu = self.mu.to_matrix()?;
        let j = self.j.to_matrix()? * C64::new(self.weight, 0.0);
        SOSFactor::new(mu, j, self.tag)
    }
}

pub struct FactorList {
    pub factors: Vec<SOSFactor>,
    /// Present when every record carries a sector.
    pub annotations: Option<Vec<AnnotatedFactor>>,
}

pub fn factors_to_json(factors: &[SOSFactor], annotations: Option<&[AnnotatedFactor]>) -> Result<String> {
    let records: Vec<FactorRecord> = factors
        .iter()
        .enumerate()
        .map(|(k, f)| FactorRecord::from_factor(f, annotations.and_then(|a| a.get(k))))
        .collect();
    Ok(serde_json::to_string_pretty(&records)?)
}

pub fn factors_from_json(text: &str) -> Result<FactorList> {
    let records: Vec<FactorRecord> = serde_json::from_str(text)?;
    let mut factors = Vec::with_capacity(records.len());
    for (k, r) in records.iter().enumerate() {
        let f = r.to_factor().map_err(|e| Error::Factor {
            index: k,
            reason: e.to_string(),
        })?;
        if let Some(first) = factors.first().map(SOSFactor::n) {
            if f.n() != first {
                return Err(Error::Factor {
                    index: k,
                    reason: format!("acts on {} modes, first factor on {first}", f.n()),
                });
            }
        }
        factors.push(f);
    }
    let annotations = if !records.is_empty() && records.iter().all(|r| r.sector.is_some()) {
        Some(
            records
                .iter()
                .zip(&factors)
                .map(|(r, f)| AnnotatedFactor {
                    factor: f.clone(),
                    sector: r.sector.unwrap(),
                    simultaneous_group: r.simultaneous_group,
                })
                .collect(),
        )
    } else {
        None
    };
    Ok(FactorList { factors, annotations })
}

pub fn write_factors(path: &Path, factors: &[SOSFactor], annotations: Option<&[AnnotatedFactor]>) -> Result<()> {
    fs::write(path, factors_to_json(factors, annotations)?)?;
    Ok(())
}

pub fn read_factors(path: &Path) -> Result<FactorList> {
    factors_from_json(&fs::read_to_string(path)?)
}
