//! Ideal-membership certificates, re-checkable by multiplication alone.

use serde::{Deserialize, Serialize};

use crate::error::{config, parse_err, Error, Result};
use crate::series::{SeriesDoc, TruncatedSeries};

pub const CERTIFICATE_FORMAT_VERSION: u32 = 1;

/// Witness that `target ≡ Σ h_j·g_j` modulo terms of x-degree above `d_eff`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MembershipCertificate {
    pub target: TruncatedSeries,
    pub generators: Vec<TruncatedSeries>,
    pub multipliers: Vec<TruncatedSeries>,
    pub d_eff: u32,
}

impl MembershipCertificate {
    pub fn new(target: TruncatedSeries, generators: Vec<TruncatedSeries>, multipliers: Vec<TruncatedSeries>, d_eff: u32) -> Result<Self> {
        if generators.len() != multipliers.len() {
            return config("one multiplier per generator is required");
        }
        let ctx = target.ctx();
        if generators.iter().chain(&multipliers).any(|s| s.ctx() != ctx) {
            return config("certificate series live in different contexts");
        }
        if d_eff > ctx.trunc() {
            return config(format!("effective cutoff {d_eff} exceeds the truncation {}", ctx.trunc()));
        }
        Ok(MembershipCertificate { target, generators, multipliers, d_eff })
    }

    /// `target − Σ h_j·g_j`.
    pub fn residual(&self) -> TruncatedSeries {
        let mut r = self.target.clone();
        for (h, g) in self.multipliers.iter().zip(&self.generators) {
            r = r.minus(&h.times(g));
        }
        r
    }

    /// True when the residual has no term of x-degree `≤ d_eff`.
    pub fn recheck(&self) -> bool {
        self.residual().order().map_or(true, |o| o > self.d_eff)
    }

    pub fn to_doc(&self) -> CertificateDoc {
        CertificateDoc {
            format_version: CERTIFICATE_FORMAT_VERSION,
            d_eff: self.d_eff,
            target: self.target.to_doc(),
            generators: self.generators.iter().map(TruncatedSeries::to_doc).collect(),
            multipliers: self.multipliers.iter().map(TruncatedSeries::to_doc).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("certificate documents always serialize")
    }

    pub fn from_doc(doc: &CertificateDoc) -> Result<Self> {
        if doc.format_version != CERTIFICATE_FORMAT_VERSION {
            return parse_err(format!("unsupported certificate version {}", doc.format_version));
        }
        let target = TruncatedSeries::from_doc(&doc.target)?;
        let ctx = target.ctx().clone();
        let read =
            |docs: &[SeriesDoc]| -> Result<Vec<TruncatedSeries>> { docs.iter().map(|d| TruncatedSeries::from_doc_in(&ctx, d)).collect() };
        let generators = read(&doc.generators)?;
        let multipliers = read(&doc.multipliers)?;
        Self::new(target, generators, multipliers, doc.d_eff).map_err(|e| match e {
            Error::Config(s) => Error::Parse(s),
            other => other,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CertificateDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_doc(&doc)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateDoc {
    pub format_version: u32,
    pub d_eff: u32,
    pub target: SeriesDoc,
    pub generators: Vec<SeriesDoc>,
    pub multipliers: Vec<SeriesDoc>,
}
