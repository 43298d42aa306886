//! Analysis reports and their conversion to and from certificates.
//!
//! A report carries the reformulated system, the transcript and the block
//! sizes, so `verify` can recheck it against the instance alone.

use serde::{Deserialize, Serialize};
use spectra_cert_core::certify::{VerificationReport, Verdict};
use spectra_cert_core::ratmat::{format_rational, parse_rational};
use spectra_cert_core::sdpsolve::Diagnostics;
use spectra_cert_core::{
    BlockStyle, Certificate, Mode, RatMatrix, SdpSystem, StaircaseForm, Strength, SymMatrix, ToleranceProfile,
    Transcript,
};

use crate::error::{CliError, CliResult};
use crate::instance::SCHEMA_VERSION;

pub const TOOL_NAME: &str = "spectra-cert";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportFile {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub verdict: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub block_sizes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_style: Option<BlockStyle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strength: Option<Strength>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub farkas_ray: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(rename = "X", default, skip_serializing_if = "Option::is_none")]
    pub x: Option<SymMatrix>,
    /// Defaults to the transcript applied to the instance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reformulated: Option<SdpSystem>,
    /// Defaults to the identity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript: Option<TranscriptFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<Diagnostics>,
    #[serde(default)]
    pub metadata: Metadata,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptFile {
    #[serde(rename = "T")]
    pub t: RatMatrix,
    #[serde(rename = "V")]
    pub v: RatMatrix,
    pub mode: Mode,
    /// False for float transcripts, which only hold up to tolerance.
    #[serde(default = "yes")]
    pub certifying: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationSummary {
    /// `accepted`, `toleranced` or `rejected`.
    pub status: String,
    #[serde(flatten)]
    pub report: VerificationReport,
}

impl VerificationSummary {
    pub fn new(report: VerificationReport) -> Self {
        let status = match (report.verdict, report.checked_exactly) {
            (Verdict::Rejected, _) => "rejected",
            (Verdict::Accepted, true) => "accepted",
            (Verdict::Accepted, false) => "toleranced",
        };
        Self {
            status: status.into(),
            report,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Metadata {
    #[serde(default)]
    pub tool: String,
    #[serde(default)]
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hinted: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceProfile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorInfo>,
}

impl Metadata {
    pub fn tool() -> Self {
        Self {
            tool: TOOL_NAME.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GeneratorInfo {
    pub version: String,
    pub prng: String,
    pub spec: serde_json::Value,
}

impl ReportFile {
    pub fn from_certificate(cert: &Certificate, metadata: Metadata) -> Self {
        let mut report = Self {
            schema_version: SCHEMA_VERSION,
            verdict: cert.verdict().into(),
            k: None,
            block_sizes: Vec::new(),
            block_style: None,
            strength: None,
            farkas_ray: None,
            p: None,
            x: None,
            reformulated: None,
            transcript: None,
            reason: None,
            verification: None,
            diagnostics: cert.diagnostics().to_vec(),
            metadata,
        };
        let (form, transcript) = match cert {
            Certificate::Infeasible {
                staircase,
                transcript,
                strength,
                farkas_ray,
                ..
            } => {
                report.strength = Some(*strength);
                report.farkas_ray = farkas_ray.as_ref().map(|y| y.iter().map(format_rational).collect());
                (Some(staircase), Some(transcript))
            }
            Certificate::Feasible {
                p,
                witness,
                staircase,
                transcript,
                ..
            } => {
                report.p = Some(*p);
                report.x = Some(witness.clone());
                (Some(staircase), Some(transcript))
            }
            Certificate::Undecided { reason, .. } => {
                report.reason = Some(reason.clone());
                (None, None)
            }
        };
        if let Some(form) = form {
            report.k = Some(form.k);
            report.block_sizes = form.block_sizes.clone();
            report.block_style = Some(form.block_style);
            report.reformulated = Some(form.system.clone());
        }
        report.transcript = transcript.map(|t| TranscriptFile {
            t: t.t.clone(),
            v: t.v.clone(),
            mode: t.mode,
            certifying: t.mode == Mode::Exact,
        });
        report
    }

    /// Rebuilds the certificate the report claims for `source`.
    pub fn to_certificate(&self, source: &SdpSystem) -> CliResult<Certificate> {
        let ctx = "report";
        let transcript = match &self.transcript {
            Some(t) => Transcript {
                t: t.t.clone(),
                v: t.v.clone(),
                mode: t.mode,
            },
            None => Transcript::identity(source.equations(), source.order(), Mode::Exact),
        };
        let reformulated = || -> CliResult<SdpSystem> {
            match &self.reformulated {
                Some(s) => Ok(s.clone()),
                None => transcript
                    .apply(source)
                    .map_err(|e| CliError::parse(ctx, format!("transcript does not fit the instance: {e}"))),
            }
        };
        let need_k = || self.k.ok_or_else(|| CliError::parse(ctx, "missing k"));
        match self.verdict.as_str() {
            "infeasible" => {
                let staircase = StaircaseForm::new(reformulated()?, need_k()?, self.block_sizes.clone());
                let farkas_ray = self
                    .farkas_ray
                    .as_ref()
                    .map(|y| y.iter().map(|t| parse_rational(t)).collect::<Result<Vec<_>, _>>())
                    .transpose()
                    .map_err(|e| CliError::parse("farkasRay", e))?;
                Ok(Certificate::Infeasible {
                    staircase,
                    transcript,
                    strength: self.strength.unwrap_or(Strength::WeakUnconfirmed),
                    farkas_ray,
                    diagnostics: Vec::new(),
                })
            }
            "feasible" => {
                let staircase = StaircaseForm::new(reformulated()?, need_k()?, self.block_sizes.clone());
                Ok(Certificate::Feasible {
                    p: self.p.ok_or_else(|| CliError::parse(ctx, "missing p"))?,
                    witness: self.x.clone().ok_or_else(|| CliError::parse(ctx, "missing X"))?,
                    staircase,
                    transcript,
                    diagnostics: Vec::new(),
                })
            }
            "undecided" => Ok(Certificate::Undecided {
                reason: self.reason.clone().unwrap_or_default(),
                diagnostics: Vec::new(),
                progress: None,
            }),
            other => Err(CliError::parse(ctx, format!("unknown verdict {other:?}"))),
        }
    }

    pub fn parse(text: &str, context: &str) -> CliResult<Self> {
        let report: Self = serde_json::from_str(text).map_err(|e| CliError::parse(context, e))?;
        if report.schema_version != SCHEMA_VERSION {
            return Err(CliError::parse(
                context,
                format!("unsupported schemaVersion {}", report.schema_version),
            ));
        }
        Ok(report)
    }
}
