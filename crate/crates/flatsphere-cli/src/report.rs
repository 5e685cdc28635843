//! Run configuration echo and verification reports.

use serde::Serialize;

/// Everything needed to reproduce a run. Echoed in reports and in `--json`
/// output; epsilon and the node fraction are both always present, whichever
/// one the user supplied.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub m: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree_cutoff: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Asymptotic node fraction (1-2*epsilon)^m implied by epsilon.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node_degree: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh_resolution: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe_resolution: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_path: Option<String>,
}

impl RunConfig {
    pub fn new(command: &str, m: u32) -> Self {
        RunConfig {
            command: command.to_string(),
            m,
            degree_cutoff: None,
            epsilon: None,
            fraction: None,
            node_degree: None,
            mesh_resolution: None,
            probe_resolution: None,
            seed: None,
            tolerance: None,
            points_path: None,
            system_path: None,
            out_path: None,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = Some(epsilon);
        self.fraction = Some((1.0 - 2.0 * epsilon).max(0.0).powi(self.m as i32));
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvStamp {
    pub package: String,
    pub version: String,
    pub target_os: String,
    pub target_arch: String,
    /// Optional thread-count override from FLATSPHERE_THREADS; echoed
    /// verbatim. The pipeline itself is single-threaded.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thread_override: Option<String>,
}

impl EnvStamp {
    pub fn capture() -> Self {
        EnvStamp {
            package: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            target_os: std::env::consts::OS.to_string(),
            target_arch: std::env::consts::ARCH.to_string(),
            thread_override: std::env::var("FLATSPHERE_THREADS").ok(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Recorded measurement without a pass/fail threshold, or a check that
    /// is not applicable at these parameters.
    Info,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    pub status: CheckStatus,
    pub detail: String,
}

impl CheckRecord {
    pub fn gate(name: &str, value: f64, threshold: f64, pass: bool, detail: impl Into<String>) -> Self {
        CheckRecord {
            name: name.to_string(),
            value: Some(value),
            threshold: Some(threshold),
            status: if pass { CheckStatus::Pass } else { CheckStatus::Fail },
            detail: detail.into(),
        }
    }

    pub fn info(name: &str, value: Option<f64>, detail: impl Into<String>) -> Self {
        CheckRecord {
            name: name.to_string(),
            value,
            threshold: None,
            status: CheckStatus::Info,
            detail: detail.into(),
        }
    }

    pub fn human_line(&self) -> String {
        let tag = match self.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Info => "info",
        };
        let value = match self.value {
            Some(v) => format!(" {v:.6e}"),
            None => String::new(),
        };
        let threshold = match self.threshold {
            Some(t) => format!(" (threshold {t:.1e})"),
            None => String::new(),
        };
        format!("[{tag}] {}:{value}{threshold} — {}", self.name, self.detail)
    }
}

#[derive(Debug, Serialize)]
pub struct VerificationReport {
    pub config: RunConfig,
    pub environment: EnvStamp,
    pub checks: Vec<CheckRecord>,
    pub overall: CheckStatus,
    pub elapsed_seconds: f64,
}

impl VerificationReport {
    pub fn new(config: RunConfig, checks: Vec<CheckRecord>, elapsed_seconds: f64) -> Self {
        let overall = if checks.iter().any(|c| c.status == CheckStatus::Fail) {
            CheckStatus::Fail
        } else {
            CheckStatus::Pass
        };
        VerificationReport {
            config,
            environment: EnvStamp::capture(),
            checks,
            overall,
            elapsed_seconds,
        }
    }

    pub fn passed(&self) -> bool {
        self.overall == CheckStatus::Pass
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}
