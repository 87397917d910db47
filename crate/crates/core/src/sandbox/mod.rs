//! Subprocess execution of candidate programs under wall-time, memory and
//! output limits.
//!
//! Trust boundary: children run as the harness user with an address-space
//! cap and their own process group. There is no namespace or seccomp
//! isolation, so only run code you would run yourself.

mod compare;
mod judge;
mod run;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use compare::{compare_output, ComparePolicy, DEFAULT_FLOAT_TOLERANCE};
pub use judge::{judge, JudgeOptions, JudgePool, JudgeVerdict, TestOutcome};
pub use run::{run_once, Runner};

pub const MIB: u64 = 1024 * 1024;

/// Upper bound on the resident memory an idle interpreter adds on top of what
/// the candidate allocates. Used to bound peak-memory readings from above.
pub const INTERPRETER_OVERHEAD_BYTES: u64 = 64 * MIB;

/// Scheduler slack allowed between the wall-time limit and the kill.
pub const KILL_GRACE: Duration = Duration::from_millis(500);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceLimits {
    #[serde(with = "secs_f64")]
    pub wall_time: Duration,
    pub memory_bytes: u64,
    pub output_cap_bytes: u64,
}

impl Default for ResourceLimits {
    fn default() -> Self {
        Self {
            wall_time: Duration::from_secs(10),
            memory_bytes: 256 * MIB,
            output_cap_bytes: MIB,
        }
    }
}

impl ResourceLimits {
    pub fn validate(&self) -> Result<(), SandboxError> {
        if self.wall_time.is_zero() || self.memory_bytes == 0 || self.output_cap_bytes == 0 {
            return Err(SandboxError::InvalidLimits(*self));
        }
        Ok(())
    }

    pub fn with_wall_time(mut self, wall_time: Duration) -> Self {
        self.wall_time = wall_time;
        self
    }

    pub fn with_memory(mut self, bytes: u64) -> Self {
        self.memory_bytes = bytes;
        self
    }
}

pub(crate) mod secs_f64 {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        Duration::try_from_secs_f64(secs).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Timeout,
    Oom,
    RuntimeError,
    OutputOverflow,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::Timeout => "timeout",
            RunStatus::Oom => "oom",
            RunStatus::RuntimeError => "runtime_error",
            RunStatus::OutputOverflow => "output_overflow",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionReport {
    pub status: RunStatus,
    /// Truncated at the output cap.
    pub stdout: String,
    pub stderr: String,
    /// Wall seconds from spawn to reap.
    pub wall_time_used: f64,
    /// Maximum resident set size of the child, in bytes.
    pub peak_memory: u64,
    /// Exit code, or `-signal` when the child was killed by a signal.
    pub exit_code: i32,
}

#[derive(Debug, Error)]
pub enum SandboxError {
    #[error("interpreter `{program}` could not be started: {source}")]
    InterpreterMissing {
        program: String,
        #[source]
        source: std::io::Error,
    },
    #[error("sandbox I/O failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid runner command `{0}`")]
    InvalidRunner(String),
    #[error("invalid resource limits {0:?}")]
    InvalidLimits(ResourceLimits),
    #[error("problem `{0}` has no tests to judge against")]
    Untestable(String),
    #[error("failed to build judge pool: {0}")]
    Pool(String),
}

impl SandboxError {
    /// Whether the error reflects a broken host rather than a bad candidate.
    pub fn is_infrastructure(&self) -> bool {
        !matches!(self, SandboxError::Untestable(_))
    }
}
