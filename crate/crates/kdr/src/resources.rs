use std::time::Instant;

use serde::{Deserialize, Serialize};

/// Wall time and memory of one command, recorded next to its results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resources {
    pub wall_time_s: f64,
    /// Peak resident set size of the process (`VmHWM`); absent where
    /// `/proc` is unavailable.
    pub peak_rss_kb: Option<u64>,
    pub workers: usize,
}

pub struct Stopwatch(Instant);

impl Stopwatch {
    pub fn start() -> Self {
        Self(Instant::now())
    }

    pub fn finish(&self, workers: usize) -> Resources {
        Resources { wall_time_s: self.0.elapsed().as_secs_f64(), peak_rss_kb: peak_rss_kb(), workers }
    }
}

pub fn peak_rss_kb() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}
