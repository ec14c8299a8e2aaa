//! Run manifests: `key = value` lines grouped under `[section]` headers.
//!
//! The `[config]` section is a valid config file on its own, and
//! `[config.source]` names where each value came from.

use std::fmt::Write as _;

use avtseg_core::pipeline::StageTimings;

use crate::config::{PipelineSettings, PIPELINE_KEYS};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub status: String,
    pub paths: Vec<(String, String)>,
    pub settings: Option<PipelineSettings>,
    pub timings: Vec<(String, f64)>,
    pub stats: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            status: "ok".into(),
            paths: Vec::new(),
            settings: None,
            timings: Vec::new(),
            stats: Vec::new(),
        }
    }

    pub fn path(&mut self, key: &str, value: impl AsRef<std::path::Path>) {
        self.paths.push((key.into(), value.as_ref().display().to_string()));
    }

    pub fn stat(&mut self, key: &str, value: impl ToString) {
        self.stats.push((key.into(), value.to_string()));
    }

    pub fn stage_timings(&mut self, t: &StageTimings) {
        self.timings.extend([
            ("harmonize".to_string(), t.harmonize_ms),
            ("coarse".to_string(), t.coarse_ms),
            ("centerline".to_string(), t.centerline_ms),
            ("fine".to_string(), t.fine_ms),
        ]);
    }

    pub fn format(&self) -> String {
        let mut out = String::from("# avtseg run manifest v1\n");
        let _ = writeln!(out, "tool = avtseg\nversion = {VERSION}\ncommand = {}\nstatus = {}", self.command, self.status);
        out.push_str("\n[paths]\n");
        for (k, v) in &self.paths {
            let _ = writeln!(out, "{k} = {v}");
        }
        if let Some(s) = &self.settings {
            out.push_str("\n[config]\n");
            out.push_str(&s.echo());
            out.push_str("\n[config.source]\n");
            for k in PIPELINE_KEYS {
                let _ = writeln!(out, "{k} = {}", s.sources[k].as_str());
            }
        }
        out.push_str("\n[timings_ms]\n");
        for (k, v) in &self.timings {
            let _ = writeln!(out, "{k} = {v:.3}");
        }
        out.push_str("\n[stats]\n");
        for (k, v) in &self.stats {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

/// Lines of one `[section]`, comments and blanks removed.
pub fn section<'a>(text: &'a str, name: &str) -> Vec<&'a str> {
    let header = format!("[{name}]");
    text.lines()
        .map(str::trim)
        .skip_while(|l| *l != header)
        .skip(1)
        .take_while(|l| !l.starts_with('['))
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
}
