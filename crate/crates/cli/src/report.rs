//! Schema-versioned JSON reports.

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use std::path::Path;

pub const SCHEMA: u32 = 1;

/// The common envelope: schema, command, status, provenance and result.
#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: &'static str,
    pub status: &'static str,
    pub summary: String,
    pub provenance: Value,
    pub result: Value,
}

impl Report {
    pub fn new<C: Serialize, R: Serialize>(
        command: &'static str,
        ok: bool,
        summary: String,
        config: &C,
        tolerances: Value,
        result: &R,
    ) -> Result<Self> {
        Ok(Report {
            schema: SCHEMA,
            command,
            status: if ok { "ok" } else { "fail" },
            summary,
            provenance: json!({
                "tool": "specweight",
                "version": env!("CARGO_PKG_VERSION"),
                "config": serde_json::to_value(config)?,
                "tolerances": tolerances,
            }),
            result: serde_json::to_value(result)?,
        })
    }

    pub fn ok(&self) -> bool {
        self.status == "ok"
    }

    /// Writes the report to `path`, or to stdout when `path` is `None`.
    pub fn emit(&self, path: Option<&Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        match path {
            Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("cannot write {}", p.display())),
            None => {
                println!("{text}");
                Ok(())
            }
        }
    }
}
