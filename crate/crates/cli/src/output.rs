//! Output headers, CSV/JSON emission and the single output writer.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use ptorus_core::tolerance;

pub const SCHEMA_VERSION: u32 = 1;

/// Tolerances every output declares.
pub fn tolerances() -> Value {
    json!({
        "newton_residual": tolerance::NEWTON_RESIDUAL,
        "cusp_residual": ptorus_core::maskit::CUSP_RESIDUAL,
        "parabolic": tolerance::PARABOLIC_TOL,
        "real_trace": tolerance::REAL_TRACE_TOL,
        "render_contraction": tolerance::RENDER_CONTRACTION,
    })
}

/// Provenance written at the top of every file.
pub struct Header {
    pub command: &'static str,
    pub config_hash: String,
    pub seed: u64,
}

impl Header {
    /// Hash of the command name and its effective parameters.
    pub fn new(command: &'static str, params: &Value, seed: u64) -> Self {
        let canonical = serde_json::to_string(&json!({ "command": command, "params": params, "seed": seed }))
            .expect("json values serialize");
        let digest = Sha256::digest(canonical.as_bytes());
        let config_hash = digest.iter().map(|b| format!("{b:02x}")).collect();
        Header { command, config_hash, seed }
    }

    fn json(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "tolerances": tolerances(),
        })
    }
}

pub fn open(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// `# key=value` lines, then the CSV body with its own header row.
pub fn write_csv<R: Serialize>(
    out: &mut dyn Write,
    header: &Header,
    notes: &[(&str, String)],
    rows: &[R],
) -> anyhow::Result<()> {
    writeln!(out, "# schema_version={SCHEMA_VERSION}")?;
    writeln!(out, "# command={}", header.command)?;
    writeln!(out, "# config_hash={}", header.config_hash)?;
    writeln!(out, "# seed={}", header.seed)?;
    writeln!(out, "# tolerances={}", tolerances())?;
    for (k, v) in notes {
        writeln!(out, "# {k}={v}")?;
    }
    let mut w = csv::Writer::from_writer(&mut *out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    drop(w);
    out.flush()?;
    Ok(())
}

/// Header fields merged with `body` into one pretty JSON document.
pub fn write_json(out: &mut dyn Write, header: &Header, body: Value) -> anyhow::Result<()> {
    let mut doc = header.json();
    if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
        d.extend(b);
    }
    serde_json::to_writer_pretty(&mut *out, &doc)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}
