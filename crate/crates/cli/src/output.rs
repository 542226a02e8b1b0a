//! Writers for JSON reports and CSV tables with `#` provenance lines.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Opens `path`, or stdout when absent.
pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut w = sink(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Provenance lines written above every CSV table.
pub struct Provenance {
    pub command: String,
    pub spec_sha256: Option<String>,
    pub params: Vec<(String, String)>,
}

impl Provenance {
    pub fn new(command: &str) -> Self {
        Provenance {
            command: command.to_string(),
            spec_sha256: None,
            params: Vec::new(),
        }
    }

    pub fn spec(mut self, canonical_spec: &str) -> Self {
        self.spec_sha256 = Some(sha256_hex(canonical_spec));
        self
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    fn write(&self, w: &mut dyn Write) -> io::Result<()> {
        writeln!(
            w,
            "# fraclim {} (fraclim-core {})",
            env!("CARGO_PKG_VERSION"),
            fraclim_core::VERSION
        )?;
        writeln!(w, "# command: {}", self.command)?;
        if let Some(h) = &self.spec_sha256 {
            writeln!(w, "# spec-sha256: {h}")?;
        }
        for (k, v) in &self.params {
            writeln!(w, "# {k}: {v}")?;
        }
        Ok(())
    }
}

/// Writes a CSV table: provenance comments, header row, then records.
pub fn write_csv(path: Option<&Path>, prov: &Provenance, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = sink(path)?;
    prov.write(&mut w)?;
    {
        let mut c = csv::Writer::from_writer(&mut w);
        c.write_record(header)?;
        for r in rows {
            c.write_record(r)?;
        }
        c.flush()?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV written by [`write_csv`], skipping `#` lines.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers()?.iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(str::to_string).collect()))
        .collect::<std::result::Result<Vec<_>, _>>()
        .with_context(|| format!("malformed CSV in {}", path.display()))?;
    Ok((header, rows))
}
