//! Trace files: a JSON header line followed by one global label per line.

use std::io::{BufRead, Write};

use choreo_core::channel::ChannelState;
use choreo_core::denote::{Config, DistRecord};
use choreo_core::global::GlobalLabel;
use choreo_core::hll::{ChannelContext, Program};
use serde_json::{json, Value as Json};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::json::{self, DecodeError};
use crate::spec::RunSpec;

pub const FORMAT: &str = "choreo-trace/1";

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("line {line}: {source}")]
    Decode { line: usize, source: DecodeError },
    #[error("empty trace file")]
    Empty,
    #[error("unsupported trace format `{0}`")]
    Format(String),
    #[error("header: {0}")]
    Header(String),
}

/// Hex SHA-256 of the program text and the canonical configuration.
pub fn program_hash(p: &Program, cfg: &Config) -> String {
    let mut h = Sha256::new();
    h.update(p.to_string().as_bytes());
    h.update(b"\n");
    h.update(json::to_line(&json::config(cfg)).as_bytes());
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Header {
    pub program_hash: String,
    pub spec: RunSpec,
    pub input: DistRecord,
    pub config: Json,
    pub delta: Json,
    pub aligned: bool,
    pub seed: u64,
}

impl Header {
    pub fn new(spec: &RunSpec, input: &DistRecord, p: &Program, cfg: &Config, delta: &ChannelContext) -> Self {
        Header {
            program_hash: program_hash(p, cfg),
            spec: spec.clone(),
            input: input.clone(),
            config: json::config(cfg),
            delta: json::delta(delta),
            aligned: false,
            seed: spec.seed,
        }
    }

    pub fn to_json(&self) -> Json {
        json!({
            "format": FORMAT,
            "program_hash": self.program_hash,
            "spec": serde_json::to_value(&self.spec).expect("run specs serialize"),
            "input": json::record(&self.input),
            "config": self.config,
            "delta": self.delta,
            "aligned": self.aligned,
            "seed": self.seed,
        })
    }

    fn from_json(j: &Json) -> Result<Self, TraceError> {
        let format = j.get("format").and_then(Json::as_str).unwrap_or_default();
        if format != FORMAT {
            return Err(TraceError::Format(format.into()));
        }
        let field = |k: &str| j.get(k).ok_or_else(|| TraceError::Header(format!("missing `{k}`")));
        Ok(Header {
            program_hash: field("program_hash")?
                .as_str()
                .ok_or_else(|| TraceError::Header("program_hash is not a string".into()))?
                .into(),
            spec: serde_json::from_value(field("spec")?.clone()).map_err(|source| TraceError::Json { line: 1, source })?,
            input: json::decode_record(field("input")?).map_err(|source| TraceError::Decode { line: 1, source })?,
            config: field("config")?.clone(),
            delta: field("delta")?.clone(),
            aligned: field("aligned")?.as_bool().unwrap_or(false),
            seed: field("seed")?.as_u64().unwrap_or(0),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub header: Header,
    pub labels: Vec<GlobalLabel>,
}

impl Trace {
    /// Writes the trace. With `channels`, each label line also carries the
    /// state of its channel after the step.
    pub fn write(&self, w: &mut dyn Write, channels: Option<&[ChannelState]>) -> std::io::Result<()> {
        writeln!(w, "{}", json::to_line(&self.header.to_json()))?;
        for (i, l) in self.labels.iter().enumerate() {
            let mut j = json::label(l);
            if let Some(cs) = channels.and_then(|c| c.get(i)) {
                j["channel"] = json::channel_state(cs);
            }
            writeln!(w, "{}", json::to_line(&j))?;
        }
        Ok(())
    }

    pub fn to_string(&self, channels: Option<&[ChannelState]>) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf, channels).expect("writing to memory");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }

    pub fn read(r: impl BufRead) -> Result<Self, TraceError> {
        let mut lines = r.lines().enumerate().filter(|(_, l)| !matches!(l, Ok(s) if s.trim().is_empty()));
        let (_, first) = lines.next().ok_or(TraceError::Empty)?;
        let first: Json = serde_json::from_str(&first?).map_err(|source| TraceError::Json { line: 1, source })?;
        let header = Header::from_json(&first)?;
        let mut labels = Vec::new();
        for (i, line) in lines {
            let j: Json = serde_json::from_str(&line?).map_err(|source| TraceError::Json { line: i + 1, source })?;
            labels.push(json::decode_label(&j).map_err(|source| TraceError::Decode { line: i + 1, source })?);
        }
        Ok(Trace { header, labels })
    }
}
