//! Run specifications: which protocol, which configuration, which inputs.

use std::path::Path;

use choreo_core::denote::{Config, ConfigError, DistRecord};
use choreo_core::hll::{Program, TypeError};
use choreo_core::protocols::{bool_vectors, Bosco, SeqPaxos, SimpleVote};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("no protocol given")]
    MissingProtocol,
    #[error("bad inputs `{0}`: {1}")]
    Inputs(String, String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("reading config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing config file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolName {
    Simplevote,
    Bosco,
    Seqpaxos,
}

/// A fully resolved run. `n`, `f`, `b` describe the replica role `R`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSpec {
    pub protocol: ProtocolName,
    pub n: u32,
    pub f: u32,
    pub b: u32,
    pub iterations: u32,
    /// `|V|` for SeqPaxos.
    pub values: u32,
    /// Comma-separated good replica inputs (`1,1,0`), `all`, or `init`.
    pub inputs: String,
    /// The SimpleVote leader's bit.
    pub leader_input: bool,
    pub max_states: Option<usize>,
    pub max_depth: Option<usize>,
    pub seconds: Option<u64>,
    pub seed: u64,
    pub materialize_lists: bool,
    pub byz_after_receive: bool,
    pub asymmetric_bosco: bool,
}

/// A partially specified run, as read from flags or a config file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PartialSpec {
    pub protocol: Option<ProtocolName>,
    pub n: Option<u32>,
    pub f: Option<u32>,
    pub b: Option<u32>,
    pub iterations: Option<u32>,
    pub values: Option<u32>,
    pub inputs: Option<String>,
    pub leader_input: Option<bool>,
    pub max_states: Option<usize>,
    pub max_depth: Option<usize>,
    pub seconds: Option<u64>,
    pub seed: Option<u64>,
    pub materialize_lists: Option<bool>,
    pub byz_after_receive: Option<bool>,
    pub asymmetric_bosco: Option<bool>,
}

impl PartialSpec {
    pub fn from_file(path: &Path) -> Result<Self, SpecError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// Fields set in `over` win.
    pub fn overlay(self, over: PartialSpec) -> PartialSpec {
        PartialSpec {
            protocol: over.protocol.or(self.protocol),
            n: over.n.or(self.n),
            f: over.f.or(self.f),
            b: over.b.or(self.b),
            iterations: over.iterations.or(self.iterations),
            values: over.values.or(self.values),
            inputs: over.inputs.or(self.inputs),
            leader_input: over.leader_input.or(self.leader_input),
            max_states: over.max_states.or(self.max_states),
            max_depth: over.max_depth.or(self.max_depth),
            seconds: over.seconds.or(self.seconds),
            seed: over.seed.or(self.seed),
            materialize_lists: over.materialize_lists.or(self.materialize_lists),
            byz_after_receive: over.byz_after_receive.or(self.byz_after_receive),
            asymmetric_bosco: over.asymmetric_bosco.or(self.asymmetric_bosco),
        }
    }

    /// Fills the gaps with the protocol's defaults.
    pub fn resolve(self) -> Result<RunSpec, SpecError> {
        let protocol = self.protocol.ok_or(SpecError::MissingProtocol)?;
        let d = RunSpec::defaults(protocol);
        let spec = RunSpec {
            protocol,
            n: self.n.unwrap_or(d.n),
            f: self.f.unwrap_or(d.f),
            b: self.b.unwrap_or(d.b),
            iterations: self.iterations.unwrap_or(d.iterations),
            values: self.values.unwrap_or(d.values),
            inputs: self.inputs.unwrap_or(d.inputs),
            leader_input: self.leader_input.unwrap_or(d.leader_input),
            max_states: self.max_states.or(d.max_states),
            max_depth: self.max_depth.or(d.max_depth),
            seconds: self.seconds.or(d.seconds),
            seed: self.seed.unwrap_or(d.seed),
            materialize_lists: self.materialize_lists.unwrap_or(d.materialize_lists),
            byz_after_receive: self.byz_after_receive.unwrap_or(d.byz_after_receive),
            asymmetric_bosco: self.asymmetric_bosco.unwrap_or(d.asymmetric_bosco),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl RunSpec {
    /// SimpleVote at `n=4, f=1, b=1` with inputs `1,1,0`; Bosco at
    /// `n=3, f=1, b=1` over every input; SeqPaxos at `n=2, f=1`, `|V|=2`.
    pub fn defaults(protocol: ProtocolName) -> RunSpec {
        let (n, f, b, inputs) = match protocol {
            ProtocolName::Simplevote => (4, 1, 1, "1,1,0"),
            ProtocolName::Bosco => (3, 1, 1, "all"),
            ProtocolName::Seqpaxos => (2, 1, 0, "init"),
        };
        RunSpec {
            protocol,
            n,
            f,
            b,
            iterations: 0,
            values: 2,
            inputs: inputs.into(),
            leader_input: true,
            max_states: None,
            max_depth: None,
            seconds: None,
            seed: 0,
            materialize_lists: false,
            byz_after_receive: false,
            asymmetric_bosco: false,
        }
    }

    fn validate(&self) -> Result<(), SpecError> {
        if self.protocol == ProtocolName::Seqpaxos && self.b != 0 {
            return Err(SpecError::Invalid("SeqPaxos replicas are crash-only (b = 0)".into()));
        }
        if self.protocol == ProtocolName::Seqpaxos && self.values == 0 {
            return Err(SpecError::Invalid("need at least one value".into()));
        }
        if self.max_states == Some(0) || self.max_depth == Some(0) || self.seconds == Some(0) {
            return Err(SpecError::Invalid("budgets must be positive".into()));
        }
        self.config()?;
        Ok(())
    }

    pub fn config(&self) -> Result<Config, ConfigError> {
        match self.protocol {
            ProtocolName::Simplevote => SimpleVote::new(self.n, self.f).config(self.b),
            ProtocolName::Bosco => self.bosco().config(self.b),
            ProtocolName::Seqpaxos => self.seqpaxos().config(),
        }
    }

    pub fn bosco(&self) -> Bosco {
        Bosco::new(self.n, self.f).with_asymmetric(self.asymmetric_bosco)
    }

    pub fn seqpaxos(&self) -> SeqPaxos {
        SeqPaxos::new(self.n, self.f, self.values, self.iterations)
    }

    /// Good replica inputs to run on.
    pub fn input_vectors(&self) -> Result<Vec<Vec<bool>>, SpecError> {
        let g = self.n.checked_sub(self.b).ok_or_else(|| SpecError::Invalid("b > n".into()))?;
        let s = self.inputs.trim();
        if s == "all" {
            return Ok(bool_vectors(g));
        }
        let bad = |why: &str| SpecError::Inputs(self.inputs.clone(), why.into());
        let v = s
            .split(',')
            .map(|t| match t.trim() {
                "1" | "T" | "t" | "true" | "⊤" => Ok(true),
                "0" | "F" | "f" | "false" | "⊥" => Ok(false),
                _ => Err(bad("expected 1/0 entries")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if v.len() != g as usize {
            return Err(bad(&format!("expected {g} entries, one per good replica")));
        }
        Ok(vec![v])
    }

    /// Closed programs, one per input, with the input record they close over.
    pub fn programs(&self) -> Result<Vec<(DistRecord, Program)>, SpecError> {
        match self.protocol {
            ProtocolName::Simplevote => {
                let sv = SimpleVote::new(self.n, self.f);
                Ok(self
                    .input_vectors()?
                    .into_iter()
                    .map(|x| {
                        let p = sv.closed(self.leader_input, &x);
                        let mut rec = Bosco::inputs(&x);
                        rec.insert(choreo_core::protocols::leader(), vec![choreo_core::values::Value::Bool(self.leader_input)]);
                        (rec, p)
                    })
                    .collect())
            }
            ProtocolName::Bosco => {
                let body = self.bosco().iterated(self.iterations)?;
                Ok(self
                    .input_vectors()?
                    .into_iter()
                    .map(|x| {
                        let rec = Bosco::inputs(&x);
                        let p = body.apply(&rec);
                        (rec, p)
                    })
                    .collect())
            }
            ProtocolName::Seqpaxos => {
                if self.inputs.trim() != "init" {
                    return Err(SpecError::Inputs(self.inputs.clone(), "SeqPaxos runs from `init`".into()));
                }
                let sp = self.seqpaxos();
                let rec = sp.init();
                Ok(vec![(rec.clone(), sp.iterated(self.iterations)?.apply(&rec))])
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let file = PartialSpec { protocol: Some(ProtocolName::Bosco), n: Some(4), seed: Some(9), ..Default::default() };
        let flags = PartialSpec { n: Some(5), ..Default::default() };
        let s = file.overlay(flags).resolve().unwrap();
        assert_eq!((s.n, s.f, s.b, s.seed), (5, 1, 1, 9));
    }

    #[test]
    fn inputs_are_checked_against_good_count() {
        let s = RunSpec::defaults(ProtocolName::Simplevote);
        assert_eq!(s.input_vectors().unwrap(), vec![vec![true, true, false]]);
        let bad = RunSpec { inputs: "1,1".into(), ..s.clone() };
        assert!(matches!(bad.input_vectors(), Err(SpecError::Inputs(..))));
        let all = RunSpec { inputs: "all".into(), ..s };
        assert_eq!(all.input_vectors().unwrap().len(), 8);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let p = PartialSpec { protocol: Some(ProtocolName::Bosco), f: Some(0), ..Default::default() };
        assert!(p.resolve().is_err());
        let p = PartialSpec { protocol: Some(ProtocolName::Seqpaxos), b: Some(1), ..Default::default() };
        assert!(p.resolve().is_err());
        assert!(PartialSpec::default().resolve().is_err());
    }
}
