//! The four subcommands. Each returns a canonical JSON report and an exit
//! status; nothing here prints.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use choreo_core::channel::ChannelState;
use choreo_core::denote::{ConfigError, Denoter, DenoteError, DenoteOptions, DistRecord, Env, OutputSet};
use choreo_core::global::{
    align, check_adequacy, extract, global_compile, global_step, is_permissible, random_walk, AdequacyOptions,
    Budget, ExploreOptions, GlobalError, GlobalState, Replay, StopReason, SystemOptions,
};
use choreo_core::hll::{typecheck_prog, Role, TypeEnv, TypeError};
use choreo_core::protocols::{agreement_bosco, agreement_seqpaxos, counting_lemma, one_step, replica, CheckReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::json;
use crate::parallel::Pool;
use crate::spec::{ProtocolName, RunSpec, SpecError};
use crate::trace::{program_hash, Header, Trace, TraceError};

/// Longest trace `simulate` will generate.
pub const MAX_SIM_STEPS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Holds = 0,
    Violation = 1,
    Inconclusive = 2,
    Usage = 3,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }

    fn of(holds: bool, exhaustive: bool) -> Exit {
        match (holds, exhaustive) {
            (false, _) => Exit::Violation,
            (true, false) => Exit::Inconclusive,
            (true, true) => Exit::Holds,
        }
    }
}

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Global(Box<GlobalError>),
    #[error(transparent)]
    Denote(#[from] DenoteError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("unknown check `{0}`; expected one of {CHECKS:?}")]
    UnknownCheck(String),
    #[error("check `{check}` does not apply to {protocol:?}")]
    WrongProtocol { check: String, protocol: ProtocolName },
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("trace header does not match: {0}")]
    HeaderMismatch(String),
}

impl From<GlobalError> for CommandError {
    fn from(e: GlobalError) -> Self {
        CommandError::Global(Box::new(e))
    }
}

pub const CHECKS: [&str; 5] = ["adequacy", "one-step", "bosco-agreement", "seqpaxos-agreement", "counting-lemma"];

/// The protocol a check runs on when none is given.
pub fn default_protocol(check: &str) -> Option<ProtocolName> {
    match check {
        "one-step" | "bosco-agreement" | "counting-lemma" => Some(ProtocolName::Bosco),
        "seqpaxos-agreement" => Some(ProtocolName::Seqpaxos),
        _ => None,
    }
}

/// A command's result: the report, its exit status and, for violations, a
/// counterexample to be saved.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Json,
    pub exit: Exit,
    pub counterexample: Option<Json>,
}

pub struct Runner {
    pool: Pool,
}

impl Runner {
    pub fn new(jobs: usize) -> Result<Self, CommandError> {
        Ok(Runner { pool: Pool::new(jobs)? })
    }

    pub fn enumerate(&self, spec: &RunSpec) -> Result<Outcome, CommandError> {
        let cfg = spec.config()?;
        let opts = DenoteOptions { materialize_lists: spec.materialize_lists };
        let programs = spec.programs()?;
        let roles: BTreeSet<Role> = cfg.roles().map(|(r, _)| r.clone()).collect();
        let sets = self.pool_map(&programs, |(_, p)| -> Result<OutputSet, CommandError> {
            let (delta, _) = typecheck_prog(&TypeEnv::new(), &roles, p)?;
            Ok(Denoter::new(&cfg, &delta, opts).run(&Env::new(), p)?)
        })?;
        let runs: Vec<Json> = programs
            .iter()
            .zip(&sets)
            .map(|((input, _), outs)| json!({"input": json::record(input), "outputs": json::output_set(outs), "count": outs.len()}))
            .collect();
        let report = json!({"command": "enumerate", "spec": spec_json(spec), "config": json::config(&cfg), "runs": runs});
        Ok(Outcome { report, exit: Exit::Holds, counterexample: None })
    }

    pub fn check(&self, spec: &RunSpec, name: &str) -> Result<Outcome, CommandError> {
        let wrong = || CommandError::WrongProtocol { check: name.into(), protocol: spec.protocol };
        let reports: Vec<CheckReport> = match name {
            "adequacy" => return self.adequacy(spec),
            "one-step" => {
                if spec.protocol != ProtocolName::Bosco {
                    return Err(wrong());
                }
                let bosco = spec.bosco();
                self.pool_map(&[true, false], |&v| one_step(&bosco, spec.b, v))?
            }
            "bosco-agreement" => {
                if spec.protocol != ProtocolName::Bosco {
                    return Err(wrong());
                }
                vec![agreement_bosco(&spec.bosco(), spec.b, spec.iterations)?]
            }
            "seqpaxos-agreement" => {
                if spec.protocol != ProtocolName::Seqpaxos {
                    return Err(wrong());
                }
                vec![agreement_seqpaxos(&spec.seqpaxos(), spec.iterations)?]
            }
            "counting-lemma" => vec![counting_lemma(&spec.config()?, &replica())?],
            other => return Err(CommandError::UnknownCheck(other.into())),
        };
        let holds = reports.iter().all(|r| r.holds);
        let exhaustive = reports.iter().all(|r| r.exhaustive);
        let counterexample = reports.iter().find_map(|r| r.counterexample.as_ref()).map(|c| {
            json!({
                "check": name,
                "input": json::record(&c.input),
                "output": c.output.as_ref().map(json::record),
                "reason": c.reason,
            })
        });
        let report = json!({
            "command": "check",
            "check": name,
            "spec": spec_json(spec),
            "holds": holds,
            "exhaustive": exhaustive,
            "precondition": reports.iter().all(|r| r.precondition),
            "cases": reports.iter().map(|r| r.cases).sum::<usize>(),
            "counterexample": counterexample,
        });
        Ok(Outcome { report, exit: Exit::of(holds, exhaustive), counterexample })
    }

    fn adequacy(&self, spec: &RunSpec) -> Result<Outcome, CommandError> {
        let cfg = spec.config()?;
        let opts = AdequacyOptions {
            system: system_options(spec),
            denote: DenoteOptions { materialize_lists: spec.materialize_lists },
            bigstep: true,
        };
        let deadline = spec.seconds.map(|s| Instant::now() + Duration::from_secs(s));
        let interrupt = move || deadline.is_some_and(|d| Instant::now() >= d);
        let eopts = ExploreOptions {
            budget: Budget { max_states: spec.max_states, max_depth: spec.max_depth },
            dedup: true,
            map: &self.pool,
            interrupt: &interrupt,
        };
        let mut runs = Vec::new();
        let (mut holds, mut exhaustive, mut equal, mut sandwich) = (true, true, true, true);
        let mut counterexample = None;
        for (input, p) in spec.programs()? {
            let r = check_adequacy(p, cfg.clone(), opts, &eopts)?;
            holds &= r.subset;
            exhaustive &= r.exhaustive;
            equal &= r.equal;
            sandwich &= r.sandwich.unwrap_or(false);
            if counterexample.is_none() {
                counterexample = r.counterexample.as_ref().map(|t| {
                    json!({"check": "adequacy", "input": json::record(&input), "trace": json::labels(t)})
                });
            }
            runs.push(json!({
                "input": json::record(&input),
                "subset": r.subset,
                "equal": r.equal,
                "exhaustive": r.exhaustive,
                "stop": r.stop.map(stop_name),
                "states": r.states,
                "operational": json::output_set(&r.operational),
                "denotational": json::output_set(&r.denotational),
                "bigstep": r.bigstep.as_ref().map(json::output_set),
                "sandwich": r.sandwich,
            }));
        }
        let report = json!({
            "command": "check",
            "check": "adequacy",
            "spec": spec_json(spec),
            "holds": holds,
            "exhaustive": exhaustive,
            "subset": holds,
            "equal": equal,
            "sandwich": sandwich,
            "runs": runs,
            "counterexample": counterexample,
        });
        Ok(Outcome { report, exit: Exit::of(holds, exhaustive), counterexample })
    }

    /// A seeded random maximal trace. Returns the trace file contents along
    /// with the report.
    pub fn simulate(&self, spec: &RunSpec, align_trace: bool, dump_channels: bool) -> Result<(Outcome, String), CommandError> {
        let cfg = spec.config()?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut programs = spec.programs()?;
        let (input, p) = programs.swap_remove(rng.random_range(0..programs.len()));
        let hash = program_hash(&p, &cfg);
        let (sys, s0) = global_compile(p.clone(), cfg.clone())?;
        let sys = sys.with_options(system_options(spec));
        let (walk, last) = random_walk(&sys, &s0, &mut |k| rng.random_range(0..k), MAX_SIM_STEPS)?;
        let mut labels = walk.clone();
        let mut align_ok = None;
        if align_trace {
            labels = align(sys.delta(), &walk);
            align_ok = Some(match is_permissible(&sys, &s0, &labels) {
                Replay::Permissible(s) => s.canonical() == last.canonical(),
                Replay::Blocked { .. } => false,
            });
        }
        let completed = last.is_completed();
        let output = completed.then(|| extract(&last)).transpose()?;
        let in_denotation = match &output {
            Some(out) => {
                let dens = Denoter::new(&cfg, sys.delta(), DenoteOptions { materialize_lists: spec.materialize_lists })
                    .run(&Env::new(), &p)?;
                let roles = sys.result_roles();
                Some(dens.contains(&restrict_record(out, &roles)))
            }
            None => None,
        };
        let channels = if dump_channels { Some(channel_states(&sys, &s0, &labels)?) } else { None };
        let mut header = Header::new(spec, &input, &p, &cfg, sys.delta());
        header.aligned = align_trace;
        let trace = Trace { header, labels };
        let text = trace.to_string(channels.as_deref());
        let ok = in_denotation != Some(false) && align_ok != Some(false);
        let report = json!({
            "command": "simulate",
            "spec": spec_json(spec),
            "program_hash": hash,
            "input": json::record(&input),
            "steps": trace.labels.len(),
            "completed": completed,
            "output": output.as_ref().map(json::record),
            "in_denotation": in_denotation,
            "aligned": align_trace,
            "align_ok": align_ok,
        });
        let counterexample = (!ok).then(|| json!({"check": "simulate", "input": json::record(&input), "trace": json::labels(&walk)}));
        let exit = if ok { Exit::Holds } else { Exit::Violation };
        Ok((Outcome { report, exit, counterexample }, text))
    }

    pub fn replay(&self, trace: &Trace) -> Result<Outcome, CommandError> {
        let spec = &trace.header.spec;
        let cfg = spec.config()?;
        let p = spec
            .programs()?
            .into_iter()
            .find(|(input, _)| *input == trace.header.input)
            .map(|(_, p)| p)
            .ok_or_else(|| CommandError::HeaderMismatch("input is not among the spec's inputs".into()))?;
        let hash = program_hash(&p, &cfg);
        if hash != trace.header.program_hash {
            return Err(CommandError::HeaderMismatch(format!("program hash {hash} != {}", trace.header.program_hash)));
        }
        let (sys, s0) = global_compile(p, cfg)?;
        if json::delta(sys.delta()) != trace.header.delta {
            return Err(CommandError::HeaderMismatch("channel context differs".into()));
        }
        let sys = sys.with_options(system_options(spec));
        let report = match is_permissible(&sys, &s0, &trace.labels) {
            Replay::Permissible(s) => {
                let output = s.is_completed().then(|| extract(&s)).transpose()?;
                json!({
                    "command": "replay",
                    "program_hash": hash,
                    "permissible": true,
                    "steps": trace.labels.len(),
                    "completed": s.is_completed(),
                    "output": output.as_ref().map(json::record),
                })
            }
            Replay::Blocked { index, error } => json!({
                "command": "replay",
                "program_hash": hash,
                "permissible": false,
                "steps": trace.labels.len(),
                "failing_index": index,
                "error": error.to_string(),
            }),
        };
        let exit = if report["permissible"] == json!(true) { Exit::Holds } else { Exit::Violation };
        Ok(Outcome { report, exit, counterexample: None })
    }

    /// Ordered parallel map on the runner's pool.
    fn pool_map<T: Sync, U: Send, E: Send>(
        &self,
        items: &[T],
        f: impl Fn(&T) -> Result<U, E> + Sync + Send,
    ) -> Result<Vec<U>, E> {
        self.pool.install(|| items.par_iter().map(f).collect())
    }
}

fn system_options(spec: &RunSpec) -> SystemOptions {
    SystemOptions { byz_after_receive: spec.byz_after_receive, ..SystemOptions::default() }
}

fn spec_json(spec: &RunSpec) -> Json {
    serde_json::to_value(spec).expect("run specs serialize")
}

fn stop_name(s: StopReason) -> &'static str {
    match s {
        StopReason::MaxStates => "max-states",
        StopReason::MaxDepth => "max-depth",
        StopReason::Interrupted => "interrupted",
    }
}

fn restrict_record(r: &DistRecord, roles: &BTreeSet<Role>) -> DistRecord {
    r.iter().filter(|(k, _)| roles.contains(*k)).map(|(k, v)| (k.clone(), v.clone())).collect()
}

/// The state of each label's channel right after that label.
fn channel_states(
    sys: &choreo_core::global::System,
    s0: &GlobalState,
    labels: &[choreo_core::global::GlobalLabel],
) -> Result<Vec<ChannelState>, GlobalError> {
    let mut s = s0.clone();
    let mut out = Vec::with_capacity(labels.len());
    for l in labels {
        s = global_step(sys, &s, l)?;
        out.push(s.channels[l.chan()].clone());
    }
    Ok(out)
}
