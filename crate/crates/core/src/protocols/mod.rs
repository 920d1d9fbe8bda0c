//! Built-in protocols and their safety checks.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::denote::{Config, DenoteError, DenoteOptions, Denoter, DistRecord, Env, OutputSet};
use crate::hll::{typecheck_prog, ProtocolBody, Role, TypeEnv};
use crate::values::{FnRef, PureFn, Registry, Value};

mod bosco;
mod checks;
mod seqpaxos;
mod simple_vote;

pub use bosco::Bosco;
pub use checks::{agreement_bosco, agreement_seqpaxos, counting_lemma, one_step, CheckReport, Counterexample};
pub use seqpaxos::SeqPaxos;
pub use simple_vote::SimpleVote;

pub fn leader() -> Role {
    Role::new("L")
}

pub fn replica() -> Role {
    Role::new("R")
}

/// `⟦body⟧ {x ↦ inputs}`.
pub fn denote_body(
    body: &ProtocolBody,
    cfg: &Config,
    inputs: &BTreeMap<Role, Vec<Value>>,
    opts: DenoteOptions,
) -> Result<OutputSet, DenoteError> {
    let p = body.apply(inputs);
    let roles: BTreeSet<Role> = cfg.roles().map(|(r, _)| r.clone()).collect();
    let (delta, _) = typecheck_prog(&TypeEnv::new(), &roles, &p)?;
    Denoter::new(cfg, &delta, opts).run(&Env::new(), &p)
}

/// Every Boolean vector of length `n`, in counting order.
pub fn bool_vectors(n: u32) -> Vec<Vec<bool>> {
    (0u64..1 << n).map(|bits| (0..n).map(|i| bits >> i & 1 == 1).collect()).collect()
}

pub(crate) fn record(fields: impl IntoIterator<Item = (Role, Vec<Value>)>) -> DistRecord {
    fields.into_iter().collect()
}

// Each protocol builds its functions into a private registry, so names
// never collide.
pub(crate) fn def(reg: &mut Registry, f: PureFn) -> FnRef {
    reg.register(f).expect("function names are unique per protocol")
}

pub(crate) fn fn_name(base: &str, params: &[(&str, u32)]) -> String {
    use core::fmt::Write;
    let mut s = String::from(base);
    s.push('[');
    for (i, (k, v)) in params.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{k}={v}");
    }
    s.push(']');
    s
}
