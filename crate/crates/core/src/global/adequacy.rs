use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::explore::{explore, ExploreOptions, StopReason};
use super::{global_compile, GlobalError, GlobalLabel, SystemOptions};
use crate::denote::{denote_expr, netwk, product, Config, DenoteError, DenoteOptions, Denoter, DistRecord, Env, OutputSet};
use crate::hll::{is_normal, normalize, ChannelContext, Program};
use crate::values::{fold, Term, Value};

/// Big-step run of a program in let-comm normal form: per channel, every
/// receiver folds some network list of the good messages.
pub fn bigstep_run(cfg: &Config, delta: &ChannelContext, p: &Program) -> Result<OutputSet, GlobalError> {
    if !is_normal(p) {
        return Err(GlobalError::NotNormal);
    }
    let mut envs: BTreeSet<Env> = [Env::new()].into_iter().collect();
    let mut cur = p;
    loop {
        match cur {
            Program::Ret(fields) => {
                let mut out = OutputSet::new();
                for env in &envs {
                    let mut rec = DistRecord::new();
                    for (r, e) in fields {
                        rec.insert(r.clone(), values(denote_expr(cfg, env, r, e)?, r)?);
                    }
                    out.insert(rec);
                }
                return Ok(out);
            }
            Program::Let { var, bound, body } => {
                let Program::Comm { chan, msg, default, combine } = &**bound else {
                    return Err(GlobalError::NotNormal);
                };
                let entry = delta.get(chan).ok_or_else(|| GlobalError::UnknownChannel(chan.clone()))?;
                let mut next = BTreeSet::new();
                for env in &envs {
                    let msgs = values(denote_expr(cfg, env, &entry.sender, msg)?, &entry.sender)?;
                    let defaults = values(denote_expr(cfg, env, &entry.receiver, default)?, &entry.receiver)?;
                    let fs = denote_expr(cfg, env, &entry.receiver, combine)?;
                    let lists = netwk(cfg, &entry.sender, &msgs, &entry.msg_type)?;
                    let mut per_node = Vec::new();
                    for (f, d) in fs.iter().zip(&defaults) {
                        let f = f.as_closure().ok_or_else(|| DenoteError::NotAFunction(entry.receiver.clone()))?;
                        let outs = lists
                            .iter()
                            .map(|l| fold(f, d.clone(), l))
                            .collect::<Result<BTreeSet<Value>, _>>()
                            .map_err(DenoteError::from)?;
                        per_node.push(outs);
                    }
                    let refs: Vec<&BTreeSet<Value>> = per_node.iter().collect();
                    for y in product(&refs) {
                        let mut e = env.clone();
                        e.insert(var.clone(), [(entry.receiver.clone(), y)].into_iter().collect());
                        next.insert(e);
                    }
                }
                envs = next;
                cur = body;
            }
            Program::Comm { .. } => return Err(GlobalError::NotNormal),
        }
    }
}

fn values(ts: Vec<Term>, r: &crate::hll::Role) -> Result<Vec<Value>, DenoteError> {
    ts.into_iter().map(|t| t.into_value().ok_or_else(|| DenoteError::NotAValue(r.clone()))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdequacyOptions {
    pub system: SystemOptions,
    pub denote: DenoteOptions,
    /// Also run [`bigstep_run`] and check the sandwich.
    pub bigstep: bool,
}

impl Default for AdequacyOptions {
    fn default() -> Self {
        AdequacyOptions { system: SystemOptions::default(), denote: DenoteOptions::default(), bigstep: true }
    }
}

/// Operational outputs against the denotation, restricted to the roles of
/// the program's result type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdequacyReport {
    pub subset: bool,
    pub equal: bool,
    pub exhaustive: bool,
    pub stop: Option<StopReason>,
    pub states: usize,
    pub operational: OutputSet,
    pub denotational: OutputSet,
    pub bigstep: Option<OutputSet>,
    /// `operational ⊆ bigstep ⊆ denotational`, when the big-step run was made.
    pub sandwich: Option<bool>,
    /// A trace to a completed state whose output is not in the denotation.
    pub counterexample: Option<Vec<GlobalLabel>>,
}

impl AdequacyReport {
    /// Subset holds and the search was exhaustive.
    pub fn holds(&self) -> bool {
        self.subset && self.exhaustive
    }
}

pub fn check_adequacy(
    p: Program,
    cfg: Config,
    opts: AdequacyOptions,
    explore_opts: &ExploreOptions<'_>,
) -> Result<AdequacyReport, GlobalError> {
    let (sys, s0) = global_compile(p, cfg)?;
    let sys = sys.with_options(opts.system);
    let ex = explore(&sys, &s0, explore_opts)?;
    let roles = sys.result_roles();
    let op: BTreeMap<DistRecord, usize> = ex.restricted_outputs(&roles);
    let operational: OutputSet = op.keys().cloned().collect();
    let denotational = Denoter::new(sys.config(), sys.delta(), opts.denote).run(&Env::new(), sys.program())?;
    let counterexample = op.iter().find(|(r, _)| !denotational.contains(*r)).map(|(_, &i)| ex.trace(i));
    let bigstep = if opts.bigstep {
        Some(bigstep_run(sys.config(), sys.delta(), &normalize(sys.program())?)?)
    } else {
        None
    };
    let sandwich = bigstep.as_ref().map(|b| operational.is_subset(b) && b.is_subset(&denotational));
    Ok(AdequacyReport {
        subset: counterexample.is_none(),
        equal: operational == denotational,
        exhaustive: ex.is_exhaustive(),
        stop: ex.stop(),
        states: ex.len(),
        operational,
        denotational,
        bigstep,
        sandwich,
        counterexample,
    })
}
