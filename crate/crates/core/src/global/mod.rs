//! The composed asynchronous system: every good node next to every channel.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::channel::{
    can_receive, channel_step, is_finished, receive_options, ChannelError, ChannelLabel, ChannelSpec, ChannelState,
};
use crate::denote::{Config, ConfigError, DenoteError, DistRecord, NodeId};
use crate::hll::{typecheck_prog, ChannelContext, ChannelId, Program, RecordType, Role, TypeEnv, TypeError};
use crate::lll::{node_step, project, LllError, NodeEnv, NodeLabel, NodeProgram};
use crate::values::Value;

mod adequacy;
mod explore;

pub use adequacy::{bigstep_run, check_adequacy, AdequacyOptions, AdequacyReport};
pub use explore::{
    explore, random_walk, successors, Budget, ExploreOptions, Exploration, FrontierMap, Sequential, StopReason, Successors,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GlobalError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Denote(#[from] DenoteError),
    #[error("node program: {0}")]
    Node(#[from] LllError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown channel {0}")]
    UnknownChannel(ChannelId),
    #[error("state is not completed")]
    NotCompleted,
    #[error("program is not in let-comm normal form")]
    NotNormal,
}

/// Knobs that shape which labels [`enabled`] generates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemOptions {
    /// Also generate Byzantine sends to receivers that already received.
    pub byz_after_receive: bool,
    /// For order-insensitive handlers, offer one receive list per multiset.
    pub multiset_receives: bool,
}

impl Default for SystemOptions {
    fn default() -> Self {
        SystemOptions { byz_after_receive: false, multiset_receives: true }
    }
}

/// The static part of a compiled program: configuration, `Δ` and the
/// per-channel parameters.
#[derive(Debug, Clone)]
pub struct System {
    program: Arc<Program>,
    cfg: Config,
    delta: ChannelContext,
    output_type: RecordType,
    specs: BTreeMap<ChannelId, ChannelSpec>,
    opts: SystemOptions,
}

impl System {
    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn config(&self) -> &Config {
        &self.cfg
    }

    pub fn delta(&self) -> &ChannelContext {
        &self.delta
    }

    /// Roles present in the program's result.
    pub fn output_type(&self) -> &RecordType {
        &self.output_type
    }

    pub fn result_roles(&self) -> BTreeSet<Role> {
        self.output_type.keys().cloned().collect()
    }

    pub fn spec(&self, c: &ChannelId) -> Result<&ChannelSpec, GlobalError> {
        self.specs.get(c).ok_or_else(|| GlobalError::UnknownChannel(c.clone()))
    }

    pub fn options(&self) -> SystemOptions {
        self.opts
    }

    pub fn with_options(mut self, opts: SystemOptions) -> Self {
        self.opts = opts;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct GlobalState {
    pub nodes: BTreeMap<NodeId, NodeProgram>,
    pub channels: BTreeMap<ChannelId, ChannelState>,
}

impl GlobalState {
    /// Every node has reduced to a return value.
    pub fn is_completed(&self) -> bool {
        self.nodes.values().all(NodeProgram::is_return)
    }

    /// Dedup key; see [`ChannelState::canonical`].
    pub fn canonical(&self) -> GlobalState {
        GlobalState {
            nodes: self.nodes.clone(),
            channels: self.channels.iter().map(|(c, s)| (c.clone(), s.canonical())).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GlobalLabel {
    Send { node: NodeId, chan: ChannelId, v: Value },
    Byz { chan: ChannelId, from: NodeId, to: NodeId, v: Value },
    Receive { node: NodeId, chan: ChannelId, msgs: Vec<Value> },
}

impl GlobalLabel {
    pub fn chan(&self) -> &ChannelId {
        match self {
            GlobalLabel::Send { chan, .. } | GlobalLabel::Byz { chan, .. } | GlobalLabel::Receive { chan, .. } => chan,
        }
    }

    /// The node that moves, if any.
    pub fn node(&self) -> Option<&NodeId> {
        match self {
            GlobalLabel::Send { node, .. } | GlobalLabel::Receive { node, .. } => Some(node),
            GlobalLabel::Byz { .. } => None,
        }
    }

    pub fn node_label(&self) -> Option<NodeLabel> {
        match self {
            GlobalLabel::Send { chan, v, .. } => Some(NodeLabel::Send { chan: chan.clone(), v: v.clone() }),
            GlobalLabel::Receive { chan, msgs, .. } => {
                Some(NodeLabel::Receive { chan: chan.clone(), msgs: msgs.clone() })
            }
            GlobalLabel::Byz { .. } => None,
        }
    }

    pub fn channel_label(&self) -> ChannelLabel {
        match self {
            GlobalLabel::Send { node, v, .. } => ChannelLabel::Send { from: node.clone(), v: v.clone() },
            GlobalLabel::Byz { from, to, v, .. } => ChannelLabel::ByzSend { from: from.clone(), to: to.clone(), v: v.clone() },
            GlobalLabel::Receive { node, msgs, .. } => ChannelLabel::Receive { to: node.clone(), msgs: msgs.clone() },
        }
    }
}

impl fmt::Display for GlobalLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GlobalLabel::Send { node, chan, v } => write!(f, "{node} send {chan} {v:?}"),
            GlobalLabel::Byz { chan, from, to, v } => write!(f, "{from} byz {chan} -> {to} {v:?}"),
            GlobalLabel::Receive { node, chan, msgs } => write!(f, "{node} receive {chan} {msgs:?}"),
        }
    }
}

/// Compiles a closed program: every good node gets its projection, every
/// channel of `Δ` starts empty.
pub fn global_compile(p: Program, cfg: Config) -> Result<(System, GlobalState), GlobalError> {
    let roles: BTreeSet<Role> = cfg.roles().map(|(r, _)| r.clone()).collect();
    let (delta, output_type) = typecheck_prog(&TypeEnv::new(), &roles, &p)?;
    let program = Arc::new(p);
    let mut nodes = BTreeMap::new();
    for r in &roles {
        for id in cfg.good_ids(r)? {
            let t = project(&program, r, id.index, &NodeEnv::new())?;
            nodes.insert(id, t);
        }
    }
    let mut specs = BTreeMap::new();
    let mut channels = BTreeMap::new();
    for e in delta.entries() {
        let spec = ChannelSpec::new(e, &cfg)?;
        channels.insert(e.chan.clone(), spec.initial());
        specs.insert(e.chan.clone(), spec);
    }
    let sys = System { program, cfg, delta, output_type, specs, opts: SystemOptions::default() };
    Ok((sys, GlobalState { nodes, channels }))
}

/// Steps the named node (if any) and channel together.
pub fn global_step(sys: &System, s: &GlobalState, l: &GlobalLabel) -> Result<GlobalState, GlobalError> {
    let c = l.chan();
    let spec = sys.spec(c)?;
    let cs = s.channels.get(c).ok_or_else(|| GlobalError::UnknownChannel(c.clone()))?;
    let mut next = s.clone();
    if let (Some(n), Some(nl)) = (l.node(), l.node_label()) {
        let t = s.nodes.get(n).ok_or_else(|| GlobalError::UnknownNode(n.clone()))?;
        next.nodes.insert(n.clone(), node_step(t, &nl)?);
    }
    next.channels.insert(c.clone(), channel_step(spec, cs, &l.channel_label())?);
    Ok(next)
}

/// Labels enabled at `s`, in a fixed order: node labels by node, then
/// Byzantine sends by channel.
pub fn enabled(sys: &System, s: &GlobalState) -> Result<Vec<GlobalLabel>, GlobalError> {
    let mut out = Vec::new();
    for (id, t) in &s.nodes {
        match t {
            NodeProgram::Return(_) => {}
            NodeProgram::SendThen { chan, msg, .. } => {
                let spec = sys.spec(chan)?;
                let cs = &s.channels[chan];
                let cl = ChannelLabel::Send { from: id.clone(), v: msg.clone() };
                if channel_step(spec, cs, &cl).is_ok() {
                    out.push(GlobalLabel::Send { node: id.clone(), chan: chan.clone(), v: msg.clone() });
                }
            }
            NodeProgram::RcvThen { chan, handler } => {
                let spec = sys.spec(chan)?;
                let cs = &s.channels[chan];
                if can_receive(spec, cs, id) {
                    let multisets = sys.opts.multiset_receives && handler.is_commutative();
                    for msgs in receive_options(spec, cs, id, multisets) {
                        out.push(GlobalLabel::Receive { node: id.clone(), chan: chan.clone(), msgs });
                    }
                }
            }
        }
    }
    for (c, spec) in &sys.specs {
        let cs = &s.channels[c];
        if spec.byz_senders.is_empty() {
            continue;
        }
        let universe = spec.msg_type.enumerate();
        for to in &spec.receivers {
            if cs.fr.contains(to) && !sys.opts.byz_after_receive {
                continue;
            }
            let sent = cs.fb.get(to);
            for from in &spec.byz_senders {
                if sent.is_some_and(|s| s.contains(from)) {
                    continue;
                }
                for v in &universe {
                    out.push(GlobalLabel::Byz { chan: c.clone(), from: from.clone(), to: to.clone(), v: v.clone() });
                }
            }
        }
    }
    Ok(out)
}

/// Per-role vectors of returned values, ordered by node index.
pub fn extract(s: &GlobalState) -> Result<DistRecord, GlobalError> {
    let mut out = DistRecord::new();
    for (id, t) in &s.nodes {
        let v = t.returned().ok_or(GlobalError::NotCompleted)?;
        out.entry(id.role.clone()).or_default().push(v.clone());
    }
    Ok(out)
}

/// Whether every channel is finished.
pub fn channels_finished(sys: &System, s: &GlobalState) -> bool {
    sys.specs.iter().all(|(c, spec)| is_finished(spec, &s.channels[c]))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Component {
    Node(NodeId),
    Channel(ChannelId),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum LocalLabel {
    Node(NodeLabel),
    Channel(ChannelLabel),
}

/// Every component of the system.
pub fn components(sys: &System, s: &GlobalState) -> Vec<Component> {
    let nodes = s.nodes.keys().cloned().map(Component::Node);
    nodes.chain(sys.specs.keys().cloned().map(Component::Channel)).collect()
}

/// The subsequence of `labels` that moves component `i`, as local labels.
pub fn project_labels(labels: &[GlobalLabel], i: &Component) -> Vec<LocalLabel> {
    labels
        .iter()
        .filter_map(|l| match i {
            Component::Node(n) if l.node() == Some(n) => l.node_label().map(LocalLabel::Node),
            Component::Channel(c) if l.chan() == c => Some(LocalLabel::Channel(l.channel_label())),
            _ => None,
        })
        .collect()
}

/// Each channel's actions, contiguous and in `Δ` order.
pub fn align(delta: &ChannelContext, labels: &[GlobalLabel]) -> Vec<GlobalLabel> {
    let mut out = Vec::with_capacity(labels.len());
    for c in delta.channels() {
        out.extend(labels.iter().filter(|l| l.chan() == c).cloned());
    }
    out
}

/// Outcome of replaying a label sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Replay {
    Permissible(GlobalState),
    /// The label at `index` was not enabled.
    Blocked { index: usize, error: GlobalError },
}

impl Replay {
    pub fn is_permissible(&self) -> bool {
        matches!(self, Replay::Permissible(_))
    }

    pub fn state(&self) -> Option<&GlobalState> {
        match self {
            Replay::Permissible(s) => Some(s),
            Replay::Blocked { .. } => None,
        }
    }
}

pub fn is_permissible(sys: &System, s0: &GlobalState, labels: &[GlobalLabel]) -> Replay {
    let mut s = s0.clone();
    for (index, l) in labels.iter().enumerate() {
        match global_step(sys, &s, l) {
            Ok(n) => s = n,
            Err(error) => return Replay::Blocked { index, error },
        }
    }
    Replay::Permissible(s)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ComponentState {
    Node(NodeProgram),
    Channel(ChannelState),
}

pub fn component_state(s: &GlobalState, i: &Component) -> Option<ComponentState> {
    match i {
        Component::Node(n) => s.nodes.get(n).cloned().map(ComponentState::Node),
        Component::Channel(c) => s.channels.get(c).cloned().map(ComponentState::Channel),
    }
}

/// Replays local labels on one component in isolation.
pub fn replay_component(
    sys: &System,
    s0: &GlobalState,
    i: &Component,
    labels: &[LocalLabel],
) -> Result<ComponentState, GlobalError> {
    match i {
        Component::Node(n) => {
            let mut t = s0.nodes.get(n).cloned().ok_or_else(|| GlobalError::UnknownNode(n.clone()))?;
            for l in labels {
                let LocalLabel::Node(l) = l else {
                    return Err(LllError::NotEnabled.into());
                };
                t = node_step(&t, l)?;
            }
            Ok(ComponentState::Node(t))
        }
        Component::Channel(c) => {
            let spec = sys.spec(c)?;
            let mut st = s0.channels.get(c).cloned().ok_or_else(|| GlobalError::UnknownChannel(c.clone()))?;
            for l in labels {
                let LocalLabel::Channel(l) = l else {
                    return Err(ChannelError::NotEnabled("node label on a channel").into());
                };
                st = channel_step(spec, &st, l)?;
            }
            Ok(ComponentState::Channel(st))
        }
    }
}

/// A component whose isolated replay disagrees with the global run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionFailure {
    /// `None` when the global run itself is blocked.
    pub component: Option<Component>,
    pub error: Option<Box<GlobalError>>,
}

/// Replays the projection of `labels` on every component and compares with
/// the final global state.
pub fn check_decomposition(sys: &System, s0: &GlobalState, labels: &[GlobalLabel]) -> Result<(), DecompositionFailure> {
    let fin = match is_permissible(sys, s0, labels) {
        Replay::Permissible(s) => s,
        Replay::Blocked { error, .. } => {
            return Err(DecompositionFailure { component: None, error: Some(Box::new(error)) })
        }
    };
    for i in components(sys, s0) {
        match replay_component(sys, s0, &i, &project_labels(labels, &i)) {
            Ok(st) if Some(&st) == component_state(&fin, &i).as_ref() => {}
            Ok(_) => return Err(DecompositionFailure { component: Some(i), error: None }),
            Err(e) => return Err(DecompositionFailure { component: Some(i), error: Some(Box::new(e)) }),
        }
    }
    Ok(())
}

/// A random interleaving of `labels` that keeps the relative order of the
/// labels of every component. `choose(k)` picks one of `k` candidates.
pub fn restitch(labels: &[GlobalLabel], choose: &mut dyn FnMut(usize) -> usize) -> Vec<GlobalLabel> {
    let touches = |l: &GlobalLabel| {
        let mut v = alloc::vec![Component::Channel(l.chan().clone())];
        if let Some(n) = l.node() {
            v.push(Component::Node(n.clone()));
        }
        v
    };
    // per component, the queue of label positions still to be emitted
    let mut queues: BTreeMap<Component, alloc::collections::VecDeque<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        for c in touches(l) {
            queues.entry(c).or_default().push_back(i);
        }
    }
    let mut out = Vec::with_capacity(labels.len());
    let mut done = alloc::vec![false; labels.len()];
    while out.len() < labels.len() {
        let ready: Vec<usize> = (0..labels.len())
            .filter(|&i| !done[i] && touches(&labels[i]).iter().all(|c| queues[c].front() == Some(&i)))
            .collect();
        let pick = ready[choose(ready.len()) % ready.len()];
        for c in touches(&labels[pick]) {
            queues.get_mut(&c).map(|q| q.pop_front());
        }
        done[pick] = true;
        out.push(labels[pick].clone());
    }
    out
}

/// Checks that `stitched` has the same projections as `labels` and that it
/// replays globally to the same state.
pub fn check_composition(
    sys: &System,
    s0: &GlobalState,
    labels: &[GlobalLabel],
    stitched: &[GlobalLabel],
) -> Result<(), DecompositionFailure> {
    for i in components(sys, s0) {
        if project_labels(labels, &i) != project_labels(stitched, &i) {
            return Err(DecompositionFailure { component: Some(i), error: None });
        }
    }
    let a = is_permissible(sys, s0, labels);
    let b = is_permissible(sys, s0, stitched);
    match (a, b) {
        (Replay::Permissible(x), Replay::Permissible(y)) if x == y => Ok(()),
        (_, Replay::Blocked { index, error }) => Err(DecompositionFailure {
            component: Some(Component::Channel(stitched[index].chan().clone())),
            error: Some(Box::new(error)),
        }),
        (Replay::Blocked { error, .. }, _) => Err(DecompositionFailure { component: None, error: Some(Box::new(error)) }),
        _ => Err(DecompositionFailure { component: None, error: None }),
    }
}
