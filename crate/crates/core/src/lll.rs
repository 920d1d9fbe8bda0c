//! Per-node programs: the send/receive free monad, its transition relation
//! and endpoint projection from choreographies.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use thiserror::Error;

use crate::hll::{ChannelContext, ChannelId, Expr, Lifted, Program, Role, Var};
use crate::values::{fold, ApplyError, Closure, Term, Value, TT};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LllError {
    #[error("label is not enabled in this state")]
    NotEnabled,
    #[error(transparent)]
    Apply(#[from] ApplyError),
    #[error("variable `{0}` is not bound on this node")]
    UnboundVariable(Var),
    #[error("vector literal has no entry for node {0}")]
    VectorIndex(u32),
    #[error("expected a value, found a function")]
    NotAValue,
    #[error("combiner is not a function")]
    NotAFunction,
}

static NEXT_OPAQUE: AtomicU64 = AtomicU64::new(0);

/// Identity of a continuation. Two handlers with equal tags compute the same
/// function, which lets explored states be compared and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Tag {
    /// Unique per construction; equal only to itself.
    Opaque(u64),
    /// `λm. return (foldl f d m)`.
    Fold(Closure, Value),
    /// The rest of a projected program at `path`, with the node's bindings.
    Site { path: Vec<u32>, env: Vec<(Var, Value)> },
    /// `λm. bind (h m) k`.
    Bind(Box<Tag>, Box<Tag>),
}

impl Tag {
    pub fn opaque() -> Self {
        Tag::Opaque(NEXT_OPAQUE.fetch_add(1, AtomicOrdering::Relaxed))
    }
}

type HandlerFn = dyn Fn(&[Value]) -> Result<NodeProgram, LllError> + Send + Sync;
type KontFn = dyn Fn(Value) -> Result<NodeProgram, LllError> + Send + Sync;

/// Receive continuation of `rcvThen`.
#[derive(Clone)]
pub struct Handler {
    tag: Tag,
    commutative: bool,
    f: Arc<HandlerFn>,
}

impl Handler {
    /// `commutative` declares that the result depends only on the multiset of
    /// received messages.
    pub fn new(
        tag: Tag,
        commutative: bool,
        f: impl Fn(&[Value]) -> Result<NodeProgram, LllError> + Send + Sync + 'static,
    ) -> Self {
        Handler { tag, commutative, f: Arc::new(f) }
    }

    /// `λm. return (foldl f d m)`.
    pub fn fold(f: Closure, default: Value) -> Self {
        let commutative = f.is_fold_commutative();
        let tag = Tag::Fold(f.clone(), default.clone());
        Handler::new(tag, commutative, move |msgs| Ok(NodeProgram::Return(fold(&f, default.clone(), msgs)?)))
    }

    pub fn tag(&self) -> &Tag {
        &self.tag
    }

    pub fn is_commutative(&self) -> bool {
        self.commutative
    }

    pub fn call(&self, msgs: &[Value]) -> Result<NodeProgram, LllError> {
        (self.f)(msgs)
    }
}

impl fmt::Debug for Handler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Handler").field("tag", &self.tag).finish_non_exhaustive()
    }
}

impl PartialEq for Handler {
    fn eq(&self, other: &Self) -> bool {
        self.tag == other.tag
    }
}
impl Eq for Handler {}
impl PartialOrd for Handler {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Handler {
    fn cmp(&self, other: &Self) -> Ordering {
        self.tag.cmp(&other.tag)
    }
}

/// Continuation passed to [`bind`].
#[derive(Clone)]
pub struct Kont {
    tag: Tag,
    f: Arc<KontFn>,
}

impl Kont {
    pub fn new(tag: Tag, f: impl Fn(Value) -> Result<NodeProgram, LllError> + Send + Sync + 'static) -> Self {
        Kont { tag, f: Arc::new(f) }
    }

    pub fn call(&self, v: Value) -> Result<NodeProgram, LllError> {
        (self.f)(v)
    }
}

/// `return v | sendThen c m k | rcvThen c h`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum NodeProgram {
    Return(Value),
    SendThen { chan: ChannelId, msg: Value, next: Box<NodeProgram> },
    RcvThen { chan: ChannelId, handler: Handler },
}

impl NodeProgram {
    pub fn send(chan: &ChannelId, msg: Value) -> Self {
        NodeProgram::SendThen { chan: chan.clone(), msg, next: Box::new(NodeProgram::Return(TT)) }
    }

    pub fn receive(chan: &ChannelId, default: Value, f: Closure) -> Self {
        NodeProgram::RcvThen { chan: chan.clone(), handler: Handler::fold(f, default) }
    }

    pub fn is_return(&self) -> bool {
        matches!(self, NodeProgram::Return(_))
    }

    pub fn returned(&self) -> Option<&Value> {
        match self {
            NodeProgram::Return(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for NodeProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeProgram::Return(v) => write!(f, "return {v}"),
            NodeProgram::SendThen { chan, msg, next } => write!(f, "send {chan} {msg}; {next}"),
            NodeProgram::RcvThen { chan, .. } => write!(f, "receive {chan} …"),
        }
    }
}

/// Replaces every `return v` leaf of `t` by `k v`.
pub fn bind(t: NodeProgram, k: &Kont) -> Result<NodeProgram, LllError> {
    match t {
        NodeProgram::Return(v) => k.call(v),
        NodeProgram::SendThen { chan, msg, next } => {
            Ok(NodeProgram::SendThen { chan, msg, next: Box::new(bind(*next, k)?) })
        }
        NodeProgram::RcvThen { chan, handler } => {
            let tag = Tag::Bind(Box::new(handler.tag.clone()), Box::new(k.tag.clone()));
            let commutative = handler.commutative;
            let k = k.clone();
            let h = Handler::new(tag, commutative, move |m| bind(handler.call(m)?, &k));
            Ok(NodeProgram::RcvThen { chan, handler: h })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeLabel {
    Send { chan: ChannelId, v: Value },
    Receive { chan: ChannelId, msgs: Vec<Value> },
}

impl NodeLabel {
    pub fn chan(&self) -> &ChannelId {
        match self {
            NodeLabel::Send { chan, .. } | NodeLabel::Receive { chan, .. } => chan,
        }
    }
}

/// One transition of a node.
pub fn node_step(t: &NodeProgram, l: &NodeLabel) -> Result<NodeProgram, LllError> {
    match (t, l) {
        (NodeProgram::SendThen { chan, msg, next }, NodeLabel::Send { chan: c, v }) if chan == c && msg == v => {
            Ok((**next).clone())
        }
        (NodeProgram::RcvThen { chan, handler }, NodeLabel::Receive { chan: c, msgs }) if chan == c => {
            handler.call(msgs)
        }
        _ => Err(LllError::NotEnabled),
    }
}

/// Node-local bindings: each variable's component at this node.
pub type NodeEnv = BTreeMap<Var, Value>;

/// Projects an expression onto node `idx` of its role.
pub fn eval_local(e: &Expr, env: &NodeEnv, idx: u32) -> Result<Term, LllError> {
    match e {
        Expr::Var { var, .. } => env.get(var).cloned().map(Term::Val).ok_or_else(|| LllError::UnboundVariable(var.clone())),
        Expr::Lift { term: Lifted::Const(v, _), .. } => Ok(Term::Val(v.clone())),
        Expr::Lift { term: Lifted::Fn(f), .. } => Ok(if f.params().is_empty() {
            Term::Val(crate::values::apply(f, &[])?)
        } else {
            Term::Fun(Closure::new(f.clone()))
        }),
        Expr::Vector { items, .. } => {
            items.get(idx as usize).cloned().map(Term::Val).ok_or(LllError::VectorIndex(idx))
        }
        Expr::App(f, a) => {
            let fv = eval_local(f, env, idx)?;
            match eval_local(a, env, idx)? {
                Term::Val(v) => Ok(fv.apply(v)?),
                Term::Fun(_) => Err(LllError::NotAValue),
            }
        }
    }
}

fn eval_value(e: &Expr, env: &NodeEnv, idx: u32) -> Result<Value, LllError> {
    eval_local(e, env, idx)?.into_value().ok_or(LllError::NotAValue)
}

/// Endpoint projection of `p` onto node `idx` of `role`, with `env` holding
/// the node's share of any free variables.
pub fn project(p: &Arc<Program>, role: &Role, idx: u32, env: &NodeEnv) -> Result<NodeProgram, LllError> {
    compile(p, role, idx, env, &mut Vec::new())
}

fn compile(p: &Arc<Program>, role: &Role, idx: u32, env: &NodeEnv, path: &mut Vec<u32>) -> Result<NodeProgram, LllError> {
    match &**p {
        Program::Ret(fields) => Ok(NodeProgram::Return(match fields.get(role) {
            Some(e) => eval_value(e, env, idx)?,
            None => TT,
        })),
        Program::Let { var, bound, body } => {
            path.push(0);
            let first = compile(bound, role, idx, env, path);
            path.pop();
            let first = first?;
            path.push(1);
            let site = path.clone();
            path.pop();
            let tag = Tag::Site { path: site.clone(), env: env.iter().map(|(k, v)| (k.clone(), v.clone())).collect() };
            let (var, body, role, env) = (var.clone(), body.clone(), role.clone(), env.clone());
            let k = Kont::new(tag, move |v| {
                let mut inner = env.clone();
                inner.insert(var.clone(), v);
                compile(&body, &role, idx, &inner, &mut site.clone())
            });
            bind(first, &k)
        }
        Program::Comm { chan, msg, default, combine } => {
            let sends = msg.role() == role;
            let receives = default.role() == role;
            let rcv = || -> Result<NodeProgram, LllError> {
                let d = eval_value(default, env, idx)?;
                let f = match eval_local(combine, env, idx)? {
                    Term::Fun(c) => c,
                    Term::Val(_) => return Err(LllError::NotAFunction),
                };
                Ok(NodeProgram::receive(chan, d, f))
            };
            match (sends, receives) {
                (true, true) => Ok(NodeProgram::SendThen {
                    chan: chan.clone(),
                    msg: eval_value(msg, env, idx)?,
                    next: Box::new(rcv()?),
                }),
                (true, false) => Ok(NodeProgram::send(chan, eval_value(msg, env, idx)?)),
                (false, true) => rcv(),
                (false, false) => Ok(NodeProgram::Return(TT)),
            }
        }
    }
}

/// The ordering relation `L ∼_R Δ`, closed under prefixes: `labels` must be
/// a prefix of a sequence performing, in `Δ` order, the send and/or receive
/// that `role` owes on each channel.
pub fn respects_order(labels: &[NodeLabel], delta: &ChannelContext, role: &Role) -> bool {
    let mut rest = labels.iter();
    for e in delta.entries() {
        let mut expect = Vec::new();
        if &e.sender == role {
            expect.push(true);
        }
        if &e.receiver == role {
            expect.push(false);
        }
        for is_send in expect {
            let Some(l) = rest.next() else {
                return true;
            };
            let ok = match l {
                NodeLabel::Send { chan, .. } => is_send && chan == &e.chan,
                NodeLabel::Receive { chan, .. } => !is_send && chan == &e.chan,
            };
            if !ok {
                return false;
            }
        }
    }
    rest.next().is_none()
}

/// Every maximal label sequence of `t` together with its return value, where
/// receives on channel `c` range over `inputs(c)`.
pub fn traces(
    t: &NodeProgram,
    inputs: &dyn Fn(&ChannelId) -> Vec<Vec<Value>>,
) -> Result<BTreeSet<(Vec<NodeLabel>, Value)>, LllError> {
    fn go(
        t: &NodeProgram,
        inputs: &dyn Fn(&ChannelId) -> Vec<Vec<Value>>,
        acc: &mut Vec<NodeLabel>,
        out: &mut BTreeSet<(Vec<NodeLabel>, Value)>,
    ) -> Result<(), LllError> {
        match t {
            NodeProgram::Return(v) => {
                out.insert((acc.clone(), v.clone()));
            }
            NodeProgram::SendThen { chan, msg, next } => {
                acc.push(NodeLabel::Send { chan: chan.clone(), v: msg.clone() });
                go(next, inputs, acc, out)?;
                acc.pop();
            }
            NodeProgram::RcvThen { chan, handler } => {
                for m in inputs(chan) {
                    let next = handler.call(&m)?;
                    acc.push(NodeLabel::Receive { chan: chan.clone(), msgs: m });
                    go(&next, inputs, acc, out)?;
                    acc.pop();
                }
            }
        }
        Ok(())
    }
    let mut out = BTreeSet::new();
    go(t, inputs, &mut Vec::new(), &mut out)?;
    Ok(out)
}

/// Trace equivalence over the given receive alphabet.
pub fn trace_equivalent(
    a: &NodeProgram,
    b: &NodeProgram,
    inputs: &dyn Fn(&ChannelId) -> Vec<Vec<Value>>,
) -> Result<bool, LllError> {
    Ok(traces(a, inputs)? == traces(b, inputs)?)
}
