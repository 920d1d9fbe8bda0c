//! The choreographic language: roles, channels, expressions and programs.
//!
//! A program is a straight-line sequence of communications joined by `let` and
//! terminated by `ret`. Every expression is situated at exactly one role.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::values::{FnRef, Value, ValueType};

mod iterate;
mod normalize;
mod typing;

pub use iterate::{concat, iter, ProtocolBody};
pub use normalize::{is_normal, normalize, subst_prog};
pub use typing::{
    typecheck_expr, typecheck_prog, ChannelContext, ChannelEntry, ExprType, RecordType, TypeEnv,
    TypeError,
};

/// A class of nodes running the same code.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Role(Arc<str>);

impl Role {
    pub fn new(name: &str) -> Self {
        Role(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A distributed variable. `fresh` distinguishes copies made by iteration.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    name: Arc<str>,
    fresh: u32,
}

impl Var {
    pub fn new(name: &str) -> Self {
        Var { name: Arc::from(name), fresh: 0 }
    }

    pub fn with_fresh(name: &str, fresh: u32) -> Self {
        Var { name: Arc::from(name), fresh }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn fresh(&self) -> u32 {
        self.fresh
    }

    pub(crate) fn shifted(&self, by: u32) -> Self {
        Var { name: self.name.clone(), fresh: self.fresh + by }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.fresh == 0 {
            f.write_str(&self.name)
        } else {
            write!(f, "{}#{}", self.name, self.fresh)
        }
    }
}

/// A single-use channel: a base name plus the iteration index it was
/// generated for. Rendered as `name#index`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChannelId {
    name: Arc<str>,
    fresh: u32,
}

impl ChannelId {
    pub fn new(name: &str) -> Self {
        ChannelId { name: Arc::from(name), fresh: 0 }
    }

    pub fn with_fresh(name: &str, fresh: u32) -> Self {
        ChannelId { name: Arc::from(name), fresh }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn fresh(&self) -> u32 {
        self.fresh
    }

    /// Inverse of the `Display` rendering.
    pub fn parse(s: &str) -> Option<Self> {
        let (name, idx) = s.rsplit_once('#')?;
        if name.is_empty() {
            return None;
        }
        Some(ChannelId::with_fresh(name, idx.parse().ok()?))
    }

    pub(crate) fn shifted(&self, by: u32) -> Self {
        ChannelId { name: self.name.clone(), fresh: self.fresh + by }
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.name, self.fresh)
    }
}

/// A lifted host term: a typed constant or a registered function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Lifted {
    Const(Value, ValueType),
    Fn(FnRef),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Var { var: Var, at: Role },
    Lift { term: Lifted, at: Role },
    /// One literal per good node of `at`; meta-level only.
    Vector { items: Vec<Value>, ty: ValueType, at: Role },
    App(Arc<Expr>, Arc<Expr>),
}

impl Expr {
    pub fn var(var: &Var, at: &Role) -> Self {
        Expr::Var { var: var.clone(), at: at.clone() }
    }

    pub fn constant(v: Value, ty: ValueType, at: &Role) -> Self {
        Expr::Lift { term: Lifted::Const(v, ty), at: at.clone() }
    }

    pub fn func(f: &FnRef, at: &Role) -> Self {
        Expr::Lift { term: Lifted::Fn(f.clone()), at: at.clone() }
    }

    pub fn vector(items: Vec<Value>, ty: ValueType, at: &Role) -> Self {
        Expr::Vector { items, ty, at: at.clone() }
    }

    pub fn app(self, arg: Expr) -> Self {
        Expr::App(Arc::new(self), Arc::new(arg))
    }

    /// `f a1 a2 ...` with `f` lifted at `at`.
    pub fn call(f: &FnRef, at: &Role, args: impl IntoIterator<Item = Expr>) -> Self {
        args.into_iter().fold(Expr::func(f, at), Expr::app)
    }

    /// The role this expression is situated at (taken from the head).
    pub fn role(&self) -> &Role {
        match self {
            Expr::Var { at, .. } | Expr::Lift { at, .. } | Expr::Vector { at, .. } => at,
            Expr::App(f, _) => f.role(),
        }
    }

    pub fn free_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Expr::Var { var, .. } => {
                out.insert(var.clone());
            }
            Expr::Lift { .. } | Expr::Vector { .. } => {}
            Expr::App(f, a) => {
                f.free_vars(out);
                a.free_vars(out);
            }
        }
    }

    pub(crate) fn subst(&self, x: &Var, with: &BTreeMap<Role, Expr>) -> Result<Expr, TypeError> {
        Ok(match self {
            Expr::Var { var, at } if var == x => match with.get(at) {
                Some(e) => e.clone(),
                None => return Err(TypeError::RoleNotInRecord { var: x.clone(), role: at.clone() }),
            },
            Expr::App(f, a) => Expr::App(Arc::new(f.subst(x, with)?), Arc::new(a.subst(x, with)?)),
            other => other.clone(),
        })
    }

    pub(crate) fn rename(&self, shift: u32) -> Expr {
        match self {
            Expr::Var { var, at } => Expr::Var { var: var.shifted(shift), at: at.clone() },
            Expr::App(f, a) => Expr::App(Arc::new(f.rename(shift)), Arc::new(a.rename(shift))),
            other => other.clone(),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var { var, at } => write!(f, "{var}@{at}"),
            Expr::Lift { term: Lifted::Const(v, _), at } => write!(f, "⌈{v}⌉@{at}"),
            Expr::Lift { term: Lifted::Fn(func), at } => write!(f, "⌈{}⌉@{at}", func.name()),
            Expr::Vector { items, at, .. } => {
                f.write_str("[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "]@{at}")
            }
            Expr::App(func, arg) => match &**arg {
                Expr::App(..) => write!(f, "{func} ({arg})"),
                _ => write!(f, "{func} {arg}"),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Program {
    Ret(BTreeMap<Role, Expr>),
    Let { var: Var, bound: Arc<Program>, body: Arc<Program> },
    /// `comm c msg default combine`: the sender role is the role of `msg`, the
    /// receiver role that of `default` and `combine`.
    Comm { chan: ChannelId, msg: Expr, default: Expr, combine: Expr },
}

impl Program {
    pub fn ret(fields: impl IntoIterator<Item = (Role, Expr)>) -> Self {
        Program::Ret(fields.into_iter().collect())
    }

    pub fn let_(var: &Var, bound: Program, body: Program) -> Self {
        Program::Let { var: var.clone(), bound: Arc::new(bound), body: Arc::new(body) }
    }

    pub fn comm(chan: &ChannelId, msg: Expr, default: Expr, combine: Expr) -> Self {
        Program::Comm { chan: chan.clone(), msg, default, combine }
    }

    /// Channels in program order.
    pub fn channels(&self) -> Vec<ChannelId> {
        let mut out = Vec::new();
        self.collect_channels(&mut out);
        out
    }

    fn collect_channels(&self, out: &mut Vec<ChannelId>) {
        match self {
            Program::Ret(_) => {}
            Program::Let { bound, body, .. } => {
                bound.collect_channels(out);
                body.collect_channels(out);
            }
            Program::Comm { chan, .. } => out.push(chan.clone()),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<Var>) {
        match self {
            Program::Ret(fields) => fields.values().for_each(|e| e.free_vars(out)),
            Program::Let { var, bound, body } => {
                bound.collect_free(out);
                let mut inner = BTreeSet::new();
                body.collect_free(&mut inner);
                inner.remove(var);
                out.extend(inner);
            }
            Program::Comm { msg, default, combine, .. } => {
                msg.free_vars(out);
                default.free_vars(out);
                combine.free_vars(out);
            }
        }
    }

    /// Variables bound anywhere in the program.
    pub fn bound_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_bound(&mut out);
        out
    }

    fn collect_bound(&self, out: &mut BTreeSet<Var>) {
        if let Program::Let { var, bound, body } = self {
            out.insert(var.clone());
            bound.collect_bound(out);
            body.collect_bound(out);
        }
    }

    /// Roles mentioned anywhere in the program.
    pub fn roles(&self) -> BTreeSet<Role> {
        fn expr_roles(e: &Expr, out: &mut BTreeSet<Role>) {
            match e {
                Expr::App(f, a) => {
                    expr_roles(f, out);
                    expr_roles(a, out);
                }
                other => {
                    out.insert(other.role().clone());
                }
            }
        }
        fn go(p: &Program, out: &mut BTreeSet<Role>) {
            match p {
                Program::Ret(fields) => {
                    for (r, e) in fields {
                        out.insert(r.clone());
                        expr_roles(e, out);
                    }
                }
                Program::Let { bound, body, .. } => {
                    go(bound, out);
                    go(body, out);
                }
                Program::Comm { msg, default, combine, .. } => {
                    expr_roles(msg, out);
                    expr_roles(default, out);
                    expr_roles(combine, out);
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut out);
        out
    }

    pub(crate) fn rename(&self, shift: u32) -> Program {
        match self {
            Program::Ret(fields) => {
                Program::Ret(fields.iter().map(|(r, e)| (r.clone(), e.rename(shift))).collect())
            }
            Program::Let { var, bound, body } => Program::Let {
                var: var.shifted(shift),
                bound: Arc::new(bound.rename(shift)),
                body: Arc::new(body.rename(shift)),
            },
            Program::Comm { chan, msg, default, combine } => Program::Comm {
                chan: chan.shifted(shift),
                msg: msg.rename(shift),
                default: default.rename(shift),
                combine: combine.rename(shift),
            },
        }
    }

    /// Wraps a program with `let x := ret {R ↦ [v...]}` bindings so that it
    /// becomes closed; the literals hold one value per good node.
    pub fn with_inputs(self, inputs: impl IntoIterator<Item = (Var, Vec<(Role, Vec<Value>, ValueType)>)>) -> Program {
        let inputs: Vec<_> = inputs.into_iter().collect();
        inputs.into_iter().rev().fold(self, |body, (var, fields)| {
            let ret = Program::ret(
                fields.into_iter().map(|(r, items, ty)| (r.clone(), Expr::vector(items, ty, &r))),
            );
            Program::let_(&var, ret, body)
        })
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Program::Ret(fields) => {
                f.write_str("ret {")?;
                for (i, (r, e)) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{r} ↦ {e}")?;
                }
                f.write_str("}")
            }
            Program::Let { var, bound, body } => write!(f, "let {var} := {bound} in\n{body}"),
            Program::Comm { chan, msg, default, combine } => {
                write!(f, "comm {chan} ({msg}) ({default}) ({combine})")
            }
        }
    }
}

pub(crate) fn fresh_name(prefix: &str, n: u32) -> String {
    alloc::format!("{prefix}{n}")
}
