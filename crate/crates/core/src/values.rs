//! Finite value universe and the registered pure-function layer.
//!
//! Both semantics evaluate the same [`PureFn`] bodies over the same [`Value`]s,
//! so a protocol's arithmetic cannot drift between the denotational enumerator
//! and the operational simulator.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use thiserror::Error;

/// A finitely enumerable type.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ValueType {
    Unit,
    Bool,
    /// Naturals `0..=max`.
    Nat { max: u32 },
    Option(Box<ValueType>),
    Pair(Box<ValueType>, Box<ValueType>),
}

impl ValueType {
    pub fn nat(max: u32) -> Self {
        ValueType::Nat { max }
    }

    pub fn option(inner: ValueType) -> Self {
        ValueType::Option(Box::new(inner))
    }

    pub fn pair(left: ValueType, right: ValueType) -> Self {
        ValueType::Pair(Box::new(left), Box::new(right))
    }

    /// Number of inhabitants.
    pub fn size(&self) -> usize {
        match self {
            ValueType::Unit => 1,
            ValueType::Bool => 2,
            ValueType::Nat { max } => *max as usize + 1,
            ValueType::Option(inner) => 1 + inner.size(),
            ValueType::Pair(l, r) => l.size() * r.size(),
        }
    }

    /// Every inhabitant exactly once, in canonical order: `None` before `Some`,
    /// `false` before `true`, naturals ascending, pairs lexicographic.
    pub fn enumerate(&self) -> Vec<Value> {
        match self {
            ValueType::Unit => vec![Value::Unit],
            ValueType::Bool => vec![Value::Bool(false), Value::Bool(true)],
            ValueType::Nat { max } => (0..=*max).map(Value::Nat).collect(),
            ValueType::Option(inner) => core::iter::once(Value::none())
                .chain(inner.enumerate().into_iter().map(Value::some))
                .collect(),
            ValueType::Pair(l, r) => {
                let rights = r.enumerate();
                let mut out = Vec::with_capacity(self.size());
                for a in l.enumerate() {
                    for b in &rights {
                        out.push(Value::pair(a.clone(), b.clone()));
                    }
                }
                out
            }
        }
    }

    /// Whether `v` inhabits this type.
    pub fn contains(&self, v: &Value) -> bool {
        match (self, v) {
            (ValueType::Unit, Value::Unit) => true,
            (ValueType::Bool, Value::Bool(_)) => true,
            (ValueType::Nat { max }, Value::Nat(n)) => n <= max,
            (ValueType::Option(_), Value::Opt(None)) => true,
            (ValueType::Option(inner), Value::Opt(Some(x))) => inner.contains(x),
            (ValueType::Pair(lt, rt), Value::Pair(l, r)) => lt.contains(l) && rt.contains(r),
            _ => false,
        }
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueType::Unit => f.write_str("unit"),
            ValueType::Bool => f.write_str("bool"),
            ValueType::Nat { max } => write!(f, "nat<={max}"),
            ValueType::Option(inner) => write!(f, "option {inner}"),
            ValueType::Pair(l, r) => write!(f, "({l} * {r})"),
        }
    }
}

/// An inhabitant of a [`ValueType`].
///
/// The derived ordering agrees with [`ValueType::enumerate`] on values of the
/// same type.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Unit,
    Bool(bool),
    Nat(u32),
    Opt(Option<Box<Value>>),
    Pair(Box<Value>, Box<Value>),
}

pub const TT: Value = Value::Unit;
pub const TOP: Value = Value::Bool(true);
pub const BOT: Value = Value::Bool(false);

impl Value {
    pub fn some(v: Value) -> Self {
        Value::Opt(Some(Box::new(v)))
    }

    pub fn none() -> Self {
        Value::Opt(None)
    }

    pub fn pair(l: Value, r: Value) -> Self {
        Value::Pair(Box::new(l), Box::new(r))
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_nat(&self) -> Option<u32> {
        match self {
            Value::Nat(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_option(&self) -> Option<Option<&Value>> {
        match self {
            Value::Opt(o) => Some(o.as_deref()),
            _ => None,
        }
    }

    pub fn as_pair(&self) -> Option<(&Value, &Value)> {
        match self {
            Value::Pair(l, r) => Some((l, r)),
            _ => None,
        }
    }

    // Accessors for function bodies; arguments are type-checked before a body runs.
    pub(crate) fn bool_arg(&self) -> bool {
        self.as_bool().expect("argument checked as bool")
    }

    pub(crate) fn nat_arg(&self) -> u32 {
        self.as_nat().expect("argument checked as nat")
    }

    pub(crate) fn pair_arg(&self) -> (&Value, &Value) {
        self.as_pair().expect("argument checked as pair")
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Unit => f.write_str("tt"),
            Value::Bool(true) => f.write_str("⊤"),
            Value::Bool(false) => f.write_str("⊥"),
            Value::Nat(n) => write!(f, "{n}"),
            Value::Opt(None) => f.write_str("None"),
            Value::Opt(Some(v)) => write!(f, "Some {v}"),
            Value::Pair(l, r) => write!(f, "({l}, {r})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApplyError {
    #[error("`{name}` expects {expected} argument(s), got {got}")]
    Arity { name: String, expected: usize, got: usize },
    #[error("argument {index} of `{name}` does not inhabit {expected}")]
    ArgumentType { name: String, index: usize, expected: ValueType },
    #[error("`{name}` returned a value outside {expected}")]
    ResultType { name: String, expected: ValueType },
    #[error("applied a non-function value")]
    NotAFunction,
    #[error("fold combiner must take exactly (accumulator, message), `{name}` has {remaining} parameter(s) left")]
    NotACombiner { name: String, remaining: usize },
}

type Body = dyn Fn(&[Value]) -> Value + Send + Sync;

/// A named, total, deterministic function over values.
pub struct PureFn {
    name: String,
    params: Vec<ValueType>,
    ret: ValueType,
    fold_commutative: bool,
    body: Box<Body>,
}

impl PureFn {
    pub fn new(
        name: impl Into<String>,
        params: Vec<ValueType>,
        ret: ValueType,
        body: impl Fn(&[Value]) -> Value + Send + Sync + 'static,
    ) -> Self {
        PureFn {
            name: name.into(),
            params,
            ret,
            fold_commutative: false,
            body: Box::new(body),
        }
    }

    /// Declares that folding this function (after any leading partial
    /// arguments) gives the same result for every ordering of the messages.
    pub fn fold_commutative(mut self) -> Self {
        self.fold_commutative = true;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[ValueType] {
        &self.params
    }

    pub fn ret(&self) -> &ValueType {
        &self.ret
    }

    pub fn is_fold_commutative(&self) -> bool {
        self.fold_commutative
    }

    fn check_arg(&self, index: usize, v: &Value) -> Result<(), ApplyError> {
        if self.params[index].contains(v) {
            Ok(())
        } else {
            Err(ApplyError::ArgumentType {
                name: self.name.clone(),
                index,
                expected: self.params[index].clone(),
            })
        }
    }

    fn call(&self, args: &[Value]) -> Result<Value, ApplyError> {
        let out = (self.body)(args);
        if self.ret.contains(&out) {
            Ok(out)
        } else {
            Err(ApplyError::ResultType { name: self.name.clone(), expected: self.ret.clone() })
        }
    }
}

impl fmt::Debug for PureFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PureFn")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("ret", &self.ret)
            .field("fold_commutative", &self.fold_commutative)
            .finish_non_exhaustive()
    }
}

/// Shared handle to a registered function. Identity is the function name.
#[derive(Debug, Clone)]
pub struct FnRef(Arc<PureFn>);

impl FnRef {
    pub fn name(&self) -> &str {
        &self.0.name
    }
}

impl core::ops::Deref for FnRef {
    type Target = PureFn;
    fn deref(&self) -> &PureFn {
        &self.0
    }
}

impl PartialEq for FnRef {
    fn eq(&self, other: &Self) -> bool {
        self.0.name == other.0.name
    }
}
impl Eq for FnRef {}
impl PartialOrd for FnRef {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for FnRef {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.name.cmp(&other.0.name)
    }
}

/// Applies `f` to a full argument list.
pub fn apply(f: &FnRef, args: &[Value]) -> Result<Value, ApplyError> {
    if args.len() != f.params.len() {
        return Err(ApplyError::Arity {
            name: f.name.clone(),
            expected: f.params.len(),
            got: args.len(),
        });
    }
    for (i, a) in args.iter().enumerate() {
        f.check_arg(i, a)?;
    }
    f.call(args)
}

/// A partial application of a registered function.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Closure {
    func: FnRef,
    args: Vec<Value>,
}

impl Closure {
    pub fn new(func: FnRef) -> Self {
        Closure { func, args: Vec::new() }
    }

    pub fn func(&self) -> &FnRef {
        &self.func
    }

    pub fn applied(&self) -> &[Value] {
        &self.args
    }

    pub fn remaining(&self) -> usize {
        self.func.params.len() - self.args.len()
    }

    /// Supplies the next argument; returns a value once saturated.
    pub fn apply(&self, arg: Value) -> Result<Term, ApplyError> {
        if self.remaining() == 0 {
            return Err(ApplyError::NotAFunction);
        }
        self.func.check_arg(self.args.len(), &arg)?;
        let mut args = self.args.clone();
        args.push(arg);
        if args.len() == self.func.params.len() {
            self.func.call(&args).map(Term::Val)
        } else {
            Ok(Term::Fun(Closure { func: self.func.clone(), args }))
        }
    }

    /// Whether folding this closure is insensitive to message order.
    pub fn is_fold_commutative(&self) -> bool {
        self.func.fold_commutative && self.remaining() == 2
    }
}

/// Result of evaluating an expression: a first-order value or a partially
/// applied function.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Term {
    Val(Value),
    Fun(Closure),
}

impl Term {
    pub fn apply(&self, arg: Value) -> Result<Term, ApplyError> {
        match self {
            Term::Fun(c) => c.apply(arg),
            Term::Val(_) => Err(ApplyError::NotAFunction),
        }
    }

    pub fn into_value(self) -> Option<Value> {
        match self {
            Term::Val(v) => Some(v),
            Term::Fun(_) => None,
        }
    }

    pub fn as_closure(&self) -> Option<&Closure> {
        match self {
            Term::Fun(c) => Some(c),
            Term::Val(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Val(v) => write!(f, "{v}"),
            Term::Fun(c) => {
                f.write_str(c.func.name())?;
                for a in &c.args {
                    write!(f, " {a}")?;
                }
                Ok(())
            }
        }
    }
}

/// Left fold of a combiner `(acc, msg) -> acc` over `msgs`.
pub fn fold(f: &Closure, default: Value, msgs: &[Value]) -> Result<Value, ApplyError> {
    if f.remaining() != 2 {
        return Err(ApplyError::NotACombiner {
            name: f.func.name.clone(),
            remaining: f.remaining(),
        });
    }
    let k = f.args.len();
    let mut args = f.args.clone();
    args.push(Value::Unit);
    args.push(Value::Unit);
    let mut acc = default;
    for m in msgs {
        f.func.check_arg(k, &acc)?;
        f.func.check_arg(k + 1, m)?;
        args[k] = acc;
        args[k + 1] = m.clone();
        acc = f.func.call(&args)?;
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("function `{0}` is already registered")]
    Duplicate(String),
    #[error("function `{0}` is not registered")]
    Unknown(String),
}

/// Name-indexed function table shared by both semantics.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    fns: BTreeMap<String, FnRef>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, f: PureFn) -> Result<FnRef, RegistryError> {
        if self.fns.contains_key(&f.name) {
            return Err(RegistryError::Duplicate(f.name));
        }
        let r = FnRef(Arc::new(f));
        self.fns.insert(r.name().into(), r.clone());
        Ok(r)
    }

    pub fn get(&self, name: &str) -> Result<FnRef, RegistryError> {
        self.fns.get(name).cloned().ok_or_else(|| RegistryError::Unknown(name.into()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &FnRef> {
        self.fns.values()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fcnteq() -> FnRef {
        let mut reg = Registry::new();
        reg.register(
            PureFn::new(
                "fcnteq",
                vec![ValueType::Bool, ValueType::nat(8), ValueType::Bool],
                ValueType::nat(8),
                |a| {
                    let c = a[1].nat_arg();
                    Value::Nat(if a[0] == a[2] { c + 1 } else { c })
                },
            )
            .fold_commutative(),
        )
        .unwrap()
    }

    fn fmaxr() -> FnRef {
        let vt = ValueType::pair(ValueType::option(ValueType::Bool), ValueType::nat(4));
        let mut reg = Registry::new();
        reg.register(PureFn::new("fmaxr", vec![vt.clone(), vt.clone()], vt, |a| {
            let (_, r) = a[0].pair_arg();
            let (_, r2) = a[1].pair_arg();
            if r.nat_arg() < r2.nat_arg() {
                a[1].clone()
            } else {
                a[0].clone()
            }
        }))
        .unwrap()
    }

    #[test]
    fn enumerate_small_types() {
        assert_eq!(ValueType::Bool.enumerate(), vec![BOT, TOP]);
        assert_eq!(
            ValueType::option(ValueType::Bool).enumerate(),
            vec![Value::none(), Value::some(BOT), Value::some(TOP)]
        );
        let pairs = ValueType::pair(ValueType::Bool, ValueType::nat(1)).enumerate();
        // brute force: every (b, n) combination
        let mut brute = Vec::new();
        for b in [false, true] {
            for n in 0..=1 {
                brute.push(Value::pair(Value::Bool(b), Value::Nat(n)));
            }
        }
        assert_eq!(pairs, brute);
        assert_eq!(pairs.len(), 4);
    }

    #[test]
    fn apply_fcnteq_and_fmaxr() {
        let f = fcnteq();
        assert_eq!(apply(&f, &[TOP, Value::Nat(2), TOP]).unwrap(), Value::Nat(3));
        assert_eq!(apply(&f, &[TOP, Value::Nat(0), BOT]).unwrap(), Value::Nat(0));
        let m = fmaxr();
        let a = Value::pair(Value::none(), Value::Nat(0));
        let b = Value::pair(Value::some(TOP), Value::Nat(3));
        assert_eq!(apply(&m, &[a, b.clone()]).unwrap(), b);
    }

    #[test]
    fn apply_rejects_bad_arguments() {
        let f = fcnteq();
        assert!(matches!(apply(&f, &[TOP]), Err(ApplyError::Arity { .. })));
        assert!(matches!(
            apply(&f, &[Value::Nat(1), Value::Nat(0), TOP]),
            Err(ApplyError::ArgumentType { index: 0, .. })
        ));
        assert_eq!(
            Closure::new(f.clone()).apply(TOP).unwrap().apply(Value::Unit),
            Err(ApplyError::ArgumentType { name: "fcnteq".into(), index: 1, expected: ValueType::nat(8) })
        );
        let registry_err = Registry::new().get("nope").unwrap_err();
        assert_eq!(registry_err, RegistryError::Unknown("nope".into()));
    }

    #[test]
    fn partial_application_then_fold() {
        let f = fcnteq();
        let counter = Closure::new(f).apply(TOP).unwrap();
        let counter = counter.as_closure().unwrap();
        assert!(counter.is_fold_commutative());
        assert_eq!(fold(counter, Value::Nat(0), &[]).unwrap(), Value::Nat(0));
        // every permutation of [⊤, ⊤, ⊥]
        let perms = [[TOP, TOP, BOT], [TOP, BOT, TOP], [BOT, TOP, TOP]];
        for p in perms {
            assert_eq!(fold(counter, Value::Nat(0), &p).unwrap(), Value::Nat(2));
        }
    }

    #[test]
    fn fold_rejects_non_combiners() {
        let f = fcnteq();
        assert!(matches!(
            fold(&Closure::new(f), Value::Nat(0), &[TOP]),
            Err(ApplyError::NotACombiner { remaining: 3, .. })
        ));
    }

    #[test]
    fn fmaxr_is_not_order_insensitive() {
        // equal rounds with different values: the first one wins
        let m = Closure::new(fmaxr());
        let a = Value::pair(Value::some(TOP), Value::Nat(1));
        let b = Value::pair(Value::some(BOT), Value::Nat(1));
        let d = Value::pair(Value::none(), Value::Nat(0));
        assert_ne!(
            fold(&m, d.clone(), &[a.clone(), b.clone()]).unwrap(),
            fold(&m, d, &[b, a]).unwrap()
        );
    }

    #[test]
    fn registry_rejects_duplicates() {
        let mut reg = Registry::new();
        reg.register(PureFn::new("id", vec![ValueType::Unit], ValueType::Unit, |a| a[0].clone()))
            .unwrap();
        let err = reg
            .register(PureFn::new("id", vec![ValueType::Unit], ValueType::Unit, |a| a[0].clone()))
            .unwrap_err();
        assert_eq!(err, RegistryError::Duplicate("id".into()));
    }

    fn arb_type() -> impl Strategy<Value = ValueType> {
        let leaf = prop_oneof![
            Just(ValueType::Unit),
            Just(ValueType::Bool),
            (0u32..4).prop_map(ValueType::nat),
        ];
        leaf.prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(ValueType::option),
                (inner.clone(), inner).prop_map(|(a, b)| ValueType::pair(a, b)),
            ]
        })
    }

    fn naive_fold(f: &FnRef, lead: &[Value], d: Value, l: &[Value]) -> Value {
        let mut acc = d;
        for m in l {
            let mut args = lead.to_vec();
            args.push(acc);
            args.push(m.clone());
            acc = apply(f, &args).unwrap();
        }
        acc
    }

    proptest! {
        #[test]
        fn enumeration_is_complete_and_distinct(t in arb_type()) {
            let all = t.enumerate();
            prop_assert_eq!(all.len(), t.size());
            let mut sorted = all.clone();
            sorted.sort();
            sorted.dedup();
            prop_assert_eq!(&sorted, &all);
            prop_assert!(all.iter().all(|v| t.contains(v)));
        }

        #[test]
        fn fold_matches_naive_reference(l in proptest::collection::vec(any::<bool>(), 0..=6), p in any::<bool>()) {
            let f = fcnteq();
            let msgs: Vec<Value> = l.into_iter().map(Value::Bool).collect();
            let c = Closure::new(f.clone()).apply(Value::Bool(p)).unwrap();
            let got = fold(c.as_closure().unwrap(), Value::Nat(0), &msgs).unwrap();
            prop_assert_eq!(got, naive_fold(&f, &[Value::Bool(p)], Value::Nat(0), &msgs));
        }
    }

    #[test]
    fn apply_is_deterministic() {
        let f = fcnteq();
        let first = apply(&f, &[TOP, Value::Nat(4), TOP]).unwrap();
        for _ in 0..1000 {
            assert_eq!(apply(&f, &[TOP, Value::Nat(4), TOP]).unwrap(), first);
        }
    }
}
