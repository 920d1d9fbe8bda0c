//! Configurations, the adversarial network relation and the set-valued
//! denotation of programs.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::hll::{ChannelContext, ChannelId, Expr, Lifted, Program, Role, TypeError, Var};
use crate::values::{fold, ApplyError, Closure, Term, Value, ValueType};

/// `n`, `f` and `b` for one role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RoleConfig {
    pub n: u32,
    pub f: u32,
    pub b: u32,
}

impl RoleConfig {
    /// Number of good nodes.
    pub fn g(&self) -> u32 {
        self.n - self.b
    }

    /// Least number of messages a receiver waits for.
    pub fn lo(&self) -> u32 {
        self.n - self.f
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("role {role}: b = {b} exceeds f = {f}")]
    ByzantineExceedsFaults { role: Role, b: u32, f: u32 },
    #[error("role {role}: f = {f} exceeds n = {n}")]
    FaultsExceedNodes { role: Role, f: u32, n: u32 },
    #[error("role {0} is not configured")]
    UnknownRole(Role),
}

/// A node identifier. Good nodes of a role are numbered `0..g`, Byzantine
/// ones `g..n`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId {
    pub role: Role,
    pub index: u32,
}

impl NodeId {
    pub fn new(role: &Role, index: u32) -> Self {
        NodeId { role: role.clone(), index }
    }

    /// Parses `R/2`.
    pub fn parse(s: &str) -> Option<Self> {
        let (r, i) = s.rsplit_once('/')?;
        if r.is_empty() {
            return None;
        }
        Some(NodeId { role: Role::new(r), index: i.parse().ok()? })
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.role, self.index)
    }
}

/// Per-role node counts and fault bounds.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Config {
    roles: BTreeMap<Role, RoleConfig>,
}

impl Config {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_role(mut self, role: &Role, n: u32, f: u32, b: u32) -> Result<Self, ConfigError> {
        if f > n {
            return Err(ConfigError::FaultsExceedNodes { role: role.clone(), f, n });
        }
        if b > f {
            return Err(ConfigError::ByzantineExceedsFaults { role: role.clone(), b, f });
        }
        self.roles.insert(role.clone(), RoleConfig { n, f, b });
        Ok(self)
    }

    pub fn get(&self, role: &Role) -> Result<RoleConfig, ConfigError> {
        self.roles.get(role).copied().ok_or_else(|| ConfigError::UnknownRole(role.clone()))
    }

    pub fn roles(&self) -> impl Iterator<Item = (&Role, &RoleConfig)> {
        self.roles.iter()
    }

    pub fn good_ids(&self, role: &Role) -> Result<Vec<NodeId>, ConfigError> {
        let rc = self.get(role)?;
        Ok((0..rc.g()).map(|i| NodeId::new(role, i)).collect())
    }

    pub fn byz_ids(&self, role: &Role) -> Result<Vec<NodeId>, ConfigError> {
        let rc = self.get(role)?;
        Ok((rc.g()..rc.n).map(|i| NodeId::new(role, i)).collect())
    }

    /// Roles whose receivers may proceed with zero messages (`n = f`).
    pub fn warnings(&self) -> Vec<Role> {
        self.roles.iter().filter(|(_, rc)| rc.lo() == 0).map(|(r, _)| r.clone()).collect()
    }
}

/// A record of vectors, one entry per good node of each role.
pub type DistRecord = BTreeMap<Role, Vec<Value>>;

/// Variable environment.
pub type Env = BTreeMap<Var, DistRecord>;

/// Deduplicated set of possible output records.
pub type OutputSet = BTreeSet<DistRecord>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DenoteError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Apply(#[from] ApplyError),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("vector at role {role} has {got} entries, configuration has {expected} good nodes")]
    VectorLength { role: Role, expected: usize, got: usize },
    #[error("expected a value at role {0}, found a function")]
    NotAValue(Role),
    #[error("combiner at role {0} is not a function")]
    NotAFunction(Role),
    #[error("channel `{0}` is not in the channel context")]
    UnknownChannel(ChannelId),
    #[error("cannot keep {lo} messages out of {len}")]
    Truncation { lo: usize, len: usize },
}

/// `v` extended by every choice of `b` values of type `t`.
pub fn add_any(v: &[Value], b: u32, t: &ValueType) -> BTreeSet<Vec<Value>> {
    let universe = t.enumerate();
    let mut out = BTreeSet::new();
    out.insert(v.to_vec());
    for _ in 0..b {
        let mut next = BTreeSet::new();
        for prefix in &out {
            for u in &universe {
                let mut w = prefix.clone();
                w.push(u.clone());
                next.insert(w);
            }
        }
        out = next;
    }
    out
}

/// Every reordering of `v`.
pub fn perm(v: &[Value]) -> BTreeSet<Vec<Value>> {
    fn go(rest: &mut Vec<Value>, acc: &mut Vec<Value>, out: &mut BTreeSet<Vec<Value>>) {
        if rest.is_empty() {
            out.insert(acc.clone());
            return;
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            acc.push(x.clone());
            go(rest, acc, out);
            acc.pop();
            rest.insert(i, x);
        }
    }
    let mut out = BTreeSet::new();
    go(&mut v.to_vec(), &mut Vec::new(), &mut out);
    out
}

/// Prefixes of `v` with at least `lo` elements.
pub fn trunc(v: &[Value], lo: usize) -> Result<BTreeSet<Vec<Value>>, DenoteError> {
    if lo > v.len() {
        return Err(DenoteError::Truncation { lo, len: v.len() });
    }
    Ok((lo..=v.len()).map(|k| v[..k].to_vec()).collect())
}

/// `Netwk_S`: add up to `b` Byzantine values, permute, drop down to `n - f`.
/// Literal enumeration; used as the reference for the faster paths.
pub fn netwk(cfg: &Config, sender: &Role, msgs: &[Value], t: &ValueType) -> Result<BTreeSet<Vec<Value>>, DenoteError> {
    let rc = cfg.get(sender)?;
    check_len(sender, rc.g(), msgs.len())?;
    let mut out = BTreeSet::new();
    for v in add_any(msgs, rc.b, t) {
        for w in perm(&v) {
            out.extend(trunc(&w, rc.lo() as usize)?);
        }
    }
    Ok(out)
}

fn check_len(role: &Role, g: u32, got: usize) -> Result<(), DenoteError> {
    if got == g as usize {
        Ok(())
    } else {
        Err(DenoteError::VectorLength { role: role.clone(), expected: g as usize, got })
    }
}

/// Multiset difference `l ∖ base`, as a sorted list.
pub fn multiset_excess(l: &[Value], base: &[Value]) -> Vec<Value> {
    let mut pool = base.to_vec();
    pool.sort();
    let mut extra = Vec::new();
    let mut l = l.to_vec();
    l.sort();
    for v in l {
        match pool.binary_search(&v) {
            Ok(i) => {
                pool.remove(i);
            }
            Err(_) => extra.push(v),
        }
    }
    extra
}

/// Membership test for `Netwk`: `l` keeps at least `lo` messages and uses at
/// most `b` values beyond the multiset `msgs`.
pub fn netwk_contains(rc: RoleConfig, msgs: &[Value], t: &ValueType, l: &[Value]) -> bool {
    let extra = multiset_excess(l, msgs);
    l.len() >= rc.lo() as usize && extra.len() <= rc.b as usize && extra.iter().all(|v| t.contains(v))
}

/// One sorted representative per multiset in `Netwk`.
pub fn netwk_multisets(rc: RoleConfig, msgs: &[Value], t: &ValueType) -> BTreeSet<Vec<Value>> {
    sub_multisets(msgs, rc.b as usize, &t.enumerate(), rc.lo() as usize)
}

/// Sorted sub-multisets of `msgs ⊎ B` for some `B` of size `extra` over
/// `universe`, with at least `lo` elements.
pub fn sub_multisets(msgs: &[Value], extra: usize, universe: &[Value], lo: usize) -> BTreeSet<Vec<Value>> {
    let mut have: BTreeMap<&Value, usize> = BTreeMap::new();
    for m in msgs {
        *have.entry(m).or_default() += 1;
    }
    let mut keys: Vec<&Value> = universe.iter().collect();
    for m in msgs {
        if !keys.contains(&m) {
            keys.push(m);
        }
    }
    keys.sort();
    keys.dedup();
    let mut out = BTreeSet::new();
    let mut acc = Vec::new();
    fn go(
        keys: &[&Value],
        have: &BTreeMap<&Value, usize>,
        universe: &[Value],
        extra_left: usize,
        lo: usize,
        acc: &mut Vec<Value>,
        out: &mut BTreeSet<Vec<Value>>,
    ) {
        let Some((k, rest)) = keys.split_first() else {
            if acc.len() >= lo {
                out.insert(acc.clone());
            }
            return;
        };
        let own = have.get(*k).copied().unwrap_or(0);
        let byz = if universe.contains(k) { extra_left } else { 0 };
        for c in 0..=own + byz {
            let used = c.saturating_sub(own);
            for _ in 0..c {
                acc.push((*k).clone());
            }
            go(rest, have, universe, extra_left - used, lo, acc, out);
            acc.truncate(acc.len() - c);
        }
    }
    go(&keys, &have, universe, extra, lo, &mut acc, &mut out);
    out
}

/// Distinct orderings of a multiset.
pub fn distinct_perms(v: &[Value]) -> Vec<Vec<Value>> {
    let mut sorted = v.to_vec();
    sorted.sort();
    let mut out = vec![sorted.clone()];
    // next lexicographic permutation until exhausted
    loop {
        let s = &mut sorted;
        let Some(i) = (1..s.len()).rev().find(|&i| s[i - 1] < s[i]) else {
            break;
        };
        let j = (i..s.len()).rev().find(|&j| s[j] > s[i - 1]).expect("pivot has a successor");
        s.swap(i - 1, j);
        s[i..].reverse();
        out.push(s.clone());
    }
    out
}

/// `#_v(l)`.
pub fn count_occurrences(v: &Value, l: &[Value]) -> u32 {
    l.iter().filter(|x| *x == v).count() as u32
}

/// Denotation of an expression: one term per good node of `role`.
pub fn denote_expr(cfg: &Config, env: &Env, role: &Role, e: &Expr) -> Result<Vec<Term>, DenoteError> {
    let g = cfg.get(role)?.g();
    let out = match e {
        Expr::Var { var, at } => {
            let rec = env.get(var).ok_or_else(|| TypeError::UnknownVariable(var.clone()))?;
            let v = rec
                .get(at)
                .ok_or_else(|| TypeError::RoleNotInRecord { var: var.clone(), role: at.clone() })?;
            v.iter().cloned().map(Term::Val).collect::<Vec<_>>()
        }
        Expr::Lift { term: Lifted::Const(v, _), .. } => vec![Term::Val(v.clone()); g as usize],
        Expr::Lift { term: Lifted::Fn(f), .. } => {
            let t = if f.params().is_empty() {
                Term::Val(crate::values::apply(f, &[])?)
            } else {
                Term::Fun(Closure::new(f.clone()))
            };
            vec![t; g as usize]
        }
        Expr::Vector { items, .. } => items.iter().cloned().map(Term::Val).collect(),
        Expr::App(f, a) => {
            let fs = denote_expr(cfg, env, role, f)?;
            let xs = denote_expr(cfg, env, role, a)?;
            fs.iter()
                .zip(xs)
                .map(|(f, x)| match x {
                    Term::Val(v) => f.apply(v).map_err(DenoteError::from),
                    Term::Fun(_) => Err(DenoteError::NotAValue(role.clone())),
                })
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    check_len(role, g, out.len())?;
    Ok(out)
}

fn values_of(role: &Role, terms: Vec<Term>) -> Result<Vec<Value>, DenoteError> {
    terms
        .into_iter()
        .map(|t| t.into_value().ok_or_else(|| DenoteError::NotAValue(role.clone())))
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DenoteOptions {
    /// Enumerate every network list literally instead of one list per
    /// distinct arrangement (or per multiset for order-insensitive folds).
    pub materialize_lists: bool,
}

/// `⟦p⟧ env` with default options. `delta` is the channel context `p` was
/// typed under; it supplies the message types Byzantine senders draw from.
pub fn denote_prog(cfg: &Config, delta: &ChannelContext, env: &Env, p: &Program) -> Result<OutputSet, DenoteError> {
    Denoter::new(cfg, delta, DenoteOptions::default()).run(env, p)
}

type ListKey = (Role, ValueType, Vec<Value>, bool);

/// Memoizing evaluator for [`denote_prog`].
pub struct Denoter<'c> {
    cfg: &'c Config,
    delta: &'c ChannelContext,
    opts: DenoteOptions,
    memo: BTreeMap<(usize, Env), Arc<OutputSet>>,
    free: BTreeMap<usize, BTreeSet<Var>>,
    lists: BTreeMap<ListKey, Arc<Vec<Vec<Value>>>>,
}

impl<'c> Denoter<'c> {
    pub fn new(cfg: &'c Config, delta: &'c ChannelContext, opts: DenoteOptions) -> Self {
        Denoter { cfg, delta, opts, memo: BTreeMap::new(), free: BTreeMap::new(), lists: BTreeMap::new() }
    }

    pub fn run(&mut self, env: &Env, p: &Program) -> Result<OutputSet, DenoteError> {
        // memo keys use node addresses, valid only while `p` is borrowed
        self.memo.clear();
        self.free.clear();
        Ok((*self.prog(env, p)?).clone())
    }

    fn prog(&mut self, env: &Env, p: &Program) -> Result<Arc<OutputSet>, DenoteError> {
        let id = p as *const Program as usize;
        let free = self.free.entry(id).or_insert_with(|| p.free_vars()).clone();
        let key_env: Env = env.iter().filter(|(k, _)| free.contains(k)).map(|(k, v)| (k.clone(), v.clone())).collect();
        let key = (id, key_env);
        if let Some(hit) = self.memo.get(&key) {
            return Ok(hit.clone());
        }
        let out = Arc::new(self.eval(env, p)?);
        self.memo.insert(key, out.clone());
        Ok(out)
    }

    fn eval(&mut self, env: &Env, p: &Program) -> Result<OutputSet, DenoteError> {
        match p {
            Program::Ret(fields) => {
                let mut rec = DistRecord::new();
                for (r, e) in fields {
                    rec.insert(r.clone(), values_of(r, denote_expr(self.cfg, env, r, e)?)?);
                }
                Ok([rec].into_iter().collect())
            }
            Program::Let { var, bound, body } => {
                let first = self.prog(env, bound)?;
                let mut out = OutputSet::new();
                let mut inner = env.clone();
                for y in first.iter() {
                    inner.insert(var.clone(), y.clone());
                    out.extend(self.prog(&inner, body)?.iter().cloned());
                }
                Ok(out)
            }
            Program::Comm { chan, msg, default, combine } => {
                let sender = msg.role();
                let receiver = default.role();
                let t = self
                    .delta
                    .get(chan)
                    .map(|e| e.msg_type.clone())
                    .ok_or_else(|| DenoteError::UnknownChannel(chan.clone()))?;
                let msgs = values_of(sender, denote_expr(self.cfg, env, sender, msg)?)?;
                let defaults = values_of(receiver, denote_expr(self.cfg, env, receiver, default)?)?;
                let combs = denote_expr(self.cfg, env, receiver, combine)?;
                let mut cache: BTreeMap<(Closure, Value), Arc<BTreeSet<Value>>> = BTreeMap::new();
                let mut per_node = Vec::with_capacity(defaults.len());
                for (d, f) in defaults.into_iter().zip(combs) {
                    let f = match f {
                        Term::Fun(c) => c,
                        Term::Val(_) => return Err(DenoteError::NotAFunction(receiver.clone())),
                    };
                    let key = (f, d);
                    if let Some(hit) = cache.get(&key) {
                        per_node.push(hit.clone());
                        continue;
                    }
                    let lists = self.network_lists(sender, &msgs, &t, key.0.is_fold_commutative())?;
                    let mut outcomes = BTreeSet::new();
                    for l in lists.iter() {
                        outcomes.insert(fold(&key.0, key.1.clone(), l)?);
                    }
                    let outcomes = Arc::new(outcomes);
                    cache.insert(key, outcomes.clone());
                    per_node.push(outcomes);
                }
                let sets: Vec<&BTreeSet<Value>> = per_node.iter().map(|s| &**s).collect();
                Ok(product(&sets)
                    .into_iter()
                    .map(|v| [(receiver.clone(), v)].into_iter().collect())
                    .collect())
            }
        }
    }

    fn network_lists(
        &mut self,
        sender: &Role,
        msgs: &[Value],
        t: &ValueType,
        commutative: bool,
    ) -> Result<Arc<Vec<Vec<Value>>>, DenoteError> {
        let reps_only = commutative && !self.opts.materialize_lists;
        let mut sorted = msgs.to_vec();
        if !self.opts.materialize_lists {
            sorted.sort();
        }
        let key = (sender.clone(), t.clone(), sorted, reps_only);
        if let Some(hit) = self.lists.get(&key) {
            return Ok(hit.clone());
        }
        let rc = self.cfg.get(sender)?;
        check_len(sender, rc.g(), msgs.len())?;
        let lists: Vec<Vec<Value>> = if self.opts.materialize_lists {
            netwk(self.cfg, sender, msgs, t)?.into_iter().collect()
        } else {
            let reps = netwk_multisets(rc, msgs, t);
            if reps_only {
                reps.into_iter().collect()
            } else {
                reps.iter().flat_map(|r| distinct_perms(r)).collect()
            }
        };
        let lists = Arc::new(lists);
        self.lists.insert(key, lists.clone());
        Ok(lists)
    }
}

/// `Π`: every vector picking one element from each set.
pub fn product<T: Clone + Ord>(sets: &[&BTreeSet<T>]) -> BTreeSet<Vec<T>> {
    let mut out: BTreeSet<Vec<T>> = [Vec::new()].into_iter().collect();
    for s in sets {
        let mut next = BTreeSet::new();
        for prefix in &out {
            for x in s.iter() {
                let mut v = prefix.clone();
                v.push(x.clone());
                next.insert(v);
            }
        }
        out = next;
    }
    out
}

/// Keeps only the given roles of every record.
pub fn restrict(set: &OutputSet, roles: &BTreeSet<Role>) -> OutputSet {
    set.iter()
        .map(|rec| rec.iter().filter(|(r, _)| roles.contains(*r)).map(|(r, v)| (r.clone(), v.clone())).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::values::{BOT, TOP};
    use proptest::prelude::*;

    fn r() -> Role {
        Role::new("R")
    }

    fn cfg(n: u32, f: u32, b: u32) -> Config {
        Config::new().with_role(&r(), n, f, b).unwrap()
    }

    fn bools(bits: &[bool]) -> Vec<Value> {
        bits.iter().map(|b| Value::Bool(*b)).collect()
    }

    #[test]
    fn config_validation() {
        assert_eq!(
            Config::new().with_role(&r(), 4, 1, 2),
            Err(ConfigError::ByzantineExceedsFaults { role: r(), b: 2, f: 1 })
        );
        assert!(matches!(Config::new().with_role(&r(), 1, 2, 0), Err(ConfigError::FaultsExceedNodes { .. })));
        let c = cfg(4, 1, 1);
        assert_eq!(c.good_ids(&r()).unwrap().len(), 3);
        assert_eq!(c.byz_ids(&r()).unwrap(), vec![NodeId::new(&r(), 3)]);
        assert!(c.warnings().is_empty());
        assert_eq!(cfg(1, 1, 0).warnings(), vec![r()]);
        assert_eq!(NodeId::parse("R/2"), Some(NodeId::new(&r(), 2)));
    }

    #[test]
    fn small_building_blocks() {
        assert_eq!(add_any(&[TOP, BOT], 0, &ValueType::Bool).len(), 1);
        assert_eq!(
            add_any(&[TOP], 1, &ValueType::Bool),
            [vec![TOP, BOT], vec![TOP, TOP]].into_iter().collect()
        );
        assert_eq!(add_any(&[BOT], 2, &ValueType::Bool).len(), 4);
        assert_eq!(perm(&[]), [vec![]].into_iter().collect());
        assert_eq!(perm(&[Value::Nat(1), Value::Nat(2), Value::Nat(3)]).len(), 6);
        let abc = [Value::Nat(1), Value::Nat(2), Value::Nat(3)];
        assert_eq!(trunc(&abc, 3).unwrap().len(), 1);
        assert_eq!(trunc(&abc, 2).unwrap(), [abc[..2].to_vec(), abc.to_vec()].into_iter().collect());
        assert_eq!(trunc(&abc, 4), Err(DenoteError::Truncation { lo: 4, len: 3 }));
        assert_eq!(count_occurrences(&TOP, &[TOP, BOT, TOP]), 2);
        assert_eq!(count_occurrences(&BOT, &[]), 0);
    }

    #[test]
    fn fault_free_network_only_permutes() {
        let msgs = bools(&[true, true, false]);
        let got = netwk(&cfg(3, 0, 0), &r(), &msgs, &ValueType::Bool).unwrap();
        assert_eq!(got, perm(&msgs));
    }

    #[test]
    fn distinct_perms_matches_perm() {
        let v = [Value::Nat(2), Value::Nat(1), Value::Nat(2), Value::Nat(0)];
        let fast: BTreeSet<_> = distinct_perms(&v).into_iter().collect();
        assert_eq!(fast, perm(&v));
        assert_eq!(distinct_perms(&v).len(), 12);
    }

    #[test]
    fn product_enumerates_combinations() {
        let a: BTreeSet<u8> = [1, 2].into_iter().collect();
        let b: BTreeSet<u8> = [3].into_iter().collect();
        assert_eq!(product(&[&a, &b]), [vec![1, 3], vec![2, 3]].into_iter().collect());
        assert_eq!(product::<u8>(&[]).len(), 1);
    }

    fn sorted_set(s: &BTreeSet<Vec<Value>>) -> BTreeSet<Vec<Value>> {
        s.iter()
            .map(|l| {
                let mut l = l.clone();
                l.sort();
                l
            })
            .collect()
    }

    proptest! {
        #[test]
        fn network_views_agree(bits in proptest::collection::vec(any::<bool>(), 1..=4), f in 0u32..=2, b in 0u32..=2) {
            let g = bits.len() as u32;
            prop_assume!(b <= f && f <= g + b);
            let c = cfg(g + b, f, b);
            let msgs = bools(&bits);
            let full = netwk(&c, &r(), &msgs, &ValueType::Bool).unwrap();
            let rc = c.get(&r()).unwrap();
            let reps = netwk_multisets(rc, &msgs, &ValueType::Bool);
            prop_assert_eq!(&sorted_set(&full), &reps);
            let expanded: BTreeSet<_> = reps.iter().flat_map(|m| distinct_perms(m)).collect();
            prop_assert_eq!(&expanded, &full);
            for l in &full {
                prop_assert!(netwk_contains(rc, &msgs, &ValueType::Bool, l));
                prop_assert!(l.len() >= rc.lo() as usize && l.len() <= rc.n as usize);
            }
            // the untouched vector plus any Byzantine tail is always present
            for v in add_any(&msgs, b, &ValueType::Bool) {
                prop_assert!(full.contains(&v));
            }
        }

        #[test]
        fn more_byzantine_never_shrinks(bits in proptest::collection::vec(any::<bool>(), 1..=3), last in any::<bool>()) {
            let msgs = bools(&bits);
            let g = bits.len() as u32;
            let small = netwk(&cfg(g + 1, 2, 0), &r(), &[msgs.clone(), vec![Value::Bool(last)]].concat(), &ValueType::Bool).unwrap();
            let large = netwk(&cfg(g + 1, 2, 1), &r(), &msgs, &ValueType::Bool).unwrap();
            prop_assert!(small.is_subset(&large));
        }
    }
}
