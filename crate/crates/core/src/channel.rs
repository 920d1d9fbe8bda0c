//! Single-use channels: the channel transition system with Byzantine sends.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use thiserror::Error;

use crate::denote::{distinct_perms, multiset_excess, sub_multisets, Config, ConfigError, NodeId};
use crate::hll::{ChannelEntry, ChannelId, Role};
use crate::values::{Value, ValueType};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChannelError {
    #[error("channel label is not enabled: {0}")]
    NotEnabled(&'static str),
    #[error("channel is not finished")]
    NotFinished,
}

/// Static parameters of one channel under a configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelSpec {
    pub chan: ChannelId,
    pub sender_role: Role,
    pub receiver_role: Role,
    pub senders: BTreeSet<NodeId>,
    pub byz_senders: BTreeSet<NodeId>,
    pub receivers: BTreeSet<NodeId>,
    /// `n_S - f_S`.
    pub lo: u32,
    /// `b_S`.
    pub b: u32,
    pub msg_type: ValueType,
}

impl ChannelSpec {
    pub fn new(entry: &ChannelEntry, cfg: &Config) -> Result<Self, ConfigError> {
        let s = cfg.get(&entry.sender)?;
        Ok(ChannelSpec {
            chan: entry.chan.clone(),
            sender_role: entry.sender.clone(),
            receiver_role: entry.receiver.clone(),
            senders: cfg.good_ids(&entry.sender)?.into_iter().collect(),
            byz_senders: cfg.byz_ids(&entry.sender)?.into_iter().collect(),
            receivers: cfg.good_ids(&entry.receiver)?.into_iter().collect(),
            lo: s.lo(),
            b: s.b,
            msg_type: entry.msg_type.clone(),
        })
    }

    pub fn initial(&self) -> ChannelState {
        ChannelState {
            fs: BTreeSet::new(),
            fr: BTreeSet::new(),
            fb: self.receivers.iter().map(|r| (r.clone(), BTreeSet::new())).collect(),
            m: self.receivers.iter().map(|r| (r.clone(), Vec::new())).collect(),
            ms: Vec::new(),
            mr: BTreeMap::new(),
        }
    }
}

/// `⟨F_s, F_r, F_b, M⟩` plus the bookkeeping lists `M_s` and `M_r`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChannelState {
    /// Good senders that have sent.
    pub fs: BTreeSet<NodeId>,
    /// Good receivers that have received.
    pub fr: BTreeSet<NodeId>,
    /// Byzantine senders that have sent to each receiver.
    pub fb: BTreeMap<NodeId, BTreeSet<NodeId>>,
    /// Messages addressed to each receiver, in arrival order.
    pub m: BTreeMap<NodeId, Vec<Value>>,
    /// Messages sent by good senders, in send order.
    pub ms: Vec<Value>,
    /// What each receiver actually received.
    pub mr: BTreeMap<NodeId, Vec<Value>>,
}

impl ChannelState {
    /// Drops the information that cannot influence future behaviour or
    /// outputs: arrival order and the bookkeeping lists.
    pub fn canonical(&self) -> ChannelState {
        let mut c = self.clone();
        for l in c.m.values_mut() {
            l.sort();
        }
        c.ms.sort();
        c.mr.clear();
        c
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChannelLabel {
    Send { from: NodeId, v: Value },
    ByzSend { from: NodeId, to: NodeId, v: Value },
    Receive { to: NodeId, msgs: Vec<Value> },
}

/// `Netwk_LLL`: reorderings of `l` truncated to at least `lo` messages.
/// Empty when fewer than `lo` messages are available.
pub fn netwk_lll(l: &[Value], lo: u32) -> BTreeSet<Vec<Value>> {
    sub_multisets(l, 0, &[], lo as usize).iter().flat_map(|m| distinct_perms(m)).collect()
}

/// Whether `msgs ∈ Netwk_LLL(l, lo)`.
pub fn netwk_lll_contains(l: &[Value], lo: u32, msgs: &[Value]) -> bool {
    msgs.len() >= lo as usize && multiset_excess(msgs, l).is_empty()
}

/// Whether `to` may receive now (ignoring the payload).
pub fn can_receive(spec: &ChannelSpec, st: &ChannelState, to: &NodeId) -> bool {
    spec.receivers.contains(to) && !st.fr.contains(to) && (!spec.senders.contains(to) || st.fs.contains(to))
}

/// Payloads `to` may receive: all of `Netwk_LLL(M(to))`, or one sorted
/// representative per multiset when `multisets` is set.
pub fn receive_options(spec: &ChannelSpec, st: &ChannelState, to: &NodeId, multisets: bool) -> Vec<Vec<Value>> {
    let Some(m) = st.m.get(to) else {
        return Vec::new();
    };
    let reps = sub_multisets(m, 0, &[], spec.lo as usize);
    if multisets {
        reps.into_iter().collect()
    } else {
        reps.iter().flat_map(|r| distinct_perms(r)).collect()
    }
}

pub fn channel_step(spec: &ChannelSpec, st: &ChannelState, l: &ChannelLabel) -> Result<ChannelState, ChannelError> {
    let mut next = st.clone();
    match l {
        ChannelLabel::Send { from, v } => {
            if !spec.senders.contains(from) {
                return Err(ChannelError::NotEnabled("not a good sender"));
            }
            if st.fs.contains(from) {
                return Err(ChannelError::NotEnabled("sender already sent"));
            }
            if !spec.msg_type.contains(v) {
                return Err(ChannelError::NotEnabled("ill-typed message"));
            }
            next.fs.insert(from.clone());
            for l in next.m.values_mut() {
                l.push(v.clone());
            }
            next.ms.push(v.clone());
        }
        ChannelLabel::ByzSend { from, to, v } => {
            if !spec.byz_senders.contains(from) || !spec.receivers.contains(to) {
                return Err(ChannelError::NotEnabled("not a Byzantine sender or receiver"));
            }
            if !spec.msg_type.contains(v) {
                return Err(ChannelError::NotEnabled("ill-typed message"));
            }
            let fb = next.fb.entry(to.clone()).or_default();
            if !fb.insert(from.clone()) {
                return Err(ChannelError::NotEnabled("Byzantine sender already sent to this receiver"));
            }
            next.m.entry(to.clone()).or_default().push(v.clone());
        }
        ChannelLabel::Receive { to, msgs } => {
            if !can_receive(spec, st, to) {
                return Err(ChannelError::NotEnabled("receiver cannot receive now"));
            }
            let m = st.m.get(to).map(Vec::as_slice).unwrap_or(&[]);
            if !netwk_lll_contains(m, spec.lo, msgs) {
                return Err(ChannelError::NotEnabled("message list not permitted by the network"));
            }
            next.fr.insert(to.clone());
            next.mr.insert(to.clone(), msgs.clone());
        }
    }
    Ok(next)
}

pub fn is_finished(spec: &ChannelSpec, st: &ChannelState) -> bool {
    st.fs == spec.senders && st.fr == spec.receivers
}

/// The per-receiver lists of a finished channel.
pub fn extract_bigstep(spec: &ChannelSpec, st: &ChannelState) -> Result<BTreeMap<NodeId, Vec<Value>>, ChannelError> {
    if is_finished(spec, st) {
        Ok(st.mr.clone())
    } else {
        Err(ChannelError::NotFinished)
    }
}

/// State invariants: message counts match the send sets, the Byzantine cap
/// holds, and every `M(r)` is `M_s` plus at most `b` extra values.
pub fn invariants_hold(spec: &ChannelSpec, st: &ChannelState) -> bool {
    spec.receivers.iter().all(|r| {
        let m = st.m.get(r).map(Vec::as_slice).unwrap_or(&[]);
        let fb = st.fb.get(r).map(BTreeSet::len).unwrap_or(0);
        m.len() == st.fs.len() + fb
            && fb <= spec.b as usize
            && multiset_excess(&st.ms, m).is_empty()
            && multiset_excess(m, &st.ms).len() <= spec.b as usize
    }) && st.fs.is_subset(&spec.senders)
        && st.fr.is_subset(&spec.receivers)
        && st.mr.keys().all(|r| st.fr.contains(r))
        && st.fr.iter().all(|r| st.mr.contains_key(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::denote::perm;
    use crate::values::{BOT, TOP};
    use alloc::vec;

    fn spec(same_role: bool) -> ChannelSpec {
        let (l, r) = (Role::new("L"), Role::new("R"));
        let recv = if same_role { r.clone() } else { l.clone() };
        let cfg = Config::new().with_role(&l, 1, 0, 0).unwrap().with_role(&r, 4, 1, 1).unwrap();
        let entry = ChannelEntry { chan: ChannelId::new("c"), sender: r, receiver: recv, msg_type: ValueType::Bool };
        ChannelSpec::new(&entry, &cfg).unwrap()
    }

    fn node(r: &str, i: u32) -> NodeId {
        NodeId::new(&Role::new(r), i)
    }

    #[test]
    fn netwk_lll_small_cases() {
        let a = Value::Nat(1);
        let b = Value::Nat(2);
        assert_eq!(netwk_lll(core::slice::from_ref(&a), 1), [vec![a.clone()]].into_iter().collect());
        let got = netwk_lll(&[a.clone(), b.clone()], 1);
        // brute force: permutations, then every prefix of length ≥ 1
        let mut brute = BTreeSet::new();
        for p in perm(&[a, b]) {
            for k in 1..=p.len() {
                brute.insert(p[..k].to_vec());
            }
        }
        assert_eq!(got, brute);
        assert_eq!(got.len(), 4);
        assert!(netwk_lll(&[TOP], 2).is_empty());
    }

    #[test]
    fn send_updates_every_receiver() {
        let sp = spec(false);
        let s = channel_step(&sp, &sp.initial(), &ChannelLabel::Send { from: node("R", 0), v: TOP }).unwrap();
        assert_eq!(s.fs.len(), 1);
        assert_eq!(s.m[&node("L", 0)], vec![TOP]);
        assert_eq!(s.ms, vec![TOP]);
        assert!(invariants_hold(&sp, &s));
        assert!(channel_step(&sp, &s, &ChannelLabel::Send { from: node("R", 0), v: BOT }).is_err());
        assert!(channel_step(&sp, &s, &ChannelLabel::Send { from: node("R", 3), v: BOT }).is_err());
    }

    #[test]
    fn byzantine_send_once_per_receiver() {
        let sp = spec(false);
        let lbl = ChannelLabel::ByzSend { from: node("R", 3), to: node("L", 0), v: BOT };
        let s = channel_step(&sp, &sp.initial(), &lbl).unwrap();
        assert_eq!(s.m[&node("L", 0)], vec![BOT]);
        assert!(s.ms.is_empty());
        assert!(channel_step(&sp, &s, &lbl).is_err());
        assert!(invariants_hold(&sp, &s));
    }

    #[test]
    fn receive_requires_network_membership() {
        let sp = spec(false);
        let mut s = sp.initial();
        for (i, v) in [TOP, TOP, BOT].into_iter().enumerate() {
            s = channel_step(&sp, &s, &ChannelLabel::Send { from: node("R", i as u32), v }).unwrap();
        }
        let to = node("L", 0);
        let opts: BTreeSet<_> = receive_options(&sp, &s, &to, false).into_iter().collect();
        assert_eq!(opts, netwk_lll(&s.m[&to], sp.lo));
        for l in &opts {
            assert!(channel_step(&sp, &s, &ChannelLabel::Receive { to: to.clone(), msgs: l.clone() }).is_ok());
        }
        let bad = ChannelLabel::Receive { to: to.clone(), msgs: vec![TOP, TOP] };
        assert!(channel_step(&sp, &s, &bad).is_err());
        let done = channel_step(&sp, &s, &ChannelLabel::Receive { to: to.clone(), msgs: vec![BOT, TOP, TOP] }).unwrap();
        assert!(is_finished(&sp, &done));
        assert_eq!(extract_bigstep(&sp, &done).unwrap()[&to], vec![BOT, TOP, TOP]);
        assert_eq!(extract_bigstep(&sp, &s), Err(ChannelError::NotFinished));
        assert!(!is_finished(&sp, &sp.initial()));
    }

    #[test]
    fn same_role_receiver_must_send_first() {
        let sp = spec(true);
        let me = node("R", 0);
        assert!(!can_receive(&sp, &sp.initial(), &me));
        let s = channel_step(&sp, &sp.initial(), &ChannelLabel::Send { from: me.clone(), v: TOP }).unwrap();
        assert!(can_receive(&sp, &s, &me));
    }
}
