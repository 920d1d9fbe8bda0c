use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{bool_vectors, denote_body, leader, record, replica, Bosco, SeqPaxos};
use crate::denote::{count_occurrences, netwk, Config, DenoteError, DenoteOptions, DistRecord};
use crate::hll::Role;
use crate::values::{Value, BOT, TOP};

/// A failed case of a property check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub input: DistRecord,
    pub output: Option<DistRecord>,
    pub reason: String,
}

/// Verdict of an enumerative property check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub check: &'static str,
    pub holds: bool,
    /// Every case in scope was enumerated.
    pub exhaustive: bool,
    /// The protocol's resilience bound was satisfied.
    pub precondition: bool,
    pub cases: usize,
    pub counterexample: Option<Counterexample>,
}

impl CheckReport {
    fn new(check: &'static str, precondition: bool) -> Self {
        CheckReport { check, holds: true, exhaustive: true, precondition, cases: 0, counterexample: None }
    }

    fn fail(&mut self, input: &DistRecord, output: Option<&DistRecord>, reason: String) {
        if self.holds {
            self.holds = false;
            self.counterexample = Some(Counterexample { input: input.clone(), output: output.cloned(), reason });
        }
    }
}

fn bools(x: &[bool]) -> Vec<Value> {
    x.iter().map(|&v| Value::Bool(v)).collect()
}

/// `(decisions, next inputs)` of the good replicas.
fn unzip_bosco(rec: &DistRecord) -> (Vec<Option<bool>>, Vec<bool>) {
    rec.get(&replica())
        .map(|v| {
            v.iter()
                .map(|p| {
                    let (d, z) = p.as_pair().expect("bosco output is a pair");
                    let d = d.as_option().expect("decision is an option").and_then(Value::as_bool);
                    (d, z.as_bool().expect("next input is a bool"))
                })
                .unzip()
        })
        .unwrap_or_default()
}

/// Strong one-step: with all good inputs equal to `value`, every good node
/// outputs `(Some value, value)` after one iteration.
pub fn one_step(bosco: &Bosco, b: u32, value: bool) -> Result<CheckReport, DenoteError> {
    let cfg = bosco.config(b)?;
    let mut report = CheckReport::new("one-step", bosco.n > 7 * bosco.f);
    let x = alloc::vec![value; (bosco.n - b) as usize];
    let input = record([(replica(), bools(&x))]);
    let outs = denote_body(&bosco.body(), &cfg, &Bosco::inputs(&x), DenoteOptions::default())?;
    for out in &outs {
        report.cases += 1;
        let (y, z) = unzip_bosco(out);
        if !(y.iter().all(|d| *d == Some(value)) && z.iter().all(|v| *v == value)) {
            report.fail(&input, Some(out), format!("a node did not output (Some {value}, {value})"));
        }
    }
    Ok(report)
}

/// Both proof obligations of Bosco agreement over every good input vector,
/// for `Step^k'` with `k' ≤ k`:
/// (1) a decision on `B` at step 0 implies `UC_B` of the input;
/// (2) `UC_B` of the input implies `Comply_B` of the decisions and `UC_B` of
///     the next inputs.
/// Also checks that no output decides both values.
pub fn agreement_bosco(bosco: &Bosco, b: u32, k: u32) -> Result<CheckReport, DenoteError> {
    let cfg = bosco.config(b)?;
    let mut report = CheckReport::new("bosco-agreement", bosco.n > 3 * bosco.f);
    let bodies = (0..=k).map(|i| bosco.iterated(i)).collect::<Result<Vec<_>, _>>()?;
    for x in bool_vectors(bosco.n - b) {
        let input = record([(replica(), bools(&x))]);
        for (kk, body) in bodies.iter().enumerate() {
            let outs = denote_body(body, &cfg, &Bosco::inputs(&x), DenoteOptions::default())?;
            for out in &outs {
                report.cases += 1;
                let (y, z) = unzip_bosco(out);
                for bv in [true, false] {
                    let decide = y.contains(&Some(bv));
                    let uc = bosco.univalent(bv, &x);
                    if kk == 0 && decide && !uc {
                        report.fail(&input, Some(out), format!("step 0 decides {bv} without UC"));
                    }
                    if uc {
                        if !y.iter().all(|d| d.is_none() || *d == Some(bv)) {
                            report.fail(&input, Some(out), format!("UC_{bv} input but Comply fails at k={kk}"));
                        }
                        if !bosco.univalent(bv, &z) {
                            report.fail(&input, Some(out), format!("UC_{bv} not preserved at k={kk}"));
                        }
                    }
                }
                if y.contains(&Some(true)) && y.contains(&Some(false)) {
                    report.fail(&input, Some(out), String::from("both values decided"));
                }
            }
        }
    }
    Ok(report)
}

/// `fst(foldl fmaxr (None, 0) ℓ)`.
fn fmaxr_fold(l: &[Value]) -> Value {
    let mut acc = SeqPaxos::replica_value(None, 0);
    for m in l {
        let r = |v: &Value| v.as_pair().and_then(|p| p.1.as_nat()).unwrap_or(0);
        if r(&acc) < r(m) {
            acc = m.clone();
        }
    }
    acc.as_pair().map(|p| p.0.clone()).unwrap_or_else(Value::none)
}

/// `UC_D(x⃗)`: every network view of the replica states folds to `Some D`.
fn univalent_seqpaxos(cfg: &Config, d: &Value, x: &[Value], t: &crate::values::ValueType) -> Result<bool, DenoteError> {
    let target = Value::some(d.clone());
    Ok(netwk(cfg, &replica(), x, t)?.iter().all(|l| fmaxr_fold(l) == target))
}

struct PaxosState {
    decision: Value,
    round: u32,
    replicas: Vec<Value>,
}

fn split_seqpaxos(rec: &DistRecord) -> PaxosState {
    let l = &rec[&leader()][0];
    let (d, r) = l.as_pair().expect("leader output is a pair");
    PaxosState {
        decision: d.clone(),
        round: r.as_nat().expect("round is a nat"),
        replicas: rec.get(&replica()).cloned().unwrap_or_default(),
    }
}

fn replica_parts(v: &Value) -> (Option<Value>, u32) {
    let (o, r) = v.as_pair().expect("replica state is a pair");
    (o.as_option().expect("option").cloned(), r.as_nat().expect("round"))
}

/// The four bullets of the iteration-inputs lemma for the state after
/// iteration `i`. Returns the first violated bullet.
fn lemma_bullets(i: u32, s: &PaxosState) -> Option<&'static str> {
    if s.round != i + 2 {
        return Some("round is not i + 2");
    }
    let parts: Vec<_> = s.replicas.iter().map(replica_parts).collect();
    if parts.iter().any(|(_, r)| *r >= i + 2) {
        return Some("replica round not below i + 2");
    }
    if parts.iter().any(|(o, r)| *r > 0 && o.is_none()) {
        return Some("positive round without a value");
    }
    for (a, pa) in parts.iter().enumerate() {
        for pb in &parts[a + 1..] {
            if pa.1 == pb.1 && pa != pb {
                return Some("equal rounds with different values");
            }
        }
    }
    None
}

/// SeqPaxos agreement from `init` over at most `k + 1` iterations, with the
/// iteration-inputs lemma checked on every enumerated state:
/// (1) deciding `D` at iteration `i` implies `UC_D(x⃗_i)`;
/// (2) `UC_D(x⃗_i)` implies every later iteration decides `Some D` or nothing
///     and keeps `UC_D`.
pub fn agreement_seqpaxos(sp: &SeqPaxos, k: u32) -> Result<CheckReport, DenoteError> {
    let cfg = sp.config()?;
    let mut report = CheckReport::new("seqpaxos-agreement", sp.n > 2 * sp.f);
    let st = sp.replica_type();
    let values: Vec<Value> = sp.value_type().enumerate();
    let bodies = (0..=k).map(|i| sp.iterated(i)).collect::<Result<Vec<_>, _>>()?;
    let init = sp.init();
    let init_rec: DistRecord = init.clone();
    // continuations from a state, memoized by (iterations - 1, leader round, replicas)
    let mut cont: BTreeMap<(usize, u32, Vec<Value>), BTreeSet<DistRecord>> = BTreeMap::new();
    for i in 0..=k {
        let outs = denote_body(&bodies[i as usize], &cfg, &init, DenoteOptions::default())?;
        for out in &outs {
            report.cases += 1;
            let s = split_seqpaxos(out);
            if let Some(why) = lemma_bullets(i, &s) {
                report.fail(&init_rec, Some(out), format!("iteration {i}: {why}"));
            }
            for d in &values {
                let decided = s.decision == Value::some(d.clone());
                let uc = univalent_seqpaxos(&cfg, d, &s.replicas, &st)?;
                if decided && !uc {
                    report.fail(&init_rec, Some(out), format!("iteration {i} decides {d} without UC"));
                }
                if !(decided || uc) {
                    continue;
                }
                for (m, body) in bodies.iter().enumerate().take((k - i) as usize) {
                    let key = (m, s.round, s.replicas.clone());
                    if !cont.contains_key(&key) {
                        let mut inputs = BTreeMap::new();
                        inputs.insert(leader(), alloc::vec![Value::Nat(s.round)]);
                        inputs.insert(replica(), s.replicas.clone());
                        let later = denote_body(body, &cfg, &inputs, DenoteOptions::default())?;
                        cont.insert(key.clone(), later);
                    }
                    let j = i + 1 + m as u32;
                    for later in &cont[&key] {
                        report.cases += 1;
                        let t = split_seqpaxos(later);
                        if t.decision != Value::none() && t.decision != Value::some(d.clone()) {
                            report.fail(out, Some(later), format!("iteration {j} contradicts {d} decided or locked at {i}"));
                        }
                        if let Some(why) = lemma_bullets(j, &t) {
                            report.fail(out, Some(later), format!("iteration {j}: {why}"));
                        }
                        if uc && !univalent_seqpaxos(&cfg, d, &t.replicas, &st)? {
                            report.fail(out, Some(later), format!("UC_{d} lost at iteration {j}"));
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Occurrence bounds of network views for role `role`:
/// `#_v(ℓ) - f ≤ #_v(ℓ') ≤ #_v(ℓ) + b` for every good Boolean vector `ℓ` and
/// every `ℓ' ∈ Netwk(ℓ)`, plus witnesses that both bounds are reached.
pub fn counting_lemma(cfg: &Config, role: &Role) -> Result<CheckReport, DenoteError> {
    let rc = cfg.get(role)?;
    let mut report = CheckReport::new("counting-lemma", true);
    let t = crate::values::ValueType::Bool;
    for x in bool_vectors(rc.g()) {
        let l = bools(&x);
        let input = record([(role.clone(), l.clone())]);
        let views = netwk(cfg, role, &l, &t)?;
        for v in [TOP, BOT] {
            let c = count_occurrences(&v, &l);
            let (mut hit_hi, mut hit_lo) = (false, false);
            for lp in &views {
                report.cases += 1;
                let cp = count_occurrences(&v, lp);
                if cp + rc.f < c || cp > c + rc.b {
                    let out = record([(role.clone(), lp.clone())]);
                    report.fail(&input, Some(&out), format!("#{v} = {cp} outside [{c} - {}, {c} + {}]", rc.f, rc.b));
                }
                hit_hi |= cp == c + rc.b;
                hit_lo |= cp == c.saturating_sub(rc.f);
            }
            if !hit_hi {
                report.fail(&input, None, format!("no view reaches #{v} = {c} + {}", rc.b));
            }
            if !hit_lo {
                report.fail(&input, None, format!("no view reaches #{v} = max(0, {c} - {})", rc.f));
            }
        }
    }
    Ok(report)
}
