use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{enabled, extract, global_step, GlobalError, GlobalLabel, GlobalState, System};
use crate::denote::{restrict, DistRecord, OutputSet};
use alloc::collections::BTreeSet;
use crate::hll::Role;

/// Exploration limits. `None` means unlimited.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Budget {
    pub max_states: Option<usize>,
    pub max_depth: Option<usize>,
}

/// Why an exploration stopped before covering the whole state space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum StopReason {
    MaxStates,
    MaxDepth,
    Interrupted,
}

pub type Successors = Result<Vec<(GlobalLabel, GlobalState)>, GlobalError>;

/// Maps a function over the positions of a BFS level. Implementations may
/// run in parallel but must return results in index order.
pub trait FrontierMap {
    fn map_frontier(&self, len: usize, f: &(dyn Fn(usize) -> Successors + Sync)) -> Vec<Successors>;
}

/// Runs the level on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl FrontierMap for Sequential {
    fn map_frontier(&self, len: usize, f: &(dyn Fn(usize) -> Successors + Sync)) -> Vec<Successors> {
        (0..len).map(f).collect()
    }
}

fn never() -> bool {
    false
}

pub struct ExploreOptions<'a> {
    pub budget: Budget,
    /// Merge states that agree up to message order (see
    /// [`GlobalState::canonical`]).
    pub dedup: bool,
    pub map: &'a dyn FrontierMap,
    /// Polled once per level and every few thousand states.
    pub interrupt: &'a dyn Fn() -> bool,
}

impl Default for ExploreOptions<'_> {
    fn default() -> Self {
        ExploreOptions { budget: Budget::default(), dedup: true, map: &Sequential, interrupt: &never }
    }
}

/// Reachable states with parent pointers, in BFS discovery order.
#[derive(Debug, Clone)]
pub struct Exploration {
    states: Vec<GlobalState>,
    parents: Vec<Option<(usize, GlobalLabel)>>,
    completed: Vec<usize>,
    outputs: BTreeMap<DistRecord, usize>,
    stop: Option<StopReason>,
    transitions: usize,
    depth: usize,
}

impl Exploration {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, i: usize) -> &GlobalState {
        &self.states[i]
    }

    /// Indices of completed states.
    pub fn completed(&self) -> &[usize] {
        &self.completed
    }

    /// Every extracted output with the first completed state producing it.
    pub fn outputs(&self) -> &BTreeMap<DistRecord, usize> {
        &self.outputs
    }

    pub fn output_set(&self) -> OutputSet {
        self.outputs.keys().cloned().collect()
    }

    /// Outputs restricted to `roles`, each with a witness state.
    pub fn restricted_outputs(&self, roles: &BTreeSet<Role>) -> BTreeMap<DistRecord, usize> {
        let mut out = BTreeMap::new();
        for (rec, &i) in &self.outputs {
            let one: OutputSet = [rec.clone()].into_iter().collect();
            for r in restrict(&one, roles) {
                out.entry(r).or_insert(i);
            }
        }
        out
    }

    pub fn stop(&self) -> Option<StopReason> {
        self.stop
    }

    pub fn is_exhaustive(&self) -> bool {
        self.stop.is_none()
    }

    pub fn transitions(&self) -> usize {
        self.transitions
    }

    /// Number of BFS levels expanded.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// The labels leading from the initial state to state `i`.
    pub fn trace(&self, mut i: usize) -> Vec<GlobalLabel> {
        let mut out = Vec::new();
        while let Some((p, l)) = &self.parents[i] {
            out.push(l.clone());
            i = *p;
        }
        out.reverse();
        out
    }
}

pub fn successors(sys: &System, s: &GlobalState) -> Successors {
    enabled(sys, s)?.into_iter().map(|l| Ok((l.clone(), global_step(sys, s, &l)?))).collect()
}

/// Breadth-first search over permissible traces from `s0`.
///
/// Stops early when the budget runs out or `interrupt` fires; the result then
/// reports itself as non-exhaustive.
pub fn explore(sys: &System, s0: &GlobalState, opts: &ExploreOptions<'_>) -> Result<Exploration, GlobalError> {
    let mut ex = Exploration {
        states: alloc::vec![s0.clone()],
        parents: alloc::vec![None],
        completed: Vec::new(),
        outputs: BTreeMap::new(),
        stop: None,
        transitions: 0,
        depth: 0,
    };
    let mut visited: BTreeMap<GlobalState, usize> = BTreeMap::new();
    if opts.dedup {
        visited.insert(s0.canonical(), 0);
    }
    if s0.is_completed() {
        ex.completed.push(0);
        ex.outputs.insert(extract(s0)?, 0);
    }
    let mut frontier = alloc::vec![0usize];
    'levels: while !frontier.is_empty() {
        if (opts.interrupt)() {
            ex.stop = Some(StopReason::Interrupted);
            break;
        }
        if opts.budget.max_depth.is_some_and(|d| ex.depth >= d) {
            for &i in &frontier {
                if !enabled(sys, &ex.states[i])?.is_empty() {
                    ex.stop = Some(StopReason::MaxDepth);
                    break;
                }
            }
            break;
        }
        let states = &ex.states;
        let results = opts.map.map_frontier(frontier.len(), &|k| successors(sys, &states[frontier[k]]));
        let mut next = Vec::new();
        for (k, res) in results.into_iter().enumerate() {
            for (l, s) in res? {
                ex.transitions += 1;
                if opts.dedup {
                    let key = s.canonical();
                    if visited.contains_key(&key) {
                        continue;
                    }
                    visited.insert(key, ex.states.len());
                }
                if opts.budget.max_states.is_some_and(|m| ex.states.len() >= m) {
                    ex.stop = Some(StopReason::MaxStates);
                    break 'levels;
                }
                let idx = ex.states.len();
                if idx.is_multiple_of(4096) && (opts.interrupt)() {
                    ex.stop = Some(StopReason::Interrupted);
                    break 'levels;
                }
                if s.is_completed() {
                    ex.completed.push(idx);
                    ex.outputs.entry(extract(&s)?).or_insert(idx);
                }
                ex.states.push(s);
                ex.parents.push(Some((frontier[k], l)));
                next.push(idx);
            }
        }
        frontier = next;
        ex.depth += 1;
    }
    Ok(ex)
}

/// One maximal permissible trace, picking among enabled labels with
/// `choose(k) < k`. Stops after `max_steps` labels.
pub fn random_walk(
    sys: &System,
    s0: &GlobalState,
    choose: &mut dyn FnMut(usize) -> usize,
    max_steps: usize,
) -> Result<(Vec<GlobalLabel>, GlobalState), GlobalError> {
    let mut s = s0.clone();
    let mut labels = Vec::new();
    while labels.len() < max_steps {
        let en = enabled(sys, &s)?;
        if en.is_empty() {
            break;
        }
        let l = en[choose(en.len()) % en.len()].clone();
        s = global_step(sys, &s, &l)?;
        labels.push(l);
    }
    Ok((labels, s))
}
