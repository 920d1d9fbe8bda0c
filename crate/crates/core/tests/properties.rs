use std::collections::BTreeSet;

use choreo_core::channel::{invariants_hold, netwk_lll, netwk_lll_contains};
use choreo_core::denote::{restrict, Config, DenoteOptions, Denoter, Env};
use choreo_core::global::{
    align, check_composition, check_decomposition, components, extract, global_compile, global_step,
    is_permissible, project_labels, random_walk, restitch, GlobalLabel, GlobalState, System, SystemOptions,
};
use choreo_core::hll::Program;
use choreo_core::protocols::{Bosco, SeqPaxos, SimpleVote};
use choreo_core::values::Value;
use proptest::prelude::*;

fn instance(which: u8, bits: &[bool]) -> (Program, Config) {
    match which % 3 {
        0 => {
            let sv = SimpleVote::new(4, 1);
            (sv.closed(bits[3], &bits[..3]), sv.config(1).unwrap())
        }
        1 => {
            let b = Bosco::new(3, 1);
            (b.iterated(1).unwrap().apply(&Bosco::inputs(&bits[..2])), b.config(1).unwrap())
        }
        _ => {
            let sp = SeqPaxos::new(2, 1, 2, 0);
            (sp.body().apply(&sp.init()), sp.config().unwrap())
        }
    }
}

fn compiled(which: u8, bits: &[bool], late_byz: bool) -> (System, GlobalState) {
    let (p, cfg) = instance(which, bits);
    let (sys, s0) = global_compile(p, cfg).unwrap();
    (sys.with_options(SystemOptions { byz_after_receive: late_byz, ..SystemOptions::default() }), s0)
}

fn walk(sys: &System, s0: &GlobalState, choices: &[u32]) -> (Vec<GlobalLabel>, GlobalState) {
    let mut it = choices.iter().cycle();
    random_walk(sys, s0, &mut |k| *it.next().unwrap() as usize % k, 500).unwrap()
}

fn arb_case() -> impl Strategy<Value = (u8, Vec<bool>, Vec<u32>, bool)> {
    (0u8..3, prop::collection::vec(any::<bool>(), 4), prop::collection::vec(any::<u32>(), 1..64), any::<bool>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn channel_invariants_along_walks((which, bits, choices, late) in arb_case()) {
        let (sys, s0) = compiled(which, &bits, late);
        let (labels, _) = walk(&sys, &s0, &choices);
        let mut s = s0;
        for l in &labels {
            s = global_step(&sys, &s, l).unwrap();
            for (c, st) in &s.channels {
                prop_assert!(invariants_hold(sys.spec(c).unwrap(), st));
            }
        }
    }

    #[test]
    fn walks_are_deterministic_and_replayable((which, bits, choices, late) in arb_case()) {
        let (sys, s0) = compiled(which, &bits, late);
        let (a, fa) = walk(&sys, &s0, &choices);
        let (b, fb) = walk(&sys, &s0, &choices);
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&fa, &fb);
        let replay = is_permissible(&sys, &s0, &a);
        prop_assert_eq!(replay.state(), Some(&fa));
    }

    #[test]
    fn alignment_preserves_projections_and_final_state((which, bits, choices, late) in arb_case()) {
        let (sys, s0) = compiled(which, &bits, late);
        let (labels, fin) = walk(&sys, &s0, &choices);
        let aligned = align(sys.delta(), &labels);
        prop_assert_eq!(align(sys.delta(), &aligned), aligned.clone());
        let mut sorted_a = labels.clone();
        let mut sorted_b = aligned.clone();
        sorted_a.sort();
        sorted_b.sort();
        prop_assert_eq!(sorted_a, sorted_b);
        for i in components(&sys, &s0) {
            prop_assert_eq!(project_labels(&labels, &i), project_labels(&aligned, &i));
        }
        let replay = is_permissible(&sys, &s0, &aligned);
        prop_assert_eq!(replay.state(), Some(&fin));
    }

    #[test]
    fn walks_decompose_and_recompose((which, bits, choices, late) in arb_case(), stitch in prop::collection::vec(any::<u32>(), 1..32)) {
        let (sys, s0) = compiled(which, &bits, late);
        let (labels, _) = walk(&sys, &s0, &choices);
        prop_assert!(check_decomposition(&sys, &s0, &labels).is_ok());
        let mut it = stitch.iter().cycle();
        let stitched = restitch(&labels, &mut |k| *it.next().unwrap() as usize % k);
        prop_assert!(check_composition(&sys, &s0, &labels, &stitched).is_ok());
    }

    #[test]
    fn completed_walks_land_in_the_denotation((which, bits, choices, late) in arb_case()) {
        let (sys, s0) = compiled(which, &bits, late);
        let (_, fin) = walk(&sys, &s0, &choices);
        prop_assume!(fin.is_completed());
        let dens = Denoter::new(sys.config(), sys.delta(), DenoteOptions::default())
            .run(&Env::new(), sys.program())
            .unwrap();
        let out = restrict(&[extract(&fin).unwrap()].into_iter().collect(), &sys.result_roles());
        prop_assert!(out.is_subset(&dens));
    }

    #[test]
    fn netwk_membership_agrees_with_enumeration(l in prop::collection::vec(0u32..3, 0..5), lo in 0u32..4, probe in prop::collection::vec(0u32..3, 0..6)) {
        let l: Vec<Value> = l.into_iter().map(Value::Nat).collect();
        let probe: Vec<Value> = probe.into_iter().map(Value::Nat).collect();
        let all: BTreeSet<Vec<Value>> = netwk_lll(&l, lo);
        prop_assert_eq!(all.contains(&probe), netwk_lll_contains(&l, lo, &probe));
        for m in &all {
            prop_assert!(netwk_lll_contains(&l, lo, m));
        }
    }
}
