//! Acceptance criteria, one PASS/FAIL line each. Run with
//! `cargo test -p choreo --test acceptance`.

use std::collections::BTreeSet;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use choreo::commands::{Exit, Runner};
use choreo::spec::{PartialSpec, ProtocolName, RunSpec};
use choreo::trace::Trace;
use choreo_core::denote::netwk;
use choreo_core::global::{
    align, check_composition, check_decomposition, components, explore, global_compile, is_permissible,
    project_labels, restitch, ExploreOptions, Replay,
};
use choreo_core::protocols::{
    agreement_bosco, agreement_seqpaxos, counting_lemma, one_step, replica, Bosco, SeqPaxos, SimpleVote,
};
use choreo_core::values::{Value, ValueType, BOT, TOP};
use serde_json::Value as Json;

/// Pinned limits.
const GOLDEN_LIMIT: Duration = Duration::from_secs(5);
const ADEQUACY_LIMIT: Duration = Duration::from_secs(600);
const MIN_TRACES: usize = 200;
const ONE_STEP_LIMIT: Duration = Duration::from_secs(300);
const BOSCO_AGREEMENT_LIMIT: Duration = Duration::from_secs(300);
const SEQPAXOS_LIMIT: Duration = Duration::from_secs(900);
const COUNTING_LIMIT: Duration = Duration::from_secs(30);

type Verdict = Result<String, String>;

fn spec(protocol: ProtocolName, f: impl FnOnce(&mut PartialSpec)) -> RunSpec {
    let mut p = PartialSpec { protocol: Some(protocol), ..Default::default() };
    f(&mut p);
    p.resolve().expect("valid spec")
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    if t <= limit {
        Ok(t)
    } else {
        Err(format!("took {t:.2?}, limit {limit:?}"))
    }
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn permutations(l: &[Value]) -> BTreeSet<Vec<Value>> {
    if l.is_empty() {
        return [Vec::new()].into_iter().collect();
    }
    let mut out = BTreeSet::new();
    for i in 0..l.len() {
        let mut rest = l.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head.clone());
            out.insert(tail);
        }
    }
    out
}

fn simplevote_golden(runner: &Runner) -> Verdict {
    let start = Instant::now();
    let out = runner.enumerate(&spec(ProtocolName::Simplevote, |_| {})).map_err(|e| e.to_string())?;
    let got: BTreeSet<String> = out.report["runs"][0]["outputs"]
        .as_array()
        .ok_or("no outputs")?
        .iter()
        .map(|r| r["L"].to_string())
        .collect();
    let want: BTreeSet<String> = [
        r#"[{"t":"opt","v":{"t":"bool","v":true}}]"#.to_string(),
        r#"[{"t":"opt","v":null}]"#.to_string(),
    ]
    .into_iter()
    .collect();
    ensure(got == want, format!("leader outputs {got:?}"))?;
    let nine: [&[Value]; 9] = [
        &[TOP, TOP, TOP],
        &[TOP, BOT, TOP],
        &[TOP, BOT, TOP],
        &[TOP, TOP, BOT],
        &[TOP, BOT, BOT],
        &[TOP, BOT, BOT],
        &[TOP, TOP, BOT, TOP],
        &[TOP, TOP, BOT, BOT],
        &[TOP, TOP, BOT],
    ];
    let closure: BTreeSet<Vec<Value>> = nine.iter().flat_map(|l| permutations(l)).collect();
    let cfg = SimpleVote::new(4, 1).config(1).map_err(|e| e.to_string())?;
    let views = netwk(&cfg, &replica(), &[TOP, TOP, BOT], &ValueType::Bool).map_err(|e| e.to_string())?;
    ensure(views == closure, format!("{} network views, expected {}", views.len(), closure.len()))?;
    let t = within(start, GOLDEN_LIMIT)?;
    Ok(format!("2 outputs, {} network views, {t:.2?}", views.len()))
}

fn adequacy_specs() -> [RunSpec; 3] {
    [
        spec(ProtocolName::Simplevote, |_| {}),
        spec(ProtocolName::Bosco, |p| {
            p.n = Some(3);
            p.f = Some(1);
            p.b = Some(1);
            p.inputs = Some("all".into());
        }),
        spec(ProtocolName::Seqpaxos, |p| {
            p.n = Some(2);
            p.values = Some(2);
        }),
    ]
}

fn adequacy(runner: &Runner, reports: &mut Vec<Json>) -> Verdict {
    let mut notes = Vec::new();
    for s in adequacy_specs() {
        let start = Instant::now();
        let out = runner.check(&s, "adequacy").map_err(|e| e.to_string())?;
        let t = within(start, ADEQUACY_LIMIT)?;
        let r = &out.report;
        ensure(
            r["holds"] == true && r["exhaustive"] == true && out.exit == Exit::Holds,
            format!("{:?}: holds={} exhaustive={}", s.protocol, r["holds"], r["exhaustive"]),
        )?;
        let states: u64 = r["runs"].as_array().map(|a| a.iter().filter_map(|x| x["states"].as_u64()).sum()).unwrap_or(0);
        notes.push(format!("{:?} {states} states {t:.2?}", s.protocol));
        reports.push(out.report);
    }
    Ok(notes.join(", "))
}

fn sandwich(reports: &[Json]) -> Verdict {
    ensure(reports.len() == 3, "adequacy reports missing")?;
    let mut runs = 0;
    for r in reports {
        for run in r["runs"].as_array().ok_or("no runs")? {
            runs += 1;
            ensure(run["sandwich"] == true, format!("sandwich fails for input {}", run["input"]))?;
            ensure(run["equal"] == true, format!("operational != denotational for input {}", run["input"]))?;
            ensure(run["bigstep"] == run["denotational"], format!("bigstep != denotational for input {}", run["input"]))?;
        }
    }
    Ok(format!("{runs} runs, all three sets equal"))
}

fn alignment(runner: &Runner) -> Verdict {
    let mut traces = 0;
    let mut failures = Vec::new();
    for protocol in [ProtocolName::Simplevote, ProtocolName::Bosco, ProtocolName::Seqpaxos] {
        for seed in 0..(MIN_TRACES as u64 / 3 + 1) {
            let s = spec(protocol, |p| p.seed = Some(seed));
            let (out, text) = runner.simulate(&s, false, false).map_err(|e| e.to_string())?;
            let trace = Trace::read(text.as_bytes()).map_err(|e| e.to_string())?;
            let p = s
                .programs()
                .map_err(|e| e.to_string())?
                .into_iter()
                .find(|(i, _)| *i == trace.header.input)
                .ok_or("input not found")?
                .1;
            let (sys, s0) = global_compile(p, s.config().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            let labels = &trace.labels;
            let fin = match is_permissible(&sys, &s0, labels) {
                Replay::Permissible(f) => f,
                Replay::Blocked { index, .. } => return Err(format!("simulated trace blocked at {index}")),
            };
            let aligned = align(sys.delta(), labels);
            let ok = is_permissible(&sys, &s0, &aligned).state() == Some(&fin)
                && align(sys.delta(), &aligned) == aligned
                && components(&sys, &s0).iter().all(|i| project_labels(labels, i) == project_labels(&aligned, i))
                && out.report["in_denotation"] != false;
            let (checked, _) = runner.simulate(&s, true, false).map_err(|e| e.to_string())?;
            if !ok || checked.report["align_ok"] != true {
                failures.push(format!("{protocol:?} seed {seed}"));
            }
            traces += 1;
        }
    }
    ensure(traces >= MIN_TRACES, format!("only {traces} traces"))?;
    ensure(failures.is_empty(), format!("{} failures: {failures:?}", failures.len()))?;
    Ok(format!("{traces} traces, 0 failures"))
}

fn decomposition() -> Verdict {
    let sv = SimpleVote::new(4, 1);
    let bosco = Bosco::new(3, 1);
    let sp = SeqPaxos::new(2, 1, 2, 0);
    let systems = [
        (sv.closed(true, &[true, true, false]), sv.config(1).unwrap()),
        (bosco.body().apply(&Bosco::inputs(&[true, false])), bosco.config(1).unwrap()),
        (sp.body().apply(&sp.init()), sp.config().unwrap()),
    ];
    let mut traces = 0;
    let mut failures = 0;
    let mut seed: u64 = 0x5eed;
    for (p, cfg) in systems {
        let (sys, s0) = global_compile(p, cfg).map_err(|e| e.to_string())?;
        let ex = explore(&sys, &s0, &ExploreOptions::default()).map_err(|e| e.to_string())?;
        let step = ex.len().div_ceil(MIN_TRACES);
        for i in (0..ex.len()).step_by(step) {
            let labels = ex.trace(i);
            let stitched = restitch(&labels, &mut |k| {
                seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (seed >> 33) as usize % k
            });
            if check_decomposition(&sys, &s0, &labels).is_err() || check_composition(&sys, &s0, &labels, &stitched).is_err() {
                failures += 1;
            }
            traces += 1;
        }
    }
    ensure(traces >= MIN_TRACES, format!("only {traces} traces"))?;
    ensure(failures == 0, format!("{failures} failures"))?;
    Ok(format!("{traces} traces, 0 failures"))
}

fn one_step_check() -> Verdict {
    let start = Instant::now();
    for b in [0, 1] {
        for v in [true, false] {
            let r = one_step(&Bosco::new(8, 1), b, v).map_err(|e| e.to_string())?;
            ensure(r.holds && r.exhaustive, format!("n=8 b={b} B={v}: {:?}", r.counterexample))?;
        }
    }
    let neg = one_step(&Bosco::new(7, 1), 1, true).map_err(|e| e.to_string())?;
    ensure(!neg.precondition && !neg.holds, "n=7 control did not fail")?;
    let undecided = neg
        .counterexample
        .and_then(|c| c.output)
        .is_some_and(|o| o[&replica()].iter().any(|v| v.as_pair().is_some_and(|p| *p.0 == Value::none())));
    ensure(undecided, "n=7 counterexample has no undecided node")?;
    let t = within(start, ONE_STEP_LIMIT)?;
    Ok(format!("n=8 b∈{{0,1}} both values hold; n=7 control undecided; {t:.2?}"))
}

fn bosco_agreement() -> Verdict {
    let start = Instant::now();
    let mut cases = 0;
    for b in [0, 1] {
        let r = agreement_bosco(&Bosco::new(4, 1), b, 2).map_err(|e| e.to_string())?;
        ensure(r.holds && r.exhaustive, format!("b={b}: {:?}", r.counterexample))?;
        cases += r.cases;
    }
    let t = within(start, BOSCO_AGREEMENT_LIMIT)?;
    Ok(format!("16 + 8 input vectors, k ≤ 2, {cases} outcomes, {t:.2?}"))
}

fn seqpaxos_agreement() -> Verdict {
    let start = Instant::now();
    let r = agreement_seqpaxos(&SeqPaxos::new(3, 1, 2, 2), 2).map_err(|e| e.to_string())?;
    ensure(r.holds && r.exhaustive, format!("{:?}", r.counterexample))?;
    let t = within(start, SEQPAXOS_LIMIT)?;
    Ok(format!("{} outcomes, {t:.2?}", r.cases))
}

fn counting() -> Verdict {
    let start = Instant::now();
    let cfg = Bosco::new(4, 1).config(1).map_err(|e| e.to_string())?;
    let r = counting_lemma(&cfg, &replica()).map_err(|e| e.to_string())?;
    ensure(r.holds && r.exhaustive, format!("{:?}", r.counterexample))?;
    let t = within(start, COUNTING_LIMIT)?;
    Ok(format!("8 vectors, {} views, bounds tight, {t:.2?}", r.cases))
}

fn run_cli(args: &[&str]) -> Result<(Vec<u8>, i32), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_choreo"))
        .args(args)
        .env_remove("CHOREO_SEED")
        .env("CHOREO_CEX_DIR", std::env::temp_dir())
        .output()
        .map_err(|e| e.to_string())?;
    Ok((out.stdout, out.status.code().unwrap_or(-1)))
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let trace = dir.path().join("t.jsonl");
    let trace = trace.to_str().ok_or("path")?;
    let commands: Vec<Vec<&str>> = vec![
        vec!["enumerate", "--protocol", "bosco", "--n", "4", "--f", "1", "--b", "1"],
        vec!["check", "adequacy", "--protocol", "bosco"],
        vec!["check", "adequacy", "--protocol", "seqpaxos"],
        vec!["check", "one-step", "--n", "8", "--f", "1"],
        vec!["check", "bosco-agreement", "--n", "4", "--f", "1", "--iterations", "1"],
        vec!["check", "counting-lemma", "--n", "4", "--f", "1"],
        vec!["simulate", "--protocol", "seqpaxos", "--seed", "11", "--align"],
        vec!["simulate", "--protocol", "bosco", "--seed", "5", "--dump-channels"],
        vec!["simulate", "--protocol", "simplevote", "--seed", "2", "--out", trace],
        vec!["replay", trace],
    ];
    let mut n = 0;
    for c in &commands {
        let mut outputs = Vec::new();
        for jobs in ["1", "4", "1"] {
            let mut args = vec!["--jobs", jobs];
            args.extend(c.iter().copied());
            outputs.push(run_cli(&args)?);
        }
        ensure(outputs[0].1 == 0, format!("`{}` exited {}", c.join(" "), outputs[0].1))?;
        ensure(outputs.iter().all(|o| *o == outputs[0]), format!("`{}` output varies", c.join(" ")))?;
        ensure(!outputs[0].0.is_empty(), format!("`{}` printed nothing", c.join(" ")))?;
        n += 1;
    }
    Ok(format!("{n} commands byte-identical across reruns and --jobs 1/4"))
}

fn main() -> ExitCode {
    let runner = Runner::new(2).expect("thread pool");
    let mut reports = Vec::new();
    let golden = simplevote_golden(&runner);
    let adequate = adequacy(&runner, &mut reports);
    let results: Vec<(&str, Verdict)> = vec![
        ("simplevote-golden", golden),
        ("adequacy", adequate),
        ("alignment", alignment(&runner)),
        ("decomposition-composition", decomposition()),
        ("bosco-one-step", one_step_check()),
        ("bosco-agreement", bosco_agreement()),
        ("seqpaxos-agreement", seqpaxos_agreement()),
        ("counting-lemma", counting()),
        ("sandwich", sandwich(&reports)),
        ("determinism", determinism()),
    ];
    let mut failed = 0;
    for (i, (name, v)) in results.iter().enumerate() {
        match v {
            Ok(msg) => println!("PASS {:>2} {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg}", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
