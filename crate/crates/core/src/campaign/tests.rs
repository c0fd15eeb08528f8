use super::*;
use crate::dist::RatioVector;
use crate::minic::Span;
use crate::operator::Provenance;
use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::ToString;
use alloc::vec;

#[derive(Clone, Copy, Debug)]
enum Step {
    Score(f64),
    NoFit,
    Fail,
}

/// Replays a fixed outcome sequence; `extract` hands out scripted operators
/// for named programs.
struct Script {
    steps: VecDeque<Step>,
    extracts: BTreeMap<String, Vec<Operator>>,
    calls: Vec<(String, String)>,
}

impl Script {
    fn new(steps: &[Step]) -> Self {
        Script { steps: steps.iter().copied().collect(), extracts: BTreeMap::new(), calls: Vec::new() }
    }
}

impl Evaluator for Script {
    fn evaluate(&mut self, op: &Operator, seed: &SeedProfile, attempt: u64, _rng: &mut ChaCha8Rng) -> Outcome {
        self.calls.push((op.op_id.clone(), seed.seed.id.clone()));
        match self.steps.pop_front().expect("script exhausted") {
            Step::Score(s) => {
                let id = format!("p{}", attempt);
                Outcome::Scored(ScoredProgram {
                    program: SourceProgram::new(id.clone(), "int main() {\n  return 0;\n}\n", "generated"),
                    op_id: op.op_id.clone(),
                    seed_id: seed.seed.id.clone(),
                    score: s,
                    deviation: DeviationReport {
                        program_id: id,
                        dist_score: s,
                        per_runtime_deviation: vec![],
                        suspect: "B".into(),
                    },
                })
            }
            Step::NoFit => Outcome::NoValidInsertion,
            Step::Fail => Outcome::Failed("crashed".into()),
        }
    }

    fn extract(&mut self, program: &SourceProgram, _generation: u64, _opts: &ExtractOptions) -> Vec<Operator> {
        self.extracts.remove(&program.id).unwrap_or_default()
    }
}

fn op(id: &str, from: &str) -> Operator {
    Operator {
        op_id: id.into(),
        kind: OperatorKind::Sequential,
        source: "{\n}\n".into(),
        pre_context: vec![],
        post_context: vec![],
        support: String::new(),
        penalty: 0,
        provenance: Provenance { program_id: from.into(), span: Span { start: 1, end: 1 }, generation: 0 },
        stats: OpStats { int_ops: 0, fp_ops: 1 },
    }
}

fn seeds(n: usize) -> Vec<SeedProfile> {
    (0..n)
        .map(|i| SeedProfile {
            seed: SourceProgram::new(format!("s{}", i), "int main() {\n  return 0;\n}\n", "seeds"),
            usage: vec![],
            covered_lines: BTreeSet::new(),
            exec_ok: true,
            baseline_output: String::new(),
        })
        .collect()
}

fn oracle() -> OracleRatio {
    OracleRatio { vector: RatioVector(vec![0.5, 0.5]), derivation: vec![] }
}

fn params(n: usize, m: u32, k: u64) -> CampaignParams {
    CampaignParams { n, m, k, rng_seed: 7, max_operator_lines: 60 }
}

fn state(p: CampaignParams, ops: &[&str], n_seeds: usize) -> CampaignState {
    CampaignState::new(p, ops.iter().map(|o| op(o, "hist")).collect(), seeds(n_seeds), oracle()).unwrap()
}

fn short(e: &Event) -> String {
    let kind = serde_json::to_value(e.event).unwrap();
    let mut s = format!("{} {}", kind.as_str().unwrap(), e.op_id);
    if let Some(p) = &e.program_id {
        s += &format!(" {}", p);
    }
    if let Some(pen) = e.penalty_after {
        s += &format!(" pen={}", pen);
    }
    s
}

#[test]
fn hand_traced_bookkeeping() {
    use Step::*;
    // a scores, b fits nowhere; afterwards only a is drawn
    let mut script = Script::new(&[
        Score(0.10), // p0 initial a
        NoFit,       // b → uninsertable
        Score(0.05), // p2 improve (set not full)
        Score(0.03), // p3 no_improve pen=1
        Fail,        // 4: fail pen=2
        Score(0.04), // p5 no_improve pen=3
        Score(0.20), // p6 improve, evicts p2, pen=0
        Score(0.10), // p7 equal to min, no_improve pen=1
        Score(0.01), // pen=2
        Score(0.02), // pen=3
        Score(0.09), // pen=4
        Score(0.00), // pen=5 → remove, pool empty
    ]);
    let mut c = Controller::new(state(params(2, 5, 100), &["a", "b"], 1), &mut script);
    c.run();
    let log: Vec<String> = c.state.events.iter().map(short).collect();
    let expected = [
        "initial a p0 pen=0",
        "uninsertable b",
        "improve a p2 pen=0",
        "no_improve a p3 pen=1",
        "fail a pen=2",
        "no_improve a p5 pen=3",
        "improve a p6 pen=0",
        "no_improve a p7 pen=1",
        "no_improve a p8 pen=2",
        "no_improve a p9 pen=3",
        "no_improve a p10 pen=4",
        "no_improve a p11 pen=5",
        "remove a pen=5",
    ];
    assert_eq!(log, expected);
    assert!(c.state.is_done());
    assert!(c.state.op_pool.is_empty());
    assert_eq!(c.state.generated_count, 10);
    let top: Vec<&str> = c.state.ranked().iter().map(|t| t.program.program.id.as_str()).collect();
    assert_eq!(top, ["p6", "p0"]);
    assert!(script.steps.is_empty());
}

#[test]
fn min_never_drops_once_full() {
    let scores = [0.3, 0.1, 0.5, 0.05, 0.2, 0.6, 0.15, 0.7, 0.1, 0.8, 0.0, 0.9, 0.45];
    let steps: Vec<Step> = scores.iter().map(|s| Step::Score(*s)).collect();
    let mut script = Script::new(&steps);
    let mut c = Controller::new(state(params(3, 100, scores.len() as u64), &["a"], 2), &mut script);
    c.run();
    let full: Vec<&SeriesPoint> = c.state.series.iter().filter(|p| p.full).collect();
    assert!(full.len() > 5);
    for w in full.windows(2) {
        assert!(w[1].min >= w[0].min);
        assert!(w[1].avg >= w[0].avg);
    }
    let best: Vec<f64> = c.state.ranked().iter().map(|t| t.program.score).collect();
    assert_eq!(best, [0.9, 0.8, 0.7]);
    assert_eq!(c.state.generated_count, scores.len() as u64);
}

#[test]
fn stops_at_k_even_in_the_initial_pass() {
    let mut script = Script::new(&[Step::Score(0.1), Step::Score(0.2), Step::Score(0.3)]);
    let mut c = Controller::new(state(params(5, 5, 2), &["a", "b", "c"], 1), &mut script);
    c.run();
    assert_eq!(c.state.generated_count, 2);
    assert_eq!(script.steps.len(), 1);
}

#[test]
fn uninsertable_tries_every_seed() {
    let mut script = Script::new(&[Step::NoFit, Step::NoFit, Step::NoFit, Step::NoFit]);
    let mut c = Controller::new(state(params(2, 5, 10), &["a"], 4), &mut script);
    c.run();
    assert_eq!(short(&c.state.events[0]), "uninsertable a");
    assert!(c.state.is_done());
    let seeds_tried: BTreeSet<&str> = script.calls.iter().map(|(_, s)| s.as_str()).collect();
    assert_eq!(seeds_tried.len(), 4);
}

#[test]
fn retry_stops_at_the_first_fitting_seed() {
    let mut script = Script::new(&[Step::NoFit, Step::Score(0.4), Step::Score(0.0)]);
    let mut c = Controller::new(state(params(2, 1, 2), &["a"], 3), &mut script);
    c.run();
    assert_eq!(script.calls.len(), 3);
    assert_ne!(script.calls[0].1, script.calls[1].1);
}

#[test]
fn initial_failures_keep_the_operator() {
    let mut script = Script::new(&[Step::Fail, Step::Score(0.1)]);
    let mut c = Controller::new(state(params(2, 5, 1), &["a"], 1), &mut script);
    c.run();
    assert_eq!(short(&c.state.events[0]), "initial_fail a pen=0");
    assert_eq!(short(&c.state.events[1]), "improve a p1 pen=0");
}

#[test]
fn eviction_drops_the_older_of_tied_minimums() {
    let steps = [Step::Score(0.2), Step::Score(0.2), Step::Score(0.5)];
    let mut script = Script::new(&steps);
    let mut c = Controller::new(state(params(2, 5, 3), &["a"], 1), &mut script);
    c.run();
    let ids: Vec<&str> = c.state.ranked().iter().map(|t| t.program.program.id.as_str()).collect();
    assert_eq!(ids, ["p2", "p1"]);
}

#[test]
fn improving_programs_feed_the_pool_and_carry_ancestry() {
    let mut script = Script::new(&[Step::Score(0.1), Step::Score(0.3), Step::Score(0.2), Step::Score(0.25)]);
    script.extracts.insert("p0".into(), vec![op("c", "p0")]);
    let mut c = Controller::new(state(params(1, 9, 4), &["a"], 1), &mut script);
    c.run();
    assert!(c.state.archive.contains_key("c"));
    assert!(c.state.events.iter().any(|e| e.event == EventKind::Extract && e.op_id == "c"));
    // any program built from c descends from a through p0
    for (prog, chain) in &c.state.ancestry {
        if chain[0] == "c" {
            assert_eq!(chain, &["c".to_string(), "a".to_string()], "{}", prog);
        }
    }
    assert_eq!(c.state.ancestry_of("p0"), ["a".to_string()]);
}

#[test]
fn checkpoint_resume_matches_an_uninterrupted_run() {
    let scores: Vec<Step> = (0..40).map(|i| Step::Score(((i * 37) % 23) as f64 / 23.0)).collect();
    let p = params(4, 3, 30);
    let names = ["a", "b", "c", "d", "e"];

    let mut whole = Script::new(&scores);
    let mut c = Controller::new(state(p.clone(), &names, 3), &mut whole);
    c.run();
    let reference = serde_json::to_string(&c.state).unwrap();

    let mut first = Script::new(&scores);
    let mut c1 = Controller::new(state(p, &names, 3), &mut first);
    c1.run_until(12);
    let saved = serde_json::to_string(&c1.state).unwrap();
    let used = first.calls.len();

    let mut second = Script::new(&scores[used..]);
    let restored: CampaignState = serde_json::from_str(&saved).unwrap();
    let mut c2 = Controller::new(restored, &mut second);
    c2.run();
    assert_eq!(serde_json::to_string(&c2.state).unwrap(), reference);
}

#[test]
fn rejects_empty_inputs() {
    assert_eq!(
        CampaignState::new(params(2, 5, 5), vec![], seeds(1), oracle()).unwrap_err(),
        CampaignError::EmptyOperatorPool
    );
    assert_eq!(
        CampaignState::new(params(2, 5, 5), vec![op("a", "h")], vec![], oracle()).unwrap_err(),
        CampaignError::EmptySeedPool
    );
    assert!(CampaignState::new(params(0, 5, 5), vec![op("a", "h")], seeds(1), oracle()).is_err());
}

#[test]
fn issue_groups_split_by_suspect_and_lineage() {
    let mut script = Script::new(&[Step::Score(0.1), Step::Score(0.2)]);
    let mut c = Controller::new(state(params(5, 5, 2), &["a", "b"], 1), &mut script);
    c.run();
    let ranked = c.state.ranked();
    let inputs: Vec<GroupInput<'_>> = ranked
        .iter()
        .map(|t| GroupInput {
            program_id: &t.program.program.id,
            suspect: &t.program.deviation.suspect,
            ancestry: c.state.ancestry_of(&t.program.program.id),
        })
        .collect();
    let groups = issue_groups(&inputs);
    assert_eq!(groups.len(), 2);
    assert!(groups.iter().all(|g| g.suspect == "B" && g.programs.len() == 1));
}
