use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::minic::{parse, MarkerMode};
use crate::operator::{extract_operators, ExtractOptions};
use crate::profile::profile_variable_usage;

const LOOP_FLOPS: &str = include_str!("../../tests/fixtures/loop_flops.c");
const MIXED: &str = include_str!("../../tests/fixtures/mixed.c");

/// Canonical seed with every statement line covered, or just `covered`.
fn seed(src: &str, covered: Option<&[u32]>) -> SeedProfile {
    let unit = parse(src).unwrap();
    let text = render(&unit);
    let unit = parse(&text).unwrap();
    let covered_lines = match covered {
        Some(c) => c.iter().copied().collect(),
        None => crate::minic::render_instrumented(&unit, MarkerMode::All, false).markers.into_iter().collect(),
    };
    SeedProfile {
        seed: SourceProgram::new("s1", text, "seed.c"),
        usage: profile_variable_usage(&unit),
        covered_lines,
        exec_ok: true,
        baseline_output: String::new(),
    }
}

fn op_where(src: &str, pred: impl Fn(&Operator) -> bool) -> Operator {
    extract_operators(&parse(src).unwrap(), "hist", 0, &ExtractOptions::default()).into_iter().find(|o| pred(o)).unwrap()
}

fn fig3() -> Operator {
    op_where(LOOP_FLOPS, |o| o.source.starts_with("for"))
}

fn lines(points: &[InsertionPoint]) -> Vec<u32> {
    points.iter().map(|p| p.line).collect()
}

fn rng(n: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(n)
}

const STRAIGHT: &str = "int main() {\n  int a = 1;\n  int b = 2;\n  a = a + b;\n  printf(\"%d\\n\", a);\n  return 0;\n}\n";

#[test]
fn unconstrained_operator_fits_every_covered_statement() {
    let op = op_where("int main() {\n  {\n    int t = 1;\n    t = t * 3;\n  }\n}\n", |o| o.source.contains("int t"));
    assert!(op.pre_context.is_empty() && op.post_context.is_empty());
    let p = seed(STRAIGHT, None);
    let points = find_insertion_points(&op, &p).unwrap();
    assert_eq!(lines(&points), vec![5, 6, 7, 8, 9]);

    // uncovered lines drop out
    let p = seed(STRAIGHT, Some(&[5, 6, 9]));
    assert_eq!(lines(&find_insertion_points(&op, &p).unwrap()), vec![5, 6, 9]);
}

const ONE_DOUBLE: &str = "int main() {\n  double d = 1.0;\n  int a = 2;\n  a = a + (int)d;\n  a = a * 2;\n  printf(\"%d\\n\", a);\n  return 0;\n}\n";

#[test]
fn post_context_needs_a_later_use() {
    let writer = op_where("int main() {\n  double d;\n  {\n    d = 1.5;\n  }\n}\n", |o| o.source.starts_with('{') && !o.source.contains("double d"));
    assert_eq!(writer.post_context.len(), 1);
    let p = seed(ONE_DOUBLE, None);
    assert_eq!(p.usage.iter().find(|u| u.name == "d").unwrap().last_use_line, 7);
    assert_eq!(lines(&find_insertion_points(&writer, &p).unwrap()), vec![6]);

    // a pure reader may be bound anywhere since it can be defined fresh
    let reader = op_where("int main() {\n  double d = 0.0;\n  int q = 0;\n  {\n    q = (int)d;\n    q = q + 1;\n  }\n}\n", |o| o.source.starts_with('{') && o.source.contains("q + 1") && !o.source.contains("int q"));
    assert!(reader.pre_context.iter().any(|e| e.name == "d"));
    assert!(reader.post_context.iter().any(|e| e.name == "q"));
    // q needs an int defined before the point and used after it: a, on 7 and 8
    assert_eq!(lines(&find_insertion_points(&reader, &p).unwrap()), vec![7, 8]);
}

const NINE_GLOBALS: &str = "double g_1 = 0.5;\ndouble g_2 = 1.5;\ndouble g_3 = 2.5;\ndouble g_4 = 3.5;\ndouble g_5 = 4.5;\ndouble g_6 = 5.5;\ndouble g_7 = 6.5;\ndouble g_8 = 7.5;\ndouble g_9 = 8.5;\nint main() {\n  int n = 3;\n  int k;\n  for (k = 0; k < n; k++) {\n    g_1 = g_1 + g_2 * g_3;\n  }\n  n = n + k;\n  printf(\"%f %f %d\\n\", g_1 + g_4 + g_5 + g_6 + g_7 + g_8 + g_9, g_2 + g_3, n);\n  return 0;\n}\n";

#[test]
fn loop_operator_against_nine_live_doubles() {
    let p = seed(NINE_GLOBALS, None);
    // prelude is 3 lines, globals 4..=12, main opens at 13
    assert!(p.seed.text.lines().nth(13).unwrap().contains("int n = 3;"));
    // 14 n not yet defined; 17 sits in a loop driven by the only ints;
    // 20 and 21 are past the last use of every double
    assert_eq!(lines(&find_insertion_points(&fig3(), &p).unwrap()), vec![15, 16, 19]);
}

#[test]
fn single_candidates_bind_the_same_way_under_any_rng() {
    let writer = op_where("int main() {\n  double d;\n  {\n    d = 1.5;\n  }\n}\n", |o| o.source.starts_with('{') && !o.source.contains("double d"));
    let p = seed(ONE_DOUBLE, None);
    let points = find_insertion_points(&writer, &p).unwrap();
    let plans: Vec<InsertionPlan> =
        (0..5).map(|s| bind_variables(&writer, &points[0], &p, &ValuePool::default(), &mut rng(s)).unwrap()).collect();
    assert!(plans.iter().all(|pl| pl == &plans[0]));
    assert_eq!(plans[0].bindings[0].binding, Binding::Reuse { var: "d".into() });
}

#[test]
fn random_choice_is_reproducible() {
    let op = op_where("int main() {\n  int x = 0;\n  {\n    x = x + 5;\n  }\n}\n", |o| o.source.starts_with('{') && !o.source.contains("int x"));
    let p = seed("int main() {\n  int a = 1;\n  int b = 2;\n  a = a + b;\n  printf(\"%d %d\\n\", a, b);\n  return 0;\n}\n", None);
    let points = find_insertion_points(&op, &p).unwrap();
    assert_eq!(lines(&points), vec![6, 7]);
    let point = &points[1];
    assert_eq!(point.entries[0].candidates, vec!["a".to_string(), "b".to_string()]);
    let first = bind_variables(&op, point, &p, &ValuePool::default(), &mut rng(42)).unwrap();
    let again = bind_variables(&op, point, &p, &ValuePool::default(), &mut rng(42)).unwrap();
    assert_eq!(first, again);
    let mut chosen = BTreeSet::new();
    for s in 0..32 {
        let pl = bind_variables(&op, point, &p, &ValuePool::default(), &mut rng(s)).unwrap();
        chosen.insert(pl.bindings[0].binding.target().to_string());
    }
    assert_eq!(chosen.len(), 2);
}

const THREE_DOUBLES: &str = "int main() {\n  int n = 4;\n  int c = 0;\n  double p = 1.0;\n  double q = 2.0;\n  double r = 3.0;\n  c = c + 1;\n  printf(\"%d %d %f %f %f\\n\", n, c, p, q, r);\n  return 0;\n}\n";

#[test]
fn missing_doubles_are_defined_fresh_before_the_operator() {
    let op = fig3();
    let p = seed(THREE_DOUBLES, None);
    let sp = synthesize(&op, &p, &ValuePool::default(), 7, &mut rng(3)).unwrap();
    let one = sp.plan.bindings.iter().find(|b| b.name == "one").unwrap();
    let Binding::Fresh { name, decls } = &one.binding else { panic!("{:?}", one) };
    assert_eq!(name, "one_f0");
    assert!(decls[0].starts_with("double one_f0 = "));
    let text: Vec<&str> = sp.program.text.lines().collect();
    let op_line = sp.op_line as usize;
    assert!(text[op_line - 1].trim_start().starts_with("for ("), "{}", sp.program.text);
    // every fresh definition sits in the run of lines just above the operator
    let fresh = sp.plan.bindings.iter().filter(|b| matches!(b.binding, Binding::Fresh { .. })).count();
    assert_eq!(fresh, 8);
    for l in &text[op_line - 1 - fresh..op_line - 1] {
        assert!(l.trim_start().starts_with("double "), "{}", l);
    }
    assert!(text[..op_line - 1].iter().any(|l| l.contains("double one_f0 = ")));
    // post-context variables went to the three seed doubles and an int
    let reused: BTreeSet<&str> = sp
        .plan
        .bindings
        .iter()
        .filter(|b| b.roles.contains(&Role::PostVar))
        .map(|b| b.binding.target())
        .collect();
    assert_eq!(reused.len(), 4);
    assert!(reused.contains("p") && reused.contains("q") && reused.contains("r"));
}

#[test]
fn synthesis_is_deterministic_and_self_checked() {
    let op = fig3();
    let p = seed(NINE_GLOBALS, None);
    let a = synthesize(&op, &p, &ValuePool::default(), 1, &mut rng(9)).unwrap();
    let b = synthesize(&op, &p, &ValuePool::default(), 1, &mut rng(9)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.program.id, format!("1_{}_s1", op.op_id));
    let unit = parse(&a.program.text).unwrap();
    assert_eq!(render(&unit), a.program.text);
}

#[test]
fn empty_seed_yields_no_valid_insertion() {
    let op = fig3();
    let p = seed("int main() {\n  return 0;\n}\n", None);
    assert_eq!(synthesize(&op, &p, &ValuePool::default(), 0, &mut rng(0)), Err(SynthError::NoValidInsertion));
    let mut dead = seed(NINE_GLOBALS, None);
    dead.exec_ok = false;
    assert!(find_insertion_points(&op, &dead).unwrap().is_empty());
}

#[test]
fn called_functions_are_copied_and_renamed_on_collision() {
    let op = op_where(MIXED, |o| o.source.contains("twice(k)") && o.source.starts_with("for"));
    let clean = seed("int main() {\n  int a = 1;\n  int b = 2;\n  a = a + b;\n  printf(\"%d\\n\", a + b);\n  return 0;\n}\n", None);
    let sp = synthesize(&op, &clean, &ValuePool::default(), 0, &mut rng(1)).unwrap();
    assert!(sp.program.text.contains("int twice(int v) {"));
    assert_eq!(sp.plan.function_bindings.get("twice").map(String::as_str), Some("twice"));

    let clash = seed("int main() {\n  int twice = 1;\n  int b = 2;\n  b = b + twice;\n  printf(\"%d\\n\", twice + b);\n  return 0;\n}\n", None);
    let sp = synthesize(&op, &clash, &ValuePool::default(), 0, &mut rng(1)).unwrap();
    assert!(sp.program.text.contains("int twice_f0(int v) {"), "{}", sp.program.text);
    assert!(sp.program.text.contains("twice_f0(k)") || sp.program.text.contains("twice_f0("));
    parse(&sp.program.text).unwrap();
}

#[test]
fn inner_declarations_avoid_seed_names() {
    let op = op_where("int main() {\n  int s = 0;\n  for (int i = 0; i < 3; i++) {\n    s += i;\n  }\n  printf(\"%d\\n\", s);\n}\n", |o| o.source.starts_with("for"));
    let p = seed("int main() {\n  int i = 5;\n  int t = 0;\n  t = t + i;\n  printf(\"%d %d\\n\", i, t);\n  return 0;\n}\n", None);
    let sp = synthesize(&op, &p, &ValuePool::default(), 0, &mut rng(2)).unwrap();
    assert_eq!(sp.plan.renamed_locals.get("i").map(String::as_str), Some("i_f0"));
    assert!(sp.program.text.contains("for (int i_f0 = 0; i_f0 < 3; i_f0++) {"), "{}", sp.program.text);
}

#[test]
fn loop_bodies_are_valid_points_for_read_only_use_of_the_counter() {
    let op = op_where("int main() {\n  int k = 0;\n  double acc = 0.0;\n  {\n    acc = acc + (double)k * 0.5;\n  }\n}\n", |o| o.source.starts_with('{') && !o.source.contains("int k"));
    let p = seed("int main() {\n  int k;\n  double acc = 0.0;\n  for (k = 0; k < 10; k++) {\n    acc = acc + 1.0;\n  }\n  printf(\"%f\\n\", acc);\n  return 0;\n}\n", None);
    let points = find_insertion_points(&op, &p).unwrap();
    assert!(lines(&points).contains(&8));
    let body = points.iter().find(|pt| pt.line == 8).unwrap();
    let k = body.entries.iter().find(|e| e.name == "k").unwrap();
    assert_eq!(k.candidates, vec!["k".to_string()]);
}

#[test]
fn distinct_targets_per_operator() {
    let op = fig3();
    let p = seed(NINE_GLOBALS, None);
    for s in 0..20 {
        let sp = synthesize(&op, &p, &ValuePool::default(), 0, &mut rng(s)).unwrap();
        let targets: Vec<&str> = sp.plan.bindings.iter().map(|b| b.binding.target()).collect();
        let uniq: BTreeSet<&&str> = targets.iter().collect();
        assert_eq!(uniq.len(), targets.len());
    }
}

#[test]
fn fresh_values_come_from_the_pool() {
    let pool = ValuePool::default();
    let mut taken = BTreeSet::new();
    let mut r = rng(5);
    let d = fresh_decls("x_f0", &CType::DOUBLE, &pool, &mut taken, &mut r);
    let v = d[0].trim_start_matches("double x_f0 = ").trim_end_matches(';');
    assert!(pool.floats.iter().any(|f| f == v));
    let arr = fresh_decls("a_f0", &CType::array(crate::minic::BaseType::Int, 8), &pool, &mut taken, &mut r);
    assert_eq!(arr[0].matches(',').count(), 7);
    let ptr = fresh_decls("p_f0", &CType::pointer(crate::minic::BaseType::Int, 1), &pool, &mut taken, &mut r);
    assert_eq!(ptr.len(), 2);
    assert!(ptr[1].ends_with("= &p_f0_f0;"), "{:?}", ptr);
}
