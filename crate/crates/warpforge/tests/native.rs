use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use warpforge::config::Config;
use warpforge::native::{collect_coverage, profile_seed, verify_insertion, Native, NativeError};
use warpforge_core::cost::EventClass;
use warpforge_core::minic::{parse, SourceProgram};
use warpforge_core::operator::{extract_operators, ExtractOptions};
use warpforge_core::seedgen::{generate_seed, SeedGenOptions};
use warpforge_core::synth::{synthesize, SynthError, ValuePool};

const BRANCHY: &str = "#include <stdio.h>

int main() {
  int a = 3;
  double d = 0.5;
  if (a > 2) {
    d = d * 3.0;
  } else {
    d = d - 1.0;
  }
  printf(\"%f\\n\", d);
  return 0;
}
";

fn native() -> Native {
    Native::from_config(&Config::default())
}

#[test]
fn coverage_sees_only_the_taken_branch() {
    let seed = SourceProgram::new("b", BRANCHY, "");
    let cov = collect_coverage(&seed, &native()).unwrap();
    assert!(cov.covered_lines.contains(&7));
    assert!(!cov.covered_lines.contains(&9));
    assert!(cov.events.get(EventClass::FpOp) >= 1);
    assert_eq!(cov.events.get(EventClass::Output), 1);
}

#[test]
fn instrumentation_does_not_change_output() {
    let n = native();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..5 {
        let seed = generate_seed(&mut rng, &format!("s{}", i), &SeedGenOptions::default()).unwrap();
        let plain = n.run_plain(&seed.text).unwrap();
        let cov = collect_coverage(&seed, &n).unwrap();
        assert_eq!(plain, cov.baseline_output, "seed {}", i);
    }
}

#[test]
fn profiles_carry_canonical_text() {
    let messy = BRANCHY.replace("  d = d * 3.0;", "d=d*3.0;");
    let (p, events) = profile_seed(&SourceProgram::new("m", messy, ""), &native()).unwrap();
    assert_eq!(p.seed.text, warpforge_core::minic::render(&parse(BRANCHY).unwrap()));
    assert!(p.exec_ok);
    assert!(!p.usage.is_empty());
    assert!(events.get(EventClass::FpOp) > 0);
}

#[test]
fn compile_errors_are_reported() {
    let err = native().run_plain("int main() { return undefined_name; }\n").unwrap_err();
    assert!(matches!(err, NativeError::Compile { .. }), "{err}");
}

#[test]
fn crashing_programs_are_errors() {
    let err = native().run_plain("int main() {\n  int z = 0;\n  return 10 / z;\n}\n").unwrap_err();
    assert!(matches!(err, NativeError::NonZeroExit { .. }), "{err}");
}

#[test]
fn inserted_loop_is_reached() {
    let n = native();
    let donor = parse(include_str!("../../core/tests/fixtures/loop_flops.c")).unwrap();
    let ops = extract_operators(&donor, "loop_flops", 0, &ExtractOptions::default());
    let op = ops.iter().find(|o| o.source.starts_with("for")).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    for i in 0..6 {
        let seed = generate_seed(&mut rng, &format!("s{}", i), &SeedGenOptions::default()).unwrap();
        let (profile, _) = profile_seed(&seed, &n).unwrap();
        let sp = match synthesize(op, &profile, &ValuePool::default(), i, &mut rng) {
            Ok(sp) => sp,
            Err(SynthError::NoValidInsertion | SynthError::UnboundPostVar(_)) => continue,
            Err(e) => panic!("{e}"),
        };
        let v = verify_insertion(&sp, &n).unwrap();
        assert!(v.reached);
        assert!(v.events.get(EventClass::FpOp) > 0);
        checked += 1;
    }
    assert!(checked > 0);
}

#[test]
fn runaway_insertions_time_out() {
    // the guard never changes inside the body, so a fresh `k` below 5 spins forever
    let donor = parse(
        "int main() {\n  int k = 9;\n  int s = 0;\n  do {\n    s = s + 1 & 255;\n  } while (k < 5);\n  return s;\n}\n",
    )
    .unwrap();
    let ops = extract_operators(&donor, "spin", 0, &ExtractOptions::default());
    let op = ops.iter().find(|o| o.source.starts_with("do")).unwrap();
    let mut n = native();
    n.timeout = Duration::from_millis(300);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let seed = generate_seed(&mut rng, "s", &SeedGenOptions::default()).unwrap();
    let (profile, _) = profile_seed(&seed, &n).unwrap();
    let (mut timeouts, mut reached) = (0, 0);
    for i in 0..20 {
        let Ok(sp) = synthesize(op, &profile, &ValuePool::default(), i, &mut rng) else { continue };
        match verify_insertion(&sp, &n) {
            Ok(v) => {
                assert!(v.reached);
                reached += 1;
            }
            Err(NativeError::Timeout) => timeouts += 1,
            Err(e) => panic!("{e}"),
        }
    }
    assert!(timeouts > 0, "no runaway binding in 20 draws ({} reached)", reached);
}
