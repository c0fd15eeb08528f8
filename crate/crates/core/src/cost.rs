//! Dynamic event classes and the cost model behind simulated runtimes.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// What an instrumented run counts. The discriminant is the counter index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventClass {
    /// Integer arithmetic, bitwise and comparison operations, `++`/`--` on integers.
    IntOp = 0,
    /// The same on `float`/`double` operands.
    FpOp = 1,
    /// Evaluated `a[i]` and `*p`.
    MemAccess = 2,
    /// Calls to user functions and non-output library functions.
    Call = 3,
    /// Condition evaluations of `if`/loops, and each `&&`/`||`.
    Branch = 4,
    /// Calls to `printf`, `fprintf`, `putchar`, `puts`.
    Output = 5,
}

impl EventClass {
    pub const ALL: [EventClass; 6] = [
        EventClass::IntOp,
        EventClass::FpOp,
        EventClass::MemAccess,
        EventClass::Call,
        EventClass::Branch,
        EventClass::Output,
    ];
}

/// Per-class event totals of one run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventCounts(pub [u64; 6]);

impl EventCounts {
    pub fn get(&self, class: EventClass) -> u64 {
        self.0[class as usize]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }
}

fn one() -> f64 {
    1.0
}

/// Cost per event, in seconds, for each class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventWeights {
    #[serde(default = "one")]
    pub int_op: f64,
    #[serde(default = "one")]
    pub fp_op: f64,
    #[serde(default = "one")]
    pub mem_access: f64,
    #[serde(default = "one")]
    pub call: f64,
    #[serde(default = "one")]
    pub branch: f64,
    #[serde(default = "one")]
    pub output: f64,
}

impl Default for EventWeights {
    fn default() -> Self {
        EventWeights::uniform(1.0)
    }
}

impl EventWeights {
    pub fn uniform(w: f64) -> Self {
        EventWeights { int_op: w, fp_op: w, mem_access: w, call: w, branch: w, output: w }
    }

    pub fn get(&self, class: EventClass) -> f64 {
        match class {
            EventClass::IntOp => self.int_op,
            EventClass::FpOp => self.fp_op,
            EventClass::MemAccess => self.mem_access,
            EventClass::Call => self.call,
            EventClass::Branch => self.branch,
            EventClass::Output => self.output,
        }
    }

    /// Σ counts × weights.
    pub fn time(&self, counts: &EventCounts) -> f64 {
        EventClass::ALL.iter().map(|c| counts.get(*c) as f64 * self.get(*c)).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulatedRuntime {
    pub name: String,
    #[serde(default)]
    pub weights: EventWeights,
}

/// A set of simulated runtimes; the file format behind `--simulate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub runtimes: Vec<SimulatedRuntime>,
}

impl CostModel {
    /// Simulated execution time on every runtime, in model order.
    pub fn times(&self, counts: &EventCounts) -> Vec<f64> {
        self.runtimes.iter().map(|r| r.weights.time(counts)).collect()
    }
}
