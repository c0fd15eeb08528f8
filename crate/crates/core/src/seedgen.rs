//! Random MiniC seed programs.
//!
//! Every generated program is input-free, terminates (all loops have constant
//! trip counts and untouched counters) and avoids undefined behavior in its
//! own code: integer values are masked after each update, divisors are
//! nonzero constants, array indices are masked to the array length, and
//! floating-point recurrences are damped. Long-lived variables of each scalar
//! type are declared at the top of `main` and printed at the end, so they stay
//! live across the whole body and serve as binding targets.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::minic::{parse, render, FrontendError, SourceProgram};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedGenOptions {
    /// Statements in the body of `main`, inclusive bounds.
    pub statements: (usize, usize),
    /// Deepest nesting of loops and conditionals.
    pub max_depth: usize,
    /// Trip count bound for top-level loops; nested loops use a quarter of it.
    pub max_trip: u32,
}

impl Default for SeedGenOptions {
    fn default() -> Self {
        SeedGenOptions { statements: (10, 18), max_depth: 3, max_trip: 40 }
    }
}

const INTS: [&str; 3] = ["a0", "a1", "a2"];
const DOUBLES: [&str; 4] = ["d0", "d1", "d2", "d3"];
const FLOATS: [&str; 2] = ["f0", "f1"];
const UNSIGNEDS: [&str; 2] = ["u0", "u1"];
const ARR_LEN: usize = 8;

struct Gen<'r, R: Rng> {
    rng: &'r mut R,
    out: String,
    indent: usize,
    /// Loop counters already in use by enclosing loops.
    active: Vec<&'static str>,
    /// Loops emitted at the top level of `main`.
    loops: usize,
    opts: &'r SeedGenOptions,
}

const COUNTERS: [&str; 4] = ["i0", "i1", "i2", "i3"];

impl<'r, R: Rng> Gen<'r, R> {
    fn line(&mut self, text: &str) {
        for _ in 0..self.indent {
            self.out.push_str("  ");
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn pick<T: Copy>(&mut self, items: &[T]) -> T {
        *items.choose(self.rng).unwrap()
    }

    fn small(&mut self, lo: i64, hi: i64) -> i64 {
        self.rng.gen_range(lo..=hi)
    }

    fn fconst(&mut self, lo: f64, hi: f64) -> String {
        let v: f64 = self.rng.gen_range(lo..hi);
        format!("{:.3}", v)
    }

    fn int_atom(&mut self) -> String {
        match self.rng.gen_range(0..10) {
            0..=4 => String::from(self.pick(&INTS)),
            5 => String::from("g0"),
            6 => {
                let idx = self.int_var_or_counter();
                format!("arr[{} & 7]", idx)
            }
            7 => {
                let (x, y) = (self.pick(&INTS), self.pick(&INTS));
                format!("mix({}, {})", x, y)
            }
            8 => String::from(self.int_var_or_counter()),
            _ => format!("{}", self.small(1, 97)),
        }
    }

    fn int_var_or_counter(&mut self) -> &'static str {
        if !self.active.is_empty() && self.rng.gen_bool(0.6) {
            let a = self.active.clone();
            self.pick(&a)
        } else {
            self.pick(&INTS)
        }
    }

    fn int_term(&mut self) -> String {
        let a = self.int_atom();
        match self.rng.gen_range(0..7) {
            0 => a,
            1 => format!("{} * {}", a, self.small(2, 9)),
            2 => {
                let b = self.int_atom();
                format!("({} & 255) * ({} & 63)", a, b)
            }
            3 => format!("{} / {}", a, self.small(2, 7)),
            4 => format!("{} % {}", a, self.small(3, 11)),
            5 => {
                let b = self.int_atom();
                format!("({} ^ {})", a, b)
            }
            _ => format!("({} >> {})", a, self.small(1, 4)),
        }
    }

    fn int_expr(&mut self) -> String {
        let mut e = self.int_term();
        for _ in 0..self.rng.gen_range(0..3) {
            let op = self.pick(&["+", "-", "+"]);
            let t = self.int_term();
            e = format!("{} {} {}", e, op, t);
        }
        e
    }

    fn fp_atom(&mut self) -> String {
        match self.rng.gen_range(0..8) {
            0..=3 => String::from(self.pick(&DOUBLES)),
            4 => String::from("gd0"),
            5 => {
                let idx = self.int_var_or_counter();
                format!("darr[{} & 7]", idx)
            }
            6 => String::from(self.pick(&FLOATS)),
            _ => {
                let i = self.int_var_or_counter();
                format!("(double){} * 0.001", i)
            }
        }
    }

    /// A bounded function of some floating-point value.
    fn fp_bounded(&mut self) -> String {
        let x = self.fp_atom();
        match self.rng.gen_range(0..7) {
            0 => format!("sin({})", x),
            1 => format!("cos({})", x),
            2 => format!("atan({})", x),
            3 => format!("exp(sin({}))", x),
            4 => format!("sqrt(fabs(sin({})) + 1.0)", x),
            5 => format!("log(fabs(cos({})) + 1.0)", x),
            _ => {
                let y = self.fp_atom();
                format!("blend({}, {})", x, y)
            }
        }
    }

    /// `dst * a + src * b + Σ bounded terms`, with a + b < 1.
    fn fp_update(&mut self, dst: &str, float: bool) -> String {
        let a = self.pick(&[0.5, 0.625, 0.75]);
        let b = self.pick(&[0.0625, 0.125, 0.1875]);
        let src = self.fp_atom();
        let mut e = format!("{} * {} + {} * {}", dst, a, src, b);
        for _ in 0..self.rng.gen_range(1..3) {
            let t = self.fp_bounded();
            let c = self.fconst(0.1, 1.5);
            e = format!("{} + {} * {}", e, t, c);
        }
        if float {
            format!("{} = (float)({});", dst, e)
        } else {
            format!("{} = {};", dst, e)
        }
    }

    fn int_cond(&mut self) -> String {
        match self.rng.gen_range(0..5) {
            0 => {
                let a = self.int_atom();
                format!("({} & 3) == {}", a, self.small(0, 3))
            }
            1 => {
                let (a, b) = (self.int_atom(), self.int_atom());
                format!("{} > {}", a, b)
            }
            2 => {
                let (x, y) = (self.fp_atom(), self.fp_atom());
                format!("{} < {}", x, y)
            }
            3 => {
                let x = self.fp_atom();
                format!("sin({}) > {}", x, self.fconst(-0.5, 0.5))
            }
            _ => {
                let a = self.int_atom();
                format!("{} % {} != 0", a, self.small(2, 5))
            }
        }
    }

    fn simple(&mut self) {
        let line = match self.rng.gen_range(0..20) {
            0..=8 => {
                let dst = self.pick(&INTS);
                if self.rng.gen_bool(0.5) {
                    let e = self.int_expr();
                    format!("{} = ({}) & 65535;", dst, e)
                } else {
                    let t = self.int_term();
                    format!("{} = ({} + {}) & 65535;", dst, dst, t)
                }
            }
            9 | 10 => {
                let dst = self.pick(&DOUBLES);
                self.fp_update(dst, false)
            }
            11 => {
                let dst = self.pick(&FLOATS);
                self.fp_update(dst, true)
            }
            12 | 13 => {
                let (dst, other) = (self.pick(&UNSIGNEDS), self.pick(&UNSIGNEDS));
                if self.rng.gen_bool(0.5) {
                    format!("{} = {} * 1103515245u + 12345u;", dst, dst)
                } else {
                    format!("{} = {} ^ ({} >> {});", dst, dst, other, self.small(3, 13))
                }
            }
            14 => {
                let a = self.int_atom();
                format!("l0 = (l0 * {} + {}) % 1000003;", self.small(3, 37), a)
            }
            15 | 16 => {
                let idx = self.int_var_or_counter();
                let e = self.int_term();
                format!("arr[{} & 7] = (arr[{} & 7] + {}) & 4095;", idx, idx, e)
            }
            17 => {
                let idx = self.int_var_or_counter();
                let t = self.fp_bounded();
                format!("darr[{} & 7] = darr[{} & 7] * 0.5 + {};", idx, idx, t)
            }
            18 => {
                let dst = self.pick(&INTS);
                let x = self.fp_atom();
                format!("{} = ({} + (int)(atan({}) * 100.0)) & 65535;", dst, dst, x)
            }
            _ => {
                let x = self.fp_atom();
                let a = self.int_atom();
                format!("gd0 = gd0 * 0.5 + cos({}) + (double)({} & 15);", x, a)
            }
        };
        self.line(&line);
    }

    fn stmt(&mut self, depth: usize) {
        let nest = depth < self.opts.max_depth;
        match self.rng.gen_range(0..20) {
            0..=1 if nest => self.if_stmt(depth),
            2..=3 if nest && self.active.len() < COUNTERS.len() => self.loop_stmt(depth),
            4 if nest => self.block(depth),
            _ => self.simple(),
        }
    }

    fn body(&mut self, depth: usize, n: usize) {
        self.indent += 1;
        for _ in 0..n {
            self.stmt(depth + 1);
        }
        self.indent -= 1;
    }

    fn if_stmt(&mut self, depth: usize) {
        let c = self.int_cond();
        self.line(&format!("if ({}) {{", c));
        let n = self.rng.gen_range(1..4);
        self.body(depth, n);
        if self.rng.gen_bool(0.5) {
            self.line("} else {");
            let n = self.rng.gen_range(1..3);
            self.body(depth, n);
        }
        self.line("}");
    }

    fn loop_stmt(&mut self, depth: usize) {
        let counter = COUNTERS[self.active.len()];
        let max = if self.active.is_empty() { self.opts.max_trip } else { (self.opts.max_trip / 4).max(2) };
        let trips = self.rng.gen_range(2..=max);
        let n = self.rng.gen_range(1..5);
        if self.active.is_empty() {
            self.loops += 1;
        }
        match self.rng.gen_range(0..6) {
            0..=3 => {
                self.line(&format!("for ({c} = 0; {c} < {t}; {c}++) {{", c = counter, t = trips));
                self.active.push(counter);
                self.body(depth, n);
            }
            4 => {
                self.line(&format!("{} = 0;", counter));
                self.line(&format!("while ({} < {}) {{", counter, trips));
                self.active.push(counter);
                self.body(depth, n);
                self.line(&format!("  {} = {} + 1;", counter, counter));
            }
            _ => {
                self.line(&format!("{} = 0;", counter));
                self.line("do {");
                self.active.push(counter);
                self.body(depth, n);
                self.line(&format!("  {} = {} + 1;", counter, counter));
                self.line(&format!("}} while ({} < {});", counter, trips));
                self.active.pop();
                return;
            }
        }
        self.active.pop();
        self.line("}");
    }

    fn block(&mut self, depth: usize) {
        self.line("{");
        self.indent += 1;
        let local = format!("t{}", depth);
        if self.rng.gen_bool(0.5) {
            let e = self.int_expr();
            self.line(&format!("int {} = ({}) & 1023;", local, e));
            let dst = self.pick(&INTS);
            self.line(&format!("{} = ({} + {}) & 65535;", dst, dst, local));
        } else {
            let x = self.fp_bounded();
            self.line(&format!("double {} = {};", local, x));
            let dst = self.pick(&DOUBLES);
            self.line(&format!("{} = {} * 0.5 + {};", dst, dst, local));
        }
        self.indent -= 1;
        let n = self.rng.gen_range(0..3);
        self.body(depth, n);
        self.line("}");
    }

    fn list(&mut self, float: bool) -> String {
        let items: Vec<String> = (0..ARR_LEN)
            .map(|_| if float { self.fconst(0.0, 4.0) } else { format!("{}", self.small(0, 200)) })
            .collect();
        items.join(", ")
    }

    fn program(&mut self) {
        let g0 = self.small(1, 500);
        self.line(&format!("int g0 = {};", g0));
        let gd0 = self.fconst(0.1, 2.0);
        self.line(&format!("double gd0 = {};", gd0));
        self.line("");
        let (m1, m2, m3) = (self.small(2, 9), self.small(1, 7), self.small(1, 255));
        self.line("int mix(int p, int q) {");
        self.line(&format!("  int r = (p & 255) * {} + (q & 127) * {};", m1, m2));
        self.line(&format!("  return (r ^ {}) & 4095;", m3));
        self.line("}");
        self.line("");
        let (b1, b2) = (self.fconst(0.1, 0.9), self.fconst(0.1, 0.9));
        self.line("double blend(double x, double y) {");
        self.line(&format!("  return sin(x) * {} + cos(y) * {};", b1, b2));
        self.line("}");
        self.line("");
        self.line("int main(void) {");
        self.indent = 1;
        for v in COUNTERS {
            self.line(&format!("int {} = 0;", v));
        }
        for v in INTS {
            let x = self.small(0, 1000);
            self.line(&format!("int {} = {};", v, x));
        }
        for v in UNSIGNEDS {
            let x = self.small(1, 100000);
            self.line(&format!("unsigned int {} = {}u;", v, x));
        }
        let l = self.small(1, 10000);
        self.line(&format!("long l0 = {};", l));
        for v in DOUBLES {
            let x = self.fconst(0.0, 3.0);
            self.line(&format!("double {} = {};", v, x));
        }
        for v in FLOATS {
            let x = self.fconst(0.0, 2.0);
            self.line(&format!("float {} = {}f;", v, x));
        }
        let ai = self.list(false);
        self.line(&format!("int arr[8] = {{{}}};", ai));
        let ad = self.list(true);
        self.line(&format!("double darr[8] = {{{}}};", ad));
        let (lo, hi) = self.opts.statements;
        let n = self.rng.gen_range(lo..=hi);
        for _ in 0..n {
            self.stmt(0);
        }
        // at least one loop so the seed has repeated work
        if self.loops == 0 {
            self.loop_stmt(0);
        }
        self.line("printf(\"%d %d %d %d\\n\", a0, a1, a2, g0);");
        self.line("printf(\"%u %u %ld\\n\", u0, u1, l0);");
        self.line("printf(\"%.6f %.6f %.6f %.6f %.6f\\n\", d0, d1, d2, d3, gd0);");
        self.line("printf(\"%.4f %.4f\\n\", f0, f1);");
        self.line("for (i0 = 0; i0 < 8; i0++) {");
        self.line("  printf(\"%d %.6f\\n\", arr[i0], darr[i0]);");
        self.line("}");
        self.line("return 0;");
        self.indent = 0;
        self.line("}");
    }
}

/// One random seed program, parsed and rendered in canonical form.
pub fn generate_seed<R: Rng>(rng: &mut R, id: &str, opts: &SeedGenOptions) -> Result<SourceProgram, FrontendError> {
    let mut g = Gen { rng, out: String::new(), indent: 0, active: Vec::new(), loops: 0, opts };
    g.program();
    let unit = parse(&g.out)?;
    Ok(SourceProgram::new(id, render(&unit), "generated"))
}
