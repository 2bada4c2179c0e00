//! Command execution, independent of argument parsing so it can be tested
//! in-process.

use std::fmt::Write;

use serde_json::json;
use wco_core::analysis::{
    analyze_with, apply, fredholm, kernel_basis, kernel_codim, kernel_dim, range_codim, range_dim_is_infinite,
    range_membership,
};
use wco_core::oracle::{stabilized_check, Check, WindowReport};
use wco_core::rational::{self, Rational};
use wco_core::{Error, Exec, Nat, Tolerance};

use crate::report::ReportDocument;
use crate::spec_file::{format_vector, parse_spec, parse_vector, print_spec, SpecFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_HYPOTHESIS: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_ORACLE: i32 = 3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Clone, Debug)]
pub struct Options {
    pub format: Format,
    pub tolerance: Tolerance,
}

impl Default for Options {
    fn default() -> Self {
        Options { format: Format::Text, tolerance: Tolerance::default() }
    }
}

impl Options {
    pub fn with_width(mut self, width: Rational) -> Self {
        self.tolerance.width = width;
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.tolerance.exec = exec;
        self
    }
}

pub const DEFAULT_WINDOWS: [Nat; 3] = [16, 32, 64];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    Analyze { oracle: Option<Vec<Nat>> },
    Kernel { power: u32, basis: Option<usize> },
    Range { member: Option<String> },
    Fredholm,
    Apply { vector: String },
    Oracle { windows: Vec<Nat>, check: Check },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Analyze { .. } => "analyze",
            Command::Kernel { .. } => "kernel",
            Command::Range { .. } => "range",
            Command::Fredholm => "fredholm",
            Command::Apply { .. } => "apply",
            Command::Oracle { .. } => "oracle",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Exit code for a core error: failed hypotheses and analyses that cannot
/// be carried out on the given symbols both exit 1; malformed symbols are
/// input errors.
fn error_code(e: &Error) -> i32 {
    match e {
        Error::InvalidSymbol(_) => EXIT_PARSE,
        _ => EXIT_HYPOTHESIS,
    }
}

pub fn parse_windows(s: &str) -> Result<Vec<Nat>, String> {
    s.split(',')
        .map(|w| w.trim().parse::<Nat>().map_err(|_| format!("bad window '{}'", w.trim())))
        .collect()
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn render_text(doc: &ReportDocument) -> String {
    let mut s = String::new();
    if let Some(l) = &doc.label {
        writeln!(s, "label: {l}").unwrap();
    }
    writeln!(s, "operator:").unwrap();
    for line in doc.operator.lines() {
        writeln!(s, "  {line}").unwrap();
    }
    writeln!(s, "bounded: {}", doc.bounded).unwrap();
    writeln!(s, "fiber sum sup: {}", doc.fiber_sum_sup).unwrap();
    match &doc.norm {
        Some(n) => writeln!(s, "norm: {n}").unwrap(),
        None => writeln!(s, "norm: none (unbounded)").unwrap(),
    }
    writeln!(s, "kernel dim: {}", doc.kernel_dim).unwrap();
    writeln!(s, "kernel codim: {}", doc.kernel_codim).unwrap();
    writeln!(s, "multi-fiber set: {}", doc.multi_fiber_set).unwrap();
    writeln!(s, "range codim: {}", doc.range_codim).unwrap();
    writeln!(s, "closed range: {}", doc.closed_range).unwrap();
    match doc.fredholm_index {
        Some(i) => writeln!(s, "fredholm index: {i}").unwrap(),
        None => writeln!(s, "fredholm index: none (not Fredholm)").unwrap(),
    }
    let flags: Vec<String> = doc.hypothesis_flags.iter().map(|f| format!("{}={}", f.name, yes(f.holds))).collect();
    writeln!(s, "hypotheses: {}", flags.join(" ")).unwrap();
    if let Some(o) = &doc.oracle {
        s.push_str(&render_oracle(o));
    }
    s
}

pub fn render_oracle(r: &WindowReport) -> String {
    let mut s = String::new();
    writeln!(s, "oracle ({}):", serde_json::to_value(r.check).unwrap().as_str().unwrap_or("all")).unwrap();
    writeln!(s, "  {:>6} {:>6} {:>12} {:>12} {:>6} {:>10} {:>10}", "W", "R", "zero cols", "deficiency", "rank", "pred ker", "pred def")
        .unwrap();
    for c in &r.windows {
        writeln!(
            s,
            "  {:>6} {:>6} {:>12} {:>12} {:>6} {:>10} {:>10}",
            c.w, c.r, c.zero_column_count, c.column_rank_deficiency, c.rank, c.predicted_kernel, c.predicted_deficiency
        )
        .unwrap();
    }
    writeln!(s, "  closed form: kernel dim {}, range codim {}", r.kernel_dim, r.range_codim).unwrap();
    writeln!(s, "  stabilized: {}", r.stabilized).unwrap();
    if r.agrees() {
        writeln!(s, "  agreement: ok").unwrap();
    } else {
        writeln!(s, "  agreement: MISMATCH").unwrap();
        for m in &r.mismatches {
            writeln!(s, "    {m}").unwrap();
        }
    }
    s
}

fn document(cmd: &Command, input: &str, spec: &SpecFile, tol: &Tolerance) -> Result<ReportDocument, Error> {
    let report = analyze_with(&spec.op, tol)?;
    Ok(ReportDocument::new(cmd.name(), input, spec.label.clone(), print_spec(&SpecFile { label: None, ..spec.clone() }), rational::format(&spec.op.p), report))
}

/// Parses `input` and runs `cmd` on it.
pub fn run(cmd: &Command, input: &str, opts: &Options) -> Outcome {
    let spec = match parse_spec(input) {
        Ok(s) => s,
        Err(e) => return Outcome { code: EXIT_PARSE, stdout: String::new(), stderr: format!("parse error at {e}\n") },
    };
    let mut doc = match document(cmd, input, &spec, &opts.tolerance) {
        Ok(d) => d,
        Err(e) => return Outcome { code: error_code(&e), stdout: String::new(), stderr: format!("error: {e}\n") },
    };
    let result = execute(cmd, &spec, &mut doc, opts);
    let (code, text, err) = match result {
        Ok((code, text)) => (code, text, String::new()),
        Err(e) => {
            doc.details = Some(json!({ "error": e.to_string() }));
            let flags: Vec<String> =
                doc.hypothesis_flags.iter().map(|f| format!("{}={}", f.name, yes(f.holds))).collect();
            (error_code(&e), format!("error: {e}\nhypotheses: {}\n", flags.join(" ")), format!("error: {e}\n"))
        }
    };
    let stdout = match opts.format {
        Format::Json => doc.to_json() + "\n",
        Format::Text => text,
    };
    Outcome { code, stdout, stderr: err }
}

fn execute(cmd: &Command, spec: &SpecFile, doc: &mut ReportDocument, opts: &Options) -> Result<(i32, String), Error> {
    let op = &spec.op;
    let exec = opts.tolerance.exec;
    match cmd {
        Command::Analyze { oracle } => {
            let mut code = EXIT_OK;
            if let Some(windows) = oracle {
                let r = stabilized_check(op, Check::All, windows, exec)?;
                if !r.agrees() {
                    code = EXIT_ORACLE;
                }
                doc.oracle = Some(r);
            }
            Ok((code, render_text(doc)))
        }
        Command::Kernel { power, basis } => {
            let dim = kernel_dim(op, *power)?;
            let codim = kernel_codim(op)?;
            let mut s = format!("kernel dim (power {power}): {dim}\nkernel codim: {codim}\n");
            let mut details = json!({ "power": power, "kernel_dim_power": dim });
            if let Some(limit) = basis {
                let b = kernel_basis(op, *power, *limit)?;
                let names: Vec<String> = b.iter().map(|n| format!("χ{n}")).collect();
                writeln!(s, "kernel basis: {}", if names.is_empty() { "(empty)".into() } else { names.join(", ") }).unwrap();
                details["basis"] = json!(b);
            }
            doc.details = Some(details);
            Ok((EXIT_OK, s))
        }
        Command::Range { member } => {
            let codim = range_codim(op)?;
            let infinite = range_dim_is_infinite(op)?;
            let mut s = format!(
                "range codim: {codim}\nmulti-fiber set: {}\nrange infinite-dimensional: {infinite}\n",
                doc.multi_fiber_set
            );
            let mut details = json!({ "range_dim_infinite": infinite });
            if let Some(coords) = member {
                let f = parse_vector(coords).map_err(Error::InvalidSymbol)?;
                let m = range_membership(op, &f)?;
                writeln!(s, "member: {m}").unwrap();
                details["member"] = json!(m);
            }
            doc.details = Some(details);
            Ok((EXIT_OK, s))
        }
        Command::Fredholm => {
            let s = match fredholm(op)? {
                Some(i) => format!("fredholm index: {i}\n"),
                None => format!(
                    "not Fredholm: kernel dim {}, range codim {}\n",
                    doc.kernel_dim, doc.range_codim
                ),
            };
            Ok((EXIT_OK, s))
        }
        Command::Apply { vector } => {
            let f = parse_vector(vector).map_err(Error::InvalidSymbol)?;
            let g = apply(op, &f)?;
            let text = format_vector(&g);
            doc.details = Some(json!({ "input": format_vector(&f), "image": text }));
            Ok((EXIT_OK, text + "\n"))
        }
        Command::Oracle { windows, check } => {
            let r = stabilized_check(op, *check, windows, exec)?;
            let code = if r.agrees() { EXIT_OK } else { EXIT_ORACLE };
            let s = render_oracle(&r);
            doc.oracle = Some(r);
            Ok((code, s))
        }
    }
}
