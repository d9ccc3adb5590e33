//! Command implementations. Each command writes its human-readable output to
//! `out`, diagnostics to `err`, and returns the process exit code.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use revsym_core::engine::{canon_assoc, reverse_fact, EngineError, ReverseOptions, DEFAULT_FUEL};
use revsym_core::gen::gen_formula;
use revsym_core::oracle::{check_closure, check_transport, Verdict};
use revsym_core::rules::{admit_rule, default_ruleset, Problem, RuleError, RuleSet};
use revsym_core::semantics::DomainParams;
use revsym_core::{schematic_equal, Formula, Signature};

use crate::report::{
    LemmaReport, Options, Position, Report, Status, Verification, VerdictReport, SCHEMA,
};
use crate::theory::{parse_theory, Decl, TheoryFile};

pub const FUEL_ENV: &str = "REVSYM_FUEL";

#[derive(Debug, Parser)]
#[command(name = "revsym", version, about = "Reversal-symmetric counterparts of list lemmas")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reverse the lemmas named by `reversed` declarations in a theory file.
    Reverse(ReverseArgs),
    /// Vet every rule in a rules file against the bounded model.
    CheckRules(CheckArgs),
    /// Emit random lemmas, each followed by a `reversed` declaration.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ReverseArgs {
    pub file: PathBuf,
    /// Extra rules (and symbols) loaded after the builtin rules.
    #[arg(long)]
    pub rules: Option<PathBuf>,
    /// Start from an empty rule set.
    #[arg(long)]
    pub no_defaults: bool,
    /// Drop a rule by name; may be repeated.
    #[arg(long, value_name = "NAME")]
    pub without: Vec<String>,
    /// Right-associate `@` chains in outputs and expectations.
    #[arg(long)]
    pub assoc_canon: bool,
    /// Check every output against its input with the bounded oracle.
    #[arg(long)]
    pub verify: bool,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    pub alphabet: u32,
    #[arg(long, default_value_t = 3)]
    pub maxlen: usize,
    /// Write a JSON report to this path.
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// Rewrite budget per lemma [default: $REVSYM_FUEL or 10000].
    #[arg(long)]
    pub fuel: Option<usize>,
    /// Print every rewrite step.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    pub file: PathBuf,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    pub alphabet: u32,
    #[arg(long, default_value_t = 4)]
    pub maxlen: usize,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    pub depth: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub count: u64,
}

pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match &cli.command {
        Command::Reverse(a) => {
            let env = std::env::var(FUEL_ENV).ok();
            run_reverse(a, env.as_deref(), out, err)
        }
        Command::CheckRules(a) => run_check(a, out, err),
        Command::Gen(a) => run_gen(a, out),
    }
}

/// `--fuel` wins over the environment, which wins over the default.
pub fn resolve_fuel(flag: Option<usize>, env: Option<&str>) -> Result<usize, String> {
    if let Some(f) = flag {
        return Ok(f);
    }
    match env {
        None => Ok(DEFAULT_FUEL),
        Some(s) => s
            .trim()
            .parse()
            .map_err(|_| format!("{FUEL_ENV} must be a non-negative integer, got `{s}`")),
    }
}

struct Fatal {
    code: i32,
    message: String,
}

impl Fatal {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Fatal {
            code,
            message: message.into(),
        }
    }
}

fn read(path: &Path) -> Result<String, Fatal> {
    fs::read_to_string(path).map_err(|e| Fatal::new(2, format!("{}: {e}", path.display())))
}

fn describe_rule_error(path: &Path, e: RuleError) -> Fatal {
    match e {
        RuleError::Rejected(v) => {
            let problems: Vec<String> = v.problems.iter().map(ToString::to_string).collect();
            Fatal::new(
                3,
                format!(
                    "{}: rule `{}` rejected: {}",
                    path.display(),
                    v.rule,
                    problems.join("; ")
                ),
            )
        }
        other => Fatal::new(2, format!("{}: {other}", path.display())),
    }
}

fn load_rules_file(path: &Path) -> Result<TheoryFile, Fatal> {
    let text = read(path)?;
    let file = parse_theory(&text, Signature::builtin())
        .map_err(|e| Fatal::new(2, format!("{}:{e}", path.display())))?;
    for d in &file.decls {
        if matches!(d, Decl::Lemma(_) | Decl::Reversed(_)) {
            return Err(Fatal::new(
                2,
                format!(
                    "{}: a rules file may contain only `symbol` and `rule` declarations",
                    path.display()
                ),
            ));
        }
    }
    Ok(file)
}

fn build_rules(
    args: &ReverseArgs,
    extra: Option<&TheoryFile>,
    theory: &TheoryFile,
) -> Result<RuleSet, Fatal> {
    let mut set = if args.no_defaults {
        RuleSet::empty(DomainParams::vetting())
    } else {
        default_ruleset()
    };
    let sources = extra
        .map(|f| (args.rules.as_deref().unwrap(), f))
        .into_iter()
        .chain([(args.file.as_path(), theory)]);
    for (path, file) in sources {
        for r in file.rules() {
            set.add(r.clone())
                .map_err(|e| describe_rule_error(path, e))?;
        }
    }
    for name in &args.without {
        if set.remove(name).is_none() {
            return Err(Fatal::new(2, format!("--without: no rule named `{name}`")));
        }
    }
    Ok(set)
}

fn options(args: &ReverseArgs, fuel: usize) -> Options {
    Options {
        rules: args.rules.as_ref().map(|p| p.display().to_string()),
        no_defaults: args.no_defaults,
        without: args.without.clone(),
        assoc_canon: args.assoc_canon,
        fuel,
        verify: args
            .verify
            .then(|| DomainParams::new(args.alphabet, args.maxlen).into()),
    }
}

fn verdict_line(label: &str, v: &Verdict) -> String {
    let bounds = format!("k={}, L={}", v.params.alphabet, v.params.max_len);
    match &v.counterexample {
        None => format!("#   {label}: pass ({} valuations, {bounds})", v.checked_count),
        Some(c) => format!("#   {label}: FAIL at {c} ({bounds})"),
    }
}

fn verify(input: &Formula, output: &Formula, p: DomainParams, lines: &mut Vec<String>) -> Verification {
    let mut v = Verification {
        bounds: p.into(),
        transport: None,
        closure: None,
        error: None,
    };
    match check_transport(input, output, p).and_then(|t| Ok((t, check_closure(input, output, p)?))) {
        Ok((t, c)) => {
            lines.push(verdict_line("transport", &t));
            lines.push(verdict_line("closure", &c));
            v.transport = Some(VerdictReport::from(&t));
            v.closure = Some(VerdictReport::from(&c));
        }
        Err(e) => {
            lines.push(format!("#   verification error: {e}"));
            v.error = Some(e.to_string());
        }
    }
    v
}

struct Processed {
    report: LemmaReport,
    output: Option<Formula>,
    lines: Vec<String>,
}

fn process(
    args: &ReverseArgs,
    rules: &RuleSet,
    opts: ReverseOptions,
    name: &str,
    source: &str,
    input: &Formula,
    expected: Option<&Formula>,
) -> Processed {
    let mut report = LemmaReport {
        name: name.to_string(),
        source: source.to_string(),
        input: input.to_string(),
        output: None,
        residual_count: 0,
        residual_positions: Vec::new(),
        fuel_used: 0,
        expected: None,
        matched: None,
        verification: None,
        status: Status::Ok,
        error: None,
    };
    let mut lines = Vec::new();
    let r = match reverse_fact(input, rules, opts) {
        Ok(r) => r,
        Err(e) => {
            report.status = match e {
                EngineError::FuelExhausted { .. } => Status::FuelExhausted,
                EngineError::CycleDetected { .. } => Status::Cycle,
            };
            report.error = Some(e.to_string());
            lines.push(format!("# {name}: error: {e}"));
            return Processed {
                report,
                output: None,
                lines,
            };
        }
    };
    lines.push(format!("lemma {name}: {}", r.output));
    lines.push(format!("#   reversed from {source}"));
    if args.trace {
        lines.extend(r.steps.iter().map(|s| format!("#   step {s}")));
    }
    let mut status = Status::Ok;
    for p in &r.residual_positions {
        lines.push(format!(
            "#   residual rev at {}: {}",
            revsym_core::term::format_path(&p.path),
            p.term
        ));
    }
    if r.residual_rev_count > 0 {
        status = status.max(Status::Residual);
    }
    if let Some(exp) = expected {
        let exp = if args.assoc_canon { canon_assoc(exp) } else { exp.clone() };
        let matched = schematic_equal(&r.output, &exp);
        if matched {
            lines.push("#   expected: match".to_string());
        } else {
            lines.push(format!("#   expected: MISMATCH, wanted {exp}"));
            status = status.max(Status::Mismatch);
        }
        report.expected = Some(exp.to_string());
        report.matched = Some(matched);
    }
    if args.verify {
        let v = verify(
            input,
            &r.output,
            DomainParams::new(args.alphabet, args.maxlen),
            &mut lines,
        );
        let failed = v.error.is_some()
            || v.transport.as_ref().is_some_and(|t| !t.pass)
            || v.closure.as_ref().is_some_and(|c| !c.pass);
        if failed {
            status = status.max(Status::VerificationFailed);
        }
        report.verification = Some(v);
    }
    report.output = Some(r.output.to_string());
    report.residual_count = r.residual_rev_count;
    report.residual_positions = r.residual_positions.iter().map(Position::from).collect();
    report.fuel_used = r.fuel_used;
    report.status = status;
    Processed {
        report,
        output: Some(r.output),
        lines,
    }
}

fn write_json(path: &Path, report: &Report) -> Result<(), Fatal> {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| Fatal::new(2, format!("{}: {e}", path.display())))
}

pub fn run_reverse(
    args: &ReverseArgs,
    fuel_env: Option<&str>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let fuel = resolve_fuel(args.fuel, fuel_env);
    let mut report = Report {
        schema: SCHEMA,
        file: args.file.display().to_string(),
        options: options(args, *fuel.as_ref().unwrap_or(&DEFAULT_FUEL)),
        lemmas: Vec::new(),
        error: None,
        exit_code: 0,
    };
    let result = fuel
        .map_err(|m| Fatal::new(2, m))
        .and_then(|fuel| reverse_all(args, fuel, &mut report, out));
    if let Err(f) = result {
        let _ = writeln!(err, "revsym: {}", f.message);
        report.error = Some(f.message);
        report.exit_code = f.code;
    }
    if let Some(path) = &args.json {
        if let Err(f) = write_json(path, &report) {
            let _ = writeln!(err, "revsym: {}", f.message);
            return f.code.max(report.exit_code);
        }
    }
    report.exit_code
}

fn reverse_all(
    args: &ReverseArgs,
    fuel: usize,
    report: &mut Report,
    out: &mut dyn Write,
) -> Result<(), Fatal> {
    let extra = args.rules.as_deref().map(load_rules_file).transpose()?;
    let sig = extra.as_ref().map(|f| f.sig.clone()).unwrap_or_default();
    let text = read(&args.file)?;
    let theory = parse_theory(&text, sig)
        .map_err(|e| Fatal::new(2, format!("{}:{e}", args.file.display())))?;
    let rules = build_rules(args, extra.as_ref(), &theory)?;
    let opts = ReverseOptions {
        assoc_canon: args.assoc_canon,
        fuel,
    };
    let mut known: BTreeMap<&str, Option<Formula>> = BTreeMap::new();
    for d in &theory.decls {
        match d {
            Decl::Lemma(l) => {
                known.insert(&l.name, Some(l.formula.clone()));
            }
            Decl::Reversed(r) => {
                let Some(input) = known[r.source.as_str()].clone() else {
                    let _ = writeln!(out, "# {}: skipped, source {} failed", r.name, r.source);
                    known.insert(&r.name, None);
                    continue;
                };
                let p = process(args, &rules, opts, &r.name, &r.source, &input, r.expected.as_ref());
                for line in &p.lines {
                    let _ = writeln!(out, "{line}");
                }
                report.exit_code = report.exit_code.max(p.report.status.exit_code());
                report.lemmas.push(p.report);
                known.insert(&r.name, p.output);
            }
            Decl::Symbol(_) | Decl::Rule(_) => {}
        }
    }
    Ok(())
}

pub fn run_check(args: &CheckArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let file = match load_rules_file(&args.file) {
        Ok(f) => f,
        Err(f) => {
            let _ = writeln!(err, "revsym: {}", f.message);
            return f.code;
        }
    };
    let p = DomainParams::new(args.alphabet, args.maxlen);
    let (mut checked, mut rejected) = (0, 0);
    for rule in file.rules() {
        checked += 1;
        let v = admit_rule(rule, p);
        if v.admitted() {
            let n = v.verdict.as_ref().map_or(0, |v| v.checked_count);
            let _ = writeln!(out, "ok       {} ({n} valuations)", rule.name);
        } else {
            rejected += 1;
            let _ = writeln!(out, "rejected {}", rule.name);
            for problem in &v.problems {
                match problem {
                    Problem::Unsound(c) => {
                        let _ = writeln!(out, "  counterexample {c}");
                    }
                    other => {
                        let _ = writeln!(out, "  {other}");
                    }
                }
            }
        }
    }
    let _ = writeln!(
        out,
        "# {checked} rules checked, {rejected} rejected (k={}, L={}, N={})",
        p.alphabet, p.max_len, p.max_nat
    );
    if rejected > 0 {
        3
    } else {
        0
    }
}

pub fn run_gen(args: &GenArgs, out: &mut dyn Write) -> i32 {
    let sig = Signature::builtin();
    for i in 0..args.count {
        let seed = args.seed.wrapping_add(i);
        let f = gen_formula(args.depth as usize, seed, &sig);
        let _ = writeln!(out, "lemma gen_{seed}: {f}");
        let _ = writeln!(out, "reversed gen_{seed}");
    }
    0
}
