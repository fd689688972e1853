use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use dissoc::bounds::{compute_bound, dissociate_bound_multi, BoundReport, Direction, PlanChoice};
use dissoc::dissociation::{dissociate, Grouping};
use dissoc::eval::{eval_enumerate, eval_shannon, ENUMERATION_CAP};
use dissoc::events::{correlated_pair, encode_disjoint, DisjointDeclaration};
use dissoc::figures::{sweep_correlation, write_csv};
use dissoc::parser::{format_expr, parse_expr, parse_probs};
use dissoc::prob::{Prob, ProbAssignment};
use dissoc::verify::run_all;
use dissoc::{Error, Expr};

#[derive(Parser)]
#[command(name = "dissoc", version, about = "Exact probabilities and dissociation bounds for Boolean expressions")]
struct Cli {
    /// Treat a variable missing from the probability file as an error.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact probability of an expression.
    Eval(ExprArgs),
    /// Replace occurrences of a variable by fresh copies.
    Dissociate {
        #[command(flatten)]
        input: ExprArgs,
        #[arg(short = 'x', long = "var")]
        var: String,
        /// Occurrence groups, e.g. "0,1;2". Default: one group per occurrence.
        #[arg(long)]
        groups: Option<String>,
    },
    /// Optimal upper or lower bound by dissociating one variable.
    Bound {
        #[command(flatten)]
        input: ExprArgs,
        #[arg(short = 'x', long = "var")]
        var: String,
        #[arg(long)]
        direction: Direction,
        /// Probabilities for the copies, comma separated. Default: symmetric.
        #[arg(long, allow_hyphen_values = true)]
        plan: Option<String>,
    },
    /// Dissociate several variables in turn.
    BoundMulti {
        #[command(flatten)]
        input: ExprArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        vars: Vec<String>,
        #[arg(long)]
        direction: Direction,
    },
    /// Randomized property suites.
    Verify {
        #[arg(long, env = "DISSOC_SEED", default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        cases: usize,
    },
    /// Encode a disjoint distribution with independent variables.
    EncodeDisjoint {
        #[arg(short = 'p', long = "probs", required = true)]
        probs: String,
        /// Optional labels for the values, comma separated.
        #[arg(long)]
        labels: Option<String>,
    },
    /// Two events with marginal q and correlation rho.
    CorrelatedPair {
        #[arg(short = 'q', allow_hyphen_values = true)]
        q: String,
        #[arg(long, allow_hyphen_values = true)]
        rho: String,
    },
    /// Bounds across the correlation range, as CSV.
    Sweep {
        #[arg(long = "p", required = true)]
        p: String,
        #[arg(long = "q", required = true)]
        q: String,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ExprArgs {
    /// Expression text, e.g. "x1&x3 | x2".
    #[arg(short = 'e', long = "expr", allow_hyphen_values = true)]
    expr: String,
    /// Probability file with `name = value` lines.
    #[arg(short = 'p', long = "probs")]
    probs: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Lib(Error),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Lib(e) if e.root().is_internal() => 3,
            Failure::Lib(e) if e.root().is_parse() => 1,
            Failure::Lib(_) | Failure::Io(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => f.write_str(m),
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let mut out = String::new();
    match run(&cli, &mut out) {
        Ok(()) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            print!("{out}");
            let _ = io::stdout().flush();
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli, out: &mut String) -> CliResult<()> {
    match &cli.command {
        Command::Eval(input) => {
            let (expr, probs) = load(input, cli.strict)?;
            let value = eval_shannon(&expr, &probs)?;
            out.push_str(&format!("{value}\n"));
        }
        Command::Dissociate { input, var, groups } => {
            let expr = parse_expr(&input.expr)?;
            let grouping = match groups {
                Some(spec) => Grouping::Groups(parse_groups(spec)?),
                None => Grouping::Finest,
            };
            let r = dissociate(&expr, var, &grouping)?;
            out.push_str(&format!("dissociated: {}\n", format_expr(&r.dissociated)));
            out.push_str("theta:");
            for (fresh, orig) in &r.theta {
                out.push_str(&format!(" {}->{}", escape(fresh), orig));
            }
            out.push('\n');
        }
        Command::Bound {
            input,
            var,
            direction,
            plan,
        } => {
            let (expr, probs) = load(input, cli.strict)?;
            let choice = match plan {
                Some(list) => PlanChoice::Explicit(parse_list(list)?),
                None => PlanChoice::Symmetric,
            };
            let o = compute_bound(&expr, var, *direction, &probs, &choice)?;
            cross_check(&expr, &probs, &o.dissociation.dissociated, &o.dissociated_probs, &o.report)?;
            out.push_str(&format!("template: {} n={}\n", o.template.kind, o.template.n()));
            out.push_str("plan:");
            for (name, p) in o.dissociation.fresh_names.iter().zip(&o.plan.assignments) {
                out.push_str(&format!(" {}={p}", escape(name)));
            }
            out.push('\n');
            out.push_str(&format!("validation: {:?} ({})\n", o.validation.verdict, o.validation.reason));
            out.push_str(&format!("dissociated: {}\n", format_expr(&o.dissociation.dissociated)));
            write_report(out, &o.report);
        }
        Command::BoundMulti {
            input,
            vars,
            direction,
        } => {
            let (expr, probs) = load(input, cli.strict)?;
            let r = dissociate_bound_multi(&expr, vars, *direction, &probs)?;
            cross_check(&expr, &probs, &r.final_expr, &r.final_probs, &r.overall)?;
            for (i, step) in r.steps.iter().enumerate() {
                out.push_str(&format!(
                    "step {}: {} bound={} expr={}\n",
                    i + 1,
                    step.var,
                    step.report.bound,
                    format_expr(&step.expr)
                ));
            }
            write_report(out, &r.overall);
        }
        Command::Verify { seed, cases } => {
            let report = run_all(*seed, *cases);
            for s in &report.suites {
                out.push_str(&format!("{}: {} passed, {} failed\n", s.name, s.passed, s.failed));
                for f in &s.failures {
                    out.push_str(&format!("  {f}\n"));
                }
            }
            if !report.all_passed() {
                return Err(Error::InvariantBreach("property suite failures".into()).into());
            }
        }
        Command::EncodeDisjoint { probs, labels } => {
            let values: Vec<BigRational> = split(probs)
                .map(parse_rational)
                .collect::<CliResult<_>>()?;
            let decl = match labels {
                Some(l) => {
                    let names: Vec<String> = split(l).map(str::to_string).collect();
                    if names.len() != values.len() {
                        return Err(Failure::Usage(format!(
                            "{} labels for {} probabilities",
                            names.len(),
                            values.len()
                        )));
                    }
                    DisjointDeclaration::new(names, values)
                }
                None => DisjointDeclaration::unlabeled(values),
            };
            let enc = encode_disjoint(&decl)?;
            let ys: Vec<String> = enc.y_probs.iter().map(Prob::to_string).collect();
            out.push_str(&format!("{}\n", ys.join(" ")));
            for (label, event) in decl.values.iter().zip(&enc.events) {
                out.push_str(&format!("{label}: {}\n", format_expr(event)));
            }
        }
        Command::CorrelatedPair { q, rho } => {
            let pair = correlated_pair(&parse_value(q)?, &parse_value(rho)?)?;
            let ys: Vec<String> = pair.y_probs.iter().map(Prob::to_string).collect();
            out.push_str(&format!("y_probs: {}\n", ys.join(" ")));
            out.push_str(&format!("A: {}\n", format_expr(&pair.a)));
            out.push_str(&format!("B: {}\n", format_expr(&pair.b)));
            out.push_str(&format!("P[A]: {}\n", pair.achieved_a));
            out.push_str(&format!("P[B]: {}\n", pair.achieved_b));
            out.push_str(&format!("P[AB]: {}\n", pair.achieved_ab));
            out.push_str(&format!("rho: {}\n", pair.achieved_rho));
        }
        Command::Sweep {
            p,
            q,
            steps,
            output,
        } => {
            let sweep = sweep_correlation(&parse_list(p)?, &parse_list(q)?, *steps)?;
            match output {
                Some(path) => {
                    let file = io::BufWriter::new(fs::File::create(path)?);
                    write_csv(&sweep.rows, file)?;
                    eprintln!(
                        "wrote {} rows to {} (max closed-form discrepancy {:e})",
                        sweep.rows.len(),
                        path.display(),
                        sweep.max_discrepancy
                    );
                }
                None => {
                    let mut buf = Vec::new();
                    write_csv(&sweep.rows, &mut buf)?;
                    out.push_str(&String::from_utf8_lossy(&buf));
                }
            }
        }
    }
    Ok(())
}

fn write_report(out: &mut String, r: &BoundReport) {
    out.push_str(&format!("exact: {}\n", r.exact));
    out.push_str(&format!("bound: {}\n", r.bound));
    out.push_str(&format!("direction: {}\n", r.direction));
    out.push_str(&format!("gap: {}\n", r.gap));
    out.push_str(&format!("tight: {}\n", r.tight));
}

/// Re-checks a bound against the enumeration oracle when it is small enough.
fn cross_check(
    expr: &Expr,
    probs: &ProbAssignment,
    dissociated: &Expr,
    dissociated_probs: &ProbAssignment,
    report: &BoundReport,
) -> CliResult<()> {
    if dissociated.free_vars().len() > ENUMERATION_CAP {
        return Ok(());
    }
    let exact = eval_enumerate(expr, probs)?;
    let bound = eval_enumerate(dissociated, dissociated_probs)?;
    let tol = if exact.is_exact() && bound.is_exact() { 0.0 } else { 1e-9 };
    let ok = match report.direction {
        Direction::Upper => bound.ge_tol(&exact, tol),
        Direction::Lower => bound.le_tol(&exact, tol),
    };
    if !ok || !exact.eq_tol(&report.exact, 1e-9) || !bound.eq_tol(&report.bound, 1e-9) {
        return Err(Error::InvariantBreach(format!(
            "enumeration gives exact {exact}, bound {bound}; reported {} and {}",
            report.exact, report.bound
        ))
        .into());
    }
    Ok(())
}

fn load(input: &ExprArgs, strict: bool) -> CliResult<(Expr, ProbAssignment)> {
    let expr = parse_expr(&input.expr)?;
    let mut probs = match &input.probs {
        Some(path) => parse_probs(&fs::read_to_string(path)?)?,
        None => ProbAssignment::new(),
    };
    for name in expr.free_vars() {
        if probs.contains(&name) {
            continue;
        }
        if strict {
            return Err(Error::MissingProbability(name).into());
        }
        eprintln!("warning: no probability for {name}, using 1/2");
        probs.set(name, Prob::half())?;
    }
    Ok((expr, probs))
}

fn escape(name: &str) -> String {
    name.replace('#', "'")
}

fn split(list: &str) -> impl Iterator<Item = &str> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_list(list: &str) -> CliResult<Vec<Prob>> {
    split(list).map(parse_value).collect()
}

/// Parses `a/b`, an integer or a decimal. Decimals are read exactly.
fn parse_value(text: &str) -> CliResult<Prob> {
    parse_rational(text).map(Prob::from)
}

fn parse_rational(text: &str) -> CliResult<BigRational> {
    let bad = || Failure::Usage(format!("invalid number `{text}`"));
    let text = text.trim();
    if text.contains('/') {
        let r = BigRational::from_str(text).map_err(|_| bad())?;
        return Ok(r);
    }
    let (neg, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty()
        || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let numer = BigInt::from_str(&format!("{int}{frac}0")).map_err(|_| bad())? / BigInt::from(10);
    let denom = (0..frac.len()).fold(BigInt::one(), |d, _| d * 10);
    let r = BigRational::new(numer, denom);
    Ok(if neg && !r.is_zero() { -r } else { r })
}

/// Parses `0,1;2` into occurrence groups.
fn parse_groups(spec: &str) -> CliResult<Vec<Vec<usize>>> {
    spec.split(';')
        .map(|g| {
            split(g)
                .map(|i| {
                    i.parse::<usize>()
                        .map_err(|_| Failure::Usage(format!("invalid occurrence index `{i}`")))
                })
                .collect()
        })
        .collect()
}
