//! Command line front end: `verify`, `expand` and `list`.
//!
//! Exit codes: 0 when every comparison is equal, 1 on any mismatch, 2 on
//! usage errors, evaluability errors and excluded steps.

use std::io::Write;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hypergeom::{eval_phi, PhiSpec};
use crate::identities::{
    identity_sides, lhs_series, false_theta, step_sides, steps, IdentityId, StepKind, StepParams,
};
use crate::monomial::Monomial;
use crate::pochhammer::{poch_inf, Param};
use crate::series::{compare_all, QSeries, Report, Scale};
use crate::transforms::{grid, run_grid, Transform, TransformInstance};

pub mod output;

use output::{render_csv, render_json, render_rows_json, OutputRecord};

pub const EXIT_EQUAL: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Order used for the six-parameter expansion grid, whose size (7^6
/// instances) makes the configured order impractical for a sweep.
pub const LIU_GRID_MAX_ORDER: i64 = 60;

#[derive(Debug, Parser)]
#[command(name = "falsetheta", version, about = "Exact q-series checks of the false theta identities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Verify an identity, a transform, a step, or everything ("all").
    Verify(VerifyArgs),
    /// Print the coefficients of a generating series.
    Expand(ExpandArgs),
    /// List every identity, transform and step.
    List,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Comparison order in whole powers of q.
    #[arg(long, env = "FALSETHETA_ORDER", default_value_t = 100)]
    pub order: i64,
    /// Exponent denominator D (all exponents lie in (1/D)Z).
    #[arg(long = "exp-denom", env = "FALSETHETA_EXP_DENOM", default_value_t = 2)]
    pub exp_denom: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// "1.1".."1.5", "2.1".."2.6", "3.1".."3.28" or "all".
    pub subject: String,
    #[command(flatten)]
    pub common: Common,
    /// Largest n for the n-indexed closed forms.
    #[arg(long = "n-max", env = "FALSETHETA_N_MAX", default_value_t = 20)]
    pub n_max: usize,
    #[arg(long, value_enum, default_value_t = VerifyFormat::Text)]
    pub format: VerifyFormat,
    /// Transform parameter, e.g. `--param a=-q^(3/2)`, `--param n=4`,
    /// `--param base=q^2`. Without parameters the transform's grid is run.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
    /// Run sweeps on one thread.
    #[arg(long)]
    pub sequential: bool,
    /// Corrupt one coefficient of the named subject (mutation testing).
    #[arg(long = "inject-fault", hide = true, value_name = "SUBJECT")]
    pub inject_fault: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Generator {
    FalseTheta,
    Lhs,
    PochInf,
    Phi,
}

#[derive(Debug, Clone, Args)]
pub struct ExpandArgs {
    #[arg(value_enum)]
    pub generator: Generator,
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = TableFormat::Text)]
    pub format: TableFormat,
    /// false-theta: multiplier s in q^(s n(n+1)/2).
    #[arg(long, default_value_t = 1)]
    pub s: u32,
    /// lhs: identity label.
    #[arg(long, default_value = "1.1")]
    pub id: String,
    /// poch-inf: the parameter a of (a; base)_inf.
    #[arg(long, default_value = "q", allow_hyphen_values = true)]
    pub a: String,
    /// poch-inf / phi: the base.
    #[arg(long, default_value = "q", allow_hyphen_values = true)]
    pub base: String,
    /// phi: comma-separated upper parameters (`0` allowed).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub upper: Vec<String>,
    /// phi: comma-separated lower parameters.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lower: Vec<String>,
    /// phi: the argument.
    #[arg(long, default_value = "q", allow_hyphen_values = true)]
    pub arg: String,
}

/// Parses and runs the command line, writing to the given streams.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_EQUAL };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Verify(a) => cmd_verify(a, out, err),
        Command::Expand(a) => cmd_expand(a, out),
        Command::List => cmd_list(out),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn scale_of(c: &Common) -> Result<Scale> {
    Scale::new(c.exp_denom)
}

fn parse_param(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::InvalidParam(format!("expected NAME=VALUE, got {s:?}")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// Builds a single transform instance from `--param` assignments.
pub fn transform_instance(t: Transform, params: &[String], order: i64) -> Result<TransformInstance> {
    let mut inst = TransformInstance::new(t, Monomial::q(1), order);
    for raw in params {
        let (k, v) = parse_param(raw)?;
        match k.as_str() {
            "base" => inst.base = v.parse()?,
            "n" => {
                inst.n = v
                    .parse()
                    .map_err(|_| Error::InvalidParam(format!("n must be a nonnegative integer, got {v:?}")))?
            }
            name if t.symbols().contains(&name) => {
                inst.params.insert(k.clone(), v.parse::<Param>()?);
            }
            other => {
                return Err(Error::InvalidParam(format!("{t} has no parameter {other:?}")));
            }
        }
    }
    inst.validate()?;
    Ok(inst)
}

/// What a verify subject resolves to.
#[derive(Debug, Clone)]
enum Subject {
    Identity(IdentityId),
    TransformGrid(Transform),
    TransformOne(TransformInstance),
    Step(&'static str),
}

impl Subject {
    fn label(&self) -> String {
        match self {
            Subject::Identity(id) => id.label().to_string(),
            Subject::TransformGrid(t) => t.label().to_string(),
            Subject::TransformOne(i) => i.transform.label().to_string(),
            Subject::Step(l) => l.to_string(),
        }
    }
}

fn resolve(subject: &str, params: &[String], order: i64) -> Result<Vec<Subject>> {
    if subject == "all" {
        if !params.is_empty() {
            return Err(Error::InvalidParam("`verify all` takes no --param".into()));
        }
        let mut out: Vec<Subject> = IdentityId::ALL.into_iter().map(Subject::Identity).collect();
        out.extend(Transform::ALL.into_iter().map(Subject::TransformGrid));
        out.extend(
            steps()
                .iter()
                .filter(|s| !s.is_excluded())
                .map(|s| Subject::Step(s.label)),
        );
        return Ok(out);
    }
    if let Ok(id) = subject.parse::<IdentityId>() {
        return Ok(vec![Subject::Identity(id)]);
    }
    if let Ok(t) = subject.parse::<Transform>() {
        return Ok(vec![if params.is_empty() {
            Subject::TransformGrid(t)
        } else {
            Subject::TransformOne(transform_instance(t, params, order)?)
        }]);
    }
    if let Some(s) = steps().iter().find(|s| s.label == subject) {
        return Ok(vec![Subject::Step(s.label)]);
    }
    Err(Error::UnknownLabel(subject.to_string()))
}

struct Ctx {
    scale: Scale,
    order: i64,
    n_max: usize,
    exec: Exec,
    fault: Option<String>,
}

fn evaluate(subject: &Subject, ctx: &Ctx) -> Result<(i64, Report)> {
    let label = subject.label();
    let tamper = ctx.fault.as_deref() == Some(label.as_str()) || ctx.fault.as_deref() == Some("any");
    match subject {
        Subject::Identity(id) => {
            let sides = identity_sides(*id, ctx.scale, ctx.order)?;
            Ok((ctx.order, compare_all(vec![sides], tamper)?))
        }
        Subject::TransformGrid(t) => {
            let order = if *t == Transform::Liu {
                ctx.order.min(LIU_GRID_MAX_ORDER)
            } else {
                ctx.order
            };
            let g = run_grid(&grid(*t, order), ctx.scale, ctx.exec, tamper)?;
            Ok((order, g.report))
        }
        Subject::TransformOne(inst) => {
            let mut inst = inst.clone();
            inst.order = ctx.order;
            Ok((ctx.order, compare_all(vec![inst.sides(ctx.scale)?], tamper)?))
        }
        Subject::Step(label) => {
            let p = StepParams {
                scale: ctx.scale,
                order: ctx.order,
                n_max: ctx.n_max,
            };
            Ok((ctx.order, compare_all(step_sides(label, &p)?, tamper)?))
        }
    }
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let ctx = Ctx {
        scale: scale_of(&a.common)?,
        order: a.common.order,
        n_max: a.n_max,
        exec: if a.sequential { Exec::Sequential } else { Exec::default() },
        fault: a.inject_fault.clone(),
    };
    if ctx.order < 0 {
        return Err(Error::InvalidParam("order must be nonnegative".into()));
    }
    let subjects = resolve(&a.subject, &a.params, ctx.order)?;
    // subjects run in parallel; grids inside them already fan out, so run
    // the outer level sequentially when there is just one subject
    let results = ctx.exec.map(&subjects, |s| {
        let start = Instant::now();
        let r = evaluate(s, &ctx);
        (r, start.elapsed().as_millis())
    });
    let mut records = Vec::new();
    let mut failed = false;
    for (s, (r, ms)) in subjects.iter().zip(results) {
        match r {
            Ok((order, report)) => records.push(OutputRecord::new(&s.label(), order, &report, ms)),
            Err(e) => {
                writeln!(err, "{}: {e}", s.label()).ok();
                failed = true;
            }
        }
    }
    match a.format {
        VerifyFormat::Json => writeln!(out, "{}", render_json(&records)).ok(),
        VerifyFormat::Text => {
            for r in &records {
                writeln!(out, "{}", r.render_text()).ok();
            }
            None
        }
    };
    Ok(if failed {
        EXIT_USAGE
    } else if records.iter().all(|r| r.equal) {
        EXIT_EQUAL
    } else {
        EXIT_MISMATCH
    })
}

fn expand_series(a: &ExpandArgs) -> Result<QSeries> {
    let scale = scale_of(&a.common)?;
    let order = a.common.order;
    let t = scale.units(order);
    match a.generator {
        Generator::FalseTheta => {
            if a.s == 0 {
                return Err(Error::InvalidParam("--s must be positive".into()));
            }
            Ok(false_theta(a.s, scale, order))
        }
        Generator::Lhs => lhs_series(a.id.parse()?, scale, order),
        Generator::PochInf => poch_inf(a.a.parse()?, a.base.parse()?, scale, t),
        Generator::Phi => {
            let parse = |v: &[String]| v.iter().map(|s| s.parse::<Param>()).collect::<Result<Vec<_>>>();
            let spec = PhiSpec::new(
                parse(&a.upper)?,
                parse(&a.lower)?,
                a.base.parse()?,
                a.arg.parse()?,
                scale,
                t,
            );
            eval_phi(&spec)
        }
    }
}

fn cmd_expand(a: &ExpandArgs, out: &mut dyn Write) -> Result<i32> {
    let s = expand_series(a)?;
    let text = match a.format {
        TableFormat::Text => format!("{}\n", s.render()),
        TableFormat::Csv => render_csv(&s),
        TableFormat::Json => format!("{}\n", render_rows_json(&s)),
    };
    out.write_all(text.as_bytes()).ok();
    Ok(EXIT_EQUAL)
}

fn cmd_list(out: &mut dyn Write) -> Result<i32> {
    writeln!(out, "identities:").ok();
    for id in IdentityId::ALL {
        writeln!(
            out,
            "{:<5} Eq. ({})  sum {} = false theta, s = {}",
            id.label(),
            id.label(),
            id.summand(),
            id.theta_multiplier()
        )
        .ok();
    }
    writeln!(out, "transforms:").ok();
    for t in Transform::ALL {
        writeln!(
            out,
            "{:<5} Eq. ({})  {}  [{}]",
            t.label(),
            t.label(),
            t.description(),
            t.symbols().join(", ")
        )
        .ok();
    }
    writeln!(out, "steps:").ok();
    for s in steps() {
        let eq = format!("Eq. ({})", s.label);
        match s.kind {
            StepKind::Excluded(_) => {
                writeln!(out, "{:<5} {}  EXCLUDED (formal divergence)  {}", s.label, eq, s.summary).ok()
            }
            _ => writeln!(out, "{:<5} {}  {}", s.label, eq, s.summary).ok(),
        };
    }
    Ok(EXIT_EQUAL)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut argv = vec!["falsetheta"];
        argv.extend_from_slice(args);
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn list_counts() {
        let (code, out, _) = run_str(&["list"]);
        assert_eq!(code, 0);
        assert!(out.contains("3.13  Eq. (3.13)  closed-form 3φ2"));
        assert!(out.contains("3.10  Eq. (3.10)  EXCLUDED (formal divergence)"));
        assert_eq!(out.lines().filter(|l| l.starts_with("1.")).count(), 5);
        assert_eq!(out.lines().filter(|l| l.starts_with("2.")).count(), 6);
        assert_eq!(out.lines().filter(|l| l.starts_with("3.")).count(), 28);
    }

    #[test]
    fn excluded_exit_two() {
        let (code, _, err) = run_str(&["verify", "3.10"]);
        assert_eq!(code, 2);
        assert!(err.contains("formal divergence"));
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_str(&["verify", "9.9"]).0, 2);
        assert_eq!(run_str(&["verify", "1.1", "--exp-denom", "7"]).0, 2);
        assert_eq!(run_str(&["verify", "2.4", "--param", "a"]).0, 2);
        assert_eq!(run_str(&["frobnicate"]).0, 2);
    }

    #[test]
    fn expand_false_theta_csv() {
        let (code, out, _) = run_str(&["expand", "false-theta", "--s", "3", "--order", "20", "--format", "csv"]);
        assert_eq!(code, 0);
        assert_eq!(out, "exp_num,exp_den,coef_num,coef_den\n0,1,1,1\n3,1,-1,1\n9,1,1,1\n18,1,-1,1\n");
    }

    #[test]
    fn single_transform_instance() {
        let (code, out, _) = run_str(&[
            "verify", "2.4", "--param", "a=q", "--param", "b=q^-1", "--order", "20", "--format", "json",
        ]);
        assert_eq!(code, 0, "{out}");
        assert!(out.starts_with("[{\"subject\":\"2.4\",\"order\":20,\"equal\":true,\"first_mismatch\":null"));
    }

    #[test]
    fn fault_injection_flips_exit_code() {
        let (code, _, _) = run_str(&["verify", "1.3", "--order", "30"]);
        assert_eq!(code, 0);
        let (code, out, _) = run_str(&["verify", "1.3", "--order", "30", "--inject-fault", "1.3"]);
        assert_eq!(code, 1, "{out}");
    }
}
