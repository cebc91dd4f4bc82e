//! The `dialectoscope` command line, callable in-process through [`run`].
//!
//! Exit status: 0 on success, 1 when findings are reported, 2 on usage or
//! input errors.

pub mod verify;

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dialectoscope::audit::{self, AuditReport, Severity, SeverityPolicy};
use dialectoscope::include::{resolve_include, FileSystemModel, IncludeDirective, Resolution};
use dialectoscope::invocation::{ENV_CPATH, ENV_C_INCLUDE_PATH};
use dialectoscope::macros::{active_branches, eval_condition, invocation_macros, predefined_macros, MacroEnv};
use dialectoscope::probe::{self, driver_source, emit_probe_source, explain_value, flags_for_value, value_for_flags};
use dialectoscope::profile::DEFAULT_PROFILE;
use dialectoscope::promotion::{analyze_wrap_check, CType, WrapCheckExpr};
use dialectoscope::space::{check_widths, dialect_count_lower_bound, enumerate_integer_size_models};
use dialectoscope::{
    decode_value, encode_config, parse_invocation, CompilerProfile, DialectConfig, Environment, TypeModel,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "dialectoscope", version, about = "Which C dialect does your build compile?")]
struct Cli {
    /// Compiler profile: a built-in name, a name looked up in the profile
    /// directories, or a path to a .toml file.
    #[arg(long, global = true, default_value = DEFAULT_PROFILE)]
    profile: String,
    /// Extra directories searched for `<name>.toml` profiles.
    #[arg(long = "profile-dir", global = true, env = "DIALECTOSCOPE_PROFILE_DIR", value_delimiter = ':')]
    profile_dirs: Vec<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Findings below this severity do not affect the exit status.
    #[arg(long = "severity-threshold", global = true, default_value = "low", value_parser = parse_severity)]
    severity_threshold: Severity,
    #[command(subcommand)]
    command: Command,
}

fn parse_severity(s: &str) -> Result<Severity, String> {
    s.parse()
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Human,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// The 647-byte dialect probe.
    #[command(subcommand)]
    Probe(ProbeCmd),
    /// Compiler command lines.
    #[command(subcommand)]
    Invocation(InvocationCmd),
    /// Predefined macros and conditional compilation.
    #[command(subcommand)]
    Macros(MacrosCmd),
    /// Header search.
    #[command(subcommand)]
    Include(IncludeCmd),
    /// Integer promotions and the wrap-check idiom.
    #[command(subcommand)]
    Promote(PromoteCmd),
    /// Size of the dialect space.
    #[command(subcommand)]
    Space(SpaceCmd),
    /// Compilation database audits.
    #[command(subcommand)]
    Build(BuildCmd),
}

#[derive(Subcommand, Debug)]
enum ProbeCmd {
    /// Print the probe source.
    Emit {
        /// Print the driver `main` instead.
        #[arg(long)]
        driver: bool,
    },
    /// Options that make the probe return VALUE.
    Flags { value: u64 },
    /// Break VALUE into its eight terms.
    Explain { value: u64 },
    /// Value the probe returns under the given options.
    Value {
        #[arg(long, allow_hyphen_values = true)]
        flags: String,
    },
    /// Compile and run the probe with a real compiler for a range of values.
    Verify {
        #[arg(long, default_value = "gcc")]
        compiler: String,
        /// Inclusive range `A..B`, or a single value.
        #[arg(long, default_value = "0..767")]
        values: String,
        #[arg(long, short)]
        jobs: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
enum InvocationCmd {
    /// Parse a compiler command line (compiler name first).
    Parse {
        /// Environment variable visible to the compiler (CPATH, C_INCLUDE_PATH).
        #[arg(long = "env", value_name = "NAME=VALUE")]
        env: Vec<String>,
        #[arg(required = true, trailing_var_arg = true, allow_hyphen_values = true)]
        argv: Vec<String>,
    },
}

#[derive(Args, Debug)]
struct DialectArgs {
    /// Compiler options (without the compiler name).
    #[arg(long, allow_hyphen_values = true, conflicts_with = "value")]
    flags: Option<String>,
    /// A probe value instead of options.
    #[arg(long)]
    value: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum MacrosCmd {
    /// Print the predefined macros.
    Show {
        #[command(flatten)]
        dialect: DialectArgs,
    },
    /// Evaluate an `#if` expression.
    Eval {
        #[command(flatten)]
        dialect: DialectArgs,
        expr: String,
    },
    /// Report which conditional arms of FILE are compiled.
    Branches {
        #[command(flatten)]
        dialect: DialectArgs,
        file: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum IncludeCmd {
    /// Resolve `<name>` or `"name"`.
    Resolve {
        #[arg(long, allow_hyphen_values = true, default_value = "")]
        flags: String,
        #[arg(long = "env", value_name = "NAME=VALUE")]
        env: Vec<String>,
        /// File containing the directive.
        #[arg(long)]
        from: String,
        /// Manifest (one path per line) or a directory to snapshot.
        #[arg(long)]
        fs: PathBuf,
        /// Compiler working directory; defaults to `/` for a manifest and
        /// to the directory itself for a directory.
        #[arg(long)]
        cwd: Option<String>,
        header: String,
    },
}

#[derive(Subcommand, Debug)]
enum PromoteCmd {
    /// Analyze `(x + y) < x` or `(T)(x + y) < x` on type models.
    Check {
        /// TOML document with `operand_type` and optional `cast_before_compare`.
        file: Option<PathBuf>,
        #[arg(long, conflicts_with = "file")]
        operand: Option<String>,
        #[arg(long, requires = "operand")]
        cast: Option<String>,
        /// `lp64`, `ilp32`, `int16`, `all`, or five widths `c,s,i,l,ll`.
        #[arg(long, default_value = "all")]
        model: String,
    },
}

#[derive(Subcommand, Debug)]
enum SpaceCmd {
    /// 2^N lower bound for N binary implementation-defined behaviors.
    Count {
        #[arg(long, default_value_t = 112)]
        behaviors: u32,
    },
    /// Width assignments allowed for the standard integer types.
    Models,
}

#[derive(Subcommand, Debug)]
enum BuildCmd {
    /// Report dialect differences between translation units.
    Audit {
        database: PathBuf,
        /// TOML severity overrides.
        #[arg(long)]
        policy: Option<PathBuf>,
    },
    /// Compare every translation unit with an assumed dialect.
    Check {
        database: PathBuf,
        #[arg(long = "reference-value", conflicts_with = "reference_flags")]
        reference_value: Option<u64>,
        #[arg(long = "reference-flags", allow_hyphen_values = true)]
        reference_flags: Option<String>,
        #[arg(long)]
        policy: Option<PathBuf>,
    },
}

/// Error reported with exit status 2.
#[derive(Debug)]
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> InputError {
        InputError(e.to_string())
    }
}

type Outcome = Result<i32, InputError>;

fn fail<T>(msg: impl Into<String>) -> Result<T, InputError> {
    Err(InputError(msg.into()))
}

/// Runs the command line `argv` (program name first), writing results to
/// `out` and diagnostics to `err`. Returns the exit status.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(InputError(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn load_profile(cli: &Cli) -> Result<CompilerProfile, InputError> {
    let p = Path::new(&cli.profile);
    if cli.profile.ends_with(".toml") {
        return Ok(CompilerProfile::load(p)?);
    }
    Ok(CompilerProfile::find(&cli.profile, &cli.profile_dirs)?)
}

fn emit<T: Serialize>(out: &mut dyn Write, format: Format, value: &T, human: impl FnOnce() -> String) -> Outcome {
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(value)?)?,
        Format::Human => write!(out, "{}", human())?,
    }
    Ok(EXIT_OK)
}

fn split_flags(flags: &str) -> Result<Vec<String>, InputError> {
    shlex::split(flags).ok_or_else(|| InputError(format!("cannot split options `{flags}`: unbalanced quotes")))
}

fn parse_env(pairs: &[String]) -> Result<Environment, InputError> {
    let mut env = Environment::new();
    for p in pairs {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| InputError(format!("`--env {p}`: expected NAME=VALUE")))?;
        env.insert(k.to_string(), v.to_string());
    }
    Ok(env)
}

fn argv_with_program(profile: &CompilerProfile, flags: &str) -> Result<Vec<String>, InputError> {
    let program = profile.compilers.first().cloned().unwrap_or_else(|| "cc".into());
    let mut argv = vec![program];
    argv.extend(split_flags(flags)?);
    Ok(argv)
}

fn macro_env(d: &DialectArgs, profile: &CompilerProfile) -> Result<MacroEnv, InputError> {
    if let Some(v) = d.value {
        return Ok(predefined_macros(&decode_value(v)?, profile));
    }
    let argv = argv_with_program(profile, d.flags.as_deref().unwrap_or(""))?;
    let inv = parse_invocation(&argv, &Environment::new(), profile)?;
    Ok(invocation_macros(&inv))
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Outcome {
    let profile = load_profile(cli)?;
    let f = cli.format;
    match &cli.command {
        Command::Probe(cmd) => probe_cmd(cmd, &profile, f, out),
        Command::Invocation(InvocationCmd::Parse { env, argv }) => {
            let env = parse_env(env)?;
            let inv = parse_invocation(argv, &env, &profile)?;
            let value = encode_config(&inv.dialect);
            #[derive(Serialize)]
            struct Parsed<'a, 'p> {
                value: u32,
                invocation: &'a dialectoscope::CompilerInvocation<'p>,
            }
            emit(out, f, &Parsed { value, invocation: &inv }, || {
                let mut s = String::new();
                let _ = writeln!(s, "program       {}", inv.program);
                let _ = writeln!(s, "std           {}", inv.std);
                let _ = writeln!(s, "probe value   {value}");
                for dim in dialectoscope::Dimension::ALL {
                    let _ = writeln!(s, "  {:<20}{}", dim.name(), inv.dialect.describe(dim));
                }
                for d in &inv.macro_directives {
                    let _ = writeln!(s, "macro         {d:?}");
                }
                let dirs = &inv.include_dirs;
                for (label, list) in [
                    ("-iquote", &dirs.quote),
                    ("-I", &dirs.bracket),
                    (ENV_CPATH, &dirs.cpath),
                    ("-isystem", &dirs.system),
                    (ENV_C_INCLUDE_PATH, &dirs.c_include_path),
                    ("-idirafter", &dirs.after),
                ] {
                    for d in list {
                        let _ = writeln!(s, "include       {label} {d}");
                    }
                }
                for src in &inv.source_files {
                    let _ = writeln!(s, "source        {src}");
                }
                if !inv.unrecognized.is_empty() {
                    let _ = writeln!(s, "other         {}", inv.unrecognized.join(" "));
                }
                s
            })
        }
        Command::Macros(cmd) => macros_cmd(cmd, &profile, f, out),
        Command::Include(IncludeCmd::Resolve {
            flags,
            env,
            from,
            fs,
            cwd,
            header,
        }) => {
            let env = parse_env(env)?;
            let argv = argv_with_program(&profile, flags)?;
            let inv = parse_invocation(&argv, &env, &profile)?;
            let model = load_fs(fs, cwd.as_deref())?;
            let directive = IncludeDirective::parse(header, from)
                .ok_or_else(|| InputError(format!("`{header}` is not <name> or \"name\"")))?;
            let r = resolve_include(&directive, &inv, &model);
            emit(out, f, &r, || {
                let mut s = String::new();
                for p in r.trace() {
                    let _ = writeln!(s, "{} {}", if p.hit { "hit " } else { "miss" }, p.candidate);
                }
                match r.path() {
                    Some(path) => {
                        let _ = writeln!(s, "found {path}");
                    }
                    None => {
                        let _ = writeln!(s, "not found");
                    }
                }
                s
            })?;
            Ok(match r {
                Resolution::Found { .. } => EXIT_OK,
                Resolution::NotFound { .. } => EXIT_FINDINGS,
            })
        }
        Command::Promote(PromoteCmd::Check {
            file,
            operand,
            cast,
            model,
        }) => {
            let expr = match (file, operand) {
                (Some(path), _) => toml::from_str::<WrapCheckExpr>(&read(path)?)
                    .map_err(|e| InputError(format!("{}: {e}", path.display())))?,
                (None, Some(op)) => {
                    let cast = cast.as_deref().map(str::parse::<CType>).transpose()?;
                    WrapCheckExpr::new(op.parse()?, cast)?
                }
                (None, None) => return fail("give an expression file or --operand"),
            };
            promote_cmd(&expr, &parse_models(model)?, f, out)
        }
        Command::Space(SpaceCmd::Count { behaviors }) => {
            let c = dialect_count_lower_bound(*behaviors);
            emit(out, f, &c, || {
                format!(
                    "behaviors {}\nexact     {}\napprox    ≈{} (≈{})\n",
                    c.behaviors,
                    c.exact,
                    c.approx,
                    c.approx.e_notation()
                )
            })
        }
        Command::Space(SpaceCmd::Models) => {
            let models = enumerate_integer_size_models();
            emit(out, f, &models, || {
                let mut s = String::from("char short int long llong\n");
                for m in &models {
                    let _ = writeln!(s, "{:>4} {:>5} {:>3} {:>4} {:>5}", m[0], m[1], m[2], m[3], m[4]);
                }
                let _ = writeln!(s, "{} models", models.len());
                s
            })
        }
        Command::Build(cmd) => build_cmd(cmd, &profile, f, cli.severity_threshold, out),
    }
}

fn read(path: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn load_fs(path: &Path, cwd: Option<&str>) -> Result<FileSystemModel, InputError> {
    if path.is_dir() {
        let root = path
            .canonicalize()
            .map_err(|e| InputError(format!("{}: {e}", path.display())))?;
        let root_s = root.to_string_lossy().into_owned();
        let mut model = FileSystemModel::new(cwd.unwrap_or(&root_s));
        for entry in walkdir::WalkDir::new(&root) {
            let entry = entry.map_err(|e| InputError(e.to_string()))?;
            if entry.file_type().is_file() {
                model.add(&entry.path().to_string_lossy());
            }
        }
        Ok(model)
    } else {
        Ok(FileSystemModel::from_manifest(&read(path)?, cwd.unwrap_or("/")))
    }
}

fn parse_range(text: &str) -> Result<(u32, u32), InputError> {
    let (a, b) = text.split_once("..").unwrap_or((text, text));
    let a: u32 = a.trim().parse().map_err(|_| InputError(format!("bad range `{text}`")))?;
    let b: u32 = b
        .trim()
        .trim_start_matches('=')
        .parse()
        .map_err(|_| InputError(format!("bad range `{text}`")))?;
    if a > b || b > 767 {
        return fail(format!("range `{text}` must lie within 0..767"));
    }
    Ok((a, b))
}

fn probe_cmd(cmd: &ProbeCmd, profile: &CompilerProfile, f: Format, out: &mut dyn Write) -> Outcome {
    match cmd {
        ProbeCmd::Emit { driver } => {
            let source = if *driver {
                driver_source()
            } else {
                emit_probe_source().to_string()
            };
            #[derive(Serialize)]
            struct Emitted {
                source: String,
                length: usize,
                sha256: String,
            }
            let sha256 = if *driver {
                String::new()
            } else {
                probe::probe_checksum()
            };
            let e = Emitted {
                length: source.len(),
                sha256,
                source,
            };
            emit(out, f, &e, || e.source.clone())
        }
        ProbeCmd::Flags { value } => {
            let flags = flags_for_value(*value, profile)?;
            emit(out, f, &flags, || format!("{}\n", flags.join(" ")))
        }
        ProbeCmd::Explain { value } => {
            let parts = explain_value(*value)?;
            emit(out, f, &parts, || {
                let mut s = String::new();
                for c in &parts {
                    let _ = writeln!(
                        s,
                        "+{:<4} {:<19} {:<13} {}",
                        c.contribution,
                        c.spec.dimension.name(),
                        c.setting,
                        c.spec.c_construct
                    );
                }
                let _ = writeln!(s, "={value}");
                s
            })
        }
        ProbeCmd::Value { flags } => {
            let v = value_for_flags(&split_flags(flags)?, profile)?;
            emit(out, f, &v, || format!("{v}\n"))
        }
        ProbeCmd::Verify {
            compiler,
            values,
            jobs,
        } => {
            let (first, last) = parse_range(values)?;
            let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(4, |n| n.get()));
            let report = verify::verify_with_compiler(compiler, first, last, jobs, profile)?;
            emit(out, f, &report, || {
                let mut s = String::new();
                for r in report.results.iter().filter(|r| r.outcome == verify::Outcome::Fail) {
                    let _ = writeln!(
                        s,
                        "FAIL {}: {}\n  {}",
                        r.value,
                        r.detail.as_deref().unwrap_or(""),
                        r.command.join(" ")
                    );
                }
                let _ = writeln!(s, "{}", report.summary());
                s
            })?;
            Ok(if report.status == verify::Status::Failed {
                EXIT_FINDINGS
            } else {
                EXIT_OK
            })
        }
    }
}

fn macros_cmd(cmd: &MacrosCmd, profile: &CompilerProfile, f: Format, out: &mut dyn Write) -> Outcome {
    match cmd {
        MacrosCmd::Show { dialect } => {
            let env = macro_env(dialect, profile)?;
            emit(out, f, &env, || env.to_defines())
        }
        MacrosCmd::Eval { dialect, expr } => {
            let env = macro_env(dialect, profile)?;
            let v = eval_condition(&env, expr)?;
            emit(out, f, &v.to_string(), || format!("{v}\n"))
        }
        MacrosCmd::Branches { dialect, file } => {
            let env = macro_env(dialect, profile)?;
            let text = read(file)?;
            let report = active_branches(&env, &text).map_err(|e| InputError(format!("{}: {e}", file.display())))?;
            emit(out, f, &report, || {
                let mut s = String::new();
                for g in &report.groups {
                    let indent = "  ".repeat(g.depth);
                    let _ = writeln!(s, "{indent}lines {}-{}", g.start_line, g.end_line);
                    for (i, arm) in g.arms.iter().enumerate() {
                        let mark = if g.taken == Some(i) { "*" } else { " " };
                        let kind = format!("{:?}", arm.kind).to_lowercase();
                        let value = match arm.value {
                            Some(v) => v.to_string(),
                            None => "-".into(),
                        };
                        let _ = writeln!(s, "{indent} {mark} {:>4} #{kind} {} [{value}]", arm.line, arm.condition);
                    }
                }
                let ranges: Vec<String> = report.regions.iter().map(|r| format!("{}-{}", r.start, r.end)).collect();
                let _ = writeln!(s, "retained lines {}", ranges.join(","));
                s
            })
        }
    }
}

fn parse_models(spec: &str) -> Result<Vec<TypeModel>, InputError> {
    Ok(match spec {
        "lp64" => vec![TypeModel::lp64()],
        "ilp32" => vec![TypeModel::ilp32()],
        "int16" => vec![TypeModel::int16()],
        "all" => enumerate_integer_size_models()
            .into_iter()
            .map(|w| TypeModel::from_widths(w, true))
            .collect::<Result<_, _>>()?,
        widths => {
            let parts: Vec<u8> = widths
                .split(',')
                .map(|w| w.trim().parse::<u8>())
                .collect::<Result<_, _>>()
                .map_err(|_| InputError(format!("bad model `{widths}`")))?;
            let w: [u8; 5] = parts
                .try_into()
                .map_err(|_| InputError(format!("model `{widths}` needs five widths")))?;
            check_widths(w)?;
            vec![TypeModel::from_widths(w, true)?]
        }
    })
}

fn promote_cmd(expr: &WrapCheckExpr, models: &[TypeModel], f: Format, out: &mut dyn Write) -> Outcome {
    #[derive(Serialize)]
    struct Row {
        model: [u8; 5],
        #[serde(flatten)]
        analysis: dialectoscope::promotion::WrapAnalysis,
    }
    let rows: Vec<Row> = models
        .iter()
        .map(|m| Row {
            model: m.widths(),
            analysis: analyze_wrap_check(expr, m),
        })
        .collect();
    emit(out, f, &rows, || {
        let mut s = format!("{expr}\n");
        for r in &rows {
            let w = r.model;
            let verdict = match &r.analysis.verdict {
                dialectoscope::promotion::Verdict::Reliable => "RELIABLE".to_string(),
                dialectoscope::promotion::Verdict::Unreliable { reason } => format!("UNRELIABLE: {reason}"),
            };
            let _ = writeln!(s, "{:>2}/{:>2}/{:>2}/{:>2}/{:>2}  {verdict}", w[0], w[1], w[2], w[3], w[4]);
        }
        s
    })?;
    Ok(if rows.iter().all(|r| r.analysis.verdict.is_reliable()) {
        EXIT_OK
    } else {
        EXIT_FINDINGS
    })
}

fn build_cmd(
    cmd: &BuildCmd,
    profile: &CompilerProfile,
    f: Format,
    threshold: Severity,
    out: &mut dyn Write,
) -> Outcome {
    let (database, policy_path) = match cmd {
        BuildCmd::Audit { database, policy } | BuildCmd::Check { database, policy, .. } => (database, policy),
    };
    let policy = match policy_path {
        Some(p) => SeverityPolicy::from_toml(&read(p)?)?,
        None => SeverityPolicy::default(),
    };
    let capture =
        audit::load_build(&read(database)?, profile).map_err(|e| InputError(format!("{}: {e}", database.display())))?;
    let report = match cmd {
        BuildCmd::Audit { .. } => audit::audit(&capture, &policy),
        BuildCmd::Check {
            reference_value,
            reference_flags,
            ..
        } => {
            let reference: DialectConfig = match (reference_value, reference_flags) {
                (Some(v), _) => decode_value(*v)?,
                (None, Some(flags)) => {
                    let argv = argv_with_program(profile, flags)?;
                    parse_invocation(&argv, &Environment::new(), profile)?.dialect
                }
                (None, None) => return fail("give --reference-value or --reference-flags"),
            };
            audit::check_against(&capture, &reference, &policy)
        }
    };
    emit(out, f, &report, || render_audit(&report))?;
    Ok(if report.findings_at_or_above(threshold) > 0 {
        EXIT_FINDINGS
    } else {
        EXIT_OK
    })
}

fn render_audit(r: &AuditReport) -> String {
    let mut s = String::new();
    let width = r.per_tu.iter().map(|t| t.file.len()).max().unwrap_or(4).max(4);
    let _ = writeln!(s, "{:<width$}  value  options", "file");
    for t in &r.per_tu {
        let _ = writeln!(s, "{:<width$}  {:>5}  {}", t.file, t.value, t.flags);
    }
    if !r.inconsistencies.is_empty() {
        let _ = writeln!(s, "\ninconsistencies");
        for i in &r.inconsistencies {
            let parts: Vec<String> = i
                .partition
                .iter()
                .map(|g| format!("{}: {}", g.value, g.files.join(", ")))
                .collect();
            let _ = writeln!(s, "  [{}] {}  {}", i.severity, i.dimension, parts.join(" | "));
        }
    }
    if !r.mismatches.is_empty() {
        let _ = writeln!(s, "\nmismatches with the reference dialect");
        for m in &r.mismatches {
            let _ = writeln!(
                s,
                "  [{}] {}  {}: {} (reference {})",
                m.severity, m.file, m.dimension, m.tu_value, m.reference_value
            );
        }
    }
    if !r.unauditable.is_empty() {
        let _ = writeln!(s, "\nunauditable");
        for u in &r.unauditable {
            let _ = writeln!(s, "  [{}] {}  {}", u.severity, u.file, u.reason);
        }
    }
    let n = r.severities().count();
    let _ = writeln!(s, "\n{n} finding{}", if n == 1 { "" } else { "s" });
    s
}
