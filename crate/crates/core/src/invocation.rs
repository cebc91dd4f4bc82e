//! Compiler command lines: parsing into a [`CompilerInvocation`] and deriving
//! the dialect it selects.
//!
//! Options are applied left to right starting from the profile defaults, so
//! the last of two conflicting options wins. `-D`/`-U` and include-directory
//! options are recorded in command-line order. Options the profile does not
//! know are kept in [`CompilerInvocation::unrecognized`]; real build captures
//! are full of warning and code-generation flags that do not touch the
//! dialect.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::dialect::DialectConfig;
use crate::profile::{ansi_mode, CompilerProfile};

/// Environment variables visible to the compiler.
pub type Environment = BTreeMap<String, String>;

/// Adds directories after `-I` directories.
pub const ENV_CPATH: &str = "CPATH";
/// Adds directories after `-isystem` directories (C only).
pub const ENV_C_INCLUDE_PATH: &str = "C_INCLUDE_PATH";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InvocationError {
    #[error("empty command line")]
    EmptyArgv,
    #[error("unknown standard `-std={std}` for profile `{profile}`")]
    UnknownStd { std: String, profile: String },
    #[error("malformed macro option `{arg}`: {reason}")]
    MalformedMacro { arg: String, reason: String },
    #[error("option `{flag}` requires an argument")]
    MissingArgument { flag: String },
}

/// A `-D` or `-U` option.
#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MacroDirective {
    Define {
        name: String,
        /// Parameter list for a function-like macro, `None` for object-like.
        #[serde(skip_serializing_if = "Option::is_none")]
        params: Option<Vec<String>>,
        body: String,
    },
    Undefine {
        name: String,
    },
}

impl MacroDirective {
    pub fn define(name: &str, body: &str) -> MacroDirective {
        MacroDirective::Define {
            name: name.to_string(),
            params: None,
            body: body.to_string(),
        }
    }

    pub fn undefine(name: &str) -> MacroDirective {
        MacroDirective::Undefine {
            name: name.to_string(),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            MacroDirective::Define { name, .. } | MacroDirective::Undefine { name } => name,
        }
    }
}

/// Include directories, one list per kind, each in command-line order.
#[derive(Serialize, Clone, Debug, Default, PartialEq, Eq)]
pub struct IncludeDirs {
    /// `-iquote`: searched for `"..."` includes only.
    pub quote: Vec<String>,
    /// `-I`.
    pub bracket: Vec<String>,
    /// `-isystem`.
    pub system: Vec<String>,
    /// `-idirafter`: searched after the system directories.
    pub after: Vec<String>,
    /// From `CPATH`.
    pub cpath: Vec<String>,
    /// From `C_INCLUDE_PATH`.
    pub c_include_path: Vec<String>,
    /// `-nostdinc` was given.
    pub nostdinc: bool,
}

/// A parsed compiler command line.
#[derive(Serialize, Clone, Debug)]
pub struct CompilerInvocation<'p> {
    #[serde(skip)]
    pub profile: &'p CompilerProfile,
    pub program: String,
    pub dialect: DialectConfig,
    /// Effective `-std=` name.
    pub std: String,
    /// Last optimization option seen, if any.
    pub optimization: Option<String>,
    pub macro_directives: Vec<MacroDirective>,
    /// Macros the profile predefines because of an option (`-p18f258`), as
    /// (option, name, value).
    pub option_macros: Vec<(String, String, String)>,
    pub include_dirs: IncludeDirs,
    pub source_files: Vec<String>,
    pub unrecognized: Vec<String>,
}

impl CompilerInvocation<'_> {
    /// `__STDC_VERSION__` spelling for the effective standard.
    pub fn stdc_version(&self) -> Option<&str> {
        self.profile
            .std_names
            .get(&self.std)
            .and_then(|i| i.stdc_version.as_deref())
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses the argument of `-D`: `NAME`, `NAME=BODY` or `NAME(PARAMS)=BODY`.
fn parse_define(arg: &str) -> Result<MacroDirective, InvocationError> {
    let bad = |reason: &str| InvocationError::MalformedMacro {
        arg: format!("-D{arg}"),
        reason: reason.to_string(),
    };
    let (head, body) = match arg.split_once('=') {
        Some((h, b)) => (h, b.to_string()),
        None => (arg, "1".to_string()),
    };
    let (name, params) = match head.split_once('(') {
        Some((name, rest)) => {
            let list = rest
                .strip_suffix(')')
                .ok_or_else(|| bad("unterminated parameter list"))?;
            let params: Vec<String> = if list.trim().is_empty() {
                Vec::new()
            } else {
                list.split(',').map(|p| p.trim().to_string()).collect()
            };
            let last = params.len().saturating_sub(1);
            for (i, p) in params.iter().enumerate() {
                if !(is_identifier(p) || (p == "..." && i == last)) {
                    return Err(bad(&format!("bad macro parameter `{p}`")));
                }
            }
            (name, Some(params))
        }
        None => (head, None),
    };
    if name.is_empty() {
        return Err(bad("missing macro name"));
    }
    if !is_identifier(name) {
        return Err(bad("macro names must be identifiers"));
    }
    Ok(MacroDirective::Define {
        name: name.to_string(),
        params,
        body,
    })
}

fn parse_undefine(arg: &str) -> Result<MacroDirective, InvocationError> {
    if is_identifier(arg) {
        Ok(MacroDirective::undefine(arg))
    } else {
        Err(InvocationError::MalformedMacro {
            arg: format!("-U{arg}"),
            reason: "macro names must be identifiers".to_string(),
        })
    }
}

/// Splits a path-list variable; an empty element means the current directory.
fn split_path_list(value: &str) -> Vec<String> {
    value
        .split(':')
        .map(|p| if p.is_empty() { ".".to_string() } else { p.to_string() })
        .collect()
}

/// Parses `argv` (compiler program first) under `profile`.
///
/// `CPATH` and `C_INCLUDE_PATH` from `env` are appended to their include
/// lists; other variables are ignored. Options coming from configuration
/// files must already be expanded into `argv`.
pub fn parse_invocation<'p, S: AsRef<str>>(
    argv: &[S],
    env: &Environment,
    profile: &'p CompilerProfile,
) -> Result<CompilerInvocation<'p>, InvocationError> {
    let (program, args) = argv.split_first().ok_or(InvocationError::EmptyArgv)?;

    let mut dialect = profile.defaults;
    let mut std = profile.default_std.clone();
    let mut trigraphs = profile.default_trigraphs;
    let mut inv = CompilerInvocation {
        profile,
        program: program.as_ref().to_string(),
        dialect,
        std: std.clone(),
        optimization: None,
        macro_directives: Vec::new(),
        option_macros: Vec::new(),
        include_dirs: IncludeDirs::default(),
        source_files: Vec::new(),
        unrecognized: Vec::new(),
    };

    let set_std = |name: &str, std: &mut String, trigraphs: &mut bool| {
        let info = profile
            .std_names
            .get(name)
            .ok_or_else(|| InvocationError::UnknownStd {
                std: name.to_string(),
                profile: profile.name.clone(),
            })?;
        // Selecting a standard resets trigraph processing to that standard's
        // default: on for ISO modes, off for GNU modes.
        *trigraphs = info.strict;
        *std = name.to_string();
        Ok::<_, InvocationError>(())
    };

    let mut i = 0;
    let take_value = |flag: &str, joined: &str, i: &mut usize| -> Result<String, InvocationError> {
        if !joined.is_empty() {
            return Ok(joined.to_string());
        }
        *i += 1;
        args.get(*i)
            .map(|a| a.as_ref().to_string())
            .ok_or_else(|| InvocationError::MissingArgument {
                flag: flag.to_string(),
            })
    };

    while i < args.len() {
        let arg = args[i].as_ref();
        if let Some(name) = arg.strip_prefix("-std=") {
            set_std(name, &mut std, &mut trigraphs)?;
        } else if let Some(effect) = profile.flag_vocabulary.get(arg) {
            if let Some(v) = effect.char_is_signed {
                dialect.char_is_signed = v;
            }
            if let Some(v) = effect.bitfield_is_signed {
                dialect.bitfield_is_signed = v;
            }
            if let Some(v) = effect.short_enums {
                dialect.short_enums = v;
            }
            if let Some(v) = effect.optimized {
                dialect.optimized = v;
                inv.optimization = Some(arg.to_string());
            }
            if let Some(v) = effect.pointer_width_64 {
                dialect.pointer_width_64 = v;
            }
            if let Some(v) = effect.freestanding {
                dialect.freestanding = v;
            }
            if let Some(name) = &effect.std {
                set_std(name, &mut std, &mut trigraphs)?;
            }
            if let Some(v) = effect.trigraphs {
                trigraphs = v;
            }
            if let Some(v) = effect.nostdinc {
                inv.include_dirs.nostdinc = v;
            }
            for (name, value) in &effect.define {
                inv.option_macros
                    .push((arg.to_string(), name.clone(), value.clone()));
            }
        } else if let Some(rest) = arg.strip_prefix("-D") {
            let value = take_value("-D", rest, &mut i)?;
            inv.macro_directives.push(parse_define(&value)?);
        } else if let Some(rest) = arg.strip_prefix("-U") {
            let value = take_value("-U", rest, &mut i)?;
            inv.macro_directives.push(parse_undefine(&value)?);
        } else if let Some(rest) = arg.strip_prefix("-iquote") {
            let dir = take_value("-iquote", rest, &mut i)?;
            inv.include_dirs.quote.push(dir);
        } else if let Some(rest) = arg.strip_prefix("-isystem") {
            let dir = take_value("-isystem", rest, &mut i)?;
            inv.include_dirs.system.push(dir);
        } else if let Some(rest) = arg.strip_prefix("-idirafter") {
            let dir = take_value("-idirafter", rest, &mut i)?;
            inv.include_dirs.after.push(dir);
        } else if arg == "-I-" {
            inv.unrecognized.push(arg.to_string());
        } else if let Some(rest) = arg.strip_prefix("-I") {
            let dir = take_value("-I", rest, &mut i)?;
            inv.include_dirs.bracket.push(dir);
        } else if profile.takes_separate_arg(arg) {
            inv.unrecognized.push(arg.to_string());
            let value = take_value(arg, "", &mut i)?;
            inv.unrecognized.push(value);
        } else if arg.starts_with('-') && arg != "-" {
            inv.unrecognized.push(arg.to_string());
        } else {
            inv.source_files.push(arg.to_string());
        }
        i += 1;
    }

    if let Some(v) = env.get(ENV_CPATH) {
        inv.include_dirs.cpath = split_path_list(v);
    }
    if let Some(v) = env.get(ENV_C_INCLUDE_PATH) {
        inv.include_dirs.c_include_path = split_path_list(v);
    }

    let info = &profile.std_names[&std];
    dialect.std_class = info.class;
    dialect.ansi_mode = ansi_mode(info.strict, trigraphs);
    inv.dialect = dialect;
    inv.std = std;
    Ok(inv)
}

/// The dialect an invocation selects.
pub fn derive_dialect(inv: &CompilerInvocation<'_>) -> DialectConfig {
    inv.dialect
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialect::{encode_config, AnsiMode};

    fn parse(line: &str) -> Result<u32, InvocationError> {
        let p = CompilerProfile::gcc();
        let argv: Vec<&str> = std::iter::once("gcc").chain(line.split_whitespace()).collect();
        parse_invocation(&argv, &Environment::new(), &p).map(|inv| encode_config(&inv.dialect))
    }

    #[test]
    fn published_flag_lists() {
        assert_eq!(
            parse("-fsigned-char -fsigned-bitfields -O2 -m64 -ffreestanding -std=gnu17"),
            Ok(443)
        );
        assert_eq!(parse("-funsigned-char -funsigned-bitfields -m32 -fhosted -std=c11"), Ok(0));
        assert_eq!(
            parse("-funsigned-char -funsigned-bitfields -m32 -fhosted -std=gnu17 -trigraphs"),
            Ok(640)
        );
    }

    // Values below were observed by compiling the probe with GCC 11 on x86_64.
    #[test]
    fn matches_observed_gcc_behavior() {
        assert_eq!(parse(""), Ok(403));
        assert_eq!(parse("-ansi"), Ok(211));
        assert_eq!(parse("-O3"), Ok(411));
        assert_eq!(parse("-funsigned-char -fsigned-char"), Ok(403));
        assert_eq!(parse("-trigraphs -std=gnu17"), Ok(403));
        assert_eq!(parse("-std=gnu17 -trigraphs"), Ok(659));
        assert_eq!(parse("-std=c11 -trigraphs"), Ok(19));
        assert_eq!(parse("-std=c11 -ansi"), Ok(211));
        assert_eq!(parse("-ansi -std=gnu11"), Ok(275));
        assert_eq!(parse("-std=iso9899:199409"), Ok(83));
        assert_eq!(parse("-O2 -O0"), Ok(403));
        assert_eq!(parse("-fno-hosted"), Ok(435));
        assert_eq!(parse("-std=gnu89"), Ok(467));
        assert_eq!(parse("-std=c18"), Ok(147));
    }

    #[test]
    fn unknown_std_names_profile() {
        let err = parse("-std=nonsense").unwrap_err();
        assert_eq!(
            err,
            InvocationError::UnknownStd {
                std: "nonsense".into(),
                profile: "gcc8-x86_64".into()
            }
        );
        assert!(err.to_string().contains("gcc8-x86_64"));
    }

    #[test]
    fn macro_options_in_order() {
        let p = CompilerProfile::gcc();
        let argv = ["gcc", "-DA", "-UB", "-D", "C=2", "-DF(x,y)=x+y", "-DE="];
        let inv = parse_invocation(&argv, &Environment::new(), &p).unwrap();
        assert_eq!(
            inv.macro_directives,
            vec![
                MacroDirective::define("A", "1"),
                MacroDirective::undefine("B"),
                MacroDirective::define("C", "2"),
                MacroDirective::Define {
                    name: "F".into(),
                    params: Some(vec!["x".into(), "y".into()]),
                    body: "x+y".into()
                },
                MacroDirective::define("E", ""),
            ]
        );
    }

    #[test]
    fn malformed_macros() {
        for bad in ["-D=1", "-D1X", "-DF(x", "-DF(1)=2", "-U", "-U1A", "-D"] {
            assert!(parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn include_dirs_and_env() {
        let p = CompilerProfile::gcc();
        let argv = [
            "gcc", "-Ix", "-I", "y", "-iquote", "q", "-isystem", "s", "-idirafter", "late",
            "-nostdinc", "-c", "a.c", "-o", "a.o",
        ];
        let env = Environment::from([
            (ENV_CPATH.to_string(), "/cp1::/cp2".to_string()),
            (ENV_C_INCLUDE_PATH.to_string(), "/ci".to_string()),
            ("CPLUS_INCLUDE_PATH".to_string(), "/ignored".to_string()),
        ]);
        let inv = parse_invocation(&argv, &env, &p).unwrap();
        let d = &inv.include_dirs;
        assert_eq!(d.bracket, ["x", "y"]);
        assert_eq!(d.quote, ["q"]);
        assert_eq!(d.system, ["s"]);
        assert_eq!(d.after, ["late"]);
        assert_eq!(d.cpath, ["/cp1", ".", "/cp2"]);
        assert_eq!(d.c_include_path, ["/ci"]);
        assert!(d.nostdinc);
        assert_eq!(inv.source_files, ["a.c"]);
        assert_eq!(inv.unrecognized, ["-c", "-o", "a.o"]);
    }

    #[test]
    fn optimization_level_kept() {
        let p = CompilerProfile::gcc();
        let inv = parse_invocation(&["gcc", "-Os", "-Wall"], &Environment::new(), &p).unwrap();
        assert!(inv.dialect.optimized);
        assert_eq!(inv.optimization.as_deref(), Some("-Os"));
        assert_eq!(inv.unrecognized, ["-Wall"]);
        assert_eq!(inv.dialect.ansi_mode, AnsiMode::Gnu);
    }

    #[test]
    fn option_predefines() {
        let p = CompilerProfile::builtin("mplab-c18").unwrap();
        let inv = parse_invocation(&["mcc18", "-p18f258", "x.c"], &Environment::new(), &p).unwrap();
        assert_eq!(
            inv.option_macros,
            vec![("-p18f258".to_string(), "__18F258".to_string(), "1".to_string())]
        );
    }

    #[test]
    fn empty_argv() {
        let p = CompilerProfile::gcc();
        let argv: [&str; 0] = [];
        assert_eq!(
            parse_invocation(&argv, &Environment::new(), &p).unwrap_err(),
            InvocationError::EmptyArgv
        );
    }
}
