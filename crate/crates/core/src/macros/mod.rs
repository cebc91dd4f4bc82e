//! Predefined macro environments and conditional compilation.
//!
//! [`predefined_macros`] computes what a compiler defines before reading any
//! source for a given dialect; [`apply_directives`] layers `-D`/`-U` on top;
//! [`eval_condition`] evaluates `#if` expressions; [`active_branches`] reports
//! which arms of a file's conditional groups survive.

mod branches;
mod expr;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dialect::DialectConfig;
use crate::invocation::{CompilerInvocation, MacroDirective};
use crate::profile::CompilerProfile;

pub use branches::{active_branches, Arm, ArmKind, BranchError, BranchReport, ConditionalGroup, LineRange};
pub use expr::{eval_condition, EvalError};

/// Where a macro definition came from.
#[derive(Serialize, Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Predefined,
    CommandLine,
    Source,
}

/// One macro definition.
#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct MacroDef {
    /// Parameters of a function-like macro; `None` for object-like macros.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<Vec<String>>,
    pub body: String,
    pub provenance: Provenance,
}

impl MacroDef {
    pub fn is_function_like(&self) -> bool {
        self.params.is_some()
    }
}

/// Macro table, at most one definition per name.
#[derive(Serialize, Clone, Debug, Default, PartialEq, Eq)]
#[serde(transparent)]
pub struct MacroEnv {
    table: BTreeMap<String, MacroDef>,
}

impl MacroEnv {
    pub fn new() -> MacroEnv {
        MacroEnv::default()
    }

    /// Defines (or redefines) an object-like macro.
    pub fn define(&mut self, name: &str, body: &str, provenance: Provenance) {
        self.table.insert(
            name.to_string(),
            MacroDef {
                params: None,
                body: body.to_string(),
                provenance,
            },
        );
    }

    pub fn define_function(&mut self, name: &str, params: Vec<String>, body: &str, provenance: Provenance) {
        self.table.insert(
            name.to_string(),
            MacroDef {
                params: Some(params),
                body: body.to_string(),
                provenance,
            },
        );
    }

    pub fn undefine(&mut self, name: &str) {
        self.table.remove(name);
    }

    pub fn get(&self, name: &str) -> Option<&MacroDef> {
        self.table.get(name)
    }

    pub fn is_defined(&self, name: &str) -> bool {
        self.table.contains_key(name)
    }

    /// Body of an object-like macro.
    pub fn body(&self, name: &str) -> Option<&str> {
        self.table.get(name).map(|d| d.body.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &MacroDef)> {
        self.table.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Renders the table as `#define` lines, sorted by name.
    pub fn to_defines(&self) -> String {
        let mut out = String::new();
        for (name, def) in &self.table {
            out.push_str("#define ");
            out.push_str(name);
            if let Some(params) = &def.params {
                out.push('(');
                out.push_str(&params.join(","));
                out.push(')');
            }
            if !def.body.is_empty() {
                out.push(' ');
                out.push_str(&def.body);
            }
            out.push('\n');
        }
        out
    }
}

fn insert_all(env: &mut MacroEnv, set: &BTreeMap<String, String>) {
    for (name, body) in set {
        env.define(name, body, Provenance::Predefined);
    }
}

fn predefined_with_version(
    config: &DialectConfig,
    profile: &CompilerProfile,
    stdc_version: Option<&str>,
) -> MacroEnv {
    let sets = &profile.macros;
    let gnu = !config.ansi_mode.is_strict();
    let mut env = MacroEnv::new();
    insert_all(&mut env, &sets.always);
    let conditional = [
        (gnu, &sets.gnu_mode),
        (!gnu, &sets.strict_mode),
        (config.optimized, &sets.optimized),
        (!config.optimized, &sets.not_optimized),
        (config.char_is_signed, &sets.signed_char),
        (!config.char_is_signed, &sets.unsigned_char),
        (config.pointer_width_64, &sets.ptr64),
        (!config.pointer_width_64, &sets.ptr32),
        (config.pointer_width_64 && gnu, &sets.ptr64_gnu_mode),
        (!config.pointer_width_64 && gnu, &sets.ptr32_gnu_mode),
    ];
    for (on, set) in conditional {
        if on {
            insert_all(&mut env, set);
        }
    }
    env.define("__STDC__", "1", Provenance::Predefined);
    if let Some(v) = stdc_version {
        env.define("__STDC_VERSION__", v, Provenance::Predefined);
    }
    env.define(
        "__STDC_HOSTED__",
        if config.freestanding { "0" } else { "1" },
        Provenance::Predefined,
    );
    env
}

/// Macros the compiler described by `profile` defines under `config`.
///
/// `__STDC_VERSION__` takes the value of the canonical standard of the
/// configuration's class; use [`invocation_macros`] to get the exact value of
/// the `-std=` that was given.
pub fn predefined_macros(config: &DialectConfig, profile: &CompilerProfile) -> MacroEnv {
    predefined_with_version(config, profile, profile.stdc_version_for_class(config.std_class))
}

/// Applies `-D`/`-U` directives in order; a definition replaces any earlier
/// one and undefining an absent name is a no-op.
pub fn apply_directives(mut env: MacroEnv, directives: &[MacroDirective]) -> MacroEnv {
    for d in directives {
        match d {
            MacroDirective::Define { name, params: None, body } => {
                env.define(name, body, Provenance::CommandLine)
            }
            MacroDirective::Define { name, params: Some(p), body } => {
                env.define_function(name, p.clone(), body, Provenance::CommandLine)
            }
            MacroDirective::Undefine { name } => env.undefine(name),
        }
    }
    env
}

/// Full macro environment of an invocation: predefined macros for its
/// dialect and `-std=`, macros implied by profile options, then `-D`/`-U`.
pub fn invocation_macros(inv: &CompilerInvocation<'_>) -> MacroEnv {
    let mut env = predefined_with_version(&inv.dialect, inv.profile, inv.stdc_version());
    for (_, name, value) in &inv.option_macros {
        env.define(name, value, Provenance::Predefined);
    }
    apply_directives(env, &inv.macro_directives)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialect::{decode_value, AnsiMode, StdClass};
    use crate::invocation::{parse_invocation, Environment};

    fn strict_c11_hosted() -> DialectConfig {
        DialectConfig {
            std_class: StdClass::new(0).unwrap(),
            ansi_mode: AnsiMode::Strict,
            ..CompilerProfile::gcc().defaults
        }
    }

    // Expected values from `gcc -std=c11 -E -dM -x c /dev/null`.
    #[test]
    fn strict_c11_matches_gcc_dump() {
        let env = predefined_macros(&strict_c11_hosted(), &CompilerProfile::gcc());
        assert_eq!(env.body("__STDC_VERSION__"), Some("201112L"));
        assert_eq!(env.body("__STDC_HOSTED__"), Some("1"));
        assert_eq!(env.body("__STRICT_ANSI__"), Some("1"));
        assert_eq!(env.body("__STDC__"), Some("1"));
        assert_eq!(env.body("__SIZEOF_POINTER__"), Some("8"));
        assert!(!env.is_defined("__OPTIMIZE__"));
        assert!(!env.is_defined("linux"));
        assert!(!env.is_defined("__CHAR_UNSIGNED__"));
        assert!(env.is_defined("__GNUC__"));
    }

    // `gcc -m32 -ffreestanding -std=gnu90 -E -dM`.
    #[test]
    fn gnu90_has_no_stdc_version() {
        let p = CompilerProfile::gcc();
        let inv = parse_invocation(&["gcc", "-m32", "-ffreestanding", "-std=gnu90"], &Environment::new(), &p)
            .unwrap();
        for env in [invocation_macros(&inv), predefined_macros(&inv.dialect, &p)] {
            assert!(!env.is_defined("__STDC_VERSION__"));
            assert_eq!(env.body("__STDC_HOSTED__"), Some("0"));
            assert_eq!(env.body("__SIZEOF_POINTER__"), Some("4"));
            assert_eq!(env.body("i386"), Some("1"));
            assert_eq!(env.body("unix"), Some("1"));
        }
    }

    #[test]
    fn optimized_and_unsigned_char() {
        let p = CompilerProfile::gcc();
        let inv = parse_invocation(&["gcc", "-std=gnu17", "-O2", "-funsigned-char"], &Environment::new(), &p)
            .unwrap();
        let env = invocation_macros(&inv);
        assert_eq!(env.body("__OPTIMIZE__"), Some("1"));
        assert_eq!(env.body("__CHAR_UNSIGNED__"), Some("1"));
        assert_eq!(env.body("__STDC_VERSION__"), Some("201710L"));
        assert!(!env.is_defined("__NO_INLINE__"));
    }

    #[test]
    fn exact_stdc_version_from_invocation() {
        let p = CompilerProfile::gcc();
        let inv = parse_invocation(&["gcc", "-std=iso9899:199409"], &Environment::new(), &p).unwrap();
        assert_eq!(invocation_macros(&inv).body("__STDC_VERSION__"), Some("199409L"));
        assert_eq!(predefined_macros(&inv.dialect, &p).body("__STDC_VERSION__"), Some("199901L"));
    }

    #[test]
    fn device_option_predefines_macro() {
        let p = CompilerProfile::builtin("mplab-c18").unwrap();
        let inv = parse_invocation(&["mcc18", "-p18f258", "main.c"], &Environment::new(), &p).unwrap();
        let env = invocation_macros(&inv);
        assert_eq!(env.body("__18F258"), Some("1"));
        assert_eq!(env.get("__18F258").unwrap().provenance, Provenance::Predefined);
        assert!(!env.is_defined("__18F452"));
    }

    #[test]
    fn directives_apply_in_order() {
        let e = apply_directives(
            MacroEnv::new(),
            &[MacroDirective::define("X", "1"), MacroDirective::undefine("X")],
        );
        assert!(!e.is_defined("X"));
        let e = apply_directives(
            MacroEnv::new(),
            &[MacroDirective::define("X", "1"), MacroDirective::define("X", "2")],
        );
        assert_eq!(e.body("X"), Some("2"));
        assert_eq!(e.get("X").unwrap().provenance, Provenance::CommandLine);
        let base = predefined_macros(&decode_value(0).unwrap(), &CompilerProfile::gcc());
        assert_eq!(apply_directives(base.clone(), &[MacroDirective::undefine("NOPE")]), base);
    }

    #[test]
    fn command_line_overrides_predefined() {
        let p = CompilerProfile::gcc();
        let inv = parse_invocation(&["gcc", "-U__STDC_HOSTED__", "-D__GNUC__=99"], &Environment::new(), &p)
            .unwrap();
        let env = invocation_macros(&inv);
        assert!(!env.is_defined("__STDC_HOSTED__"));
        assert_eq!(env.body("__GNUC__"), Some("99"));
    }

    #[test]
    fn defines_render() {
        let mut env = MacroEnv::new();
        env.define("A", "1", Provenance::Source);
        env.define_function("F", vec!["x".into()], "(x)", Provenance::Source);
        env.define("E", "", Provenance::Source);
        assert_eq!(env.to_defines(), "#define A 1\n#define E\n#define F(x) (x)\n");
    }
}
