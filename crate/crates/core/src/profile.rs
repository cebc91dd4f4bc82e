//! Data-driven toolchain profiles.
//!
//! A profile is a TOML document describing one compiler family: its default
//! dialect, the `-std=` names it accepts, the options that move a dialect
//! dimension, the system include directories, and the macros it predefines.
//! New toolchains are added by writing a profile, not by changing code.
//!
//! Two profiles are built in: `gcc8-x86_64` (tested against real GCC) and
//! `mplab-c18`, a documentation sample showing device-selection macros.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dialect::{AnsiMode, DialectConfig, StdClass};

/// Name of the profile used when none is requested.
pub const DEFAULT_PROFILE: &str = "gcc8-x86_64";

const BUILTIN: &[(&str, &str)] = &[
    ("gcc8-x86_64", include_str!("../profiles/gcc8-x86_64.toml")),
    ("mplab-c18", include_str!("../profiles/mplab-c18.toml")),
];

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("profile `{name}` not found (searched built-ins and {searched:?})")]
    NotFound { name: String, searched: Vec<PathBuf> },
    #[error("cannot read profile {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("profile {origin}: {source}")]
    Syntax {
        origin: String,
        source: toml::de::Error,
    },
    #[error("profile `{profile}` is inconsistent: {reason}")]
    Invalid { profile: String, reason: String },
    #[error("profile `{profile}` has no {mode} standard name for class {class}")]
    NoStdName {
        profile: String,
        class: StdClass,
        mode: &'static str,
    },
}

/// What one `-std=` name selects.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct StdInfo {
    pub class: StdClass,
    pub strict: bool,
    /// Spelling of `__STDC_VERSION__`, e.g. `201112L`; absent for C90.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stdc_version: Option<String>,
}

impl StdInfo {
    pub fn stdc_version_value(&self) -> Option<u64> {
        self.stdc_version
            .as_deref()
            .map(|v| v.trim_end_matches(['L', 'l', 'U', 'u']).parse().unwrap_or(0))
    }
}

/// Canonical spellings of each `-std=` class in strict and GNU mode.
#[derive(Serialize, Deserialize, Clone, Debug, Default, PartialEq, Eq)]
pub struct ClassNames {
    #[serde(default)]
    pub strict: Option<String>,
    #[serde(default)]
    pub gnu: Option<String>,
}

/// Option spellings used by `canonical_flags`.
#[derive(Serialize, Deserialize, Clone, Debug, Default, PartialEq, Eq)]
#[serde(default)]
pub struct CanonicalFlags {
    pub signed_char: String,
    pub unsigned_char: String,
    pub signed_bitfields: String,
    pub unsigned_bitfields: String,
    pub short_enums: String,
    pub optimize: String,
    pub pointer_32: String,
    pub pointer_64: String,
    pub hosted: String,
    pub freestanding: String,
    pub trigraphs: String,
}

/// Effect of one option on the invocation. Unset fields leave the
/// corresponding state alone.
#[derive(Serialize, Deserialize, Clone, Debug, Default, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct FlagEffect {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub char_is_signed: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bitfield_is_signed: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub short_enums: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimized: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pointer_width_64: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freestanding: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trigraphs: Option<bool>,
    /// Alias for `-std=<name>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nostdinc: Option<bool>,
    /// Macros the compiler predefines when this option is given.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub define: BTreeMap<String, String>,
}

/// Groups of predefined macros, keyed by the dialect condition under which
/// the compiler defines them.
#[derive(Serialize, Deserialize, Clone, Debug, Default, PartialEq, Eq)]
#[serde(default, deny_unknown_fields)]
pub struct MacroSets {
    pub always: BTreeMap<String, String>,
    pub gnu_mode: BTreeMap<String, String>,
    pub strict_mode: BTreeMap<String, String>,
    pub optimized: BTreeMap<String, String>,
    pub not_optimized: BTreeMap<String, String>,
    pub signed_char: BTreeMap<String, String>,
    pub unsigned_char: BTreeMap<String, String>,
    pub ptr64: BTreeMap<String, String>,
    pub ptr32: BTreeMap<String, String>,
    pub ptr64_gnu_mode: BTreeMap<String, String>,
    pub ptr32_gnu_mode: BTreeMap<String, String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Defaults {
    char_is_signed: bool,
    bitfield_is_signed: bool,
    short_enums: bool,
    optimized: bool,
    pointer_width_64: bool,
    freestanding: bool,
    std: String,
    #[serde(default)]
    trigraphs: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    name: String,
    #[serde(default)]
    description: String,
    #[serde(default)]
    version_range: Option<String>,
    compilers: Vec<String>,
    #[serde(default)]
    system_include_dirs: Vec<String>,
    #[serde(default)]
    separate_arg_flags: Vec<String>,
    defaults: Defaults,
    standards: BTreeMap<String, StdInfo>,
    #[serde(default)]
    classes: BTreeMap<String, ClassNames>,
    #[serde(default)]
    canonical: CanonicalFlags,
    #[serde(default)]
    flags: BTreeMap<String, FlagEffect>,
    #[serde(default)]
    macros: MacroSets,
}

/// A toolchain description loaded from a profile document.
#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct CompilerProfile {
    pub name: String,
    pub description: String,
    pub version_range: Option<String>,
    /// Compiler program basenames this profile covers; a trailing `*`
    /// matches any suffix.
    pub compilers: Vec<String>,
    /// Dialect with no options given.
    pub defaults: DialectConfig,
    /// `-std=` name in effect with no options given.
    pub default_std: String,
    pub default_trigraphs: bool,
    pub std_names: BTreeMap<String, StdInfo>,
    pub classes: BTreeMap<u8, ClassNames>,
    pub canonical: CanonicalFlags,
    pub flag_vocabulary: BTreeMap<String, FlagEffect>,
    pub macros: MacroSets,
    pub system_include_dirs: Vec<String>,
    pub separate_arg_flags: Vec<String>,
}

impl CompilerProfile {
    /// Parses and validates a profile document. `origin` names the document
    /// in error messages.
    pub fn from_toml(text: &str, origin: &str) -> Result<CompilerProfile, ProfileError> {
        let file: ProfileFile = toml::from_str(text).map_err(|source| ProfileError::Syntax {
            origin: origin.to_string(),
            source,
        })?;
        let invalid = |reason: String| ProfileError::Invalid {
            profile: file.name.clone(),
            reason,
        };

        let default_std = file.defaults.std.clone();
        let std_info = file
            .standards
            .get(&default_std)
            .ok_or_else(|| invalid(format!("default std `{default_std}` is not in [standards]")))?;
        for (name, info) in &file.standards {
            let expected = StdClass::from_stdc_version(info.stdc_version_value());
            if expected != info.class {
                return Err(invalid(format!(
                    "std `{name}` has class {} but __STDC_VERSION__ {:?} gives class {expected}",
                    info.class, info.stdc_version
                )));
            }
        }

        let mut classes = BTreeMap::new();
        for (key, names) in &file.classes {
            let class = key
                .parse::<u8>()
                .ok()
                .and_then(|c| StdClass::new(c).ok())
                .ok_or_else(|| invalid(format!("class key `{key}` is not 0..=3")))?;
            for (name, strict) in [(&names.strict, true), (&names.gnu, false)] {
                let Some(name) = name else { continue };
                match file.standards.get(name) {
                    Some(info) if info.class == class && info.strict == strict => {}
                    _ => {
                        return Err(invalid(format!(
                            "class {class} names `{name}`, which is not a {} std of that class",
                            if strict { "strict" } else { "GNU" }
                        )))
                    }
                }
            }
            classes.insert(class.get(), names.clone());
        }

        for (flag, effect) in &file.flags {
            if let Some(std) = &effect.std {
                if !file.standards.contains_key(std) {
                    return Err(invalid(format!("flag `{flag}` aliases unknown std `{std}`")));
                }
            }
        }

        let d = &file.defaults;
        let trigraphs = if std_info.strict { true } else { d.trigraphs };
        let defaults = DialectConfig {
            char_is_signed: d.char_is_signed,
            bitfield_is_signed: d.bitfield_is_signed,
            short_enums: d.short_enums,
            optimized: d.optimized,
            pointer_width_64: d.pointer_width_64,
            freestanding: d.freestanding,
            std_class: std_info.class,
            ansi_mode: ansi_mode(std_info.strict, trigraphs),
        };

        Ok(CompilerProfile {
            name: file.name,
            description: file.description,
            version_range: file.version_range,
            compilers: file.compilers,
            defaults,
            default_std,
            default_trigraphs: trigraphs,
            std_names: file.standards,
            classes,
            canonical: file.canonical,
            flag_vocabulary: file.flags,
            macros: file.macros,
            system_include_dirs: file.system_include_dirs,
            separate_arg_flags: file.separate_arg_flags,
        })
    }

    /// One of the profiles compiled into the library.
    pub fn builtin(name: &str) -> Option<CompilerProfile> {
        static PARSED: OnceLock<Vec<CompilerProfile>> = OnceLock::new();
        let parsed = PARSED.get_or_init(|| {
            BUILTIN
                .iter()
                .map(|(n, text)| {
                    CompilerProfile::from_toml(text, &format!("builtin:{n}"))
                        .expect("built-in profiles are valid")
                })
                .collect()
        });
        BUILTIN
            .iter()
            .position(|(n, _)| *n == name)
            .map(|i| parsed[i].clone())
    }

    pub fn builtin_names() -> impl Iterator<Item = &'static str> {
        BUILTIN.iter().map(|(n, _)| *n)
    }

    /// The default GCC/x86_64 profile.
    pub fn gcc() -> CompilerProfile {
        CompilerProfile::builtin(DEFAULT_PROFILE).expect("default profile is built in")
    }

    /// Looks for `<name>.toml` in `dirs` (in order), then among the built-ins.
    pub fn find(name: &str, dirs: &[PathBuf]) -> Result<CompilerProfile, ProfileError> {
        for dir in dirs {
            let path = dir.join(format!("{name}.toml"));
            if path.is_file() {
                return CompilerProfile::load(&path);
            }
        }
        CompilerProfile::builtin(name).ok_or_else(|| ProfileError::NotFound {
            name: name.to_string(),
            searched: dirs.to_vec(),
        })
    }

    pub fn load(path: &Path) -> Result<CompilerProfile, ProfileError> {
        let text = fs::read_to_string(path).map_err(|source| ProfileError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        CompilerProfile::from_toml(&text, &path.display().to_string())
    }

    /// Canonical `-std=` name for a class, strict or GNU.
    pub fn std_name_for(&self, class: StdClass, strict: bool) -> Result<&str, ProfileError> {
        self.classes
            .get(&class.get())
            .and_then(|n| if strict { n.strict.as_deref() } else { n.gnu.as_deref() })
            .ok_or_else(|| ProfileError::NoStdName {
                profile: self.name.clone(),
                class,
                mode: if strict { "strict" } else { "GNU" },
            })
    }

    /// `__STDC_VERSION__` spelling of the canonical standard of `class`.
    pub fn stdc_version_for_class(&self, class: StdClass) -> Option<&str> {
        let names = self.classes.get(&class.get())?;
        names
            .strict
            .iter()
            .chain(names.gnu.iter())
            .filter_map(|n| self.std_names.get(n))
            .find_map(|info| info.stdc_version.as_deref())
    }

    /// Whether the program named `program` (a path or bare name) is a
    /// compiler this profile describes.
    pub fn covers_compiler(&self, program: &str) -> bool {
        let base = program.rsplit(['/', '\\']).next().unwrap_or(program);
        self.compilers.iter().any(|pattern| match pattern.strip_suffix('*') {
            Some(prefix) => base.starts_with(prefix),
            None => base == pattern,
        })
    }

    pub fn takes_separate_arg(&self, flag: &str) -> bool {
        self.separate_arg_flags.iter().any(|f| f == flag)
    }
}

/// Mode resulting from a std strictness and the trigraph switch.
pub fn ansi_mode(strict: bool, trigraphs: bool) -> AnsiMode {
    match (strict, trigraphs) {
        (true, _) => AnsiMode::Strict,
        (false, false) => AnsiMode::Gnu,
        (false, true) => AnsiMode::GnuTrigraphs,
    }
}

#[cfg(test)]
impl CompilerProfile {
    fn builtin_text(name: &str) -> String {
        BUILTIN.iter().find(|(n, _)| *n == name).unwrap().1.to_string()
    }
}
