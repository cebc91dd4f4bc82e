//! Header search over a virtual file tree.
//!
//! Paths are POSIX-style strings. Nothing here touches the real disk; the CLI
//! builds a [`FileSystemModel`] from a manifest or a directory walk first.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::invocation::CompilerInvocation;

/// Normalizes `path` against `cwd`: makes it absolute and removes `.` and
/// `..` segments. `..` at the root stays at the root.
pub fn normalize(path: &str, cwd: &str) -> String {
    let joined = if path.starts_with('/') {
        path.to_string()
    } else {
        format!("{cwd}/{path}")
    };
    let mut parts: Vec<&str> = Vec::new();
    for seg in joined.split('/') {
        match seg {
            "" | "." => {}
            ".." => {
                parts.pop();
            }
            s => parts.push(s),
        }
    }
    format!("/{}", parts.join("/"))
}

/// Directory part of a path, `.` when there is none.
fn parent_dir(path: &str) -> String {
    match path.rfind('/') {
        Some(0) => "/".to_string(),
        Some(i) => path[..i].to_string(),
        None => ".".to_string(),
    }
}

/// A snapshot of a file tree plus the compiler's working directory.
#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct FileSystemModel {
    files: BTreeSet<String>,
    cwd: String,
}

impl FileSystemModel {
    pub fn new(cwd: &str) -> FileSystemModel {
        FileSystemModel {
            files: BTreeSet::new(),
            cwd: normalize(cwd, "/"),
        }
    }

    /// One path per line; blank lines and lines starting with `#` are skipped.
    /// Relative paths are taken relative to `cwd`.
    pub fn from_manifest(text: &str, cwd: &str) -> FileSystemModel {
        let mut fs = FileSystemModel::new(cwd);
        for line in text.lines().map(str::trim) {
            if !line.is_empty() && !line.starts_with('#') {
                fs.add(line);
            }
        }
        fs
    }

    pub fn add(&mut self, path: &str) {
        let p = normalize(path, &self.cwd);
        self.files.insert(p);
    }

    pub fn with_file(mut self, path: &str) -> FileSystemModel {
        self.add(path);
        self
    }

    pub fn contains(&self, path: &str) -> bool {
        self.files.contains(&normalize(path, &self.cwd))
    }

    pub fn cwd(&self) -> &str {
        &self.cwd
    }

    pub fn files(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }
}

#[derive(Serialize, Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[serde(rename_all = "lowercase")]
pub enum IncludeForm {
    /// `#include <...>`
    Angle,
    /// `#include "..."`
    Quote,
}

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct IncludeDirective {
    pub header_name: String,
    pub form: IncludeForm,
    pub including_file: String,
}

impl IncludeDirective {
    /// `None` if `header_name` is empty.
    pub fn new(header_name: &str, form: IncludeForm, including_file: &str) -> Option<IncludeDirective> {
        (!header_name.is_empty()).then(|| IncludeDirective {
            header_name: header_name.to_string(),
            form,
            including_file: including_file.to_string(),
        })
    }

    /// Parses `<name>` or `"name"`.
    pub fn parse(spelling: &str, including_file: &str) -> Option<IncludeDirective> {
        let s = spelling.trim();
        let (form, inner) = if let Some(rest) = s.strip_prefix('<') {
            (IncludeForm::Angle, rest.strip_suffix('>')?)
        } else {
            let rest = s.strip_prefix('"')?;
            (IncludeForm::Quote, rest.strip_suffix('"')?)
        };
        IncludeDirective::new(inner, form, including_file)
    }
}

/// Directories searched for an include of the given form, in order.
/// Directories named more than once keep their first position.
pub fn search_paths(inv: &CompilerInvocation<'_>, form: IncludeForm, including_file: &str) -> Vec<String> {
    let dirs = &inv.include_dirs;
    let mut out: Vec<String> = Vec::new();
    if form == IncludeForm::Quote {
        out.push(parent_dir(including_file));
        out.extend(dirs.quote.iter().cloned());
    }
    out.extend(dirs.bracket.iter().cloned());
    out.extend(dirs.cpath.iter().cloned());
    out.extend(dirs.system.iter().cloned());
    out.extend(dirs.c_include_path.iter().cloned());
    if !dirs.nostdinc {
        out.extend(inv.profile.system_include_dirs.iter().cloned());
    }
    out.extend(dirs.after.iter().cloned());

    let mut seen = BTreeSet::new();
    out.retain(|d| seen.insert(d.clone()));
    out
}

/// One candidate looked at during resolution.
#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct Probe {
    /// Search directory, as written (empty for absolute header names).
    pub directory: String,
    /// Normalized candidate path.
    pub candidate: String,
    pub hit: bool,
}

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Resolution {
    Found { path: String, trace: Vec<Probe> },
    NotFound { trace: Vec<Probe> },
}

impl Resolution {
    pub fn trace(&self) -> &[Probe] {
        match self {
            Resolution::Found { trace, .. } | Resolution::NotFound { trace } => trace,
        }
    }

    pub fn path(&self) -> Option<&str> {
        match self {
            Resolution::Found { path, .. } => Some(path),
            Resolution::NotFound { .. } => None,
        }
    }
}

/// Looks the header up in each search directory in turn; the first hit wins.
/// Directories that normalize to one already tried are skipped.
pub fn resolve_include(d: &IncludeDirective, inv: &CompilerInvocation<'_>, fs: &FileSystemModel) -> Resolution {
    let mut trace = Vec::new();
    if d.header_name.starts_with('/') {
        let candidate = normalize(&d.header_name, fs.cwd());
        let hit = fs.contains(&candidate);
        trace.push(Probe {
            directory: String::new(),
            candidate: candidate.clone(),
            hit,
        });
        return if hit {
            Resolution::Found { path: candidate, trace }
        } else {
            Resolution::NotFound { trace }
        };
    }
    let including = normalize(&d.including_file, fs.cwd());
    let mut tried = BTreeSet::new();
    for dir in search_paths(inv, d.form, &including) {
        if !tried.insert(normalize(&dir, fs.cwd())) {
            continue;
        }
        let candidate = normalize(&format!("{dir}/{}", d.header_name), fs.cwd());
        let hit = fs.contains(&candidate);
        trace.push(Probe {
            directory: dir,
            candidate: candidate.clone(),
            hit,
        });
        if hit {
            return Resolution::Found { path: candidate, trace };
        }
    }
    Resolution::NotFound { trace }
}
