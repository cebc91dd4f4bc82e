//! Which arms of a file's conditional groups are compiled.
//!
//! Lines are spliced at backslash-newline and comments are blanked before
//! directives are recognized, so `#if` inside a comment is not a directive.
//! Everything that is not a directive is opaque payload. `#define`/`#undef`
//! of object-like macros in live regions update the environment for later
//! conditions.

use serde::Serialize;
use thiserror::Error;

use super::expr::{eval_condition, EvalError};
use super::{MacroEnv, Provenance};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BranchError {
    #[error("line {line}: {message}")]
    Unbalanced { line: usize, message: String },
    #[error("line {line}: {message}")]
    Directive { line: usize, message: String },
    #[error("line {line}: {source}")]
    Condition { line: usize, source: EvalError },
}

#[derive(Serialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ArmKind {
    If,
    Ifdef,
    Ifndef,
    Elif,
    Else,
}

/// One arm of a conditional group.
#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct Arm {
    pub kind: ArmKind,
    /// 1-based line of the directive.
    pub line: usize,
    /// Condition text after the directive name (empty for `#else`).
    pub condition: String,
    /// Value of the condition, when it was evaluated.
    pub value: Option<i128>,
}

/// An `#if ... #endif` group.
#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct ConditionalGroup {
    pub start_line: usize,
    pub end_line: usize,
    /// Nesting depth, 0 for outermost groups.
    pub depth: usize,
    /// False when the whole group sits in a discarded region; its conditions
    /// were then not evaluated.
    pub evaluated: bool,
    pub arms: Vec<Arm>,
    /// Index into `arms` of the arm that is compiled, if any.
    pub taken: Option<usize>,
}

/// Inclusive 1-based range of physical lines.
#[derive(Serialize, Clone, Copy, Debug, PartialEq, Eq)]
pub struct LineRange {
    pub start: usize,
    pub end: usize,
}

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct BranchReport {
    pub groups: Vec<ConditionalGroup>,
    /// Retained lines, as disjoint ranges in increasing order. Conditional
    /// directives themselves are never retained.
    pub regions: Vec<LineRange>,
    /// The retained lines, each followed by a newline.
    pub retained_text: String,
    /// Environment after the file's own `#define`/`#undef` lines.
    #[serde(skip)]
    pub final_env: MacroEnv,
}

impl BranchReport {
    /// Whether physical line `line` (1-based) is retained.
    pub fn retains(&self, line: usize) -> bool {
        self.regions.iter().any(|r| r.start <= line && line <= r.end)
    }
}

struct LogicalLine {
    first: usize,
    last: usize,
    /// Spliced text with comments replaced by spaces.
    code: String,
    starts_in_comment: bool,
}

/// Splices continuation lines and blanks comments. String and character
/// literals end at the end of a logical line at the latest.
fn logical_lines(source: &str) -> Vec<LogicalLine> {
    let physical: Vec<&str> = source.lines().collect();
    let mut out = Vec::new();
    let mut in_block = false;
    let mut i = 0;
    while i < physical.len() {
        let first = i;
        let mut text = String::new();
        loop {
            let line = physical[i];
            let trimmed = line.trim_end();
            if let Some(stripped) = trimmed.strip_suffix('\\') {
                text.push_str(stripped);
                if i + 1 < physical.len() {
                    i += 1;
                    continue;
                }
            } else {
                text.push_str(line);
            }
            break;
        }
        let starts_in_comment = in_block;
        let code = strip_comments(&text, &mut in_block);
        out.push(LogicalLine {
            first: first + 1,
            last: i + 1,
            code,
            starts_in_comment,
        });
        i += 1;
    }
    out
}

fn strip_comments(text: &str, in_block: &mut bool) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut quote: Option<char> = None;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        if *in_block {
            if c == '*' && next == Some('/') {
                *in_block = false;
                out.push(' ');
                i += 2;
            } else {
                i += 1;
            }
            continue;
        }
        if let Some(q) = quote {
            out.push(c);
            if c == '\\' {
                if let Some(n) = next {
                    out.push(n);
                    i += 1;
                }
            } else if c == q {
                quote = None;
            }
            i += 1;
            continue;
        }
        match (c, next) {
            ('/', Some('/')) => break,
            ('/', Some('*')) => {
                *in_block = true;
                i += 2;
            }
            ('"' | '\'', _) => {
                quote = Some(c);
                out.push(c);
                i += 1;
            }
            _ => {
                out.push(c);
                i += 1;
            }
        }
    }
    out
}

/// Directive name and the rest of the line, if `line` is a directive.
fn directive(line: &LogicalLine) -> Option<(&str, &str)> {
    if line.starts_in_comment {
        return None;
    }
    let rest = line.code.trim_start().strip_prefix('#')?.trim_start();
    let end = rest
        .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
        .unwrap_or(rest.len());
    Some((&rest[..end], rest[end..].trim()))
}

fn first_identifier(text: &str) -> Option<&str> {
    let text = text.trim_start();
    let end = text
        .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
        .unwrap_or(text.len());
    let ident = &text[..end];
    match ident.chars().next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => Some(ident),
        _ => None,
    }
}

struct Frame {
    group: usize,
    parent_live: bool,
    any_taken: bool,
    live: bool,
    seen_else: bool,
}

/// Reports which arms of each conditional group in `source` are compiled
/// under `env`, and the text that remains.
pub fn active_branches(env: &MacroEnv, source: &str) -> Result<BranchReport, BranchError> {
    let mut env = env.clone();
    let mut groups: Vec<ConditionalGroup> = Vec::new();
    let mut stack: Vec<Frame> = Vec::new();
    let mut retained_lines: Vec<usize> = Vec::new();

    for line in logical_lines(source) {
        let live = stack.last().is_none_or(|f| f.live);
        let Some((name, rest)) = directive(&line) else {
            if live {
                retained_lines.extend(line.first..=line.last);
            }
            continue;
        };
        let at = line.first;
        let eval = |env: &MacroEnv, text: &str| {
            eval_condition(env, text).map_err(|source| BranchError::Condition { line: at, source })
        };
        match name {
            "if" | "ifdef" | "ifndef" => {
                let kind = match name {
                    "if" => ArmKind::If,
                    "ifdef" => ArmKind::Ifdef,
                    _ => ArmKind::Ifndef,
                };
                let value = if live {
                    Some(match kind {
                        ArmKind::If => eval(&env, rest)?,
                        _ => {
                            let ident = first_identifier(rest).ok_or_else(|| BranchError::Directive {
                                line: at,
                                message: format!("no macro name given in #{name} directive"),
                            })?;
                            let defined = env.is_defined(ident);
                            ((kind == ArmKind::Ifdef) == defined) as i128
                        }
                    })
                } else {
                    None
                };
                let taken = value.is_some_and(|v| v != 0);
                groups.push(ConditionalGroup {
                    start_line: at,
                    end_line: at,
                    depth: stack.len(),
                    evaluated: live,
                    arms: vec![Arm {
                        kind,
                        line: at,
                        condition: rest.to_string(),
                        value,
                    }],
                    taken: taken.then_some(0),
                });
                stack.push(Frame {
                    group: groups.len() - 1,
                    parent_live: live,
                    any_taken: taken,
                    live: taken,
                    seen_else: false,
                });
            }
            "elif" | "else" => {
                let frame = stack.last_mut().ok_or_else(|| BranchError::Unbalanced {
                    line: at,
                    message: format!("#{name} without #if"),
                })?;
                if frame.seen_else {
                    return Err(BranchError::Unbalanced {
                        line: at,
                        message: format!("#{name} after #else"),
                    });
                }
                let (kind, value) = if name == "elif" {
                    let value = if frame.parent_live && !frame.any_taken {
                        Some(eval(&env, rest)?)
                    } else {
                        None
                    };
                    (ArmKind::Elif, value)
                } else {
                    frame.seen_else = true;
                    (ArmKind::Else, None)
                };
                let taken = frame.parent_live
                    && !frame.any_taken
                    && match kind {
                        ArmKind::Else => true,
                        _ => value.is_some_and(|v| v != 0),
                    };
                frame.live = taken;
                frame.any_taken |= taken;
                let group = &mut groups[frame.group];
                group.arms.push(Arm {
                    kind,
                    line: at,
                    condition: if kind == ArmKind::Else { String::new() } else { rest.to_string() },
                    value,
                });
                if taken {
                    group.taken = Some(group.arms.len() - 1);
                }
            }
            "endif" => {
                let frame = stack.pop().ok_or_else(|| BranchError::Unbalanced {
                    line: at,
                    message: "#endif without #if".to_string(),
                })?;
                groups[frame.group].end_line = line.last;
            }
            _ => {
                if live {
                    retained_lines.extend(line.first..=line.last);
                    match name {
                        "define" => define_from_source(&mut env, rest),
                        "undef" => {
                            if let Some(ident) = first_identifier(rest) {
                                env.undefine(ident);
                            }
                        }
                        _ => {}
                    }
                }
            }
        }
    }

    if let Some(frame) = stack.last() {
        return Err(BranchError::Unbalanced {
            line: groups[frame.group].start_line,
            message: "unterminated conditional (missing #endif)".to_string(),
        });
    }

    let physical: Vec<&str> = source.lines().collect();
    let mut regions: Vec<LineRange> = Vec::new();
    let mut retained_text = String::new();
    for &l in &retained_lines {
        retained_text.push_str(physical[l - 1]);
        retained_text.push('\n');
        match regions.last_mut() {
            Some(r) if r.end + 1 == l => r.end = l,
            _ => regions.push(LineRange { start: l, end: l }),
        }
    }

    Ok(BranchReport {
        groups,
        regions,
        retained_text,
        final_env: env,
    })
}

fn define_from_source(env: &mut MacroEnv, rest: &str) {
    let Some(name) = first_identifier(rest) else {
        return;
    };
    let after = &rest.trim_start()[name.len()..];
    if let Some(params) = after.strip_prefix('(') {
        let (list, body) = params.split_once(')').unwrap_or((params, ""));
        let params = list
            .split(',')
            .map(|p| p.trim().to_string())
            .filter(|p| !p.is_empty())
            .collect();
        env.define_function(name, params, body.trim(), Provenance::Source);
    } else {
        env.define(name, after.trim(), Provenance::Source);
    }
}
