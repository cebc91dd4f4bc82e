//! Compiles and runs the probe for each value with a real compiler.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use dialectoscope::probe::{driver_source, emit_probe_source, flags_for_value, PROBE_FILE_NAME};
use dialectoscope::{decode_value, CompilerProfile};
use serde::Serialize;

/// Added to every compile: the probe's trigraph sequence is deliberate.
pub const WARNING_SUPPRESSION: &str = "-w";

#[derive(Serialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Passed,
    Failed,
    /// Some values could not be run on this host; none failed.
    Partial,
    Skipped,
}

#[derive(Serialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Skip,
}

#[derive(Serialize, Clone, Debug)]
pub struct ValueResult {
    pub value: u32,
    pub outcome: Outcome,
    pub command: Vec<String>,
    /// Printed value, if the program ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Serialize, Clone, Debug)]
pub struct VerifyReport {
    pub status: Status,
    pub compiler: String,
    pub first: u32,
    pub last: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub results: Vec<ValueResult>,
}

impl VerifyReport {
    pub fn count(&self, outcome: Outcome) -> usize {
        self.results.iter().filter(|r| r.outcome == outcome).count()
    }

    pub fn summary(&self) -> String {
        match self.status {
            Status::Passed => format!("tests {}..{} succeeded", self.first, self.last),
            Status::Skipped => format!(
                "SKIPPED: {}",
                self.reason.as_deref().unwrap_or("compiler unavailable")
            ),
            Status::Failed | Status::Partial => {
                let mut s = format!(
                    "tests {}..{}: {} passed, {} failed, {} skipped",
                    self.first,
                    self.last,
                    self.count(Outcome::Pass),
                    self.count(Outcome::Fail),
                    self.count(Outcome::Skip)
                );
                if let Some(r) = &self.reason {
                    s.push_str(&format!(" ({r})"));
                }
                s
            }
        }
    }
}

fn compiler_runs(compiler: &str) -> bool {
    Command::new(compiler)
        .arg("--version")
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

/// Whether `compiler -m32` can build and run a program here.
fn supports_m32(compiler: &str, dir: &Path) -> bool {
    let src = dir.join("m32_check.c");
    let exe = dir.join("m32_check");
    if fs::write(&src, "int main(void) { return 0; }\n").is_err() {
        return false;
    }
    let built = Command::new(compiler)
        .args(["-m32", "-w"])
        .arg(&src)
        .arg("-o")
        .arg(&exe)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false);
    built && Command::new(&exe).status().map(|s| s.success()).unwrap_or(false)
}

fn run_one(compiler: &str, dir: &Path, value: u32, profile: &CompilerProfile) -> ValueResult {
    let flags = match flags_for_value(value as u64, profile) {
        Ok(f) => f,
        Err(e) => {
            return ValueResult {
                value,
                outcome: Outcome::Fail,
                command: Vec::new(),
                output: None,
                detail: Some(e.to_string()),
            }
        }
    };
    let exe: PathBuf = dir.join(format!("probe_{value}"));
    let mut command = vec![compiler.to_string(), WARNING_SUPPRESSION.to_string()];
    command.extend(flags);
    command.push(dir.join("main.c").display().to_string());
    command.push("-o".into());
    command.push(exe.display().to_string());

    let fail = |detail: String, output: Option<String>, command: Vec<String>| ValueResult {
        value,
        outcome: Outcome::Fail,
        command,
        output,
        detail: Some(detail),
    };
    let compiled = match Command::new(compiler).args(&command[1..]).output() {
        Ok(o) => o,
        Err(e) => return fail(format!("cannot start compiler: {e}"), None, command),
    };
    if !compiled.status.success() {
        let diag = String::from_utf8_lossy(&compiled.stderr).trim().to_string();
        return fail(format!("compile failed: {diag}"), None, command);
    }
    let ran = match Command::new(&exe).output() {
        Ok(o) => o,
        Err(e) => return fail(format!("cannot run probe: {e}"), None, command),
    };
    let _ = fs::remove_file(&exe);
    let printed = String::from_utf8_lossy(&ran.stdout).trim().to_string();
    if printed == value.to_string() {
        ValueResult {
            value,
            outcome: Outcome::Pass,
            command,
            output: Some(printed),
            detail: None,
        }
    } else {
        fail(format!("expected {value}, printed {printed:?}"), Some(printed), command)
    }
}

/// Compiles the probe with the options for each value in `first..=last` and
/// checks that it prints that value. Runs up to `jobs` compiles at once; the
/// report is in value order. A missing compiler gives a `SKIPPED` report;
/// without 32-bit support the `-m32` values are skipped one by one.
pub fn verify_with_compiler(
    compiler: &str,
    first: u32,
    last: u32,
    jobs: usize,
    profile: &CompilerProfile,
) -> std::io::Result<VerifyReport> {
    let mut report = VerifyReport {
        status: Status::Skipped,
        compiler: compiler.to_string(),
        first,
        last,
        reason: None,
        results: Vec::new(),
    };
    if !compiler_runs(compiler) {
        report.reason = Some(format!("compiler `{compiler}` not found"));
        return Ok(report);
    }
    let dir = tempfile::tempdir()?;
    fs::write(dir.path().join(PROBE_FILE_NAME), emit_probe_source())?;
    fs::write(dir.path().join("main.c"), driver_source())?;
    let m32 = supports_m32(compiler, dir.path());

    let values: Vec<u32> = (first..=last).collect();
    let slots: Mutex<Vec<Option<ValueResult>>> = Mutex::new(vec![None; values.len()]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..jobs.max(1) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&value) = values.get(i) else { break };
                let needs_m32 = decode_value(value as u64).map(|c| !c.pointer_width_64).unwrap_or(false);
                let result = if needs_m32 && !m32 {
                    ValueResult {
                        value,
                        outcome: Outcome::Skip,
                        command: Vec::new(),
                        output: None,
                        detail: Some("no 32-bit multilib".into()),
                    }
                } else {
                    run_one(compiler, dir.path(), value, profile)
                };
                slots.lock().expect("no panics while holding the lock")[i] = Some(result);
            });
        }
    });
    report.results = slots
        .into_inner()
        .expect("threads finished")
        .into_iter()
        .map(|r| r.expect("every value ran"))
        .collect();

    let failed = report.count(Outcome::Fail);
    let skipped = report.count(Outcome::Skip);
    report.status = if failed > 0 {
        Status::Failed
    } else if skipped == report.results.len() {
        Status::Skipped
    } else if skipped > 0 {
        Status::Partial
    } else {
        Status::Passed
    };
    if skipped > 0 {
        report.reason = Some(format!("{compiler} cannot build -m32 programs on this host"));
    }
    Ok(report)
}
