//! Acceptance checks, one line per criterion.
//!
//! Expected values are computed here from first principles (weights of the
//! probe terms, a schoolbook power of two, a brute-force width filter, a
//! modular simulation of the wrap check) rather than taken from the library.

use std::collections::BTreeSet;
use std::time::Instant;

use dialectoscope::audit::{audit, check_against, load_build, SeverityPolicy};
use dialectoscope::macros::{active_branches, eval_condition, predefined_macros, MacroEnv, Provenance};
use dialectoscope::probe::{emit_probe_source, probe_checksum, recorded_checksum};
use dialectoscope::promotion::{analyze_wrap_check, CType, WrapCheckExpr};
use dialectoscope::{
    decode_value, encode_config, enumerate_integer_size_models, AnsiMode, CompilerProfile, DialectConfig, Dimension,
    StdClass, TypeModel,
};
use dialectoscope_cli::verify::{verify_with_compiler, Status};

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/fixtures");

enum Verdict {
    Pass(String),
    Fail(String),
    Skipped(String),
}

fn check(ok: bool, detail: impl Into<String>) -> Verdict {
    if ok {
        Verdict::Pass(detail.into())
    } else {
        Verdict::Fail(detail.into())
    }
}

fn cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("dialectoscope").chain(args.iter().copied());
    let code = dialectoscope_cli::run(argv, &mut out, &mut err);
    let mut text = String::from_utf8(out).unwrap();
    text.push_str(&String::from_utf8(err).unwrap());
    (code, text)
}

/// The probe's value for a configuration: 1, 2, 4, 8, 16, 32 for the binary
/// terms, 64 per standard class and 256 per GNU step.
fn oracle_value(c: &DialectConfig) -> u32 {
    c.char_is_signed as u32
        + 2 * c.bitfield_is_signed as u32
        + 4 * c.short_enums as u32
        + 8 * c.optimized as u32
        + 16 * c.pointer_width_64 as u32
        + 32 * c.freestanding as u32
        + 64 * c.std_class.get() as u32
        + 256
            * match c.ansi_mode {
                AnsiMode::Strict => 0,
                AnsiMode::Gnu => 1,
                AnsiMode::GnuTrigraphs => 2,
            }
}

fn all_configs() -> Vec<DialectConfig> {
    let b = [false, true];
    let mut out = Vec::new();
    for mode in [AnsiMode::Strict, AnsiMode::Gnu, AnsiMode::GnuTrigraphs] {
        for class in 0..4 {
            for fs in b {
                for p64 in b {
                    for opt in b {
                        for se in b {
                            for bf in b {
                                for ch in b {
                                    out.push(DialectConfig {
                                        char_is_signed: ch,
                                        bitfield_is_signed: bf,
                                        short_enums: se,
                                        optimized: opt,
                                        pointer_width_64: p64,
                                        freestanding: fs,
                                        std_class: StdClass::new(class).unwrap(),
                                        ansi_mode: mode,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    for v in 0..768u64 {
        let c = match decode_value(v) {
            Ok(c) => c,
            Err(e) => return Verdict::Fail(format!("decode({v}): {e}")),
        };
        if encode_config(&c) as u64 != v || oracle_value(&c) as u64 != v {
            return Verdict::Fail(format!("value {v} does not round-trip"));
        }
    }
    let configs = all_configs();
    let distinct: BTreeSet<u32> = configs.iter().map(encode_config).collect();
    if configs.len() != 768 || distinct.len() != 768 {
        return Verdict::Fail(format!("{} configs, {} distinct values", configs.len(), distinct.len()));
    }
    for c in &configs {
        let v = encode_config(c);
        if v != oracle_value(c) || decode_value(v as u64).ok() != Some(*c) {
            return Verdict::Fail(format!("config {c:?} does not round-trip"));
        }
    }
    for v in 0..768 {
        let (code, flags) = cli(&["probe", "flags", &v.to_string()]);
        if code != 0 {
            return Verdict::Fail(format!("probe flags {v}: {flags}"));
        }
        let (code, value) = cli(&["probe", "value", "--flags", flags.trim()]);
        if code != 0 || value.trim() != v.to_string() {
            return Verdict::Fail(format!("probe value --flags \"{}\" gave {}", flags.trim(), value.trim()));
        }
    }
    let elapsed = start.elapsed();
    check(
        elapsed.as_secs_f64() < 1.0,
        format!("768 values, 768 configs, 768 CLI flag round-trips in {:.3} s", elapsed.as_secs_f64()),
    )
}

const PUBLISHED: [(u32, &str); 7] = [
    (0, "-funsigned-char -funsigned-bitfields -m32 -fhosted -std=c11;"),
    (1, "-fsigned-char -funsigned-bitfields -m32 -fhosted -std=c11;"),
    (7, "-fsigned-char -fsigned-bitfields -fshort-enums -m32 -fhosted -std=c11;"),
    (42, "-funsigned-char -fsigned-bitfields -O2 -m32 -ffreestanding -std=c11;"),
    (100, "-funsigned-char -funsigned-bitfields -fshort-enums -m32 -ffreestanding -std=c99"),
    (443, "-fsigned-char -fsigned-bitfields -O2 -m64 -ffreestanding -std=gnu17;"),
    (640, "-funsigned-char -funsigned-bitfields -m32 -fhosted -std=gnu17 -trigraphs."),
];

fn criterion_2() -> Verdict {
    for (value, listed) in PUBLISHED {
        let flags = listed.trim_end_matches([';', '.']);
        let (_, printed) = cli(&["probe", "flags", &value.to_string()]);
        if printed.trim() != flags {
            return Verdict::Fail(format!("probe flags {value}: `{}` != `{flags}`", printed.trim()));
        }
        let (_, parsed) = cli(&["probe", "value", "--flags", flags]);
        if parsed.trim() != value.to_string() {
            return Verdict::Fail(format!("`{flags}` parsed to {}", parsed.trim()));
        }
    }
    Verdict::Pass(format!("{} published pairs match token for token", PUBLISHED.len()))
}

fn criterion_3() -> Verdict {
    let src = emit_probe_source();
    let (_, emitted) = cli(&["probe", "emit"]);
    check(
        src.len() == 647 && src.len() < 700 && probe_checksum() == recorded_checksum() && emitted == src,
        format!("{} bytes, sha256 {}", src.len(), &probe_checksum()[..16]),
    )
}

/// Extra amount the probe's preprocessor parts add under `env`.
fn preprocessor_terms(env: &MacroEnv) -> Result<(u32, u32, u32), String> {
    let report = active_branches(env, emit_probe_source()).map_err(|e| e.to_string())?;
    let kept = &report.retained_text;
    let optimize = if kept.contains("m += 8;") { 8 } else { 0 };
    let hosted = if kept.contains("m += 32;") { 32 } else { 0 };
    let std = if kept.contains("m += 192;") {
        192
    } else if kept.contains("(__STDC_VERSION__ % 4)*64") {
        let class = eval_condition(env, "__STDC_VERSION__ % 4").map_err(|e| e.to_string())?;
        (class * 64) as u32
    } else {
        return Err("no standard term retained".into());
    };
    Ok((optimize, hosted, std))
}

fn criterion_4() -> Verdict {
    let profile = CompilerProfile::gcc();
    for c in all_configs() {
        let env = predefined_macros(&c, &profile);
        let got = match preprocessor_terms(&env) {
            Ok(t) => t,
            Err(e) => return Verdict::Fail(format!("{c:?}: {e}")),
        };
        let want = (8 * c.optimized as u32, 32 * c.freestanding as u32, 64 * c.std_class.get() as u32);
        if got != want {
            return Verdict::Fail(format!("value {}: terms {got:?}, expected {want:?}", oracle_value(&c)));
        }
    }
    Verdict::Pass("768 configurations reproduce the +8, +32 and class terms".into())
}

/// `2^n` in decimal by repeated doubling.
fn power_of_two_decimal(n: u32) -> String {
    let mut digits = vec![1u8];
    for _ in 0..n {
        let mut carry = 0;
        for d in digits.iter_mut() {
            let x = *d * 2 + carry;
            *d = x % 10;
            carry = x / 10;
        }
        if carry > 0 {
            digits.push(carry);
        }
    }
    digits.iter().rev().map(|d| char::from(b'0' + d)).collect()
}

fn brute_force_models() -> BTreeSet<[u8; 5]> {
    let widths = [8u8, 16, 32, 64];
    let minimum = [8u8, 16, 16, 32, 64];
    let mut out = BTreeSet::new();
    for i in 0..1024usize {
        let t = [
            widths[i & 3],
            widths[(i >> 2) & 3],
            widths[(i >> 4) & 3],
            widths[(i >> 6) & 3],
            widths[(i >> 8) & 3],
        ];
        if (0..5).all(|k| t[k] >= minimum[k]) && (0..4).all(|k| t[k] <= t[k + 1]) {
            out.insert(t);
        }
    }
    out
}

fn criterion_5() -> Verdict {
    let (code, text) = cli(&["space", "count", "--behaviors", "112"]);
    let exact = power_of_two_decimal(112);
    if code != 0 || !text.contains(&exact) {
        return Verdict::Fail(format!("2^112 = {exact} not in output:\n{text}"));
    }
    if !text.contains("≈5.19 × 10^33") || !text.contains("≈5.19e33") {
        return Verdict::Fail(format!("approximation missing:\n{text}"));
    }
    let (_, json) = cli(&["--format", "json", "space", "count", "--behaviors", "112"]);
    let parsed: serde_json::Value = match serde_json::from_str(&json) {
        Ok(v) => v,
        Err(e) => return Verdict::Fail(format!("json: {e}")),
    };
    if parsed["exact"] != serde_json::Value::String(exact.clone()) {
        return Verdict::Fail("json exact value differs".into());
    }
    let oracle = brute_force_models();
    let models = enumerate_integer_size_models();
    let listed: BTreeSet<[u8; 5]> = models.iter().copied().collect();
    let valid = models
        .iter()
        .all(|m| m.windows(2).all(|w| w[0] <= w[1]) && m[0] >= 8 && m[1] >= 16 && m[2] >= 16 && m[3] >= 32 && m[4] >= 64);
    check(
        listed == oracle && models.len() == oracle.len() && valid,
        format!("2^112 exact, ≈5.19 × 10^33; {} width models (filter oracle: {})", models.len(), oracle.len()),
    )
}

/// Boundary `(x, y)` pairs for 16-bit operands.
fn boundary_pairs() -> Vec<(u64, u64)> {
    let edges = [0u64, 1, 2, 0x7fff, 0x8000, 0x8001, 0xfffe, 0xffff];
    let mut pairs = Vec::new();
    for &x in &edges {
        for &y in &edges {
            pairs.push((x, y));
        }
    }
    for k in 0..=16u64 {
        let x = (1u64 << k).min(0xffff);
        pairs.push((x, 0x10000 - x));
        pairs.push((x, 0xffff - x));
    }
    pairs
}

fn wrap_to(v: i128, width: u32, signed: bool) -> i128 {
    let m = v.rem_euclid(1i128 << width);
    if signed && m >= 1i128 << (width - 1) {
        m - (1i128 << width)
    } else {
        m
    }
}

/// Simulates `(x + y) < x` (optionally with a `uint16_t` cast) for 16-bit
/// unsigned operands: below int width they become int, otherwise the sum is
/// taken in 16-bit unsigned arithmetic.
fn simulated_reliable(int_width: u8, cast16: bool) -> bool {
    boundary_pairs().into_iter().all(|(x, y)| {
        let (x, y) = (x as i128, y as i128);
        let mut sum = if int_width > 16 {
            wrap_to(x + y, int_width as u32, true)
        } else {
            wrap_to(x + y, 16, false)
        };
        if cast16 {
            sum = wrap_to(sum, 16, false);
        }
        let predicate = sum < x;
        let truth = x + y > 0xffff;
        predicate == truth
    })
}

fn criterion_6() -> Verdict {
    let u16t = CType::fixed(16, false).unwrap();
    let plain = WrapCheckExpr::new(u16t, None).unwrap();
    let cast = WrapCheckExpr::new(u16t, Some(u16t)).unwrap();
    let mut checked = 0;
    for widths in enumerate_integer_size_models() {
        for signed_char in [true, false] {
            let m = TypeModel::from_widths(widths, signed_char).unwrap();
            let int16 = m.width_int() == 16;
            let p = analyze_wrap_check(&plain, &m).verdict.is_reliable();
            let c = analyze_wrap_check(&cast, &m).verdict.is_reliable();
            if p != int16 || !c {
                return Verdict::Fail(format!("{m}: uncast reliable={p}, cast reliable={c}"));
            }
            if p != simulated_reliable(m.width_int(), false) || c != simulated_reliable(m.width_int(), true) {
                return Verdict::Fail(format!("{m}: verdict disagrees with the modular simulation"));
            }
            checked += 1;
        }
    }
    check(
        checked > 0,
        format!("{checked} models; uncast UNRELIABLE iff int > 16 bits, cast always RELIABLE, simulation agrees"),
    )
}

fn criterion_7() -> Verdict {
    let src = std::fs::read_to_string(format!("{FIXTURES}/dispatch_table.c")).unwrap();
    for (gnuc, optimize) in [(true, true), (true, false), (false, true), (false, false)] {
        let mut env = MacroEnv::new();
        if gnuc {
            env.define("__GNUC__", "8", Provenance::Predefined);
        }
        if optimize {
            env.define("__OPTIMIZE__", "1", Provenance::Predefined);
        }
        let kept = match active_branches(&env, &src) {
            Ok(r) => r.retained_text,
            Err(e) => return Verdict::Fail(e.to_string()),
        };
        let goto_arm = kept.contains("goto *targets");
        let switch_arm = kept.contains("switch (*pc++)");
        if goto_arm != (gnuc && optimize) || switch_arm == goto_arm {
            return Verdict::Fail(format!("__GNUC__={gnuc} __OPTIMIZE__={optimize}: goto={goto_arm} switch={switch_arm}"));
        }
    }
    let file = format!("{FIXTURES}/dispatch_table.c");
    let (_, o2) = cli(&["macros", "branches", "--flags", "-O2", &file]);
    let (_, o0) = cli(&["macros", "branches", "--flags", "-O0", &file]);
    check(
        o2.contains(" *    9 #if") && o0.contains(" *   23 #else"),
        "goto arm iff __GNUC__ and __OPTIMIZE__, switch arm otherwise (also via gcc -O2/-O0)",
    )
}

/// Number of encoding digits (mixed radix 2,2,2,2,2,2,4,3) on which two
/// values differ.
fn digit_distance(a: u32, b: u32) -> usize {
    let radices = [2u32, 2, 2, 2, 2, 2, 4, 3];
    let (mut a, mut b) = (a, b);
    let mut n = 0;
    for r in radices {
        if a % r != b % r {
            n += 1;
        }
        a /= r;
        b /= r;
    }
    n
}

fn criterion_8() -> Verdict {
    let profile = CompilerProfile::gcc();
    let policy = SeverityPolicy::default();
    let mixed = std::fs::read_to_string(format!("{FIXTURES}/builds/mixed_char.json")).unwrap();
    let capture = load_build(&mixed, &profile).unwrap();
    let report = audit(&capture, &policy);
    let [inc] = report.inconsistencies.as_slice() else {
        return Verdict::Fail(format!("{} inconsistencies in the mixed build", report.inconsistencies.len()));
    };
    let partition: Vec<Vec<&str>> = inc
        .partition
        .iter()
        .map(|g| g.files.iter().map(String::as_str).collect())
        .collect();
    let expected = vec![vec!["/work/app/src/codec.c"], vec!["/work/app/src/main.c", "/work/app/src/util.c"]];
    if inc.dimension != Dimension::CharIsSigned || partition != expected {
        return Verdict::Fail(format!("{}: {partition:?}", inc.dimension));
    }
    let consistent = std::fs::read_to_string(format!("{FIXTURES}/builds/consistent.json")).unwrap();
    let capture = load_build(&consistent, &profile).unwrap();
    if !audit(&capture, &policy).inconsistencies.is_empty() {
        return Verdict::Fail("consistent build reports inconsistencies".into());
    }
    let tu_values: Vec<u32> = audit(&capture, &policy).per_tu.iter().map(|t| t.value).collect();
    for reference in 0..768u32 {
        let r = check_against(&capture, &decode_value(reference as u64).unwrap(), &policy);
        let expected: usize = tu_values.iter().map(|&v| digit_distance(v, reference)).sum();
        if r.mismatches.len() != expected {
            return Verdict::Fail(format!("reference {reference}: {} rows, expected {expected}", r.mismatches.len()));
        }
    }
    Verdict::Pass("one char_is_signed inconsistency {codec} vs {main, util}; consistent build clean; mismatch rows = distance for 768 references".into())
}

fn criterion_9() -> Verdict {
    let profile = CompilerProfile::gcc();
    let jobs = std::thread::available_parallelism().map_or(4, |n| n.get()).min(8);
    let report = match verify_with_compiler("gcc", 0, 767, jobs, &profile) {
        Ok(r) => r,
        Err(e) => return Verdict::Fail(format!("harness error: {e}")),
    };
    match report.status {
        Status::Passed => Verdict::Pass(report.summary()),
        Status::Failed => Verdict::Fail(report.summary()),
        Status::Skipped | Status::Partial => Verdict::Skipped(report.summary()),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("1 bijection", criterion_1),
        ("2 published pairs", criterion_2),
        ("3 probe fixture", criterion_3),
        ("4 macro consistency", criterion_4),
        ("5 counting", criterion_5),
        ("6 promotion pitfall", criterion_6),
        ("7 branch report", criterion_7),
        ("8 build audit", criterion_8),
        ("9 live verification", criterion_9),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let line = match f() {
            Verdict::Pass(d) => format!("PASS     {name}: {d}"),
            Verdict::Skipped(d) => format!("SKIPPED  {name}: {d}"),
            Verdict::Fail(d) => {
                failed += 1;
                format!("FAIL     {name}: {d}")
            }
        };
        println!("{line}");
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
