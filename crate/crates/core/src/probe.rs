//! The `return_value()` probe: a 647-byte C function whose result encodes
//! eight dialect dimensions, plus the value/option conversions around it.

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dialect::{canonical_flags, decode_value, encode_config, DialectError, Dimension};
use crate::invocation::{parse_invocation, Environment, InvocationError};
use crate::profile::{CompilerProfile, ProfileError};

const PROBE_SOURCE: &str = include_str!("../fixtures/return_value.c");
const PROBE_CHECKSUM_FILE: &str = include_str!("../fixtures/return_value.c.sha256");

/// File name the probe is written under when compiled.
pub const PROBE_FILE_NAME: &str = "return_value.c";

#[derive(Debug, Error)]
pub enum ProbeError {
    #[error(transparent)]
    Dialect(#[from] DialectError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Invocation(#[from] InvocationError),
}

/// The probe source, byte for byte.
pub fn emit_probe_source() -> &'static str {
    PROBE_SOURCE
}

/// SHA-256 of the probe source as recorded next to the fixture.
pub fn recorded_checksum() -> &'static str {
    PROBE_CHECKSUM_FILE
        .split_whitespace()
        .next()
        .expect("checksum file is not empty")
}

/// SHA-256 of [`emit_probe_source`], hex encoded.
pub fn probe_checksum() -> String {
    Sha256::digest(PROBE_SOURCE.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// A `main` that prints the probe's result in decimal; expects the probe in
/// [`PROBE_FILE_NAME`] next to it.
pub fn driver_source() -> String {
    format!(
        "#include <stdio.h>\n#include \"{PROBE_FILE_NAME}\"\n\n\
         int main(void) {{\n    printf(\"%u\\n\", return_value());\n    return 0;\n}}\n"
    )
}

/// One additive term of the probe.
#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct ProbeBitSpec {
    /// Weight of one step along the dimension.
    pub weight: u32,
    /// The probe text that produces the term.
    pub c_construct: &'static str,
    pub dimension: Dimension,
    /// The implementation-defined behavior the construct witnesses.
    pub standard_clause: &'static str,
    /// How the construct arrives at the term.
    pub mechanism: &'static str,
}

/// The eight terms, in encoding order.
pub fn bit_specs() -> [ProbeBitSpec; 8] {
    [
        ProbeBitSpec {
            weight: 1,
            c_construct: "m += (((char)-1) < 0) ? 1 : 0;",
            dimension: Dimension::CharIsSigned,
            standard_clause: "whether plain char has the range of signed char (C99 6.2.5p15)",
            mechanism: "(char)-1 is negative only if plain char is signed",
        },
        ProbeBitSpec {
            weight: 2,
            c_construct: "struct { int f:8; } s = { 255 }; m += (s.f < 0) ? 2 : 0;",
            dimension: Dimension::BitfieldIsSigned,
            standard_clause: "whether a plain int bit-field is signed (C99 6.7.2p5)",
            mechanism: "255 stored in an 8-bit signed bit-field reads back as -1",
        },
        ProbeBitSpec {
            weight: 4,
            c_construct: "m += (sizeof(S) < sizeof(L)) ? 4 : 0;",
            dimension: Dimension::ShortEnums,
            standard_clause: "the integer type compatible with each enumerated type (C99 6.7.2.2p4)",
            mechanism: "S fits in a char, L needs an int; they differ in size only with packed enums",
        },
        ProbeBitSpec {
            weight: 8,
            c_construct: "#ifdef __OPTIMIZE__ m += 8; #endif",
            dimension: Dimension::Optimized,
            standard_clause: "implementation-provided predefined macros (C99 6.10.8p4)",
            mechanism: "GCC defines __OPTIMIZE__ at any optimization level above -O0",
        },
        ProbeBitSpec {
            weight: 16,
            c_construct: "m += (sizeof(void *) == 8) ? 16 : 0;",
            dimension: Dimension::PointerWidth64,
            standard_clause: "size and representation of pointer types (C99 6.2.6.1p2)",
            mechanism: "object pointers are 8 bytes under -m64, 4 under -m32",
        },
        ProbeBitSpec {
            weight: 32,
            c_construct: "#if !defined(__STDC_HOSTED__) || __STDC_HOSTED__ == 0 m += 32; #endif",
            dimension: Dimension::Freestanding,
            standard_clause: "hosted or freestanding environment (C99 4p6, 6.10.8p1)",
            mechanism: "__STDC_HOSTED__ is 0 under -ffreestanding",
        },
        ProbeBitSpec {
            weight: 64,
            c_construct: "#ifdef __STDC_VERSION__ m += (__STDC_VERSION__ % 4)*64; #else m += 192; #endif",
            dimension: Dimension::StdClass,
            standard_clause: "version of the standard in effect (C99 6.10.8p1)",
            mechanism: "201112 % 4 = 0, 199901 % 4 = 1, 201710 % 4 = 2; absent in C90 scores 3",
        },
        ProbeBitSpec {
            weight: 256,
            c_construct: "#ifndef __STRICT_ANSI__ m += 256; m += (sizeof(\"??-\") != 4) ? 256 : 0; #endif",
            dimension: Dimension::AnsiMode,
            standard_clause: "conformance mode and trigraph replacement (C99 5.2.1.1)",
            mechanism: "GNU mode adds 256; with trigraphs \"??-\" becomes \"~\" (sizeof 2, not 4) and adds 256 more",
        },
    ]
}

/// One term of a value's decomposition.
#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct Contribution {
    pub spec: ProbeBitSpec,
    /// Setting of the dimension, as text.
    pub setting: String,
    pub contribution: u32,
}

/// Splits `value` into its eight terms; the contributions sum to `value`.
pub fn explain_value(value: u64) -> Result<Vec<Contribution>, DialectError> {
    let config = decode_value(value)?;
    Ok(bit_specs()
        .into_iter()
        .map(|spec| {
            let dim = spec.dimension;
            Contribution {
                contribution: spec.weight * config.coordinate(dim),
                setting: config.describe(dim),
                spec,
            }
        })
        .collect())
}

/// Options that make the probe return `value`.
pub fn flags_for_value(value: u64, profile: &CompilerProfile) -> Result<Vec<String>, ProbeError> {
    let config = decode_value(value)?;
    Ok(canonical_flags(&config, profile)?)
}

/// Value the probe returns when compiled with `flags` (no compiler name).
pub fn value_for_flags<S: AsRef<str>>(
    flags: &[S],
    profile: &CompilerProfile,
) -> Result<u32, ProbeError> {
    let program = profile.compilers.first().map(String::as_str).unwrap_or("cc");
    let argv: Vec<&str> = std::iter::once(program)
        .chain(flags.iter().map(AsRef::as_ref))
        .collect();
    let inv = parse_invocation(&argv, &Environment::new(), profile)?;
    Ok(encode_config(&inv.dialect))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_is_647_bytes() {
        let src = emit_probe_source();
        assert_eq!(src.len(), 647);
        assert!(src.len() < 700);
        assert!(src.contains("#ifdef __OPTIMIZE__"));
        assert!(src.contains("(__STDC_VERSION__ % 4)*64"));
        assert!(src.starts_with("unsigned return_value(void) {"));
    }

    #[test]
    fn checksum_matches_recorded() {
        assert_eq!(probe_checksum(), recorded_checksum());
    }

    #[test]
    fn every_construct_is_in_the_source() {
        let src = emit_probe_source();
        for needle in [
            "((char)-1) < 0",
            "s.f < 0",
            "sizeof(S) < sizeof(L)",
            "__OPTIMIZE__",
            "sizeof(void *) == 8",
            "__STDC_HOSTED__ == 0",
            "m += 192;",
            "sizeof(\"??-\") != 4",
        ] {
            assert!(src.contains(needle), "{needle}");
        }
    }

    #[test]
    fn explain_examples() {
        let nonzero = |v| -> Vec<u32> {
            explain_value(v)
                .unwrap()
                .into_iter()
                .map(|c| c.contribution)
                .filter(|&c| c != 0)
                .collect()
        };
        assert_eq!(nonzero(1), vec![1]);
        assert!(nonzero(0).is_empty());
        assert_eq!(nonzero(443), vec![1, 2, 8, 16, 32, 128, 256]);
        assert_eq!(explain_value(0).unwrap().len(), 8);
        assert!(explain_value(768).is_err());
    }

    #[test]
    fn contributions_sum_to_value() {
        for v in 0..768u64 {
            let sum: u32 = explain_value(v).unwrap().iter().map(|c| c.contribution).sum();
            assert_eq!(sum as u64, v);
        }
    }

    #[test]
    fn driver_includes_probe() {
        let d = driver_source();
        assert!(d.contains("#include \"return_value.c\""));
        assert!(d.contains("printf(\"%u\\n\", return_value())"));
    }
}
