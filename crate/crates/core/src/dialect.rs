//! The 768-point dialect space observed by the `return_value()` probe.
//!
//! Each field of [`DialectConfig`] corresponds to one additive term of the
//! probe's accumulator. The weights are powers of two, except for the two
//! multi-valued dimensions: the `__STDC_VERSION__ % 4` residue class (weight
//! 64 per step, 192 when the macro is absent) and the ANSI/GNU/trigraph mode
//! (weight 256 per step).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::profile::{CompilerProfile, ProfileError};

/// Number of distinct dialect points the probe can tell apart.
pub const DIALECT_COUNT: u32 = 768;

/// Largest value the probe can return.
pub const MAX_VALUE: u32 = DIALECT_COUNT - 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DialectError {
    #[error("dialect value {0} is out of range (expected 0..=767)")]
    OutOfRange(u64),
    #[error("standard class {0} is out of range (expected 0..=3)")]
    BadStdClass(u8),
    #[error("unknown ANSI mode `{0}` (expected STRICT, GNU or GNU_TRIGRAPHS)")]
    BadAnsiMode(String),
}

/// Strict ISO mode, GNU mode, or GNU mode with trigraph replacement turned on.
///
/// Strict mode always replaces trigraphs, but that is not observable by the
/// probe (the `"??-"` test sits under `#ifndef __STRICT_ANSI__`), so there is
/// no fourth state.
#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AnsiMode {
    Strict,
    Gnu,
    GnuTrigraphs,
}

impl AnsiMode {
    pub const ALL: [AnsiMode; 3] = [AnsiMode::Strict, AnsiMode::Gnu, AnsiMode::GnuTrigraphs];

    pub fn index(self) -> u32 {
        match self {
            AnsiMode::Strict => 0,
            AnsiMode::Gnu => 1,
            AnsiMode::GnuTrigraphs => 2,
        }
    }

    pub fn from_index(index: u32) -> Option<AnsiMode> {
        Self::ALL.get(index as usize).copied()
    }

    pub fn is_strict(self) -> bool {
        self == AnsiMode::Strict
    }

    /// Whether `??-` and friends are replaced during translation.
    pub fn processes_trigraphs(self) -> bool {
        self != AnsiMode::Gnu
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AnsiMode::Strict => "STRICT",
            AnsiMode::Gnu => "GNU",
            AnsiMode::GnuTrigraphs => "GNU_TRIGRAPHS",
        }
    }
}

impl fmt::Display for AnsiMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AnsiMode {
    type Err = DialectError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "STRICT" => Ok(AnsiMode::Strict),
            "GNU" => Ok(AnsiMode::Gnu),
            "GNU_TRIGRAPHS" => Ok(AnsiMode::GnuTrigraphs),
            _ => Err(DialectError::BadAnsiMode(s.to_string())),
        }
    }
}

/// Residue class of `__STDC_VERSION__` modulo 4; class 3 stands for "macro not
/// defined" (C90), which the probe scores as 192.
#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[serde(try_from = "u8", into = "u8")]
pub struct StdClass(u8);

impl StdClass {
    /// `__STDC_VERSION__` is not defined.
    pub const UNDEFINED: StdClass = StdClass(3);

    pub fn new(class: u8) -> Result<StdClass, DialectError> {
        if class <= 3 {
            Ok(StdClass(class))
        } else {
            Err(DialectError::BadStdClass(class))
        }
    }

    /// Class of a concrete `__STDC_VERSION__` value, or [`StdClass::UNDEFINED`]
    /// when the macro is absent.
    pub fn from_stdc_version(version: Option<u64>) -> StdClass {
        match version {
            Some(v) => StdClass((v % 4) as u8),
            None => StdClass::UNDEFINED,
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for StdClass {
    type Error = DialectError;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        StdClass::new(value)
    }
}

impl From<StdClass> for u8 {
    fn from(class: StdClass) -> u8 {
        class.0
    }
}

impl fmt::Display for StdClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One point of the observable dialect space.
#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DialectConfig {
    pub char_is_signed: bool,
    pub bitfield_is_signed: bool,
    pub short_enums: bool,
    pub optimized: bool,
    pub pointer_width_64: bool,
    pub freestanding: bool,
    pub std_class: StdClass,
    pub ansi_mode: AnsiMode,
}

/// The eight dimensions of [`DialectConfig`], in encoding order.
#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    CharIsSigned,
    BitfieldIsSigned,
    ShortEnums,
    Optimized,
    PointerWidth64,
    Freestanding,
    StdClass,
    AnsiMode,
}

impl Dimension {
    pub const ALL: [Dimension; 8] = [
        Dimension::CharIsSigned,
        Dimension::BitfieldIsSigned,
        Dimension::ShortEnums,
        Dimension::Optimized,
        Dimension::PointerWidth64,
        Dimension::Freestanding,
        Dimension::StdClass,
        Dimension::AnsiMode,
    ];

    /// Field name as it appears in [`DialectConfig`].
    pub fn name(self) -> &'static str {
        match self {
            Dimension::CharIsSigned => "char_is_signed",
            Dimension::BitfieldIsSigned => "bitfield_is_signed",
            Dimension::ShortEnums => "short_enums",
            Dimension::Optimized => "optimized",
            Dimension::PointerWidth64 => "pointer_width_64",
            Dimension::Freestanding => "freestanding",
            Dimension::StdClass => "std_class",
            Dimension::AnsiMode => "ansi_mode",
        }
    }

    /// Weight of one step along this dimension.
    pub fn weight(self) -> u32 {
        match self {
            Dimension::CharIsSigned => 1,
            Dimension::BitfieldIsSigned => 2,
            Dimension::ShortEnums => 4,
            Dimension::Optimized => 8,
            Dimension::PointerWidth64 => 16,
            Dimension::Freestanding => 32,
            Dimension::StdClass => 64,
            Dimension::AnsiMode => 256,
        }
    }

    /// Number of values this dimension takes.
    pub fn arity(self) -> u32 {
        match self {
            Dimension::StdClass => 4,
            Dimension::AnsiMode => 3,
            _ => 2,
        }
    }

    /// Dimensions that change object layout when they differ between
    /// translation units.
    pub fn affects_layout(self) -> bool {
        matches!(
            self,
            Dimension::CharIsSigned
                | Dimension::BitfieldIsSigned
                | Dimension::ShortEnums
                | Dimension::PointerWidth64
        )
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dimension {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Dimension::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| format!("unknown dialect dimension `{s}`"))
    }
}

impl DialectConfig {
    /// Index of this configuration along `dim` (0 for false/unsigned/32-bit/hosted).
    pub fn coordinate(&self, dim: Dimension) -> u32 {
        match dim {
            Dimension::CharIsSigned => self.char_is_signed as u32,
            Dimension::BitfieldIsSigned => self.bitfield_is_signed as u32,
            Dimension::ShortEnums => self.short_enums as u32,
            Dimension::Optimized => self.optimized as u32,
            Dimension::PointerWidth64 => self.pointer_width_64 as u32,
            Dimension::Freestanding => self.freestanding as u32,
            Dimension::StdClass => self.std_class.get() as u32,
            Dimension::AnsiMode => self.ansi_mode.index(),
        }
    }

    /// Human-readable value of one dimension, used in audit partitions.
    pub fn describe(&self, dim: Dimension) -> String {
        let s = match dim {
            Dimension::CharIsSigned | Dimension::BitfieldIsSigned => {
                if self.coordinate(dim) == 1 {
                    "signed"
                } else {
                    "unsigned"
                }
            }
            Dimension::ShortEnums | Dimension::Optimized => {
                if self.coordinate(dim) == 1 {
                    "yes"
                } else {
                    "no"
                }
            }
            Dimension::PointerWidth64 => {
                if self.pointer_width_64 {
                    "64-bit"
                } else {
                    "32-bit"
                }
            }
            Dimension::Freestanding => {
                if self.freestanding {
                    "freestanding"
                } else {
                    "hosted"
                }
            }
            Dimension::StdClass => {
                return match self.std_class.get() {
                    3 => "3 (no __STDC_VERSION__)".to_string(),
                    c => c.to_string(),
                }
            }
            Dimension::AnsiMode => self.ansi_mode.as_str(),
        };
        s.to_string()
    }

    /// Dimensions on which `self` and `other` differ, in encoding order.
    pub fn differing_dimensions(&self, other: &DialectConfig) -> Vec<Dimension> {
        Dimension::ALL
            .into_iter()
            .filter(|&d| self.coordinate(d) != other.coordinate(d))
            .collect()
    }

    /// Number of differing fields.
    pub fn distance(&self, other: &DialectConfig) -> usize {
        self.differing_dimensions(other).len()
    }

    pub fn encode(&self) -> u32 {
        encode_config(self)
    }

    /// Every configuration, in increasing encoded order.
    pub fn all() -> impl Iterator<Item = DialectConfig> {
        (0..DIALECT_COUNT).map(|v| decode_value(v as u64).expect("in range"))
    }
}

/// Value `return_value()` produces under `config`.
pub fn encode_config(config: &DialectConfig) -> u32 {
    Dimension::ALL
        .into_iter()
        .map(|d| d.weight() * config.coordinate(d))
        .sum()
}

/// Inverse of [`encode_config`].
pub fn decode_value(value: u64) -> Result<DialectConfig, DialectError> {
    if value > MAX_VALUE as u64 {
        return Err(DialectError::OutOfRange(value));
    }
    let v = value as u32;
    let bit = |w: u32| v & w != 0;
    Ok(DialectConfig {
        char_is_signed: bit(1),
        bitfield_is_signed: bit(2),
        short_enums: bit(4),
        optimized: bit(8),
        pointer_width_64: bit(16),
        freestanding: bit(32),
        std_class: StdClass((v / 64 % 4) as u8),
        ansi_mode: AnsiMode::from_index(v / 256).expect("value <= 767"),
    })
}

/// Options selecting `config`, in the fixed order: char, bit-field, enum
/// packing, optimization, pointer width, environment, standard, trigraphs.
/// Spellings and the standard names come from `profile`; a dimension whose
/// spelling the profile leaves empty is omitted.
pub fn canonical_flags(
    config: &DialectConfig,
    profile: &CompilerProfile,
) -> Result<Vec<String>, ProfileError> {
    let c = &profile.canonical;
    let pick = |on: bool, yes: &str, no: &str| if on { yes.to_string() } else { no.to_string() };
    let mut flags = vec![
        pick(config.char_is_signed, &c.signed_char, &c.unsigned_char),
        pick(
            config.bitfield_is_signed,
            &c.signed_bitfields,
            &c.unsigned_bitfields,
        ),
    ];
    if config.short_enums {
        flags.push(c.short_enums.clone());
    }
    if config.optimized {
        flags.push(c.optimize.clone());
    }
    flags.push(pick(config.pointer_width_64, &c.pointer_64, &c.pointer_32));
    flags.push(pick(config.freestanding, &c.freestanding, &c.hosted));
    let std = profile.std_name_for(config.std_class, config.ansi_mode.is_strict())?;
    flags.push(format!("-std={std}"));
    if config.ansi_mode == AnsiMode::GnuTrigraphs {
        flags.push(c.trigraphs.clone());
    }
    flags.retain(|f| !f.is_empty());
    Ok(flags)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn baseline() -> DialectConfig {
        DialectConfig {
            char_is_signed: false,
            bitfield_is_signed: false,
            short_enums: false,
            optimized: false,
            pointer_width_64: false,
            freestanding: false,
            std_class: StdClass::new(0).unwrap(),
            ansi_mode: AnsiMode::Strict,
        }
    }

    #[test]
    fn encodes_published_points() {
        assert_eq!(encode_config(&baseline()), 0);
        let one = DialectConfig {
            char_is_signed: true,
            ..baseline()
        };
        assert_eq!(encode_config(&one), 1);
        let c443 = DialectConfig {
            char_is_signed: true,
            bitfield_is_signed: true,
            optimized: true,
            pointer_width_64: true,
            freestanding: true,
            std_class: StdClass::new(2).unwrap(),
            ansi_mode: AnsiMode::Gnu,
            ..baseline()
        };
        assert_eq!(encode_config(&c443), 443);
        let max = DialectConfig {
            char_is_signed: true,
            bitfield_is_signed: true,
            short_enums: true,
            optimized: true,
            pointer_width_64: true,
            freestanding: true,
            std_class: StdClass::UNDEFINED,
            ansi_mode: AnsiMode::GnuTrigraphs,
        };
        assert_eq!(encode_config(&max), 767);
    }

    #[test]
    fn decodes_100() {
        let c = decode_value(100).unwrap();
        assert_eq!(
            c,
            DialectConfig {
                short_enums: true,
                freestanding: true,
                std_class: StdClass::new(1).unwrap(),
                ..baseline()
            }
        );
        assert_eq!(decode_value(0).unwrap(), baseline());
    }

    #[test]
    fn rejects_out_of_range() {
        assert_eq!(decode_value(768), Err(DialectError::OutOfRange(768)));
        assert!(StdClass::new(4).is_err());
    }

    #[test]
    fn bijection_over_whole_space() {
        let mut seen = std::collections::HashSet::new();
        for v in 0..DIALECT_COUNT as u64 {
            let c = decode_value(v).unwrap();
            assert_eq!(encode_config(&c) as u64, v);
            assert!(seen.insert(c));
        }
        assert_eq!(seen.len(), 768);
    }

    #[test]
    fn weight_isolation() {
        for c in DialectConfig::all() {
            let v = encode_config(&c);
            let mut flipped = c;
            flipped.short_enums = !c.short_enums;
            let delta = encode_config(&flipped) as i64 - v as i64;
            assert_eq!(delta.abs(), 4);
            if c.std_class.get() < 3 {
                let mut next = c;
                next.std_class = StdClass::new(c.std_class.get() + 1).unwrap();
                assert_eq!(encode_config(&next), v + 64);
            }
        }
    }

    #[test]
    fn distance_counts_fields() {
        let a = decode_value(0).unwrap();
        let b = decode_value(1 + 64 + 256).unwrap();
        assert_eq!(
            a.differing_dimensions(&b),
            vec![Dimension::CharIsSigned, Dimension::StdClass, Dimension::AnsiMode]
        );
        assert_eq!(a.distance(&a), 0);
    }
}
