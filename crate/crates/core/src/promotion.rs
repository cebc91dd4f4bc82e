//! Integer promotions, usual arithmetic conversions and the wrap-check idiom.
//!
//! Types are measured by value width under a [`TypeModel`]; representations
//! are two's complement without padding. Ranks: char 2, short 4, int 6,
//! long 8, long long 10. An exact-width type is identified with the first
//! standard type of the same width, as `<stdint.h>` typedefs usually are.
//! When no standard type has that width it is an extended type ranked just
//! below the next wider standard type.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::space::TypeModel;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PromotionError {
    #[error("unknown integer type `{0}`")]
    UnknownType(String),
    #[error("exact-width types must be 8, 16, 32 or 64 bits wide, not {0}")]
    BadFixedWidth(u8),
    #[error("the wrap check needs an unsigned operand type, `{0}` is not")]
    SignedOperand(CType),
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[serde(try_from = "String", into = "String")]
pub enum CType {
    Char,
    SChar,
    UChar,
    Short,
    UShort,
    Int,
    UInt,
    Long,
    ULong,
    LLong,
    ULLong,
    /// `intN_t` / `uintN_t`.
    Fixed { width: u8, signed: bool },
}

const STANDARD: [(CType, CType); 5] = [
    (CType::SChar, CType::UChar),
    (CType::Short, CType::UShort),
    (CType::Int, CType::UInt),
    (CType::Long, CType::ULong),
    (CType::LLong, CType::ULLong),
];

impl CType {
    pub fn fixed(width: u8, signed: bool) -> Result<CType, PromotionError> {
        if [8, 16, 32, 64].contains(&width) {
            Ok(CType::Fixed { width, signed })
        } else {
            Err(PromotionError::BadFixedWidth(width))
        }
    }

    /// Index into the standard ladder char/short/int/long/long long.
    fn level(self) -> Option<usize> {
        use CType::*;
        match self {
            Char | SChar | UChar => Some(0),
            Short | UShort => Some(1),
            Int | UInt => Some(2),
            Long | ULong => Some(3),
            LLong | ULLong => Some(4),
            Fixed { .. } => None,
        }
    }

    pub fn width(self, m: &TypeModel) -> u8 {
        match self {
            CType::Fixed { width, .. } => width,
            t => m.widths()[t.level().expect("standard type")],
        }
    }

    pub fn is_signed(self, m: &TypeModel) -> bool {
        use CType::*;
        match self {
            Char => m.char_is_signed(),
            SChar | Short | Int | Long | LLong => true,
            UChar | UShort | UInt | ULong | ULLong => false,
            Fixed { signed, .. } => signed,
        }
    }

    /// The same type with exact-width types replaced by their standard
    /// counterpart where one exists, and plain char by its signed or unsigned
    /// twin.
    pub fn canonical(self, m: &TypeModel) -> CType {
        match self {
            CType::Char => {
                if m.char_is_signed() {
                    CType::SChar
                } else {
                    CType::UChar
                }
            }
            CType::Fixed { width, signed } => m
                .widths()
                .iter()
                .position(|&w| w == width)
                .map(|i| if signed { STANDARD[i].0 } else { STANDARD[i].1 })
                .unwrap_or(self),
            t => t,
        }
    }

    pub fn rank(self, m: &TypeModel) -> u8 {
        match self.canonical(m) {
            CType::Fixed { width, .. } => {
                let widths = m.widths();
                match widths.iter().position(|&w| w > width) {
                    Some(i) => 2 * (i as u8 + 1) - 1,
                    None => 11,
                }
            }
            t => 2 * (t.level().expect("standard type") as u8 + 1),
        }
    }

    /// Largest value of the type, as a 128-bit integer.
    pub fn max_value(self, m: &TypeModel) -> u128 {
        let w = self.width(m) as u32;
        let bits = if self.is_signed(m) { w - 1 } else { w };
        (1u128 << bits) - 1
    }

    fn to_unsigned(self) -> CType {
        use CType::*;
        match self {
            SChar | Char => UChar,
            Short => UShort,
            Int => UInt,
            Long => ULong,
            LLong => ULLong,
            Fixed { width, .. } => Fixed { width, signed: false },
            t => t,
        }
    }
}

impl fmt::Display for CType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use CType::*;
        let s = match self {
            Char => "char",
            SChar => "signed char",
            UChar => "unsigned char",
            Short => "short",
            UShort => "unsigned short",
            Int => "int",
            UInt => "unsigned int",
            Long => "long",
            ULong => "unsigned long",
            LLong => "long long",
            ULLong => "unsigned long long",
            Fixed { width, signed } => {
                return write!(f, "{}int{width}_t", if *signed { "" } else { "u" });
            }
        };
        f.write_str(s)
    }
}

impl FromStr for CType {
    type Err = PromotionError;

    fn from_str(s: &str) -> Result<CType, PromotionError> {
        use CType::*;
        let words: Vec<&str> = s.split_whitespace().collect();
        let norm = words.join(" ");
        let t = match norm.as_str() {
            "char" => Char,
            "signed char" => SChar,
            "unsigned char" => UChar,
            "short" | "short int" | "signed short" | "signed short int" => Short,
            "unsigned short" | "unsigned short int" => UShort,
            "int" | "signed" | "signed int" => Int,
            "unsigned" | "unsigned int" => UInt,
            "long" | "long int" | "signed long" | "signed long int" => Long,
            "unsigned long" | "unsigned long int" => ULong,
            "long long" | "long long int" | "signed long long" | "signed long long int" => LLong,
            "unsigned long long" | "unsigned long long int" => ULLong,
            other => {
                let (signed, rest) = match other.strip_prefix('u') {
                    Some(r) => (false, r),
                    None => (true, other),
                };
                let width = rest
                    .strip_prefix("int")
                    .and_then(|r| r.strip_suffix("_t"))
                    .and_then(|w| w.parse::<u8>().ok())
                    .ok_or_else(|| PromotionError::UnknownType(s.to_string()))?;
                return CType::fixed(width, signed);
            }
        };
        Ok(t)
    }
}

impl TryFrom<String> for CType {
    type Error = PromotionError;
    fn try_from(s: String) -> Result<CType, PromotionError> {
        s.parse()
    }
}

impl From<CType> for String {
    fn from(t: CType) -> String {
        t.to_string()
    }
}

/// Integer promotion: types ranked below int become int if int holds all
/// their values, unsigned int otherwise. The result is canonical.
pub fn integer_promote(t: CType, m: &TypeModel) -> CType {
    let t = t.canonical(m);
    if t.rank(m) >= CType::Int.rank(m) {
        return t;
    }
    if t.max_value(m) <= CType::Int.max_value(m) {
        CType::Int
    } else {
        CType::UInt
    }
}

/// Common type of a binary arithmetic operation on `a` and `b`.
pub fn arithmetic_conversion(a: CType, b: CType, m: &TypeModel) -> CType {
    let a = integer_promote(a, m);
    let b = integer_promote(b, m);
    if a == b {
        return a;
    }
    let (sa, sb) = (a.is_signed(m), b.is_signed(m));
    if sa == sb {
        return if a.rank(m) >= b.rank(m) { a } else { b };
    }
    let (u, s) = if sa { (b, a) } else { (a, b) };
    if u.rank(m) >= s.rank(m) {
        u
    } else if s.max_value(m) >= u.max_value(m) {
        s
    } else {
        s.to_unsigned().canonical(m)
    }
}

/// `(x + y) < x`, or `(T)(x + y) < x` when a cast type is given, with `x`
/// and `y` both of the operand type.
#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(try_from = "RawWrapCheck")]
pub struct WrapCheckExpr {
    operand_type: CType,
    #[serde(skip_serializing_if = "Option::is_none")]
    cast_before_compare: Option<CType>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWrapCheck {
    operand_type: CType,
    #[serde(default)]
    cast_before_compare: Option<CType>,
}

impl TryFrom<RawWrapCheck> for WrapCheckExpr {
    type Error = PromotionError;
    fn try_from(r: RawWrapCheck) -> Result<WrapCheckExpr, PromotionError> {
        WrapCheckExpr::new(r.operand_type, r.cast_before_compare)
    }
}

impl WrapCheckExpr {
    /// Plain `char` is refused as an operand type: whether it is unsigned
    /// depends on the model.
    pub fn new(operand_type: CType, cast_before_compare: Option<CType>) -> Result<WrapCheckExpr, PromotionError> {
        use CType::*;
        match operand_type {
            UChar | UShort | UInt | ULong | ULLong | Fixed { signed: false, .. } => Ok(WrapCheckExpr {
                operand_type,
                cast_before_compare,
            }),
            t => Err(PromotionError::SignedOperand(t)),
        }
    }

    pub fn operand_type(&self) -> CType {
        self.operand_type
    }

    pub fn cast_before_compare(&self) -> Option<CType> {
        self.cast_before_compare
    }
}

impl fmt::Display for WrapCheckExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.cast_before_compare {
            Some(t) => write!(f, "({t})(x + y) < x"),
            None => write!(f, "(x + y) < x"),
        }?;
        write!(f, "  [x, y: {}]", self.operand_type)
    }
}

/// What has happened to the mathematical sum `x + y` by the time it is
/// compared.
#[derive(Serialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SumState {
    /// The sum is intact.
    Exact,
    /// The sum was reduced modulo `2^width`.
    Modular { width: u8 },
    /// The sum was pushed into a signed type too narrow to hold it.
    SignedWrap { width: u8 },
}

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Reliable,
    Unreliable { reason: String },
}

impl Verdict {
    pub fn is_reliable(&self) -> bool {
        matches!(self, Verdict::Reliable)
    }
}

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct WrapAnalysis {
    #[serde(flatten)]
    pub verdict: Verdict,
    pub operand_width: u8,
    /// Type in which `x + y` is computed.
    pub sum_type: CType,
    pub sum_width: u8,
    /// State of the sum at the comparison.
    pub compared: SumState,
}

fn after_cast(state: SumState, sum_bits: u8, to: CType, m: &TypeModel) -> SumState {
    let t = to.width(m);
    let signed = to.is_signed(m);
    // Bits needed for the value as it stands (the sum of two w-bit values
    // needs w + 1).
    let needed = match state {
        SumState::Exact => sum_bits,
        SumState::Modular { width } => width,
        SumState::SignedWrap { .. } => return SumState::SignedWrap { width: t },
    };
    let room = if signed { t - 1 } else { t };
    if room >= needed {
        state
    } else if signed {
        SumState::SignedWrap { width: t }
    } else {
        SumState::Modular { width: t }
    }
}

/// Decides whether the wrap check detects unsigned overflow of the operand
/// type under `m`: it does exactly when the compared value is the sum reduced
/// modulo `2^w`, `w` being the operand width.
pub fn analyze_wrap_check(e: &WrapCheckExpr, m: &TypeModel) -> WrapAnalysis {
    let w = e.operand_type.width(m);
    let sum_type = arithmetic_conversion(e.operand_type, e.operand_type, m);
    let sum_width = sum_type.width(m);
    let sum_signed = sum_type.is_signed(m);
    let room = if sum_signed { sum_width - 1 } else { sum_width };
    let mut state = if room > w {
        SumState::Exact
    } else if sum_signed {
        SumState::SignedWrap { width: sum_width }
    } else {
        SumState::Modular { width: sum_width }
    };
    if let Some(to) = e.cast_before_compare {
        state = after_cast(state, w + 1, to, m);
    }
    let verdict = match state {
        SumState::Modular { width } if width == w => Verdict::Reliable,
        SumState::Exact => Verdict::Unreliable {
            reason: format!(
                "x + y is computed in {sum_type} ({sum_width} bits) and never wraps at {w} bits, so the comparison is always false"
            ),
        },
        SumState::Modular { width } => Verdict::Unreliable {
            reason: format!("the sum is reduced modulo 2^{width}, not 2^{w}"),
        },
        SumState::SignedWrap { width } => Verdict::Unreliable {
            reason: format!("the sum overflows a {width}-bit signed type"),
        },
    };
    WrapAnalysis {
        verdict,
        operand_width: w,
        sum_type,
        sum_width,
        compared: state,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::enumerate_integer_size_models;

    fn u16t() -> CType {
        CType::fixed(16, false).unwrap()
    }

    fn models() -> Vec<TypeModel> {
        enumerate_integer_size_models()
            .into_iter()
            .flat_map(|w| [true, false].map(|s| TypeModel::from_widths(w, s).unwrap()))
            .collect()
    }

    #[test]
    fn promotion_examples() {
        assert_eq!(integer_promote(u16t(), &TypeModel::lp64()), CType::Int);
        assert_eq!(integer_promote(u16t(), &TypeModel::int16()), CType::UInt);
        for m in models() {
            assert_eq!(integer_promote(CType::Int, &m), CType::Int);
        }
    }

    #[test]
    fn char_follows_model() {
        let m = TypeModel::lp64();
        assert_eq!(integer_promote(CType::Char, &m), CType::Int);
        assert_eq!(CType::Char.canonical(&m), CType::SChar);
        assert_eq!(CType::Char.canonical(&m.with_char_signedness(false)), CType::UChar);
    }

    #[test]
    fn conversion_examples() {
        let lp64 = TypeModel::lp64();
        assert_eq!(arithmetic_conversion(u16t(), u16t(), &lp64), CType::Int);
        assert_eq!(arithmetic_conversion(CType::UInt, CType::Int, &lp64), CType::UInt);
        let ilp32 = TypeModel::ilp32();
        assert_eq!(ilp32.width_long(), 32);
        assert_eq!(arithmetic_conversion(CType::ULong, CType::LLong, &ilp32), CType::LLong);
        // Same widths: the signed type cannot hold the unsigned range.
        assert_eq!(arithmetic_conversion(CType::ULong, CType::LLong, &lp64), CType::ULLong);
        assert_eq!(arithmetic_conversion(CType::UInt, CType::Long, &lp64), CType::Long);
        assert_eq!(
            arithmetic_conversion(CType::fixed(64, false).unwrap(), CType::Int, &lp64),
            CType::ULong
        );
    }

    #[test]
    fn extended_types_rank_between() {
        // char 8, short 32, int 32: no standard 16-bit type.
        let m = TypeModel::from_widths([8, 32, 32, 32, 64], true).unwrap();
        let e = CType::fixed(16, true).unwrap();
        assert_eq!(e.canonical(&m), e);
        assert_eq!(e.rank(&m), 3);
        assert!(CType::SChar.rank(&m) < e.rank(&m) && e.rank(&m) < CType::Short.rank(&m));
        assert_eq!(integer_promote(e, &m), CType::Int);
    }

    #[test]
    fn names_round_trip() {
        for name in ["char", "unsigned long long", "uint16_t", "int64_t", "signed char", "unsigned"] {
            let t: CType = name.parse().unwrap();
            assert_eq!(t.to_string().parse::<CType>().unwrap(), t);
        }
        assert_eq!("uint12_t".parse::<CType>(), Err(PromotionError::BadFixedWidth(12)));
        assert!("float".parse::<CType>().is_err());
    }

    #[test]
    fn wrap_check_examples() {
        let plain = WrapCheckExpr::new(u16t(), None).unwrap();
        let cast = WrapCheckExpr::new(u16t(), Some(u16t())).unwrap();
        let a = analyze_wrap_check(&plain, &TypeModel::lp64());
        assert!(!a.verdict.is_reliable());
        assert_eq!((a.sum_type, a.sum_width, a.compared), (CType::Int, 32, SumState::Exact));
        assert!(analyze_wrap_check(&plain, &TypeModel::int16()).verdict.is_reliable());
        for m in models() {
            assert!(analyze_wrap_check(&cast, &m).verdict.is_reliable(), "{m}");
        }
    }

    #[test]
    fn other_casts() {
        let m = TypeModel::lp64();
        let narrow = WrapCheckExpr::new(u16t(), Some(CType::UChar)).unwrap();
        assert_eq!(analyze_wrap_check(&narrow, &m).compared, SumState::Modular { width: 8 });
        let signed16 = WrapCheckExpr::new(u16t(), Some(CType::fixed(16, true).unwrap())).unwrap();
        assert!(!analyze_wrap_check(&signed16, &m).verdict.is_reliable());
        let wide = WrapCheckExpr::new(u16t(), Some(CType::ULong)).unwrap();
        assert_eq!(analyze_wrap_check(&wide, &m).compared, SumState::Exact);
        let ui = WrapCheckExpr::new(CType::UInt, None).unwrap();
        assert!(analyze_wrap_check(&ui, &m).verdict.is_reliable());
    }

    #[test]
    fn signed_operands_rejected() {
        assert!(WrapCheckExpr::new(CType::Int, None).is_err());
        assert!(WrapCheckExpr::new(CType::Char, None).is_err());
        let parsed: WrapCheckExpr =
            toml::from_str("operand_type = \"uint16_t\"\ncast_before_compare = \"uint16_t\"\n").unwrap();
        assert_eq!(parsed.cast_before_compare(), Some(u16t()));
        assert!(toml::from_str::<WrapCheckExpr>("operand_type = \"int16_t\"\n").is_err());
    }
}
