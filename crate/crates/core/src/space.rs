//! Size of the dialect space: the `2^n` lower bound over implementation-defined
//! behaviors, and the integer type width models allowed by C99.

use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Widths an integer type may take in the models we enumerate.
pub const CANDIDATE_WIDTHS: [u8; 4] = [8, 16, 32, 64];

/// Minimum widths of `char`, `short`, `int`, `long`, `long long`.
pub const MINIMUM_WIDTHS: [u8; 5] = [8, 16, 16, 32, 64];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TypeModelError {
    #[error("width {0} is not one of 8, 16, 32, 64")]
    BadWidth(u8),
    #[error("{name} is {width} bits but must be at least {min}")]
    TooNarrow { name: &'static str, width: u8, min: u8 },
    #[error("{wider} ({wider_width} bits) is narrower than {narrower} ({narrower_width} bits)")]
    OutOfOrder {
        narrower: &'static str,
        narrower_width: u8,
        wider: &'static str,
        wider_width: u8,
    },
}

/// Widths and `char` signedness of the standard integer types.
#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[serde(try_from = "RawTypeModel")]
pub struct TypeModel {
    width_char: u8,
    width_short: u8,
    width_int: u8,
    width_long: u8,
    width_llong: u8,
    char_is_signed: bool,
}

#[derive(Deserialize)]
struct RawTypeModel {
    width_char: u8,
    width_short: u8,
    width_int: u8,
    width_long: u8,
    width_llong: u8,
    #[serde(default = "default_true")]
    char_is_signed: bool,
}

fn default_true() -> bool {
    true
}

impl TryFrom<RawTypeModel> for TypeModel {
    type Error = TypeModelError;

    fn try_from(r: RawTypeModel) -> Result<Self, Self::Error> {
        TypeModel::from_widths(
            [r.width_char, r.width_short, r.width_int, r.width_long, r.width_llong],
            r.char_is_signed,
        )
    }
}

const TYPE_NAMES: [&str; 5] = ["char", "short", "int", "long", "long long"];

/// Checks the C99 constraints on a `(char, short, int, long, long long)` tuple.
pub fn check_widths(widths: [u8; 5]) -> Result<(), TypeModelError> {
    for (i, &w) in widths.iter().enumerate() {
        if !CANDIDATE_WIDTHS.contains(&w) {
            return Err(TypeModelError::BadWidth(w));
        }
        if w < MINIMUM_WIDTHS[i] {
            return Err(TypeModelError::TooNarrow {
                name: TYPE_NAMES[i],
                width: w,
                min: MINIMUM_WIDTHS[i],
            });
        }
    }
    for i in 1..5 {
        if widths[i] < widths[i - 1] {
            return Err(TypeModelError::OutOfOrder {
                narrower: TYPE_NAMES[i - 1],
                narrower_width: widths[i - 1],
                wider: TYPE_NAMES[i],
                wider_width: widths[i],
            });
        }
    }
    Ok(())
}

impl TypeModel {
    pub fn from_widths(widths: [u8; 5], char_is_signed: bool) -> Result<TypeModel, TypeModelError> {
        check_widths(widths)?;
        let [width_char, width_short, width_int, width_long, width_llong] = widths;
        Ok(TypeModel {
            width_char,
            width_short,
            width_int,
            width_long,
            width_llong,
            char_is_signed,
        })
    }

    /// x86_64 Linux: 8/16/32/64/64, signed `char`.
    pub fn lp64() -> TypeModel {
        TypeModel::from_widths([8, 16, 32, 64, 64], true).unwrap()
    }

    /// i386 and most 32-bit targets.
    pub fn ilp32() -> TypeModel {
        TypeModel::from_widths([8, 16, 32, 32, 64], true).unwrap()
    }

    /// A 16-bit `int` machine such as many 8/16-bit microcontrollers.
    pub fn int16() -> TypeModel {
        TypeModel::from_widths([8, 16, 16, 32, 64], true).unwrap()
    }

    pub fn widths(&self) -> [u8; 5] {
        [
            self.width_char,
            self.width_short,
            self.width_int,
            self.width_long,
            self.width_llong,
        ]
    }

    pub fn width_char(&self) -> u8 {
        self.width_char
    }
    pub fn width_short(&self) -> u8 {
        self.width_short
    }
    pub fn width_int(&self) -> u8 {
        self.width_int
    }
    pub fn width_long(&self) -> u8 {
        self.width_long
    }
    pub fn width_llong(&self) -> u8 {
        self.width_llong
    }
    pub fn char_is_signed(&self) -> bool {
        self.char_is_signed
    }

    pub fn with_char_signedness(mut self, signed: bool) -> TypeModel {
        self.char_is_signed = signed;
        self
    }
}

impl fmt::Display for TypeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [c, s, i, l, ll] = self.widths();
        write!(
            f,
            "char={c}{} short={s} int={i} long={l} llong={ll}",
            if self.char_is_signed { "s" } else { "u" }
        )
    }
}

/// All `(char, short, int, long, long long)` width tuples over {8, 16, 32, 64}
/// that satisfy the minimum widths and the non-decreasing order, sorted
/// lexicographically.
pub fn enumerate_integer_size_models() -> Vec<[u8; 5]> {
    // Build by extension, pruning as soon as the order or a minimum fails.
    fn extend(prefix: &mut Vec<u8>, out: &mut Vec<[u8; 5]>) {
        let pos = prefix.len();
        if pos == 5 {
            out.push([prefix[0], prefix[1], prefix[2], prefix[3], prefix[4]]);
            return;
        }
        let floor = prefix.last().copied().unwrap_or(0).max(MINIMUM_WIDTHS[pos]);
        for w in CANDIDATE_WIDTHS.into_iter().filter(|&w| w >= floor) {
            prefix.push(w);
            extend(prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::with_capacity(5), &mut out);
    out
}

/// A number rendered as `mantissa × 10^exponent`.
#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct Scientific {
    pub mantissa: String,
    pub exponent: u32,
}

impl Scientific {
    /// Rounds `n` to `digits` significant decimal digits (half up).
    pub fn of(n: &BigUint, digits: usize) -> Scientific {
        let digits = digits.max(1);
        let text = n.to_str_radix(10);
        let mut exponent = text.len() as u32 - 1;
        let mut kept: Vec<u8> = text
            .bytes()
            .take(digits)
            .map(|b| b - b'0')
            .collect();
        while kept.len() < digits {
            kept.push(0);
        }
        let round_up = text.as_bytes().get(digits).is_some_and(|&b| b >= b'5');
        if round_up {
            let mut i = kept.len();
            loop {
                if i == 0 {
                    // 9.99.. rounded to 10.0..: shift one decade.
                    kept.insert(0, 1);
                    kept.pop();
                    exponent += 1;
                    break;
                }
                i -= 1;
                if kept[i] == 9 {
                    kept[i] = 0;
                } else {
                    kept[i] += 1;
                    break;
                }
            }
        }
        let mut mantissa = String::new();
        for (i, d) in kept.iter().enumerate() {
            if i == 1 {
                mantissa.push('.');
            }
            mantissa.push((b'0' + d) as char);
        }
        Scientific { mantissa, exponent }
    }

    /// `5.19e33` form.
    pub fn e_notation(&self) -> String {
        format!("{}e{}", self.mantissa, self.exponent)
    }
}

impl fmt::Display for Scientific {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} × 10^{}", self.mantissa, self.exponent)
    }
}

/// Lower bound on the number of dialects when each of `n_behaviors`
/// implementation-defined behaviors has at least two choices.
#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct DialectCount {
    pub behaviors: u32,
    #[serde(serialize_with = "serialize_decimal")]
    pub exact: BigUint,
    pub approx: Scientific,
}

fn serialize_decimal<S: serde::Serializer>(n: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_str_radix(10))
}

pub fn dialect_count_lower_bound(n_behaviors: u32) -> DialectCount {
    let exact = BigUint::from(1u8) << n_behaviors as usize;
    let approx = Scientific::of(&exact, 3);
    DialectCount {
        behaviors: n_behaviors,
        exact,
        approx,
    }
}
