//! `#if` expression evaluation.
//!
//! Arithmetic is done in 64 bits, signed unless an operand is unsigned, the
//! way GCC does it for `intmax_t`/`uintmax_t`. Signed overflow wraps. Only
//! object-like macros are expanded; a function-like macro invoked in a
//! condition is reported as unsupported. Operands that are not evaluated
//! (the right side of a short-circuited `&&`/`||`, the other arm of `?:`)
//! cannot raise division by zero.

use thiserror::Error;

use super::MacroEnv;

const MAX_EXPANSION_DEPTH: usize = 200;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("syntax error in #if expression at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("division by zero in #if expression")]
    DivisionByZero,
    #[error("function-like macro `{0}` in #if expression is not supported")]
    Unsupported(String),
    #[error("macro expansion of `{0}` is nested too deeply")]
    TooDeep(String),
}

fn syntax(offset: usize, message: impl Into<String>) -> EvalError {
    EvalError::Syntax {
        offset,
        message: message.into(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Num(Val),
    Ident(String),
    Punct(&'static str),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    offset: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Val {
    bits: u64,
    unsigned: bool,
}

impl Val {
    fn signed(v: i64) -> Val {
        Val {
            bits: v as u64,
            unsigned: false,
        }
    }

    fn boolean(b: bool) -> Val {
        Val::signed(b as i64)
    }

    fn is_true(self) -> bool {
        self.bits != 0
    }

    fn to_i128(self) -> i128 {
        if self.unsigned {
            self.bits as i128
        } else {
            self.bits as i64 as i128
        }
    }
}

const PUNCTUATORS: [&str; 24] = [
    "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "(", ")", "!", "~", "-", "+", "*", "/", "%",
    "<", ">", "&", "^", "|", "?", ":",
];

fn parse_number(text: &str, offset: usize) -> Result<Val, EvalError> {
    let lower = text.to_ascii_lowercase();
    let digits_end = lower
        .find(['u', 'l'])
        .unwrap_or(lower.len());
    let (digits, suffix) = lower.split_at(digits_end);
    let unsigned_suffix = match suffix {
        "" | "l" | "ll" => false,
        "u" | "ul" | "lu" | "ull" | "llu" => true,
        _ => return Err(syntax(offset, format!("invalid integer suffix in `{text}`"))),
    };
    let (radix, body) = if let Some(h) = digits.strip_prefix("0x") {
        (16, h)
    } else if let Some(b) = digits.strip_prefix("0b") {
        (2, b)
    } else if digits.len() > 1 && digits.starts_with('0') {
        (8, &digits[1..])
    } else {
        (10, digits)
    };
    if body.is_empty() {
        return Err(syntax(offset, format!("invalid integer constant `{text}`")));
    }
    let value = u64::from_str_radix(body, radix).map_err(|_| {
        syntax(
            offset,
            format!("`{text}` is not an integer constant representable in 64 bits"),
        )
    })?;
    // Too large for intmax_t: the constant is unsigned (GCC warns for decimals).
    let unsigned = unsigned_suffix || value > i64::MAX as u64;
    Ok(Val {
        bits: value,
        unsigned,
    })
}

fn char_value(body: &str, offset: usize, char_unsigned: bool) -> Result<Val, EvalError> {
    let bytes = body.as_bytes();
    let mut i = 0;
    let mut units = Vec::new();
    while i < bytes.len() {
        let b = bytes[i];
        if b != b'\\' {
            units.push(b as u32);
            i += 1;
            continue;
        }
        i += 1;
        let e = *bytes
            .get(i)
            .ok_or_else(|| syntax(offset, "unterminated escape in character constant"))?;
        i += 1;
        let v = match e {
            b'n' => 10,
            b't' => 9,
            b'r' => 13,
            b'a' => 7,
            b'b' => 8,
            b'f' => 12,
            b'v' => 11,
            b'e' => 27,
            b'\\' | b'\'' | b'"' | b'?' => e as u32,
            b'x' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_hexdigit() {
                    i += 1;
                }
                u32::from_str_radix(&body[start..i], 16)
                    .map_err(|_| syntax(offset, "bad hex escape in character constant"))?
            }
            b'0'..=b'7' => {
                let start = i - 1;
                while i < bytes.len() && i - start < 3 && (b'0'..=b'7').contains(&bytes[i]) {
                    i += 1;
                }
                u32::from_str_radix(&body[start..i], 8).expect("octal digits")
            }
            _ => return Err(syntax(offset, "unknown escape in character constant")),
        };
        units.push(v & 0xff);
    }
    match units.as_slice() {
        [] => Err(syntax(offset, "empty character constant")),
        [single] => {
            let v = *single as u8;
            let value = if char_unsigned { v as i64 } else { v as i8 as i64 };
            Ok(Val::signed(value))
        }
        many => {
            // Multi-character constant: GCC packs bytes big-endian into an int.
            let mut acc: u32 = 0;
            for &u in many {
                acc = (acc << 8) | (u & 0xff);
            }
            Ok(Val::signed(acc as i32 as i64))
        }
    }
}

fn tokenize(text: &str, base: usize, char_unsigned: bool) -> Result<Vec<Token>, EvalError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let offset = base + i;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'.') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Num(parse_number(&text[start..i], offset)?),
                offset,
            });
        } else if c == b'\''
            || (matches!(c, b'L' | b'u' | b'U') && bytes.get(i + 1) == Some(&b'\''))
        {
            let open = if c == b'\'' { i } else { i + 1 };
            let mut j = open + 1;
            while j < bytes.len() && bytes[j] != b'\'' {
                if bytes[j] == b'\\' {
                    j += 1;
                }
                j += 1;
            }
            if j >= bytes.len() {
                return Err(syntax(offset, "unterminated character constant"));
            }
            out.push(Token {
                tok: Tok::Num(char_value(&text[open + 1..j], offset, char_unsigned)?),
                offset,
            });
            i = j + 1;
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(text[start..i].to_string()),
                offset,
            });
        } else if c == b'"' {
            return Err(syntax(offset, "string literal in #if expression"));
        } else if c == b',' {
            out.push(Token {
                tok: Tok::Punct(","),
                offset,
            });
            i += 1;
        } else {
            let rest = &text[i..];
            let p = PUNCTUATORS
                .iter()
                .find(|p| rest.starts_with(**p))
                .ok_or_else(|| syntax(offset, format!("unexpected character `{}`", c as char)))?;
            out.push(Token {
                tok: Tok::Punct(p),
                offset,
            });
            i += p.len();
        }
    }
    Ok(out)
}

struct Expander<'a> {
    env: &'a MacroEnv,
    char_unsigned: bool,
}

impl Expander<'_> {
    /// Replaces `defined` operators and object-like macros, leaving any other
    /// identifiers in place.
    fn expand(&self, tokens: &[Token], hidden: &mut Vec<String>, out: &mut Vec<Token>) -> Result<(), EvalError> {
        let mut i = 0;
        while i < tokens.len() {
            let t = &tokens[i];
            let Tok::Ident(name) = &t.tok else {
                out.push(t.clone());
                i += 1;
                continue;
            };
            if name == "defined" {
                let (operand, next) = self.defined_operand(tokens, i)?;
                out.push(Token {
                    tok: Tok::Num(Val::boolean(self.env.is_defined(&operand))),
                    offset: t.offset,
                });
                i = next;
                continue;
            }
            match self.env.get(name) {
                Some(def) if !def.is_function_like() && !hidden.contains(name) => {
                    if hidden.len() >= MAX_EXPANSION_DEPTH {
                        return Err(EvalError::TooDeep(name.clone()));
                    }
                    let body = tokenize(&def.body, t.offset, self.char_unsigned)?;
                    let body: Vec<Token> = body
                        .into_iter()
                        .map(|b| Token {
                            offset: t.offset,
                            ..b
                        })
                        .collect();
                    hidden.push(name.clone());
                    self.expand(&body, hidden, out)?;
                    hidden.pop();
                }
                _ => out.push(t.clone()),
            }
            i += 1;
        }
        Ok(())
    }

    fn defined_operand(&self, tokens: &[Token], at: usize) -> Result<(String, usize), EvalError> {
        let offset = tokens[at].offset;
        let missing = || syntax(offset, "operator `defined` requires an identifier");
        match tokens.get(at + 1).map(|t| &t.tok) {
            Some(Tok::Ident(n)) => Ok((n.clone(), at + 2)),
            Some(Tok::Punct("(")) => match (tokens.get(at + 2).map(|t| &t.tok), tokens.get(at + 3).map(|t| &t.tok)) {
                (Some(Tok::Ident(n)), Some(Tok::Punct(")"))) => Ok((n.clone(), at + 4)),
                (Some(Tok::Ident(_)), _) => Err(syntax(offset, "missing `)` after `defined`")),
                _ => Err(missing()),
            },
            _ => Err(missing()),
        }
    }
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    end_offset: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|t| t.offset)
            .unwrap_or(self.end_offset)
    }

    fn eat(&mut self, p: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Punct(q)) if *q == p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, p: &str) -> Result<(), EvalError> {
        if self.eat(p) {
            Ok(())
        } else {
            Err(syntax(self.offset(), format!("expected `{p}`")))
        }
    }

    fn comma(&mut self, live: bool) -> Result<Val, EvalError> {
        let mut v = self.conditional(live)?;
        while self.eat(",") {
            v = self.conditional(live)?;
        }
        Ok(v)
    }

    fn conditional(&mut self, live: bool) -> Result<Val, EvalError> {
        let cond = self.binary(0, live)?;
        if !self.eat("?") {
            return Ok(cond);
        }
        let taken = cond.is_true();
        let a = self.comma(live && taken)?;
        self.expect(":")?;
        let b = self.conditional(live && !taken)?;
        let unsigned = a.unsigned || b.unsigned;
        let v = if taken { a } else { b };
        Ok(Val {
            bits: v.bits,
            unsigned,
        })
    }

    fn binary(&mut self, level: usize, live: bool) -> Result<Val, EvalError> {
        const LEVELS: [&[&str]; 10] = [
            &["||"],
            &["&&"],
            &["|"],
            &["^"],
            &["&"],
            &["==", "!="],
            &["<", ">", "<=", ">="],
            &["<<", ">>"],
            &["+", "-"],
            &["*", "/", "%"],
        ];
        if level == LEVELS.len() {
            return self.unary(live);
        }
        let mut lhs = self.binary(level + 1, live)?;
        loop {
            let op = match self.peek() {
                Some(Tok::Punct(p)) if LEVELS[level].contains(p) => *p,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = match op {
                "||" => {
                    let rhs = self.binary(level + 1, live && !lhs.is_true())?;
                    Val::boolean(lhs.is_true() || rhs.is_true())
                }
                "&&" => {
                    let rhs = self.binary(level + 1, live && lhs.is_true())?;
                    Val::boolean(lhs.is_true() && rhs.is_true())
                }
                _ => {
                    let rhs = self.binary(level + 1, live)?;
                    apply_binary(op, lhs, rhs, live)?
                }
            };
        }
    }

    fn unary(&mut self, live: bool) -> Result<Val, EvalError> {
        let op = match self.peek() {
            Some(Tok::Punct(p)) if matches!(*p, "!" | "~" | "-" | "+") => *p,
            _ => return self.primary(live),
        };
        self.pos += 1;
        let v = self.unary(live)?;
        Ok(match op {
            "!" => Val::boolean(!v.is_true()),
            "~" => Val {
                bits: !v.bits,
                unsigned: v.unsigned,
            },
            "-" => Val {
                bits: v.bits.wrapping_neg(),
                unsigned: v.unsigned,
            },
            _ => v,
        })
    }

    fn primary(&mut self, live: bool) -> Result<Val, EvalError> {
        let offset = self.offset();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(v)
            }
            Some(Tok::Ident(_)) => {
                // Identifiers that survive expansion are 0.
                self.pos += 1;
                if matches!(self.peek(), Some(Tok::Punct("("))) {
                    return Err(syntax(offset, "missing binary operator before `(`"));
                }
                Ok(Val::signed(0))
            }
            Some(Tok::Punct("(")) => {
                self.pos += 1;
                let v = self.comma(live)?;
                self.expect(")")?;
                Ok(v)
            }
            Some(Tok::Punct(p)) => Err(syntax(offset, format!("unexpected `{p}`"))),
            None => Err(syntax(offset, "expression expected")),
        }
    }
}

fn shift(value: Val, count: Val, left: bool) -> Val {
    let n = count.to_i128();
    let (left, n) = if n < 0 { (!left, -n) } else { (left, n) };
    let bits = if left {
        if n >= 64 {
            0
        } else {
            value.bits << n
        }
    } else if value.unsigned {
        if n >= 64 {
            0
        } else {
            value.bits >> n
        }
    } else {
        let s = value.bits as i64;
        (if n >= 64 { s >> 63 } else { s >> n }) as u64
    };
    Val {
        bits,
        unsigned: value.unsigned,
    }
}

fn apply_binary(op: &str, a: Val, b: Val, live: bool) -> Result<Val, EvalError> {
    let unsigned = a.unsigned || b.unsigned;
    let arith = |bits: u64| Val { bits, unsigned };
    let (sa, sb) = (a.bits as i64, b.bits as i64);
    Ok(match op {
        "*" => arith(a.bits.wrapping_mul(b.bits)),
        "+" => arith(a.bits.wrapping_add(b.bits)),
        "-" => arith(a.bits.wrapping_sub(b.bits)),
        "/" | "%" => {
            if b.bits == 0 {
                if live {
                    return Err(EvalError::DivisionByZero);
                }
                return Ok(arith(0));
            }
            let bits = match (op, unsigned) {
                ("/", true) => a.bits / b.bits,
                ("%", true) => a.bits % b.bits,
                ("/", false) => sa.wrapping_div(sb) as u64,
                _ => sa.wrapping_rem(sb) as u64,
            };
            arith(bits)
        }
        "<<" => shift(a, b, true),
        ">>" => shift(a, b, false),
        "<" | ">" | "<=" | ">=" => {
            let ord = if unsigned { a.bits.cmp(&b.bits) } else { sa.cmp(&sb) };
            Val::boolean(match op {
                "<" => ord.is_lt(),
                ">" => ord.is_gt(),
                "<=" => ord.is_le(),
                _ => ord.is_ge(),
            })
        }
        "==" => Val::boolean(a.bits == b.bits),
        "!=" => Val::boolean(a.bits != b.bits),
        "&" => arith(a.bits & b.bits),
        "^" => arith(a.bits ^ b.bits),
        "|" => arith(a.bits | b.bits),
        _ => unreachable!("operator {op}"),
    })
}

/// Evaluates a preprocessor constant expression under `env`.
///
/// The result is the exact value of the 64-bit signed or unsigned result;
/// a nonzero value means the branch is taken. Character constants use the
/// signedness of plain `char` implied by `env` (`__CHAR_UNSIGNED__`).
pub fn eval_condition(env: &MacroEnv, expr: &str) -> Result<i128, EvalError> {
    let char_unsigned = env.is_defined("__CHAR_UNSIGNED__");
    let raw = tokenize(expr, 0, char_unsigned)?;
    let expander = Expander { env, char_unsigned };
    let mut tokens = Vec::with_capacity(raw.len());
    expander.expand(&raw, &mut Vec::new(), &mut tokens)?;
    for pair in tokens.windows(2) {
        if let (Tok::Ident(name), Tok::Punct("(")) = (&pair[0].tok, &pair[1].tok) {
            if env.get(name).is_some_and(|d| d.is_function_like()) {
                return Err(EvalError::Unsupported(name.clone()));
            }
        }
    }
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        end_offset: expr.len(),
    };
    let v = parser.comma(true)?;
    if parser.pos != tokens.len() {
        return Err(syntax(parser.offset(), "unexpected tokens after expression"));
    }
    Ok(v.to_i128())
}
