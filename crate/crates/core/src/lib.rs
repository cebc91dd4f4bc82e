//! A model of C dialects as selected by the build.
//!
//! The same C text means different things under different compilers and
//! options. This crate makes that concrete:
//!
//! - [`dialect`] and [`probe`]: the 768-point dialect space observed by a
//!   647-byte probe function, with the value/option bijection.
//! - [`space`]: how large the space of conforming dialects is.
//! - [`profile`] and [`invocation`]: toolchain descriptions and command-line
//!   parsing into a dialect.
//! - [`macros`]: predefined macros and conditional compilation.
//! - [`include`]: header search order over a virtual filesystem.
//! - [`promotion`]: integer promotions and the 16-bit wrap-check pitfall.
//! - [`audit`]: per-translation-unit dialect audits of a compile database.

pub mod audit;
pub mod dialect;
pub mod include;
pub mod invocation;
pub mod macros;
pub mod probe;
pub mod promotion;
pub mod profile;
pub mod space;

pub use dialect::{
    canonical_flags, decode_value, encode_config, AnsiMode, DialectConfig, DialectError,
    Dimension, StdClass,
};
pub use invocation::{derive_dialect, parse_invocation, CompilerInvocation, Environment};
pub use macros::{active_branches, eval_condition, invocation_macros, predefined_macros, MacroEnv};
pub use profile::CompilerProfile;
pub use space::{dialect_count_lower_bound, enumerate_integer_size_models, TypeModel};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/probe.md")]
    mod probe {}
    #[doc = include_str!("../../../book/src/invocations.md")]
    mod invocations {}
    #[doc = include_str!("../../../book/src/macros.md")]
    mod macros {}
    #[doc = include_str!("../../../book/src/includes.md")]
    mod includes {}
    #[doc = include_str!("../../../book/src/promotion.md")]
    mod promotion {}
    #[doc = include_str!("../../../book/src/build-audit.md")]
    mod build_audit {}
    #[doc = include_str!("../../../book/src/space.md")]
    mod space {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
