//! An interpreter and type-and-effect checker for a core language of
//! bidirectional algebraic effect handlers.
//!
//! The language models handlers as self-referential fixpoint objects whose
//! operations may themselves raise effects back toward the invocation site.
//! Handler validity is bounded by generative lifetime labels introduced by
//! region terms; raised operations tunnel through delimiters of other labels,
//! so handlers with identical signatures never intercept effects they were
//! not lexically given.
//!
//! Crate layout:
//! - [`syntax`]: the core AST, substitution, alpha-equivalence, printing
//! - [`statics`]: well-formedness, subtyping, term and context typing
//! - [`dynamics`]: the small-step machine with tunneling delimiter search
//! - [`core_parse`]: parser for `.olaf` core programs
//! - [`surface`]: the `.bdl` surface language and its desugaring
//! - [`harness`]: example corpus, safety battery, callback translation, bench

pub mod core_parse;
pub mod dynamics;
pub mod harness;
pub mod statics;
pub mod surface;
pub mod syntax;
