//! Tokenizer, content-model analysis, module loader, tag and character
//! parsers and XML emitter for d2d text documents.

pub mod charparser;
pub mod ddf;
pub mod error;
pub mod grammar;
pub mod model;
pub mod pipeline;
pub mod syntax;
pub mod tagparser;
pub mod tokenizer;
pub mod xml;

pub use charparser::{cparse, CharParseError, run_char_parser, CharMatch, CharParserConfig, Hypothesis};
pub use ddf::{parse_module, resolve, resolve_layered, validate, MemorySource, Module, ModuleSource, SearchPath};
pub use error::{FrameError, GrammarError, LoadError, ModelError, SyntaxError};
pub use grammar::{first, pot_eps, validate_ll1, Diagnostic, FirstSet, Grammar, Symbol};
pub use model::{
    render_expr, CloseTarget, DefTable, Definition, Element, Expr, Ident, Kind, Node, Path, PermRecord, Pos, Repr,
    Token, TokenKind,
};
pub use pipeline::{run, run_batch, split_sections, PipelineConfig, PipelineError, RunOutput};
pub use syntax::parse_expr;
pub use tagparser::{parse_tokens, text2tree, IncompletePolicy, ParseOptions, ParseOutput};
pub use tokenizer::{dump_tokens, tokenize, TokenizerConfig};
pub use xml::{emit, EmitConfig};
