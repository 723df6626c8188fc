use std::path::PathBuf;

use thiserror::Error;

use crate::model::Pos;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid identifier {0:?}")]
    InvalidIdent(String),
    #[error("empty reference path")]
    EmptyPath,
}

/// Syntax error in a content-model expression or a ddf module.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct SyntaxError {
    pub line: u32,
    pub column: u32,
    pub message: String,
}

/// Problems found while analysing content models against a definition table.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("unresolved reference {path}")]
    Unresolved { path: String },
    #[error("insertion cycle: {}", cycle.join(" -> "))]
    InsertCycle { cycle: Vec<String> },
    #[error("{def}: {message}")]
    Invalid { def: String, message: String },
}

/// Failure to load, resolve or validate definition modules.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{file}:{source}")]
    Syntax {
        file: String,
        #[source]
        source: SyntaxError,
    },
    #[error("module {module}: duplicate name {name} (first at {first}, again at {second})")]
    Duplicate {
        module: String,
        name: String,
        first: Pos,
        second: Pos,
    },
    #[error("module {0} not found on the module path")]
    MissingModule(String),
    #[error("cyclic module import: {}", .0.join(" -> "))]
    ImportCycle(Vec<String>),
    #[error("module {module}, definition {def}: reference {path} does not resolve")]
    UnresolvedRef {
        module: String,
        def: String,
        path: String,
    },
    #[error("module {module}: substitution target {target} not found")]
    SubstTargetNotFound { module: String, target: String },
    #[error("module {module}: import replacement names unknown import key {key}")]
    UnknownImportKey { module: String, key: String },
    #[error("module {module}: definition {name} not found")]
    MissingDefinition { module: String, name: String },
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Errors of the file-section framing step.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("no `#d2d 2.0 text using MODULE:TAG` header found")]
    NoTextHeader,
    #[error("malformed header at line {line}: {message}")]
    MalformedHeader { line: u32, message: String },
    #[error("unsupported d2d version {0} (only 2.0 is accepted)")]
    UnsupportedVersion(String),
    #[error("unsupported: XSLT mode")]
    XsltMode,
    #[error("module section after the text header at line {0}")]
    ModuleAfterText(u32),
}
