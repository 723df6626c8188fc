//! Whole-file processing: header framing, module loading, parsing and
//! emission.

use std::sync::LazyLock;

use regex::Regex;
use thiserror::Error;

use crate::ddf::{parse_module_in, resolve_layered, validate, Module, ModuleSource};
use crate::error::{FrameError, LoadError};
use crate::grammar::Diagnostic;
use crate::model::{Ident, Node, Path, Pos, Token};
use crate::tagparser::{parse_tokens, IncompletePolicy, ParseOptions};
use crate::tokenizer::{tokenize, TokenizerConfig};
use crate::xml::{emit, EmitConfig};

static HEADER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"#d2d\s+(\S+)\s+(module|text|xslt)\b").unwrap());

static TEXT_USING: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^text\s+using\s+([A-Za-z][A-Za-z0-9_-]*(?:\.[A-Za-z][A-Za-z0-9_-]*)*)\s*:\s*([A-Za-z][A-Za-z0-9_-]*)")
        .unwrap()
});

/// A local module section: its text and the 1-based line it starts on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub text: String,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sections {
    pub local_modules: Vec<Section>,
    pub module: Path,
    pub root: Ident,
    pub corpus: String,
    /// Position of the first corpus character in the file.
    pub corpus_start: Pos,
}

fn pos_at(text: &str, offset: usize) -> Pos {
    let before = &text[..offset];
    let line = before.matches('\n').count() as u32 + 1;
    let column = before.rsplit('\n').next().unwrap_or("").chars().count() as u32 + 1;
    Pos {
        line,
        column,
        offset: before.chars().count(),
    }
}

/// Splits a file into local module sections, the `text using` header and
/// the text corpus. Text before each header is discarded.
pub fn split_sections(file: &str) -> Result<Sections, FrameError> {
    let mut local_modules = Vec::new();
    let mut module_start: Option<usize> = None;
    let end_module = |start: Option<usize>, end: usize, out: &mut Vec<Section>| {
        if let Some(s) = start {
            let body = &file[s..end];
            let text = match body.rfind('}') {
                Some(i) => &body[..=i],
                None => body,
            };
            out.push(Section {
                text: text.to_string(),
                line: pos_at(file, s).line,
            });
        }
    };
    for caps in HEADER.captures_iter(file) {
        let whole = caps.get(0).unwrap();
        let line = pos_at(file, whole.start()).line;
        let version = &caps[1];
        if version != "2.0" {
            return Err(FrameError::UnsupportedVersion(version.to_string()));
        }
        end_module(module_start.take(), whole.start(), &mut local_modules);
        let kind = caps.get(2).unwrap();
        match kind.as_str() {
            "module" => module_start = Some(kind.start()),
            "xslt" => return Err(FrameError::XsltMode),
            _ => {
                let rest = &file[kind.start()..];
                let Some(t) = TEXT_USING.captures(rest) else {
                    return Err(FrameError::MalformedHeader {
                        line,
                        message: "expected `text using MODULE:TAG`".into(),
                    });
                };
                let end = kind.start() + t.get(0).unwrap().end();
                if let Some(later) = HEADER.captures_iter(&file[end..]).find(|c| &c[2] == "module") {
                    let at = end + later.get(0).unwrap().start();
                    return Err(FrameError::ModuleAfterText(pos_at(file, at).line));
                }
                return Ok(Sections {
                    local_modules,
                    module: Path::must(&t[1]),
                    root: Ident::must(&t[2]),
                    corpus: file[end..].to_string(),
                    corpus_start: pos_at(file, end),
                });
            }
        }
    }
    Err(FrameError::NoTextHeader)
}

#[derive(Debug, Clone, Default)]
pub struct PipelineConfig {
    pub tokenizer: TokenizerConfig,
    pub parse: ParseOptions,
    pub emit: EmitConfig,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("grammar is not LL(1):\n{}", .0.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n"))]
    NotLl1(Vec<Diagnostic>),
    #[error("{0} is not a tags definition of the loaded modules")]
    UnknownRoot(String),
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub tree: Node,
    pub xml: String,
    /// `Missing` and `Skipped` nodes plus forced closes counted as errors.
    pub diagnostics: usize,
    pub warnings: Vec<String>,
    pub trace: Vec<String>,
}

impl RunOutput {
    pub fn exit_code(&self) -> i32 {
        if self.diagnostics == 0 {
            0
        } else {
            1
        }
    }
}

/// Moves corpus-relative token positions to file positions.
fn shift(tokens: &mut [Token], start: Pos) {
    for t in tokens {
        if t.pos.line == 1 {
            t.pos.column += start.column - 1;
        }
        t.pos.line += start.line - 1;
        t.pos.offset += start.offset;
    }
}

/// Processes one input file. `name` is used in error messages.
pub fn run(
    name: &str,
    file: &str,
    cfg: &PipelineConfig,
    source: &dyn ModuleSource,
) -> Result<RunOutput, PipelineError> {
    let sections = split_sections(file)?;
    let locals = sections
        .local_modules
        .iter()
        .map(|s| parse_module_in(&s.text, &format!("{name} (line {})", s.line)))
        .collect::<Result<Vec<Module>, _>>()?;
    let resolved = resolve_layered(&sections.module, &locals, source)?;
    let (grammar, ll1) = validate(&resolved.defs)?;
    if !ll1.is_empty() {
        return Err(PipelineError::NotLl1(ll1));
    }
    let root = Path::single(sections.root.clone());
    let mut tokens = tokenize(&sections.corpus, &cfg.tokenizer);
    shift(&mut tokens, sections.corpus_start);
    let out = parse_tokens(&tokens, &root, &grammar, &cfg.parse)
        .map_err(|_| PipelineError::UnknownRoot(format!("{}:{}", sections.module, sections.root)))?;
    let emit_cfg = EmitConfig {
        command_char: cfg.tokenizer.command_char,
        ..cfg.emit.clone()
    };
    let xml = emit(&out.root, &emit_cfg);
    let mut warnings = resolved.warnings;
    warnings.extend(out.warnings);
    let forced = match cfg.parse.incomplete {
        IncompletePolicy::Error => out.incomplete_errors,
        _ => 0,
    };
    Ok(RunOutput {
        diagnostics: out.root.diagnostic_count() + forced,
        tree: out.root,
        xml,
        warnings,
        trace: out.trace,
    })
}

/// Runs every `(name, text)` input on up to `jobs` threads. Results come
/// back in input order regardless of scheduling.
pub fn run_batch(
    inputs: &[(String, String)],
    cfg: &PipelineConfig,
    source: &(dyn ModuleSource + Sync),
    jobs: usize,
) -> Vec<Result<RunOutput, PipelineError>> {
    let jobs = jobs.clamp(1, inputs.len().max(1));
    if jobs == 1 {
        return inputs.iter().map(|(n, t)| run(n, t, cfg, source)).collect();
    }
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut results: Vec<(usize, Result<RunOutput, PipelineError>)> = std::thread::scope(|s| {
        let workers: Vec<_> = (0..jobs)
            .map(|_| {
                s.spawn(|| {
                    let mut done = Vec::new();
                    loop {
                        let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                        let Some((n, t)) = inputs.get(i) else { break };
                        done.push((i, run(n, t, cfg, source)));
                    }
                    done
                })
            })
            .collect();
        workers.into_iter().flat_map(|w| w.join().expect("worker panicked")).collect()
    });
    results.sort_by_key(|(i, _)| *i);
    results.into_iter().map(|(_, r)| r).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ddf::MemorySource;

    fn lib() -> MemorySource {
        MemorySource::new([("base", "module base { tags doc = p* ; tags p = #chars ; }")])
    }

    #[test]
    fn prefix_is_discarded() {
        let s = split_sections("Hi Bob!\n#d2d 2.0 text using base:doc\n#p x#eof").unwrap();
        assert!(s.local_modules.is_empty());
        assert_eq!(s.module, Path::must("base"));
        assert_eq!(s.root.as_str(), "doc");
        assert_eq!(s.corpus, "\n#p x#eof");
        assert_eq!(s.corpus_start.line, 2);
    }

    #[test]
    fn local_sections_in_order() {
        let f = "#d2d 2.0 module a { tags x = #empty ; } junk\n#d2d\n 2.0\tmodule b { }\n#d2d 2.0 text using m.n : t rest";
        let s = split_sections(f).unwrap();
        assert_eq!(s.local_modules.len(), 2);
        assert_eq!(s.local_modules[0].text, "module a { tags x = #empty ; }");
        assert_eq!(s.local_modules[1].text, "module b { }");
        assert_eq!(s.local_modules[1].line, 3);
        assert_eq!(s.module, Path::must("m.n"));
        assert_eq!(s.corpus, " rest");
    }

    #[test]
    fn header_errors() {
        assert_eq!(split_sections("nothing here"), Err(FrameError::NoTextHeader));
        assert_eq!(split_sections("#d2d 3.1 text using a:b"), Err(FrameError::UnsupportedVersion("3.1".into())));
        assert_eq!(split_sections("#d2d 2.0 xslt text producing a:b"), Err(FrameError::XsltMode));
        assert!(matches!(split_sections("#d2d 2.0 text a:b"), Err(FrameError::MalformedHeader { line: 1, .. })));
        assert_eq!(
            split_sections("#d2d 2.0 text using a:b\nx\n#d2d 2.0 module c { }"),
            Err(FrameError::ModuleAfterText(3))
        );
    }

    #[test]
    fn clean_run() {
        let out = run("t", "#d2d 2.0 text using base:doc\n#p hi#eof", &PipelineConfig::default(), &lib()).unwrap();
        assert_eq!(out.exit_code(), 0);
        assert!(out.xml.ends_with("<doc xmlns:d2d=\"urn:d2d:diagnostics\"><p>hi</p></doc>\n"));
    }

    #[test]
    fn skipped_tag_still_produces_xml() {
        let out = run("t", "#d2d 2.0 text using base:doc\n#q #p hi#eof", &PipelineConfig::default(), &lib()).unwrap();
        assert_eq!(out.exit_code(), 1);
        assert!(out.xml.contains("<d2d:skipped>#q</d2d:skipped>"));
    }

    #[test]
    fn missing_module_is_a_load_error() {
        let err = run("t", "#d2d 2.0 text using nope:doc\n#eof", &PipelineConfig::default(), &lib()).unwrap_err();
        assert!(matches!(err, PipelineError::Load(LoadError::MissingModule(_))));
    }

    #[test]
    fn local_section_overrides_module() {
        let f = "#d2d 2.0 module loc { tags p = b ; tags b = #chars ; }\n#d2d 2.0 text using base:doc #p #b x#eof";
        let out = run("t", f, &PipelineConfig::default(), &lib()).unwrap();
        assert!(out.xml.contains("<p><b>x</b></p>"), "{}", out.xml);
    }

    #[test]
    fn ambiguous_grammar_rejected() {
        let src = MemorySource::new([("g", "module g { tags doc = a? , a ; tags a = #empty ; }")]);
        let err = run("t", "#d2d 2.0 text using g:doc #eof", &PipelineConfig::default(), &src).unwrap_err();
        assert!(matches!(err, PipelineError::NotLl1(_)));
    }

    #[test]
    fn positions_are_file_relative() {
        let cfg = PipelineConfig {
            parse: ParseOptions { trace: true, ..ParseOptions::default() },
            ..PipelineConfig::default()
        };
        let out = run("t", "x\n#d2d 2.0 text using base:doc\n#q#eof", &cfg, &lib()).unwrap();
        let mut pos = None;
        out.tree.walk(&mut |n| {
            if let Node::Skipped(t) = n {
                pos = Some(t.pos);
            }
        });
        let p = pos.unwrap();
        assert_eq!((p.line, p.column), (3, 1));
    }

    #[test]
    fn batch_keeps_input_order() {
        let inputs: Vec<(String, String)> = (0..12)
            .map(|i| (format!("f{i}"), format!("#d2d 2.0 text using base:doc #p n{i}#eof")))
            .collect();
        let cfg = PipelineConfig::default();
        let one: Vec<String> = run_batch(&inputs, &cfg, &lib(), 1).into_iter().map(|r| r.unwrap().xml).collect();
        let four: Vec<String> = run_batch(&inputs, &cfg, &lib(), 4).into_iter().map(|r| r.unwrap().xml).collect();
        assert_eq!(one, four);
        assert!(four[7].contains("n7"));
    }
}
