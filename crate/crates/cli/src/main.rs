use std::io::Write;
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use d2d_core::ddf::{resolve, validate, SearchPath};
use d2d_core::model::Path;
use d2d_core::pipeline::{run_batch, split_sections, PipelineConfig, RunOutput};
use d2d_core::tagparser::IncompletePolicy;
use d2d_core::tokenizer::{dump_tokens, tokenize, TokenizerConfig};
use d2d_core::xml::EmitConfig;

/// Converts d2d text documents to XML.
#[derive(Parser)]
#[command(name = "d2d", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse documents and write XML.
    Parse(ParseArgs),
    /// Load a module with its imports and report grammar problems.
    Check {
        /// Dotted module name, e.g. `lib.inline`.
        module: String,
        #[command(flatten)]
        modules: ModuleArgs,
    },
    /// Print the token stream of a document.
    Tokens {
        file: PathBuf,
        #[command(flatten)]
        chars: CharArgs,
    },
}

#[derive(Args)]
struct ModuleArgs {
    /// Directory searched for `.ddf` modules; may be repeated.
    #[arg(long = "module-path", value_name = "DIR")]
    module_path: Vec<PathBuf>,
}

impl ModuleArgs {
    fn search_path(&self) -> SearchPath {
        if !self.module_path.is_empty() {
            return SearchPath::new(self.module_path.clone());
        }
        match std::env::var_os("D2D_MODULE_PATH") {
            Some(list) => SearchPath::new(std::env::split_paths(&list)),
            None => SearchPath::new([PathBuf::from(".")]),
        }
    }
}

#[derive(Args)]
struct CharArgs {
    #[arg(long, value_name = "C", default_value_t = '#')]
    command_char: char,
    #[arg(long, value_name = "C", default_value_t = '/')]
    comment_char: char,
}

impl CharArgs {
    fn tokenizer(&self) -> anyhow::Result<TokenizerConfig> {
        if self.command_char == self.comment_char {
            bail!("command and comment characters must differ");
        }
        if self.command_char.is_whitespace() || self.comment_char.is_whitespace() {
            bail!("command and comment characters must not be whitespace");
        }
        Ok(TokenizerConfig {
            command_char: self.command_char,
            comment_char: self.comment_char,
            ..TokenizerConfig::default()
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Incomplete {
    Mark,
    Warn,
    Error,
}

#[derive(Args)]
struct ParseArgs {
    /// Input documents.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Output file; a directory when several inputs are given.
    #[arg(short, long, value_name = "OUT")]
    output: Option<PathBuf>,
    #[command(flatten)]
    modules: ModuleArgs,
    #[command(flatten)]
    chars: CharArgs,
    /// Keep comments as XML comments.
    #[arg(long)]
    keep_comments: bool,
    /// Indent element-only content.
    #[arg(long)]
    indent: bool,
    /// Print tag parser steps to stderr.
    #[arg(long)]
    trace: bool,
    /// Print character parser steps to stderr.
    #[arg(long)]
    trace_chars: bool,
    /// Handling of elements closed with a forced closing tag.
    #[arg(long, value_enum, default_value = "mark")]
    incomplete: Incomplete,
    /// Number of documents processed in parallel.
    #[arg(short, long, default_value_t = 1)]
    jobs: usize,
}

impl ParseArgs {
    fn config(&self) -> anyhow::Result<PipelineConfig> {
        let mut cfg = PipelineConfig {
            tokenizer: self.chars.tokenizer()?,
            emit: EmitConfig {
                indent: self.indent.then_some(2),
                ..EmitConfig::default()
            },
            ..PipelineConfig::default()
        };
        cfg.parse.keep_comments = self.keep_comments;
        cfg.parse.trace = self.trace || self.trace_chars;
        cfg.parse.chars.trace = self.trace_chars;
        cfg.parse.incomplete = match self.incomplete {
            Incomplete::Mark => IncompletePolicy::Mark,
            Incomplete::Warn => IncompletePolicy::Warn,
            Incomplete::Error => IncompletePolicy::Error,
        };
        Ok(cfg)
    }

    fn destination(&self, input: &FsPath) -> Option<PathBuf> {
        let out = self.output.as_ref()?;
        if self.files.len() == 1 {
            return Some(out.clone());
        }
        Some(out.join(input.with_extension("xml").file_name().unwrap_or_default()))
    }
}

fn read(path: &FsPath) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn report(name: &str, out: &RunOutput, args: &ParseArgs) {
    let stderr = &mut std::io::stderr().lock();
    if args.trace || args.trace_chars {
        for line in &out.trace {
            let _ = writeln!(stderr, "{line}");
        }
    }
    for w in &out.warnings {
        let _ = writeln!(stderr, "{name}: warning: {w}");
    }
    if out.diagnostics > 0 {
        let _ = writeln!(stderr, "{name}: {} diagnostic(s) in the output", out.diagnostics);
    }
}

fn parse(args: &ParseArgs) -> anyhow::Result<u8> {
    let cfg = args.config()?;
    if args.files.len() > 1 {
        if let Some(dir) = &args.output {
            std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        }
    }
    let mut inputs = Vec::new();
    let mut status = 0;
    let mut readable = Vec::new();
    for f in &args.files {
        match read(f) {
            Ok(text) => {
                inputs.push((f.display().to_string(), text));
                readable.push(f);
            }
            Err(e) => {
                eprintln!("d2d: {e:#}");
                status = 2;
            }
        }
    }
    let source = args.modules.search_path();
    let results = run_batch(&inputs, &cfg, &source, args.jobs.max(1));
    let stdout = &mut std::io::stdout().lock();
    for ((name, _), (file, result)) in inputs.iter().zip(readable.into_iter().zip(results)) {
        match result {
            Ok(out) => {
                report(name, &out, args);
                match args.destination(file) {
                    Some(path) => std::fs::write(&path, &out.xml)
                        .with_context(|| format!("cannot write {}", path.display()))?,
                    None => stdout.write_all(out.xml.as_bytes())?,
                }
                status = status.max(out.exit_code() as u8);
            }
            Err(e) => {
                eprintln!("d2d: {name}: {e}");
                status = 2;
            }
        }
    }
    Ok(status)
}

fn check(module: &str, modules: &ModuleArgs) -> anyhow::Result<u8> {
    let name = Path::parse(module).map_err(|e| anyhow::anyhow!("{module}: {e}"))?;
    let resolved = resolve(&name, &modules.search_path())?;
    for w in &resolved.warnings {
        eprintln!("{module}: warning: {w}");
    }
    let (grammar, diagnostics) = validate(&resolved.defs)?;
    for d in &diagnostics {
        println!("{d}");
    }
    let n = grammar.defs().len();
    if diagnostics.is_empty() {
        println!("{module}: {n} definitions, LL(1)");
        Ok(0)
    } else {
        println!("{module}: {n} definitions, {} LL(1) conflict(s)", diagnostics.len());
        Ok(1)
    }
}

fn tokens(file: &FsPath, chars: &CharArgs) -> anyhow::Result<u8> {
    let text = read(file)?;
    let corpus = match split_sections(&text) {
        Ok(s) => s.corpus,
        Err(_) => text,
    };
    print!("{}", dump_tokens(&tokenize(&corpus, &chars.tokenizer()?)));
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Parse(args) => parse(args),
        Command::Check { module, modules } => check(module, modules),
        Command::Tokens { file, chars } => tokens(file, chars),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("d2d: {e:#}");
            ExitCode::from(2)
        }
    }
}
