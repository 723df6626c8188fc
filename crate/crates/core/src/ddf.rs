//! ddf definition modules: parsing, module lookup, import keys with
//! automatic re-export, substitutions and import replacement.
//!
//! Module syntax:
//!
//! ```text
//! module NAME {
//!     import KEY = MODULE [with { subst [DEF :] REF -> EXPR ; replace KEY = KEY ; }] ;
//!     tags NAME = EXPR [xml "tag"] [ns "uri"] [docu "text"] [xslt "text"] ;
//!     chars NAME = EXPR ... ;
//! }
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::PathBuf;
use std::rc::Rc;

use crate::error::{LoadError, SyntaxError};
use crate::grammar::{validate_definition, validate_ll1, Diagnostic, Grammar};
use crate::model::{render_expr, DefTable, Definition, Expr, Ident, Kind, Path, Pos, Repr};
use crate::syntax::{Parser, Tok};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Module {
    pub name: Path,
    pub definitions: Vec<Definition>,
    pub imports: Vec<Import>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Import {
    pub key: Ident,
    pub target: Path,
    pub substitutions: Vec<Substitution>,
    /// Import key inside the imported module, rebound to one of our own keys.
    pub replacements: Vec<(Ident, Ident)>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substitution {
    /// `None` applies to every definition of the imported module.
    pub def: Option<Ident>,
    pub target: Path,
    pub replacement: Expr,
}

impl Module {
    pub fn definition(&self, name: &str) -> Option<&Definition> {
        self.definitions.iter().find(|d| d.tag.as_str() == name)
    }

    pub fn import(&self, key: &str) -> Option<&Import> {
        self.imports.iter().find(|i| i.key.as_str() == key)
    }

    /// Adds `other` on top of this module: definitions and imports with the
    /// same name replace the existing ones.
    pub fn overlay(&mut self, other: &Module) {
        for d in &other.definitions {
            match self.definitions.iter_mut().find(|x| x.tag == d.tag) {
                Some(slot) => *slot = d.clone(),
                None => self.definitions.push(d.clone()),
            }
        }
        for i in &other.imports {
            match self.imports.iter_mut().find(|x| x.key == i.key) {
                Some(slot) => *slot = i.clone(),
                None => self.imports.push(i.clone()),
            }
        }
    }
}

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

impl fmt::Display for Module {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "module {} {{", self.name)?;
        for i in &self.imports {
            write!(f, "    import {} = {}", i.key, i.target)?;
            if !i.substitutions.is_empty() || !i.replacements.is_empty() {
                f.write_str(" with {")?;
                for s in &i.substitutions {
                    f.write_str(" subst ")?;
                    if let Some(d) = &s.def {
                        write!(f, "{d} : ")?;
                    }
                    write!(f, "{} -> {} ;", s.target, render_expr(&s.replacement))?;
                }
                for (inner, own) in &i.replacements {
                    write!(f, " replace {inner} = {own} ;")?;
                }
                f.write_str(" }")?;
            }
            writeln!(f, " ;")?;
        }
        for d in &self.definitions {
            write!(f, "    {} {} = {}", d.kind, d.tag, render_expr(&d.expr))?;
            if let Some(x) = &d.repr.xml_tag {
                write!(f, " xml {}", quote(x))?;
            }
            if let Some(ns) = &d.repr.namespace {
                write!(f, " ns {}", quote(ns))?;
            }
            writeln!(f, " ;")?;
        }
        f.write_str("}\n")
    }
}

enum Parsed {
    Syntax(SyntaxError),
    Load(LoadError),
}

impl From<SyntaxError> for Parsed {
    fn from(e: SyntaxError) -> Self {
        Parsed::Syntax(e)
    }
}

struct ModuleParser {
    p: Parser,
    module: String,
}

impl ModuleParser {
    fn keyword(&mut self, w: &str) -> Result<(), SyntaxError> {
        if self.p.at_word(w) {
            self.p.next();
            Ok(())
        } else {
            Err(self.p.unexpected(&format!("`{w}`")))
        }
    }

    fn module(&mut self) -> Result<Module, Parsed> {
        self.keyword("module")?;
        let name = self.p.path()?;
        self.module = name.to_string();
        self.p.expect(&Tok::LBrace)?;
        let mut module = Module {
            name,
            definitions: Vec::new(),
            imports: Vec::new(),
        };
        let mut seen: HashMap<String, Pos> = HashMap::new();
        while !self.p.eat(&Tok::RBrace) {
            let pos = self.p.pos();
            let name = if self.p.at_word("import") {
                let import = self.import()?;
                let key = import.key.to_string();
                module.imports.push(import);
                key
            } else if self.p.at_word("tags") || self.p.at_word("chars") {
                let def = self.definition()?;
                let key = def.tag.to_string();
                module.definitions.push(def);
                key
            } else {
                return Err(self.p.unexpected("`import`, `tags`, `chars` or `}`").into());
            };
            if let Some(first) = seen.insert(name.clone(), pos) {
                return Err(Parsed::Load(LoadError::Duplicate {
                    module: self.module.clone(),
                    name,
                    first,
                    second: pos,
                }));
            }
        }
        Ok(module)
    }

    fn import(&mut self) -> Result<Import, SyntaxError> {
        let pos = self.p.pos();
        self.keyword("import")?;
        let key = self.p.ident()?;
        self.p.expect(&Tok::Equals)?;
        let target = self.p.path()?;
        let mut import = Import {
            key,
            target,
            substitutions: Vec::new(),
            replacements: Vec::new(),
            pos,
        };
        if self.p.at_word("with") {
            self.p.next();
            self.p.expect(&Tok::LBrace)?;
            while !self.p.eat(&Tok::RBrace) {
                if self.p.at_word("subst") {
                    self.p.next();
                    let def = if matches!(self.p.peek_at(1), Tok::Colon) {
                        let d = self.p.ident()?;
                        self.p.next();
                        Some(d)
                    } else {
                        None
                    };
                    let target = self.p.path()?;
                    self.p.expect(&Tok::Arrow)?;
                    let replacement = self.p.expr()?;
                    import.substitutions.push(Substitution {
                        def,
                        target,
                        replacement,
                    });
                } else if self.p.at_word("replace") {
                    self.p.next();
                    let inner = self.p.ident()?;
                    self.p.expect(&Tok::Equals)?;
                    let own = self.p.ident()?;
                    import.replacements.push((inner, own));
                } else {
                    return Err(self.p.unexpected("`subst`, `replace` or `}`"));
                }
                self.p.expect(&Tok::Semi)?;
            }
        }
        self.p.expect(&Tok::Semi)?;
        Ok(import)
    }

    fn definition(&mut self) -> Result<Definition, SyntaxError> {
        let pos = self.p.pos();
        let kind = if self.p.at_word("tags") { Kind::Tags } else { Kind::Chars };
        self.p.next();
        let tag = self.p.ident()?;
        self.p.expect(&Tok::Equals)?;
        let expr = self.p.expr()?;
        let mut repr = Repr::default();
        loop {
            if self.p.at_word("xml") {
                self.p.next();
                repr.xml_tag = Some(self.p.string()?);
            } else if self.p.at_word("ns") {
                self.p.next();
                repr.namespace = Some(self.p.string()?);
            } else if self.p.at_word("docu") || self.p.at_word("xslt") {
                self.p.next();
                self.p.string()?;
            } else {
                break;
            }
        }
        self.p.expect(&Tok::Semi)?;
        Ok(Definition {
            tag,
            kind,
            expr,
            repr,
            pos: Some(pos),
        })
    }
}

/// Parses one module; `file` names the source in error messages.
pub fn parse_module_in(text: &str, file: &str) -> Result<Module, LoadError> {
    let syntax = |source| LoadError::Syntax {
        file: file.to_string(),
        source,
    };
    let mut mp = ModuleParser {
        p: Parser::new(text).map_err(syntax)?,
        module: String::new(),
    };
    let module = mp.module().map_err(|e| match e {
        Parsed::Syntax(s) => syntax(s),
        Parsed::Load(l) => l,
    })?;
    if !mp.p.at_eof() {
        return Err(syntax(mp.p.unexpected("end of module")));
    }
    Ok(module)
}

pub fn parse_module(text: &str) -> Result<Module, LoadError> {
    parse_module_in(text, "<module>")
}

/// Rewrites every `base ^( replacement / id )`, innermost first. Returns
/// one warning per substitution whose `id` does not occur in its base.
pub fn apply_local_subst(e: &Expr) -> (Expr, Vec<String>) {
    let mut warnings = Vec::new();
    let out = e.map_bottom_up(&mut |node| match node {
        Expr::LocalSubst {
            base,
            replacement,
            target,
        } => {
            let mut hit = false;
            let rewritten = base.map_bottom_up(&mut |inner| match inner {
                Expr::Ref(ref p) if p.segments().len() == 1 && *p.last() == target => {
                    hit = true;
                    (*replacement).clone()
                }
                other => other,
            });
            if !hit {
                warnings.push(format!(
                    "local substitution target {target} is not referenced in {}",
                    render_expr(&base)
                ));
            }
            rewritten
        }
        other => other,
    });
    (out, warnings)
}

/// Where modules come from.
pub trait ModuleSource {
    fn load(&self, name: &Path) -> Result<Module, LoadError>;
}

/// Looks up `a.b.c` as `a/b/c.ddf` below each root, first hit wins.
#[derive(Debug, Clone, Default)]
pub struct SearchPath {
    pub roots: Vec<PathBuf>,
}

impl SearchPath {
    pub fn new(roots: impl IntoIterator<Item = PathBuf>) -> Self {
        SearchPath {
            roots: roots.into_iter().collect(),
        }
    }

    pub fn locate(&self, name: &Path) -> Option<PathBuf> {
        self.roots.iter().find_map(|root| {
            let mut file = root.clone();
            for seg in name.segments() {
                file.push(seg.as_str());
            }
            file.set_extension("ddf");
            file.is_file().then_some(file)
        })
    }
}

impl ModuleSource for SearchPath {
    fn load(&self, name: &Path) -> Result<Module, LoadError> {
        let file = self
            .locate(name)
            .ok_or_else(|| LoadError::MissingModule(name.to_string()))?;
        let text = std::fs::read_to_string(&file).map_err(|source| LoadError::Io {
            path: file.clone(),
            source,
        })?;
        parse_module_in(&text, &file.display().to_string())
    }
}

/// Module texts held in memory, keyed by dotted module name.
#[derive(Debug, Clone, Default)]
pub struct MemorySource {
    pub modules: BTreeMap<String, String>,
}

impl MemorySource {
    pub fn new<'a>(modules: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        MemorySource {
            modules: modules
                .into_iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }
}

impl ModuleSource for MemorySource {
    fn load(&self, name: &Path) -> Result<Module, LoadError> {
        let key = name.to_string();
        let text = self
            .modules
            .get(&key)
            .ok_or_else(|| LoadError::MissingModule(key.clone()))?;
        parse_module_in(text, &key)
    }
}

/// A resolved definition table. Keys are dotted paths of import keys from
/// the root module, so `k1.k2.d` names `d` imported through `k2` inside the
/// module imported as `k1`. References inside expressions use the same keys.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub defs: DefTable,
    pub warnings: Vec<String>,
}

#[derive(Clone)]
enum Binding {
    Instance(usize),
    /// Replaced import: the importer's instance under the given key.
    Redirect(usize, String),
}

struct Instance {
    module: Rc<Module>,
    prefix: Vec<Ident>,
    imports: BTreeMap<String, Binding>,
    /// Substitutions with the instance they are evaluated in.
    substs: Vec<(Substitution, usize)>,
}

struct Resolver<'a> {
    source: &'a dyn ModuleSource,
    cache: HashMap<String, Rc<Module>>,
    instances: Vec<Instance>,
}

impl Resolver<'_> {
    fn load(&mut self, name: &Path) -> Result<Rc<Module>, LoadError> {
        let key = name.to_string();
        if let Some(m) = self.cache.get(&key) {
            return Ok(m.clone());
        }
        let m = Rc::new(self.source.load(name)?);
        self.cache.insert(key, m.clone());
        Ok(m)
    }

    fn instantiate(
        &mut self,
        module: Rc<Module>,
        prefix: Vec<Ident>,
        chain: &[String],
        substs: Vec<(Substitution, usize)>,
        redirects: BTreeMap<String, Binding>,
    ) -> Result<usize, LoadError> {
        let id = self.instances.len();
        self.instances.push(Instance {
            module: module.clone(),
            prefix: prefix.clone(),
            imports: BTreeMap::new(),
            substs,
        });
        for import in &module.imports {
            let key = import.key.to_string();
            if let Some(b) = redirects.get(&key) {
                self.instances[id].imports.insert(key, b.clone());
                continue;
            }
            let target_name = import.target.to_string();
            if let Some(at) = chain.iter().position(|m| *m == target_name) {
                let mut cycle = chain[at..].to_vec();
                cycle.push(target_name);
                return Err(LoadError::ImportCycle(cycle));
            }
            let target = self.load(&import.target)?;
            let mut inner_redirects = BTreeMap::new();
            for (inner, own) in &import.replacements {
                if module.import(own.as_str()).is_none() {
                    return Err(LoadError::UnknownImportKey {
                        module: module.name.to_string(),
                        key: own.to_string(),
                    });
                }
                if target.import(inner.as_str()).is_none() {
                    return Err(LoadError::UnknownImportKey {
                        module: target.name.to_string(),
                        key: inner.to_string(),
                    });
                }
                inner_redirects.insert(inner.to_string(), Binding::Redirect(id, own.to_string()));
            }
            for s in &import.substitutions {
                if let Some(d) = &s.def {
                    if target.definition(d.as_str()).is_none() {
                        return Err(LoadError::MissingDefinition {
                            module: target.name.to_string(),
                            name: d.to_string(),
                        });
                    }
                }
            }
            let mut child_prefix = prefix.clone();
            child_prefix.push(import.key.clone());
            let mut child_chain = chain.to_vec();
            child_chain.push(target_name);
            let substs = import.substitutions.iter().map(|s| (s.clone(), id)).collect();
            let child = self.instantiate(target, child_prefix, &child_chain, substs, inner_redirects)?;
            self.instances[id].imports.insert(key, Binding::Instance(child));
        }
        Ok(id)
    }

    fn binding(&self, inst: usize, key: &str) -> Option<usize> {
        match self.instances[inst].imports.get(key)? {
            Binding::Instance(i) => Some(*i),
            Binding::Redirect(importer, own) => self.binding(*importer, own),
        }
    }

    fn lookup(&self, inst: usize, segs: &[Ident]) -> Option<Path> {
        let instance = &self.instances[inst];
        match segs {
            [name] => instance
                .module
                .definition(name.as_str())
                .map(|_| Path::single(name.clone()).prefixed(&instance.prefix)),
            [key, rest @ ..] => self.lookup(self.binding(inst, key.as_str())?, rest),
            [] => None,
        }
    }

    /// Makes every reference of `e` absolute, as seen from instance `inst`.
    fn absolutize(&self, inst: usize, def: &str, e: &Expr) -> Result<Expr, LoadError> {
        let mut err = None;
        let out = e.map_bottom_up(&mut |node| match node {
            Expr::Ref(ref p) | Expr::Insert(ref p) => match self.lookup(inst, p.segments()) {
                Some(abs) => {
                    if matches!(node, Expr::Ref(_)) {
                        Expr::Ref(abs)
                    } else {
                        Expr::Insert(abs)
                    }
                }
                None => {
                    err.get_or_insert(LoadError::UnresolvedRef {
                        module: self.instances[inst].module.name.to_string(),
                        def: def.to_string(),
                        path: p.to_string(),
                    });
                    node
                }
            },
            other => other,
        });
        match err {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }

    fn table(&self) -> Result<Resolved, LoadError> {
        let mut defs = DefTable::new();
        let mut warnings = Vec::new();
        for (id, inst) in self.instances.iter().enumerate() {
            let mut used = vec![false; inst.substs.len()];
            let mut replacements = Vec::new();
            for (s, ctx) in &inst.substs {
                let (repl, w) = apply_local_subst(&s.replacement);
                warnings.extend(w);
                let ctx_def = format!("substitution for {}", s.target);
                replacements.push(self.absolutize(*ctx, &ctx_def, &repl)?);
            }
            for def in &inst.module.definitions {
                let (local, w) = apply_local_subst(&def.expr);
                warnings.extend(w);
                let mut err = None;
                let substituted = local.map_bottom_up(&mut |node| {
                    let (Expr::Ref(p) | Expr::Insert(p)) = &node else {
                        return node;
                    };
                    let hit = inst.substs.iter().position(|(s, _)| {
                        s.target == *p && s.def.as_ref().is_none_or(|d| *d == def.tag)
                    });
                    match hit {
                        Some(i) => {
                            used[i] = true;
                            replacements[i].clone()
                        }
                        None => match self.absolutize(id, def.tag.as_str(), &node) {
                            Ok(x) => x,
                            Err(e) => {
                                err.get_or_insert(e);
                                node
                            }
                        },
                    }
                });
                if let Some(e) = err {
                    return Err(e);
                }
                let expr = substituted;
                let key = Path::single(def.tag.clone()).prefixed(&inst.prefix).key();
                defs.insert(
                    key,
                    Definition {
                        expr,
                        ..def.clone()
                    },
                );
            }
            if let Some(i) = used.iter().position(|u| !u) {
                return Err(LoadError::SubstTargetNotFound {
                    module: inst.module.name.to_string(),
                    target: inst.substs[i].0.target.to_string(),
                });
            }
        }
        Ok(Resolved { defs, warnings })
    }
}

/// Resolves `root` and everything it imports into one table. `locals` are
/// layered over the root module in order, later ones shadowing earlier ones.
pub fn resolve_layered(
    root: &Path,
    locals: &[Module],
    source: &dyn ModuleSource,
) -> Result<Resolved, LoadError> {
    let mut r = Resolver {
        source,
        cache: HashMap::new(),
        instances: Vec::new(),
    };
    let mut module = (*r.load(root)?).clone();
    for l in locals {
        module.overlay(l);
    }
    r.instantiate(Rc::new(module), Vec::new(), &[root.to_string()], Vec::new(), BTreeMap::new())?;
    r.table()
}

pub fn resolve(root: &Path, source: &dyn ModuleSource) -> Result<Resolved, LoadError> {
    resolve_layered(root, &[], source)
}

/// Builds the parser grammar from a resolved table: expands insertions,
/// checks operator usage per kind and runs the LL(1) check on every tags
/// definition. LL(1) conflicts are returned, not raised.
pub fn validate(defs: &DefTable) -> Result<(Grammar, Vec<Diagnostic>), LoadError> {
    let grammar = Grammar::new(defs)?;
    for (key, def) in grammar.defs().iter() {
        if let Some(e) = validate_definition(key, def, grammar.defs()).into_iter().next() {
            return Err(e.into());
        }
    }
    let mut diags = Vec::new();
    for (key, def) in defs.iter() {
        if def.kind == Kind::Tags {
            diags.extend(validate_ll1(def, defs).into_iter().map(|mut d| {
                d.def = key.to_string();
                d
            }));
        }
    }
    Ok((grammar, diags))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Expr {
        Expr::reference(s)
    }

    #[test]
    fn parses_small_module() {
        let m = parse_module("module m { tags doc = p+ ; tags p = #chars ; }").unwrap();
        assert_eq!(m.name, Path::must("m"));
        assert_eq!(m.definitions.len(), 2);
        assert_eq!(m.definitions[0].expr, Expr::plus(r("p")));
    }

    #[test]
    fn empty_module() {
        let m = parse_module("module e { }").unwrap();
        assert!(m.definitions.is_empty() && m.imports.is_empty());
    }

    #[test]
    fn duplicate_names_report_both_positions() {
        let err = parse_module("module m {\n tags a = #empty ;\n tags a = #chars ;\n}").unwrap_err();
        match err {
            LoadError::Duplicate { name, first, second, .. } => {
                assert_eq!(name, "a");
                assert_eq!((first.line, second.line), (2, 3));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn printer_round_trip() {
        let src = r#"module a.b {
            import k = lib with { subst x -> y | #empty ; subst d : z -> y ; replace j = k2 ; } ;
            import k2 = other ;
            tags y = #chars xml "why" ns "urn:x" ;
            chars date = [y '0'..'9' ~+] ~ "-" ;
        }"#;
        let m = parse_module(src).unwrap();
        let again = parse_module(&m.to_string()).unwrap();
        assert_eq!(again.to_string(), m.to_string());
        assert_eq!(again.imports[0].substitutions, m.imports[0].substitutions);
        assert_eq!(again.definitions[1].expr, m.definitions[1].expr);
    }

    #[test]
    fn opaque_attributes_are_accepted() {
        let m = parse_module(r#"module m { tags p = #chars docu "para" xslt "<x/>" ; }"#).unwrap();
        assert_eq!(m.definitions[0].repr, Repr::default());
    }

    #[test]
    fn local_subst_rewrites_base() {
        let e = Expr::LocalSubst {
            base: Box::new(Expr::seq([r("a"), r("b")])),
            replacement: Box::new(r("c")),
            target: Ident::must("a"),
        };
        let (out, w) = apply_local_subst(&e);
        assert_eq!(out, Expr::seq([r("c"), r("b")]));
        assert!(w.is_empty());
    }

    #[test]
    fn local_subst_nested_innermost_first() {
        let e = crate::syntax::parse_expr("(a, b)^(c/a)^(d/c)").unwrap();
        let (out, _) = apply_local_subst(&e);
        assert_eq!(out, Expr::seq([r("d"), r("b")]));
    }

    #[test]
    fn local_subst_absent_target_warns() {
        let e = crate::syntax::parse_expr("(a, b)^(c/z)").unwrap();
        let (out, w) = apply_local_subst(&e);
        assert_eq!(out, Expr::seq([r("a"), r("b")]));
        assert_eq!(w.len(), 1);
    }

    fn source() -> MemorySource {
        MemorySource::new([
            ("base", "module base { import k = lib ; tags doc = k.d+ ; }"),
            ("lib", "module lib { import inner = leaf ; tags d = inner.leaf | #chars ; }"),
            ("leaf", "module leaf { tags leaf = #empty ; }"),
            ("cyc1", "module cyc1 { import a = cyc2 ; }"),
            ("cyc2", "module cyc2 { import b = cyc1 ; }"),
        ])
    }

    #[test]
    fn import_key_prefix_and_reexport() {
        let res = resolve(&Path::must("base"), &source()).unwrap();
        assert_eq!(res.defs.get_key("doc").unwrap().expr, Expr::plus(r("k.d")));
        assert_eq!(
            res.defs.get_key("k.d").unwrap().expr,
            Expr::alt([r("k.inner.leaf"), Expr::Chars])
        );
        assert!(res.defs.get_key("k.inner.leaf").is_some());
    }

    #[test]
    fn substitution_is_evaluated_in_importer() {
        let src = MemorySource::new([
            ("top", "module top { import k = lib with { subst inner.leaf -> extra ; } ; tags extra = #chars ; }"),
            ("lib", "module lib { import inner = leaf ; tags d = inner.leaf | #empty ; }"),
            ("leaf", "module leaf { tags leaf = #empty ; }"),
        ]);
        let res = resolve(&Path::must("top"), &src).unwrap();
        assert_eq!(res.defs.get_key("k.d").unwrap().expr, Expr::alt([r("extra"), Expr::Empty]));
    }

    #[test]
    fn missing_module_and_cycle() {
        assert!(matches!(
            resolve(&Path::must("nope"), &source()),
            Err(LoadError::MissingModule(_))
        ));
        match resolve(&Path::must("cyc1"), &source()) {
            Err(LoadError::ImportCycle(c)) => assert_eq!(c, ["cyc1", "cyc2", "cyc1"]),
            other => panic!("{:?}", other.map(|r| r.defs)),
        }
    }

    #[test]
    fn unresolved_reference_fails() {
        let src = MemorySource::new([("m", "module m { tags doc = nothere ; }")]);
        assert!(matches!(
            resolve(&Path::must("m"), &src),
            Err(LoadError::UnresolvedRef { .. })
        ));
    }

    #[test]
    fn substitution_target_must_occur() {
        let src = MemorySource::new([
            ("m", "module m { import k = leaf with { subst zz -> #empty ; } ; }"),
            ("leaf", "module leaf { tags leaf = #empty ; }"),
        ]);
        assert!(matches!(
            resolve(&Path::must("m"), &src),
            Err(LoadError::SubstTargetNotFound { .. })
        ));
    }

    #[test]
    fn import_replacement_shares_importer_instance() {
        let src = MemorySource::new([
            ("m", "module m { import mine = alt ; import k = lib with { replace inner = mine ; } ; }"),
            ("lib", "module lib { import inner = leaf ; tags d = inner.leaf ; }"),
            ("leaf", "module leaf { tags leaf = #empty ; }"),
            ("alt", "module alt { tags leaf = #chars ; }"),
        ]);
        let res = resolve(&Path::must("m"), &src).unwrap();
        assert_eq!(res.defs.get_key("k.d").unwrap().expr, r("mine.leaf"));
        assert!(res.defs.get_key("k.inner.leaf").is_none());
    }

    #[test]
    fn layering_shadows_root_definitions() {
        let local = parse_module("module local { tags doc = k.d ; tags extra = #chars ; }").unwrap();
        let res = resolve_layered(&Path::must("base"), &[local], &source()).unwrap();
        assert_eq!(res.defs.get_key("doc").unwrap().expr, r("k.d"));
        assert!(res.defs.get_key("extra").is_some());
    }

    #[test]
    fn validate_reports_ll1_conflicts() {
        let src = MemorySource::new([("m", "module m { tags doc = a | a ; tags a = #empty ; }")]);
        let res = resolve(&Path::must("m"), &src).unwrap();
        let (_, diags) = validate(&res.defs).unwrap();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].def, "doc");
    }

    #[test]
    fn validate_rejects_perm_in_chars() {
        let src = MemorySource::new([("m", "module m { chars c = \"a\" & \"b\" ; }")]);
        let res = resolve(&Path::must("m"), &src).unwrap();
        assert!(matches!(validate(&res.defs), Err(LoadError::Grammar(_))));
    }
}
