//! XML 1.1 serialization of result trees.

use crate::model::{render_expr, Element, Node};

pub const DIAGNOSTICS_NAMESPACE: &str = "urn:d2d:diagnostics";

#[derive(Debug, Clone)]
pub struct EmitConfig {
    pub diagnostics_namespace: String,
    /// Spaces per level for element-only content; `None` writes no
    /// extra whitespace.
    pub indent: Option<usize>,
    pub incomplete_attribute_name: String,
    /// Used to spell skipped tags.
    pub command_char: char,
}

impl Default for EmitConfig {
    fn default() -> Self {
        EmitConfig {
            diagnostics_namespace: DIAGNOSTICS_NAMESPACE.to_string(),
            indent: None,
            incomplete_attribute_name: "incomplete".to_string(),
            command_char: '#',
        }
    }
}

fn is_name_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == ':'
}

fn is_xml_name(s: &str) -> bool {
    let mut cs = s.chars();
    cs.next().is_some_and(is_name_start)
        && cs.all(|c| is_name_start(c) || c.is_alphanumeric() || matches!(c, '-' | '.' | '\u{B7}'))
        && !s.contains(':')
}

fn escape_into(out: &mut String, s: &str, attribute: bool) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' if attribute => out.push_str("&quot;"),
            '\n' | '\t' if attribute => out.push_str(&format!("&#x{:X};", c as u32)),
            '\n' | '\t' => out.push(c),
            '\0' | '\u{FFFE}' | '\u{FFFF}' => out.push('\u{FFFD}'),
            '\u{1}'..='\u{1F}' | '\u{7F}'..='\u{9F}' | '\u{2028}' => {
                out.push_str(&format!("&#x{:X};", c as u32))
            }
            c => out.push(c),
        }
    }
}

/// Escapes character data for element content.
pub fn escape_text(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    escape_into(&mut out, s, false);
    out
}

struct Emitter<'a> {
    cfg: &'a EmitConfig,
    out: String,
}

impl Emitter<'_> {
    fn newline(&mut self, depth: usize, pretty: bool) {
        if let (Some(n), true) = (self.cfg.indent, pretty) {
            self.out.push('\n');
            self.out.extend(std::iter::repeat_n(' ', n * depth));
        }
    }

    fn element(&mut self, e: &Element, depth: usize, root: bool, pretty: bool) {
        let name = e
            .xml_name
            .as_deref()
            .filter(|n| is_xml_name(n))
            .unwrap_or(e.tag.as_str());
        self.out.push('<');
        self.out.push_str(name);
        if root {
            self.out.push_str(" xmlns:d2d=\"");
            escape_into(&mut self.out, &self.cfg.diagnostics_namespace, true);
            self.out.push('"');
        }
        if e.incomplete {
            self.out.push(' ');
            self.out.push_str(&self.cfg.incomplete_attribute_name);
            self.out.push_str("=\"true\"");
        }
        let mut flat = Vec::new();
        flatten(&e.children, &mut flat);
        if flat.is_empty() {
            self.out.push_str("/>");
            return;
        }
        self.out.push('>');
        let mixed = flat.iter().any(|n| matches!(n, Node::Chars(_)));
        let pretty = pretty && !mixed;
        for child in &flat {
            self.newline(depth + 1, pretty);
            self.node(child, depth + 1, pretty);
        }
        self.newline(depth, pretty);
        self.out.push_str("</");
        self.out.push_str(name);
        self.out.push('>');
    }

    fn node(&mut self, n: &Node, depth: usize, pretty: bool) {
        match n {
            Node::Element(e) => self.element(e, depth, false, pretty),
            Node::Chars(s) => escape_into(&mut self.out, s, false),
            Node::Missing(m) => {
                self.out.push_str("<d2d:missing model=\"");
                escape_into(&mut self.out, &render_expr(m), true);
                self.out.push_str("\"/>");
            }
            Node::Skipped(tok) => {
                self.out.push_str("<d2d:skipped>");
                escape_into(&mut self.out, &tok.source_text(self.cfg.command_char), false);
                self.out.push_str("</d2d:skipped>");
            }
            Node::Comment(c) => {
                self.out.push_str("<!--");
                let body: String = c
                    .chars()
                    .map(|c| match c {
                        '\n' | '\t' => c,
                        '\0'..='\u{1F}' | '\u{7F}'..='\u{9F}' | '\u{2028}' | '\u{FFFE}' | '\u{FFFF}' => '\u{FFFD}',
                        c => c,
                    })
                    .collect();
                // `--` and a trailing `-` are not allowed inside comments.
                let mut body = body;
                while body.contains("--") {
                    body = body.replace("--", "- -");
                }
                if body.ends_with('-') {
                    body.push(' ');
                }
                self.out.push_str(&body);
                self.out.push_str("-->");
            }
            Node::Perm(_) => unreachable!("permutations are flattened"),
        }
    }
}

/// Children with permutation records replaced by their branch content in
/// arrival order.
fn flatten<'a>(children: &'a [Node], out: &mut Vec<&'a Node>) {
    for c in children {
        match c {
            Node::Perm(p) => {
                for (_, branch) in &p.filled {
                    flatten(branch, out);
                }
            }
            n => out.push(n),
        }
    }
}

/// Serializes `root`, which must be an element, as an XML 1.1 document.
pub fn emit(root: &Node, cfg: &EmitConfig) -> String {
    let Node::Element(e) = root else {
        panic!("the document root is an element");
    };
    let mut em = Emitter {
        cfg,
        out: String::from("<?xml version=\"1.1\" encoding=\"UTF-8\"?>\n"),
    };
    em.element(e, 0, true, true);
    em.out.push('\n');
    em.out
}
