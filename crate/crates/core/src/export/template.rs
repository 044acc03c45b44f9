//! Small mustache-style template engine.
//!
//! Grammar: `{{name}}`, `{{name|filter|filter:arg}}`, `{{#entries}}...{{/entries}}`.
//! Top-level names: `count`, `radiation`, `radiation_name`. Entry names: the CSV columns
//! plus `index` (1-based). Filters: `fixed:N`, `upper`.

use std::path::Path;

use thiserror::Error;

use super::table::{entry_cells, CSV_COLUMNS};
use super::{write_atomic, ExportError};
use crate::library::{LibraryEntry, RadionuclideLibrary};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TemplateError {
    #[error("template syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown placeholder `{0}`")]
    UnknownPlaceholder(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Filter {
    Fixed(usize),
    Upper,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Text(String),
    Var { name: String, filters: Vec<Filter> },
    Entries(Vec<Node>),
}

const TOP_FIELDS: [&str; 3] = ["count", "radiation", "radiation_name"];

fn is_entry_field(name: &str) -> bool {
    name == "index" || CSV_COLUMNS.contains(&name)
}

/// A parsed, validated template.
#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    nodes: Vec<Node>,
}

impl Template {
    pub fn parse(src: &str) -> Result<Self, TemplateError> {
        let mut stack: Vec<(usize, Vec<Node>)> = vec![(0, Vec::new())];
        let mut rest = src;
        let mut offset = 0;
        while let Some(open) = rest.find("{{") {
            if open > 0 {
                stack.last_mut().expect("root frame").1.push(Node::Text(rest[..open].to_string()));
            }
            let tag_start = offset + open;
            let after = &rest[open + 2..];
            let close =
                after.find("}}").ok_or(TemplateError::Syntax { offset: tag_start, message: "unclosed `{{`".into() })?;
            let tag = after[..close].trim();
            let in_section = stack.len() > 1;
            if let Some(name) = tag.strip_prefix('#') {
                if name.trim() != "entries" {
                    return Err(TemplateError::UnknownPlaceholder(format!("#{}", name.trim())));
                }
                if in_section {
                    return Err(TemplateError::Syntax { offset: tag_start, message: "nested sections".into() });
                }
                stack.push((tag_start, Vec::new()));
            } else if let Some(name) = tag.strip_prefix('/') {
                if name.trim() != "entries" || !in_section {
                    return Err(TemplateError::Syntax {
                        offset: tag_start,
                        message: format!("unexpected closing tag `{}`", name.trim()),
                    });
                }
                let (_, body) = stack.pop().expect("section frame");
                stack.last_mut().expect("root frame").1.push(Node::Entries(body));
            } else {
                let node = parse_var(tag, tag_start, in_section)?;
                stack.last_mut().expect("root frame").1.push(node);
            }
            let consumed = open + 2 + close + 2;
            rest = &rest[consumed..];
            offset += consumed;
        }
        if !rest.is_empty() {
            stack.last_mut().expect("root frame").1.push(Node::Text(rest.to_string()));
        }
        if stack.len() > 1 {
            return Err(TemplateError::Syntax { offset: stack[1].0, message: "unclosed section `entries`".into() });
        }
        Ok(Template { nodes: stack.pop().expect("root frame").1 })
    }

    pub fn render(&self, lib: &RadionuclideLibrary) -> String {
        let mut out = String::new();
        for n in &self.nodes {
            match n {
                Node::Text(t) => out.push_str(t),
                Node::Var { name, filters } => {
                    let v = match name.as_str() {
                        "count" => lib.entries.len().to_string(),
                        "radiation" => lib.radiation.code().to_string(),
                        _ => lib.radiation.name().to_string(),
                    };
                    out.push_str(&apply(v, filters));
                }
                Node::Entries(body) => {
                    for (i, e) in lib.entries.iter().enumerate() {
                        render_entry(body, i, e, &mut out);
                    }
                }
            }
        }
        out
    }
}

fn parse_var(tag: &str, offset: usize, in_section: bool) -> Result<Node, TemplateError> {
    let mut parts = tag.split('|').map(str::trim);
    let name = parts.next().unwrap_or_default().to_string();
    if name.is_empty() {
        return Err(TemplateError::Syntax { offset, message: "empty placeholder".into() });
    }
    let known = if in_section {
        is_entry_field(&name) || TOP_FIELDS.contains(&name.as_str())
    } else {
        TOP_FIELDS.contains(&name.as_str())
    };
    if !known {
        return Err(TemplateError::UnknownPlaceholder(name));
    }
    let mut filters = Vec::new();
    for f in parts {
        filters.push(match f.split_once(':') {
            Some(("fixed", n)) => Filter::Fixed(
                n.trim()
                    .parse()
                    .map_err(|_| TemplateError::Syntax { offset, message: format!("bad precision in `{f}`") })?,
            ),
            None if f == "upper" => Filter::Upper,
            _ => return Err(TemplateError::UnknownPlaceholder(format!("{name}|{f}"))),
        });
    }
    Ok(Node::Var { name, filters })
}

fn apply(mut v: String, filters: &[Filter]) -> String {
    for f in filters {
        v = match f {
            Filter::Fixed(n) => match v.parse::<f64>() {
                Ok(x) if !v.is_empty() => format!("{x:.n$}", n = *n),
                _ => v,
            },
            Filter::Upper => v.to_uppercase(),
        };
    }
    v
}

fn render_entry(body: &[Node], index: usize, e: &LibraryEntry, out: &mut String) {
    let cells = entry_cells(e);
    for n in body {
        match n {
            Node::Text(t) => out.push_str(t),
            Node::Var { name, filters } => {
                let v = if name == "index" {
                    (index + 1).to_string()
                } else if let Some(i) = CSV_COLUMNS.iter().position(|c| c == name) {
                    cells[i].clone()
                } else {
                    // Top-level names are not meaningful per entry.
                    String::new()
                };
                out.push_str(&apply(v, filters));
            }
            Node::Entries(_) => unreachable!("sections do not nest"),
        }
    }
}

pub fn render_template(lib: &RadionuclideLibrary, template: &str) -> Result<String, TemplateError> {
    Ok(Template::parse(template)?.render(lib))
}

/// Renders fully before touching `path`; errors leave no file behind.
pub fn export_template(lib: &RadionuclideLibrary, template: &str, path: &Path) -> Result<(), ExportError> {
    let text = render_template(lib, template)?;
    write_atomic(path, text.as_bytes())
}
