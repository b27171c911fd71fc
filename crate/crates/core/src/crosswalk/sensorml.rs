//! Embedding an instrument PID in a SensorML description.
//!
//! The PID is written as an identifier term in the document's
//! `sml:IdentifierList`:
//!
//! ```xml
//! <sml:identifier>
//!   <sml:Term>
//!     <sml:label>Instrument persistent identifier</sml:label>
//!     <sml:value>http://hdl.handle.net/21.T11998/0000-001A-3904-0</sml:value>
//!   </sml:Term>
//! </sml:identifier>
//! ```
//!
//! Documents are edited by splicing text at byte offsets found during a
//! full parse, so everything outside the touched element is preserved
//! byte for byte.

use quick_xml::escape::escape;
use quick_xml::events::Event;
use quick_xml::name::ResolveResult;
use quick_xml::NsReader;

use crate::pid::{Pid, DEFAULT_HANDLE_RESOLVER};

pub const SENSORML_NS: &str = "http://www.opengis.net/sensorml/2.0";
pub const PID_LABEL: &str = "Instrument persistent identifier";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SensorMlError {
    #[error("malformed document: {0}")]
    MalformedDocument(String),
    #[error("document already names instrument PID `{existing}`")]
    ConflictingIdentifier { existing: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConflictPolicy {
    #[default]
    Fail,
    Replace,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensorMlOptions {
    pub resolver: String,
    pub on_conflict: ConflictPolicy,
}

impl Default for SensorMlOptions {
    fn default() -> Self {
        SensorMlOptions {
            resolver: DEFAULT_HANDLE_RESOLVER.to_string(),
            on_conflict: ConflictPolicy::Fail,
        }
    }
}

#[derive(Debug, Clone)]
struct IdentifierList {
    prefix: String,
    /// Offset of `<` of the start tag.
    start: usize,
    /// Offset just past the start tag.
    open_end: usize,
    /// Offset of `<` of the end tag; `None` for a self-closing list.
    close_start: Option<usize>,
}

#[derive(Debug, Clone, Default)]
struct TermInfo {
    label: String,
    value: String,
    /// Byte range of the value's content (or of a self-closing value tag).
    value_span: Option<(usize, usize)>,
    value_self_closing: bool,
    value_prefix: String,
}

#[derive(Debug, Default)]
struct Scan {
    list: Option<IdentifierList>,
    terms: Vec<TermInfo>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Capture {
    None,
    Label,
    Value,
}

/// `bound` is `Some(is-sensorml-namespace)` for namespace-bound names.
fn is_sml(bound: Option<bool>, prefix: Option<&[u8]>) -> bool {
    bound.unwrap_or(prefix == Some(b"sml".as_slice()))
}

fn scan(doc: &str) -> Result<Scan, SensorMlError> {
    let malformed = |e: &dyn std::fmt::Display| SensorMlError::MalformedDocument(e.to_string());
    let mut reader = NsReader::from_str(doc);
    // Element stack of (is-sml, local name).
    let mut stack: Vec<(bool, String)> = Vec::new();
    let mut out = Scan::default();
    let mut current: Option<TermInfo> = None;
    let mut capture = Capture::None;
    let mut saw_root = false;
    let mut list_depth: Option<usize> = None;

    loop {
        let before = reader.buffer_position() as usize;
        let (ns, event) = reader.read_resolved_event().map_err(|e| malformed(&e))?;
        let bound = match ns {
            ResolveResult::Bound(n) => Some(n.as_ref() == SENSORML_NS.as_bytes()),
            ResolveResult::Unbound | ResolveResult::Unknown(_) => None,
        };
        let event = event.into_owned();
        let after = reader.buffer_position() as usize;
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let self_closing = matches!(event, Event::Empty(_));
                if stack.is_empty() {
                    if saw_root {
                        return Err(SensorMlError::MalformedDocument("more than one root element".into()));
                    }
                    saw_root = true;
                }
                let name = e.name();
                let sml = is_sml(bound, name.prefix().map(|p| p.into_inner()));
                let local = String::from_utf8_lossy(name.local_name().into_inner()).into_owned();
                let prefix = name
                    .prefix()
                    .map(|p| String::from_utf8_lossy(p.into_inner()).into_owned())
                    .unwrap_or_default();
                let parent = stack.last().cloned();
                if sml && out.list.is_none() && local == "IdentifierList" {
                    out.list = Some(IdentifierList {
                        prefix,
                        start: before,
                        open_end: after,
                        close_start: None,
                    });
                    if !self_closing {
                        list_depth = Some(stack.len());
                    }
                } else if sml && local == "Term" && parent == Some((true, "identifier".into())) {
                    current = Some(TermInfo::default());
                    if self_closing {
                        out.terms.extend(current.take());
                    }
                } else if sml && current.is_some() && parent == Some((true, "Term".into())) {
                    match local.as_str() {
                        "label" => capture = Capture::Label,
                        "value" => {
                            capture = Capture::Value;
                            if let Some(t) = current.as_mut() {
                                t.value_prefix = prefix;
                                t.value_self_closing = self_closing;
                                t.value_span = Some(if self_closing { (before, after) } else { (after, after) });
                            }
                        }
                        _ => {}
                    }
                    if self_closing {
                        capture = Capture::None;
                    }
                }
                if !self_closing {
                    stack.push((sml, local));
                }
            }
            Event::End(_) => {
                let (sml, local) = stack
                    .pop()
                    .ok_or_else(|| SensorMlError::MalformedDocument("unbalanced end tag".into()))?;
                if sml {
                    match local.as_str() {
                        "IdentifierList" if list_depth == Some(stack.len()) => {
                            if let Some(l) = out.list.as_mut() {
                                l.close_start = Some(before);
                            }
                            list_depth = None;
                        }
                        "Term" => {
                            if let Some(t) = current.take() {
                                out.terms.push(t);
                            }
                        }
                        "label" | "value" => {
                            if capture == Capture::Value {
                                if let Some((s, _)) = current.as_ref().and_then(|t| t.value_span) {
                                    if let Some(t) = current.as_mut() {
                                        t.value_span = Some((s, before));
                                    }
                                }
                            }
                            capture = Capture::None;
                        }
                        _ => {}
                    }
                }
            }
            Event::Text(ref t) => {
                if capture != Capture::None {
                    let text = t.unescape().map_err(|e| malformed(&e))?;
                    push_text(current.as_mut(), capture, &text);
                } else if stack.is_empty() && !t.iter().all(|b| b.is_ascii_whitespace()) {
                    return Err(SensorMlError::MalformedDocument("text outside the root element".into()));
                }
            }
            Event::CData(ref t) => {
                if capture != Capture::None {
                    let text = String::from_utf8_lossy(t.as_ref()).into_owned();
                    push_text(current.as_mut(), capture, &text);
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }
    if !stack.is_empty() {
        return Err(SensorMlError::MalformedDocument(format!(
            "unclosed element `{}`",
            stack.last().map(|s| s.1.as_str()).unwrap_or("")
        )));
    }
    if !saw_root {
        return Err(SensorMlError::MalformedDocument("no root element".into()));
    }
    Ok(out)
}

fn push_text(t: Option<&mut TermInfo>, capture: Capture, text: &str) {
    if let Some(t) = t {
        match capture {
            Capture::Label => t.label.push_str(text),
            Capture::Value => t.value.push_str(text),
            Capture::None => {}
        }
    }
}

fn pid_term(scan: &Scan) -> Option<&TermInfo> {
    scan.terms.iter().find(|t| t.label.trim() == PID_LABEL)
}

pub fn embed_sensorml_identifier(doc: &str, pid: &Pid) -> Result<String, SensorMlError> {
    embed_sensorml_identifier_with(doc, pid, &SensorMlOptions::default())
}

pub fn embed_sensorml_identifier_with(
    doc: &str,
    pid: &Pid,
    opts: &SensorMlOptions,
) -> Result<String, SensorMlError> {
    let scan = scan(doc)?;
    let url = pid.to_reference(&opts.resolver);

    if let Some(term) = pid_term(&scan) {
        let existing = term.value.trim();
        if existing == url {
            return Ok(doc.to_string());
        }
        if opts.on_conflict == ConflictPolicy::Fail {
            return Err(SensorMlError::ConflictingIdentifier {
                existing: existing.to_string(),
            });
        }
        let (s, e) = term
            .value_span
            .ok_or_else(|| SensorMlError::MalformedDocument("PID term has no value element".into()))?;
        let replacement = if term.value_self_closing {
            let p = qualify(&term.value_prefix, "value");
            format!("<{p}>{}</{p}>", escape(&url))
        } else {
            escape(&url).into_owned()
        };
        return Ok(splice(doc, s, e, &replacement));
    }

    let list = scan
        .list
        .ok_or_else(|| SensorMlError::MalformedDocument("no sml:IdentifierList to hold the identifier".into()))?;
    let p = list.prefix.as_str();
    match list.close_start {
        Some(close) => {
            let indent = line_indent(doc, close);
            let block = match indent {
                Some(i) => format!("{}{}\n{i}", unit(i), block(p, &url, &format!("{i}{}", unit(i)), unit(i))),
                None => block_inline(p, &url),
            };
            Ok(splice(doc, close, close, &block))
        }
        None => {
            let tag = &doc[list.start..list.open_end];
            let open = format!("{}>", tag.trim_end_matches("/>").trim_end());
            let close = format!("</{}>", qualify(p, "IdentifierList"));
            let text = match line_indent(doc, list.start) {
                Some(i) => {
                    let inner = format!("{i}{}", unit(i));
                    format!("{open}\n{inner}{}\n{i}{close}", block(p, &url, &inner, unit(i)))
                }
                None => format!("{open}{}{close}", block_inline(p, &url)),
            };
            Ok(splice(doc, list.start, list.open_end, &text))
        }
    }
}

pub fn extract_sensorml_identifier(doc: &str) -> Result<Option<Pid>, SensorMlError> {
    let scan = scan(doc)?;
    match pid_term(&scan) {
        None => Ok(None),
        Some(t) if t.value.trim().is_empty() => Err(SensorMlError::MalformedDocument(
            "instrument persistent identifier term has an empty value".into(),
        )),
        Some(t) => Ok(Some(Pid::parse(&t.value))),
    }
}

fn qualify(prefix: &str, local: &str) -> String {
    if prefix.is_empty() {
        local.to_string()
    } else {
        format!("{prefix}:{local}")
    }
}

/// The identifier block; the first line carries no indentation, later
/// lines are indented relative to `indent`.
fn block(prefix: &str, url: &str, indent: &str, unit: &str) -> String {
    let q = |l| qualify(prefix, l);
    let v = escape(url);
    format!(
        "<{id}>\n{indent}{unit}<{term}>\n{indent}{unit}{unit}<{label}>{PID_LABEL}</{label}>\n\
         {indent}{unit}{unit}<{value}>{v}</{value}>\n{indent}{unit}</{term}>\n{indent}</{id}>",
        id = q("identifier"),
        term = q("Term"),
        label = q("label"),
        value = q("value"),
    )
}

fn block_inline(prefix: &str, url: &str) -> String {
    let q = |l| qualify(prefix, l);
    format!(
        "<{id}><{term}><{label}>{PID_LABEL}</{label}><{value}>{v}</{value}></{term}></{id}>",
        id = q("identifier"),
        term = q("Term"),
        label = q("label"),
        value = q("value"),
        v = escape(url),
    )
}

/// Whitespace between the previous newline and `pos`, if that is all
/// there is on the line before `pos`.
fn line_indent(doc: &str, pos: usize) -> Option<&str> {
    let start = doc[..pos].rfind('\n').map(|i| i + 1)?;
    let ws = &doc[start..pos];
    ws.chars().all(|c| c == ' ' || c == '\t').then_some(ws)
}

fn unit(indent: &str) -> &'static str {
    if indent.starts_with('\t') {
        "\t"
    } else {
        "  "
    }
}

fn splice(doc: &str, start: usize, end: usize, with: &str) -> String {
    let mut s = String::with_capacity(doc.len() + with.len());
    s.push_str(&doc[..start]);
    s.push_str(with);
    s.push_str(&doc[end..]);
    s
}
