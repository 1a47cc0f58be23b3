//! Stroke annotations stored as XML.
//!
//! ```xml
//! <video name="v1">
//!   <action begin="120" end="240" move="serve"/>
//! </video>
//! ```

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Label given to actions without a class attribute.
pub const DEFAULT_STROKE_LABEL: &str = "stroke";

/// One annotated interval; `begin` and `end` are inclusive frame indices.
#[derive(Clone, Debug, PartialEq)]
pub struct StrokeAnnotation {
    pub begin: usize,
    pub end: usize,
    pub label: String,
    /// Detection confidence, present only on detector output.
    pub score: Option<f64>,
}

impl StrokeAnnotation {
    pub fn new(begin: usize, end: usize, label: impl Into<String>) -> Self {
        Self {
            begin,
            end,
            label: label.into(),
            score: None,
        }
    }

    /// Number of frames covered.
    pub fn frames(&self) -> usize {
        self.end + 1 - self.begin
    }
}

/// Element and attribute names of the annotation schema.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotationSchema {
    pub root: String,
    pub name: String,
    pub action: String,
    pub begin: String,
    pub end: String,
    pub label: String,
    pub score: String,
}

impl Default for AnnotationSchema {
    fn default() -> Self {
        Self {
            root: "video".into(),
            name: "name".into(),
            action: "action".into(),
            begin: "begin".into(),
            end: "end".into(),
            label: "move".into(),
            score: "score".into(),
        }
    }
}

pub fn parse_annotation_xml(document: &str) -> Result<(String, Vec<StrokeAnnotation>)> {
    parse_annotation_xml_with(document, &AnnotationSchema::default())
}

pub fn parse_annotation_xml_with(document: &str, schema: &AnnotationSchema) -> Result<(String, Vec<StrokeAnnotation>)> {
    let doc = roxmltree::Document::parse(document).map_err(|e| Error::Parse {
        line: e.pos().row as usize,
        message: e.to_string(),
    })?;
    let line_of = |node: roxmltree::Node<'_, '_>| doc.text_pos_at(node.range().start).row as usize;
    let root = doc.root_element();
    if root.tag_name().name() != schema.root {
        return Err(Error::Parse {
            line: line_of(root),
            message: format!("expected root element <{}>, found <{}>", schema.root, root.tag_name().name()),
        });
    }
    let name = root.attribute(schema.name.as_str()).ok_or_else(|| Error::Parse {
        line: line_of(root),
        message: format!("<{}> is missing the `{}` attribute", schema.root, schema.name),
    })?;

    let mut items = Vec::new();
    for node in root.children().filter(|n| n.is_element()) {
        let line = line_of(node);
        if node.tag_name().name() != schema.action {
            return Err(Error::Parse {
                line,
                message: format!("unexpected element <{}>", node.tag_name().name()),
            });
        }
        let frame = |attr: &str| -> Result<usize> {
            let raw = node.attribute(attr).ok_or_else(|| Error::Parse {
                line,
                message: format!("<{}> is missing the `{attr}` attribute", schema.action),
            })?;
            raw.trim().parse().map_err(|_| Error::Parse {
                line,
                message: format!("`{attr}` must be a non-negative integer, got {raw:?}"),
            })
        };
        let begin = frame(&schema.begin)?;
        let end = frame(&schema.end)?;
        if begin > end {
            return Err(Error::Parse {
                line,
                message: format!("begin {begin} is after end {end}"),
            });
        }
        let label = node.attribute(schema.label.as_str()).unwrap_or(DEFAULT_STROKE_LABEL).to_string();
        let score = match node.attribute(schema.score.as_str()) {
            None => None,
            Some(raw) => Some(raw.trim().parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("`{}` must be a number, got {raw:?}", schema.score),
            })?),
        };
        items.push((line, StrokeAnnotation { begin, end, label, score }));
    }

    items.sort_by_key(|(_, a)| (a.begin, a.end));
    for pair in items.windows(2) {
        let ((_, a), (line, b)) = (&pair[0], &pair[1]);
        if b.begin <= a.end {
            return Err(Error::Parse {
                line: *line,
                message: format!("action ({},{}) overlaps action ({},{})", b.begin, b.end, a.begin, a.end),
            });
        }
    }
    Ok((name.to_string(), items.into_iter().map(|(_, a)| a).collect()))
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

pub fn write_annotation_xml(video_id: &str, annotations: &[StrokeAnnotation]) -> String {
    write_annotation_xml_with(video_id, annotations, &AnnotationSchema::default())
}

/// Serializes annotations; scores are written with six decimals.
pub fn write_annotation_xml_with(video_id: &str, annotations: &[StrokeAnnotation], schema: &AnnotationSchema) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = write!(out, "<{} {}=\"{}\"", schema.root, schema.name, escape(video_id));
    if annotations.is_empty() {
        out.push_str("/>\n");
        return out;
    }
    out.push_str(">\n");
    for a in annotations {
        let _ = write!(
            out,
            "  <{} {}=\"{}\" {}=\"{}\" {}=\"{}\"",
            schema.action,
            schema.begin,
            a.begin,
            schema.end,
            a.end,
            schema.label,
            escape(&a.label)
        );
        if let Some(s) = a.score {
            let _ = write!(out, " {}=\"{s:.6}\"", schema.score);
        }
        out.push_str("/>\n");
    }
    let _ = writeln!(out, "</{}>", schema.root);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_video() {
        let (name, list) = parse_annotation_xml(r#"<video name="v1"></video>"#).unwrap();
        assert_eq!(name, "v1");
        assert!(list.is_empty());
    }

    #[test]
    fn single_action_maps_fields() {
        let (_, list) =
            parse_annotation_xml(r#"<video name="v1"><action begin="120" end="240" move="serve"/></video>"#).unwrap();
        assert_eq!(list, vec![StrokeAnnotation::new(120, 240, "serve")]);
    }

    #[test]
    fn missing_move_defaults_to_stroke() {
        let (_, list) = parse_annotation_xml(r#"<video name="v"><action begin="1" end="2"/></video>"#).unwrap();
        assert_eq!(list[0].label, DEFAULT_STROKE_LABEL);
    }

    #[test]
    fn actions_come_back_sorted() {
        let doc = r#"<video name="v"><action begin="50" end="60"/><action begin="1" end="2"/></video>"#;
        let (_, list) = parse_annotation_xml(doc).unwrap();
        assert_eq!((list[0].begin, list[1].begin), (1, 50));
    }

    #[test]
    fn overlap_reports_line() {
        let doc = "<video name=\"v\">\n<action begin=\"10\" end=\"20\"/>\n<action begin=\"15\" end=\"30\"/>\n</video>";
        match parse_annotation_xml(doc) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("overlaps"), "{message}");
            }
            other => panic!("expected overlap error, got {other:?}"),
        }
    }

    #[test]
    fn bad_documents_are_parse_errors() {
        for doc in [
            "<video name=\"v\">",
            "<clip name=\"v\"/>",
            "<video/>",
            "<video name=\"v\"><action end=\"3\"/></video>",
            "<video name=\"v\"><action begin=\"x\" end=\"3\"/></video>",
            "<video name=\"v\"><action begin=\"5\" end=\"3\"/></video>",
            "<video name=\"v\"><action begin=\"-1\" end=\"3\"/></video>",
        ] {
            assert!(matches!(parse_annotation_xml(doc), Err(Error::Parse { .. })), "{doc}");
        }
    }

    #[test]
    fn empty_list_writes_self_closing_root() {
        let xml = write_annotation_xml("abc", &[]);
        assert!(xml.contains("<video name=\"abc\"/>"));
        assert!(!xml.contains("action"));
    }

    #[test]
    fn scores_use_six_decimals() {
        let mut a = StrokeAnnotation::new(3, 9, "x");
        a.score = Some(0.5);
        assert!(write_annotation_xml("v", &[a]).contains("score=\"0.500000\""));
    }

    #[test]
    fn names_are_escaped() {
        let list = vec![StrokeAnnotation::new(0, 1, "a<&>\"'b")];
        let (name, back) = parse_annotation_xml(&write_annotation_xml("v&1", &list)).unwrap();
        assert_eq!(name, "v&1");
        assert_eq!(back, list);
    }

    #[test]
    fn custom_attribute_names() {
        let schema = AnnotationSchema {
            begin: "start".into(),
            end: "stop".into(),
            label: "class".into(),
            ..Default::default()
        };
        let doc = r#"<video name="v"><action start="4" stop="8" class="push"/></video>"#;
        let (_, list) = parse_annotation_xml_with(doc, &schema).unwrap();
        assert_eq!(list, vec![StrokeAnnotation::new(4, 8, "push")]);
        let again = write_annotation_xml_with("v", &list, &schema);
        assert_eq!(parse_annotation_xml_with(&again, &schema).unwrap().1, list);
    }
}
