//! Reads and writes stroke annotations, including a custom element layout.

use strokebench::data::{parse_annotation_xml, parse_annotation_xml_with, write_annotation_xml, AnnotationSchema};

pub fn run() -> strokebench::Result<()> {
    let doc = r#"<?xml version="1.0"?>
<video name="match_07">
  <action begin="120" end="215" move="forehand_loop"/>
  <action begin="300" end="361" move="backhand_push"/>
</video>"#;
    let (id, strokes) = parse_annotation_xml(doc)?;
    println!("{id}: {} strokes", strokes.len());
    for s in &strokes {
        println!("  {:<14} {:>4}..{:<4} ({} frames)", s.label, s.begin, s.end, s.frames());
    }
    print!("{}", write_annotation_xml(&id, &strokes));

    let schema = AnnotationSchema {
        root: "clip".into(),
        action: "stroke".into(),
        label: "class".into(),
        ..Default::default()
    };
    let other = r#"<clip name="c1"><stroke begin="5" end="40" class="serve"/></clip>"#;
    let (id, strokes) = parse_annotation_xml_with(other, &schema)?;
    println!("{id}: {:?}", strokes);

    match parse_annotation_xml(r#"<video name="x"><action begin="9" end="3" move="a"/></video>"#) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => println!("unexpectedly accepted"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> strokebench::Result<()> {
    run()
}
