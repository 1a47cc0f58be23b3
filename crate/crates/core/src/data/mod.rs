//! Annotations, raw videos, clips and synthetic datasets.

mod annotation;
mod clip;
mod dataset;
mod synth;
mod video;

pub use annotation::{
    parse_annotation_xml, parse_annotation_xml_with, write_annotation_xml, write_annotation_xml_with,
    AnnotationSchema, StrokeAnnotation, DEFAULT_STROKE_LABEL,
};
pub use clip::{
    augment_clip, augment_with, clip_start, clip_tensor, extract_clip, mine_negative_segments, Clip,
    MAX_ROTATION_DEG, NEGATIVE_LABEL,
};
pub use dataset::{
    class_index, parse_manifest, read_class_names, read_manifest, write_manifest, ClipItem, ClipSet, Dataset,
    LabeledVideo, ManifestEntry, Split, CLASSES_FILE, MANIFEST_FILE,
};
pub use synth::{synth_class_names, synth_dataset, synth_video, SynthConfig};
pub use video::{
    decode_raw_video, encode_raw_video, read_raw_video, resize_frames, resize_video, resized_height,
    write_raw_video, RawVideo,
};
