//! Classification accuracy, confusion matrices, temporal-IoU matched
//! average precision and framewise IoU.
//!
//! Detection metrics follow one fixed convention: detections are matched
//! one-to-one in decreasing confidence (ties: earlier begin) to the
//! unmatched ground truth of the same video and class with the highest
//! temporal IoU, counting as true positives at IoU ≥ 0.5. AP is the area
//! under the monotone precision envelope (all-point interpolation).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::detect::{Detection, Segment};
use crate::error::{Error, Result};

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

pub fn accuracy(predictions: &[usize], truth: &[usize]) -> Result<f64> {
    if predictions.len() != truth.len() {
        return Err(Error::dim(format!(
            "{} predictions for {} ground-truth labels",
            predictions.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::config("accuracy of an empty set is undefined"));
    }
    let hits = predictions.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Counts with rows as ground truth and columns as predictions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub class_names: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

pub fn confusion_matrix(predictions: &[usize], truth: &[usize], class_names: &[String]) -> Result<ConfusionMatrix> {
    if predictions.len() != truth.len() {
        return Err(Error::dim("prediction and ground-truth lengths differ"));
    }
    let n = class_names.len();
    let mut counts = vec![vec![0u64; n]; n];
    for (&p, &t) in predictions.iter().zip(truth) {
        if p >= n || t >= n {
            return Err(Error::Index(format!("label {} is outside {n} classes", p.max(t))));
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix {
        class_names: class_names.to_vec(),
        counts,
    })
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.counts.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> Option<f64> {
        let total = self.total();
        (total > 0).then(|| self.trace() as f64 / total as f64)
    }

    /// Each row divided by its sum; empty rows stay zero.
    pub fn row_normalized(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| {
                let s: u64 = row.iter().sum();
                row.iter().map(|&c| if s == 0 { 0.0 } else { c as f64 / s as f64 }).collect()
            })
            .collect()
    }

    /// Header row of class names, then one count row per ground-truth class.
    pub fn to_csv(&self) -> String {
        let mut out = self.class_names.join(",");
        out.push('\n');
        for row in &self.counts {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse {
            line: 1,
            message: "missing header row".into(),
        })?;
        let class_names: Vec<String> = header.split(',').map(String::from).collect();
        let mut counts = Vec::new();
        for (i, line) in lines.enumerate() {
            let row = line
                .split(',')
                .map(|c| c.trim().parse::<u64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse {
                    line: i + 2,
                    message: e.to_string(),
                })?;
            if row.len() != class_names.len() {
                return Err(Error::Parse {
                    line: i + 2,
                    message: format!("expected {} counts, found {}", class_names.len(), row.len()),
                });
            }
            counts.push(row);
        }
        if counts.len() != class_names.len() {
            return Err(Error::Parse {
                line: counts.len() + 2,
                message: format!("expected {} rows, found {}", class_names.len(), counts.len()),
            });
        }
        Ok(Self { class_names, counts })
    }

    /// Row-normalized percentages as an aligned text table.
    pub fn render(&self) -> String {
        let width = self.class_names.iter().map(String::len).max().unwrap_or(0).max(6);
        let mut out = format!("{:>width$}", "");
        for name in &self.class_names {
            let _ = write!(out, " {name:>width$}");
        }
        out.push('\n');
        for (name, row) in self.class_names.iter().zip(self.row_normalized()) {
            let _ = write!(out, "{name:>width$}");
            for v in row {
                let _ = write!(out, " {:>width$.1}", 100.0 * v);
            }
            out.push('\n');
        }
        out
    }
}

/// IoU of inclusive frame intervals.
pub fn interval_iou(a: (usize, usize), b: (usize, usize)) -> f64 {
    let inter_lo = a.0.max(b.0);
    let inter_hi = a.1.min(b.1);
    let inter = if inter_hi >= inter_lo { inter_hi - inter_lo + 1 } else { 0 };
    let union = (a.1 - a.0 + 1) + (b.1 - b.0 + 1) - inter;
    inter as f64 / union as f64
}

pub fn temporal_iou(a: &Segment, b: &Segment) -> f64 {
    interval_iou((a.begin, a.end), (b.begin, b.end))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApResult {
    pub ap: f64,
    /// `(detection index, ground-truth index)` for every true positive.
    pub matches: Vec<(usize, usize)>,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

/// Order in which detections are matched.
pub fn ranking(dets: &[Segment]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| {
        dets[b]
            .confidence
            .total_cmp(&dets[a].confidence)
            .then(dets[a].begin.cmp(&dets[b].begin))
    });
    order
}

/// All-point interpolated AP from per-rank hit flags.
pub fn average_precision(hits: &[bool], num_gt: usize) -> f64 {
    if num_gt == 0 {
        return if hits.is_empty() { 1.0 } else { 0.0 };
    }
    let mut precision = Vec::with_capacity(hits.len());
    let mut recall = Vec::with_capacity(hits.len());
    let mut tp = 0usize;
    for (i, &h) in hits.iter().enumerate() {
        tp += h as usize;
        precision.push(tp as f64 / (i + 1) as f64);
        recall.push(tp as f64 / num_gt as f64);
    }
    for i in (0..precision.len().saturating_sub(1)).rev() {
        precision[i] = precision[i].max(precision[i + 1]);
    }
    let mut ap = 0.0;
    let mut prev = 0.0;
    for (p, r) in precision.iter().zip(&recall) {
        ap += (r - prev) * p;
        prev = *r;
    }
    ap
}

/// Matches detections to ground truth carrying the same key (typically the video).
pub fn match_and_ap_keyed<K: PartialEq>(dets: &[(K, Segment)], gts: &[(K, Segment)], threshold: f64) -> ApResult {
    let segs: Vec<Segment> = dets.iter().map(|(_, s)| *s).collect();
    let mut taken = vec![false; gts.len()];
    let mut hits = Vec::with_capacity(dets.len());
    let mut matches = Vec::new();
    for d in ranking(&segs) {
        let (key, seg) = &dets[d];
        let mut best: Option<(usize, f64)> = None;
        for (g, (gkey, gseg)) in gts.iter().enumerate() {
            if taken[g] || gkey != key {
                continue;
            }
            let iou = temporal_iou(seg, gseg);
            if best.is_none_or(|(_, b)| iou > b) {
                best = Some((g, iou));
            }
        }
        match best {
            Some((g, iou)) if iou >= threshold => {
                taken[g] = true;
                matches.push((d, g));
                hits.push(true);
            }
            _ => hits.push(false),
        }
    }
    let tp = matches.len();
    ApResult {
        ap: average_precision(&hits, gts.len()),
        matches,
        true_positives: tp,
        false_positives: dets.len() - tp,
        false_negatives: gts.len() - tp,
    }
}

/// Single-video matching and AP.
pub fn match_and_ap(dets: &[Segment], gts: &[Segment], threshold: f64) -> ApResult {
    let d: Vec<((), Segment)> = dets.iter().map(|s| ((), *s)).collect();
    let g: Vec<((), Segment)> = gts.iter().map(|s| ((), *s)).collect();
    match_and_ap_keyed(&d, &g, threshold)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MapResult {
    /// AP of every class present in the ground truth.
    pub per_class: BTreeMap<usize, f64>,
    pub map: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

/// Mean AP over the classes that occur in the ground truth.
pub fn mean_ap(detections: &[Detection], ground_truth: &[Detection], threshold: f64) -> Result<MapResult> {
    if ground_truth.is_empty() {
        return Err(Error::config("mAP needs at least one ground-truth segment"));
    }
    let classes: BTreeSet<usize> = ground_truth.iter().map(|g| g.segment.label).collect();
    let mut per_class = BTreeMap::new();
    let (mut tp, mut fp) = (0, 0);
    let mut fn_ = 0;
    for &c in &classes {
        let pick = |xs: &[Detection]| -> Vec<(String, Segment)> {
            xs.iter()
                .filter(|d| d.segment.label == c)
                .map(|d| (d.video.clone(), d.segment))
                .collect()
        };
        let r = match_and_ap_keyed(&pick(detections), &pick(ground_truth), threshold);
        per_class.insert(c, r.ap);
        tp += r.true_positives;
        fp += r.false_positives;
        fn_ += r.false_negatives;
    }
    // Detections of classes absent from the ground truth are still false positives.
    fp += detections.iter().filter(|d| !classes.contains(&d.segment.label)).count();
    let map = per_class.values().sum::<f64>() / per_class.len() as f64;
    Ok(MapResult {
        per_class,
        map,
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
    })
}

fn frame_mask(segments: &[Segment], len: usize) -> Vec<bool> {
    let mut mask = vec![false; len];
    for s in segments {
        mask[s.begin..=s.end].fill(true);
    }
    mask
}

/// IoU between the unions of predicted and ground-truth stroke frames of one video.
/// Both empty scores 1.
pub fn frame_iou(pred: &[Segment], gt: &[Segment]) -> f64 {
    let len = pred.iter().chain(gt).map(|s| s.end + 1).max().unwrap_or(0);
    let (p, g) = (frame_mask(pred, len), frame_mask(gt, len));
    let inter = p.iter().zip(&g).filter(|(a, b)| **a && **b).count();
    let union = p.iter().zip(&g).filter(|(a, b)| **a || **b).count();
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Per-video frame IoU averaged over every video that appears on either side.
pub fn global_frame_iou(pred: &BTreeMap<String, Vec<Segment>>, gt: &BTreeMap<String, Vec<Segment>>) -> Option<f64> {
    let videos: BTreeSet<&String> = pred.keys().chain(gt.keys()).collect();
    if videos.is_empty() {
        return None;
    }
    let empty = Vec::new();
    let total: f64 = videos
        .iter()
        .map(|v| frame_iou(pred.get(*v).unwrap_or(&empty), gt.get(*v).unwrap_or(&empty)))
        .sum();
    Some(total / videos.len() as f64)
}

/// Groups detections by video.
pub fn by_video(detections: &[Detection]) -> BTreeMap<String, Vec<Segment>> {
    let mut out: BTreeMap<String, Vec<Segment>> = BTreeMap::new();
    for d in detections {
        out.entry(d.video.clone()).or_default().push(d.segment);
    }
    out
}

/// Formats with nine significant digits, trimming trailing zeros.
pub fn format_sig9(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".into() } else { v.to_string() };
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        // Rounding can add a digit (e.g. 9.9999999995 → 10.00000000).
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" {
            "0".into()
        } else {
            s
        }
    } else {
        format!("{v:.8e}")
    }
}

/// Everything a classification or detection evaluation reports.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalReport {
    pub accuracy: Option<f64>,
    pub per_class_ap: BTreeMap<String, f64>,
    pub map: Option<f64>,
    pub frame_iou: Option<f64>,
    pub true_positives: Option<usize>,
    pub false_positives: Option<usize>,
    pub false_negatives: Option<usize>,
    pub confusion: Option<ConfusionMatrix>,
}

pub const METRICS_FILE: &str = "metrics.csv";
pub const CONFUSION_FILE: &str = "confusion.csv";
pub const REPORT_TEXT_FILE: &str = "report.txt";

impl EvalReport {
    /// `metric,value` lines.
    pub fn metrics_csv(&self) -> String {
        let mut out = String::from("metric,value\n");
        let mut row = |k: &str, v: String| {
            let _ = writeln!(out, "{k},{v}");
        };
        if let Some(a) = self.accuracy {
            row("accuracy", format_sig9(a));
        }
        if let Some(m) = self.map {
            row("map", format_sig9(m));
        }
        if let Some(f) = self.frame_iou {
            row("frame_iou", format_sig9(f));
        }
        for (k, v) in [
            ("tp", self.true_positives),
            ("fp", self.false_positives),
            ("fn", self.false_negatives),
        ] {
            if let Some(v) = v {
                row(k, v.to_string());
            }
        }
        for (class, ap) in &self.per_class_ap {
            row(&format!("ap:{class}"), format_sig9(*ap));
        }
        out
    }

    pub fn parse_metrics_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        if lines.next().map(|(_, h)| h.trim()) != Some("metric,value") {
            return Err(Error::Parse {
                line: 1,
                message: "expected header `metric,value`".into(),
            });
        }
        let mut r = EvalReport::default();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |message: String| Error::Parse { line: i + 1, message };
            let (key, value) = line.split_once(',').ok_or_else(|| bad("expected `metric,value`".into()))?;
            let num = || value.parse::<f64>().map_err(|_| bad(format!("bad value {value:?}")));
            let count = || value.parse::<usize>().map_err(|_| bad(format!("bad count {value:?}")));
            match key {
                "accuracy" => r.accuracy = Some(num()?),
                "map" => r.map = Some(num()?),
                "frame_iou" => r.frame_iou = Some(num()?),
                "tp" => r.true_positives = Some(count()?),
                "fp" => r.false_positives = Some(count()?),
                "fn" => r.false_negatives = Some(count()?),
                k => match k.strip_prefix("ap:") {
                    Some(class) => {
                        r.per_class_ap.insert(class.to_string(), num()?);
                    }
                    None => return Err(bad(format!("unknown metric {k:?}"))),
                },
            }
        }
        Ok(r)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(a) = self.accuracy {
            let _ = writeln!(out, "accuracy: {:.4}", a);
        }
        if let Some(m) = self.map {
            let _ = writeln!(
                out,
                "mAP: {m:.4} (temporal IoU >= 0.5, greedy one-to-one matching, all-point interpolation; internal convention)"
            );
        }
        if let Some(f) = self.frame_iou {
            let _ = writeln!(out, "frame IoU: {f:.4} (union of stroke frames per video, averaged over videos)");
        }
        if let (Some(tp), Some(fp), Some(fn_)) = (self.true_positives, self.false_positives, self.false_negatives) {
            let _ = writeln!(out, "TP {tp}  FP {fp}  FN {fn_}");
        }
        for (class, ap) in &self.per_class_ap {
            let _ = writeln!(out, "  AP {class}: {ap:.4}");
        }
        if let Some(c) = &self.confusion {
            out.push_str("\nconfusion (rows: truth, columns: prediction, %)\n");
            out.push_str(&c.render());
        }
        out
    }
}

/// Writes `metrics.csv`, `report.txt` and, for classification, `confusion.csv`.
pub fn write_report(report: &EvalReport, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let write = |name: &str, text: String| {
        let p = dir.join(name);
        fs::write(&p, text).map_err(|e| Error::io(&p, e))
    };
    write(METRICS_FILE, report.metrics_csv())?;
    write(REPORT_TEXT_FILE, report.render())?;
    if let Some(c) = &report.confusion {
        write(CONFUSION_FILE, c.to_csv())?;
    }
    Ok(())
}

pub fn read_report(dir: impl AsRef<Path>) -> Result<EvalReport> {
    let dir = dir.as_ref();
    let read = |name: &str| {
        let p = dir.join(name);
        fs::read_to_string(&p).map_err(|e| Error::io(&p, e))
    };
    let mut report = EvalReport::parse_metrics_csv(&read(METRICS_FILE)?)?;
    if dir.join(CONFUSION_FILE).exists() {
        report.confusion = Some(ConfusionMatrix::from_csv(&read(CONFUSION_FILE)?)?);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(b: usize, e: usize, c: f64) -> Segment {
        Segment::new(b, e, 1, c)
    }

    #[test]
    fn accuracy_cases() {
        assert_eq!(accuracy(&[1, 2, 3], &[1, 2, 3]).unwrap(), 1.0);
        assert_eq!(accuracy(&[0, 0], &[1, 1]).unwrap(), 0.0);
        assert_eq!(accuracy(&[1, 2, 3, 0], &[1, 2, 3, 4]).unwrap(), 0.75);
        assert!(accuracy(&[1], &[1, 2]).is_err());
        assert!(accuracy(&[], &[]).is_err());
    }

    #[test]
    fn confusion_cases() {
        let names: Vec<String> = (0..6).map(|i| format!("c{i}")).collect();
        let c = confusion_matrix(&[5], &[2], &names).unwrap();
        assert_eq!(c.counts[2][5], 1);
        assert_eq!(c.total(), 1);
        let c = confusion_matrix(&[0, 1, 2], &[0, 1, 2], &names).unwrap();
        assert_eq!(c.trace(), 3);
        assert!(confusion_matrix(&[6], &[0], &names).is_err());
        assert_eq!(ConfusionMatrix::from_csv(&c.to_csv()).unwrap(), c);
    }

    #[test]
    fn iou_cases() {
        assert_eq!(interval_iou((3, 9), (3, 9)), 1.0);
        assert_eq!(interval_iou((0, 9), (10, 19)), 0.0);
        assert_eq!(interval_iou((0, 100), (50, 150)), 51.0 / 151.0);
    }

    #[test]
    fn worked_ap_example() {
        let gts = [seg(0, 99, 1.0), seg(200, 299, 1.0)];
        // IoU 0.6 with the first GT, 0.4 with the first, 0.8 with the second.
        let dets = [seg(0, 59, 0.9), seg(0, 39, 0.8), seg(200, 279, 0.7)];
        assert!((temporal_iou(&dets[0], &gts[0]) - 0.6).abs() < 1e-12);
        assert!((temporal_iou(&dets[1], &gts[0]) - 0.4).abs() < 1e-12);
        assert!((temporal_iou(&dets[2], &gts[1]) - 0.8).abs() < 1e-12);
        let r = match_and_ap(&dets, &gts, 0.5);
        assert!((r.ap - (0.5 + 0.5 * 2.0 / 3.0)).abs() < 1e-12);
        assert_eq!(r.matches, vec![(0, 0), (2, 1)]);
        assert_eq!((r.true_positives, r.false_positives, r.false_negatives), (2, 1, 0));
    }

    #[test]
    fn degenerate_ap() {
        assert_eq!(match_and_ap(&[seg(0, 5, 0.3)], &[], 0.5).ap, 0.0);
        assert_eq!(match_and_ap(&[], &[], 0.5).ap, 1.0);
        assert_eq!(match_and_ap(&[], &[seg(0, 5, 1.0)], 0.5).ap, 0.0);
        let gts = [seg(0, 9, 1.0), seg(20, 29, 1.0)];
        assert_eq!(match_and_ap(&gts, &gts, 0.5).ap, 1.0);
    }

    #[test]
    fn detections_only_match_within_their_video() {
        let gt = vec![Detection { video: "a".into(), segment: seg(0, 9, 1.0) }];
        let det = vec![Detection { video: "b".into(), segment: seg(0, 9, 0.9) }];
        let r = mean_ap(&det, &gt, 0.5).unwrap();
        assert_eq!(r.map, 0.0);
        assert!(mean_ap(&det, &[], 0.5).is_err());
    }

    #[test]
    fn map_is_class_mean() {
        let mk = |v: &str, b, e, l, c| Detection {
            video: v.into(),
            segment: Segment::new(b, e, l, c),
        };
        let gt = vec![mk("a", 0, 9, 1, 1.0), mk("a", 20, 29, 2, 1.0), mk("a", 40, 49, 2, 1.0)];
        // Class 1 perfect; class 2: FP first then one TP: precision 0.5 at recall 0.5.
        let det = vec![mk("a", 0, 9, 1, 0.9), mk("a", 60, 69, 2, 0.9), mk("a", 20, 29, 2, 0.8)];
        let r = mean_ap(&det, &gt, 0.5).unwrap();
        assert_eq!(r.per_class[&1], 1.0);
        assert_eq!(r.per_class[&2], 0.25);
        assert_eq!(r.map, 0.625);
    }

    #[test]
    fn frame_iou_cases() {
        let mut p = BTreeMap::new();
        let mut g = BTreeMap::new();
        p.insert("v".to_string(), vec![seg(0, 99, 1.0)]);
        g.insert("v".to_string(), vec![seg(50, 149, 1.0)]);
        assert!((global_frame_iou(&p, &g).unwrap() - 50.0 / 150.0).abs() < 1e-15);
        assert_eq!(global_frame_iou(&g, &g), Some(1.0));
        assert_eq!(global_frame_iou(&BTreeMap::new(), &g), Some(0.0));
        assert_eq!(frame_iou(&[], &[]), 1.0);
    }

    #[test]
    fn sig9_formatting() {
        assert_eq!(format_sig9(0.833333333333), "0.833333333");
        assert_eq!(format_sig9(1.0), "1");
        assert_eq!(format_sig9(0.0), "0");
        assert_eq!(format_sig9(123.456), "123.456");
        assert_eq!(format_sig9(1.5e-7), "1.50000000e-7");
        assert_eq!(format_sig9(-0.25), "-0.25");
    }

    #[test]
    fn report_round_trip() {
        let names = vec!["negative".to_string(), "a".to_string()];
        let mut report = EvalReport {
            accuracy: Some(2.0 / 3.0),
            map: Some(0.123456789123),
            frame_iou: Some(0.5),
            true_positives: Some(3),
            false_positives: Some(1),
            false_negatives: Some(0),
            confusion: Some(confusion_matrix(&[0, 1, 1], &[0, 1, 0], &names).unwrap()),
            ..Default::default()
        };
        report.per_class_ap.insert("a".into(), 0.75);
        let dir = tempfile::tempdir().unwrap();
        write_report(&report, dir.path()).unwrap();
        let back = read_report(dir.path()).unwrap();
        assert!((back.accuracy.unwrap() - 2.0 / 3.0).abs() < 1e-9);
        assert!((back.map.unwrap() - 0.123456789).abs() < 1e-12);
        assert_eq!(back.per_class_ap, report.per_class_ap);
        assert_eq!(back.confusion, report.confusion);
        let c = back.confusion.unwrap();
        assert_eq!(c.counts.iter().map(|r| r.iter().sum::<u64>()).collect::<Vec<_>>(), vec![2, 1]);

        let empty = EvalReport::default();
        let dir = tempfile::tempdir().unwrap();
        write_report(&empty, dir.path()).unwrap();
        assert_eq!(fs::read_to_string(dir.path().join(METRICS_FILE)).unwrap(), "metric,value\n");
    }
}
