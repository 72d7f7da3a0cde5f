//! Automatic corpus filter: structural conformance, execution success and
//! OCR text verification.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::process::Command;

use rayon::prelude::*;
use serde_json::Value;

use crate::canonical::parse_numeric;
use crate::config::OcrConfig;
use crate::error::{Error, Result};
use crate::model::{
    ChartData, ChartInstance, ChartTypeSpec, FilterReport, JsonTemplate, KeyPath, PathProblem,
    ReasonCode, RenderStatus,
};

/// Outcome of a structural conformance check.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StructureCheck {
    pub ok: bool,
    pub missing: Vec<KeyPath>,
    /// `(path, problem)` for paths that resolve with the wrong kind.
    pub mismatched: Vec<(KeyPath, String)>,
    /// Top-level keys absent from the exemplar. Reported, never fatal.
    pub extra: Vec<String>,
}

impl StructureCheck {
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        if !self.missing.is_empty() {
            let m: Vec<&str> = self.missing.iter().map(KeyPath::as_str).collect();
            parts.push(format!("missing paths: {}", m.join(", ")));
        }
        for (p, why) in &self.mismatched {
            parts.push(format!("kind mismatch at `{p}`: {why}"));
        }
        if parts.is_empty() {
            "payload conforms".into()
        } else {
            parts.join("; ")
        }
    }
}

/// Checks `payload` against the template's required paths.
pub fn check_payload(payload: &Value, template: &JsonTemplate) -> StructureCheck {
    let mut out = StructureCheck::default();
    for rp in &template.required_paths {
        match rp.path.check(payload, rp.kind) {
            Ok(()) => {}
            Err(PathProblem::Missing) => out.missing.push(rp.path.clone()),
            Err(PathProblem::KindMismatch { expected, found }) => out.mismatched.push((
                rp.path.clone(),
                format!("expected {expected}, found {found}"),
            )),
        }
    }
    if let (Some(p), Some(e)) = (payload.as_object(), template.exemplar.as_object()) {
        out.extra = p.keys().filter(|k| !e.contains_key(*k)).cloned().collect();
    }
    out.ok = out.missing.is_empty() && out.mismatched.is_empty();
    out
}

pub fn check_structure(data: &ChartData, spec: &ChartTypeSpec) -> StructureCheck {
    check_payload(&data.payload, &spec.template)
}

/// Strings a faithful rendering must show: title, axis labels and
/// legend/category names. Numeric strings (tick labels) are left out.
pub fn expected_strings(payload: &Value, template: &JsonTemplate) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for path in template.text_paths() {
        for v in path.resolve(payload).unwrap_or_default() {
            let Some(s) = v.as_str() else { continue };
            let s = s.trim();
            if s.is_empty() || parse_numeric(s).is_some() {
                continue;
            }
            if seen.insert(s.to_lowercase()) {
                out.push(s.to_string());
            }
        }
    }
    out
}

/// Recognizes text in a rendered image.
pub trait OcrEngine: Send + Sync {
    fn recognize(&self, image: &Path) -> std::result::Result<Vec<String>, String>;
}

/// Reads the `<image>.txt` sidecar written next to each rendering.
#[derive(Debug, Clone, Copy, Default)]
pub struct SidecarOcr;

pub fn sidecar_path(image: &Path) -> PathBuf {
    let mut s = image.as_os_str().to_os_string();
    s.push(".txt");
    PathBuf::from(s)
}

impl OcrEngine for SidecarOcr {
    fn recognize(&self, image: &Path) -> std::result::Result<Vec<String>, String> {
        let text = std::fs::read_to_string(sidecar_path(image))
            .map_err(|e| format!("sidecar unreadable: {e}"))?;
        Ok(text.lines().map(str::to_string).collect())
    }
}

/// Runs an external OCR command with the image path appended; each stdout
/// line is one recognized string.
#[derive(Debug, Clone)]
pub struct CommandOcr {
    pub command: Vec<String>,
}

impl OcrEngine for CommandOcr {
    fn recognize(&self, image: &Path) -> std::result::Result<Vec<String>, String> {
        let (prog, args) = self.command.split_first().ok_or("empty OCR command")?;
        let out = Command::new(prog)
            .args(args)
            .arg(image)
            .output()
            .map_err(|e| format!("cannot run OCR command `{prog}`: {e}"))?;
        if !out.status.success() {
            return Err(format!("OCR command exited with {}", out.status));
        }
        Ok(String::from_utf8_lossy(&out.stdout)
            .lines()
            .map(str::to_string)
            .collect())
    }
}

pub fn ocr_engine(cfg: &OcrConfig) -> Box<dyn OcrEngine> {
    match cfg {
        OcrConfig::Sidecar => Box::new(SidecarOcr),
        OcrConfig::Command { command } => Box::new(CommandOcr {
            command: command.clone(),
        }),
    }
}

/// Fraction of expected strings found (case-insensitive containment) in
/// the OCR output. An empty expected set scores 1.
pub fn ocr_score(expected: &[String], recognized: &[String]) -> f64 {
    if expected.is_empty() {
        return 1.0;
    }
    let haystack = recognized.join("\n").to_lowercase();
    let matched = expected
        .iter()
        .filter(|s| haystack.contains(&s.to_lowercase()))
        .count();
    matched as f64 / expected.len() as f64
}

/// Scores one rendered instance. `Err` carries the unreadable-image reason.
pub fn check_ocr(
    instance: &ChartInstance,
    data: &ChartData,
    spec: &ChartTypeSpec,
    engine: &dyn OcrEngine,
    root: &Path,
) -> std::result::Result<f64, String> {
    let image = instance
        .image_ref
        .as_ref()
        .ok_or_else(|| format!("instance {} has no image", instance.id))?;
    let expected = expected_strings(&data.payload, &spec.template);
    let recognized = engine.recognize(&root.join(image))?;
    Ok(ocr_score(&expected, &recognized))
}

/// Evaluates every instance independently.
pub fn filter_corpus(
    instances: &[ChartInstance],
    data: &[ChartData],
    specs: &[ChartTypeSpec],
    threshold: f64,
    engine: &dyn OcrEngine,
    root: &Path,
) -> Result<Vec<ChartInstance>> {
    let data: HashMap<&str, &ChartData> = data.iter().map(|d| (d.id.as_str(), d)).collect();
    let specs: HashMap<&str, &ChartTypeSpec> = specs.iter().map(|s| (s.name.as_str(), s)).collect();
    instances
        .par_iter()
        .map(|inst| {
            let d = data
                .get(inst.data_id.as_str())
                .ok_or_else(|| Error::Unresolved(format!("data `{}`", inst.data_id)))?;
            let spec = specs
                .get(inst.chart_type.as_str())
                .ok_or_else(|| Error::Unresolved(format!("chart type `{}`", inst.chart_type)))?;
            let mut out = inst.clone();
            out.filter = Some(evaluate_instance(inst, d, spec, threshold, engine, root));
            Ok(out)
        })
        .collect()
}

fn evaluate_instance(
    inst: &ChartInstance,
    data: &ChartData,
    spec: &ChartTypeSpec,
    threshold: f64,
    engine: &dyn OcrEngine,
    root: &Path,
) -> FilterReport {
    let mut reasons = Vec::new();
    let structure_ok = check_structure(data, spec).ok;
    if !structure_ok {
        reasons.push(ReasonCode::Structure);
    }
    let exec_ok = inst.render_status == RenderStatus::Ok;
    match inst.render_status {
        RenderStatus::Ok => {}
        RenderStatus::Timeout => reasons.push(ReasonCode::Timeout),
        RenderStatus::BadImage => reasons.push(ReasonCode::BadImage),
        RenderStatus::ExecError | RenderStatus::Pending => reasons.push(ReasonCode::Exec),
    }
    let score = if exec_ok {
        match check_ocr(inst, data, spec, engine, root) {
            Ok(s) => {
                if s < threshold {
                    reasons.push(ReasonCode::Ocr);
                }
                s
            }
            Err(e) => {
                log::debug!("{}: {e}", inst.id);
                reasons.push(ReasonCode::OcrUnreadable);
                0.0
            }
        }
    } else {
        0.0
    };
    FilterReport::new(structure_ok, exec_ok, score, threshold, reasons)
}

/// Re-applies the verdict rule at another threshold without re-running OCR.
pub fn rethreshold(report: &FilterReport, threshold: f64) -> FilterReport {
    let mut reasons: Vec<ReasonCode> = report
        .reasons
        .iter()
        .copied()
        .filter(|r| *r != ReasonCode::Ocr)
        .collect();
    if report.exec_ok
        && !reasons.contains(&ReasonCode::OcrUnreadable)
        && report.ocr_score < threshold
    {
        reasons.push(ReasonCode::Ocr);
    }
    FilterReport::new(
        report.structure_ok,
        report.exec_ok,
        report.ocr_score,
        threshold,
        reasons,
    )
}

/// Rejection-reason counts over filtered instances.
pub fn reason_histogram(instances: &[ChartInstance]) -> BTreeMap<String, usize> {
    let mut h = BTreeMap::new();
    for r in instances.iter().filter_map(|i| i.filter.as_ref()) {
        for code in &r.reasons {
            *h.entry(code.as_str().to_string()).or_insert(0) += 1;
        }
    }
    h
}
