//! Shared domain types.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::canonical::{content_id, to_canonical_string};

/// Top-level keys every template must carry.
pub const TITLE_KEY: &str = "title";
pub const X_AXIS_KEY: &str = "x_axis";
pub const Y_AXIS_KEY: &str = "y_axis";
/// Conventional location of category names for series-style charts.
pub const CATEGORIES_PATH: &str = "x_axis.categories";
/// Key naming the row inside each data-section entry.
pub const ROW_LABEL_KEY: &str = "label";

/// Placeholders a render script must use for its two positional arguments.
pub const DATA_ARG_PLACEHOLDER: &str = "sys.argv[1]";
pub const OUT_ARG_PLACEHOLDER: &str = "sys.argv[2]";

/// Number of QAs per data file and their split across levels.
pub const QAS_PER_DATA: usize = 17;
pub const QA_PLAN: [(QaLevel, usize); 5] = [
    (QaLevel::Description, 1),
    (QaLevel::Summary, 1),
    (QaLevel::Literal, 5),
    (QaLevel::Inferential, 5),
    (QaLevel::Reasoning, 5),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueKind {
    String,
    Number,
    Array,
    Object,
}

impl ValueKind {
    pub fn of(value: &Value) -> Option<ValueKind> {
        match value {
            Value::String(_) => Some(ValueKind::String),
            Value::Number(_) => Some(ValueKind::Number),
            Value::Array(_) => Some(ValueKind::Array),
            Value::Object(_) => Some(ValueKind::Object),
            Value::Null | Value::Bool(_) => None,
        }
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ValueKind::String => "string",
            ValueKind::Number => "number",
            ValueKind::Array => "array",
            ValueKind::Object => "object",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    Key(String),
    Each,
}

/// Dotted key path. A `[]` suffix on a segment fans out over every element
/// of the array at that position, e.g. `data[].label`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KeyPath(String);

/// Why a path failed to resolve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathProblem {
    Missing,
    KindMismatch { expected: ValueKind, found: String },
}

impl KeyPath {
    pub fn new(path: impl Into<String>) -> Self {
        KeyPath(path.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// First key of the path.
    pub fn top_level(&self) -> &str {
        let first = self.0.split('.').next().unwrap_or("");
        first.trim_end_matches("[]")
    }

    fn segments(&self) -> Vec<Segment> {
        let mut out = Vec::new();
        for part in self.0.split('.') {
            let mut name = part;
            let mut each = 0;
            while let Some(stripped) = name.strip_suffix("[]") {
                name = stripped;
                each += 1;
            }
            if !name.is_empty() {
                out.push(Segment::Key(name.to_string()));
            }
            out.extend(std::iter::repeat_n(Segment::Each, each));
        }
        out
    }

    /// All values the path reaches. `None` if some step is missing or a
    /// fan-out hits a non-array.
    pub fn resolve<'a>(&self, root: &'a Value) -> Option<Vec<&'a Value>> {
        let mut current = vec![root];
        for seg in self.segments() {
            let mut next = Vec::with_capacity(current.len());
            for v in current {
                match &seg {
                    Segment::Key(k) => next.push(v.as_object()?.get(k)?),
                    Segment::Each => next.extend(v.as_array()?.iter()),
                }
            }
            current = next;
        }
        Some(current)
    }

    /// Checks that the path resolves and every reached value has `kind`.
    pub fn check(&self, root: &Value, kind: ValueKind) -> Result<(), PathProblem> {
        let values = self.resolve(root).ok_or(PathProblem::Missing)?;
        for v in values {
            if ValueKind::of(v) != Some(kind) {
                return Err(PathProblem::KindMismatch {
                    expected: kind,
                    found: ValueKind::of(v).map(|k| k.to_string()).unwrap_or_else(|| {
                        if v.is_null() { "null" } else { "boolean" }.to_string()
                    }),
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for KeyPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequiredPath {
    pub path: KeyPath,
    pub kind: ValueKind,
}

impl RequiredPath {
    pub fn new(path: &str, kind: ValueKind) -> Self {
        RequiredPath {
            path: KeyPath::new(path),
            kind,
        }
    }
}

/// Canonical JSON document for a chart type plus the paths every payload
/// of that type must carry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonTemplate {
    pub exemplar: Value,
    pub required_paths: Vec<RequiredPath>,
    pub data_section_path: KeyPath,
}

impl JsonTemplate {
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut problems = Vec::new();
        let Some(obj) = self.exemplar.as_object() else {
            return Err(vec!["exemplar is not a JSON object".to_string()]);
        };
        for key in [TITLE_KEY, X_AXIS_KEY, Y_AXIS_KEY] {
            if !obj.contains_key(key) {
                problems.push(format!("exemplar lacks `{key}`"));
            }
        }
        match self.data_section_path.resolve(&self.exemplar) {
            Some(v) if !v.is_empty() => {}
            _ => problems.push(format!(
                "data section `{}` does not resolve in exemplar",
                self.data_section_path
            )),
        }
        if self.required_paths.is_empty() {
            problems.push("no required paths".to_string());
        }
        for rp in &self.required_paths {
            if let Err(p) = rp.path.check(&self.exemplar, rp.kind) {
                problems.push(format!("required path `{}`: {p:?}", rp.path));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems)
        }
    }

    /// Required paths whose values are drawn as text on a chart.
    pub fn text_paths(&self) -> impl Iterator<Item = &KeyPath> {
        self.required_paths
            .iter()
            .filter(|rp| rp.kind == ValueKind::String)
            .map(|rp| &rp.path)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartTypeSpec {
    pub name: String,
    pub template: JsonTemplate,
    pub readme: String,
}

impl ChartTypeSpec {
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut problems = Vec::new();
        if self.name.trim().is_empty() {
            problems.push("empty chart type name".to_string());
        }
        if let Err(mut p) = self.template.validate() {
            problems.append(&mut p);
        }
        if self.readme.trim().is_empty() {
            problems.push("empty README".to_string());
        }
        if let Some(obj) = self.template.exemplar.as_object() {
            for key in obj.keys() {
                if !self.readme.contains(key.as_str()) {
                    problems.push(format!("README does not mention `{key}`"));
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QaLevel {
    Description,
    Summary,
    Literal,
    Inferential,
    Reasoning,
}

impl QaLevel {
    pub const LEVELED: [QaLevel; 3] = [QaLevel::Literal, QaLevel::Inferential, QaLevel::Reasoning];

    /// Literal, inferential and reasoning QAs carry a short answer and are
    /// scored for accuracy.
    pub fn is_leveled(self) -> bool {
        matches!(
            self,
            QaLevel::Literal | QaLevel::Inferential | QaLevel::Reasoning
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            QaLevel::Description => "description",
            QaLevel::Summary => "summary",
            QaLevel::Literal => "literal",
            QaLevel::Inferential => "inferential",
            QaLevel::Reasoning => "reasoning",
        }
    }
}

impl fmt::Display for QaLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QAPair {
    pub level: QaLevel,
    pub question: String,
    pub answer_long: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer_short: Option<String>,
}

impl QAPair {
    pub fn validate(&self) -> Result<(), String> {
        if self.question.trim().is_empty() {
            return Err("empty question".into());
        }
        if self.answer_long.trim().is_empty() {
            return Err("empty long answer".into());
        }
        if self.level.is_leveled()
            && self
                .answer_short
                .as_deref()
                .is_none_or(|s| s.trim().is_empty())
        {
            return Err(format!("{} QA lacks a short answer", self.level));
        }
        Ok(())
    }
}

/// Checks the 1/1/5/5/5 split.
pub fn check_qa_plan(qas: &[QAPair]) -> Result<(), String> {
    if qas.len() != QAS_PER_DATA {
        return Err(format!("expected {QAS_PER_DATA} QAs, found {}", qas.len()));
    }
    for (level, want) in QA_PLAN {
        let got = qas.iter().filter(|q| q.level == level).count();
        if got != want {
            return Err(format!("expected {want} {level} QAs, found {got}"));
        }
    }
    for (i, qa) in qas.iter().enumerate() {
        qa.validate().map_err(|e| format!("QA {i}: {e}"))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartData {
    pub id: String,
    pub chart_type: String,
    pub topic: String,
    pub payload: Value,
    pub qas: Vec<QAPair>,
}

impl ChartData {
    /// Id for a (chart type, payload) pair.
    pub fn content_id(chart_type: &str, payload: &Value) -> String {
        content_id(&["data", chart_type, &to_canonical_string(payload)])
    }

    pub fn description(&self) -> Option<&QAPair> {
        self.qas.iter().find(|q| q.level == QaLevel::Description)
    }
}

/// Visual variation of one render script.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StyleDescriptor {
    pub color_scheme: String,
    pub legend: String,
    pub grid: String,
    pub font: String,
    pub mark_texture: String,
    pub annotated: bool,
}

impl StyleDescriptor {
    pub fn validate(&self) -> Result<(), String> {
        for (name, tok) in [
            ("color_scheme", &self.color_scheme),
            ("legend", &self.legend),
            ("grid", &self.grid),
            ("font", &self.font),
            ("mark_texture", &self.mark_texture),
        ] {
            if tok.trim().is_empty() {
                return Err(format!("empty style token `{name}`"));
            }
            if tok.chars().any(char::is_whitespace) {
                return Err(format!("style token `{name}` contains whitespace"));
            }
        }
        Ok(())
    }
}

/// The only supported calling convention: `script DATA_JSON OUT_PNG`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IoContract {
    #[default]
    DataJsonThenOutPng,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderScript {
    pub id: String,
    pub chart_type: String,
    pub backend_name: String,
    pub style: StyleDescriptor,
    pub source: String,
    pub io_contract: IoContract,
}

impl RenderScript {
    pub fn content_id(chart_type: &str, source: &str) -> String {
        content_id(&["script", chart_type, source])
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.source.trim().is_empty() {
            return Err("empty source".into());
        }
        self.style.validate()?;
        check_io_placeholders(&self.source)
    }
}

/// A script honours the I/O contract textually when it references both
/// positional arguments.
pub fn check_io_placeholders(source: &str) -> Result<(), String> {
    for p in [DATA_ARG_PLACEHOLDER, OUT_ARG_PLACEHOLDER] {
        if !source.contains(p) {
            return Err(format!("script does not reference `{p}`"));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenderStatus {
    Pending,
    Ok,
    ExecError,
    Timeout,
    BadImage,
}

impl RenderStatus {
    pub fn is_terminal(self) -> bool {
        self != RenderStatus::Pending
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RenderStatus::Pending => "pending",
            RenderStatus::Ok => "ok",
            RenderStatus::ExecError => "exec_error",
            RenderStatus::Timeout => "timeout",
            RenderStatus::BadImage => "bad_image",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accept,
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReasonCode {
    Structure,
    Exec,
    Timeout,
    BadImage,
    Ocr,
    OcrUnreadable,
}

impl ReasonCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ReasonCode::Structure => "structure",
            ReasonCode::Exec => "exec",
            ReasonCode::Timeout => "timeout",
            ReasonCode::BadImage => "bad_image",
            ReasonCode::Ocr => "ocr",
            ReasonCode::OcrUnreadable => "ocr_unreadable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub structure_ok: bool,
    pub exec_ok: bool,
    pub ocr_score: f64,
    pub verdict: Verdict,
    pub reasons: Vec<ReasonCode>,
}

impl FilterReport {
    pub fn new(
        structure_ok: bool,
        exec_ok: bool,
        ocr_score: f64,
        threshold: f64,
        reasons: Vec<ReasonCode>,
    ) -> Self {
        let verdict = if structure_ok && exec_ok && ocr_score >= threshold {
            Verdict::Accept
        } else {
            Verdict::Reject
        };
        FilterReport {
            structure_ok,
            exec_ok,
            ocr_score,
            verdict,
            reasons,
        }
    }

    pub fn accepted(&self) -> bool {
        self.verdict == Verdict::Accept
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartInstance {
    pub id: String,
    pub data_id: String,
    pub script_id: String,
    pub chart_type: String,
    pub image_ref: Option<String>,
    pub render_status: RenderStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stderr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<FilterReport>,
}

impl ChartInstance {
    pub fn pending(data_id: &str, script_id: &str, chart_type: &str) -> Self {
        ChartInstance {
            id: content_id(&["instance", data_id, script_id]),
            data_id: data_id.to_string(),
            script_id: script_id.to_string(),
            chart_type: chart_type.to_string(),
            image_ref: None,
            render_status: RenderStatus::Pending,
            stderr: None,
            filter: None,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.image_ref.is_some() != (self.render_status == RenderStatus::Ok) {
            return Err(format!(
                "image_ref presence does not match status {}",
                self.render_status.as_str()
            ));
        }
        Ok(())
    }

    pub fn accepted(&self) -> bool {
        self.filter.as_ref().is_some_and(FilterReport::accepted)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn key_path_fans_out_over_arrays() {
        let v =
            json!({"data": [{"label": "a"}, {"label": "b"}], "x_axis": {"categories": ["p", "q"]}});
        let labels = KeyPath::new("data[].label").resolve(&v).unwrap();
        assert_eq!(labels, vec![&json!("a"), &json!("b")]);
        assert_eq!(
            KeyPath::new("x_axis.categories[]")
                .resolve(&v)
                .unwrap()
                .len(),
            2
        );
        assert!(KeyPath::new("y_axis.label").resolve(&v).is_none());
        assert_eq!(KeyPath::new("data[].label").top_level(), "data");
    }

    #[test]
    fn key_path_kind_check() {
        let v = json!({"data": 3});
        assert_eq!(
            KeyPath::new("data").check(&v, ValueKind::Array),
            Err(PathProblem::KindMismatch {
                expected: ValueKind::Array,
                found: "number".into()
            })
        );
        assert_eq!(
            KeyPath::new("nope").check(&v, ValueKind::Array),
            Err(PathProblem::Missing)
        );
    }

    #[test]
    fn qa_validation_requires_short_answers_on_leveled() {
        let qa = QAPair {
            level: QaLevel::Literal,
            question: "q".into(),
            answer_long: "a".into(),
            answer_short: None,
        };
        assert!(qa.validate().is_err());
        let qa = QAPair {
            level: QaLevel::Summary,
            ..qa
        };
        assert!(qa.validate().is_ok());
    }

    #[test]
    fn instance_image_iff_ok() {
        let mut inst = ChartInstance::pending("d", "s", "bar");
        assert!(inst.validate().is_ok());
        inst.render_status = RenderStatus::Ok;
        assert!(inst.validate().is_err());
        inst.image_ref = Some("images/x.png".into());
        assert!(inst.validate().is_ok());
    }

    #[test]
    fn style_annotated_is_never_defaulted() {
        let text = r#"{"color_scheme":"a","legend":"b","grid":"c","font":"d","mark_texture":"e"}"#;
        assert!(serde_json::from_str::<StyleDescriptor>(text).is_err());
    }

    #[test]
    fn filter_verdict_rule() {
        let r = FilterReport::new(true, true, 0.6, 0.6, vec![]);
        assert!(r.accepted());
        let r = FilterReport::new(true, true, 0.59, 0.6, vec![ReasonCode::Ocr]);
        assert!(!r.accepted());
        let r = FilterReport::new(false, true, 1.0, 0.0, vec![ReasonCode::Structure]);
        assert!(!r.accepted());
    }
}
