//! Template, data and code generation behind one backend interface.
//!
//! [`Forge`] drives an [`ExpertBackend`]: it builds requests, parses and
//! validates raw responses, re-prompts with the validation error on failure,
//! and counts every backend call. Data and code generation never see each
//! other's outputs.

pub mod bank;
pub mod offline;
pub mod qa;
pub mod remote;
pub mod style;

use std::collections::HashSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::canonical::{normalize_value, sha256_hex};
use crate::config::BackendKind;
use crate::error::{Error, Result};
use crate::filter::check_payload;
use crate::model::{
    check_io_placeholders, check_qa_plan, ChartData, ChartTypeSpec, IoContract, JsonTemplate,
    QAPair, RenderScript, StyleDescriptor,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    JsonExpert,
    DataExpert,
    CodeExpert,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::JsonExpert => "json_expert",
            Role::DataExpert => "data_expert",
            Role::CodeExpert => "code_expert",
        }
    }
}

/// One request to an expert backend.
#[derive(Debug, Clone, Serialize)]
pub struct GenerationRequest<'a> {
    pub role: Role,
    pub chart_type: String,
    /// Template and README (data and code roles).
    pub spec: Option<&'a ChartTypeSpec>,
    pub topic: Option<&'a str>,
    pub style: Option<&'a StyleDescriptor>,
    pub library: Option<&'a str>,
    /// Candidate index within the batch.
    pub index: usize,
    pub count: usize,
    pub attempt: u32,
    /// Validation error from the previous attempt.
    pub feedback: Option<String>,
}

impl GenerationRequest<'_> {
    pub fn validate(&self) -> Result<(), String> {
        if self.count < 1 {
            return Err("count must be at least 1".into());
        }
        if matches!(self.role, Role::DataExpert | Role::CodeExpert) && self.spec.is_none() {
            return Err(format!(
                "{} request lacks template and README",
                self.role.as_str()
            ));
        }
        if self.role == Role::DataExpert && self.topic.is_none() {
            return Err("data request lacks a topic".into());
        }
        if self.role == Role::CodeExpert && self.style.is_none() {
            return Err("code request lacks a style".into());
        }
        Ok(())
    }
}

/// Produces raw text for a request. Implementations must be safe to call
/// from several threads at once.
pub trait ExpertBackend: Send + Sync {
    fn kind(&self) -> BackendKind;
    fn complete(&self, request: &GenerationRequest<'_>) -> Result<String>;
}

/// Per-role backend call counts.
#[derive(Debug, Default)]
pub struct CallCounter {
    template: AtomicUsize,
    data: AtomicUsize,
    code: AtomicUsize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallStats {
    pub template: usize,
    pub data: usize,
    pub code: usize,
}

impl CallStats {
    pub fn total(&self) -> usize {
        self.template + self.data + self.code
    }
}

impl CallCounter {
    fn bump(&self, role: Role) {
        let c = match role {
            Role::JsonExpert => &self.template,
            Role::DataExpert => &self.data,
            Role::CodeExpert => &self.code,
        };
        c.fetch_add(1, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> CallStats {
        CallStats {
            template: self.template.load(Ordering::Relaxed),
            data: self.data.load(Ordering::Relaxed),
            code: self.code.load(Ordering::Relaxed),
        }
    }
}

/// Result of a data-generation batch.
#[derive(Debug, Clone)]
pub struct DataBatch {
    pub data: Vec<ChartData>,
    pub requested: usize,
    /// Candidates that failed validation (each retry counts once).
    pub rejected: usize,
}

impl DataBatch {
    pub fn shortfall(&self) -> usize {
        self.requested - self.data.len()
    }
}

pub struct Forge {
    backend: Arc<dyn ExpertBackend>,
    max_retries: u32,
    data_floor: f64,
    unannotated_fraction: f64,
    calls: CallCounter,
}

/// Extracts the body of the first fenced code block, or the whole text.
pub fn strip_fences(raw: &str) -> &str {
    let Some(start) = raw.find("```") else {
        return raw.trim();
    };
    let after = &raw[start + 3..];
    let body_start = after.find('\n').map_or(0, |i| i + 1);
    let body = &after[body_start..];
    match body.find("```") {
        Some(end) => body[..end].trim(),
        None => body.trim(),
    }
}

fn parse_json_object(raw: &str) -> Result<Value, String> {
    let text = strip_fences(raw);
    let start = text.find('{').ok_or("response contains no JSON object")?;
    let end = text.rfind('}').ok_or("response contains no JSON object")?;
    serde_json::from_str(&text[start..=end]).map_err(|e| format!("invalid JSON: {e}"))
}

#[derive(Deserialize)]
struct TemplateResponse {
    exemplar: Value,
    required_paths: Vec<crate::model::RequiredPath>,
    data_section_path: crate::model::KeyPath,
    readme: String,
}

#[derive(Deserialize)]
struct DataResponse {
    payload: Value,
    qas: Vec<QAPair>,
}

/// Parses and validates a JSON-expert response.
pub fn parse_template_response(chart_type: &str, raw: &str) -> Result<ChartTypeSpec, String> {
    let v = parse_json_object(raw)?;
    let r: TemplateResponse =
        serde_json::from_value(v).map_err(|e| format!("malformed template response: {e}"))?;
    let spec = ChartTypeSpec {
        name: chart_type.to_string(),
        template: JsonTemplate {
            exemplar: normalize_value(&r.exemplar),
            required_paths: r.required_paths,
            data_section_path: r.data_section_path,
        },
        readme: r.readme,
    };
    spec.validate().map_err(|p| p.join("; "))?;
    Ok(spec)
}

/// Parses and validates a data-expert response against `spec`.
pub fn parse_data_response(
    spec: &ChartTypeSpec,
    topic: &str,
    raw: &str,
) -> Result<ChartData, String> {
    let v = parse_json_object(raw)?;
    let r: DataResponse =
        serde_json::from_value(v).map_err(|e| format!("malformed data response: {e}"))?;
    let payload = normalize_value(&r.payload);
    let check = check_payload(&payload, &spec.template);
    if !check.ok {
        return Err(check.describe());
    }
    check_qa_plan(&r.qas)?;
    Ok(ChartData {
        id: ChartData::content_id(&spec.name, &payload),
        chart_type: spec.name.clone(),
        topic: topic.to_string(),
        payload,
        qas: r.qas,
    })
}

/// Parses and validates a code-expert response.
pub fn parse_code_response(
    spec: &ChartTypeSpec,
    library: &str,
    style: &StyleDescriptor,
    raw: &str,
) -> Result<RenderScript, String> {
    let source = strip_fences(raw).to_string() + "\n";
    if source.trim().is_empty() {
        return Err("empty program".into());
    }
    check_io_placeholders(&source)?;
    let script = RenderScript {
        id: RenderScript::content_id(&spec.name, &source),
        chart_type: spec.name.clone(),
        backend_name: library.to_string(),
        style: style.clone(),
        source,
        io_contract: IoContract::DataJsonThenOutPng,
    };
    script.validate()?;
    Ok(script)
}

/// 64-bit seed derived from labelled parts.
pub fn derive_seed(parts: &[&str]) -> u64 {
    let digest = sha256_hex(parts);
    u64::from_str_radix(&digest[..16], 16).expect("hex digest")
}

impl Forge {
    pub fn new(backend: Arc<dyn ExpertBackend>) -> Self {
        Forge {
            backend,
            max_retries: 3,
            data_floor: 0.8,
            unannotated_fraction: 0.5,
            calls: CallCounter::default(),
        }
    }

    pub fn with_max_retries(mut self, retries: u32) -> Self {
        self.max_retries = retries;
        self
    }

    pub fn with_data_floor(mut self, floor: f64) -> Self {
        self.data_floor = floor;
        self
    }

    pub fn with_unannotated_fraction(mut self, fraction: f64) -> Self {
        self.unannotated_fraction = fraction;
        self
    }

    pub fn calls(&self) -> CallStats {
        self.calls.snapshot()
    }

    pub fn backend_kind(&self) -> BackendKind {
        self.backend.kind()
    }

    fn call(&self, req: &GenerationRequest<'_>) -> Result<String> {
        req.validate().map_err(Error::Transport)?;
        self.calls.bump(req.role);
        self.backend.complete(req)
    }

    /// Runs attempts `first..=first + max_retries` until `parse` accepts.
    fn attempt<T>(
        &self,
        mut req: GenerationRequest<'_>,
        first: u32,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<Result<T, (String, String)>> {
        let mut last = (String::new(), String::new());
        for attempt in first..=first + self.max_retries {
            req.attempt = attempt;
            let raw = self.call(&req)?;
            match parse(&raw) {
                Ok(v) => return Ok(Ok(v)),
                Err(reason) => {
                    log::debug!("{} attempt {attempt} rejected: {reason}", req.role.as_str());
                    req.feedback = Some(reason.clone());
                    last = (reason, raw);
                }
            }
        }
        Ok(Err(last))
    }

    /// Generates the shared template and README for `chart_type`.
    pub fn generate_template(&self, chart_type: &str) -> Result<ChartTypeSpec> {
        let req = GenerationRequest {
            role: Role::JsonExpert,
            chart_type: chart_type.to_string(),
            spec: None,
            topic: None,
            style: None,
            library: None,
            index: 0,
            count: 1,
            attempt: 0,
            feedback: None,
        };
        match self.attempt(req, 0, |raw| parse_template_response(chart_type, raw))? {
            Ok(spec) => Ok(spec),
            Err((reason, raw)) => Err(Error::Validation {
                role: Role::JsonExpert.as_str(),
                attempts: self.max_retries + 1,
                reason,
                raw,
            }),
        }
    }

    fn data_candidate(
        &self,
        spec: &ChartTypeSpec,
        topic: &str,
        index: usize,
        count: usize,
        first_attempt: u32,
    ) -> Result<(Option<ChartData>, usize)> {
        let req = GenerationRequest {
            role: Role::DataExpert,
            chart_type: spec.name.clone(),
            spec: Some(spec),
            topic: Some(topic),
            style: None,
            library: None,
            index,
            count,
            attempt: first_attempt,
            feedback: None,
        };
        let rejected = std::sync::atomic::AtomicUsize::new(0);
        let outcome = self.attempt(req, first_attempt, |raw| {
            let r = parse_data_response(spec, topic, raw);
            if r.is_err() {
                rejected.fetch_add(1, Ordering::Relaxed);
            }
            r
        })?;
        let rejected = rejected.into_inner();
        match outcome {
            Ok(d) => Ok((Some(d), rejected)),
            Err((reason, _)) => {
                log::warn!("{} data candidate {index} dropped: {reason}", spec.name);
                Ok((None, rejected))
            }
        }
    }

    /// Generates `count` data files for one topic. Candidates failing
    /// validation are re-prompted; duplicates (same content id) are
    /// regenerated once. Errors when fewer than the floor survive.
    pub fn generate_data(
        &self,
        spec: &ChartTypeSpec,
        topic: &str,
        count: usize,
    ) -> Result<DataBatch> {
        let results: Vec<Result<(Option<ChartData>, usize)>> = (0..count)
            .into_par_iter()
            .map(|i| self.data_candidate(spec, topic, i, count, 0))
            .collect();
        let mut data = Vec::with_capacity(count);
        let mut rejected = 0;
        let mut seen = HashSet::new();
        for (i, r) in results.into_iter().enumerate() {
            let (mut candidate, rej) = r?;
            rejected += rej;
            if let Some(d) = &candidate {
                if seen.contains(&d.id) {
                    rejected += 1;
                    let (again, rej) =
                        self.data_candidate(spec, topic, i, count, self.max_retries + 1)?;
                    rejected += rej;
                    candidate = again.filter(|d| !seen.contains(&d.id));
                }
            }
            if let Some(d) = candidate {
                seen.insert(d.id.clone());
                data.push(d);
            }
        }
        let floor = (self.data_floor * count as f64 - 1e-9).ceil().max(0.0) as usize;
        if data.len() < floor {
            return Err(Error::Shortfall {
                chart_type: spec.name.clone(),
                produced: data.len(),
                requested: count,
                floor,
            });
        }
        Ok(DataBatch {
            data,
            requested: count,
            rejected,
        })
    }

    /// Generates `count` render scripts with pairwise-distinct styles drawn
    /// from the variation grid.
    pub fn generate_code(
        &self,
        spec: &ChartTypeSpec,
        library: &str,
        count: usize,
        seed: u64,
    ) -> Result<Vec<RenderScript>> {
        if count < 1 {
            return Err(Error::Config("script count must be at least 1".into()));
        }
        let mut rng =
            ChaCha8Rng::seed_from_u64(derive_seed(&[&seed.to_string(), "styles", &spec.name]));
        let styles = style::sample_styles(&mut rng, count, self.unannotated_fraction);
        if count <= style::grid_size() {
            let distinct: HashSet<&StyleDescriptor> = styles.iter().collect();
            if distinct.len() != count {
                return Err(Error::StyleExhausted {
                    requested: count,
                    grid: style::grid_size(),
                });
            }
        }
        let one = |i: usize, style: &StyleDescriptor, first: u32| -> Result<RenderScript> {
            let req = GenerationRequest {
                role: Role::CodeExpert,
                chart_type: spec.name.clone(),
                spec: Some(spec),
                topic: None,
                style: Some(style),
                library: Some(library),
                index: i,
                count,
                attempt: first,
                feedback: None,
            };
            match self.attempt(req, first, |raw| {
                parse_code_response(spec, library, style, raw)
            })? {
                Ok(s) => Ok(s),
                Err((reason, raw)) => Err(Error::Validation {
                    role: Role::CodeExpert.as_str(),
                    attempts: self.max_retries + 1,
                    reason,
                    raw,
                }),
            }
        };
        let scripts: Vec<RenderScript> = styles
            .par_iter()
            .enumerate()
            .map(|(i, s)| one(i, s, 0))
            .collect::<Result<_>>()?;
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(count);
        for (i, s) in scripts.into_iter().enumerate() {
            let s = if seen.contains(&s.id) {
                let again = one(i, &styles[i], self.max_retries + 1)?;
                if seen.contains(&again.id) {
                    return Err(Error::Validation {
                        role: Role::CodeExpert.as_str(),
                        attempts: 2 * (self.max_retries + 1),
                        reason: "backend keeps returning an identical program".into(),
                        raw: again.source,
                    });
                }
                again
            } else {
                s
            };
            seen.insert(s.id.clone());
            out.push(s);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::offline::OfflineBackend;
    use super::*;
    use crate::model::QaLevel;
    use crate::registry::ChartRegistry;
    use std::sync::Mutex;

    fn offline() -> Forge {
        Forge::new(Arc::new(OfflineBackend::new(
            11,
            ChartRegistry::with_defaults(),
        )))
    }

    #[test]
    fn offline_line_template_has_core_paths() {
        let spec = offline().generate_template("line").unwrap();
        let paths: Vec<&str> = spec
            .template
            .required_paths
            .iter()
            .map(|r| r.path.as_str())
            .collect();
        for p in ["title", "x_axis", "y_axis", "data"] {
            assert!(paths.contains(&p), "{p}");
        }
        assert_eq!(spec, offline().generate_template("line").unwrap());
    }

    #[test]
    fn offline_data_has_qa_plan() {
        let f = offline();
        let spec = f.generate_template("bar").unwrap();
        let batch = f.generate_data(&spec, "energy production", 6).unwrap();
        assert_eq!(batch.data.len(), 6);
        for d in &batch.data {
            let count = |l| d.qas.iter().filter(|q| q.level == l).count();
            assert_eq!(
                [
                    QaLevel::Description,
                    QaLevel::Summary,
                    QaLevel::Literal,
                    QaLevel::Inferential,
                    QaLevel::Reasoning
                ]
                .map(count),
                [1, 1, 5, 5, 5]
            );
        }
        assert_eq!(
            f.generate_data(&spec, "energy production", 1)
                .unwrap()
                .data
                .len(),
            1
        );
        assert_eq!(f.calls().data, 7);
    }

    #[test]
    fn offline_code_styles_and_annotation_split() {
        let f = offline();
        let spec = f.generate_template("bar").unwrap();
        let scripts = f.generate_code(&spec, "matplotlib", 4, 5).unwrap();
        assert_eq!(scripts.len(), 4);
        let styles: HashSet<_> = scripts.iter().map(|s| &s.style).collect();
        assert_eq!(styles.len(), 4);
        assert_eq!(scripts.iter().filter(|s| !s.style.annotated).count(), 2);
        assert_eq!(f.generate_code(&spec, "matplotlib", 1, 5).unwrap().len(), 1);
    }

    /// Wraps the offline backend and corrupts selected responses.
    struct Faulty {
        inner: OfflineBackend,
        corrupt: Mutex<usize>,
        mutate: fn(&mut Value),
    }

    impl ExpertBackend for Faulty {
        fn kind(&self) -> BackendKind {
            BackendKind::Remote
        }
        fn complete(&self, req: &GenerationRequest<'_>) -> Result<String> {
            let raw = self.inner.complete(req)?;
            let mut left = self.corrupt.lock().unwrap();
            if req.role == Role::DataExpert && *left > 0 {
                *left -= 1;
                let mut v: Value = serde_json::from_str(&raw).unwrap();
                (self.mutate)(&mut v);
                return Ok(serde_json::to_string(&v).unwrap());
            }
            Ok(raw)
        }
    }

    #[test]
    fn payload_missing_title_is_regenerated() {
        let backend = Faulty {
            inner: OfflineBackend::new(1, ChartRegistry::with_defaults()),
            corrupt: Mutex::new(1),
            mutate: |v| {
                v["payload"].as_object_mut().unwrap().remove("title");
            },
        };
        let f = Forge::new(Arc::new(backend));
        let spec = f.generate_template("pie").unwrap();
        let batch = f.generate_data(&spec, "market share", 5).unwrap();
        assert_eq!(batch.data.len(), 5);
        assert_eq!(batch.rejected, 1);
        assert_eq!(f.calls().data, 6);
    }

    #[test]
    fn persistent_defects_hit_the_floor() {
        let backend = Faulty {
            inner: OfflineBackend::new(1, ChartRegistry::with_defaults()),
            corrupt: Mutex::new(usize::MAX),
            mutate: |v| {
                v["qas"].as_array_mut().unwrap().pop();
            },
        };
        let f = Forge::new(Arc::new(backend)).with_max_retries(1);
        let spec = f.generate_template("bar").unwrap();
        match f.generate_data(&spec, "tourism", 3) {
            Err(Error::Shortfall {
                produced: 0,
                requested: 3,
                floor: 3,
                ..
            }) => {}
            other => panic!("{other:?}"),
        }
        assert_eq!(f.calls().data, 6);
    }

    #[test]
    fn fences_are_stripped() {
        assert_eq!(
            strip_fences("text\n```python\nprint(1)\n```\nmore"),
            "print(1)"
        );
        assert_eq!(strip_fences("  plain "), "plain");
    }
}
