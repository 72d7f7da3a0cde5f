//! Chat-completion backend for hosted models.
//!
//! Prompts are text assets with `{{placeholder}}` slots; the part before a
//! line holding only `---` is the system message. Every exchange can be
//! appended to a replay log and served back from it later.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use serde_json::{json, Value};

use super::{ExpertBackend, GenerationRequest, Role};
use crate::canonical::{sha256_hex, to_canonical_string};
use crate::config::{BackendConfig, BackendKind, PromptPaths};
use crate::error::{Error, Result};

const BUILTIN_TEMPLATE: &str = include_str!("../../assets/prompts/template.txt");
const BUILTIN_DATA: &str = include_str!("../../assets/prompts/data.txt");
const BUILTIN_CODE: &str = include_str!("../../assets/prompts/code.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub system: String,
    pub user: String,
}

impl PromptTemplate {
    pub fn parse(text: &str) -> Self {
        let mut system = Vec::new();
        let mut user = Vec::new();
        let mut in_user = false;
        for line in text.lines() {
            if !in_user && line.trim() == "---" {
                in_user = true;
                continue;
            }
            if in_user {
                user.push(line);
            } else {
                system.push(line);
            }
        }
        if !in_user {
            return PromptTemplate {
                system: String::new(),
                user: text.trim().to_string(),
            };
        }
        PromptTemplate {
            system: system.join("\n").trim().to_string(),
            user: user.join("\n").trim().to_string(),
        }
    }
}

/// Substitutes `{{key}}` slots. Unknown slots are left untouched.
pub fn fill(text: &str, vars: &[(&str, String)]) -> String {
    let mut out = text.to_string();
    for (k, v) in vars {
        out = out.replace(&format!("{{{{{k}}}}}"), v);
    }
    out
}

#[derive(Debug, Clone)]
pub struct Prompts {
    pub template: PromptTemplate,
    pub data: PromptTemplate,
    pub code: PromptTemplate,
}

impl Prompts {
    pub fn builtin() -> Self {
        Prompts {
            template: PromptTemplate::parse(BUILTIN_TEMPLATE),
            data: PromptTemplate::parse(BUILTIN_DATA),
            code: PromptTemplate::parse(BUILTIN_CODE),
        }
    }

    pub fn load(paths: &PromptPaths) -> Result<Self> {
        let read = |p: &Option<PathBuf>, fallback: &str| -> Result<PromptTemplate> {
            match p {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                    Ok(PromptTemplate::parse(&text))
                }
                None => Ok(PromptTemplate::parse(fallback)),
            }
        };
        Ok(Prompts {
            template: read(&paths.template, BUILTIN_TEMPLATE)?,
            data: read(&paths.data, BUILTIN_DATA)?,
            code: read(&paths.code, BUILTIN_CODE)?,
        })
    }

    /// Renders the (system, user) messages for a request.
    pub fn render(&self, req: &GenerationRequest<'_>) -> (String, String) {
        let tpl = match req.role {
            Role::JsonExpert => &self.template,
            Role::DataExpert => &self.data,
            Role::CodeExpert => &self.code,
        };
        let mut vars = vec![
            ("chart_type", req.chart_type.clone()),
            ("index", (req.index + 1).to_string()),
            ("count", req.count.to_string()),
            ("topic", req.topic.unwrap_or_default().to_string()),
            ("library", req.library.unwrap_or_default().to_string()),
            (
                "feedback",
                match &req.feedback {
                    Some(f) => format!(
                        "\nYour previous answer was rejected: {f}\nReply again with a corrected answer."
                    ),
                    None => String::new(),
                },
            ),
        ];
        if let Some(spec) = req.spec {
            vars.push(("readme", spec.readme.clone()));
            vars.push((
                "exemplar",
                serde_json::to_string_pretty(&spec.template.exemplar).unwrap_or_default(),
            ));
            let paths = spec
                .template
                .required_paths
                .iter()
                .map(|r| format!("- {}: {}", r.path, r.kind))
                .collect::<Vec<_>>()
                .join("\n");
            vars.push(("required_paths", paths));
        }
        if let Some(style) = req.style {
            vars.push(("color_scheme", style.color_scheme.clone()));
            vars.push(("legend", style.legend.clone()));
            vars.push(("grid", style.grid.clone()));
            vars.push(("font", style.font.clone()));
            vars.push(("mark_texture", style.mark_texture.clone()));
            let rule = if style.annotated {
                "Draw the numeric value of every data mark as a text label next to the mark."
            } else {
                "Do not draw numeric value labels on the data marks."
            };
            vars.push(("annotation_rule", rule.to_string()));
        }
        (fill(&tpl.system, &vars), fill(&tpl.user, &vars))
    }
}

/// Sends one chat-completion body and returns the response body. `key`
/// identifies the exchange for replay purposes.
pub trait Transport: Send + Sync {
    fn post(&self, key: &str, body: &Value) -> Result<Value>;
}

pub struct HttpTransport {
    url: String,
    api_key: String,
    agent: ureq::Agent,
    retries: u32,
}

impl HttpTransport {
    pub fn new(endpoint: &str, api_key: &str, timeout: Duration) -> Self {
        HttpTransport {
            url: format!("{}/chat/completions", endpoint.trim_end_matches('/')),
            api_key: api_key.to_string(),
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
            retries: 3,
        }
    }
}

impl Transport for HttpTransport {
    fn post(&self, _key: &str, body: &Value) -> Result<Value> {
        let mut wait = Duration::from_millis(500);
        let mut attempt = 0;
        loop {
            let mut req = self.agent.post(&self.url);
            if !self.api_key.is_empty() {
                req = req.set("Authorization", &format!("Bearer {}", self.api_key));
            }
            match req.send_json(body.clone()) {
                Ok(resp) => {
                    return resp
                        .into_json::<Value>()
                        .map_err(|e| Error::Transport(format!("unreadable response body: {e}")))
                }
                Err(ureq::Error::Status(code, resp))
                    if (code == 429 || code >= 500) && attempt < self.retries =>
                {
                    log::warn!("{} returned {code}, retrying", self.url);
                    drop(resp);
                }
                Err(ureq::Error::Status(code, resp)) => {
                    let text = resp.into_string().unwrap_or_default();
                    return Err(Error::Transport(format!(
                        "{} returned {code}: {text}",
                        self.url
                    )));
                }
                Err(e) if attempt < self.retries => log::warn!("{}: {e}, retrying", self.url),
                Err(e) => return Err(Error::Transport(format!("{}: {e}", self.url))),
            }
            attempt += 1;
            std::thread::sleep(wait);
            wait *= 2;
        }
    }
}

/// Appends every exchange to an NDJSON log and answers repeated keys from
/// it. Without an inner transport it can only replay.
pub struct ReplayLog {
    inner: Option<Box<dyn Transport>>,
    recorded: Mutex<HashMap<String, Value>>,
    file: Mutex<Option<File>>,
    path: PathBuf,
}

impl ReplayLog {
    pub fn open(path: &Path, inner: Option<Box<dyn Transport>>) -> Result<Self> {
        let mut recorded = HashMap::new();
        if path.exists() {
            let f = File::open(path).map_err(|e| Error::io(path, e))?;
            for (n, line) in BufReader::new(f).lines().enumerate() {
                let line = line.map_err(|e| Error::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let v: Value = serde_json::from_str(&line).map_err(|e| Error::ManifestParse {
                    path: path.to_path_buf(),
                    line: n + 1,
                    message: e.to_string(),
                })?;
                if let (Some(k), Some(r)) =
                    (v.get("key").and_then(Value::as_str), v.get("response"))
                {
                    recorded.insert(k.to_string(), r.clone());
                }
            }
        }
        let file = if inner.is_some() {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
            Some(
                OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(path)
                    .map_err(|e| Error::io(path, e))?,
            )
        } else {
            None
        };
        Ok(ReplayLog {
            inner,
            recorded: Mutex::new(recorded),
            file: Mutex::new(file),
            path: path.to_path_buf(),
        })
    }

    pub fn len(&self) -> usize {
        self.recorded.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Transport for ReplayLog {
    fn post(&self, key: &str, body: &Value) -> Result<Value> {
        if let Some(v) = self.recorded.lock().unwrap().get(key) {
            return Ok(v.clone());
        }
        let Some(inner) = &self.inner else {
            return Err(Error::Transport(format!(
                "no recorded response for request {key} in {}",
                self.path.display()
            )));
        };
        let resp = inner.post(key, body)?;
        let line = to_canonical_string(&json!({"key": key, "request": body, "response": resp}));
        if let Some(f) = self.file.lock().unwrap().as_mut() {
            writeln!(f, "{line}").map_err(|e| Error::io(&self.path, e))?;
            f.flush().map_err(|e| Error::io(&self.path, e))?;
        }
        self.recorded
            .lock()
            .unwrap()
            .insert(key.to_string(), resp.clone());
        Ok(resp)
    }
}

/// Answers from a closure; for tests and dry runs.
pub struct MockTransport<F>(pub F);

impl<F> Transport for MockTransport<F>
where
    F: Fn(&Value) -> Result<Value> + Send + Sync,
{
    fn post(&self, _key: &str, body: &Value) -> Result<Value> {
        (self.0)(body)
    }
}

/// Wraps `content` in a minimal chat-completion response body.
pub fn completion_body(content: &str) -> Value {
    json!({"choices": [{"index": 0, "message": {"role": "assistant", "content": content}}]})
}

pub struct RemoteBackend {
    transport: Box<dyn Transport>,
    prompts: Prompts,
    model: String,
    temperature: f64,
}

impl RemoteBackend {
    pub fn new(
        transport: Box<dyn Transport>,
        prompts: Prompts,
        model: &str,
        temperature: f64,
    ) -> Self {
        RemoteBackend {
            transport,
            prompts,
            model: model.to_string(),
            temperature,
        }
    }

    pub fn from_config(cfg: &BackendConfig, prompt_paths: &PromptPaths) -> Result<Self> {
        let prompts = Prompts::load(prompt_paths)?;
        let transport: Box<dyn Transport> = match (&cfg.replay_log, cfg.replay_only) {
            (Some(log), true) => Box::new(ReplayLog::open(log, None)?),
            (None, true) => {
                return Err(Error::Config(
                    "backend.replay_only needs backend.replay_log".into(),
                ))
            }
            (log, false) => {
                let http = HttpTransport::new(
                    &cfg.resolved_endpoint()?,
                    &cfg.resolved_api_key()?,
                    Duration::from_secs(cfg.request_timeout_secs),
                );
                match log {
                    Some(log) => Box::new(ReplayLog::open(log, Some(Box::new(http)))?),
                    None => Box::new(http),
                }
            }
        };
        Ok(RemoteBackend::new(
            transport,
            prompts,
            &cfg.model,
            cfg.temperature,
        ))
    }

    pub fn request_body(&self, req: &GenerationRequest<'_>) -> Value {
        let (system, user) = self.prompts.render(req);
        let mut messages = Vec::new();
        if !system.is_empty() {
            messages.push(json!({"role": "system", "content": system}));
        }
        messages.push(json!({"role": "user", "content": user}));
        json!({
            "model": self.model,
            "temperature": self.temperature,
            "messages": messages,
        })
    }
}

/// Replay key: the request body plus the attempt number, so re-prompts
/// with identical text are still distinct exchanges.
pub fn exchange_key(req: &GenerationRequest<'_>, body: &Value) -> String {
    let mut k = sha256_hex(&[
        "exchange",
        req.role.as_str(),
        &req.attempt.to_string(),
        &to_canonical_string(body),
    ]);
    k.truncate(32);
    k
}

impl ExpertBackend for RemoteBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Remote
    }

    fn complete(&self, req: &GenerationRequest<'_>) -> Result<String> {
        let body = self.request_body(req);
        let resp = self.transport.post(&exchange_key(req, &body), &body)?;
        resp.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| {
                Error::Transport(format!("response lacks choices[0].message.content: {resp}"))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forge::offline::OfflineBackend;
    use crate::forge::Forge;
    use crate::registry::ChartRegistry;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    fn bar_spec() -> crate::model::ChartTypeSpec {
        Forge::new(Arc::new(OfflineBackend::new(
            1,
            ChartRegistry::with_defaults(),
        )))
        .generate_template("bar")
        .unwrap()
    }

    #[test]
    fn prompt_assets_split_and_fill() {
        let p = Prompts::builtin();
        assert!(!p.template.system.is_empty());
        assert!(p.data.user.contains("{{readme}}"));
        let spec = bar_spec();
        let req = GenerationRequest {
            role: Role::DataExpert,
            chart_type: "bar".into(),
            spec: Some(&spec),
            topic: Some("energy"),
            style: None,
            library: None,
            index: 2,
            count: 9,
            attempt: 1,
            feedback: Some("missing key `data`".into()),
        };
        let (_, user) = p.render(&req);
        assert!(user.contains(&spec.readme));
        assert!(user.contains("Topic: energy"));
        assert!(user.contains("candidate 3 of 9"));
        assert!(user.contains("missing key `data`"));
        assert!(!user.contains("{{"));
    }

    #[test]
    fn template_without_data_section_fails_after_retries() {
        let calls = Arc::new(AtomicUsize::new(0));
        let c = calls.clone();
        let transport = MockTransport(move |_body: &Value| {
            c.fetch_add(1, Ordering::SeqCst);
            Ok(completion_body(
                r#"{"exemplar": {"title": "t", "x_axis": {"label": "x"}, "y_axis": {"label": "y", "unit": "u"}},
                    "required_paths": [{"path": "title", "kind": "string"}],
                    "data_section_path": "data", "readme": "no data"}"#,
            ))
        });
        let backend = RemoteBackend::new(Box::new(transport), Prompts::builtin(), "m", 0.0);
        let forge = Forge::new(Arc::new(backend));
        match forge.generate_template("bar") {
            Err(Error::Validation {
                attempts: 4, role, ..
            }) => assert_eq!(role, "json_expert"),
            other => panic!("{other:?}"),
        }
        assert_eq!(calls.load(Ordering::SeqCst), 4);
        assert_eq!(forge.calls().template, 4);
    }

    #[test]
    fn replay_log_records_then_serves() {
        let dir = tempfile::tempdir().unwrap();
        let log = dir.path().join("replay.jsonl");
        let hits = Arc::new(AtomicUsize::new(0));
        let h = hits.clone();
        let live = ReplayLog::open(
            &log,
            Some(Box::new(MockTransport(move |_b: &Value| {
                h.fetch_add(1, Ordering::SeqCst);
                Ok(completion_body("hello"))
            }))),
        )
        .unwrap();
        let body = json!({"messages": []});
        live.post("k1", &body).unwrap();
        live.post("k1", &body).unwrap();
        assert_eq!(hits.load(Ordering::SeqCst), 1);
        drop(live);

        let offline = ReplayLog::open(&log, None).unwrap();
        assert_eq!(offline.len(), 1);
        assert_eq!(offline.post("k1", &body).unwrap(), completion_body("hello"));
        assert!(matches!(
            offline.post("k2", &body),
            Err(Error::Transport(_))
        ));
    }
}
