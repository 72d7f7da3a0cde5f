//! Stage orchestration over one output directory.
//!
//! Layout under the output directory:
//!
//! ```text
//! manifests/<stage>.jsonl   one manifest per completed stage
//! render.partial.jsonl      render progress, removed on completion
//! images/<instance>.png     rendered charts (+ .png.txt sidecars)
//! export/                   training-set files
//! reports/                  eval_report.json, stats.json
//! ```
//!
//! A stage runs only when every prerequisite manifest exists and carries the
//! current config hash. A stage whose own manifest is already present and
//! current is skipped; running a stage removes the manifests of everything
//! downstream of it.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bench::{
    benchmark_stats, build_benchmark, evaluate, read_decisions, read_predictions,
    read_table_predictions, style_group_violations, BenchmarkRecord, EvalOptions,
    KeywordOverlapJudge,
};
use crate::canonical::sha256_hex;
use crate::compose::compose;
use crate::config::{BackendKind, PipelineConfig};
use crate::dualpath::{assemble, export_training_set, INSTRUCT_FILE, PRETRAIN_FILE, STATS_FILE};
use crate::error::{Error, Result};
use crate::filter::{filter_corpus, ocr_engine, reason_histogram};
use crate::forge::offline::OfflineBackend;
use crate::forge::remote::RemoteBackend;
use crate::forge::{derive_seed, ExpertBackend, Forge};
use crate::manifest::{
    read_header, read_manifest, read_partial, write_manifest, AppendWriter, Expect, ManifestHeader,
    ManifestRecord, Stage,
};
use crate::model::{ChartData, ChartInstance, ChartTypeSpec, RenderScript, RenderStatus};
use crate::render::{check_budget, render_all, status_histogram};
use crate::sandbox::SandboxConfig;

pub const MANIFEST_DIR: &str = "manifests";
pub const RENDER_PARTIAL: &str = "render.partial.jsonl";
pub const EXPORT_DIR: &str = "export";
pub const REPORTS_DIR: &str = "reports";
pub const EVAL_REPORT: &str = "eval_report.json";
pub const STATS_REPORT: &str = "stats.json";

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub jobs: usize,
    /// Continue an interrupted render from its partial manifest.
    pub resume: bool,
    pub predictions: Option<PathBuf>,
    pub tables: Option<PathBuf>,
    /// Overrides `bench.decisions`.
    pub decisions: Option<PathBuf>,
}

impl RunOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        RunOptions {
            out_dir: out_dir.into(),
            jobs: std::thread::available_parallelism().map_or(1, |n| n.get()),
            resume: false,
            predictions: None,
            tables: None,
            decisions: None,
        }
    }
}

/// A file produced by a stage, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

impl Artifact {
    pub fn of(root: &Path, rel: &str) -> Result<Self> {
        let full = root.join(rel);
        let bytes = std::fs::read(&full).map_err(|e| Error::io(&full, e))?;
        Ok(Artifact {
            path: rel.to_string(),
            sha256: file_digest(&bytes),
            bytes: bytes.len() as u64,
        })
    }
}

impl ManifestRecord for Artifact {
    const KIND: &'static str = "artifact";
    fn record_id(&self) -> &str {
        &self.path
    }
    fn check(&self) -> Result<(), String> {
        if self.path.is_empty() {
            return Err("empty path".into());
        }
        Ok(())
    }
}

fn file_digest(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Ran { summary: String },
    Skipped,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Outcome::Ran { summary } => f.write_str(summary),
            Outcome::Skipped => f.write_str("skipped (complete)"),
        }
    }
}

/// Splits `total` data files across topics: shuffled per chart type, then
/// as even as possible. Topics with a zero share are dropped.
pub fn topic_plan(
    topics: &[String],
    total: usize,
    seed: u64,
    chart_type: &str,
) -> Vec<(String, usize)> {
    let mut order: Vec<&String> = topics.iter().collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(&[
        &seed.to_string(),
        "topics",
        chart_type,
    ])));
    let base = total / order.len().max(1);
    let rem = total % order.len().max(1);
    order
        .into_iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), base + usize::from(i < rem)))
        .filter(|(_, n)| *n > 0)
        .collect()
}

/// Stages transitively downstream of `stage`.
pub fn downstream(stage: Stage) -> Vec<Stage> {
    let mut out: Vec<Stage> = Vec::new();
    for s in Stage::ALL {
        if s.prerequisites()
            .iter()
            .any(|p| *p == stage || out.contains(p))
        {
            out.push(s);
        }
    }
    out
}

pub struct Pipeline {
    cfg: PipelineConfig,
    hash: String,
    opts: RunOptions,
    backend: OnceLock<Arc<dyn ExpertBackend>>,
}

impl Pipeline {
    pub fn new(cfg: PipelineConfig, opts: RunOptions) -> Result<Self> {
        cfg.validate()?;
        Ok(Pipeline {
            hash: cfg.config_hash(),
            cfg,
            opts,
            backend: OnceLock::new(),
        })
    }

    /// Uses `backend` instead of the one named in the config.
    pub fn with_backend(self, backend: Arc<dyn ExpertBackend>) -> Self {
        let _ = self.backend.set(backend);
        self
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn config_hash(&self) -> &str {
        &self.hash
    }

    pub fn out_dir(&self) -> &Path {
        &self.opts.out_dir
    }

    pub fn manifest_path(&self, stage: Stage) -> PathBuf {
        self.opts.out_dir.join(MANIFEST_DIR).join(stage.file_name())
    }

    fn backend(&self) -> Result<Arc<dyn ExpertBackend>> {
        if let Some(b) = self.backend.get() {
            return Ok(b.clone());
        }
        let b: Arc<dyn ExpertBackend> = match self.cfg.backend.kind {
            BackendKind::Offline => {
                Arc::new(OfflineBackend::new(self.cfg.seed, self.cfg.registry()?))
            }
            BackendKind::Remote => Arc::new(RemoteBackend::from_config(
                &self.cfg.backend,
                &self.cfg.generation.prompts,
            )?),
        };
        Ok(self.backend.get_or_init(|| b).clone())
    }

    fn forge(&self) -> Result<Forge> {
        let g = &self.cfg.generation;
        Ok(Forge::new(self.backend()?)
            .with_max_retries(g.max_retries)
            .with_data_floor(g.data_floor)
            .with_unannotated_fraction(g.unannotated_fraction))
    }

    fn header(&self, stage: Stage) -> ManifestHeader {
        ManifestHeader::new(stage, &self.hash, self.cfg.seed)
    }

    fn read<R: ManifestRecord>(&self, stage: Stage) -> Result<(ManifestHeader, Vec<R>)> {
        read_manifest(
            &self.manifest_path(stage),
            Expect::resume(stage, &self.hash),
        )
    }

    fn write<R: ManifestRecord>(
        &self,
        header: ManifestHeader,
        records: &[R],
    ) -> Result<ManifestHeader> {
        write_manifest(&self.manifest_path(header.stage), &header, records)
    }

    /// Header of each stage's manifest, if present.
    pub fn status(&self) -> Vec<(Stage, Option<Result<ManifestHeader>>)> {
        Stage::ALL
            .into_iter()
            .map(|s| {
                let p = self.manifest_path(s);
                (
                    s,
                    p.exists()
                        .then(|| read_header(&p, Expect::resume(s, &self.hash))),
                )
            })
            .collect()
    }

    /// Digest of run inputs that live outside the config.
    fn inputs_digest(&self, stage: Stage) -> Result<Option<String>> {
        let digest_of = |p: &Option<PathBuf>| -> Result<String> {
            match p {
                Some(p) => std::fs::read(p)
                    .map(|b| file_digest(&b))
                    .map_err(|e| Error::io(p, e)),
                None => Ok("none".into()),
            }
        };
        Ok(match stage {
            Stage::Benchmark => Some(digest_of(
                &self
                    .opts
                    .decisions
                    .clone()
                    .or_else(|| self.cfg.bench.decisions.clone()),
            )?),
            Stage::Evaluate => Some(sha256_hex(&[
                &digest_of(&self.opts.predictions)?,
                &digest_of(&self.opts.tables)?,
            ])),
            _ => None,
        })
    }

    /// Runs `stage` after checking its prerequisites.
    pub fn run(&self, stage: Stage) -> Result<Outcome> {
        for p in stage.prerequisites() {
            let path = self.manifest_path(*p);
            if !path.exists() {
                return Err(Error::MissingPrerequisite(*p));
            }
            read_header(&path, Expect::resume(*p, &self.hash))?;
        }
        let own = self.manifest_path(stage);
        let digest = self.inputs_digest(stage)?;
        if own.exists() {
            let h = read_header(&own, Expect::resume(stage, &self.hash))?;
            let stored = h.extra.get("inputs_digest").and_then(Value::as_str);
            if stored == digest.as_deref() {
                return Ok(Outcome::Skipped);
            }
        }
        for d in downstream(stage) {
            let p = self.manifest_path(d);
            if p.exists() {
                std::fs::remove_file(&p).map_err(|e| Error::io(&p, e))?;
            }
        }
        let started = std::time::Instant::now();
        let mut summary = match stage {
            Stage::Templates => self.run_templates()?,
            Stage::Data => self.run_data()?,
            Stage::Code => self.run_code()?,
            Stage::Compose => self.run_compose()?,
            Stage::Render => self.run_render()?,
            Stage::Filter => self.run_filter()?,
            Stage::Assemble => self.run_assemble()?,
            Stage::Benchmark => self.run_benchmark(digest.as_deref().unwrap_or("none"))?,
            Stage::Evaluate => self.run_evaluate(digest.as_deref().unwrap_or("none"))?,
            Stage::Stats => self.run_stats()?,
        };
        summary.push_str(&format!(" in {:.1}s", started.elapsed().as_secs_f64()));
        Ok(Outcome::Ran { summary })
    }

    /// Runs every stage in order. `evaluate` is included only when
    /// predictions were supplied.
    pub fn run_all(&self) -> Result<Vec<(Stage, Outcome)>> {
        let mut out = Vec::new();
        for s in Stage::ALL {
            if s == Stage::Evaluate && self.opts.predictions.is_none() {
                continue;
            }
            out.push((s, self.run(s)?));
        }
        Ok(out)
    }

    fn run_templates(&self) -> Result<String> {
        let forge = self.forge()?;
        let specs: Vec<ChartTypeSpec> = self
            .cfg
            .chart_types
            .par_iter()
            .map(|t| forge.generate_template(t))
            .collect::<Result<_>>()?;
        let calls = forge.calls().total();
        let header = self
            .header(Stage::Templates)
            .with_extra("backend", forge.backend_kind())
            .with_extra("expert_calls", calls);
        self.write(header, &specs)?;
        Ok(format!("{} templates, {calls} expert calls", specs.len()))
    }

    fn run_data(&self) -> Result<String> {
        let (_, specs) = self.read::<ChartTypeSpec>(Stage::Templates)?;
        let forge = self.forge()?.with_data_floor(0.0);
        let m = self.cfg.data_per_type;
        let mut all = Vec::new();
        let mut rejected = 0;
        let mut per_type = BTreeMap::new();
        for spec in &specs {
            let mut kept: Vec<ChartData> = Vec::new();
            let mut seen = std::collections::HashSet::new();
            for (topic, n) in topic_plan(&self.cfg.topics, m, self.cfg.seed, &spec.name) {
                let batch = forge.generate_data(spec, &topic, n)?;
                rejected += batch.rejected;
                for d in batch.data {
                    if seen.insert(d.id.clone()) {
                        kept.push(d);
                    } else {
                        rejected += 1;
                    }
                }
            }
            let floor = (self.cfg.generation.data_floor * m as f64 - 1e-9)
                .ceil()
                .max(0.0) as usize;
            if kept.len() < floor {
                return Err(Error::Shortfall {
                    chart_type: spec.name.clone(),
                    produced: kept.len(),
                    requested: m,
                    floor,
                });
            }
            per_type.insert(spec.name.clone(), kept.len());
            all.extend(kept);
        }
        let calls = forge.calls().total();
        let header = self
            .header(Stage::Data)
            .with_extra("expert_calls", calls)
            .with_extra("rejected", rejected)
            .with_extra("per_type", &per_type);
        self.write(header, &all)?;
        Ok(format!(
            "{} data files, {rejected} rejected, {calls} expert calls",
            all.len()
        ))
    }

    fn run_code(&self) -> Result<String> {
        let (_, specs) = self.read::<ChartTypeSpec>(Stage::Templates)?;
        let forge = self.forge()?;
        let mut all = Vec::new();
        for spec in &specs {
            all.extend(forge.generate_code(
                spec,
                &self.cfg.generation.plotting_library,
                self.cfg.scripts_per_type,
                self.cfg.seed,
            )?);
        }
        let calls = forge.calls().total();
        let unannotated = all
            .iter()
            .filter(|s: &&RenderScript| !s.style.annotated)
            .count();
        let header = self
            .header(Stage::Code)
            .with_extra("expert_calls", calls)
            .with_extra("unannotated", unannotated);
        self.write(header, &all)?;
        Ok(format!(
            "{} scripts ({unannotated} unannotated), {calls} expert calls",
            all.len()
        ))
    }

    fn run_compose(&self) -> Result<String> {
        let (h_data, data) = self.read::<ChartData>(Stage::Data)?;
        let (h_code, scripts) = self.read::<RenderScript>(Stage::Code)?;
        let h_tpl = read_header(
            &self.manifest_path(Stage::Templates),
            Expect::resume(Stage::Templates, &self.hash),
        )?;
        let mut instances = Vec::new();
        let mut per_type = BTreeMap::new();
        for t in &self.cfg.chart_types {
            let d: Vec<ChartData> = data
                .iter()
                .filter(|x| &x.chart_type == t)
                .cloned()
                .collect();
            let s: Vec<RenderScript> = scripts
                .iter()
                .filter(|x| &x.chart_type == t)
                .cloned()
                .collect();
            let composed = compose(&d, &s)?;
            per_type.insert(t.clone(), composed.len());
            instances.extend(composed);
        }
        let calls: u64 = [&h_tpl, &h_data, &h_code]
            .iter()
            .map(|h| h.extra_u64("expert_calls").unwrap_or(0))
            .sum();
        let header = self
            .header(Stage::Compose)
            .with_extra("expert_calls", calls)
            .with_extra("per_type", &per_type);
        self.write(header, &instances)?;
        Ok(format!(
            "{} instances from {calls} expert calls",
            instances.len()
        ))
    }

    fn run_render(&self) -> Result<String> {
        let (_, instances) = self.read::<ChartInstance>(Stage::Compose)?;
        let (_, data) = self.read::<ChartData>(Stage::Data)?;
        let (_, scripts) = self.read::<RenderScript>(Stage::Code)?;
        let sandbox = SandboxConfig::from_config(&self.cfg.render)?;
        let root = &self.opts.out_dir;
        let partial = root.join(RENDER_PARTIAL);
        let header = self.header(Stage::Render);

        let mut done: HashMap<String, ChartInstance> = HashMap::new();
        let writer = if self.opts.resume && partial.exists() {
            let (_, recs) =
                read_partial::<ChartInstance>(&partial, Expect::resume(Stage::Render, &self.hash))?;
            for r in recs {
                let image_ok = match (&r.render_status, &r.image_ref) {
                    (RenderStatus::Ok, Some(img)) => root.join(img).is_file(),
                    (RenderStatus::Ok, None) => false,
                    _ => true,
                };
                if r.render_status.is_terminal() && image_ok {
                    done.insert(r.id.clone(), r);
                }
            }
            AppendWriter::reopen(&partial)?
        } else {
            AppendWriter::create(&partial, &header)?
        };
        let resumed = done.len();
        let work: Vec<ChartInstance> = instances
            .iter()
            .map(|i| done.remove(&i.id).unwrap_or_else(|| i.clone()))
            .collect();
        let writer = Mutex::new(writer);
        let rendered = render_all(
            &work,
            &data,
            &scripts,
            &sandbox,
            root,
            self.opts.jobs,
            &|inst| writer.lock().unwrap().append(inst),
        )?;
        drop(writer);
        let hist = status_histogram(&rendered);
        check_budget(&rendered, self.cfg.render.min_ok_fraction)?;
        let header = header
            .with_extra("status", &hist)
            .with_extra("resumed", resumed);
        self.write(header, &rendered)?;
        std::fs::remove_file(&partial).map_err(|e| Error::io(&partial, e))?;
        let ok = hist.get("ok").copied().unwrap_or(0);
        Ok(format!(
            "{ok} of {} rendered ok ({resumed} resumed)",
            rendered.len()
        ))
    }

    fn run_filter(&self) -> Result<String> {
        let (_, instances) = self.read::<ChartInstance>(Stage::Render)?;
        let (_, data) = self.read::<ChartData>(Stage::Data)?;
        let (_, specs) = self.read::<ChartTypeSpec>(Stage::Templates)?;
        let engine = ocr_engine(&self.cfg.filter.ocr);
        let threshold = self.cfg.filter.ocr_threshold;
        let filtered = filter_corpus(
            &instances,
            &data,
            &specs,
            threshold,
            engine.as_ref(),
            &self.opts.out_dir,
        )?;
        let accepted = filtered.iter().filter(|i| i.accepted()).count();
        let reasons = reason_histogram(&filtered);
        let header = self
            .header(Stage::Filter)
            .with_extra("accepted", accepted)
            .with_extra("threshold", threshold)
            .with_extra("reasons", &reasons);
        self.write(header, &filtered)?;
        Ok(format!(
            "{accepted} of {} accepted, rejections {reasons:?}",
            filtered.len()
        ))
    }

    fn run_assemble(&self) -> Result<String> {
        let (_, instances) = self.read::<ChartInstance>(Stage::Filter)?;
        let (_, data) = self.read::<ChartData>(Stage::Data)?;
        let (_, specs) = self.read::<ChartTypeSpec>(Stage::Templates)?;
        let corpus = assemble(
            &instances,
            &data,
            &specs,
            &self.cfg.assemble.extraction_instruction,
        )?;
        let root = &self.opts.out_dir;
        let stats = export_training_set(
            &corpus,
            self.cfg.assemble.weights,
            self.cfg.seed,
            root,
            &root.join(EXPORT_DIR),
        )?;
        let artifacts = [INSTRUCT_FILE, PRETRAIN_FILE, STATS_FILE]
            .iter()
            .map(|f| Artifact::of(root, &format!("{EXPORT_DIR}/{f}")))
            .collect::<Result<Vec<_>>>()?;
        let header = self
            .header(Stage::Assemble)
            .with_extra("exported", &stats.exported)
            .with_extra("available", &stats.available);
        self.write(header, &artifacts)?;
        Ok(format!(
            "{} instruction and {} pretraining samples",
            stats.instruct_total, stats.pretrain_total
        ))
    }

    fn run_benchmark(&self, digest: &str) -> Result<String> {
        let (_, instances) = self.read::<ChartInstance>(Stage::Filter)?;
        let (_, data) = self.read::<ChartData>(Stage::Data)?;
        let (_, scripts) = self.read::<RenderScript>(Stage::Code)?;
        let (_, specs) = self.read::<ChartTypeSpec>(Stage::Templates)?;
        let decisions = match self
            .opts
            .decisions
            .as_ref()
            .or(self.cfg.bench.decisions.as_ref())
        {
            Some(p) => Some(read_decisions(p)?),
            None => None,
        };
        let build = build_benchmark(
            &instances,
            &data,
            &scripts,
            &specs,
            &self.cfg.chart_types,
            decisions.as_deref(),
            &self.cfg.bench,
        )?;
        for t in &build.omitted_types {
            log::warn!("chart type `{t}` has no admitted benchmark record");
        }
        let qas: usize = build.records.iter().map(|r| r.qas.len()).sum();
        let header = self
            .header(Stage::Benchmark)
            .with_extra("inputs_digest", digest)
            .with_extra("reviewed", build.reviewed)
            .with_extra("omitted_types", &build.omitted_types)
            .with_extra("qas", qas);
        self.write(header, &build.records)?;
        Ok(format!("{} images, {qas} QAs", build.records.len()))
    }

    fn write_report(&self, name: &str, value: &impl Serialize) -> Result<Artifact> {
        let rel = format!("{REPORTS_DIR}/{name}");
        let path = self.opts.out_dir.join(&rel);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Artifact::of(&self.opts.out_dir, &rel)
    }

    fn run_evaluate(&self, digest: &str) -> Result<String> {
        let preds_path = self.opts.predictions.as_ref().ok_or_else(|| {
            Error::Config("evaluate needs a predictions file (--predictions)".into())
        })?;
        let (_, records) = self.read::<BenchmarkRecord>(Stage::Benchmark)?;
        let preds = read_predictions(preds_path)?;
        let tables = match &self.opts.tables {
            Some(p) => Some(read_table_predictions(p)?),
            None => None,
        };
        let judge = KeywordOverlapJudge;
        let report = evaluate(
            &records,
            &preds,
            tables.as_deref(),
            &EvalOptions {
                tolerance: self.cfg.bench.relaxed_tolerance,
                basic_types: &self.cfg.bench.basic_types,
                config_hash: &self.hash,
                judge: Some(&judge),
            },
        )?;
        let artifact = self.write_report(EVAL_REPORT, &report)?;
        let header = self
            .header(Stage::Evaluate)
            .with_extra("inputs_digest", digest)
            .with_extra("accuracy", report.overall.accuracy);
        self.write(header, &[artifact])?;
        Ok(format!(
            "accuracy {:.4} ({} of {}), {} missing",
            report.overall.accuracy, report.overall.correct, report.overall.total, report.missing
        ))
    }

    fn run_stats(&self) -> Result<String> {
        let (_, records) = self.read::<BenchmarkRecord>(Stage::Benchmark)?;
        let stats = benchmark_stats(&records);
        let violations = style_group_violations(&records);
        for v in &violations {
            log::warn!("style group violation: {v}");
        }
        let artifact = self.write_report(
            STATS_REPORT,
            &json!({"stats": stats, "style_group_violations": violations}),
        )?;
        let header = self.header(Stage::Stats).with_extra("images", stats.images);
        self.write(header, &[artifact])?;
        Ok(format!(
            "{} images over {} chart types, {:.1} QAs per image",
            stats.images, stats.chart_types, stats.avg_qas_per_image
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn topic_plan_covers_total() {
        let topics: Vec<String> = (0..5).map(|i| format!("t{i}")).collect();
        for total in [1, 4, 5, 12] {
            let plan = topic_plan(&topics, total, 7, "bar");
            assert_eq!(plan.iter().map(|(_, n)| n).sum::<usize>(), total);
            let max = plan.iter().map(|(_, n)| *n).max().unwrap();
            let min = plan.iter().map(|(_, n)| *n).min().unwrap();
            assert!(max - min <= 1);
        }
        assert_eq!(
            topic_plan(&topics, 3, 7, "bar"),
            topic_plan(&topics, 3, 7, "bar")
        );
    }

    #[test]
    fn downstream_closure() {
        assert_eq!(
            downstream(Stage::Filter),
            vec![
                Stage::Assemble,
                Stage::Benchmark,
                Stage::Evaluate,
                Stage::Stats
            ]
        );
        assert!(downstream(Stage::Stats).is_empty());
        assert_eq!(downstream(Stage::Templates).len(), 9);
    }
}
