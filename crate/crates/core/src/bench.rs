//! Multi-level benchmark construction, human-review admission, scoring and
//! statistics.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::canonical::{canonicalize_answer, to_canonical_string, CanonicalAnswer};
use crate::config::BenchConfig;
use crate::error::{Error, Result};
use crate::model::{
    ChartData, ChartInstance, ChartTypeSpec, KeyPath, QAPair, QaLevel, RenderScript,
};
use crate::table::{flatten_cells, parse_table};

/// One benchmark QA, keyed by its position in the source data's QA list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchQa {
    pub qa_index: usize,
    pub level: QaLevel,
    pub question: String,
    pub answer_long: String,
    pub answer_short: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    /// The chart instance id.
    pub id: String,
    pub image_ref: String,
    pub chart_type: String,
    pub annotated: bool,
    /// Shared by every record rendered from the same payload.
    pub style_group: String,
    pub data_id: String,
    pub script_id: String,
    pub payload: Value,
    pub data_section: KeyPath,
    pub qas: Vec<BenchQa>,
    /// Description and summary QAs (long answers only).
    pub long_form: Vec<BenchQa>,
}

impl BenchmarkRecord {
    pub fn check(&self) -> std::result::Result<(), String> {
        if self.qas.is_empty() {
            return Err("no admitted QAs".into());
        }
        if self.qas.iter().any(|q| !q.level.is_leveled()) {
            return Err("non-leveled QA in scored set".into());
        }
        Ok(())
    }
}

impl crate::manifest::ManifestRecord for BenchmarkRecord {
    const KIND: &'static str = "benchmark record";
    fn record_id(&self) -> &str {
        &self.id
    }
    fn check(&self) -> std::result::Result<(), String> {
        BenchmarkRecord::check(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewDecision {
    pub record_id: String,
    pub qa_index: usize,
    pub answerable: bool,
    pub correct: bool,
    pub reviewer: String,
    pub timestamp: String,
}

/// Reads a newline-delimited decisions file. Blank lines are skipped.
pub fn read_decisions(path: &Path) -> Result<Vec<ReviewDecision>> {
    read_ndjson(path)
}

fn read_ndjson<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(line).map_err(|e| Error::ManifestParse {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })?,
        );
    }
    Ok(out)
}

/// Admission per (record, qa): the latest decision of each reviewer (file
/// order) counts once; a QA is admitted when a strict majority of its
/// reviewers found it answerable and correct.
pub fn admission(decisions: &[ReviewDecision]) -> HashMap<(String, usize), bool> {
    let mut latest: BTreeMap<(String, usize, String), bool> = BTreeMap::new();
    for d in decisions {
        latest.insert(
            (d.record_id.clone(), d.qa_index, d.reviewer.clone()),
            d.answerable && d.correct,
        );
    }
    let mut tally: HashMap<(String, usize), (usize, usize)> = HashMap::new();
    for ((rec, qa, _), yes) in latest {
        let t = tally.entry((rec, qa)).or_default();
        t.1 += 1;
        if yes {
            t.0 += 1;
        }
    }
    tally
        .into_iter()
        .map(|(k, (yes, n))| (k, 2 * yes > n))
        .collect()
}

/// Output of [`build_benchmark`].
#[derive(Debug, Clone)]
pub struct BenchmarkBuild {
    pub records: Vec<BenchmarkRecord>,
    /// Requested chart types with no admitted record.
    pub omitted_types: Vec<String>,
    pub reviewed: bool,
}

fn to_bench_qa(i: usize, qa: &QAPair) -> BenchQa {
    BenchQa {
        qa_index: i,
        level: qa.level,
        question: qa.question.clone(),
        answer_long: qa.answer_long.clone(),
        answer_short: qa.answer_short.clone().unwrap_or_default(),
    }
}

/// Picks up to `k` renderings of one payload, alternating annotated and
/// unannotated styles where both exist.
fn pick_styles<'a>(
    group: &[(&'a ChartInstance, &'a RenderScript)],
    k: usize,
) -> Vec<(&'a ChartInstance, &'a RenderScript)> {
    let (mut ann, mut plain): (Vec<_>, Vec<_>) =
        group.iter().copied().partition(|(_, s)| s.style.annotated);
    ann.reverse();
    plain.reverse();
    let mut out = Vec::with_capacity(k);
    let mut want_annotated = true;
    while out.len() < k {
        let next = if want_annotated {
            ann.pop().or_else(|| plain.pop())
        } else {
            plain.pop().or_else(|| ann.pop())
        };
        match next {
            Some(p) => out.push(p),
            None => break,
        }
        want_annotated = !want_annotated;
    }
    out
}

/// Builds benchmark records from accepted instances.
///
/// Per chart type, payloads are visited in data-id order and each
/// contributes up to `styles_per_group` renderings until `quota_per_type`
/// images are taken. With `decisions`, only QAs admitted by review are kept
/// and undecided QAs are left out; without, every leveled QA is admitted.
pub fn build_benchmark(
    instances: &[ChartInstance],
    data: &[ChartData],
    scripts: &[RenderScript],
    specs: &[ChartTypeSpec],
    chart_types: &[String],
    decisions: Option<&[ReviewDecision]>,
    cfg: &BenchConfig,
) -> Result<BenchmarkBuild> {
    if cfg.quota_per_type == 0 || cfg.styles_per_group == 0 {
        return Err(Error::ZeroQuota);
    }
    let data_by_id: HashMap<&str, &ChartData> = data.iter().map(|d| (d.id.as_str(), d)).collect();
    let script_by_id: HashMap<&str, &RenderScript> =
        scripts.iter().map(|s| (s.id.as_str(), s)).collect();
    let spec_by_name: HashMap<&str, &ChartTypeSpec> =
        specs.iter().map(|s| (s.name.as_str(), s)).collect();

    let admitted = decisions.map(|ds| {
        let known: HashSet<&str> = instances
            .iter()
            .filter(|i| i.accepted())
            .map(|i| i.id.as_str())
            .collect();
        ds.iter()
            .find(|d| !known.contains(d.record_id.as_str()))
            .map_or(Ok(()), |d| {
                Err(Error::UnknownReviewRecord(d.record_id.clone()))
            })
            .map(|_| admission(ds))
    });
    let admitted = admitted.transpose()?;

    let mut records = Vec::new();
    let mut omitted = Vec::new();
    for chart_type in chart_types {
        let mut groups: BTreeMap<&str, Vec<(&ChartInstance, &RenderScript)>> = BTreeMap::new();
        for inst in instances
            .iter()
            .filter(|i| i.accepted() && &i.chart_type == chart_type)
        {
            let script = script_by_id
                .get(inst.script_id.as_str())
                .ok_or_else(|| Error::Unresolved(format!("script `{}`", inst.script_id)))?;
            groups
                .entry(inst.data_id.as_str())
                .or_default()
                .push((inst, script));
        }
        let spec = spec_by_name.get(chart_type.as_str());
        let mut taken = 0;
        for (data_id, mut group) in groups {
            if taken >= cfg.quota_per_type {
                break;
            }
            let d = data_by_id
                .get(data_id)
                .ok_or_else(|| Error::Unresolved(format!("data `{data_id}`")))?;
            let spec =
                spec.ok_or_else(|| Error::Unresolved(format!("chart type `{chart_type}`")))?;
            group.sort_by(|a, b| a.1.id.cmp(&b.1.id));
            let k = cfg.styles_per_group.min(cfg.quota_per_type - taken);
            for (inst, script) in pick_styles(&group, k) {
                let keep = |i: usize| match &admitted {
                    None => true,
                    Some(a) => a.get(&(inst.id.clone(), i)).copied().unwrap_or(false),
                };
                let qas: Vec<BenchQa> = d
                    .qas
                    .iter()
                    .enumerate()
                    .filter(|(i, q)| q.level.is_leveled() && keep(*i))
                    .map(|(i, q)| to_bench_qa(i, q))
                    .collect();
                if qas.is_empty() {
                    continue;
                }
                let long_form = d
                    .qas
                    .iter()
                    .enumerate()
                    .filter(|(_, q)| !q.level.is_leveled())
                    .map(|(i, q)| to_bench_qa(i, q))
                    .collect();
                records.push(BenchmarkRecord {
                    id: inst.id.clone(),
                    image_ref: inst.image_ref.clone().unwrap_or_default(),
                    chart_type: chart_type.clone(),
                    annotated: script.style.annotated,
                    style_group: d.id.clone(),
                    data_id: d.id.clone(),
                    script_id: script.id.clone(),
                    payload: d.payload.clone(),
                    data_section: spec.template.data_section_path.clone(),
                    qas,
                    long_form,
                });
                taken += 1;
            }
        }
        if taken == 0 {
            log::warn!("chart type `{chart_type}` has no admitted benchmark records; omitted");
            omitted.push(chart_type.clone());
        }
    }
    Ok(BenchmarkBuild {
        records,
        omitted_types: omitted,
        reviewed: decisions.is_some(),
    })
}

/// `|p - g| <= tol * |g|`, exact equality when `g` is zero.
pub fn within_tolerance(p: f64, g: f64, tol: f64) -> bool {
    if g == 0.0 {
        p == 0.0
    } else {
        (p - g).abs() <= tol * g.abs() + f64::EPSILON * g.abs()
    }
}

/// Relaxed-accuracy check of one short answer. Never fails: anything
/// unparseable is simply incorrect.
pub fn score_short_answer(prediction: &str, gold: &str, tolerance: f64) -> bool {
    match (canonicalize_answer(gold), canonicalize_answer(prediction)) {
        (CanonicalAnswer::Number(g), CanonicalAnswer::Number(p)) => {
            within_tolerance(p, g, tolerance)
        }
        (CanonicalAnswer::Number(_), CanonicalAnswer::Text(_)) => false,
        (CanonicalAnswer::Text(g), p) => !g.is_empty() && p.normalized() == g,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TableScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn norm_label(s: &str) -> String {
    s.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Cell-level precision/recall/F1 of a predicted table against the payload.
/// Cells match one-to-one when row and column labels agree after
/// normalization and the value is within the relative tolerance.
pub fn score_chart_to_table(
    prediction: &str,
    payload: &Value,
    section: &KeyPath,
    tolerance: f64,
) -> TableScore {
    let Ok(gold) = flatten_cells(payload, section) else {
        return TableScore::default();
    };
    let Some(pred) = parse_table(prediction) else {
        return TableScore::default();
    };
    if pred.is_empty() || gold.is_empty() {
        return TableScore::default();
    }
    let edges: Vec<Vec<usize>> = gold
        .iter()
        .map(|g| {
            let (row, col) = (norm_label(&g.row), norm_label(&g.col));
            pred.iter()
                .enumerate()
                .filter(|(_, p)| {
                    norm_label(&p.row) == row
                        && norm_label(&p.col) == col
                        && p.value
                            .as_number()
                            .is_some_and(|v| within_tolerance(v, g.value, tolerance))
                })
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    let matched = max_matching(&edges, pred.len());
    let precision = matched as f64 / pred.len() as f64;
    let recall = matched as f64 / gold.len() as f64;
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    TableScore {
        precision,
        recall,
        f1,
    }
}

/// Maximum bipartite matching size (augmenting paths).
fn max_matching(edges: &[Vec<usize>], right: usize) -> usize {
    fn augment(
        u: usize,
        edges: &[Vec<usize>],
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for &v in &edges[u] {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if owner[v].is_none_or(|w| augment(w, edges, seen, owner)) {
                owner[v] = Some(u);
                return true;
            }
        }
        false
    }
    let mut owner = vec![None; right];
    (0..edges.len())
        .filter(|&u| augment(u, edges, &mut vec![false; right], &mut owner))
        .count()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub record_id: String,
    pub qa_index: usize,
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TablePrediction {
    pub record_id: String,
    pub table: String,
}

pub fn read_predictions(path: &Path) -> Result<Vec<Prediction>> {
    read_ndjson(path)
}

pub fn read_table_predictions(path: &Path) -> Result<Vec<TablePrediction>> {
    read_ndjson(path)
}

/// Scores free-form long answers. Implementations are heuristics, not part
/// of the accuracy metric.
pub trait LongAnswerJudge {
    fn name(&self) -> &str;
    /// Score in `[0, 1]`.
    fn score(&self, prediction: &str, gold: &str) -> f64;
}

/// Non-canonical heuristic: fraction of distinct gold keywords (alphanumeric
/// tokens of length >= 3) present in the prediction.
#[derive(Debug, Clone, Copy, Default)]
pub struct KeywordOverlapJudge;

fn keywords(s: &str) -> BTreeSet<String> {
    s.split(|c: char| !c.is_alphanumeric() && c != '.')
        .map(|w| w.trim_matches('.').to_lowercase())
        .filter(|w| w.chars().count() >= 3)
        .collect()
}

impl LongAnswerJudge for KeywordOverlapJudge {
    fn name(&self) -> &str {
        "keyword_overlap (non-canonical)"
    }

    fn score(&self, prediction: &str, gold: &str) -> f64 {
        let g = keywords(gold);
        if g.is_empty() {
            return 0.0;
        }
        let p = keywords(prediction);
        g.intersection(&p).count() as f64 / g.len() as f64
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

impl Accuracy {
    fn add(&mut self, ok: bool) {
        self.total += 1;
        if ok {
            self.correct += 1;
        }
    }

    fn finish(mut self) -> Self {
        self.accuracy = if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        };
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub records: usize,
    pub missing: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongFormReport {
    pub judge: String,
    pub mean_score: f64,
    pub scored: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config_hash: String,
    pub tolerance: f64,
    pub overall: Accuracy,
    pub per_level: BTreeMap<QaLevel, Accuracy>,
    pub basic: Accuracy,
    pub advanced: Accuracy,
    pub predictions: usize,
    pub missing: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart_to_table: Option<TableReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub long_form: Option<LongFormReport>,
}

pub struct EvalOptions<'a> {
    pub tolerance: f64,
    pub basic_types: &'a [String],
    pub config_hash: &'a str,
    pub judge: Option<&'a dyn LongAnswerJudge>,
}

/// Scores predictions against the benchmark. Missing predictions count as
/// incorrect; duplicate or unknown keys are errors.
pub fn evaluate(
    records: &[BenchmarkRecord],
    predictions: &[Prediction],
    tables: Option<&[TablePrediction]>,
    opts: &EvalOptions<'_>,
) -> Result<EvalReport> {
    enum Gold<'a> {
        Short,
        Long(&'a BenchQa),
    }
    let mut gold: HashMap<(&str, usize), Gold<'_>> = HashMap::new();
    for r in records {
        for q in &r.qas {
            gold.insert((r.id.as_str(), q.qa_index), Gold::Short);
        }
        for q in &r.long_form {
            gold.insert((r.id.as_str(), q.qa_index), Gold::Long(q));
        }
    }
    let mut answers: HashMap<(&str, usize), &str> = HashMap::new();
    for p in predictions {
        let key = (p.record_id.as_str(), p.qa_index);
        if !gold.contains_key(&key) {
            return Err(Error::UnknownPrediction {
                record_id: p.record_id.clone(),
                qa_index: p.qa_index,
            });
        }
        if answers.insert(key, p.answer.as_str()).is_some() {
            return Err(Error::DuplicatePrediction {
                record_id: p.record_id.clone(),
                qa_index: p.qa_index,
            });
        }
    }

    let mut overall = Accuracy::default();
    let mut per_level: BTreeMap<QaLevel, Accuracy> = QaLevel::LEVELED
        .iter()
        .map(|l| (*l, Accuracy::default()))
        .collect();
    let (mut basic, mut advanced) = (Accuracy::default(), Accuracy::default());
    let mut missing = 0;
    for r in records {
        let is_basic = opts.basic_types.iter().any(|t| t == &r.chart_type);
        for q in &r.qas {
            let ok = match answers.get(&(r.id.as_str(), q.qa_index)) {
                Some(a) => score_short_answer(a, &q.answer_short, opts.tolerance),
                None => {
                    missing += 1;
                    false
                }
            };
            overall.add(ok);
            per_level.entry(q.level).or_default().add(ok);
            if is_basic {
                basic.add(ok)
            } else {
                advanced.add(ok)
            }
        }
    }

    let long_form = opts.judge.map(|judge| {
        let scores: Vec<f64> = answers
            .iter()
            .filter_map(|(k, a)| match gold.get(k) {
                Some(Gold::Long(q)) => Some(judge.score(a, &q.answer_long)),
                _ => None,
            })
            .collect();
        LongFormReport {
            judge: judge.name().to_string(),
            mean_score: if scores.is_empty() {
                0.0
            } else {
                scores.iter().sum::<f64>() / scores.len() as f64
            },
            scored: scores.len(),
        }
    });

    let chart_to_table = tables.map(|tables| -> Result<TableReport> {
        let known: HashSet<&str> = records.iter().map(|r| r.id.as_str()).collect();
        let mut by_record: HashMap<&str, &str> = HashMap::new();
        for t in tables {
            if !known.contains(t.record_id.as_str()) {
                return Err(Error::UnknownPrediction {
                    record_id: t.record_id.clone(),
                    qa_index: 0,
                });
            }
            if by_record
                .insert(t.record_id.as_str(), t.table.as_str())
                .is_some()
            {
                return Err(Error::DuplicatePrediction {
                    record_id: t.record_id.clone(),
                    qa_index: 0,
                });
            }
        }
        let (mut p, mut r, mut f, mut miss) = (0.0, 0.0, 0.0, 0);
        for rec in records {
            match by_record.get(rec.id.as_str()) {
                Some(text) => {
                    let s =
                        score_chart_to_table(text, &rec.payload, &rec.data_section, opts.tolerance);
                    p += s.precision;
                    r += s.recall;
                    f += s.f1;
                }
                None => miss += 1,
            }
        }
        let n = records.len().max(1) as f64;
        Ok(TableReport {
            precision: p / n,
            recall: r / n,
            f1: f / n,
            records: records.len(),
            missing: miss,
        })
    });

    Ok(EvalReport {
        config_hash: opts.config_hash.to_string(),
        tolerance: opts.tolerance,
        overall: overall.finish(),
        per_level: per_level
            .into_iter()
            .map(|(k, v)| (k, v.finish()))
            .collect(),
        basic: basic.finish(),
        advanced: advanced.finish(),
        predictions: predictions.len(),
        missing,
        chart_to_table: chart_to_table.transpose()?,
        long_form,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchStats {
    pub images: usize,
    pub chart_types: usize,
    pub qas: usize,
    /// Leveled QAs per image.
    pub avg_qas_per_image: f64,
    /// Including description and summary QAs.
    pub avg_qas_per_image_with_long_form: f64,
    pub per_level: BTreeMap<QaLevel, usize>,
    pub annotated_fraction: f64,
    /// Style-group size -> number of groups.
    pub style_group_sizes: BTreeMap<usize, usize>,
    /// Fraction of payloads rendered under at least two styles.
    pub multi_style_fraction: f64,
}

pub fn benchmark_stats(records: &[BenchmarkRecord]) -> BenchStats {
    let images = records.len();
    let types: BTreeSet<&str> = records.iter().map(|r| r.chart_type.as_str()).collect();
    let qas: usize = records.iter().map(|r| r.qas.len()).sum();
    let long: usize = records.iter().map(|r| r.long_form.len()).sum();
    let mut per_level = BTreeMap::new();
    for q in records.iter().flat_map(|r| &r.qas) {
        *per_level.entry(q.level).or_insert(0) += 1;
    }
    let mut groups: BTreeMap<&str, usize> = BTreeMap::new();
    for r in records {
        *groups.entry(r.style_group.as_str()).or_insert(0) += 1;
    }
    let mut sizes = BTreeMap::new();
    for n in groups.values() {
        *sizes.entry(*n).or_insert(0) += 1;
    }
    let div = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    BenchStats {
        images,
        chart_types: types.len(),
        qas,
        avg_qas_per_image: div(qas, images),
        avg_qas_per_image_with_long_form: div(qas + long, images),
        per_level,
        annotated_fraction: div(records.iter().filter(|r| r.annotated).count(), images),
        style_group_sizes: sizes,
        multi_style_fraction: div(groups.values().filter(|n| **n >= 2).count(), groups.len()),
    }
}

/// Style groups whose members disagree on payload or repeat a script.
pub fn style_group_violations(records: &[BenchmarkRecord]) -> Vec<String> {
    let mut groups: BTreeMap<&str, Vec<&BenchmarkRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.style_group.as_str()).or_default().push(r);
    }
    groups
        .into_iter()
        .filter(|(_, rs)| {
            let payloads: HashSet<String> =
                rs.iter().map(|r| to_canonical_string(&r.payload)).collect();
            let scripts: HashSet<&str> = rs.iter().map(|r| r.script_id.as_str()).collect();
            payloads.len() != 1 || scripts.len() != rs.len()
        })
        .map(|(g, _)| g.to_string())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn short_answer_rules() {
        assert!(score_short_answer("102", "100", 0.05));
        assert!(score_short_answer("105", "100", 0.05));
        assert!(!score_short_answer("106", "100", 0.05));
        assert!(score_short_answer("tuesday", "Tuesday", 0.05));
        assert!(score_short_answer("  Tuesday ", "tuesday", 0.05));
        assert!(score_short_answer("0", "0", 0.05));
        assert!(!score_short_answer("0.001", "0", 0.05));
        assert!(!score_short_answer("about a hundred", "100", 0.05));
        assert!(score_short_answer("1,000", "1000", 0.0));
        assert!(score_short_answer("45%", "45", 0.0));
    }

    #[test]
    fn majority_with_last_write_wins() {
        let d = |rev: &str, ok: bool| ReviewDecision {
            record_id: "r".into(),
            qa_index: 3,
            answerable: true,
            correct: ok,
            reviewer: rev.into(),
            timestamp: "t".into(),
        };
        let a = admission(&[d("a", false), d("a", true)]);
        assert!(a[&("r".to_string(), 3)]);
        let a = admission(&[d("a", true), d("b", false), d("c", false)]);
        assert!(!a[&("r".to_string(), 3)]);
        let a = admission(&[d("a", true), d("b", false)]);
        assert!(!a[&("r".to_string(), 3)]);
    }

    fn payload() -> Value {
        json!({"data": [{"label": "A", "value": 10}, {"label": "B", "value": 20}, {"label": "C", "value": 30}, {"label": "D", "value": 40}]})
    }

    #[test]
    fn table_scores() {
        let sec = KeyPath::new("data");
        let exact = "label | value\nA | 10\nB | 20\nC | 30\nD | 40\n";
        assert_eq!(score_chart_to_table(exact, &payload(), &sec, 0.05).f1, 1.0);
        assert_eq!(
            score_chart_to_table("", &payload(), &sec, 0.05),
            TableScore::default()
        );
        let s = score_chart_to_table(
            "label | value\nA | 10\nB | 20.5\nC | 31\nD | 99",
            &payload(),
            &sec,
            0.05,
        );
        assert_eq!((s.precision, s.recall, s.f1), (0.75, 0.75, 0.75));
    }

    #[test]
    fn keyword_judge() {
        assert_eq!(
            KeywordOverlapJudge.score("sales rose sharply", "Sales rose."),
            1.0
        );
        assert_eq!(KeywordOverlapJudge.score("", "Sales rose."), 0.0);
    }

    #[test]
    fn empty_stats() {
        let s = benchmark_stats(&[]);
        assert_eq!((s.images, s.qas, s.avg_qas_per_image), (0, 0, 0.0));
    }
}
