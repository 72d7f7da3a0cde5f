//! Dual-Path training corpora: general, data-driven and JSON-only QA
//! samples, pretraining alignment pairs, and conversation-format export.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::canonical::{content_id, to_canonical_string};
use crate::config::BlendWeights;
use crate::error::{Error, Result};
use crate::forge::derive_seed;
use crate::model::{ChartData, ChartInstance, ChartTypeSpec, QaLevel};

pub const CAPTION_INSTRUCTION: &str = "Describe this chart in detail.";
pub const IMAGE_TOKEN: &str = "<image>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    General,
    DataDriven,
    JsonOnly,
    PretrainCaption,
    PretrainJson,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::General,
        Variant::DataDriven,
        Variant::JsonOnly,
        Variant::PretrainCaption,
        Variant::PretrainJson,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::General => "general",
            Variant::DataDriven => "data_driven",
            Variant::JsonOnly => "json_only",
            Variant::PretrainCaption => "pretrain_caption",
            Variant::PretrainJson => "pretrain_json",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TurnRole {
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub role: TurnRole,
    pub content: String,
    pub image_ref: Option<String>,
}

impl Turn {
    fn user(content: impl Into<String>, image_ref: Option<&str>) -> Self {
        Turn {
            role: TurnRole::User,
            content: content.into(),
            image_ref: image_ref.map(str::to_string),
        }
    }

    fn assistant(content: impl Into<String>) -> Self {
        Turn {
            role: TurnRole::Assistant,
            content: content.into(),
            image_ref: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingSample {
    pub id: String,
    pub variant: Variant,
    pub turns: Vec<Turn>,
    pub source_ids: Vec<String>,
}

impl TrainingSample {
    pub fn image_ref(&self) -> Option<&str> {
        self.turns.iter().find_map(|t| t.image_ref.as_deref())
    }

    /// Checks the per-variant shape invariants.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let expected_turns = match self.variant {
            Variant::DataDriven => 4,
            _ => 2,
        };
        if self.turns.len() != expected_turns {
            return Err(format!(
                "{} sample has {} turns",
                self.variant,
                self.turns.len()
            ));
        }
        for (i, t) in self.turns.iter().enumerate() {
            let role = if i % 2 == 0 {
                TurnRole::User
            } else {
                TurnRole::Assistant
            };
            if t.role != role {
                return Err(format!("turn {i} has role {:?}", t.role));
            }
            if t.content.trim().is_empty() {
                return Err(format!("turn {i} is empty"));
            }
            if i > 0 && t.image_ref.is_some() {
                return Err(format!("turn {i} carries an image"));
            }
        }
        let has_image = self.turns[0].image_ref.is_some();
        match (self.variant, has_image) {
            (Variant::JsonOnly, true) => Err("json_only sample references an image".into()),
            (Variant::JsonOnly, false) | (_, true) => Ok(()),
            (v, false) => Err(format!("{v} sample lacks an image on its first turn")),
        }
    }
}

fn sample_id(variant: Variant, source: &str, qa_index: Option<usize>) -> String {
    let idx = qa_index.map(|i| i.to_string()).unwrap_or_default();
    content_id(&["sample", variant.as_str(), source, &idx])
}

fn accepted_image(instance: &ChartInstance) -> Result<&str> {
    if !instance.accepted() {
        return Err(Error::RejectedInstance(instance.id.clone()));
    }
    instance
        .image_ref
        .as_deref()
        .ok_or_else(|| Error::RejectedInstance(instance.id.clone()))
}

fn qa_at(data: &ChartData, qa_index: usize) -> Result<&crate::model::QAPair> {
    data.qas
        .get(qa_index)
        .ok_or_else(|| Error::Unresolved(format!("QA {qa_index} of data `{}`", data.id)))
}

fn instance_sources(instance: &ChartInstance) -> Vec<String> {
    vec![
        instance.id.clone(),
        instance.data_id.clone(),
        instance.script_id.clone(),
    ]
}

pub fn build_general(
    instance: &ChartInstance,
    data: &ChartData,
    qa_index: usize,
) -> Result<TrainingSample> {
    let image = accepted_image(instance)?;
    let qa = qa_at(data, qa_index)?;
    Ok(TrainingSample {
        id: sample_id(Variant::General, &instance.id, Some(qa_index)),
        variant: Variant::General,
        turns: vec![
            Turn::user(&qa.question, Some(image)),
            Turn::assistant(&qa.answer_long),
        ],
        source_ids: instance_sources(instance),
    })
}

pub fn build_data_driven(
    instance: &ChartInstance,
    data: &ChartData,
    qa_index: usize,
    extraction_instruction: &str,
) -> Result<TrainingSample> {
    let image = accepted_image(instance)?;
    let qa = qa_at(data, qa_index)?;
    Ok(TrainingSample {
        id: sample_id(Variant::DataDriven, &instance.id, Some(qa_index)),
        variant: Variant::DataDriven,
        turns: vec![
            Turn::user(extraction_instruction, Some(image)),
            Turn::assistant(to_canonical_string(&data.payload)),
            Turn::user(&qa.question, None),
            Turn::assistant(&qa.answer_long),
        ],
        source_ids: instance_sources(instance),
    })
}

pub fn build_json_only(data: &ChartData, readme: &str, qa_index: usize) -> Result<TrainingSample> {
    let qa = qa_at(data, qa_index)?;
    let user = format!(
        "{}\n\nChart data (JSON):\n{}\n\n{}",
        readme.trim_end(),
        to_canonical_string(&data.payload),
        qa.question
    );
    Ok(TrainingSample {
        id: sample_id(Variant::JsonOnly, &data.id, Some(qa_index)),
        variant: Variant::JsonOnly,
        turns: vec![Turn::user(user, None), Turn::assistant(&qa.answer_long)],
        source_ids: vec![data.id.clone()],
    })
}

pub fn build_pretrain_pairs(
    instance: &ChartInstance,
    data: &ChartData,
    extraction_instruction: &str,
) -> Result<[TrainingSample; 2]> {
    let image = accepted_image(instance)?;
    let description = data
        .description()
        .ok_or_else(|| Error::MissingDescription(instance.id.clone()))?;
    Ok([
        TrainingSample {
            id: sample_id(Variant::PretrainCaption, &instance.id, None),
            variant: Variant::PretrainCaption,
            turns: vec![
                Turn::user(CAPTION_INSTRUCTION, Some(image)),
                Turn::assistant(&description.answer_long),
            ],
            source_ids: instance_sources(instance),
        },
        TrainingSample {
            id: sample_id(Variant::PretrainJson, &instance.id, None),
            variant: Variant::PretrainJson,
            turns: vec![
                Turn::user(extraction_instruction, Some(image)),
                Turn::assistant(to_canonical_string(&data.payload)),
            ],
            source_ids: instance_sources(instance),
        },
    ])
}

/// Inference-time prompt asking for data extraction before answering.
pub fn data_prompting_prompt(question: &str) -> Result<String> {
    let q = question.trim();
    if q.is_empty() {
        return Err(Error::EmptyQuestion);
    }
    Ok(format!(
        "Step 1: Extract the underlying data of the chart and write it out as a JSON object.\n\
         Step 2: Using the extracted data together with the chart, answer the question.\n\n\
         Question: {q}"
    ))
}

/// Every sample derivable from an accepted corpus, per variant.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub general: Vec<TrainingSample>,
    pub data_driven: Vec<TrainingSample>,
    pub json_only: Vec<TrainingSample>,
    pub pretrain: Vec<TrainingSample>,
}

impl Corpus {
    pub fn counts(&self) -> BTreeMap<Variant, usize> {
        let mut c = BTreeMap::new();
        for s in self
            .general
            .iter()
            .chain(&self.data_driven)
            .chain(&self.json_only)
            .chain(&self.pretrain)
        {
            *c.entry(s.variant).or_insert(0) += 1;
        }
        c
    }
}

/// Builds all samples from the accepted instances of a filtered corpus.
pub fn assemble(
    instances: &[ChartInstance],
    data: &[ChartData],
    specs: &[ChartTypeSpec],
    extraction_instruction: &str,
) -> Result<Corpus> {
    let data_by_id: HashMap<&str, &ChartData> = data.iter().map(|d| (d.id.as_str(), d)).collect();
    let readme: HashMap<&str, &str> = specs
        .iter()
        .map(|s| (s.name.as_str(), s.readme.as_str()))
        .collect();
    let mut corpus = Corpus::default();
    let mut json_done = HashSet::new();
    for inst in instances.iter().filter(|i| i.accepted()) {
        let d = data_by_id
            .get(inst.data_id.as_str())
            .ok_or_else(|| Error::Unresolved(format!("data `{}`", inst.data_id)))?;
        for (i, qa) in d.qas.iter().enumerate() {
            corpus.general.push(build_general(inst, d, i)?);
            if qa.level.is_leveled() {
                corpus
                    .data_driven
                    .push(build_data_driven(inst, d, i, extraction_instruction)?);
            }
        }
        corpus
            .pretrain
            .extend(build_pretrain_pairs(inst, d, extraction_instruction)?);
        if json_done.insert(d.id.as_str()) {
            let rm = readme
                .get(d.chart_type.as_str())
                .ok_or_else(|| Error::Unresolved(format!("chart type `{}`", d.chart_type)))?;
            for i in 0..d.qas.len() {
                corpus.json_only.push(build_json_only(d, rm, i)?);
            }
        }
    }
    Ok(corpus)
}

fn pair_key(s: &TrainingSample) -> (String, String) {
    let question = s
        .turns
        .get(2)
        .map(|t| t.content.clone())
        .unwrap_or_default();
    (s.source_ids.first().cloned().unwrap_or_default(), question)
}

/// Selects instruction samples in the ratio `weights` while keeping every
/// chosen data-driven sample's general counterpart.
///
/// The scale is the largest `k` with `k * weight <= available` for every
/// variant that has a positive weight and at least one sample.
pub fn blend(corpus: &Corpus, weights: BlendWeights, seed: u64) -> Vec<TrainingSample> {
    let pools = [
        (weights.general, corpus.general.len()),
        (weights.data_driven, corpus.data_driven.len()),
        (weights.json_only, corpus.json_only.len()),
    ];
    let scale = pools
        .iter()
        .filter(|(w, n)| *w > 0.0 && *n > 0)
        .map(|(w, n)| *n as f64 / w)
        .fold(f64::INFINITY, f64::min);
    if !scale.is_finite() {
        return Vec::new();
    }
    let target = |w: f64, n: usize| ((w * scale + 1e-9).floor() as usize).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[&seed.to_string(), "blend"]));

    let mut dd: Vec<&TrainingSample> = corpus.data_driven.iter().collect();
    dd.shuffle(&mut rng);
    dd.truncate(target(weights.data_driven, dd.len()));

    let general_by_key: HashMap<(String, String), &TrainingSample> = corpus
        .general
        .iter()
        .map(|g| ((g.source_ids[0].clone(), g.turns[0].content.clone()), g))
        .collect();
    let mut chosen_general: Vec<&TrainingSample> = Vec::new();
    let mut taken = HashSet::new();
    for s in &dd {
        if let Some(g) = general_by_key.get(&pair_key(s)) {
            if taken.insert(g.id.as_str()) {
                chosen_general.push(g);
            }
        }
    }
    let want_general = target(weights.general, corpus.general.len()).max(chosen_general.len());
    let mut rest: Vec<&TrainingSample> = corpus
        .general
        .iter()
        .filter(|g| !taken.contains(g.id.as_str()))
        .collect();
    rest.shuffle(&mut rng);
    chosen_general.extend(rest.into_iter().take(want_general - chosen_general.len()));

    let mut jo: Vec<&TrainingSample> = corpus.json_only.iter().collect();
    jo.shuffle(&mut rng);
    jo.truncate(target(weights.json_only, jo.len()));

    let mut out: Vec<TrainingSample> = chosen_general
        .into_iter()
        .chain(dd)
        .chain(jo)
        .cloned()
        .collect();
    out.sort_by(|a, b| a.id.cmp(&b.id));
    out.shuffle(&mut rng);
    out
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ConversationTurn {
    pub from: String,
    pub value: String,
}

/// One exported line.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExportRecord {
    pub id: String,
    pub variant: Variant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<String>,
    pub sources: Vec<String>,
    pub conversations: Vec<ConversationTurn>,
}

impl ExportRecord {
    pub fn from_sample(s: &TrainingSample) -> Self {
        let image = s.image_ref().map(str::to_string);
        let conversations = s
            .turns
            .iter()
            .map(|t| ConversationTurn {
                from: match t.role {
                    TurnRole::User => "human".into(),
                    TurnRole::Assistant => "gpt".into(),
                },
                value: if t.image_ref.is_some() {
                    format!("{IMAGE_TOKEN}\n{}", t.content)
                } else {
                    t.content.clone()
                },
            })
            .collect();
        ExportRecord {
            id: s.id.clone(),
            variant: s.variant,
            image,
            sources: s.source_ids.clone(),
            conversations,
        }
    }

    /// Reconstructs the sample and checks its invariants.
    pub fn to_sample(&self) -> std::result::Result<TrainingSample, String> {
        let mut turns = Vec::with_capacity(self.conversations.len());
        for (i, c) in self.conversations.iter().enumerate() {
            let role = match c.from.as_str() {
                "human" => TurnRole::User,
                "gpt" => TurnRole::Assistant,
                other => return Err(format!("unknown speaker `{other}`")),
            };
            let (content, image_ref) = match c.value.strip_prefix(&format!("{IMAGE_TOKEN}\n")) {
                Some(rest) if i == 0 => {
                    let img = self
                        .image
                        .clone()
                        .ok_or("image token without image field")?;
                    (rest.to_string(), Some(img))
                }
                _ => (c.value.clone(), None),
            };
            turns.push(Turn {
                role,
                content,
                image_ref,
            });
        }
        if self.image.is_some() && turns.first().is_none_or(|t| t.image_ref.is_none()) {
            return Err("image field without image token".into());
        }
        let s = TrainingSample {
            id: self.id.clone(),
            variant: self.variant,
            turns,
            source_ids: self.sources.clone(),
        };
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExportStats {
    pub seed: u64,
    pub weights: BlendWeights,
    pub available: BTreeMap<Variant, usize>,
    pub exported: BTreeMap<Variant, usize>,
    pub instruct_total: usize,
    pub pretrain_total: usize,
}

pub const INSTRUCT_FILE: &str = "instruct.jsonl";
pub const PRETRAIN_FILE: &str = "pretrain.jsonl";
pub const STATS_FILE: &str = "stats.json";

fn write_jsonl(path: &Path, samples: &[TrainingSample]) -> Result<()> {
    let mut buf = Vec::new();
    for s in samples {
        serde_json::to_writer(&mut buf, &ExportRecord::from_sample(s))?;
        buf.push(b'\n');
    }
    let tmp = path.with_extension("jsonl.tmp");
    let mut f = std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(&buf).map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Writes `instruct.jsonl` (blended, shuffled), `pretrain.jsonl` and
/// `stats.json` into `dir`. Image paths are relative to `root`.
pub fn export_training_set(
    corpus: &Corpus,
    weights: BlendWeights,
    seed: u64,
    root: &Path,
    dir: &Path,
) -> Result<ExportStats> {
    let all = corpus
        .general
        .iter()
        .chain(&corpus.data_driven)
        .chain(&corpus.json_only)
        .chain(&corpus.pretrain);
    let mut checked = HashSet::new();
    for s in all {
        s.validate().map_err(|e| Error::InvalidRecords {
            kind: "training sample",
            ids: vec![format!("{} ({e})", s.id)],
        })?;
        if let Some(img) = s.image_ref() {
            if checked.insert(img) && !root.join(img).is_file() {
                return Err(Error::DanglingImage(img.to_string()));
            }
        }
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let instruct = blend(corpus, weights, seed);
    let mut pretrain = corpus.pretrain.clone();
    pretrain.sort_by(|a, b| a.id.cmp(&b.id));
    pretrain.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(&[
        &seed.to_string(),
        "pretrain",
    ])));
    write_jsonl(&dir.join(INSTRUCT_FILE), &instruct)?;
    write_jsonl(&dir.join(PRETRAIN_FILE), &pretrain)?;

    let mut exported = BTreeMap::new();
    for s in instruct.iter().chain(&pretrain) {
        *exported.entry(s.variant).or_insert(0) += 1;
    }
    let stats = ExportStats {
        seed,
        weights,
        available: corpus.counts(),
        exported,
        instruct_total: instruct.len(),
        pretrain_total: pretrain.len(),
    };
    let path = dir.join(STATS_FILE);
    let mut text = serde_json::to_string_pretty(&stats)?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(stats)
}

/// Parses an exported file back into samples, validating each record.
pub fn read_export(path: &Path) -> Result<Vec<TrainingSample>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            let rec: ExportRecord =
                serde_json::from_str(line).map_err(|e| Error::ManifestParse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: e.to_string(),
                })?;
            rec.to_sample().map_err(|message| Error::ManifestParse {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            })
        })
        .collect()
}

/// Payload text of a data-driven sample's extraction turn, parsed.
pub fn extracted_payload(sample: &TrainingSample) -> Option<Value> {
    (sample.variant == Variant::DataDriven)
        .then(|| serde_json::from_str(&sample.turns[1].content).ok())
        .flatten()
}

pub fn leveled_indices(data: &ChartData) -> impl Iterator<Item = usize> + '_ {
    data.qas
        .iter()
        .enumerate()
        .filter(|(_, q)| q.level != QaLevel::Description && q.level != QaLevel::Summary)
        .map(|(i, _)| i)
}
