//! Newline-delimited JSON stage manifests.
//!
//! Line 1 is a [`ManifestHeader`]; every following line is one record.
//! Records serialize with declared field order and sorted map keys, so equal
//! inputs produce byte-identical files.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::model::{ChartData, ChartInstance, ChartTypeSpec, RenderScript};

pub const MANIFEST_FORMAT: &str = "chartforge-manifest/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Templates,
    Data,
    Code,
    Compose,
    Render,
    Filter,
    Assemble,
    Benchmark,
    Evaluate,
    Stats,
}

impl Stage {
    pub const ALL: [Stage; 10] = [
        Stage::Templates,
        Stage::Data,
        Stage::Code,
        Stage::Compose,
        Stage::Render,
        Stage::Filter,
        Stage::Assemble,
        Stage::Benchmark,
        Stage::Evaluate,
        Stage::Stats,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Templates => "templates",
            Stage::Data => "data",
            Stage::Code => "code",
            Stage::Compose => "compose",
            Stage::Render => "render",
            Stage::Filter => "filter",
            Stage::Assemble => "assemble",
            Stage::Benchmark => "benchmark",
            Stage::Evaluate => "evaluate",
            Stage::Stats => "stats",
        }
    }

    /// Direct prerequisites in the stage DAG.
    pub fn prerequisites(self) -> &'static [Stage] {
        match self {
            Stage::Templates => &[],
            Stage::Data | Stage::Code => &[Stage::Templates],
            Stage::Compose => &[Stage::Data, Stage::Code],
            Stage::Render => &[Stage::Compose],
            Stage::Filter => &[Stage::Render],
            Stage::Assemble | Stage::Benchmark => &[Stage::Filter],
            Stage::Evaluate | Stage::Stats => &[Stage::Benchmark],
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.jsonl", self.as_str())
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| format!("unknown stage `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestHeader {
    pub format: String,
    pub stage: Stage,
    pub config_hash: String,
    pub seed: u64,
    pub count: usize,
    #[serde(default)]
    pub extra: BTreeMap<String, Value>,
}

impl ManifestHeader {
    pub fn new(stage: Stage, config_hash: &str, seed: u64) -> Self {
        ManifestHeader {
            format: MANIFEST_FORMAT.to_string(),
            stage,
            config_hash: config_hash.to_string(),
            seed,
            count: 0,
            extra: BTreeMap::new(),
        }
    }

    pub fn with_extra(mut self, key: &str, value: impl Serialize) -> Self {
        self.extra.insert(
            key.to_string(),
            serde_json::to_value(value).expect("header extras are serializable"),
        );
        self
    }

    pub fn extra_u64(&self, key: &str) -> Option<u64> {
        self.extra.get(key).and_then(Value::as_u64)
    }
}

/// A record type that can live in a manifest.
pub trait ManifestRecord: Serialize + DeserializeOwned {
    const KIND: &'static str;
    fn record_id(&self) -> &str;
    fn check(&self) -> Result<(), String>;
}

impl ManifestRecord for ChartTypeSpec {
    const KIND: &'static str = "chart type spec";
    fn record_id(&self) -> &str {
        &self.name
    }
    fn check(&self) -> Result<(), String> {
        self.validate().map_err(|p| p.join("; "))
    }
}

impl ManifestRecord for ChartData {
    const KIND: &'static str = "chart data";
    fn record_id(&self) -> &str {
        &self.id
    }
    fn check(&self) -> Result<(), String> {
        if self.id.is_empty() {
            return Err("empty id".into());
        }
        crate::model::check_qa_plan(&self.qas)
    }
}

impl ManifestRecord for RenderScript {
    const KIND: &'static str = "render script";
    fn record_id(&self) -> &str {
        &self.id
    }
    fn check(&self) -> Result<(), String> {
        self.validate()
    }
}

impl ManifestRecord for ChartInstance {
    const KIND: &'static str = "chart instance";
    fn record_id(&self) -> &str {
        &self.id
    }
    fn check(&self) -> Result<(), String> {
        self.validate()
    }
}

fn validate_records<R: ManifestRecord>(records: &[R]) -> Result<()> {
    let bad: Vec<String> = records
        .iter()
        .filter_map(|r| r.check().err().map(|e| format!("{} ({e})", r.record_id())))
        .collect();
    if !bad.is_empty() {
        return Err(Error::InvalidRecords {
            kind: R::KIND,
            ids: bad,
        });
    }
    let mut seen = HashSet::new();
    let mut dups: Vec<String> = records
        .iter()
        .map(|r| r.record_id())
        .filter(|id| !seen.insert(*id))
        .map(str::to_string)
        .collect();
    if !dups.is_empty() {
        dups.sort();
        dups.dedup();
        return Err(Error::DuplicateIds(dups));
    }
    Ok(())
}

/// Serializes header and records into manifest text.
pub fn render_manifest<R: ManifestRecord>(
    header: &ManifestHeader,
    records: &[R],
) -> Result<String> {
    validate_records(records)?;
    let mut header = header.clone();
    header.count = records.len();
    let mut out = serde_json::to_string(&header)?;
    out.push('\n');
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

/// Writes a manifest atomically (temp file + rename). Returns the header as
/// written (with `count` filled in).
pub fn write_manifest<R: ManifestRecord>(
    path: &Path,
    header: &ManifestHeader,
    records: &[R],
) -> Result<ManifestHeader> {
    let text = render_manifest(header, records)?;
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let tmp = tmp_path(path);
    fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    let mut h = header.clone();
    h.count = records.len();
    Ok(h)
}

fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".tmp");
    path.with_file_name(name)
}

/// What a reader insists on.
#[derive(Debug, Clone, Copy, Default)]
pub struct Expect<'a> {
    pub stage: Option<Stage>,
    pub config_hash: Option<&'a str>,
}

impl<'a> Expect<'a> {
    pub fn stage(stage: Stage) -> Self {
        Expect {
            stage: Some(stage),
            config_hash: None,
        }
    }

    pub fn resume(stage: Stage, config_hash: &'a str) -> Self {
        Expect {
            stage: Some(stage),
            config_hash: Some(config_hash),
        }
    }
}

fn parse_header(path: &Path, line: &str, expect: Expect<'_>) -> Result<ManifestHeader> {
    let raw: Value = serde_json::from_str(line).map_err(|e| Error::ManifestParse {
        path: path.to_path_buf(),
        line: 1,
        message: e.to_string(),
    })?;
    if let Some(name) = raw.get("stage").and_then(Value::as_str) {
        if Stage::from_str(name).is_err() {
            return Err(Error::UnknownStage {
                path: path.to_path_buf(),
                name: name.to_string(),
            });
        }
    }
    let header: ManifestHeader = serde_json::from_value(raw).map_err(|e| Error::ManifestParse {
        path: path.to_path_buf(),
        line: 1,
        message: e.to_string(),
    })?;
    if header.format != MANIFEST_FORMAT {
        return Err(Error::ManifestParse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("unsupported manifest format `{}`", header.format),
        });
    }
    if let Some(stage) = expect.stage {
        if header.stage != stage {
            return Err(Error::StageMismatch {
                path: path.to_path_buf(),
                expected: stage,
                found: header.stage,
            });
        }
    }
    if let Some(hash) = expect.config_hash {
        if header.config_hash != hash {
            return Err(Error::HashMismatch {
                path: path.to_path_buf(),
                expected: hash.to_string(),
                found: header.config_hash.clone(),
            });
        }
    }
    Ok(header)
}

/// Reads only the header line.
pub fn read_header(path: &Path, expect: Expect<'_>) -> Result<ManifestHeader> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut first = String::new();
    BufReader::new(file)
        .read_line(&mut first)
        .map_err(|e| Error::io(path, e))?;
    if first.trim().is_empty() {
        return Err(Error::ManifestParse {
            path: path.to_path_buf(),
            line: 1,
            message: "missing header".into(),
        });
    }
    parse_header(path, first.trim_end_matches('\n'), expect)
}

/// Reads a complete manifest. Every line must be newline-terminated and the
/// record count must match the header.
pub fn read_manifest<R: ManifestRecord>(
    path: &Path,
    expect: Expect<'_>,
) -> Result<(ManifestHeader, Vec<R>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_manifest(path, &text, expect, true)
}

/// Reads a manifest that may still be growing: a trailing partial line is
/// ignored and the header count is not enforced.
pub fn read_partial<R: ManifestRecord>(
    path: &Path,
    expect: Expect<'_>,
) -> Result<(ManifestHeader, Vec<R>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let complete = match text.rfind('\n') {
        Some(i) => &text[..=i],
        None => "",
    };
    parse_manifest(path, complete, expect, false)
}

fn parse_manifest<R: ManifestRecord>(
    path: &Path,
    text: &str,
    expect: Expect<'_>,
    strict: bool,
) -> Result<(ManifestHeader, Vec<R>)> {
    let parse_err = |line: usize, message: String| Error::ManifestParse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.split_inclusive('\n').enumerate();
    let (_, first) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing header".into()))?;
    if strict && !first.ends_with('\n') {
        return Err(parse_err(1, "truncated line".into()));
    }
    let header = parse_header(path, first.trim_end_matches('\n'), expect)?;
    let mut records = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        if strict && !line.ends_with('\n') {
            return Err(parse_err(lineno, "truncated line".into()));
        }
        let body = line.trim_end_matches('\n');
        if body.is_empty() {
            continue;
        }
        let record: R = serde_json::from_str(body).map_err(|e| parse_err(lineno, e.to_string()))?;
        records.push(record);
    }
    if strict && records.len() != header.count {
        return Err(parse_err(
            records.len() + 2,
            format!(
                "header declares {} records, found {}",
                header.count,
                records.len()
            ),
        ));
    }
    Ok((header, records))
}

/// Append-only writer for manifests filled in incrementally (resumable
/// stages). Each record is flushed before `append` returns.
pub struct AppendWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl AppendWriter {
    /// Starts a fresh file with `header`.
    pub fn create(path: &Path, header: &ManifestHeader) -> Result<Self> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = AppendWriter {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
        };
        w.write_line(&serde_json::to_string(header)?)?;
        Ok(w)
    }

    /// Reopens an existing file, dropping any trailing partial line.
    pub fn reopen(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let keep = text.rfind('\n').map_or(0, |i| i + 1);
        if keep != text.len() {
            let f = fs::OpenOptions::new()
                .write(true)
                .open(path)
                .map_err(|e| Error::io(path, e))?;
            f.set_len(keep as u64).map_err(|e| Error::io(path, e))?;
        }
        let file = fs::OpenOptions::new()
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        Ok(AppendWriter {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
        })
    }

    pub fn append<R: ManifestRecord>(&mut self, record: &R) -> Result<()> {
        record.check().map_err(|e| Error::InvalidRecords {
            kind: R::KIND,
            ids: vec![format!("{} ({e})", record.record_id())],
        })?;
        let line = serde_json::to_string(record)?;
        self.write_line(&line)
    }

    fn write_line(&mut self, line: &str) -> Result<()> {
        let path = &self.path;
        self.out
            .write_all(line.as_bytes())
            .and_then(|_| self.out.write_all(b"\n"))
            .and_then(|_| self.out.flush())
            .map_err(|e| Error::io(path, e))
    }
}
