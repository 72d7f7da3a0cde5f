#![allow(dead_code)]

pub mod oracle;

use std::collections::BTreeMap;
use std::path::Path;

use chartforge::config::PipelineConfig;
use chartforge::manifest::{read_manifest, Expect, ManifestHeader, ManifestRecord, Stage};
use chartforge::pipeline::{Pipeline, RunOptions};
use sha2::{Digest, Sha256};

pub fn shim() -> String {
    env!("CARGO_BIN_EXE_chartforge-shim").to_string()
}

pub fn cli() -> &'static str {
    env!("CARGO_BIN_EXE_chartforge")
}

/// Offline config rendering through the bundled shim. An empty type list
/// keeps all default chart types.
pub fn desk_config(types: &[&str], n: usize, m: usize, seed: u64) -> PipelineConfig {
    let mut cfg = PipelineConfig::default();
    cfg.seed = seed;
    if !types.is_empty() {
        cfg.chart_types = types.iter().map(|s| s.to_string()).collect();
    }
    cfg.scripts_per_type = n;
    cfg.data_per_type = m;
    cfg.render.shim = vec![shim()];
    cfg
}

pub fn pipeline(cfg: PipelineConfig, out: &Path) -> Pipeline {
    let mut opts = RunOptions::new(out);
    opts.jobs = 2;
    Pipeline::new(cfg, opts).expect("valid config")
}

/// Runs stages in order up to and including `last`, skipping `evaluate`.
pub fn run_through(p: &Pipeline, last: Stage) {
    for s in Stage::ALL {
        if s != Stage::Evaluate {
            p.run(s).unwrap_or_else(|e| panic!("stage {s}: {e}"));
        }
        if s == last {
            break;
        }
    }
}

pub fn records<R: ManifestRecord>(p: &Pipeline, stage: Stage) -> (ManifestHeader, Vec<R>) {
    read_manifest(&p.manifest_path(stage), Expect::stage(stage)).expect("readable manifest")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Relative path -> sha256 of every file under `root`.
pub fn tree_digests(root: &Path) -> BTreeMap<String, String> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, String>) {
        let mut entries: Vec<_> = std::fs::read_dir(dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        entries.sort();
        for p in entries {
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                let rel = p
                    .strip_prefix(root)
                    .unwrap()
                    .to_string_lossy()
                    .replace('\\', "/");
                out.insert(rel, sha256_hex(&std::fs::read(&p).unwrap()));
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}
