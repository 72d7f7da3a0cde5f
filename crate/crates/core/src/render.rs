//! Rendering composed instances through the sandboxed shim.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rayon::prelude::*;

use crate::canonical::to_canonical_string;
use crate::error::{Error, Result};
use crate::model::{ChartData, ChartInstance, RenderScript, RenderStatus};
use crate::sandbox::{check_png, execute, ExitKind, SandboxConfig};

pub const IMAGES_DIR: &str = "images";
pub const MIN_IMAGE_SIDE: u32 = 64;

pub fn image_ref_for(instance_id: &str) -> String {
    format!("{IMAGES_DIR}/{instance_id}.png")
}

/// Renders one instance and stores its image under `root`.
pub fn render_one(
    inst: &ChartInstance,
    data: &ChartData,
    script: &RenderScript,
    sandbox: &SandboxConfig,
    root: &Path,
) -> Result<ChartInstance> {
    if data.chart_type != script.chart_type {
        return Err(Error::MixedChartTypes(
            data.chart_type.clone(),
            script.chart_type.clone(),
        ));
    }
    let run = execute(sandbox, &script.source, &to_canonical_string(&data.payload))?;
    let mut out = inst.clone();
    out.filter = None;
    out.image_ref = None;
    out.stderr = None;
    match run.exit {
        ExitKind::TimedOut => {
            out.render_status = RenderStatus::Timeout;
            out.stderr = Some(run.stderr);
        }
        ExitKind::Failed(_) => {
            out.render_status = RenderStatus::ExecError;
            out.stderr = Some(run.stderr);
        }
        ExitKind::Success => {
            let checked = match &run.image {
                None => Err("no output produced".to_string()),
                Some(bytes) => check_png(bytes, MIN_IMAGE_SIDE).map(|_| bytes),
            };
            match checked {
                Err(why) => {
                    out.render_status = RenderStatus::BadImage;
                    let mut s = run.stderr;
                    s.push_str(&why);
                    out.stderr = Some(crate::sandbox::truncate_tail(&s, sandbox.stderr_limit));
                }
                Ok(bytes) => {
                    let rel = image_ref_for(&inst.id);
                    let path = root.join(&rel);
                    if let Some(dir) = path.parent() {
                        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                    }
                    std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
                    let side = crate::filter::sidecar_path(&path);
                    match &run.sidecar {
                        Some(text) => {
                            std::fs::write(&side, text).map_err(|e| Error::io(&side, e))?
                        }
                        None => {
                            let _ = std::fs::remove_file(&side);
                        }
                    }
                    out.render_status = RenderStatus::Ok;
                    out.image_ref = Some(rel);
                }
            }
        }
    }
    Ok(out)
}

/// Renders every non-terminal instance in parallel on at most `jobs`
/// workers. `sink` sees each finished instance as it completes; the result
/// keeps the input order.
pub fn render_all(
    instances: &[ChartInstance],
    data: &[ChartData],
    scripts: &[RenderScript],
    sandbox: &SandboxConfig,
    root: &Path,
    jobs: usize,
    sink: &(dyn Fn(&ChartInstance) -> Result<()> + Sync),
) -> Result<Vec<ChartInstance>> {
    let data: HashMap<&str, &ChartData> = data.iter().map(|d| (d.id.as_str(), d)).collect();
    let scripts: HashMap<&str, &RenderScript> =
        scripts.iter().map(|s| (s.id.as_str(), s)).collect();
    for inst in instances {
        if !data.contains_key(inst.data_id.as_str()) {
            return Err(Error::Unresolved(format!("data `{}`", inst.data_id)));
        }
        if !scripts.contains_key(inst.script_id.as_str()) {
            return Err(Error::Unresolved(format!("script `{}`", inst.script_id)));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| {
        instances
            .par_iter()
            .map(|inst| {
                if inst.render_status.is_terminal() {
                    return Ok(inst.clone());
                }
                let done = render_one(
                    inst,
                    data[inst.data_id.as_str()],
                    scripts[inst.script_id.as_str()],
                    sandbox,
                    root,
                )?;
                sink(&done)?;
                Ok(done)
            })
            .collect()
    })
}

pub fn status_histogram(instances: &[ChartInstance]) -> BTreeMap<String, usize> {
    let mut h = BTreeMap::new();
    for i in instances {
        *h.entry(i.render_status.as_str().to_string()).or_insert(0) += 1;
    }
    h
}

/// Fails the stage when fewer than `min_ok_fraction` of instances are ok.
pub fn check_budget(instances: &[ChartInstance], min_ok_fraction: f64) -> Result<()> {
    let total = instances.len();
    let ok = instances
        .iter()
        .filter(|i| i.render_status == RenderStatus::Ok)
        .count();
    if total > 0 && (ok as f64) < min_ok_fraction * total as f64 {
        let histogram = status_histogram(instances)
            .into_iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(", ");
        return Err(Error::RenderBudget {
            ok,
            total,
            required: min_ok_fraction * 100.0,
            histogram,
        });
    }
    Ok(())
}
