//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::time::{Duration, Instant};

use chartforge::bench::{
    evaluate, score_chart_to_table, BenchQa, BenchmarkRecord, EvalOptions, Prediction,
    TablePrediction,
};
use chartforge::canonical::to_canonical_string;
use chartforge::dualpath::{read_export, Variant, INSTRUCT_FILE, PRETRAIN_FILE};
use chartforge::filter::{filter_corpus, rethreshold, sidecar_path, SidecarOcr};
use chartforge::manifest::Stage;
use chartforge::model::{
    ChartData, ChartInstance, ChartTypeSpec, KeyPath, QaLevel, ReasonCode, RenderScript, QA_PLAN,
};
use chartforge::pipeline::{Pipeline, EXPORT_DIR};
use chartforge::render::render_all;
use chartforge::sandbox::SandboxConfig;
use chartforge::table::flatten_cells;
use common::oracle;

type Outcome = Result<String, String>;

const SEED: u64 = 2024;
const QUADRATIC_BUDGET: Duration = Duration::from_secs(120);
const STYLE_GROUP_MIN: f64 = 0.90;
const EXACT: f64 = 1e-12;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn quadratic_composition() -> Outcome {
    let started = Instant::now();
    let a_dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = common::pipeline(
        common::desk_config(&["bar", "line", "pie"], 4, 6, SEED),
        a_dir.path(),
    );
    common::run_through(&a, Stage::Stats);
    let (h, inst) = common::records::<ChartInstance>(&a, Stage::Compose);
    let calls = h.extra_u64("expert_calls").unwrap_or(0);
    ensure!(
        inst.len() == 72 && h.count == 72,
        "expected 72 instances, got {}",
        inst.len()
    );
    // 3 types x (1 template + 6 data + 4 code)
    let oracle_calls = 3 * (1 + 6 + 4);
    ensure!(
        calls == oracle_calls,
        "expected {oracle_calls} expert calls, got {calls}"
    );

    let b_dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = common::pipeline(
        common::desk_config(&["bar", "line", "pie"], 4, 12, SEED),
        b_dir.path(),
    );
    common::run_through(&b, Stage::Compose);
    let (_, inst_b) = common::records::<ChartInstance>(&b, Stage::Compose);
    ensure!(
        inst_b.len() == 2 * inst.len(),
        "doubling M gave {} instances",
        inst_b.len()
    );
    let (code_a_h, code_a) = common::records::<RenderScript>(&a, Stage::Code);
    let (code_b_h, code_b) = common::records::<RenderScript>(&b, Stage::Code);
    ensure!(code_a == code_b, "code manifests differ after doubling M");
    let (ca, cb) = (
        code_a_h.extra_u64("expert_calls"),
        code_b_h.extra_u64("expert_calls"),
    );
    ensure!(
        ca == Some(12) && cb == Some(12),
        "code-expert calls {ca:?} vs {cb:?}"
    );
    let elapsed = started.elapsed();
    ensure!(elapsed < QUADRATIC_BUDGET, "took {elapsed:?}");
    Ok(format!(
        "72 instances / {calls} calls; M=12 -> {} instances, code calls 12 -> 12; {:.1}s (< {}s)",
        inst_b.len(),
        elapsed.as_secs_f64(),
        QUADRATIC_BUDGET.as_secs()
    ))
}

fn qa_plan(desk: &Pipeline) -> Outcome {
    let (_, data) = common::records::<ChartData>(desk, Stage::Data);
    let expected: BTreeMap<QaLevel, usize> = QA_PLAN.iter().copied().collect();
    let mut violations = Vec::new();
    for d in &data {
        let mut got: BTreeMap<QaLevel, usize> = BTreeMap::new();
        for q in &d.qas {
            *got.entry(q.level).or_default() += 1;
        }
        if d.qas.len() != 17 || got != expected {
            violations.push(d.id.clone());
        }
    }
    ensure!(!data.is_empty(), "no data generated");
    ensure!(
        violations.is_empty(),
        "{} violations: {:?}",
        violations.len(),
        violations
    );
    Ok(format!(
        "{} data files, 17 QAs each split 1/1/5/5/5, 0 violations",
        data.len()
    ))
}

fn filter_correctness() -> Outcome {
    const INJECTION_THRESHOLD: f64 = 1.0;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path();
    let p = common::pipeline(
        common::desk_config(&["bar", "line", "pie"], 4, 6, SEED),
        root,
    );
    common::run_through(&p, Stage::Code);
    let (_, specs) = common::records::<ChartTypeSpec>(&p, Stage::Templates);
    let (_, mut data) = common::records::<ChartData>(&p, Stage::Data);
    let (_, mut scripts) = common::records::<RenderScript>(&p, Stage::Code);

    // Malformed payload: a bar file without its y-axis block.
    let bad_data = data.iter().position(|d| d.chart_type == "bar").unwrap();
    let mut broken = data[bad_data].clone();
    broken.payload.as_object_mut().unwrap().remove("y_axis");
    broken.id = ChartData::content_id("bar", &broken.payload);
    data[bad_data] = broken.clone();
    // Crashing script: a line program that divides by zero.
    let bad_script = scripts.iter().position(|s| s.chart_type == "line").unwrap();
    let mut crash = scripts[bad_script].clone();
    crash.source =
        "import sys\ndata_path, out_path = sys.argv[1], sys.argv[2]\nprint(1 / 0)\n".into();
    crash.id = RenderScript::content_id("line", &crash.source);
    scripts[bad_script] = crash.clone();

    let mut instances = Vec::new();
    for t in ["bar", "line", "pie"] {
        let d: Vec<_> = data.iter().filter(|x| x.chart_type == t).cloned().collect();
        let s: Vec<_> = scripts
            .iter()
            .filter(|x| x.chart_type == t)
            .cloned()
            .collect();
        instances.extend(chartforge::compose::compose(&d, &s).map_err(|e| e.to_string())?);
    }
    let sandbox = SandboxConfig::from_config(&p.config().render).map_err(|e| e.to_string())?;
    let rendered = render_all(&instances, &data, &scripts, &sandbox, root, 2, &|_| Ok(()))
        .map_err(|e| e.to_string())?;

    // Dropped title: remove the title line from one pie sidecar.
    let victim = rendered
        .iter()
        .find(|i| i.chart_type == "pie" && i.image_ref.is_some())
        .ok_or("no rendered pie")?
        .clone();
    let side = sidecar_path(&root.join(victim.image_ref.as_ref().unwrap()));
    let title = data
        .iter()
        .find(|d| d.id == victim.data_id)
        .unwrap()
        .payload["title"]
        .as_str()
        .unwrap()
        .to_string();
    let text = std::fs::read_to_string(&side).map_err(|e| e.to_string())?;
    let kept: Vec<&str> = text
        .lines()
        .filter(|l| !l.to_lowercase().contains(&title.to_lowercase()))
        .collect();
    ensure!(
        kept.len() < text.lines().count(),
        "title not found in sidecar"
    );
    std::fs::write(&side, kept.join("\n") + "\n").map_err(|e| e.to_string())?;

    let filtered = filter_corpus(
        &rendered,
        &data,
        &specs,
        INJECTION_THRESHOLD,
        &SidecarOcr,
        root,
    )
    .map_err(|e| e.to_string())?;

    let mut expected: HashMap<String, Vec<ReasonCode>> = HashMap::new();
    for i in &filtered {
        if i.data_id == broken.id {
            expected.insert(i.id.clone(), vec![ReasonCode::Structure]);
        }
        if i.script_id == crash.id {
            expected.insert(i.id.clone(), vec![ReasonCode::Exec]);
        }
    }
    expected.insert(victim.id.clone(), vec![ReasonCode::Ocr]);
    let mut got: HashMap<String, Vec<ReasonCode>> = HashMap::new();
    for i in &filtered {
        let r = i.filter.as_ref().ok_or("missing filter report")?;
        if !r.accepted() {
            got.insert(i.id.clone(), r.reasons.clone());
        }
    }
    ensure!(
        got == expected,
        "rejections differ: expected {expected:?}, got {got:?}"
    );
    let counts = (
        expected
            .values()
            .filter(|r| r[0] == ReasonCode::Structure)
            .count(),
        expected
            .values()
            .filter(|r| r[0] == ReasonCode::Exec)
            .count(),
    );
    ensure!(
        counts == (4, 6),
        "expected 4 structure and 6 exec rejections, got {counts:?}"
    );

    let accepted_at = |t: f64| -> BTreeSet<String> {
        filtered
            .iter()
            .filter(|i| rethreshold(i.filter.as_ref().unwrap(), t).accepted())
            .map(|i| i.id.clone())
            .collect()
    };
    let (a0, a06, a101) = (accepted_at(0.0), accepted_at(0.6), accepted_at(1.01));
    ensure!(
        a06.is_subset(&a0) && a101.is_subset(&a06),
        "monotonicity violated"
    );
    ensure!(a101.is_empty(), "threshold 1.01 accepted {}", a101.len());
    let structurally_sound = filtered
        .iter()
        .filter(|i| {
            let r = i.filter.as_ref().unwrap();
            r.structure_ok && r.exec_ok
        })
        .count();
    ensure!(
        a0.len() == structurally_sound,
        "threshold 0 accepted {} of {structurally_sound}",
        a0.len()
    );
    Ok(format!(
        "rejected exactly {} (structure 4, exec 6, ocr 1) at threshold {INJECTION_THRESHOLD}; accepted at 0/0.6/1.01 = {}/{}/{}",
        expected.len(),
        a0.len(),
        a06.len(),
        a101.len()
    ))
}

fn dual_path(desk: &Pipeline) -> Outcome {
    let (_, data) = common::records::<ChartData>(desk, Stage::Data);
    let payloads: HashMap<&str, String> = data
        .iter()
        .map(|d| (d.id.as_str(), to_canonical_string(&d.payload)))
        .collect();
    let export = desk.out_dir().join(EXPORT_DIR);
    let mut samples = read_export(&export.join(INSTRUCT_FILE)).map_err(|e| e.to_string())?;
    samples.extend(read_export(&export.join(PRETRAIN_FILE)).map_err(|e| e.to_string())?);
    let (mut json_only, mut json_with_image, mut dd, mut dd_ok) = (0, 0, 0, 0);
    for s in &samples {
        match s.variant {
            Variant::JsonOnly => {
                json_only += 1;
                if s.turns.iter().any(|t| t.image_ref.is_some()) {
                    json_with_image += 1;
                }
            }
            Variant::DataDriven => {
                dd += 1;
                let source = s.source_ids.get(1).and_then(|id| payloads.get(id.as_str()));
                let ok = s.turns.len() == 4
                    && source.is_some_and(|src| {
                        let reparsed: Option<serde_json::Value> =
                            serde_json::from_str(&s.turns[1].content).ok();
                        s.turns[1].content == *src
                            && reparsed.is_some_and(|v| to_canonical_string(&v) == *src)
                    });
                if ok {
                    dd_ok += 1;
                }
            }
            _ => {}
        }
    }
    ensure!(
        json_only > 0 && dd > 0,
        "export lacks json_only ({json_only}) or data_driven ({dd}) samples"
    );
    ensure!(
        json_with_image == 0,
        "{json_with_image} json_only samples reference an image"
    );
    ensure!(
        dd_ok == dd,
        "{} of {dd} data_driven samples fail the round trip",
        dd - dd_ok
    );
    Ok(format!(
        "{} exported samples; json_only {json_only} with 0 images; data_driven {dd_ok}/{dd} 4-turn byte-exact",
        samples.len()
    ))
}

fn style_groups(desk: &Pipeline) -> Outcome {
    let (_, records) = common::records::<BenchmarkRecord>(desk, Stage::Benchmark);
    ensure!(!records.is_empty(), "empty benchmark");
    let mut groups: BTreeMap<&str, Vec<&BenchmarkRecord>> = BTreeMap::new();
    for r in &records {
        groups.entry(r.style_group.as_str()).or_default().push(r);
    }
    for (g, members) in &groups {
        if members.len() < 2 {
            continue;
        }
        let hashes: BTreeSet<String> = members
            .iter()
            .map(|r| common::sha256_hex(to_canonical_string(&r.payload).as_bytes()))
            .collect();
        let scripts: BTreeSet<&str> = members.iter().map(|r| r.script_id.as_str()).collect();
        ensure!(
            hashes.len() == 1,
            "group {g} mixes {} payloads",
            hashes.len()
        );
        ensure!(scripts.len() >= 2, "group {g} uses one script");
    }
    let mut styles_per_payload: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for r in &records {
        styles_per_payload
            .entry(r.data_id.as_str())
            .or_default()
            .insert(r.script_id.as_str());
    }
    let multi = styles_per_payload.values().filter(|s| s.len() >= 2).count();
    let frac = multi as f64 / styles_per_payload.len() as f64;
    ensure!(
        frac >= STYLE_GROUP_MIN,
        "only {frac:.3} of payloads under >= 2 styles"
    );
    Ok(format!(
        "{} groups consistent; {multi}/{} payloads under >= 2 styles ({frac:.3} >= {STYLE_GROUP_MIN})",
        groups.len(),
        styles_per_payload.len()
    ))
}

fn metric_oracles() -> Outcome {
    // Oracle against the hand labels first.
    for (p, g, want) in oracle::SHORT_FIXTURE {
        ensure!(
            oracle::answer_correct(p, g, oracle::TOL) == want,
            "oracle disagrees with hand label on {p:?}/{g:?}"
        );
    }
    let oracle_acc = oracle::SHORT_FIXTURE
        .iter()
        .filter(|(p, g, _)| oracle::answer_correct(p, g, oracle::TOL))
        .count() as f64
        / 10.0;
    ensure!(
        (oracle_acc - 0.7).abs() < EXACT,
        "oracle accuracy {oracle_acc}"
    );

    let record = BenchmarkRecord {
        id: "fixture".into(),
        image_ref: "images/fixture.png".into(),
        chart_type: "bar".into(),
        annotated: true,
        style_group: "d".into(),
        data_id: "d".into(),
        script_id: "s".into(),
        payload: serde_json::json!({}),
        data_section: KeyPath::new("data"),
        qas: oracle::SHORT_FIXTURE
            .iter()
            .enumerate()
            .map(|(i, (_, g, _))| BenchQa {
                qa_index: i,
                level: QaLevel::Literal,
                question: format!("q{i}"),
                answer_long: g.to_string(),
                answer_short: g.to_string(),
            })
            .collect(),
        long_form: Vec::new(),
    };
    let preds: Vec<Prediction> = oracle::SHORT_FIXTURE
        .iter()
        .enumerate()
        .map(|(i, (p, _, _))| Prediction {
            record_id: "fixture".into(),
            qa_index: i,
            answer: p.to_string(),
        })
        .collect();

    let (payload, gold, table) = oracle::table_fixture();
    let (op, or, of) = oracle::table_prf(&gold, table, oracle::TOL);
    ensure!(
        (op - 0.75).abs() < EXACT && (or - 0.75).abs() < EXACT && (of - 0.75).abs() < EXACT,
        "oracle table score {op}/{or}/{of}"
    );
    let flat = flatten_cells(&payload, &KeyPath::new("data")).map_err(|e| e.to_string())?;
    ensure!(
        flat.len() == gold.len(),
        "fixture flattens to {} cells",
        flat.len()
    );

    let opts = EvalOptions {
        tolerance: oracle::TOL,
        basic_types: &[],
        config_hash: "fixture",
        judge: None,
    };
    let short = evaluate(std::slice::from_ref(&record), &preds, None, &opts).map_err(|e| e.to_string())?;
    ensure!(
        (short.overall.accuracy - oracle_acc).abs() < EXACT,
        "scorer accuracy {} vs oracle {oracle_acc}",
        short.overall.accuracy
    );

    let mut table_record = record;
    table_record.id = "table".into();
    table_record.payload = payload.clone();
    let tables = [TablePrediction {
        record_id: "table".into(),
        table: table.into(),
    }];
    let report = evaluate(&[table_record], &[], Some(&tables), &opts).map_err(|e| e.to_string())?;
    let t = report.chart_to_table.ok_or("no table report")?;
    ensure!(
        (t.precision - op).abs() < EXACT
            && (t.recall - or).abs() < EXACT
            && (t.f1 - of).abs() < EXACT,
        "scorer table {}/{}/{} vs oracle {op}/{or}/{of}",
        t.precision,
        t.recall,
        t.f1
    );
    let direct = score_chart_to_table(table, &payload, &KeyPath::new("data"), oracle::TOL);
    ensure!(
        (direct.f1 - of).abs() < EXACT,
        "direct table f1 {}",
        direct.f1
    );
    Ok(format!(
        "short answers {:.2} (oracle {oracle_acc:.2}, tol {}); table P/R/F1 {:.2}/{:.2}/{:.2} (oracle {op:.2}/{or:.2}/{of:.2})",
        short.overall.accuracy,
        oracle::TOL,
        t.precision,
        t.recall,
        t.f1
    ))
}

fn determinism(desk: &Pipeline) -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let again = common::pipeline(desk.config().clone(), dir.path());
    common::run_through(&again, Stage::Stats);
    let a = common::tree_digests(desk.out_dir());
    let b = common::tree_digests(again.out_dir());
    ensure!(a == b, "output trees differ: {:?}", diff(&a, &b));
    let manifests = a.keys().filter(|k| k.starts_with("manifests/")).count();
    let images: Vec<&String> = a.keys().filter(|k| k.ends_with(".png")).collect();
    ensure!(
        manifests == 9 && !images.is_empty(),
        "{manifests} manifests, {} images",
        images.len()
    );
    for rel in images.iter().take(25) {
        let pa = image::open(desk.out_dir().join(rel))
            .map_err(|e| e.to_string())?
            .to_rgb8();
        let pb = image::open(again.out_dir().join(rel))
            .map_err(|e| e.to_string())?
            .to_rgb8();
        ensure!(pa == pb, "pixels differ in {rel}");
    }
    Ok(format!(
        "{} files identical by sha256 ({manifests} manifests, {} images)",
        a.len(),
        images.len()
    ))
}

fn diff<'a>(a: &'a BTreeMap<String, String>, b: &'a BTreeMap<String, String>) -> Vec<&'a str> {
    a.keys()
        .chain(b.keys())
        .filter(|k| a.get(*k) != b.get(*k))
        .map(String::as_str)
        .take(10)
        .collect()
}

fn desk_run(root: &Path) -> Pipeline {
    let p = common::pipeline(common::desk_config(&[], 4, 6, SEED), root);
    common::run_through(&p, Stage::Stats);
    p
}

fn main() {
    let desk_dir = tempfile::tempdir().expect("tempdir");
    let desk = std::panic::catch_unwind(|| desk_run(desk_dir.path()));
    let desk = desk.as_ref().ok();
    let needs_desk = |f: fn(&Pipeline) -> Outcome| -> Box<dyn Fn() -> Outcome + '_> {
        Box::new(move || match desk {
            Some(p) => f(p),
            None => Err("desk run failed".into()),
        })
    };
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("quadratic-composition", Box::new(quadratic_composition)),
        ("qa-plan", needs_desk(qa_plan)),
        ("filter-correctness", Box::new(filter_correctness)),
        ("dual-path-invariants", needs_desk(dual_path)),
        ("style-variation-groups", needs_desk(style_groups)),
        ("metric-oracles", Box::new(metric_oracles)),
        ("determinism", needs_desk(determinism)),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|p| {
                Err(format!(
                    "panicked: {:?}",
                    p.downcast_ref::<String>()
                        .map(String::as_str)
                        .or(p.downcast_ref::<&str>().copied())
                ))
            });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 7 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
