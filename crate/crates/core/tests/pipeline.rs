mod common;

use std::collections::BTreeMap;
use std::io::Write;

use chartforge::bench::{BenchmarkRecord, EvalReport, ReviewDecision};
use chartforge::dualpath::{read_export, ExportStats, Variant, STATS_FILE};
use chartforge::filter::{filter_corpus, SidecarOcr};
use chartforge::manifest::{read_header, Expect, Stage};
use chartforge::model::{ChartData, ChartInstance, ChartTypeSpec, RenderStatus};
use chartforge::pipeline::{
    Outcome, Pipeline, RunOptions, EVAL_REPORT, EXPORT_DIR, RENDER_PARTIAL, REPORTS_DIR,
};
use chartforge::Error;
use rand::seq::SliceRandom;
use rand::SeedableRng;

const TYPES: [&str; 3] = ["bar", "line", "pie"];

fn desk(dir: &std::path::Path) -> Pipeline {
    common::pipeline(common::desk_config(&TYPES, 4, 6, 3), dir)
}

#[test]
fn desk_run_counts() {
    let dir = tempfile::tempdir().unwrap();
    let p = desk(dir.path());
    common::run_through(&p, Stage::Stats);

    let text = std::fs::read_to_string(p.manifest_path(Stage::Compose)).unwrap();
    assert_eq!(text.lines().count(), 73);
    let (h, filtered) = common::records::<ChartInstance>(&p, Stage::Filter);
    assert_eq!(h.count, 72);
    let accepted = filtered.iter().filter(|i| i.accepted()).count();
    assert_eq!(accepted, 72);
    assert!(filtered
        .iter()
        .all(|i| i.filter.as_ref().unwrap().ocr_score == 1.0));

    let stats: ExportStats = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join(EXPORT_DIR).join(STATS_FILE)).unwrap(),
    )
    .unwrap();
    assert_eq!(stats.available[&Variant::General], accepted * 17);
    assert_eq!(stats.available[&Variant::DataDriven], accepted * 15);
    assert_eq!(stats.available[&Variant::JsonOnly], 18 * 17);
    assert_eq!(
        stats.available[&Variant::PretrainCaption] + stats.available[&Variant::PretrainJson],
        2 * accepted
    );
    let exported = read_export(&dir.path().join(EXPORT_DIR).join("instruct.jsonl")).unwrap();
    assert_eq!(exported.len(), stats.instruct_total);
    for s in &exported {
        s.validate().unwrap();
    }

    let (_, bench) = common::records::<BenchmarkRecord>(&p, Stage::Benchmark);
    let qas: usize = bench.iter().map(|r| r.qas.len()).sum();
    assert_eq!(qas as f64 / bench.len() as f64, 15.0);
    assert_eq!(bench.len(), 3 * 6 * 2);
}

#[test]
fn evaluate_with_gold_and_empty_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let p = desk(dir.path());
    common::run_through(&p, Stage::Benchmark);
    let (_, bench) = common::records::<BenchmarkRecord>(&p, Stage::Benchmark);
    let total: usize = bench.iter().map(|r| r.qas.len()).sum();

    let gold = dir.path().join("gold.jsonl");
    let mut f = std::fs::File::create(&gold).unwrap();
    for r in &bench {
        for q in &r.qas {
            let line = serde_json::json!({"record_id": r.id, "qa_index": q.qa_index, "answer": q.answer_short});
            writeln!(f, "{line}").unwrap();
        }
    }
    drop(f);
    let empty = dir.path().join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();

    let run_eval = |preds: &std::path::Path| -> EvalReport {
        let mut opts = RunOptions::new(dir.path());
        opts.predictions = Some(preds.to_path_buf());
        let p = Pipeline::new(p.config().clone(), opts).unwrap();
        assert!(matches!(
            p.run(Stage::Evaluate).unwrap(),
            Outcome::Ran { .. }
        ));
        let text = std::fs::read_to_string(dir.path().join(REPORTS_DIR).join(EVAL_REPORT)).unwrap();
        serde_json::from_str(&text).unwrap()
    };
    let r = run_eval(&gold);
    assert_eq!(r.overall.accuracy, 1.0);
    assert_eq!(r.overall.total, total);
    assert_eq!(r.missing, 0);

    let r = run_eval(&empty);
    assert_eq!(r.overall.accuracy, 0.0);
    assert_eq!(r.missing, total);
    assert!(r.per_level.values().all(|a| a.accuracy == 0.0));
}

#[test]
fn injected_exec_failures_are_filtered() {
    let dir = tempfile::tempdir().unwrap();
    let p = desk(dir.path());
    common::run_through(&p, Stage::Render);
    let (_, mut rendered) = common::records::<ChartInstance>(&p, Stage::Render);
    let (_, data) = common::records::<ChartData>(&p, Stage::Data);
    let (_, specs) = common::records::<ChartTypeSpec>(&p, Stage::Templates);
    for i in [5, 40] {
        rendered[i].render_status = RenderStatus::ExecError;
        rendered[i].image_ref = None;
        rendered[i].stderr = Some("ZeroDivisionError".into());
    }
    let out = filter_corpus(&rendered, &data, &specs, 0.6, &SidecarOcr, dir.path()).unwrap();
    assert_eq!(out.iter().filter(|i| i.accepted()).count(), 70);

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let verdicts = |v: &[ChartInstance]| -> BTreeMap<String, bool> {
        v.iter().map(|i| (i.id.clone(), i.accepted())).collect()
    };
    let reference = verdicts(&out);
    for _ in 0..3 {
        let mut shuffled = rendered.clone();
        shuffled.shuffle(&mut rng);
        let again = filter_corpus(&shuffled, &data, &specs, 0.6, &SidecarOcr, dir.path()).unwrap();
        assert_eq!(verdicts(&again), reference);
    }
}

#[test]
fn interrupted_render_resumes_to_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let p = desk(dir.path());
    common::run_through(&p, Stage::Render);
    let manifest = p.manifest_path(Stage::Render);
    let full = std::fs::read_to_string(&manifest).unwrap();
    let images = common::tree_digests(&dir.path().join("images"));

    // Rebuild the state a crash after 30 records would leave behind.
    let lines: Vec<&str> = full.lines().collect();
    let mut partial = String::new();
    partial.push_str(lines[0]);
    partial.push('\n');
    for l in &lines[1..31] {
        partial.push_str(l);
        partial.push('\n');
    }
    partial.push_str(&lines[31][..20]);
    std::fs::write(dir.path().join(RENDER_PARTIAL), partial).unwrap();
    std::fs::remove_file(&manifest).unwrap();
    for l in &lines[31..] {
        let inst: ChartInstance = serde_json::from_str(l).unwrap();
        let img = dir.path().join(inst.image_ref.unwrap());
        std::fs::remove_file(&img).unwrap();
    }

    let mut opts = RunOptions::new(dir.path());
    opts.resume = true;
    let resumed = Pipeline::new(p.config().clone(), opts).unwrap();
    match resumed.run(Stage::Render).unwrap() {
        Outcome::Ran { summary } => assert!(summary.contains("(30 resumed)"), "{summary}"),
        other => panic!("{other:?}"),
    }
    let again = std::fs::read_to_string(&manifest).unwrap();
    let strip = |s: &str| s.lines().skip(1).map(str::to_string).collect::<Vec<_>>();
    assert_eq!(strip(&again), strip(&full));
    assert_eq!(common::tree_digests(&dir.path().join("images")), images);
    assert!(!dir.path().join(RENDER_PARTIAL).exists());
}

#[test]
fn completed_stage_is_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let p = desk(dir.path());
    common::run_through(&p, Stage::Render);
    let before = std::fs::read(p.manifest_path(Stage::Render)).unwrap();
    assert_eq!(p.run(Stage::Render).unwrap(), Outcome::Skipped);
    assert_eq!(
        std::fs::read(p.manifest_path(Stage::Render)).unwrap(),
        before
    );
}

#[test]
fn dag_and_hash_rules() {
    let dir = tempfile::tempdir().unwrap();
    let p = desk(dir.path());
    assert!(matches!(
        p.run(Stage::Compose),
        Err(Error::MissingPrerequisite(Stage::Data))
    ));
    p.run(Stage::Templates).unwrap();
    assert!(matches!(
        p.run(Stage::Compose),
        Err(Error::MissingPrerequisite(Stage::Data))
    ));

    let other = common::pipeline(common::desk_config(&TYPES, 4, 6, 99), dir.path());
    assert_ne!(other.config_hash(), p.config_hash());
    match other.run(Stage::Data) {
        Err(e @ Error::HashMismatch { .. }) => assert_eq!(e.exit_code(), 4),
        other => panic!("{other:?}"),
    }
    assert_eq!(Error::MissingPrerequisite(Stage::Data).exit_code(), 3);
}

#[test]
fn rerunning_a_stage_drops_downstream_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let p = desk(dir.path());
    common::run_through(&p, Stage::Stats);
    std::fs::remove_file(p.manifest_path(Stage::Filter)).unwrap();
    p.run(Stage::Filter).unwrap();
    for s in [Stage::Assemble, Stage::Benchmark, Stage::Stats] {
        assert!(!p.manifest_path(s).exists(), "{s}");
    }
    assert!(p.manifest_path(Stage::Render).exists());
}

#[test]
fn failing_renders_exceed_budget() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = common::desk_config(&["bar"], 2, 2, 1);
    cfg.render.shim = vec!["false".into()];
    let p = common::pipeline(cfg, dir.path());
    common::run_through(&p, Stage::Compose);
    match p.run(Stage::Render) {
        Err(Error::RenderBudget {
            ok: 0,
            total: 4,
            histogram,
            ..
        }) => assert_eq!(histogram, "exec_error=4"),
        other => panic!("{other:?}"),
    }
    assert!(!p.manifest_path(Stage::Render).exists());
    assert!(dir.path().join(RENDER_PARTIAL).exists());
}

#[test]
fn missing_shim_is_a_stage_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = common::desk_config(&["bar"], 1, 1, 1);
    cfg.render.shim = vec!["/nonexistent/chartforge-shim".into()];
    let p = common::pipeline(cfg, dir.path());
    common::run_through(&p, Stage::Compose);
    assert!(matches!(
        p.run(Stage::Render),
        Err(Error::SandboxUnavailable(_))
    ));
}

fn decision(record: &str, qa: usize, ok: bool, reviewer: &str) -> ReviewDecision {
    ReviewDecision {
        record_id: record.into(),
        qa_index: qa,
        answerable: ok,
        correct: true,
        reviewer: reviewer.into(),
        timestamp: "2026-01-01T00:00:00Z".into(),
    }
}

#[test]
fn review_decisions_gate_benchmark_qas() {
    let dir = tempfile::tempdir().unwrap();
    let p = desk(dir.path());
    common::run_through(&p, Stage::Benchmark);
    let (_, unreviewed) = common::records::<BenchmarkRecord>(&p, Stage::Benchmark);

    let mut all_yes = Vec::new();
    for r in &unreviewed {
        for q in &r.qas {
            all_yes.push(decision(&r.id, q.qa_index, true, "a"));
        }
    }
    let write = |name: &str, ds: &[ReviewDecision]| {
        let path = dir.path().join(name);
        let text: String = ds
            .iter()
            .map(|d| serde_json::to_string(d).unwrap() + "\n")
            .collect();
        std::fs::write(&path, text).unwrap();
        path
    };
    let rerun = |path: std::path::PathBuf| -> Vec<BenchmarkRecord> {
        let mut opts = RunOptions::new(dir.path());
        opts.decisions = Some(path);
        let p = Pipeline::new(p.config().clone(), opts).unwrap();
        assert!(matches!(
            p.run(Stage::Benchmark).unwrap(),
            Outcome::Ran { .. }
        ));
        let h = read_header(
            &p.manifest_path(Stage::Benchmark),
            Expect::stage(Stage::Benchmark),
        )
        .unwrap();
        assert_eq!(h.extra["reviewed"], true);
        common::records::<BenchmarkRecord>(&p, Stage::Benchmark).1
    };
    assert_eq!(rerun(write("yes.jsonl", &all_yes)), unreviewed);

    let target = &unreviewed[0];
    let dropped = target.qas[2].qa_index;
    let mut majority_no = all_yes.clone();
    majority_no.push(decision(&target.id, dropped, false, "b"));
    majority_no.push(decision(&target.id, dropped, false, "c"));
    // Reviewer "a" changes their mind on another QA; the last entry wins.
    let flip = target.qas[3].qa_index;
    majority_no.push(decision(&target.id, flip, false, "a"));
    majority_no.push(decision(&target.id, flip, true, "a"));
    let reviewed = rerun(write("no.jsonl", &majority_no));
    let got = reviewed.iter().find(|r| r.id == target.id).unwrap();
    let idx: Vec<usize> = got.qas.iter().map(|q| q.qa_index).collect();
    assert!(!idx.contains(&dropped));
    assert!(idx.contains(&flip));
    assert_eq!(got.qas.len(), target.qas.len() - 1);

    let unknown = write("unknown.jsonl", &[decision("nope", 2, true, "a")]);
    let mut opts = RunOptions::new(dir.path());
    opts.decisions = Some(unknown);
    let p = Pipeline::new(p.config().clone(), opts).unwrap();
    assert!(matches!(
        p.run(Stage::Benchmark),
        Err(Error::UnknownReviewRecord(_))
    ));
}
