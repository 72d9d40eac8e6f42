mod common;

use std::path::Path;
use std::process::{Command, Output};

use compcolor::benchmark::BenchmarkManifest;
use compcolor::benchmark::PairType;
use compcolor::eval::io::{mask_file_name, read_scores_jsonl, read_summary_csv, write_summary_csv};
use compcolor::eval::{GroupKey, SummaryRow};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_compcolor"));
    c.env_remove("COMPCOLOR_SEED");
    c
}

fn ok(out: Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn gen(dir: &Path, name: &str, extra: &[&str], env_seed: Option<&str>) -> Vec<u8> {
    let path = dir.join(name);
    let mut c = bin();
    c.args(["gen-benchmark", "--out"]).arg(&path).args(extra);
    if let Some(s) = env_seed {
        c.env("COMPCOLOR_SEED", s);
    }
    ok(c.output().unwrap());
    std::fs::read(path).unwrap()
}

#[test]
fn gen_benchmark_seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let a = gen(d, "a.json", &["--seed", "25"], None);
    assert_eq!(a, gen(d, "b.json", &["--seed", "25"], None));
    assert_eq!(a, gen(d, "c.json", &[], Some("25")));
    assert_eq!(a, gen(d, "d.json", &["--seed", "25"], Some("3")));
    std::fs::write(
        d.join("cfg.json"),
        r#"{"seed": 25, "gen_benchmark": {"per_pair": 2}}"#,
    )
    .unwrap();
    let cfg = d.join("cfg.json");
    let from_file = gen(d, "e.json", &["--config", cfg.to_str().unwrap()], Some("3"));
    let m = BenchmarkManifest::from_json(std::str::from_utf8(&from_file).unwrap()).unwrap();
    assert_eq!(m.rng_seed, 25);
    assert!(m.entries.iter().all(|e| !e.id.ends_with("_2")));
    let overridden = gen(
        d,
        "f.json",
        &["--config", cfg.to_str().unwrap(), "--per-pair", "5"],
        None,
    );
    assert_eq!(overridden, a);
    let text = String::from_utf8(a).unwrap();
    assert!(text.contains("\"text\": \"a skyblue colored backpack and a hotpink colored chair.\""));
}

#[test]
fn gen_benchmark_from_lists_and_modes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("colors.txt"),
        "# palette\nSkyBlue\nHotPink\nLightCyan\n",
    )
    .unwrap();
    std::fs::write(d.join("objects.json"), r#"["chair", "backpack", "hat"]"#).unwrap();
    let colors = d.join("colors.txt");
    let objects = d.join("objects.json");
    let args = [
        "--colors",
        colors.to_str().unwrap(),
        "--objects",
        objects.to_str().unwrap(),
        "--per-pair",
        "2",
    ];
    let m: BenchmarkManifest = serde_json::from_slice(&gen(d, "m.json", &args, None)).unwrap();
    assert_eq!(m.provenance.objects, ["chair", "backpack", "hat"]);
    assert!(m.entries.iter().all(|e| e.slots.len() == 2));
    let mut single = args.to_vec();
    single.extend(["--mode", "single"]);
    let s: BenchmarkManifest = serde_json::from_slice(&gen(d, "s.json", &single, None)).unwrap();
    assert!(s
        .entries
        .iter()
        .all(|e| e.slots.len() == 1 && e.text.ends_with(&format!("{}.", e.slots[0].object_noun))));

    let bad = bin()
        .args(["gen-benchmark", "--mode", "quad", "--out"])
        .arg(d.join("x.json"))
        .output()
        .unwrap();
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("--mode"));
}

fn fixture(dir: &Path, swap: bool) {
    let m = common::fixture_manifest("SkyBlue", "HotPink");
    common::write_fixture(dir, &m, swap);
}

fn evaluate(dir: &Path, extra: &[&str]) -> Output {
    bin()
        .arg("evaluate")
        .arg("--manifest")
        .arg(dir.join("manifest.json"))
        .arg("--images")
        .arg(dir.join("images"))
        .arg("--masks")
        .arg(dir.join("masks"))
        .arg("--out")
        .arg(dir.join("scores.jsonl"))
        .arg("--summary")
        .arg(dir.join("summary.csv"))
        .args(extra)
        .output()
        .unwrap()
}

#[test]
fn evaluate_valid_fixture() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), false);
    let stdout = ok(evaluate(dir.path(), &["--method", "sd14"]));
    assert!(stdout.contains("0.00\\0.00\\1.00"), "{stdout}");
    let scores = read_scores_jsonl(&dir.path().join("scores.jsonl")).unwrap();
    assert_eq!(scores.len(), 2);
    assert!(scores.iter().all(|s| s.valid && s.method == "sd14"));
    let rows = read_summary_csv(&dir.path().join("summary.csv")).unwrap();
    assert_eq!(rows[0].acc_rate, Some(1.0));
}

#[test]
fn evaluate_leakage_criterion_and_tau() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), true);
    ok(evaluate(dir.path(), &["--criterion", "leakage"]));
    let rows = read_summary_csv(&dir.path().join("summary.csv")).unwrap();
    assert_eq!((rows[0].mean_lab, rows[0].acc_rate), (Some(0.0), Some(1.0)));
    ok(evaluate(dir.path(), &["--tau", "1000"]));
    let rows = read_summary_csv(&dir.path().join("summary.csv")).unwrap();
    assert_eq!(rows[0].acc_rate, Some(1.0));
    assert!(rows[0].mean_lab.unwrap() > 10.0);
}

#[test]
fn evaluate_missing_mask_is_a_rejection() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), false);
    let m = BenchmarkManifest::load(&dir.path().join("manifest.json")).unwrap();
    std::fs::remove_file(
        dir.path()
            .join("masks")
            .join(mask_file_name(&m.entries[0].id, 0)),
    )
    .unwrap();
    let out = evaluate(dir.path(), &[]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing object mask"));
    ok(out);
    let scores = read_scores_jsonl(&dir.path().join("scores.jsonl")).unwrap();
    assert!(scores
        .iter()
        .all(|s| s.rejection_reason.as_deref() == Some("missing object mask")));
}

#[test]
fn evaluate_corrupt_manifest_fails() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), false);
    std::fs::write(
        dir.path().join("manifest.json"),
        r#"{"version": "1", "entries": 3}"#,
    )
    .unwrap();
    let out = evaluate(dir.path(), &[]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("schema error") && err.contains("manifest.json"),
        "{err}"
    );
    assert!(!dir.path().join("scores.jsonl").exists());
}

#[test]
fn evaluate_rejects_unknown_config_keys() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), false);
    std::fs::write(dir.path().join("cfg.json"), r#"{"evaluate": {"tua": 5}}"#).unwrap();
    let out = evaluate(
        dir.path(),
        &["--config", dir.path().join("cfg.json").to_str().unwrap()],
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("tua"));
}

fn summary(dir: &Path, name: &str, method: &str, lab: f64, rgb: f64, acc: f64) -> String {
    let p = dir.join(name);
    write_summary_csv(
        &[SummaryRow::new(
            GroupKey::new(method, PairType::Close),
            lab,
            rgb,
            acc,
        )],
        &p,
    )
    .unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn report_and_improvements() {
    let dir = tempfile::tempdir().unwrap();
    let base = summary(dir.path(), "base.csv", "sd14", 25.38, 100.0, 0.38);
    let edited = summary(dir.path(), "edit.csv", "ours", 12.95, 20.58, 0.59);
    let table = ok(bin()
        .args(["report", "--summaries", &format!("{base},{edited}")])
        .output()
        .unwrap());
    assert!(
        table.contains("25.38\\100.00\\0.38") && table.contains("12.95\\20.58\\0.59"),
        "{table}"
    );
    let imp = ok(bin()
        .args(["improvements", "--base", &base, "--edited", &edited])
        .output()
        .unwrap());
    assert!(imp.contains("59.00 21.00%↑"), "{imp}");
    let json = dir.path().join("imp.json");
    let delta = ok(bin()
        .args([
            "improvements",
            "--style",
            "delta",
            "--base",
            &base,
            "--edited",
            &edited,
            "--json",
        ])
        .arg(&json)
        .output()
        .unwrap());
    assert!(delta.contains("12.43\\79.42\\0.21"), "{delta}");
    assert!(std::fs::read_to_string(json)
        .unwrap()
        .contains("\"delta_lab\""));
    let empty = bin().arg("report").output().unwrap();
    assert!(!empty.status.success());
}

#[test]
fn edit_sim_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("sim");
    let stdout = ok(bin()
        .args([
            "edit-sim",
            "--out-dir",
            out_dir.to_str().unwrap(),
            "--scale",
            "2",
        ])
        .output()
        .unwrap());
    assert!(stdout.contains("L_attention"));
    let trace = std::fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    assert!(trace.starts_with("step,inner_iter,L_attention,L_color,L_total\n"));
    let last_step: usize = trace
        .lines()
        .last()
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(last_step, 50);
    for name in ["before.png", "after.png"] {
        let img = image::open(out_dir.join(name)).unwrap();
        assert_eq!((img.width(), img.height()), (32, 32));
    }
    std::fs::write(dir.path().join("sched.json"), r#"{"blend_step": 99}"#).unwrap();
    let bad = bin()
        .args([
            "edit-sim",
            "--schedule",
            dir.path().join("sched.json").to_str().unwrap(),
            "--out-dir",
        ])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(!bad.status.success());
}
