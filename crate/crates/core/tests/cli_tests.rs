use aligned_einstein::cli::{run, Report, EXIT_EXISTS, EXIT_MISMATCH, EXIT_NOT_EXISTS, EXIT_USAGE};
use aligned_einstein::spaces::Catalog;
use serde_json::Value;
use std::process::Command;

fn bin(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_aligned-einstein")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn in_process(args: &[&str]) -> (i32, Vec<u8>) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["aligned-einstein"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (code, out)
}

fn json(args: &[&str]) -> (i32, Value) {
    let (code, out) = in_process(args);
    (code, serde_json::from_slice(&out).unwrap())
}

const EX29: [&str; 10] = ["--n1", "14", "--n2", "5", "--d", "10", "--a1", "3/10", "--a2", "3/4"];

#[test]
fn exit_codes() {
    assert_eq!(bin(&["classify", "--space", "G2xSp2_SU2"]).0, EXIT_EXISTS);
    let mut ex29 = vec!["classify"];
    ex29.extend_from_slice(&EX29);
    assert_eq!(bin(&ex29).0, EXIT_NOT_EXISTS);
    let (code, _, err) = bin(&["classify", "--n1", "0", "--n2", "5", "--d", "10", "--a1", "3/10", "--a2", "3/4"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.starts_with("error:"));
    assert_eq!(bin(&["classify", "--space", "NoSuchSpace"]).0, EXIT_USAGE);
    assert_eq!(bin(&["classify", "--space", "G2xSp2_SU2", "--n1", "3"]).0, EXIT_USAGE);
    assert_eq!(bin(&["classify", "--n1", "3"]).0, EXIT_USAGE);
    assert_eq!(bin(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(bin(&["family", "--name", "bogus"]).0, EXIT_USAGE);
    assert_eq!(bin(&["classify", "--space", "G2xSp2_SU2", "--eps", "-1"]).0, EXIT_USAGE);
    assert_eq!(bin(&["--help"]).0, 0);
    assert_eq!(bin(&["family", "--name", "SUm_SOm1_SOm"]).0, EXIT_NOT_EXISTS);
}

#[test]
fn json_reports_round_trip() {
    let cat = Catalog::bundled();
    let mut cases: Vec<Vec<String>> = ["G2xSp2_SU2", "SU5xSO8_T4", "SOsym_SOm1_SOm@7", "SO42xSO27_Sp4"]
        .iter()
        .map(|id| vec!["solve".into(), "--space".into(), id.to_string()])
        .collect();
    let mut explicit = vec!["classify".to_string()];
    explicit.extend(EX29.iter().map(|s| s.to_string()));
    cases.push(explicit);
    for args in cases {
        let mut full: Vec<&str> = vec!["--json"];
        full.extend(args.iter().map(String::as_str));
        let (code, out) = in_process(&full);
        let report: Report = serde_json::from_slice(&out).unwrap();
        assert_eq!(report.schema_version, "1");
        assert_eq!(code == EXIT_EXISTS, report.verdict.exists);
        let rebuilt = report.rebuild_space().unwrap();
        if args[1] == "--space" {
            let original = cat.space(&args[2]).unwrap().space;
            assert_eq!(rebuilt.name, report.space.id);
            assert_eq!((rebuilt.n1, rebuilt.n2, rebuilt.d, &rebuilt.kind), (original.n1, original.n2, original.d, &original.kind));
        } else {
            assert_eq!((rebuilt.n1, rebuilt.n2, rebuilt.d), (14, 5, 10));
        }
        let again = serde_json::to_vec_pretty(&report).unwrap();
        let a: Value = serde_json::from_slice(&out).unwrap();
        let b: Value = serde_json::from_slice(&again).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn torus_report_carries_the_cubic_check() {
    let (code, v) = json(&["--json", "solve", "--space", "SU5xSO8_T4"]);
    assert_eq!(code, EXIT_EXISTS);
    assert_eq!(v["cubic"]["discriminant"], "-2323/588");
    assert_eq!(v["metrics"].as_array().unwrap().len(), 1);
    assert_eq!(v["metrics"][0]["stability"]["verdict"], "saddle");
}

#[test]
fn output_is_byte_identical_across_thread_counts() {
    let args = ["--json", "table", "--table", "spo2", "--verify"];
    let grid = ["landscape", "--space", "G2xSp2_SU2", "--xmin", "0.5", "--xmax", "1.5", "--ymin", "0.5", "--ymax", "1.5", "--steps", "30"];
    let mut outputs = Vec::new();
    for threads in [1, 3, 8] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        outputs.push(pool.install(|| (in_process(&args), in_process(&grid))));
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
    assert_eq!(outputs[0], (in_process(&args), in_process(&grid)));
    let (a, _, _) = bin(&["--json", "classify", "--space", "G2xSp2_SU2"]);
    assert_eq!(a, EXIT_EXISTS);
    let first = bin(&["--json", "solve", "--space", "G2xSp2_SU2"]).1;
    assert_eq!(first, bin(&["--json", "solve", "--space", "G2xSp2_SU2"]).1);
}

#[test]
fn table_counts() {
    let (code, v) = json(&["--json", "table", "--table", "spo", "--verify"]);
    assert_eq!(code, EXIT_EXISTS);
    let t = &v["tables"][0];
    assert_eq!((t["exists"].as_u64(), t["total"].as_u64()), (Some(16), Some(24)));
    let (code, v) = json(&["--json", "table", "--table", "spo2", "--verify"]);
    assert_eq!(code, EXIT_EXISTS);
    assert_eq!((v["tables"][0]["exists"].as_u64(), v["tables"][0]["total"].as_u64()), (Some(35), Some(41)));
    assert!(v["summary"]["mismatches"].as_array().unwrap().is_empty());
}

#[test]
fn verify_reports_a_planted_mismatch() {
    let text = Catalog::bundled_text().replace(
        "expect id=G2xSp2_SU2 table=spo verdict=exists",
        "expect id=G2xSp2_SU2 table=spo verdict=not_exists",
    );
    assert_ne!(text, Catalog::bundled_text());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("catalog.txt");
    std::fs::write(&path, text).unwrap();
    let p = path.to_str().unwrap();
    let (code, v) = json(&["--json", "--catalog", p, "table", "--table", "spo", "--verify"]);
    assert_eq!(code, EXIT_MISMATCH);
    assert_eq!(v["summary"]["mismatches"], serde_json::json!(["spo:G2xSp2_SU2"]));
    let (code, _) = in_process(&["--catalog", p, "table", "--table", "spo"]);
    assert_eq!(code, EXIT_EXISTS);
}

#[test]
fn family_verify() {
    let (code, v) = json(&["--json", "family", "--name", "SOsym_SOm1_SOm", "--verify"]);
    assert_eq!(code, EXIT_EXISTS);
    assert_eq!(v["existence"], "m <= 8");
    assert_eq!(v["matches_expected"], true);
    let (code, v) = json(&["--json", "family", "--name", "SU2m_SOalt_Spm", "--verify"]);
    assert_eq!(code, EXIT_EXISTS);
    assert_eq!(v["existence"], "m >= 10");
}

#[test]
fn landscape_grid_and_markers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.csv");
    let p = path.to_str().unwrap();
    let args = ["landscape", "--space", "SU5xSO8_T4", "--xmin", "0.5", "--xmax", "1.5", "--ymin", "0.5", "--ymax", "1.5", "--steps", "100", "--out", p];
    let (code, out) = in_process(&args);
    assert_eq!(code, EXIT_EXISTS);
    assert!(String::from_utf8(out).unwrap().starts_with("wrote 10000 rows and 1 Einstein points"));
    let text = std::fs::read_to_string(&path).unwrap();
    let comments: Vec<&str> = text.lines().filter(|l| l.starts_with('#')).collect();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 1 + 100 * 100);
    assert_eq!(comments.iter().filter(|l| l.contains("einstein")).count(), 1);
    let cols = rows[0].split(',').count();
    assert!(rows[1..].iter().all(|r| r.split(',').count() == cols));
    let mut ex29 = vec!["landscape", "--xmin", "0.5", "--xmax", "1.5", "--ymin", "0.5", "--ymax", "1.5", "--steps", "10"];
    ex29.extend_from_slice(&EX29);
    let (code, out) = in_process(&ex29);
    assert_eq!(code, EXIT_EXISTS);
    let text = String::from_utf8(out).unwrap();
    assert!(!text.lines().any(|l| l.contains("einstein")));
    let mut bad = ex29.clone();
    bad[9] = "1";
    assert_eq!(in_process(&bad).0, EXIT_USAGE);
}

#[test]
fn catalog_validation_summary() {
    let (code, v) = json(&["--json", "catalog-validate"]);
    assert_eq!(code, EXIT_EXISTS);
    assert_eq!((v["sporadic"].as_u64(), v["families"].as_u64()), (Some(70), Some(12)));
    assert_eq!(v["torus_templates"].as_u64(), Some(8));
    let viol: Vec<&str> = v["admissibility_violations"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect();
    assert!(viol.contains(&"SO42xSO27_Sp4"));
}
