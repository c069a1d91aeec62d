use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pairrank"));
    cmd.env_remove("PAIRRANK_THREADS").env("RUST_LOG", "warn");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// `n` numeric attributes `g0..`, the first `informative` tracking a binary class.
fn write_dataset(dir: &Path, n: usize, informative: usize, w: usize, seed: u64) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text = String::new();
    let names: Vec<String> = (0..n).map(|a| format!("g{a}")).collect();
    text.push_str(&names.join(","));
    text.push_str(",class\n");
    for r in 0..w {
        let c = r % 2;
        let row: Vec<String> = (0..n)
            .map(|a| {
                let v = if a < informative {
                    c as f64 * 2.0 + rng.gen_range(0.0..1.0)
                } else {
                    rng.gen_range(0.0..3.0)
                };
                format!("{v:.4}")
            })
            .collect();
        text.push_str(&row.join(","));
        text.push_str(if c == 0 { ",neg\n" } else { ",pos\n" });
    }
    let path = dir.join("d.csv");
    fs::write(&path, text).unwrap();
    path
}

fn ranking_file(dir: &Path, name: &str, order: &[usize]) -> PathBuf {
    let mut text = String::from("rank\tattribute\tscore\n");
    for (r, a) in order.iter().enumerate() {
        text.push_str(&format!("{}\tg{a}\t{:.6}\n", r + 1, 1.0 - r as f64 / 100.0));
    }
    let path = dir.join(format!("{name}.tsv"));
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn rank_writes_one_row_per_attribute() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path(), 8, 2, 60, 1);
    for method in pairrank::cli::METHODS {
        let o = run(&["rank", "--method", method, "--input", data.to_str().unwrap(), "--class", "class"]);
        assert!(o.status.success(), "{method}: {}", String::from_utf8_lossy(&o.stderr));
        let out = stdout(&o);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "rank\tattribute\tscore");
        assert_eq!(lines.len(), 9, "{method}");
        let fields: Vec<&str> = lines[1].split('\t').collect();
        assert_eq!(fields[0], "1");
        assert_eq!(fields[2].split('.').nth(1).map(str::len), Some(6));
        if method.starts_with("pairwise") {
            assert!(fields[1] == "g0" || fields[1] == "g1", "{method}: {out}");
        }
    }
}

#[test]
fn rank_output_does_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path(), 120, 10, 80, 2);
    for method in ["pairwise-correlation", "pairwise-consistency", "relieff"] {
        let args = ["rank", "--method", method, "--input", data.to_str().unwrap()];
        let one = run(&[&args[..], &["--threads", "1"]].concat());
        let eight = run(&[&args[..], &["--threads", "8"]].concat());
        let env = bin().args(args).env("PAIRRANK_THREADS", "3").output().unwrap();
        assert!(one.status.success());
        assert_eq!(one.stdout, eight.stdout, "{method}");
        assert_eq!(one.stdout, env.stdout, "{method}");
    }
}

#[test]
fn configuration_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path(), 4, 1, 20, 3);
    let d = data.to_str().unwrap();
    let o = run(&["rank", "--method", "magic", "--input", d]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("pairwise-correlation"));
    assert_eq!(run(&["rank", "--input", d]).status.code(), Some(3));
    assert_eq!(run(&["rank", "--method", "info-gain", "--input", d, "--threads", "0"]).status.code(), Some(3));
    let env = bin()
        .args(["rank", "--method", "info-gain", "--input", d])
        .env("PAIRRANK_THREADS", "lots")
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(3));
    assert_eq!(run(&["eval", "--method", "info-gain", "--input", d, "--q", "9"]).status.code(), Some(3));
    assert_eq!(
        run(&["eval", "--method", "info-gain", "--input", d, "--q", "2", "--classifiers", "svm"]).status.code(),
        Some(3)
    );
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    assert_eq!(
        run(&["rank", "--method", "info-gain", "--input", missing.to_str().unwrap()]).status.code(),
        Some(2)
    );
    let ragged = dir.path().join("ragged.csv");
    fs::write(&ragged, "a,b,class\n1,2,x\n3,y\n").unwrap();
    let o = run(&["rank", "--method", "info-gain", "--input", ragged.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":3"));
    let bad_arff = dir.path().join("bad.arff");
    fs::write(&bad_arff, "@relation r\n@attribute a string\n@attribute c {x,y}\n@data\nq,x\n").unwrap();
    assert_eq!(
        run(&["rank", "--method", "info-gain", "--input", bad_arff.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn reduce_keeps_top_attributes_in_rank_order() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path(), 6, 2, 30, 4);
    let ranking = ranking_file(dir.path(), "r", &[4, 0, 5, 1, 2, 3]);
    let args = ["reduce", "--input", data.to_str().unwrap(), "--ranking", ranking.to_str().unwrap()];
    let o = run(&[&args[..], &["--q", "3"]].concat());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert_eq!(out.lines().next().unwrap(), "g4,g0,g5,class");
    assert_eq!(out.lines().count(), 31);

    let full = stdout(&run(&[&args[..], &["--q", "6"]].concat()));
    assert_eq!(full.lines().next().unwrap(), "g4,g0,g5,g1,g2,g3,class");
    assert_eq!(run(&[&args[..], &["--q", "7"]].concat()).status.code(), Some(3));

    let arff = dir.path().join("out.arff");
    let o = run(&[&args[..], &["--q", "2", "--output", arff.to_str().unwrap()]].concat());
    assert!(o.status.success());
    let back = pairrank::dataset::load_arff(&arff, &pairrank::ClassSpec::Last).unwrap();
    assert_eq!(back.attribute_names(), &["g4".to_string(), "g0".to_string()]);

    let stale = dir.path().join("stale.tsv");
    fs::write(&stale, "rank\tattribute\tscore\n1\tg0\t0.5\n2\tghost\t0.1\n").unwrap();
    let o = run(&["reduce", "--input", data.to_str().unwrap(), "--ranking", stale.to_str().unwrap(), "--q", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ghost"));
}

#[test]
fn eval_table_shape_and_repeatability() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path(), 20, 3, 60, 5);
    let args = [
        "eval", "--input", data.to_str().unwrap(), "--method", "info-gain", "--q", "3,log2", "--classifiers",
        "naive-bayes,zeror", "--folds", "5", "--repeats", "3",
    ];
    let a = run(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let out = stdout(&a);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "method\tq\tclassifier\tmean\tstddev");
    assert_eq!(lines.len(), 5);
    assert!(lines[2].starts_with("info-gain\t3\tzeror\t50.00\t"), "{out}");
    assert!(lines[3].starts_with("info-gain\t4\tnaive-bayes\t"), "{out}");
    assert_eq!(run(&args).stdout, a.stdout);
}

fn eval_json(dir: &Path, data: &Path, rankings: &[&Path], out: &str, seed: &str) -> PathBuf {
    let path = dir.join(out);
    let mut args = vec![
        "eval".to_string(),
        "--input".into(),
        data.to_str().unwrap().into(),
        "--q".into(),
        "2,4".into(),
        "--classifiers".into(),
        "naive-bayes,knn".into(),
        "--seed".into(),
        seed.into(),
        "--output-format".into(),
        "json".into(),
        "--output".into(),
        path.to_str().unwrap().into(),
    ];
    for r in rankings {
        args.push("--ranking".into());
        args.push(r.to_str().unwrap().into());
    }
    let o = bin().args(&args).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    path
}

#[test]
fn compare_identical_methods_all_tie() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path(), 8, 2, 60, 6);
    let a = ranking_file(dir.path(), "first", &[0, 1, 2, 3, 4, 5, 6, 7]);
    let b = ranking_file(dir.path(), "second", &[0, 1, 2, 3, 4, 5, 6, 7]);
    let results = eval_json(dir.path(), &data, &[&a, &b], "r.json", "42");
    let o = run(&["compare", "--results", results.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["outcomes"].as_array().unwrap().len(), 4);
    for row in v["wins_losses"]["rows"].as_array().unwrap() {
        assert_eq!(row["difference"], 0);
        assert_eq!(row["rank"], 1);
    }
}

#[test]
fn compare_ranks_dominant_method_first() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path(), 10, 2, 80, 7);
    let good = ranking_file(dir.path(), "good", &[0, 1, 2, 3, 4, 5, 6, 7, 8, 9]);
    let noise_a = ranking_file(dir.path(), "noise_a", &[9, 8, 7, 6, 5, 4, 3, 2, 1, 0]);
    let noise_b = ranking_file(dir.path(), "noise_b", &[5, 6, 7, 8, 9, 0, 1, 2, 3, 4]);
    let r1 = eval_json(dir.path(), &data, &[&good, &noise_a], "a.json", "42");
    let r2 = eval_json(dir.path(), &data, &[&noise_b], "b.json", "42");
    for ttest in ["plain", "resampled"] {
        let o = run(&["compare", "--results", r1.to_str().unwrap(), r2.to_str().unwrap(), "--ttest", ttest]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        let wl = &v["wins_losses"]["rows"];
        assert_eq!(wl[0]["method"], "good");
        assert_eq!(wl[0]["rank"], 1);
        assert!(wl[1]["rank"].as_u64().unwrap() > 1);
        let wins: u64 = wl.as_array().unwrap().iter().map(|r| r["wins"].as_u64().unwrap()).sum();
        let losses: u64 = wl.as_array().unwrap().iter().map(|r| r["losses"].as_u64().unwrap()).sum();
        assert_eq!(wins, losses);
        assert_eq!(v["best_count"][0]["method"], "good");
        assert_eq!(v["best_count"][0]["count"], 4);
        assert_eq!(v["best_count"][0]["rank"], 1);
    }
}

#[test]
fn compare_rejects_single_method_and_mismatched_plans() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path(), 6, 2, 40, 8);
    let a = ranking_file(dir.path(), "a", &[0, 1, 2, 3, 4, 5]);
    let b = ranking_file(dir.path(), "b", &[5, 4, 3, 2, 1, 0]);
    let only = eval_json(dir.path(), &data, &[&a], "only.json", "42");
    assert_eq!(run(&["compare", "--results", only.to_str().unwrap()]).status.code(), Some(3));
    let other = eval_json(dir.path(), &data, &[&b], "other.json", "7");
    assert_eq!(
        run(&["compare", "--results", only.to_str().unwrap(), other.to_str().unwrap()]).status.code(),
        Some(3)
    );
    let junk = dir.path().join("junk.json");
    fs::write(&junk, "{not json").unwrap();
    assert_eq!(run(&["compare", "--results", junk.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn cuts_lists_numeric_attributes() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path(), 3, 1, 40, 9);
    let o = run(&["cuts", "--input", data.to_str().unwrap()]);
    assert!(o.status.success());
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "attribute\tcuts");
    assert_eq!(lines.len(), 4);
    let g0: Vec<f64> = lines[1].split('\t').nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(g0.len(), 1);
    assert!(g0[0] > 0.9 && g0[0] < 2.1, "{g0:?}");
}

#[test]
fn output_file_and_json_rank() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path(), 5, 1, 30, 10);
    let out = dir.path().join("rank.json");
    let o = run(&[
        "rank", "--method", "chi-squared", "--input", data.to_str().unwrap(), "--output-format", "json", "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 5);
    assert_eq!(v[0]["attribute"], "g0");
    let unwritable = dir.path().join("missing-dir").join("x.tsv");
    let o = run(&["rank", "--method", "chi-squared", "--input", data.to_str().unwrap(), "--output", unwritable.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
