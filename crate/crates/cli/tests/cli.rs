use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use embcorr::embeddings::{write_word2vec_binary, EmbeddingTable};
use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_embcorr"));
    cmd.env_remove("EMBCORR_EMBEDDINGS_DIR");
    cmd
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Deterministic toy fixtures: 40 words in 30 dimensions, a word task and
/// a two-subtask STS directory (one of them SMT).
fn fixtures() -> TempDir {
    let dir = TempDir::new().unwrap();
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut emb = String::new();
    for i in 0..40 {
        emb.push_str(&format!("w{i}"));
        for _ in 0..30 {
            let u = next() - 0.5;
            emb.push_str(&format!(" {:.5}", u * u * u * 8.0));
        }
        emb.push('\n');
    }
    fs::write(dir.path().join("emb.txt"), emb).unwrap();

    let mut ws = String::from("word1\tword2\tscore\n");
    for i in 0..50 {
        ws.push_str(&format!("w{}\tw{}\t{:.2}\n", i % 40, (i * 7 + 3) % 40, next() * 10.0));
    }
    ws.push_str("w1\tunknownword\t3.0\n");
    fs::write(dir.path().join("ws.txt"), ws).unwrap();

    let sts = dir.path().join("sts");
    fs::create_dir(&sts).unwrap();
    for sub in ["alpha", "SMT"] {
        let (mut input, mut gold) = (String::new(), String::new());
        for i in 0..30 {
            let mut sentence = |len: usize| {
                (0..len)
                    .map(|_| format!("w{}", (next() * 40.0) as usize))
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            input.push_str(&format!("{}\t{}\n", sentence(4), sentence(3)));
            if i == 5 {
                gold.push('\n');
            } else {
                gold.push_str(&format!("{:.2}\n", next() * 5.0));
            }
        }
        fs::write(sts.join(format!("STS.input.{sub}.txt")), input).unwrap();
        fs::write(sts.join(format!("STS.gs.{sub}.txt")), gold).unwrap();
    }
    dir
}

fn json(path: PathBuf) -> serde_json::Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

#[test]
fn sim_prints_one_correlation() {
    let dir = fixtures();
    for measure in ["cos", "prs", "spr", "ken"] {
        let o = run(
            dir.path(),
            &["sim", "--embeddings", "emb.txt", "--format", "text", "--measure", measure, "--word-a", "w1", "--word-b", "w2"],
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let v: f64 = stdout(&o).trim().parse().unwrap();
        assert!((-1.0..=1.0).contains(&v));
    }
}

#[test]
fn profile_of_toy_table() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("toy.txt"),
        "a 0.1 -0.3 0.2 0.9 -1.1\nb 1.0 2.0 3.5 4.0 5.5\nc -2.0 0.0 0.1 0.2 7.0\n",
    )
    .unwrap();
    let o = run(
        dir.path(),
        &["profile", "--embeddings", "toy.txt", "--format", "text", "--output", "p.json"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(dir.path().join("p.json"));
    assert_eq!(report["version"], embcorr::VERSION);
    assert_eq!(report["config"]["command"], "profile");
    let p = &report["result"][0];
    assert_eq!(p["words"], 3);
    assert_eq!(p["mean_census"]["total"], 3);
    let proportion = p["normality"]["proportion"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&proportion));
}

#[test]
fn sweep_is_byte_identical_across_runs() {
    let dir = fixtures();
    let args = |out: &str, format: &str| {
        vec![
            "sweep", "--embeddings", "emb.txt", "--format", "text", "--wordsim", "ws.txt", "--sts", "sts",
            "--resamples", "300", "--seed", "11", "--output-format", format, "--output",
        ]
        .into_iter()
        .map(String::from)
        .chain([out.to_string()])
        .collect::<Vec<_>>()
    };
    for format in ["json", "csv"] {
        let a = bin().current_dir(dir.path()).args(args(&format!("a.{format}"), format)).output().unwrap();
        let b = bin()
            .current_dir(dir.path())
            .args(["--threads", "1"])
            .args(args(&format!("b.{format}"), format))
            .output()
            .unwrap();
        assert!(a.status.success() && b.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
        let read = |n: &str| fs::read(dir.path().join(n)).unwrap();
        let (ra, rb) = (read(&format!("a.{format}")), read(&format!("b.{format}")));
        if format == "json" {
            // only the echoed thread count and output path may differ
            let strip = |bytes: Vec<u8>| {
                let mut v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
                v["config"]["threads"] = serde_json::Value::Null;
                v["config"]["output"] = serde_json::Value::Null;
                v
            };
            assert_eq!(strip(ra), strip(rb));
        }
    }

    let first = run(dir.path(), &args("c.json", "json").iter().map(String::as_str).collect::<Vec<_>>());
    assert!(first.status.success());
    let c = fs::read(dir.path().join("c.json")).unwrap();
    let second = run(dir.path(), &args("c.json", "json").iter().map(String::as_str).collect::<Vec<_>>());
    assert!(second.status.success());
    assert_eq!(c, fs::read(dir.path().join("c.json")).unwrap());

    let report = json(dir.path().join("c.json"));
    assert_eq!(report["config"]["seed"], 11);
    assert_eq!(report["version"], embcorr::VERSION);
    let reports = report["result"]["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 10);
    let ws = &reports[0];
    assert_eq!(ws["total_pairs"], 51);
    assert_eq!(ws["scored_pairs"], 50);
    let sts = &reports[5];
    assert_eq!(sts["subtasks"].as_array().unwrap().len(), 1, "SMT is excluded by default");
    assert_eq!(sts["total_pairs"], 29);
    assert!(!report["result"]["family_verdicts"].as_array().unwrap().is_empty());

    let csv = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert!(csv.starts_with("# embcorr "));
    assert!(csv.contains("embeddings,task,subtask,N,V,coverage,COS,PRS,SPR,KEN,APS"));
    let comparisons = fs::read_to_string(dir.path().join("a.comparisons.csv")).unwrap();
    assert!(comparisons.contains("SPR,COS"));
}

#[test]
fn include_smt_keeps_subtask() {
    let dir = fixtures();
    let o = run(
        dir.path(),
        &["sts", "--embeddings", "emb.txt", "--format", "text", "--task", "sts", "--measures", "cos", "--include-smt"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let subtasks = report["result"]["reports"][0]["subtasks"].as_array().unwrap();
    let names: Vec<&str> = subtasks.iter().map(|s| s["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["SMT", "alpha"]);
}

#[test]
fn word2vec_binary_input() {
    let dir = TempDir::new().unwrap();
    let table = EmbeddingTable::from_rows(
        "t",
        [("king", vec![0.5, 1.0, -0.25, 2.0]), ("queen", vec![1.5, 1.0, -0.5, 0.75])],
    )
    .unwrap();
    let mut bytes = Vec::new();
    write_word2vec_binary(&table, &mut bytes).unwrap();
    fs::write(dir.path().join("v.bin"), &bytes).unwrap();
    let o = run(
        dir.path(),
        &["sim", "--embeddings", "v.bin", "--format", "word2vec-bin", "--measure", "spr", "--word-a", "king", "--word-b", "queen"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).trim(), "0.2");

    // same bytes read as text are not silently accepted as vectors
    let o = run(
        dir.path(),
        &["sim", "--embeddings", "v.bin", "--format", "text", "--measure", "spr", "--word-a", "king", "--word-b", "queen"],
    );
    assert!(!o.status.success());

    fs::write(dir.path().join("cut.bin"), &bytes[..bytes.len() - 3]).unwrap();
    let o = run(
        dir.path(),
        &["sim", "--embeddings", "cut.bin", "--format", "word2vec-bin", "--measure", "cos", "--word-a", "king", "--word-b", "queen"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("offset"));
}

#[test]
fn embeddings_dir_from_environment() {
    let dir = fixtures();
    let elsewhere = TempDir::new().unwrap();
    let o = bin()
        .current_dir(elsewhere.path())
        .env("EMBCORR_EMBEDDINGS_DIR", dir.path())
        .args(["sim", "--embeddings", "emb.txt", "--format", "text", "--measure", "cos", "--word-a", "w1", "--word-b", "w2"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn exit_codes_and_no_partial_output() {
    let dir = fixtures();
    let o = run(dir.path(), &["sweep", "--bogus-flag", "--output", "x.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!dir.path().join("x.json").exists());

    let o = run(dir.path(), &["--help"]);
    assert_eq!(o.status.code(), Some(0));

    let o = run(
        dir.path(),
        &["wordsim", "--embeddings", "emb.txt", "--format", "text", "--task", "ws.txt", "--alpha", "1.5", "--output", "x.json"],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(!dir.path().join("x.json").exists());

    let o = run(
        dir.path(),
        &["wordsim", "--embeddings", "nope.txt", "--format", "text", "--task", "ws.txt", "--output", "x.json"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.txt"));
    assert!(!dir.path().join("x.json").exists());

    fs::write(dir.path().join("bad.txt"), "a 1.0 2.0\nb 1.0 nan\n").unwrap();
    let o = run(
        dir.path(),
        &["profile", "--embeddings", "bad.txt", "--format", "text"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let o = run(
        dir.path(),
        &["sim", "--embeddings", "emb.txt", "--format", "text", "--measure", "cos", "--word-a", "w1", "--word-b", "zzz", "--output", "x.json"],
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(!dir.path().join("x.json").exists());
}

#[test]
fn plot_exports() {
    let dir = fixtures();
    let o = run(
        dir.path(),
        &["export-qq", "--embeddings", "emb.txt", "--format", "text", "--word", "w3", "--word", "w4", "--output-format", "csv"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "embeddings,word,x,y");
    assert_eq!(rows.len(), 1 + 2 * 30);

    let o = run(
        dir.path(),
        &["export-hist", "--embeddings", "emb.txt", "--format", "text", "--bins", "7", "--output-format", "csv", "--output", "h.csv"],
    );
    assert!(o.status.success());
    let text = fs::read_to_string(dir.path().join("h.csv")).unwrap();
    let counts: usize = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(counts, 40);
}
