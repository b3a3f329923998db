use std::fs;
use std::path::Path;

use lrboost::cli::run;

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(out: &Path, seed: u64) -> i32 {
    run([
        "lrboost", "gen-synth", "--n-instances", "120", "--n-features", "3", "--n-labels", "4",
        "--seed", &seed.to_string(), "--out", s(out),
    ])
}

#[test]
fn gen_synth_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert_eq!(gen(&a, 9), 0);
    assert_eq!(gen(&b, 9), 0);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let data = lrboost::io::parse_dataset(&a).unwrap();
    assert_eq!((data.m(), data.d(), data.n_labels()), (120, 3, 4));
}

#[test]
fn train_then_predict_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    assert_eq!(gen(&data, 3), 0);

    let predict = |method: &str, extra: &[&str]| {
        let model = dir.path().join(format!("{method}.model"));
        let preds = dir.path().join(format!("{method}.csv"));
        let mut args = vec!["lrboost", "train", "--data", s(&data), "--method", method, "--seed", "5", "--out", s(&model)];
        args.extend_from_slice(extra);
        assert_eq!(run(args), 0);
        assert_eq!(run(["lrboost", "predict", "--model", s(&model), "--data", s(&data), "--out", s(&preds)]), 0);
        fs::read_to_string(preds).unwrap()
    };

    let single = predict("single", &[]);
    assert_eq!(single.lines().count(), 121);
    let boost = predict("boost", &["--n-models", "1", "--identity-sample"]);
    assert_eq!(single, boost);
    let boosted = predict("boost", &["--n-models", "5"]);
    assert_eq!(boosted.lines().count(), 121);
}

#[test]
fn evaluate_writes_fold_scores() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let out = dir.path().join("cv.csv");
    assert_eq!(gen(&data, 4), 0);
    let code = run([
        "lrboost", "evaluate", "--data", s(&data), "--method", "rf", "--n-models", "3", "--folds", "4",
        "--seed", "1", "--out", s(&out),
    ]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "method,dataset,n_models,mean_kt,fold_1,fold_2,fold_3,fold_4");
    assert!(lines.next().unwrap().starts_with("rf,d,3,"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    assert_eq!(run(["lrboost", "--help"]), 0);
    assert_eq!(run(["lrboost", "train", "--bogus"]), 1);
    assert_eq!(run(["lrboost", "gen-synth", "--n-labels", "1", "--out", s(&dir.path().join("x.csv"))]), 1);
    assert_eq!(
        run(["lrboost", "train", "--data", s(&missing), "--method", "single", "--out", s(&dir.path().join("m"))]),
        2
    );

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "x1,rank_A,rank_B\n0.5,1,1\n").unwrap();
    assert_eq!(run(["lrboost", "train", "--data", s(&bad), "--method", "single", "--out", s(&dir.path().join("m"))]), 2);
}
