use nmodal_cli::run;
use serde_json::Value;

fn data(path: &str) -> String {
    format!("{}/../core/data/{path}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn exit_codes() {
    assert_eq!(run(["nmodal", "taut", "p -> p"]).code, 0);
    assert_eq!(run(["nmodal", "taut", "[](p -> p)"]).code, 1);
    assert_eq!(run(["nmodal", "taut", "p ->"]).code, 2);
    assert_eq!(run(["nmodal", "taut", "--matrix", "NOPE", "p"]).code, 2);
    assert_eq!(run(["nmodal", "frobnicate"]).code, 2);
    assert_eq!(
        run(["nmodal", "entails", "--matrix", "W", "p, p -> q", "q"]).code,
        0
    );
    assert_eq!(
        run(["nmodal", "tableau", "--logic", "S5", "<>p -> []<>p"]).code,
        0
    );
    assert_eq!(
        run(["nmodal", "tableau", "--logic", "T", "[]p -> [][]p"]).code,
        1
    );
}

#[test]
fn json_lines_parse() {
    let out = run([
        "nmodal", "--json", "tableau", "--logic", "K", "--trace", "[]p -> p",
    ]);
    assert_eq!(out.code, 1);
    for line in out.stdout.lines() {
        serde_json::from_str::<Value>(line).unwrap();
    }
    let out = run(["nmodal", "--json", "taut", "[](p -> p)"]);
    let v: Value = serde_json::from_str(out.stdout.trim()).unwrap();
    assert_eq!(v["valid"], false);
}

#[test]
fn proof_files() {
    let ok = run([
        "nmodal".to_string(),
        "proof-check".into(),
        data("proofs/k_nec_identity.jsonl"),
    ]);
    assert_eq!(ok.code, 0, "{}", ok.stderr);

    let dir = std::env::temp_dir().join(format!("nmodal-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.jsonl");
    std::fs::write(
        &bad,
        "{\"f\": \"p -> (p -> p)\", \"rule\": \"Axiom\", \"schema\": \"p1\"}\n\
         {\"f\": \"[](p -> (p -> p))\", \"rule\": \"Nec\", \"refs\": [1]}\n",
    )
    .unwrap();
    let path = bad.to_string_lossy().to_string();
    let out = run(["nmodal", "proof-check", "--system", "W", &path]);
    assert_eq!(out.code, 1);
    let out = run(["nmodal", "proof-check", "--system", "K", &path]);
    assert_eq!(out.code, 0);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn matrix_round_trip_through_a_file() {
    let shown = run(["nmodal", "--json", "matrix", "show", "--matrix", "W"]);
    assert_eq!(shown.code, 0);
    let dir = std::env::temp_dir().join(format!("nmodal-matrix-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("w.json");
    std::fs::write(&file, shown.stdout.lines().next().unwrap()).unwrap();
    let path = file.to_string_lossy().to_string();
    let a = run(["nmodal", "taut", "--matrix", &path, "[]p -> []~~p"]);
    let b = run(["nmodal", "taut", "--matrix", "W", "[]p -> []~~p"]);
    assert_eq!(a.code, 1);
    assert_eq!(a.code, b.code);
    std::fs::remove_dir_all(&dir).unwrap();
}
