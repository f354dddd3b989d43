use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use lmbr_cli::shard::{ShardFile, HEADER_LEN};

fn lmbr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lmbr")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not json ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn dir_str(d: &Path) -> &str {
    d.to_str().unwrap()
}

/// Raw message of K symbols over F_{3^m} with coefficients cycling 0, 1, 2.
fn write_message(path: &Path, k: usize, m: usize) -> Vec<u8> {
    let bytes: Vec<u8> = (0..k * m).flat_map(|i| ((i % 3) as u16).to_le_bytes()).collect();
    fs::write(path, &bytes).unwrap();
    bytes
}

fn shard_files(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "lmbr"))
        .collect();
    v.sort();
    v
}

#[test]
fn make_desk_codes() {
    let tmp = TempDir::new().unwrap();
    let out = lmbr(&["make", "--out-dir", dir_str(tmp.path())]);
    assert_eq!(code(&out), 0);
    let s = json(&out);
    assert_eq!((s["n"].as_u64(), s["dmin_opt"].as_u64(), s["max_file_size"].as_u64()), (Some(6), Some(3), Some(5)));
    let descriptor: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("code.json")).unwrap()).unwrap();
    assert_eq!(descriptor, s);

    let out = lmbr(&["make", "--construction", "info-local", "--delta", "1", "--out-dir", dir_str(tmp.path())]);
    let s = json(&out);
    assert_eq!((s["n"].as_u64(), s["dmin_opt"].as_u64(), s["m"].as_u64()), (Some(7), Some(4), Some(8)));
}

#[test]
fn make_is_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    lmbr(&["make", "--out-dir", dir_str(a.path())]);
    lmbr(&["make", "--out-dir", dir_str(b.path())]);
    assert_eq!(fs::read(a.path().join("code.json")).unwrap(), fs::read(b.path().join("code.json")).unwrap());
}

#[test]
fn small_m_is_refused_by_name() {
    let out = lmbr(&["make", "--m", "5"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("m ≥ tK_L"));
}

#[test]
fn encode_decode_round_trip() {
    let tmp = TempDir::new().unwrap();
    let input = tmp.path().join("msg.bin");
    let bytes = write_message(&input, 5, 6);
    let shards = tmp.path().join("shards");
    let out = lmbr(&["encode", "--input", dir_str(&input), "--out-dir", dir_str(&shards)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["shards"].as_u64(), Some(6));
    let files = shard_files(&shards);
    assert_eq!(files.len(), 6);
    let first: Vec<Vec<u8>> = files.iter().map(|p| fs::read(p).unwrap()).collect();

    // re-running is byte-identical
    lmbr(&["encode", "--input", dir_str(&input), "--out-dir", dir_str(&shards)]);
    let second: Vec<Vec<u8>> = files.iter().map(|p| fs::read(p).unwrap()).collect();
    assert_eq!(first, second);

    // lose d_min - 1 = 2 shards
    fs::remove_file(&files[1]).unwrap();
    fs::remove_file(&files[4]).unwrap();
    let output = tmp.path().join("out.bin");
    let out = lmbr(&["decode", "--shard-dir", dir_str(&shards), "--output", dir_str(&output)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read(&output).unwrap(), bytes);

    // a third loss from the same group is too many
    fs::remove_file(&files[0]).unwrap();
    fs::remove_file(&files[2]).unwrap();
    let out = lmbr(&["decode", "--shard-dir", dir_str(&shards), "--output", dir_str(&output)]);
    assert_eq!(code(&out), 1);
}

#[test]
fn hex_input_and_output() {
    let tmp = TempDir::new().unwrap();
    let raw = tmp.path().join("msg.bin");
    let bytes = write_message(&raw, 5, 6);
    let hex_in = tmp.path().join("msg.hex");
    let text: String = bytes.iter().map(|b| format!("{b:02x}")).collect();
    fs::write(&hex_in, format!("{text}\n")).unwrap();
    let shards = tmp.path().join("s");
    assert_eq!(code(&lmbr(&["encode", "--input", dir_str(&hex_in), "--out-dir", dir_str(&shards)])), 0);
    let output = tmp.path().join("out.hex");
    let out = lmbr(&["decode", "--shard-dir", dir_str(&shards), "--output", dir_str(&output), "--hex"]);
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read_to_string(&output).unwrap().trim(), text);
}

#[test]
fn zero_input_gives_zero_payloads() {
    let tmp = TempDir::new().unwrap();
    let input = tmp.path().join("zero.bin");
    fs::write(&input, vec![0u8; 5 * 6 * 2]).unwrap();
    let shards = tmp.path().join("s");
    assert_eq!(code(&lmbr(&["encode", "--input", dir_str(&input), "--out-dir", dir_str(&shards)])), 0);
    for p in shard_files(&shards) {
        let bytes = fs::read(&p).unwrap();
        assert_eq!(bytes.len(), HEADER_LEN + 2 * 6 * 2);
        let f = ShardFile::parse(&bytes).unwrap();
        assert!(f.coeffs.iter().all(|&c| c == 0));
        assert_eq!(f.to_bytes(), bytes);
    }
}

#[test]
fn wrong_input_size_refused() {
    let tmp = TempDir::new().unwrap();
    let input = tmp.path().join("short.bin");
    fs::write(&input, [0u8; 7]).unwrap();
    let out = lmbr(&["encode", "--input", dir_str(&input), "--out-dir", dir_str(tmp.path())]);
    assert_eq!(code(&out), 2);
    let missing = lmbr(&["encode", "--input", "/nonexistent/input.bin"]);
    assert_eq!(code(&missing), 3);
}

#[test]
fn shards_bound_to_their_code() {
    let tmp = TempDir::new().unwrap();
    let input = tmp.path().join("msg.bin");
    write_message(&input, 5, 6);
    let shards = tmp.path().join("s");
    lmbr(&["encode", "--input", dir_str(&input), "--out-dir", dir_str(&shards)]);
    let out = lmbr(&["decode", "--K", "4", "--shard-dir", dir_str(&shards), "--output", dir_str(&tmp.path().join("o"))]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("different code"));
}

fn encode_into(tmp: &TempDir, extra: &[&str], k: usize, m: usize) -> std::path::PathBuf {
    let input = tmp.path().join("msg.bin");
    write_message(&input, k, m);
    let shards = tmp.path().join("shards");
    let mut args = vec!["encode", "--input", dir_str(&input), "--out-dir", dir_str(&shards)];
    args.extend_from_slice(extra);
    let out = lmbr(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    shards
}

fn repair_and_compare(tmp: &TempDir, shards: &Path, extra: &[&str], failed: usize) -> Value {
    let path = shard_files(shards)[failed].clone();
    let original = fs::read(&path).unwrap();
    fs::remove_file(&path).unwrap();
    let rebuilt = tmp.path().join(format!("rebuilt{failed}"));
    let f = failed.to_string();
    let mut args = vec!["repair", "--shard-dir", dir_str(shards), "--failed", &f, "--out-dir", dir_str(&rebuilt)];
    args.extend_from_slice(extra);
    let out = lmbr(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let replacement = fs::read(shard_files(&rebuilt)[0].clone()).unwrap();
    assert_eq!(replacement, original);
    fs::write(&path, original).unwrap();
    json(&out)
}

#[test]
fn repair_mbr_node() {
    let tmp = TempDir::new().unwrap();
    let shards = encode_into(&tmp, &[], 5, 6);
    for failed in 0..6 {
        let r = repair_and_compare(&tmp, &shards, &[], failed);
        assert_eq!(r["path"], "local");
        assert_eq!(r["downloaded_symbols"].as_u64(), Some(2));
        assert_eq!(r["per_helper"], serde_json::json!([1, 1]));
    }
}

#[test]
fn repair_fr_node_by_transfer() {
    let tmp = TempDir::new().unwrap();
    let fr = ["--construction", "fr-local", "--q", "7", "--K", "10"];
    let shards = encode_into(&tmp, &fr, 10, 10);
    assert_eq!(shard_files(&shards).len(), 14);
    for failed in [0, 3, 9, 13] {
        let r = repair_and_compare(&tmp, &shards, &fr, failed);
        assert_eq!(r["path"], "transfer");
        assert_eq!(r["downloaded_symbols"].as_u64(), Some(3));
        assert_eq!(r["arithmetic_ops"].as_u64(), Some(0));
    }
}

#[test]
fn repair_global_node_by_decode() {
    let tmp = TempDir::new().unwrap();
    let c2 = ["--construction", "info-local", "--delta", "1"];
    let shards = encode_into(&tmp, &c2, 5, 8);
    let r = repair_and_compare(&tmp, &shards, &c2, 6);
    assert_eq!(r["path"], "decode-reencode");
    assert_eq!(r["helpers"].as_array().unwrap().len(), 4);
}

#[test]
fn unrepairable_is_a_failure() {
    let tmp = TempDir::new().unwrap();
    let shards = encode_into(&tmp, &[], 5, 6);
    let files = shard_files(&shards);
    for i in [0, 1, 2, 3] {
        fs::remove_file(&files[i]).unwrap();
    }
    let out = lmbr(&["repair", "--shard-dir", dir_str(&shards), "--failed", "0", "--out-dir", dir_str(tmp.path())]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("decode fallback"));
}

#[test]
fn verify_dmin_reports() {
    let out = lmbr(&["verify", "--mode", "dmin", "--workers", "2"]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    assert_eq!((r["claimed"].as_u64(), r["measured"].as_u64(), r["pass"].as_bool()), (Some(3), Some(3), Some(true)));
    assert_eq!(r["witness"]["erasures"], serde_json::json!([0, 1, 2]));

    let c2 = lmbr(&["verify", "--mode", "dmin", "--construction", "info-local"]);
    assert_eq!(json(&c2)["measured"].as_u64(), Some(4));
}

#[test]
fn verify_cap_refusal() {
    let out = lmbr(&["verify", "--mode", "dmin", "--pattern-cap", "10"]);
    assert_eq!(code(&out), 2);
    assert!(out.stdout.is_empty());
}

#[test]
fn verify_ura_and_negative_control() {
    let out = lmbr(&["verify", "--mode", "ura"]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    assert_eq!(r["measured"]["profile"], serde_json::json!([2, 1, 0]));
    assert_eq!(r["measured"]["basic_subsets"].as_u64(), Some(64));

    let bad = lmbr(&["verify", "--mode", "ura", "--claimed-profile", "2,2,0"]);
    assert_eq!(code(&bad), 1);
    let r = json(&bad);
    assert_eq!(r["pass"], false);
    assert_eq!(r["witness"]["subset"], serde_json::json!([0, 1]));
}

#[test]
fn verify_repair_all_and_bounds() {
    for construction in ["all-symbol", "info-local", "fr-local"] {
        let q = if construction == "fr-local" { "7" } else { "3" };
        let k = if construction == "fr-local" { "10" } else { "5" };
        for mode in ["repair-all", "bounds-crosscheck"] {
            let out = lmbr(&["verify", "--mode", mode, "--construction", construction, "--q", q, "--K", k]);
            assert_eq!(code(&out), 0, "{construction} {mode}: {}", String::from_utf8_lossy(&out.stdout));
            assert_eq!(json(&out)["pass"], true);
        }
    }
}

#[test]
fn bench_histograms() {
    let empty = json(&lmbr(&["bench", "--trials", "0"]));
    assert_eq!(empty["repair_bandwidth_histogram"], serde_json::json!({}));
    let a = json(&lmbr(&["bench", "--trials", "6", "--seed", "4"]));
    let b = json(&lmbr(&["bench", "--trials", "6", "--seed", "4"]));
    assert_eq!(a["repair_bandwidth_histogram"], serde_json::json!({"2": 6}));
    assert_eq!(a["workload_digest"], b["workload_digest"]);
    let c = json(&lmbr(&["bench", "--trials", "6", "--seed", "5"]));
    assert_ne!(a["workload_digest"], c["workload_digest"]);
}

#[test]
fn design_file_input() {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("fano.txt");
    fs::write(&path, "# Fano plane\n1 2 4\n2 3 5\n3 4 6\n4 5 7\n5 6 1\n6 7 2\n7 1 3\n").unwrap();
    let out = lmbr(&["bounds", "--construction", "fr-local", "--q", "7", "--K", "10", "--design-file", dir_str(&path)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert_eq!((r["n"].as_u64(), r["dmin_bound"].as_u64(), r["pinv"].as_u64()), (Some(14), Some(6), Some(9)));

    fs::write(&path, "1 2 4\n2 3 5\n").unwrap();
    let out = lmbr(&["bounds", "--construction", "fr-local", "--q", "7", "--design-file", dir_str(&path)]);
    assert_eq!(code(&out), 2);
}
