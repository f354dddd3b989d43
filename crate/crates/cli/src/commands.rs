use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::ValueEnum;
use itertools::Itertools;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use lmbr_core::lrc::verify::{check_exact_ura, check_min_rank, exact_dmin, subset_ranks, UraWitness};
use lmbr_core::{BoundContext, Error, FieldElement, LocalCode, LrcCode, RankProfile, RepairPath, Shard};

use crate::shard::{self, ShardFile};
use crate::{CliError, ResolvedCode};

pub const DESCRIPTOR: &str = "code.json";

/// A command's machine-readable output and whether it counts as a pass.
#[derive(Debug, Clone)]
pub struct Report {
    pub json: Value,
    pub pass: bool,
}

impl Report {
    fn ok(json: Value) -> Self {
        Self { json, pass: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyMode {
    Dmin,
    Ura,
    RepairAll,
    BoundsCrosscheck,
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

fn summary(rc: &ResolvedCode) -> Result<Value, CliError> {
    let code = &rc.code;
    let ctx = code.bound_context();
    let dmin = ctx.dmin_opt(code.k())?;
    let local = match code.local() {
        LocalCode::Mbr(c) => json!({"kind": "mbr", "n_l": c.n_l(), "r": c.r(), "d": c.d(), "beta": c.beta()}),
        LocalCode::Fr(c) => json!({
            "kind": "fr",
            "n_l": c.n(),
            "k_fr": c.dim(),
            "k_rec": c.k_rec(),
            "t": c.design().t(),
            "lambda": c.design().lambda(),
            "blocks": c.design().blocks(),
        }),
    };
    Ok(json!({
        "construction": rc.config.construction.as_str(),
        "digest": shard::hex(&rc.digest),
        "q": code.field().q(),
        "m": code.field().m(),
        "modulus": code.field().modulus(),
        "t": code.groups(),
        "delta": code.globals(),
        "local": local,
        "n": code.n(),
        "alpha": code.alpha(),
        "k_l": code.local().dim(),
        "K": code.k(),
        "profile": ctx.profile().as_slice(),
        "pinv": ctx.p_inv(code.k())?,
        "dmin_opt": dmin,
        "max_file_size": ctx.max_file_size(dmin)?,
    }))
}

/// Writes the code descriptor and returns the parameter summary.
pub fn make(rc: &ResolvedCode) -> Result<Report, CliError> {
    let out = summary(rc)?;
    let dir = &rc.config.out_dir;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(DESCRIPTOR);
    let text = serde_json::to_string_pretty(&out).expect("json value serializes");
    fs::write(&path, text + "\n").map_err(io_err(&path))?;
    Ok(Report::ok(out))
}

pub fn bounds(rc: &ResolvedCode) -> Result<Report, CliError> {
    let code = &rc.code;
    let ctx = code.bound_context();
    let dmin = ctx.dmin_opt(code.k())?;
    Ok(Report::ok(json!({
        "n": code.n(),
        "K": code.k(),
        "dmin_bound": dmin,
        "file_size_bound": ctx.max_file_size(dmin)?,
        "pinv": ctx.p_inv(code.k())?,
        "profile": ctx.profile().as_slice(),
    })))
}

/// Reads K symbols from a raw little-endian dump or its hex text.
pub fn parse_message(code: &LrcCode, bytes: &[u8]) -> Result<Vec<FieldElement>, CliError> {
    let m = code.field().m();
    let raw_len = code.k() * m * 2;
    let raw = if bytes.len() == raw_len {
        bytes.to_vec()
    } else {
        let text: String = String::from_utf8_lossy(bytes).split_whitespace().collect();
        if text.len() != 2 * raw_len || !text.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(CliError::Refused(format!(
                "input size mismatch: expected K*m*2 = {raw_len} raw bytes or {} hex characters, got {} bytes",
                2 * raw_len,
                bytes.len()
            )));
        }
        (0..raw_len)
            .map(|i| u8::from_str_radix(&text[2 * i..2 * i + 2], 16).expect("checked hex digits"))
            .collect()
    };
    raw.chunks_exact(2 * m)
        .map(|sym| {
            let coeffs: Vec<u16> = sym.chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]])).collect();
            shard::element(code.field(), &coeffs)
        })
        .collect()
}

pub fn message_bytes(msg: &[FieldElement]) -> Vec<u8> {
    msg.iter()
        .flat_map(|e| e.coeffs().iter().flat_map(|c| c.to_le_bytes()))
        .collect()
}

pub fn encode(rc: &ResolvedCode, input: &Path) -> Result<Report, CliError> {
    let bytes = fs::read(input).map_err(io_err(input))?;
    let msg = parse_message(&rc.code, &bytes)?;
    let shards = rc.code.encode(&msg)?;
    let dir = &rc.config.out_dir;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut files = Vec::new();
    for s in &shards {
        let path = shard::shard_path(dir, s.index);
        shard::write_shard(&path, &ShardFile::from_shard(s, rc.code.field(), rc.digest))?;
        files.push(path.display().to_string());
    }
    Ok(Report::ok(json!({
        "digest": shard::hex(&rc.digest),
        "shards": shards.len(),
        "files": files,
    })))
}

fn load_shards(rc: &ResolvedCode, dir: &Path) -> Result<Vec<Shard>, CliError> {
    shard::read_dir(dir)?
        .iter()
        .map(|f| f.to_shard(&rc.code, rc.digest))
        .collect()
}

pub fn decode(rc: &ResolvedCode, shard_dir: &Path, output: &Path, hex: bool) -> Result<Report, CliError> {
    let shards = load_shards(rc, shard_dir)?;
    let used: Vec<usize> = shards.iter().map(|s| s.index).collect();
    let msg = rc.code.decode(&shards)?;
    let bytes = message_bytes(&msg);
    let body = if hex { (shard::hex(&bytes) + "\n").into_bytes() } else { bytes };
    fs::write(output, body).map_err(io_err(output))?;
    Ok(Report::ok(json!({
        "shards_used": used,
        "symbols": msg.len(),
        "output": output.display().to_string(),
    })))
}

fn repair_json(rep: &lmbr_core::RepairReport) -> Value {
    json!({
        "failed": rep.shard.index,
        "path": rep.path.as_str(),
        "helpers": rep.helpers,
        "per_helper": rep.per_helper,
        "downloaded_symbols": rep.downloaded_symbols,
        "arithmetic_ops": rep.arithmetic_ops,
        "local_failure": rep.local_failure,
    })
}

/// Rebuilds shard `failed` from the other shards in `shard_dir` and writes
/// it to the output directory.
pub fn repair(rc: &ResolvedCode, shard_dir: &Path, failed: usize) -> Result<Report, CliError> {
    let shards: Vec<Shard> = load_shards(rc, shard_dir)?
        .into_iter()
        .filter(|s| s.index != failed)
        .collect();
    let rep = rc.code.repair(failed, &shards)?;
    let dir = &rc.config.out_dir;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = shard::shard_path(dir, failed);
    shard::write_shard(&path, &ShardFile::from_shard(&rep.shard, rc.code.field(), rc.digest))?;
    let mut out = repair_json(&rep);
    out["output"] = json!(path.display().to_string());
    Ok(Report::ok(out))
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Refused(format!("worker pool: {e}")))
}

fn random_message(code: &LrcCode, rng: &mut ChaCha8Rng) -> Vec<FieldElement> {
    let f = code.field();
    (0..code.k()).map(|_| f.from_index(rng.gen_range(0..f.order()))).collect()
}

pub fn verify(rc: &ResolvedCode, mode: VerifyMode, claimed_profile: Option<Vec<usize>>) -> Result<Report, CliError> {
    match mode {
        VerifyMode::Dmin => verify_dmin(rc),
        VerifyMode::Ura => verify_ura(rc, claimed_profile),
        VerifyMode::RepairAll => verify_repair_all(rc),
        VerifyMode::BoundsCrosscheck => verify_bounds(rc),
    }
}

fn verify_dmin(rc: &ResolvedCode) -> Result<Report, CliError> {
    let code = &rc.code;
    let claimed = code.bound_context().dmin_opt(code.k())?;
    let report = exact_dmin(code, rc.config.pattern_cap, rc.config.workers)?;
    let pass = report.dmin == claimed;
    Ok(Report {
        json: json!({
            "mode": "dmin",
            "claimed": claimed,
            "measured": report.dmin,
            "pass": pass,
            "witness": {"erasures": report.witness},
            "patterns_checked": report.patterns_checked.to_string(),
        }),
        pass,
    })
}

fn witness_json(scope: &str, w: &UraWitness) -> Value {
    json!({"scope": scope, "subset": w.subset, "rank": w.rank, "expected": w.expected})
}

fn measured_profile(ranks: &[usize], nodes: usize) -> Vec<usize> {
    // ranks of the prefixes {0}, {0,1}, ...
    (1..=nodes)
        .map(|i| ranks[(1 << i) - 1] - ranks[(1 << (i - 1)) - 1])
        .collect()
}

fn verify_ura(rc: &ResolvedCode, claimed_profile: Option<Vec<usize>>) -> Result<Report, CliError> {
    let code = &rc.code;
    let local = code.local();
    let (n_l, n, alpha, q) = (local.len(), code.n(), code.alpha(), code.field().q());
    let subsets = if n >= 100 { u128::MAX } else { (1u128 << n_l) + (1u128 << n) };
    if n >= 64 || subsets > rc.config.pattern_cap {
        return Err(Error::CapExceeded {
            needed: subsets,
            cap: rc.config.pattern_cap,
        }
        .into());
    }
    let claimed = RankProfile::new(claimed_profile.unwrap_or_else(|| local.profile().as_slice().to_vec()));
    if claimed.len() != n_l {
        return Err(CliError::Refused(format!(
            "claimed profile has {} entries, local length is {n_l}",
            claimed.len()
        )));
    }
    let ctx = BoundContext::with_globals(code.groups(), code.globals(), alpha, claimed.clone())?;
    let p: Vec<usize> = (0..=n).map(|s| if s == 0 { 0 } else { ctx.partial_sum(s).unwrap() }).collect();

    let local_gen = local.generator();
    let basic_gen = code.generator();
    let (local_ranks, local_check, basic_check) = pool(rc.config.workers)?.install(|| {
        (
            subset_ranks(&local_gen, n_l, alpha, q),
            check_exact_ura(&local_gen, n_l, alpha, q, &claimed),
            check_min_rank(&basic_gen, n, alpha, q, &p),
        )
    });
    let witness = match (&local_check, &basic_check) {
        (Err(w), _) => witness_json("local", w),
        (_, Err(w)) => witness_json("basic", w),
        _ => Value::Null,
    };
    let pass = local_check.is_ok() && basic_check.is_ok();
    Ok(Report {
        json: json!({
            "mode": "ura",
            "claimed": {"profile": claimed.as_slice(), "partial_sums": p},
            "measured": {
                "profile": measured_profile(&local_ranks, n_l),
                "local_subsets": 1u64 << n_l,
                "basic_subsets": 1u64 << n,
            },
            "pass": pass,
            "witness": witness,
        }),
        pass,
    })
}

fn verify_repair_all(rc: &ResolvedCode) -> Result<Report, CliError> {
    let code = &rc.code;
    let field = code.field();
    let mut rng = ChaCha8Rng::seed_from_u64(rc.config.seed);
    let msg = random_message(code, &mut rng);
    let shards = code.encode(&msg)?;
    let alpha = code.alpha();

    let mut repairs = 0usize;
    let mut by_path: BTreeMap<&str, usize> = BTreeMap::new();
    let mut local_downloads = Vec::new();
    let mut witness = Value::Null;
    let fail = |w: Value, witness: &mut Value| {
        if witness.is_null() {
            *witness = w;
        }
    };

    for failed in 0..code.n() {
        let others: Vec<Shard> = shards.iter().filter(|s| s.index != failed).cloned().collect();
        let mut helper_sets: Vec<Vec<Shard>> = vec![others.clone()];
        match (code.local(), code.role(failed)) {
            (LocalCode::Mbr(mbr), Some(lmbr_core::ShardRole::Local { group, position })) => {
                // every d-subset of the surviving group members
                let start = code.group_nodes(group).start;
                let members: Vec<usize> = code.group_nodes(group).filter(|&i| i != failed).collect();
                for helpers in members.iter().copied().combinations(mbr.d()) {
                    let positions: Vec<usize> = helpers.iter().map(|h| h - start).collect();
                    let symbols = helpers
                        .iter()
                        .map(|&h| mbr.helper_symbol(field, &shards[h].payload, position))
                        .collect::<lmbr_core::Result<Vec<_>>>()?;
                    repairs += 1;
                    *by_path.entry("local").or_default() += 1;
                    local_downloads.push(symbols.len() * mbr.beta());
                    match mbr.repair(field, position, &positions, &symbols) {
                        Ok(p) if p == shards[failed].payload && symbols.len() * mbr.beta() == alpha => {}
                        Ok(_) => fail(json!({"failed": failed, "helpers": helpers, "reason": "mismatch"}), &mut witness),
                        Err(e) => fail(json!({"failed": failed, "helpers": helpers, "reason": e.to_string()}), &mut witness),
                    }
                }
                continue;
            }
            (LocalCode::Fr(_), Some(lmbr_core::ShardRole::Local { group, .. })) => {
                // drop each other member in turn to force alternate holders
                for h in code.group_nodes(group).filter(|&i| i != failed) {
                    helper_sets.push(others.iter().filter(|s| s.index != h).cloned().collect());
                }
            }
            _ => {}
        }
        for avail in helper_sets {
            repairs += 1;
            match code.repair(failed, &avail) {
                Ok(rep) => {
                    *by_path.entry(rep.path.as_str()).or_default() += 1;
                    let bad_download = rep.path != RepairPath::DecodeReencode && rep.downloaded_symbols != alpha;
                    if rep.path != RepairPath::DecodeReencode {
                        local_downloads.push(rep.downloaded_symbols);
                    }
                    if rep.shard != shards[failed] || bad_download {
                        fail(json!({"failed": failed, "helpers": rep.helpers, "reason": "mismatch"}), &mut witness);
                    }
                }
                Err(e) => {
                    let avail_idx: Vec<usize> = avail.iter().map(|s| s.index).collect();
                    fail(json!({"failed": failed, "available": avail_idx, "reason": e.to_string()}), &mut witness);
                }
            }
        }
    }
    let pass = witness.is_null();
    Ok(Report {
        json: json!({
            "mode": "repair-all",
            "claimed": {"local_download": alpha, "bit_exact": true},
            "measured": {
                "repairs": repairs,
                "by_path": by_path,
                "min_local_download": local_downloads.iter().min(),
                "max_local_download": local_downloads.iter().max(),
            },
            "pass": pass,
            "witness": witness,
        }),
        pass,
    })
}

fn verify_bounds(rc: &ResolvedCode) -> Result<Report, CliError> {
    let ctx = rc.code.bound_context();
    let n = ctx.n();
    let p = |s: usize| ctx.partial_sum(s);
    let mbr = ctx.profile().mbr_shape().is_some();
    let local_cap = ctx.groups() * ctx.k_l();
    let mut witness = Value::Null;
    let mut k_checked = 0;
    for k in 1..=ctx.capacity() {
        k_checked += 1;
        let mut summed = None;
        for s in 1..=n {
            if p(s)? >= k {
                summed = Some(s);
                break;
            }
        }
        let summed = summed.expect("K <= capacity = P(n)");
        let formula = ctx.p_inv(k)?;
        let closed = if mbr && k <= local_cap { Some(ctx.mbr_p_inv_closed_form(k)?) } else { None };
        if formula != summed || closed.is_some_and(|c| c != summed) {
            witness = json!({"K": k, "summed": summed, "pinv": formula, "closed_form": closed});
            break;
        }
    }
    let mut d_checked = 0;
    if witness.is_null() {
        for d in 1..=n {
            d_checked += 1;
            let direct = p(n - d + 1)?;
            let general = ctx.max_file_size(d)?;
            let closed = if mbr { Some(ctx.mbr_max_file_size(d)?) } else { None };
            if general != direct || closed.is_some_and(|c| c != direct) {
                witness = json!({"d_min": d, "direct": direct, "max_file_size": general, "closed_form": closed});
                break;
            }
        }
    }
    let pass = witness.is_null();
    Ok(Report {
        json: json!({
            "mode": "bounds-crosscheck",
            "claimed": {"closed_form_equals_summation": true, "closed_form_available": mbr},
            "measured": {"k_values": k_checked, "dmin_values": d_checked},
            "pass": pass,
            "witness": witness,
        }),
        pass,
    })
}

struct Trial {
    msg: Vec<FieldElement>,
    erased: Vec<usize>,
    failed: usize,
}

fn workload(code: &LrcCode, trials: usize, seed: u64) -> Result<Vec<Trial>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let erasures = code.bound_context().dmin_opt(code.k())? - 1;
    Ok((0..trials)
        .map(|_| {
            let msg = random_message(code, &mut rng);
            let mut erased = sample(&mut rng, code.n(), erasures).into_vec();
            erased.sort_unstable();
            let failed = rng.gen_range(0..code.n());
            Trial { msg, erased, failed }
        })
        .collect())
}

fn workload_digest(code: &LrcCode, trials: &[Trial]) -> String {
    let mut h = Sha256::new();
    for t in trials {
        h.update(message_bytes(&t.msg));
        for &e in &t.erased {
            h.update((e as u32).to_le_bytes());
        }
        h.update((t.failed as u32).to_le_bytes());
    }
    h.update((code.n() as u32).to_le_bytes());
    shard::hex(&h.finalize()[..16])
}

/// Seeded encode, decode and single-failure repair workload.
pub fn bench(rc: &ResolvedCode, trials: usize) -> Result<Report, CliError> {
    let code = &rc.code;
    let work = workload(code, trials, rc.config.seed)?;
    let digest = workload_digest(code, &work);

    let start = Instant::now();
    let encoded: Vec<Vec<Shard>> = work.iter().map(|t| code.encode(&t.msg)).collect::<lmbr_core::Result<_>>()?;
    let encode_time = start.elapsed().as_secs_f64();

    let start = Instant::now();
    for (t, shards) in work.iter().zip(&encoded) {
        let kept: Vec<Shard> = shards.iter().filter(|s| !t.erased.contains(&s.index)).cloned().collect();
        if code.decode(&kept)? != t.msg {
            return Err(CliError::Failed(format!("decode mismatch with erasures {:?}", t.erased)));
        }
    }
    let decode_time = start.elapsed().as_secs_f64();

    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    for (t, shards) in work.iter().zip(&encoded) {
        let rest: Vec<Shard> = shards.iter().filter(|s| s.index != t.failed).cloned().collect();
        let rep = code.repair(t.failed, &rest)?;
        *histogram.entry(rep.downloaded_symbols).or_default() += 1;
    }
    let symbols = (trials * code.k()) as f64;
    let rate = |secs: f64| if trials == 0 || secs <= 0.0 { 0.0 } else { symbols / secs };
    let histogram: serde_json::Map<String, Value> =
        histogram.into_iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
    Ok(Report::ok(json!({
        "trials": trials,
        "seed": rc.config.seed,
        "workload_digest": digest,
        "encode_sym_per_s": rate(encode_time),
        "decode_sym_per_s": rate(decode_time),
        "repair_bandwidth_histogram": histogram,
    })))
}

pub fn default_shard_dir(rc: &ResolvedCode, given: Option<PathBuf>) -> PathBuf {
    given.unwrap_or_else(|| rc.config.out_dir.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Construction, SimConfig};

    fn desk() -> ResolvedCode {
        SimConfig::default().resolve().unwrap()
    }

    #[test]
    fn summary_values() {
        let s = summary(&desk()).unwrap();
        assert_eq!((s["n"].as_u64(), s["dmin_opt"].as_u64(), s["max_file_size"].as_u64()), (Some(6), Some(3), Some(5)));
        let c2 = SimConfig {
            construction: Construction::InfoLocal,
            ..SimConfig::default()
        }
        .resolve()
        .unwrap();
        let s = summary(&c2).unwrap();
        assert_eq!((s["n"].as_u64(), s["dmin_opt"].as_u64()), (Some(7), Some(4)));
    }

    #[test]
    fn message_parsing() {
        let rc = desk();
        let raw = vec![0u8; 5 * 6 * 2];
        assert!(parse_message(&rc.code, &raw).unwrap().iter().all(FieldElement::is_zero));
        let hex = "0100".repeat(30) + "\n";
        assert_eq!(parse_message(&rc.code, hex.as_bytes()).unwrap().len(), 5);
        assert!(matches!(parse_message(&rc.code, &raw[1..]), Err(CliError::Refused(_))));
        // coefficient 3 is out of range for q = 3
        let mut bad = raw.clone();
        bad[0] = 3;
        assert!(parse_message(&rc.code, &bad).is_err());
    }

    #[test]
    fn message_bytes_round_trip() {
        let rc = desk();
        let bytes: Vec<u8> = (0..60).map(|i| if i % 2 == 0 { (i / 2 % 3) as u8 } else { 0 }).collect();
        let msg = parse_message(&rc.code, &bytes).unwrap();
        assert_eq!(message_bytes(&msg), bytes);
    }

    #[test]
    fn verify_modes_pass_on_desk_code() {
        let rc = desk();
        for mode in [VerifyMode::Dmin, VerifyMode::Ura, VerifyMode::RepairAll, VerifyMode::BoundsCrosscheck] {
            let r = verify(&rc, mode, None).unwrap();
            assert!(r.pass, "{mode:?}: {}", r.json);
        }
        let r = verify(&rc, VerifyMode::Dmin, None).unwrap();
        assert_eq!((r.json["claimed"].as_u64(), r.json["measured"].as_u64()), (Some(3), Some(3)));
    }

    #[test]
    fn wrong_profile_yields_witness() {
        let r = verify(&desk(), VerifyMode::Ura, Some(vec![2, 2, 0])).unwrap();
        assert!(!r.pass);
        assert_eq!(r.json["witness"]["scope"], "local");
        assert_eq!(r.json["witness"]["subset"], json!([0, 1]));
        assert_eq!(r.json["measured"]["profile"], json!([2, 1, 0]));
    }

    #[test]
    fn ura_refused_over_cap() {
        let mut cfg = SimConfig::default();
        cfg.pattern_cap = 10;
        let err = verify(&cfg.resolve().unwrap(), VerifyMode::Ura, None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn bench_workload_is_seeded() {
        let rc = desk();
        let a = bench(&rc, 5).unwrap().json;
        let b = bench(&rc, 5).unwrap().json;
        assert_eq!(a["workload_digest"], b["workload_digest"]);
        assert_eq!(a["repair_bandwidth_histogram"], json!({"2": 5}));
        let empty = bench(&rc, 0).unwrap().json;
        assert_eq!(empty["repair_bandwidth_histogram"], json!({}));
    }
}
