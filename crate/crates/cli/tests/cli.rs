use std::path::Path;
use std::process::{Command, Output};

use capforge::lift::{check_distance_ge4, Cap, ParityCheckMatrix};
use capforge::ArcSet;
use serde_json::Value;
use tempfile::TempDir;

fn capforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_capforge")).args(args).output().expect("spawn capforge")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

fn read(p: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(Path::new(p)).unwrap()).unwrap()
}

#[test]
fn construct_sizes_and_errors() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "arc.json");
    let run = capforge(&["construct", "--q", "31", "--m", "5", "--M", "2,3", "--out", &out]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let arc: ArcSet = serde_json::from_value(read(&out)).unwrap();
    assert_eq!(arc.len(), 12);
    assert!(arc.check_arc().holds());

    let bad = capforge(&["construct", "--q", "31", "--m", "6", "--M", "1"]);
    assert_eq!(code(&bad), 2);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("coprime to 3"));

    // 3-dependent residues are refused
    assert_eq!(code(&capforge(&["construct", "--q", "31", "--m", "5", "--M", "1,3"])), 2);
    assert_eq!(code(&capforge(&["construct", "--q", "31", "--m", "5", "--M", "2,3", "--gate"])), 2);
}

#[test]
fn construct_auto_records_members() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "arc.json");
    assert_eq!(code(&capforge(&["construct", "--q", "71", "--m", "35", "--out", &out])), 0);
    let v = read(&out);
    let members = v["M"].as_array().unwrap().len();
    assert!(members <= 12);
    assert_eq!(v["points"].as_array().unwrap().len(), 2 * members);
}

#[test]
fn theorem_scale_construct() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "big.json");
    assert_eq!(code(&capforge(&["construct", "--q", "93811", "--m", "5", "--M", "2,3", "--gate", "--out", &out])), 0);
    assert_eq!(read(&out)["points"].as_array().unwrap().len(), 37524);
    // the full engine refuses this plane
    assert_eq!(code(&capforge(&["verify", &out])), 3);
    let sampled = capforge(&["verify", &out, "--mode", "sampled", "--sample", "200", "--seed", "9"]);
    assert_eq!(code(&sampled), 0);
}

#[test]
fn verify_exit_codes_and_determinism() {
    let dir = TempDir::new().unwrap();
    let arc = path(&dir, "coset.json");
    assert_eq!(code(&capforge(&["construct", "--q", "31", "--m", "5", "--M", "2", "--out", &arc])), 0);
    let full = capforge(&["verify", &arc]);
    assert_eq!(code(&full), 1);
    let report: Value = serde_json::from_slice(&full.stdout).unwrap();
    assert_eq!(report["verdict"], false);
    assert_eq!(report["mode"], "full");

    let (r1, r2) = (path(&dir, "r1.json"), path(&dir, "r2.json"));
    for r in [&r1, &r2] {
        capforge(&["verify", &arc, "--mode", "sampled", "--sample", "500", "--seed", "42", "--out", r]);
    }
    assert_eq!(std::fs::read(&r1).unwrap(), std::fs::read(&r2).unwrap());
    assert_eq!(read(&r1)["seed"], 42);

    let junk = path(&dir, "junk.json");
    std::fs::write(&junk, "{\"q\": 6}").unwrap();
    assert_eq!(code(&capforge(&["verify", &junk])), 2);
    assert_eq!(code(&capforge(&["verify", &path(&dir, "missing.json")])), 2);
}

#[test]
fn bicovering_union_lifts_to_complete_cap() {
    let dir = TempDir::new().unwrap();
    let (arc, cap) = (path(&dir, "arc.json"), path(&dir, "cap.json"));
    assert_eq!(code(&capforge(&["construct", "--q", "241", "--m", "5", "--M", "1,4", "--out", &arc])), 0);
    assert_eq!(code(&capforge(&["verify", &arc])), 0);
    assert_eq!(code(&capforge(&["lift", &arc, "--N", "4", "--out", &cap])), 0);
    let v = read(&cap);
    assert_eq!(v["N"], 4);
    assert_eq!(v["qprime"], 241);
    // AG(4,241) is beyond the brute-force bitmap
    assert_eq!(code(&capforge(&["verify", &cap])), 3);
    assert_eq!(code(&capforge(&["verify", &cap, "--slice"])), 0);
}

#[test]
fn small_plane_pipeline() {
    let dir = TempDir::new().unwrap();
    let (report, best, cap) = (path(&dir, "search.json"), path(&dir, "best.json"), path(&dir, "cap.json"));
    assert_eq!(code(&capforge(&["search-arc", "--q", "7", "--out", &report])), 1);
    let r = read(&report);
    assert_eq!(r["exhausted"], true);
    assert!(r["found"].is_null());
    std::fs::write(&best, r["best"].to_string()).unwrap();
    assert_eq!(code(&capforge(&["lift", &best, "--N", "4", "--out", &cap])), 0);
    let brute = capforge(&["verify", &cap]);
    let slice = capforge(&["verify", &cap, "--slice"]);
    assert_eq!(code(&brute), 1);
    assert_eq!(code(&slice), 1);
    let (b, s): (Value, Value) = (serde_json::from_slice(&brute.stdout).unwrap(), serde_json::from_slice(&slice.stdout).unwrap());
    assert_eq!(b["counts"]["uncovered"].as_u64().unwrap(), 7 * s["counts"]["uncovered"].as_u64().unwrap());

    assert_eq!(code(&capforge(&["lift", &best, "--N", "6"])), 2);
    assert_eq!(code(&capforge(&["search-arc", "--q", "23"])), 3);
}

#[test]
fn export_round_trip() {
    let dir = TempDir::new().unwrap();
    let (arc, cap, h, csv) = (path(&dir, "arc.json"), path(&dir, "cap.json"), path(&dir, "h.json"), path(&dir, "h.csv"));
    capforge(&["construct", "--q", "13", "--m", "4", "--M", "1", "--out", &arc]);
    assert_eq!(code(&capforge(&["lift", &arc, "--N", "4", "--out", &cap])), 0);
    assert_eq!(code(&capforge(&["export", &cap, "--out", &h])), 0);
    assert_eq!(code(&capforge(&["export", &cap, "--format", "csv", "--out", &csv])), 0);
    let cap: Cap = serde_json::from_value(read(&cap)).unwrap();
    let m: ParityCheckMatrix = serde_json::from_value(read(&h)).unwrap();
    assert_eq!(m.decode().unwrap(), cap.points().to_vec());
    let k = cap.len() as i64;
    assert_eq!(m.metadata.parameters, [k, k - 5, 4]);
    assert!(check_distance_ge4(&m).holds);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().all(|l| l.split(',').count() == cap.len()));
}

#[test]
fn scan_rows() {
    let run = capforge(&["scan", "--q", "93811,31,71", "--N", "4", "--format", "csv"]);
    assert_eq!(code(&run), 0);
    let text = String::from_utf8(run.stdout).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let find = |q: &str, m: &str, m1: &str| rows.iter().find(|r| r[0] == q && r[3] == m && r[4] == m1).unwrap().clone();
    let r = find("93811", "5", "1");
    assert_eq!((r[6], r[7], r[11]), ("true", "true", "37524"));
    let r = find("71", "35", "5");
    assert_eq!((r[5], r[6], r[7]), ("7", "false", "false"));
    assert!(rows.iter().filter(|r| r[0] == "31").all(|r| r[6] == "false" && r[7] == "false"));

    let json = capforge(&["scan", "--from", "29", "--to", "32"]);
    let v: Value = serde_json::from_slice(&json.stdout).unwrap();
    assert!(v.as_array().unwrap().iter().all(|r| r["q"] == 29 || r["q"] == 31));
    assert_eq!(code(&capforge(&["scan"])), 2);
}

/// `f(x, y)` over a prime field by direct double loop.
fn oracle_count(p: i64, m: u32, a: i64, b: i64, t: i64) -> u64 {
    let md = |v: i64| v.rem_euclid(p);
    let pw = |v: i64| (0..m).fold(1i64, |acc, _| md(acc * v));
    let mut n = 0;
    for x in 0..p {
        for y in 0..p {
            let (u, z) = (md(t * pw(x)), md(t * pw(y)));
            let uz = md(u * z);
            let f = md(a * md(md(u * uz) + md(uz * z) - 3 * uz + 1) - md(b * uz) - md(uz * uz) + 3 * uz - u - z);
            n += (f == 0) as u64;
        }
    }
    n
}

#[test]
fn count_reports() {
    for (a, b, t) in [(3, 4, 2), (0, 7, 3), (10, 1, 17)] {
        let run = capforge(&["count", "--q", "31", "--m", "5", "--a", &a.to_string(), "--b", &b.to_string(), "--t", &t.to_string()]);
        let v: Value = serde_json::from_slice(&run.stdout).unwrap();
        assert_eq!(v["count"].as_u64().unwrap(), oracle_count(31, 5, a, b, t), "({a},{b},{t})");
    }
    let run = capforge(&["count", "--q", "10007", "--a", "5", "--b", "9", "--t", "11", "--target", "quartic"]);
    assert_eq!(code(&run), 0);
    let v: Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(v["in_window"], true);
    // t = 1 is a fifth power
    assert_eq!(code(&capforge(&["count", "--q", "31", "--m", "5", "--a", "3", "--b", "4", "--t", "1"])), 2);
    // (2, 1/2) lies on the cubic
    assert_eq!(code(&capforge(&["count", "--q", "31", "--a", "2", "--b", "16", "--t", "1", "--target", "quartic"])), 2);
}

#[test]
fn search_indep_outputs() {
    let run = capforge(&["search-indep", "--m", "5"]);
    assert_eq!(code(&run), 0);
    let v: Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(v["members"].as_array().unwrap().len(), 2);
    assert_eq!(code(&capforge(&["search-indep", "--m", "7"])), 1);
    let run = capforge(&["search-indep", "--m", "35", "--split", "5,7"]);
    let v: Value = serde_json::from_slice(&run.stdout).unwrap();
    assert!(v["members"].as_array().unwrap().len() <= 12);
    assert_eq!(code(&capforge(&["search-indep", "--m", "35", "--split", "5,6"])), 2);
    let r1 = capforge(&["search-indep", "--m", "13", "--strategy", "randomized", "--seed", "4"]);
    let r2 = capforge(&["search-indep", "--m", "13", "--strategy", "randomized", "--seed", "4"]);
    assert_eq!(r1.stdout, r2.stdout);
}

#[test]
fn usage_and_thread_errors() {
    assert_eq!(code(&capforge(&["frobnicate"])), 2);
    assert_eq!(code(&capforge(&["construct", "--m", "5"])), 2);
    let zero = Command::new(env!("CARGO_BIN_EXE_capforge")).env("CAPFORGE_THREADS", "0").args(["scan", "--q", "31"]).output().unwrap();
    assert_eq!(code(&zero), 2);
    let two = Command::new(env!("CARGO_BIN_EXE_capforge")).env("CAPFORGE_THREADS", "2").args(["scan", "--q", "31"]).output().unwrap();
    assert_eq!(code(&two), 0);
}
