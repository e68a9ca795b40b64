use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Child, Command, Output, Stdio};

use serde_json::{json, Value};

fn fogtrace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fogtrace"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_writes_series_curves_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let real = dir.path().join("pinal.csv");
    std::fs::write(&real, "date,new_cases\n2020-03-20,10\n2020-03-21,14\n").unwrap();
    let res = fogtrace(&[
        "simulate",
        "--case",
        "1",
        "--days",
        "6",
        "--real",
        path(&real),
        "--out",
        path(&out),
    ]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));

    let curves = std::fs::read_to_string(out.join("curves.csv")).unwrap();
    let mut lines = curves.lines();
    assert_eq!(
        lines.next(),
        Some("day,meetups_1225,meetups_1250,real_pinal")
    );
    assert_eq!(lines.count(), 6);
    let series = std::fs::read_to_string(out.join("series_meetups_1250.csv")).unwrap();
    assert!(series.starts_with("day,new_infections,cumulative\n1,"));

    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["case"], 1);
    let runs = manifest["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 2);
    let cfg = &runs[0]["config"];
    assert_eq!(cfg["theta"], 0.9);
    assert_eq!(cfg["tau0_minutes"], 2.0);
    assert_eq!(cfg["nu0_dbm"], -0.55);
    assert_eq!(cfg["meetups_per_day"], 1225);
    assert_eq!(cfg["rng_seed"], 42);
    assert_eq!(cfg["days"], 6);

    // the manifest config reproduces the run on its own
    let cfg_file = dir.path().join("replay.json");
    std::fs::write(&cfg_file, cfg.to_string()).unwrap();
    let again = dir.path().join("again");
    let res = fogtrace(&[
        "simulate",
        "--config",
        path(&cfg_file),
        "--out",
        path(&again),
    ]);
    assert_eq!(code(&res), 0);
    assert_eq!(
        std::fs::read(again.join("series_meetups_1225.csv")).unwrap(),
        std::fs::read(out.join("series_meetups_1225.csv")).unwrap()
    );
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let res = fogtrace(&["simulate", "--case", "3", "--seed", "7", "--out", path(out)]);
        assert_eq!(code(&res), 0);
    }
    for file in [
        "series_meetups_1225.csv",
        "series_meetups_1250.csv",
        "curves.csv",
    ] {
        assert_eq!(
            std::fs::read(a.join(file)).unwrap(),
            std::fs::read(b.join(file)).unwrap()
        );
    }
}

#[test]
fn overrides_and_alerted_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let res = fogtrace(&[
        "simulate",
        "--case",
        "2",
        "--meetups",
        "900",
        "--compliance",
        "1",
        "--theta",
        "0.8",
        "--tau0-min",
        "1.5",
        "--nu0-dbm",
        "-0.5",
        "--days",
        "4",
        "--out",
        path(&out),
    ]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let runs = manifest["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 1);
    let cfg = &runs[0]["config"];
    assert_eq!(cfg["meetups_per_day"], 900);
    assert_eq!(cfg["theta"], 0.8);
    assert_eq!(cfg["tau0_minutes"], 1.5);
    assert_eq!(cfg["nu0_dbm"], -0.5);
    assert_eq!(cfg["alert_compliance"], 1.0);
    assert!(out.join("series_meetups_900_alerted.csv").exists());
    let header = std::fs::read_to_string(out.join("curves.csv")).unwrap();
    assert!(header.starts_with("day,meetups_900,meetups_900_alerted\n"));
}

#[test]
fn zero_days_is_an_empty_series() {
    let dir = tempfile::tempdir().unwrap();
    let res = fogtrace(&["simulate", "--days", "0", "--out", path(dir.path())]);
    assert_eq!(code(&res), 0);
    assert_eq!(
        std::fs::read_to_string(dir.path().join("series_meetups_1225.csv")).unwrap(),
        "day,new_infections,cumulative\n"
    );
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&fogtrace(&[])), 1);
    assert_eq!(code(&fogtrace(&["simulate", "--case", "9"])), 1);
    assert_eq!(
        code(&fogtrace(&[
            "simulate", "--case", "1", "--config", "x.json"
        ])),
        1
    );
    assert_eq!(code(&fogtrace(&["simulate", "--bogus"])), 1);
    assert_eq!(code(&fogtrace(&["--help"])), 0);
    assert_eq!(code(&fogtrace(&["--version"])), 0);

    let out = dir.path().join("o");
    assert_eq!(
        code(&fogtrace(&[
            "simulate",
            "--theta",
            "1.5",
            "--out",
            path(&out)
        ])),
        2
    );
    assert!(!out.exists(), "rejected before any work");
    assert_eq!(
        code(&fogtrace(&["simulate", "--config", "/nonexistent.json"])),
        2
    );
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"theta": 0.9, "surprise": 1}"#).unwrap();
    assert_eq!(code(&fogtrace(&["simulate", "--config", path(&bad)])), 2);

    // output directory cannot be created beneath a regular file
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let nested = blocker.join("out");
    assert_eq!(
        code(&fogtrace(&[
            "simulate",
            "--days",
            "1",
            "--out",
            path(&nested)
        ])),
        3
    );
}

#[test]
fn compare_prints_metrics_and_merges_curves() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim.csv");
    let real = dir.path().join("real.csv");
    let merged = dir.path().join("merged.csv");
    std::fs::write(&sim, "day,new_infections,cumulative\n1,10,10\n2,12,22\n").unwrap();
    std::fs::write(&real, "date,new_cases\n2020-03-20,10\n2020-03-21,14\n").unwrap();
    let res = fogtrace(&[
        "compare",
        "--sim",
        path(&sim),
        "--real",
        path(&real),
        "--out",
        path(&merged),
    ]);
    assert_eq!(code(&res), 0);
    let printed: Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(printed["metrics"]["mean_absolute_error"], 1.0);
    assert_eq!(printed["metrics"]["root_mean_square_error"], 2f64.sqrt());
    assert_eq!(printed["metrics"]["total_count_delta"], -2);
    assert_eq!(
        std::fs::read_to_string(&merged).unwrap(),
        "day,simulated,real_real\n1,10,10\n2,12,14\n"
    );

    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "day,new_infections,cumulative\n").unwrap();
    assert_eq!(
        code(&fogtrace(&[
            "compare",
            "--sim",
            path(&empty),
            "--real",
            path(&real)
        ])),
        2
    );
    let garbled = dir.path().join("garbled.csv");
    std::fs::write(&garbled, "date,new_cases\n2020-03-20,ten\n").unwrap();
    assert_eq!(
        code(&fogtrace(&[
            "compare",
            "--sim",
            path(&sim),
            "--real",
            path(&garbled)
        ])),
        2
    );
}

struct Server {
    child: Child,
    base: String,
}

impl Server {
    fn start(config: &Path) -> Server {
        let mut child = Command::new(env!("CARGO_BIN_EXE_fogtrace"))
            .args(["serve", "--config", path(config), "--port", "0"])
            .env("RUST_LOG", "warn")
            .stdout(Stdio::piped())
            .spawn()
            .unwrap();
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap())
            .read_line(&mut line)
            .unwrap();
        let base = line
            .trim()
            .strip_prefix("listening on ")
            .unwrap()
            .to_string();
        Server { child, base }
    }

    fn post(&self, route: &str, body: Value) -> Value {
        reqwest::blocking::Client::new()
            .post(format!("{}{route}", self.base))
            .json(&body)
            .send()
            .unwrap()
            .json()
            .unwrap()
    }

    fn terminate(mut self) -> i32 {
        let pid = self.child.id().to_string();
        let status = Command::new("kill").args(["-TERM", &pid]).status().unwrap();
        assert!(status.success());
        self.child.wait().unwrap().code().unwrap()
    }
}

fn service_config(dir: &Path, port: u16) -> std::path::PathBuf {
    let cfg = dir.join("service.json");
    let body = json!({
        "port": port,
        "cycle_interval_s": 0,
        "snapshot_path": dir.join("store.snapshot"),
        "sink": {"kind": "file", "path": dir.join("cloud.ndjson")},
    });
    std::fs::write(&cfg, body.to_string()).unwrap();
    cfg
}

#[test]
fn serve_snapshots_on_sigterm_and_inspect_reads_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = service_config(dir.path(), 0);
    let server = Server::start(&cfg);
    server.post("/users", json!({"user_id": "amy", "contact_number": "1"}));
    server.post("/users", json!({"user_id": "ben", "contact_number": "2"}));
    server.post("/symptoms", json!({"user_id": "amy", "flag": 1}));
    server.post("/cycles", json!(null));
    assert_eq!(server.terminate(), 0);

    let snapshot = dir.path().join("store.snapshot");
    assert!(snapshot.exists());
    let res = fogtrace(&["inspect", "--snapshot", path(&snapshot), "--user", "amy"]);
    assert_eq!(code(&res), 0);
    let report: Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(report["total_probability"], 0.9);
    assert_eq!(report["level"], "very_high");
    let res = fogtrace(&["inspect", "--snapshot", path(&snapshot), "--user", "ben"]);
    let report: Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(report["level"], "low");

    assert_eq!(
        code(&fogtrace(&[
            "inspect",
            "--snapshot",
            path(&snapshot),
            "--user",
            "zed"
        ])),
        2
    );
    std::fs::write(&snapshot, b"{\"format\":\"nope\"}").unwrap();
    assert_eq!(
        code(&fogtrace(&[
            "inspect",
            "--snapshot",
            path(&snapshot),
            "--user",
            "amy"
        ])),
        2
    );
}

#[test]
fn serve_refuses_bad_config_and_busy_port() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"theta": 3.0}"#).unwrap();
    assert_eq!(code(&fogtrace(&["serve", "--config", path(&bad)])), 2);

    let holder = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = holder.local_addr().unwrap().port();
    let cfg = service_config(dir.path(), port);
    let res = fogtrace(&["serve", "--config", path(&cfg)]);
    assert_eq!(code(&res), 3);
    assert!(String::from_utf8_lossy(&res.stderr).contains("cannot bind"));
}
