#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn bank_path() -> PathBuf {
    repo_root().join("data/sample-bank.json")
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn procap(data_dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_procap"))
        .args(args)
        .env("BANK_PATH", bank_path())
        .env("DATA_DIR", data_dir)
        .env_remove("PORT")
        .env_remove("FACILITATOR_KEY")
        .output()
        .expect("run procap")
}

/// Runs and asserts success, returning stdout.
pub fn ok(data_dir: &Path, args: &[&str]) -> String {
    let out = procap(data_dir, args);
    assert!(
        out.status.success(),
        "procap {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// The documented golden pipeline; returns (structured, markdown) report bytes.
pub fn golden_pipeline(data_dir: &Path, out_dir: &Path) -> (Vec<u8>, Vec<u8>) {
    let profile = fixture("golden-profile.json");
    let batch = out_dir.join("batch.json");
    let json = out_dir.join("report.json");
    let md = out_dir.join("report.md");
    ok(data_dir, &[
        "assessment", "create", "--id", "golden", "--org", "Regional IT service provider",
        "--processes", "PRB,CHG", "--target", "5", "--at", "2024-05-06T08:00:00Z",
    ]);
    ok(data_dir, &["assessment", "open", "--assessment", "golden", "--at", "2024-05-06T09:00:00Z"]);
    ok(data_dir, &[
        "simulate", "--assessment", "golden", "--profile", profile.to_str().unwrap(), "--seed", "7",
        "--out", batch.to_str().unwrap(), "--apply", "--at", "2024-05-07T12:00:00Z",
    ]);
    ok(data_dir, &["assessment", "close", "--assessment", "golden", "--at", "2024-05-20T17:00:00Z"]);
    ok(data_dir, &["measure", "--assessment", "golden", "--output", "structured"]);
    ok(data_dir, &[
        "report", "generate", "--assessment", "golden", "--format", "structured",
        "--out", json.to_str().unwrap(), "--at", "2024-05-21T08:00:00Z",
    ]);
    ok(data_dir, &["report", "generate", "--assessment", "golden", "--format", "markdown", "--out", md.to_str().unwrap()]);
    (std::fs::read(json).unwrap(), std::fs::read(md).unwrap())
}

pub const FACILITATOR_KEY: &str = "acceptance-facilitator-key";

/// A `procap serve` child process; killed with SIGKILL on drop.
pub struct Server {
    pub child: std::process::Child,
    pub base: String,
}

impl Server {
    pub fn start(data_dir: &Path) -> Server {
        let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
        let child = Command::new(env!("CARGO_BIN_EXE_procap"))
            .args(["serve", "--port", &port.to_string()])
            .env("BANK_PATH", bank_path())
            .env("DATA_DIR", data_dir)
            .env("FACILITATOR_KEY", FACILITATOR_KEY)
            .env("RUST_LOG", "warn")
            .stdout(std::process::Stdio::null())
            .stderr(std::process::Stdio::null())
            .spawn()
            .expect("spawn server");
        let server = Server { child, base: format!("http://127.0.0.1:{port}") };
        let client = reqwest::blocking::Client::new();
        let deadline = std::time::Instant::now() + std::time::Duration::from_secs(30);
        loop {
            if let Ok(r) = client.get(format!("{}/healthz", server.base)).send() {
                if r.status().is_success() {
                    return server;
                }
            }
            assert!(std::time::Instant::now() < deadline, "server did not become healthy");
            std::thread::sleep(std::time::Duration::from_millis(50));
        }
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    pub fn kill(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        self.kill();
    }
}
