//! Running the `pidinst` binary and a throwaway registry process.

#![allow(dead_code)]

use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

pub fn pidinst() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pidinst"));
    for var in ["PIDINST_REGISTRY_URL", "PIDINST_VOCAB_DIR", "PIDINST_API_TOKEN", "PIDINST_COLOR", "PIDINST_CONFIG"] {
        cmd.env_remove(var);
    }
    cmd
}

pub fn run<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Output {
    pidinst().args(args).output().unwrap()
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

pub fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

/// A `pidinst serve` child on an ephemeral port; killed on drop.
pub struct Server {
    child: Child,
    pub url: String,
}

impl Server {
    pub fn start(config: &Path) -> Server {
        let mut child = pidinst()
            .args(["serve", "--config"])
            .arg(config)
            .env("RUST_LOG", "warn")
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .unwrap();
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
        assert!(line.starts_with("http://"), "serve printed {line:?}");
        Server { child, url: line.trim().to_string() }
    }

    pub fn stop(mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Writes a config for a store under `dir` and returns its path.
pub fn registry_config(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("registry.toml");
    let store = dir.join("store");
    std::fs::write(
        &path,
        format!(
            "prefix = \"21.T11998\"\nstore_path = {store:?}\nbind = \"127.0.0.1:0\"\n{extra}"
        ),
    )
    .unwrap();
    path
}
