use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use serde_json::Value;

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
    pub elapsed: Duration,
}

impl Run {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", self.stdout))
    }
}

pub fn run(args: &[&str]) -> Run {
    run_with(args, None)
}

pub fn run_with(args: &[&str], cache: Option<&Path>) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_impurity-cft"));
    cmd.args(args).env_remove("IMPURITY_CFT_CACHE_DIR");
    if let Some(dir) = cache {
        cmd.env("IMPURITY_CFT_CACHE_DIR", dir);
    }
    let start = Instant::now();
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
        elapsed: start.elapsed(),
    }
}
