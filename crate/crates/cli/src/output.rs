use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use serde_json::{json, Value};

/// Failure modes, each tied to a process exit code.
#[derive(Debug)]
pub enum Failure {
    /// A semantic negative, such as a forbidden configuration.
    Negative(String),
    /// A tolerance or invariant check did not hold.
    Tolerance(String),
    /// Malformed input, bad parameters or I/O trouble.
    Input(String),
}

impl Failure {
    pub fn input(e: impl Display) -> Self {
        Failure::Input(e.to_string())
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Failure::Negative(_) => 1,
            Failure::Tolerance(_) => 2,
            Failure::Input(_) => 3,
        })
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Negative(m) | Failure::Tolerance(m) | Failure::Input(m) => m,
        }
    }
}

pub type CmdResult = Result<(), Failure>;

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> CmdResult {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(Failure::input)?;
    tmp.write_all(contents.as_bytes()).map_err(Failure::input)?;
    tmp.persist(path).map_err(|e| Failure::input(e.error))?;
    Ok(())
}

pub fn read_input(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// `foo.csv` -> `foo.csv.<suffix>`
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes the provenance manifest next to `out`.
pub fn write_manifest(out: &Path, command: &str, params: Value, seed: Option<u64>, results: Value) -> CmdResult {
    let manifest = json!({
        "command": command,
        "params": params,
        "versions": {
            "hsm": env!("CARGO_PKG_VERSION"),
        },
        "seed": seed,
        "results": results,
    });
    let text = serde_json::to_string_pretty(&manifest).map_err(Failure::input)? + "\n";
    write_atomic(&sibling(out, "manifest.json"), &text)
}
