use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use cavity_core::Error;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub const TOOL: &str = "cavity";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const INFEASIBLE: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const SIZE_CAP: u8 = 3;
    pub const INVARIANT: u8 = 4;
    pub const IO: u8 = 5;
    pub const INPUT: u8 = 6;
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io { path: PathBuf, source: std::io::Error },
    Core(Error),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Io { .. } => exit::IO,
            CliError::Core(Error::SizeCap(_)) => exit::SIZE_CAP,
            CliError::Core(Error::Invariant(_)) => exit::INVARIANT,
            CliError::Core(_) => exit::INPUT,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn parse_json(text: &str) -> CliResult<Value> {
    serde_json::from_str(text).map_err(|e| {
        CliError::Core(Error::Format {
            location: format!("line {}", e.line()),
            message: e.to_string(),
        })
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Flags of one invocation, echoed into every artifact it writes.
#[derive(Debug, Default)]
pub struct Config {
    entries: Map<String, Value>,
}

impl Config {
    pub fn new(command: &str) -> Self {
        let mut c = Config::default();
        c.set("command", json!(command));
        c
    }

    pub fn set(&mut self, key: &str, v: Value) -> &mut Self {
        self.entries.insert(key.into(), v);
        self
    }

    pub fn input(&mut self, path: &Path, text: &str) -> &mut Self {
        self.set("input", json!(path.display().to_string()));
        self.set("input_sha256", json!(sha256_hex(text.as_bytes())))
    }

    pub fn to_value(&self) -> Value {
        Value::Object(self.entries.clone())
    }

    pub fn hash(&self) -> String {
        sha256_hex(self.to_value().to_string().as_bytes())
    }
}

/// Wraps a payload with tool, version, config and config hash. Payload keys
/// win over nothing: the envelope keys are reserved.
pub fn envelope(kind: &str, config: &Config, payload: Value) -> Value {
    let mut obj = match payload {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("result".into(), other);
            m
        }
    };
    obj.insert("artifact".into(), json!(kind));
    obj.insert("tool".into(), json!(TOOL));
    obj.insert("version".into(), json!(VERSION));
    obj.insert("config".into(), config.to_value());
    obj.insert("config_hash".into(), json!(config.hash()));
    Value::Object(obj)
}

pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
