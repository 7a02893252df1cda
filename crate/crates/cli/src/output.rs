use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

/// The resolved configuration of a run and its SHA-256.
pub struct Resolved {
    pub json: String,
    pub hash: String,
}

impl Resolved {
    pub fn new(command: &str, config: &impl Serialize) -> Self {
        let mut v = serde_json::to_value(config).expect("config serializes");
        if let Value::Object(m) = &mut v {
            m.insert("command".into(), Value::from(command));
            m.insert("version".into(), Value::from(env!("CARGO_PKG_VERSION")));
        }
        let json = v.to_string();
        let hash = hex::encode(Sha256::digest(json.as_bytes()));
        Resolved { json, hash }
    }

    /// Comment lines that open every CSV file.
    pub fn header(&self) -> String {
        format!("# fel {}\n# config-sha256: {}\n# config: {}\n", env!("CARGO_PKG_VERSION"), self.hash, self.json)
    }

    pub fn value(&self) -> Value {
        serde_json::from_str(&self.json).expect("valid json")
    }
}

pub fn write_file(path: &Path, body: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, body).map_err(|e| CliError::io(path, e))
}

pub fn stdout(body: &[u8]) -> Result<(), CliError> {
    std::io::stdout().write_all(body).map_err(|e| CliError::io(Path::new("<stdout>"), e))
}
