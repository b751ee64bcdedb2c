//! Run configuration: an optional JSON config document merged with command
//! line flags, flags winning. The effective config is validated before any
//! work starts and echoed into the run directory.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::{CliError, CliResult};

/// Load the config document into the command's default settings struct.
pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("bad config {}: {e}", p.display())))
        }
    }
}

/// Overwrite a setting when the flag was given.
pub fn override_with<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

/// Write the effective config into the run directory.
pub fn echo<T: Serialize>(cfg: &T, out_dir: &Path) -> CliResult<()> {
    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", out_dir.display())))?;
    let path = out_dir.join("config.json");
    let text = serde_json::to_string_pretty(cfg)
        .map_err(|e| CliError::Config(format!("config serialization: {e}")))?;
    fs::write(&path, text)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}
