//! Checkpoint archive: a directory holding `manifest.json` (config plus the
//! named parameter list with shapes) and one "GZT1" blob per parameter.

use std::fs;
use std::path::Path;

use gaze_tensor::io as tio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::config::ModelConfig;
use crate::model::net::GazeModel;

#[derive(Serialize, Deserialize)]
struct ManifestParam {
    name: String,
    shape: Vec<usize>,
    file: String,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    config: ModelConfig,
    params: Vec<ManifestParam>,
}

pub fn save_checkpoint(model: &GazeModel, dir: &Path) -> Result<()> {
    let param_dir = dir.join("params");
    fs::create_dir_all(&param_dir).map_err(|e| Error::io(&param_dir, e))?;
    let mut entries = Vec::new();
    for (name, tensor) in model.params().iter() {
        let file = format!("params/{name}.gzt");
        tio::save_tensor(tensor, &dir.join(&file))?;
        entries.push(ManifestParam {
            name: name.to_string(),
            shape: tensor.shape().to_vec(),
            file,
        });
    }
    let manifest = Manifest {
        config: model.config().clone(),
        params: entries,
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(())
}

pub fn load_checkpoint(dir: &Path) -> Result<GazeModel> {
    let path = dir.join("manifest.json");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.clone(),
        source: e,
    })?;
    let mut model = GazeModel::new(manifest.config, 0)?;
    if manifest.params.len() != model.params().len() {
        return Err(Error::Config(format!(
            "checkpoint has {} parameters, model expects {}",
            manifest.params.len(),
            model.params().len()
        )));
    }
    for entry in &manifest.params {
        let id = model.params().id_of(&entry.name).ok_or_else(|| {
            Error::Config(format!("checkpoint parameter {} unknown to model", entry.name))
        })?;
        let tensor = tio::load_tensor(&dir.join(&entry.file))?;
        if tensor.shape() != entry.shape.as_slice()
            || tensor.shape() != model.params().tensor(id).shape()
        {
            return Err(Error::Config(format!(
                "checkpoint parameter {} has shape {:?}, expected {:?}",
                entry.name,
                tensor.shape(),
                model.params().tensor(id).shape()
            )));
        }
        *model.params_mut().tensor_mut(id) = tensor;
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoint_round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let model = GazeModel::new(ModelConfig::tiny(), 99).unwrap();
        save_checkpoint(&model, dir.path()).unwrap();
        let back = load_checkpoint(dir.path()).unwrap();
        assert_eq!(back.config(), model.config());
        for ((na, ta), (nb, tb)) in model.params().iter().zip(back.params().iter()) {
            assert_eq!(na, nb);
            assert_eq!(ta.shape(), tb.shape());
            for (a, b) in ta.data().iter().zip(tb.data()) {
                assert_eq!(a.to_bits(), b.to_bits(), "parameter {na} drifted");
            }
        }
    }

    #[test]
    fn missing_manifest_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(load_checkpoint(dir.path()).is_err());
    }
}
