//! File-system registry shared by the CLI and the service.
//!
//! ```text
//! <root>/datasets/<dataset id>/data.csv     original bytes
//! <root>/datasets/<dataset id>/meta.json    ingest options and column metadata
//! <root>/datasets/<dataset id>/bundle.bin   sketch bundle, once built
//! <root>/sessions/<session id>.json
//! ```
//!
//! Dataset ids are content fingerprints, so re-ingesting the same file is a
//! no-op. Files are replaced atomically via rename.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use guidepost_core::{ColumnMeta, Dataset, DatasetId, SessionState, SketchBundle};
use serde::{Deserialize, Serialize};

use crate::codec::{decode_bundle, encode_bundle};
use crate::ingest::{ingest_csv, IngestOptions};
use crate::render::to_json;
use crate::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetMeta {
    pub id: DatasetId,
    pub n: usize,
    pub d: usize,
    pub options: IngestOptions,
    pub columns: Vec<ColumnMeta>,
}

impl DatasetMeta {
    pub fn of(dataset: &Dataset, options: IngestOptions) -> Self {
        Self { id: dataset.id().clone(), n: dataset.n(), d: dataset.d(), options, columns: dataset.metas() }
    }
}

#[derive(Debug, Clone)]
pub struct Registry {
    root: PathBuf,
}

fn is_hex_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.bytes().all(|b| b.is_ascii_hexdigit())
}

impl Registry {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, Error> {
        let root = root.into();
        fs::create_dir_all(root.join("datasets"))?;
        fs::create_dir_all(root.join("sessions"))?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn dataset_dir(&self, id: &str) -> Result<PathBuf, Error> {
        if !is_hex_id(id) {
            return Err(Error::UnknownDataset(id.to_owned()));
        }
        Ok(self.root.join("datasets").join(id))
    }

    pub fn bundle_path(&self, id: &str) -> Result<PathBuf, Error> {
        Ok(self.dataset_dir(id)?.join("bundle.bin"))
    }

    fn session_path(&self, id: &str) -> Result<PathBuf, Error> {
        if !is_hex_id(id) {
            return Err(Error::UnknownSession(id.to_owned()));
        }
        Ok(self.root.join("sessions").join(format!("{id}.json")))
    }

    /// Parses `bytes` and stores them under the dataset's fingerprint.
    pub fn ingest(&self, bytes: &[u8], options: IngestOptions) -> Result<(Dataset, DatasetMeta), Error> {
        let dataset = ingest_csv(bytes, &options)?;
        let meta = DatasetMeta::of(&dataset, options);
        let dir = self.dataset_dir(dataset.id().as_str())?;
        fs::create_dir_all(&dir)?;
        write_atomic(&dir.join("data.csv"), bytes)?;
        write_atomic(&dir.join("meta.json"), to_json(&meta).as_bytes())?;
        Ok((dataset, meta))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.dataset_dir(id).map(|d| d.join("meta.json").is_file()).unwrap_or(false)
    }

    pub fn meta(&self, id: &str) -> Result<DatasetMeta, Error> {
        let path = self.dataset_dir(id)?.join("meta.json");
        let text = read_or(&path, || Error::UnknownDataset(id.to_owned()))?;
        Ok(serde_json::from_slice(&text)?)
    }

    pub fn load_dataset(&self, id: &str) -> Result<Dataset, Error> {
        let meta = self.meta(id)?;
        let bytes = fs::read(self.dataset_dir(id)?.join("data.csv"))?;
        let dataset = ingest_csv(bytes.as_slice(), &meta.options)?;
        if dataset.id() != &meta.id {
            return Err(Error::Corrupt(format!("dataset {id} no longer matches its fingerprint")));
        }
        Ok(dataset)
    }

    pub fn list(&self) -> Result<Vec<DatasetId>, Error> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(self.root.join("datasets"))? {
            let name = entry?.file_name().to_string_lossy().into_owned();
            if self.contains(&name) {
                ids.push(DatasetId::new(name));
            }
        }
        ids.sort();
        Ok(ids)
    }

    /// Writes the bundle and returns its encoded size.
    pub fn save_bundle(&self, bundle: &SketchBundle) -> Result<usize, Error> {
        let id = bundle.fingerprint().as_str();
        if !self.contains(id) {
            return Err(Error::UnknownDataset(id.to_owned()));
        }
        let bytes = encode_bundle(bundle);
        write_atomic(&self.bundle_path(id)?, &bytes)?;
        Ok(bytes.len())
    }

    pub fn load_bundle(&self, id: &str) -> Result<Option<SketchBundle>, Error> {
        match fs::read(self.bundle_path(id)?) {
            Ok(bytes) => Ok(Some(decode_bundle(&bytes)?)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    pub fn save_session(&self, id: &str, session: &SessionState) -> Result<(), Error> {
        write_atomic(&self.session_path(id)?, to_json(session).as_bytes())
    }

    pub fn load_session(&self, id: &str) -> Result<SessionState, Error> {
        let text = read_or(&self.session_path(id)?, || Error::UnknownSession(id.to_owned()))?;
        serde_json::from_slice(&text).map_err(|e| Error::CorruptSession(e.to_string()))
    }
}

fn read_or(path: &Path, missing: impl FnOnce() -> Error) -> Result<Vec<u8>, Error> {
    match fs::read(path) {
        Ok(b) => Ok(b),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Err(missing()),
        Err(e) => Err(e.into()),
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    let tmp = path.with_extension(format!("tmp-{}", uuid::Uuid::new_v4().simple()));
    let mut f = fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    fs::rename(&tmp, path)?;
    Ok(())
}
