//! Output directory handling. Files are written whole, so a rerun with the same
//! config replaces each artifact with identical bytes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::config::Provenance;
use crate::error::CliError;

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", root.display())))?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Buffered writer for `name`, flushed by `f` returning.
    pub fn write<T, E>(&self, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> Result<T, E>) -> Result<T, CliError>
    where
        CliError: From<E>,
    {
        let path = self.path(name);
        let file = File::create(&path).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        let out = f(&mut w)?;
        w.flush()?;
        Ok(out)
    }

    /// Pretty JSON with a leading `provenance` field.
    pub fn write_json<B: Serialize>(&self, name: &str, provenance: &Provenance, body: &B) -> Result<(), CliError> {
        let mut doc = serde_json::Map::new();
        doc.insert("provenance".into(), serde_json::to_value(provenance)?);
        match serde_json::to_value(body)? {
            Value::Object(m) => doc.extend(m),
            other => {
                doc.insert("data".into(), other);
            }
        }
        self.write(name, |w| -> Result<(), CliError> {
            serde_json::to_writer_pretty(&mut *w, &doc)?;
            writeln!(w)?;
            Ok(())
        })
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
