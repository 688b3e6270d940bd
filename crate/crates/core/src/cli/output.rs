//! Artifacts are assembled in memory and written only once a run has
//! succeeded, so a failed run leaves nothing behind.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

/// Numbers in CSV output: round-trip exact, `NaN`/`inf` spelled out.
pub(super) fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub(super) struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Result<Self> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer
            .write_record(header.iter().map(|s| s.as_ref()))
            .map_err(|e| Error::Io(e.to_string()))?;
        Ok(Self { writer })
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) -> Result<()> {
        self.writer
            .write_record(fields.iter().map(|s| s.as_ref()))
            .map_err(|e| Error::Io(e.to_string()))
    }

    fn into_bytes(self) -> Result<Vec<u8>> {
        self.writer
            .into_inner()
            .map_err(|e| Error::Io(e.to_string()))
    }
}

#[derive(Default)]
pub(super) struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn table(&mut self, name: &str, table: Table) -> Result<()> {
        self.files.push((name.to_string(), table.into_bytes()?));
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
        text.push('\n');
        self.files.push((name.to_string(), text.into_bytes()));
        Ok(())
    }

    pub fn write_to(self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, bytes) in self.files {
            let path = dir.join(name);
            std::fs::write(&path, bytes)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Header of `manifest.json`: the command and every resolved setting,
/// defaults included.
#[derive(Serialize)]
pub(super) struct Manifest<'a, T: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub config: T,
}

impl<'a, T: Serialize> Manifest<'a, T> {
    pub fn new(command: &'a str, config: T) -> Self {
        Self {
            command,
            version: env!("CARGO_PKG_VERSION"),
            config,
        }
    }
}
