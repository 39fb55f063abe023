use crate::CliError;
use ffwd::suite::SCHEMA_VERSION;
use serde::Serialize;
use serde_json::Value;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub const MANIFEST: &str = "manifest.json";

/// Seconds since the Unix epoch.
pub fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

/// Writes through a sibling temporary file and a rename, so readers never
/// see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let name = path.file_name().ok_or_else(|| std::io::Error::other("output path has no file name"))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: Value,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub wall_clock_s: f64,
    pub files: Vec<String>,
    pub summary: Value,
}

impl Manifest {
    pub fn new(command: &'static str, config: Value, started: f64, summary: Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: "ffwd",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            started_unix: started,
            finished_unix: 0.0,
            wall_clock_s: 0.0,
            files: Vec::new(),
            summary,
        }
    }
}

/// Output directory of one command. A stale manifest is removed up front so
/// a failed run never leaves one describing other files.
pub struct OutDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root)?;
        let manifest = root.join(MANIFEST);
        if manifest.exists() {
            std::fs::remove_file(&manifest)?;
        }
        Ok(Self { root: root.to_path_buf(), files: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        write_atomic(&self.root.join(name), contents.as_bytes())?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::new("internal", e))? + "\n";
        self.write(name, &text)
    }

    /// Writes the manifest; always the last file of a command.
    pub fn finish(self, mut manifest: Manifest) -> Result<(), CliError> {
        manifest.finished_unix = now();
        manifest.wall_clock_s = manifest.finished_unix - manifest.started_unix;
        manifest.files = self.files;
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::new("internal", e))? + "\n";
        write_atomic(&self.root.join(MANIFEST), text.as_bytes())?;
        Ok(())
    }
}
