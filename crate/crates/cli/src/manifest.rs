use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::time::Duration;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use ristrace::scenarios::ScenarioConfig;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Everything needed to reproduce a run.
pub struct RunManifest(Value);

impl RunManifest {
    pub fn new(command: &str, cfg: &ScenarioConfig, scene_sha256: &str, outputs: Vec<String>, elapsed: Duration) -> Self {
        Self(json!({
            "tool_version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "config": cfg,
            "scene": { "ref": cfg.scene, "sha256": scene_sha256 },
            "outputs": outputs,
            "duration_s": elapsed.as_secs_f64(),
        }))
    }

    fn to_text(&self) -> String {
        serde_json::to_string_pretty(&self.0).expect("manifest serializes") + "\n"
    }
}

/// Writes `contents` next to `path` and renames it into place.
fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Writes every output, then the manifest last so its presence marks success.
pub fn write_outputs(dir: &Path, files: &[(String, String)], manifest: &RunManifest) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    for (name, body) in files {
        write_atomic(&dir.join(name), body)?;
    }
    write_atomic(&dir.join("manifest.json"), &manifest.to_text())
}
