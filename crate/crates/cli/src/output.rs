use std::io::Write;
use std::path::{Path, PathBuf};

use crate::experiments::ExperimentOutput;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "LAURENT_OUT_DIR";

/// `--out`, then the config's `out_dir`, then `$LAURENT_OUT_DIR`, then `./out`.
pub fn resolve_out_dir(flag: Option<&Path>, config: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| config.map(Path::to_path_buf))
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Writes `bytes` to `dir/name` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let target = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(&target).map_err(|e| e.error)?;
    Ok(target)
}

/// Writes every artifact plus `<name>.json` holding the verdict.
pub fn write_experiment(dir: &Path, out: &ExperimentOutput) -> std::io::Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for a in &out.artifacts {
        written.push(write_atomic(dir, &a.name, &a.bytes)?);
    }
    let verdict = serde_json::to_vec_pretty(&out.verdict).expect("verdict serializes");
    written.push(write_atomic(dir, &format!("{}.json", out.name), &verdict)?);
    Ok(written)
}
