use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::pipeline::FORMAT_VERSION;

pub const MANIFEST_FILE: &str = "manifest.txt";

/// Hex SHA-256 of a file's contents.
pub fn sha256_file(path: &Path) -> io::Result<String> {
    let mut hasher = Sha256::new();
    io::copy(&mut File::open(path)?, &mut hasher)?;
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

/// Everything that determines a run's outputs: no timestamps or host data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    pub command: String,
    pub config: BTreeMap<String, String>,
    /// `(path, sha256)` in the order the command reads them.
    pub inputs: Vec<(String, String)>,
}

impl fmt::Display for Manifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# nids run manifest")?;
        writeln!(f, "command={}", self.command)?;
        writeln!(f, "nids_version={}", env!("CARGO_PKG_VERSION"))?;
        writeln!(f, "model_format={FORMAT_VERSION}")?;
        writeln!(f, "[config]")?;
        for (k, v) in &self.config {
            writeln!(f, "{k}={v}")?;
        }
        writeln!(f, "[inputs]")?;
        for (path, sum) in &self.inputs {
            writeln!(f, "sha256:{sum}  {path}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_known_text() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("abc");
        std::fs::write(&path, "abc").unwrap();
        assert_eq!(
            sha256_file(&path).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn layout() {
        let m = Manifest {
            command: "train".into(),
            config: [("seed".to_string(), "7".to_string())].into(),
            inputs: vec![("d.csv".into(), "00".into())],
        };
        let text = m.to_string();
        assert!(text.contains("\ncommand=train\n"));
        assert!(text.contains("[config]\nseed=7\n[inputs]\nsha256:00  d.csv\n"));
    }
}
