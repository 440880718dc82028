//! All-or-nothing output: files are staged next to their destination and
//! renamed into place only after every one has been written.

use std::fs;
use std::path::{Path, PathBuf};

use crate::CliError;

#[derive(Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, name: &str, contents: impl Into<Vec<u8>>) {
        self.files.push((name.to_owned(), contents.into()));
    }

    pub fn commit(self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        let io = |what: &str, p: &Path, e: std::io::Error| {
            CliError::config(format!("cannot {what} {}: {e}", p.display()))
        };
        fs::create_dir_all(dir).map_err(|e| io("create", dir, e))?;
        let mut staged = Vec::new();
        for (name, contents) in &self.files {
            let tmp = dir.join(format!(".{name}.partial"));
            if let Err(e) = fs::write(&tmp, contents) {
                for (t, _) in &staged {
                    let _ = fs::remove_file(t);
                }
                let _ = fs::remove_file(&tmp);
                return Err(io("write", &tmp, e));
            }
            staged.push((tmp, dir.join(name)));
        }
        let mut written = Vec::new();
        for (tmp, dest) in staged {
            fs::rename(&tmp, &dest).map_err(|e| io("write", &dest, e))?;
            written.push(dest);
        }
        Ok(written)
    }
}

pub fn to_json<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s.into_bytes()
}
