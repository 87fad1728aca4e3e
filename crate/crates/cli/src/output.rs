//! Staged output: files are written to a scratch directory next to the
//! output directory and only moved into place once the run has succeeded.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::TempDir;

pub struct Staging {
    dir: TempDir,
    out: PathBuf,
    files: Vec<String>,
}

impl Staging {
    pub fn new(out: &Path) -> io::Result<Self> {
        let parent = match out.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent)?;
        let dir = tempfile::Builder::new()
            .prefix(".clusterlab-staging-")
            .tempdir_in(&parent)?;
        Ok(Self {
            dir,
            out: out.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn write(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>,
    ) -> io::Result<()> {
        let mut w = BufWriter::new(File::create(self.dir.path().join(name))?);
        f(&mut w)?;
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> io::Result<()> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)
        })
    }

    /// Move every staged file into the output directory.
    pub fn commit(self) -> io::Result<Vec<String>> {
        fs::create_dir_all(&self.out)?;
        for name in &self.files {
            fs::rename(self.dir.path().join(name), self.out.join(name))?;
        }
        Ok(self.files)
    }
}
