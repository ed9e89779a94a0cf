//! Small filesystem helpers shared by the pipelines and the CLI.

use std::fs;
use std::io::Write;
use std::path::Path;

/// Writes via a temp file in the target directory plus an atomic rename,
/// so readers never observe a partially written file.
pub fn atomic_write(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let mut temp = tempfile_in(dir)?;
    temp.1.write_all(contents.as_bytes())?;
    temp.1.sync_all()?;
    drop(temp.1);
    fs::rename(&temp.0, path)
}

fn tempfile_in(dir: &Path) -> std::io::Result<(std::path::PathBuf, fs::File)> {
    for attempt in 0..64 {
        let name = format!(".tmp-{}-{attempt}", std::process::id());
        let candidate = dir.join(name);
        match fs::OpenOptions::new().write(true).create_new(true).open(&candidate) {
            Ok(file) => return Ok((candidate, file)),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e),
        }
    }
    Err(std::io::Error::other("could not create a temp file"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn write_then_read_back() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested").join("file.txt");
        atomic_write(&path, "payload").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "payload");
        atomic_write(&path, "replaced").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "replaced");
    }
}
