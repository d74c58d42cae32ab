use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Normalizes a dataset-relative path to forward slashes, rejecting anything
/// that could escape the root.
pub fn normalize_relpath(relpath: &str) -> Result<String> {
    let unified = relpath.replace('\\', "/");
    if unified.starts_with('/') || unified.as_bytes().get(1) == Some(&b':') {
        return Err(Error::Path(format!("`{relpath}` is absolute")));
    }
    let mut parts = Vec::new();
    for part in unified.split('/') {
        match part {
            "" | "." => {}
            ".." => return Err(Error::Path(format!("`{relpath}` leaves the dataset root"))),
            p => parts.push(p),
        }
    }
    if parts.is_empty() {
        return Err(Error::Path(format!("`{relpath}` is empty")));
    }
    Ok(parts.join("/"))
}

/// `output_root/relpath`, with parent directories created.
pub fn mirror_output_path(output_root: &Path, relpath: &str) -> Result<PathBuf> {
    let rel = normalize_relpath(relpath)?;
    let path = rel
        .split('/')
        .fold(output_root.to_path_buf(), |p, c| p.join(c));
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    Ok(path)
}

/// Writes through a hidden temporary sibling and renames it into place, so a
/// crash never leaves a truncated file under the final name.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let parent = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::Path(format!("{} has no file name", path.display())))?;
    let tmp = parent.join(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes)
        .and_then(|_| f.sync_all())
        .map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mirrors_relpath() {
        let dir = tempfile::tempdir().unwrap();
        let p = mirror_output_path(dir.path(), "samples/CAM_FRONT/a.jpg").unwrap();
        assert_eq!(
            p,
            dir.path().join("samples").join("CAM_FRONT").join("a.jpg")
        );
        assert!(p.parent().unwrap().is_dir());
    }

    #[test]
    fn rejects_traversal() {
        assert!(matches!(normalize_relpath("../x"), Err(Error::Path(_))));
        assert!(matches!(
            normalize_relpath("a/../../x"),
            Err(Error::Path(_))
        ));
        assert!(matches!(
            normalize_relpath("/etc/passwd"),
            Err(Error::Path(_))
        ));
        assert!(matches!(normalize_relpath("C:\\x"), Err(Error::Path(_))));
        assert_eq!(
            normalize_relpath("./sweeps\\LIDAR_TOP//b.bin").unwrap(),
            "sweeps/LIDAR_TOP/b.bin"
        );
    }

    #[test]
    fn atomic_write_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("deep/x.bin");
        write_atomic(&p, b"abc").unwrap();
        write_atomic(&p, b"de").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"de");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
