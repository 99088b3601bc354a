//! Directory persistence: `<dir>/<id>/events.jsonl` plus `<dir>/<id>/blobs/<sha256>.gif`.

use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::error::StudioError;
use crate::session::{Event, Session};

const EVENTS: &str = "events.jsonl";

fn blob_path(dir: &Path, sha: &str) -> PathBuf {
    dir.join("blobs").join(format!("{sha}.gif"))
}

pub(crate) fn create(root: &Path, id: &str) -> io::Result<()> {
    let dir = root.join(id);
    fs::create_dir_all(dir.join("blobs"))?;
    fs::File::create(dir.join(EVENTS)).map(drop)
}

/// Appends the events recorded since `before`, writing any new upload first.
pub(crate) fn append(root: &Path, session: &Session, before: usize) -> io::Result<()> {
    let new = &session.events()[before..];
    if new.is_empty() {
        return Ok(());
    }
    let dir = root.join(session.id());
    for ev in new {
        if let Event::UploadGif { sha256 } = ev {
            let path = blob_path(&dir, sha256);
            if !path.exists() {
                let bytes = session.gif_bytes().ok_or_else(|| io::Error::other("upload without bytes"))?;
                fs::create_dir_all(dir.join("blobs"))?;
                fs::write(&path, bytes.as_slice())?;
            }
        }
    }
    let mut out = String::new();
    for ev in new {
        out.push_str(&serde_json::to_string(ev).map_err(io::Error::other)?);
        out.push('\n');
    }
    OpenOptions::new().create(true).append(true).open(dir.join(EVENTS))?.write_all(out.as_bytes())
}

pub(crate) fn load(root: &Path, id: &str) -> Result<Session, StudioError> {
    let dir = root.join(id);
    let text = fs::read_to_string(dir.join(EVENTS))?;
    let events = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect::<Result<Vec<Event>, _>>()
        .map_err(|e| StudioError::Io(io::Error::new(io::ErrorKind::InvalidData, format!("{id}: {e}"))))?;
    Session::replay(id, &events, |sha| fs::read(blob_path(&dir, sha)).ok())
}

pub(crate) fn load_all(root: &Path) -> Result<Vec<Session>, StudioError> {
    let mut out = Vec::new();
    let mut entries: Vec<_> = fs::read_dir(root)?.collect::<Result<_, _>>()?;
    entries.sort_by_key(|e| e.file_name());
    for entry in entries {
        if !entry.path().join(EVENTS).is_file() {
            continue;
        }
        let id = entry.file_name().to_string_lossy().into_owned();
        match load(root, &id) {
            Ok(s) => out.push(s),
            Err(e) => log::warn!("skipping session {id}: {e}"),
        }
    }
    Ok(out)
}
