use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// File locations of one sequence in the Cell Tracking Challenge layout.
///
/// Inputs live under `root`: `<seq>/tNNN.tif`, `<seq>_GT/SEG/man_segNNN.tif` and
/// `<seq>_GT/TRA/man_trackNNN.tif`. Products go under `out`: predictions in
/// `<seq>_PRED`, prepared targets in `<seq>_PREP` and masks in `<seq>_RES`.
#[derive(Clone, Debug)]
pub struct SequenceLayout {
    pub root: PathBuf,
    pub out: PathBuf,
    pub seq: String,
}

impl SequenceLayout {
    pub fn new(root: impl Into<PathBuf>, out: impl Into<PathBuf>, seq: impl Into<String>) -> Self {
        SequenceLayout {
            root: root.into(),
            out: out.into(),
            seq: seq.into(),
        }
    }

    pub fn images_dir(&self) -> PathBuf {
        self.root.join(&self.seq)
    }

    pub fn seg_dir(&self) -> PathBuf {
        self.root.join(format!("{}_GT", self.seq)).join("SEG")
    }

    pub fn tra_dir(&self) -> PathBuf {
        self.root.join(format!("{}_GT", self.seq)).join("TRA")
    }

    pub fn pred_dir(&self) -> PathBuf {
        self.out.join(format!("{}_PRED", self.seq))
    }

    pub fn prep_dir(&self) -> PathBuf {
        self.out.join(format!("{}_PREP", self.seq))
    }

    pub fn res_dir(&self) -> PathBuf {
        self.out.join(format!("{}_RES", self.seq))
    }

    pub fn image(&self, frame: &str) -> PathBuf {
        self.images_dir().join(format!("t{frame}.tif"))
    }

    pub fn seg(&self, frame: &str) -> PathBuf {
        self.seg_dir().join(format!("man_seg{frame}.tif"))
    }

    pub fn tra(&self, frame: &str) -> PathBuf {
        self.tra_dir().join(format!("man_track{frame}.tif"))
    }

    pub fn marker_pred(&self, frame: &str) -> PathBuf {
        self.pred_dir().join(format!("t{frame}_marker.tif"))
    }

    pub fn fg_pred(&self, frame: &str) -> PathBuf {
        self.pred_dir().join(format!("t{frame}_fg.tif"))
    }

    pub fn mask(&self, frame: &str) -> PathBuf {
        self.res_dir().join(format!("mask{frame}.tif"))
    }

    pub fn image_frames(&self) -> Result<Vec<String>> {
        frames_in(&self.images_dir(), "t", ".tif")
    }

    pub fn seg_frames(&self) -> Result<Vec<String>> {
        frames_in(&self.seg_dir(), "man_seg", ".tif")
    }

    pub fn tra_frames(&self) -> Result<Vec<String>> {
        frames_in(&self.tra_dir(), "man_track", ".tif")
    }

    pub fn result_frames(&self) -> Result<Vec<String>> {
        frames_in(&self.res_dir(), "mask", ".tif")
    }

    /// Frames with a marker or a foreground prediction.
    pub fn prediction_frames(&self) -> Result<Vec<String>> {
        let mut frames = frames_in(&self.pred_dir(), "t", "_marker.tif")?;
        frames.extend(frames_in(&self.pred_dir(), "t", "_fg.tif")?);
        frames.sort();
        frames.dedup();
        Ok(frames)
    }
}

/// Sorted frame ids `NNN` of files named `<prefix>NNN<suffix>`, where `NNN` is
/// all digits. A missing directory has no frames.
pub fn frames_in(dir: &Path, prefix: &str, suffix: &str) -> Result<Vec<String>> {
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut frames = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let name = entry?.file_name();
        let Some(name) = name.to_str() else { continue };
        if let Some(id) = name.strip_prefix(prefix).and_then(|r| r.strip_suffix(suffix)) {
            if !id.is_empty() && id.bytes().all(|b| b.is_ascii_digit()) {
                frames.push(id.to_string());
            }
        }
    }
    frames.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    Ok(frames)
}

/// Zero-padded frame id wide enough for `count` frames, at least 3 digits.
pub fn frame_id(index: usize, count: usize) -> String {
    let width = count.saturating_sub(1).to_string().len().max(3);
    format!("{index:0width$}")
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(Error::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths_follow_challenge_layout() {
        let l = SequenceLayout::new("/d", "/o", "01");
        assert_eq!(l.image("007"), Path::new("/d/01/t007.tif"));
        assert_eq!(l.seg("007"), Path::new("/d/01_GT/SEG/man_seg007.tif"));
        assert_eq!(l.tra("007"), Path::new("/d/01_GT/TRA/man_track007.tif"));
        assert_eq!(l.mask("007"), Path::new("/o/01_RES/mask007.tif"));
        assert_eq!(l.marker_pred("007"), Path::new("/o/01_PRED/t007_marker.tif"));
    }

    #[test]
    fn frame_listing() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["t010.tif", "t002.tif", "t0100.tif", "tx.tif", "t003.png", "t004_marker.tif"] {
            std::fs::write(dir.path().join(name), b"").unwrap();
        }
        assert_eq!(frames_in(dir.path(), "t", ".tif").unwrap(), vec!["002", "010", "0100"]);
        assert!(frames_in(&dir.path().join("none"), "t", ".tif").unwrap().is_empty());
        assert_eq!(frame_id(4, 20), "004");
        assert_eq!(frame_id(12, 1500), "0012");
    }
}
