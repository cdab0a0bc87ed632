//! IDX binary ingestion (the MNIST distribution format).
//!
//! Big-endian headers: magic 0x00000803 for image files (count, rows, cols)
//! and 0x00000801 for label files (count), followed by raw u8 payloads.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use crate::descriptors::Image;
use crate::error::{Error, Result};

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;

/// Load an IDX image file into row-major grayscale images (values 0..255).
pub fn load_idx_images(path: &Path) -> Result<Vec<Image>> {
    let mut reader = Cursor::open(path)?;
    let magic = reader.read_u32()?;
    if magic != IMAGE_MAGIC {
        return Err(Error::InvalidIdx(format!(
            "{}: bad image magic {magic:#010x}, expected {IMAGE_MAGIC:#010x}",
            path.display()
        )));
    }
    let count = reader.read_u32()? as usize;
    let rows = reader.read_u32()? as usize;
    let cols = reader.read_u32()? as usize;
    let mut images = Vec::with_capacity(count);
    let mut buf = vec![0u8; rows * cols];
    for _ in 0..count {
        reader.read_exact(&mut buf)?;
        images.push(Image::new(rows, cols, 1, buf.iter().map(|&b| b as f64).collect()));
    }
    Ok(images)
}

/// Load an IDX label file (values 0..9).
pub fn load_idx_labels(path: &Path) -> Result<Vec<u8>> {
    let mut reader = Cursor::open(path)?;
    let magic = reader.read_u32()?;
    if magic != LABEL_MAGIC {
        return Err(Error::InvalidIdx(format!(
            "{}: bad label magic {magic:#010x}, expected {LABEL_MAGIC:#010x}",
            path.display()
        )));
    }
    let count = reader.read_u32()? as usize;
    let mut labels = vec![0u8; count];
    reader.read_exact(&mut labels)?;
    if let Some(bad) = labels.iter().find(|&&l| l > 9) {
        return Err(Error::InvalidIdx(format!("{}: label {bad} out of range", path.display())));
    }
    Ok(labels)
}

/// Load a matched (images, labels) IDX pair.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Vec<(Image, u8)>> {
    let images = load_idx_images(images_path)?;
    let labels = load_idx_labels(labels_path)?;
    if images.len() != labels.len() {
        return Err(Error::InvalidIdx(format!(
            "{} images but {} labels",
            images.len(),
            labels.len()
        )));
    }
    Ok(images.into_iter().zip(labels).collect())
}

/// Write images to an IDX file (values clamped and rounded to 0..255).
pub fn write_idx_images(path: &Path, images: &[Image]) -> Result<()> {
    let (rows, cols) = match images.first() {
        Some(img) => (img.height(), img.width()),
        None => (0, 0),
    };
    let mut file = File::create(path)?;
    file.write_all(&IMAGE_MAGIC.to_be_bytes())?;
    file.write_all(&(images.len() as u32).to_be_bytes())?;
    file.write_all(&(rows as u32).to_be_bytes())?;
    file.write_all(&(cols as u32).to_be_bytes())?;
    for img in images {
        let bytes: Vec<u8> =
            img.data().iter().map(|&v| v.round().clamp(0.0, 255.0) as u8).collect();
        file.write_all(&bytes)?;
    }
    Ok(())
}

/// Write labels to an IDX file.
pub fn write_idx_labels(path: &Path, labels: &[u8]) -> Result<()> {
    let mut file = File::create(path)?;
    file.write_all(&LABEL_MAGIC.to_be_bytes())?;
    file.write_all(&(labels.len() as u32).to_be_bytes())?;
    file.write_all(labels)?;
    Ok(())
}

/// Byte reader that reports the offset of a truncation.
struct Cursor {
    reader: BufReader<File>,
    offset: usize,
    path: String,
}

impl Cursor {
    fn open(path: &Path) -> Result<Self> {
        Ok(Self {
            reader: BufReader::new(File::open(path)?),
            offset: 0,
            path: path.display().to_string(),
        })
    }

    fn read_u32(&mut self) -> Result<u32> {
        let mut buf = [0u8; 4];
        self.read_exact(&mut buf)?;
        Ok(u32::from_be_bytes(buf))
    }

    fn read_exact(&mut self, buf: &mut [u8]) -> Result<()> {
        self.reader.read_exact(buf).map_err(|_| {
            Error::InvalidIdx(format!(
                "{}: truncated at byte offset {} (wanted {} more bytes)",
                self.path,
                self.offset,
                buf.len()
            ))
        })?;
        self.offset += buf.len();
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_images() -> Vec<Image> {
        (0..3)
            .map(|i| {
                Image::new(
                    4,
                    4,
                    1,
                    (0..16).map(|p| ((i * 16 + p) % 256) as f64).collect(),
                )
            })
            .collect()
    }

    #[test]
    fn image_label_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let img_path = dir.path().join("imgs.idx");
        let lbl_path = dir.path().join("lbls.idx");
        write_idx_images(&img_path, &sample_images()).unwrap();
        write_idx_labels(&lbl_path, &[3, 1, 4]).unwrap();

        let pairs = load_idx(&img_path, &lbl_path).unwrap();
        assert_eq!(pairs.len(), 3);
        assert_eq!(pairs[0].1, 3);
        assert_eq!(pairs[2].0.get(0, 1, 0), 33.0);
    }

    #[test]
    fn bad_magic_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.idx");
        std::fs::write(&path, 0x1234_5678u32.to_be_bytes()).unwrap();
        let err = load_idx_images(&path).unwrap_err();
        assert!(err.to_string().contains("bad image magic"));
    }

    #[test]
    fn truncation_names_byte_offset() {
        let dir = tempfile::tempdir().unwrap();
        let img_path = dir.path().join("imgs.idx");
        write_idx_images(&img_path, &sample_images()).unwrap();
        let bytes = std::fs::read(&img_path).unwrap();
        std::fs::write(&img_path, &bytes[..bytes.len() - 5]).unwrap();

        let err = load_idx_images(&img_path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("truncated at byte offset 48"), "got: {msg}");
    }

    #[test]
    fn count_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let img_path = dir.path().join("imgs.idx");
        let lbl_path = dir.path().join("lbls.idx");
        write_idx_images(&img_path, &sample_images()).unwrap();
        write_idx_labels(&lbl_path, &[1, 2]).unwrap();
        assert!(load_idx(&img_path, &lbl_path).is_err());
    }
}
