//! IDX reader/writer for the MNIST distribution files.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use super::Sample;
use crate::error::{Error, Result};

pub const MNIST_SIDE: usize = 28;

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

/// Reads a whole file, transparently inflating gzip content.
fn read_maybe_gz(path: &Path) -> Result<Vec<u8>> {
    let mut raw = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut raw))
        .map_err(|e| Error::io(path, e))?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::format(path, format!("gzip stream: {e}")))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn be_u32(bytes: &[u8], at: usize, path: &Path) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::format(path, "truncated header"))
}

/// Parses an IDX3 image file into `(count, rows, cols, pixels)`.
pub fn read_idx_images(path: &Path) -> Result<(usize, usize, usize, Vec<u8>)> {
    let bytes = read_maybe_gz(path)?;
    let magic = be_u32(&bytes, 0, path)?;
    if magic != IMAGES_MAGIC {
        return Err(Error::format(
            path,
            format!("bad magic {magic:#010x}, expected {IMAGES_MAGIC:#010x}"),
        ));
    }
    let count = be_u32(&bytes, 4, path)? as usize;
    let rows = be_u32(&bytes, 8, path)? as usize;
    let cols = be_u32(&bytes, 12, path)? as usize;
    let body = &bytes[16..];
    let expected = count * rows * cols;
    if body.len() < expected {
        return Err(Error::format(
            path,
            format!("truncated: {} pixel bytes, expected {expected}", body.len()),
        ));
    }
    Ok((count, rows, cols, body[..expected].to_vec()))
}

/// Parses an IDX1 label file.
pub fn read_idx_labels(path: &Path) -> Result<Vec<u8>> {
    let bytes = read_maybe_gz(path)?;
    let magic = be_u32(&bytes, 0, path)?;
    if magic != LABELS_MAGIC {
        return Err(Error::format(
            path,
            format!("bad magic {magic:#010x}, expected {LABELS_MAGIC:#010x}"),
        ));
    }
    let count = be_u32(&bytes, 4, path)? as usize;
    let body = &bytes[8..];
    if body.len() < count {
        return Err(Error::format(
            path,
            format!("truncated: {} label bytes, expected {count}", body.len()),
        ));
    }
    Ok(body[..count].to_vec())
}

fn locate(dir: &Path, stem: &str) -> Option<PathBuf> {
    [format!("{stem}.gz"), stem.to_string()]
        .into_iter()
        .map(|name| dir.join(name))
        .find(|p| p.is_file())
}

/// Loads every `train-*` / `t10k-*` IDX pair found in `dir`.
///
/// Pixels are scaled to `[0, 1]`; digit `d` becomes class `d + 1`.
pub fn load_mnist(dir: &Path) -> Result<Vec<Sample>> {
    let mut samples = Vec::new();
    let mut found = false;
    for prefix in ["train", "t10k"] {
        let images = locate(dir, &format!("{prefix}-images-idx3-ubyte"));
        let labels = locate(dir, &format!("{prefix}-labels-idx1-ubyte"));
        let (images, labels) = match (images, labels) {
            (Some(i), Some(l)) => (i, l),
            (None, None) => continue,
            (Some(i), None) => {
                return Err(Error::format(i, "image file without matching label file"))
            }
            (None, Some(l)) => {
                return Err(Error::format(l, "label file without matching image file"))
            }
        };
        found = true;
        let (count, rows, cols, pixels) = read_idx_images(&images)?;
        if rows != MNIST_SIDE || cols != MNIST_SIDE {
            return Err(Error::format(
                &images,
                format!("images are {rows}x{cols}, expected 28x28"),
            ));
        }
        let digits = read_idx_labels(&labels)?;
        if digits.len() != count {
            return Err(Error::format(
                &labels,
                format!("{} labels for {count} images", digits.len()),
            ));
        }
        let side2 = rows * cols;
        for (i, &digit) in digits.iter().enumerate() {
            if digit > 9 {
                return Err(Error::format(&labels, format!("label {digit} at {i}")));
            }
            let features = pixels[i * side2..(i + 1) * side2]
                .iter()
                .map(|&p| f64::from(p) / 255.0)
                .collect();
            samples.push(Sample::new(features, usize::from(digit) + 1));
        }
    }
    if !found {
        return Err(Error::format(dir, "no MNIST IDX files found"));
    }
    Ok(samples)
}

/// Writes an IDX image/label pair (gzip-compressed when `gzip` is set).
///
/// `images` holds row-major 28×28 bytes per entry; `digits` are 0–9.
pub fn write_idx(
    dir: &Path,
    prefix: &str,
    images: &[Vec<u8>],
    digits: &[u8],
    gzip: bool,
) -> Result<()> {
    if images.len() != digits.len() {
        return Err(Error::config("image and label counts differ"));
    }
    let side2 = MNIST_SIDE * MNIST_SIDE;
    let mut img = Vec::with_capacity(16 + images.len() * side2);
    img.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    img.extend_from_slice(&(images.len() as u32).to_be_bytes());
    img.extend_from_slice(&(MNIST_SIDE as u32).to_be_bytes());
    img.extend_from_slice(&(MNIST_SIDE as u32).to_be_bytes());
    for im in images {
        if im.len() != side2 {
            return Err(Error::Dimension {
                expected: side2,
                got: im.len(),
            });
        }
        img.extend_from_slice(im);
    }
    let mut lab = Vec::with_capacity(8 + digits.len());
    lab.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    lab.extend_from_slice(&(digits.len() as u32).to_be_bytes());
    lab.extend_from_slice(digits);

    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let ext = if gzip { ".gz" } else { "" };
    for (stem, bytes) in [("images-idx3-ubyte", img), ("labels-idx1-ubyte", lab)] {
        let path = dir.join(format!("{prefix}-{stem}{ext}"));
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let result = if gzip {
            let mut enc = GzEncoder::new(file, Compression::default());
            enc.write_all(&bytes).and_then(|_| enc.finish().map(drop))
        } else {
            let mut f = file;
            f.write_all(&bytes)
        };
        result.map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
