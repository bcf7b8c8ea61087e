//! MNIST IDX containers and frame encoding.
//!
//! Image files: big-endian `u32` magic `0x00000803`, then count, rows, cols,
//! then `count · rows · cols` pixel bytes. Label files: magic `0x00000801`,
//! count, then `count` label bytes.

use std::path::Path;

use crate::error::{ensure_len, Result, SnnError};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;
pub const SIDE: usize = 28;
pub const PIXELS: usize = SIDE * SIDE;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    /// Row-major 28×28 images, one byte per pixel.
    pub images: Vec<Vec<u8>>,
    pub labels: Vec<u8>,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Samples `range`, clamped to the dataset size.
    pub fn slice(&self, start: usize, count: usize) -> LabeledDataset {
        let end = (start + count).min(self.len());
        let start = start.min(end);
        LabeledDataset {
            images: self.images[start..end].to_vec(),
            labels: self.labels[start..end].to_vec(),
        }
    }
}

fn be_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_be_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
}

fn check_header(path: &Path, bytes: &[u8], header_len: usize, magic: u32) -> Result<()> {
    if bytes.len() < 4 {
        return Err(SnnError::Truncated {
            path: path.to_path_buf(),
            expected: header_len,
            found: bytes.len(),
        });
    }
    let found = be_u32(bytes, 0);
    if found != magic {
        return Err(SnnError::BadMagic {
            path: path.to_path_buf(),
            expected: magic,
            found,
        });
    }
    if bytes.len() < header_len {
        return Err(SnnError::Truncated {
            path: path.to_path_buf(),
            expected: header_len,
            found: bytes.len(),
        });
    }
    Ok(())
}

pub fn parse_idx_images(path: &Path, bytes: &[u8]) -> Result<Vec<Vec<u8>>> {
    check_header(path, bytes, 16, IMAGE_MAGIC)?;
    let count = be_u32(bytes, 4) as usize;
    let rows = be_u32(bytes, 8) as usize;
    let cols = be_u32(bytes, 12) as usize;
    if rows != SIDE || cols != SIDE {
        return Err(SnnError::invalid(format!(
            "{}: expected 28x28 images, found {rows}x{cols}",
            path.display()
        )));
    }
    let expected = 16 + count * PIXELS;
    if bytes.len() < expected {
        return Err(SnnError::Truncated {
            path: path.to_path_buf(),
            expected,
            found: bytes.len(),
        });
    }
    Ok(bytes[16..expected].chunks(PIXELS).map(<[u8]>::to_vec).collect())
}

pub fn parse_idx_labels(path: &Path, bytes: &[u8]) -> Result<Vec<u8>> {
    check_header(path, bytes, 8, LABEL_MAGIC)?;
    let count = be_u32(bytes, 4) as usize;
    let expected = 8 + count;
    if bytes.len() < expected {
        return Err(SnnError::Truncated {
            path: path.to_path_buf(),
            expected,
            found: bytes.len(),
        });
    }
    let labels = bytes[8..expected].to_vec();
    if let Some(bad) = labels.iter().find(|&&l| l > 9) {
        return Err(SnnError::invalid(format!(
            "{}: label {bad} outside 0..=9",
            path.display()
        )));
    }
    Ok(labels)
}

fn read(path: &Path) -> Result<Vec<u8>> {
    if !path.exists() {
        return Err(SnnError::MissingArtifact(path.to_path_buf()));
    }
    Ok(std::fs::read(path)?)
}

pub fn load_mnist_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let (ip, lp) = (images_path.as_ref(), labels_path.as_ref());
    let images = parse_idx_images(ip, &read(ip)?)?;
    let labels = parse_idx_labels(lp, &read(lp)?)?;
    if images.len() != labels.len() {
        return Err(SnnError::CountMismatch {
            images: images.len(),
            labels: labels.len(),
        });
    }
    Ok(LabeledDataset { images, labels })
}

/// Serialize images in IDX format (used for fixtures and subsets).
pub fn write_idx_images(images: &[Vec<u8>]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.len() * PIXELS);
    for v in [IMAGE_MAGIC, images.len() as u32, SIDE as u32, SIDE as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    for img in images {
        out.extend_from_slice(img);
    }
    out
}

pub fn write_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

/// `x_i = gain · pixel_i / 255`, row-major like `grid_geometry(28, 28, _)`.
pub fn encode_frame(image: &[u8], n_inputs: usize, gain: f64) -> Result<Vec<f64>> {
    ensure_len("image vs layer-1 size", n_inputs, image.len())?;
    Ok(image.iter().map(|&p| gain * f64::from(p) / 255.0).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> (Vec<Vec<u8>>, Vec<u8>) {
        let imgs = vec![vec![0u8; PIXELS], (0..PIXELS).map(|i| (i % 256) as u8).collect()];
        (imgs, vec![3, 7])
    }

    #[test]
    fn idx_round_trip_through_files() {
        let dir = tempfile::tempdir().unwrap();
        let (imgs, labels) = tiny();
        let ip = dir.path().join("img");
        let lp = dir.path().join("lbl");
        std::fs::write(&ip, write_idx_images(&imgs)).unwrap();
        std::fs::write(&lp, write_idx_labels(&labels)).unwrap();
        let ds = load_mnist_idx(&ip, &lp).unwrap();
        assert_eq!(ds.images, imgs);
        assert_eq!(ds.labels, labels);
    }

    #[test]
    fn bad_magic() {
        let (imgs, _) = tiny();
        let bytes = write_idx_images(&imgs);
        let err = parse_idx_labels(Path::new("l"), &bytes).unwrap_err();
        assert!(matches!(err, SnnError::BadMagic { found: 0x803, .. }));
    }

    #[test]
    fn truncated_payload() {
        let (imgs, _) = tiny();
        let bytes = write_idx_images(&imgs);
        let err = parse_idx_images(Path::new("i"), &bytes[..bytes.len() - 1]).unwrap_err();
        assert!(matches!(err, SnnError::Truncated { .. }));
        let err = parse_idx_labels(Path::new("l"), &write_idx_labels(&[1, 2])[..9]).unwrap_err();
        assert!(matches!(err, SnnError::Truncated { .. }));
    }

    #[test]
    fn count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let (imgs, _) = tiny();
        let ip = dir.path().join("img");
        let lp = dir.path().join("lbl");
        std::fs::write(&ip, write_idx_images(&imgs)).unwrap();
        std::fs::write(&lp, write_idx_labels(&[1])).unwrap();
        let err = load_mnist_idx(&ip, &lp).unwrap_err();
        assert!(matches!(err, SnnError::CountMismatch { images: 2, labels: 1 }));
    }

    #[test]
    fn encoding() {
        assert_eq!(encode_frame(&[0u8; PIXELS], PIXELS, 3.0).unwrap(), vec![0.0; PIXELS]);
        let mut img = vec![0u8; PIXELS];
        img[0] = 255;
        let x = encode_frame(&img, PIXELS, 1.0).unwrap();
        assert_eq!(x[0], 1.0);
        assert!(x[1..].iter().all(|&v| v == 0.0));
        let img: Vec<u8> = (0..PIXELS).map(|i| (i * 7 % 256) as u8).collect();
        let a = encode_frame(&img, PIXELS, 1.5).unwrap();
        let b = encode_frame(&img, PIXELS, 3.0).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| (2.0 * x - y).abs() < 1e-12));
        assert!(encode_frame(&img, 100, 1.0).is_err());
    }
}
