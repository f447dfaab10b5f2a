//! IDX ingestion (the MNIST container format): big-endian IDX3 image files
//! (magic 2051) and IDX1 label files (magic 2049).

use std::path::Path;

use super::{DataError, DigitBank, Result};

const IDX3_MAGIC: u32 = 2051;
const IDX1_MAGIC: u32 = 2049;
/// IDX labels are bytes; digit banks accept 0..=9.
const MAX_LABEL: usize = 9;

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    file: &'static str,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(DataError::Truncated {
                file: self.file,
                needed: self.pos + n,
                got: self.bytes.len(),
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32_be(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }
}

/// Load an image/label IDX pair into a [`DigitBank`]. Pixels are scaled to
/// `[0, 1]`; the class count is `max label + 1` and every class below it must
/// be populated.
pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<DigitBank> {
    let image_bytes = std::fs::read(images_path)?;
    let label_bytes = std::fs::read(labels_path)?;

    let mut ir = Reader { bytes: &image_bytes, pos: 0, file: "images" };
    let magic = ir.u32_be()?;
    if magic != IDX3_MAGIC {
        return Err(DataError::BadMagic { file: "images", got: magic, expected: IDX3_MAGIC });
    }
    let count = ir.u32_be()? as usize;
    let rows = ir.u32_be()? as usize;
    let cols = ir.u32_be()? as usize;
    if rows == 0 || cols == 0 {
        return Err(DataError::InvalidGeometry(format!("{rows}x{cols} IDX images")));
    }

    let mut lr = Reader { bytes: &label_bytes, pos: 0, file: "labels" };
    let magic = lr.u32_be()?;
    if magic != IDX1_MAGIC {
        return Err(DataError::BadMagic { file: "labels", got: magic, expected: IDX1_MAGIC });
    }
    let label_count = lr.u32_be()? as usize;
    if label_count != count {
        return Err(DataError::CountMismatch { images: count, labels: label_count });
    }

    let pixels = rows * cols;
    let raw_images = ir.take(count * pixels)?;
    let raw_labels = lr.take(count)?;

    let mut max_label = 0usize;
    let mut images = Vec::with_capacity(count);
    for i in 0..count {
        let label = raw_labels[i] as usize;
        if label > MAX_LABEL {
            return Err(DataError::LabelOutOfRange { index: i, label, max: MAX_LABEL });
        }
        max_label = max_label.max(label);
        let img: Vec<f32> = raw_images[i * pixels..(i + 1) * pixels]
            .iter()
            .map(|&b| f32::from(b) / 255.0)
            .collect();
        images.push((img, label));
    }
    DigitBank::from_images(images, max_label + 1, rows, cols)
}
