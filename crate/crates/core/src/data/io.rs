//! Dataset container format.
//!
//! Layout (all integers little-endian):
//! magic `FCLD` | version u16 | rho_l f64 | rho_r f64 | num_classes u32 |
//! split u8 | height u32 | width u32 | seed u64 | count u64 |
//! per example: x_l f32*hw, x_r f32*hw, y_l u32, y_r u32, corrupted u8 |
//! crc32 (IEEE) of every preceding byte, u32.
//!
//! A `<path>.manifest.csv` with `index,y_l,y_r,corrupted_left` is written
//! alongside for quick inspection.

use std::fmt::Write as _;
use std::path::Path;

use crate::competition::CorruptionParams;

use super::{DataError, Dataset, Example, Result, Split};

const MAGIC: &[u8; 4] = b"FCLD";
const VERSION: u16 = 1;

pub fn save_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&dataset.params.rho_l.to_le_bytes());
    buf.extend_from_slice(&dataset.params.rho_r.to_le_bytes());
    buf.extend_from_slice(&(dataset.params.num_classes as u32).to_le_bytes());
    buf.push(match dataset.split {
        Split::Train => 0,
        Split::Test => 1,
    });
    buf.extend_from_slice(&(dataset.height as u32).to_le_bytes());
    buf.extend_from_slice(&(dataset.width as u32).to_le_bytes());
    buf.extend_from_slice(&dataset.seed.to_le_bytes());
    buf.extend_from_slice(&(dataset.examples.len() as u64).to_le_bytes());
    for ex in &dataset.examples {
        for &p in &ex.x_l {
            buf.extend_from_slice(&p.to_le_bytes());
        }
        for &p in &ex.x_r {
            buf.extend_from_slice(&p.to_le_bytes());
        }
        buf.extend_from_slice(&(ex.y_l as u32).to_le_bytes());
        buf.extend_from_slice(&(ex.y_r as u32).to_le_bytes());
        buf.push(u8::from(ex.corrupted_left));
    }
    buf.extend_from_slice(&crc32fast::hash(&buf).to_le_bytes());
    std::fs::write(path, &buf)?;

    let mut manifest = String::from("index,y_l,y_r,corrupted_left\n");
    for (i, ex) in dataset.examples.iter().enumerate() {
        let _ = writeln!(manifest, "{i},{},{},{}", ex.y_l, ex.y_r, u8::from(ex.corrupted_left));
    }
    std::fs::write(manifest_path(path), manifest)?;
    Ok(())
}

pub fn manifest_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".manifest.csv");
    os.into()
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(DataError::Truncated {
                file: "dataset",
                needed: self.pos + n,
                got: self.bytes.len(),
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16_le(&mut self) -> Result<u16> {
        let b = self.take(2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32_le(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn u64_le(&mut self) -> Result<u64> {
        let b = self.take(8)?;
        Ok(u64::from_le_bytes(b.try_into().unwrap()))
    }

    fn f64_le(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64_le()?))
    }

    fn f32_vec(&mut self, n: usize) -> Result<Vec<f32>> {
        let b = self.take(n * 4)?;
        Ok(b.chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect())
    }
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let bytes = std::fs::read(path)?;
    if bytes.len() < 4 {
        return Err(DataError::Truncated { file: "dataset", needed: 4, got: bytes.len() });
    }
    if &bytes[..4] != MAGIC {
        let got = u32::from_le_bytes(bytes[..4].try_into().unwrap());
        let expected = u32::from_le_bytes(*MAGIC);
        return Err(DataError::BadMagic { file: "dataset", got, expected });
    }
    if bytes.len() < 8 {
        return Err(DataError::Truncated { file: "dataset", needed: 8, got: bytes.len() });
    }
    let payload_len = bytes.len() - 4;
    let stored = u32::from_le_bytes(bytes[payload_len..].try_into().unwrap());
    let computed = crc32fast::hash(&bytes[..payload_len]);
    if stored != computed {
        return Err(DataError::ChecksumMismatch { stored, computed });
    }

    let mut cur = Cursor { bytes: &bytes[..payload_len], pos: 4 };
    let version = cur.u16_le()?;
    if version != VERSION {
        return Err(DataError::UnsupportedVersion(version));
    }
    let rho_l = cur.f64_le()?;
    let rho_r = cur.f64_le()?;
    let num_classes = cur.u32_le()? as usize;
    let split = match cur.take(1)?[0] {
        0 => Split::Train,
        _ => Split::Test,
    };
    let height = cur.u32_le()? as usize;
    let width = cur.u32_le()? as usize;
    let seed = cur.u64_le()?;
    let count = cur.u64_le()? as usize;
    let params = CorruptionParams::new(rho_l, rho_r, num_classes)?;
    let hw = height * width;
    let mut examples = Vec::with_capacity(count);
    for _ in 0..count {
        let x_l = cur.f32_vec(hw)?;
        let x_r = cur.f32_vec(hw)?;
        let y_l = cur.u32_le()? as usize;
        let y_r = cur.u32_le()? as usize;
        let corrupted_left = cur.take(1)?[0] != 0;
        examples.push(Example { x_l, x_r, y_l, y_r, corrupted_left });
    }
    Ok(Dataset { examples, params, seed, split, height, width })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_dataset, synth_bank};

    fn sample_dataset() -> Dataset {
        let bank = synth_bank(4, 3, 10, 5).unwrap();
        let params = CorruptionParams::new(0.6, 0.4, 4).unwrap();
        gen_dataset(&bank, &params, 25, 77, Split::Test).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.fcld");
        let d = sample_dataset();
        save_dataset(&d, &path).unwrap();
        let back = load_dataset(&path).unwrap();
        assert_eq!(d, back);
    }

    #[test]
    fn manifest_lists_every_example() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.fcld");
        let d = sample_dataset();
        save_dataset(&d, &path).unwrap();
        let manifest = std::fs::read_to_string(manifest_path(&path)).unwrap();
        assert_eq!(manifest.lines().count(), d.len() + 1);
        assert!(manifest.starts_with("index,y_l,y_r,corrupted_left\n"));
    }

    #[test]
    fn corrupted_payload_fails_checksum() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.fcld");
        save_dataset(&sample_dataset(), &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0xff;
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(load_dataset(&path), Err(DataError::ChecksumMismatch { .. })));
    }

    #[test]
    fn missing_file_is_an_io_error() {
        assert!(matches!(load_dataset("/nonexistent/nowhere.fcld"), Err(DataError::Io(_))));
    }

    #[test]
    fn wrong_magic_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.fcld");
        std::fs::write(&path, b"NOPE00000000").unwrap();
        assert!(matches!(load_dataset(&path), Err(DataError::BadMagic { .. })));
    }
}
