use std::fs;
use std::path::Path;

use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"RDMV";
pub const FORMAT_VERSION: u32 = 1;
/// 32-bit little-endian IEEE-754 floats.
pub const DTYPE_F32_LE: u32 = 1;
pub const HEADER_LEN: usize = 20;

fn le_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap())
}

/// Parses an RDMV buffer: 20-byte header then `N·d` row-major f32 values.
/// The rows are returned as stored, without normalization.
pub fn decode_embeddings(bytes: &[u8]) -> Result<EmbeddingSet> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(Error::format("not an RDMV file"));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::format(format!(
            "truncated header: expected {HEADER_LEN} bytes, got {}",
            bytes.len()
        )));
    }
    let version = le_u32(bytes, 4);
    if version != FORMAT_VERSION {
        return Err(Error::format(format!("unsupported version {version}")));
    }
    let count = le_u32(bytes, 8) as usize;
    let dim = le_u32(bytes, 12) as usize;
    let dtype = le_u32(bytes, 16);
    if dtype != DTYPE_F32_LE {
        return Err(Error::format(format!("unsupported dtype tag {dtype}")));
    }
    if count == 0 || dim == 0 {
        return Err(Error::format(format!(
            "header declares an empty matrix (N={count}, d={dim})"
        )));
    }
    let expected = count
        .checked_mul(dim)
        .and_then(|v| v.checked_mul(4))
        .ok_or_else(|| Error::format("header dimensions overflow"))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != expected {
        return Err(Error::format(format!(
            "payload length mismatch: expected {expected} bytes, got {}",
            payload.len()
        )));
    }

    let mut data = Vec::with_capacity(count * dim);
    for (pos, chunk) in payload.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(Error::data(format!(
                "non-finite value in row {} (column {})",
                pos / dim,
                pos % dim
            )));
        }
        data.push(f64::from(v));
    }
    EmbeddingSet::new(count, dim, data)
}

pub fn read_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingSet> {
    decode_embeddings(&fs::read(path)?)
}

/// Serializes to RDMV, narrowing each value to f32.
pub fn encode_embeddings(e: &EmbeddingSet) -> Result<Vec<u8>> {
    let n = u32::try_from(e.count()).map_err(|_| Error::format("too many frames for RDMV"))?;
    let d = u32::try_from(e.dim()).map_err(|_| Error::format("dimension too large for RDMV"))?;
    let mut out = Vec::with_capacity(HEADER_LEN + e.as_slice().len() * 4);
    out.extend_from_slice(MAGIC);
    for v in [FORMAT_VERSION, n, d, DTYPE_F32_LE] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for &v in e.as_slice() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    Ok(out)
}

pub fn write_embeddings(e: &EmbeddingSet, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_embeddings(e)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(n: u32, d: u32) -> Vec<u8> {
        let mut b = MAGIC.to_vec();
        for v in [1u32, n, d, 1] {
            b.extend_from_slice(&v.to_le_bytes());
        }
        b
    }

    #[test]
    fn two_by_three() {
        let mut b = header(2, 3);
        for v in [1.0f32, 2.0, 3.0, -4.0, 0.5, 0.25] {
            b.extend_from_slice(&v.to_le_bytes());
        }
        assert_eq!(b.len(), 20 + 24);
        let e = decode_embeddings(&b).unwrap();
        assert_eq!((e.count(), e.dim()), (2, 3));
        assert_eq!(e.row(1), &[-4.0, 0.5, 0.25]);
    }

    #[test]
    fn bad_magic() {
        let mut b = header(1, 1);
        b[..4].copy_from_slice(b"XXXX");
        b.extend_from_slice(&1.0f32.to_le_bytes());
        let err = decode_embeddings(&b).unwrap_err();
        assert!(matches!(err, Error::Format(ref m) if m == "not an RDMV file"), "{err}");
    }

    #[test]
    fn truncated_payload_reports_byte_counts() {
        let mut b = header(2, 3);
        b.extend_from_slice(&[0u8; 23]);
        let msg = decode_embeddings(&b).unwrap_err().to_string();
        assert!(msg.contains("expected 24") && msg.contains("got 23"), "{msg}");
    }

    #[test]
    fn non_finite_names_row() {
        let mut b = header(2, 1);
        b.extend_from_slice(&1.0f32.to_le_bytes());
        b.extend_from_slice(&f32::INFINITY.to_le_bytes());
        let err = decode_embeddings(&b).unwrap_err();
        assert!(matches!(err, Error::Data(ref m) if m.contains("row 1")), "{err}");
    }

    #[test]
    fn wrong_version_and_dtype() {
        let mut b = header(1, 1);
        b[4] = 2;
        b.extend_from_slice(&1.0f32.to_le_bytes());
        assert!(decode_embeddings(&b).is_err());
        let mut b = header(1, 1);
        b[16] = 2;
        b.extend_from_slice(&1.0f32.to_le_bytes());
        assert!(decode_embeddings(&b).is_err());
    }

    #[test]
    fn encode_decode() {
        let e = EmbeddingSet::from_rows(&[[0.5, -1.25], [3.0, 0.0]]).unwrap();
        let back = decode_embeddings(&encode_embeddings(&e).unwrap()).unwrap();
        assert_eq!(back, e);
    }
}
