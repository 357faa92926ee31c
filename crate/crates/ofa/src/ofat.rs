//! `OFAT` binary matrix format.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "OFAT"
//!      4     4  format version, u32 LE (= 1)
//!      8     8  rows, u64 LE
//!     16     8  cols, u64 LE
//!     24     1  dtype code (1 = f32)
//!     25     *  rows * cols little-endian f32, row-major
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ofa_core::DenseMatrix;

use crate::error::{Error, Result, ResultExt};

pub const MAGIC: &[u8; 4] = b"OFAT";
pub const FORMAT_VERSION: u32 = 1;
pub const DTYPE_F32: u8 = 1;
pub const HEADER_LEN: u64 = 25;

/// Payload size in bytes declared by a `rows × cols` f32 header.
pub fn payload_len(rows: u64, cols: u64) -> Option<u64> {
    rows.checked_mul(cols)?.checked_mul(4)
}

pub fn write_matrix<W: Write>(m: &DenseMatrix, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(m.rows() as u64).to_le_bytes())?;
    w.write_all(&(m.cols() as u64).to_le_bytes())?;
    w.write_all(&[DTYPE_F32])?;
    let mut buf = Vec::with_capacity(1 << 16);
    for chunk in m.as_slice().chunks(1 << 14) {
        buf.clear();
        for v in chunk {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok(())
}

fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(filled)
}

pub fn read_matrix<R: Read>(mut r: R) -> Result<DenseMatrix> {
    let mut header = [0u8; HEADER_LEN as usize];
    let got = read_full(&mut r, &mut header)?;
    if got < 4 || &header[..4] != MAGIC {
        return Err(Error::format(0, "bad magic, expected \"OFAT\""));
    }
    if got < header.len() {
        return Err(Error::format(got as u64, "truncated header"));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(Error::format(4, format!("unsupported format version {version}")));
    }
    let rows = u64::from_le_bytes(header[8..16].try_into().unwrap());
    let cols = u64::from_le_bytes(header[16..24].try_into().unwrap());
    if header[24] != DTYPE_F32 {
        return Err(Error::format(24, format!("unsupported dtype code {}", header[24])));
    }
    let len = payload_len(rows, cols)
        .filter(|&l| usize::try_from(l).is_ok())
        .ok_or_else(|| Error::format(8, format!("shape {rows}x{cols} too large")))?;

    let n = (len / 4) as usize;
    let mut data = Vec::with_capacity(n);
    let mut buf = vec![0u8; 1 << 16];
    let mut remaining = len;
    while remaining > 0 {
        let want = remaining.min(buf.len() as u64) as usize;
        let got = read_full(&mut r, &mut buf[..want])?;
        if got < want {
            let offset = HEADER_LEN + (len - remaining) + got as u64;
            return Err(Error::format(
                offset,
                format!("truncated payload: header declares {len} bytes, found {}", len - remaining + got as u64),
            ));
        }
        for chunk in buf[..want].chunks_exact(4) {
            let v = f32::from_le_bytes(chunk.try_into().unwrap());
            if !v.is_finite() {
                let offset = HEADER_LEN + 4 * data.len() as u64;
                return Err(Error::format(offset, format!("non-finite value {v}")));
            }
            data.push(v);
        }
        remaining -= want as u64;
    }
    let mut probe = [0u8; 1];
    if read_full(&mut r, &mut probe)? != 0 {
        return Err(Error::format(
            HEADER_LEN + len,
            format!("payload longer than the {len} bytes declared by the header"),
        ));
    }
    Ok(DenseMatrix::new(rows as usize, cols as usize, data)?)
}

pub fn save_matrix(m: &DenseMatrix, path: &Path) -> Result<()> {
    let file = File::create(path).in_file(path)?;
    write_matrix(m, BufWriter::new(file)).in_file(path)
}

pub fn load_matrix(path: &Path) -> Result<DenseMatrix> {
    let file = File::open(path).in_file(path)?;
    read_matrix(BufReader::new(file)).in_file(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bytes(m: &DenseMatrix) -> Vec<u8> {
        let mut out = Vec::new();
        write_matrix(m, &mut out).unwrap();
        out
    }

    #[test]
    fn round_trip_2x3() {
        let m = DenseMatrix::new(2, 3, vec![1.0, -2.5, 0.0, 3.25, -0.0, 1e-38]).unwrap();
        let b = bytes(&m);
        assert_eq!(b.len(), 25 + 24);
        assert_eq!(&b[..4], b"OFAT");
        let back = read_matrix(&b[..]).unwrap();
        assert_eq!(bytes(&back), b);
    }

    #[test]
    fn header_layout() {
        let b = bytes(&DenseMatrix::zeros(3, 2));
        assert_eq!(u32::from_le_bytes(b[4..8].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(b[8..16].try_into().unwrap()), 3);
        assert_eq!(u64::from_le_bytes(b[16..24].try_into().unwrap()), 2);
        assert_eq!(b[24], 1);
    }

    #[test]
    fn declared_payload_at_full_scale() {
        assert_eq!(payload_len(401_000, 768), Some(1_231_872_000));
        assert_eq!(payload_len(u64::MAX, 2), None);
    }

    #[test]
    fn truncated_payload() {
        let mut b = bytes(&DenseMatrix::zeros(2, 3));
        b.truncate(b.len() - 2);
        match read_matrix(&b[..]) {
            Err(Error::Format { offset, message }) => {
                assert_eq!(offset, 25 + 22);
                assert!(message.contains("truncated"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn trailing_bytes() {
        let mut b = bytes(&DenseMatrix::zeros(1, 1));
        b.push(0);
        assert!(matches!(read_matrix(&b[..]), Err(Error::Format { offset: 29, .. })));
    }

    #[test]
    fn bad_magic_and_version() {
        let mut b = bytes(&DenseMatrix::zeros(1, 1));
        b[0] = b'X';
        assert!(matches!(read_matrix(&b[..]), Err(Error::Format { offset: 0, .. })));
        let mut b = bytes(&DenseMatrix::zeros(1, 1));
        b[4] = 9;
        assert!(matches!(read_matrix(&b[..]), Err(Error::Format { offset: 4, .. })));
        let mut b = bytes(&DenseMatrix::zeros(1, 1));
        b[24] = 2;
        assert!(matches!(read_matrix(&b[..]), Err(Error::Format { offset: 24, .. })));
        assert!(matches!(read_matrix(&b"OF"[..]), Err(Error::Format { offset: 0, .. })));
    }

    #[test]
    fn non_finite_is_located() {
        let mut b = bytes(&DenseMatrix::zeros(2, 2));
        b[25 + 8..25 + 12].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(read_matrix(&b[..]), Err(Error::Format { offset: 33, .. })));
        b[25 + 8..25 + 12].copy_from_slice(&f32::NEG_INFINITY.to_le_bytes());
        assert!(matches!(read_matrix(&b[..]), Err(Error::Format { offset: 33, .. })));
    }
}
