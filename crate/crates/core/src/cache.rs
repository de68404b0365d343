//! Optional on-disk persistence of multiplication-matrix caches: a plain
//! versioned binary file per algebra fingerprint. Corrupt or mismatched
//! files are ignored, never trusted.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use crate::exactlin::{Matrix, Scalar};
use crate::pbw::Uea;

const MAGIC: &[u8; 4] = b"WPMM";
const VERSION: u32 = 1;

pub fn cache_file(dir: &Path, uea: &Uea) -> PathBuf {
    dir.join(format!(
        "mulmat-v{VERSION}-{}.bin",
        uea.algebra().fingerprint()
    ))
}

/// Loads persisted multiplication matrices into the cache. Returns the
/// number of entries imported; unreadable files import nothing.
pub fn load(uea: &Uea, dir: &Path) -> usize {
    let path = cache_file(dir, uea);
    let Ok(bytes) = fs::read(&path) else {
        return 0;
    };
    match parse(&bytes) {
        Some(entries) => {
            let count = entries.len();
            uea.import_mul_mats(entries);
            count
        }
        None => 0,
    }
}

/// Writes the current multiplication-matrix cache next to earlier entries.
pub fn save(uea: &Uea, dir: &Path) -> io::Result<usize> {
    fs::create_dir_all(dir)?;
    let entries = uea.export_mul_mats();
    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(entries.len() as u32).to_le_bytes());
    for ((a, b), m) in &entries {
        buf.extend_from_slice(&a.to_le_bytes());
        buf.extend_from_slice(&b.to_le_bytes());
        buf.extend_from_slice(&(m.rows() as u32).to_le_bytes());
        buf.extend_from_slice(&(m.cols() as u32).to_le_bytes());
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                let s = m.get(r, c).to_string();
                buf.extend_from_slice(&(s.len() as u32).to_le_bytes());
                buf.extend_from_slice(s.as_bytes());
            }
        }
    }
    let path = cache_file(dir, uea);
    let mut file = fs::File::create(&path)?;
    file.write_all(&buf)?;
    Ok(entries.len())
}

fn parse(bytes: &[u8]) -> Option<Vec<((u32, u32), Matrix)>> {
    let mut cursor = io::Cursor::new(bytes);
    let mut magic = [0u8; 4];
    cursor.read_exact(&mut magic).ok()?;
    if &magic != MAGIC {
        return None;
    }
    let version = read_u32(&mut cursor)?;
    if version != VERSION {
        return None;
    }
    let count = read_u32(&mut cursor)?;
    let mut entries = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let a = read_u32(&mut cursor)?;
        let b = read_u32(&mut cursor)?;
        let rows = read_u32(&mut cursor)? as usize;
        let cols = read_u32(&mut cursor)? as usize;
        let mut m = Matrix::zero(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                let len = read_u32(&mut cursor)? as usize;
                let mut s = vec![0u8; len];
                cursor.read_exact(&mut s).ok()?;
                let text = String::from_utf8(s).ok()?;
                let scalar: Scalar = text.parse().ok()?;
                m.set(r, c, scalar);
            }
        }
        entries.push(((a, b), m));
    }
    Some(entries)
}

fn read_u32(cursor: &mut io::Cursor<&[u8]>) -> Option<u32> {
    let mut buf = [0u8; 4];
    cursor.read_exact(&mut buf).ok()?;
    Some(u32::from_le_bytes(buf))
}
