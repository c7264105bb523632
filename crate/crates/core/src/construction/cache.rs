//! Binary and CSV serialization of quality tables.
//!
//! Binary layout (little-endian): magic `WPQ1`, 32-byte key, method tag `u8`
//! (0 exact, 1 quantized, 2 brute force), `mu` as `u64`, `n` as `u64`, then
//! six `f64` per index in the order `z_lower, z_upper, c_lower, c_upper,
//! gap_lower, gap_upper`.

use std::io::{Read, Write};

use sha2::{Digest, Sha256};

use crate::channel::ChannelDescriptor;
use crate::error::{Error, Result};

use super::quality::{BitChannelBounds, BitChannelQuality, QualityMethod};

const MAGIC: &[u8; 4] = b"WPQ1";

pub type CacheKey = [u8; 32];

/// SHA-256 over the canonical descriptor JSON, `m` and `mu`.
pub fn cache_key(descriptor: &ChannelDescriptor, m: u32, mu: usize) -> Result<CacheKey> {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(descriptor)?);
    h.update(m.to_le_bytes());
    h.update((mu as u64).to_le_bytes());
    Ok(h.finalize().into())
}

pub fn write_cache<W: Write>(mut w: W, key: &CacheKey, q: &BitChannelQuality) -> Result<()> {
    let (tag, mu) = match q.method() {
        QualityMethod::Exact => (0u8, 0u64),
        QualityMethod::Quantized { mu } => (1, mu as u64),
        QualityMethod::BruteForce => (2, 0),
    };
    w.write_all(MAGIC)?;
    w.write_all(key)?;
    w.write_all(&[tag])?;
    w.write_all(&mu.to_le_bytes())?;
    w.write_all(&(q.n() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(q.n() * 48);
    for b in q.bounds() {
        for x in [b.z_lower, b.z_upper, b.c_lower, b.c_upper, b.gap_lower, b.gap_upper] {
            buf.extend_from_slice(&x.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Reads a table; returns `None` when the stored key differs from `expected`.
pub fn read_cache<R: Read>(mut r: R, expected: &CacheKey) -> Result<Option<BitChannelQuality>> {
    let mut header = [0u8; 4 + 32 + 1 + 8 + 8];
    r.read_exact(&mut header)
        .map_err(|e| Error::Format(format!("truncated cache header: {e}")))?;
    if &header[..4] != MAGIC {
        return Err(Error::Format("not a quality cache file".into()));
    }
    if &header[4..36] != expected {
        return Ok(None);
    }
    let u64_at = |o: usize| u64::from_le_bytes(header[o..o + 8].try_into().expect("8 bytes"));
    let mu = u64_at(37) as usize;
    let n = u64_at(45) as usize;
    let method = match header[36] {
        0 => QualityMethod::Exact,
        1 => QualityMethod::Quantized { mu },
        2 => QualityMethod::BruteForce,
        t => return Err(Error::Format(format!("unknown method tag {t}"))),
    };
    let mut body = vec![0u8; n.checked_mul(48).ok_or_else(|| Error::Format("bad length".into()))?];
    r.read_exact(&mut body)
        .map_err(|e| Error::Format(format!("truncated cache body: {e}")))?;
    let bounds = body
        .chunks_exact(48)
        .map(|c| {
            let f = |k: usize| f64::from_le_bytes(c[8 * k..8 * k + 8].try_into().expect("8 bytes"));
            BitChannelBounds {
                z_lower: f(0),
                z_upper: f(1),
                c_lower: f(2),
                c_upper: f(3),
                gap_lower: f(4),
                gap_upper: f(5),
            }
        })
        .collect();
    BitChannelQuality::new(bounds, method).map(Some)
}

/// CSV with header `index,z_lower,z_upper,c_lower,c_upper`, 1-based indices.
pub fn write_csv<W: Write>(mut w: W, q: &BitChannelQuality) -> Result<()> {
    let mut out = String::from("index,z_lower,z_upper,c_lower,c_upper\n");
    for (i, b) in q.bounds().iter().enumerate() {
        out.push_str(&format!(
            "{},{:e},{:e},{:e},{:e}\n",
            i + 1,
            b.z_lower,
            b.z_upper,
            b.c_lower,
            b.c_upper
        ));
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::make_bsc;
    use crate::construction::evolve_quantized;

    #[test]
    fn round_trip() {
        let q = evolve_quantized(&make_bsc(0.1).unwrap(), 5, 8).unwrap();
        let key = cache_key(&ChannelDescriptor::bsc(0.1), 5, 8).unwrap();
        let mut buf = Vec::new();
        write_cache(&mut buf, &key, &q).unwrap();
        assert_eq!(read_cache(buf.as_slice(), &key).unwrap().unwrap(), q);

        let other = cache_key(&ChannelDescriptor::bsc(0.2), 5, 8).unwrap();
        assert!(read_cache(buf.as_slice(), &other).unwrap().is_none());
        assert!(read_cache(&buf[..50], &key).is_err());
        assert!(read_cache(&b"nope"[..], &key).is_err());
    }

    #[test]
    fn csv_layout() {
        let q = evolve_quantized(&make_bsc(0.0).unwrap(), 1, 4).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &q).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "index,z_lower,z_upper,c_lower,c_upper");
        assert_eq!(lines[1], "1,0e0,0e0,1e0,1e0");
        assert_eq!(lines.len(), 3);
    }
}
