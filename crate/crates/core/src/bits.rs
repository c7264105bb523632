//! Packed on-disk formats.
//!
//! Bits: 8-byte little-endian bit count, then the bits packed LSB-first
//! within each byte. Symbols: 8-byte little-endian count, then one
//! little-endian `u16` per symbol.

use crate::error::{Error, Result};

const HEADER: usize = 8;

fn read_header(bytes: &[u8]) -> Result<(usize, &[u8])> {
    if bytes.len() < HEADER {
        return Err(Error::Format(format!(
            "packed data needs an {HEADER}-byte length header, got {} bytes",
            bytes.len()
        )));
    }
    let (head, body) = bytes.split_at(HEADER);
    let count = u64::from_le_bytes(head.try_into().expect("8 bytes"));
    let count = usize::try_from(count)
        .map_err(|_| Error::Format(format!("length header {count} does not fit in memory")))?;
    Ok((count, body))
}

/// Packs 0/1 values. Any nonzero byte counts as 1.
pub fn pack_bits(bits: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER + bits.len().div_ceil(8));
    out.extend_from_slice(&(bits.len() as u64).to_le_bytes());
    for chunk in bits.chunks(8) {
        let byte = chunk
            .iter()
            .enumerate()
            .fold(0u8, |acc, (j, &b)| acc | (((b != 0) as u8) << j));
        out.push(byte);
    }
    out
}

pub fn unpack_bits(bytes: &[u8]) -> Result<Vec<u8>> {
    let (count, body) = read_header(bytes)?;
    let expected = count.div_ceil(8);
    if body.len() != expected {
        return Err(Error::Format(format!(
            "{count} bits need {expected} payload bytes, got {}",
            body.len()
        )));
    }
    Ok((0..count).map(|i| (body[i / 8] >> (i % 8)) & 1).collect())
}

pub fn pack_symbols(symbols: &[usize]) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(HEADER + 2 * symbols.len());
    out.extend_from_slice(&(symbols.len() as u64).to_le_bytes());
    for &s in symbols {
        let s = u16::try_from(s)
            .map_err(|_| Error::Format(format!("symbol {s} exceeds the u16 range")))?;
        out.extend_from_slice(&s.to_le_bytes());
    }
    Ok(out)
}

pub fn unpack_symbols(bytes: &[u8]) -> Result<Vec<usize>> {
    let (count, body) = read_header(bytes)?;
    if body.len() != 2 * count {
        return Err(Error::Format(format!(
            "{count} symbols need {} payload bytes, got {}",
            2 * count,
            body.len()
        )));
    }
    Ok(body
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]) as usize)
        .collect())
}
