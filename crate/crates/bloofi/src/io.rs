//! Bit-exact serialization of filter collections, so sites can ship their
//! filters to a coordinator as files and benchmarks can reuse inputs.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic        4 bytes  "BLMF"
//! version      u16      1
//! m            u64      filter length in bits
//! k            u32      hash function count
//! multipliers  k x u64
//! filter_count u32
//! records      filter_count x { filter_id: u64, words: ceil(m/64) x u64 }
//! ```
//!
//! One file carries exactly one hash family, so everything in it can be
//! indexed together; padding bits beyond `m` in the last word of each
//! record must be zero and are checked on both read and write.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::bitvec::{BitVector, WORD_BITS};
use crate::error::{Error, Result};
use crate::filter::BloomFilter;
use crate::hash::HashFamily;

const MAGIC: [u8; 4] = *b"BLMF";
const VERSION: u16 = 1;

/// What a collection file holds: the shared hash family and the
/// identified filters built with it.
pub type Collection = (Arc<HashFamily>, Vec<(u64, BloomFilter)>);

/// Header + record bytes for a collection of `filter_count` filters of
/// `m` bits under `k` hash functions.
pub fn file_size(m: usize, k: usize, filter_count: usize) -> usize {
    let header = 4 + 2 + 8 + 4 + 8 * k + 4;
    header + filter_count * (8 + 8 * m.div_ceil(WORD_BITS))
}

pub fn write_collection(
    path: impl AsRef<Path>,
    family: &HashFamily,
    filters: &[(u64, BloomFilter)],
) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_collection_to(&mut out, family, filters)?;
    out.flush()?;
    Ok(())
}

pub fn read_collection(path: impl AsRef<Path>) -> Result<Collection> {
    let mut input = BufReader::new(File::open(path)?);
    read_collection_from(&mut input)
}

pub fn write_collection_to<W: Write>(
    out: &mut W,
    family: &HashFamily,
    filters: &[(u64, BloomFilter)],
) -> Result<()> {
    if filters.len() > u32::MAX as usize {
        return Err(Error::InvalidParameter("collection too large for the format".into()));
    }
    for (_, f) in filters {
        if f.family().as_ref() != family {
            return Err(Error::FamilyMismatch);
        }
    }
    out.write_all(&MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(family.m() as u64).to_le_bytes())?;
    out.write_all(&(family.k() as u32).to_le_bytes())?;
    for &a in family.multipliers() {
        out.write_all(&a.to_le_bytes())?;
    }
    out.write_all(&(filters.len() as u32).to_le_bytes())?;
    for (id, f) in filters {
        out.write_all(&id.to_le_bytes())?;
        for &w in f.bits().words() {
            out.write_all(&w.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_collection_from<R: Read>(input: &mut R) -> Result<Collection> {
    let mut magic = [0u8; 4];
    read_payload(input, &mut magic, "magic")?;
    if magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:02x?}")));
    }
    let version = read_u16(input)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let m = read_u64(input)? as usize;
    let k = read_u32(input)? as usize;
    let mut multipliers = Vec::with_capacity(k);
    for _ in 0..k {
        multipliers.push(read_u64(input)?);
    }
    let family = Arc::new(
        HashFamily::with_multipliers(m, multipliers)
            .map_err(|e| Error::Corrupt(format!("invalid hash family: {e}")))?,
    );
    let filter_count = read_u32(input)? as usize;
    let words_per_filter = m.div_ceil(WORD_BITS);
    let mut filters = Vec::with_capacity(filter_count);
    for _ in 0..filter_count {
        let id = read_u64(input)?;
        let mut words = Vec::with_capacity(words_per_filter);
        for _ in 0..words_per_filter {
            words.push(read_u64(input)?);
        }
        let bits = BitVector::from_words(words, m)?;
        filters.push((id, BloomFilter::from_bits(family.clone(), bits)?));
    }
    Ok((family, filters))
}

fn read_payload<R: Read>(input: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    input.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::Corrupt(format!("truncated while reading {what}"))
        } else {
            Error::Io(e)
        }
    })
}

fn read_u16<R: Read>(input: &mut R) -> Result<u16> {
    let mut b = [0u8; 2];
    read_payload(input, &mut b, "u16")?;
    Ok(u16::from_le_bytes(b))
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    read_payload(input, &mut b, "u32")?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(input: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    read_payload(input, &mut b, "u64")?;
    Ok(u64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn sample(seed: u64, count: usize) -> (Arc<HashFamily>, Vec<(u64, BloomFilter)>) {
        let family = Arc::new(HashFamily::generate(4, 320, seed).unwrap());
        let mut rng = StdRng::seed_from_u64(seed);
        let filters = (0..count as u64)
            .map(|id| {
                let mut f = BloomFilter::new(family.clone());
                for _ in 0..rng.gen_range(0..12) {
                    f.add(rng.gen());
                }
                (id, f)
            })
            .collect();
        (family, filters)
    }

    fn write_to_vec(family: &HashFamily, filters: &[(u64, BloomFilter)]) -> Vec<u8> {
        let mut buf = Vec::new();
        write_collection_to(&mut buf, family, filters).unwrap();
        buf
    }

    #[test]
    fn round_trip_is_byte_identical() {
        for count in [0usize, 1, 7, 64, 65] {
            let (family, filters) = sample(count as u64 + 100, count);
            let bytes = write_to_vec(&family, &filters);
            let (family2, filters2) = read_collection_from(&mut bytes.as_slice()).unwrap();
            assert_eq!(family.as_ref(), family2.as_ref());
            assert_eq!(filters, filters2);
            let bytes2 = write_to_vec(&family2, &filters2);
            assert_eq!(bytes, bytes2, "collection of {count} filters");
        }
    }

    #[test]
    fn file_size_is_exact() {
        let (family, filters) = sample(9, 13);
        let bytes = write_to_vec(&family, &filters);
        assert_eq!(bytes.len(), file_size(family.m(), family.k(), filters.len()));
        let (family0, _) = sample(10, 0);
        let empty = write_to_vec(&family0, &[]);
        assert_eq!(empty.len(), file_size(family0.m(), family0.k(), 0));
    }

    #[test]
    fn rejects_bad_magic_and_version() {
        let (family, filters) = sample(11, 3);
        let mut bytes = write_to_vec(&family, &filters);
        let mut broken = bytes.clone();
        broken[0] = b'X';
        assert!(matches!(
            read_collection_from(&mut broken.as_slice()),
            Err(Error::Format(_))
        ));
        bytes[4] = 0xFF; // version low byte
        assert!(matches!(read_collection_from(&mut bytes.as_slice()), Err(Error::Format(_))));
    }

    #[test]
    fn rejects_truncation() {
        let (family, filters) = sample(12, 5);
        let bytes = write_to_vec(&family, &filters);
        for cut in [bytes.len() - 1, bytes.len() - 9, 10, 3] {
            let slice = &bytes[..cut];
            assert!(
                matches!(read_collection_from(&mut &slice[..]), Err(Error::Corrupt(_))),
                "cut at {cut}"
            );
        }
    }

    #[test]
    fn rejects_nonzero_padding() {
        // m = 300 leaves 20 padding bits in each record's last word.
        let family = Arc::new(HashFamily::with_multipliers(300, vec![3]).unwrap());
        let f = BloomFilter::new(family.clone());
        let mut bytes = write_to_vec(&family, &[(1, f)]);
        let last = bytes.len() - 1;
        bytes[last] = 0x80;
        assert!(matches!(read_collection_from(&mut bytes.as_slice()), Err(Error::Corrupt(_))));
    }

    #[test]
    fn rejects_family_mismatch_on_write() {
        let (family_a, _) = sample(14, 0);
        let (family_b, filters_b) = sample(15, 2);
        let mut buf = Vec::new();
        assert!(matches!(
            write_collection_to(&mut buf, &family_a, &filters_b),
            Err(Error::FamilyMismatch)
        ));
        let _ = family_b;
    }

    #[test]
    fn path_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("collection.blmf");
        let (family, filters) = sample(16, 20);
        write_collection(&path, &family, &filters).unwrap();
        let (family2, filters2) = read_collection(&path).unwrap();
        assert_eq!(family.as_ref(), family2.as_ref());
        assert_eq!(filters, filters2);
    }
}
