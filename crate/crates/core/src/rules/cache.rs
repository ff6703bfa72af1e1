//! On-disk slice cache.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "BSEQ1"                      5 bytes
//! rule_id length               u32
//! rule_id                      UTF-8
//! x                            u64
//! count                        u64
//! members                      count × u64, ascending
//! ```

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use super::{generate, IntervalRule, SequenceSlice};
use crate::error::{Error, Result};
use crate::numtheory::SieveTable;

pub const CACHE_MAGIC: &[u8; 5] = b"BSEQ1";

pub fn write_slice<W: Write>(slice: &SequenceSlice, mut w: W) -> Result<()> {
    let id = slice.rule_id().as_bytes();
    let mut buf = Vec::with_capacity(5 + 4 + id.len() + 16 + 8 * slice.members().len());
    buf.extend_from_slice(CACHE_MAGIC);
    buf.extend_from_slice(&(id.len() as u32).to_le_bytes());
    buf.extend_from_slice(id);
    buf.extend_from_slice(&slice.limit().to_le_bytes());
    buf.extend_from_slice(&slice.count().to_le_bytes());
    for &m in slice.members() {
        buf.extend_from_slice(&m.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_slice<R: Read>(mut r: R) -> Result<SequenceSlice> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let mut cur = Cursor { bytes: &bytes, pos: 0 };
    if cur.take(5)? != CACHE_MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    let id_len = u32::from_le_bytes(cur.take(4)?.try_into().unwrap()) as usize;
    let rule_id = std::str::from_utf8(cur.take(id_len)?)
        .map_err(|_| Error::Cache("rule id is not UTF-8".into()))?
        .to_string();
    let x = cur.u64()?;
    let count = cur.u64()?;
    let remaining = (bytes.len() - cur.pos) as u64;
    if count.checked_mul(8) != Some(remaining) {
        return Err(Error::Cache(format!(
            "count {count} disagrees with {remaining} payload bytes"
        )));
    }
    let members = (0..count).map(|_| cur.u64()).collect::<Result<Vec<_>>>()?;
    SequenceSlice::from_members(rule_id, x, members)
        .map_err(|e| Error::Cache(format!("invalid slice: {e}")))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Cache("truncated file".into()))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Directory of slice files keyed by `(rule_id, x)`.
#[derive(Debug, Clone)]
pub struct SliceCache {
    dir: PathBuf,
}

/// Where a slice came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CacheOutcome {
    Hit,
    Miss,
    /// The file existed but was unusable; the message says why.
    Rejected(String),
}

impl SliceCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        SliceCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, rule_id: &str, x: u64) -> PathBuf {
        let stem: String = rule_id
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
            .collect();
        self.dir.join(format!("{stem}_x{x}.bseq"))
    }

    pub fn load(&self, rule_id: &str, x: u64) -> (Option<SequenceSlice>, CacheOutcome) {
        let path = self.path_for(rule_id, x);
        let file = match fs::File::open(&path) {
            Ok(f) => f,
            Err(_) => return (None, CacheOutcome::Miss),
        };
        match read_slice(std::io::BufReader::new(file)) {
            Ok(slice) if slice.rule_id() == rule_id && slice.limit() == x => {
                (Some(slice), CacheOutcome::Hit)
            }
            Ok(slice) => (
                None,
                CacheOutcome::Rejected(format!(
                    "{} holds ({}, {}), wanted ({rule_id}, {x})",
                    path.display(),
                    slice.rule_id(),
                    slice.limit()
                )),
            ),
            Err(e) => (
                None,
                CacheOutcome::Rejected(format!("{}: {e}", path.display())),
            ),
        }
    }

    pub fn store(&self, slice: &SequenceSlice) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path_for(slice.rule_id(), slice.limit());
        let tmp = path.with_extension("bseq.tmp");
        {
            let f = fs::File::create(&tmp)?;
            let mut w = std::io::BufWriter::new(f);
            write_slice(slice, &mut w)?;
            w.flush()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(path)
    }

    /// Cached slice if valid, otherwise generate and store.
    pub fn load_or_generate(
        &self,
        rule: &IntervalRule,
        x: u64,
        sieve: &SieveTable,
    ) -> Result<(SequenceSlice, CacheOutcome)> {
        let (cached, outcome) = self.load(rule.id(), x);
        if let Some(slice) = cached {
            return Ok((slice, outcome));
        }
        let slice = generate(rule, x, sieve)?;
        self.store(&slice)?;
        Ok((slice, outcome))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SequenceSlice {
        SequenceSlice::from_members("t-dense:5/2", 30, vec![1, 2, 4, 6, 30]).unwrap()
    }

    #[test]
    fn byte_layout() {
        let mut buf = Vec::new();
        write_slice(&sample(), &mut buf).unwrap();
        let mut expected = b"BSEQ1".to_vec();
        expected.extend_from_slice(&11u32.to_le_bytes());
        expected.extend_from_slice(b"t-dense:5/2");
        expected.extend_from_slice(&30u64.to_le_bytes());
        expected.extend_from_slice(&5u64.to_le_bytes());
        for m in [1u64, 2, 4, 6, 30] {
            expected.extend_from_slice(&m.to_le_bytes());
        }
        assert_eq!(buf, expected);
        assert_eq!(read_slice(buf.as_slice()).unwrap(), sample());
    }

    #[test]
    fn corrupt_inputs_rejected() {
        let mut buf = Vec::new();
        write_slice(&sample(), &mut buf).unwrap();
        let mut bad_magic = buf.clone();
        bad_magic[0] = b'X';
        assert!(matches!(read_slice(bad_magic.as_slice()), Err(Error::Cache(_))));
        for cut in [3, 9, 20, buf.len() - 1] {
            assert!(matches!(read_slice(&buf[..cut]), Err(Error::Cache(_))), "cut {cut}");
        }
        let mut extra = buf.clone();
        extra.push(0);
        assert!(read_slice(extra.as_slice()).is_err());
    }
}
