//! On-disk shard format and byte framing.
//!
//! A shard is a 41-byte header followed by `u32` little-endian symbols:
//!
//! ```text
//! "EMSR" | version u8 | p n k t q N K block payload_len (u32 LE each) | payload
//! ```
//!
//! The payload is one block of `N * ell` symbols per stripe.

use std::fs;
use std::path::{Path, PathBuf};

use emsr_core::{EmsrCode, EmsrParams, FieldElement, InnerParams, OuterParams};

use crate::error::{CliError, CliResult};

pub const MAGIC: &[u8; 4] = b"EMSR";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 4 + 1 + 9 * 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShardHeader {
    pub p: u32,
    pub n: u32,
    pub k: u32,
    pub t: u32,
    pub q: u32,
    pub big_n: u32,
    pub big_k: u32,
    pub block: u32,
    pub payload_len: u32,
}

impl ShardHeader {
    pub fn for_code(code: &EmsrCode, block: usize, payload_len: usize) -> Self {
        let p = code.params();
        ShardHeader {
            p: code.field().modulus(),
            n: p.inner.n as u32,
            k: p.inner.k as u32,
            t: p.inner.t as u32,
            q: p.outer.q,
            big_n: p.outer.length as u32,
            big_k: p.outer.dimension as u32,
            block: block as u32,
            payload_len: payload_len as u32,
        }
    }

    pub fn params(&self, epsilon: f64) -> EmsrParams {
        EmsrParams {
            inner: InnerParams {
                n: self.n as usize,
                k: self.k as usize,
                t: self.t as usize,
            },
            outer: OuterParams {
                q: self.q,
                length: self.big_n as usize,
                dimension: self.big_k as usize,
            },
            epsilon,
            modulus: Some(self.p as u64),
        }
    }

    /// Equal up to the block index.
    pub fn same_stripe_set(&self, other: &ShardHeader) -> bool {
        ShardHeader {
            block: other.block,
            ..*self
        } == *other
    }

    fn fields(&self) -> [u32; 9] {
        [
            self.p,
            self.n,
            self.k,
            self.t,
            self.q,
            self.big_n,
            self.big_k,
            self.block,
            self.payload_len,
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShardFile {
    pub header: ShardHeader,
    pub payload: Vec<FieldElement>,
}

impl ShardFile {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * self.payload.len());
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        for v in self.header.fields() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for s in &self.payload {
            out.extend_from_slice(&s.value().to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> CliResult<Self> {
        let corrupt = |reason: String| CliError::CorruptShard {
            path: path.to_path_buf(),
            reason,
        };
        if bytes.len() < HEADER_LEN {
            return Err(corrupt(format!(
                "{} bytes is shorter than the header",
                bytes.len()
            )));
        }
        if &bytes[..4] != MAGIC {
            return Err(corrupt("bad magic".into()));
        }
        if bytes[4] != VERSION {
            return Err(corrupt(format!("unsupported version {}", bytes[4])));
        }
        let word = |i: usize| {
            let at = 5 + 4 * i;
            u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"))
        };
        let header = ShardHeader {
            p: word(0),
            n: word(1),
            k: word(2),
            t: word(3),
            q: word(4),
            big_n: word(5),
            big_k: word(6),
            block: word(7),
            payload_len: word(8),
        };
        let body = &bytes[HEADER_LEN..];
        if body.len() != 4 * header.payload_len as usize {
            return Err(corrupt(format!(
                "header declares {} symbols, file holds {} bytes of payload",
                header.payload_len,
                body.len()
            )));
        }
        let payload = body
            .chunks_exact(4)
            .map(|c| {
                let v = u32::from_le_bytes(c.try_into().expect("4 bytes"));
                if v >= header.p {
                    Err(corrupt(format!(
                        "symbol {v} not below modulus {}",
                        header.p
                    )))
                } else {
                    Ok(FieldElement::from_raw(v))
                }
            })
            .collect::<CliResult<_>>()?;
        Ok(ShardFile { header, payload })
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let bytes = fs::read(path).map_err(CliError::io(format!("reading {}", path.display())))?;
        ShardFile::from_bytes(&bytes, path)
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        fs::write(path, self.to_bytes())
            .map_err(CliError::io(format!("writing {}", path.display())))
    }
}

pub fn shard_path(dir: &Path, block: usize) -> PathBuf {
    dir.join(format!("shard_{block:04}.emsr"))
}

/// A directory of shards sharing one code. Missing blocks are `None`.
pub struct ShardSet {
    pub header: ShardHeader,
    pub shards: Vec<Option<ShardFile>>,
}

impl ShardSet {
    pub fn load(dir: &Path) -> CliResult<Self> {
        let mut found = Vec::new();
        let entries =
            fs::read_dir(dir).map_err(CliError::io(format!("listing {}", dir.display())))?;
        for entry in entries {
            let path = entry.map_err(CliError::io("listing shards"))?.path();
            let is_shard = path
                .file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("shard_") && n.ends_with(".emsr"));
            if is_shard {
                found.push((ShardFile::read(&path)?, path));
            }
        }
        found.sort_by_key(|(s, _)| s.header.block);
        let header = found
            .first()
            .map(|(s, _)| s.header)
            .ok_or_else(|| CliError::BadArguments(format!("no shards in {}", dir.display())))?;
        let blocks = (header.q as usize)
            .checked_pow(header.big_k)
            .filter(|&m| m <= emsr_core::outer::MAX_ENUMERATED)
            .ok_or_else(|| CliError::InconsistentShards("header implies too many blocks".into()))?;
        let mut shards: Vec<Option<ShardFile>> = (0..blocks).map(|_| None).collect();
        for (shard, path) in found {
            if !header.same_stripe_set(&shard.header) {
                return Err(CliError::InconsistentShards(format!(
                    "{} has a different header",
                    path.display()
                )));
            }
            let b = shard.header.block as usize;
            if b >= blocks {
                return Err(CliError::CorruptShard {
                    path,
                    reason: format!("block {b} out of range for {blocks} blocks"),
                });
            }
            if shard_path(dir, b) != path {
                return Err(CliError::InconsistentShards(format!(
                    "{} holds block {b}",
                    path.display()
                )));
            }
            shards[b] = Some(shard);
        }
        Ok(ShardSet { header, shards })
    }

    /// Rebuilds the code and checks the payload shape.
    pub fn code(&self, epsilon: f64) -> CliResult<(EmsrCode, usize)> {
        let code = EmsrCode::build(&self.header.params(epsilon))?;
        let len = self.header.payload_len as usize;
        if len == 0 || !len.is_multiple_of(code.block_len()) {
            return Err(CliError::InconsistentShards(format!(
                "payload of {len} symbols is not a positive multiple of the block length {}",
                code.block_len()
            )));
        }
        let stripes = len / code.block_len();
        Ok((code, stripes))
    }
}

/// Bits carried by one symbol: `floor(log2 p)`.
pub fn bits_per_symbol(p: u32) -> u32 {
    31 - p.leading_zeros()
}

/// Packs `data` plus an 8-byte length trailer into whole stripes of
/// `message_len` symbols, zero-padding in between.
pub fn frame(data: &[u8], p: u32, message_len: usize) -> Vec<FieldElement> {
    let bits = bits_per_symbol(p) as usize;
    let stripe_bytes = message_len * bits / 8;
    assert!(stripe_bytes > 0, "stripe too small to hold a byte");
    let stripes = (data.len() + 8).div_ceil(stripe_bytes).max(1);
    let symbols = stripes * message_len;
    let cap = symbols * bits / 8;

    let mut buf = vec![0u8; cap];
    buf[..data.len()].copy_from_slice(data);
    buf[cap - 8..].copy_from_slice(&(data.len() as u64).to_le_bytes());

    let mask = (1u64 << bits) - 1;
    let mut out = Vec::with_capacity(symbols);
    let (mut acc, mut held) = (0u64, 0usize);
    let mut bytes = buf.into_iter();
    for _ in 0..symbols {
        while held < bits {
            acc |= (bytes.next().unwrap_or(0) as u64) << held;
            held += 8;
        }
        out.push(FieldElement::from_raw((acc & mask) as u32));
        acc >>= bits;
        held -= bits;
    }
    out
}

/// Inverse of [`frame`].
pub fn unframe(symbols: &[FieldElement], p: u32) -> CliResult<Vec<u8>> {
    let bits = bits_per_symbol(p) as usize;
    let cap = symbols.len() * bits / 8;
    let mut buf = Vec::with_capacity(cap);
    let (mut acc, mut held) = (0u64, 0usize);
    for s in symbols {
        if (s.value() as u64) >> bits != 0 {
            return Err(CliError::InconsistentShards(format!(
                "decoded symbol {} exceeds {bits} bits",
                s.value()
            )));
        }
        acc |= (s.value() as u64) << held;
        held += bits;
        while held >= 8 && buf.len() < cap {
            buf.push(acc as u8);
            acc >>= 8;
            held -= 8;
        }
    }
    if cap < 8 {
        return Err(CliError::InconsistentShards(
            "payload shorter than the length trailer".into(),
        ));
    }
    let len = u64::from_le_bytes(buf[cap - 8..].try_into().expect("8 bytes")) as usize;
    if len > cap - 8 {
        return Err(CliError::InconsistentShards(format!(
            "length trailer {len} exceeds capacity {}",
            cap - 8
        )));
    }
    buf.truncate(len);
    Ok(buf)
}
