//! Bit-exact persistence and indexed lookup of precomputed tables.
//!
//! # The `RDPT` file format
//!
//! Little-endian throughout:
//!
//! ```text
//! magic               4 bytes  "RDPT"
//! format version      u16      1 = rainbow-DP table, 2 = baseline table
//! n_bits              u8
//! k_bits              u8       (0 allowed only in version 2)
//! c                   f64      IEEE-754
//! t_hat               u32
//! l                   u16
//! table_index         u16
//! m0_tilde            u64
//! seed                u64
//! function_id         u16 length prefix + UTF-8 bytes
//! m0                  u64      record count
//! precomp_invocations u64
//! records             m0 x (len u32, ep u64, sp u64)
//! checksum            u64      CRC-64/XZ over all preceding bytes
//! ```
//!
//! The checksum polynomial is CRC-64/XZ (ECMA-182, reflected,
//! init/xorout all-ones). Version 2 stores the baseline method as a
//! `method:function` tag in the function_id field.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use crc::{Crc, CRC_64_XZ};

use crate::func::OneWayFn;
use crate::offline::ChainRecord;
use crate::params::{Point, SpaceParams};

pub(crate) const MAGIC: &[u8; 4] = b"RDPT";
pub(crate) const VERSION_RAINBOW_DP: u16 = 1;
pub(crate) const VERSION_BASELINE: u16 = 2;

const CRC64: Crc<u64> = Crc::<u64>::new(&CRC_64_XZ);

#[derive(Debug, thiserror::Error)]
pub enum StorageError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("bad magic: not an RDPT file")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("checksum mismatch: stored {stored:#018x}, computed {computed:#018x}")]
    ChecksumMismatch { stored: u64, computed: u64 },
    #[error("truncated file while reading {0}")]
    Truncated(&'static str),
    #[error("invalid field `{field}`: {reason}")]
    InvalidField { field: &'static str, reason: String },
}

impl StorageError {
    fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        StorageError::InvalidField {
            field,
            reason: reason.into(),
        }
    }
}

/// Raw header shared by both format versions.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct TableHeader {
    pub version: u16,
    pub n_bits: u8,
    pub k_bits: u8,
    pub c: f64,
    pub t_hat: u32,
    pub l: u16,
    pub table_index: u16,
    pub m0_tilde: u64,
    pub seed: u64,
    pub function_id: String,
}

pub(crate) fn write_table_bytes(
    header: &TableHeader,
    records: &[ChainRecord],
    precomp_invocations: u64,
) -> Vec<u8> {
    let mut buf = Vec::with_capacity(64 + header.function_id.len() + records.len() * 20);
    buf.extend_from_slice(MAGIC);
    buf.write_u16::<LittleEndian>(header.version).unwrap();
    buf.write_u8(header.n_bits).unwrap();
    buf.write_u8(header.k_bits).unwrap();
    buf.write_f64::<LittleEndian>(header.c).unwrap();
    buf.write_u32::<LittleEndian>(header.t_hat).unwrap();
    buf.write_u16::<LittleEndian>(header.l).unwrap();
    buf.write_u16::<LittleEndian>(header.table_index).unwrap();
    buf.write_u64::<LittleEndian>(header.m0_tilde).unwrap();
    buf.write_u64::<LittleEndian>(header.seed).unwrap();
    let id = header.function_id.as_bytes();
    buf.write_u16::<LittleEndian>(id.len() as u16).unwrap();
    buf.extend_from_slice(id);
    buf.write_u64::<LittleEndian>(records.len() as u64).unwrap();
    buf.write_u64::<LittleEndian>(precomp_invocations).unwrap();
    for rec in records {
        buf.write_u32::<LittleEndian>(rec.len).unwrap();
        buf.write_u64::<LittleEndian>(rec.ep.0).unwrap();
        buf.write_u64::<LittleEndian>(rec.sp.0).unwrap();
    }
    let checksum = CRC64.checksum(&buf);
    buf.write_u64::<LittleEndian>(checksum).unwrap();
    buf
}

pub(crate) fn read_table_bytes(
    bytes: &[u8],
) -> Result<(TableHeader, Vec<ChainRecord>, u64), StorageError> {
    if bytes.len() < 8 {
        return Err(StorageError::Truncated("magic"));
    }
    let (payload, stored_tail) = bytes.split_at(bytes.len() - 8);
    let stored = u64::from_le_bytes(stored_tail.try_into().unwrap());
    let computed = CRC64.checksum(payload);
    if stored != computed {
        return Err(StorageError::ChecksumMismatch { stored, computed });
    }

    let mut r = payload;
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| StorageError::Truncated("magic"))?;
    if &magic != MAGIC {
        return Err(StorageError::BadMagic);
    }
    let version = read_u16(&mut r, "version")?;
    if version != VERSION_RAINBOW_DP && version != VERSION_BASELINE {
        return Err(StorageError::UnsupportedVersion(version));
    }
    let n_bits = read_u8(&mut r, "n_bits")?;
    let k_bits = read_u8(&mut r, "k_bits")?;
    let c = read_f64(&mut r, "c")?;
    let t_hat = read_u32(&mut r, "t_hat")?;
    let l = read_u16(&mut r, "l")?;
    let table_index = read_u16(&mut r, "table_index")?;
    let m0_tilde = read_u64(&mut r, "m0_tilde")?;
    let seed = read_u64(&mut r, "seed")?;
    let id_len = read_u16(&mut r, "function_id")? as usize;
    let mut id_bytes = vec![0u8; id_len];
    r.read_exact(&mut id_bytes)
        .map_err(|_| StorageError::Truncated("function_id"))?;
    let function_id = String::from_utf8(id_bytes)
        .map_err(|_| StorageError::invalid("function_id", "not valid UTF-8"))?;
    let m0 = read_u64(&mut r, "m0")?;
    let precomp_invocations = read_u64(&mut r, "precomp_invocations")?;
    let expected = m0
        .checked_mul(20)
        .ok_or_else(|| StorageError::invalid("m0", "record count overflows"))?;
    if r.len() as u64 != expected {
        return Err(StorageError::Truncated("records"));
    }
    let mut records = Vec::with_capacity(m0 as usize);
    for _ in 0..m0 {
        let len = read_u32(&mut r, "record.len")?;
        let ep = read_u64(&mut r, "record.ep")?;
        let sp = read_u64(&mut r, "record.sp")?;
        records.push(ChainRecord {
            sp: Point(sp),
            len,
            ep: Point(ep),
        });
    }
    Ok((
        TableHeader {
            version,
            n_bits,
            k_bits,
            c,
            t_hat,
            l,
            table_index,
            m0_tilde,
            seed,
            function_id,
        },
        records,
        precomp_invocations,
    ))
}

fn read_u8(r: &mut &[u8], field: &'static str) -> Result<u8, StorageError> {
    r.read_u8().map_err(|_| StorageError::Truncated(field))
}
fn read_u16(r: &mut &[u8], field: &'static str) -> Result<u16, StorageError> {
    r.read_u16::<LittleEndian>()
        .map_err(|_| StorageError::Truncated(field))
}
fn read_u32(r: &mut &[u8], field: &'static str) -> Result<u32, StorageError> {
    r.read_u32::<LittleEndian>()
        .map_err(|_| StorageError::Truncated(field))
}
fn read_u64(r: &mut &[u8], field: &'static str) -> Result<u64, StorageError> {
    r.read_u64::<LittleEndian>()
        .map_err(|_| StorageError::Truncated(field))
}
fn read_f64(r: &mut &[u8], field: &'static str) -> Result<f64, StorageError> {
    r.read_f64::<LittleEndian>()
        .map_err(|_| StorageError::Truncated(field))
}

/// A sorted, indexed collection of chain records for one table index.
#[derive(Clone, Debug, PartialEq)]
pub struct PrecompTable {
    params: SpaceParams,
    table_index: u16,
    records: Vec<ChainRecord>,
    precomp_invocations: u64,
    /// `length_offsets[len-1]..length_offsets[len]` is the record range
    /// holding chains of that length; the ranges partition `records`.
    length_offsets: Vec<usize>,
}

impl PrecompTable {
    /// Assemble a table from records; sorts by `(len, ep, sp)` and builds the
    /// length index.
    pub fn new(
        params: SpaceParams,
        table_index: u16,
        mut records: Vec<ChainRecord>,
        precomp_invocations: u64,
    ) -> crate::Result<Self> {
        if table_index >= params.table_count() {
            return Err(crate::Error::invalid(
                "table_index",
                format!("{table_index} >= l = {}", params.table_count()),
            ));
        }
        for rec in &records {
            if rec.len == 0 || rec.len > params.t_hat() {
                return Err(crate::Error::invalid(
                    "records",
                    format!("chain length {} outside 1..={}", rec.len, params.t_hat()),
                ));
            }
            if !params.is_dp(rec.ep) {
                return Err(crate::Error::invalid(
                    "records",
                    format!("ending point {:#x} is not distinguished", rec.ep.0),
                ));
            }
        }
        records.sort_unstable_by_key(ChainRecord::sort_key);
        let length_offsets = build_length_offsets(&records, params.t_hat());
        Ok(PrecompTable {
            params,
            table_index,
            records,
            precomp_invocations,
            length_offsets,
        })
    }

    pub fn params(&self) -> &SpaceParams {
        &self.params
    }

    pub fn table_index(&self) -> u16 {
        self.table_index
    }

    pub fn records(&self) -> &[ChainRecord] {
        &self.records
    }

    /// Number of stored chains.
    pub fn m0(&self) -> u64 {
        self.records.len() as u64
    }

    pub fn precomp_invocations(&self) -> u64 {
        self.precomp_invocations
    }

    /// All records with exactly this `(len, ep)`, in ascending `sp` order.
    /// Bisection within the length slice: `O(log m0 + matches)`.
    pub fn lookup(&self, len: u32, ep: Point) -> &[ChainRecord] {
        assert!(
            len >= 1 && len <= self.params.t_hat(),
            "lookup length {len} outside 1..={}",
            self.params.t_hat()
        );
        let slice =
            &self.records[self.length_offsets[len as usize - 1]..self.length_offsets[len as usize]];
        let start = slice.partition_point(|r| r.ep < ep);
        let end = start + slice[start..].partition_point(|r| r.ep == ep);
        &slice[start..end]
    }

    /// Serialize to the RDPT byte layout (format version 1).
    pub fn to_bytes(&self) -> Vec<u8> {
        let header = TableHeader {
            version: VERSION_RAINBOW_DP,
            n_bits: self.params.n_bits() as u8,
            k_bits: self.params.k_bits() as u8,
            c: self.params.c(),
            t_hat: self.params.t_hat(),
            l: self.params.table_count(),
            table_index: self.table_index,
            m0_tilde: self.params.m0_tilde(),
            seed: self.params.seed(),
            function_id: self.params.function().id().to_string(),
        };
        write_table_bytes(&header, &self.records, self.precomp_invocations)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, StorageError> {
        let (header, records, precomp_invocations) = read_table_bytes(bytes)?;
        if header.version != VERSION_RAINBOW_DP {
            return Err(StorageError::UnsupportedVersion(header.version));
        }
        let function = OneWayFn::from_id(&header.function_id)
            .map_err(|_| StorageError::invalid("function_id", header.function_id.clone()))?;
        let params = SpaceParams::new(
            header.n_bits as u32,
            header.k_bits as u32,
            header.c,
            header.l,
            header.m0_tilde,
            header.seed,
            function,
        )
        .map_err(|e| StorageError::invalid("header", e.to_string()))?;
        if params.t_hat() != header.t_hat {
            return Err(StorageError::invalid(
                "t_hat",
                format!(
                    "stored {} but round(c*t) = {}",
                    header.t_hat,
                    params.t_hat()
                ),
            ));
        }
        if header.table_index >= header.l {
            return Err(StorageError::invalid(
                "table_index",
                format!("{} >= l = {}", header.table_index, header.l),
            ));
        }
        for rec in &records {
            if rec.len == 0 || rec.len > params.t_hat() {
                return Err(StorageError::invalid("record.len", rec.len.to_string()));
            }
            if !params.is_dp(rec.ep) || rec.sp.0 > params.mask() || rec.ep.0 > params.mask() {
                return Err(StorageError::invalid(
                    "record.ep",
                    "point outside space or not distinguished",
                ));
            }
        }
        if !records
            .windows(2)
            .all(|w| w[0].sort_key() <= w[1].sort_key())
        {
            return Err(StorageError::invalid(
                "records",
                "not sorted by (len, ep, sp)",
            ));
        }
        let length_offsets = build_length_offsets(&records, params.t_hat());
        Ok(PrecompTable {
            params,
            table_index: header.table_index,
            records,
            precomp_invocations,
            length_offsets,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), StorageError> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(&self.to_bytes())?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, StorageError> {
        let mut bytes = Vec::new();
        BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }
}

pub(crate) fn build_length_offsets(records: &[ChainRecord], t_hat: u32) -> Vec<usize> {
    let mut offsets = vec![0usize; t_hat as usize + 1];
    let mut pos = 0usize;
    for len in 1..=t_hat {
        pos += records[pos..].partition_point(|r| r.len == len);
        offsets[len as usize] = pos;
    }
    offsets
}
