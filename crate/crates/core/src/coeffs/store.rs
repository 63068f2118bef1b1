//! On-disk coefficient cache.
//!
//! Layout: a short text header terminated by a line `end`, followed by a
//! little-endian binary payload.
//!
//! ```text
//! OBE-COEFFS
//! version 1
//! qmax 40
//! hyper_records <count>
//! b_records <count>
//! sha256 <hex digest of payload>
//! end
//! ```
//!
//! Hyper records are six u16 (n_x, l_x, n_y, l_y, N, K) and one f64.
//! B records are five u16 (n1, 2λ1, n2, 2λ2, k) and the two f64 limbs of
//! the double-double weight.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::hyper::HyperTable;
use crate::error::{ObeError, Result, TableError};
use crate::specfn::Dd;
use crate::talmi::{b_coefficients_twice, prime_b_cache};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "OBE-COEFFS";
const HYPER_RECORD: usize = 6 * 2 + 8;
const B_RECORD: usize = 5 * 2 + 16;

/// Talmi weights keyed by (n1, 2λ1, n2, 2λ2).
pub type BTable = BTreeMap<(u32, u32, u32, u32), Vec<Dd>>;

/// Everything the solver needs that does not depend on the system.
#[derive(Clone, Debug, Default)]
pub struct CoefficientTables {
    pub qmax: u32,
    pub hyper: HyperTable,
    pub b: BTable,
}

impl CoefficientTables {
    /// Hyperspherical coefficients plus every Talmi weight set a basis with
    /// at most `qmax` quanta can request.
    pub fn build(qmax: u32) -> Self {
        let hyper = HyperTable::build(qmax);
        let mut b = BTable::new();
        // radial elements of pair potentials: equal λ, 2n + λ ≤ qmax
        for l in 0..=qmax {
            let nmax = (qmax - l) / 2;
            for n1 in 0..=nmax {
                for n2 in 0..=nmax {
                    let key = (n1, 2 * l, n2, 2 * l);
                    b.insert(key, b_coefficients_twice(n1 as usize, 2 * l, n2 as usize, 2 * l).to_vec());
                }
            }
        }
        // hyperradial elements: λ = K + 3/2, 2N + K ≤ qmax
        for k in 0..=qmax {
            let nmax = (qmax - k) / 2;
            for n1 in 0..=nmax {
                for n2 in 0..=nmax {
                    let tl = 2 * k + 3;
                    b.insert((n1, tl, n2, tl), b_coefficients_twice(n1 as usize, tl, n2 as usize, tl).to_vec());
                }
            }
        }
        Self { qmax, hyper, b }
    }

    /// Make the loaded Talmi weights visible to the matrix-element code.
    pub fn install(&self) {
        for (&(n1, t1, n2, t2), v) in &self.b {
            prime_b_cache(n1 as usize, t1, n2 as usize, t2, v.clone());
        }
    }

    pub fn b_record_count(&self) -> usize {
        self.b.values().map(Vec::len).sum()
    }

    /// Hex SHA-256 of the binary payload.
    pub fn checksum(&self) -> String {
        hex_digest(&self.payload())
    }

    fn payload(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.hyper.record_count() * HYPER_RECORD + self.b_record_count() * B_RECORD);
        for (&(nx, lx, ny, ly), list) in &self.hyper.entries {
            for &(n, k, c) in list {
                for v in [nx, lx, ny, ly, n, k] {
                    out.extend_from_slice(&(v as u16).to_le_bytes());
                }
                out.extend_from_slice(&c.to_le_bytes());
            }
        }
        for (&(n1, t1, n2, t2), list) in &self.b {
            for (k, w) in list.iter().enumerate() {
                for v in [n1, t1, n2, t2, k as u32] {
                    out.extend_from_slice(&(v as u16).to_le_bytes());
                }
                out.extend_from_slice(&w.hi().to_le_bytes());
                out.extend_from_slice(&w.lo().to_le_bytes());
            }
        }
        out
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn save_tables(tables: &CoefficientTables, path: &Path) -> Result<()> {
    if tables.qmax > u16::MAX as u32 / 2 {
        return Err(ObeError::domain("qmax too large for the cache format"));
    }
    let payload = tables.payload();
    let header = format!(
        "{MAGIC}\nversion {FORMAT_VERSION}\nqmax {}\nhyper_records {}\nb_records {}\nsha256 {}\nend\n",
        tables.qmax,
        tables.hyper.record_count(),
        tables.b_record_count(),
        hex_digest(&payload)
    );
    let mut bytes = header.into_bytes();
    bytes.extend_from_slice(&payload);
    fs::write(path, bytes).map_err(|e| ObeError::io(path, e))
}

struct Header {
    version: u32,
    qmax: u32,
    hyper_records: usize,
    b_records: usize,
    sha256: String,
}

fn parse_header(bytes: &[u8]) -> std::result::Result<(Header, usize), TableError> {
    let mut fields: BTreeMap<String, String> = BTreeMap::new();
    let mut pos = 0;
    let mut first = true;
    loop {
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| TableError::Header("header not terminated".into()))?;
        let line = std::str::from_utf8(&bytes[pos..pos + end]).map_err(|_| TableError::Header("non-UTF-8 header".into()))?;
        pos += end + 1;
        if first {
            if line != MAGIC {
                return Err(TableError::Header(format!("bad magic line {line:?}")));
            }
            first = false;
            continue;
        }
        if line == "end" {
            break;
        }
        let (k, v) = line
            .split_once(' ')
            .ok_or_else(|| TableError::Header(format!("malformed line {line:?}")))?;
        fields.insert(k.to_string(), v.to_string());
    }
    let get = |k: &str| fields.get(k).ok_or_else(|| TableError::Header(format!("missing field {k}")));
    let num = |k: &str| -> std::result::Result<usize, TableError> {
        get(k)?
            .parse()
            .map_err(|_| TableError::Header(format!("field {k} is not an integer")))
    };
    let version = num("version")? as u32;
    if version != FORMAT_VERSION {
        return Err(TableError::Version {
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    Ok((
        Header {
            version,
            qmax: num("qmax")? as u32,
            hyper_records: num("hyper_records")?,
            b_records: num("b_records")?,
            sha256: get("sha256")?.clone(),
        },
        pos,
    ))
}

fn u16_at(b: &[u8], at: usize) -> u32 {
    u16::from_le_bytes([b[at], b[at + 1]]) as u32
}

fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().expect("slice of eight bytes"))
}

/// Read a cache file; Talmi weights are not installed until
/// [`CoefficientTables::install`] is called.
pub fn load_tables(path: &Path) -> Result<CoefficientTables> {
    let bytes = fs::read(path).map_err(|e| ObeError::io(path, e))?;
    let (header, start) = parse_header(&bytes)?;
    debug_assert_eq!(header.version, FORMAT_VERSION);
    let payload = &bytes[start..];
    let expected = header.hyper_records * HYPER_RECORD + header.b_records * B_RECORD;
    if payload.len() != expected {
        return Err(TableError::Truncated {
            expected,
            found: payload.len(),
        }
        .into());
    }
    let actual = hex_digest(payload);
    if actual != header.sha256 {
        return Err(TableError::Checksum {
            expected: header.sha256,
            actual,
        }
        .into());
    }
    let mut hyper = HyperTable {
        qmax: header.qmax,
        ..Default::default()
    };
    let mut at = 0;
    for _ in 0..header.hyper_records {
        let v: Vec<u32> = (0..6).map(|i| u16_at(payload, at + 2 * i)).collect();
        let c = f64_at(payload, at + 12);
        hyper.entries.entry((v[0], v[1], v[2], v[3])).or_default().push((v[4], v[5], c));
        at += HYPER_RECORD;
    }
    let mut b = BTable::new();
    for _ in 0..header.b_records {
        let v: Vec<u32> = (0..5).map(|i| u16_at(payload, at + 2 * i)).collect();
        let hi = f64_at(payload, at + 10);
        let lo = f64_at(payload, at + 18);
        let list = b.entry((v[0], v[1], v[2], v[3])).or_default();
        if list.len() != v[4] as usize {
            return Err(TableError::Header(format!("B record out of order at {v:?}")).into());
        }
        let w = Dd::try_from((hi, lo))
            .map_err(|_| TableError::Header(format!("overlapping double-double limbs at {v:?}")))?;
        list.push(w);
        at += B_RECORD;
    }
    Ok(CoefficientTables {
        qmax: header.qmax,
        hyper,
        b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CoefficientTables {
        CoefficientTables::build(6)
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.bin");
        let t = sample();
        save_tables(&t, &path).unwrap();
        let u = load_tables(&path).unwrap();
        assert_eq!(u.qmax, t.qmax);
        assert_eq!(u.hyper, t.hyper);
        assert_eq!(u.b.len(), t.b.len());
        for (k, v) in &t.b {
            let w = &u.b[k];
            assert!(v.iter().zip(w).all(|(a, b)| a.hi().to_bits() == b.hi().to_bits() && a.lo().to_bits() == b.lo().to_bits()));
        }
        assert_eq!(u.checksum(), t.checksum());
    }

    #[test]
    fn corrupted_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.bin");
        save_tables(&sample(), &path).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        let last = bytes.len() - 3;
        bytes[last] ^= 0x55;
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(load_tables(&path), Err(ObeError::Table(TableError::Checksum { .. }))));
    }

    #[test]
    fn truncation_and_version_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.bin");
        save_tables(&sample(), &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 10]).unwrap();
        assert!(matches!(load_tables(&path), Err(ObeError::Table(TableError::Truncated { .. }))));

        let mut bumped = bytes.clone();
        let at = bumped.windows(9).position(|w| w == b"version 1").unwrap();
        bumped[at + 8] = b'2';
        fs::write(&path, &bumped).unwrap();
        let err = load_tables(&path).unwrap_err();
        assert!(matches!(err, ObeError::Table(TableError::Version { found: 2, supported: 1 })));
        assert!(err.to_string().contains('2') && err.to_string().contains('1'));
    }
}
