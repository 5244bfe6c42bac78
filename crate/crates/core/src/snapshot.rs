//! Binary field snapshots.
//!
//! Layout, all little-endian:
//!
//! ```text
//! "SWN3" | version u32 | N u32 | L f64 | n u32
//! A links   (re, im) f64 pairs, [site][axis]
//! B links   (re, im) f64 pairs, [site][axis][row][col]
//! Ψ         (re, im) f64 pairs, [site][row][col]
//! α         f64
//! ```

use std::fs;
use std::path::Path;

use num_complex::Complex64 as C64;

use crate::gauge::{SUnConnection, SpinorField, U1Connection};
use crate::lattice::{build_lattice, TorusLattice};
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"SWN3";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 24;

/// A decoded snapshot together with the lattice it lives on.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub lattice: TorusLattice,
    pub a: U1Connection,
    pub b: SUnConnection,
    pub psi: SpinorField,
    pub alpha: f64,
}

fn payload_len(n_axis: usize, rank: usize) -> usize {
    let m = n_axis * n_axis * n_axis;
    let pairs = 3 * m + 3 * m * rank * rank + 2 * rank * m;
    HEADER_LEN + 16 * pairs + 8
}

fn push_complex(out: &mut Vec<u8>, values: &[C64]) {
    for z in values {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
}

pub fn encode(
    lat: &TorusLattice,
    a: &U1Connection,
    b: &SUnConnection,
    psi: &SpinorField,
    alpha: f64,
) -> Result<Vec<u8>> {
    let m = lat.num_sites();
    let rank = psi.rank();
    if a.num_sites() != m
        || psi.num_sites() != m
        || b.rank() != rank
        || b.links().len() != 3 * m * rank * rank
    {
        return Err(Error::ShapeMismatch("snapshot fields do not agree".into()));
    }
    let mut out = Vec::with_capacity(payload_len(lat.n_per_axis(), rank));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(lat.n_per_axis() as u32).to_le_bytes());
    out.extend_from_slice(&lat.side_length().to_le_bytes());
    out.extend_from_slice(&(rank as u32).to_le_bytes());
    push_complex(&mut out, a.links());
    push_complex(&mut out, b.links());
    push_complex(&mut out, psi.data());
    out.extend_from_slice(&alpha.to_le_bytes());
    Ok(out)
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap())
}

fn read_f64(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap())
}

fn read_complex(bytes: &[u8], at: usize, count: usize) -> Vec<C64> {
    (0..count)
        .map(|i| {
            C64::new(
                read_f64(bytes, at + 16 * i),
                read_f64(bytes, at + 16 * i + 8),
            )
        })
        .collect()
}

pub fn decode(bytes: &[u8]) -> Result<Snapshot> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::SnapshotHeader(format!(
            "file holds {} bytes, shorter than the {HEADER_LEN}-byte header",
            bytes.len()
        )));
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::SnapshotHeader(format!(
            "bad magic {:?}",
            &bytes[0..4]
        )));
    }
    let version = read_u32(bytes, 4);
    if version != VERSION {
        return Err(Error::SnapshotVersion {
            found: version,
            expected: VERSION,
        });
    }
    let n_axis = read_u32(bytes, 8) as usize;
    let side = read_f64(bytes, 12);
    let rank = read_u32(bytes, 20) as usize;
    if rank == 0 || n_axis > 1024 {
        return Err(Error::SnapshotHeader(format!(
            "implausible header N = {n_axis}, n = {rank}"
        )));
    }
    let expected = payload_len(n_axis, rank);
    if bytes.len() != expected {
        return Err(Error::SnapshotSize {
            expected,
            found: bytes.len(),
        });
    }
    let lattice = build_lattice(n_axis, side).map_err(|e| Error::SnapshotHeader(e.to_string()))?;
    let m = lattice.num_sites();
    let mut at = HEADER_LEN;
    let a_links = read_complex(bytes, at, 3 * m);
    at += 16 * 3 * m;
    let b_links = read_complex(bytes, at, 3 * m * rank * rank);
    at += 16 * 3 * m * rank * rank;
    let psi_data = read_complex(bytes, at, 2 * rank * m);
    at += 16 * 2 * rank * m;
    let alpha = read_f64(bytes, at);
    Ok(Snapshot {
        a: U1Connection::from_links(&lattice, a_links)?,
        b: SUnConnection::from_links(&lattice, rank, b_links)?,
        psi: SpinorField::from_vec(&lattice, rank, psi_data)?,
        lattice,
        alpha,
    })
}

pub fn write_snapshot(
    path: &Path,
    lat: &TorusLattice,
    a: &U1Connection,
    b: &SUnConnection,
    psi: &SpinorField,
    alpha: f64,
) -> Result<()> {
    fs::write(path, encode(lat, a, b, psi, alpha)?)?;
    Ok(())
}

pub fn load_snapshot(path: &Path) -> Result<Snapshot> {
    decode(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::{random_spinor, random_sun, random_u1};

    fn sample() -> (TorusLattice, Vec<u8>) {
        let lat = build_lattice(4, 1.5).unwrap();
        let a = random_u1(&lat, 1.0, 1);
        let b = random_sun(&lat, 3, 0.7, 2);
        let psi = random_spinor(&lat, 3, 3);
        let bytes = encode(&lat, &a, &b, &psi, 0.3).unwrap();
        (lat, bytes)
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let (lat, bytes) = sample();
        assert_eq!(bytes.len(), payload_len(4, 3));
        let s = decode(&bytes).unwrap();
        assert_eq!(s.alpha, 0.3);
        assert_eq!(s.lattice.side_length(), lat.side_length());
        let again = encode(&s.lattice, &s.a, &s.b, &s.psi, s.alpha).unwrap();
        assert_eq!(bytes, again);
    }

    #[test]
    fn file_round_trip() {
        let (_, bytes) = sample();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.swn");
        let s = decode(&bytes).unwrap();
        write_snapshot(&path, &s.lattice, &s.a, &s.b, &s.psi, s.alpha).unwrap();
        assert_eq!(fs::read(&path).unwrap(), bytes);
        assert!(load_snapshot(&path).is_ok());
    }

    #[test]
    fn corruption_is_reported_distinctly() {
        let (_, bytes) = sample();
        let truncated = &bytes[..bytes.len() - 5];
        assert!(matches!(decode(truncated), Err(Error::SnapshotSize { .. })));
        let mut magic = bytes.clone();
        magic[0] = b'X';
        assert!(matches!(decode(&magic), Err(Error::SnapshotHeader(_))));
        let mut version = bytes.clone();
        version[4] = 9;
        assert!(matches!(
            decode(&version),
            Err(Error::SnapshotVersion { found: 9, .. })
        ));
        assert!(matches!(
            decode(&bytes[..10]),
            Err(Error::SnapshotHeader(_))
        ));
    }
}
