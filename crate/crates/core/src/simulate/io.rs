use std::io::{self, Read, Write};

use super::{Path, PathKind};
use crate::fmt::sig17;

const MAGIC: &[u8; 8] = b"FPPATHS\0";
const VERSION: u32 = 1;

/// Paths sharing one time grid, with the metadata stored in the binary header.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryDump {
    pub seed: u64,
    pub kind: PathKind,
    pub dt: f64,
    pub alpha: f64,
    /// `[θ, β, γ]`, NaN when not applicable.
    pub params: [f64; 3],
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

fn kind_code(k: PathKind) -> u32 {
    match k {
        PathKind::Subordinator => 0,
        PathKind::InverseSubordinator => 1,
        PathKind::Diffusion => 2,
        PathKind::Fractional => 3,
    }
}

fn code_kind(c: u32) -> io::Result<PathKind> {
    Ok(match c {
        0 => PathKind::Subordinator,
        1 => PathKind::InverseSubordinator,
        2 => PathKind::Diffusion,
        3 => PathKind::Fractional,
        _ => {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("unknown path kind {c}"),
            ))
        }
    })
}

/// CSV with header `t,value`.
pub fn write_csv<W: Write>(path: &Path, mut w: W) -> io::Result<()> {
    w.write_all(b"t,value\n")?;
    for (t, v) in path.times.iter().zip(&path.values) {
        writeln!(w, "{},{}", sig17(*t), sig17(*v))?;
    }
    Ok(())
}

/// Little-endian columnar dump: header, time column, then one value column per path.
pub fn write_binary<W: Write>(dump: &BinaryDump, mut w: W) -> io::Result<()> {
    let n_times = dump.times.len();
    if dump.values.iter().any(|v| v.len() != n_times) {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            "value columns differ in length from the time grid",
        ));
    }
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&kind_code(dump.kind).to_le_bytes())?;
    w.write_all(&dump.seed.to_le_bytes())?;
    for x in [
        dump.dt,
        dump.alpha,
        dump.params[0],
        dump.params[1],
        dump.params[2],
    ] {
        w.write_all(&x.to_le_bytes())?;
    }
    w.write_all(&(dump.values.len() as u64).to_le_bytes())?;
    w.write_all(&(n_times as u64).to_le_bytes())?;
    for col in std::iter::once(&dump.times).chain(&dump.values) {
        for x in col {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> io::Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

pub fn read_binary<R: Read>(mut r: R) -> io::Result<BinaryDump> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            "not a path dump",
        ));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("unsupported version {version}"),
        ));
    }
    let kind = code_kind(read_u32(&mut r)?)?;
    let seed = read_u64(&mut r)?;
    let dt = read_f64(&mut r)?;
    let alpha = read_f64(&mut r)?;
    let params = [read_f64(&mut r)?, read_f64(&mut r)?, read_f64(&mut r)?];
    let n_paths = read_u64(&mut r)? as usize;
    let n_times = read_u64(&mut r)? as usize;
    let mut col = |n: usize| {
        (0..n)
            .map(|_| read_f64(&mut r))
            .collect::<io::Result<Vec<f64>>>()
    };
    let times = col(n_times)?;
    let values = (0..n_paths)
        .map(|_| col(n_times))
        .collect::<io::Result<Vec<_>>>()?;
    Ok(BinaryDump {
        seed,
        kind,
        dt,
        alpha,
        params,
        times,
        values,
    })
}
