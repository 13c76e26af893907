//! Binary columnar spool of exit samples.
//!
//! Layout (little endian): magic `EXSP`, version u32, dimension u32, then row groups.
//! Each group is a u32 row count followed by the columns start (count·d f64), tau (f64),
//! exit (count·d f64), pre_exit (count·d f64), steps (u64), min_delta (f64) and
//! flags (u8: bit 0 censored, bit 1 near boundary). The file ends after the last group.

use std::io::{ErrorKind, Read, Write};

use super::exit::ExitSample;
use crate::error::{LabError, Result};
use crate::point::Point;

pub const MAGIC: &[u8; 4] = b"EXSP";
pub const VERSION: u32 = 1;
const GROUP: usize = 4096;

pub struct SpoolWriter<W: Write> {
    out: W,
    dim: usize,
    buf: Vec<ExitSample>,
}

impl<W: Write> SpoolWriter<W> {
    pub fn new(mut out: W, dim: usize) -> Result<Self> {
        out.write_all(MAGIC)?;
        out.write_all(&VERSION.to_le_bytes())?;
        out.write_all(&(dim as u32).to_le_bytes())?;
        Ok(SpoolWriter { out, dim, buf: Vec::with_capacity(GROUP) })
    }

    pub fn push(&mut self, s: &ExitSample) -> Result<()> {
        if s.start.dim() != self.dim {
            return Err(LabError::Parameter("sample dimension does not match the spool".into()));
        }
        self.buf.push(*s);
        if self.buf.len() == GROUP {
            self.flush_group()?;
        }
        Ok(())
    }

    fn flush_group(&mut self) -> Result<()> {
        if self.buf.is_empty() {
            return Ok(());
        }
        let w = &mut self.out;
        w.write_all(&(self.buf.len() as u32).to_le_bytes())?;
        let points = |w: &mut W, get: &dyn Fn(&ExitSample) -> Point, buf: &[ExitSample]| -> Result<()> {
            for s in buf {
                for v in get(s).as_slice() {
                    w.write_all(&v.to_le_bytes())?;
                }
            }
            Ok(())
        };
        points(w, &|s| s.start, &self.buf)?;
        for s in &self.buf {
            w.write_all(&s.tau.to_le_bytes())?;
        }
        points(w, &|s| s.exit, &self.buf)?;
        points(w, &|s| s.pre_exit, &self.buf)?;
        for s in &self.buf {
            w.write_all(&s.steps.to_le_bytes())?;
        }
        for s in &self.buf {
            w.write_all(&s.min_delta.to_le_bytes())?;
        }
        for s in &self.buf {
            w.write_all(&[s.censored as u8 | (s.near_boundary as u8) << 1])?;
        }
        self.buf.clear();
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.flush_group()?;
        self.out.flush()?;
        Ok(self.out)
    }
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

fn f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    (0..n).map(|_| Ok(f64::from_le_bytes(read_array(r)?))).collect()
}

/// Reads a whole spool back.
pub fn read_spool<R: Read>(mut r: R) -> Result<Vec<ExitSample>> {
    let magic: [u8; 4] = read_array(&mut r)?;
    if &magic != MAGIC {
        return Err(LabError::Io("not an exit spool".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut r)?);
    if version != VERSION {
        return Err(LabError::Io(format!("unsupported spool version {version}")));
    }
    let d = u32::from_le_bytes(read_array(&mut r)?) as usize;
    if !(1..=crate::point::MAX_DIM).contains(&d) {
        return Err(LabError::Io(format!("bad spool dimension {d}")));
    }
    let mut out = Vec::new();
    loop {
        let mut head = [0u8; 4];
        match r.read_exact(&mut head) {
            Ok(()) => {}
            Err(e) if e.kind() == ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(e.into()),
        }
        let n = u32::from_le_bytes(head) as usize;
        let start = f64s(&mut r, n * d)?;
        let tau = f64s(&mut r, n)?;
        let exit = f64s(&mut r, n * d)?;
        let pre = f64s(&mut r, n * d)?;
        let steps: Vec<u64> = (0..n).map(|_| Ok(u64::from_le_bytes(read_array(&mut r)?))).collect::<Result<_>>()?;
        let min_delta = f64s(&mut r, n)?;
        let mut flags = vec![0u8; n];
        r.read_exact(&mut flags)?;
        for i in 0..n {
            let pt = |v: &[f64]| Point::from_slice(&v[i * d..(i + 1) * d]);
            out.push(ExitSample {
                start: pt(&start),
                tau: tau[i],
                exit: pt(&exit),
                pre_exit: pt(&pre),
                steps: steps[i],
                min_delta: min_delta[i],
                censored: flags[i] & 1 != 0,
                near_boundary: flags[i] & 2 != 0,
            });
        }
    }
    Ok(out)
}
