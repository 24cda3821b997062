//! Little-endian binary format for fields and time snapshots.
//!
//! A field is a header `(d, M)` of two `i64`, then one record per nonzero
//! mode: `d` × `i64` coordinates, `re: f64`, `im: f64`. A snapshot prefixes
//! the field with its time as one `f64`.

use std::io::{ErrorKind, Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{FrequencyField, Lattice, Mode, MAX_DIM};

pub fn write_field<W: Write>(mut w: W, field: &FrequencyField) -> Result<()> {
    let lattice = field.lattice();
    w.write_all(&(lattice.dim() as i64).to_le_bytes())?;
    w.write_all(&lattice.cutoff().to_le_bytes())?;
    for (m, c) in field.iter() {
        for x in &m[..lattice.dim()] {
            w.write_all(&x.to_le_bytes())?;
        }
        w.write_all(&c.re.to_le_bytes())?;
        w.write_all(&c.im.to_le_bytes())?;
    }
    Ok(())
}

/// Fills `buf`; `Ok(false)` on a clean end of stream before the first byte.
fn read_exact_or_eof<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<bool> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) if filled == 0 => return Ok(false),
            Ok(0) => {
                return Err(Error::Format(format!(
                    "truncated record: {filled} of {} bytes",
                    buf.len()
                )))
            }
            Ok(n) => filled += n,
            Err(e) if e.kind() == ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(true)
}

fn read_word<R: Read>(r: &mut R, what: &str) -> Result<[u8; 8]> {
    let mut buf = [0u8; 8];
    if !read_exact_or_eof(r, &mut buf)? {
        return Err(Error::Format(format!("missing {what}")));
    }
    Ok(buf)
}

pub fn read_field<R: Read>(mut r: R) -> Result<FrequencyField> {
    let dim = i64::from_le_bytes(read_word(&mut r, "dimension")?);
    let cutoff = i64::from_le_bytes(read_word(&mut r, "cutoff")?);
    if !(1..=MAX_DIM as i64).contains(&dim) {
        return Err(Error::Format(format!("dimension {dim} out of range")));
    }
    let lattice = Lattice::new(dim as usize, cutoff).map_err(|e| Error::Format(e.to_string()))?;
    let d = dim as usize;
    let mut record = vec![0u8; 8 * (d + 2)];
    let mut entries: Vec<(Mode, Complex64)> = Vec::new();
    while read_exact_or_eof(&mut r, &mut record)? {
        let word =
            |i: usize| -> [u8; 8] { record[8 * i..8 * i + 8].try_into().expect("8-byte slice") };
        let mut m = [0i64; MAX_DIM];
        for (a, x) in m.iter_mut().enumerate().take(d) {
            *x = i64::from_le_bytes(word(a));
        }
        if !lattice.contains(&m) {
            return Err(Error::Format(format!("mode {m:?} outside cutoff {cutoff}")));
        }
        let c = Complex64::new(f64::from_le_bytes(word(d)), f64::from_le_bytes(word(d + 1)));
        entries.push((m, c));
    }
    FrequencyField::from_entries(lattice, entries).map_err(|e| Error::Format(e.to_string()))
}

pub fn write_snapshot<W: Write>(mut w: W, t: f64, field: &FrequencyField) -> Result<()> {
    w.write_all(&t.to_le_bytes())?;
    write_field(w, field)
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<(f64, FrequencyField)> {
    let t = f64::from_le_bytes(read_word(&mut r, "snapshot time")?);
    Ok((t, read_field(r)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FrequencyField {
        let lat = Lattice::new(2, 5).unwrap();
        FrequencyField::from_entries(
            lat,
            vec![
                ([1, -2, 0], Complex64::new(0.5, -1.25)),
                ([-3, 4, 0], Complex64::new(-2.0, 1e-300)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let f = sample();
        let mut buf = Vec::new();
        write_field(&mut buf, &f).unwrap();
        assert_eq!(buf.len(), 16 + 2 * 32);
        let g = read_field(buf.as_slice()).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn snapshot_round_trip() {
        let f = sample();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, 0.375, &f).unwrap();
        let (t, g) = read_snapshot(buf.as_slice()).unwrap();
        assert_eq!(t, 0.375);
        assert_eq!(f, g);
    }

    #[test]
    fn truncated_record_is_rejected() {
        let mut buf = Vec::new();
        write_field(&mut buf, &sample()).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(matches!(read_field(buf.as_slice()), Err(Error::Format(_))));
        assert!(matches!(read_field(&buf[..5]), Err(Error::Format(_))));
    }
}
