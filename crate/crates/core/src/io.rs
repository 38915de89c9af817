//! Binary and CSV serialization of fields and trajectories.
//!
//! A field file starts with the magic `MNSF`, then `version: u32`,
//! `d: u32`, `N: u32`, `Λ: f64`, `dealias: f64`, all little endian, and then
//! `d` blocks of `N^d` complex coefficients `(re, im)` as `f64` pairs in
//! row-major lattice order (last axis fastest, FFT wavenumber ordering).
//!
//! A trajectory file starts with `MNST`, `version: u32`, `count: u32`, and
//! holds `count` frames of `t: f64` followed by one field record.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{FieldKind, SpectralField};
use crate::grid::{Grid, GridSpec};
use crate::trajectory::Trajectory;

const FIELD_MAGIC: &[u8; 4] = b"MNSF";
const TRAJECTORY_MAGIC: &[u8; 4] = b"MNST";
const VERSION: u32 = 1;

pub fn write_field<W: Write>(w: &mut W, f: &SpectralField) -> Result<()> {
    let g = f.grid();
    w.write_all(FIELD_MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(g.dim() as u32).to_le_bytes())?;
    w.write_all(&(g.n() as u32).to_le_bytes())?;
    w.write_all(&g.box_scale().to_le_bytes())?;
    w.write_all(&g.spec().dealias.to_le_bytes())?;
    for c in f.components() {
        for z in c {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Reads one field record. Hermitian-symmetric data is loaded as a real field.
pub fn read_field<R: Read>(r: &mut R) -> Result<SpectralField> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != FIELD_MAGIC {
        return Err(Error::Format("missing field magic".into()));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported field version {version}")));
    }
    let dim = read_u32(r)? as usize;
    let n = read_u32(r)? as usize;
    let box_scale = read_f64(r)?;
    let dealias = read_f64(r)?;
    let grid = GridSpec::new(dim, n)
        .box_scale(box_scale)
        .dealias(dealias)
        .build()
        .map_err(|e| Error::Format(e.to_string()))?;
    read_body(r, &grid)
}

fn read_body<R: Read>(r: &mut R, grid: &Arc<Grid>) -> Result<SpectralField> {
    let mut comps = Vec::with_capacity(grid.dim());
    let mut buf = vec![0u8; 16 * grid.len()];
    for _ in 0..grid.dim() {
        r.read_exact(&mut buf)?;
        let c: Vec<Complex64> = buf
            .chunks_exact(16)
            .map(|b| {
                Complex64::new(
                    f64::from_le_bytes(b[..8].try_into().expect("8 bytes")),
                    f64::from_le_bytes(b[8..].try_into().expect("8 bytes")),
                )
            })
            .collect();
        comps.push(c);
    }
    let probe = SpectralField::from_coefficients(grid, FieldKind::Complex, comps)?;
    let scale = probe.coefficient_l2_sq().sqrt().max(f64::MIN_POSITIVE);
    if probe.hermitian_defect() <= 1e-13 * scale {
        SpectralField::from_coefficients(grid, FieldKind::Real, probe.into_components())
    } else {
        Ok(probe)
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn save_field(path: &Path, f: &SpectralField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_field(&mut w, f)?;
    w.flush()?;
    Ok(())
}

pub fn load_field(path: &Path) -> Result<SpectralField> {
    read_field(&mut BufReader::new(File::open(path)?))
}

pub fn write_trajectory<W: Write>(w: &mut W, traj: &Trajectory) -> Result<()> {
    w.write_all(TRAJECTORY_MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(traj.len() as u32).to_le_bytes())?;
    for (t, f) in traj.times().iter().zip(traj.fields()) {
        w.write_all(&t.to_le_bytes())?;
        write_field(w, f)?;
    }
    Ok(())
}

pub fn read_trajectory<R: Read>(r: &mut R) -> Result<Trajectory> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != TRAJECTORY_MAGIC {
        return Err(Error::Format("missing trajectory magic".into()));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported trajectory version {version}")));
    }
    let count = read_u32(r)? as usize;
    let mut times = Vec::with_capacity(count);
    let mut fields = Vec::with_capacity(count);
    for _ in 0..count {
        times.push(read_f64(r)?);
        fields.push(read_field(r)?);
    }
    Trajectory::from_samples(times, fields)
}

pub fn save_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_trajectory(&mut w, traj)?;
    w.flush()?;
    Ok(())
}

pub fn load_trajectory(path: &Path) -> Result<Trajectory> {
    read_trajectory(&mut BufReader::new(File::open(path)?))
}

/// One row per mode: integer wavevector, then `re, im` of each component.
pub fn write_coefficients_csv<W: Write>(w: &mut W, f: &SpectralField) -> Result<()> {
    let g = f.grid();
    let d = g.dim();
    let mut header: Vec<String> = (1..=d).map(|a| format!("k{a}")).collect();
    for a in 1..=d {
        header.push(format!("u{a}_re"));
        header.push(format!("u{a}_im"));
    }
    writeln!(w, "{}", header.join(","))?;
    for idx in 0..g.len() {
        let k = g.mode(idx);
        let mut row: Vec<String> = (0..d).map(|a| k[a].to_string()).collect();
        for c in f.components() {
            row.push(format!("{:e}", c[idx].re));
            row.push(format!("{:e}", c[idx].im));
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// One row per lattice point: coordinates, then components. Complex fields
/// emit real and imaginary parts.
pub fn write_physical_csv<W: Write>(w: &mut W, f: &SpectralField) -> Result<()> {
    let g = f.grid();
    let d = g.dim();
    let mut header: Vec<String> = (1..=d).map(|a| format!("x{a}")).collect();
    let values: Vec<Vec<Complex64>> = match f.kind() {
        FieldKind::Real => {
            header.extend((1..=d).map(|a| format!("u{a}")));
            f.to_physical()?
                .into_iter()
                .map(|c| c.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
                .collect()
        }
        FieldKind::Complex => {
            for a in 1..=d {
                header.push(format!("u{a}_re"));
                header.push(format!("u{a}_im"));
            }
            f.to_physical_complex()
        }
    };
    writeln!(w, "{}", header.join(","))?;
    for idx in 0..g.len() {
        let x = g.position(idx);
        let mut row: Vec<String> = (0..d).map(|a| format!("{:e}", x[a])).collect();
        for c in &values {
            row.push(format!("{:e}", c[idx].re));
            if f.kind() == FieldKind::Complex {
                row.push(format!("{:e}", c[idx].im));
            }
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let g = GridSpec::new(2, 8).box_scale(1.5).build().unwrap();
        let f = SpectralField::from_fn(&g, |x| [x[0].sin() + 0.1, (2.0 * x[1]).cos(), 0.0]).unwrap();
        let mut bytes = Vec::new();
        write_field(&mut bytes, &f).unwrap();
        assert_eq!(bytes.len(), 4 + 4 * 3 + 16 + 2 * 64 * 16);
        let back = read_field(&mut bytes.as_slice()).unwrap();
        assert_eq!(back.kind(), FieldKind::Real);
        assert_eq!(back.grid().spec(), f.grid().spec());
        for (a, b) in back.components().iter().zip(f.components()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn complex_fields_stay_complex() {
        let g = GridSpec::new(2, 8).build().unwrap();
        let mut f = SpectralField::zeros(&g, FieldKind::Complex);
        f.set_coefficient(1, &[2, 1], Complex64::new(0.5, -0.25));
        let mut bytes = Vec::new();
        write_field(&mut bytes, &f).unwrap();
        let back = read_field(&mut bytes.as_slice()).unwrap();
        assert_eq!(back.kind(), FieldKind::Complex);
        assert_eq!(back.coefficient(1, &[2, 1]), Complex64::new(0.5, -0.25));
    }

    #[test]
    fn rejects_bad_magic() {
        let bytes = b"XXXX\x01\x00\x00\x00".to_vec();
        assert!(matches!(read_field(&mut bytes.as_slice()), Err(Error::Format(_))));
    }

    #[test]
    fn trajectory_round_trip() {
        let g = GridSpec::new(1, 8).build().unwrap();
        let f = SpectralField::from_fn(&g, |x| [x[0].cos(), 0.0, 0.0]).unwrap();
        let traj = Trajectory::from_samples(vec![0.0, 0.5], vec![f.clone(), f.scaled(0.5)]).unwrap();
        let mut bytes = Vec::new();
        write_trajectory(&mut bytes, &traj).unwrap();
        let back = read_trajectory(&mut bytes.as_slice()).unwrap();
        assert_eq!(back.times(), traj.times());
        assert_eq!(back.fields()[1].components(), traj.fields()[1].components());
    }

    #[test]
    fn csv_has_one_row_per_mode() {
        let g = GridSpec::new(2, 8).build().unwrap();
        let f = SpectralField::zeros(&g, FieldKind::Real);
        let mut out = Vec::new();
        write_coefficients_csv(&mut out, &f).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 65);
        assert!(text.starts_with("k1,k2,u1_re,u1_im,u2_re,u2_im"));
    }
}
