//! Field snapshot files.
//!
//! Little-endian binary layout:
//!
//! ```text
//! magic   b"AEPF"
//! version u32 (currently 1)
//! n1, n2, n3: u32
//! field_count: u32
//! field_count x { name_len: u32, name: UTF-8 bytes }
//! field_count x { row-major f64 values }
//! ```
//!
//! Values are row-major over the logical shape `(x1, x2, x3)`. A field whose
//! name ends in `"@g1"` is a boundary field and carries `n1 * n2` values in
//! row-major `(x1, x2)` order; every other field carries `n1 * n2 * n3`.

use super::grid::Grid;
use super::scalar::{ScalarField2D, ScalarField3D};
use ndarray::{Array2, Array3};
use std::io::{self, Read, Write};
use std::sync::Arc;

const MAGIC: &[u8; 4] = b"AEPF";
const VERSION: u32 = 1;

/// Suffix marking boundary fields in a snapshot.
pub const BOUNDARY_SUFFIX: &str = "@g1";

pub enum FieldRef<'a> {
    Scalar3(&'a ScalarField3D),
    Scalar2(&'a ScalarField2D),
}

pub enum FieldOwned {
    Scalar3(ScalarField3D),
    Scalar2(ScalarField2D),
}

pub fn write_snapshot<W: Write>(mut w: W, grid: &Grid, fields: &[(&str, FieldRef)]) -> io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for n in [grid.n1, grid.n2, grid.n3] {
        w.write_all(&(n as u32).to_le_bytes())?;
    }
    w.write_all(&(fields.len() as u32).to_le_bytes())?;
    for (name, field) in fields {
        let is2d = matches!(field, FieldRef::Scalar2(_));
        assert_eq!(
            is2d,
            name.ends_with(BOUNDARY_SUFFIX),
            "boundary fields must be named with the {BOUNDARY_SUFFIX} suffix"
        );
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name.as_bytes())?;
    }
    for (_, field) in fields {
        match field {
            FieldRef::Scalar3(f) => {
                for i1 in 0..grid.n1 {
                    for i2 in 0..grid.n2 {
                        for i3 in 0..grid.n3 {
                            w.write_all(&f.data[[i3, i2, i1]].to_le_bytes())?;
                        }
                    }
                }
            }
            FieldRef::Scalar2(f) => {
                for i1 in 0..grid.n1 {
                    for i2 in 0..grid.n2 {
                        w.write_all(&f.data[[i2, i1]].to_le_bytes())?;
                    }
                }
            }
        }
    }
    Ok(())
}

pub fn read_snapshot<R: Read>(mut r: R) -> io::Result<(Arc<Grid>, Vec<(String, FieldOwned)>)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "not a field snapshot"));
    }
    let mut u32buf = [0u8; 4];
    let mut read_u32 = |r: &mut R| -> io::Result<u32> {
        r.read_exact(&mut u32buf)?;
        Ok(u32::from_le_bytes(u32buf))
    };
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(io::Error::new(io::ErrorKind::InvalidData, format!("unsupported version {version}")));
    }
    let n1 = read_u32(&mut r)? as usize;
    let n2 = read_u32(&mut r)? as usize;
    let n3 = read_u32(&mut r)? as usize;
    let count = read_u32(&mut r)? as usize;
    let mut names = Vec::with_capacity(count);
    for _ in 0..count {
        let len = read_u32(&mut r)? as usize;
        let mut buf = vec![0u8; len];
        r.read_exact(&mut buf)?;
        let name = String::from_utf8(buf)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        names.push(name);
    }
    let grid = Grid::new(n1, n2, n3);
    let mut f64buf = [0u8; 8];
    let mut fields = Vec::with_capacity(count);
    for name in names {
        if name.ends_with(BOUNDARY_SUFFIX) {
            let mut data = Array2::<f64>::zeros((n2, n1));
            for i1 in 0..n1 {
                for i2 in 0..n2 {
                    r.read_exact(&mut f64buf)?;
                    data[[i2, i1]] = f64::from_le_bytes(f64buf);
                }
            }
            fields.push((name, FieldOwned::Scalar2(ScalarField2D { grid: grid.clone(), data })));
        } else {
            let mut data = Array3::<f64>::zeros((n3, n2, n1));
            for i1 in 0..n1 {
                for i2 in 0..n2 {
                    for i3 in 0..n3 {
                        r.read_exact(&mut f64buf)?;
                        data[[i3, i2, i1]] = f64::from_le_bytes(f64buf);
                    }
                }
            }
            fields.push((name, FieldOwned::Scalar3(ScalarField3D { grid: grid.clone(), data })));
        }
    }
    Ok((grid, fields))
}

/// Plain-text dump, one `x1 x2 x3 value` row per node.
pub fn write_text<W: Write>(mut w: W, field: &ScalarField3D) -> io::Result<()> {
    let grid = &field.grid;
    for i1 in 0..grid.n1 {
        for i2 in 0..grid.n2 {
            for i3 in 0..grid.n3 {
                writeln!(
                    w,
                    "{:.17e} {:.17e} {:.17e} {:.17e}",
                    grid.x1(i1),
                    grid.x2(i2),
                    grid.x3[i3],
                    field.data[[i3, i2, i1]]
                )?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::spectral::TWO_PI;

    #[test]
    fn snapshot_round_trip_preserves_bits() {
        let g = Grid::new(8, 8, 9);
        let f3 = ScalarField3D::from_fn(&g, |x1, x2, x3| (TWO_PI * x1).cos() * x3 + x2);
        let f2 = ScalarField2D::from_fn(&g, |x1, x2| x1 - 0.5 * x2);
        let mut buf = Vec::new();
        write_snapshot(
            &mut buf,
            &g,
            &[("v1", FieldRef::Scalar3(&f3)), ("w@g1", FieldRef::Scalar2(&f2))],
        )
        .unwrap();
        let (g2, fields) = read_snapshot(buf.as_slice()).unwrap();
        assert_eq!((g2.n1, g2.n2, g2.n3), (8, 8, 9));
        match &fields[0].1 {
            FieldOwned::Scalar3(r) => assert_eq!(r.data, f3.data),
            _ => panic!("expected a channel field"),
        }
        match &fields[1].1 {
            FieldOwned::Scalar2(r) => assert_eq!(r.data, f2.data),
            _ => panic!("expected a boundary field"),
        }
    }

    #[test]
    fn text_export_has_one_row_per_node() {
        let g = Grid::new(8, 8, 9);
        let f = ScalarField3D::constant(&g, 1.0);
        let mut buf = Vec::new();
        write_text(&mut buf, &f).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 8 * 8 * 9);
    }
}
