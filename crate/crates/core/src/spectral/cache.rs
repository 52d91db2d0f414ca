//! Binary basis cache.
//!
//! Layout: `MHDBASIS1`, kind (u8), nx, ny, count (u64 LE), eigenvalues, then each mode's
//! x-component followed by its y-component, all as `f64` LE.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{BasisKind, SpectralBasis};
use crate::error::{MhdError, Result};
use crate::grid::{Grid, VectorField};

pub const BASIS_MAGIC: &[u8; 9] = b"MHDBASIS1";

pub fn save_basis(basis: &SpectralBasis, path: &Path) -> Result<()> {
    let g = basis.grid;
    let mut buf = Vec::with_capacity(64 + 8 * basis.count() * (1 + g.n_ufaces() + g.n_vfaces()));
    buf.extend_from_slice(BASIS_MAGIC);
    buf.push(basis.kind.tag());
    for n in [g.nx, g.ny, basis.count()] {
        buf.extend_from_slice(&(n as u64).to_le_bytes());
    }
    for e in &basis.eigenvalues {
        buf.extend_from_slice(&e.to_le_bytes());
    }
    for m in &basis.modes {
        for x in m.u.iter().chain(&m.v) {
            buf.extend_from_slice(&x.to_le_bytes());
        }
    }
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&buf)?;
        f.sync_all()?;
    }
    fs::rename(tmp, path)?;
    Ok(())
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos + n;
        if end > self.data.len() {
            return Err(MhdError::Format("basis file truncated".into()));
        }
        let s = &self.data[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(8 * n)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

/// Loads a cached basis, checking the key `(kind, nx, ny, count)` against the expectation
/// when one is given.
pub fn load_basis(path: &Path, expect: Option<(BasisKind, Grid, usize)>) -> Result<SpectralBasis> {
    let data = fs::read(path)?;
    let mut r = Reader {
        data: &data,
        pos: 0,
    };
    if r.take(BASIS_MAGIC.len())? != BASIS_MAGIC {
        return Err(MhdError::Format("bad basis magic".into()));
    }
    let kind = BasisKind::from_tag(r.take(1)?[0])
        .ok_or_else(|| MhdError::Format("unknown basis kind".into()))?;
    let nx = r.u64()? as usize;
    let ny = r.u64()? as usize;
    let count = r.u64()? as usize;
    let grid = Grid::new(nx, ny)?;
    if let Some((k, g, c)) = expect {
        if k != kind || g.nx != nx || g.ny != ny || c != count {
            return Err(MhdError::Format(format!(
                "basis key mismatch: file has {kind:?} {nx}x{ny} count {count}"
            )));
        }
    }
    let eigenvalues = r.f64s(count)?;
    let mut modes = Vec::with_capacity(count);
    for _ in 0..count {
        let u = r.f64s(grid.n_ufaces())?;
        let v = r.f64s(grid.n_vfaces())?;
        modes.push(VectorField { grid, u, v });
    }
    if r.pos != data.len() {
        return Err(MhdError::Format("trailing bytes in basis file".into()));
    }
    Ok(SpectralBasis {
        kind,
        grid,
        eigenvalues,
        modes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_laplacian_basis, build_stokes_basis};

    #[test]
    fn round_trip_is_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::square(8).unwrap();
        for b in [
            build_stokes_basis(g, 5).unwrap(),
            build_laplacian_basis(g, 7).unwrap(),
        ] {
            let p = dir.path().join("b.bin");
            save_basis(&b, &p).unwrap();
            let back = load_basis(&p, Some((b.kind, g, b.count()))).unwrap();
            assert_eq!(back, b);
            assert!(load_basis(&p, Some((b.kind, g, b.count() + 1))).is_err());
        }
    }

    #[test]
    fn rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.bin");
        fs::write(&p, b"NOTABASIS").unwrap();
        assert!(matches!(load_basis(&p, None), Err(MhdError::Format(_))));
    }
}
