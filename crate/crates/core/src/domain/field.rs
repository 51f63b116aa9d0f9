use std::io::{Read, Write};
use std::sync::Arc;

use super::{Grid, Point};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"NGF1";

/// Real values on the nodes of a grid. Nodes outside the grid mask hold zero.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Arc<Grid>, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidDomain(format!(
                "{} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        for (i, v) in values.iter_mut().enumerate() {
            if !grid.is_inside(i) {
                *v = 0.0;
            } else if !v.is_finite() {
                return Err(Error::Precondition(format!("non-finite value at node {i}")));
            }
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every inside node.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(&Point) -> f64) -> Result<Self> {
        let values = (0..grid.len())
            .map(|i| {
                if grid.is_inside(i) {
                    f(&grid.position(i))
                } else {
                    0.0
                }
            })
            .collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn grid_arc(&self) -> &Arc<Grid> {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn value(&self, idx: usize) -> f64 {
        self.values[idx]
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.grid.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    /// Same values on the same lattice with a smaller mask.
    pub fn restricted(&self, mask: &[bool]) -> Result<Self> {
        let g = Arc::new(self.grid.restrict(mask)?);
        Self::new(g, self.values.clone())
    }

    /// Multilinear interpolation at `x`; nodes outside the mask count as zero.
    /// Returns `None` outside the lattice extent.
    pub fn interpolate(&self, x: &[f64]) -> Option<f64> {
        let g = &*self.grid;
        let shape = g.shape3();
        let per = g.periodic3();
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        let mut step = [0usize; 3];
        for k in 0..3 {
            if k >= g.dim() {
                continue;
            }
            let t = (x[k] - g.origin()[k]) / g.spacing();
            let n = shape[k];
            if per[k] {
                let fl = t.floor();
                base[k] = (fl as i64).rem_euclid(n as i64) as usize;
                frac[k] = t - fl;
                step[k] = 1;
            } else {
                if t < -1e-9 || t > (n - 1) as f64 + 1e-9 {
                    return None;
                }
                let t = t.clamp(0.0, (n - 1) as f64);
                let fl = t.floor().min((n - 2) as f64);
                base[k] = fl as usize;
                frac[k] = t - fl;
                step[k] = 1;
            }
        }
        let mut acc = 0.0;
        let corners = 1usize << g.dim();
        for corner in 0..corners {
            let mut c = base;
            let mut w = 1.0;
            for k in 0..g.dim() {
                if corner >> k & 1 == 1 {
                    c[k] = (c[k] + step[k]) % shape[k];
                    w *= frac[k];
                } else {
                    w *= 1.0 - frac[k];
                }
            }
            if w != 0.0 {
                acc += w * self.values[g.index(c)];
            }
        }
        Some(acc)
    }

    /// Writes the flat binary layout: magic `NGF1`, `u32` dimension, `u64`
    /// extents, `f64` spacing, `f64` origin, `u8` periodic flags, `u64` run
    /// count followed by the mask as alternating run lengths (starting with
    /// an outside run, possibly empty), then `f64` values of inside nodes in
    /// node order. All little-endian.
    pub fn write_binary(&self, w: &mut impl Write) -> Result<()> {
        let g = &*self.grid;
        w.write_all(MAGIC)?;
        w.write_all(&(g.dim() as u32).to_le_bytes())?;
        for &s in g.shape() {
            w.write_all(&(s as u64).to_le_bytes())?;
        }
        w.write_all(&g.spacing().to_le_bytes())?;
        for &o in g.origin() {
            w.write_all(&o.to_le_bytes())?;
        }
        for &p in g.periodic() {
            w.write_all(&[p as u8])?;
        }
        let runs = mask_runs(g.inside());
        w.write_all(&(runs.len() as u64).to_le_bytes())?;
        for r in &runs {
            w.write_all(&r.to_le_bytes())?;
        }
        for (i, v) in self.values.iter().enumerate() {
            if g.is_inside(i) {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let dim = read_u32(r)? as usize;
        if !(1..=3).contains(&dim) {
            return Err(Error::Format(format!("dimension {dim}")));
        }
        let shape = (0..dim)
            .map(|_| read_u64(r).map(|v| v as usize))
            .collect::<Result<Vec<_>>>()?;
        let h = read_f64(r)?;
        let origin = (0..dim).map(|_| read_f64(r)).collect::<Result<Vec<_>>>()?;
        let mut flags = vec![0u8; dim];
        r.read_exact(&mut flags)?;
        let periodic: Vec<bool> = flags.iter().map(|&b| b != 0).collect();
        let nruns = read_u64(r)? as usize;
        let total: usize = shape.iter().product();
        let mut inside = Vec::with_capacity(total);
        let mut state = false;
        for _ in 0..nruns {
            let len = read_u64(r)? as usize;
            if inside.len() + len > total {
                return Err(Error::Format("mask runs exceed node count".into()));
            }
            inside.extend(std::iter::repeat(state).take(len));
            state = !state;
        }
        if inside.len() != total {
            return Err(Error::Format("mask runs do not cover the grid".into()));
        }
        let grid = Arc::new(Grid::new(h, &shape, &origin, &periodic, inside)?);
        let mut values = vec![0.0; total];
        for (i, v) in values.iter_mut().enumerate() {
            if grid.is_inside(i) {
                *v = read_f64(r)?;
            }
        }
        Self::new(grid, values)
    }

    /// Debug CSV: one row per inside node with coordinates and value.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        let g = &*self.grid;
        let axes = ["x", "y", "z"];
        let header: Vec<&str> = axes[..g.dim()].to_vec();
        writeln!(w, "node,{},value", header.join(","))?;
        for i in 0..g.len() {
            if !g.is_inside(i) {
                continue;
            }
            let x = g.position(i);
            let coords: Vec<String> = x[..g.dim()].iter().map(|c| format!("{c:.12e}")).collect();
            writeln!(w, "{i},{},{:.17e}", coords.join(","), self.values[i])?;
        }
        Ok(())
    }
}

fn mask_runs(mask: &[bool]) -> Vec<u64> {
    let mut runs = Vec::new();
    let mut state = false;
    let mut len = 0u64;
    for &m in mask {
        if m == state {
            len += 1;
        } else {
            runs.push(len);
            state = m;
            len = 1;
        }
    }
    runs.push(len);
    runs
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}
fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}
fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_grid, DomainSpec};
    use proptest::prelude::*;

    #[test]
    fn outside_values_are_zeroed() {
        let g = Arc::new(build_grid(&DomainSpec::rectangle(&[1.0, 1.0]), 8).unwrap());
        let f = ScalarField::new(g.clone(), vec![1.0; g.len()]).unwrap();
        assert_eq!(f.value(0), 0.0);
        assert_eq!(f.value(g.index([1, 1, 0])), 1.0);
        assert!(ScalarField::new(g.clone(), vec![f64::NAN; g.len()]).is_err());
    }

    #[test]
    fn interpolation_is_exact_for_bilinear() {
        let g = Arc::new(build_grid(&DomainSpec::torus(&[1.0, 1.0]), 16).unwrap());
        let f = ScalarField::from_fn(g, |x| 1.0 + 2.0 * x[0] - x[1] + 3.0 * x[0] * x[1]).unwrap();
        let v = f.interpolate(&[0.31, 0.47]).unwrap();
        assert!((v - (1.0 + 0.62 - 0.47 + 3.0 * 0.31 * 0.47)).abs() < 1e-12);
    }

    #[test]
    fn csv_has_one_row_per_inside_node() {
        let g = Arc::new(build_grid(&DomainSpec::disk(1.0, 2), 10).unwrap());
        let f = ScalarField::from_fn(g.clone(), |x| x[0]).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), g.inside_count() + 1);
        assert!(text.starts_with("node,x,y,value"));
    }

    proptest! {
        #[test]
        fn binary_round_trip(n in 3usize..12, seed in 0u64..1000, radius in 0.3f64..1.0) {
            let g = Arc::new(build_grid(&DomainSpec::disk(radius, 2), n).unwrap());
            let f = ScalarField::from_fn(g, |x| (x[0] * 7.0 + seed as f64).sin() * x[1]).unwrap();
            let mut buf = Vec::new();
            f.write_binary(&mut buf).unwrap();
            let back = ScalarField::read_binary(&mut buf.as_slice()).unwrap();
            prop_assert_eq!(back.grid(), f.grid());
            prop_assert_eq!(back.values(), f.values());
        }
    }
}
