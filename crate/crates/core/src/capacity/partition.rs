use serde::Serialize;

use crate::domain::{Grid, ScalarField};
use crate::error::{Error, Result};

/// Axis-aligned cubes of a fixed side tiling the lattice box. A trailing
/// partial cube along an axis is merged into its neighbor.
#[derive(Clone, Debug)]
pub struct CubePartition {
    cube_size: f64,
    counts: [usize; 3],
    cube_of: Vec<u32>,
}

impl CubePartition {
    pub fn new(grid: &Grid, cube_size: f64) -> Result<Self> {
        if !(cube_size > 0.0 && cube_size.is_finite()) {
            return Err(Error::Precondition(format!(
                "cube size {cube_size} must be positive"
            )));
        }
        let shape = grid.shape3();
        let h = grid.spacing();
        let per = ((cube_size / h) + 1e-9).floor().max(1.0) as usize;
        let mut counts = [1usize; 3];
        for k in 0..grid.dim() {
            counts[k] = (shape[k] / per).max(1);
        }
        let cube_of = (0..grid.len())
            .map(|i| {
                let c = grid.coords(i);
                let mut id = 0usize;
                for k in (0..3).rev() {
                    let q = if k < grid.dim() {
                        (c[k] / per).min(counts[k] - 1)
                    } else {
                        0
                    };
                    id = id * counts[k] + q;
                }
                id as u32
            })
            .collect();
        Ok(Self {
            cube_size,
            counts,
            cube_of,
        })
    }

    /// One cube containing the whole lattice.
    pub fn single(grid: &Grid) -> Self {
        Self {
            cube_size: f64::INFINITY,
            counts: [1; 3],
            cube_of: vec![0; grid.len()],
        }
    }

    /// Cubes of side `8 · max_inradius`.
    pub fn from_inradius(grid: &Grid, max_inradius: f64) -> Result<Self> {
        Self::new(grid, 8.0 * max_inradius)
    }

    pub fn cube_size(&self) -> f64 {
        self.cube_size
    }
    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn cube_of(&self, node: usize) -> usize {
        self.cube_of[node] as usize
    }
    /// Node indices of one cube, ascending.
    pub fn nodes(&self, cube: usize) -> Vec<usize> {
        (0..self.cube_of.len())
            .filter(|&i| self.cube_of[i] as usize == cube)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LocalRayleigh {
    pub min_value: f64,
    pub argmin_cube: usize,
    /// Rayleigh quotient over the whole lattice, for comparison.
    pub global: f64,
}

/// Smallest cube-local Rayleigh quotient of `psi` extended by zero.
///
/// Every edge (and every ghost edge beyond a lattice face) belongs to the
/// cube of its base node, so the cube numerators and denominators sum to
/// the global ones and the minimum never exceeds the global quotient.
pub fn local_rayleigh_min(psi: &ScalarField, partition: &CubePartition) -> Result<LocalRayleigh> {
    let g = psi.grid();
    if partition.cube_of.len() != g.len() {
        return Err(Error::InvalidDomain(
            "partition belongs to another lattice".into(),
        ));
    }
    let mut num = vec![0.0; partition.len()];
    let mut den = vec![0.0; partition.len()];
    for p in 0..g.len() {
        let vp = psi.value(p);
        let c = partition.cube_of(p);
        den[c] += vp * vp;
        for k in 0..g.dim() {
            match g.neighbor(p, k, 1) {
                Some(q) => {
                    let d = vp - psi.value(q);
                    num[c] += d * d;
                }
                None => num[c] += vp * vp,
            }
            if g.neighbor(p, k, -1).is_none() {
                num[c] += vp * vp;
            }
        }
    }
    let h2 = g.spacing() * g.spacing();
    let mut best: Option<(f64, usize)> = None;
    for (c, (&n, &d)) in num.iter().zip(&den).enumerate() {
        if d > 0.0 {
            let r = n / (d * h2);
            if best.map_or(true, |(b, _)| r < b) {
                best = Some((r, c));
            }
        }
    }
    let (min_value, argmin_cube) =
        best.ok_or_else(|| Error::DegenerateRegion("field vanishes on every cube".into()))?;
    let global = num.iter().sum::<f64>() / (den.iter().sum::<f64>() * h2);
    Ok(LocalRayleigh {
        min_value,
        argmin_cube,
        global,
    })
}
