//! Nodal domains of a sampled field: component labels, the discrete nodal
//! set, volumes, inner radii and ball fractions.

mod ball;
mod edt;
mod union_find;

use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::domain::{Grid, Point, ScalarField};
use crate::error::{Error, Result};
use edt::{squared_distances, Window};

pub use ball::{fraction_in_ball, positivity_volume_in_ball, BallFractions, BallShare};
pub use union_find::UnionFind;

/// Default relative threshold below which a node counts as a zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-12;

/// One connected component of `{φ ≠ 0}`.
#[derive(Clone, Debug, Serialize)]
pub struct Component {
    /// Label used in [`NodalDecomposition::labels`]; ids start at 1.
    pub id: usize,
    pub sign: i8,
    pub node_count: usize,
    pub volume: f64,
    pub inradius: f64,
    pub deepest_node: usize,
    pub deepest_point: Point,
}

#[derive(Clone, Debug)]
pub struct NodalDecomposition {
    grid: Arc<Grid>,
    labels: Vec<u32>,
    components: Vec<Component>,
    nodal_cells: Vec<usize>,
    nodal_points: Vec<Point>,
}

impl NodalDecomposition {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }
    /// Component label per node; 0 on zero nodes and outside the mask.
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }
    pub fn components(&self) -> &[Component] {
        &self.components
    }
    pub fn len(&self) -> usize {
        self.components.len()
    }
    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn component(&self, id: usize) -> Result<&Component> {
        if id == 0 {
            return Err(Error::UnknownComponent(id));
        }
        self.components
            .get(id - 1)
            .ok_or(Error::UnknownComponent(id))
    }

    /// Zero nodes plus, for every sign change across a face, the endpoint
    /// with the smaller magnitude. Sorted by node index.
    pub fn nodal_cells(&self) -> &[usize] {
        &self.nodal_cells
    }

    /// Zero nodes and linearly interpolated zero crossings along faces,
    /// ordered by node index then axis.
    pub fn nodal_points(&self) -> &[Point] {
        &self.nodal_points
    }

    pub fn component_mask(&self, id: usize) -> Result<Vec<bool>> {
        self.component(id)?;
        Ok(self.labels.iter().map(|&l| l as usize == id).collect())
    }

    /// Union of all components of the given sign.
    pub fn sign_mask(&self, sign: i8) -> Vec<bool> {
        self.labels
            .iter()
            .map(|&l| l != 0 && self.components[l as usize - 1].sign == sign)
            .collect()
    }

    /// Volume of the nodal cells.
    pub fn nodal_volume(&self) -> f64 {
        self.nodal_cells.len() as f64 * self.grid.cell_volume()
    }

    /// One row per component.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "id,sign,volume,inradius,deepest_x,deepest_y,deepest_z")?;
        for c in &self.components {
            let p = c.deepest_point;
            writeln!(
                w,
                "{},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                c.id, c.sign, c.volume, c.inradius, p[0], p[1], p[2]
            )?;
        }
        Ok(())
    }
}

/// Splits the inside nodes by sign into face-connected components. Nodes
/// with `|φ| <= zero_tol · max|φ|` are zeros.
pub fn extract_nodal_domains(field: &ScalarField, zero_tol: f64) -> Result<NodalDecomposition> {
    let grid = field.grid_arc().clone();
    let n = grid.len();
    let max = field.max_abs();
    let thresh = zero_tol * max;
    let sign = |i: usize| -> i8 {
        let v = field.value(i);
        if !grid.is_inside(i) || v.abs() <= thresh {
            0
        } else if v > 0.0 {
            1
        } else {
            -1
        }
    };
    let signs: Vec<i8> = (0..n).map(sign).collect();
    if signs.iter().all(|&s| s == 0) {
        return Err(Error::AllNodal);
    }
    let dim = grid.dim();
    let mut uf = UnionFind::new(n);
    let mut changes = vec![false; n];
    let mut points = Vec::new();
    let h = grid.spacing();
    for p in 0..n {
        let sp = signs[p];
        if grid.is_inside(p) && sp == 0 {
            changes[p] = true;
            points.push(grid.position(p));
            continue;
        }
        if sp == 0 {
            continue;
        }
        for k in 0..dim {
            let Some(q) = grid.neighbor(p, k, 1) else {
                continue;
            };
            let sq = signs[q];
            if sq == sp {
                uf.union(p, q);
            } else if sq == -sp {
                let (vp, vq) = (field.value(p), field.value(q));
                if vp.abs() <= vq.abs() {
                    changes[p] = true;
                } else {
                    changes[q] = true;
                }
                let t = vp / (vp - vq);
                let mut x = grid.position(p);
                x[k] += t * h;
                points.push(x);
            }
        }
    }
    // Labels in order of first appearance.
    let mut root_label = vec![0u32; n];
    let mut labels = vec![0u32; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut comp_sign = Vec::new();
    for p in 0..n {
        if signs[p] == 0 {
            continue;
        }
        let r = uf.find(p);
        if root_label[r] == 0 {
            members.push(Vec::new());
            comp_sign.push(signs[p]);
            root_label[r] = members.len() as u32;
        }
        labels[p] = root_label[r];
        members[root_label[r] as usize - 1].push(p);
    }
    let cell = grid.cell_volume();
    let components = members
        .iter()
        .enumerate()
        .map(|(c, nodes)| {
            let (inradius, deepest_node) = deepest(&grid, &labels, c as u32 + 1, nodes);
            Component {
                id: c + 1,
                sign: comp_sign[c],
                node_count: nodes.len(),
                volume: nodes.len() as f64 * cell,
                inradius,
                deepest_node,
                deepest_point: grid.position(deepest_node),
            }
        })
        .collect();
    let nodal_cells = (0..n).filter(|&i| changes[i]).collect();
    Ok(NodalDecomposition {
        grid,
        labels,
        components,
        nodal_cells,
        nodal_points: points,
    })
}

/// Inradius of a component and its deepest node.
pub fn inner_radius(decomp: &NodalDecomposition, component_id: usize) -> Result<(f64, Point)> {
    let c = decomp.component(component_id)?;
    Ok((c.inradius, c.deepest_point))
}

/// Largest distance from a node of the component to a node outside it,
/// computed on the component's bounding box grown by one node.
fn deepest(grid: &Grid, labels: &[u32], label: u32, nodes: &[usize]) -> (f64, usize) {
    let shape = grid.shape3();
    let periodic = grid.periodic3();
    let mut lo = [usize::MAX; 3];
    let mut hi = [0usize; 3];
    for &p in nodes {
        let c = grid.coords(p);
        for k in 0..3 {
            lo[k] = lo[k].min(c[k]);
            hi[k] = hi[k].max(c[k]);
        }
    }
    let mut win = Window {
        lo: [0; 3],
        ext: [1; 3],
        periodic: [false; 3],
    };
    for k in 0..grid.dim() {
        if periodic[k] && (lo[k] == 0 || hi[k] == shape[k] - 1) {
            win.ext[k] = shape[k];
            win.periodic[k] = true;
        } else {
            win.lo[k] = lo[k].saturating_sub(1);
            win.ext[k] = (hi[k] + 1).min(shape[k] - 1) - win.lo[k] + 1;
        }
    }
    let site: Vec<bool> = (0..win.len())
        .map(|j| labels[win.global(grid, j)] != label)
        .collect();
    let d = squared_distances(&win, grid.dim(), &site);
    let mut best = (-1.0, usize::MAX);
    for (j, &v) in d.iter().enumerate() {
        if !site[j] && v > best.0 {
            best = (v, win.global(grid, j));
        }
    }
    (best.0.sqrt() * grid.spacing(), best.1)
}

/// Euclidean distance from each true node to the nearest false node.
/// Positions beyond a non-periodic edge of the lattice count as false.
pub fn distance_transform(mask: &[bool], grid: &Grid) -> Result<ScalarField> {
    if mask.len() != grid.len() {
        return Err(Error::InvalidDomain(
            "mask length does not match grid".into(),
        ));
    }
    if !mask.iter().any(|&m| m) {
        return Err(Error::EmptyDomain);
    }
    let win = Window::whole(grid);
    let site: Vec<bool> = mask.iter().map(|&m| !m).collect();
    let d = squared_distances(&win, grid.dim(), &site);
    if d.iter().any(|v| v.is_infinite()) {
        return Err(Error::InfiniteDistance);
    }
    let h = grid.spacing();
    let values = d.iter().map(|v| v.sqrt() * h).collect();
    ScalarField::new(Arc::new(grid.with_mask(mask.to_vec())?), values)
}
