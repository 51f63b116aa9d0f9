//! Computational domains, uniform grids and the fields that live on them.
//!
//! Every domain is discretized on a uniform Cartesian lattice. Curved
//! domains (disk, stadium) are represented by masking the nodes of their
//! bounding box; nodes outside the mask carry the value zero.

mod bessel;
mod closed_form;
mod coeffs;
mod field;
mod rescale;

pub use bessel::{bessel_j, bessel_zero};
pub use closed_form::sample_closed_form;
pub use coeffs::{CoefficientBounds, CoefficientField};
pub use field::ScalarField;
pub use rescale::{wavelength_radius, wavelength_rescale, RescaledBall};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Up to three spatial coordinates; unused trailing entries are zero.
pub type Point = [f64; 3];

const GEOM_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Rectangle,
    Torus,
    Disk,
    Stadium,
    Masked,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Dirichlet,
    Periodic,
}

/// Geometric description of a flat domain.
///
/// `dims` always holds the side lengths of the bounding box. Rectangles,
/// tori and masked boxes start at the origin; disks and stadiums are
/// centered on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub dims: Vec<f64>,
    pub radius: f64,
    pub boundary: Boundary,
}

impl DomainSpec {
    pub fn rectangle(dims: &[f64]) -> Self {
        Self {
            kind: DomainKind::Rectangle,
            dims: dims.to_vec(),
            radius: 0.0,
            boundary: Boundary::Dirichlet,
        }
    }

    pub fn torus(dims: &[f64]) -> Self {
        Self {
            kind: DomainKind::Torus,
            dims: dims.to_vec(),
            radius: 0.0,
            boundary: Boundary::Periodic,
        }
    }

    /// Disk (`dim = 2`) or ball (`dim = 3`) of the given radius.
    pub fn disk(radius: f64, dim: usize) -> Self {
        Self {
            kind: DomainKind::Disk,
            dims: vec![2.0 * radius; dim],
            radius,
            boundary: Boundary::Dirichlet,
        }
    }

    /// Two half-disk caps of `radius` joined by a straight section of length `straight`.
    pub fn stadium(straight: f64, radius: f64) -> Self {
        Self {
            kind: DomainKind::Stadium,
            dims: vec![straight + 2.0 * radius, 2.0 * radius],
            radius,
            boundary: Boundary::Dirichlet,
        }
    }

    /// Box whose mask is supplied afterwards with [`Grid::restrict`].
    pub fn masked(dims: &[f64]) -> Self {
        Self {
            kind: DomainKind::Masked,
            dims: dims.to_vec(),
            radius: 0.0,
            boundary: Boundary::Dirichlet,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dims.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dims.len();
        if !(1..=3).contains(&n) {
            return Err(Error::InvalidDomain(format!("dimension {n} not in 1..=3")));
        }
        if self.dims.iter().any(|&d| !(d.is_finite() && d > 0.0)) {
            return Err(Error::InvalidDomain("side lengths must be positive".into()));
        }
        match (self.kind, self.boundary) {
            (DomainKind::Torus, Boundary::Periodic) => {}
            (DomainKind::Torus, _) => {
                return Err(Error::InvalidDomain(
                    "torus requires periodic boundary".into(),
                ))
            }
            (_, Boundary::Periodic) => {
                return Err(Error::InvalidDomain("only the torus is periodic".into()));
            }
            _ => {}
        }
        match self.kind {
            DomainKind::Disk => {
                if !(self.radius > 0.0) || n < 2 {
                    return Err(Error::InvalidDomain(
                        "disk needs a positive radius and dimension >= 2".into(),
                    ));
                }
                if self
                    .dims
                    .iter()
                    .any(|&d| (d - 2.0 * self.radius).abs() > GEOM_EPS * d)
                {
                    return Err(Error::InvalidDomain(
                        "disk bounding box must be 2R on every axis".into(),
                    ));
                }
            }
            DomainKind::Stadium => {
                if !(self.radius > 0.0) || n != 2 {
                    return Err(Error::InvalidDomain(
                        "stadium is two-dimensional with positive radius".into(),
                    ));
                }
                if self.dims[0] < 2.0 * self.radius
                    || (self.dims[1] - 2.0 * self.radius).abs() > GEOM_EPS
                {
                    return Err(Error::InvalidDomain(
                        "stadium box must be (a+2R) x 2R".into(),
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Lower corner of the bounding box.
    pub fn origin(&self) -> Vec<f64> {
        match self.kind {
            DomainKind::Disk | DomainKind::Stadium => self.dims.iter().map(|d| -0.5 * d).collect(),
            _ => vec![0.0; self.dims.len()],
        }
    }

    /// Whether `x` lies strictly inside the open domain.
    pub fn contains(&self, x: &[f64]) -> bool {
        let origin = self.origin();
        let n = self.dims.len();
        match self.kind {
            DomainKind::Torus => true,
            DomainKind::Rectangle | DomainKind::Masked => (0..n).all(|k| {
                let t = x[k] - origin[k];
                t > GEOM_EPS && t < self.dims[k] - GEOM_EPS
            }),
            DomainKind::Disk => {
                let r2: f64 = (0..n).map(|k| x[k] * x[k]).sum();
                r2.sqrt() < self.radius - GEOM_EPS
            }
            DomainKind::Stadium => {
                let half = 0.5 * self.dims[0] - self.radius;
                let dx = (x[0].abs() - half).max(0.0);
                (dx * dx + x[1] * x[1]).sqrt() < self.radius - GEOM_EPS
            }
        }
    }
}

/// Uniform lattice with spacing `h` over a box, plus the node mask of the
/// discretized open domain.
///
/// Nodes are numbered with the first axis fastest. Internally the shape is
/// padded to three axes with extent one.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    spacing: f64,
    shape: [usize; 3],
    origin: Point,
    periodic: [bool; 3],
    inside: Vec<bool>,
}

impl Grid {
    /// Builds a grid from raw parts.
    pub fn new(
        spacing: f64,
        shape: &[usize],
        origin: &[f64],
        periodic: &[bool],
        inside: Vec<bool>,
    ) -> Result<Self> {
        let dim = shape.len();
        if !(1..=3).contains(&dim) || origin.len() != dim || periodic.len() != dim {
            return Err(Error::InvalidDomain(
                "shape, origin and periodic flags must share a dimension in 1..=3".into(),
            ));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidResolution(format!(
                "spacing {spacing} must be positive"
            )));
        }
        if shape.iter().any(|&s| s < 3) {
            return Err(Error::InvalidResolution(
                "every axis needs at least 3 nodes".into(),
            ));
        }
        let mut s3 = [1usize; 3];
        let mut o3 = [0.0; 3];
        let mut p3 = [false; 3];
        for k in 0..dim {
            s3[k] = shape[k];
            o3[k] = origin[k];
            p3[k] = periodic[k];
        }
        let len = s3[0] * s3[1] * s3[2];
        if inside.len() != len {
            return Err(Error::InvalidDomain(format!(
                "mask has {} entries, grid has {len} nodes",
                inside.len()
            )));
        }
        Ok(Self {
            dim,
            spacing,
            shape: s3,
            origin: o3,
            periodic: p3,
            inside,
        })
    }

    /// Box lattice whose mask is given by a predicate on node positions.
    pub fn from_predicate(
        spacing: f64,
        shape: &[usize],
        origin: &[f64],
        periodic: &[bool],
        inside: impl Fn(&Point) -> bool,
    ) -> Result<Self> {
        let mut g = Self::new(
            spacing,
            shape,
            origin,
            periodic,
            vec![false; shape.iter().product()],
        )?;
        for i in 0..g.len() {
            let x = g.position(i);
            g.inside[i] = inside(&x);
        }
        Ok(g)
    }

    /// Lattice centered at the origin with the given spacing that covers the
    /// closed unit ball; the mask is `|x| <= 1`.
    pub fn unit_ball(dim: usize, spacing: f64) -> Result<Self> {
        let half = (1.0 / spacing + GEOM_EPS).floor() as usize;
        if half < 2 {
            return Err(Error::Resolution(format!(
                "unit ball spacing {spacing} leaves fewer than 2 cells per radius"
            )));
        }
        let n = 2 * half + 1;
        let start = -(half as f64) * spacing;
        Self::from_predicate(
            spacing,
            &vec![n; dim],
            &vec![start; dim],
            &vec![false; dim],
            |x| x.iter().map(|v| v * v).sum::<f64>() <= 1.0 + 1e-12,
        )
    }

    /// Same lattice with the mask intersected with `mask`.
    pub fn restrict(&self, mask: &[bool]) -> Result<Self> {
        if mask.len() != self.len() {
            return Err(Error::InvalidDomain(
                "mask length does not match grid".into(),
            ));
        }
        let mut g = self.clone();
        g.inside
            .iter_mut()
            .zip(mask)
            .for_each(|(a, &b)| *a = *a && b);
        Ok(g)
    }

    /// Same lattice with the mask replaced by `mask`.
    pub fn with_mask(&self, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != self.len() {
            return Err(Error::InvalidDomain(
                "mask length does not match grid".into(),
            ));
        }
        Ok(Self {
            inside: mask,
            ..self.clone()
        })
    }

    /// Same lattice geometry scaled by `s` (spacing and origin).
    pub fn scaled(&self, s: f64) -> Self {
        let mut g = self.clone();
        g.spacing *= s;
        g.origin.iter_mut().for_each(|o| *o *= s);
        g
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn spacing(&self) -> f64 {
        self.spacing
    }
    pub fn shape(&self) -> &[usize] {
        &self.shape[..self.dim]
    }
    pub(crate) fn shape3(&self) -> [usize; 3] {
        self.shape
    }
    pub fn origin(&self) -> &[f64] {
        &self.origin[..self.dim]
    }
    pub fn periodic(&self) -> &[bool] {
        &self.periodic[..self.dim]
    }
    pub(crate) fn periodic3(&self) -> [bool; 3] {
        self.periodic
    }
    pub fn inside(&self) -> &[bool] {
        &self.inside
    }
    pub fn is_inside(&self, idx: usize) -> bool {
        self.inside[idx]
    }
    pub fn len(&self) -> usize {
        self.inside.len()
    }
    pub fn is_empty(&self) -> bool {
        self.inside.is_empty()
    }
    pub fn inside_count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    /// Period along a periodic axis.
    pub fn period(&self, axis: usize) -> f64 {
        self.shape[axis] as f64 * self.spacing
    }

    #[inline]
    pub fn index(&self, c: [usize; 3]) -> usize {
        c[0] + self.shape[0] * (c[1] + self.shape[1] * c[2])
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.shape[0];
        let r = idx / self.shape[0];
        [i, r % self.shape[1], r / self.shape[1]]
    }

    #[inline]
    pub fn position(&self, idx: usize) -> Point {
        let c = self.coords(idx);
        let mut x = [0.0; 3];
        for k in 0..self.dim {
            x[k] = self.origin[k] + c[k] as f64 * self.spacing;
        }
        x
    }

    /// Face neighbor along `axis` in direction `dir` (+1 or -1), wrapping on
    /// periodic axes.
    #[inline]
    pub fn neighbor(&self, idx: usize, axis: usize, dir: isize) -> Option<usize> {
        let mut c = self.coords(idx);
        let n = self.shape[axis];
        let v = c[axis] as isize + dir;
        if v < 0 || v >= n as isize {
            if !self.periodic[axis] {
                return None;
            }
            c[axis] = v.rem_euclid(n as isize) as usize;
        } else {
            c[axis] = v as usize;
        }
        Some(self.index(c))
    }

    /// Node at integer offset `off` from `c`, or `None` if it leaves a
    /// non-periodic axis.
    #[inline]
    pub(crate) fn offset(&self, c: [usize; 3], off: [isize; 3]) -> Option<usize> {
        let mut r = [0usize; 3];
        for k in 0..3 {
            let n = self.shape[k] as isize;
            let v = c[k] as isize + off[k];
            if v < 0 || v >= n {
                if !self.periodic[k] {
                    return None;
                }
                r[k] = v.rem_euclid(n) as usize;
            } else {
                r[k] = v as usize;
            }
        }
        Some(self.index(r))
    }

    /// Whether a point lies within the lattice's extent (periodic axes always do).
    pub fn covers(&self, x: &[f64]) -> bool {
        (0..self.dim).all(|k| {
            self.periodic[k] || {
                let t = (x[k] - self.origin[k]) / self.spacing;
                t >= -GEOM_EPS && t <= (self.shape[k] - 1) as f64 + GEOM_EPS
            }
        })
    }

    /// Visits every lattice node within Euclidean distance `radius` of
    /// `center`, passing the node index and squared distance. Returns true
    /// if the ball was clipped by a non-periodic edge of the lattice.
    ///
    /// On periodic axes the ball must not exceed half a period.
    pub fn for_each_in_ball(
        &self,
        center: &[f64],
        radius: f64,
        mut f: impl FnMut(usize, f64),
    ) -> Result<bool> {
        self.visit_ball(center, radius, true, |i, d2| {
            f(i.expect("clipped visit stays on the lattice"), d2)
        })
    }

    /// Like [`for_each_in_ball`](Self::for_each_in_ball) but also visits the
    /// positions of the infinite lattice beyond non-periodic edges, passing
    /// `None` for them.
    pub fn for_each_lattice_point_in_ball(
        &self,
        center: &[f64],
        radius: f64,
        f: impl FnMut(Option<usize>, f64),
    ) -> Result<()> {
        self.visit_ball(center, radius, false, f).map(|_| ())
    }

    fn visit_ball(
        &self,
        center: &[f64],
        radius: f64,
        clip: bool,
        mut f: impl FnMut(Option<usize>, f64),
    ) -> Result<bool> {
        let h = self.spacing;
        let r2 = radius * radius * (1.0 + 1e-12) + 1e-300;
        let mut lo = [0isize; 3];
        let mut hi = [0isize; 3];
        let mut clipped = false;
        for k in 0..self.dim {
            if self.periodic[k] && 2.0 * radius >= self.period(k) {
                return Err(Error::Precondition(format!(
                    "ball radius {radius} is not below half the period along axis {k}"
                )));
            }
            let t = (center[k] - self.origin[k]) / h;
            let rr = radius / h;
            lo[k] = (t - rr - GEOM_EPS).ceil() as isize;
            hi[k] = (t + rr + GEOM_EPS).floor() as isize;
            if !self.periodic[k] {
                let n = self.shape[k] as isize;
                if lo[k] < 0 || hi[k] > n - 1 {
                    clipped = true;
                }
                if clip {
                    lo[k] = lo[k].max(0);
                    hi[k] = hi[k].min(n - 1);
                }
            }
        }
        let mut c = [0.0; 3];
        c[..self.dim].copy_from_slice(&center[..self.dim]);
        let wrap = |k: usize, i: isize| -> Option<usize> {
            let n = self.shape[k] as isize;
            if self.periodic[k] || k >= self.dim {
                Some(i.rem_euclid(n) as usize)
            } else if (0..n).contains(&i) {
                Some(i as usize)
            } else {
                None
            }
        };
        for i2 in lo[2]..=hi[2] {
            let d2 = if self.dim > 2 {
                self.origin[2] + i2 as f64 * h - c[2]
            } else {
                0.0
            };
            let w2 = wrap(2, i2);
            for i1 in lo[1]..=hi[1] {
                let d1 = if self.dim > 1 {
                    self.origin[1] + i1 as f64 * h - c[1]
                } else {
                    0.0
                };
                let w1 = wrap(1, i1);
                let partial = d1 * d1 + d2 * d2;
                if partial > r2 {
                    continue;
                }
                for i0 in lo[0]..=hi[0] {
                    let d0 = self.origin[0] + i0 as f64 * h - c[0];
                    let dist2 = partial + d0 * d0;
                    if dist2 <= r2 {
                        let idx = match (wrap(0, i0), w1, w2) {
                            (Some(a), Some(b), Some(c)) => {
                                Some(a + self.shape[0] * (b + self.shape[1] * c))
                            }
                            _ => None,
                        };
                        f(idx, dist2);
                    }
                }
            }
        }
        Ok(clipped)
    }
}

/// Discretizes `spec` with `n_cells` cells along its longest side.
pub fn build_grid(spec: &DomainSpec, n_cells: usize) -> Result<Grid> {
    if n_cells < 3 {
        return Err(Error::InvalidResolution(format!("n_cells = {n_cells} < 3")));
    }
    spec.validate()?;
    let longest = spec.dims.iter().cloned().fold(0.0, f64::max);
    let h = longest / n_cells as f64;
    let n = spec.dimension();
    let origin = spec.origin();
    let periodic = spec.boundary == Boundary::Periodic;
    let mut shape = Vec::with_capacity(n);
    for &d in &spec.dims {
        let cells = d / h;
        let rounded = cells.round();
        if periodic {
            if (cells - rounded).abs() > 1e-6 {
                return Err(Error::InvalidDomain(format!(
                    "torus side {d} is not a whole number of cells of size {h}"
                )));
            }
            shape.push(rounded as usize);
        } else {
            let c = if (cells - rounded).abs() < 1e-6 {
                rounded
            } else {
                cells.floor()
            };
            shape.push(c as usize + 1);
        }
    }
    if shape.iter().any(|&s| s < 3) {
        return Err(Error::InvalidResolution(
            "resolution leaves fewer than 3 nodes on an axis".into(),
        ));
    }
    Grid::from_predicate(h, &shape, &origin, &vec![periodic; n], |x| {
        spec.contains(&x[..n])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn square_grid_shape_and_mask() {
        let g = build_grid(&DomainSpec::rectangle(&[PI, PI]), 256).unwrap();
        assert_eq!(g.shape(), &[257, 257]);
        assert!((g.spacing() - PI / 256.0).abs() < 1e-15);
        assert_eq!(g.inside_count(), 255 * 255);
        assert!(!g.is_inside(0));
        assert!(g.is_inside(g.index([1, 1, 0])));
    }

    #[test]
    fn torus_has_no_seam() {
        let g = build_grid(&DomainSpec::torus(&[2.0 * PI, 2.0 * PI]), 128).unwrap();
        assert_eq!(g.shape(), &[128, 128]);
        assert_eq!(g.periodic(), &[true, true]);
        assert_eq!(g.inside_count(), 128 * 128);
        assert_eq!(
            g.neighbor(g.index([127, 5, 0]), 0, 1),
            Some(g.index([0, 5, 0]))
        );
    }

    #[test]
    fn too_coarse_is_rejected() {
        assert!(matches!(
            build_grid(&DomainSpec::disk(1.0, 2), 2),
            Err(Error::InvalidResolution(_))
        ));
    }

    #[test]
    fn invalid_specs() {
        let mut s = DomainSpec::torus(&[1.0, 1.0]);
        s.boundary = Boundary::Dirichlet;
        assert!(s.validate().is_err());
        assert!(DomainSpec::rectangle(&[1.0, -1.0]).validate().is_err());
        let mut r = DomainSpec::rectangle(&[1.0]);
        r.boundary = Boundary::Periodic;
        assert!(r.validate().is_err());
    }

    #[test]
    fn disk_mask_is_strict_interior() {
        let g = build_grid(&DomainSpec::disk(1.0, 2), 64).unwrap();
        for i in 0..g.len() {
            let x = g.position(i);
            assert_eq!(
                g.is_inside(i),
                (x[0] * x[0] + x[1] * x[1]).sqrt() < 1.0 - 1e-9
            );
        }
    }

    #[test]
    fn stadium_contains_caps() {
        let s = DomainSpec::stadium(2.0, 1.0);
        assert!(s.contains(&[1.9, 0.0]));
        assert!(!s.contains(&[1.9, 0.9]));
        assert!(s.contains(&[0.0, 0.99]));
        assert!(build_grid(&s, 64).unwrap().inside_count() > 0);
    }

    #[test]
    fn ball_visit_counts_and_clipping() {
        let g = build_grid(&DomainSpec::rectangle(&[2.0, 2.0]), 40).unwrap();
        let mut n = 0;
        let clipped = g.for_each_in_ball(&[1.0, 1.0], 0.5, |_, _| n += 1).unwrap();
        assert!(!clipped);
        // Gauss circle count for radius 10 lattice units.
        assert_eq!(n, 317);
        assert!(g.for_each_in_ball(&[0.1, 1.0], 0.5, |_, _| {}).unwrap());
    }

    #[test]
    fn periodic_ball_wraps() {
        let g = build_grid(&DomainSpec::torus(&[1.0, 1.0]), 20).unwrap();
        let mut seen = Vec::new();
        g.for_each_in_ball(&[0.0, 0.0], 0.1, |i, _| seen.push(i))
            .unwrap();
        assert_eq!(seen.len(), 13);
        assert!(seen.contains(&g.index([19, 0, 0])));
        assert!(g.for_each_in_ball(&[0.0, 0.0], 0.6, |_, _| {}).is_err());
    }
}
