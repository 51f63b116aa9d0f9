//! Exact squared Euclidean distance transform by separable lower envelopes
//! of parabolas, one axis at a time.

use crate::domain::Grid;

/// Axis-aligned box of lattice nodes. Axes flagged periodic wrap; on the
/// others every node beyond the box counts as a site.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Window {
    pub lo: [usize; 3],
    pub ext: [usize; 3],
    pub periodic: [bool; 3],
}

impl Window {
    pub fn whole(grid: &Grid) -> Self {
        Self {
            lo: [0; 3],
            ext: grid.shape3(),
            periodic: grid.periodic3(),
        }
    }

    pub fn len(&self) -> usize {
        self.ext[0] * self.ext[1] * self.ext[2]
    }

    /// Grid index of local index `j`.
    pub fn global(&self, grid: &Grid, j: usize) -> usize {
        let i0 = j % self.ext[0];
        let i1 = (j / self.ext[0]) % self.ext[1];
        let i2 = j / (self.ext[0] * self.ext[1]);
        grid.index([self.lo[0] + i0, self.lo[1] + i1, self.lo[2] + i2])
    }
}

/// Squared distance in units of the spacing from each node of `win` to the
/// nearest site. Infinite only when every axis wraps and there is no site.
pub(crate) fn squared_distances(win: &Window, dim: usize, site: &[bool]) -> Vec<f64> {
    let mut d: Vec<f64> = site
        .iter()
        .map(|&s| if s { 0.0 } else { f64::INFINITY })
        .collect();
    let mut line = Vec::new();
    let mut out = Vec::new();
    let mut env = Envelope::default();
    let mut stride = 1;
    for axis in 0..dim {
        let n = win.ext[axis];
        for base in 0..d.len() {
            if (base / stride) % n != 0 {
                continue;
            }
            line.clear();
            line.extend((0..n).map(|i| d[base + i * stride]));
            out.resize(n, 0.0);
            env.run(&line, win.periodic[axis], &mut out);
            for (i, &v) in out.iter().enumerate() {
                d[base + i * stride] = v;
            }
        }
        stride *= n;
    }
    d
}

#[derive(Default)]
struct Envelope {
    xs: Vec<f64>,
    fs: Vec<f64>,
    v: Vec<usize>,
    z: Vec<f64>,
}

impl Envelope {
    fn run(&mut self, f: &[f64], periodic: bool, out: &mut [f64]) {
        let n = f.len();
        self.xs.clear();
        self.fs.clear();
        if periodic {
            for rep in [-1.0, 0.0, 1.0] {
                for (i, &fi) in f.iter().enumerate() {
                    if fi.is_finite() {
                        self.xs.push(i as f64 + rep * n as f64);
                        self.fs.push(fi);
                    }
                }
            }
        } else {
            self.xs.push(-1.0);
            self.fs.push(0.0);
            for (i, &fi) in f.iter().enumerate() {
                if fi.is_finite() {
                    self.xs.push(i as f64);
                    self.fs.push(fi);
                }
            }
            self.xs.push(n as f64);
            self.fs.push(0.0);
        }
        if self.xs.is_empty() {
            out.iter_mut().for_each(|o| *o = f64::INFINITY);
            return;
        }
        let (xs, fs) = (&self.xs, &self.fs);
        let v = &mut self.v;
        let z = &mut self.z;
        v.clear();
        z.clear();
        v.push(0);
        z.push(f64::NEG_INFINITY);
        z.push(f64::INFINITY);
        for q in 1..xs.len() {
            loop {
                let p = *v.last().unwrap();
                let s =
                    ((fs[q] + xs[q] * xs[q]) - (fs[p] + xs[p] * xs[p])) / (2.0 * (xs[q] - xs[p]));
                let k = v.len() - 1;
                if s <= z[k] && k > 0 {
                    v.pop();
                    z.pop();
                    continue;
                }
                v.push(q);
                z[k + 1] = s;
                z.push(f64::INFINITY);
                break;
            }
        }
        let mut k = 0;
        for (q, o) in out.iter_mut().enumerate() {
            let x = q as f64;
            while z[k + 1] < x {
                k += 1;
            }
            let p = v[k];
            *o = (x - xs[p]) * (x - xs[p]) + fs[p];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(win: &Window, dim: usize, site: &[bool]) -> Vec<f64> {
        let coords = |j: usize| {
            [
                j % win.ext[0],
                (j / win.ext[0]) % win.ext[1],
                j / (win.ext[0] * win.ext[1]),
            ]
        };
        (0..site.len())
            .map(|a| {
                let ca = coords(a);
                let mut best = f64::INFINITY;
                for (b, &s) in site.iter().enumerate() {
                    if !s {
                        continue;
                    }
                    let cb = coords(b);
                    let mut d2 = 0.0;
                    for k in 0..dim {
                        let mut d = (ca[k] as f64 - cb[k] as f64).abs();
                        if win.periodic[k] {
                            d = d.min(win.ext[k] as f64 - d);
                        }
                        d2 += d * d;
                    }
                    best = best.min(d2);
                }
                // Virtual sites beyond non-periodic edges.
                for k in 0..dim {
                    if !win.periodic[k] {
                        let e = (ca[k] as f64 + 1.0).min((win.ext[k] - ca[k]) as f64);
                        best = best.min(e * e);
                    }
                }
                best
            })
            .collect()
    }

    #[test]
    fn matches_brute_force() {
        let mut state = 12345u64;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 33) as u32
        };
        for case in 0..40 {
            let dim = 1 + case % 3;
            let mut ext = [1usize; 3];
            let mut periodic = [false; 3];
            for k in 0..dim {
                ext[k] = 3 + (next() % 6) as usize;
                periodic[k] = next() % 2 == 0;
            }
            let win = Window {
                lo: [0; 3],
                ext,
                periodic,
            };
            let site: Vec<bool> = (0..win.len()).map(|_| next() % 7 == 0).collect();
            let fast = squared_distances(&win, dim, &site);
            let slow = brute(&win, dim, &site);
            for (a, b) in fast.iter().zip(&slow) {
                assert!(
                    (a - b).abs() < 1e-9 || (a.is_infinite() && b.is_infinite()),
                    "{a} vs {b}"
                );
            }
        }
    }
}
