//! Marching-squares zero-level contours of a real field sampled on a
//! periodic grid.
//!
//! Samples sit at integer grid coordinates (i, j), 0 ≤ i < nx, 0 ≤ j < ny,
//! and the grid wraps in both directions. Nodes with |f| ≤ `ztol` count as
//! non-positive. Segments are chained through shared cell edges, so every
//! chain closes on the torus; chains are cut where they cross the seam.

use std::collections::HashMap;

/// Cell edge: horizontal (i, j)→(i+1, j) or vertical (i, j)→(i, j+1), indices wrapped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

/// A polyline in fractional grid coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPolyline {
    pub points: Vec<(f64, f64)>,
    pub closed: bool,
}

pub struct Contour<'a> {
    values: &'a [f64],
    nx: usize,
    ny: usize,
    ztol: f64,
}

impl<'a> Contour<'a> {
    /// `values` is row-major with `ky` outer: index = j·nx + i.
    pub fn new(values: &'a [f64], nx: usize, ny: usize, ztol: f64) -> Self {
        assert_eq!(values.len(), nx * ny, "sample count must equal nx*ny");
        Contour {
            values,
            nx,
            ny,
            ztol,
        }
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        let v = self.values[(j % self.ny) * self.nx + i % self.nx];
        if v.abs() <= self.ztol {
            0.0
        } else {
            v
        }
    }

    fn positive(&self, i: usize, j: usize) -> bool {
        self.at(i, j) > 0.0
    }

    /// Interpolated crossing point on an edge, in unwrapped-then-folded grid coordinates.
    fn vertex(&self, e: Edge) -> (f64, f64) {
        let (i, j, di, dj) = match e {
            Edge::H(i, j) => (i, j, 1, 0),
            Edge::V(i, j) => (i, j, 0, 1),
        };
        let fa = self.at(i, j);
        let fb = self.at(i + di, j + dj);
        let t = if fa == fb { 0.5 } else { fa / (fa - fb) };
        let x = (i as f64 + t * di as f64).rem_euclid(self.nx as f64);
        let y = (j as f64 + t * dj as f64).rem_euclid(self.ny as f64);
        (x, y)
    }

    fn segments(&self) -> Vec<(Edge, Edge)> {
        let (nx, ny) = (self.nx, self.ny);
        let mut out = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                let (i1, j1) = ((i + 1) % nx, (j + 1) % ny);
                let a = self.positive(i, j);
                let b = self.positive(i1, j);
                let c = self.positive(i1, j1);
                let d = self.positive(i, j1);
                let bottom = Edge::H(i, j);
                let right = Edge::V(i1, j);
                let top = Edge::H(i, j1);
                let left = Edge::V(i, j);
                let mut cross = Vec::with_capacity(4);
                if a != b {
                    cross.push(bottom);
                }
                if b != c {
                    cross.push(right);
                }
                if c != d {
                    cross.push(top);
                }
                if d != a {
                    cross.push(left);
                }
                match cross.len() {
                    2 => out.push((cross[0], cross[1])),
                    4 => {
                        let center = 0.25
                            * (self.at(i, j) + self.at(i1, j) + self.at(i1, j1) + self.at(i, j1));
                        // Cut around the two corners whose sign differs from the centre.
                        if (center > 0.0) == a {
                            out.push((bottom, right));
                            out.push((top, left));
                        } else {
                            out.push((left, bottom));
                            out.push((right, top));
                        }
                    }
                    _ => {}
                }
            }
        }
        out
    }

    /// Zero-level polylines in grid coordinates.
    pub fn polylines(&self) -> Vec<GridPolyline> {
        let segs = self.segments();
        let mut by_edge: HashMap<Edge, Vec<usize>> = HashMap::new();
        for (s, &(e1, e2)) in segs.iter().enumerate() {
            by_edge.entry(e1).or_default().push(s);
            by_edge.entry(e2).or_default().push(s);
        }
        let mut used = vec![false; segs.len()];
        let mut chains: Vec<(Vec<Edge>, bool)> = Vec::new();
        for start in 0..segs.len() {
            if used[start] {
                continue;
            }
            used[start] = true;
            let (e0, e1) = segs[start];
            let mut forward = vec![e0, e1];
            let closed = self.extend(&segs, &by_edge, &mut used, &mut forward);
            if !closed {
                let mut backward = vec![e0];
                self.extend(&segs, &by_edge, &mut used, &mut backward);
                backward.reverse();
                backward.pop();
                backward.extend(forward);
                forward = backward;
            }
            chains.push((forward, closed));
        }
        let mut out = Vec::new();
        for (edges, closed) in chains {
            let pts: Vec<(f64, f64)> = edges.iter().map(|&e| self.vertex(e)).collect();
            out.extend(self.cut_at_seam(pts, closed));
        }
        out
    }

    /// Follows unused segments from the last edge of `chain`; true if the chain closed.
    fn extend(
        &self,
        segs: &[(Edge, Edge)],
        by_edge: &HashMap<Edge, Vec<usize>>,
        used: &mut [bool],
        chain: &mut Vec<Edge>,
    ) -> bool {
        loop {
            let tail = *chain.last().expect("nonempty chain");
            let next = by_edge[&tail].iter().copied().find(|&s| !used[s]);
            let Some(s) = next else {
                return chain.len() > 2 && chain.first() == chain.last();
            };
            used[s] = true;
            let (a, b) = segs[s];
            let other = if a == tail { b } else { a };
            chain.push(other);
            if Some(&other) == chain.first() {
                return true;
            }
        }
    }

    fn cut_at_seam(&self, pts: Vec<(f64, f64)>, closed: bool) -> Vec<GridPolyline> {
        let (hx, hy) = (self.nx as f64 / 2.0, self.ny as f64 / 2.0);
        let jump = |p: (f64, f64), q: (f64, f64)| (p.0 - q.0).abs() > hx || (p.1 - q.1).abs() > hy;
        let cuts: Vec<usize> = (1..pts.len())
            .filter(|&k| jump(pts[k - 1], pts[k]))
            .collect();
        if cuts.is_empty() {
            return vec![GridPolyline {
                points: pts,
                closed,
            }];
        }
        let mut pieces = Vec::new();
        let mut start = 0;
        for &c in &cuts {
            pieces.push(pts[start..c].to_vec());
            start = c;
        }
        let tail = pts[start..].to_vec();
        if closed {
            // The closing vertex repeats the first one: join the tail to the head.
            let mut head = pieces.remove(0);
            let mut joined = tail;
            joined.pop();
            joined.append(&mut head);
            pieces.insert(0, joined);
        } else {
            pieces.push(tail);
        }
        pieces
            .into_iter()
            .filter(|p| p.len() >= 2)
            .map(|points| GridPolyline {
                points,
                closed: false,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn field(nx: usize, ny: usize, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut v = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let kx = -PI + 2.0 * PI * i as f64 / nx as f64;
                let ky = -PI + 2.0 * PI * j as f64 / ny as f64;
                v.push(f(kx, ky));
            }
        }
        v
    }

    fn to_k(x: f64, n: usize) -> f64 {
        -PI + 2.0 * PI * x / n as f64
    }

    #[test]
    fn constant_field_has_no_curves() {
        let v = vec![1.0; 64];
        assert!(Contour::new(&v, 8, 8, 0.0).polylines().is_empty());
    }

    #[test]
    fn cosine_gives_two_vertical_lines() {
        let (nx, ny) = (40, 30);
        let v = field(nx, ny, |kx, _| kx.cos());
        let lines = Contour::new(&v, nx, ny, 0.0).polylines();
        assert_eq!(lines.len(), 2);
        for l in &lines {
            // Each line winds around the torus, so it is cut once at the seam.
            assert!(!l.closed);
            assert_eq!(l.points.len(), ny);
            let kx0 = to_k(l.points[0].0, nx);
            for &(x, _) in &l.points {
                let kx = to_k(x, nx);
                assert!((kx - kx0).abs() < 1e-12);
                assert!((kx.abs() - PI / 2.0).abs() < 2e-3, "kx = {kx}");
            }
        }
    }

    #[test]
    fn circle_is_one_closed_loop() {
        let (nx, ny) = (64, 64);
        let v = field(nx, ny, |kx, ky| kx * kx + ky * ky - 1.0);
        let lines = Contour::new(&v, nx, ny, 0.0).polylines();
        assert_eq!(lines.len(), 1);
        assert!(lines[0].closed);
        assert_eq!(lines[0].points.first(), lines[0].points.last());
        for &(x, y) in &lines[0].points {
            let r = to_k(x, nx).hypot(to_k(y, ny));
            assert!((r - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn loop_across_seam_is_cut() {
        let (nx, ny) = (32, 32);
        let v = field(nx, ny, |kx, ky| 0.5 - (kx.cos() + 1.0).hypot(ky));
        let lines = Contour::new(&v, nx, ny, 0.0).polylines();
        assert_eq!(lines.len(), 2);
        assert!(lines.iter().all(|l| !l.closed));
    }

    #[test]
    fn saddle_cells_are_consistent() {
        let (nx, ny) = (16, 16);
        let v = field(nx, ny, |kx, ky| kx.sin() * ky.sin() + 0.01);
        for l in Contour::new(&v, nx, ny, 0.0).polylines() {
            assert!(l.points.len() >= 2);
        }
    }
}
