//! Rectangular cell partitions of a compact box, with optional periodic axes.
//!
//! The box (possibly with some axes wrapped into circles) stands in for the
//! compact metric space; cells are half-open per axis so that every point has
//! exactly one owning cell.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::GridError;

/// A compact box `[lo, hi]^dim` where each axis may be periodic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    bounds: Vec<(f64, f64)>,
    periodic: Vec<bool>,
}

impl Domain {
    pub fn new(bounds: Vec<(f64, f64)>, periodic: Vec<bool>) -> Result<Self, GridError> {
        if bounds.is_empty() {
            return Err(GridError::EmptyDomain);
        }
        if bounds.len() != periodic.len() {
            return Err(GridError::DimensionMismatch {
                expected: bounds.len(),
                found: periodic.len(),
            });
        }
        for (axis, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(GridError::BadInterval { axis, lo, hi });
            }
        }
        Ok(Domain { bounds, periodic })
    }

    /// The unit circle `[0, 1)` with wrap-around.
    pub fn circle() -> Self {
        Self::torus(1)
    }

    /// The unit torus `[0, 1)^dim`.
    pub fn torus(dim: usize) -> Self {
        Domain {
            bounds: vec![(0.0, 1.0); dim],
            periodic: vec![true; dim],
        }
    }

    /// The closed unit cube `[0, 1]^dim`, no wrap-around.
    pub fn unit_cube(dim: usize) -> Self {
        Domain {
            bounds: vec![(0.0, 1.0); dim],
            periodic: vec![false; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn is_periodic(&self, axis: usize) -> bool {
        self.periodic[axis]
    }

    pub fn fully_periodic(&self) -> bool {
        self.periodic.iter().all(|&p| p)
    }

    pub fn span(&self, axis: usize) -> f64 {
        let (lo, hi) = self.bounds[axis];
        hi - lo
    }

    /// Reduces a coordinate on a periodic axis into `[lo, hi)`; other axes are
    /// returned unchanged.
    pub fn reduce_coord(&self, axis: usize, x: f64) -> f64 {
        if !self.periodic[axis] {
            return x;
        }
        let (lo, hi) = self.bounds[axis];
        let span = hi - lo;
        let mut r = (x - lo).rem_euclid(span) + lo;
        // rem_euclid can round up to exactly `span` for tiny negative inputs
        if r >= hi {
            r = lo;
        }
        r
    }

    /// Periodic reduction of every coordinate.
    pub fn reduce(&self, p: &Point) -> Point {
        Point(
            p.0.iter()
                .enumerate()
                .map(|(axis, &x)| self.reduce_coord(axis, x))
                .collect(),
        )
    }

    /// Checks the coordinate count and that non-periodic coordinates lie in
    /// their closed interval.
    pub fn check_point(&self, p: &Point) -> Result<(), GridError> {
        if p.dim() != self.dim() {
            return Err(GridError::DimensionMismatch {
                expected: self.dim(),
                found: p.dim(),
            });
        }
        for (axis, &x) in p.0.iter().enumerate() {
            if !x.is_finite() {
                return Err(GridError::NonFinite { axis });
            }
            let (lo, hi) = self.bounds[axis];
            if !self.periodic[axis] && (x < lo || x > hi) {
                return Err(GridError::OutsideDomain {
                    axis,
                    value: x,
                    lo,
                    hi,
                });
            }
        }
        Ok(())
    }

    /// Per-axis separation, taking the shorter arc on periodic axes.
    fn axis_delta(&self, axis: usize, a: f64, b: f64) -> f64 {
        let d = (a - b).abs();
        if self.periodic[axis] {
            let span = self.span(axis);
            let d = d.rem_euclid(span);
            d.min(span - d)
        } else {
            d
        }
    }

    /// The Euclidean product metric with wrap-around on periodic axes.
    pub fn metric(&self, p: &Point, q: &Point) -> Result<f64, GridError> {
        for pt in [p, q] {
            if pt.dim() != self.dim() {
                return Err(GridError::DimensionMismatch {
                    expected: self.dim(),
                    found: pt.dim(),
                });
            }
        }
        Ok(self.metric_unchecked(p, q))
    }

    pub(crate) fn metric_unchecked(&self, p: &Point, q: &Point) -> f64 {
        p.0.iter()
            .zip(&q.0)
            .enumerate()
            .map(|(axis, (&a, &b))| {
                let d = self.axis_delta(axis, a, b);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Diameter of the whole domain under [`Domain::metric`].
    pub fn diameter(&self) -> f64 {
        (0..self.dim())
            .map(|axis| {
                let s = self.span(axis);
                let d = if self.periodic[axis] { s / 2.0 } else { s };
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// A point of a [`Domain`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

impl From<f64> for Point {
    fn from(x: f64) -> Self {
        Point(vec![x])
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

/// Row-major index of a grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellId(pub usize);

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A uniform subdivision of a [`Domain`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    domain: Domain,
    subdivisions: Vec<usize>,
}

impl Grid {
    pub fn new(domain: Domain, subdivisions: Vec<usize>) -> Result<Self, GridError> {
        if subdivisions.len() != domain.dim() {
            return Err(GridError::DimensionMismatch {
                expected: domain.dim(),
                found: subdivisions.len(),
            });
        }
        if let Some(axis) = subdivisions.iter().position(|&n| n == 0) {
            return Err(GridError::ZeroSubdivision { axis });
        }
        subdivisions
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .ok_or(GridError::TooManyCells)?;
        Ok(Grid { domain, subdivisions })
    }

    /// `n` cells on the unit circle.
    pub fn circle(n: usize) -> Result<Self, GridError> {
        Grid::new(Domain::circle(), vec![n])
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn subdivisions(&self) -> &[usize] {
        &self.subdivisions
    }

    pub fn num_cells(&self) -> usize {
        self.subdivisions.iter().product()
    }

    pub fn cell_width(&self, axis: usize) -> f64 {
        self.domain.span(axis) / self.subdivisions[axis] as f64
    }

    /// Per-axis coordinates of a cell; the last axis varies fastest.
    pub fn coords_of(&self, c: CellId) -> Vec<usize> {
        let mut rest = c.0;
        let mut coords = vec![0; self.subdivisions.len()];
        for (axis, &n) in self.subdivisions.iter().enumerate().rev() {
            coords[axis] = rest % n;
            rest /= n;
        }
        coords
    }

    pub fn cell_at(&self, coords: &[usize]) -> CellId {
        debug_assert_eq!(coords.len(), self.subdivisions.len());
        let idx = coords
            .iter()
            .zip(&self.subdivisions)
            .fold(0, |acc, (&i, &n)| acc * n + i);
        CellId(idx)
    }

    fn axis_index(&self, axis: usize, x: f64) -> usize {
        let (lo, _) = self.domain.bounds[axis];
        let n = self.subdivisions[axis];
        let i = ((x - lo) / self.cell_width(axis)).floor();
        if i < 0.0 {
            0
        } else {
            (i as usize).min(n - 1)
        }
    }

    /// The unique cell whose half-open box contains `p`.
    pub fn cell_of(&self, p: &Point) -> Result<CellId, GridError> {
        self.domain.check_point(p)?;
        let q = self.domain.reduce(p);
        let coords: Vec<usize> = (0..self.domain.dim())
            .map(|axis| self.axis_index(axis, q.0[axis]))
            .collect();
        Ok(self.cell_at(&coords))
    }

    pub fn cell_center(&self, c: CellId) -> Point {
        let coords = self.coords_of(c);
        Point(
            coords
                .iter()
                .enumerate()
                .map(|(axis, &i)| {
                    let (lo, _) = self.domain.bounds[axis];
                    lo + (i as f64 + 0.5) * self.cell_width(axis)
                })
                .collect(),
        )
    }

    /// Euclidean norm of the per-axis cell widths.
    pub fn cell_diameter(&self) -> f64 {
        (0..self.domain.dim())
            .map(|axis| self.cell_width(axis).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Cells whose closed box meets the closed ball `B(p, r)`.
    ///
    /// `p` may lie outside the domain on non-periodic axes; the ball is then
    /// clipped to the box. The result is sorted ascending.
    pub fn ball_cells(&self, p: &Point, r: f64) -> Vec<CellId> {
        assert_eq!(p.dim(), self.domain.dim(), "point dimension");
        let dim = self.domain.dim();
        // candidate index ranges per axis, plus the squared distance from p
        // to each candidate slab along that axis
        let mut per_axis: Vec<Vec<(usize, f64)>> = Vec::with_capacity(dim);
        for axis in 0..dim {
            let n = self.subdivisions[axis];
            let w = self.cell_width(axis);
            let (lo, hi) = self.domain.bounds[axis];
            let x = self.domain.reduce_coord(axis, p.0[axis]);
            let mut cands = Vec::new();
            if self.domain.periodic[axis] {
                let span = hi - lo;
                if 2.0 * r >= span {
                    cands.extend(0..n);
                } else {
                    let first = ((x - lo - r) / w).floor() as i64 - 1;
                    let last = ((x - lo + r) / w).floor() as i64 + 1;
                    let mut seen = vec![false; n];
                    for k in first..=last {
                        let i = k.rem_euclid(n as i64) as usize;
                        if !seen[i] {
                            seen[i] = true;
                            cands.push(i);
                        }
                    }
                }
                let entries = cands
                    .into_iter()
                    .map(|i| {
                        let a = lo + i as f64 * w;
                        let b = a + w;
                        let d = periodic_interval_gap(x, a, b, span);
                        (i, d * d)
                    })
                    .filter(|&(_, d2)| d2 <= r * r)
                    .collect();
                per_axis.push(entries);
            } else {
                let first = (((x - r - lo) / w).floor() as i64 - 1).max(0);
                let last = (((x + r - lo) / w).floor() as i64 + 1).min(n as i64 - 1);
                let entries = (first..=last)
                    .map(|i| {
                        let i = i as usize;
                        let a = lo + i as f64 * w;
                        let b = a + w;
                        let d = if x < a {
                            a - x
                        } else if x > b {
                            x - b
                        } else {
                            0.0
                        };
                        (i, d * d)
                    })
                    .filter(|&(_, d2)| d2 <= r * r)
                    .collect();
                per_axis.push(entries);
            }
        }

        let mut out = Vec::new();
        let mut coords = vec![0usize; dim];
        collect_product(&per_axis, 0, 0.0, r * r, &mut coords, &mut |cs| {
            out.push(self.cell_at(cs))
        });
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Distance from `x` to the closed arc `[a, b]` on a circle of length `span`.
fn periodic_interval_gap(x: f64, a: f64, b: f64, span: f64) -> f64 {
    if x >= a && x <= b {
        return 0.0;
    }
    let to = |y: f64| {
        let d = (x - y).abs().rem_euclid(span);
        d.min(span - d)
    };
    to(a).min(to(b))
}

fn collect_product(
    per_axis: &[Vec<(usize, f64)>],
    axis: usize,
    acc: f64,
    r2: f64,
    coords: &mut Vec<usize>,
    emit: &mut impl FnMut(&[usize]),
) {
    if axis == per_axis.len() {
        emit(coords);
        return;
    }
    for &(i, d2) in &per_axis[axis] {
        let total = acc + d2;
        if total <= r2 {
            coords[axis] = i;
            collect_product(per_axis, axis + 1, total, r2, coords, emit);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[usize]) -> Vec<CellId> {
        v.iter().map(|&i| CellId(i)).collect()
    }

    #[test]
    fn circle_metric_takes_short_arc() {
        let d = Domain::circle();
        let m = d.metric(&0.1.into(), &0.9.into()).unwrap();
        assert!((m - 0.2).abs() < 1e-12);
        assert_eq!(d.metric(&0.37.into(), &0.37.into()).unwrap(), 0.0);
    }

    #[test]
    fn torus_metric_wraps_both_axes() {
        let d = Domain::torus(2);
        let m = d
            .metric(&Point(vec![0.95, 0.1]), &Point(vec![0.05, 0.2]))
            .unwrap();
        assert!((m - 0.141421356).abs() < 1e-6);
    }

    #[test]
    fn metric_rejects_dimension_mismatch() {
        let d = Domain::torus(2);
        assert!(matches!(
            d.metric(&0.1.into(), &Point(vec![0.1, 0.2])),
            Err(GridError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn cell_lookup() {
        let g = Grid::circle(4).unwrap();
        assert_eq!(g.cell_of(&0.0.into()).unwrap(), CellId(0));
        assert_eq!(g.cell_of(&0.999.into()).unwrap(), CellId(3));
        assert_eq!(g.cell_of(&1.0.into()).unwrap(), CellId(0));
        assert_eq!(g.cell_of(&(-0.1).into()).unwrap(), CellId(3));

        let t = Grid::new(Domain::torus(2), vec![8, 8]).unwrap();
        let c = t.cell_of(&Point(vec![0.51, 0.26])).unwrap();
        assert_eq!(t.coords_of(c), vec![4, 2]);
    }

    #[test]
    fn cell_of_rejects_points_outside_non_periodic_axis() {
        let g = Grid::new(Domain::unit_cube(1), vec![4]).unwrap();
        assert!(matches!(
            g.cell_of(&1.5.into()),
            Err(GridError::OutsideDomain { .. })
        ));
        // closed upper end belongs to the last cell
        assert_eq!(g.cell_of(&1.0.into()).unwrap(), CellId(3));
    }

    #[test]
    fn centers() {
        let g = Grid::circle(4).unwrap();
        assert_eq!(g.cell_center(CellId(0)).0, vec![0.125]);
        assert_eq!(g.cell_center(CellId(3)).0, vec![0.875]);
        let t = Grid::new(Domain::torus(2), vec![8, 8]).unwrap();
        let c = t.cell_at(&[4, 2]);
        assert_eq!(t.cell_center(c).0, vec![0.5625, 0.3125]);
    }

    #[test]
    fn diameters() {
        assert_eq!(Grid::circle(4).unwrap().cell_diameter(), 0.25);
        assert_eq!(Grid::circle(1024).unwrap().cell_diameter(), 1.0 / 1024.0);
        let sq = Grid::new(Domain::unit_cube(2), vec![10, 10]).unwrap();
        assert!((sq.cell_diameter() - 0.141421356).abs() < 1e-6);
    }

    #[test]
    fn ball_on_circle_includes_tangent_cells() {
        // [-0.13, 0.13] mod 1 meets [0.75, 0.875] at its upper end as well
        let g = Grid::circle(8).unwrap();
        assert_eq!(g.ball_cells(&0.0.into(), 0.13), ids(&[0, 1, 6, 7]));
        assert_eq!(g.ball_cells(&0.0.into(), 0.12), ids(&[0, 7]));
    }

    #[test]
    fn small_ball_at_center_is_singleton() {
        let g = Grid::circle(8).unwrap();
        let p = g.cell_center(CellId(5));
        assert_eq!(g.ball_cells(&p, 0.01), ids(&[5]));
    }

    #[test]
    fn half_diameter_ball_covers_circle() {
        let g = Grid::circle(8).unwrap();
        assert_eq!(g.ball_cells(&0.3.into(), 0.5), ids(&[0, 1, 2, 3, 4, 5, 6, 7]));
    }

    #[test]
    fn ball_is_round_not_square() {
        let g = Grid::new(Domain::torus(2), vec![10, 10]).unwrap();
        let p = g.cell_center(g.cell_at(&[5, 5]));
        let cells = g.ball_cells(&p, 0.16);
        // the corner cell (7, 7) has its nearest corner at distance ~0.2121
        assert!(!cells.contains(&g.cell_at(&[7, 7])));
        assert!(cells.contains(&g.cell_at(&[7, 5])));
        assert!(cells.contains(&g.cell_at(&[6, 6])));
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(Domain::circle(), vec![0]).is_err());
        assert!(Grid::new(Domain::circle(), vec![2, 2]).is_err());
        assert!(Domain::new(vec![(1.0, 1.0)], vec![false]).is_err());
    }
}
