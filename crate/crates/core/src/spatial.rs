//! Ground-node and UAV placement.
//!
//! Ground nodes are the superposition of a homogeneous PPP and a Poisson
//! cluster process (parents are cluster centres only; offspring are uniform
//! on a disc around each parent). UAVs form a homogeneous PPP and every ground
//! node attaches to its nearest UAV.

use std::f64::consts::PI;
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use crate::seed::{self, Stream};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpatialError {
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("invalid spatial config: {0}")]
    InvalidConfig(String),
    #[error("UAV pattern is empty")]
    EmptyUavSet,
    #[error("UAV {uav} has no associated ground nodes")]
    NoAssociatedNodes { uav: usize },
    #[error("UAV index {uav} out of range ({count} UAVs)")]
    UnknownUav { uav: usize, count: usize },
}

/// Axis-aligned sampling window, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Window {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self, SpatialError> {
        let finite = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite());
        if !finite || x_max <= x_min || y_max <= y_min {
            return Err(SpatialError::InvalidWindow(format!(
                "need x_min < x_max and y_min < y_max, got [{x_min}, {x_max}] x [{y_min}, {y_max}]"
            )));
        }
        Ok(Self { x_min, x_max, y_min, y_max })
    }

    /// `[0, side] x [0, side]`.
    pub fn square(side: f64) -> Result<Self, SpatialError> {
        Self::new(0.0, side, 0.0, side)
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    fn uniform_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let u: f64 = rng.random();
        let v: f64 = rng.random();
        Point { x: self.x_min + u * self.width(), y: self.y_min + v * self.height() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dist2(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn dist(self, other: Point) -> f64 {
        self.dist2(other).sqrt()
    }
}

/// Mixture parameters for the ground-node process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialConfig {
    /// Share of the PPP component.
    pub m1: f64,
    /// PPP intensity, nodes/m².
    pub lambda1: f64,
    /// Share of the cluster component.
    pub m2: f64,
    /// Cluster-centre intensity, parents/m².
    pub lambda_p2: f64,
    /// Offspring intensity inside a cluster disc, nodes/m².
    pub lambda_c2: f64,
    /// Cluster disc radius, meters.
    pub r_c: f64,
    /// UAV intensity, UAVs/m².
    pub lambda_a: f64,
}

impl SpatialConfig {
    pub fn validate(&self) -> Result<(), SpatialError> {
        let bad = |msg: String| Err(SpatialError::InvalidConfig(msg));
        for (name, v) in [("m1", self.m1), ("m2", self.m2)] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} = {v} must lie in [0, 1]"));
            }
        }
        if (self.m1 + self.m2 - 1.0).abs() > 1e-12 {
            return bad(format!("m1 + m2 = {} must equal 1", self.m1 + self.m2));
        }
        for (name, v) in [
            ("lambda1", self.lambda1),
            ("lambda_p2", self.lambda_p2),
            ("lambda_c2", self.lambda_c2),
            ("lambda_a", self.lambda_a),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} = {v} must be a finite non-negative density"));
            }
        }
        if !(self.r_c > 0.0 && self.r_c.is_finite()) {
            return bad(format!("r_c = {} must be positive", self.r_c));
        }
        Ok(())
    }

    /// Mean offspring per cluster, `π r_c² λ_c2`.
    pub fn mean_cluster_size(&self) -> f64 {
        PI * self.r_c * self.r_c * self.lambda_c2
    }
}

/// Intensity of the ground-node superposition: `m1 λ1 + m2 π r_c² λ_p2 λ_c2`.
pub fn composite_density(cfg: &SpatialConfig) -> f64 {
    cfg.m1 * cfg.lambda1 + cfg.m2 * PI * cfg.r_c * cfg.r_c * cfg.lambda_p2 * cfg.lambda_c2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Ppp,
    /// Offspring of the parent at this index in [`PointPattern::parents`].
    Cluster(usize),
}

impl Origin {
    pub fn tag(&self) -> String {
        match self {
            Origin::Ppp => "ppp".to_string(),
            Origin::Cluster(p) => format!("cluster:{p}"),
        }
    }
}

/// A realized planar pattern with per-point origin tags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointPattern {
    pub points: Vec<Point>,
    pub origins: Vec<Origin>,
    /// Cluster centres. They are not nodes themselves.
    pub parents: Vec<Point>,
}

impl PointPattern {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn push(&mut self, p: Point, origin: Origin) {
        self.points.push(p);
        self.origins.push(origin);
    }

    /// Debug export: `x,y,origin_tag`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,y,origin_tag")?;
        for (p, o) in self.points.iter().zip(&self.origins) {
            writeln!(out, "{},{},{}", p.x, p.y, o.tag())?;
        }
        Ok(())
    }
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let draw: f64 = Poisson::new(mean).expect("finite positive Poisson mean").sample(rng);
    draw as usize
}

/// Homogeneous PPP of intensity `lambda` on `window`.
pub fn sample_ppp(lambda: f64, window: &Window, seed: u64) -> PointPattern {
    let mut rng = seed::rng(seed, Stream::Ppp, 0);
    let n = poisson_count(lambda * window.area(), &mut rng);
    let mut pattern = PointPattern {
        points: Vec::with_capacity(n),
        origins: Vec::with_capacity(n),
        parents: Vec::new(),
    };
    for _ in 0..n {
        let p = window.uniform_point(&mut rng);
        pattern.push(p, Origin::Ppp);
    }
    pattern
}

/// Ground nodes: PPP(m1 λ1) plus clusters around PPP(m2 λ_p2) parents.
///
/// Parents are sampled inside the window; offspring that land outside it are
/// kept, so the expected count is exactly `composite_density * area`.
pub fn sample_ground_pattern(cfg: &SpatialConfig, window: &Window, seed: u64) -> PointPattern {
    let mut pattern = sample_ppp(cfg.m1 * cfg.lambda1, window, seed::derive(seed, Stream::GroundPpp, 0));

    let parents = sample_ppp(cfg.m2 * cfg.lambda_p2, window, seed::derive(seed, Stream::ClusterParents, 0));
    let mean_children = cfg.mean_cluster_size();
    for (idx, &centre) in parents.points.iter().enumerate() {
        let mut rng = seed::rng(seed, Stream::ClusterChildren, idx as u64);
        for _ in 0..poisson_count(mean_children, &mut rng) {
            let u: f64 = rng.random();
            let v: f64 = rng.random();
            let r = cfg.r_c * u.sqrt();
            let phi = 2.0 * PI * v;
            pattern.push(Point::new(centre.x + r * phi.cos(), centre.y + r * phi.sin()), Origin::Cluster(idx));
        }
    }
    pattern.parents = parents.points;
    pattern
}

/// UAV positions: homogeneous PPP(λ_a).
pub fn sample_uavs(cfg: &SpatialConfig, window: &Window, seed: u64) -> PointPattern {
    sample_ppp(cfg.lambda_a, window, seed::derive(seed, Stream::Uavs, 0))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociationMap {
    /// Ground-node index to UAV index.
    pub assignment: Vec<usize>,
    /// Nodes served by each UAV, `N_j`.
    pub load: Vec<usize>,
}

impl AssociationMap {
    pub fn uav_of(&self, node: usize) -> Option<usize> {
        self.assignment.get(node).copied()
    }
}

/// Uniform bucket grid over the UAV bounding box.
struct UavGrid<'a> {
    uavs: &'a [Point],
    x0: f64,
    y0: f64,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl<'a> UavGrid<'a> {
    fn build(uavs: &'a [Point]) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in uavs {
            x0 = x0.min(p.x);
            x1 = x1.max(p.x);
            y0 = y0.min(p.y);
            y1 = y1.max(p.y);
        }
        let (w, h) = (x1 - x0, y1 - y0);
        let m = uavs.len() as f64;
        let mut cell = if w > 0.0 && h > 0.0 { (w * h / m).sqrt() } else { w.max(h) / m };
        if !(cell > 0.0) {
            cell = 1.0;
        }
        let nx = (w / cell).floor() as usize + 1;
        let ny = (h / cell).floor() as usize + 1;
        let mut grid = Self { uavs, x0, y0, cell, nx, ny, buckets: vec![Vec::new(); nx * ny] };
        for (i, &p) in uavs.iter().enumerate() {
            let (cx, cy) = grid.cell_of(p);
            grid.buckets[cy * nx + cx].push(i);
        }
        grid
    }

    fn cell_of(&self, p: Point) -> (usize, usize) {
        let cx = ((p.x - self.x0) / self.cell).floor().clamp(0.0, (self.nx - 1) as f64) as usize;
        let cy = ((p.y - self.y0) / self.cell).floor().clamp(0.0, (self.ny - 1) as f64) as usize;
        (cx, cy)
    }

    fn visit(&self, cx: usize, cy: usize, q: Point, best: &mut (f64, usize)) {
        for &i in &self.buckets[cy * self.nx + cx] {
            let d2 = q.dist2(self.uavs[i]);
            if d2 < best.0 || (d2 == best.0 && i < best.1) {
                *best = (d2, i);
            }
        }
    }

    /// Nearest UAV, ties to the lowest index.
    fn nearest(&self, q: Point) -> usize {
        let (cx, cy) = self.cell_of(q);
        let (cx, cy) = (cx as isize, cy as isize);
        let max_ring = self.nx.max(self.ny) as isize;
        let mut best = (f64::INFINITY, usize::MAX);
        for r in 0..=max_ring {
            for dy in -r..=r {
                let y = cy + dy;
                if y < 0 || y >= self.ny as isize {
                    continue;
                }
                let step = if dy.abs() == r { 1 } else { (2 * r).max(1) };
                let mut dx = -r;
                while dx <= r {
                    let x = cx + dx;
                    if x >= 0 && x < self.nx as isize {
                        self.visit(x as usize, y as usize, q, &mut best);
                    }
                    dx += step;
                }
            }
            // Everything outside ring r is at least r cells away; shave a
            // little for cell-assignment rounding.
            let reach = (r as f64 * self.cell) * (1.0 - 1e-9);
            if best.1 != usize::MAX && best.0.sqrt() < reach {
                break;
            }
        }
        best.1
    }
}

/// Attaches every ground node to its Euclidean-nearest UAV.
pub fn associate_nearest(ground: &PointPattern, uavs: &PointPattern) -> Result<AssociationMap, SpatialError> {
    if uavs.is_empty() {
        return Err(SpatialError::EmptyUavSet);
    }
    let grid = UavGrid::build(&uavs.points);
    let assignment: Vec<usize> = ground.points.iter().map(|&p| grid.nearest(p)).collect();
    let mut load = vec![0; uavs.len()];
    for &u in &assignment {
        load[u] += 1;
    }
    Ok(AssociationMap { assignment, load })
}

/// Random-scheduling probability `q = 1 / N_j` for a UAV's cell.
pub fn scheduling_probability(assoc: &AssociationMap, uav: usize) -> Result<f64, SpatialError> {
    let n = *assoc
        .load
        .get(uav)
        .ok_or(SpatialError::UnknownUav { uav, count: assoc.load.len() })?;
    if n == 0 {
        return Err(SpatialError::NoAssociatedNodes { uav });
    }
    Ok(1.0 / n as f64)
}
