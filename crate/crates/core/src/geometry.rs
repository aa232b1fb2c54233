//! Domains, structured grids and the closed-form geometric data attached to them.
//!
//! Interval, ball and shell are discretized by a 1D grid on the radial (or
//! axial) coordinate; the ball and shell carry the `s^{n-1}` surface factor in
//! their quadrature weights. Rectangles `[0, w] x [0, h]` use a tensor grid.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometric description of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Domain {
    Interval { a: f64, b: f64 },
    Ball { n: usize, radius: f64 },
    Shell { n: usize, inner: f64, outer: f64 },
    Rectangle { width: f64, height: f64 },
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// Area of the unit sphere `S^{n-1}`.
pub fn unit_sphere_area(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n)
}

impl Domain {
    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64| v.is_finite();
        match *self {
            Domain::Interval { a, b } => {
                if !(finite(a) && finite(b) && a < b) {
                    return Err(Error::InvalidDomain(format!("interval needs a < b (got a={a}, b={b})")));
                }
            }
            Domain::Ball { n, radius } => {
                if n < 2 {
                    return Err(Error::InvalidDomain(format!("ball needs n >= 2 (got {n}); use an interval in 1D")));
                }
                if !(finite(radius) && radius > 0.0) {
                    return Err(Error::InvalidDomain(format!("ball radius must be positive (got {radius})")));
                }
            }
            Domain::Shell { n, inner, outer } => {
                if n < 2 {
                    return Err(Error::InvalidDomain(format!("shell needs n >= 2 (got {n})")));
                }
                if !(finite(inner) && finite(outer) && 0.0 < inner && inner < outer) {
                    return Err(Error::InvalidDomain(format!(
                        "shell needs 0 < inner < outer (got inner={inner}, outer={outer})"
                    )));
                }
            }
            Domain::Rectangle { width, height } => {
                if !(finite(width) && finite(height) && width > 0.0 && height > 0.0) {
                    return Err(Error::InvalidDomain(format!(
                        "rectangle sides must be positive (got {width} x {height})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Domain::Interval { .. } => "interval",
            Domain::Ball { .. } => "ball",
            Domain::Shell { .. } => "shell",
            Domain::Rectangle { .. } => "rectangle",
        }
    }

    /// Ambient dimension of the domain.
    pub fn dimension(&self) -> usize {
        match *self {
            Domain::Interval { .. } => 1,
            Domain::Ball { n, .. } | Domain::Shell { n, .. } => n,
            Domain::Rectangle { .. } => 2,
        }
    }

    /// Lebesgue measure `|Omega|`.
    pub fn volume(&self) -> f64 {
        match *self {
            Domain::Interval { a, b } => b - a,
            Domain::Ball { n, radius } => unit_ball_volume(n) * radius.powi(n as i32),
            Domain::Shell { n, inner, outer } => unit_ball_volume(n) * (outer.powi(n as i32) - inner.powi(n as i32)),
            Domain::Rectangle { width, height } => width * height,
        }
    }

    /// Perimeter `P(Omega)`; the interval boundary is two atoms of unit mass.
    pub fn perimeter(&self) -> f64 {
        match *self {
            Domain::Interval { .. } => 2.0,
            Domain::Ball { n, radius } => unit_sphere_area(n) * radius.powi(n as i32 - 1),
            Domain::Shell { n, inner, outer } => {
                unit_sphere_area(n) * (inner.powi(n as i32 - 1) + outer.powi(n as i32 - 1))
            }
            Domain::Rectangle { width, height } => 2.0 * (width + height),
        }
    }

    /// `P(Omega) / |Omega|`, the constant of the test-function bound
    /// `lambda <= -beta^p P / |Omega|`.
    pub fn perimeter_volume_ratio(&self) -> f64 {
        self.perimeter() / self.volume()
    }

    /// Maximum mean curvature of the boundary with respect to the outward
    /// normal. The inner sphere of a shell curves away from the domain, so
    /// its contribution is `-1/inner` and the outer sphere always wins.
    pub fn max_mean_curvature(&self) -> Result<f64> {
        match *self {
            Domain::Ball { radius, .. } => Ok(1.0 / radius),
            Domain::Shell { inner, outer, .. } => Ok((1.0 / outer).max(-1.0 / inner)),
            Domain::Interval { .. } => Err(Error::CurvatureUndefined("interval")),
            Domain::Rectangle { .. } => Err(Error::CurvatureUndefined("rectangle")),
        }
    }

    /// Largest distance from a point of the domain to its boundary.
    pub fn inradius(&self) -> f64 {
        match *self {
            Domain::Interval { a, b } => 0.5 * (b - a),
            Domain::Ball { radius, .. } => radius,
            Domain::Shell { inner, outer, .. } => 0.5 * (outer - inner),
            Domain::Rectangle { width, height } => 0.5 * width.min(height),
        }
    }

    /// Euclidean distance to the boundary. Line domains take the grid
    /// coordinate (`x` for the interval, `|x|` for ball and shell).
    pub fn distance_to_boundary(&self, point: [f64; 2]) -> f64 {
        let [x, y] = point;
        let d = match *self {
            Domain::Interval { a, b } => (x - a).min(b - x),
            Domain::Ball { radius, .. } => radius - x,
            Domain::Shell { inner, outer, .. } => (x - inner).min(outer - x),
            Domain::Rectangle { width, height } => x.min(width - x).min(y).min(height - y),
        };
        d.max(0.0)
    }

    /// Distance to the ridge set where the boundary distance is not
    /// differentiable (center, midpoint, medial axis of the rectangle).
    pub fn ridge_distance(&self, point: [f64; 2]) -> f64 {
        let [x, y] = point;
        match *self {
            Domain::Interval { a, b } => (x - 0.5 * (a + b)).abs(),
            Domain::Ball { .. } => x.abs(),
            Domain::Shell { inner, outer, .. } => (x - 0.5 * (inner + outer)).abs(),
            Domain::Rectangle { width, height } => {
                // edges: left, right, bottom, top
                let e = [x, width - x, y, height - y];
                let nearest = (0..4).min_by(|&i, &j| e[i].total_cmp(&e[j])).unwrap_or(0);
                (0..4)
                    .filter(|&j| j != nearest)
                    .map(|j| {
                        let opposite = nearest / 2 == j / 2;
                        let scale = if opposite { 2.0 } else { std::f64::consts::SQRT_2 };
                        (e[j] - e[nearest]).max(0.0) / scale
                    })
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Interior,
    Boundary,
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::Interior => "interior",
            Role::Boundary => "boundary",
        }
    }
}

/// Point arrangement of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// `nodes` points along one coordinate.
    Line { nodes: usize },
    /// `nx * ny` points, x-major (`index = j * nx + i`).
    Tensor { nx: usize, ny: usize },
}

/// Identity of a grid: the domain and resolution it was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridKey {
    pub domain: Domain,
    pub resolution: usize,
}

/// A structured discretization of a [`Domain`].
#[derive(Debug, Clone)]
pub struct Grid {
    key: GridKey,
    layout: Layout,
    spacing: [f64; 2],
    points: Vec<[f64; 2]>,
    roles: Vec<Role>,
    normals: Vec<Vec<[f64; 2]>>,
    volume_weights: Vec<f64>,
    boundary_weights: Vec<f64>,
    cell_measures: Vec<f64>,
}

/// Builds a uniform grid with `resolution` intervals per axis.
pub fn make_grid(domain: Domain, resolution: usize) -> Result<Grid> {
    domain.validate()?;
    if resolution < 4 {
        return Err(Error::InvalidParameter(format!("resolution must be at least 4 (got {resolution})")));
    }
    let key = GridKey { domain, resolution };
    Ok(match domain {
        Domain::Interval { a, b } => line_grid(key, a, b, 1, |_| 1.0, [Some([-1.0, 0.0]), Some([1.0, 0.0])]),
        Domain::Ball { n, radius } => line_grid(key, 0.0, radius, n, |s| s, [None, Some([1.0, 0.0])]),
        Domain::Shell { n, inner, outer } => {
            line_grid(key, inner, outer, n, |s| s, [Some([-1.0, 0.0]), Some([1.0, 0.0])])
        }
        Domain::Rectangle { width, height } => tensor_grid(key, width, height),
    })
}

/// `radius(s)` is the distance from the symmetry center entering `s^{n-1}`;
/// `ends` holds the outward normals of the two endpoints (None: not a boundary).
fn line_grid(
    key: GridKey,
    lo: f64,
    hi: f64,
    n: usize,
    radius: impl Fn(f64) -> f64,
    ends: [Option<[f64; 2]>; 2],
) -> Grid {
    let cells = key.resolution;
    let h = (hi - lo) / cells as f64;
    let area = if n == 1 { 1.0 } else { unit_sphere_area(n) };
    let surface = |s: f64| area * radius(s).powi(n as i32 - 1);

    let points: Vec<[f64; 2]> = (0..=cells)
        .map(|i| {
            let s = if i == cells { hi } else { lo + i as f64 * h };
            [s, 0.0]
        })
        .collect();

    let mut roles = vec![Role::Interior; cells + 1];
    let mut normals = vec![Vec::new(); cells + 1];
    let mut boundary_weights = vec![0.0; cells + 1];
    for (end, idx) in [(ends[0], 0), (ends[1], cells)] {
        if let Some(nu) = end {
            roles[idx] = Role::Boundary;
            normals[idx].push(nu);
            boundary_weights[idx] = surface(points[idx][0]);
        }
    }

    let volume_weights = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let half = if i == 0 || i == cells { 0.5 } else { 1.0 };
            half * h * surface(p[0])
        })
        .collect();

    let cell_measures = (0..cells)
        .map(|k| {
            if n == 1 {
                h
            } else {
                let (s0, s1) = (radius(points[k][0]), radius(points[k + 1][0]));
                area * (s1.powi(n as i32) - s0.powi(n as i32)) / n as f64
            }
        })
        .collect();

    Grid {
        key,
        layout: Layout::Line { nodes: cells + 1 },
        spacing: [h, h],
        points,
        roles,
        normals,
        volume_weights,
        boundary_weights,
        cell_measures,
    }
}

fn tensor_grid(key: GridKey, width: f64, height: f64) -> Grid {
    let cells = key.resolution;
    let (nx, ny) = (cells + 1, cells + 1);
    let hx = width / cells as f64;
    let hy = height / cells as f64;
    let coord = |i: usize, len: f64, step: f64| if i == cells { len } else { i as f64 * step };
    let trap = |i: usize, step: f64| if i == 0 || i == cells { 0.5 * step } else { step };

    let total = nx * ny;
    let mut points = Vec::with_capacity(total);
    let mut roles = Vec::with_capacity(total);
    let mut normals = Vec::with_capacity(total);
    let mut volume_weights = Vec::with_capacity(total);
    let mut boundary_weights = Vec::with_capacity(total);
    for j in 0..ny {
        for i in 0..nx {
            points.push([coord(i, width, hx), coord(j, height, hy)]);
            volume_weights.push(trap(i, hx) * trap(j, hy));

            let mut nu = Vec::new();
            let mut bw = 0.0;
            if i == 0 {
                nu.push([-1.0, 0.0]);
                bw += trap(j, hy);
            }
            if i == cells {
                nu.push([1.0, 0.0]);
                bw += trap(j, hy);
            }
            if j == 0 {
                nu.push([0.0, -1.0]);
                bw += trap(i, hx);
            }
            if j == cells {
                nu.push([0.0, 1.0]);
                bw += trap(i, hx);
            }
            roles.push(if nu.is_empty() { Role::Interior } else { Role::Boundary });
            normals.push(nu);
            boundary_weights.push(bw);
        }
    }

    Grid {
        key,
        layout: Layout::Tensor { nx, ny },
        spacing: [hx, hy],
        points,
        roles,
        normals,
        volume_weights,
        boundary_weights,
        cell_measures: vec![hx * hy; cells * cells],
    }
}

impl Grid {
    pub fn key(&self) -> GridKey {
        self.key
    }

    pub fn domain(&self) -> &Domain {
        &self.key.domain
    }

    pub fn resolution(&self) -> usize {
        self.key.resolution
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    /// Largest grid spacing.
    pub fn spacing(&self) -> f64 {
        match self.layout {
            Layout::Line { .. } => self.spacing[0],
            Layout::Tensor { .. } => self.spacing[0].max(self.spacing[1]),
        }
    }

    /// Per-axis spacing `[hx, hy]`; line grids repeat `h`.
    pub fn axis_spacing(&self) -> [f64; 2] {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn is_boundary(&self, index: usize) -> bool {
        self.roles[index] == Role::Boundary
    }

    pub fn boundary_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.is_boundary(i))
    }

    /// Outward unit normals at a point; empty for interior points, two at
    /// rectangle corners.
    pub fn normals(&self, index: usize) -> &[[f64; 2]] {
        &self.normals[index]
    }

    pub fn volume_weights(&self) -> &[f64] {
        &self.volume_weights
    }

    pub fn boundary_weights(&self) -> &[f64] {
        &self.boundary_weights
    }

    /// Measure of each grid cell (line: segment `[s_k, s_{k+1}]` swept over
    /// the sphere; tensor: `hx * hy`, x-major).
    pub fn cell_measures(&self) -> &[f64] {
        &self.cell_measures
    }

    pub fn total_volume_weight(&self) -> f64 {
        self.volume_weights.iter().sum()
    }

    pub fn total_boundary_weight(&self) -> f64 {
        self.boundary_weights.iter().sum()
    }

    /// Tensor index helper; panics on line grids.
    pub fn tensor_index(&self, i: usize, j: usize) -> usize {
        match self.layout {
            Layout::Tensor { nx, .. } => j * nx + i,
            Layout::Line { .. } => panic!("tensor_index on a line grid"),
        }
    }

    /// Writes `index, coords..., role, volume_weight, boundary_weight, normals...`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        match self.layout {
            Layout::Line { .. } => writeln!(out, "index,s,role,volume_weight,boundary_weight,nu")?,
            Layout::Tensor { .. } => {
                writeln!(out, "index,x,y,role,volume_weight,boundary_weight,nu_x,nu_y,nu2_x,nu2_y")?
            }
        }
        for i in 0..self.len() {
            let p = self.points[i];
            let nu = &self.normals[i];
            match self.layout {
                Layout::Line { .. } => {
                    let n0 = nu.first().map(|v| fmt_f64(v[0])).unwrap_or_default();
                    writeln!(
                        out,
                        "{i},{},{},{},{},{n0}",
                        fmt_f64(p[0]),
                        self.roles[i].as_str(),
                        fmt_f64(self.volume_weights[i]),
                        fmt_f64(self.boundary_weights[i]),
                    )?;
                }
                Layout::Tensor { .. } => {
                    let comp = |k: usize, c: usize| nu.get(k).map(|v| fmt_f64(v[c])).unwrap_or_default();
                    writeln!(
                        out,
                        "{i},{},{},{},{},{},{},{},{},{}",
                        fmt_f64(p[0]),
                        fmt_f64(p[1]),
                        self.roles[i].as_str(),
                        fmt_f64(self.volume_weights[i]),
                        fmt_f64(self.boundary_weights[i]),
                        comp(0, 0),
                        comp(0, 1),
                        comp(1, 0),
                        comp(1, 1),
                    )?;
                }
            }
        }
        Ok(())
    }
}

/// 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// One real value per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    key: GridKey,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "field has {} values but the grid has {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { key: grid.key(), values })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(usize, [f64; 2]) -> f64) -> Self {
        let values = grid.points().iter().enumerate().map(|(i, &p)| f(i, p)).collect();
        Self { key: grid.key(), values }
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        Self { key: grid.key(), values: vec![value; grid.len()] }
    }

    pub fn key(&self) -> GridKey {
        self.key
    }

    pub fn belongs_to(&self, grid: &Grid) -> bool {
        self.key == grid.key()
    }

    pub fn ensure_on(&self, grid: &Grid) -> Result<()> {
        if self.belongs_to(grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index and value of the largest entry (first one on ties).
    pub fn argmax(&self) -> (usize, f64) {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Copy scaled so that the largest absolute value is one.
    pub fn sup_normalized(&self) -> Self {
        let m = self.max_abs();
        let scale = if m > 0.0 { 1.0 / m } else { 1.0 };
        self.scaled(scale)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { key: self.key, values: self.values.iter().map(|v| c * v).collect() }
    }

    /// `sup_i |self_i - other_i|`.
    pub fn sup_distance(&self, other: &ScalarField) -> Result<f64> {
        if self.key != other.key {
            return Err(Error::GridMismatch);
        }
        Ok(self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn ensure_positive(&self) -> Result<()> {
        match self.values.iter().position(|&v| !(v > 0.0)) {
            Some(index) => Err(Error::NonPositiveField { index, value: self.values[index] }),
            None => Ok(()),
        }
    }

    /// Writes `index, coords..., u`.
    pub fn write_csv<W: Write>(&self, grid: &Grid, mut out: W) -> Result<()> {
        self.ensure_on(grid)?;
        match grid.layout() {
            Layout::Line { .. } => writeln!(out, "index,s,u")?,
            Layout::Tensor { .. } => writeln!(out, "index,x,y,u")?,
        }
        for (i, (p, v)) in grid.points().iter().zip(&self.values).enumerate() {
            match grid.layout() {
                Layout::Line { .. } => writeln!(out, "{i},{},{}", fmt_f64(p[0]), fmt_f64(*v))?,
                Layout::Tensor { .. } => writeln!(out, "{i},{},{},{}", fmt_f64(p[0]), fmt_f64(p[1]), fmt_f64(*v))?,
            }
        }
        Ok(())
    }
}

/// Exact distance to the boundary at every grid point.
pub fn distance_field(grid: &Grid) -> ScalarField {
    let domain = *grid.domain();
    ScalarField::from_fn(grid, |i, p| if grid.is_boundary(i) { 0.0 } else { domain.distance_to_boundary(p) })
}
