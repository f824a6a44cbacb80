//! Planar network geometry: Poisson point sampling, Delaunay/Voronoi
//! structure, typical-point placement by local symmetry class, and the greedy
//! triangle partition of interferers.

pub mod delaunay;

pub use delaunay::{circumcircle, in_circle, orient, triangulate, Triangulation, NONE};

use crate::error::{Error, Result};
use crate::params::UeType;
use rand::Rng;
use rand_distr::Distribution;
use std::collections::HashSet;
use std::path::Path;

/// Relative tolerance for deciding that two link distances coincide when
/// classifying a point's local symmetry.
pub const EPS_TYPE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dist_sq(self, o: Point2D) -> f64 {
        let dx = self.x - o.x;
        let dy = self.y - o.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn dist(self, o: Point2D) -> f64 {
        self.dist_sq(o).sqrt()
    }
}

/// Square observation window [0, side]^2.
#[derive(Debug, Clone, Copy)]
pub struct Window {
    pub side: f64,
}

impl Window {
    pub fn new(side: f64) -> Result<Self> {
        if !(side > 0.0) || !side.is_finite() {
            return Err(Error::Domain(format!("window side must be positive, got {side}")));
        }
        Ok(Self { side })
    }

    pub fn area(&self) -> f64 {
        self.side * self.side
    }

    /// Strict interior test with a margin on every side.
    pub fn contains_interior(&self, p: Point2D, margin: f64) -> bool {
        p.x > margin && p.x < self.side - margin && p.y > margin && p.y < self.side - margin
    }
}

/// Homogeneous Poisson sample on the window. The expected count is capped at
/// 1e7 points to keep a single realization addressable.
pub fn sample_ppp<R: Rng + ?Sized>(
    intensity: f64,
    window: &Window,
    rng: &mut R,
) -> Result<Vec<Point2D>> {
    if !(intensity > 0.0) || !intensity.is_finite() {
        return Err(Error::Domain(format!("intensity must be positive, got {intensity}")));
    }
    let mean = intensity * window.area();
    if mean > 1.0e7 {
        return Err(Error::Capacity(format!(
            "expected point count {mean:.3e} exceeds the 1e7 realization cap"
        )));
    }
    let poisson = rand_distr::Poisson::new(mean)
        .map_err(|e| Error::Domain(format!("invalid Poisson mean {mean}: {e}")))?;
    let n = poisson.sample(rng) as usize;
    Ok((0..n)
        .map(|_| Point2D {
            x: rng.gen::<f64>() * window.side,
            y: rng.gen::<f64>() * window.side,
        })
        .collect())
}

/// Reads base-station positions from a CSV file with an `x,y` header.
/// Lines starting with `#` are ignored.
pub fn read_bs_csv<P: AsRef<Path>>(path: P) -> Result<Vec<Point2D>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("CSV is missing required column '{name}'")))
    };
    let (cx, cy) = (col("x")?, col("y")?);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |j: usize| -> Result<f64> {
            rec.get(j)
                .ok_or_else(|| Error::Config(format!("row {}: missing field", i + 2)))?
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("row {}: {e}", i + 2)))
        };
        out.push(Point2D { x: parse(cx)?, y: parse(cy)? });
    }
    Ok(out)
}

/// Three cooperating stations with the matching link distances; `ue_type`
/// is derived from distance coincidences.
#[derive(Debug, Clone, Copy)]
pub struct CoopSet {
    pub bs: [u32; 3],
    pub dist: [f64; 3],
    pub ue_type: UeType,
}

impl CoopSet {
    pub fn new(bs: [u32; 3], dist: [f64; 3]) -> Self {
        Self { bs, dist, ue_type: classify_distances(dist) }
    }
}

/// Symmetry class of a point relative to its three nearest structural
/// stations: all three link distances equal, exactly two equal, or none.
pub fn classify_distances(dist: [f64; 3]) -> UeType {
    let mut s = dist;
    s.sort_by(f64::total_cmp);
    let close = |a: f64, b: f64| (b - a).abs() <= EPS_TYPE * b.max(a).max(f64::MIN_POSITIVE);
    let lo = close(s[0], s[1]);
    let hi = close(s[1], s[2]);
    match (lo, hi) {
        (true, true) => UeType::TypeI,
        (false, false) => UeType::TypeIII,
        _ => UeType::TypeII,
    }
}

/// One claimed interferer triangle: its member stations and the centroid
/// used as the group's collapsed location.
#[derive(Debug, Clone, Copy)]
pub struct InterfererGroup {
    pub members: [u32; 3],
    pub centroid: Point2D,
}

/// Disjoint grouping of the interferers inside the cut radius: greedily
/// claimed triangles plus leftover singletons.
#[derive(Debug, Clone)]
pub struct Partition {
    pub groups: Vec<InterfererGroup>,
    pub singles: Vec<u32>,
}

/// Voronoi dual of the triangulation: one dual vertex per triangle (its
/// circumcenter), one dual edge per interior Delaunay edge, and for each
/// dual vertex the three generating cells that meet there.
#[derive(Debug, Clone)]
pub struct VoronoiDual {
    pub vertices: Vec<Point2D>,
    pub edges: Vec<(u32, u32)>,
    pub generators: Vec<[u32; 3]>,
}

/// Uniform bucket grid over the window, CSR storage.
#[derive(Debug, Clone)]
struct GridIndex {
    cell: f64,
    nx: i64,
    ny: i64,
    start: Vec<u32>,
    items: Vec<u32>,
}

impl GridIndex {
    fn build(pts: &[Point2D], side: f64) -> Self {
        let n = pts.len().max(1);
        let per_axis = ((n as f64 / 2.0).sqrt().ceil() as i64).max(1);
        let cell = side / per_axis as f64;
        let (nx, ny) = (per_axis, per_axis);
        let idx = |p: &Point2D| -> usize {
            let ix = ((p.x / cell) as i64).clamp(0, nx - 1);
            let iy = ((p.y / cell) as i64).clamp(0, ny - 1);
            (iy * nx + ix) as usize
        };
        let mut counts = vec![0u32; (nx * ny) as usize + 1];
        for p in pts {
            counts[idx(p) + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let mut items = vec![0u32; pts.len()];
        let mut cursor = counts.clone();
        for (i, p) in pts.iter().enumerate() {
            let c = idx(p);
            items[cursor[c] as usize] = i as u32;
            cursor[c] += 1;
        }
        Self { cell, nx, ny, start: counts, items }
    }

    fn cell_of(&self, p: Point2D) -> (i64, i64) {
        (
            ((p.x / self.cell) as i64).clamp(0, self.nx - 1),
            ((p.y / self.cell) as i64).clamp(0, self.ny - 1),
        )
    }

    fn bucket(&self, ix: i64, iy: i64) -> &[u32] {
        let c = (iy * self.nx + ix) as usize;
        &self.items[self.start[c] as usize..self.start[c + 1] as usize]
    }

    /// All indices with dist(center, pts[i]) <= r, ascending.
    fn query_disc(&self, pts: &[Point2D], center: Point2D, r: f64, out: &mut Vec<u32>) {
        out.clear();
        let r2 = r * r;
        let ix0 = (((center.x - r) / self.cell) as i64).clamp(0, self.nx - 1);
        let ix1 = (((center.x + r) / self.cell) as i64).clamp(0, self.nx - 1);
        let iy0 = (((center.y - r) / self.cell) as i64).clamp(0, self.ny - 1);
        let iy1 = (((center.y + r) / self.cell) as i64).clamp(0, self.ny - 1);
        for iy in iy0..=iy1 {
            for ix in ix0..=ix1 {
                for &i in self.bucket(ix, iy) {
                    if pts[i as usize].dist_sq(center) <= r2 {
                        out.push(i);
                    }
                }
            }
        }
        out.sort_unstable();
    }

    /// Exact k-nearest via expanding ring search.
    fn k_nearest(&self, pts: &[Point2D], p: Point2D, k: usize) -> Vec<(u32, f64)> {
        let mut best: Vec<(f64, u32)> = Vec::with_capacity(k + 1);
        if k == 0 || pts.is_empty() {
            return Vec::new();
        }
        let (cx, cy) = self.cell_of(p);
        let max_ring = self.nx.max(self.ny) + 1;
        for ring in 0..=max_ring {
            if best.len() >= k {
                let kth = best[k - 1].0;
                if (ring - 1).max(0) as f64 * self.cell > kth {
                    break;
                }
            }
            let visit = |ix: i64, iy: i64, best: &mut Vec<(f64, u32)>| {
                if ix < 0 || iy < 0 || ix >= self.nx || iy >= self.ny {
                    return;
                }
                for &i in self.bucket(ix, iy) {
                    let d = pts[i as usize].dist(p);
                    let pos = best.partition_point(|&(bd, bi)| (bd, bi) < (d, i));
                    best.insert(pos, (d, i));
                    if best.len() > k {
                        best.pop();
                    }
                }
            };
            if ring == 0 {
                visit(cx, cy, &mut best);
            } else {
                for dx in -ring..=ring {
                    visit(cx + dx, cy - ring, &mut best);
                    visit(cx + dx, cy + ring, &mut best);
                }
                for dy in (-ring + 1)..ring {
                    visit(cx - ring, cy + dy, &mut best);
                    visit(cx + ring, cy + dy, &mut best);
                }
            }
        }
        best.into_iter().map(|(d, i)| (i, d)).collect()
    }

    fn nearest(&self, pts: &[Point2D], p: Point2D) -> Option<(u32, f64)> {
        self.k_nearest(pts, p, 1).first().copied()
    }
}

/// A triangulated base-station realization with its derived structure:
/// circumcircles, dual vertices, eligibility under the guard margin, and
/// spatial indices for neighborhood queries.
#[derive(Debug, Clone)]
pub struct NetworkRealization {
    pub bs: Vec<Point2D>,
    pub window: Window,
    pub guard_margin: f64,
    pub tris: Vec<[u32; 3]>,
    pub adj: Vec<[u32; 3]>,
    pub circumcenters: Vec<Point2D>,
    pub circumradii: Vec<f64>,
    pub centroids: Vec<Point2D>,
    /// Triangles whose circumcenter and all vertices lie in the guard interior.
    pub eligible_tris: Vec<u32>,
    /// Interior Delaunay edges between two eligible triangles, as (tri, corner).
    pub eligible_edges: Vec<(u32, u8)>,
    eps_geo: f64,
    bs_grid: GridIndex,
    tri_grid: GridIndex,
    vert_tri: Vec<u32>,
}

impl NetworkRealization {
    pub fn build(bs: Vec<Point2D>, window: Window, guard_margin: f64) -> Result<Self> {
        if !(guard_margin >= 0.0) || 2.0 * guard_margin >= window.side {
            return Err(Error::Config(format!(
                "guard margin {guard_margin} leaves no interior in a window of side {}",
                window.side
            )));
        }
        for (i, p) in bs.iter().enumerate() {
            if !(p.x >= 0.0 && p.x <= window.side && p.y >= 0.0 && p.y <= window.side) {
                return Err(Error::Domain(format!(
                    "station {i} at ({}, {}) lies outside the window",
                    p.x, p.y
                )));
            }
        }
        let tri = triangulate(&bs)?;
        let nt = tri.tris.len();
        let mut circumcenters = Vec::with_capacity(nt);
        let mut circumradii = Vec::with_capacity(nt);
        let mut centroids = Vec::with_capacity(nt);
        for v in &tri.tris {
            let (a, b, c) = (bs[v[0] as usize], bs[v[1] as usize], bs[v[2] as usize]);
            let (cc, r) = circumcircle(a, b, c);
            circumcenters.push(cc);
            circumradii.push(r);
            centroids.push(Point2D {
                x: (a.x + b.x + c.x) / 3.0,
                y: (a.y + b.y + c.y) / 3.0,
            });
        }
        let mut eligible_tris = Vec::new();
        let mut is_eligible = vec![false; nt];
        for t in 0..nt {
            let v = tri.tris[t];
            let ok = window.contains_interior(circumcenters[t], guard_margin)
                && v.iter().all(|&i| window.contains_interior(bs[i as usize], guard_margin));
            if ok {
                is_eligible[t] = true;
                eligible_tris.push(t as u32);
            }
        }
        let mut eligible_edges = Vec::new();
        for &t in &eligible_tris {
            for k in 0..3u8 {
                let nb = tri.adj[t as usize][k as usize];
                if nb != NONE && nb > t && is_eligible[nb as usize] {
                    eligible_edges.push((t, k));
                }
            }
        }
        let mut vert_tri = vec![NONE; bs.len()];
        for (t, v) in tri.tris.iter().enumerate() {
            for &i in v {
                vert_tri[i as usize] = t as u32;
            }
        }
        let bs_grid = GridIndex::build(&bs, window.side);
        let tri_grid = GridIndex::build(&centroids, window.side);
        Ok(Self {
            eps_geo: 1e-9 * window.side,
            bs,
            window,
            guard_margin,
            tris: tri.tris,
            adj: tri.adj,
            circumcenters,
            circumradii,
            centroids,
            eligible_tris,
            eligible_edges,
            bs_grid,
            tri_grid,
            vert_tri,
        })
    }

    pub fn n_bs(&self) -> usize {
        self.bs.len()
    }

    pub fn n_tris(&self) -> usize {
        self.tris.len()
    }

    pub fn voronoi_dual(&self) -> VoronoiDual {
        let mut edges = Vec::new();
        for t in 0..self.tris.len() {
            for k in 0..3 {
                let nb = self.adj[t][k];
                if nb != NONE && nb > t as u32 {
                    edges.push((t as u32, nb));
                }
            }
        }
        VoronoiDual {
            vertices: self.circumcenters.clone(),
            edges,
            generators: self.tris.clone(),
        }
    }

    /// Unique Delaunay edges as vertex pairs (a < b).
    pub fn delaunay_edges(&self) -> Vec<(u32, u32)> {
        let mut edges: Vec<(u32, u32)> = self
            .tris
            .iter()
            .flat_map(|v| {
                [(v[0], v[1]), (v[1], v[2]), (v[2], v[0])]
                    .map(|(a, b)| (a.min(b), a.max(b)))
            })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    pub fn nearest_bs(&self, p: Point2D) -> Result<(u32, f64)> {
        self.bs_grid
            .nearest(&self.bs, p)
            .ok_or_else(|| Error::Degenerate("no stations in realization".into()))
    }

    pub fn k_nearest_bs(&self, p: Point2D, k: usize) -> Vec<(u32, f64)> {
        self.bs_grid.k_nearest(&self.bs, p, k)
    }

    /// All station indices within `r` of `center`, ascending.
    pub fn bs_in_disc(&self, center: Point2D, r: f64) -> Vec<u32> {
        let mut out = Vec::new();
        self.bs_grid.query_disc(&self.bs, center, r, &mut out);
        out
    }

    /// Triangle containing `p`, found by walking from the triangle of the
    /// nearest station.
    pub fn locate(&self, p: Point2D) -> Result<u32> {
        if !p.x.is_finite() || !p.y.is_finite() {
            return Err(Error::Domain("non-finite query point".into()));
        }
        let (seed_bs, _) = self.nearest_bs(p)?;
        let mut cur = self.vert_tri[seed_bs as usize];
        if cur == NONE {
            return Err(Error::Degenerate("station not part of any triangle".into()));
        }
        let cap = 4 * self.tris.len() + 64;
        for _ in 0..cap {
            let v = self.tris[cur as usize];
            let mut crossed = false;
            for k in 0..3 {
                let a = self.bs[v[(k + 1) % 3] as usize];
                let b = self.bs[v[(k + 2) % 3] as usize];
                if orient(a, b, p) < -self.eps_geo * a.dist(b) {
                    let nb = self.adj[cur as usize][k];
                    if nb == NONE {
                        return Err(Error::OutOfCoverage(format!(
                            "({}, {}) lies outside the triangulated hull",
                            p.x, p.y
                        )));
                    }
                    cur = nb;
                    crossed = true;
                    break;
                }
            }
            if !crossed {
                return Ok(cur);
            }
        }
        Err(Error::Numerical("triangle walk failed to settle".into()))
    }

    /// Cooperating set of `p`: the vertices of the containing triangle. If
    /// `p` sits on an interior Delaunay edge (within tolerance), the set is
    /// the edge's endpoints plus the closer of the two opposite vertices.
    pub fn coop_set_for(&self, p: Point2D) -> Result<CoopSet> {
        let t = self.locate(p)?;
        let v = self.tris[t as usize];
        let mut on_edge: Option<(f64, usize)> = None;
        for k in 0..3 {
            if self.adj[t as usize][k] == NONE {
                continue;
            }
            let a = self.bs[v[(k + 1) % 3] as usize];
            let b = self.bs[v[(k + 2) % 3] as usize];
            let len = a.dist(b);
            if len == 0.0 {
                continue;
            }
            let d_line = orient(a, b, p).abs() / len;
            if d_line <= self.eps_geo && on_edge.map_or(true, |(d, _)| d_line < d) {
                on_edge = Some((d_line, k));
            }
        }
        let ids = if let Some((_, k)) = on_edge {
            let nb = self.adj[t as usize][k];
            let ia = v[(k + 1) % 3];
            let ib = v[(k + 2) % 3];
            let ic = v[k];
            let nv = self.tris[nb as usize];
            let id = nv
                .iter()
                .copied()
                .find(|&x| x != ia && x != ib)
                .ok_or_else(|| Error::Degenerate("broken adjacency".into()))?;
            let opp = if p.dist_sq(self.bs[ic as usize]) <= p.dist_sq(self.bs[id as usize]) {
                ic
            } else {
                id
            };
            [ia, ib, opp]
        } else {
            v
        };
        let dist = ids.map(|i| p.dist(self.bs[i as usize]));
        Ok(CoopSet::new(ids, dist))
    }

    /// Largest s >= 0 with origin + s * dir still inside triangle t.
    fn ray_exit(&self, t: u32, origin: Point2D, dir: Point2D) -> f64 {
        let v = self.tris[t as usize];
        let mut smax = f64::INFINITY;
        for k in 0..3 {
            let e1 = self.bs[v[(k + 1) % 3] as usize];
            let e2 = self.bs[v[(k + 2) % 3] as usize];
            let f0 = orient(e1, e2, origin);
            let slope = (e2.x - e1.x) * dir.y - (e2.y - e1.y) * dir.x;
            if slope < 0.0 {
                smax = smax.min(f0.max(0.0) / -slope);
            }
        }
        if smax.is_finite() {
            smax
        } else {
            0.0
        }
    }

    /// Draws a typical point of the requested symmetry class inside the
    /// guard interior, together with its cooperating set.
    ///
    /// TypeI: circumcenter of a uniform eligible triangle. TypeII: uniform
    /// point on the perpendicular bisector of a uniform eligible interior
    /// edge, restricted to the union of its two triangles. TypeIII: uniform
    /// point in a uniform eligible triangle, rejecting coincidences.
    pub fn place_typical_ue<R: Rng + ?Sized>(
        &self,
        ue_type: UeType,
        rng: &mut R,
    ) -> Result<(Point2D, CoopSet)> {
        match ue_type {
            UeType::TypeI => {
                if self.eligible_tris.is_empty() {
                    return Err(Error::Placement("no eligible triangle in the guard interior".into()));
                }
                let t = self.eligible_tris[rng.gen_range(0..self.eligible_tris.len())];
                let p = self.circumcenters[t as usize];
                let v = self.tris[t as usize];
                let coop = CoopSet::new(v, v.map(|i| p.dist(self.bs[i as usize])));
                if coop.ue_type != UeType::TypeI {
                    return Err(Error::Placement(
                        "circumcenter failed the equidistance check".into(),
                    ));
                }
                Ok((p, coop))
            }
            UeType::TypeII => {
                if self.eligible_edges.is_empty() {
                    return Err(Error::Placement("no eligible interior edge in the guard interior".into()));
                }
                for _ in 0..1000 {
                    let (t, k) = self.eligible_edges[rng.gen_range(0..self.eligible_edges.len())];
                    let v = self.tris[t as usize];
                    let (ia, ib) = (v[(k as usize + 1) % 3], v[(k as usize + 2) % 3]);
                    let (a, b) = (self.bs[ia as usize], self.bs[ib as usize]);
                    let nb = self.adj[t as usize][k as usize];
                    let mid = Point2D { x: 0.5 * (a.x + b.x), y: 0.5 * (a.y + b.y) };
                    // left-perpendicular of a->b points into t (CCW order)
                    let len = a.dist(b);
                    if len == 0.0 {
                        continue;
                    }
                    let dir = Point2D { x: -(b.y - a.y) / len, y: (b.x - a.x) / len };
                    let s_t = self.ray_exit(t, mid, dir);
                    let s_n = self.ray_exit(nb, mid, Point2D { x: -dir.x, y: -dir.y });
                    let total = s_t + s_n;
                    if total <= 0.0 {
                        continue;
                    }
                    let s = rng.gen::<f64>() * total - s_n;
                    let p = Point2D { x: mid.x + s * dir.x, y: mid.y + s * dir.y };
                    let containing = if s >= 0.0 { t } else { nb };
                    let cv = self.tris[containing as usize];
                    let coop = CoopSet::new(cv, cv.map(|i| p.dist(self.bs[i as usize])));
                    if coop.ue_type == UeType::TypeII {
                        return Ok((p, coop));
                    }
                }
                Err(Error::Placement("rejection sampling for a two-way tie did not converge".into()))
            }
            UeType::TypeIII => {
                if self.eligible_tris.is_empty() {
                    return Err(Error::Placement("no eligible triangle in the guard interior".into()));
                }
                for _ in 0..1000 {
                    let t = self.eligible_tris[rng.gen_range(0..self.eligible_tris.len())];
                    let v = self.tris[t as usize];
                    let (a, b, c) = (
                        self.bs[v[0] as usize],
                        self.bs[v[1] as usize],
                        self.bs[v[2] as usize],
                    );
                    let (mut u, mut w) = (rng.gen::<f64>(), rng.gen::<f64>());
                    if u + w > 1.0 {
                        u = 1.0 - u;
                        w = 1.0 - w;
                    }
                    let p = Point2D {
                        x: a.x + u * (b.x - a.x) + w * (c.x - a.x),
                        y: a.y + u * (b.y - a.y) + w * (c.y - a.y),
                    };
                    let coop = CoopSet::new(v, v.map(|i| p.dist(self.bs[i as usize])));
                    if coop.ue_type == UeType::TypeIII {
                        return Ok((p, coop));
                    }
                }
                Err(Error::Placement("rejection sampling for the generic class did not converge".into()))
            }
        }
    }

    /// Partitions the interferers within `r_cut` of `ue` (the cooperating
    /// stations excluded) into disjoint Delaunay triangles, claimed greedily
    /// by increasing centroid distance; leftovers become singletons.
    pub fn partition_interferers(&self, ue: Point2D, coop: &[u32; 3], r_cut: f64) -> Partition {
        let mut cand = Vec::new();
        self.bs_grid.query_disc(&self.bs, ue, r_cut, &mut cand);
        cand.retain(|i| !coop.contains(i));
        let in_cand = |i: u32| cand.binary_search(&i).is_ok();

        let mut tri_ids = Vec::new();
        self.tri_grid.query_disc(&self.centroids, ue, r_cut, &mut tri_ids);
        let mut claimable: Vec<(f64, u32)> = tri_ids
            .into_iter()
            .filter(|&t| self.tris[t as usize].iter().all(|&v| in_cand(v)))
            .map(|t| (ue.dist(self.centroids[t as usize]), t))
            .collect();
        claimable.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut used: HashSet<u32> = HashSet::with_capacity(cand.len());
        let mut groups = Vec::new();
        for &(_, t) in &claimable {
            let v = self.tris[t as usize];
            if v.iter().any(|i| used.contains(i)) {
                continue;
            }
            for &i in &v {
                used.insert(i);
            }
            groups.push(InterfererGroup { members: v, centroid: self.centroids[t as usize] });
        }
        let singles = cand.iter().copied().filter(|i| !used.contains(i)).collect();
        Partition { groups, singles }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_network(seed: u64, side: f64, lambda: f64) -> NetworkRealization {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let window = Window::new(side).unwrap();
        let bs = sample_ppp(lambda, &window, &mut rng).unwrap();
        NetworkRealization::build(bs, window, 5.0 / lambda.sqrt()).unwrap()
    }

    #[test]
    fn ppp_count_is_calibrated() {
        let window = Window::new(100.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut total = 0usize;
        let reps = 400;
        for _ in 0..reps {
            total += sample_ppp(0.02, &window, &mut rng).unwrap().len();
        }
        let mean = total as f64 / reps as f64;
        // Poisson(200): standard error of the mean over 400 reps is ~0.7
        assert!((mean - 200.0).abs() < 3.0, "mean count {mean}");
    }

    #[test]
    fn ppp_rejects_oversized_requests() {
        let window = Window::new(1e6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            sample_ppp(1.0, &window, &mut rng),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn eligibility_respects_guard() {
        let net = sample_network(11, 400.0, 0.02);
        assert!(!net.eligible_tris.is_empty());
        for &t in &net.eligible_tris {
            assert!(net.window.contains_interior(net.circumcenters[t as usize], net.guard_margin));
            for &v in &net.tris[t as usize] {
                assert!(net.window.contains_interior(net.bs[v as usize], net.guard_margin));
            }
        }
    }

    #[test]
    fn locate_agrees_with_orientation_test() {
        let net = sample_network(3, 300.0, 0.02);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..200 {
            let p = Point2D::new(
                50.0 + rng.gen::<f64>() * 200.0,
                50.0 + rng.gen::<f64>() * 200.0,
            );
            let t = net.locate(p).unwrap();
            let v = net.tris[t as usize];
            for k in 0..3 {
                let a = net.bs[v[(k + 1) % 3] as usize];
                let b = net.bs[v[(k + 2) % 3] as usize];
                assert!(orient(a, b, p) >= -1e-6 * a.dist(b));
            }
        }
    }

    #[test]
    fn circumcenter_coop_is_equidistant() {
        // every circumcenter has the owning triangle's vertices as its three
        // nearest stations; the containment rule agrees whenever the center
        // falls inside its own triangle (it leaves obtuse triangles)
        let net = sample_network(17, 300.0, 0.02);
        let mut contained = 0;
        for &t in net.eligible_tris.iter().take(50) {
            let p = net.circumcenters[t as usize];
            let r = net.circumradii[t as usize];
            let mut v = net.tris[t as usize];
            v.sort_unstable();
            let mut near = net.k_nearest_bs(p, 3).into_iter().map(|(i, _)| i).collect::<Vec<_>>();
            near.sort_unstable();
            assert_eq!(near, v.to_vec());
            for i in v {
                let d = p.dist(net.bs[i as usize]);
                assert!((d - r).abs() <= 1e-9 * r.max(1.0));
            }
            if net.locate(p).ok() == Some(t) {
                contained += 1;
                let coop = net.coop_set_for(p).unwrap();
                assert_eq!(coop.ue_type, UeType::TypeI);
                let mut cv = coop.bs;
                cv.sort_unstable();
                assert_eq!(cv, v);
            }
        }
        assert!(contained > 0, "no acute triangle in the sample");
    }

    #[test]
    fn edge_rule_picks_closer_opposite_vertex() {
        let net = sample_network(23, 300.0, 0.02);
        let (t, k) = net.eligible_edges[0];
        let v = net.tris[t as usize];
        let (ia, ib) = (v[(k as usize + 1) % 3], v[(k as usize + 2) % 3]);
        let (a, b) = (net.bs[ia as usize], net.bs[ib as usize]);
        let mid = Point2D::new(0.5 * (a.x + b.x), 0.5 * (a.y + b.y));
        let coop = net.coop_set_for(mid).unwrap();
        assert!(coop.bs.contains(&ia) && coop.bs.contains(&ib));
        let nb = net.adj[t as usize][k as usize];
        let ic = v[k as usize];
        let id = net.tris[nb as usize]
            .iter()
            .copied()
            .find(|&x| x != ia && x != ib)
            .unwrap();
        let closer = if mid.dist_sq(net.bs[ic as usize]) <= mid.dist_sq(net.bs[id as usize]) {
            ic
        } else {
            id
        };
        assert!(coop.bs.contains(&closer));
    }

    #[test]
    fn placement_matches_requested_class() {
        let net = sample_network(31, 500.0, 0.02);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let (p, coop) = net.place_typical_ue(UeType::TypeI, &mut rng).unwrap();
            assert_eq!(coop.ue_type, UeType::TypeI);
            assert!(net.window.contains_interior(p, net.guard_margin));
        }
        for _ in 0..100 {
            let (p, coop) = net.place_typical_ue(UeType::TypeII, &mut rng).unwrap();
            assert_eq!(coop.ue_type, UeType::TypeII);
            // two of the three distances coincide
            let mut d = coop.dist;
            d.sort_by(f64::total_cmp);
            assert!(
                (d[1] - d[0]).abs() <= 1e-6 * d[1] || (d[2] - d[1]).abs() <= 1e-6 * d[2],
                "no coincident pair in {d:?}"
            );
            assert!(net.locate(p).is_ok());
        }
        for _ in 0..100 {
            let (_, coop) = net.place_typical_ue(UeType::TypeIII, &mut rng).unwrap();
            assert_eq!(coop.ue_type, UeType::TypeIII);
        }
    }

    #[test]
    fn typical_point_coop_is_containing_triangle() {
        let net = sample_network(37, 500.0, 0.02);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let (p, coop) = net.place_typical_ue(UeType::TypeIII, &mut rng).unwrap();
            let t = net.locate(p).unwrap();
            let mut expect = net.tris[t as usize];
            expect.sort_unstable();
            let mut got = coop.bs;
            got.sort_unstable();
            assert_eq!(expect, got);
        }
    }

    #[test]
    fn partition_is_exact_cover() {
        let net = sample_network(41, 700.0, 0.02);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let (p, coop) = net.place_typical_ue(UeType::TypeI, &mut rng).unwrap();
            let r_cut = 24.0 / 0.02f64.sqrt();
            let part = net.partition_interferers(p, &coop.bs, r_cut);
            let mut covered: Vec<u32> = part.singles.clone();
            for g in &part.groups {
                covered.extend_from_slice(&g.members);
                // every group is an actual Delaunay triangle
                let mut m = g.members;
                m.sort_unstable();
                assert!(net.tris.iter().any(|v| {
                    let mut s = *v;
                    s.sort_unstable();
                    s == m
                }));
            }
            covered.sort_unstable();
            let dup = covered.windows(2).any(|w| w[0] == w[1]);
            assert!(!dup, "partition reused a station");
            let mut expect = net.bs_in_disc(p, r_cut);
            expect.retain(|i| !coop.bs.contains(i));
            assert_eq!(covered, expect);
        }
    }

    #[test]
    fn partition_is_deterministic() {
        let net = sample_network(43, 500.0, 0.02);
        let p = Point2D::new(250.0, 250.0);
        let coop = net.coop_set_for(p).unwrap();
        let a = net.partition_interferers(p, &coop.bs, 150.0);
        let b = net.partition_interferers(p, &coop.bs, 150.0);
        assert_eq!(a.singles, b.singles);
        assert_eq!(
            a.groups.iter().map(|g| g.members).collect::<Vec<_>>(),
            b.groups.iter().map(|g| g.members).collect::<Vec<_>>()
        );
    }

    #[test]
    fn nearest_queries_match_brute_force() {
        let net = sample_network(47, 300.0, 0.02);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let p = Point2D::new(rng.gen::<f64>() * 300.0, rng.gen::<f64>() * 300.0);
            let (i, d) = net.nearest_bs(p).unwrap();
            let (bi, bd) = net
                .bs
                .iter()
                .enumerate()
                .map(|(j, q)| (j as u32, q.dist(p)))
                .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
                .unwrap();
            assert_eq!(i, bi);
            assert!((d - bd).abs() < 1e-12);

            let k3 = net.k_nearest_bs(p, 3);
            let mut brute: Vec<(f64, u32)> =
                net.bs.iter().enumerate().map(|(j, q)| (q.dist(p), j as u32)).collect();
            brute.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for (got, want) in k3.iter().zip(brute.iter()) {
                assert_eq!(got.0, want.1);
            }

            let r = 40.0;
            let disc = net.bs_in_disc(p, r);
            let brute_disc: Vec<u32> = net
                .bs
                .iter()
                .enumerate()
                .filter(|(_, q)| q.dist(p) <= r)
                .map(|(j, _)| j as u32)
                .collect();
            assert_eq!(disc, brute_disc);
        }
    }

    #[test]
    fn voronoi_dual_edges_bisect_delaunay_edges() {
        let net = sample_network(53, 300.0, 0.02);
        let dual = net.voronoi_dual();
        assert_eq!(dual.vertices.len(), net.n_tris());
        for &(t, u) in dual.edges.iter().take(200) {
            // the two triangles share exactly one edge; both circumcenters
            // are equidistant from that edge's endpoints
            let tv = net.tris[t as usize];
            let uv = net.tris[u as usize];
            let shared: Vec<u32> = tv.iter().copied().filter(|i| uv.contains(i)).collect();
            assert_eq!(shared.len(), 2);
            for &cc in &[dual.vertices[t as usize], dual.vertices[u as usize]] {
                let da = cc.dist(net.bs[shared[0] as usize]);
                let db = cc.dist(net.bs[shared[1] as usize]);
                assert!((da - db).abs() <= 1e-7 * da.max(db).max(1.0));
            }
        }
    }

    #[test]
    fn csv_roundtrip() {
        let dir = std::env::temp_dir();
        let path = dir.join("tricomp_bs_roundtrip.csv");
        std::fs::write(&path, "# comment line\nx,y\n1.5,2.25\n10.0,20.0\n").unwrap();
        let pts = read_bs_csv(&path).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0], Point2D::new(1.5, 2.25));
        std::fs::remove_file(&path).ok();

        let bad = dir.join("tricomp_bs_bad.csv");
        std::fs::write(&bad, "a,b\n1,2\n").unwrap();
        assert!(read_bs_csv(&bad).is_err());
        std::fs::remove_file(&bad).ok();
    }

    #[test]
    fn classify_tolerances() {
        assert_eq!(classify_distances([1.0, 1.0, 1.0]), UeType::TypeI);
        assert_eq!(classify_distances([1.0, 1.0 + 1e-8, 2.0]), UeType::TypeII);
        assert_eq!(classify_distances([1.0, 1.5, 2.0]), UeType::TypeIII);
        assert_eq!(classify_distances([2.0, 1.0, 1.0 + 1e-8]), UeType::TypeII);
    }
}
