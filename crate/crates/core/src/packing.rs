//! Disjoint closed disks in the open square `(-1/2, 1/2)²` covering all but
//! `2^{-n}` of its area after `n` rounds.
//!
//! Round 1 is the disk of radius `0.49` at the origin. Each further round
//! slices the square into an `N × N` grid, sorts the cells into those inside
//! a disk (A), disjoint from every disk (B) and crossing a boundary (C), and
//! drops a disk of radius `0.49 / N` at the center of every B cell. `N` is the
//! smallest grid with `C_perimeter / N < 2^{-n-2}` and `√2 / N < r_min`, where
//! `C_perimeter = 4√2 π Σ r` bounds `|C| / N`.

use std::f64::consts::{PI, SQRT_2};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};

pub const BASE_RADIUS: f64 = 0.49;
pub const DEFAULT_N_CAP: usize = 20_000;
const SEPARATION_BUCKETS_MAX: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Disk {
    pub x: f64,
    pub y: f64,
    pub r: f64,
}

impl Disk {
    pub fn new(x: f64, y: f64, r: f64) -> Self {
        Self { x, y, r }
    }

    /// Distance from the disk to the nearer side of the square, per axis minimum.
    pub fn boundary_gap(&self) -> f64 {
        (0.5 - (self.x.abs() + self.r)).min(0.5 - (self.y.abs() + self.r))
    }

    pub fn gap_to(&self, other: &Disk) -> f64 {
        (self.x - other.x).hypot(self.y - other.y) - (self.r + other.r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RoundStats {
    #[serde(rename = "N")]
    pub grid: usize,
    #[serde(rename = "A")]
    pub inside: usize,
    #[serde(rename = "B")]
    pub free: usize,
    #[serde(rename = "C")]
    pub crossing: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Packing {
    pub disks: Vec<Disk>,
    pub coverage: f64,
    pub gamma: f64,
    pub rounds: usize,
    #[serde(rename = "per_round")]
    pub per_round_stats: Vec<RoundStats>,
}

impl Packing {
    /// Validates a hand-built packing: strict containment and strict disjointness.
    pub fn from_disks(disks: Vec<Disk>) -> Result<Self> {
        if disks.is_empty() {
            return Err(invalid("packing has no disks"));
        }
        if let Some(d) = disks
            .iter()
            .find(|d| !(d.r > 0.0) || !d.x.is_finite() || !d.y.is_finite())
        {
            return Err(invalid(format!("degenerate disk {d:?}")));
        }
        Self::assemble(disks, 0, Vec::new())
    }

    fn assemble(disks: Vec<Disk>, rounds: usize, per_round_stats: Vec<RoundStats>) -> Result<Self> {
        let coverage = coverage_of(&disks);
        let gamma = separation(&disks);
        if !(gamma > 0.0) {
            return Err(invalid(format!(
                "disks overlap, touch, or reach the square boundary (gamma = {gamma:.3e})"
            )));
        }
        Ok(Self {
            disks,
            coverage,
            gamma,
            rounds,
            per_round_stats,
        })
    }

    pub fn r_min(&self) -> f64 {
        self.disks.iter().map(|d| d.r).fold(f64::INFINITY, f64::min)
    }

    pub fn r_max(&self) -> f64 {
        self.disks.iter().map(|d| d.r).fold(0.0, f64::max)
    }

    pub fn radius_sum(&self) -> f64 {
        self.disks.iter().map(|d| d.r).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("packing serializes")
    }
}

fn coverage_of(disks: &[Disk]) -> f64 {
    PI * disks.iter().map(|d| d.r * d.r).sum::<f64>()
}

/// `4√2 π Σ r`: bounds `|C| / N` for any admissible grid.
pub fn perimeter_constant(disks: &[Disk]) -> f64 {
    4.0 * SQRT_2 * PI * disks.iter().map(|d| d.r).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SquareClassification {
    pub grid: usize,
    pub inside: usize,
    pub free: usize,
    pub crossing: usize,
    /// Centers of the B cells, row by row.
    pub free_centers: Vec<(f64, f64)>,
}

impl SquareClassification {
    /// `ceil(4√2 π (Σ r) N)`.
    pub fn crossing_bound(&self, disks: &[Disk]) -> usize {
        (perimeter_constant(disks) * self.grid as f64).ceil() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    /// Disjoint from every disk (group B).
    Free,
    /// Meets some circle (group C).
    Crossing,
    /// Strictly inside one disk (group A).
    Inside,
}

/// Classifies the closed square `cell` against a closed disk by its nearest
/// and farthest points. A cell touching the circle counts as crossing.
fn classify_cell(x0: f64, x1: f64, y0: f64, y1: f64, d: &Disk) -> Cell {
    let nx = (x0 - d.x).max(0.0).max(d.x - x1);
    let ny = (y0 - d.y).max(0.0).max(d.y - y1);
    let r2 = d.r * d.r;
    if nx * nx + ny * ny > r2 {
        return Cell::Free;
    }
    let fx = (d.x - x0).abs().max((d.x - x1).abs());
    let fy = (d.y - y0).abs().max((d.y - y1).abs());
    if fx * fx + fy * fy < r2 {
        Cell::Inside
    } else {
        Cell::Crossing
    }
}

fn index_range(lo: f64, hi: f64, n: usize) -> (usize, usize) {
    let nf = n as f64;
    let a = ((lo + 0.5) * nf).floor() as i64 - 1;
    let b = ((hi + 0.5) * nf).floor() as i64 + 1;
    (a.max(0) as usize, b.min(n as i64 - 1).max(0) as usize)
}

struct RowResult {
    inside: usize,
    crossing: usize,
    free_centers: Vec<(f64, f64)>,
}

fn classify_disks(disks: &[Disk], n: usize) -> SquareClassification {
    let nf = n as f64;
    let h = 1.0 / nf;
    let mut rows: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (k, d) in disks.iter().enumerate() {
        let (lo, hi) = index_range(d.y - d.r, d.y + d.r, n);
        for row in &mut rows[lo..=hi] {
            row.push(k as u32);
        }
    }
    let results: Vec<RowResult> = rows
        .par_iter()
        .enumerate()
        .map(|(j, active)| {
            let y0 = -0.5 + j as f64 * h;
            let y1 = y0 + h;
            let mut state = vec![Cell::Free; n];
            for &k in active {
                let d = &disks[k as usize];
                let (lo, hi) = index_range(d.x - d.r, d.x + d.r, n);
                for (i, s) in state.iter_mut().enumerate().take(hi + 1).skip(lo) {
                    if *s == Cell::Inside {
                        continue;
                    }
                    let x0 = -0.5 + i as f64 * h;
                    match classify_cell(x0, x0 + h, y0, y1, d) {
                        Cell::Inside => *s = Cell::Inside,
                        Cell::Crossing => *s = Cell::Crossing,
                        Cell::Free => {}
                    }
                }
            }
            let mut out = RowResult {
                inside: 0,
                crossing: 0,
                free_centers: Vec::new(),
            };
            let yc = y0 + 0.5 * h;
            for (i, s) in state.iter().enumerate() {
                match s {
                    Cell::Inside => out.inside += 1,
                    Cell::Crossing => out.crossing += 1,
                    Cell::Free => out.free_centers.push((-0.5 + (i as f64 + 0.5) * h, yc)),
                }
            }
            out
        })
        .collect();

    let mut cls = SquareClassification {
        grid: n,
        inside: 0,
        free: 0,
        crossing: 0,
        free_centers: Vec::new(),
    };
    for r in results {
        cls.inside += r.inside;
        cls.crossing += r.crossing;
        cls.free += r.free_centers.len();
        cls.free_centers.extend(r.free_centers);
    }
    cls
}

/// Classifies grid cell `(i, j)` (column, row) against every disk of `p`.
pub fn classify_cell_at(p: &Packing, n: usize, i: usize, j: usize) -> Cell {
    let h = 1.0 / n as f64;
    let x0 = -0.5 + i as f64 * h;
    let y0 = -0.5 + j as f64 * h;
    let mut out = Cell::Free;
    for d in &p.disks {
        match classify_cell(x0, x0 + h, y0, y0 + h, d) {
            Cell::Inside => return Cell::Inside,
            Cell::Crossing => out = Cell::Crossing,
            Cell::Free => {}
        }
    }
    out
}

/// Splits the `n × n` grid into A, B and C cells relative to `p`.
pub fn classify_squares(p: &Packing, n: usize) -> Result<SquareClassification> {
    if n < 2 {
        return Err(invalid(format!("grid size {n} must be at least 2")));
    }
    let r_min = p.r_min();
    if !(SQRT_2 / n as f64).lt(&r_min) {
        return Err(invalid(format!(
            "cell diameter √2/{n} is not below the smallest radius {r_min}"
        )));
    }
    Ok(classify_disks(&p.disks, n))
}

/// Smallest `N ≥ 2` with `perimeter / N < target` and `√2 / N < r_min`.
fn choose_grid(perimeter: f64, target: f64, r_min: f64) -> f64 {
    let ok = |n: f64| perimeter / n < target && SQRT_2 / n < r_min;
    let mut n = (perimeter / target)
        .floor()
        .max((SQRT_2 / r_min).floor())
        .max(1.0)
        + 1.0;
    if !n.is_finite() {
        return f64::INFINITY;
    }
    while !ok(n) {
        n += 1.0;
    }
    while n > 2.0 && ok(n - 1.0) {
        n -= 1.0;
    }
    n.max(2.0)
}

/// Runs the subdivision construction for `rounds` rounds.
pub fn paper_packing(rounds: usize, n_cap: usize) -> Result<Packing> {
    if rounds == 0 {
        return Err(invalid("packing needs at least one round"));
    }
    let mut disks = vec![Disk::new(0.0, 0.0, BASE_RADIUS)];
    let mut stats = Vec::with_capacity(rounds - 1);
    for done in 1..rounds {
        let perimeter = perimeter_constant(&disks);
        let target = 2f64.powi(-(done as i32) - 2);
        let r_min = disks.iter().map(|d| d.r).fold(f64::INFINITY, f64::min);
        let needed = choose_grid(perimeter, target, r_min);
        if needed > n_cap as f64 {
            return Err(Error::PackingBudgetExceeded {
                round: done + 1,
                needed: if needed.is_finite() {
                    needed as usize
                } else {
                    usize::MAX
                },
                cap: n_cap,
            });
        }
        let n = needed as usize;
        let cls = classify_disks(&disks, n);
        stats.push(RoundStats {
            grid: n,
            inside: cls.inside,
            free: cls.free,
            crossing: cls.crossing,
        });
        let r_new = BASE_RADIUS / n as f64;
        disks.extend(cls.free_centers.iter().map(|&(x, y)| Disk::new(x, y, r_new)));
    }
    Packing::assemble(disks, rounds, stats)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PackingStats {
    pub coverage: f64,
    pub gamma: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub count: usize,
}

pub fn packing_stats(p: &Packing) -> Result<PackingStats> {
    if p.disks.is_empty() {
        return Err(invalid("packing has no disks"));
    }
    Ok(PackingStats {
        coverage: coverage_of(&p.disks),
        gamma: separation(&p.disks),
        r_min: p.r_min(),
        r_max: p.r_max(),
        count: p.disks.len(),
    })
}

/// `γ`: the smallest of all pairwise gaps and all gaps to the square boundary.
///
/// Only pairs closer than the boundary gap can lower the result. Two disks
/// with gap `g < δ` both have their outer ring `r ≤ |p − center| ≤ r + δ/2`
/// through the midpoint of the gap, so it is enough to compare disks whose
/// rings meet a common bucket of a uniform grid.
pub fn separation(disks: &[Disk]) -> f64 {
    let boundary = disks.iter().map(Disk::boundary_gap).fold(f64::INFINITY, f64::min);
    if disks.len() < 2 {
        return boundary;
    }
    if !(boundary > 0.0) {
        // Already degenerate; report the worst pair by brute force for small inputs.
        return disks
            .iter()
            .enumerate()
            .flat_map(|(i, a)| disks[i + 1..].iter().map(move |b| a.gap_to(b)))
            .fold(boundary, f64::min);
    }
    let delta = boundary;
    let r_min = disks.iter().map(|d| d.r).fold(f64::INFINITY, f64::min);
    let side = ((1.0 / (2.0 * r_min + delta)).floor() as usize).clamp(1, SEPARATION_BUCKETS_MAX);
    let h = 1.0 / side as f64;

    let mut entries: Vec<(u32, u32)> = Vec::new();
    for (k, d) in disks.iter().enumerate() {
        let outer = d.r + 0.5 * delta;
        let (ilo, ihi) = index_range(d.x - outer, d.x + outer, side);
        let (jlo, jhi) = index_range(d.y - outer, d.y + outer, side);
        for j in jlo..=jhi {
            let y0 = -0.5 + j as f64 * h;
            for i in ilo..=ihi {
                let x0 = -0.5 + i as f64 * h;
                let nx = (x0 - d.x).max(0.0).max(d.x - x0 - h);
                let ny = (y0 - d.y).max(0.0).max(d.y - y0 - h);
                let fx = (d.x - x0).abs().max((d.x - x0 - h).abs());
                let fy = (d.y - y0).abs().max((d.y - y0 - h).abs());
                if nx * nx + ny * ny <= outer * outer && fx * fx + fy * fy >= d.r * d.r {
                    entries.push(((j * side + i) as u32, k as u32));
                }
            }
        }
    }
    entries.par_sort_unstable();

    let mut best = delta;
    let mut start = 0;
    while start < entries.len() {
        let bucket = entries[start].0;
        let mut end = start + 1;
        while end < entries.len() && entries[end].0 == bucket {
            end += 1;
        }
        let group = &entries[start..end];
        for (a, &(_, i)) in group.iter().enumerate() {
            for &(_, j) in &group[a + 1..] {
                best = best.min(disks[i as usize].gap_to(&disks[j as usize]));
            }
        }
        start = end;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_gamma(disks: &[Disk]) -> f64 {
        let mut g = disks.iter().map(Disk::boundary_gap).fold(f64::INFINITY, f64::min);
        for i in 0..disks.len() {
            for j in i + 1..disks.len() {
                g = g.min(disks[i].gap_to(&disks[j]));
            }
        }
        g
    }

    #[test]
    fn single_disk_stats() {
        let p = paper_packing(1, DEFAULT_N_CAP).unwrap();
        let s = packing_stats(&p).unwrap();
        assert_eq!(s.count, 1);
        assert!((s.coverage - PI * 0.2401).abs() < 1e-15);
        assert!((s.coverage - 0.75430).abs() < 1e-5);
        assert!((s.gamma - 0.01).abs() < 1e-15);
        assert_eq!(s.r_min, 0.49);
        assert!(p.per_round_stats.is_empty());
    }

    #[test]
    fn two_disk_gamma() {
        let p = Packing::from_disks(vec![Disk::new(-0.25, 0.0, 0.2), Disk::new(0.25, 0.0, 0.2)]).unwrap();
        assert!((p.gamma - 0.05).abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid_packings() {
        assert!(Packing::from_disks(vec![]).is_err());
        assert!(Packing::from_disks(vec![Disk::new(0.0, 0.0, 0.5)]).is_err());
        assert!(Packing::from_disks(vec![Disk::new(-0.1, 0.0, 0.1), Disk::new(0.1, 0.0, 0.1)]).is_err());
        assert!(packing_stats(&Packing {
            disks: vec![],
            coverage: 0.0,
            gamma: 0.0,
            rounds: 0,
            per_round_stats: vec![]
        })
        .is_err());
    }

    #[test]
    fn corner_cell_is_free() {
        let p = paper_packing(1, DEFAULT_N_CAP).unwrap();
        let cls = classify_squares(&p, 10).unwrap();
        assert_eq!(cls.inside + cls.free + cls.crossing, 100);
        let has = |x: f64, y: f64| {
            cls.free_centers
                .iter()
                .any(|&(a, b)| (a - x).abs() < 1e-12 && (b - y).abs() < 1e-12)
        };
        // Nearest point (0.4, 0.4) of the corner cell is √0.32 ≈ 0.566 > 0.49 away.
        assert!(has(0.45, 0.45));
        assert!(has(-0.45, -0.45));
        assert!(!has(0.05, 0.05));
        // The central 6x6 block lies strictly inside the disk.
        assert!(cls.inside >= 36 - 4);
        assert!(cls.crossing <= cls.crossing_bound(&p.disks));
        let bound = (4.0 * SQRT_2 * PI * 0.49 * 10.0).ceil() as usize;
        assert_eq!(cls.crossing_bound(&p.disks), bound);
    }

    #[test]
    fn classify_rejects_coarse_grid() {
        let p = paper_packing(1, DEFAULT_N_CAP).unwrap();
        assert!(classify_squares(&p, 2).is_err());
        assert!(classify_squares(&p, 1).is_err());
        assert!(classify_squares(&p, 3).is_ok());
    }

    #[test]
    fn second_round() {
        let p = paper_packing(2, DEFAULT_N_CAP).unwrap();
        assert!(p.coverage >= 0.75);
        assert_eq!(p.per_round_stats.len(), 1);
        let st = p.per_round_stats[0];
        // Smallest N with 4√2π·0.49/N < 1/8.
        assert_eq!(st.grid, 70);
        assert_eq!(st.inside + st.free + st.crossing, 70 * 70);
        assert_eq!(p.disks.len(), 1 + st.free);
        assert!((p.gamma - brute_gamma(&p.disks)).abs() < 1e-15);
        assert!(p.gamma > 0.0);
        for d in &p.disks {
            assert!(d.boundary_gap() >= p.gamma - 1e-15);
        }
    }

    #[test]
    fn budget_is_enforced() {
        match paper_packing(3, 100) {
            Err(Error::PackingBudgetExceeded {
                round: 3,
                needed,
                cap: 100,
            }) => assert!(needed > 100),
            other => panic!("expected budget error, got {other:?}"),
        }
        assert!(paper_packing(0, 100).is_err());
    }

    #[test]
    fn separation_matches_brute_force_on_random_grids() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            // Jittered grid of small disks plus one large one.
            let mut disks = vec![Disk::new(-0.2, -0.2, 0.2)];
            let n = 12;
            for i in 0..n {
                for j in 0..n {
                    let x = -0.5 + (i as f64 + 0.5) / n as f64 + rng.gen_range(-0.005..0.005);
                    let y = -0.5 + (j as f64 + 0.5) / n as f64 + rng.gen_range(-0.005..0.005);
                    let d = Disk::new(x, y, rng.gen_range(0.005..0.03));
                    if disks.iter().all(|e| e.gap_to(&d) > 0.0) && d.boundary_gap() > 0.0 {
                        disks.push(d);
                    }
                }
            }
            assert_eq!(separation(&disks), brute_gamma(&disks));
        }
    }

    #[test]
    fn json_shape() {
        let p = paper_packing(2, DEFAULT_N_CAP).unwrap();
        let v: serde_json::Value = serde_json::from_str(&p.to_json()).unwrap();
        assert_eq!(v["rounds"], 2);
        assert_eq!(v["per_round"][0]["N"], 70);
        assert!(v["disks"][0]["r"].as_f64().unwrap() == 0.49);
        assert!(v["coverage"].as_f64().unwrap() >= 0.75);
    }
}
