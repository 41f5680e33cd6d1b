//! Extrinsic costs for the pentagon, star and hash drawing tasks.
//!
//! All quantities are in image pixels. Variances are population variances.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::Stroke;

pub const STRUCTURE_PENALTY: f64 = 1000.0;
pub const SIZE_PENALTY: f64 = 700.0;
const LEN_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrawCostConfig {
    /// Mean side length below which the pentagon size penalty applies.
    pub pentagon_min_length: f64,
    pub star_min_length: f64,
    pub hash_min_length: f64,
    /// Weight on the squared distance between intersection parameters and their target.
    pub hash_intersect_weight: f64,
    /// Added per (horizontal, vertical) pair whose segments do not cross.
    pub hash_miss_penalty: f64,
}

impl Default for DrawCostConfig {
    fn default() -> Self {
        Self {
            pentagon_min_length: 50.0,
            star_min_length: 35.0,
            hash_min_length: 75.0,
            hash_intersect_weight: 200.0,
            hash_miss_penalty: 500.0,
        }
    }
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn add(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] + b[0], a[1] + b[1]]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn norm(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

fn norm_sq(a: [f64; 2]) -> f64 {
    dot(a, a)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
}

/// Angle between two vectors, lengths floored.
fn angle_between(a: [f64; 2], b: [f64; 2]) -> f64 {
    let denom = norm(a).max(LEN_FLOOR) * norm(b).max(LEN_FLOOR);
    (dot(a, b) / denom).clamp(-1.0, 1.0).acos()
}

fn centroid(points: &[[f64; 2]]) -> [f64; 2] {
    let n = points.len() as f64;
    let s = points.iter().fold([0.0, 0.0], |acc, p| add(acc, *p));
    [s[0] / n, s[1] / n]
}

/// Normalized variance `Var(x) / mean(x)^2`.
fn normalized_variance(xs: &[f64]) -> f64 {
    variance(xs) / mean(xs).max(LEN_FLOOR).powi(2)
}

/// Brings a stroke set to `expected` strokes: truncates extras, pads missing
/// ones with zero-length strokes at the last endpoint. Returns the penalty
/// `1000 * |expected - actual|`.
fn fit_count(strokes: &[Stroke], expected: usize) -> (Vec<Stroke>, f64) {
    let penalty = STRUCTURE_PENALTY * expected.abs_diff(strokes.len()) as f64;
    let mut fitted: Vec<Stroke> = strokes.iter().take(expected).copied().collect();
    let anchor = strokes.last().map_or([0.0, 0.0], Stroke::end);
    while fitted.len() < expected {
        fitted.push(Stroke::new(anchor, [0.0, 0.0]));
    }
    (fitted, penalty)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PentagonCost {
    pub connection: f64,
    pub length: f64,
    pub radius: f64,
    pub angle: f64,
    pub spacing: f64,
    pub closure: f64,
    pub size: f64,
    pub structure: f64,
}

impl PentagonCost {
    pub fn total(&self) -> f64 {
        self.connection
            + self.length
            + self.radius
            + self.angle
            + self.spacing
            + self.closure
            + self.size
            + self.structure
    }
}

pub fn pentagon_breakdown(strokes: &[Stroke], cfg: &DrawCostConfig) -> PentagonCost {
    let (s, structure) = fit_count(strokes, 5);
    let starts: Vec<[f64; 2]> = s.iter().map(|k| k.start).collect();
    let lengths: Vec<f64> = s.iter().map(Stroke::length).collect();
    let c = centroid(&starts);
    let radii: Vec<f64> = starts.iter().map(|p| norm(sub(*p, c))).collect();

    let connection = 500.0
        * (0..5)
            .map(|i| norm_sq(sub(s[i].end(), s[(i + 1) % 5].start)))
            .sum::<f64>();
    let interior = 3.0 * PI / 5.0;
    let angle = 100.0
        * (0..5)
            .map(|i| {
                let prev = s[(i + 4) % 5].dir;
                (angle_between([-prev[0], -prev[1]], s[i].dir) - interior).powi(2)
            })
            .sum::<f64>();
    let central = 2.0 * PI / 5.0;
    let spacing = 100.0
        * (0..5)
            .map(|i| {
                (angle_between(sub(starts[i], c), sub(starts[(i + 1) % 5], c)) - central).powi(2)
            })
            .sum::<f64>();
    PentagonCost {
        connection,
        length: 500.0 * normalized_variance(&lengths),
        radius: 300.0 * normalized_variance(&radii),
        angle,
        spacing,
        closure: 200.0 * norm_sq(sub(s[0].start, s[4].end())),
        size: if mean(&lengths) < cfg.pentagon_min_length {
            SIZE_PENALTY
        } else {
            0.0
        },
        structure,
    }
}

pub fn cost_pentagon(strokes: &[Stroke], cfg: &DrawCostConfig) -> f64 {
    pentagon_breakdown(strokes, cfg).total()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StarCost {
    pub connection: f64,
    pub outer_radius: f64,
    pub inner_radius: f64,
    pub ratio: f64,
    pub angle: f64,
    pub size: f64,
    pub structure: f64,
    /// Mean outer radius over mean inner radius.
    pub rho: f64,
}

impl StarCost {
    pub fn total(&self) -> f64 {
        self.connection
            + self.outer_radius
            + self.inner_radius
            + self.ratio
            + self.angle
            + self.size
            + self.structure
    }
}

/// Ratio term; `rho == 1.5` takes the second branch.
pub fn star_ratio_term(rho: f64) -> f64 {
    if rho < 1.5 {
        300.0 * (1.5 - rho).powi(2)
    } else {
        100.0 * (rho - 2.0).powi(2)
    }
}

pub fn star_breakdown(strokes: &[Stroke], cfg: &DrawCostConfig) -> StarCost {
    let (s, structure) = fit_count(strokes, 10);
    let starts: Vec<[f64; 2]> = s.iter().map(|k| k.start).collect();
    let c = centroid(&starts);
    let radii: Vec<f64> = starts.iter().map(|p| norm(sub(*p, c))).collect();
    let outer: Vec<f64> = radii.iter().step_by(2).copied().collect();
    let inner: Vec<f64> = radii.iter().skip(1).step_by(2).copied().collect();
    let (r_out, r_in) = (mean(&outer), mean(&inner));
    let rho = r_out / r_in.max(LEN_FLOOR);
    let lengths: Vec<f64> = s.iter().map(Stroke::length).collect();

    let connection = 100.0
        * (0..10)
            .map(|i| norm_sq(sub(s[i].end(), s[(i + 1) % 10].start)))
            .sum::<f64>();
    let angle = 100.0
        * (0..10)
            .map(|i| {
                (angle_between(sub(starts[i], c), sub(starts[(i + 1) % 10], c)) - PI / 5.0)
                    .powi(2)
            })
            .sum::<f64>();
    StarCost {
        connection,
        outer_radius: 500.0 * variance(&outer) / r_out.max(LEN_FLOOR).powi(2),
        inner_radius: 500.0 * variance(&inner) / r_in.max(LEN_FLOOR).powi(2),
        ratio: star_ratio_term(rho),
        angle,
        size: if mean(&lengths) < cfg.star_min_length {
            SIZE_PENALTY
        } else {
            0.0
        },
        structure,
        rho,
    }
}

pub fn cost_star(strokes: &[Stroke], cfg: &DrawCostConfig) -> f64 {
    star_breakdown(strokes, cfg).total()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HashCost {
    pub straightness: f64,
    pub parallel: f64,
    pub perpendicular: f64,
    pub spacing: f64,
    pub intersection: f64,
    pub length_consistency: f64,
    pub length_balance: f64,
    pub size: f64,
    pub structure: f64,
    /// Set when the horizontal/vertical split was not two and two.
    pub misclassified: bool,
}

impl HashCost {
    pub fn total(&self) -> f64 {
        self.straightness
            + self.parallel
            + self.perpendicular
            + self.spacing
            + self.intersection
            + self.length_consistency
            + self.length_balance
            + self.size
            + self.structure
    }
}

/// Splits four strokes into (horizontal, vertical) index pairs. When the
/// `|v_x| > |v_y|` rule does not give two of each, the two most horizontal
/// strokes are taken as horizontal and the split is flagged.
fn classify_hash(s: &[Stroke]) -> ([usize; 2], [usize; 2], bool) {
    let horizontal: Vec<usize> = (0..4).filter(|&i| s[i].dir[0].abs() > s[i].dir[1].abs()).collect();
    if horizontal.len() == 2 {
        let vertical: Vec<usize> = (0..4).filter(|i| !horizontal.contains(i)).collect();
        return ([horizontal[0], horizontal[1]], [vertical[0], vertical[1]], false);
    }
    let score = |i: usize| s[i].dir[0].abs() / s[i].length().max(LEN_FLOOR);
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| score(b).total_cmp(&score(a)).then(a.cmp(&b)));
    let mut h = [order[0], order[1]];
    let mut v = [order[2], order[3]];
    h.sort_unstable();
    v.sort_unstable();
    (h, v, true)
}

/// Line parameters `(t_h, t_v)` where the two stroke lines cross, if not parallel.
pub(crate) fn crossing_params(h: &Stroke, v: &Stroke) -> Option<(f64, f64)> {
    let den = cross(h.dir, v.dir);
    if den.abs() < 1e-12 {
        return None;
    }
    let w = sub(v.start, h.start);
    Some((cross(w, v.dir) / den, cross(w, h.dir) / den))
}

const THIRDS: [(f64, f64); 4] = [
    (1.0 / 3.0, 1.0 / 3.0),
    (1.0 / 3.0, 2.0 / 3.0),
    (2.0 / 3.0, 1.0 / 3.0),
    (2.0 / 3.0, 2.0 / 3.0),
];

/// Every ordering of four items, for the pair-to-target assignment.
fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    if (0..4).all(|i| (i + 1..4).all(|j| p[i] != p[j])) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

fn intersection_penalty(s: &[Stroke], h: [usize; 2], v: [usize; 2], cfg: &DrawCostConfig) -> f64 {
    let pairs = [(h[0], v[0]), (h[0], v[1]), (h[1], v[0]), (h[1], v[1])];
    let params: Vec<Option<(f64, f64)>> = pairs
        .iter()
        .map(|&(a, b)| crossing_params(&s[a], &s[b]))
        .collect();
    let dist = |p: Option<(f64, f64)>, target: (f64, f64)| match p {
        Some((th, tv)) => (th - target.0).powi(2) + (tv - target.1).powi(2),
        None => 1.0,
    };
    let matching = permutations4()
        .iter()
        .map(|perm| {
            (0..4)
                .map(|k| dist(params[k], THIRDS[perm[k]]))
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min);
    let misses = params
        .iter()
        .filter(|p| match p {
            Some((th, tv)) => !(0.0..=1.0).contains(th) || !(0.0..=1.0).contains(tv),
            None => true,
        })
        .count();
    cfg.hash_intersect_weight * matching + cfg.hash_miss_penalty * misses as f64
}

/// Angle between two lines regardless of drawing direction, in `[0, pi/2]`.
fn line_angle(a: [f64; 2], b: [f64; 2]) -> f64 {
    let denom = norm(a).max(LEN_FLOOR) * norm(b).max(LEN_FLOOR);
    (dot(a, b).abs() / denom).clamp(0.0, 1.0).acos()
}

pub fn hash_breakdown(strokes: &[Stroke], cfg: &DrawCostConfig) -> HashCost {
    let (s, mut structure) = fit_count(strokes, 4);
    let (h, v, misclassified) = classify_hash(&s);
    if misclassified {
        structure += STRUCTURE_PENALTY;
    }
    let len = |i: usize| s[i].length();
    let safe = |i: usize| len(i).max(LEN_FLOOR);
    let mean_len = (0..4).map(len).sum::<f64>() / 4.0;

    let straightness = 100.0
        * (h.iter().map(|&i| (s[i].dir[1].abs() / safe(i)).powi(2)).sum::<f64>()
            + v.iter().map(|&i| (s[i].dir[0].abs() / safe(i)).powi(2)).sum::<f64>());
    let parallel = 50.0
        * (line_angle(s[h[0]].dir, s[h[1]].dir).powi(2)
            + line_angle(s[v[0]].dir, s[v[1]].dir).powi(2));
    let perpendicular = 50.0
        * h.iter()
            .flat_map(|&a| v.iter().map(move |&b| (a, b)))
            .map(|(a, b)| (dot(s[a].dir, s[b].dir) / (safe(a) * safe(b))).powi(2))
            .sum::<f64>();
    let l = mean_len.max(LEN_FLOOR);
    let d_h = (s[h[0]].start[1] - s[h[1]].start[1]).abs() / l;
    let d_v = (s[v[0]].start[0] - s[v[1]].start[0]).abs() / l;
    let spacing =
        300.0 * ((d_h - 0.33).powi(2) + (d_v - 0.33).powi(2)) + 100.0 * (d_h - d_v).powi(2);
    let rel_diff = |a: usize, b: usize| (len(a) - len(b)) / (0.5 * (len(a) + len(b))).max(LEN_FLOOR);
    let length_consistency = 50.0 * (rel_diff(h[0], h[1]).powi(2) + rel_diff(v[0], v[1]).powi(2));
    let total_len = (0..4).map(len).sum::<f64>().max(LEN_FLOOR);
    let length_balance =
        20.0 * ((len(h[0]) + len(h[1]) - len(v[0]) - len(v[1])) / total_len).powi(2);

    HashCost {
        straightness,
        parallel,
        perpendicular,
        spacing,
        intersection: intersection_penalty(&s, h, v, cfg),
        length_consistency,
        length_balance,
        size: if mean_len < cfg.hash_min_length {
            SIZE_PENALTY
        } else {
            0.0
        },
        structure,
        misclassified,
    }
}

pub fn cost_hash(strokes: &[Stroke], cfg: &DrawCostConfig) -> f64 {
    hash_breakdown(strokes, cfg).total()
}
