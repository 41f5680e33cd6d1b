//! Reference evaluators for the task costs, written directly from the cost
//! formulas with different numerics (complex-free atan2 angles, closed-form
//! 2x2 solves, explicit sums), compared against the library on random inputs.

use std::f64::consts::PI;

use mops::draw::{
    cost_hash, cost_pentagon, cost_star, hash_breakdown, pentagon_breakdown, star_breakdown, DrawCostConfig, Stroke,
};
use mops::push::{cost_circle, cost_line, cost_push_avoid, PushTrace};
use mops::scene::{Frame, SceneState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TOL: f64 = 1e-9;

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * a.abs().max(b.abs()).max(1.0)
}

pub type P = (f64, f64);

pub fn len(v: P) -> f64 {
    (v.0 * v.0 + v.1 * v.1).sqrt()
}

/// Unsigned angle between vectors in `[0, pi]`.
pub fn angle(a: P, b: P) -> f64 {
    (a.0 * b.1 - a.1 * b.0).abs().atan2(a.0 * b.0 + a.1 * b.1)
}

pub fn population_var(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let sum: f64 = xs.iter().sum();
    let m = sum / n;
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n
}

pub fn avg(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn split(strokes: &[Stroke]) -> (Vec<P>, Vec<P>) {
    (
        strokes.iter().map(|k| (k.start[0], k.start[1])).collect(),
        strokes.iter().map(|k| (k.dir[0], k.dir[1])).collect(),
    )
}

pub fn centroid(s: &[P]) -> P {
    let n = s.len() as f64;
    (s.iter().map(|p| p.0).sum::<f64>() / n, s.iter().map(|p| p.1).sum::<f64>() / n)
}

pub fn oracle_pentagon(strokes: &[Stroke], l_thresh: f64) -> f64 {
    let (s, v) = split(strokes);
    let c = centroid(&s);
    let end = |i: usize| (s[i].0 + v[i].0, s[i].1 + v[i].1);
    let mut total = 0.0;
    for i in 0..5 {
        let j = (i + 1) % 5;
        total += 500.0 * ((end(i).0 - s[j].0).powi(2) + (end(i).1 - s[j].1).powi(2));
    }
    let lens: Vec<f64> = v.iter().map(|&w| len(w)).collect();
    total += 500.0 * population_var(&lens) / avg(&lens).powi(2);
    let radii: Vec<f64> = s.iter().map(|p| len((p.0 - c.0, p.1 - c.1))).collect();
    total += 300.0 * population_var(&radii) / avg(&radii).powi(2);
    for i in 0..5 {
        let prev = v[(i + 4) % 5];
        total += 100.0 * (angle((-prev.0, -prev.1), v[i]) - 3.0 * PI / 5.0).powi(2);
    }
    for i in 0..5 {
        let a = (s[i].0 - c.0, s[i].1 - c.1);
        let b = (s[(i + 1) % 5].0 - c.0, s[(i + 1) % 5].1 - c.1);
        total += 100.0 * (angle(a, b) - 2.0 * PI / 5.0).powi(2);
    }
    total += 200.0 * ((s[0].0 - end(4).0).powi(2) + (s[0].1 - end(4).1).powi(2));
    if avg(&lens) < l_thresh {
        total += 700.0;
    }
    total
}

pub fn oracle_star(strokes: &[Stroke]) -> f64 {
    let (s, v) = split(strokes);
    let c = centroid(&s);
    let mut total = 0.0;
    for i in 0..10 {
        let j = (i + 1) % 10;
        total += 100.0 * ((s[i].0 + v[i].0 - s[j].0).powi(2) + (s[i].1 + v[i].1 - s[j].1).powi(2));
    }
    let r = |i: usize| len((s[i].0 - c.0, s[i].1 - c.1));
    let outer: Vec<f64> = [0, 2, 4, 6, 8].iter().map(|&i| r(i)).collect();
    let inner: Vec<f64> = [1, 3, 5, 7, 9].iter().map(|&i| r(i)).collect();
    let (ro, ri) = (avg(&outer), avg(&inner));
    total += 500.0 * population_var(&outer) / (ro * ro) + 500.0 * population_var(&inner) / (ri * ri);
    let rho = ro / ri;
    total += if rho < 1.5 { 300.0 * (1.5 - rho).powi(2) } else { 100.0 * (rho - 2.0).powi(2) };
    for i in 0..10 {
        let a = (s[i].0 - c.0, s[i].1 - c.1);
        let b = (s[(i + 1) % 10].0 - c.0, s[(i + 1) % 10].1 - c.1);
        total += 100.0 * (angle(a, b) - PI / 5.0).powi(2);
    }
    let mean_edge = v.iter().map(|&w| len(w)).sum::<f64>() / 10.0;
    if mean_edge < 35.0 {
        total += 700.0;
    }
    total
}

/// Smallest angle between two undirected lines, from their headings.
pub fn line_gap(a: P, b: P) -> f64 {
    let d = (a.1.atan2(a.0) - b.1.atan2(b.0)).rem_euclid(PI);
    d.min(PI - d)
}

/// Crossing parameters along `h` and `v` by Cramer's rule on
/// `s_h + t_h v_h = s_v + t_v v_v`.
pub fn crossing(sh: P, vh: P, sv: P, vv: P) -> Option<(f64, f64)> {
    // [vh  -vv] [t_h t_v]^T = sv - sh
    let det = vh.0 * -vv.1 - (-vv.0) * vh.1;
    if det.abs() < 1e-12 {
        return None;
    }
    let r = (sv.0 - sh.0, sv.1 - sh.1);
    let th = (r.0 * -vv.1 - (-vv.0) * r.1) / det;
    let tv = (vh.0 * r.1 - vh.1 * r.0) / det;
    Some((th, tv))
}

pub fn oracle_hash(strokes: &[Stroke], cfg: &DrawCostConfig) -> f64 {
    let (s, v) = split(strokes);
    let l: Vec<f64> = v.iter().map(|&w| len(w)).collect();
    let mut hs: Vec<usize> = (0..4).filter(|&i| v[i].0.abs() > v[i].1.abs()).collect();
    let mut extra = 0.0;
    if hs.len() != 2 {
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| (v[b].0.abs() / l[b]).total_cmp(&(v[a].0.abs() / l[a])).then(a.cmp(&b)));
        hs = vec![order[0].min(order[1]), order[0].max(order[1])];
        extra = 1000.0;
    }
    let vs: Vec<usize> = (0..4).filter(|i| !hs.contains(i)).collect();
    let mut total = extra;
    for &i in &hs {
        total += 100.0 * (v[i].1.abs() / l[i]).powi(2);
    }
    for &i in &vs {
        total += 100.0 * (v[i].0.abs() / l[i]).powi(2);
    }
    total += 50.0 * (line_gap(v[hs[0]], v[hs[1]]).powi(2) + line_gap(v[vs[0]], v[vs[1]]).powi(2));
    for &a in &hs {
        for &b in &vs {
            total += 50.0 * ((v[a].0 * v[b].0 + v[a].1 * v[b].1) / (l[a] * l[b])).powi(2);
        }
    }
    let lbar = l.iter().sum::<f64>() / 4.0;
    let dh = (s[hs[0]].1 - s[hs[1]].1).abs() / lbar;
    let dv = (s[vs[0]].0 - s[vs[1]].0).abs() / lbar;
    total += 300.0 * ((dh - 0.33).powi(2) + (dv - 0.33).powi(2)) + 100.0 * (dh - dv).powi(2);

    // crossings matched one-to-one to the four third-points
    let targets = [(1.0 / 3.0, 1.0 / 3.0), (1.0 / 3.0, 2.0 / 3.0), (2.0 / 3.0, 1.0 / 3.0), (2.0 / 3.0, 2.0 / 3.0)];
    let crossings: Vec<Option<(f64, f64)>> = [(hs[0], vs[0]), (hs[0], vs[1]), (hs[1], vs[0]), (hs[1], vs[1])]
        .iter()
        .map(|&(a, b)| crossing(s[a], v[a], s[b], v[b]))
        .collect();
    let cost_of = |k: usize, t: usize| match crossings[k] {
        Some((th, tv)) => (th - targets[t].0).powi(2) + (tv - targets[t].1).powi(2),
        None => 1.0,
    };
    let mut best = f64::INFINITY;
    let mut used = [false; 4];
    fn assign(k: usize, acc: f64, used: &mut [bool; 4], cost_of: &dyn Fn(usize, usize) -> f64, best: &mut f64) {
        if k == 4 {
            *best = best.min(acc);
            return;
        }
        for t in 0..4 {
            if !used[t] {
                used[t] = true;
                assign(k + 1, acc + cost_of(k, t), used, cost_of, best);
                used[t] = false;
            }
        }
    }
    assign(0, 0.0, &mut used, &cost_of, &mut best);
    total += cfg.hash_intersect_weight * best;
    let misses = crossings
        .iter()
        .filter(|c| !matches!(c, Some((th, tv)) if (0.0..=1.0).contains(th) && (0.0..=1.0).contains(tv)))
        .count();
    total += cfg.hash_miss_penalty * misses as f64;

    let rel = |a: usize, b: usize| (l[a] - l[b]) / ((l[a] + l[b]) / 2.0);
    total += 50.0 * (rel(hs[0], hs[1]).powi(2) + rel(vs[0], vs[1]).powi(2));
    total += 20.0 * ((l[hs[0]] + l[hs[1]] - l[vs[0]] - l[vs[1]]) / l.iter().sum::<f64>()).powi(2);
    if lbar < 75.0 {
        total += 700.0;
    }
    total
}

pub fn oracle_circle(p: &[[f64; 2]]) -> f64 {
    let n = p.len() as f64;
    let c = (p.iter().map(|q| q[0]).sum::<f64>() / n, p.iter().map(|q| q[1]).sum::<f64>() / n);
    let rad: f64 = p.iter().map(|q| (0.2 - len((q[0] - c.0, q[1] - c.1))).powi(2)).sum();
    let mut neigh = 0.0;
    for (i, a) in p.iter().enumerate() {
        let mut d = f64::INFINITY;
        for (j, b) in p.iter().enumerate() {
            if i != j {
                d = d.min(len((a[0] - b[0], a[1] - b[1])));
            }
        }
        neigh += (0.2 - d).powi(2);
    }
    1000.0 * rad + neigh
}

/// Line fit through the normal equations, spacing from projections onto the
/// fitted unit direction.
pub fn oracle_line(p: &[[f64; 2]]) -> f64 {
    let n = p.len() as f64;
    let (sx, sy) = (p.iter().map(|q| q[0]).sum::<f64>(), p.iter().map(|q| q[1]).sum::<f64>());
    let sxx: f64 = p.iter().map(|q| q[0] * q[0]).sum();
    let sxy: f64 = p.iter().map(|q| q[0] * q[1]).sum();
    let m = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let b = (sy - m * sx) / n;
    let fit = p.iter().map(|q| (q[1] - m * q[0] - b).powi(2)).sum::<f64>() / n;
    let u = (1.0 / (1.0 + m * m).sqrt(), m / (1.0 + m * m).sqrt());
    let mut t: Vec<f64> = p.iter().map(|q| q[0] * u.0 + (q[1] - b) * u.1).collect();
    t.sort_by(f64::total_cmp);
    let d: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    let dbar = d.iter().sum::<f64>() / (n - 1.0);
    let space = d.iter().map(|x| (x - dbar).powi(2)).sum::<f64>() / (n - 1.0);
    1e4 * fit + 1e2 * space
}

pub fn oracle_avoid(trace: &PushTrace, init: P, target: P, wall: P) -> f64 {
    let last = trace.poses.len() - 1;
    let bx = (trace.poses[last][0][0], trace.poses[last][0][1]);
    let pos = (4.0 * (bx.0 - target.0)).powi(2) + (4.0 * (bx.1 - target.1)).powi(2);
    let c_wall = -len((wall.0 - bx.0, wall.1 - bx.1)).ln();
    let c_init = -len((bx.0 - init.0, bx.1 - init.1)).max(0.001).ln();
    let n = trace.pusher.len() as f64;
    let mut endeff = 0.0;
    let mut endeff_wall = 0.0;
    for (t, g) in trace.pusher.iter().enumerate() {
        let b = trace.poses[t][0];
        endeff += ((4.0 * (b[0] - g[0])).powi(2) + (4.0 * (b[1] - g[1])).powi(2)) / n;
        endeff_wall -= len((wall.0 - g[0], wall.1 - g[1])) / n;
    }
    2.0 * pos + 0.01 * c_wall + 0.01 * c_init + 0.7 * endeff + 0.2 * endeff_wall
}

pub fn polygon_points(n: usize, r: f64, c: [f64; 2], phase: f64) -> Vec<[f64; 2]> {
    (0..n)
        .map(|k| {
            let a = phase + 2.0 * PI * k as f64 / n as f64;
            [c[0] + r * a.cos(), c[1] + r * a.sin()]
        })
        .collect()
}

pub fn chain(points: &[[f64; 2]]) -> Vec<Stroke> {
    (0..points.len()).map(|i| Stroke::between(points[i], points[(i + 1) % points.len()])).collect()
}

pub fn jitter(rng: &mut ChaCha8Rng, strokes: &[Stroke], amount: f64) -> Vec<Stroke> {
    strokes
        .iter()
        .map(|k| {
            let mut d = || rng.random_range(-amount..amount);
            Stroke::new([k.start[0] + d(), k.start[1] + d()], [k.dir[0] + d(), k.dir[1] + d()])
        })
        .collect()
}

pub fn random_strokes(rng: &mut ChaCha8Rng, n: usize) -> Vec<Stroke> {
    (0..n)
        .map(|_| {
            Stroke::new(
                [rng.random_range(0.0..640.0), rng.random_range(0.0..480.0)],
                [rng.random_range(-200.0..200.0), rng.random_range(-200.0..200.0)],
            )
        })
        .collect()
}

pub fn star_points(ro: f64, ri: f64, c: [f64; 2]) -> Vec<[f64; 2]> {
    (0..10)
        .map(|k| {
            let r = if k % 2 == 0 { ro } else { ri };
            let a = PI / 2.0 + PI * k as f64 / 5.0;
            [c[0] + r * a.cos(), c[1] + r * a.sin()]
        })
        .collect()
}

pub fn hash_strokes(c: [f64; 2], l: f64) -> Vec<Stroke> {
    let g = l / 6.0;
    vec![
        Stroke::between([c[0] - l / 2.0, c[1] - g], [c[0] + l / 2.0, c[1] - g]),
        Stroke::between([c[0] - l / 2.0, c[1] + g], [c[0] + l / 2.0, c[1] + g]),
        Stroke::between([c[0] - g, c[1] - l / 2.0], [c[0] - g, c[1] + l / 2.0]),
        Stroke::between([c[0] + g, c[1] - l / 2.0], [c[0] + g, c[1] + l / 2.0]),
    ]
}

pub fn ideal_shapes_cost_nothing() {
    let cfg = DrawCostConfig::default();
    let pentagon = chain(&polygon_points(5, 60.0, [320.0, 280.0], PI / 2.0));
    assert!(cost_pentagon(&pentagon, &cfg) < 1e-9, "{}", cost_pentagon(&pentagon, &cfg));
    let star = chain(&star_points(80.0, 40.0, [320.0, 240.0]));
    let b = star_breakdown(&star, &cfg);
    assert!((b.rho - 2.0).abs() < 1e-12);
    assert!(star.iter().map(Stroke::length).sum::<f64>() / 10.0 >= 35.0);
    assert!(b.total() < 1e-9, "{b:?}");
    let hexagon = polygon_points(6, 0.2, [0.05, -0.02], 0.3);
    assert!(cost_circle(&hexagon) < 1e-12, "{}", cost_circle(&hexagon));
    let row: Vec<[f64; 2]> = (0..4).map(|i| [-0.3 + 0.2 * i as f64, 0.1 + 0.05 * i as f64]).collect();
    assert!(cost_line(&row) < 1e-12, "{}", cost_line(&row));
}

pub fn pentagon_matches_oracle() {
    let cfg = DrawCostConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for k in 0..1000 {
        let s = if k % 2 == 0 {
            let base = chain(&polygon_points(5, rng.random_range(10.0..150.0), [320.0, 240.0], rng.random_range(0.0..PI)));
            jitter(&mut rng, &base, 8.0)
        } else {
            random_strokes(&mut rng, 5)
        };
        let (a, b) = (cost_pentagon(&s, &cfg), oracle_pentagon(&s, cfg.pentagon_min_length));
        assert!(close(a, b), "case {k}: {a} vs {b}");
    }
}

pub fn star_matches_oracle() {
    let cfg = DrawCostConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in 0..1000 {
        let s = if k % 2 == 0 {
            let ro = rng.random_range(20.0..150.0);
            let base = chain(&star_points(ro, ro * rng.random_range(0.3..0.9), [320.0, 240.0]));
            jitter(&mut rng, &base, 6.0)
        } else {
            random_strokes(&mut rng, 10)
        };
        let (a, b) = (cost_star(&s, &cfg), oracle_star(&s));
        assert!(close(a, b), "case {k}: {a} vs {b}");
    }
}

pub fn hash_matches_oracle() {
    let cfg = DrawCostConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in 0..1000 {
        let s = if k % 2 == 0 {
            let base = hash_strokes([320.0, 240.0], rng.random_range(40.0..250.0));
            jitter(&mut rng, &base, 10.0)
        } else {
            random_strokes(&mut rng, 4)
        };
        let (a, b) = (cost_hash(&s, &cfg), oracle_hash(&s, &cfg));
        assert!(close(a, b), "case {k}: {a} vs {b}\n{:?}", hash_breakdown(&s, &cfg));
    }
}

pub fn circle_and_line_match_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for k in 0..1000 {
        let n = rng.random_range(3..8);
        let pts: Vec<[f64; 2]> =
            (0..n).map(|_| [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)]).collect();
        let (a, b) = (cost_circle(&pts), oracle_circle(&pts));
        assert!(close(a, b), "circle case {k}: {a} vs {b}");
        let (a, b) = (cost_line(&pts), oracle_line(&pts));
        assert!(close(a, b), "line case {k}: {a} vs {b}");
    }
}

pub fn avoid_matches_oracle() {
    let init = (-0.25, 0.0);
    let target = (0.25, 0.0);
    let wall = (0.0, 0.0);
    let scene = SceneState::new(vec![
        Frame::new("big_red_block", init.0, init.1, 0.7).with_size(&[0.1, 0.2, 0.1]),
        Frame::new("target_pose", target.0, target.1, 0.7).with_size(&[0.1, 0.2, 0.1]),
        Frame::new("wall_0", wall.0, wall.1, 0.7).with_size(&[0.04, 0.3, 0.1]),
    ])
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in 0..1000 {
        let steps = rng.random_range(1..30);
        let mut r = || [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
        let trace = PushTrace {
            pusher: (0..steps).map(|_| r()).collect(),
            block_names: vec!["big_red_block".into()],
            poses: (0..steps).map(|_| vec![r()]).collect(),
            contact: vec![false; steps],
            final_scene: scene.clone(),
        };
        let a = cost_push_avoid(&trace, &scene).unwrap();
        let b = oracle_avoid(&trace, init, target, wall);
        assert!(close(a, b), "case {k}: {a} vs {b}");
    }
}

pub fn size_penalty_is_exactly_700_below_threshold() {
    let cfg = DrawCostConfig::default();
    let side = |r: f64| 2.0 * r * (PI / 5.0).sin();
    for r in [20.0, 40.0, 42.0, 42.6, 42.7, 43.0, 60.0, 100.0] {
        let s = chain(&polygon_points(5, r, [320.0, 240.0], PI / 2.0));
        let b = pentagon_breakdown(&s, &cfg);
        let below = side(r) < cfg.pentagon_min_length;
        assert_eq!(b.size, if below { 700.0 } else { 0.0 }, "r={r}");
        let rest = b.total() - b.size;
        assert!(rest.abs() < 1e-9);
    }
    for ro in [10.0, 30.0, 33.0, 50.0] {
        let s = chain(&star_points(ro, ro / 2.0, [320.0, 240.0]));
        let mean = s.iter().map(Stroke::length).sum::<f64>() / 10.0;
        assert_eq!(star_breakdown(&s, &cfg).size, if mean < 35.0 { 700.0 } else { 0.0 }, "ro={ro}");
    }
    for l in [30.0, 74.9, 75.1, 200.0] {
        let b = hash_breakdown(&hash_strokes([320.0, 240.0], l), &cfg);
        assert_eq!(b.size, if l < 75.0 { 700.0 } else { 0.0 }, "l={l}");
    }
}
