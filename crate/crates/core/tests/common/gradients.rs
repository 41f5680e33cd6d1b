use mops::nlp::{
    constraints_eval, objective_value_grad, ConstraintInstance, ConstraintKind, NlpSpec, Objective, TimeSlice,
    Trajectory,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const KINDS: [ConstraintKind; 6] = [
    ConstraintKind::PointAt,
    ConstraintKind::OnPlane,
    ConstraintKind::InBox,
    ConstraintKind::MinClearance,
    ConstraintKind::StartAt,
    ConstraintKind::RestAtPhaseEnd,
];

pub fn vec_in(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

pub fn slice(rng: &mut ChaCha8Rng, steps: usize) -> TimeSlice {
    if rng.random_bool(0.5) {
        TimeSlice::At(rng.random_range(0..steps))
    } else {
        let a = rng.random_range(0..steps - 1);
        TimeSlice::Range(a, rng.random_range(a + 1..=steps))
    }
}

pub fn constraint(rng: &mut ChaCha8Rng, kind: ConstraintKind, steps: usize, n: usize) -> ConstraintInstance {
    match kind {
        ConstraintKind::PointAt => ConstraintInstance::point_at(rng.random_range(0..steps), &vec_in(rng, n, -1.0, 1.0)),
        ConstraintKind::OnPlane => {
            ConstraintInstance::on_plane(slice(rng, steps), &vec_in(rng, n, 0.2, 1.0), rng.random_range(-1.0..1.0))
        }
        ConstraintKind::InBox => {
            let lo = vec_in(rng, n, -1.0, -0.1);
            ConstraintInstance::in_box(slice(rng, steps), &lo, &vec_in(rng, n, 0.1, 1.0))
        }
        // centers are kept away from the trajectory so the distance is smooth
        ConstraintKind::MinClearance => {
            ConstraintInstance::min_clearance(slice(rng, steps), &vec_in(rng, n, 3.0, 4.0), rng.random_range(0.1..1.0))
        }
        ConstraintKind::StartAt => ConstraintInstance::start_at(&vec_in(rng, n, -1.0, 1.0)),
        ConstraintKind::RestAtPhaseEnd => ConstraintInstance::rest_at_phase_end(rng.random_range(1..steps)),
    }
}

/// A random program that uses every constraint kind at least once.
pub fn random_instance(rng: &mut ChaCha8Rng) -> (NlpSpec, Trajectory) {
    let steps = rng.random_range(3..=20);
    let n = rng.random_range(1..=3);
    let dt = rng.random_range(0.05..0.5);
    let mut cons: Vec<ConstraintInstance> = KINDS.iter().map(|&k| constraint(rng, k, steps, n)).collect();
    for _ in 0..rng.random_range(0..6) {
        let k = KINDS[rng.random_range(0..KINDS.len())];
        cons.push(constraint(rng, k, steps, n));
    }
    let cut = rng.random_range(1..steps);
    let phases = if rng.random_bool(0.5) { vec![(0, steps)] } else { vec![(0, cut), (cut, steps)] };
    let objective = Objective { acc_weight: rng.random_range(0.1..2.0), state_weight: rng.random_range(0.0..1.0) };
    let nlp = NlpSpec::new(steps, n, dt, phases, cons, objective).unwrap();
    let phases = nlp.phase_bounds.clone();
    let x = Trajectory::new(steps, n, vec_in(rng, steps * n, -1.5, 1.5), phases, dt).unwrap();
    (nlp, x)
}

pub fn rel(fd: f64, an: f64) -> f64 {
    (fd - an).abs() / an.abs().max(1.0)
}

/// Worst relative error of the objective gradient and both Jacobians against
/// central differences.
pub fn worst_error(nlp: &NlpSpec, x: &Trajectory) -> f64 {
    let obj = objective_value_grad(nlp, x).unwrap();
    let con = constraints_eval(nlp, x).unwrap();
    let nv = nlp.num_vars();
    let (jh, jg) = (con.dense_jh(nv), con.dense_jg(nv));
    let z = x.as_slice().to_vec();
    // the objective reaches ~1e5 for small dt; a larger step keeps cancellation below 1e-7
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for j in 0..nv {
        let (mut zp, mut zm) = (z.clone(), z.clone());
        zp[j] += h;
        zm[j] -= h;
        let (xp, xm) = (x.with_data(zp).unwrap(), x.with_data(zm).unwrap());
        let fd = (objective_value_grad(nlp, &xp).unwrap().value - objective_value_grad(nlp, &xm).unwrap().value) / (2.0 * h);
        worst = worst.max(rel(fd, obj.grad[j]));
        let (cp, cm) = (constraints_eval(nlp, &xp).unwrap(), constraints_eval(nlp, &xm).unwrap());
        for r in 0..cp.h.len() {
            worst = worst.max(rel((cp.h[r] - cm.h[r]) / (2.0 * h), jh[(r, j)]));
        }
        for r in 0..cp.g.len() {
            worst = worst.max(rel((cp.g[r] - cm.g[r]) / (2.0 * h), jg[(r, j)]));
        }
    }
    worst
}


/// Worst error over `count` random instances, each using every constraint kind.
pub fn random_instances_worst_error(seed: u64, count: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let (nlp, x) = random_instance(&mut rng);
        for k in KINDS {
            assert!(nlp.count(k) >= 1);
        }
        worst = worst.max(worst_error(&nlp, &x));
    }
    worst
}
