use crate::nlp::{ConstraintKind, NlpSpec, TimeSlice, Trajectory};

/// Piecewise-linear guess through the start anchor and every `point_at`
/// target in time order, held constant outside the first and last knot.
pub fn default_init(nlp: &NlpSpec) -> Trajectory {
    let n = nlp.dim;
    let mut knots: Vec<(usize, &[f64])> = nlp
        .constraints
        .iter()
        .filter_map(|c| match (c.kind, c.time) {
            (ConstraintKind::StartAt, _) => Some((0, &c.params[..n])),
            (ConstraintKind::PointAt, TimeSlice::At(t)) => Some((t, &c.params[..n])),
            _ => None,
        })
        .collect();
    // stable: a start anchor listed first wins over a later target at t = 0
    knots.sort_by_key(|k| k.0);
    knots.dedup_by_key(|k| k.0);
    if knots.is_empty() {
        return Trajectory::constant(nlp, &vec![0.0; n]);
    }
    let mut data = Vec::with_capacity(nlp.steps * n);
    let mut seg = 0;
    for t in 0..nlp.steps {
        while seg + 1 < knots.len() && knots[seg + 1].0 <= t {
            seg += 1;
        }
        let (ta, a) = knots[seg];
        let row: Vec<f64> = match knots.get(seg + 1) {
            Some(&(tb, b)) if t > ta => {
                let w = (t - ta) as f64 / (tb - ta) as f64;
                (0..n).map(|d| a[d] + w * (b[d] - a[d])).collect()
            }
            _ if t < ta => knots[0].1.to_vec(),
            _ => a.to_vec(),
        };
        data.extend(row);
    }
    Trajectory::constant(nlp, &vec![0.0; n]).with_data_unchecked(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlp::ConstraintInstance;

    #[test]
    fn single_phase_ramp() {
        let nlp = NlpSpec::single_phase(
            5,
            3,
            0.1,
            vec![
                ConstraintInstance::start_at(&[0.0; 3]),
                ConstraintInstance::point_at(4, &[1.0, 0.0, 0.0]),
            ],
        )
        .unwrap();
        let x = default_init(&nlp);
        for (t, row) in x.rows().enumerate() {
            assert_eq!(row, &[t as f64 / 4.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn start_only_is_constant() {
        let nlp = NlpSpec::single_phase(4, 2, 0.1, vec![ConstraintInstance::start_at(&[0.3, -0.1])]).unwrap();
        assert!(default_init(&nlp).rows().all(|r| r == [0.3, -0.1]));
    }

    #[test]
    fn two_phases() {
        let nlp = NlpSpec::new(
            8,
            1,
            0.1,
            vec![(0, 4), (4, 8)],
            vec![
                ConstraintInstance::start_at(&[0.0]),
                ConstraintInstance::point_at(3, &[3.0]),
                ConstraintInstance::point_at(7, &[-1.0]),
            ],
            Default::default(),
        )
        .unwrap();
        let rows: Vec<f64> = default_init(&nlp).rows().map(|r| r[0]).collect();
        assert_eq!(rows, vec![0.0, 1.0, 2.0, 3.0, 2.0, 1.0, 0.0, -1.0]);
    }
}
