//! Constraint-domination, non-dominated sorting and crowding distance.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Objectives to be minimized, with a constraint violation (zero when feasible).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    pub values: Vec<f64>,
    pub violation: f64,
}

impl ObjectiveVector {
    pub fn new(values: Vec<f64>, violation: f64) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Validation { field: "objective", value: *v, reason: "objectives must be finite" });
        }
        if !(violation.is_finite() && violation >= 0.0) {
            return Err(Error::Validation {
                field: "violation",
                value: violation,
                reason: "violation must be finite and non-negative",
            });
        }
        Ok(ObjectiveVector { values, violation })
    }

    pub fn feasible(values: Vec<f64>) -> Result<Self> {
        Self::new(values, 0.0)
    }

    pub fn is_feasible(&self) -> bool {
        self.violation == 0.0
    }
}

/// Constraint-domination: feasible beats infeasible, smaller violation beats larger,
/// and between feasible points the usual Pareto order applies.
pub fn dominates(y: &ObjectiveVector, y2: &ObjectiveVector) -> Result<bool> {
    if y.values.len() != y2.values.len() {
        return Err(Error::LengthMismatch { left: y.values.len(), right: y2.values.len() });
    }
    Ok(dominates_unchecked(y, y2))
}

pub(crate) fn dominates_unchecked(y: &ObjectiveVector, y2: &ObjectiveVector) -> bool {
    match (y.is_feasible(), y2.is_feasible()) {
        (true, false) => true,
        (false, true) => false,
        (false, false) => y.violation < y2.violation,
        (true, true) => {
            let mut strict = false;
            for (a, b) in y.values.iter().zip(&y2.values) {
                if a > b {
                    return false;
                }
                strict |= a < b;
            }
            strict
        }
    }
}

/// Partitions `points` into fronts of increasing rank. Indices inside a front are ascending.
pub fn non_dominated_sort(points: &[ObjectiveVector]) -> Result<Vec<Vec<usize>>> {
    if let Some(first) = points.first() {
        if let Some(bad) = points.iter().find(|p| p.values.len() != first.values.len()) {
            return Err(Error::LengthMismatch { left: first.values.len(), right: bad.values.len() });
        }
    }
    let n = points.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominating: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if dominates_unchecked(&points[i], &points[j]) {
                dominating[i].push(j);
                dominated_by[j] += 1;
            } else if dominates_unchecked(&points[j], &points[i]) {
                dominating[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominating[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    Ok(fronts)
}

/// Crowding distance of each member of one front. Boundary points get `+∞`;
/// objectives with zero spread contribute nothing. A member whose objectives repeat
/// those of an earlier member gets zero.
pub fn crowding_distance(front: &[&ObjectiveVector]) -> Vec<f64> {
    let n = front.len();
    let mut distance = vec![0.0; n];
    if n <= 2 {
        let mut d = vec![f64::INFINITY; n];
        if n == 2 && front[0].values == front[1].values {
            d[1] = 0.0;
        }
        return d;
    }
    let m = front[0].values.len();
    let mut order: Vec<usize> = (0..n).collect();
    for k in 0..m {
        order.sort_by(|&a, &b| front[a].values[k].total_cmp(&front[b].values[k]).then(a.cmp(&b)));
        let lo = front[order[0]].values[k];
        let hi = front[order[n - 1]].values[k];
        distance[order[0]] = f64::INFINITY;
        distance[order[n - 1]] = f64::INFINITY;
        let span = hi - lo;
        if span <= 0.0 {
            continue;
        }
        for w in 1..n - 1 {
            let gap = front[order[w + 1]].values[k] - front[order[w - 1]].values[k];
            distance[order[w]] += gap / span;
        }
    }
    order.sort_by(|&a, &b| {
        front[a]
            .values
            .iter()
            .zip(&front[b].values)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    for w in 1..n {
        if front[order[w]].values == front[order[w - 1]].values {
            distance[order[w]] = 0.0;
        }
    }
    distance
}

/// Crowded-comparison order: lower rank first, then larger crowding distance.
pub(crate) fn crowded_cmp(rank_a: usize, crowd_a: f64, rank_b: usize, crowd_b: f64) -> Ordering {
    rank_a.cmp(&rank_b).then(crowd_b.total_cmp(&crowd_a))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn ov(v: &[f64]) -> ObjectiveVector {
        ObjectiveVector::feasible(v.to_vec()).unwrap()
    }

    fn infeasible(v: &[f64], violation: f64) -> ObjectiveVector {
        ObjectiveVector::new(v.to_vec(), violation).unwrap()
    }

    #[test]
    fn pairwise() {
        assert!(dominates(&ov(&[1.0, 1.0]), &ov(&[2.0, 2.0])).unwrap());
        assert!(!dominates(&ov(&[1.0, 2.0]), &ov(&[2.0, 1.0])).unwrap());
        assert!(!dominates(&ov(&[2.0, 1.0]), &ov(&[1.0, 2.0])).unwrap());
        assert!(!dominates(&ov(&[1.0, 1.0]), &ov(&[1.0, 1.0])).unwrap());
        assert!(dominates(&ov(&[1.0, 1.0]), &ov(&[1.0, 2.0])).unwrap());
        assert!(matches!(dominates(&ov(&[1.0]), &ov(&[1.0, 2.0])), Err(Error::LengthMismatch { left: 1, right: 2 })));
    }

    #[test]
    fn constraint_domination_truth_table() {
        let feasible = ov(&[5.0, 5.0]);
        let mild = infeasible(&[0.0, 0.0], 0.5);
        let severe = infeasible(&[-1.0, -1.0], 2.0);
        let all = [&feasible, &mild, &severe];
        let expected = [[false, true, true], [false, false, true], [false, false, false]];
        for (i, a) in all.iter().enumerate() {
            for (j, b) in all.iter().enumerate() {
                assert_eq!(dominates(a, b).unwrap(), expected[i][j], "{i} vs {j}");
            }
        }
    }

    #[test]
    fn rejects_non_finite() {
        assert!(ObjectiveVector::feasible(vec![f64::NAN]).is_err());
        assert!(ObjectiveVector::new(vec![0.0], -1.0).is_err());
        assert!(ObjectiveVector::new(vec![0.0], f64::INFINITY).is_err());
    }

    #[test]
    fn sort_shapes() {
        let incomparable: Vec<_> = (0..6).map(|i| ov(&[i as f64, -(i as f64)])).collect();
        assert_eq!(non_dominated_sort(&incomparable).unwrap(), vec![vec![0, 1, 2, 3, 4, 5]]);
        let chain: Vec<_> = [3.0, 1.0, 4.0, 0.0, 2.0].iter().map(|&v| ov(&[v, v])).collect();
        assert_eq!(non_dominated_sort(&chain).unwrap(), vec![vec![3], vec![1], vec![4], vec![0], vec![2]]);
        assert!(non_dominated_sort(&[]).unwrap().is_empty());
        assert!(non_dominated_sort(&[ov(&[1.0]), ov(&[1.0, 2.0])]).is_err());
    }

    fn brute_force_rank0(points: &[ObjectiveVector]) -> Vec<usize> {
        (0..points.len()).filter(|&i| !points.iter().any(|q| dominates(q, &points[i]).unwrap())).collect()
    }

    #[test]
    fn rank_zero_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for size in [1, 17, 200, 500] {
            let points: Vec<_> = (0..size)
                .map(|_| {
                    let v = vec![rng.random::<f64>(), rng.random::<f64>()];
                    let violation = if rng.random::<f64>() < 0.1 { rng.random::<f64>() } else { 0.0 };
                    infeasible(&v, violation)
                })
                .collect();
            let fronts = non_dominated_sort(&points).unwrap();
            assert_eq!(fronts[0], brute_force_rank0(&points));
            assert_eq!(fronts.iter().map(Vec::len).sum::<usize>(), size);
            for pair in fronts.windows(2) {
                for &j in &pair[1] {
                    assert!(pair[0].iter().any(|&i| dominates(&points[i], &points[j]).unwrap()));
                }
            }
        }
    }

    #[test]
    fn crowding() {
        let (a, b) = (ov(&[0.0, 1.0]), ov(&[1.0, 0.0]));
        assert_eq!(crowding_distance(&[&a, &b]), vec![f64::INFINITY; 2]);
        assert_eq!(crowding_distance(&[&a]), vec![f64::INFINITY]);
        let mid = ov(&[0.5, 0.5]);
        assert_eq!(crowding_distance(&[&a, &mid, &b])[1], 2.0);
        let dup: Vec<_> = (0..4).map(|_| ov(&[1.0, 1.0])).collect();
        let d = crowding_distance(&dup.iter().collect::<Vec<_>>());
        assert_eq!(d[0], f64::INFINITY);
        assert_eq!(&d[1..], &[0.0; 3]);
        let c = ov(&[0.25, 0.75]);
        let d = crowding_distance(&[&a, &c, &mid, &mid.clone(), &b]);
        assert_eq!(d[3], 0.0);
        assert_eq!(d[2], 0.75);
        assert_eq!(crowding_distance(&[&a, &a.clone()]), vec![f64::INFINITY, 0.0]);
    }

    proptest! {
        #[test]
        fn irreflexive_and_transitive(
            p in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, 0.0f64..1.0, any::<bool>()), 3)
        ) {
            let v: Vec<_> = p.iter().map(|&(a, b, c, f)| infeasible(&[a, b], if f { 0.0 } else { c })).collect();
            for x in &v {
                prop_assert!(!dominates(x, x).unwrap());
            }
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        if dominates(&v[i], &v[j]).unwrap() && dominates(&v[j], &v[k]).unwrap() {
                            prop_assert!(dominates(&v[i], &v[k]).unwrap());
                        }
                    }
                }
            }
        }
    }
}
