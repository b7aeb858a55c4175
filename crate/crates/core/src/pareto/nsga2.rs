//! Controlled-elitist NSGA-II with deterministic per-individual random streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dominance::{crowded_cmp, crowding_distance, non_dominated_sort, ObjectiveVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    pub crossover_eta: f64,
    /// Per-gene mutation probability.
    pub mutation_prob: f64,
    pub mutation_eta: f64,
    /// Largest share of the next population drawn from the best rank.
    pub elite_fraction: f64,
    pub seed: u64,
    /// Upper limit on objective evaluations, if any.
    pub max_evaluations: Option<usize>,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population: 200,
            generations: 400,
            crossover_prob: 0.9,
            crossover_eta: 15.0,
            mutation_prob: 0.2,
            mutation_eta: 20.0,
            elite_fraction: 0.35,
            seed: 0,
            max_evaluations: None,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field, value: f64, reason| Err(Error::Validation { field, value, reason });
        if self.population < 8 || !self.population.is_multiple_of(2) {
            return bad("population", self.population as f64, "must be even and at least 8");
        }
        for (field, p) in [("crossover_prob", self.crossover_prob), ("mutation_prob", self.mutation_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(field, p, "must lie in [0, 1]");
            }
        }
        if !(self.elite_fraction > 0.0 && self.elite_fraction <= 1.0) {
            return bad("elite_fraction", self.elite_fraction, "must lie in (0, 1]");
        }
        for (field, eta) in [("crossover_eta", self.crossover_eta), ("mutation_eta", self.mutation_eta)] {
            if !(eta.is_finite() && eta >= 0.0) {
                return bad(field, eta, "must be finite and non-negative");
            }
        }
        Ok(())
    }

    pub fn evaluations(&self) -> usize {
        self.population.saturating_mul(self.generations.saturating_add(1))
    }
}

/// A box-constrained multi-objective problem.
pub trait Problem: Sync {
    /// Extra per-evaluation data carried into the front.
    type Raw: Clone + Send;

    fn bounds(&self) -> Vec<(f64, f64)>;

    fn evaluate(&self, x: &[f64]) -> (ObjectiveVector, Self::Raw);

    /// Hypervolume reference point in minimized coordinates.
    fn reference(&self) -> Vec<f64>;
}

#[derive(Debug, Clone, Serialize)]
pub struct Individual<R> {
    pub x: Vec<f64>,
    pub objectives: ObjectiveVector,
    pub raw: R,
}

#[derive(Debug, Clone, Serialize)]
pub struct GaOutcome<R> {
    /// Distinct rank-0 members of the final population, ordered by objective vector.
    pub front: Vec<Individual<R>>,
    pub hypervolume: f64,
    pub reference: Vec<f64>,
    pub seed: u64,
    pub generations: usize,
    pub population: usize,
    pub evaluations: usize,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn stream(seed: u64, generation: u64, slot: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix(splitmix(splitmix(seed) ^ generation) ^ slot))
}

fn sbx(p1: &[f64], p2: &[f64], bounds: &[(f64, f64)], eta: f64, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let mut c1 = p1.to_vec();
    let mut c2 = p2.to_vec();
    for (i, &(lo, hi)) in bounds.iter().enumerate() {
        let u_apply: f64 = rng.random();
        let u: f64 = rng.random();
        let u_swap: f64 = rng.random();
        if u_apply > 0.5 || (p1[i] - p2[i]).abs() <= 1e-14 || hi <= lo {
            continue;
        }
        let (y1, y2) = if p1[i] < p2[i] { (p1[i], p2[i]) } else { (p2[i], p1[i]) };
        let spread = |beta: f64| {
            let alpha = 2.0 - beta.powf(-(eta + 1.0));
            if u <= 1.0 / alpha {
                (u * alpha).powf(1.0 / (eta + 1.0))
            } else {
                (1.0 / (2.0 - u * alpha)).powf(1.0 / (eta + 1.0))
            }
        };
        let bq1 = spread(1.0 + 2.0 * (y1 - lo) / (y2 - y1));
        let bq2 = spread(1.0 + 2.0 * (hi - y2) / (y2 - y1));
        let a = (0.5 * ((y1 + y2) - bq1 * (y2 - y1))).clamp(lo, hi);
        let b = (0.5 * ((y1 + y2) + bq2 * (y2 - y1))).clamp(lo, hi);
        if u_swap < 0.5 {
            c1[i] = b;
            c2[i] = a;
        } else {
            c1[i] = a;
            c2[i] = b;
        }
    }
    (c1, c2)
}

fn polynomial_mutation(x: &mut [f64], bounds: &[(f64, f64)], prob: f64, eta: f64, rng: &mut ChaCha8Rng) {
    let pow = 1.0 / (eta + 1.0);
    for (y, &(lo, hi)) in x.iter_mut().zip(bounds) {
        let u_apply: f64 = rng.random();
        let u: f64 = rng.random();
        if u_apply >= prob || hi <= lo {
            continue;
        }
        let span = hi - lo;
        let dq = if u < 0.5 {
            let xy = 1.0 - (*y - lo) / span;
            (2.0 * u + (1.0 - 2.0 * u) * xy.powf(eta + 1.0)).powf(pow) - 1.0
        } else {
            let xy = 1.0 - (hi - *y) / span;
            1.0 - (2.0 * (1.0 - u) + 2.0 * (u - 0.5) * xy.powf(eta + 1.0)).powf(pow)
        };
        *y = (*y + dq * span).clamp(lo, hi);
    }
}

struct Ranked {
    rank: Vec<usize>,
    crowding: Vec<f64>,
    fronts: Vec<Vec<usize>>,
}

fn rank<R>(pop: &[Individual<R>]) -> Result<Ranked> {
    let objectives: Vec<ObjectiveVector> = pop.iter().map(|m| m.objectives.clone()).collect();
    let fronts = non_dominated_sort(&objectives)?;
    let mut rank = vec![0; pop.len()];
    let mut crowding = vec![0.0; pop.len()];
    for (r, front) in fronts.iter().enumerate() {
        let members: Vec<&ObjectiveVector> = front.iter().map(|&i| &objectives[i]).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&members)) {
            rank[i] = r;
            crowding[i] = d;
        }
    }
    Ok(Ranked { rank, crowding, fronts })
}

/// Front members ordered by decreasing crowding distance, ties by index.
fn by_crowding(front: &[usize], crowding: &[f64]) -> Vec<usize> {
    let mut v = front.to_vec();
    v.sort_by(|&a, &b| crowding[b].total_cmp(&crowding[a]).then(a.cmp(&b)));
    v
}

/// Picks `n` survivors, taking at most `elite` from the best rank while higher
/// ranks can fill the remaining slots. The last generation is selected with no cap
/// so the returned front uses the whole population.
fn controlled_elitism(ranked: &Ranked, n: usize, elite: usize) -> Vec<usize> {
    let mut chosen = Vec::with_capacity(n);
    let best = by_crowding(&ranked.fronts[0], &ranked.crowding);
    let take = best.len().min(elite).min(n);
    chosen.extend_from_slice(&best[..take]);
    for front in &ranked.fronts[1..] {
        let room = n - chosen.len();
        if room == 0 {
            break;
        }
        if front.len() <= room {
            chosen.extend_from_slice(front);
        } else {
            chosen.extend_from_slice(&by_crowding(front, &ranked.crowding)[..room]);
        }
    }
    let room = n - chosen.len();
    chosen.extend_from_slice(&best[take..take + room.min(best.len() - take)]);
    chosen.sort_unstable();
    chosen
}

fn evaluate_all<P: Problem>(problem: &P, xs: Vec<Vec<f64>>) -> Vec<Individual<P::Raw>> {
    xs.into_par_iter()
        .map(|x| {
            let (objectives, raw) = problem.evaluate(&x);
            Individual { x, objectives, raw }
        })
        .collect()
}

pub fn nsga2_run<P: Problem>(problem: &P, config: &GaConfig) -> Result<GaOutcome<P::Raw>> {
    config.validate()?;
    if let Some(cap) = config.max_evaluations {
        if config.evaluations() > cap {
            return Err(Error::Budget { cap });
        }
    }
    let bounds = problem.bounds();
    for &(lo, hi) in &bounds {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::Validation {
                field: "bounds",
                value: lo,
                reason: "bounds must be finite with lower <= upper",
            });
        }
    }
    let n = config.population;
    let elite = ((config.elite_fraction * n as f64).ceil() as usize).max(1);
    let seed = config.seed;

    let initial: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut rng = stream(seed, 0, i as u64);
            bounds.iter().map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>()).collect()
        })
        .collect();
    let mut pop = evaluate_all(problem, initial);
    let mut ranked = rank(&pop)?;

    for generation in 1..=config.generations as u64 {
        let mut select = stream(seed, generation, u64::MAX);
        let mut tournament = || {
            let a = select.random_range(0..n);
            let b = select.random_range(0..n);
            match crowded_cmp(ranked.rank[a], ranked.crowding[a], ranked.rank[b], ranked.crowding[b]) {
                std::cmp::Ordering::Greater => b,
                _ => a,
            }
        };
        let parents: Vec<(usize, usize)> = (0..n / 2).map(|_| (tournament(), tournament())).collect();
        let children: Vec<Vec<f64>> = parents
            .iter()
            .enumerate()
            .flat_map(|(k, &(a, b))| {
                let mut rng = stream(seed, generation, k as u64);
                let (mut c1, mut c2) = if rng.random::<f64>() < config.crossover_prob {
                    sbx(&pop[a].x, &pop[b].x, &bounds, config.crossover_eta, &mut rng)
                } else {
                    (pop[a].x.clone(), pop[b].x.clone())
                };
                polynomial_mutation(&mut c1, &bounds, config.mutation_prob, config.mutation_eta, &mut rng);
                polynomial_mutation(&mut c2, &bounds, config.mutation_prob, config.mutation_eta, &mut rng);
                [c1, c2]
            })
            .collect();
        pop.extend(evaluate_all(problem, children));
        let combined = rank(&pop)?;
        let cap = if generation == config.generations as u64 { n } else { elite };
        let keep = controlled_elitism(&combined, n, cap);
        let mut slots: Vec<Option<Individual<P::Raw>>> = pop.into_iter().map(Some).collect();
        pop = keep.into_iter().map(|i| slots[i].take().expect("survivor chosen once")).collect();
        ranked = rank(&pop)?;
    }

    let mut front: Vec<Individual<P::Raw>> = Vec::new();
    let mut best: Vec<Individual<P::Raw>> = ranked.fronts[0].iter().map(|&i| pop[i].clone()).collect();
    best.sort_by(|a, b| lex(&a.objectives.values, &b.objectives.values));
    for m in best {
        if front.last().is_none_or(|l| l.objectives.values != m.objectives.values) {
            front.push(m);
        }
    }
    let reference = problem.reference();
    let feasible: Vec<&ObjectiveVector> = front.iter().map(|m| &m.objectives).filter(|o| o.is_feasible()).collect();
    let hypervolume = hypervolume(&feasible, &reference)?;
    Ok(GaOutcome {
        front,
        hypervolume,
        reference,
        seed,
        generations: config.generations,
        population: n,
        evaluations: config.evaluations(),
    })
}

fn lex(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
}

/// Area dominated by two-objective points and bounded by `reference` (minimization).
pub fn hypervolume(points: &[&ObjectiveVector], reference: &[f64]) -> Result<f64> {
    if reference.len() != 2 {
        return Err(Error::Domain {
            what: "hypervolume",
            reason: format!("only two objectives are supported, got {}", reference.len()),
        });
    }
    let mut pts: Vec<[f64; 2]> = Vec::with_capacity(points.len());
    for p in points {
        if p.values.len() != 2 {
            return Err(Error::LengthMismatch { left: p.values.len(), right: 2 });
        }
        if p.values[0] < reference[0] && p.values[1] < reference[1] {
            pts.push([p.values[0], p.values[1]]);
        }
    }
    pts.sort_by(|a, b| lex(a, b));
    let mut stairs: Vec<[f64; 2]> = Vec::with_capacity(pts.len());
    for p in pts {
        if stairs.last().is_none_or(|s| p[1] < s[1]) {
            stairs.push(p);
        }
    }
    let area = stairs
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let next_x = stairs.get(i + 1).map_or(reference[0], |q| q[0]);
            (next_x - p[0]) * (reference[1] - p[1])
        })
        .sum();
    Ok(area)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    /// `f1 = x²`, `f2 = (x − 2)²` on `[−5, 5]`.
    pub(crate) struct Parabolas;

    impl Problem for Parabolas {
        type Raw = ();

        fn bounds(&self) -> Vec<(f64, f64)> {
            vec![(-5.0, 5.0)]
        }

        fn evaluate(&self, x: &[f64]) -> (ObjectiveVector, ()) {
            let v = vec![x[0] * x[0], (x[0] - 2.0).powi(2)];
            (ObjectiveVector::feasible(v).unwrap(), ())
        }

        fn reference(&self) -> Vec<f64> {
            vec![5.0, 5.0]
        }
    }

    struct Pinned;

    impl Problem for Pinned {
        type Raw = ();

        fn bounds(&self) -> Vec<(f64, f64)> {
            vec![(1.0, 1.0), (2.0, 2.0)]
        }

        fn evaluate(&self, x: &[f64]) -> (ObjectiveVector, ()) {
            (ObjectiveVector::feasible(vec![x[0], x[1]]).unwrap(), ())
        }

        fn reference(&self) -> Vec<f64> {
            vec![3.0, 3.0]
        }
    }

    fn small(seed: u64) -> GaConfig {
        GaConfig { population: 40, generations: 60, seed, ..GaConfig::default() }
    }

    #[test]
    fn parabolas_front() {
        let out = nsga2_run(&Parabolas, &GaConfig { seed: 3, ..GaConfig::default() }).unwrap();
        let exact = 67.0 / 3.0;
        assert!((out.hypervolume - exact).abs() < 0.01 * exact, "{}", out.hypervolume);
        for m in &out.front {
            let (f1, f2) = (m.objectives.values[0], m.objectives.values[1]);
            assert!((f2 - (f1.sqrt() - 2.0).powi(2)).abs() < 1e-5);
            assert!((-1e-4..=2.0 + 1e-4).contains(&m.x[0]), "{:?}", m.x);
        }
        for w in out.front.windows(2) {
            assert!(w[0].objectives.values[0] < w[1].objectives.values[0]);
        }
    }

    #[test]
    fn deterministic_across_runs_and_pools() {
        let a = nsga2_run(&Parabolas, &small(11)).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| nsga2_run(&Parabolas, &small(11)).unwrap());
        let key = |o: &GaOutcome<()>| o.front.iter().map(|m| m.x[0].to_bits()).collect::<Vec<_>>();
        assert_eq!(key(&a), key(&b));
        assert_eq!(a.hypervolume.to_bits(), b.hypervolume.to_bits());
        let c = nsga2_run(&Parabolas, &small(12)).unwrap();
        assert_ne!(key(&a), key(&c));
    }

    #[test]
    fn identical_population() {
        let out = nsga2_run(&Pinned, &small(0)).unwrap();
        assert_eq!(out.front.len(), 1);
        assert_eq!(out.front[0].x, vec![1.0, 2.0]);
        assert_eq!(out.hypervolume, 2.0);
    }

    #[test]
    fn config_checks() {
        let cfg = GaConfig { max_evaluations: Some(1000), ..small(0) };
        assert!(matches!(nsga2_run(&Parabolas, &cfg), Err(Error::Budget { cap: 1000 })));
        for cfg in [
            GaConfig { population: 7, ..small(0) },
            GaConfig { population: 6, ..small(0) },
            GaConfig { crossover_prob: 1.5, ..small(0) },
            GaConfig { mutation_prob: -0.1, ..small(0) },
            GaConfig { elite_fraction: 0.0, ..small(0) },
        ] {
            assert!(matches!(cfg.validate(), Err(Error::Validation { .. })), "{cfg:?}");
        }
        assert!(GaConfig::default().validate().is_ok());
        assert_eq!(GaConfig::default().evaluations(), 80_200);
    }

    #[test]
    fn hypervolume_staircase() {
        let pts = [
            ObjectiveVector::feasible(vec![1.0, 3.0]).unwrap(),
            ObjectiveVector::feasible(vec![2.0, 2.0]).unwrap(),
            ObjectiveVector::feasible(vec![3.0, 2.5]).unwrap(),
            ObjectiveVector::feasible(vec![3.0, 1.0]).unwrap(),
            ObjectiveVector::feasible(vec![5.0, 0.0]).unwrap(),
        ];
        let refs: Vec<_> = pts.iter().collect();
        // Strips: [1,2)×1 + [2,3)×2 + [3,4)×3.
        assert_eq!(hypervolume(&refs, &[4.0, 4.0]).unwrap(), 6.0);
        assert_eq!(hypervolume(&[], &[4.0, 4.0]).unwrap(), 0.0);
        assert!(hypervolume(&refs, &[4.0]).is_err());
    }

    #[test]
    fn elitism_caps_best_rank() {
        let pop: Vec<Individual<()>> = (0..20)
            .map(|i| {
                let t = i as f64;
                let v = if i < 12 { vec![t, 12.0 - t] } else { vec![t, 30.0 - t] };
                Individual { x: vec![], objectives: ObjectiveVector::feasible(v).unwrap(), raw: () }
            })
            .collect();
        let ranked = rank(&pop).unwrap();
        assert_eq!(ranked.fronts[0].len(), 12);
        let keep = controlled_elitism(&ranked, 10, 4);
        assert_eq!(keep.iter().filter(|&&i| i < 12).count(), 4);
        let keep = controlled_elitism(&ranked, 16, 4);
        assert_eq!(keep.len(), 16);
        assert_eq!(keep.iter().filter(|&&i| i < 12).count(), 8);
    }

    proptest! {
        #[test]
        fn variation_stays_in_bounds(seed in any::<u64>(), a in -5.0f64..5.0, b in -5.0f64..5.0) {
            let bounds = vec![(-5.0, 5.0), (0.0, 1e-3)];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (mut c1, mut c2) = sbx(&[a, 0.0], &[b, 1e-3], &bounds, 15.0, &mut rng);
            polynomial_mutation(&mut c1, &bounds, 1.0, 20.0, &mut rng);
            polynomial_mutation(&mut c2, &bounds, 1.0, 20.0, &mut rng);
            for c in [c1, c2] {
                for (v, (lo, hi)) in c.iter().zip(&bounds) {
                    prop_assert!(v.is_finite() && lo <= v && v <= hi);
                }
            }
        }
    }
}
