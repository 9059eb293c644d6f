//! Elitist single-trajectory heuristics: RLS and the (1+1)-EA over Lehmer
//! codes, the Poisson-move (1+1)-EA over permutations, and the (1+1)-EA over
//! bounded integer vectors.
//!
//! All runs share one contract: the initial point is evaluation 1, a run
//! stops when the target is reached or the budget is spent, and acceptance
//! is "not worse" in the objective's direction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::benchmarks::{Direction, FitnessValue, Objective};
use crate::error::{Error, Result};
use crate::lehmer::{BoundedIntVector, LabelSelection, LehmerCode, StepOperator};
use crate::perm::{apply_random_move, sample_uniform_permutation, MoveScheme, Permutation};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoppingCondition {
    pub target: Option<FitnessValue>,
    pub budget: u64,
}

impl StoppingCondition {
    pub fn new(target: Option<FitnessValue>, budget: u64) -> Result<Self> {
        if budget == 0 {
            return Err(Error::invalid("budget must be at least 1"));
        }
        Ok(StoppingCondition { target, budget })
    }

    pub fn reached(&self, direction: Direction, value: &FitnessValue) -> bool {
        self.target
            .as_ref()
            .is_some_and(|t| direction.not_worse(value, t))
    }
}

/// One improvement event: evaluation index and the new best value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub evaluation: u64,
    pub fitness: FitnessValue,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub evaluations_used: u64,
    pub best_fitness: FitnessValue,
    pub success: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<TrajectoryPoint>>,
}

impl RunRecord {
    /// Evaluations after the initial sample; 0 for a run that starts at
    /// the target.
    pub fn optimization_time(&self) -> u64 {
        self.evaluations_used - 1
    }
}

/// Per-run knobs shared by every algorithm.
#[derive(Clone, Debug)]
pub struct RunOptions<S> {
    pub seed: u64,
    pub record_trajectory: bool,
    /// When false, iterations whose offspring equals the parent are neither
    /// evaluated nor charged to the budget.
    pub count_noop_evals: bool,
    /// Start here instead of at a uniformly random point.
    pub initial: Option<S>,
}

impl<S> RunOptions<S> {
    pub fn seeded(seed: u64) -> Self {
        RunOptions {
            seed,
            record_trajectory: false,
            count_noop_evals: true,
            initial: None,
        }
    }

    pub fn with_trajectory(mut self) -> Self {
        self.record_trajectory = true;
        self
    }

    pub fn with_noop_evals(mut self, count: bool) -> Self {
        self.count_noop_evals = count;
        self
    }

    pub fn with_initial(mut self, x: S) -> Self {
        self.initial = Some(x);
        self
    }
}

/// Bookkeeping of budget, best value and improvement events.
struct Tracker<'a> {
    direction: Direction,
    stop: &'a StoppingCondition,
    evaluations: u64,
    current: FitnessValue,
    success: bool,
    trajectory: Option<Vec<TrajectoryPoint>>,
}

impl<'a> Tracker<'a> {
    fn start(direction: Direction, stop: &'a StoppingCondition, initial: FitnessValue, record: bool) -> Self {
        let trajectory = record.then(|| {
            vec![TrajectoryPoint {
                evaluation: 1,
                fitness: initial.clone(),
            }]
        });
        Tracker {
            direction,
            stop,
            evaluations: 1,
            success: stop.reached(direction, &initial),
            current: initial,
            trajectory,
        }
    }

    #[inline]
    fn done(&self) -> bool {
        self.success || self.evaluations >= self.stop.budget
    }

    /// Charges one evaluation; returns whether the offspring is accepted.
    #[inline]
    fn offer(&mut self, value: FitnessValue) -> bool {
        self.evaluations += 1;
        if !self.direction.not_worse(&value, &self.current) {
            return false;
        }
        if self.direction.better(&value, &self.current) {
            if let Some(t) = self.trajectory.as_mut() {
                t.push(TrajectoryPoint {
                    evaluation: self.evaluations,
                    fitness: value.clone(),
                });
            }
            self.success = self.stop.reached(self.direction, &value);
        }
        self.current = value;
        true
    }

    /// Accounts for an unchanged offspring.
    #[inline]
    fn noop<S: ?Sized, O: Objective<S>>(&mut self, count: bool, objective: &O, x: &S) {
        if count {
            let value = objective.evaluate(x);
            self.offer(value);
        }
    }

    fn finish(self, seed: u64) -> RunRecord {
        RunRecord {
            seed,
            evaluations_used: self.evaluations,
            best_fitness: self.current,
            success: self.success,
            trajectory: self.trajectory,
        }
    }
}

fn check_code_size(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid(format!("Lehmer-space search needs n ≥ 2, got {n}")));
    }
    Ok(())
}

fn initial_code(n: usize, initial: &Option<LehmerCode>, rng: &mut ChaCha8Rng) -> Result<LehmerCode> {
    match initial {
        Some(code) if code.n() != n => Err(Error::invalid(format!(
            "initial code has n = {}, expected {n}",
            code.n()
        ))),
        Some(code) => Ok(code.clone()),
        None => Ok(LehmerCode::sample_uniform(n, rng)),
    }
}

/// Randomized local search on `L_n`: one label per iteration, chosen by
/// `labels`, is changed by `step`.
pub fn rls_run<O: Objective<LehmerCode>>(
    objective: &O,
    n: usize,
    step: StepOperator,
    labels: LabelSelection,
    stop: &StoppingCondition,
    opts: &RunOptions<LehmerCode>,
) -> Result<RunRecord> {
    check_code_size(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x = initial_code(n, &opts.initial, &mut rng)?;
    let first = objective.evaluate(&x);
    let mut tracker = Tracker::start(objective.direction(), stop, first, opts.record_trajectory);
    while !tracker.done() {
        let label = labels.sample_label(n, &mut rng);
        let idx = n - label;
        let old = x.entries()[idx];
        let new = step.step_unchecked(label as u32, old, &mut rng);
        if new == old {
            tracker.noop(opts.count_noop_evals, objective, &x);
            continue;
        }
        x.entries_mut()[idx] = new;
        let value = objective.evaluate(&x);
        if !tracker.offer(value) {
            x.entries_mut()[idx] = old;
        }
    }
    Ok(tracker.finish(opts.seed))
}

/// Visits a random subset of `0..len`, each index independently with
/// probability `p ∈ (0, 1]`, in increasing order (geometric skipping).
#[inline]
fn for_each_bernoulli<R: Rng + ?Sized>(len: usize, p: f64, rng: &mut R, mut f: impl FnMut(usize, &mut R)) {
    if p >= 1.0 {
        for k in 0..len {
            f(k, rng);
        }
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut k = 0usize;
    loop {
        // 1 - U lies in (0, 1], so the logarithm is finite
        let u: f64 = 1.0 - rng.gen::<f64>();
        let skip = (u.ln() / log_q).floor();
        if skip >= (len - k) as f64 {
            return;
        }
        k += skip as usize;
        f(k, rng);
        k += 1;
        if k >= len {
            return;
        }
    }
}

/// (1+1)-EA on `L_n`: each label is changed by `step` independently with
/// probability `1/(n-1)`.
pub fn ea_lehmer_run<O: Objective<LehmerCode>>(
    objective: &O,
    n: usize,
    step: StepOperator,
    stop: &StoppingCondition,
    opts: &RunOptions<LehmerCode>,
) -> Result<RunRecord> {
    check_code_size(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x = initial_code(n, &opts.initial, &mut rng)?;
    let first = objective.evaluate(&x);
    let mut tracker = Tracker::start(objective.direction(), stop, first, opts.record_trajectory);
    let p = 1.0 / (n - 1) as f64;
    let mut undo: Vec<(usize, u32)> = Vec::new();
    while !tracker.done() {
        undo.clear();
        let entries = x.entries_mut();
        for_each_bernoulli(n - 1, p, &mut rng, |idx, rng| {
            let old = entries[idx];
            let new = step.step_unchecked((n - idx) as u32, old, rng);
            if new != old {
                entries[idx] = new;
                undo.push((idx, old));
            }
        });
        if undo.is_empty() {
            tracker.noop(opts.count_noop_evals, objective, &x);
            continue;
        }
        let value = objective.evaluate(&x);
        if !tracker.offer(value) {
            let entries = x.entries_mut();
            for &(idx, old) in &undo {
                entries[idx] = old;
            }
        }
    }
    Ok(tracker.finish(opts.seed))
}

/// Poisson(1) variate by sequential search over the CDF.
pub fn poisson_sample<R: Rng + ?Sized>(rng: &mut R) -> u64 {
    let u: f64 = rng.gen();
    let mut k = 0u64;
    let mut mass = (-1.0f64).exp();
    let mut cdf = mass;
    while u >= cdf {
        k += 1;
        mass /= k as f64;
        if mass == 0.0 {
            break;
        }
        cdf += mass;
    }
    k
}

/// (1+1)-EA on `S_n`: `k ~ Poi(1) + poisson_offset` random moves of `scheme`
/// per iteration.
pub fn ea_perm_run<O: Objective<Permutation>>(
    objective: &O,
    n: usize,
    scheme: MoveScheme,
    poisson_offset: u64,
    stop: &StoppingCondition,
    opts: &RunOptions<Permutation>,
) -> Result<RunRecord> {
    if n < 2 {
        return Err(Error::invalid(format!("permutation search needs n ≥ 2, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let parent = match &opts.initial {
        Some(p) if p.len() != n => {
            return Err(Error::invalid(format!(
                "initial permutation has size {}, expected {n}",
                p.len()
            )))
        }
        Some(p) => p.clone(),
        None => sample_uniform_permutation(n, &mut rng),
    };
    let mut parent = parent.into_vec();
    let mut child = parent.clone();
    let first = objective.evaluate(&Permutation::from_vec_unchecked(parent.clone()));
    let mut tracker = Tracker::start(objective.direction(), stop, first, opts.record_trajectory);
    let mut candidate = Permutation::from_vec_unchecked(child.clone());
    while !tracker.done() {
        let k = poisson_sample(&mut rng) + poisson_offset;
        child.copy_from_slice(&parent);
        for _ in 0..k {
            apply_random_move(&mut child, scheme, &mut rng);
        }
        candidate.set_values_unchecked(&child);
        if child == parent {
            tracker.noop(opts.count_noop_evals, objective, &candidate);
            continue;
        }
        let value = objective.evaluate(&candidate);
        if tracker.offer(value) {
            std::mem::swap(&mut parent, &mut child);
        }
    }
    Ok(tracker.finish(opts.seed))
}

/// (1+1)-EA on `[r]^len`: each position is resampled uniformly among the
/// other `r - 1` values independently with probability `1/len`.
pub fn ea_multivalued_run<O: Objective<BoundedIntVector>>(
    objective: &O,
    len: usize,
    bound: u32,
    stop: &StoppingCondition,
    opts: &RunOptions<BoundedIntVector>,
) -> Result<RunRecord> {
    if len == 0 || bound == 0 {
        return Err(Error::invalid("multi-valued search needs positive length and bound"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x = match &opts.initial {
        Some(v) if v.len() != len || v.bound() != bound => {
            return Err(Error::invalid("initial vector does not match length and bound"))
        }
        Some(v) => v.clone(),
        None => BoundedIntVector::sample_uniform(len, bound, &mut rng),
    };
    let first = objective.evaluate(&x);
    let mut tracker = Tracker::start(objective.direction(), stop, first, opts.record_trajectory);
    let p = 1.0 / len as f64;
    let mut undo: Vec<(usize, u32)> = Vec::new();
    while !tracker.done() {
        undo.clear();
        if bound >= 2 {
            let entries = x.entries_mut();
            for_each_bernoulli(len, p, &mut rng, |idx, rng| {
                let old = entries[idx];
                entries[idx] = StepOperator::Uniform.step_unchecked(bound, old, rng);
                undo.push((idx, old));
            });
        }
        if undo.is_empty() {
            tracker.noop(opts.count_noop_evals, objective, &x);
            continue;
        }
        let value = objective.evaluate(&x);
        if !tracker.offer(value) {
            let entries = x.entries_mut();
            for &(idx, old) in &undo {
                entries[idx] = old;
            }
        }
    }
    Ok(tracker.finish(opts.seed))
}

/// Stream seed for run `index` of an experiment seeded with `master`
/// (SplitMix64 finalizer over the pair).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(mix(master) ^ index)
}

/// Restarts `run` with fresh derived seeds, giving each restart at most
/// `restart_budget` evaluations, until the total budget of `stop` is spent or
/// the target is hit. The result aggregates all restarts and keeps the best
/// value found.
pub fn multistart<F>(
    direction: Direction,
    stop: &StoppingCondition,
    restart_budget: u64,
    seed: u64,
    mut run: F,
) -> Result<RunRecord>
where
    F: FnMut(&StoppingCondition, u64) -> Result<RunRecord>,
{
    if restart_budget == 0 {
        return Err(Error::invalid("restart budget must be at least 1"));
    }
    let mut used = 0u64;
    let mut best: Option<FitnessValue> = None;
    let mut restart = 0u64;
    while used < stop.budget {
        let sub = StoppingCondition {
            target: stop.target.clone(),
            budget: restart_budget.min(stop.budget - used),
        };
        let record = run(&sub, derive_seed(seed, restart))?;
        used += record.evaluations_used;
        restart += 1;
        if best
            .as_ref()
            .map_or(true, |b| direction.better(&record.best_fitness, b))
        {
            best = Some(record.best_fitness);
        }
        if record.success {
            break;
        }
    }
    let best_fitness = best.expect("at least one restart runs");
    Ok(RunRecord {
        seed,
        evaluations_used: used,
        success: stop.reached(direction, &best_fitness),
        best_fitness,
        trajectory: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{Inv, LLeadingZeros, LOneMax, NVal};

    fn stop(target: Option<FitnessValue>, budget: u64) -> StoppingCondition {
        StoppingCondition::new(target, budget).unwrap()
    }

    #[test]
    fn budget_must_be_positive() {
        assert!(StoppingCondition::new(None, 0).is_err());
    }

    #[test]
    fn start_at_optimum_uses_one_evaluation() {
        let s = stop(Some(FitnessValue::Scalar(0)), 100);
        let opts = RunOptions::seeded(1).with_initial(LehmerCode::zero(6));
        let r = rls_run(&LOneMax, 6, StepOperator::Uniform, LabelSelection::Uniform, &s, &opts).unwrap();
        assert!(r.success);
        assert_eq!(r.evaluations_used, 1);
        assert_eq!(r.optimization_time(), 0);
        let r = ea_lehmer_run(&LOneMax, 6, StepOperator::Unit, &s, &opts).unwrap();
        assert_eq!(r.evaluations_used, 1);
    }

    #[test]
    fn budget_is_respected() {
        let s = stop(Some(FitnessValue::Scalar(-1)), 50);
        let opts = RunOptions::seeded(3);
        let r = rls_run(&LOneMax, 8, StepOperator::Unit, LabelSelection::Proportional, &s, &opts).unwrap();
        assert!(!r.success);
        assert_eq!(r.evaluations_used, 50);
        let r = ea_perm_run(&Inv, 8, MoveScheme::Insertion, 0, &s, &RunOptions::seeded(3)).unwrap();
        assert_eq!(r.evaluations_used, 50);
    }

    #[test]
    fn n_below_two_is_rejected() {
        let s = stop(None, 10);
        assert!(rls_run(&LOneMax, 1, StepOperator::Uniform, LabelSelection::Uniform, &s, &RunOptions::seeded(0)).is_err());
        assert!(ea_perm_run(&Inv, 1, MoveScheme::Transposition, 0, &s, &RunOptions::seeded(0)).is_err());
    }

    #[test]
    fn trajectory_strictly_improves() {
        let s = stop(Some(FitnessValue::Scalar(11)), 1_000_000);
        let opts = RunOptions::seeded(17).with_trajectory();
        let r = ea_lehmer_run(&LLeadingZeros, 12, StepOperator::Uniform, &s, &opts).unwrap();
        let t = r.trajectory.unwrap();
        assert!(r.success);
        assert!(t.windows(2).all(|w| w[0].fitness < w[1].fitness && w[0].evaluation < w[1].evaluation));
        assert_eq!(t.last().unwrap().fitness, r.best_fitness);
    }

    #[test]
    fn noop_iterations_are_free_when_requested() {
        // k = 0 draws leave the parent untouched; with an unreachable target
        // every counted evaluation is a real objective call
        use std::sync::atomic::{AtomicU64, Ordering};
        struct Counting(AtomicU64);
        impl Objective<Permutation> for Counting {
            fn direction(&self) -> Direction {
                Direction::Minimize
            }
            fn evaluate(&self, x: &Permutation) -> FitnessValue {
                self.0.fetch_add(1, Ordering::Relaxed);
                crate::benchmarks::inv(x)
            }
        }
        for count in [false, true] {
            let obj = Counting(AtomicU64::new(0));
            let s = stop(Some(FitnessValue::Scalar(-1)), 2000);
            let opts = RunOptions::seeded(5).with_noop_evals(count);
            let r = ea_perm_run(&obj, 6, MoveScheme::AdjacentSwap, 0, &s, &opts).unwrap();
            assert_eq!(r.evaluations_used, obj.0.load(Ordering::Relaxed));
        }
    }

    #[test]
    fn multivalued_single_position() {
        let s = stop(Some(FitnessValue::Key(vec![0])), 10);
        let r = ea_multivalued_run(&NVal, 1, 1, &s, &RunOptions::seeded(0)).unwrap();
        assert!(r.success);
        assert_eq!(r.evaluations_used, 1);
    }

    #[test]
    fn poisson_small_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let draws: Vec<u64> = (0..10_000).map(|_| poisson_sample(&mut rng)).collect();
        assert!(draws.iter().all(|&k| k < 15));
        let zeros = draws.iter().filter(|&&k| k == 0).count() as f64 / 1e4;
        assert!((zeros - (-1f64).exp()).abs() < 0.02);
    }

    #[test]
    fn bernoulli_visits_in_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let mut seen = Vec::new();
            for_each_bernoulli(20, 0.3, &mut rng, |k, _| seen.push(k));
            assert!(seen.windows(2).all(|w| w[0] < w[1]));
            assert!(seen.iter().all(|&k| k < 20));
        }
        let mut all = Vec::new();
        for_each_bernoulli(5, 1.0, &mut rng, |k, _| all.push(k));
        assert_eq!(all, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn derive_seed_separates_streams() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| derive_seed(7, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
    }

    #[test]
    fn multistart_respects_total_budget() {
        let s = stop(Some(FitnessValue::Scalar(-1)), 1000);
        let r = multistart(Direction::Minimize, &s, 300, 9, |sub, seed| {
            ea_perm_run(&Inv, 6, MoveScheme::Insertion, 0, sub, &RunOptions::seeded(seed))
        })
        .unwrap();
        assert_eq!(r.evaluations_used, 1000);
        assert_eq!(r.best_fitness, FitnessValue::Scalar(0));
        assert!(!r.success);
    }
}
