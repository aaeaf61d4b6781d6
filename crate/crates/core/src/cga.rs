//! The compact genetic algorithm with borders on the well-behaved grid.
//!
//! One iteration samples `x1` then `x2` from the current model, ranks them
//! (a swap happens only when `f(x1) < f(x2)`), moves every frequency where
//! the ranked samples differ by one grid step towards the winner and clamps
//! to `[1/n, 1 - 1/n]`.

use alloc::vec::Vec;

use crate::{BitString, Fitness, FrequencyVector, ModelParams, RandomSource};

/// Which of the two samples of an iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SampleSlot {
    First,
    Second,
}

impl SampleSlot {
    /// 1 for the first sample, 2 for the second.
    pub fn offset(self) -> u64 {
        match self {
            SampleSlot::First => 1,
            SampleSlot::Second => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgaState {
    pub freq: FrequencyVector,
    /// Iteration counter `t`; the next samples are drawn from `p^(t)`.
    pub iteration: u64,
    pub evaluations: u64,
}

/// Everything that happened in one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub x1: BitString,
    pub x2: BitString,
    /// `true` when `x1` kept the winner slot.
    pub winner_first: bool,
    /// `y1_i - y2_i` in grid units, before clamping.
    pub deltas: Vec<i8>,
    /// Positions where clamping cancelled the step.
    pub clamped: Vec<usize>,
    /// Whether either sample is optimal (checked before the update).
    pub optimum_sampled: bool,
    /// The first optimal sample of the iteration, if any.
    pub optimal_sample: Option<SampleSlot>,
}

/// Reusable sample storage for the allocation-free step.
#[derive(Debug, Clone)]
pub struct SampleBuffers {
    pub x1: BitString,
    pub x2: BitString,
}

impl SampleBuffers {
    pub fn new(n: usize) -> Self {
        Self {
            x1: BitString::zeros(n),
            x2: BitString::zeros(n),
        }
    }
}

/// Orders two samples so the first has fitness at least that of the second.
/// Ties keep the sampling order. The flag is `true` when no swap happened.
pub fn rank_pair<'a, F: Fitness + ?Sized>(
    x1: &'a BitString,
    x2: &'a BitString,
    f: &F,
) -> (&'a BitString, &'a BitString, bool) {
    if f.evaluate(x1) < f.evaluate(x2) {
        (x2, x1, false)
    } else {
        (x1, x2, true)
    }
}

fn optimal_slot<F: Fitness + ?Sized>(
    f: &F,
    x1: &BitString,
    x2: &BitString,
) -> Option<SampleSlot> {
    if f.is_optimum(x1) {
        Some(SampleSlot::First)
    } else if f.is_optimum(x2) {
        Some(SampleSlot::Second)
    } else {
        None
    }
}

impl CgaState {
    /// Fresh state with every frequency at 1/2.
    pub fn new(params: ModelParams) -> Self {
        Self::from_frequencies(FrequencyVector::uniform(params))
    }

    pub fn from_frequencies(freq: FrequencyVector) -> Self {
        Self {
            freq,
            iteration: 0,
            evaluations: 0,
        }
    }

    pub fn params(&self) -> ModelParams {
        self.freq.params()
    }

    /// One full iteration with fresh samples.
    pub fn step<F: Fitness + ?Sized>(&mut self, f: &F, rng: &mut RandomSource) -> StepOutcome {
        let x1 = self.freq.sample(rng);
        let x2 = self.freq.sample(rng);
        self.update_with(f, x1, x2)
    }

    /// One iteration with the two samples supplied by the caller.
    pub fn update_with<F: Fitness + ?Sized>(
        &mut self,
        f: &F,
        x1: BitString,
        x2: BitString,
    ) -> StepOutcome {
        let optimal_sample = optimal_slot(f, &x1, &x2);
        let (y1, y2, winner_first) = rank_pair(&x1, &x2, f);
        let mut deltas = Vec::with_capacity(self.freq.len());
        let mut clamped = Vec::new();
        for i in 0..self.freq.len() {
            let d = i8::from(y1.get(i)) - i8::from(y2.get(i));
            deltas.push(d);
            if d != 0 && self.freq.apply_step(i, d) == 0 {
                clamped.push(i);
            }
        }
        self.iteration += 1;
        self.evaluations += 2;
        StepOutcome {
            x1,
            x2,
            winner_first,
            deltas,
            clamped,
            optimum_sampled: optimal_sample.is_some(),
            optimal_sample,
        }
    }

    /// Allocation-free iteration. `on_change(i, old_k, new_k)` is called for
    /// every position whose grid index actually moved.
    pub fn step_with<F, C>(
        &mut self,
        f: &F,
        rng: &mut RandomSource,
        buf: &mut SampleBuffers,
        mut on_change: C,
    ) -> Option<SampleSlot>
    where
        F: Fitness + ?Sized,
        C: FnMut(usize, u32, u32),
    {
        self.freq.sample_into(rng, &mut buf.x1);
        self.freq.sample_into(rng, &mut buf.x2);
        let hit = optimal_slot(f, &buf.x1, &buf.x2);
        let (y1, y2, _) = rank_pair(&buf.x1, &buf.x2, f);
        for (i, (a, b)) in y1.iter().zip(y2.iter()).enumerate() {
            if a != b {
                let old = self.freq.index(i);
                if self.freq.apply_step(i, if a { 1 } else { -1 }) != 0 {
                    on_change(i, old, self.freq.index(i));
                }
            }
        }
        self.iteration += 1;
        self.evaluations += 2;
        hit
    }
}

/// Smallest position whose frequency is strictly below `1 - 3/n`, or `None`
/// when every frequency is at least `1 - 3/n`. Exact grid comparison.
pub fn critical_position(p: &FrequencyVector) -> Option<usize> {
    let params = p.params();
    p.indices().iter().position(|&k| params.is_below_high(k))
}

/// Observables of the model state `p^(t)` at one iteration.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceRecord {
    pub iteration: u64,
    pub critical_pos: Option<usize>,
    pub min_freq: f64,
    /// Leading positions with frequency exactly `1 - 1/n`.
    pub prefix_len_at_upper: usize,
    pub optimum_prob: f64,
    /// Every frequency strictly above `1 - 3/n`.
    pub all_high: bool,
}

impl TraceRecord {
    pub fn observe(iteration: u64, p: &FrequencyVector) -> Self {
        let params = p.params();
        Self {
            iteration,
            critical_pos: critical_position(p),
            min_freq: p.min_value(),
            prefix_len_at_upper: p.prefix_at_upper(),
            optimum_prob: p.optimum_prob(),
            all_high: p.indices().iter().all(|&k| params.is_high(k)),
        }
    }
}

/// A new running maximum of the upper-border prefix length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PrefixMilestone {
    pub iteration: u64,
    pub prefix_len: usize,
}

/// Outcome of one budgeted cGA run.
///
/// Besides the thinned trace, the statistics below are tracked exactly on
/// every iteration `t` up to and including the one that sampled the optimum
/// (or the last affordable one).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunResult {
    pub success: bool,
    /// 1-based index of the first optimal evaluation, `2t + 1` or `2t + 2`.
    pub hit_time_evals: Option<u64>,
    pub iterations_used: u64,
    pub evaluations_used: u64,
    pub trace: Vec<TraceRecord>,
    /// First iteration whose model has every frequency above `1 - 3/n`.
    pub first_all_high_iter: Option<u64>,
    /// First iteration after `first_all_high_iter` where some frequency is
    /// back at or below `1 - 3/n`.
    pub first_high_loss_iter: Option<u64>,
    /// Some frequency was at or below 1/4 at some point.
    pub ever_below_quarter: bool,
    /// Positions that fell to `1 - 3/n` or below after having reached `1 - 1/n`.
    pub positions_fell_after_upper: usize,
    /// Iterations in which some frequency left the upper border.
    pub upper_departure_iterations: u64,
    pub prefix_milestones: Vec<PrefixMilestone>,
    pub final_indices: Vec<u32>,
}

impl RunResult {
    /// Fraction of executed iterations with an upper-border departure.
    pub fn departure_fraction(&self) -> f64 {
        if self.iterations_used == 0 {
            0.0
        } else {
            self.upper_departure_iterations as f64 / self.iterations_used as f64
        }
    }
}

/// Default trace thinning: about 10^4 records over the iteration budget.
pub fn default_trace_every(budget_evals: u64) -> u64 {
    (budget_evals / 2 / 10_000).max(1)
}

/// Runs the cGA from `p = (1/2, ..., 1/2)` until an optimum is sampled or no
/// further complete iteration fits into `budget_evals` evaluations.
///
/// `trace_every = 0` selects [`default_trace_every`].
pub fn run_cga<F: Fitness + ?Sized>(
    params: ModelParams,
    f: &F,
    budget_evals: u64,
    seed: u64,
    stream: u64,
    trace_every: u64,
) -> RunResult {
    run(params, f, budget_evals, seed, stream, trace_every, true)
}

/// Like [`run_cga`], but keeps iterating after the first optimal sample
/// until the budget is spent. `hit_time_evals` still records the first hit;
/// all other statistics cover the whole budget.
pub fn run_cga_past_optimum<F: Fitness + ?Sized>(
    params: ModelParams,
    f: &F,
    budget_evals: u64,
    seed: u64,
    stream: u64,
    trace_every: u64,
) -> RunResult {
    run(params, f, budget_evals, seed, stream, trace_every, false)
}

fn run<F: Fitness + ?Sized>(
    params: ModelParams,
    f: &F,
    budget_evals: u64,
    seed: u64,
    stream: u64,
    trace_every: u64,
    stop_at_optimum: bool,
) -> RunResult {
    let trace_every = if trace_every == 0 {
        default_trace_every(budget_evals)
    } else {
        trace_every
    };
    let n = params.n();
    let top = params.max_index();
    let mut rng = RandomSource::new(seed, stream);
    let mut state = CgaState::new(params);
    let mut buf = SampleBuffers::new(n);

    let mut not_high = state
        .freq
        .indices()
        .iter()
        .filter(|&&k| !params.is_high(k))
        .count();
    let mut reached_upper = alloc::vec![false; n];
    let mut fell_after_upper = alloc::vec![false; n];

    let mut result = RunResult {
        success: false,
        hit_time_evals: None,
        iterations_used: 0,
        evaluations_used: 0,
        trace: Vec::new(),
        first_all_high_iter: None,
        first_high_loss_iter: None,
        ever_below_quarter: false,
        positions_fell_after_upper: 0,
        upper_departure_iterations: 0,
        prefix_milestones: Vec::new(),
        final_indices: Vec::new(),
    };
    let mut best_prefix = 0usize;
    let mut last_recorded = None;

    loop {
        let t = state.iteration;
        if not_high == 0 && result.first_all_high_iter.is_none() {
            result.first_all_high_iter = Some(t);
        }
        if not_high > 0
            && result.first_all_high_iter.is_some()
            && result.first_high_loss_iter.is_none()
        {
            result.first_high_loss_iter = Some(t);
        }
        let prefix = state.freq.prefix_at_upper();
        if prefix > best_prefix {
            best_prefix = prefix;
            result.prefix_milestones.push(PrefixMilestone {
                iteration: t,
                prefix_len: prefix,
            });
        }
        if t.is_multiple_of(trace_every) {
            result.trace.push(TraceRecord::observe(t, &state.freq));
            last_recorded = Some(t);
        }
        if state.evaluations + 2 > budget_evals {
            break;
        }

        let mut departed = false;
        let hit = state.step_with(f, &mut rng, &mut buf, |i, old, new| {
            if params.is_high(old) != params.is_high(new) {
                if params.is_high(new) {
                    not_high -= 1;
                } else {
                    not_high += 1;
                }
            }
            if new < old {
                if params.at_or_below_quarter(new) {
                    result.ever_below_quarter = true;
                }
                if old == top {
                    departed = true;
                }
                if reached_upper[i] && !fell_after_upper[i] && !params.is_high(new) {
                    fell_after_upper[i] = true;
                    result.positions_fell_after_upper += 1;
                }
            } else if new == top {
                reached_upper[i] = true;
            }
        });
        if departed {
            result.upper_departure_iterations += 1;
        }
        if let Some(slot) = hit {
            if !result.success {
                result.success = true;
                result.hit_time_evals = Some(2 * t + slot.offset());
            }
            if stop_at_optimum {
                break;
            }
        }
    }
    result.iterations_used = state.iteration;
    result.evaluations_used = state.evaluations;
    if last_recorded != Some(state.iteration) {
        result
            .trace
            .push(TraceRecord::observe(state.iteration, &state.freq));
    }
    result.final_indices = state.freq.indices().to_vec();
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{LeadingOnes, OneMax};
    use proptest::prelude::*;

    fn bs(bits: &[u8]) -> BitString {
        BitString::from_bits(bits)
    }

    fn params(n: usize, m: u32) -> ModelParams {
        ModelParams::from_half_range(n, m).unwrap()
    }

    #[test]
    fn ranking_follows_strict_comparison() {
        let (a, b) = (bs(&[1, 1, 0]), bs(&[1, 0, 1]));
        let (y1, y2, kept) = rank_pair(&a, &b, &LeadingOnes);
        assert!(kept && y1 == &a && y2 == &b);
        let (y1, _, kept) = rank_pair(&b, &a, &LeadingOnes);
        assert!(!kept && y1 == &a);

        // Tie at fitness 0 keeps the sampling order.
        let (a, b) = (bs(&[0, 1, 0]), bs(&[0, 0, 1]));
        let (y1, y2, kept) = rank_pair(&a, &b, &LeadingOnes);
        assert!(kept && y1 == &a && y2 == &b);

        let (y1, y2, kept) = rank_pair(&a, &a, &OneMax);
        assert!(kept && y1 == &a && y2 == &a);
    }

    #[test]
    fn forced_update_moves_by_one_step() {
        let mut state = CgaState::new(params(3, 2));
        let out = state.update_with(&LeadingOnes, bs(&[1, 1, 0]), bs(&[1, 0, 1]));
        assert_eq!(out.deltas, [0, 1, -1]);
        assert!(out.winner_first && out.clamped.is_empty() && !out.optimum_sampled);
        assert_eq!(state.freq.indices(), &[2, 3, 1]);
        assert_eq!(state.freq.value(0), 0.5);
        assert!((state.freq.value(1) - 7.0 / 12.0).abs() < 1e-15);
        assert!((state.freq.value(2) - 5.0 / 12.0).abs() < 1e-15);
        assert_eq!((state.iteration, state.evaluations), (1, 2));
    }

    #[test]
    fn equal_samples_leave_model_unchanged() {
        let mut state = CgaState::new(params(4, 3));
        let before = state.freq.clone();
        let out = state.update_with(&LeadingOnes, bs(&[1, 0, 1, 1]), bs(&[1, 0, 1, 1]));
        assert_eq!(state.freq, before);
        assert!(out.deltas.iter().all(|&d| d == 0));
    }

    #[test]
    fn upper_border_clamps() {
        let p = params(3, 2);
        let freq = FrequencyVector::from_indices(p, alloc::vec![2, 4, 2]).unwrap();
        let mut state = CgaState::from_frequencies(freq);
        let out = state.update_with(&LeadingOnes, bs(&[1, 1, 0]), bs(&[1, 0, 0]));
        assert_eq!(out.deltas, [0, 1, 0]);
        assert_eq!(out.clamped, [1]);
        assert_eq!(state.freq.index(1), 4);
    }

    #[test]
    fn optimum_detected_before_update() {
        let mut state = CgaState::new(params(3, 2));
        let out = state.update_with(&LeadingOnes, bs(&[0, 1, 1]), bs(&[1, 1, 1]));
        assert!(out.optimum_sampled);
        assert_eq!(out.optimal_sample, Some(SampleSlot::Second));
        assert!(!out.winner_first);
    }

    #[test]
    fn critical_position_examples() {
        let p = params(8, 6);
        // 7/8 is the upper border (k = 12), 1/2 is k = 6.
        let mut k = alloc::vec![6; 8];
        k[0] = 12;
        k[1] = 12;
        let f = FrequencyVector::from_indices(p, k).unwrap();
        assert_eq!(critical_position(&f), Some(2));
        let f = FrequencyVector::from_indices(p, alloc::vec![12; 8]).unwrap();
        assert_eq!(critical_position(&f), None);
        assert_eq!(critical_position(&FrequencyVector::uniform(p)), Some(0));
        // Exactly 1 - 3/n is not critical.
        let f = FrequencyVector::from_indices(p, alloc::vec![8; 8]).unwrap();
        assert_eq!(critical_position(&f), None);
    }

    #[test]
    fn zero_budget() {
        let r = run_cga(params(5, 3), &LeadingOnes, 0, 1, 0, 1);
        assert!(!r.success);
        assert_eq!(r.iterations_used, 0);
        assert_eq!(r.evaluations_used, 0);
        assert_eq!(r.trace.len(), 1);
        // An odd budget only pays for complete iterations.
        let r = run_cga(params(5, 3), &LeadingOnes, 7, 1, 0, 1);
        assert_eq!(r.evaluations_used, 6);
    }

    #[test]
    fn runs_are_deterministic() {
        let p = params(10, 20);
        let a = run_cga(p, &LeadingOnes, 50_000, 7, 3, 10);
        let b = run_cga(p, &LeadingOnes, 50_000, 7, 3, 10);
        assert_eq!(a, b);
        let c = run_cga(p, &LeadingOnes, 50_000, 7, 4, 10);
        assert_ne!(a.trace, c.trace);
    }

    #[test]
    fn run_bookkeeping() {
        let p = params(12, 25);
        let r = run_cga(p, &LeadingOnes, 2_000_000, 5, 0, 100);
        assert!(r.success);
        let hit = r.hit_time_evals.unwrap();
        assert!(hit <= r.evaluations_used && hit + 1 >= r.evaluations_used);
        assert_eq!(r.evaluations_used, 2 * r.iterations_used);
        let last = r.trace.last().unwrap();
        assert_eq!(last.iteration, r.iterations_used);
        assert!(r.trace.windows(2).all(|w| w[0].iteration < w[1].iteration));
        assert!(r
            .prefix_milestones
            .windows(2)
            .all(|w| w[0].prefix_len < w[1].prefix_len && w[0].iteration < w[1].iteration));
        for rec in &r.trace {
            assert!(rec.min_freq >= 1.0 / 12.0 && rec.min_freq <= 11.0 / 12.0);
            assert!(rec.optimum_prob > 0.0 && rec.optimum_prob <= 1.0);
        }
    }

    #[test]
    fn continued_run_spends_the_budget() {
        let p = params(12, 25);
        let stop = run_cga(p, &LeadingOnes, 2_000_000, 5, 0, u64::MAX);
        let cont = run_cga_past_optimum(p, &LeadingOnes, 2_000_000, 5, 0, u64::MAX);
        assert_eq!(stop.hit_time_evals, cont.hit_time_evals);
        assert_eq!(cont.evaluations_used, 2_000_000);
        assert!(cont.first_all_high_iter.is_some());
        // Identical up to the hit.
        assert_eq!(
            stop.prefix_milestones,
            cont.prefix_milestones[..stop.prefix_milestones.len()]
        );
    }

    #[test]
    fn trace_thinning_default() {
        assert_eq!(default_trace_every(0), 1);
        assert_eq!(default_trace_every(2_000_000), 100);
        let r = run_cga(params(6, 4), &LeadingOnes, 400, 1, 1, 0);
        // Budget 400 evaluations gives thinning 1: every iteration recorded.
        assert_eq!(r.trace.len() as u64, r.iterations_used + 1);
    }

    #[test]
    fn tiny_instance_succeeds() {
        // n = 3, mu = 12: Monte Carlo pilot, 1000 trials, budget 10^5.
        let p = params(3, 2);
        let ok = (0..1000)
            .filter(|&s| run_cga(p, &LeadingOnes, 100_000, 2024, s, u64::MAX).success)
            .count();
        assert!(ok >= 990, "{ok} / 1000");
    }

    proptest! {
        #[test]
        fn step_invariants(
            n in 3usize..12,
            m in 1u32..8,
            seed in any::<u64>(),
            steps in 1usize..40,
        ) {
            let p = params(n, m);
            let mut state = CgaState::new(p);
            let mut rng = RandomSource::new(seed, 0);
            for _ in 0..steps {
                let before = state.freq.clone();
                let out = state.step(&LeadingOnes, &mut rng);
                let differing = out.x1.hamming(&out.x2);
                prop_assert_eq!(out.deltas.iter().filter(|&&d| d != 0).count(), differing);
                for i in 0..n {
                    prop_assert_eq!(out.deltas[i] != 0, out.x1.get(i) != out.x2.get(i));
                    let moved = i64::from(state.freq.index(i)) - i64::from(before.index(i));
                    prop_assert!(moved.abs() <= 1);
                    prop_assert!(state.freq.index(i) <= p.max_index());
                    let expect = if out.clamped.contains(&i) { 0 } else { i64::from(out.deltas[i]) };
                    prop_assert_eq!(moved, expect);
                }
                let (y1, y2, _) = rank_pair(&out.x1, &out.x2, &LeadingOnes);
                prop_assert!(LeadingOnes.evaluate(y1) >= LeadingOnes.evaluate(y2));
                prop_assert_eq!(state.evaluations, 2 * state.iteration);
            }
        }
    }
}
