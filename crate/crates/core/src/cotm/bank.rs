use rand::Rng;

use super::literals::{block_count, BitIter, LiteralVector};
use crate::error::{invalid, Error, Result};

/// Clause-bank hyperparameters shared by every training stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CotmParams {
    pub num_clauses: usize,
    /// Voting margin `T`.
    pub threshold: u32,
    /// Specificity `s`.
    pub specificity: f64,
    /// Memorization midpoint `N`; automata range over `[1, 2N]`.
    pub state_midpoint: u16,
}

impl CotmParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_clauses == 0 {
            return Err(invalid("num_clauses", "must be at least 1"));
        }
        if self.threshold == 0 {
            return Err(invalid("threshold", "must be a positive integer"));
        }
        if !self.specificity.is_finite() || self.specificity <= 1.0 {
            return Err(invalid("specificity", "must be a finite real greater than 1"));
        }
        if self.state_midpoint == 0 || self.state_midpoint > u16::MAX / 2 {
            return Err(invalid("state_midpoint", "must lie in [1, 32767]"));
        }
        Ok(())
    }
}

/// Whether an empty clause (no included literal) fires.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Empty clauses output 1.
    Train,
    /// Empty clauses output 0.
    Infer,
}

/// The kind of feedback a selected clause received.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feedback {
    Memorization,
    Forgetting,
    Invalidation,
}

/// Coalesced clause bank: one set of clauses shared by all outputs, each
/// clause carrying a signed integer weight per output.
#[derive(Debug, Clone, PartialEq)]
pub struct ClauseBank {
    params: CotmParams,
    num_outputs: usize,
    num_features: usize,
    num_literals: usize,
    blocks: usize,
    states: Vec<u16>,
    include: Vec<u64>,
    included: Vec<u32>,
    weights: Vec<i32>,
    forget_ln: f64,
}

impl ClauseBank {
    /// Every automaton starts at `N` (excluded, one step from inclusion) and
    /// every weight at zero.
    pub fn new(params: CotmParams, num_outputs: usize, num_features: usize) -> Result<Self> {
        params.validate()?;
        if num_outputs == 0 {
            return Err(invalid("num_outputs", "must be at least 1"));
        }
        if num_features == 0 {
            return Err(invalid("num_features", "must be at least 1"));
        }
        let num_literals = 2 * num_features;
        let blocks = block_count(num_literals);
        let c = params.num_clauses;
        Ok(Self {
            params,
            num_outputs,
            num_features,
            num_literals,
            blocks,
            states: vec![params.state_midpoint; c * num_literals],
            include: vec![0; c * blocks],
            included: vec![0; c],
            weights: vec![0; c * num_outputs],
            forget_ln: (-1.0 / params.specificity).ln_1p(),
        })
    }

    pub fn params(&self) -> &CotmParams {
        &self.params
    }

    pub fn num_clauses(&self) -> usize {
        self.params.num_clauses
    }

    pub fn num_outputs(&self) -> usize {
        self.num_outputs
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn num_literals(&self) -> usize {
        self.num_literals
    }

    pub fn state(&self, clause: usize, literal: usize) -> u16 {
        self.states[clause * self.num_literals + literal]
    }

    /// Overwrites one automaton, clamped into `[1, 2N]`.
    pub fn set_state(&mut self, clause: usize, literal: usize, state: u16) {
        let n = self.params.state_midpoint;
        let state = state.clamp(1, 2 * n);
        let idx = clause * self.num_literals + literal;
        let was = self.states[idx] > n;
        self.states[idx] = state;
        let now = state > n;
        if was != now {
            self.toggle_include(clause, literal, now);
        }
    }

    pub fn weight(&self, clause: usize, output: usize) -> i32 {
        self.weights[clause * self.num_outputs + output]
    }

    pub fn set_weight(&mut self, clause: usize, output: usize, weight: i32) {
        self.weights[clause * self.num_outputs + output] = weight;
    }

    /// `state > N`.
    #[inline]
    pub fn includes(&self, clause: usize, literal: usize) -> bool {
        self.include[clause * self.blocks + literal / 64] >> (literal % 64) & 1 == 1
    }

    pub fn included_literals(&self, clause: usize) -> Vec<usize> {
        let row = &self.include[clause * self.blocks..(clause + 1) * self.blocks];
        row.iter()
            .enumerate()
            .flat_map(|(bi, &b)| BitIter(b).map(move |bit| bi * 64 + bit))
            .collect()
    }

    pub fn included_count(&self, clause: usize) -> usize {
        self.included[clause] as usize
    }

    fn check_input(&self, x: &LiteralVector) -> Result<()> {
        if x.len() != self.num_literals {
            return Err(Error::DimensionMismatch {
                expected: self.num_literals,
                actual: x.len(),
            });
        }
        Ok(())
    }

    #[inline]
    fn fires(&self, clause: usize, x: &[u64], mode: Mode) -> bool {
        if self.included[clause] == 0 {
            return mode == Mode::Train;
        }
        let row = &self.include[clause * self.blocks..(clause + 1) * self.blocks];
        row.iter().zip(x).all(|(&inc, &xb)| inc & !xb == 0)
    }

    /// 1 iff every included literal is 1 in `x`.
    pub fn clause_output(&self, clause: usize, x: &LiteralVector, mode: Mode) -> Result<bool> {
        self.check_input(x)?;
        if clause >= self.num_clauses() {
            return Err(Error::OutOfRange {
                index: clause,
                limit: self.num_clauses(),
            });
        }
        Ok(self.fires(clause, x.blocks(), mode))
    }

    /// Unclamped `Σ_c weight[c][o] · clause_c(x)` in inference mode.
    pub fn raw_vote(&self, x: &LiteralVector, output: usize) -> Result<i64> {
        self.check_input(x)?;
        Ok(self.raw_vote_unchecked(x.blocks(), output))
    }

    fn raw_vote_unchecked(&self, x: &[u64], output: usize) -> i64 {
        (0..self.num_clauses())
            .filter(|&c| self.fires(c, x, Mode::Infer))
            .map(|c| self.weight(c, output) as i64)
            .sum()
    }

    /// Vote for `output`, clamped into `[-T, T]`.
    pub fn vote_sum(&self, x: &LiteralVector, output: usize) -> Result<i64> {
        Ok(self.clamp_vote(self.raw_vote(x, output)?))
    }

    pub fn clamp_vote(&self, raw: i64) -> i64 {
        let t = self.params.threshold as i64;
        raw.clamp(-t, t)
    }

    /// Unit step over every output's vote; a vote of exactly zero gives 0.
    pub fn predict(&self, x: &LiteralVector) -> Result<Vec<bool>> {
        self.check_input(x)?;
        let mut votes = vec![0i64; self.num_outputs];
        for c in 0..self.num_clauses() {
            if self.fires(c, x.blocks(), Mode::Infer) {
                let w = &self.weights[c * self.num_outputs..(c + 1) * self.num_outputs];
                for (v, &wo) in votes.iter_mut().zip(w) {
                    *v += wo as i64;
                }
            }
        }
        Ok(votes.into_iter().map(|v| v > 0).collect())
    }

    /// Probability that a clause is selected for feedback given the clamped
    /// vote and the target bit.
    pub fn activation_probability(&self, clamped_vote: i64, target: bool) -> f64 {
        let t = self.params.threshold as f64;
        let v = clamped_vote as f64;
        if target {
            (t - v) / (2.0 * t)
        } else {
            (t + v) / (2.0 * t)
        }
    }

    /// One training step on output `output` towards `target`.
    pub fn update<R: Rng + ?Sized>(
        &mut self,
        x: &LiteralVector,
        output: usize,
        target: bool,
        rng: &mut R,
    ) -> Result<()> {
        self.check_input(x)?;
        if output >= self.num_outputs {
            return Err(Error::OutOfRange {
                index: output,
                limit: self.num_outputs,
            });
        }
        let vote = self.clamp_vote(self.raw_vote_unchecked(x.blocks(), output));
        let p = self.activation_probability(vote, target);
        if p <= 0.0 {
            return Ok(());
        }
        let mut mask = vec![0u64; self.blocks];
        for c in 0..self.num_clauses() {
            if !rng.gen_bool(p) {
                continue;
            }
            let fires = self.fires(c, x.blocks(), Mode::Train);
            match (target, fires) {
                (true, true) => self.apply(c, output, Feedback::Memorization, x, &mut mask, rng),
                (true, false) => self.apply(c, output, Feedback::Forgetting, x, &mut mask, rng),
                (false, true) => self.apply(c, output, Feedback::Invalidation, x, &mut mask, rng),
                (false, false) => {}
            }
        }
        Ok(())
    }

    /// Applies one feedback type to a single clause, bypassing selection.
    pub fn feedback<R: Rng + ?Sized>(
        &mut self,
        clause: usize,
        output: usize,
        kind: Feedback,
        x: &LiteralVector,
        rng: &mut R,
    ) -> Result<()> {
        self.check_input(x)?;
        let mut mask = vec![0u64; self.blocks];
        self.apply(clause, output, kind, x, &mut mask, rng);
        Ok(())
    }

    fn apply<R: Rng + ?Sized>(
        &mut self,
        c: usize,
        output: usize,
        kind: Feedback,
        x: &LiteralVector,
        mask: &mut [u64],
        rng: &mut R,
    ) {
        let xb = x.blocks();
        match kind {
            Feedback::Memorization => {
                // One Bernoulli(1/s) draw per literal: a true literal is
                // reinforced unless drawn, a false literal is weakened if drawn.
                self.fill_forget_mask(mask, rng);
                for b in 0..self.blocks {
                    let up = xb[b] & !mask[b];
                    let down = !xb[b] & mask[b];
                    for bit in BitIter(up) {
                        self.increment(c, b * 64 + bit);
                    }
                    for bit in BitIter(down) {
                        self.decrement(c, b * 64 + bit);
                    }
                }
                let w = &mut self.weights[c * self.num_outputs + output];
                *w = w.saturating_add(1);
            }
            Feedback::Forgetting => {
                self.fill_forget_mask(mask, rng);
                for b in 0..self.blocks {
                    for bit in BitIter(mask[b]) {
                        self.decrement(c, b * 64 + bit);
                    }
                }
            }
            Feedback::Invalidation => {
                for b in 0..self.blocks {
                    let excluded = !self.include[c * self.blocks + b];
                    let zeros = !xb[b] & excluded & self.valid_bits(b);
                    for bit in BitIter(zeros) {
                        self.increment(c, b * 64 + bit);
                    }
                }
                let w = &mut self.weights[c * self.num_outputs + output];
                *w = w.saturating_sub(1);
            }
        }
    }

    fn valid_bits(&self, block: usize) -> u64 {
        let tail = self.num_literals - block * 64;
        if tail >= 64 {
            u64::MAX
        } else {
            (1u64 << tail) - 1
        }
    }

    /// Marks each literal independently with probability `1/s` by jumping
    /// geometric gaps between marks.
    fn fill_forget_mask<R: Rng + ?Sized>(&self, mask: &mut [u64], rng: &mut R) {
        mask.fill(0);
        let n = self.num_literals;
        let mut pos = 0usize;
        while pos < n {
            let u = 1.0 - rng.gen::<f64>();
            let gap = (u.ln() / self.forget_ln).floor();
            if gap >= (n - pos) as f64 {
                break;
            }
            pos += gap as usize;
            mask[pos / 64] |= 1 << (pos % 64);
            pos += 1;
        }
    }

    #[inline]
    fn increment(&mut self, c: usize, l: usize) {
        let n = self.params.state_midpoint;
        let s = &mut self.states[c * self.num_literals + l];
        if *s < 2 * n {
            *s += 1;
            if *s == n + 1 {
                self.toggle_include(c, l, true);
            }
        }
    }

    #[inline]
    fn decrement(&mut self, c: usize, l: usize) {
        let n = self.params.state_midpoint;
        let s = &mut self.states[c * self.num_literals + l];
        if *s > 1 {
            *s -= 1;
            if *s == n {
                self.toggle_include(c, l, false);
            }
        }
    }

    fn toggle_include(&mut self, c: usize, l: usize, on: bool) {
        let word = &mut self.include[c * self.blocks + l / 64];
        if on {
            *word |= 1 << (l % 64);
            self.included[c] += 1;
        } else {
            *word &= !(1 << (l % 64));
            self.included[c] -= 1;
        }
    }

    /// Checks that every automaton lies in `[1, 2N]` and that the include
    /// mask agrees with `state > N`.
    pub fn check_invariants(&self) -> bool {
        let n = self.params.state_midpoint;
        (0..self.num_clauses()).all(|c| {
            let mut count = 0;
            let ok = (0..self.num_literals).all(|l| {
                let s = self.state(c, l);
                count += (s > n) as u32;
                (1..=2 * n).contains(&s) && self.includes(c, l) == (s > n)
            });
            ok && count == self.included[c]
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(clauses: usize, t: u32, s: f64, n: u16) -> CotmParams {
        CotmParams {
            num_clauses: clauses,
            threshold: t,
            specificity: s,
            state_midpoint: n,
        }
    }

    #[test]
    fn fresh_bank_is_silent() {
        let bank = ClauseBank::new(params(4, 10, 3.0, 8), 2, 5).unwrap();
        let x = LiteralVector::from_features(5, [0, 3]).unwrap();
        for c in 0..4 {
            assert!(!bank.clause_output(c, &x, Mode::Infer).unwrap());
            assert!(bank.clause_output(c, &x, Mode::Train).unwrap());
        }
        assert_eq!(bank.predict(&x).unwrap(), [false, false]);
        assert!(bank.check_invariants());
        assert_eq!(bank, ClauseBank::new(params(4, 10, 3.0, 8), 2, 5).unwrap());
    }

    #[test]
    fn invalid_hyperparameters() {
        assert!(ClauseBank::new(params(0, 10, 3.0, 8), 1, 2).is_err());
        assert!(ClauseBank::new(params(1, 0, 3.0, 8), 1, 2).is_err());
        assert!(ClauseBank::new(params(1, 10, 1.0, 8), 1, 2).is_err());
        assert!(ClauseBank::new(params(1, 10, f64::NAN, 8), 1, 2).is_err());
        assert!(ClauseBank::new(params(1, 10, 3.0, 0), 1, 2).is_err());
        assert!(ClauseBank::new(params(1, 10, 3.0, 8), 0, 2).is_err());
    }

    #[test]
    fn included_pair_fires_when_both_true() {
        // clause {x1, ¬xV} over V = 4
        let mut bank = ClauseBank::new(params(1, 10, 3.0, 8), 1, 4).unwrap();
        bank.set_state(0, 0, 9);
        bank.set_state(0, 7, 16);
        let x = LiteralVector::from_features(4, [0, 1]).unwrap();
        assert!(bank.clause_output(0, &x, Mode::Infer).unwrap());
        let y = LiteralVector::from_features(4, [0, 3]).unwrap();
        assert!(!bank.clause_output(0, &y, Mode::Infer).unwrap());
        assert_eq!(bank.included_literals(0), [0, 7]);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let bank = ClauseBank::new(params(1, 10, 3.0, 8), 1, 4).unwrap();
        let x = LiteralVector::zeros(5);
        assert!(matches!(
            bank.clause_output(0, &x, Mode::Infer),
            Err(Error::DimensionMismatch { expected: 8, actual: 10 })
        ));
        assert!(bank.predict(&x).is_err());
    }

    #[test]
    fn single_positive_vote() {
        let mut bank = ClauseBank::new(params(1, 10, 3.0, 8), 1, 3).unwrap();
        bank.set_state(0, 1, 9);
        bank.set_weight(0, 0, 3);
        let x = LiteralVector::from_features(3, [1]).unwrap();
        assert_eq!(bank.predict(&x).unwrap(), [true]);
        assert_eq!(bank.vote_sum(&x, 0).unwrap(), 3);
    }

    #[test]
    fn vote_clamping() {
        let bank = ClauseBank::new(params(1, 3200, 3.0, 8), 1, 3).unwrap();
        assert_eq!(bank.clamp_vote(5000), 3200);
        assert_eq!(bank.clamp_vote(0), 0);
        let bank = ClauseBank::new(params(1, 10, 3.0, 8), 1, 3).unwrap();
        assert_eq!(bank.clamp_vote(-7), -7);
        assert_eq!(bank.clamp_vote(-70), -10);
    }

    #[test]
    fn invalidation_moves_midpoint_literal_in() {
        let mut bank = ClauseBank::new(params(1, 10, 3.0, 8), 1, 2).unwrap();
        bank.set_state(0, 0, 9);
        let x = LiteralVector::from_features(2, [0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        bank.feedback(0, 0, Feedback::Invalidation, &x, &mut rng).unwrap();
        // x = [1,0,0,1]; literal 1 (x2) is false and was at N
        assert_eq!(bank.state(0, 1), 9);
        assert_eq!(bank.state(0, 2), 9);
        assert_eq!(bank.state(0, 3), 8);
        assert_eq!(bank.weight(0, 0), -1);
        assert!(!bank.clause_output(0, &x, Mode::Infer).unwrap());
    }

    #[test]
    fn saturation_at_both_ends() {
        let mut bank = ClauseBank::new(params(1, 10, 1.0 + 1e-9, 4), 1, 2).unwrap();
        for l in 0..4 {
            bank.set_state(0, l, 8);
        }
        let x = LiteralVector::from_literals(2, [0, 1, 2, 3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // All literals true: memorization only reinforces (mask drawn with p≈1
        // leaves nothing to decrement and few to increment), state must stay 8.
        for _ in 0..20 {
            bank.feedback(0, 0, Feedback::Memorization, &x, &mut rng).unwrap();
        }
        assert!((0..4).all(|l| bank.state(0, l) == 8));
        for _ in 0..40 {
            bank.feedback(0, 0, Feedback::Forgetting, &x, &mut rng).unwrap();
        }
        assert!((0..4).all(|l| bank.state(0, l) == 1));
        assert!(bank.check_invariants());
    }

    #[test]
    fn huge_specificity_never_decrements_false_literals() {
        let mut bank = ClauseBank::new(params(1, 10, 1e15, 8), 1, 4).unwrap();
        let x = LiteralVector::from_features(4, [0, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            bank.feedback(0, 0, Feedback::Memorization, &x, &mut rng).unwrap();
        }
        for l in 0..8 {
            let expected = if x.get(l) { 16 } else { 8 };
            assert_eq!(bank.state(0, l), expected, "literal {l}");
        }
        assert_eq!(bank.weight(0, 0), 100);
    }

    #[test]
    fn forgetting_rate_tracks_specificity() {
        let s = 4.0;
        let mut bank = ClauseBank::new(params(1, 10, s, 1000), 1, 500).unwrap();
        let x = LiteralVector::zeros(500);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        bank.feedback(0, 0, Feedback::Forgetting, &x, &mut rng).unwrap();
        let dropped = (0..1000).filter(|&l| bank.state(0, l) == 999).count();
        // binomial(1000, 0.25): mean 250, sd ≈ 13.7
        assert!((200..=300).contains(&dropped), "{dropped}");
    }

    #[test]
    fn activation_probability_shape() {
        let bank = ClauseBank::new(params(1, 20, 3.0, 8), 1, 2).unwrap();
        assert_eq!(bank.activation_probability(20, true), 0.0);
        assert_eq!(bank.activation_probability(-20, false), 0.0);
        assert_eq!(bank.activation_probability(0, true), 0.5);
        let mut last = 1.0;
        for v in -20..=20 {
            let p = bank.activation_probability(v, true);
            assert!(p <= last);
            last = p;
        }
    }

    proptest! {
        #[test]
        fn update_storm_keeps_states_bounded(seed in any::<u64>(), n in 1u16..6, v in 1usize..70) {
            let mut bank = ClauseBank::new(params(6, 4, 2.5, n), 2, v).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..200 {
                let feats: Vec<usize> = (0..v).filter(|_| rng.gen_bool(0.4)).collect();
                let x = if rng.gen_bool(0.5) {
                    LiteralVector::from_features(v, feats).unwrap()
                } else {
                    LiteralVector::from_literals(v, feats).unwrap()
                };
                let o = rng.gen_range(0..2);
                let q = rng.gen_bool(0.5);
                bank.update(&x, o, q, &mut rng).unwrap();
            }
            prop_assert!(bank.check_invariants());
        }
    }
}
