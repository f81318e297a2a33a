//! Majority-logic fusion and global performance accounting.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::signal::Hypothesis;

#[derive(Debug, Clone, PartialEq)]
pub struct FusionInput {
    pub local_decisions: Vec<Hypothesis>,
    pub retained_indices: Vec<usize>,
}

/// H1 iff strictly more than half of the retained sensors say H1.
pub fn majority_fuse(input: &FusionInput) -> Result<Hypothesis> {
    majority(&input.local_decisions)
}

pub fn majority(decisions: &[Hypothesis]) -> Result<Hypothesis> {
    if decisions.is_empty() {
        return Err(Error::EmptyFusion);
    }
    let yes = decisions.iter().filter(|d| d.is_present()).count();
    Ok(if 2 * yes > decisions.len() {
        Hypothesis::Present
    } else {
        Hypothesis::Absent
    })
}

/// Probability that more than half of `k` independent sensors, each
/// deciding H1 with probability `p`, decide H1.
pub fn majority_probability(k: usize, p: f64) -> f64 {
    let need = k / 2 + 1;
    // Σ_{j ≥ need} C(k, j) p^j (1−p)^(k−j), accumulated in log space
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    (need..=k)
        .map(|j| {
            let ln_c = libm::lgamma(k as f64 + 1.0) - libm::lgamma(j as f64 + 1.0) - libm::lgamma((k - j) as f64 + 1.0);
            let ln_term =
                ln_c + if j > 0 { j as f64 * lp } else { 0.0 } + if k > j { (k - j) as f64 * lq } else { 0.0 };
            ln_term.exp()
        })
        .sum::<f64>()
        .min(1.0)
}

/// Per-sensor probability that makes the `k`-sensor majority vote reach
/// `target` (bisection on the monotone map above).
pub fn per_sensor_probability_for_majority(k: usize, target: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::EmptyFusion);
    }
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "target probability must lie in (0, 1), got {target}"
        )));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if majority_probability(k, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Integer tallies behind [`TrialMetrics`]; merging is associative and
/// commutative, so partial tallies from any split of the trials combine to
/// the same totals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MetricsTally {
    pub idle_rounds: u64,
    pub false_alarms: u64,
    pub busy_rounds: u64,
    pub detections: u64,
    pub malicious_seen: u64,
    pub malicious_excluded: u64,
    pub honest_seen: u64,
    pub honest_excluded: u64,
    pub estimated_t_sum: u64,
    pub rounds: u64,
}

/// One fused round as seen by the accountant.
#[derive(Debug, Clone, Copy)]
pub struct RoundOutcome<'a> {
    pub decision: Hypothesis,
    pub truth: Hypothesis,
    pub excluded: &'a [usize],
    pub malicious: &'a [usize],
    pub sensors: usize,
    pub estimated_t: usize,
}

impl MetricsTally {
    pub fn record(&mut self, round: RoundOutcome<'_>) {
        let excluded: BTreeSet<usize> = round.excluded.iter().copied().collect();
        let caught = round.malicious.iter().filter(|i| excluded.contains(i)).count();
        match round.truth {
            Hypothesis::Absent => {
                self.idle_rounds += 1;
                self.false_alarms += u64::from(round.decision.is_present());
            }
            Hypothesis::Present => {
                self.busy_rounds += 1;
                self.detections += u64::from(round.decision.is_present());
            }
        }
        self.malicious_seen += round.malicious.len() as u64;
        self.malicious_excluded += caught as u64;
        self.honest_seen += (round.sensors - round.malicious.len()) as u64;
        self.honest_excluded += (excluded.len() - caught) as u64;
        self.estimated_t_sum += round.estimated_t as u64;
        self.rounds += 1;
    }

    pub fn merge(mut self, other: Self) -> Self {
        self.idle_rounds += other.idle_rounds;
        self.false_alarms += other.false_alarms;
        self.busy_rounds += other.busy_rounds;
        self.detections += other.detections;
        self.malicious_seen += other.malicious_seen;
        self.malicious_excluded += other.malicious_excluded;
        self.honest_seen += other.honest_seen;
        self.honest_excluded += other.honest_excluded;
        self.estimated_t_sum += other.estimated_t_sum;
        self.rounds += other.rounds;
        self
    }

    pub fn metrics(&self, trials: u64) -> TrialMetrics {
        let rate = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
        TrialMetrics {
            q_fa: rate(self.false_alarms, self.idle_rounds),
            q_d: rate(self.detections, self.busy_rounds),
            mu_detection_rate: rate(self.malicious_excluded, self.malicious_seen),
            honest_exclusion_rate: rate(self.honest_excluded, self.honest_seen),
            mean_estimated_t: rate(self.estimated_t_sum, self.rounds),
            trials,
        }
    }
}

/// Empirical performance of one scenario point. `None` marks a rate whose
/// denominator was empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialMetrics {
    pub q_fa: Option<f64>,
    pub q_d: Option<f64>,
    pub mu_detection_rate: Option<f64>,
    pub honest_exclusion_rate: Option<f64>,
    pub mean_estimated_t: Option<f64>,
    pub trials: u64,
}

/// Folds a stream of rounds into metrics.
pub fn accumulate_metrics<'a>(rounds: impl IntoIterator<Item = RoundOutcome<'a>>) -> TrialMetrics {
    let mut tally = MetricsTally::default();
    for r in rounds {
        tally.record(r);
    }
    tally.metrics(tally.rounds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Hypothesis::{Absent, Present};

    fn votes(yes: usize, no: usize) -> Vec<Hypothesis> {
        let mut v = vec![Present; yes];
        v.extend(vec![Absent; no]);
        v
    }

    #[test]
    fn majority_examples() {
        assert_eq!(majority(&votes(11, 9)).unwrap(), Present);
        assert_eq!(majority(&votes(10, 10)).unwrap(), Absent);
        assert_eq!(majority(&votes(1, 0)).unwrap(), Present);
        let input = FusionInput {
            local_decisions: votes(2, 1),
            retained_indices: vec![0, 3, 4],
        };
        assert_eq!(majority_fuse(&input).unwrap(), Present);
        assert!(matches!(majority(&[]), Err(Error::EmptyFusion)));
    }

    #[test]
    fn majority_probability_by_enumeration() {
        // brute force over all 2^k outcomes
        for k in 1..=9usize {
            for &p in &[0.1_f64, 0.37, 0.5, 0.9] {
                let mut exact = 0.0;
                for mask in 0u32..(1 << k) {
                    let ones = mask.count_ones() as usize;
                    if 2 * ones > k {
                        exact += p.powi(ones as i32) * (1.0 - p).powi((k - ones) as i32);
                    }
                }
                assert!((majority_probability(k, p) - exact).abs() < 1e-12, "k={k} p={p}");
            }
        }
    }

    #[test]
    fn per_sensor_inversion() {
        for k in [1, 4, 16, 20] {
            let p = per_sensor_probability_for_majority(k, 0.99).unwrap();
            assert!((majority_probability(k, p) - 0.99).abs() < 1e-9);
        }
        assert!(per_sensor_probability_for_majority(0, 0.5).is_err());
    }

    #[test]
    fn metrics_examples() {
        let malicious = [0usize, 1];
        let rounds = [
            RoundOutcome {
                decision: Absent,
                truth: Absent,
                excluded: &malicious,
                malicious: &malicious,
                sensors: 6,
                estimated_t: 2,
            },
            RoundOutcome {
                decision: Present,
                truth: Present,
                excluded: &malicious,
                malicious: &malicious,
                sensors: 6,
                estimated_t: 2,
            },
        ];
        let m = accumulate_metrics(rounds);
        assert_eq!(m.q_fa, Some(0.0));
        assert_eq!(m.q_d, Some(1.0));
        assert_eq!(m.mu_detection_rate, Some(1.0));
        assert_eq!(m.honest_exclusion_rate, Some(0.0));
        assert_eq!(m.mean_estimated_t, Some(2.0));

        let only_idle = [RoundOutcome {
            decision: Present,
            truth: Absent,
            excluded: &[2],
            malicious: &[],
            sensors: 4,
            estimated_t: 1,
        }];
        let m = accumulate_metrics(only_idle);
        assert_eq!(m.q_fa, Some(1.0));
        assert_eq!(m.q_d, None);
        assert_eq!(m.mu_detection_rate, None);
        assert_eq!(m.honest_exclusion_rate, Some(0.25));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn majority_permutation_invariant_and_monotone(bits in prop::collection::vec(any::<bool>(), 1..40), rot in 0usize..40, flip in 0usize..40) {
                let d: Vec<Hypothesis> = bits.iter().map(|&b| if b { Present } else { Absent }).collect();
                let out = majority(&d).unwrap();
                let mut p = d.clone();
                let len = p.len();
                p.rotate_left(rot % len);
                p.reverse();
                prop_assert_eq!(majority(&p).unwrap(), out);
                let mut raised = d.clone();
                let i = flip % raised.len();
                raised[i] = Present;
                if out == Present {
                    prop_assert_eq!(majority(&raised).unwrap(), Present);
                }
            }

            #[test]
            fn merge_is_associative(a in any::<[u16; 10]>(), b in any::<[u16; 10]>(), c in any::<[u16; 10]>()) {
                let mk = |v: [u16; 10]| MetricsTally {
                    idle_rounds: v[0].into(), false_alarms: v[1].into(), busy_rounds: v[2].into(), detections: v[3].into(),
                    malicious_seen: v[4].into(), malicious_excluded: v[5].into(), honest_seen: v[6].into(),
                    honest_excluded: v[7].into(), estimated_t_sum: v[8].into(), rounds: v[9].into(),
                };
                let (x, y, z) = (mk(a), mk(b), mk(c));
                prop_assert_eq!(x.merge(y).merge(z), x.merge(y.merge(z)));
                prop_assert_eq!(x.merge(y), y.merge(x));
            }
        }
    }
}
