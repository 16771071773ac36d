//! Regret-matching primitives shared by the solver and its tests.

use crate::game::Infoset;

/// Probability vector from cumulative regrets: proportional to the
/// positive part, uniform when no regret is positive.
///
/// Panics on an empty regret vector (there is no strategy over zero
/// actions).
pub fn regret_matching(regrets: &[f64]) -> Vec<f64> {
    assert!(!regrets.is_empty(), "regret_matching over empty action set");
    let mut out = vec![0.0; regrets.len()];
    regret_matching_into(regrets, u32::MAX, &mut out);
    out
}

/// Regret matching restricted to the actions whose bit is set in
/// `live_mask`. Masked-out actions get probability zero; if no live
/// action has positive regret the distribution is uniform over the live
/// actions. Writes into `out[..regrets.len()]`.
#[inline]
pub fn regret_matching_into(regrets: &[f64], live_mask: u32, out: &mut [f64]) {
    let mut pos_sum = 0.0;
    let mut live = 0u32;
    for (a, &r) in regrets.iter().enumerate() {
        out[a] = 0.0;
        if live_mask & (1 << a) != 0 {
            live += 1;
            if r > 0.0 {
                pos_sum += r;
            }
        }
    }
    debug_assert!(live > 0, "no live action to play");
    if pos_sum > 0.0 {
        let inv = 1.0 / pos_sum;
        for (a, &r) in regrets.iter().enumerate() {
            if live_mask & (1 << a) != 0 && r > 0.0 {
                out[a] = r * inv;
            }
        }
    } else {
        let u = 1.0 / live as f64;
        for a in 0..regrets.len() {
            if live_mask & (1 << a) != 0 {
                out[a] = u;
            }
        }
    }
}

/// One regret-entry update.
///
/// Plain CFR accumulates the increment. CFR+ without regret-based pruning
/// floors the entry at zero. When a regret-based pruning variant is
/// active, entries may go negative but snap to zero the first time they
/// would increase while negative.
#[inline]
pub fn apply_regret_increment(entry: f64, increment: f64, plus: bool, rbp_active: bool) -> f64 {
    if !plus {
        entry + increment
    } else if rbp_active {
        if entry < 0.0 && increment > 0.0 {
            0.0
        } else {
            entry + increment
        }
    } else {
        (entry + increment).max(0.0)
    }
}

/// The regret-matching bound on positive regret after `t` iterations:
/// `Delta(I) * sqrt(|A(I)|) * sqrt(t)`.
///
/// Panics on `t == 0`; the bound is defined for completed iterations.
pub fn theoretical_regret_bound(infoset: &Infoset, t: u64) -> f64 {
    assert!(t >= 1, "regret bound requires at least one iteration");
    infoset.delta() * (infoset.num_actions() as f64).sqrt() * (t as f64).sqrt()
}

/// Bound on the regret potential (sum of squared positive regrets) after
/// `t` iterations: `Delta(I)^2 * |A(I)| * t`. This is the cap on the
/// per-infoset relaxation allowed to a near counterfactual best response.
pub fn potential_bound(infoset: &Infoset, t: u64) -> f64 {
    assert!(t >= 1, "potential bound requires at least one iteration");
    infoset.delta() * infoset.delta() * infoset.num_actions() as f64 * t as f64
}

/// Normalize a cumulative strategy row into an average strategy:
/// proportional when the normalizer is positive, uniform otherwise.
pub fn normalize_average(cum: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; cum.len()];
    normalize_average_into(cum, &mut out);
    out
}

#[inline]
pub fn normalize_average_into(cum: &[f64], out: &mut [f64]) {
    let sum: f64 = cum.iter().sum();
    if sum > 0.0 {
        for (o, &c) in out.iter_mut().zip(cum) {
            *o = c / sum;
        }
    } else {
        let u = 1.0 / cum.len() as f64;
        for o in out.iter_mut().take(cum.len()) {
            *o = u;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn regret_matching_proportional() {
        assert_eq!(regret_matching(&[3.0, 1.0, 0.0]), vec![0.75, 0.25, 0.0]);
    }

    #[test]
    fn regret_matching_all_negative_is_uniform() {
        assert_eq!(regret_matching(&[-5.0, -1.0]), vec![0.5, 0.5]);
    }

    #[test]
    fn regret_matching_all_zero_is_uniform() {
        let s = regret_matching(&[0.0, 0.0, 0.0]);
        for p in s {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    #[should_panic(expected = "empty action set")]
    fn regret_matching_rejects_empty() {
        regret_matching(&[]);
    }

    #[test]
    fn masked_regret_matching_skips_pruned() {
        let mut out = [0.0; 3];
        // action 1 masked out even though it has the largest regret
        regret_matching_into(&[1.0, 5.0, 3.0], 0b101, &mut out);
        assert_eq!(out, [0.25, 0.0, 0.75]);
        // no positive regret among live: uniform over live
        regret_matching_into(&[-1.0, 5.0, -3.0], 0b101, &mut out);
        assert_eq!(out, [0.5, 0.0, 0.5]);
    }

    #[test]
    fn plus_update_floors_at_zero() {
        assert_eq!(apply_regret_increment(0.0, -3.0, true, false), 0.0);
        assert_eq!(apply_regret_increment(2.0, 1.0, true, false), 3.0);
    }

    #[test]
    fn plus_update_with_rbp_allows_negative_and_snaps_up() {
        assert_eq!(apply_regret_increment(-4.0, -1.0, true, true), -5.0);
        assert_eq!(apply_regret_increment(-5.0, 2.0, true, true), 0.0);
        assert_eq!(apply_regret_increment(3.0, -5.0, true, true), -2.0);
    }

    #[test]
    fn vanilla_update_is_plain_sum() {
        assert_eq!(apply_regret_increment(-4.0, -1.0, false, false), -5.0);
        assert_eq!(apply_regret_increment(-5.0, 2.0, false, true), -3.0);
    }

    proptest! {
        #[test]
        fn regret_matching_is_distribution(regrets in proptest::collection::vec(-1e6f64..1e6, 1..12)) {
            let s = regret_matching(&regrets);
            let sum: f64 = s.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            for &p in &s {
                prop_assert!(p >= 0.0);
            }
            // positive-regret actions get proportional mass
            let pos: f64 = regrets.iter().filter(|r| **r > 0.0).sum();
            if pos > 0.0 {
                for (a, &r) in regrets.iter().enumerate() {
                    if r > 0.0 {
                        prop_assert!((s[a] - r / pos).abs() < 1e-12);
                    } else {
                        prop_assert!(s[a] == 0.0);
                    }
                }
            }
        }

        #[test]
        fn plus_update_never_negative_without_rbp(entry in 0.0f64..1e9, inc in -1e9f64..1e9) {
            prop_assert!(apply_regret_increment(entry, inc, true, false) >= 0.0);
        }
    }
}
