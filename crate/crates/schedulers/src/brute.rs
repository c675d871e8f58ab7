use dpp_core::Subset;

use network_sim::{sum_rate, NetworkInstance};

use crate::gp::ScheduleResult;
use crate::{Result, SchedError};

const BRUTE_GUARD: usize = 20;

/// Exhaustive maximization of the sum-rate over all binary activations.
/// Ties are broken toward the smaller cardinality, then lexicographically.
pub fn brute_force_schedule(inst: &NetworkInstance) -> Result<ScheduleResult> {
    let start = std::time::Instant::now();
    let m = inst.m();
    if m > BRUTE_GUARD {
        return Err(SchedError::Guard { m, max: BRUTE_GUARD });
    }
    let mut best = Subset::empty();
    let mut best_rate = sum_rate(inst, &best);
    for mask in 1u32..(1u32 << m) {
        let cand = Subset::from_mask(mask, m);
        let rate = sum_rate(inst, &cand);
        let tol = 1e-12 * (1.0 + best_rate.abs());
        let better = rate > best_rate + tol
            || (rate >= best_rate - tol
                && (cand.len() < best.len()
                    || (cand.len() == best.len() && cand.indices() < best.indices())));
        if better {
            best = cand;
            best_rate = rate;
        }
    }
    let powers = (0..m)
        .map(|i| if best.contains(i) { inst.p_high_watts } else { 0.0 })
        .collect();
    Ok(ScheduleResult {
        active: best,
        continuous_powers: powers,
        achieved_sum_rate: best_rate,
        outer_iters: 0,
        wall_time: start.elapsed(),
        solver_tag: "brute".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use network_sim::ScenarioTag;
    use numerics::Matrix;

    fn hand_instance(gain: Matrix, p_high: f64, noise: f64) -> NetworkInstance {
        let m = gain.rows();
        NetworkInstance {
            scenario: ScenarioTag::Adhoc,
            tx_pos: vec![[0.0; 3]; m],
            rx_pos: vec![[0.0; 3]; m],
            gain,
            p_high_watts: p_high,
            noise_watts: noise,
            seed: 0,
            config_echo: serde_json::Value::Null,
            retries: 0,
        }
    }

    #[test]
    fn single_link_active() {
        let inst = hand_instance(Matrix::from_rows(1, 1, vec![1.0]).unwrap(), 1.0, 0.1);
        let res = brute_force_schedule(&inst).unwrap();
        assert_eq!(res.active.indices(), &[0]);
        assert_eq!(res.continuous_powers, vec![1.0]);
    }

    #[test]
    fn zero_cross_gain_keeps_both() {
        let gain = Matrix::from_rows(2, 2, vec![1.0, 1e-300, 1e-300, 1.0]).unwrap();
        let inst = hand_instance(gain, 1.0, 0.1);
        let res = brute_force_schedule(&inst).unwrap();
        assert_eq!(res.active.indices(), &[0, 1]);
    }

    #[test]
    fn overwhelming_interference_keeps_exactly_one() {
        // Four cases by hand: {0} and {1} give log2(1+100), {0,1} gives
        // 2*log2(1+100/101) which is far smaller, {} gives zero.
        let gain = Matrix::from_rows(2, 2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let inst = hand_instance(gain, 1.0, 0.01);
        let res = brute_force_schedule(&inst).unwrap();
        assert_eq!(res.active.indices(), &[0], "tie broken to lexicographic min");
        assert!((res.achieved_sum_rate - (101.0f64).log2()).abs() < 1e-12);
    }

    #[test]
    fn guard_rejects_large_instances() {
        let m = 21;
        let inst = hand_instance(Matrix::identity(m), 1.0, 0.1);
        assert!(matches!(
            brute_force_schedule(&inst),
            Err(SchedError::Guard { m: 21, max: 20 })
        ));
    }
}
