use dpp_core::Subset;
use rand::Rng;

use network_sim::NetworkInstance;

use crate::{Result, SchedError};

/// Activates each link independently with probability `p_a`.
pub fn independent_thinning<R: Rng>(
    inst: &NetworkInstance,
    p_a: f64,
    rng: &mut R,
) -> Result<Subset> {
    if !(0.0..=1.0).contains(&p_a) {
        return Err(SchedError::Domain(format!(
            "activation probability must lie in [0,1], got {p_a}"
        )));
    }
    let indices = (0..inst.m()).filter(|_| rng.gen::<f64>() < p_a).collect();
    Ok(Subset::new(indices).expect("distinct indices"))
}

/// Mean activation fraction over labeled training schedules: each entry
/// pairs a selected subset with the ground-set size of its instance.
pub fn estimate_pa(labels: &[(Subset, usize)]) -> Result<f64> {
    if labels.is_empty() {
        return Err(SchedError::Domain("empty training set".into()));
    }
    let mut active = 0usize;
    let mut total = 0usize;
    for (subset, m) in labels {
        if *m == 0 || subset.max_index().map_or(false, |i| i >= *m) {
            return Err(SchedError::Domain(
                "subset index out of range for its ground set".into(),
            ));
        }
        active += subset.len();
        total += m;
    }
    Ok(active as f64 / total as f64)
}
