use crate::scalar::Real;

/// Exact 1.5-entmax by the sort-based threshold search.
///
/// `p_i = max(0, s_i / 2 - tau)^2` with `tau` chosen so the outputs sum to
/// one. Low scores get exactly zero probability.
pub fn entmax15<F: Real>(scores: &[F]) -> Vec<F> {
    let n = scores.len();
    if n == 0 {
        return Vec::new();
    }
    let two = F::lit(2.0);
    let max = scores.iter().copied().fold(F::neg_infinity(), F::max);
    let z: Vec<F> = scores.iter().map(|&s| (s - max) / two).collect();
    let mut sorted = z.clone();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite scores"));

    let mut sum = F::zero();
    let mut sum_sq = F::zero();
    let mut tau = sorted[0] - F::one();
    for (k, &zk) in sorted.iter().enumerate() {
        let size = F::from_count(k as u64 + 1);
        sum = sum + zk;
        sum_sq = sum_sq + zk * zk;
        let mean = sum / size;
        let var = sum_sq / size - mean * mean;
        let delta = (F::one() - size * var) / size;
        let candidate = mean - delta.max(F::zero()).sqrt();
        if candidate <= zk {
            tau = candidate;
        } else {
            break;
        }
    }
    let raw: Vec<F> = z
        .iter()
        .map(|&zi| {
            let d = (zi - tau).max(F::zero());
            d * d
        })
        .collect();
    let support: Vec<F> = raw.iter().copied().filter(|&p| p > F::zero()).collect();
    if support.iter().all(|&p| p == support[0]) {
        // Equal weights: 1/k directly, since p / (k * p) can be off by an ulp.
        let share = F::one() / F::from_count(support.len() as u64);
        return raw.into_iter().map(|p| if p > F::zero() { share } else { F::zero() }).collect();
    }
    let total: F = raw.iter().copied().sum();
    raw.into_iter().map(|p| p / total).collect()
}
