/// Turns one type's distribution genes into per-column group counts.
///
/// Genes are normalized into shares of `required`; shares are floored and
/// the remainder goes to the largest fractional parts (ties to the lower
/// column). Counts above a column's capacity are clipped and the overflow is
/// handed, one group at a time, to the column with spare room that is
/// furthest below its share. Non-positive or non-finite gene sums fall back
/// to an even split.
///
/// `capacities` must sum to at least `required`.
pub fn legalize_distribution(genes: &[f64], required: u32, capacities: &[u32]) -> Vec<u32> {
    assert_eq!(genes.len(), capacities.len(), "one gene per column");
    let n = genes.len();
    let mut counts = vec![0u32; n];
    if required == 0 || n == 0 {
        return counts;
    }
    debug_assert!(capacities.iter().map(|&c| c as u64).sum::<u64>() >= required as u64);

    let weights: Vec<f64> = genes
        .iter()
        .map(|&g| if g.is_finite() && g > 0.0 { g } else { 0.0 })
        .collect();
    let total: f64 = weights.iter().sum();
    let raw: Vec<f64> = if total > 0.0 && total.is_finite() {
        weights
            .iter()
            .map(|w| w / total * required as f64)
            .collect()
    } else {
        vec![required as f64 / n as f64; n]
    };

    let mut assigned: i64 = 0;
    for (c, r) in counts.iter_mut().zip(&raw) {
        *c = r.floor() as u32;
        assigned += *c as i64;
    }
    let frac = |i: usize| raw[i] - raw[i].floor();
    let mut by_frac: Vec<usize> = (0..n).collect();
    by_frac.sort_by(|&a, &b| frac(b).total_cmp(&frac(a)).then(a.cmp(&b)));
    let mut remainder = required as i64 - assigned;
    // rounding noise can leave the floors a hair over the target
    while remainder < 0 {
        let i = *by_frac
            .iter()
            .rev()
            .find(|&&i| counts[i] > 0)
            .expect("some column holds a group");
        counts[i] -= 1;
        remainder += 1;
    }
    for &i in by_frac.iter().take(remainder as usize) {
        counts[i] += 1;
    }

    let mut overflow = 0u32;
    for (c, &cap) in counts.iter_mut().zip(capacities) {
        if *c > cap {
            overflow += *c - cap;
            *c = cap;
        }
    }
    while overflow > 0 {
        let target = (0..n)
            .filter(|&i| counts[i] < capacities[i])
            .max_by(|&a, &b| {
                (raw[a] - counts[a] as f64)
                    .total_cmp(&(raw[b] - counts[b] as f64))
                    .then(b.cmp(&a))
            })
            .expect("capacities cover the requirement");
        counts[target] += 1;
        overflow -= 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Every count vector with sum `required` and `counts <= caps`, ranked by
    /// squared distance to the proportional share.
    fn oracle_best_error(genes: &[f64], required: u32, caps: &[u32]) -> f64 {
        let total: f64 = genes.iter().sum();
        let raw: Vec<f64> = genes.iter().map(|g| g / total * required as f64).collect();
        fn rec(i: usize, left: u32, caps: &[u32], raw: &[f64], acc: f64, best: &mut f64) {
            if i == caps.len() {
                if left == 0 && acc < *best {
                    *best = acc;
                }
                return;
            }
            for c in 0..=caps[i].min(left) {
                let d = c as f64 - raw[i];
                rec(i + 1, left - c, caps, raw, acc + d * d, best);
            }
        }
        let mut best = f64::INFINITY;
        rec(0, required, caps, &raw, 0.0, &mut best);
        best
    }

    fn sq_error(genes: &[f64], required: u32, counts: &[u32]) -> f64 {
        let total: f64 = genes.iter().sum();
        genes
            .iter()
            .zip(counts)
            .map(|(g, &c)| {
                let d = c as f64 - g / total * required as f64;
                d * d
            })
            .sum()
    }

    #[test]
    fn exact_proportions() {
        assert_eq!(
            legalize_distribution(&[0.5, 0.3, 0.2], 10, &[10, 10, 10]),
            vec![5, 3, 2]
        );
    }

    #[test]
    fn largest_remainder() {
        // raw (3.15, 2.45, 1.40): floors sum to 6, the 0.45 remainder wins
        assert_eq!(
            legalize_distribution(&[0.45, 0.35, 0.20], 7, &[10, 10, 10]),
            vec![3, 3, 1]
        );
    }

    #[test]
    fn capacity_spill() {
        let counts = legalize_distribution(&[1.0, 0.0], 5, &[3, 10]);
        assert_eq!(counts, vec![3, 2]);
        // only legal pairs are (a, 5 - a) with a <= 3; (3, 2) is the closest
        let err = sq_error(&[1.0, 0.0], 5, &counts);
        assert!((err - oracle_best_error(&[1.0, 0.0], 5, &[3, 10])).abs() < 1e-12);
    }

    #[test]
    fn zero_genes_split_evenly() {
        assert_eq!(
            legalize_distribution(&[0.0, 0.0, 0.0], 7, &[5, 5, 5]),
            vec![3, 2, 2]
        );
        assert_eq!(
            legalize_distribution(&[f64::NAN, 0.0], 2, &[5, 5]),
            vec![1, 1]
        );
    }

    #[test]
    fn nothing_required() {
        assert_eq!(legalize_distribution(&[0.3, 0.9], 0, &[0, 0]), vec![0, 0]);
    }

    proptest! {
        #[test]
        fn counts_are_legal_and_proportional(
            genes in prop::collection::vec(0.01f64..1.0, 1..5),
            caps_seed in prop::collection::vec(0u32..6, 5),
            frac in 0.0f64..1.0,
        ) {
            let caps: Vec<u32> = caps_seed[..genes.len()].to_vec();
            let cap_sum: u32 = caps.iter().sum();
            let required = (cap_sum as f64 * frac).floor() as u32;
            let counts = legalize_distribution(&genes, required, &caps);
            prop_assert_eq!(counts.iter().sum::<u32>(), required);
            for (c, cap) in counts.iter().zip(&caps) {
                prop_assert!(c <= cap);
            }
            let best = oracle_best_error(&genes, required, &caps);
            prop_assert!(sq_error(&genes, required, &counts) <= best + 1e-9);
        }
    }
}
