//! Solutions of the constant-weight equation and their permutation quotient.
//!
//! For `slots` particles with weights drawn from a model, the ordered tuples
//! whose weights sum to `target` form the solution set. Tuples that differ by
//! a permutation are the same partition, recorded by its frequency vector
//! `n_r` (how many slots use basis vector `r`). Frequencies are indexed by
//! basis position, not by distinct weight value, so repeated weights in a
//! direct sum are counted separately.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::weights::{Constraint, WeightModel};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Partition {
    pub frequencies: Vec<u32>,
}

impl Partition {
    pub fn slots(&self) -> u32 {
        self.frequencies.iter().sum()
    }

    /// `sum_r n_r alpha_r` componentwise.
    pub fn weight(&self, model: &WeightModel) -> Vec<i64> {
        let mut w = vec![0; model.cartan_dim()];
        for (r, &n) in self.frequencies.iter().enumerate() {
            for (acc, a) in w.iter_mut().zip(model.weight(r)) {
                *acc += n as i64 * a;
            }
        }
        w
    }

    /// Number of ordered tuples in this coset: `slots! / prod_r n_r!`.
    pub fn multiplicity(&self) -> u128 {
        let mut total = 0u32;
        let mut m: u128 = 1;
        for &n in &self.frequencies {
            for k in 1..=n {
                total += 1;
                // running binomial product stays integral at every step
                m = m * total as u128 / k as u128;
            }
        }
        m
    }
}

/// Stacked frequency vectors of all partitions for one context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyMatrix {
    dim: usize,
    slots: usize,
    target: Vec<i64>,
    rows: Vec<Vec<u32>>,
}

impl FrequencyMatrix {
    pub fn new(dim: usize, slots: usize, target: Vec<i64>, mut rows: Vec<Vec<u32>>) -> Self {
        rows.sort_by(|a, b| b.cmp(a));
        rows.dedup();
        Self {
            dim,
            slots,
            target,
            rows,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn target(&self) -> &[i64] {
        &self.target
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub(crate) fn int_rows(&self) -> Vec<Vec<i64>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&x| x as i64).collect())
            .collect()
    }
}

fn check_target(model: &WeightModel, slots: usize, target: &[i64]) -> Result<()> {
    if slots == 0 {
        return Err(Error::ZeroSlots);
    }
    if target.len() != model.cartan_dim() {
        return Err(Error::WeightLength {
            expected: model.cartan_dim(),
            found: target.len(),
        });
    }
    Ok(())
}

/// Depth-first search over frequency vectors with bound pruning.
///
/// `scores[r]` is the score vector of basis vector `r`. Rows come out in
/// lexicographically descending order of the frequency vector.
fn search(scores: &[Vec<i64>], slots: usize, target: &[i64]) -> Vec<Vec<u32>> {
    let d = scores.len();
    let comps = target.len();
    // suffix bounds: min/max score among basis vectors r..d
    let mut lo = vec![vec![i64::MAX; comps]; d];
    let mut hi = vec![vec![i64::MIN; comps]; d];
    for r in (0..d).rev() {
        for c in 0..comps {
            let (l, h) = if r + 1 < d {
                (lo[r + 1][c], hi[r + 1][c])
            } else {
                (i64::MAX, i64::MIN)
            };
            lo[r][c] = l.min(scores[r][c]);
            hi[r][c] = h.max(scores[r][c]);
        }
    }
    let mut out = Vec::new();
    let mut freq = vec![0u32; d];
    let mut rest = target.to_vec();
    dfs(
        scores,
        &lo,
        &hi,
        0,
        slots as i64,
        &mut rest,
        &mut freq,
        &mut out,
    );
    out
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    scores: &[Vec<i64>],
    lo: &[Vec<i64>],
    hi: &[Vec<i64>],
    r: usize,
    left: i64,
    rest: &mut [i64],
    freq: &mut [u32],
    out: &mut Vec<Vec<u32>>,
) {
    let feasible =
        (0..rest.len()).all(|c| left * lo[r][c] <= rest[c] && rest[c] <= left * hi[r][c]);
    if !feasible {
        return;
    }
    if r + 1 == scores.len() {
        if (0..rest.len()).all(|c| rest[c] == left * scores[r][c]) {
            freq[r] = left as u32;
            out.push(freq.to_vec());
            freq[r] = 0;
        }
        return;
    }
    for n in (0..=left).rev() {
        for (c, x) in rest.iter_mut().enumerate() {
            *x -= n * scores[r][c];
        }
        freq[r] = n as u32;
        dfs(scores, lo, hi, r + 1, left - n, rest, freq, out);
        for (c, x) in rest.iter_mut().enumerate() {
            *x += n * scores[r][c];
        }
    }
    freq[r] = 0;
}

/// One partition per permutation coset of the solution set, in canonical
/// (lexicographically descending) order.
pub fn enumerate_partitions(
    model: &WeightModel,
    slots: usize,
    target: &[i64],
) -> Result<Vec<Partition>> {
    check_target(model, slots, target)?;
    Ok(search(model.weights(), slots, target)
        .into_iter()
        .map(|frequencies| Partition { frequencies })
        .collect())
}

/// True when the solution set for `(slots, target)` is nonempty.
pub fn is_feasible(model: &WeightModel, slots: usize, target: &[i64]) -> bool {
    if slots == 0 {
        return target.iter().all(|&t| t == 0);
    }
    enumerate_partitions(model, slots, target).is_ok_and(|p| !p.is_empty())
}

/// All ordered tuples of basis indices (0-based) whose weights sum to
/// `target`, sorted lexicographically.
pub fn enumerate_tuples(
    model: &WeightModel,
    slots: usize,
    target: &[i64],
) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    for p in enumerate_partitions(model, slots, target)? {
        let mut t: Vec<usize> = p
            .frequencies
            .iter()
            .enumerate()
            .flat_map(|(r, &n)| core::iter::repeat_n(r, n as usize))
            .collect();
        loop {
            out.push(t.clone());
            if !next_permutation(&mut t) {
                break;
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Advances to the next lexicographic permutation; false after the last one.
fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Frequency matrix of all unordered tuples satisfying a general constraint.
pub fn enumerate_constrained(
    model: &WeightModel,
    slots: usize,
    constraint: &Constraint,
) -> Result<FrequencyMatrix> {
    constraint.validate(model)?;
    if slots == 0 {
        return Err(Error::ZeroSlots);
    }
    let (scores, target) = constraint.scores(model);
    let rows = search(&scores, slots, &target);
    Ok(FrequencyMatrix::new(model.dim(), slots, target, rows))
}

/// Frequency matrix for the constant-weight condition.
pub fn frequency_matrix(
    model: &WeightModel,
    slots: usize,
    target: &[i64],
) -> Result<FrequencyMatrix> {
    enumerate_constrained(model, slots, &Constraint::LinearWeight(target.to_vec()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankReport {
    pub rank_a: usize,
    /// Rank of the matrix with an all-ones row appended.
    pub rank_a_tilde: usize,
    /// A vector with `A b = 0` and `sum_r b_r != 0`, present exactly when
    /// `rank_a_tilde == rank_a + 1`.
    pub witness: Option<Vec<Rational>>,
}

impl RankReport {
    /// Both rank conditions for a nonzero-sum annihilating vector hold.
    pub fn admits_witness(&self, dim: usize) -> bool {
        self.rank_a < dim && self.rank_a_tilde == self.rank_a + 1
    }
}

pub fn rank_analysis(matrix: &FrequencyMatrix) -> RankReport {
    let rows = matrix.int_rows();
    let rank_a = exact::rank(&rows);
    let mut tilde = rows.clone();
    tilde.push(vec![1; matrix.dim()]);
    let rank_a_tilde = exact::rank(&tilde);
    let witness = if rank_a_tilde == rank_a + 1 {
        exact::null_space(&rows, matrix.dim())
            .into_iter()
            .find(|v| v.iter().copied().sum::<Rational>() != Rational::from_integer(0))
    } else {
        None
    };
    RankReport {
        rank_a,
        rank_a_tilde,
        witness,
    }
}

/// Number of partitions for an SU(2) irreducible, by coefficient extraction.
///
/// Shifting every weight by `D - 1` gives gradings `0, 2, ..., 2D - 2`; the
/// count is the coefficient of `u^slots t^(target + slots (D-1))` in
/// `prod_r 1 / (1 - u t^(2r))`. The part-count variable `u` is needed: the
/// grading alone does not fix the number of slots.
pub fn partition_count(model: &WeightModel, slots: usize, target: i64) -> Result<u128> {
    let two_j = model
        .su2_irreducible()
        .ok_or_else(|| Error::NotIrreducible(alloc::string::String::from(model.label())))?;
    if slots == 0 {
        return Err(Error::ZeroSlots);
    }
    let d = two_j as i64 + 1;
    let total = target + slots as i64 * (d - 1);
    let max = slots as i64 * 2 * (d - 1);
    if total < 0 || total > max || total % 2 != 0 {
        return Ok(0);
    }
    let g = total as usize;
    // dp[k][s]: multisets of k parts with grading sum s
    let mut dp = vec![vec![0u128; g + 1]; slots + 1];
    dp[0][0] = 1;
    for r in 0..d as usize {
        let step = 2 * r;
        for k in 1..=slots {
            for s in step..=g {
                dp[k][s] += dp[k - 1][s - step];
            }
        }
    }
    Ok(dp[slots][g])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{direct_sum, spin_model, su3_fundamental};

    fn rows(ps: &[Partition]) -> Vec<Vec<u32>> {
        ps.iter().map(|p| p.frequencies.clone()).collect()
    }

    // Oracle: all D^slots ordered tuples, filtered.
    fn brute_tuples(model: &WeightModel, slots: usize, target: &[i64]) -> Vec<Vec<usize>> {
        let d = model.dim();
        let mut out = Vec::new();
        for code in 0..d.pow(slots as u32) {
            let mut c = code;
            let mut t = vec![0; slots];
            for k in (0..slots).rev() {
                t[k] = c % d;
                c /= d;
            }
            let mut w = vec![0; model.cartan_dim()];
            for &r in &t {
                crate::weights::add_assign(&mut w, model.weight(r));
            }
            if w == target {
                out.push(t);
            }
        }
        out
    }

    #[test]
    fn tuples_match_brute_force() {
        let m = spin_model(2);
        let t = enumerate_tuples(&m, 4, &[2]).unwrap();
        assert_eq!(t.len(), 16);
        assert_eq!(t, brute_tuples(&m, 4, &[2]));
        let m = spin_model(1);
        assert_eq!(
            enumerate_tuples(&m, 3, &[1]).unwrap(),
            [vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]
        );
        assert!(enumerate_tuples(&m, 2, &[4]).unwrap().is_empty());
    }

    #[test]
    fn spin_one_four_slot_partitions() {
        let m = spin_model(2);
        assert_eq!(
            rows(&enumerate_partitions(&m, 4, &[2]).unwrap()),
            [vec![1, 1, 2], vec![0, 3, 1]]
        );
        assert_eq!(
            rows(&enumerate_partitions(&m, 4, &[0]).unwrap()),
            [vec![2, 0, 2], vec![1, 2, 1], vec![0, 4, 0]]
        );
        assert_eq!(
            rows(&enumerate_partitions(&m, 4, &[-2]).unwrap()),
            [vec![2, 1, 1], vec![1, 3, 0]]
        );
    }

    #[test]
    fn input_errors() {
        let m = spin_model(1);
        assert_eq!(enumerate_partitions(&m, 0, &[0]), Err(Error::ZeroSlots));
        assert!(matches!(
            enumerate_partitions(&m, 2, &[0, 0]),
            Err(Error::WeightLength { .. })
        ));
        assert!(partition_count(&direct_sum(&[m.clone(), m]).unwrap(), 2, 0).is_err());
        assert!(partition_count(&su3_fundamental(), 2, 0).is_err());
    }

    #[test]
    fn repeated_weights_counted_per_basis_vector() {
        let m = direct_sum(&[spin_model(1), spin_model(1)]).unwrap();
        let ps = enumerate_partitions(&m, 2, &[0]).unwrap();
        // one of {0, 2} paired with one of {1, 3}
        assert_eq!(ps.len(), 4);
        assert_eq!(enumerate_tuples(&m, 2, &[0]).unwrap().len(), 8);
    }

    #[test]
    fn constrained_examples() {
        let m = spin_model(2);
        let lin = enumerate_constrained(&m, 4, &Constraint::LinearWeight(vec![0])).unwrap();
        assert_eq!(
            lin.rows(),
            rows(&enumerate_partitions(&m, 4, &[0]).unwrap()).as_slice()
        );
        let quad = enumerate_constrained(&m, 2, &Constraint::QuadraticWeight(8)).unwrap();
        assert_eq!(quad.rows(), [vec![2, 0, 0], vec![1, 0, 1], vec![0, 0, 2]]);
        let quad =
            enumerate_constrained(&spin_model(1), 3, &Constraint::QuadraticWeight(3)).unwrap();
        assert_eq!(
            quad.rows(),
            [vec![3, 0], vec![2, 1], vec![1, 2], vec![0, 3]]
        );
        let custom = Constraint::Custom {
            scores: vec![1, 0, 1],
            target: 1,
        };
        assert_eq!(
            enumerate_constrained(&m, 2, &custom).unwrap().rows(),
            [vec![1, 1, 0], vec![0, 1, 1]]
        );
    }

    #[test]
    fn rank_examples() {
        let a = FrequencyMatrix::new(
            3,
            4,
            vec![0],
            vec![vec![2, 0, 2], vec![1, 2, 1], vec![0, 4, 0]],
        );
        let rep = rank_analysis(&a);
        assert_eq!((rep.rank_a, rep.rank_a_tilde), (2, 2));
        assert!(rep.witness.is_none());

        let a = FrequencyMatrix::new(3, 4, vec![2], vec![vec![0, 3, 1], vec![1, 1, 2]]);
        let rep = rank_analysis(&a);
        assert_eq!((rep.rank_a, rep.rank_a_tilde), (2, 3));
        let b = rep.witness.unwrap();
        for r in a.int_rows() {
            assert_eq!(exact::dot(&r, &b), Rational::from_integer(0));
        }
        assert_ne!(
            b.iter().copied().sum::<Rational>(),
            Rational::from_integer(0)
        );

        let a = FrequencyMatrix::new(1, 1, vec![0], vec![vec![1]]);
        let rep = rank_analysis(&a);
        assert_eq!(rep.rank_a, 1);
        assert!(rep.witness.is_none());
        assert!(!rep.admits_witness(1));
    }

    #[test]
    fn count_examples() {
        assert_eq!(partition_count(&spin_model(2), 4, 2).unwrap(), 2);
        assert_eq!(partition_count(&spin_model(2), 4, 0).unwrap(), 3);
        assert_eq!(partition_count(&spin_model(1), 3, 1).unwrap(), 1);
        assert_eq!(partition_count(&spin_model(1), 3, 2).unwrap(), 0);
        assert_eq!(partition_count(&spin_model(0), 5, 0).unwrap(), 1);
    }

    #[test]
    fn next_permutation_walks_multiset() {
        let mut v = vec![0, 0, 1];
        let mut seen = vec![v.clone()];
        while next_permutation(&mut v) {
            seen.push(v.clone());
        }
        assert_eq!(seen, [vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]]);
    }

    #[test]
    fn multiplicity_is_multinomial() {
        let p = Partition {
            frequencies: vec![2, 1, 1],
        };
        assert_eq!(p.multiplicity(), 12);
        assert_eq!(
            Partition {
                frequencies: vec![0, 4, 0]
            }
            .multiplicity(),
            1
        );
    }

    #[test]
    fn su3_partitions_respect_both_components() {
        let m = su3_fundamental();
        for p in enumerate_partitions(&m, 3, &[0, 0]).unwrap() {
            assert_eq!(p.weight(&m), [0, 0]);
        }
        // (0,0) with 3 slots: one of each weight, or nothing else
        assert_eq!(
            rows(&enumerate_partitions(&m, 3, &[0, 0]).unwrap()),
            [vec![1, 1, 1]]
        );
    }
}
