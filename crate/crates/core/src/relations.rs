//! Linear relations on the diagonals of marginals of constant-weight states.
//!
//! Fix `M` sites carrying a multi-index `I0` and let `S = w - weight(I0)`.
//! The remaining `N - M` sites must carry weights summing to `S`, so every
//! frequency vector `n` of that equation satisfies `sum_r b_r n_r = 0` for
//! `b_r = alpha_r - S / (N - M)`. Averaging over the amplitudes of a state in
//! the sector gives
//!
//! ```text
//! sum_r b_r sum_{* not fixed} rho^{fixed + *}_{(I0; r)} = 0.
//! ```
//!
//! Contexts with `M = 0` are accepted; they are the base case of the
//! induction that relates context sizes `M - 1` and `M`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::partitions::{is_feasible, FrequencyMatrix};
use crate::rdm;
use crate::state::{MultiIndex, StateVector, SystemShape};
use crate::weights::{Weight, WeightModel};

fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn index_weight(model: &WeightModel, digits: &[usize]) -> Weight {
    let mut acc = vec![0; model.cartan_dim()];
    for &d in digits {
        crate::weights::add_assign(&mut acc, model.weight(d));
    }
    acc
}

fn lex_indices(d: usize, m: usize) -> impl Iterator<Item = MultiIndex> {
    let count = d.pow(m as u32);
    (0..count).map(move |mut lin| {
        let mut digits = vec![0; m];
        for x in digits.iter_mut().rev() {
            *x = lin % d;
            lin /= d;
        }
        MultiIndex(digits)
    })
}

/// Coefficients `b_r` for one Cartan component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BVector {
    pub values: Vec<Rational>,
}

impl BVector {
    pub fn sum(&self) -> Rational {
        self.values.iter().fold(Rational::zero(), |a, b| a + b)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Zero::is_zero)
    }

    pub fn scaled(&self, k: Rational) -> Self {
        Self {
            values: self.values.iter().map(|v| v * k).collect(),
        }
    }

    /// Exact value of `sum_r b_r n_r`.
    pub fn pairing(&self, frequencies: &[u32]) -> Rational {
        self.values
            .iter()
            .zip(frequencies)
            .fold(Rational::zero(), |acc, (b, &n)| {
                acc + b * Rational::from_integer(n as i128)
            })
    }

    pub fn annihilates(&self, matrix: &FrequencyMatrix) -> bool {
        matrix.rows().iter().all(|row| self.pairing(row).is_zero())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(to_f64).collect()
    }
}

/// `b_r = alpha_r - S / slots`, one vector per Cartan component.
pub fn b_vector(model: &WeightModel, slots: usize, s: &[i64]) -> Result<Vec<BVector>> {
    if slots == 0 {
        return Err(Error::ZeroSlots);
    }
    if s.len() != model.cartan_dim() {
        return Err(Error::WeightLength {
            expected: model.cartan_dim(),
            found: s.len(),
        });
    }
    Ok((0..model.cartan_dim())
        .map(|c| {
            let shift = Rational::new(s[c] as i128, slots as i128);
            BVector {
                values: model
                    .weights()
                    .iter()
                    .map(|a| Rational::from_integer(a[c] as i128) - shift)
                    .collect(),
            }
        })
        .collect())
}

/// A choice of fixed sites and their indices inside a sector `V_(w)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationContext {
    pub particles: usize,
    pub w: Weight,
    /// Fixed sites, 0-based, in the order matching `i0`.
    pub positions: Vec<usize>,
    pub i0: MultiIndex,
    pub s: Weight,
    /// Whether the remaining sites can reach weight `s` at all.
    pub feasible: bool,
}

impl RelationContext {
    pub fn new(
        shape: &SystemShape,
        w: &[i64],
        positions: Vec<usize>,
        i0: MultiIndex,
    ) -> Result<Self> {
        let n = shape.particles();
        let model = shape.model();
        if w.len() != model.cartan_dim() {
            return Err(Error::WeightLength {
                expected: model.cartan_dim(),
                found: w.len(),
            });
        }
        if positions.len() != i0.len() {
            return Err(Error::InvalidContext(format!(
                "{} positions for an index of length {}",
                positions.len(),
                i0.len()
            )));
        }
        if positions.len() >= n {
            return Err(Error::InvalidContext(format!(
                "M = {} must be below N = {n}",
                positions.len()
            )));
        }
        let mut sorted = positions.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != positions.len() || sorted.last().is_some_and(|&p| p >= n) {
            return Err(Error::InvalidContext(format!(
                "bad positions {positions:?} for N = {n}"
            )));
        }
        if i0.0.iter().any(|&d| d >= model.dim()) {
            return Err(Error::IndexOutOfRange(i0.0.clone()));
        }
        let base = index_weight(model, &i0.0);
        let s: Weight = w.iter().zip(&base).map(|(a, b)| a - b).collect();
        let feasible = is_feasible(model, n - positions.len(), &s);
        Ok(Self {
            particles: n,
            w: w.to_vec(),
            positions,
            i0,
            s,
            feasible,
        })
    }

    /// Context on the leading sites `0..M`.
    pub fn leading(shape: &SystemShape, w: &[i64], i0: MultiIndex) -> Result<Self> {
        let positions = (0..i0.len()).collect();
        Self::new(shape, w, positions, i0)
    }

    pub fn m(&self) -> usize {
        self.positions.len()
    }

    pub fn slots(&self) -> usize {
        self.particles - self.m()
    }

    pub fn b(&self, model: &WeightModel) -> Vec<BVector> {
        b_vector(model, self.slots(), &self.s).expect("context validated")
    }

    fn free_sites(&self) -> Vec<usize> {
        (0..self.particles)
            .filter(|p| !self.positions.contains(p))
            .collect()
    }
}

/// `T_r = sum_* rho^{fixed + *}_{(I0; r)}` over the free sites `*`.
pub fn star_sums(state: &StateVector, ctx: &RelationContext) -> Result<Vec<f64>> {
    let d = state.shape().site_dim();
    let mut t = vec![0.0; d];
    for star in ctx.free_sites() {
        let mut kept: Vec<(usize, Option<usize>)> = ctx
            .positions
            .iter()
            .zip(&ctx.i0.0)
            .map(|(&p, &i)| (p, Some(i)))
            .collect();
        kept.push((star, None));
        kept.sort_unstable();
        let sites: Vec<usize> = kept.iter().map(|k| k.0).collect();
        let diag = rdm::marginal_diagonal(state, &sites)?;
        for (r, tr) in t.iter_mut().enumerate() {
            let idx: Vec<usize> = kept.iter().map(|k| k.1.unwrap_or(r)).collect();
            *tr += diag[rdm::kept_linear(d, &idx)];
        }
    }
    Ok(t)
}

/// Outcome of evaluating one relation on a state.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationResidual {
    /// Signed `sum_r b_r T_r` per Cartan component.
    pub values: Vec<f64>,
    /// `|values|` per component, or zero when vacuous.
    pub residual: Vec<f64>,
    /// `|values| / sum_r |b_r| T_r` per component (zero when the denominator is).
    pub relative: Vec<f64>,
    /// The remaining sites cannot reach `S`, so the relation says nothing.
    pub vacuous: bool,
}

fn evaluate(b: &[BVector], t: &[f64], feasible: bool) -> RelationResidual {
    let mut out = RelationResidual {
        values: Vec::with_capacity(b.len()),
        residual: Vec::with_capacity(b.len()),
        relative: Vec::with_capacity(b.len()),
        vacuous: !feasible,
    };
    for bc in b {
        let bf = bc.to_f64();
        let v: f64 = bf.iter().zip(t).map(|(x, y)| x * y).sum();
        let scale: f64 = bf.iter().zip(t).map(|(x, y)| x.abs() * y).sum();
        out.values.push(v);
        if feasible {
            out.residual.push(v.abs());
            out.relative
                .push(if scale > 0.0 { v.abs() / scale } else { 0.0 });
        } else {
            out.residual.push(0.0);
            out.relative.push(0.0);
        }
    }
    out
}

fn check_support(state: &StateVector, w: &[i64]) -> Result<()> {
    match state.support_weight() {
        Some(d) if d != w => Err(Error::SupportMismatch {
            declared: d.to_vec(),
            requested: w.to_vec(),
        }),
        _ => Ok(()),
    }
}

/// Evaluates the relation of `ctx`. A state that declares its sector must
/// declare `ctx.w`; undeclared states are evaluated as given.
pub fn relation_residual(state: &StateVector, ctx: &RelationContext) -> Result<RelationResidual> {
    if ctx.particles != state.shape().particles() {
        return Err(Error::InvalidContext(format!(
            "context for N = {} applied to a state with N = {}",
            ctx.particles,
            state.shape().particles()
        )));
    }
    check_support(state, &ctx.w)?;
    let t = star_sums(state, ctx)?;
    Ok(evaluate(&ctx.b(state.shape().model()), &t, ctx.feasible))
}

/// One row of a relation sweep over leading-site contexts.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationRecord {
    pub m: usize,
    pub i0: MultiIndex,
    pub s: Weight,
    pub result: RelationResidual,
}

/// Evaluates every leading-site context with `M` in `ms` (values outside
/// `1..N` are skipped). Indices `I0` run in lexicographic order.
pub fn relation_sweep(
    state: &StateVector,
    w: &[i64],
    ms: impl IntoIterator<Item = usize>,
) -> Result<Vec<RelationRecord>> {
    let shape = state.shape();
    let (n, d, model) = (shape.particles(), shape.site_dim(), shape.model());
    if w.len() != model.cartan_dim() {
        return Err(Error::WeightLength {
            expected: model.cartan_dim(),
            found: w.len(),
        });
    }
    check_support(state, w)?;
    let mut out = Vec::new();
    for m in ms.into_iter().filter(|&m| m >= 1 && m < n) {
        let diags = (m..n)
            .map(|star| {
                let sites: Vec<usize> = (0..m).chain([star]).collect();
                rdm::marginal_diagonal(state, &sites)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut feasible: BTreeMap<Weight, (bool, Vec<BVector>)> = BTreeMap::new();
        for (lin, i0) in lex_indices(d, m).enumerate() {
            let base = index_weight(model, &i0.0);
            let s: Weight = w.iter().zip(&base).map(|(a, b)| a - b).collect();
            let (ok, b) = feasible.entry(s.clone()).or_insert_with(|| {
                (
                    is_feasible(model, n - m, &s),
                    b_vector(model, n - m, &s).expect("valid"),
                )
            });
            let mut t = vec![0.0; d];
            for diag in &diags {
                for (r, tr) in t.iter_mut().enumerate() {
                    *tr += diag[lin * d + r];
                }
            }
            out.push(RelationRecord {
                m,
                i0,
                s,
                result: evaluate(b, &t, *ok),
            });
        }
    }
    Ok(out)
}

/// Shift between the coefficient vectors of context sizes `M` and `M - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InductionShift {
    /// `S / (N - M) - S' / (N - M + 1)` per component.
    pub delta: Vec<Rational>,
    /// `b + delta`, per component.
    pub b_prime: Vec<BVector>,
}

pub fn induction_shift(
    model: &WeightModel,
    n: usize,
    m: usize,
    s: &[i64],
    s_prime: &[i64],
) -> Result<InductionShift> {
    if m == 0 || m >= n {
        return Err(Error::InvalidContext(format!(
            "induction needs 1 <= M < N, got M = {m}, N = {n}"
        )));
    }
    if s_prime.len() != model.cartan_dim() {
        return Err(Error::WeightLength {
            expected: model.cartan_dim(),
            found: s_prime.len(),
        });
    }
    let b = b_vector(model, n - m, s)?;
    let delta: Vec<Rational> = s
        .iter()
        .zip(s_prime)
        .map(|(&x, &y)| {
            Rational::new(x as i128, (n - m) as i128)
                - Rational::new(y as i128, (n - m + 1) as i128)
        })
        .collect();
    let b_prime = b
        .iter()
        .zip(&delta)
        .map(|(bc, dc)| BVector {
            values: bc.values.iter().map(|v| v + dc).collect(),
        })
        .collect();
    Ok(InductionShift { delta, b_prime })
}

/// Relation value at a context of size `M - 1` computed directly and as the
/// sum over the extra fixed index `s` of relations at size `M`, rewritten
/// through [`induction_shift`] as `sum_r (b'_r - delta(s)) T_r(I0', s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Subsumption {
    pub direct: Vec<f64>,
    pub combined: Vec<f64>,
}

impl Subsumption {
    pub fn max_abs_diff(&self) -> f64 {
        self.direct
            .iter()
            .zip(&self.combined)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Compares the two sides for the leading context `i0_prime` of size `M - 1`.
pub fn subsumption_check(
    state: &StateVector,
    w: &[i64],
    i0_prime: &MultiIndex,
) -> Result<Subsumption> {
    let shape = state.shape();
    let model = shape.model();
    let n = shape.particles();
    let m = i0_prime.len() + 1;
    let outer = RelationContext::leading(shape, w, i0_prime.clone())?;
    let direct = evaluate(&outer.b(model), &star_sums(state, &outer)?, true).values;
    let mut combined = vec![0.0; model.cartan_dim()];
    for extra in 0..model.dim() {
        let mut digits = i0_prime.0.clone();
        digits.push(extra);
        let inner = RelationContext::leading(shape, w, MultiIndex(digits))?;
        if m >= n {
            return Err(Error::InvalidContext(format!(
                "M = {m} leaves no free site for N = {n}"
            )));
        }
        let shift = induction_shift(model, n, m, &inner.s, &outer.s)?;
        let t = star_sums(state, &inner)?;
        for (c, acc) in combined.iter_mut().enumerate() {
            let dc = to_f64(&shift.delta[c]);
            *acc += shift.b_prime[c]
                .to_f64()
                .iter()
                .zip(&t)
                .map(|(b, x)| (b - dc) * x)
                .sum::<f64>();
        }
    }
    Ok(Subsumption { direct, combined })
}

/// Both sides of `sum_{* != p} sum_i rho^{p,*}_{(I0, i)} = (N - 1) rho^{p}_{I0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceOfTrace {
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub max_abs_diff: f64,
}

/// Left side from two-body marginals, right side from the one-body marginal
/// of `pivot` (0-based).
pub fn trace_of_trace_check(state: &StateVector, pivot: usize) -> Result<TraceOfTrace> {
    let n = state.shape().particles();
    let d = state.shape().site_dim();
    if pivot >= n {
        return Err(Error::InvalidSites(format!(
            "pivot {pivot} out of range for N = {n}"
        )));
    }
    let mut lhs = vec![0.0; d];
    for q in (0..n).filter(|&q| q != pivot) {
        let r = rdm::marginal(state, &[pivot, q])?;
        for (i0, l) in lhs.iter_mut().enumerate() {
            for i in 0..d {
                let idx = if pivot < q { i0 * d + i } else { i * d + i0 };
                *l += r.entry(idx, idx).re;
            }
        }
    }
    let others: Vec<usize> = (0..n).filter(|&q| q != pivot).collect();
    let one = rdm::partial_trace(state, &others)?;
    let rhs: Vec<f64> = one
        .diagonal_values()
        .iter()
        .map(|x| (n - 1) as f64 * x)
        .collect();
    let max_abs_diff = lhs
        .iter()
        .zip(&rhs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(TraceOfTrace {
        lhs,
        rhs,
        max_abs_diff,
    })
}

/// Deviation from maximal mixing of every marginal on at most half the sites.
#[derive(Debug, Clone, PartialEq)]
pub struct PerfectReport {
    /// `(kept sites, deviation)` by increasing size, then lexicographically.
    pub entries: Vec<(Vec<usize>, f64)>,
    pub max_deviation: f64,
}

pub fn perfect_deviation(state: &StateVector) -> Result<PerfectReport> {
    let n = state.shape().particles();
    let mut entries = Vec::new();
    for k in 1..=n / 2 {
        for mask in 0u64..(1 << n) {
            if mask.count_ones() as usize != k {
                continue;
            }
            let kept: Vec<usize> = (0..n).filter(|&p| mask >> p & 1 == 1).collect();
            let dev = rdm::marginal(state, &kept)?.deviation_from_maximally_mixed();
            entries.push((kept, dev));
        }
    }
    entries.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
    let max_deviation = entries.iter().map(|e| e.1).fold(0.0, f64::max);
    Ok(PerfectReport {
        entries,
        max_deviation,
    })
}

/// A context that rules out perfect tensors in `V_(w)`.
///
/// If every marginal on `M + 1 <= N/2` sites were maximally mixed, all
/// diagonals in the relation would be equal and the relation would force
/// `sum_r b_r = 0`. The witness has `sum_r b_r != 0` in `component`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub m: usize,
    pub i0: MultiIndex,
    pub s: Weight,
    pub component: usize,
    pub b: Vec<BVector>,
    /// `sum_r b_r` in `component`.
    pub contradiction: Rational,
}

fn witness_checks(model: &WeightModel, n: usize, w: &[i64]) -> Result<()> {
    if w.len() != model.cartan_dim() {
        return Err(Error::WeightLength {
            expected: model.cartan_dim(),
            found: w.len(),
        });
    }
    if n < 4 {
        return Err(Error::WitnessNeedsFourParticles(n));
    }
    if !is_feasible(model, n, w) {
        return Err(Error::EmptySector(w.to_vec()));
    }
    Ok(())
}

/// Witness at an explicit leading index `i0`, or `None` if that context does
/// not qualify (size, `S = 0`, or infeasible).
pub fn witness_at(
    model: &WeightModel,
    n: usize,
    w: &[i64],
    i0: &MultiIndex,
) -> Result<Option<Witness>> {
    witness_checks(model, n, w)?;
    let m = i0.len();
    if m == 0 || m + 1 > n / 2 {
        return Ok(None);
    }
    if i0.0.iter().any(|&d| d >= model.dim()) {
        return Err(Error::IndexOutOfRange(i0.0.clone()));
    }
    let base = index_weight(model, &i0.0);
    let s: Weight = w.iter().zip(&base).map(|(a, b)| a - b).collect();
    let Some(component) = s.iter().position(|&x| x != 0) else {
        return Ok(None);
    };
    if !is_feasible(model, n - m, &s) {
        return Ok(None);
    }
    let b = b_vector(model, n - m, &s)?;
    let contradiction = b[component].sum();
    debug_assert!(!contradiction.is_zero() || !model.is_balanced());
    if contradiction.is_zero() {
        return Ok(None);
    }
    Ok(Some(Witness {
        m,
        i0: i0.clone(),
        s,
        component,
        b,
        contradiction,
    }))
}

/// First witness with `M = 1, 2, ...` and `I0` in lexicographic order.
pub fn impossibility_witness(model: &WeightModel, n: usize, w: &[i64]) -> Result<Witness> {
    witness_checks(model, n, w)?;
    for m in 1..n / 2 {
        for i0 in lex_indices(model.dim(), m) {
            if let Some(found) = witness_at(model, n, w, &i0)? {
                return Ok(found);
            }
        }
    }
    Err(Error::NoWitness(w.to_vec()))
}

/// `-D S_c / (N - M)`: the value `sum_r b_r` takes when the weights sum to zero.
pub fn balanced_contradiction(model: &WeightModel, witness: &Witness, n: usize) -> Rational {
    Rational::new(
        -(model.dim() as i128) * witness.s[witness.component] as i128,
        (n - witness.m) as i128,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::frequency_matrix;
    use crate::state::{sample_multi_sector, sample_state};
    use crate::weights::{spin_model, su3_fundamental};
    use num_complex::Complex64;

    fn q(a: i128, b: i128) -> Rational {
        Rational::new(a, b)
    }

    fn shape(two_j: u32, n: usize) -> SystemShape {
        SystemShape::new(spin_model(two_j), n).unwrap()
    }

    #[test]
    fn b_vector_examples() {
        // spin units: weights -1, 0, 1 and S = 1 at four slots; doubled units scale both by 2
        let b = b_vector(&spin_model(2), 4, &[2]).unwrap();
        let spin_units: Vec<Rational> = b[0].values.iter().map(|v| v / 2).collect();
        assert_eq!(spin_units, [q(-5, 4), q(-1, 4), q(3, 4)]);
        let b = b_vector(&spin_model(2), 4, &[-2]).unwrap();
        let spin_units: Vec<Rational> = b[0].values.iter().map(|v| v / 2).collect();
        assert_eq!(spin_units, [q(-3, 4), q(1, 4), q(5, 4)]);
        let b = b_vector(&spin_model(1), 3, &[1]).unwrap();
        assert_eq!(b[0].values, [q(-4, 3), q(2, 3)]);
        assert!(b[0].pairing(&[1, 2]).is_zero());
        assert!(b_vector(&spin_model(1), 0, &[1]).is_err());
    }

    #[test]
    fn middle_column_agrees_up_to_scale() {
        let b = b_vector(&spin_model(2), 4, &[0]).unwrap();
        let reference = BVector {
            values: vec![q(-1, 4), q(0, 1), q(1, 4)],
        };
        assert_eq!(reference.scaled(q(8, 1)), b[0]);
        assert!(reference.annihilates(&frequency_matrix(&spin_model(2), 4, &[0]).unwrap()));
    }

    #[test]
    fn w_state_relation() {
        let s = shape(1, 3);
        let third = Complex64::new(1.0 / 3f64.sqrt(), 0.0);
        let psi = StateVector::from_entries(
            s.clone(),
            vec![
                (MultiIndex(vec![1, 1, 0]), third),
                (MultiIndex(vec![1, 0, 1]), third),
                (MultiIndex(vec![0, 1, 1]), third),
            ],
            Some(vec![1]),
        )
        .unwrap();
        let ctx = RelationContext::leading(&s, &[1], MultiIndex(vec![1])).unwrap();
        assert_eq!(ctx.b(s.model())[0].values, [q(-1, 1), q(1, 1)]);
        let t = star_sums(&psi, &ctx).unwrap();
        assert!((t[0] - 2.0 / 3.0).abs() < 1e-15 && (t[1] - 2.0 / 3.0).abs() < 1e-15);
        let res = relation_residual(&psi, &ctx).unwrap();
        assert!(!res.vacuous);
        assert!(res.residual[0] < 1e-15);
    }

    #[test]
    fn vacuous_context_reports_zero() {
        let s = shape(1, 3);
        let psi = sample_state(&s, Some(&[3]), 1).unwrap();
        let elsewhere = RelationContext::leading(&s, &[1], MultiIndex(vec![0])).unwrap();
        assert!(matches!(
            relation_residual(&psi, &elsewhere),
            Err(Error::SupportMismatch { .. })
        ));
        // I0 = down leaves S = 4 for two spin-1/2 sites: impossible
        let ctx = RelationContext::leading(&s, &[3], MultiIndex(vec![0])).unwrap();
        assert!(!ctx.feasible);
        let res = relation_residual(&psi, &ctx).unwrap();
        assert!(res.vacuous);
        assert_eq!(res.residual, [0.0]);
    }

    #[test]
    fn sweep_matches_single_context_evaluation() {
        let s = shape(2, 4);
        let psi = sample_state(&s, Some(&[2]), 3).unwrap();
        let sweep = relation_sweep(&psi, &[2], 1..4).unwrap();
        assert_eq!(sweep.len(), 3 + 9 + 27);
        for rec in &sweep {
            let ctx = RelationContext::leading(&s, &[2], rec.i0.clone()).unwrap();
            let one = relation_residual(&psi, &ctx).unwrap();
            assert_eq!(one.vacuous, rec.result.vacuous);
            assert!((one.values[0] - rec.result.values[0]).abs() < 1e-14);
            assert!(rec.result.residual[0] < 1e-12);
        }
    }

    #[test]
    fn permuted_positions_match_relabeled_state() {
        let s = shape(1, 4);
        let psi = sample_state(&s, Some(&[0]), 9).unwrap();
        let ctx = RelationContext::new(&s, &[0], vec![2, 0], MultiIndex(vec![1, 0])).unwrap();
        let res = relation_residual(&psi, &ctx).unwrap();
        assert!(res.residual[0] < 1e-12);
        // new site k = old perm[k]; bring old sites 2, 0 to the front
        let moved = psi.permute_sites(&[2, 0, 1, 3]).unwrap();
        let lead = RelationContext::leading(&s, &[0], MultiIndex(vec![1, 0])).unwrap();
        let other = relation_residual(&moved, &lead).unwrap();
        assert!((res.values[0] - other.values[0]).abs() < 1e-14);
    }

    #[test]
    fn two_sector_state_breaks_some_relation() {
        let s = shape(1, 3);
        let psi = sample_multi_sector(&s, &[vec![1], vec![-1]], 4).unwrap();
        let worst = relation_sweep(&psi, &[1], 1..3)
            .unwrap()
            .iter()
            .flat_map(|r| r.result.residual.clone())
            .fold(0.0, f64::max);
        assert!(worst > 1e-3);
    }

    #[test]
    fn induction_examples() {
        let m = spin_model(2);
        let z = induction_shift(&m, 5, 2, &[0], &[0]).unwrap();
        assert_eq!(z.delta, [q(0, 1)]);
        assert_eq!(z.b_prime, b_vector(&m, 3, &[0]).unwrap());
        let sh = induction_shift(&m, 5, 1, &[2], &[2]).unwrap();
        assert_eq!(sh.delta, [q(1, 10)]);
        let expect = b_vector(&m, 5, &[2]).unwrap();
        assert_eq!(sh.b_prime, expect);
        assert_eq!(expect[0].values, [q(-12, 5), q(-2, 5), q(8, 5)]);
        assert!(sh.b_prime[0].annihilates(&frequency_matrix(&m, 5, &[2]).unwrap()));
        assert!(induction_shift(&m, 5, 0, &[0], &[0]).is_err());
    }

    #[test]
    fn subsumption_holds_for_arbitrary_states() {
        for (two_j, n, seed) in [(1, 4, 1), (2, 4, 2), (1, 5, 3)] {
            let s = shape(two_j, n);
            let psi = sample_state(&s, None, seed).unwrap();
            for w in [vec![0], vec![2]] {
                for i0 in [
                    MultiIndex(vec![]),
                    MultiIndex(vec![1]),
                    MultiIndex(vec![0, 1]),
                ] {
                    let c = subsumption_check(&psi, &w, &i0).unwrap();
                    assert!(c.max_abs_diff() < 1e-12, "{c:?}");
                }
            }
        }
    }

    #[test]
    fn trace_of_trace() {
        for n in 2..=5 {
            let psi = sample_state(&shape(2, n), None, n as u64).unwrap();
            for p in 0..n {
                let t = trace_of_trace_check(&psi, p).unwrap();
                assert!(t.max_abs_diff < 1e-12);
                assert!((t.lhs.iter().sum::<f64>() - (n - 1) as f64).abs() < 1e-10);
            }
        }
        let prod = StateVector::basis_state(shape(1, 4), MultiIndex(vec![0; 4])).unwrap();
        let t = trace_of_trace_check(&prod, 0).unwrap();
        assert_eq!(t.lhs, [3.0, 0.0]);
    }

    #[test]
    fn perfect_deviation_examples() {
        let s2 = shape(1, 2);
        let h = Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        let bell = StateVector::from_entries(
            s2,
            vec![(MultiIndex(vec![0, 1]), h), (MultiIndex(vec![1, 0]), h)],
            None,
        )
        .unwrap();
        assert!(perfect_deviation(&bell).unwrap().max_deviation < 1e-12);
        let ghz = StateVector::from_entries(
            shape(1, 4),
            vec![(MultiIndex(vec![0; 4]), h), (MultiIndex(vec![1; 4]), h)],
            None,
        )
        .unwrap();
        let rep = perfect_deviation(&ghz).unwrap();
        assert_eq!(rep.entries.len(), 4 + 6);
        assert!(rep.entries[..4].iter().all(|e| e.1 < 1e-12));
        assert!((rep.max_deviation - 0.5).abs() < 1e-12);
    }

    #[test]
    fn witness_examples() {
        let m1 = spin_model(1);
        let up = witness_at(&m1, 4, &[0], &MultiIndex(vec![1]))
            .unwrap()
            .unwrap();
        assert_eq!(
            (up.m, up.s.clone(), up.contradiction),
            (1, vec![-1], q(2, 3))
        );
        // lexicographic search picks the lower index first
        let first = impossibility_witness(&m1, 4, &[0]).unwrap();
        assert_eq!(
            (first.i0.clone(), first.contradiction),
            (MultiIndex(vec![0]), q(-2, 3))
        );
        assert_eq!(first.contradiction, balanced_contradiction(&m1, &first, 4));

        let m2 = spin_model(2);
        let wit = impossibility_witness(&m2, 5, &[0]).unwrap();
        assert_eq!(
            (wit.m, wit.s.clone(), wit.contradiction),
            (1, vec![2], q(-3, 2))
        );

        assert!(matches!(
            impossibility_witness(&m1, 3, &[1]),
            Err(Error::WitnessNeedsFourParticles(3))
        ));
        assert!(matches!(
            impossibility_witness(&m1, 4, &[1]),
            Err(Error::EmptySector(_))
        ));
        let su3 = su3_fundamental();
        for n in 4..=6 {
            assert!(
                impossibility_witness(&su3, n, &[0, 0]).is_ok() || !is_feasible(&su3, n, &[0, 0])
            );
        }
    }
}
