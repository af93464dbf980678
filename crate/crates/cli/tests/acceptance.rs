//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned.
//!
//! The process exits nonzero when a criterion fails unless it is listed in
//! `KNOWN_RED` (a criterion whose literal statement is false; the line still
//! reads FAIL and names the counterexamples).

use std::collections::BTreeSet;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use cwrdm_core::marginals::{
    constant_weight_certificate, family_from_state, weight_variance, Verdict,
};
use cwrdm_core::partitions::{
    enumerate_partitions, frequency_matrix, partition_count, rank_analysis,
};
use cwrdm_core::rdm::partial_trace;
use cwrdm_core::relations::{
    b_vector, impossibility_witness, induction_shift, perfect_deviation, relation_sweep,
    trace_of_trace_check, BVector,
};
use cwrdm_core::state::{
    achievable_weights, sample_multi_sector, sample_state, weight_components, SystemShape,
};
use cwrdm_core::weights::{spin_model, su3_fundamental, WeightModel};
use cwrdm_core::Rational;
use num_traits::Zero;

const RESIDUAL_TOL: f64 = 1e-10;
const NEGATIVE_CONTROL_MIN: f64 = 1e-3;
const TRACE_DIFF_TOL: f64 = 1e-12;
const TRACE_SUM_TOL: f64 = 1e-10;
const VARIANCE_TOL: f64 = 1e-10;
const CERT_TOL: f64 = 1e-6;
const PERFECT_MIN: f64 = 1e-3;
const HERMITIAN_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

/// Criteria expected to fail as literally stated.
const KNOWN_RED: &[u32] = &[8];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn q(a: i128, b: i128) -> Rational {
    Rational::new(a, b)
}

fn sectors_of(model: &WeightModel, slots: usize) -> Vec<i64> {
    let max = model.weights().iter().map(|w| w[0].abs()).max().unwrap() * slots as i64;
    (-max..=max).collect()
}

fn parse_blocks(stdout: &str) -> Vec<(BTreeSet<Vec<u32>>, Vec<Rational>)> {
    let mut blocks = Vec::new();
    for chunk in stdout.split("# block:").skip(1) {
        let rows: BTreeSet<Vec<u32>> = chunk
            .lines()
            .skip(2)
            .filter(|l| !l.starts_with('#') && !l.is_empty())
            .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
            .collect();
        let b = chunk
            .lines()
            .find_map(|l| l.strip_prefix("# b: "))
            .map(|s| {
                s.split(' ')
                    .map(|x| x.parse::<Rational>().unwrap())
                    .collect()
            })
            .unwrap_or_default();
        blocks.push((rows, b));
    }
    blocks
}

fn c1() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_cwrdm"))
        .args([
            "partitions",
            "--spin",
            "2",
            "--slots",
            "4",
            "--target",
            "2",
            "--target",
            "0",
            "--target",
            "-2",
        ])
        .args(["--units", "spin"])
        .env_remove("CWRDM_TOLERANCE")
        .output()
        .expect("binary runs");
    if !out.status.success() {
        return outcome(false, format!("exit status {}", out.status));
    }
    let blocks = parse_blocks(&String::from_utf8_lossy(&out.stdout));
    let set = |rows: &[[u32; 3]]| rows.iter().map(|r| r.to_vec()).collect::<BTreeSet<_>>();
    let want = [
        set(&[[0, 3, 1], [1, 1, 2]]),
        set(&[[2, 0, 2], [1, 2, 1], [0, 4, 0]]),
        set(&[[2, 1, 1], [1, 3, 0]]),
    ];
    if blocks.len() != 3 {
        return outcome(false, format!("{} blocks", blocks.len()));
    }
    let matrices = blocks.iter().zip(&want).all(|(b, w)| &b.0 == w);
    let b_top = blocks[0].1 == [q(-5, 4), q(-1, 4), q(3, 4)];
    let b_bottom = blocks[2].1 == [q(-3, 4), q(1, 4), q(5, 4)];
    // reference column (-1/4, 0, 1/4) for target 0 holds up to a nonzero multiple
    let reference = [q(-1, 4), q(0, 1), q(1, 4)];
    let mid = &blocks[1].1;
    let k = mid[0] / reference[0];
    let b_mid = !k.is_zero() && mid.iter().zip(&reference).all(|(x, y)| *x == k * y);
    outcome(
        matrices && b_top && b_bottom && b_mid,
        format!("matrices {matrices}, b(target 2) {b_top}, b(target -2) {b_bottom}, b(target 0) = {k} x reference"),
    )
}

fn c2() -> Outcome {
    let (mut contexts, mut rows, mut bad) = (0, 0, Vec::new());
    for two_j in 1..=4 {
        let model = spin_model(two_j);
        for slots in 2..=6 {
            for s in sectors_of(&model, slots) {
                let a = frequency_matrix(&model, slots, &[s]).unwrap();
                if a.is_empty() {
                    continue;
                }
                contexts += 1;
                rows += a.len();
                if !b_vector(&model, slots, &[s]).unwrap()[0].annihilates(&a) {
                    bad.push((two_j, slots, s));
                }
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("{contexts} contexts, {rows} frequency rows, exact; failures {bad:?}"),
    )
}

fn c3() -> Outcome {
    let mut max_res: f64 = 0.0;
    let mut states = 0;
    let mut controls = (0, 0);
    for n in 3..=6 {
        for two_j in 1..=3 {
            let shape = SystemShape::new(spin_model(two_j), n).unwrap();
            let sectors = achievable_weights(&shape);
            for (k, w) in sectors.iter().enumerate() {
                for t in 0..100 {
                    let seed = (n * 1000 + two_j as usize * 100) as u64 * 1000 + k as u64 * 100 + t;
                    let psi = sample_state(&shape, Some(w), seed).unwrap();
                    for rec in relation_sweep(&psi, w, 1..n).unwrap() {
                        max_res = max_res.max(rec.result.residual[0]);
                    }
                    states += 1;
                }
                // negative control: mix in a neighbouring sector
                let other = &sectors[if k + 1 < sectors.len() { k + 1 } else { k - 1 }];
                let mixed =
                    sample_multi_sector(&shape, &[w.clone(), other.clone()], 7 + k as u64).unwrap();
                let worst = relation_sweep(&mixed, w, 1..n)
                    .unwrap()
                    .iter()
                    .map(|r| r.result.residual[0])
                    .fold(0.0, f64::max);
                controls.0 += 1;
                if worst > NEGATIVE_CONTROL_MIN {
                    controls.1 += 1;
                }
            }
        }
    }
    outcome(
        max_res <= RESIDUAL_TOL && controls.0 == controls.1,
        format!(
            "{states} sector states, max residual {max_res:.2e} (tol {RESIDUAL_TOL:e}); two-sector controls above {NEGATIVE_CONTROL_MIN:e}: {}/{}",
            controls.1, controls.0
        ),
    )
}

fn c4() -> Outcome {
    let (mut checks, mut bad) = (0, Vec::new());
    for two_j in 1..=4 {
        let model = spin_model(two_j);
        for slots in 2..=6 {
            // context size M = 1 with N = slots + 1; M' = 0 has slots + 1 free sites
            let n = slots + 1;
            for s_prime in sectors_of(&model, slots + 1) {
                let a = frequency_matrix(&model, slots + 1, &[s_prime]).unwrap();
                if a.is_empty() {
                    continue;
                }
                let direct = &b_vector(&model, slots + 1, &[s_prime]).unwrap()[0];
                for alpha in model.weights() {
                    let s = s_prime - alpha[0];
                    let shift = induction_shift(&model, n, 1, &[s], &[s_prime]).unwrap();
                    let b: &BVector = &shift.b_prime[0];
                    let expect_delta = q(s as i128, slots as i128) - q(s_prime as i128, n as i128);
                    checks += 1;
                    if b != direct || !b.annihilates(&a) || shift.delta[0] != expect_delta {
                        bad.push((two_j, slots, s, s_prime));
                    }
                }
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{checks} shifts equal b_vector(slots+1, S') and annihilate exactly; failures {bad:?}"
        ),
    )
}

fn c5() -> Outcome {
    let (mut diff, mut sum_err, mut cases): (f64, f64, usize) = (0.0, 0.0, 0);
    for n in 2..=6 {
        for two_j in 1..=2 {
            let shape = SystemShape::new(spin_model(two_j), n).unwrap();
            for seed in 0..10 {
                let psi = sample_state(&shape, None, 500 + seed).unwrap();
                for p in 0..n {
                    let t = trace_of_trace_check(&psi, p).unwrap();
                    diff = diff.max(t.max_abs_diff);
                    sum_err = sum_err.max((t.lhs.iter().sum::<f64>() - (n - 1) as f64).abs());
                    cases += 1;
                }
            }
        }
    }
    outcome(
        diff <= TRACE_DIFF_TOL && sum_err <= TRACE_SUM_TOL,
        format!("{cases} (state, pivot) cases, max |lhs - rhs| {diff:.2e}, max |sum lhs - (N-1)| {sum_err:.2e}"),
    )
}

fn c6() -> Outcome {
    let (mut agree, mut recovered, mut single_total) = (0, 0, 0);
    let mut mismatches = Vec::new();
    for i in 0..200u64 {
        let two_j = 1 + (i % 2) as u32;
        let n = 3 + ((i / 2) % 3) as usize;
        let shape = SystemShape::new(spin_model(two_j), n).unwrap();
        let sectors = achievable_weights(&shape);
        let k = (i as usize * 7) % sectors.len();
        let single = i < 100;
        let chosen = if single {
            vec![sectors[k].clone()]
        } else {
            vec![
                sectors[k].clone(),
                sectors[(k + 1 + i as usize % 3) % sectors.len()].clone(),
            ]
        };
        let psi = sample_multi_sector(&shape, &chosen, 9000 + i).unwrap();
        let pivots: Vec<usize> = (0..n).collect();
        let cert =
            constant_weight_certificate(&family_from_state(&psi, None).unwrap(), &pivots, CERT_TOL)
                .unwrap();
        // best integer centre: the rounded mean weight
        let comps = weight_components(&psi);
        let mean: f64 = comps.iter().map(|(w, c)| w[0] as f64 * c.probability).sum();
        let centre = vec![mean.round() as i64];
        let low_variance = weight_variance(&psi, &centre).unwrap().variance[0] <= VARIANCE_TOL;
        let ok = match &cert.verdict {
            Verdict::Consistent(w0) => low_variance && *w0 == centre,
            _ => !low_variance,
        };
        if ok {
            agree += 1;
        } else {
            mismatches.push(i);
        }
        if single {
            single_total += 1;
            if cert.verdict == Verdict::Consistent(chosen[0].clone()) {
                recovered += 1;
            }
        }
    }
    outcome(
        agree == 200 && recovered == single_total,
        format!("verdict matches variance criterion {agree}/200; true w recovered {recovered}/{single_total}; mismatches {mismatches:?}"),
    )
}

fn c7() -> Outcome {
    let (mut witnesses, mut bad) = (0, Vec::new());
    for two_j in 1..=2 {
        let model = spin_model(two_j);
        let d = model.dim() as i128;
        for n in 4..=7 {
            let shape = SystemShape::new(model.clone(), n).unwrap();
            for w in achievable_weights(&shape) {
                match impossibility_witness(&model, n, &w) {
                    Ok(wit) => {
                        let expect = q(-d * wit.s[0] as i128, (n - wit.m) as i128);
                        witnesses += 1;
                        if wit.contradiction != expect
                            || wit.contradiction.is_zero()
                            || wit.m + 1 > n / 2
                        {
                            bad.push((two_j, n, w[0]));
                        }
                    }
                    Err(_) => bad.push((two_j, n, w[0])),
                }
            }
        }
    }
    let mut min_dev = f64::INFINITY;
    for two_j in 1..=2 {
        let shape = SystemShape::new(spin_model(two_j), 4).unwrap();
        for seed in 0..50 {
            let psi = sample_state(&shape, Some(&[0]), 7000 + seed).unwrap();
            min_dev = min_dev.min(perfect_deviation(&psi).unwrap().max_deviation);
        }
    }
    outcome(
        bad.is_empty() && min_dev > PERFECT_MIN,
        format!("{witnesses} witnesses exact, failures {bad:?}; min over 100 V_(0) samples of max deviation {min_dev:.3}"),
    )
}

fn c8() -> Outcome {
    let (mut contexts, mut rank_fail, mut dich_fail) = (0, Vec::new(), Vec::new());
    for two_j in 2..=4 {
        let model = spin_model(two_j);
        let d = model.dim();
        for slots in 3..=5 {
            for s in sectors_of(&model, slots) {
                let a = frequency_matrix(&model, slots, &[s]).unwrap();
                if a.is_empty() {
                    continue;
                }
                contexts += 1;
                let r = rank_analysis(&a);
                if r.rank_a != d - 1 {
                    rank_fail.push((d, slots, s, a.len(), r.rank_a, d - 1));
                }
                if (r.rank_a_tilde == r.rank_a + 1) != (s != 0) {
                    dich_fail.push((d, slots, s));
                }
            }
        }
    }
    let examples: Vec<String> = rank_fail
        .iter()
        .take(3)
        .map(|(d, sl, s, p, r, _)| format!("D={d} slots={sl} S={s}: P={p} rank_A={r}"))
        .collect();
    let boundary = rank_fail
        .iter()
        .all(|&(_, _, _, p, r, dm1)| p < dm1 && r == p);
    outcome(
        rank_fail.is_empty() && dich_fail.is_empty(),
        format!(
            "{contexts} contexts; rank_A != D-1 in {} (every one has P < D-1 and rank_A = P: {boundary}; e.g. {}); dichotomy failures {}",
            rank_fail.len(),
            examples.join("; "),
            dich_fail.len()
        ),
    )
}

fn c9() -> Outcome {
    let (mut cases, mut bad) = (0, Vec::new());
    for two_j in 1..=4 {
        let model = spin_model(two_j);
        for slots in 1..=8 {
            for s in sectors_of(&model, slots) {
                let len = enumerate_partitions(&model, slots, &[s]).unwrap().len();
                if len == 0 {
                    continue;
                }
                cases += 1;
                if partition_count(&model, slots, s).unwrap() as usize != len {
                    bad.push((two_j, slots, s));
                }
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("{cases} feasible targets, count equals enumeration; failures {bad:?}"),
    )
}

fn c10() -> Outcome {
    let model = su3_fundamental();
    let (mut max_res, mut sectors, mut states, mut witnesses): (f64, usize, usize, usize) =
        (0.0, 0, 0, 0);
    let mut bad = Vec::new();
    for n in 4..=5 {
        let shape = SystemShape::new(model.clone(), n).unwrap();
        for (k, w) in achievable_weights(&shape).into_iter().enumerate() {
            sectors += 1;
            for t in 0..50 {
                let psi =
                    sample_state(&shape, Some(&w), (n * 10_000 + k * 100) as u64 + t).unwrap();
                for rec in relation_sweep(&psi, &w, 1..n).unwrap() {
                    max_res = rec.result.residual.iter().copied().fold(max_res, f64::max);
                }
                states += 1;
            }
            match impossibility_witness(&model, n, &w) {
                Ok(wit) if !wit.contradiction.is_zero() => witnesses += 1,
                _ => bad.push((n, w.clone())),
            }
        }
    }
    outcome(
        max_res <= RESIDUAL_TOL && bad.is_empty(),
        format!("{sectors} sectors, {states} states, max residual {max_res:.2e} per component; witnesses {witnesses}/{sectors}, failures {bad:?}"),
    )
}

fn c11() -> Outcome {
    let cells: Vec<(usize, u32)> = (3..=6).flat_map(|n| (1..=3).map(move |j| (n, j))).collect();
    let (mut herm, mut trace, mut min_eig, mut rank_violations, mut marginals): (
        f64,
        f64,
        f64,
        usize,
        usize,
    ) = (0.0, 0.0, f64::INFINITY, 0, 0);
    for i in 0..100u64 {
        let (n, two_j) = cells[i as usize % cells.len()];
        let shape = SystemShape::new(spin_model(two_j), n).unwrap();
        let sectors = achievable_weights(&shape);
        let w = &sectors[(i as usize * 5) % sectors.len()];
        let psi = sample_state(&shape, Some(w), 11_000 + i).unwrap();
        // three traced sets per state: one site, the first half, all but one site
        let sets: [Vec<usize>; 3] = [
            vec![(i as usize) % n],
            (0..n / 2).collect(),
            (1..n).collect(),
        ];
        for traced in sets {
            let r = partial_trace(&psi, &traced).unwrap();
            marginals += 1;
            herm = herm.max(r.asymmetry()).max(r.hermiticity_error());
            trace = trace.max((r.trace() - psi.norm_sqr()).abs());
            min_eig = min_eig.min(r.min_eigenvalue());
            if r.rank(PSD_TOL) > 1 + shape.site_dim().pow(traced.len() as u32) {
                rank_violations += 1;
            }
        }
    }
    outcome(
        herm <= HERMITIAN_TOL && trace <= TRACE_DIFF_TOL && min_eig >= -PSD_TOL && rank_violations == 0,
        format!(
            "{marginals} marginals: max asymmetry {herm:.2e}, max |tr - norm^2| {trace:.2e}, min eigenvalue {min_eig:.2e}, rank bound violations {rank_violations}"
        ),
    )
}

fn main() -> ExitCode {
    type Check = fn() -> Outcome;
    let criteria: [(u32, &str, Check, Duration); 11] = [
        (1, "spin-1 frequency tables", c1, Duration::from_secs(1)),
        (2, "b-vector annihilation", c2, Duration::from_secs(10)),
        (3, "sector relation residuals", c3, Duration::from_secs(120)),
        (4, "induction subsumption", c4, Duration::from_secs(10)),
        (5, "trace-of-trace identity", c5, Duration::from_secs(60)),
        (6, "certificate equivalence", c6, Duration::from_secs(60)),
        (7, "perfect-tensor obstruction", c7, Duration::from_secs(60)),
        (8, "rank structure", c8, Duration::from_secs(10)),
        (9, "partition-count formula", c9, Duration::from_secs(5)),
        (10, "SU(3) generalization", c10, Duration::from_secs(120)),
        (11, "RDM sanity", c11, Duration::from_secs(60)),
    ];
    let mut unexpected = Vec::new();
    for (id, name, check, limit) in criteria {
        let start = Instant::now();
        let o = check();
        let elapsed = start.elapsed();
        let pass = o.pass && elapsed <= limit;
        println!(
            "criterion {id:>2} [{}] {name}: {} ({:.2} s, limit {} s)",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
        if pass == KNOWN_RED.contains(&id) {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: all criteria as expected (known red: {KNOWN_RED:?})");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
