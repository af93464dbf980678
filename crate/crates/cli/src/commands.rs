//! Subcommand implementations. Each returns its stdout text and exit code.

use std::fmt::Write;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use cwrdm_core::exact::primitive;
use cwrdm_core::marginals::{
    constant_weight_certificate, family_from_state, trivial_compatibility, Verdict,
};
use cwrdm_core::partitions::{enumerate_constrained, is_feasible, rank_analysis};
use cwrdm_core::rdm::partial_trace;
use cwrdm_core::relations::{
    b_vector, impossibility_witness, perfect_deviation, relation_sweep, witness_at, BVector,
    Witness,
};
use cwrdm_core::state::{
    achievable_weights, sample_multi_sector, sample_state, MultiIndex, SystemShape,
};
use cwrdm_core::weights::{Constraint, WeightModel};
use cwrdm_core::Error as CoreError;

use crate::args::{
    tolerance, CertifyArgs, Command, PartitionsArgs, SampleArgs, TraceStateArgs, VerifyArgs,
    WitnessArgs,
};
use crate::io::{read_family, read_state, to_json, write_text, FamilyJson, RdmJson, StateJson};
use crate::report::{csv_table, fmt_index, fmt_real, Provenance, Units};

pub const VERIFY_TOLERANCE: f64 = 1e-10;
pub const CERTIFY_TOLERANCE: f64 = cwrdm_core::marginals::CERTIFICATE_TOLERANCE;
pub const EIGEN_TOLERANCE: f64 = cwrdm_core::rdm::EIGEN_TOLERANCE;

pub const PASS: u8 = 0;
pub const FAIL: u8 = 1;
pub const VACUOUS: u8 = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
}

pub fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Partitions(a) => partitions(&a),
        Command::Verify(a) => verify(&a),
        Command::Certify(a) => certify(&a),
        Command::Witness(a) => witness(&a),
        Command::TraceState(a) => trace_state(&a),
        Command::Sample(a) => sample(&a),
    }
}

fn fmt_b(units: Units, b: &[BVector]) -> String {
    b.iter()
        .map(|c| {
            c.values
                .iter()
                .map(|v| units.rational(*v))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect::<Vec<_>>()
        .join(" | ")
}

fn model_provenance(p: &mut Provenance, model: &WeightModel) {
    p.push("model", model.label());
    p.push(
        "weights",
        model
            .weights()
            .iter()
            .map(|w| Units::Doubled.weight(w))
            .collect::<Vec<_>>()
            .join(" "),
    );
}

fn check_weight(model: &WeightModel, w: &[i64]) -> Result<()> {
    if w.len() != model.cartan_dim() {
        bail!(
            "weight {w:?} has {} components, the model has {}",
            w.len(),
            model.cartan_dim()
        );
    }
    Ok(())
}

pub fn partitions(a: &PartitionsArgs) -> Result<Outcome> {
    let model = a.model.require()?;
    if a.slots == 0 {
        bail!("--slots must be positive");
    }
    let mut p = Provenance::new("partitions");
    model_provenance(&mut p, &model);
    p.push("slots", a.slots).push("units", a.units.name());
    let mut out = p.render();

    let constraints: Vec<Constraint> = match a.quadratic {
        Some(s) => vec![Constraint::QuadraticWeight(s)],
        None => a
            .target
            .iter()
            .map(|t| Constraint::LinearWeight(t.0.clone()))
            .collect(),
    };
    let mut all_empty = true;
    for constraint in &constraints {
        if let Constraint::LinearWeight(t) = constraint {
            check_weight(&model, t)?;
        }
        let fm = enumerate_constrained(&model, a.slots, constraint)?;
        let label = match constraint {
            Constraint::LinearWeight(t) => format!("target={}", a.units.weight(t)),
            Constraint::QuadraticWeight(s) => format!("quadratic={s}"),
            Constraint::Custom { .. } => unreachable!("not exposed on the command line"),
        };
        writeln!(
            out,
            "\n# block: D={} slots={} {label}",
            model.dim(),
            a.slots
        )?;
        let header: Vec<String> = (1..=model.dim()).map(|r| format!("n_{r}")).collect();
        let rows: Vec<Vec<String>> = fm
            .rows()
            .iter()
            .map(|r| r.iter().map(|n| n.to_string()).collect())
            .collect();
        out.push_str(&csv_table(
            &header.iter().map(String::as_str).collect::<Vec<_>>(),
            &rows,
        ));
        if fm.is_empty() {
            writeln!(out, "# vacuous: no partitions reach this target")?;
            continue;
        }
        all_empty = false;
        if let Constraint::LinearWeight(t) = constraint {
            let b = b_vector(&model, a.slots, t)?;
            writeln!(out, "# b: {}", fmt_b(a.units, &b))?;
        }
        let rank = rank_analysis(&fm);
        writeln!(out, "# rank_A: {}", rank.rank_a)?;
        writeln!(out, "# rank_A_tilde: {}", rank.rank_a_tilde)?;
        match &rank.witness {
            Some(w) => writeln!(
                out,
                "# nonzero_sum_solution: {}",
                primitive(w)
                    .iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            )?,
            None => writeln!(out, "# nonzero_sum_solution: none")?,
        }
    }
    if let Some(path) = &a.out {
        write_text(path, &out)?;
    }
    Ok(Outcome {
        code: if all_empty { VACUOUS } else { PASS },
        stdout: out,
    })
}

/// The achievable sector closest to `w` in L1 distance, ties to the smaller.
fn nearest_other_sector(shape: &SystemShape, w: &[i64]) -> Option<Vec<i64>> {
    achievable_weights(shape)
        .into_iter()
        .filter(|x| x != w)
        .min_by_key(|x| {
            (
                x.iter().zip(w).map(|(a, b)| (a - b).abs()).sum::<i64>(),
                x.clone(),
            )
        })
}

pub fn verify(a: &VerifyArgs) -> Result<Outcome> {
    let start = Instant::now();
    let model = a.model.require()?;
    let w = a.w.0.clone();
    check_weight(&model, &w)?;
    let shape = SystemShape::new(model.clone(), a.n)?;
    let tol = tolerance(a.tolerance, VERIFY_TOLERANCE)?;
    if !is_feasible(&model, a.n, &w) {
        bail!("sector w = {} is empty for N = {}", a.units.weight(&w), a.n);
    }
    let m_min = a.m_min.unwrap_or(1).max(1);
    let m_max = a.m_max.unwrap_or(a.n - 1).min(a.n - 1);
    if m_min > m_max {
        bail!("empty M range {m_min}..={m_max}");
    }
    let other = if a.break_weight {
        Some(
            nearest_other_sector(&shape, &w)
                .context("--break-weight needs a second achievable sector")?,
        )
    } else {
        None
    };

    let mut p = Provenance::new("verify");
    model_provenance(&mut p, &model);
    p.push("N", a.n)
        .push("w", a.units.weight(&w))
        .push("seed", a.seed)
        .push("trials", a.trials);
    p.push("M", format!("{m_min}..={m_max}"))
        .push("tolerance", fmt_real(tol))
        .push("units", a.units.name());
    if let Some(o) = &other {
        p.push("break_weight", a.units.weight(o));
    }

    // per-context maxima over trials, in sweep order
    let mut table: Vec<(cwrdm_core::relations::RelationRecord, Vec<f64>, Vec<f64>)> = Vec::new();
    for t in 0..a.trials {
        let seed = a.seed.wrapping_add(t);
        let psi = match &other {
            None => sample_state(&shape, Some(&w), seed)?,
            Some(o) => sample_multi_sector(&shape, &[w.clone(), o.clone()], seed)?,
        };
        let records = relation_sweep(&psi, &w, m_min..=m_max)?;
        if table.is_empty() {
            table = records
                .into_iter()
                .map(|r| {
                    let (res, rel) = (r.result.residual.clone(), r.result.relative.clone());
                    (r, res, rel)
                })
                .collect();
        } else {
            for (row, r) in table.iter_mut().zip(records) {
                for c in 0..row.1.len() {
                    row.1[c] = row.1[c].max(r.result.residual[c]);
                    row.2[c] = row.2[c].max(r.result.relative[c]);
                }
            }
        }
    }

    let vacuous = table.iter().filter(|r| r.0.result.vacuous).count();
    let mut worst: Option<(f64, usize)> = None;
    let mut max_rel: f64 = 0.0;
    for (i, row) in table.iter().enumerate() {
        let m = row.1.iter().copied().fold(0.0, f64::max);
        max_rel = max_rel.max(row.2.iter().copied().fold(0.0, f64::max));
        if worst.is_none_or(|(x, _)| m > x) {
            worst = Some((m, i));
        }
    }
    let max_res = worst.map_or(0.0, |w| w.0);
    let code = if table.len() == vacuous {
        VACUOUS
    } else if max_res > tol {
        FAIL
    } else {
        PASS
    };

    if let Some(path) = &a.report {
        let rows: Vec<Vec<String>> = table
            .iter()
            .map(|(r, res, rel)| {
                let b = b_vector(&model, a.n - r.m, &r.s).expect("valid context");
                vec![
                    a.n.to_string(),
                    model.label().to_string(),
                    a.units.weight(&w),
                    r.m.to_string(),
                    fmt_index(&r.i0.0),
                    a.units.weight(&r.s),
                    fmt_b(a.units, &b),
                    res.iter()
                        .map(|x| fmt_real(*x))
                        .collect::<Vec<_>>()
                        .join(" "),
                    rel.iter()
                        .map(|x| fmt_real(*x))
                        .collect::<Vec<_>>()
                        .join(" "),
                    r.result.vacuous.to_string(),
                ]
            })
            .collect();
        let header = [
            "N", "model", "w", "M", "I0", "S", "b", "residual", "relative", "vacuous",
        ];
        write_text(path, &(p.render() + &csv_table(&header, &rows)))?;
    }

    let mut out = p.render();
    writeln!(out, "contexts: {}", table.len())?;
    writeln!(out, "vacuous: {vacuous}")?;
    writeln!(out, "max_residual: {}", fmt_real(max_res))?;
    writeln!(out, "max_relative: {}", fmt_real(max_rel))?;
    if let Some((_, i)) = worst {
        let r = &table[i].0;
        writeln!(
            out,
            "worst_context: M={} I0=({}) S={}",
            r.m,
            fmt_index(&r.i0.0),
            a.units.weight(&r.s)
        )?;
    }
    writeln!(
        out,
        "result: {}",
        ["pass", "fail", "vacuous"][code as usize]
    )?;
    writeln!(out, "# meta: runtime_ms={}", start.elapsed().as_millis())?;
    Ok(Outcome { code, stdout: out })
}

pub fn certify(a: &CertifyArgs) -> Result<Outcome> {
    let family = read_family(&a.family)?;
    let tol = tolerance(a.tolerance, CERTIFY_TOLERANCE)?;
    let shape = family.shape().clone();
    let n = shape.particles();
    let pivots: Vec<usize> = if a.pivot.is_empty() {
        let complete = family.complete_pivots();
        if complete.is_empty() {
            bail!("no site has all of its pairs; the family cannot be certified");
        }
        complete
    } else {
        a.pivot
            .iter()
            .map(|&p| {
                if p == 0 || p > n {
                    bail!("pivot {p} out of range 1..={n}")
                } else {
                    Ok(p - 1)
                }
            })
            .collect::<Result<_>>()?
    };
    let one_based = |v: &[(usize, usize)]| {
        v.iter()
            .map(|(p, q)| format!("({}, {})", p + 1, q + 1))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let cert = match constant_weight_certificate(&family, &pivots, tol) {
        Err(CoreError::MissingPairs(m)) => bail!("family is missing pairs {}", one_based(&m)),
        other => other?,
    };

    let mut p = Provenance::new("certify");
    model_provenance(&mut p, shape.model());
    p.push("N", n).push("family", a.family.display());
    p.push(
        "pivots",
        pivots
            .iter()
            .map(|x| (x + 1).to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    p.push("tolerance", fmt_real(tol))
        .push("units", a.units.name());
    let mut out = p.render();
    let (verdict, code) = match &cert.verdict {
        Verdict::Consistent(w0) => (format!("consistent(w0={})", a.units.weight(w0)), PASS),
        Verdict::Inconsistent => ("inconsistent".to_string(), FAIL),
        Verdict::Underdetermined => ("underdetermined".to_string(), VACUOUS),
    };
    writeln!(out, "verdict: {verdict}")?;
    match &cert.estimate {
        Some(e) => writeln!(out, "estimate: {}", a.units.reals(e))?,
        None => writeln!(out, "estimate: none")?,
    }
    writeln!(out, "spread: {}", a.units.real(cert.spread))?;
    writeln!(out, "snap_distance: {}", a.units.real(cert.snap_distance))?;
    for &pv in &pivots {
        writeln!(
            out,
            "# trivial_mismatch[{}]: {}",
            pv + 1,
            fmt_real(trivial_compatibility(&family, pv)?)
        )?;
    }
    let rows: Vec<Vec<String>> = cert
        .rows
        .iter()
        .map(|r| {
            vec![
                (r.pivot + 1).to_string(),
                (r.i0 + 1).to_string(),
                fmt_real(r.population),
                r.candidate
                    .as_ref()
                    .map_or("-".into(), |c| a.units.reals(c)),
                r.residual
                    .iter()
                    .map(|&x| a.units.real(x))
                    .collect::<Vec<_>>()
                    .join(","),
            ]
        })
        .collect();
    let table = csv_table(
        &["pivot", "i0", "population", "candidate", "residual"],
        &rows,
    );
    if let Some(path) = &a.report {
        write_text(path, &(p.render() + &table))?;
    }
    out.push_str(&table);
    Ok(Outcome { code, stdout: out })
}

const REFUSAL: &str = "refusal: a perfect-tensor witness needs N >= 4. It uses M >= 1 fixed sites with \
M + 1 <= floor(N/2), and no such M exists for N = 2, 3, where invariant tensors are always perfect.";

fn witness_lines(
    out: &mut String,
    model: &WeightModel,
    n: usize,
    w: &[i64],
    wit: &Witness,
    units: Units,
) -> Result<()> {
    writeln!(out, "M: {}", wit.m)?;
    writeln!(out, "I0: ({})", fmt_index(&wit.i0.0))?;
    writeln!(out, "S: {}", units.weight(&wit.s))?;
    writeln!(out, "b: {}", fmt_b(units, &wit.b))?;
    if model.cartan_dim() > 1 {
        writeln!(out, "component: {}", wit.component + 1)?;
    }
    writeln!(out, "sum_b: {}", units.rational(wit.contradiction))?;
    writeln!(out, "result: no perfect tensor in V_({})", units.weight(w))?;
    // every other qualifying index at the same M
    let d = model.dim();
    let mut rows = Vec::new();
    for lin in 0..d.pow(wit.m as u32) {
        let mut digits = vec![0; wit.m];
        let mut x = lin;
        for v in digits.iter_mut().rev() {
            *v = x % d;
            x /= d;
        }
        if let Some(alt) = witness_at(model, n, w, &MultiIndex(digits))? {
            rows.push(vec![
                fmt_index(&alt.i0.0),
                units.weight(&alt.s),
                units.rational(alt.contradiction),
            ]);
        }
    }
    writeln!(out, "# qualifying contexts at M = {}", wit.m)?;
    out.push_str(&csv_table(&["I0", "S", "sum_b"], &rows));
    Ok(())
}

pub fn witness(a: &WitnessArgs) -> Result<Outcome> {
    let mut p = Provenance::new("witness");
    p.push("units", a.units.name());
    let (model, n, w, state) = match &a.state {
        Some(path) => {
            let psi = read_state(path)?;
            let shape = psi.shape().clone();
            let w =
                a.w.as_ref()
                    .map(|x| x.0.clone())
                    .or_else(|| psi.support_weight().map(<[i64]>::to_vec));
            p.push("state", path.display());
            (shape.model().clone(), shape.particles(), w, Some(psi))
        }
        None => {
            let n = a.n.context("--n is required without --state")?;
            let w =
                a.w.as_ref()
                    .context("--w is required without --state")?
                    .0
                    .clone();
            (a.model.require()?, n, Some(w), None)
        }
    };
    model_provenance(&mut p, &model);
    p.push("N", n);
    if let Some(w) = &w {
        check_weight(&model, w)?;
        p.push("w", a.units.weight(w));
    }
    let mut out = p.render();
    let mut code = PASS;

    if let Some(psi) = &state {
        let rep = perfect_deviation(psi)?;
        let rows: Vec<Vec<String>> = rep
            .entries
            .iter()
            .map(|(k, dev)| vec![fmt_index(k), fmt_real(*dev)])
            .collect();
        out.push_str(&csv_table(&["kept", "deviation"], &rows));
        writeln!(out, "max_deviation: {}", fmt_real(rep.max_deviation))?;
    }

    match (&w, n) {
        (Some(_), n) if n < 4 => {
            writeln!(out, "{REFUSAL}")?;
            if state.is_none() {
                code = VACUOUS;
            }
        }
        (Some(w), n) => {
            let found = match &a.i0 {
                Some(i0) => witness_at(&model, n, w, &MultiIndex(i0.0.clone()))?,
                None => Some(impossibility_witness(&model, n, w)?),
            };
            match found {
                Some(wit) => witness_lines(&mut out, &model, n, w, &wit, a.units)?,
                None => {
                    writeln!(out, "no witness at the requested index (needs S != 0, a feasible remainder and M + 1 <= floor(N/2))")?;
                    code = VACUOUS;
                }
            }
        }
        (None, _) => writeln!(out, "# no sector weight given; witness skipped")?,
    }
    Ok(Outcome { code, stdout: out })
}

pub fn trace_state(a: &TraceStateArgs) -> Result<Outcome> {
    let psi = read_state(&a.state)?;
    let shape = psi.shape();
    let n = shape.particles();
    let tol = tolerance(a.tolerance, EIGEN_TOLERANCE)?;
    let traced: Vec<usize> = match (&a.trace, &a.kept) {
        (Some(t), _) => t.0.clone(),
        (_, Some(k)) => (0..n).filter(|p| !k.0.contains(p)).collect(),
        _ => unreachable!("clap requires one of --trace, --kept"),
    };
    let r = partial_trace(&psi, &traced)?;
    let json = to_json(&RdmJson::from_rdm(shape.model(), n, &r));

    let eig = r.eigenvalues();
    let min = eig.first().copied().unwrap_or(0.0);
    let rank = eig.iter().filter(|&&x| x > tol).count();
    let bound = 1 + shape.site_dim().pow(traced.len() as u32);
    let ok = min >= -tol && rank <= bound && (r.trace() - psi.norm_sqr()).abs() <= 1e-12;

    let mut p = Provenance::new("trace-state");
    model_provenance(&mut p, shape.model());
    p.push("N", n).push("state", a.state.display());
    p.push("traced", fmt_index(&traced))
        .push("tolerance", fmt_real(tol));
    let mut report = p.render();
    writeln!(report, "kept: {}", fmt_index(r.kept()))?;
    writeln!(report, "trace: {}", fmt_real(r.trace()))?;
    writeln!(report, "state_norm_sqr: {}", fmt_real(psi.norm_sqr()))?;
    writeln!(report, "asymmetry: {}", fmt_real(r.asymmetry()))?;
    writeln!(report, "min_eigenvalue: {}", fmt_real(min))?;
    writeln!(report, "rank: {rank}")?;
    writeln!(report, "rank_bound: {bound}")?;
    writeln!(
        report,
        "deviation_from_maximally_mixed: {}",
        fmt_real(r.deviation_from_maximally_mixed())
    )?;
    writeln!(report, "result: {}", if ok { "pass" } else { "fail" })?;
    if a.diagonal {
        let rows: Vec<Vec<String>> = r
            .diagonal()
            .into_iter()
            .map(|(k, v)| vec![fmt_index(&k.0), fmt_real(v)])
            .collect();
        report.push_str(&csv_table(&["index", "value"], &rows));
    }
    let code = if ok { PASS } else { FAIL };
    match &a.out {
        Some(path) => {
            write_text(path, &json)?;
            Ok(Outcome {
                code,
                stdout: report,
            })
        }
        None => {
            eprint!("{report}");
            Ok(Outcome { code, stdout: json })
        }
    }
}

pub fn sample(a: &SampleArgs) -> Result<Outcome> {
    let model = a.model.require()?;
    let shape = SystemShape::new(model.clone(), a.n)?;
    let psi = match &a.w {
        None => sample_state(&shape, None, a.seed)?,
        Some(w) if a.also_w.is_empty() => {
            check_weight(&model, &w.0)?;
            sample_state(&shape, Some(&w.0), a.seed)?
        }
        Some(w) => {
            let mut sectors = vec![w.0.clone()];
            sectors.extend(a.also_w.iter().map(|x| x.0.clone()));
            for s in &sectors {
                check_weight(&model, s)?;
            }
            sample_multi_sector(&shape, &sectors, a.seed)?
        }
    };
    let json = to_json(&StateJson::from_state(&psi));

    let mut p = Provenance::new("sample");
    model_provenance(&mut p, &model);
    p.push("N", a.n).push("seed", a.seed);
    let sectors: Vec<String> =
        a.w.iter()
            .chain(&a.also_w)
            .map(|x| Units::Doubled.weight(&x.0))
            .collect();
    p.push(
        "sectors",
        if sectors.is_empty() {
            "all".into()
        } else {
            sectors.join(" ")
        },
    );
    let mut report = p.render();
    writeln!(report, "amplitudes: {}", psi.len())?;
    writeln!(report, "norm_sqr: {}", fmt_real(psi.norm_sqr()))?;

    if let Some(path) = &a.family_out {
        let pivot = match a.family_pivot {
            Some(0) => bail!("--family-pivot is 1-based"),
            Some(x) if x > a.n => bail!("--family-pivot {x} out of range 1..={}", a.n),
            other => other.map(|x| x - 1),
        };
        let family = family_from_state(&psi, pivot)?;
        write_text(path, &to_json(&FamilyJson::from_family(&family)))?;
        writeln!(report, "family_pairs: {}", family.len())?;
    }
    match &a.out {
        Some(path) => {
            write_text(path, &json)?;
            Ok(Outcome {
                code: PASS,
                stdout: report,
            })
        }
        None => {
            eprint!("{report}");
            Ok(Outcome {
                code: PASS,
                stdout: json,
            })
        }
    }
}
