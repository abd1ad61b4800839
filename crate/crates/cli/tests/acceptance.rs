use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use opertuple_core::defects::partial_isometry_defect;
use opertuple_core::generators::{
    random_commuting_pair, random_unitary, reducing_partial_isometry,
};
use opertuple_core::minverse::{audit_power_sum_expansion, expand_power_sum, CoefficientMode};
use opertuple_core::spectra::{audit_eigen_conjugation, linf_distance};
use opertuple_core::*;
use serde_json::Value;

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn tol() -> ToleranceModel {
    ToleranceModel::default()
}

fn ensure(cond: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opertuple"))
        .args(args)
        .env_remove("OPERTUPLE_SEED")
        .output()
        .expect("binary runs")
}

fn example_21() -> Check {
    let mut worst: f64 = 0.0;
    for d in 1..=3 {
        let ex = worked_example(&format!("2.1({d})")).map_err(err)?;
        let r = partial_isometry_defect(&ex.tuple, 1, &MultiIndex::ones(d), &tol()).map_err(err)?;
        ensure(
            r.norm <= 1e-12,
            format!("d = {d}: defect norm {:e}", r.norm),
        )?;
        worst = worst.max(r.norm);
    }
    Ok(format!("max defect norm {worst:e}"))
}

fn example_22() -> Check {
    let ex = worked_example("2.2").map_err(err)?;
    for j in 0..2 {
        let single = OperatorTuple::new(vec![ex.tuple.get(j).clone()], &tol()).map_err(err)?;
        let r = partial_isometry_defect(&single, 2, &MultiIndex::ones(1), &tol()).map_err(err)?;
        ensure(r.norm <= 1e-12, format!("T{} defect {:e}", j + 1, r.norm))?;
    }
    let pair = partial_isometry_defect(&ex.tuple, 2, &MultiIndex::ones(2), &tol()).map_err(err)?;
    ensure(!pair.is_zero, "pair classified as partial isometry")?;
    ensure(
        (pair.norm - 3f64.sqrt()).abs() <= 1e-10,
        format!("pair defect {}", pair.norm),
    )?;
    Ok(format!("pair defect norm {}", pair.norm))
}

fn golden() -> Check {
    let a = ((1.0 + 5f64.sqrt()) / 2.0).sqrt();
    for d in 1..=3 {
        let ex = worked_example(&format!("3.golden({d})")).map_err(err)?;
        let q = MultiIndex::unit(d, 0);
        let r = partial_isometry_defect(&ex.tuple, 2, &q, &tol()).map_err(err)?;
        ensure(r.norm <= 1e-12, format!("d = {d}: defect {:e}", r.norm))?;
        let spec = joint_spectrum(&ex.tuple, 0, &tol()).map_err(err)?;
        let mut top = vec![C64::new(0.0, 0.0); d];
        top[0] = C64::new(a, 0.0);
        let expected = [top, vec![C64::new(0.0, 0.0); d]];
        let found: Vec<&Vec<C64>> = spec.point_spectrum.iter().map(|p| &p.lambda).collect();
        ensure(
            found.len() == 2,
            format!("d = {d}: {} eigenvalues", found.len()),
        )?;
        for e in &expected {
            ensure(
                found.iter().any(|f| linf_distance(f, e) <= 1e-8),
                format!("d = {d}: missing {e:?}"),
            )?;
        }
        ensure(
            (spec.spectral_radius - a).abs() <= 1e-8,
            format!("radius {}", spec.spectral_radius),
        )?;
        let reducing = ex.tuple.null_reducing_check(&q, &tol()).map_err(err)?;
        ensure(
            !reducing.is_reducing,
            "negative control: kernel unexpectedly reducing",
        )?;
    }
    Ok(format!("spectral radius {a:.10}, kernel not reducing"))
}

fn recurrence() -> Check {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..100u64 {
        let mut g = rng::seeded(seed);
        let n = 1 + (seed as usize % 6);
        let d = 1 + (seed as usize / 6) % 3;
        let m = (seed as usize / 18) % 5;
        let (s, t) = random_commuting_pair(&mut g, n, d).map_err(err)?;
        let a = beta(&s, &t, m, BetaMethod::Enumeration).map_err(err)?;
        let b = beta(&s, &t, m, BetaMethod::Recurrence).map_err(err)?;
        let gap = (&a.matrix - &b.matrix).frobenius_norm() / a.scale.max(f64::MIN_POSITIVE);
        ensure(gap <= 1e-10, format!("seed {seed}: relative gap {gap:e}"))?;
        worst = worst.max(gap);
    }
    let elapsed = start.elapsed();
    ensure(
        elapsed < Duration::from_secs(10),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!("max relative gap {worst:e} in {:.2?}", elapsed))
}

fn power_sum() -> Check {
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let mut g = rng::seeded(1000 + seed);
        let (s, t) = random_commuting_pair(&mut g, 2 + seed as usize % 5, 1 + seed as usize % 3)
            .map_err(err)?;
        for n in 1..=6 {
            let e = expand_power_sum(&s, &t, n, CoefficientMode::Binomial).map_err(err)?;
            ensure(
                e.deviation <= 1e-10,
                format!("seed {seed}, n = {n}: deviation {:e}", e.deviation),
            )?;
            worst = worst.max(e.deviation);
        }
    }
    let root2 = ComplexMatrix::identity(2).scaled(C64::new(2f64.sqrt(), 0.0));
    let probe = OperatorTuple::new(vec![root2], &tol()).map_err(err)?;
    let p = expand_power_sum(&probe, &probe, 2, CoefficientMode::Pochhammer).map_err(err)?;
    ensure(
        (p.deviation - 0.25).abs() <= 1e-12,
        format!("probe deviation {}", p.deviation),
    )?;
    let report = audit_power_sum_expansion(&probe, &probe, 1, &tol(), 0).map_err(err)?;
    ensure(report.is_counterexample(), "probe audit not flagged")?;
    Ok(format!(
        "binomial max deviation {worst:e}; pochhammer probe deviation {}",
        p.deviation
    ))
}

fn ascent() -> Check {
    let mut worst: f64 = 0.0;
    for seed in 0..25u64 {
        let mut g = rng::seeded(2000 + seed);
        let n = 2 + seed as usize % 5;
        let d = 1 + seed as usize % 3;
        let rank = 1 + (seed as usize / 3) % n;
        let t = reducing_partial_isometry(&mut g, n, d, rank).map_err(err)?;
        let q = MultiIndex::ones(d);
        ensure(
            partial_isometry_defect(&t, 1, &q, &tol())
                .map_err(err)?
                .is_zero,
            format!("seed {seed}: base defect"),
        )?;
        ensure(
            t.null_reducing_check(&q, &tol()).map_err(err)?.is_reducing,
            format!("seed {seed}: not reducing"),
        )?;
        for m in [2, 3] {
            let r = partial_isometry_defect(&t, m, &q, &tol()).map_err(err)?;
            let rel = r.norm / r.scale.max(1.0);
            ensure(
                r.norm <= 1e-10 * r.scale.max(1.0),
                format!("seed {seed}, m = {m}: {:e}", r.norm),
            )?;
            worst = worst.max(rel);
        }
    }
    Ok(format!("max relative defect {worst:e}"))
}

fn unitary_scaled(seed: u64) -> std::result::Result<OperatorTuple, String> {
    let mut g = rng::seeded(seed);
    let n = 1 + seed as usize % 5;
    let d = 1 + seed as usize % 3;
    let u = ComplexMatrix::new(random_unitary(&mut g, n)).map_err(err)?;
    let lambda: Vec<C64> = rng::unit_vector(&mut g, d).iter().copied().collect();
    scaled_single(&u, &lambda).map_err(err)
}

fn spectrum_location() -> Check {
    let mut worst: f64 = 0.0;
    for seed in 0..25u64 {
        let t = unitary_scaled(3000 + seed)?;
        for p in joint_point_spectrum(&t, seed, &tol()).map_err(err)? {
            let norm = p.lambda.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            ensure(
                (norm - 1.0).abs() <= 1e-8,
                format!("seed {seed}: |λ| = {norm}"),
            )?;
            worst = worst.max((norm - 1.0).abs());
        }
    }
    let ex = worked_example("2.1(2)").map_err(err)?;
    let input = AuditInput {
        tuple: ex.tuple,
        inverse: None,
        m: 1,
        q: MultiIndex::ones(2),
    };
    let report = run_audit(Claim::SpectrumLocation, &input, &tol(), 0).map_err(err)?;
    ensure(
        !report.hypotheses_hold,
        "example 2.1 not flagged as hypotheses failed",
    )?;
    let target = 2f64.powf(-0.25);
    let hit = report
        .witnesses
        .iter()
        .map(|w| w.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .any(|n| (n - target).abs() <= 1e-8);
    ensure(hit, "no witness with norm 2^(-1/4)")?;
    Ok(format!(
        "max sphere gap {worst:e}; example 2.1 witness norm {target:.10}"
    ))
}

fn inverse_example() -> Check {
    let printed = worked_example("4.1-as-printed").map_err(err)?;
    let corrected = worked_example("4.1-corrected").map_err(err)?;
    for m in 1..=4 {
        let b = beta(
            printed.inverse.as_ref().unwrap(),
            &printed.tuple,
            m,
            BetaMethod::Recurrence,
        )
        .map_err(err)?;
        ensure(
            (b.norm - 2f64.sqrt()).abs() <= 1e-10,
            format!("printed m = {m}: {}", b.norm),
        )?;
        let c = beta(
            corrected.inverse.as_ref().unwrap(),
            &corrected.tuple,
            m,
            BetaMethod::Recurrence,
        )
        .map_err(err)?;
        ensure(c.norm <= 1e-12, format!("corrected m = {m}: {:e}", c.norm))?;
    }
    for id in ["4.1-as-printed", "4.1-corrected"] {
        let r = reproduce_example(id, 0, &tol()).map_err(err)?;
        ensure(
            r.discrepancy_notes
                .iter()
                .any(|n| n == notes::INVERSE_EXAMPLE_AS_PRINTED),
            format!("{id}: note missing"),
        )?;
    }
    Ok("printed beta norm sqrt(2), corrected beta zero, notes recorded".into())
}

fn witness_points(report: &Value, label: &str) -> Vec<Vec<f64>> {
    report["witnesses"]
        .as_array()
        .into_iter()
        .flatten()
        .filter(|w| w["label"] == label)
        .map(|w| {
            w["values"]
                .as_array()
                .unwrap()
                .iter()
                .map(|z| z[0].as_f64().unwrap())
                .collect()
        })
        .collect()
}

fn left_inverse_map() -> Check {
    let corrected = data("corrected-4.1.json");
    let out = cli(&[
        "audit",
        "--claim",
        "thm4.1",
        "--input",
        corrected.to_str().unwrap(),
    ]);
    ensure(
        out.status.code() == Some(0),
        format!("corrected exit {:?}", out.status.code()),
    )?;
    let report: Value = serde_json::from_slice(&out.stdout).map_err(err)?;
    ensure(
        report["conclusion_holds"] == true,
        "corrected instance conclusion fails",
    )?;

    let scalar = data("scalar-inverse.json");
    let out = cli(&[
        "audit",
        "--claim",
        "thm4.1",
        "--input",
        scalar.to_str().unwrap(),
    ]);
    ensure(
        out.status.code() == Some(1),
        format!("scalar exit {:?}", out.status.code()),
    )?;
    let report: Value = serde_json::from_slice(&out.stdout).map_err(err)?;
    let w = witness_points(&report, "eigenvalue whose image is not an eigenvalue");
    ensure(
        w.iter().any(|p| {
            p.len() == 2 && (p[0] - 1.0 / 3.0).abs() <= 1e-8 && (p[1] - 2.0 / 3.0).abs() <= 1e-8
        }),
        format!("witnesses {w:?}"),
    )?;

    let ex = worked_example("4.1-corrected").map_err(err)?;
    let s = ex.inverse.unwrap();
    let mapped = joint_point_spectrum(&s, 0, &tol()).map_err(err)?;
    let half = [C64::new(0.5, 0.0), C64::new(0.5, 0.0)];
    ensure(
        mapped
            .iter()
            .any(|p| linf_distance(&p.lambda, &half) <= 1e-8),
        "(1/2, 1/2) not in spectrum of S",
    )?;
    Ok("corrected exit 0 with (1,1) -> (1/2,1/2); scalar exit 1 with witness (1/3, 2/3)".into())
}

fn eigen_orthogonality() -> Check {
    let mut worst: f64 = 0.0;
    for seed in 0..25u64 {
        let t = unitary_scaled(4000 + seed)?;
        let q = MultiIndex::ones(t.d());
        let r = audit_eigen_conjugation(&t, 1, &q, &tol(), seed).map_err(err)?;
        let overlap = r
            .norms
            .get("max eigenvector overlap")
            .copied()
            .unwrap_or(0.0);
        ensure(overlap <= 1e-8, format!("seed {seed}: overlap {overlap:e}"))?;
        ensure(
            r.sub_verdict("eigenvectors of distinct eigenvalues are orthogonal")
                .is_some_and(|v| v.holds),
            format!("seed {seed}: orthogonality verdict fails"),
        )?;
        worst = worst.max(overlap);
    }
    Ok(format!("max overlap {worst:e}"))
}

fn combinatorics() -> Check {
    for d in 1..=4usize {
        for k in 0..=12usize {
            let total: u64 = enumerate_multiindices(d, k)
                .map_err(err)?
                .iter()
                .map(|a| multinomial_weight(a).unwrap())
                .sum();
            ensure(
                total == (d as u64).pow(k as u32),
                format!("d = {d}, k = {k}: {total}"),
            )?;
        }
        for n in 1..=12usize {
            for parts in enumerate_multiindices(d, n).map_err(err)? {
                let (lhs, rhs) = pascal_multinomial(n, &parts).map_err(err)?;
                ensure(lhs == rhs, format!("pascal fails at {parts}"))?;
            }
        }
    }
    Ok("exact for d <= 4, k, n <= 12".into())
}

fn interface() -> Check {
    let files = [
        "example-2.1.json",
        "example-2.2.json",
        "golden.json",
        "printed-4.1.json",
        "corrected-4.1.json",
        "scalar-inverse.json",
    ];
    let mut runs = 0;
    for f in files {
        let path = data(f);
        let p = path.to_str().unwrap();
        let text = std::fs::read_to_string(&path).map_err(err)?;
        let parsed = parse_tuple_file(&text, &tol()).map_err(err)?;
        let again = parse_tuple_file(&serialize_tuple(&parsed.tuple), &tol()).map_err(err)?;
        ensure(
            again.tuple == parsed.tuple,
            format!("{f}: serialization round trip"),
        )?;
        let mut commands: Vec<Vec<&str>> = vec![
            vec!["classify", "--input", p, "--json"],
            vec!["spectrum", "--input", p, "--seed", "11"],
            vec!["audit", "--claim", "thm3.1", "--input", p, "--seed", "11"],
        ];
        if parsed.inverse.is_some() {
            commands.push(vec![
                "audit", "--claim", "prop4.1", "--input", p, "--seed", "11",
            ]);
        }
        for args in commands {
            let a = cli(&args);
            let b = cli(&args);
            let code = a.status.code();
            ensure(
                matches!(code, Some(0) | Some(1)),
                format!("{f} {args:?}: exit {code:?}"),
            )?;
            ensure(
                a.stdout == b.stdout,
                format!("{f} {args:?}: output not byte-stable"),
            )?;
            serde_json::from_slice::<Value>(&a.stdout).map_err(|e| format!("{f} {args:?}: {e}"))?;
            runs += 1;
        }
        if let Some(Value::String(id)) = parsed.metadata.get("example") {
            let exported = cli(&["export", "--example", id]);
            ensure(
                exported.stdout == text.as_bytes(),
                format!("{f}: export differs from shipped file"),
            )?;
            let a = cli(&["reproduce", "--example", id, "--json"]);
            ensure(
                a.status.code() == Some(0),
                format!("{f}: reproduce exit {:?}", a.status.code()),
            )?;
            ensure(
                a.stdout == cli(&["reproduce", "--example", id, "--json"]).stdout,
                format!("{f}: reproduce unstable"),
            )?;
            runs += 1;
        }
    }
    let a = cli(&[
        "audit", "--claim", "prop4.1", "--random", "6", "--seed", "7",
    ]);
    let b = cli(&[
        "audit", "--claim", "prop4.1", "--random", "6", "--seed", "7",
    ]);
    ensure(
        a.stdout == b.stdout && a.status.code() == Some(1),
        "random audit not stable",
    )?;
    Ok(format!("{} CLI invocations byte-stable", runs + 1))
}

fn main() {
    let criteria: [Criterion; 12] = [
        (
            "example 2.1 joint partial isometry for d = 1, 2, 3",
            example_21,
        ),
        (
            "example 2.2 components pass, pair fails with norm sqrt(3)",
            example_22,
        ),
        ("golden-ratio example: defect, spectrum, radius", golden),
        ("beta recurrence agrees with enumeration", recurrence),
        (
            "power-sum expansion: binomial holds, pochhammer probe 0.25",
            power_sum,
        ),
        ("order ascent on reducing partial isometries", ascent),
        (
            "spectrum location and example 2.1 negative control",
            spectrum_location,
        ),
        ("example 4.1 as printed and corrected", inverse_example),
        (
            "left-inverse spectral map: corrected passes, scalar counterexample",
            left_inverse_map,
        ),
        (
            "orthogonal eigenvectors for unitary-scaled tuples",
            eigen_orthogonality,
        ),
        ("combinatorial identities are exact", combinatorics),
        ("interface round trips and byte-stable output", interface),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2}: PASS  {name} ({detail})", i + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {:>2}: FAIL  {name} ({why})", i + 1);
            }
        }
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
