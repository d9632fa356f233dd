// One line per acceptance criterion. Exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use orbitq::bundles::Twist;
use orbitq::hyperg::{kernel_coefficients, matrix_coefficient, matrix_series_coefficients};
use orbitq::jordan::{lookup_case, sweep_ids};
use orbitq::ladder::{evaluate_bundles, extract_ab, j_identity_check, ladder_norms, r_equals_x_sweep, DEFAULT_SEED};
use orbitq::models::{build_model, hw_norm_agrees, solve_gram, verify_brackets, ModelKind};
use orbitq::{q, BundleModel, Error, Rational};

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn factorial(n: u32) -> Rational {
    (1..=n as i64).map(Rational::from_int).product()
}

fn rising(x: &Rational, n: u32) -> Rational {
    let mut out = Rational::one();
    let mut y = x.clone();
    for _ in 0..n {
        out = &out * &y;
        y = &y + &Rational::one();
    }
    out
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Outcome {
    let took = start.elapsed();
    check(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

/// A row of the golden table: twist, r0, {a, b} (None when the row has no
/// entry) and whether the construction goes through.
#[derive(Debug, Clone, PartialEq)]
struct Golden {
    twist: Twist,
    r0: Rational,
    ab: Option<[Rational; 2]>,
}

fn row(twist: Twist, r0: Rational, a: Rational, b: Rational) -> Golden {
    let mut ab = [a, b];
    ab.sort();
    Golden { twist, r0, ab: Some(ab) }
}

fn golden(id: &str) -> Vec<Golden> {
    use Twist::{F0Lambda0 as F0, Lambda0 as L0};
    let h = |n: i64| q(n, 2);
    match id {
        "E6:6" => vec![row(L0, h(5), h(3), q(2, 1))],
        "E7:7" => vec![row(L0, q(4, 1), q(2, 1), q(3, 1))],
        "E8:8" => vec![row(L0, q(7, 1), q(3, 1), q(5, 1))],
        "F4:4" => vec![row(L0, q(2, 1), h(3), q(2, 1))],
        "E6:2" => vec![row(L0, q(3, 1), q(2, 1), q(3, 1))],
        "E7:-5" => vec![row(L0, q(5, 1), q(3, 1), q(5, 1))],
        "E8:-24" => vec![row(L0, q(9, 1), q(5, 1), q(9, 1))],
        "G2:2" => vec![row(L0, q(1, 1), q(4, 3), q(5, 3))],
        _ => {
            if let Some(pq) = id.strip_prefix("SO:") {
                let (p, qq) = pq.split_once(',').unwrap();
                let (p, qq): (i64, i64) = (p.parse().unwrap(), qq.parse().unwrap());
                let mut out = Vec::new();
                if (p + qq) % 2 == 0 {
                    out.push(row(L0, h(qq - 2), h(qq - 2), h(qq - p + 2)));
                } else if p == 3 {
                    out.push(row(L0, h(qq - 2), h(qq - 2), h(qq - 1)));
                }
                if p == 3 && qq == 3 {
                    out.push(row(F0, q(1, 1), h(3), h(3)));
                }
                out
            } else {
                let n: i64 = id.strip_prefix("SL:").unwrap().parse().unwrap();
                if n == 3 {
                    vec![
                        row(L0, h(1), q(3, 4), q(5, 4)),
                        Golden { twist: F0, r0: q(1, 1), ab: None },
                    ]
                } else if n % 2 == 0 {
                    vec![
                        row(L0, q(n - 2, 4), h(1), q(n, 4)),
                        row(F0, q(n, 4), h(3), q(n + 2, 4)),
                    ]
                } else {
                    vec![]
                }
            }
        }
    }
}

fn observed(bm: &BundleModel) -> Golden {
    let ab = if bm.valid {
        let mut ab = [bm.a.clone().unwrap(), bm.b.clone().unwrap()];
        ab.sort();
        Some(ab)
    } else {
        None
    };
    Golden { twist: bm.twist, r0: bm.r0.clone(), ab }
}

fn all_bundles() -> Vec<BundleModel> {
    sweep_ids(12, 12)
        .iter()
        .flat_map(|id| evaluate_bundles(&lookup_case(id).unwrap()))
        .collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let ids = sweep_ids(12, 12);
    check(ids.len() == 8 + 55 + 10, || format!("sweep has {} ids", ids.len()))?;
    for id in &ids {
        let got: Vec<Golden> = evaluate_bundles(&lookup_case(id).unwrap()).iter().map(observed).collect();
        let want = golden(id);
        check(got == want, || format!("{id}: got {got:?}, want {want:?}"))?;
    }
    within(start, Duration::from_secs(1))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut ids = Vec::new();
    for p in 4..=12 {
        for qq in p..=12 {
            if (p + qq) % 2 == 1 {
                ids.push(format!("SO:{p},{qq}"));
            }
        }
    }
    for n in (5..=12).step_by(2) {
        ids.push(format!("SL:{n}"));
    }
    for id in &ids {
        let n = evaluate_bundles(&lookup_case(id).unwrap()).len();
        check(n == 0, || format!("{id} has {n} bundles"))?;
    }
    within(start, Duration::from_secs(1))
}

fn criterion_3() -> Outcome {
    let sl3 = lookup_case("SL:3").unwrap();
    let bundles = evaluate_bundles(&sl3);
    let f0 = bundles
        .iter()
        .find(|b| b.twist == Twist::F0Lambda0)
        .ok_or("SL:3 has no f0L0 bundle")?;
    check(!f0.valid && f0.a.is_none() && f0.b.is_none(), || format!("{f0:?}"))?;
    match extract_ab(&sl3, &f0.r0) {
        Err(Error::Extraction(_)) => {}
        other => return Err(format!("SL:3 f0L0 extraction gave {other:?}")),
    }
    for bm in all_bundles() {
        let exempt = bm.case_id == "SL:3" && bm.twist == Twist::F0Lambda0;
        check(bm.valid != exempt, || format!("{} {}: valid = {}", bm.case_id, bm.twist, bm.valid))?;
    }
    Ok(())
}

fn closure(kind: ModelKind, rank: usize, levels: &[u32], limit: Duration) -> Outcome {
    let m = build_model(kind).map_err(|e| e.to_string())?;
    for &level in levels {
        let start = Instant::now();
        let rep = verify_brackets(&m, level).map_err(|e| e.to_string())?;
        check(rep.closed && rep.rank == rank && rep.count == rank && rep.stable, || {
            format!(
                "{kind} level {level}: closed {}, rank {}/{}, stable {}, failures {:?}",
                rep.closed, rep.rank, rep.count, rep.stable, rep.failures
            )
        })?;
        check(rep.passed(), || format!("{kind} level {level}: {rep:?}"))?;
        if level == 3 {
            within(start, limit)?;
        }
    }
    Ok(())
}

fn criterion_4() -> Outcome {
    let m = build_model(ModelKind::So44).map_err(|e| e.to_string())?;
    check(m.truncated_basis(3).len() == 1 + 16 + 81 + 256, || "so44 basis size".into())?;
    closure(ModelKind::So44, 28, &[3, 4], Duration::from_secs(60))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    closure(ModelKind::G2, 14, &[3, 4], Duration::from_secs(30))?;
    within(start, Duration::from_secs(30))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    for (n, rank) in [(1u32, 3usize), (2, 10)] {
        closure(ModelKind::Oscillator(n), rank, &[3], Duration::from_secs(5))?;
        let m = build_model(ModelKind::Oscillator(n)).unwrap();
        let rep = solve_gram(&m, 4).map_err(|e| e.to_string())?;
        check(rep.passed(), || format!("oscillator({n}) Gram: {:?}", rep.failures))?;
        for lg in &rep.levels {
            for (i, mono) in lg.basis.iter().enumerate() {
                let want: Rational = mono.exponents().iter().map(|&a| factorial(a)).product();
                for j in 0..lg.dim() {
                    let expect = if i == j { want.clone() } else { Rational::zero() };
                    check(lg.get(i, j) == expect, || {
                        format!("oscillator({n}) entry ({i},{j}) at level {}", lg.level)
                    })?;
                }
            }
        }
    }
    within(start, Duration::from_secs(5))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let rep = r_equals_x_sweep(DEFAULT_SEED, 1000, 500).map_err(|e| e.to_string())?;
    check(rep.samples == 1000 && rep.identity_samples == 500, || "sample counts".into())?;
    check(rep.passed(), || format!("{:?}", rep.failures.first()))?;
    // The identity also holds at a hand-picked point.
    let a = [q(1, 2), q(-3, 4), q(7, 3), q(2, 1)];
    check(j_identity_check(&a, &q(5, 6)).unwrap(), || "J identity at a fixed point".into())?;
    within(start, Duration::from_secs(5))
}

fn bundle_of(id: &str) -> BundleModel {
    evaluate_bundles(&lookup_case(id).unwrap())
        .into_iter()
        .find(|b| b.twist == Twist::Lambda0)
        .unwrap()
}

fn criterion_8() -> Outcome {
    let so = bundle_of("SO:4,4");
    let g2 = bundle_of("G2:2");
    for n in 0..=8u32 {
        let (_, norm) = ladder_norms(&so.r0, so.a.as_ref().unwrap(), so.b.as_ref().unwrap(), n).unwrap();
        check(norm == q(1, n as i64 + 1), || format!("SO:4,4 n={n}: {norm}"))?;
        let (_, norm) = ladder_norms(&g2.r0, g2.a.as_ref().unwrap(), g2.b.as_ref().unwrap(), n).unwrap();
        let fnp1 = factorial(n + 1);
        let closed = factorial(3 * n + 3)
            / (Rational::from_int(3).pow(3 * n) * factorial(3) * factorial(n) * &fnp1 * &fnp1);
        check(norm == closed, || format!("G2:2 n={n}: {norm} vs {closed}"))?;
    }
    Ok(())
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    for kind in [ModelKind::So44, ModelKind::G2] {
        let m = build_model(kind).unwrap();
        let rep = solve_gram(&m, 4).map_err(|e| e.to_string())?;
        check(rep.passed(), || format!("{kind}: {:?}", rep.failures))?;
        check(rep.levels.len() == 5, || format!("{kind}: {} levels", rep.levels.len()))?;
        for n in 0..=4 {
            hw_norm_agrees(&m, &rep, n).map_err(|e| e.to_string())?;
        }
    }
    within(start, Duration::from_secs(120))
}

fn criterion_10() -> Outcome {
    for bm in all_bundles().iter().filter(|b| b.valid) {
        let (a, b) = (bm.a.as_ref().unwrap(), bm.b.as_ref().unwrap());
        let p = kernel_coefficients(&bm.r0, a, b, 20).unwrap();
        for n in 0..=20u32 {
            // Squared norm of f0^n s0, from the ladder factors and independently.
            let (gammas, _) = ladder_norms(&bm.r0, a, b, n).unwrap();
            let sq: Rational = gammas.iter().product();
            let indep = factorial(n) * rising(a, n) * rising(b, n) / rising(&(&bm.r0 + &Rational::one()), n);
            check(sq == indep, || format!("{} {} n={n}: norm mismatch", bm.case_id, bm.twist))?;
            check(&p[n as usize] * &sq == Rational::one(), || {
                format!("{} {} n={n}: p_n * norm = {}", bm.case_id, bm.twist, &p[n as usize] * &sq)
            })?;
        }
        let v = matrix_coefficient(&bm.r0, a, b, &Rational::zero(), 10).unwrap();
        check(v.value.is_one() && v.remainder_bound.is_zero(), || {
            format!("{} {}: value at y = 0 is {}", bm.case_id, bm.twist, v.value)
        })?;
    }
    let so = bundle_of("SO:4,4");
    let c = matrix_series_coefficients(&so.r0, so.a.as_ref().unwrap(), so.b.as_ref().unwrap(), 20);
    for (n, cn) in c.iter().enumerate() {
        check(*cn == q(1, n as i64 + 1), || format!("SO:4,4 coefficient {n} = {cn}"))?;
    }
    Ok(())
}

fn criterion_11() -> Outcome {
    let valid: Vec<BundleModel> = all_bundles().into_iter().filter(|b| b.valid).collect();
    check(!valid.is_empty(), || "no valid bundles".into())?;
    for bm in &valid {
        let ok = bm.r0.is_positive() && bm.a.as_ref().unwrap().is_positive() && bm.b.as_ref().unwrap().is_positive();
        check(ok, || format!("{} {}: r0 {}, a {:?}, b {:?}", bm.case_id, bm.twist, bm.r0, bm.a, bm.b))?;
    }
    Ok(())
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("table reproduction", criterion_1),
        ("no half-form bundle", criterion_2),
        ("failure detection", criterion_3),
        ("so(4,4) bracket closure", criterion_4),
        ("G2 bracket closure", criterion_5),
        ("oscillator baseline", criterion_6),
        ("R = X sweep", criterion_7),
        ("norm closed forms", criterion_8),
        ("Gram unitarity", criterion_9),
        ("kernel coefficients", criterion_10),
        ("positivity", criterion_11),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        match outcome {
            Ok(()) => println!("criterion {}: PASS  {name} ({took:.2?})", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({took:.2?}): {why}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
