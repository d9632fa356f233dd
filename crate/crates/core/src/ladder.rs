//! Capelli multipliers and the spectral data of the ladder representation.
//!
//! Everything here is computed from the block data `(q_n, d_n, w_n)` and
//! `m` alone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bundles::{classify_bundles, BundleModel};
use crate::error::{Error, Result};
use crate::jordan::{derived_vectors, lookup_case, sweep_ids, JordanCase};
use crate::rational::Rational;

/// Seed used by randomized sweeps unless `ORBITQ_SEED` overrides it.
pub const DEFAULT_SEED: u64 = 0x5EED_0F0B;

pub fn seed_from_env() -> u64 {
    std::env::var("ORBITQ_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

/// A lowest-weight section `f0^p N_1^{t_1} ... N_q^{t_q} sqrt(L)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LadderPoint {
    pub p: Rational,
    pub t: Vec<u32>,
}

/// Multidegree of `N^t`: the generator `N_{c_n + j}` contributes 2 to each
/// of the first `j` slots of block `n`.
pub fn multidegree(c: &JordanCase, t: &[u32]) -> Result<Vec<u32>> {
    let q = c.degree() as usize;
    if t.len() != q {
        return Err(Error::InvalidInput(format!(
            "exponent vector has length {}, case {} needs {q}",
            t.len(),
            c.id
        )));
    }
    let mut mu = vec![0u32; q];
    let mut start = 0usize;
    for b in &c.blocks {
        for j in 1..=b.q as usize {
            let tj = t[start + j - 1];
            for slot in &mut mu[start..start + j] {
                *slot += 2 * tj;
            }
        }
        start += b.q as usize;
    }
    Ok(mu)
}

/// Degree `z = sum_i t_i deg(N_i)`, where `N_{c_n + j}` has degree `j`.
pub fn z_degree(c: &JordanCase, t: &[u32]) -> Result<u32> {
    Ok(multidegree(c, t)?.iter().sum::<u32>() / 2)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CapelliEntry {
    /// Zero-based slot index.
    pub i: usize,
    pub j: u32,
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CapelliProfile {
    pub entries: Vec<CapelliEntry>,
}

impl CapelliProfile {
    pub fn values(&self) -> Vec<Rational> {
        self.entries.iter().map(|e| e.value.clone()).collect()
    }

    pub fn sum(&self) -> Rational {
        self.entries.iter().map(|e| &e.value).sum()
    }

    pub fn zero_count(&self) -> usize {
        self.entries.iter().filter(|e| e.value.is_zero()).count()
    }
}

/// `C_{i,j}(mu) = (mu_i + delta_i - 2j) / (2 v_i)` for `0 <= j < v_i`.
pub fn capelli_profile(c: &JordanCase, mu: &[u32]) -> Result<CapelliProfile> {
    let dv = derived_vectors(c);
    if mu.len() != dv.v.len() {
        return Err(Error::InvalidInput(format!(
            "multidegree has length {}, case {} needs {}",
            mu.len(),
            c.id,
            dv.v.len()
        )));
    }
    let mut entries = Vec::new();
    for (i, (&vi, &di)) in dv.v.iter().zip(&dv.delta).enumerate() {
        for j in 0..vi {
            let num = mu[i] as i64 + di as i64 - 2 * j as i64;
            entries.push(CapelliEntry {
                i,
                j,
                value: Rational::new(num, 2 * vi as i64),
            });
        }
    }
    Ok(CapelliProfile { entries })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelData {
    pub r: Rational,
    pub z: u32,
    pub x: Rational,
}

/// `r = p + z + (m+1)/2` and `X = 2p + z + (m+2)/2`.
pub fn level_data(c: &JordanCase, pt: &LadderPoint) -> Result<LevelData> {
    let z = z_degree(c, &pt.t)?;
    let m = c.m as i64;
    let zr = Rational::from_int(z as i64);
    let r = &pt.p + &zr + Rational::new(m + 1, 2);
    let x = &pt.p * Rational::from_int(2) + &zr + Rational::new(m + 2, 2);
    Ok(LevelData { r, z, x })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct REigen {
    /// Four-term expression; `None` where its denominators vanish.
    pub raw: Option<Rational>,
    pub simplified: Rational,
}

/// The scalar `R` on a lowest-weight section of multidegree `mu` and energy
/// `r`, computed both from the four-term product formula and from its
/// simplification `2r - 2 - sum C`.
pub fn r_eigenvalue(c: &JordanCase, mu: &[u32], r: &Rational) -> Result<REigen> {
    let cs = capelli_profile(c, mu)?.values();
    let one = Rational::one();
    let simplified = r * Rational::from_int(2) - Rational::from_int(2) - cs.iter().sum::<Rational>();
    let rm1 = r - &one;
    let rp1 = r + &one;
    let d1 = &rm1 * r;
    let d2 = r * &rp1;
    let raw = if d1.is_zero() || d2.is_zero() {
        None
    } else {
        let p1: Rational = cs.iter().product();
        let p2: Rational = cs.iter().map(|x| x + &one).product();
        let p3: Rational = cs.iter().map(|x| &rm1 - x).product();
        let p4: Rational = cs.iter().map(|x| r - x).product();
        Some(&p1 / &d1 - &p2 / &d2 - &p3 / &d1 + &p4 / &d2)
    };
    Ok(REigen { raw, simplified })
}

fn j_fn(a: &[Rational; 4], b: &Rational) -> Rational {
    let num: Rational = a.iter().product();
    num / (b * &(b + &Rational::one()))
}

/// Checks `J(a;b) - J(b-a;b) - J(a+1;b+1) + J(b-a+1;b+1) = 2b - sum a`.
pub fn j_identity_check(a: &[Rational; 4], b: &Rational) -> Result<bool> {
    let one = Rational::one();
    let b1 = b + &one;
    for x in [b, &b1] {
        if x.is_zero() || (x + &one).is_zero() {
            return Err(Error::InvalidInput(format!("J is singular at b = {b}")));
        }
    }
    let shift = |f: &dyn Fn(&Rational) -> Rational| -> [Rational; 4] {
        [f(&a[0]), f(&a[1]), f(&a[2]), f(&a[3])]
    };
    let lhs = j_fn(a, b) - j_fn(&shift(&|x| b - x), b) - j_fn(&shift(&|x| x + &one), &b1)
        + j_fn(&shift(&|x| b - x + &one), &b1);
    let rhs = b * Rational::from_int(2) - a.iter().sum::<Rational>();
    Ok(lhs == rhs)
}

fn remove_one(values: &mut Vec<Rational>, x: &Rational) -> bool {
    match values.iter().position(|v| v == x) {
        Some(k) => {
            values.remove(k);
            true
        }
        None => false,
    }
}

/// Recovers `(a, b)`, sorted ascending, from the vacuum multipliers
/// `{C(0)} = {0, r0 - 1, r0 - a, r0 - b}`.
pub fn extract_ab(c: &JordanCase, r0: &Rational) -> Result<(Rational, Rational)> {
    let zeros = vec![0u32; c.degree() as usize];
    let mut vals = capelli_profile(c, &zeros)?.values();
    vals.sort();
    let shown = vals.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ");
    if !remove_one(&mut vals, &Rational::zero()) {
        return Err(Error::Extraction(format!(
            "{}: multipliers {{{shown}}} contain no 0",
            c.id
        )));
    }
    let target = r0 - &Rational::one();
    if !remove_one(&mut vals, &target) {
        let what = if target.is_zero() {
            "a second 0 (r0 - 1 = 0)".to_string()
        } else {
            format!("r0 - 1 = {target}")
        };
        return Err(Error::Extraction(format!(
            "{}: multipliers {{{shown}}} lack {what}",
            c.id
        )));
    }
    if vals.len() != 2 {
        return Err(Error::Extraction(format!(
            "{}: expected four multipliers, found {}",
            c.id,
            vals.len() + 2
        )));
    }
    let a = r0 - &vals[1];
    let b = r0 - &vals[0];
    Ok((a, b))
}

/// `gamma_k = k (k-1+a)(k-1+b) / (r0+k)` for `k = 1..n`, and the norm
/// `||f0^n s0 / n!||^2 = (a)_n (b)_n / (n! (r0+1)_n)`.
pub fn ladder_norms(
    r0: &Rational,
    a: &Rational,
    b: &Rational,
    n: u32,
) -> Result<(Vec<Rational>, Rational)> {
    if !(r0.is_positive() && a.is_positive() && b.is_positive()) {
        return Err(Error::InvalidInput(format!(
            "ladder parameters must be positive (r0 = {r0}, a = {a}, b = {b})"
        )));
    }
    let mut gammas = Vec::with_capacity(n as usize);
    let mut prod = Rational::one();
    let mut fact = Rational::one();
    for k in 1..=n as i64 {
        let kr = Rational::from_int(k);
        let km1 = Rational::from_int(k - 1);
        let g = &kr * &(&km1 + a) * (&km1 + b) / (r0 + &kr);
        prod = &prod * &g;
        fact = &fact * &kr;
        gammas.push(g);
    }
    let norm = prod / (&fact * &fact);
    Ok((gammas, norm))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Candidate {
    pub mu: Vec<u32>,
    pub zero_count: usize,
}

/// Validity of a bundle, decided by whether `(a, b)` can be extracted. When
/// `r0 = 1` the candidate multidegrees `mu_i = 2(w_n - u'_n)` (constant on
/// block `n`, `0 <= u'_n <= w_n`) are listed with their multiplier zero
/// counts. Membership of each candidate in the vacuum space is not decided.
pub fn bracket_valid(c: &JordanCase, bm: &BundleModel) -> Result<(bool, Vec<Candidate>)> {
    let valid = extract_ab(c, &bm.r0).is_ok();
    let mut diags = Vec::new();
    if bm.r0.is_one() {
        let mut choice = vec![0u32; c.blocks.len()];
        loop {
            let mut mu = Vec::new();
            for (b, &u) in c.blocks.iter().zip(&choice) {
                mu.extend(std::iter::repeat_n(2 * (b.w - u), b.q as usize));
            }
            let zero_count = capelli_profile(c, &mu)?.zero_count();
            diags.push(Candidate { mu, zero_count });
            let mut k = 0;
            loop {
                if k == choice.len() {
                    diags.sort_by(|x, y| x.mu.cmp(&y.mu));
                    return Ok((valid, diags));
                }
                if choice[k] < c.blocks[k].w {
                    choice[k] += 1;
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
        }
    }
    Ok((valid, diags))
}

/// Bundles of a case with `a`, `b`, `valid` filled in.
pub fn evaluate_bundles(c: &JordanCase) -> Vec<BundleModel> {
    classify_bundles(c)
        .into_iter()
        .map(|mut bm| {
            if let Ok((a, b)) = extract_ab(c, &bm.r0) {
                bm.a = Some(a);
                bm.b = Some(b);
                bm.valid = true;
            }
            bm
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepFailure {
    pub case_id: String,
    pub p: Rational,
    pub t: Vec<u32>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub seed: u64,
    pub samples: usize,
    pub identity_samples: usize,
    pub failures: Vec<SweepFailure>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn random_point(rng: &mut ChaCha8Rng, c: &JordanCase) -> LadderPoint {
    let t = (0..c.degree()).map(|_| rng.gen_range(0..5)).collect();
    LadderPoint {
        p: Rational::new(rng.gen_range(-40..=40), 2),
        t,
    }
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    Rational::new(rng.gen_range(-30..=30), rng.gen_range(1..=12))
}

fn check_point(c: &JordanCase, pt: &LadderPoint) -> Result<Option<String>> {
    let ld = level_data(c, pt)?;
    let mu = multidegree(c, &pt.t)?;
    let re = r_eigenvalue(c, &mu, &ld.r)?;
    let half_m = Rational::new(c.m as i64, 2);
    let sum = capelli_profile(c, &mu)?.sum();
    let expect_sum = Rational::from_int(ld.z as i64) + &half_m - Rational::from_int(2);
    if sum != expect_sum {
        return Ok(Some(format!("sum of multipliers {sum} != {expect_sum}")));
    }
    if &ld.r * Rational::from_int(2) - &ld.x != Rational::from_int(ld.z as i64) + half_m {
        return Ok(Some("2r - X != z + m/2".into()));
    }
    match re.raw {
        Some(raw) if raw == re.simplified && re.simplified == ld.x => Ok(None),
        Some(raw) => Ok(Some(format!(
            "R_raw = {raw}, R = {}, X = {}",
            re.simplified, ld.x
        ))),
        None => Ok(Some("R_raw undefined away from r in {0, 1, -1}".into())),
    }
}

/// Seeded random test of `R_raw = R = X` over `samples` ladder points drawn
/// from the sweep `3 <= p <= q <= 12`, `3 <= n <= 12`, plus
/// `identity_samples` random instances of the `J` identity.
pub fn r_equals_x_sweep(seed: u64, samples: usize, identity_samples: usize) -> Result<SweepReport> {
    let cases: Vec<JordanCase> = sweep_ids(12, 12)
        .iter()
        .map(|id| lookup_case(id))
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let excluded = [Rational::zero(), Rational::one(), -Rational::one()];
    let mut points = Vec::with_capacity(samples);
    while points.len() < samples {
        let k = rng.gen_range(0..cases.len());
        let pt = random_point(&mut rng, &cases[k]);
        let r = level_data(&cases[k], &pt)?.r;
        if !excluded.contains(&r) {
            points.push((k, pt));
        }
    }
    let mut tuples = Vec::with_capacity(identity_samples);
    while tuples.len() < identity_samples {
        let a = [
            random_rational(&mut rng),
            random_rational(&mut rng),
            random_rational(&mut rng),
            random_rational(&mut rng),
        ];
        let b = random_rational(&mut rng);
        let one = Rational::one();
        let singular = [&b, &(&b + &one), &(&b + &Rational::from_int(2))]
            .iter()
            .any(|x| x.is_zero());
        if !singular {
            tuples.push((a, b));
        }
    }

    let mut failures = points
        .par_iter()
        .map(|(k, pt)| {
            let c = &cases[*k];
            Ok(check_point(c, pt)?.map(|detail| SweepFailure {
                case_id: c.id.clone(),
                p: pt.p.clone(),
                t: pt.t.clone(),
                detail,
            }))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();
    for (a, b) in &tuples {
        if !j_identity_check(a, b)? {
            failures.push(SweepFailure {
                case_id: "J".into(),
                p: b.clone(),
                t: vec![],
                detail: format!("J identity fails at a = {a:?}, b = {b}"),
            });
        }
    }
    Ok(SweepReport {
        seed,
        samples,
        identity_samples,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundles::Twist;
    use crate::rational::q;

    fn case(id: &str) -> JordanCase {
        lookup_case(id).unwrap()
    }

    #[test]
    fn multidegrees() {
        assert_eq!(multidegree(&case("E6:6"), &[0, 0, 0, 1]).unwrap(), vec![2, 2, 2, 2]);
        assert_eq!(multidegree(&case("E6:6"), &[0, 0, 0, 0]).unwrap(), vec![0; 4]);
        assert_eq!(multidegree(&case("G2:2"), &[3, 0]).unwrap(), vec![6, 0]);
        assert!(multidegree(&case("G2:2"), &[3]).is_err());
    }

    #[test]
    fn profiles() {
        let vals = |id: &str, mu: &[u32]| capelli_profile(&case(id), mu).unwrap().values();
        assert_eq!(vals("E6:6", &[0; 4]), vec![q(3, 2), q(1, 1), q(1, 2), q(0, 1)]);
        assert_eq!(vals("SL:3", &[6]), vec![q(3, 4), q(1, 2), q(1, 4), q(0, 1)]);
        assert_eq!(vals("SO:4,4", &[0; 4]), vec![q(0, 1); 4]);
    }

    #[test]
    fn level_examples() {
        let pt = LadderPoint { p: q(-3, 1), t: vec![0; 4] };
        let ld = level_data(&case("E6:6"), &pt).unwrap();
        assert_eq!((ld.r, ld.x), (q(5, 2), q(0, 1)));
        let pt = LadderPoint { p: q(0, 1), t: vec![0; 4] };
        let ld = level_data(&case("E6:6"), &pt).unwrap();
        assert_eq!((ld.r, ld.x), (q(11, 2), q(6, 1)));
        let pt = LadderPoint { p: q(-1, 2), t: vec![0, 0] };
        let ld = level_data(&case("G2:2"), &pt).unwrap();
        assert_eq!((ld.r, ld.x), (q(1, 1), q(1, 1)));
    }

    #[test]
    fn r_examples() {
        let re = r_eigenvalue(&case("E6:6"), &[0; 4], &q(5, 2)).unwrap();
        assert_eq!(re.raw, Some(q(0, 1)));
        assert_eq!(re.simplified, q(0, 1));
        let re = r_eigenvalue(&case("SO:4,4"), &[0; 4], &q(2, 1)).unwrap();
        assert_eq!(re.simplified, q(2, 1));
        assert_eq!(re.raw, Some(q(2, 1)));
        let re = r_eigenvalue(&case("SO:4,4"), &[0; 4], &q(1, 1)).unwrap();
        assert_eq!(re.raw, None);
        assert_eq!(re.simplified, q(0, 1));
    }

    #[test]
    fn j_examples() {
        let ones = [q(1, 1), q(1, 1), q(1, 1), q(1, 1)];
        assert!(j_identity_check(&ones, &q(3, 1)).unwrap());
        let zeros = [q(0, 1), q(0, 1), q(0, 1), q(0, 1)];
        assert!(j_identity_check(&zeros, &q(7, 5)).unwrap());
        assert!(j_identity_check(&zeros, &q(-1, 1)).is_err());
        assert!(j_identity_check(&zeros, &q(0, 1)).is_err());
    }

    #[test]
    fn extraction() {
        assert_eq!(extract_ab(&case("E6:6"), &q(5, 2)).unwrap(), (q(3, 2), q(2, 1)));
        assert_eq!(extract_ab(&case("G2:2"), &q(1, 1)).unwrap(), (q(4, 3), q(5, 3)));
        let err = extract_ab(&case("SL:3"), &q(1, 1)).unwrap_err();
        assert!(matches!(&err, Error::Extraction(s) if s.contains("second 0")), "{err}");
    }

    #[test]
    fn norms() {
        let (_, n) = ladder_norms(&q(1, 1), &q(1, 1), &q(1, 1), 2).unwrap();
        assert_eq!(n, q(1, 3));
        let (_, n) = ladder_norms(&q(1, 1), &q(4, 3), &q(5, 3), 1).unwrap();
        assert_eq!(n, q(10, 9));
        let (g, n) = ladder_norms(&q(5, 2), &q(3, 2), &q(2, 1), 1).unwrap();
        assert_eq!((g, n), (vec![q(6, 7)], q(6, 7)));
        let (g, n) = ladder_norms(&q(5, 2), &q(3, 2), &q(2, 1), 0).unwrap();
        assert!(g.is_empty());
        assert_eq!(n, q(1, 1));
        assert!(ladder_norms(&q(0, 1), &q(1, 1), &q(1, 1), 1).is_err());
    }

    #[test]
    fn validity() {
        let c = case("SL:3");
        let bs = classify_bundles(&c);
        let f0 = bs.iter().find(|b| b.twist == Twist::F0Lambda0).unwrap();
        let (valid, diags) = bracket_valid(&c, f0).unwrap();
        assert!(!valid);
        for d in &diags {
            if d.mu[0] <= 6 {
                assert_eq!(d.zero_count, 1, "{d:?}");
            }
        }
        assert_eq!(diags.iter().filter(|d| d.mu[0] <= 6).count(), 4);

        let c = case("SL:4");
        let f0 = classify_bundles(&c).into_iter().find(|b| b.twist == Twist::F0Lambda0).unwrap();
        let (valid, diags) = bracket_valid(&c, &f0).unwrap();
        assert!(valid);
        let at0 = diags.iter().find(|d| d.mu.iter().all(|&x| x == 0)).unwrap();
        assert_eq!(at0.zero_count, 2);
        assert_eq!(
            capelli_profile(&c, &[0, 0]).unwrap().values(),
            vec![q(0, 1), q(-1, 2), q(0, 1), q(-1, 2)]
        );

        let c = case("E7:7");
        let b = &classify_bundles(&c)[0];
        let (valid, diags) = bracket_valid(&c, b).unwrap();
        assert!(valid && diags.is_empty());
    }

    #[test]
    fn small_sweep() {
        let rep = r_equals_x_sweep(7, 100, 50).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures);
    }
}
