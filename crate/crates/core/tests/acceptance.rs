//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits nonzero if any fails.
//!
//! Run with `cargo test -p sanov-core --test acceptance`.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_traits::ToPrimitive;

use sanov_core::exact2::next_prime;
use sanov_core::girth::{
    build_gl_spec, component_size, even_girth, girth_bfs, girth_oracle, margulis_genset,
    DEFAULT_BUDGET,
};
use sanov_core::harness::{
    moore_bound, survey, theorem_check, CellStatus, GensetSource, SurveyCell,
};
use sanov_core::lattice::{
    euler_product_partial, prim_count, rational_to_f64, sl2_ball_count, INV_ZETA_2,
};
use sanov_core::{
    build_genset, enum_omega, verify_genset, CayleySpec, CountMode, ExactMatrix, GeneratorSet,
    Prime,
};

type Outcome = Result<String, String>;

/// `[a, b, c, d]` for `[[a, b], [c, d]]`; the oracles below never touch the library's matrix type.
type Mat = [i64; 4];

fn mul(x: Mat, y: Mat) -> Mat {
    [
        x[0] * y[0] + x[1] * y[2],
        x[0] * y[1] + x[1] * y[3],
        x[2] * y[0] + x[3] * y[2],
        x[2] * y[1] + x[3] * y[3],
    ]
}

fn transpose(x: Mat) -> Mat {
    [x[0], x[2], x[1], x[3]]
}

fn norm(x: Mat) -> i64 {
    x.iter().map(|v| v.abs()).max().unwrap()
}

/// Elements of `<A, B>` are exactly the determinant-one matrices with
/// `a = d = 1 (mod 4)` and `b = c = 0 (mod 2)`.
fn in_sanov_group(x: Mat) -> bool {
    x[0] * x[3] - x[1] * x[2] == 1
        && x[0].rem_euclid(4) == 1
        && x[3].rem_euclid(4) == 1
        && x[1].rem_euclid(2) == 0
        && x[2].rem_euclid(2) == 0
}

/// Ball of the subgroup by brute force over `(a, d, b)`, solving for `c`.
fn omega_oracle(r: i64) -> Vec<Mat> {
    let mut out = Vec::new();
    for a in (-r..=r).filter(|a| a.rem_euclid(4) == 1) {
        for d in (-r..=r).filter(|d| d.rem_euclid(4) == 1) {
            let bc = a * d - 1;
            for b in (-r..=r).step_by(1).filter(|b| b % 2 == 0) {
                let cs: Vec<i64> = if b == 0 {
                    if bc == 0 {
                        (-r..=r).filter(|c| c % 2 == 0).collect()
                    } else {
                        vec![]
                    }
                } else if bc % b == 0 {
                    vec![bc / b]
                } else {
                    vec![]
                };
                for c in cs {
                    let m = [a, b, c, d];
                    if norm(m) <= r && in_sanov_group(m) {
                        out.push(m);
                    }
                }
            }
        }
    }
    out.sort();
    out
}

const LETTERS: [Mat; 4] = [[1, 2, 0, 1], [1, -2, 0, 1], [1, 0, 2, 1], [1, 0, -2, 1]];

/// One generator `(g s)(g s)^T` per step `g -> g s` leaving the ball.
fn generators_oracle(r: i64) -> (usize, Vec<Mat>) {
    let omega = omega_oracle(r);
    let mut gens = Vec::new();
    for &g in &omega {
        for s in LETTERS {
            let h = mul(g, s);
            if omega.binary_search(&h).is_err() {
                gens.push(mul(h, transpose(h)));
            }
        }
    }
    gens.sort();
    (omega.len(), gens)
}

fn as_mats(set: &GeneratorSet) -> Vec<Mat> {
    let mut v: Vec<Mat> = set
        .matrices()
        .map(|m| m.to_i64().expect("small entries"))
        .collect();
    v.sort();
    v
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn prime(p: u64) -> Prime {
    Prime::new(p).unwrap()
}

/// Primes above `36 R^2`, where the generators are guaranteed distinct mod p.
fn admissible_primes(r: u64, count: usize) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 36 * r * r;
    while out.len() < count {
        p = next_prime(p);
        out.push(p);
    }
    out
}

fn c1_fixtures() -> Outcome {
    let w1 = as_mats(&build_genset(1).map_err(|e| e.to_string())?);
    let mut want: Vec<Mat> = vec![[5, 2, 2, 1], [1, -2, -2, 5], [1, 2, 2, 5], [5, -2, -2, 1]];
    want.sort();
    ensure(w1 == want, || format!("R=1 gave {w1:?}"))?;

    let set2 = build_genset(2).map_err(|e| e.to_string())?;
    let w2 = as_mats(&set2);
    ensure(w2.len() == 12, || {
        format!("R=2 has {} generators", w2.len())
    })?;
    ensure(set2.max_norm == 29.into(), || {
        format!("R=2 max norm {}", set2.max_norm)
    })?;
    for m in [[17, 4, 4, 1], [29, 12, 12, 5]] {
        ensure(w2.contains(&m), || format!("R=2 lacks {m:?}"))?;
    }
    for r in 1..=3 {
        let (_, oracle) = generators_oracle(r);
        let got = as_mats(&build_genset(r as u64).map_err(|e| e.to_string())?);
        ensure(got == oracle, || {
            format!("R={r}: slot reconstruction differs")
        })?;
    }
    Ok("R=1 and R=2 fixtures; R<=3 match slot reconstruction".into())
}

fn c2_lemma_conditions() -> Outcome {
    for r in 1..=8u64 {
        let set = build_genset(r).map_err(|e| e.to_string())?;
        let p = next_prime(36 * r * r);
        let report = verify_genset(&set, Some(prime(p)), 3);
        if !report.passed() {
            let names: Vec<_> = report
                .failures()
                .iter()
                .map(|c| format!("{}: {}", c.name, c.detail))
                .collect();
            return Err(format!("R={r}: {}", names.join("; ")));
        }
        let (omega, oracle) = generators_oracle(r as i64);
        ensure(set.len() == 2 * (omega + 1), || {
            format!("R={r}: |W|={} but |Omega|={omega}", set.len())
        })?;
        ensure(as_mats(&set) == oracle, || {
            format!("R={r}: generators differ from slot reconstruction")
        })?;
        let bound = 18 * r * r;
        ensure(set.max_norm.to_u64().unwrap() <= bound, || {
            format!("R={r}: norm above {bound}")
        })?;
        for m in set.matrices() {
            ensure(m.is_symmetric() && m.det() == 1.into(), || {
                format!("R={r}: {m} not symmetric det 1")
            })?;
            ensure(set.position(&m.sigma()).is_some(), || {
                format!("R={r}: sigma({m}) missing")
            })?;
            ensure(set.position(&m.tau()).is_some(), || {
                format!("R={r}: tau({m}) missing")
            })?;
            ensure(set.position(&m.inv()).is_some(), || {
                format!("R={r}: {m}^-1 missing")
            })?;
        }
    }
    Ok("R=1..8 all conditions hold".into())
}

fn margulis_spec(p: u64) -> CayleySpec {
    CayleySpec::from_genset(&margulis_genset(), prime(p)).unwrap()
}

fn c3_oracle_equivalence() -> Outcome {
    let mut instances: Vec<(String, CayleySpec)> = Vec::new();
    for p in [3, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
        instances.push((format!("margulis p={p}"), margulis_spec(p)));
    }
    for r in [1, 2] {
        let set = build_genset(r).map_err(|e| e.to_string())?;
        for p in admissible_primes(r, 4) {
            instances.push((
                format!("R={r} p={p}"),
                CayleySpec::from_genset(&set, prime(p)).unwrap(),
            ));
        }
        for p in admissible_primes(r, 2) {
            let gl = build_gl_spec(&set, prime(p)).map_err(|e| e.to_string())?;
            instances.push((format!("R={r} p={p} det -1"), gl));
        }
    }
    for (name, spec) in &instances {
        let bfs = girth_bfs(spec).map_err(|e| format!("{name}: {e}"))?;
        let oracle = girth_oracle(spec, bfs.girth as usize)
            .ok_or_else(|| format!("{name}: oracle found nothing"))?;
        ensure(bfs.girth == oracle.girth, || {
            format!("{name}: bfs {} oracle {}", bfs.girth, oracle.girth)
        })?;
        ensure(spec.eval_witness(&bfs.witness).is_identity(), || {
            format!("{name}: bad witness")
        })?;
    }
    let g3 = girth_bfs(&margulis_spec(3)).unwrap().girth;
    ensure(g3 == 3, || format!("margulis p=3 girth {g3}"))?;
    Ok(format!(
        "{} instances agree; margulis p=3 girth 3",
        instances.len()
    ))
}

fn survey_grid() -> Result<Vec<SurveyCell>, String> {
    let margulis_primes: Vec<u64> = (3..=97)
        .filter(|&p| sanov_core::exact2::is_prime(p))
        .collect();
    let mut cells = survey(&[GensetSource::Margulis], &margulis_primes, DEFAULT_BUDGET)
        .map_err(|e| e.to_string())?;
    for r in 1..=3 {
        cells.extend(
            survey(
                &[GensetSource::Radius(r)],
                &admissible_primes(r, 3),
                DEFAULT_BUDGET,
            )
            .map_err(|e| e.to_string())?,
        );
    }
    Ok(cells)
}

fn c4_lemma_girth_bound(cells: &[SurveyCell]) -> Outcome {
    let mut computed = 0;
    for c in cells {
        let m = c
            .measured
            .as_ref()
            .ok_or_else(|| format!("R={} p={} not computed: {}", c.source, c.p, c.flags()))?;
        computed += 1;
        // (2M)^ceil(g/2) >= p, recomputed here with big integers
        let lhs = num_bigint::BigUint::from(2 * c.max_norm).pow(m.girth.div_ceil(2));
        ensure(lhs >= c.p.into(), || {
            format!(
                "R={} p={}: girth {} violates the bound",
                c.source, c.p, m.girth
            )
        })?;
        ensure(theorem_check(c), || {
            format!("R={} p={}: theorem_check disagrees", c.source, c.p)
        })?;
        ensure(m.girth >= c.lemma_bound, || {
            format!("R={} p={}: girth below lemma bound", c.source, c.p)
        })?;
        ensure(c.status == CellStatus::Pass, || {
            format!("R={} p={}: {}", c.source, c.p, c.flags())
        })?;
    }
    Ok(format!("{computed} cells, zero violations"))
}

fn c5_generation() -> Outcome {
    for p in [3u64, 5, 7, 11, 13] {
        let n = component_size(&margulis_spec(p), DEFAULT_BUDGET).map_err(|e| e.to_string())?;
        ensure(n == p * (p * p - 1), || format!("p={p}: component {n}"))?;
    }
    Ok("component = p(p^2-1) for p in 3..13".into())
}

fn c6_density() -> Outcome {
    let n = 10_000u64;
    let density = prim_count(n, CountMode::Quadrant) as f64 / (n * n) as f64;
    let rel = (density / INV_ZETA_2 - 1.0).abs();
    ensure(rel <= 0.01, || {
        format!("prim density {density} off by {rel}")
    })?;
    let euler = rational_to_f64(&euler_product_partial(n).map_err(|e| e.to_string())?);
    let rel_e = (euler / INV_ZETA_2 - 1.0).abs();
    ensure(rel_e <= 0.001, || {
        format!("euler product {euler} off by {rel_e}")
    })?;
    Ok(format!(
        "prim density {density:.6} (rel {rel:.2e}), euler {euler:.8} (rel {rel_e:.2e})"
    ))
}

/// `hist[k]` = determinant-one integer matrices of max-entry norm exactly `k`.
fn sl2_histogram(r: i64) -> Vec<u64> {
    let mut hist = vec![0u64; r as usize + 1];
    for a in -r..=r {
        for b in -r..=r {
            for c in -r..=r {
                for d in -r..=r {
                    if a * d - b * c == 1 {
                        hist[norm([a, b, c, d]) as usize] += 1;
                    }
                }
            }
        }
    }
    hist
}

fn c7_ball_counts() -> Outcome {
    ensure(sl2_ball_count(1) == 20, || {
        format!("sl2(1) = {}", sl2_ball_count(1))
    })?;
    for r in 1..=100u64 {
        let s = sl2_ball_count(r);
        ensure(s as f64 >= INV_ZETA_2 * (r * r) as f64, || {
            format!("R={r}: {s} below 6/pi^2 R^2")
        })?;
        let prim = prim_count(r, CountMode::All);
        ensure(s >= prim, || format!("R={r}: {s} below prim {prim}"))?;
    }
    let hist = sl2_histogram(30);
    let mut cumulative = 0;
    for r in 1..=30u64 {
        cumulative += hist[r as usize];
        let s = sl2_ball_count(r);
        ensure(s == cumulative, || {
            format!("R={r}: count {s}, all-tuples {cumulative}")
        })?;
        let omega = enum_omega(r).map_err(|e| e.to_string())?.len() as u64;
        ensure(omega <= s, || format!("R={r}: |Omega|={omega} exceeds {s}"))?;
    }
    Ok("bounds hold for R<=100; all-tuples agreement for R<=30".into())
}

/// Ball sizes recorded from the congruence oracle.
const OMEGA_FIXTURES: [(u64, usize); 4] = [(8, 61), (16, 221), (32, 869), (64, 3389)];

fn c8_growth() -> Outcome {
    let mut sizes = BTreeMap::new();
    for (r, want) in OMEGA_FIXTURES {
        let got = enum_omega(r).map_err(|e| e.to_string())?.len();
        let oracle = omega_oracle(r as i64).len();
        ensure(got == want && oracle == want, || {
            format!("R={r}: enum {got}, oracle {oracle}, fixture {want}")
        })?;
        sizes.insert(r, got);
    }
    let mut ratios = Vec::new();
    for r in [8, 16, 32] {
        let ratio = sizes[&(2 * r)] as f64 / sizes[&r] as f64;
        ensure((3.0..=6.0).contains(&ratio), || {
            format!("R={r}: ratio {ratio}")
        })?;
        ratios.push(format!("{ratio:.3}"));
    }
    Ok(format!("ratios {}", ratios.join(", ")))
}

fn c9_bipartite() -> Outcome {
    let mut n = 0;
    for r in [1, 2] {
        let set = build_genset(r).map_err(|e| e.to_string())?;
        for p in admissible_primes(r, 3) {
            let sl = CayleySpec::from_genset(&set, prime(p)).unwrap();
            let gl = build_gl_spec(&set, prime(p)).map_err(|e| e.to_string())?;
            let g = girth_bfs(&sl).map_err(|e| e.to_string())?.girth;
            let eg = even_girth(&sl).map_err(|e| e.to_string())?.girth;
            let gl_g = girth_bfs(&gl).map_err(|e| e.to_string())?.girth;
            ensure(gl_g == eg, || {
                format!("R={r} p={p}: bipartite girth {gl_g}, even girth {eg}")
            })?;
            ensure(g <= eg && eg <= 2 * g, || {
                format!("R={r} p={p}: girth {g}, even girth {eg}")
            })?;
            n += 1;
        }
    }
    let j = ExactMatrix::antidiagonal();
    ensure(j.det() == (-1).into(), || "J has det 1".into())?;
    Ok(format!("{n} instances"))
}

fn c10_figure_of_merit(cells: &[SurveyCell]) -> Outcome {
    let mut margulis_min = f64::INFINITY;
    for c in cells {
        let m = c
            .measured
            .as_ref()
            .ok_or_else(|| format!("R={} p={} not computed", c.source, c.p))?;
        let moore = moore_bound(m.n_p, c.degree as u64);
        ensure(m.girth as f64 <= moore + 1.0, || {
            format!(
                "R={} p={}: girth {} above Moore {moore}",
                c.source, c.p, m.girth
            )
        })?;
        let ratio = m.girth as f64 * ((c.degree - 1) as f64).ln() / (m.n_p as f64).ln();
        ensure((ratio - m.ratio_c).abs() < 1e-12, || {
            format!("R={} p={}: ratio mismatch", c.source, c.p)
        })?;
        if c.source == GensetSource::Margulis && c.p >= 13 {
            ensure(m.ratio_c > 0.5, || {
                format!("margulis p={}: ratio {}", c.p, m.ratio_c)
            })?;
            margulis_min = margulis_min.min(m.ratio_c);
        }
    }
    Ok(format!(
        "Moore bound holds on {} cells; min margulis ratio (p>=13) {margulis_min:.4}",
        cells.len()
    ))
}

fn run(n: u32, title: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = f();
    let took = start.elapsed();
    let (ok, detail) = match outcome {
        Ok(d) if took <= limit => (true, d),
        Ok(d) => (false, format!("{d}; took longer than {limit:?}")),
        Err(e) => (false, e),
    };
    println!(
        "{} criterion {n:>2} {title}: {detail} [{:.2}s]",
        if ok { "PASS" } else { "FAIL" },
        took.as_secs_f64()
    );
    ok
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let mut all = true;
    all &= run(1, "generator fixtures", secs(1), c1_fixtures);
    all &= run(2, "generator set conditions", secs(10), c2_lemma_conditions);
    all &= run(
        3,
        "girth search vs word oracle",
        secs(60),
        c3_oracle_equivalence,
    );

    let start = Instant::now();
    let grid = survey_grid();
    let survey_time = start.elapsed();
    all &= run(
        4,
        "girth lower bound on survey grid",
        secs(300).saturating_sub(survey_time),
        || c4_lemma_girth_bound(grid.as_ref().map_err(Clone::clone)?),
    );
    all &= run(5, "generation of SL2(F_p)", secs(10), c5_generation);
    all &= run(6, "coprime density", secs(30), c6_density);
    all &= run(7, "SL2 ball counts", secs(120), c7_ball_counts);
    all &= run(8, "quadratic growth of the ball", secs(120), c8_growth);
    all &= run(
        9,
        "bipartite double cover identity",
        secs(120),
        c9_bipartite,
    );
    all &= run(10, "Moore bound and ratio report", secs(5), || {
        c10_figure_of_merit(grid.as_ref().map_err(Clone::clone)?)
    });
    println!("survey grid computed in {:.2}s", survey_time.as_secs_f64());

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
