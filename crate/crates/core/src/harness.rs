//! Girth bounds and the `(R, p)` survey.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Condvar, Mutex};

use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact2::{is_prime, Prime, ETA};
use crate::forge::{build_genset, GeneratorSet};
use crate::girth::{
    check_injective, closure_bytes, component_size, even_girth_within, girth_bfs_within,
    margulis_genset, CayleySpec,
};

/// Margulis' asymptotic constant `2 ln 3 / (3 ln(1 + sqrt 2))`, for reference only.
pub const MARGULIS_CONSTANT: f64 = 0.831;

/// `(x)^e`, saturating at `u128::MAX`.
fn sat_pow(x: u128, e: u32) -> u128 {
    (0..e).fold(1u128, |acc, _| acc.saturating_mul(x))
}

fn ceil_half(k: u32) -> u32 {
    k.div_ceil(2)
}

/// Smallest `k >= 1` with `(eta M)^ceil(k/2) >= eta p / 2`, in integers:
/// `2 (eta M)^ceil(k/2) >= eta p`.
pub fn lemma_bound(p: u64, max_norm: u64, eta: u64) -> u32 {
    assert!(
        max_norm >= 2 && eta >= 1,
        "lemma_bound needs M >= 2 and eta >= 1"
    );
    let base = eta as u128 * max_norm as u128;
    let target = eta as u128 * p as u128;
    let mut k = 1;
    while 2u128.saturating_mul(sat_pow(base, ceil_half(k))) < target {
        k += 1;
    }
    k
}

/// Moore-type upper bound `1 + 2 ln(n) / ln(d - 1)` for a `d`-regular graph on `n` vertices.
pub fn moore_bound(n: u64, d: u64) -> f64 {
    1.0 + 2.0 * (n as f64).ln() / ((d - 1) as f64).ln()
}

/// Which generating set a survey row uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GensetSource {
    Margulis,
    Radius(u64),
}

impl GensetSource {
    pub fn build(self) -> Result<GeneratorSet> {
        match self {
            GensetSource::Margulis => Ok(margulis_genset()),
            GensetSource::Radius(r) => build_genset(r),
        }
    }
}

impl fmt::Display for GensetSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GensetSource::Margulis => f.write_str("margulis"),
            GensetSource::Radius(r) => write!(f, "{r}"),
        }
    }
}

impl FromStr for GensetSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "margulis" | "m" => Ok(GensetSource::Margulis),
            t => match t.parse::<u64>() {
                Ok(r) if r >= 1 => Ok(GensetSource::Radius(r)),
                _ => Err(Error::Invalid(format!("bad radius {t:?}"))),
            },
        }
    }
}

/// Comma-separated radii, `margulis` allowed as an entry.
pub fn parse_sources(list: &str) -> Result<Vec<GensetSource>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect()
}

/// `p1,p2,...` (each must be prime) or `START:END` (all primes in the inclusive range).
pub fn parse_primes(spec: &str) -> Result<Vec<u64>> {
    if let Some((lo, hi)) = spec.split_once(':') {
        let parse = |s: &str| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| Error::Invalid(format!("bad prime range {spec:?}")))
        };
        let (lo, hi) = (parse(lo)?, parse(hi)?);
        if lo > hi {
            return Err(Error::Invalid(format!("empty prime range {spec:?}")));
        }
        return Ok((lo..=hi).filter(|&p| is_prime(p)).collect());
    }
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let p = s
                .trim()
                .parse::<u64>()
                .map_err(|_| Error::Invalid(format!("bad prime {s:?}")))?;
            if is_prime(p) {
                Ok(p)
            } else {
                Err(Error::NotPrime(p))
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkipReason {
    NonInjective,
    Budget,
}

impl SkipReason {
    fn code(self) -> &'static str {
        match self {
            SkipReason::NonInjective => "non_injective",
            SkipReason::Budget => "budget",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CellStatus {
    Pass,
    /// Names of the violated checks.
    Fail(Vec<&'static str>),
    Skipped(SkipReason),
}

/// Measured quantities for a cell that was actually computed.
#[derive(Clone, Debug, PartialEq)]
pub struct Measured {
    pub n_p: u64,
    pub girth: u32,
    pub even_girth: u32,
    pub moore_bound: f64,
    pub ratio_c: f64,
    pub witness: Vec<usize>,
}

/// One `(R, p)` row of the survey.
#[derive(Clone, Debug, PartialEq)]
pub struct SurveyCell {
    pub source: GensetSource,
    pub p: u64,
    pub degree: usize,
    pub max_norm: u64,
    pub lemma_bound: u32,
    pub measured: Option<Measured>,
    pub status: CellStatus,
}

impl SurveyCell {
    pub fn girth(&self) -> Option<u32> {
        self.measured.as_ref().map(|m| m.girth)
    }

    pub fn is_computed(&self) -> bool {
        self.measured.is_some()
    }

    pub fn flags(&self) -> String {
        match &self.status {
            CellStatus::Pass => "pass".into(),
            CellStatus::Fail(why) => format!("fail:{}", why.join(";")),
            CellStatus::Skipped(r) => format!("skipped:{}", r.code()),
        }
    }
}

/// `(2M)^ceil(g/2) >= p`, exactly. Skipped cells are vacuously fine.
pub fn theorem_check(cell: &SurveyCell) -> bool {
    match &cell.measured {
        Some(m) => {
            let lhs = sat_pow(ETA as u128 * cell.max_norm as u128, ceil_half(m.girth));
            lhs >= cell.p as u128
        }
        None => true,
    }
}

/// Hands out slices of a global byte budget to concurrently running cells.
struct BudgetPool {
    total: u64,
    used: Mutex<u64>,
    freed: Condvar,
}

impl BudgetPool {
    fn new(total: u64) -> Self {
        BudgetPool {
            total,
            used: Mutex::new(0),
            freed: Condvar::new(),
        }
    }

    fn with<T>(&self, bytes: u64, f: impl FnOnce() -> T) -> T {
        {
            let mut used = self.used.lock().expect("budget lock");
            while *used + bytes > self.total {
                used = self.freed.wait(used).expect("budget lock");
            }
            *used += bytes;
        }
        let out = f();
        *self.used.lock().expect("budget lock") -= bytes;
        self.freed.notify_all();
        out
    }
}

fn run_cell(
    source: GensetSource,
    set: &GeneratorSet,
    p: u64,
    pool: &BudgetPool,
) -> Result<SurveyCell> {
    let prime = Prime::new(p)?;
    let max_norm = set
        .max_norm
        .to_u64()
        .ok_or_else(|| Error::Invalid(format!("max norm {} too large", set.max_norm)))?;
    let mut cell = SurveyCell {
        source,
        p,
        degree: set.len(),
        max_norm,
        lemma_bound: lemma_bound(p, max_norm, ETA as u64),
        measured: None,
        status: CellStatus::Skipped(SkipReason::NonInjective),
    };
    if !check_injective(set, prime) {
        return Ok(cell);
    }
    let spec = CayleySpec::from_genset(set, prime)?;
    let bytes = closure_bytes(&spec);
    if bytes > pool.total {
        cell.status = CellStatus::Skipped(SkipReason::Budget);
        return Ok(cell);
    }
    let measured = pool.with(bytes, || -> Result<Option<Measured>> {
        let n_p = match component_size(&spec, bytes) {
            Ok(n) => n,
            Err(Error::BudgetExceeded { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let odd = girth_bfs_within(&spec, pool.total);
        let even = even_girth_within(&spec, pool.total);
        let (odd, even) = match (odd, even) {
            (Ok(o), Ok(e)) => (o, e),
            (Err(Error::BudgetExceeded { .. }), _) | (_, Err(Error::BudgetExceeded { .. })) => {
                return Ok(None)
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        let d = set.len() as u64;
        let ln_d1 = ((d - 1) as f64).ln();
        let witness_ok = spec.eval_witness(&odd.witness).is_identity()
            && spec.is_cyclically_reduced(&odd.witness)
            && spec.eval_witness(&even.witness).is_identity();
        let m = Measured {
            n_p,
            girth: odd.girth,
            even_girth: even.girth,
            moore_bound: moore_bound(n_p, d),
            ratio_c: odd.girth as f64 * ln_d1 / (n_p as f64).ln(),
            witness: if witness_ok { odd.witness } else { Vec::new() },
        };
        Ok(Some(m))
    })?;
    let Some(m) = measured else {
        cell.status = CellStatus::Skipped(SkipReason::Budget);
        return Ok(cell);
    };

    let mut failed = Vec::new();
    if m.witness.is_empty() {
        failed.push("witness");
    }
    if m.girth < cell.lemma_bound {
        failed.push("lemma_bound");
    }
    if m.girth as f64 > m.moore_bound + 1.0 {
        failed.push("moore");
    }
    if !(m.girth <= m.even_girth && m.even_girth <= 2 * m.girth) {
        failed.push("even_girth");
    }
    cell.measured = Some(m);
    if !theorem_check(&cell) {
        failed.push("theorem");
    }
    cell.status = if failed.is_empty() {
        CellStatus::Pass
    } else {
        CellStatus::Fail(failed)
    };
    Ok(cell)
}

/// Runs every `(source, p)` cell. Rows come back ordered by source
/// (Margulis first, then radius ascending) and prime ascending; cells run
/// in parallel but never hold more closure memory than `budget` in total.
pub fn survey(sources: &[GensetSource], primes: &[u64], budget: u64) -> Result<Vec<SurveyCell>> {
    let mut sources = sources.to_vec();
    sources.sort();
    sources.dedup();
    let mut primes = primes.to_vec();
    primes.sort_unstable();
    primes.dedup();

    let sets: BTreeMap<GensetSource, GeneratorSet> = sources
        .iter()
        .map(|&s| Ok((s, s.build()?)))
        .collect::<Result<_>>()?;
    let pool = BudgetPool::new(budget);
    let jobs: Vec<(GensetSource, u64)> = sources
        .iter()
        .flat_map(|&s| primes.iter().map(move |&p| (s, p)))
        .collect();
    jobs.par_iter()
        .map(|&(s, p)| run_cell(s, &sets[&s], p, &pool))
        .collect()
}

pub const CSV_HEADER: &str =
    "R,p,d,max_norm,n_p,girth,even_girth,lemma_bound,moore_bound,ratio_C,flags";

/// CSV with a header row; empty fields for quantities a skipped cell lacks.
pub fn to_csv(cells: &[SurveyCell]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for c in cells {
        let (n_p, g, eg, moore, ratio) = match &c.measured {
            Some(m) => (
                m.n_p.to_string(),
                m.girth.to_string(),
                m.even_girth.to_string(),
                format!("{:.4}", m.moore_bound),
                format!("{:.4}", m.ratio_c),
            ),
            None => Default::default(),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            c.source,
            c.p,
            c.degree,
            c.max_norm,
            n_p,
            g,
            eg,
            c.lemma_bound,
            moore,
            ratio,
            c.flags()
        ));
    }
    out
}
