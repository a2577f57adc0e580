//! Generic dimension of plane linear systems with assigned multiplicities,
//! as the corank of an interpolation matrix over `Z/p` at random points.
//!
//! A point `(x, y)` of multiplicity `mu` contributes one row per mixed
//! partial `d^s/dx^s d^t/dy^t` with `s + t < mu`; the column of `x^a y^b`
//! holds `a!/(a-s)! b!/(b-t)! x^(a-s) y^(b-t)`. Since `p > d`, none of these
//! falling factorials vanish. Special positions only lower the rank, so
//! the smallest corank over the trials is taken as the generic value.

pub mod field;

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cache::JsonlCache;
use crate::cremona::{apply_rule, elementary_quadratic, reduce, Rule};
use crate::error::{Error, Result};
use crate::nef::is_nef_small;
use crate::notation::AnyClass;
use crate::picard::{chi, from_ruled, PicardClass};
use field::{add_mod, is_prime, mul_mod, rank_mod, DEFAULT_PRIME};

pub const DEFAULT_TRIALS: u32 = 5;
/// Environment variable holding the default seed.
pub const SEED_ENV: &str = "NAGATA_SEED";
/// Largest matrix (rows times columns) the oracle builds.
pub const MAX_ENTRIES: usize = 16_000_000;

/// `NAGATA_SEED` if set and parseable, else 0.
pub fn default_seed() -> u64 {
    std::env::var(SEED_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(0)
}

fn default_prime() -> u64 {
    DEFAULT_PRIME
}

fn default_trials() -> u32 {
    DEFAULT_TRIALS
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OracleParams {
    #[serde(default = "default_prime")]
    pub prime: u64,
    #[serde(default = "default_trials")]
    pub trials: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl Default for OracleParams {
    fn default() -> Self {
        Self {
            prime: DEFAULT_PRIME,
            trials: DEFAULT_TRIALS,
            seed: default_seed(),
        }
    }
}

impl OracleParams {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            prime: DEFAULT_PRIME,
            trials: DEFAULT_TRIALS,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterpolationProblem {
    pub d: u64,
    pub mults: Vec<u64>,
    #[serde(flatten)]
    pub params: OracleParams,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct H0Result {
    pub d: u64,
    /// Multiplicities actually imposed.
    pub mults: Vec<u64>,
    /// Positions whose negative multiplicity was replaced by 0.
    pub clamped: Vec<usize>,
    pub prime: u64,
    pub trials: u32,
    pub seed: u64,
    pub h0: u64,
    /// `max(0, chi)`.
    pub expected: u64,
    pub special: bool,
    pub coranks: Vec<u64>,
    pub rows: usize,
    pub cols: usize,
}

impl H0Result {
    /// Some trial reached rank `min(rows, cols)`.
    pub fn full_rank_observed(&self) -> bool {
        let best = self.cols - self.rows.min(self.cols);
        self.coranks.iter().any(|&c| c as usize == best)
    }
}

fn validate(p: &InterpolationProblem) -> Result<()> {
    let OracleParams { prime, trials, .. } = p.params;
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if prime >= 1 << 63 || !is_prime(prime) {
        return Err(Error::InvalidArgument(format!(
            "{prime} is not a prime below 2^63"
        )));
    }
    if prime <= p.d {
        return Err(Error::InvalidArgument(format!(
            "prime {prime} must exceed the degree {}",
            p.d
        )));
    }
    Ok(())
}

fn monomials(d: u64) -> Vec<(u64, u64)> {
    (0..=d)
        .flat_map(|a| (0..=d - a).map(move |b| (a, b)))
        .collect()
}

/// `a (a-1) ... (a-s+1) mod p`, with `s <= a`.
fn falling(a: u64, s: u64, p: u64) -> u64 {
    (a - s + 1..=a).fold(1 % p, |acc, x| mul_mod(acc, x % p, p))
}

fn sample_points(rng: &mut ChaCha8Rng, n: usize, p: u64) -> Vec<(u64, u64)> {
    let mut seen = HashSet::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let pt = (rng.random_range(1..p), rng.random_range(1..p));
        if seen.insert(pt) {
            out.push(pt);
        }
    }
    out
}

fn build_matrix(d: u64, mults: &[u64], pts: &[(u64, u64)], p: u64, cols: usize) -> Vec<u64> {
    let mons = monomials(d);
    let mut m = Vec::new();
    for (&mu, &(x, y)) in mults.iter().zip(pts) {
        let mut xp = vec![1 % p; d as usize + 1];
        let mut yp = vec![1 % p; d as usize + 1];
        for e in 1..=d as usize {
            xp[e] = mul_mod(xp[e - 1], x, p);
            yp[e] = mul_mod(yp[e - 1], y, p);
        }
        for order in 0..mu {
            for s in 0..=order {
                let t = order - s;
                let start = m.len();
                m.resize(start + cols, 0);
                for (c, &(a, b)) in mons.iter().enumerate() {
                    if a < s || b < t {
                        continue;
                    }
                    let coeff = mul_mod(falling(a, s, p), falling(b, t, p), p);
                    let v = mul_mod(coeff, mul_mod(xp[(a - s) as usize], yp[(b - t) as usize], p), p);
                    m[start + c] = add_mod(m[start + c], v, p);
                }
            }
        }
    }
    m
}

fn corank_trial(prob: &InterpolationProblem, trial: u32, rows: usize, cols: usize) -> u64 {
    let p = prob.params.prime;
    let mut rng = ChaCha8Rng::seed_from_u64(prob.params.seed);
    rng.set_stream(trial as u64);
    let active: Vec<u64> = prob.mults.iter().copied().filter(|&m| m > 0).collect();
    let pts = sample_points(&mut rng, active.len(), p);
    let mut m = build_matrix(prob.d, &active, &pts, p, cols);
    (cols - rank_mod(&mut m, rows, cols, p)) as u64
}

/// Generic `h0` of `(d; mults)` by random interpolation.
pub fn h0_generic(prob: &InterpolationProblem) -> Result<H0Result> {
    validate(prob)?;
    let cols = ((prob.d + 1) * (prob.d + 2) / 2) as usize;
    let rows: usize = prob.mults.iter().map(|&m| (m * (m + 1) / 2) as usize).sum();
    if rows.saturating_mul(cols) > MAX_ENTRIES {
        return Err(Error::Unsupported(format!(
            "interpolation matrix {rows} x {cols} exceeds {MAX_ENTRIES} entries"
        )));
    }
    let trials = prob.params.trials;
    let coranks: Vec<u64> = if rows * cols >= 100_000 && trials > 1 {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..trials)
                .map(|t| scope.spawn(move || corank_trial(prob, t, rows, cols)))
                .collect();
            handles.into_iter().map(|h| h.join().expect("trial thread")).collect()
        })
    } else {
        (0..trials).map(|t| corank_trial(prob, t, rows, cols)).collect()
    };
    let h0 = *coranks.iter().min().expect("trials >= 1");
    let chi = cols as i128 - rows as i128;
    let expected = chi.max(0) as u64;
    Ok(H0Result {
        d: prob.d,
        mults: prob.mults.clone(),
        clamped: Vec::new(),
        prime: prob.params.prime,
        trials,
        seed: prob.params.seed,
        h0,
        expected,
        special: h0 != expected,
        coranks,
        rows,
        cols,
    })
}

fn to_u64(x: &BigInt, what: &str) -> Result<u64> {
    x.to_u64()
        .ok_or_else(|| Error::OutOfRange(format!("{what} {x} does not fit the oracle")))
}

/// `h0` of a plane class; negative multiplicities are clamped to 0 and
/// recorded. Negative degree is rejected.
pub fn h0_class(l: &PicardClass, params: &OracleParams) -> Result<H0Result> {
    if l.degree().is_negative() {
        return Err(Error::Precondition(format!(
            "degree {} is negative; the oracle needs d >= 0",
            l.degree()
        )));
    }
    let d = to_u64(l.degree(), "degree")?;
    let mut clamped = Vec::new();
    let mut mults = Vec::with_capacity(l.r());
    for (i, m) in l.mults().iter().enumerate() {
        if m.is_negative() {
            clamped.push(i);
            mults.push(0);
        } else {
            mults.push(to_u64(m, "multiplicity")?);
        }
    }
    let mut res = h0_generic(&InterpolationProblem {
        d,
        mults,
        params: *params,
    })?;
    res.clamped = clamped;
    Ok(res)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HrReport {
    pub independent: bool,
    pub h0: u64,
    #[serde(with = "crate::picard::bigint_serde")]
    pub chi: BigInt,
    pub result: H0Result,
}

/// Whether `r` general `mu`-fold points impose independent conditions on
/// curves of degree `d`.
pub fn hr_check(d: u64, mu: u64, r: u64, params: &OracleParams) -> Result<HrReport> {
    let c = chi(d, mu, r);
    let len = usize::try_from(r).map_err(|_| Error::OutOfRange(format!("r = {r}")))?;
    let result = h0_generic(&InterpolationProblem {
        d,
        mults: vec![mu; len],
        params: *params,
    })?;
    let full_row = result.coranks.iter().any(|&k| {
        result.rows <= result.cols && k as usize == result.cols - result.rows
    });
    let independent = BigInt::from(result.h0) == c.clone().max(BigInt::zero())
        && (c.is_negative() || full_row);
    Ok(HrReport {
        independent,
        h0: result.h0,
        chi: c,
        result,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransformSpec {
    Elementary { indices: [usize; 3] },
    Rule {
        rule: Rule,
        s: u32,
        #[serde(default)]
        designated: Option<Vec<usize>>,
    },
    Reduce,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub equal: bool,
    pub before: PicardClass,
    pub after: PicardClass,
    pub h0_before: u64,
    pub h0_after: u64,
}

fn plane(c: &AnyClass) -> Result<PicardClass> {
    match c {
        AnyClass::Picard(p) => Ok(p.clone()),
        AnyClass::Ruled(r) => from_ruled(r),
    }
}

/// Compares generic `h0` before and after a transformation, both read as
/// plane classes with negative multiplicities clamped.
pub fn cremona_invariance_check(
    class: &AnyClass,
    transform: &TransformSpec,
    params: &OracleParams,
) -> Result<InvarianceReport> {
    let image: AnyClass = match (transform, class) {
        (TransformSpec::Elementary { indices: [i, j, k] }, AnyClass::Picard(p)) => {
            elementary_quadratic(p, *i, *j, *k)?.into()
        }
        (TransformSpec::Reduce, AnyClass::Picard(p)) => reduce(p).result.into(),
        (TransformSpec::Rule { rule, s, designated }, AnyClass::Ruled(r)) => {
            apply_rule(*rule, r, *s, designated.as_deref())?.into()
        }
        _ => {
            return Err(Error::InvalidArgument(
                "elementary and reduce act on plane classes, rules on ruled classes".into(),
            ))
        }
    };
    let before = plane(class)?;
    let after = plane(&image)?;
    for c in [&before, &after] {
        if c.degree().is_negative() {
            return Err(Error::Precondition(format!("{c} has negative degree")));
        }
    }
    let h0_before = h0_class(&before, params)?.h0;
    let h0_after = h0_class(&after, params)?.h0;
    Ok(InvarianceReport {
        equal: h0_before == h0_after,
        before,
        after,
        h0_before,
        h0_after,
    })
}

/// Largest point count for [`nef_cross_check`].
pub const CROSS_MAX_R: usize = 5;
/// Largest coefficient bound for [`nef_cross_check`].
pub const CROSS_MAX_BOUND: i64 = 6;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NefCrossReport {
    pub nef: bool,
    pub violator: Option<PicardClass>,
    pub violator_effective: Option<bool>,
    /// Effective class of the box meeting `L` most negatively, if any.
    pub counterexample: Option<PicardClass>,
    pub effective_count: usize,
    pub consistent: bool,
}

/// Effective classes `(d; m)` with `0 <= d, m_i <= bound` on `r` points.
/// A class of the box `|d|, |m_i| <= bound` is effective iff `d >= 0` and
/// its clamp (negative entries set to 0) is; the clamp is one of these.
pub struct NefCrossChecker {
    r: usize,
    bound: i64,
    params: OracleParams,
    effective: Vec<(i64, Vec<i64>)>,
}

impl NefCrossChecker {
    pub fn new(r: usize, bound: i64, params: &OracleParams) -> Result<Self> {
        if r > CROSS_MAX_R || !(0..=CROSS_MAX_BOUND).contains(&bound) {
            return Err(Error::Unsupported(format!(
                "cross-check needs r <= {CROSS_MAX_R} and 0 <= bound <= {CROSS_MAX_BOUND}"
            )));
        }
        let mut memo: HashMap<(i64, Vec<i64>), bool> = HashMap::new();
        let mut effective = Vec::new();
        let mut m = vec![0i64; r];
        loop {
            let mut key = m.clone();
            key.sort_unstable();
            for d in 0..=bound {
                let k = (d, key.clone());
                let eff = match memo.get(&k) {
                    Some(&e) => e,
                    None => {
                        let cls = PicardClass::from_ints(d, &key);
                        let e = h0_class(&cls, params)?.h0 > 0;
                        memo.insert(k, e);
                        e
                    }
                };
                if eff {
                    effective.push((d, m.clone()));
                }
            }
            // odometer over [0, bound]^r
            let mut i = 0;
            while i < r && m[i] == bound {
                m[i] = 0;
                i += 1;
            }
            if i == r {
                break;
            }
            m[i] += 1;
        }
        Ok(Self {
            r,
            bound,
            params: *params,
            effective,
        })
    }

    pub fn effective_count(&self) -> usize {
        self.effective.len()
    }

    pub fn check(&self, l: &PicardClass) -> Result<NefCrossReport> {
        if l.r() != self.r {
            return Err(Error::Dimension {
                left: l.r(),
                right: self.r,
            });
        }
        let ld = l.degree().to_i64().ok_or_else(|| Error::OutOfRange("degree".into()))?;
        let lm: Vec<i64> = l
            .mults()
            .iter()
            .map(|m| m.to_i64().ok_or_else(|| Error::OutOfRange("multiplicity".into())))
            .collect::<Result<_>>()?;
        let mut worst: Option<(i64, usize)> = None;
        for (idx, (d, m)) in self.effective.iter().enumerate() {
            let mut v = ld * d;
            for (mi, li) in m.iter().zip(&lm) {
                v -= li * mi;
                if *mi == 0 {
                    v += (self.bound * li).min(0);
                }
            }
            if v < 0 && worst.is_none_or(|(w, _)| v < w) {
                worst = Some((v, idx));
            }
        }
        let counterexample = worst.map(|(_, idx)| {
            let (d, m) = &self.effective[idx];
            let full: Vec<i64> = m
                .iter()
                .zip(&lm)
                .map(|(&mi, &li)| if mi == 0 && li < 0 { -self.bound } else { mi })
                .collect();
            PicardClass::from_ints(*d, &full)
        });
        let verdict = is_nef_small(l)?;
        let violator_effective = match &verdict.violator {
            Some(v) if v.degree().is_negative() => Some(false),
            Some(v) => Some(h0_class(v, &self.params)?.h0 > 0),
            None => None,
        };
        let consistent = if verdict.nef {
            counterexample.is_none()
        } else {
            violator_effective == Some(true)
        };
        Ok(NefCrossReport {
            nef: verdict.nef,
            violator: verdict.violator,
            violator_effective,
            counterexample,
            effective_count: self.effective.len(),
            consistent,
        })
    }
}

/// Compares [`is_nef_small`] with an exhaustive scan of effective classes
/// whose coefficients are bounded by `bound` in absolute value.
pub fn nef_cross_check(l: &PicardClass, bound: i64, params: &OracleParams) -> Result<NefCrossReport> {
    NefCrossChecker::new(l.r(), bound, params)?.check(l)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct H0Key {
    pub class: PicardClass,
    pub prime: u64,
    pub seed: u64,
    pub trials: u32,
}

pub type H0Cache = JsonlCache<H0Key, H0Result>;

/// One line of a batch file: a class and optional oracle parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchRequest {
    pub class: PicardClass,
    #[serde(flatten)]
    pub params: OracleParams,
}

pub fn h0_cached(l: &PicardClass, params: &OracleParams, cache: &mut H0Cache) -> Result<H0Result> {
    let key = H0Key {
        class: l.clone(),
        prime: params.prime,
        seed: params.seed,
        trials: params.trials,
    };
    cache.get_or_try_insert_with(key, || h0_class(l, params))
}

/// Runs every request of a JSON-lines document through the cache.
pub fn run_batch(jsonl: &str, cache: &mut H0Cache) -> Result<Vec<H0Result>> {
    jsonl
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, line)| {
            let req: BatchRequest = serde_json::from_str(line)
                .map_err(|e| Error::Parse { pos: n + 1, msg: e.to_string() })?;
            h0_cached(&req.class, &req.params, cache)
        })
        .collect()
}
