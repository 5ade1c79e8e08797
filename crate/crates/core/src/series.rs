//! Partial sums, tail profiles and the rearrangement and net-of-partial-sums
//! certificates.
//!
//! Every certificate here is an inequality between sums of exact monomial
//! term seminorms `‖c_α e_α‖'_{k,P}` computed from a coefficient table.
//! Sampling appears only where a function is compared with a partial sum
//! ([`box_partial_sum_error`]) or where two summation orders are compared
//! ([`permuted_convergence_check`]).

use std::collections::HashSet;
use std::io::Write;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::CoefficientTable;
use crate::error::{Error, Result};
use crate::geometry::Polyannulus;
use crate::multiindex::{box_index_bound, box_points, box_size, shell_of, shell_points, sigma_inverse, MultiIndex};
use crate::seminorms::{monomial_box_seminorm_exact, orders_up_to, DerivativeSamples, Resolution, SeminormKind};
use crate::testfns::{falling_factorial, ipow, TestFunction};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Number of random supersets drawn by [`net_cauchy_check`].
pub const NET_SETS: usize = 100;

/// A finite set of multi-indices, kept sorted in σ-order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteIndexSet {
    indices: Vec<MultiIndex>,
}

impl FiniteIndexSet {
    pub fn new<I: IntoIterator<Item = MultiIndex>>(indices: I) -> Self {
        let mut keyed: Vec<(usize, MultiIndex)> = indices.into_iter().map(|a| (sigma_inverse(&a), a)).collect();
        keyed.sort_by_key(|(j, _)| *j);
        keyed.dedup_by_key(|(j, _)| *j);
        FiniteIndexSet {
            indices: keyed.into_iter().map(|(_, a)| a).collect(),
        }
    }

    pub fn empty() -> Self {
        FiniteIndexSet::default()
    }

    /// The box `Q_N`.
    pub fn cube(big_n: u64, n: usize) -> Self {
        FiniteIndexSet {
            indices: box_points(big_n, n),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, alpha: &MultiIndex) -> bool {
        self.indices.iter().any(|a| a == alpha)
    }

    pub fn iter(&self) -> impl Iterator<Item = &MultiIndex> {
        self.indices.iter()
    }
}

/// `Σ_{α∈S} c_α z^α`, summed in σ-order.
pub fn partial_sum(table: &CoefficientTable, set: &FiniteIndexSet, z: &[Complex64]) -> Result<Complex64> {
    if z.len() != table.dim() {
        return Err(Error::domain("point and table differ in dimension"));
    }
    let mut acc = ZERO;
    for alpha in set.iter() {
        let c = table
            .get(alpha)
            .ok_or_else(|| Error::domain(format!("index {alpha} is outside the table box Q_{}", table.box_n())))?;
        let mono: Complex64 = alpha.entries().iter().zip(z).map(|(&a, &zj)| ipow(zj, a)).product();
        acc += c * mono;
    }
    Ok(acc)
}

fn check_region_dim(table: &CoefficientTable, region: &Polyannulus) -> Result<()> {
    if table.dim() != region.dim() {
        return Err(Error::domain(format!(
            "table has dimension {}, region has {}",
            table.dim(),
            region.dim()
        )));
    }
    Ok(())
}

/// The table coefficient, with disc-axis negative powers zeroed.
///
/// Those coefficients vanish for a function holomorphic across the disc, so
/// anything within the table tolerance is noise. A larger value means the
/// table and region do not belong together.
pub(crate) fn disc_checked_coeff(
    table: &CoefficientTable,
    region: &Polyannulus,
    alpha: &MultiIndex,
) -> Result<Complex64> {
    let c = table
        .get(alpha)
        .ok_or_else(|| Error::domain(format!("index {alpha} is outside the table box Q_{}", table.box_n())))?;
    let on_disc_negative = alpha
        .entries()
        .iter()
        .zip(&region.axes)
        .any(|(&a, axis)| a < 0 && axis.is_disc());
    if !on_disc_negative {
        return Ok(c);
    }
    let tol = table.tolerance(alpha);
    if c.norm() <= tol {
        Ok(ZERO)
    } else {
        Err(Error::DataInconsistency(format!(
            "coefficient {alpha} has |c| = {:e} > tolerance {tol:e} but the region is a disc on a negative axis",
            c.norm()
        )))
    }
}

/// [`disc_checked_coeff`] with values inside the transform's rounding floor
/// reported as zero, since they are indistinguishable from it.
fn effective_coeff(table: &CoefficientTable, region: &Polyannulus, alpha: &MultiIndex) -> Result<Complex64> {
    let c = disc_checked_coeff(table, region, alpha)?;
    Ok(if c.norm() <= table.roundoff_floor(alpha) { ZERO } else { c })
}

/// Exact term seminorms `‖c_{σ(j)} e_{σ(j)}‖'_{k,P}` for every `j` in the
/// table box, in σ-order.
pub fn term_seminorms(table: &CoefficientTable, region: &Polyannulus, k: u32) -> Result<Vec<f64>> {
    check_region_dim(table, region)?;
    box_points(table.box_n(), table.dim())
        .par_iter()
        .map(|alpha| {
            let c = effective_coeff(table, region, alpha)?;
            monomial_box_seminorm_exact(c, alpha, region, k)
        })
        .collect()
}

/// Oracle estimate of the term seminorms beyond the table box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeyondBox {
    /// Sum over shells `N+1 ..= last_shell` of oracle term seminorms.
    pub sum: f64,
    pub last_shell: u64,
    /// The last shell contributed below `1e-3` of the sum (or both vanish).
    pub converged: bool,
}

/// Sums oracle term seminorms over shells past `big_n` until they settle.
pub fn beyond_box_estimate(f: &TestFunction, region: &Polyannulus, k: u32, big_n: u64) -> Result<BeyondBox> {
    let n = region.dim();
    let extra = match n {
        1 => 4 * big_n + 64,
        2 => 2 * big_n + 32,
        _ => big_n + 16,
    };
    let last_shell = big_n + extra;
    let mut sum = 0.0;
    let mut last = 0.0;
    for s in big_n + 1..=last_shell {
        let terms: Vec<f64> = shell_points(s, n)
            .par_iter()
            .map(|alpha| monomial_box_seminorm_exact(f.oracle_coeff(alpha), alpha, region, k))
            .collect::<Result<_>>()?;
        last = terms.iter().sum::<f64>();
        sum += last;
    }
    Ok(BeyondBox {
        sum,
        last_shell,
        converged: last <= 1e-3 * sum || sum == 0.0,
    })
}

/// One row of a tail profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailEntry {
    pub j: usize,
    pub term: f64,
    /// `Σ_{i>j} term_i` inside the table box.
    pub tail: f64,
}

/// Outcome of the prefix-versus-box-sum sandwich over all prefix lengths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichOutcome {
    pub checked: usize,
    pub violations: usize,
    /// Cases where one side holds with equality.
    pub non_strict: usize,
}

impl SandwichOutcome {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailProfile {
    pub k: u32,
    pub region: Polyannulus,
    pub box_n: u64,
    pub entries: Vec<TailEntry>,
    /// Requested cutoff index `M` and `tail(M)` inside the box.
    pub cutoff: usize,
    pub tail_at_cutoff: f64,
    pub beyond_box: Option<BeyondBox>,
    pub sandwich: SandwichOutcome,
}

impl TailProfile {
    pub fn terms(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.term).collect()
    }

    /// `tail(M)` inside the box; zero past the last index.
    pub fn tail(&self, m: usize) -> f64 {
        self.entries.get(m).map_or(0.0, |e| e.tail)
    }

    /// Prefix sum `Σ_{j≤m} term_j`.
    pub fn prefix(&self, m: usize) -> f64 {
        prefix_sums(&self.terms())[m]
    }

    /// `tail(M)` plus the oracle bound beyond the box, when available.
    pub fn total_tail(&self, m: usize) -> Option<f64> {
        self.beyond_box.as_ref().map(|b| self.tail(m) + b.sum)
    }

    /// True when tails never increase along the profile.
    pub fn tails_nonincreasing(&self) -> bool {
        self.entries.windows(2).all(|w| w[1].tail <= w[0].tail) && self.entries.iter().all(|e| e.tail >= 0.0)
    }

    /// CSV columns `j, term, tail`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["j", "term", "tail"])?;
        for e in &self.entries {
            wr.write_record([e.j.to_string(), e.term.to_string(), e.tail.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn prefix_sums(terms: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    terms
        .iter()
        .map(|t| {
            acc += t;
            acc
        })
        .collect()
}

/// Suffix sums `Σ_{i>j} t_i`, accumulated from the end.
fn strict_suffix_sums(terms: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; terms.len()];
    let mut acc = 0.0;
    for j in (0..terms.len()).rev() {
        out[j] = acc;
        acc += terms[j];
    }
    out
}

/// Checks `Σ_{Q_{M1}} ≤ Σ_{j≤m} ≤ Σ_{Q_{M1+1}}` with `M1` the largest
/// integer such that `(2 M1 + 1)^n ≤ m`, for `1 ≤ m < |Q_N|`.
///
/// Box sums are taken from the same σ-order prefix sums, so the comparison
/// involves no reassociation.
pub fn sandwich_check(terms: &[f64], n: usize) -> SandwichOutcome {
    let prefix = prefix_sums(terms);
    let mut out = SandwichOutcome {
        checked: 0,
        violations: 0,
        non_strict: 0,
    };
    for m in 1..terms.len() {
        let m1 = box_index_bound(m as u64, n);
        let hi_idx = box_size(m1 + 1, n) - 1;
        if hi_idx >= terms.len() {
            break;
        }
        let lo = prefix[box_size(m1, n) - 1];
        let hi = prefix[hi_idx];
        let mid = prefix[m];
        out.checked += 1;
        if !(lo <= mid && mid <= hi) {
            out.violations += 1;
        } else if lo == mid || mid == hi {
            out.non_strict += 1;
        }
    }
    out
}

/// Term seminorms in σ-order with running tails, plus the sandwich check.
///
/// `oracle` supplies the closed-form coefficients used to estimate the
/// tail beyond the table box; without it that part is reported as missing.
pub fn tail_seminorm_sum(
    table: &CoefficientTable,
    region: &Polyannulus,
    k: u32,
    cutoff: usize,
    oracle: Option<&TestFunction>,
) -> Result<TailProfile> {
    let terms = term_seminorms(table, region, k)?;
    if cutoff >= terms.len() {
        return Err(Error::domain(format!(
            "cutoff index {cutoff} is outside the table box of {} terms",
            terms.len()
        )));
    }
    let tails = strict_suffix_sums(&terms);
    let entries: Vec<TailEntry> = terms
        .iter()
        .zip(&tails)
        .enumerate()
        .map(|(j, (&term, &tail))| TailEntry { j, term, tail })
        .collect();
    let beyond_box = oracle
        .map(|f| beyond_box_estimate(f, region, k, table.box_n()))
        .transpose()?;
    Ok(TailProfile {
        k,
        region: region.clone(),
        box_n: table.box_n(),
        tail_at_cutoff: tails[cutoff],
        cutoff,
        entries,
        beyond_box,
        sandwich: sandwich_check(&terms, table.dim()),
    })
}

/// `out[o, p, i] = Σ_a mat[p][a] · t[o, a, i]` along `axis`.
fn contract_axis(t: &[Complex64], shape: &mut [usize], axis: usize, mat: &[Vec<Complex64>]) -> Vec<Complex64> {
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let len_a = shape[axis];
    let rows = mat.len();
    let out: Vec<Complex64> = (0..outer * rows * inner)
        .into_par_iter()
        .map(|flat| {
            let i = flat % inner;
            let p = (flat / inner) % rows;
            let o = flat / (inner * rows);
            let mut acc = ZERO;
            for (a, m) in mat[p].iter().enumerate().take(len_a) {
                acc += m * t[(o * len_a + a) * inner + i];
            }
            acc
        })
        .collect();
    shape[axis] = rows;
    out
}

/// `|D^γ (f − Σ_{Q_N} c_α e_α)|` at every grid point, for each `γ` with
/// `|γ|∞ ≤ max_entry`.
fn partial_sum_error_samples(
    f: &TestFunction,
    table: &CoefficientTable,
    big_n: u64,
    region: &Polyannulus,
    max_entry: u32,
    res: Resolution,
) -> Result<DerivativeSamples> {
    check_region_dim(table, region)?;
    if big_n > table.box_n() {
        return Err(Error::domain(format!(
            "partial sum over Q_{big_n} needs a table box of at least {big_n}, have {}",
            table.box_n()
        )));
    }
    if res.radial < 2 || res.angular < 1 {
        return Err(Error::config(format!("invalid sampling resolution {res:?}")));
    }
    f.check_region(region)?;
    let n = region.dim();
    let bn = big_n as i64;
    // disc axes carry no negative powers
    let ranges: Vec<Vec<i64>> = region
        .axes
        .iter()
        .map(|a| if a.is_disc() { (0..=bn).collect() } else { (-bn..=bn).collect() })
        .collect();
    let mut coeffs = Vec::new();
    let mut idx = vec![0usize; n];
    'outer: loop {
        let alpha = MultiIndex::new((0..n).map(|j| ranges[j][idx[j]]).collect());
        coeffs.push(effective_coeff(table, region, &alpha)?);
        for j in 0..n {
            let jj = n - 1 - j;
            idx[jj] += 1;
            if idx[jj] < ranges[jj].len() {
                continue 'outer;
            }
            idx[jj] = 0;
        }
        break;
    }
    // the skipped negative disc powers must still be noise
    for alpha in box_points(big_n, n) {
        effective_coeff(table, region, &alpha)?;
    }

    let grid = region.sample_grid(res.radial, res.angular);
    let gammas = orders_up_to(max_entry, n);
    let values: Vec<(Vec<u32>, Vec<f64>)> = gammas
        .into_iter()
        .map(|gamma| {
            let mut t = coeffs.clone();
            let mut shape: Vec<usize> = ranges.iter().map(Vec::len).collect();
            for j in 0..n {
                let g = gamma[j];
                let mat: Vec<Vec<Complex64>> = grid.axes[j]
                    .iter()
                    .map(|&z| {
                        ranges[j]
                            .iter()
                            .map(|&a| {
                                let ff = falling_factorial(a, g);
                                if ff == 0.0 {
                                    ZERO
                                } else {
                                    ff * ipow(z, a - g as i64)
                                }
                            })
                            .collect()
                    })
                    .collect();
                t = contract_axis(&t, &mut shape, j, &mat);
            }
            let errs: Vec<f64> = (0..grid.len())
                .into_par_iter()
                .map_init(
                    || vec![ZERO; n],
                    |buf, i| {
                        grid.point_into(i, buf);
                        (f.deriv_unchecked(&gamma, buf) - t[i]).norm()
                    },
                )
                .collect();
            (gamma, errs)
        })
        .collect();
    Ok(DerivativeSamples::from_values(region, res, grid, values))
}

/// Sampled `‖f − Σ_{α∈Q_N} c_α e_α‖'_{k,P}`.
pub fn box_partial_sum_error(
    f: &TestFunction,
    table: &CoefficientTable,
    big_n: u64,
    region: &Polyannulus,
    k: u32,
    res: Resolution,
) -> Result<f64> {
    Ok(box_partial_sum_errors(f, table, big_n, region, &[k], res)?[0])
}

/// [`box_partial_sum_error`] for several orders on one sample set.
pub fn box_partial_sum_errors(
    f: &TestFunction,
    table: &CoefficientTable,
    big_n: u64,
    region: &Polyannulus,
    ks: &[u32],
    res: Resolution,
) -> Result<Vec<f64>> {
    let max_k = ks.iter().copied().max().unwrap_or(0);
    let samples = partial_sum_error_samples(f, table, big_n, region, max_k, res)?;
    ks.iter()
        .map(|&k| samples.report(SeminormKind::Box, k).map(|r| r.value))
        .collect()
}

/// Smallest `N₀` with `Σ_{N₀ < j < |Q_N|} term_j < ε/2`.
pub fn net_threshold(terms: &[f64], eps: f64) -> usize {
    let tails = strict_suffix_sums(terms);
    tails
        .iter()
        .position(|&t| t < eps / 2.0)
        .expect("the tail after the last index is zero")
}

/// Verdict of [`net_cauchy_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetCauchyVerdict {
    pub n0: usize,
    /// Shell of `σ(N₀)`, the box edge that `N₀` corresponds to.
    pub n0_shell: u64,
    pub epsilon: f64,
    pub k: u32,
    pub tail_at_n0: f64,
    pub beyond_box: Option<BeyondBox>,
    pub sets: usize,
    /// Largest certified bound `Σ_{J∖I} + Σ_{K∖I}` over all pairs.
    pub max_bound: f64,
    pub violations: usize,
    pub seed: u64,
}

impl NetCauchyVerdict {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Draws a random superset of `{0..=n0}` inside `0..total` with at most
/// `2 n0` elements (or `n0 + 1` when `n0 = 0`), as a sorted index list.
fn random_superset<R: Rng>(rng: &mut R, n0: usize, total: usize) -> Vec<usize> {
    let outside = total - (n0 + 1);
    let extra = rng.gen_range(0..=n0.saturating_sub(1)).min(outside);
    let mut picked: Vec<usize> = rand::seq::index::sample(rng, outside, extra)
        .into_iter()
        .map(|i| i + n0 + 1)
        .collect();
    picked.sort_unstable();
    (0..=n0).chain(picked).collect()
}

/// Finds `N₀` for `ε` and certifies `‖Σ_J − Σ_K‖' ≤ Σ_{J∖I} + Σ_{K∖I} < ε`
/// for [`NET_SETS`] random pairs `J, K ⊇ I = {σ(0..=N₀)}` inside the box.
pub fn net_cauchy_check(
    table: &CoefficientTable,
    region: &Polyannulus,
    k: u32,
    eps: f64,
    seed: u64,
    oracle: Option<&TestFunction>,
) -> Result<NetCauchyVerdict> {
    if !(eps > 0.0) {
        return Err(Error::config(format!("ε must be positive, got {eps}")));
    }
    let terms = term_seminorms(table, region, k)?;
    let beyond_box = oracle
        .map(|f| beyond_box_estimate(f, region, k, table.box_n()))
        .transpose()?;
    if let Some(b) = &beyond_box {
        if b.sum >= eps / 2.0 {
            return Err(Error::BoxTooSmall {
                box_n: table.box_n() as usize,
                beyond: b.sum,
                needed: eps / 2.0,
            });
        }
    }
    let n0 = net_threshold(&terms, eps);
    let tail_at_n0 = strict_suffix_sums(&terms)[n0];
    let total = terms.len();
    let bounds: Vec<f64> = (0..NET_SETS)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let j_set = random_superset(&mut rng, n0, total);
            let k_set = random_superset(&mut rng, n0, total);
            let outside_i = |s: &[usize]| s.iter().filter(|&&j| j > n0).map(|&j| terms[j]).sum::<f64>();
            outside_i(&j_set) + outside_i(&k_set)
        })
        .collect();
    let violations = bounds.iter().filter(|&&b| !(b < eps)).count();
    Ok(NetCauchyVerdict {
        n0,
        n0_shell: shell_of(n0, table.dim()),
        epsilon: eps,
        k,
        tail_at_n0,
        beyond_box,
        sets: NET_SETS,
        max_bound: bounds.iter().copied().fold(0.0, f64::max),
        violations,
        seed,
    })
}

/// One random rearrangement in [`permuted_convergence_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    /// Sampled distance between the full σ-order and τ-order sums.
    pub discrepancy: f64,
    /// Shortest τ-prefix containing `σ(0..=N₀)`.
    pub covering_prefix: usize,
    /// Largest `Σ_{j∉prefix} term_j` over prefixes at least that long.
    pub max_missing: f64,
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermutationVerdict {
    pub k: u32,
    pub epsilon: f64,
    pub n0: usize,
    pub tail_at_n0: f64,
    pub identity_discrepancy: f64,
    pub max_discrepancy: f64,
    pub violations: usize,
    pub seed: u64,
    pub trials: Vec<TrialOutcome>,
}

impl PermutationVerdict {
    /// Both the reassociation bound and the prefix mechanism hold.
    pub fn passed(&self, discrepancy_tol: f64) -> bool {
        self.violations == 0 && self.max_discrepancy < discrepancy_tol && self.identity_discrepancy == 0.0
    }

    /// CSV columns `trial, discrepancy, covering_prefix, max_missing, violations`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["trial", "discrepancy", "covering_prefix", "max_missing", "violations"])?;
        for t in &self.trials {
            wr.write_record([
                t.trial.to_string(),
                t.discrepancy.to_string(),
                t.covering_prefix.to_string(),
                t.max_missing.to_string(),
                t.violations.to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Values `D^γ(c_α e_α)` for every table term (σ-order) at every grid point.
struct TermSamples {
    /// `[γ][point][term]`
    values: Vec<Vec<Vec<Complex64>>>,
}

impl TermSamples {
    fn new(coeffs: &[(MultiIndex, Complex64)], region: &Polyannulus, k: u32, res: Resolution) -> Self {
        let n = region.dim();
        let grid = region.sample_grid(res.radial, res.angular);
        let values = orders_up_to(k, n)
            .into_iter()
            .map(|gamma| {
                (0..grid.len())
                    .into_par_iter()
                    .map(|i| {
                        let z = grid.point(i);
                        coeffs
                            .iter()
                            .map(|(alpha, c)| {
                                if *c == ZERO {
                                    return ZERO;
                                }
                                let mut v = *c;
                                for j in 0..n {
                                    let ff = falling_factorial(alpha[j], gamma[j]);
                                    if ff == 0.0 {
                                        return ZERO;
                                    }
                                    v *= ff * ipow(z[j], alpha[j] - gamma[j] as i64);
                                }
                                v
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        TermSamples { values }
    }

    /// Max over `γ` and points of `|Σ_σ − Σ_τ|`, both sums sequential.
    fn discrepancy(&self, order: &[usize]) -> f64 {
        let mut worst: f64 = 0.0;
        for per_gamma in &self.values {
            let d = per_gamma
                .par_iter()
                .map(|terms| {
                    let a: Complex64 = terms.iter().fold(ZERO, |acc, t| acc + t);
                    let b: Complex64 = order.iter().fold(ZERO, |acc, &j| acc + terms[j]);
                    (a - b).norm()
                })
                .collect::<Vec<f64>>()
                .into_iter()
                .fold(0.0, f64::max);
            worst = worst.max(d);
        }
        worst
    }
}

/// Rearrangement check on the table terms.
///
/// `trials` random bijections τ of the box indices are drawn, each from its
/// own generator seeded with `seed + trial`. For each, the full τ-order sum
/// is compared with the σ-order sum on a sample grid, and every τ-prefix
/// that contains `σ(0..=N₀)` is certified to lie within `2 tail(N₀)` of the
/// full sum by exact term seminorms. The identity order is run separately as
/// a baseline and is not counted among the trials.
pub fn permuted_convergence_check(
    table: &CoefficientTable,
    region: &Polyannulus,
    k: u32,
    trials: usize,
    seed: u64,
    eps: f64,
    res: Resolution,
) -> Result<PermutationVerdict> {
    if !(eps > 0.0) {
        return Err(Error::config(format!("ε must be positive, got {eps}")));
    }
    let terms = term_seminorms(table, region, k)?;
    let total = terms.len();
    let n0 = net_threshold(&terms, eps);
    let tail_at_n0 = strict_suffix_sums(&terms)[n0];
    let coeffs: Vec<(MultiIndex, Complex64)> = box_points(table.box_n(), table.dim())
        .into_iter()
        .map(|a| effective_coeff(table, region, &a).map(|c| (a, c)))
        .collect::<Result<_>>()?;
    let samples = TermSamples::new(&coeffs, region, k, res);

    let identity: Vec<usize> = (0..total).collect();
    let identity_discrepancy = samples.discrepancy(&identity);

    let outcomes: Vec<TrialOutcome> = (0..trials)
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial as u64));
            let mut tau = identity.clone();
            tau.shuffle(&mut rng);
            let discrepancy = samples.discrepancy(&tau);

            let mut seen = HashSet::new();
            let mut covering_prefix = total;
            for (p, &j) in tau.iter().enumerate() {
                if j <= n0 {
                    seen.insert(j);
                    if seen.len() == n0 + 1 {
                        covering_prefix = p + 1;
                        break;
                    }
                }
            }
            // missing mass after a prefix of length p is the τ-suffix sum
            let mut missing = vec![0.0; total + 1];
            for p in (0..total).rev() {
                missing[p] = missing[p + 1] + terms[tau[p]];
            }
            let window = &missing[covering_prefix..];
            let violations = window.iter().filter(|&&m| !(m <= 2.0 * tail_at_n0)).count();
            TrialOutcome {
                trial,
                discrepancy,
                covering_prefix,
                max_missing: window.iter().copied().fold(0.0, f64::max),
                violations,
            }
        })
        .collect();

    Ok(PermutationVerdict {
        k,
        epsilon: eps,
        n0,
        tail_at_n0,
        identity_discrepancy,
        max_discrepancy: outcomes.iter().map(|t| t.discrepancy).fold(0.0, f64::max),
        violations: outcomes.iter().map(|t| t.violations).sum(),
        seed,
        trials: outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::coefficients_dft;
    use crate::testfns::{builtin, Expr};

    fn mi(v: &[i64]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    fn unit_disc() -> Polyannulus {
        Polyannulus::polydisc(&[1.0]).unwrap()
    }

    fn geometric_table(big_n: u64) -> (TestFunction, CoefficientTable) {
        let f = builtin("geometric").unwrap();
        let m = crate::coefficients::default_grid(big_n);
        let t = coefficients_dft(&f, &[1.0], m, big_n).unwrap();
        (f, t)
    }

    #[test]
    fn partial_sum_examples() {
        let f = TestFunction::new("z", Expr::monomial(&[1]), unit_disc()).unwrap();
        let t = coefficients_dft(&f, &[1.0], 8, 2).unwrap();
        let z = [Complex64::new(0.5, 0.0)];
        assert_eq!(partial_sum(&t, &FiniteIndexSet::empty(), &z).unwrap(), ZERO);
        let v = partial_sum(&t, &FiniteIndexSet::cube(2, 1), &z).unwrap();
        assert!((v - 0.5).norm() < 1e-15);
        let single = partial_sum(&t, &FiniteIndexSet::new([mi(&[1])]), &z).unwrap();
        assert!((single - t.get(&mi(&[1])).unwrap() * 0.5).norm() == 0.0);
        assert!(matches!(
            partial_sum(&t, &FiniteIndexSet::new([mi(&[3])]), &z),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn index_set_dedups_in_sigma_order() {
        let s = FiniteIndexSet::new([mi(&[1, 0]), mi(&[0, 0]), mi(&[1, 0]), mi(&[-1, -1])]);
        let v: Vec<_> = s.iter().cloned().collect();
        assert_eq!(v, vec![mi(&[0, 0]), mi(&[-1, -1]), mi(&[1, 0])]);
    }

    #[test]
    fn single_monomial_tail_vanishes() {
        let f = builtin("monomial_2").unwrap();
        let t = coefficients_dft(&f, &[1.0], 16, 4).unwrap();
        let p = tail_seminorm_sum(&t, &unit_disc(), 1, 0, Some(&f)).unwrap();
        let j = sigma_inverse(&mi(&[2]));
        assert!(p.tail(j) == 0.0, "{}", p.tail(j));
        assert!(p.tail(j - 1) > 0.0);
        assert_eq!(p.beyond_box.as_ref().unwrap().sum, 0.0);
        assert!(p.sandwich.passed());
        assert!(p.sandwich.non_strict > 0);
    }

    #[test]
    fn geometric_terms_and_tails() {
        let f = builtin("geometric").unwrap();
        let region = Polyannulus::polydisc(&[2.0]).unwrap();
        let t = coefficients_dft(&f, &[1.0], 128, 30).unwrap();
        let p = tail_seminorm_sum(&t, &region, 0, 0, Some(&f)).unwrap();
        for e in 0..20i64 {
            let j = sigma_inverse(&mi(&[e]));
            let want = (2.0f64 / 3.0).powi(e as i32) / 3.0;
            let allowance = t.tolerance(&mi(&[e])) * 2f64.powi(e as i32);
            assert!((p.entries[j].term - want).abs() <= allowance, "{e}");
            if e > 0 {
                assert_eq!(p.entries[sigma_inverse(&mi(&[-e]))].term, 0.0);
            }
        }
        assert!(p.tails_nonincreasing());
        let prefix = prefix_sums(&p.terms());
        assert!(prefix.windows(2).all(|w| w[0] <= w[1]));
        assert!(p.sandwich.passed());
    }

    #[test]
    fn geometric_net_threshold() {
        let (f, t) = geometric_table(40);
        let v = net_cauchy_check(&t, &unit_disc(), 0, 1e-6, 7, Some(&f)).unwrap();
        // tail after exponent s is 3^{-(s+1)}/2, first below 5e-7 at s = 12
        assert_eq!(v.n0, sigma_inverse(&mi(&[12])));
        assert_eq!(v.n0_shell, 12);
        assert!(v.passed());
    }

    #[test]
    fn monomial_net_threshold_is_its_index() {
        let f = builtin("bidisc_monomial").unwrap();
        let region = Polyannulus::polydisc(&[1.0, 1.0]).unwrap();
        let t = coefficients_dft(&f, &[0.5, 0.5], 16, 3).unwrap();
        let v = net_cauchy_check(&t, &region, 1, 1e-6, 1, Some(&f)).unwrap();
        assert_eq!(v.n0, sigma_inverse(&mi(&[1, 1])));
        assert!(v.passed());
    }

    #[test]
    fn too_small_box_is_reported() {
        let f = builtin("geometric").unwrap();
        let region = Polyannulus::polydisc(&[2.0]).unwrap();
        let t = coefficients_dft(&f, &[1.0], 32, 5).unwrap();
        assert!(matches!(
            net_cauchy_check(&t, &region, 0, 1e-6, 0, Some(&f)),
            Err(Error::BoxTooSmall { .. })
        ));
    }

    #[test]
    fn permutations_only_reassociate() {
        let (_, t) = geometric_table(20);
        let v = permuted_convergence_check(&t, &unit_disc(), 1, 5, 3, 1e-6, Resolution::new(8, 8)).unwrap();
        assert_eq!(v.identity_discrepancy, 0.0);
        assert!(v.max_discrepancy < 1e-10);
        assert_eq!(v.violations, 0);
        assert!(v.passed(1e-10));
    }

    #[test]
    fn polynomial_partial_sum_is_exact() {
        let f = builtin("laurent_polynomial_2d").unwrap();
        let t = coefficients_dft(&f, &[1.0, 1.0], 16, 3).unwrap();
        let errs = box_partial_sum_errors(&f, &t, 3, &f.validity, &[0, 1, 2], Resolution::new(8, 8)).unwrap();
        assert!(errs.iter().all(|&e| e < 1e-10), "{errs:?}");
    }

    #[test]
    fn geometric_error_within_tail() {
        let (f, t) = geometric_table(20);
        let res = Resolution::new(16, 16);
        let profile = tail_seminorm_sum(&t, &unit_disc(), 0, 0, Some(&f)).unwrap();
        let mut prev: Option<f64> = None;
        for big_n in 2..15u64 {
            let errs = box_partial_sum_errors(&f, &t, big_n, &unit_disc(), &[0, 1], res).unwrap();
            let bound = 3f64.powi(-(big_n as i32 + 1)) / 2.0;
            assert!(errs[0] <= bound * (1.0 + 1e-9) + 1e-15, "N={big_n}");
            assert!(errs[0] <= errs[1]);
            let last = box_size(big_n, 1) - 1;
            assert!(errs[0] <= profile.tail(last) + profile.beyond_box.as_ref().unwrap().sum + 1e-15);
            if let Some(p) = prev {
                let next_term = profile.entries[last].term + profile.entries[last - 1].term;
                assert!(errs[0] <= p + 2.0 * next_term + 1e-15);
            }
            prev = Some(errs[0]);
        }
    }

    #[test]
    fn disc_negative_noise_is_rejected_when_large() {
        // 1/(z - 0.1) has real negative-power coefficients; declaring the
        // region a disc contradicts the table
        let f = builtin("inverse_geometric").unwrap();
        let t = coefficients_dft(&f, &[1.0], 32, 4).unwrap();
        assert!(matches!(
            term_seminorms(&t, &unit_disc(), 0),
            Err(Error::DataInconsistency(_))
        ));
    }

    #[test]
    fn superset_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..200 {
            let s = random_superset(&mut rng, 5, 30);
            assert!(s.len() <= 10 && s.len() >= 6);
            assert!((0..=5).all(|j| s.contains(&j)));
            assert!(s.windows(2).all(|w| w[0] < w[1]));
        }
        assert_eq!(random_superset(&mut rng, 0, 9), vec![0]);
    }
}
