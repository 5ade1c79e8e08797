//! `C^k` seminorms `‖f‖_{k,P} = sup { |D^γ f| : [γ] ≤ k }` and box seminorms
//! `‖f‖'_{k,P} = sup { |D^γ f| : |γ|∞ ≤ k }` over a polyannulus.
//!
//! For general functions the sup is a sampled maximum over a closed product
//! grid, hence a lower bound of the true value. For a single monomial term
//! `c z^α` the box seminorm has a closed form, which is what the series and
//! bound certificates use.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{shadow, AxisRange, Polyannulus, SampleGrid};
use crate::multiindex::MultiIndex;
use crate::testfns::{falling_factorial, TestFunction};

/// Default number of moduli per axis.
pub const DEFAULT_RADIAL: usize = 32;
/// Default number of angles per axis.
pub const DEFAULT_ANGULAR: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeminormKind {
    Ck,
    Box,
}

impl SeminormKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SeminormKind::Ck => "ck",
            SeminormKind::Box => "box",
        }
    }

    fn admits(&self, gamma: &[u32], k: u32) -> bool {
        match self {
            SeminormKind::Ck => gamma.iter().sum::<u32>() <= k,
            SeminormKind::Box => gamma.iter().all(|&g| g <= k),
        }
    }
}

/// Sampling resolution of a grid: moduli and angles per axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub radial: usize,
    pub angular: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution {
            radial: DEFAULT_RADIAL,
            angular: DEFAULT_ANGULAR,
        }
    }
}

impl Resolution {
    pub fn new(radial: usize, angular: usize) -> Self {
        Resolution { radial, angular }
    }

    /// A grid that contains this one: `factor` times as many intervals in
    /// modulus and angle.
    pub fn refined(&self, factor: usize) -> Self {
        Resolution {
            radial: factor * (self.radial - 1) + 1,
            angular: factor * self.angular,
        }
    }
}

/// A sampled seminorm value and where it was attained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeminormReport {
    pub kind: SeminormKind,
    pub k: u32,
    pub region: Polyannulus,
    pub resolution: Resolution,
    pub value: f64,
    pub attained_gamma: Vec<u32>,
    pub attained_point: Vec<Complex64>,
}

impl SeminormReport {
    pub fn attained_shadow(&self) -> Vec<f64> {
        shadow(&self.attained_point)
    }
}

/// CSV rows: `kind, k, value, gamma, shadow`.
pub fn write_reports_csv<W: Write>(reports: &[SeminormReport], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["kind", "k", "value", "gamma", "shadow"])?;
    for r in reports {
        let gamma = r
            .attained_gamma
            .iter()
            .map(u32::to_string)
            .collect::<Vec<_>>()
            .join(" ");
        let sh = r
            .attained_shadow()
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(" ");
        wr.write_record([
            r.kind.as_str().to_string(),
            r.k.to_string(),
            r.value.to_string(),
            gamma,
            sh,
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// All `γ ∈ {0..=K}^n` in lexicographic order.
pub fn orders_up_to(max_entry: u32, n: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    loop {
        out.push(cur.clone());
        let mut p = n;
        loop {
            if p == 0 {
                return out;
            }
            p -= 1;
            if cur[p] < max_entry {
                cur[p] += 1;
                cur[p + 1..].iter_mut().for_each(|g| *g = 0);
                break;
            }
        }
    }
}

/// Per-`γ` sampled maxima of `|D^γ g|` on one grid.
///
/// Every seminorm computed from the same `DerivativeSamples` uses the same
/// sample set, so inequalities that follow from index-set inclusion hold
/// exactly between them.
#[derive(Clone, Debug)]
pub struct DerivativeSamples {
    region: Polyannulus,
    resolution: Resolution,
    grid: SampleGrid,
    /// `(γ, max |D^γ g|, flat index of the first maximiser)`
    maxima: Vec<(Vec<u32>, f64, usize)>,
}

impl DerivativeSamples {
    /// Samples `|value(γ, z)|` for every `γ` with `|γ|∞ ≤ max_entry`.
    pub fn from_fn<F>(region: &Polyannulus, max_entry: u32, res: Resolution, value: F) -> Self
    where
        F: Fn(&[u32], &[Complex64]) -> Complex64 + Sync,
    {
        let grid = region.sample_grid(res.radial, res.angular);
        DerivativeSamples::on_grid(region, res, grid, max_entry, value)
    }

    /// As [`DerivativeSamples::from_fn`] on a caller-supplied grid.
    pub fn on_grid<F>(region: &Polyannulus, res: Resolution, grid: SampleGrid, max_entry: u32, value: F) -> Self
    where
        F: Fn(&[u32], &[Complex64]) -> Complex64 + Sync,
    {
        let n = region.dim();
        let maxima = orders_up_to(max_entry, n)
            .into_iter()
            .map(|gamma| {
                let vals: Vec<f64> = (0..grid.len())
                    .into_par_iter()
                    .map_init(
                        || vec![Complex64::new(0.0, 0.0); n],
                        |buf, i| {
                            grid.point_into(i, buf);
                            value(&gamma, buf).norm()
                        },
                    )
                    .collect();
                let (arg, max) = argmax(&vals);
                (gamma, max, arg)
            })
            .collect();
        DerivativeSamples {
            region: region.clone(),
            resolution: res,
            grid,
            maxima,
        }
    }

    /// Samples derivatives of `f` on `region`, which must lie in the closure
    /// of the validity polyannulus.
    pub fn of_function(f: &TestFunction, region: &Polyannulus, max_entry: u32, res: Resolution) -> Result<Self> {
        check_resolution(res)?;
        f.check_region(region)?;
        Ok(DerivativeSamples::from_fn(region, max_entry, res, |g, z| {
            f.deriv_unchecked(g, z)
        }))
    }

    /// Builds samples from precomputed `|D^γ g|` values on `grid`.
    pub fn from_values(
        region: &Polyannulus,
        res: Resolution,
        grid: SampleGrid,
        values: Vec<(Vec<u32>, Vec<f64>)>,
    ) -> Self {
        let maxima = values
            .into_iter()
            .map(|(g, v)| {
                let (arg, max) = argmax(&v);
                (g, max, arg)
            })
            .collect();
        DerivativeSamples {
            region: region.clone(),
            resolution: res,
            grid,
            maxima,
        }
    }

    pub fn grid(&self) -> &SampleGrid {
        &self.grid
    }

    pub fn max_entry(&self) -> u32 {
        self.maxima
            .last()
            .map(|(g, _, _)| g.iter().copied().max().unwrap_or(0))
            .unwrap_or(0)
    }

    pub fn report(&self, kind: SeminormKind, k: u32) -> Result<SeminormReport> {
        if k > self.max_entry() {
            return Err(Error::config(format!(
                "samples hold derivatives up to order {} per axis, {} k={k} needs {k}",
                self.max_entry(),
                kind.as_str()
            )));
        }
        let mut best: Option<&(Vec<u32>, f64, usize)> = None;
        for entry in self.maxima.iter().filter(|(g, _, _)| kind.admits(g, k)) {
            if best.map_or(true, |b| entry.1 > b.1) {
                best = Some(entry);
            }
        }
        let (gamma, value, idx) = best.expect("γ = 0 is always admitted");
        Ok(SeminormReport {
            kind,
            k,
            region: self.region.clone(),
            resolution: self.resolution,
            value: *value,
            attained_gamma: gamma.clone(),
            attained_point: self.grid.point(*idx),
        })
    }
}

fn argmax(vals: &[f64]) -> (usize, f64) {
    let mut arg = 0;
    let mut max = f64::NEG_INFINITY;
    for (i, &v) in vals.iter().enumerate() {
        // NaN compares false and would hide a blow-up; surface it instead
        if v > max || v.is_nan() {
            arg = i;
            max = v;
            if v.is_nan() {
                break;
            }
        }
    }
    (arg, max)
}

fn check_resolution(res: Resolution) -> Result<()> {
    if res.radial < 2 || res.angular < 1 {
        return Err(Error::config(format!(
            "sampling needs radial >= 2 and angular >= 1, got {res:?}"
        )));
    }
    Ok(())
}

/// Sampled `‖f‖_{k,P}`.
pub fn ck_seminorm(f: &TestFunction, region: &Polyannulus, k: u32, res: Resolution) -> Result<SeminormReport> {
    DerivativeSamples::of_function(f, region, k, res)?.report(SeminormKind::Ck, k)
}

/// Sampled `‖f‖'_{k,P}`.
pub fn box_seminorm(f: &TestFunction, region: &Polyannulus, k: u32, res: Resolution) -> Result<SeminormReport> {
    DerivativeSamples::of_function(f, region, k, res)?.report(SeminormKind::Box, k)
}

/// Per-axis factor of the exact monomial box seminorm:
/// `max_{0 ≤ g ≤ k} |ff(a, g)| · B(a - g)` with `B(e) = R^e` for `e ≥ 0` and
/// `r^e` otherwise. Returns the value and the maximising `g`.
fn axis_factor(a: i64, axis: &AxisRange, k: u32) -> (f64, u32) {
    let mut best = (0.0, 0);
    for g in 0..=k {
        let ff = falling_factorial(a, g).abs();
        if ff == 0.0 {
            continue;
        }
        let e = a - g as i64;
        let b = if e >= 0 {
            axis.outer().powi(e as i32)
        } else {
            axis.inner().powi(e as i32)
        };
        let v = ff * b;
        if v > best.0 {
            best = (v, g);
        }
    }
    best
}

/// Exact `‖c e_α‖'_{k,P}` together with the maximising `γ`.
pub fn monomial_box_seminorm_with_gamma(
    c: Complex64,
    alpha: &MultiIndex,
    region: &Polyannulus,
    k: u32,
) -> Result<(f64, Vec<u32>)> {
    if alpha.dim() != region.dim() {
        return Err(Error::domain("monomial and region differ in dimension"));
    }
    let n = alpha.dim();
    if c == Complex64::new(0.0, 0.0) {
        return Ok((0.0, vec![0; n]));
    }
    for (j, (&a, axis)) in alpha.entries().iter().zip(&region.axes).enumerate() {
        if a < 0 && axis.is_disc() {
            return Err(Error::domain(format!(
                "z^{alpha} is unbounded on disc axis {j}; its seminorm is infinite"
            )));
        }
    }
    // all factors are nonnegative and independent per axis
    let mut value = c.norm();
    let mut gamma = Vec::with_capacity(n);
    for (&a, axis) in alpha.entries().iter().zip(&region.axes) {
        let (v, g) = axis_factor(a, axis, k);
        value *= v;
        gamma.push(g);
    }
    Ok((value, gamma))
}

/// Exact `‖c e_α‖'_{k,P} = |c| max_{|γ|∞≤k} ∏_j |ff(α_j,γ_j)| B_j(α_j-γ_j)`.
pub fn monomial_box_seminorm_exact(c: Complex64, alpha: &MultiIndex, region: &Polyannulus, k: u32) -> Result<f64> {
    monomial_box_seminorm_with_gamma(c, alpha, region, k).map(|(v, _)| v)
}

/// Outcome of comparing the two seminorm families on one sample set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma5Outcome {
    pub k: u32,
    pub n: usize,
    pub box_k: f64,
    pub ck_k: f64,
    pub ck_nk: f64,
    /// `‖f‖'_k ≤ ‖f‖_{nk}`
    pub lhs_ok: bool,
    /// `‖f‖_k ≤ ‖f‖'_k`
    pub rhs_ok: bool,
}

/// Checks `‖f‖'_k ≤ ‖f‖_{nk}` and `‖f‖_k ≤ ‖f‖'_k` on identical samples,
/// with zero tolerance.
pub fn lemma5_check(f: &TestFunction, region: &Polyannulus, k: u32, res: Resolution) -> Result<Lemma5Outcome> {
    let n = region.dim();
    let nk = n as u32 * k;
    let samples = DerivativeSamples::of_function(f, region, nk, res)?;
    lemma5_from_samples(&samples, n, k)
}

pub fn lemma5_from_samples(samples: &DerivativeSamples, n: usize, k: u32) -> Result<Lemma5Outcome> {
    let nk = n as u32 * k;
    let box_k = samples.report(SeminormKind::Box, k)?.value;
    let ck_k = samples.report(SeminormKind::Ck, k)?.value;
    let ck_nk = samples.report(SeminormKind::Ck, nk)?.value;
    Ok(Lemma5Outcome {
        k,
        n,
        box_k,
        ck_k,
        ck_nk,
        lhs_ok: box_k <= ck_nk,
        rhs_ok: ck_k <= box_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testfns::{builtin, Expr};

    fn mi(v: &[i64]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    fn unit_disc() -> Polyannulus {
        Polyannulus::polydisc(&[1.0]).unwrap()
    }

    #[test]
    fn ck_examples() {
        let res = Resolution::default();
        let one = builtin("one").unwrap();
        assert_eq!(ck_seminorm(&one, &unit_disc(), 5, res).unwrap().value, 1.0);
        let z = TestFunction::new("z", Expr::monomial(&[1]), unit_disc()).unwrap();
        assert_eq!(ck_seminorm(&z, &unit_disc(), 1, res).unwrap().value, 1.0);
        let z2 = builtin("monomial_2").unwrap();
        let r = ck_seminorm(&z2, &unit_disc(), 2, res).unwrap();
        assert_eq!(r.value, 2.0);
    }

    #[test]
    fn box_examples() {
        let res = Resolution::default();
        let f = builtin("bidisc_monomial").unwrap();
        let bidisc = Polyannulus::polydisc(&[1.0, 1.0]).unwrap();
        let r = box_seminorm(&f, &bidisc, 1, res).unwrap();
        // unit-circle grid points carry one rounding each
        assert!((r.value - 1.0).abs() < 4.0 * f64::EPSILON);
        for name in ["geometric", "lacunary", "monomial_5"] {
            let g = builtin(name).unwrap();
            for k in 0..4 {
                let s = DerivativeSamples::of_function(&g, &unit_disc(), k, res).unwrap();
                assert_eq!(
                    s.report(SeminormKind::Box, k).unwrap().value,
                    s.report(SeminormKind::Ck, k).unwrap().value
                );
            }
        }
        let s = DerivativeSamples::of_function(&f, &bidisc, 0, res).unwrap();
        assert_eq!(
            s.report(SeminormKind::Box, 0).unwrap().value,
            s.report(SeminormKind::Ck, 0).unwrap().value
        );
    }

    #[test]
    fn monomial_exact_examples() {
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(monomial_box_seminorm_exact(one, &mi(&[2]), &unit_disc(), 1).unwrap(), 2.0);
        let ann = Polyannulus::annulus_product(&[0.5], &[2.0]).unwrap();
        assert_eq!(monomial_box_seminorm_exact(one, &mi(&[-1]), &ann, 0).unwrap(), 2.0);
        assert_eq!(
            monomial_box_seminorm_exact(Complex64::new(0.0, 0.0), &mi(&[-3]), &unit_disc(), 2).unwrap(),
            0.0
        );
        assert!(matches!(
            monomial_box_seminorm_exact(one, &mi(&[-1]), &unit_disc(), 0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn exact_dominates_sampled_and_gap_closes() {
        let ann = Polyannulus::annulus_product(&[0.5], &[1.5]).unwrap();
        for (alpha, region) in [(vec![3i64], unit_disc()), (vec![-2], ann.clone()), (vec![4], ann)] {
            let f = TestFunction::new("m", Expr::Monomial { exponent: mi(&alpha) }, region.clone()).unwrap();
            for k in 0..3 {
                let exact =
                    monomial_box_seminorm_exact(Complex64::new(1.0, 0.0), &mi(&alpha), &region, k).unwrap();
                for radial in [4, 9, 64] {
                    let s = box_seminorm(&f, &region, k, Resolution::new(radial, 16)).unwrap();
                    assert!(s.value <= exact * (1.0 + 1e-15));
                    if radial == 64 {
                        assert!((exact - s.value) / exact < 1e-3);
                    }
                }
            }
        }
    }

    #[test]
    fn refinement_never_decreases() {
        let f = builtin("separable_product").unwrap();
        let mut res = Resolution::new(5, 4);
        let mut last = 0.0;
        for _ in 0..3 {
            let v = box_seminorm(&f, &f.validity, 2, res).unwrap().value;
            assert!(v >= last);
            last = v;
            res = res.refined(2);
        }
    }

    #[test]
    fn lemma5_on_builtins() {
        for f in crate::testfns::builtin_suite() {
            for k in 0..3 {
                let out = lemma5_check(&f, &f.validity, k, Resolution::new(8, 8)).unwrap();
                assert!(out.lhs_ok && out.rhs_ok, "{}: {out:?}", f.name);
                if f.dim() == 1 {
                    assert_eq!(out.box_k, out.ck_k);
                    assert_eq!(out.box_k, out.ck_nk);
                }
            }
        }
    }

    #[test]
    fn zero_function_has_zero_seminorms() {
        let zero = TestFunction::new(
            "zero",
            Expr::Scale {
                factor: Complex64::new(0.0, 0.0),
                expr: Box::new(Expr::monomial(&[1, 1])),
            },
            Polyannulus::polydisc(&[1.0, 1.0]).unwrap(),
        )
        .unwrap();
        let out = lemma5_check(&zero, &zero.validity, 1, Resolution::new(4, 4)).unwrap();
        assert!(out.lhs_ok && out.rhs_ok);
        assert_eq!((out.box_k, out.ck_k, out.ck_nk), (0.0, 0.0, 0.0));
    }

    #[test]
    fn report_csv_columns() {
        let f = builtin("monomial_2").unwrap();
        let r = box_seminorm(&f, &unit_disc(), 1, Resolution::new(3, 4)).unwrap();
        let mut buf = Vec::new();
        write_reports_csv(&[r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "kind,k,value,gamma,shadow");
        assert_eq!(text.lines().nth(1).unwrap(), "box,1,2,1,1");
    }
}
