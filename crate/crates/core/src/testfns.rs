//! Holomorphic test functions with exact evaluation, exact partial
//! derivatives `D^γ` and closed-form Laurent coefficients.
//!
//! A [`TestFunction`] is an expression tree ([`Expr`]) together with the
//! polyannulus on whose closure it is smooth. No numerical differentiation
//! happens here: every node knows its derivatives in closed form.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{AxisRange, Polyannulus};
use crate::multiindex::MultiIndex;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tail threshold for truncating the lacunary series and its derivatives.
pub const LACUNARY_TAIL: f64 = 1e-14;

/// Falling factorial `a (a-1) ⋯ (a-g+1)`; `1` for `g = 0`.
pub fn falling_factorial(a: i64, g: u32) -> f64 {
    (0..g as i64).map(|i| (a - i) as f64).product()
}

fn factorial(g: u32) -> f64 {
    (1..=g).map(f64::from).product()
}

fn rising(m: u32, s: u32) -> f64 {
    (0..s).map(|i| f64::from(m + i)).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    falling_factorial(n as i64, k) / factorial(k)
}

/// `z^e` for an integer exponent.
pub fn ipow(z: Complex64, e: i64) -> Complex64 {
    if e == 0 {
        ONE
    } else {
        z.powi(e as i32)
    }
}

/// Number of retained lacunary terms minus one for derivative order `g`:
/// the smallest `K` with `Σ_{k>K} 2^{-k²} (2^k)^{g+1} < LACUNARY_TAIL`.
pub fn lacunary_truncation(g: u32) -> u32 {
    let log_term = |k: u32| -> f64 { -((k * k) as f64) + (k as f64) * (g as f64 + 1.0) };
    let mut k = 0u32;
    loop {
        // past k >= g/2 consecutive terms at least halve, so the tail after
        // K is at most twice its first term
        let decreasing = 2 * k + 3 >= g + 2;
        if decreasing && 2.0 * (log_term(k + 1)).exp2() < LACUNARY_TAIL {
            return k;
        }
        k += 1;
    }
}

/// Expression tree of a test function on `C^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expr {
    /// Laurent monomial `z^α`.
    Monomial { exponent: MultiIndex },
    /// `1 / (pole - z_axis)`, `|pole|` beyond the outer radius.
    Geometric { axis: usize, pole: Complex64 },
    /// `1 / (z_axis - center)`, `|center|` inside the inner radius.
    InverseGeometric { axis: usize, center: Complex64 },
    /// `1 / (c - z_i z_j)` with `|c| > R_i R_j`.
    Rational2 { axes: [usize; 2], c: Complex64 },
    /// `Σ_k 2^{-k²} z_axis^{2^k}` on a disc of radius ≤ 1.
    Lacunary { axis: usize },
    Sum { terms: Vec<Expr> },
    Product { factors: Vec<Expr> },
    Scale { factor: Complex64, expr: Box<Expr> },
}

impl Expr {
    pub fn monomial(exponent: &[i64]) -> Expr {
        Expr::Monomial {
            exponent: MultiIndex::new(exponent.to_vec()),
        }
    }

    /// Axes the expression actually depends on.
    pub fn support(&self, n: usize) -> Vec<bool> {
        let mut s = vec![false; n];
        self.mark_support(&mut s);
        s
    }

    fn mark_support(&self, s: &mut [bool]) {
        match self {
            Expr::Monomial { exponent } => {
                for (j, &a) in exponent.entries().iter().enumerate() {
                    s[j] |= a != 0;
                }
            }
            Expr::Geometric { axis, .. }
            | Expr::InverseGeometric { axis, .. }
            | Expr::Lacunary { axis } => s[*axis] = true,
            Expr::Rational2 { axes, .. } => {
                s[axes[0]] = true;
                s[axes[1]] = true;
            }
            Expr::Sum { terms } => terms.iter().for_each(|t| t.mark_support(s)),
            Expr::Product { factors } => factors.iter().for_each(|t| t.mark_support(s)),
            Expr::Scale { expr, .. } => expr.mark_support(s),
        }
    }

    fn validate(&self, p: &Polyannulus) -> Result<()> {
        let n = p.dim();
        let axis_ok = |axis: usize| -> Result<&AxisRange> {
            p.axes
                .get(axis)
                .ok_or_else(|| Error::config(format!("axis {axis} out of range for n={n}")))
        };
        match self {
            Expr::Monomial { exponent } => {
                if exponent.dim() != n {
                    return Err(Error::config(format!(
                        "monomial exponent {exponent} has wrong dimension for n={n}"
                    )));
                }
                for (j, &a) in exponent.entries().iter().enumerate() {
                    if a < 0 && p.axes[j].is_disc() {
                        return Err(Error::domain(format!(
                            "monomial {exponent} has a negative power on disc axis {j}"
                        )));
                    }
                }
            }
            Expr::Geometric { axis, pole } => {
                let a = axis_ok(*axis)?;
                if pole.norm() <= a.outer() {
                    return Err(Error::domain(format!(
                        "pole {pole} of 1/(a-z) is not beyond R={}",
                        a.outer()
                    )));
                }
            }
            Expr::InverseGeometric { axis, center } => {
                let a = axis_ok(*axis)?;
                if a.is_disc() || center.norm() >= a.inner() {
                    return Err(Error::domain(format!(
                        "pole {center} of 1/(z-b) must lie inside the inner radius of an annular axis"
                    )));
                }
            }
            Expr::Rational2 { axes, c } => {
                let (a, b) = (axis_ok(axes[0])?, axis_ok(axes[1])?);
                if axes[0] == axes[1] {
                    return Err(Error::config("rational2 needs two distinct axes"));
                }
                if c.norm() <= a.outer() * b.outer() {
                    return Err(Error::domain(format!(
                        "|c| = {} must exceed R_i R_j = {}",
                        c.norm(),
                        a.outer() * b.outer()
                    )));
                }
            }
            Expr::Lacunary { axis } => {
                let a = axis_ok(*axis)?;
                if !a.is_disc() || a.outer() > 1.0 {
                    return Err(Error::domain("lacunary series needs a disc axis with R <= 1"));
                }
            }
            Expr::Sum { terms } => {
                if terms.is_empty() {
                    return Err(Error::config("empty sum"));
                }
                terms.iter().try_for_each(|t| t.validate(p))?;
            }
            Expr::Scale { expr, .. } => expr.validate(p)?,
            Expr::Product { factors } => {
                if factors.is_empty() {
                    return Err(Error::config("empty product"));
                }
                factors.iter().try_for_each(|t| t.validate(p))?;
                let mut used = vec![false; n];
                for f in factors.iter().filter(|f| !matches!(f, Expr::Monomial { .. })) {
                    let s = f.support(n);
                    if s.iter().zip(&used).any(|(a, b)| *a && *b) {
                        return Err(Error::config(
                            "product factors other than monomials must depend on disjoint axes",
                        ));
                    }
                    for (u, v) in used.iter_mut().zip(s) {
                        *u |= v;
                    }
                }
            }
        }
        Ok(())
    }

    /// `D^γ` at `z`, no domain check.
    pub fn deriv(&self, gamma: &[u32], z: &[Complex64]) -> Complex64 {
        match self {
            Expr::Monomial { exponent } => {
                let mut acc = ONE;
                for ((&a, &g), &zj) in exponent.entries().iter().zip(gamma).zip(z) {
                    let ff = falling_factorial(a, g);
                    if ff == 0.0 {
                        return ZERO;
                    }
                    acc *= ff * ipow(zj, a - g as i64);
                }
                acc
            }
            Expr::Geometric { axis, pole } => {
                if off_axis(gamma, &[*axis]) {
                    return ZERO;
                }
                let g = gamma[*axis];
                factorial(g) * ipow(pole - z[*axis], -(g as i64) - 1)
            }
            Expr::InverseGeometric { axis, center } => {
                if off_axis(gamma, &[*axis]) {
                    return ZERO;
                }
                let g = gamma[*axis];
                let sign = if g % 2 == 0 { 1.0 } else { -1.0 };
                sign * factorial(g) * ipow(z[*axis] - center, -(g as i64) - 1)
            }
            Expr::Rational2 { axes, c } => {
                let [i, j] = *axes;
                if off_axis(gamma, &[i, j]) {
                    return ZERO;
                }
                let (p, q) = (gamma[i], gamma[j]);
                let (zi, zj) = (z[i], z[j]);
                let w = c - zi * zj;
                // D_i^p f = p! z_j^p w^{-(p+1)}, then Leibniz in z_j with
                // ∂_j^s w^{-m} = m(m+1)⋯(m+s-1) z_i^s w^{-m-s}.
                let mut acc = ZERO;
                for t in 0..=p.min(q) {
                    let s = q - t;
                    let coef = binomial(q, t) * falling_factorial(p as i64, t) * rising(p + 1, s);
                    acc += coef
                        * ipow(zj, (p - t) as i64)
                        * ipow(zi, s as i64)
                        * ipow(w, -((p + 1 + s) as i64));
                }
                factorial(p) * acc
            }
            Expr::Lacunary { axis } => {
                if off_axis(gamma, &[*axis]) {
                    return ZERO;
                }
                let g = gamma[*axis];
                let zj = z[*axis];
                let mut acc = ZERO;
                for k in 0..=lacunary_truncation(g) {
                    let e = 1i64 << k;
                    if e < g as i64 {
                        continue;
                    }
                    let c = (-((k * k) as f64)).exp2();
                    acc += c * falling_factorial(e, g) * ipow(zj, e - g as i64);
                }
                acc
            }
            Expr::Sum { terms } => terms.iter().map(|t| t.deriv(gamma, z)).sum(),
            Expr::Scale { factor, expr } => factor * expr.deriv(gamma, z),
            Expr::Product { factors } => product_deriv(factors, gamma, z),
        }
    }

    /// Laurent coefficient of `z^α` on the validity polyannulus.
    pub fn oracle_coeff(&self, alpha: &MultiIndex) -> Complex64 {
        let n = alpha.dim();
        match self {
            Expr::Monomial { exponent } => {
                if exponent == alpha {
                    ONE
                } else {
                    ZERO
                }
            }
            Expr::Geometric { axis, pole } => {
                if !only_on(alpha, &[*axis]) || alpha[*axis] < 0 {
                    return ZERO;
                }
                ipow(*pole, -(alpha[*axis] + 1))
            }
            Expr::InverseGeometric { axis, center } => {
                if !only_on(alpha, &[*axis]) || alpha[*axis] >= 0 {
                    return ZERO;
                }
                ipow(*center, -alpha[*axis] - 1)
            }
            Expr::Rational2 { axes, c } => {
                let [i, j] = *axes;
                if !only_on(alpha, &[i, j]) || alpha[i] != alpha[j] || alpha[i] < 0 {
                    return ZERO;
                }
                ipow(*c, -(alpha[i] + 1))
            }
            Expr::Lacunary { axis } => {
                if !only_on(alpha, &[*axis]) {
                    return ZERO;
                }
                let a = alpha[*axis];
                if a > 0 && (a & (a - 1)) == 0 {
                    let k = a.trailing_zeros() as f64;
                    Complex64::new((-(k * k)).exp2(), 0.0)
                } else {
                    ZERO
                }
            }
            Expr::Sum { terms } => terms.iter().map(|t| t.oracle_coeff(alpha)).sum(),
            Expr::Scale { factor, expr } => factor * expr.oracle_coeff(alpha),
            Expr::Product { factors } => {
                // monomial factors shift the exponent; the remaining factors
                // live on disjoint axes, so their coefficients multiply
                let mut shifted = alpha.clone();
                let mut rest = Vec::new();
                for f in factors {
                    match f {
                        Expr::Monomial { exponent } => shifted = &shifted - exponent,
                        other => rest.push(other),
                    }
                }
                if rest.is_empty() {
                    return if shifted.entries().iter().all(|&a| a == 0) {
                        ONE
                    } else {
                        ZERO
                    };
                }
                let mut covered = vec![false; n];
                let mut acc = ONE;
                for f in rest {
                    let s = f.support(n);
                    let masked = MultiIndex::new(
                        shifted
                            .entries()
                            .iter()
                            .zip(&s)
                            .map(|(&a, &on)| if on { a } else { 0 })
                            .collect(),
                    );
                    acc *= f.oracle_coeff(&masked);
                    for (c, v) in covered.iter_mut().zip(s) {
                        *c |= v;
                    }
                }
                let outside = shifted
                    .entries()
                    .iter()
                    .zip(&covered)
                    .any(|(&a, &on)| !on && a != 0);
                if outside {
                    ZERO
                } else {
                    acc
                }
            }
        }
    }
}

fn off_axis(gamma: &[u32], axes: &[usize]) -> bool {
    gamma
        .iter()
        .enumerate()
        .any(|(j, &g)| g > 0 && !axes.contains(&j))
}

fn only_on(alpha: &MultiIndex, axes: &[usize]) -> bool {
    alpha
        .entries()
        .iter()
        .enumerate()
        .all(|(j, &a)| a == 0 || axes.contains(&j))
}

fn product_deriv(factors: &[Expr], gamma: &[u32], z: &[Complex64]) -> Complex64 {
    match factors {
        [] => ONE,
        [only] => only.deriv(gamma, z),
        [first, rest @ ..] => {
            // multivariate Leibniz rule over δ ≤ γ
            let n = gamma.len();
            let mut delta = vec![0u32; n];
            let mut rem = vec![0u32; n];
            let mut acc = ZERO;
            loop {
                let mut coef = 1.0;
                for j in 0..n {
                    coef *= binomial(gamma[j], delta[j]);
                    rem[j] = gamma[j] - delta[j];
                }
                let a = first.deriv(&delta, z);
                if a != ZERO {
                    acc += coef * a * product_deriv(rest, &rem, z);
                }
                let mut p = n;
                loop {
                    if p == 0 {
                        return acc;
                    }
                    p -= 1;
                    if delta[p] < gamma[p] {
                        delta[p] += 1;
                        delta[p + 1..].iter_mut().for_each(|d| *d = 0);
                        break;
                    }
                }
            }
        }
    }
}

/// A holomorphic function with oracle derivatives and coefficients, smooth
/// on the closure of its validity polyannulus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub name: String,
    pub expr: Expr,
    pub validity: Polyannulus,
}

impl TestFunction {
    pub fn new(name: impl Into<String>, expr: Expr, validity: Polyannulus) -> Result<Self> {
        expr.validate(&validity)?;
        Ok(TestFunction {
            name: name.into(),
            expr,
            validity,
        })
    }

    pub fn dim(&self) -> usize {
        self.validity.dim()
    }

    fn check(&self, z: &[Complex64]) -> Result<()> {
        if z.len() != self.dim() {
            return Err(Error::domain(format!(
                "point has dimension {}, function {} expects {}",
                z.len(),
                self.name,
                self.dim()
            )));
        }
        if !self.validity.closure_contains(z) {
            return Err(Error::domain(format!(
                "point {z:?} is outside the closed validity region of {}",
                self.name
            )));
        }
        Ok(())
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        self.check(z)?;
        Ok(self.expr.deriv(&vec![0; self.dim()], z))
    }

    pub fn deriv(&self, gamma: &[u32], z: &[Complex64]) -> Result<Complex64> {
        if gamma.len() != self.dim() {
            return Err(Error::config("derivative order has wrong dimension"));
        }
        self.check(z)?;
        Ok(self.expr.deriv(gamma, z))
    }

    /// `D^γ f(z)` for callers that have already checked the region.
    pub fn deriv_unchecked(&self, gamma: &[u32], z: &[Complex64]) -> Complex64 {
        self.expr.deriv(gamma, z)
    }

    pub fn oracle_coeff(&self, alpha: &MultiIndex) -> Complex64 {
        self.expr.oracle_coeff(alpha)
    }

    /// Errors unless `region` lies in the closure of the validity polyannulus.
    pub fn check_region(&self, region: &Polyannulus) -> Result<()> {
        if region.is_within_closure(&self.validity) {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "region {region:?} is not inside the validity region of {}",
                self.name
            )))
        }
    }
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: &[&str] = &[
    "one",
    "monomial_2",
    "monomial_5",
    "monomial_neg1",
    "geometric",
    "inverse_geometric",
    "geometric_sum",
    "lacunary",
    "bidisc_monomial",
    "mixed_monomial",
    "rational_2d",
    "separable_product",
    "shifted_product",
    "laurent_polynomial_2d",
];

/// Built-in test functions, keyed by name.
pub fn builtin(name: &str) -> Result<TestFunction> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let disc = |r: f64| Polyannulus::polydisc(&[r]);
    let ann = |r: f64, big_r: f64| Polyannulus::annulus_product(&[r], &[big_r]);
    let geometric = |axis| Expr::Geometric {
        axis,
        pole: c(3.0, 0.0),
    };
    let inverse = |axis| Expr::InverseGeometric {
        axis,
        center: c(0.1, 0.0),
    };
    let f = match name {
        "one" => TestFunction::new(name, Expr::monomial(&[0]), disc(1.0)?)?,
        "monomial_2" => TestFunction::new(name, Expr::monomial(&[2]), disc(1.0)?)?,
        "monomial_5" => TestFunction::new(name, Expr::monomial(&[5]), disc(1.0)?)?,
        "monomial_neg1" => TestFunction::new(name, Expr::monomial(&[-1]), ann(0.5, 2.0)?)?,
        "geometric" => TestFunction::new(name, geometric(0), disc(2.0)?)?,
        "inverse_geometric" => TestFunction::new(name, inverse(0), ann(0.5, 2.0)?)?,
        "geometric_sum" => TestFunction::new(
            name,
            Expr::Sum {
                terms: vec![geometric(0), inverse(0)],
            },
            ann(0.5, 2.0)?,
        )?,
        "lacunary" => TestFunction::new(name, Expr::Lacunary { axis: 0 }, disc(1.0)?)?,
        "bidisc_monomial" => TestFunction::new(
            name,
            Expr::monomial(&[1, 1]),
            Polyannulus::polydisc(&[1.0, 1.0])?,
        )?,
        "mixed_monomial" => TestFunction::new(
            name,
            Expr::monomial(&[2, -1]),
            Polyannulus::new(vec![AxisRange::disc(2.0)?, AxisRange::annular(0.5, 2.0)?])?,
        )?,
        "rational_2d" => TestFunction::new(
            name,
            Expr::Rational2 {
                axes: [0, 1],
                c: c(4.0, 0.0),
            },
            Polyannulus::polydisc(&[1.0, 1.0])?,
        )?,
        "separable_product" => TestFunction::new(
            name,
            Expr::Product {
                factors: vec![geometric(0), inverse(1)],
            },
            Polyannulus::new(vec![AxisRange::disc(2.0)?, AxisRange::annular(0.5, 2.0)?])?,
        )?,
        "shifted_product" => TestFunction::new(
            name,
            Expr::Product {
                factors: vec![
                    Expr::monomial(&[1, -1]),
                    Expr::Rational2 {
                        axes: [0, 1],
                        c: c(4.0, 0.0),
                    },
                ],
            },
            Polyannulus::new(vec![AxisRange::disc(1.0)?, AxisRange::annular(0.5, 1.0)?])?,
        )?,
        "laurent_polynomial_2d" => TestFunction::new(
            name,
            Expr::Sum {
                terms: vec![
                    Expr::Scale {
                        factor: c(2.0, 0.0),
                        expr: Box::new(Expr::monomial(&[1, 0])),
                    },
                    Expr::Scale {
                        factor: c(0.0, 0.5),
                        expr: Box::new(Expr::monomial(&[-1, 2])),
                    },
                    Expr::Scale {
                        factor: c(-1.0, 0.25),
                        expr: Box::new(Expr::monomial(&[0, -2])),
                    },
                ],
            },
            Polyannulus::annulus_product(&[0.5, 0.5], &[1.5, 1.5])?,
        )?,
        other => {
            return Err(Error::config(format!(
                "unknown built-in function {other:?}; known: {}",
                BUILTIN_NAMES.join(", ")
            )))
        }
    };
    Ok(f)
}

/// Every built-in function.
pub fn builtin_suite() -> Vec<TestFunction> {
    BUILTIN_NAMES
        .iter()
        .map(|n| builtin(n).expect("built-ins are valid"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn eval_examples() {
        let f = TestFunction::new(
            "e",
            Expr::monomial(&[2, -1]),
            Polyannulus::new(vec![
                AxisRange::disc(2.0).unwrap(),
                AxisRange::annular(1.0, 2.0).unwrap(),
            ])
            .unwrap(),
        )
        .unwrap();
        assert!(close(f.eval(&[c(2.0), c(2.0)]).unwrap(), c(2.0), 1e-15));
        let g = builtin("geometric").unwrap();
        assert!(close(g.eval(&[c(0.0)]).unwrap(), c(1.0 / 3.0), 1e-16));
        let l = builtin("lacunary").unwrap();
        assert_eq!(l.eval(&[c(0.0)]).unwrap(), c(0.0));
    }

    #[test]
    fn eval_outside_validity_is_a_domain_error() {
        let g = builtin("geometric").unwrap();
        assert!(matches!(g.eval(&[c(2.5)]), Err(Error::Domain(_))));
        let h = builtin("inverse_geometric").unwrap();
        assert!(matches!(h.eval(&[c(0.2)]), Err(Error::Domain(_))));
    }

    #[test]
    fn deriv_examples() {
        let cube = TestFunction::new("e3", Expr::monomial(&[3]), Polyannulus::polydisc(&[3.0]).unwrap())
            .unwrap();
        assert!(close(cube.deriv(&[1], &[c(2.0)]).unwrap(), c(12.0), 1e-13));
        let g = builtin("geometric").unwrap();
        assert!(close(g.deriv(&[2], &[c(0.0)]).unwrap(), c(2.0 / 27.0), 1e-16));
        let inv = TestFunction::new(
            "e-1",
            Expr::monomial(&[-1]),
            Polyannulus::annulus_product(&[1.0], &[3.0]).unwrap(),
        )
        .unwrap();
        assert!(close(inv.deriv(&[1], &[c(2.0)]).unwrap(), c(-0.25), 1e-16));
    }

    #[test]
    fn oracle_coeff_examples() {
        let g = builtin("geometric").unwrap();
        for k in -5..20i64 {
            let expected = if k >= 0 { 3f64.powi(-(k as i32 + 1)) } else { 0.0 };
            assert!(close(g.oracle_coeff(&MultiIndex::new(vec![k])), c(expected), 1e-18));
        }
        let h = builtin("inverse_geometric").unwrap();
        for k in 0..10i64 {
            let got = h.oracle_coeff(&MultiIndex::new(vec![-k - 1]));
            assert!(close(got, c(0.1f64.powi(k as i32)), 1e-18));
            assert_eq!(h.oracle_coeff(&MultiIndex::new(vec![k])), c(0.0));
        }
        let m = builtin("bidisc_monomial").unwrap();
        assert_eq!(m.oracle_coeff(&MultiIndex::new(vec![1, 1])), c(1.0));
        assert_eq!(m.oracle_coeff(&MultiIndex::new(vec![1, 0])), c(0.0));
    }

    #[test]
    fn disc_axes_have_no_negative_coefficients() {
        for f in builtin_suite() {
            let n = f.dim();
            for alpha in crate::multiindex::box_points(4, n) {
                let neg_on_disc = alpha
                    .entries()
                    .iter()
                    .zip(&f.validity.axes)
                    .any(|(&a, ax)| a < 0 && ax.is_disc());
                if neg_on_disc {
                    assert_eq!(f.oracle_coeff(&alpha), c(0.0), "{} {alpha}", f.name);
                }
            }
        }
    }

    #[test]
    fn monomial_annihilation() {
        let f = builtin("mixed_monomial").unwrap();
        let z = [c(0.7), Complex64::new(0.3, 0.9)];
        assert_eq!(f.deriv(&[3, 0], &z).unwrap(), c(0.0));
        assert_eq!(f.deriv(&[3, 2], &z).unwrap(), c(0.0));
        assert_ne!(f.deriv(&[2, 2], &z).unwrap(), c(0.0));
    }

    #[test]
    fn invalid_functions_rejected() {
        let d = Polyannulus::polydisc(&[1.0]).unwrap();
        assert!(TestFunction::new("x", Expr::monomial(&[-1]), d.clone()).is_err());
        assert!(TestFunction::new(
            "x",
            Expr::Geometric {
                axis: 0,
                pole: c(0.5)
            },
            d.clone()
        )
        .is_err());
        assert!(TestFunction::new(
            "x",
            Expr::InverseGeometric {
                axis: 0,
                center: c(0.0)
            },
            d.clone()
        )
        .is_err());
        let bi = Polyannulus::polydisc(&[1.0, 1.0]).unwrap();
        let overlapping = Expr::Product {
            factors: vec![
                Expr::Geometric {
                    axis: 0,
                    pole: c(3.0),
                },
                Expr::Rational2 {
                    axes: [0, 1],
                    c: c(4.0),
                },
            ],
        };
        assert!(TestFunction::new("x", overlapping, bi).is_err());
        assert!(builtin("nope").is_err());
    }

    #[test]
    fn lacunary_truncation_meets_tail_bound() {
        for g in 0..12u32 {
            let k_max = lacunary_truncation(g);
            let tail: f64 = (k_max + 1..k_max + 40)
                .map(|k| (-((k * k) as f64) + k as f64 * (g as f64 + 1.0)).exp2())
                .sum();
            assert!(tail < LACUNARY_TAIL, "g={g} K={k_max} tail={tail:e}");
        }
    }

    /// Central finite differences of the next-lower derivative, one axis at
    /// a time, as an independent check of the closed forms.
    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for f in builtin_suite() {
            let n = f.dim();
            let scale = f.validity.outer_radii().into_iter().fold(0.0, f64::max);
            let h = 1e-5 * scale;
            for _ in 0..100 {
                let z = f.validity.random_interior_point(&mut rng, 0.05);
                let axis = rng.gen_range(0..n);
                let mut gamma: Vec<u32> = (0..n).map(|_| rng.gen_range(0..3)).collect();
                let lower = gamma.clone();
                gamma[axis] += 1;
                let mut zp = z.clone();
                let mut zm = z.clone();
                zp[axis] += h;
                zm[axis] -= h;
                let fd = (f.deriv_unchecked(&lower, &zp) - f.deriv_unchecked(&lower, &zm)) / (2.0 * h);
                let exact = f.deriv_unchecked(&gamma, &z);
                let err = (fd - exact).norm();
                let scale = exact.norm().max(f.deriv_unchecked(&lower, &z).norm() / scale).max(1e-3);
                assert!(
                    err / scale < 1e-6,
                    "{}: gamma={gamma:?} at {z:?}: fd={fd} exact={exact}",
                    f.name
                );
            }
        }
    }

    #[test]
    fn coefficients_resum_to_function() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for f in builtin_suite() {
            let n = f.dim();
            let big_n = if n == 1 { 80 } else { 40 };
            let pts = crate::multiindex::box_points(big_n, n);
            for _ in 0..5 {
                // interior tori, away from the edges
                let z = f.validity.random_interior_point(&mut rng, 0.15);
                let sum: Complex64 = pts
                    .iter()
                    .map(|a| {
                        let c = f.oracle_coeff(a);
                        if c == Complex64::new(0.0, 0.0) {
                            c
                        } else {
                            c * a
                                .entries()
                                .iter()
                                .zip(&z)
                                .map(|(&e, &zj)| ipow(zj, e))
                                .product::<Complex64>()
                        }
                    })
                    .sum();
                let value = f.eval(&z).unwrap();
                assert!((sum - value).norm() < 1e-10, "{}: {sum} vs {value}", f.name);
            }
        }
    }
}
