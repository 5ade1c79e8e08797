//! Laurent coefficients on tori by the discrete Cauchy formula.
//!
//! On the torus `|ζ_j| = ρ_j` sampled at `m` equispaced angles per axis,
//!
//! ```text
//! c_α ≈ (1/m^n) Σ_s f(ρ·e^{2πis/m}) e^{-2πi⟨α,s⟩/m} / ρ^α
//! ```
//!
//! which equals `c_α + Σ_{t≠0} c_{α+tm} ρ^{tm}` exactly. The trapezoid rule
//! on an analytic periodic integrand converges geometrically in `m`; the
//! aliasing left over is estimated empirically by comparing grids `m` and
//! `2m`.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiindex::{box_points, MultiIndex};
use crate::testfns::{falling_factorial, ipow, TestFunction};

/// Rounding allowance of the transform, in units of `ε · max|f|` on the torus.
const ROUNDOFF_ULPS: f64 = 64.0;

/// Computed Laurent coefficients on the box `Q_N`.
#[derive(Clone, Debug)]
pub struct CoefficientTable {
    dim: usize,
    box_n: u64,
    radii: Vec<f64>,
    grid: usize,
    /// Dense `[-N, N]^n`, last axis fastest.
    values: Vec<Complex64>,
    aliasing_bound: f64,
    sample_max: f64,
}

/// JSON sidecar written next to a table's CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableMetadata {
    pub dim: usize,
    #[serde(rename = "box")]
    pub box_n: u64,
    pub radii: Vec<f64>,
    pub grid: usize,
    pub aliasing_bound: f64,
    pub sample_max: f64,
}

impl CoefficientTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn box_n(&self) -> u64 {
        self.box_n
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn aliasing_bound(&self) -> f64 {
        self.aliasing_bound
    }

    /// `max |f|` over the torus samples.
    pub fn sample_max(&self) -> f64 {
        self.sample_max
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn flat_index(&self, alpha: &[i64]) -> Option<usize> {
        if alpha.len() != self.dim {
            return None;
        }
        let side = 2 * self.box_n as i64 + 1;
        let mut idx = 0i64;
        for &a in alpha {
            if a.unsigned_abs() > self.box_n {
                return None;
            }
            idx = idx * side + (a + self.box_n as i64);
        }
        Some(idx as usize)
    }

    pub fn get(&self, alpha: &MultiIndex) -> Option<Complex64> {
        self.flat_index(alpha.entries()).map(|i| self.values[i])
    }

    /// Floating-point floor of the transform for `c_α`: rounding in the
    /// sum, amplified by `ρ^{-α}`.
    pub fn roundoff_floor(&self, alpha: &MultiIndex) -> f64 {
        let scale: f64 = alpha
            .entries()
            .iter()
            .zip(&self.radii)
            .map(|(&a, &r)| r.powi(a as i32))
            .product();
        ROUNDOFF_ULPS * f64::EPSILON * self.sample_max.max(f64::MIN_POSITIVE) / scale
    }

    /// Error allowance for `c_α`: aliasing bound plus rounding floor.
    pub fn tolerance(&self, alpha: &MultiIndex) -> f64 {
        self.aliasing_bound + self.roundoff_floor(alpha)
    }

    /// Entries in σ-order.
    pub fn iter_sigma(&self) -> impl Iterator<Item = (MultiIndex, Complex64)> + '_ {
        box_points(self.box_n, self.dim).into_iter().map(move |a| {
            let v = self.get(&a).expect("box point is in table");
            (a, v)
        })
    }

    pub fn metadata(&self) -> TableMetadata {
        TableMetadata {
            dim: self.dim,
            box_n: self.box_n,
            radii: self.radii.clone(),
            grid: self.grid,
            aliasing_bound: self.aliasing_bound,
            sample_max: self.sample_max,
        }
    }

    /// CSV with columns `alpha_1..alpha_n, re, im`, rows in σ-order.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (1..=self.dim).map(|j| format!("alpha_{j}")).collect();
        header.push("re".into());
        header.push("im".into());
        wr.write_record(&header)?;
        for (a, v) in self.iter_sigma() {
            let mut row: Vec<String> = a.entries().iter().map(i64::to_string).collect();
            row.push(v.re.to_string());
            row.push(v.im.to_string());
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn write_sidecar<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, &self.metadata())?;
        Ok(())
    }
}

/// Power-of-two grid size `≥ max(2N+1, 32)`.
pub fn default_grid(big_n: u64) -> usize {
    ((2 * big_n as usize + 1).max(32)).next_power_of_two()
}

/// Raw transform: returns the dense table values and `max |f|` on the torus.
fn transform<F>(eval: &F, radii: &[f64], m: usize, big_n: u64) -> (Vec<Complex64>, f64)
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
{
    let n = radii.len();
    let total = m.pow(n as u32);
    let roots: Vec<Vec<Complex64>> = radii
        .iter()
        .map(|&r| {
            (0..m)
                .map(|s| Complex64::from_polar(r, 2.0 * std::f64::consts::PI * s as f64 / m as f64))
                .collect()
        })
        .collect();
    let mut data: Vec<Complex64> = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut z = vec![Complex64::new(0.0, 0.0); n];
            for j in (0..n).rev() {
                z[j] = roots[j][idx % m];
                idx /= m;
            }
            eval(&z)
        })
        .collect();
    let sample_max = data.iter().map(|v| v.norm()).fold(0.0, f64::max);

    // separable n-D forward transform: 1-D transforms along every axis
    let fft = FftPlanner::<f64>::new().plan_fft_forward(m);
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    for axis in 0..n {
        let stride = m.pow((n - 1 - axis) as u32);
        let outer = total / (m * stride);
        for o in 0..outer {
            for i in 0..stride {
                let base = o * m * stride + i;
                for (s, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + s * stride];
                }
                fft.process(&mut line);
                for (s, v) in line.iter().enumerate() {
                    data[base + s * stride] = *v;
                }
            }
        }
    }

    let norm = 1.0 / total as f64;
    let side = 2 * big_n as usize + 1;
    let mut values = Vec::with_capacity(side.pow(n as u32));
    let mut alpha = vec![-(big_n as i64); n];
    for _ in 0..side.pow(n as u32) {
        let mut idx = 0usize;
        let mut scale = 1.0;
        for j in 0..n {
            idx = idx * m + alpha[j].rem_euclid(m as i64) as usize;
            scale *= radii[j].powi(alpha[j] as i32);
        }
        values.push(data[idx] * norm / scale);
        // advance odometer over [-N, N]^n
        for j in (0..n).rev() {
            if alpha[j] < big_n as i64 {
                alpha[j] += 1;
                break;
            }
            alpha[j] = -(big_n as i64);
        }
    }
    (values, sample_max)
}

fn check_grid(radii: &[f64], m: usize, big_n: u64) -> Result<()> {
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(Error::domain(format!("torus radii must be positive, got {radii:?}")));
    }
    if m < 2 * big_n as usize + 1 {
        return Err(Error::config(format!(
            "grid m={m} cannot resolve box N={big_n}; need m >= {}",
            2 * big_n + 1
        )));
    }
    Ok(())
}

/// Coefficient table of an arbitrary evaluable function on the torus of
/// the given radii; the aliasing bound comes from a second grid of `2m`.
pub fn coefficients_with<F>(eval: F, radii: &[f64], m: usize, big_n: u64) -> Result<CoefficientTable>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
{
    check_grid(radii, m, big_n)?;
    let (values, sample_max) = transform(&eval, radii, m, big_n);
    let (fine, _) = transform(&eval, radii, 2 * m, big_n);
    let aliasing_bound = values
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok(CoefficientTable {
        dim: radii.len(),
        box_n: big_n,
        radii: radii.to_vec(),
        grid: m,
        values,
        aliasing_bound,
        sample_max,
    })
}

fn check_torus(f: &TestFunction, radii: &[f64]) -> Result<()> {
    if radii.len() != f.dim() {
        return Err(Error::domain("torus dimension does not match the function"));
    }
    let inside = f
        .validity
        .axes
        .iter()
        .zip(radii)
        .all(|(a, &r)| r > 0.0 && a.closure_contains_modulus(r, 1e-12));
    if inside {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "torus {radii:?} is outside the validity region of {}",
            f.name
        )))
    }
}

/// Laurent coefficients of `f` over `Q_N` from an `m`-point grid per axis.
pub fn coefficients_dft(f: &TestFunction, radii: &[f64], m: usize, big_n: u64) -> Result<CoefficientTable> {
    check_torus(f, radii)?;
    let zero = vec![0u32; f.dim()];
    coefficients_with(|z| f.deriv_unchecked(&zero, z), radii, m, big_n)
}

/// `max_{α ∈ Q_N} |table_m[α] - table_{2m}[α]|`.
pub fn aliasing_estimate(f: &TestFunction, radii: &[f64], m: usize, big_n: u64) -> Result<f64> {
    Ok(coefficients_dft(f, radii, m, big_n)?.aliasing_bound())
}

/// Largest grid tried by [`coefficients_adaptive`] for dimension `n`.
pub fn max_grid(n: usize) -> usize {
    match n {
        1 => 8192,
        2 => 512,
        _ => 64,
    }
}

/// Doubles `m` from [`default_grid`] until the aliasing bound, measured in
/// function-value units (`|Δc_α| ρ^α`), drops below `tol · max|f|`.
pub fn coefficients_adaptive<F>(eval: F, radii: &[f64], big_n: u64, tol: f64) -> Result<CoefficientTable>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
{
    let n = radii.len();
    let mut m = default_grid(big_n);
    loop {
        let t = coefficients_with(&eval, radii, m, big_n)?;
        let min_scale = box_points(big_n, n)
            .iter()
            .map(|a| {
                a.entries()
                    .iter()
                    .zip(radii)
                    .map(|(&e, &r)| r.powi(e as i32))
                    .product::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
        let scaled = t.aliasing_bound() * min_scale;
        if scaled <= tol * t.sample_max().max(1e-300) || 2 * m > max_grid(n) {
            return Ok(t);
        }
        m *= 2;
    }
}

/// `|D^γ(c_α(f) z^α) - c_{α-γ}(D^γ f) z^{α-γ}|`.
///
/// The left side uses the oracle coefficient of `f` and the closed-form
/// derivative of the monomial; the right side runs the discrete Cauchy
/// formula on `D^γ f` over the torus through `z`.
pub fn derivative_shift_check(
    f: &TestFunction,
    gamma: &MultiIndex,
    alpha: &MultiIndex,
    z: &[Complex64],
) -> Result<f64> {
    let orders = gamma
        .as_orders()
        .ok_or_else(|| Error::config(format!("derivative order {gamma} has a negative entry")))?;
    if z.len() != f.dim() || alpha.dim() != f.dim() || gamma.dim() != f.dim() {
        return Err(Error::domain("dimension mismatch in derivative_shift_check"));
    }
    let radii: Vec<f64> = z.iter().map(|c| c.norm()).collect();
    check_torus(f, &radii)?;
    let shifted = alpha - gamma;
    let monomial = |e: &MultiIndex| -> Complex64 {
        e.entries()
            .iter()
            .zip(z)
            .map(|(&a, &zj)| ipow(zj, a))
            .product()
    };

    let ff: f64 = alpha
        .entries()
        .iter()
        .zip(&orders)
        .map(|(&a, &g)| falling_factorial(a, g))
        .product();
    let lhs = if ff == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        f.oracle_coeff(alpha) * ff * monomial(&shifted)
    };

    let table = coefficients_adaptive(
        |w| f.deriv_unchecked(&orders, w),
        &radii,
        shifted.linf_norm(),
        1e-15,
    )?;
    let rhs = table.get(&shifted).expect("shifted index in box") * monomial(&shifted);
    Ok((lhs - rhs).norm())
}
