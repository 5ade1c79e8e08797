//! Reinhardt geometry: polyannuli, shadows, sampling grids and finite
//! polyannulus covers of the built-in domains.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One factor of a polyannulus: `r < |z| < R` or `|z| < R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AxisRange {
    Annular { inner: f64, outer: f64 },
    Disc { outer: f64 },
}

impl AxisRange {
    pub fn annular(inner: f64, outer: f64) -> Result<Self> {
        if !(inner > 0.0 && inner < outer && outer.is_finite()) {
            return Err(Error::config(format!(
                "annular axis needs 0 < r < R < inf, got r={inner}, R={outer}"
            )));
        }
        Ok(AxisRange::Annular { inner, outer })
    }

    pub fn disc(outer: f64) -> Result<Self> {
        if !(outer > 0.0 && outer.is_finite()) {
            return Err(Error::config(format!("disc axis needs 0 < R < inf, got {outer}")));
        }
        Ok(AxisRange::Disc { outer })
    }

    /// Inner modulus; zero for a disc.
    pub fn inner(&self) -> f64 {
        match *self {
            AxisRange::Annular { inner, .. } => inner,
            AxisRange::Disc { .. } => 0.0,
        }
    }

    pub fn outer(&self) -> f64 {
        match *self {
            AxisRange::Annular { outer, .. } | AxisRange::Disc { outer } => outer,
        }
    }

    pub fn is_disc(&self) -> bool {
        matches!(self, AxisRange::Disc { .. })
    }

    /// Open-set membership of a modulus.
    pub fn contains_modulus(&self, rho: f64) -> bool {
        match *self {
            AxisRange::Annular { inner, outer } => inner < rho && rho < outer,
            AxisRange::Disc { outer } => rho < outer,
        }
    }

    /// Membership in the closed shadow, with relative slack `tol`.
    pub fn closure_contains_modulus(&self, rho: f64, tol: f64) -> bool {
        let slack = tol * self.outer();
        rho >= self.inner() - slack && rho <= self.outer() + slack
    }

    /// Whether `self` lies inside the closure of `other`.
    pub fn is_within_closure(&self, other: &AxisRange) -> bool {
        let tol = 1e-12 * other.outer();
        if other.is_disc() {
            self.outer() <= other.outer() + tol
        } else {
            !self.is_disc()
                && self.inner() >= other.inner() - tol
                && self.outer() <= other.outer() + tol
        }
    }

    /// Uniform closed grid of `res` moduli from the inner to the outer edge.
    pub fn radial_grid(&self, res: usize) -> Vec<f64> {
        let (lo, hi) = (self.inner(), self.outer());
        (0..res)
            .map(|i| {
                if i + 1 == res {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (res - 1) as f64
                }
            })
            .collect()
    }
}

/// Product of per-axis annuli and discs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polyannulus {
    pub axes: Vec<AxisRange>,
}

impl Polyannulus {
    pub fn new(axes: Vec<AxisRange>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::config("polyannulus needs at least one axis"));
        }
        for a in &axes {
            match *a {
                AxisRange::Annular { inner, outer } => {
                    AxisRange::annular(inner, outer)?;
                }
                AxisRange::Disc { outer } => {
                    AxisRange::disc(outer)?;
                }
            }
        }
        Ok(Polyannulus { axes })
    }

    pub fn polydisc(radii: &[f64]) -> Result<Self> {
        Polyannulus::new(radii.iter().map(|&r| AxisRange::disc(r)).collect::<Result<_>>()?)
    }

    pub fn annulus_product(inner: &[f64], outer: &[f64]) -> Result<Self> {
        if inner.len() != outer.len() {
            return Err(Error::config("inner and outer radii differ in length"));
        }
        Polyannulus::new(
            inner
                .iter()
                .zip(outer)
                .map(|(&r, &big_r)| AxisRange::annular(r, big_r))
                .collect::<Result<_>>()?,
        )
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn outer_radii(&self) -> Vec<f64> {
        self.axes.iter().map(AxisRange::outer).collect()
    }

    /// `∏ (1 + R_j²)`.
    pub fn radius_factor(&self) -> f64 {
        self.axes.iter().map(|a| 1.0 + a.outer() * a.outer()).product()
    }

    pub fn contains(&self, z: &[Complex64]) -> bool {
        z.len() == self.dim()
            && self
                .axes
                .iter()
                .zip(z)
                .all(|(a, zj)| a.contains_modulus(zj.norm()))
    }

    pub fn closure_contains(&self, z: &[Complex64]) -> bool {
        z.len() == self.dim()
            && self
                .axes
                .iter()
                .zip(z)
                .all(|(a, zj)| a.closure_contains_modulus(zj.norm(), 1e-12))
    }

    pub fn is_within_closure(&self, other: &Polyannulus) -> bool {
        self.dim() == other.dim()
            && self
                .axes
                .iter()
                .zip(&other.axes)
                .all(|(a, b)| a.is_within_closure(b))
    }

    /// Default torus: geometric mean of `(r_j, R_j)` on annular axes, `R_j/2`
    /// on disc axes.
    pub fn default_torus(&self) -> Vec<f64> {
        self.axes
            .iter()
            .map(|a| match *a {
                AxisRange::Annular { inner, outer } => (inner * outer).sqrt(),
                AxisRange::Disc { outer } => outer / 2.0,
            })
            .collect()
    }

    /// Deterministic product grid over the closed shadow, `res^n` tuples.
    pub fn sample_shadow(&self, res: usize) -> Vec<Vec<f64>> {
        assert!(res >= 2, "sample_shadow needs res >= 2");
        let per_axis: Vec<Vec<f64>> = self.axes.iter().map(|a| a.radial_grid(res)).collect();
        let mut out = vec![Vec::new()];
        for axis in &per_axis {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |&r| {
                        let mut p = prefix.clone();
                        p.push(r);
                        p
                    })
                })
                .collect();
        }
        out
    }

    /// Closed product grid of `radial × angular` points per axis.
    pub fn sample_grid(&self, radial: usize, angular: usize) -> SampleGrid {
        assert!(radial >= 2 && angular >= 1);
        let axes = self
            .axes
            .iter()
            .map(|a| {
                let mut pts = Vec::with_capacity(radial * angular);
                for rho in a.radial_grid(radial) {
                    if rho == 0.0 {
                        pts.push(Complex64::new(0.0, 0.0));
                        continue;
                    }
                    for t in 0..angular {
                        let theta = 2.0 * PI * t as f64 / angular as f64;
                        pts.push(Complex64::from_polar(rho, theta));
                    }
                }
                pts
            })
            .collect();
        SampleGrid {
            axes,
            radial,
            angular,
        }
    }

    /// A uniformly random point of the open set (moduli uniform per axis).
    pub fn random_point<R: Rng>(&self, rng: &mut R) -> Vec<Complex64> {
        self.axes
            .iter()
            .map(|a| {
                let rho = loop {
                    let r = rng.gen_range(a.inner()..a.outer());
                    if a.contains_modulus(r) {
                        break r;
                    }
                };
                Complex64::from_polar(rho, rng.gen_range(0.0..2.0 * PI))
            })
            .collect()
    }

    /// A random point whose moduli stay a `margin` fraction away from the
    /// edges of every axis, with no zero coordinate.
    pub fn random_interior_point<R: Rng>(&self, rng: &mut R, margin: f64) -> Vec<Complex64> {
        self.axes
            .iter()
            .map(|a| {
                let (lo, hi) = (a.inner(), a.outer());
                let w = hi - lo;
                let rho = rng.gen_range(lo + margin * w..hi - margin * w);
                Complex64::from_polar(rho, rng.gen_range(0.0..2.0 * PI))
            })
            .collect()
    }
}

/// `φ(z) = (|z_1|, …, |z_n|)`.
pub fn shadow(z: &[Complex64]) -> Vec<f64> {
    z.iter().map(|c| c.norm()).collect()
}

/// A product sampling grid: one list of points per axis.
#[derive(Clone, Debug)]
pub struct SampleGrid {
    pub axes: Vec<Vec<Complex64>>,
    pub radial: usize,
    pub angular: usize,
}

impl SampleGrid {
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Per-axis sizes, last axis fastest in the flat index.
    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Vec::len).collect()
    }

    /// Writes the point with flat index `idx` into `buf`.
    pub fn point_into(&self, mut idx: usize, buf: &mut [Complex64]) {
        for j in (0..self.axes.len()).rev() {
            let len = self.axes[j].len();
            buf[j] = self.axes[j][idx % len];
            idx /= len;
        }
    }

    pub fn point(&self, idx: usize) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.point_into(idx, &mut buf);
        buf
    }
}

/// Built-in bounded Reinhardt domains.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    Polydisc { radii: Vec<f64> },
    AnnulusProduct { inner: Vec<f64>, outer: Vec<f64> },
    /// `{ |z_1| < |z_2| < 1 }` in `C^2`.
    HartogsTriangle,
}

impl DomainSpec {
    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Polydisc { radii } => radii.len(),
            DomainSpec::AnnulusProduct { outer, .. } => outer.len(),
            DomainSpec::HartogsTriangle => 2,
        }
    }

    pub fn label(&self) -> String {
        match self {
            DomainSpec::Polydisc { radii } => format!("polydisc{radii:?}"),
            DomainSpec::AnnulusProduct { inner, outer } => {
                format!("annulus_product{inner:?}{outer:?}")
            }
            DomainSpec::HartogsTriangle => "hartogs_triangle".to_string(),
        }
    }

    pub fn contains(&self, z: &[Complex64]) -> bool {
        if z.len() != self.dim() {
            return false;
        }
        match self {
            DomainSpec::Polydisc { radii } => z.iter().zip(radii).all(|(c, &r)| c.norm() < r),
            DomainSpec::AnnulusProduct { inner, outer } => z
                .iter()
                .zip(inner.iter().zip(outer))
                .all(|(c, (&r, &big_r))| r < c.norm() && c.norm() < big_r),
            DomainSpec::HartogsTriangle => {
                let (a, b) = (z[0].norm(), z[1].norm());
                a < b && b < 1.0
            }
        }
    }
}

/// A finite list of polyannuli contained in a named domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReinhardtCover {
    pub label: String,
    pub cells: Vec<Polyannulus>,
}

/// Finite rational-radius polyannulus cover of a built-in domain.
///
/// Polydiscs and annulus products are polyannuli already, so their cover is
/// the domain itself at every depth. The Hartogs triangle is covered by the
/// cells `{|z_1| < i/2^ℓ, i/2^ℓ < |z_2| < (i+2)/2^ℓ}` for `ℓ = 2..=depth+1`
/// and `1 ≤ i ≤ 2^ℓ - 3`. All radii are dyadic, so they are exact in `f64`.
/// Cells of depth `d` are kept at depth `d+1`.
pub fn rational_cover(spec: &DomainSpec, depth: u32) -> Result<ReinhardtCover> {
    if depth == 0 {
        return Err(Error::config("cover depth must be >= 1"));
    }
    let cells = match spec {
        DomainSpec::Polydisc { radii } => vec![Polyannulus::polydisc(radii)?],
        DomainSpec::AnnulusProduct { inner, outer } => {
            vec![Polyannulus::annulus_product(inner, outer)?]
        }
        DomainSpec::HartogsTriangle => {
            if depth > 20 {
                return Err(Error::config("hartogs cover depth must be <= 20"));
            }
            let mut cells = Vec::new();
            for level in 2..=depth + 1 {
                let den = (1u64 << level) as f64;
                for i in 1..=(1u64 << level) - 3 {
                    let b = i as f64 / den;
                    let c = (i + 2) as f64 / den;
                    cells.push(Polyannulus::new(vec![
                        AxisRange::disc(b)?,
                        AxisRange::annular(b, c)?,
                    ])?);
                }
            }
            cells
        }
    };
    Ok(ReinhardtCover {
        label: spec.label(),
        cells,
    })
}

/// Counts sampled points of the cover's cells that fall outside the domain.
pub fn cover_membership_failures(
    spec: &DomainSpec,
    cover: &ReinhardtCover,
    samples_per_cell: usize,
    seed: u64,
) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for cell in &cover.cells {
        for _ in 0..samples_per_cell {
            let z = cell.random_point(&mut rng);
            if !spec.contains(&z) {
                failures += 1;
            }
        }
    }
    failures
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn shadow_examples() {
        assert_eq!(shadow(&[c(1.0, 0.0), c(0.0, 0.0)]), vec![1.0, 0.0]);
        assert_eq!(shadow(&[c(0.0, 3.0)]), vec![3.0]);
        let s = shadow(&[c(1.0, 1.0), c(1.0, -1.0)]);
        assert!((s[0] - 2f64.sqrt()).abs() < 1e-15 && (s[1] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn contains_examples() {
        let bidisc = Polyannulus::polydisc(&[1.0, 1.0]).unwrap();
        assert!(bidisc.contains(&[c(0.5, 0.0), c(0.0, 0.5)]));
        let ann = Polyannulus::annulus_product(&[1.0], &[2.0]).unwrap();
        assert!(!ann.contains(&[c(1.0, 0.0)]));
        let disc = Polyannulus::polydisc(&[1.0]).unwrap();
        assert!(disc.contains(&[c(0.0, 0.0)]));
    }

    #[test]
    fn sample_shadow_examples() {
        let ann = Polyannulus::annulus_product(&[1.0], &[2.0]).unwrap();
        assert_eq!(ann.sample_shadow(3), vec![vec![1.0], vec![1.5], vec![2.0]]);
        let disc = Polyannulus::polydisc(&[1.0]).unwrap();
        assert_eq!(disc.sample_shadow(2), vec![vec![0.0], vec![1.0]]);
        let two = Polyannulus::polydisc(&[1.0, 2.0]).unwrap();
        assert_eq!(two.sample_shadow(2).len(), 4);
    }

    #[test]
    fn invalid_axes_rejected() {
        assert!(AxisRange::annular(2.0, 1.0).is_err());
        assert!(AxisRange::annular(0.0, 1.0).is_err());
        assert!(AxisRange::disc(-1.0).is_err());
        assert!(Polyannulus::new(vec![]).is_err());
    }

    #[test]
    fn cover_examples() {
        let pd = rational_cover(&DomainSpec::Polydisc { radii: vec![1.0, 1.0] }, 1).unwrap();
        assert_eq!(pd.cells, vec![Polyannulus::polydisc(&[1.0, 1.0]).unwrap()]);
        let ap = rational_cover(
            &DomainSpec::AnnulusProduct {
                inner: vec![1.0],
                outer: vec![2.0],
            },
            1,
        )
        .unwrap();
        assert_eq!(ap.cells.len(), 1);
        let ht = rational_cover(&DomainSpec::HartogsTriangle, 2).unwrap();
        assert!(ht.cells.len() >= 2);
        assert_eq!(rational_cover(&DomainSpec::HartogsTriangle, 0).is_err(), true);
    }

    #[test]
    fn hartogs_cells_are_inside_the_triangle() {
        let spec = DomainSpec::HartogsTriangle;
        let cover = rational_cover(&spec, 2).unwrap();
        assert_eq!(cover_membership_failures(&spec, &cover, 10_000, 7), 0);
        for cell in &cover.cells {
            let (a, b, c) = (cell.axes[0].outer(), cell.axes[1].inner(), cell.axes[1].outer());
            assert!(a <= b && b < c && c < 1.0);
        }
    }

    #[test]
    fn hartogs_cover_is_monotone_and_exhausts() {
        let spec = DomainSpec::HartogsTriangle;
        for d in 1..6 {
            let small = rational_cover(&spec, d).unwrap();
            let big = rational_cover(&spec, d + 1).unwrap();
            assert!(small.cells.iter().all(|c| big.cells.contains(c)));
        }
        // a point close to the boundary needs a deeper cover
        let z = [c(0.6, 0.0), c(0.0, 0.93)];
        let covered = |d| {
            rational_cover(&spec, d)
                .unwrap()
                .cells
                .iter()
                .any(|p| p.contains(&z))
        };
        assert!(!covered(1));
        assert!(covered(6));
    }
}
