//! Multipole coefficient sets and the fields they generate.
//!
//! Outside the source sphere, with `x = kr`, `h = h_l^(1)(x)`,
//! `D = d/dx[x h_l^(1)(x)]` and `L2 = l(l+1)`:
//!
//! ```text
//! E = Z0 Σ [ a_E sqrt(L2) h/x Y_lm r̂ + a_E (i/x) D Z_lm + a_M h X_lm ]
//! H =    Σ [ -a_M sqrt(L2) h/x Y_lm r̂ + a_E h X_lm - a_M (i/x) D Z_lm ]
//! ```
//!
//! Fields are exposed as `(E, H)`; `B = μ0 H`. `a_E` carries A/m so that
//! `Z0 a_E h X` is in V/m.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::harmonics::{FieldKind, FieldSamples, SphVector, SphereGrid, VectorHarmonics};
use crate::quadrature::pairwise_sum_real;
use crate::specfun::{mode_count, modes, neg_i_pow, ModeIndex, RadialFactors};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Vacuum permeability, H/m (CODATA 2018).
pub const VACUUM_PERMEABILITY: f64 = 1.256_637_062_12e-6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Homogeneous lossless exterior medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium {
    /// Wavenumber, rad/m.
    pub k: f64,
    /// Wave impedance, ohm.
    pub z0: f64,
    /// Permeability, H/m.
    pub mu0: f64,
}

impl Medium {
    pub fn new(k: f64, z0: f64, mu0: f64) -> Result<Self> {
        for (name, v) in [("k", k), ("Z0", z0), ("mu0", mu0)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { k, z0, mu0 })
    }

    /// Free space at `frequency_hz`.
    pub fn vacuum(frequency_hz: f64) -> Result<Self> {
        if !(frequency_hz > 0.0 && frequency_hz.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "frequency must be positive, got {frequency_hz}"
            )));
        }
        let k = 2.0 * PI * frequency_hz / SPEED_OF_LIGHT;
        Self::new(k, VACUUM_PERMEABILITY * SPEED_OF_LIGHT, VACUUM_PERMEABILITY)
    }

    pub fn wavelength(&self) -> f64 {
        2.0 * PI / self.k
    }
}

/// Electric and magnetic multipole coefficients for `1 ≤ l ≤ l_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    l_max: u32,
    medium: Medium,
    a_e: Vec<Complex64>,
    a_m: Vec<Complex64>,
}

impl CoefficientSet {
    pub fn zeros(l_max: u32, medium: Medium) -> Result<Self> {
        if l_max < 1 {
            return Err(Error::InvalidParameter("l_max must be >= 1".into()));
        }
        let n = mode_count(l_max);
        Ok(Self {
            l_max,
            medium,
            a_e: vec![ZERO; n],
            a_m: vec![ZERO; n],
        })
    }

    /// Builds a set from dense coefficient vectors in canonical mode order.
    pub fn from_dense(
        l_max: u32,
        medium: Medium,
        a_e: Vec<Complex64>,
        a_m: Vec<Complex64>,
    ) -> Result<Self> {
        if l_max < 1 {
            return Err(Error::InvalidParameter("l_max must be >= 1".into()));
        }
        let n = mode_count(l_max);
        if a_e.len() != n || a_m.len() != n {
            return Err(Error::InvalidParameter(format!(
                "expected {n} coefficients per family, got {} and {}",
                a_e.len(),
                a_m.len()
            )));
        }
        if a_e.iter().chain(&a_m).any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coefficient".into()));
        }
        Ok(Self { l_max, medium, a_e, a_m })
    }

    pub fn l_max(&self) -> u32 {
        self.l_max
    }

    pub fn medium(&self) -> &Medium {
        &self.medium
    }

    pub fn a_e_dense(&self) -> &[Complex64] {
        &self.a_e
    }

    pub fn a_m_dense(&self) -> &[Complex64] {
        &self.a_m
    }

    fn slot(&self, mode: ModeIndex) -> Result<usize> {
        if mode.l() > self.l_max {
            return Err(Error::InvalidMode {
                l: mode.l() as i64,
                m: mode.m() as i64,
                reason: "degree exceeds the set's truncation",
            });
        }
        Ok(mode.dense_index())
    }

    pub fn a_e(&self, mode: ModeIndex) -> Complex64 {
        self.slot(mode).map(|i| self.a_e[i]).unwrap_or(ZERO)
    }

    pub fn a_m(&self, mode: ModeIndex) -> Complex64 {
        self.slot(mode).map(|i| self.a_m[i]).unwrap_or(ZERO)
    }

    pub fn set_a_e(&mut self, mode: ModeIndex, value: Complex64) -> Result<()> {
        let i = self.slot(mode)?;
        check_finite(value)?;
        self.a_e[i] = value;
        Ok(())
    }

    pub fn set_a_m(&mut self, mode: ModeIndex, value: Complex64) -> Result<()> {
        let i = self.slot(mode)?;
        check_finite(value)?;
        self.a_m[i] = value;
        Ok(())
    }

    /// `(mode, a_E, a_M)` in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (ModeIndex, Complex64, Complex64)> + '_ {
        modes(self.l_max)
            .zip(self.a_e.iter().zip(&self.a_m))
            .map(|(mode, (e, m))| (mode, *e, *m))
    }

    /// Largest coefficient magnitude over both families.
    pub fn max_abs(&self) -> f64 {
        self.a_e.iter().chain(&self.a_m).map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Copy truncated or zero-padded to another degree.
    pub fn resized(&self, l_max: u32) -> Result<Self> {
        let mut out = Self::zeros(l_max, self.medium)?;
        for (mode, e, m) in self.iter() {
            if mode.l() <= l_max {
                let i = mode.dense_index();
                out.a_e[i] = e;
                out.a_m[i] = m;
            }
        }
        Ok(out)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.l_max, other.l_max, "coefficient sets of different degree");
        Self {
            l_max: self.l_max,
            medium: self.medium,
            a_e: self.a_e.iter().zip(&other.a_e).map(|(a, b)| f(*a, *b)).collect(),
            a_m: self.a_m.iter().zip(&other.a_m).map(|(a, b)| f(*a, *b)).collect(),
        }
    }
}

fn check_finite(c: Complex64) -> Result<()> {
    if c.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter("non-finite coefficient".into()))
    }
}

impl Add for &CoefficientSet {
    type Output = CoefficientSet;
    fn add(self, other: &CoefficientSet) -> CoefficientSet {
        self.zip_with(other, |a, b| a + b)
    }
}

impl Mul<Complex64> for &CoefficientSet {
    type Output = CoefficientSet;
    fn mul(self, s: Complex64) -> CoefficientSet {
        self.zip_with(self, |a, _| a * s)
    }
}

impl Neg for &CoefficientSet {
    type Output = CoefficientSet;
    fn neg(self) -> CoefficientSet {
        self.zip_with(self, |a, _| -a)
    }
}

/// E and H at one point from precomputed harmonics and radial factors.
fn fields_at(coeffs: &CoefficientSet, vh: &VectorHarmonics, rf: &RadialFactors) -> (SphVector, SphVector) {
    let i = Complex64::i();
    let x = rf.x;
    let z0 = coeffs.medium.z0;
    let mut e = SphVector::ZERO;
    let mut h = SphVector::ZERO;
    for (j, mode) in modes(coeffs.l_max).enumerate() {
        let a_e = coeffs.a_e[j];
        let a_m = coeffs.a_m[j];
        if a_e == ZERO && a_m == ZERO {
            continue;
        }
        let l = mode.l() as usize;
        let hl = rf.h[l];
        let radial = hl * (mode.ang_norm() / x) * vh.y[j];
        let trans = i * rf.d[l] / x;
        let xv = vh.x[j];
        let zv = vh.z[j];

        e.r += a_e * radial;
        e.theta += a_e * trans * zv.theta + a_m * hl * xv.theta;
        e.phi += a_e * trans * zv.phi + a_m * hl * xv.phi;

        h.r -= a_m * radial;
        h.theta += a_e * hl * xv.theta - a_m * trans * zv.theta;
        h.phi += a_e * hl * xv.phi - a_m * trans * zv.phi;
    }
    (e * z0, h)
}

/// E and H at a single point `(r, θ, φ)`.
pub fn field_at(coeffs: &CoefficientSet, r: f64, theta: f64, phi: f64) -> Result<(SphVector, SphVector)> {
    check_radius(r)?;
    let rf = RadialFactors::new(coeffs.l_max, coeffs.medium.k * r)?;
    let vh = VectorHarmonics::new(coeffs.l_max, theta, phi);
    Ok(fields_at(coeffs, &vh, &rf))
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("radius must be positive, got {r}")))
    }
}

/// E and H samples on `grid` placed at radius `r`.
///
/// `r` must lie in the source-free exterior; that is the caller's
/// responsibility. The grid must be exact to at least `coeffs.l_max` so the
/// samples can be projected back.
pub fn synthesize(
    coeffs: &CoefficientSet,
    r: f64,
    grid: &SphereGrid,
) -> Result<(FieldSamples, FieldSamples)> {
    check_radius(r)?;
    if grid.l_max() < coeffs.l_max {
        return Err(Error::GridTooCoarse {
            required: coeffs.l_max as usize,
            grid: grid.l_max() as usize,
        });
    }
    let grid = Arc::new(grid.with_radius(r)?);
    let rf = RadialFactors::new(coeffs.l_max, coeffs.medium.k * r)?;
    let pairs: Vec<(SphVector, SphVector)> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let node = grid.node(k);
            let vh = VectorHarmonics::new(coeffs.l_max, node.theta, node.phi);
            fields_at(coeffs, &vh, &rf)
        })
        .collect();
    let (e, h): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    Ok((
        FieldSamples::new(grid.clone(), FieldKind::Electric, e)?,
        FieldSamples::new(grid, FieldKind::Magnetic, h)?,
    ))
}

/// Far-zone pattern with the common factor `e^{ikr}/(kr)` removed.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldPattern {
    pub directions: Vec<(f64, f64)>,
    pub e_theta: Vec<Complex64>,
    pub e_phi: Vec<Complex64>,
    z0: f64,
}

impl FarFieldPattern {
    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Wave impedance used for `H = r̂ × E / Z0`.
    pub fn z0(&self) -> f64 {
        self.z0
    }

    /// `H_θ = -E_φ / Z0`.
    pub fn h_theta(&self) -> Vec<Complex64> {
        self.e_phi.iter().map(|e| -e / self.z0).collect()
    }

    /// `H_φ = E_θ / Z0`.
    pub fn h_phi(&self) -> Vec<Complex64> {
        self.e_theta.iter().map(|e| e / self.z0).collect()
    }

    /// `|E|` per direction.
    pub fn magnitude(&self) -> Vec<f64> {
        self.e_theta
            .iter()
            .zip(&self.e_phi)
            .map(|(t, p)| (t.norm_sqr() + p.norm_sqr()).sqrt())
            .collect()
    }
}

/// Far-zone electric field per direction, using the large-argument limits
/// `h_l(x) → (-i)^{l+1} e^{ix}/x` and `D_l(x) → (-i)^l e^{ix}`.
pub fn far_field(coeffs: &CoefficientSet, directions: &[(f64, f64)]) -> FarFieldPattern {
    let z0 = coeffs.medium.z0;
    let (e_theta, e_phi): (Vec<_>, Vec<_>) = directions
        .par_iter()
        .map(|&(theta, phi)| {
            let vh = VectorHarmonics::new(coeffs.l_max, theta, phi);
            let mut et = ZERO;
            let mut ep = ZERO;
            for (j, mode) in modes(coeffs.l_max).enumerate() {
                let l = mode.l();
                // i (-i)^l = (-i)^{l+3}
                let ce = coeffs.a_e[j] * neg_i_pow(l + 3);
                let cm = coeffs.a_m[j] * neg_i_pow(l + 1);
                et += ce * vh.z[j].theta + cm * vh.x[j].theta;
                ep += ce * vh.z[j].phi + cm * vh.x[j].phi;
            }
            (et * z0, ep * z0)
        })
        .unzip();
    FarFieldPattern {
        directions: directions.to_vec(),
        e_theta,
        e_phi,
        z0,
    }
}

/// Coefficients of the dual field `(E', H') = (-Z0 H, E / Z0)`:
/// `a_E' = a_M`, `a_M' = -a_E`.
///
/// Applying the map twice negates the fields.
pub fn duality(coeffs: &CoefficientSet) -> CoefficientSet {
    CoefficientSet {
        l_max: coeffs.l_max,
        medium: coeffs.medium,
        a_e: coeffs.a_m.clone(),
        a_m: coeffs.a_e.iter().map(|c| -c).collect(),
    }
}

/// Time-averaged power through the sphere of radius `r`:
/// quadrature of `½ Re(E × H*) · r̂ r²`.
pub fn radiated_power(coeffs: &CoefficientSet, r: f64, grid: &SphereGrid) -> Result<f64> {
    let (e, h) = synthesize(coeffs, r, grid)?;
    let g = e.grid();
    let terms: Vec<f64> = e
        .values()
        .iter()
        .zip(h.values())
        .enumerate()
        .map(|(k, (e, h))| 0.5 * e.radial_cross_conj(h).re * r * r * g.node(k).weight)
        .collect();
    Ok(pairwise_sum_real(&terms))
}

/// Closed-form radiated power `Z0/(2k²) Σ (|a_E|² + |a_M|²)`, from the
/// far-zone orthonormality of the vector harmonics.
pub fn modal_power(coeffs: &CoefficientSet) -> f64 {
    let s: f64 = coeffs.a_e.iter().chain(&coeffs.a_m).map(|c| c.norm_sqr()).sum();
    coeffs.medium.z0 * s / (2.0 * coeffs.medium.k * coeffs.medium.k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn medium() -> Medium {
        Medium::vacuum(1.0e9).unwrap()
    }

    fn single(l_max: u32, mode: (u32, i32), electric: bool) -> CoefficientSet {
        let mut c = CoefficientSet::zeros(l_max, medium()).unwrap();
        let m = ModeIndex::new(mode.0, mode.1).unwrap();
        if electric {
            c.set_a_e(m, Complex64::new(1.0, 0.0)).unwrap();
        } else {
            c.set_a_m(m, Complex64::new(1.0, 0.0)).unwrap();
        }
        c
    }

    #[test]
    fn medium_validation() {
        assert!(Medium::new(0.0, 377.0, 1e-6).is_err());
        assert!(Medium::new(1.0, -1.0, 1e-6).is_err());
        assert!(Medium::vacuum(0.0).is_err());
        let m = Medium::vacuum(SPEED_OF_LIGHT).unwrap();
        assert_relative_eq!(m.wavelength(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(m.z0, 376.730_313_668, max_relative = 1e-11);
    }

    #[test]
    fn coefficient_access_respects_truncation() {
        let mut c = CoefficientSet::zeros(2, medium()).unwrap();
        let high = ModeIndex::new(3, 0).unwrap();
        assert!(c.set_a_e(high, Complex64::new(1.0, 0.0)).is_err());
        assert_eq!(c.a_e(high), ZERO);
        assert!(c
            .set_a_m(ModeIndex::new(2, 1).unwrap(), Complex64::new(f64::NAN, 0.0))
            .is_err());
        assert!(CoefficientSet::zeros(0, medium()).is_err());
    }

    #[test]
    fn zero_coefficients_give_zero_fields() {
        let c = CoefficientSet::zeros(4, medium()).unwrap();
        let grid = SphereGrid::new(4, 0.1).unwrap();
        let (e, h) = synthesize(&c, 0.1, &grid).unwrap();
        assert!(e.values().iter().chain(h.values()).all(|v| *v == SphVector::ZERO));
        assert_eq!(radiated_power(&c, 0.1, &grid).unwrap(), 0.0);
    }

    #[test]
    fn synthesize_rejects_bad_radius_and_coarse_grid() {
        let c = single(3, (1, 0), true);
        let grid = SphereGrid::new(3, 1.0).unwrap();
        assert!(synthesize(&c, 0.0, &grid).is_err());
        assert!(synthesize(&c, -1.0, &grid).is_err());
        let coarse = SphereGrid::new(2, 1.0).unwrap();
        assert!(matches!(
            synthesize(&c, 1.0, &coarse),
            Err(Error::GridTooCoarse { required: 3, grid: 2 })
        ));
    }

    #[test]
    fn electric_dipole_structure() {
        let c = single(1, (1, 0), true);
        let lambda = medium().wavelength();
        let grid = SphereGrid::new(3, 1.0).unwrap();
        let (e, h) = synthesize(&c, lambda / 4.0, &grid).unwrap();
        for (k, (ev, hv)) in e.values().iter().zip(h.values()).enumerate() {
            assert_eq!(ev.phi, ZERO);
            assert_eq!(hv.r, ZERO);
            // E_r ∝ Y_10 ∝ cos θ
            let theta = grid.node(k).theta;
            let ratio = ev.r / theta.cos();
            let ref_ratio = e.values()[0].r / grid.node(0).theta.cos();
            assert!((ratio - ref_ratio).norm() < 1e-12 * ref_ratio.norm());
        }
    }

    #[test]
    fn magnetic_dipole_is_negated_dual_of_electric_dipole() {
        let elec = single(1, (1, 0), true);
        let mag = single(1, (1, 0), false);
        let z0 = medium().z0;
        let grid = SphereGrid::new(2, 1.0).unwrap();
        let (e0, h0) = synthesize(&elec, 0.07, &grid).unwrap();
        let (e1, h1) = synthesize(&mag, 0.07, &grid).unwrap();
        for k in 0..grid.len() {
            // a_M = 1 equals the inverse dual image: (E, H) -> (Z0 H, -E/Z0).
            let de = e1.values()[k] - h0.values()[k] * z0;
            let dh = h1.values()[k] + e0.values()[k] * (1.0 / z0);
            assert!(de.norm() <= 1e-12 * e1.values()[k].norm().max(1e-300));
            assert!(dh.norm() <= 1e-12 * h1.values()[k].norm().max(1e-300));
        }
    }

    #[test]
    fn duality_maps_electric_to_magnetic() {
        let c = single(3, (1, 0), true);
        let d = duality(&c);
        let m = ModeIndex::new(1, 0).unwrap();
        assert_eq!(d.a_e(m), ZERO);
        assert_eq!(d.a_m(m), Complex64::new(-1.0, 0.0));
        assert_eq!(duality(&duality(&c)), -&c);
        let z = CoefficientSet::zeros(3, medium()).unwrap();
        assert_eq!(duality(&z), z);
    }

    #[test]
    fn dipole_far_field_goes_like_sin_theta() {
        let c = single(1, (1, 0), true);
        let dirs: Vec<(f64, f64)> = (1..30).map(|i| (i as f64 * PI / 30.0, 0.4)).collect();
        let p = far_field(&c, &dirs);
        let peak = p.e_theta[14].norm() / (dirs[14].0).sin();
        for (k, &(t, _)) in dirs.iter().enumerate() {
            assert_eq!(p.e_phi[k], ZERO);
            assert_relative_eq!(p.e_theta[k].norm(), peak * t.sin(), max_relative = 1e-13);
        }
    }

    #[test]
    fn far_field_is_finite_at_the_poles() {
        let mut c = CoefficientSet::zeros(4, medium()).unwrap();
        for (j, mode) in modes(4).enumerate() {
            c.set_a_e(mode, Complex64::new(1.0, j as f64)).unwrap();
            c.set_a_m(mode, Complex64::new(-0.5, 0.2)).unwrap();
        }
        let p = far_field(&c, &[(0.0, 0.0), (PI, 1.0)]);
        assert!(p.e_theta.iter().chain(&p.e_phi).all(|v| v.is_finite()));
    }

    #[test]
    fn dipole_power_is_positive_and_matches_modal_sum() {
        let c = single(1, (1, 0), true);
        let grid = SphereGrid::new(2, 1.0).unwrap();
        let p = radiated_power(&c, 0.05, &grid).unwrap();
        assert!(p > 0.0);
        assert_relative_eq!(p, modal_power(&c), max_relative = 1e-12);
    }
}
