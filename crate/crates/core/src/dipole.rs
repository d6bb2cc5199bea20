//! Half-wave dipole validation harness.
//!
//! The sinusoidal-current half-wave dipole is represented by its three
//! leading electric multipoles. The harness samples the radial fields on
//! the λ/4 sphere, recovers the coefficients from that radial data alone
//! and compares the resulting far field with the one computed directly
//! from the coefficients. All comparisons use peak-normalized patterns, so
//! the absolute amplitude convention of `a_E(1,0)` does not matter.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::extraction::extract_radial;
use crate::harmonics::{FieldSamples, SphVector, SphereGrid};
use crate::multipole::{
    duality, far_field, synthesize, CoefficientSet, FarFieldPattern, Medium, SPEED_OF_LIGHT,
};
use crate::specfun::ModeIndex;

/// `a_E(3,0) / a_E(1,0)`.
pub const RATIO_L3: f64 = 49.5e-3;
/// `a_E(5,0) / a_E(1,0)`.
pub const RATIO_L5: f64 = 1.02e-3;
/// Truncation degree of the dipole expansion.
pub const DIPOLE_L_MAX: u32 = 5;

/// Feed current amplitude and wavelength of a half-wave dipole in vacuum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleSpec {
    /// Amperes. Zero is accepted and yields an empty coefficient set.
    pub current: f64,
    /// Metres.
    pub wavelength: f64,
}

impl DipoleSpec {
    pub fn new(current: f64, wavelength: f64) -> Result<Self> {
        if !(current >= 0.0 && current.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "current must be non-negative, got {current}"
            )));
        }
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        Ok(Self { current, wavelength })
    }

    pub fn from_frequency(current: f64, frequency_hz: f64) -> Result<Self> {
        if !(frequency_hz > 0.0 && frequency_hz.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "frequency must be positive, got {frequency_hz}"
            )));
        }
        Self::new(current, SPEED_OF_LIGHT / frequency_hz)
    }

    pub fn frequency(&self) -> f64 {
        SPEED_OF_LIGHT / self.wavelength
    }

    pub fn medium(&self) -> Medium {
        Medium::vacuum(self.frequency()).expect("validated wavelength")
    }

    /// λ/4, the radius of the sampling sphere.
    pub fn sphere_radius(&self) -> f64 {
        self.wavelength / 4.0
    }
}

/// Electric multipoles of the half-wave dipole: `a_E(1,0) = sqrt(6/π) I/(λ/2)`,
/// `a_E(3,0) = 0.0495 a_E(1,0)`, `a_E(5,0) = 0.00102 a_E(1,0)`.
pub fn halfwave_coeffs(spec: &DipoleSpec) -> CoefficientSet {
    let mut c = CoefficientSet::zeros(DIPOLE_L_MAX, spec.medium()).expect("l_max >= 1");
    let a1 = (6.0 / PI).sqrt() * spec.current / (spec.wavelength / 2.0);
    for (l, ratio) in [(1, 1.0), (3, RATIO_L3), (5, RATIO_L5)] {
        let mode = ModeIndex::new(l, 0).expect("valid mode");
        c.set_a_e(mode, Complex64::new(a1 * ratio, 0.0)).expect("within l_max");
    }
    c
}

fn check_dipole_grid(spec: &DipoleSpec, grid: &SphereGrid) -> Result<()> {
    let r0 = spec.sphere_radius();
    if (grid.radius() - r0).abs() > 1e-12 * r0 {
        return Err(Error::InvalidParameter(format!(
            "dipole grid must sit on the lambda/4 sphere (r0 = {r0}), got {}",
            grid.radius()
        )));
    }
    if grid.l_max() < DIPOLE_L_MAX {
        return Err(Error::GridTooCoarse {
            required: DIPOLE_L_MAX as usize,
            grid: grid.l_max() as usize,
        });
    }
    Ok(())
}

/// `E_r` on the λ/4 sphere; tangential components are left at zero.
pub fn radial_source_on_sphere(spec: &DipoleSpec, grid: &SphereGrid) -> Result<FieldSamples> {
    check_dipole_grid(spec, grid)?;
    let (e, _) = synthesize(&halfwave_coeffs(spec), grid.radius(), grid)?;
    e.map(|_, v| SphVector::new(v.r, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)))
}

/// Interior observation colatitudes, 1°…179° at φ = 0.
pub fn pattern_directions() -> Vec<(f64, f64)> {
    (1..180).map(|i| (i as f64 * PI / 180.0, 0.0)).collect()
}

fn normalized(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let v: Vec<f64> = values.collect();
    let peak = v.iter().cloned().fold(0.0, f64::max);
    v.iter().map(|x| x / peak).collect()
}

fn rms_relative(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = a.iter().map(|x| x * x).sum();
    (num / den).sqrt()
}

/// Far field from coefficients versus far field from radial-only samples.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundtripComparison {
    pub direct: FarFieldPattern,
    pub recovered: FarFieldPattern,
    /// Coefficients recovered from the radial samples.
    pub recovered_coeffs: CoefficientSet,
    /// Peak-normalized `|E_θ|` of each pattern.
    pub direct_normalized: Vec<f64>,
    pub recovered_normalized: Vec<f64>,
    /// RMS of the normalized difference divided by RMS of the direct pattern.
    pub rms_deviation: f64,
    /// Largest `|E_φ|` relative to the peak `|E_θ|`, over both patterns.
    pub e_phi_relative: f64,
    pub e_phi_negligible: bool,
    /// Colatitude of the direct pattern maximum.
    pub peak_theta: f64,
}

/// `|E_φ| / peak |E_θ|` threshold for declaring the cross-polar part absent.
pub const E_PHI_NEGLIGIBLE: f64 = 1e-12;

/// Runs the comparison on the default grid of exactness degree 5 at λ/4.
pub fn validate_roundtrip(spec: &DipoleSpec) -> Result<RoundtripComparison> {
    let grid = SphereGrid::new(DIPOLE_L_MAX, spec.sphere_radius())?;
    validate_roundtrip_on(spec, &grid)
}

/// Same as [`validate_roundtrip`] on a caller-supplied λ/4 grid.
pub fn validate_roundtrip_on(spec: &DipoleSpec, grid: &SphereGrid) -> Result<RoundtripComparison> {
    check_dipole_grid(spec, grid)?;
    if spec.current == 0.0 {
        return Err(Error::InvalidParameter(
            "a zero-current dipole has no pattern to normalize".into(),
        ));
    }
    let coeffs = halfwave_coeffs(spec);
    let (e, h) = synthesize(&coeffs, grid.radius(), grid)?;
    let recovered = extract_radial(&e, &h, coeffs.medium(), DIPOLE_L_MAX)?.coeffs;

    let dirs = pattern_directions();
    let direct = far_field(&coeffs, &dirs);
    let from_radial = far_field(&recovered, &dirs);

    let direct_normalized = normalized(direct.e_theta.iter().map(|c| c.norm()));
    let recovered_normalized = normalized(from_radial.e_theta.iter().map(|c| c.norm()));
    let rms_deviation = rms_relative(&direct_normalized, &recovered_normalized);

    let e_phi_relative = [&direct, &from_radial]
        .iter()
        .map(|p| {
            let peak = p.e_theta.iter().map(|c| c.norm()).fold(0.0, f64::max);
            p.e_phi.iter().map(|c| c.norm()).fold(0.0, f64::max) / peak
        })
        .fold(0.0, f64::max);

    let peak_idx = direct_normalized
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);

    Ok(RoundtripComparison {
        peak_theta: dirs[peak_idx].0,
        direct,
        recovered: from_radial,
        recovered_coeffs: recovered,
        direct_normalized,
        recovered_normalized,
        rms_deviation,
        e_phi_relative,
        e_phi_negligible: e_phi_relative <= E_PHI_NEGLIGIBLE,
    })
}

/// Electric dipole versus its magnetic dual.
#[derive(Debug, Clone, PartialEq)]
pub struct DualComparison {
    pub dual_coeffs: CoefficientSet,
    /// `max |H_r(dual) - E_r(orig)/Z0| / max |E_r(orig)/Z0|` on the λ/4 grid.
    pub radial_deviation: f64,
    /// `H_r` of the dual on the λ/4 grid (radial component only).
    pub dual_radial_source: FieldSamples,
    pub original_pattern: FarFieldPattern,
    pub dual_pattern: FarFieldPattern,
    /// `max |E_θ(dual)|` relative to the dual peak `|E_φ|`.
    pub dual_e_theta_relative: f64,
    /// `max | |E_φ(dual)| - |E_θ(orig)| |` over the peak, both normalized.
    pub pattern_deviation: f64,
    /// `max |F(dual(dual(c))) + F(c)| / max |F(c)|` over E and H samples:
    /// the dual map applied twice negates the fields.
    pub double_dual_residual: f64,
}

pub fn magnetic_dipole_variant(spec: &DipoleSpec) -> Result<DualComparison> {
    let grid = SphereGrid::new(DIPOLE_L_MAX, spec.sphere_radius())?;
    if spec.current == 0.0 {
        return Err(Error::InvalidParameter(
            "a zero-current dipole has no pattern to normalize".into(),
        ));
    }
    let coeffs = halfwave_coeffs(spec);
    let dual = duality(&coeffs);
    let z0 = coeffs.medium().z0;
    let r0 = grid.radius();

    let (e0, h0) = synthesize(&coeffs, r0, &grid)?;
    let (_, h1) = synthesize(&dual, r0, &grid)?;

    let scale = e0.values().iter().map(|v| v.r.norm() / z0).fold(0.0, f64::max);
    let radial_deviation = e0
        .values()
        .iter()
        .zip(h1.values())
        .map(|(e, h)| (h.r - e.r / z0).norm())
        .fold(0.0, f64::max)
        / scale;

    let dual_radial_source = h1.map(|_, v| {
        SphVector::new(v.r, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    })?;

    let (e2, h2) = synthesize(&duality(&dual), r0, &grid)?;
    let field_scale = e0
        .values()
        .iter()
        .chain(h0.values())
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    let double_dual_residual = e0
        .values()
        .iter()
        .zip(e2.values())
        .chain(h0.values().iter().zip(h2.values()))
        .map(|(a, b)| (*a + *b).norm())
        .fold(0.0, f64::max)
        / field_scale;

    let dirs = pattern_directions();
    let original_pattern = far_field(&coeffs, &dirs);
    let dual_pattern = far_field(&dual, &dirs);
    let orig_peak = original_pattern.e_theta.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let dual_peak = dual_pattern.e_phi.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let dual_e_theta_relative =
        dual_pattern.e_theta.iter().map(|c| c.norm()).fold(0.0, f64::max) / dual_peak;
    let pattern_deviation = original_pattern
        .e_theta
        .iter()
        .zip(&dual_pattern.e_phi)
        .map(|(a, b)| (a.norm() / orig_peak - b.norm() / dual_peak).abs())
        .fold(0.0, f64::max);

    Ok(DualComparison {
        dual_coeffs: dual,
        radial_deviation,
        dual_radial_source,
        original_pattern,
        dual_pattern,
        dual_e_theta_relative,
        pattern_deviation,
        double_dual_residual,
    })
}

/// Shared grid handle on the λ/4 sphere, for callers that need the
/// sampling geometry (e.g. to write the source data).
pub fn dipole_grid(spec: &DipoleSpec) -> Result<Arc<SphereGrid>> {
    Ok(Arc::new(SphereGrid::new(DIPOLE_L_MAX, spec.sphere_radius())?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> DipoleSpec {
        DipoleSpec::from_frequency(1.0, 1.0e9).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(DipoleSpec::new(-1.0, 1.0).is_err());
        assert!(DipoleSpec::new(1.0, 0.0).is_err());
        assert!(DipoleSpec::from_frequency(1.0, -5.0).is_err());
    }

    #[test]
    fn coefficient_ratios_are_stored_exactly() {
        let c = halfwave_coeffs(&spec());
        let a1 = c.a_e(ModeIndex::new(1, 0).unwrap());
        let a3 = c.a_e(ModeIndex::new(3, 0).unwrap());
        let a5 = c.a_e(ModeIndex::new(5, 0).unwrap());
        assert_eq!(a3.re, a1.re * 0.0495);
        assert_eq!(a5.re, a1.re * 0.00102);
        assert!(((a3 / a1).re - 0.0495).abs() < 1e-16);
        assert!(((a5 / a1).re - 0.00102).abs() < 1e-17);
        assert_eq!(a1.re, (6.0 / PI).sqrt() / (spec().wavelength / 2.0));
    }

    #[test]
    fn only_odd_axial_electric_modes() {
        let c = halfwave_coeffs(&spec());
        for (mode, ae, am) in c.iter() {
            assert_eq!(am, Complex64::new(0.0, 0.0));
            let nonzero = mode.m() == 0 && mode.l() % 2 == 1;
            assert_eq!(ae != Complex64::new(0.0, 0.0), nonzero, "{mode}");
        }
    }

    #[test]
    fn zero_current_gives_zero_set() {
        let s = DipoleSpec::new(0.0, 0.3).unwrap();
        assert_eq!(halfwave_coeffs(&s).max_abs(), 0.0);
        assert!(validate_roundtrip(&s).is_err());
    }

    #[test]
    fn radial_source_requires_quarter_wave_sphere() {
        let s = spec();
        let wrong = SphereGrid::new(5, s.wavelength).unwrap();
        assert!(radial_source_on_sphere(&s, &wrong).is_err());
        let coarse = SphereGrid::new(4, s.sphere_radius()).unwrap();
        assert!(radial_source_on_sphere(&s, &coarse).is_err());
    }

    #[test]
    fn radial_source_symmetries() {
        let s = spec();
        let grid = SphereGrid::new(5, s.sphere_radius()).unwrap();
        let src = radial_source_on_sphere(&s, &grid).unwrap();
        let (nt, np) = (grid.n_theta(), grid.n_phi());
        let v = src.values();
        let peak = v.iter().map(|x| x.r.norm()).fold(0.0, f64::max);
        for i in 0..nt {
            for j in 0..np {
                let a = v[i * np + j];
                assert!((a.r - v[i * np].r).norm() <= 1e-14 * peak);
                assert_eq!(a.theta, Complex64::new(0.0, 0.0));
                // Gauss-Legendre nodes are symmetric about the equator.
                let b = v[(nt - 1 - i) * np + j];
                assert!((a.r + b.r).norm() <= 1e-13 * peak);
            }
        }
    }

    #[test]
    fn radial_source_mixes_real_and_imaginary_parts() {
        let s = spec();
        let (e, _) = crate::multipole::field_at(
            &halfwave_coeffs(&s),
            s.sphere_radius(),
            PI / 4.0,
            0.0,
        )
        .unwrap();
        assert!(e.r.re.abs() > 1e-3 * e.r.norm());
        assert!(e.r.im.abs() > 1e-3 * e.r.norm());
    }
}
