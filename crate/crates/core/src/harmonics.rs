//! Vector spherical harmonics, the quadrature sphere grid and projection
//! of sampled fields onto conjugated harmonics.
//!
//! With `Y_lm` the scalar harmonic and `L2 = l(l+1)`:
//!
//! ```text
//! X_lm = (1/sqrt(L2)) (1/i) ( (1/sinθ) ∂Y/∂φ θ̂ - ∂Y/∂θ φ̂ )
//! Z_lm = r̂ × X_lm = (1/sqrt(L2)) (1/i) ( ∂Y/∂θ θ̂ + (1/sinθ) ∂Y/∂φ φ̂ )
//! Y_lm = Y_lm r̂
//! ```
//!
//! All three families are orthonormal over the sphere and mutually
//! orthogonal.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, pairwise_sum};
use crate::specfun::{harmonic_from_table, mode_count, odd_sign, LegendreTable, ModeIndex};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Gauss–Legendre (in cos θ) × uniform-φ product grid on a sphere.
///
/// Node ordering is θ-major, φ-minor, with θ ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    l_max: u32,
    radius: f64,
    thetas: Vec<f64>,
    theta_weights: Vec<f64>,
    phis: Vec<f64>,
}

/// One quadrature node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridNode {
    pub theta: f64,
    pub phi: f64,
    /// Solid-angle weight in steradians.
    pub weight: f64,
}

impl SphereGrid {
    /// Default grid exact for products of harmonics of degree up to `l_max`
    /// each: `l_max + 1` Gauss–Legendre nodes and `2 l_max + 2` φ nodes.
    pub fn new(l_max: u32, radius: f64) -> Result<Self> {
        Self::with_counts(l_max, l_max as usize + 1, 2 * l_max as usize + 2, radius)
    }

    /// Grid with explicit node counts. The counts must support the declared
    /// exactness degree.
    pub fn with_counts(l_max: u32, n_theta: usize, n_phi: usize, radius: f64) -> Result<Self> {
        if l_max < 1 {
            return Err(Error::InvalidParameter("grid l_max must be >= 1".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sphere radius must be positive, got {radius}"
            )));
        }
        if n_theta < l_max as usize + 1 {
            return Err(Error::InvalidParameter(format!(
                "n_theta = {n_theta} cannot integrate degree {l_max}"
            )));
        }
        if n_phi < 2 * l_max as usize + 1 {
            return Err(Error::InvalidParameter(format!(
                "n_phi = {n_phi} cannot integrate degree {l_max}"
            )));
        }
        let (x, w) = gauss_legendre(n_theta);
        let thetas = x.iter().map(|x| x.acos()).collect();
        let phis = (0..n_phi).map(|j| 2.0 * PI * j as f64 / n_phi as f64).collect();
        Ok(Self {
            l_max,
            radius,
            thetas,
            theta_weights: w,
            phis,
        })
    }

    /// Same nodes on a sphere of another radius.
    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sphere radius must be positive, got {radius}"
            )));
        }
        Ok(Self {
            radius,
            ..self.clone()
        })
    }

    /// Declared exactness degree.
    pub fn l_max(&self) -> u32 {
        self.l_max
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn n_theta(&self) -> usize {
        self.thetas.len()
    }

    pub fn n_phi(&self) -> usize {
        self.phis.len()
    }

    pub fn len(&self) -> usize {
        self.thetas.len() * self.phis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn phis(&self) -> &[f64] {
        &self.phis
    }

    pub fn node(&self, index: usize) -> GridNode {
        let n_phi = self.phis.len();
        let (i, j) = (index / n_phi, index % n_phi);
        GridNode {
            theta: self.thetas[i],
            phi: self.phis[j],
            weight: self.theta_weights[i] * 2.0 * PI / n_phi as f64,
        }
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = GridNode> + '_ {
        (0..self.len()).map(move |k| self.node(k))
    }

    pub fn total_weight(&self) -> f64 {
        crate::quadrature::pairwise_sum_real(&self.nodes().map(|n| n.weight).collect::<Vec<_>>())
    }
}

/// A vector with θ̂ and φ̂ components only.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TangentialVector {
    pub theta: Complex64,
    pub phi: Complex64,
}

impl TangentialVector {
    pub fn new(theta: Complex64, phi: Complex64) -> Self {
        Self { theta, phi }
    }

    /// Radial component, zero by construction.
    pub fn r(&self) -> Complex64 {
        ZERO
    }

    /// `r̂ × self`: θ̂ → φ̂, φ̂ → -θ̂.
    pub fn rotate(&self) -> Self {
        Self {
            theta: -self.phi,
            phi: self.theta,
        }
    }

    pub fn to_vector(&self) -> SphVector {
        SphVector::new(ZERO, self.theta, self.phi)
    }
}

/// Complex 3-vector in the local spherical basis (r̂, θ̂, φ̂).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SphVector {
    pub r: Complex64,
    pub theta: Complex64,
    pub phi: Complex64,
}

impl SphVector {
    pub const ZERO: SphVector = SphVector {
        r: ZERO,
        theta: ZERO,
        phi: ZERO,
    };

    pub fn new(r: Complex64, theta: Complex64, phi: Complex64) -> Self {
        Self { r, theta, phi }
    }

    pub fn is_finite(&self) -> bool {
        self.r.is_finite() && self.theta.is_finite() && self.phi.is_finite()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.r.norm_sqr() + self.theta.norm_sqr() + self.phi.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn tangential(&self) -> TangentialVector {
        TangentialVector::new(self.theta, self.phi)
    }

    /// `r̂ · (self × conj(other))`.
    pub fn radial_cross_conj(&self, other: &SphVector) -> Complex64 {
        self.theta * other.phi.conj() - self.phi * other.theta.conj()
    }
}

impl Add for SphVector {
    type Output = SphVector;
    fn add(self, o: SphVector) -> SphVector {
        SphVector::new(self.r + o.r, self.theta + o.theta, self.phi + o.phi)
    }
}

impl Sub for SphVector {
    type Output = SphVector;
    fn sub(self, o: SphVector) -> SphVector {
        SphVector::new(self.r - o.r, self.theta - o.theta, self.phi - o.phi)
    }
}

impl Mul<Complex64> for SphVector {
    type Output = SphVector;
    fn mul(self, s: Complex64) -> SphVector {
        SphVector::new(self.r * s, self.theta * s, self.phi * s)
    }
}

impl Mul<f64> for SphVector {
    type Output = SphVector;
    fn mul(self, s: f64) -> SphVector {
        SphVector::new(self.r * s, self.theta * s, self.phi * s)
    }
}

/// Which physical field a set of samples holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    /// Electric field, V/m.
    Electric,
    /// Magnetic field H, A/m.
    Magnetic,
}

/// Field values at every node of a grid, in grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSamples {
    grid: Arc<SphereGrid>,
    kind: FieldKind,
    values: Vec<SphVector>,
}

impl FieldSamples {
    pub fn new(grid: Arc<SphereGrid>, kind: FieldKind, values: Vec<SphVector>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Samples(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Samples(format!("non-finite value at node {k}")));
        }
        Ok(Self { grid, kind, values })
    }

    pub fn zeros(grid: Arc<SphereGrid>, kind: FieldKind) -> Self {
        let values = vec![SphVector::ZERO; grid.len()];
        Self { grid, kind, values }
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn values(&self) -> &[SphVector] {
        &self.values
    }

    pub fn into_values(self) -> Vec<SphVector> {
        self.values
    }

    /// Applies `f` to every sample, keeping grid and kind.
    pub fn map(&self, mut f: impl FnMut(usize, &SphVector) -> SphVector) -> Result<Self> {
        let values = self.values.iter().enumerate().map(|(k, v)| f(k, v)).collect();
        Self::new(self.grid.clone(), self.kind, values)
    }

    /// `a·self + b·other` on the same grid.
    pub fn combine(&self, a: Complex64, other: &FieldSamples, b: Complex64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::Samples("samples live on different grids".into()));
        }
        self.map(|k, v| *v * a + other.values[k] * b)
    }
}

/// `X_lm`, `Z_lm` and `Y_lm` for every mode `1 ≤ l ≤ l_max` at one point,
/// densely indexed by [`ModeIndex::dense_index`].
#[derive(Debug, Clone)]
pub struct VectorHarmonics {
    pub y: Vec<Complex64>,
    pub x: Vec<TangentialVector>,
    pub z: Vec<TangentialVector>,
}

impl VectorHarmonics {
    pub fn new(l_max: u32, theta: f64, phi: f64) -> Self {
        let table = LegendreTable::new(l_max as usize, theta);
        let n = mode_count(l_max);
        let mut y = vec![ZERO; n];
        let mut x = vec![TangentialVector::default(); n];
        let mut z = vec![TangentialVector::default(); n];
        let i = Complex64::i();
        for l in 1..=l_max as usize {
            let inv_norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
            for ma in 0..=l {
                let phase = Complex64::from_polar(1.0, ma as f64 * phi);
                // m/sinθ · P̄ and dP̄/dθ for the non-negative order.
                let m_over_sin = if ma == 0 {
                    0.0
                } else {
                    ma as f64 * table.p_over_sin(l, ma)
                };
                let dp = table.dp_dtheta(l, ma);
                let x_pos = TangentialVector::new(
                    phase * (m_over_sin * inv_norm),
                    i * phase * (dp * inv_norm),
                );
                let y_pos = phase * table.p(l, ma);
                store(l, ma as i32, y_pos, x_pos, &mut y, &mut x, &mut z);
                if ma > 0 {
                    // Y_{l,-m} = (-1)^m conj(Y_lm); X and Z follow from the same
                    // operator applied to the conjugate-symmetric pair.
                    let s = odd_sign(ma);
                    let y_neg = s * y_pos.conj();
                    let x_neg = TangentialVector::new(
                        -s * (phase.conj() * (m_over_sin * inv_norm)),
                        s * i * phase.conj() * (dp * inv_norm),
                    );
                    store(l, -(ma as i32), y_neg, x_neg, &mut y, &mut x, &mut z);
                }
            }
        }
        Self { y, x, z }
    }
}

fn store(
    l: usize,
    m: i32,
    yv: Complex64,
    xv: TangentialVector,
    y: &mut [Complex64],
    x: &mut [TangentialVector],
    z: &mut [TangentialVector],
) {
    let idx = (l * l + l) as isize - 1 + m as isize;
    let idx = idx as usize;
    y[idx] = yv;
    x[idx] = xv;
    z[idx] = xv.rotate();
}

fn single_mode(mode: ModeIndex, theta: f64, phi: f64) -> (Complex64, TangentialVector) {
    let l = mode.l() as usize;
    let m = mode.m();
    let ma = m.unsigned_abs() as usize;
    let table = LegendreTable::new(l, theta);
    let inv_norm = 1.0 / mode.ang_norm();
    let y = harmonic_from_table(&table, l, m, phi);
    // Signed-order Legendre values: P̄_l^{-m} = (-1)^m P̄_l^m.
    let sign = if m < 0 { odd_sign(ma) } else { 1.0 };
    let m_over_sin = if ma == 0 {
        0.0
    } else {
        m as f64 * sign * table.p_over_sin(l, ma)
    };
    let dp = sign * table.dp_dtheta(l, ma);
    let phase = Complex64::from_polar(1.0, m as f64 * phi);
    let x = TangentialVector::new(
        phase * (m_over_sin * inv_norm),
        Complex64::i() * phase * (dp * inv_norm),
    );
    (y, x)
}

/// `X_lm(θ, φ)`.
pub fn vec_x(mode: ModeIndex, theta: f64, phi: f64) -> TangentialVector {
    single_mode(mode, theta, phi).1
}

/// `Z_lm(θ, φ) = r̂ × X_lm(θ, φ)`.
pub fn vec_z(mode: ModeIndex, theta: f64, phi: f64) -> TangentialVector {
    single_mode(mode, theta, phi).1.rotate()
}

/// `Y_lm(θ, φ) r̂`.
pub fn vec_y(mode: ModeIndex, theta: f64, phi: f64) -> SphVector {
    SphVector::new(single_mode(mode, theta, phi).0, ZERO, ZERO)
}

/// Harmonic family to project onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProjectionKind {
    X,
    Z,
    /// `Y_lm r̂`: only the radial sample component contributes.
    Yr,
}

/// How per-node work is scheduled. Both produce bit-identical results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

#[inline]
fn conj_dot(kind: ProjectionKind, y: Complex64, x: &TangentialVector, f: &SphVector) -> Complex64 {
    match kind {
        ProjectionKind::Yr => y.conj() * f.r,
        ProjectionKind::X => x.theta.conj() * f.theta + x.phi.conj() * f.phi,
        ProjectionKind::Z => {
            let z = x.rotate();
            z.theta.conj() * f.theta + z.phi.conj() * f.phi
        }
    }
}

fn check_degree(samples: &FieldSamples, l: u32) -> Result<()> {
    let grid = samples.grid.l_max();
    if l > grid {
        return Err(Error::GridTooCoarse {
            required: l as usize,
            grid: grid as usize,
        });
    }
    Ok(())
}

/// Quadrature of `∫ conj(V_lm) · F dΩ` for `V ∈ {X_lm, Z_lm, Y_lm r̂}`.
///
/// The grid must be exact for the sampled field's band limit; a mode above
/// the grid's exactness degree is rejected with [`Error::GridTooCoarse`].
pub fn project(samples: &FieldSamples, kind: ProjectionKind, mode: ModeIndex) -> Result<Complex64> {
    project_with(samples, kind, mode, Execution::Parallel)
}

pub fn project_with(
    samples: &FieldSamples,
    kind: ProjectionKind,
    mode: ModeIndex,
    exec: Execution,
) -> Result<Complex64> {
    check_degree(samples, mode.l())?;
    let grid = &samples.grid;
    let term = |k: usize| {
        let node = grid.node(k);
        let (y, x) = single_mode(mode, node.theta, node.phi);
        conj_dot(kind, y, &x, &samples.values[k]) * node.weight
    };
    let terms: Vec<Complex64> = match exec {
        Execution::Sequential => (0..grid.len()).map(term).collect(),
        Execution::Parallel => (0..grid.len()).into_par_iter().map(term).collect(),
    };
    Ok(pairwise_sum(&terms))
}

/// Projections onto every mode `1 ≤ l ≤ l_max` at once, densely indexed.
pub fn project_all(
    samples: &FieldSamples,
    kind: ProjectionKind,
    l_max: u32,
) -> Result<Vec<Complex64>> {
    check_degree(samples, l_max)?;
    let grid = &samples.grid;
    let n_modes = mode_count(l_max);
    let per_node: Vec<Vec<Complex64>> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let node = grid.node(k);
            let vh = VectorHarmonics::new(l_max, node.theta, node.phi);
            let f = &samples.values[k];
            (0..n_modes)
                .map(|j| conj_dot(kind, vh.y[j], &vh.x[j], f) * node.weight)
                .collect()
        })
        .collect();
    let mut column = vec![ZERO; grid.len()];
    Ok((0..n_modes)
        .map(|j| {
            for (c, row) in column.iter_mut().zip(&per_node) {
                *c = row[j];
            }
            pairwise_sum(&column)
        })
        .collect())
}
