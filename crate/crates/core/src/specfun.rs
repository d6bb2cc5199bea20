//! Scalar special functions.
//!
//! Conventions used throughout the crate:
//!
//! * Time dependence `e^{-iωt}`; outgoing radial waves are carried by the
//!   spherical Hankel function of the first kind `h_l^(1) = j_l + i y_l`.
//! * Associated Legendre functions include the Condon–Shortley phase
//!   `(-1)^m`, so `P_1^1(cos θ) = -sin θ`. This flips the sign of every
//!   odd-`m` harmonic relative to the geodesy convention.
//! * Spherical harmonics are orthonormal over the unit sphere:
//!   `Y_lm = N_lm P_l^m(cos θ) e^{imφ}`,
//!   `N_lm = sqrt((2l+1)/(4π) (l-m)!/(l+m)!)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// One multipole mode: degree `l ≥ 1`, order `|m| ≤ l`.
///
/// `l = 0` is rejected because the corresponding vector harmonic vanishes
/// identically and its coefficient carries no field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeIndex {
    l: u32,
    m: i32,
}

impl ModeIndex {
    pub fn new(l: u32, m: i32) -> Result<Self> {
        if l == 0 {
            return Err(Error::InvalidMode {
                l: 0,
                m: m as i64,
                reason: "l = 0 carries no field",
            });
        }
        if m.unsigned_abs() > l {
            return Err(Error::InvalidMode {
                l: l as i64,
                m: m as i64,
                reason: "|m| must not exceed l",
            });
        }
        Ok(Self { l, m })
    }

    #[inline]
    pub fn l(&self) -> u32 {
        self.l
    }

    #[inline]
    pub fn m(&self) -> i32 {
        self.m
    }

    /// Dense position in the canonical ordering (l ascending, then m
    /// ascending), starting at 0 for (1, -1).
    #[inline]
    pub fn dense_index(&self) -> usize {
        let l = self.l as isize;
        (l * l + l - 1 + self.m as isize) as usize
    }

    /// Inverse of [`ModeIndex::dense_index`].
    pub fn from_dense_index(index: usize) -> Self {
        // l^2 - 1 <= index < (l+1)^2 - 1
        let mut l = ((index + 1) as f64).sqrt() as u32;
        while ((l + 1) * (l + 1)) as usize <= index + 1 {
            l += 1;
        }
        while (l * l) as usize > index + 1 {
            l -= 1;
        }
        let m = index as i64 + 1 - (l as i64 * l as i64 + l as i64);
        Self { l, m: m as i32 }
    }

    /// `sqrt(l(l+1))`.
    #[inline]
    pub fn ang_norm(&self) -> f64 {
        let l = self.l as f64;
        (l * (l + 1.0)).sqrt()
    }
}

impl std::fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.l, self.m)
    }
}

/// Number of modes with `1 ≤ l ≤ l_max`.
#[inline]
pub fn mode_count(l_max: u32) -> usize {
    let n = l_max as usize + 1;
    n * n - 1
}

/// All modes up to `l_max` in canonical order.
pub fn modes(l_max: u32) -> impl Iterator<Item = ModeIndex> {
    (1..=l_max).flat_map(|l| (-(l as i32)..=l as i32).map(move |m| ModeIndex { l, m }))
}

/// Fully normalized associated Legendre functions at one point, for all
/// `0 ≤ m ≤ l ≤ l_max`, together with the pole-safe quotient
/// `P̄_l^m / sin θ` (m ≥ 1) and the θ-derivative `dP̄_l^m/dθ`.
///
/// The normalization is folded into the recurrence so that no factorials
/// are ever formed.
#[derive(Debug, Clone)]
pub struct LegendreTable {
    l_max: usize,
    p: Vec<f64>,
    p_over_sin: Vec<f64>,
    dp_dtheta: Vec<f64>,
}

#[inline]
fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

impl LegendreTable {
    /// Builds the table at colatitude `theta`.
    pub fn new(l_max: usize, theta: f64) -> Self {
        Self::from_cos_sin(l_max, theta.cos(), theta.sin())
    }

    /// Builds the table from `x = cos θ` and `s = sin θ ≥ 0`.
    pub fn from_cos_sin(l_max: usize, x: f64, s: f64) -> Self {
        let len = tri(l_max, l_max) + 1;
        let mut p = vec![0.0; len];
        let mut q = vec![0.0; len];

        // m = 0 column.
        p[0] = 1.0 / (4.0 * PI).sqrt();
        if l_max >= 1 {
            p[tri(1, 0)] = 3f64.sqrt() * x * p[0];
        }
        for l in 2..=l_max {
            let (a, b) = recurrence_coeffs(l, 0);
            p[tri(l, 0)] = a * (x * p[tri(l - 1, 0)] - b * p[tri(l - 2, 0)]);
        }

        // m >= 1 columns, carried as P̄/sinθ then scaled.
        for m in 1..=l_max {
            let mf = m as f64;
            let seed_prev = if m == 1 { p[0] } else { s * q[tri(m - 1, m - 1)] };
            q[tri(m, m)] = -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * seed_prev;
            if m < l_max {
                q[tri(m + 1, m)] = (2.0 * mf + 3.0).sqrt() * x * q[tri(m, m)];
            }
            for l in (m + 2)..=l_max {
                let (a, b) = recurrence_coeffs(l, m);
                q[tri(l, m)] = a * (x * q[tri(l - 1, m)] - b * q[tri(l - 2, m)]);
            }
            for l in m..=l_max {
                p[tri(l, m)] = s * q[tri(l, m)];
            }
        }

        // dP̄_l^m/dθ from adjacent orders (ladder relation).
        let mut dp = vec![0.0; len];
        for l in 1..=l_max {
            let lf = l as f64;
            for m in 0..=l {
                let mf = m as f64;
                let up = if m < l {
                    ((lf - mf) * (lf + mf + 1.0)).sqrt() * p[tri(l, m + 1)]
                } else {
                    0.0
                };
                let down = if m == 0 {
                    // P̄_l^{-1} = -P̄_l^1
                    -(lf * (lf + 1.0)).sqrt() * p[tri(l, 1)]
                } else {
                    ((lf + mf) * (lf - mf + 1.0)).sqrt() * p[tri(l, m - 1)]
                };
                dp[tri(l, m)] = 0.5 * (up - down);
            }
        }

        Self {
            l_max,
            p,
            p_over_sin: q,
            dp_dtheta: dp,
        }
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    /// `P̄_l^m(cos θ)` for `0 ≤ m ≤ l`.
    #[inline]
    pub fn p(&self, l: usize, m: usize) -> f64 {
        self.p[tri(l, m)]
    }

    /// `P̄_l^m(cos θ) / sin θ` for `1 ≤ m ≤ l`, finite at the poles.
    #[inline]
    pub fn p_over_sin(&self, l: usize, m: usize) -> f64 {
        debug_assert!(m >= 1);
        self.p_over_sin[tri(l, m)]
    }

    /// `dP̄_l^m(cos θ) / dθ` for `0 ≤ m ≤ l`.
    #[inline]
    pub fn dp_dtheta(&self, l: usize, m: usize) -> f64 {
        self.dp_dtheta[tri(l, m)]
    }
}

#[inline]
fn recurrence_coeffs(l: usize, m: usize) -> (f64, f64) {
    let lf = l as f64;
    let mf = m as f64;
    let l1 = lf - 1.0;
    let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
    let b = ((l1 * l1 - mf * mf) / (4.0 * l1 * l1 - 1.0)).sqrt();
    (a, b)
}

/// Fully normalized associated Legendre function `N_lm P_l^m(x)` with the
/// Condon–Shortley phase, for `0 ≤ m ≤ l` and `|x| ≤ 1`.
pub fn assoc_legendre_norm(l: u32, m: u32, x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("|x| must be <= 1, got {x}")));
    }
    if m > l {
        return Err(Error::Domain(format!("order m={m} exceeds degree l={l}")));
    }
    let s = ((1.0 - x) * (1.0 + x)).sqrt();
    let table = LegendreTable::from_cos_sin(l as usize, x, s);
    Ok(table.p(l as usize, m as usize))
}

/// Scalar spherical harmonic `Y_lm(θ, φ)`.
///
/// Negative orders are built as `(-1)^m conj(Y_{l,|m|})`.
pub fn sph_harmonic(l: u32, m: i32, theta: f64, phi: f64) -> Result<Complex64> {
    if m.unsigned_abs() > l {
        return Err(Error::Domain(format!("|m|={} exceeds l={l}", m.unsigned_abs())));
    }
    let table = LegendreTable::new(l as usize, theta);
    Ok(harmonic_from_table(&table, l as usize, m, phi))
}

pub(crate) fn harmonic_from_table(table: &LegendreTable, l: usize, m: i32, phi: f64) -> Complex64 {
    let ma = m.unsigned_abs() as usize;
    let pos = Complex64::from_polar(1.0, ma as f64 * phi) * table.p(l, ma);
    if m >= 0 {
        pos
    } else {
        odd_sign(ma) * pos.conj()
    }
}

#[inline]
pub(crate) fn odd_sign(m: usize) -> f64 {
    if m % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn check_positive(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("argument must be positive and finite, got {x}")))
    }
}

/// `j_0(x) … j_{l_max}(x)`.
///
/// Upward recurrence while `l_max ≤ x`; otherwise Miller's downward
/// recurrence normalized against the closed form of `j_0` or `j_1`,
/// whichever is larger. Upward recurrence is unstable for `j_l` once
/// `l > x` and would keep only absolute accuracy.
pub fn sph_bessel_j_seq(l_max: u32, x: f64) -> Result<Vec<f64>> {
    check_positive(x)?;
    let n = l_max as usize;
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let j1 = s / (x * x) - c / x;
    if (n as f64) <= x || n <= 1 {
        let mut out = Vec::with_capacity(n + 1);
        out.push(j0);
        if n >= 1 {
            out.push(j1);
        }
        for l in 1..n {
            out.push((2 * l + 1) as f64 / x * out[l] - out[l - 1]);
        }
        return Ok(out);
    }

    let start = n + 20 + (40.0 * n as f64).sqrt() as usize;
    let mut out = vec![0.0; n + 1];
    let mut next = 0.0;
    let mut cur = 1e-300;
    for l in (1..=start).rev() {
        // cur = j_l, next = j_{l+1} (unnormalized)
        let prev = (2 * l + 1) as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if l - 1 <= n {
            out[l - 1] = cur;
        }
        if cur.abs() > 1e250 {
            next *= 1e-250;
            cur *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let scale = if j0.abs() >= j1.abs() { j0 / out[0] } else { j1 / out[1] };
    for v in out.iter_mut() {
        *v *= scale;
    }
    Ok(out)
}

/// `y_0(x) … y_{l_max}(x)` by upward recurrence, stable for all orders.
pub fn sph_bessel_y_seq(l_max: u32, x: f64) -> Result<Vec<f64>> {
    check_positive(x)?;
    let n = l_max as usize;
    let (s, c) = x.sin_cos();
    let mut out = Vec::with_capacity(n + 1);
    out.push(-c / x);
    if n >= 1 {
        out.push(-c / (x * x) - s / x);
    }
    for l in 1..n {
        out.push((2 * l + 1) as f64 / x * out[l] - out[l - 1]);
    }
    Ok(out)
}

/// `h_0^(1)(x) … h_{l_max}^(1)(x)`, with `y_l` from upward recurrence
/// seeded by the closed forms and `j_l` from [`sph_bessel_j_seq`].
pub fn sph_hankel1_seq(l_max: u32, x: f64) -> Result<Vec<Complex64>> {
    let j = sph_bessel_j_seq(l_max, x)?;
    let y = sph_bessel_y_seq(l_max, x)?;
    Ok(j.into_iter().zip(y).map(|(j, y)| Complex64::new(j, y)).collect())
}

/// Spherical Hankel function of the first kind, `h_l^(1)(x) = j_l(x) + i y_l(x)`.
pub fn sph_hankel1(l: u32, x: f64) -> Result<Complex64> {
    Ok(sph_hankel1_seq(l, x)?[l as usize])
}

/// Riccati–Hankel derivative `d/dx [x h_l^(1)(x)] = x h_{l-1}^(1)(x) - l h_l^(1)(x)`.
///
/// Dimensionless; the radial derivative `∂/∂r [r h_l(kr)]` has the same value.
pub fn riccati_h1_deriv(l: u32, x: f64) -> Result<Complex64> {
    if l < 1 {
        return Err(Error::Domain("Riccati-Hankel derivative requires l >= 1".into()));
    }
    let h = sph_hankel1_seq(l, x)?;
    Ok(riccati_from_seq(&h, l as usize, x))
}

#[inline]
pub(crate) fn riccati_from_seq(h: &[Complex64], l: usize, x: f64) -> Complex64 {
    x * h[l - 1] - l as f64 * h[l]
}

/// Hankel values `h_l(x)` and Riccati derivatives `D_l(x)` for `1 ≤ l ≤ l_max`,
/// indexed by `l` (index 0 holds `h_0` and a zero derivative).
#[derive(Debug, Clone)]
pub struct RadialFactors {
    pub x: f64,
    pub h: Vec<Complex64>,
    pub d: Vec<Complex64>,
}

impl RadialFactors {
    pub fn new(l_max: u32, x: f64) -> Result<Self> {
        let h = sph_hankel1_seq(l_max, x)?;
        let mut d = vec![Complex64::new(0.0, 0.0); h.len()];
        for l in 1..h.len() {
            d[l] = riccati_from_seq(&h, l, x);
        }
        Ok(Self { x, h, d })
    }
}

/// `(-i)^n`.
#[inline]
pub fn neg_i_pow(n: u32) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}
