//! Trigonometric polynomials represented by their Fourier data, symbol
//! coefficients of `exp(t f)`, and the rapidly-decaying test functions used
//! for local linear statistics.
//!
//! A test function is stored as a finitely supported map from integer
//! frequency to coefficient, `f(x) = Σ_k f̂(k) e^{ikx}`. Coefficients are
//! either `Complex<f64>` ([`Poly64`]) or exact Gaussian rationals
//! ([`PolyExact`]); convolution powers of a rational polynomial stay
//! rational, while symbol coefficients of `exp(t f)` are always floating
//! point.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num::complex::Complex64;
use num::{BigRational, Complex, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::quad;

/// Exact complex scalar: Gaussian rational.
pub type CExact = Complex<BigRational>;

/// Coefficient scalar for [`FourierPoly`]. Implemented for `Complex<f64>`
/// and for exact Gaussian rationals.
pub trait Coeff: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn conj(&self) -> Self;
    fn is_zero(&self) -> bool;
}

impl Coeff for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
}

impl Coeff for CExact {
    fn zero() -> Self {
        Complex::new(BigRational::zero(), BigRational::zero())
    }
    fn one() -> Self {
        Complex::new(BigRational::from_integer(1.into()), BigRational::zero())
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

/// A finitely supported Fourier series `f(x) = Σ_k c_k e^{ikx}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierPoly<C: Coeff> {
    coeffs: BTreeMap<i64, C>,
    real_valued: bool,
    even: bool,
}

/// Floating-point polynomial.
pub type Poly64 = FourierPoly<Complex64>;
/// Exact Gaussian-rational polynomial.
pub type PolyExact = FourierPoly<CExact>;

impl<C: Coeff> FourierPoly<C> {
    /// Builds a polynomial from `(frequency, coefficient)` pairs.
    ///
    /// Zero coefficients are dropped; the `real_valued` and `even` flags are
    /// computed from the surviving coefficients. Duplicate frequencies are a
    /// validation error.
    pub fn make_poly(pairs: impl IntoIterator<Item = (i64, C)>) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (k, c) in pairs {
            if coeffs.contains_key(&k) {
                return Err(Error::validation(format!("duplicate frequency {k}")));
            }
            if !c.is_zero() {
                coeffs.insert(k, c);
            }
        }
        Ok(Self::from_map(coeffs))
    }

    fn from_map(coeffs: BTreeMap<i64, C>) -> Self {
        let real_valued = coeffs
            .iter()
            .all(|(k, c)| coeffs.get(&-k).map(|d| *c == d.conj()).unwrap_or(false));
        let even = coeffs
            .iter()
            .all(|(k, c)| coeffs.get(&-k).map(|d| c == d).unwrap_or(false));
        FourierPoly {
            coeffs,
            real_valued,
            even,
        }
    }

    /// The zero polynomial.
    pub fn zero_poly() -> Self {
        Self::from_map(BTreeMap::new())
    }

    /// Constant polynomial `c`.
    pub fn constant(c: C) -> Self {
        Self::make_poly([(0, c)]).expect("single frequency")
    }

    /// Max `|k|` with a nonzero coefficient (0 for the zero polynomial).
    pub fn degree(&self) -> i64 {
        self.coeffs.keys().map(|k| k.abs()).max().unwrap_or(0)
    }

    /// Coefficient at frequency `k` (zero when outside the support).
    pub fn coeff(&self, k: i64) -> C {
        self.coeffs.get(&k).cloned().unwrap_or_else(C::zero)
    }

    /// Iterator over `(frequency, coefficient)` in increasing frequency order.
    pub fn iter(&self) -> impl Iterator<Item = (&i64, &C)> {
        self.coeffs.iter()
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `f(-k) = conj(f(k))` for every frequency.
    pub fn is_real_valued(&self) -> bool {
        self.real_valued
    }

    /// `f(-k) = f(k)` for every frequency.
    pub fn is_even(&self) -> bool {
        self.even
    }

    /// Convolution product (pointwise product of the functions).
    pub fn convolve(&self, other: &Self) -> Self {
        let mut out: BTreeMap<i64, C> = BTreeMap::new();
        for (ka, ca) in &self.coeffs {
            for (kb, cb) in &other.coeffs {
                let k = ka + kb;
                let term = ca.mul(cb);
                match out.get_mut(&k) {
                    Some(acc) => *acc = acc.add(&term),
                    None => {
                        out.insert(k, term);
                    }
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        Self::from_map(out)
    }

    /// Coefficients of `f^a`.
    ///
    /// `a = 0` returns the constant polynomial 1 (documented, not an error);
    /// the result degree is `a * degree(f)`. Rational inputs stay rational.
    pub fn convolve_power(&self, a: u32) -> Self {
        let mut acc = Self::constant(C::one());
        for _ in 0..a {
            acc = acc.convolve(self);
        }
        acc
    }

    /// Even part `(f(x) + f(-x)) / 2` has coefficients `(c_k + c_{-k}) / 2`;
    /// here we return `c_k + c_{-k}` (the symmetrized sum, no halving), which
    /// is the polynomial of `f(x) + f(-x)`.
    pub fn reflect_sum(&self) -> Self {
        let mut out: BTreeMap<i64, C> = BTreeMap::new();
        for (k, c) in &self.coeffs {
            for kk in [*k, -*k] {
                match out.get_mut(&kk) {
                    Some(acc) => *acc = acc.add(c),
                    None => {
                        out.insert(kk, c.clone());
                    }
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        Self::from_map(out)
    }
}

impl PolyExact {
    /// Exact polynomial from integer `(frequency, re, im)` triples.
    pub fn from_int_pairs(pairs: &[(i64, i64, i64)]) -> Result<Self> {
        Self::make_poly(pairs.iter().map(|&(k, re, im)| {
            (
                k,
                Complex::new(
                    BigRational::from_integer(re.into()),
                    BigRational::from_integer(im.into()),
                ),
            )
        }))
    }

    /// Lossy conversion to the floating-point representation.
    pub fn to_poly64(&self) -> Poly64 {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(k, c)| {
                (
                    *k,
                    Complex64::new(
                        c.re.to_f64().expect("rational fits in f64"),
                        c.im.to_f64().expect("rational fits in f64"),
                    ),
                )
            })
            .collect();
        Poly64::from_map(coeffs)
    }
}

impl Poly64 {
    /// Evaluates `Σ c_k e^{ik theta}`.
    pub fn eval(&self, theta: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, c) in &self.coeffs {
            let phase = Complex64::from_polar(1.0, *k as f64 * theta);
            acc += c * phase;
        }
        acc
    }

    /// Evaluates a real-valued polynomial, discarding the roundoff-level
    /// imaginary residue.
    pub fn eval_real(&self, theta: f64) -> f64 {
        self.eval(theta).re
    }

    /// Parses the `[[k, re, im], ...]` JSON mini-format.
    pub fn from_json(text: &str) -> Result<Self> {
        let triples: Vec<(i64, f64, f64)> = serde_json::from_str(text)
            .map_err(|e| Error::validation(format!("bad function spec: {e}")))?;
        Self::make_poly(
            triples
                .into_iter()
                .map(|(k, re, im)| (k, Complex64::new(re, im))),
        )
    }

    /// Serializes to the `[[k, re, im], ...]` JSON mini-format.
    pub fn to_json(&self) -> String {
        let triples: Vec<(i64, f64, f64)> =
            self.coeffs.iter().map(|(k, c)| (*k, c.re, c.im)).collect();
        serde_json::to_string(&triples).expect("triples serialize")
    }
}

/// `2 cos(k0 theta)` as a float polynomial.
pub fn cos_poly(k0: i64) -> Poly64 {
    Poly64::make_poly([
        (k0, Complex64::new(1.0, 0.0)),
        (-k0, Complex64::new(1.0, 0.0)),
    ])
    .expect("distinct frequencies")
}

/// Number of quadrature nodes used for the symbol coefficients of
/// `exp(t f)`; chosen so aliasing stays below double precision for entire
/// symbols.
fn exp_symbol_nodes(band: usize, degree: i64, t_abs: f64) -> usize {
    let d = degree.unsigned_abs() as usize;
    let growth = (t_abs * degree as f64).abs().ceil().max(1.0) as usize;
    let n = 8 * (band + d.max(1) * growth);
    n.max(64)
}

/// `m`-th Fourier coefficients of `exp(t f)` for `|m| <= band`, computed by
/// equispaced trapezoid quadrature (spectrally accurate for entire symbols).
///
/// For real `t` the returned list is hermitian-symmetric bit-exactly; the
/// symmetry is enforced by symmetrization. Index `m + band` holds
/// coefficient `m`.
pub fn exp_symbol_coeffs(f: &Poly64, t: f64, band: usize) -> Result<Vec<Complex64>> {
    exp_symbol_coeffs_complex(f, Complex64::new(t, 0.0), band)
}

/// Same as [`exp_symbol_coeffs`] for complex `t` (used by the contour-based
/// cumulant extraction). Hermitian symmetry is enforced only when `t` is
/// real.
pub fn exp_symbol_coeffs_complex(f: &Poly64, t: Complex64, band: usize) -> Result<Vec<Complex64>> {
    if !f.is_real_valued() {
        return Err(Error::validation(
            "exp_symbol_coeffs requires a real-valued symbol",
        ));
    }
    let n = exp_symbol_nodes(band, f.degree(), t.norm());
    let h = 2.0 * PI / n as f64;
    // values of exp(t f) on the grid
    let values: Vec<Complex64> = (0..n)
        .map(|q| {
            let theta = -PI + h * q as f64;
            (t * f.eval_real(theta)).exp()
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); 2 * band + 1];
    for (idx, slot) in out.iter_mut().enumerate() {
        let m = idx as i64 - band as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (q, v) in values.iter().enumerate() {
            let theta = -PI + h * q as f64;
            acc += v * Complex64::from_polar(1.0, -(m as f64) * theta);
        }
        *slot = acc / n as f64;
    }
    if t.im == 0.0 {
        for m in 0..=band {
            let hi = band + m;
            let lo = band - m;
            let sym = 0.5 * (out[hi] + out[lo].conj());
            out[hi] = sym;
            out[lo] = sym.conj();
        }
    }
    Ok(out)
}

/// Built-in rapidly-decaying test functions, stored by their frequency-side
/// profile ĝ with the convention `g(x) = (2π)^{-1/2} ∫ ĝ(t) e^{itx} dt`.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `ĝ(t) = max(0, 1 - |t|/scale)`; `g(x) = scale·√(2/π)·(1-cos(scale·x))/(scale·x)²`.
    Triangle { scale: f64 },
    /// `ĝ(t) = exp(-(σt)²/2)`; `g(x) = exp(-x²/(2σ²))/σ`.
    Gauss { sigma: f64 },
    /// `ĝ(t) = (sin t / t)²`; `g(x) = √(π/2)·(1 - |x|/2)` for `|x| <= 2`, else 0.
    Sinc2,
    /// Even piecewise-linear table of ĝ on `[-t_max, t_max]`, zero outside.
    Table { t_max: f64, values: Vec<f64> },
}

/// A test function for local statistics, described by ĝ.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTestFunction {
    family: Family,
}

/// Support information on the frequency side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SupportBound {
    /// ĝ vanishes identically beyond `|t| > bound`.
    Hard(f64),
    /// ĝ only decays; `bound` is where it falls below the tail tolerance
    /// (or, for slow decay, a practical cutoff for quadrature).
    Decay(f64),
}

impl SupportBound {
    pub fn value(self) -> f64 {
        match self {
            SupportBound::Hard(v) | SupportBound::Decay(v) => v,
        }
    }
}

/// Relative tail tolerance defining the effective support of ĝ.
pub const TAIL_TOL: f64 = 1e-12;

impl LocalTestFunction {
    pub fn new(family: Family) -> Result<Self> {
        match &family {
            Family::Triangle { scale } => {
                if !(*scale > 0.0) {
                    return Err(Error::validation("triangle scale must be positive"));
                }
            }
            Family::Gauss { sigma } => {
                if !(*sigma > 0.0) {
                    return Err(Error::validation("gauss sigma must be positive"));
                }
            }
            Family::Sinc2 => {}
            Family::Table { t_max, values } => {
                if !(*t_max > 0.0) {
                    return Err(Error::validation("table t_max must be positive"));
                }
                if values.len() < 2 {
                    return Err(Error::validation("table needs at least two nodes"));
                }
                let m = values.len();
                for i in 0..m / 2 {
                    if (values[i] - values[m - 1 - i]).abs() > 1e-14 {
                        return Err(Error::validation(
                            "table must be even-symmetric so that g is real",
                        ));
                    }
                }
            }
        }
        Ok(LocalTestFunction { family })
    }

    pub fn triangle() -> Self {
        Self::new(Family::Triangle { scale: 1.0 }).expect("valid")
    }

    pub fn gauss(sigma: f64) -> Result<Self> {
        Self::new(Family::Gauss { sigma })
    }

    pub fn sinc2() -> Self {
        Self::new(Family::Sinc2).expect("valid")
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Parses `{"family": "triangle"|"gauss"|"sinc2"|"table", "params": {...}}`.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(serde::Deserialize)]
        struct Spec {
            family: String,
            #[serde(default)]
            params: serde_json::Value,
        }
        let spec: Spec = serde_json::from_str(text)
            .map_err(|e| Error::validation(format!("bad test-function spec: {e}")))?;
        let get = |name: &str, default: f64| -> f64 {
            spec.params
                .get(name)
                .and_then(|v| v.as_f64())
                .unwrap_or(default)
        };
        match spec.family.as_str() {
            "triangle" => Self::new(Family::Triangle {
                scale: get("scale", 1.0),
            }),
            "gauss" => Self::new(Family::Gauss {
                sigma: get("sigma", 1.0),
            }),
            "sinc2" => Ok(Self::sinc2()),
            "table" => {
                let t_max = get("t_max", 1.0);
                let values: Vec<f64> = spec
                    .params
                    .get("values")
                    .and_then(|v| serde_json::from_value(v.clone()).ok())
                    .ok_or_else(|| Error::validation("table requires a values array"))?;
                Self::new(Family::Table { t_max, values })
            }
            other => Err(Error::validation(format!("unknown family '{other}'"))),
        }
    }

    /// ĝ(t). Real for every built-in family (hermitian symmetry of ĝ is
    /// then automatic).
    pub fn ghat(&self, t: f64) -> f64 {
        match &self.family {
            Family::Triangle { scale } => (1.0 - (t / scale).abs()).max(0.0),
            Family::Gauss { sigma } => (-0.5 * (sigma * t).powi(2)).exp(),
            Family::Sinc2 => {
                if t == 0.0 {
                    1.0
                } else {
                    (t.sin() / t).powi(2)
                }
            }
            Family::Table { t_max, values } => {
                let at = t.abs();
                if at > *t_max {
                    return 0.0;
                }
                let m = values.len();
                let pos = (t + t_max) / (2.0 * t_max) * (m - 1) as f64;
                let i = (pos.floor() as usize).min(m - 2);
                let frac = pos - i as f64;
                values[i] * (1.0 - frac) + values[i + 1] * frac
            }
        }
    }

    /// g(x) from its time-domain closed form (inverse transform of ĝ).
    pub fn eval_space(&self, x: f64) -> f64 {
        match &self.family {
            Family::Triangle { scale } => {
                let s = *scale;
                let u = s * x;
                if u.abs() < 1e-4 {
                    // (1 - cos u)/u^2 = 1/2 - u^2/24 + u^4/720
                    s * (2.0 / PI).sqrt() * (0.5 - u * u / 24.0 + u.powi(4) / 720.0)
                } else {
                    s * (2.0 / PI).sqrt() * (1.0 - u.cos()) / (u * u)
                }
            }
            Family::Gauss { sigma } => (-0.5 * (x / sigma).powi(2)).exp() / sigma,
            Family::Sinc2 => {
                let a = 1.0 - 0.5 * x.abs();
                if a > 0.0 {
                    (PI / 2.0).sqrt() * a
                } else {
                    0.0
                }
            }
            Family::Table { t_max, values } => {
                // per-segment closed form of ∫ (α + βt) e^{itx} dt
                let m = values.len();
                let dt = 2.0 * t_max / (m - 1) as f64;
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..m - 1 {
                    let a = -t_max + dt * i as f64;
                    let b = a + dt;
                    let va = values[i];
                    let vb = values[i + 1];
                    let beta = (vb - va) / dt;
                    let alpha = va - beta * a;
                    acc += segment_transform(alpha, beta, a, b, x);
                }
                acc.re / (2.0 * PI).sqrt()
            }
        }
    }

    /// Frequency-side support of ĝ at the crate tail tolerance.
    pub fn support(&self) -> SupportBound {
        match &self.family {
            Family::Triangle { scale } => SupportBound::Hard(*scale),
            Family::Gauss { sigma } => {
                SupportBound::Decay((-2.0 * TAIL_TOL.ln()).sqrt() / sigma)
            }
            Family::Sinc2 => SupportBound::Decay(1.0 / TAIL_TOL.sqrt()),
            Family::Table { t_max, .. } => SupportBound::Hard(*t_max),
        }
    }

    /// `∫_{-∞}^{∞} g(x) dx = √(2π)·ĝ(0)`.
    pub fn space_integral(&self) -> f64 {
        (2.0 * PI).sqrt() * self.ghat(0.0)
    }

    /// Limit variance of the local statistic:
    /// `(1/2π) ∫ |ĝ(t)|² |t| dt`, absolute error below 1e-10.
    pub fn variance_limit_local(&self) -> f64 {
        let half = match &self.family {
            Family::Triangle { scale } => {
                let s = *scale;
                quad::adaptive_simpson(&|t: f64| t * self.ghat(t).powi(2), 0.0, s, 1e-13)
            }
            Family::Gauss { sigma } => {
                let cut = 9.0 / sigma;
                quad::adaptive_simpson(&|t: f64| t * self.ghat(t).powi(2), 0.0, cut, 1e-13)
            }
            Family::Sinc2 => {
                // per-period Gauss rule; the analytic tail uses
                // sin^4 = 3/8 - cos(2t)/2 + cos(4t)/8, whose mean term
                // integrates to 3/(16 T^2) beyond T.
                let periods = 2000usize;
                let mut acc = 0.0;
                for m in 0..periods {
                    let a = m as f64 * PI;
                    let b = a + PI;
                    acc += quad::gauss_legendre_16(a, b, |t| {
                        if t == 0.0 {
                            0.0
                        } else {
                            t.sin().powi(4) / t.powi(3)
                        }
                    });
                }
                let big_t = periods as f64 * PI;
                acc + 3.0 / (16.0 * big_t * big_t)
            }
            Family::Table { t_max, values } => {
                // integrand is piecewise cubic; Simpson per segment is exact
                let m = values.len();
                let dt = 2.0 * t_max / (m - 1) as f64;
                let mut acc = 0.0;
                for i in 0..m - 1 {
                    let a = -t_max + dt * i as f64;
                    let b = a + dt;
                    if b <= 0.0 {
                        continue; // even symmetry: fold onto [0, t_max]
                    }
                    let lo = a.max(0.0);
                    let mid = 0.5 * (lo + b);
                    let f = |t: f64| t * self.ghat(t).powi(2);
                    acc += (b - lo) / 6.0 * (f(lo) + 4.0 * f(mid) + f(b));
                }
                acc
            }
        };
        2.0 * half / (2.0 * PI)
    }
}

/// `∫_a^b (α + βt) e^{itx} dt`, stable near `x = 0`.
fn segment_transform(alpha: f64, beta: f64, a: f64, b: f64, x: f64) -> Complex64 {
    if x.abs() < 1e-5 {
        let p0 = b - a;
        let p1 = 0.5 * (b * b - a * a);
        let p2 = (b.powi(3) - a.powi(3)) / 3.0;
        let p3 = (b.powi(4) - a.powi(4)) / 4.0;
        let i0 = Complex64::new(p0 - x * x * p2 / 2.0, x * p1 - x.powi(3) * p3 / 6.0);
        let i1 = Complex64::new(p1 - x * x * p3 / 2.0, x * p2);
        return i0 * alpha + i1 * beta;
    }
    let ix = Complex64::new(0.0, x);
    let ea = (ix * a).exp();
    let eb = (ix * b).exp();
    let i0 = (eb - ea) / ix;
    let i1 = (eb * b - ea * a) / ix - i0 / ix;
    i0 * alpha + i1 * beta
}

/// Circle Fourier coefficients of the window restriction
/// `c_k = (1/2π) ∫_{-π}^{π} g(L(θ-θ0)) e^{-ikθ} dθ`, `|k| <= band`,
/// by trapezoid quadrature.
///
/// For a family with hard frequency support `T`, a band below `ceil(L·T)`
/// drops real coefficient mass and is rejected.
pub fn localize(g: &LocalTestFunction, l: f64, theta0: f64, band: usize) -> Result<Poly64> {
    if l < 1.0 {
        return Err(Error::validation("localization scale L must be >= 1"));
    }
    if let SupportBound::Hard(t) = g.support() {
        let needed = (l * t).ceil() as usize;
        if band < needed {
            return Err(Error::validation(format!(
                "band {band} below effective circle support {needed}"
            )));
        }
    }
    let n = (32 * (band + 1)).max(8192);
    localize_by_quadrature(|theta| g.eval_space(l * (theta - theta0)), band, n)
}

/// Trapezoid engine behind [`localize`]; `h(θ)` is sampled on `n` closed
/// panels of `[-π, π]` with halved end weights.
pub fn localize_by_quadrature<F: Fn(f64) -> f64>(h: F, band: usize, n: usize) -> Result<Poly64> {
    let step = 2.0 * PI / n as f64;
    let values: Vec<f64> = (0..=n).map(|q| h(-PI + step * q as f64)).collect();
    let mut pairs = Vec::with_capacity(2 * band + 1);
    for m in -(band as i64)..=(band as i64) {
        let mut acc = Complex64::new(0.0, 0.0);
        for (q, v) in values.iter().enumerate() {
            let w = if q == 0 || q == n { 0.5 } else { 1.0 };
            let theta = -PI + step * q as f64;
            acc += w * v * Complex64::from_polar(1.0, -(m as f64) * theta);
        }
        pairs.push((m, acc * step / (2.0 * PI)));
    }
    // hermitian symmetrization: h is real
    let mut out = Poly64::make_poly(pairs)?;
    let mut sym_pairs = Vec::new();
    for m in 0..=band as i64 {
        let c = 0.5 * (out.coeff(m) + out.coeff(-m).conj());
        sym_pairs.push((m, c));
        if m > 0 {
            sym_pairs.push((-m, c.conj()));
        }
    }
    out = Poly64::make_poly(sym_pairs)?;
    Ok(out)
}

/// Circle Fourier coefficients of the periodization
/// `Σ_m g(L(θ - θ0 + 2πm))`: by Poisson summation these are exactly
/// `ĝ(k/L) e^{-ikθ0} / (√(2π) L)`.
///
/// This is the localization the sampler's local statistic pairs with: the
/// statistic wraps the test function around the circle, so means and
/// cumulants computed from these coefficients match it exactly.
pub fn localize_periodized(
    g: &LocalTestFunction,
    l: f64,
    theta0: f64,
    band: usize,
) -> Result<Poly64> {
    if l < 1.0 {
        return Err(Error::validation("localization scale L must be >= 1"));
    }
    let norm = 1.0 / ((2.0 * PI).sqrt() * l);
    let mut pairs = Vec::with_capacity(2 * band + 1);
    for m in -(band as i64)..=(band as i64) {
        let amp = g.ghat(m as f64 / l) * norm;
        let c = Complex64::from_polar(1.0, -(m as f64) * theta0) * amp;
        pairs.push((m, c));
    }
    Poly64::make_poly(pairs)
}

/// Periodized evaluation `Σ_m g(L(x + 2πLm))`... concretely
/// `g_per(u) = Σ_{m ∈ ℤ} g(u + 2πLm)` evaluated at `u = L(θ - θ0)`.
pub fn periodized_space(g: &LocalTestFunction, l: f64, u: f64) -> f64 {
    let period = 2.0 * PI * l;
    match g.family() {
        // compact support in space: at most one copy contributes for L >= 1
        Family::Sinc2 => {
            let wrapped = u - period * (u / period).round();
            g.eval_space(wrapped)
        }
        // super-exponential decay: three copies are already below 1e-300
        Family::Gauss { .. } => {
            let wrapped = u - period * (u / period).round();
            g.eval_space(wrapped)
                + g.eval_space(wrapped - period)
                + g.eval_space(wrapped + period)
        }
        // compactly supported ĝ: evaluate the finite Fourier series
        Family::Triangle { .. } | Family::Table { .. } => {
            let t_top = match g.support() {
                SupportBound::Hard(t) => t,
                SupportBound::Decay(t) => t,
            };
            let band = (l * t_top).ceil() as i64;
            let norm = 1.0 / ((2.0 * PI).sqrt() * l);
            let mut acc = g.ghat(0.0) * norm;
            for k in 1..=band {
                acc += 2.0 * g.ghat(k as f64 / l) * norm * (k as f64 * u / l).cos();
            }
            acc
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;


    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn make_poly_flags_and_degree() {
        // 2 cos θ: real and even
        let f = Poly64::make_poly([(1, c(1.0, 0.0)), (-1, c(1.0, 0.0))]).unwrap();
        assert!(f.is_real_valued());
        assert!(f.is_even());
        assert_eq!(f.degree(), 1);

        // constant symbol
        let g = Poly64::make_poly([(0, c(2.5, 0.0))]).unwrap();
        assert_eq!(g.degree(), 0);
        assert!(g.is_real_valued());

        // -2 sin 2θ: real but not even
        let s = Poly64::make_poly([(2, c(0.0, 1.0)), (-2, c(0.0, -1.0))]).unwrap();
        assert!(s.is_real_valued());
        assert!(!s.is_even());
        assert!((s.eval_real(0.3) + 2.0 * (0.6f64).sin()).abs() < 1e-14);
    }

    #[test]
    fn make_poly_rejects_duplicates_and_drops_zeros() {
        assert!(Poly64::make_poly([(1, c(1.0, 0.0)), (1, c(2.0, 0.0))]).is_err());
        let z = Poly64::make_poly([(3, c(0.0, 0.0))]).unwrap();
        assert!(z.is_empty());
        assert_eq!(z.degree(), 0);
    }

    #[test]
    fn convolve_power_matches_binomial_expansion() {
        // (2 cos θ)^2 = e^{2iθ} + 2 + e^{-2iθ}
        let f = cos_poly(1);
        let f2 = f.convolve_power(2);
        assert_eq!(f2.coeff(0), c(2.0, 0.0));
        assert_eq!(f2.coeff(2), c(1.0, 0.0));
        assert_eq!(f2.coeff(-2), c(1.0, 0.0));
        // (2 cos θ)^3: coefficients {±3: 1, ±1: 3}
        let f3 = f.convolve_power(3);
        assert_eq!(f3.coeff(3), c(1.0, 0.0));
        assert_eq!(f3.coeff(1), c(3.0, 0.0));
        assert_eq!(f3.coeff(-1), c(3.0, 0.0));
        // power 1 is the identity, power 0 the constant 1
        assert_eq!(f.convolve_power(1), f);
        assert_eq!(f.convolve_power(0).coeff(0), c(1.0, 0.0));
    }

    #[test]
    fn convolve_power_exact_is_additive() {
        // convolve_power(f, a+b) == convolve_power(f,a) * convolve_power(f,b)
        let f = PolyExact::from_int_pairs(&[(1, 2, 1), (-1, 2, -1), (0, -1, 0)]).unwrap();
        for a in 0u32..=3 {
            for b in 0u32..=3 {
                if a + b > 6 {
                    continue;
                }
                let lhs = f.convolve_power(a + b);
                let rhs = f.convolve_power(a).convolve(&f.convolve_power(b));
                assert_eq!(lhs, rhs, "a={a} b={b}");
            }
        }
    }

    /// Independent power-series oracle for the modified Bessel function
    /// I_m(2t) = Σ_j t^{m+2j} / (j! (m+j)!).
    fn bessel_i_2t(m: u32, t: f64) -> f64 {
        let mut term = t.powi(m as i32);
        for j in 1..=m {
            term /= j as f64;
        }
        let mut acc = term;
        for j in 1..60 {
            term *= t * t / (j as f64 * (m as f64 + j as f64));
            acc += term;
            if term.abs() < 1e-18 * acc.abs() {
                break;
            }
        }
        acc
    }

    #[test]
    fn exp_symbol_matches_bessel_series() {
        // the m-th symbol coefficient of exp(2t cos θ) is I_m(2t)
        let f = cos_poly(1);
        let t = 0.7;
        let band = 10;
        let coeffs = exp_symbol_coeffs(&f, t, band).unwrap();
        for m in 0..=6u32 {
            let got = coeffs[band + m as usize];
            let want = bessel_i_2t(m, t);
            assert!(
                (got.re - want).abs() < 1e-12 && got.im.abs() < 1e-13,
                "m={m}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn exp_symbol_degenerate_cases() {
        let f = cos_poly(1);
        let coeffs = exp_symbol_coeffs(&f, 0.0, 4).unwrap();
        for (i, v) in coeffs.iter().enumerate() {
            let want = if i == 4 { 1.0 } else { 0.0 };
            assert!((v.re - want).abs() < 1e-14 && v.im.abs() < 1e-14);
        }
        let konst = Poly64::make_poly([(0, c(0.3, 0.0))]).unwrap();
        let coeffs = exp_symbol_coeffs(&konst, 2.0, 3).unwrap();
        assert!((coeffs[3].re - (0.6f64).exp()).abs() < 1e-12);
        assert!(coeffs[2].norm() < 1e-14 && coeffs[4].norm() < 1e-14);
    }

    #[test]
    fn exp_symbol_band_refinement_agrees() {
        let f = Poly64::make_poly([
            (1, c(1.0, 0.0)),
            (-1, c(1.0, 0.0)),
            (2, c(0.5, 0.0)),
            (-2, c(0.5, 0.0)),
        ])
        .unwrap();
        let a = exp_symbol_coeffs(&f, 0.8, 8).unwrap();
        let b = exp_symbol_coeffs(&f, 0.8, 16).unwrap();
        for m in -8i64..=8 {
            let va = a[(m + 8) as usize];
            let vb = b[(m + 16) as usize];
            let denom = vb.norm().max(1e-30);
            assert!((va - vb).norm() / denom < 1e-12, "m={m}");
        }
    }

    #[test]
    fn exp_symbol_hermitian_bit_exact() {
        let f = cos_poly(2);
        let coeffs = exp_symbol_coeffs(&f, 0.4, 9).unwrap();
        for m in 0..=9usize {
            assert_eq!(coeffs[9 + m], coeffs[9 - m].conj());
        }
    }

    #[test]
    fn localize_reproduces_trig_polynomial() {
        // with L=1 and θ0=0 the quadrature engine must reproduce a trig
        // polynomial's coefficients to 1e-12
        let h = |theta: f64| 2.0 * theta.cos() + 0.5 * (3.0 * theta).sin();
        let out = localize_by_quadrature(h, 5, 4096).unwrap();
        assert!((out.coeff(1) - c(1.0, 0.0)).norm() < 1e-12);
        assert!((out.coeff(-1) - c(1.0, 0.0)).norm() < 1e-12);
        assert!((out.coeff(3) - c(0.0, -0.25)).norm() < 1e-12);
        assert!((out.coeff(-3) - c(0.0, 0.25)).norm() < 1e-12);
        assert!(out.coeff(0).norm() < 1e-13);
        assert!(out.coeff(2).norm() < 1e-13);
    }

    #[test]
    fn localize_triangle_structure() {
        // triangle ĝ, θ0 = 0, L = 4: coefficients real and even, effective
        // support |k| <= 4, and stable under doubled quadrature resolution
        let g = LocalTestFunction::triangle();
        let band = 8;
        let a = localize(&g, 4.0, 0.0, band).unwrap();
        let fine = localize_by_quadrature(|theta| g.eval_space(4.0 * theta), band, 16384).unwrap();
        for k in -(band as i64)..=band as i64 {
            assert!(a.coeff(k).im.abs() < 1e-12, "k={k} imaginary");
            assert!((a.coeff(k) - a.coeff(-k)).norm() < 1e-12, "k={k} even");
            assert!((a.coeff(k) - fine.coeff(k)).norm() < 1e-9, "k={k} refine");
        }
        // beyond L the coefficients are window leakage only
        assert!(a.coeff(7).norm() < 1e-3);
        assert!(a.coeff(2).norm() > 1e-2);
    }

    #[test]
    fn localize_band_validation_and_zero_table() {
        let g = LocalTestFunction::triangle();
        assert!(matches!(
            localize(&g, 4.0, 0.0, 2),
            Err(Error::Validation(_))
        ));
        let z = LocalTestFunction::new(Family::Table {
            t_max: 1.0,
            values: vec![0.0, 0.0, 0.0],
        })
        .unwrap();
        let out = localize(&z, 4.0, 0.0, 6).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn localize_shift_is_modulation() {
        // gauss decays fast enough that the window restriction carries the
        // modulation property at full precision
        let g = LocalTestFunction::gauss(1.0).unwrap();
        let band = 12;
        let theta0 = 0.7;
        let base = localize(&g, 4.0, 0.0, band).unwrap();
        let shifted = localize(&g, 4.0, theta0, band).unwrap();
        for k in -(band as i64)..=band as i64 {
            let want = base.coeff(k) * Complex64::from_polar(1.0, -(k as f64) * theta0);
            assert!((shifted.coeff(k) - want).norm() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn periodized_coeffs_match_poisson_formula() {
        let g = LocalTestFunction::triangle();
        let l = 4.0;
        let p = localize_periodized(&g, l, 0.3, 6).unwrap();
        for k in -6i64..=6 {
            let amp = g.ghat(k as f64 / l) / ((2.0 * PI).sqrt() * l);
            let want = Complex64::from_polar(1.0, -(k as f64) * 0.3) * amp;
            assert!((p.coeff(k) - want).norm() < 1e-15);
        }
        // and the periodized evaluation matches the coefficient series
        for &u in &[0.0, 1.3, -2.0, 11.0] {
            let direct: f64 = periodized_space(&g, l, u);
            let series = (-6i64..=6)
                .map(|k| {
                    (p.coeff(k) * Complex64::from_polar(1.0, k as f64 * (u / l + 0.3))).re
                })
                .sum::<f64>();
            assert!((direct - series).abs() < 1e-12, "u={u}");
        }
    }

    #[test]
    fn variance_limit_closed_forms() {
        // triangle: (1/2π)·2·∫_0^1 (1-t)^2 t dt = 1/(12π)
        let tri = LocalTestFunction::triangle();
        assert!((tri.variance_limit_local() - 1.0 / (12.0 * PI)).abs() < 1e-10);
        // indicator of [-1, 1] as a two-node table: 1/(2π)
        let ind = LocalTestFunction::new(Family::Table {
            t_max: 1.0,
            values: vec![1.0, 1.0],
        })
        .unwrap();
        assert!((ind.variance_limit_local() - 1.0 / (2.0 * PI)).abs() < 1e-10);
        // gauss σ: closed form 1/(2π σ²)
        let ga = LocalTestFunction::gauss(2.0).unwrap();
        assert!((ga.variance_limit_local() - 1.0 / (2.0 * PI * 4.0)).abs() < 1e-10);
        // sinc²: (1/π)·∫_0^∞ sin^4 t / t^3 dt = ln 2 / π
        let sc = LocalTestFunction::sinc2();
        assert!((sc.variance_limit_local() - std::f64::consts::LN_2 / PI).abs() < 1e-9);
        // zero table
        let z = LocalTestFunction::new(Family::Table {
            t_max: 1.0,
            values: vec![0.0, 0.0],
        })
        .unwrap();
        assert_eq!(z.variance_limit_local(), 0.0);
    }

    #[test]
    fn space_forms_match_ghat_by_quadrature() {
        // cross-check eval_space against direct numeric inversion of ĝ
        for g in [
            LocalTestFunction::triangle(),
            LocalTestFunction::gauss(1.3).unwrap(),
            LocalTestFunction::sinc2(),
            LocalTestFunction::new(Family::Table {
                t_max: 1.5,
                values: vec![0.0, 0.7, 1.0, 0.7, 0.0],
            })
            .unwrap(),
        ] {
            let cut = match g.support() {
                SupportBound::Hard(t) => t,
                SupportBound::Decay(_) => 2000.0,
            };
            for &x in &[0.0, 0.4, 1.1, 2.7] {
                let numeric = quad::adaptive_simpson(
                    &|t: f64| g.ghat(t) * (t * x).cos(),
                    0.0,
                    cut,
                    1e-11,
                ) * 2.0
                    / (2.0 * PI).sqrt();
                let tol = if matches!(g.family(), Family::Sinc2) {
                    1e-3 // 1/t² tail of ĝ converges slowly in the oracle
                } else {
                    1e-8
                };
                assert!(
                    (g.eval_space(x) - numeric).abs() < tol,
                    "x={x}, family {:?}: {} vs {numeric}",
                    g.family(),
                    g.eval_space(x)
                );
            }
        }
    }

    #[test]
    fn json_round_trips() {
        let f = Poly64::from_json("[[1, 1.0, 0.0], [-1, 1.0, 0.0]]").unwrap();
        assert_eq!(f, cos_poly(1));
        let again = Poly64::from_json(&f.to_json()).unwrap();
        assert_eq!(again, f);
        let g =
            LocalTestFunction::from_json(r#"{"family":"gauss","params":{"sigma":2.0}}"#).unwrap();
        assert_eq!(g.family(), &Family::Gauss { sigma: 2.0 });
        assert!(LocalTestFunction::from_json(r#"{"family":"nope"}"#).is_err());
    }

    #[test]
    fn exact_one_is_multiplicative_identity() {
        let one = PolyExact::constant(<CExact as Coeff>::one());
        let f = PolyExact::from_int_pairs(&[(2, 3, 0), (-2, 3, 0)]).unwrap();
        assert_eq!(one.convolve(&f), f);
    }
}
