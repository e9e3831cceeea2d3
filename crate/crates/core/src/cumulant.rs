//! Exact finite-n cumulants of linear eigenvalue statistics along two
//! independent routes, plus the limiting values.
//!
//! * the direct Fourier k-sum for U(n): zero-sum frequency tuples weighted
//!   by clamped lattice counts — exact rational arithmetic when the test
//!   function is rational;
//! * the kernel-trace route for all four ensembles: alternating sums of
//!   `trace(Π kernel_matrix(f^{ℓ_i}))` over compositions.
//!
//! Both compute the same `C_{ℓ,n}(f)`; the crate's tests and the
//! acceptance suite hold them against each other and against the
//! determinant oracles.

use nalgebra::DMatrix;
use num::complex::Complex64;
use num::{BigRational, Complex, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::comb::{compositions, Comp, FACTORIALS};
use crate::ensemble::{kernel_matrix, Ensemble};
use crate::error::{Error, Result};
use crate::fourier::{
    localize_periodized, CExact, Coeff, FourierPoly, LocalTestFunction, Poly64, PolyExact,
};
use crate::linalg::trace_of_product;

/// Cap on `degree(f) · ℓ` in the direct tuple enumeration.
pub const DEGREE_CAP: i64 = 64;
/// Highest cumulant order served by the engines.
pub const MAX_ORDER: u32 = 4;
/// Largest kernel rank the trace route will build matrices for.
pub const RANK_CAP: usize = 512;

fn check_order(l: u32) -> Result<()> {
    if l == 0 || l > MAX_ORDER {
        return Err(Error::validation(format!(
            "cumulant order must be 1..={MAX_ORDER}, got {l}"
        )));
    }
    Ok(())
}

trait CumulantScalar: Coeff {
    fn from_i64(v: i64) -> Self;
    fn div_i64(&self, d: i64) -> Self;
}

impl CumulantScalar for Complex64 {
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn div_i64(&self, d: i64) -> Self {
        self / d as f64
    }
}

impl CumulantScalar for CExact {
    fn from_i64(v: i64) -> Self {
        Complex::new(BigRational::from_integer(v.into()), BigRational::zero())
    }
    fn div_i64(&self, d: i64) -> Self {
        let den = BigRational::from_integer(d.into());
        Complex::new(&self.re / &den, &self.im / &den)
    }
}

/// Common denominator for the composition weights of order `l`.
fn weight_denominator(comps: &[Comp]) -> i64 {
    use num::Integer;
    comps
        .iter()
        .fold(1i64, |d, c| d.lcm(&(c.parts as i64 * c.prod_fact)))
}

/// The direct k-sum: Σ over zero-sum frequency tuples of
/// `Π f̂(k_i) · Σ_m ((-1)^{m-1}/m) Σ_comps ℓ!/(Πℓ_i!) · #admissible u`,
/// with each composition's partial sums taken in the tuple's own order.
fn direct_core<C: CumulantScalar>(f: &FourierPoly<C>, n: u32, l: u32) -> Result<C> {
    if !f.is_real_valued() {
        return Err(Error::validation("direct cumulant requires real-valued f"));
    }
    check_order(l)?;
    if n == 0 {
        return Err(Error::validation("n must be at least 1"));
    }
    let deg = f.degree();
    if deg * l as i64 > DEGREE_CAP {
        return Err(Error::resource(format!(
            "degree(f)·ℓ = {} exceeds the configured cap {DEGREE_CAP}",
            deg * l as i64
        )));
    }
    let l = l as usize;
    let comps = compositions(l);
    let d = weight_denominator(&comps);
    let lfact = FACTORIALS[l];
    let support: Vec<(i64, C)> = f.iter().map(|(k, c)| (*k, c.clone())).collect();
    if support.is_empty() {
        return Ok(C::zero());
    }

    // odometer over the first l-1 tuple positions; the last frequency is
    // forced by the zero-sum constraint
    let mut idx = vec![0usize; l - 1];
    let mut total = C::zero();
    loop {
        let mut prefix = [0i64; 8]; // prefix[i] = k_1 + ... + k_i
        let mut prod = C::one();
        for (pos, &i) in idx.iter().enumerate() {
            let (k, ref c) = support[i];
            prefix[pos + 1] = prefix[pos] + k;
            prod = prod.mul(c);
        }
        let k_last = -prefix[l - 1];
        let c_last = f.coeff(k_last);
        if !c_last.is_zero() {
            prod = prod.mul(&c_last);
            let mut weight: i64 = 0;
            for comp in &comps {
                let mut hi = 0i64;
                let mut lo = 0i64;
                for &b in &comp.breaks {
                    let s = prefix[b];
                    if s > hi {
                        hi = s;
                    }
                    if -s > lo {
                        lo = -s;
                    }
                }
                let count = (n as i64 - hi - lo).max(0);
                if count != 0 {
                    let sign = if comp.parts % 2 == 1 { 1 } else { -1 };
                    weight += sign * (d / (comp.parts as i64 * comp.prod_fact)) * lfact * count;
                }
            }
            if weight != 0 {
                total = total.add(&prod.mul(&C::from_i64(weight)));
            }
        }
        // advance the odometer
        let mut pos = 0usize;
        loop {
            if pos == l - 1 {
                return Ok(total.div_i64(d));
            }
            idx[pos] += 1;
            if idx[pos] < support.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Direct-path cumulant of `S_n(f)` for U(n), floating point.
pub fn cumulant_direct_unitary(f: &Poly64, n: u32, l: u32) -> Result<f64> {
    let v = direct_core(f, n, l)?;
    // the imaginary parts cancel pairwise between tuples k and -k
    Ok(v.re)
}

/// Direct-path cumulant of `S_n(f)` for U(n) in exact rational arithmetic.
pub fn cumulant_direct_unitary_exact(f: &PolyExact, n: u32, l: u32) -> Result<BigRational> {
    let v = direct_core(f, n, l)?;
    if !v.im.is_zero() {
        return Err(Error::numerical(
            "imaginary residue in exact cumulant (f not hermitian?)",
        ));
    }
    Ok(v.re)
}

/// Kernel-trace cumulant
/// `Σ_m Σ_comps ((-1)^{m-1}/m) ℓ!/(Πℓ_i!) trace(Π kernel_matrix(f^{ℓ_i}))`
/// for any of the four ensembles.
pub fn cumulant_trace(ensemble: Ensemble, f: &Poly64, l: u32) -> Result<f64> {
    check_order(l)?;
    if ensemble.rank() > RANK_CAP {
        return Err(Error::resource(format!(
            "kernel rank {} exceeds cap {RANK_CAP}",
            ensemble.rank()
        )));
    }
    if f.is_empty() {
        return Ok(0.0);
    }
    let l = l as usize;
    let mats: Vec<DMatrix<Complex64>> = (1..=l)
        .map(|a| kernel_matrix(ensemble, &f.convolve_power(a as u32)))
        .collect::<Result<_>>()?;
    let mut total = Complex64::new(0.0, 0.0);
    for comp in compositions(l) {
        let sizes = comp.part_sizes(l);
        let factors: Vec<&DMatrix<Complex64>> = sizes.iter().map(|&s| &mats[s - 1]).collect();
        let tr = trace_of_product(&factors);
        let sign = if comp.parts % 2 == 1 { 1.0 } else { -1.0 };
        let weight = sign * FACTORIALS[l] as f64 / (comp.parts as f64 * comp.prod_fact as f64);
        total += weight * tr;
    }
    let scale = total.re.abs().max(1.0);
    if total.im.abs() > 1e-8 * scale {
        return Err(Error::numerical(format!(
            "imaginary residue {:.3e} in trace cumulant",
            total.im
        )));
    }
    Ok(total.re)
}

fn matmul_exact(a: &[Vec<CExact>], b: &[Vec<CExact>]) -> Vec<Vec<CExact>> {
    let n = a.len();
    let mut out = vec![vec![<CExact as Coeff>::zero(); n]; n];
    for (i, row) in out.iter_mut().enumerate() {
        for (k, aik) in a[i].iter().enumerate() {
            if aik.is_zero() {
                continue;
            }
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = slot.add(&aik.mul(&b[k][j]));
            }
        }
    }
    out
}

/// Exact-rational kernel-trace cumulant for U(n); the matrix elements are
/// `M[j,k] = f̂^{a}(k - j)` with rational convolution powers.
pub fn cumulant_trace_exact_unitary(f: &PolyExact, n: u32, l: u32) -> Result<BigRational> {
    check_order(l)?;
    if !f.is_real_valued() {
        return Err(Error::validation("trace cumulant requires real-valued f"));
    }
    let n = n as usize;
    if n == 0 {
        return Err(Error::validation("n must be at least 1"));
    }
    if n > 64 {
        return Err(Error::resource(
            "exact trace path supports n up to 64 (rational matmul cost)",
        ));
    }
    let l = l as usize;
    let mats: Vec<Vec<Vec<CExact>>> = (1..=l)
        .map(|a| {
            let p = f.convolve_power(a as u32);
            (0..n)
                .map(|j| {
                    (0..n)
                        .map(|k| p.coeff(k as i64 - j as i64))
                        .collect::<Vec<_>>()
                })
                .collect()
        })
        .collect();
    let mut total = CExact::zero();
    for comp in compositions(l) {
        let sizes = comp.part_sizes(l);
        let mut prod = mats[sizes[0] - 1].clone();
        for &s in &sizes[1..] {
            prod = matmul_exact(&prod, &mats[s - 1]);
        }
        let mut tr = <CExact as Coeff>::zero();
        for (i, row) in prod.iter().enumerate() {
            tr = tr.add(&row[i]);
        }
        let sign: i64 = if comp.parts % 2 == 1 { 1 } else { -1 };
        let weight = BigRational::new(
            (sign * FACTORIALS[l]).into(),
            (comp.parts as i64 * comp.prod_fact).into(),
        );
        let weight_c = Complex::new(weight, BigRational::zero());
        total = total.add(&tr.mul(&weight_c));
    }
    if !total.im.is_zero() {
        return Err(Error::numerical("imaginary residue in exact trace cumulant"));
    }
    Ok(total.re)
}

/// Limiting cumulants.
///
/// Order 1 returns the exact mean decomposition `n·f̂(0) + shift`, where
/// the shift is 0 for U(n), `(1/2)Σ_{k≥1}(1+(-1)^k) f̂(k)` for SO(2n),
/// `(1/2)Σ_{k≥1}(-1+(-1)^k) f̂(k)` for SO(2n+1), and
/// `-(1/2)Σ_{k≥1}(1+(-1)^k) f̂(k)` for Sp(n). Order 2 returns
/// `Σ_k |k| |f̂(k)|²` for U(n) and `Σ_{k≥1} k f̂(k)²` otherwise; orders 3
/// and above return 0.
pub fn limit_cumulant(ensemble: Ensemble, f: &Poly64, l: u32) -> Result<f64> {
    if l == 0 {
        return Err(Error::validation("cumulant order must be at least 1"));
    }
    if !f.is_real_valued() {
        return Err(Error::validation("limit cumulant requires real-valued f"));
    }
    if !ensemble.is_unitary() && !f.is_even() {
        return Err(Error::validation(format!(
            "limit cumulant for {} requires even f",
            ensemble.group_name()
        )));
    }
    let n = ensemble.rank() as f64;
    match l {
        1 => {
            let bulk = n * f.coeff(0).re;
            let mut shift = 0.0;
            if !ensemble.is_unitary() {
                let deg = f.degree();
                for k in 1..=deg {
                    let parity = if k % 2 == 0 { 1.0 } else { -1.0 };
                    let base = match ensemble {
                        Ensemble::SpecialOrthogonalEven(_) => 1.0 + parity,
                        Ensemble::SpecialOrthogonalOdd(_) => -1.0 + parity,
                        Ensemble::Symplectic(_) => -(1.0 + parity),
                        Ensemble::Unitary(_) => unreachable!(),
                    };
                    shift += 0.5 * base * f.coeff(k).re;
                }
            }
            Ok(bulk + shift)
        }
        2 => {
            if ensemble.is_unitary() {
                let mut acc = 0.0;
                for (k, c) in f.iter() {
                    acc += k.abs() as f64 * c.norm_sqr();
                }
                Ok(acc)
            } else {
                let mut acc = 0.0;
                for k in 1..=f.degree() {
                    acc += k as f64 * f.coeff(k).re.powi(2);
                }
                Ok(acc)
            }
        }
        _ => Ok(0.0),
    }
}

/// Cumulant of the local statistic `Σ_j g(L(θ_j - θ0))` (periodized onto
/// the circle), by the kernel-trace route.
///
/// For SO/Sp the localized function is symmetrized to the even function
/// `g(L(θ-θ0)) + g(L(-θ-θ0))`, matching the statistic summed over the
/// full (conjugate-paired) spectrum; θ0 must lie strictly inside `(0, π)`.
pub fn local_cumulant(
    ensemble: Ensemble,
    g: &LocalTestFunction,
    big_l: f64,
    theta0: f64,
    l: u32,
) -> Result<f64> {
    if !ensemble.is_unitary() {
        let pi = std::f64::consts::PI;
        if !(theta0 > 0.0 && theta0 < pi) {
            return Err(Error::validation(format!(
                "theta0 must lie in (0, π) for {}, got {theta0}",
                ensemble.group_name()
            )));
        }
    }
    let n = ensemble.rank();
    let support = (big_l * g.support().value()).ceil() as usize;
    let band = n + support;
    let u = localize_periodized(g, big_l, theta0, band)?;
    if ensemble.is_unitary() {
        cumulant_trace(ensemble, &u, l)
    } else {
        let h = u.reflect_sum();
        cumulant_trace(ensemble, &h, l)
    }
}

/// Per-(ensemble, f, n, ℓ) record of the values from each computation path.
///
/// `max_abs_discrepancy` is the largest pairwise gap among the populated
/// finite-n paths (direct, trace, mgf); the limit column is informational
/// since it legitimately differs at small n.
#[derive(Debug, Clone, Serialize)]
pub struct CumulantReport {
    pub ensemble: String,
    pub n: u32,
    pub ell: u32,
    pub f: String,
    pub value_direct: Option<f64>,
    pub value_trace: f64,
    pub value_mgf: Option<f64>,
    pub value_limit: f64,
    pub max_abs_discrepancy: f64,
}

impl CumulantReport {
    pub fn new(
        ensemble: Ensemble,
        f_desc: String,
        n: u32,
        ell: u32,
        value_direct: Option<f64>,
        value_trace: f64,
        value_mgf: Option<f64>,
        value_limit: f64,
    ) -> Self {
        let mut finite = vec![value_trace];
        finite.extend(value_direct);
        finite.extend(value_mgf);
        let mut max_gap = 0.0f64;
        for i in 0..finite.len() {
            for j in i + 1..finite.len() {
                max_gap = max_gap.max((finite[i] - finite[j]).abs());
            }
        }
        CumulantReport {
            ensemble: ensemble.tag().to_string(),
            n,
            ell,
            f: f_desc,
            value_direct,
            value_trace,
            value_mgf,
            value_limit,
            max_abs_discrepancy: max_gap,
        }
    }
}
