//! The four classical compact groups, their projection-kernel bases, and
//! the matrix elements `∫ φ_j · h · φ_k` used by the trace and Fredholm
//! machinery.
//!
//! Eigenangle processes and their orthonormal bases on the ensemble domain:
//!
//! * `U(n)`: exponentials `e^{ijx}/√(2π)`, `j = 0..n-1` on the circle
//!   (kernel `Q_n`);
//! * `SO(2n)`: cosines `1/√π, √(2/π)·cos(jx)` on `[0, π]` (kernel `K⁺`);
//! * `SO(2n+1)`: half-integer sines `√(2/π)·sin((j+½)x)` (kernel `K⁻` at
//!   even index);
//! * `Sp(n)`: integer sines `√(2/π)·sin(jx)`, `j = 1..n`.

use nalgebra::DMatrix;
use num::complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fourier::Poly64;

/// Tagged choice of compact group; the parameter is the number of
/// independent eigenvalue angles (the rank of the projection kernel).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ensemble {
    /// U(n): n angles on the full circle `[-π, π)`.
    Unitary(u32),
    /// SO(2n): n angles in `[0, π]`, eigenvalues come in conjugate pairs.
    SpecialOrthogonalEven(u32),
    /// SO(2n+1): n angles in `[0, π]` plus the fixed eigenvalue 1.
    SpecialOrthogonalOdd(u32),
    /// Sp(n): n angles in `[0, π]`.
    Symplectic(u32),
}

impl Ensemble {
    /// Number of independent angles = rank of the projection kernel.
    pub fn rank(self) -> usize {
        match self {
            Ensemble::Unitary(n)
            | Ensemble::SpecialOrthogonalEven(n)
            | Ensemble::SpecialOrthogonalOdd(n)
            | Ensemble::Symplectic(n) => n as usize,
        }
    }

    pub fn is_unitary(self) -> bool {
        matches!(self, Ensemble::Unitary(_))
    }

    /// Domain of the angle coordinates.
    pub fn domain(self) -> (f64, f64) {
        if self.is_unitary() {
            (-PI, PI)
        } else {
            (0.0, PI)
        }
    }

    /// CLI/JSON tag: `u`, `so-even`, `so-odd`, `sp`.
    pub fn tag(self) -> &'static str {
        match self {
            Ensemble::Unitary(_) => "u",
            Ensemble::SpecialOrthogonalEven(_) => "so-even",
            Ensemble::SpecialOrthogonalOdd(_) => "so-odd",
            Ensemble::Symplectic(_) => "sp",
        }
    }

    pub fn from_tag(tag: &str, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::validation("ensemble rank must be at least 1"));
        }
        match tag {
            "u" => Ok(Ensemble::Unitary(n)),
            "so-even" => Ok(Ensemble::SpecialOrthogonalEven(n)),
            "so-odd" => Ok(Ensemble::SpecialOrthogonalOdd(n)),
            "sp" => Ok(Ensemble::Symplectic(n)),
            other => Err(Error::validation(format!(
                "unknown ensemble '{other}' (expected u|so-even|so-odd|sp)"
            ))),
        }
    }

    /// Group the angle process comes from, e.g. `SO(128)` for
    /// `SpecialOrthogonalEven(64)`.
    pub fn group_name(self) -> String {
        match self {
            Ensemble::Unitary(n) => format!("U({n})"),
            Ensemble::SpecialOrthogonalEven(n) => format!("SO({})", 2 * n),
            Ensemble::SpecialOrthogonalOdd(n) => format!("SO({})", 2 * n + 1),
            Ensemble::Symplectic(n) => format!("Sp({n})"),
        }
    }
}

/// Orthonormal basis inducing the ensemble's projection kernel.
#[derive(Debug, Clone, Copy)]
pub struct ProjectionBasis {
    ensemble: Ensemble,
}

impl ProjectionBasis {
    pub fn new(ensemble: Ensemble) -> Result<Self> {
        if ensemble.rank() == 0 {
            return Err(Error::validation("ensemble rank must be at least 1"));
        }
        Ok(ProjectionBasis { ensemble })
    }

    pub fn ensemble(&self) -> Ensemble {
        self.ensemble
    }

    pub fn rank(&self) -> usize {
        self.ensemble.rank()
    }

    /// Value of the `j`-th orthonormal basis function at `x`.
    pub fn phi(&self, j: usize, x: f64) -> Complex64 {
        debug_assert!(j < self.rank());
        match self.ensemble {
            Ensemble::Unitary(_) => {
                Complex64::from_polar(1.0, j as f64 * x) / (2.0 * PI).sqrt()
            }
            Ensemble::SpecialOrthogonalEven(_) => {
                if j == 0 {
                    Complex64::new(1.0 / PI.sqrt(), 0.0)
                } else {
                    Complex64::new((2.0 / PI).sqrt() * (j as f64 * x).cos(), 0.0)
                }
            }
            Ensemble::SpecialOrthogonalOdd(_) => Complex64::new(
                (2.0 / PI).sqrt() * ((j as f64 + 0.5) * x).sin(),
                0.0,
            ),
            Ensemble::Symplectic(_) => Complex64::new(
                (2.0 / PI).sqrt() * ((j as f64 + 1.0) * x).sin(),
                0.0,
            ),
        }
    }

    /// Kernel value `K(x, y) = Σ_j φ_j(x) conj(φ_j(y))` from the basis.
    pub fn kernel_from_basis(&self, x: f64, y: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..self.rank() {
            acc += self.phi(j, x) * self.phi(j, y).conj();
        }
        acc
    }

    /// Kernel diagonal `K(x, x)`, the one-point intensity of the process.
    pub fn kernel_diag(&self, x: f64) -> f64 {
        let n = self.rank();
        match self.ensemble {
            Ensemble::Unitary(_) => n as f64 / (2.0 * PI),
            Ensemble::SpecialOrthogonalEven(_) => {
                let mut acc = 1.0;
                for j in 1..n {
                    acc += 2.0 * (j as f64 * x).cos().powi(2);
                }
                acc / PI
            }
            Ensemble::SpecialOrthogonalOdd(_) => {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += ((j as f64 + 0.5) * x).sin().powi(2);
                }
                2.0 * acc / PI
            }
            Ensemble::Symplectic(_) => {
                let mut acc = 0.0;
                for j in 1..=n {
                    acc += (j as f64 * x).sin().powi(2);
                }
                2.0 * acc / PI
            }
        }
    }

    /// The paper-side closed forms of the kernels, built from Dirichlet
    /// ratios `sin(N u / 2) / sin(u / 2)`; used to validate the basis.
    pub fn kernel_closed_form(&self, x: f64, y: f64) -> Complex64 {
        let n = self.rank() as f64;
        match self.ensemble {
            Ensemble::Unitary(_) => {
                // Q_n(x,y) = e^{i (n-1)(x-y)/2} sin(n(x-y)/2) / (2π sin((x-y)/2))
                let u = x - y;
                let modulus = dirichlet_ratio(n, u) / (2.0 * PI);
                Complex64::from_polar(1.0, 0.5 * (n - 1.0) * u) * modulus
            }
            Ensemble::SpecialOrthogonalEven(_) => {
                let m = 2.0 * n - 1.0;
                let v = (dirichlet_ratio(m, x - y) + dirichlet_ratio(m, x + y)) / (2.0 * PI);
                Complex64::new(v, 0.0)
            }
            Ensemble::SpecialOrthogonalOdd(_) => {
                let m = 2.0 * n;
                let v = (dirichlet_ratio(m, x - y) - dirichlet_ratio(m, x + y)) / (2.0 * PI);
                Complex64::new(v, 0.0)
            }
            Ensemble::Symplectic(_) => {
                let m = 2.0 * n + 1.0;
                let v = (dirichlet_ratio(m, x - y) - dirichlet_ratio(m, x + y)) / (2.0 * PI);
                Complex64::new(v, 0.0)
            }
        }
    }
}

/// `sin(N u / 2) / sin(u / 2)` with the removable singularity filled in.
fn dirichlet_ratio(n: f64, u: f64) -> f64 {
    let s = (0.5 * u).sin();
    if s.abs() < 1e-9 {
        // u near a multiple of 2π
        n * (0.5 * n * u).cos() / (0.5 * u).cos()
    } else {
        (0.5 * n * u).sin() / s
    }
}

/// Matrix elements `M[j,k] = ∫ φ_j(x) h(x) φ_k(x) dx` over the ensemble
/// domain, via the closed forms in the Fourier coefficients of `h`.
///
/// `h` must be real-valued, and even for the non-unitary ensembles.
pub fn kernel_matrix(ensemble: Ensemble, h: &Poly64) -> Result<DMatrix<Complex64>> {
    if !h.is_real_valued() {
        return Err(Error::validation("kernel_matrix requires real-valued h"));
    }
    if !ensemble.is_unitary() && !h.is_even() {
        return Err(Error::validation(format!(
            "kernel_matrix for {} requires an even symbol",
            ensemble.group_name()
        )));
    }
    let n = ensemble.rank();
    let c = |m: i64| h.coeff(m);
    let matrix = match ensemble {
        Ensemble::Unitary(_) => {
            DMatrix::from_fn(n, n, |j, k| c(k as i64 - j as i64))
        }
        Ensemble::SpecialOrthogonalEven(_) => DMatrix::from_fn(n, n, |j, k| {
            if j == 0 && k == 0 {
                c(0)
            } else if j == 0 {
                2.0f64.sqrt() * c(k as i64)
            } else if k == 0 {
                2.0f64.sqrt() * c(j as i64)
            } else {
                c(j as i64 - k as i64) + c(j as i64 + k as i64)
            }
        }),
        Ensemble::SpecialOrthogonalOdd(_) => DMatrix::from_fn(n, n, |j, k| {
            c(j as i64 - k as i64) - c(j as i64 + k as i64 + 1)
        }),
        Ensemble::Symplectic(_) => DMatrix::from_fn(n, n, |j, k| {
            // 1-based sine labels
            c(j as i64 - k as i64) - c(j as i64 + k as i64 + 2)
        }),
    };
    Ok(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::cos_poly;
    use crate::quad::circle_trapezoid;
    use num::Zero;

    const ALL: [Ensemble; 4] = [
        Ensemble::Unitary(5),
        Ensemble::SpecialOrthogonalEven(5),
        Ensemble::SpecialOrthogonalOdd(5),
        Ensemble::Symplectic(5),
    ];

    #[test]
    fn basis_is_orthonormal_by_quadrature() {
        for ens in ALL {
            let basis = ProjectionBasis::new(ens).unwrap();
            let n = basis.rank();
            let half = !ens.is_unitary();
            for j in 0..n {
                for k in 0..n {
                    // products of basis functions are 2π-periodic with
                    // integer frequencies, so the circle rule applies; for
                    // the [0, π] ensembles the integrand is even and the
                    // domain integral is half the circle integral.
                    let integral = circle_trapezoid(512, |x| {
                        (basis.phi(j, x) * basis.phi(k, x).conj()).re
                    }) / if half { 2.0 } else { 1.0 };
                    let want = if j == k { 1.0 } else { 0.0 };
                    assert!(
                        (integral - want).abs() < 1e-12,
                        "{} phi_{j} phi_{k}: {integral}",
                        ens.group_name()
                    );
                }
            }
        }
    }

    #[test]
    fn basis_reproduces_closed_form_kernels() {
        let grid = [-2.9f64, -1.3, -0.4, 0.2, 0.9, 1.7, 2.6, 3.1];
        for ens in ALL {
            let basis = ProjectionBasis::new(ens).unwrap();
            let (lo, hi) = ens.domain();
            for &x in &grid {
                for &y in &grid {
                    if x < lo || x > hi || y < lo || y > hi {
                        continue;
                    }
                    let from_basis = basis.kernel_from_basis(x, y);
                    let closed = basis.kernel_closed_form(x, y);
                    assert!(
                        (from_basis - closed).norm() < 1e-10,
                        "{} at ({x},{y}): {from_basis} vs {closed}",
                        ens.group_name()
                    );
                }
            }
        }
    }

    #[test]
    fn kernel_diag_matches_basis_sum() {
        for ens in ALL {
            let basis = ProjectionBasis::new(ens).unwrap();
            for &x in &[0.1f64, 0.9, 2.2, 3.0] {
                let direct: f64 = (0..basis.rank())
                    .map(|j| basis.phi(j, x).norm_sqr())
                    .sum();
                assert!((basis.kernel_diag(x) - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kernel_matrix_of_one_is_identity() {
        let one = Poly64::make_poly([(0, Complex64::new(1.0, 0.0))]).unwrap();
        for ens in ALL {
            let m = kernel_matrix(ens, &one).unwrap();
            let n = ens.rank();
            for j in 0..n {
                for k in 0..n {
                    let want = if j == k { 1.0 } else { 0.0 };
                    assert!(
                        (m[(j, k)] - Complex64::new(want, 0.0)).norm() < 1e-14,
                        "{} ({j},{k})",
                        ens.group_name()
                    );
                }
            }
            assert!((m.trace().re - n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn kernel_matrix_closed_forms_match_quadrature() {
        // direct quadrature oracle for ∫ φ_j h φ_k over the domain
        let h = Poly64::make_poly([
            (0, Complex64::new(0.3, 0.0)),
            (1, Complex64::new(1.0, 0.0)),
            (-1, Complex64::new(1.0, 0.0)),
            (2, Complex64::new(-0.7, 0.0)),
            (-2, Complex64::new(-0.7, 0.0)),
        ])
        .unwrap();
        for ens in ALL {
            let basis = ProjectionBasis::new(ens).unwrap();
            let m = kernel_matrix(ens, &h).unwrap();
            let n = ens.rank();
            let half = !ens.is_unitary();
            for j in 0..n {
                for k in 0..n {
                    let integral = circle_trapezoid(1024, |x| {
                        (basis.phi(j, x) * h.eval_real(x) * basis.phi(k, x).conj()).re
                    }) / if half { 2.0 } else { 1.0 };
                    let im = circle_trapezoid(1024, |x| {
                        (basis.phi(j, x) * h.eval_real(x) * basis.phi(k, x).conj()).im
                    }) / if half { 2.0 } else { 1.0 };
                    let want = Complex64::new(integral, im);
                    assert!(
                        (m[(j, k)] - want).norm() < 1e-10,
                        "{} ({j},{k}): {} vs {want}",
                        ens.group_name(),
                        m[(j, k)]
                    );
                }
            }
        }
    }

    #[test]
    fn so_even_two_by_two_example() {
        // SO(2n) with h = 2 cos θ and n = 2: M[0,1] = √2, diagonal zero
        let m = kernel_matrix(Ensemble::SpecialOrthogonalEven(2), &cos_poly(1)).unwrap();
        assert!((m[(0, 1)].re - 2.0f64.sqrt()).abs() < 1e-14);
        assert!((m[(1, 0)].re - 2.0f64.sqrt()).abs() < 1e-14);
        assert!(m[(0, 0)].norm() < 1e-14);
        assert!(m[(1, 1)].norm() < 1e-14);
    }

    #[test]
    fn kernel_matrix_rejects_odd_symbols() {
        let odd = Poly64::make_poly([
            (1, Complex64::new(0.0, -1.0)),
            (-1, Complex64::new(0.0, 1.0)),
        ])
        .unwrap();
        assert!(kernel_matrix(Ensemble::Symplectic(3), &odd).is_err());
        assert!(kernel_matrix(Ensemble::Unitary(3), &odd).is_ok());
        let complex_poly = Poly64::make_poly([(1, Complex64::new(1.0, 0.0))]).unwrap();
        assert!(kernel_matrix(Ensemble::Unitary(3), &complex_poly).is_err());
    }

    #[test]
    fn ensemble_tags_round_trip() {
        for ens in ALL {
            let back = Ensemble::from_tag(ens.tag(), ens.rank() as u32).unwrap();
            assert_eq!(back, ens);
        }
        assert!(Ensemble::from_tag("q", 3).is_err());
        assert!(Ensemble::from_tag("u", 0).is_err());
    }
}
