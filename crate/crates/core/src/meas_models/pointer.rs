use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MAX_POINTER_DIM: usize = 64;

const HERMITIAN_TOLERANCE: f64 = 1e-10;

fn check_square(name: &str, m: &DMatrix<Complex64>, n: usize) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::InvalidInput(format!("{name} must be {n}x{n}, got {}x{}", m.nrows(), m.ncols())));
    }
    Ok(())
}

fn check_hermitian(m: &DMatrix<Complex64>) -> Result<()> {
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let dev = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if dev > HERMITIAN_TOLERANCE * scale {
        Err(Error::NonHermitian { max_deviation: dev })
    } else {
        Ok(())
    }
}

/// Pointer readout of observable A after evolving rho0 for time tbar under H.
/// The populations of A's eigenvectors are computed once; evaluating the
/// density at X is then a sum over the spectrum of A.
#[derive(Debug, Clone)]
pub struct PointerModel {
    eigenvalues: Vec<f64>,
    populations: Vec<f64>,
}

impl PointerModel {
    pub fn new(
        rho0: &DMatrix<Complex64>,
        h: &DMatrix<Complex64>,
        a: &DMatrix<Complex64>,
        tbar: f64,
    ) -> Result<Self> {
        let n = rho0.nrows();
        if n == 0 || n > MAX_POINTER_DIM {
            return Err(Error::InvalidInput(format!("dimension {n} outside 1..={MAX_POINTER_DIM}")));
        }
        check_square("rho0", rho0, n)?;
        check_square("H", h, n)?;
        check_square("A", a, n)?;
        check_hermitian(rho0)?;
        check_hermitian(h)?;
        check_hermitian(a)?;
        let trace = rho0.trace();
        if (trace.re - 1.0).abs() > HERMITIAN_TOLERANCE || trace.im.abs() > HERMITIAN_TOLERANCE {
            return Err(Error::NonPositiveState(format!("trace = {trace}")));
        }
        let rho_eig = SymmetricEigen::new(rho0.clone());
        if let Some(min) = rho_eig.eigenvalues.iter().copied().reduce(f64::min) {
            if min < -HERMITIAN_TOLERANCE {
                return Err(Error::NonPositiveState(format!("eigenvalue {min:e} < 0")));
            }
        }

        let h_eig = SymmetricEigen::new(h.clone());
        let phases = DMatrix::from_diagonal(&h_eig.eigenvalues.map(|e| Complex64::from_polar(1.0, -e * tbar)));
        let evolution = &h_eig.eigenvectors * phases * h_eig.eigenvectors.adjoint();
        let rho_t = &evolution * rho0 * evolution.adjoint();

        let a_eig = SymmetricEigen::new(a.clone());
        let in_a = a_eig.eigenvectors.adjoint() * rho_t * &a_eig.eigenvectors;
        Ok(Self {
            eigenvalues: a_eig.eigenvalues.iter().copied().collect(),
            populations: (0..n).map(|k| in_a[(k, k)].re).collect(),
        })
    }

    /// sum_a w(X - a) <a| rho(tbar) |a>
    pub fn density<W: Fn(f64) -> f64>(&self, w: W, x: f64) -> f64 {
        self.eigenvalues.iter().zip(&self.populations).map(|(a, p)| w(x - a) * p).sum()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Probabilities of the eigenvalues of A, in the order of [`eigenvalues`](Self::eigenvalues).
    pub fn populations(&self) -> &[f64] {
        &self.populations
    }
}

/// Tr(e^{-iH tbar} rho0 e^{iH tbar} w(X - A)).
pub fn von_neumann_pointer_prob<W: Fn(f64) -> f64>(
    rho0: &DMatrix<Complex64>,
    h: &DMatrix<Complex64>,
    a: &DMatrix<Complex64>,
    w: W,
    x: f64,
    tbar: f64,
) -> Result<f64> {
    Ok(PointerModel::new(rho0, h, a, tbar)?.density(w, x))
}

/// Normalized Gaussian pointer profile of standard deviation `width`.
pub fn gaussian_pointer(width: f64) -> impl Fn(f64) -> f64 + Copy {
    let norm = 1.0 / ((2.0 * PI).sqrt() * width);
    move |x| norm * (-x * x / (2.0 * width * width)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate_breakpoints, QuadOptions};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_hermitian(rng: &mut StdRng, n: usize) -> DMatrix<Complex64> {
        let g = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
    }

    fn random_state(rng: &mut StdRng, n: usize) -> DMatrix<Complex64> {
        let g = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let rho = &g * g.adjoint();
        let tr = rho.trace();
        rho / tr
    }

    fn pure(v: &[Complex64]) -> DMatrix<Complex64> {
        let col = nalgebra::DVector::from_column_slice(v);
        let norm = col.norm();
        let col = col / Complex64::new(norm, 0.0);
        &col * col.adjoint()
    }

    // exp(-i H t) psi by Taylor series, independent of any eigensolver.
    fn evolve_taylor(h: &DMatrix<Complex64>, psi: &nalgebra::DVector<Complex64>, t: f64) -> nalgebra::DVector<Complex64> {
        let steps = 64;
        let dt = t / steps as f64;
        let mut out = psi.clone();
        for _ in 0..steps {
            let mut term = out.clone();
            let mut acc = out.clone();
            for k in 1..30 {
                term = h * term * Complex64::new(0.0, -dt / k as f64);
                acc += &term;
            }
            out = acc;
        }
        out
    }

    #[test]
    fn stationary_eigenstate() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(2.0, 0.0),
        ]));
        let h = DMatrix::zeros(3, 3);
        let rho = pure(&[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let w = gaussian_pointer(0.3);
        for x in [-1.0, 0.0, 0.5, 0.9, 3.0] {
            let p = von_neumann_pointer_prob(&rho, &h, &a, w, x, 1.7).unwrap();
            assert!((p - w(x - 0.5)).abs() < 1e-13);
        }
    }

    #[test]
    fn narrow_pointer_gives_squared_amplitudes() {
        let mut rng = StdRng::seed_from_u64(7);
        let n = 4;
        let h = random_hermitian(&mut rng, n);
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(
            (0..n).map(|k| Complex64::new(k as f64, 0.0)).collect(),
        ));
        let psi0 = nalgebra::DVector::from_fn(n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let psi0 = &psi0 / Complex64::new(psi0.norm(), 0.0);
        let rho = &psi0 * psi0.adjoint();
        let t = 2.3;
        let psi_t = evolve_taylor(&h, &psi0, t);
        // Spectral gaps of A are 1; the pointer width is 1e-4 of that.
        let width = 1e-4;
        let w = gaussian_pointer(width);
        let model = PointerModel::new(&rho, &h, &a, t).unwrap();
        for k in 0..n {
            let x = k as f64;
            let mass = model.density(w, x) * (2.0 * PI).sqrt() * width;
            assert!((mass - psi_t[k].norm_sqr()).abs() < 1e-10, "level {k}");
        }
    }

    #[test]
    fn random_instance_normalized() {
        let mut rng = StdRng::seed_from_u64(11);
        let n = 4;
        let h = random_hermitian(&mut rng, n);
        let a = random_hermitian(&mut rng, n);
        let rho = random_state(&mut rng, n);
        let w = gaussian_pointer(0.2);
        let model = PointerModel::new(&rho, &h, &a, 0.9).unwrap();
        let mut cuts: Vec<f64> = model.eigenvalues().to_vec();
        cuts.sort_by(f64::total_cmp);
        let lo = cuts[0] - 3.0;
        let hi = cuts[n - 1] + 3.0;
        let mut points = vec![lo];
        points.extend(cuts);
        points.push(hi);
        let total = integrate_breakpoints(|x| model.density(w, x), &points, &QuadOptions::relative(1e-12).with_panels(4))
            .unwrap()
            .value;
        assert!((total - 1.0).abs() < 1e-8);
    }

    #[test]
    fn linear_in_state() {
        let mut rng = StdRng::seed_from_u64(3);
        let n = 5;
        let h = random_hermitian(&mut rng, n);
        let a = random_hermitian(&mut rng, n);
        let r1 = random_state(&mut rng, n);
        let r2 = random_state(&mut rng, n);
        let w = gaussian_pointer(0.4);
        for &w1 in &[0.1, 0.5, 0.77] {
            let mix = &r1 * Complex64::new(w1, 0.0) + &r2 * Complex64::new(1.0 - w1, 0.0);
            for x in [-1.0, 0.2, 1.3] {
                let p = von_neumann_pointer_prob(&mix, &h, &a, w, x, 1.1).unwrap();
                let q = w1 * von_neumann_pointer_prob(&r1, &h, &a, w, x, 1.1).unwrap()
                    + (1.0 - w1) * von_neumann_pointer_prob(&r2, &h, &a, w, x, 1.1).unwrap();
                assert!((p - q).abs() < 1e-13 * q.abs().max(1e-3));
            }
        }
    }

    #[test]
    fn rejects_bad_operators() {
        let mut rng = StdRng::seed_from_u64(5);
        let n = 3;
        let a = random_hermitian(&mut rng, n);
        let rho = random_state(&mut rng, n);
        let mut h = random_hermitian(&mut rng, n);
        h[(0, 1)] += Complex64::new(0.5, 0.0);
        assert!(matches!(PointerModel::new(&rho, &h, &a, 1.0), Err(Error::NonHermitian { .. })));
        let h = random_hermitian(&mut rng, n);
        let not_positive = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(1.5, 0.0),
            Complex64::new(-0.5, 0.0),
            Complex64::new(0.0, 0.0),
        ]));
        assert!(matches!(PointerModel::new(&not_positive, &h, &a, 1.0), Err(Error::NonPositiveState(_))));
        let big = DMatrix::<Complex64>::identity(65, 65) / Complex64::new(65.0, 0.0);
        assert!(PointerModel::new(&big, &big, &big, 1.0).is_err());
    }
}
