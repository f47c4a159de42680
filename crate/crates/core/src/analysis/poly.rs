//! Monic cubics arising from the per-mode loop `(s+b1)(s+b2+v)(s+b3) - k`,
//! their Routh-Hurwitz classification and explicit roots.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::spectral::SpectralDecomposition;
use crate::model::GoodwinParams;

/// Absolute tolerance for the Routh-Hurwitz boundary equalities.
pub const HURWITZ_TOL: f64 = 1e-9;

/// `s^3 + c2 s^2 + c1 s + c0`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cubic {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    StrictlyStable,
    Marginal,
    Unstable,
}

impl Cubic {
    pub fn new(c2: f64, c1: f64, c0: f64) -> Self {
        Self { c2, c1, c0 }
    }

    /// Expands `(s + r1)(s + r2)(s + r3) - gain`.
    pub fn from_loop(r1: f64, r2: f64, r3: f64, gain: f64) -> Self {
        Self {
            c2: r1 + r2 + r3,
            c1: r1 * r2 + r1 * r3 + r2 * r3,
            c0: r1 * r2 * r3 - gain,
        }
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        ((s + self.c2) * s + self.c1) * s + self.c0
    }

    fn eval_real(&self, x: f64) -> f64 {
        ((x + self.c2) * x + self.c1) * x + self.c0
    }

    fn deriv_real(&self, x: f64) -> f64 {
        (3.0 * x + 2.0 * self.c2) * x + self.c1
    }

    pub fn classify(&self) -> Stability {
        routh_hurwitz_cubic(self.c2, self.c1, self.c0)
    }

    /// All three roots: the real root first, then the remaining pair
    /// ordered by imaginary part (negative first).
    pub fn roots(&self) -> [Complex64; 3] {
        let r = self.real_root();
        // deflate: s^2 + (c2 + r) s + (c1 + r (c2 + r))
        let b = self.c2 + r;
        let c = self.c1 + r * b;
        let (q1, q2) = quadratic_roots(b, c);
        let mut pair = [self.polish(q1), self.polish(q2)];
        if pair[0].im.abs() > 0.0
            && (pair[0].im - (-pair[1].im)).abs() < 1e-12 * (1.0 + pair[0].norm())
        {
            // keep the pair exactly conjugate
            let re = 0.5 * (pair[0].re + pair[1].re);
            let im = 0.5 * (pair[0].im.abs() + pair[1].im.abs());
            pair = [Complex64::new(re, -im), Complex64::new(re, im)];
        }
        pair.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
        [Complex64::new(r, 0.0), pair[0], pair[1]]
    }

    /// A real root by safeguarded Newton on the Cauchy bracket.
    fn real_root(&self) -> f64 {
        let bound = 1.0 + self.c2.abs().max(self.c1.abs()).max(self.c0.abs());
        let (mut lo, mut hi) = (-bound, bound);
        // p(lo) < 0 < p(hi) for a monic cubic on the Cauchy bound
        let mut x = -self.c2 / 3.0;
        for _ in 0..200 {
            let fx = self.eval_real(x);
            if fx == 0.0 {
                return x;
            }
            if fx < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let d = self.deriv_real(x);
            let mut next = if d != 0.0 { x - fx / d } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 4.0 * f64::EPSILON * (1.0 + x.abs()) {
                return next;
            }
            x = next;
        }
        x
    }

    fn polish(&self, mut z: Complex64) -> Complex64 {
        for _ in 0..3 {
            let d = (Complex64::new(3.0, 0.0) * z + 2.0 * self.c2) * z + self.c1;
            if d.norm() == 0.0 {
                break;
            }
            let step = self.eval(z) / d;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            z -= step;
        }
        z
    }
}

fn quadratic_roots(b: f64, c: f64) -> (Complex64, Complex64) {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        // cancellation-free form
        let q = -0.5 * (b + b.signum() * sq);
        if q == 0.0 {
            return (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        }
        (Complex64::new(q, 0.0), Complex64::new(c / q, 0.0))
    } else {
        let re = -0.5 * b;
        let im = 0.5 * (-disc).sqrt();
        (Complex64::new(re, -im), Complex64::new(re, im))
    }
}

/// Routh-Hurwitz classification of `s^3 + c2 s^2 + c1 s + c0`.
///
/// Strictly stable iff `c2 > 0`, `c0 > 0` and `c2 c1 > c0`. Marginal when one
/// of the boundary equalities `c0 = 0` or `c2 c1 = c0` holds to
/// [`HURWITZ_TOL`] and nothing is violated beyond it.
pub fn routh_hurwitz_cubic(c2: f64, c1: f64, c0: f64) -> Stability {
    let hurwitz = c2 * c1 - c0;
    let on_boundary = c0.abs() <= HURWITZ_TOL || hurwitz.abs() <= HURWITZ_TOL;
    if c2 > HURWITZ_TOL && c0 >= -HURWITZ_TOL && hurwitz >= -HURWITZ_TOL && on_boundary {
        Stability::Marginal
    } else if c2 > 0.0 && c0 > 0.0 && hurwitz > 0.0 {
        Stability::StrictlyStable
    } else {
        Stability::Unstable
    }
}

/// Characteristic cubics of every Laplacian mode with the nonlinearity
/// replaced by the constant gain `gain`.
///
/// Index 0 is the consensus mode `(s+b1)(s+b2)(s+b3) - gain`; index `j >= 1`
/// uses `b2 + v_j` with `v_j` the `j`-th Laplacian eigenvalue.
pub fn mode_pole_polynomials(
    g: &GoodwinParams,
    gain: f64,
    spectrum: &SpectralDecomposition,
) -> Vec<Cubic> {
    std::iter::once(0.0)
        .chain(spectrum.transverse_eigenvalues().iter().copied())
        .map(|v| Cubic::from_loop(g.b1, g.b2 + v, g.b3, gain))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn companion_roots(c: &Cubic) -> Vec<Complex64> {
        let m = nalgebra::Matrix3::new(
            -c.c2, -c.c1, -c.c0, //
            1.0, 0.0, 0.0, //
            0.0, 1.0, 0.0,
        );
        m.complex_eigenvalues().iter().copied().collect()
    }

    fn assert_same_roots(got: &[Complex64], want: &[Complex64], tol: f64) {
        for w in want {
            let nearest = got
                .iter()
                .map(|g| (g - w).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < tol, "root {w} missing from {got:?}");
        }
    }

    #[test]
    fn unit_triple_pole() {
        let c = Cubic::from_loop(1.0, 1.0, 1.0, 0.0);
        assert_eq!(c, Cubic::new(3.0, 3.0, 1.0));
        assert_eq!(c.classify(), Stability::StrictlyStable);
        // triple roots are ill-conditioned: eps^(1/3)
        for r in c.roots() {
            assert!((r + 1.0).norm() < 1e-4, "{r}");
        }
    }

    #[test]
    fn unit_gain_puts_root_at_origin() {
        let c = Cubic::from_loop(1.0, 1.0, 1.0, 1.0);
        assert_eq!(c.c0, 0.0);
        assert_eq!(c.classify(), Stability::Marginal);
    }

    #[test]
    fn boundary_cases() {
        assert_eq!(routh_hurwitz_cubic(1.0, 0.0, 0.0), Stability::Marginal);
        assert_eq!(
            routh_hurwitz_cubic(3.0, 3.0, 1.0),
            Stability::StrictlyStable
        );
        assert_eq!(routh_hurwitz_cubic(1.0, 1.0, 2.0), Stability::Unstable);
        assert_eq!(routh_hurwitz_cubic(-1.0, 1.0, 0.5), Stability::Unstable);
        assert_eq!(routh_hurwitz_cubic(1.0, 1.0, -0.5), Stability::Unstable);
        let b: f64 = 0.5;
        let c = Cubic::from_loop(b, b, b, -8.0 * b.powi(3));
        assert_abs_diff_eq!(c.c2 * c.c1, c.c0, epsilon = 1e-15);
        assert_eq!(c.classify(), Stability::Marginal);
    }

    #[test]
    fn imaginary_pair_factorization() {
        for b in [0.3_f64, 0.5, 1.7] {
            let c = Cubic::from_loop(b, b, b, -8.0 * b.powi(3));
            let r = c.roots();
            let w = 3f64.sqrt() * b;
            assert_abs_diff_eq!(r[0].re, -3.0 * b, epsilon = 1e-12);
            assert_abs_diff_eq!(r[1].im, -w, epsilon = 1e-12);
            assert_abs_diff_eq!(r[2].im, w, epsilon = 1e-12);
            assert!(r[1].re.abs() < 1e-12 && r[2].re.abs() < 1e-12);
        }
    }

    #[test]
    fn zero_root_with_stable_pair() {
        // (s + 0.5)^3 - 0.125 = s^3 + 1.5 s^2 + 0.75 s
        let c = Cubic::from_loop(0.5, 0.5, 0.5, 0.125);
        let r = c.roots();
        let zero = r.iter().filter(|z| z.norm() < 1e-12).count();
        assert_eq!(zero, 1);
        let want = [
            Complex64::new(0.0, 0.0),
            Complex64::new(-0.75, -(0.75f64 - 0.5625).sqrt()),
            Complex64::new(-0.75, (0.75f64 - 0.5625).sqrt()),
        ];
        assert_same_roots(&r, &want, 1e-12);
    }

    #[test]
    fn roots_agree_with_companion_eigenvalues() {
        let cases = [
            Cubic::new(1.2, -3.4, 0.7),
            Cubic::new(0.0, 0.0, -8.0),
            Cubic::new(6.0, 11.0, 6.0),
            Cubic::from_loop(0.7, 3.1, 0.9, -4.2),
            Cubic::from_loop(0.2, 0.2, 0.2, 0.5),
        ];
        for c in cases {
            let r = c.roots();
            for z in r {
                assert!(c.eval(z).norm() < 1e-10, "{c:?} {z}");
            }
            assert_same_roots(&r, &companion_roots(&c), 1e-8);
        }
    }
}
