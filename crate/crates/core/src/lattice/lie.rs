use nalgebra::Matrix2;

use crate::C64;

pub type Mat2 = Matrix2<C64>;

pub fn zero2() -> Mat2 {
    Mat2::zeros()
}

pub fn identity2() -> Mat2 {
    Mat2::identity()
}

/// Pauli matrices σ₁, σ₂, σ₃.
pub fn pauli() -> [Mat2; 3] {
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    [
        Mat2::new(o, one, one, o),
        Mat2::new(o, -i, i, o),
        Mat2::new(one, o, o, -one),
    ]
}

/// Basis τ_a = −iσ_a/√2 of su(2): anti-Hermitian with Tr(τ_b* τ_a) = δ_ab.
#[derive(Clone, Debug)]
pub struct LieBasis {
    pub tau: [Mat2; 3],
}

impl Default for LieBasis {
    fn default() -> Self {
        let s = pauli();
        let f = C64::new(0.0, -std::f64::consts::FRAC_1_SQRT_2);
        LieBasis { tau: [s[0] * f, s[1] * f, s[2] * f] }
    }
}

impl LieBasis {
    /// Σ_a θ_a τ_a.
    pub fn combine(&self, theta: [f64; 3]) -> Mat2 {
        self.tau[0] * C64::new(theta[0], 0.0) + self.tau[1] * C64::new(theta[1], 0.0) + self.tau[2] * C64::new(theta[2], 0.0)
    }

    /// Real coordinates Tr(τ_a* m) of m in the τ basis.
    pub fn coordinates(&self, m: &Mat2) -> [f64; 3] {
        [0, 1, 2].map(|a| trace_inner(&self.tau[a], m).re)
    }

    /// Structure constants f_abc with [τ_a, τ_b] = Σ_c f_abc τ_c.
    pub fn structure_constant(&self, a: usize, b: usize, c: usize) -> f64 {
        let comm = self.tau[a] * self.tau[b] - self.tau[b] * self.tau[a];
        trace_inner(&self.tau[c], &comm).re
    }
}

/// Tr(x* y), antilinear in x.
pub fn trace_inner(x: &Mat2, y: &Mat2) -> C64 {
    (x.adjoint() * y).trace()
}

/// exp of a 2×2 matrix of the form Σ θ_a τ_a (closed form, SU(2)).
pub fn su2_exp(theta: [f64; 3]) -> Mat2 {
    let basis = LieBasis::default();
    let x = basis.combine(theta);
    // (Σθτ)² = −|θ|²/2 · 𝟙
    let r = (theta.iter().map(|t| t * t).sum::<f64>() / 2.0).sqrt();
    if r == 0.0 {
        return identity2();
    }
    identity2() * C64::new(r.cos(), 0.0) + x * C64::new(r.sin() / r, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_anti_hermitian_and_orthonormal() {
        let b = LieBasis::default();
        for a in 0..3 {
            assert!((b.tau[a].adjoint() + b.tau[a]).norm() < 1e-15);
            for c in 0..3 {
                let expect = if a == c { 1.0 } else { 0.0 };
                assert!((trace_inner(&b.tau[c], &b.tau[a]) - C64::new(expect, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn commutator_closes_with_real_structure_constants() {
        let b = LieBasis::default();
        for a in 0..3 {
            for c in 0..3 {
                let comm = b.tau[a] * b.tau[c] - b.tau[c] * b.tau[a];
                let rebuilt = b.combine([0, 1, 2].map(|e| b.structure_constant(a, c, e)));
                assert!((comm - rebuilt).norm() < 1e-14);
            }
        }
        assert!((b.structure_constant(0, 1, 2) - std::f64::consts::SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn su2_exp_is_special_unitary() {
        let g = su2_exp([0.3, -1.1, 0.7]);
        assert!((g.adjoint() * g - identity2()).norm() < 1e-14);
        assert!((g.determinant() - C64::new(1.0, 0.0)).norm() < 1e-14);
    }
}
