/// Central-difference gradient of a scalar field on ℝᴺ.
pub fn finite_difference_gradient<F>(f: F, x: &[f64], step: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    assert!(step > 0.0, "finite-difference step must be positive");
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + step;
            let up = f(&probe);
            probe[i] = x[i] - step;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * step)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_at_one() {
        let g = finite_difference_gradient(|x| x[0] * x[0], &[1.0], 1e-3);
        assert!((g[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn constant_field_has_zero_gradient() {
        let g = finite_difference_gradient(|_| 3.5, &[0.1, -2.0, 4.0], 1e-4);
        assert!(g.iter().all(|&v| v == 0.0));
    }
}
