//! Moments of the coherent amplitude sum T = ‖h_1‖ + ‖h_2‖ + ‖h_3‖ and the
//! Gamma match for U = T^2 that drives the coverage formulas.

use crate::params::MomentMatch;
use crate::specfun::lgamma;

/// E[‖h‖^n] for an M-antenna Rayleigh vector: ‖h‖^2 ~ Gamma(M, 1), so the
/// n-th amplitude moment is Gamma(M + n/2) / Gamma(M).
pub fn nakagami_moment(m_antennas: u32, n: u32) -> f64 {
    let m = m_antennas as f64;
    (lgamma(m + n as f64 / 2.0) - lgamma(m)).exp()
}

/// E[T^n] for the sum of three i.i.d. amplitudes, by multinomial expansion.
pub fn sum_moment(m_antennas: u32, n: u32) -> f64 {
    let ln_fact = |k: u32| lgamma(k as f64 + 1.0);
    let mut total = 0.0;
    for k1 in 0..=n {
        for k2 in 0..=(n - k1) {
            let k3 = n - k1 - k2;
            let w = (ln_fact(n) - ln_fact(k1) - ln_fact(k2) - ln_fact(k3)).exp();
            total += w
                * nakagami_moment(m_antennas, k1)
                * nakagami_moment(m_antennas, k2)
                * nakagami_moment(m_antennas, k3);
        }
    }
    total
}

/// Gamma match for U = T^2: omega = E[U] and shape m_raw = E[U]^2 / Var(U),
/// rounded to the nearest integer shape m (at least 1) so the ensuing
/// distribution admits the finite Toeplitz representation.
pub fn moment_match(m_antennas: u32) -> MomentMatch {
    let omega = sum_moment(m_antennas, 2);
    let fourth = sum_moment(m_antennas, 4);
    let m_raw = omega * omega / (fourth - omega * omega);
    let m = m_raw.round().max(1.0) as u32;
    MomentMatch { omega, m_raw, m }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn amplitude_moments_single_antenna() {
        // ‖h‖ is Rayleigh(1/sqrt(2)): E = sqrt(pi)/2, E^2 = 1, E^3 = 3 sqrt(pi)/4
        assert_relative_eq!(nakagami_moment(1, 1), std::f64::consts::PI.sqrt() / 2.0, max_relative = 1e-14);
        assert_relative_eq!(nakagami_moment(1, 2), 1.0, max_relative = 1e-14);
        assert_relative_eq!(nakagami_moment(1, 3), 3.0 * std::f64::consts::PI.sqrt() / 4.0, max_relative = 1e-14);
        assert_relative_eq!(nakagami_moment(2, 2), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn sum_second_moment_closed_form() {
        // E[T^2] = 3 E[X^2] + 6 E[X]^2
        for m in 1..=4u32 {
            let want = 3.0 * nakagami_moment(m, 2) + 6.0 * nakagami_moment(m, 1).powi(2);
            assert_relative_eq!(sum_moment(m, 2), want, max_relative = 1e-13);
        }
    }

    #[test]
    fn match_values_are_stable() {
        let mm1 = moment_match(1);
        assert_relative_eq!(mm1.omega, 7.712389, max_relative = 1e-6);
        assert_relative_eq!(mm1.m_raw, 2.823321, max_relative = 1e-6);
        assert_eq!(mm1.m, 3);

        let mm2 = moment_match(2);
        assert_relative_eq!(mm2.omega, 16.602875, max_relative = 1e-6);
        assert_relative_eq!(mm2.m_raw, 5.790134, max_relative = 1e-6);
        assert_eq!(mm2.m, 6);

        assert_eq!(moment_match(3).m, 9);
        assert_relative_eq!(moment_match(3).omega, 25.566993, max_relative = 1e-6);
        assert_eq!(moment_match(4).m, 12);
        assert_relative_eq!(moment_match(4).omega, 34.549518, max_relative = 1e-6);
    }

    #[test]
    fn moments_against_monte_carlo() {
        use rand::SeedableRng;
        use rand_distr::Distribution;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let gamma_m = rand_distr::Gamma::<f64>::new(2.0, 1.0).unwrap();
        let n = 400_000;
        let mut s2 = 0.0;
        let mut s4 = 0.0;
        for _ in 0..n {
            let t: f64 = (0..3).map(|_| gamma_m.sample(&mut rng).sqrt()).sum();
            s2 += t * t;
            s4 += t.powi(4);
        }
        assert_relative_eq!(s2 / n as f64, sum_moment(2, 2), max_relative = 5e-3);
        assert_relative_eq!(s4 / n as f64, sum_moment(2, 4), max_relative = 2e-2);
    }
}
