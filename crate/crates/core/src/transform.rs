//! Converting a discrete Laplace release into a continuous one.
//!
//! If `η ~ DLap(p)` and `Y` is an independent draw from a suitable *bridge*
//! density on `[-1, 1]`, then `η + Y` follows a continuous law. Two bridges
//! are provided: one that yields the Laplace density `(ln(1/p)/2)·p^|z|` and a
//! two-step one that yields the Staircase density `f_γ`. Both only touch the
//! released values, never the underlying data, so privacy is preserved.

use rand::Rng;

use crate::dlap::{pmf_unchecked, NoisyVector};
use crate::{Error, Result};

fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("p must lie in (0, 1), got {p}")))
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if (0.0..=0.5).contains(&gamma) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "staircase shape must lie in [0, 1/2], got {gamma}"
        )))
    }
}

/// Laplace density `(ln(1/p)/2)·p^|z|`, the law of `η + Y` for the Laplace
/// bridge.
pub fn laplace_density(z: f64, p: f64) -> f64 {
    -p.ln() / 2.0 * p.powf(z.abs())
}

pub fn laplace_cdf(z: f64, p: f64) -> f64 {
    if z < 0.0 {
        0.5 * p.powf(-z)
    } else {
        1.0 - 0.5 * p.powf(z)
    }
}

/// Bridge density for the Laplace target:
/// `ln(1/p)/(2(1-p)²) · (p^|y| - p^(2-|y|))` on `|y| ≤ 1`, zero outside.
pub fn q_lap_density(y: f64, p: f64) -> f64 {
    let a = y.abs();
    if a > 1.0 {
        return 0.0;
    }
    let q = 1.0 - p;
    -p.ln() / (2.0 * q * q) * (p.powf(a) - p.powf(2.0 - a))
}

/// Distribution function of the Laplace bridge.
pub fn bridge_laplace_cdf(y: f64, p: f64) -> f64 {
    if y <= -1.0 {
        return 0.0;
    }
    if y >= 1.0 {
        return 1.0;
    }
    let a = y.abs();
    let q = 1.0 - p;
    // mass of [0, a]
    let half = (1.0 + p * p - p.powf(a) - p.powf(2.0 - a)) / (2.0 * q * q);
    if y < 0.0 {
        0.5 - half
    } else {
        0.5 + half
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeLaplace {
    p: f64,
}

impl BridgeLaplace {
    pub fn new(p: f64) -> Result<Self> {
        check_p(p)?;
        Ok(BridgeLaplace { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn normalizer(&self) -> f64 {
        let q = 1.0 - self.p;
        -self.p.ln() / (2.0 * q * q)
    }

    pub fn density(&self, y: f64) -> f64 {
        q_lap_density(y, self.p)
    }

    pub fn cdf(&self, y: f64) -> f64 {
        bridge_laplace_cdf(y, self.p)
    }

    /// Exact draw by inverting the distribution function.
    ///
    /// With `w = p^|y|`, the mass of `[0, |y|]` equals `v/2` exactly when
    /// `w² - C w + p² = 0` for `C = 1 + p² - v(1-p)²`; the larger root lies in
    /// `[p, 1]`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let p = self.p;
        let q2 = (1.0 - p) * (1.0 - p);
        let v: f64 = rng.random();
        let c = 1.0 + p * p - v * q2;
        let disc = q2 * (1.0 - v) * (c + 2.0 * p);
        let w = ((c + disc.sqrt()) / 2.0).clamp(p, 1.0);
        let y = w.ln() / p.ln();
        if rng.random::<bool>() {
            y
        } else {
            -y
        }
    }

    /// Rejection sampling from the uniform envelope of height `q(0)`; kept as
    /// an independent check on [`BridgeLaplace::sample`].
    pub fn sample_rejection<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let top = self.density(0.0);
        loop {
            let y: f64 = rng.random_range(-1.0..=1.0);
            let u: f64 = rng.random::<f64>() * top;
            if u < self.density(y) {
                return y;
            }
        }
    }
}

/// Draws from the Laplace bridge with parameter `p`.
pub fn sample_bridge_laplace<R: Rng + ?Sized>(p: f64, rng: &mut R) -> Result<f64> {
    Ok(BridgeLaplace::new(p)?.sample(rng))
}

/// Adds an independent Laplace-bridge draw to every coordinate; each output
/// coordinate is then Laplace distributed around the true value.
pub fn to_laplace<R: Rng + ?Sized>(noisy: &NoisyVector, rng: &mut R) -> Vec<f64> {
    let bridge = BridgeLaplace {
        p: noisy.params().p(),
    };
    noisy
        .values()
        .iter()
        .map(|&v| v as f64 + bridge.sample(rng))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeStaircase {
    p: f64,
    gamma: f64,
}

impl BridgeStaircase {
    pub fn new(p: f64, gamma: f64) -> Result<Self> {
        check_p(p)?;
        check_gamma(gamma)?;
        Ok(BridgeStaircase { p, gamma })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    fn denominator(&self) -> f64 {
        2.0 * (self.gamma + self.p * (1.0 - self.gamma))
    }

    /// Height on `|y| < γ`.
    pub fn inner_height(&self) -> f64 {
        (1.0 + self.p) / self.denominator()
    }

    /// Height on `γ ≤ |y| ≤ 1 - γ`.
    pub fn outer_height(&self) -> f64 {
        self.p / self.denominator()
    }

    pub fn inner_weight(&self) -> f64 {
        2.0 * self.gamma * self.inner_height()
    }

    pub fn density(&self, y: f64) -> f64 {
        self.density_split(y, 0.0)
    }

    /// Density at the exact point `hi + lo`, with the region boundaries `γ`
    /// and `1 - γ` compared without rounding.
    fn density_split(&self, hi: f64, lo: f64) -> f64 {
        let (a, e) = if hi < 0.0 || (hi == 0.0 && lo < 0.0) {
            (-hi, -lo)
        } else {
            (hi, lo)
        };
        let g = self.gamma;
        if a < g || (a == g && e < 0.0) {
            return self.inner_height();
        }
        let (t, f) = two_sum(1.0, -g);
        if a < t || (a == t && e <= f) {
            self.outer_height()
        } else {
            0.0
        }
    }

    /// Picks the inner or outer uniform component by weight, then a uniform
    /// point inside it.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let g = self.gamma;
        if rng.random::<f64>() < self.inner_weight() {
            return rng.random_range(-g..g);
        }
        let a = if g < 0.5 {
            rng.random_range(g..=1.0 - g)
        } else {
            0.5
        };
        if rng.random::<bool>() {
            a
        } else {
            -a
        }
    }
}

/// Staircase bridge density: inner height on `|y| < γ`, outer height on
/// `γ ≤ |y| ≤ 1-γ`, zero elsewhere.
pub fn q_staircase_density(y: f64, p: f64, gamma: f64) -> Result<f64> {
    Ok(BridgeStaircase::new(p, gamma)?.density(y))
}

pub fn sample_bridge_staircase<R: Rng + ?Sized>(p: f64, gamma: f64, rng: &mut R) -> Result<f64> {
    Ok(BridgeStaircase::new(p, gamma)?.sample(rng))
}

/// Adds an independent staircase-bridge draw to every coordinate; each output
/// coordinate then has the Staircase density [`staircase_density`] around the
/// true value.
pub fn to_staircase<R: Rng + ?Sized>(
    noisy: &NoisyVector,
    gamma: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let bridge = BridgeStaircase::new(noisy.params().p(), gamma)?;
    Ok(noisy
        .values()
        .iter()
        .map(|&v| v as f64 + bridge.sample(rng))
        .collect())
}

/// `Σ_{|k| ≤ radius} pmf(p, k) · q_γ(z - k)` for the staircase bridge, with
/// every `z - k` kept exact so that points on a step of `f_γ` are assigned to
/// the same side as [`staircase_density`] assigns them.
pub fn convolve_staircase(bridge: &BridgeStaircase, z: f64, radius: i64) -> f64 {
    (-radius..=radius)
        .map(|k| {
            let (hi, lo) = two_sum(z, -(k as f64));
            pmf_unchecked(bridge.p, k) * bridge.density_split(hi, lo)
        })
        .sum()
}

/// `a + b` as an unevaluated pair `(s, e)` with `s = fl(a + b)` and
/// `s + e = a + b` exactly.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Level `a_γ = (1-p) / (2(γ + p(1-γ)))` of the Staircase density.
pub fn staircase_level(p: f64, gamma: f64) -> f64 {
    (1.0 - p) / (2.0 * (gamma + p * (1.0 - gamma)))
}

/// Staircase density `f_γ`: for `z ≥ 0` with `z = n + u`, it is `a_γ·pⁿ` when
/// `u < γ` and `a_γ·p^(n+1)` otherwise; symmetric in `z`.
pub fn staircase_density(z: f64, p: f64, gamma: f64) -> f64 {
    let a = z.abs();
    let n = a.floor();
    let u = a - n;
    let exp = if u < gamma { n } else { n + 1.0 };
    staircase_level(p, gamma) * p.powf(exp)
}

pub fn staircase_cdf(z: f64, p: f64, gamma: f64) -> f64 {
    let a = z.abs();
    let n = a.floor();
    let u = a - n;
    let level = staircase_level(p, gamma);
    let pn = p.powf(n);
    // every full unit cell [m, m+1) holds (1-p)·p^m / 2
    let full = (1.0 - pn) / 2.0;
    let partial = if u < gamma {
        level * pn * u
    } else {
        level * pn * (gamma + p * (u - gamma))
    };
    let upper = 0.5 + full + partial;
    if z < 0.0 {
        1.0 - upper
    } else {
        upper
    }
}

/// Density of `η + Y` for a symmetric bridge density `q` on `[-1, 1]`:
/// `(1-p)/(1+p)·pⁿ·(q(u) + p·q(u-1))` at `|z| = n + u`, `u ∈ [0, 1)`.
pub fn convolved_density(q: impl Fn(f64) -> f64, p: f64, z: f64) -> f64 {
    let a = z.abs();
    let n = a.floor();
    let u = a - n;
    (1.0 - p) / (1.0 + p) * p.powf(n) * (q(u) + p * q(u - 1.0))
}

/// `Σ_{|k| ≤ radius} pmf(p, k) · q(z - k)`, the convolution evaluated term by
/// term.
pub fn convolve_direct(q: impl Fn(f64) -> f64, p: f64, z: f64, radius: i64) -> f64 {
    (-radius..=radius)
        .map(|k| pmf_unchecked(p, k) * q(z - k as f64))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use crate::PrivacyParams;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn laplace_bridge_vanishes_at_edges_and_integrates_to_one() {
        for p in [0.1, 0.5, 0.9] {
            assert_eq!(q_lap_density(1.0, p), 0.0);
            assert_eq!(q_lap_density(-1.0, p), 0.0);
            let mass = simpson(|y| q_lap_density(y, p), -1.0, 1.0, 20_000);
            assert!((mass - 1.0).abs() < 1e-9, "p={p} mass={mass}");
        }
    }

    #[test]
    fn laplace_bridge_shift_identity() {
        let p: f64 = 0.3;
        let k = (1.0 + p) * (-p.ln()) / (2.0 * (1.0 - p));
        for i in 0..100 {
            let u = i as f64 / 100.0;
            let lhs = q_lap_density(u, p) + p * q_lap_density(1.0 - u, p);
            assert!((lhs - k * p.powf(u)).abs() < 1e-12);
        }
    }

    #[test]
    fn cdf_matches_quadrature() {
        let p = 0.4;
        for y in [-0.9, -0.3, 0.0, 0.25, 0.8] {
            // split at the kink in 0
            let num = if y <= 0.0 {
                simpson(|t| q_lap_density(t, p), -1.0, y, 20_000)
            } else {
                0.5 + simpson(|t| q_lap_density(t, p), 0.0, y, 20_000)
            };
            assert!((num - bridge_laplace_cdf(y, p)).abs() < 1e-9);
        }
    }

    #[test]
    fn inverse_cdf_samples_stay_in_support() {
        let b = BridgeLaplace::new(0.6).unwrap();
        let mut rng = stream_rng(1, 0);
        for _ in 0..10_000 {
            let y = b.sample(&mut rng);
            assert!((-1.0..=1.0).contains(&y));
        }
    }

    #[test]
    fn inverse_cdf_round_trip() {
        // Sampling with a fixed uniform must land where the CDF says.
        let p: f64 = 0.45;
        let q2 = (1.0 - p) * (1.0 - p);
        for i in 1..20 {
            let v = i as f64 / 20.0;
            let c = 1.0 + p * p - v * q2;
            let w = (c + (q2 * (1.0 - v) * (c + 2.0 * p)).sqrt()) / 2.0;
            let y = w.ln() / p.ln();
            assert!((bridge_laplace_cdf(y, p) - (0.5 + v / 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn convolution_gives_laplace() {
        for p in [(-0.5f64).exp(), (-2.0f64).exp()] {
            for i in -300..=300 {
                let z = i as f64 / 50.0;
                let direct = convolve_direct(|y| q_lap_density(y, p), p, z, 60);
                assert!((direct - laplace_density(z, p)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn staircase_mass_and_ratio() {
        for gamma in [0.0, 0.1, 0.25, 0.5] {
            let b = BridgeStaircase::new(0.3, gamma).unwrap();
            let mass =
                2.0 * gamma * b.inner_height() + 2.0 * (1.0 - 2.0 * gamma) * b.outer_height();
            assert!((mass - 1.0).abs() < 1e-15);
            assert!((b.inner_height() / b.outer_height() - 1.3 / 0.3).abs() < 1e-12);
        }
        let half = BridgeStaircase::new(0.7, 0.5).unwrap();
        assert!((half.density(0.2) - 1.0).abs() < 1e-15);
        assert!(matches!(
            q_staircase_density(0.0, 0.5, 0.6),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            q_staircase_density(0.0, 0.5, -0.1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn staircase_gamma_zero_is_uniform() {
        let b = BridgeStaircase::new(0.4, 0.0).unwrap();
        assert_eq!(b.inner_weight(), 0.0);
        let mut rng = stream_rng(5, 0);
        for _ in 0..1000 {
            let y = b.sample(&mut rng);
            assert!((-1.0..=1.0).contains(&y));
        }
    }

    #[test]
    fn staircase_convolution_identity() {
        let p = (-1.0f64).exp();
        for gamma in [0.1, 0.25, 0.5] {
            let b = BridgeStaircase::new(p, gamma).unwrap();
            for i in -500..=500 {
                let z = i as f64 / 100.0;
                let direct = convolve_staircase(&b, z, 60);
                assert!(
                    (direct - staircase_density(z, p, gamma)).abs() < 1e-12,
                    "z={z}"
                );
            }
        }
    }

    #[test]
    fn staircase_cdf_is_consistent() {
        let (p, g) = (0.5, 0.2);
        assert!((staircase_cdf(0.0, p, g) - 0.5).abs() < 1e-15);
        assert!((staircase_cdf(60.0, p, g) - 1.0).abs() < 1e-15);
        let num = simpson(|z| staircase_density(z, p, g), 0.3, 0.9, 2);
        let exact = staircase_cdf(0.9, p, g) - staircase_cdf(0.3, p, g);
        assert!((num - exact).abs() < 1e-12);
        assert!((staircase_cdf(-1.7, p, g) - (1.0 - staircase_cdf(1.7, p, g))).abs() < 1e-15);
    }

    #[test]
    fn lemma_formula_matches_convolution() {
        let p = 0.55;
        let b = BridgeStaircase::new(p, 0.3).unwrap();
        for i in -200..=200 {
            let z = i as f64 / 37.0;
            let formula = convolved_density(|y| q_lap_density(y, p), p, z);
            let direct = convolve_direct(|y| q_lap_density(y, p), p, z, 80);
            assert!((formula - direct).abs() < 1e-9);
            let formula = convolved_density(|y| b.density(y), p, z);
            let direct = convolve_staircase(&b, z, 80);
            assert!((formula - direct).abs() < 1e-9);
        }
    }

    #[test]
    fn conversion_is_deterministic() {
        let params = PrivacyParams::from_epsilon(1.0).unwrap();
        let noisy = NoisyVector::new(vec![3, -1, 7], params).unwrap();
        let a = to_laplace(&noisy, &mut stream_rng(9, 0));
        let b = to_laplace(&noisy, &mut stream_rng(9, 0));
        assert_eq!(a, b);
        let a = to_staircase(&noisy, 0.25, &mut stream_rng(9, 1)).unwrap();
        let b = to_staircase(&noisy, 0.25, &mut stream_rng(9, 1)).unwrap();
        assert_eq!(a, b);
    }
}
