use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::quantum::{lhv_outcomes, OutcomePair, Phase, Sign, Visibility};

/// `FWHM / σ` for a Gaussian, `2√(2 ln 2)`.
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

pub fn fwhm_to_sigma(fwhm: f64) -> f64 {
    fwhm / FWHM_PER_SIGMA
}

/// Which arms the two photons of a pair took.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    /// Short-short or long-long; the two are indistinguishable and interfere.
    Central,
    /// Photon 1 short, photon 2 long: stop arrives one path delay late.
    ShortLong,
    /// Photon 1 long, photon 2 short: stop arrives one path delay early.
    LongShort,
}

impl Branch {
    pub const ALL: [Branch; 3] = [Branch::Central, Branch::ShortLong, Branch::LongShort];

    pub fn index(self) -> usize {
        match self {
            Branch::Central => 0,
            Branch::ShortLong => 1,
            Branch::LongShort => 2,
        }
    }
}

/// One pair's joint outcome. Times are in seconds and are zero when the
/// sample comes straight from [`sample_pair_branch`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairBranchSample {
    pub branch: Branch,
    pub outcome: OutcomePair,
    pub emission_time: f64,
    pub start_time: f64,
    pub stop_time: f64,
}

impl PairBranchSample {
    fn untimed(branch: Branch, outcome: OutcomePair) -> Self {
        PairBranchSample {
            branch,
            outcome,
            emission_time: 0.0,
            start_time: 0.0,
            stop_time: 0.0,
        }
    }
}

fn random_sign<R: Rng + ?Sized>(rng: &mut R) -> Sign {
    if rng.random::<bool>() {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

fn side_branch<R: Rng + ?Sized>(u: f64, rng: &mut R) -> PairBranchSample {
    let branch = if u < 0.75 { Branch::ShortLong } else { Branch::LongShort };
    PairBranchSample::untimed(branch, OutcomePair::new(random_sign(rng), random_sign(rng)))
}

/// Draws branch and port outcome from the 12-cell joint law:
/// central cells `(1 + ijV cos(δ1+δ2)) / 8`, every side cell `1/16`.
pub fn sample_pair_branch<R: Rng + ?Sized>(d1: Phase, d2: Phase, vis: Visibility, rng: &mut R) -> PairBranchSample {
    let u: f64 = rng.random();
    if u >= 0.5 {
        return side_branch(u, rng);
    }
    // conditional on Central: P(i) = 1/2, P(j = i | i) = (1 + V cos) / 2
    let i = random_sign(rng);
    let same = 0.5 * (1.0 + vis.value() * (d1.radians() + d2.radians()).cos());
    let j = if rng.random::<f64>() < same { i } else { i.flip() };
    PairBranchSample::untimed(Branch::Central, OutcomePair::new(i, j))
}

/// Same branch structure as [`sample_pair_branch`], but central outcomes come
/// from the square-wave local model with a fresh hidden variable per pair.
pub fn sample_lhv_pair_branch<R: Rng + ?Sized>(d1: Phase, d2: Phase, rng: &mut R) -> PairBranchSample {
    let u: f64 = rng.random();
    if u >= 0.5 {
        return side_branch(u, rng);
    }
    let lambda = rng.random::<f64>() * TAU;
    PairBranchSample::untimed(Branch::Central, lhv_outcomes(d1, d2, lambda))
}

/// Adds zero-mean Gaussian timing noise with the given FWHM (seconds).
pub fn apply_jitter<R: Rng + ?Sized>(true_time: f64, jitter_fwhm: f64, rng: &mut R) -> f64 {
    if jitter_fwhm == 0.0 {
        return true_time;
    }
    let z: f64 = rng.sample(StandardNormal);
    true_time + z * fwhm_to_sigma(jitter_fwhm)
}

/// Homogeneous Poisson process on `[0, duration)`, returned in time order.
///
/// Generated from exponential gaps, which gives a Poisson(rate·duration)
/// count with conditionally uniform times.
pub fn generate_dark_counts<R: Rng + ?Sized>(rate: f64, duration: f64, rng: &mut R) -> Vec<f64> {
    if rate <= 0.0 || duration <= 0.0 {
        return Vec::new();
    }
    let gaps = Exp::new(rate).expect("positive rate");
    let mut times = Vec::with_capacity((rate * duration * 1.05) as usize + 16);
    let mut t = gaps.sample(rng);
    while t < duration {
        times.push(t);
        t += gaps.sample(rng);
    }
    times
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::coincidence_probability;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_4;

    fn histogram(d1: f64, d2: f64, v: f64, n: usize, seed: u64) -> [[u64; 4]; 3] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vis = Visibility::new(v).unwrap();
        let mut h = [[0u64; 4]; 3];
        for _ in 0..n {
            let s = sample_pair_branch(Phase(d1), Phase(d2), vis, &mut rng);
            h[s.branch.index()][s.outcome.index()] += 1;
        }
        h
    }

    #[test]
    fn perfect_visibility_suppresses_opposite_ports() {
        let h = histogram(0.3, -0.3, 1.0, 200_000, 1);
        assert_eq!(h[0][OutcomePair::PM.index()], 0);
        assert_eq!(h[0][OutcomePair::MP.index()], 0);
    }

    #[test]
    fn zero_visibility_is_uniform_within_branches() {
        let n = 1_600_000;
        let h = histogram(0.9, 0.1, 0.0, n, 2);
        for (b, row) in h.iter().enumerate() {
            let p = if b == 0 { 1.0 / 8.0 } else { 1.0 / 16.0 };
            for &c in row {
                let sigma = (n as f64 * p * (1.0 - p)).sqrt();
                assert!((c as f64 - n as f64 * p).abs() < 5.0 * sigma, "{h:?}");
            }
        }
    }

    #[test]
    fn central_frequency_matches_closed_form() {
        let n = 1_000_000;
        let h = histogram(FRAC_PI_4, 0.0, 0.957, n, 3);
        let freq = h[0][OutcomePair::PP.index()] as f64 / n as f64;
        let expected = coincidence_probability(
            OutcomePair::PP,
            Phase(FRAC_PI_4),
            Phase(0.0),
            Visibility::new(0.957).unwrap(),
        );
        assert!((expected - 0.2096).abs() < 1e-4);
        assert!((freq - expected).abs() < 0.0013, "{freq} vs {expected}");
    }

    #[test]
    fn branch_weights_are_half_and_quarters() {
        let n = 1_000_000usize;
        let h = histogram(1.0, 2.0, 0.8, n, 4);
        let weights = [0.5, 0.25, 0.25];
        for (row, p) in h.iter().zip(weights) {
            let c: u64 = row.iter().sum();
            let sigma = (n as f64 * p * (1.0 - p)).sqrt();
            assert!((c as f64 - n as f64 * p).abs() < 5.0 * sigma);
        }
    }

    #[test]
    fn lhv_sampler_branch_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 400_000;
        let central = (0..n)
            .filter(|_| sample_lhv_pair_branch(Phase(0.2), Phase(0.1), &mut rng).branch == Branch::Central)
            .count();
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((central as f64 - n as f64 / 2.0).abs() < 5.0 * sigma);
    }

    #[test]
    fn jitter_zero_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        assert_eq!(apply_jitter(1.234e-3, 0.0, &mut rng), 1.234e-3);
    }

    #[test]
    fn jitter_sigma_and_fwhm() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 1_000_000;
        let fwhm = 200e-12;
        let draws: Vec<f64> = (0..n).map(|_| apply_jitter(0.0, fwhm, &mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let sigma = var.sqrt();
        assert!((sigma / 84.93e-12 - 1.0).abs() < 0.01, "{sigma}");

        // empirical FWHM from a 5 ps histogram, linear interpolation at half max
        let bin = 5e-12;
        let nb = 200;
        let mut h = vec![0u64; nb];
        for x in &draws {
            let k = ((x + nb as f64 * bin / 2.0) / bin).floor();
            if k >= 0.0 && (k as usize) < nb {
                h[k as usize] += 1;
            }
        }
        let peak = *h.iter().max().unwrap() as f64;
        let half = peak / 2.0;
        let first = h.iter().position(|&c| c as f64 >= half).unwrap();
        let last = nb - 1 - h.iter().rev().position(|&c| c as f64 >= half).unwrap();
        let interp = |lo: usize, hi: usize| {
            let (a, b) = (h[lo] as f64, h[hi] as f64);
            lo as f64 + (half - a) / (b - a) * (hi as f64 - lo as f64)
        };
        let left = interp(first - 1, first);
        let right = interp(last, last + 1);
        let width = (right - left) * bin;
        assert!((width / fwhm - 1.0).abs() < 0.03, "{width}");
    }

    #[test]
    fn dark_counts_empty_for_zero_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        assert!(generate_dark_counts(0.0, 2.0, &mut rng).is_empty());
    }

    #[test]
    fn dark_count_total_is_poisson() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let times = generate_dark_counts(180e3, 2.0, &mut rng);
        let n = times.len() as f64;
        assert!((n - 360_000.0).abs() < 3.0 * 600.0, "{n}");
        assert!(times.windows(2).all(|w| w[0] <= w[1]));
        assert!(times.iter().all(|&t| (0.0..2.0).contains(&t)));
    }

    #[test]
    fn dark_count_gaps_pass_exponential_ks() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let rate = 180e3;
        let times = generate_dark_counts(rate, 0.5, &mut rng);
        let mut gaps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
        gaps.sort_by(f64::total_cmp);
        let n = gaps.len() as f64;
        let d = gaps
            .iter()
            .enumerate()
            .map(|(k, &g)| {
                let cdf = 1.0 - (-rate * g).exp();
                let lo = k as f64 / n;
                let hi = (k as f64 + 1.0) / n;
                (cdf - lo).abs().max((hi - cdf).abs())
            })
            .fold(0.0, f64::max);
        // asymptotic KS critical value at α = 0.01
        let critical = 1.628 / n.sqrt();
        assert!(d < critical, "D = {d}, critical = {critical}");
    }
}
