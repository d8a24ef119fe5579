//! Closed-form two-photon interference model for a pair of equally
//! unbalanced interferometers, plus a local-hidden-variable reference.
//!
//! Everything here is a pure function of the analyzer phases and the lumped
//! visibility. The Monte Carlo engine in [`crate::sim`] is validated against
//! these expressions.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI, SQRT_2, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interferometer phase difference in radians.
///
/// Stored unbounded so that phase scans do not accumulate reduction error;
/// reduce with [`Phase::reduced`] only where a canonical value is needed.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Phase(pub f64);

impl Phase {
    pub const ZERO: Phase = Phase(0.0);

    pub fn new(radians: f64) -> Self {
        Phase(radians)
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    /// Representative in `[0, 2π)`.
    pub fn reduced(self) -> Phase {
        let r = self.0.rem_euclid(TAU);
        // rem_euclid can round up to exactly TAU for tiny negative inputs
        Phase(if r >= TAU { 0.0 } else { r })
    }
}

impl std::ops::Add for Phase {
    type Output = Phase;
    fn add(self, rhs: Phase) -> Phase {
        Phase(self.0 + rhs.0)
    }
}

impl std::ops::Sub for Phase {
    type Output = Phase;
    fn sub(self, rhs: Phase) -> Phase {
        Phase(self.0 - rhs.0)
    }
}

impl From<f64> for Phase {
    fn from(radians: f64) -> Self {
        Phase(radians)
    }
}

/// Fringe visibility, `0 ≤ v ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Visibility(f64);

impl Visibility {
    pub const ONE: Visibility = Visibility(1.0);
    pub const ZERO: Visibility = Visibility(0.0);

    pub fn new(v: f64) -> Result<Self> {
        if v.is_finite() && (0.0..=1.0).contains(&v) {
            Ok(Visibility(v))
        } else {
            Err(Error::InvalidVisibility(v))
        }
    }

    /// Clamps into `[0, 1]`; NaN maps to zero.
    pub fn saturating(v: f64) -> Self {
        if v.is_nan() {
            Visibility(0.0)
        } else {
            Visibility(v.clamp(0.0, 1.0))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl<'de> Deserialize<'de> for Visibility {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        Visibility::new(v).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Visibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Output port label of a two-output analyzer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.value() as f64
    }

    /// 0 for `+`, 1 for `−`.
    pub fn index(self) -> usize {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }

    pub fn from_index(index: usize) -> Sign {
        if index == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// Joint port outcome `(i, j)` for analyzer 1 and analyzer 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OutcomePair {
    pub i: Sign,
    pub j: Sign,
}

impl OutcomePair {
    pub const PP: OutcomePair = OutcomePair::new(Sign::Plus, Sign::Plus);
    pub const PM: OutcomePair = OutcomePair::new(Sign::Plus, Sign::Minus);
    pub const MP: OutcomePair = OutcomePair::new(Sign::Minus, Sign::Plus);
    pub const MM: OutcomePair = OutcomePair::new(Sign::Minus, Sign::Minus);

    /// Canonical ordering used for every 4-element per-outcome array.
    pub const ALL: [OutcomePair; 4] = [Self::PP, Self::PM, Self::MP, Self::MM];

    pub const fn new(i: Sign, j: Sign) -> Self {
        OutcomePair { i, j }
    }

    /// Product `i·j`.
    pub fn parity(self) -> f64 {
        (self.i.value() * self.j.value()) as f64
    }

    pub fn index(self) -> usize {
        self.i.index() * 2 + self.j.index()
    }

    pub fn label(self) -> String {
        format!("{}{}", self.i.symbol(), self.j.symbol())
    }
}

impl fmt::Display for OutcomePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.i.symbol(), self.j.symbol())
    }
}

/// Analyzer settings `(a, a', b, b')` for a CHSH measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshSettings {
    pub delta1: Phase,
    pub delta1_prime: Phase,
    pub delta2: Phase,
    pub delta2_prime: Phase,
}

impl ChshSettings {
    /// δ1 = π/4, δ1' = −π/4, δ2 = 0, δ2' = π/2: the settings that maximise
    /// the quantum value of the CHSH combination for `E = V cos(δ1 + δ2)`.
    pub fn standard() -> Self {
        ChshSettings {
            delta1: Phase(FRAC_PI_4),
            delta1_prime: Phase(-FRAC_PI_4),
            delta2: Phase(0.0),
            delta2_prime: Phase(FRAC_PI_2),
        }
    }

    /// The four `(δ1, δ2)` pairs in the order `(a,b), (a,b'), (a',b), (a',b')`.
    pub fn pairs(&self) -> [(Phase, Phase); 4] {
        [
            (self.delta1, self.delta2),
            (self.delta1, self.delta2_prime),
            (self.delta1_prime, self.delta2),
            (self.delta1_prime, self.delta2_prime),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.delta1, self.delta1_prime, self.delta2, self.delta2_prime];
        if all.iter().all(|p| p.0.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidArgument("CHSH settings must be finite".into()))
        }
    }
}

impl Default for ChshSettings {
    fn default() -> Self {
        Self::standard()
    }
}

/// Correlation coefficient in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CorrelationValue(pub f64);

impl CorrelationValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Probability that a pair is registered in the central time bin at ports
/// `(i, j)`: `(1 + i·j·V·cos(δ1 + δ2)) / 8`.
pub fn coincidence_probability(outcome: OutcomePair, d1: Phase, d2: Phase, vis: Visibility) -> f64 {
    (1.0 + outcome.parity() * vis.0 * (d1.0 + d2.0).cos()) / 8.0
}

/// `E(δ1, δ2) = V cos(δ1 + δ2)`.
pub fn correlation(d1: Phase, d2: Phase, vis: Visibility) -> CorrelationValue {
    CorrelationValue(vis.0 * (d1.0 + d2.0).cos())
}

/// Correlation coefficient from the four coincidence rates.
///
/// Rates may be net (accidental-subtracted) values; only an all-zero set is
/// rejected. The result is not clamped.
pub fn correlation_from_rates(r_pp: f64, r_pm: f64, r_mp: f64, r_mm: f64) -> Result<CorrelationValue> {
    let total = r_pp + r_pm + r_mp + r_mm;
    if total == 0.0 || !total.is_finite() {
        return Err(Error::UndefinedCorrelation);
    }
    Ok(CorrelationValue((r_pp - r_pm - r_mp + r_mm) / total))
}

/// `|E(a,b) − E(a,b')| + E(a',b) + E(a',b')`, with the four correlations in
/// [`ChshSettings::pairs`] order.
pub fn chsh_combination(e: [f64; 4]) -> f64 {
    (e[0] - e[1]).abs() + e[2] + e[3]
}

pub fn chsh_s(settings: &ChshSettings, vis: Visibility) -> f64 {
    chsh_combination(settings.pairs().map(|(a, b)| correlation(a, b, vis).0))
}

/// Smallest visibility for which the standard settings violate `S ≤ 2`.
pub fn min_violating_visibility() -> Visibility {
    Visibility(FRAC_1_SQRT_2)
}

/// Classical bound on the CHSH combination.
pub const LOCAL_BOUND: f64 = 2.0;

/// Quantum maximum `2√2`.
pub const TSIRELSON_BOUND: f64 = 2.0 * SQRT_2;

/// Distance of `δ1 + δ2` from zero on the circle, in `[0, π]`.
fn folded_phase_sum(d1: Phase, d2: Phase) -> f64 {
    let sum = d1.0 + d2.0;
    ((sum + PI).rem_euclid(TAU) - PI).abs()
}

/// Correlation of the square-wave local model
/// `a = sgn cos(δ1 + λ)`, `b = sgn cos(δ2 − λ)` with `λ` uniform on `[0, 2π)`.
///
/// The result is the triangle wave `1 − 2·m/π` in the folded sum `m`.
pub fn lhv_correlation(d1: Phase, d2: Phase) -> CorrelationValue {
    CorrelationValue(1.0 - 2.0 * folded_phase_sum(d1, d2) / PI)
}

pub fn lhv_chsh_s(settings: &ChshSettings) -> f64 {
    chsh_combination(settings.pairs().map(|(a, b)| lhv_correlation(a, b).0))
}

/// Deterministic outcomes of the square-wave local model for one hidden
/// variable `lambda`.
pub fn lhv_outcomes(d1: Phase, d2: Phase, lambda: f64) -> OutcomePair {
    let sgn = |x: f64| if x >= 0.0 { Sign::Plus } else { Sign::Minus };
    OutcomePair::new(sgn((d1.0 + lambda).cos()), sgn((d2.0 - lambda).cos()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vis(v: f64) -> Visibility {
        Visibility::new(v).unwrap()
    }

    #[test]
    fn probability_examples() {
        let p = coincidence_probability(OutcomePair::PP, Phase(0.0), Phase(0.0), Visibility::ONE);
        assert_eq!(p, 0.25);
        for o in OutcomePair::ALL {
            let p = coincidence_probability(o, Phase(1.3), Phase(-0.2), Visibility::ZERO);
            assert_eq!(p, 0.125);
        }
        let p = coincidence_probability(OutcomePair::PM, Phase(FRAC_PI_4), Phase(0.0), vis(0.957));
        assert!((p - 0.040_412_4).abs() < 1e-6, "{p}");
    }

    #[test]
    fn visibility_domain() {
        assert!(Visibility::new(1.01).is_err());
        assert!(Visibility::new(-0.01).is_err());
        assert!(Visibility::new(f64::NAN).is_err());
        assert_eq!(Visibility::saturating(1.2).value(), 1.0);
    }

    #[test]
    fn correlation_examples() {
        assert_eq!(correlation(Phase(0.0), Phase(0.0), Visibility::ONE).0, 1.0);
        assert!(correlation(Phase(FRAC_PI_4), Phase(FRAC_PI_4), Visibility::ONE).0.abs() < 1e-15);
        let e = correlation(Phase(FRAC_PI_4), Phase(0.0), vis(0.957)).0;
        assert!((e - 0.676_701).abs() < 1e-6);
    }

    #[test]
    fn correlation_from_rate_examples() {
        assert_eq!(correlation_from_rates(1.0, 0.0, 0.0, 1.0).unwrap().0, 1.0);
        assert_eq!(correlation_from_rates(1.0, 1.0, 1.0, 1.0).unwrap().0, 0.0);
        // the four central-bin probabilities for V = 0.957, δ1 + δ2 = π/4
        let e = correlation_from_rates(0.209_588, 0.040_412, 0.040_412, 0.209_588)
            .unwrap()
            .0;
        assert!((e - 0.6767).abs() < 1e-4, "{e}");
        assert!(matches!(
            correlation_from_rates(0.0, 0.0, 0.0, 0.0),
            Err(Error::UndefinedCorrelation)
        ));
    }

    #[test]
    fn chsh_examples() {
        let s = ChshSettings::standard();
        assert!((chsh_s(&s, Visibility::ONE) - 2.828_427_124_746_19).abs() < 1e-12);
        assert!((chsh_s(&s, min_violating_visibility()) - 2.0).abs() < 1e-12);
        assert!((chsh_s(&s, vis(0.957)) - 2.706_804_758_382).abs() < 1e-9);
    }

    #[test]
    fn min_violating_boundary() {
        let v = min_violating_visibility();
        assert!((v.value() - 1.0 / 2.0_f64.sqrt()).abs() < 1e-15);
        let s = ChshSettings::standard();
        assert!((chsh_s(&s, v) - 2.0).abs() < 1e-12);
        assert!(chsh_s(&s, vis(v.value() + 0.01)) > 2.0);
    }

    #[test]
    fn lhv_examples() {
        assert_eq!(lhv_correlation(Phase(0.0), Phase(0.0)).0, 1.0);
        assert_eq!(lhv_correlation(Phase(PI), Phase(0.0)).0, -1.0);
        assert!((lhv_correlation(Phase(FRAC_PI_4), Phase(0.0)).0 - 0.5).abs() < 1e-15);
        assert!((lhv_chsh_s(&ChshSettings::standard()) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn lhv_correlation_matches_hidden_variable_average() {
        // brute-force average of the deterministic outcomes over a uniform λ grid
        let n = 1_000_000;
        for &(d1, d2) in &[(0.0, 0.0), (FRAC_PI_4, 0.0), (1.0, 0.7), (PI, 0.0), (-2.5, 0.4)] {
            let mut acc = 0.0;
            for k in 0..n {
                let lambda = (k as f64 + 0.5) * TAU / n as f64;
                acc += lhv_outcomes(Phase(d1), Phase(d2), lambda).parity();
            }
            let brute = acc / n as f64;
            let exact = lhv_correlation(Phase(d1), Phase(d2)).0;
            assert!((brute - exact).abs() < 1e-5, "({d1},{d2}): {brute} vs {exact}");
        }
    }

    #[test]
    fn lhv_never_exceeds_local_bound() {
        // E depends only on sums, so a = 0 loses no generality
        let n = 360;
        let step = TAU / n as f64;
        let mut max_s = f64::NEG_INFINITY;
        for ib in (0..n).step_by(10) {
            for ia in 0..n {
                for ibp in 0..n {
                    let settings = ChshSettings {
                        delta1: Phase(0.0),
                        delta1_prime: Phase(ia as f64 * step),
                        delta2: Phase(ib as f64 * step),
                        delta2_prime: Phase(ibp as f64 * step),
                    };
                    max_s = max_s.max(lhv_chsh_s(&settings));
                }
            }
        }
        assert!(max_s <= 2.0 + 1e-9, "{max_s}");
        assert!(max_s > 1.99);
    }

    #[test]
    fn chsh_is_linear_in_visibility() {
        let s = ChshSettings::standard();
        for k in 0..=100 {
            let v = k as f64 / 100.0;
            assert!((chsh_s(&s, vis(v)) - 2.0 * SQRT_2 * v).abs() < 1e-12);
        }
    }

    #[test]
    fn correlation_identity_on_random_triples() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let d1 = Phase(rng.random_range(-10.0..10.0));
            let d2 = Phase(rng.random_range(-10.0..10.0));
            let v = vis(rng.random_range(0.0..=1.0));
            let p = OutcomePair::ALL.map(|o| coincidence_probability(o, d1, d2, v));
            let from_rates = correlation_from_rates(p[0], p[1], p[2], p[3]).unwrap().0;
            assert!((from_rates - correlation(d1, d2, v).0).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn probabilities_normalised_and_bounded(d1 in -50.0f64..50.0, d2 in -50.0f64..50.0, v in 0.0f64..=1.0) {
            let v = vis(v);
            let p = OutcomePair::ALL.map(|o| coincidence_probability(o, Phase(d1), Phase(d2), v));
            prop_assert!((p.iter().sum::<f64>() - 0.5).abs() < 1e-15);
            for x in p {
                prop_assert!(x >= (1.0 - v.value()) / 8.0 - 1e-15);
                prop_assert!(x <= (1.0 + v.value()) / 8.0 + 1e-15);
            }
        }

        #[test]
        fn correlation_depends_only_on_phase_sum(d1 in -20.0f64..20.0, d2 in -20.0f64..20.0, x in -20.0f64..20.0, v in 0.0f64..=1.0) {
            let v = vis(v);
            let a = correlation(Phase(d1), Phase(d2), v).0;
            let b = correlation(Phase(d1 + x), Phase(d2 - x), v).0;
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn reduction_is_idempotent(r in -1e6f64..1e6) {
            let once = Phase(r).reduced();
            prop_assert!(once.0 >= 0.0 && once.0 < TAU);
            prop_assert_eq!(once.reduced(), once);
        }
    }
}
