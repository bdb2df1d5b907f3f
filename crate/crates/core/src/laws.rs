//! Parametric scalar laws and comonotone discretization.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::model::{DiscreteInstance, Scenario};
use crate::numeric::gauss_legendre;
use crate::{Error, Result};

/// Absolute tolerance on the CDF residual when inverting numerically.
pub const INVERSION_TOL: f64 = 1e-10;

/// Widest Gauss-Legendre panel, in the `s = sqrt(x)` variable.
const PANEL: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParametricLaw {
    Uniform { a: f64, b: f64 },
    Exponential { rate: f64 },
    ChiSquare { df: f64 },
    Normal { mean: f64, sd: f64 },
}

impl ParametricLaw {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ParametricLaw::Uniform { a, b } => a.is_finite() && b.is_finite() && a < b,
            ParametricLaw::Exponential { rate } => rate.is_finite() && rate > 0.0,
            ParametricLaw::ChiSquare { df } => df.is_finite() && df >= 1.0,
            ParametricLaw::Normal { mean, sd } => mean.is_finite() && sd.is_finite() && sd > 0.0,
        };
        if ok { Ok(()) } else { Err(Error::InvalidLaw(self.name())) }
    }

    fn name(&self) -> &'static str {
        match self {
            ParametricLaw::Uniform { .. } => "uniform(a, b) needs a < b",
            ParametricLaw::Exponential { .. } => "exponential(rate) needs rate > 0",
            ParametricLaw::ChiSquare { .. } => "chi2(df) needs df >= 1",
            ParametricLaw::Normal { .. } => "normal(mean, sd) needs sd > 0",
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            ParametricLaw::Uniform { a, b } => 0.5 * (a + b),
            ParametricLaw::Exponential { rate } => 1.0 / rate,
            ParametricLaw::ChiSquare { df } => df,
            ParametricLaw::Normal { mean, .. } => mean,
        }
    }

    pub fn median(&self) -> f64 {
        match *self {
            ParametricLaw::Uniform { a, b } => 0.5 * (a + b),
            ParametricLaw::Exponential { rate } => core::f64::consts::LN_2 / rate,
            ParametricLaw::ChiSquare { .. } => self.quantile(0.5).expect("0.5 is a valid level"),
            ParametricLaw::Normal { mean, .. } => mean,
        }
    }

    /// Lower end of the support.
    pub fn support_min(&self) -> f64 {
        match *self {
            ParametricLaw::Uniform { a, .. } => a,
            ParametricLaw::Exponential { .. } | ParametricLaw::ChiSquare { .. } => 0.0,
            ParametricLaw::Normal { .. } => f64::NEG_INFINITY,
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            ParametricLaw::Uniform { a, b } => {
                if a <= x && x <= b { 1.0 / (b - a) } else { 0.0 }
            }
            ParametricLaw::Exponential { rate } => {
                if x < 0.0 { 0.0 } else { rate * libm::exp(-rate * x) }
            }
            ParametricLaw::ChiSquare { df } => chi2_pdf(df, x),
            ParametricLaw::Normal { mean, sd } => {
                let z = (x - mean) / sd;
                libm::exp(-0.5 * z * z) / (sd * libm::sqrt(2.0 * core::f64::consts::PI))
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            ParametricLaw::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            ParametricLaw::Exponential { rate } => {
                if x <= 0.0 { 0.0 } else { -libm::expm1(-rate * x) }
            }
            ParametricLaw::ChiSquare { df } => {
                if x <= 0.0 { 0.0 } else { chi2_integral(df, 0.0, libm::sqrt(x)).min(1.0) }
            }
            ParametricLaw::Normal { mean, sd } => {
                0.5 * libm::erfc(-(x - mean) / (sd * core::f64::consts::SQRT_2))
            }
        }
    }

    /// Inverse CDF at `u` in `(0, 1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::AlphaOutOfRange(u));
        }
        self.validate()?;
        Ok(match *self {
            ParametricLaw::Uniform { a, b } => a + u * (b - a),
            ParametricLaw::Exponential { rate } => -libm::log1p(-u) / rate,
            ParametricLaw::ChiSquare { df } => Chi2Inverter::new(df).solve(u),
            ParametricLaw::Normal { mean, sd } => normal_quantile(mean, sd, u),
        })
    }

    /// Inverse CDF at every level of a nondecreasing sequence.
    ///
    /// For chi-square laws each solve starts from the previous root, so the
    /// batch costs little more than one integration across the support.
    pub fn quantiles_sorted(&self, us: &[f64]) -> Result<Vec<f64>> {
        self.validate()?;
        for (i, &u) in us.iter().enumerate() {
            if !(u > 0.0 && u < 1.0) {
                return Err(Error::AlphaOutOfRange(u));
            }
            if i > 0 && u < us[i - 1] {
                return Err(Error::InvalidLaw("quantile levels must be nondecreasing"));
            }
        }
        match *self {
            ParametricLaw::ChiSquare { df } => {
                let mut inv = Chi2Inverter::new(df);
                Ok(us.iter().map(|&u| inv.solve(u)).collect())
            }
            _ => us.iter().map(|&u| self.quantile(u)).collect(),
        }
    }
}

impl fmt::Display for ParametricLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ParametricLaw::Uniform { a, b } => write!(f, "uniform({a},{b})"),
            ParametricLaw::Exponential { rate } => write!(f, "exponential({rate})"),
            ParametricLaw::ChiSquare { df } => write!(f, "chi2({df})"),
            ParametricLaw::Normal { mean, sd } => write!(f, "normal({mean},{sd})"),
        }
    }
}

/// Parses `uniform(a,b)`, `exponential(rate)`, `chi2(df)` or `normal(mean,sd)`.
impl FromStr for ParametricLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let open = s.find('(').ok_or(Error::InvalidLaw("expected name(params)"))?;
        if !s.ends_with(')') {
            return Err(Error::InvalidLaw("expected name(params)"));
        }
        let name = s[..open].trim().to_ascii_lowercase();
        let mut params = Vec::new();
        for p in s[open + 1..s.len() - 1].split(',') {
            params.push(p.trim().parse::<f64>().map_err(|_| Error::InvalidLaw("bad parameter"))?);
        }
        let law = match (name.as_str(), params.as_slice()) {
            ("uniform" | "unif", &[a, b]) => ParametricLaw::Uniform { a, b },
            ("exponential" | "exp", &[rate]) => ParametricLaw::Exponential { rate },
            ("chi2" | "chisq" | "chisquare", &[df]) => ParametricLaw::ChiSquare { df },
            ("normal" | "norm", &[mean, sd]) => ParametricLaw::Normal { mean, sd },
            _ => return Err(Error::InvalidLaw("unknown law or wrong parameter count")),
        };
        law.validate()?;
        Ok(law)
    }
}

fn chi2_log_norm(df: f64) -> f64 {
    0.5 * df * core::f64::consts::LN_2 + libm::lgamma(0.5 * df)
}

fn chi2_pdf(df: f64, x: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    if x == 0.0 {
        return match df {
            d if d < 2.0 => f64::INFINITY,
            2.0 => 0.5,
            _ => 0.0,
        };
    }
    libm::exp((0.5 * df - 1.0) * libm::log(x) - 0.5 * x - chi2_log_norm(df))
}

/// Chi-square density after the substitution `x = s^2`.
fn chi2_s_density(df: f64, log_norm: f64, s: f64) -> f64 {
    if s <= 0.0 {
        return if df == 1.0 { libm::exp(core::f64::consts::LN_2 - log_norm) } else { 0.0 };
    }
    libm::exp(core::f64::consts::LN_2 + (df - 1.0) * libm::log(s) - 0.5 * s * s - log_norm)
}

/// `P(s0^2 < X <= s1^2)` by composite Gauss-Legendre in `s` (signed if `s1 < s0`).
fn chi2_integral(df: f64, s0: f64, s1: f64) -> f64 {
    let log_norm = chi2_log_norm(df);
    let g = |s: f64| chi2_s_density(df, log_norm, s);
    let (a, b, sign) = if s0 <= s1 { (s0, s1, 1.0) } else { (s1, s0, -1.0) };
    let panels = libm::ceil((b - a) / PANEL).max(1.0) as usize;
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for i in 0..panels {
        let lo = a + h * i as f64;
        let hi = if i + 1 == panels { b } else { lo + h };
        acc += gauss_legendre(&g, lo, hi);
    }
    sign * acc
}

/// Safeguarded Newton inversion of the chi-square CDF that remembers its last
/// evaluated point, so increasing targets only integrate the gap.
struct Chi2Inverter {
    df: f64,
    x: f64,
    f: f64,
}

impl Chi2Inverter {
    fn new(df: f64) -> Self {
        Chi2Inverter { df, x: 0.0, f: 0.0 }
    }

    fn move_to(&mut self, x: f64) {
        self.f += chi2_integral(self.df, libm::sqrt(self.x), libm::sqrt(x));
        self.x = x;
    }

    fn solve(&mut self, u: f64) -> f64 {
        // Bracket [lo, hi] with F(lo) < u <= F(hi).
        let (mut lo, mut hi);
        if self.f < u {
            lo = self.x;
            hi = if self.x > 0.0 { 2.0 * self.x } else { self.df.max(1.0) };
            loop {
                self.move_to(hi);
                if self.f >= u {
                    break;
                }
                lo = hi;
                hi *= 2.0;
            }
        } else {
            hi = self.x;
            lo = 0.0;
        }
        for _ in 0..200 {
            let resid = self.f - u;
            if libm::fabs(resid) <= 1e-15 {
                return self.x;
            }
            if resid < 0.0 {
                lo = self.x;
            } else {
                hi = self.x;
            }
            if hi - lo <= 1e-14 * hi.max(1e-300) {
                break;
            }
            let dens = chi2_pdf(self.df, self.x);
            let mut next = self.x - resid / dens;
            if !(dens.is_finite() && dens > 0.0 && next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if next == self.x {
                break;
            }
            self.move_to(next);
        }
        self.x
    }
}

fn normal_quantile(mean: f64, sd: f64, u: f64) -> f64 {
    let cdf = |z: f64| 0.5 * libm::erfc(-z / core::f64::consts::SQRT_2);
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if cdf(mid) < u { lo = mid } else { hi = mid }
    }
    mean + sd * hi
}

/// Comonotone coupling `y_L = F_L^{-1}(U)`, `y_U = F_U^{-1}(U)` on a midpoint grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComonotoneSpec {
    pub lower_law: ParametricLaw,
    pub upper_law: ParametricLaw,
    pub grid_size: usize,
}

impl ComonotoneSpec {
    pub fn new(lower_law: ParametricLaw, upper_law: ParametricLaw, grid_size: usize) -> Self {
        ComonotoneSpec { lower_law, upper_law, grid_size }
    }

    pub fn discretize(&self) -> Result<DiscreteInstance> {
        discretize(self)
    }
}

/// Grid levels `u_i = (i - 0.5) / n`, `i = 1..=n`.
pub fn midpoint_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect()
}

/// Equal-weight scenarios at the midpoint grid; errors if the coupling inverts.
pub fn discretize(spec: &ComonotoneSpec) -> Result<DiscreteInstance> {
    if spec.grid_size < 2 {
        return Err(Error::InvalidGridSize(spec.grid_size));
    }
    let us = midpoint_grid(spec.grid_size);
    let lowers = spec.lower_law.quantiles_sorted(&us)?;
    let uppers = spec.upper_law.quantiles_sorted(&us)?;
    let w = 1.0 / spec.grid_size as f64;
    let mut scenarios = Vec::with_capacity(spec.grid_size);
    for ((&u, &lower), &upper) in us.iter().zip(&lowers).zip(&uppers) {
        if lower > upper {
            return Err(Error::CouplingViolation { u, lower, upper });
        }
        scenarios.push(Scenario::new(lower, upper, w));
    }
    DiscreteInstance::new(scenarios)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CHI2_2: ParametricLaw = ParametricLaw::ChiSquare { df: 2.0 };
    const CHI2_5: ParametricLaw = ParametricLaw::ChiSquare { df: 5.0 };

    #[test]
    fn chi2_two_matches_exponential_closed_form() {
        for &x in &[1e-6, 0.1, 1.0, 3.0, 10.0, 40.0] {
            let exact = -(-x / 2.0f64).exp_m1();
            assert!((CHI2_2.cdf(x) - exact).abs() < 1e-13, "x = {x}");
        }
        for &u in &[1e-6f64, 0.01, 0.5, 0.9, 0.999999] {
            let exact = -2.0 * (-u).ln_1p();
            assert!((CHI2_2.quantile(u).unwrap() - exact).abs() < 1e-9 * exact.max(1.0));
        }
    }

    #[test]
    fn chi2_medians() {
        assert!((CHI2_2.median() - 1.3862943611198906).abs() < 1e-9);
        assert!((CHI2_5.median() - 4.351460191095526).abs() < 1e-8);
        assert!((CHI2_5.cdf(4.351460191095526) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sorted_batch_matches_single_solves() {
        let us = midpoint_grid(997);
        let batch = CHI2_5.quantiles_sorted(&us).unwrap();
        for (i, &u) in us.iter().enumerate().step_by(37) {
            let single = CHI2_5.quantile(u).unwrap();
            assert!((batch[i] - single).abs() < 1e-9 * single.max(1.0));
        }
    }

    #[test]
    fn normal_and_exponential() {
        let n = ParametricLaw::Normal { mean: 1.0, sd: 2.0 };
        assert!((n.quantile(0.975).unwrap() - (1.0 + 2.0 * 1.959963984540054)).abs() < 1e-9);
        let e = ParametricLaw::Exponential { rate: 2.0 };
        assert!((e.quantile(0.5).unwrap() - 2f64.ln() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn discretize_uniform_pair() {
        let spec = ComonotoneSpec::new(
            ParametricLaw::Uniform { a: 0.0, b: 1.0 },
            ParametricLaw::Uniform { a: 1.0, b: 2.0 },
            2,
        );
        let inst = spec.discretize().unwrap();
        let got: Vec<_> = inst.scenarios().iter().map(|s| (s.lower, s.upper, s.weight)).collect();
        assert_eq!(got, vec![(0.25, 1.25, 0.5), (0.75, 1.75, 0.5)]);
    }

    #[test]
    fn discretize_errors() {
        let spec = ComonotoneSpec::new(CHI2_5, CHI2_2, 10);
        assert!(matches!(spec.discretize(), Err(Error::CouplingViolation { .. })));
        let spec = ComonotoneSpec::new(CHI2_2, CHI2_5, 1);
        assert_eq!(spec.discretize(), Err(Error::InvalidGridSize(1)));
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["chi2(2)", "uniform(0,1)", "exponential(1.5)", "normal(0,1)"] {
            let law: ParametricLaw = s.parse().unwrap();
            assert_eq!(law.to_string(), s);
        }
        assert!("chi2(0.5)".parse::<ParametricLaw>().is_err());
        assert!("beta(1,2)".parse::<ParametricLaw>().is_err());
    }
}
