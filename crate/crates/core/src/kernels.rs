//! Interaction kernels through their radial symbols, the capillarity symbol,
//! the frequency threshold and the consistency constants.

use std::path::Path;

use crate::numerics::{bisect, golden_max, log_space};
use crate::{KwgError, Result};

/// `e^{−x} − 1 + x`, accurate for small `x`.
pub fn relaxation_defect(x: f64) -> f64 {
    if x < 0.5 {
        let mut term = x * x / 2.0;
        let mut sum = 0.0f64;
        let mut n = 2.0;
        while term.abs() > 1e-18 * sum.abs().max(1e-300) {
            sum += term;
            n += 1.0;
            term *= -x / n;
        }
        sum
    } else {
        x + (-x).exp_m1()
    }
}

/// `(κ/ε²)(1 − e^{−ε²ξ²})`, or `κξ²` at `ε = 0`.
pub fn capillarity_symbol(xi2: f64, kappa: f64, eps: f64) -> f64 {
    if eps == 0.0 {
        return kappa * xi2;
    }
    let e2 = eps * eps;
    -kappa * (-e2 * xi2).exp_m1() / e2
}

/// `(1 − e^{−z})/z`, continuous at zero.
pub fn relaxation_ratio(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        -(-z).exp_m1() / z
    }
}

/// Largest `γ` with `(1 − e^{−γ})/γ ≥ 1/2`.
pub fn threshold_gamma() -> f64 {
    bisect(|z| relaxation_ratio(z) - 0.5, 0.5, 4.0, 1e-16).expect("ratio crosses 1/2 on [0.5, 4]")
}

/// Greatest `l` with `ε 2^l C₀ ≤ √γ`; then `√γ < ε 2^{l+1} C₀`.
pub fn frequency_threshold(eps: f64, gamma: f64, c0_outer: f64) -> Result<i32> {
    if !(eps > 0.0 && gamma > 0.0 && c0_outer > 0.0) {
        return Err(KwgError::InvalidParameter(format!(
            "threshold needs positive eps, gamma, C0; got ({eps}, {gamma}, {c0_outer})"
        )));
    }
    let root = gamma.sqrt();
    let base = eps * c0_outer;
    let scaled = |l: i32| base * 2f64.powi(l);
    let mut l = (root / base).log2().floor() as i32;
    while scaled(l) > root {
        l -= 1;
    }
    while scaled(l + 1) <= root {
        l += 1;
    }
    Ok(l)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSpec {
    pub gamma: f64,
    pub c0_outer: f64,
    pub l_eps: i32,
    pub eps: f64,
}

impl ThresholdSpec {
    pub fn new(eps: f64, c0_outer: f64) -> Result<Self> {
        let gamma = threshold_gamma();
        let l_eps = frequency_threshold(eps, gamma, c0_outer)?;
        Ok(Self { gamma, c0_outer, l_eps, eps })
    }
}

/// `sup_{x>0} (e^{−x} − 1 + x)/x^β` for `1 < β < 2`.
pub fn consistency_constant(beta: f64) -> Result<f64> {
    consistency_argmax(beta).map(|(_, v)| v)
}

/// Maximiser and maximum of `(e^{−x} − 1 + x)/x^β`.
pub fn consistency_argmax(beta: f64) -> Result<(f64, f64)> {
    if !(beta > 1.0 && beta < 2.0) {
        return Err(KwgError::Domain(format!("beta = {beta} outside (1, 2)")));
    }
    let ratio = |t: f64| {
        let x = t.exp();
        relaxation_defect(x) / x.powf(beta)
    };
    let grid: Vec<f64> = (0..=3000).map(|i| -40.0 + 50.0 * i as f64 / 3000.0).collect();
    let (imax, _) = grid
        .iter()
        .map(|&t| ratio(t))
        .enumerate()
        .fold((0, f64::MIN), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let lo = grid[imax.saturating_sub(1)];
    let hi = grid[(imax + 1).min(grid.len() - 1)];
    let (t, v) = golden_max(ratio, lo, hi, 1e-13);
    Ok((t.exp(), v))
}

/// Monotone piecewise-cubic (Fritsch-Carlson) interpolant of a symbol table.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolTable {
    x: Vec<f64>,
    g: Vec<f64>,
    slopes: Vec<f64>,
}

impl SymbolTable {
    pub fn new(x: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        if x.len() != g.len() || x.len() < 16 {
            return Err(KwgError::Format(format!(
                "symbol table needs >= 16 rows of (x, g), got {}",
                x.len().min(g.len())
            )));
        }
        if x[0] != 0.0 {
            return Err(KwgError::Format("symbol table must start at x = 0".into()));
        }
        if let Some(w) = x.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(KwgError::Format(format!("x not strictly increasing at row {}", w + 2)));
        }
        let n = x.len();
        let delta: Vec<f64> = (0..n - 1).map(|i| (g[i + 1] - g[i]) / (x[i + 1] - x[i])).collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = delta[0];
        slopes[n - 1] = delta[n - 2];
        for i in 1..n - 1 {
            slopes[i] = if delta[i - 1] * delta[i] <= 0.0 {
                0.0
            } else {
                let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
                let (w1, w2) = (2.0 * h1 + h0, h1 + 2.0 * h0);
                (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i])
            };
        }
        Ok(Self { x, g, slopes })
    }

    /// Parses whitespace- or comma-separated `x g` rows; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut x = Vec::new();
        let mut g = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let cols: Vec<&str> = body
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if cols.len() != 2 {
                return Err(KwgError::Format(format!(
                    "line {}: expected two columns, found {}",
                    lineno + 1,
                    cols.len()
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| KwgError::Format(format!("line {}: malformed number {s:?}", lineno + 1)))
            };
            x.push(parse(cols[0])?);
            g.push(parse(cols[1])?);
        }
        Self::new(x, g)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Interpolated value; constant continuation beyond the last row.
    pub fn eval(&self, xv: f64) -> f64 {
        let n = self.x.len();
        if xv <= 0.0 {
            return self.g[0];
        }
        if xv >= self.x[n - 1] {
            return self.g[n - 1];
        }
        let i = self.x.partition_point(|&v| v <= xv) - 1;
        let h = self.x[i + 1] - self.x[i];
        let t = (xv - self.x[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.g[i] + h10 * h * self.slopes[i] + h01 * self.g[i + 1] + h11 * h * self.slopes[i + 1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelFamily {
    Gaussian,
    Custom(SymbolTable),
}

/// Radial symbol `g` with `φ̂_ε(ξ) = g(ε²|ξ|²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSymbol {
    pub family: KernelFamily,
    pub eps: f64,
}

impl KernelSymbol {
    pub fn gaussian(eps: f64) -> Self {
        Self { family: KernelFamily::Gaussian, eps }
    }

    /// Custom table, rejected unless every admissibility clause holds.
    pub fn custom(table: SymbolTable, eps: f64) -> Result<Self> {
        let k = Self { family: KernelFamily::Custom(table), eps };
        let report = check_admissibility(&k);
        if let Some(v) = report.violations.first() {
            return Err(KwgError::InvalidParameter(format!(
                "kernel not admissible: {} (x = {:.6e}, value = {:.6e})",
                v.clause.describe(),
                v.x,
                v.value
            )));
        }
        Ok(k)
    }

    /// Unchecked custom symbol, for probing admissibility.
    pub fn custom_unchecked(table: SymbolTable, eps: f64) -> Self {
        Self { family: KernelFamily::Custom(table), eps }
    }

    pub fn g(&self, x: f64) -> f64 {
        match &self.family {
            KernelFamily::Gaussian => (-x).exp(),
            KernelFamily::Custom(t) => t.eval(x),
        }
    }

    pub fn one_minus_g(&self, x: f64) -> f64 {
        match &self.family {
            KernelFamily::Gaussian => -(-x).exp_m1(),
            KernelFamily::Custom(t) => 1.0 - t.eval(x),
        }
    }

    /// `h(x) = (1 − g(x))/x`.
    pub fn h(&self, x: f64) -> f64 {
        match &self.family {
            KernelFamily::Gaussian => relaxation_ratio(x),
            KernelFamily::Custom(_) => self.one_minus_g(x) / x,
        }
    }

    /// Symbol at wavevector magnitude squared `xi2`.
    pub fn symbol(&self, xi2: f64) -> f64 {
        self.g(self.eps * self.eps * xi2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clause {
    UnitAtOrigin,
    RangeUnitInterval,
    HStrictlyDecreasing,
    KNondecreasing,
    HLimitAtZero,
    HLimitAtInfinity,
    KLimitAtZero,
    KLimitAtInfinity,
    ConsistencyRatioNonnegative,
    ConsistencyRatioBounded,
}

impl Clause {
    pub fn describe(&self) -> &'static str {
        match self {
            Clause::UnitAtOrigin => "g(0) = 1",
            Clause::RangeUnitInterval => "0 <= g <= 1",
            Clause::HStrictlyDecreasing => "h = (1-g)/x decreasing",
            Clause::KNondecreasing => "k = 1-g nondecreasing",
            Clause::HLimitAtZero => "h -> 1 at 0",
            Clause::HLimitAtInfinity => "h -> 0 at infinity",
            Clause::KLimitAtZero => "k -> 0 at 0",
            Clause::KLimitAtInfinity => "k -> 1 at infinity",
            Clause::ConsistencyRatioNonnegative => "(g-1+x)/x^beta >= 0",
            Clause::ConsistencyRatioBounded => "(g-1+x)/x^beta bounded",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub clause: Clause,
    pub x: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AdmissibilityReport {
    pub violations: Vec<Violation>,
}

impl AdmissibilityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
    pub fn fails(&self, clause: Clause) -> bool {
        self.violations.iter().any(|v| v.clause == clause)
    }
}

/// Samples the symbol on a log grid and reports the first witness of each failed clause.
pub fn check_admissibility(symbol: &KernelSymbol) -> AdmissibilityReport {
    let xs = log_space(1e-6, 1e6, 1201);
    let mut out = AdmissibilityReport::default();
    let mut flag = |clause: Clause, x: f64, value: f64| {
        if !out.fails(clause) {
            out.violations.push(Violation { clause, x, value });
        }
    };
    let g0 = symbol.g(0.0);
    if (g0 - 1.0).abs() > 1e-12 {
        flag(Clause::UnitAtOrigin, 0.0, g0);
    }
    let mut prev: Option<(f64, f64)> = None;
    for &x in &xs {
        let g = symbol.g(x);
        if !(0.0..=1.0).contains(&g) {
            flag(Clause::RangeUnitInterval, x, g);
        }
        let (h, k) = (symbol.h(x), symbol.one_minus_g(x));
        if let Some((hp, kp)) = prev {
            if !(h < hp) {
                flag(Clause::HStrictlyDecreasing, x, h);
            }
            if k < kp {
                flag(Clause::KNondecreasing, x, k);
            }
        }
        prev = Some((h, k));
    }
    let (x_lo, x_hi) = (xs[0], xs[xs.len() - 1]);
    let h_lo = symbol.h(x_lo);
    if (h_lo - 1.0).abs() > 1e-3 {
        flag(Clause::HLimitAtZero, x_lo, h_lo);
    }
    let h_hi = symbol.h(x_hi);
    if h_hi > 1e-3 {
        flag(Clause::HLimitAtInfinity, x_hi, h_hi);
    }
    let k_lo = symbol.one_minus_g(x_lo);
    if k_lo.abs() > 1e-3 {
        flag(Clause::KLimitAtZero, x_lo, k_lo);
    }
    let k_hi = symbol.one_minus_g(x_hi);
    if (k_hi - 1.0).abs() > 1e-3 {
        flag(Clause::KLimitAtInfinity, x_hi, k_hi);
    }
    for beta in [1.25, 1.5, 1.75] {
        let cap = consistency_constant(beta).unwrap_or(f64::INFINITY);
        let mut sup = 0.0f64;
        for &x in &xs {
            let r = (symbol.g(x) - 1.0 + x) / x.powf(beta);
            if r < -1e-12 {
                flag(Clause::ConsistencyRatioNonnegative, x, r);
            }
            sup = sup.max(r);
        }
        // A kernel dominated by the Gaussian defect stays within a bounded multiple of its constant.
        if !sup.is_finite() || sup > 1e3 * cap {
            flag(Clause::ConsistencyRatioBounded, x_hi, sup);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capillarity_examples() {
        assert_eq!(capillarity_symbol(0.0, 1.0, 0.3), 0.0);
        assert!((capillarity_symbol(1.0, 1.0, 1.0) - (1.0 - (-1f64).exp())).abs() < 1e-15);
        assert_eq!(capillarity_symbol(2.0, 1.5, 0.0), 3.0);
        for eps in [1e-1, 1e-2, 1e-3] {
            let gap = (capillarity_symbol(4.0, 1.0, eps) - 4.0).abs();
            assert!(gap <= eps * eps * 16.0 / 2.0 + 1e-15);
        }
    }

    #[test]
    fn gamma_root() {
        let g = threshold_gamma();
        assert!((g - 1.593624260040043).abs() < 1e-12);
        assert!(relaxation_ratio(g / 2.0) > 0.5);
        assert!(relaxation_ratio(2.0 * g) < 0.5);
    }

    #[test]
    fn threshold_examples() {
        let g = threshold_gamma();
        assert_eq!(frequency_threshold(0.1, g, 8.0 / 3.0).unwrap(), 2);
        assert_eq!(frequency_threshold(0.05, g, 8.0 / 3.0).unwrap(), 3);
        assert!(frequency_threshold(1e-6, g, 8.0 / 3.0).unwrap() > 15);
        assert!(frequency_threshold(0.0, g, 8.0 / 3.0).is_err());
    }

    #[test]
    fn threshold_at_exact_power_of_two() {
        // √γ/(εC₀) = 4 exactly: l = 2, and 2^{l+1} is strictly above.
        let g = 4.0;
        assert_eq!(frequency_threshold(0.25, g, 2.0).unwrap(), 2);
    }

    #[test]
    fn consistency_examples() {
        let (x, c) = consistency_argmax(1.5).unwrap();
        assert!((c - 0.401737).abs() < 1e-5 && (x - 2.149).abs() < 1e-2);
        let c125 = consistency_constant(1.25).unwrap();
        assert!((c125 - 0.53601).abs() < 1e-4);
        let near_two = consistency_constant(1.999).unwrap();
        assert!(near_two < 0.5 && near_two > 0.47);
        assert!(consistency_constant(2.0).is_err());
        assert!(consistency_constant(1.0).is_err());
    }

    #[test]
    fn defect_series_matches_direct_form() {
        // Oracle: Taylor sum of (−x)^n/n! from n = 2 below 1, closed form above.
        let oracle = |x: f64| -> f64 {
            if x >= 1.0 {
                return (-x).exp() - 1.0 + x;
            }
            let (mut term, mut sum) = (-x, 0.0);
            for n in 2..=30 {
                term *= -x / n as f64;
                sum += term;
            }
            sum
        };
        for x in [1e-6, 1e-3, 0.1, 0.49, 0.51, 3.0] {
            let want = oracle(x);
            assert!((relaxation_defect(x) - want).abs() <= 1e-14 * want, "x = {x}");
        }
    }

    #[test]
    fn gaussian_admissible() {
        assert!(check_admissibility(&KernelSymbol::gaussian(0.1)).passed());
    }

    fn table_from(f: impl Fn(f64) -> f64) -> SymbolTable {
        let mut x = vec![0.0];
        x.extend(log_space(1e-7, 1e7, 400));
        let g = x.iter().map(|&v| f(v)).collect();
        SymbolTable::new(x, g).unwrap()
    }

    #[test]
    fn constant_symbol_fails_k_limit() {
        let k = KernelSymbol::custom_unchecked(table_from(|_| 1.0), 1.0);
        let r = check_admissibility(&k);
        assert!(r.fails(Clause::KLimitAtInfinity));
        assert!(KernelSymbol::custom(table_from(|_| 1.0), 1.0).is_err());
    }

    #[test]
    fn hat_symbol_fails_monotone_h() {
        let k = KernelSymbol::custom_unchecked(table_from(|x| (1.0 - 2.0 * x).max(0.0)), 1.0);
        let r = check_admissibility(&k);
        let w = r.violations.iter().find(|v| v.clause == Clause::HStrictlyDecreasing).unwrap();
        assert!(w.x < 0.5);
    }

    #[test]
    fn tabulated_gaussian_is_admissible() {
        let k = KernelSymbol::custom(table_from(|x| (-x).exp()), 1.0).unwrap();
        for x in [0.01, 0.5, 2.0] {
            assert!((k.g(x) - (-x).exp()).abs() < 1e-3);
        }
    }

    #[test]
    fn table_parse_errors_carry_lines() {
        let err = SymbolTable::parse("0 1\n0.1 abc\n").unwrap_err();
        assert!(err.to_string().contains("line 2"));
        let short = SymbolTable::parse("0 1\n1 0.5\n").unwrap_err();
        assert!(short.to_string().contains(">= 16"));
    }
}
