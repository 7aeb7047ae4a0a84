//! Model specification types, parameter constraints and fractional
//! differencing.

use std::fmt;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::kv::KvMap;
use crate::numeric::poly::{ar_roots, ma_roots};

/// Tolerance on |root| − 1 for the unit-circle checks.
pub const ROOT_TOL: f64 = 1e-8;
/// Distance below which an AR and an MA root are considered common.
pub const COMMON_ROOT_TOL: f64 = 1e-6;

/// Seasonal structure: aggregate-scale periods `z` (strictly increasing) and,
/// for finite aggregation, the aggregation size `m`. Fine-scale periods are
/// `s_i = m·z_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeasonalSpec {
    z: Vec<u32>,
    m: Option<u32>,
}

impl SeasonalSpec {
    pub fn new(z: Vec<u32>, m: Option<u32>) -> Result<Self> {
        if let Some(&first) = z.first() {
            if first < 1 {
                return invalid("seasonal periods must be positive");
            }
        }
        if z.windows(2).any(|w| w[0] >= w[1]) {
            return invalid(format!("seasonal periods must be strictly increasing, got {z:?}"));
        }
        if let Some(m) = m {
            if m < 2 {
                return invalid(format!("aggregation size must be at least 2, got {m}"));
            }
        }
        Ok(SeasonalSpec { z, m })
    }

    /// Number of seasonal components.
    pub fn c(&self) -> usize {
        self.z.len()
    }

    pub fn z(&self) -> &[u32] {
        &self.z
    }

    pub fn m(&self) -> Option<u32> {
        self.m
    }

    pub fn with_m(&self, m: Option<u32>) -> Result<Self> {
        Self::new(self.z.clone(), m)
    }

    /// Fine-scale periods s_i = m·z_i, when `m` is set.
    pub fn fine_periods(&self) -> Option<Vec<u64>> {
        self.m.map(|m| self.z.iter().map(|&z| z as u64 * m as u64).collect())
    }

    /// True when component `j` has unit period and so its fractional order is
    /// confounded with `d` in the limiting model.
    pub fn unit_period(&self, j: usize) -> bool {
        self.z[j] == 1
    }

    pub fn write_kv(&self, kv: &mut KvMap) {
        let z: Vec<f64> = self.z.iter().map(|&v| v as f64).collect();
        kv.insert_list("z", &z);
        if let Some(m) = self.m {
            kv.insert("m", m);
        }
    }

    pub fn from_kv(kv: &KvMap) -> Result<Self> {
        let z = kv.list_u32("z")?.unwrap_or_default();
        let m = kv.parse_value::<u32>("m")?;
        Self::new(z, m)
    }
}

/// AR and MA coefficients of one polynomial pair, with the conventions
/// φ(x) = 1 − Σ ar_k x^k and θ(x) = 1 + Σ ma_k x^k.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ArmaPoly {
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
}

impl ArmaPoly {
    pub fn new(ar: Vec<f64>, ma: Vec<f64>) -> Self {
        ArmaPoly { ar, ma }
    }

    pub fn is_empty(&self) -> bool {
        self.ar.is_empty() && self.ma.is_empty()
    }

    pub fn ar_at(&self, omega: f64) -> Complex64 {
        poly_at(&self.ar, -1.0, omega)
    }

    pub fn ma_at(&self, omega: f64) -> Complex64 {
        poly_at(&self.ma, 1.0, omega)
    }
}

/// 1 + sign·Σ c_k e^{ikω}.
fn poly_at(coeffs: &[f64], sign: f64, omega: f64) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for (k, &c) in coeffs.iter().enumerate() {
        let a = (k + 1) as f64 * omega;
        acc += sign * c * Complex64::new(a.cos(), a.sin());
    }
    acc
}

/// Parameters ξ and σ². `seasonal_arma[j]` belongs to component j and acts
/// on B^{z_j} (limiting model) or B^{s_j} (fine scale). `regular_arma` is the
/// fine-scale φ(B), θ(B) pair and only enters the SARFIMA and finite
/// aggregation spectra.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub d: f64,
    pub seasonal_d: Vec<f64>,
    pub seasonal_arma: Vec<ArmaPoly>,
    pub regular_arma: ArmaPoly,
    pub sigma2: f64,
}

impl ModelParams {
    /// Pure fractional model with unit σ² and no ARMA terms.
    pub fn long_memory(d: f64, seasonal_d: Vec<f64>) -> Self {
        let c = seasonal_d.len();
        ModelParams {
            d,
            seasonal_d,
            seasonal_arma: vec![ArmaPoly::default(); c],
            regular_arma: ArmaPoly::default(),
            sigma2: 1.0,
        }
    }

    pub fn c(&self) -> usize {
        self.seasonal_d.len()
    }

    /// d + ΣD_j.
    pub fn total_memory(&self) -> f64 {
        self.d + self.seasonal_d.iter().sum::<f64>()
    }

    pub fn with_sigma2(mut self, sigma2: f64) -> Self {
        self.sigma2 = sigma2;
        self
    }

    pub fn write_kv(&self, kv: &mut KvMap) {
        kv.insert("d", self.d);
        for (j, dj) in self.seasonal_d.iter().enumerate() {
            kv.insert(format!("D.{}", j + 1), dj);
        }
        for (j, p) in self.seasonal_arma.iter().enumerate() {
            if !p.ar.is_empty() {
                kv.insert_list(format!("ar.{}", j + 1), &p.ar);
            }
            if !p.ma.is_empty() {
                kv.insert_list(format!("ma.{}", j + 1), &p.ma);
            }
        }
        if !self.regular_arma.ar.is_empty() {
            kv.insert_list("phi", &self.regular_arma.ar);
        }
        if !self.regular_arma.ma.is_empty() {
            kv.insert_list("theta", &self.regular_arma.ma);
        }
        kv.insert("sigma2", self.sigma2);
    }

    /// Reads parameters for `c` seasonal components. Missing entries default
    /// to zero (σ² defaults to 1).
    pub fn from_kv(kv: &KvMap, c: usize) -> Result<Self> {
        let mut p = ModelParams::long_memory(kv.parse_or("d", 0.0)?, vec![0.0; c]);
        for j in 0..c {
            p.seasonal_d[j] = kv.parse_or(&format!("D.{}", j + 1), 0.0)?;
            p.seasonal_arma[j].ar = kv.list_f64(&format!("ar.{}", j + 1))?.unwrap_or_default();
            p.seasonal_arma[j].ma = kv.list_f64(&format!("ma.{}", j + 1))?.unwrap_or_default();
        }
        for (key, _) in kv.iter() {
            if let Some(idx) = key.strip_prefix("D.").or_else(|| key.strip_prefix("ar.")).or_else(|| key.strip_prefix("ma.")) {
                match idx.parse::<usize>() {
                    Ok(i) if i >= 1 && i <= c => {}
                    _ => return invalid(format!("key {key} does not match a seasonal component (c={c})")),
                }
            }
        }
        p.regular_arma.ar = kv.list_f64("phi")?.unwrap_or_default();
        p.regular_arma.ma = kv.list_f64("theta")?.unwrap_or_default();
        p.sigma2 = kv.parse_or("sigma2", 1.0)?;
        Ok(p)
    }
}

/// Integer differencing orders (r, R_1..R_c) with common bound K.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DiffOrders {
    pub r: u32,
    pub seasonal: Vec<u32>,
    pub max_order: u32,
}

impl DiffOrders {
    pub const DEFAULT_MAX: u32 = 2;

    pub fn new(r: u32, seasonal: Vec<u32>, max_order: u32) -> Result<Self> {
        if r > max_order || seasonal.iter().any(|&v| v > max_order) {
            return invalid(format!("differencing orders must lie in 0..={max_order}"));
        }
        Ok(DiffOrders { r, seasonal, max_order })
    }

    pub fn zero(c: usize) -> Self {
        DiffOrders { r: 0, seasonal: vec![0; c], max_order: Self::DEFAULT_MAX }
    }

    /// Lags consumed by this cell's differencing: r + Σ z_i·R_i.
    pub fn lags(&self, spec: &SeasonalSpec) -> usize {
        self.r as usize + spec.z().iter().zip(&self.seasonal).map(|(&z, &rr)| z as usize * rr as usize).sum::<usize>()
    }

    pub fn is_zero(&self) -> bool {
        self.r == 0 && self.seasonal.iter().all(|&v| v == 0)
    }

    /// Every cell (r, R_1..R_c) ∈ {0..K}^{c+1}, in lexicographic order.
    pub fn cells(c: usize, max_order: u32) -> Vec<DiffOrders> {
        let base = max_order as usize + 1;
        let count = base.pow(c as u32 + 1);
        (0..count)
            .map(|mut idx| {
                let mut digits = vec![0u32; c + 1];
                for slot in digits.iter_mut().rev() {
                    *slot = (idx % base) as u32;
                    idx /= base;
                }
                DiffOrders { r: digits[0], seasonal: digits[1..].to_vec(), max_order }
            })
            .collect()
    }

    /// Burn-in δ = K + Σ z_i·K shared by all cells.
    pub fn burn_in(spec: &SeasonalSpec, max_order: u32) -> usize {
        max_order as usize * (1 + spec.z().iter().map(|&z| z as usize).sum::<usize>())
    }

    pub fn write_kv(&self, kv: &mut KvMap) {
        kv.insert("r", self.r);
        for (j, v) in self.seasonal.iter().enumerate() {
            kv.insert(format!("R.{}", j + 1), v);
        }
        kv.insert("K", self.max_order);
    }

    pub fn from_kv(kv: &KvMap, c: usize) -> Result<Self> {
        let k = kv.parse_or("K", Self::DEFAULT_MAX)?;
        let r = kv.parse_or("r", 0)?;
        let mut seasonal = Vec::with_capacity(c);
        for j in 0..c {
            seasonal.push(kv.parse_or(&format!("R.{}", j + 1), 0)?);
        }
        Self::new(r, seasonal, k)
    }
}

impl fmt::Display for DiffOrders {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r={}", self.r)?;
        for (j, v) in self.seasonal.iter().enumerate() {
            write!(f, " R{}={}", j + 1, v)?;
        }
        Ok(())
    }
}

/// Settings for evaluating the truncated power sum and spectral grids.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumConfig {
    /// Truncation M of Σ_{k=−M}^{M} |ω+2kπ|^{−a}.
    pub truncation: u32,
    pub tail_correction: bool,
    /// Minimum number of nodes of the FFT quadrature grid on [0, 2π) used
    /// for autocovariances; also the point count of [`SpectrumConfig::grid`].
    pub grid_size: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig { truncation: 50, tail_correction: true, grid_size: 1 << 20 }
    }
}

impl SpectrumConfig {
    pub fn check(&self) -> Result<()> {
        if self.truncation < 1 {
            return invalid("truncation M must be at least 1");
        }
        if self.grid_size < 1 {
            return invalid("grid size must be positive");
        }
        Ok(())
    }

    /// The grid πj/grid_size, j = 1..grid_size.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.grid_size;
        (1..=n).map(|j| std::f64::consts::PI * j as f64 / n as f64).collect()
    }
}

/// Which polynomial a root-check finding refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Regular,
    Seasonal(usize),
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Component::Regular => write!(f, "regular"),
            Component::Seasonal(j) => write!(f, "seasonal component {}", j + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    ComponentCount { params: usize, spec: usize },
    SeasonalOrder { j: usize, value: f64 },
    RegularOrder { value: f64 },
    TotalMemoryHigh { total: f64 },
    TotalMemoryNegative { total: f64 },
    UnitPeriodOrder { j: usize, value: f64 },
    ArRoot { component: Component, modulus: f64 },
    MaRoot { component: Component, modulus: f64 },
    CommonRoot { component: Component },
    Sigma2 { value: f64 },
    NonFinite,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ComponentCount { params, spec } => {
                write!(f, "parameters have {params} seasonal components but the spec has {spec}")
            }
            Violation::SeasonalOrder { j, value } => write!(f, "D_{} = {value} outside [0, 1/2)", j + 1),
            Violation::RegularOrder { value } => write!(f, "d = {value} outside (-1/2, 1/2)"),
            Violation::TotalMemoryHigh { total } => write!(f, "d+ΣD ≥ 1/2 (d+ΣD = {total})"),
            Violation::TotalMemoryNegative { total } => write!(f, "d+ΣD < 0 (d+ΣD = {total})"),
            Violation::UnitPeriodOrder { j, value } => {
                write!(f, "D_{} = {value} must be 0 because z_{} = 1", j + 1, j + 1)
            }
            Violation::ArRoot { component, modulus } => {
                write!(f, "AR root on/inside unit circle ({component}, |root| = {modulus})")
            }
            Violation::MaRoot { component, modulus } => {
                write!(f, "MA root on/inside unit circle ({component}, |root| = {modulus})")
            }
            Violation::CommonRoot { component } => write!(f, "common AR/MA root ({component})"),
            Violation::Sigma2 { value } => write!(f, "sigma2 = {value} must be positive"),
            Violation::NonFinite => write!(f, "non-finite parameter value"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<Vec<String>> {
        if self.violations.is_empty() {
            Ok(self.warnings)
        } else {
            let msgs: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
            invalid(msgs.join("; "))
        }
    }
}

/// Checks `params` against the stationarity and identifiability constraints.
pub fn validate(params: &ModelParams, spec: &SeasonalSpec) -> ValidationReport {
    let mut report = ValidationReport::default();
    let v = &mut report.violations;
    let all_values = std::iter::once(params.d)
        .chain(std::iter::once(params.sigma2))
        .chain(params.seasonal_d.iter().copied())
        .chain(params.seasonal_arma.iter().flat_map(|p| p.ar.iter().chain(&p.ma).copied()))
        .chain(params.regular_arma.ar.iter().chain(&params.regular_arma.ma).copied());
    if all_values.clone().any(|x| !x.is_finite()) {
        v.push(Violation::NonFinite);
        return report;
    }
    if params.c() != spec.c() || params.seasonal_arma.len() != params.c() {
        v.push(Violation::ComponentCount { params: params.c(), spec: spec.c() });
        return report;
    }
    for (j, &dj) in params.seasonal_d.iter().enumerate() {
        if !(0.0..0.5).contains(&dj) {
            v.push(Violation::SeasonalOrder { j, value: dj });
        }
        if spec.unit_period(j) && dj != 0.0 {
            v.push(Violation::UnitPeriodOrder { j, value: dj });
        }
    }
    if !(params.d > -0.5 && params.d < 0.5) {
        v.push(Violation::RegularOrder { value: params.d });
    }
    let total = params.total_memory();
    if total >= 0.5 {
        v.push(Violation::TotalMemoryHigh { total });
    }
    if total < 0.0 {
        v.push(Violation::TotalMemoryNegative { total });
    }
    if params.sigma2 <= 0.0 {
        v.push(Violation::Sigma2 { value: params.sigma2 });
    }

    let mut polys: Vec<(Component, &ArmaPoly)> = vec![(Component::Regular, &params.regular_arma)];
    polys.extend(params.seasonal_arma.iter().enumerate().map(|(j, p)| (Component::Seasonal(j), p)));
    let mut per_component = Vec::new();
    for (component, poly) in polys {
        let ar = ar_roots(&poly.ar);
        let ma = ma_roots(&poly.ma);
        for r in &ar {
            if r.norm() - 1.0 <= ROOT_TOL {
                v.push(Violation::ArRoot { component, modulus: r.norm() });
            }
        }
        for r in &ma {
            if r.norm() - 1.0 <= ROOT_TOL {
                v.push(Violation::MaRoot { component, modulus: r.norm() });
            }
        }
        if ar.iter().any(|a| ma.iter().any(|b| (a - b).norm() < COMMON_ROOT_TOL)) {
            v.push(Violation::CommonRoot { component });
        }
        per_component.push((component, ar, ma));
    }

    // Cross-component cancellation compares roots in the backshift variable:
    // a root ρ of a polynomial in B^s contributes every s-th root of ρ.
    let period = |c: Component| -> u64 {
        match c {
            Component::Regular => 1,
            Component::Seasonal(j) => match spec.fine_periods() {
                Some(s) => s[j],
                None => spec.z()[j] as u64,
            },
        }
    };
    let expand = |roots: &[Complex64], s: u64| -> Vec<Complex64> {
        if s > 4096 {
            return Vec::new();
        }
        roots
            .iter()
            .flat_map(|r| {
                let base = r.powf(1.0 / s as f64);
                (0..s).map(move |k| base * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / s as f64))
            })
            .collect()
    };
    for (ca, ar, _) in &per_component {
        let ar_b = expand(ar, period(*ca));
        for (cb, _, ma) in &per_component {
            if ca == cb || ar.is_empty() || ma.is_empty() {
                continue;
            }
            let ma_b = expand(ma, period(*cb));
            if ar_b.iter().any(|a| ma_b.iter().any(|b| (a - b).norm() < COMMON_ROOT_TOL)) {
                report.warnings.push(format!("AR root of the {ca} polynomial matches an MA root of the {cb} polynomial"));
            }
        }
    }
    report
}

/// Coefficients c_0..c_n of (1−B)^d: c_k = Γ(k−d)/(Γ(k+1)Γ(−d)).
pub fn fracdiff_coeffs(d: f64, n: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(n + 1);
    c.push(1.0);
    for k in 1..=n {
        let prev = c[k - 1];
        c.push(prev * ((k - 1) as f64 - d) / k as f64);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    fn spec10() -> SeasonalSpec {
        SeasonalSpec::new(vec![10], None).unwrap()
    }

    #[test]
    fn spec_invariants() {
        assert!(SeasonalSpec::new(vec![10, 5], None).is_err());
        assert!(SeasonalSpec::new(vec![0], None).is_err());
        assert!(SeasonalSpec::new(vec![10], Some(1)).is_err());
        let s = SeasonalSpec::new(vec![1, 48, 336], Some(60)).unwrap();
        assert_eq!(s.fine_periods().unwrap(), vec![60, 2880, 20160]);
    }

    #[test]
    fn valid_long_memory_model() {
        let r = validate(&ModelParams::long_memory(0.2, vec![0.25]), &spec10());
        assert!(r.is_valid(), "{:?}", r);
    }

    #[test]
    fn total_memory_violation() {
        let r = validate(&ModelParams::long_memory(0.3, vec![0.3]), &spec10());
        assert_eq!(r.violations.len(), 1);
        assert!(r.violations[0].to_string().starts_with("d+ΣD ≥ 1/2"));
    }

    #[test]
    fn ar_root_inside_unit_circle() {
        let mut p = ModelParams::long_memory(0.1, vec![0.1]);
        p.seasonal_arma[0].ar = vec![1.05];
        let r = validate(&p, &spec10());
        assert!(r.violations.iter().any(|v| v.to_string().starts_with("AR root on/inside unit circle")));
    }

    #[test]
    fn negative_d_with_nonnegative_total_is_valid() {
        assert!(validate(&ModelParams::long_memory(-0.1, vec![0.3]), &spec10()).is_valid());
        assert!(!validate(&ModelParams::long_memory(-0.3, vec![0.2]), &spec10()).is_valid());
    }

    #[test]
    fn unit_period_forces_zero_order() {
        let spec = SeasonalSpec::new(vec![1, 48], None).unwrap();
        let r = validate(&ModelParams::long_memory(0.1, vec![0.1, 0.1]), &spec);
        assert!(matches!(r.violations[0], Violation::UnitPeriodOrder { j: 0, .. }));
    }

    #[test]
    fn common_root_within_component() {
        let mut p = ModelParams::long_memory(0.1, vec![0.1]);
        p.seasonal_arma[0] = ArmaPoly::new(vec![0.5], vec![-0.5]);
        let r = validate(&p, &spec10());
        assert!(r.violations.contains(&Violation::CommonRoot { component: Component::Seasonal(0) }));
    }

    #[test]
    fn cross_component_match_is_warning_only() {
        let spec = SeasonalSpec::new(vec![1, 2], None).unwrap();
        let mut p = ModelParams::long_memory(0.1, vec![0.0, 0.1]);
        // (1 − 0.25B²) has roots ±2; (1 − 0.5B) has root 2.
        p.seasonal_arma[0].ma = vec![-0.5];
        p.seasonal_arma[1].ar = vec![0.25];
        let r = validate(&p, &spec);
        assert!(r.is_valid());
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn fracdiff_small_lags() {
        let c = fracdiff_coeffs(0.4, 3);
        assert_eq!(c[0], 1.0);
        assert!((c[1] + 0.4).abs() < 1e-15);
    }

    #[test]
    fn fracdiff_matches_gamma_ratio() {
        let d = 0.3;
        let c = fracdiff_coeffs(d, 5);
        let direct = gamma(5.0 - d) / (gamma(6.0) * gamma(-d));
        assert!((c[5] - direct).abs() < 1e-12);
    }

    #[test]
    fn fracdiff_integer_order_is_binomial() {
        let c = fracdiff_coeffs(2.0, 6);
        assert_eq!(c, vec![1.0, -2.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn kv_round_trip() {
        let mut p = ModelParams::long_memory(0.2, vec![0.0, 0.1]);
        p.seasonal_arma[0] = ArmaPoly::new(vec![1.1277, -0.261], vec![-1.1788, 0.3593]);
        p.sigma2 = 0.09;
        let mut kv = KvMap::new();
        p.write_kv(&mut kv);
        let back = ModelParams::from_kv(&KvMap::parse(&kv.to_string()).unwrap(), 2).unwrap();
        assert_eq!(back, p);
        assert!(ModelParams::from_kv(&KvMap::parse("D.3=0.1").unwrap(), 2).is_err());
    }

    #[test]
    fn cells_enumerate_grid() {
        let cells = DiffOrders::cells(1, 2);
        assert_eq!(cells.len(), 9);
        assert_eq!(cells[0], DiffOrders::zero(1));
        assert_eq!(cells[5].r, 1);
        assert_eq!(cells[5].seasonal, vec![2]);
        let spec = SeasonalSpec::new(vec![10], None).unwrap();
        assert_eq!(DiffOrders::burn_in(&spec, 2), 22);
    }
}
