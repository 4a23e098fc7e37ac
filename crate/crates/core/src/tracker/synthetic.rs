use chrono::{Datelike, NaiveDate, Weekday};
use ndarray::{Array1, Array2};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::panel::PricePanel;
use crate::error::{Error, Result};
use crate::sampling::RngSeed;

/// Factor-model price panel whose index is a fixed combination of a subset
/// of the assets plus optional noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticPanelSpec {
    pub n_assets: usize,
    pub n_days: usize,
    pub n_factors: usize,
    /// Number of assets with a nonzero index weight.
    pub active: usize,
    /// Daily sd of the common factor random walks.
    pub factor_sd: f64,
    /// Daily sd of each asset's idiosyncratic log-price random walk.
    pub idio_sd: f64,
    /// Sd of i.i.d. noise added to the index level, in price units.
    pub noise_sd: f64,
    /// AR(1) coefficient of the factor and idiosyncratic log-price processes:
    /// 1 gives random walks, 0 i.i.d. deviations around the base price.
    pub persistence: f64,
    pub start: NaiveDate,
    pub seed: RngSeed,
}

impl Default for SyntheticPanelSpec {
    fn default() -> Self {
        Self {
            n_assets: 100,
            n_days: 340,
            n_factors: 3,
            active: 100,
            factor_sd: 0.01,
            idio_sd: 0.01,
            noise_sd: 0.0,
            persistence: 1.0,
            start: NaiveDate::from_ymd_opt(2020, 1, 2).expect("valid date"),
            seed: RngSeed(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPanel {
    pub panel: PricePanel,
    /// Index weight of every asset (zero off the active subset).
    pub weights: Array1<f64>,
}

fn business_days(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    start
        .iter_days()
        .filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun))
        .take(count)
        .collect()
}

/// Asset `i` has log price `log bᵢ + Σₖ Lᵢₖ fₖ(t) + uᵢ(t)` with AR(1) factors
/// `f` and idiosyncratic terms `u`; the index is `Σᵢ wᵢ xᵢ(t) + ε(t)`.
pub fn synthetic_panel(spec: &SyntheticPanelSpec) -> Result<SyntheticPanel> {
    let (n, t) = (spec.n_assets, spec.n_days);
    if n == 0 || t < 2 || spec.active == 0 || spec.active > n {
        return Err(Error::InvalidSpec(format!(
            "need n_assets ≥ 1, n_days ≥ 2 and 1 ≤ active ≤ n_assets (got {n}, {t}, {})",
            spec.active
        )));
    }
    if [spec.factor_sd, spec.idio_sd, spec.noise_sd]
        .iter()
        .any(|v| !(*v >= 0.0) || !v.is_finite())
    {
        return Err(Error::InvalidSpec(
            "standard deviations must be nonnegative".into(),
        ));
    }
    if !(0.0..=1.0).contains(&spec.persistence) {
        return Err(Error::InvalidSpec(format!(
            "persistence must lie in [0, 1], got {}",
            spec.persistence
        )));
    }
    let phi = spec.persistence;
    let mut rng = spec.seed.rng();
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };

    let k = spec.n_factors;
    let mut factors = Array2::<f64>::zeros((t, k));
    for s in 1..t {
        for f in 0..k {
            factors[[s, f]] = phi * factors[[s - 1, f]] + spec.factor_sd * normal();
        }
    }
    let loadings = Array2::from_shape_simple_fn((n, k), || 0.5 + normal().abs());
    let mut idio = Array2::<f64>::zeros((t, n));
    for s in 1..t {
        for i in 0..n {
            idio[[s, i]] = phi * idio[[s - 1, i]] + spec.idio_sd * normal();
        }
    }
    let eps: Vec<f64> = (0..t).map(|_| normal()).collect();

    let mut rng = spec.seed.derive(1).rng();
    let base: Vec<f64> = (0..n).map(|_| rng.random_range(20.0..200.0)).collect();
    let mut weights = Array1::<f64>::zeros(n);
    let mut chosen = sample(&mut rng, n, spec.active).into_vec();
    chosen.sort_unstable();
    for i in chosen {
        weights[i] = rng.random_range(0.5..1.5);
    }

    let common = factors.dot(&loadings.t());
    let asset_prices = Array2::from_shape_fn((t, n), |(s, i)| {
        base[i] * (common[[s, i]] + idio[[s, i]]).exp()
    });
    let mut index_prices = asset_prices.dot(&weights);
    for (s, v) in index_prices.iter_mut().enumerate() {
        *v += spec.noise_sd * eps[s];
    }
    let panel = PricePanel {
        dates: business_days(spec.start, t),
        index_prices,
        asset_prices,
        asset_ids: (0..n).map(|i| format!("A{i:03}")).collect(),
    };
    panel.validate()?;
    Ok(SyntheticPanel { panel, weights })
}
