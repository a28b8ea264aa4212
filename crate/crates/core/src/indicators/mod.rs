//! Technical indicators over daily bars.
//!
//! Which indicators exist, their windows and the columns they expand into are
//! declared in an inventory file; the formulas live in the family modules.

pub mod lagged;
pub mod momentum;
pub mod primitives;
pub mod trend;
pub mod volatility;
pub mod volume;

use std::collections::BTreeMap;
use std::sync::OnceLock;

use chrono::NaiveDate;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::ingest::PriceSeries;

const INVENTORY_TOML: &str = include_str!("../../data/indicator_inventory.toml");

/// Number of columns the non-lagged families expand into.
pub const TECHNICAL_COLUMNS: usize = 78;
/// Number of columns of the lagged family.
pub const LAGGED_COLUMNS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Volume,
    Volatility,
    Trend,
    Momentum,
    Lagged,
}

/// How a column responds when all price fields are multiplied by `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleClass {
    Linear,
    Invariant,
    Quadratic,
}

impl ScaleClass {
    pub fn factor(self, k: f64) -> f64 {
        match self {
            ScaleClass::Linear => k,
            ScaleClass::Invariant => 1.0,
            ScaleClass::Quadratic => k * k,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct Component {
    pub column: String,
    pub scale: ScaleClass,
    #[serde(default)]
    pub binary: bool,
}

#[derive(Debug, Clone, Deserialize)]
pub struct IndicatorSpec {
    pub name: String,
    pub family: Family,
    pub inputs: Vec<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub components: Vec<Component>,
}

impl IndicatorSpec {
    fn param(&self, key: &str) -> Result<f64> {
        self.params
            .get(key)
            .copied()
            .ok_or_else(|| Error::Validation(format!("indicator `{}` lacks parameter `{key}`", self.name)))
    }

    fn window(&self, key: &str) -> Result<usize> {
        let v = self.param(key)?;
        if v < 1.0 || v.fract() != 0.0 {
            return Err(Error::Validation(format!(
                "indicator `{}`: `{key}` must be a positive integer, got {v}",
                self.name
            )));
        }
        Ok(v as usize)
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct Inventory {
    #[serde(rename = "indicator")]
    pub indicators: Vec<IndicatorSpec>,
}

impl Inventory {
    pub fn parse(text: &str) -> Result<Self> {
        let inv: Inventory = toml::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        let mut seen = std::collections::BTreeSet::new();
        for spec in &inv.indicators {
            for c in &spec.components {
                if !seen.insert(c.column.clone()) {
                    return Err(Error::Validation(format!("duplicate indicator column `{}`", c.column)));
                }
            }
        }
        Ok(inv)
    }

    /// The built-in inventory.
    pub fn builtin() -> &'static Inventory {
        static INV: OnceLock<Inventory> = OnceLock::new();
        INV.get_or_init(|| Inventory::parse(INVENTORY_TOML).expect("built-in indicator inventory is valid"))
    }

    pub fn family(&self, family: Family) -> impl Iterator<Item = &IndicatorSpec> {
        self.indicators.iter().filter(move |s| s.family == family)
    }

    pub fn component(&self, column: &str) -> Option<&Component> {
        self.indicators
            .iter()
            .flat_map(|s| &s.components)
            .find(|c| c.column == column)
    }

    pub fn column_names(&self, families: &[Family]) -> Vec<String> {
        self.indicators
            .iter()
            .filter(|s| families.contains(&s.family))
            .flat_map(|s| s.components.iter().map(|c| c.column.clone()))
            .collect()
    }
}

/// Bar fields as parallel vectors.
#[derive(Debug, Clone)]
pub struct Ohlcv {
    pub open: Vec<f64>,
    pub high: Vec<f64>,
    pub low: Vec<f64>,
    pub close: Vec<f64>,
    pub volume: Vec<f64>,
}

impl Ohlcv {
    pub fn len(&self) -> usize {
        self.close.len()
    }

    pub fn is_empty(&self) -> bool {
        self.close.is_empty()
    }
}

impl From<&PriceSeries> for Ohlcv {
    fn from(s: &PriceSeries) -> Self {
        Ohlcv {
            open: s.opens(),
            high: s.highs(),
            low: s.lows(),
            close: s.closes(),
            volume: s.volumes(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct IndicatorColumn {
    pub name: String,
    pub family: Family,
    pub scale: ScaleClass,
    pub binary: bool,
    /// NaN where the indicator is still warming up.
    pub values: Vec<f64>,
}

impl IndicatorColumn {
    pub fn first_valid(&self) -> Option<usize> {
        primitives::first_valid(&self.values)
    }
}

#[derive(Debug, Clone)]
pub struct IndicatorTable {
    pub dates: Vec<NaiveDate>,
    pub columns: Vec<IndicatorColumn>,
}

impl IndicatorTable {
    pub fn column(&self, name: &str) -> Option<&IndicatorColumn> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Index of the first row where every column is defined.
    pub fn warmup_end(&self) -> Option<usize> {
        (0..self.dates.len()).find(|&i| self.columns.iter().all(|c| !c.values[i].is_nan()))
    }
}

fn compute(spec: &IndicatorSpec, b: &Ohlcv, other: Option<&Ohlcv>) -> Result<Vec<Vec<f64>>> {
    let c = &b.close;
    let out: Vec<Vec<f64>> = match spec.name.as_str() {
        "money_flow_index" => vec![volume::money_flow_index(b, spec.window("window")?)],
        "accumulation_distribution" => vec![volume::accumulation_distribution(b)],
        "on_balance_volume" => vec![volume::on_balance_volume(b)],
        "chaikin_money_flow" => vec![volume::chaikin_money_flow(b, spec.window("window")?)],
        "force_index" => vec![volume::force_index(b, spec.window("window")?)],
        "ease_of_movement" => {
            let (em, sma_em) = volume::ease_of_movement(b, spec.window("window")?);
            vec![em, sma_em]
        }
        "volume_price_trend" => vec![volume::volume_price_trend(b)],
        "negative_volume_index" => vec![volume::negative_volume_index(b)],
        "volume_weighted_average_price" => vec![volume::vwap(b, spec.window("window")?)],

        "bollinger_bands" => {
            volatility::bollinger(b, spec.window("window")?, spec.param("deviations")?).to_vec()
        }
        "keltner_channel" => volatility::keltner(b, spec.window("window")?).to_vec(),
        "donchian_channel" => volatility::donchian(b, spec.window("window")?).to_vec(),
        "average_true_range" => vec![volatility::average_true_range(b, spec.window("window")?)],
        "ulcer_index" => vec![volatility::ulcer_index(b, spec.window("window")?)],

        "simple_moving_average" => vec![
            primitives::sma(c, spec.window("fast")?),
            primitives::sma(c, spec.window("slow")?),
        ],
        "exponential_moving_average" => vec![
            primitives::ema(c, spec.window("fast")?),
            primitives::ema(c, spec.window("slow")?),
        ],
        "weighted_moving_average" => vec![
            primitives::wma(c, spec.window("fast")?),
            primitives::wma(c, spec.window("slow")?),
        ],
        "macd" => trend::macd(c, spec.window("fast")?, spec.window("slow")?, spec.window("signal")?).to_vec(),
        "average_directional_index" => trend::adx(b, spec.window("window")?).to_vec(),
        "vortex" => trend::vortex(b, spec.window("window")?).to_vec(),
        "trix" => vec![trend::trix(c, spec.window("window")?)],
        "mass_index" => vec![trend::mass_index(b, spec.window("fast")?, spec.window("slow")?)],
        "commodity_channel_index" => vec![trend::cci(b, spec.window("window")?, spec.param("constant")?)],
        "detrended_price_oscillator" => vec![trend::dpo(c, spec.window("window")?)],
        "know_sure_thing" => trend::kst(
            c,
            [spec.window("roc1")?, spec.window("roc2")?, spec.window("roc3")?, spec.window("roc4")?],
            [
                spec.window("window1")?,
                spec.window("window2")?,
                spec.window("window3")?,
                spec.window("window4")?,
            ],
            spec.window("signal")?,
        )
        .to_vec(),
        "ichimoku" => trend::ichimoku(
            b,
            spec.window("conversion")?,
            spec.window("base")?,
            spec.window("span_b")?,
        )
        .to_vec(),
        "parabolic_sar" => trend::parabolic_sar(b, spec.param("step")?, spec.param("max_step")?).to_vec(),
        "schaff_trend_cycle" => vec![trend::schaff_trend_cycle(
            c,
            spec.window("slow")?,
            spec.window("fast")?,
            spec.window("cycle")?,
            spec.window("smooth1")?,
            spec.window("smooth2")?,
        )],

        "relative_strength_index" => vec![momentum::rsi(c, spec.window("window")?)],
        "stochastic_rsi" => momentum::stoch_rsi(
            c,
            spec.window("window")?,
            spec.window("smooth1")?,
            spec.window("smooth2")?,
        )
        .to_vec(),
        "true_strength_index" => vec![momentum::tsi(c, spec.window("slow")?, spec.window("fast")?)],
        "ultimate_oscillator" => vec![momentum::ultimate_oscillator(
            b,
            [spec.window("window1")?, spec.window("window2")?, spec.window("window3")?],
            [spec.param("weight1")?, spec.param("weight2")?, spec.param("weight3")?],
        )],
        "stochastic_oscillator" => momentum::stochastic(b, spec.window("window")?, spec.window("smooth")?).to_vec(),
        "williams_r" => vec![momentum::williams_r(b, spec.window("window")?)],
        "awesome_oscillator" => vec![momentum::awesome_oscillator(b, spec.window("fast")?, spec.window("slow")?)],
        "kaufman_adaptive_moving_average" => vec![momentum::kama(
            c,
            spec.window("window")?,
            spec.window("fast")?,
            spec.window("slow")?,
        )],
        "rate_of_change" => vec![momentum::rate_of_change(c, spec.window("window")?)],
        "percentage_price_oscillator" => {
            momentum::percentage_oscillator(c, spec.window("fast")?, spec.window("slow")?, spec.window("signal")?)
                .to_vec()
        }
        "percentage_volume_oscillator" => momentum::percentage_oscillator(
            &b.volume,
            spec.window("fast")?,
            spec.window("slow")?,
            spec.window("signal")?,
        )
        .to_vec(),

        "close_open_return" => vec![lagged::close_open_return(b)],
        "log_return" => vec![lagged::log_return(b)],
        "cumulative_return" => vec![lagged::cumulative_return(b)],
        "trading_volume" => vec![b.volume.clone()],
        "moving_price_std" => vec![lagged::moving_std(b, spec.window("window")?)],
        "parkinson_volatility" => vec![lagged::parkinson(b)],
        "intraday_range" => vec![lagged::intraday_range(b)],
        "other_close" | "other_return" | "other_volume" => {
            let o = other.ok_or_else(|| {
                Error::Argument(format!("indicator `{}` needs the other currency's bars", spec.name))
            })?;
            match spec.name.as_str() {
                "other_close" => vec![o.close.clone()],
                "other_return" => vec![lagged::simple_return(&o.close)],
                _ => vec![o.volume.clone()],
            }
        }
        other => return Err(Error::Validation(format!("unknown indicator `{other}`"))),
    };
    if out.len() != spec.components.len() {
        return Err(Error::Validation(format!(
            "indicator `{}` yields {} columns but the inventory lists {}",
            spec.name,
            out.len(),
            spec.components.len()
        )));
    }
    Ok(out)
}

fn build(
    inventory: &Inventory,
    families: &[Family],
    series: &PriceSeries,
    other: Option<&PriceSeries>,
) -> Result<IndicatorTable> {
    let bars = Ohlcv::from(series);
    let dates = series.dates();
    let other_bars = match other {
        Some(o) => Some(Ohlcv::from(&o.select(&dates, "other currency prices")?)),
        None => None,
    };
    let mut columns = Vec::new();
    for spec in inventory.indicators.iter().filter(|s| families.contains(&s.family)) {
        let values = compute(spec, &bars, other_bars.as_ref())?;
        for (comp, v) in spec.components.iter().zip(values) {
            columns.push(IndicatorColumn {
                name: comp.column.clone(),
                family: spec.family,
                scale: comp.scale,
                binary: comp.binary,
                values: v,
            });
        }
    }
    Ok(IndicatorTable { dates, columns })
}

/// The volume, volatility, trend and momentum columns.
pub fn technical_indicators(series: &PriceSeries) -> Result<IndicatorTable> {
    technical_indicators_with(Inventory::builtin(), series)
}

pub fn technical_indicators_with(inventory: &Inventory, series: &PriceSeries) -> Result<IndicatorTable> {
    build(
        inventory,
        &[Family::Volume, Family::Volatility, Family::Trend, Family::Momentum],
        series,
        None,
    )
}

/// The per-day technicals that enter the feature set with lags, including the
/// other currency's close, return and volume. `other` must cover every date of
/// `series`.
pub fn lagged_technicals(series: &PriceSeries, other: &PriceSeries) -> Result<IndicatorTable> {
    build(Inventory::builtin(), &[Family::Lagged], series, Some(other))
}
