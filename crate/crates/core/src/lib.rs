//! Sentiment-aware forecasting of daily cryptocurrency returns and a trading
//! backtest that turns the forecasts into gains over a buy-and-hold baseline.

pub mod backtest;
pub mod error;
pub mod featselect;
pub mod indicators;
pub mod ingest;
pub mod models;
pub mod pipeline;
pub mod sentiment;

pub use error::{Error, Result};
