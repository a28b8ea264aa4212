//! Loading and aligning the raw inputs, and the feature matrix they end up in.

pub mod assemble;
pub mod matrix;
pub mod posts;
pub mod prices;

pub use assemble::{assemble_matrix, AssemblyInputs, FeatureInventory, PRICE_COLUMNS};
pub use matrix::{
    add_lags, apply_standardization, read_matrix, split_train_test, standardize, weekday_dummies, write_matrix,
    ColumnKind, ColumnMeta, ColumnStats, FeatureMatrix, WEEKDAY_COLUMNS,
};
pub use posts::{filter_posts, load_posts, Currency, FilterRules, Source, SourceRule, TextPost};
pub use prices::{
    compute_returns, load_daily_table, load_price_series, parse_day, DailyTable, PriceBar, PriceSchema,
    PriceSeries, ReturnSeries,
};
