//! Sparse index tracking: price panels, tracking-error metrics and rolling
//! backtests.

mod backtest;
mod metrics;
mod panel;
mod synthetic;

pub use backtest::{
    run_backtest, window_splits, write_window_csv, BacktestConfig, BacktestReport, RegressionMode,
    SizeFit, WindowConfig, WindowReport, WindowSplit,
};
pub use metrics::{annual_tracking_error, simple_returns, TRADING_DAYS};
pub use panel::{load_prices, parse_prices, LoadConfig, MissingPolicy, PricePanel, PricePolicy};
pub use synthetic::{synthetic_panel, SyntheticPanel, SyntheticPanelSpec};
