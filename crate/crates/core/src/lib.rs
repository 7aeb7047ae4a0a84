//! Seasonal long-memory models for temporally aggregated time series.
//!
//! The crate covers the full workflow for aggregate series whose spectra have
//! poles at the origin and at seasonal frequencies:
//!
//! - [`spectra`]: fine-scale SARFIMA, finite-aggregation and limiting-aggregate
//!   spectral densities, the truncated power sum and the normalization constant.
//! - [`sample`]: regular/seasonal differencing and the raw periodogram.
//! - [`whittle`]: spectral (Whittle) maximum likelihood over a grid of integer
//!   differencing orders.
//! - [`asymptotics`]: Fisher information, asymptotic intervals and a
//!   frequency-domain parametric bootstrap.
//! - [`simulate`]: exact Gaussian simulation from any implemented spectrum and
//!   the Monte Carlo harness.
//! - [`forecast`]: multi-step linear prediction and forecast-efficiency curves.
//!
//! ```
//! use lmagg::model::{DiffOrders, ModelParams, SeasonalSpec, SpectrumConfig};
//! use lmagg::spectra::limiting_spectrum_unnorm;
//!
//! let spec = SeasonalSpec::new(vec![10], None).unwrap();
//! let params = ModelParams::long_memory(0.2, vec![0.25]);
//! let orders = DiffOrders::zero(1);
//! let f = limiting_spectrum_unnorm(&params, &orders, &spec, 1.0, &SpectrumConfig::default()).unwrap();
//! assert!(f > 0.0);
//! ```

pub mod angle;
pub mod asymptotics;
pub mod error;
pub mod forecast;
pub mod kv;
pub mod model;
pub mod numeric;
pub mod optimize;
pub mod sample;
pub mod simulate;
pub mod spectra;
pub mod whittle;

pub use error::{Error, Result};
pub use sample::Series;

/// Runs `f` over `items`, in parallel when the `parallel` feature is enabled.
/// Output order always matches input order.
pub(crate) fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}
