use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("series diverges: {0}")]
    Convergence(String),
    #[error("grid error: {message} (suggested x_min={suggested_min}, x_max={suggested_max})")]
    Grid {
        message: String,
        suggested_min: f64,
        suggested_max: f64,
    },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("composition error: {0}")]
    Composition(String),
    #[error("unstable truncation: Re(symbol) > 0 on wavenumber band [{p_lo}, {p_hi}]")]
    Stability { p_lo: f64, p_hi: f64 },
    #[error("alpha = 0: use lemma1_moments")]
    UseLemma1,
    #[error("degenerate blurring density: {0}")]
    Degenerate(String),
    #[error("metric fit infeasible: max residual {max_residual:e}")]
    Infeasible {
        residuals: Vec<f64>,
        max_residual: f64,
    },
    #[error("simulation error: {0}")]
    Simulation(String),
    #[error("statistics error: {0}")]
    Statistics(String),
    #[error("price {price} outside no-arbitrage bounds [{lower}, {upper}]")]
    ArbitrageBound { price: f64, lower: f64, upper: f64 },
    #[error("at maturity {maturity}, strike {strike}: {source}")]
    AtPoint {
        maturity: f64,
        strike: f64,
        source: Box<Error>,
    },
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Stable, module-qualified identifier for machine consumption.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "model.domain",
            Error::Config(_) => "model.config",
            Error::Convergence(_) => "model.convergence",
            Error::Grid { .. } => "kernel.grid",
            Error::Validation(_) => "kernel.validation",
            Error::Composition(_) => "kernel.composition",
            Error::Stability { .. } => "kernel.stability",
            Error::UseLemma1 => "geometry.use_lemma1",
            Error::Degenerate(_) => "geometry.degenerate",
            Error::Infeasible { .. } => "geometry.infeasible",
            Error::Simulation(_) => "simulate.nan",
            Error::Statistics(_) => "simulate.statistics",
            Error::ArbitrageBound { .. } => "pricing.arbitrage_bound",
            Error::AtPoint { source, .. } => source.code(),
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
