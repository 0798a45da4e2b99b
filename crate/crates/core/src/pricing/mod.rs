//! European options under the kernel, implied volatility and skew.

mod black;
mod option;
mod price;
mod smile;

pub use black::{implied_vol, model_price, price_bounds};
pub use option::{OptionSide, OptionSpec, VolConvention};
pub use price::{is_lattice, price_european, price_with_kernel, pricing_kernel, PRICING_POINTS_PER_STD};
pub use smile::{build_smile, build_smile_with, skew_term_structure, SkewPoint, SmileSurface, MAX_OFFSET, SKEW_WINDOW};
