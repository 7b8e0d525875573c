//! Design and analysis of reputation-based social norms for information
//! exchange systems whose users only observe a few other reputations.
//!
//! - [`norm`] and [`value`]: the social strategy, the randomized reputation
//!   update and the provider's threshold best response.
//! - [`belief`]: the beta-binomial belief mixture induced by `M` observations.
//! - [`dynamics`]: the mean-field change `Delta(rho_s)` of the social reputation.
//! - [`equilibrium`]: stable equilibria, analytic bounds and closed forms.
//! - [`design`]: choosing the punishment probability, plus parameter sweeps.
//! - [`abm`]: a seeded agent-based simulation of the full model.

pub mod abm;
pub mod belief;
pub mod bernstein;
pub mod design;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod norm;
pub mod params;
pub mod quadrature;
pub mod value;

pub use belief::{BeliefDistribution, Direction, TailQuery};
pub use dynamics::{DynamicsState, Flows, PolynomialForm, Trajectory};
pub use equilibrium::{EquilibriumReport, Root, Stability};
pub use error::{ParamError, SearchError};
pub use norm::Thresholds;
pub use params::{Action, Reputation, SystemParams, ARRIVAL_RATE, MAX_GRANULARITY};
pub use value::ValueTable;
