pub mod basedist;
pub mod error;
pub mod grammar;
pub mod mixture;
pub mod moments;
pub mod quadrature;
pub mod rng;
pub mod specfun;
pub mod stieltjes;
pub mod verifier;

pub use basedist::{DistributionSpec, Sampler, StieltjesClosedForm};
pub use error::{Error, Result};
pub use grammar::{parse_distribution, parse_mixture, parse_spec, ParseError, Spec};
pub use rng::RandomStream;
pub use stieltjes::{ComplexPoint, Identity, ResidualReport};
pub use verifier::{Scenario, VerificationReport};
pub use mixture::{ConditionalLaw, Family, MixtureSpec, Weight};
pub use moments::{MomentMethod, MomentReport, OrderStatMoments};
