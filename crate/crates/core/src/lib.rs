//! Numerical checks of complete monotonicity and hyperbolic complete
//! monotonicity for functions on the positive orthant.
//!
//! * [`cmcheck`]: finite-difference CM testing and Bernstein-mixture controls.
//! * [`hyper`]: hyperbolic products, w-coordinates, density transforms and
//!   the catalog of densities and explicit w-forms.
//! * [`quad`]: deterministic quadrature on `(0, ∞)^d`, derived densities and
//!   Laplace transforms.
//! * [`scenarios`]: scripted checks of each structural claim, including the
//!   four-dimensional representation of the product counterexample.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cmcheck;
pub mod error;
pub mod hyper;
pub mod jet;
pub mod quad;
pub mod scenarios;

pub use cmcheck::{
    bernstein_mixture, cm_test, forward_difference, Axis, CmReport, CmSettings, Evaluation,
    FunctionHandle, GridSpec, MultiIndex, Spacing, StepSpec, Verdict, Witness,
};
pub use error::{Error, Result};
pub use hyper::{
    catalog_density, catalog_wform, hcm_test_1d, hyperbolic_product, transform_density, v_to_w,
    w_to_v_1d, BasePoint, Density, Params, TransformKind, WForm, WPoint,
};
pub use quad::{
    derived_density, integrate, laplace_transform, DerivedKind, QuadResult, QuadSpec, Transform,
};
pub use scenarios::{run_scenario, Outcome, ScenarioConfig, ScenarioResult, SCENARIO_NAMES};
