//! Yule-Simpson reversals for two pure preparations and two binary effects,
//! evaluated both for classical mixtures of the preparations (QC) and for
//! coherent superpositions of them (QQ).
//!
//! ```
//! use ysq_core::{evaluate, Category, LurkingVars, Scenario};
//! use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
//!
//! let s = Scenario::exclusive_events_example();
//! let v = LurkingVars::new(FRAC_PI_2, FRAC_PI_4, PI, PI).unwrap();
//! let e = evaluate(&s, &v).unwrap();
//! assert_eq!(e.classification.category, Category::QqOnly);
//! assert!((e.qq.p_super - 0.5).abs() < 1e-12);
//! assert!((e.qq.q_super - 0.25 / (1.0 - 0.5f64.sqrt())).abs() < 1e-12);
//! ```

pub mod engine;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod model;
pub mod sampling;
pub mod tol;

pub use engine::{
    classify, classify_results, evaluate, interpolate, lambda_family, qc_condition_threshold,
    qc_probabilities, qq_probabilities, superposition_norm, superposition_state, Category,
    Classification, Direction, Evaluation, Interval, LambdaResult, QcResult, QcThreshold, QqResult,
};
pub use error::{Result, YsError};
pub use linalg::{CVec, Dim, HermMat, C64};
pub use model::{Effect, LurkingVars, Premise, PureState, Scenario, ScenarioFile, ScenarioScalars};
pub use sampling::{EffectKind, EffectMeasure, PremiseMode, SampleConfig, StateMeasure};
pub use tol::TOL;
