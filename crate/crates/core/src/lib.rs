//! Information-theoretic band selection for hyperspectral cubes.
//!
//! The crate covers the whole pipeline: loading a cube and its ground-truth
//! map ([`cube_io`]), histogram estimators of entropy and (joint/conditional)
//! mutual information ([`infotheory`]), three greedy band selectors
//! ([`selectors`]), SVM/kNN evaluation of a selected subset ([`eval`]) and
//! synthetic cubes with known answers ([`synthgen`]).
//!
//! ```
//! use hyperband_core::{synthgen, QuantizationConfig, SelectionContext};
//!
//! let data = synthgen::generate(&synthgen::SynthSpec::duplicate(7)).unwrap();
//! let ctx = SelectionContext::new(&data.cube, &data.gt, QuantizationConfig::default()).unwrap();
//! let trace = ctx.select_jmi(2).unwrap();
//! assert_eq!(trace.selected[0], 0);
//! ```

pub mod cube_io;
pub mod error;
pub mod eval;
pub mod format;
pub mod infotheory;
pub mod selectors;
pub mod synthgen;

pub use cube_io::{
    labels_series, load_cube, load_ground_truth, quantize_band, DiscreteSeries, GroundTruth, HyperCube, QuantStrategy,
    QuantizationConfig, Quantizer,
};
pub use error::{Error, Result};
pub use eval::{
    accuracy_sweep, classification_map, evaluate, stratified_split, train_classifier, train_knn, train_svm,
    ClassifierKind, ClassifierParams, EvalReport, SplitPlan, SvmModel, SvmParams, SweepConfig, SweepPoint,
    TrainedModel,
};
pub use infotheory::{conditional_mi, entropy, joint_entropy, joint_mi, mutual_information, JointHistogram};
pub use selectors::{
    mi_profile, select_ig, select_jmi, select_mi_threshold, update_gtest, GtEstimate, SelectionContext, SelectionTrace,
    SelectorConfig, SelectorKind, StopReason,
};
