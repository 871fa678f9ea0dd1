//! Classical baselines over TF-IDF features: class-weighted linear SVM,
//! random forest, a single decision tree, and multinomial naive Bayes.
//! All of them handle the three task schemas through per-topic /
//! one-vs-rest reduction.

pub mod forest;
pub mod nb;
pub mod svm;
pub mod tree;

pub use forest::{
    forest_predict, forest_train, tree_model_predict, tree_model_train, ForestHyper,
    RandomForestModel, TreeModel,
};
pub use nb::{nb_predict, nb_train, NaiveBayesModel};
pub use svm::{svm_predict, svm_train, LinearSvmModel, SvmHyper};
pub use tree::{gini, tree_train, DecisionTree, TreeHyper};
