//! Instance generators, fixed corpora and competitive-ratio experiments.

mod corpus;
mod generators;
mod ratio;

pub use corpus::{degree_corpus, mixed_corpus, ongap_corpus, onbap_corpus, NamedInstance};
pub use generators::{gen_family, Family, Range};
pub use ratio::{
    run_random_order, to_csv_string, write_csv, ExperimentConfig, OrderMode, RatioReport, CSV_HEADER,
    MAX_ENUMERATED_ITEMS,
};
