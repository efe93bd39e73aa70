//! Procedural rule mining and constraint-guided step repair.
//!
//! The crate turns a structured laboratory inventory into per-object MDP
//! templates, collects uncertain `(state, action, next_state, reward)`
//! samples for each template, aggregates them into tabular world models and
//! mines required/forbidden preconditions plus producer-before-consumer
//! precedence rules. Those rules become soft ordering constraints for a
//! warm-started permutation search that repairs draft procedures.
//!
//! Stage overview:
//!
//! | module          | input                  | output                          |
//! |-----------------|------------------------|---------------------------------|
//! | [`inventory`]   | inventory JSON         | validated, resolved inventory   |
//! | [`template`]    | inventory              | one [`template::MdpTemplate`] per object |
//! | [`sample`]      | template + source      | [`sample::SampleBatch`]         |
//! | [`world_model`] | sample batches         | [`world_model::WorldModel`]     |
//! | [`rules`]       | world models           | preconditions + causal rules    |
//! | [`repair`]      | procedure + rules      | repaired ordering               |
//! | [`metrics`]     | candidate + truth      | sequence-similarity report      |
//! | [`pipeline`]    | config file            | file artifacts + manifests      |

pub mod inventory;
pub mod metrics;
pub mod pipeline;
pub mod repair;
pub mod rules;
pub mod sample;
pub mod schema;
pub mod template;
pub mod vocab;
pub mod world_model;

pub use inventory::{parse_inventory, resolve_dynamic_domains, DomainInventory};
pub use template::{build_template, enumerate_states, MdpTemplate};
pub use vocab::{ActionRef, Bindings, State};
