//! Hybrid social-network engine: semantic profile matchmaking over a concept
//! taxonomy, peer discovery and chat over simulated short-range links,
//! social-graph operations, and failover between short-range and wide-area
//! transports, driven by a deterministic discrete-event simulator.

pub mod contentstore;
pub mod matchmaking;
pub mod netsim;
pub mod ontology;
pub mod protocol;
pub mod socialgraph;
pub mod time;

pub use time::SimTime;
