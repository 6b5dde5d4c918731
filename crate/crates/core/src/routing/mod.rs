//! Beaconless greedy forwarding, select-and-protest planarization, face
//! routing, and their composition into end-to-end routes.

mod bfp;
mod face;
mod greedy;
mod route;

pub use bfp::{bfp_planarize, bfp_with_timers, gabriel_edges, BfpResult, PlanarSubgraph};
pub use face::{face_next_hop, FaceState};
pub use greedy::{blgf_select, ppa_candidates, ppa_round, BlgfSearch};
pub use route::{route, HopMode, RouteConfig, RouteFailure, RouteHop, RouteResult, DEFAULT_MAX_RESTARTS};
