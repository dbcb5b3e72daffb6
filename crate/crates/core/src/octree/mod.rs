//! Linear octrees over the unit cube.

mod balance;
mod lists;
mod morton;
mod refine;
mod tree;

pub use balance::balance_2to1;
pub use lists::{build_interaction_lists, Interaction, InteractionLists, ListCounts};
pub use morton::{morton_decode, morton_encode, offsets27, touching, MortonKey, MAX_DEPTH};
pub use refine::{refine_adaptive, RefineOptions, Refinement, Tolerance};
pub use tree::{parse_tree_text, Octree};
