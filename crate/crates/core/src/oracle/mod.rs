//! Ground truth for tests: a brute-force isometry decision, exact random
//! clouds and isometries, and a search for WL-indistinguishable pairs.

mod isometry;
mod random;
mod search;

pub use isometry::{is_isometric, isometry_check, Alignment, Mismatch};
pub use random::{apply_random_isometry, random_cloud, random_rational_orthogonal};
pub use search::{search_indistinguishable, Finding, SearchParams, Strategy};
