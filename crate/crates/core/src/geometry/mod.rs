//! Planar projections, slices and visibility.

pub mod direction;
pub mod interval;
pub mod pattern;
pub mod projection;
pub mod slice;
pub mod visibility;

pub use direction::{Direction, Offset, SliceQuery, Slope, Symmetry};
pub use interval::{largest_interior_interval, ExactUnion, IntervalUnion};
pub use pattern::Pattern;
pub use projection::{
    cantor_approximation, pattern_projection_exact, project_cell, project_cell_exact,
    project_level_set, project_level_set_exact,
};
pub use slice::{
    classify_entrance, partial_ergodic_sum, pattern_slice_count, pattern_slice_counts,
    pattern_slice_counts_with, realization_slice_counts, slice_box_dimension,
    slice_box_dimension_from_counts, slice_cells, slice_cells_with, Contact, Entrance,
    ErgodicAverage, Side, SliceDimension,
};
pub use visibility::{visible_first_hit, FirstHit, RaySide};
