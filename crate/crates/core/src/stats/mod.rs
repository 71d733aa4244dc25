//! Distribution normalization, 2-D PCA and corpus summaries.

mod contour;
mod normalize;
mod pca;
mod summary;

pub use contour::{density_contour, point_in_polygon, polygon_area, MIN_CONTOUR_POINTS};
pub use normalize::{fit_skew_normalize, noisiness_offset, Exponents, SkewNormalizeParams};
pub use pca::{fit_pca2, fit_projection, Pca2, Projection};
pub use summary::{conditional_median, group_summaries, percentile_curve, smooth_centroid_curve, GroupSummary};
