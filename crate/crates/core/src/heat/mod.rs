//! Heat kernels of the nearest-neighbour Laplacian and the method of images.

mod bessel;
mod images;
mod kernel;

pub use bessel::{
    bessel_i, bessel_i_scaled, recurrence_scaled_table, series_scaled, BesselI, SeriesValue, MAX_ORDER, OVERFLOW_X,
};
pub use images::{
    boundary_distance, fit_envelope, fit_free_gaussian, geometric_inequality_holds, geometric_ratio,
    images_bound_check, images_exponent, semigroup_difference, GaussianFit, ImagesEntry, ImagesReport,
};
pub use kernel::{
    dirichlet_kernel, full_kernel, gaussian_tail_bound, image_kernel, kernel_halfline, kernel_nd, p_t, KernelTable,
};
