//! State spaces, offspring laws, environments and first-moment kernels.

mod environment;
mod lattice;
mod law;
mod matrix;

pub use environment::{
    sample_environment, AtomDocument, CountsDocument, EnvironmentRealization, EnvironmentSpec,
    LawDocument, SpecDocument,
};
pub use lattice::{spans_integer_lattice, GeneratorSet, Point, Window};
pub use law::{OffspringVector, SiteLaw};
pub use matrix::{build_moment_kernel, convolve_n, homogeneous_kernel, Boundary, MomentKernel};
