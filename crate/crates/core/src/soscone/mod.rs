//! Sums of hermitian squares: Gram systems, exact certificates, dual
//! witnesses, Laplacian shifts and Kazhdan gaps.

mod absorb;
mod certificate;
mod exact;
mod gram;
mod kazhdan;
mod laplace;
pub mod sdp;

pub use absorb::*;
pub use certificate::*;
pub use exact::*;
pub use gram::*;
pub use kazhdan::*;
pub use laplace::*;
