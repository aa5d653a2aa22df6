//! Prime-field arithmetic and dense functions on `F_q^m`.

mod dft;
mod field;
mod function;
pub mod io;
mod sphere;

pub use dft::{dft, dft_complex, dft_naive, idft, Twiddles};
pub use field::{is_prime, PrimeField};
pub use function::{ComplexFunction, FieldFunction};
pub use sphere::{make_sphere, sphere_decay, SphereDecay, SphereFunction};
