//! Exact verification of bounds on `|W|` in terms of the index of `Γ`, where
//! `Γ ⊆ GL_m(Z/n)` or `Γ ⊆ Sp(2m, Z/n)` acts abelianly on the submodule `W`.
//!
//! The modules build on each other:
//!
//! * [`modring`]: residues, factorization, the Chinese remainder theorem.
//! * [`matmod`]: matrices over `Z/n`, commutators on submodules, the
//!   symplectic form.
//! * [`submodules`]: canonical shapes via local Smith normal form, the
//!   stabilizer pattern, primary decomposition.
//! * [`groups`]: ambient orders, closures, indices, reduction maps.
//! * [`bounds`]: the right-hand sides and [`bounds::verify_instance`].
//! * [`search`]: subgroup lattices, invariant submodules, exhaustive runs.
//!
//! All comparisons are exact. Floating point appears only in reported
//! approximations and in ordering search results.
//!
//! ```
//! use abl::bounds::{verify_instance, VerifyOptions};
//! use abl::groups::{AmbientGroup, GroupHandle};
//! use abl::matmod::MatrixMod;
//! use abl::submodules::Submodule;
//!
//! let gamma = GroupHandle::new(
//!     AmbientGroup::sp(1, 3)?,
//!     vec![MatrixMod::from_rows(3, &[vec![2, 0], vec![0, 2]])?],
//! )?;
//! let w = Submodule::full(3, 2)?;
//! let report = verify_instance(&gamma, &w, &VerifyOptions::default())?;
//! assert!(report.report().unwrap().all_hold());
//! # Ok::<(), abl::error::Error>(())
//! ```

pub mod bounds;
pub mod error;
pub mod groups;
pub mod matmod;
pub mod modring;
pub mod report;
pub mod search;
pub mod submodules;

pub use error::{Error, Result};
