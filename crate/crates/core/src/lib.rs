//! Locally regenerating codes over F_{q^m}: a Gabidulin precode followed by
//! local product-matrix MBR or fractional-repetition codes, with bounds on
//! minimum distance and file size and exhaustive checks of both.

pub mod bounds;
pub mod error;
pub mod frlocal;
pub mod gabidulin;
pub mod galois;
pub mod linpoly;
pub mod lrc;
pub mod mbr;

pub use bounds::BoundContext;
pub use error::{Error, Result};
pub use frlocal::{Design, FrCode};
pub use gabidulin::GabidulinCode;
pub use galois::{ArithOp, BaseMatrix, ExtField, FieldElement};
pub use linpoly::{interpolate, LinearizedPoly};
pub use lrc::{LocalCode, LrcCode, RepairPath, RepairReport, Shard, ShardRole};
pub use mbr::{MbrCode, RankProfile};
