//! The polar transform `G_n = P_n G^{(x)m}` and its decoders.

mod decoder;
mod frozen;
mod multipath;
mod transform;

pub use decoder::{sc_decode, sc_decode_genie, TieBreak, TIE_TOLERANCE};
pub use frozen::FrozenPattern;
pub use multipath::{multipath_decode, multipath_decode_paths, DecodePath, MultipathConfig};
pub use transform::{
    apply_transform, bit_reversal_permutation, bit_reverse, log2_len, transform_in_place,
    TransformSpec,
};
