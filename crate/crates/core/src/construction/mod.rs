//! Bit-channel quality tables and the index sets derived from them.

mod bec;
mod brute;
pub mod cache;
mod quality;
mod quantize;
mod sets;

pub use bec::evolve_bec;
pub use brute::{brute_force_bitchannels, BRUTE_FORCE_LIMIT};
pub use quality::{BitChannelBounds, BitChannelQuality, QualityMethod};
pub use quantize::evolve_quantized;
pub use sets::{
    degradation_inclusion_check, good_set, good_threshold_log2, is_below_good_threshold, poor_set,
    select_sets, unresolved_good_set, InclusionReport, SetReport,
};

pub(crate) use brute::{product_row, vector_channel_table};
pub(crate) use sets::check_beta;

use crate::channel::{ChannelDescriptor, ChannelKind};
use crate::error::Result;

/// Default output-alphabet cap for quantized construction.
pub const DEFAULT_MU: usize = 256;

/// Exact evolution for erasure channels, quantized bounds otherwise.
pub fn construct(descriptor: &ChannelDescriptor, m: u32, mu: usize) -> Result<BitChannelQuality> {
    match (descriptor.kind, descriptor.param) {
        (ChannelKind::Bec, Some(eps)) => evolve_bec(eps, m),
        _ => evolve_quantized(&descriptor.build()?, m, mu),
    }
}
