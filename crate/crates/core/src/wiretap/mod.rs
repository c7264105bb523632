//! Wiretap code specifications and the Alice, Bob and Eve sides of the
//! scheme.

mod codec;
mod spec;

pub use codec::{
    decode, decode_vector, encode, encode_with, eve_attack, CodewordFrame, DecodeStrategy,
    InsecureSeededRandomness, RandomnessSource, SecureRandomness,
};
pub use spec::{
    build_spec, BuildOptions, DeltaSpec, DeltaWindow, Scheme, SpecBinding, WiretapCodeSpec,
};
