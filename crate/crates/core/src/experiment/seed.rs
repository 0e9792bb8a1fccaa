use crate::predictor::BackboneKind;
use crate::report::Method;

/// SplitMix64 finalizer: a bijection on `u64` with full avalanche.
pub fn mix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a.
pub fn hash_str(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Seed of one grid cell: the root seed folded with each cell coordinate
/// through [`mix64`].
pub fn derive_seed(
    root: u64,
    dataset_id: &str,
    backbone: BackboneKind,
    method: Method,
    horizon: usize,
    repetition: usize,
) -> u64 {
    [
        hash_str(dataset_id),
        u64::from(backbone.code()),
        u64::from(method.code()),
        horizon as u64,
        repetition as u64,
    ]
    .into_iter()
    .fold(mix64(root), |h, part| mix64(h ^ part))
}
