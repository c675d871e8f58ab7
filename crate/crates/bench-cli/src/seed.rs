/// SplitMix64 finalizer: a cheap, well-mixed 64-bit hash.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Per-instance random stream derived from the master seed and the
/// instance's index, so datasets are reproducible and order-independent.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index)
}

/// Further stream split (e.g. one stream per solver on the same instance).
pub fn derive_stream(master: u64, index: u64, stream: u64) -> u64 {
    splitmix64(derive_seed(master, index) ^ splitmix64(stream.wrapping_add(0x51ed2700)))
}
