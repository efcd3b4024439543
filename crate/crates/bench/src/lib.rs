//! Fixtures shared by the benchmarks.

use emsr_core::{EmsrCode, EmsrCodeword, EmsrParams, FieldElement};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn desk_code() -> EmsrCode {
    EmsrCode::build(&EmsrParams::desk()).expect("desk instance builds")
}

pub fn random_message(code: &EmsrCode, seed: u64) -> Vec<FieldElement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = code.field().modulus() as u64;
    (0..code.message_len())
        .map(|_| code.field().elem(rng.gen_range(0..p)))
        .collect()
}

pub fn desk_codeword(code: &EmsrCode) -> EmsrCodeword {
    code.encode(&random_message(code, 0))
        .expect("message has the right length")
}
