//! Shared toy cryptographic plumbing: the repo-wide digest, a hash-counter
//! keystream, and an authenticated keystream cipher with a bit-exact
//! ciphertext layout (used both by the lockable-obfuscation payload sealing
//! and by the toy FHE).
//!
//! None of this is security-bearing; it gives budget-limited adversaries a
//! concrete surface and makes sealed fields reproducible.

use alloc::vec::Vec;

use sha2::{Digest as _, Sha256};

use crate::bits::Bits;

/// Digest function recorded in reports.
pub const DIGEST_ALGORITHM: &str = "sha256";

/// Salt length in bytes (128 bits).
pub const SALT_LEN: usize = 16;

/// SHA-256 over the concatenation of `parts`, with length framing so that
/// part boundaries are unambiguous.
pub fn digest(parts: &[&[u8]]) -> [u8; 32] {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    h.finalize().into()
}

/// Deterministic keystream: SHA-256 in counter mode over (key, nonce).
pub fn keystream(key: &[u8], nonce: u64, len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(len);
    let mut counter = 0u64;
    while out.len() < len {
        let block = digest(&[b"ks", key, &nonce.to_le_bytes(), &counter.to_le_bytes()]);
        out.extend_from_slice(&block);
        counter += 1;
    }
    out.truncate(len);
    out
}

/// XOR a bit string against the keystream.
pub fn xor_bits(key: &[u8], nonce: u64, bits: &Bits) -> Bits {
    let ks = keystream(key, nonce, bits.len().div_ceil(8));
    let ks_bits = Bits::from_bytes(&ks, bits.len());
    let out = bits
        .iter()
        .zip(ks_bits.iter())
        .map(|(&a, &b)| a ^ b)
        .collect();
    Bits::from_bits(out)
}

/// Header layout of a sealed message: message length, nonce, payload, tag.
const LEN_BITS: usize = 16;
const NONCE_BITS: usize = 64;
const TAG_BITS: usize = 64;

/// Total bit length of a sealed `msg_len`-bit message.
pub const fn sealed_len_bits(msg_len: usize) -> usize {
    LEN_BITS + NONCE_BITS + msg_len + TAG_BITS
}

/// Seal `msg` under `key` with an explicit nonce: keystream XOR plus a
/// truncated MAC. The layout is bit-exact so sealed values can be fed to
/// boolean circuits.
pub fn seal(key: &[u8], nonce: u64, msg: &Bits) -> Bits {
    let payload = xor_bits(key, nonce, msg);
    let tag_full = digest(&[b"tag", key, &nonce.to_le_bytes(), &payload.to_bytes()]);
    let tag = Bits::from_bytes(&tag_full, TAG_BITS);
    let header = Bits::from_u64(msg.len() as u64, LEN_BITS).concat(&Bits::from_u64(nonce, NONCE_BITS));
    header.concat(&payload).concat(&tag)
}

/// Open a sealed message; `None` on any framing or tag failure.
pub fn open(key: &[u8], sealed: &Bits, expected_msg_len: usize) -> Option<Bits> {
    if sealed.len() != sealed_len_bits(expected_msg_len) {
        return None;
    }
    let claimed_len = sealed.slice(0, LEN_BITS).to_u64() as usize;
    if claimed_len != expected_msg_len {
        return None;
    }
    let nonce = sealed.slice(LEN_BITS, LEN_BITS + NONCE_BITS).to_u64();
    let payload = sealed.slice(LEN_BITS + NONCE_BITS, LEN_BITS + NONCE_BITS + expected_msg_len);
    let tag = sealed.slice(sealed.len() - TAG_BITS, sealed.len());
    let tag_full = digest(&[b"tag", key, &nonce.to_le_bytes(), &payload.to_bytes()]);
    if tag != Bits::from_bytes(&tag_full, TAG_BITS) {
        return None;
    }
    Some(xor_bits(key, nonce, &payload))
}

/// The nonce a sealed message was produced with (framing only, no check).
pub fn sealed_nonce(sealed: &Bits) -> u64 {
    sealed.slice(LEN_BITS, LEN_BITS + NONCE_BITS).to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::root_stream;

    #[test]
    fn seal_open_round_trip() {
        let mut rng = root_stream(5);
        for len in [1usize, 6, 13, 64, 200] {
            let msg = Bits::random(len, &mut rng);
            let sealed = seal(b"key", 77, &msg);
            assert_eq!(sealed.len(), sealed_len_bits(len));
            assert_eq!(open(b"key", &sealed, len).unwrap(), msg);
        }
    }

    #[test]
    fn open_rejects_wrong_key_and_tampering() {
        let msg = Bits::from_u64(0b101101, 6);
        let sealed = seal(b"key", 1, &msg);
        assert!(open(b"other", &sealed, 6).is_none());
        let mut tampered = sealed.clone();
        tampered.set(90, 1 - tampered.get(90));
        assert!(open(b"key", &tampered, 6).is_none());
    }

    #[test]
    fn keystream_is_deterministic_and_nonce_separated() {
        assert_eq!(keystream(b"k", 0, 40), keystream(b"k", 0, 40));
        assert_ne!(keystream(b"k", 0, 40), keystream(b"k", 1, 40));
    }
}
