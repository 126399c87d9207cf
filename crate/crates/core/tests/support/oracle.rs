//! Reference implementations sharing no code with the library: SHA-256 and
//! HMAC from FIPS 180-4 / RFC 2104, P-256 arithmetic on big integers, and
//! RFC 6979 nonce generation.

use num_bigint::BigUint;
use num_traits::Zero;

const K: [u32; 64] = [
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5, 0xd807aa98,
    0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786,
    0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8,
    0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13,
    0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819,
    0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a,
    0x5b9cca4f, 0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
    0xc67178f2,
];

pub fn sha256(message: &[u8]) -> [u8; 32] {
    let mut h: [u32; 8] =
        [0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a, 0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19];
    let mut padded = message.to_vec();
    padded.push(0x80);
    while padded.len() % 64 != 56 {
        padded.push(0);
    }
    padded.extend_from_slice(&((message.len() as u64) * 8).to_be_bytes());
    for block in padded.chunks(64) {
        let mut w = [0u32; 64];
        for t in 0..16 {
            w[t] = u32::from_be_bytes([block[4 * t], block[4 * t + 1], block[4 * t + 2], block[4 * t + 3]]);
        }
        for t in 16..64 {
            let s0 = w[t - 15].rotate_right(7) ^ w[t - 15].rotate_right(18) ^ (w[t - 15] >> 3);
            let s1 = w[t - 2].rotate_right(17) ^ w[t - 2].rotate_right(19) ^ (w[t - 2] >> 10);
            w[t] = w[t - 16].wrapping_add(s0).wrapping_add(w[t - 7]).wrapping_add(s1);
        }
        let [mut a, mut b, mut c, mut d, mut e, mut f, mut g, mut hh] = h;
        for t in 0..64 {
            let s1 = e.rotate_right(6) ^ e.rotate_right(11) ^ e.rotate_right(25);
            let ch = (e & f) ^ (!e & g);
            let t1 = hh.wrapping_add(s1).wrapping_add(ch).wrapping_add(K[t]).wrapping_add(w[t]);
            let s0 = a.rotate_right(2) ^ a.rotate_right(13) ^ a.rotate_right(22);
            let maj = (a & b) ^ (a & c) ^ (b & c);
            let t2 = s0.wrapping_add(maj);
            hh = g;
            g = f;
            f = e;
            e = d.wrapping_add(t1);
            d = c;
            c = b;
            b = a;
            a = t1.wrapping_add(t2);
        }
        for (x, y) in h.iter_mut().zip([a, b, c, d, e, f, g, hh]) {
            *x = x.wrapping_add(y);
        }
    }
    let mut out = [0u8; 32];
    for (chunk, word) in out.chunks_mut(4).zip(h) {
        chunk.copy_from_slice(&word.to_be_bytes());
    }
    out
}

pub fn hmac_sha256(key: &[u8], message: &[u8]) -> [u8; 32] {
    let mut block = [0u8; 64];
    if key.len() > 64 {
        block[..32].copy_from_slice(&sha256(key));
    } else {
        block[..key.len()].copy_from_slice(key);
    }
    let inner: Vec<u8> = block.iter().map(|b| b ^ 0x36).chain(message.iter().copied()).collect();
    let outer: Vec<u8> = block.iter().map(|b| b ^ 0x5c).chain(sha256(&inner)).collect();
    sha256(&outer)
}

fn hex_int(s: &str) -> BigUint {
    BigUint::parse_bytes(s.as_bytes(), 16).unwrap()
}

pub fn p() -> BigUint {
    hex_int("ffffffff00000001000000000000000000000000ffffffffffffffffffffffff")
}

pub fn n() -> BigUint {
    hex_int("ffffffff00000000ffffffffffffffffbce6faada7179e84f3b9cac2fc632551")
}

pub fn b() -> BigUint {
    hex_int("5ac635d8aa3a93e7b3ebbd55769886bc651d06b0cc53b0f63bce3c3e27d2604b")
}

pub fn g() -> Point {
    Point::Affine(
        hex_int("6b17d1f2e12c4247f8bce6e563a440f277037d812deb33a0f4a13945d898c296"),
        hex_int("4fe342e2fe1a7f9b8ee7eb4a7c0f9e162bce33576b315ececbb6406837bf51f5"),
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Point {
    Infinity,
    Affine(BigUint, BigUint),
}

fn sub_mod(a: &BigUint, b: &BigUint, m: &BigUint) -> BigUint {
    ((a % m) + m - (b % m)) % m
}

fn inv_mod(a: &BigUint, m: &BigUint) -> BigUint {
    a.modpow(&(m - 2u32), m)
}

impl Point {
    pub fn on_curve(&self) -> bool {
        match self {
            Point::Infinity => true,
            Point::Affine(x, y) => {
                let p = p();
                let rhs = sub_mod(&(x * x * x + b()), &(BigUint::from(3u32) * x), &p);
                (y * y) % &p == rhs
            }
        }
    }

    pub fn add(&self, other: &Point) -> Point {
        let p = p();
        match (self, other) {
            (Point::Infinity, q) | (q, Point::Infinity) => q.clone(),
            (Point::Affine(x1, y1), Point::Affine(x2, y2)) => {
                let lambda = if x1 == x2 {
                    if (y1 + y2) % &p == BigUint::zero() {
                        return Point::Infinity;
                    }
                    let num = sub_mod(&(BigUint::from(3u32) * x1 * x1), &BigUint::from(3u32), &p);
                    num * inv_mod(&(BigUint::from(2u32) * y1), &p) % &p
                } else {
                    sub_mod(y2, y1, &p) * inv_mod(&sub_mod(x2, x1, &p), &p) % &p
                };
                let x3 = sub_mod(&(&lambda * &lambda), &(x1 + x2), &p);
                let y3 = sub_mod(&(&lambda * sub_mod(x1, &x3, &p)), y1, &p);
                Point::Affine(x3, y3)
            }
        }
    }

    /// Left-to-right double-and-add.
    pub fn mul(&self, k: &BigUint) -> Point {
        let mut acc = Point::Infinity;
        for i in (0..k.bits()).rev() {
            acc = acc.add(&acc);
            if k.bit(i) {
                acc = acc.add(self);
            }
        }
        acc
    }

    pub fn x(&self) -> Option<&BigUint> {
        match self {
            Point::Infinity => None,
            Point::Affine(x, _) => Some(x),
        }
    }

    /// SEC1 compressed form.
    pub fn compressed(&self) -> [u8; 33] {
        let Point::Affine(x, y) = self else { panic!("identity has no compressed form") };
        let mut out = [0u8; 33];
        out[0] = if y.bit(0) { 3 } else { 2 };
        out[1..].copy_from_slice(&be32(x));
        out
    }
}

pub fn be32(v: &BigUint) -> [u8; 32] {
    let bytes = v.to_bytes_be();
    let mut out = [0u8; 32];
    out[32 - bytes.len()..].copy_from_slice(&bytes);
    out
}

pub fn int(bytes: &[u8]) -> BigUint {
    BigUint::from_bytes_be(bytes)
}

/// RFC 6979 nonce for P-256 / SHA-256 (qlen = hlen = 256, so bits2int is the
/// identity and bits2octets is a single reduction).
pub fn rfc6979_nonce(private: &BigUint, message: &[u8]) -> BigUint {
    let n = n();
    let x = be32(private);
    let h1 = be32(&(int(&sha256(message)) % &n));
    let mut v = [0x01u8; 32];
    let mut k = [0x00u8; 32];
    for marker in [0x00u8, 0x01] {
        let input: Vec<u8> = v.iter().copied().chain([marker]).chain(x).chain(h1).collect();
        k = hmac_sha256(&k, &input);
        v = hmac_sha256(&k, &v);
    }
    loop {
        v = hmac_sha256(&k, &v);
        let candidate = int(&v);
        if !candidate.is_zero() && candidate < n {
            return candidate;
        }
        let input: Vec<u8> = v.iter().copied().chain([0x00]).collect();
        k = hmac_sha256(&k, &input);
        v = hmac_sha256(&k, &v);
    }
}

/// ECDSA-SHA256 with the RFC 6979 nonce; returns `(r, s)`.
pub fn ecdsa_sign(private: &BigUint, message: &[u8]) -> (BigUint, BigUint) {
    let n = n();
    let z = int(&sha256(message)) % &n;
    let k = rfc6979_nonce(private, message);
    let r = g().mul(&k).x().unwrap() % &n;
    let s = inv_mod(&k, &n) * ((z + &r * private) % &n) % &n;
    (r, s)
}

/// `f(ck, i)` recomputed from its definition.
pub fn expansion(ck: &[u8; 16], i: u32) -> BigUint {
    let mut input = ck.to_vec();
    input.extend_from_slice(&i.to_be_bytes());
    int(&sha256(&input)) % n()
}

pub fn add_mod_n(a: &BigUint, b: &BigUint) -> BigUint {
    (a + b) % n()
}

