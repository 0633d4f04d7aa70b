//! Arithmetic in GF(2^w) for 1 <= w <= 64 with a fixed modulus per width.

/// Low-order part of the modulus for each width: `x^w + IRREDUCIBLE[w-1]`.
/// Each entry is the smallest-weight, then smallest-value, irreducible
/// trinomial or pentanomial of that degree.
pub const IRREDUCIBLE: [u64; 64] = [
    0x1, 0x3, 0x3, 0x3, 0x5, 0x3, 0x3, 0x1b, 0x3, 0x9, 0x5, 0x9, 0x1b, 0x21, 0x3, 0x2b, 0x9, 0x9, 0x27, 0x9, 0x5,
    0x3, 0x21, 0x1b, 0x9, 0x1b, 0x27, 0x3, 0x5, 0x3, 0x9, 0x8d, 0x401, 0x81, 0x5, 0x201, 0x53, 0x63, 0x11, 0x39,
    0x9, 0x81, 0x59, 0x21, 0x1b, 0x3, 0x21, 0x2d, 0x201, 0x1d, 0x4b, 0x9, 0x47, 0x201, 0x81, 0x95, 0x11,
    0x80001, 0x95, 0x3, 0x27, 0x20000001, 0x3, 0x1b,
];

/// Carry-less product of two 64-bit polynomials.
#[inline]
pub fn clmul(a: u64, b: u64) -> u128 {
    let a = a as u128;
    let mut r = 0u128;
    let mut b = b;
    while b != 0 {
        let i = b.trailing_zeros();
        r ^= a << i;
        b &= b - 1;
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gf2w {
    w: usize,
    low: u64,
}

impl Gf2w {
    /// # Panics
    /// If `w` is outside `1..=64`.
    pub fn new(w: usize) -> Self {
        assert!((1..=64).contains(&w), "field width {w} out of range");
        Self { w, low: IRREDUCIBLE[w - 1] }
    }

    pub fn width(&self) -> usize {
        self.w
    }

    pub fn order(&self) -> u128 {
        1u128 << self.w
    }

    pub fn mask(&self) -> u64 {
        crate::qsim::low_mask(self.w)
    }

    /// Full modulus including the leading term.
    pub fn modulus(&self) -> u128 {
        (1u128 << self.w) | self.low as u128
    }

    pub fn reduce(&self, mut v: u128) -> u64 {
        let m = self.modulus();
        while v >> self.w != 0 {
            let top = 127 - v.leading_zeros() as usize;
            v ^= m << (top - self.w);
        }
        v as u64
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.reduce(clmul(a, b))
    }

    pub fn pow(&self, mut a: u64, mut e: u128) -> u64 {
        let mut r = 1u64;
        while e != 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    /// Multiplicative inverse; zero maps to zero.
    pub fn inv(&self, a: u64) -> u64 {
        self.pow(a, self.order() - 2)
    }

    /// Horner evaluation of `c[0] + c[1] x + ... + c[k-1] x^{k-1}`.
    pub fn eval_poly(&self, coeffs: &[u64], x: u64) -> u64 {
        coeffs.iter().rev().fold(0u64, |acc, &c| self.mul(acc, x) ^ c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent field built from log/exp tables over the generator x of x^3+x+1.
    fn gf8_tables() -> ([u8; 8], [u8; 7]) {
        let mut exp = [0u8; 7];
        let mut log = [0u8; 8];
        let mut v = 1u8;
        for (i, e) in exp.iter_mut().enumerate() {
            *e = v;
            log[v as usize] = i as u8;
            v <<= 1;
            if v & 8 != 0 {
                v ^= 0b1011;
            }
        }
        (log, exp)
    }

    fn gf8_mul(a: u8, b: u8) -> u8 {
        if a == 0 || b == 0 {
            return 0;
        }
        let (log, exp) = gf8_tables();
        exp[(log[a as usize] as usize + log[b as usize] as usize) % 7]
    }

    #[test]
    fn gf8_matches_log_tables() {
        let f = Gf2w::new(3);
        for a in 0..8u8 {
            for b in 0..8u8 {
                assert_eq!(f.mul(a as u64, b as u64), gf8_mul(a, b) as u64);
            }
        }
        // 1 + 2x + 3x^2 at x = 5
        let x = 5u8;
        let want = 1 ^ gf8_mul(2, x) ^ gf8_mul(3, gf8_mul(x, x));
        assert_eq!(f.eval_poly(&[1, 2, 3], 5), want as u64);
    }

    fn is_irreducible_bruteforce(w: usize, low: u64) -> bool {
        // No factor of degree 1..=w/2 divides the modulus.
        let m = (1u128 << w) | low as u128;
        for d in 1..=w / 2 {
            for t in (1u128 << d)..(1u128 << (d + 1)) {
                let mut v = m;
                while v != 0 && 127 - v.leading_zeros() as usize >= d {
                    let top = 127 - v.leading_zeros() as usize;
                    v ^= t << (top - d);
                }
                if v == 0 {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn small_moduli_are_irreducible() {
        for w in 1..=16 {
            assert!(is_irreducible_bruteforce(w, IRREDUCIBLE[w - 1]), "w={w}");
        }
    }

    fn poly_rem(mut a: u128, b: u128) -> u128 {
        let db = 127 - b.leading_zeros() as usize;
        while a != 0 && 127 - a.leading_zeros() as usize >= db {
            a ^= b << (127 - a.leading_zeros() as usize - db);
        }
        a
    }

    fn poly_gcd(mut a: u128, mut b: u128) -> u128 {
        while b != 0 {
            let r = poly_rem(a, b);
            a = b;
            b = r;
        }
        a
    }

    #[test]
    fn rabin_test_all_widths() {
        for w in 2..=64usize {
            let f = Gf2w::new(w);
            let frob = |k: usize| (0..k).fold(2u64, |acc, _| f.mul(acc, acc));
            assert_eq!(frob(w), 2, "w={w}");
            for r in (2..=w).filter(|r| w % r == 0 && (2..*r).all(|d| r % d != 0)) {
                let t = (frob(w / r) ^ 2) as u128;
                assert_eq!(poly_gcd(f.modulus(), t), 1, "w={w} r={r}");
            }
        }
    }

    #[test]
    fn multiplicative_group_orders() {
        // For irreducible moduli every nonzero a has a^(2^w - 1) = 1.
        for w in [17usize, 24, 31, 32, 48, 63, 64] {
            let f = Gf2w::new(w);
            for a in [2u64, 3, 0x1234_5677 & f.mask(), f.mask()] {
                assert_eq!(f.pow(a, f.order() - 1), 1, "w={w}");
                assert_eq!(f.mul(a, f.inv(a)), 1);
            }
        }
    }

    #[test]
    fn aes_field() {
        let f = Gf2w::new(8);
        assert_eq!(f.mul(0x57, 0x83), 0xc1);
    }
}
