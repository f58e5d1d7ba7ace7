//! Finite fields `F_{p^f}` as quotients `F_p[t]/(g)`.
//!
//! The modulus `g` is the first monic irreducible polynomial of degree `f`
//! when candidates are ordered by the index `Σ c_i p^i` of their lower
//! coefficient vector `(c_0, …, c_{f-1})`. Elements are enumerated in the
//! same index order, so `F_4` comes out as `0, 1, t, t + 1`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::arith::{is_prime, modpow, mulmod, prime_factors};

/// Largest field order accepted by [`FqField::new`].
pub const FIELD_CAP: u64 = 1 << 63;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FieldError {
    NotPrime(u64),
    ZeroDegree,
    BudgetExceeded { p: u64, f: u32, cap: u64 },
    DivisionByZero,
    WrongLength { expected: usize, found: usize },
    CoefficientOutOfRange(u64),
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::NotPrime(p) => write!(f, "{} is not prime", p),
            FieldError::ZeroDegree => f.write_str("extension degree must be positive"),
            FieldError::BudgetExceeded { p, f: deg, cap } => {
                write!(f, "field order {}^{} exceeds the cap {}", p, deg, cap)
            }
            FieldError::DivisionByZero => f.write_str("division by zero"),
            FieldError::WrongLength { expected, found } => {
                write!(f, "expected {} coefficients, found {}", expected, found)
            }
            FieldError::CoefficientOutOfRange(c) => write!(f, "coefficient {} out of range", c),
        }
    }
}

impl core::error::Error for FieldError {}

/// An element of `F_{p^f}`: coefficients `c_0 + c_1 t + … + c_{f-1} t^{f-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FqElem {
    coeffs: Vec<u64>,
}

impl FqElem {
    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FqField {
    p: u64,
    f: u32,
    q: u64,
    /// Monic, ascending, length `f + 1`.
    modulus: Vec<u64>,
}

impl FqField {
    /// Builds the field with the default order cap.
    pub fn new(p: u64, f: u32) -> Result<Self, FieldError> {
        Self::with_cap(p, f, FIELD_CAP)
    }

    pub fn with_cap(p: u64, f: u32, cap: u64) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if f == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let q = p
            .checked_pow(f)
            .filter(|&q| q <= cap)
            .ok_or(FieldError::BudgetExceeded { p, f, cap })?;
        let modulus = if f == 1 { vec![0, 1] } else { first_irreducible(p, f as usize) };
        Ok(FqField { p, f, q, modulus })
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.f
    }

    pub fn order(&self) -> u64 {
        self.q
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn zero(&self) -> FqElem {
        FqElem { coeffs: vec![0; self.f as usize] }
    }

    pub fn one(&self) -> FqElem {
        self.from_u64(1)
    }

    /// The prime-field element `c mod p`.
    pub fn from_u64(&self, c: u64) -> FqElem {
        let mut e = self.zero();
        e.coeffs[0] = c % self.p;
        e
    }

    /// The class of `t` (equal to the constant root of the modulus when `f = 1`).
    pub fn generator(&self) -> FqElem {
        if self.f == 1 {
            return self.from_u64((self.p - self.modulus[0]) % self.p);
        }
        let mut e = self.zero();
        e.coeffs[1] = 1;
        e
    }

    pub fn elem(&self, coeffs: &[u64]) -> Result<FqElem, FieldError> {
        if coeffs.len() != self.f as usize {
            return Err(FieldError::WrongLength { expected: self.f as usize, found: coeffs.len() });
        }
        if let Some(&c) = coeffs.iter().find(|&&c| c >= self.p) {
            return Err(FieldError::CoefficientOutOfRange(c));
        }
        Ok(FqElem { coeffs: coeffs.to_vec() })
    }

    /// The element with enumeration index `idx` (`Σ c_i p^i = idx`).
    pub fn element(&self, mut idx: u64) -> FqElem {
        let mut e = self.zero();
        for c in e.coeffs.iter_mut() {
            *c = idx % self.p;
            idx /= self.p;
        }
        e
    }

    pub fn index(&self, a: &FqElem) -> u64 {
        a.coeffs.iter().rev().fold(0u64, |acc, &c| acc * self.p + c)
    }

    /// All `p^f` elements in index order.
    pub fn enumerate(&self) -> impl Iterator<Item = FqElem> + '_ {
        (0..self.q).map(move |i| self.element(i))
    }

    pub fn add(&self, a: &FqElem, b: &FqElem) -> FqElem {
        let p = self.p;
        FqElem { coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(&x, &y)| add_mod(x, y, p)).collect() }
    }

    pub fn sub(&self, a: &FqElem, b: &FqElem) -> FqElem {
        self.add(a, &self.neg(b))
    }

    pub fn neg(&self, a: &FqElem) -> FqElem {
        let p = self.p;
        FqElem { coeffs: a.coeffs.iter().map(|&x| if x == 0 { 0 } else { p - x }).collect() }
    }

    pub fn mul(&self, a: &FqElem, b: &FqElem) -> FqElem {
        if self.f == 1 {
            return FqElem { coeffs: vec![mulmod(a.coeffs[0], b.coeffs[0], self.p)] };
        }
        let prod = poly_mul(&a.coeffs, &b.coeffs, self.p);
        let mut r = poly_rem(&prod, &self.modulus, self.p);
        r.resize(self.f as usize, 0);
        FqElem { coeffs: r }
    }

    /// Square-and-multiply.
    pub fn pow(&self, a: &FqElem, mut e: u64) -> FqElem {
        let mut acc = self.one();
        let mut b = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            e >>= 1;
            if e > 0 {
                b = self.mul(&b, &b);
            }
        }
        acc
    }

    pub fn inv(&self, a: &FqElem) -> Result<FqElem, FieldError> {
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(self.pow(a, self.q - 2))
    }

    pub fn frobenius(&self, a: &FqElem) -> FqElem {
        self.pow(a, self.p)
    }

    /// Multiplicative order of a nonzero element.
    pub fn multiplicative_order(&self, a: &FqElem) -> Result<u64, FieldError> {
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let mut ord = self.q - 1;
        for r in prime_factors(self.q - 1) {
            while ord.is_multiple_of(r) && self.pow(a, ord / r) == self.one() {
                ord /= r;
            }
        }
        Ok(ord)
    }

    /// First element (in index order) generating the multiplicative group.
    pub fn primitive_element(&self) -> FqElem {
        let rs = prime_factors(self.q - 1);
        let one = self.one();
        (1..self.q)
            .map(|i| self.element(i))
            .find(|g| rs.iter().all(|&r| self.pow(g, (self.q - 1) / r) != one))
            .unwrap_or(one)
    }

    /// Renders an element as a polynomial in `t`.
    pub fn format(&self, a: &FqElem) -> String {
        use core::fmt::Write;
        let mut s = String::new();
        for (i, &c) in a.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !s.is_empty() {
                s.push_str(" + ");
            }
            match (i, c) {
                (0, _) => write!(s, "{}", c).ok(),
                (1, 1) => write!(s, "t").ok(),
                (1, _) => write!(s, "{}*t", c).ok(),
                (_, 1) => write!(s, "t^{}", i).ok(),
                _ => write!(s, "{}*t^{}", c, i).ok(),
            };
        }
        if s.is_empty() {
            s.push('0');
        }
        s
    }
}

#[inline]
fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    let s = a as u128 + b as u128;
    if s >= p as u128 {
        (s - p as u128) as u64
    } else {
        s as u64
    }
}

fn trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = add_mod(out[i + j], mulmod(x, y, p), p);
        }
    }
    out
}

/// Remainder modulo a polynomial with invertible leading coefficient.
fn poly_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    trim(&mut r);
    let mut m = m.to_vec();
    trim(&mut m);
    let dm = m.len() - 1;
    let lead_inv = modpow(m[dm], p - 2, p);
    while r.len() > dm {
        let top = r.len() - 1;
        let c = mulmod(r[top], lead_inv, p);
        if c != 0 {
            for (i, &mc) in m.iter().enumerate() {
                let idx = top - dm + i;
                r[idx] = (r[idx] + p - mulmod(c, mc, p)) % p;
            }
        }
        r.pop();
        trim(&mut r);
    }
    r
}

fn poly_sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out: Vec<u64> = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(&mut out);
    out
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = poly_rem(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

fn poly_powmod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut b = poly_rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_rem(&poly_mul(&acc, &b, p), m, p);
        }
        e >>= 1;
        if e > 0 {
            b = poly_rem(&poly_mul(&b, &b, p), m, p);
        }
    }
    acc
}

/// Rabin's test: a monic `g` of degree `f` is irreducible over `F_p` iff
/// `t^{p^f} ≡ t (mod g)` and `gcd(t^{p^{f/r}} - t, g) = 1` for every prime
/// `r | f`.
pub(crate) fn is_irreducible(g: &[u64], p: u64) -> bool {
    let f = g.len() - 1;
    let t = vec![0u64, 1];
    let mut frob = Vec::with_capacity(f + 1);
    let mut h = t.clone();
    frob.push(h.clone());
    for _ in 0..f {
        h = poly_powmod(&h, p, g, p);
        frob.push(h.clone());
    }
    if poly_sub(&frob[f], &t, p) != Vec::<u64>::new() {
        return false;
    }
    prime_factors(f as u64).into_iter().all(|r| {
        let d = poly_sub(&frob[f / r as usize], &t, p);
        poly_gcd(&d, g, p).len() == 1
    })
}

/// Irreducibility by searching for a monic factor of degree `1..=f/2`.
/// Exponential in `f`; used as an independent check on small fields.
pub fn is_irreducible_by_trial(g: &[u64], p: u64) -> bool {
    let f = g.len() - 1;
    for d in 1..=f / 2 {
        let count = p.pow(d as u32);
        for idx in 0..count {
            let mut cand: Vec<u64> = (0..d).map(|i| (idx / p.pow(i as u32)) % p).collect();
            cand.push(1);
            if poly_rem(g, &cand, p).is_empty() {
                return false;
            }
        }
    }
    true
}

fn first_irreducible(p: u64, f: usize) -> Vec<u64> {
    let mut idx = 0u64;
    loop {
        let mut g: Vec<u64> = Vec::with_capacity(f + 1);
        let mut rest = idx;
        for _ in 0..f {
            g.push(rest % p);
            rest /= p;
        }
        g.push(1);
        if g[0] != 0 && is_irreducible(&g, p) {
            return g;
        }
        idx += 1;
    }
}

/// Copy-element arithmetic used by the point-counting loops.
pub(crate) mod kernel {
    use super::*;

    pub(crate) trait Kernel: Sync {
        type E: Copy + Eq + Send + Sync + fmt::Debug;
        fn q(&self) -> u64;
        fn zero(&self) -> Self::E;
        fn one(&self) -> Self::E;
        fn add(&self, a: Self::E, b: Self::E) -> Self::E;
        fn sub(&self, a: Self::E, b: Self::E) -> Self::E;
        fn mul(&self, a: Self::E, b: Self::E) -> Self::E;
        /// `a` must be nonzero.
        fn inv(&self, a: Self::E) -> Self::E;
        /// Image of the residue `c ∈ [0, p)`.
        fn residue(&self, c: u64) -> Self::E;
        /// Element with enumeration index `idx`.
        fn element(&self, idx: u64) -> Self::E;
        fn is_zero(&self, a: Self::E) -> bool {
            a == self.zero()
        }
        /// Quadratic character test for nonzero `a` in odd characteristic.
        fn is_square(&self, a: Self::E) -> bool;
    }

    /// `F_p` with plain modular arithmetic.
    pub(crate) struct PrimeKernel {
        p: u64,
        small: bool,
    }

    impl PrimeKernel {
        pub(crate) fn new(p: u64) -> Self {
            PrimeKernel { p, small: p < (1 << 32) }
        }
    }

    impl Kernel for PrimeKernel {
        type E = u64;
        fn q(&self) -> u64 {
            self.p
        }
        fn zero(&self) -> u64 {
            0
        }
        fn one(&self) -> u64 {
            1 % self.p
        }
        #[inline]
        fn add(&self, a: u64, b: u64) -> u64 {
            add_mod(a, b, self.p)
        }
        #[inline]
        fn sub(&self, a: u64, b: u64) -> u64 {
            if a >= b {
                a - b
            } else {
                self.p - (b - a)
            }
        }
        #[inline]
        fn mul(&self, a: u64, b: u64) -> u64 {
            if self.small {
                a * b % self.p
            } else {
                mulmod(a, b, self.p)
            }
        }
        fn inv(&self, a: u64) -> u64 {
            modpow(a, self.p - 2, self.p)
        }
        fn residue(&self, c: u64) -> u64 {
            c
        }
        fn element(&self, idx: u64) -> u64 {
            idx
        }
        fn is_square(&self, a: u64) -> bool {
            modpow(a, (self.p - 1) / 2, self.p) == 1
        }
    }

    /// Largest order for which Zech-logarithm tables are built.
    pub(crate) const ZECH_CAP: u64 = 1 << 22;

    /// `F_q` in logarithmic representation with Zech tables.
    /// Elements are discrete logs in `[0, q-2]`; `q - 1` encodes zero.
    pub(crate) struct ZechKernel {
        q: u64,
        zero: u32,
        neg_one: u32,
        /// log of the element with a given enumeration index
        log: Vec<u32>,
        /// zech[n] = log(1 + g^n)
        zech: Vec<u32>,
    }

    impl ZechKernel {
        pub(crate) fn new(field: &FqField) -> Self {
            let q = field.order();
            let p = field.characteristic();
            let order = q - 1;
            let zero = order as u32;
            let g = field.primitive_element();
            let mut log = vec![zero; q as usize];
            let mut exp = vec![0u64; order as usize];
            let mut cur = field.one();
            for k in 0..order {
                let idx = field.index(&cur);
                log[idx as usize] = k as u32;
                exp[k as usize] = idx;
                cur = field.mul(&cur, &g);
            }
            let zech = exp
                .iter()
                .map(|&idx| {
                    let plus_one = if idx % p == p - 1 { idx - (p - 1) } else { idx + 1 };
                    log[plus_one as usize]
                })
                .collect();
            let neg_one = if p == 2 { 0 } else { (order / 2) as u32 };
            ZechKernel { q, zero, neg_one, log, zech }
        }

        #[inline]
        fn wrap(&self, s: u64) -> u32 {
            let o = self.q - 1;
            (if s >= o { s - o } else { s }) as u32
        }
    }

    impl Kernel for ZechKernel {
        type E = u32;
        fn q(&self) -> u64 {
            self.q
        }
        fn zero(&self) -> u32 {
            self.zero
        }
        fn one(&self) -> u32 {
            0
        }
        #[inline]
        fn add(&self, a: u32, b: u32) -> u32 {
            if a == self.zero {
                return b;
            }
            if b == self.zero {
                return a;
            }
            let o = self.q - 1;
            let d = if b >= a { b - a } else { (b as u64 + o - a as u64) as u32 };
            let z = self.zech[d as usize];
            if z == self.zero {
                self.zero
            } else {
                self.wrap(a as u64 + z as u64)
            }
        }
        #[inline]
        fn sub(&self, a: u32, b: u32) -> u32 {
            let nb = if b == self.zero { b } else { self.wrap(b as u64 + self.neg_one as u64) };
            self.add(a, nb)
        }
        #[inline]
        fn mul(&self, a: u32, b: u32) -> u32 {
            if a == self.zero || b == self.zero {
                self.zero
            } else {
                self.wrap(a as u64 + b as u64)
            }
        }
        fn inv(&self, a: u32) -> u32 {
            if a == 0 {
                0
            } else {
                ((self.q - 1) - a as u64) as u32
            }
        }
        fn residue(&self, c: u64) -> u32 {
            self.log[c as usize]
        }
        fn element(&self, idx: u64) -> u32 {
            self.log[idx as usize]
        }
        fn is_square(&self, a: u32) -> bool {
            a.is_multiple_of(2)
        }
    }

    /// `F_{p^f}` with elements packed as their enumeration index.
    /// Slow but table-free; used for large extension fields.
    pub(crate) struct PackedKernel {
        field: FqField,
    }

    impl PackedKernel {
        pub(crate) fn new(field: FqField) -> Self {
            PackedKernel { field }
        }

        fn unpack(&self, mut idx: u64, out: &mut [u64]) {
            let p = self.field.p;
            for c in out.iter_mut() {
                *c = idx % p;
                idx /= p;
            }
        }

        fn pack(&self, digits: &[u64]) -> u64 {
            let p = self.field.p;
            digits.iter().rev().fold(0u64, |acc, &c| acc * p + c)
        }
    }

    impl Kernel for PackedKernel {
        type E = u64;
        fn q(&self) -> u64 {
            self.field.q
        }
        fn zero(&self) -> u64 {
            0
        }
        fn one(&self) -> u64 {
            1
        }
        fn add(&self, a: u64, b: u64) -> u64 {
            let f = self.field.f as usize;
            let p = self.field.p;
            let (mut x, mut y) = ([0u64; 64], [0u64; 64]);
            self.unpack(a, &mut x[..f]);
            self.unpack(b, &mut y[..f]);
            for i in 0..f {
                x[i] = add_mod(x[i], y[i], p);
            }
            self.pack(&x[..f])
        }
        fn sub(&self, a: u64, b: u64) -> u64 {
            let f = self.field.f as usize;
            let p = self.field.p;
            let (mut x, mut y) = ([0u64; 64], [0u64; 64]);
            self.unpack(a, &mut x[..f]);
            self.unpack(b, &mut y[..f]);
            for i in 0..f {
                x[i] = (x[i] + p - y[i]) % p;
            }
            self.pack(&x[..f])
        }
        fn mul(&self, a: u64, b: u64) -> u64 {
            let f = self.field.f as usize;
            let p = self.field.p;
            let (mut x, mut y) = ([0u64; 64], [0u64; 64]);
            self.unpack(a, &mut x[..f]);
            self.unpack(b, &mut y[..f]);
            let mut prod = [0u64; 128];
            for i in 0..f {
                if x[i] == 0 {
                    continue;
                }
                for j in 0..f {
                    prod[i + j] = add_mod(prod[i + j], mulmod(x[i], y[j], p), p);
                }
            }
            let m = &self.field.modulus;
            for k in (f..(2 * f).saturating_sub(1)).rev() {
                let c = prod[k];
                if c == 0 {
                    continue;
                }
                for i in 0..f {
                    let idx = k - f + i;
                    prod[idx] = (prod[idx] + p - mulmod(c, m[i], p)) % p;
                }
                prod[k] = 0;
            }
            self.pack(&prod[..f])
        }
        fn inv(&self, a: u64) -> u64 {
            let e = self.field.element(a);
            let r = self.field.pow(&e, self.field.q - 2);
            self.field.index(&r)
        }
        fn residue(&self, c: u64) -> u64 {
            c
        }
        fn element(&self, idx: u64) -> u64 {
            idx
        }
        fn is_square(&self, a: u64) -> bool {
            let e = self.field.element(a);
            self.field.pow(&e, (self.field.q - 1) / 2) == self.field.one()
        }
    }
}
