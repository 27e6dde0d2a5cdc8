//! Dense polynomials over a finite field and their factorization
//! (squarefree, distinct-degree and equal-degree splitting).

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ff::FiniteField;

/// Fixed seed for equal-degree splitting, so factor order is reproducible.
const SPLIT_SEED: u64 = 0x5eed_0f5b_1175;

pub type Coeffs<F> = Vec<<F as FiniteField>::Elem>;

pub fn trim<F: FiniteField>(f: &F, mut a: Coeffs<F>) -> Coeffs<F> {
    while a.last().is_some_and(|c| f.is_zero(c)) {
        a.pop();
    }
    a
}

pub fn degree<F: FiniteField>(a: &Coeffs<F>) -> Option<usize> {
    a.len().checked_sub(1)
}

pub fn add<F: FiniteField>(f: &F, a: &Coeffs<F>, b: &Coeffs<F>) -> Coeffs<F> {
    let n = a.len().max(b.len());
    let z = f.zero();
    trim(
        f,
        (0..n)
            .map(|i| f.add(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z)))
            .collect(),
    )
}

pub fn sub<F: FiniteField>(f: &F, a: &Coeffs<F>, b: &Coeffs<F>) -> Coeffs<F> {
    let n = a.len().max(b.len());
    let z = f.zero();
    trim(
        f,
        (0..n)
            .map(|i| f.sub(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z)))
            .collect(),
    )
}

pub fn mul<F: FiniteField>(f: &F, a: &Coeffs<F>, b: &Coeffs<F>) -> Coeffs<F> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![f.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if f.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = f.add(&out[i + j], &f.mul(x, y));
        }
    }
    trim(f, out)
}

pub fn scale<F: FiniteField>(f: &F, a: &Coeffs<F>, c: &F::Elem) -> Coeffs<F> {
    trim(f, a.iter().map(|x| f.mul(x, c)).collect())
}

/// Quotient and remainder; `b` must be nonzero.
pub fn divrem<F: FiniteField>(f: &F, a: &Coeffs<F>, b: &Coeffs<F>) -> (Coeffs<F>, Coeffs<F>) {
    let db = degree::<F>(b).expect("division by zero polynomial");
    if a.len() <= db {
        return (Vec::new(), a.clone());
    }
    let inv = f.inv(&b[db]);
    let mut r = a.clone();
    let mut q = vec![f.zero(); a.len() - db];
    for k in (0..q.len()).rev() {
        let c = f.mul(&r[k + db], &inv);
        if f.is_zero(&c) {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            r[k + j] = f.sub(&r[k + j], &f.mul(&c, bj));
        }
        q[k] = c;
    }
    r.truncate(db);
    (trim(f, q), trim(f, r))
}

pub fn rem<F: FiniteField>(f: &F, a: &Coeffs<F>, b: &Coeffs<F>) -> Coeffs<F> {
    divrem(f, a, b).1
}

pub fn monic<F: FiniteField>(f: &F, a: &Coeffs<F>) -> Coeffs<F> {
    match a.last() {
        None => Vec::new(),
        Some(lc) => scale(f, a, &f.inv(lc)),
    }
}

/// Monic gcd (zero if both inputs are zero).
pub fn gcd<F: FiniteField>(f: &F, a: &Coeffs<F>, b: &Coeffs<F>) -> Coeffs<F> {
    let mut a = a.clone();
    let mut b = b.clone();
    while !b.is_empty() {
        let r = rem(f, &a, &b);
        a = b;
        b = r;
    }
    monic(f, &a)
}

/// Extended gcd: returns `(g, s, t)` with `s a + t b = g`, `g` monic.
pub fn xgcd<F: FiniteField>(
    f: &F,
    a: &Coeffs<F>,
    b: &Coeffs<F>,
) -> (Coeffs<F>, Coeffs<F>, Coeffs<F>) {
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (vec![f.one()], Vec::new());
    let (mut t0, mut t1) = (Vec::new(), vec![f.one()]);
    while !r1.is_empty() {
        let (q, r) = divrem(f, &r0, &r1);
        let s2 = sub(f, &s0, &mul(f, &q, &s1));
        let t2 = sub(f, &t0, &mul(f, &q, &t1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s2;
        t0 = t1;
        t1 = t2;
    }
    match r0.last() {
        None => (r0, s0, t0),
        Some(lc) => {
            let inv = f.inv(lc);
            (scale(f, &r0, &inv), scale(f, &s0, &inv), scale(f, &t0, &inv))
        }
    }
}

pub fn derivative<F: FiniteField>(f: &F, a: &Coeffs<F>) -> Coeffs<F> {
    let p = f.characteristic();
    trim(
        f,
        a.iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| f.mul(c, &f.from_u64(i as u64 % p)))
            .collect(),
    )
}

pub fn mulmod_poly<F: FiniteField>(
    f: &F,
    a: &Coeffs<F>,
    b: &Coeffs<F>,
    m: &Coeffs<F>,
) -> Coeffs<F> {
    rem(f, &mul(f, a, b), m)
}

/// `base^e mod m`.
pub fn powmod_poly<F: FiniteField>(
    f: &F,
    base: &Coeffs<F>,
    e: &BigUint,
    m: &Coeffs<F>,
) -> Coeffs<F> {
    let base = rem(f, base, m);
    let mut acc = rem(f, &vec![f.one()], m);
    for i in (0..e.bits()).rev() {
        acc = mulmod_poly(f, &acc, &acc, m);
        if e.bit(i) {
            acc = mulmod_poly(f, &acc, &base, m);
        }
    }
    acc
}

pub fn eval<F: FiniteField>(f: &F, a: &Coeffs<F>, x: &F::Elem) -> F::Elem {
    let mut acc = f.zero();
    for c in a.iter().rev() {
        acc = f.add(&f.mul(&acc, x), c);
    }
    acc
}

fn x_poly<F: FiniteField>(f: &F) -> Coeffs<F> {
    vec![f.zero(), f.one()]
}

/// Rabin irreducibility test for a monic polynomial of positive degree.
pub fn is_irreducible<F: FiniteField>(f: &F, a: &Coeffs<F>) -> bool {
    let n = match degree::<F>(a) {
        None | Some(0) => return false,
        Some(1) => return true,
        Some(n) => n,
    };
    let q = f.order();
    let x = x_poly(f);
    // x^(q^i) for i = 1..n
    let mut pows = Vec::with_capacity(n);
    let mut cur = x.clone();
    for _ in 0..n {
        cur = powmod_poly(f, &cur, &q, a);
        pows.push(cur.clone());
    }
    if sub(f, &pows[n - 1], &rem(f, &x, a)).iter().any(|c| !f.is_zero(c)) {
        return false;
    }
    for r in prime_divisors(n) {
        let h = sub(f, &pows[n / r - 1], &x);
        if degree::<F>(&gcd(f, &h, a)) != Some(0) {
            return false;
        }
    }
    true
}

fn prime_divisors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Squarefree factorization of a monic polynomial in characteristic `p`.
pub fn squarefree<F: FiniteField>(f: &F, a: &Coeffs<F>) -> Vec<(Coeffs<F>, u32)> {
    let a = monic(f, a);
    if a.len() <= 1 {
        return Vec::new();
    }
    let p = f.characteristic() as u32;
    let mut out = Vec::new();
    let mut c = gcd(f, &a, &derivative(f, &a));
    let mut w = divrem(f, &a, &c).0;
    let mut i = 1u32;
    while w.len() > 1 {
        let y = gcd(f, &w, &c);
        let z = divrem(f, &w, &y).0;
        if z.len() > 1 {
            out.push((z, i));
        }
        i += 1;
        w = y;
        c = divrem(f, &c, &w).0;
    }
    if c.len() > 1 {
        // c is a p-th power
        let root: Coeffs<F> = c.iter().step_by(p as usize).map(|e| f.pth_root(e)).collect();
        for (g, j) in squarefree(f, &root) {
            out.push((g, j * p));
        }
    }
    out
}

/// Distinct-degree factorization of a monic squarefree polynomial: pairs
/// `(product of all irreducible factors of degree e, e)`.
pub fn distinct_degree<F: FiniteField>(f: &F, a: &Coeffs<F>) -> Vec<(Coeffs<F>, usize)> {
    let q = f.order();
    let x = x_poly(f);
    let mut rest = monic(f, a);
    let mut out = Vec::new();
    let mut h = rem(f, &x, &rest);
    let mut e = 0;
    while degree::<F>(&rest).unwrap_or(0) >= 2 * (e + 1) {
        e += 1;
        h = powmod_poly(f, &h, &q, &rest);
        let g = gcd(f, &sub(f, &h, &x), &rest);
        if g.len() > 1 {
            out.push((g.clone(), e));
            rest = divrem(f, &rest, &g).0;
            h = rem(f, &h, &rest);
        }
    }
    if rest.len() > 1 {
        let d = rest.len() - 1;
        out.push((rest, d));
    }
    out
}

/// Splits a monic product of irreducibles all of degree `e`.
pub fn equal_degree<F: FiniteField>(f: &F, a: &Coeffs<F>, e: usize) -> Vec<Coeffs<F>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SPLIT_SEED);
    let mut out = Vec::new();
    equal_degree_rec(f, &monic(f, a), e, &mut rng, &mut out);
    out
}

fn equal_degree_rec<F: FiniteField>(
    f: &F,
    a: &Coeffs<F>,
    e: usize,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<Coeffs<F>>,
) {
    let n = a.len() - 1;
    if n == e {
        out.push(a.clone());
        return;
    }
    let p = f.characteristic();
    let qe = f.order().pow(e as u32);
    loop {
        let r: Coeffs<F> = trim(f, (0..n).map(|_| f.random(rng)).collect());
        if r.len() <= 1 {
            continue;
        }
        let b = if p == 2 {
            // absolute trace to F_2: sum of r^(2^i), i < k*e
            let bits = f.ext_degree() * e;
            let mut t = r.clone();
            let mut acc = r.clone();
            for _ in 1..bits {
                t = mulmod_poly(f, &t, &t, a);
                acc = add(f, &acc, &t);
            }
            acc
        } else {
            let exp = (&qe - BigUint::from(1u32)) >> 1;
            sub(f, &powmod_poly(f, &r, &exp, a), &vec![f.one()])
        };
        let g = gcd(f, &b, a);
        if g.len() > 1 && g.len() < a.len() {
            let h = divrem(f, a, &g).0;
            equal_degree_rec(f, &g, e, rng, out);
            equal_degree_rec(f, &h, e, rng, out);
            return;
        }
    }
}

/// Full factorization into monic irreducibles with multiplicities, sorted by
/// degree and then by coefficient vector.
pub fn factor<F: FiniteField>(f: &F, a: &Coeffs<F>) -> Vec<(Coeffs<F>, u32)> {
    let mut out = Vec::new();
    for (part, mult) in squarefree(f, a) {
        for (prod, e) in distinct_degree(f, &part) {
            for g in equal_degree(f, &prod, e) {
                out.push((g, mult));
            }
        }
    }
    out.sort_by(|(a, _), (b, _)| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// Roots in the field with multiplicities, sorted.
pub fn roots<F: FiniteField>(f: &F, a: &Coeffs<F>) -> Vec<(F::Elem, u32)> {
    let mut out = Vec::new();
    for (part, mult) in squarefree(f, a) {
        // linear part: gcd(part, x^q - x)
        let xq = powmod_poly(f, &x_poly(f), &f.order(), &part);
        let lin = gcd(f, &sub(f, &xq, &x_poly(f)), &part);
        if lin.len() <= 1 {
            continue;
        }
        for g in equal_degree(f, &lin, 1) {
            out.push((f.neg(&g[0]), mult));
        }
    }
    out.sort();
    out
}

/// Classical resultant `lc(a)^deg(b) * prod_{a(α)=0} b(α)` by the
/// Euclidean algorithm; zero if either input is zero.
pub fn resultant<F: FiniteField>(f: &F, a: &Coeffs<F>, b: &Coeffs<F>) -> F::Elem {
    if a.is_empty() || b.is_empty() {
        return f.zero();
    }
    let mut a = a.clone();
    let mut b = b.clone();
    let mut acc = f.one();
    loop {
        let da = a.len() - 1;
        let db = b.len() - 1;
        if db == 0 {
            return f.mul(&acc, &f.pow(&b[0], &BigUint::from(da)));
        }
        if da == 0 {
            return f.mul(&acc, &f.pow(&a[0], &BigUint::from(db)));
        }
        let r = rem(f, &a, &b);
        if r.is_empty() {
            return f.zero();
        }
        let dr = r.len() - 1;
        // Res(a, b) = (-1)^(da db) lc(b)^(da - dr) Res(b, r)
        if da % 2 == 1 && db % 2 == 1 {
            acc = f.neg(&acc);
        }
        acc = f.mul(&acc, &f.pow(&b[db], &BigUint::from(da - dr)));
        a = b;
        b = r;
    }
}

/// Polynomial of degree `< xs.len()` through the points `(xs[i], ys[i])`
/// (Newton divided differences); the nodes must be distinct.
pub fn interpolate<F: FiniteField>(f: &F, xs: &[F::Elem], ys: &[F::Elem]) -> Coeffs<F> {
    let n = xs.len();
    let mut dd: Vec<F::Elem> = ys.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            let num = f.sub(&dd[i], &dd[i - 1]);
            let den = f.sub(&xs[i], &xs[i - j]);
            dd[i] = f.mul(&num, &f.inv(&den));
        }
    }
    let mut acc: Coeffs<F> = Vec::new();
    for i in (0..n).rev() {
        // acc = acc * (x - xs[i]) + dd[i]
        let mut next = vec![f.zero(); acc.len() + 1];
        for (k, c) in acc.iter().enumerate() {
            next[k + 1] = f.add(&next[k + 1], c);
            next[k] = f.sub(&next[k], &f.mul(c, &xs[i]));
        }
        next[0] = f.add(&next[0], &dd[i]);
        acc = trim(f, next);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::ff::{ExtField, PrimeField};

    #[test]
    fn factor_small_examples() {
        let f5 = PrimeField::new(5);
        // x^2 + 1 = (x - 2)(x - 3) = (x + 3)(x + 2)
        let fac = factor(&f5, &vec![1, 0, 1]);
        assert_eq!(fac, vec![(vec![2, 1], 1), (vec![3, 1], 1)]);
        let f3 = PrimeField::new(3);
        assert_eq!(factor(&f3, &vec![1, 0, 1]), vec![(vec![1, 0, 1], 1)]);
        let f7 = PrimeField::new(7);
        assert_eq!(factor(&f7, &vec![0, 0, 1]), vec![(vec![0, 1], 2)]);
    }

    #[test]
    fn squarefree_handles_pth_powers() {
        let f2 = PrimeField::new(2);
        // (x + 1)^4 (x^2 + x + 1) over F_2
        let a = mul(
            &f2,
            &mul(&f2, &vec![1, 1], &vec![1, 1]),
            &mul(&f2, &mul(&f2, &vec![1, 1], &vec![1, 1]), &vec![1, 1, 1]),
        );
        let fac = factor(&f2, &a);
        assert_eq!(fac, vec![(vec![1, 1], 4), (vec![1, 1, 1], 1)]);
    }

    #[test]
    fn char_two_extension_roots() {
        // x^2 + x + 1 has both roots in F_4
        let f4 = ExtField::new(2, 2).unwrap();
        let poly = vec![f4.one(), f4.one(), f4.one()];
        let r = roots(&f4, &poly);
        assert_eq!(r.len(), 2);
        for (z, m) in &r {
            assert_eq!(*m, 1);
            assert!(f4.is_zero(&eval(&f4, &poly, z)));
        }
    }

    #[test]
    fn resultant_and_interpolation() {
        let f7 = PrimeField::new(7);
        // Res(x^2 + 1, x - 1) classical = lc(a)^1 * (α1 - 1)(α2 - 1) = 2
        assert_eq!(resultant(&f7, &vec![1, 0, 1], &vec![6, 1]), 2);
        assert_eq!(resultant(&f7, &vec![6, 1], &vec![1, 0, 1]), 2);
        let xs = vec![0u64, 1, 2, 3];
        let poly = vec![3u64, 0, 5, 1];
        let ys: Vec<u64> = xs.iter().map(|x| eval(&f7, &poly, x)).collect();
        assert_eq!(interpolate(&f7, &xs, &ys), poly);
    }

    #[test]
    fn rabin_test() {
        let f3 = PrimeField::new(3);
        assert!(is_irreducible(&f3, &vec![1, 0, 1]));
        assert!(!is_irreducible(&f3, &vec![2, 0, 1]));
        let f2 = PrimeField::new(2);
        assert!(is_irreducible(&f2, &vec![1, 1, 0, 0, 1]));
        assert!(!is_irreducible(&f2, &vec![1, 0, 0, 0, 1]));
    }
}
