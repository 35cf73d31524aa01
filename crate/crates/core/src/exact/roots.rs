use super::{pow2_at_least, rat, ExactError, IntPoly, Rational, SturmChain, UniPoly};
use num_traits::{One, Zero};

/// Isolating interval for one real root: `lo == hi` means the root is exactly `lo`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootInterval {
    pub lo: Rational,
    pub hi: Rational,
    pub multiplicity: usize,
}

impl RootInterval {
    pub fn exact(r: Rational, multiplicity: usize) -> Self {
        RootInterval { lo: r.clone(), hi: r, multiplicity }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(2.into())
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }
}

/// Yun's algorithm: pairs `(f, k)` with `p = lc * prod f^k`, each `f` monic and square-free.
pub fn square_free_decomposition(p: &UniPoly) -> Vec<(UniPoly, usize)> {
    let mut out = Vec::new();
    if p.degree().unwrap_or(0) == 0 {
        return out;
    }
    let p = p.monic();
    let dp = p.derivative();
    let b = p.gcd(&dp);
    let mut c = p.div_exact(&b).expect("gcd divides");
    let mut d = &dp.div_exact(&b).expect("gcd divides") - &c.derivative();
    let mut k = 1;
    while c.degree().unwrap_or(0) > 0 {
        let a = c.gcd(&d);
        c = c.div_exact(&a).expect("gcd divides");
        let da = d.div_exact(&a).expect("gcd divides");
        d = &da - &c.derivative();
        if a.degree().unwrap_or(0) > 0 {
            out.push((a.monic(), k));
        }
        k += 1;
    }
    out
}

/// `p / gcd(p, p')`, as a primitive integer polynomial.
pub fn square_free_part(p: &UniPoly) -> IntPoly {
    let g = p.gcd(&p.derivative());
    let q = p.div_exact(&g).expect("gcd divides");
    IntPoly::from_rational(&q)
}

/// Distinct real roots of `p` in `(lo, hi]`.
pub fn sturm_root_count(p: &UniPoly, lo: &Rational, hi: &Rational) -> Result<usize, ExactError> {
    if lo >= hi {
        return Err(ExactError::EmptyInterval { lo: lo.to_string(), hi: hi.to_string() });
    }
    if p.is_zero() {
        return Err(ExactError::ZeroPolynomial);
    }
    Ok(square_free_part(p).sturm_chain().count_between(lo, hi))
}

/// Sign of `p` on the whole ray `[from, +inf)` when it is constant and nonzero.
pub fn sign_on_ray(p: &UniPoly, from: &Rational) -> Option<i8> {
    if p.is_zero() {
        return None;
    }
    let ip = IntPoly::from_rational(p);
    let s = ip.sign_at(from);
    if s == 0 {
        return None;
    }
    let roots = square_free_part(p).sturm_chain().count_above(from);
    (roots == 0).then_some(s)
}

/// Disjoint isolating intervals for all real roots, ascending.
pub fn isolate_real_roots(p: &UniPoly) -> Result<Vec<RootInterval>, ExactError> {
    if p.is_zero() {
        return Err(ExactError::ZeroPolynomial);
    }
    if p.is_constant() {
        return Ok(Vec::new());
    }
    let g = square_free_part(p);
    let chain = g.sturm_chain();
    let b = pow2_at_least(&g.root_bound());
    let mut found = Vec::new();
    let mut stack = vec![(-b.clone(), b)];
    while let Some((lo, hi)) = stack.pop() {
        let n = chain.count_between(&lo, &hi);
        if n == 0 {
            continue;
        }
        if n == 1 {
            found.push(tidy(&g, &chain, lo, hi));
            continue;
        }
        let mid = (&lo + &hi) / Rational::from_integer(2.into());
        stack.push((mid.clone(), hi));
        stack.push((lo, mid));
    }
    found.sort_by(|a, b| a.lo.cmp(&b.lo));
    let factors = square_free_decomposition(p);
    for iv in found.iter_mut() {
        iv.multiplicity = factors
            .iter()
            .find(|(f, _)| contains_root_of(f, iv))
            .map(|(_, k)| *k)
            .unwrap_or(1);
    }
    Ok(found)
}

fn contains_root_of(f: &UniPoly, iv: &RootInterval) -> bool {
    if iv.is_exact() {
        return f.eval(&iv.lo).is_zero();
    }
    IntPoly::from_rational(f).sturm_chain().count_between(&iv.lo, &iv.hi) == 1
}

/// Shrinks `(lo, hi]` holding one root until neither endpoint is a root and the
/// width is at most one; small rational roots are caught exactly on the way.
fn tidy(g: &IntPoly, chain: &SturmChain, mut lo: Rational, mut hi: Rational) -> RootInterval {
    loop {
        if g.sign_at(&hi) == 0 {
            return RootInterval::exact(hi, 1);
        }
        let s = simplest_between(&lo, Some(&hi));
        if g.sign_at(&s) == 0 {
            return RootInterval::exact(s, 1);
        }
        if g.sign_at(&lo) != 0 && &hi - &lo <= Rational::one() {
            return RootInterval { lo, hi, multiplicity: 1 };
        }
        let mid = (&lo + &hi) / Rational::from_integer(2.into());
        if chain.count_between(&lo, &mid) == 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

/// Simplest rational strictly between `lo` and `hi` (or above `lo` when `hi` is `None`).
fn simplest_between(lo: &Rational, hi: Option<&Rational>) -> Rational {
    let fl = lo.floor();
    let next = &fl + Rational::one();
    match hi {
        None => next,
        Some(h) if &next < h => next,
        Some(h) => {
            let l = lo - &fl;
            let u = h - &fl;
            let inv_hi = Rational::one() / u;
            let inner = if l.is_zero() {
                simplest_between(&inv_hi, None)
            } else {
                simplest_between(&inv_hi, Some(&(Rational::one() / l)))
            };
            fl + Rational::one() / inner
        }
    }
}

fn round_to_grid(x: &Rational, step: &Rational) -> Rational {
    (x / step).round() * step
}

/// Shrinks a bracket of a simple root to width at most `eps`.
pub fn refine_root(p: &UniPoly, iv: &RootInterval, eps: &Rational) -> Result<RootInterval, ExactError> {
    if iv.multiplicity > 1 {
        return Err(ExactError::MultipleRoot(iv.multiplicity));
    }
    if iv.is_exact() {
        return Ok(iv.clone());
    }
    let ip = IntPoly::from_rational(p);
    let dp = p.derivative();
    let (mut lo, mut hi) = (iv.lo.clone(), iv.hi.clone());
    let s_lo = ip.sign_at(&lo);
    let s_hi = ip.sign_at(&hi);
    if s_lo == 0 || s_hi == 0 || s_lo == s_hi || lo > hi {
        return Err(ExactError::NoSignChange { lo: lo.to_string(), hi: hi.to_string() });
    }
    let two = Rational::from_integer(2.into());
    let mut shift: u32 = 2;
    while &hi - &lo > *eps {
        let s = simplest_between(&lo, Some(&hi));
        if ip.sign_at(&s) == 0 {
            return Ok(RootInterval::exact(s, 1));
        }
        let w = &hi - &lo;
        let mid = (&lo + &hi) / &two;
        let mut moved = false;
        let slope = dp.eval(&mid);
        if !slope.is_zero() {
            let newton = &mid - p.eval(&mid) / slope;
            if newton > lo && newton < hi {
                let delta = &w / Rational::from_integer(num_traits::pow(num_bigint::BigInt::from(2), shift as usize));
                let c = round_to_grid(&newton, &(&delta / rat(4, 1)));
                let a = (&c - &delta).max(lo.clone());
                let b = (&c + &delta).min(hi.clone());
                if a < b {
                    let (sa, sb) = (ip.sign_at(&a), ip.sign_at(&b));
                    if sa == 0 {
                        return Ok(RootInterval::exact(a, 1));
                    }
                    if sb == 0 {
                        return Ok(RootInterval::exact(b, 1));
                    }
                    if sa == s_lo && sb == s_hi {
                        lo = a;
                        hi = b;
                        shift = (shift * 2).min(256);
                        moved = true;
                    }
                }
            }
        }
        if !moved {
            shift = 2;
            let sm = ip.sign_at(&mid);
            if sm == 0 {
                return Ok(RootInterval::exact(mid, 1));
            }
            if sm == s_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    Ok(RootInterval { lo, hi, multiplicity: 1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};

    #[test]
    fn yun_decomposition() {
        let p = UniPoly::from_roots(&[int(1), int(1), int(2), int(3), int(3), int(3)]).scale(&int(5));
        let f = square_free_decomposition(&p);
        assert_eq!(f.len(), 3);
        assert_eq!(f[0], (UniPoly::from_roots(&[int(2)]), 1));
        assert_eq!(f[1], (UniPoly::from_roots(&[int(1)]), 2));
        assert_eq!(f[2], (UniPoly::from_roots(&[int(3)]), 3));
    }

    #[test]
    fn counts_in_half_open_interval() {
        let p = UniPoly::from_roots(&[int(1), int(2), int(3)]);
        assert_eq!(sturm_root_count(&p, &int(0), &int(10)).unwrap(), 3);
        assert_eq!(sturm_root_count(&p, &int(1), &int(3)).unwrap(), 2);
        assert_eq!(sturm_root_count(&UniPoly::from_i64(&[1, 0, 1]), &int(-10), &int(10)).unwrap(), 0);
        assert!(sturm_root_count(&p, &int(2), &int(2)).is_err());
        assert!(sturm_root_count(&p, &int(3), &int(2)).is_err());
    }

    #[test]
    fn isolates_sqrt_two() {
        let v = isolate_real_roots(&UniPoly::from_i64(&[-2, 0, 1])).unwrap();
        assert_eq!(v.len(), 2);
        assert!(v[0].lo >= int(-2) && v[0].hi <= int(-1));
        assert!(v[1].lo >= int(1) && v[1].hi <= int(2));
    }

    #[test]
    fn double_root_is_exact() {
        let v = isolate_real_roots(&UniPoly::from_i64(&[1, -2, 1])).unwrap();
        assert_eq!(v, vec![RootInterval::exact(int(1), 2)]);
        assert!(refine_root(&UniPoly::from_i64(&[1, -2, 1]), &v[0], &rat(1, 10)).is_err());
    }

    #[test]
    fn refines_sqrt_two() {
        let p = UniPoly::from_i64(&[-2, 0, 1]);
        let v = isolate_real_roots(&p).unwrap();
        let eps = Rational::new(1.into(), num_traits::pow(num_bigint::BigInt::from(10), 12));
        let r = refine_root(&p, &v[1], &eps).unwrap();
        assert!(r.width() <= eps);
        assert!(crate::exact::to_f64(&r.lo) <= 2f64.sqrt() && 2f64.sqrt() <= crate::exact::to_f64(&r.hi) + 1e-15);
        assert!(p.eval(&r.lo) < int(0) && p.eval(&r.hi) > int(0));
    }

    #[test]
    fn rational_root_detected() {
        let p = UniPoly::from_i64(&[0, -1, 0, 1]);
        let iv = RootInterval { lo: rat(1, 2), hi: rat(7, 5), multiplicity: 1 };
        let r = refine_root(&p, &iv, &rat(1, 1_000_000)).unwrap();
        assert_eq!(r, RootInterval::exact(int(1), 1));
        let v = isolate_real_roots(&p).unwrap();
        assert_eq!(v.len(), 3);
        assert!(v.iter().all(|iv| iv.is_exact()));
    }

    #[test]
    fn rejects_non_bracket() {
        let p = UniPoly::from_i64(&[-2, 0, 1]);
        let iv = RootInterval { lo: int(2), hi: int(3), multiplicity: 1 };
        assert!(refine_root(&p, &iv, &rat(1, 10)).is_err());
    }

    #[test]
    fn ray_signs() {
        let p = UniPoly::from_roots(&[int(2), int(5)]);
        assert_eq!(sign_on_ray(&p, &int(6)), Some(1));
        assert_eq!(sign_on_ray(&p, &int(5)), None);
        assert_eq!(sign_on_ray(&p, &int(3)), None);
        assert_eq!(sign_on_ray(&-p, &rat(11, 2)), Some(-1));
    }

    #[test]
    fn simplest_rational() {
        assert_eq!(simplest_between(&rat(1, 3), Some(&rat(1, 2))), rat(2, 5));
        assert_eq!(simplest_between(&rat(1, 2), Some(&int(3))), int(1));
        assert_eq!(simplest_between(&int(0), Some(&rat(1, 3))), rat(1, 4));
        assert_eq!(simplest_between(&rat(-7, 2), Some(&rat(-3, 1))), rat(-10, 3));
    }

    #[test]
    fn isolation_keeps_mixed_multiplicities_apart() {
        let p = UniPoly::from_roots(&[rat(3, 2), int(2), int(2), rat(-1, 7), rat(-1, 7), rat(-1, 7)]);
        let v = isolate_real_roots(&p).unwrap();
        assert_eq!(v.iter().map(|iv| iv.multiplicity).collect::<Vec<_>>(), vec![3, 1, 2]);
        for w in v.windows(2) {
            assert!(w[0].hi < w[1].lo);
        }
    }
}
