use super::{ExactError, Rational, UniPoly};

/// Polynomial in two variables stored as a polynomial in the outer variable
/// whose coefficients are polynomials in the inner variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiPoly {
    coeffs: Vec<UniPoly>,
}

/// Variable to eliminate in [`resultant`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Eliminate {
    Outer,
    Inner,
}

impl BiPoly {
    pub fn new(mut coeffs: Vec<UniPoly>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        BiPoly { coeffs }
    }

    /// Builds from `(outer power, inner power, coefficient)` terms.
    pub fn from_terms(terms: &[(usize, usize, Rational)]) -> Self {
        let mo = terms.iter().map(|t| t.0).max().unwrap_or(0);
        let mut v = vec![UniPoly::zero(); mo + 1];
        for (i, j, c) in terms {
            v[*i] = &v[*i] + &UniPoly::monomial(c.clone(), *j);
        }
        BiPoly::new(v)
    }

    pub fn coeffs(&self) -> &[UniPoly] {
        &self.coeffs
    }

    pub fn outer_degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Swaps the roles of the two variables.
    pub fn transpose(&self) -> Self {
        let inner = self.coeffs.iter().filter_map(|c| c.degree()).max();
        let Some(inner) = inner else { return BiPoly::new(Vec::new()) };
        let v = (0..=inner)
            .map(|j| UniPoly::new(self.coeffs.iter().map(|c| c.coeff(j)).collect()))
            .collect();
        BiPoly::new(v)
    }

    /// Substitutes a value for the outer variable.
    pub fn eval_outer(&self, x: &Rational) -> UniPoly {
        let mut acc = UniPoly::zero();
        for c in self.coeffs.iter().rev() {
            acc = &acc.scale(x) + c;
        }
        acc
    }

    /// Substitutes values for both variables.
    pub fn eval(&self, outer: &Rational, inner: &Rational) -> Rational {
        self.eval_outer(outer).eval(inner)
    }
}

/// Resultant with respect to the chosen variable, as a polynomial in the other one.
pub fn resultant(p: &BiPoly, q: &BiPoly, eliminate: Eliminate) -> Result<UniPoly, ExactError> {
    if eliminate == Eliminate::Inner {
        return resultant(&p.transpose(), &q.transpose(), Eliminate::Outer);
    }
    let (Some(m), Some(n)) = (p.outer_degree(), q.outer_degree()) else {
        if p.outer_degree().unwrap_or(0) == 0 && q.outer_degree().unwrap_or(0) == 0 {
            return Err(ExactError::ConstantResultant);
        }
        return Ok(UniPoly::zero());
    };
    if m == 0 && n == 0 {
        return Err(ExactError::ConstantResultant);
    }
    if m == 0 {
        return Ok(p.coeffs[0].pow(n));
    }
    if n == 0 {
        return Ok(q.coeffs[0].pow(m));
    }
    let size = m + n;
    let mut mat = vec![vec![UniPoly::zero(); size]; size];
    for r in 0..n {
        for k in 0..=m {
            mat[r][r + k] = p.coeffs[m - k].clone();
        }
    }
    for r in 0..m {
        for k in 0..=n {
            mat[n + r][r + k] = q.coeffs[n - k].clone();
        }
    }
    Ok(bareiss_det(mat))
}

/// Fraction-free determinant of a square matrix of polynomials.
fn bareiss_det(mut a: Vec<Vec<UniPoly>>) -> UniPoly {
    let n = a.len();
    let mut negate = false;
    let mut prev = UniPoly::one();
    for k in 0..n.saturating_sub(1) {
        if a[k][k].is_zero() {
            let Some(r) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                return UniPoly::zero();
            };
            a.swap(k, r);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&a[i][j] * &a[k][k]) - &(&a[i][k] * &a[k][j]);
                a[i][j] = num.div_exact(&prev).expect("Bareiss division is exact");
            }
            a[i][k] = UniPoly::zero();
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;

    fn c(n: i64) -> UniPoly {
        UniPoly::from_i64(&[n])
    }

    #[test]
    fn shared_root_gives_zero() {
        let p = BiPoly::new(vec![c(-2), c(1)]);
        let q = BiPoly::new(vec![c(-4), c(0), c(1)]);
        assert!(resultant(&p, &q, Eliminate::Outer).unwrap().is_zero());
    }

    #[test]
    fn linear_pair_gives_difference() {
        // res_x(x - y, x - 3) = y - 3
        let p = BiPoly::new(vec![UniPoly::from_i64(&[0, -1]), c(1)]);
        let q = BiPoly::new(vec![c(-3), c(1)]);
        assert_eq!(resultant(&p, &q, Eliminate::Outer).unwrap(), UniPoly::from_i64(&[-3, 1]));
    }

    #[test]
    fn constant_inputs_rejected() {
        let p = BiPoly::new(vec![c(2)]);
        assert_eq!(resultant(&p, &p, Eliminate::Outer), Err(ExactError::ConstantResultant));
        let q = BiPoly::new(vec![c(1), c(1)]);
        assert_eq!(resultant(&p, &q, Eliminate::Outer).unwrap(), c(2));
    }

    #[test]
    fn eliminating_inner_variable() {
        // x^2 + y^2 - 5 and x - y + 1, eliminate x (stored as inner): 2y^2 - 2y - 4
        let p = BiPoly::from_terms(&[(2, 0, int(1)), (0, 2, int(1)), (0, 0, int(-5))]);
        let q = BiPoly::from_terms(&[(0, 1, int(1)), (1, 0, int(-1)), (0, 0, int(1))]);
        let r = resultant(&p, &q, Eliminate::Inner).unwrap();
        assert_eq!(r.monic(), UniPoly::from_i64(&[-2, -1, 1]));
    }

    #[test]
    fn quadratic_discriminant_via_resultant() {
        // res(p, p') = -a * disc for p = a x^2 + b x + c
        let p = BiPoly::new(vec![c(3), c(5), c(2)]);
        let dp = BiPoly::new(vec![c(5), c(4)]);
        let r = resultant(&p, &dp, Eliminate::Outer).unwrap();
        assert_eq!(r, c(-2 * (25 - 24)));
    }
}
