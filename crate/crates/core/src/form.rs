//! Integral homogeneous forms: parsing, printing, evaluation and
//! definiteness.
//!
//! Grammar: terms separated by `+`/`-`; a term is an optional integer
//! coefficient followed by factors `x<k>` or `x<k>^<e>`, separated by spaces
//! or `*`. Whitespace is insignificant and variables are 1-indexed.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::linalg::IntMatrix;
use crate::poly::{CompiledPoly, Poly};
use crate::rng::{self, StreamTag};
use crate::{Error, ParseError, ParseErrorKind, Result};

/// A nonzero homogeneous polynomial of degree `d ≥ 2` in `s ≥ 1` variables
/// with integer coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Form {
    s: usize,
    d: u32,
    poly: Poly,
}

/// Outcome of a definiteness test. Quadratic and odd-degree verdicts are
/// exact; even degree ≥ 4 relies on sampling unless a witness is found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Definiteness {
    ProvenPositive,
    ProvenNot,
    HeuristicPositive,
    HeuristicNot,
}

impl Definiteness {
    pub fn is_positive(self) -> bool {
        matches!(self, Definiteness::ProvenPositive | Definiteness::HeuristicPositive)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Definiteness::ProvenPositive => "proven-positive",
            Definiteness::ProvenNot => "proven-not",
            Definiteness::HeuristicPositive => "heuristic-positive",
            Definiteness::HeuristicNot => "heuristic-not",
        }
    }
}

const SPHERE_SAMPLES: usize = 5000;
const DESCENT_STEPS: usize = 100;
const POSITIVITY_THRESHOLD: f64 = 1e-9;

impl Form {
    /// Validates and wraps a polynomial.
    pub fn from_poly(poly: Poly) -> Result<Form> {
        let s = poly.nvars();
        if s == 0 {
            return Err(Error::invalid("a form needs at least one variable"));
        }
        if poly.is_zero() {
            return Err(ParseError { pos: 0, kind: ParseErrorKind::ZeroForm }.into());
        }
        let d = poly
            .homogeneous_degree()
            .ok_or_else(|| Error::invalid("polynomial is not homogeneous"))?;
        if d < 2 {
            return Err(ParseError { pos: 0, kind: ParseErrorKind::DegreeTooSmall(d) }.into());
        }
        Ok(Form { s, d, poly })
    }

    pub fn from_terms<I, C>(s: usize, terms: I) -> Result<Form>
    where
        I: IntoIterator<Item = (Vec<u32>, C)>,
        C: Into<BigInt>,
    {
        let mut p = Poly::zero(s);
        for (e, c) in terms {
            if e.len() != s {
                return Err(Error::Dimension { expected: s, got: e.len() });
            }
            p.add_term(e, c.into());
        }
        Form::from_poly(p)
    }

    pub fn parse(text: &str, s: usize) -> Result<Form> {
        Ok(parse_form(text, s)?)
    }

    /// The quadratic form `xᵀGx` of a symmetric integer Gram matrix.
    pub fn from_gram(gram: &IntMatrix) -> Result<Form> {
        if !gram.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        let s = gram.rows();
        let mut p = Poly::zero(s);
        for i in 0..s {
            for j in i..s {
                let mut e = vec![0u32; s];
                e[i] += 1;
                e[j] += 1;
                let c = if i == j { gram[(i, i)].clone() } else { &gram[(i, j)] * 2 };
                p.add_term(e, c);
            }
        }
        Form::from_poly(p)
    }

    /// `x₁² + ⋯ + x_s²`.
    pub fn sum_of_squares(s: usize) -> Form {
        Form::from_gram(&IntMatrix::identity(s)).expect("identity is a valid Gram matrix")
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigInt)> + '_ {
        self.poly.terms()
    }

    pub fn evaluate(&self, x: &[BigInt]) -> Result<BigInt> {
        if x.len() != self.s {
            return Err(Error::Dimension { expected: self.s, got: x.len() });
        }
        Ok(self.poly.eval(x))
    }

    pub fn evaluate_i64(&self, x: &[i64]) -> Result<BigInt> {
        if x.len() != self.s {
            return Err(Error::Dimension { expected: self.s, got: x.len() });
        }
        Ok(self.poly.eval_i64(x))
    }

    pub fn compile(&self) -> Result<CompiledPoly> {
        self.poly.compile().ok_or(Error::Overflow)
    }

    /// Hessian `H = ∂²F` of a quadratic form, so `F(x) = ½ xᵀHx`; entries are
    /// integers even when the Gram matrix `H/2` is not.
    pub fn hessian(&self) -> Result<IntMatrix> {
        if self.d != 2 {
            return Err(Error::Degree { expected: 2, got: self.d });
        }
        let mut h = IntMatrix::zeros(self.s, self.s);
        for (e, c) in self.poly.terms() {
            let vars: Vec<usize> = (0..self.s).filter(|&v| e[v] > 0).collect();
            match vars.as_slice() {
                [i] => h[(*i, *i)] = c * 2,
                [i, j] => {
                    h[(*i, *j)] = c.clone();
                    h[(*j, *i)] = c.clone();
                }
                _ => unreachable!("quadratic monomial"),
            }
        }
        Ok(h)
    }

    /// Gram matrix `H/2` when it is integral.
    pub fn gram(&self) -> Result<Option<IntMatrix>> {
        let h = self.hessian()?;
        let mut g = IntMatrix::zeros(self.s, self.s);
        for i in 0..self.s {
            for j in 0..self.s {
                if (&h[(i, j)] % 2u32) != BigInt::zero() {
                    return Ok(None);
                }
                g[(i, j)] = &h[(i, j)] / 2;
            }
        }
        Ok(Some(g))
    }

    /// `s − rank(H)`, the dimension of the singular locus of a quadratic form.
    pub fn quadratic_singular_dim(&self) -> Result<usize> {
        Ok(self.s - self.hessian()?.rank())
    }

    pub fn is_positive_definite(&self) -> Definiteness {
        if self.d % 2 == 1 {
            // F(−x) = −F(x) and F is not identically zero.
            return Definiteness::ProvenNot;
        }
        if self.d == 2 {
            let h = self.hessian().expect("degree checked");
            return if h.is_positive_definite() {
                Definiteness::ProvenPositive
            } else {
                Definiteness::ProvenNot
            };
        }
        self.sampled_definiteness()
    }

    fn sampled_definiteness(&self) -> Definiteness {
        // F(e_k) is the coefficient of x_k^d.
        for k in 0..self.s {
            let mut e = vec![0u32; self.s];
            e[k] = self.d;
            if !self.poly.coefficient(&e).is_positive() {
                return Definiteness::ProvenNot;
            }
        }
        let Some(c) = self.poly.compile() else {
            return Definiteness::HeuristicNot;
        };
        let scale = self.poly.max_abs_coefficient().to_f64().unwrap_or(f64::MAX);
        let mut rng = rng::stream(0x5eed, StreamTag::Definiteness, 0);
        let mut best = vec![0.0; self.s];
        let mut best_val = f64::INFINITY;
        let mut x = vec![0.0; self.s];
        for _ in 0..SPHERE_SAMPLES {
            for v in x.iter_mut() {
                *v = rng::standard_normal(&mut rng);
            }
            normalize(&mut x);
            let val = c.eval_f64(&x) / scale;
            if val < best_val {
                best_val = val;
                best.copy_from_slice(&x);
            }
        }
        // Projected gradient descent from the best sample.
        let mut step = 0.1;
        for _ in 0..DESCENT_STEPS {
            let g = c.gradient_f64(&best);
            let radial: f64 = g.iter().zip(&best).map(|(a, b)| a * b).sum();
            let cand: Vec<f64> = best
                .iter()
                .zip(&g)
                .map(|(b, gi)| b - step * (gi - radial * b) / scale)
                .collect();
            let mut cand = cand;
            normalize(&mut cand);
            let val = c.eval_f64(&cand) / scale;
            if val < best_val {
                best_val = val;
                best = cand;
                step *= 1.2;
            } else {
                step *= 0.5;
            }
        }
        if best_val > POSITIVITY_THRESHOLD {
            return Definiteness::HeuristicPositive;
        }
        // Try to certify with an integer witness near the minimiser.
        for mag in [1e3, 1e6] {
            let witness: Vec<i64> = best.iter().map(|v| libm::round(v * mag) as i64).collect();
            if witness.iter().any(|&v| v != 0) && !self.poly.eval_i64(&witness).is_positive() {
                return Definiteness::ProvenNot;
            }
        }
        Definiteness::HeuristicNot
    }

    /// Partition of the variables into groups that never share a monomial;
    /// `F` is the sum of forms in disjoint variable sets, one per group.
    pub fn variable_components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.s).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let n = p[y];
                p[y] = r;
                y = n;
            }
            r
        }
        for (e, _) in self.poly.terms() {
            let vars: Vec<usize> = (0..self.s).filter(|&v| e[v] > 0).collect();
            for w in vars.windows(2) {
                let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut root_of_group: Vec<usize> = Vec::new();
        for v in 0..self.s {
            let r = find(&mut parent, v);
            match root_of_group.iter().position(|&g| g == r) {
                Some(k) => groups[k].push(v),
                None => {
                    root_of_group.push(r);
                    groups.push(vec![v]);
                }
            }
        }
        groups
    }

    /// Restriction of the form to a subset of its variables, renumbered.
    pub fn restrict(&self, vars: &[usize]) -> Poly {
        let mut p = Poly::zero(vars.len());
        for (e, c) in self.poly.terms() {
            if (0..self.s).any(|v| e[v] > 0 && !vars.contains(&v)) {
                continue;
            }
            p.add_term(vars.iter().map(|&v| e[v]).collect(), c.clone());
        }
        p
    }
}

fn normalize(x: &mut [f64]) {
    let n = libm::sqrt(x.iter().map(|v| v * v).sum::<f64>());
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.poly, f)
    }
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Form(s={}, d={}: {})", self.s, self.d, self.poly)
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { pos: self.pos, kind }
    }

    fn unexpected(&mut self) -> ParseError {
        match self.peek() {
            Some(_) => {
                let c = core::str::from_utf8(&self.src[self.pos..])
                    .ok()
                    .and_then(|s| s.chars().next())
                    .unwrap_or('?');
                self.err(ParseErrorKind::UnexpectedChar(c))
            }
            None => self.err(ParseErrorKind::UnexpectedEnd),
        }
    }

    fn digits(&mut self) -> &'a str {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        core::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits")
    }
}

/// Parses a homogeneous form in `s` variables.
pub fn parse_form(text: &str, s: usize) -> core::result::Result<Form, ParseError> {
    let mut lx = Lexer { src: text.as_bytes(), pos: 0 };
    let mut poly = Poly::zero(s);
    let mut degree: Option<u32> = None;
    if lx.peek().is_none() {
        return Err(lx.err(ParseErrorKind::Empty));
    }
    let mut first = true;
    loop {
        let mut negative = false;
        match lx.peek() {
            Some(b'+') if first => lx.pos += 1,
            Some(b'-') if first => {
                negative = true;
                lx.pos += 1;
            }
            _ if first => {}
            Some(b'+') => lx.pos += 1,
            Some(b'-') => {
                negative = true;
                lx.pos += 1;
            }
            None => break,
            Some(_) => return Err(lx.unexpected()),
        }
        first = false;
        lx.skip_ws();
        let term_start = lx.pos;
        let (exp, mut coeff) = parse_term(&mut lx, s)?;
        if negative {
            coeff = -coeff;
        }
        let deg: u32 = exp.iter().sum();
        match degree {
            None => degree = Some(deg),
            Some(d) if d != deg => {
                return Err(ParseError {
                    pos: term_start,
                    kind: ParseErrorKind::NonHomogeneous { expected: d, found: deg },
                })
            }
            _ => {}
        }
        poly.add_term(exp, coeff);
    }
    let d = degree.unwrap_or(0);
    if poly.is_zero() {
        return Err(ParseError { pos: 0, kind: ParseErrorKind::ZeroForm });
    }
    if d < 2 {
        return Err(ParseError { pos: 0, kind: ParseErrorKind::DegreeTooSmall(d) });
    }
    Ok(Form { s, d, poly })
}

fn parse_term(lx: &mut Lexer<'_>, s: usize) -> core::result::Result<(Vec<u32>, BigInt), ParseError> {
    let mut exp = vec![0u32; s];
    let mut coeff = BigInt::from(1);
    let mut have_factor = false;
    if matches!(lx.peek(), Some(c) if c.is_ascii_digit()) {
        let start = lx.pos;
        let digits = lx.digits();
        coeff = digits
            .parse::<BigInt>()
            .map_err(|_| ParseError { pos: start, kind: ParseErrorKind::NumberTooLarge })?;
        have_factor = true;
        if lx.peek() == Some(b'*') {
            lx.pos += 1;
            if lx.peek() != Some(b'x') {
                return Err(lx.err(ParseErrorKind::ExpectedVariable));
            }
        }
    }
    let mut pending_star = false;
    loop {
        match lx.peek() {
            Some(b'x') => {
                let var_pos = lx.pos;
                lx.pos += 1;
                let idx_digits = lx.digits();
                if idx_digits.is_empty() {
                    return Err(lx.unexpected());
                }
                let idx: usize = idx_digits
                    .parse()
                    .map_err(|_| ParseError { pos: var_pos, kind: ParseErrorKind::NumberTooLarge })?;
                if idx == 0 {
                    return Err(ParseError { pos: var_pos, kind: ParseErrorKind::ZeroVariableIndex });
                }
                if idx > s {
                    return Err(ParseError {
                        pos: var_pos,
                        kind: ParseErrorKind::VariableOutOfRange { index: idx, s },
                    });
                }
                let mut e = 1u32;
                if lx.peek() == Some(b'^') {
                    lx.pos += 1;
                    let epos = lx.pos;
                    let ed = lx.digits();
                    if ed.is_empty() {
                        return Err(lx.unexpected());
                    }
                    e = ed
                        .parse()
                        .map_err(|_| ParseError { pos: epos, kind: ParseErrorKind::NumberTooLarge })?;
                }
                exp[idx - 1] += e;
                have_factor = true;
                pending_star = false;
            }
            Some(b'*') if have_factor && !pending_star => {
                lx.pos += 1;
                pending_star = true;
            }
            Some(b'+') | Some(b'-') | None if !pending_star && have_factor => break,
            None if pending_star => return Err(lx.err(ParseErrorKind::UnexpectedEnd)),
            _ if pending_star || !have_factor => {
                return Err(match lx.peek() {
                    Some(b'x') => unreachable!(),
                    Some(c) if c.is_ascii_digit() || c == b'+' || c == b'-' || c == b'*' => {
                        lx.err(ParseErrorKind::ExpectedVariable)
                    }
                    _ => lx.unexpected(),
                })
            }
            _ => return Err(lx.unexpected()),
        }
    }
    Ok((exp, coeff))
}

/// Convenience: canonical text of a form, `parse_form(print(F)) == F`.
pub fn print_form(f: &Form) -> String {
    alloc::format!("{f}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn terms(f: &Form) -> Vec<(Vec<u32>, i64)> {
        f.terms().map(|(e, c)| (e.clone(), c.to_i64().unwrap())).collect()
    }

    #[test]
    fn parses_sum_of_squares() {
        let f = Form::parse("x1^2 + x2^2", 2).unwrap();
        assert_eq!(terms(&f), vec![(vec![0, 2], 1), (vec![2, 0], 1)]);
        assert_eq!(f.d(), 2);
    }

    #[test]
    fn parses_products_and_coefficients() {
        let f = Form::parse("x1^3 + 2 x1 x2 x3", 3).unwrap();
        assert_eq!(terms(&f), vec![(vec![1, 1, 1], 2), (vec![3, 0, 0], 1)]);
        let g = Form::parse("x1^3+2*x1*x2*x3", 3).unwrap();
        assert_eq!(f, g);
        let h = Form::parse("  - 3x1 x2 +x2^2 ", 2).unwrap();
        assert_eq!(terms(&h), vec![(vec![0, 2], 1), (vec![1, 1], -3)]);
    }

    #[test]
    fn rejects_non_homogeneous_with_position() {
        let e = parse_form("x1^2 + x2", 2).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::NonHomogeneous { expected: 2, found: 1 });
        assert_eq!(e.pos, 7);
    }

    #[test]
    fn rejects_bad_variables_and_syntax() {
        assert!(matches!(
            parse_form("x1^2 + x3^2", 2).unwrap_err().kind,
            ParseErrorKind::VariableOutOfRange { index: 3, s: 2 }
        ));
        assert_eq!(parse_form("x0^2", 2).unwrap_err().kind, ParseErrorKind::ZeroVariableIndex);
        assert!(parse_form("x1^2 +", 2).is_err());
        assert!(parse_form("x1^2 ++ x2^2", 2).is_err());
        assert!(parse_form("x1^2 x", 2).is_err());
        assert!(parse_form("x1 * * x2", 2).is_err());
        assert!(parse_form("x1^2 y", 2).is_err());
        assert_eq!(parse_form("x1^2 - x1^2", 2).unwrap_err().kind, ParseErrorKind::ZeroForm);
        assert_eq!(parse_form("3 x1", 2).unwrap_err().kind, ParseErrorKind::DegreeTooSmall(1));
        assert_eq!(parse_form("   ", 2).unwrap_err().kind, ParseErrorKind::Empty);
    }

    #[test]
    fn round_trip_examples() {
        for (t, s) in [("x1^2 + x2^2", 2), ("x1^3 + 2 x1 x2 x3 - 5 x3^3", 3), ("-x1 x2", 2)] {
            let f = Form::parse(t, s).unwrap();
            let printed = f.to_string();
            assert_eq!(Form::parse(&printed, s).unwrap(), f);
        }
        assert_eq!(Form::parse("x2^2 + x1^2", 2).unwrap().to_string(), "x1^2 + x2^2");
    }

    #[test]
    fn evaluation() {
        let f = Form::parse("x1^2 + x2^2", 2).unwrap();
        assert_eq!(f.evaluate_i64(&[3, 4]).unwrap(), BigInt::from(25));
        assert_eq!(f.evaluate_i64(&[0, 0]).unwrap(), BigInt::zero());
        assert!(f.evaluate_i64(&[1]).is_err());
        let g = Form::parse("x1^3 - 4 x1 x2^2 + 7 x2^3", 2).unwrap();
        let x = [3i64, -5];
        let x2 = [6i64, -10];
        assert_eq!(g.evaluate_i64(&x2).unwrap(), g.evaluate_i64(&x).unwrap() * 8);
    }

    #[test]
    fn definiteness_verdicts() {
        let id = Form::from_gram(&IntMatrix::identity(2)).unwrap();
        assert_eq!(id.is_positive_definite(), Definiteness::ProvenPositive);
        let bad = Form::from_gram(&IntMatrix::from_rows(&[vec![1i64, 2], vec![2, 1]]).unwrap()).unwrap();
        assert_eq!(bad.is_positive_definite(), Definiteness::ProvenNot);
        let quartic = Form::parse("x1^4 + x2^4", 2).unwrap();
        assert_eq!(quartic.is_positive_definite(), Definiteness::HeuristicPositive);
        let cubic = Form::parse("x1^3 + x2^3", 2).unwrap();
        assert_eq!(cubic.is_positive_definite(), Definiteness::ProvenNot);
        let mixed = Form::parse("x1^4 - 3 x1^2 x2^2 + x2^4", 2).unwrap();
        assert_eq!(mixed.is_positive_definite(), Definiteness::ProvenNot);
        let zero_coeff = Form::parse("x1^4 + x1^2 x2^2", 2).unwrap();
        assert_eq!(zero_coeff.is_positive_definite(), Definiteness::ProvenNot);
    }

    #[test]
    fn singular_dimension() {
        assert_eq!(Form::sum_of_squares(4).quadratic_singular_dim().unwrap(), 0);
        let f = Form::from_gram(&IntMatrix::diagonal(&[1i64, 1, 0])).unwrap();
        assert_eq!(f.quadratic_singular_dim().unwrap(), 1);
        let g = Form::parse("x1^2", 3).unwrap();
        assert_eq!(g.quadratic_singular_dim().unwrap(), 2);
        assert!(Form::parse("x1^3", 1).unwrap().quadratic_singular_dim().is_err());
    }

    #[test]
    fn hessian_and_gram() {
        let f = Form::parse("x1^2 + x1 x2 + x2^2", 2).unwrap();
        assert_eq!(f.hessian().unwrap().to_string(), "[[2, 1], [1, 2]]");
        assert_eq!(f.gram().unwrap(), None);
        let g = Form::sum_of_squares(3);
        assert_eq!(g.gram().unwrap(), Some(IntMatrix::identity(3)));
    }

    #[test]
    fn components() {
        let f = Form::parse("x1^2 + x2 x3 + x4^2", 4).unwrap();
        assert_eq!(f.variable_components(), vec![vec![0], vec![1, 2], vec![3]]);
        assert_eq!(f.restrict(&[1, 2]).to_string(), "x1 x2");
        let _ = f.to_string();
    }
}
