//! Pauli-string expressions such as `0.5*XX - 0.5*YY` or, with an explicit
//! qubit count, the indexed form `Z3` / `X1X2`.
//!
//! Qubit 1 is the leftmost letter and the most significant tensor factor.

use std::fmt;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::OperatorMatrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn matrix<T: Scalar>(self) -> OperatorMatrix<T> {
        PauliTerm::new(Complex::new(T::one(), T::zero()), vec![self])
            .expect("single letter term")
            .materialize()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm<T: Scalar> {
    pub coefficient: Complex<T>,
    letters: Vec<Pauli>,
}

impl<T: Scalar> PauliTerm<T> {
    pub fn new(coefficient: Complex<T>, letters: Vec<Pauli>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::Parse {
                offset: 0,
                message: "Pauli term has no letters".into(),
            });
        }
        Ok(Self {
            coefficient,
            letters,
        })
    }

    /// A single Pauli on `qubit` (1-based) of `n`, identity elsewhere.
    pub fn single(p: Pauli, qubit: usize, n: usize) -> Result<Self> {
        if qubit == 0 || qubit > n {
            return Err(Error::BadIndex {
                index: qubit,
                count: n,
            });
        }
        let mut letters = vec![Pauli::I; n];
        letters[qubit - 1] = p;
        Self::new(Complex::new(T::one(), T::zero()), letters)
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn num_qubits(&self) -> usize {
        self.letters.len()
    }

    /// Bit-flip mask and the per-column phase of the (monomial) Pauli string.
    fn column_action(&self, col: usize) -> (usize, Complex<T>) {
        let n = self.letters.len();
        let mut row = col;
        let mut phase = self.coefficient;
        let i = Complex::new(T::zero(), T::one());
        for (q, &p) in self.letters.iter().enumerate() {
            let bit = n - 1 - q;
            let b = (col >> bit) & 1;
            match p {
                Pauli::I => {}
                Pauli::X => row ^= 1 << bit,
                Pauli::Z => {
                    if b == 1 {
                        phase = -phase;
                    }
                }
                Pauli::Y => {
                    row ^= 1 << bit;
                    phase = if b == 0 { phase * i } else { -(phase * i) };
                }
            }
        }
        (row, phase)
    }

    fn accumulate_into(&self, out: &mut OperatorMatrix<T>) {
        for col in 0..out.dim() {
            let (row, phase) = self.column_action(col);
            out[(row, col)] = out[(row, col)] + phase;
        }
    }

    pub fn materialize(&self) -> OperatorMatrix<T> {
        let mut out = OperatorMatrix::zeros(1 << self.letters.len());
        self.accumulate_into(&mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliExpr<T: Scalar> {
    terms: Vec<PauliTerm<T>>,
}

impl<T: Scalar> PauliExpr<T> {
    pub fn new(terms: Vec<PauliTerm<T>>) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::Parse {
            offset: 0,
            message: "empty expression".into(),
        })?;
        let n = first.num_qubits();
        if let Some(bad) = terms.iter().find(|t| t.num_qubits() != n) {
            return Err(Error::MixedArity {
                expected: n,
                found: bad.num_qubits(),
            });
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[PauliTerm<T>] {
        &self.terms
    }

    pub fn num_qubits(&self) -> usize {
        self.terms[0].num_qubits()
    }

    pub fn scaled(&self, a: Complex<T>) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| PauliTerm {
                    coefficient: t.coefficient * a,
                    letters: t.letters.clone(),
                })
                .collect(),
        }
    }

    /// Formal sum (term lists are concatenated, not simplified).
    pub fn sum(&self, other: &Self) -> Result<Self> {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::new(terms)
    }

    /// `Σ_i X_i` style sums of one letter over every qubit.
    pub fn uniform_sum(p: Pauli, n: usize) -> Result<Self> {
        Self::new((1..=n).map(|q| PauliTerm::single(p, q, n)).collect::<Result<_>>()?)
    }
}

/// Dense matrix of the expression on `2^N` dimensions.
pub fn materialize<T: Scalar>(e: &PauliExpr<T>, max_dim: usize) -> Result<OperatorMatrix<T>> {
    let n = e.num_qubits();
    let dim = 1usize.checked_shl(n as u32).filter(|_| n < usize::BITS as usize).unwrap_or(usize::MAX);
    if dim > max_dim {
        return Err(Error::DimensionOverflow { dim, max: max_dim });
    }
    let mut out = OperatorMatrix::zeros(dim);
    for t in &e.terms {
        t.accumulate_into(&mut out);
    }
    Ok(out)
}

impl<T: Scalar> fmt::Display for PauliExpr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, t) in self.terms.iter().enumerate() {
            let letters: String = t.letters.iter().map(|p| p.as_char()).collect();
            let z = t.coefficient;
            if z.im == T::zero() {
                let negative = z.re.is_sign_negative();
                let mag = z.re.abs();
                match (k, negative) {
                    (0, false) => write!(f, "{mag}*{letters}")?,
                    (0, true) => write!(f, "-{mag}*{letters}")?,
                    (_, false) => write!(f, " + {mag}*{letters}")?,
                    (_, true) => write!(f, " - {mag}*{letters}")?,
                }
            } else {
                if k > 0 {
                    write!(f, " + ")?;
                }
                let sign = if z.im.is_sign_negative() { '-' } else { '+' };
                write!(f, "({}{}{}i)*{}", z.re, sign, z.im.abs(), letters)?;
            }
        }
        Ok(())
    }
}

/// Parses the plain-letter grammar (every term spells out all `N` letters).
pub fn parse_pauli_expr<T: Scalar>(text: &str) -> Result<PauliExpr<T>> {
    Parser::new(text, None).parse()
}

/// Parses with a known qubit count, additionally accepting indexed terms
/// like `Z3` or `X1X2` that name only the non-identity factors.
pub fn parse_pauli_expr_on<T: Scalar>(text: &str, num_qubits: usize) -> Result<PauliExpr<T>> {
    let e = Parser::new(text, Some(num_qubits)).parse()?;
    if e.num_qubits() != num_qubits {
        return Err(Error::MixedArity {
            expected: num_qubits,
            found: e.num_qubits(),
        });
    }
    Ok(e)
}

struct Parser<'a, T> {
    bytes: &'a [u8],
    pos: usize,
    num_qubits: Option<usize>,
    _scalar: std::marker::PhantomData<T>,
}

impl<'a, T: Scalar> Parser<'a, T> {
    fn new(src: &'a str, num_qubits: Option<usize>) -> Self {
        Self {
            bytes: src.as_bytes(),
            pos: 0,
            num_qubits,
            _scalar: std::marker::PhantomData,
        }
    }

    fn err<R>(&self, offset: usize, message: impl Into<String>) -> Result<R> {
        Err(Error::Parse {
            offset,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<PauliExpr<T>> {
        let mut terms = Vec::new();
        self.skip_ws();
        let mut sign = T::one();
        if let Some(b @ (b'+' | b'-')) = self.peek() {
            if b == b'-' {
                sign = -T::one();
            }
            self.pos += 1;
        }
        loop {
            self.skip_ws();
            let mut term = self.term()?;
            term.coefficient = term.coefficient * sign;
            if let Some(first) = terms.first() {
                let first: &PauliTerm<T> = first;
                if first.num_qubits() != term.num_qubits() {
                    return Err(Error::MixedArity {
                        expected: first.num_qubits(),
                        found: term.num_qubits(),
                    });
                }
            }
            terms.push(term);
            self.skip_ws();
            match self.peek() {
                None => break,
                Some(b'+') => sign = T::one(),
                Some(b'-') => sign = -T::one(),
                Some(other) => {
                    return self.err(self.pos, format!("expected '+' or '-', found '{}'", other as char))
                }
            }
            self.pos += 1;
        }
        PauliExpr::new(terms)
    }

    fn term(&mut self) -> Result<PauliTerm<T>> {
        let coefficient = match self.peek() {
            Some(b'(') => {
                let z = self.paren_coefficient()?;
                self.expect_star()?;
                z
            }
            Some(b) if b.is_ascii_digit() || b == b'.' || b == b'i' => {
                let z = self.bare_coefficient()?;
                self.expect_star()?;
                z
            }
            _ => Complex::new(T::one(), T::zero()),
        };
        let letters = self.letters()?;
        PauliTerm::new(coefficient, letters)
    }

    fn expect_star(&mut self) -> Result<()> {
        self.skip_ws();
        if self.peek() == Some(b'*') {
            self.pos += 1;
            self.skip_ws();
            Ok(())
        } else {
            self.err(self.pos, "expected '*' after coefficient")
        }
    }

    fn number(&mut self) -> Result<T> {
        let start = self.pos;
        while let Some(b) = self.peek() {
            let exp_sign = (b == b'+' || b == b'-')
                && self.pos > start
                && matches!(self.bytes[self.pos - 1], b'e' | b'E');
            if b.is_ascii_digit() || b == b'.' || b == b'e' || b == b'E' || exp_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii slice");
        text.parse::<T>().or_else(|_| self.err(start, format!("invalid number '{text}'")))
    }

    /// `1.5`, `2i`, `i`, or the unparenthesized complex form `0.5+0.5i`.
    fn bare_coefficient(&mut self) -> Result<Complex<T>> {
        if self.peek() == Some(b'i') {
            self.pos += 1;
            return Ok(Complex::new(T::zero(), T::one()));
        }
        let re = self.number()?;
        if self.peek() == Some(b'i') {
            self.pos += 1;
            return Ok(Complex::new(T::zero(), re));
        }
        // look ahead for `± <number> i *`
        let save = self.pos;
        self.skip_ws();
        if let Some(s @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            self.skip_ws();
            if matches!(self.peek(), Some(b) if b.is_ascii_digit() || b == b'.' || b == b'i') {
                let im = if self.peek() == Some(b'i') {
                    T::one()
                } else {
                    self.number().unwrap_or_else(|_| T::nan())
                };
                let is_imag = self.peek() == Some(b'i');
                if is_imag && !im.is_nan() {
                    self.pos += 1;
                    let after = self.pos;
                    self.skip_ws();
                    if self.peek() == Some(b'*') {
                        self.pos = after;
                        let im = if s == b'-' { -im } else { im };
                        return Ok(Complex::new(re, im));
                    }
                }
            }
        }
        self.pos = save;
        Ok(Complex::new(re, T::zero()))
    }

    /// `(a+bi)`, `(a-bi)`, `(bi)`, `(a)`, each part optionally signed.
    fn paren_coefficient(&mut self) -> Result<Complex<T>> {
        let open = self.pos;
        self.pos += 1;
        let mut z = Complex::new(T::zero(), T::zero());
        let mut any = false;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b')') => {
                    self.pos += 1;
                    break;
                }
                None => return self.err(open, "unclosed '('"),
                _ => {}
            }
            let mut sign = T::one();
            if let Some(b @ (b'+' | b'-')) = self.peek() {
                if b == b'-' {
                    sign = -T::one();
                }
                self.pos += 1;
                self.skip_ws();
            } else if any {
                return self.err(self.pos, "expected '+' or '-' inside coefficient");
            }
            let value = if self.peek() == Some(b'i') {
                T::one()
            } else {
                self.number()?
            };
            if self.peek() == Some(b'i') {
                self.pos += 1;
                z.im = z.im + sign * value;
            } else {
                z.re = z.re + sign * value;
            }
            any = true;
        }
        if !any {
            return self.err(open, "empty coefficient");
        }
        Ok(z)
    }

    fn letters(&mut self) -> Result<Vec<Pauli>> {
        let start = self.pos;
        let mut plain = Vec::new();
        let mut indexed: Vec<(Pauli, usize, usize)> = Vec::new();
        while let Some(b) = self.peek() {
            let Some(p) = Pauli::from_char(b as char) else {
                break;
            };
            let letter_at = self.pos;
            self.pos += 1;
            let digits_start = self.pos;
            while matches!(self.peek(), Some(d) if d.is_ascii_digit()) {
                self.pos += 1;
            }
            if self.pos > digits_start {
                let idx: usize = std::str::from_utf8(&self.bytes[digits_start..self.pos])
                    .expect("ascii digits")
                    .parse()
                    .or_else(|_| self.err(digits_start, "qubit index too large"))?;
                indexed.push((p, idx, letter_at));
            } else {
                plain.push(p);
            }
        }
        match (plain.is_empty(), indexed.is_empty()) {
            (true, true) => self.err(start, "expected Pauli letters I, X, Y or Z"),
            (false, true) => Ok(plain),
            (true, false) => {
                let Some(n) = self.num_qubits else {
                    return self.err(start, "indexed Pauli terms need an explicit qubit count");
                };
                let mut letters = vec![Pauli::I; n];
                for (p, idx, at) in indexed {
                    if idx == 0 || idx > n {
                        return self.err(at, format!("qubit index {idx} outside 1..={n}"));
                    }
                    if letters[idx - 1] != Pauli::I {
                        return self.err(at, format!("qubit {idx} named twice"));
                    }
                    letters[idx - 1] = p;
                }
                Ok(letters)
            }
            (false, false) => self.err(start, "cannot mix indexed and plain letters in one term"),
        }
    }
}
