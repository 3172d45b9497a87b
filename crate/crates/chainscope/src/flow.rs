//! Continuous vector fields on the d-torus and their lift integration.
//!
//! Fields are evaluated on the universal cover `R^d`; every field here is
//! 1-periodic in each coordinate, so evaluation at a lifted point agrees with
//! evaluation at its base point. Integration never reduces mod 1, which keeps
//! the accumulated displacement of an arc exact in the cover.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;
use std::fmt::Write as _;

/// A point on the torus `R^d / Z^d`, coordinates in `[0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusPoint {
    coords: Vec<f64>,
}

impl TorusPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if coords.iter().any(|c| !c.is_finite() || *c < 0.0 || *c >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "torus coordinates must lie in [0,1): {coords:?}"
            )));
        }
        Ok(Self { coords })
    }

    /// Reduce an arbitrary point of `R^d` mod 1.
    pub fn from_lift(lift: &[f64]) -> Self {
        let coords = lift.iter().map(|x| x - x.floor()).collect();
        Self { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }
}

/// A point of the universal cover `R^d`, together with its mod-1 base point.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedPoint {
    lift: Vec<f64>,
}

impl LiftedPoint {
    pub fn new(lift: Vec<f64>) -> Self {
        Self { lift }
    }

    pub fn from_base(base: &TorusPoint) -> Self {
        Self {
            lift: base.coords().to_vec(),
        }
    }

    pub fn lift(&self) -> &[f64] {
        &self.lift
    }

    /// The base point is the lift reduced mod 1, by construction.
    pub fn base(&self) -> TorusPoint {
        TorusPoint::from_lift(&self.lift)
    }

    pub fn dimension(&self) -> usize {
        self.lift.len()
    }
}

/// An orbit arc computed on the cover.
#[derive(Clone, Debug)]
pub struct FlowSegment {
    pub start: LiftedPoint,
    pub end: LiftedPoint,
    pub duration: f64,
}

impl FlowSegment {
    /// Real homology displacement of the arc: `end.lift - start.lift`.
    pub fn displacement(&self) -> Vec<f64> {
        self.end
            .lift()
            .iter()
            .zip(self.start.lift())
            .map(|(e, s)| e - s)
            .collect()
    }
}

/// One term of a trigonometric polynomial: `c`, `c*sin(2pi*(a.x + b))` or
/// `c*cos(2pi*(a.x + b))` with an integer frequency vector `a`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TrigTerm {
    Constant(f64),
    Sin {
        coeff: f64,
        freq: Vec<i64>,
        phase: f64,
    },
    Cos {
        coeff: f64,
        freq: Vec<i64>,
        phase: f64,
    },
}

impl TrigTerm {
    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            TrigTerm::Constant(c) => *c,
            TrigTerm::Sin { coeff, freq, phase } => {
                let arg: f64 = freq.iter().zip(x).map(|(a, xi)| *a as f64 * xi).sum();
                coeff * (2.0 * PI * (arg + phase)).sin()
            }
            TrigTerm::Cos { coeff, freq, phase } => {
                let arg: f64 = freq.iter().zip(x).map(|(a, xi)| *a as f64 * xi).sum();
                coeff * (2.0 * PI * (arg + phase)).cos()
            }
        }
    }

    fn magnitude(&self) -> f64 {
        match self {
            TrigTerm::Constant(c) => c.abs(),
            TrigTerm::Sin { coeff, .. } | TrigTerm::Cos { coeff, .. } => coeff.abs(),
        }
    }

    fn canonical(&self, out: &mut String) {
        match self {
            TrigTerm::Constant(c) => {
                let _ = write!(out, "const({})", c.to_bits());
            }
            TrigTerm::Sin { coeff, freq, phase } => {
                let _ = write!(out, "sin({},{:?},{})", coeff.to_bits(), freq, phase.to_bits());
            }
            TrigTerm::Cos { coeff, freq, phase } => {
                let _ = write!(out, "cos({},{:?},{})", coeff.to_bits(), freq, phase.to_bits());
            }
        }
    }
}

/// A component function given by a sum of trigonometric terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    pub terms: Vec<TrigTerm>,
}

impl TrigPoly {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    /// Upper bound on |value| over the torus.
    pub fn magnitude_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.magnitude()).sum()
    }
}

/// A continuous vector field on the d-torus.
///
/// `Linear` is the constant field of a linear flow; `CircleSlow` is the
/// circle field `v(x) = sin^2(pi x)`, vanishing only at 0; `FigureOne` is a
/// two-dimensional field with exactly two fixed points connected by a
/// heteroclinic pattern; `Expression` is a user-supplied trig polynomial per
/// coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum VectorField {
    Linear { slope: Vec<f64> },
    CircleSlow,
    FigureOne,
    Expression { components: Vec<TrigPoly> },
}

/// JSON document for expression fields.
#[derive(Serialize, Deserialize)]
struct ExpressionDoc {
    dimension: usize,
    components: Vec<String>,
}

impl VectorField {
    pub fn linear(slope: Vec<f64>) -> Result<Self> {
        if slope.is_empty() {
            return Err(Error::InvalidParameter("slope must be non-empty".into()));
        }
        if slope.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidParameter("slope must be finite".into()));
        }
        Ok(VectorField::Linear { slope })
    }

    /// The circle field `v(x) = sin^2(pi x)`: one fixed point at 0, positive
    /// elsewhere.
    pub fn circle_slow() -> Self {
        VectorField::CircleSlow
    }

    /// A Z^2-periodic field with fixed points exactly at p = (0,0) and
    /// q = (1/2,1/2). In the diagonal coordinates s = x+y, t = x-y it reads
    /// ds/dt = -sin^2(pi s), dt/dt = -cos(pi s) sin(pi t): the anti-diagonal
    /// circle {s = 0 mod 1} is invariant and flows from q to p on both halves,
    /// the diagonal circle {t = 0 mod 1} is invariant and carries an orbit
    /// from p to q in the (-1,-1) direction, and every other orbit crosses
    /// the lines x+y = const transversally.
    pub fn figure_one() -> Self {
        VectorField::FigureOne
    }

    pub fn expression(dimension: usize, components: Vec<TrigPoly>) -> Result<Self> {
        if components.len() != dimension || dimension == 0 {
            return Err(Error::InvalidParameter(format!(
                "need {dimension} components, got {}",
                components.len()
            )));
        }
        for poly in &components {
            for term in &poly.terms {
                match term {
                    TrigTerm::Sin { freq, .. } | TrigTerm::Cos { freq, .. } => {
                        if freq.len() != dimension {
                            return Err(Error::InvalidParameter(
                                "frequency vector dimension mismatch".into(),
                            ));
                        }
                    }
                    TrigTerm::Constant(_) => {}
                }
            }
        }
        Ok(VectorField::Expression { components })
    }

    /// Parse the JSON document `{"dimension": d, "components": [..]}`.
    pub fn from_expression_json(json: &str) -> Result<Self> {
        let doc: ExpressionDoc = serde_json::from_str(json)?;
        let components = doc
            .components
            .iter()
            .map(|s| parse_trig_poly(s, doc.dimension))
            .collect::<Result<Vec<_>>>()?;
        Self::expression(doc.dimension, components)
    }

    pub fn dimension(&self) -> usize {
        match self {
            VectorField::Linear { slope } => slope.len(),
            VectorField::CircleSlow => 1,
            VectorField::FigureOne => 2,
            VectorField::Expression { components } => components.len(),
        }
    }

    /// Evaluate at a lift point (1-periodic per coordinate).
    pub fn eval_lift(&self, x: &[f64], out: &mut [f64]) {
        match self {
            VectorField::Linear { slope } => out.copy_from_slice(slope),
            VectorField::CircleSlow => {
                let s = (PI * x[0]).sin();
                out[0] = s * s;
            }
            VectorField::FigureOne => {
                // u+v = -sin^2(pi(x+y)), u-v = -cos(pi(x+y)) sin(pi(x-y)),
                // expanded into Z^2-periodic terms.
                let s2 = (2.0 * PI * (x[0] + x[1])).cos();
                let f = -(1.0 - s2) / 2.0;
                let g = -((2.0 * PI * x[0]).sin() - (2.0 * PI * x[1]).sin()) / 2.0;
                out[0] = (f + g) / 2.0;
                out[1] = (f - g) / 2.0;
            }
            VectorField::Expression { components } => {
                for (o, poly) in out.iter_mut().zip(components) {
                    *o = poly.eval(x);
                }
            }
        }
    }

    /// Per-axis bound on |field value| over the torus.
    pub fn speed_bound(&self) -> Vec<f64> {
        match self {
            VectorField::Linear { slope } => slope.iter().map(|s| s.abs()).collect(),
            VectorField::CircleSlow => vec![1.0],
            VectorField::FigureOne => vec![1.0, 1.0],
            VectorField::Expression { components } => {
                components.iter().map(|p| p.magnitude_bound()).collect()
            }
        }
    }

    /// Content hash identifying the field, embedded in graph files.
    pub fn fingerprint(&self) -> [u8; 32] {
        let mut repr = String::new();
        match self {
            VectorField::Linear { slope } => {
                repr.push_str("linear:");
                for s in slope {
                    let _ = write!(repr, "{},", s.to_bits());
                }
            }
            VectorField::CircleSlow => repr.push_str("circleslow"),
            VectorField::FigureOne => repr.push_str("figure1"),
            VectorField::Expression { components } => {
                repr.push_str("expr:");
                for poly in components {
                    for term in &poly.terms {
                        term.canonical(&mut repr);
                    }
                    repr.push(';');
                }
            }
        }
        let digest = Sha256::digest(repr.as_bytes());
        let mut out = [0u8; 32];
        out.copy_from_slice(&digest);
        out
    }
}

/// Evaluate a field at a torus point.
pub fn evaluate_field(field: &VectorField, p: &TorusPoint) -> Result<Vec<f64>> {
    if p.dimension() != field.dimension() {
        return Err(Error::DimensionMismatch {
            expected: field.dimension(),
            got: p.dimension(),
        });
    }
    let mut out = vec![0.0; p.dimension()];
    field.eval_lift(p.coords(), &mut out);
    Ok(out)
}

/// Integrate the field from a lifted start point for `duration` with the
/// classical fourth-order one-step method, never reducing mod 1.
///
/// The step is rounded down so that an integer number of equal steps covers
/// the duration exactly.
pub fn integrate(
    field: &VectorField,
    start: &LiftedPoint,
    duration: f64,
    step: f64,
) -> Result<FlowSegment> {
    if !(duration > 0.0) {
        return Err(Error::InvalidParameter("duration must be > 0".into()));
    }
    if !(step > 0.0) {
        return Err(Error::InvalidParameter("step must be > 0".into()));
    }
    if start.dimension() != field.dimension() {
        return Err(Error::DimensionMismatch {
            expected: field.dimension(),
            got: start.dimension(),
        });
    }
    let d = start.dimension();
    let n_steps = (duration / step).ceil().max(1.0) as usize;
    let h = duration / n_steps as f64;

    let mut x = start.lift().to_vec();
    let mut k1 = vec![0.0; d];
    let mut k2 = vec![0.0; d];
    let mut k3 = vec![0.0; d];
    let mut k4 = vec![0.0; d];
    let mut scratch = vec![0.0; d];

    for _ in 0..n_steps {
        field.eval_lift(&x, &mut k1);
        for i in 0..d {
            scratch[i] = x[i] + 0.5 * h * k1[i];
        }
        field.eval_lift(&scratch, &mut k2);
        for i in 0..d {
            scratch[i] = x[i] + 0.5 * h * k2[i];
        }
        field.eval_lift(&scratch, &mut k3);
        for i in 0..d {
            scratch[i] = x[i] + h * k3[i];
        }
        field.eval_lift(&scratch, &mut k4);
        for i in 0..d {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteField { at: x });
        }
    }

    Ok(FlowSegment {
        start: start.clone(),
        end: LiftedPoint::new(x),
        duration,
    })
}

/// The field of Figure 1, exposed as a catalog constructor.
pub fn catalog_figure_one() -> VectorField {
    VectorField::figure_one()
}

// --- expression parsing ------------------------------------------------

/// Variables: `x`, `y`, `z`, `w` name axes 0..3; `x0`, `x1`, ... name any
/// axis. Terms look like `0.5*sin(2pi*(x - 2y + 0.25))`, `cos(2pi*(3x1))`,
/// or bare constants, joined by `+`/`-`. Frequency coefficients inside the
/// phase must be integers.
pub fn parse_trig_poly(input: &str, dimension: usize) -> Result<TrigPoly> {
    Parser {
        chars: input.chars().collect(),
        pos: 0,
        dim: dimension,
    }
    .parse()
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    dim: usize,
}

impl Parser {
    fn parse(mut self) -> Result<TrigPoly> {
        let mut terms = Vec::new();
        self.skip_ws();
        let mut sign = 1.0;
        if self.eat('-') {
            sign = -1.0;
        } else {
            self.eat('+');
        }
        loop {
            let term = self.term(sign)?;
            terms.push(term);
            self.skip_ws();
            if self.pos >= self.chars.len() {
                break;
            }
            if self.eat('+') {
                sign = 1.0;
            } else if self.eat('-') {
                sign = -1.0;
            } else {
                return Err(self.err("expected '+' or '-'"));
            }
        }
        Ok(TrigPoly { terms })
    }

    fn term(&mut self, sign: f64) -> Result<TrigTerm> {
        self.skip_ws();
        let mut coeff = sign;
        let mut saw_number = false;
        if let Some(n) = self.try_number()? {
            coeff *= n;
            saw_number = true;
            self.skip_ws();
            if !self.eat('*') {
                // bare constant
                return Ok(TrigTerm::Constant(coeff));
            }
            self.skip_ws();
        }
        let name = self.ident();
        let is_sin = match name.as_str() {
            "sin" => true,
            "cos" => false,
            "" if saw_number => return Err(self.err("expected sin/cos after '*'")),
            _ => return Err(self.err(&format!("expected term, found {name:?}"))),
        };
        self.expect('(')?;
        self.skip_ws();
        // the mandatory 2pi factor
        let two_pi = self.ident_or_number();
        if two_pi != "2pi" {
            return Err(self.err("phase must start with '2pi*'"));
        }
        self.skip_ws();
        self.expect('*')?;
        self.skip_ws();
        self.expect('(')?;
        let (freq, phase) = self.linear_phase()?;
        self.expect(')')?;
        self.skip_ws();
        self.expect(')')?;
        Ok(if is_sin {
            TrigTerm::Sin { coeff, freq, phase }
        } else {
            TrigTerm::Cos { coeff, freq, phase }
        })
    }

    /// Parse `a0*x0 + a1*x1 + ... + b` with integer `a_i`.
    fn linear_phase(&mut self) -> Result<(Vec<i64>, f64)> {
        let mut freq = vec![0i64; self.dim];
        let mut phase = 0.0;
        let mut sign = 1.0;
        self.skip_ws();
        if self.eat('-') {
            sign = -1.0;
        } else {
            self.eat('+');
        }
        loop {
            self.skip_ws();
            let mut value = 1.0;
            let mut saw_number = false;
            if let Some(n) = self.try_number()? {
                value = n;
                saw_number = true;
                self.skip_ws();
                self.eat('*');
                self.skip_ws();
            }
            let name = self.ident();
            if name.is_empty() {
                if !saw_number {
                    return Err(self.err("expected variable or number in phase"));
                }
                phase += sign * value;
            } else {
                let axis = self.axis_index(&name)?;
                let scaled = sign * value;
                if scaled.fract() != 0.0 {
                    return Err(self.err("frequency coefficients must be integers"));
                }
                freq[axis] += scaled as i64;
            }
            self.skip_ws();
            if self.eat('+') {
                sign = 1.0;
            } else if self.eat('-') {
                sign = -1.0;
            } else {
                break;
            }
        }
        Ok((freq, phase))
    }

    fn axis_index(&mut self, name: &str) -> Result<usize> {
        let idx = match name {
            "x" => 0,
            "y" => 1,
            "z" => 2,
            "w" => 3,
            _ => {
                if let Some(rest) = name.strip_prefix('x') {
                    rest.parse::<usize>()
                        .map_err(|_| self.err(&format!("unknown variable {name:?}")))?
                } else {
                    return Err(self.err(&format!("unknown variable {name:?}")));
                }
            }
        };
        if idx >= self.dim {
            return Err(self.err(&format!(
                "variable {name:?} exceeds dimension {}",
                self.dim
            )));
        }
        Ok(idx)
    }

    fn try_number(&mut self) -> Result<Option<f64>> {
        self.skip_ws();
        let start = self.pos;
        let mut seen_digit = false;
        while self.pos < self.chars.len() {
            let c = self.chars[self.pos];
            if c.is_ascii_digit() {
                seen_digit = true;
                self.pos += 1;
            } else if c == '.' && seen_digit
                || c == '.' && self.pos == start
            {
                self.pos += 1;
            } else {
                break;
            }
        }
        if !seen_digit {
            self.pos = start;
            return Ok(None);
        }
        // "2pi" is a token of its own, not the number 2
        if self.peek_pi() {
            self.pos = start;
            return Ok(None);
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<f64>()
            .map(Some)
            .map_err(|_| self.err(&format!("bad number {text:?}")))
    }

    fn peek_pi(&self) -> bool {
        self.chars.get(self.pos) == Some(&'p') && self.chars.get(self.pos + 1) == Some(&'i')
    }

    fn ident(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len()
            && (self.chars[self.pos].is_ascii_alphanumeric())
        {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn ident_or_number(&mut self) -> String {
        self.ident()
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.chars.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected {c:?}")))
        }
    }

    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} at position {}", self.pos))
    }
}
