//! Line-oriented circuit description format.
//!
//! ```text
//! format 1                      # optional, must come first
//! modes 4
//! source 0 linear 0deg
//! source 1 amps 0.7071 0 0 -0.7071
//! bs 1 0 R=1/2                  # side port, line port, reflectivity
//! detect 1 zero
//! detect 0 one
//! output 0
//! ```
//!
//! One directive per line, `#` starts a comment. `source <p> linear θdeg`
//! creates the photon (a†_R + e^{−2iθ} a†_L)/√2. Reflectivities are exact
//! fractions so that files round-trip without drift.

use std::fmt;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{FockState, ModeId, PhotonVector, ProductPhotonState};
use crate::optics::{beam_splitter_map, compose, linear_photon, spatial_modes, BeamSplitter, ModeMap};
use crate::postselect::{project_product, Constraint, PostSelectionRule, RuleEntry, Target};

pub const FORMAT_VERSION: u32 = 1;
const MAX_MODES: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// A reduced fraction p/q with 0 ≤ p ≤ q.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Fraction {
    num: u64,
    den: u64,
}

impl Fraction {
    pub fn new(num: u64, den: u64) -> Option<Self> {
        if den == 0 || num > den {
            return None;
        }
        let g = gcd(num, den);
        Some(Fraction { num: num / g, den: den / g })
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub enum SourceKind {
    Linear { degrees: f64 },
    Amps { r: Complex64, l: Complex64 },
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Source {
    pub port: usize,
    pub kind: SourceKind,
}

impl Source {
    fn photon(&self) -> PhotonVector {
        match self.kind {
            SourceKind::Linear { degrees } => linear_photon(self.port, degrees.to_radians()),
            SourceKind::Amps { r, l } => PhotonVector::from([(ModeId::r(self.port), r), (ModeId::l(self.port), l)]),
        }
    }
}

/// `bs <input> <line> R=p/q`: the line port takes the [t, r] row.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct SplitterElement {
    pub input: usize,
    pub line: usize,
    pub reflectivity: Fraction,
}

impl SplitterElement {
    pub fn beam_splitter(&self) -> BeamSplitter {
        BeamSplitter { port_a: self.line, port_b: self.input, reflectivity: self.reflectivity.value() }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Detection {
    Zero,
    One,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Detector {
    pub port: usize,
    pub detection: Detection,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CircuitSpec {
    pub n_spatial: usize,
    pub sources: Vec<Source>,
    pub elements: Vec<SplitterElement>,
    pub detectors: Vec<Detector>,
    pub outputs: Vec<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum BuiltinKind {
    Merge,
    Ghz,
}

impl CircuitSpec {
    /// The post-selection implied by the `detect` directives.
    pub fn rule(&self) -> Option<PostSelectionRule> {
        let entries: Vec<RuleEntry> = self
            .detectors
            .iter()
            .map(|d| RuleEntry {
                target: Target::port(d.port),
                constraint: match d.detection {
                    Detection::Zero => Constraint::Zero,
                    Detection::One => Constraint::ExactlyOnePhotonInChannel,
                },
            })
            .collect();
        PostSelectionRule::new(entries).ok()
    }

    pub fn input_state(&self) -> Result<ProductPhotonState> {
        let mut sources = self.sources.clone();
        sources.sort_by_key(|s| s.port);
        ProductPhotonState::new(sources.iter().map(Source::photon).collect(), Complex64::new(1.0, 0.0))
    }

    /// The network's mode map, elements applied in file order.
    pub fn mode_map(&self) -> Result<ModeMap> {
        let mut u = ModeMap::identity(spatial_modes(self.n_spatial));
        for e in &self.elements {
            u = compose(&u, &beam_splitter_map(&e.beam_splitter(), self.n_spatial)?)?;
        }
        Ok(u)
    }

    pub fn photon_count(&self) -> usize {
        self.sources.len()
    }
}

#[derive(Clone, Debug)]
pub struct Simulation {
    pub unitary: ModeMap,
    /// Unnormalized post-selected output.
    pub state: FockState,
    pub probability: f64,
}

/// Propagates the sources through the network and applies the detectors.
pub fn simulate(spec: &CircuitSpec) -> Result<Simulation> {
    let unitary = spec.mode_map()?;
    let propagated = unitary.apply(&spec.input_state()?)?;
    let state = match spec.rule() {
        Some(rule) => {
            rule.check_range(spec.n_spatial)?;
            project_product(&propagated, &rule)
        }
        None => propagated.expand(),
    };
    let probability = state.norm_sq();
    Ok(Simulation { unitary, state, probability })
}

/// The standard networks: the n-port merge onto port 0, or the merge
/// followed by a split back out to n channels (ports 0 and n..2n−1).
pub fn builtin_circuit(kind: BuiltinKind, n: usize) -> Result<CircuitSpec> {
    if n == 0 {
        return Err(Error::NoPhotons);
    }
    let stage = |input: usize, k: usize| SplitterElement {
        input,
        line: 0,
        reflectivity: Fraction::new(1, k as u64 + 1).expect("1/(k+1) is a valid fraction"),
    };
    let sources = (0..n)
        .map(|l| Source { port: l, kind: SourceKind::Linear { degrees: 180.0 * l as f64 / n as f64 } })
        .collect();
    let mut elements: Vec<SplitterElement> = (1..n).map(|k| stage(k, k)).collect();
    let mut detectors: Vec<Detector> =
        (1..n).map(|port| Detector { port, detection: Detection::Zero }).collect();
    match kind {
        BuiltinKind::Merge => Ok(CircuitSpec { n_spatial: n, sources, elements, detectors, outputs: vec![0] }),
        BuiltinKind::Ghz => {
            // split stage k uses the fresh port n−1+k as its side port
            elements.extend((1..n).rev().map(|k| stage(n - 1 + k, k)));
            let outputs: Vec<usize> = std::iter::once(0).chain(n..2 * n - 1).collect();
            detectors.extend(outputs.iter().map(|&port| Detector { port, detection: Detection::One }));
            Ok(CircuitSpec { n_spatial: 2 * n - 1, sources, elements, detectors, outputs })
        }
    }
}

/// Canonical text form; `parse_circuit(&serialize(s)) == s`.
pub fn serialize(spec: &CircuitSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "format {FORMAT_VERSION}");
    let _ = writeln!(out, "modes {}", spec.n_spatial);
    for s in &spec.sources {
        match s.kind {
            SourceKind::Linear { degrees } => {
                let _ = writeln!(out, "source {} linear {}deg", s.port, degrees);
            }
            SourceKind::Amps { r, l } => {
                let _ = writeln!(out, "source {} amps {} {} {} {}", s.port, r.re, r.im, l.re, l.im);
            }
        }
    }
    for e in &spec.elements {
        let _ = writeln!(out, "bs {} {} R={}", e.input, e.line, e.reflectivity);
    }
    for d in &spec.detectors {
        let word = match d.detection {
            Detection::Zero => "zero",
            Detection::One => "one",
        };
        let _ = writeln!(out, "detect {} {}", d.port, word);
    }
    for p in &spec.outputs {
        let _ = writeln!(out, "output {p}");
    }
    out
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let body = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in body.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                tokens.push(Token { text: &body[s..i], column: body[..s].chars().count() + 1 });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        tokens.push(Token { text: &body[s..], column: body[..s].chars().count() + 1 });
    }
    tokens
}

struct Parser {
    line: usize,
    n_spatial: Option<usize>,
    saw_directive: bool,
    spec: CircuitSpec,
}

impl Parser {
    fn err(&self, column: usize, message: impl Into<String>) -> ParseError {
        ParseError { line: self.line, column, message: message.into() }
    }

    fn arity(&self, tokens: &[Token], expected: usize, usage: &str) -> std::result::Result<(), ParseError> {
        if tokens.len() == expected {
            return Ok(());
        }
        let column = tokens.get(expected).map(|t| t.column).unwrap_or_else(|| {
            tokens.last().map(|t| t.column + t.text.chars().count()).unwrap_or(1)
        });
        Err(self.err(column, format!("expected `{usage}`")))
    }

    fn port(&self, tok: &Token) -> std::result::Result<usize, ParseError> {
        let total = self.n_spatial.ok_or_else(|| self.err(tok.column, "no modes directive"))?;
        let port: usize = tok
            .text
            .parse()
            .map_err(|_| self.err(tok.column, format!("malformed port `{}`", tok.text)))?;
        if port >= total {
            return Err(self.err(tok.column, format!("port {port} out of range for {total} modes")));
        }
        Ok(port)
    }

    fn real(&self, tok: &Token, what: &str) -> std::result::Result<f64, ParseError> {
        match tok.text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.err(tok.column, format!("malformed {what} `{}`", tok.text))),
        }
    }

    fn directive(&mut self, tokens: &[Token]) -> std::result::Result<(), ParseError> {
        let head = &tokens[0];
        match head.text {
            "format" => {
                self.arity(tokens, 2, "format <version>")?;
                if self.saw_directive {
                    return Err(self.err(head.column, "format must be the first directive"));
                }
                if tokens[1].text != FORMAT_VERSION.to_string() {
                    return Err(self.err(tokens[1].column, format!("unsupported format `{}`", tokens[1].text)));
                }
            }
            "modes" => {
                self.arity(tokens, 2, "modes <count>")?;
                if self.n_spatial.is_some() {
                    return Err(self.err(head.column, "duplicate modes directive"));
                }
                let n: usize = tokens[1]
                    .text
                    .parse()
                    .map_err(|_| self.err(tokens[1].column, format!("malformed mode count `{}`", tokens[1].text)))?;
                if n == 0 || n > MAX_MODES {
                    return Err(self.err(tokens[1].column, format!("mode count must be in 1..={MAX_MODES}")));
                }
                self.n_spatial = Some(n);
                self.spec.n_spatial = n;
            }
            "source" => {
                if tokens.len() < 3 {
                    return self.arity(tokens, 4, "source <port> linear <angle>deg");
                }
                let port = self.port(&tokens[1])?;
                if self.spec.sources.iter().any(|s| s.port == port) {
                    return Err(self.err(tokens[1].column, format!("duplicate source on port {port}")));
                }
                let kind = match tokens[2].text {
                    "linear" => {
                        self.arity(tokens, 4, "source <port> linear <angle>deg")?;
                        let tok = &tokens[3];
                        let Some(number) = tok.text.strip_suffix("deg") else {
                            return Err(self.err(tok.column, format!("malformed angle `{}` (expected e.g. 45deg)", tok.text)));
                        };
                        let degrees = self.real(&Token { text: number, column: tok.column }, "angle")?;
                        SourceKind::Linear { degrees }
                    }
                    "amps" => {
                        self.arity(tokens, 7, "source <port> amps <re_R> <im_R> <re_L> <im_L>")?;
                        let mut v = [0.0; 4];
                        for (slot, tok) in v.iter_mut().zip(&tokens[3..7]) {
                            *slot = self.real(tok, "amplitude")?;
                        }
                        if v.iter().all(|&x| x == 0.0) {
                            return Err(self.err(tokens[3].column, "source amplitudes are all zero"));
                        }
                        SourceKind::Amps { r: Complex64::new(v[0], v[1]), l: Complex64::new(v[2], v[3]) }
                    }
                    other => {
                        return Err(self.err(tokens[2].column, format!("unknown source kind `{other}`")));
                    }
                };
                self.spec.sources.push(Source { port, kind });
            }
            "bs" => {
                self.arity(tokens, 4, "bs <port_in> <port_line> R=<p>/<q>")?;
                let input = self.port(&tokens[1])?;
                let line = self.port(&tokens[2])?;
                if input == line {
                    return Err(self.err(tokens[2].column, format!("beam splitter ports must differ (both {line})")));
                }
                let tok = &tokens[3];
                let malformed = || self.err(tok.column, format!("malformed reflectivity `{}`", tok.text));
                let body = tok.text.strip_prefix("R=").ok_or_else(malformed)?;
                let (p, q) = match body.split_once('/') {
                    Some((p, q)) => (p, q),
                    None => (body, "1"),
                };
                let p: u64 = p.parse().map_err(|_| malformed())?;
                let q: u64 = q.parse().map_err(|_| malformed())?;
                let reflectivity = Fraction::new(p, q)
                    .ok_or_else(|| self.err(tok.column, format!("reflectivity `{body}` outside [0, 1]")))?;
                self.spec.elements.push(SplitterElement { input, line, reflectivity });
            }
            "detect" => {
                self.arity(tokens, 3, "detect <port> (zero|one)")?;
                let port = self.port(&tokens[1])?;
                let detection = match tokens[2].text {
                    "zero" => Detection::Zero,
                    "one" => Detection::One,
                    other => return Err(self.err(tokens[2].column, format!("unknown detection `{other}`"))),
                };
                if self.spec.detectors.iter().any(|d| d.port == port) {
                    return Err(self.err(tokens[1].column, format!("duplicate detector on port {port}")));
                }
                self.spec.detectors.push(Detector { port, detection });
            }
            "output" => {
                self.arity(tokens, 2, "output <port>")?;
                let port = self.port(&tokens[1])?;
                if self.spec.outputs.contains(&port) {
                    return Err(self.err(tokens[1].column, format!("duplicate output {port}")));
                }
                self.spec.outputs.push(port);
            }
            other => return Err(self.err(head.column, format!("unknown directive `{other}`"))),
        }
        self.saw_directive = true;
        Ok(())
    }
}

pub fn parse_circuit(text: &str) -> std::result::Result<CircuitSpec, ParseError> {
    let mut parser = Parser {
        line: 0,
        n_spatial: None,
        saw_directive: false,
        spec: CircuitSpec { n_spatial: 0, sources: vec![], elements: vec![], detectors: vec![], outputs: vec![] },
    };
    for (i, line) in text.lines().enumerate() {
        parser.line = i + 1;
        let tokens = tokenize(line);
        if tokens.is_empty() {
            continue;
        }
        parser.directive(&tokens)?;
    }
    if parser.n_spatial.is_none() {
        return Err(ParseError { line: 1, column: 1, message: "no modes directive".into() });
    }
    Ok(parser.spec)
}

/// Parses and converts parse failures into the crate error type.
pub fn load_circuit(text: &str) -> Result<CircuitSpec> {
    Ok(parse_circuit(text)?)
}
