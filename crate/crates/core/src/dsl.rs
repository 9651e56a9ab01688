//! Text form of k-community specifications.
//!
//! ```text
//! spec   := layer step+ ";" metric
//! step   := "@(" layer "," layer ")" layer
//! layer  := [A-Za-z_][A-Za-z0-9_]*
//! metric := "we" | "wd" | "wh"
//! ```
//!
//! Whitespace may appear between any two tokens. `@(i,j)` composes layer `i`
//! with layer `j`; the operand written after a step must repeat `j`.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::coupling::WeightMetric;
use crate::kcommunity::{KCommunitySpec, Step};
use crate::network::{layer_adjacency, HeMLN, LayerAdjacencyGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("spec error at byte {offset}: {message}")]
pub struct SpecParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token<'a> {
    Ident(&'a str),
    At,
    Open,
    Close,
    Comma,
    Semi,
}

impl fmt::Display for Token<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(s) => write!(f, "identifier {s:?}"),
            Token::At => f.write_str("'@'"),
            Token::Open => f.write_str("'('"),
            Token::Close => f.write_str("')'"),
            Token::Comma => f.write_str("','"),
            Token::Semi => f.write_str("';'"),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token<'_>)>, SpecParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let tok = match c {
            b'@' => Token::At,
            b'(' => Token::Open,
            b')' => Token::Close,
            b',' => Token::Comma,
            b';' => Token::Semi,
            c if c.is_ascii_whitespace() => {
                i += 1;
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Token::Ident(&src[start..i])));
                continue;
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(SpecParseError {
                    offset: i,
                    message: format!("unexpected character {ch:?}"),
                });
            }
        };
        out.push((i, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(usize, Token<'a>)>,
    pos: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn error(&self, message: impl Into<String>) -> SpecParseError {
        SpecParseError {
            offset: self.offset(),
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&Token<'a>> {
        self.tokens.get(self.pos).map(|t| &t.1)
    }

    fn expect(&mut self, want: Token<'static>) -> Result<(), SpecParseError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.error(format!("expected {want}, found {t}"))),
            None => Err(self.error(format!("expected {want}, found end of input"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<(usize, &'a str), SpecParseError> {
        match self.peek() {
            Some(&Token::Ident(s)) => {
                let at = self.offset();
                self.pos += 1;
                Ok((at, s))
            }
            Some(t) => Err(self.error(format!("expected {what}, found {t}"))),
            None => Err(self.error(format!("expected {what}, found end of input"))),
        }
    }
}

/// Parses specification text into a [`KCommunitySpec`].
pub fn parse_spec(src: &str) -> Result<KCommunitySpec, SpecParseError> {
    let mut p = Parser {
        tokens: tokenize(src)?,
        pos: 0,
        end: src.len(),
    };
    let (_, start) = p.ident("layer name")?;
    let mut processed = BTreeSet::from([start]);
    let mut predecessor = start;
    let mut steps = Vec::new();

    loop {
        match p.peek() {
            Some(Token::At) => {}
            _ if !steps.is_empty() => break,
            Some(t) => return Err(p.error(format!("expected '@', found {t}"))),
            None => return Err(p.error("expected '@', found end of input")),
        }
        p.pos += 1;
        p.expect(Token::Open)?;
        let (left_at, left) = p.ident("left layer")?;
        p.expect(Token::Comma)?;
        let (right_at, right) = p.ident("right layer")?;
        p.expect(Token::Close)?;
        let (operand_at, operand) = p.ident("layer operand")?;

        if left != predecessor && !processed.contains(left) {
            return Err(SpecParseError {
                offset: left_at,
                message: format!(
                    "step left layer {left} not the written predecessor {predecessor} and not previously processed"
                ),
            });
        }
        if left == right {
            return Err(SpecParseError {
                offset: right_at,
                message: format!("step composes layer {left} with itself"),
            });
        }
        if operand != right {
            return Err(SpecParseError {
                offset: operand_at,
                message: format!("operand {operand} does not match step right layer {right}"),
            });
        }
        processed.insert(right);
        predecessor = operand;
        steps.push(Step::new(left, right));
    }

    p.expect(Token::Semi)?;
    let (metric_at, metric) = p.ident("metric")?;
    let metric = match metric {
        "we" => WeightMetric::EdgeCount,
        "wd" => WeightMetric::DensityEdgeFraction,
        "wh" => WeightMetric::HubParticipation,
        other => {
            return Err(SpecParseError {
                offset: metric_at,
                message: format!("unknown metric {other:?} (expected we, wd or wh)"),
            })
        }
    };
    if let Some(t) = p.peek() {
        return Err(p.error(format!("unexpected trailing {t}")));
    }
    Ok(KCommunitySpec {
        start_layer: start.to_owned(),
        steps,
        metric,
    })
}

/// Canonical text form; `parse_spec(&print_spec(s)) == s`.
pub fn print_spec(spec: &KCommunitySpec) -> String {
    let mut out = spec.start_layer.clone();
    for s in &spec.steps {
        out.push_str(&format!(" @({},{}) {}", s.left, s.right, s.right));
    }
    out.push_str(" ; ");
    out.push_str(spec.metric.token());
    out
}

/// Checks a spec against a network; returns every violation found.
pub fn validate_spec(spec: &KCommunitySpec, h: &HeMLN) -> Vec<String> {
    let adjacency = layer_adjacency(h);
    let mut out = Vec::new();
    if !adjacency.nodes.contains(&spec.start_layer) {
        out.push(format!("unknown layer {}", spec.start_layer));
    }
    if spec.steps.is_empty() {
        out.push("spec has no composition steps".to_owned());
    }
    if let Some(first) = spec.steps.first() {
        if first.left != spec.start_layer {
            out.push(format!(
                "first step left layer {} is not the start layer {}",
                first.left, spec.start_layer
            ));
        }
    }
    let mut processed = BTreeSet::from([spec.start_layer.as_str()]);
    for (i, s) in spec.steps.iter().enumerate() {
        for name in [&s.left, &s.right] {
            if !adjacency.nodes.contains(name) {
                out.push(format!("step {i}: unknown layer {name}"));
            }
        }
        if s.left == s.right {
            out.push(format!("step {i}: layer {} composed with itself", s.left));
        }
        if !processed.contains(s.left.as_str()) {
            out.push(format!(
                "step {i}: left layer {} not in processed set",
                s.left
            ));
        }
        if s.left != s.right && !adjacency.has_edge(&s.left, &s.right) {
            out.push(format!(
                "step {i}: layers {} and {} not coupled",
                s.left, s.right
            ));
        }
        processed.insert(&s.left);
        processed.insert(&s.right);
    }
    let pairs = spec
        .steps
        .iter()
        .map(|s| (s.left.as_str(), s.right.as_str()));
    if !LayerAdjacencyGraph::is_connected(pairs) {
        out.push("step layer pairs do not form a connected subgraph".to_owned());
    }
    out
}
