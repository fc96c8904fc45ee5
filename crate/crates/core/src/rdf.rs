//! RDF terms and quads, with writers and readers for N-Triples, N-Quads and
//! TriG.
//!
//! Only the fragment this crate produces is supported: absolute IRIs, plain
//! and datatyped literals, no blank nodes, no prefixes. Anything outside it is
//! reported as [`RdfError::Unsupported`] rather than skipped.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RdfError {
    #[error("invalid IRI <{0}>: {1}")]
    InvalidIri(String, &'static str),
    #[error("N-Triples cannot carry a named graph (quad in <{0}>)")]
    GraphInTriples(String),
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported construct at line {line}, column {column}: {what}")]
    Unsupported {
        line: usize,
        column: usize,
        what: String,
    },
    #[error("unknown RDF format `{0}`")]
    UnknownFormat(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// An absolute IRI.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(String);

impl Iri {
    pub fn new(iri: impl Into<String>) -> Result<Self, RdfError> {
        let iri = iri.into();
        if let Err(why) = check_iri(&iri) {
            return Err(RdfError::InvalidIri(iri, why));
        }
        Ok(Iri(iri))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

impl AsRef<str> for Iri {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

fn check_iri(iri: &str) -> Result<(), &'static str> {
    let Some(colon) = iri.find(':') else {
        return Err("not absolute");
    };
    let scheme = &iri[..colon];
    let mut sc = scheme.bytes();
    if !matches!(sc.next(), Some(b) if b.is_ascii_alphabetic())
        || !sc.all(|b| b.is_ascii_alphanumeric() || matches!(b, b'+' | b'-' | b'.'))
    {
        return Err("not absolute");
    }
    if iri
        .chars()
        .any(|c| c <= ' ' || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\'))
    {
        return Err("forbidden character");
    }
    Ok(())
}

/// RDF term. Blank nodes are intentionally not representable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RdfTerm {
    Iri(Iri),
    PlainLiteral(String),
    TypedLiteral { lexical: String, datatype: Iri },
}

impl From<Iri> for RdfTerm {
    fn from(iri: Iri) -> Self {
        RdfTerm::Iri(iri)
    }
}

impl RdfTerm {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            RdfTerm::Iri(i) => Some(i),
            _ => None,
        }
    }
}

impl fmt::Display for RdfTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RdfTerm::Iri(iri) => iri.fmt(f),
            RdfTerm::PlainLiteral(lex) => write_literal(f, lex),
            RdfTerm::TypedLiteral { lexical, datatype } => {
                write_literal(f, lexical)?;
                write!(f, "^^{datatype}")
            }
        }
    }
}

fn write_literal(f: &mut fmt::Formatter<'_>, lex: &str) -> fmt::Result {
    f.write_str("\"")?;
    for c in lex.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\r' => f.write_str("\\r")?,
            '\t' => f.write_str("\\t")?,
            '\u{8}' => f.write_str("\\b")?,
            '\u{c}' => f.write_str("\\f")?,
            c if c < ' ' || c == '\u{7f}' => write!(f, "\\u{:04X}", c as u32)?,
            c => write!(f, "{c}")?,
        }
    }
    f.write_str("\"")
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RdfQuad {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: RdfTerm,
    pub graph: Option<Iri>,
}

impl RdfQuad {
    pub fn triple(subject: Iri, predicate: Iri, object: impl Into<RdfTerm>) -> Self {
        RdfQuad {
            subject,
            predicate,
            object: object.into(),
            graph: None,
        }
    }

    pub fn in_graph(subject: Iri, predicate: Iri, object: impl Into<RdfTerm>, graph: Iri) -> Self {
        RdfQuad {
            subject,
            predicate,
            object: object.into(),
            graph: Some(graph),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RdfFormat {
    NTriples,
    NQuads,
    TriG,
}

impl RdfFormat {
    pub fn extension(self) -> &'static str {
        match self {
            RdfFormat::NTriples => "nt",
            RdfFormat::NQuads => "nq",
            RdfFormat::TriG => "trig",
        }
    }

    pub fn supports_graphs(self) -> bool {
        !matches!(self, RdfFormat::NTriples)
    }
}

impl FromStr for RdfFormat {
    type Err = RdfError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nt" | "ntriples" | "n-triples" => Ok(RdfFormat::NTriples),
            "nq" | "nquads" | "n-quads" => Ok(RdfFormat::NQuads),
            "trig" => Ok(RdfFormat::TriG),
            other => Err(RdfError::UnknownFormat(other.to_owned())),
        }
    }
}

impl fmt::Display for RdfFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

/// Streaming writer. N-Triples and N-Quads are written line by line; TriG
/// buffers quads so that each graph becomes one block, blocks ordered by the
/// first appearance of their graph.
pub struct QuadWriter<W: Write> {
    out: W,
    format: RdfFormat,
    trig_groups: Vec<(Option<Iri>, Vec<RdfQuad>)>,
}

impl<W: Write> QuadWriter<W> {
    pub fn new(out: W, format: RdfFormat) -> Self {
        QuadWriter {
            out,
            format,
            trig_groups: Vec::new(),
        }
    }

    pub fn write(&mut self, quad: &RdfQuad) -> Result<(), RdfError> {
        match self.format {
            RdfFormat::NTriples => {
                if let Some(g) = &quad.graph {
                    return Err(RdfError::GraphInTriples(g.as_str().to_owned()));
                }
                writeln!(
                    self.out,
                    "{} {} {} .",
                    quad.subject, quad.predicate, quad.object
                )?;
            }
            RdfFormat::NQuads => match &quad.graph {
                Some(g) => writeln!(
                    self.out,
                    "{} {} {} {} .",
                    quad.subject, quad.predicate, quad.object, g
                )?,
                None => writeln!(
                    self.out,
                    "{} {} {} .",
                    quad.subject, quad.predicate, quad.object
                )?,
            },
            RdfFormat::TriG => {
                // Emitters produce each graph contiguously, so the last group is the common hit.
                match self
                    .trig_groups
                    .iter_mut()
                    .rev()
                    .find(|(g, _)| *g == quad.graph)
                {
                    Some((_, quads)) => quads.push(quad.clone()),
                    None => self
                        .trig_groups
                        .push((quad.graph.clone(), vec![quad.clone()])),
                }
            }
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<W, RdfError> {
        for (graph, quads) in std::mem::take(&mut self.trig_groups) {
            match graph {
                None => {
                    for q in &quads {
                        writeln!(self.out, "{} {} {} .", q.subject, q.predicate, q.object)?;
                    }
                }
                Some(g) => {
                    writeln!(self.out, "{g} {{")?;
                    for q in &quads {
                        writeln!(self.out, "    {} {} {} .", q.subject, q.predicate, q.object)?;
                    }
                    writeln!(self.out, "}}")?;
                }
            }
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

pub fn serialize<'a, I, W>(quads: I, format: RdfFormat, out: W) -> Result<W, RdfError>
where
    I: IntoIterator<Item = &'a RdfQuad>,
    W: Write,
{
    let mut writer = QuadWriter::new(out, format);
    for q in quads {
        writer.write(q)?;
    }
    writer.finish()
}

pub fn serialize_to_string<'a, I>(quads: I, format: RdfFormat) -> Result<String, RdfError>
where
    I: IntoIterator<Item = &'a RdfQuad>,
{
    let bytes = serialize(quads, format, Vec::new())?;
    Ok(String::from_utf8(bytes).expect("writer emits UTF-8"))
}

/// Parse a whole document.
pub fn parse(format: RdfFormat, input: &str) -> Result<Vec<RdfQuad>, RdfError> {
    match format {
        RdfFormat::NTriples | RdfFormat::NQuads => {
            LineQuads::new(input.as_bytes(), format).collect()
        }
        RdfFormat::TriG => TrigParser::new(input).parse_document(),
    }
}

/// Parse from a reader. N-Triples and N-Quads are read line by line.
pub fn parse_reader<R: BufRead>(
    format: RdfFormat,
    mut reader: R,
) -> Result<Vec<RdfQuad>, RdfError> {
    match format {
        RdfFormat::NTriples | RdfFormat::NQuads => LineQuads::new(reader, format).collect(),
        RdfFormat::TriG => {
            let mut text = String::new();
            reader.read_to_string(&mut text)?;
            TrigParser::new(&text).parse_document()
        }
    }
}

/// Streaming N-Triples / N-Quads reader.
pub struct LineQuads<R: BufRead> {
    reader: R,
    format: RdfFormat,
    line_no: usize,
    buf: String,
    done: bool,
}

impl<R: BufRead> LineQuads<R> {
    pub fn new(reader: R, format: RdfFormat) -> Self {
        LineQuads {
            reader,
            format,
            line_no: 0,
            buf: String::new(),
            done: false,
        }
    }
}

impl<R: BufRead> Iterator for LineQuads<R> {
    type Item = Result<RdfQuad, RdfError>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            self.buf.clear();
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => self.done = true,
                Ok(_) => {
                    self.line_no += 1;
                    let line = self.buf.trim_end_matches(['\n', '\r']);
                    let mut lexer = Lexer::new(line, self.line_no);
                    match parse_line_statement(&mut lexer, self.format) {
                        Ok(Some(q)) => return Some(Ok(q)),
                        Ok(None) => continue,
                        Err(e) => {
                            self.done = true;
                            return Some(Err(e));
                        }
                    }
                }
                Err(e) => {
                    self.done = true;
                    return Some(Err(e.into()));
                }
            }
        }
        None
    }
}

fn parse_line_statement(
    lx: &mut Lexer<'_>,
    format: RdfFormat,
) -> Result<Option<RdfQuad>, RdfError> {
    let Some(first) = lx.next_token()? else {
        return Ok(None);
    };
    let subject = first.expect_iri(lx)?;
    let predicate = lx.require()?.expect_iri(lx)?;
    let object = lx.require()?.expect_object(lx)?;
    let mut graph = None;
    let mut tok = lx.require()?;
    if format == RdfFormat::NQuads {
        if let Tok::Iri(g) = tok.tok {
            graph = Some(g);
            tok = lx.require()?;
        }
    }
    if tok.tok != Tok::Dot {
        return Err(lx.syntax_at(&tok, "expected `.`"));
    }
    if let Some(extra) = lx.next_token()? {
        return Err(lx.syntax_at(&extra, "unexpected token after `.`"));
    }
    Ok(Some(RdfQuad {
        subject,
        predicate,
        object,
        graph,
    }))
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Iri(Iri),
    Literal(RdfTerm),
    Dot,
    Semicolon,
    Comma,
    LBrace,
    RBrace,
    GraphKeyword,
}

#[derive(Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

impl Spanned {
    fn expect_iri(self, lx: &Lexer<'_>) -> Result<Iri, RdfError> {
        match self.tok {
            Tok::Iri(i) => Ok(i),
            _ => Err(lx.syntax_at(&self, "expected an IRI")),
        }
    }

    fn expect_object(self, lx: &Lexer<'_>) -> Result<RdfTerm, RdfError> {
        match self.tok {
            Tok::Iri(i) => Ok(RdfTerm::Iri(i)),
            Tok::Literal(l) => Ok(l),
            _ => Err(lx.syntax_at(&self, "expected an IRI or literal")),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    line_start: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str, first_line: usize) -> Self {
        Lexer {
            src,
            pos: 0,
            line: first_line,
            line_start: 0,
        }
    }

    fn column(&self) -> usize {
        self.src[self.line_start..self.pos].chars().count() + 1
    }

    fn syntax(&self, message: impl Into<String>) -> RdfError {
        RdfError::Syntax {
            line: self.line,
            column: self.column(),
            message: message.into(),
        }
    }

    fn syntax_at(&self, at: &Spanned, message: impl Into<String>) -> RdfError {
        RdfError::Syntax {
            line: at.line,
            column: at.column,
            message: message.into(),
        }
    }

    fn unsupported(&self, what: impl Into<String>) -> RdfError {
        RdfError::Unsupported {
            line: self.line,
            column: self.column(),
            what: what.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.line_start = self.pos;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn require(&mut self) -> Result<Spanned, RdfError> {
        self.next_token()?
            .ok_or_else(|| self.syntax("unexpected end of input"))
    }

    fn next_token(&mut self) -> Result<Option<Spanned>, RdfError> {
        self.skip_trivia();
        let (line, column) = (self.line, self.column());
        let Some(c) = self.peek() else {
            return Ok(None);
        };
        let tok = match c {
            '<' => Tok::Iri(self.iri_ref()?),
            '"' => self.literal()?,
            '.' => {
                self.bump();
                Tok::Dot
            }
            ';' => {
                self.bump();
                Tok::Semicolon
            }
            ',' => {
                self.bump();
                Tok::Comma
            }
            '{' => {
                self.bump();
                Tok::LBrace
            }
            '}' => {
                self.bump();
                Tok::RBrace
            }
            '_' if self.src[self.pos..].starts_with("_:") => {
                return Err(self.unsupported("blank node"))
            }
            '[' => return Err(self.unsupported("anonymous blank node")),
            '(' => return Err(self.unsupported("collection")),
            '@' => return Err(self.unsupported("directive or language tag")),
            '\'' => return Err(self.unsupported("single-quoted literal")),
            c if c.is_ascii_alphabetic() => {
                let word: String = self.src[self.pos..]
                    .chars()
                    .take_while(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | ':' | '.'))
                    .collect();
                let word = word.trim_end_matches('.');
                if word.eq_ignore_ascii_case("graph") {
                    for _ in 0..word.len() {
                        self.bump();
                    }
                    Tok::GraphKeyword
                } else if word.eq_ignore_ascii_case("prefix") || word.eq_ignore_ascii_case("base") {
                    return Err(self.unsupported("prefix/base directive"));
                } else if word.contains(':') {
                    return Err(self.unsupported(format!("prefixed name `{word}`")));
                } else if word == "a" || word == "true" || word == "false" {
                    return Err(self.unsupported(format!("keyword `{word}`")));
                } else {
                    return Err(self.syntax(format!("unexpected `{word}`")));
                }
            }
            ':' => return Err(self.unsupported("prefixed name")),
            c if c.is_ascii_digit() || c == '+' || c == '-' => {
                return Err(self.unsupported("numeric literal shorthand"))
            }
            other => return Err(self.syntax(format!("unexpected character `{other}`"))),
        };
        Ok(Some(Spanned { tok, line, column }))
    }

    fn iri_ref(&mut self) -> Result<Iri, RdfError> {
        self.bump(); // <
        let mut iri = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => return Err(self.syntax("unterminated IRI")),
                Some('>') => break,
                Some('\\') => iri.push(self.unicode_escape()?),
                Some(c) => iri.push(c),
            }
        }
        Iri::new(iri).map_err(|e| match e {
            RdfError::InvalidIri(iri, "not absolute") => {
                self.unsupported(format!("relative IRI <{iri}>"))
            }
            other => self.syntax(other.to_string()),
        })
    }

    fn unicode_escape(&mut self) -> Result<char, RdfError> {
        let digits = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(self.syntax("invalid escape in IRI")),
        };
        self.hex_char(digits)
    }

    fn hex_char(&mut self, digits: usize) -> Result<char, RdfError> {
        let start = self.pos;
        for _ in 0..digits {
            match self.bump() {
                Some(c) if c.is_ascii_hexdigit() => {}
                _ => return Err(self.syntax("invalid unicode escape")),
            }
        }
        u32::from_str_radix(&self.src[start..self.pos], 16)
            .ok()
            .and_then(char::from_u32)
            .ok_or_else(|| self.syntax("invalid code point"))
    }

    fn literal(&mut self) -> Result<Tok, RdfError> {
        self.bump(); // "
        if self.src[self.pos..].starts_with("\"\"") {
            return Err(self.unsupported("long literal"));
        }
        let mut lex = String::new();
        loop {
            match self.bump() {
                None | Some('\n') | Some('\r') => return Err(self.syntax("unterminated literal")),
                Some('"') => break,
                Some('\\') => {
                    let c = match self.bump() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') => self.hex_char(4)?,
                        Some('U') => self.hex_char(8)?,
                        _ => return Err(self.syntax("invalid escape in literal")),
                    };
                    lex.push(c);
                }
                Some(c) => lex.push(c),
            }
        }
        if self.peek() == Some('@') {
            return Err(self.unsupported("language-tagged literal"));
        }
        if self.src[self.pos..].starts_with("^^") {
            self.bump();
            self.bump();
            if self.peek() != Some('<') {
                return Err(self.unsupported("prefixed datatype"));
            }
            let datatype = self.iri_ref()?;
            return Ok(Tok::Literal(RdfTerm::TypedLiteral {
                lexical: lex,
                datatype,
            }));
        }
        Ok(Tok::Literal(RdfTerm::PlainLiteral(lex)))
    }
}

/// TriG subset: top-level triples, `<g> { ... }`, `GRAPH <g> { ... }` and
/// `{ ... }` blocks, with `;` and `,` lists.
struct TrigParser<'a> {
    lx: Lexer<'a>,
    peeked: Option<Spanned>,
}

impl<'a> TrigParser<'a> {
    fn new(src: &'a str) -> Self {
        TrigParser {
            lx: Lexer::new(src, 1),
            peeked: None,
        }
    }

    fn next(&mut self) -> Result<Option<Spanned>, RdfError> {
        match self.peeked.take() {
            Some(t) => Ok(Some(t)),
            None => self.lx.next_token(),
        }
    }

    fn require(&mut self) -> Result<Spanned, RdfError> {
        self.next()?
            .ok_or_else(|| self.lx.syntax("unexpected end of input"))
    }

    fn peek_tok(&mut self) -> Result<Option<&Tok>, RdfError> {
        if self.peeked.is_none() {
            self.peeked = self.lx.next_token()?;
        }
        Ok(self.peeked.as_ref().map(|s| &s.tok))
    }

    fn parse_document(mut self) -> Result<Vec<RdfQuad>, RdfError> {
        let mut out = Vec::new();
        while let Some(tok) = self.next()? {
            match tok.tok {
                Tok::GraphKeyword => {
                    let g = self.require()?.expect_iri(&self.lx)?;
                    self.expect(Tok::LBrace, "expected `{`")?;
                    self.block(Some(g), &mut out)?;
                }
                Tok::LBrace => self.block(None, &mut out)?,
                Tok::Iri(iri) => {
                    if self.peek_tok()? == Some(&Tok::LBrace) {
                        self.next()?;
                        self.block(Some(iri), &mut out)?;
                    } else {
                        self.triples(iri, None, &mut out)?;
                        let end = self.require()?;
                        if end.tok != Tok::Dot {
                            return Err(self.lx.syntax_at(&end, "expected `.`"));
                        }
                    }
                }
                _ => return Err(self.lx.syntax_at(&tok, "expected a subject or graph")),
            }
        }
        Ok(out)
    }

    fn expect(&mut self, want: Tok, msg: &str) -> Result<(), RdfError> {
        let t = self.require()?;
        if t.tok == want {
            Ok(())
        } else {
            Err(self.lx.syntax_at(&t, msg))
        }
    }

    fn block(&mut self, graph: Option<Iri>, out: &mut Vec<RdfQuad>) -> Result<(), RdfError> {
        loop {
            let t = self.require()?;
            match t.tok {
                Tok::RBrace => return Ok(()),
                Tok::Iri(subject) => {
                    self.triples(subject, graph.clone(), out)?;
                    let end = self.require()?;
                    match end.tok {
                        Tok::Dot => {}
                        Tok::RBrace => return Ok(()),
                        _ => return Err(self.lx.syntax_at(&end, "expected `.` or `}`")),
                    }
                }
                _ => return Err(self.lx.syntax_at(&t, "expected a subject or `}`")),
            }
        }
    }

    fn triples(
        &mut self,
        subject: Iri,
        graph: Option<Iri>,
        out: &mut Vec<RdfQuad>,
    ) -> Result<(), RdfError> {
        loop {
            let predicate = self.require()?.expect_iri(&self.lx)?;
            loop {
                let object = self.require()?.expect_object(&self.lx)?;
                out.push(RdfQuad {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                    graph: graph.clone(),
                });
                if self.peek_tok()? == Some(&Tok::Comma) {
                    self.next()?;
                } else {
                    break;
                }
            }
            if self.peek_tok()? == Some(&Tok::Semicolon) {
                self.next()?;
                // trailing `;` before the terminator
                if matches!(self.peek_tok()?, Some(Tok::Dot) | Some(Tok::RBrace)) {
                    return Ok(());
                }
            } else {
                return Ok(());
            }
        }
    }
}
